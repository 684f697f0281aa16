// Component behavior for tCtrl.eBody. Created once by tecsoe; edit freely.
use crate::system::*;

impl<CSensorT: SSensor + 'static, CMotorT: SMotor + 'static, CLogT: SLog + 'static> SBody for EBodyForTCtrl<CSensorT, CMotorT, CLogT> {
    #[inline]
    fn run(&'static self) {
        let (cell, var, _lg) = self.cell.get_cell_ref();
        // Developers implement the component behavior here.
    }
}
