// Component behavior for tMotor.eMotor. Created once by tecsoe; edit freely.
use crate::system::*;

impl SMotor for EMotorForTMotor {
    #[inline]
    fn set_speed(&'static self, speed: i32) {
        let (cell, var, _lg) = self.cell.get_cell_ref();
        // Developers implement the component behavior here.
    }

    #[inline]
    fn stop(&'static self) {
        let (cell, var, _lg) = self.cell.get_cell_ref();
        // Developers implement the component behavior here.
    }
}
