// Component behavior for tSensor.eSensor. Created once by tecsoe; edit freely.
use crate::system::*;

impl SSensor for ESensorForTSensor {
    #[inline]
    fn set_device_ref(&'static self) {
        let (cell, var, _lg) = self.cell.get_cell_ref();
        // Developers implement the component behavior here.
    }

    #[inline]
    fn get_distance(&'static self) -> i32 {
        let (cell, var, _lg) = self.cell.get_cell_ref();
        // Developers implement the component behavior here.
        todo!()
    }
}
