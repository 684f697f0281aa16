// Component behavior for tLogger.eLog. Created once by tecsoe; edit freely.
use crate::system::*;

impl SLog for ELogForTLogger {
    #[inline]
    fn put(&'static self, value: i32) {
        let (cell, var, _lg) = self.cell.get_cell_ref();
        // Developers implement the component behavior here.
    }
}
