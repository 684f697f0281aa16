// Generated by tecsoe. Do not edit.
// extern: Sync, UnsafeCell
use super::*;

pub struct TLogger {
    pub variable: &'static SyncTLoggerVar,
}

pub struct TLoggerVar {
    pub buf: i32,
}

pub struct SyncTLoggerVar {
    pub unsafe_var: UnsafeCell<TLoggerVar>,
}

unsafe impl Sync for SyncTLoggerVar {}

pub struct ELogForTLogger {
    pub cell: &'static TLogger,
}

pub struct LockGuardForTLogger;

impl TLogger {
    #[inline]
    pub fn get_cell_ref(&'static self) -> (&'static Self, &'static mut TLoggerVar, LockGuardForTLogger) {
        (
            self,
            unsafe { &mut *self.variable.unsafe_var.get() },
            LockGuardForTLogger,
        )
    }
}

pub static LOG1_VAR: SyncTLoggerVar = SyncTLoggerVar {
    unsafe_var: UnsafeCell::new(TLoggerVar {
        buf: 0,
    }),
};

pub static LOG1: TLogger = TLogger {
    variable: &LOG1_VAR,
};

pub static LOG1_E_LOG: ELogForTLogger = ELogForTLogger {
    cell: &LOG1,
};
