// Generated by tecsoe. Do not edit.
// extern: Drop, Sync, TECSSemaphoreRef, UnsafeCell
use super::*;

pub struct TSensor {
    pub port: i32,
    pub ex_ctrl_ref: &'static TECSSemaphoreRef,
    pub variable: &'static SyncTSensorVar,
}

pub struct TSensorVar {
    pub last: i32,
}

pub struct SyncTSensorVar {
    pub unsafe_var: UnsafeCell<TSensorVar>,
}

unsafe impl Sync for SyncTSensorVar {}

pub struct ESensorForTSensor {
    pub cell: &'static TSensor,
}

pub struct LockGuardForTSensor {
    ex_ctrl_ref: &'static TECSSemaphoreRef,
}

impl Drop for LockGuardForTSensor {
    fn drop(&mut self) {
        self.ex_ctrl_ref.unlock();
    }
}

impl TSensor {
    #[inline]
    pub fn get_cell_ref(&'static self) -> (&'static Self, &'static mut TSensorVar, LockGuardForTSensor) {
        self.ex_ctrl_ref.lock();
        (
            self,
            unsafe { &mut *self.variable.unsafe_var.get() },
            LockGuardForTSensor { ex_ctrl_ref: self.ex_ctrl_ref },
        )
    }
}

pub static SENSOR1_VAR: SyncTSensorVar = SyncTSensorVar {
    unsafe_var: UnsafeCell::new(TSensorVar {
        last: 0,
    }),
};

pub static SENSOR1: TSensor = TSensor {
    port: 1,
    ex_ctrl_ref: &SENSOR1_EX_CTRL,
    variable: &SENSOR1_VAR,
};

pub static SENSOR1_E_SENSOR: ESensorForTSensor = ESensorForTSensor {
    cell: &SENSOR1,
};
