// Generated by tecsoe. Do not edit.
// extern: Sync, UnsafeCell
use super::*;

pub struct TMotor {
    pub port: i32,
    pub variable: &'static SyncTMotorVar,
}

pub struct TMotorVar {
    pub speed: i32,
}

pub struct SyncTMotorVar {
    pub unsafe_var: UnsafeCell<TMotorVar>,
}

unsafe impl Sync for SyncTMotorVar {}

pub struct EMotorForTMotor {
    pub cell: &'static TMotor,
}

pub struct LockGuardForTMotor;

impl TMotor {
    #[inline]
    pub fn get_cell_ref(&'static self) -> (&'static Self, &'static mut TMotorVar, LockGuardForTMotor) {
        (
            self,
            unsafe { &mut *self.variable.unsafe_var.get() },
            LockGuardForTMotor,
        )
    }
}

pub static MOTOR1_VAR: SyncTMotorVar = SyncTMotorVar {
    unsafe_var: UnsafeCell::new(TMotorVar {
        speed: 0,
    }),
};

pub static MOTOR1: TMotor = TMotor {
    port: 2,
    variable: &MOTOR1_VAR,
};

pub static MOTOR1_E_MOTOR: EMotorForTMotor = EMotorForTMotor {
    cell: &MOTOR1,
};
