// Generated by tecsoe. Do not edit.
// extern: TECSSemaphoreRef
pub mod t_ctrl;
pub mod t_logger;
pub mod t_motor;
pub mod t_sensor;

pub use t_ctrl::*;
pub use t_logger::*;
pub use t_motor::*;
pub use t_sensor::*;

pub trait SBody {
    fn run(&'static self);
}

pub trait SLog {
    fn put(&'static self, value: i32);
}

pub trait SMotor {
    fn set_speed(&'static self, speed: i32);
    fn stop(&'static self);
}

pub trait SSensor {
    fn set_device_ref(&'static self);
    fn get_distance(&'static self) -> i32;
}

pub static SENSOR1_EX_CTRL: TECSSemaphoreRef = TECSSemaphoreRef::new(SEM_SENSOR1);
