// Generated by tecsoe. Do not edit.
use super::*;

pub struct TCtrl<CSensorT: SSensor + 'static, CMotorT: SMotor + 'static, CLogT: SLog + 'static> {
    pub c_sensor: &'static CSensorT,
    pub c_motor: &'static CMotorT,
    pub c_log: &'static CLogT,
}

pub struct EBodyForTCtrl<CSensorT: SSensor + 'static, CMotorT: SMotor + 'static, CLogT: SLog + 'static> {
    pub cell: &'static TCtrl<CSensorT, CMotorT, CLogT>,
}

pub struct LockGuardForTCtrl;

impl<CSensorT: SSensor + 'static, CMotorT: SMotor + 'static, CLogT: SLog + 'static> TCtrl<CSensorT, CMotorT, CLogT> {
    #[inline]
    pub fn get_cell_ref(&'static self) -> (&'static Self, (), LockGuardForTCtrl) {
        (
            self,
            (),
            LockGuardForTCtrl,
        )
    }
}

pub static CTRL1: TCtrl<ESensorForTSensor, EMotorForTMotor, ELogForTLogger> = TCtrl {
    c_sensor: &SENSOR1_E_SENSOR,
    c_motor: &MOTOR1_E_MOTOR,
    c_log: &LOG1_E_LOG,
};

pub static CTRL1_E_BODY: EBodyForTCtrl<ESensorForTSensor, EMotorForTMotor, ELogForTLogger> = EBodyForTCtrl {
    cell: &CTRL1,
};
