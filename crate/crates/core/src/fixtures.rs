//! Example systems shipped with the crate, used by tests and the README.

/// Sensor/motor/controller/logger system.
pub const DEMO_CDL: &str = include_str!("../fixtures/demo.cdl");
/// Two tasks, `Main` (1) and `Aux` (2), both reading `Sensor1`.
pub const DEMO_FLOW: &str = include_str!("../fixtures/demo.flow");
/// [`DEMO_FLOW`] plus a third task at priority 3 reading `Sensor1`.
pub const DEMO3_FLOW: &str = include_str!("../fixtures/demo3.flow");
/// Stateful controller `Ctrl2` that always wraps stateful `Filter1`.
pub const CHAIN_CDL: &str = include_str!("../fixtures/chain.cdl");
pub const CHAIN_FLOW: &str = include_str!("../fixtures/chain.flow");
