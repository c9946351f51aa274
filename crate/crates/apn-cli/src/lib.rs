//! Model DSL parsing and command implementations behind the `apn` binary.

pub mod commands;
pub mod model;
