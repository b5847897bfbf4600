//! Command implementations behind the `matchest` binary. Kept as a library
//! so the acceptance suite can drive the exact same code paths.

pub mod commands;
pub mod overrides;

pub use commands::*;
pub use overrides::ParamOverrides;
