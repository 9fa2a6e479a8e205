//! One module per subcommand.

pub mod analyze;
pub mod estimate;
pub mod netsim;
pub mod reproduce;
pub mod simulate;
