//! Campaign files, sampling, reports and the command line around `phe_core`.

pub mod campaign;
pub mod config;
pub mod ode;
pub mod parse;
pub mod report;
pub mod sample;

pub use campaign::{run_campaign, RunOptions};
pub use config::{CampaignConfig, Check, ConfigError};
pub use parse::{parse_expr, ParseError};
pub use report::{Status, VerificationReport};
