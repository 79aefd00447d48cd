//! Library side of the `chansim` command: sweep configuration, parallel
//! sweeps over the preset channels, CSV/JSON output and gate-cost reports.

pub mod config;
pub mod costs;
pub mod output;
pub mod sweep;
