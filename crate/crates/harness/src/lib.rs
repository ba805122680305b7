//! Command-line drivers and the WebSocket frame-stream service around
//! `tapemouse-core`.

pub mod config;
pub mod error;
pub mod eventlog;
pub mod frames;
pub mod pipeline;
pub mod protocol;
pub mod server;
pub mod session;

pub use error::{HarnessError, Result};
pub use eventlog::EventLog;
pub use pipeline::{bench, run_calibration, run_pipeline, BenchReport, Stream};
pub use server::Server;
pub use session::{Outcome, Session};
