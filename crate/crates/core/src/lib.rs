//! Quantifiability: checking concurrent histories, and concurrent stack and
//! queue implementations whose consumers never fail.
//!
//! - [`history`]: method calls, histories, recording and the history file format.
//! - [`verifier`]: the linear-time quantifiability check.
//! - [`tensor`]: dense tensor view of a history.
//! - [`oracle`]: brute-force references for testing.
//! - [`qstack`], [`qqueue`]: quantifiable stack and queue returning [`Ticket`]s.
//! - [`baselines`]: Treiber stack and Michael-Scott queue.
//! - [`harness`]: workloads, throughput and inversion entropy.

pub mod baselines;
pub mod cli;
pub mod harness;
pub mod history;
pub mod oracle;
pub mod qqueue;
pub mod qstack;
mod rng;
pub mod tensor;
mod ticket;
pub mod verifier;

pub use rng::seed_current_thread;
pub use ticket::{Ticket, TicketState};
