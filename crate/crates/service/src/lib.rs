//! Live session service. A frontend connects over TCP, speaks the
//! length-prefixed JSON protocol in [`protocol`], and drives the same block
//! runner the simulator uses; the resulting logs are interchangeable with
//! simulated ones. The message schema is documented in `docs/protocol.md`.

pub mod protocol;
pub mod server;
pub mod session;

pub use protocol::{read_frame, write_frame, Body, Envelope, FrameError, PROTOCOL};
pub use server::Server;
pub use session::{handle_connection, LiveSet, Outcome, ServiceConfig, SessionError, SessionSummary};
