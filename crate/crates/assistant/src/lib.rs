//! Front end for the vehicle assistant: subcommand wiring and the REST
//! webhook server.

pub mod app;
pub mod server;
