//! HTTP service and command line around `tempo-core`.

pub mod api;
pub mod cli;
pub mod error;
pub mod store;

pub use api::{router, ServerConfig};
pub use error::ApiError;
pub use store::SessionStore;
