//! Persistency of multipartite quantum correlations under particle loss.

pub mod behavior;
pub mod bell;
pub mod entdetect;
pub mod error;
pub mod families;
pub mod lp;
pub mod optim;
pub mod persistency;
pub mod qstate;
pub mod scan;
pub mod statespec;
pub mod steering;
pub mod tangles;

pub use error::{Error, Result};
