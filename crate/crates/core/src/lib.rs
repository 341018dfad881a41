//! Co-simulator for disaster-resilient, HAPS-assisted cellular networks.
//!
//! Two experiments share this crate:
//!
//! * a Monte Carlo coverage run ([`coverage`]) that drops users over the
//!   affected region and reports the CDF of the best HAPS received power, and
//! * a discrete-time disaster timeline ([`disaster`]) in which ground sites
//!   with renewables, batteries and generators follow the pre-disaster or
//!   in-disaster management rules ([`policy`]).

// Range checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod band;
pub mod channel;
pub mod config;
pub mod coverage;
pub mod disaster;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod link_budget;
pub mod output;
pub mod policy;
pub mod rng;

pub use band::Band;
pub use error::{Error, Result};
