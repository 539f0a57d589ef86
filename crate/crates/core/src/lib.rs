//! Cost-sharing mechanisms with predictions for network games.
//!
//! Series-parallel congestion games ([`spg`], [`opt`], [`gwtf`],
//! [`mechanism`], [`equilibria`]) and multicast network formation games
//! ([`multicast`]), all with exact rational arithmetic, plus the instance
//! formats and experiment campaigns in [`harness`].

pub mod costfn;
pub mod eps;
pub mod equilibria;
pub mod gwtf;
pub mod harness;
pub mod mechanism;
pub mod multicast;
pub mod opt;
pub mod rational;
pub mod spg;

pub use costfn::{CostTable, CostValue};
pub use eps::EpsCost;
pub use rational::Rational;
