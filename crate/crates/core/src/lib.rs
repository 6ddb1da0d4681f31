//! Two-stage client selection for federated learning services.
//!
//! Stage one scores candidate clients on resource, data and reputation
//! criteria and packs a pool into a cost budget ([`pool_select`]). Stage two
//! splits the pool into per-round subsets whose combined label histograms
//! are close to uniform while every client takes part at least once and at
//! most `x*` times per scheduling period ([`subset_gen`], backed by the
//! multidimensional knapsack solver in [`mkp`]). [`scheduler`] runs
//! scheduling periods against a round executor and maintains reputations;
//! [`fl_sim`] provides a small FedAvg trainer on synthetic non-iid data.

pub mod error;
pub mod fl_sim;
pub mod mkp;
pub mod pool_select;
pub mod rng;
pub mod scheduler;
pub mod schema;
pub mod scoring;
pub mod subset_gen;
pub mod types;

pub use error::{Error, Result};
pub use types::{ClientId, Histogram};
