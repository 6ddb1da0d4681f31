//! Desk-scale federated training on synthetic non-iid data.
//!
//! [`make_noniid_pool`] builds label-skewed client pools over Gaussian
//! class blobs; [`FedAvgTrainer`] runs FedAvg rounds over them and plugs
//! into the scheduler as a [`RoundExecutor`](crate::scheduler::RoundExecutor).

mod data;
mod model;
mod trainer;

pub use data::{
    class_means, largest_remainder, make_noniid_pool, noniid_histograms, ClientData, NonIidSpec, NonIidType, Samples,
    SyntheticDataset,
};
pub use model::{Classifier, ModelKind};
pub use trainer::{
    aggregate, aggregation_weights, evaluate, local_train, weighted_delta, FedAvgTrainer, LocalUpdate, TrainerConfig,
};
