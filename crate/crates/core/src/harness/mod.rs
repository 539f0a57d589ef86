//! Instance files, generators, experiment campaigns and the Braess test.

mod braess;
mod campaign;
mod generate;
mod instance;

pub use braess::{braess_negative_test, BraessReport, BRAESS_PATHS};
pub use campaign::{
    multicast_rows, run_multicast_campaign, run_spg_campaign, spg_rows, worker_pool, write_csv, ExperimentRow,
    MulticastCampaign, SpgCampaign,
};
pub use generate::{generate_multicast, generate_spg, MulticastGenConfig, SpgGenConfig};
pub use instance::{EdgeSpec, InstanceError, InstanceFile, MulticastSpec, SpgSpec};
