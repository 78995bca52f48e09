//! Monte Carlo estimation of fermionic partition functions and mean-field
//! energies from Brownian-bridge determinants.

pub mod accumulator;
pub mod determinant;
pub mod error;
pub mod estimators;
pub mod grid;
pub mod linalg;
pub mod oracles;
pub mod paths;
pub mod perm;
pub mod perturbation;
pub mod potentials;
pub mod report;
pub mod rng;
pub mod statistics;
pub mod system;

pub use accumulator::{Moments, PairAccumulator};
pub use determinant::{build_w, sample_pair, spin_split_pair, NuMap, SamplePair, WEvaluation};
pub use error::{Error, Result};
pub use estimators::{convergence_sweep, estimate_both, estimate_meanfield, estimate_partition, Regularization, SweepPoint};
pub use grid::TimeGrid;
pub use linalg::{det_and_adjugate, Mat};
pub use oracles::{cycle_coefficient, exact_ho_meanfield, exact_ho_partition, tensor_estimate};
pub use paths::{bridge_path_point, density_value, sample_bridge, BridgeSample, ImportanceDensity, Point};
pub use perturbation::{perturbed_meanfield, perturbed_w, PerturbationConfig, PerturbationReport, XiSharing};
pub use potentials::{Nucleus, PotentialKind, PotentialSpec};
pub use report::{EstimateReport, Quantity, Statistics};
pub use statistics::{g_epsilon, ratio_with_ci, replica_diagnostics, ReplicaPlan, ReplicaSummary};
pub use system::System;
