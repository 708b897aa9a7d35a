//! Sticky Dirichlet-process mixture for panels of units observed over time.
//!
//! Units belong to latent clusters each period. Between periods a unit either
//! keeps its cluster (with probability `p`) or is reseated by an
//! intergenerational Chinese restaurant process. Clusters emit binary and
//! count channels with conjugate priors.

pub mod analysis;
pub mod commands;
pub mod dataset;
pub mod diagnostics;
pub mod emissions;
pub mod error;
pub mod geweke;
pub mod io;
pub mod prior;
pub mod sampler;
pub mod simulation;
mod util;

pub use dataset::{ChannelDecl, PanelDataset, Unit};
pub use emissions::{CellObservations, ChannelKind, ChannelObs, ChannelPrior, ChannelSpec, ClusterParams, EmissionModel};
pub use error::{Error, Result};
pub use prior::{AssignmentState, Concentration, StickWeights, Stickiness};
pub use sampler::{run_chain, run_chains, ChainOutput, Draw, GibbsSampler, PosteriorDraws, SamplerConfig, SamplerState};
