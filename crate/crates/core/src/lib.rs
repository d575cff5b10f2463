//! Affect-driven mobilization on homophilous social networks.
//!
//! The crate simulates how an aesthetic act (a meme, a play, a song, a mural)
//! seeded into a block-structured social graph forms latent affect, spreads
//! along edges and triggers threshold activations; scores the aggregate
//! political impact of the resulting cascade; searches for the best design
//! under budget and toxicity limits; solves two-actor design games; recovers
//! the generating coefficients from simulated panels; and runs seeded
//! falsification experiments.

pub mod affect;
pub mod calibration;
pub mod design;
pub mod diffusion;
pub mod error;
pub mod estimate;
pub mod export;
pub mod falsify;
pub mod game;
pub mod graph;
pub mod impact;
pub mod rng;
pub mod scenario;
pub mod sim;
pub mod stats;

pub use affect::{AffectParams, Design, Format, MeasurementParams, Seeding};
pub use design::{CostModel, DesignSpace, OptimizeReport};
pub use diffusion::{CascadeResult, DecisionParams, TransmissionParams};
pub use error::{AmaError, Result};
pub use game::{EquilibriumReport, PlayerConfig, Side};
pub use graph::{ContextPreset, GraphConfig, SocialGraph};
pub use impact::{ImpactReport, ImpactWeights};
pub use rng::{derive_seed, derive_stream, Label, SimRng};
pub use scenario::{Model, Scenario};
pub use sim::Simulator;
