//! The `ama-default` calibration.
//!
//! All generator values used by the shipped scenarios, the design-space
//! defaults and the falsification experiments live here. Power and
//! equilibrium claims made by the test suites are relative to these numbers.
//!
//! Two contexts share every behavioral coefficient and differ only in the
//! social graph:
//!
//! * community: denser, better bridged blocks and high organizational
//!   density (`c_i ~ U[0.7, 1]`);
//! * fragmented: sparse, nearly isolated blocks and low organizational
//!   density (`c_i ~ U[0, 0.3]`).

use crate::affect::{AffectParams, Design, Format, MeasurementParams, Seeding};
use crate::design::{CostModel, DesignSpace, FormatCosts};
use crate::diffusion::{DecisionParams, TransmissionParams};
use crate::game::{PayoffWeights, PlayerConfig, Side};
use crate::graph::{ContextPreset, GraphConfig};
use crate::impact::ImpactWeights;
use crate::scenario::{GameConfig, GraphPolicy, RunConfig, Scenario};

pub const NAME: &str = "ama-default";

/// Symbol vector centered on block 0 of the default four-block layout.
pub const LEFT_SYMBOLS: f64 = 0.125;
/// Symbol vector centered on block 3.
pub const RIGHT_SYMBOLS: f64 = 0.875;

pub fn community_graph() -> GraphConfig {
    GraphConfig {
        n: 300,
        blocks: 4,
        p_in: 0.046,
        p_out: 0.022,
        dim: 1,
        identity_spread: 0.1,
        context: ContextPreset::Community,
    }
}

pub fn fragmented_graph() -> GraphConfig {
    GraphConfig {
        n: 300,
        blocks: 4,
        p_in: 0.020,
        p_out: 0.005,
        dim: 1,
        identity_spread: 0.1,
        context: ContextPreset::Fragmented,
    }
}

pub fn graph_for(context: ContextPreset) -> GraphConfig {
    match context {
        ContextPreset::Fragmented => fragmented_graph(),
        ContextPreset::Community => community_graph(),
        custom @ ContextPreset::Custom { .. } => GraphConfig { context: custom, ..community_graph() },
    }
}

pub fn affect() -> AffectParams {
    AffectParams { a0: 0.0, a1: 2.128, a2: 2.233, a3: 1.349, a4: 0.5, a5: 0.5, sigma_u: 0.3 }
}

pub fn measurement() -> MeasurementParams {
    MeasurementParams {
        loadings: vec![1.0, 0.8, 1.2, 0.9, 1.1],
        intercepts: vec![0.0, 0.2, -0.1, 0.3, 0.1],
        sigma_eps: 0.5,
    }
}

pub fn decision() -> DecisionParams {
    DecisionParams { b0: -4.813, b1: 1.0, b2: 0.721, sigma_noise: 0.3, tau_lo: 0.0, tau_hi: 1.0, cnr_boost: 1.801 }
}

pub fn transmission() -> TransmissionParams {
    TransmissionParams { l0: -2.726, l1: 0.196, l2: 1.825, l3: 0.733, l4_tox: 1.0 }
}

pub fn weights() -> ImpactWeights {
    ImpactWeights { w1: 1.0, w2: 1.0, w3: 1.0, kappa: 0.218, undecided_band: 0.15 }
}

/// Impact weights per context. Fragmented campaigns are scored mostly on
/// raw participation.
pub fn weights_for(context: ContextPreset) -> ImpactWeights {
    match context {
        ContextPreset::Fragmented => ImpactWeights { w2: 0.1, w3: 0.5, ..weights() },
        _ => weights(),
    }
}

pub fn design() -> Design {
    Design {
        format: Format::Theatre,
        symbols: vec![0.5],
        hook: 0.5,
        call_and_response: true,
        toxicity: 0.0,
        seed_fraction: 0.05,
        seeding: Seeding::Random,
    }
}

pub fn design_space() -> DesignSpace {
    DesignSpace {
        formats: vec![Format::Meme, Format::Theatre, Format::Song],
        symbol_candidates: vec![vec![0.5], vec![LEFT_SYMBOLS]],
        hook_grid: vec![0.5],
        call_and_response_options: vec![false, true],
        toxicity_grid: vec![0.0, 0.5, 1.0],
        seed_fraction_grid: vec![0.02, 0.05, 0.08],
        seeding_strategies: vec![Seeding::Random, Seeding::TopDegree, Seeding::TopMatching],
    }
}

pub fn cost_model() -> CostModel {
    CostModel { format_cost: FormatCosts { meme: 1.0, theatre: 7.771, song: 7.771, mural: 8.0 }, per_seed_cost: 0.41 }
}

pub fn budget() -> f64 {
    17.056
}

pub fn toxicity_limit() -> f64 {
    0.2
}

fn strategies(symbols: f64) -> Vec<Design> {
    vec![
        Design {
            format: Format::Meme,
            symbols: vec![symbols],
            hook: 0.5,
            call_and_response: false,
            toxicity: 0.0,
            seed_fraction: 0.08,
            seeding: Seeding::Random,
        },
        Design {
            format: Format::Theatre,
            symbols: vec![symbols],
            hook: 0.5,
            call_and_response: true,
            toxicity: 0.0,
            seed_fraction: 0.05,
            seeding: Seeding::Random,
        },
    ]
}

/// Cohesion-weighted payoffs for community settings, participation-weighted
/// payoffs for fragmented ones.
pub fn payoff_weights(context: ContextPreset) -> PayoffWeights {
    match context {
        ContextPreset::Fragmented => PayoffWeights { cohesion: 0.5, participation: 2.0, sway: 0.5 },
        _ => PayoffWeights { cohesion: 2.0, participation: 0.5, sway: 0.5 },
    }
}

pub fn game_for(context: ContextPreset) -> GameConfig {
    let w = payoff_weights(context);
    GameConfig {
        left: PlayerConfig {
            side: Side::L,
            weights: w.clone(),
            strategy_set: strategies(LEFT_SYMBOLS),
            base_blocks: vec![0, 1],
        },
        right: PlayerConfig {
            side: Side::R,
            weights: w,
            strategy_set: strategies(RIGHT_SYMBOLS),
            base_blocks: vec![2, 3],
        },
    }
}

/// Arms of the reach comparison: a meme and a call-and-response theatre
/// piece aimed at block 0, seeded on the best-matching agents.
pub fn reach_arms() -> [Design; 2] {
    let base = Design {
        format: Format::Meme,
        symbols: vec![LEFT_SYMBOLS],
        hook: 0.5,
        call_and_response: false,
        toxicity: 0.0,
        seed_fraction: 0.079,
        seeding: Seeding::TopMatching,
    };
    [base.clone(), Design { format: Format::Theatre, call_and_response: true, ..base }]
}

pub fn game() -> GameConfig {
    game_for(ContextPreset::Community)
}

/// The full `ama-default` scenario for a context.
pub fn scenario(context: ContextPreset, master_seed: u64) -> Scenario {
    let tag = match context {
        ContextPreset::Community => "community",
        ContextPreset::Fragmented => "fragmented",
        ContextPreset::Custom { .. } => "custom",
    };
    Scenario {
        name: format!("{NAME}/{tag}"),
        run: RunConfig { master_seed, reps: 100, max_rounds: 1000, graph_policy: GraphPolicy::Fixed },
        graph: graph_for(context),
        affect: affect(),
        measurement: measurement(),
        decision: decision(),
        transmission: transmission(),
        impact: weights_for(context),
        design: design(),
        space: design_space(),
        cost: cost_model(),
        budget: budget(),
        toxicity_limit: toxicity_limit(),
        game: game_for(context),
    }
}
