//! Constrained design search: maximize the Monte-Carlo expected impact over a
//! finite design grid subject to a budget and a toxicity ceiling.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affect::{Design, Format, Seeding};
use crate::error::{AmaError, Result};
use crate::scenario::Scenario;
use crate::sim::{mean_se, Simulator};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignSpace {
    pub formats: Vec<Format>,
    pub symbol_candidates: Vec<Vec<f64>>,
    pub hook_grid: Vec<f64>,
    pub call_and_response_options: Vec<bool>,
    pub toxicity_grid: Vec<f64>,
    pub seed_fraction_grid: Vec<f64>,
    pub seeding_strategies: Vec<Seeding>,
}

impl Default for DesignSpace {
    fn default() -> Self {
        crate::calibration::design_space()
    }
}

fn ascending_unit(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(AmaError::InvalidConfig(format!("design space: {name} is empty")));
    }
    if grid.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(AmaError::InvalidConfig(format!("design space: {name} leaves [0,1]")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AmaError::InvalidConfig(format!("design space: {name} must be strictly ascending")));
    }
    Ok(())
}

impl DesignSpace {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let empty = |name: &str| Err(AmaError::InvalidConfig(format!("design space: {name} is empty")));
        if self.formats.is_empty() {
            return empty("formats");
        }
        if self.symbol_candidates.is_empty() {
            return empty("symbol_candidates");
        }
        if self.call_and_response_options.is_empty() {
            return empty("call_and_response_options");
        }
        if self.seeding_strategies.is_empty() {
            return empty("seeding_strategies");
        }
        for s in &self.symbol_candidates {
            if s.len() != dim {
                return Err(AmaError::DimensionMismatch { expected: dim, got: s.len() });
            }
            if s.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(AmaError::InvalidConfig("design space: symbols leave [0,1]".into()));
            }
        }
        ascending_unit("hook_grid", &self.hook_grid)?;
        ascending_unit("toxicity_grid", &self.toxicity_grid)?;
        ascending_unit("seed_fraction_grid", &self.seed_fraction_grid)?;
        Ok(())
    }

    /// Cartesian product in (format, symbols, hook, call-and-response,
    /// toxicity, seed fraction, seeding) order.
    pub fn enumerate(&self) -> Vec<Design> {
        let mut out = Vec::new();
        for &format in &self.formats {
            for symbols in &self.symbol_candidates {
                for &hook in &self.hook_grid {
                    for &call_and_response in &self.call_and_response_options {
                        for &toxicity in &self.toxicity_grid {
                            for &seed_fraction in &self.seed_fraction_grid {
                                for &seeding in &self.seeding_strategies {
                                    out.push(Design {
                                        format,
                                        symbols: symbols.clone(),
                                        hook,
                                        call_and_response,
                                        toxicity,
                                        seed_fraction,
                                        seeding,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormatCosts {
    pub meme: f64,
    pub theatre: f64,
    pub song: f64,
    pub mural: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostModel {
    pub format_cost: FormatCosts,
    pub per_seed_cost: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        crate::calibration::cost_model()
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        let f = &self.format_cost;
        if [f.meme, f.theatre, f.song, f.mural, self.per_seed_cost].iter().any(|c| !(*c >= 0.0)) {
            return Err(AmaError::InvalidConfig("cost model: costs must be >= 0".into()));
        }
        Ok(())
    }

    pub fn format_cost(&self, format: Format) -> f64 {
        match format {
            Format::Meme => self.format_cost.meme,
            Format::Theatre => self.format_cost.theatre,
            Format::Song => self.format_cost.song,
            Format::Mural => self.format_cost.mural,
        }
    }

    pub fn zero() -> Self {
        CostModel { format_cost: FormatCosts { meme: 0.0, theatre: 0.0, song: 0.0, mural: 0.0 }, per_seed_cost: 0.0 }
    }
}

/// Production plus seeding cost of a design in a population of `n`.
pub fn cost(cm: &CostModel, design: &Design, n: usize) -> f64 {
    cm.format_cost(design.format) + cm.per_seed_cost * design.seed_count(n) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignEvaluation {
    pub design: Design,
    pub cost: f64,
    pub feasible: bool,
    /// `None` for infeasible designs, which are never simulated.
    pub mean_ip: Option<f64>,
    pub se: Option<f64>,
    pub mean_participation: Option<f64>,
    pub mean_cohesion: Option<f64>,
    pub mean_sway: Option<f64>,
    pub mean_polarization: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub best_design: Design,
    pub best_mean_ip: f64,
    pub best_se: f64,
    pub best_cost: f64,
    pub budget: f64,
    pub toxicity_limit: f64,
    pub budget_slack: f64,
    pub toxicity_slack: f64,
    pub replications_per_design: usize,
    pub master_seed: u64,
    pub evaluated: Vec<DesignEvaluation>,
}

impl OptimizeReport {
    pub fn best(&self) -> &DesignEvaluation {
        self.evaluated
            .iter()
            .find(|e| e.design == self.best_design)
            .expect("best design is part of the evaluation table")
    }
}

/// Per-replication impact summary of a design under common random numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignStats {
    pub mean_ip: f64,
    pub se: f64,
    pub participation: f64,
    pub cohesion: f64,
    pub sway: f64,
    pub polarization: f64,
}

fn stats_on(sim: &Simulator, design: &Design, reps: usize) -> Result<DesignStats> {
    let rows = sim.map_reps(design, reps, |r| {
        [r.impact.i_p, r.impact.participation, r.impact.cohesion, r.impact.sway, r.impact.polarization]
    })?;
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let (mean_ip, se) = mean_se(&col(0));
    Ok(DesignStats {
        mean_ip,
        se,
        participation: mean_se(&col(1)).0,
        cohesion: mean_se(&col(2)).0,
        sway: mean_se(&col(3)).0,
        polarization: mean_se(&col(4)).0,
    })
}

/// Mean and standard error of `i_p` over `reps` common-random-number replications.
pub fn evaluate_design(scenario: &Scenario, design: &Design, reps: usize, master_seed: u64) -> Result<(f64, f64)> {
    if reps < 2 {
        return Err(AmaError::InvalidConfig("evaluate_design needs at least 2 replications".into()));
    }
    design.validate(scenario.graph.dim)?;
    let sim = Simulator::new(scenario, master_seed)?;
    let s = stats_on(&sim, design, reps)?;
    Ok((s.mean_ip, s.se))
}

/// Exhaustive constrained grid search with common random numbers.
///
/// Ties on the mean go to the cheaper design, then to the lexicographically
/// smaller design tuple.
pub fn optimize(
    scenario: &Scenario,
    space: &DesignSpace,
    cm: &CostModel,
    budget: f64,
    toxicity_limit: f64,
    reps: usize,
    master_seed: u64,
) -> Result<OptimizeReport> {
    let sim = Simulator::new(scenario, master_seed)?;
    optimize_with(&sim, scenario.graph.n, space, cm, budget, toxicity_limit, reps)
}

pub fn optimize_with(
    sim: &Simulator,
    n: usize,
    space: &DesignSpace,
    cm: &CostModel,
    budget: f64,
    toxicity_limit: f64,
    reps: usize,
) -> Result<OptimizeReport> {
    if reps < 2 {
        return Err(AmaError::InvalidConfig("optimize needs at least 2 replications".into()));
    }
    let designs = space.enumerate();
    if designs.is_empty() {
        return Err(AmaError::InvalidConfig("design space is empty".into()));
    }
    let costed: Vec<(Design, f64)> = designs
        .into_iter()
        .map(|d| {
            let c = cost(cm, &d, n);
            (d, c)
        })
        .collect();
    let within_budget = |c: f64| c <= budget;
    let within_tox = |d: &Design| d.toxicity <= toxicity_limit;
    if !costed.iter().any(|(d, c)| within_budget(*c) && within_tox(d)) {
        let any_budget = costed.iter().any(|(_, c)| within_budget(*c));
        let any_tox = costed.iter().any(|(d, _)| within_tox(d));
        let binding = match (any_budget, any_tox) {
            (false, false) => "both the budget and the toxicity limit exclude every design",
            (false, true) => "the budget is below the cost of every design",
            (true, false) => "the toxicity limit is below every design's toxicity",
            (true, true) => "no design meets the budget and the toxicity limit jointly",
        };
        return Err(AmaError::Infeasible(format!("{binding} (budget {budget}, toxicity limit {toxicity_limit})")));
    }

    let evaluated: Vec<DesignEvaluation> = costed
        .into_par_iter()
        .map(|(design, c)| {
            let feasible = within_budget(c) && within_tox(&design);
            if !feasible {
                return Ok(DesignEvaluation {
                    design,
                    cost: c,
                    feasible,
                    mean_ip: None,
                    se: None,
                    mean_participation: None,
                    mean_cohesion: None,
                    mean_sway: None,
                    mean_polarization: None,
                });
            }
            let s = stats_on(sim, &design, reps)?;
            Ok(DesignEvaluation {
                design,
                cost: c,
                feasible,
                mean_ip: Some(s.mean_ip),
                se: Some(s.se),
                mean_participation: Some(s.participation),
                mean_cohesion: Some(s.cohesion),
                mean_sway: Some(s.sway),
                mean_polarization: Some(s.polarization),
            })
        })
        .collect::<Result<_>>()?;

    let best = evaluated
        .iter()
        .filter(|e| e.feasible)
        .min_by(|a, b| {
            let (ma, mb) = (a.mean_ip.unwrap(), b.mean_ip.unwrap());
            mb.total_cmp(&ma)
                .then_with(|| a.cost.total_cmp(&b.cost))
                .then_with(|| a.design.lexicographic_cmp(&b.design))
        })
        .expect("at least one feasible design");
    debug_assert!(best.cost <= budget && best.design.toxicity <= toxicity_limit);

    Ok(OptimizeReport {
        best_design: best.design.clone(),
        best_mean_ip: best.mean_ip.unwrap(),
        best_se: best.se.unwrap(),
        best_cost: best.cost,
        budget,
        toxicity_limit,
        budget_slack: budget - best.cost,
        toxicity_slack: toxicity_limit - best.design.toxicity,
        replications_per_design: reps,
        master_seed: sim.master_seed(),
        evaluated,
    })
}

/// Ordering used for ranking evaluations: higher mean first.
pub fn rank_cmp(a: &DesignEvaluation, b: &DesignEvaluation) -> Ordering {
    match (a.mean_ip, b.mean_ip) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}
