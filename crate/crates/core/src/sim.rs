//! Seeded replication driver shared by simulation, optimization, games and
//! falsification experiments.
//!
//! Replication `r` of a run with master seed `s` draws from the stream
//! `(s, "rep", r)`, so any two designs evaluated under the same seed see
//! common random numbers. Results are gathered in replication order, which
//! makes every aggregate independent of the worker count.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affect::Design;
use crate::diffusion::{run_cascade, CascadeResult};
use crate::error::Result;
use crate::graph::{generate_sbm, GraphConfig, SocialGraph};
use crate::impact::{impact, reach_profile, ImpactReport, ReachProfile};
use crate::labels;
use crate::rng::{derive_stream, SimRng};
use crate::scenario::{GraphPolicy, Model, Scenario};

/// One finished replication.
#[derive(Clone, Debug)]
pub struct Replication {
    pub rep: usize,
    pub graph: Arc<SocialGraph>,
    pub result: CascadeResult,
    pub impact: ImpactReport,
}

impl Replication {
    pub fn reach(&self, band: f64) -> ReachProfile {
        reach_profile(&self.graph, &self.result, band)
    }
}

#[derive(Clone, Debug)]
pub struct Simulator {
    graph_config: GraphConfig,
    model: Model,
    max_rounds: u32,
    master_seed: u64,
    fixed_graph: Option<Arc<SocialGraph>>,
}

pub fn replication_stream(master_seed: u64, rep: usize) -> SimRng {
    derive_stream(master_seed, &labels!["rep", rep])
}

impl Simulator {
    pub fn new(scenario: &Scenario, master_seed: u64) -> Result<Self> {
        Simulator::with_parts(
            scenario.graph.clone(),
            scenario.model(),
            scenario.run.max_rounds,
            scenario.run.graph_policy,
            master_seed,
        )
    }

    pub fn with_parts(
        graph_config: GraphConfig,
        model: Model,
        max_rounds: u32,
        policy: GraphPolicy,
        master_seed: u64,
    ) -> Result<Self> {
        graph_config.validate()?;
        let fixed_graph = match policy {
            GraphPolicy::Fixed => {
                Some(Arc::new(generate_sbm(&graph_config, &mut derive_stream(master_seed, &labels!["graph"]))?))
            }
            GraphPolicy::PerRep => None,
        };
        Ok(Simulator { graph_config, model, max_rounds, master_seed, fixed_graph })
    }

    /// Use an explicit graph for every replication.
    pub fn on_graph(graph: SocialGraph, model: Model, max_rounds: u32, master_seed: u64) -> Self {
        let graph_config = GraphConfig {
            n: graph.n(),
            blocks: graph.blocks(),
            p_in: 0.0,
            p_out: 0.0,
            dim: graph.dim(),
            identity_spread: 0.0,
            context: crate::graph::ContextPreset::Community,
        };
        Simulator { graph_config, model, max_rounds, master_seed, fixed_graph: Some(Arc::new(graph)) }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn max_rounds(&self) -> u32 {
        self.max_rounds
    }

    pub fn fixed_graph(&self) -> Option<&Arc<SocialGraph>> {
        self.fixed_graph.as_ref()
    }

    pub fn graph_for(&self, rep: usize) -> Result<Arc<SocialGraph>> {
        match &self.fixed_graph {
            Some(g) => Ok(Arc::clone(g)),
            None => Ok(Arc::new(generate_sbm(
                &self.graph_config,
                &mut derive_stream(self.master_seed, &labels!["rep", rep, "graph"]),
            )?)),
        }
    }

    pub fn replicate(&self, design: &Design, rep: usize) -> Result<Replication> {
        let graph = self.graph_for(rep)?;
        let mut rng = replication_stream(self.master_seed, rep);
        let m = &self.model;
        let result = run_cascade(&graph, &m.decision, &m.transmission, design, &m.affect, &mut rng, self.max_rounds)?;
        let impact = impact(&m.impact, &graph, &result, &result.matching);
        Ok(Replication { rep, graph, result, impact })
    }

    /// Run replications `0..reps` in parallel and return them in order.
    pub fn run(&self, design: &Design, reps: usize) -> Result<Vec<Replication>> {
        (0..reps).into_par_iter().map(|r| self.replicate(design, r)).collect()
    }

    /// Per-replication mapped summaries, in replication order.
    pub fn map_reps<T, F>(&self, design: &Design, reps: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&Replication) -> T + Sync + Send,
    {
        (0..reps).into_par_iter().map(|r| self.replicate(design, r).map(|rep| f(&rep))).collect()
    }
}

/// Sample mean and standard error (0 for fewer than two values).
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Mean of each impact component over a set of replications.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpactSummary {
    pub reps: usize,
    pub participation: f64,
    pub cohesion: f64,
    pub sway: f64,
    pub polarization: f64,
    pub mean_ip: f64,
    pub se_ip: f64,
}

impl ImpactSummary {
    pub fn from_reports(reports: &[ImpactReport]) -> Self {
        let avg = |f: fn(&ImpactReport) -> f64| mean_se(&reports.iter().map(f).collect::<Vec<_>>()).0;
        let (mean_ip, se_ip) = mean_se(&reports.iter().map(|r| r.i_p).collect::<Vec<_>>());
        ImpactSummary {
            reps: reports.len(),
            participation: avg(|r| r.participation),
            cohesion: avg(|r| r.cohesion),
            sway: avg(|r| r.sway),
            polarization: avg(|r| r.polarization),
            mean_ip,
            se_ip,
        }
    }
}
