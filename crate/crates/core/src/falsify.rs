//! Seeded Monte-Carlo versions of the five null hypotheses, each with an
//! explicit test statistic, plus a calibration mode that estimates the
//! type-I error of a test under its null generator.
//!
//! Every arm runs on its own stream `(master, id, "arm", a)` and, except for
//! the ethics test, regenerates the graph per replication so that
//! replications are independent draws from the arm's scenario.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affect::{Design, Format};
use crate::design::optimize_with;
use crate::error::{AmaError, Result};
use crate::estimate::fit_logistic;
use crate::graph::GraphConfig;
use crate::labels;
use crate::rng::derive_seed;
use crate::scenario::{GraphPolicy, Model, Scenario};
use crate::sim::{Replication, Simulator};
use crate::stats::{holm, slope_test, welch_t, wilson_interval, Alternative, ArmSummary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HypothesisId {
    #[serde(rename = "h0_context")]
    Context,
    #[serde(rename = "h0_affect")]
    Affect,
    #[serde(rename = "h0_format")]
    Format,
    #[serde(rename = "h0_network")]
    Network,
    #[serde(rename = "h0_ethics")]
    Ethics,
}

impl HypothesisId {
    pub const ALL: [HypothesisId; 5] = [
        HypothesisId::Context,
        HypothesisId::Affect,
        HypothesisId::Format,
        HypothesisId::Network,
        HypothesisId::Ethics,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HypothesisId::Context => "h0_context",
            HypothesisId::Affect => "h0_affect",
            HypothesisId::Format => "h0_format",
            HypothesisId::Network => "h0_network",
            HypothesisId::Ethics => "h0_ethics",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        HypothesisId::ALL
            .into_iter()
            .find(|h| h.name() == s || h.name().trim_start_matches("h0_") == s)
            .ok_or_else(|| AmaError::InvalidConfig(format!("unknown hypothesis {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisSpec {
    pub id: HypothesisId,
    /// Primary scenario; its design, weights and space are used by every arm.
    pub scenario: Scenario,
    /// Second scenario of the context test.
    pub contrast: Option<Scenario>,
    /// Generate data under the null (effect coefficients zeroed).
    pub null: bool,
    pub reps: usize,
    pub alpha: f64,
    pub master_seed: u64,
    /// Expected same-block edge shares of the network test grid.
    pub homophily_grid: Vec<f64>,
    /// Replications per arm pooled into the edge- and agent-level fits.
    pub panel_reps: usize,
    /// Toxicity ceiling of the constrained arm of the ethics test.
    pub toxicity_limit: f64,
}

impl HypothesisSpec {
    pub fn new(id: HypothesisId, scenario: Scenario, master_seed: u64) -> Self {
        HypothesisSpec {
            id,
            contrast: None,
            null: false,
            reps: scenario.run.reps,
            alpha: 0.05,
            master_seed,
            homophily_grid: vec![0.3, 0.45, 0.6, 0.75, 0.9],
            panel_reps: 20,
            toxicity_limit: scenario.toxicity_limit,
            scenario,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < 30 {
            return Err(AmaError::InvalidConfig("hypothesis tests need reps >= 30".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(AmaError::InvalidConfig("alpha must lie in (0,1)".into()));
        }
        if self.panel_reps == 0 {
            return Err(AmaError::InvalidConfig("panel_reps must be >= 1".into()));
        }
        self.scenario.validate()?;
        if self.id == HypothesisId::Context && !self.null {
            match &self.contrast {
                Some(c) => c.validate()?,
                None => return Err(AmaError::InvalidConfig("context test needs a contrast scenario".into())),
            }
        }
        Ok(())
    }
}

/// One statistic entering the decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    pub statistic: f64,
    pub p_value: f64,
    /// Holm-adjusted across the components of the test.
    pub adjusted_p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmReport {
    pub name: String,
    pub seed: u64,
    pub metrics: Vec<(String, ArmSummary)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub id: HypothesisId,
    pub null: bool,
    /// Statistic of the component with the smallest adjusted p-value.
    pub statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
    pub components: Vec<Component>,
    pub arms: Vec<ArmReport>,
    /// Ethics test: whether the constrained and unconstrained optima differ.
    pub designs_differ: Option<bool>,
    /// Ethics test: unconstrained minus constrained polarization of the optima
    /// on the shared selection streams.
    pub polarization_difference: Option<f64>,
    pub reps: usize,
    pub master_seed: u64,
}

/// Scenario with the effect coefficients of `id` zeroed.
pub fn null_scenario(id: HypothesisId, s: &Scenario) -> Scenario {
    let mut s = s.clone();
    match id {
        HypothesisId::Context => {}
        HypothesisId::Affect => {
            // keep the round-0 activation rate near its affect-driven level
            let (lo, hi) = s.graph.context.bounds();
            let v_ref = s.affect.systematic(true, 0.5, 0.5 * (lo + hi), s.design.hook);
            s.affect = informational(&s);
            s.decision.b0 += s.decision.b1 * v_ref;
            s.decision.b1 = 0.0;
        }
        HypothesisId::Format => {
            s.transmission.l3 = 0.0;
            s.decision.cnr_boost = 1.0;
        }
        HypothesisId::Network => {
            s.transmission.l2 = 0.0;
            s.transmission.l4_tox = 0.0;
            s.affect.a2 = 0.0;
            s.affect.a4 = 0.0;
        }
        HypothesisId::Ethics => {
            s.transmission.l4_tox = 0.0;
        }
    }
    s
}

fn informational(s: &Scenario) -> crate::affect::AffectParams {
    crate::affect::AffectParams { a1: 0.0, a4: 0.0, a5: 0.0, ..s.affect.clone() }
}

fn arm_seed(spec: &HypothesisSpec, arm: usize) -> u64 {
    derive_seed(spec.master_seed, &labels![spec.id.name(), "arm", arm as u64])
}

fn per_rep_sim(graph: GraphConfig, model: Model, s: &Scenario, seed: u64) -> Result<Simulator> {
    Simulator::with_parts(graph, model, s.run.max_rounds, GraphPolicy::PerRep, seed)
}

fn column(reps: &[Replication], f: impl Fn(&Replication) -> f64) -> Vec<f64> {
    reps.iter().map(f).collect()
}

fn finish(spec: &HypothesisSpec, raw: Vec<(String, f64, f64)>, arms: Vec<ArmReport>) -> TestReport {
    let adjusted = holm(&raw.iter().map(|c| c.2).collect::<Vec<_>>());
    let components: Vec<Component> = raw
        .into_iter()
        .zip(adjusted)
        .map(|((name, statistic, p_value), adjusted_p)| Component { name, statistic, p_value, adjusted_p })
        .collect();
    let lead =
        components.iter().min_by(|a, b| a.adjusted_p.total_cmp(&b.adjusted_p)).expect("every test has a component");
    TestReport {
        id: spec.id,
        null: spec.null,
        statistic: lead.statistic,
        p_value: lead.adjusted_p,
        alpha: spec.alpha,
        reject: lead.adjusted_p < spec.alpha,
        components: components.clone(),
        arms,
        designs_differ: None,
        polarization_difference: None,
        reps: spec.reps,
        master_seed: spec.master_seed,
    }
}

fn welch_component(name: &str, a: &[f64], b: &[f64]) -> Result<(String, f64, f64)> {
    let w = welch_t(a, b, Alternative::TwoSided)?;
    Ok((name.to_string(), w.t, w.p_value))
}

/// Wald component from a logistic fit; a fit without information (one outcome
/// class or separation) contributes p = 1.
fn wald_component(name: &str, x: &[Vec<f64>], y: &[bool], names: &[&str], coef: &str) -> Result<(String, f64, f64)> {
    match fit_logistic(x, y, names) {
        Ok(fit) => {
            let j = fit.index(coef).expect("coefficient is part of the design");
            Ok((name.to_string(), fit.z(j), fit.wald_p(j)))
        }
        Err(AmaError::DegenerateData(_) | AmaError::Separation { .. } | AmaError::Collinear { .. }) => {
            Ok((name.to_string(), 0.0, 1.0))
        }
        Err(e) => Err(e),
    }
}

fn summaries(reps: &[Replication], metrics: &[&str]) -> Vec<(String, ArmSummary)> {
    metrics
        .iter()
        .map(|&m| {
            let v = column(reps, |r| match m {
                "i_p" => r.impact.i_p,
                "participation" => r.impact.participation,
                "cohesion" => r.impact.cohesion,
                "sway" => r.impact.sway,
                "polarization" => r.impact.polarization,
                _ => unreachable!("unknown metric {m}"),
            });
            (m.to_string(), ArmSummary::of(&v))
        })
        .collect()
}

pub fn test_h0_context(spec: &HypothesisSpec) -> Result<TestReport> {
    spec.validate()?;
    let a = &spec.scenario;
    let b = if spec.null { a } else { spec.contrast.as_ref().expect("validated") };
    // both arms are scored with the primary scenario's weights
    let mut model_b = b.model();
    model_b.impact = a.impact.clone();
    let (sa, sb) = (arm_seed(spec, 0), arm_seed(spec, 1));
    let ra = per_rep_sim(a.graph.clone(), a.model(), a, sa)?.run(&a.design, spec.reps)?;
    let rb = per_rep_sim(b.graph.clone(), model_b, b, sb)?.run(&a.design, spec.reps)?;
    let metrics = ["i_p", "participation", "cohesion", "sway", "polarization"];
    let raw = vec![welch_component("i_p", &column(&ra, |r| r.impact.i_p), &column(&rb, |r| r.impact.i_p))?];
    let arms = vec![
        ArmReport { name: a.name.clone(), seed: sa, metrics: summaries(&ra, &metrics) },
        ArmReport { name: b.name.clone(), seed: sb, metrics: summaries(&rb, &metrics) },
    ];
    Ok(finish(spec, raw, arms))
}

pub fn test_h0_affect(spec: &HypothesisSpec) -> Result<TestReport> {
    spec.validate()?;
    let rich = if spec.null { null_scenario(HypothesisId::Affect, &spec.scenario) } else { spec.scenario.clone() };
    let mut info = rich.clone();
    info.affect = informational(&rich);
    let (sa, sb) = (arm_seed(spec, 0), arm_seed(spec, 1));
    let ra = per_rep_sim(rich.graph.clone(), rich.model(), &rich, sa)?.run(&rich.design, spec.reps)?;
    let rb = per_rep_sim(info.graph.clone(), info.model(), &info, sb)?.run(&info.design, spec.reps)?;

    let (mut x, mut y) = (Vec::new(), Vec::new());
    for r in ra.iter().take(spec.panel_reps) {
        for i in 0..r.graph.n() {
            if r.result.exposure[i] {
                x.push(vec![1.0, r.result.affect[i]]);
                y.push(r.result.activation_round[i] == Some(0));
            }
        }
    }
    let raw = vec![
        welch_component("i_p", &column(&ra, |r| r.impact.i_p), &column(&rb, |r| r.impact.i_p))?,
        wald_component("b1_wald", &x, &y, &["b0", "b1"], "b1")?,
    ];
    let metrics = ["i_p", "participation", "cohesion", "sway", "polarization"];
    let arms = vec![
        ArmReport { name: "affect_rich".into(), seed: sa, metrics: summaries(&ra, &metrics) },
        ArmReport { name: "informational".into(), seed: sb, metrics: summaries(&rb, &metrics) },
    ];
    Ok(finish(spec, raw, arms))
}

fn with_format(d: &Design, format: Format) -> Design {
    Design { format, call_and_response: format.is_participatory(), ..d.clone() }
}

pub fn test_h0_format(spec: &HypothesisSpec) -> Result<TestReport> {
    spec.validate()?;
    let s = if spec.null { null_scenario(HypothesisId::Format, &spec.scenario) } else { spec.scenario.clone() };
    let meme = with_format(&s.design, Format::Meme);
    let theatre = with_format(&s.design, Format::Theatre);
    let (sa, sb) = (arm_seed(spec, 0), arm_seed(spec, 1));
    let ra = per_rep_sim(s.graph.clone(), s.model(), &s, sa)?.run(&meme, spec.reps)?;
    let rb = per_rep_sim(s.graph.clone(), s.model(), &s, sb)?.run(&theatre, spec.reps)?;

    let with_tox = s.design.toxicity != 0.0;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (reps, is_meme, tox) in [(&ra, 1.0, meme.toxicity), (&rb, 0.0, theatre.toxicity)] {
        for r in reps.iter().take(spec.panel_reps) {
            for a in &r.result.attempts {
                let mut row = vec![1.0, r.result.affect[a.sender], r.graph.similarity(a.sender, a.receiver), is_meme];
                if with_tox {
                    let same = r.graph.block(a.sender) == r.graph.block(a.receiver);
                    row.push(if same { tox } else { 0.0 });
                }
                x.push(row);
                y.push(a.success);
            }
        }
    }
    let names: &[&str] = if with_tox { &["l0", "l1", "l2", "l3", "l4_tox"] } else { &["l0", "l1", "l2", "l3"] };
    let raw = vec![
        welch_component(
            "participation",
            &column(&ra, |r| r.impact.participation),
            &column(&rb, |r| r.impact.participation),
        )?,
        welch_component("cohesion", &column(&ra, |r| r.impact.cohesion), &column(&rb, |r| r.impact.cohesion))?,
        welch_component(
            "polarization",
            &column(&ra, |r| r.impact.polarization),
            &column(&rb, |r| r.impact.polarization),
        )?,
        wald_component("l3_wald", &x, &y, names, "l3")?,
    ];
    let band = s.impact.undecided_band;
    let mut arms = Vec::new();
    for (name, seed, reps) in [("meme", sa, &ra), ("theatre", sb, &rb)] {
        let mut metrics = summaries(reps, &["i_p", "participation", "cohesion", "sway", "polarization"]);
        let within = column(reps, |r| r.reach(band).within_block_reach);
        let sway = column(reps, |r| r.reach(band).cross_block_sway);
        metrics.push(("within_block_reach".into(), ArmSummary::of(&within)));
        metrics.push(("cross_block_sway".into(), ArmSummary::of(&sway)));
        arms.push(ArmReport { name: name.into(), seed, metrics });
    }
    Ok(finish(spec, raw, arms))
}

/// Block edge probabilities with expected same-block edge share `h` and the
/// expected mean degree of `base`.
pub fn graph_at_homophily(base: &GraphConfig, h: f64) -> Result<GraphConfig> {
    let n = base.n as f64;
    let s = n / base.blocks as f64;
    if base.blocks < 2 || s < 2.0 {
        return Err(AmaError::DegenerateGrid("homophily grid needs at least two blocks of two agents".into()));
    }
    let degree = base.p_in * (s - 1.0) + base.p_out * (n - s);
    let p_in = h * degree / (s - 1.0);
    let p_out = (1.0 - h) * degree / (n - s);
    let cfg = GraphConfig { p_in, p_out, ..base.clone() };
    cfg.validate()
        .map_err(|_| AmaError::DegenerateGrid(format!("homophily {h} is not reachable at mean degree {degree:.3}")))?;
    Ok(cfg)
}

pub fn test_h0_network(spec: &HypothesisSpec) -> Result<TestReport> {
    spec.validate()?;
    let grid = &spec.homophily_grid;
    if grid.len() < 2 || grid.windows(2).any(|w| w[0] == w[1]) {
        return Err(AmaError::DegenerateGrid("network test needs at least two distinct grid points".into()));
    }
    let s = if spec.null { null_scenario(HypothesisId::Network, &spec.scenario) } else { spec.scenario.clone() };
    let band = s.impact.undecided_band;
    let mut h = Vec::new();
    let mut reach = Vec::new();
    let mut sway = Vec::new();
    let mut cross = Vec::new();
    let mut arms = Vec::new();
    for (g, &target) in grid.iter().enumerate() {
        let cfg = graph_at_homophily(&s.graph, target)?;
        let seed = arm_seed(spec, g);
        let reps = per_rep_sim(cfg, s.model(), &s, seed)?.run(&s.design, spec.reps)?;
        let rows: Vec<(f64, f64, f64, f64)> = reps
            .iter()
            .map(|r| {
                let hit = crate::impact::reached(&r.result);
                let share = hit.iter().filter(|&&x| x).count() as f64 / hit.len() as f64;
                (r.graph.homophily_index(), share, r.impact.sway, r.reach(band).cross_block_reach)
            })
            .collect();
        let col = |k: usize| -> Vec<f64> { rows.iter().map(|r| [r.0, r.1, r.2, r.3][k]).collect() };
        arms.push(ArmReport {
            name: format!("homophily_{target}"),
            seed,
            metrics: vec![
                ("homophily_index".into(), ArmSummary::of(&col(0))),
                ("reach".into(), ArmSummary::of(&col(1))),
                ("sway".into(), ArmSummary::of(&col(2))),
                ("cross_block_reach".into(), ArmSummary::of(&col(3))),
            ],
        });
        h.extend(col(0));
        reach.extend(col(1));
        sway.extend(col(2));
        cross.extend(col(3));
    }
    let reach_fit = slope_test(&h, &reach)?;
    let sway_fit = slope_test(&h, &sway)?;
    let raw = vec![
        ("reach_slope".to_string(), reach_fit.t, reach_fit.p_value),
        ("sway_slope".to_string(), sway_fit.t, sway_fit.p_value),
    ];
    let mut report = finish(spec, raw, arms);
    // descriptive only: cross-block reach falls with homophily by construction
    if let Ok(c) = slope_test(&h, &cross) {
        report.arms.push(ArmReport {
            name: "cross_block_reach_slope".into(),
            seed: spec.master_seed,
            metrics: vec![("slope".into(), ArmSummary { n: h.len(), mean: c.slope, sd: c.se })],
        });
    }
    Ok(report)
}

/// Optimize with and without the toxicity ceiling on shared streams, then
/// compare the polarization of the two optima on fresh holdout streams.
pub fn test_h0_ethics(spec: &HypothesisSpec) -> Result<TestReport> {
    spec.validate()?;
    let s = if spec.null { null_scenario(HypothesisId::Ethics, &spec.scenario) } else { spec.scenario.clone() };
    let select_seed = derive_seed(spec.master_seed, &labels![spec.id.name(), "select"]);
    let sim = Simulator::with_parts(s.graph.clone(), s.model(), s.run.max_rounds, GraphPolicy::Fixed, select_seed)?;
    let n = s.graph.n;
    let free = optimize_with(&sim, n, &s.space, &s.cost, s.budget, 1.0, spec.reps)?;
    let capped = optimize_with(&sim, n, &s.space, &s.cost, s.budget, spec.toxicity_limit, spec.reps)?;
    let graph = sim.fixed_graph().expect("fixed policy").as_ref().clone();
    let (sa, sb) = (arm_seed(spec, 0), arm_seed(spec, 1));
    let holdout = |design: &Design, seed: u64| {
        Simulator::on_graph(graph.clone(), s.model(), s.run.max_rounds, seed).run(design, spec.reps)
    };
    let ra = holdout(&free.best_design, sa)?;
    let rb = holdout(&capped.best_design, sb)?;
    let raw = vec![welch_component(
        "polarization",
        &column(&ra, |r| r.impact.polarization),
        &column(&rb, |r| r.impact.polarization),
    )?];
    let metrics = ["i_p", "participation", "cohesion", "sway", "polarization"];
    let arms = vec![
        ArmReport {
            name: format!("unconstrained:{}", free.best_design.label()),
            seed: sa,
            metrics: summaries(&ra, &metrics),
        },
        ArmReport {
            name: format!("constrained:{}", capped.best_design.label()),
            seed: sb,
            metrics: summaries(&rb, &metrics),
        },
    ];
    let mut report = finish(spec, raw, arms);
    report.designs_differ = Some(free.best_design != capped.best_design);
    report.polarization_difference =
        Some(free.best().mean_polarization.unwrap_or(0.0) - capped.best().mean_polarization.unwrap_or(0.0));
    Ok(report)
}

pub fn run_test(spec: &HypothesisSpec) -> Result<TestReport> {
    match spec.id {
        HypothesisId::Context => test_h0_context(spec),
        HypothesisId::Affect => test_h0_affect(spec),
        HypothesisId::Format => test_h0_format(spec),
        HypothesisId::Network => test_h0_network(spec),
        HypothesisId::Ethics => test_h0_ethics(spec),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub id: HypothesisId,
    pub meta_reps: usize,
    pub rejections: usize,
    pub rejection_rate: f64,
    /// 95% Wilson interval of the rejection rate.
    pub ci_low: f64,
    pub ci_high: f64,
    pub alpha: f64,
    pub reps: usize,
    pub master_seed: u64,
}

/// Empirical type-I error: rerun the test under its null generator with
/// meta-replication seeds `(master, "calibrate", id, m)`.
pub fn calibrate(spec: &HypothesisSpec, meta_reps: usize) -> Result<CalibrationReport> {
    if meta_reps == 0 {
        return Err(AmaError::InvalidConfig("calibration needs at least one meta-replication".into()));
    }
    let rejects: Vec<bool> = (0..meta_reps)
        .into_par_iter()
        .map(|m| {
            let mut s = spec.clone();
            s.null = true;
            s.master_seed = derive_seed(spec.master_seed, &labels!["calibrate", spec.id.name(), m as u64]);
            run_test(&s).map(|r| r.reject)
        })
        .collect::<Result<_>>()?;
    let rejections = rejects.iter().filter(|&&r| r).count();
    let (ci_low, ci_high) = wilson_interval(rejections, meta_reps, 1.959_963_984_540_054);
    Ok(CalibrationReport {
        id: spec.id,
        meta_reps,
        rejections,
        rejection_rate: rejections as f64 / meta_reps as f64,
        ci_low,
        ci_high,
        alpha: spec.alpha,
        reps: spec.reps,
        master_seed: spec.master_seed,
    })
}
