//! Subcommand drivers. Each one loads the effective scenario, calls into the
//! core crate and writes its CSV/JSON outputs.

use std::path::PathBuf;

use ama_core::calibration;
use ama_core::design::{cost, optimize as optimize_design};
use ama_core::estimate::{
    factor_scores, fit_affect_ols, fit_decision, fit_transmission, simulate_panel, AffectSource, FactorScores,
    FitResult, PanelData,
};
use ama_core::export::{CsvTable, Field};
use ama_core::falsify::{
    calibrate as calibrate_test, run_test, CalibrationReport, HypothesisId, HypothesisSpec, TestReport,
};
use ama_core::game::best_response_dynamics;
use ama_core::sim::ImpactSummary;
use ama_core::{AmaError, ContextPreset, Result, Scenario, Simulator};
use clap::Args;
use serde::Serialize;

use crate::output::Writer;
use crate::Common;

pub struct Context {
    pub scenario: Scenario,
    pub seed: u64,
    pub reps: usize,
    pub trace: bool,
    pub out: Writer,
}

impl Context {
    pub fn load(c: &Common) -> Result<Self> {
        let mut scenario = match &c.scenario {
            Some(p) => Scenario::load(p)?,
            None => calibration::scenario(ContextPreset::Community, c.seed.unwrap_or(1)),
        };
        if let Some(seed) = c.seed {
            scenario.run.master_seed = seed;
        }
        if let Some(reps) = c.reps {
            scenario.run.reps = reps;
        }
        scenario.validate()?;
        let seed = scenario.run.master_seed;
        let out = Writer::new(&c.out, &scenario.name, &scenario.hash(), seed)?;
        Ok(Context { reps: scenario.run.reps, seed, trace: c.trace, out, scenario })
    }

    fn simulator(&self) -> Result<Simulator> {
        Simulator::new(&self.scenario, self.seed)
    }
}

pub fn generate(ctx: &Context) -> Result<()> {
    let graph = ctx.simulator()?.graph_for(0)?;
    ctx.out.text("graph.edges", &graph.to_edge_list())?;
    let mut nodes = CsvTable::new(&["agent", "block", "degree", "context"]);
    for i in 0..graph.n() {
        nodes.row(&[i.into(), graph.block(i).into(), graph.degree(i).into(), graph.context(i).into()]);
    }
    ctx.out.csv("graph_nodes.csv", nodes)?;
    #[derive(Serialize)]
    struct Summary {
        n: usize,
        blocks: usize,
        edges: usize,
        structure: ama_core::graph::StructureSummary,
    }
    let body = Summary {
        n: graph.n(),
        blocks: graph.blocks(),
        edges: graph.edge_count(),
        structure: graph.structure_summary(),
    };
    ctx.out.json("graph.json", "generate", &body)
}

pub const REP_COLUMNS: [&str; 11] = [
    "rep",
    "participation",
    "cohesion",
    "sway",
    "polarization",
    "i_p",
    "active",
    "rounds",
    "within_block_reach",
    "cross_block_reach",
    "cross_block_sway",
];

pub fn simulate(ctx: &Context) -> Result<()> {
    let s = &ctx.scenario;
    let reps = ctx.simulator()?.run(&s.design, ctx.reps)?;
    let band = s.impact.undecided_band;
    let mut table = CsvTable::new(&REP_COLUMNS);
    for r in &reps {
        let reach = r.reach(band);
        table.row(&[
            r.rep.into(),
            r.impact.participation.into(),
            r.impact.cohesion.into(),
            r.impact.sway.into(),
            r.impact.polarization.into(),
            r.impact.i_p.into(),
            r.result.active_count().into(),
            r.result.rounds_run.into(),
            reach.within_block_reach.into(),
            reach.cross_block_reach.into(),
            reach.cross_block_sway.into(),
        ]);
    }
    ctx.out.csv("simulate_reps.csv", table)?;
    if ctx.trace {
        let mut agents = CsvTable::new(&[
            "rep",
            "agent",
            "block",
            "exposure",
            "matching",
            "context",
            "affect",
            "influence",
            "activation_round",
        ]);
        for r in &reps {
            let k = r.result.influence_counts();
            for i in 0..r.graph.n() {
                agents.row(&[
                    r.rep.into(),
                    i.into(),
                    r.graph.block(i).into(),
                    r.result.exposure[i].into(),
                    r.result.matching[i].into(),
                    r.graph.context(i).into(),
                    r.result.affect[i].into(),
                    k[i].into(),
                    r.result.activation_round[i].into(),
                ]);
            }
        }
        ctx.out.csv("simulate_agents.csv", agents)?;
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        design: &'a ama_core::Design,
        design_cost: f64,
        summary: ImpactSummary,
    }
    let reports: Vec<_> = reps.iter().map(|r| r.impact.clone()).collect();
    let body = Summary {
        design: &s.design,
        design_cost: cost(&s.cost, &s.design, s.graph.n),
        summary: ImpactSummary::from_reports(&reports),
    };
    ctx.out.json("simulate_summary.json", "simulate", &body)
}

pub fn designs_table(report: &ama_core::OptimizeReport) -> CsvTable {
    let mut t = CsvTable::new(&[
        "design",
        "format",
        "toxicity",
        "seed_fraction",
        "seeding",
        "cost",
        "feasible",
        "mean_ip",
        "se",
        "participation",
        "cohesion",
        "sway",
        "polarization",
    ]);
    for e in &report.evaluated {
        t.row(&[
            e.design.label().into(),
            e.design.format.name().into(),
            e.design.toxicity.into(),
            e.design.seed_fraction.into(),
            e.design.seeding.name().into(),
            e.cost.into(),
            e.feasible.into(),
            e.mean_ip.into(),
            e.se.into(),
            e.mean_participation.into(),
            e.mean_cohesion.into(),
            e.mean_sway.into(),
            e.mean_polarization.into(),
        ]);
    }
    t
}

pub fn optimize(ctx: &Context, budget: Option<f64>, toxicity_limit: Option<f64>) -> Result<()> {
    let s = &ctx.scenario;
    let report = optimize_design(
        s,
        &s.space,
        &s.cost,
        budget.unwrap_or(s.budget),
        toxicity_limit.unwrap_or(s.toxicity_limit),
        ctx.reps,
        ctx.seed,
    )?;
    ctx.out.csv("optimize_designs.csv", designs_table(&report))?;
    println!(
        "best design {} mean i_p {:.6} (se {:.6})",
        report.best_design.label(),
        report.best_mean_ip,
        report.best_se
    );
    ctx.out.json("optimize.json", "optimize", &report)
}

pub fn game(ctx: &Context, max_iters: usize) -> Result<()> {
    let s = &ctx.scenario;
    let report = best_response_dynamics(&ctx.simulator()?, &s.game.left, &s.game.right, ctx.reps, max_iters)?;
    let mut t =
        CsvTable::new(&["left", "right", "left_design", "right_design", "payoff_left", "payoff_right", "pure_nash"]);
    for (i, dl) in s.game.left.strategy_set.iter().enumerate() {
        for (j, dr) in s.game.right.strategy_set.iter().enumerate() {
            t.row(&[
                i.into(),
                j.into(),
                dl.label().into(),
                dr.label().into(),
                report.payoff_left[i][j].into(),
                report.payoff_right[i][j].into(),
                report.pure_equilibria.contains(&(i, j)).into(),
            ]);
        }
    }
    ctx.out.csv("game_payoffs.csv", t)?;
    println!("{:?} at {:?}", report.kind, report.profile);
    ctx.out.json("game.json", "game", &report)
}

#[derive(Args, Debug, Clone)]
pub struct TestArgs {
    /// Hypothesis (context, affect, format, network, ethics) or `all`.
    #[arg(long, default_value = "all")]
    pub hypothesis: String,
    /// Contrast scenario of the context test; the fragmented preset when omitted.
    #[arg(long)]
    pub contrast: Option<PathBuf>,
    /// Generate data under the null.
    #[arg(long)]
    pub null: bool,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Replications per arm pooled into the agent and edge fits.
    #[arg(long, default_value_t = 20)]
    pub panel_reps: usize,
}

fn hypotheses(arg: &str) -> Result<Vec<HypothesisId>> {
    if arg == "all" {
        Ok(HypothesisId::ALL.to_vec())
    } else {
        arg.split(',').map(|h| HypothesisId::parse(h.trim())).collect()
    }
}

fn spec_for(ctx: &Context, args: &TestArgs, id: HypothesisId) -> Result<HypothesisSpec> {
    let mut spec = HypothesisSpec::new(id, ctx.scenario.clone(), ctx.seed);
    spec.reps = ctx.reps;
    spec.null = args.null;
    spec.alpha = args.alpha;
    spec.panel_reps = args.panel_reps;
    if id == HypothesisId::Context {
        spec.contrast = Some(match &args.contrast {
            Some(p) => Scenario::load(p)?,
            None => calibration::scenario(ContextPreset::Fragmented, ctx.seed),
        });
    }
    Ok(spec)
}

pub fn falsify(ctx: &Context, args: &TestArgs) -> Result<()> {
    let mut table = CsvTable::new(&["hypothesis", "component", "statistic", "p_value", "adjusted_p", "reject"]);
    let mut reports: Vec<TestReport> = Vec::new();
    for id in hypotheses(&args.hypothesis)? {
        let r = run_test(&spec_for(ctx, args, id)?)?;
        for c in &r.components {
            table.row(&[
                id.name().into(),
                c.name.as_str().into(),
                c.statistic.into(),
                c.p_value.into(),
                c.adjusted_p.into(),
                (c.adjusted_p < r.alpha).into(),
            ]);
        }
        println!("{}: p = {:.4e} reject = {}", id.name(), r.p_value, r.reject);
        reports.push(r);
    }
    ctx.out.csv("falsify_components.csv", table)?;
    #[derive(Serialize)]
    struct Body {
        tests: Vec<TestReport>,
    }
    ctx.out.json("falsify.json", "falsify", &Body { tests: reports })
}

pub fn calibrate(ctx: &Context, args: &TestArgs, meta_reps: usize) -> Result<()> {
    let mut table =
        CsvTable::new(&["hypothesis", "meta_reps", "rejections", "rejection_rate", "ci_low", "ci_high", "alpha"]);
    let mut reports: Vec<CalibrationReport> = Vec::new();
    for id in hypotheses(&args.hypothesis)? {
        let r = calibrate_test(&spec_for(ctx, args, id)?, meta_reps)?;
        table.row(&[
            id.name().into(),
            r.meta_reps.into(),
            r.rejections.into(),
            r.rejection_rate.into(),
            r.ci_low.into(),
            r.ci_high.into(),
            r.alpha.into(),
        ]);
        println!("{}: type-I error {:.4} [{:.4}, {:.4}]", id.name(), r.rejection_rate, r.ci_low, r.ci_high);
        reports.push(r);
    }
    ctx.out.csv("calibrate.csv", table)?;
    #[derive(Serialize)]
    struct Body {
        tests: Vec<CalibrationReport>,
    }
    ctx.out.json("calibrate.json", "calibrate", &Body { tests: reports })
}

#[derive(Serialize)]
struct EstimateBody {
    agents: usize,
    edge_attempts: usize,
    affect_source: &'static str,
    factor: Option<FactorScores>,
    affect: Option<FitResult>,
    decision: Option<FitResult>,
    transmission: Option<FitResult>,
    errors: Vec<String>,
}

pub fn estimate(ctx: &Context, panels: usize, input: Option<(PathBuf, PathBuf)>, measured: bool) -> Result<()> {
    let panel = match input {
        Some((a, e)) => PanelData::from_csv(&std::fs::read_to_string(a)?, &std::fs::read_to_string(e)?)?,
        None => {
            if panels == 0 {
                return Err(AmaError::InvalidConfig("--panels must be at least 1".into()));
            }
            let sim = ctx.simulator()?;
            let mut panel = PanelData::default();
            for rep in 0..panels {
                panel.append(simulate_panel(&sim, &ctx.scenario.design, rep)?);
            }
            ctx.out.csv("panel_agents.csv", panel.agents_csv())?;
            ctx.out.csv("panel_edges.csv", panel.edges_csv())?;
            panel
        }
    };
    let source = if measured { AffectSource::Measured } else { AffectSource::Oracle };
    let mut errors = Vec::new();
    let mut keep = |name: &str, r: Result<FitResult>| match r {
        Ok(f) => Some(f),
        Err(e) => {
            errors.push(format!("{name}: {e}"));
            None
        }
    };
    let affect = keep("affect", fit_affect_ols(&panel, source));
    let decision = keep("decision", fit_decision(&panel, source));
    let transmission = keep("transmission", fit_transmission(&panel, source));
    let factor = match factor_scores(&panel.item_matrix()) {
        Ok(f) => Some(f),
        Err(e) => {
            errors.push(format!("factor: {e}"));
            None
        }
    };
    let body = EstimateBody {
        agents: panel.agents.len(),
        edge_attempts: panel.edges.len(),
        affect_source: if measured { "measured" } else { "oracle" },
        factor,
        affect,
        decision,
        transmission,
        errors,
    };
    let mut coef = CsvTable::new(&["equation", "name", "estimate", "std_error", "z", "p_value"]);
    for (eq, fit) in [("affect", &body.affect), ("decision", &body.decision), ("transmission", &body.transmission)] {
        if let Some(f) = fit {
            for (j, name) in f.names.iter().enumerate() {
                let row: [Field; 6] = [
                    eq.into(),
                    name.as_str().into(),
                    f.estimates[j].into(),
                    f.standard_errors[j].into(),
                    f.z(j).into(),
                    f.wald_p(j).into(),
                ];
                coef.row(&row);
            }
        }
    }
    ctx.out.csv("estimate_coefficients.csv", coef)?;
    ctx.out.json("estimate.json", "estimate", &body)
}
