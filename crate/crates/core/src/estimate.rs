//! Parameter recovery from simulated panels: one-factor scores for latent
//! affect, least squares for the affect equation and logistic maximum
//! likelihood for the decision and transmission equations.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::affect::{measure_items, Design, Format, MeasurementParams};
use crate::diffusion::CascadeResult;
use crate::error::{AmaError, Result};
use crate::export::{parse_csv, CsvTable, Field};
use crate::graph::SocialGraph;
use crate::labels;
use crate::rng::derive_stream;
use crate::sim::Simulator;
use crate::stats::normal_two_sided;

const PIVOT_TOL: f64 = 1e-12;
const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITERS: usize = 1000;
const IRLS_SCORE_TOL: f64 = 1e-8;
const IRLS_STEP_TOL: f64 = 1e-10;
const IRLS_MAX_ITERS: usize = 100;
const SEPARATION_NORM: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentRow {
    pub items: Vec<f64>,
    pub exposure: bool,
    pub matching: f64,
    pub context: f64,
    /// Active at the end of the cascade.
    pub decision: bool,
    /// Active at round 0 (only exposed agents can be).
    pub initial_decision: bool,
    pub influence: usize,
    /// True latent affect, used in oracle mode.
    pub affect: f64,
}

/// One transmission attempt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRow {
    pub sender: usize,
    pub receiver: usize,
    pub sender_affect: f64,
    pub similarity: f64,
    pub meme: bool,
    pub same_block: bool,
    pub toxicity: f64,
    pub success: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PanelData {
    pub agents: Vec<AgentRow>,
    pub edges: Vec<EdgeRow>,
}

pub const AGENT_COLUMNS: [&str; 8] =
    ["agent", "exposure", "matching", "context", "decision", "initial_decision", "influence", "affect"];
pub const EDGE_COLUMNS: [&str; 8] =
    ["sender", "receiver", "sender_affect", "similarity", "meme", "same_block", "toxicity", "success"];

impl PanelData {
    /// Agent and edge rows of one cascade; items are drawn from `rng` in agent order.
    pub fn from_cascade<R: Rng + ?Sized>(
        graph: &SocialGraph,
        result: &CascadeResult,
        design: &Design,
        mp: &MeasurementParams,
        rng: &mut R,
    ) -> Result<Self> {
        if result.affect.len() != graph.n() {
            return Err(AmaError::DimensionMismatch { expected: graph.n(), got: result.affect.len() });
        }
        let influence = result.influence_counts();
        let agents = (0..graph.n())
            .map(|i| AgentRow {
                items: measure_items(mp, result.affect[i], rng),
                exposure: result.exposure[i],
                matching: result.matching[i],
                context: graph.context(i),
                decision: result.is_active(i),
                initial_decision: result.activation_round[i] == Some(0),
                influence: influence[i],
                affect: result.affect[i],
            })
            .collect();
        let meme = design.format == Format::Meme;
        let edges = result
            .attempts
            .iter()
            .map(|a| EdgeRow {
                sender: a.sender,
                receiver: a.receiver,
                sender_affect: result.affect[a.sender],
                similarity: graph.similarity(a.sender, a.receiver),
                meme,
                same_block: graph.block(a.sender) == graph.block(a.receiver),
                toxicity: design.toxicity,
                success: a.success,
            })
            .collect();
        Ok(PanelData { agents, edges })
    }

    /// Stack `other` below `self`, shifting its agent ids.
    pub fn append(&mut self, other: PanelData) {
        let offset = self.agents.len();
        self.agents.extend(other.agents);
        self.edges.extend(other.edges.into_iter().map(|mut e| {
            e.sender += offset;
            e.receiver += offset;
            e
        }));
    }

    pub fn item_count(&self) -> usize {
        self.agents.first().map_or(0, |a| a.items.len())
    }

    pub fn item_matrix(&self) -> Vec<Vec<f64>> {
        self.agents.iter().map(|a| a.items.clone()).collect()
    }

    pub fn agents_csv(&self) -> CsvTable {
        let k = self.item_count();
        let mut header: Vec<String> = AGENT_COLUMNS.iter().map(|s| s.to_string()).collect();
        header.extend((1..=k).map(|j| format!("y{j}")));
        let refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut t = CsvTable::new(&refs);
        for (i, a) in self.agents.iter().enumerate() {
            let mut row: Vec<Field> = vec![
                i.into(),
                a.exposure.into(),
                a.matching.into(),
                a.context.into(),
                a.decision.into(),
                a.initial_decision.into(),
                a.influence.into(),
                a.affect.into(),
            ];
            row.extend(a.items.iter().map(|&y| Field::Float(y)));
            t.row(&row);
        }
        t
    }

    pub fn edges_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&EDGE_COLUMNS);
        for e in &self.edges {
            t.row(&[
                e.sender.into(),
                e.receiver.into(),
                e.sender_affect.into(),
                e.similarity.into(),
                e.meme.into(),
                e.same_block.into(),
                e.toxicity.into(),
                e.success.into(),
            ]);
        }
        t
    }

    /// Parse the two tables written by [`PanelData::agents_csv`] and
    /// [`PanelData::edges_csv`].
    pub fn from_csv(agents: &str, edges: &str) -> Result<Self> {
        let a = parse_csv(agents)?;
        if a.header.len() < AGENT_COLUMNS.len() || a.header[..AGENT_COLUMNS.len()] != AGENT_COLUMNS {
            return Err(AmaError::Parse("agent table: unexpected header".into()));
        }
        let k = a.header.len() - AGENT_COLUMNS.len();
        let mut panel = PanelData::default();
        for (line, row) in a.rows.iter().enumerate() {
            let f = |c: usize| parse_f64(&row[c], line);
            let b = |c: usize| parse_flag(&row[c], line);
            if f(0)? as usize != line {
                return Err(AmaError::Parse(format!("agent table row {line}: ids must be 0..n in order")));
            }
            panel.agents.push(AgentRow {
                exposure: b(1)?,
                matching: f(2)?,
                context: f(3)?,
                decision: b(4)?,
                initial_decision: b(5)?,
                influence: f(6)? as usize,
                affect: f(7)?,
                items: (0..k).map(|j| f(AGENT_COLUMNS.len() + j)).collect::<Result<_>>()?,
            });
        }
        let e = parse_csv(edges)?;
        if e.header != EDGE_COLUMNS {
            return Err(AmaError::Parse("edge table: unexpected header".into()));
        }
        let n = panel.agents.len();
        for (line, row) in e.rows.iter().enumerate() {
            let f = |c: usize| parse_f64(&row[c], line);
            let b = |c: usize| parse_flag(&row[c], line);
            let (s, r) = (f(0)? as usize, f(1)? as usize);
            if s >= n || r >= n {
                return Err(AmaError::Parse(format!("edge table row {line}: agent id out of range")));
            }
            panel.edges.push(EdgeRow {
                sender: s,
                receiver: r,
                sender_affect: f(2)?,
                similarity: f(3)?,
                meme: b(4)?,
                same_block: b(5)?,
                toxicity: f(6)?,
                success: b(7)?,
            });
        }
        Ok(panel)
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim().parse().map_err(|_| AmaError::Parse(format!("row {line}: bad number {s:?}")))
}

fn parse_flag(s: &str, line: usize) -> Result<bool> {
    match s.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(AmaError::Parse(format!("row {line}: bad flag {other:?}"))),
    }
}

/// Panel of replication `rep`; items come from the `(master, "rep", rep, "items")` stream.
pub fn simulate_panel(sim: &Simulator, design: &Design, rep: usize) -> Result<PanelData> {
    let r = sim.replicate(design, rep)?;
    let mut rng = derive_stream(sim.master_seed(), &labels!["rep", rep as u64, "items"]);
    PanelData::from_cascade(&r.graph, &r.result, design, &sim.model().measurement, &mut rng)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorScores {
    pub scores: Vec<f64>,
    pub loadings: Vec<f64>,
    pub eigenvalue: f64,
    pub iterations: usize,
}

/// One-factor principal-axis scores by power iteration on the item covariance.
pub fn factor_scores(items: &[Vec<f64>]) -> Result<FactorScores> {
    let n = items.len();
    let k = items.first().map_or(0, Vec::len);
    if k < 2 {
        return Err(AmaError::DegenerateData("factor scores need at least two items".into()));
    }
    if n < k {
        return Err(AmaError::DegenerateData(format!("{n} agents for {k} items")));
    }
    if let Some(row) = items.iter().find(|r| r.len() != k) {
        return Err(AmaError::DimensionMismatch { expected: k, got: row.len() });
    }
    let mean: Vec<f64> = (0..k).map(|j| items.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let mut cov = vec![vec![0.0; k]; k];
    for r in items {
        for a in 0..k {
            let da = r[a] - mean[a];
            for b in a..k {
                cov[a][b] += da * (r[b] - mean[b]);
            }
        }
    }
    for a in 0..k {
        for b in a..k {
            cov[a][b] /= (n - 1).max(1) as f64;
            cov[b][a] = cov[a][b];
        }
        if !(cov[a][a] > 0.0) {
            return Err(AmaError::DegenerateData(format!("item {} has zero variance", a + 1)));
        }
    }

    let mut v = vec![1.0 / (k as f64).sqrt(); k];
    let mut iterations = 0;
    for it in 1..=POWER_MAX_ITERS {
        iterations = it;
        let mut w: Vec<f64> = (0..k).map(|a| (0..k).map(|b| cov[a][b] * v[b]).sum()).collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(AmaError::DegenerateData("item covariance annihilates the start vector".into()));
        }
        w.iter_mut().for_each(|x| *x /= norm);
        let change = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if change < POWER_TOL {
            break;
        }
    }
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let eigenvalue: f64 = (0..k).map(|a| v[a] * (0..k).map(|b| cov[a][b] * v[b]).sum::<f64>()).sum();
    let scores = items.iter().map(|r| (0..k).map(|j| v[j] * (r[j] - mean[j])).sum()).collect();
    let loadings = v.iter().map(|x| x * eigenvalue.max(0.0).sqrt()).collect();
    Ok(FactorScores { scores, loadings, eigenvalue, iterations })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub names: Vec<String>,
    pub estimates: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub log_likelihood: Option<f64>,
    pub residual_variance: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub n: usize,
}

impl FitResult {
    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn z(&self, j: usize) -> f64 {
        self.estimates[j] / self.standard_errors[j]
    }

    /// Two-sided Wald p-value for coefficient `j` being zero.
    pub fn wald_p(&self, j: usize) -> f64 {
        normal_two_sided(self.z(j))
    }
}

/// Solve `a x = b` for several right-hand sides by Gaussian elimination with
/// partial pivoting. A pivot below `1e-12` times the largest entry of `a`
/// reports the column being eliminated.
pub fn solve_pivoted(mut a: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
    let p = a.len();
    if b.len() != p {
        return Err(AmaError::DimensionMismatch { expected: p, got: b.len() });
    }
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(scale > 0.0) {
        return Err(AmaError::Collinear { column: 0 });
    }
    let mut perm: Vec<usize> = (0..p).collect();
    for col in 0..p {
        let piv = (col..p).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()).then(j.cmp(&i))).unwrap();
        if a[piv][col].abs() < PIVOT_TOL * scale {
            return Err(AmaError::Collinear { column: col });
        }
        a.swap(col, piv);
        b.swap(col, piv);
        perm.swap(col, piv);
        for row in col + 1..p {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..p {
                a[row][c] -= f * a[col][c];
            }
            for c in 0..b[row].len() {
                b[row][c] -= f * b[col][c];
            }
        }
    }
    let m = b[0].len();
    let mut x = vec![vec![0.0; m]; p];
    for row in (0..p).rev() {
        for c in 0..m {
            let s: f64 = (row + 1..p).map(|k| a[row][k] * x[k][c]).sum();
            x[row][c] = (b[row][c] - s) / a[row][row];
        }
    }
    Ok(x)
}

fn identity(p: usize) -> Vec<Vec<f64>> {
    (0..p).map(|i| (0..p).map(|j| f64::from(u8::from(i == j))).collect()).collect()
}

fn check_design(x: &[Vec<f64>], n_y: usize, names: &[&str]) -> Result<usize> {
    if x.len() != n_y {
        return Err(AmaError::DimensionMismatch { expected: x.len(), got: n_y });
    }
    let p = names.len();
    if let Some(row) = x.iter().find(|r| r.len() != p) {
        return Err(AmaError::DimensionMismatch { expected: p, got: row.len() });
    }
    if x.len() <= p {
        return Err(AmaError::DegenerateData(format!("{} rows for {p} coefficients", x.len())));
    }
    Ok(p)
}

fn cross_products(x: &[Vec<f64>], w: impl Fn(usize) -> f64, p: usize) -> Vec<Vec<f64>> {
    let mut xtx = vec![vec![0.0; p]; p];
    for (i, r) in x.iter().enumerate() {
        let wi = w(i);
        for a in 0..p {
            let ra = wi * r[a];
            for b in a..p {
                xtx[a][b] += ra * r[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            xtx[a][b] = xtx[b][a];
        }
    }
    xtx
}

/// Ordinary least squares through the normal equations.
pub fn fit_ols(x: &[Vec<f64>], y: &[f64], names: &[&str]) -> Result<FitResult> {
    let p = check_design(x, y.len(), names)?;
    let n = y.len();
    let xtx = cross_products(x, |_| 1.0, p);
    let xty: Vec<Vec<f64>> = (0..p).map(|a| vec![x.iter().zip(y).map(|(r, v)| r[a] * v).sum()]).collect();
    let beta: Vec<f64> = solve_pivoted(xtx.clone(), xty)?.into_iter().map(|r| r[0]).collect();
    let rss: f64 =
        x.iter().zip(y).map(|(r, v)| (v - r.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>()).powi(2)).sum();
    let s2 = rss / (n - p) as f64;
    let inv = solve_pivoted(xtx, identity(p))?;
    Ok(FitResult {
        names: names.iter().map(|s| s.to_string()).collect(),
        estimates: beta,
        standard_errors: (0..p).map(|j| (s2 * inv[j][j]).sqrt()).collect(),
        log_likelihood: None,
        residual_variance: Some(s2),
        converged: true,
        iterations: 1,
        n,
    })
}

fn log1p_exp(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

fn linear(beta: &[f64], row: &[f64]) -> f64 {
    row.iter().zip(beta).map(|(a, b)| a * b).sum()
}

pub fn logistic_loglik(beta: &[f64], x: &[Vec<f64>], y: &[bool]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(r, &yi)| {
            let eta = linear(beta, r);
            if yi {
                -log1p_exp(-eta)
            } else {
                -log1p_exp(eta)
            }
        })
        .sum()
}

/// Gradient of [`logistic_loglik`].
pub fn logistic_score(beta: &[f64], x: &[Vec<f64>], y: &[bool]) -> Vec<f64> {
    let mut g = vec![0.0; beta.len()];
    for (r, &yi) in x.iter().zip(y) {
        let resid = f64::from(u8::from(yi)) - crate::diffusion::logistic(linear(beta, r));
        for (gj, xj) in g.iter_mut().zip(r) {
            *gj += resid * xj;
        }
    }
    g
}

/// Logistic maximum likelihood by iteratively reweighted least squares with
/// step halving, so the log-likelihood never decreases between iterations.
pub fn fit_logistic(x: &[Vec<f64>], y: &[bool], names: &[&str]) -> Result<FitResult> {
    irls(x, y, names).map(|(fit, _)| fit)
}

/// IRLS returning the fit and the log-likelihood after every iteration.
fn irls(x: &[Vec<f64>], y: &[bool], names: &[&str]) -> Result<(FitResult, Vec<f64>)> {
    let p = check_design(x, y.len(), names)?;
    let positives = y.iter().filter(|&&v| v).count();
    if positives == 0 || positives == y.len() {
        return Err(AmaError::DegenerateData("logistic fit needs both outcomes".into()));
    }
    let mut beta = vec![0.0; p];
    let mut ll = logistic_loglik(&beta, x, y);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < IRLS_MAX_ITERS {
        let score = logistic_score(&beta, x, y);
        if score.iter().fold(0.0f64, |m, g| m.max(g.abs())) < IRLS_SCORE_TOL {
            converged = true;
            break;
        }
        iterations += 1;
        let probs: Vec<f64> = x.iter().map(|r| crate::diffusion::logistic(linear(&beta, r))).collect();
        let info = cross_products(x, |i| probs[i] * (1.0 - probs[i]), p);
        let rhs = score.iter().map(|g| vec![*g]).collect();
        let delta: Vec<f64> = match solve_pivoted(info, rhs) {
            Ok(d) => d.into_iter().map(|r| r[0]).collect(),
            Err(AmaError::Collinear { .. }) if norm(&beta) > 1.0 => {
                return Err(AmaError::Separation { norm: norm(&beta) })
            }
            Err(e) => return Err(e),
        };
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<f64> = beta.iter().zip(&delta).map(|(b, d)| b + t * d).collect();
            let cand_ll = logistic_loglik(&cand, x, y);
            if cand_ll >= ll {
                accepted = Some((cand, cand_ll));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, cand_ll)) = accepted else {
            // no ascent direction left at working precision
            break;
        };
        debug_assert!(cand_ll >= ll);
        let step = delta.iter().fold(0.0f64, |m, d| m.max((t * d).abs()));
        beta = cand;
        ll = cand_ll;
        trace.push(ll);
        if norm(&beta) > SEPARATION_NORM {
            return Err(AmaError::Separation { norm: norm(&beta) });
        }
        if step < IRLS_STEP_TOL {
            converged = true;
            break;
        }
    }
    let probs: Vec<f64> = x.iter().map(|r| crate::diffusion::logistic(linear(&beta, r))).collect();
    let perfect = probs.iter().zip(y).all(|(&q, &yi)| (q - f64::from(u8::from(yi))).abs() < 1e-6);
    if perfect {
        return Err(AmaError::Separation { norm: norm(&beta) });
    }
    let info = cross_products(x, |i| probs[i] * (1.0 - probs[i]), p);
    let inv = solve_pivoted(info, identity(p))?;
    let fit = FitResult {
        names: names.iter().map(|s| s.to_string()).collect(),
        estimates: beta,
        standard_errors: (0..p).map(|j| inv[j][j].max(0.0).sqrt()).collect(),
        log_likelihood: Some(ll),
        residual_variance: None,
        converged,
        iterations,
        n: y.len(),
    };
    Ok((fit, trace))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Where per-agent affect comes from in the structural fits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AffectSource {
    /// The simulator's true latent affect.
    Oracle,
    /// One-factor scores of the observed items.
    Measured,
}

pub fn affect_values(panel: &PanelData, source: AffectSource) -> Result<Vec<f64>> {
    match source {
        AffectSource::Oracle => Ok(panel.agents.iter().map(|a| a.affect).collect()),
        AffectSource::Measured => Ok(factor_scores(&panel.item_matrix())?.scores),
    }
}

pub const AFFECT_NAMES: [&str; 6] = ["a0", "a1", "a2", "a3", "a4", "a5"];

/// Affect on `(1, E, m, c, E·m, E·c)`. With a nonzero hook the `E`
/// coefficient estimates `a1·(1 + hook)`.
pub fn fit_affect_ols(panel: &PanelData, source: AffectSource) -> Result<FitResult> {
    let v = affect_values(panel, source)?;
    let x: Vec<Vec<f64>> = panel
        .agents
        .iter()
        .map(|a| {
            let e = f64::from(u8::from(a.exposure));
            vec![1.0, e, a.matching, a.context, e * a.matching, e * a.context]
        })
        .collect();
    fit_ols(&x, &v, &AFFECT_NAMES)
}

/// Round-0 decisions of exposed agents on `(1, V)`.
///
/// At round 0 no social term enters, so the affect coefficient is identified
/// without modelling the cascade history.
pub fn fit_decision(panel: &PanelData, source: AffectSource) -> Result<FitResult> {
    let v = affect_values(panel, source)?;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (a, vi) in panel.agents.iter().zip(&v) {
        if a.exposure {
            x.push(vec![1.0, *vi]);
            y.push(a.initial_decision);
        }
    }
    fit_logistic(&x, &y, &["b0", "b1"])
}

/// Edge successes on `(1, V_sender, sim, [meme], toxicity·[same block])`.
/// The toxicity column is dropped when it is zero on every attempt.
pub fn fit_transmission(panel: &PanelData, source: AffectSource) -> Result<FitResult> {
    let v = affect_values(panel, source)?;
    let with_tox = panel.edges.iter().any(|e| e.same_block && e.toxicity != 0.0);
    let x: Vec<Vec<f64>> = panel
        .edges
        .iter()
        .map(|e| {
            let mut r = vec![1.0, v[e.sender], e.similarity, f64::from(u8::from(e.meme))];
            if with_tox {
                r.push(if e.same_block { e.toxicity } else { 0.0 });
            }
            r
        })
        .collect();
    let y: Vec<bool> = panel.edges.iter().map(|e| e.success).collect();
    let names: &[&str] = if with_tox { &["l0", "l1", "l2", "l3", "l4_tox"] } else { &["l0", "l1", "l2", "l3"] };
    fit_logistic(&x, &y, names)
}
