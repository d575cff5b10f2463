//! Two-actor design competition: joint cascades with exclusive adoption,
//! per-side payoffs and pure-equilibrium search by best-response dynamics.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affect::Design;
use crate::diffusion::{matchings, run_engine, seed_among, side_view, CascadeResult, ReplicationDraws, SideSetup};
use crate::error::{AmaError, Result};
use crate::graph::SocialGraph;
use crate::impact::{cohesion, participation, polarization, sway};
use crate::scenario::Model;
use crate::sim::{replication_stream, Simulator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    L,
    R,
}

/// Payoff weights of one side: cohesion, participation and sway of its adopters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffWeights {
    pub cohesion: f64,
    pub participation: f64,
    pub sway: f64,
}

impl PayoffWeights {
    pub fn scaled(&self, c: f64) -> Self {
        PayoffWeights { cohesion: self.cohesion * c, participation: self.participation * c, sway: self.sway * c }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerConfig {
    pub side: Side,
    pub weights: PayoffWeights,
    pub strategy_set: Vec<Design>,
    /// Blocks forming the side's own base; seeding draws only from these
    /// blocks. Empty means the whole population.
    #[serde(default)]
    pub base_blocks: Vec<usize>,
}

impl PlayerConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.strategy_set.is_empty() {
            return Err(AmaError::InvalidConfig(format!("player {:?}: empty strategy set", self.side)));
        }
        let w = &self.weights;
        if [w.cohesion, w.participation, w.sway].iter().any(|x| !(*x >= 0.0)) {
            return Err(AmaError::InvalidConfig(format!("player {:?}: weights must be >= 0", self.side)));
        }
        for d in &self.strategy_set {
            d.validate(dim)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointCascadeResult {
    pub adoption: Vec<Option<Side>>,
    pub left: CascadeResult,
    pub right: CascadeResult,
    /// Range of per-block total adoption rates, pooled over both sides.
    pub polarization: f64,
}

impl JointCascadeResult {
    pub fn side(&self, side: Side) -> &CascadeResult {
        match side {
            Side::L => &self.left,
            Side::R => &self.right,
        }
    }
}

/// Simulate both sides seeding and diffusing at once; an agent adopts at
/// most one side. Seeding pools come from each player's base blocks.
#[allow(clippy::too_many_arguments)]
pub fn joint_cascade<R: Rng + ?Sized>(
    graph: &SocialGraph,
    left: &Design,
    right: &Design,
    left_base: &[usize],
    right_base: &[usize],
    model: &Model,
    rng: &mut R,
    max_rounds: u32,
) -> Result<JointCascadeResult> {
    if max_rounds < 1 {
        return Err(AmaError::InvalidConfig("max_rounds must be at least 1".into()));
    }
    left.validate(graph.dim())?;
    right.validate(graph.dim())?;
    let pool = |base: &[usize]| -> Option<Vec<usize>> {
        (!base.is_empty()).then(|| (0..graph.n()).filter(|&i| base.contains(&graph.block(i))).collect())
    };
    let draws = ReplicationDraws::draw(graph, rng);
    let ml = matchings(graph, left)?;
    let mr = matchings(graph, right)?;
    let el = seed_among(graph, left, pool(left_base).as_deref(), &ml, rng);
    let er = seed_among(graph, right, pool(right_base).as_deref(), &mr, rng);
    let sides = [
        SideSetup::new(graph, left, el, ml, &model.affect, &model.decision, &draws),
        SideSetup::new(graph, right, er, mr, &model.affect, &model.decision, &draws),
    ];
    let outcome = run_engine(graph, &model.decision, &model.transmission, &sides, &draws, rng, max_rounds);
    let adoption: Vec<Option<Side>> =
        outcome.adoption.iter().map(|a| a.map(|(s, _)| if s == 0 { Side::L } else { Side::R })).collect();
    let any: Vec<bool> = adoption.iter().map(Option::is_some).collect();
    Ok(JointCascadeResult {
        polarization: polarization(graph, &any),
        left: side_view(&outcome, &sides[0], 0),
        right: side_view(&outcome, &sides[1], 1),
        adoption,
    })
}

/// Side payoff: weighted cohesion, participation and sway of the side's
/// adopters minus the shared polarization penalty.
pub fn payoff(player: &PlayerConfig, graph: &SocialGraph, joint: &JointCascadeResult, kappa: f64, band: f64) -> f64 {
    let view = joint.side(player.side);
    let active = view.active();
    let w = &player.weights;
    w.cohesion * cohesion(graph, &active)
        + w.participation * participation(&active)
        + w.sway * sway(&active, &view.matching, band)
        - kappa * joint.polarization
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumType {
    PureNash,
    Cycle,
    /// `max_iters` ran out before a fixed point or a repeat.
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    /// Strategy indices `(left, right)` of the final profile.
    pub profile: (usize, usize),
    pub left_design: Design,
    pub right_design: Design,
    #[serde(rename = "type")]
    pub kind: EquilibriumType,
    pub trajectory: Vec<(usize, usize)>,
    /// `payoff_left[i][j]`: expected payoff of L playing `i` against R playing `j`.
    pub payoff_left: Vec<Vec<f64>>,
    pub payoff_right: Vec<Vec<f64>>,
    /// Every pure equilibrium of the matrix, found by exhaustive scan.
    pub pure_equilibria: Vec<(usize, usize)>,
    pub replications: usize,
    pub master_seed: u64,
}

/// Expected payoff matrices over both strategy sets, every cell on the same
/// replication streams.
pub fn payoff_matrices(
    sim: &Simulator,
    left: &PlayerConfig,
    right: &PlayerConfig,
    reps: usize,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let (nl, nr) = (left.strategy_set.len(), right.strategy_set.len());
    let model = sim.model();
    let cells: Vec<(f64, f64)> = (0..nl * nr)
        .into_par_iter()
        .map(|cell| {
            let (i, j) = (cell / nr, cell % nr);
            let per_rep: Vec<(f64, f64)> = (0..reps)
                .into_par_iter()
                .map(|r| {
                    let graph = sim.graph_for(r)?;
                    let mut rng = replication_stream(sim.master_seed(), r);
                    let joint = joint_cascade(
                        &graph,
                        &left.strategy_set[i],
                        &right.strategy_set[j],
                        &left.base_blocks,
                        &right.base_blocks,
                        model,
                        &mut rng,
                        sim.max_rounds(),
                    )?;
                    let (k, band) = (model.impact.kappa, model.impact.undecided_band);
                    Ok((payoff(left, &graph, &joint, k, band), payoff(right, &graph, &joint, k, band)))
                })
                .collect::<Result<_>>()?;
            let l = per_rep.iter().map(|p| p.0).sum::<f64>() / reps as f64;
            let r = per_rep.iter().map(|p| p.1).sum::<f64>() / reps as f64;
            Ok((l, r))
        })
        .collect::<Result<_>>()?;
    let mut pl = vec![vec![0.0; nr]; nl];
    let mut pr = vec![vec![0.0; nr]; nl];
    for (cell, (a, b)) in cells.into_iter().enumerate() {
        pl[cell / nr][cell % nr] = a;
        pr[cell / nr][cell % nr] = b;
    }
    Ok((pl, pr))
}

/// Best reply against a fixed opponent; stays with `current` when it is
/// among the maximizers, otherwise takes the lowest maximizing index.
fn best_reply(payoffs: impl Fn(usize) -> f64, count: usize, current: usize) -> usize {
    let best = (0..count).map(&payoffs).fold(f64::NEG_INFINITY, f64::max);
    if payoffs(current) >= best {
        current
    } else {
        (0..count).find(|&k| payoffs(k) >= best).expect("a maximizer exists")
    }
}

pub fn is_pure_nash(pl: &[Vec<f64>], pr: &[Vec<f64>], i: usize, j: usize) -> bool {
    let left_ok = (0..pl.len()).all(|k| pl[k][j] <= pl[i][j]);
    let right_ok = (0..pr[i].len()).all(|k| pr[i][k] <= pr[i][j]);
    left_ok && right_ok
}

/// Alternating best responses from the profile `(0, 0)`, left moving first.
pub fn best_response_on_matrices(
    pl: &[Vec<f64>],
    pr: &[Vec<f64>],
    max_iters: usize,
) -> Result<(EquilibriumType, (usize, usize), Vec<(usize, usize)>)> {
    if max_iters < 1 {
        return Err(AmaError::InvalidConfig("max_iters must be at least 1".into()));
    }
    let (nl, nr) = (pl.len(), pl[0].len());
    let mut profile = (0, 0);
    let mut trajectory = vec![profile];
    for _ in 0..max_iters {
        if is_pure_nash(pl, pr, profile.0, profile.1) {
            return Ok((EquilibriumType::PureNash, profile, trajectory));
        }
        let i = best_reply(|k| pl[k][profile.1], nl, profile.0);
        let j = best_reply(|k| pr[i][k], nr, profile.1);
        profile = (i, j);
        if trajectory.contains(&profile) && !is_pure_nash(pl, pr, i, j) {
            trajectory.push(profile);
            return Ok((EquilibriumType::Cycle, profile, trajectory));
        }
        trajectory.push(profile);
    }
    if is_pure_nash(pl, pr, profile.0, profile.1) {
        return Ok((EquilibriumType::PureNash, profile, trajectory));
    }
    Ok((EquilibriumType::Unresolved, profile, trajectory))
}

pub fn best_response_dynamics(
    sim: &Simulator,
    left: &PlayerConfig,
    right: &PlayerConfig,
    reps: usize,
    max_iters: usize,
) -> Result<EquilibriumReport> {
    if left.side != Side::L || right.side != Side::R {
        return Err(AmaError::InvalidConfig("players must be (L, R) in that order".into()));
    }
    if reps < 1 {
        return Err(AmaError::InvalidConfig("game needs at least one replication".into()));
    }
    let (pl, pr) = payoff_matrices(sim, left, right, reps)?;
    let (kind, profile, trajectory) = best_response_on_matrices(&pl, &pr, max_iters)?;
    let mut pure_equilibria = Vec::new();
    for i in 0..pl.len() {
        for j in 0..pl[0].len() {
            if is_pure_nash(&pl, &pr, i, j) {
                pure_equilibria.push((i, j));
            }
        }
    }
    Ok(EquilibriumReport {
        profile,
        left_design: left.strategy_set[profile.0].clone(),
        right_design: right.strategy_set[profile.1].clone(),
        kind,
        trajectory,
        payoff_left: pl,
        payoff_right: pr,
        pure_equilibria,
        replications: reps,
        master_seed: sim.master_seed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one_is_nash() {
        let (kind, p, t) = best_response_on_matrices(&[vec![0.3]], &[vec![-1.0]], 5).unwrap();
        assert_eq!(kind, EquilibriumType::PureNash);
        assert_eq!(p, (0, 0));
        assert_eq!(t, vec![(0, 0)]);
    }

    #[test]
    fn strictly_dominant_profile() {
        // prisoner's dilemma: strategy 1 (defect) strictly dominates for both
        let pl = vec![vec![3.0, 0.0], vec![5.0, 1.0]];
        let pr = vec![vec![3.0, 5.0], vec![0.0, 1.0]];
        let (kind, p, t) = best_response_on_matrices(&pl, &pr, 10).unwrap();
        assert_eq!(kind, EquilibriumType::PureNash);
        assert_eq!(p, (1, 1));
        assert_eq!(t, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn matching_pennies_cycles() {
        let pl = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
        let pr = vec![vec![-1.0, 1.0], vec![1.0, -1.0]];
        let (kind, _, t) = best_response_on_matrices(&pl, &pr, 50).unwrap();
        assert_eq!(kind, EquilibriumType::Cycle);
        assert!(t.len() <= 6);
        let (kind, _, _) = best_response_on_matrices(&pl, &pr, 1).unwrap();
        assert_eq!(kind, EquilibriumType::Unresolved);
        assert!(best_response_on_matrices(&pl, &pr, 0).is_err());
    }

    #[test]
    fn coordination_game_keeps_incumbent() {
        let pl = vec![vec![2.0, 0.0], vec![0.0, 2.0]];
        let pr = pl.clone();
        let (kind, p, _) = best_response_on_matrices(&pl, &pr, 10).unwrap();
        assert_eq!((kind, p), (EquilibriumType::PureNash, (0, 0)));
    }
}
