//! Seeding, per-edge transmission and the threshold activation cascade.
//!
//! A replication consumes its random stream in a fixed order, independent of
//! the design being simulated: one standard normal per agent for affect
//! noise, one uniform per agent for the resistance threshold, one standard
//! normal per agent for decision noise, one uniform per directed edge (in
//! adjacency order), then the seeding draws. Designs evaluated on the same
//! stream therefore share every agent- and edge-level draw.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::affect::{matching, AffectParams, Design, Format, Seeding};
use crate::error::{AmaError, Result};
use crate::graph::SocialGraph;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecisionParams {
    pub b0: f64,
    pub b1: f64,
    /// Weight on the count of successfully transmitting neighbors.
    pub b2: f64,
    pub sigma_noise: f64,
    pub tau_lo: f64,
    pub tau_hi: f64,
    /// Multiplier on `b2` for participatory formats with call-and-response.
    pub cnr_boost: f64,
}

impl Default for DecisionParams {
    fn default() -> Self {
        crate::calibration::decision()
    }
}

impl DecisionParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(AmaError::InvalidConfig(format!("decision: {m}")));
        if !(self.tau_lo <= self.tau_hi) {
            return bad("tau_lo must not exceed tau_hi");
        }
        if !(self.sigma_noise >= 0.0) {
            return bad("sigma_noise must be >= 0");
        }
        if !(self.cnr_boost >= 1.0) {
            return bad("cnr_boost must be >= 1");
        }
        Ok(())
    }

    /// Effective social-influence weight for a design.
    pub fn social_weight(&self, design: &Design) -> f64 {
        if design.boosts_social_influence() {
            self.b2 * self.cnr_boost
        } else {
            self.b2
        }
    }

    fn threshold(&self, unit: f64) -> f64 {
        self.tau_lo + (self.tau_hi - self.tau_lo) * unit
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransmissionParams {
    pub l0: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    /// In-group boost per unit of toxicity.
    pub l4_tox: f64,
}

impl Default for TransmissionParams {
    fn default() -> Self {
        crate::calibration::transmission()
    }
}

impl TransmissionParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.l0, self.l1, self.l2, self.l3, self.l4_tox];
        if !all.iter().all(|x| x.is_finite()) {
            return Err(AmaError::InvalidConfig("transmission: coefficients must be finite".into()));
        }
        if self.l4_tox < 0.0 {
            return Err(AmaError::InvalidConfig("transmission: l4_tox must be >= 0".into()));
        }
        Ok(())
    }
}

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Probability that an active sender passes the impulse to a neighbor.
pub fn transmission_prob(
    tp: &TransmissionParams,
    v_a_sender: f64,
    sim_ij: f64,
    same_block: bool,
    design: &Design,
) -> f64 {
    let meme = if design.format == Format::Meme { 1.0 } else { 0.0 };
    let tox = if same_block { design.toxicity } else { 0.0 };
    logistic(tp.l0 + tp.l1 * v_a_sender + tp.l2 * sim_ij + tp.l3 * meme + tp.l4_tox * tox)
}

/// Round-zero decision of an exposed agent: draws its threshold and noise.
pub fn initial_decision<R: Rng + ?Sized>(dp: &DecisionParams, v_a: f64, rng: &mut R) -> bool {
    let tau = dp.threshold(rng.random::<f64>());
    let eta: f64 = rng.sample(StandardNormal);
    dp.b0 + dp.b1 * v_a - tau + dp.sigma_noise * eta > 0.0
}

/// Choose the `round(seed_fraction * n)` exposed agents.
pub fn seed_exposure<R: Rng + ?Sized>(graph: &SocialGraph, design: &Design, rng: &mut R) -> Result<Vec<bool>> {
    design.validate(graph.dim())?;
    let m = matchings(graph, design)?;
    Ok(seed_among(graph, design, None, &m, rng))
}

/// Seeding restricted to `pool` (all agents when `None`); the seed count is
/// taken relative to the pool size.
pub(crate) fn seed_among<R: Rng + ?Sized>(
    graph: &SocialGraph,
    design: &Design,
    pool: Option<&[usize]>,
    matching: &[f64],
    rng: &mut R,
) -> Vec<bool> {
    let n = graph.n();
    let candidates: Vec<usize> = match pool {
        Some(p) => p.to_vec(),
        None => (0..n).collect(),
    };
    let s = design.seed_count(candidates.len());
    let mut exposure = vec![false; n];
    let chosen: Vec<usize> = match design.seeding {
        Seeding::Random => {
            rand::seq::index::sample(rng, candidates.len(), s).into_iter().map(|k| candidates[k]).collect()
        }
        Seeding::TopDegree => {
            let mut c = candidates;
            c.sort_by(|&a, &b| graph.degree(b).cmp(&graph.degree(a)).then(a.cmp(&b)));
            c.truncate(s);
            c
        }
        Seeding::TopMatching => {
            let mut c = candidates;
            c.sort_by(|&a, &b| matching[b].total_cmp(&matching[a]).then(a.cmp(&b)));
            c.truncate(s);
            c
        }
    };
    for i in chosen {
        exposure[i] = true;
    }
    exposure
}

/// Matching of every agent against the design symbols.
pub fn matchings(graph: &SocialGraph, design: &Design) -> Result<Vec<f64>> {
    (0..graph.n()).map(|i| matching(graph.identity(i), design)).collect()
}

/// One attempted transmission along a directed edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeAttempt {
    pub sender: usize,
    pub receiver: usize,
    pub round: u32,
    pub success: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeResult {
    pub exposure: Vec<bool>,
    pub matching: Vec<f64>,
    pub affect: Vec<f64>,
    pub activation_round: Vec<Option<u32>>,
    /// Directed `(sender, receiver)` pairs that transmitted successfully.
    pub fired_edges: Vec<(usize, usize)>,
    pub attempts: Vec<EdgeAttempt>,
    pub rounds_run: u32,
}

impl CascadeResult {
    pub fn is_active(&self, i: usize) -> bool {
        self.activation_round[i].is_some()
    }

    pub fn active(&self) -> Vec<bool> {
        self.activation_round.iter().map(Option::is_some).collect()
    }

    pub fn active_count(&self) -> usize {
        self.activation_round.iter().filter(|r| r.is_some()).count()
    }

    /// Number of distinct neighbors that transmitted successfully to each agent.
    pub fn influence_counts(&self) -> Vec<usize> {
        let mut k = vec![0; self.exposure.len()];
        for &(_, j) in &self.fired_edges {
            k[j] += 1;
        }
        k
    }
}

/// Agent- and edge-level draws shared by every design in a replication.
#[derive(Clone, Debug)]
pub(crate) struct ReplicationDraws {
    pub affect_noise: Vec<f64>,
    pub tau_unit: Vec<f64>,
    pub decision_noise: Vec<f64>,
    /// Offset of agent `i`'s outgoing edges in `edge_uniform`.
    pub edge_offset: Vec<usize>,
    pub edge_uniform: Vec<f64>,
}

impl ReplicationDraws {
    pub fn draw<R: Rng + ?Sized>(graph: &SocialGraph, rng: &mut R) -> Self {
        let n = graph.n();
        let affect_noise = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let tau_unit = (0..n).map(|_| rng.random::<f64>()).collect();
        let decision_noise = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mut edge_offset = Vec::with_capacity(n + 1);
        let mut total = 0;
        for i in 0..n {
            edge_offset.push(total);
            total += graph.degree(i);
        }
        edge_offset.push(total);
        let edge_uniform = (0..total).map(|_| rng.random::<f64>()).collect();
        ReplicationDraws { affect_noise, tau_unit, decision_noise, edge_offset, edge_uniform }
    }

    fn edge_index(&self, graph: &SocialGraph, i: usize, slot: usize) -> usize {
        debug_assert!(slot < graph.degree(i));
        self.edge_offset[i] + slot
    }
}

/// Everything one competing side brings into a cascade.
#[derive(Clone, Debug)]
pub(crate) struct SideSetup<'a> {
    pub design: &'a Design,
    pub exposure: Vec<bool>,
    pub matching: Vec<f64>,
    pub affect: Vec<f64>,
    pub social_weight: f64,
}

impl<'a> SideSetup<'a> {
    pub fn new(
        graph: &SocialGraph,
        design: &'a Design,
        exposure: Vec<bool>,
        matching: Vec<f64>,
        ap: &AffectParams,
        dp: &DecisionParams,
        draws: &ReplicationDraws,
    ) -> Self {
        let affect = (0..graph.n())
            .map(|i| {
                ap.systematic(exposure[i], matching[i], graph.context(i), design.hook)
                    + ap.sigma_u * draws.affect_noise[i]
            })
            .collect();
        SideSetup { design, exposure, matching, affect, social_weight: dp.social_weight(design) }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct EngineOutcome {
    /// `(side, round)` for each adopter.
    pub adoption: Vec<Option<(usize, u32)>>,
    pub fired: Vec<Vec<(usize, usize)>>,
    pub attempts: Vec<Vec<EdgeAttempt>>,
    pub rounds_run: u32,
}

/// Synchronous multi-side cascade; each agent adopts at most one side.
pub(crate) fn run_engine<R: Rng + ?Sized>(
    graph: &SocialGraph,
    dp: &DecisionParams,
    tp: &TransmissionParams,
    sides: &[SideSetup<'_>],
    draws: &ReplicationDraws,
    coin: &mut R,
    max_rounds: u32,
) -> EngineOutcome {
    let n = graph.n();
    let ns = sides.len();
    let tau: Vec<f64> = draws.tau_unit.iter().map(|&u| dp.threshold(u)).collect();
    let xi: Vec<f64> = draws.decision_noise.iter().map(|&z| dp.sigma_noise * z).collect();
    let index = |s: usize, j: usize, k: usize| {
        dp.b0 + dp.b1 * sides[s].affect[j] + sides[s].social_weight * k as f64 - tau[j] + xi[j]
    };
    let pull = |s: usize, j: usize, k: usize| dp.b1 * sides[s].affect[j] + sides[s].social_weight * k as f64;

    let mut adoption: Vec<Option<(usize, u32)>> = vec![None; n];
    let mut counts = vec![vec![0usize; n]; ns];
    let mut fired = vec![Vec::new(); ns];
    let mut attempts = vec![Vec::new(); ns];

    // Resolve candidates against all sides; `k_of(s, j)` gives the influence count.
    let mut decide = |j: usize, counts: &[Vec<usize>], eligible: &dyn Fn(usize) -> bool| -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        let mut tie = false;
        for s in 0..ns {
            if !eligible(s) || index(s, j, counts[s][j]) <= 0.0 {
                continue;
            }
            let p = pull(s, j, counts[s][j]);
            match best {
                None => best = Some((s, p)),
                Some((_, bp)) if p > bp => {
                    best = Some((s, p));
                    tie = false;
                }
                Some((_, bp)) if p == bp => tie = true,
                _ => {}
            }
        }
        let (s, _) = best?;
        if tie {
            // only two sides exist; a fair coin picks between them
            return Some(if coin.random::<bool>() { 0 } else { 1 });
        }
        Some(s)
    };

    let mut newly = Vec::new();
    for j in 0..n {
        if let Some(s) = decide(j, &counts, &|s| sides[s].exposure[j]) {
            adoption[j] = Some((s, 0));
            newly.push(j);
        }
    }
    let mut last_round = 0u32;

    let mut round = 1u32;
    while round <= max_rounds && !newly.is_empty() {
        let mut touched = Vec::new();
        for &i in &newly {
            let (s, _) = adoption[i].expect("senders are active");
            for (slot, &j) in graph.neighbors(i).iter().enumerate() {
                if adoption[j].is_some() {
                    continue;
                }
                let p = transmission_prob(
                    tp,
                    sides[s].affect[i],
                    graph.similarity(i, j),
                    graph.block(i) == graph.block(j),
                    sides[s].design,
                );
                let success = draws.edge_uniform[draws.edge_index(graph, i, slot)] < p;
                attempts[s].push(EdgeAttempt { sender: i, receiver: j, round, success });
                if success {
                    fired[s].push((i, j));
                    counts[s][j] += 1;
                    touched.push(j);
                }
            }
        }
        touched.sort_unstable();
        touched.dedup();
        newly.clear();
        for j in touched {
            if let Some(s) = decide(j, &counts, &|s| sides[s].exposure[j] || counts[s][j] > 0) {
                adoption[j] = Some((s, round));
                newly.push(j);
            }
        }
        if !newly.is_empty() {
            last_round = round;
        }
        round += 1;
    }

    EngineOutcome { adoption, fired, attempts, rounds_run: last_round + 1 }
}

pub(crate) fn side_view(outcome: &EngineOutcome, side: &SideSetup<'_>, s: usize) -> CascadeResult {
    CascadeResult {
        exposure: side.exposure.clone(),
        matching: side.matching.clone(),
        affect: side.affect.clone(),
        activation_round: outcome.adoption.iter().map(|a| a.and_then(|(side, r)| (side == s).then_some(r))).collect(),
        fired_edges: outcome.fired[s].clone(),
        attempts: outcome.attempts[s].clone(),
        rounds_run: outcome.rounds_run,
    }
}

/// Simulate one replication of the single-design cascade.
pub fn run_cascade<R: Rng + ?Sized>(
    graph: &SocialGraph,
    dp: &DecisionParams,
    tp: &TransmissionParams,
    design: &Design,
    ap: &AffectParams,
    rng: &mut R,
    max_rounds: u32,
) -> Result<CascadeResult> {
    if max_rounds < 1 {
        return Err(AmaError::InvalidConfig("max_rounds must be at least 1".into()));
    }
    design.validate(graph.dim())?;
    let draws = ReplicationDraws::draw(graph, rng);
    let m = matchings(graph, design)?;
    let exposure = seed_among(graph, design, None, &m, rng);
    let side = SideSetup::new(graph, design, exposure, m, ap, dp, &draws);
    let sides = [side];
    let outcome = run_engine(graph, dp, tp, &sides, &draws, rng, max_rounds);
    Ok(side_view(&outcome, &sides[0], 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affect::test_design;
    use crate::graph::test_graphs::plain;
    use crate::rng::derive_stream;

    pub(crate) fn flat_affect() -> AffectParams {
        AffectParams { a0: 0.0, a1: 0.0, a2: 0.0, a3: 0.0, a4: 0.0, a5: 0.0, sigma_u: 0.0 }
    }

    fn dp(b0: f64, b2: f64) -> DecisionParams {
        DecisionParams { b0, b1: 0.0, b2, sigma_noise: 0.0, tau_lo: 0.0, tau_hi: 0.0, cnr_boost: 1.0 }
    }

    fn tp(l0: f64) -> TransmissionParams {
        TransmissionParams { l0, l1: 0.0, l2: 0.0, l3: 0.0, l4_tox: 0.0 }
    }

    fn path3() -> SocialGraph {
        plain(3, 1, vec![0; 3], &[(0, 1), (1, 2)])
    }

    fn seeded(format: Format, fraction: f64, seeding: Seeding) -> Design {
        Design { seed_fraction: fraction, seeding, ..test_design(format) }
    }

    #[test]
    fn transmission_examples() {
        let d = test_design(Format::Mural);
        assert_eq!(transmission_prob(&tp(0.0), 0.3, 0.7, true, &d), 0.5);
        assert!((transmission_prob(&tp(1.0), 0.0, 0.0, false, &d) - 0.731_058_578_630_004_9).abs() < 1e-12);
        let t = TransmissionParams { l3: 2.0, ..tp(0.0) };
        let meme = transmission_prob(&t, 0.0, 0.0, false, &test_design(Format::Meme));
        assert!((meme - 0.880_797_077_977_882_4).abs() < 1e-12);
        assert_eq!(transmission_prob(&t, 0.0, 0.0, false, &d), 0.5);
    }

    #[test]
    fn transmission_monotone_on_grid() {
        let t = TransmissionParams { l0: -1.0, l1: 0.7, l2: 1.3, l3: 2.0, l4_tox: 1.0 };
        let meme = test_design(Format::Meme);
        let song = test_design(Format::Song);
        for a in 0..20 {
            let v = -2.0 + 0.2 * a as f64;
            for b in 0..20 {
                let s = b as f64 / 20.0;
                let p = transmission_prob(&t, v, s, false, &song);
                assert!(transmission_prob(&t, v + 0.1, s, false, &song) > p);
                assert!(transmission_prob(&t, v, s + 0.05, false, &song) > p);
                assert!(transmission_prob(&t, v, s, false, &meme) > p);
            }
        }
    }

    #[test]
    fn initial_decision_examples() {
        let mut rng = derive_stream(0, &[]);
        assert!(initial_decision(&dp(1.0, 0.0), 0.0, &mut rng));
        assert!(!initial_decision(&dp(-1.0, 0.0), 0.0, &mut rng));
        let noisy = DecisionParams { sigma_noise: 1.0, ..dp(0.0, 0.0) };
        let draws = 100_000;
        let hits = (0..draws).filter(|_| initial_decision(&noisy, 0.0, &mut rng)).count();
        assert!((hits as f64 / draws as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn seeding_examples() {
        let star = plain(5, 1, vec![0; 5], &[(0, 3), (1, 3), (2, 3), (4, 3)]);
        let mut rng = derive_stream(0, &[]);
        let e = seed_exposure(&star, &seeded(Format::Meme, 0.0, Seeding::Random), &mut rng).unwrap();
        assert!(e.iter().all(|x| !x));
        let e = seed_exposure(&star, &seeded(Format::Meme, 1.0, Seeding::Random), &mut rng).unwrap();
        assert!(e.iter().all(|x| *x));
        let e = seed_exposure(&star, &seeded(Format::Meme, 0.2, Seeding::TopDegree), &mut rng).unwrap();
        assert_eq!(e, vec![false, false, false, true, false]);
    }

    #[test]
    fn top_matching_breaks_ties_by_id() {
        let g =
            SocialGraph::from_parts(1, vec![0; 4], vec![vec![0.5], vec![0.9], vec![0.9], vec![0.1]], vec![0.5; 4], [])
                .unwrap();
        let d = Design { symbols: vec![1.0], ..seeded(Format::Song, 0.5, Seeding::TopMatching) };
        let e = seed_exposure(&g, &d, &mut derive_stream(0, &[])).unwrap();
        assert_eq!(e, vec![false, true, true, false]);
        let d = Design { seed_fraction: 0.25, ..d };
        let e = seed_exposure(&g, &d, &mut derive_stream(0, &[])).unwrap();
        assert_eq!(e, vec![false, true, false, false]);
    }

    #[test]
    fn empty_seed_set() {
        let r = run_cascade(
            &path3(),
            &dp(1.0, 0.0),
            &tp(0.0),
            &seeded(Format::Meme, 0.0, Seeding::Random),
            &flat_affect(),
            &mut derive_stream(0, &[]),
            10,
        )
        .unwrap();
        assert_eq!(r.active_count(), 0);
        assert_eq!(r.rounds_run, 1);
    }

    #[test]
    fn deterministic_flood_on_path() {
        // top_degree with one seed picks the middle node, so seed node 0 via matching instead
        let g = SocialGraph::from_parts(
            1,
            vec![0; 3],
            vec![vec![0.0], vec![0.5], vec![1.0]],
            vec![0.5; 3],
            [(0, 1), (1, 2)],
        )
        .unwrap();
        let d = Design { symbols: vec![0.0], ..seeded(Format::Meme, 1.0 / 3.0, Seeding::TopMatching) };
        let r = run_cascade(&g, &dp(1e9, 0.0), &tp(1e9), &d, &flat_affect(), &mut derive_stream(0, &[]), 10).unwrap();
        assert_eq!(r.activation_round, vec![Some(0), Some(1), Some(2)]);
        assert_eq!(r.fired_edges, vec![(0, 1), (1, 2)]);
        assert_eq!(r.rounds_run, 3);
        assert!(r.exposure[0] && !r.exposure[1]);
    }

    #[test]
    fn max_rounds_truncates() {
        let g = SocialGraph::from_parts(
            1,
            vec![0; 3],
            vec![vec![0.0], vec![0.5], vec![1.0]],
            vec![0.5; 3],
            [(0, 1), (1, 2)],
        )
        .unwrap();
        let d = Design { symbols: vec![0.0], ..seeded(Format::Meme, 1.0 / 3.0, Seeding::TopMatching) };
        let r = run_cascade(&g, &dp(1e9, 0.0), &tp(1e9), &d, &flat_affect(), &mut derive_stream(0, &[]), 1).unwrap();
        assert_eq!(r.activation_round, vec![Some(0), Some(1), None]);
        assert!(run_cascade(&g, &dp(1.0, 0.0), &tp(0.0), &d, &flat_affect(), &mut derive_stream(0, &[]), 0).is_err());
    }

    #[test]
    fn unexposed_agents_need_a_transmission() {
        // b0 > 0 would activate anyone, but only the exposed and the reached are eligible
        let g = plain(4, 1, vec![0; 4], &[(0, 1), (2, 3)]);
        let d = Design { seeding: Seeding::TopDegree, ..seeded(Format::Meme, 0.25, Seeding::TopDegree) };
        let r = run_cascade(&g, &dp(1.0, 0.0), &tp(-1e9), &d, &flat_affect(), &mut derive_stream(0, &[]), 5).unwrap();
        assert_eq!(r.active_count(), 1);
        assert_eq!(r.attempts.len(), 1);
        assert!(!r.attempts[0].success);
    }

    #[test]
    fn social_threshold_counts_distinct_senders() {
        // node 2 needs two fired neighbors: b0 = -1.5, b2 = 1
        let g = SocialGraph::from_parts(
            1,
            vec![0; 3],
            vec![vec![0.0], vec![0.0], vec![1.0]],
            vec![0.5; 3],
            [(0, 2), (1, 2)],
        )
        .unwrap();
        let d = Design { symbols: vec![0.0], ..seeded(Format::Meme, 2.0 / 3.0, Seeding::TopMatching) };
        let mut p = dp(-1.5, 1.0);
        // seeds clear the bar through their own affect
        p.b1 = 1.0;
        let ap = AffectParams { a1: 2.0, ..flat_affect() };
        let r = run_cascade(&g, &p, &tp(1e9), &d, &ap, &mut derive_stream(0, &[]), 5).unwrap();
        assert_eq!(r.activation_round, vec![Some(0), Some(0), Some(1)]);
        assert_eq!(r.influence_counts(), vec![0, 0, 2]);

        let single = Design { seed_fraction: 1.0 / 3.0, ..d };
        let r = run_cascade(&g, &p, &tp(1e9), &single, &ap, &mut derive_stream(0, &[]), 5).unwrap();
        assert_eq!(r.activation_round, vec![Some(0), None, None]);
    }

    #[test]
    fn call_and_response_boost_only_for_participatory() {
        let p = DecisionParams { cnr_boost: 3.0, ..dp(0.0, 0.5) };
        let mut d = test_design(Format::Meme);
        d.call_and_response = true;
        assert_eq!(p.social_weight(&d), 0.5);
        d.format = Format::Theatre;
        assert_eq!(p.social_weight(&d), 1.5);
        d.call_and_response = false;
        assert_eq!(p.social_weight(&d), 0.5);
    }

    #[test]
    fn invariants_on_random_cascades() {
        let cfg = crate::graph::GraphConfig {
            n: 60,
            blocks: 3,
            p_in: 0.2,
            p_out: 0.02,
            dim: 1,
            identity_spread: 0.1,
            context: crate::graph::ContextPreset::Community,
        };
        let p =
            DecisionParams { b0: -1.0, b1: 1.0, b2: 0.8, sigma_noise: 0.3, tau_lo: 0.0, tau_hi: 1.0, cnr_boost: 2.0 };
        let t = TransmissionParams { l0: -1.0, l1: 0.5, l2: 1.0, l3: 1.0, l4_tox: 0.5 };
        let ap = AffectParams { a0: 0.0, a1: 1.0, a2: 1.0, a3: 0.5, a4: 0.5, a5: 0.5, sigma_u: 0.3 };
        for seed in 0..50u64 {
            let mut rng = derive_stream(seed, &[]);
            let g = crate::graph::generate_sbm(&cfg, &mut rng).unwrap();
            let d = Design { call_and_response: true, toxicity: 0.5, ..seeded(Format::Song, 0.1, Seeding::Random) };
            let r = run_cascade(&g, &p, &t, &d, &ap, &mut rng, 100).unwrap();
            assert!(r.rounds_run as usize <= g.n());
            for &(i, j) in &r.fired_edges {
                assert!(g.has_edge(i, j));
                let sent = r.activation_round[i].expect("senders are active");
                if let Some(got) = r.activation_round[j] {
                    assert!(sent < got);
                }
            }
            let mut seen = std::collections::HashSet::new();
            for a in &r.attempts {
                assert!(seen.insert((a.sender, a.receiver)), "edge attempted twice");
                assert_eq!(r.activation_round[a.sender], Some(a.round - 1));
            }
            for i in 0..g.n() {
                if r.activation_round[i] == Some(0) {
                    assert!(r.exposure[i]);
                }
            }
        }
    }

    #[test]
    fn noiseless_cascade_is_deterministic_given_seeds() {
        let g = plain(5, 1, vec![0; 5], &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]);
        let d = seeded(Format::Meme, 0.4, Seeding::TopDegree);
        let a = run_cascade(&g, &dp(0.5, 0.0), &tp(1e9), &d, &flat_affect(), &mut derive_stream(1, &[]), 9).unwrap();
        let b = run_cascade(&g, &dp(0.5, 0.0), &tp(1e9), &d, &flat_affect(), &mut derive_stream(2, &[]), 9).unwrap();
        assert_eq!(a.activation_round, b.activation_round);
    }
}
