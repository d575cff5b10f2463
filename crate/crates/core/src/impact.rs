//! Aggregate political impact of a cascade and its four components.

use serde::{Deserialize, Serialize};

use crate::diffusion::CascadeResult;
use crate::error::{AmaError, Result};
use crate::graph::SocialGraph;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImpactWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub kappa: f64,
    /// Agents with `|m_i - 0.5| <= undecided_band` count as undecided.
    pub undecided_band: f64,
}

impl Default for ImpactWeights {
    fn default() -> Self {
        crate::calibration::weights()
    }
}

impl ImpactWeights {
    pub fn validate(&self) -> Result<()> {
        if [self.w1, self.w2, self.w3, self.kappa].iter().any(|w| !(*w >= 0.0)) {
            return Err(AmaError::InvalidConfig("impact: weights and kappa must be >= 0".into()));
        }
        if !(self.undecided_band > 0.0 && self.undecided_band < 0.5) {
            return Err(AmaError::InvalidConfig("impact: undecided_band must lie in (0, 0.5)".into()));
        }
        Ok(())
    }

    pub fn combine(&self, participation: f64, cohesion: f64, sway: f64, polarization: f64) -> f64 {
        self.w1 * participation + self.w2 * cohesion + self.w3 * sway - self.kappa * polarization
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpactReport {
    pub participation: f64,
    pub cohesion: f64,
    pub sway: f64,
    pub polarization: f64,
    pub i_p: f64,
}

pub fn participation(active: &[bool]) -> f64 {
    if active.is_empty() {
        return 0.0;
    }
    active.iter().filter(|a| **a).count() as f64 / active.len() as f64
}

/// Edge density of the subgraph induced by the active agents.
pub fn cohesion(graph: &SocialGraph, active: &[bool]) -> f64 {
    let k = active.iter().filter(|a| **a).count();
    if k < 2 {
        return 0.0;
    }
    let induced = graph.edges().iter().filter(|&&(a, b)| active[a] && active[b]).count();
    2.0 * induced as f64 / (k * (k - 1)) as f64
}

pub fn is_undecided(m: f64, band: f64) -> bool {
    (m - 0.5).abs() <= band
}

/// Share of undecided agents that activated; 0 when nobody is undecided.
pub fn sway(active: &[bool], matchings: &[f64], band: f64) -> f64 {
    let mut undecided = 0usize;
    let mut swayed = 0usize;
    for (a, &m) in active.iter().zip(matchings) {
        if is_undecided(m, band) {
            undecided += 1;
            swayed += usize::from(*a);
        }
    }
    if undecided == 0 {
        0.0
    } else {
        swayed as f64 / undecided as f64
    }
}

/// Activation rate of each block (0 for empty blocks).
pub fn block_rates(graph: &SocialGraph, active: &[bool]) -> Vec<f64> {
    let sizes = graph.block_sizes();
    let mut hits = vec![0usize; graph.blocks()];
    for (i, a) in active.iter().enumerate() {
        if *a {
            hits[graph.block(i)] += 1;
        }
    }
    hits.iter().zip(&sizes).map(|(&h, &s)| if s == 0 { 0.0 } else { h as f64 / s as f64 }).collect()
}

/// Range of block activation rates over non-empty blocks.
pub fn polarization(graph: &SocialGraph, active: &[bool]) -> f64 {
    let sizes = graph.block_sizes();
    let rates: Vec<f64> =
        block_rates(graph, active).into_iter().zip(&sizes).filter(|(_, &s)| s > 0).map(|(r, _)| r).collect();
    if rates.len() < 2 {
        return 0.0;
    }
    let max = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

pub fn impact(weights: &ImpactWeights, graph: &SocialGraph, result: &CascadeResult, matchings: &[f64]) -> ImpactReport {
    impact_of(weights, graph, &result.active(), matchings)
}

pub fn impact_of(weights: &ImpactWeights, graph: &SocialGraph, active: &[bool], matchings: &[f64]) -> ImpactReport {
    let participation = participation(active);
    let cohesion = cohesion(graph, active);
    let sway = sway(active, matchings, weights.undecided_band);
    let polarization = polarization(graph, active);
    ImpactReport {
        participation,
        cohesion,
        sway,
        polarization,
        i_p: weights.combine(participation, cohesion, sway, polarization),
    }
}

/// Within-home-block and cross-block reach of a seeded cascade.
///
/// An agent is reached when it was exposed, is active, or received at least
/// one successful transmission. Reach counts reached agents; sway counts
/// active undecided agents. The home block is the block holding the most
/// exposed agents (lowest id on ties).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReachProfile {
    pub home_block: usize,
    pub within_block_reach: f64,
    pub cross_block_reach: f64,
    pub cross_block_sway: f64,
}

pub fn home_block(graph: &SocialGraph, exposure: &[bool]) -> usize {
    let mut seeds = vec![0usize; graph.blocks()];
    for (i, e) in exposure.iter().enumerate() {
        if *e {
            seeds[graph.block(i)] += 1;
        }
    }
    let mut best = 0;
    for b in 1..seeds.len() {
        if seeds[b] > seeds[best] {
            best = b;
        }
    }
    best
}

pub fn reached(result: &CascadeResult) -> Vec<bool> {
    let mut r: Vec<bool> = (0..result.exposure.len()).map(|i| result.exposure[i] || result.is_active(i)).collect();
    for &(_, j) in &result.fired_edges {
        r[j] = true;
    }
    r
}

pub fn reach_profile(graph: &SocialGraph, result: &CascadeResult, band: f64) -> ReachProfile {
    let home = home_block(graph, &result.exposure);
    let hit = reached(result);
    let (mut in_n, mut in_r, mut out_n, mut out_r, mut und_n, mut und_a) = (0, 0, 0, 0, 0, 0);
    for i in 0..graph.n() {
        let r = usize::from(hit[i]);
        if graph.block(i) == home {
            in_n += 1;
            in_r += r;
        } else {
            out_n += 1;
            out_r += r;
            if is_undecided(result.matching[i], band) {
                und_n += 1;
                und_a += usize::from(result.is_active(i));
            }
        }
    }
    let ratio = |a: usize, n: usize| if n == 0 { 0.0 } else { a as f64 / n as f64 };
    ReachProfile {
        home_block: home,
        within_block_reach: ratio(in_r, in_n),
        cross_block_reach: ratio(out_r, out_n),
        cross_block_sway: ratio(und_a, und_n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_graphs::{plain, two_triangles};
    use proptest::prelude::*;

    fn w(w1: f64, w2: f64, w3: f64, kappa: f64) -> ImpactWeights {
        ImpactWeights { w1, w2, w3, kappa, undecided_band: 0.1 }
    }

    fn flags(bits: &[u8]) -> Vec<bool> {
        bits.iter().map(|&b| b == 1).collect()
    }

    #[test]
    fn participation_examples() {
        assert_eq!(participation(&flags(&[0, 0, 0])), 0.0);
        assert_eq!(participation(&flags(&[1, 1])), 1.0);
        assert_eq!(participation(&flags(&[1, 1, 0, 1])), 0.75);
    }

    #[test]
    fn cohesion_examples() {
        let g = two_triangles();
        assert_eq!(cohesion(&g, &flags(&[1, 1, 1, 0, 0, 0])), 1.0);
        assert_eq!(cohesion(&g, &flags(&[0, 0, 0, 0, 0, 0])), 0.0);
        assert_eq!(cohesion(&g, &flags(&[1, 0, 0, 0, 0, 0])), 0.0);
        // {0,1,3,4}: induced edges (0,1) and (3,4)
        let c = cohesion(&g, &flags(&[1, 1, 0, 1, 1, 0]));
        assert!((c - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn sway_examples() {
        let a = flags(&[1, 0, 1]);
        assert_eq!(sway(&a, &[0.9, 0.1, 1.0], 0.1), 0.0);
        assert_eq!(sway(&flags(&[1, 1, 0]), &[0.5, 0.55, 0.9], 0.1), 1.0);
        assert_eq!(sway(&flags(&[1, 0, 0]), &[0.5, 0.45, 0.9], 0.1), 0.5);
    }

    #[test]
    fn polarization_examples() {
        let g = two_triangles();
        assert_eq!(polarization(&g, &flags(&[1, 0, 0, 1, 0, 0])), 0.0);
        assert_eq!(polarization(&g, &flags(&[1, 1, 1, 0, 0, 0])), 1.0);
        let g3 = plain(30, 3, (0..30).map(|i| i / 10).collect(), &[]);
        let mut a = vec![false; 30];
        for i in 0..5 {
            a[i] = true;
        }
        for i in 10..12 {
            a[i] = true;
        }
        for i in 20..23 {
            a[i] = true;
        }
        assert!((polarization(&g3, &a) - 0.3).abs() < 1e-15);
        let one = plain(3, 1, vec![0; 3], &[]);
        assert_eq!(polarization(&one, &flags(&[1, 0, 0])), 0.0);
    }

    #[test]
    fn impact_examples() {
        let g = two_triangles();
        let m = vec![0.5; 6];
        let a = flags(&[1, 1, 0, 1, 0, 0]);
        let r = impact_of(&w(1.0, 0.0, 0.0, 0.0), &g, &a, &m);
        assert_eq!(r.i_p, r.participation);
        let r = impact_of(&w(1.0, 2.0, 3.0, 4.0), &g, &[false; 6], &m);
        assert_eq!(r.i_p, 0.0);
    }

    #[test]
    fn impact_matches_hand_recomputation() {
        // two triangles, active {0,1,2,3}; matchings put agents 0 and 3 in the band
        let g = two_triangles();
        let m = [0.55, 0.9, 0.1, 0.45, 0.5, 0.8];
        let a = flags(&[1, 1, 1, 1, 0, 0]);
        let weights = ImpactWeights { w1: 0.5, w2: 1.5, w3: 2.0, kappa: 0.7, undecided_band: 0.1 };
        // participation 4/6; induced edges 3 of 6 pairs; undecided {0,3,4}, active {0,3};
        // block rates 1 and 1/3
        let expect = 0.5 * (4.0 / 6.0) + 1.5 * 0.5 + 2.0 * (2.0 / 3.0) - 0.7 * (2.0 / 3.0);
        let r = impact_of(&weights, &g, &a, &m);
        assert!((r.i_p - expect).abs() < 1e-12);
        assert!((r.cohesion - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reach_profile_of_seeded_block() {
        let g = two_triangles();
        // 3 seeds, fires to 4 (which stays inactive) and 5; 0 is active on its own.
        let result = CascadeResult {
            exposure: flags(&[0, 0, 0, 1, 0, 0]),
            matching: vec![0.5, 0.9, 0.5, 0.5, 0.5, 0.5],
            affect: vec![0.0; 6],
            activation_round: vec![Some(1), None, None, Some(0), None, Some(1)],
            fired_edges: vec![(3, 4), (3, 5)],
            attempts: vec![],
            rounds_run: 2,
        };
        let r = reach_profile(&g, &result, 0.1);
        assert_eq!(r.home_block, 1);
        assert_eq!(r.within_block_reach, 1.0);
        assert!((r.cross_block_reach - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.cross_block_sway, 0.5);
        assert_eq!(reached(&result), flags(&[1, 0, 0, 1, 1, 1]));
    }

    proptest! {
        #[test]
        fn components_bounded(bits in proptest::collection::vec(any::<bool>(), 6),
                              m in proptest::collection::vec(0.0f64..=1.0, 6),
                              w1 in 0.0f64..3.0, w2 in 0.0f64..3.0, w3 in 0.0f64..3.0, kappa in 0.0f64..3.0) {
            let g = two_triangles();
            let weights = ImpactWeights { w1, w2, w3, kappa, undecided_band: 0.2 };
            let r = impact_of(&weights, &g, &bits, &m);
            for c in [r.participation, r.cohesion, r.sway, r.polarization] {
                prop_assert!((0.0..=1.0).contains(&c));
            }
            prop_assert!(r.i_p >= -kappa - 1e-12 && r.i_p <= w1 + w2 + w3 + 1e-12);
            let full = bits.iter().filter(|b| **b).count();
            let complete = full >= 2 && bits.iter().enumerate().all(|(i, a)| !a || bits.iter().enumerate()
                .all(|(j, b)| !b || i == j || g.has_edge(i, j)));
            prop_assert_eq!(r.cohesion == 1.0, complete);
        }

        #[test]
        fn impact_strictly_decreasing_in_polarization(p in 0.0f64..1.0, dp in 0.01f64..0.5, kappa in 0.01f64..2.0) {
            let weights = ImpactWeights { w1: 1.0, w2: 1.0, w3: 1.0, kappa, undecided_band: 0.2 };
            prop_assert!(weights.combine(0.3, 0.4, 0.5, p + dp) < weights.combine(0.3, 0.4, 0.5, p));
        }
    }
}
