// Exact activation probabilities of tiny cascades by brute force.
//
// Decisions are made deterministic (no affect noise, no decision noise, a
// point threshold), so the only randomness left is the seed set and the
// per-edge transmission coins. Every assignment of success/failure to the
// directed edges is enumerated and replayed with the synchronous-round
// semantics; attempts that never happen simply leave their coin unused.

#![allow(dead_code)]

use ama_core::{AffectParams, DecisionParams, Design, Format, Seeding, SocialGraph, TransmissionParams};

pub struct Case {
    pub name: &'static str,
    pub graph: SocialGraph,
}

fn graph(name: &'static str, n: usize, blocks: Vec<usize>, ids: &[f64], ctx: &[f64], edges: &[(usize, usize)]) -> Case {
    let k = blocks.iter().max().unwrap() + 1;
    let g =
        SocialGraph::from_parts(k, blocks, ids.iter().map(|z| vec![*z]).collect(), ctx.to_vec(), edges.iter().copied())
            .unwrap();
    assert_eq!(g.n(), n);
    Case { name, graph: g }
}

/// Every connectivity pattern the suite checks, up to four agents.
pub fn corpus() -> Vec<Case> {
    vec![
        graph("single", 1, vec![0], &[0.4], &[0.8], &[]),
        graph("edge", 2, vec![0, 1], &[0.1, 0.9], &[0.8, 0.2], &[(0, 1)]),
        graph("two_isolated", 2, vec![0, 0], &[0.3, 0.5], &[0.5, 0.5], &[]),
        graph("path3", 3, vec![0, 0, 1], &[0.2, 0.3, 0.8], &[0.9, 0.6, 0.3], &[(0, 1), (1, 2)]),
        graph("triangle", 3, vec![0, 0, 0], &[0.5, 0.6, 0.4], &[0.7, 0.7, 0.2], &[(0, 1), (1, 2), (0, 2)]),
        graph("path4", 4, vec![0, 0, 1, 1], &[0.1, 0.2, 0.7, 0.9], &[0.5, 0.9, 0.1, 0.6], &[(0, 1), (1, 2), (2, 3)]),
        graph("star4", 4, vec![0, 0, 1, 1], &[0.5, 0.1, 0.6, 0.9], &[1.0, 0.3, 0.5, 0.0], &[(0, 1), (0, 2), (0, 3)]),
        graph(
            "cycle4",
            4,
            vec![0, 1, 0, 1],
            &[0.2, 0.8, 0.3, 0.7],
            &[0.4, 0.6, 0.8, 0.2],
            &[(0, 1), (1, 2), (2, 3), (0, 3)],
        ),
        graph(
            "paw",
            4,
            vec![0, 0, 0, 1],
            &[0.4, 0.5, 0.6, 0.9],
            &[0.6, 0.6, 0.6, 0.6],
            &[(0, 1), (1, 2), (0, 2), (2, 3)],
        ),
        graph(
            "diamond",
            4,
            vec![0, 0, 1, 1],
            &[0.3, 0.4, 0.6, 0.7],
            &[0.2, 0.9, 0.4, 0.7],
            &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)],
        ),
        graph(
            "k4",
            4,
            vec![0, 1, 0, 1],
            &[0.0, 1.0, 0.25, 0.75],
            &[0.5, 0.5, 1.0, 0.0],
            &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        ),
        graph("two_edges", 4, vec![0, 0, 1, 1], &[0.2, 0.2, 0.8, 0.8], &[0.3, 0.9, 0.3, 0.9], &[(0, 1), (2, 3)]),
    ]
}

pub fn affect() -> AffectParams {
    AffectParams { a0: -0.2, a1: 0.6, a2: 0.8, a3: 0.5, a4: 0.3, a5: -0.4, sigma_u: 0.0 }
}

pub fn decision() -> DecisionParams {
    DecisionParams { b0: -0.9, b1: 0.7, b2: 0.45, sigma_noise: 0.0, tau_lo: 0.25, tau_hi: 0.25, cnr_boost: 2.0 }
}

pub fn transmission() -> TransmissionParams {
    TransmissionParams { l0: -0.6, l1: 0.5, l2: 0.7, l3: 0.8, l4_tox: 1.2 }
}

/// The two arms checked on every graph: a toxic random-seeded meme and a
/// top-degree theatre piece with call-and-response.
pub fn designs(n: usize) -> Vec<Design> {
    let one = if n == 1 { 1.0 } else { 1.0 / n as f64 };
    vec![
        Design {
            format: Format::Meme,
            symbols: vec![0.35],
            hook: 0.4,
            call_and_response: false,
            toxicity: 0.5,
            seed_fraction: one,
            seeding: Seeding::Random,
        },
        Design {
            format: Format::Theatre,
            symbols: vec![0.6],
            hook: 0.8,
            call_and_response: true,
            toxicity: 0.0,
            seed_fraction: one,
            seeding: Seeding::TopDegree,
        },
    ]
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn affect_of(a: &AffectParams, exposed: bool, m: f64, c: f64, hook: f64) -> f64 {
    let e = if exposed { 1.0 } else { 0.0 };
    a.a0 + a.a1 * (1.0 + hook) * e + a.a2 * m + a.a3 * c + a.a4 * e * m + a.a5 * e * c
}

/// Seed sets the design can produce, each with its probability.
fn seed_sets(g: &SocialGraph, d: &Design) -> Vec<(Vec<bool>, f64)> {
    let n = g.n();
    let s = (d.seed_fraction * n as f64).round() as usize;
    match d.seeding {
        Seeding::Random => {
            let subsets: Vec<Vec<bool>> = (0u32..1 << n)
                .filter(|m| m.count_ones() as usize == s)
                .map(|m| (0..n).map(|i| m >> i & 1 == 1).collect())
                .collect();
            let w = 1.0 / subsets.len() as f64;
            subsets.into_iter().map(|x| (x, w)).collect()
        }
        Seeding::TopDegree => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&i| (std::cmp::Reverse(g.degree(i)), i));
            let mut x = vec![false; n];
            for &i in &order[..s] {
                x[i] = true;
            }
            vec![(x, 1.0)]
        }
        Seeding::TopMatching => unimplemented!("not used by the corpus"),
    }
}

/// Exact activation probability of every agent.
pub fn exact_activation(
    g: &SocialGraph,
    d: &Design,
    a: &AffectParams,
    dp: &DecisionParams,
    tp: &TransmissionParams,
) -> Vec<f64> {
    let n = g.n();
    let arcs: Vec<(usize, usize)> = g.edges().iter().flat_map(|&(u, v)| [(u, v), (v, u)]).collect();
    let social = if d.format != Format::Meme && d.call_and_response { dp.b2 * dp.cnr_boost } else { dp.b2 };
    let tau = dp.tau_lo;
    let mut prob = vec![0.0; n];
    for (exposed, w_seed) in seed_sets(g, d) {
        let v: Vec<f64> = (0..n)
            .map(|i| {
                let m = (1.0 - (g.identity(i)[0] - d.symbols[0]).abs()).clamp(0.0, 1.0);
                affect_of(a, exposed[i], m, g.context(i), d.hook)
            })
            .collect();
        let p_arc: Vec<f64> = arcs
            .iter()
            .map(|&(i, j)| {
                let sim = (1.0 - (g.identity(i)[0] - g.identity(j)[0]).abs()).clamp(0.0, 1.0);
                let meme = if d.format == Format::Meme { 1.0 } else { 0.0 };
                let tox = if g.block(i) == g.block(j) { d.toxicity } else { 0.0 };
                sigmoid(tp.l0 + tp.l1 * v[i] + tp.l2 * sim + tp.l3 * meme + tp.l4_tox * tox)
            })
            .collect();
        let passes = |i: usize, k: usize| dp.b0 + dp.b1 * v[i] + social * k as f64 - tau > 0.0;
        for coins in 0u32..1 << arcs.len() {
            let mut w = w_seed;
            for (e, p) in p_arc.iter().enumerate() {
                w *= if coins >> e & 1 == 1 { *p } else { 1.0 - *p };
            }
            if w == 0.0 {
                continue;
            }
            let mut active: Vec<bool> = (0..n).map(|i| exposed[i] && passes(i, 0)).collect();
            let mut newly: Vec<usize> = (0..n).filter(|&i| active[i]).collect();
            let mut k = vec![0usize; n];
            while !newly.is_empty() {
                let mut touched = vec![false; n];
                for &i in &newly {
                    for (e, &(s, r)) in arcs.iter().enumerate() {
                        if s == i && !active[r] && coins >> e & 1 == 1 {
                            k[r] += 1;
                            touched[r] = true;
                        }
                    }
                }
                newly = (0..n).filter(|&j| touched[j] && passes(j, k[j])).collect();
                for &j in &newly {
                    active[j] = true;
                }
            }
            for i in 0..n {
                if active[i] {
                    prob[i] += w;
                }
            }
        }
    }
    prob
}
