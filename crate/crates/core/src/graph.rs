//! Homophilous social graphs: stochastic block model generation, identity
//! similarity, and structural summaries.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AmaError, Result};
use crate::export::fmt_f64;

/// Per-agent organizational density preset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextPreset {
    /// `c_i ~ U[0.7, 1.0]`
    Community,
    /// `c_i ~ U[0.0, 0.3]`
    Fragmented,
    /// `c_i ~ U[mean - spread, mean + spread]`, clamped to the unit interval.
    Custom { mean: f64, spread: f64 },
}

impl ContextPreset {
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            ContextPreset::Community => (0.7, 1.0),
            ContextPreset::Fragmented => (0.0, 0.3),
            ContextPreset::Custom { mean, spread } => ((mean - spread).max(0.0), (mean + spread).min(1.0)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub n: usize,
    pub blocks: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub dim: usize,
    pub identity_spread: f64,
    pub context: ContextPreset,
}

impl Default for GraphConfig {
    fn default() -> Self {
        crate::calibration::community_graph()
    }
}

impl GraphConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(AmaError::InvalidConfig(format!("graph: {m}")));
        if self.n < 1 {
            return bad("n must be at least 1");
        }
        if self.blocks < 1 {
            return bad("blocks must be at least 1");
        }
        if self.dim < 1 {
            return bad("dim must be at least 1");
        }
        if !(0.0 <= self.p_out && self.p_out <= self.p_in && self.p_in <= 1.0) {
            return bad("need 0 <= p_out <= p_in <= 1");
        }
        if !(0.0..=1.0).contains(&self.identity_spread) {
            return bad("identity_spread must lie in [0,1]");
        }
        if let ContextPreset::Custom { mean, spread } = self.context {
            if !(0.0..=1.0).contains(&mean) || !(0.0..=1.0).contains(&spread) {
                return bad("custom context mean and spread must lie in [0,1]");
            }
        }
        Ok(())
    }

    /// Expected fraction of same-block edges, from pair counts.
    pub fn expected_homophily(&self) -> f64 {
        let sizes = block_sizes(self.n, self.blocks);
        let total = (self.n * self.n.saturating_sub(1) / 2) as f64;
        let within: f64 = sizes.iter().map(|&s| (s * s.saturating_sub(1) / 2) as f64).sum();
        let cross = total - within;
        let w = self.p_in * within;
        let c = self.p_out * cross;
        if w + c == 0.0 {
            0.0
        } else {
            w / (w + c)
        }
    }
}

/// Undirected social graph with block labels, identity vectors and context.
#[derive(Clone, Debug, PartialEq)]
pub struct SocialGraph {
    blocks: usize,
    dim: usize,
    /// Unordered pairs stored as `(i, j)` with `i < j`, sorted.
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    block: Vec<usize>,
    identity: Vec<Vec<f64>>,
    context: Vec<f64>,
}

/// Contiguous balanced block assignment: agent `i` belongs to block `i*K/n`.
pub fn block_of(i: usize, n: usize, blocks: usize) -> usize {
    i * blocks / n
}

fn block_sizes(n: usize, blocks: usize) -> Vec<usize> {
    let mut sizes = vec![0; blocks];
    for i in 0..n {
        sizes[block_of(i, n, blocks)] += 1;
    }
    sizes
}

/// Identity center of block `b`.
///
/// One dimension: centers `(b + 1/2) / K` along the diagonal. Two or more
/// dimensions with `K <= 2^d`: shrunken hypercube corners `0.5 ± 0.35` chosen
/// by the bits of `b`. Otherwise the diagonal rule is reused in every
/// coordinate.
pub fn block_center(b: usize, blocks: usize, dim: usize) -> Vec<f64> {
    let diagonal = (b as f64 + 0.5) / blocks as f64;
    let corners_fit = dim >= 2 && (dim >= usize::BITS as usize || blocks <= 1usize << dim);
    if corners_fit {
        (0..dim).map(|k| if k < usize::BITS as usize && (b >> k) & 1 == 1 { 0.85 } else { 0.15 }).collect()
    } else {
        vec![diagonal; dim]
    }
}

/// `1 - ||a - b|| / sqrt(d)`, clamped to `[0, 1]`.
pub fn identity_similarity(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (1.0 - d2.sqrt() / (a.len() as f64).sqrt()).clamp(0.0, 1.0)
}

impl SocialGraph {
    /// Build a graph from parts, checking every structural invariant.
    pub fn from_parts(
        blocks: usize,
        block: Vec<usize>,
        identity: Vec<Vec<f64>>,
        context: Vec<f64>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let n = block.len();
        let bad = |m: String| Err(AmaError::InvalidConfig(format!("graph: {m}")));
        if n == 0 {
            return bad("graph needs at least one agent".into());
        }
        if blocks == 0 {
            return bad("block count must be positive".into());
        }
        if identity.len() != n || context.len() != n {
            return bad("per-agent vectors have inconsistent lengths".into());
        }
        let dim = identity[0].len();
        if dim == 0 {
            return bad("identity dimension must be at least 1".into());
        }
        for (i, z) in identity.iter().enumerate() {
            if z.len() != dim {
                return Err(AmaError::DimensionMismatch { expected: dim, got: z.len() });
            }
            if z.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return bad(format!("identity of agent {i} leaves [0,1]"));
            }
        }
        if let Some(b) = block.iter().find(|&&b| b >= blocks) {
            return bad(format!("block label {b} out of range"));
        }
        if context.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return bad("context leaves [0,1]".into());
        }
        let mut list = Vec::new();
        for (a, b) in edges {
            if a == b {
                return bad(format!("self-loop at {a}"));
            }
            if a >= n || b >= n {
                return bad(format!("edge ({a},{b}) out of range"));
            }
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        let before = list.len();
        list.dedup();
        if list.len() != before {
            return bad("duplicate edge".into());
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &list {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for nb in &mut adjacency {
            nb.sort_unstable();
        }
        Ok(SocialGraph { blocks, dim, edges: list, adjacency, block, identity, context })
    }

    pub fn n(&self) -> usize {
        self.block.len()
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    pub fn block(&self, i: usize) -> usize {
        self.block[i]
    }

    pub fn block_labels(&self) -> &[usize] {
        &self.block
    }

    pub fn identity(&self, i: usize) -> &[f64] {
        &self.identity[i]
    }

    pub fn context(&self, i: usize) -> f64 {
        self.context[i]
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.blocks];
        for &b in &self.block {
            sizes[b] += 1;
        }
        sizes
    }

    pub fn similarity(&self, i: usize, j: usize) -> f64 {
        identity_similarity(&self.identity[i], &self.identity[j])
    }

    /// Newman modularity of the block partition.
    pub fn modularity(&self) -> Result<f64> {
        let m = self.edges.len();
        if m == 0 {
            return Err(AmaError::UndefinedOnEmpty);
        }
        let mut within = vec![0usize; self.blocks];
        let mut degree = vec![0usize; self.blocks];
        for &(a, b) in &self.edges {
            let (ba, bb) = (self.block[a], self.block[b]);
            degree[ba] += 1;
            degree[bb] += 1;
            if ba == bb {
                within[ba] += 1;
            }
        }
        let m = m as f64;
        Ok((0..self.blocks).map(|b| within[b] as f64 / m - (degree[b] as f64 / (2.0 * m)).powi(2)).sum())
    }

    /// Fraction of edges joining agents with equal block labels (0 when edgeless).
    pub fn homophily_index(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        let same = self.edges.iter().filter(|&&(a, b)| self.block[a] == self.block[b]).count();
        same as f64 / self.edges.len() as f64
    }

    pub fn density(&self) -> f64 {
        let n = self.n();
        if n < 2 {
            return 0.0;
        }
        2.0 * self.edges.len() as f64 / (n * (n - 1)) as f64
    }

    pub fn structure_summary(&self) -> StructureSummary {
        StructureSummary {
            density: self.density(),
            modularity: self.modularity().ok(),
            homophily_index: self.homophily_index(),
            mean_degree: 2.0 * self.edges.len() as f64 / self.n() as f64,
        }
    }

    /// Serialize to the whitespace-delimited edge-list format:
    /// header `n K d`, then `i j` per edge, then `id block z_1..z_d c` per agent.
    /// Lines starting with `#` are comments on input.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {} {}", self.n(), self.blocks, self.dim).unwrap();
        for &(a, b) in &self.edges {
            writeln!(out, "{a} {b}").unwrap();
        }
        for i in 0..self.n() {
            write!(out, "{} {}", i, self.block[i]).unwrap();
            for z in &self.identity[i] {
                write!(out, " {}", fmt_f64(*z)).unwrap();
            }
            writeln!(out, " {}", fmt_f64(self.context[i])).unwrap();
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let perr = |line: usize, m: &str| AmaError::Parse(format!("edge list line {line}: {m}"));
        let mut lines = text.lines().enumerate().filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });
        let (_, header) = lines.next().ok_or_else(|| perr(1, "missing header"))?;
        let head: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| perr(1, "header must be `n K d`"))?;
        let [n, blocks, dim] = head[..] else {
            return Err(perr(1, "header must be `n K d`"));
        };
        let mut edges = Vec::new();
        let mut block = vec![None; n];
        let mut identity = vec![Vec::new(); n];
        let mut context = vec![0.0; n];
        for (no, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() == 2 {
                let a = toks[0].parse().map_err(|_| perr(no + 1, "bad edge"))?;
                let b = toks[1].parse().map_err(|_| perr(no + 1, "bad edge"))?;
                edges.push((a, b));
            } else if toks.len() == dim + 3 {
                let id: usize = toks[0].parse().map_err(|_| perr(no + 1, "bad agent id"))?;
                if id >= n {
                    return Err(perr(no + 1, "agent id out of range"));
                }
                block[id] = Some(toks[1].parse().map_err(|_| perr(no + 1, "bad block"))?);
                identity[id] = toks[2..2 + dim]
                    .iter()
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| perr(no + 1, "bad identity"))?;
                context[id] = toks[2 + dim].parse().map_err(|_| perr(no + 1, "bad context"))?;
            } else {
                return Err(perr(no + 1, "unexpected token count"));
            }
        }
        let block = block
            .into_iter()
            .enumerate()
            .map(|(i, b)| b.ok_or_else(|| AmaError::Parse(format!("agent {i} has no record"))))
            .collect::<Result<Vec<_>>>()?;
        SocialGraph::from_parts(blocks, block, identity, context, edges)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureSummary {
    pub density: f64,
    /// `None` on an edgeless graph.
    pub modularity: Option<f64>,
    pub homophily_index: f64,
    pub mean_degree: f64,
}

/// Sample a stochastic block model graph.
///
/// Draw order: identity noise for every agent, then context, then one
/// uniform per unordered pair in lexicographic order.
pub fn generate_sbm<R: Rng + ?Sized>(config: &GraphConfig, rng: &mut R) -> Result<SocialGraph> {
    config.validate()?;
    let n = config.n;
    let block: Vec<usize> = (0..n).map(|i| block_of(i, n, config.blocks)).collect();
    let centers: Vec<Vec<f64>> = (0..config.blocks).map(|b| block_center(b, config.blocks, config.dim)).collect();
    let spread = config.identity_spread;
    let identity: Vec<Vec<f64>> = block
        .iter()
        .map(|&b| {
            centers[b]
                .iter()
                .map(|&c| {
                    let noise = if spread > 0.0 { rng.random_range(-spread..=spread) } else { 0.0 };
                    (c + noise).clamp(0.0, 1.0)
                })
                .collect()
        })
        .collect();
    let (lo, hi) = config.context.bounds();
    let context: Vec<f64> = (0..n).map(|_| if hi > lo { rng.random_range(lo..=hi) } else { lo }).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if block[i] == block[j] { config.p_in } else { config.p_out };
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    SocialGraph::from_parts(config.blocks, block, identity, context, edges)
}
