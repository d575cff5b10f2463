//! Aesthetic-act designs, latent affect formation and its noisy indicator items.

use std::cmp::Ordering;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{AmaError, Result};
use crate::graph::identity_similarity;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Meme,
    Theatre,
    Song,
    Mural,
}

impl Format {
    pub const ALL: [Format; 4] = [Format::Meme, Format::Theatre, Format::Song, Format::Mural];

    /// Theatre, song and mural invite collective co-performance.
    pub fn is_participatory(self) -> bool {
        !matches!(self, Format::Meme)
    }

    pub fn name(self) -> &'static str {
        match self {
            Format::Meme => "meme",
            Format::Theatre => "theatre",
            Format::Song => "song",
            Format::Mural => "mural",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Seeding {
    Random,
    TopDegree,
    TopMatching,
}

impl Seeding {
    pub fn name(self) -> &'static str {
        match self {
            Seeding::Random => "random",
            Seeding::TopDegree => "top_degree",
            Seeding::TopMatching => "top_matching",
        }
    }
}

/// One aesthetic act: its format, symbolic content, hook, toxicity and seeding plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Design {
    pub format: Format,
    pub symbols: Vec<f64>,
    pub hook: f64,
    pub call_and_response: bool,
    pub toxicity: f64,
    pub seed_fraction: f64,
    pub seeding: Seeding,
}

impl Default for Design {
    fn default() -> Self {
        crate::calibration::design()
    }
}

impl Design {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.symbols.len() != dim {
            return Err(AmaError::DimensionMismatch { expected: dim, got: self.symbols.len() });
        }
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !self.symbols.iter().all(|&s| unit(s)) {
            return Err(AmaError::InvalidConfig("design symbols must lie in [0,1]".into()));
        }
        for (name, v) in [("hook", self.hook), ("toxicity", self.toxicity), ("seed_fraction", self.seed_fraction)] {
            if !unit(v) {
                return Err(AmaError::InvalidConfig(format!("design {name} must lie in [0,1]")));
            }
        }
        Ok(())
    }

    /// Whether the call-and-response boost on social influence applies.
    pub fn boosts_social_influence(&self) -> bool {
        self.call_and_response && self.format.is_participatory()
    }

    /// Number of seeded agents in a population of `n`.
    pub fn seed_count(&self, n: usize) -> usize {
        ((self.seed_fraction * n as f64).round() as usize).min(n)
    }

    /// Deterministic total order over the design tuple
    /// `(format, symbols, hook, call_and_response, toxicity, seed_fraction, seeding)`.
    pub fn lexicographic_cmp(&self, other: &Design) -> Ordering {
        self.format
            .cmp(&other.format)
            .then_with(|| {
                for (a, b) in self.symbols.iter().zip(&other.symbols) {
                    let o = a.total_cmp(b);
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                self.symbols.len().cmp(&other.symbols.len())
            })
            .then_with(|| self.hook.total_cmp(&other.hook))
            .then_with(|| self.call_and_response.cmp(&other.call_and_response))
            .then_with(|| self.toxicity.total_cmp(&other.toxicity))
            .then_with(|| self.seed_fraction.total_cmp(&other.seed_fraction))
            .then_with(|| self.seeding.cmp(&other.seeding))
    }

    /// Compact human-readable tag, e.g. `meme[0.125]/h0.5/cr0/t0/s0.08/random`.
    pub fn label(&self) -> String {
        let sym: Vec<String> = self.symbols.iter().map(|s| format!("{s}")).collect();
        format!(
            "{}[{}]/h{}/cr{}/t{}/s{}/{}",
            self.format.name(),
            sym.join(","),
            self.hook,
            u8::from(self.call_and_response),
            self.toxicity,
            self.seed_fraction,
            self.seeding.name()
        )
    }
}

/// Coefficients of the affect-formation equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AffectParams {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub sigma_u: f64,
}

impl Default for AffectParams {
    fn default() -> Self {
        crate::calibration::affect()
    }
}

impl AffectParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_u >= 0.0) {
            return Err(AmaError::InvalidConfig("affect: sigma_u must be >= 0".into()));
        }
        Ok(())
    }

    pub fn coefficients(&self) -> [f64; 6] {
        [self.a0, self.a1, self.a2, self.a3, self.a4, self.a5]
    }

    /// Noise-free part of `V_A`. The hook scales the exposure coefficient.
    pub fn systematic(&self, exposure: bool, m: f64, c: f64, hook: f64) -> f64 {
        let e = if exposure { 1.0 } else { 0.0 };
        self.a0 + self.a1 * (1.0 + hook) * e + self.a2 * m + self.a3 * c + self.a4 * e * m + self.a5 * e * c
    }
}

/// Loadings, intercepts and noise of the one-factor indicator model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasurementParams {
    pub loadings: Vec<f64>,
    pub intercepts: Vec<f64>,
    pub sigma_eps: f64,
}

impl Default for MeasurementParams {
    fn default() -> Self {
        crate::calibration::measurement()
    }
}

impl MeasurementParams {
    pub fn items(&self) -> usize {
        self.loadings.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.loadings.is_empty() {
            return Err(AmaError::InvalidConfig("measurement: need at least one item".into()));
        }
        if self.loadings.len() != self.intercepts.len() {
            return Err(AmaError::InvalidConfig("measurement: loadings and intercepts differ in length".into()));
        }
        if !(self.sigma_eps >= 0.0) {
            return Err(AmaError::InvalidConfig("measurement: sigma_eps must be >= 0".into()));
        }
        Ok(())
    }
}

/// Identity matching between an agent and the design's symbols.
pub fn matching(identity: &[f64], design: &Design) -> Result<f64> {
    if identity.len() != design.symbols.len() {
        return Err(AmaError::DimensionMismatch { expected: identity.len(), got: design.symbols.len() });
    }
    Ok(identity_similarity(identity, &design.symbols))
}

/// Draw `V_A` for one agent.
pub fn form_affect<R: Rng + ?Sized>(
    params: &AffectParams,
    exposure: bool,
    m: f64,
    c: f64,
    design: &Design,
    rng: &mut R,
) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    params.systematic(exposure, m, c, design.hook) + params.sigma_u * z
}

/// Draw the `K` indicator items `y_k = λ_k v + ν_k + ε_k`.
pub fn measure_items<R: Rng + ?Sized>(mp: &MeasurementParams, v_a: f64, rng: &mut R) -> Vec<f64> {
    mp.loadings
        .iter()
        .zip(&mp.intercepts)
        .map(|(&l, &nu)| {
            let z: f64 = rng.sample(StandardNormal);
            l * v_a + nu + mp.sigma_eps * z
        })
        .collect()
}

#[cfg(test)]
pub(crate) fn test_design(format: Format) -> Design {
    Design {
        format,
        symbols: vec![0.5],
        hook: 0.0,
        call_and_response: false,
        toxicity: 0.0,
        seed_fraction: 0.1,
        seeding: Seeding::Random,
    }
}
