//! Gaussian imperfections in the controlled rotation and quenched averages
//! over them.
//!
//! A realization perturbs every rotation half-angle,
//! `θ̃_i/2 = sin⁻¹(C/λ_i) + ε_i`, with `ε_i` Gaussian. Draws come from a
//! counter-based stream keyed by `(seed, realization, eigenvalue index)`, so a
//! run is reproducible bit for bit whatever the thread count.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hhl::{self, RegisterMode, SpectralData, Stage, TripartiteState};
use crate::resources;
use crate::tensor::{self, CVector, SubsystemDims};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisorderConfig {
    /// Standard deviation of `ε`, radians.
    pub sigma: f64,
    /// Mean of `ε`, radians.
    pub mean: f64,
    pub realizations: usize,
    pub seed: u64,
}

impl Default for DisorderConfig {
    fn default() -> Self {
        Self { sigma: 0.0, mean: 0.0, realizations: 10_000, seed: 0 }
    }
}

impl DisorderConfig {
    pub fn new(sigma: f64, realizations: usize, seed: u64) -> Result<Self> {
        let cfg = Self { sigma, realizations, seed, ..Self::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(Error::RangeError(format!("σ = {} must be ≥ 0", self.sigma)));
        }
        if !self.mean.is_finite() {
            return Err(Error::RangeError(format!("mean = {} must be finite", self.mean)));
        }
        if self.realizations == 0 {
            return Err(Error::RangeError("at least one realization required".into()));
        }
        Ok(())
    }
}

/// Standard normal draw for `(seed, realization, index)` via Box–Muller on two
/// 53-bit uniforms taken from a fixed position of a ChaCha stream.
fn standard_normal(rng: &mut ChaCha8Rng, index: usize) -> f64 {
    // two u64 draws = four 32-bit words per index
    rng.set_word_pos(index as u128 * 4);
    let scale = 1.0 / (1u64 << 53) as f64;
    let u1 = ((rng.next_u64() >> 11) as f64 + 1.0) * scale;
    let u2 = (rng.next_u64() >> 11) as f64 * scale;
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

fn stream(seed: u64, realization: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(realization);
    rng
}

/// The `count` rotation errors of one realization.
pub fn realization_epsilons(cfg: &DisorderConfig, realization: u64, count: usize) -> Vec<f64> {
    let mut rng = stream(cfg.seed, realization);
    (0..count)
        .map(|i| cfg.mean + cfg.sigma * standard_normal(&mut rng, i))
        .collect()
}

/// `M × count` matrix of rotation errors, one row per realization.
pub fn sample_epsilons(cfg: &DisorderConfig, count: usize) -> Vec<Vec<f64>> {
    (0..cfg.realizations as u64)
        .map(|m| realization_epsilons(cfg, m, count))
        .collect()
}

/// Perturbed half-angles clamped to `[0, π/2]`, with the number of clamps.
pub fn perturbed_half_angles(spec: &SpectralData, eps: &[f64]) -> Result<(Vec<f64>, usize)> {
    if eps.len() != spec.lambdas.len() {
        return Err(Error::ShapeError(format!(
            "{} errors for {} eigenvalue labels",
            eps.len(),
            spec.lambdas.len()
        )));
    }
    let mut clamped = 0;
    let angles = spec
        .half_angles()
        .iter()
        .zip(eps)
        .map(|(a, e)| {
            let raw = a + e;
            let bounded = raw.clamp(0.0, FRAC_PI_2);
            if bounded != raw {
                clamped += 1;
            }
            bounded
        })
        .collect();
    Ok((angles, clamped))
}

/// `|ψ₂⟩` built with imperfect rotations.
#[derive(Debug, Clone)]
pub struct NoisyState {
    pub state: TripartiteState,
    /// Half-angles that left `[0, π/2]` and were clamped.
    pub clamped: usize,
}

pub fn noisy_psi2(spec: &SpectralData, eps: &[f64]) -> Result<NoisyState> {
    let (angles, clamped) = perturbed_half_angles(spec, eps)?;
    let rotations: Vec<(f64, f64)> = angles.iter().map(|a| (a.cos(), a.sin())).collect();
    let state = hhl::build_state_with_rotations(spec, Stage::Psi2, RegisterMode::Analytic, &rotations)?;
    Ok(NoisyState { state, clamped })
}

#[derive(Debug, Clone)]
pub struct NoisySolution {
    /// Normalized post-selected solution.
    pub x_state: CVector,
    /// `Σ β_i sin(θ̃_i/2) |u_i⟩`, the amplitudes before renormalization.
    pub amplitudes: CVector,
    /// `Σ |β_i|² sin²(θ̃_i/2)`.
    pub sp: f64,
    pub clamped: usize,
}

fn combine(spec: &SpectralData, coefficients: impl Iterator<Item = f64>) -> CVector {
    spec.vectors
        .iter()
        .zip(&spec.betas)
        .zip(coefficients)
        .fold(CVector::zeros(spec.dim()), |acc, ((u, &beta), k)| acc + u * (beta * k))
}

/// Post-selects `R = |1⟩` after the imperfect rotation and reverse phase
/// estimation.
pub fn noisy_solution(spec: &SpectralData, eps: &[f64]) -> Result<NoisySolution> {
    let (angles, clamped) = perturbed_half_angles(spec, eps)?;
    let sines: Vec<f64> = angles.iter().map(|a| a.sin()).collect();
    let sp: f64 = spec.weights().iter().zip(&sines).map(|(w, s)| w * s * s).sum();
    if sp <= 0.0 {
        return Err(Error::ZeroPostselection);
    }
    let amplitudes = combine(spec, sines.into_iter());
    let x_state = amplitudes.unscale(sp.sqrt());
    Ok(NoisySolution { x_state, amplitudes, sp, clamped })
}

/// Clean post-selected amplitudes `Σ β_i C/λ_i |u_i⟩`.
pub fn clean_amplitudes(spec: &SpectralData) -> CVector {
    combine(spec, spec.ratios().into_iter())
}

/// First-order deviation `|δ⟩ = Σ β_i ε_i |u_i⟩` of the small-angle model
/// `θ̃_i/2 ≈ C/λ_i + ε_i`.
pub fn first_order_delta(spec: &SpectralData, eps: &[f64]) -> CVector {
    combine(spec, eps.iter().copied())
}

/// Root relative deviation `√(Σ|x̄_i − x_i|² / |x̄|²)` after rotating `noisy`
/// onto the global phase of `clean`.
pub fn error_metric(clean: &CVector, noisy: &CVector) -> Result<f64> {
    if clean.len() != noisy.len() {
        return Err(Error::ShapeError(format!(
            "clean has length {}, noisy {}",
            clean.len(),
            noisy.len()
        )));
    }
    let norm = clean.norm();
    if norm == 0.0 {
        return Err(Error::DegenerateReference);
    }
    let overlap = clean.dotc(noisy);
    let aligned = if overlap.norm() > 0.0 {
        noisy * (overlap.conj() / overlap.norm())
    } else {
        noisy.clone()
    };
    Ok((clean - aligned).norm() / norm)
}

/// Mean and standard error of a sampled quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchedStat {
    pub mean: f64,
    pub stderr: f64,
}

/// Quenched averages of several quantities sharing the same realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRun {
    pub config: DisorderConfig,
    pub averages: BTreeMap<String, QuenchedStat>,
    /// Realizations whose evaluation failed and were left out.
    pub skipped: usize,
    /// Total clamped half-angles over all realizations.
    pub clamped: usize,
    /// Per-realization values in quantity order, when requested.
    pub samples: Option<Vec<Vec<f64>>>,
}

impl DisorderRun {
    pub fn get(&self, name: &str) -> Option<QuenchedStat> {
        self.averages.get(name).copied()
    }
}

/// Neumaier-compensated sum, in slice order.
fn compensated_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn stat(values: &[f64]) -> QuenchedStat {
    let m = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / m;
    if values.len() < 2 {
        return QuenchedStat { mean, stderr: 0.0 };
    }
    let var = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (m - 1.0);
    QuenchedStat { mean, stderr: (var / m).sqrt() }
}

/// Evaluates `quantity` (returning one value per name in `names`) on every
/// realization and aggregates in realization order.
///
/// A failing realization is skipped; the run fails when more than 1% are.
/// With `σ = 0` every realization is identical, so one evaluation is made and
/// the standard error is exactly zero.
pub fn quenched_run<F>(
    names: &[&str],
    quantity: F,
    spec: &SpectralData,
    cfg: &DisorderConfig,
    keep_samples: bool,
) -> Result<DisorderRun>
where
    F: Fn(&SpectralData, &[f64]) -> Result<Vec<f64>> + Sync,
{
    cfg.validate()?;
    let count = spec.lambdas.len();
    if cfg.sigma == 0.0 {
        let eps = vec![cfg.mean; count];
        let (_, clamped) = perturbed_half_angles(spec, &eps)?;
        let values = quantity(spec, &eps)?;
        check_arity(names, &values)?;
        let averages = names
            .iter()
            .zip(&values)
            .map(|(n, &v)| (n.to_string(), QuenchedStat { mean: v, stderr: 0.0 }))
            .collect();
        let samples = keep_samples.then(|| vec![values.clone(); cfg.realizations]);
        return Ok(DisorderRun {
            config: *cfg,
            averages,
            skipped: 0,
            clamped: clamped * cfg.realizations,
            samples,
        });
    }

    let outcomes: Vec<(Option<Vec<f64>>, usize)> = (0..cfg.realizations as u64)
        .into_par_iter()
        .map(|m| {
            let eps = realization_epsilons(cfg, m, count);
            let clamped = perturbed_half_angles(spec, &eps).map(|(_, c)| c).unwrap_or(0);
            (quantity(spec, &eps).ok(), clamped)
        })
        .collect();

    let clamped = outcomes.iter().map(|(_, c)| c).sum();
    let kept: Vec<Vec<f64>> = outcomes.into_iter().filter_map(|(v, _)| v).collect();
    let skipped = cfg.realizations - kept.len();
    if skipped * 100 > cfg.realizations || kept.is_empty() {
        return Err(Error::TooManySkipped { skipped, total: cfg.realizations });
    }
    for values in &kept {
        check_arity(names, values)?;
    }
    let averages = names
        .iter()
        .enumerate()
        .map(|(k, n)| {
            let column: Vec<f64> = kept.iter().map(|v| v[k]).collect();
            (n.to_string(), stat(&column))
        })
        .collect();
    Ok(DisorderRun {
        config: *cfg,
        averages,
        skipped,
        clamped,
        samples: keep_samples.then_some(kept),
    })
}

fn check_arity(names: &[&str], values: &[f64]) -> Result<()> {
    if names.len() != values.len() {
        return Err(Error::ShapeError(format!(
            "quantity returned {} values for {} names",
            values.len(),
            names.len()
        )));
    }
    Ok(())
}

/// Quenched mean and standard error of a single scalar quantity.
pub fn quenched_average<F>(quantity: F, spec: &SpectralData, cfg: &DisorderConfig) -> Result<QuenchedStat>
where
    F: Fn(&SpectralData, &[f64]) -> Result<f64> + Sync,
{
    let run = quenched_run(&["q"], |s, e| quantity(s, e).map(|v| vec![v]), spec, cfg, false)?;
    Ok(run.averages["q"])
}

/// Names of [`disorder_quantities`] outputs.
pub const DISORDER_QUANTITIES: [&str; 4] = ["error", "ggm", "ln_lambdau", "coherence_r"];

/// `E_r`, `𝓔(ψ̃₂)`, `𝓛𝓝(ρ̃_ΛU)` and `𝓒(ρ̃_R)` of one realization.
pub fn disorder_quantities(spec: &SpectralData, eps: &[f64]) -> Result<Vec<f64>> {
    let noisy = noisy_psi2(spec, eps)?;
    let psi = noisy.state.amplitudes();
    let dims = noisy.state.dims();
    let d = dims.as_slice();
    let rho_lu = tensor::reduce_state(psi, dims, &[hhl::LAMBDA, hhl::U])?;
    let rho_r = tensor::reduce_state(psi, dims, &[hhl::R])?;
    let sol = noisy_solution(spec, eps)?;
    Ok(vec![
        error_metric(&clean_amplitudes(spec), &sol.amplitudes)?,
        resources::ggm_of(psi, dims)?,
        resources::log_negativity(&rho_lu, &SubsystemDims::new(vec![d[0], d[1]])?)?,
        resources::l1_coherence(&rho_r),
    ])
}
