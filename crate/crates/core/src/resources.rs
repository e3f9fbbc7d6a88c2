//! Entanglement and coherence measures of the stage states.
//!
//! * GGM: `1 − max` over all bipartitions of the top squared Schmidt
//!   coefficient.
//! * Logarithmic negativity `log₂(2𝓝 + 1)`, with `𝓝` the absolute sum of the
//!   negative eigenvalues of a partial transpose.
//! * Normalized l1 coherence `Σ_{i≠j} |ρ_ij| / (D − 1)` in the computational
//!   basis.

use crate::error::{Error, Result};
use crate::hhl::{self, RegisterMode, SpectralData, Stage, TripartiteState, LAMBDA, R, U};
use crate::tensor::{self, CMatrix, CVector, Party, SubsystemDims};

/// Partial-transpose eigenvalues below `-NEGATIVE_EIGEN_TOL` count as negative.
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-12;
/// Largest tolerated gap between the two partial transposes' negativities.
pub const PT_AGREEMENT_TOL: f64 = 1e-10;

/// Every bipartition of `parties` parties as the side containing party 0.
pub fn bipartitions(parties: usize) -> impl Iterator<Item = Vec<usize>> {
    let others = parties.saturating_sub(1);
    let count = if parties < 2 { 0 } else { (1usize << others) - 1 };
    (0..count).map(move |mask| {
        std::iter::once(0)
            .chain((1..parties).filter(|p| mask & (1 << (p - 1)) != 0))
            .collect()
    })
}

/// GGM of a pure state over arbitrary parties.
pub fn ggm_of(psi: &CVector, dims: &SubsystemDims) -> Result<f64> {
    if dims.parties() < 2 {
        return Err(Error::InvalidCut(format!(
            "GGM needs at least two parties, got {}",
            dims.parties()
        )));
    }
    let mut best = 0.0f64;
    for cut in bipartitions(dims.parties()) {
        let top = tensor::schmidt_squared(psi, dims, &cut)?[0];
        best = best.max(top);
    }
    Ok((1.0 - best).max(0.0))
}

/// GGM over the `Λ : U : R` partition.
pub fn ggm(state: &TripartiteState) -> f64 {
    ggm_of(state.amplitudes(), state.dims()).expect("tripartite state has valid cuts")
}

/// The analytic `|ψ₂⟩` viewed with `Λ` split into its `n` qubits, most
/// significant bit first, followed by `U` and `R`.
pub fn micro_state(spec: &SpectralData) -> Result<(CVector, SubsystemDims)> {
    if spec.n > hhl::MAX_MICRO_QUBITS {
        return Err(Error::SizeError(format!(
            "micro GGM enumerates 2^(n+1) − 1 cuts; n = {} exceeds {}",
            spec.n,
            hhl::MAX_MICRO_QUBITS
        )));
    }
    let state =
        hhl::build_state_with_rotations(spec, Stage::Psi2, RegisterMode::Micro, &spec.rotations())?;
    let mut dims = vec![2; spec.n as usize];
    dims.extend([spec.dim(), 2]);
    Ok((state.into_amplitudes(), SubsystemDims::new(dims)?))
}

/// GGM of `|ψ₂⟩` treating every eigenvalue-register qubit as its own party.
pub fn micro_ggm(spec: &SpectralData) -> Result<f64> {
    let (psi, dims) = micro_state(spec)?;
    ggm_of(&psi, &dims)
}

/// Register bits on which every encoded eigenvalue present in `b` agrees, as
/// `(bit position counted from the least significant bit, shared value)`,
/// most significant first. Each such bit factors out of the micro state.
pub fn common_bits(spec: &SpectralData) -> Result<Vec<(u32, u8)>> {
    let scaled = spec.scaled.as_ref().ok_or(Error::EigenvalueScalingError {
        scaled: spec.lambda_max(),
    })?;
    let present: Vec<u64> = scaled
        .iter()
        .zip(&spec.betas)
        .filter(|(_, b)| b.norm() > hhl::SUPPORT_TOL)
        .map(|(&s, _)| s)
        .collect();
    let Some(&first) = present.first() else {
        return Ok(Vec::new());
    };
    Ok((0..spec.n)
        .rev()
        .filter(|&bit| present.iter().all(|&s| (s >> bit) & 1 == (first >> bit) & 1))
        .map(|bit| (bit, ((first >> bit) & 1) as u8))
        .collect())
}

/// Log-negativity of a pure state across `cut`, from its Schmidt spectrum:
/// `𝓝 = ((Σ√p)² − 1)/2`.
pub fn pure_log_negativity(psi: &CVector, dims: &SubsystemDims, cut: &[usize]) -> Result<f64> {
    let s = tensor::schmidt_squared(psi, dims, cut)?;
    let root_sum: f64 = s.iter().map(|p| p.max(0.0).sqrt()).sum();
    Ok((2.0 * root_sum.log2()).max(0.0))
}

fn negative_mass(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&v| v < -NEGATIVE_EIGEN_TOL)
        .map(|v| -v)
        .sum()
}

/// Negativity `𝓝` of a two-party density matrix. Both partial transposes are
/// evaluated and must agree.
pub fn negativity(rho: &CMatrix, dims: &SubsystemDims) -> Result<f64> {
    let second = tensor::partial_transpose(rho, dims, Party::Second)?;
    let first = tensor::partial_transpose(rho, dims, Party::First)?;
    let n2 = negative_mass(&tensor::hermitian_eigenvalues(&second)?);
    let n1 = negative_mass(&tensor::hermitian_eigenvalues(&first)?);
    if (n1 - n2).abs() > PT_AGREEMENT_TOL {
        return Err(Error::Numerical(format!(
            "partial transposes disagree: 𝓝 = {n1} vs {n2}"
        )));
    }
    Ok(n2)
}

pub fn log_negativity(rho: &CMatrix, dims: &SubsystemDims) -> Result<f64> {
    Ok((2.0 * negativity(rho, dims)? + 1.0).log2())
}

/// `𝓝(ρ_ΛU)` of `|ψ₂⟩` in closed form:
/// `Σ_{i<j} |β_iβ_j| (√(1−C²/λ_i²)√(1−C²/λ_j²) + C²/(λ_iλ_j))`.
pub fn negativity_closed_form(spec: &SpectralData) -> Result<f64> {
    if spec.degenerate {
        return Err(Error::DegeneracyWarning);
    }
    let rot = spec.rotations();
    let mut total = 0.0;
    for i in 0..spec.betas.len() {
        for j in i + 1..spec.betas.len() {
            let overlap = rot[i].0 * rot[j].0 + rot[i].1 * rot[j].1;
            total += spec.betas[i].norm() * spec.betas[j].norm() * overlap;
        }
    }
    Ok(total)
}

pub fn log_negativity_closed_form(spec: &SpectralData) -> Result<f64> {
    Ok((2.0 * negativity_closed_form(spec)? + 1.0).log2())
}

/// Normalized l1 coherence of a density matrix in the computational basis.
pub fn l1_coherence(rho: &CMatrix) -> f64 {
    let d = rho.nrows();
    if d < 2 {
        return 0.0;
    }
    let off: f64 = (0..d)
        .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| rho[(i, j)].norm())
        .sum();
    off / (d - 1) as f64
}

/// Normalized l1 coherence of `|ψ⟩⟨ψ|` without forming the projector:
/// `((Σ|ψ_i|)² − 1) / (D − 1)`.
pub fn l1_coherence_pure(psi: &CVector) -> f64 {
    let d = psi.len();
    if d < 2 {
        return 0.0;
    }
    let l1: f64 = psi.iter().map(|z| z.norm()).sum();
    let l2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    ((l1 * l1 - l2) / (d - 1) as f64).max(0.0)
}

/// `𝓒_R = 2 Σ |β_i|² √(1 − C²/λ_i²) · C/λ_i`.
pub fn coherence_r_closed_form(spec: &SpectralData) -> f64 {
    2.0 * spec
        .weights()
        .iter()
        .zip(spec.rotations())
        .map(|(w, (r0, r1))| w * r0 * r1)
        .sum::<f64>()
}

/// `ρ_R = [[1 − Σa_i, Σb_i], [Σb_i, Σa_i]]` with `a_i = |β_i|² C²/λ_i²` and
/// `b_i = |β_i|² √(1 − C²/λ_i²) C/λ_i`.
pub fn rho_r_closed_form(spec: &SpectralData) -> CMatrix {
    let (mut a, mut b) = (0.0, 0.0);
    for (w, (r0, r1)) in spec.weights().iter().zip(spec.rotations()) {
        a += w * r1 * r1;
        b += w * r0 * r1;
    }
    tensor::real_matrix(&[&[1.0 - a, b], &[b, a]])
}

/// Log-negativities across the three pure-state cuts and of the three
/// two-party marginals.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LogNegativities {
    pub lambda_ur: f64,
    pub u_lambdar: f64,
    pub r_lambdau: f64,
    pub lambda_u: f64,
    pub u_r: f64,
    pub lambda_r: f64,
}

impl LogNegativities {
    pub const NAMES: [&'static str; 6] = [
        "ln_lambda_ur",
        "ln_u_lambdar",
        "ln_r_lambdau",
        "ln_lambdau",
        "ln_ur",
        "ln_lambdar",
    ];

    pub fn values(&self) -> [f64; 6] {
        [
            self.lambda_ur,
            self.u_lambdar,
            self.r_lambdau,
            self.lambda_u,
            self.u_r,
            self.lambda_r,
        ]
    }
}

/// Measures that depend only on the state itself.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateMeasures {
    pub ggm: f64,
    pub ln: LogNegativities,
    pub coherence_global: f64,
    pub coherence_lambda: f64,
    pub coherence_u: f64,
    pub coherence_r: f64,
    pub purity_lambda: f64,
    pub purity_u: f64,
    pub purity_r: f64,
}

impl StateMeasures {
    pub fn of(state: &TripartiteState) -> Result<Self> {
        let psi = state.amplitudes();
        let dims = state.dims();
        let d = dims.as_slice();
        let pair = |a: usize, b: usize| -> Result<f64> {
            let rho = tensor::reduce_state(psi, dims, &[a, b])?;
            log_negativity(&rho, &SubsystemDims::new(vec![d[a], d[b]])?)
        };
        let rho_l = tensor::reduce_state(psi, dims, &[LAMBDA])?;
        let rho_u = tensor::reduce_state(psi, dims, &[U])?;
        let rho_r = tensor::reduce_state(psi, dims, &[R])?;
        Ok(Self {
            ggm: ggm_of(psi, dims)?,
            ln: LogNegativities {
                lambda_ur: pure_log_negativity(psi, dims, &[LAMBDA])?,
                u_lambdar: pure_log_negativity(psi, dims, &[U])?,
                r_lambdau: pure_log_negativity(psi, dims, &[R])?,
                lambda_u: pair(LAMBDA, U)?,
                u_r: pair(U, R)?,
                lambda_r: pair(LAMBDA, R)?,
            },
            coherence_global: l1_coherence_pure(psi),
            coherence_lambda: l1_coherence(&rho_l),
            coherence_u: l1_coherence(&rho_u),
            coherence_r: l1_coherence(&rho_r),
            purity_lambda: tensor::purity(&rho_l),
            purity_u: tensor::purity(&rho_u),
            purity_r: tensor::purity(&rho_r),
        })
    }
}

/// All resource quantities of one stage, plus the algorithm-level success
/// probability and condition number.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceReport {
    pub stage: Stage,
    pub measures: StateMeasures,
    pub sp: f64,
    pub kappa: f64,
    /// `b` lies in a single eigenspace.
    pub trivial: bool,
}

impl ResourceReport {
    pub const SCALAR_NAMES: [&'static str; 17] = [
        "ggm",
        "ln_lambda_ur",
        "ln_u_lambdar",
        "ln_r_lambdau",
        "ln_lambdau",
        "ln_ur",
        "ln_lambdar",
        "coherence_global",
        "coherence_lambda",
        "coherence_u",
        "coherence_r",
        "purity_lambda",
        "purity_u",
        "purity_r",
        "sp",
        "kappa",
        "trivial",
    ];

    /// Scalars in [`ResourceReport::SCALAR_NAMES`] order; `trivial` as 0/1.
    pub fn scalars(&self) -> [f64; 17] {
        let m = &self.measures;
        let ln = m.ln.values();
        [
            m.ggm,
            ln[0],
            ln[1],
            ln[2],
            ln[3],
            ln[4],
            ln[5],
            m.coherence_global,
            m.coherence_lambda,
            m.coherence_u,
            m.coherence_r,
            m.purity_lambda,
            m.purity_u,
            m.purity_r,
            self.sp,
            self.kappa,
            if self.trivial { 1.0 } else { 0.0 },
        ]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Self::SCALAR_NAMES
            .iter()
            .position(|&n| n == name)
            .map(|i| self.scalars()[i])
    }
}

pub fn report(spec: &SpectralData, stage: Stage) -> Result<ResourceReport> {
    let state = hhl::build_state(spec, stage)?;
    Ok(ResourceReport {
        stage,
        measures: StateMeasures::of(&state)?,
        sp: hhl::solution(spec).sp,
        kappa: hhl::condition_number(spec),
        trivial: spec.is_trivial(),
    })
}
