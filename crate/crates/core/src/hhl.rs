//! Problem instances and the exact register state after every HHL stage.
//!
//! The composite system is ordered `Λ ⊗ U ⊗ R`: the eigenvalue register, the
//! solution register and the single read-out qubit. In the analytic register
//! mode `Λ` has one orthonormal label per distinct eigenvalue (dimension `N`);
//! in the micro mode it is the `n`-qubit register holding the binary encoding
//! of each scaled eigenvalue.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::{self, CMatrix, CVector, SubsystemDims};

/// Party index of the eigenvalue register.
pub const LAMBDA: usize = 0;
/// Party index of the solution register.
pub const U: usize = 1;
/// Party index of the read-out qubit.
pub const R: usize = 2;

/// `C = DEFAULT_C_RATIO · λ_min` unless the caller fixes C.
pub const DEFAULT_C_RATIO: f64 = 0.736;

/// Tolerance on `|b| = 1` and on unit norm of built states.
pub const NORM_TOL: f64 = 1e-12;
/// Eigenvalues closer than this (relative to max(1, |λ|)) share one label.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Distance from an integer tolerated for scaled eigenvalues.
pub const INTEGER_TOL: f64 = 1e-9;
/// Overlaps below this magnitude are treated as absent from `b`.
pub const SUPPORT_TOL: f64 = 1e-10;
/// Widest eigenvalue register accepted in micro mode.
pub const MAX_MICRO_QUBITS: u32 = 12;

/// Hermitian coefficient matrix together with a unit-norm right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    a: CMatrix,
    b: CVector,
}

impl LinearSystem {
    pub fn new(a: CMatrix, b: CVector) -> Result<Self> {
        let deviation = tensor::hermiticity_deviation(&a).ok_or_else(|| {
            Error::ShapeError(format!("A must be square, got {}x{}", a.nrows(), a.ncols()))
        })?;
        if deviation > tensor::HERMITIAN_TOL {
            return Err(Error::HermiticityViolation { deviation });
        }
        if b.len() != a.nrows() {
            return Err(Error::ShapeError(format!(
                "b has length {} but A is {}x{}",
                b.len(),
                a.nrows(),
                a.ncols()
            )));
        }
        if (b.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::RangeError(format!("|b| = {} is not 1", b.norm())));
        }
        // store the exactly Hermitian part
        let a = (&a + a.adjoint()).scale(0.5);
        Ok(Self { a, b })
    }

    /// Like [`LinearSystem::new`] but rescales `b` to unit length first.
    pub fn normalized(a: CMatrix, b: CVector) -> Result<Self> {
        let norm = b.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::RangeError("b must be a nonzero finite vector".into()));
        }
        Self::new(a, b.unscale(norm))
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn b(&self) -> &CVector {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }
}

/// Hermitian embedding `[[0, A'], [A'†, 0]]` of an arbitrary matrix.
pub fn hermitize(ap: &CMatrix) -> CMatrix {
    let (m, k) = ap.shape();
    let mut out = CMatrix::zeros(m + k, m + k);
    out.view_mut((0, m), (m, k)).copy_from(ap);
    out.view_mut((m, 0), (k, m)).copy_from(&ap.adjoint());
    out
}

/// The 2x2 and 3x3 example systems used throughout the figures.
pub fn builtin_matrix(name: &str) -> Option<CMatrix> {
    match name {
        "paper-2d" => Some(tensor::real_matrix(&[&[1.5, 0.5], &[0.5, 1.5]])),
        "paper-3d" => {
            let s = 1.0 / 6.0;
            Some(tensor::real_matrix(&[
                &[14.0 * s, -4.0 * s, -4.0 * s],
                &[-4.0 * s, 11.0 * s, -s],
                &[-4.0 * s, -s, 11.0 * s],
            ]))
        }
        _ => None,
    }
}

/// Two-dimensional system sharing the eigenvectors `(1,−1)/√2`, `(1,1)/√2` of
/// the 2x2 example, with eigenvalues `(1, κ)`.
pub fn kappa_family(kappa: f64, b: CVector) -> Result<LinearSystem> {
    if !kappa.is_finite() || kappa < 1.0 {
        return Err(Error::RangeError(format!("condition number κ = {kappa} must be ≥ 1")));
    }
    let (d, o) = ((1.0 + kappa) / 2.0, (kappa - 1.0) / 2.0);
    LinearSystem::new(tensor::real_matrix(&[&[d, o], &[o, d]]), b)
}

/// Eigenbasis `U` used to build systems from a prescribed spectrum: the example
/// eigenvectors for N = 2 and N = 3, the computational basis otherwise.
pub fn reference_eigenbasis(n: usize) -> CMatrix {
    let h = FRAC_1_SQRT_2;
    match n {
        2 => tensor::real_matrix(&[&[h, h], &[-h, h]]),
        3 => {
            let (a, b, c) = (1.0 / 3f64.sqrt(), h, 1.0 / 6f64.sqrt());
            tensor::real_matrix(&[&[a, 0.0, -2.0 * c], &[a, b, c], &[a, -b, c]])
        }
        _ => CMatrix::identity(n, n),
    }
}

/// `A = U · diag(λ) · U†` with `U` from [`reference_eigenbasis`].
pub fn system_with_spectrum(eigenvalues: &[f64], b: CVector) -> Result<LinearSystem> {
    let n = eigenvalues.len();
    if n == 0 {
        return Err(Error::ShapeError("at least one eigenvalue required".into()));
    }
    let u = reference_eigenbasis(n);
    let d = CMatrix::from_diagonal(&tensor::real_vector(eigenvalues));
    LinearSystem::new(&u * d * u.adjoint(), b)
}

/// How the circuit constant is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CircuitConstant {
    /// `DEFAULT_C_RATIO · λ_min`.
    #[default]
    Auto,
    Fixed(f64),
}

impl From<f64> for CircuitConstant {
    fn from(c: f64) -> Self {
        CircuitConstant::Fixed(c)
    }
}

/// Eigen-data of a system, grouped into distinct eigenvalue labels.
#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Distinct eigenvalues, ascending.
    pub lambdas: Vec<f64>,
    /// One unit vector per label; for a degenerate eigenspace this is the
    /// normalized projection of `b` onto it.
    pub vectors: Vec<CVector>,
    /// `β_i = ⟨u_i|b⟩`.
    pub betas: Vec<Complex64>,
    /// Width of the eigenvalue register in qubits.
    pub n: u32,
    /// Evolution time, `2π / 2ⁿ`.
    pub t: f64,
    /// Circuit constant.
    pub c: f64,
    /// Scaled eigenvalues `2ⁿ λ t / 2π` when all are integral.
    pub scaled: Option<Vec<u64>>,
    /// Whether eigenvalues had to be merged into shared labels.
    pub degenerate: bool,
    /// Original right-hand side.
    pub b: CVector,
}

impl SpectralData {
    /// Dimension `N` of the linear system.
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambdas[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.lambdas.last().expect("nonempty spectrum")
    }

    /// `|β_i|²`.
    pub fn weights(&self) -> Vec<f64> {
        self.betas.iter().map(|b| b.norm_sqr()).collect()
    }

    /// `C / λ_i`, the |1⟩ amplitude of each rotation. Ratios within rounding
    /// of 1 are snapped to 1 so that `√(1 − r²)` does not pick up `O(√ε)` noise.
    pub fn ratios(&self) -> Vec<f64> {
        self.lambdas
            .iter()
            .map(|l| {
                let r = self.c / l;
                if r >= 1.0 - 1e-12 {
                    1.0
                } else {
                    r
                }
            })
            .collect()
    }

    /// `(√(1 − C²/λ_i²), C/λ_i)` for each label.
    pub fn rotations(&self) -> Vec<(f64, f64)> {
        self.ratios()
            .into_iter()
            .map(|r| ((1.0 - r * r).max(0.0).sqrt(), r))
            .collect()
    }

    /// Clean rotation half-angles `sin⁻¹(C/λ_i)`.
    pub fn half_angles(&self) -> Vec<f64> {
        self.ratios().into_iter().map(f64::asin).collect()
    }

    /// Number of labels with a non-negligible overlap with `b`.
    pub fn support(&self) -> usize {
        self.betas.iter().filter(|b| b.norm() > SUPPORT_TOL).count()
    }

    /// `b` lies in a single eigenspace.
    pub fn is_trivial(&self) -> bool {
        self.support() <= 1
    }
}

/// Distinct eigenvalues, their label vectors, the overlaps `β` and whether any
/// eigenvalues were merged.
type EigenGroups = (Vec<f64>, Vec<CVector>, Vec<Complex64>, bool);

fn eigen_groups(sys: &LinearSystem) -> Result<EigenGroups> {
    let eig = tensor::hermitian_eig(sys.a())?;
    let lambda_min = eig.values[0];
    if lambda_min <= 1e-12 {
        return Err(Error::SpectrumError { lambda_min });
    }
    let b = sys.b();
    let mut lambdas = Vec::new();
    let mut vectors = Vec::new();
    let mut betas = Vec::new();
    let mut degenerate = false;
    let mut i = 0;
    while i < eig.values.len() {
        let head = eig.values[i];
        let mut j = i + 1;
        while j < eig.values.len()
            && (eig.values[j] - head).abs() <= DEGENERACY_TOL * head.abs().max(1.0)
        {
            j += 1;
        }
        let group = &eig.vectors[i..j];
        let mean = eig.values[i..j].iter().sum::<f64>() / (j - i) as f64;
        let vector = if group.len() == 1 {
            group[0].clone()
        } else {
            degenerate = true;
            let projection: CVector = group
                .iter()
                .map(|v| v * v.dotc(b))
                .fold(CVector::zeros(b.len()), |acc, x| acc + x);
            let norm = projection.norm();
            if norm > 1e-14 {
                let mut v = projection.unscale(norm);
                tensor::fix_phase(&mut v);
                v
            } else {
                group[0].clone()
            }
        };
        betas.push(vector.dotc(b));
        vectors.push(vector);
        lambdas.push(mean);
        i = j;
    }
    Ok((lambdas, vectors, betas, degenerate))
}

fn resolve_c(c: CircuitConstant, lambda_min: f64) -> Result<f64> {
    match c {
        CircuitConstant::Auto => Ok(DEFAULT_C_RATIO * lambda_min),
        CircuitConstant::Fixed(c) => {
            if c > 0.0 && c <= lambda_min * (1.0 + 1e-12) {
                Ok(c.min(lambda_min))
            } else {
                Err(Error::CircuitConstantError { c, lambda_min })
            }
        }
    }
}

fn default_width(lambda_max: f64) -> u32 {
    ((lambda_max + 1.0).log2() - 1e-12).ceil().max(1.0) as u32
}

fn integer_labels(lambdas: &[f64], n: u32, t: f64) -> Result<Vec<u64>> {
    let scale = 2f64.powi(n as i32) * t / (2.0 * PI);
    lambdas
        .iter()
        .map(|&l| {
            let scaled = l * scale;
            let rounded = scaled.round();
            if (scaled - rounded).abs() > INTEGER_TOL {
                Err(Error::EigenvalueScalingError { scaled })
            } else {
                Ok(rounded as u64)
            }
        })
        .collect()
}

fn decompose(sys: &LinearSystem, c: CircuitConstant, n: Option<u32>, strict: bool) -> Result<SpectralData> {
    let (lambdas, vectors, betas, degenerate) = eigen_groups(sys)?;
    let c = resolve_c(c, lambdas[0])?;
    let lambda_max = *lambdas.last().unwrap();
    let n = n.unwrap_or_else(|| default_width(lambda_max));
    if n == 0 || n > 62 {
        return Err(Error::RangeError(format!("register width n = {n} must be in 1..=62")));
    }
    let t = 2.0 * PI / 2f64.powi(n as i32);
    let scaled = match integer_labels(&lambdas, n, t) {
        Ok(labels) => {
            if let Some(&top) = labels.last() {
                if top >= 1u64 << n {
                    return Err(Error::RangeError(format!(
                        "a {n}-qubit register cannot hold the scaled eigenvalue {top}"
                    )));
                }
            }
            Some(labels)
        }
        Err(e) if strict => return Err(e),
        Err(_) => None,
    };
    Ok(SpectralData {
        lambdas,
        vectors,
        betas,
        n,
        t,
        c,
        scaled,
        degenerate,
        b: sys.b().clone(),
    })
}

/// Eigendecomposition of the system in the form the algorithm consumes.
///
/// `n` defaults to `⌈log₂(λ_max + 1)⌉` and `t = 2π/2ⁿ`, so the scaled
/// eigenvalues equal the eigenvalues; they must then be integers.
pub fn spectral_decompose(
    sys: &LinearSystem,
    c: impl Into<CircuitConstant>,
    n: Option<u32>,
) -> Result<SpectralData> {
    decompose(sys, c.into(), n, true)
}

/// Like [`spectral_decompose`], but accepts non-integer eigenvalues. The
/// analytic register mode only needs orthonormal labels; micro mode is then
/// unavailable (`scaled` is `None`).
pub fn spectral_decompose_analytic(
    sys: &LinearSystem,
    c: impl Into<CircuitConstant>,
) -> Result<SpectralData> {
    decompose(sys, c.into(), None, false)
}

/// Algorithm stage after which the register state is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    /// All registers in |0⟩.
    PsiIn,
    /// `b` loaded into U.
    Psi0,
    /// After phase estimation.
    Psi1,
    /// After the eigenvalue-controlled rotation.
    Psi2,
    /// After uncomputing the phase estimation.
    Psi3,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::PsiIn, Stage::Psi0, Stage::Psi1, Stage::Psi2, Stage::Psi3];

    pub fn label(self) -> &'static str {
        match self {
            Stage::PsiIn => "psi_in",
            Stage::Psi0 => "psi_0",
            Stage::Psi1 => "psi_1",
            Stage::Psi2 => "psi_2",
            Stage::Psi3 => "psi_3",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.label() == s || st.label().replace('_', "") == s)
            .ok_or_else(|| Error::StageError(s.to_string()))
    }
}

/// Layout of the eigenvalue register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegisterMode {
    /// One orthonormal label per distinct eigenvalue, `d_Λ = N`.
    #[default]
    Analytic,
    /// Binary encoding of the scaled eigenvalue, `d_Λ = 2ⁿ`.
    Micro,
}

/// Pure state of `Λ ⊗ U ⊗ R` after a given stage.
#[derive(Debug, Clone, PartialEq)]
pub struct TripartiteState {
    stage: Stage,
    amplitudes: CVector,
    dims: SubsystemDims,
}

impl TripartiteState {
    pub fn new(stage: Stage, amplitudes: CVector, dims: SubsystemDims) -> Result<Self> {
        if dims.parties() != 3 || dims.as_slice()[R] != 2 {
            return Err(Error::ShapeError(format!(
                "expected dims (d_Λ, d_U, 2), got {:?}",
                dims.as_slice()
            )));
        }
        if dims.total() != amplitudes.len() {
            return Err(Error::ShapeError(format!(
                "dims {:?} do not match {} amplitudes",
                dims.as_slice(),
                amplitudes.len()
            )));
        }
        if (amplitudes.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::Numerical(format!(
                "state norm {} deviates from 1",
                amplitudes.norm()
            )));
        }
        Ok(Self { stage, amplitudes, dims })
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dims(&self) -> &SubsystemDims {
        &self.dims
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }
}

/// Exact state after `stage` in the analytic register mode.
pub fn build_state(spec: &SpectralData, stage: Stage) -> Result<TripartiteState> {
    build_state_with_rotations(spec, stage, RegisterMode::Analytic, &spec.rotations())
}

/// Builds a stage state with explicit `(|0⟩, |1⟩)` rotation amplitudes per
/// eigenvalue label. Stages before the rotation ignore `rotations`.
pub fn build_state_with_rotations(
    spec: &SpectralData,
    stage: Stage,
    mode: RegisterMode,
    rotations: &[(f64, f64)],
) -> Result<TripartiteState> {
    if rotations.len() != spec.lambdas.len() {
        return Err(Error::ShapeError(format!(
            "{} rotations for {} eigenvalue labels",
            rotations.len(),
            spec.lambdas.len()
        )));
    }
    let n_dim = spec.dim();
    let (d_lambda, labels): (usize, Vec<usize>) = match mode {
        RegisterMode::Analytic => (n_dim, (0..spec.lambdas.len()).collect()),
        RegisterMode::Micro => {
            let scaled = spec.scaled.as_ref().ok_or(Error::EigenvalueScalingError {
                scaled: spec.lambdas.iter().copied().find(|l| l.fract() != 0.0).unwrap_or(f64::NAN),
            })?;
            if spec.n > MAX_MICRO_QUBITS {
                return Err(Error::SizeError(format!(
                    "micro mode supports at most {MAX_MICRO_QUBITS} register qubits, got {}",
                    spec.n
                )));
            }
            (1usize << spec.n, scaled.iter().map(|&s| s as usize).collect())
        }
    };
    let dims = SubsystemDims::new(vec![d_lambda, n_dim, 2])?;
    let mut psi = CVector::zeros(dims.total());
    if stage == Stage::PsiIn {
        psi[0] = Complex64::new(1.0, 0.0);
        return TripartiteState::new(stage, psi, dims);
    }
    for (i, (u, &beta)) in spec.vectors.iter().zip(&spec.betas).enumerate() {
        let label = match stage {
            Stage::Psi1 | Stage::Psi2 => labels[i],
            _ => 0,
        };
        let (r0, r1) = match stage {
            Stage::Psi2 | Stage::Psi3 => rotations[i],
            _ => (1.0, 0.0),
        };
        for (k, &uk) in u.iter().enumerate() {
            let base = (label * n_dim + k) * 2;
            let amp = beta * uk;
            psi[base] += amp * r0;
            psi[base + 1] += amp * r1;
        }
    }
    TripartiteState::new(stage, psi, dims)
}

/// Post-selected output of the algorithm next to the classical answer.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Normalized `|ψ_x⟩ ∝ Σ C β_i/λ_i |u_i⟩`.
    pub x_state: CVector,
    /// Probability of reading |1⟩ on R.
    pub sp: f64,
    /// `A⁻¹ b` (unnormalized).
    pub x_classical: CVector,
}

pub fn solution(spec: &SpectralData) -> Solution {
    let n = spec.dim();
    let mut x = CVector::zeros(n);
    for ((u, &beta), &l) in spec.vectors.iter().zip(&spec.betas).zip(&spec.lambdas) {
        x += u * (beta / l);
    }
    let sp = spec
        .weights()
        .iter()
        .zip(spec.ratios())
        .map(|(w, r)| w * r * r)
        .sum();
    let x_state = x.unscale(x.norm());
    Solution { x_state, sp, x_classical: x }
}

/// `κ = λ_max / λ_min`.
pub fn condition_number(spec: &SpectralData) -> f64 {
    spec.lambda_max() / spec.lambda_min()
}
