//! Dense complex linear algebra on multipartite states: Hermitian
//! eigendecomposition, Schmidt spectra, partial trace and partial transpose.
//!
//! States are stored as flat amplitude vectors in row-major party order: for
//! local dimensions `(d_0, …, d_{k-1})` the basis state `|i_0 … i_{k-1}⟩` sits at
//! `Σ_p i_p · Π_{q>p} d_q`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest tolerated `|M_ij − conj(M_ji)|` for input declared Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Ordered local dimensions of a composite system.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsystemDims(Vec<usize>);

impl SubsystemDims {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::ShapeError(format!(
                "local dimensions must be positive, got {dims:?}"
            )));
        }
        Ok(Self(dims))
    }

    pub fn parties(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Product of the local dimensions of `parties`.
    pub fn sub_total(&self, parties: &[usize]) -> usize {
        parties.iter().map(|&p| self.0[p]).product()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if self.total() != len {
            return Err(Error::ShapeError(format!(
                "dims {:?} describe a {}-dimensional space, got length {len}",
                self.0,
                self.total()
            )));
        }
        Ok(())
    }

    /// Validates a bipartition side and returns its parties sorted, plus the
    /// complement.
    fn split(&self, cut: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
        let k = self.parties();
        let mut mask = vec![false; k];
        for &p in cut {
            if p >= k {
                return Err(Error::InvalidCut(format!("party {p} out of range 0..{k}")));
            }
            if mask[p] {
                return Err(Error::InvalidCut(format!("party {p} listed twice")));
            }
            mask[p] = true;
        }
        if cut.is_empty() || cut.len() == k {
            return Err(Error::InvalidCut(format!(
                "cut {cut:?} must be a nonempty proper subset of {k} parties"
            )));
        }
        let side: Vec<usize> = (0..k).filter(|&p| mask[p]).collect();
        let rest: Vec<usize> = (0..k).filter(|&p| !mask[p]).collect();
        Ok((side, rest))
    }

    /// For every flat index, its (row, col) position once the parties in
    /// `side` are grouped as rows and `rest` as columns.
    fn bipartite_positions(&self, side: &[usize], rest: &[usize]) -> Vec<(usize, usize)> {
        let dims = &self.0;
        let k = dims.len();
        let mut digits = vec![0usize; k];
        let mut out = Vec::with_capacity(self.total());
        for _ in 0..self.total() {
            let fold = |ps: &[usize]| ps.iter().fold(0usize, |acc, &p| acc * dims[p] + digits[p]);
            out.push((fold(side), fold(rest)));
            // odometer increment, last party fastest
            for p in (0..k).rev() {
                digits[p] += 1;
                if digits[p] < dims[p] {
                    break;
                }
                digits[p] = 0;
            }
        }
        out
    }
}

/// Spectrum of a Hermitian matrix, ascending, with one eigenvector per value.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<CVector>,
}

/// Largest entrywise deviation from Hermiticity; `None` for non-square input.
pub fn hermiticity_deviation(m: &CMatrix) -> Option<f64> {
    if !m.is_square() {
        return None;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    Some(worst)
}

/// Rotates `v` so that its largest-magnitude entry (first one on ties) is real
/// and positive.
pub fn fix_phase(v: &mut CVector) {
    let max = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-10))
        .unwrap_or(0);
    let phase = v[pivot] / v[pivot].norm();
    let rot = phase.conj();
    v.iter_mut().for_each(|z| *z *= rot);
    // kill the residual imaginary part left by rounding on the pivot
    v[pivot] = Complex64::new(v[pivot].re, 0.0);
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues and
/// deterministic eigenvector phases (see [`fix_phase`]).
pub fn hermitian_eig(m: &CMatrix) -> Result<Eigen> {
    let deviation = hermiticity_deviation(m).ok_or_else(|| {
        Error::ShapeError(format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols()))
    })?;
    if deviation > HERMITIAN_TOL {
        return Err(Error::HermiticityViolation { deviation });
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut v: CVector = eig.eigenvectors.column(i).into_owned();
            let norm = v.norm();
            v.unscale_mut(norm);
            fix_phase(&mut v);
            v
        })
        .collect();
    Ok(Eigen { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    let deviation = hermiticity_deviation(m).ok_or_else(|| {
        Error::ShapeError(format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols()))
    })?;
    if deviation > HERMITIAN_TOL {
        return Err(Error::HermiticityViolation { deviation });
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Reshapes a state into the matrix `M[side, rest]` for the given bipartition.
pub fn reshape_across(psi: &CVector, dims: &SubsystemDims, cut: &[usize]) -> Result<CMatrix> {
    dims.check_len(psi.len())?;
    let (side, rest) = dims.split(cut)?;
    let mut m = CMatrix::zeros(dims.sub_total(&side), dims.sub_total(&rest));
    for (flat, (r, c)) in dims.bipartite_positions(&side, &rest).into_iter().enumerate() {
        m[(r, c)] = psi[flat];
    }
    Ok(m)
}

/// Squared Schmidt coefficients of `psi` across `cut : complement`, descending.
pub fn schmidt_squared(psi: &CVector, dims: &SubsystemDims, cut: &[usize]) -> Result<Vec<f64>> {
    let m = reshape_across(psi, dims, cut)?;
    let m = if m.nrows() > m.ncols() { m.transpose() } else { m };
    let mut s: Vec<f64> = m.singular_values().iter().map(|x| x * x).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Reduced density matrix of a pure state on the parties in `keep`.
pub fn reduce_state(psi: &CVector, dims: &SubsystemDims, keep: &[usize]) -> Result<CMatrix> {
    let m = reshape_across(psi, dims, keep)?;
    Ok(&m * m.adjoint())
}

/// Partial trace of a density matrix, keeping the parties in `keep`.
pub fn partial_trace(rho: &CMatrix, dims: &SubsystemDims, keep: &[usize]) -> Result<CMatrix> {
    if !rho.is_square() {
        return Err(Error::ShapeError(format!(
            "density matrix must be square, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    dims.check_len(rho.nrows())?;
    let (side, rest) = dims.split(keep)?;
    let dk = dims.sub_total(&side);
    let dr = dims.sub_total(&rest);
    let mut flat = vec![0usize; dk * dr];
    for (f, (r, c)) in dims.bipartite_positions(&side, &rest).into_iter().enumerate() {
        flat[r * dr + c] = f;
    }
    Ok(CMatrix::from_fn(dk, dk, |i, j| {
        (0..dr).map(|c| rho[(flat[i * dr + c], flat[j * dr + c])]).sum()
    }))
}

/// Which factor of a two-party space a partial transpose acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    First,
    Second,
}

/// Partial transpose of a bipartite operator on `C^{d_a} ⊗ C^{d_b}`.
pub fn partial_transpose(rho: &CMatrix, dims: &SubsystemDims, party: Party) -> Result<CMatrix> {
    let &[da, db] = dims.as_slice() else {
        return Err(Error::ShapeError(format!(
            "partial transpose needs two parties, got {:?}",
            dims.as_slice()
        )));
    };
    if !rho.is_square() || rho.nrows() != da * db {
        return Err(Error::ShapeError(format!(
            "{}x{} operator does not act on {da}x{db}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let d = da * db;
    Ok(CMatrix::from_fn(d, d, |row, col| {
        let (a, b) = (row / db, row % db);
        let (a2, b2) = (col / db, col % db);
        match party {
            Party::First => rho[(a2 * db + b, a * db + b2)],
            Party::Second => rho[(a * db + b2, a2 * db + b)],
        }
    }))
}

/// `Tr(ρ²)` for a Hermitian `ρ`.
pub fn purity(rho: &CMatrix) -> f64 {
    rho.iter().map(|z| z.norm_sqr()).sum()
}

/// Largest entrywise modulus of `a − b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

/// Outer product `|ψ⟩⟨ψ|`.
pub fn projector(psi: &CVector) -> CMatrix {
    psi * psi.adjoint()
}

/// Kronecker product of state vectors, first factor slowest.
pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    CVector::from_fn(a.len() * b.len(), |i, _| a[i / b.len()] * b[i % b.len()])
}

pub fn real_vector(xs: &[f64]) -> CVector {
    CVector::from_iterator(xs.len(), xs.iter().map(|&x| Complex64::new(x, 0.0)))
}

pub fn real_matrix(rows: &[&[f64]]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(n, m, |i, j| Complex64::new(rows[i][j], 0.0))
}

/// Computational basis vector `|k⟩` of a `dim`-dimensional space.
pub fn basis(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = Complex64::new(1.0, 0.0);
    v
}
