//! Run configuration: a JSON document whose fields command-line flags override.

use std::path::Path;

use hhl_lab_core::hhl::{self, CircuitConstant, LinearSystem, SpectralData, Stage};
use hhl_lab_core::{CMatrix, CVector, Error as CoreError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// A matrix or vector entry: a real number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    pub fn value(self) -> Complex64 {
        match self {
            Entry::Real(x) => Complex64::new(x, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// `C` as a number or the keyword `"auto"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CSetting {
    Value(f64),
    Keyword(String),
}

impl CSetting {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(CSetting::Keyword("auto".into()));
        }
        s.trim()
            .parse()
            .map(CSetting::Value)
            .map_err(|_| CliError::validation(format!("--c expects a number or \"auto\", got {s:?}")))
    }

    pub fn constant(&self) -> Result<CircuitConstant, CliError> {
        match self {
            CSetting::Value(c) => Ok(CircuitConstant::Fixed(*c)),
            CSetting::Keyword(k) if k.eq_ignore_ascii_case("auto") => Ok(CircuitConstant::Auto),
            CSetting::Keyword(k) => Err(CliError::validation(format!("unknown C setting {k:?}"))),
        }
    }
}

/// One sweep axis, `min:max:steps` with both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::validation(format!("grid {s:?} must look like min:max:steps"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let min: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let max: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if !min.is_finite() || !max.is_finite() || min > max {
            return Err(bad());
        }
        if steps < 2 {
            return Err(CliError::validation(format!("grid {s:?} needs at least 2 steps")));
        }
        Ok(Self { min, max, steps })
    }

    pub fn points(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                let k = k as f64;
                (self.min * (last - k) + self.max * k) / last
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Builtin name (`paper-2d`, `paper-3d`) or `kappa:<κ>`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<Entry>>>,
    /// Eigenvalues of a system built on a fixed reference eigenbasis.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Entry>>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub c: Option<CSetting>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realizations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::validation(format!("bad config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fields set in `top` replace those in `self`. A system given in `top`
    /// also clears any matrix or spectrum inherited from `self`.
    pub fn overlay(mut self, top: RunConfig) -> Self {
        if top.system.is_some() || top.matrix.is_some() || top.eigenvalues.is_some() {
            self.system = None;
            self.matrix = None;
            self.eigenvalues = None;
        }
        overlay!(self, top, system, matrix, eigenvalues, b, c, n, stage, grid, sigma, mean, realizations, seed);
        self
    }

    pub fn circuit_constant(&self) -> Result<CircuitConstant, CliError> {
        self.c.as_ref().map_or(Ok(CircuitConstant::Auto), CSetting::constant)
    }

    pub fn stage(&self) -> Result<Stage, CliError> {
        match &self.stage {
            None => Ok(Stage::Psi2),
            Some(s) => Ok(s.parse()?),
        }
    }

    pub fn axes(&self) -> Result<Vec<Axis>, CliError> {
        self.grid.iter().flatten().map(|s| Axis::parse(s)).collect()
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// The system matrix, before any right-hand side is attached.
    pub fn matrix(&self) -> Result<CMatrix, CliError> {
        if let Some(eigs) = &self.eigenvalues {
            if eigs.is_empty() {
                return Err(CliError::validation("empty eigenvalue list"));
            }
            let n = eigs.len();
            return Ok(hhl::system_with_spectrum(eigs, hhl_lab_core::tensor::basis(n, 0))?.a().clone());
        }
        if let Some(rows) = &self.matrix {
            let n = rows.len();
            if n == 0 || rows.iter().any(|r| r.len() != n) {
                return Err(CoreError::ShapeError(format!(
                    "matrix must be square and nonempty, got {} rows of lengths {:?}",
                    n,
                    rows.iter().map(Vec::len).collect::<Vec<_>>()
                ))
                .into());
            }
            return Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j].value()));
        }
        let name = self.system.as_deref().unwrap_or("paper-2d");
        if let Some(m) = hhl::builtin_matrix(name) {
            return Ok(m);
        }
        if let Some(k) = name.strip_prefix("kappa:") {
            let kappa: f64 = k
                .trim()
                .parse()
                .map_err(|_| CliError::validation(format!("bad condition number in {name:?}")))?;
            return Ok(hhl::kappa_family(kappa, hhl_lab_core::tensor::basis(2, 0))?.a().clone());
        }
        Err(CliError::validation(format!("unknown system {name:?}")))
    }

    /// The right-hand side for an `n`-dimensional system, normalized.
    /// A single value `b₀` for a 2-dimensional system means `(b₀, √(1 − b₀²))`.
    pub fn rhs(&self, n: usize) -> Result<CVector, CliError> {
        match &self.b {
            None => Ok(hhl_lab_core::tensor::basis(n, 0)),
            Some(b) if b.len() == 1 && n == 2 => {
                let Entry::Real(b0) = b[0] else {
                    return Err(CliError::validation("a single b component must be real"));
                };
                complete_2d(b0)
            }
            Some(b) => Ok(CVector::from_iterator(b.len(), b.iter().map(|e| e.value()))),
        }
    }

    pub fn linear_system(&self) -> Result<LinearSystem, CliError> {
        let a = self.matrix()?;
        let b = self.rhs(a.nrows())?;
        Ok(LinearSystem::normalized(a, b)?)
    }

    /// Spectral data in analytic mode; an explicit `n` demands integer
    /// scaled eigenvalues.
    pub fn decompose(&self, sys: &LinearSystem) -> Result<SpectralData, CliError> {
        let c = self.circuit_constant()?;
        Ok(match self.n {
            Some(n) => hhl::spectral_decompose(sys, c, Some(n))?,
            None => hhl::spectral_decompose_analytic(sys, c)?,
        })
    }

    pub fn spectral(&self) -> Result<SpectralData, CliError> {
        self.decompose(&self.linear_system()?)
    }
}

/// `(b₀, √(1 − b₀²))`.
pub fn complete_2d(b0: f64) -> Result<CVector, CliError> {
    if !b0.is_finite() || b0.abs() > 1.0 {
        return Err(CoreError::RangeError(format!("b₀ = {b0} must lie in [-1, 1]")).into());
    }
    Ok(hhl_lab_core::tensor::real_vector(&[b0, (1.0 - b0 * b0).max(0.0).sqrt()]))
}

/// Comma-separated reals.
pub fn parse_list(flag: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| CliError::validation(format!("{flag} expects comma-separated numbers, got {s:?}")))
        })
        .collect()
}
