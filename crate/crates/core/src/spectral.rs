//! Sine eigenbasis of the Dirichlet Laplacian on the unit interval and the
//! spectral machinery built on it: physical/spectral transforms, diagonal
//! actions of functions of the operator, and Sobolev norms.
//!
//! On `D = (0,1)` with homogeneous Dirichlet conditions the negative Laplacian
//! has eigenpairs `λ_i = π²i²`, `φ_i(x) = √2 sin(iπx)`, and its fractional
//! power acts diagonally with eigenvalues `λ_i^α`. A field is stored by its
//! first `M` Galerkin coefficients `⟨u, φ_i⟩`; nonlinear terms are evaluated
//! pointwise on a uniform collocation grid of `G ≥ 2M+1` interior nodes, the
//! smallest grid on which the discrete sine quadrature is exact for products
//! of two retained modes.

use std::f64::consts::{PI, SQRT_2};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("mode count must be at least 1")]
    NoModes,
    #[error("grid size {grid} violates the aliasing guard; need G >= 2M+1 = {min} for M = {modes} modes")]
    GridTooSmall {
        modes: usize,
        grid: usize,
        min: usize,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Dirichlet eigenbasis of `-Δ` on `(0,1)`: eigenvalues `λ_i = π²i²` and the
/// values of `φ_i(x) = √2 sin(iπx)` on the collocation grid `x_g = g/(G+1)`.
///
/// The transforms are dense matrix products; at the mode counts used here
/// (`M ≤ 512`) this is simpler and bit-stable, and a fast sine transform
/// remains a drop-in replacement.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    modes: usize,
    lambdas: Vec<f64>,
    grid_size: usize,
    /// Row-major `G x M`: entry `(g, i)` is `√2 sin((i+1) π x_{g+1})`.
    sine: Vec<f64>,
}

impl EigenBasis {
    /// Builds the basis with `modes` retained eigenpairs and `grid_size`
    /// interior collocation nodes. Rejects grids below the de-aliasing
    /// threshold `2M+1`.
    pub fn build(modes: usize, grid_size: usize) -> Result<Self, SpectralError> {
        if modes == 0 {
            return Err(SpectralError::NoModes);
        }
        if grid_size < 2 * modes + 1 {
            return Err(SpectralError::GridTooSmall {
                modes,
                grid: grid_size,
                min: 2 * modes + 1,
            });
        }
        let lambdas: Vec<f64> = (1..=modes)
            .map(|i| PI * PI * (i as f64) * (i as f64))
            .collect();
        let period = 2 * (grid_size + 1);
        let mut sine = vec![0.0; grid_size * modes];
        for g in 0..grid_size {
            let row = &mut sine[g * modes..(g + 1) * modes];
            for (i, entry) in row.iter_mut().enumerate() {
                // Reduce i*g modulo the sine period in integer arithmetic so the
                // angle stays in [0, 2π) even for large mode counts.
                let k = ((i + 1) * (g + 1)) % period;
                *entry = SQRT_2 * (PI * k as f64 / (grid_size + 1) as f64).sin();
            }
        }
        Ok(Self {
            modes,
            lambdas,
            grid_size,
            sine,
        })
    }

    /// Builds the basis on its minimal de-aliasing grid `G = 2M+1`.
    pub fn with_dealiased_grid(modes: usize) -> Result<Self, SpectralError> {
        Self::build(modes, 2 * modes + 1)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// Eigenvalues `λ_1 < λ_2 < … < λ_M` of `-Δ`.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Collocation node `x_g = (g+1)/(G+1)` for `g = 0..G`.
    pub fn node(&self, g: usize) -> f64 {
        (g + 1) as f64 / (self.grid_size + 1) as f64
    }

    /// Evaluates the field on the collocation grid:
    /// `values[g] = Σ_i coeffs[i] √2 sin((i+1)πx_g)`.
    pub fn to_physical(&self, u: &SpectralField) -> Result<Vec<f64>, SpectralError> {
        if u.len() != self.modes {
            return Err(SpectralError::DimensionMismatch {
                expected: self.modes,
                got: u.len(),
            });
        }
        let values = self
            .sine
            .chunks_exact(self.modes)
            .map(|row| dot(row, &u.coeffs))
            .collect();
        Ok(values)
    }

    /// Projects grid values onto the retained modes with the discrete sine
    /// quadrature `coeffs[i] = (1/(G+1)) Σ_g values[g] √2 sin((i+1)πx_g)`.
    /// Exact for fields in the span of the first `M` modes.
    pub fn to_spectral(&self, values: &[f64]) -> Result<SpectralField, SpectralError> {
        if values.len() != self.grid_size {
            return Err(SpectralError::DimensionMismatch {
                expected: self.grid_size,
                got: values.len(),
            });
        }
        let mut coeffs = vec![0.0; self.modes];
        for (row, &v) in self.sine.chunks_exact(self.modes).zip(values) {
            for (c, &s) in coeffs.iter_mut().zip(row) {
                *c += v * s;
            }
        }
        let scale = 1.0 / (self.grid_size + 1) as f64;
        for c in &mut coeffs {
            *c *= scale;
        }
        Ok(SpectralField::from_coeffs(coeffs))
    }

    /// Applies a function of the operator diagonally:
    /// `coeffs'[i] = g(λ_i) coeffs[i]`.
    ///
    /// This realizes `A^α` (`g(λ) = λ^α`), the semigroup `S(t)`
    /// (`g(λ) = e^{-λ^α t}`) and the semi-implicit resolvent
    /// (`g(λ) = 1/(1+τλ^α)`).
    pub fn scale_by_spectrum<F>(&self, u: &SpectralField, g: F) -> Result<SpectralField, SpectralError>
    where
        F: Fn(f64) -> f64,
    {
        if u.len() != self.modes {
            return Err(SpectralError::DimensionMismatch {
                expected: self.modes,
                got: u.len(),
            });
        }
        let coeffs = self
            .lambdas
            .iter()
            .zip(&u.coeffs)
            .map(|(&lam, &c)| g(lam) * c)
            .collect();
        Ok(SpectralField::from_coeffs(coeffs))
    }

    /// Sobolev norm `‖u‖_ν = (Σ_i λ_i^ν ⟨u,φ_i⟩²)^{1/2}`; `ν = 0` is the
    /// L² norm by Parseval.
    pub fn sobolev_norm(&self, u: &SpectralField, nu: f64) -> f64 {
        assert_eq!(u.len(), self.modes, "field does not match basis");
        if nu == 0.0 {
            return u.l2_norm();
        }
        self.lambdas
            .iter()
            .zip(&u.coeffs)
            .map(|(&lam, &c)| lam.powf(nu) * c * c)
            .sum::<f64>()
            .sqrt()
    }
}

/// Dot product with four independent accumulators; fixed summation order.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n4 = a.len() / 4 * 4;
    let mut s = [0.0f64; 4];
    let mut i = 0;
    while i < n4 {
        s[0] += a[i] * b[i];
        s[1] += a[i + 1] * b[i + 1];
        s[2] += a[i + 2] * b[i + 2];
        s[3] += a[i + 3] * b[i + 3];
        i += 4;
    }
    let mut r = (s[0] + s[1]) + (s[2] + s[3]);
    for j in n4..a.len() {
        r += a[j] * b[j];
    }
    r
}

/// A field on `(0,1)` represented by its Galerkin coefficients `⟨u, φ_i⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn zeros(modes: usize) -> Self {
        Self {
            coeffs: vec![0.0; modes],
        }
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Parseval L² norm `(Σ_i coeffs[i]²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// L² distance to another field in the same basis.
    pub fn l2_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len(), "field dimensions differ");
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "field dimensions differ");
        Self::from_coeffs(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// In-place `self += scale * other`.
    pub fn axpy(&mut self, scale: f64, other: &Self) {
        assert_eq!(self.len(), other.len(), "field dimensions differ");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += scale * b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}
