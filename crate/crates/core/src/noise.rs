//! Exact sampling of the spectral Ornstein–Uhlenbeck stochastic convolution.
//!
//! The driving noise is `B(x,t) = Σ_i σ_i β^i(t) φ_i(x)` with independent
//! scalar Brownian motions `β^i` and `σ_i = λ_i^{-ρ}`. Because the semigroup
//! acts diagonally, the stochastic convolution `∫₀^t S(t-s) dB(s)` is a
//! family of independent scalar OU processes, and the per-step integrals
//!
//! `I_n^i = ∫_{t_n}^{t_{n+1}} e^{-λ_i^α (t_{n+1}-r)} dβ^i(r)`
//!
//! are centred Gaussians with variance `(1 - e^{-2λ_i^α τ}) / (2λ_i^α)` by the
//! Itô isometry, so they can be drawn without any discretization error.
//! The semigroup identity `S(t+s) = S(t)S(s)` makes a fine ladder of such
//! integrals exactly aggregable to every coarser dyadic grid, which is what
//! couples the refinement levels of the convergence harness to one Brownian
//! path.

use std::io::{self, Read, Write};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::spectral::{EigenBasis, SpectralField};

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("alpha must lie in (0,1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("rho must be nonnegative, got {0}")]
    RhoNegative(f64),
    #[error("step count must be positive")]
    NoSteps,
    #[error("final time must be positive, got {0}")]
    NonpositiveTime(f64),
    #[error("cannot coarsen a ladder with an odd step count ({0})")]
    OddStepCount(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

const TWO_POW_NEG52: f64 = 1.0 / (1u64 << 52) as f64;

/// Deterministic per-trajectory random stream.
///
/// Seed derivation is pinned so that Monte Carlo output is reproducible
/// independent of thread count and library versions:
///
/// 1. a SplitMix64 generator is seeded with
///    `master_seed ^ ((trajectory_index + 1) · 0x9E3779B97F4A7C15)`;
/// 2. its first four outputs, little-endian, form the 32-byte ChaCha8 key;
/// 3. standard normals are produced by mapping each 64-bit ChaCha8 output to
///    a uniform in (0,1) (top 52 bits, offset by half an ulp) and applying
///    the AS241 inverse normal CDF (accurate to ~1e-15).
///
/// Multiplication by the odd constant is a bijection on u64, so distinct
/// trajectory indices under one master seed always get distinct keys.
pub struct NoiseStream {
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn for_trajectory(master_seed: u64, trajectory_index: u64) -> Self {
        let mut state = master_seed ^ (trajectory_index.wrapping_add(1)).wrapping_mul(0x9E3779B97F4A7C15);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        Self {
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    /// Next standard normal draw (inverse-CDF method).
    pub fn standard_normal(&mut self) -> f64 {
        standard_normal_icdf(uniform_open01(self.rng.next_u64()))
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Maps 64 random bits to a uniform in the open interval (0,1):
/// `u = (top 52 bits + 1/2) · 2^{-52}`, so `u ∈ [2^{-53}, 1 - 2^{-53}]`.
fn uniform_open01(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * TWO_POW_NEG52
}

// AS241 rational approximations, coefficients in ascending order.
#[allow(clippy::excessive_precision)]
mod ppnd16 {
    pub const A: [f64; 8] = [
        3.3871328727963666080e0,
        1.3314166789178437745e2,
        1.9715909503065514427e3,
        1.3731693765509461125e4,
        4.5921953931549871457e4,
        6.7265770927008700853e4,
        3.3430575583588128105e4,
        2.5090809287301226727e3,
    ];
    pub const B: [f64; 8] = [
        1.0,
        4.2313330701600911252e1,
        6.8718700749205790830e2,
        5.3941960214247511077e3,
        2.1213794301586595867e4,
        3.9307895800092710610e4,
        2.8729085735721942674e4,
        5.2264952788528545610e3,
    ];
    pub const C: [f64; 8] = [
        1.42343711074968357734e0,
        4.63033784615654529590e0,
        5.76949722146069140550e0,
        3.64784832476320460504e0,
        1.27045825245236838258e0,
        2.41780725177450611770e-1,
        2.27238449892691845833e-2,
        7.74545014278341407640e-4,
    ];
    pub const D: [f64; 8] = [
        1.0,
        2.05319162663775882187e0,
        1.67638483018380384940e0,
        6.89767334985100004550e-1,
        1.48103976427480074590e-1,
        1.51986665636164571966e-2,
        5.47593808499534494600e-4,
        1.05075007164441684324e-9,
    ];
    pub const E: [f64; 8] = [
        6.65790464350110377720e0,
        5.46378491116411436990e0,
        1.78482653991729133580e0,
        2.96560571828504891230e-1,
        2.65321895265761230930e-2,
        1.24266094738807843860e-3,
        2.71155556874348757815e-5,
        2.01033439929228813265e-7,
    ];
    pub const F: [f64; 8] = [
        1.0,
        5.99832206555887937690e-1,
        1.36929880922735805310e-1,
        1.48753612908506148525e-2,
        7.86869131145613259100e-4,
        1.84631831751005468180e-5,
        1.42151175831644588870e-7,
        2.04426310338993978564e-15,
    ];
}

fn horner(r: f64, coeffs: &[f64; 8]) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c)
}

/// Inverse of the standard normal CDF (Wichura's algorithm AS241, PPND16),
/// relative accuracy about 1e-15. `p` must lie strictly inside (0,1), which
/// `uniform_open01` guarantees.
fn standard_normal_icdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * horner(r, &ppnd16::A) / horner(r, &ppnd16::B);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        horner(r, &ppnd16::C) / horner(r, &ppnd16::D)
    } else {
        let r = r - 5.0;
        horner(r, &ppnd16::E) / horner(r, &ppnd16::F)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Variance of the per-step OU integral by the Itô isometry:
/// `(1 - e^{-2λ^α t}) / (2λ^α)`, evaluated as `-expm1(-2λ^α t)/(2λ^α)` to
/// avoid cancellation for small `λ^α t`.
pub fn ou_variance(lambda: f64, alpha: f64, t: f64) -> f64 {
    variance_from_symbol(lambda.powf(alpha), t)
}

fn variance_from_symbol(lambda_alpha: f64, t: f64) -> f64 {
    -(-2.0 * lambda_alpha * t).exp_m1() / (2.0 * lambda_alpha)
}

/// Noise configuration: fractional order, spectral decay `σ_i = λ_i^{-ρ}`,
/// and the finest time grid on which stochastic integrals are drawn.
#[derive(Debug, Clone)]
pub struct NoiseParams {
    alpha: f64,
    rho: f64,
    sigma: Vec<f64>,
    lambda_alpha: Vec<f64>,
    tau_fine: f64,
    n_fine: usize,
}

impl NoiseParams {
    pub fn new(
        alpha: f64,
        rho: f64,
        basis: &EigenBasis,
        final_time: f64,
        n_fine: usize,
    ) -> Result<Self, NoiseError> {
        if !(0.0 < alpha && alpha < 1.0) {
            return Err(NoiseError::AlphaOutOfRange(alpha));
        }
        if rho < 0.0 {
            return Err(NoiseError::RhoNegative(rho));
        }
        if n_fine == 0 {
            return Err(NoiseError::NoSteps);
        }
        if final_time <= 0.0 || final_time.is_nan() {
            return Err(NoiseError::NonpositiveTime(final_time));
        }
        let sigma = basis.lambdas().iter().map(|&l| l.powf(-rho)).collect();
        Ok(Self {
            alpha,
            rho,
            sigma,
            lambda_alpha: basis.lambdas().iter().map(|&l| l.powf(alpha)).collect(),
            tau_fine: final_time / n_fine as f64,
            n_fine,
        })
    }

    /// Same configuration with `σ ≡ 0`: the deterministic problem. The RNG
    /// draw sequence is unchanged, only the OU amplitude vanishes.
    pub fn noiseless(
        alpha: f64,
        basis: &EigenBasis,
        final_time: f64,
        n_fine: usize,
    ) -> Result<Self, NoiseError> {
        let mut params = Self::new(alpha, 0.0, basis, final_time, n_fine)?;
        params.sigma.iter_mut().for_each(|s| *s = 0.0);
        Ok(params)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Precomputed `λ_i^α`, the eigenvalues of the fractional operator.
    pub fn lambda_alpha(&self) -> &[f64] {
        &self.lambda_alpha
    }

    pub fn tau_fine(&self) -> f64 {
        self.tau_fine
    }

    pub fn n_fine(&self) -> usize {
        self.n_fine
    }

    pub fn modes(&self) -> usize {
        self.lambda_alpha.len()
    }
}

/// Per-mode, per-step stochastic integrals at one time resolution, before
/// `σ_i` scaling. Row `n` holds the integrals over `[t_n, t_n + τ]`,
/// mode-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseLadder {
    increments: Vec<f64>,
    steps: usize,
    modes: usize,
    tau: f64,
}

impl NoiseLadder {
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.increments[n * self.modes..(n + 1) * self.modes]
    }

    /// Binary dump for debugging and cross-implementation comparison.
    /// Layout, all little-endian: u64 modes, u64 steps, f64 tau, u64 seed,
    /// then the increments row-major as f64.
    pub fn write_binary<W: Write>(&self, seed: u64, w: &mut W) -> io::Result<()> {
        w.write_all(&(self.modes as u64).to_le_bytes())?;
        w.write_all(&(self.steps as u64).to_le_bytes())?;
        w.write_all(&self.tau.to_le_bytes())?;
        w.write_all(&seed.to_le_bytes())?;
        for v in &self.increments {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads a ladder written by [`write_binary`](Self::write_binary);
    /// returns the ladder and the recorded seed.
    pub fn read_binary<R: Read>(r: &mut R) -> io::Result<(Self, u64)> {
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)?;
        let modes = u64::from_le_bytes(u64buf) as usize;
        r.read_exact(&mut u64buf)?;
        let steps = u64::from_le_bytes(u64buf) as usize;
        r.read_exact(&mut u64buf)?;
        let tau = f64::from_le_bytes(u64buf);
        r.read_exact(&mut u64buf)?;
        let seed = u64::from_le_bytes(u64buf);
        let mut increments = vec![0.0; steps * modes];
        for v in &mut increments {
            r.read_exact(&mut u64buf)?;
            *v = f64::from_le_bytes(u64buf);
        }
        Ok((
            Self {
                increments,
                steps,
                modes,
                tau,
            },
            seed,
        ))
    }
}

/// Draws the full fine ladder of per-step OU integrals, each exactly
/// `N(0, (1-e^{-2λ_i^α τ})/(2λ_i^α))` and mutually independent.
///
/// Draw order is fixed: steps outermost, modes innermost, so parallel callers
/// that own disjoint streams can never reorder consumption.
pub fn sample_ladder(params: &NoiseParams, stream: &mut NoiseStream) -> NoiseLadder {
    let modes = params.modes();
    let std_dev: Vec<f64> = params
        .lambda_alpha
        .iter()
        .map(|&la| variance_from_symbol(la, params.tau_fine).sqrt())
        .collect();
    let mut increments = Vec::with_capacity(params.n_fine * modes);
    for _ in 0..params.n_fine {
        for sd in &std_dev {
            increments.push(sd * stream.standard_normal());
        }
    }
    NoiseLadder {
        increments,
        steps: params.n_fine,
        modes,
        tau: params.tau_fine,
    }
}

/// Aggregates a ladder to twice the step size, pathwise exactly:
///
/// `I'_m = e^{-λ^α τ} I_{2m} + I_{2m+1}`
///
/// because `∫_t^{t+2τ} e^{-λ^α(t+2τ-r)} dβ` splits over `[t, t+τ]` and
/// `[t+τ, t+2τ]` with the first half damped by one extra semigroup factor.
pub fn coarsen(ladder: &NoiseLadder, params: &NoiseParams) -> Result<NoiseLadder, NoiseError> {
    if !ladder.steps.is_multiple_of(2) {
        return Err(NoiseError::OddStepCount(ladder.steps));
    }
    if ladder.modes != params.modes() {
        return Err(NoiseError::DimensionMismatch {
            expected: params.modes(),
            got: ladder.modes,
        });
    }
    let decay: Vec<f64> = params
        .lambda_alpha
        .iter()
        .map(|&la| (-la * ladder.tau).exp())
        .collect();
    let modes = ladder.modes;
    let steps = ladder.steps / 2;
    let mut increments = Vec::with_capacity(steps * modes);
    for m in 0..steps {
        let first = ladder.row(2 * m);
        let second = ladder.row(2 * m + 1);
        for i in 0..modes {
            increments.push(decay[i] * first[i] + second[i]);
        }
    }
    Ok(NoiseLadder {
        increments,
        steps,
        modes,
        tau: 2.0 * ladder.tau,
    })
}

/// Per-mode state of the σ-scaled stochastic convolution
/// `values[i] = σ_i ∫₀^{t} e^{-λ_i^α (t-s)} dβ^i(s)` at the current time.
#[derive(Debug, Clone, PartialEq)]
pub struct OUState {
    values: Vec<f64>,
    t: f64,
}

impl OUState {
    pub fn zero(modes: usize) -> Self {
        Self {
            values: vec![0.0; modes],
            t: 0.0,
        }
    }

    pub fn with_values(values: Vec<f64>, t: f64) -> Self {
        Self { values, t }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// The OU values read as Galerkin coefficients of a field.
    pub fn as_field(&self) -> SpectralField {
        SpectralField::from_coeffs(self.values.clone())
    }
}

/// Exact one-step recursion of the stochastic convolution:
/// `values'[i] = e^{-λ_i^α τ} values[i] + σ_i I_n^i`.
pub fn ou_advance(
    state: &OUState,
    step_increments: &[f64],
    params: &NoiseParams,
    tau: f64,
) -> OUState {
    assert_eq!(state.values.len(), params.modes(), "state does not match params");
    assert_eq!(step_increments.len(), params.modes(), "increment row does not match params");
    let values = state
        .values
        .iter()
        .zip(step_increments)
        .zip(params.lambda_alpha.iter().zip(&params.sigma))
        .map(|((&v, &inc), (&la, &sig))| (-la * tau).exp() * v + sig * inc)
        .collect();
    OUState {
        values,
        t: state.t + tau,
    }
}

/// Per-mode value of `∫₀^{t_n} A^{-α} [S(t_n-r) - S(t_{n+1}-r)] dB(r)`,
/// obtained from the current OU state without further sampling:
/// `out[i] = λ_i^{-α} (1 - e^{-λ_i^α τ}) values[i]`, since
/// `S(t_{n+1}-r) = S(τ) S(t_n-r)` mode-wise.
pub fn correction_integral(state: &OUState, params: &NoiseParams, tau: f64) -> Vec<f64> {
    assert_eq!(state.values.len(), params.modes(), "state does not match params");
    state
        .values
        .iter()
        .zip(&params.lambda_alpha)
        .map(|(&v, &la)| -(-la * tau).exp_m1() / la * v)
        .collect()
}
