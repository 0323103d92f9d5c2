//! Monte Carlo estimation of temporal strong errors with coupled dyadic
//! refinements.
//!
//! For each trajectory one fine ladder of exact stochastic integrals is drawn
//! at `2·max(N)` steps and aggregated down to every coarser level, so all
//! solutions entering an error row share a single Brownian path. The strong
//! error at level `N` is estimated over `K` trajectories by
//!
//! `‖u_{2N} - u_N‖ ≈ (K⁻¹ Σ_k ‖u_{2N,k} - u_{N,k}‖²)^{1/2}`
//!
//! and the observed order at row `N` is `log₂` of the ratio of consecutive
//! errors. Trajectories are independent and run in parallel; results are
//! written into per-trajectory slots and reduced in index order, so output
//! is byte-identical for any thread count.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::noise::{coarsen, sample_ladder, NoiseError, NoiseParams, NoiseStream};
use crate::scheme::{integrate, Nonlinearity, SchemeConfig, SchemeError, SchemeKind};
use crate::spectral::{EigenBasis, SpectralError, SpectralField};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("gamma = {gamma} is not positive; configuration lies outside the rate theory")]
    GammaNotPositive { gamma: f64 },
    #[error("error value {error} at N = {n} is not positive")]
    NonpositiveError { n: usize, error: f64 },
    #[error("no level N = {n} in this study")]
    UnknownLevel { n: usize },
}

/// Full description of one convergence study.
///
/// `n_list` holds the step counts of the rate table, strictly increasing
/// powers of two; the finest simulated grid is `2·max(n_list)` so the coupled
/// difference exists for the last row. `sigma_zero` and `f_zero` switch off
/// the noise amplitude and the nonlinearity for deterministic cross-checks
/// (the RNG draw sequence is unchanged).
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub alpha: f64,
    pub rho: f64,
    pub modes: usize,
    pub final_time: f64,
    pub n_list: Vec<usize>,
    pub trajectories: usize,
    pub master_seed: u64,
    pub scheme: SchemeKind,
    pub epsilon: f64,
    pub sigma_zero: bool,
    pub f_zero: bool,
}

impl Default for StudyConfig {
    /// Desk-scale defaults: fast enough for CI, large enough for ±0.15 rate
    /// accuracy.
    fn default() -> Self {
        Self {
            alpha: 0.6,
            rho: 0.2,
            modes: 128,
            final_time: 0.2,
            n_list: vec![2, 4, 8],
            trajectories: 200,
            master_seed: 42,
            scheme: SchemeKind::Modified,
            epsilon: 1e-6,
            sigma_zero: false,
            f_zero: false,
        }
    }
}

impl StudyConfig {
    /// One column of the full-scale temporal rate table:
    /// `M = 500`, `T = 0.2`, `ρ = 0.2`, `N ∈ {2,4,8}`, `K = 1000`.
    pub fn table1_preset(alpha: f64) -> Self {
        Self {
            alpha,
            modes: 500,
            trajectories: 1000,
            ..Self::default()
        }
    }

    /// The smooth-regime study: `ρ = 1.2`, `T = 0.5`, `M = 100`,
    /// `N ∈ {2,4,8,16}`, `K = 1000`.
    pub fn fig1_preset(scheme: SchemeKind) -> Self {
        Self {
            alpha: 0.6,
            rho: 1.2,
            modes: 100,
            final_time: 0.5,
            n_list: vec![2, 4, 8, 16],
            trajectories: 1000,
            scheme,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(0.0 < self.alpha && self.alpha < 1.0) {
            return Err(HarnessError::Config(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        if self.rho < 0.0 {
            return Err(HarnessError::Config(format!(
                "rho must be nonnegative, got {}",
                self.rho
            )));
        }
        if self.modes == 0 {
            return Err(HarnessError::Config("modes must be positive".into()));
        }
        if self.final_time <= 0.0 || self.final_time.is_nan() {
            return Err(HarnessError::Config(format!(
                "final time must be positive, got {}",
                self.final_time
            )));
        }
        if self.trajectories == 0 {
            return Err(HarnessError::Config("trajectory count must be positive".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(HarnessError::Config(format!(
                "epsilon must lie in (0, 1/2), got {}",
                self.epsilon
            )));
        }
        if self.n_list.is_empty() {
            return Err(HarnessError::Config("N list must not be empty".into()));
        }
        for w in self.n_list.windows(2) {
            if w[0] >= w[1] {
                return Err(HarnessError::Config(format!(
                    "N list must be strictly increasing, got {:?}",
                    self.n_list
                )));
            }
        }
        for &n in &self.n_list {
            if !n.is_power_of_two() {
                return Err(HarnessError::Config(format!(
                    "every N must be a power of two so the fine ladder coarsens onto it, got {n}"
                )));
            }
        }
        Ok(())
    }

    fn max_level(&self) -> usize {
        *self.n_list.last().expect("validated non-empty")
    }

    fn nonlinearity(&self) -> Nonlinearity {
        if self.f_zero {
            Nonlinearity::zero()
        } else {
            Nonlinearity::sine()
        }
    }
}

/// Initial data `u₀(x) = sin(2πx) = φ₂/√2`, projected exactly onto the
/// retained modes.
pub fn initial_condition(modes: usize) -> SpectralField {
    let mut coeffs = vec![0.0; modes];
    if modes >= 2 {
        coeffs[1] = FRAC_1_SQRT_2;
    }
    SpectralField::from_coeffs(coeffs)
}

struct StudyContext {
    basis: EigenBasis,
    params: NoiseParams,
}

fn build_context(study: &StudyConfig) -> Result<StudyContext, HarnessError> {
    study.validate()?;
    let basis = EigenBasis::with_dealiased_grid(study.modes)?;
    let n_fine = 2 * study.max_level();
    let params = if study.sigma_zero {
        NoiseParams::noiseless(study.alpha, &basis, study.final_time, n_fine)?
    } else {
        NoiseParams::new(study.alpha, study.rho, &basis, study.final_time, n_fine)?
    };
    Ok(StudyContext { basis, params })
}

/// Solutions `u^M_N(T)` of trajectory `k` at every level of the study,
/// keyed by step count: `n_list` plus the fine level `2·max(n_list)`.
///
/// One fine ladder is drawn from the stream of `(master_seed, k)` and
/// coarsened exactly onto every coarser level; all levels therefore share
/// one Brownian path.
pub fn run_trajectory(
    study: &StudyConfig,
    k: u64,
) -> Result<BTreeMap<usize, SpectralField>, HarnessError> {
    let ctx = build_context(study)?;
    trajectory_solutions(study, &ctx, k)
}

fn trajectory_solutions(
    study: &StudyConfig,
    ctx: &StudyContext,
    k: u64,
) -> Result<BTreeMap<usize, SpectralField>, HarnessError> {
    let mut needed: Vec<usize> = study.n_list.clone();
    needed.push(2 * study.max_level());
    let min_level = needed.iter().copied().min().expect("non-empty");

    let mut stream = NoiseStream::for_trajectory(study.master_seed, k);
    let mut ladder = sample_ladder(&ctx.params, &mut stream);
    let u0 = initial_condition(study.modes);
    let nonlinearity = study.nonlinearity();

    let mut solutions = BTreeMap::new();
    loop {
        let steps = ladder.steps();
        if needed.contains(&steps) {
            let cfg = SchemeConfig::new(
                study.alpha,
                ladder.tau(),
                study.modes,
                nonlinearity,
                study.scheme,
            );
            let run = integrate(
                &cfg,
                &u0,
                &ladder,
                &ctx.basis,
                &ctx.params,
                &std::iter::once(steps).collect(),
            )?;
            solutions.insert(steps, run[&steps].clone());
        }
        if steps <= min_level {
            break;
        }
        ladder = coarsen(&ladder, &ctx.params)?;
    }
    Ok(solutions)
}

/// Per-trajectory squared coupled differences, the raw material of the error
/// estimator. Slots are indexed by trajectory, so reductions are independent
/// of scheduling.
pub struct Ensemble {
    levels: Vec<usize>,
    sq_diffs: BTreeMap<usize, Vec<f64>>,
}

impl Ensemble {
    /// Strong-error estimate at level `N`:
    /// `(K⁻¹ Σ_k ‖u_{2N,k} - u_{N,k}‖²)^{1/2}`, Neumaier-compensated.
    pub fn mc_error(&self, n: usize) -> Result<f64, HarnessError> {
        let slots = self
            .sq_diffs
            .get(&n)
            .ok_or(HarnessError::UnknownLevel { n })?;
        Ok((neumaier_sum(slots) / slots.len() as f64).sqrt())
    }

    /// The error estimate and its naive Monte Carlo standard error, obtained
    /// by the delta method from the spread of the squared differences.
    pub fn mc_error_with_stderr(&self, n: usize) -> Result<(f64, f64), HarnessError> {
        let slots = self
            .sq_diffs
            .get(&n)
            .ok_or(HarnessError::UnknownLevel { n })?;
        let k = slots.len() as f64;
        let mean_sq = neumaier_sum(slots) / k;
        let error = mean_sq.sqrt();
        let var_of_sq =
            slots.iter().map(|&s| (s - mean_sq) * (s - mean_sq)).sum::<f64>() / (k - 1.0).max(1.0);
        let se_mean_sq = (var_of_sq / k).sqrt();
        let se_error = if error > 0.0 { se_mean_sq / (2.0 * error) } else { 0.0 };
        Ok((error, se_error))
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }
}

/// Runs all trajectories of the study (in parallel when a rayon pool is
/// available) and collects the per-trajectory coupled differences.
pub fn run_ensemble(study: &StudyConfig) -> Result<Ensemble, HarnessError> {
    let ctx = build_context(study)?;
    let per_trajectory: Vec<BTreeMap<usize, f64>> = (0..study.trajectories as u64)
        .into_par_iter()
        .map(|k| {
            let solutions = trajectory_solutions(study, &ctx, k)?;
            let mut diffs = BTreeMap::new();
            for &n in &study.n_list {
                let coarse = &solutions[&n];
                let fine = solutions
                    .get(&(2 * n))
                    .ok_or(HarnessError::UnknownLevel { n: 2 * n })?;
                let d = fine.l2_distance(coarse);
                diffs.insert(n, d * d);
            }
            Ok(diffs)
        })
        .collect::<Result<_, HarnessError>>()?;

    let mut sq_diffs: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &n in &study.n_list {
        sq_diffs.insert(n, per_trajectory.iter().map(|m| m[&n]).collect());
    }
    Ok(Ensemble {
        levels: study.n_list.clone(),
        sq_diffs,
    })
}

/// Strong-error estimate at a single level. Convenience wrapper that runs
/// the whole ensemble; use [`run_ensemble`] when several levels are needed.
pub fn mc_error(study: &StudyConfig, n: usize) -> Result<f64, HarnessError> {
    run_ensemble(study)?.mc_error(n)
}

/// Observed convergence orders: at row `N` (with `N/2` present),
/// `rate(N) = log₂(error(N/2) / error(N))`, where `error(N)` pairs the
/// levels `(2N, N)`.
pub fn empirical_rate(
    errors: &BTreeMap<usize, f64>,
) -> Result<BTreeMap<usize, f64>, HarnessError> {
    for (&n, &e) in errors {
        if e <= 0.0 || e.is_nan() {
            return Err(HarnessError::NonpositiveError { n, error: e });
        }
    }
    let mut rates = BTreeMap::new();
    for (&n, &e) in errors {
        if let Some(&prev) = errors.get(&(n / 2)) {
            rates.insert(n, (prev / e).log2());
        }
    }
    Ok(rates)
}

/// Predicted temporal rate with `γ = 2ρ + α - (d+ε)/2`:
/// `min{γ/α, 1}` for the modified scheme, `min{γ/(2α), 1/2}` for the
/// baseline. A nonpositive `γ` is reported, never clamped.
pub fn theoretical_rate(
    alpha: f64,
    rho: f64,
    dim: u32,
    epsilon: f64,
    scheme: SchemeKind,
) -> Result<f64, HarnessError> {
    let gamma = 2.0 * rho + alpha - (dim as f64 + epsilon) / 2.0;
    if gamma <= 0.0 || gamma.is_nan() {
        return Err(HarnessError::GammaNotPositive { gamma });
    }
    Ok(match scheme {
        SchemeKind::Modified => (gamma / alpha).min(1.0),
        SchemeKind::Baseline => (gamma / (2.0 * alpha)).min(0.5),
    })
}

#[derive(Debug, Clone)]
pub struct RateRow {
    pub n: usize,
    pub error: f64,
    pub rate: Option<f64>,
}

/// Result of one study: errors and observed orders per level, the predicted
/// rate, and the run metadata needed to reproduce it.
#[derive(Debug, Clone)]
pub struct RateTable {
    pub study: StudyConfig,
    pub rows: Vec<RateRow>,
    pub theory_rate: Option<f64>,
    pub wall_time: Duration,
}

impl RateTable {
    /// CSV with one row per level. Floats carry 17 significant digits so the
    /// output is byte-stable and round-trips exactly. `wall_time` is
    /// deliberately not a column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scheme,alpha,rho,M,K,T,seed,N,error,rate,theory_rate\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                self.study.scheme.name(),
                format_sig17(self.study.alpha),
                format_sig17(self.study.rho),
                self.study.modes,
                self.study.trajectories,
                format_sig17(self.study.final_time),
                self.study.master_seed,
                row.n,
                format_sig17(row.error),
                row.rate.map(format_sig17).unwrap_or_default(),
                self.theory_rate.map(format_sig17).unwrap_or_default(),
            ));
        }
        out
    }

    /// Least-squares order over all rows: the slope of `ln error` against
    /// `ln N`, negated. Needs at least two rows.
    pub fn fitted_rate(&self) -> Option<f64> {
        fit_rate(
            &self
                .rows
                .iter()
                .map(|r| (r.n, r.error))
                .collect::<BTreeMap<_, _>>(),
        )
    }
}

/// Least-squares slope of `ln error` vs `ln N`, negated so first order is +1.
pub fn fit_rate(errors: &BTreeMap<usize, f64>) -> Option<f64> {
    if errors.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = errors
        .iter()
        .map(|(&n, &e)| ((n as f64).ln(), e.ln()))
        .collect();
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    Some(-sxy / sxx)
}

/// Floating-point formatting used in all emitted files: scientific with 17
/// significant digits.
pub fn format_sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Runs the full study: `K` coupled trajectories, errors per level, observed
/// and predicted orders. Deterministic for a fixed `(config, master_seed)`
/// regardless of thread count.
pub fn run_study(study: &StudyConfig) -> Result<RateTable, HarnessError> {
    let start = Instant::now();
    let ensemble = run_ensemble(study)?;
    let mut errors = BTreeMap::new();
    for &n in &study.n_list {
        errors.insert(n, ensemble.mc_error(n)?);
    }
    let rates = empirical_rate(&errors)?;
    let theory_rate = theoretical_rate(study.alpha, study.rho, 1, study.epsilon, study.scheme).ok();
    let rows = study
        .n_list
        .iter()
        .map(|&n| RateRow {
            n,
            error: errors[&n],
            rate: rates.get(&n).copied(),
        })
        .collect();
    Ok(RateTable {
        study: study.clone(),
        rows,
        theory_rate,
        wall_time: start.elapsed(),
    })
}

/// Neumaier-compensated summation in slot order.
fn neumaier_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
