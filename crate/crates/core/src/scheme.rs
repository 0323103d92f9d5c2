//! Semi-implicit time-stepping engines for the transformed equation
//! `dz + A^α z dt = f(u) dt` with `u = z + ∫₀^t S(t-s) dB(s)`.
//!
//! Both schemes treat the linear part implicitly through the diagonal
//! resolvent `(I + τA^α)^{-1}` and the nonlinearity explicitly. The baseline
//! update is
//!
//! `z_{n+1} = (I + τA^α)^{-1} (z_n + τ f(u_n))`.
//!
//! The modified scheme keeps that structure but corrects the quadrature of
//! `∫ f(u(s)) ds` using the divided difference
//! `q = (f(u_n) - f(u_{n-1})) / (u_n - u_{n-1})` applied pointwise to the
//! stochastic convolution:
//!
//! `z_{n+1} = (I + τA^α)^{-1} [z_n + τ f(u_n) - τ q·OU_n + q·corr_n]`,
//!
//! where `corr_n = ∫₀^{t_n} A^{-α}[S(t_n-r) - S(t_{n+1}-r)] dB(r)` is exact
//! given the per-mode OU state. The quotient and its products with OU fields
//! are formed in physical space on the de-aliasing grid and projected back.
//! The first step carries no history, so it is always the baseline update;
//! corrections enter from step 1 on.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::noise::{correction_integral, ou_advance, NoiseLadder, NoiseParams, OUState};
use crate::spectral::{EigenBasis, SpectralError, SpectralField};

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("modified step needs the previous field; call first_step at step 0")]
    MissingHistory,
    #[error("first_step called at step {0}; it is only valid at step 0")]
    NotFirstStep(usize),
    #[error("ladder step size {ladder_tau} does not match config step size {config_tau}")]
    TauMismatch { ladder_tau: f64, config_tau: f64 },
    #[error("non-finite field value after step {step}")]
    NonFinite { step: usize },
}

/// Scalar Nemytskii nonlinearity together with its derivative.
#[derive(Debug, Clone, Copy)]
pub struct Nonlinearity {
    pub f: fn(f64) -> f64,
    pub f_prime: fn(f64) -> f64,
    /// Why the scheme's Lipschitz assumptions hold for this choice.
    pub note: &'static str,
}

impl Nonlinearity {
    /// The default experiment nonlinearity `f(v) = sin(v)`.
    pub fn sine() -> Self {
        Self {
            f: f64::sin,
            f_prime: f64::cos,
            note: "sin is globally Lipschitz with |f'| = |cos| <= 1",
        }
    }

    /// `f ≡ 0`: the linear stochastic equation.
    pub fn zero() -> Self {
        Self {
            f: |_| 0.0,
            f_prime: |_| 0.0,
            note: "trivially Lipschitz",
        }
    }

    pub fn identity() -> Self {
        Self {
            f: |v| v,
            f_prime: |_| 1.0,
            note: "identity, f' = 1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Baseline,
    Modified,
}

impl SchemeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Baseline => "baseline",
            SchemeKind::Modified => "modified",
        }
    }
}

/// Per-level time-stepping configuration.
#[derive(Debug, Clone, Copy)]
pub struct SchemeConfig {
    pub alpha: f64,
    pub tau: f64,
    pub modes: usize,
    pub nonlinearity: Nonlinearity,
    /// Threshold below which the divided difference falls back to `f'`.
    pub quotient_guard: f64,
    pub kind: SchemeKind,
}

impl SchemeConfig {
    pub fn new(
        alpha: f64,
        tau: f64,
        modes: usize,
        nonlinearity: Nonlinearity,
        kind: SchemeKind,
    ) -> Self {
        Self {
            alpha,
            tau,
            modes,
            nonlinearity,
            quotient_guard: 1e-8,
            kind,
        }
    }
}

/// State of one trajectory at step `n`: the random-PDE part `z`, the
/// reconstructed solution `u = z + OU` (never evolved independently), the
/// exact OU state, and the previous solution for the divided difference.
#[derive(Debug, Clone)]
pub struct TrajectoryState {
    pub z: SpectralField,
    pub u: SpectralField,
    pub ou: OUState,
    pub u_prev: Option<SpectralField>,
    pub step: usize,
}

impl TrajectoryState {
    /// At `t = 0` the stochastic convolution vanishes, so `z_0 = u_0`.
    pub fn initial(u0: SpectralField) -> Self {
        let modes = u0.len();
        Self {
            z: u0.clone(),
            u: u0,
            ou: OUState::zero(modes),
            u_prev: None,
            step: 0,
        }
    }
}

/// Nemytskii operator: applies `f` pointwise on the collocation grid and
/// projects back onto the retained modes.
pub fn nemytskii(
    f: &Nonlinearity,
    u: &SpectralField,
    basis: &EigenBasis,
) -> Result<SpectralField, SpectralError> {
    let mut values = basis.to_physical(u)?;
    for v in &mut values {
        *v = (f.f)(*v);
    }
    basis.to_spectral(&values)
}

/// Pointwise divided difference `(f(a_g) - f(b_g)) / (a_g - b_g)` on the
/// collocation grid, with the Lagrange limit `f'(a_g)` wherever
/// `|a_g - b_g| < guard`. Returns a physical-space multiplier array.
pub fn quotient(
    f: &Nonlinearity,
    u_n: &SpectralField,
    u_prev: &SpectralField,
    basis: &EigenBasis,
    guard: f64,
) -> Result<Vec<f64>, SpectralError> {
    let a = basis.to_physical(u_n)?;
    let b = basis.to_physical(u_prev)?;
    Ok(a
        .iter()
        .zip(&b)
        .map(|(&ag, &bg)| {
            if (ag - bg).abs() < guard {
                (f.f_prime)(ag)
            } else {
                ((f.f)(ag) - (f.f)(bg)) / (ag - bg)
            }
        })
        .collect())
}

fn resolvent(field: &SpectralField, lambda_alpha: &[f64], tau: f64) -> SpectralField {
    SpectralField::from_coeffs(
        field
            .coeffs()
            .iter()
            .zip(lambda_alpha)
            .map(|(&c, &la)| c / (1.0 + tau * la))
            .collect(),
    )
}

/// One baseline semi-implicit Euler step:
/// `z_{n+1} = (I + τA^α)^{-1}(z_n + τ f(u_n))`, OU advanced exactly,
/// `u` reconstructed.
pub fn baseline_step(
    state: &TrajectoryState,
    ladder_row: &[f64],
    cfg: &SchemeConfig,
    basis: &EigenBasis,
    params: &NoiseParams,
) -> Result<TrajectoryState, SchemeError> {
    let fu = nemytskii(&cfg.nonlinearity, &state.u, basis)?;
    let mut rhs = state.z.clone();
    rhs.axpy(cfg.tau, &fu);
    let z = resolvent(&rhs, params.lambda_alpha(), cfg.tau);
    let ou = ou_advance(&state.ou, ladder_row, params, cfg.tau);
    let u = z.add(&ou.as_field());
    Ok(TrajectoryState {
        z,
        u,
        ou,
        u_prev: Some(state.u.clone()),
        step: state.step + 1,
    })
}

/// One step of the modified scheme (valid from step 1 on).
///
/// With `σ ≡ 0` both correction terms are exactly zero and the update
/// reproduces [`baseline_step`] bit for bit.
pub fn modified_step(
    state: &TrajectoryState,
    ladder_row: &[f64],
    cfg: &SchemeConfig,
    basis: &EigenBasis,
    params: &NoiseParams,
) -> Result<TrajectoryState, SchemeError> {
    let u_prev = state.u_prev.as_ref().ok_or(SchemeError::MissingHistory)?;
    let fu = nemytskii(&cfg.nonlinearity, &state.u, basis)?;
    let q = quotient(&cfg.nonlinearity, &state.u, u_prev, basis, cfg.quotient_guard)?;

    let ou_phys = basis.to_physical(&state.ou.as_field())?;
    let corr = SpectralField::from_coeffs(correction_integral(&state.ou, params, cfg.tau));
    let corr_phys = basis.to_physical(&corr)?;
    let q_ou: Vec<f64> = q.iter().zip(&ou_phys).map(|(&qg, &vg)| qg * vg).collect();
    let q_corr: Vec<f64> = q.iter().zip(&corr_phys).map(|(&qg, &vg)| qg * vg).collect();
    let p_ou = basis.to_spectral(&q_ou)?;
    let p_corr = basis.to_spectral(&q_corr)?;

    let mut rhs = state.z.clone();
    rhs.axpy(cfg.tau, &fu);
    rhs.axpy(-cfg.tau, &p_ou);
    rhs.axpy(1.0, &p_corr);
    let z = resolvent(&rhs, params.lambda_alpha(), cfg.tau);
    let ou = ou_advance(&state.ou, ladder_row, params, cfg.tau);
    let u = z.add(&ou.as_field());
    Ok(TrajectoryState {
        z,
        u,
        ou,
        u_prev: Some(state.u.clone()),
        step: state.step + 1,
    })
}

/// The opening step: no history exists yet, so this is the baseline update;
/// it establishes `u_prev` so the modified scheme is usable from step 1.
pub fn first_step(
    state: &TrajectoryState,
    ladder_row: &[f64],
    cfg: &SchemeConfig,
    basis: &EigenBasis,
    params: &NoiseParams,
) -> Result<TrajectoryState, SchemeError> {
    if state.step != 0 {
        return Err(SchemeError::NotFirstStep(state.step));
    }
    baseline_step(state, ladder_row, cfg, basis, params)
}

/// Runs a full trajectory over the ladder and returns the solution fields at
/// the requested step indices (the final step is always included).
pub fn integrate(
    cfg: &SchemeConfig,
    u0: &SpectralField,
    ladder: &NoiseLadder,
    basis: &EigenBasis,
    params: &NoiseParams,
    record_at: &BTreeSet<usize>,
) -> Result<BTreeMap<usize, SpectralField>, SchemeError> {
    if u0.len() != cfg.modes || basis.modes() != cfg.modes || ladder.modes() != cfg.modes {
        return Err(SchemeError::Spectral(SpectralError::DimensionMismatch {
            expected: cfg.modes,
            got: u0.len().max(basis.modes()).max(ladder.modes()),
        }));
    }
    let tau_scale = ladder.tau().abs().max(cfg.tau.abs());
    if (ladder.tau() - cfg.tau).abs() > 1e-12 * tau_scale {
        return Err(SchemeError::TauMismatch {
            ladder_tau: ladder.tau(),
            config_tau: cfg.tau,
        });
    }

    let mut recorded = BTreeMap::new();
    let mut state = TrajectoryState::initial(u0.clone());
    if record_at.contains(&0) {
        recorded.insert(0, state.u.clone());
    }
    let steps = ladder.steps();
    for n in 0..steps {
        state = match (cfg.kind, n) {
            (SchemeKind::Baseline, _) => baseline_step(&state, ladder.row(n), cfg, basis, params)?,
            (SchemeKind::Modified, 0) => first_step(&state, ladder.row(n), cfg, basis, params)?,
            (SchemeKind::Modified, _) => modified_step(&state, ladder.row(n), cfg, basis, params)?,
        };
        if !state.z.is_finite() || !state.u.is_finite() {
            return Err(SchemeError::NonFinite { step: n + 1 });
        }
        if record_at.contains(&(n + 1)) || n + 1 == steps {
            recorded.insert(n + 1, state.u.clone());
        }
    }
    Ok(recorded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{sample_ladder, NoiseStream};
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn basis(modes: usize) -> EigenBasis {
        EigenBasis::with_dealiased_grid(modes).unwrap()
    }

    /// Coefficients of u₀(x) = sin(2πx) = φ₂/√2.
    fn sin_2pi_field(modes: usize) -> SpectralField {
        let mut c = vec![0.0; modes];
        c[1] = FRAC_1_SQRT_2;
        SpectralField::from_coeffs(c)
    }

    fn wobble_field(modes: usize, seed: u64) -> SpectralField {
        SpectralField::from_coeffs(
            (0..modes)
                .map(|i| ((seed as f64 + 1.37 * i as f64).sin() * 0.8).sin())
                .collect(),
        )
    }

    #[test]
    fn nonlinearity_derivative_consistency() {
        // f' matches central differences at 100 points, 1e-6 relative.
        let f = Nonlinearity::sine();
        let h = 1e-6;
        for k in 0..100 {
            let v = -3.0 + 6.0 * k as f64 / 99.0;
            let fd = ((f.f)(v + h) - (f.f)(v - h)) / (2.0 * h);
            let exact = (f.f_prime)(v);
            assert!(
                (fd - exact).abs() <= 1e-6 * exact.abs().max(1.0),
                "v={v}: fd={fd}, f'={exact}"
            );
        }
    }

    #[test]
    fn nemytskii_identity_returns_field() {
        let basis = basis(6);
        let u = wobble_field(6, 9);
        let out = nemytskii(&Nonlinearity::identity(), &u, &basis).unwrap();
        for (a, b) in out.coeffs().iter().zip(u.coeffs()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn nemytskii_sin_of_zero_field() {
        let basis = basis(4);
        let out = nemytskii(&Nonlinearity::sine(), &SpectralField::zeros(4), &basis).unwrap();
        assert!(out.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn nemytskii_matches_simpson_quadrature() {
        // ⟨sin(sin(2πx)), φ_i⟩ by composite Simpson with 10⁴ panels.
        let modes = 8;
        let basis = basis(modes);
        let out = nemytskii(&Nonlinearity::sine(), &sin_2pi_field(modes), &basis).unwrap();
        let n = 10_000;
        let h = 1.0 / n as f64;
        for i in 0..modes {
            let g = |x: f64| (2.0 * PI * x).sin().sin() * SQRT_2 * ((i + 1) as f64 * PI * x).sin();
            let mut acc = g(0.0) + g(1.0);
            for k in 1..n {
                acc += if k % 2 == 1 { 4.0 } else { 2.0 } * g(k as f64 * h);
            }
            let reference = acc * h / 3.0;
            assert!(
                (out.coeffs()[i] - reference).abs() < 1e-8,
                "mode {}: {} vs {}",
                i + 1,
                out.coeffs()[i],
                reference
            );
        }
    }

    #[test]
    fn quotient_guard_uses_derivative() {
        let basis = basis(5);
        let u = wobble_field(5, 4);
        let q = quotient(&Nonlinearity::sine(), &u, &u, &basis, 1e-8).unwrap();
        let phys = basis.to_physical(&u).unwrap();
        for (qg, vg) in q.iter().zip(&phys) {
            assert_eq!(*qg, vg.cos());
        }
    }

    #[test]
    fn quotient_of_identity_is_one() {
        let basis = basis(5);
        let q = quotient(
            &Nonlinearity::identity(),
            &wobble_field(5, 1),
            &wobble_field(5, 2),
            &basis,
            1e-8,
        )
        .unwrap();
        for qg in q {
            assert!((qg - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quotient_scalar_value_and_bound() {
        // (sin 1 - sin 0.5)/0.5 ≈ 0.724091.
        let direct = (1.0f64.sin() - 0.5f64.sin()) / 0.5;
        assert!((direct - 0.724090892407387).abs() < 1e-12);

        // |q| ≤ 1 for f = sin at every grid point (mean value theorem).
        let basis = basis(8);
        let q = quotient(
            &Nonlinearity::sine(),
            &wobble_field(8, 3),
            &wobble_field(8, 17),
            &basis,
            1e-8,
        )
        .unwrap();
        let phys_a = basis.to_physical(&wobble_field(8, 3)).unwrap();
        let phys_b = basis.to_physical(&wobble_field(8, 17)).unwrap();
        for (g, &qg) in q.iter().enumerate() {
            assert!(qg.abs() <= 1.0 + 1e-15, "q[{g}] = {qg}");
            if (phys_a[g] - phys_b[g]).abs() >= 1e-8 {
                let direct = (phys_a[g].sin() - phys_b[g].sin()) / (phys_a[g] - phys_b[g]);
                assert!((qg - direct).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn baseline_linear_decay_per_mode() {
        // f ≡ 0, σ ≡ 0, z₀ = e₁: z_n = (1 + τπ^{2α})^{-n} e₁.
        let modes = 3;
        let basis = basis(modes);
        let alpha = 0.5;
        let tau = 0.05;
        let params = NoiseParams::noiseless(alpha, &basis, 0.2, 4).unwrap();
        let cfg = SchemeConfig::new(alpha, tau, modes, Nonlinearity::zero(), SchemeKind::Baseline);
        let mut c = vec![0.0; modes];
        c[0] = 1.0;
        let mut state = TrajectoryState::initial(SpectralField::from_coeffs(c));
        let zero_row = vec![0.0; modes];
        for n in 1..=4 {
            state = baseline_step(&state, &zero_row, &cfg, &basis, &params).unwrap();
            let expected = (1.0 + tau * PI.powf(2.0 * alpha)).powi(-n);
            assert!(
                (state.z.coeffs()[0] - expected).abs() < 1e-13,
                "step {n}: {} vs {expected}",
                state.z.coeffs()[0]
            );
            assert_eq!(state.z.coeffs()[1], 0.0);
        }
    }

    #[test]
    fn linear_case_decouples_z_and_ou() {
        // f ≡ 0 with noise: u_n is the decayed initial field plus the OU state.
        let modes = 4;
        let basis = basis(modes);
        let params = NoiseParams::new(0.6, 0.2, &basis, 0.2, 8).unwrap();
        let cfg = SchemeConfig::new(
            0.6,
            params.tau_fine(),
            modes,
            Nonlinearity::zero(),
            SchemeKind::Modified,
        );
        let ladder = sample_ladder(&params, &mut NoiseStream::for_trajectory(21, 0));
        let u0 = sin_2pi_field(modes);
        let mut state = TrajectoryState::initial(u0.clone());
        for n in 0..ladder.steps() {
            state = if n == 0 {
                first_step(&state, ladder.row(n), &cfg, &basis, &params).unwrap()
            } else {
                modified_step(&state, ladder.row(n), &cfg, &basis, &params).unwrap()
            };
            for i in 0..modes {
                let decay = (1.0 + cfg.tau * params.lambda_alpha()[i]).powi(-((n + 1) as i32));
                let expected = decay * u0.coeffs()[i] + state.ou.values()[i];
                assert!((state.u.coeffs()[i] - expected).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn noiseless_modified_equals_baseline_bitwise() {
        let modes = 4;
        let basis = basis(modes);
        let params = NoiseParams::noiseless(0.6, &basis, 0.2, 8).unwrap();
        let ladder = sample_ladder(&params, &mut NoiseStream::for_trajectory(5, 0));
        let u0 = sin_2pi_field(modes);
        let base_cfg = SchemeConfig::new(
            0.6,
            params.tau_fine(),
            modes,
            Nonlinearity::sine(),
            SchemeKind::Baseline,
        );
        let mod_cfg = SchemeConfig {
            kind: SchemeKind::Modified,
            ..base_cfg
        };
        let mut a = TrajectoryState::initial(u0.clone());
        let mut b = TrajectoryState::initial(u0);
        for n in 0..ladder.steps() {
            a = baseline_step(&a, ladder.row(n), &base_cfg, &basis, &params).unwrap();
            b = if n == 0 {
                first_step(&b, ladder.row(n), &mod_cfg, &basis, &params).unwrap()
            } else {
                modified_step(&b, ladder.row(n), &mod_cfg, &basis, &params).unwrap()
            };
            assert_eq!(a.z.coeffs(), b.z.coeffs(), "z diverged at step {n}");
            assert_eq!(a.u.coeffs(), b.u.coeffs(), "u diverged at step {n}");
        }
    }

    #[test]
    fn reconstruction_identity_holds_every_step() {
        let modes = 6;
        let basis = basis(modes);
        let params = NoiseParams::new(0.4, 0.2, &basis, 0.2, 8).unwrap();
        let cfg = SchemeConfig::new(
            0.4,
            params.tau_fine(),
            modes,
            Nonlinearity::sine(),
            SchemeKind::Modified,
        );
        let ladder = sample_ladder(&params, &mut NoiseStream::for_trajectory(33, 2));
        let mut state = TrajectoryState::initial(sin_2pi_field(modes));
        for n in 0..ladder.steps() {
            state = if n == 0 {
                first_step(&state, ladder.row(n), &cfg, &basis, &params).unwrap()
            } else {
                modified_step(&state, ladder.row(n), &cfg, &basis, &params).unwrap()
            };
            for i in 0..modes {
                let expected = state.z.coeffs()[i] + state.ou.values()[i];
                assert!((state.u.coeffs()[i] - expected).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn step_order_protocol_is_enforced() {
        let modes = 3;
        let basis = basis(modes);
        let params = NoiseParams::new(0.5, 0.2, &basis, 0.2, 4).unwrap();
        let cfg = SchemeConfig::new(
            0.5,
            params.tau_fine(),
            modes,
            Nonlinearity::sine(),
            SchemeKind::Modified,
        );
        let ladder = sample_ladder(&params, &mut NoiseStream::for_trajectory(1, 1));
        let state = TrajectoryState::initial(sin_2pi_field(modes));
        assert!(matches!(
            modified_step(&state, ladder.row(0), &cfg, &basis, &params),
            Err(SchemeError::MissingHistory)
        ));
        let after = first_step(&state, ladder.row(0), &cfg, &basis, &params).unwrap();
        assert!(matches!(
            first_step(&after, ladder.row(1), &cfg, &basis, &params),
            Err(SchemeError::NotFirstStep(1))
        ));
        // first_step is the baseline update bit for bit.
        let direct = baseline_step(&state, ladder.row(0), &cfg, &basis, &params).unwrap();
        assert_eq!(after.z.coeffs(), direct.z.coeffs());
        assert_eq!(after.u.coeffs(), direct.u.coeffs());
        assert_eq!(after.u_prev.as_ref().unwrap().coeffs(), sin_2pi_field(modes).coeffs());
    }

    #[test]
    fn integrate_records_requested_steps() {
        let modes = 3;
        let basis = basis(modes);
        let params = NoiseParams::new(0.5, 0.2, &basis, 0.2, 4).unwrap();
        let cfg = SchemeConfig::new(
            0.5,
            params.tau_fine(),
            modes,
            Nonlinearity::sine(),
            SchemeKind::Modified,
        );
        let ladder = sample_ladder(&params, &mut NoiseStream::for_trajectory(2, 0));
        let u0 = sin_2pi_field(modes);

        let only_final = integrate(&cfg, &u0, &ladder, &basis, &params, &BTreeSet::new()).unwrap();
        assert_eq!(only_final.keys().copied().collect::<Vec<_>>(), vec![4]);

        let some: BTreeSet<usize> = [0, 2].into_iter().collect();
        let picked = integrate(&cfg, &u0, &ladder, &basis, &params, &some).unwrap();
        assert_eq!(picked.keys().copied().collect::<Vec<_>>(), vec![0, 2, 4]);
        assert_eq!(picked[&0].coeffs(), u0.coeffs());
    }

    #[test]
    fn integrate_rejects_mismatched_ladder() {
        let modes = 3;
        let basis = basis(modes);
        let params = NoiseParams::new(0.5, 0.2, &basis, 0.2, 4).unwrap();
        let ladder = sample_ladder(&params, &mut NoiseStream::for_trajectory(2, 0));
        let cfg = SchemeConfig::new(0.5, 0.11, modes, Nonlinearity::sine(), SchemeKind::Baseline);
        assert!(matches!(
            integrate(&cfg, &sin_2pi_field(modes), &ladder, &basis, &params, &BTreeSet::new()),
            Err(SchemeError::TauMismatch { .. })
        ));
    }

    #[test]
    fn integrate_schemes_agree_in_deterministic_linear_case() {
        let modes = 4;
        let basis = basis(modes);
        let params = NoiseParams::noiseless(0.7, &basis, 0.2, 8).unwrap();
        let ladder = sample_ladder(&params, &mut NoiseStream::for_trajectory(3, 0));
        let u0 = sin_2pi_field(modes);
        let mut cfg = SchemeConfig::new(
            0.7,
            params.tau_fine(),
            modes,
            Nonlinearity::zero(),
            SchemeKind::Baseline,
        );
        let a = integrate(&cfg, &u0, &ladder, &basis, &params, &BTreeSet::new()).unwrap();
        cfg.kind = SchemeKind::Modified;
        let b = integrate(&cfg, &u0, &ladder, &basis, &params, &BTreeSet::new()).unwrap();
        assert_eq!(a[&8].coeffs(), b[&8].coeffs());
    }
}
