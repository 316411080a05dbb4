//! Exact time evolution, the structure-preserving amplitude kernels and the
//! magnetization observables.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde_json::json;

use crate::effective::{
    amplitude_singular_values, embed_qubit_state, qubit_eigenpair, QubitPairState,
};
use crate::io::Table;
use crate::linalg::{self, c, real, CMatrix, CVector, C64, ZERO};
use crate::model::{
    build_hamiltonian, derived_couplings, on_first, on_second, spin1_pauli, Axis, DerivedCouplings,
    ModelParams, PureState9, Qubit,
};
use crate::spectra::{oracle_eigensystem, Spectrum};
use crate::{Error, Result};

/// Spectral propagator e^{-iHt/ħ} for a fixed Hermitian H.
#[derive(Debug, Clone)]
pub struct Propagator {
    spectrum: Spectrum,
    hbar: f64,
}

impl Propagator {
    pub fn new(h: &CMatrix, hbar: f64) -> Result<Self> {
        Ok(Self { spectrum: oracle_eigensystem(h)?, hbar })
    }

    pub fn for_params(p: &ModelParams) -> Result<Self> {
        p.validate()?;
        Self::new(build_hamiltonian(p).matrix(), p.hbar)
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// ψ(t) = Σ_k e^{-iλ_k t/ħ} ⟨v_k|ψ⟩ v_k
    pub fn apply(&self, psi: &CVector, t: f64) -> CVector {
        let mut out = CVector::zeros(psi.len());
        for pair in &self.spectrum.pairs {
            let amp = linalg::inner(&pair.vector, psi) * c(0.0, -pair.value * t / self.hbar).exp();
            out.axpy(amp, &pair.vector, ONE_C);
        }
        out
    }

    pub fn evolve(&self, psi: &PureState9, t: f64) -> PureState9 {
        // unitary up to rounding; renormalize to keep the invariant exact
        PureState9::normalized(self.apply(psi.as_vector(), t)).expect("nonzero")
    }
}

const ONE_C: C64 = C64::new(1.0, 0.0);

/// ψ(t) under a time-independent Hermitian `h`.
pub fn propagate(h: &CMatrix, psi0: &PureState9, t: f64, hbar: f64) -> Result<PureState9> {
    Ok(Propagator::new(h, hbar)?.evolve(psi0, t))
}

/// Which form of the two-level amplitude kernels to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelVariant {
    /// Exact kernels of e^{-i h_j t/ħ}: off-diagonal terms ∝ sin(E t/ħ),
    /// with γ* below and γ above the diagonal.
    #[default]
    Corrected,
    /// Variant with sin²(E t/ħ) off the diagonal and γ, γ* swapped.
    /// Not unitary in general; kept for comparison only.
    Literal,
}

/// The 2×2 kernel K_j(t) with (a(t), b(t)) = K₁(a, b), (c(t), d(t)) = K₂(c, d).
pub fn kernel_matrix(d: &DerivedCouplings, j: Qubit, t: f64, variant: KernelVariant) -> CMatrix {
    let (eps, g, e) = (d.epsilon(j), d.gamma(j), d.energy(j));
    let n2 = eps * eps + g.norm_sqr();
    if n2 == 0.0 {
        // h_j = diag(ħΩ/2, -ħΩ/2) with ε_j = 0 and γ_j = 0
        let h = d.half_field(j);
        let ph = c(0.0, -h * t / d.hbar).exp();
        return linalg::from_rows(&[&[ph, ZERO], &[ZERO, ph.conj()]]);
    }
    let w = e * t / d.hbar;
    let em = c(0.0, -w).exp();
    let ep = c(0.0, w).exp();
    let g2 = g.norm_sqr();
    let k_plus = (em * eps * eps + ep * g2) / n2;
    let k_prime_minus = (em * g2 + ep * eps * eps) / n2;
    let (s, below, above) = match variant {
        KernelVariant::Corrected => (w.sin(), g.conj(), g),
        KernelVariant::Literal => (w.sin().powi(2), g, g.conj()),
    };
    let k_minus = c(0.0, -2.0) * eps * below * s / n2;
    let k_prime_plus = c(0.0, -2.0) * eps * above * s / n2;
    linalg::from_rows(&[&[k_plus, k_prime_plus], &[k_minus, k_prime_minus]])
}

/// max |K†K - 1| for qubit j at time t.
pub fn kernel_unitarity_defect(p: &ModelParams, j: Qubit, t: f64, variant: KernelVariant) -> f64 {
    linalg::unitarity_defect(&kernel_matrix(&derived_couplings(p), j, t, variant))
}

/// (a(t), b(t), c(t), d(t)) from the two kernels.
pub fn structure_coefficients(
    p: &ModelParams,
    s0: &QubitPairState,
    t: f64,
    variant: KernelVariant,
) -> QubitPairState {
    let d = derived_couplings(p);
    let first = kernel_matrix(&d, Qubit::First, t, variant) * s0.first();
    let second = kernel_matrix(&d, Qubit::Second, t, variant) * s0.second();
    QubitPairState { a: first[0], b: first[1], c: second[0], d: second[1] }
}

/// Second singular value of the odd-block amplitude matrix: zero exactly
/// when the state is a product of the two effective qubits.
pub fn structure_defect(psi: &PureState9) -> f64 {
    amplitude_singular_values(psi.odd_amplitudes()).1
}

/// Spin-z expectations in units of ħ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Magnetization {
    /// ⟨S₁ᶻ + S₂ᶻ⟩/ħ
    pub sz: f64,
    pub s1z: f64,
    pub s2z: f64,
    /// ⟨S₁ᶻ - S₂ᶻ⟩/ħ
    pub sdiff: f64,
}

pub fn magnetization_observables(psi: &PureState9) -> Magnetization {
    let sz = spin1_pauli(Axis::Z);
    let v = psi.as_vector();
    let s1z = linalg::expectation(&on_first(&sz), v);
    let s2z = linalg::expectation(&on_second(&sz), v);
    Magnetization { sz: s1z + s2z, s1z, s2z, sdiff: s1z - s2z }
}

/// ⟨σ₁ᶻ⟩, ⟨σ₂ᶻ⟩ of the effective qubits, evaluated on the odd-block part of
/// the state.
pub fn sigma_observables(psi: &PureState9) -> (f64, f64) {
    let [c1, c2, c3, c4] = psi.odd_amplitudes().map(|z| z.norm_sqr());
    (c1 + c2 - c3 - c4, c1 - c2 + c3 - c4)
}

/// Dimensionless time conventions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeScale {
    /// τ = t.
    Physical,
    /// τ = |γ₁| t / ħ.
    Gamma1,
    /// τ_j = E_j t / ħ.
    Energy(Qubit),
}

impl TimeScale {
    /// Factor f with t = f · τ.
    pub fn time_per_tau(self, d: &DerivedCouplings) -> Result<f64> {
        let rate = match self {
            TimeScale::Physical => return Ok(1.0),
            TimeScale::Gamma1 => d.gamma1.norm(),
            TimeScale::Energy(j) => d.energy(j),
        };
        if rate == 0.0 {
            return Err(match self {
                TimeScale::Energy(j) => Error::DegenerateBlock(j),
                _ => Error::GammaZero(Qubit::First),
            });
        }
        Ok(d.hbar / rate)
    }

    pub fn name(self) -> &'static str {
        match self {
            TimeScale::Physical => "t",
            TimeScale::Gamma1 => "|gamma1| t / hbar",
            TimeScale::Energy(Qubit::First) => "E1 t / hbar",
            TimeScale::Energy(Qubit::Second) => "E2 t / hbar",
        }
    }
}

/// Uniform grid of `steps` points on [0, tau_max].
pub fn tau_grid(tau_max: f64, steps: usize) -> Vec<f64> {
    if steps < 2 {
        return vec![0.0; steps];
    }
    (0..steps).map(|k| tau_max * k as f64 / (steps - 1) as f64).collect()
}

/// Evolved states on a τ grid with their observables.
#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    pub taus: Vec<f64>,
    pub states: Vec<PureState9>,
    pub table: Table,
}

impl EvolutionTrace {
    pub const COLUMNS: [&'static str; 8] =
        ["tau", "Sz", "S1z", "S2z", "Sdiff", "sigma1z", "sigma2z", "fidelity"];

    pub fn column(&self, name: &str) -> &[f64] {
        self.table.column(name).unwrap_or_else(|| panic!("no column {name}"))
    }
}

/// Exact 9-dimensional evolution of `psi0` on a grid of dimensionless times.
pub fn evolve(p: &ModelParams, psi0: &PureState9, taus: &[f64], scale: TimeScale) -> Result<EvolutionTrace> {
    let prop = Propagator::for_params(p)?;
    let unit = scale.time_per_tau(&derived_couplings(p))?;
    let states: Vec<PureState9> = taus.iter().map(|&tau| prop.evolve(psi0, tau * unit)).collect();
    let mut cols: [Vec<f64>; 7] = Default::default();
    for psi in &states {
        let m = magnetization_observables(psi);
        let (s1, s2) = sigma_observables(psi);
        for (col, v) in cols.iter_mut().zip([m.sz, m.s1z, m.s2z, m.sdiff, s1, s2, psi0.overlap(psi)]) {
            col.push(v);
        }
    }
    let mut table = Table::new().meta("time_scale", scale.name()).meta("params", json!(p));
    table.push("tau", taus.to_vec());
    for (name, col) in EvolutionTrace::COLUMNS[1..].iter().zip(cols) {
        table.push(name, col);
    }
    Ok(EvolutionTrace { taus: taus.to_vec(), states, table })
}

/// Parameters of C + A cos(fτ - φ).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Sinusoid {
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    pub frequency: f64,
}

impl Sinusoid {
    pub fn eval(&self, tau: f64) -> f64 {
        self.offset + self.amplitude * (self.frequency * tau - self.phase).cos()
    }
}

/// Least-squares fit of C + A cos(fτ - φ) to samples on a uniform grid.
///
/// The frequency comes from the three-term recurrence
/// x_{k+1} + x_{k-1} = 2 cos(fΔ) x_k + const, which holds exactly for a
/// sampled sinusoid; amplitude, phase and offset then follow from linear
/// least squares. Returns `None` for flat or too-short data.
pub fn fit_sinusoid(taus: &[f64], xs: &[f64]) -> Option<Sinusoid> {
    let n = xs.len();
    if n < 5 || taus.len() != n {
        return None;
    }
    let dt = taus[1] - taus[0];
    let spread = xs.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x))
        - xs.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    if dt.is_nan() || dt <= 0.0 || spread < 1e-12 {
        return None;
    }
    let rows = n - 2;
    let a = DMatrix::<f64>::from_fn(rows, 2, |i, k| if k == 0 { xs[i + 1] } else { 1.0 });
    let b = DVector::<f64>::from_fn(rows, |i, _| xs[i] + xs[i + 2]);
    let sol = a.svd(true, true).solve(&b, 1e-14).ok()?;
    let cos_w = (0.5 * sol[0]).clamp(-1.0, 1.0);
    let frequency = cos_w.acos() / dt;

    let basis = DMatrix::<f64>::from_fn(n, 3, |i, k| match k {
        0 => 1.0,
        1 => (frequency * taus[i]).cos(),
        _ => (frequency * taus[i]).sin(),
    });
    let y = DVector::from_column_slice(xs);
    let coef = basis.svd(true, true).solve(&y, 1e-14).ok()?;
    let (offset, ac, as_) = (coef[0], coef[1], coef[2]);
    Some(Sinusoid { amplitude: ac.hypot(as_), phase: as_.atan2(ac), offset, frequency })
}

/// Exact ⟨Sᶻ⟩/ħ for the equal-weights state (a = b = c = d = 1/√2) as
/// C + A cos(fτ - φ), τ = |γ₁| t/ħ.
pub fn equal_weights_closed_form(p: &ModelParams) -> Result<Sinusoid> {
    let d = derived_couplings(p);
    let g = d.gamma1;
    let rho = d.rho1.ok_or(Error::GammaZero(Qubit::First))?;
    let r2 = rho * rho;
    let b = 2.0 * rho / (r2 + 1.0) * g.im / g.norm();
    let offset = 2.0 * rho * (r2 - 1.0) / (r2 + 1.0).powi(2) * g.re / g.norm();
    Ok(Sinusoid {
        amplitude: b.hypot(offset),
        phase: b.atan2(-offset),
        offset,
        frequency: (1.0 + r2) / rho,
    })
}

/// Result of [`magnetization_trace_equal_weights`].
#[derive(Debug, Clone, PartialEq)]
pub struct MagnetizationFit {
    pub taus: Vec<f64>,
    pub sz: Vec<f64>,
    pub fit: Sinusoid,
    pub closed_form: Sinusoid,
}

pub const FREQUENCY_TOL: f64 = 1e-6;
pub const SHAPE_TOL: f64 = 1e-6;

/// Differences of two phases reduced to (-π, π].
pub fn phase_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    if d > PI {
        d - 2.0 * PI
    } else {
        d
    }
}

/// ⟨Sᶻ(τ)⟩/ħ for the equal-weights state, computed from the kernels, with a
/// sinusoid fit checked against the closed form. The grid must be uniform.
pub fn magnetization_trace_equal_weights(p: &ModelParams, taus: &[f64]) -> Result<MagnetizationFit> {
    let d = derived_couplings(p);
    let unit = TimeScale::Gamma1.time_per_tau(&d)?;
    let h = c(0.5f64.sqrt(), 0.0);
    let s0 = QubitPairState::new(h, h, h, h)?;
    let sz: Vec<f64> = taus
        .iter()
        .map(|&tau| {
            let s = structure_coefficients(p, &s0, tau * unit, KernelVariant::Corrected);
            let (na, nb) = (s.a.norm_sqr(), s.b.norm_sqr());
            (na - nb) / (na + nb)
        })
        .collect();
    let closed_form = equal_weights_closed_form(p)?;
    let fit = fit_sinusoid(taus, &sz).ok_or_else(|| Error::FitMismatch("no oscillation to fit".into()))?;
    if (fit.frequency - closed_form.frequency).abs() > FREQUENCY_TOL * closed_form.frequency.max(1.0) {
        return Err(Error::FitMismatch(format!(
            "frequency {} vs {}",
            fit.frequency, closed_form.frequency
        )));
    }
    if (fit.amplitude - closed_form.amplitude).abs() > SHAPE_TOL
        || (fit.offset - closed_form.offset).abs() > SHAPE_TOL
    {
        return Err(Error::FitMismatch(format!(
            "amplitude/offset ({}, {}) vs ({}, {})",
            fit.amplitude, fit.offset, closed_form.amplitude, closed_form.offset
        )));
    }
    Ok(MagnetizationFit { taus: taus.to_vec(), sz, fit, closed_form })
}

/// Parameters with ρ_j → 1/ρ_j: a π rotation of qubit j's effective field
/// about x (Ω_j → -Ω_j and γ_j → γ_j*), leaving the other qubit untouched.
/// Involutive.
pub fn rho_inversion(p: &ModelParams, j: Qubit) -> Result<ModelParams> {
    let d = derived_couplings(p);
    let rho = d.rho(j).ok_or(Error::GammaZero(j))?;
    let q = match j {
        Qubit::First => ModelParams {
            omega1: -p.omega2,
            omega2: -p.omega1,
            gamma_xy: -p.gamma_yx,
            gamma_yx: -p.gamma_xy,
            ..*p
        },
        Qubit::Second => ModelParams {
            omega1: p.omega2,
            omega2: p.omega1,
            gamma_xy: p.gamma_yx,
            gamma_yx: p.gamma_xy,
            ..*p
        },
    };
    let inverted = derived_couplings(&q).rho(j).expect("|gamma_j| unchanged");
    debug_assert!((inverted * rho - 1.0).abs() < 1e-12, "rho {rho} -> {inverted}");
    Ok(q)
}

/// Evolution of ψ₁₁ ⊗ (|+⟩ + |-⟩)/√2: qubit 1 starts in an eigenstate, so
/// ⟨Sᶻ⟩ stays constant while ⟨S₁ᶻ⟩ and ⟨S₂ᶻ⟩ move. τ = |γ₁| t/ħ.
pub fn stationary_magnetization_demo(p: &ModelParams, taus: &[f64]) -> Result<EvolutionTrace> {
    let d = derived_couplings(p);
    if d.gamma1.norm() == 0.0 {
        return Err(Error::GammaZero(Qubit::First));
    }
    let (psi11, _) = qubit_eigenpair(p, Qubit::First)?;
    let h = real(0.5f64.sqrt());
    let s0 = QubitPairState::new(psi11[0], psi11[1], h, h)?;
    evolve(p, &embed_qubit_state(&s0), taus, TimeScale::Gamma1)
}
