//! Negativity, Schmidt analysis and the special state families of the odd
//! subspace.

use std::f64::consts::PI;

use serde_json::json;

use crate::dynamics::{Propagator, TimeScale};
use crate::effective::{embed_qubit_state, four_block_eigensystem, qubit_eigenpair, QubitPairState};
use crate::io::Table;
use crate::linalg::{c, kron_vec, real, CMatrix, CVector, C64, ZERO};
use crate::model::{derived_couplings, BasisLabel, DensityMatrix9, ModelParams, PureState9, Qubit};
use crate::spectra::jacobi;
use crate::symmetry::{embed_odd, restrict_odd};
use crate::{Error, Result};

/// Which qutrit's indices are transposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Subsystem {
    First,
    #[default]
    Second,
}

/// Partial transpose of a 9×9 operator on one 3-level factor.
pub fn partial_transpose_matrix(m: &CMatrix, sub: Subsystem) -> CMatrix {
    CMatrix::from_fn(9, 9, |row, col| {
        let (a, b) = (row / 3, row % 3);
        let (cc, d) = (col / 3, col % 3);
        match sub {
            // ⟨a b|ρ^{T₂}|c d⟩ = ⟨a d|ρ|c b⟩
            Subsystem::Second => m[(3 * a + d, 3 * cc + b)],
            Subsystem::First => m[(3 * cc + b, 3 * a + d)],
        }
    })
}

pub fn partial_transpose(rho: &DensityMatrix9, sub: Subsystem) -> CMatrix {
    partial_transpose_matrix(rho.matrix(), sub)
}

/// Partial-transpose eigenvalues in (-ZERO_CUTOFF, 0) are set to zero.
pub const ZERO_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NegativityResult {
    /// (‖ρ^{T}‖₁ - 1)/2, clamped to [0, 1].
    pub value: f64,
    pub negative_eigenvalues: Vec<f64>,
    /// |c₁|² + |c₄|² (weight on |1,0⟩ and |-1,0⟩) when the state lies in
    /// the odd subspace.
    pub x: Option<f64>,
}

fn negativity_of_matrix(m: &CMatrix, sub: Subsystem) -> Result<NegativityResult> {
    let (values, _) = jacobi::hermitian_eigen(&partial_transpose_matrix(m, sub))?;
    let cleaned: Vec<f64> =
        values.into_iter().map(|l| if l < 0.0 && l > -ZERO_CUTOFF { 0.0 } else { l }).collect();
    let trace_norm: f64 = cleaned.iter().map(|l| l.abs()).sum();
    let negative_eigenvalues = cleaned.iter().copied().filter(|&l| l < 0.0).collect();
    let even: f64 = BasisLabel::ORDER
        .iter()
        .filter(|l| l.is_even())
        .map(|l| m[(l.index(), l.index())].re)
        .sum();
    let x = (even.abs() <= ZERO_CUTOFF).then(|| {
        m[(BasisLabel::new(1, 0).index(), BasisLabel::new(1, 0).index())].re
            + m[(BasisLabel::new(-1, 0).index(), BasisLabel::new(-1, 0).index())].re
    });
    Ok(NegativityResult { value: (0.5 * (trace_norm - 1.0)).clamp(0.0, 1.0), negative_eigenvalues, x })
}

pub fn negativity(rho: &DensityMatrix9) -> Result<NegativityResult> {
    negativity_of_matrix(rho.matrix(), Subsystem::Second)
}

pub fn negativity_with(rho: &DensityMatrix9, sub: Subsystem) -> Result<NegativityResult> {
    negativity_of_matrix(rho.matrix(), sub)
}

pub fn negativity_pure(psi: &PureState9) -> Result<NegativityResult> {
    negativity(&psi.density())
}

fn odd_x(c: &[C64; 4]) -> Result<f64> {
    let total: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::BadCoefficients(format!("sum |c_k|^2 = {total}")));
    }
    Ok((c[0].norm_sqr() + c[3].norm_sqr()).clamp(0.0, 1.0))
}

/// sqrt(x(1-x)) with x = |c₁|² + |c₄|² for the odd-subspace state Σ c_k e_k.
pub fn negativity_pure_odd(c: &[C64; 4]) -> Result<f64> {
    let x = odd_x(c)?;
    Ok((x * (1.0 - x)).sqrt())
}

/// The nonzero partial-transpose eigenvalues {1-x, x, ±sqrt(x(1-x))}.
pub fn odd_partial_transpose_eigenvalues(c: &[C64; 4]) -> Result<[f64; 4]> {
    let x = odd_x(c)?;
    let n = (x * (1.0 - x)).sqrt();
    Ok([1.0 - x, x, n, -n])
}

/// Schmidt coefficients (descending) with the local bases as columns, such
/// that ψ = Σ k_i u_i ⊗ v_i.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtData {
    pub k: [f64; 3],
    pub u: CMatrix,
    pub v: CMatrix,
}

impl SchmidtData {
    pub fn reconstruct(&self) -> CVector {
        let mut out = CVector::zeros(9);
        for i in 0..3 {
            let term = kron_vec(&self.u.column(i).into_owned(), &self.v.column(i).into_owned());
            out += term * real(self.k[i]);
        }
        out
    }

    /// Number of coefficients above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.k.iter().filter(|&&k| k > tol).count()
    }
}

/// Schmidt decomposition from the SVD of the 3×3 amplitude matrix.
pub fn schmidt(psi: &PureState9) -> SchmidtData {
    let v = psi.as_vector();
    let m = CMatrix::from_fn(3, 3, |i, j| v[3 * i + j]);
    let svd = m.svd(true, true);
    let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let k = order.map(|i| svd.singular_values[i]);
    let u_sorted = CMatrix::from_fn(3, 3, |r, col| u[(r, order[col])]);
    // m = U Σ V† gives ψ = Σ σ_i u_i ⊗ (row i of V†)ᵀ
    let v_sorted = CMatrix::from_fn(3, 3, |r, col| vt[(order[col], r)]);
    SchmidtData { k, u: u_sorted, v: v_sorted }
}

/// (k₁, k₂) = (sqrt(|c₂|²+|c₃|²), sqrt(|c₁|²+|c₄|²)) for an odd-subspace state.
pub fn schmidt_odd_closed_form(c: &[C64; 4]) -> (f64, f64) {
    (
        (c[1].norm_sqr() + c[2].norm_sqr()).sqrt(),
        (c[0].norm_sqr() + c[3].norm_sqr()).sqrt(),
    )
}

pub const K3_TOL: f64 = 1e-10;

/// √3 · negativity when at most two Schmidt coefficients are nonzero,
/// otherwise `None` (the relation does not apply).
pub fn concurrence_via_negativity(psi: &PureState9) -> Result<Option<f64>> {
    if schmidt(psi).k[2] >= K3_TOL {
        return Ok(None);
    }
    Ok(Some(3f64.sqrt() * negativity_pure(psi)?.value))
}

/// [(cos θ|1⟩ + e^{iφ} sin θ|-1⟩)|0⟩ + e^{iΦ}|0⟩(cos θ'|1⟩ + e^{iφ'} sin θ'|-1⟩)]/√2,
/// an odd-subspace state of negativity 1/2.
pub fn saturating_state(theta: f64, theta_p: f64, phi: f64, phi_p: f64, big_phi: f64) -> PureState9 {
    let h = 0.5f64.sqrt();
    let e = |a: f64| c(0.0, a).exp();
    let terms = [
        (real(h * theta.cos()), BasisLabel::new(1, 0)),
        (e(phi) * h * theta.sin(), BasisLabel::new(-1, 0)),
        (e(big_phi) * h * theta_p.cos(), BasisLabel::new(0, 1)),
        (e(big_phi + phi_p) * h * theta_p.sin(), BasisLabel::new(0, -1)),
    ];
    let mut v = CVector::zeros(9);
    for (amp, l) in terms {
        v[l.index()] = amp;
    }
    PureState9::new(v).expect("unit norm by construction")
}

/// Which eigenstate of an effective qubit: ψ_j1 (energy +E_j) or ψ_j2 (-E_j).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Upper,
    Lower,
}

impl TryFrom<u8> for Level {
    type Error = Error;

    fn try_from(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Level::Upper),
            2 => Ok(Level::Lower),
            _ => Err(Error::BadCoefficients(format!("eigenstate index must be 1 or 2, got {k}"))),
        }
    }
}

/// How the two product pairs are combined in the entangled family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    /// a ψ₁₁ψ₂₁ + b ψ₁₂ψ₂₂
    Aligned,
    /// a ψ₁₁ψ₂₂ + b ψ₁₂ψ₂₁
    Crossed,
}

/// States evolving with a single Bohr frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OneBohrFamily {
    /// One qubit in an eigenstate, the other in (ζ, ξ): ψ_{1k} ⊗ (ζ, ξ) for
    /// `qubit = First`, (ζ, ξ) ⊗ ψ_{2k} for `qubit = Second`.
    A { qubit: Qubit, level: Level, zeta: C64, xi: C64 },
    /// Entangled superposition of two product eigenstates.
    B { pairing: Pairing, a: C64, b: C64 },
    /// Family A with (ζ, ξ) = (1, e^{iΦ})/√2; negativity 1/2.
    C { qubit: Qubit, level: Level, phi: f64 },
}

impl OneBohrFamily {
    /// Builds a family from a name and real coefficients:
    /// `A j k Re ζ Im ζ Re ξ Im ξ`, `B aligned|crossed Re a Im a Re b Im b`
    /// (pairing encoded as 0/1), `C j k Φ`.
    pub fn from_spec(name: &str, coef: &[f64]) -> Result<Self> {
        let idx = |x: f64| -> Result<u8> {
            if x == 1.0 || x == 2.0 {
                Ok(x as u8)
            } else {
                Err(Error::BadCoefficients(format!("index must be 1 or 2, got {x}")))
            }
        };
        let need = |n: usize| -> Result<()> {
            if coef.len() == n {
                Ok(())
            } else {
                Err(Error::BadCoefficients(format!("family {name} takes {n} numbers, got {}", coef.len())))
            }
        };
        match name.to_ascii_uppercase().as_str() {
            "A" => {
                need(6)?;
                Ok(OneBohrFamily::A {
                    qubit: Qubit::try_from(idx(coef[0])?)?,
                    level: Level::try_from(idx(coef[1])?)?,
                    zeta: c(coef[2], coef[3]),
                    xi: c(coef[4], coef[5]),
                })
            }
            "B" => {
                need(5)?;
                let pairing = match coef[0] {
                    0.0 => Pairing::Aligned,
                    1.0 => Pairing::Crossed,
                    x => return Err(Error::BadCoefficients(format!("pairing must be 0 or 1, got {x}"))),
                };
                Ok(OneBohrFamily::B { pairing, a: c(coef[1], coef[2]), b: c(coef[3], coef[4]) })
            }
            "C" => {
                need(3)?;
                Ok(OneBohrFamily::C {
                    qubit: Qubit::try_from(idx(coef[0])?)?,
                    level: Level::try_from(idx(coef[1])?)?,
                    phi: coef[2],
                })
            }
            other => Err(Error::InvalidFamily(other.to_string())),
        }
    }
}

pub const COEFFICIENT_TOL: f64 = 1e-10;

fn check_unit(x: C64, y: C64, what: &str) -> Result<()> {
    let n = x.norm_sqr() + y.norm_sqr();
    if (n - 1.0).abs() > COEFFICIENT_TOL {
        return Err(Error::BadCoefficients(format!("{what}: |.|^2 sum is {n}, expected 1")));
    }
    Ok(())
}

fn eigen(p: &ModelParams, j: Qubit, level: Level) -> Result<CVector> {
    let (up, down) = qubit_eigenpair(p, j)?;
    Ok(match level {
        Level::Upper => up,
        Level::Lower => down,
    })
}

fn product(first: &CVector, second: &CVector) -> CVector {
    kron_vec(first, second)
}

/// The 4-component odd-block vector of a one-Bohr-frequency state.
fn one_bohr_odd(p: &ModelParams, family: &OneBohrFamily) -> Result<CVector> {
    match *family {
        OneBohrFamily::A { qubit, level, zeta, xi } => {
            check_unit(zeta, xi, "(zeta, xi)")?;
            let free = CVector::from_vec(vec![zeta, xi]);
            let fixed = eigen(p, qubit, level)?;
            Ok(match qubit {
                Qubit::First => product(&fixed, &free),
                Qubit::Second => product(&free, &fixed),
            })
        }
        OneBohrFamily::B { pairing, a, b } => {
            check_unit(a, b, "(a, b)")?;
            let (s11, s12) = qubit_eigenpair(p, Qubit::First)?;
            let (s21, s22) = qubit_eigenpair(p, Qubit::Second)?;
            Ok(match pairing {
                Pairing::Aligned => product(&s11, &s21) * a + product(&s12, &s22) * b,
                Pairing::Crossed => product(&s11, &s22) * a + product(&s12, &s21) * b,
            })
        }
        OneBohrFamily::C { qubit, level, phi } => {
            if !phi.is_finite() {
                return Err(Error::BadCoefficients(format!("phase {phi}")));
            }
            let h = 0.5f64.sqrt();
            let family = OneBohrFamily::A { qubit, level, zeta: real(h), xi: c(0.0, phi).exp() * h };
            one_bohr_odd(p, &family)
        }
    }
}

pub fn one_bohr_state(p: &ModelParams, family: &OneBohrFamily) -> Result<PureState9> {
    PureState9::normalized(embed_odd(&one_bohr_odd(p, family)?))
}

/// Ψ₁₁(Φ) and its siblings written out directly in the qutrit basis:
/// (ε_j(|e⟩ + e^{iΦ}|f⟩) + γ_j*(|g⟩ + e^{iΦ}|h⟩)) / sqrt(2(ε_j² + |γ_j|²)) and
/// the analogous lower-level forms.
pub fn explicit_family_c(p: &ModelParams, qubit: Qubit, level: Level, phi: f64) -> Result<PureState9> {
    let d = derived_couplings(p);
    let (eps, g) = (d.epsilon(qubit), d.gamma(qubit));
    let n = d.norm_factor(qubit);
    if n == 0.0 {
        return Err(Error::DegenerateBlock(qubit));
    }
    let ph = c(0.0, phi).exp();
    let (x, y) = match level {
        Level::Upper => (real(eps), g.conj()),
        Level::Lower => (g, real(-eps)),
    };
    let l = BasisLabel::new;
    let terms = match qubit {
        Qubit::First => [
            (x, l(1, 0)),
            (x * ph, l(0, 1)),
            (y, l(0, -1)),
            (y * ph, l(-1, 0)),
        ],
        Qubit::Second => [
            (x, l(1, 0)),
            (x * ph, l(0, -1)),
            (y, l(0, 1)),
            (y * ph, l(-1, 0)),
        ],
    };
    let mut v = CVector::zeros(9);
    for (amp, lab) in terms {
        v[lab.index()] = amp / (2.0f64.sqrt() * n);
    }
    PureState9::new(v)
}

/// Eigenvalues of the odd block on which `psi` has weight above `tol`.
pub fn bohr_support(p: &ModelParams, psi: &PureState9, tol: f64) -> Result<Vec<f64>> {
    let spec = four_block_eigensystem(p)?;
    let v = restrict_odd(psi.as_vector());
    Ok(spec
        .pairs
        .iter()
        .filter(|pair| crate::linalg::inner(&pair.vector, &v).norm_sqr() > tol)
        .map(|pair| pair.value)
        .collect())
}

/// Distinct Bohr frequencies (|λ_i - λ_k|/ħ) present in the evolution of `psi`.
pub fn bohr_frequencies(p: &ModelParams, psi: &PureState9, tol: f64) -> Result<Vec<f64>> {
    let support = bohr_support(p, psi, tol)?;
    let mut out: Vec<f64> = Vec::new();
    for (i, a) in support.iter().enumerate() {
        for b in &support[i + 1..] {
            let w = (a - b).abs() / p.hbar;
            if w > 1e-12 && !out.iter().any(|x| (x - w).abs() < 1e-9) {
                out.push(w);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// ρ/(1+ρ²): the smallest negativity reached by family-A states.
pub fn min_negativity(rho: f64) -> Result<f64> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::NonPositiveRho(rho));
    }
    Ok(rho / (1.0 + rho * rho))
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RecurrenceAnalysis {
    pub rho: f64,
    /// (1+ρ²)²/(8ρ²)
    pub rhs: f64,
    pub solvable: bool,
    /// Solutions of sin²τ = rhs in [0, 2π), ascending.
    pub tau_hits: Vec<f64>,
    /// Length of the maximum-negativity interval centred on π/2 + kπ:
    /// π - 2 asin(sqrt(rhs)).
    pub window: Option<f64>,
}

/// Slack on rhs ≤ 1 that absorbs rounding at the interval ends.
pub const RHS_TOL: f64 = 1e-12;

pub fn recurrence_for_rho(rho: f64) -> Result<RecurrenceAnalysis> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::NonPositiveRho(rho));
    }
    let rhs = (1.0 + rho * rho).powi(2) / (8.0 * rho * rho);
    let solvable = rhs <= 1.0 + RHS_TOL;
    let (tau_hits, window) = if solvable {
        let a = rhs.min(1.0).sqrt().asin();
        let mut hits: Vec<f64> = Vec::new();
        for t in [a, PI - a, PI + a, 2.0 * PI - a] {
            if !hits.iter().any(|h| (h - t).abs() < 1e-7) {
                hits.push(t);
            }
        }
        hits.sort_by(f64::total_cmp);
        (hits, Some(PI - 2.0 * a))
    } else {
        (Vec::new(), None)
    };
    Ok(RecurrenceAnalysis { rho, rhs, solvable, tau_hits, window })
}

/// When the minimum-negativity states ψ_{1k} ⊗ |±⟩ (j = 2) or |±⟩ ⊗ ψ_{2k}
/// (j = 1) reach negativity 1/2, in units τ_j = E_j t/ħ.
pub fn recurrence_analysis(p: &ModelParams, j: Qubit) -> Result<RecurrenceAnalysis> {
    let rho = derived_couplings(p).rho(j).ok_or(Error::GammaZero(j))?;
    recurrence_for_rho(rho)
}

/// Evolved negativity on a τ grid.
#[derive(Debug, Clone)]
pub struct NegativityTrace {
    pub taus: Vec<f64>,
    pub states: Vec<PureState9>,
    pub table: Table,
}

impl NegativityTrace {
    pub fn column(&self, name: &str) -> &[f64] {
        self.table.column(name).unwrap_or_else(|| panic!("no column {name}"))
    }
}

/// Columns tau, negativity, x, fidelity0 and, with `compare`, fidelity_phi
/// (|⟨compare|ψ(τ)⟩|). For odd-subspace states the negativity is checked
/// against sqrt(x(1-x)).
pub fn negativity_trace(
    p: &ModelParams,
    psi0: &PureState9,
    taus: &[f64],
    scale: TimeScale,
    compare: Option<&PureState9>,
) -> Result<NegativityTrace> {
    let prop = Propagator::for_params(p)?;
    let unit = scale.time_per_tau(&derived_couplings(p))?;
    let mut states = Vec::with_capacity(taus.len());
    let (mut neg, mut xs, mut f0, mut fphi) = (vec![], vec![], vec![], vec![]);
    for &tau in taus {
        let psi = prop.evolve(psi0, tau * unit);
        let n = negativity_pure(&psi)?;
        let x = n.x.unwrap_or(f64::NAN);
        if n.x.is_some() {
            let expected = (x * (1.0 - x)).max(0.0).sqrt();
            if (expected - n.value).abs() > 1e-8 {
                return Err(Error::FitMismatch(format!(
                    "negativity {} vs sqrt(x(1-x)) = {expected} at tau = {tau}",
                    n.value
                )));
            }
        }
        neg.push(n.value);
        xs.push(x);
        f0.push(psi0.overlap(&psi));
        if let Some(target) = compare {
            fphi.push(target.overlap(&psi));
        }
        states.push(psi);
    }
    let mut table = Table::new().meta("time_scale", scale.name()).meta("params", json!(p));
    table.push("tau", taus.to_vec());
    table.push("negativity", neg);
    table.push("x", xs);
    table.push("fidelity0", f0);
    if compare.is_some() {
        table.push("fidelity_phi", fphi);
    }
    Ok(NegativityTrace { taus: taus.to_vec(), states, table })
}

/// Grid step of the Φ scan.
pub const PHI_SCAN_STEP: f64 = 1e-3;

/// Maximizes f(Φ) over [0, 2π): grid scan then golden-section refinement.
pub fn maximize_over_phase(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let steps = (2.0 * PI / PHI_SCAN_STEP).ceil() as usize;
    let (mut best, mut best_val) = (0.0, f(0.0));
    for k in 1..steps {
        let phi = k as f64 * PHI_SCAN_STEP;
        let v = f(phi);
        if v > best_val {
            best = phi;
            best_val = v;
        }
    }
    let (mut lo, mut hi) = (best - PHI_SCAN_STEP, best + PHI_SCAN_STEP);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-12 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    let phi = 0.5 * (lo + hi);
    let val = f(phi);
    if val >= best_val {
        (phi.rem_euclid(2.0 * PI), val)
    } else {
        (best, best_val)
    }
}

/// Roots of f on [a, b] located by sign changes on `steps` subintervals and
/// refined by bisection.
pub fn find_roots(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let h = (b - a) / steps as f64;
    let mut x0 = a;
    let mut f0 = f(x0);
    for k in 1..=steps {
        let x1 = a + k as f64 * h;
        let f1 = f(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            let (mut lo, mut hi, mut flo) = (x0, x1, f0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 || hi - lo < 1e-15 * (1.0 + mid.abs()) {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

/// Result of matching an evolved state against the family Ψ_{jk}(Φ).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PhaseMatch {
    /// Time (in the chosen scale) of the intermediate x = 1/2 crossing.
    pub tau: f64,
    pub phi: f64,
    pub overlap: f64,
}

/// Starting from Ψ_{jk}(Φ=0), finds the first time after τ = 0 where the
/// evolved state again has x = 1/2 without having returned to the initial
/// state, and the Φ for which Ψ_{jk}(Φ) matches it best.
pub fn intermediate_max_negativity_state(
    p: &ModelParams,
    qubit: Qubit,
    level: Level,
    tau_max: f64,
    scale: TimeScale,
) -> Result<Option<PhaseMatch>> {
    let psi0 = one_bohr_state(p, &OneBohrFamily::C { qubit, level, phi: 0.0 })?;
    let prop = Propagator::for_params(p)?;
    let unit = scale.time_per_tau(&derived_couplings(p))?;
    let x_minus_half = |tau: f64| {
        let c = prop.evolve(&psi0, tau * unit).odd_amplitudes();
        c[0].norm_sqr() + c[3].norm_sqr() - 0.5
    };
    let start = 1e-6 * tau_max;
    for tau in find_roots(x_minus_half, start, tau_max, 4000) {
        let psi = prop.evolve(&psi0, tau * unit);
        if psi0.overlap(&psi) > 1.0 - 1e-6 {
            continue;
        }
        let (phi, overlap) = maximize_over_phase(|phi| {
            one_bohr_state(p, &OneBohrFamily::C { qubit, level, phi })
                .map(|s| s.overlap(&psi))
                .unwrap_or(0.0)
        });
        return Ok(Some(PhaseMatch { tau, phi, overlap }));
    }
    Ok(None)
}

/// The revisited phase predicted from the geometry of qubit `j`'s other
/// partner: Φ* = -2 arg(γ) of the freely precessing qubit (mod 2π), valid
/// when that qubit's field has no longitudinal part.
pub fn predicted_revisit_phase(p: &ModelParams, fixed: Qubit) -> f64 {
    let d = derived_couplings(p);
    let free = match fixed {
        Qubit::First => d.gamma2,
        Qubit::Second => d.gamma1,
    };
    (-2.0 * free.arg()).rem_euclid(2.0 * PI)
}

/// A product state of the two qubits as an odd-subspace qutrit state.
pub fn qubit_product_state(first: &CVector, second: &CVector) -> Result<PureState9> {
    let s = QubitPairState::normalized(first[0], first[1], second[0], second[1])?;
    Ok(embed_qubit_state(&s))
}

/// |±⟩ of an effective qubit.
pub fn plus_minus(plus: bool) -> CVector {
    if plus {
        CVector::from_vec(vec![real(1.0), ZERO])
    } else {
        CVector::from_vec(vec![ZERO, real(1.0)])
    }
}
