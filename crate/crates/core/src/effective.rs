//! The odd 4×4 block as two uncoupled effective spin-½ systems.
//!
//! With the identification |1,0⟩ ↔ |++⟩, |0,1⟩ ↔ |+-⟩, |0,-1⟩ ↔ |-+⟩,
//! |-1,0⟩ ↔ |--⟩ the odd block is exactly h₁ ⊗ 1 + 1 ⊗ h₂.

use std::fmt;
use std::str::FromStr;

use crate::linalg::{self, c, kron, kron_vec, real, CMatrix, CVector, C64, I, ONE, ZERO};
use crate::model::{derived_couplings, BasisLabel, ModelParams, PureState9, Qubit};
use crate::spectra::{oracle_eigensystem, BlockKind, EigenPair, Provenance, Spectrum};
use crate::symmetry::{block_decompose, embed_odd, ODD_BASIS};
use crate::{build_hamiltonian, Error, Result};

pub fn sigma_x() -> CMatrix {
    linalg::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]])
}

pub fn sigma_y() -> CMatrix {
    linalg::from_rows(&[&[ZERO, -I], &[I, ZERO]])
}

pub fn sigma_z() -> CMatrix {
    linalg::diag_real(&[1.0, -1.0])
}

/// The two effective qubit Hamiltonians and their fields
/// (h_j = B_j · σ).
#[derive(Debug, Clone, PartialEq)]
pub struct QubitHamiltonianPair {
    pub h1: CMatrix,
    pub h2: CMatrix,
    pub b1_eff: [f64; 3],
    pub b2_eff: [f64; 3],
}

impl QubitHamiltonianPair {
    pub fn get(&self, j: Qubit) -> &CMatrix {
        match j {
            Qubit::First => &self.h1,
            Qubit::Second => &self.h2,
        }
    }

    pub fn field(&self, j: Qubit) -> [f64; 3] {
        match j {
            Qubit::First => self.b1_eff,
            Qubit::Second => self.b2_eff,
        }
    }

    /// h₁ ⊗ 1 + 1 ⊗ h₂ in the |++⟩, |+-⟩, |-+⟩, |--⟩ basis.
    pub fn two_qubit_hamiltonian(&self) -> CMatrix {
        let id = linalg::identity(2);
        kron(&self.h1, &id) + kron(&id, &self.h2)
    }
}

fn field_matrix(b: [f64; 3]) -> CMatrix {
    sigma_x() * real(b[0]) + sigma_y() * real(b[1]) + sigma_z() * real(b[2])
}

pub fn qubit_hamiltonians(p: &ModelParams) -> QubitHamiltonianPair {
    let b1_eff = [p.gamma_x - p.gamma_y, p.gamma_xy + p.gamma_yx, 0.5 * p.hbar * (p.omega1 + p.omega2)];
    let b2_eff = [p.gamma_x + p.gamma_y, -(p.gamma_xy - p.gamma_yx), 0.5 * p.hbar * (p.omega1 - p.omega2)];
    QubitHamiltonianPair { h1: field_matrix(b1_eff), h2: field_matrix(b2_eff), b1_eff, b2_eff }
}

/// Basis states of the two effective qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TwoQubitLabel {
    PlusPlus,
    PlusMinus,
    MinusPlus,
    MinusMinus,
}

impl TwoQubitLabel {
    pub const ORDER: [TwoQubitLabel; 4] =
        [Self::PlusPlus, Self::PlusMinus, Self::MinusPlus, Self::MinusMinus];

    pub fn index(self) -> usize {
        Self::ORDER.iter().position(|&l| l == self).expect("listed")
    }

    /// The odd-parity qutrit basis state this label stands for.
    pub fn to_qutrit(self) -> BasisLabel {
        ODD_BASIS[self.index()]
    }
}

impl fmt::Display for TwoQubitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::PlusPlus => "|++>",
            Self::PlusMinus => "|+->",
            Self::MinusPlus => "|-+>",
            Self::MinusMinus => "|-->",
        };
        f.write_str(s)
    }
}

impl FromStr for TwoQubitLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().trim_start_matches('|').trim_end_matches(['>', '⟩']) {
            "++" => Ok(Self::PlusPlus),
            "+-" => Ok(Self::PlusMinus),
            "-+" => Ok(Self::MinusPlus),
            "--" => Ok(Self::MinusMinus),
            _ => Err(Error::InvalidLabel(s.to_string())),
        }
    }
}

/// Odd-parity qutrit label → two-qubit label.
pub fn map_index(label: BasisLabel) -> Result<TwoQubitLabel> {
    ODD_BASIS
        .iter()
        .position(|&l| l == label)
        .map(|k| TwoQubitLabel::ORDER[k])
        .ok_or_else(|| Error::InvalidLabel(label.to_string()))
}

/// Two-qubit label → odd-parity qutrit label.
pub fn unmap_index(label: TwoQubitLabel) -> BasisLabel {
    label.to_qutrit()
}

/// (ψ_j1, ψ_j2) with h_j ψ_j1 = E_j ψ_j1 and h_j ψ_j2 = -E_j ψ_j2:
/// ψ_j1 = (ε_j, γ_j*)/N_j, ψ_j2 = (γ_j, -ε_j)/N_j.
pub fn qubit_eigenpair(p: &ModelParams, j: Qubit) -> Result<(CVector, CVector)> {
    let d = derived_couplings(p);
    let (eps, g) = (d.epsilon(j), d.gamma(j));
    let n = d.norm_factor(j);
    if n == 0.0 {
        return Err(Error::DegenerateBlock(j));
    }
    let up = CVector::from_vec(vec![real(eps / n), g.conj() / n]);
    let down = CVector::from_vec(vec![g / n, real(-eps / n)]);
    Ok((up, down))
}

/// [ψ₁₁, ψ₁₂, ψ₂₁, ψ₂₂]
pub fn qubit_eigenstates(p: &ModelParams) -> Result<[CVector; 4]> {
    let (a, b) = qubit_eigenpair(p, Qubit::First)?;
    let (c, d) = qubit_eigenpair(p, Qubit::Second)?;
    Ok([a, b, c, d])
}

/// Eigen-system of the odd block from the qubit factorization, with vectors
/// in the [`ODD_BASIS`] order. Falls back to the oracle when a qubit block is
/// degenerate.
pub fn four_block_eigensystem(p: &ModelParams) -> Result<Spectrum> {
    let d = derived_couplings(p);
    let states = match qubit_eigenstates(p) {
        Ok(s) => s,
        Err(Error::DegenerateBlock(j)) => {
            let h_minus = block_decompose(&build_hamiltonian(p))?.h_minus;
            let mut s = oracle_eigensystem(&h_minus)?;
            s.note = Some(format!("qubit {j} degenerate, oracle used"));
            return Ok(s);
        }
        Err(e) => return Err(e),
    };
    let [s11, s12, s21, s22] = &states;
    let (e1, e2) = (d.e1, d.e2);
    let mut pairs = vec![
        (e1 + e2, kron_vec(s11, s21), "psi11_psi21"),
        (e1 - e2, kron_vec(s11, s22), "psi11_psi22"),
        (-(e1 - e2), kron_vec(s12, s21), "psi12_psi21"),
        (-(e1 + e2), kron_vec(s12, s22), "psi12_psi22"),
    ]
    .into_iter()
    .map(|(value, vector, tag)| EigenPair { value, vector, tag: Some(tag.into()) })
    .collect::<Vec<_>>();
    pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(Spectrum { pairs, block: BlockKind::Minus4, provenance: Provenance::ClosedForm, note: None })
}

/// Amplitudes of a factorized two-qubit state (a|+⟩ + b|-⟩)(c|+⟩ + d|-⟩).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitPairState {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl QubitPairState {
    pub const NORM_TOL: f64 = 1e-12;

    /// Requires (|a|²+|b|²)(|c|²+|d|²) = 1 within [`Self::NORM_TOL`].
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let s = Self { a, b, c, d };
        let n = s.joint_norm_sqr();
        if (n - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::NotNormalized { norm: n.sqrt() });
        }
        Ok(s)
    }

    /// Scales each factor to unit norm.
    pub fn normalized(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let n1 = a.norm().hypot(b.norm());
        let n2 = c.norm().hypot(d.norm());
        if n1 == 0.0 || n2 == 0.0 || !n1.is_finite() || !n2.is_finite() {
            return Err(Error::NotNormalized { norm: n1 * n2 });
        }
        Ok(Self { a: a / n1, b: b / n1, c: c / n2, d: d / n2 })
    }

    pub fn from_factors(first: &CVector, second: &CVector) -> Result<Self> {
        Self::new(first[0], first[1], second[0], second[1])
    }

    /// (|a|²+|b|²)(|c|²+|d|²)
    pub fn joint_norm_sqr(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr()) * (self.c.norm_sqr() + self.d.norm_sqr())
    }

    pub fn first(&self) -> CVector {
        CVector::from_vec(vec![self.a, self.b])
    }

    pub fn second(&self) -> CVector {
        CVector::from_vec(vec![self.c, self.d])
    }

    /// The four odd-block amplitudes (ac, ad, bc, bd).
    pub fn odd_amplitudes(&self) -> [C64; 4] {
        [self.a * self.c, self.a * self.d, self.b * self.c, self.b * self.d]
    }

    /// True when both represent the same 9-dimensional state.
    pub fn same_state(&self, other: &Self, tol: f64) -> bool {
        self.odd_amplitudes().iter().zip(other.odd_amplitudes()).all(|(x, y)| (x - y).norm() <= tol)
    }
}

pub fn embed_qubit_state(s: &QubitPairState) -> PureState9 {
    let v = CVector::from_iterator(4, s.odd_amplitudes());
    PureState9::normalized(embed_odd(&v)).expect("joint norm is 1")
}

pub const EVEN_TOL: f64 = 1e-12;
pub const FACTOR_TOL: f64 = 1e-10;

/// Singular values (σ₁ ≥ σ₂) of the 2×2 matrix [[c₁, c₂], [c₃, c₄]].
pub fn amplitude_singular_values(amps: [C64; 4]) -> (f64, f64) {
    let frob = amps.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let det = (amps[0] * amps[3] - amps[1] * amps[2]).norm();
    let disc = (frob * frob - 4.0 * det * det).max(0.0).sqrt();
    let s1 = (0.5 * (frob + disc)).sqrt();
    let s2 = if s1 > 0.0 { det / s1 } else { 0.0 };
    (s1, s2)
}

/// Recovers (a, b, c, d) from an odd-parity product state, in the gauge
/// |a|²+|b|² = 1 with the larger of a, b real and positive.
pub fn extract_qubit_state(psi: &PureState9) -> Result<QubitPairState> {
    let max_even = psi.max_even_amplitude();
    if max_even > EVEN_TOL {
        return Err(Error::NotInOddSubspace { max_even });
    }
    let m = psi.odd_amplitudes();
    let (_, sigma2) = amplitude_singular_values(m);
    if sigma2 > FACTOR_TOL {
        return Err(Error::NotFactorizable { sigma2 });
    }
    // rows: qubit 1 (a, b); columns: qubit 2 (c, d)
    let cols = [[m[0], m[2]], [m[1], m[3]]];
    let norm = |v: &[C64; 2]| v[0].norm().hypot(v[1].norm());
    let col = if norm(&cols[0]) >= norm(&cols[1]) { cols[0] } else { cols[1] };
    let n = norm(&col);
    let (mut a, mut b) = (col[0] / n, col[1] / n);
    let big = if a.norm() >= b.norm() { a } else { b };
    let phase = big.conj() / big.norm();
    a *= phase;
    b *= phase;
    let c = a.conj() * m[0] + b.conj() * m[2];
    let d = a.conj() * m[1] + b.conj() * m[3];
    Ok(QubitPairState { a, b, c, d })
}

/// Model parameters realizing given effective-qubit data.
///
/// `omega_plus`, `omega_minus` are angular frequencies; γ_z only enters the
/// even block and is passed through.
pub fn params_from_effective(
    omega_plus: f64,
    omega_minus: f64,
    gamma1: C64,
    gamma2: C64,
    gamma_z: f64,
    hbar: f64,
) -> ModelParams {
    ModelParams {
        omega1: 0.5 * (omega_plus + omega_minus),
        omega2: 0.5 * (omega_plus - omega_minus),
        gamma_x: 0.5 * (gamma1.re + gamma2.re),
        gamma_y: 0.5 * (gamma2.re - gamma1.re),
        gamma_z,
        gamma_xy: 0.5 * (gamma2.im - gamma1.im),
        gamma_yx: -0.5 * (gamma1.im + gamma2.im),
        hbar,
    }
}

/// ħΩ/2 that gives ratio ε/|γ| = ρ for coupling modulus |γ|.
pub fn half_field_for_rho(rho: f64, gamma_abs: f64) -> Result<f64> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::NonPositiveRho(rho));
    }
    Ok(gamma_abs * (rho * rho - 1.0) / (2.0 * rho))
}

/// Parameters with prescribed ρ₁, ρ₂ and couplings γ₁, γ₂ (both nonzero).
pub fn params_from_rho(rho1: f64, gamma1: C64, rho2: f64, gamma2: C64, hbar: f64) -> Result<ModelParams> {
    for (j, g) in [(Qubit::First, gamma1), (Qubit::Second, gamma2)] {
        if g.norm() == 0.0 {
            return Err(Error::GammaZero(j));
        }
    }
    let h1 = half_field_for_rho(rho1, gamma1.norm())?;
    let h2 = half_field_for_rho(rho2, gamma2.norm())?;
    Ok(params_from_effective(2.0 * h1 / hbar, 2.0 * h2 / hbar, gamma1, gamma2, 0.0, hbar))
}

/// A unit vector along the Bloch direction (θ, φ): (cos θ/2, e^{iφ} sin θ/2).
pub fn bloch_state(theta: f64, phi: f64) -> CVector {
    CVector::from_vec(vec![real((0.5 * theta).cos()), c(0.0, phi).exp() * (0.5 * theta).sin()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, max_abs_vec};
    use crate::spectra::eigenvalue_distance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
        let mut v = || rng.random_range(-2.0..2.0);
        ModelParams {
            omega1: v(),
            omega2: v(),
            gamma_x: v(),
            gamma_y: v(),
            gamma_z: v(),
            gamma_xy: v(),
            gamma_yx: v(),
            hbar: 1.0,
        }
    }

    #[test]
    fn zero_params_give_zero_qubits() {
        let q = qubit_hamiltonians(&ModelParams::default());
        assert_eq!(max_abs(&q.h1), 0.0);
        assert_eq!(max_abs(&q.h2), 0.0);
    }

    #[test]
    fn gamma_x_gives_sigma_x() {
        let q = qubit_hamiltonians(&ModelParams { gamma_x: 1.0, ..Default::default() });
        assert_eq!(q.h1, sigma_x());
        assert_eq!(q.h2, sigma_x());
    }

    #[test]
    fn factorization_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let p = random_params(&mut rng);
            let q = qubit_hamiltonians(&p);
            let h_minus = block_decompose(&build_hamiltonian(&p)).unwrap().h_minus;
            assert!(max_abs(&(q.two_qubit_hamiltonian() - h_minus)) < 1e-13);
        }
    }

    #[test]
    fn field_magnitudes_are_energies() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let p = random_params(&mut rng);
            let q = qubit_hamiltonians(&p);
            let d = derived_couplings(&p);
            let norm = |b: [f64; 3]| (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
            assert!((norm(q.b1_eff) - d.e1).abs() < 1e-13);
            assert!((norm(q.b2_eff) - d.e2).abs() < 1e-13);
        }
    }

    #[test]
    fn label_mapping() {
        assert_eq!(map_index(BasisLabel::new(1, 0)).unwrap(), TwoQubitLabel::PlusPlus);
        assert_eq!(map_index(BasisLabel::new(-1, 0)).unwrap(), TwoQubitLabel::MinusMinus);
        for l in ODD_BASIS {
            assert_eq!(unmap_index(map_index(l).unwrap()), l);
        }
        for t in TwoQubitLabel::ORDER {
            assert_eq!(map_index(unmap_index(t)).unwrap(), t);
            assert_eq!(t.to_string().parse::<TwoQubitLabel>().unwrap(), t);
        }
        assert!(matches!(map_index(BasisLabel::new(1, 1)), Err(Error::InvalidLabel(_))));
    }

    #[test]
    fn eigenstates_gamma_x() {
        let p = ModelParams { gamma_x: 1.0, ..Default::default() };
        let (up, down) = qubit_eigenpair(&p, Qubit::First).unwrap();
        let r = 0.5f64.sqrt();
        assert!(max_abs_vec(&(&up - CVector::from_vec(vec![real(r), real(r)]))) < 1e-15);
        let q = qubit_hamiltonians(&p);
        assert!(max_abs_vec(&(&q.h1 * &up - &up)) < 1e-15);
        assert!(max_abs_vec(&(&q.h1 * &down + &down)) < 1e-15);
    }

    #[test]
    fn field_dominated_limit() {
        let p = ModelParams { omega1: 1e3, omega2: 1e3, gamma_x: 1e-6, ..Default::default() };
        let (up, _) = qubit_eigenpair(&p, Qubit::First).unwrap();
        assert!((up[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenstates_orthonormal_and_correct() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = random_params(&mut rng);
            let q = qubit_hamiltonians(&p);
            let d = derived_couplings(&p);
            for j in Qubit::BOTH {
                let (up, down) = qubit_eigenpair(&p, j).unwrap();
                let e = d.energy(j);
                assert!((up.norm() - 1.0).abs() < 1e-14 && (down.norm() - 1.0).abs() < 1e-14);
                assert!(linalg::inner(&up, &down).norm() < 1e-14);
                let h = q.get(j);
                assert!(max_abs_vec(&(h * &up - &up * real(e))) < 1e-13);
                assert!(max_abs_vec(&(h * &down + &down * real(e))) < 1e-13);
            }
        }
    }

    #[test]
    fn degenerate_block_error() {
        let p = ModelParams { omega1: -1.0, omega2: 1.0, gamma_x: 0.5, gamma_y: 0.5, ..Default::default() };
        // γ₁ = 0 with Ω₊ = 0
        assert!(matches!(qubit_eigenpair(&p, Qubit::First), Err(Error::DegenerateBlock(Qubit::First))));
        assert!(qubit_eigenpair(&p, Qubit::Second).is_ok());
    }

    #[test]
    fn negative_field_without_coupling_is_degenerate_but_spectrum_works() {
        // γ₁ = 0, Ω₊ < 0: ε₁ = 0 so the closed-form vectors vanish
        let p = ModelParams { omega1: -1.0, omega2: -0.5, gamma_x: 0.3, gamma_y: 0.3, ..Default::default() };
        assert!(qubit_eigenpair(&p, Qubit::First).is_err());
        let s = four_block_eigensystem(&p).unwrap();
        assert_eq!(s.provenance, Provenance::Oracle);
    }

    #[test]
    fn four_block_gamma_x() {
        let s = four_block_eigensystem(&ModelParams { gamma_x: 1.0, ..Default::default() }).unwrap();
        assert!(eigenvalue_distance(&s.eigenvalues(), &[2.0, 0.0, 0.0, -2.0]) < 1e-14);
    }

    #[test]
    fn four_block_zero() {
        let s = four_block_eigensystem(&ModelParams::default()).unwrap();
        assert_eq!(s.eigenvalues(), vec![0.0; 4]);
    }

    #[test]
    fn four_block_residuals_and_overlaps() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let p = random_params(&mut rng);
            let h_minus = block_decompose(&build_hamiltonian(&p)).unwrap().h_minus;
            let s = four_block_eigensystem(&p).unwrap();
            assert!(s.max_residual(&h_minus) < 1e-10);
            let o = oracle_eigensystem(&h_minus).unwrap();
            let vals = o.eigenvalues();
            let gap = vals.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            if gap > 1e-3 {
                for (x, y) in s.pairs.iter().zip(&o.pairs) {
                    assert!(linalg::inner(&x.vector, &y.vector).norm() > 1.0 - 1e-10);
                }
            }
        }
    }

    #[test]
    fn four_block_independent_of_gamma_z() {
        let p = ModelParams { omega1: 0.3, gamma_x: 0.7, gamma_xy: 0.2, ..Default::default() };
        let a = four_block_eigensystem(&p).unwrap();
        let b = four_block_eigensystem(&ModelParams { gamma_z: 3.0, ..p }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn embed_equal_amplitudes() {
        let r = real(0.5f64.sqrt());
        let s = QubitPairState::new(r, r, r, r).unwrap();
        let psi = embed_qubit_state(&s);
        for l in ODD_BASIS {
            assert!((psi.amplitude(l) - real(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn embed_basis_state() {
        let s = QubitPairState::new(ONE, ZERO, ONE, ZERO).unwrap();
        assert_eq!(embed_qubit_state(&s), PureState9::basis(BasisLabel::new(1, 0)));
    }

    #[test]
    fn extraction_rejects_entangled() {
        let r = real(0.5f64.sqrt());
        let psi = PureState9::superposition(&[(r, BasisLabel::new(1, 0)), (r, BasisLabel::new(-1, 0))]).unwrap();
        assert!(matches!(extract_qubit_state(&psi), Err(Error::NotFactorizable { .. })));
    }

    #[test]
    fn extraction_rejects_even() {
        let psi = PureState9::basis(BasisLabel::new(0, 0));
        assert!(matches!(extract_qubit_state(&psi), Err(Error::NotInOddSubspace { .. })));
    }

    #[test]
    fn extraction_roundtrip_up_to_gauge() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let mut z = || c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let s = QubitPairState::normalized(z(), z(), z(), z()).unwrap();
            let back = extract_qubit_state(&embed_qubit_state(&s)).unwrap();
            assert!(back.same_state(&s, 1e-12));
            assert!((back.a.norm_sqr() + back.b.norm_sqr() - 1.0).abs() < 1e-12);
            let big = if back.a.norm() >= back.b.norm() { back.a } else { back.b };
            assert!(big.im.abs() < 1e-15 && big.re > 0.0);
        }
    }

    #[test]
    fn joint_normalization_enforced() {
        assert!(QubitPairState::new(real(2.0), ZERO, real(0.5), ZERO).is_ok());
        assert!(QubitPairState::new(ONE, ONE, ONE, ZERO).is_err());
    }

    #[test]
    fn params_from_rho_roundtrip() {
        let g1 = c(0.6, 0.8);
        let g2 = c(1.2, -0.5);
        let p = params_from_rho(2.5, g1, 0.4, g2, 1.0).unwrap();
        let d = derived_couplings(&p);
        assert!((d.gamma1 - g1).norm() < 1e-15 && (d.gamma2 - g2).norm() < 1e-15);
        assert!((d.rho1.unwrap() - 2.5).abs() < 1e-13);
        assert!((d.rho2.unwrap() - 0.4).abs() < 1e-13);
        assert!(params_from_rho(0.0, g1, 1.0, g2, 1.0).is_err());
        assert!(params_from_rho(1.0, ZERO, 1.0, g2, 1.0).is_err());
    }
}
