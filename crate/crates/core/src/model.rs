//! Model parameters, spin-1 operators, the two-qutrit Hamiltonian and states.
//!
//! All 9×9 objects use the product basis
//! `|1,1⟩, |1,0⟩, |1,-1⟩, |0,1⟩, |0,0⟩, |0,-1⟩, |-1,1⟩, |-1,0⟩, |-1,-1⟩`
//! (first spin major), see [`BasisLabel::ORDER`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::{
    self, c, hermiticity_defect, kron, real, CMatrix, CVector, C64, I, ONE, ZERO,
};
use crate::spectra::jacobi;
use crate::{Error, Result};

/// Tolerance on ‖ψ‖ - 1 accepted by [`PureState9::new`].
pub const NORM_TOL: f64 = 1e-12;

/// Index of one of the two effective qubits (equivalently, of the couplings
/// γ₁/γ₂, E₁/E₂, ε₁/ε₂, ρ₁/ρ₂).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Qubit {
    First,
    Second,
}

impl Qubit {
    pub const BOTH: [Qubit; 2] = [Qubit::First, Qubit::Second];

    pub fn number(self) -> u8 {
        match self {
            Qubit::First => 1,
            Qubit::Second => 2,
        }
    }
}

impl TryFrom<u8> for Qubit {
    type Error = Error;

    fn try_from(j: u8) -> Result<Self> {
        match j {
            1 => Ok(Qubit::First),
            2 => Ok(Qubit::Second),
            _ => Err(Error::Parse(format!("qubit index must be 1 or 2, got {j}"))),
        }
    }
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// One element `|m₁,m₂⟩` of the product basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub m1: i8,
    pub m2: i8,
}

impl BasisLabel {
    pub const fn new(m1: i8, m2: i8) -> Self {
        Self { m1, m2 }
    }

    /// Basis order used by every 9-component object in the crate.
    pub const ORDER: [BasisLabel; 9] = [
        BasisLabel::new(1, 1),
        BasisLabel::new(1, 0),
        BasisLabel::new(1, -1),
        BasisLabel::new(0, 1),
        BasisLabel::new(0, 0),
        BasisLabel::new(0, -1),
        BasisLabel::new(-1, 1),
        BasisLabel::new(-1, 0),
        BasisLabel::new(-1, -1),
    ];

    pub fn index(self) -> usize {
        ((1 - self.m1) * 3 + (1 - self.m2)) as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ORDER.get(i).copied()
    }

    /// Total magnetic quantum number M = m₁ + m₂.
    pub fn total_m(self) -> i8 {
        self.m1 + self.m2
    }

    /// True for even M (parity K = +1).
    pub fn is_even(self) -> bool {
        self.total_m().rem_euclid(2) == 0
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{}>", self.m1, self.m2)
    }
}

impl FromStr for BasisLabel {
    type Err = Error;

    /// Accepts `|1,-1>`, `1,-1`, `|1-1>` and `1-1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("cannot parse basis label {s:?}"));
        let body = s
            .trim()
            .trim_start_matches('|')
            .trim_end_matches(['>', '⟩'])
            .replace(' ', "");
        let (a, b) = if let Some((a, b)) = body.split_once(',') {
            (a.to_string(), b.to_string())
        } else {
            // compact form: first quantum number is "1", "0" or "-1"
            let split = if body.starts_with('-') { 2 } else { 1 };
            if body.len() <= split {
                return Err(bad());
            }
            (body[..split].to_string(), body[split..].to_string())
        };
        let m1: i8 = a.parse().map_err(|_| bad())?;
        let m2: i8 = b.parse().map_err(|_| bad())?;
        if !(-1..=1).contains(&m1) || !(-1..=1).contains(&m2) {
            return Err(bad());
        }
        Ok(BasisLabel::new(m1, m2))
    }
}

/// The seven couplings of the Hamiltonian plus ħ.
///
/// `omega1`, `omega2` are angular frequencies (the field terms are ħω Σᶻ);
/// the γ's are energies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    #[serde(default)]
    pub omega1: f64,
    #[serde(default)]
    pub omega2: f64,
    #[serde(default)]
    pub gamma_x: f64,
    #[serde(default)]
    pub gamma_y: f64,
    #[serde(default)]
    pub gamma_z: f64,
    #[serde(default)]
    pub gamma_xy: f64,
    #[serde(default)]
    pub gamma_yx: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
}

fn default_hbar() -> f64 {
    1.0
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            omega1: 0.0,
            omega2: 0.0,
            gamma_x: 0.0,
            gamma_y: 0.0,
            gamma_z: 0.0,
            gamma_xy: 0.0,
            gamma_yx: 0.0,
            hbar: 1.0,
        }
    }
}

impl ModelParams {
    pub const KEYS: [&'static str; 8] = [
        "omega1", "omega2", "gamma_x", "gamma_y", "gamma_z", "gamma_xy", "gamma_yx", "hbar",
    ];

    pub fn validate(&self) -> Result<()> {
        for (key, value) in Self::KEYS.iter().zip(self.values()) {
            if !value.is_finite() {
                return Err(Error::InvalidParams(format!("{key} = {value} is not finite")));
            }
        }
        if self.hbar <= 0.0 {
            return Err(Error::InvalidParams(format!("hbar = {} must be positive", self.hbar)));
        }
        Ok(())
    }

    pub fn values(&self) -> [f64; 8] {
        [
            self.omega1,
            self.omega2,
            self.gamma_x,
            self.gamma_y,
            self.gamma_z,
            self.gamma_xy,
            self.gamma_yx,
            self.hbar,
        ]
    }

    /// Sets one field by its key name.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = match key.trim() {
            "omega1" => &mut self.omega1,
            "omega2" => &mut self.omega2,
            "gamma_x" => &mut self.gamma_x,
            "gamma_y" => &mut self.gamma_y,
            "gamma_z" => &mut self.gamma_z,
            "gamma_xy" => &mut self.gamma_xy,
            "gamma_yx" => &mut self.gamma_yx,
            "hbar" => &mut self.hbar,
            other => return Err(Error::Parse(format!("unknown parameter key {other:?}"))),
        };
        *slot = value;
        Ok(())
    }

    pub fn with(mut self, key: &str, value: f64) -> Result<Self> {
        self.set(key, value)?;
        Ok(self)
    }

    /// True when γx = γy and γxy = -γyx (isotropic XY exchange plus a z
    /// Dzyaloshinskii-Moriya vector), within `tol` relative to the couplings.
    pub fn is_isotropic_xy_dm(&self, tol: f64) -> bool {
        let scale = [self.gamma_x, self.gamma_y, self.gamma_xy, self.gamma_yx]
            .iter()
            .fold(1.0_f64, |m, g| m.max(g.abs()));
        (self.gamma_x - self.gamma_y).abs() <= tol * scale
            && (self.gamma_xy + self.gamma_yx).abs() <= tol * scale
    }
}

/// Combinations of the couplings that govern the two parity blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedCouplings {
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub gamma1: C64,
    pub gamma2: C64,
    pub e1: f64,
    pub e2: f64,
    pub epsilon1: f64,
    pub epsilon2: f64,
    /// ε₁/|γ₁|, absent when γ₁ = 0.
    pub rho1: Option<f64>,
    /// ε₂/|γ₂|, absent when γ₂ = 0.
    pub rho2: Option<f64>,
    pub hbar: f64,
}

impl DerivedCouplings {
    pub fn gamma(&self, j: Qubit) -> C64 {
        match j {
            Qubit::First => self.gamma1,
            Qubit::Second => self.gamma2,
        }
    }

    pub fn energy(&self, j: Qubit) -> f64 {
        match j {
            Qubit::First => self.e1,
            Qubit::Second => self.e2,
        }
    }

    pub fn epsilon(&self, j: Qubit) -> f64 {
        match j {
            Qubit::First => self.epsilon1,
            Qubit::Second => self.epsilon2,
        }
    }

    pub fn rho(&self, j: Qubit) -> Option<f64> {
        match j {
            Qubit::First => self.rho1,
            Qubit::Second => self.rho2,
        }
    }

    /// ħΩ±/2: the longitudinal component of qubit j's effective field.
    pub fn half_field(&self, j: Qubit) -> f64 {
        match j {
            Qubit::First => 0.5 * self.hbar * self.omega_plus,
            Qubit::Second => 0.5 * self.hbar * self.omega_minus,
        }
    }

    /// N_j = sqrt(ε_j² + |γ_j|²), the normalization of the qubit eigenvectors.
    pub fn norm_factor(&self, j: Qubit) -> f64 {
        self.epsilon(j).hypot(self.gamma(j).norm())
    }
}

/// ε = h + sqrt(h² + |γ|²) evaluated without cancellation for h < 0.
pub(crate) fn epsilon_of(half_field: f64, gamma_abs: f64) -> f64 {
    let e = half_field.hypot(gamma_abs);
    if half_field >= 0.0 {
        half_field + e
    } else {
        gamma_abs * gamma_abs / (e - half_field)
    }
}

pub fn derived_couplings(p: &ModelParams) -> DerivedCouplings {
    let omega_plus = p.omega1 + p.omega2;
    let omega_minus = p.omega1 - p.omega2;
    let gamma1 = c(p.gamma_x - p.gamma_y, -(p.gamma_xy + p.gamma_yx));
    let gamma2 = c(p.gamma_x + p.gamma_y, p.gamma_xy - p.gamma_yx);
    let h1 = 0.5 * p.hbar * omega_plus;
    let h2 = 0.5 * p.hbar * omega_minus;
    let (g1, g2) = (gamma1.norm(), gamma2.norm());
    let epsilon1 = epsilon_of(h1, g1);
    let epsilon2 = epsilon_of(h2, g2);
    DerivedCouplings {
        omega_plus,
        omega_minus,
        gamma1,
        gamma2,
        e1: h1.hypot(g1),
        e2: h2.hypot(g2),
        epsilon1,
        epsilon2,
        rho1: (g1 > 0.0).then(|| epsilon1 / g1),
        rho2: (g2 > 0.0).then(|| epsilon2 / g2),
        hbar: p.hbar,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Dimensionless spin-1 "Pauli" matrix: Σˣ = √2 Sˣ/ħ, Σʸ = √2 Sʸ/ħ, Σᶻ = Sᶻ/ħ,
/// in the basis |1⟩, |0⟩, |-1⟩.
pub fn spin1_pauli(axis: Axis) -> CMatrix {
    match axis {
        Axis::X => linalg::from_rows(&[&[ZERO, ONE, ZERO], &[ONE, ZERO, ONE], &[ZERO, ONE, ZERO]]),
        Axis::Y => linalg::from_rows(&[&[ZERO, -I, ZERO], &[I, ZERO, -I], &[ZERO, I, ZERO]]),
        Axis::Z => linalg::diag_real(&[1.0, 0.0, -1.0]),
    }
}

/// `op ⊗ 1` on the pair space.
pub fn on_first(op: &CMatrix) -> CMatrix {
    kron(op, &linalg::identity(3))
}

/// `1 ⊗ op` on the pair space.
pub fn on_second(op: &CMatrix) -> CMatrix {
    kron(&linalg::identity(3), op)
}

/// A 9×9 operator on the pair space.
#[derive(Debug, Clone, PartialEq)]
pub struct PairOperator {
    matrix: CMatrix,
    hermitian: bool,
}

impl PairOperator {
    pub const DIM: usize = 9;
    /// Relative tolerance for the Hermitian flag.
    pub const HERMITIAN_TOL: f64 = 1e-12;

    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.shape() != (Self::DIM, Self::DIM) {
            return Err(Error::DimensionMismatch {
                expected: "9x9".into(),
                found: format!("{}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        let hermitian =
            hermiticity_defect(&matrix) <= Self::HERMITIAN_TOL * linalg::tolerance_scale(&matrix);
        Ok(Self { matrix, hermitian })
    }

    /// Like [`PairOperator::new`] but rejects non-Hermitian input.
    pub fn hermitian(matrix: CMatrix) -> Result<Self> {
        let op = Self::new(matrix)?;
        if !op.hermitian {
            return Err(Error::NonHermitianInput { deviation: hermiticity_defect(&op.matrix) });
        }
        Ok(op)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }
}

impl std::ops::Add for &PairOperator {
    type Output = PairOperator;

    fn add(self, rhs: &PairOperator) -> PairOperator {
        PairOperator::new(&self.matrix + &rhs.matrix).expect("9x9 + 9x9 is 9x9")
    }
}

/// ħω₁Σ₁ᶻ + ħω₂Σ₂ᶻ + γxΣ₁ˣΣ₂ˣ + γyΣ₁ʸΣ₂ʸ + γzΣ₁ᶻΣ₂ᶻ + γxyΣ₁ˣΣ₂ʸ + γyxΣ₁ʸΣ₂ˣ.
pub fn build_hamiltonian(p: &ModelParams) -> PairOperator {
    let sx = spin1_pauli(Axis::X);
    let sy = spin1_pauli(Axis::Y);
    let sz = spin1_pauli(Axis::Z);
    let h = on_first(&sz) * real(p.hbar * p.omega1)
        + on_second(&sz) * real(p.hbar * p.omega2)
        + kron(&sx, &sx) * real(p.gamma_x)
        + kron(&sy, &sy) * real(p.gamma_y)
        + kron(&sz, &sz) * real(p.gamma_z)
        + kron(&sx, &sy) * real(p.gamma_xy)
        + kron(&sy, &sx) * real(p.gamma_yx);
    // every term is Hermitian; symmetrize away rounding so the flag is exact
    let h = (&h + h.adjoint()) * real(0.5);
    PairOperator::new(h).expect("Hamiltonian is 9x9")
}

/// A normalized pure state of the two qutrits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState9(CVector);

impl PureState9 {
    /// Accepts amplitudes whose norm is 1 within [`NORM_TOL`].
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != 9 {
            return Err(Error::DimensionMismatch {
                expected: "9-vector".into(),
                found: format!("{}-vector", amplitudes.len()),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self(amplitudes))
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.len() != 9 {
            return Err(Error::DimensionMismatch {
                expected: "9-vector".into(),
                found: format!("{}-vector", amplitudes.len()),
            });
        }
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self(amplitudes.unscale(norm)))
    }

    pub fn basis(label: BasisLabel) -> Self {
        let mut v = CVector::zeros(9);
        v[label.index()] = ONE;
        Self(v)
    }

    /// Normalized superposition of labelled basis states.
    pub fn superposition(terms: &[(C64, BasisLabel)]) -> Result<Self> {
        let mut v = CVector::zeros(9);
        for &(amp, label) in terms {
            v[label.index()] += amp;
        }
        Self::normalized(v)
    }

    pub fn amplitude(&self, label: BasisLabel) -> C64 {
        self.0[label.index()]
    }

    pub fn as_vector(&self) -> &CVector {
        &self.0
    }

    pub fn into_vector(self) -> CVector {
        self.0
    }

    /// Amplitudes on |1,0⟩, |0,1⟩, |0,-1⟩, |-1,0⟩ (c₁..c₄).
    pub fn odd_amplitudes(&self) -> [C64; 4] {
        crate::symmetry::ODD_BASIS.map(|l| self.amplitude(l))
    }

    /// Largest even-parity amplitude modulus.
    pub fn max_even_amplitude(&self) -> f64 {
        crate::symmetry::EVEN_BASIS
            .iter()
            .fold(0.0, |m, &l| m.max(self.amplitude(l).norm()))
    }

    pub fn density(&self) -> DensityMatrix9 {
        DensityMatrix9(&self.0 * self.0.adjoint())
    }

    /// |⟨self|other⟩|
    pub fn overlap(&self, other: &PureState9) -> f64 {
        linalg::inner(&self.0, &other.0).norm()
    }
}

/// A 9×9 density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix9(CMatrix);

impl DensityMatrix9 {
    pub const TRACE_TOL: f64 = 1e-12;
    pub const EIGEN_TOL: f64 = 1e-10;

    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.shape() != (9, 9) {
            return Err(Error::DimensionMismatch {
                expected: "9x9".into(),
                found: format!("{}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        let defect = hermiticity_defect(&matrix);
        if defect > PairOperator::HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian ({defect:e})")));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > Self::TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
        }
        let (values, _) = jacobi::hermitian_eigen(&matrix)?;
        if let Some(&min) = values.first() {
            if min < -Self::EIGEN_TOL {
                return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(Self(matrix))
    }

    /// Σ_r p_r |ψ_r⟩⟨ψ_r| with weights summing to one.
    pub fn mixture(terms: &[(f64, PureState9)]) -> Result<Self> {
        if terms.iter().any(|(w, _)| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidDensityMatrix("negative weight".into()));
        }
        let mut m = CMatrix::zeros(9, 9);
        for (w, psi) in terms {
            m += psi.density().0 * real(*w);
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Weight outside the odd-parity subspace.
    pub fn even_weight(&self) -> f64 {
        crate::symmetry::EVEN_BASIS.iter().map(|l| self.0[(l.index(), l.index())].re).sum()
    }
}

impl From<&PureState9> for DensityMatrix9 {
    fn from(psi: &PureState9) -> Self {
        psi.density()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, max_abs};
    use crate::symmetry::parity_operator;

    fn random_params(seed: u64) -> ModelParams {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
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
    fn pauli_z_is_diagonal() {
        assert_eq!(spin1_pauli(Axis::Z), linalg::diag_real(&[1.0, 0.0, -1.0]));
    }

    #[test]
    fn pauli_x_pattern() {
        let sx = spin1_pauli(Axis::X);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if (i as i32 - j as i32).abs() == 1 { 1.0 } else { 0.0 };
                assert_eq!(sx[(i, j)], real(expected));
            }
        }
    }

    #[test]
    fn pauli_matrices_hermitian() {
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let s = spin1_pauli(axis);
            assert_eq!(s.adjoint(), s);
        }
    }

    #[test]
    fn spin1_commutation_relations() {
        // exact in floating point: entries are 0, ±1, ±i, ±2
        let sx = spin1_pauli(Axis::X);
        let sy = spin1_pauli(Axis::Y);
        let sz = spin1_pauli(Axis::Z);
        assert_eq!(commutator(&sx, &sy), &sz * c(0.0, 2.0));
        assert_eq!(commutator(&sy, &sz), &sx * c(0.0, 1.0));
        assert_eq!(commutator(&sz, &sx), &sy * c(0.0, 1.0));
    }

    #[test]
    fn zero_params_give_zero_hamiltonian() {
        let h = build_hamiltonian(&ModelParams::default());
        assert_eq!(max_abs(h.matrix()), 0.0);
    }

    #[test]
    fn omega1_only_is_first_spin_field() {
        let p = ModelParams { omega1: 1.0, ..Default::default() };
        let h = build_hamiltonian(&p);
        assert_eq!(*h.matrix(), linalg::diag_real(&[1.0, 1.0, 1.0, 0.0, 0.0, 0.0, -1.0, -1.0, -1.0]));
    }

    #[test]
    fn hamiltonian_hermitian_and_parity_symmetric() {
        let k = parity_operator();
        for seed in 0..50 {
            let h = build_hamiltonian(&random_params(seed));
            assert!(h.is_hermitian());
            assert!(hermiticity_defect(h.matrix()) <= 1e-15);
            assert!(max_abs(&commutator(h.matrix(), k.matrix())) < 1e-12);
        }
    }

    #[test]
    fn trace_of_pure_gamma_z_vanishes() {
        // diag(Σᶻ⊗Σᶻ) = (1,0,-1,0,0,0,-1,0,1)
        let sz = spin1_pauli(Axis::Z);
        let diag: Vec<f64> = kron(&sz, &sz).diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![1.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0]);
        let p = ModelParams { gamma_z: 3.7, ..Default::default() };
        assert_eq!(build_hamiltonian(&p).trace(), ZERO);
    }

    #[test]
    fn trace_matches_diagonal_sum() {
        for seed in 0..10 {
            let h = build_hamiltonian(&random_params(seed));
            let sum: C64 = h.matrix().diagonal().iter().sum();
            assert!((h.trace() - sum).norm() < 1e-14);
            // Σᶻ and Σˣ⊗Σˣ etc. are traceless, so is H
            assert!(h.trace().norm() < 1e-13);
        }
    }

    #[test]
    fn derived_couplings_gamma_x_only() {
        let d = derived_couplings(&ModelParams { gamma_x: 1.0, ..Default::default() });
        assert_eq!(d.gamma1, ONE);
        assert_eq!(d.gamma2, ONE);
        assert_eq!((d.e1, d.e2, d.epsilon1, d.epsilon2), (1.0, 1.0, 1.0, 1.0));
        assert_eq!((d.rho1, d.rho2), (Some(1.0), Some(1.0)));
    }

    #[test]
    fn derived_couplings_all_zero() {
        let d = derived_couplings(&ModelParams::default());
        assert_eq!((d.e1, d.e2, d.epsilon1, d.epsilon2), (0.0, 0.0, 0.0, 0.0));
        assert_eq!((d.rho1, d.rho2), (None, None));
    }

    #[test]
    fn derived_couplings_field_and_gamma_x() {
        let d = derived_couplings(&ModelParams { omega1: 1.0, gamma_x: 1.0, ..Default::default() });
        let e = 5f64.sqrt() / 2.0;
        assert_eq!((d.omega_plus, d.omega_minus), (1.0, 1.0));
        assert!((d.e1 - e).abs() < 1e-15 && (d.e2 - e).abs() < 1e-15);
        assert!((d.epsilon1 - (0.5 + e)).abs() < 1e-15);
        assert!((d.epsilon2 - (0.5 + e)).abs() < 1e-15);
    }

    #[test]
    fn epsilon_stable_for_negative_field() {
        let eps = epsilon_of(-1e8, 1e-3);
        // exact value 1e-6 / (2e8 + ...) ~ 5e-15, the naive form returns 0
        assert!((eps - 5e-15).abs() < 1e-25);
        assert_eq!(epsilon_of(-1.0, 0.0), 0.0);
        assert_eq!(epsilon_of(0.0, 0.0), 0.0);
    }

    #[test]
    fn basis_label_parse_and_index() {
        for (i, l) in BasisLabel::ORDER.iter().enumerate() {
            assert_eq!(l.index(), i);
            assert_eq!(l.to_string().parse::<BasisLabel>().unwrap(), *l);
        }
        assert_eq!("|0-1>".parse::<BasisLabel>().unwrap(), BasisLabel::new(0, -1));
        assert_eq!("-1-1".parse::<BasisLabel>().unwrap(), BasisLabel::new(-1, -1));
        assert_eq!("-10".parse::<BasisLabel>().unwrap(), BasisLabel::new(-1, 0));
        assert!("2,0".parse::<BasisLabel>().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams { hbar: 0.0, ..Default::default() }.validate().is_err());
        assert!(ModelParams { gamma_x: f64::NAN, ..Default::default() }.validate().is_err());
        assert!(ModelParams::default().with("gamma_q", 1.0).is_err());
        assert_eq!(ModelParams::default().with("gamma_yx", 2.0).unwrap().gamma_yx, 2.0);
    }

    #[test]
    fn pure_state_normalization() {
        let v = CVector::from_element(9, real(1.0));
        assert!(PureState9::new(v.clone()).is_err());
        let psi = PureState9::normalized(v).unwrap();
        assert!((psi.as_vector().norm() - 1.0).abs() < 1e-15);
        assert!(PureState9::normalized(CVector::zeros(9)).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        let psi = PureState9::basis(BasisLabel::new(1, 1));
        assert!(DensityMatrix9::new(psi.density().matrix().clone()).is_ok());
        let mut bad = psi.density().matrix().clone();
        bad[(0, 0)] = real(-1.0);
        bad[(1, 1)] = real(2.0);
        assert!(DensityMatrix9::new(bad).is_err());
    }
}
