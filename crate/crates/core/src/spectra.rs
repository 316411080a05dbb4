//! Spectra of the parity blocks: closed forms, the reduced even block and the
//! numerical oracle every closed form is checked against.

pub mod jacobi;

use serde::{Serialize, Serializer};
use serde_json::{json, Value};

use crate::linalg::{self, c, max_abs, real, CMatrix, CVector, ZERO};
use crate::model::{build_hamiltonian, derived_couplings, spin1_pauli, Axis, ModelParams};
use crate::symmetry::{block_decompose, vector_to_json};
use crate::{Error, Result};

/// Which operator a spectrum belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    /// Odd block, 4×4.
    Minus4,
    /// Even block, 5×5.
    Plus5,
    /// Full 9×9 Hamiltonian.
    Full9,
    /// Central 3×3 of the even block in the isotropic XY + DM case.
    Reduced3,
    /// Any other Hermitian matrix.
    Generic,
}

impl BlockKind {
    fn for_dim(n: usize) -> Self {
        match n {
            4 => BlockKind::Minus4,
            5 => BlockKind::Plus5,
            9 => BlockKind::Full9,
            3 => BlockKind::Reduced3,
            _ => BlockKind::Generic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Oracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: CVector,
    /// Name of the closed-form state, if any.
    pub tag: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Sorted by ascending eigenvalue.
    pub pairs: Vec<EigenPair>,
    pub block: BlockKind,
    pub provenance: Provenance,
    /// Why a closed form fell back to the oracle, or which reading was used.
    pub note: Option<String>,
}

impl Spectrum {
    fn sorted(mut pairs: Vec<EigenPair>, block: BlockKind, provenance: Provenance) -> Self {
        pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
        Self { pairs, block, provenance, note: None }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Eigenvectors as columns.
    pub fn vectors(&self) -> CMatrix {
        let n = self.pairs.first().map_or(0, |p| p.vector.len());
        CMatrix::from_fn(n, self.pairs.len(), |i, k| self.pairs[k].vector[i])
    }

    /// max_k ‖h v_k - λ_k v_k‖
    pub fn max_residual(&self, h: &CMatrix) -> f64 {
        self.pairs
            .iter()
            .map(|p| (h * &p.vector - &p.vector * real(p.value)).norm())
            .fold(0.0, f64::max)
    }

    /// max |V†V - 1|
    pub fn orthonormality_defect(&self) -> f64 {
        linalg::unitarity_defect(&self.vectors())
    }

    /// Σ λ v v†
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.pairs.first().map_or(0, |p| p.vector.len());
        let mut m = CMatrix::zeros(n, n);
        for p in &self.pairs {
            m += &p.vector * p.vector.adjoint() * real(p.value);
        }
        m
    }

    pub fn to_json(&self) -> Value {
        json!({
            "block": self.block,
            "provenance": self.provenance,
            "note": self.note,
            "eigenvalues": self.eigenvalues(),
            "tags": self.pairs.iter().map(|p| p.tag.clone()).collect::<Vec<_>>(),
            "eigenvectors": self.pairs.iter().map(|p| vector_to_json(&p.vector)).collect::<Vec<_>>(),
        })
    }
}

impl Serialize for Spectrum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Largest matrix dimension the oracle accepts.
pub const ORACLE_MAX_DIM: usize = 9;

/// Full eigen-decomposition by cyclic Jacobi rotations.
pub fn oracle_eigensystem(h: &CMatrix) -> Result<Spectrum> {
    if h.nrows() > ORACLE_MAX_DIM {
        return Err(Error::DimensionMismatch {
            expected: format!("at most {ORACLE_MAX_DIM}x{ORACLE_MAX_DIM}"),
            found: format!("{}x{}", h.nrows(), h.ncols()),
        });
    }
    let (values, vectors) = jacobi::hermitian_eigen(h)?;
    let pairs = values
        .into_iter()
        .enumerate()
        .map(|(k, value)| EigenPair { value, vector: vectors.column(k).into_owned(), tag: None })
        .collect();
    Ok(Spectrum::sorted(pairs, BlockKind::for_dim(h.nrows()), Provenance::Oracle))
}

/// Quality gates a closed-form spectrum must pass before it is trusted.
pub const CLOSED_FORM_RESIDUAL: f64 = 1e-9;
pub const CLOSED_FORM_ORTHONORMALITY: f64 = 1e-10;

/// Eigenvalues 0, ±E₆, ±E₈ of the even block when γz = 0, with
/// E₆ ≥ E₈ (both ≤ 0).
pub fn five_block_eigenvalues_gz0(p: &ModelParams) -> [f64; 5] {
    let hb = p.hbar;
    let s = p.gamma_x.powi(2) + p.gamma_y.powi(2) + p.gamma_xy.powi(2) + p.gamma_yx.powi(2);
    let w12 = hb * hb * p.omega1 * p.omega2;
    let inner = w12 * w12 + 4.0 * w12 * (-p.gamma_x * p.gamma_y + p.gamma_xy * p.gamma_yx) + s * s;
    let r = inner.max(0.0).sqrt();
    let base = hb * hb * (p.omega1.powi(2) + p.omega2.powi(2));
    let e6 = -(base + 2.0 * (s - r)).max(0.0).sqrt();
    let e8 = -(base + 2.0 * (s + r)).max(0.0).sqrt();
    [0.0, e6, -e6, e8, -e8]
}

/// Variants of the textbook even-block eigenvector formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiveBlockReading {
    /// Use γ* where the eigenvalue equation demands it (in the |11⟩
    /// prefactor and the |-1,1⟩, |-1,-1⟩ components) instead of γ.
    pub conjugate: bool,
    /// Use the level's own energy in the |0,0⟩ slot instead of the qubit
    /// energies E₂ (first pair) and -(E₁ + E₂) (second pair).
    pub own_energy: bool,
}

impl FiveBlockReading {
    pub const ALL: [FiveBlockReading; 4] = [
        FiveBlockReading { conjugate: false, own_energy: false },
        FiveBlockReading { conjugate: false, own_energy: true },
        FiveBlockReading { conjugate: true, own_energy: false },
        FiveBlockReading { conjugate: true, own_energy: true },
    ];

    pub fn describe(&self) -> String {
        format!(
            "{} couplings, {} energy in |0,0> slot",
            if self.conjugate { "conjugated" } else { "literal" },
            if self.own_energy { "own" } else { "qubit" }
        )
    }
}

/// Unnormalized even-block eigenvectors for one reading, tagged psi5..psi9.
pub fn five_block_vectors(p: &ModelParams, reading: FiveBlockReading) -> Vec<EigenPair> {
    let d = derived_couplings(p);
    let pp = p.hbar * d.omega_plus;
    let mm = p.hbar * d.omega_minus;
    let (g1, g2) = (d.gamma1, d.gamma2);
    let [_, e6, e7, e8, e9] = five_block_eigenvalues_gz0(p);
    let (g1c, g2c) = if reading.conjugate { (g1.conj(), g2.conj()) } else { (g1, g2) };
    let n1 = g1.norm_sqr();
    let n2 = g2.norm_sqr();

    // the zero level has its own closed form
    let psi5 = CVector::from_vec(vec![-g1, -g2 * (pp / mm), real(pp), g2.conj() * (pp / mm), g1.conj()]);
    let mut pairs = vec![EigenPair { value: 0.0, vector: psi5, tag: Some("psi5".into()) }];

    let qubit_slot = [d.e2, d.e2, -(d.e1 + d.e2), -(d.e1 + d.e2)];
    for (k, (lam, sign)) in [(e6, 1.0), (e7, -1.0), (e8, 1.0), (e9, -1.0)].into_iter().enumerate() {
        let level = if k < 2 { e6 } else { e8 };
        let slot = if reading.own_energy { level } else { qubit_slot[k] };
        let v3 = pp + lam;
        let bracket = n1 - lam * (lam + pp) + n2 * (lam + pp) / (lam - mm) + n2 * (lam + pp) / (lam + mm);
        let v = CVector::from_vec(vec![
            -real(bracket) / g1c,
            g2 * (v3 / (lam - mm)),
            real(pp + sign * slot),
            g2c * (v3 / (lam + mm)),
            g1c,
        ]);
        pairs.push(EigenPair { value: lam, vector: v, tag: Some(format!("psi{}", k + 6)) });
    }
    pairs
}

fn normalize_pairs(pairs: Vec<EigenPair>) -> Option<Vec<EigenPair>> {
    pairs
        .into_iter()
        .map(|mut p| {
            let n = p.vector.norm();
            if !(n.is_finite() && n > 0.0) || p.vector.iter().any(|z| !z.is_finite()) {
                return None;
            }
            p.vector.unscale_mut(n);
            Some(p)
        })
        .collect()
}

/// The reading with the smallest residual against h_plus, and that residual.
pub fn best_five_block_reading(p: &ModelParams, h_plus: &CMatrix) -> Option<(FiveBlockReading, f64)> {
    FiveBlockReading::ALL
        .iter()
        .filter_map(|&r| {
            let pairs = normalize_pairs(five_block_vectors(p, r))?;
            let s = Spectrum::sorted(pairs, BlockKind::Plus5, Provenance::ClosedForm);
            let res = s.max_residual(h_plus);
            res.is_finite().then_some((r, res))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Closed-form spectrum of the even block for γz = 0.
///
/// The four readings of the eigenvector formulas are scored by residual and
/// the best is kept. If the closed form is singular or fails the residual /
/// orthonormality gates, the oracle result is returned instead with
/// `provenance = Oracle` and an explanatory note.
pub fn five_block_eigensystem_gz0(p: &ModelParams) -> Result<Spectrum> {
    if p.gamma_z != 0.0 {
        return Err(Error::RequiresGammaZZero(p.gamma_z));
    }
    p.validate()?;
    let h_plus = block_decompose(&build_hamiltonian(p))?.h_plus;
    let scale = linalg::tolerance_scale(&h_plus);

    let fallback = |why: String| -> Result<Spectrum> {
        Ok(oracle_eigensystem(&h_plus)?.with_note(format!("closed form rejected: {why}")))
    };

    let Some((reading, _)) = best_five_block_reading(p, &h_plus) else {
        return fallback("singular denominators".into());
    };
    let pairs = normalize_pairs(five_block_vectors(p, reading)).expect("scored reading is finite");
    let spectrum = Spectrum::sorted(pairs, BlockKind::Plus5, Provenance::ClosedForm);
    let res = spectrum.max_residual(&h_plus);
    if res > CLOSED_FORM_RESIDUAL * scale {
        return fallback(format!("residual {res:e}"));
    }
    let ortho = spectrum.orthonormality_defect();
    if ortho > CLOSED_FORM_ORTHONORMALITY {
        return fallback(format!("orthonormality defect {ortho:e}"));
    }
    Ok(spectrum.with_note(reading.describe()))
}

/// Even block in the isotropic XY + DM case: two decoupled levels and a
/// 3×3 block on |1,-1⟩, |0,0⟩, |-1,1⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedFiveBlock {
    /// Level of |1,1⟩: ħΩ₊ + γz.
    pub upper: f64,
    /// Level of |-1,-1⟩: -ħΩ₊ + γz.
    pub lower: f64,
    pub central: CMatrix,
}

impl ReducedFiveBlock {
    /// Reassembles the 5×5 matrix in the even-block ordering.
    pub fn assemble(&self) -> CMatrix {
        let mut m = CMatrix::zeros(5, 5);
        m[(0, 0)] = real(self.upper);
        m[(4, 4)] = real(self.lower);
        m.view_mut((1, 1), (3, 3)).copy_from(&self.central);
        m
    }
}

/// Tolerance on γx = γy and γxy = -γyx.
pub const ISOTROPY_TOL: f64 = 1e-12;

fn check_isotropic(p: &ModelParams) -> Result<()> {
    if p.is_isotropic_xy_dm(ISOTROPY_TOL) {
        Ok(())
    } else {
        Err(Error::ConditionsNotMet(format!(
            "need gamma_x = gamma_y and gamma_xy = -gamma_yx (got gamma_x - gamma_y = {:e}, gamma_xy + gamma_yx = {:e})",
            p.gamma_x - p.gamma_y,
            p.gamma_xy + p.gamma_yx
        )))
    }
}

pub fn reduced_five_block(p: &ModelParams) -> Result<ReducedFiveBlock> {
    check_isotropic(p)?;
    let d = derived_couplings(p);
    let pp = p.hbar * d.omega_plus;
    let mm = p.hbar * d.omega_minus;
    let gz = p.gamma_z;
    let off = c(2.0 * p.gamma_x, 2.0 * p.gamma_xy);
    let central = linalg::from_rows(&[
        &[real(mm - gz), off, ZERO],
        &[off.conj(), ZERO, off],
        &[ZERO, off.conj(), real(-mm - gz)],
    ]);
    Ok(ReducedFiveBlock { upper: pp + gz, lower: -pp + gz, central })
}

/// 2γΣˣ - 2D Σʸ + ħΩ₋Σᶻ - γz(Σᶻ)² with γ = γx, D = γxy.
pub fn effective_spin1_hamiltonian(p: &ModelParams) -> Result<CMatrix> {
    check_isotropic(p)?;
    let sz = spin1_pauli(Axis::Z);
    let mm = p.hbar * (p.omega1 - p.omega2);
    Ok(spin1_pauli(Axis::X) * real(2.0 * p.gamma_x) - spin1_pauli(Axis::Y) * real(2.0 * p.gamma_xy)
        + &sz * real(mm)
        - &sz * &sz * real(p.gamma_z))
}

/// Largest entrywise difference between two spectra's eigenvalue lists.
pub fn eigenvalue_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    x.iter().zip(&y).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

/// Spectral norm bound used for relative residual gates: max |entry| · n.
pub fn norm_bound(h: &CMatrix) -> f64 {
    max_abs(h) * h.nrows() as f64
}
