//! Parity constant of motion and the odd/even block decomposition.

use serde::Serialize;
use serde_json::{json, Value};

use crate::linalg::{self, commutator, max_abs, real, CMatrix, CVector};
use crate::model::{BasisLabel, PairOperator};
use crate::{Error, Result};

/// Odd-parity (K = -1) basis in block order.
pub const ODD_BASIS: [BasisLabel; 4] = [
    BasisLabel::new(1, 0),
    BasisLabel::new(0, 1),
    BasisLabel::new(0, -1),
    BasisLabel::new(-1, 0),
];

/// Even-parity (K = +1) basis in block order.
pub const EVEN_BASIS: [BasisLabel; 5] = [
    BasisLabel::new(1, 1),
    BasisLabel::new(1, -1),
    BasisLabel::new(0, 0),
    BasisLabel::new(-1, 1),
    BasisLabel::new(-1, -1),
];

/// Relative tolerance on ‖[h,K]‖ accepted by [`block_decompose`].
pub const PARITY_TOL: f64 = 1e-10;

/// K = cos(π Σᶻ_tot): +1 on even total M, -1 on odd.
pub fn parity_operator() -> PairOperator {
    let d: Vec<f64> =
        BasisLabel::ORDER.iter().map(|l| if l.is_even() { 1.0 } else { -1.0 }).collect();
    PairOperator::new(linalg::diag_real(&d)).expect("9x9")
}

// Column k of Ũ is the standard basis vector of this row.
const U_COLUMN_SOURCE: [usize; 9] = [1, 3, 5, 7, 0, 2, 4, 6, 8];

/// The permutation Ũ whose columns are the odd basis followed by the even
/// basis, so that Ũ†KŨ = diag(-1,-1,-1,-1,1,1,1,1,1).
pub fn permutation_u() -> PairOperator {
    let mut u = CMatrix::zeros(9, 9);
    for (col, &row) in U_COLUMN_SOURCE.iter().enumerate() {
        u[(row, col)] = real(1.0);
    }
    debug_assert!({
        let k = parity_operator();
        let kt = u.adjoint() * k.matrix() * &u;
        kt == linalg::diag_real(&[-1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0, 1.0])
    });
    PairOperator::new(u).expect("9x9")
}

/// The two diagonal blocks of Ũ†hŨ.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityBlockDecomposition {
    /// 4×4 block on [`ODD_BASIS`].
    pub h_minus: CMatrix,
    /// 5×5 block on [`EVEN_BASIS`].
    pub h_plus: CMatrix,
    /// Largest off-block entry of Ũ†hŨ.
    pub residual: f64,
}

impl ParityBlockDecomposition {
    pub fn basis_minus(&self) -> [BasisLabel; 4] {
        ODD_BASIS
    }

    pub fn basis_plus(&self) -> [BasisLabel; 5] {
        EVEN_BASIS
    }

    /// Nested `[re, im]` arrays plus basis labels.
    pub fn to_json(&self) -> Value {
        json!({
            "basis_minus": ODD_BASIS.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "basis_plus": EVEN_BASIS.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "h_minus": matrix_to_json(&self.h_minus),
            "h_plus": matrix_to_json(&self.h_plus),
            "residual": self.residual,
        })
    }
}

impl Serialize for ParityBlockDecomposition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

pub fn matrix_to_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect())
            })
            .collect(),
    )
}

pub fn vector_to_json(v: &CVector) -> Value {
    Value::Array(v.iter().map(|z| json!([z.re, z.im])).collect())
}

/// ‖[extra, K]‖_max. Zero means `extra` may be added to H without spoiling
/// the block structure.
pub fn check_k_commuting(extra: &PairOperator) -> f64 {
    max_abs(&commutator(extra.matrix(), parity_operator().matrix()))
}

/// Splits a parity-symmetric operator into its odd and even blocks.
pub fn block_decompose(h: &PairOperator) -> Result<ParityBlockDecomposition> {
    let m = h.matrix();
    let scale = linalg::tolerance_scale(m);
    let norm = check_k_commuting(h);
    if norm > PARITY_TOL * scale {
        return Err(Error::NotParitySymmetric { norm });
    }
    // Ũ is a permutation, so Ũ†hŨ only reorders entries
    let t = CMatrix::from_fn(9, 9, |i, j| m[(U_COLUMN_SOURCE[i], U_COLUMN_SOURCE[j])]);
    let mut residual: f64 = 0.0;
    for i in 0..4 {
        for j in 4..9 {
            residual = residual.max(t[(i, j)].norm()).max(t[(j, i)].norm());
        }
    }
    Ok(ParityBlockDecomposition {
        h_minus: t.view((0, 0), (4, 4)).into_owned(),
        h_plus: t.view((4, 4), (5, 5)).into_owned(),
        residual: residual / scale,
    })
}

/// Places a 4-component odd-block vector into the 9-dimensional space.
pub fn embed_odd(v: &CVector) -> CVector {
    let mut out = CVector::zeros(9);
    for (k, l) in ODD_BASIS.iter().enumerate() {
        out[l.index()] = v[k];
    }
    out
}

/// Places a 5-component even-block vector into the 9-dimensional space.
pub fn embed_even(v: &CVector) -> CVector {
    let mut out = CVector::zeros(9);
    for (k, l) in EVEN_BASIS.iter().enumerate() {
        out[l.index()] = v[k];
    }
    out
}

pub fn restrict_odd(v: &CVector) -> CVector {
    CVector::from_iterator(4, ODD_BASIS.iter().map(|l| v[l.index()]))
}

pub fn restrict_even(v: &CVector) -> CVector {
    CVector::from_iterator(5, EVEN_BASIS.iter().map(|l| v[l.index()]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, identity, unitarity_defect, ZERO};
    use crate::model::{build_hamiltonian, derived_couplings, on_first, spin1_pauli, Axis, ModelParams};

    fn generic() -> ModelParams {
        ModelParams {
            omega1: 0.7,
            omega2: -0.3,
            gamma_x: 1.1,
            gamma_y: 0.4,
            gamma_z: -0.9,
            gamma_xy: 0.25,
            gamma_yx: -0.6,
            hbar: 1.0,
        }
    }

    #[test]
    fn parity_is_alternating_diagonal() {
        let k = parity_operator();
        assert_eq!(*k.matrix(), linalg::diag_real(&[1., -1., 1., -1., 1., -1., 1., -1., 1.]));
        assert_eq!(k.matrix() * k.matrix(), identity(9));
        let zero_zero = BasisLabel::new(0, 0).index();
        assert_eq!(k.matrix()[(zero_zero, zero_zero)], real(1.0));
    }

    #[test]
    fn u_is_unitary_and_sorts_parity() {
        let u = permutation_u();
        assert_eq!(unitarity_defect(u.matrix()), 0.0);
        let kt = u.matrix().adjoint() * parity_operator().matrix() * u.matrix();
        assert_eq!(kt, linalg::diag_real(&[-1., -1., -1., -1., 1., 1., 1., 1., 1.]));
        // standard vectors 2, 4, 6, 8 (1-based) land in the first four slots
        let ut = u.matrix().adjoint();
        for (slot, std) in [1usize, 3, 5, 7].iter().enumerate() {
            let mut e = CVector::zeros(9);
            e[*std] = real(1.0);
            let mapped = &ut * e;
            assert_eq!(mapped[slot], real(1.0));
        }
    }

    #[test]
    fn u_is_not_symmetric() {
        let u = permutation_u();
        assert_ne!(*u.matrix(), u.matrix().transpose());
    }

    #[test]
    fn zero_hamiltonian_blocks() {
        let d = block_decompose(&build_hamiltonian(&ModelParams::default())).unwrap();
        assert_eq!(max_abs(&d.h_minus), 0.0);
        assert_eq!(max_abs(&d.h_plus), 0.0);
        assert_eq!(d.residual, 0.0);
    }

    #[test]
    fn h_minus_matches_closed_layout() {
        let p = generic();
        let dc = derived_couplings(&p);
        let (w1, w2) = (p.hbar * p.omega1, p.hbar * p.omega2);
        let (g1, g2) = (dc.gamma1, dc.gamma2);
        let expected = linalg::from_rows(&[
            &[real(w1), g2, g1, ZERO],
            &[g2.conj(), real(w2), ZERO, g1],
            &[g1.conj(), ZERO, real(-w2), g2],
            &[ZERO, g1.conj(), g2.conj(), real(-w1)],
        ]);
        let d = block_decompose(&build_hamiltonian(&p)).unwrap();
        assert!(max_abs(&(&d.h_minus - expected)) < 1e-14);
        assert!(d.residual < 1e-12);
    }

    #[test]
    fn h_plus_matches_closed_layout() {
        let p = generic();
        let dc = derived_couplings(&p);
        let pp = p.hbar * dc.omega_plus;
        let mm = p.hbar * dc.omega_minus;
        let gz = p.gamma_z;
        let (g1, g2) = (dc.gamma1, dc.gamma2);
        let expected = linalg::from_rows(&[
            &[real(pp + gz), ZERO, g1, ZERO, ZERO],
            &[ZERO, real(mm - gz), g2, ZERO, ZERO],
            &[g1.conj(), g2.conj(), ZERO, g2, g1],
            &[ZERO, ZERO, g2.conj(), real(-mm - gz), ZERO],
            &[ZERO, ZERO, g1.conj(), ZERO, real(-pp + gz)],
        ]);
        let d = block_decompose(&build_hamiltonian(&p)).unwrap();
        assert!(max_abs(&(&d.h_plus - expected)) < 1e-14);
    }

    #[test]
    fn h_minus_independent_of_gamma_z() {
        let p = generic();
        let a = block_decompose(&build_hamiltonian(&p)).unwrap();
        let b = block_decompose(&build_hamiltonian(&ModelParams { gamma_z: 5.0, ..p })).unwrap();
        assert_eq!(a.h_minus, b.h_minus);
        assert_ne!(a.h_plus, b.h_plus);
    }

    #[test]
    fn k_commuting_extras() {
        let sx = spin1_pauli(Axis::X);
        let sy = spin1_pauli(Axis::Y);
        let sz = spin1_pauli(Axis::Z);
        let sx2 = PairOperator::new(on_first(&(&sx * &sx))).unwrap();
        assert_eq!(check_k_commuting(&sx2), 0.0);
        let sx1 = PairOperator::new(on_first(&sx)).unwrap();
        assert!(check_k_commuting(&sx1) > 0.5);
        let mixed = PairOperator::new(linalg::kron(&sz, &(&sy * &sy))).unwrap();
        assert_eq!(check_k_commuting(&mixed), 0.0);
    }

    #[test]
    fn rejects_parity_breaking_operator() {
        let sx1 = PairOperator::new(on_first(&spin1_pauli(Axis::X))).unwrap();
        assert!(matches!(block_decompose(&sx1), Err(Error::NotParitySymmetric { .. })));
    }

    #[test]
    fn generalized_hamiltonian_still_decomposes() {
        let sx = spin1_pauli(Axis::X);
        let extra = PairOperator::new(on_first(&(&sx * &sx)) * c(0.3, 0.0)).unwrap();
        let h = &build_hamiltonian(&generic()) + &extra;
        assert!(block_decompose(&h).unwrap().residual < 1e-12);
    }

    #[test]
    fn embed_restrict_roundtrip() {
        let v = CVector::from_iterator(4, (0..4).map(|k| c(k as f64, 1.0)));
        assert_eq!(restrict_odd(&embed_odd(&v)), v);
        let w = CVector::from_iterator(5, (0..5).map(|k| c(1.0, k as f64)));
        assert_eq!(restrict_even(&embed_even(&w)), w);
    }

    #[test]
    fn json_has_pairs_and_labels() {
        let d = block_decompose(&build_hamiltonian(&generic())).unwrap();
        let j = d.to_json();
        assert_eq!(j["basis_minus"][0], "|1,0>");
        assert_eq!(j["h_plus"].as_array().unwrap().len(), 5);
        assert_eq!(j["h_minus"][0][0].as_array().unwrap().len(), 2);
    }
}
