//! The 2D Clifford algebra in the fixed Pauli-type basis, the Fourier symbol
//! of the massive Dirac operator `eps*D + a*omega`, and its spectral projectors.
//!
//! Every other module works in this single representation:
//!
//! ```text
//! gamma1 = [[0, i], [i, 0]]   gamma2 = [[0, 1], [-1, 0]]   gamma3 = [[1, 0], [0, -1]]
//! ```
//!
//! with `gamma3 = i gamma1 gamma2` playing the role of the chirality operator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

pub type C64 = Complex64;

/// A value of a spinor field in 2D.
pub type Spinor = [C64; 2];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// A 2x2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn diag(a: C64, b: C64) -> Self {
        Mat2([[a, ZERO], [ZERO, b]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    #[inline]
    pub fn apply(&self, z: &Spinor) -> Spinor {
        let m = &self.0;
        [m[0][0] * z[0] + m[0][1] * z[1], m[1][0] * z[0] + m[1][1] * z[1]]
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|row| row.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (*self - self.adjoint()).max_abs() <= tol
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-ONE)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

/// Hermitian inner product `(z, w) = sum z_k conj(w_k)`.
#[inline]
pub fn spinor_dot(z: &Spinor, w: &Spinor) -> C64 {
    z[0] * w[0].conj() + z[1] * w[1].conj()
}

#[inline]
pub fn spinor_norm_sqr(z: &Spinor) -> f64 {
    z[0].norm_sqr() + z[1].norm_sqr()
}

/// Clifford generators of the Euclidean plane and the chirality operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CliffordRep2 {
    pub gamma1: Mat2,
    pub gamma2: Mat2,
    pub gamma3: Mat2,
}

impl CliffordRep2 {
    pub const STANDARD: CliffordRep2 = CliffordRep2 {
        gamma1: Mat2([[ZERO, I], [I, ZERO]]),
        gamma2: Mat2([[ZERO, ONE], [C64::new(-1.0, 0.0), ZERO]]),
        gamma3: Mat2([[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]]),
    };

    /// `gamma_i` for `i` in `1..=3`.
    pub fn gamma(&self, i: usize) -> &Mat2 {
        match i {
            1 => &self.gamma1,
            2 => &self.gamma2,
            3 => &self.gamma3,
            _ => panic!("gamma index {i} out of range 1..=3"),
        }
    }

    /// `X1 gamma1 + X2 gamma2`.
    pub fn vector(&self, x: [f64; 2]) -> Mat2 {
        self.gamma1.scale(C64::from(x[0])) + self.gamma2.scale(C64::from(x[1]))
    }
}

/// The representation used throughout the crate.
pub fn make_clifford() -> CliffordRep2 {
    CliffordRep2::STANDARD
}

/// Clifford multiplication of a spinor value by a real tangent vector.
#[inline]
pub fn clifford_mul(x: [f64; 2], zeta: &Spinor) -> Spinor {
    // (x1 g1 + x2 g2) = [[0, i x1 + x2], [i x1 - x2, 0]]
    let upper = C64::new(x[1], x[0]);
    let lower = C64::new(-x[1], x[0]);
    [upper * zeta[1], lower * zeta[0]]
}

/// Fourier symbol of `eps*D + a*gamma3` at one wavevector, with its closed-form
/// eigen-decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSymbol {
    pub k: [f64; 2],
    pub matrix: Mat2,
    /// `(-mu, +mu)` with `mu = sqrt(eps^2 |k|^2 + a^2)`.
    pub eigen_pair: (f64, f64),
    pub proj_minus: Mat2,
    pub proj_plus: Mat2,
}

impl ModeSymbol {
    /// The positive eigenvalue `mu(k)`.
    #[inline]
    pub fn mu(&self) -> f64 {
        self.eigen_pair.1
    }
}

/// `i eps (k1 gamma1 + k2 gamma2) + a gamma3` and its spectral projectors.
///
/// The symbol squares to `mu(k)^2 I`, so `P_pm = (I +- M/mu) / 2` without any
/// iterative eigen-solve. Since `mu >= a > 0` the two eigenspaces never merge.
pub fn dirac_symbol(k: [f64; 2], eps: f64, a: f64) -> ModeSymbol {
    let cl = CliffordRep2::STANDARD;
    let matrix = cl.vector([eps * k[0], eps * k[1]]).scale(I) + cl.gamma3.scale(C64::from(a));
    let mu = (eps * eps * (k[0] * k[0] + k[1] * k[1]) + a * a).sqrt();
    let half = Mat2::IDENTITY.scale(C64::from(0.5));
    let m_over = matrix.scale(C64::from(0.5 / mu));
    ModeSymbol {
        k,
        matrix,
        eigen_pair: (-mu, mu),
        proj_minus: half - m_over,
        proj_plus: half + m_over,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
        (*a - *b).max_abs() <= tol
    }

    #[test]
    fn printed_matrices() {
        let cl = make_clifford();
        assert_eq!(cl.gamma3, Mat2::diag(ONE, -ONE));
        assert_eq!(cl.gamma1.0[0][1], I);
        assert_eq!(cl.gamma1.0[1][0], I);
        assert_eq!(cl.gamma2.0[0][1], ONE);
        assert_eq!(cl.gamma2.0[1][0], -ONE);
    }

    #[test]
    fn clifford_relations() {
        let cl = make_clifford();
        let id = Mat2::IDENTITY;
        for i in 1..=2 {
            for j in 1..=2 {
                let anti = *cl.gamma(i) * *cl.gamma(j) + *cl.gamma(j) * *cl.gamma(i);
                let expect = if i == j { id.scale(C64::from(-2.0)) } else { Mat2::ZERO };
                assert!(close(&anti, &expect, 1e-15), "i={i} j={j}");
            }
            let anti3 = cl.gamma3 * *cl.gamma(i) + *cl.gamma(i) * cl.gamma3;
            assert!(close(&anti3, &Mat2::ZERO, 1e-15));
            assert!(cl.gamma(i).scale(I).is_hermitian(0.0));
        }
        assert!(close(&(cl.gamma1 * cl.gamma2).scale(I), &cl.gamma3, 1e-15));
        assert!(close(&(cl.gamma3 * cl.gamma3), &id, 1e-15));
        assert!(cl.gamma3.is_hermitian(0.0));
    }

    #[test]
    fn symbol_at_zero_mode() {
        let s = dirac_symbol([0.0, 0.0], 0.3, 1.5);
        assert_eq!(s.eigen_pair, (-1.5, 1.5));
        assert!(close(&s.proj_plus, &Mat2::diag(ONE, ZERO), 1e-15));
        assert!(close(&s.proj_minus, &Mat2::diag(ZERO, ONE), 1e-15));
    }

    #[test]
    fn symbol_unit_mode() {
        let s = dirac_symbol([1.0, 0.0], 1.0, 1.0);
        assert!((s.mu() - 2f64.sqrt()).abs() < 1e-15);
        // eigenvalues of a 2x2 Hermitian matrix from trace and determinant
        let tr = s.matrix.trace();
        let det = s.matrix.det();
        let disc = (tr * tr - det * 4.0).sqrt();
        let lam_hi = ((tr + disc) / 2.0).re;
        assert!((lam_hi - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn clifford_mul_examples() {
        let z = [C64::new(0.3, -1.0), C64::new(2.0, 0.5)];
        assert_eq!(clifford_mul([0.0, 0.0], &z), [ZERO, ZERO]);
        let e1 = clifford_mul([1.0, 0.0], &[ONE, ZERO]);
        assert_eq!(e1, [ZERO, I]);
    }

    fn arb_spinor() -> impl Strategy<Value = Spinor> {
        prop::array::uniform4(-3.0f64..3.0)
            .prop_map(|v| [C64::new(v[0], v[1]), C64::new(v[2], v[3])])
    }

    proptest! {
        #[test]
        fn clifford_mul_matches_matrix(x in prop::array::uniform2(-5.0f64..5.0), z in arb_spinor()) {
            let m = make_clifford().vector(x).apply(&z);
            let f = clifford_mul(x, &z);
            prop_assert!((m[0] - f[0]).norm() < 1e-14 && (m[1] - f[1]).norm() < 1e-14);
        }

        #[test]
        fn unit_vector_squares_to_minus_one(theta in 0.0f64..std::f64::consts::TAU, z in arb_spinor()) {
            let x = [theta.cos(), theta.sin()];
            let w = clifford_mul(x, &clifford_mul(x, &z));
            prop_assert!((w[0] + z[0]).norm() < 1e-14 && (w[1] + z[1]).norm() < 1e-14);
        }

        #[test]
        fn clifford_mul_is_skew(x in prop::array::uniform2(-5.0f64..5.0), z in arb_spinor()) {
            let re = spinor_dot(&clifford_mul(x, &z), &z).re;
            prop_assert!(re.abs() < 1e-13);
        }

        #[test]
        fn symbol_invariants(k in prop::array::uniform2(-50.0f64..50.0), eps in 0.01f64..2.0, a in 0.1f64..3.0) {
            let s = dirac_symbol(k, eps, a);
            let id = Mat2::IDENTITY;
            prop_assert!(s.matrix.is_hermitian(1e-14));
            prop_assert!((s.eigen_pair.0 + s.eigen_pair.1).abs() < 1e-13);
            prop_assert!(close(&(s.proj_plus + s.proj_minus), &id, 1e-12));
            prop_assert!(close(&(s.proj_plus * s.proj_minus), &Mat2::ZERO, 1e-12));
            prop_assert!(close(&(s.proj_plus * s.proj_plus), &s.proj_plus, 1e-12));
            prop_assert!(s.proj_plus.is_hermitian(1e-14) && s.proj_minus.is_hermitian(1e-14));
            let mu = s.mu();
            let scale = mu.max(1.0);
            prop_assert!(close(&(s.matrix * s.proj_plus), &s.proj_plus.scale(C64::from(mu)), 1e-12 * scale));
            prop_assert!(close(&(s.matrix * s.proj_minus), &s.proj_minus.scale(C64::from(-mu)), 1e-12 * scale));
            let det = s.matrix.det();
            let expect = -(eps * eps * (k[0] * k[0] + k[1] * k[1]) + a * a);
            prop_assert!((det.re - expect).abs() < 1e-12 * expect.abs() && det.im.abs() < 1e-12 * expect.abs());
        }
    }
}
