//! Dense real matrices and the Euclidean (Frobenius) inner product.
//!
//! Points and tangent vectors are stored as column-major `n × p` matrices.
//! Vector-valued problems (sphere) use `p = 1`.

use std::hash::{Hash, Hasher};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Library-wide dense matrix type.
pub type Mat = DMatrix<f64>;

/// `Σᵢⱼ aᵢⱼ bᵢⱼ`, rejecting operands of different shape.
pub fn frobenius_inner(a: &Mat, b: &Mat) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension {
            expected: a.shape(),
            got: b.shape(),
        });
    }
    Ok(inner(a, b))
}

/// Frobenius norm.
pub fn fro_norm(a: &Mat) -> f64 {
    a.norm()
}

/// Unchecked Frobenius inner product for hot loops; shapes must agree.
#[inline]
pub(crate) fn inner(a: &Mat, b: &Mat) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x * y)
        .sum()
}

pub(crate) fn check_shape(expected: (usize, usize), got: &Mat) -> Result<()> {
    if got.shape() != expected {
        return Err(Error::Dimension {
            expected,
            got: got.shape(),
        });
    }
    Ok(())
}

/// Symmetric part `(A + Aᵀ)/2` of a square matrix.
pub fn sym(a: &Mat) -> Mat {
    (a + a.transpose()) * 0.5
}

/// Matrix with i.i.d. standard normal entries.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Gaussian matrix scaled to unit Frobenius norm.
pub fn unit_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    let g = gaussian(rng, rows, cols);
    let n = g.norm();
    g / n
}

/// Bitwise fingerprint of a matrix, used to assert that two runs share a start point.
pub fn fingerprint(a: &Mat) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    a.nrows().hash(&mut h);
    a.ncols().hash(&mut h);
    for v in a.as_slice() {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inner_examples() {
        let i2 = Mat::identity(2, 2);
        assert_eq!(frobenius_inner(&i2, &i2).unwrap(), 2.0);
        let a = Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(frobenius_inner(&a, &Mat::zeros(2, 2)).unwrap(), 0.0);
        let b = Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(frobenius_inner(&a, &b).unwrap(), 5.0);
    }

    #[test]
    fn inner_shape_mismatch() {
        let err = frobenius_inner(&Mat::zeros(2, 2), &Mat::zeros(2, 3)).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(fro_norm(&Mat::zeros(3, 2)), 0.0);
        assert!((fro_norm(&Mat::identity(3, 3)) - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(fro_norm(&Mat::from_column_slice(2, 1, &[3.0, 4.0])), 5.0);
    }

    #[test]
    fn fingerprint_distinguishes_bits() {
        let a = Mat::from_element(2, 2, 1.0);
        let mut b = a.clone();
        assert_eq!(fingerprint(&a), fingerprint(&b));
        b[(1, 1)] = f64::from_bits(1.0f64.to_bits() + 1);
        assert_ne!(fingerprint(&a), fingerprint(&b));
    }

    proptest! {
        #[test]
        fn cauchy_schwarz(
            a in proptest::collection::vec(-10.0..10.0f64, 12),
            b in proptest::collection::vec(-10.0..10.0f64, 12),
        ) {
            let a = Mat::from_vec(3, 4, a);
            let b = Mat::from_vec(3, 4, b);
            let lhs = frobenius_inner(&a, &b).unwrap().abs();
            prop_assert!(fro_norm(&a) * fro_norm(&b) - lhs >= -1e-12);
        }

        #[test]
        fn inner_is_symmetric_and_bilinear(
            a in proptest::collection::vec(-5.0..5.0f64, 6),
            b in proptest::collection::vec(-5.0..5.0f64, 6),
            c in proptest::collection::vec(-5.0..5.0f64, 6),
            s in -3.0..3.0f64,
        ) {
            let (a, b, c) = (Mat::from_vec(2, 3, a), Mat::from_vec(2, 3, b), Mat::from_vec(2, 3, c));
            prop_assert!((inner(&a, &b) - inner(&b, &a)).abs() < 1e-12);
            let lhs = inner(&(&a * s + &c), &b);
            let rhs = s * inner(&a, &b) + inner(&c, &b);
            prop_assert!((lhs - rhs).abs() < 1e-10);
        }
    }
}
