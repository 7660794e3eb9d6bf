//! Small dense complex linear algebra: 4×4 eigen-decomposition built on the
//! complex Schur form.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::LinalgError;

pub type CMatrix4 = Matrix4<Complex64>;
pub type CVector4 = Vector4<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Right eigen-decomposition `A = V·diag(values)·V⁻¹`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: [Complex64; 4],
    /// Unit-norm eigenvectors as columns.
    pub vectors: CMatrix4,
    /// `V⁻¹`, absent when `V` is numerically singular.
    pub inverse: Option<CMatrix4>,
    /// Frobenius-norm condition estimate `‖V‖·‖V⁻¹‖` (infinite when singular).
    pub condition: f64,
}

/// Eigenvalues and eigenvectors of a general complex 4×4 matrix.
///
/// Eigenvalues come from the diagonal of the complex Schur form `A = Q T Q*`;
/// eigenvectors are obtained by back-substitution in `T` and rotated by `Q`.
/// Near-coincident eigenvalues are separated by a tiny shift in the
/// substitution, so defective matrices yield (almost) parallel vectors and a
/// huge condition estimate rather than a failure.
pub fn eig4(a: &CMatrix4) -> Result<EigenDecomposition, LinalgError> {
    let norm = a.norm().max(f64::MIN_POSITIVE);
    if !a.iter().all(|z| z.is_finite()) {
        return Err(LinalgError::NoConvergence);
    }
    let schur = (*a)
        .try_schur(f64::EPSILON * 0.5, 10_000)
        .ok_or(LinalgError::NoConvergence)?;
    let (q, t) = schur.unpack();
    let values = [t[(0, 0)], t[(1, 1)], t[(2, 2)], t[(3, 3)]];
    let small = f64::EPSILON * norm;

    let mut vectors = CMatrix4::zeros();
    for k in 0..4 {
        let lambda = values[k];
        let mut x = CVector4::zeros();
        x[k] = Complex64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in (j + 1)..=k {
                acc += t[(j, m)] * x[m];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < small {
                denom = Complex64::new(small, 0.0);
            }
            x[j] = -acc / denom;
        }
        let v = q * x;
        let n = v.norm();
        vectors.set_column(k, &(v / Complex64::new(n, 0.0)));
    }

    let inverse = vectors.try_inverse();
    let condition = match &inverse {
        Some(inv) if inv.iter().all(|z| z.is_finite()) => vectors.norm() * inv.norm(),
        _ => f64::INFINITY,
    };
    Ok(EigenDecomposition {
        values,
        vectors,
        inverse: inverse.filter(|inv| inv.iter().all(|z| z.is_finite())),
        condition,
    })
}

/// Eigenvalues only.
pub fn eigenvalues4(a: &CMatrix4) -> Result<[Complex64; 4], LinalgError> {
    let schur = (*a)
        .try_schur(f64::EPSILON * 0.5, 10_000)
        .ok_or(LinalgError::NoConvergence)?;
    let t = schur.unpack().1;
    Ok([t[(0, 0)], t[(1, 1)], t[(2, 2)], t[(3, 3)]])
}

pub fn to_complex(a: &Matrix4<f64>) -> CMatrix4 {
    a.map(|x| Complex64::new(x, 0.0))
}

/// Largest absolute entry difference.
pub fn max_abs_diff(a: &CMatrix4, b: &CMatrix4) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Sorts by real part, ties broken by imaginary part.
pub fn sort_spectrum(values: &mut [Complex64]) {
    values.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}
