//! SU(d) elements, distances and Haar sampling.

use std::fmt;
use std::ops::Mul;

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{arg, cis, cplx, modulus, Real};

pub type CMatrix<T> = DMatrix<Complex<T>>;

/// Tolerance on `‖U†U − I‖_F` and `|det U − 1|` accepted by [`Unitary::new`].
pub const UNITARY_TOL: f64 = 1e-10;

/// Matrix distance used when comparing group elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    /// Largest singular value of `U − V`.
    #[default]
    Operator,
    /// Root-sum-square of the entries of `U − V`.
    Frobenius,
}

/// An element of SU(d), stored as a dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct Unitary<T: Real = f64> {
    m: CMatrix<T>,
}

impl<T: Real> fmt::Debug for Unitary<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Unitary(d={}, ", self.dim())?;
        f.debug_list()
            .entries(
                (0..self.dim())
                    .map(|r| (0..self.dim()).map(|c| self.m[(r, c)]).collect::<Vec<_>>()),
            )
            .finish()?;
        write!(f, ")")
    }
}

impl<T: Real> Unitary<T> {
    /// Validates `m` against [`UNITARY_TOL`]. Input is never repaired.
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        Self::with_tolerance(m, UNITARY_TOL, "")
    }

    pub fn with_tolerance(m: CMatrix<T>, tol: f64, label: &str) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::Malformed(format!(
                "matrix `{label}` is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        let udev: f64 = unitarity_defect(&m).as_f64();
        if !(udev <= tol) {
            return Err(Error::NotUnitary {
                label: label.to_owned(),
                deviation: udev,
            });
        }
        let ddev = modulus(m.determinant() - Complex::new(T::one(), T::zero())).as_f64();
        if !(ddev <= tol) {
            return Err(Error::NotSpecial {
                label: label.to_owned(),
                deviation: ddev,
            });
        }
        Ok(Self { m })
    }

    /// Row-major entries.
    pub fn from_rows(d: usize, entries: &[Complex<T>]) -> Result<Self> {
        if entries.len() != d * d {
            return Err(Error::Malformed(format!(
                "expected {} entries, got {}",
                d * d,
                entries.len()
            )));
        }
        Self::new(CMatrix::from_row_slice(d, d, entries))
    }

    /// Wraps a matrix already known to be in SU(d), e.g. a product of elements.
    pub(crate) fn from_matrix_unchecked(m: CMatrix<T>) -> Self {
        debug_assert!(m.is_square());
        Self { m }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            m: CMatrix::identity(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex<T> {
        self.m[(row, col)]
    }

    /// Row-major copy of the entries.
    pub fn to_rows(&self) -> Vec<Complex<T>> {
        self.m.transpose().iter().copied().collect()
    }

    /// The inverse `U†`.
    pub fn adjoint(&self) -> Self {
        Self {
            m: self.m.adjoint(),
        }
    }

    pub fn trace(&self) -> Complex<T> {
        self.m.trace()
    }

    pub fn determinant(&self) -> Complex<T> {
        self.m.determinant()
    }

    pub fn mul_checked(&self, rhs: &Self) -> Result<Self> {
        check_dims(self.dim(), rhs.dim())?;
        Ok(self * rhs)
    }

    pub fn cast<S: Real>(&self) -> Unitary<S> {
        Unitary {
            m: self
                .m
                .map(|z| Complex::new(S::of(z.re.as_f64()), S::of(z.im.as_f64()))),
        }
    }
}

impl<T: Real> Mul<&Unitary<T>> for &Unitary<T> {
    type Output = Unitary<T>;

    fn mul(self, rhs: &Unitary<T>) -> Unitary<T> {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in product");
        Unitary {
            m: &self.m * &rhs.m,
        }
    }
}

impl<T: Real> Mul for Unitary<T> {
    type Output = Unitary<T>;

    fn mul(self, rhs: Unitary<T>) -> Unitary<T> {
        &self * &rhs
    }
}

/// `‖M†M − I‖_F`.
pub fn unitarity_defect<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    (m.adjoint() * m - CMatrix::<T>::identity(n, n)).norm()
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

/// The SU(2) element `[[e^{iα}cosθ, e^{iβ}sinθ], [−e^{−iβ}sinθ, e^{−iα}cosθ]]`.
pub fn su2_from_angles<T: Real>(alpha: T, beta: T, theta: T) -> Unitary<T> {
    let (s, c) = (theta.sin(), theta.cos());
    let ea = cis(alpha);
    let eb = cis(beta);
    let m = CMatrix::from_row_slice(2, 2, &[ea * c, eb * s, -eb.conj() * s, ea.conj() * c]);
    Unitary::from_matrix_unchecked(m)
}

/// Distance between `u` and `v` in the chosen metric.
pub fn dist<T: Real>(u: &Unitary<T>, v: &Unitary<T>, metric: MetricKind) -> Result<T> {
    check_dims(u.dim(), v.dim())?;
    Ok(match metric {
        MetricKind::Operator => op_norm(&(&u.m - &v.m)),
        MetricKind::Frobenius => (&u.m - &v.m).norm(),
    })
}

/// `(operator, frobenius)` distances.
pub fn dist_both<T: Real>(u: &Unitary<T>, v: &Unitary<T>) -> Result<(T, T)> {
    check_dims(u.dim(), v.dim())?;
    let diff = &u.m - &v.m;
    Ok((op_norm(&diff), diff.norm()))
}

/// Largest singular value.
pub fn op_norm<T: Real>(a: &CMatrix<T>) -> T {
    if a.nrows() == 2 && a.ncols() == 2 {
        op_norm_2x2([a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]])
    } else {
        a.singular_values().max()
    }
}

/// Largest singular value of a row-major 2×2 complex matrix, from the
/// closed-form top eigenvalue of `A†A`.
pub(crate) fn op_norm_2x2<T: Real>(a: [Complex<T>; 4]) -> T {
    let two = T::of(2.0);
    let m11 = a[0].norm_sqr() + a[2].norm_sqr();
    let m22 = a[1].norm_sqr() + a[3].norm_sqr();
    let m12 = a[0].conj() * a[1] + a[2].conj() * a[3];
    let diff = m11 - m22;
    let disc = (diff * diff + T::of(4.0) * m12.norm_sqr()).sqrt();
    ((m11 + m22 + disc) / two).max(T::zero()).sqrt()
}

/// Draws a Haar-distributed element of SU(d).
///
/// Complex Ginibre matrix, Gram–Schmidt with positive diagonal of `R`, then a
/// global phase by the principal `d`-th root of the determinant.
pub fn haar_sample<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Unitary<T> {
    assert!(d >= 2, "haar_sample requires d >= 2");
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mut q = CMatrix::<T>::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        cplx(re * half, im * half)
    });
    // Modified Gram–Schmidt on columns. The Ginibre matrix is full rank with
    // probability one.
    for k in 0..d {
        for j in 0..k {
            let proj: Complex<T> = q.column(j).dotc(&q.column(k));
            let qj = q.column(j).clone_owned();
            let mut ck = q.column_mut(k);
            ck -= qj * proj;
        }
        let norm = q.column(k).norm();
        let mut ck = q.column_mut(k);
        ck *= Complex::new(T::one() / norm, T::zero());
    }
    fix_determinant(q)
}

/// Multiplies by `det^{-1/d}` (principal branch) so the result has unit
/// determinant.
pub(crate) fn fix_determinant<T: Real>(mut q: CMatrix<T>) -> Unitary<T> {
    let d = q.nrows();
    let det = q.determinant();
    let inv_d = T::one() / T::of(d as f64);
    let phase = -arg(det) * inv_d;
    let scale = modulus(det).powf(-inv_d);
    let c = cis(phase) * scale;
    q *= c;
    Unitary::from_matrix_unchecked(q)
}

/// Compares the products `U_m⋯U_1` and `V_m⋯V_1` (`us[0]` acts first).
///
/// Returns `(gap, bound)` where `gap` is the operator distance between the
/// products and `bound = Σ dist(U_i, V_i)`; `gap ≤ bound` always.
pub fn hybrid_gap<T: Real>(us: &[Unitary<T>], vs: &[Unitary<T>]) -> Result<(T, T)> {
    if us.len() != vs.len() {
        return Err(Error::LengthMismatch {
            left: us.len(),
            right: vs.len(),
        });
    }
    if us.is_empty() {
        return Ok((T::zero(), T::zero()));
    }
    let d = us[0].dim();
    let mut pu = Unitary::identity(d);
    let mut pv = Unitary::identity(d);
    let mut bound = T::zero();
    for (u, v) in us.iter().zip(vs) {
        check_dims(d, u.dim())?;
        check_dims(d, v.dim())?;
        bound += dist(u, v, MetricKind::Operator)?;
        pu = u * &pu;
        pv = v * &pv;
    }
    Ok((dist(&pu, &pv, MetricKind::Operator)?, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn angles_identity_and_substitutions() {
        let id = su2_from_angles(0.0, 0.0, 0.0);
        assert_eq!(id, Unitary::identity(2));

        let u = su2_from_angles(0.0, 0.0, FRAC_PI_2);
        let want = [c(0., 0.), c(1., 0.), c(-1., 0.), c(0., 0.)];
        for (a, b) in u.to_rows().iter().zip(want) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
        }

        let u = su2_from_angles(FRAC_PI_2, 0.0, 0.0);
        let want = [c(0., 1.), c(0., 0.), c(0., 0.), c(0., -1.)];
        for (a, b) in u.to_rows().iter().zip(want) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn angles_land_in_su2() {
        let u = su2_from_angles(0.3, -1.2, 2.1);
        assert!(unitarity_defect(u.matrix()) < 1e-14);
        assert!((u.determinant() - c(1., 0.)).norm() < 1e-14);
    }

    #[test]
    fn worked_distances() {
        let id = Unitary::<f64>::identity(2);
        let z = su2_from_angles(FRAC_PI_2, 0.0, 0.0);
        assert_eq!(dist(&id, &id, MetricKind::Operator).unwrap(), 0.0);
        assert_abs_diff_eq!(
            dist(&id, &z, MetricKind::Operator).unwrap(),
            SQRT_2,
            epsilon = 1e-15
        );
        let minus = Unitary::from_matrix_unchecked(-id.matrix().clone());
        assert_abs_diff_eq!(
            dist(&id, &minus, MetricKind::Frobenius).unwrap(),
            2.0 * SQRT_2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            dist(&id, &minus, MetricKind::Operator).unwrap(),
            2.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = Unitary::<f64>::identity(2);
        let b = Unitary::<f64>::identity(3);
        assert!(matches!(
            dist(&a, &b, MetricKind::Operator),
            Err(Error::DimensionMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn rejects_non_unitary_input() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.1, 0.), c(0., 0.), c(0., 0.), c(1., 0.)]);
        assert!(matches!(Unitary::new(m), Err(Error::NotUnitary { .. })));
        // unitary with det = -1
        let m = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
        assert!(matches!(Unitary::new(m), Err(Error::NotSpecial { .. })));
    }

    #[test]
    fn op_norm_matches_svd_in_3d_and_2x2_closed_form() {
        let mut rng = substream(3, 0);
        for _ in 0..50 {
            let a: Unitary = haar_sample(2, &mut rng);
            let b: Unitary = haar_sample(2, &mut rng);
            let diff = a.matrix() - b.matrix();
            let svd = diff.singular_values().max();
            assert_abs_diff_eq!(op_norm(&diff), svd, epsilon = 1e-12);
        }
    }

    #[test]
    fn haar_samples_are_special_unitary() {
        let mut rng = substream(7, 1);
        for d in 2..=5 {
            for _ in 0..20 {
                let u: Unitary = haar_sample(d, &mut rng);
                assert!(unitarity_defect(u.matrix()) < 1e-10);
                assert!((u.determinant() - c(1., 0.)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn haar_sample_in_single_precision() {
        let mut rng = substream(7, 2);
        let u: Unitary<f32> = haar_sample(3, &mut rng);
        assert!(unitarity_defect(u.matrix()) < 1e-5);
    }

    #[test]
    fn hybrid_gap_edge_cases() {
        let mut rng = substream(11, 0);
        let us: Vec<Unitary> = (0..5).map(|_| haar_sample(2, &mut rng)).collect();
        let (gap, bound) = hybrid_gap(&us, &us).unwrap();
        assert_eq!(gap, 0.0);
        assert_eq!(bound, 0.0);

        let a: Unitary = haar_sample(2, &mut rng);
        let b: Unitary = haar_sample(2, &mut rng);
        let (gap, bound) = hybrid_gap(std::slice::from_ref(&a), std::slice::from_ref(&b)).unwrap();
        assert_abs_diff_eq!(gap, bound, epsilon = 1e-15);
        assert_abs_diff_eq!(
            gap,
            dist(&a, &b, MetricKind::Operator).unwrap(),
            epsilon = 1e-15
        );

        assert!(matches!(
            hybrid_gap(&us, &us[..2]),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
