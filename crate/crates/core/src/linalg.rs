//! Closed-form helpers for 2×2 real matrices.

use nalgebra::{Matrix2, Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Mat2 = Matrix2<f64>;

/// Guard used by every closed-form inverse.
pub const DET_GUARD: f64 = 1e-14;

/// Eigenvalues of a symmetric 2×2 matrix, ascending.
///
/// The smaller one is recovered from the determinant when both have the same
/// sign, which keeps it accurate for badly scaled positive definite matrices.
pub fn sym_eigenvalues(m: &Mat2) -> (f64, f64) {
    let a = m[(0, 0)];
    let d = m[(1, 1)];
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let mean = 0.5 * (a + d);
    let half_gap = (0.5 * (a - d)).hypot(b);
    let hi = mean + half_gap;
    let lo = mean - half_gap;
    let det = a * d - b * b;
    if hi > 0.0 && det > 0.0 {
        (det / hi, hi)
    } else if lo < 0.0 && det > 0.0 {
        (lo, det / lo)
    } else {
        (lo, hi)
    }
}

pub fn min_eigenvalue(m: &Mat2) -> f64 {
    sym_eigenvalues(m).0
}

/// Spectral (operator 2-) norm from the eigenvalues of the Gram matrix.
pub fn spectral_norm(m: &Mat2) -> f64 {
    let gram = m.transpose() * m;
    let (_, hi) = sym_eigenvalues(&gram);
    hi.max(0.0).sqrt()
}

/// Moduli of the two eigenvalues, largest first.
pub fn eigen_moduli(m: &Mat2) -> (f64, f64) {
    let tr = m.trace();
    let det = m.determinant();
    let disc = 0.25 * tr * tr - det;
    if disc < 0.0 {
        // complex pair: |λ|² = det
        let r = det.max(0.0).sqrt();
        (r, r)
    } else {
        let s = disc.sqrt();
        // avoid cancellation in the smaller root
        let big = 0.5 * tr + s.copysign(tr);
        let small = if big != 0.0 { det / big } else { 0.0 };
        let (x, y) = (big.abs(), small.abs());
        if x >= y {
            (x, y)
        } else {
            (y, x)
        }
    }
}

pub fn spectral_radius(m: &Mat2) -> f64 {
    eigen_moduli(m).0
}

/// `max |1 + λ(z)|`, accurate when the eigenvalues of `I + z` are near one.
pub fn shifted_spectral_radius(z: &Mat2) -> f64 {
    let half_tr = 0.5 * z.trace();
    let half_gap = 0.5 * (z[(0, 0)] - z[(1, 1)]);
    let disc = half_gap * half_gap + z[(0, 1)] * z[(1, 0)];
    if disc < 0.0 {
        // |1 + λ|² = 1 + tr z + det z for a complex pair
        (1.0 + z.trace() + z.determinant()).max(0.0).sqrt()
    } else {
        let s = disc.sqrt();
        (1.0 + half_tr + s).abs().max((1.0 + half_tr - s).abs())
    }
}

pub fn inverse(m: &Mat2) -> Result<Mat2> {
    let det = m.determinant();
    if det.abs() <= DET_GUARD {
        return Err(Error::Singular(det));
    }
    Ok(Mat2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det)
}

pub fn symmetrize(m: &Mat2) -> Mat2 {
    0.5 * (m + m.transpose())
}

fn sym_from(v: &Vector3<f64>) -> Mat2 {
    Mat2::new(v[0], v[1], v[1], v[2])
}

fn sym_coords(m: &Mat2) -> Vector3<f64> {
    Vector3::new(m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)])
}

/// Solves the 3×3 system `L(X) = rhs` for symmetric `X`, where `L` is linear
/// on symmetric matrices and is probed on the basis E11, E12+E21, E22.
fn solve_symmetric_linear(op: impl Fn(&Mat2) -> Mat2, rhs: &Mat2) -> Result<Mat2> {
    let basis = [
        Mat2::new(1.0, 0.0, 0.0, 0.0),
        Mat2::new(0.0, 1.0, 1.0, 0.0),
        Mat2::new(0.0, 0.0, 0.0, 1.0),
    ];
    let mut sys = Matrix3::zeros();
    for (j, e) in basis.iter().enumerate() {
        sys.set_column(j, &sym_coords(&op(e)));
    }
    let det = sys.determinant();
    let lu = sys.lu();
    let sol = lu.solve(&sym_coords(rhs)).ok_or(Error::Singular(det))?;
    if !sol.iter().all(|x| x.is_finite()) {
        return Err(Error::Singular(det));
    }
    Ok(sym_from(&sol))
}

/// Symmetric solution of `X·U + Uᵀ·X = -Q`.
pub fn continuous_lyapunov(u: &Mat2, q: &Mat2) -> Result<Mat2> {
    let x = solve_symmetric_linear(|x| x * u + u.transpose() * x, &(-q))?;
    Ok(symmetrize(&x))
}

/// Symmetric solution of `X = Mᵀ·X·M + Q`.
///
/// The system is diagonally balanced first (`M ↦ D⁻¹MD`), which matters when
/// the off-diagonal entries of `M` differ by many orders of magnitude.
pub fn discrete_lyapunov(m: &Mat2, q: &Mat2) -> Result<Mat2> {
    let (m12, m21) = (m[(0, 1)].abs(), m[(1, 0)].abs());
    let s = if m12 > 0.0 && m21 > 0.0 {
        (m21 / m12).sqrt()
    } else {
        1.0
    };
    let d = Mat2::new(1.0, 0.0, 0.0, s);
    let d_inv = Mat2::new(1.0, 0.0, 0.0, 1.0 / s);
    let mb = d_inv * m * d;
    let qb = d * q * d;
    let xb = solve_symmetric_linear(|x| x - mb.transpose() * x * mb, &qb)?;
    Ok(symmetrize(&(d_inv * xb * d_inv)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn symmetric_eigenvalues_of_diagonal() {
        let (lo, hi) = sym_eigenvalues(&Mat2::new(3.0, 0.0, 0.0, -1.0));
        assert_relative_eq!(lo, -1.0);
        assert_relative_eq!(hi, 3.0);
    }

    #[test]
    fn badly_scaled_spd_min_eigenvalue() {
        // [[1, 1e3], [1e3, 1e6 + 1]] has det 1e6 + 1 - 1e6 = 1
        let m = Mat2::new(1.0, 1e3, 1e3, 1e6 + 1.0);
        let (lo, hi) = sym_eigenvalues(&m);
        assert_relative_eq!(lo * hi, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn spectral_norm_is_largest_singular_value() {
        assert_relative_eq!(spectral_norm(&Mat2::new(3.0, 0.0, 4.0, 0.0)), 5.0, epsilon = 1e-14);
        assert_relative_eq!(spectral_norm(&Mat2::new(0.0, 1.0, -1.0, 0.0)), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eigen_moduli_complex_pair() {
        let (r1, r2) = eigen_moduli(&Mat2::new(0.0, 1.0, -0.25, 0.0));
        assert_relative_eq!(r1, 0.5, epsilon = 1e-15);
        assert_relative_eq!(r2, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn inverse_rejects_singular() {
        assert!(matches!(
            inverse(&Mat2::new(1.0, 2.0, 2.0, 4.0)),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn discrete_lyapunov_geometric_series() {
        let x = discrete_lyapunov(&(0.5 * Mat2::identity()), &Mat2::identity()).unwrap();
        assert_relative_eq!(x, Mat2::identity() * (4.0 / 3.0), epsilon = 1e-14);
        let x0 = discrete_lyapunov(&Mat2::zeros(), &Mat2::new(2.0, 1.0, 1.0, 3.0)).unwrap();
        assert_relative_eq!(x0, Mat2::new(2.0, 1.0, 1.0, 3.0), epsilon = 1e-14);
    }

    #[test]
    fn discrete_lyapunov_residual_on_skewed_matrix() {
        let m = Mat2::new(0.999, 6.28, 1e-12, 0.998);
        let q = Mat2::new(6.0, 20.0, 20.0, 80.0);
        let x = discrete_lyapunov(&m, &q).unwrap();
        let r = x - m.transpose() * x * m - q;
        assert!(spectral_norm(&r) <= 1e-9 * spectral_norm(&x));
    }

    #[test]
    fn shifted_radius_matches_direct_radius() {
        for z in [
            Mat2::new(-0.3, 0.2, -0.5, 0.1),
            Mat2::new(0.5, 1.0, 0.25, -0.2),
            Mat2::new(-2.0, 0.0, 0.0, -0.5),
        ] {
            let direct = spectral_radius(&(Mat2::identity() + z));
            assert_relative_eq!(shifted_spectral_radius(&z), direct, epsilon = 1e-14);
        }
    }

    #[test]
    fn shifted_radius_resolves_tiny_damping() {
        // rotation by θ scaled by e^{-δ}: Z = e^{-δ}R(θ) − I
        let (theta, delta) = (1e-7_f64, 1e-12_f64);
        let s = (-delta).exp();
        let z = Mat2::new(
            -(s * (1.0 - theta.cos())) - (1.0 - s),
            -s * theta.sin(),
            s * theta.sin(),
            -(s * (1.0 - theta.cos())) - (1.0 - s),
        );
        let r = shifted_spectral_radius(&z);
        assert!(r < 1.0);
        assert_relative_eq!(1.0 - r, delta, max_relative = 1e-3);
    }
}
