//! Numerical kernels: Householder QR, polar projection, Haar sampling.
//!
//! QR is hand-rolled because the sign convention (nonnegative diagonal of
//! `R`) and the full orthonormal completion of `Q` are both load-bearing:
//! the former makes QR of a Gaussian matrix exactly Haar-distributed, the
//! latter supplies the orthonormal complement used by the adversarial
//! witness. Singular value decompositions delegate to nalgebra.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rotation::Rotation;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Relative threshold below which the smallest singular value marks a
/// matrix as rank-deficient.
pub const RANK_TOL: f64 = 1e-12;

pub(crate) fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub(crate) fn from_na(m: &DMatrix<f64>) -> Matrix {
    let mut data = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            data.push(m[(i, j)]);
        }
    }
    Matrix::from_raw(m.nrows(), m.ncols(), data)
}

/// Smallest and largest singular values.
pub(crate) fn singular_extremes(m: &Matrix) -> Result<(f64, f64)> {
    let svd = to_na(m)
        .try_svd(false, false, 1e-14, 1024)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &s in svd.singular_values.iter() {
        lo = lo.min(s);
        hi = hi.max(s);
    }
    Ok((lo, hi))
}

fn rank_check(m: &Matrix, context: &str) -> Result<()> {
    let (lo, hi) = singular_extremes(m)?;
    if !(lo > RANK_TOL * hi) || hi == 0.0 {
        return Err(Error::Singular(format!(
            "{context}: smallest singular value {lo:.3e} vs largest {hi:.3e}"
        )));
    }
    Ok(())
}

/// Householder QR with full `Q` accumulation.
///
/// Returns `(Q, R)` with `Q` square `rows x rows` orthogonal and `R`
/// `rows x cols` upper-triangular with nonnegative diagonal. Requires
/// `rows >= cols` and full column rank (smallest singular value above
/// `RANK_TOL` times the largest).
pub fn qr_full(a: &Matrix) -> Result<(Matrix, Matrix)> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::Dimension(format!("QR needs rows >= cols, got {m}x{n}")));
    }
    let mut r = a.clone();
    let mut q = Matrix::identity(m);
    let mut v = vec![0.0f64; m];

    // Columns 0..min(n, m-1): a reflector on the last row of a square
    // matrix would be a bare sign flip, which the sign pass below handles.
    for j in 0..n.min(m - 1) {
        // Householder vector for column j, rows j...
        let mut norm2 = 0.0;
        for i in j..m {
            let x = r.at(i, j);
            norm2 += x * x;
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            continue; // zero column; rank check below rejects
        }
        let x0 = r.at(j, j);
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        let v0 = x0 - alpha;
        v[j] = v0;
        for i in (j + 1)..m {
            v[i] = r.at(i, j);
        }
        let vnorm2 = norm2 - x0 * x0 + v0 * v0;
        if vnorm2 == 0.0 {
            continue;
        }

        // R <- H R on the trailing block.
        {
            let rs = r.as_mut_slice();
            let cols = n;
            for c in j..n {
                let mut dot = 0.0;
                for i in j..m {
                    dot += v[i] * rs[i * cols + c];
                }
                let f = 2.0 * dot / vnorm2;
                for i in j..m {
                    rs[i * cols + c] -= f * v[i];
                }
            }
        }
        // Q <- Q H (apply reflector to columns j.. of every row).
        {
            let qs = q.as_mut_slice();
            for row in 0..m {
                let base = row * m;
                let mut dot = 0.0;
                for i in j..m {
                    dot += qs[base + i] * v[i];
                }
                let f = 2.0 * dot / vnorm2;
                for i in j..m {
                    qs[base + i] -= f * v[i];
                }
            }
        }
    }

    // Exact zeros below the diagonal.
    {
        let rs = r.as_mut_slice();
        for i in 0..m {
            for c in 0..n.min(i) {
                rs[i * n + c] = 0.0;
            }
        }
    }

    // Sign convention: nonnegative diagonal of R. Flipping row j of R and
    // column j of Q preserves the product.
    for j in 0..n.min(m) {
        if r.at(j, j) < 0.0 {
            let rs = r.as_mut_slice();
            for c in j..n {
                rs[j * n + c] = -rs[j * n + c];
            }
            let qs = q.as_mut_slice();
            for row in 0..m {
                qs[row * m + j] = -qs[row * m + j];
            }
        }
    }

    rank_check(&r, "QR input is rank-deficient")?;
    Ok((q, r))
}

/// Thin QR: `Q` is `rows x cols` with orthonormal columns, `R` is
/// `cols x cols` upper-triangular with nonnegative diagonal. Same
/// preconditions as [`qr_full`].
pub fn qr_decompose(a: &Matrix) -> Result<(Matrix, Matrix)> {
    let (q_full, r_full) = qr_full(a)?;
    let (m, n) = (a.rows(), a.cols());
    let mut qd = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            qd.push(q_full.at(i, j));
        }
    }
    let mut rd = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            rd.push(r_full.at(i, j));
        }
    }
    Ok((Matrix::from_raw(m, n, qd), Matrix::from_raw(n, n, rd)))
}

/// Orthogonal polar factor of a square nonsingular matrix, as a bare matrix.
pub(crate) fn polar_factor(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "polar projection needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let svd = to_na(m)
        .try_svd(true, true, 1e-14, 1024)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &s in svd.singular_values.iter() {
        lo = lo.min(s);
        hi = hi.max(s);
    }
    if !(lo > RANK_TOL * hi) || hi == 0.0 {
        return Err(Error::Singular(format!(
            "polar projection of a singular matrix: sigma_min {lo:.3e} vs sigma_max {hi:.3e}"
        )));
    }
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    Ok(from_na(&(u * v_t)))
}

/// Project a square nonsingular matrix onto the orthogonal group: the
/// factor `U V^T` of the SVD `M = U S V^T`, which maximizes
/// `trace(M^T R)` over orthogonal `R`.
pub fn polar_project(m: &Matrix) -> Result<Rotation> {
    Rotation::new(polar_factor(m)?)
}

/// Haar-distributed random rotation: QR of a square standard Gaussian
/// matrix with the nonnegative-diagonal convention makes `Q` exactly
/// Haar on the orthogonal group.
pub fn haar_rotation(k: usize, seed: u64) -> Result<Rotation> {
    if k == 0 {
        return Err(Error::Parameter("haar_rotation needs k >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..k * k).map(|_| StandardNormal.sample(&mut rng)).collect();
    let g = Matrix::from_raw(k, k, data);
    let (q, _r) = qr_decompose(&g)?;
    Rotation::new(q)
}
