//! Orthogonal matrices and signed permutations.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// How far from exact orthogonality a matrix may be and still be accepted
/// as a [`Rotation`] without repair.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Matrices whose orthogonality residual lies in
/// `(ORTHOGONALITY_TOL, REPAIR_TOL]` are snapped back to the orthogonal
/// group via a polar projection; anything worse is rejected.
pub const REPAIR_TOL: f64 = 1e-6;

/// A square orthogonal matrix: `R^T R = I` up to [`ORTHOGONALITY_TOL`]
/// (max-abs residual), enforced at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    mat: Matrix,
}

impl Rotation {
    /// Validate (and if mildly drifted, repair) a candidate orthogonal
    /// matrix. Residual `||M^T M - I||_max` up to 1e-10 is accepted as-is;
    /// up to 1e-6 the matrix is re-orthonormalized by polar projection;
    /// beyond that the input is rejected.
    pub fn new(mat: Matrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Dimension(format!(
                "rotation must be square, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        let residual = orthogonality_residual(&mat);
        if residual <= ORTHOGONALITY_TOL {
            return Ok(Self { mat });
        }
        if residual <= REPAIR_TOL {
            let repaired = crate::linalg::polar_factor(&mat)?;
            let re_residual = orthogonality_residual(&repaired);
            if re_residual <= ORTHOGONALITY_TOL {
                return Ok(Self { mat: repaired });
            }
            return Err(Error::Numerical(format!(
                "re-orthonormalization left residual {re_residual:.3e}"
            )));
        }
        Err(Error::NotOrthogonal(format!(
            "orthogonality residual {residual:.3e} exceeds {REPAIR_TOL:.0e}"
        )))
    }

    /// Wrap a matrix that is orthogonal by construction (products of
    /// orthogonal factors, transposes, signed permutations).
    #[inline]
    pub(crate) fn from_orthogonal_unchecked(mat: Matrix) -> Self {
        debug_assert!(mat.is_square());
        debug_assert!(
            orthogonality_residual(&mat) <= ORTHOGONALITY_TOL,
            "matrix is not orthogonal"
        );
        Self { mat }
    }

    pub fn identity(k: usize) -> Self {
        Self { mat: Matrix::identity(k) }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix {
        self.mat
    }

    /// Transpose, i.e. the inverse rotation.
    pub fn transpose(&self) -> Rotation {
        Self::from_orthogonal_unchecked(self.mat.transpose())
    }

    /// `self * other` (stays orthogonal).
    pub fn compose(&self, other: &Rotation) -> Result<Rotation> {
        Ok(Self::from_orthogonal_unchecked(self.mat.mul(other.matrix())?))
    }
}

/// `||M^T M - I||_max` for a square matrix.
pub fn orthogonality_residual(mat: &Matrix) -> f64 {
    debug_assert!(mat.is_square());
    let k = mat.cols();
    let gram = mat.transpose_mul(mat).expect("square matrix");
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram.at(i, j) - target).abs());
        }
    }
    worst
}

/// A signed permutation of `{0, .., k-1}`: the dense form has exactly one
/// nonzero per row and column, equal to ±1. Column `j` carries `signs[j]`
/// in row `perm[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedPermutation {
    perm: Vec<usize>,
    signs: Vec<i8>,
}

impl SignedPermutation {
    pub fn new(perm: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        let k = perm.len();
        if k == 0 {
            return Err(Error::Dimension("empty permutation".into()));
        }
        if signs.len() != k {
            return Err(Error::Dimension(format!(
                "{} signs for a permutation of length {k}",
                signs.len()
            )));
        }
        let mut seen = vec![false; k];
        for &p in &perm {
            if p >= k {
                return Err(Error::Parameter(format!("permutation entry {p} out of range 0..{k}")));
            }
            if seen[p] {
                return Err(Error::Parameter(format!("duplicate permutation entry {p}")));
            }
            seen[p] = true;
        }
        if let Some(bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::Parameter(format!("sign {bad} is not +1/-1")));
        }
        Ok(Self { perm, signs })
    }

    pub fn identity(k: usize) -> Self {
        Self { perm: (0..k).collect(), signs: vec![1; k] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Row index of the nonzero in column `j`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Sign of the nonzero in column `j`.
    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Dense matrix form: entry `signs[j]` at `(perm[j], j)`.
    pub fn dense(&self) -> Matrix {
        let k = self.dim();
        let mut m = Matrix::zeros(k, k);
        for j in 0..k {
            m.set(self.perm[j], j, f64::from(self.signs[j])).expect("finite sign");
        }
        m
    }

    /// The dense form as a [`Rotation`] (signed permutations are orthogonal).
    pub fn rotation(&self) -> Rotation {
        Rotation::from_orthogonal_unchecked(self.dense())
    }
}
