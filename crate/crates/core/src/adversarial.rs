//! Adversarial rotation witness for the failure regime.
//!
//! When `n` is small relative to `k^2`, the empirical objective admits
//! rotations far from the planted one whose value beats the truth. The
//! witness is constructive: take the first `m = ceil(k/2)` rows of `Z`,
//! factor `Z_1^T = U_1 R_1` (thin QR), complete `U_1` to an orthonormal
//! basis, and rotate by `A = [U_1 U_1c]^T R*`. Then the first `m` rows of
//! `Z_hat A^T` become `[R_1^T 0]`, concentrating whole row norms onto the
//! diagonal of `R_1` whose fourth powers are large, while the tail rows
//! contribute their usual bulk.

use crate::error::{Error, Result};
use crate::datagen::Instance;
use crate::linalg::{qr_full, singular_extremes};
use crate::matrix::Matrix;
use crate::rotation::Rotation;
use crate::varimax::objective;

/// The constructed rotation plus its diagnostics.
#[derive(Debug, Clone)]
pub struct AdversarialWitness {
    /// The witness rotation `A`.
    pub a: Rotation,
    /// Thin-QR factor `U_1` of `Z_1^T`: `k x m` with orthonormal columns
    /// spanning the row space of `Z_1`.
    pub u1: Matrix,
    /// Thin-QR factor `R_1` of `Z_1^T` (upper-triangular, nonnegative
    /// diagonal), `m x m`.
    pub r1: Matrix,
    /// `sum_j (R_1)_jj^4`: the diagonal fourth-power mass of the witness
    /// block.
    pub d1: f64,
    /// `sum_{i >= k} sum_j (Z_hat A^T)_ij^4`: the tail bulk (rows are
    /// 0-indexed, so this skips the first `k` rows).
    pub d2: f64,
    /// Smallest singular value of `Z_1` (equal to that of `R_1`).
    pub sigma_min_z1: f64,
}

/// Comparison of the witness objective against the planted truth.
#[derive(Debug, Clone, Copy)]
pub struct WitnessComparison {
    pub v_adv: f64,
    pub v_true: f64,
    /// `v_adv > v_true`.
    pub beats: bool,
}

/// Build the adversarial witness for an instance. Requires `k >= 2` (a 1x1
/// rotation has nothing to misalign) and the first `ceil(k/2)` rows of `Z`
/// to have full row rank; rank deficiency surfaces as a singularity error
/// so the caller can resample.
pub fn build_witness(inst: &Instance) -> Result<AdversarialWitness> {
    let k = inst.k;
    if k < 2 {
        return Err(Error::Parameter(format!("witness needs k >= 2, got {k}")));
    }
    let m = k.div_ceil(2);

    // Z_1^T: k x m.
    let mut z1t_data = Vec::with_capacity(k * m);
    for j in 0..k {
        for i in 0..m {
            z1t_data.push(inst.z.at(i, j));
        }
    }
    let z1t = Matrix::new(k, m, z1t_data)?;

    let (q_full, r_full) = qr_full(&z1t).map_err(|e| match e {
        Error::Singular(msg) => {
            Error::Singular(format!("witness block Z_1 is rank-deficient: {msg}"))
        }
        other => other,
    })?;

    // R_1 = top m x m block of the full R (k x m); U_1 = first m columns
    // of the full Q.
    let mut r1_data = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            r1_data.push(r_full.at(i, j));
        }
    }
    let r1 = Matrix::new(m, m, r1_data)?;
    let mut u1_data = Vec::with_capacity(k * m);
    for i in 0..k {
        for j in 0..m {
            u1_data.push(q_full.at(i, j));
        }
    }
    let u1 = Matrix::new(k, m, u1_data)?;
    let (sigma_min_z1, _) = singular_extremes(&r1)?;

    // A = Q^T R*: orthogonal as a product of orthogonal factors.
    let a_mat = q_full.transpose_mul(inst.r_star.matrix())?;
    let a = Rotation::new(a_mat)?;

    // Diagnostics from Y = Z_hat A^T.
    let y = inst.z_hat.mul_transpose_b(a.matrix())?;

    // Construction invariant: the first m rows of Y are [R_1^T 0].
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in 0..k {
            let expected = if j < m { r1.at(j, i) } else { 0.0 };
            worst = worst.max((y.at(i, j) - expected).abs());
        }
    }
    if worst > 1e-8 {
        return Err(Error::Numerical(format!(
            "witness block structure violated: residual {worst:.3e}"
        )));
    }

    let mut d1 = 0.0;
    for j in 0..m {
        let v = r1.at(j, j);
        let v2 = v * v;
        d1 += v2 * v2;
    }
    let mut d2 = 0.0;
    for i in k..inst.n {
        for &v in y.row(i) {
            let v2 = v * v;
            d2 += v2 * v2;
        }
    }
    debug_assert!(d1 >= 0.0 && d2 >= 0.0);

    Ok(AdversarialWitness { a, u1, r1, d1, d2, sigma_min_z1 })
}

/// Evaluate the witness against the planted rotation on the same instance.
pub fn witness_beats_truth(inst: &Instance, witness: &AdversarialWitness) -> Result<WitnessComparison> {
    let v_adv = objective(&inst.z_hat, &witness.a)?;
    let v_true = objective(&inst.z_hat, &inst.r_star)?;
    Ok(WitnessComparison { v_adv, v_true, beats: v_adv > v_true })
}

/// Population objective at a fixed alignment `A = R R*^T`:
/// `E v(Z_hat; R) = kappa k + (kappa - 3) gap(A)` where
/// `gap(A) = sum_ij A_ij^4 - k`. Exactly `kappa * k` at signed
/// permutations of the truth.
pub fn expected_objective(a: &Rotation, kappa: f64, k: usize) -> Result<f64> {
    if a.dim() != k {
        return Err(Error::Dimension(format!("alignment is {}x{0}, expected {k}x{k}", a.dim())));
    }
    if !kappa.is_finite() || kappa < 1.0 {
        return Err(Error::Parameter(format!(
            "kappa must be >= 1 (unit-variance laws), got {kappa}"
        )));
    }
    let mut sum4 = 0.0;
    for &e in a.matrix().as_slice() {
        let e2 = e * e;
        sum4 += e2 * e2;
    }
    let gap = sum4 - k as f64;
    Ok(kappa * k as f64 + (kappa - 3.0) * gap)
}
