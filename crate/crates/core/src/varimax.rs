//! The centered fourth-power objective and its orthogonal-group ascent.
//!
//! `v(Z_hat; R) = n^{-1} sum_ij ((Z_hat R^T)_ij)^4` is maximized over the
//! orthogonal group by a minorize-maximize fixed point: with `Y = Z_hat R^T`
//! and `G = (Y ∘ Y ∘ Y)^T Z_hat`, the update `R <- polar(G)` never decreases
//! the objective (the objective is convex in `R`, so its linearization at
//! the current iterate minorizes it, and the polar factor maximizes the
//! linearization over the group).

use crate::error::{Error, Result};
use crate::linalg::{haar_rotation, polar_factor};
use crate::matrix::Matrix;
use crate::rotation::Rotation;
use crate::seed::derive_seed;

/// Knobs for [`optimize`]. `restarts` counts the identity start plus
/// Haar-random starts; `extra_starts` (e.g. a known ground truth) run after
/// those and share the same selection rule.
#[derive(Debug, Clone)]
pub struct OptimizeOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub seed: u64,
    pub extra_starts: Vec<Rotation>,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { restarts: 10, max_iter: 1000, rel_tol: 1e-10, seed: 0, extra_starts: Vec::new() }
    }
}

/// Result of an [`optimize`] run: the best rotation over all restarts.
#[derive(Debug, Clone)]
pub struct VarimaxSolution {
    pub r_hat: Rotation,
    /// Objective value at `r_hat`.
    pub objective: f64,
    /// Ascent steps taken by the winning restart.
    pub iterations: usize,
    /// Ascent runs actually launched, counting degenerate re-randomizations.
    pub restarts_used: usize,
    /// Objective after each step of the winning restart (first entry is the
    /// value at its start). Non-decreasing up to 1e-9.
    pub objective_trace: Vec<f64>,
}

/// `n^{-1} sum_ij ((Z_hat R^T)_ij)^4`.
pub fn objective(z_hat: &Matrix, r: &Rotation) -> Result<f64> {
    if z_hat.cols() != r.dim() {
        return Err(Error::Dimension(format!(
            "data has {} columns but rotation is {}x{}",
            z_hat.cols(),
            r.dim(),
            r.dim()
        )));
    }
    let y = z_hat.mul_transpose_b(r.matrix())?;
    Ok(sum_fourth(y.as_slice()) / z_hat.rows() as f64)
}

/// Single-direction objective `n^{-1} sum_i (z_i . a)^4` for a unit vector
/// `a`; the population value is `(kappa - 3) sum_j a_j^4 + 3` under our
/// laws, which is what makes the fourth power a kurtosis probe.
pub fn directional_objective(z: &Matrix, a: &[f64]) -> Result<f64> {
    if a.len() != z.cols() {
        return Err(Error::Dimension(format!(
            "direction has length {} but data has {} columns",
            a.len(),
            z.cols()
        )));
    }
    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Parameter(format!("direction must be unit-norm, got ||a|| = {norm}")));
    }
    let mut sum = 0.0;
    for i in 0..z.rows() {
        let mut dot = 0.0;
        for (zv, av) in z.row(i).iter().zip(a) {
            dot += zv * av;
        }
        let d2 = dot * dot;
        sum += d2 * d2;
    }
    Ok(sum / z.rows() as f64)
}

#[inline]
fn sum_fourth(values: &[f64]) -> f64 {
    let mut s = 0.0;
    for &v in values {
        let v2 = v * v;
        s += v2 * v2;
    }
    s
}

enum RunOutcome {
    Finished { r_mat: Matrix, trace: Vec<f64> },
    Degenerate,
}

/// Rotation-space movement (max-abs entry change) below which an ascent
/// step counts as stationary. One more polar step from such a point moves
/// even less, so the returned rotation satisfies the fixed-point equation
/// `polar(G(R)) = R` well within 1e-6.
const STEP_TOL: f64 = 1e-7;

/// One ascent from `start`. Stops when both the relative objective change
/// drops below `rel_tol` and the rotation stops moving, or after `max_iter`
/// steps.
fn ascend(z_hat: &Matrix, start: Matrix, max_iter: usize, rel_tol: f64) -> Result<RunOutcome> {
    let n = z_hat.rows() as f64;
    let k = z_hat.cols();
    let mut r_mat = start;
    let mut y = z_hat.mul_transpose_b(&r_mat)?;
    let mut f_prev = sum_fourth(y.as_slice()) / n;
    let mut trace = vec![f_prev];

    for _ in 0..max_iter {
        // A column of Y that is identically zero makes the ascent direction
        // ill-posed (G drops rank); treat the start as degenerate.
        let mut col_max = vec![0.0f64; k];
        for row in y.as_slice().chunks_exact(k) {
            for (m, v) in col_max.iter_mut().zip(row) {
                *m = m.max(v.abs());
            }
        }
        if col_max.iter().any(|&m| m == 0.0) {
            return Ok(RunOutcome::Degenerate);
        }

        // G = (Y∘Y∘Y)^T Z_hat, then the polar step.
        let mut y3 = y.clone();
        for v in y3.as_mut_slice() {
            *v = *v * *v * *v;
        }
        let g = y3.transpose_mul(z_hat)?;
        let r_new = match polar_factor(&g) {
            Ok(m) => m,
            Err(Error::Singular(_)) => return Ok(RunOutcome::Degenerate),
            Err(e) => return Err(e),
        };

        y = z_hat.mul_transpose_b(&r_new)?;
        let f = sum_fourth(y.as_slice()) / n;
        trace.push(f);
        let step = r_mat.max_abs_diff(&r_new)?;
        r_mat = r_new;
        let denom = f_prev.abs().max(f64::MIN_POSITIVE);
        if (f - f_prev).abs() <= rel_tol * denom && step <= STEP_TOL {
            return Ok(RunOutcome::Finished { r_mat, trace });
        }
        f_prev = f;
    }
    Ok(RunOutcome::Finished { r_mat, trace })
}

/// Maximize the objective over the orthogonal group by multi-start MM
/// ascent.
///
/// Start 0 is the identity; starts `1..restarts` are Haar rotations drawn
/// from sub-streams of `seed`; `extra_starts` follow. A start whose ascent
/// degenerates is re-randomized once; if the retry also degenerates that
/// start is dropped. The best final objective wins, with ties within 1e-12
/// resolved toward the lowest start index. Errors only if every start
/// degenerates (e.g. on all-zero data).
pub fn optimize(z_hat: &Matrix, opts: &OptimizeOptions) -> Result<VarimaxSolution> {
    let (n, k) = (z_hat.rows(), z_hat.cols());
    if n <= k {
        return Err(Error::Dimension(format!("need n > k rows, got n={n}, k={k}")));
    }
    if opts.restarts == 0 {
        return Err(Error::Parameter("restarts must be at least 1".into()));
    }
    if opts.max_iter == 0 {
        return Err(Error::Parameter("max_iter must be at least 1".into()));
    }
    if !(opts.rel_tol > 0.0) || !opts.rel_tol.is_finite() {
        return Err(Error::Parameter(format!("rel_tol must be positive, got {}", opts.rel_tol)));
    }
    for (i, s) in opts.extra_starts.iter().enumerate() {
        if s.dim() != k {
            return Err(Error::Dimension(format!(
                "extra start {i} is {}x{0}, expected {k}x{k}",
                s.dim()
            )));
        }
    }

    let total = opts.restarts + opts.extra_starts.len();
    let mut best: Option<(f64, Matrix, Vec<f64>)> = None;
    let mut restarts_used = 0usize;

    for idx in 0..total {
        let start = if idx == 0 {
            Matrix::identity(k)
        } else if idx < opts.restarts {
            haar_rotation(k, derive_seed(opts.seed, "restart", idx as u64))?.into_matrix()
        } else {
            opts.extra_starts[idx - opts.restarts].matrix().clone()
        };

        restarts_used += 1;
        let mut outcome = ascend(z_hat, start, opts.max_iter, opts.rel_tol)?;
        if matches!(outcome, RunOutcome::Degenerate) {
            // One re-randomized retry for this start, then give up on it.
            let retry = haar_rotation(k, derive_seed(opts.seed, "rerand", idx as u64))?;
            restarts_used += 1;
            outcome = ascend(z_hat, retry.into_matrix(), opts.max_iter, opts.rel_tol)?;
        }
        let (r_mat, trace) = match outcome {
            RunOutcome::Finished { r_mat, trace } => (r_mat, trace),
            RunOutcome::Degenerate => continue,
        };
        let f = *trace.last().expect("trace never empty");
        let better = match &best {
            None => true,
            Some((bf, _, _)) => f > bf + 1e-12,
        };
        if better {
            best = Some((f, r_mat, trace));
        }
    }

    let (objective, r_mat, objective_trace) =
        best.ok_or_else(|| Error::Numerical("every restart degenerated (is the data zero?)".into()))?;

    // Ascent property: the trace never decreases beyond tolerance.
    for w in objective_trace.windows(2) {
        if w[1] < w[0] - 1e-9 {
            return Err(Error::Numerical(format!(
                "objective decreased along the ascent: {} -> {}",
                w[0], w[1]
            )));
        }
    }

    let iterations = objective_trace.len() - 1;
    Ok(VarimaxSolution {
        r_hat: Rotation::new(r_mat)?,
        objective,
        iterations,
        restarts_used,
        objective_trace,
    })
}
