//! Synthetic factor data with controlled excess kurtosis.
//!
//! All laws are symmetric with mean 0, variance 1 and finite eighth moment;
//! the tunable quantity is the fourth moment `kappa`. Recovery of a planted
//! rotation hinges on `kappa != 3` (the Gaussian value), so the Gaussian law
//! is kept as a negative control.

use crate::error::{Error, Result};
use crate::linalg::haar_rotation;
use crate::matrix::Matrix;
use crate::rotation::Rotation;
use crate::seed::derive_seed;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// A mean-zero, unit-variance law with known fourth moment.
#[derive(Debug, Clone, PartialEq)]
pub enum KurtosisLaw {
    /// `P(Z = ±a) = 1/(2a²)`, `P(Z = 0) = 1 − 1/a²`; `kappa = a²`.
    /// Requires `a > sqrt(3)` so that `kappa > 3`.
    ThreePoint { a: f64 },
    /// `Z = G·B/sqrt(p)` with `G` standard normal, `B ~ Bernoulli(p)`;
    /// `kappa = 3/p`. Requires `0 < p < 1`.
    SparseGaussian { p: f64 },
    /// Standard normal; `kappa = 3`. Negative control: the objective's
    /// population landscape is flat, so no recovery is possible.
    Gaussian,
}

impl KurtosisLaw {
    pub fn three_point(a: f64) -> Result<Self> {
        if !a.is_finite() || a <= 3.0f64.sqrt() {
            return Err(Error::Parameter(format!(
                "three_point needs a > sqrt(3) ~ 1.732, got {a}"
            )));
        }
        Ok(Self::ThreePoint { a })
    }

    pub fn sparse_gaussian(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 0.0 || p >= 1.0 {
            return Err(Error::Parameter(format!(
                "sparse_gaussian needs 0 < p < 1, got {p}"
            )));
        }
        Ok(Self::SparseGaussian { p })
    }

    pub fn gaussian() -> Self {
        Self::Gaussian
    }

    /// Fourth moment `E Z^4`.
    pub fn kappa(&self) -> f64 {
        match self {
            Self::ThreePoint { a } => a * a,
            Self::SparseGaussian { p } => 3.0 / p,
            Self::Gaussian => 3.0,
        }
    }

    /// Family name as used in configs and CSV records.
    pub fn family(&self) -> &'static str {
        match self {
            Self::ThreePoint { .. } => "three_point",
            Self::SparseGaussian { .. } => "sparse_gaussian",
            Self::Gaussian => "gaussian",
        }
    }

    /// Family parameter (`a` or `p`), if the family has one.
    pub fn param(&self) -> Option<f64> {
        match self {
            Self::ThreePoint { a } => Some(*a),
            Self::SparseGaussian { p } => Some(*p),
            Self::Gaussian => None,
        }
    }

    /// The `family[:param]` form used by configs and the CLI,
    /// e.g. `three_point:2`, `sparse_gaussian:0.75`, `gaussian`.
    pub fn spec_string(&self) -> String {
        match self.param() {
            Some(p) => format!("{}:{}", self.family(), p),
            None => self.family().to_string(),
        }
    }

    /// Parse the `family[:param]` form.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (family, param) = match s.split_once(':') {
            Some((f, p)) => (f.trim(), Some(p.trim())),
            None => (s, None),
        };
        let parse_param = |p: Option<&str>| -> Result<f64> {
            let p = p.ok_or_else(|| {
                Error::Parse(format!("law {family:?} needs a parameter, e.g. {family}:2.0"))
            })?;
            p.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad law parameter {p:?}")))
        };
        match family {
            "three_point" => Self::three_point(parse_param(param)?),
            "sparse_gaussian" => Self::sparse_gaussian(parse_param(param)?),
            "gaussian" => {
                if param.is_some() {
                    return Err(Error::Parse("gaussian takes no parameter".into()));
                }
                Ok(Self::Gaussian)
            }
            other => Err(Error::Parse(format!("unknown law family {other:?}"))),
        }
    }
}

/// Draw `count` iid samples from `law` using a ChaCha stream seeded by `seed`.
pub fn sample_law(law: &KurtosisLaw, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    match law {
        KurtosisLaw::ThreePoint { a } => {
            let p = 1.0 / (2.0 * a * a);
            for _ in 0..count {
                let u: f64 = rng.random();
                out.push(if u < p {
                    *a
                } else if u < 2.0 * p {
                    -a
                } else {
                    0.0
                });
            }
        }
        KurtosisLaw::SparseGaussian { p } => {
            let scale = 1.0 / p.sqrt();
            for _ in 0..count {
                // Draw both variates unconditionally so sample i always sits
                // at a fixed position in the stream.
                let g: f64 = StandardNormal.sample(&mut rng);
                let u: f64 = rng.random();
                out.push(if u < *p { g * scale } else { 0.0 });
            }
        }
        KurtosisLaw::Gaussian => {
            for _ in 0..count {
                out.push(StandardNormal.sample(&mut rng));
            }
        }
    }
    out
}

/// A planted-rotation problem instance: iid factors `Z`, a Haar rotation
/// `R*`, and the observed matrix `Z_hat = Z R*`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub n: usize,
    pub k: usize,
    pub law: KurtosisLaw,
    pub seed: u64,
    pub z: Matrix,
    pub r_star: Rotation,
    pub z_hat: Matrix,
}

/// Generate an instance. The factor matrix and the planted rotation draw
/// from sub-streams of `seed` ("factor" and "rotation"), so instances are
/// reproducible from `(n, k, law, seed)` alone.
pub fn make_instance(n: usize, k: usize, law: &KurtosisLaw, seed: u64) -> Result<Instance> {
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    if n <= k {
        return Err(Error::Parameter(format!("need n > k, got n={n}, k={k}")));
    }
    let z_data = sample_law(law, n * k, derive_seed(seed, "factor", 0));
    let z = Matrix::new(n, k, z_data)?;
    let r_star = haar_rotation(k, derive_seed(seed, "rotation", 0))?;
    let z_hat = z.mul(r_star.matrix())?;
    Ok(Instance { n, k, law: law.clone(), seed, z, r_star, z_hat })
}

impl Instance {
    /// Rebuild an instance from previously saved parts; `z_hat` is
    /// recomputed from `z` and `r_star` so the defining identity holds
    /// exactly.
    pub fn from_parts(z: Matrix, r_star: Rotation, law: KurtosisLaw, seed: u64) -> Result<Self> {
        let (n, k) = (z.rows(), z.cols());
        if k != r_star.dim() {
            return Err(Error::Dimension(format!(
                "factor matrix has {k} columns but rotation is {0}x{0}",
                r_star.dim()
            )));
        }
        if n <= k {
            return Err(Error::Parameter(format!("need n > k, got n={n}, k={k}")));
        }
        let z_hat = z.mul(r_star.matrix())?;
        Ok(Self { n, k, law, seed, z, r_star, z_hat })
    }
}

/// Plain divide-by-N empirical moments of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub mean: f64,
    /// Biased (divide-by-N) variance about the mean.
    pub variance: f64,
    /// Raw third moment `E v^3` (symmetry proxy; ~0 for all our laws).
    pub third_moment: f64,
    /// `E v^4 / variance^2`; NaN when the variance is zero.
    pub kurtosis: f64,
}

/// Empirical moments. Needs at least two values; zero-variance input
/// yields a NaN kurtosis rather than an error.
pub fn sample_moments(values: &[f64]) -> Result<Moments> {
    if values.len() < 2 {
        return Err(Error::Parameter(format!(
            "need at least 2 values for moments, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mut var = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &v in values {
        let d = v - mean;
        var += d * d;
        m3 += v * v * v;
        m4 += v * v * v * v;
    }
    var /= n;
    m3 /= n;
    m4 /= n;
    let kurtosis = if var == 0.0 { f64::NAN } else { m4 / (var * var) };
    Ok(Moments { mean, variance: var, third_moment: m3, kurtosis })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn law_constructors_validate() {
        assert!(KurtosisLaw::three_point(1.7).is_err());
        assert!(KurtosisLaw::three_point(3.0f64.sqrt()).is_err());
        assert!(KurtosisLaw::three_point(2.0).is_ok());
        assert!(KurtosisLaw::sparse_gaussian(0.0).is_err());
        assert!(KurtosisLaw::sparse_gaussian(1.0).is_err());
        assert!(KurtosisLaw::sparse_gaussian(0.5).is_ok());
    }

    #[test]
    fn kappa_formulas() {
        assert_eq!(KurtosisLaw::three_point(2.0).unwrap().kappa(), 4.0);
        assert_eq!(KurtosisLaw::sparse_gaussian(0.75).unwrap().kappa(), 4.0);
        assert_eq!(KurtosisLaw::gaussian().kappa(), 3.0);
        let a = 6.0f64.sqrt();
        assert!((KurtosisLaw::three_point(a).unwrap().kappa() - 6.0).abs() <= 1e-12);
    }

    #[test]
    fn parse_round_trips() {
        for s in ["three_point:2", "sparse_gaussian:0.75", "gaussian"] {
            let law = KurtosisLaw::parse(s).unwrap();
            assert_eq!(law.spec_string(), s);
            assert_eq!(KurtosisLaw::parse(&law.spec_string()).unwrap(), law);
        }
        assert!(KurtosisLaw::parse("three_point").is_err());
        assert!(KurtosisLaw::parse("three_point:abc").is_err());
        assert!(KurtosisLaw::parse("three_point:1.0").is_err());
        assert!(KurtosisLaw::parse("gaussian:2").is_err());
        assert!(KurtosisLaw::parse("cauchy:1").is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_law_shaped() {
        let law = KurtosisLaw::three_point(2.0).unwrap();
        let a = sample_law(&law, 1000, 42);
        let b = sample_law(&law, 1000, 42);
        assert_eq!(a, b);
        let c = sample_law(&law, 1000, 43);
        assert_ne!(a, c);
        assert!(a.iter().all(|&v| v == 0.0 || v == 2.0 || v == -2.0));
        // P(nonzero) = 1/4: expect ~250 of 1000.
        let nonzero = a.iter().filter(|&&v| v != 0.0).count();
        assert!((150..350).contains(&nonzero), "{nonzero}");
    }

    #[test]
    fn sparse_gaussian_has_zeros_and_continuum() {
        let law = KurtosisLaw::sparse_gaussian(0.5).unwrap();
        let v = sample_law(&law, 2000, 7);
        let zeros = v.iter().filter(|&&x| x == 0.0).count();
        assert!((800..1200).contains(&zeros), "{zeros}");
        let mut distinct = v.iter().filter(|&&x| x != 0.0).map(|x| x.to_bits()).collect::<Vec<_>>();
        distinct.sort_unstable();
        distinct.dedup();
        assert!(distinct.len() > 900);
    }

    #[test]
    fn moments_oracles() {
        // Rademacher: variance 1 and kurtosis 1.
        let m = sample_moments(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!(m.mean, 0.0);
        assert_eq!(m.variance, 1.0);
        assert_eq!(m.third_moment, 0.0);
        assert_eq!(m.kurtosis, 1.0);
        // Constant input: NaN kurtosis, not an error.
        let c = sample_moments(&[2.0, 2.0, 2.0]).unwrap();
        assert_eq!(c.variance, 0.0);
        assert!(c.kurtosis.is_nan());
        // Too short.
        assert!(sample_moments(&[]).is_err());
        assert!(sample_moments(&[1.0]).is_err());
    }

    #[test]
    fn make_instance_validates_and_is_consistent() {
        let law = KurtosisLaw::three_point(2.0).unwrap();
        assert!(make_instance(3, 3, &law, 1).is_err());
        assert!(make_instance(2, 0, &law, 1).is_err());
        let inst = make_instance(50, 3, &law, 1).unwrap();
        assert_eq!(inst.z.rows(), 50);
        assert_eq!(inst.z_hat.cols(), 3);
        let recomputed = inst.z.mul(inst.r_star.matrix()).unwrap();
        assert!(recomputed.max_abs_diff(&inst.z_hat).unwrap() == 0.0);
        // Same seed, same instance.
        let again = make_instance(50, 3, &law, 1).unwrap();
        assert_eq!(inst.z, again.z);
        assert_eq!(inst.r_star.matrix(), again.r_star.matrix());
    }

    #[test]
    fn from_parts_recomputes_z_hat() {
        let law = KurtosisLaw::gaussian();
        let inst = make_instance(20, 2, &law, 5).unwrap();
        let rebuilt =
            Instance::from_parts(inst.z.clone(), inst.r_star.clone(), law.clone(), 5).unwrap();
        assert_eq!(rebuilt.z_hat, inst.z_hat);
        // Mismatched shapes rejected.
        let bad = Instance::from_parts(
            Matrix::zeros(5, 3),
            crate::linalg::haar_rotation(2, 1).unwrap(),
            law,
            0,
        );
        assert!(bad.is_err());
    }
}
