//! Capacity laws, reproducible sampling and log moment generating functions.
//!
//! Draws are addressed by `(seed, replication, edge)`: a ChaCha8 stream is
//! keyed by the seed, its stream id is the replication index, and edge `e`
//! always consumes the two 64-bit words at positions `2e` and `2e + 1`. The
//! value on an edge therefore does not depend on how many other edges were
//! sampled, nor in which order or on which thread.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone, PartialEq)]
pub enum DistributionError {
    InvalidParameter { kind: &'static str, value: f64 },
    UnknownKind(String),
    Malformed(String),
}

impl fmt::Display for DistributionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionError::InvalidParameter { kind, value } => {
                write!(f, "invalid distribution: {kind} parameter {value} out of range")
            }
            DistributionError::UnknownKind(kind) => write!(f, "unknown distribution kind `{kind}`"),
            DistributionError::Malformed(text) => {
                write!(f, "distribution must be written kind:param, got `{text}`")
            }
        }
    }
}

impl core::error::Error for DistributionError {}

/// Tail class of a capacity law, matching the three cases of the upper
/// deviation regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MomentClass {
    Bounded,
    SomeExpMoment,
    AllExpMoments,
}

impl MomentClass {
    pub fn label(&self) -> &'static str {
        match self {
            MomentClass::Bounded => "bounded",
            MomentClass::SomeExpMoment => "some_exp_moment",
            MomentClass::AllExpMoments => "all_exp_moments",
        }
    }
}

/// Law `F` of the i.i.d. capacities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec {
    Constant(f64),
    /// Atoms 1 (probability `p`) and 0.
    Bernoulli(f64),
    /// Uniform on `[0, b]`.
    Uniform(f64),
    /// Exponential with the given rate.
    Exponential(f64),
    /// `σ·|Z|` for a standard Gaussian `Z`.
    HalfGaussian(f64),
}

impl DistributionSpec {
    pub fn validate(self) -> Result<Self, DistributionError> {
        let bad = |kind, value| Err(DistributionError::InvalidParameter { kind, value });
        match self {
            DistributionSpec::Constant(c) if !(c >= 0.0 && c.is_finite()) => bad("constant", c),
            DistributionSpec::Bernoulli(p) if !(0.0..=1.0).contains(&p) => bad("bernoulli", p),
            DistributionSpec::Uniform(b) if !(b > 0.0 && b.is_finite()) => bad("uniform", b),
            DistributionSpec::Exponential(rate) if !(rate > 0.0 && rate.is_finite()) => {
                bad("exponential", rate)
            }
            DistributionSpec::HalfGaussian(s) if !(s > 0.0 && s.is_finite()) => {
                bad("half_gaussian", s)
            }
            _ => Ok(self),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            DistributionSpec::Constant(_) => "constant",
            DistributionSpec::Bernoulli(_) => "bernoulli",
            DistributionSpec::Uniform(_) => "uniform",
            DistributionSpec::Exponential(_) => "exponential",
            DistributionSpec::HalfGaussian(_) => "half_gaussian",
        }
    }

    pub fn parameter(&self) -> f64 {
        match *self {
            DistributionSpec::Constant(x)
            | DistributionSpec::Bernoulli(x)
            | DistributionSpec::Uniform(x)
            | DistributionSpec::Exponential(x)
            | DistributionSpec::HalfGaussian(x) => x,
        }
    }

    pub fn moment_class(&self) -> MomentClass {
        match self {
            DistributionSpec::Constant(_)
            | DistributionSpec::Bernoulli(_)
            | DistributionSpec::Uniform(_) => MomentClass::Bounded,
            DistributionSpec::Exponential(_) => MomentClass::SomeExpMoment,
            DistributionSpec::HalfGaussian(_) => MomentClass::AllExpMoments,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            DistributionSpec::Constant(c) => c,
            DistributionSpec::Bernoulli(p) => p,
            DistributionSpec::Uniform(b) => b / 2.0,
            DistributionSpec::Exponential(rate) => 1.0 / rate,
            DistributionSpec::HalfGaussian(s) => s * libm::sqrt(2.0 / core::f64::consts::PI),
        }
    }

    /// Essential supremum of the support, `None` when unbounded.
    pub fn upper_bound(&self) -> Option<f64> {
        match *self {
            DistributionSpec::Constant(c) => Some(c),
            DistributionSpec::Bernoulli(p) => Some(if p > 0.0 { 1.0 } else { 0.0 }),
            DistributionSpec::Uniform(b) => Some(b),
            DistributionSpec::Exponential(_) | DistributionSpec::HalfGaussian(_) => None,
        }
    }

    /// Supremum of the `θ` with a finite moment generating function.
    pub fn mgf_abscissa(&self) -> f64 {
        match *self {
            DistributionSpec::Exponential(rate) => rate,
            _ => f64::INFINITY,
        }
    }

    /// `log E[exp(θ t)]`, `+∞` where the integral diverges.
    pub fn log_mgf(&self, theta: f64) -> f64 {
        if theta == 0.0 {
            return 0.0;
        }
        match *self {
            DistributionSpec::Constant(c) => theta * c,
            DistributionSpec::Bernoulli(p) => {
                if p == 0.0 {
                    0.0
                } else if theta > 0.0 {
                    theta + libm::log(p + (1.0 - p) * libm::exp(-theta))
                } else {
                    libm::log1p(p * libm::expm1(theta))
                }
            }
            DistributionSpec::Uniform(b) => {
                let x = theta * b;
                if x > 1.0 {
                    x + libm::log(-libm::expm1(-x)) - libm::log(x)
                } else if x < -1.0 {
                    libm::log(-libm::expm1(x)) - libm::log(-x)
                } else {
                    libm::log(libm::expm1(x) / x)
                }
            }
            DistributionSpec::Exponential(rate) => {
                if theta >= rate {
                    f64::INFINITY
                } else {
                    -libm::log1p(-theta / rate)
                }
            }
            DistributionSpec::HalfGaussian(s) => {
                // E exp(θσ|Z|) = 2·exp(θ²σ²/2)·Φ(θσ)
                let a = theta * s;
                0.5 * a * a + libm::log(libm::erfc(-a / core::f64::consts::SQRT_2))
            }
        }
    }

    /// Maps two independent uniform 64-bit words to one draw.
    pub fn transform(&self, first: u64, second: u64) -> f64 {
        match *self {
            DistributionSpec::Constant(c) => c,
            DistributionSpec::Bernoulli(p) => {
                if unit_closed_open(first) < p {
                    1.0
                } else {
                    0.0
                }
            }
            DistributionSpec::Uniform(b) => b * unit_closed_open(first),
            DistributionSpec::Exponential(rate) => -libm::log(unit_open_closed(first)) / rate,
            DistributionSpec::HalfGaussian(s) => {
                let radius = libm::sqrt(-2.0 * libm::log(unit_open_closed(first)));
                let angle = 2.0 * core::f64::consts::PI * unit_closed_open(second);
                s * libm::fabs(radius * libm::cos(angle))
            }
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind(), self.parameter())
    }
}

impl FromStr for DistributionSpec {
    type Err = DistributionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, param) = s
            .split_once(':')
            .ok_or_else(|| DistributionError::Malformed(s.into()))?;
        let param: f64 = param
            .trim()
            .parse()
            .map_err(|_| DistributionError::Malformed(s.into()))?;
        let spec = match kind.trim() {
            "constant" => DistributionSpec::Constant(param),
            "bernoulli" => DistributionSpec::Bernoulli(param),
            "uniform" => DistributionSpec::Uniform(param),
            "exponential" => DistributionSpec::Exponential(param),
            "half_gaussian" => DistributionSpec::HalfGaussian(param),
            other => return Err(DistributionError::UnknownKind(other.into())),
        };
        spec.validate()
    }
}

fn unit_closed_open(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn unit_open_closed(word: u64) -> f64 {
    ((word >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn generator(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

/// Capacity of a single edge, by random access.
pub fn capacity_at(dist: &DistributionSpec, seed: u64, replication: u64, edge: usize) -> f64 {
    let mut rng = generator(seed, replication);
    // four 32-bit words per edge
    rng.set_word_pos(edge as u128 * 4);
    let first = rng.next_u64();
    let second = rng.next_u64();
    dist.transform(first, second)
}

/// Fills `out` with the capacities of edges `0..edge_count`.
pub fn sample_into(
    dist: &DistributionSpec,
    seed: u64,
    replication: u64,
    edge_count: usize,
    out: &mut Vec<f64>,
) {
    out.clear();
    out.reserve(edge_count);
    if let DistributionSpec::Constant(c) = *dist {
        out.resize(edge_count, c);
        return;
    }
    let mut rng = generator(seed, replication);
    for _ in 0..edge_count {
        let first = rng.next_u64();
        let second = rng.next_u64();
        out.push(dist.transform(first, second));
    }
}

/// Edge-indexed capacities `t(e)` for one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityAssignment {
    values: Vec<f64>,
    seed: u64,
    replication: u64,
}

impl CapacityAssignment {
    /// Wraps explicit values; every value must be a finite nonnegative number.
    pub fn from_values(values: Vec<f64>) -> Result<Self, DistributionError> {
        if let Some(&bad) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(DistributionError::InvalidParameter {
                kind: "capacity",
                value: bad,
            });
        }
        Ok(Self {
            values,
            seed: 0,
            replication: 0,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replication(&self) -> u64 {
        self.replication
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Integer capacities `round(t(e)·scale)` for exact solver runs.
    pub fn quantized(&self, scale: f64) -> Vec<i64> {
        self.values
            .iter()
            .map(|&v| libm::round(v * scale) as i64)
            .collect()
    }
}

/// i.i.d. capacities for `edge_count` edges keyed by `(seed, replication)`.
pub fn sample_capacities(
    edge_count: usize,
    dist: &DistributionSpec,
    seed: u64,
    replication: u64,
) -> Result<CapacityAssignment, DistributionError> {
    dist.validate()?;
    let mut values = Vec::new();
    sample_into(dist, seed, replication, edge_count, &mut values);
    Ok(CapacityAssignment {
        values,
        seed,
        replication,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_validate() {
        assert_eq!("bernoulli:0.7".parse::<DistributionSpec>(), Ok(DistributionSpec::Bernoulli(0.7)));
        assert_eq!("exponential:1".parse::<DistributionSpec>(), Ok(DistributionSpec::Exponential(1.0)));
        assert!(matches!(
            "bernoulli:1.5".parse::<DistributionSpec>(),
            Err(DistributionError::InvalidParameter { .. })
        ));
        assert!(matches!("uniform:0".parse::<DistributionSpec>(), Err(DistributionError::InvalidParameter { .. })));
        assert!(matches!("half_gaussian:-1".parse::<DistributionSpec>(), Err(DistributionError::InvalidParameter { .. })));
        assert!(matches!("pareto:2".parse::<DistributionSpec>(), Err(DistributionError::UnknownKind(_))));
        assert!(matches!("bernoulli".parse::<DistributionSpec>(), Err(DistributionError::Malformed(_))));
        let text = alloc::format!("{}", DistributionSpec::HalfGaussian(1.5));
        assert_eq!(text.parse::<DistributionSpec>(), Ok(DistributionSpec::HalfGaussian(1.5)));
    }

    #[test]
    fn moment_classes() {
        assert_eq!(DistributionSpec::Bernoulli(0.7).moment_class(), MomentClass::Bounded);
        assert_eq!(DistributionSpec::Uniform(2.0).moment_class(), MomentClass::Bounded);
        assert_eq!(DistributionSpec::Exponential(1.0).moment_class(), MomentClass::SomeExpMoment);
        assert_eq!(DistributionSpec::HalfGaussian(1.0).moment_class(), MomentClass::AllExpMoments);
    }

    #[test]
    fn log_mgf_closed_forms() {
        let exp = DistributionSpec::Exponential(1.0);
        assert!((exp.log_mgf(0.5) - core::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(exp.log_mgf(1.0), f64::INFINITY);
        assert_eq!(exp.log_mgf(3.0), f64::INFINITY);
        for d in [
            DistributionSpec::Constant(2.0),
            DistributionSpec::Bernoulli(0.3),
            DistributionSpec::Uniform(1.0),
            exp,
            DistributionSpec::HalfGaussian(1.0),
        ] {
            assert_eq!(d.log_mgf(0.0), 0.0);
        }
        assert_eq!(DistributionSpec::Constant(2.0).log_mgf(1.5), 3.0);
        let bern: f64 = DistributionSpec::Bernoulli(0.3).log_mgf(2.0);
        assert!((bern - (0.7 + 0.3 * 2f64.exp()).ln()).abs() < 1e-14);
        let unif = DistributionSpec::Uniform(2.0).log_mgf(0.5);
        assert!((unif - ((1f64.exp() - 1.0) / 1.0).ln()).abs() < 1e-14);
        // large arguments stay finite
        assert!(DistributionSpec::Uniform(1.0).log_mgf(2000.0).is_finite());
        assert!(DistributionSpec::Bernoulli(0.5).log_mgf(2000.0).is_finite());
    }

    /// Composite Simpson quadrature of E exp(θσ|Z|) on [0, 40σ].
    fn half_gaussian_mgf_quadrature(sigma: f64, theta: f64) -> f64 {
        let upper = 40.0 * sigma + 2.0 * theta * sigma * sigma;
        let steps = 200_000;
        let h = upper / steps as f64;
        let density = |x: f64| {
            (2.0 / (2.0 * core::f64::consts::PI).sqrt() / sigma) * (theta * x - x * x / (2.0 * sigma * sigma)).exp()
        };
        let mut sum = density(0.0) + density(upper);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * density(i as f64 * h);
        }
        (sum * h / 3.0).ln()
    }

    #[test]
    fn half_gaussian_log_mgf_matches_quadrature() {
        for &(sigma, theta) in &[(1.0, 0.1), (1.0, 0.5), (1.0, 2.0), (0.5, 3.0), (2.0, 1.25)] {
            let exact = DistributionSpec::HalfGaussian(sigma).log_mgf(theta);
            let quad = half_gaussian_mgf_quadrature(sigma, theta);
            assert!((exact - quad).abs() < 1e-10, "σ={sigma} θ={theta}: {exact} vs {quad}");
        }
    }

    #[test]
    fn log_mgf_is_convex_on_a_grid() {
        for d in [
            DistributionSpec::Bernoulli(0.7),
            DistributionSpec::Uniform(1.0),
            DistributionSpec::Exponential(1.0),
            DistributionSpec::HalfGaussian(1.0),
        ] {
            let grid: Vec<f64> = (0..200).map(|i| i as f64 * 0.0049).collect();
            let values: Vec<f64> = grid.iter().map(|&t| d.log_mgf(t)).collect();
            for w in values.windows(3) {
                assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-12, "{d}");
            }
        }
    }

    #[test]
    fn constant_and_determinism() {
        let c = sample_capacities(50, &DistributionSpec::Constant(1.0), 9, 0).unwrap();
        assert!(c.values().iter().all(|&v| v == 1.0));
        let a = sample_capacities(500, &DistributionSpec::Bernoulli(0.5), 42, 3).unwrap();
        let b = sample_capacities(500, &DistributionSpec::Bernoulli(0.5), 42, 3).unwrap();
        assert_eq!(a, b);
        let other = sample_capacities(500, &DistributionSpec::Bernoulli(0.5), 42, 4).unwrap();
        assert_ne!(a.values(), other.values());
        assert!(sample_capacities(5, &DistributionSpec::Bernoulli(2.0), 0, 0).is_err());
    }

    #[test]
    fn exponential_sample_mean() {
        let c = sample_capacities(1_000_000, &DistributionSpec::Exponential(1.0), 2024, 0).unwrap();
        let mean = c.values().iter().sum::<f64>() / c.len() as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
        assert!(c.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn empirical_mgf_within_three_standard_errors() {
        let n = 100_000;
        for d in [
            DistributionSpec::Bernoulli(0.7),
            DistributionSpec::Uniform(1.0),
            DistributionSpec::Exponential(1.0),
            DistributionSpec::HalfGaussian(1.0),
        ] {
            let c = sample_capacities(n, &d, 77, 1).unwrap();
            for theta in [0.1, 0.25, 0.5] {
                let w: Vec<f64> = c.values().iter().map(|&x| (theta * x).exp()).collect();
                let mean = w.iter().sum::<f64>() / n as f64;
                let var = w.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
                let se = (var / n as f64).sqrt();
                let truth = d.log_mgf(theta).exp();
                assert!((mean - truth).abs() <= 3.0 * se + 1e-12, "{d} θ={theta}: {mean} vs {truth} (se {se})");
            }
        }
    }

    #[test]
    fn quantized_mode() {
        let c = CapacityAssignment::from_values(alloc::vec![0.0, 1.0, 2.5]).unwrap();
        assert_eq!(c.quantized(2.0), alloc::vec![0, 2, 5]);
        assert!(CapacityAssignment::from_values(alloc::vec![-1.0]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn bulk_sampling_matches_random_access(seed in 0u64..1000, rep in 0u64..50, edge in 0usize..300) {
            for d in [DistributionSpec::Exponential(1.0), DistributionSpec::HalfGaussian(2.0), DistributionSpec::Bernoulli(0.4)] {
                let bulk = sample_capacities(300, &d, seed, rep).unwrap();
                proptest::prop_assert_eq!(bulk.values()[edge].to_bits(), capacity_at(&d, seed, rep, edge).to_bits());
            }
        }
    }
}
