use alloc::vec::Vec;

use super::DeviationError;
use crate::capacities::DistributionSpec;

pub const THETA_GRID_POINTS: usize = 64;

/// Smallest effective number of terms the empirical MGF may rest on.
const MIN_EFFECTIVE_TERMS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Analytic(DistributionSpec),
    Samples { values: Vec<f64>, max: f64 },
    PointMass(f64),
}

/// Upper-tail Cramér rate `Λ*(x) = sup_{θ ≥ 0} (θx − Λ(θ))` evaluated on a
/// geometric θ grid, refined by golden-section search around the best
/// grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFunction {
    source: Source,
    theta_grid: Vec<f64>,
    log_mgf_values: Vec<f64>,
}

impl RateFunction {
    pub fn analytic(dist: DistributionSpec) -> Result<Self, DeviationError> {
        let dist = dist.validate()?;
        if let DistributionSpec::Constant(c) = dist {
            return Ok(Self::point_mass(c));
        }
        let abscissa = dist.mgf_abscissa();
        let theta_max = if abscissa.is_finite() {
            abscissa * (1.0 - 1e-9)
        } else {
            let mean = dist.mean();
            if mean > 0.0 { 200.0 / mean } else { 200.0 }
        };
        let source = Source::Analytic(dist);
        Ok(Self::on_grid(source, theta_max))
    }

    /// Empirical log-MGF `log(1/k Σ exp(θ x_i))`.
    pub fn empirical(samples: &[f64]) -> Result<Self, DeviationError> {
        let first = *samples.first().ok_or(DeviationError::EmptySample)?;
        if samples.iter().all(|&x| x == first) {
            return Ok(Self::point_mass(first));
        }
        let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let source = Source::Samples {
            values: samples.to_vec(),
            max,
        };
        let threshold = MIN_EFFECTIVE_TERMS.min(samples.len() as f64);
        let ess = |theta: f64| effective_terms(samples, max, theta);
        // ESS decreases from k at θ = 0; bracket then bisect its crossing
        let mut hi = 1.0 / (max - min);
        while ess(hi) >= threshold && hi < 1e12 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if ess(mid) >= threshold {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let theta_max = if lo > 0.0 { lo } else { hi };
        Ok(Self::on_grid(source, theta_max))
    }

    fn point_mass(value: f64) -> Self {
        Self {
            source: Source::PointMass(value),
            theta_grid: Vec::new(),
            log_mgf_values: Vec::new(),
        }
    }

    fn on_grid(source: Source, theta_max: f64) -> Self {
        let theta_min = theta_max / 1000.0;
        let ratio = libm::pow(theta_max / theta_min, 1.0 / (THETA_GRID_POINTS - 1) as f64);
        let mut theta_grid = Vec::with_capacity(THETA_GRID_POINTS);
        let mut theta = theta_min;
        for k in 0..THETA_GRID_POINTS {
            theta_grid.push(if k + 1 == THETA_GRID_POINTS { theta_max } else { theta });
            theta *= ratio;
        }
        let mut rate = Self {
            source,
            theta_grid,
            log_mgf_values: Vec::new(),
        };
        rate.log_mgf_values = rate.theta_grid.iter().map(|&t| rate.log_mgf(t)).collect();
        rate
    }

    pub fn theta_grid(&self) -> &[f64] {
        &self.theta_grid
    }

    pub fn log_mgf_values(&self) -> &[f64] {
        &self.log_mgf_values
    }

    pub fn log_mgf(&self, theta: f64) -> f64 {
        match &self.source {
            Source::Analytic(dist) => dist.log_mgf(theta),
            Source::Samples { values, max } => empirical_log_mgf(values, *max, theta),
            Source::PointMass(v) => theta * v,
        }
    }

    /// `Λ*(x)`, `+∞` for a point mass away from its atom.
    pub fn rate(&self, x: f64) -> f64 {
        if let Source::PointMass(v) = self.source {
            return if x == v { 0.0 } else { f64::INFINITY };
        }
        let objective = |theta: f64| theta * x - self.log_mgf(theta);
        let mut best = 0.0;
        let mut best_k = None;
        for (k, (&theta, &lm)) in self.theta_grid.iter().zip(&self.log_mgf_values).enumerate() {
            let value = theta * x - lm;
            if value > best {
                best = value;
                best_k = Some(k);
            }
        }
        let Some(k) = best_k else {
            return 0.0;
        };
        let lo = if k == 0 { 0.0 } else { self.theta_grid[k - 1] };
        let hi = self.theta_grid[(k + 1).min(self.theta_grid.len() - 1)];
        best.max(golden_max(objective, lo, hi))
    }
}

fn empirical_log_mgf(values: &[f64], max: f64, theta: f64) -> f64 {
    let sum: f64 = values.iter().map(|&x| libm::exp(theta * (x - max))).sum();
    theta * max + libm::log(sum / values.len() as f64)
}

/// `(Σw)² / Σw²` for `w_i = exp(θ x_i)`.
fn effective_terms(values: &[f64], max: f64, theta: f64) -> f64 {
    let (mut s1, mut s2) = (0.0, 0.0);
    for &x in values {
        let w = libm::exp(theta * (x - max));
        s1 += w;
        s2 += w * w;
    }
    s1 * s1 / s2
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

/// `Λ*(x)` from samples.
pub fn cramer_rate(samples: &[f64], x: f64) -> Result<f64, DeviationError> {
    Ok(RateFunction::empirical(samples)?.rate(x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TailBound {
    pub value: f64,
    /// `−Hθε/2 + l·Λ(θ)`
    pub exponent: f64,
    /// The bound is at least 1, or the MGF diverges at `θ`.
    pub vacuous: bool,
}

/// `exp(−H(θε/2 − l·Λ(θ)/H))` for `l` i.i.d. capacities exceeding `εH/2`.
pub fn chebyshev_tail_bound(
    dist: &DistributionSpec,
    l: u64,
    epsilon: f64,
    area: f64,
    theta: f64,
) -> TailBound {
    let log_mgf = dist.log_mgf(theta);
    if !log_mgf.is_finite() {
        return TailBound {
            value: f64::INFINITY,
            exponent: f64::INFINITY,
            vacuous: true,
        };
    }
    let exponent = -area * theta * epsilon / 2.0 + l as f64 * log_mgf;
    let value = libm::exp(exponent);
    TailBound {
        value,
        exponent,
        vacuous: value >= 1.0,
    }
}
