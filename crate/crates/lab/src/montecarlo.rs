//! Replicated flow experiments.
//!
//! Replication `r` at scale `n` draws its capacities from the stream
//! `(sub_seed(seed, n), r)`, so results never depend on how replications are
//! spread over workers. Collected values keep replication order.

use fpp_core::capacities::{sample_into, DistributionError, DistributionSpec};
use fpp_core::exact::to_f64;
use fpp_core::lattice::{build_cylinder, CylinderFamily, GeometryError};
use fpp_core::maxflow::{tau_solver, FlowError};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MonteCarloError {
    #[error("replication count must be at least 1")]
    ZeroReps,
    #[error("threshold must be positive, got {0}")]
    BadLambda(f64),
    #[error("need at least 3 ladder points with 0 < p < 0.5, found {usable}")]
    InsufficientData { usable: usize },
    #[error("geometry: {0}")]
    Geometry(#[from] GeometryError),
    #[error("flow: {0}")]
    Flow(#[from] FlowError),
    #[error("distribution: {0}")]
    Distribution(#[from] DistributionError),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// SplitMix64 finaliser, used to derive independent per-scale seeds.
pub fn sub_seed(seed: u64, n: u32) -> u64 {
    let mut z = seed ^ (u64::from(n)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `τ/H^{d−1}(nA)` for replications `0..reps` at one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct TauSample {
    pub n: u32,
    pub height: f64,
    pub area: f64,
    pub values: Vec<f64>,
}

pub fn sample_tau(
    family: &CylinderFamily,
    dist: &DistributionSpec,
    n: u32,
    reps: u64,
    seed: u64,
    workers: usize,
) -> Result<TauSample, MonteCarloError> {
    if reps == 0 {
        return Err(MonteCarloError::ZeroReps);
    }
    let dist = dist.validate()?;
    let spec = family.at(n)?;
    let graph = build_cylinder(&spec)?;
    let solver = tau_solver::<f64>(&graph)?;
    let area = to_f64(&spec.area());
    let edges = graph.edge_count();
    let stream = sub_seed(seed, n);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| MonteCarloError::Pool(e.to_string()))?;
    let values: Result<Vec<f64>, FlowError> = pool.install(|| {
        (0..reps)
            .into_par_iter()
            .map_init(
                || (solver.clone(), Vec::with_capacity(edges)),
                |(solver, caps), rep| {
                    sample_into(&dist, stream, rep, edges, caps);
                    Ok(solver.value(caps)? / area)
                },
            )
            .collect()
    });
    Ok(TauSample {
        n,
        height: to_f64(spec.height()),
        area,
        values: values?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NuEstimate {
    pub n: u32,
    pub height: f64,
    pub reps: u64,
    pub mean: f64,
    pub se: f64,
    pub dist: String,
    pub spec: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NuRecord {
    Estimate(NuEstimate),
    Skipped { n: u32, reason: String },
}

/// Mean and standard error of a sample. The error is 0 for a single value.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Scales whose cylinder is degenerate are reported as skipped.
pub fn estimate_nu(
    family: &CylinderFamily,
    spec_id: &str,
    dist: &DistributionSpec,
    n_list: &[u32],
    reps: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<NuRecord>, MonteCarloError> {
    if reps == 0 {
        return Err(MonteCarloError::ZeroReps);
    }
    let mut records = Vec::with_capacity(n_list.len());
    for &n in n_list {
        match sample_tau(family, dist, n, reps, seed, workers) {
            Ok(sample) => {
                let (mean, se) = mean_se(&sample.values);
                records.push(NuRecord::Estimate(NuEstimate {
                    n,
                    height: sample.height,
                    reps,
                    mean,
                    se,
                    dist: dist.to_string(),
                    spec: spec_id.to_string(),
                }));
            }
            Err(MonteCarloError::Flow(e @ FlowError::DegenerateCylinder { .. }))
            | Err(MonteCarloError::Flow(e @ FlowError::EmptySource))
            | Err(MonteCarloError::Flow(e @ FlowError::EmptySink)) => {
                records.push(NuRecord::Skipped { n, reason: e.to_string() });
            }
            Err(MonteCarloError::Geometry(e)) => {
                records.push(NuRecord::Skipped { n, reason: e.to_string() });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEstimate {
    pub n: u32,
    pub height: f64,
    pub lambda: f64,
    pub reps: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub neg_log: f64,
    /// `n^{d−1}`, `n^{d−1}·min(n, h)`, `n^{d−1}·h`
    pub speeds: [f64; 3],
}

/// Two-sided 95% Clopper–Pearson interval. With no hits the upper end is the
/// one-sided `3/reps` rule.
pub fn binomial_interval(hits: u64, reps: u64) -> (f64, f64) {
    let (k, m) = (hits as f64, reps as f64);
    if hits == 0 {
        return (0.0, (3.0 / m).min(1.0));
    }
    let lo = Beta::new(k, m - k + 1.0).map(|b| b.inverse_cdf(0.025)).unwrap_or(0.0);
    let hi = if hits == reps {
        1.0
    } else {
        Beta::new(k + 1.0, m - k).map(|b| b.inverse_cdf(0.975)).unwrap_or(1.0)
    };
    (lo, hi)
}

pub fn candidate_speeds(dim: usize, n: u32, height: f64) -> [f64; 3] {
    let surface = f64::from(n).powi(dim as i32 - 1);
    [surface, surface * f64::from(n).min(height), surface * height]
}

/// Frequency of `τ/H ≥ λ` in a cached sample.
pub fn tail_from_sample(sample: &TauSample, dim: usize, lambda: f64) -> Result<TailEstimate, MonteCarloError> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(MonteCarloError::BadLambda(lambda));
    }
    let reps = sample.values.len() as u64;
    if reps == 0 {
        return Err(MonteCarloError::ZeroReps);
    }
    let hits = sample.values.iter().filter(|&&v| v >= lambda).count() as u64;
    let p_hat = hits as f64 / reps as f64;
    let (ci_lo, ci_hi) = binomial_interval(hits, reps);
    Ok(TailEstimate {
        n: sample.n,
        height: sample.height,
        lambda,
        reps,
        hits,
        p_hat,
        ci_lo,
        ci_hi,
        neg_log: -p_hat.ln(),
        speeds: candidate_speeds(dim, sample.n, sample.height),
    })
}

#[allow(clippy::too_many_arguments)]
pub fn tail_probability(
    family: &CylinderFamily,
    dist: &DistributionSpec,
    n: u32,
    lambda: f64,
    reps: u64,
    seed: u64,
    workers: usize,
) -> Result<TailEstimate, MonteCarloError> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(MonteCarloError::BadLambda(lambda));
    }
    let sample = sample_tau(family, dist, n, reps, seed, workers)?;
    tail_from_sample(&sample, family.dim(), lambda)
}

/// Target window for tail probabilities.
pub const P_WINDOW: (f64, f64) = (1e-4, 0.5);

fn in_window(p: f64) -> bool {
    p > P_WINDOW.0 && p < P_WINDOW.1
}

/// Threshold from a pilot estimate: `ν̂·(1 + offset)`.
pub fn pilot_lambda(nu_hat: f64, offset: f64) -> f64 {
    nu_hat * (1.0 + offset)
}

/// A threshold putting as many ladder points as possible inside
/// [`P_WINDOW`], searched over the observed values. Ties go to the
/// threshold closest to `current`.
pub fn recalibrate_lambda(samples: &[TauSample], current: f64) -> f64 {
    let mut candidates: Vec<f64> = samples.iter().flat_map(|s| s.values.iter().copied()).filter(|v| *v > 0.0).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let score = |lambda: f64| {
        samples
            .iter()
            .filter(|s| {
                let hits = s.values.iter().filter(|&&v| v >= lambda).count();
                in_window(hits as f64 / s.values.len() as f64)
            })
            .count()
    };
    let mut best = (score(current), current);
    for &c in &candidates {
        let s = score(c);
        if s > best.0 || (s == best.0 && (c - current).abs() < (best.1 - current).abs()) {
            best = (s, c);
        }
    }
    best.1
}

/// Tail estimates over a ladder for one threshold, recalibrating once if any
/// point leaves [`P_WINDOW`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailScan {
    pub initial_lambda: f64,
    pub lambda: f64,
    pub recalibrated: bool,
    pub estimates: Vec<TailEstimate>,
}

pub fn tail_scan(samples: &[TauSample], dim: usize, lambda: f64, allow_recalibration: bool) -> Result<TailScan, MonteCarloError> {
    let estimate = |l: f64| -> Result<Vec<TailEstimate>, MonteCarloError> {
        samples.iter().map(|s| tail_from_sample(s, dim, l)).collect()
    };
    let first = estimate(lambda)?;
    if !allow_recalibration || first.iter().all(|e| in_window(e.p_hat)) {
        return Ok(TailScan {
            initial_lambda: lambda,
            lambda,
            recalibrated: false,
            estimates: first,
        });
    }
    let adjusted = recalibrate_lambda(samples, lambda);
    Ok(TailScan {
        initial_lambda: lambda,
        lambda: adjusted,
        recalibrated: adjusted != lambda,
        estimates: estimate(adjusted)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Surface,
    MinRegime,
    Volume,
    Inconclusive,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Surface => "surface",
            Regime::MinRegime => "min-regime",
            Regime::Volume => "volume",
            Regime::Inconclusive => "inconclusive",
        }
    }
}

/// Largest distance between the fitted and a candidate exponent that still
/// counts as a match.
pub const REGIME_TOLERANCE: f64 = 0.4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    pub points: Vec<(u32, f64)>,
    pub residuals: Vec<f64>,
    /// Exponents of the surface, min-regime and volume speeds.
    pub candidates: [f64; 3],
    pub nearest: Regime,
    pub classification: Regime,
}

/// Growth exponents of the three candidate speeds for `h(n) ~ n^g`.
pub fn candidate_exponents(dim: usize, growth: f64) -> [f64; 3] {
    let surface = dim as f64 - 1.0;
    [surface, surface + growth.min(1.0), surface + growth]
}

/// Least-squares slope of `log(−log p)` against `log n` over points
/// `(n, −log p)` with `0 < p < 0.5`.
///
/// When candidate exponents coincide the preference is min-regime, then
/// surface, then volume.
pub fn regime_fit(points: &[(u32, f64)], dim: usize, growth: f64) -> Result<ScalingFit, MonteCarloError> {
    let usable: Vec<(u32, f64)> = points
        .iter()
        .copied()
        .filter(|&(n, nl)| n > 0 && nl.is_finite() && nl > std::f64::consts::LN_2)
        .collect();
    if usable.len() < 3 {
        return Err(MonteCarloError::InsufficientData { usable: usable.len() });
    }
    let xs: Vec<f64> = usable.iter().map(|&(n, _)| f64::from(n).ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|&(_, nl)| nl.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(MonteCarloError::InsufficientData { usable: 1 });
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - (intercept + exponent * x)).collect();
    let candidates = candidate_exponents(dim, growth);
    let order = [(1, Regime::MinRegime), (0, Regime::Surface), (2, Regime::Volume)];
    let mut nearest = order[0];
    for &c in &order[1..] {
        if (candidates[c.0] - exponent).abs() < (candidates[nearest.0] - exponent).abs() {
            nearest = c;
        }
    }
    let classification = if (candidates[nearest.0] - exponent).abs() <= REGIME_TOLERANCE {
        nearest.1
    } else {
        Regime::Inconclusive
    };
    Ok(ScalingFit {
        exponent,
        intercept,
        points: usable,
        residuals,
        candidates,
        nearest: nearest.1,
        classification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use fpp_core::lattice::HeightRule;
    use fpp_core::Rational;

    fn linear(c: i128) -> CylinderFamily {
        CylinderFamily::straight(2, HeightRule::Linear(Rational::new(c, 2))).unwrap()
    }

    #[test]
    fn constant_capacities_give_exact_ratio() {
        let records = estimate_nu(&linear(1), "s", &DistributionSpec::Constant(1.0), &[10], 5, 1, 1).unwrap();
        let NuRecord::Estimate(e) = &records[0] else { panic!() };
        assert_eq!(e.mean, 1.1);
        assert_eq!(e.se, 0.0);
        assert_eq!(e.height, 5.0);
    }

    #[test]
    fn zero_reps_rejected() {
        assert!(matches!(
            estimate_nu(&linear(2), "s", &DistributionSpec::Constant(1.0), &[4], 0, 1, 1),
            Err(MonteCarloError::ZeroReps)
        ));
    }

    #[test]
    fn deterministic_tails() {
        let f = linear(2);
        let t = tail_probability(&f, &DistributionSpec::Constant(1.0), 6, 0.5, 20, 3, 1).unwrap();
        assert_eq!((t.p_hat, t.hits), (1.0, 20));
        assert!(t.ci_lo <= 1.0 && t.ci_hi == 1.0);
        for n in [2, 5, 9] {
            let t = tail_probability(&f, &DistributionSpec::Uniform(1.0), n, 2.0, 200, 3, 1).unwrap();
            assert_eq!(t.p_hat, 0.0);
            assert_eq!((t.ci_lo, t.ci_hi), (0.0, 3.0 / 200.0));
        }
    }

    #[test]
    fn clopper_pearson_reference() {
        // reference values of the exact interval
        let (lo, hi) = binomial_interval(5, 100);
        assert!((lo - 0.016_431).abs() < 1e-5, "{lo}");
        assert!((hi - 0.112_835).abs() < 1e-5, "{hi}");
        let (lo, hi) = binomial_interval(50, 100);
        assert!((lo - 0.398_321).abs() < 1e-5 && (hi - 0.601_679).abs() < 1e-5);
    }

    #[test]
    fn worker_count_does_not_matter() {
        let f = linear(2);
        let d = DistributionSpec::Exponential(1.0);
        let a = sample_tau(&f, &d, 6, 64, 11, 1).unwrap();
        let b = sample_tau(&f, &d, 6, 64, 11, 4).unwrap();
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, sample_tau(&f, &d, 6, 64, 12, 1).unwrap().values);
    }

    #[test]
    fn synthetic_fits() {
        let fit = regime_fit(&[(4, 16.0), (8, 64.0), (12, 144.0)], 2, 1.0).unwrap();
        assert!((fit.exponent - 2.0).abs() < 1e-12);
        assert_eq!(fit.classification, Regime::MinRegime);
        let fit = regime_fit(&[(4, 4.0), (8, 8.0), (12, 12.0)], 2, 1.0).unwrap();
        assert!((fit.exponent - 1.0).abs() < 1e-12);
        assert_eq!(fit.classification, Regime::Surface);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-12));
        let fit = regime_fit(&[(4, 4.0), (8, 4.0 * 8f64.powf(3.5) / 4f64.powf(3.5)), (12, 4.0 * 3f64.powf(3.5))], 2, 1.0).unwrap();
        assert_eq!(fit.classification, Regime::Inconclusive);
        assert!(matches!(
            regime_fit(&[(4, 16.0), (8, 64.0), (12, 0.1)], 2, 1.0),
            Err(MonteCarloError::InsufficientData { usable: 2 })
        ));
    }

    #[test]
    fn recalibration_moves_into_window() {
        let samples: Vec<TauSample> = (0..3)
            .map(|i| TauSample {
                n: 4 + i,
                height: 1.0,
                area: 1.0,
                values: (0..1000).map(|k| k as f64 / 1000.0).collect(),
            })
            .collect();
        let scan = tail_scan(&samples, 2, 5.0, true).unwrap();
        assert!(scan.recalibrated);
        assert!(scan.estimates.iter().all(|e| in_window(e.p_hat)));
        let fixed = tail_scan(&samples, 2, 5.0, false).unwrap();
        assert!(!fixed.recalibrated && fixed.estimates[0].p_hat == 0.0);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]

        #[test]
        fn p_hat_monotone_in_lambda(values in proptest::collection::vec(0.0f64..3.0, 1..200), a in 0.01f64..3.0, b in 0.01f64..3.0) {
            let s = TauSample { n: 4, height: 4.0, area: 4.0, values };
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let pl = tail_from_sample(&s, 2, lo).unwrap();
            let ph = tail_from_sample(&s, 2, hi).unwrap();
            proptest::prop_assert!(ph.p_hat <= pl.p_hat);
            for e in [pl, ph] {
                proptest::prop_assert!((0.0..=1.0).contains(&e.p_hat));
                proptest::prop_assert!(e.ci_lo <= e.p_hat + 1e-12 && e.p_hat <= e.ci_hi + 1e-12);
            }
        }
    }
}
