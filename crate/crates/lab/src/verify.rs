//! Self-contained verification suite. Runs offline from a seed alone.

use std::collections::BTreeSet;

use fpp_core::capacities::{sample_capacities, DistributionSpec};
use fpp_core::deviations::{
    cardinality_ladder, chebyshev_tail_bound, disjoint_crossing_paths, pinned_boundary_witness, slab_decomposition,
    verify_cut_gluing, witness_size_bound, RateFunction, SlabRule,
};
use fpp_core::lattice::{build_cylinder, CylinderFamily, CylinderSpec, Direction, HeightRule, Hyperrectangle};
use fpp_core::maxflow::{
    flow_value, max_flow, min_cut_bruteforce, phi, tau, validate_stream, EdgeListGraph, FlowResult, Violation,
};
use fpp_core::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Injection {
    None,
    CapacityViolation,
}

impl std::str::FromStr for Injection {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Injection::None),
            "capacity_violation" => Ok(Injection::CapacityViolation),
            _ => Err(format!("expected none or capacity_violation, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub seed: u64,
    pub oracle_instances: usize,
    pub stream_instances: usize,
    pub gluing_decompositions: usize,
    pub inject: Injection,
}

impl VerifyOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            oracle_instances: 200,
            stream_instances: 500,
            gluing_decompositions: 100,
            inject: Injection::None,
        }
    }
}

pub fn run_verify(options: &VerifyOptions) -> Vec<CheckOutcome> {
    let seed = options.seed;
    let streams = check_streams(seed, options.stream_instances, options.inject);
    vec![
        check_oracle(seed, options.oracle_instances),
        streams.outcome,
        check_geometry(&streams.phi_tau_pairs),
        check_gluing(seed, options.gluing_decompositions),
        check_cardinality(),
        check_witness(),
        check_disjoint_paths(),
        check_rate(seed),
        check_chebyshev(),
    ]
}

fn rng(seed: u64, tag: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(tag);
    r
}

/// Random multigraphs with at most 16 edges and integer capacities in
/// `0..=7`: solver value against exhaustive minimum cut.
pub fn check_oracle(seed: u64, instances: usize) -> CheckOutcome {
    let mut r = rng(seed, 1);
    let mut mismatches = Vec::new();
    for i in 0..instances {
        let vertices = r.random_range(2..=8usize);
        let edge_count = r.random_range(1..=16usize);
        let edges: Vec<(usize, usize)> = (0..edge_count)
            .map(|_| {
                let u = r.random_range(0..vertices);
                let mut v = r.random_range(0..vertices - 1);
                if v >= u {
                    v += 1;
                }
                (u, v)
            })
            .collect();
        let caps: Vec<i64> = (0..edge_count).map(|_| r.random_range(0..=7)).collect();
        let mut order: Vec<usize> = (0..vertices).collect();
        for k in (1..vertices).rev() {
            order.swap(k, r.random_range(0..=k));
        }
        let split = r.random_range(1..vertices);
        let end = r.random_range(split + 1..=vertices);
        let (sources, sinks) = (&order[..split], &order[split..end]);
        let graph = EdgeListGraph::new(vertices, &edges).expect("generated edges are valid");
        let flow = max_flow(&graph, &caps, sources, sinks).map(|f| f.value);
        let cut = min_cut_bruteforce(&graph, &caps, sources, sinks);
        if flow != cut {
            mismatches.push(format!("instance {i}: flow {flow:?} vs cut {cut:?}"));
        }
    }
    CheckOutcome::new(
        "oracle",
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{instances} instances agree with exhaustive minimum cut")
        } else {
            mismatches.join("; ")
        },
    )
}

fn int(v: i128) -> Rational {
    Rational::from_integer(v)
}

/// Normals and frames used for fuzzed cylinders.
fn fuzz_geometry(dim: usize, choice: usize) -> (Direction, Vec<Vec<Rational>>) {
    let v = |c: &[i128]| c.iter().map(|&x| int(x)).collect::<Vec<_>>();
    if dim == 2 {
        match choice % 4 {
            0 => (Direction::axis(2, 1), vec![v(&[1, 0])]),
            1 => (Direction::new(vec![1, 1]).unwrap(), vec![v(&[1, -1])]),
            2 => (Direction::new(vec![1, 2]).unwrap(), vec![v(&[2, -1])]),
            _ => (Direction::axis(2, 0), vec![v(&[0, 1])]),
        }
    } else {
        match choice % 3 {
            0 => (Direction::axis(3, 2), vec![v(&[1, 0, 0]), v(&[0, 1, 0])]),
            1 => (Direction::new(vec![1, 1, 1]).unwrap(), vec![v(&[1, -1, 0]), v(&[1, 1, -2])]),
            _ => (Direction::new(vec![1, 0, 1]).unwrap(), vec![v(&[1, 0, -1]), v(&[0, 1, 0])]),
        }
    }
}

/// A random cylinder with `d ∈ {2, 3}`, `n ≤ 8` and `h ≥ 1`.
pub fn fuzz_cylinder(r: &mut ChaCha8Rng) -> CylinderSpec {
    let dim = if r.random_bool(0.5) { 2 } else { 3 };
    let (normal, frame) = fuzz_geometry(dim, r.random_range(0..4));
    let lengths: Vec<Rational> = (0..dim - 1).map(|_| Rational::new(r.random_range(2..=4), 2)).collect();
    let anchor: Vec<Rational> = (0..dim).map(|_| Rational::new(r.random_range(-2..=2), 2)).collect();
    let base = Hyperrectangle::new(anchor, frame, lengths, &normal).expect("fuzz frames are orthogonal");
    let scale = r.random_range(1..=8u32);
    // φ ≤ τ rests on T ⊆ A_1 and B ⊆ A_2, which need h ≥ 1
    let height = Rational::new(r.random_range(2..=2 * i128::from(scale) + 2), 2);
    CylinderSpec::new(base, normal, scale, height).expect("fuzz cylinders are valid")
}

const FUZZ_DISTRIBUTIONS: [DistributionSpec; 4] = [
    DistributionSpec::Exponential(1.0),
    DistributionSpec::Uniform(1.0),
    DistributionSpec::HalfGaussian(1.0),
    DistributionSpec::Bernoulli(0.6),
];

pub struct StreamCheck {
    pub outcome: CheckOutcome,
    /// `(φ, τ)` for every solved instance.
    pub phi_tau_pairs: Vec<(f64, f64)>,
    pub solved: usize,
}

fn describe(v: &Violation) -> String {
    match *v {
        Violation::Capacity { edge, throughput, capacity } => {
            format!("capacity violation on edge {edge} (throughput {throughput} > capacity {capacity})")
        }
        Violation::Conservation { vertex, inflow, outflow } => {
            format!("conservation violation at vertex {vertex} (in {inflow}, out {outflow})")
        }
    }
}

/// Fuzzed cylinders until `instances` of them are solvable: the extracted
/// cut has the flow's value, the stream is feasible and carries that value
/// into `F_2`, and `φ ≤ τ`. Even draws run in integer mode, odd ones in
/// floating point.
pub fn check_streams(seed: u64, instances: usize, inject: Injection) -> StreamCheck {
    let mut r = rng(seed, 2);
    let mut failures = Vec::new();
    let mut pairs = Vec::new();
    let mut degenerate = 0;
    let mut i = 0;
    while pairs.len() < instances && i < 4 * instances {
        i += 1;
        let spec = fuzz_cylinder(&mut r);
        let dist = FUZZ_DISTRIBUTIONS[i % FUZZ_DISTRIBUTIONS.len()];
        let rep_seed = r.random::<u64>();
        let Ok(graph) = build_cylinder(&spec) else {
            degenerate += 1;
            continue;
        };
        let caps = sample_capacities(graph.edge_count(), &dist, rep_seed, 0).expect("valid distribution");
        let (sources, sinks) = (graph.upper_half(), graph.lower_half());
        let (float_tau, float_phi) = match (tau(&graph, caps.values()), phi(&graph, caps.values())) {
            (Ok(t), Ok(p)) => (t, p),
            _ => {
                degenerate += 1;
                continue;
            }
        };
        pairs.push((float_phi.value, float_tau.value));
        if float_phi.value > float_tau.value * (1.0 + 1e-9) + 1e-12 {
            failures.push(format!("instance {i}: φ {} > τ {}", float_phi.value, float_tau.value));
        }
        if i % 2 == 0 {
            let int_caps = caps.quantized(64.0);
            let mut result: FlowResult<i64> = tau(&graph, &int_caps).expect("same terminals as float run");
            if inject == Injection::CapacityViolation && failures.is_empty() {
                result.stream.throughput[0] = int_caps[0] + 1;
            }
            if result.cut_capacity(&int_caps) != result.value {
                failures.push(format!("instance {i}: cut {} vs flow {}", result.cut_capacity(&int_caps), result.value));
            }
            if let Some(v) = validate_stream(&graph, &int_caps, &sources, &sinks, &result.stream).first() {
                failures.push(format!("instance {i}: {}", describe(v)));
            } else if flow_value(&graph, &result.stream, &sinks) != result.value {
                failures.push(format!("instance {i}: stream value differs from flow"));
            }
        } else {
            let caps = caps.values();
            let mut result = float_tau;
            if inject == Injection::CapacityViolation && failures.is_empty() {
                result.stream.throughput[0] = caps[0] + 1.0;
            }
            let tol = 1e-9 * result.value.max(1.0);
            if (result.cut_capacity(caps) - result.value).abs() > tol {
                failures.push(format!("instance {i}: cut {} vs flow {}", result.cut_capacity(caps), result.value));
            }
            if let Some(v) = validate_stream(&graph, caps, &sources, &sinks, &result.stream).first() {
                failures.push(format!("instance {i}: {}", describe(v)));
            } else if (flow_value(&graph, &result.stream, &sinks) - result.value).abs() > tol {
                failures.push(format!("instance {i}: stream value differs from flow"));
            }
        }
    }
    let solved = pairs.len();
    let passed = failures.is_empty() && solved == instances;
    let detail = if failures.is_empty() {
        format!("{solved} instances solved, {degenerate} degenerate skipped")
    } else {
        failures.join("; ")
    };
    StreamCheck {
        outcome: CheckOutcome::new("streams", passed, detail),
        phi_tau_pairs: pairs,
        solved,
    }
}

/// Unit capacities on straight planar cylinders: `τ = n + 1` in both
/// arithmetic modes, plus `φ ≤ τ` on the supplied fuzzed pairs.
pub fn check_geometry(phi_tau_pairs: &[(f64, f64)]) -> CheckOutcome {
    let mut failures = Vec::new();
    for n in [2u32, 10] {
        for h in [n.div_ceil(2), n] {
            let family = CylinderFamily::straight(2, HeightRule::Constant(int(i128::from(h)))).unwrap();
            let graph = build_cylinder(&family.at(n).unwrap()).unwrap();
            let float = tau(&graph, &vec![1.0; graph.edge_count()]).map(|f| f.value);
            let exact = tau(&graph, &vec![1i64; graph.edge_count()]).map(|f| f.value);
            if float != Ok(f64::from(n + 1)) || exact != Ok(i64::from(n + 1)) {
                failures.push(format!("n={n} h={h}: τ {float:?} / {exact:?}, expected {}", n + 1));
            }
        }
    }
    let reversed = phi_tau_pairs.iter().filter(|(p, t)| *p > t * (1.0 + 1e-9) + 1e-12).count();
    if reversed > 0 {
        failures.push(format!("φ > τ on {reversed} instances"));
    }
    CheckOutcome::new(
        "geometry",
        failures.is_empty(),
        if failures.is_empty() {
            format!("τ = n+1 for n in {{2, 10}}; φ ≤ τ on {} instances", phi_tau_pairs.len())
        } else {
            failures.join("; ")
        },
    )
}

/// Planar slab decompositions with `n ∈ {3,4,5}`, `N ∈ 12..=24`, `ζ = 4`.
pub fn check_gluing(seed: u64, decompositions: usize) -> CheckOutcome {
    let family = CylinderFamily::straight(2, HeightRule::Linear(int(1))).unwrap();
    let mut r = rng(seed, 3);
    let mut failures = Vec::new();
    let mut slabs = 0;
    let mut min_slack = f64::INFINITY;
    for i in 0..decompositions {
        let small = r.random_range(3..=5u32);
        let big = r.random_range(12..=24u32);
        let dist = if i % 2 == 0 { DistributionSpec::Exponential(1.0) } else { DistributionSpec::Bernoulli(0.7) };
        let result = slab_decomposition(&family, big, small, int(4), SlabRule::Max).and_then(|plan| {
            let caps = sample_capacities(plan.big_graph.edge_count(), &dist, r.random(), 0)?;
            verify_cut_gluing(&plan, caps.values())
        });
        match result {
            Ok(report) => {
                slabs += report.slabs.len();
                min_slack = report.slabs.iter().map(|s| s.slack).fold(min_slack, f64::min);
                if report.violations() > 0 {
                    failures.push(format!("decomposition {i} (n={small}, N={big}): {} violations", report.violations()));
                }
            }
            Err(e) => failures.push(format!("decomposition {i} (n={small}, N={big}): {e}")),
        }
    }
    CheckOutcome::new(
        "gluing",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{decompositions} decompositions, {slabs} slabs separated, smallest slack {min_slack:.4}")
        } else {
            failures.join("; ")
        },
    )
}

/// Ladder used for the glue-set cardinality constants.
pub const CARDINALITY_LADDER: [u32; 3] = [16, 32, 64];

/// Glue-set counts along `N ∈ {16, 32, 64}` at `n = 4`: the fitted constants
/// must be positive and finite and the counts must grow with `N`. Their
/// spread is reported.
pub fn check_cardinality() -> CheckOutcome {
    let family = CylinderFamily::straight(2, HeightRule::Linear(int(1))).unwrap();
    match cardinality_ladder(&family, 4, &CARDINALITY_LADDER, int(4), SlabRule::Max) {
        Ok(ladder) => {
            let finite = ladder.rows.iter().all(|r| r.c0 > 0.0 && r.c1 > 0.0 && r.c0.is_finite() && r.c1.is_finite());
            let growing = ladder
                .rows
                .windows(2)
                .all(|w| w[0].e1_count <= w[1].e1_count && w[0].e0_counts.iter().max() <= w[1].e0_counts.iter().max());
            let c0: Vec<String> = ladder.rows.iter().map(|r| format!("{:.2}", r.c0)).collect();
            let c1: Vec<String> = ladder.rows.iter().map(|r| format!("{:.2}", r.c1)).collect();
            CheckOutcome::new(
                "cardinality",
                finite && growing,
                format!(
                    "C_0 = [{}] spread {:.3}; C_1 = [{}] spread {:.3}",
                    c0.join(", "),
                    ladder.c0_spread,
                    c1.join(", "),
                    ladder.c1_spread
                ),
            )
        }
        Err(e) => CheckOutcome::new("cardinality", false, e.to_string()),
    }
}

/// Witness paths at the corner of `nA` for `n ∈ {4, 8, 16}`, `ζ = 4`: their
/// size stays under the fixed bound, and opening only their edges forces `τ`
/// up to the opened capacity for `n ∈ {4, 8}`.
pub fn check_witness() -> CheckOutcome {
    let zeta = int(4);
    let bound = witness_size_bound(2, &zeta);
    let mut failures = Vec::new();
    let mut sizes = Vec::new();
    for n in [4u32, 8, 16] {
        let family = CylinderFamily::straight(2, HeightRule::Linear(int(1))).unwrap();
        let spec = family.at(n).unwrap();
        let graph = build_cylinder(&spec).unwrap();
        let witness = match pinned_boundary_witness(&graph, &spec, spec.origin(), &zeta) {
            Ok(w) => w,
            Err(e) => {
                failures.push(format!("n={n}: {e}"));
                continue;
            }
        };
        sizes.push(witness.edges.len());
        if witness.edges.len() as u64 > bound {
            failures.push(format!("n={n}: witness has {} edges > {bound}", witness.edges.len()));
        }
        if n <= 8 {
            let mut caps = vec![0.0; graph.edge_count()];
            for &e in &witness.edges {
                caps[e] = 1e6;
            }
            let value = tau(&graph, &caps).map(|f| f.value).unwrap_or(0.0);
            if value < 1e6 {
                failures.push(format!("n={n}: τ = {value} < 1e6"));
            }
        }
    }
    CheckOutcome::new(
        "witness",
        failures.is_empty(),
        if failures.is_empty() {
            format!("witness sizes {sizes:?} ≤ K(2,4) = {bound}; τ ≥ 1e6 for n in {{4, 8}}")
        } else {
            failures.join("; ")
        },
    )
}

/// Edge-disjoint crossing paths near the base, on a short straight, a tall
/// straight and a tilted cylinder.
pub fn check_disjoint_paths() -> CheckOutcome {
    let one = int(1);
    let cases: Vec<(&str, CylinderSpec, f64, usize)> = vec![
        (
            "straight n=10 h=5",
            CylinderSpec::new(Hyperrectangle::straight(&[one]).unwrap(), Direction::axis(2, 1), 10, int(5)).unwrap(),
            1.0,
            11,
        ),
        (
            "straight n=8 h=20",
            CylinderSpec::new(Hyperrectangle::straight(&[one]).unwrap(), Direction::axis(2, 1), 8, int(20)).unwrap(),
            0.5,
            8,
        ),
        (
            "tilted (1,1) n=8 h=4",
            {
                let normal = Direction::new(vec![1, 1]).unwrap();
                let base = Hyperrectangle::new(vec![int(0); 2], vec![vec![one, -one]], vec![one], &normal).unwrap();
                CylinderSpec::new(base, normal, 8, int(4)).unwrap()
            },
            1.0,
            4,
        ),
    ];
    let mut failures = Vec::new();
    let mut counts = Vec::new();
    for (label, spec, margin, minimum) in cases {
        let graph = build_cylinder(&spec).unwrap();
        let paths = match disjoint_crossing_paths(&graph, &spec, margin) {
            Ok(p) => p,
            Err(e) => {
                failures.push(format!("{label}: {e}"));
                continue;
            }
        };
        counts.push(paths.len());
        let mut seen = BTreeSet::new();
        let disjoint = paths.iter().flatten().all(|&e| seen.insert(e));
        let reach = margin * f64::from(spec.scale()) + 1e-9;
        let near = seen.iter().all(|&e| {
            graph.edges()[e].iter().all(|&v| {
                let p: Vec<f64> = graph.vertex(v as usize).iter().map(|&x| x as f64).collect();
                spec.frame_coordinates(&p).1.abs() <= reach
            })
        });
        let mut caps = vec![0.0; graph.edge_count()];
        for &e in &seen {
            caps[e] = 1.0;
        }
        let carried = tau(&graph, &caps).map(|f| f.value).unwrap_or(0.0);
        if !disjoint || !near || paths.len() < minimum || carried + 1e-9 < paths.len() as f64 {
            failures.push(format!(
                "{label}: {} paths (need {minimum}), disjoint {disjoint}, within margin {near}, τ {carried}",
                paths.len()
            ));
        }
    }
    CheckOutcome::new(
        "disjoint-paths",
        failures.is_empty(),
        if failures.is_empty() { format!("path counts {counts:?}") } else { failures.join("; ") },
    )
}

/// `1 − log 2`, the upper rate of the unit exponential at 2.
pub const EXPONENTIAL_RATE_AT_TWO: f64 = 1.0 - std::f64::consts::LN_2;

/// Empirical rate of `10^5` unit exponential draws against the closed form.
pub fn check_rate(seed: u64) -> CheckOutcome {
    let sample = sample_capacities(100_000, &DistributionSpec::Exponential(1.0), seed, 7).expect("valid distribution");
    let values = sample.values();
    let rate = match RateFunction::empirical(values) {
        Ok(r) => r,
        Err(e) => return CheckOutcome::new("rate", false, e.to_string()),
    };
    let at_two = rate.rate(2.0);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let at_mean = rate.rate(mean);
    let relative = (at_two - EXPONENTIAL_RATE_AT_TWO).abs() / EXPONENTIAL_RATE_AT_TWO;
    CheckOutcome::new(
        "rate",
        relative < 0.05 && at_mean < 0.01,
        format!("Λ*(2) = {at_two:.5} (relative error {relative:.4}); Λ*(mean) = {at_mean:.2e}"),
    )
}

/// Reference value `exp(−25 + 10·log 2)`.
pub const CHEBYSHEV_REFERENCE: f64 = 1.422_13e-8;

/// The bound for `θ = 1/2`, `l = 10`, `H = 100`, `ε = 1`, unit exponential.
pub fn check_chebyshev() -> CheckOutcome {
    let bound = chebyshev_tail_bound(&DistributionSpec::Exponential(1.0), 10, 1.0, 100.0, 0.5);
    let agree = format!("{:.5e}", bound.value) == format!("{CHEBYSHEV_REFERENCE:.5e}");
    CheckOutcome::new(
        "chebyshev",
        agree && !bound.vacuous,
        format!("bound {:.6e}, exponent {:.6}", bound.value, bound.exponent),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let options = VerifyOptions {
            oracle_instances: 30,
            stream_instances: 40,
            gluing_decompositions: 4,
            ..VerifyOptions::new(0)
        };
        for outcome in run_verify(&options) {
            assert!(outcome.passed, "{}: {}", outcome.name, outcome.detail);
        }
    }

    #[test]
    fn injected_violation_is_named() {
        let check = check_streams(0, 6, Injection::CapacityViolation);
        assert!(!check.outcome.passed);
        assert!(check.outcome.detail.contains("capacity violation on edge"), "{}", check.outcome.detail);
    }

    #[test]
    fn fuzz_is_reproducible() {
        let a = check_streams(5, 20, Injection::None);
        let b = check_streams(5, 20, Injection::None);
        assert_eq!(a.phi_tau_pairs, b.phi_tau_pairs);
        assert!(a.solved >= 10, "{}", a.solved);
    }
}
