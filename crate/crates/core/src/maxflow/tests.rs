use super::*;
use crate::capacities::{sample_capacities, DistributionSpec};
use crate::exact::Rational;
use crate::lattice::build_cylinder;
use crate::lattice::{CylinderSpec, Direction, Hyperrectangle};
use proptest::prelude::*;

fn straight(lengths: &[i128], h: i128) -> LatticeGraph {
    let lengths: Vec<Rational> = lengths.iter().map(|&l| Rational::from_integer(l)).collect();
    let d = lengths.len() + 1;
    let spec = CylinderSpec::new(
        Hyperrectangle::straight(&lengths).unwrap(),
        Direction::axis(d, d - 1),
        1,
        Rational::from_integer(h),
    )
    .unwrap();
    build_cylinder(&spec).unwrap()
}

#[test]
fn single_edge() {
    let g = EdgeListGraph::new(2, &[(0, 1)]).unwrap();
    let r = max_flow(&g, &[3i64], &[0], &[1]).unwrap();
    assert_eq!(r.value, 3);
    assert_eq!(r.cut, vec![0]);
    assert_eq!(min_cut_bruteforce(&g, &[3i64], &[0], &[1]).unwrap(), 3);
    let r = max_flow(&g, &[3.0f64], &[1], &[0]).unwrap();
    assert_eq!(r.value, 3.0);
    assert_eq!(r.stream.orientation[0], Orientation::Backward);
}

#[test]
fn zero_capacities() {
    let g = straight(&[4], 2);
    let caps = vec![0.0; g.edge_count()];
    let t = tau(&g, &caps).unwrap();
    let p = phi(&g, &caps).unwrap();
    assert_eq!((t.value, p.value), (0.0, 0.0));
    assert!(t.stream.throughput.iter().all(|&x| x == 0.0));
    let e = EdgeListGraph::new(4, &[(0, 1), (1, 3), (0, 2), (2, 3)]).unwrap();
    assert_eq!(min_cut_bruteforce(&e, &[0i64; 4], &[0], &[3]).unwrap(), 0);
}

#[test]
fn parallel_paths() {
    let g = EdgeListGraph::new(4, &[(0, 1), (1, 3), (0, 2), (2, 3)]).unwrap();
    let caps = [1i64, 5, 2, 4];
    assert_eq!(min_cut_bruteforce(&g, &caps, &[0], &[3]).unwrap(), 3);
    let r = max_flow(&g, &caps, &[0], &[3]).unwrap();
    assert_eq!(r.value, 3);
    assert_eq!(r.cut, vec![0, 2]);
}

#[test]
fn three_by_three_tau() {
    let g = straight(&[2], 1);
    let caps = vec![1i64; g.edge_count()];
    let r = tau(&g, &caps).unwrap();
    assert_eq!(r.value, 3);
    assert_eq!(r.cut_capacity(&caps), 3);
    assert_eq!(
        min_cut_bruteforce(&g, &caps, &g.upper_half(), &g.lower_half()).unwrap(),
        3
    );
}

#[test]
fn straight_ten_by_five() {
    let g = straight(&[10], 5);
    let caps = vec![1.0; g.edge_count()];
    let t = tau(&g, &caps).unwrap();
    let p = phi(&g, &caps).unwrap();
    assert_eq!(t.value, 11.0);
    assert_eq!(p.value, 11.0);
    // the cut sits at the first layer of vertical edges above A_2
    for &e in &t.cut {
        let [u, v] = g.edges()[e];
        assert_eq!(g.vertex(u as usize)[0], g.vertex(v as usize)[0]);
    }
}

#[test]
fn degenerate_cylinder_reports_missing_set() {
    let g = straight(&[3], 0);
    let caps = vec![1.0; g.edge_count()];
    assert!(matches!(tau(&g, &caps), Err(FlowError::DegenerateCylinder { .. })));
    assert!(matches!(phi(&g, &caps), Err(FlowError::Overlap { .. })));
}

#[test]
fn terminal_errors() {
    let g = EdgeListGraph::new(3, &[(0, 1), (1, 2)]).unwrap();
    assert_eq!(max_flow(&g, &[1i64, 1], &[0, 1], &[1]).unwrap_err(), FlowError::Overlap { vertex: 1 });
    assert_eq!(max_flow(&g, &[1i64, 1], &[], &[2]).unwrap_err(), FlowError::EmptySource);
    assert_eq!(
        max_flow(&g, &[1i64], &[0], &[2]).unwrap_err(),
        FlowError::CapacityCount { expected: 2, found: 1 }
    );
    let big = straight(&[3], 2);
    let caps = vec![1i64; big.edge_count()];
    assert!(matches!(
        min_cut_bruteforce(&big, &caps, &big.upper_half(), &big.lower_half()),
        Err(FlowError::OracleSize { .. })
    ));
    assert!(EdgeListGraph::new(2, &[(0, 0)]).is_err());
}

#[test]
fn hand_built_violations() {
    let g = EdgeListGraph::new(3, &[(0, 1), (1, 2)]).unwrap();
    let caps = [2.0, 2.0];
    let mut s = Stream::zero(2);
    s.set(0, 3.0, Orientation::Forward);
    s.set(1, 3.0, Orientation::Forward);
    let v = validate_stream(&g, &caps, &[0], &[2], &s);
    assert_eq!(v.len(), 2);
    assert!(v.iter().all(|x| matches!(x, Violation::Capacity { .. })));

    let mut s = Stream::zero(2);
    s.set(0, 2.0, Orientation::Forward);
    s.set(1, 1.0, Orientation::Forward);
    let v = validate_stream(&g, &caps, &[0], &[2], &s);
    assert_eq!(v, vec![Violation::Conservation { vertex: 1, inflow: 2.0, outflow: 1.0 }]);
}

#[test]
fn flow_value_on_a_path() {
    let g = EdgeListGraph::new(3, &[(0, 1), (1, 2)]).unwrap();
    assert_eq!(flow_value(&g, &Stream::<f64>::zero(2), &[2]), 0.0);
    let mut s = Stream::zero(2);
    s.set(0, 0.75, Orientation::Forward);
    s.set(1, 0.75, Orientation::Forward);
    assert_eq!(flow_value(&g, &s, &[2]), 0.75);
    assert!(validate_stream(&g, &[1.0, 1.0], &[0], &[2], &s).is_empty());
}

#[test]
fn solver_is_reusable() {
    let g = straight(&[6], 3);
    let mut solver = tau_solver::<f64>(&g).unwrap();
    for rep in 0..5 {
        let caps = sample_capacities(g.edge_count(), &DistributionSpec::Exponential(1.0), 11, rep).unwrap();
        let fresh = tau(&g, caps.values()).unwrap();
        assert_eq!(solver.value(caps.values()).unwrap(), fresh.value);
        assert_eq!(solver.solve(caps.values()).unwrap(), fresh);
    }
}

fn random_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>, Vec<i64>, usize, usize)> {
    (3usize..8).prop_flat_map(|n| {
        let edge = (0..n, 0..n).prop_filter("no loops", |(a, b)| a != b);
        (
            Just(n),
            proptest::collection::vec(edge, 1..=16),
            proptest::collection::vec(0i64..=7, 16),
            1usize..n,
        )
            .prop_map(|(n, edges, caps, split)| {
                let caps = caps[..edges.len()].to_vec();
                (n, edges, caps, split, n)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn solver_matches_bruteforce((n, edges, caps, split, _) in random_graph()) {
        let g = EdgeListGraph::new(n, &edges).unwrap();
        let sources: Vec<usize> = (0..split.min(2)).collect();
        let sinks: Vec<usize> = (split.max(2)..n).collect();
        prop_assume!(!sinks.is_empty());
        let exact = min_cut_bruteforce(&g, &caps, &sources, &sinks).unwrap();
        let r = max_flow(&g, &caps, &sources, &sinks).unwrap();
        prop_assert_eq!(r.value, exact);
        prop_assert_eq!(r.cut_capacity(&caps), exact);
        prop_assert!(validate_stream(&g, &caps, &sources, &sinks, &r.stream).is_empty());
        prop_assert_eq!(flow_value(&g, &r.stream, &sinks), exact);
        let float: Vec<f64> = caps.iter().map(|&c| c as f64).collect();
        let rf = max_flow(&g, &float, &sources, &sinks).unwrap();
        prop_assert!((rf.value - exact as f64).abs() < 1e-9);
    }

    #[test]
    fn phi_bounded_by_tau_and_streams_valid(
        len in 1i128..6, h in 1i128..4, seed in 0u64..1000, which in 0usize..3, bump in 0usize..1000,
    ) {
        let g = straight(&[len], h);
        let dist = [DistributionSpec::Bernoulli(0.6), DistributionSpec::Exponential(1.0), DistributionSpec::HalfGaussian(1.0)][which];
        let caps = sample_capacities(g.edge_count(), &dist, seed, 0).unwrap();
        let caps = caps.values();
        let t = tau(&g, caps).unwrap();
        let p = phi(&g, caps).unwrap();
        prop_assert!(p.value <= t.value + 1e-9);
        prop_assert!(validate_stream(&g, caps, &g.upper_half(), &g.lower_half(), &t.stream).is_empty());
        prop_assert!(validate_stream(&g, caps, &g.bottom(), &g.top(), &p.stream).is_empty());
        prop_assert!((t.cut_capacity(caps) - t.value).abs() < 1e-9 * (1.0 + t.value));
        prop_assert!((flow_value(&g, &t.stream, &g.lower_half()) - t.value).abs() < 1e-9 * (1.0 + t.value));
        let mut raised = caps.to_vec();
        let at = bump % raised.len();
        raised[at] += 1.5;
        prop_assert!(tau(&g, &raised).unwrap().value >= t.value - 1e-9);
        prop_assert!(phi(&g, &raised).unwrap().value >= p.value - 1e-9);
    }
}
