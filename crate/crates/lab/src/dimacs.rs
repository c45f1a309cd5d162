//! DIMACS max-flow text format.
//!
//! Lattice vertex `v` becomes node `v + 1`; the super source and sink are
//! nodes `V + 1` and `V + 2`. Each undirected edge is written as two opposite
//! arcs with the same capacity. Terminal arcs carry the total edge capacity
//! plus one, which no cut through lattice edges can reach.

use std::fmt::Write as _;
use std::io::{self, BufRead};

use fpp_core::lattice::LatticeGraph;

pub fn write_instance(
    graph: &LatticeGraph,
    caps: &[i64],
    sources: &[usize],
    sinks: &[usize],
    comments: &[String],
) -> String {
    let v = graph.vertex_count();
    let (s, t) = (v + 1, v + 2);
    let big = caps.iter().sum::<i64>() + 1;
    let arcs = 2 * graph.edge_count() + sources.len() + sinks.len();
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "c {c}");
    }
    let _ = writeln!(out, "p max {} {arcs}", v + 2);
    let _ = writeln!(out, "n {s} s");
    let _ = writeln!(out, "n {t} t");
    for &x in sources {
        let _ = writeln!(out, "a {s} {} {big}", x + 1);
    }
    for &x in sinks {
        let _ = writeln!(out, "a {} {t} {big}", x + 1);
    }
    for (&[a, b], &c) in graph.edges().iter().zip(caps) {
        let _ = writeln!(out, "a {} {} {c}", a + 1, b + 1);
        let _ = writeln!(out, "a {} {} {c}", b + 1, a + 1);
    }
    out
}

/// A parsed directed network with 1-based node numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub nodes: usize,
    pub source: usize,
    pub sink: usize,
    pub arcs: Vec<(usize, usize, i64)>,
}

fn bad(line: usize, what: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, format!("line {line}: {what}"))
}

pub fn read_instance(input: impl BufRead) -> io::Result<Instance> {
    let mut nodes = None;
    let (mut source, mut sink) = (None, None);
    let mut arcs = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let number = |k: usize| -> io::Result<i64> {
            fields.get(k).and_then(|f| f.parse().ok()).ok_or_else(|| bad(i + 1, "expected a number"))
        };
        match fields.first().copied() {
            None | Some("c") => {}
            Some("p") => {
                if fields.get(1) != Some(&"max") {
                    return Err(bad(i + 1, "not a max-flow problem"));
                }
                nodes = Some(number(2)? as usize);
            }
            Some("n") => {
                let node = number(1)? as usize;
                match fields.get(2).copied() {
                    Some("s") => source = Some(node),
                    Some("t") => sink = Some(node),
                    _ => return Err(bad(i + 1, "node designator must be s or t")),
                }
            }
            Some("a") => arcs.push((number(1)? as usize, number(2)? as usize, number(3)?)),
            Some(_) => return Err(bad(i + 1, "unknown line type")),
        }
    }
    Ok(Instance {
        nodes: nodes.ok_or_else(|| bad(0, "missing problem line"))?,
        source: source.ok_or_else(|| bad(0, "missing source"))?,
        sink: sink.ok_or_else(|| bad(0, "missing sink"))?,
        arcs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use fpp_core::capacities::{sample_capacities, DistributionSpec};
    use fpp_core::lattice::{build_cylinder, CylinderFamily, HeightRule};
    use fpp_core::maxflow::tau;
    use fpp_core::Rational;
    use std::collections::VecDeque;

    /// Plain Edmonds–Karp on a directed adjacency matrix.
    fn edmonds_karp(inst: &Instance) -> i64 {
        let n = inst.nodes + 1;
        let mut cap = vec![vec![0i64; n]; n];
        for &(u, v, c) in &inst.arcs {
            cap[u][v] += c;
        }
        let mut total = 0;
        loop {
            let mut prev = vec![usize::MAX; n];
            prev[inst.source] = inst.source;
            let mut queue = VecDeque::from([inst.source]);
            while let Some(u) = queue.pop_front() {
                for v in 0..n {
                    if cap[u][v] > 0 && prev[v] == usize::MAX {
                        prev[v] = u;
                        queue.push_back(v);
                    }
                }
            }
            if prev[inst.sink] == usize::MAX {
                return total;
            }
            let mut push = i64::MAX;
            let mut v = inst.sink;
            while v != inst.source {
                push = push.min(cap[prev[v]][v]);
                v = prev[v];
            }
            let mut v = inst.sink;
            while v != inst.source {
                cap[prev[v]][v] -= push;
                cap[v][prev[v]] += push;
                v = prev[v];
            }
            total += push;
        }
    }

    #[test]
    fn round_trip_matches_solver() {
        let family = CylinderFamily::straight(2, HeightRule::Linear(Rational::from_integer(1))).unwrap();
        for (n, seed) in [(3, 1), (4, 2), (5, 3)] {
            let spec = family.at(n).unwrap();
            let g = build_cylinder(&spec).unwrap();
            let caps = sample_capacities(g.edge_count(), &DistributionSpec::Exponential(1.0), seed, 0)
                .unwrap()
                .quantized(100.0);
            let text = write_instance(&g, &caps, &g.lower_half(), &g.upper_half(), &["test".into()]);
            let inst = read_instance(text.as_bytes()).unwrap();
            assert_eq!(inst.nodes, g.vertex_count() + 2);
            assert_eq!(edmonds_karp(&inst), tau(&g, &caps).unwrap().value);
        }
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(read_instance("p min 3 0\n".as_bytes()).is_err());
        assert!(read_instance("p max 3 1\nn 1 s\nn 3 t\na 1 x 2\n".as_bytes()).is_err());
        assert!(read_instance("p max 3 0\nn 1 s\n".as_bytes()).is_err());
    }
}
