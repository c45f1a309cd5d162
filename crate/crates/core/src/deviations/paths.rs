use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::DeviationError;
use crate::exact::{from_int, to_f64, Rational};
use crate::lattice::{CylinderSpec, LatticeGraph};
use crate::maxflow::{FlowSolver, Orientation};

/// A path from `A_2^h` to `A_1^h` kept inside a small ball around a point of
/// `∂(nA)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    /// Vertices from the `A_2^h` end to the `A_1^h` end.
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    /// Number of lattice edges in the cube circumscribing the ball, an upper
    /// bound on `|P|` depending only on `d` and `ζ`.
    pub size_bound: u64,
}

/// `(2r+1)^{d−1}·2r·d` with `r = ⌈ζ/2⌉`.
pub fn witness_size_bound(dim: usize, zeta: &Rational) -> u64 {
    let r = (zeta / Rational::from_integer(2)).ceil().to_integer() as u64;
    (2 * r + 1).pow(dim as u32 - 1) * 2 * r * dim as u64
}

/// Shortest lattice path from `A_2^h` to `A_1^h` using only edges within the
/// ball of diameter `ζ` centred at `x0 ∈ ∂(nA)`. Every `(A_1^h, A_2^h)`-cut
/// contains one of its edges.
pub fn pinned_boundary_witness(
    graph: &LatticeGraph,
    spec: &CylinderSpec,
    x0: &[Rational],
    zeta: &Rational,
) -> Result<Witness, DeviationError> {
    let zeta_f = to_f64(zeta);
    for ext in spec.extents() {
        if *ext < *zeta {
            return Err(DeviationError::CylinderTooSmall {
                side: to_f64(ext),
                zeta: zeta_f,
            });
        }
    }
    let height = Rational::from_integer(2) * spec.height();
    if height < *zeta {
        return Err(DeviationError::CylinderTooSmall {
            side: to_f64(&height),
            zeta: zeta_f,
        });
    }
    if x0.len() != spec.dim() || !spec.on_base_boundary(x0) {
        return Err(DeviationError::NotOnBoundary);
    }
    let radius_sq = zeta * zeta / Rational::from_integer(4);
    let inside: Vec<bool> = (0..graph.vertex_count())
        .map(|v| {
            let dist: Rational = graph
                .vertex(v)
                .iter()
                .zip(x0)
                .map(|(&p, x)| {
                    let diff = from_int(p) - x;
                    diff * diff
                })
                .sum();
            dist <= radius_sq
        })
        .collect();

    let mut parent = vec![usize::MAX; graph.vertex_count()];
    let mut queue = VecDeque::new();
    for v in graph.lower_half() {
        if inside[v] {
            parent[v] = v;
            queue.push_back(v);
        }
    }
    let upper = graph.upper_half();
    let mut is_upper = vec![false; graph.vertex_count()];
    for &v in &upper {
        is_upper[v] = true;
    }
    let mut end = None;
    while let Some(u) = queue.pop_front() {
        if is_upper[u] {
            end = Some(u);
            break;
        }
        for &(w, _) in graph.neighbours(u) {
            let w = w as usize;
            if inside[w] && parent[w] == usize::MAX {
                parent[w] = u;
                queue.push_back(w);
            }
        }
    }
    let mut v = end.ok_or(DeviationError::NoWitnessPath)?;
    let mut vertices = vec![v];
    while parent[v] != v {
        v = parent[v];
        vertices.push(v);
    }
    vertices.reverse();
    let edges = vertices
        .windows(2)
        .map(|w| graph.edge_between(w[0], w[1]).expect("consecutive path vertices are adjacent"))
        .collect();
    Ok(Witness {
        vertices,
        edges,
        size_bound: witness_size_bound(spec.dim(), zeta),
    })
}

/// Edge-disjoint paths from `A_2^h` to `A_1^h` using only edges within
/// distance `margin·n` of `nA`, each path given by its edge indices.
///
/// Straight cylinders with `h ≤ margin·n` use the lattice columns along the
/// normal. Otherwise the paths come from a unit-capacity maximal flow on the
/// allowed edges, decomposed into paths.
pub fn disjoint_crossing_paths(
    graph: &LatticeGraph,
    spec: &CylinderSpec,
    margin: f64,
) -> Result<Vec<Vec<usize>>, DeviationError> {
    let reach = margin * spec.scale() as f64;
    if let Some(axis) = spec.normal().axis_index() {
        if to_f64(spec.height()) <= reach {
            return Ok(columns(graph, spec, axis));
        }
    }
    flow_paths(graph, spec, reach)
}

fn columns(graph: &LatticeGraph, spec: &CylinderSpec, axis: usize) -> Vec<Vec<usize>> {
    let step = spec.normal().components()[axis];
    let mut paths = Vec::new();
    for start in graph.lower_half() {
        let mut p = graph.vertex(start).to_vec();
        // only start at the bottom of a column
        p[axis] -= step;
        if graph.index_of(&p).is_some() {
            continue;
        }
        p[axis] += step;
        let mut v = start;
        let mut path = Vec::new();
        loop {
            p[axis] += step;
            let Some(w) = graph.index_of(&p) else { break };
            path.push(graph.edge_between(v, w).expect("column neighbours are adjacent"));
            v = w;
        }
        if graph.tags(v) & crate::lattice::UPPER_HALF != 0 {
            paths.push(path);
        }
    }
    paths
}

fn flow_paths(graph: &LatticeGraph, spec: &CylinderSpec, reach: f64) -> Result<Vec<Vec<usize>>, DeviationError> {
    let t_of = |v: usize| {
        let p: Vec<f64> = graph.vertex(v).iter().map(|&x| x as f64).collect();
        spec.frame_coordinates(&p).1
    };
    let near: Vec<bool> = (0..graph.vertex_count()).map(|v| t_of(v).abs() <= reach + 1e-9).collect();
    let caps: Vec<i64> = graph
        .edges()
        .iter()
        .map(|&[u, v]| i64::from(near[u as usize] && near[v as usize]))
        .collect();
    let sources = graph.lower_half();
    let sinks = graph.upper_half();
    let result = FlowSolver::<i64>::new(graph, &sources, &sinks)?.solve(&caps)?;

    // directed unit arcs carrying flow, grouped by tail
    let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new(); graph.vertex_count()];
    for (e, &[u, v]) in graph.edges().iter().enumerate() {
        if result.stream.throughput[e] == 0 {
            continue;
        }
        let (from, to) = match result.stream.orientation[e] {
            Orientation::Forward => (u as usize, v as usize),
            Orientation::Backward => (v as usize, u as usize),
        };
        out[from].push((to, e));
    }
    let mut role = vec![0u8; graph.vertex_count()];
    for &s in &sources {
        role[s] = 1;
    }
    for &t in &sinks {
        role[t] = 2;
    }
    let mut paths = Vec::new();
    for &s in &sources {
        while !out[s].is_empty() {
            let mut vertices = vec![s];
            let mut edges: Vec<usize> = Vec::new();
            let mut u = s;
            loop {
                if role[u] == 2 {
                    paths.push(edges);
                    break;
                }
                let Some((w, e)) = out[u].pop() else {
                    // conservation makes this unreachable for solver output
                    break;
                };
                if role[w] == 1 {
                    // restart from the later source
                    vertices.clear();
                    edges.clear();
                    vertices.push(w);
                    u = w;
                    continue;
                }
                if let Some(pos) = vertices.iter().position(|&x| x == w) {
                    // drop the cycle
                    vertices.truncate(pos + 1);
                    edges.truncate(pos);
                    u = w;
                    continue;
                }
                vertices.push(w);
                edges.push(e);
                u = w;
            }
        }
    }
    Ok(paths)
}
