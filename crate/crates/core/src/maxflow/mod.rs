//! Maximal flows between vertex sets, minimal cuts, and stream checks.
//!
//! Every undirected edge `e` carries throughput at most `t(e)` in either
//! direction. The sets `F_1` and `F_2` are attached to a virtual source and
//! sink through arcs of unbounded capacity, and the maximum is found with a
//! blocking-flow solver ([`FlowSolver`]). Capacities can be `f64` or exact
//! `i64`, see [`Capacity`].

mod dinic;
mod oracle;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Sub};

use crate::lattice::LatticeGraph;

pub use dinic::FlowSolver;
pub use oracle::{min_cut_bruteforce, ORACLE_MAX_EDGES};

/// Undirected graph with edges addressed by index.
pub trait Network {
    fn vertex_count(&self) -> usize;
    fn edge_list(&self) -> &[[u32; 2]];
}

impl Network for LatticeGraph {
    fn vertex_count(&self) -> usize {
        LatticeGraph::vertex_count(self)
    }

    fn edge_list(&self) -> &[[u32; 2]] {
        self.edges()
    }
}

/// Plain graph given by an explicit edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeListGraph {
    vertices: usize,
    edges: Vec<[u32; 2]>,
}

impl EdgeListGraph {
    pub fn new(vertices: usize, edges: &[(usize, usize)]) -> Result<Self, FlowError> {
        let mut list = Vec::with_capacity(edges.len());
        for (index, &(u, v)) in edges.iter().enumerate() {
            if u >= vertices || v >= vertices || u == v {
                return Err(FlowError::BadEdge { edge: index });
            }
            list.push([u as u32, v as u32]);
        }
        Ok(Self {
            vertices,
            edges: list,
        })
    }
}

impl Network for EdgeListGraph {
    fn vertex_count(&self) -> usize {
        self.vertices
    }

    fn edge_list(&self) -> &[[u32; 2]] {
        &self.edges
    }
}

/// Numeric type of capacities and throughputs.
pub trait Capacity:
    Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> + fmt::Debug + Default
{
    const ZERO: Self;
    /// Capacity of the terminal arcs.
    fn unbounded() -> Self;
    /// Whether a residual capacity still admits flow.
    fn admits(self) -> bool;
    /// Equality up to the mode's tolerance, relative to `scale`.
    fn close(self, other: Self, scale: Self) -> bool;
    fn to_f64(self) -> f64;
}

impl Capacity for f64 {
    const ZERO: Self = 0.0;

    fn unbounded() -> Self {
        f64::INFINITY
    }

    fn admits(self) -> bool {
        self > 1e-12
    }

    fn close(self, other: Self, scale: Self) -> bool {
        libm::fabs(self - other) <= 1e-9 * scale.max(1.0)
    }

    fn to_f64(self) -> f64 {
        self
    }
}

impl Capacity for i64 {
    const ZERO: Self = 0;

    fn unbounded() -> Self {
        i64::MAX / 4
    }

    fn admits(self) -> bool {
        self > 0
    }

    fn close(self, other: Self, _scale: Self) -> bool {
        self == other
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowError {
    /// A vertex lies in both terminal sets.
    Overlap { vertex: usize },
    EmptySource,
    EmptySink,
    /// A terminal set of a cylinder is empty, typically because `h` is too
    /// small.
    DegenerateCylinder { missing: &'static str },
    VertexOutOfRange { vertex: usize },
    CapacityCount { expected: usize, found: usize },
    NegativeCapacity { edge: usize },
    BadEdge { edge: usize },
    OracleSize { edges: usize },
}

impl fmt::Display for FlowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowError::Overlap { vertex } => write!(f, "vertex {vertex} is both a source and a sink"),
            FlowError::EmptySource => f.write_str("empty source set"),
            FlowError::EmptySink => f.write_str("empty sink set"),
            FlowError::DegenerateCylinder { missing } => {
                write!(f, "degenerate cylinder: {missing} is empty")
            }
            FlowError::VertexOutOfRange { vertex } => write!(f, "vertex {vertex} out of range"),
            FlowError::CapacityCount { expected, found } => {
                write!(f, "expected {expected} capacities, got {found}")
            }
            FlowError::NegativeCapacity { edge } => write!(f, "edge {edge} has a negative capacity"),
            FlowError::BadEdge { edge } => write!(f, "edge {edge} is a loop or names a missing vertex"),
            FlowError::OracleSize { edges } => write!(
                f,
                "brute-force oracle handles at most {ORACLE_MAX_EDGES} edges, graph has {edges}"
            ),
        }
    }
}

impl core::error::Error for FlowError {}

/// Direction of the throughput relative to the stored endpoint order `[u, v]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Forward,
    Backward,
}

/// A stream `(g, o)`: throughput and orientation per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Stream<C> {
    pub throughput: Vec<C>,
    pub orientation: Vec<Orientation>,
}

impl<C: Capacity> Stream<C> {
    pub fn zero(edge_count: usize) -> Self {
        Self {
            throughput: vec![C::ZERO; edge_count],
            orientation: vec![Orientation::Forward; edge_count],
        }
    }

    pub fn set(&mut self, edge: usize, amount: C, orientation: Orientation) {
        self.throughput[edge] = amount;
        self.orientation[edge] = orientation;
    }

    /// Signed flow from `edges[e][0]` to `edges[e][1]`, as `(into v, into u)`.
    fn signed(&self, edge: usize) -> (C, C) {
        match self.orientation[edge] {
            Orientation::Forward => (self.throughput[edge], C::ZERO),
            Orientation::Backward => (C::ZERO, self.throughput[edge]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult<C> {
    pub value: C,
    pub stream: Stream<C>,
    /// Edges with exactly one endpoint on the source side.
    pub cut: Vec<usize>,
    /// Vertices reachable from `F_1` in the final residual graph.
    pub source_side: Vec<bool>,
}

impl<C: Capacity> FlowResult<C> {
    /// `V(cut)`.
    pub fn cut_capacity(&self, caps: &[C]) -> C {
        self.cut.iter().fold(C::ZERO, |acc, &e| acc + caps[e])
    }
}

pub(crate) fn check_terminals(
    vertex_count: usize,
    sources: &[usize],
    sinks: &[usize],
) -> Result<Vec<u8>, FlowError> {
    if sources.is_empty() {
        return Err(FlowError::EmptySource);
    }
    if sinks.is_empty() {
        return Err(FlowError::EmptySink);
    }
    let mut role = vec![0u8; vertex_count];
    for &s in sources {
        *role.get_mut(s).ok_or(FlowError::VertexOutOfRange { vertex: s })? = 1;
    }
    for &t in sinks {
        let slot = role.get_mut(t).ok_or(FlowError::VertexOutOfRange { vertex: t })?;
        if *slot == 1 {
            return Err(FlowError::Overlap { vertex: t });
        }
        *slot = 2;
    }
    Ok(role)
}

/// Maximal flow from `sources` to `sinks`.
pub fn max_flow<G: Network, C: Capacity>(
    graph: &G,
    caps: &[C],
    sources: &[usize],
    sinks: &[usize],
) -> Result<FlowResult<C>, FlowError> {
    FlowSolver::new(graph, sources, sinks)?.solve(caps)
}

/// `τ(nA, h)`: flow from `A_1^h` to `A_2^h`.
pub fn tau<C: Capacity>(graph: &LatticeGraph, caps: &[C]) -> Result<FlowResult<C>, FlowError> {
    tau_solver(graph)?.solve(caps)
}

/// `φ(nA, h)`: flow from `B(A,h)` to `T(A,h)`.
pub fn phi<C: Capacity>(graph: &LatticeGraph, caps: &[C]) -> Result<FlowResult<C>, FlowError> {
    phi_solver(graph)?.solve(caps)
}

pub fn tau_solver<C: Capacity>(graph: &LatticeGraph) -> Result<FlowSolver<C>, FlowError> {
    cylinder_solver(graph, graph.upper_half(), graph.lower_half(), "A_1^h", "A_2^h")
}

pub fn phi_solver<C: Capacity>(graph: &LatticeGraph) -> Result<FlowSolver<C>, FlowError> {
    cylinder_solver(graph, graph.bottom(), graph.top(), "B(A,h)", "T(A,h)")
}

fn cylinder_solver<C: Capacity>(
    graph: &LatticeGraph,
    sources: Vec<usize>,
    sinks: Vec<usize>,
    source_name: &'static str,
    sink_name: &'static str,
) -> Result<FlowSolver<C>, FlowError> {
    if sources.is_empty() {
        return Err(FlowError::DegenerateCylinder {
            missing: source_name,
        });
    }
    if sinks.is_empty() {
        return Err(FlowError::DegenerateCylinder { missing: sink_name });
    }
    FlowSolver::new(graph, &sources, &sinks)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    /// `g(e) < 0` or `g(e) > t(e)`.
    Capacity { edge: usize, throughput: f64, capacity: f64 },
    /// Inflow differs from outflow at a vertex outside `F_1 ∪ F_2`.
    Conservation { vertex: usize, inflow: f64, outflow: f64 },
}

/// Checks capacity feasibility on every edge and conservation at every
/// vertex outside `F_1 ∪ F_2`.
pub fn validate_stream<G: Network, C: Capacity>(
    graph: &G,
    caps: &[C],
    sources: &[usize],
    sinks: &[usize],
    stream: &Stream<C>,
) -> Vec<Violation> {
    let edges = graph.edge_list();
    let mut violations = Vec::new();
    let mut inflow = vec![C::ZERO; graph.vertex_count()];
    let mut outflow = vec![C::ZERO; graph.vertex_count()];
    let mut scale = C::ZERO;
    for (e, &[u, v]) in edges.iter().enumerate() {
        let g = stream.throughput[e];
        if g < C::ZERO || (g > caps[e] && !g.close(caps[e], caps[e])) {
            violations.push(Violation::Capacity {
                edge: e,
                throughput: g.to_f64(),
                capacity: caps[e].to_f64(),
            });
        }
        if caps[e] > scale {
            scale = caps[e];
        }
        let (to_v, to_u) = stream.signed(e);
        outflow[u as usize] = outflow[u as usize] + to_v;
        inflow[v as usize] = inflow[v as usize] + to_v;
        outflow[v as usize] = outflow[v as usize] + to_u;
        inflow[u as usize] = inflow[u as usize] + to_u;
    }
    let mut terminal = vec![false; graph.vertex_count()];
    for &x in sources.iter().chain(sinks) {
        terminal[x] = true;
    }
    for vertex in 0..graph.vertex_count() {
        if !terminal[vertex] && !inflow[vertex].close(outflow[vertex], scale) {
            violations.push(Violation::Conservation {
                vertex,
                inflow: inflow[vertex].to_f64(),
                outflow: outflow[vertex].to_f64(),
            });
        }
    }
    violations
}

/// Amount of fluid crossing the region: net throughput entering `F_2` from
/// the rest of the graph.
pub fn flow_value<G: Network, C: Capacity>(graph: &G, stream: &Stream<C>, sinks: &[usize]) -> C {
    let mut in_sink = vec![false; graph.vertex_count()];
    for &t in sinks {
        in_sink[t] = true;
    }
    let mut gained = C::ZERO;
    let mut lost = C::ZERO;
    for (e, &[u, v]) in graph.edge_list().iter().enumerate() {
        let (to_v, to_u) = stream.signed(e);
        match (in_sink[u as usize], in_sink[v as usize]) {
            (false, true) => {
                gained = gained + to_v;
                lost = lost + to_u;
            }
            (true, false) => {
                gained = gained + to_u;
                lost = lost + to_v;
            }
            _ => {}
        }
    }
    gained - lost
}

#[cfg(test)]
mod tests;
