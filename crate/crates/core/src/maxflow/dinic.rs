use alloc::vec;
use alloc::vec::Vec;

use super::{check_terminals, Capacity, FlowError, FlowResult, Network, Orientation, Stream};

const UNSEEN: u32 = u32::MAX;

/// Blocking-flow solver bound to one graph and one pair of terminal sets.
///
/// Building the arc structure is done once; [`FlowSolver::solve`] can then be
/// called for any number of capacity vectors.
#[derive(Debug, Clone)]
pub struct FlowSolver<C> {
    vertices: usize,
    edge_count: usize,
    /// Arc `a` goes to `head[a]`; arcs `a` and `a ^ 1` are mutual reverses.
    head: Vec<u32>,
    residual: Vec<C>,
    offsets: Vec<u32>,
    arcs: Vec<u32>,
    level: Vec<u32>,
    cursor: Vec<u32>,
    queue: Vec<u32>,
}

impl<C: Capacity> FlowSolver<C> {
    pub fn new<G: Network>(graph: &G, sources: &[usize], sinks: &[usize]) -> Result<Self, FlowError> {
        let n = graph.vertex_count();
        check_terminals(n, sources, sinks)?;
        let edges = graph.edge_list();
        let source = n as u32;
        let sink = n as u32 + 1;
        let total_arcs = 2 * (edges.len() + sources.len() + sinks.len());
        let mut head = Vec::with_capacity(total_arcs);
        let mut tail = Vec::with_capacity(total_arcs);
        let mut add = |u: u32, v: u32| {
            head.push(v);
            tail.push(u);
            head.push(u);
            tail.push(v);
        };
        for &[u, v] in edges {
            add(u, v);
        }
        for &s in sources {
            add(source, s as u32);
        }
        for &t in sinks {
            add(t as u32, sink);
        }
        let nodes = n + 2;
        let mut offsets = vec![0u32; nodes + 1];
        for &u in &tail {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..nodes {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut arcs = vec![0u32; tail.len()];
        for (a, &u) in tail.iter().enumerate() {
            arcs[fill[u as usize] as usize] = a as u32;
            fill[u as usize] += 1;
        }
        Ok(Self {
            vertices: n,
            edge_count: edges.len(),
            residual: vec![C::ZERO; head.len()],
            head,
            offsets,
            arcs,
            level: vec![UNSEEN; nodes],
            cursor: vec![0; nodes],
            queue: Vec::with_capacity(nodes),
        })
    }

    fn reset(&mut self, caps: &[C]) -> Result<(), FlowError> {
        if caps.len() != self.edge_count {
            return Err(FlowError::CapacityCount {
                expected: self.edge_count,
                found: caps.len(),
            });
        }
        for (e, &c) in caps.iter().enumerate() {
            if c < C::ZERO {
                return Err(FlowError::NegativeCapacity { edge: e });
            }
            self.residual[2 * e] = c;
            self.residual[2 * e + 1] = c;
        }
        for a in (2 * self.edge_count..self.head.len()).step_by(2) {
            self.residual[a] = C::unbounded();
            self.residual[a + 1] = C::ZERO;
        }
        Ok(())
    }

    fn build_levels(&mut self) -> bool {
        let source = self.vertices;
        self.level.fill(UNSEEN);
        self.queue.clear();
        self.level[source] = 0;
        self.queue.push(source as u32);
        let mut front = 0;
        while front < self.queue.len() {
            let u = self.queue[front] as usize;
            front += 1;
            for i in self.offsets[u]..self.offsets[u + 1] {
                let a = self.arcs[i as usize] as usize;
                let v = self.head[a] as usize;
                if self.level[v] == UNSEEN && self.residual[a].admits() {
                    self.level[v] = self.level[u] + 1;
                    self.queue.push(v as u32);
                }
            }
        }
        self.level[source + 1] != UNSEEN
    }

    /// One blocking flow on the current level graph.
    fn blocking_flow(&mut self) -> C {
        let source = self.vertices;
        let sink = source + 1;
        self.cursor.copy_from_slice(&self.offsets[..self.vertices + 2]);
        let mut pushed = C::ZERO;
        let mut path: Vec<u32> = Vec::new();
        let mut u = source;
        loop {
            if u == sink {
                let mut bottleneck = C::unbounded();
                for &a in &path {
                    if self.residual[a as usize] < bottleneck {
                        bottleneck = self.residual[a as usize];
                    }
                }
                let mut retreat = path.len();
                for (i, &a) in path.iter().enumerate() {
                    let a = a as usize;
                    self.residual[a] = self.residual[a] - bottleneck;
                    self.residual[a ^ 1] = self.residual[a ^ 1] + bottleneck;
                    if retreat == path.len() && !self.residual[a].admits() {
                        retreat = i;
                    }
                }
                pushed = pushed + bottleneck;
                path.truncate(retreat);
                u = match path.last() {
                    Some(&a) => self.head[a as usize] as usize,
                    None => source,
                };
                continue;
            }
            let mut advanced = false;
            while self.cursor[u] < self.offsets[u + 1] {
                let a = self.arcs[self.cursor[u] as usize] as usize;
                let v = self.head[a] as usize;
                if self.residual[a].admits() && self.level[v] == self.level[u] + 1 {
                    path.push(a as u32);
                    u = v;
                    advanced = true;
                    break;
                }
                self.cursor[u] += 1;
            }
            if advanced {
                continue;
            }
            if u == source {
                return pushed;
            }
            // dead end: retire the vertex and step back
            self.level[u] = UNSEEN;
            let a = path.pop().expect("non-source vertex has an incoming path arc") as usize;
            u = self.head[a ^ 1] as usize;
            self.cursor[u] += 1;
        }
    }

    /// Maximal flow for the capacities `caps`, indexed like the graph's edges.
    pub fn solve(&mut self, caps: &[C]) -> Result<FlowResult<C>, FlowError> {
        self.reset(caps)?;
        let mut value = C::ZERO;
        while self.build_levels() {
            value = value + self.blocking_flow();
        }
        // after the last failed search, `level` marks the source side
        let source_side: Vec<bool> = self.level[..self.vertices]
            .iter()
            .map(|&l| l != UNSEEN)
            .collect();
        let mut stream = Stream::zero(self.edge_count);
        let mut cut = Vec::new();
        for (e, &c) in caps.iter().enumerate() {
            // net flow u→v is c minus the forward residual
            let forward = c - self.residual[2 * e];
            let backward = c - self.residual[2 * e + 1];
            if forward.admits() {
                stream.set(e, clamp(forward, c), Orientation::Forward);
            } else if backward.admits() {
                stream.set(e, clamp(backward, c), Orientation::Backward);
            }
            let u = self.head[2 * e + 1] as usize;
            let v = self.head[2 * e] as usize;
            if source_side[u] != source_side[v] {
                cut.push(e);
            }
        }
        Ok(FlowResult {
            value,
            stream,
            cut,
            source_side,
        })
    }

    /// Value only, skipping stream and cut extraction.
    pub fn value(&mut self, caps: &[C]) -> Result<C, FlowError> {
        self.reset(caps)?;
        let mut value = C::ZERO;
        while self.build_levels() {
            value = value + self.blocking_flow();
        }
        Ok(value)
    }
}

fn clamp<C: Capacity>(x: C, cap: C) -> C {
    if x > cap {
        cap
    } else {
        x
    }
}
