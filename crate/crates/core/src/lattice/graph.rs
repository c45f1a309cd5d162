use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{CylinderSpec, Face, GeometryError};

/// Vertex in `A_1^h`: positive side of `hyp(nA)` with a neighbour outside.
pub const UPPER_HALF: u8 = 1;
/// Vertex in `A_2^h`.
pub const LOWER_HALF: u8 = 2;
/// Vertex in `T(A,h)`.
pub const TOP: u8 = 4;
/// Vertex in `B(A,h)`.
pub const BOTTOM: u8 = 8;

/// Integer points of a cylinder and the nearest-neighbour edges between them.
///
/// Vertices are stored in lexicographic order of their coordinates, edges in
/// lexicographic order of their endpoint pairs. Immutable once built.
#[derive(Debug, Clone)]
pub struct LatticeGraph {
    dim: usize,
    coords: Vec<i64>,
    edges: Vec<[u32; 2]>,
    adjacency_offsets: Vec<u32>,
    adjacency: Vec<(u32, u32)>,
    tags: Vec<u8>,
    grid_lo: Vec<i64>,
    grid_dims: Vec<usize>,
    grid: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl LatticeGraph {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.tags.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex(&self, index: usize) -> &[i64] {
        &self.coords[index * self.dim..(index + 1) * self.dim]
    }

    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    /// `(neighbour, edge)` pairs incident to `vertex`.
    pub fn neighbours(&self, vertex: usize) -> &[(u32, u32)] {
        let start = self.adjacency_offsets[vertex] as usize;
        let end = self.adjacency_offsets[vertex + 1] as usize;
        &self.adjacency[start..end]
    }

    pub fn index_of(&self, p: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for ((&x, &lo), &extent) in p.iter().zip(&self.grid_lo).zip(&self.grid_dims) {
            let offset = x - lo;
            if offset < 0 || offset as usize >= extent {
                return None;
            }
            idx = idx * extent + offset as usize;
        }
        match self.grid[idx] {
            NONE => None,
            v => Some(v as usize),
        }
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.neighbours(u)
            .iter()
            .find(|(w, _)| *w as usize == v)
            .map(|&(_, e)| e as usize)
    }

    pub fn tags(&self, vertex: usize) -> u8 {
        self.tags[vertex]
    }

    pub fn vertices_tagged(&self, tag: u8) -> Vec<usize> {
        (0..self.vertex_count())
            .filter(|&v| self.tags[v] & tag != 0)
            .collect()
    }

    /// `A_1^h`
    pub fn upper_half(&self) -> Vec<usize> {
        self.vertices_tagged(UPPER_HALF)
    }

    /// `A_2^h`
    pub fn lower_half(&self) -> Vec<usize> {
        self.vertices_tagged(LOWER_HALF)
    }

    /// `T(A,h)`
    pub fn top(&self) -> Vec<usize> {
        self.vertices_tagged(TOP)
    }

    /// `B(A,h)`
    pub fn bottom(&self) -> Vec<usize> {
        self.vertices_tagged(BOTTOM)
    }

    /// Integer points `p ± e_k`.
    fn lattice_neighbours(p: &[i64]) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..p.len()).flat_map(move |k| {
            [-1i64, 1].into_iter().map(move |step| {
                let mut q = p.to_vec();
                q[k] += step;
                q
            })
        })
    }
}

/// Integer points and edges of `cyl(nA, h)`, with all four boundary sets
/// tagged.
pub fn build_cylinder(spec: &CylinderSpec) -> Result<LatticeGraph, GeometryError> {
    let dim = spec.dim();
    let (lo, hi) = spec.bounding_box();
    let grid_dims: Vec<usize> = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect();
    let cells: usize = grid_dims.iter().product();
    let mut grid = alloc::vec![NONE; cells];
    let mut coords = Vec::new();
    let mut p = lo.clone();
    let mut count = 0u32;
    for cell in grid.iter_mut() {
        if spec.contains(&p) {
            *cell = count;
            coords.extend_from_slice(&p);
            count += 1;
        }
        // odometer, last coordinate fastest
        for k in (0..dim).rev() {
            p[k] += 1;
            if p[k] <= hi[k] {
                break;
            }
            p[k] = lo[k];
        }
    }
    if count == 0 {
        return Err(GeometryError::EmptyGraph);
    }

    let mut graph = LatticeGraph {
        dim,
        coords,
        edges: Vec::new(),
        adjacency_offsets: Vec::new(),
        adjacency: Vec::new(),
        tags: alloc::vec![0; count as usize],
        grid_lo: lo,
        grid_dims,
        grid,
    };

    let mut edges = Vec::new();
    for u in 0..graph.vertex_count() {
        for k in (0..dim).rev() {
            let mut q = graph.vertex(u).to_vec();
            q[k] += 1;
            if let Some(v) = graph.index_of(&q) {
                debug_assert!(spec.edge_in_region(graph.vertex(u), &q));
                edges.push([u as u32, v as u32]);
            }
        }
    }

    let mut degree = alloc::vec![0u32; graph.vertex_count() + 1];
    for &[u, v] in &edges {
        degree[u as usize + 1] += 1;
        degree[v as usize + 1] += 1;
    }
    for i in 1..degree.len() {
        degree[i] += degree[i - 1];
    }
    let mut fill = degree.clone();
    let mut adjacency = alloc::vec![(0u32, 0u32); edges.len() * 2];
    for (e, &[u, v]) in edges.iter().enumerate() {
        adjacency[fill[u as usize] as usize] = (v, e as u32);
        fill[u as usize] += 1;
        adjacency[fill[v as usize] as usize] = (u, e as u32);
        fill[v as usize] += 1;
    }
    graph.edges = edges;
    graph.adjacency_offsets = degree;
    graph.adjacency = adjacency;

    let (upper, lower) = boundary_half_sets(&graph, spec);
    let (top, bottom) = top_bottom_sets(&graph, spec);
    for (set, tag) in [(upper, UPPER_HALF), (lower, LOWER_HALF), (top, TOP), (bottom, BOTTOM)] {
        for v in set {
            graph.tags[v] |= tag;
        }
    }
    Ok(graph)
}

/// `(A_1^h, A_2^h)`: vertices strictly on the `+v` (resp. `−v`) side of
/// `hyp(nA)` having a lattice neighbour outside the cylinder.
pub fn boundary_half_sets(graph: &LatticeGraph, spec: &CylinderSpec) -> (Vec<usize>, Vec<usize>) {
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for v in 0..graph.vertex_count() {
        let p = graph.vertex(v);
        let side = spec.side(p);
        if side == Ordering::Equal {
            continue;
        }
        if LatticeGraph::lattice_neighbours(p).any(|q| !spec.contains(&q)) {
            match side {
                Ordering::Greater => upper.push(v),
                _ => lower.push(v),
            }
        }
    }
    (upper, lower)
}

/// `(T(A,h), B(A,h))`: vertices with an outside neighbour whose connecting
/// segment meets the closed face `nA + h·v` (resp. `nA − h·v`).
pub fn top_bottom_sets(graph: &LatticeGraph, spec: &CylinderSpec) -> (Vec<usize>, Vec<usize>) {
    let mut top = Vec::new();
    let mut bottom = Vec::new();
    for v in 0..graph.vertex_count() {
        let p = graph.vertex(v);
        let mut in_top = false;
        let mut in_bottom = false;
        for q in LatticeGraph::lattice_neighbours(p) {
            if spec.contains(&q) {
                continue;
            }
            in_top = in_top || spec.segment_meets_face(p, &q, Face::Top);
            in_bottom = in_bottom || spec.segment_meets_face(p, &q, Face::Bottom);
        }
        if in_top {
            top.push(v);
        }
        if in_bottom {
            bottom.push(v);
        }
    }
    (top, bottom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Rational;
    use crate::lattice::{Direction, Hyperrectangle};
    use alloc::vec;

    fn r(n: i128) -> Rational {
        Rational::from_integer(n)
    }

    fn straight(lengths: &[i128], h: i128) -> CylinderSpec {
        let lengths: Vec<Rational> = lengths.iter().map(|&l| r(l)).collect();
        let d = lengths.len() + 1;
        CylinderSpec::new(
            Hyperrectangle::straight(&lengths).unwrap(),
            Direction::axis(d, d - 1),
            1,
            r(h),
        )
        .unwrap()
    }

    fn coords(graph: &LatticeGraph, set: &[usize]) -> Vec<Vec<i64>> {
        set.iter().map(|&v| graph.vertex(v).to_vec()).collect()
    }

    #[test]
    fn three_by_three_patch() {
        let spec = straight(&[2], 1);
        let g = build_cylinder(&spec).unwrap();
        assert_eq!(g.vertex_count(), 9);
        assert_eq!(g.edge_count(), 12);
        let horizontal = g.edges().iter().filter(|[u, v]| g.vertex(*u as usize)[1] == g.vertex(*v as usize)[1]).count();
        assert_eq!(horizontal, 6);
        assert_eq!(g.vertex(0), &[0, -1]);
        assert_eq!(g.vertex(8), &[2, 1]);

        let (upper, lower) = boundary_half_sets(&g, &spec);
        assert_eq!(coords(&g, &upper), vec![vec![0, 1], vec![1, 1], vec![2, 1]]);
        assert_eq!(coords(&g, &lower), vec![vec![0, -1], vec![1, -1], vec![2, -1]]);
        let (top, bottom) = top_bottom_sets(&g, &spec);
        assert_eq!(coords(&g, &top), vec![vec![0, 1], vec![1, 1], vec![2, 1]]);
        assert_eq!(coords(&g, &bottom), vec![vec![0, -1], vec![1, -1], vec![2, -1]]);
        assert_eq!(g.upper_half(), upper);
        assert_eq!(g.top(), top);
    }

    #[test]
    fn degenerate_height() {
        let spec = straight(&[1], 0);
        let g = build_cylinder(&spec).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert!(g.upper_half().is_empty());
        assert!(g.lower_half().is_empty());
        assert_eq!(g.top(), vec![0, 1]);
        assert_eq!(g.bottom(), vec![0, 1]);
    }

    #[test]
    fn three_dimensional_count() {
        let g = build_cylinder(&straight(&[2, 2], 2)).unwrap();
        assert_eq!(g.vertex_count(), 45);
    }

    #[test]
    fn edges_are_lexicographic() {
        let g = build_cylinder(&straight(&[3, 2], 1)).unwrap();
        let keys: Vec<(Vec<i64>, Vec<i64>)> = g
            .edges()
            .iter()
            .map(|[u, v]| (g.vertex(*u as usize).to_vec(), g.vertex(*v as usize).to_vec()))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        for [u, v] in g.edges() {
            assert_eq!(g.edge_between(*u as usize, *v as usize), g.edge_between(*v as usize, *u as usize));
        }
    }

    #[test]
    fn empty_cylinder_is_an_error() {
        // a tilted sliver between lattice points
        let normal = Direction::new(vec![1, 1]).unwrap();
        let base = Hyperrectangle::new(
            vec![Rational::new(1, 2), Rational::new(0, 1)],
            vec![vec![r(1), r(-1)]],
            vec![Rational::new(1, 10)],
            &normal,
        )
        .unwrap();
        let spec = CylinderSpec::new(base, normal, 1, Rational::new(1, 10)).unwrap();
        assert_eq!(build_cylinder(&spec).unwrap_err(), GeometryError::EmptyGraph);
    }
    fn shape(dim: usize, choice: usize) -> (Direction, Vec<Vec<Rational>>) {
        let v = |c: &[i128]| c.iter().map(|&x| r(x)).collect::<Vec<_>>();
        match (dim, choice % 3) {
            (2, 0) => (Direction::axis(2, 1), vec![v(&[1, 0])]),
            (2, 1) => (Direction::new(vec![1, 1]).unwrap(), vec![v(&[1, -1])]),
            (2, _) => (Direction::new(vec![1, 2]).unwrap(), vec![v(&[2, -1])]),
            (_, 0) => (Direction::axis(3, 2), vec![v(&[1, 0, 0]), v(&[0, 1, 0])]),
            (_, 1) => (Direction::new(vec![1, 1, 1]).unwrap(), vec![v(&[1, -1, 0]), v(&[1, 1, -2])]),
            _ => (Direction::new(vec![1, 0, 1]).unwrap(), vec![v(&[1, 0, -1]), v(&[0, 1, 0])]),
        }
    }

    fn spec_from(dim: usize, choice: usize, anchor: &[i128], lengths: &[i128], scale: u32, h2: i128, stretch: i128) -> CylinderSpec {
        let (normal, frame) = shape(dim, choice);
        let frame = frame.into_iter().map(|f| f.into_iter().map(|x| x * r(stretch)).collect()).collect();
        let base = Hyperrectangle::new(
            anchor[..dim].iter().map(|&a| Rational::new(a, 2)).collect(),
            frame,
            lengths[..dim - 1].iter().map(|&l| Rational::new(l, 2)).collect(),
            &normal,
        )
        .unwrap();
        CylinderSpec::new(base, normal, scale, Rational::new(h2, 2)).unwrap()
    }

    fn tagged(g: &LatticeGraph, set: &[usize], offset: &[i64]) -> Vec<Vec<i64>> {
        let mut out: Vec<Vec<i64>> = set
            .iter()
            .map(|&v| g.vertex(v).iter().zip(offset).map(|(x, o)| x + o).collect())
            .collect();
        out.sort();
        out
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        #[test]
        fn top_and_bottom_lie_in_the_halves(
            dim in 2usize..4, choice in 0usize..3, anchor in proptest::array::uniform3(-3i128..4),
            lengths in proptest::array::uniform2(1i128..6), scale in 1u32..5, h2 in 2i128..9,
        ) {
            let spec = spec_from(dim, choice, &anchor, &lengths, scale, h2, 1);
            let Ok(g) = build_cylinder(&spec) else { return Ok(()); };
            let upper: alloc::collections::BTreeSet<usize> = g.upper_half().into_iter().collect();
            let lower: alloc::collections::BTreeSet<usize> = g.lower_half().into_iter().collect();
            proptest::prop_assert!(g.top().iter().all(|v| upper.contains(v)));
            proptest::prop_assert!(g.bottom().iter().all(|v| lower.contains(v)));
            for v in 0..g.vertex_count() {
                proptest::prop_assert!(spec.contains(g.vertex(v)));
            }
            for &[a, b] in g.edges() {
                let (a, b) = (g.vertex(a as usize), g.vertex(b as usize));
                proptest::prop_assert_eq!(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<i64>(), 1);
            }
        }

        #[test]
        fn negated_normal_swaps_tags(
            dim in 2usize..4, choice in 0usize..3, anchor in proptest::array::uniform3(-3i128..4),
            lengths in proptest::array::uniform2(1i128..6), scale in 1u32..5, h2 in 0i128..9,
        ) {
            let spec = spec_from(dim, choice, &anchor, &lengths, scale, h2, 1);
            let Ok(g) = build_cylinder(&spec) else { return Ok(()); };
            let f = build_cylinder(&spec.with_normal_negated()).unwrap();
            proptest::prop_assert_eq!(g.edges(), f.edges());
            proptest::prop_assert_eq!(g.upper_half(), f.lower_half());
            proptest::prop_assert_eq!(g.lower_half(), f.upper_half());
            proptest::prop_assert_eq!(g.top(), f.bottom());
            proptest::prop_assert_eq!(g.bottom(), f.top());
        }

        #[test]
        fn integer_translation_moves_everything(
            dim in 2usize..4, choice in 0usize..3, anchor in proptest::array::uniform3(-3i128..4),
            lengths in proptest::array::uniform2(1i128..6), scale in 1u32..5, h2 in 0i128..9,
            offset in proptest::array::uniform3(-5i64..6),
        ) {
            let spec = spec_from(dim, choice, &anchor, &lengths, scale, h2, 1);
            let Ok(g) = build_cylinder(&spec) else { return Ok(()); };
            let offset = &offset[..dim];
            let moved = build_cylinder(&spec.translated(offset)).unwrap();
            let zero = vec![0i64; dim];
            let all: Vec<usize> = (0..g.vertex_count()).collect();
            let all_moved: Vec<usize> = (0..moved.vertex_count()).collect();
            proptest::prop_assert_eq!(tagged(&g, &all, offset), tagged(&moved, &all_moved, &zero));
            proptest::prop_assert_eq!(g.edge_count(), moved.edge_count());
            proptest::prop_assert_eq!(tagged(&g, &g.upper_half(), offset), tagged(&moved, &moved.upper_half(), &zero));
            proptest::prop_assert_eq!(tagged(&g, &g.top(), offset), tagged(&moved, &moved.top(), &zero));
            proptest::prop_assert_eq!(tagged(&g, &g.bottom(), offset), tagged(&moved, &moved.bottom(), &zero));
        }

        #[test]
        fn rescaled_frame_gives_identical_membership(
            dim in 2usize..4, choice in 0usize..3, anchor in proptest::array::uniform3(-3i128..4),
            lengths in proptest::array::uniform2(1i128..6), scale in 1u32..5, h2 in 0i128..9, k in 2i128..7,
        ) {
            let spec = spec_from(dim, choice, &anchor, &lengths, scale, h2, 1);
            let Ok(g) = build_cylinder(&spec) else { return Ok(()); };
            let f = build_cylinder(&spec_from(dim, choice, &anchor, &lengths, scale, h2, k)).unwrap();
            proptest::prop_assert_eq!(g.edges(), f.edges());
            proptest::prop_assert_eq!(g.upper_half(), f.upper_half());
            proptest::prop_assert_eq!(g.top(), f.top());
        }
    }

    #[test]
    fn sub_unit_height_can_leave_hyperplane_points_in_the_bottom() {
        // vertex (2, 0) lies on hyp(nA) yet crosses the bottom face
        let spec = spec_from(2, 2, &[2, 0, 0], &[2, 0], 2, 1, 1);
        let g = build_cylinder(&spec).unwrap();
        let bottom = coords(&g, &g.bottom());
        assert!(bottom.contains(&vec![2, 0]));
        assert!(!coords(&g, &g.lower_half()).contains(&vec![2, 0]));
    }
}
