use alloc::vec;
use alloc::vec::Vec;

use super::DeviationError;
use crate::exact::{to_f64, Rational};
use crate::lattice::{build_cylinder, CylinderFamily, CylinderSpec, LatticeGraph};
use crate::maxflow::{tau_solver, FlowSolver};

/// Closed conditions are evaluated in floating point with this slack on the
/// inclusive side.
const SLACK: f64 = 1e-9;

/// How many slabs `M(n, N)` to use.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SlabRule {
    /// `⌊h(N) / (h(n) + ζ/2)⌋`
    Max,
    /// `min(⌊κN⌋, max rule)`
    BoundedRegime { kappa: f64 },
    /// `min(⌊√N⌋, max rule)`
    Slow,
}

impl SlabRule {
    pub fn slab_count(&self, big: u32, big_height: f64, small_height: f64, zeta: f64) -> u32 {
        let max = libm::floor(big_height / (small_height + zeta / 2.0) + SLACK) as u32;
        match *self {
            SlabRule::Max => max,
            SlabRule::BoundedRegime { kappa } => max.min(libm::floor(kappa * big as f64) as u32),
            SlabRule::Slow => max.min(libm::floor(libm::sqrt(big as f64)) as u32),
        }
    }
}

/// One small cylinder `B_{i,j}` placed inside its cell `S'_{i,j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxPlacement {
    /// Multi-index of the cell within the slab.
    pub cell: Vec<u32>,
    /// Translation placing `cyl(nA, h(n))` at `D_{i,j}`.
    pub real_translation: Vec<f64>,
    /// Integer translation placing it at `B_{i,j}`.
    pub translation: Vec<i64>,
    /// `u_{i,j} = translation − real_translation`.
    pub correction: Vec<f64>,
    /// Small-cylinder edge index → big-cylinder edge index.
    pub edge_map: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slab {
    pub index: u32,
    /// `T_i`, along `v`.
    pub t_range: (f64, f64),
    pub center: f64,
    pub boxes: Vec<BoxPlacement>,
    /// Big-cylinder edges of `E_{0,i}`, ascending.
    pub glue: Vec<u32>,
}

/// The slab decomposition of `cyl(NA, h(N))` into translates of
/// `cyl(nA, h(n))`, with both glue edge sets.
#[derive(Debug, Clone)]
pub struct DecompositionPlan {
    pub big_scale: u32,
    pub small_scale: u32,
    pub zeta: f64,
    pub rule: SlabRule,
    pub big_spec: CylinderSpec,
    pub small_spec: CylinderSpec,
    pub big_graph: LatticeGraph,
    pub small_graph: LatticeGraph,
    /// Cells per lateral axis; `m` is their product.
    pub cells_per_axis: Vec<u32>,
    /// `⌊H^{d−1}(NA) / H^{d−1}(nA)⌋`
    pub capacity_budget: u64,
    pub slabs: Vec<Slab>,
    /// Big-cylinder edges of `E_1`, ascending.
    pub glue_boundary: Vec<u32>,
}

impl DecompositionPlan {
    /// `M(n, N)`
    pub fn slab_count(&self) -> usize {
        self.slabs.len()
    }

    /// `m`
    pub fn boxes_per_slab(&self) -> usize {
        self.slabs.first().map_or(0, |s| s.boxes.len())
    }

    /// `l_0 = max_i card(E_{0,i})`
    pub fn l0(&self) -> usize {
        self.slabs.iter().map(|s| s.glue.len()).max().unwrap_or(0)
    }

    /// `l_1 = card(E_1)`
    pub fn l1(&self) -> usize {
        self.glue_boundary.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.big_scale == self.small_scale
    }
}

/// Whether the closed segment `[a, b]` meets the open box `lo < x < hi`.
fn segment_meets_open_box(a: &[f64], b: &[f64], lo: &[f64], hi: &[f64]) -> bool {
    let mut enter = f64::NEG_INFINITY;
    let mut leave = f64::INFINITY;
    for k in 0..a.len() {
        let step = b[k] - a[k];
        if step == 0.0 {
            if !(lo[k] < a[k] && a[k] < hi[k]) {
                return false;
            }
            continue;
        }
        let (mut l0, mut l1) = ((lo[k] - a[k]) / step, (hi[k] - a[k]) / step);
        if l0 > l1 {
            core::mem::swap(&mut l0, &mut l1);
        }
        enter = enter.max(l0);
        leave = leave.min(l1);
    }
    enter < leave && enter < 1.0 && leave > 0.0
}

fn frame_point(spec: &CylinderSpec, p: &[i64]) -> Vec<f64> {
    let p: Vec<f64> = p.iter().map(|&x| x as f64).collect();
    let (mut s, t) = spec.frame_coordinates(&p);
    s.push(t);
    s
}

/// Builds the decomposition of `cyl(NA, h(N))` at scales `N = big`, `n = small`.
pub fn slab_decomposition(
    family: &CylinderFamily,
    big: u32,
    small: u32,
    zeta: Rational,
    rule: SlabRule,
) -> Result<DecompositionPlan, DeviationError> {
    let d = family.dim();
    let zeta_f = to_f64(&zeta);
    if zeta_f < 2.0 * d as f64 {
        return Err(DeviationError::ZetaTooSmall {
            zeta: zeta_f,
            minimum: 2.0 * d as f64,
        });
    }
    if small == 0 || big < small {
        return Err(DeviationError::ScaleOrder { small, big });
    }
    let big_spec = family.at(big)?;
    let small_spec = family.at(small)?;
    let big_graph = build_cylinder(&big_spec)?;
    let small_graph = build_cylinder(&small_spec)?;
    let budget_ratio = big_spec.area() / small_spec.area();
    let capacity_budget = budget_ratio.floor().to_integer() as u64;
    let h_big = to_f64(big_spec.height());
    let h_small = to_f64(small_spec.height());

    if big == small {
        let identity = BoxPlacement {
            cell: vec![0; d - 1],
            real_translation: vec![0.0; d],
            translation: vec![0; d],
            correction: vec![0.0; d],
            edge_map: (0..small_graph.edge_count() as u32).collect(),
        };
        return Ok(DecompositionPlan {
            big_scale: big,
            small_scale: small,
            zeta: zeta_f,
            rule,
            cells_per_axis: vec![1; d - 1],
            capacity_budget,
            slabs: vec![Slab {
                index: 1,
                t_range: (-h_big, h_big),
                center: 0.0,
                boxes: vec![identity],
                glue: Vec::new(),
            }],
            glue_boundary: Vec::new(),
            big_spec,
            small_spec,
            big_graph,
            small_graph,
        });
    }

    let slab_count = rule.slab_count(big, h_big, h_small, zeta_f);
    if slab_count == 0 {
        return Err(DeviationError::Infeasible("h(N) is below h(n) + zeta/2, no slab fits"));
    }
    let small_ext: Vec<f64> = small_spec.extents().iter().map(to_f64).collect();
    let big_ext: Vec<f64> = big_spec.extents().iter().map(to_f64).collect();
    let cell_width: Vec<f64> = small_ext.iter().map(|e| e + zeta_f).collect();
    let cells_per_axis: Vec<u32> = big_ext
        .iter()
        .zip(&cell_width)
        .map(|(b, w)| libm::floor(b / w + SLACK) as u32)
        .collect();
    if cells_per_axis.contains(&0) {
        return Err(DeviationError::Infeasible("the base NA is narrower than one enlarged small base"));
    }

    let half_thickness = h_small + zeta_f / 2.0;
    let reach = slab_count as f64 * half_thickness;
    let small_origin: Vec<f64> = small_spec.origin().iter().map(to_f64).collect();
    let big_frames: Vec<Vec<f64>> = big_graph
        .edges()
        .iter()
        .map(|&[u, _]| frame_point(&big_spec, big_graph.vertex(u as usize)))
        .collect();
    let edge_frames: Vec<(Vec<f64>, Vec<f64>)> = big_graph
        .edges()
        .iter()
        .zip(big_frames)
        .map(|(&[_, v], a)| (a, frame_point(&big_spec, big_graph.vertex(v as usize))))
        .collect();

    // E_1: within 2ζ of ∂(NA) laterally, |t| ≤ M(h(n) + ζ/2)
    let mut inner_lo: Vec<f64> = vec![2.0 * zeta_f + SLACK; d - 1];
    let mut inner_hi: Vec<f64> = big_ext.iter().map(|e| e - 2.0 * zeta_f - SLACK).collect();
    inner_lo.push(f64::NEG_INFINITY);
    inner_hi.push(f64::INFINITY);
    let glue_boundary: Vec<u32> = edge_frames
        .iter()
        .enumerate()
        .filter(|(_, (a, b))| {
            a[d - 1].abs() <= reach + SLACK
                && b[d - 1].abs() <= reach + SLACK
                && !segment_meets_open_box(a, b, &inner_lo, &inner_hi)
        })
        .map(|(e, _)| e as u32)
        .collect();

    let cells: Vec<Vec<u32>> = {
        let mut all = vec![Vec::new()];
        for &count in &cells_per_axis {
            all = all
                .into_iter()
                .flat_map(|prefix: Vec<u32>| {
                    (0..count).map(move |j| {
                        let mut next = prefix.clone();
                        next.push(j);
                        next
                    })
                })
                .collect();
        }
        all
    };

    let mut slabs = Vec::with_capacity(slab_count as usize);
    for i in 1..=slab_count {
        let t_lo = -reach + (i - 1) as f64 * 2.0 * half_thickness;
        let center = t_lo + half_thickness;
        let mut boxes = Vec::with_capacity(cells.len());
        let mut cores = Vec::with_capacity(cells.len());
        for cell in &cells {
            let corner: Vec<f64> = cell.iter().zip(&cell_width).map(|(&j, w)| j as f64 * w).collect();
            let lateral: Vec<f64> = corner.iter().map(|o| o + zeta_f / 2.0).collect();
            let placed = big_spec.point_from_frame(&lateral, center);
            let real_translation: Vec<f64> =
                placed.iter().zip(&small_origin).map(|(p, o)| p - o).collect();
            let translation: Vec<i64> = real_translation.iter().map(|x| libm::round(*x) as i64).collect();
            let correction = translation
                .iter()
                .zip(&real_translation)
                .map(|(&z, x)| z as f64 - x)
                .collect();
            let edge_map = map_box_edges(&big_graph, &small_graph, &translation)?;
            boxes.push(BoxPlacement {
                cell: cell.clone(),
                real_translation,
                translation,
                correction,
                edge_map,
            });
            // open core: points of S'_{i,j} farther than 3ζ from its boundary
            let mut lo: Vec<f64> = corner.iter().map(|o| o + 3.0 * zeta_f + SLACK).collect();
            let mut hi: Vec<f64> = corner
                .iter()
                .zip(&cell_width)
                .map(|(o, w)| o + w - 3.0 * zeta_f - SLACK)
                .collect();
            lo.push(center - half_thickness + 3.0 * zeta_f + SLACK);
            hi.push(center + half_thickness - 3.0 * zeta_f - SLACK);
            if lo.iter().zip(&hi).all(|(l, h)| l < h) {
                cores.push((lo, hi));
            }
        }
        let band = 3.0 * zeta_f + SLACK;
        let glue = edge_frames
            .iter()
            .enumerate()
            .filter(|(_, (a, b))| {
                (a[d - 1] - center).abs() <= band
                    && (b[d - 1] - center).abs() <= band
                    && !cores.iter().any(|(lo, hi)| segment_meets_open_box(a, b, lo, hi))
            })
            .map(|(e, _)| e as u32)
            .collect();
        slabs.push(Slab {
            index: i,
            t_range: (t_lo, t_lo + 2.0 * half_thickness),
            center,
            boxes,
            glue,
        });
    }

    Ok(DecompositionPlan {
        big_scale: big,
        small_scale: small,
        zeta: zeta_f,
        rule,
        cells_per_axis,
        capacity_budget,
        slabs,
        glue_boundary,
        big_spec,
        small_spec,
        big_graph,
        small_graph,
    })
}

fn map_box_edges(
    big: &LatticeGraph,
    small: &LatticeGraph,
    translation: &[i64],
) -> Result<Vec<u32>, DeviationError> {
    let mut shifted = vec![0i64; translation.len()];
    let mut lookup = |v: usize| -> Result<usize, DeviationError> {
        for ((s, &x), &z) in shifted.iter_mut().zip(small.vertex(v)).zip(translation) {
            *s = x + z;
        }
        big.index_of(&shifted)
            .ok_or(DeviationError::Infeasible("a placed box leaves the big cylinder"))
    };
    let mut map = Vec::with_capacity(small.edge_count());
    for &[u, v] in small.edges() {
        let bu = lookup(u as usize)?;
        let bv = lookup(v as usize)?;
        let e = big
            .edge_between(bu, bv)
            .ok_or(DeviationError::Infeasible("a placed box edge is missing from the big cylinder"))?;
        map.push(e as u32);
    }
    Ok(map)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SlabGluing {
    pub slab: u32,
    /// `Σ_j τ_{i,j}`
    pub box_flow_sum: f64,
    /// `V(E_1 ∪ E_{0,i})`
    pub glue_capacity: f64,
    /// Right-hand side minus `τ(NA, h(N))`.
    pub slack: f64,
    /// Removing the box cuts and both glue sets disconnects the halves.
    pub separated: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GluingReport {
    pub big_tau: f64,
    pub slabs: Vec<SlabGluing>,
}

impl GluingReport {
    /// Slabs where the inequality fails beyond rounding, or the removed edge
    /// set does not separate.
    pub fn violations(&self) -> usize {
        self.slabs
            .iter()
            .filter(|s| s.slack < -1e-9 * (1.0 + self.big_tau) || !s.separated)
            .count()
    }
}

/// Evaluates `τ(NA, h(N)) ≤ Σ_j τ_{i,j} + V(E_1 ∪ E_{0,i})` for every slab
/// on one capacity sample of the big cylinder.
pub fn verify_cut_gluing(plan: &DecompositionPlan, caps: &[f64]) -> Result<GluingReport, DeviationError> {
    let big = &plan.big_graph;
    if caps.len() != big.edge_count() {
        return Err(DeviationError::Mismatch {
            expected: big.edge_count(),
            found: caps.len(),
        });
    }
    let big_tau = tau_solver::<f64>(big)?.value(caps)?;
    let mut box_solver: FlowSolver<f64> = tau_solver(&plan.small_graph)?;
    let upper = big.upper_half();
    let lower = big.lower_half();
    let mut removed = vec![false; big.edge_count()];
    let mut box_caps = vec![0.0; plan.small_graph.edge_count()];
    let mut slabs = Vec::with_capacity(plan.slabs.len());
    for slab in &plan.slabs {
        removed.fill(false);
        let mut box_flow_sum = 0.0;
        for placement in &slab.boxes {
            for (c, &e) in box_caps.iter_mut().zip(&placement.edge_map) {
                *c = caps[e as usize];
            }
            let result = box_solver.solve(&box_caps)?;
            box_flow_sum += result.value;
            for &e in &result.cut {
                removed[placement.edge_map[e] as usize] = true;
            }
        }
        let mut glue_capacity = 0.0;
        let mut in_glue = vec![false; big.edge_count()];
        for &e in plan.glue_boundary.iter().chain(&slab.glue) {
            if !in_glue[e as usize] {
                in_glue[e as usize] = true;
                glue_capacity += caps[e as usize];
            }
            removed[e as usize] = true;
        }
        let rhs = box_flow_sum + glue_capacity;
        slabs.push(SlabGluing {
            slab: slab.index,
            box_flow_sum,
            glue_capacity,
            slack: rhs - big_tau,
            separated: !connected(big, &removed, &upper, &lower),
        });
    }
    Ok(GluingReport { big_tau, slabs })
}

/// Whether some vertex of `to` is reachable from `from` avoiding `removed`.
fn connected(graph: &LatticeGraph, removed: &[bool], from: &[usize], to: &[usize]) -> bool {
    let mut target = vec![false; graph.vertex_count()];
    for &t in to {
        target[t] = true;
    }
    let mut seen = vec![false; graph.vertex_count()];
    let mut stack: Vec<usize> = from.to_vec();
    for &s in from {
        seen[s] = true;
    }
    while let Some(u) = stack.pop() {
        if target[u] {
            return true;
        }
        for &(w, e) in graph.neighbours(u) {
            if !removed[e as usize] && !seen[w as usize] {
                seen[w as usize] = true;
                stack.push(w as usize);
            }
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CardinalityReport {
    pub big_scale: u32,
    pub small_scale: u32,
    pub slab_count: usize,
    pub boxes_per_slab: usize,
    pub e0_counts: Vec<usize>,
    pub e1_count: usize,
    /// Smallest `C` with `card(E_{0,i}) ≤ C(N^{d−1}/n + N^{d−2}n)` for all `i`.
    pub c0: f64,
    /// Smallest `C` with `card(E_1) ≤ C N^{d−2} M h(n)`.
    pub c1: f64,
}

pub fn cardinality_bounds(plan: &DecompositionPlan) -> CardinalityReport {
    let d = plan.big_spec.dim() as i32;
    let big = plan.big_scale as f64;
    let small = plan.small_scale as f64;
    let h_small = to_f64(plan.small_spec.height());
    let e0_counts: Vec<usize> = plan.slabs.iter().map(|s| s.glue.len()).collect();
    let l0 = e0_counts.iter().copied().max().unwrap_or(0) as f64;
    let c0 = l0 / (libm::pow(big, (d - 1) as f64) / small + libm::pow(big, (d - 2) as f64) * small);
    let c1_scale = libm::pow(big, (d - 2) as f64) * plan.slab_count() as f64 * h_small;
    let c1 = if c1_scale > 0.0 { plan.l1() as f64 / c1_scale } else { 0.0 };
    CardinalityReport {
        big_scale: plan.big_scale,
        small_scale: plan.small_scale,
        slab_count: plan.slab_count(),
        boxes_per_slab: plan.boxes_per_slab(),
        e0_counts,
        e1_count: plan.l1(),
        c0,
        c1,
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CardinalityLadder {
    pub rows: Vec<CardinalityReport>,
    /// `(max − min) / min` of the fitted `C_0` over the ladder.
    pub c0_spread: f64,
    pub c1_spread: f64,
}

impl CardinalityLadder {
    /// Both constants vary by less than `tolerance` (relative) over the ladder.
    pub fn bounded(&self, tolerance: f64) -> bool {
        self.c0_spread < tolerance && self.c1_spread < tolerance
    }
}

fn spread(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = values.fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        (max - min) / min
    } else if max == min {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Fits `C_0` and `C_1` along a ladder of large scales at a fixed small scale.
pub fn cardinality_ladder(
    family: &CylinderFamily,
    small: u32,
    bigs: &[u32],
    zeta: Rational,
    rule: SlabRule,
) -> Result<CardinalityLadder, DeviationError> {
    let rows = bigs
        .iter()
        .map(|&big| slab_decomposition(family, big, small, zeta, rule).map(|p| cardinality_bounds(&p)))
        .collect::<Result<Vec<_>, _>>()?;
    let c0_spread = spread(rows.iter().map(|r| r.c0));
    let c1_spread = spread(rows.iter().map(|r| r.c1));
    Ok(CardinalityLadder {
        rows,
        c0_spread,
        c1_spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacities::{sample_capacities, DistributionSpec};
    use crate::lattice::HeightRule;

    fn linear(d: usize) -> CylinderFamily {
        CylinderFamily::straight(d, HeightRule::Linear(Rational::from_integer(1))).unwrap()
    }

    fn four() -> Rational {
        Rational::from_integer(4)
    }

    #[test]
    fn worked_slab_counts() {
        let plan = slab_decomposition(&linear(2), 20, 4, four(), SlabRule::Max).unwrap();
        assert_eq!(plan.slab_count(), 3);
        assert_eq!(plan.capacity_budget, 5);
        assert!(plan.boxes_per_slab() as u64 <= plan.capacity_budget);
        assert_eq!(plan.boxes_per_slab(), 2);
        // M(2h(n) + ζ) ≤ 2h(N)
        let h_small = to_f64(plan.small_spec.height());
        let h_big = to_f64(plan.big_spec.height());
        assert!(plan.slab_count() as f64 * (2.0 * h_small + plan.zeta) <= 2.0 * h_big);
        for slab in &plan.slabs {
            for b in &slab.boxes {
                assert!(b.correction.iter().all(|u| u.abs() < 1.0));
            }
        }
    }

    #[test]
    fn boxes_are_disjoint() {
        let plan = slab_decomposition(&linear(2), 24, 3, four(), SlabRule::Max).unwrap();
        let mut owner = vec![false; plan.big_graph.edge_count()];
        for slab in &plan.slabs {
            for b in &slab.boxes {
                for &e in &b.edge_map {
                    assert!(!owner[e as usize], "edge {e} shared by two boxes");
                    owner[e as usize] = true;
                }
            }
        }
    }

    #[test]
    fn degenerate_plan() {
        let plan = slab_decomposition(&linear(2), 6, 6, four(), SlabRule::Max).unwrap();
        assert_eq!((plan.slab_count(), plan.boxes_per_slab()), (1, 1));
        assert!(plan.is_degenerate());
        assert_eq!((plan.l0(), plan.l1()), (0, 0));
        let caps = sample_capacities(plan.big_graph.edge_count(), &DistributionSpec::Exponential(1.0), 5, 0).unwrap();
        let report = verify_cut_gluing(&plan, caps.values()).unwrap();
        assert_eq!(report.violations(), 0);
        assert!(report.slabs[0].slack.abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_invalid_inputs() {
        assert!(matches!(
            slab_decomposition(&linear(2), 20, 4, Rational::from_integer(3), SlabRule::Max),
            Err(DeviationError::ZetaTooSmall { .. })
        ));
        assert!(matches!(
            slab_decomposition(&linear(2), 4, 8, four(), SlabRule::Max),
            Err(DeviationError::ScaleOrder { .. })
        ));
        assert!(matches!(
            slab_decomposition(&linear(2), 9, 8, four(), SlabRule::Max),
            Err(DeviationError::Infeasible(_))
        ));
        let constant = CylinderFamily::straight(2, HeightRule::Constant(Rational::from_integer(3))).unwrap();
        assert!(matches!(
            slab_decomposition(&constant, 40, 4, four(), SlabRule::Max),
            Err(DeviationError::Infeasible(_))
        ));
    }

    #[test]
    fn slab_rules() {
        assert_eq!(SlabRule::Max.slab_count(64, 64.0, 4.0, 4.0), 10);
        assert_eq!(SlabRule::Slow.slab_count(64, 64.0, 4.0, 4.0), 8);
        assert_eq!(SlabRule::Slow.slab_count(400, 400.0, 4.0, 4.0), 20);
        assert_eq!(SlabRule::BoundedRegime { kappa: 0.05 }.slab_count(64, 64.0, 4.0, 4.0), 3);
    }

    #[test]
    fn zero_and_constant_capacities() {
        let plan = slab_decomposition(&linear(2), 16, 4, four(), SlabRule::Max).unwrap();
        let zero = vec![0.0; plan.big_graph.edge_count()];
        let report = verify_cut_gluing(&plan, &zero).unwrap();
        assert_eq!(report.big_tau, 0.0);
        assert!(report.slabs.iter().all(|s| s.slack == 0.0 && s.separated));
        let ones = vec![1.0; plan.big_graph.edge_count()];
        let report = verify_cut_gluing(&plan, &ones).unwrap();
        assert_eq!(report.big_tau, 17.0);
        assert_eq!(report.violations(), 0);
        assert!(report.slabs.iter().all(|s| s.slack >= 0.0));
        assert!(verify_cut_gluing(&plan, &ones[1..]).is_err());
    }

    #[test]
    fn gluing_in_three_dimensions() {
        let plan = slab_decomposition(&linear(3), 14, 2, Rational::from_integer(6), SlabRule::Max).unwrap();
        assert!(plan.boxes_per_slab() >= 1);
        let caps = sample_capacities(plan.big_graph.edge_count(), &DistributionSpec::Bernoulli(0.7), 3, 0).unwrap();
        assert_eq!(verify_cut_gluing(&plan, caps.values()).unwrap().violations(), 0);
    }

    #[test]
    fn larger_zeta_never_shrinks_glue() {
        let a = cardinality_bounds(&slab_decomposition(&linear(2), 40, 4, four(), SlabRule::Max).unwrap());
        let b = cardinality_bounds(
            &slab_decomposition(&linear(2), 40, 4, Rational::from_integer(8), SlabRule::Max).unwrap(),
        );
        assert!(a.e1_count > 0 && a.e0_counts.iter().all(|&c| c > 0));
        assert!(b.e1_count >= a.e1_count);
        assert!(b.e0_counts.iter().max() >= a.e0_counts.iter().max());
    }

    #[test]
    fn segment_box_intersection() {
        let lo = [0.0, 0.0];
        let hi = [1.0, 1.0];
        assert!(segment_meets_open_box(&[-1.0, 0.5], &[2.0, 0.5], &lo, &hi));
        assert!(!segment_meets_open_box(&[-1.0, 1.0], &[2.0, 1.0], &lo, &hi));
        assert!(!segment_meets_open_box(&[-1.0, 0.5], &[0.0, 0.5], &lo, &hi));
        assert!(segment_meets_open_box(&[0.2, 0.2], &[0.3, 0.3], &lo, &hi));
        assert!(!segment_meets_open_box(&[1.0, 0.5], &[2.0, 0.5], &lo, &hi));
    }
}
