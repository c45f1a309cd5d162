//! Tilted cylinders over a (d−1)-dimensional box and their lattice graphs.
//!
//! A cylinder is `{x + t·v : x ∈ nA, t ∈ [−h, h]}` where `A` is a box with a
//! rational anchor and rational, mutually orthogonal frame directions, and `v`
//! is the unit vector along a primitive integer normal. All membership
//! decisions are exact: squared forms for points, quadratic surds for the
//! crossing of a lattice edge with the top or bottom face.

mod graph;

pub use graph::{
    boundary_half_sets, build_cylinder, top_bottom_sets, LatticeGraph, BOTTOM, LOWER_HALF, TOP,
    UPPER_HALF,
};

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::exact::{from_int, sign_with_root, to_f64, QuadraticSurd, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeometryError {
    DimensionTooSmall(usize),
    ZeroDirection,
    NotPrimitive,
    DimensionMismatch { expected: usize, found: usize },
    FrameNotOrthogonal,
    NonPositiveLength,
    NegativeHeight,
    ZeroScale,
    EmptyGraph,
    NotOnBoundary,
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::DimensionTooSmall(d) => write!(f, "invalid spec: dimension {d} < 2"),
            GeometryError::ZeroDirection => write!(f, "invalid spec: normal direction is zero"),
            GeometryError::NotPrimitive => {
                write!(f, "invalid spec: normal components must have gcd 1")
            }
            GeometryError::DimensionMismatch { expected, found } => {
                write!(f, "invalid spec: expected {expected} components, found {found}")
            }
            GeometryError::FrameNotOrthogonal => write!(
                f,
                "invalid spec: frame vectors must be nonzero, pairwise orthogonal and orthogonal to the normal"
            ),
            GeometryError::NonPositiveLength => write!(f, "invalid spec: zero-area base"),
            GeometryError::NegativeHeight => write!(f, "invalid spec: negative height"),
            GeometryError::ZeroScale => write!(f, "invalid spec: scale must be at least 1"),
            GeometryError::EmptyGraph => write!(f, "cylinder contains no lattice point"),
            GeometryError::NotOnBoundary => {
                write!(f, "point is not on the relative boundary of the base")
            }
        }
    }
}

impl core::error::Error for GeometryError {}

/// Primitive integer normal vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Direction {
    components: Vec<i64>,
}

impl Direction {
    pub fn new(components: Vec<i64>) -> Result<Self, GeometryError> {
        if components.len() < 2 {
            return Err(GeometryError::DimensionTooSmall(components.len()));
        }
        let g = components.iter().fold(0i64, |acc, c| acc.gcd(c));
        if g == 0 {
            return Err(GeometryError::ZeroDirection);
        }
        if g != 1 {
            return Err(GeometryError::NotPrimitive);
        }
        Ok(Self { components })
    }

    /// The unit vector `e_axis` in dimension `dim`.
    pub fn axis(dim: usize, axis: usize) -> Self {
        let mut components = alloc::vec![0; dim];
        components[axis] = 1;
        Self { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[i64] {
        &self.components
    }

    pub fn norm_squared(&self) -> i128 {
        self.components.iter().map(|&c| (c as i128) * (c as i128)).sum()
    }

    pub fn negated(&self) -> Self {
        Self {
            components: self.components.iter().map(|c| -c).collect(),
        }
    }

    /// `Some(k)` when the direction is `±e_k`.
    pub fn axis_index(&self) -> Option<usize> {
        let mut found = None;
        for (k, &c) in self.components.iter().enumerate() {
            if c != 0 {
                if found.is_some() {
                    return None;
                }
                found = Some(k);
            }
        }
        found
    }

    pub fn unit(&self) -> Vec<f64> {
        let norm = libm::sqrt(self.norm_squared() as f64);
        self.components.iter().map(|&c| c as f64 / norm).collect()
    }
}

/// A non degenerate box of dimension d−1: `anchor + Σ s_k·f_k/|f_k|` with
/// `s_k ∈ [0, L_k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperrectangle {
    anchor: Vec<Rational>,
    frame: Vec<Vec<Rational>>,
    lengths: Vec<Rational>,
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dot_int(a: &[Rational], b: &[i64]) -> Rational {
    a.iter().zip(b).map(|(x, &y)| x * from_int(y)).sum()
}

impl Hyperrectangle {
    pub fn new(
        anchor: Vec<Rational>,
        frame: Vec<Vec<Rational>>,
        lengths: Vec<Rational>,
        normal: &Direction,
    ) -> Result<Self, GeometryError> {
        let d = normal.dim();
        if anchor.len() != d {
            return Err(GeometryError::DimensionMismatch {
                expected: d,
                found: anchor.len(),
            });
        }
        if frame.len() != d - 1 || lengths.len() != d - 1 {
            return Err(GeometryError::DimensionMismatch {
                expected: d - 1,
                found: frame.len().min(lengths.len()),
            });
        }
        for (k, f) in frame.iter().enumerate() {
            if f.len() != d {
                return Err(GeometryError::DimensionMismatch {
                    expected: d,
                    found: f.len(),
                });
            }
            if dot(f, f).is_zero() || !dot_int(f, normal.components()).is_zero() {
                return Err(GeometryError::FrameNotOrthogonal);
            }
            if frame[..k].iter().any(|g| !dot(f, g).is_zero()) {
                return Err(GeometryError::FrameNotOrthogonal);
            }
        }
        if lengths.iter().any(|l| !l.is_positive()) {
            return Err(GeometryError::NonPositiveLength);
        }
        Ok(Self {
            anchor,
            frame,
            lengths,
        })
    }

    /// `Π [0, L_k] × {0}` with normal `e_d`.
    pub fn straight(lengths: &[Rational]) -> Result<Self, GeometryError> {
        let d = lengths.len() + 1;
        let frame = (0..d - 1)
            .map(|k| {
                let mut f = alloc::vec![Rational::zero(); d];
                f[k] = Rational::from_integer(1);
                f
            })
            .collect();
        Self::new(
            alloc::vec![Rational::zero(); d],
            frame,
            lengths.to_vec(),
            &Direction::axis(d, d - 1),
        )
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    pub fn anchor(&self) -> &[Rational] {
        &self.anchor
    }

    pub fn frame(&self) -> &[Vec<Rational>] {
        &self.frame
    }

    pub fn lengths(&self) -> &[Rational] {
        &self.lengths
    }

    /// `H^{d−1}(scale·A) = scale^{d−1} Π L_k`.
    pub fn area(&self, scale: u32) -> Rational {
        let n = Rational::from_integer(scale as i128);
        self.lengths.iter().fold(Rational::from_integer(1), |acc, l| acc * l * n)
    }

    /// Same box shifted by `offset`.
    pub fn shifted(&self, offset: &[Rational]) -> Self {
        Self {
            anchor: self.anchor.iter().zip(offset).map(|(a, o)| a + o).collect(),
            frame: self.frame.clone(),
            lengths: self.lengths.clone(),
        }
    }
}

/// Named height functions `n ↦ h(n)`, all rounded up to an integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HeightRule {
    /// `⌈c⌉`
    Constant(Rational),
    /// `⌈c·√n⌉`
    SquareRoot(Rational),
    /// `⌈c·n⌉`
    Linear(Rational),
    /// `⌈c·n²⌉`
    Quadratic(Rational),
    /// `⌈c·log(n+1)⌉`
    Logarithmic(Rational),
}

impl HeightRule {
    pub fn name(&self) -> &'static str {
        match self {
            HeightRule::Constant(_) => "const",
            HeightRule::SquareRoot(_) => "sqrt",
            HeightRule::Linear(_) => "linear",
            HeightRule::Quadratic(_) => "quadratic",
            HeightRule::Logarithmic(_) => "log",
        }
    }

    pub fn coefficient(&self) -> &Rational {
        match self {
            HeightRule::Constant(c)
            | HeightRule::SquareRoot(c)
            | HeightRule::Linear(c)
            | HeightRule::Quadratic(c)
            | HeightRule::Logarithmic(c) => c,
        }
    }

    pub fn from_name(name: &str, coefficient: Rational) -> Option<Self> {
        if !coefficient.is_positive() {
            return None;
        }
        Some(match name {
            "const" => HeightRule::Constant(coefficient),
            "sqrt" => HeightRule::SquareRoot(coefficient),
            "linear" => HeightRule::Linear(coefficient),
            "quadratic" => HeightRule::Quadratic(coefficient),
            "log" => HeightRule::Logarithmic(coefficient),
            _ => return None,
        })
    }

    pub fn height(&self, n: u32) -> Rational {
        let n_rat = Rational::from_integer(n as i128);
        let h = match self {
            HeightRule::Constant(c) => c.ceil(),
            HeightRule::Linear(c) => (c * n_rat).ceil(),
            HeightRule::Quadratic(c) => (c * n_rat * n_rat).ceil(),
            HeightRule::SquareRoot(c) => {
                // smallest k ≥ 0 with k² ≥ c²·n
                let target = c * c * n_rat;
                let mut k = libm::floor(to_f64(c) * libm::sqrt(n as f64)) as i128 - 2;
                k = k.max(0);
                while Rational::from_integer(k * k) < target {
                    k += 1;
                }
                Rational::from_integer(k)
            }
            HeightRule::Logarithmic(c) => {
                let value = to_f64(c) * libm::log(n as f64 + 1.0);
                Rational::from_integer(libm::ceil(value - 1e-12) as i128)
            }
        };
        h.max(Rational::zero())
    }

    /// Growth exponent `α` with `h(n) ≍ n^α` (0 for the logarithmic rule).
    pub fn growth_exponent(&self) -> f64 {
        match self {
            HeightRule::Constant(_) | HeightRule::Logarithmic(_) => 0.0,
            HeightRule::SquareRoot(_) => 0.5,
            HeightRule::Linear(_) => 1.0,
            HeightRule::Quadratic(_) => 2.0,
        }
    }
}

/// A base box, a normal and a height rule: the family `n ↦ cyl(nA, h(n))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderFamily {
    base: Hyperrectangle,
    normal: Direction,
    rule: HeightRule,
}

impl CylinderFamily {
    pub fn new(
        base: Hyperrectangle,
        normal: Direction,
        rule: HeightRule,
    ) -> Result<Self, GeometryError> {
        if base.dim() != normal.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: normal.dim(),
                found: base.dim(),
            });
        }
        // re-validate the frame against this normal
        let base = Hyperrectangle::new(
            base.anchor.clone(),
            base.frame.clone(),
            base.lengths.clone(),
            &normal,
        )?;
        Ok(Self { base, normal, rule })
    }

    /// Unit cube base `[0,1]^{d−1} × {0}` with normal `e_d`.
    pub fn straight(dim: usize, rule: HeightRule) -> Result<Self, GeometryError> {
        if dim < 2 {
            return Err(GeometryError::DimensionTooSmall(dim));
        }
        let lengths = alloc::vec![Rational::from_integer(1); dim - 1];
        Self::new(
            Hyperrectangle::straight(&lengths)?,
            Direction::axis(dim, dim - 1),
            rule,
        )
    }

    pub fn base(&self) -> &Hyperrectangle {
        &self.base
    }

    pub fn normal(&self) -> &Direction {
        &self.normal
    }

    pub fn rule(&self) -> &HeightRule {
        &self.rule
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    pub fn height(&self, n: u32) -> Rational {
        self.rule.height(n)
    }

    pub fn at(&self, n: u32) -> Result<CylinderSpec, GeometryError> {
        CylinderSpec::new(self.base.clone(), self.normal.clone(), n, self.rule.height(n))
    }
}

/// Which translated face of the cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    /// `nA + h·v`
    Top,
    /// `nA − h·v`
    Bottom,
}

/// `cyl(nA, h)` for one scale `n` and one height `h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderSpec {
    base: Hyperrectangle,
    normal: Direction,
    scale: u32,
    height: Rational,
    origin: Vec<Rational>,
    normal_sq: Rational,
    frame_sq: Vec<Rational>,
    extents: Vec<Rational>,
}

impl CylinderSpec {
    pub fn new(
        base: Hyperrectangle,
        normal: Direction,
        scale: u32,
        height: Rational,
    ) -> Result<Self, GeometryError> {
        if scale == 0 {
            return Err(GeometryError::ZeroScale);
        }
        if height.is_negative() {
            return Err(GeometryError::NegativeHeight);
        }
        if base.dim() != normal.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: normal.dim(),
                found: base.dim(),
            });
        }
        let base = Hyperrectangle::new(
            base.anchor.clone(),
            base.frame.clone(),
            base.lengths.clone(),
            &normal,
        )?;
        let n = Rational::from_integer(scale as i128);
        let origin = base.anchor.iter().map(|a| a * n).collect();
        let frame_sq = base.frame.iter().map(|f| dot(f, f)).collect();
        let extents = base.lengths.iter().map(|l| l * n).collect();
        let normal_sq = Rational::from_integer(normal.norm_squared());
        Ok(Self {
            base,
            normal,
            scale,
            height,
            origin,
            normal_sq,
            frame_sq,
            extents,
        })
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    pub fn base(&self) -> &Hyperrectangle {
        &self.base
    }

    pub fn normal(&self) -> &Direction {
        &self.normal
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn height(&self) -> &Rational {
        &self.height
    }

    /// `n·anchor`, the corner of `nA`.
    pub fn origin(&self) -> &[Rational] {
        &self.origin
    }

    /// Side lengths `n·L_k` of `nA`.
    pub fn extents(&self) -> &[Rational] {
        &self.extents
    }

    /// `H^{d−1}(nA)`.
    pub fn area(&self) -> Rational {
        self.base.area(self.scale)
    }

    pub fn is_straight(&self) -> bool {
        self.normal.axis_index().is_some()
    }

    /// The same point set with the opposite normal orientation.
    pub fn with_normal_negated(&self) -> Self {
        Self::new(
            self.base.clone(),
            self.normal.negated(),
            self.scale,
            self.height,
        )
        .expect("negating the normal keeps a valid spec")
    }

    /// The cylinder translated by an integer vector.
    pub fn translated(&self, offset: &[i64]) -> Self {
        let n = Rational::from_integer(self.scale as i128);
        let shift: Vec<Rational> = offset.iter().map(|&z| from_int(z) / n).collect();
        Self::new(
            self.base.shifted(&shift),
            self.normal.clone(),
            self.scale,
            self.height,
        )
        .expect("translation keeps a valid spec")
    }

    fn relative(&self, p: &[i64]) -> Vec<Rational> {
        p.iter().zip(&self.origin).map(|(&x, o)| from_int(x) - o).collect()
    }

    /// `(x − origin)·v_int`: positive on the `v` side of `hyp(nA)`.
    pub fn normal_offset(&self, p: &[i64]) -> Rational {
        dot_int(&self.relative(p), self.normal.components())
    }

    /// Exact point membership in the closed cylinder.
    pub fn contains(&self, p: &[i64]) -> bool {
        let w = self.relative(p);
        let a = dot_int(&w, self.normal.components());
        if a * a > self.height * self.height * self.normal_sq {
            return false;
        }
        self.base.frame.iter().zip(&self.frame_sq).zip(&self.extents).all(|((f, f2), e)| {
            let b = dot(&w, f);
            !b.is_negative() && b * b <= e * e * f2
        })
    }

    /// Strict side of `hyp(nA)`: `Greater` for the `+v` component, `Less` for
    /// the `−v` component, `Equal` on the hyperplane.
    pub fn side(&self, p: &[i64]) -> Ordering {
        self.normal_offset(p).cmp(&Rational::zero())
    }

    /// Whether the open segment between nearest neighbours `a` and `b` lies
    /// in the closed cylinder. The cylinder is closed and convex, so this is
    /// equivalent to both endpoints belonging to it.
    pub fn edge_in_region(&self, a: &[i64], b: &[i64]) -> bool {
        debug_assert_eq!(
            a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<i64>(),
            1,
            "edge endpoints must be nearest neighbours"
        );
        self.contains(a) && self.contains(b)
    }

    /// Whether the closed segment `[a, b]` meets the closed face `nA ± h·v`.
    pub fn segment_meets_face(&self, a: &[i64], b: &[i64], face: Face) -> bool {
        let w = self.relative(a);
        let e: Vec<i64> = b.iter().zip(a).map(|(y, x)| y - x).collect();
        let sigma = match face {
            Face::Top => Rational::from_integer(1),
            Face::Bottom => Rational::from_integer(-1),
        };
        let zero = Rational::zero();
        let mut lower = alloc::vec![QuadraticSurd::rational(zero)];
        let mut upper = alloc::vec![QuadraticSurd::rational(Rational::from_integer(1))];

        // plane: w·v + s·(e·v) = σ·h·|v|
        let a_off = dot_int(&w, self.normal.components());
        let e_off: i64 = e.iter().zip(self.normal.components()).map(|(x, y)| x * y).sum();
        if e_off == 0 {
            if sign_with_root(&a_off, &(-sigma * self.height), &self.normal_sq) != Ordering::Equal {
                return false;
            }
        } else {
            let ev = from_int(e_off);
            let crossing = QuadraticSurd::new(-a_off / ev, sigma * self.height / ev, self.normal_sq);
            lower.push(crossing.clone());
            upper.push(crossing);
        }

        // box: 0 ≤ w·f + s·(e·f) ≤ E·|f|
        for ((f, f2), ext) in self.base.frame.iter().zip(&self.frame_sq).zip(&self.extents) {
            let b_off = dot(&w, f);
            let e_f = dot_int(f, &e);
            if e_f.is_zero() {
                if b_off.is_negative() || sign_with_root(&b_off, &(-ext), f2) == Ordering::Greater {
                    return false;
                }
                continue;
            }
            let at_zero = QuadraticSurd::rational(-b_off / e_f);
            let at_far = QuadraticSurd::new(-b_off / e_f, ext / e_f, *f2);
            if e_f.is_positive() {
                lower.push(at_zero);
                upper.push(at_far);
            } else {
                upper.push(at_zero);
                lower.push(at_far);
            }
        }
        lower
            .iter()
            .all(|lo| upper.iter().all(|hi| lo.compare(hi) != Ordering::Greater))
    }

    /// Frame coordinates `(s_1..s_{d−1}, t)` of a point relative to the corner
    /// of `nA`, in floating point: `s_k` along the unit frame vectors and `t`
    /// along `v`.
    pub fn frame_coordinates(&self, p: &[f64]) -> (Vec<f64>, f64) {
        let w: Vec<f64> = p.iter().zip(&self.origin).map(|(x, o)| x - to_f64(o)).collect();
        let s = self
            .base
            .frame
            .iter()
            .zip(&self.frame_sq)
            .map(|(f, f2)| {
                let raw: f64 = w.iter().zip(f).map(|(x, y)| x * to_f64(y)).sum();
                raw / libm::sqrt(to_f64(f2))
            })
            .collect();
        let v = self.normal.unit();
        let t = w.iter().zip(&v).map(|(x, y)| x * y).sum();
        (s, t)
    }

    /// Euclidean point for frame coordinates (inverse of `frame_coordinates`).
    pub fn point_from_frame(&self, s: &[f64], t: f64) -> Vec<f64> {
        let mut p: Vec<f64> = self.origin.iter().map(to_f64).collect();
        for (f, (&sk, f2)) in self.base.frame.iter().zip(s.iter().zip(&self.frame_sq)) {
            let norm = libm::sqrt(to_f64(f2));
            for (pi, fi) in p.iter_mut().zip(f) {
                *pi += sk * to_f64(fi) / norm;
            }
        }
        for (pi, vi) in p.iter_mut().zip(self.normal.unit()) {
            *pi += t * vi;
        }
        p
    }

    /// Inclusive integer bounding box, padded by one lattice step.
    pub(crate) fn bounding_box(&self) -> (Vec<i64>, Vec<i64>) {
        let d = self.dim();
        let v = self.normal.unit();
        let h = to_f64(&self.height);
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        for i in 0..d {
            let mut min = to_f64(&self.origin[i]) - h * libm::fabs(v[i]);
            let mut max = to_f64(&self.origin[i]) + h * libm::fabs(v[i]);
            for ((f, f2), ext) in self.base.frame.iter().zip(&self.frame_sq).zip(&self.extents) {
                let step = to_f64(ext) * to_f64(&f[i]) / libm::sqrt(to_f64(f2));
                if step < 0.0 {
                    min += step;
                } else {
                    max += step;
                }
            }
            lo.push(libm::floor(min) as i64 - 1);
            hi.push(libm::ceil(max) as i64 + 1);
        }
        (lo, hi)
    }

    /// Whether `x` lies on the relative boundary `∂(nA)` (exact).
    pub fn on_base_boundary(&self, x: &[Rational]) -> bool {
        let w: Vec<Rational> = x.iter().zip(&self.origin).map(|(p, o)| p - o).collect();
        if !dot_int(&w, self.normal.components()).is_zero() {
            return false;
        }
        let mut on_edge = false;
        for ((f, f2), ext) in self.base.frame.iter().zip(&self.frame_sq).zip(&self.extents) {
            let b = dot(&w, f);
            if b.is_negative() {
                return false;
            }
            match (b * b).cmp(&(ext * ext * f2)) {
                Ordering::Greater => return false,
                Ordering::Equal => on_edge = true,
                Ordering::Less => {}
            }
            if b.is_zero() {
                on_edge = true;
            }
        }
        on_edge
    }
}
