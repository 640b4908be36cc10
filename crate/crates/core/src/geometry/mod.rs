//! Convex geometry in the plane and in space.
//!
//! Cells are convex polygons ([`Polygon`]) or convex polyhedra
//! ([`Polyhedron`]); the faces created when a cell is divided are
//! [`Segment`]s in the plane and [`PlanarPolygon`]s in space. All tolerances
//! are relative to the diameter of the polytope being operated on.

mod planar;
mod polygon;
mod polyhedron;
mod segment;

use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

pub use planar::PlanarPolygon;
pub use polygon::Polygon;
pub use polyhedron::Polyhedron;
pub use segment::{point_on_segment_interior, Segment};

/// Relative geometric tolerance (scaled by the diameter of the polytope).
pub const EPS_GEOM: f64 = 1e-9;
/// Tolerance on the norm of unit vectors.
pub const EPS_UNIT: f64 = 1e-12;

pub type Point<const D: usize> = [f64; D];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryError {
    /// The hyperplane misses the interior of the polytope.
    NoIntersection,
    /// The cut face is negligibly small relative to the polytope.
    DegenerateCut,
    ZeroLength,
    ZeroNormal,
    /// Fewer than `d + 1` vertices, vanishing volume, or a non-convex outline.
    InvalidPolytope,
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::NoIntersection => write!(f, "hyperplane does not cut the interior"),
            GeometryError::DegenerateCut => write!(f, "degenerate cut (negligibly small cut face)"),
            GeometryError::ZeroLength => write!(f, "segment has zero length"),
            GeometryError::ZeroNormal => write!(f, "hyperplane normal is the zero vector"),
            GeometryError::InvalidPolytope => write!(f, "not a bounded convex polytope with interior"),
        }
    }
}

impl core::error::Error for GeometryError {}

#[inline]
pub fn dot<const D: usize>(a: &Point<D>, b: &Point<D>) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        s += a[i] * b[i];
    }
    s
}

#[inline]
pub fn sub<const D: usize>(a: &Point<D>, b: &Point<D>) -> Point<D> {
    core::array::from_fn(|i| a[i] - b[i])
}

#[inline]
pub fn add<const D: usize>(a: &Point<D>, b: &Point<D>) -> Point<D> {
    core::array::from_fn(|i| a[i] + b[i])
}

#[inline]
pub fn scale<const D: usize>(a: &Point<D>, c: f64) -> Point<D> {
    core::array::from_fn(|i| a[i] * c)
}

/// `a + t (b - a)`
#[inline]
pub fn lerp<const D: usize>(a: &Point<D>, b: &Point<D>, t: f64) -> Point<D> {
    core::array::from_fn(|i| a[i] + t * (b[i] - a[i]))
}

#[inline]
pub fn norm<const D: usize>(a: &Point<D>) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist<const D: usize>(a: &Point<D>, b: &Point<D>) -> f64 {
    norm(&sub(a, b))
}

#[inline]
pub fn cross(a: &Point<3>, b: &Point<3>) -> Point<3> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Flips `v` onto the upper half-sphere: the last non-zero coordinate is
/// made positive. Returns the sign that was applied.
fn canonical_sign<const D: usize>(v: &Point<D>) -> f64 {
    for i in (0..D).rev() {
        if v[i] > 0.0 {
            return 1.0;
        }
        if v[i] < 0.0 {
            return -1.0;
        }
    }
    1.0
}

/// Unit normal on the upper half-sphere (canonical direction representative).
pub fn canonical_direction<const D: usize>(v: &Point<D>) -> Point<D> {
    scale(v, canonical_sign(v))
}

/// Affine hyperplane `{x : <x, normal> = offset}` with a canonical unit normal.
///
/// The positive side `<x, normal> > offset` is the "plus" half-space used by
/// [`ConvexPolytope::split`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperplane<const D: usize> {
    normal: Point<D>,
    offset: f64,
}

impl<const D: usize> Hyperplane<D> {
    /// Normalizes `normal` and flips the pair onto the canonical half-sphere.
    pub fn new(normal: Point<D>, offset: f64) -> Result<Self, GeometryError> {
        let len = norm(&normal);
        if !(len > 0.0) || !len.is_finite() {
            return Err(GeometryError::ZeroNormal);
        }
        Ok(Self::from_unit(scale(&normal, 1.0 / len), offset / len))
    }

    /// `normal` must already be a unit vector.
    pub fn from_unit(normal: Point<D>, offset: f64) -> Self {
        let sign = canonical_sign(&normal);
        Self { normal: scale(&normal, sign), offset: offset * sign }
    }

    pub fn canonical(self) -> Self {
        Self::from_unit(self.normal, self.offset)
    }

    pub fn normal(&self) -> &Point<D> {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn signed_distance(&self, x: &Point<D>) -> f64 {
        dot(x, &self.normal) - self.offset
    }

    pub fn translated(&self, v: &Point<D>) -> Self {
        Self { normal: self.normal, offset: self.offset + dot(v, &self.normal) }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { normal: self.normal, offset: self.offset * c }
    }
}

/// Where a facet of a clipped polytope came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacetSource {
    /// Part of facet `i` of the polytope that was clipped.
    Own(usize),
    /// Part of facet `j` of the clipping polytope (or of the cutting
    /// hyperplane, index 0, for a single half-space).
    Other(usize),
}

/// A point where a cutting hyperplane crosses facet `facet` of the cell.
///
/// In the plane these are exactly the two endpoints of the chord; in space
/// `point` is the midpoint of the cut polygon's edge lying in that facet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing<const D: usize> {
    pub facet: usize,
    pub point: Point<D>,
}

/// Result of dividing a cell by a hyperplane.
#[derive(Debug, Clone)]
pub struct SplitPieces<P: ConvexPolytope<D>, const D: usize> {
    /// `z ∩ {<x, n> >= offset}`
    pub plus: P,
    /// `z ∩ {<x, n> <= offset}`
    pub minus: P,
    pub face: P::Facet,
    /// Per facet of `plus`: `Own(i)` for a piece of facet `i` of the parent,
    /// `Other(0)` for the cut face.
    pub plus_sources: Vec<FacetSource>,
    pub minus_sources: Vec<FacetSource>,
    pub crossings: Vec<Crossing<D>>,
    /// The hyperplane passes through a vertex of the parent (within
    /// tolerance), so crossing attribution is ambiguous.
    pub grazes_vertex: bool,
}

/// A bounded convex polytope with nonempty interior.
pub trait ConvexPolytope<const D: usize>: Clone + fmt::Debug {
    /// The `(d-1)`-dimensional faces produced by divisions.
    type Facet: Face<D>;

    fn vertices(&self) -> &[Point<D>];
    fn facet_count(&self) -> usize;
    /// Area (d=2) or volume (d=3).
    fn volume(&self) -> f64;
    fn centroid(&self) -> Point<D>;
    /// Mean width over isotropic directions.
    fn isotropic_mean_width(&self) -> f64;
    /// Outward unit normals and offsets of the facets, in facet order.
    fn halfspaces(&self) -> Vec<(Point<D>, f64)>;

    /// Divides `self` by `h`. Fails on hyperplanes that miss the interior or
    /// whose cut face is negligibly small. Cuts through vertices are
    /// performed and flagged in [`SplitPieces::grazes_vertex`].
    fn split(&self, h: &Hyperplane<D>) -> Result<SplitPieces<Self, D>, GeometryError>;

    /// Keeps `{<x, normal> <= offset}`. Returns `None` when nothing with
    /// positive volume is left.
    fn clip(&self, normal: &Point<D>, offset: f64) -> Option<(Self, Vec<FacetSource>)>;

    fn map_points(&self, f: impl Fn(&Point<D>) -> Point<D>) -> Self;

    fn diameter(&self) -> f64 {
        let v = self.vertices();
        let mut best = 0.0f64;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                best = best.max(dist(&v[i], &v[j]));
            }
        }
        best
    }

    /// `max <x,u> - min <x,u>` over the polytope.
    fn width(&self, u: &Point<D>) -> f64 {
        let (lo, hi) = self.support_interval(u);
        hi - lo
    }

    fn support_interval(&self, u: &Point<D>) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in self.vertices() {
            let p = dot(v, u);
            lo = lo.min(p);
            hi = hi.max(p);
        }
        (lo, hi)
    }

    fn contains_point(&self, x: &Point<D>, tol: f64) -> bool {
        self.halfspaces().iter().all(|(n, c)| dot(x, n) <= c + tol)
    }

    /// True if every vertex of `other` lies in `self` (relative tolerance).
    fn contains_polytope(&self, other: &Self) -> bool {
        let tol = EPS_GEOM * self.diameter();
        let hs = self.halfspaces();
        other.vertices().iter().all(|x| hs.iter().all(|(n, c)| dot(x, n) <= c + tol))
    }

    /// `self ∩ other`, with the provenance of every facet of the result.
    fn intersect(&self, other: &Self) -> Option<(Self, Vec<FacetSource>)> {
        let mut current = self.clone();
        let mut sources: Vec<FacetSource> = (0..self.facet_count()).map(FacetSource::Own).collect();
        for (j, (n, c)) in other.halfspaces().into_iter().enumerate() {
            let (next, local) = current.clip(&n, c)?;
            sources = local
                .into_iter()
                .map(|s| match s {
                    FacetSource::Own(i) => sources[i],
                    FacetSource::Other(_) => FacetSource::Other(j),
                })
                .collect();
            current = next;
        }
        Some((current, sources))
    }

    fn translated(&self, v: &Point<D>) -> Self {
        self.map_points(|x| add(x, v))
    }

    fn scaled(&self, c: f64) -> Self {
        self.map_points(|x| scale(x, c))
    }
}

/// A `(d-1)`-dimensional face of a division: a maximal polytope.
pub trait Face<const D: usize>: Clone + fmt::Debug {
    fn vertices(&self) -> Vec<Point<D>>;
    /// Length (d=2) or area (d=3).
    fn measure(&self) -> f64;
    /// Reference point: the midpoint for segments, the centroid otherwise.
    fn center(&self) -> Point<D>;
    /// `self ∩ z`; the flag reports whether anything was cut away.
    fn clip_to<P: ConvexPolytope<D>>(&self, z: &P) -> Option<(Self, bool)>;
    /// Intersection point with the segment `[a, b]`, if any.
    fn hit_by_segment(&self, a: &Point<D>, b: &Point<D>) -> Option<Point<D>>;
    fn map_points(&self, f: impl Fn(&Point<D>) -> Point<D>) -> Self;
}
