use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{
    dist, dot, lerp, ConvexPolytope, Crossing, FacetSource, GeometryError, Hyperplane, Point,
    Segment, SplitPieces, EPS_GEOM,
};

/// Convex polygon with counterclockwise vertices. Edge `i` runs from vertex
/// `i` to vertex `i + 1` (cyclically).
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point<2>>,
}

impl Polygon {
    /// Validates convexity and orientation; clockwise input is reversed.
    pub fn new(mut vertices: Vec<Point<2>>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::InvalidPolytope);
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        let poly = Self { vertices };
        let diam = poly.diameter();
        let area = poly.volume();
        if !(area > EPS_GEOM * diam * diam) {
            return Err(GeometryError::InvalidPolytope);
        }
        let n = poly.vertices.len();
        for i in 0..n {
            let a = poly.vertices[i];
            let b = poly.vertices[(i + 1) % n];
            let c = poly.vertices[(i + 2) % n];
            let turn = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            // collinear or reflex corner
            if turn <= EPS_GEOM * diam * dist(&a, &b).max(dist(&b, &c)) {
                return Err(GeometryError::InvalidPolytope);
            }
        }
        Ok(poly)
    }

    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, GeometryError> {
        Self::new(alloc::vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    pub fn unit_square() -> Self {
        Self::rectangle(0.0, 0.0, 1.0, 1.0).expect("unit square")
    }

    pub(crate) fn from_ccw_unchecked(vertices: Vec<Point<2>>) -> Self {
        Self { vertices }
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        (0..n).map(|i| dist(&self.vertices[i], &self.vertices[(i + 1) % n])).sum()
    }

    pub fn edge(&self, i: usize) -> Segment<2> {
        let n = self.vertices.len();
        Segment::new(self.vertices[i], self.vertices[(i + 1) % n])
    }

    /// Sutherland–Hodgman pass keeping the vertices with `side >= 0`.
    /// `sides` holds sign-adjusted distances with values inside the
    /// tolerance already snapped to zero.
    fn clip_side(&self, dists: &[f64], sign: f64) -> (Vec<Point<2>>, Vec<FacetSource>) {
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n + 1);
        let mut src = Vec::with_capacity(n + 1);
        for i in 0..n {
            let j = (i + 1) % n;
            let (si, sj) = (sign * dists[i], sign * dists[j]);
            if si >= 0.0 {
                out.push(self.vertices[i]);
                src.push(if sj >= 0.0 || si > 0.0 { FacetSource::Own(i) } else { FacetSource::Other(0) });
                if si > 0.0 && sj < 0.0 {
                    out.push(crossing_point(&self.vertices[i], &self.vertices[j], dists[i], dists[j]));
                    src.push(FacetSource::Other(0));
                }
            } else if sj > 0.0 {
                out.push(crossing_point(&self.vertices[i], &self.vertices[j], dists[i], dists[j]));
                src.push(FacetSource::Own(i));
            }
        }
        (out, src)
    }
}

fn crossing_point(a: &Point<2>, b: &Point<2>, da: f64, db: f64) -> Point<2> {
    lerp(a, b, da / (da - db))
}

fn signed_area(v: &[Point<2>]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        s += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * s
}

impl ConvexPolytope<2> for Polygon {
    type Facet = Segment<2>;

    fn vertices(&self) -> &[Point<2>] {
        &self.vertices
    }

    fn facet_count(&self) -> usize {
        self.vertices.len()
    }

    fn volume(&self) -> f64 {
        signed_area(&self.vertices)
    }

    fn centroid(&self) -> Point<2> {
        let v = &self.vertices;
        let n = v.len();
        // shift to the first vertex for conditioning
        let o = v[0];
        let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let p = [v[i][0] - o[0], v[i][1] - o[1]];
            let q = [v[(i + 1) % n][0] - o[0], v[(i + 1) % n][1] - o[1]];
            let c = p[0] * q[1] - q[0] * p[1];
            a2 += c;
            cx += (p[0] + q[0]) * c;
            cy += (p[1] + q[1]) * c;
        }
        [o[0] + cx / (3.0 * a2), o[1] + cy / (3.0 * a2)]
    }

    fn isotropic_mean_width(&self) -> f64 {
        self.perimeter() / PI
    }

    fn halfspaces(&self) -> Vec<(Point<2>, f64)> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                let len = dist(&a, &b);
                let normal = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
                (normal, dot(&normal, &a))
            })
            .collect()
    }

    fn split(&self, h: &Hyperplane<2>) -> Result<SplitPieces<Self, 2>, GeometryError> {
        let diam = self.diameter();
        let tol = EPS_GEOM * diam;
        let mut dists: Vec<f64> = self.vertices.iter().map(|v| h.signed_distance(v)).collect();
        for d in dists.iter_mut() {
            if d.abs() <= tol {
                *d = 0.0;
            }
        }
        if dists.iter().all(|&d| d >= 0.0) || dists.iter().all(|&d| d <= 0.0) {
            return Err(GeometryError::NoIntersection);
        }
        let n = self.vertices.len();
        let mut crossings = Vec::with_capacity(2);
        let mut grazes_vertex = false;
        for i in 0..n {
            let j = (i + 1) % n;
            if dists[i] == 0.0 {
                grazes_vertex = true;
                crossings.push(Crossing { facet: i, point: self.vertices[i] });
            } else if dists[j] != 0.0 && (dists[i] > 0.0) != (dists[j] > 0.0) {
                crossings.push(Crossing {
                    facet: i,
                    point: crossing_point(&self.vertices[i], &self.vertices[j], dists[i], dists[j]),
                });
            }
        }
        if crossings.len() != 2 {
            return Err(GeometryError::DegenerateCut);
        }
        let face = Segment::new(crossings[0].point, crossings[1].point);
        if face.length() < tol {
            return Err(GeometryError::DegenerateCut);
        }
        let (pv, ps) = self.clip_side(&dists, 1.0);
        let (mv, ms) = self.clip_side(&dists, -1.0);
        Ok(SplitPieces {
            plus: Polygon::from_ccw_unchecked(pv),
            minus: Polygon::from_ccw_unchecked(mv),
            face,
            plus_sources: ps,
            minus_sources: ms,
            crossings,
            grazes_vertex,
        })
    }

    fn clip(&self, normal: &Point<2>, offset: f64) -> Option<(Self, Vec<FacetSource>)> {
        let diam = self.diameter();
        let tol = EPS_GEOM * diam;
        let mut dists: Vec<f64> = self.vertices.iter().map(|v| offset - dot(v, normal)).collect();
        for d in dists.iter_mut() {
            if d.abs() <= tol {
                *d = 0.0;
            }
        }
        if dists.iter().all(|&d| d >= 0.0) {
            return Some((self.clone(), (0..self.vertices.len()).map(FacetSource::Own).collect()));
        }
        if dists.iter().all(|&d| d <= 0.0) {
            return None;
        }
        let (v, s) = self.clip_side(&dists, 1.0);
        if v.len() < 3 {
            return None;
        }
        let poly = Polygon::from_ccw_unchecked(v);
        if poly.volume() <= tol * tol {
            return None;
        }
        Some((poly, s))
    }

    fn map_points(&self, f: impl Fn(&Point<2>) -> Point<2>) -> Self {
        let mut v: Vec<Point<2>> = self.vertices.iter().map(f).collect();
        if signed_area(&v) < 0.0 {
            v.reverse();
        }
        Polygon::from_ccw_unchecked(v)
    }
}
