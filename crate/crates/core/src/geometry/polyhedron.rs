use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::planar::newell;
use super::{
    add, cross, dist, dot, lerp, norm, scale, sub, ConvexPolytope, Crossing, FacetSource,
    GeometryError, Hyperplane, PlanarPolygon, Point, SplitPieces, EPS_GEOM,
};

/// Convex polyhedron given by vertices and facets; every facet is a vertex
/// index loop, counterclockwise when seen from outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    vertices: Vec<Point<3>>,
    faces: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Key {
    Vertex(usize),
    Edge(usize, usize),
}

impl Polyhedron {
    /// Checks orientation, closedness and convexity.
    pub fn new(vertices: Vec<Point<3>>, faces: Vec<Vec<usize>>) -> Result<Self, GeometryError> {
        if vertices.len() < 4 || faces.len() < 4 || faces.iter().any(|f| f.len() < 3 || f.iter().any(|&i| i >= vertices.len())) {
            return Err(GeometryError::InvalidPolytope);
        }
        let p = Self { vertices, faces };
        let diam = p.diameter();
        if !(p.volume() > EPS_GEOM * diam * diam * diam) {
            return Err(GeometryError::InvalidPolytope);
        }
        let tol = EPS_GEOM * diam;
        for (n, c) in p.halfspaces() {
            if !n.iter().all(|x| x.is_finite()) || p.vertices.iter().any(|v| dot(v, &n) > c + tol) {
                return Err(GeometryError::InvalidPolytope);
            }
        }
        Ok(p)
    }

    pub fn cuboid(lo: Point<3>, hi: Point<3>) -> Result<Self, GeometryError> {
        let v = vec![
            [lo[0], lo[1], lo[2]],
            [hi[0], lo[1], lo[2]],
            [hi[0], hi[1], lo[2]],
            [lo[0], hi[1], lo[2]],
            [lo[0], lo[1], hi[2]],
            [hi[0], lo[1], hi[2]],
            [hi[0], hi[1], hi[2]],
            [lo[0], hi[1], hi[2]],
        ];
        let f = vec![
            vec![0, 3, 2, 1],
            vec![4, 5, 6, 7],
            vec![0, 1, 5, 4],
            vec![2, 3, 7, 6],
            vec![1, 2, 6, 5],
            vec![0, 4, 7, 3],
        ];
        Self::new(v, f)
    }

    pub fn unit_cube() -> Self {
        Self::cuboid([0.0; 3], [1.0; 3]).expect("unit cube")
    }

    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    pub fn face_polygon(&self, i: usize) -> PlanarPolygon {
        PlanarPolygon::new(self.faces[i].iter().map(|&k| self.vertices[k]).collect())
    }

    fn key_point(&self, key: Key, dists: &[f64]) -> Point<3> {
        match key {
            Key::Vertex(i) => self.vertices[i],
            Key::Edge(a, b) => lerp(&self.vertices[a], &self.vertices[b], dists[a] / (dists[a] - dists[b])),
        }
    }

    /// Keeps `sign * dist >= 0`; `dists` already snapped to zero within
    /// tolerance. Returns the piece and the source of each facet.
    fn clip_side(&self, dists: &[f64], sign: f64, cap_outward: Point<3>) -> Option<(Self, Vec<FacetSource>)> {
        let mut loops: Vec<Vec<Key>> = Vec::with_capacity(self.faces.len() + 1);
        let mut sources = Vec::with_capacity(self.faces.len() + 1);
        let mut on_plane: Vec<Key> = Vec::new();
        for (fi, face) in self.faces.iter().enumerate() {
            let k = face.len();
            let mut out = Vec::with_capacity(k + 1);
            for t in 0..k {
                let (i, j) = (face[t], face[(t + 1) % k]);
                let (si, sj) = (sign * dists[i], sign * dists[j]);
                if si >= 0.0 {
                    out.push(Key::Vertex(i));
                    if si == 0.0 && !on_plane.contains(&Key::Vertex(i)) {
                        on_plane.push(Key::Vertex(i));
                    }
                }
                if (si > 0.0 && sj < 0.0) || (si < 0.0 && sj > 0.0) {
                    let key = Key::Edge(i.min(j), i.max(j));
                    out.push(key);
                    if !on_plane.contains(&key) {
                        on_plane.push(key);
                    }
                }
            }
            if out.len() >= 3 {
                loops.push(out);
                sources.push(FacetSource::Own(fi));
            }
        }
        if on_plane.len() >= 3 {
            let pts: Vec<Point<3>> = on_plane.iter().map(|&k| self.key_point(k, dists)).collect();
            let order = angular_order(&pts, &cap_outward);
            loops.push(order.into_iter().map(|i| on_plane[i]).collect());
            sources.push(FacetSource::Other(0));
        }
        let mut keys: Vec<Key> = Vec::new();
        let faces: Vec<Vec<usize>> = loops
            .iter()
            .map(|l| {
                l.iter()
                    .map(|k| match keys.iter().position(|x| x == k) {
                        Some(p) => p,
                        None => {
                            keys.push(*k);
                            keys.len() - 1
                        }
                    })
                    .collect()
            })
            .collect();
        if faces.len() < 4 {
            return None;
        }
        let vertices = keys.iter().map(|&k| self.key_point(k, dists)).collect();
        Some((Self { vertices, faces }, sources))
    }
}

/// Orders coplanar points counterclockwise around `outward`.
fn angular_order(pts: &[Point<3>], outward: &Point<3>) -> Vec<usize> {
    let n = pts.len() as f64;
    let c = scale(&pts.iter().fold([0.0; 3], |a, p| add(&a, p)), 1.0 / n);
    let mut e1 = sub(&pts[0], &c);
    e1 = scale(&e1, 1.0 / norm(&e1));
    let e2 = cross(outward, &e1);
    let mut idx: Vec<(f64, usize)> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let w = sub(p, &c);
            (dot(&w, &e2).atan2(dot(&w, &e1)), i)
        })
        .collect();
    idx.sort_by(|a, b| a.0.total_cmp(&b.0));
    idx.into_iter().map(|(_, i)| i).collect()
}

impl ConvexPolytope<3> for Polyhedron {
    type Facet = PlanarPolygon;

    fn vertices(&self) -> &[Point<3>] {
        &self.vertices
    }

    fn facet_count(&self) -> usize {
        self.faces.len()
    }

    fn volume(&self) -> f64 {
        let o = self.vertices[0];
        let mut v = 0.0;
        for f in &self.faces {
            let a = sub(&self.vertices[f[0]], &o);
            for t in 1..f.len() - 1 {
                let b = sub(&self.vertices[f[t]], &o);
                let c = sub(&self.vertices[f[t + 1]], &o);
                v += dot(&a, &cross(&b, &c));
            }
        }
        v / 6.0
    }

    fn centroid(&self) -> Point<3> {
        let o = self.vertices[0];
        let mut acc = [0.0; 3];
        let mut total = 0.0;
        for f in &self.faces {
            let a = self.vertices[f[0]];
            for t in 1..f.len() - 1 {
                let b = self.vertices[f[t]];
                let c = self.vertices[f[t + 1]];
                let w = dot(&sub(&a, &o), &cross(&sub(&b, &o), &sub(&c, &o))) / 6.0;
                let g = scale(&add(&add(&o, &a), &add(&b, &c)), 0.25);
                acc = add(&acc, &scale(&g, w));
                total += w;
            }
        }
        scale(&acc, 1.0 / total)
    }

    /// Sum over edges of length times exterior dihedral angle, over 4π.
    fn isotropic_mean_width(&self) -> f64 {
        let normals: Vec<Point<3>> = self.halfspaces().into_iter().map(|(n, _)| n).collect();
        let mut total = 0.0;
        for (fi, f) in self.faces.iter().enumerate() {
            let k = f.len();
            for t in 0..k {
                let (a, b) = (f[t], f[(t + 1) % k]);
                // each edge is visited once from each side; count it from the side with a < b
                if a > b {
                    continue;
                }
                let Some(fj) = self.faces.iter().enumerate().position(|(gj, g)| {
                    gj != fi && (0..g.len()).any(|s| g[s] == b && g[(s + 1) % g.len()] == a)
                }) else {
                    continue;
                };
                let cosang = dot(&normals[fi], &normals[fj]).clamp(-1.0, 1.0);
                total += dist(&self.vertices[a], &self.vertices[b]) * cosang.acos();
            }
        }
        total / (4.0 * PI)
    }

    fn halfspaces(&self) -> Vec<(Point<3>, f64)> {
        self.faces
            .iter()
            .map(|f| {
                let pts: Vec<Point<3>> = f.iter().map(|&i| self.vertices[i]).collect();
                let n = newell(&pts);
                let n = scale(&n, 1.0 / norm(&n));
                (n, dot(&n, &pts[0]))
            })
            .collect()
    }

    fn split(&self, h: &Hyperplane<3>) -> Result<SplitPieces<Self, 3>, GeometryError> {
        let diam = self.diameter();
        let tol = EPS_GEOM * diam;
        let mut dists: Vec<f64> = self.vertices.iter().map(|v| h.signed_distance(v)).collect();
        let mut grazes_vertex = false;
        for d in dists.iter_mut() {
            if d.abs() <= tol {
                *d = 0.0;
                grazes_vertex = true;
            }
        }
        if dists.iter().all(|&d| d >= 0.0) || dists.iter().all(|&d| d <= 0.0) {
            return Err(GeometryError::NoIntersection);
        }
        let n = *h.normal();
        let (plus, plus_sources) = self.clip_side(&dists, 1.0, scale(&n, -1.0)).ok_or(GeometryError::DegenerateCut)?;
        let (minus, minus_sources) = self.clip_side(&dists, -1.0, n).ok_or(GeometryError::DegenerateCut)?;
        let cap = plus_sources.iter().position(|s| *s == FacetSource::Other(0)).ok_or(GeometryError::DegenerateCut)?;
        // the cut face, oriented along +n
        let face = PlanarPolygon::new(minus.faces[minus_sources.len() - 1].iter().map(|&i| minus.vertices[i]).collect());
        if face.len() < 3 || super::Face::measure(&face) < tol * tol {
            return Err(GeometryError::DegenerateCut);
        }
        let cap_loop = &plus.faces[cap];
        let k = cap_loop.len();
        let mut crossings = Vec::with_capacity(k);
        for t in 0..k {
            let (a, b) = (cap_loop[t], cap_loop[(t + 1) % k]);
            // the facet of `plus` on the other side of this cap edge
            if let Some(fj) = plus.faces.iter().position(|g| (0..g.len()).any(|s| g[s] == b && g[(s + 1) % g.len()] == a)) {
                if let FacetSource::Own(orig) = plus_sources[fj] {
                    crossings.push(Crossing { facet: orig, point: lerp(&plus.vertices[a], &plus.vertices[b], 0.5) });
                }
            }
        }
        Ok(SplitPieces { plus, minus, face, plus_sources, minus_sources, crossings, grazes_vertex })
    }

    fn clip(&self, normal: &Point<3>, offset: f64) -> Option<(Self, Vec<FacetSource>)> {
        let tol = EPS_GEOM * self.diameter();
        let mut dists: Vec<f64> = self.vertices.iter().map(|v| offset - dot(v, normal)).collect();
        for d in dists.iter_mut() {
            if d.abs() <= tol {
                *d = 0.0;
            }
        }
        if dists.iter().all(|&d| d >= 0.0) {
            return Some((self.clone(), (0..self.faces.len()).map(FacetSource::Own).collect()));
        }
        if dists.iter().all(|&d| d <= 0.0) {
            return None;
        }
        let (p, s) = self.clip_side(&dists, 1.0, *normal)?;
        if p.volume() <= tol * tol * tol {
            return None;
        }
        Some((p, s))
    }

    fn map_points(&self, f: impl Fn(&Point<3>) -> Point<3>) -> Self {
        let mut p = Self { vertices: self.vertices.iter().map(f).collect(), faces: self.faces.clone() };
        if p.volume() < 0.0 {
            for face in p.faces.iter_mut() {
                face.reverse();
            }
        }
        p
    }
}
