use alloc::vec::Vec;

use super::{add, cross, dot, lerp, norm, scale, sub, ConvexPolytope, Face, Point, EPS_GEOM};

/// Convex polygon embedded in a plane of R³, vertices in cyclic order.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarPolygon {
    vertices: Vec<Point<3>>,
}

impl PlanarPolygon {
    pub fn new(vertices: Vec<Point<3>>) -> Self {
        Self { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Newell normal; its length is twice the area.
    pub fn area_vector(&self) -> Point<3> {
        newell(&self.vertices)
    }

    pub fn unit_normal(&self) -> Point<3> {
        let n = self.area_vector();
        scale(&n, 1.0 / norm(&n))
    }

    fn clip_halfspace(&self, normal: &Point<3>, offset: f64, tol: f64) -> Option<(Self, bool)> {
        let d: Vec<f64> = self
            .vertices
            .iter()
            .map(|v| {
                let x = offset - dot(v, normal);
                if x.abs() <= tol {
                    0.0
                } else {
                    x
                }
            })
            .collect();
        if d.iter().all(|&x| x >= 0.0) {
            return Some((self.clone(), false));
        }
        if d.iter().all(|&x| x <= 0.0) {
            return None;
        }
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..n {
            let j = (i + 1) % n;
            if d[i] >= 0.0 {
                out.push(self.vertices[i]);
            }
            if (d[i] > 0.0 && d[j] < 0.0) || (d[i] < 0.0 && d[j] > 0.0) {
                out.push(lerp(&self.vertices[i], &self.vertices[j], d[i] / (d[i] - d[j])));
            }
        }
        if out.len() < 3 {
            return None;
        }
        Some((Self::new(out), true))
    }
}

pub(crate) fn newell(v: &[Point<3>]) -> Point<3> {
    let mut n = [0.0; 3];
    let o = v[0];
    for i in 1..v.len().saturating_sub(1) {
        let c = cross(&sub(&v[i], &o), &sub(&v[i + 1], &o));
        n = add(&n, &c);
    }
    n
}

impl Face<3> for PlanarPolygon {
    fn vertices(&self) -> Vec<Point<3>> {
        self.vertices.clone()
    }

    fn measure(&self) -> f64 {
        0.5 * norm(&self.area_vector())
    }

    fn center(&self) -> Point<3> {
        let v = &self.vertices;
        let o = v[0];
        let mut acc = [0.0; 3];
        let mut total = 0.0;
        for i in 1..v.len() - 1 {
            let w = 0.5 * norm(&cross(&sub(&v[i], &o), &sub(&v[i + 1], &o)));
            let c = scale(&add(&add(&o, &v[i]), &v[i + 1]), 1.0 / 3.0);
            acc = add(&acc, &scale(&c, w));
            total += w;
        }
        scale(&acc, 1.0 / total)
    }

    fn clip_to<P: ConvexPolytope<3>>(&self, z: &P) -> Option<(Self, bool)> {
        let tol = EPS_GEOM * z.diameter();
        let mut current = self.clone();
        let mut clipped = false;
        for (n, c) in z.halfspaces() {
            let (next, cut) = current.clip_halfspace(&n, c, tol)?;
            clipped |= cut;
            current = next;
        }
        if current.measure() <= tol * tol {
            return None;
        }
        Some((current, clipped))
    }

    fn hit_by_segment(&self, a: &Point<3>, b: &Point<3>) -> Option<Point<3>> {
        let n = self.unit_normal();
        let c = dot(&n, &self.vertices[0]);
        let da = dot(a, &n) - c;
        let db = dot(b, &n) - c;
        if (da > 0.0 && db > 0.0) || (da < 0.0 && db < 0.0) || da == db {
            return None;
        }
        let p = lerp(a, b, da / (da - db));
        let k = self.vertices.len();
        for i in 0..k {
            let e = sub(&self.vertices[(i + 1) % k], &self.vertices[i]);
            let w = sub(&p, &self.vertices[i]);
            if dot(&cross(&e, &w), &n) < 0.0 {
                return None;
            }
        }
        Some(p)
    }

    fn map_points(&self, f: impl Fn(&Point<3>) -> Point<3>) -> Self {
        Self::new(self.vertices.iter().map(f).collect())
    }
}
