use alloc::vec;
use alloc::vec::Vec;

use super::{dist, dot, lerp, sub, ConvexPolytope, Face, GeometryError, Point};

/// Closed segment `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<const D: usize> {
    pub a: Point<D>,
    pub b: Point<D>,
}

impl<const D: usize> Segment<D> {
    pub fn new(a: Point<D>, b: Point<D>) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        dist(&self.a, &self.b)
    }

    pub fn midpoint(&self) -> Point<D> {
        lerp(&self.a, &self.b, 0.5)
    }

    pub fn direction(&self) -> Point<D> {
        sub(&self.b, &self.a)
    }

    pub fn at(&self, t: f64) -> Point<D> {
        lerp(&self.a, &self.b, t)
    }

    /// Liang–Barsky clip against the half-spaces of `z`; returns the
    /// parameter interval that survives.
    pub fn clip_params<P: ConvexPolytope<D>>(&self, z: &P) -> Option<(f64, f64)> {
        let dir = self.direction();
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        for (n, c) in z.halfspaces() {
            let denom = dot(&dir, &n);
            let num = c - dot(&self.a, &n);
            if denom.abs() < f64::MIN_POSITIVE {
                if num < 0.0 {
                    return None;
                }
                continue;
            }
            let t = num / denom;
            if denom > 0.0 {
                t1 = t1.min(t);
            } else {
                t0 = t0.max(t);
            }
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }
}

/// Whether `x` lies in the relative interior of `s`: within `tol` of the
/// carrier line and with projection parameter in `(tol/len, 1 - tol/len)`.
pub fn point_on_segment_interior<const D: usize>(
    x: &Point<D>,
    s: &Segment<D>,
    tol: f64,
) -> Result<bool, GeometryError> {
    let len = s.length();
    if !(len > 0.0) {
        return Err(GeometryError::ZeroLength);
    }
    let dir = s.direction();
    let t = dot(&sub(x, &s.a), &dir) / (len * len);
    let foot = s.at(t);
    let rel = tol / len;
    Ok(dist(x, &foot) <= tol && t > rel && t < 1.0 - rel)
}

impl Face<2> for Segment<2> {
    fn vertices(&self) -> Vec<Point<2>> {
        vec![self.a, self.b]
    }

    fn measure(&self) -> f64 {
        self.length()
    }

    fn center(&self) -> Point<2> {
        self.midpoint()
    }

    fn clip_to<P: ConvexPolytope<2>>(&self, z: &P) -> Option<(Self, bool)> {
        let len = self.length();
        let (t0, t1) = self.clip_params(z)?;
        let tol = super::EPS_GEOM * z.diameter().max(len) / len.max(f64::MIN_POSITIVE);
        if t1 - t0 <= tol {
            return None;
        }
        let (t0, t1) = (if t0 <= tol { 0.0 } else { t0 }, if t1 >= 1.0 - tol { 1.0 } else { t1 });
        let clipped = t0 > 0.0 || t1 < 1.0;
        if !clipped {
            return Some((*self, false));
        }
        Some((Segment::new(self.at(t0), self.at(t1)), true))
    }

    fn hit_by_segment(&self, a: &Point<2>, b: &Point<2>) -> Option<Point<2>> {
        let r = self.direction();
        let s = sub(b, a);
        let denom = r[0] * s[1] - r[1] * s[0];
        if denom.abs() < 1e-300 {
            return None;
        }
        let q = sub(a, &self.a);
        let t = (q[0] * s[1] - q[1] * s[0]) / denom;
        let u = (q[0] * r[1] - q[1] * r[0]) / denom;
        if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
            Some(self.at(t))
        } else {
            None
        }
    }

    fn map_points(&self, f: impl Fn(&Point<2>) -> Point<2>) -> Self {
        Segment::new(f(&self.a), f(&self.b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_point_predicate() {
        let s = Segment::new([0.0, 0.0], [1.0, 0.0]);
        assert!(point_on_segment_interior(&[0.5, 0.0], &s, 1e-9).unwrap());
        assert!(!point_on_segment_interior(&[1.0, 0.0], &s, 1e-9).unwrap());
        assert!(!point_on_segment_interior(&[0.5, 1e-6], &s, 1e-9).unwrap());
        let z = Segment::new([1.0, 1.0], [1.0, 1.0]);
        assert_eq!(point_on_segment_interior(&[1.0, 1.0], &z, 1e-9), Err(GeometryError::ZeroLength));
    }

    #[test]
    fn segment_crossing() {
        let s = Segment::new([0.0, 0.0], [2.0, 0.0]);
        let p = s.hit_by_segment(&[0.5, -1.0], &[0.5, 1.0]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && p[1].abs() < 1e-15);
        assert!(s.hit_by_segment(&[3.0, -1.0], &[3.0, 1.0]).is_none());
        assert!(s.hit_by_segment(&[0.0, 1.0], &[1.0, 1.0]).is_none());
    }
}
