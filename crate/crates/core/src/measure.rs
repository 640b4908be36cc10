//! Translation-invariant hyperplane measures.
//!
//! A measure Λ is determined by its directional distribution ℚ on unit
//! normals; offsets are Lebesgue-distributed. The rate at which a bounded set
//! is hit is the ℚ-average of its width, and the law of a hitting hyperplane
//! picks its normal from ℚ size-biased by width and its offset uniformly on
//! the projection interval.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::{
    canonical_direction, dot, norm, scale, ConvexPolytope, Hyperplane, Point, Segment, EPS_GEOM,
    EPS_UNIT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureError {
    /// Weights not positive or not summing to one.
    InvalidWeights,
    ZeroNormal,
    /// Normals do not span the space, so cells would be unbounded.
    DegenerateDirections,
    EmptyPolytope,
    UnsupportedDimension,
}

impl fmt::Display for MeasureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            MeasureError::InvalidWeights => "atom weights must be positive and sum to 1",
            MeasureError::ZeroNormal => "atom normal is the zero vector",
            MeasureError::DegenerateDirections => "atom normals must span the space",
            MeasureError::EmptyPolytope => "polytope has empty interior",
            MeasureError::UnsupportedDimension => "isotropic measures are available for d = 2 and d = 3",
        };
        f.write_str(msg)
    }
}

impl core::error::Error for MeasureError {}

/// Anything whose hit rate is defined: polytopes, and segments (whose
/// hit rate is the line-section intensity).
pub trait Hittable<const D: usize> {
    fn width(&self, u: &Point<D>) -> f64;
    fn support_interval(&self, u: &Point<D>) -> (f64, f64);
    fn isotropic_mean_width(&self) -> f64;
    fn diameter(&self) -> f64;
}

impl<const D: usize, P: ConvexPolytope<D>> Hittable<D> for P {
    fn width(&self, u: &Point<D>) -> f64 {
        ConvexPolytope::width(self, u)
    }
    fn support_interval(&self, u: &Point<D>) -> (f64, f64) {
        ConvexPolytope::support_interval(self, u)
    }
    fn isotropic_mean_width(&self) -> f64 {
        ConvexPolytope::isotropic_mean_width(self)
    }
    fn diameter(&self) -> f64 {
        ConvexPolytope::diameter(self)
    }
}

impl<const D: usize> Hittable<D> for Segment<D> {
    fn width(&self, u: &Point<D>) -> f64 {
        dot(&self.direction(), u).abs()
    }
    fn support_interval(&self, u: &Point<D>) -> (f64, f64) {
        let (a, b) = (dot(&self.a, u), dot(&self.b, u));
        (a.min(b), a.max(b))
    }
    fn isotropic_mean_width(&self) -> f64 {
        self.length() * isotropic_abs_cosine(D)
    }
    fn diameter(&self) -> f64 {
        self.length()
    }
}

/// `E|<u, n>|` for a fixed unit `u` and `n` uniform on the sphere.
fn isotropic_abs_cosine(d: usize) -> f64 {
    match d {
        2 => 2.0 / PI,
        3 => 0.5,
        _ => f64::NAN,
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind<const D: usize> {
    Discrete(Vec<(Point<D>, f64)>),
    Isotropic,
}

/// The directional distribution ℚ of hyperplane normals.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalDistribution<const D: usize> {
    kind: Kind<D>,
}

impl<const D: usize> DirectionalDistribution<D> {
    /// Atoms `(normal, weight)`; normals are normalized and canonicalized.
    pub fn discrete(atoms: Vec<(Point<D>, f64)>) -> Result<Self, MeasureError> {
        if atoms.is_empty() || atoms.iter().any(|(_, w)| !(*w > 0.0)) {
            return Err(MeasureError::InvalidWeights);
        }
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > EPS_UNIT {
            return Err(MeasureError::InvalidWeights);
        }
        let mut out = Vec::with_capacity(atoms.len());
        for (n, w) in atoms {
            let len = norm(&n);
            if !(len > 0.0) {
                return Err(MeasureError::ZeroNormal);
            }
            out.push((canonical_direction(&scale(&n, 1.0 / len)), w));
        }
        if !spans(&out) {
            return Err(MeasureError::DegenerateDirections);
        }
        Ok(Self { kind: Kind::Discrete(out) })
    }

    /// Equal weights on the coordinate axes.
    pub fn axis_parallel() -> Self {
        let w = 1.0 / D as f64;
        let atoms = (0..D).map(|i| (core::array::from_fn(|k| if k == i { 1.0 } else { 0.0 }), w)).collect();
        Self { kind: Kind::Discrete(atoms) }
    }

    pub fn isotropic() -> Result<Self, MeasureError> {
        if D == 2 || D == 3 {
            Ok(Self { kind: Kind::Isotropic })
        } else {
            Err(MeasureError::UnsupportedDimension)
        }
    }

    pub fn is_isotropic(&self) -> bool {
        matches!(self.kind, Kind::Isotropic)
    }

    /// The atoms of a discrete distribution.
    pub fn atoms(&self) -> Option<&[(Point<D>, f64)]> {
        match &self.kind {
            Kind::Discrete(a) => Some(a),
            Kind::Isotropic => None,
        }
    }
}

/// Rank test on the atom normals (Gram–Schmidt with a relative threshold).
fn spans<const D: usize>(atoms: &[(Point<D>, f64)]) -> bool {
    let mut basis: Vec<Point<D>> = Vec::new();
    for (n, _) in atoms {
        let mut v = *n;
        for b in &basis {
            let c = dot(&v, b);
            v = core::array::from_fn(|i| v[i] - c * b[i]);
        }
        let len = norm(&v);
        if len > 1e-9 {
            basis.push(scale(&v, 1.0 / len));
        }
    }
    basis.len() == D
}

/// Translation-invariant hyperplane measure Λ in `R^D`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneMeasure<const D: usize> {
    directional: DirectionalDistribution<D>,
}

impl<const D: usize> HyperplaneMeasure<D> {
    pub fn new(directional: DirectionalDistribution<D>) -> Self {
        Self { directional }
    }

    pub fn directional(&self) -> &DirectionalDistribution<D> {
        &self.directional
    }

    /// Λ([z]): the measure of the set of hyperplanes hitting `z`.
    pub fn hit_rate<Z: Hittable<D>>(&self, z: &Z) -> Result<f64, MeasureError> {
        let rate = match &self.directional.kind {
            Kind::Discrete(atoms) => atoms.iter().map(|(n, w)| w * z.width(n)).sum(),
            Kind::Isotropic => z.isotropic_mean_width(),
        };
        if rate > 0.0 && rate.is_finite() {
            Ok(rate)
        } else {
            Err(MeasureError::EmptyPolytope)
        }
    }

    /// Λ of the hyperplanes hitting a unit segment with direction `u`: the
    /// intensity of the section of the tessellation at time 1 with a line
    /// of direction `u`.
    pub fn line_hit_rate(&self, u: &Point<D>) -> f64 {
        match &self.directional.kind {
            Kind::Discrete(atoms) => atoms.iter().map(|(n, w)| w * dot(n, u).abs()).sum::<f64>() / norm(u),
            Kind::Isotropic => isotropic_abs_cosine(D),
        }
    }

    /// Draws a hyperplane from Λ restricted to `[z]` and normalized.
    ///
    /// Draws passing within the geometric tolerance of a vertex of `z` are
    /// rejected and redrawn.
    pub fn sample_hitting<P: ConvexPolytope<D>, R: Rng + ?Sized>(
        &self,
        z: &P,
        rng: &mut R,
    ) -> Result<Hyperplane<D>, MeasureError> {
        let diam = z.diameter();
        if !(z.volume() > 0.0) || !(diam > 0.0) {
            return Err(MeasureError::EmptyPolytope);
        }
        let tol = EPS_GEOM * diam;
        loop {
            let (normal, _) = self.sample_direction(z, rng);
            let (lo, hi) = z.support_interval(&normal);
            let offset = lo + rng.random::<f64>() * (hi - lo);
            let h = Hyperplane::from_unit(normal, offset);
            if z.vertices().iter().all(|v| h.signed_distance(v).abs() > tol) {
                return Ok(h);
            }
        }
    }

    /// Normal drawn from ℚ size-biased by `width(z, ·)`, together with the
    /// number of proposals used (always 1 for discrete ℚ).
    pub fn sample_direction<Z: Hittable<D>, R: Rng + ?Sized>(&self, z: &Z, rng: &mut R) -> (Point<D>, usize) {
        match &self.directional.kind {
            Kind::Discrete(atoms) => {
                let total: f64 = atoms.iter().map(|(n, w)| w * z.width(n)).sum();
                let mut u = rng.random::<f64>() * total;
                for (n, w) in atoms {
                    let m = w * z.width(n);
                    if u < m {
                        return (*n, 1);
                    }
                    u -= m;
                }
                // rounding: fall back to the last atom with positive mass
                let last = atoms.iter().rev().find(|(n, w)| w * z.width(n) > 0.0).unwrap_or(&atoms[0]);
                (last.0, 1)
            }
            Kind::Isotropic => {
                let envelope = z.diameter();
                let mut proposals = 0;
                loop {
                    proposals += 1;
                    let u = uniform_direction::<D, R>(rng);
                    if rng.random::<f64>() * envelope <= z.width(&u) {
                        return (canonical_direction(&u), proposals);
                    }
                }
            }
        }
    }
}

fn uniform_direction<const D: usize, R: Rng + ?Sized>(rng: &mut R) -> Point<D> {
    loop {
        let v: Point<D> = core::array::from_fn(|_| StandardNormal.sample(rng));
        let len = norm(&v);
        if len > 1e-12 {
            return scale(&v, 1.0 / len);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Polygon, Polyhedron};
    use crate::stream::stream;
    use alloc::vec;

    fn half_half() -> HyperplaneMeasure<2> {
        HyperplaneMeasure::new(DirectionalDistribution::discrete(vec![([1.0, 0.0], 0.5), ([0.0, 1.0], 0.5)]).unwrap())
    }

    /// Composite Simpson rule for the isotropic mean width: (1/π)∫₀^π w(θ) dθ.
    fn mean_width_oracle(z: &Polygon) -> f64 {
        let m = 20_000;
        let h = PI / m as f64;
        let f = |k: usize| {
            let th = k as f64 * h;
            ConvexPolytope::width(z, &[th.cos(), th.sin()])
        };
        let mut s = f(0) + f(m);
        for k in 1..m {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k);
        }
        s * h / 3.0 / PI
    }

    #[test]
    fn hit_rates() {
        let m = half_half();
        assert!((m.hit_rate(&Polygon::unit_square()).unwrap() - 1.0).abs() < 1e-15);
        let r = Polygon::rectangle(0.0, 0.0, 2.0, 1.0).unwrap();
        assert!((m.hit_rate(&r).unwrap() - 1.5).abs() < 1e-15);
        let iso = HyperplaneMeasure::<2>::new(DirectionalDistribution::isotropic().unwrap());
        let sq = Polygon::unit_square();
        let oracle = mean_width_oracle(&sq);
        assert!((oracle - 4.0 / PI).abs() < 1e-6);
        assert!((iso.hit_rate(&sq).unwrap() - oracle).abs() < 1e-6);
        let tri = Polygon::new(vec![[0.0, 0.0], [3.0, 0.5], [1.0, 2.0]]).unwrap();
        assert!((iso.hit_rate(&tri).unwrap() - mean_width_oracle(&tri)).abs() < 1e-6);
    }

    #[test]
    fn translation_and_dilation() {
        let m = HyperplaneMeasure::new(
            DirectionalDistribution::discrete(vec![([1.0, 0.2], 0.3), ([-0.4, 1.0], 0.7)]).unwrap(),
        );
        let z = Polygon::new(vec![[0.0, 0.0], [3.0, 0.5], [1.0, 2.0]]).unwrap();
        let base = m.hit_rate(&z).unwrap();
        let moved = z.translated(&[0.25, -1.5]);
        assert!((m.hit_rate(&moved).unwrap() - base).abs() <= 1e-15 * base.max(1.0) * 4.0);
        for c in [0.1, 2.0, 7.5] {
            assert!((m.hit_rate(&z.scaled(c)).unwrap() - c * base).abs() < 1e-12 * c * base);
        }
    }

    #[test]
    fn segment_hit_rate_is_line_intensity() {
        let m = half_half();
        let s = Segment::new([0.0, 0.0], [1.0, 0.0]);
        assert!((m.hit_rate(&s).unwrap() - 0.5).abs() < 1e-15);
        assert!((m.line_hit_rate(&[1.0, 0.0]) - 0.5).abs() < 1e-15);
        let iso = HyperplaneMeasure::<2>::new(DirectionalDistribution::isotropic().unwrap());
        assert!((iso.hit_rate(&s).unwrap() - 2.0 / PI).abs() < 1e-15);
        let iso3 = HyperplaneMeasure::<3>::new(DirectionalDistribution::isotropic().unwrap());
        assert!((iso3.line_hit_rate(&[0.0, 0.0, 1.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_distributions() {
        assert_eq!(
            DirectionalDistribution::<2>::discrete(vec![([1.0, 0.0], 0.5), ([0.0, 1.0], 0.4)]),
            Err(MeasureError::InvalidWeights)
        );
        assert_eq!(
            DirectionalDistribution::<2>::discrete(vec![([1.0, 0.0], 0.5), ([-2.0, 0.0], 0.5)]),
            Err(MeasureError::DegenerateDirections)
        );
        assert_eq!(
            DirectionalDistribution::<3>::discrete(vec![
                ([1.0, 0.0, 0.0], 0.3),
                ([0.0, 1.0, 0.0], 0.3),
                ([1.0, 1.0, 0.0], 0.4)
            ]),
            Err(MeasureError::DegenerateDirections)
        );
        let d = DirectionalDistribution::<2>::discrete(vec![([0.0, -3.0], 0.5), ([1.0, 0.0], 0.5)]).unwrap();
        assert_eq!(d.atoms().unwrap()[0].0, [0.0, 1.0]);
    }

    // chi-square with 1 dof at alpha = 0.01
    const CHI2_1_CRIT: f64 = 6.634_896_601;
    // asymptotic Kolmogorov quantile at alpha = 0.01
    const KS_CRIT: f64 = 1.627_6;

    fn ks_uniform(mut xs: alloc::vec::Vec<f64>) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let mut d = 0.0f64;
        for (i, x) in xs.iter().enumerate() {
            d = d.max((i as f64 + 1.0) / n - x).max(x - i as f64 / n);
        }
        d * n.sqrt()
    }

    #[test]
    fn hitting_law_on_square_and_rectangle() {
        let m = half_half();
        for (z, p_vertical) in [(Polygon::unit_square(), 0.5), (Polygon::rectangle(0.0, 0.0, 2.0, 1.0).unwrap(), 2.0 / 3.0)] {
            let mut rng = stream(11, "hitting", (p_vertical * 3.0) as u64);
            let n = 100_000;
            let mut vertical = 0usize;
            let mut offsets = vec![];
            for _ in 0..n {
                let h = m.sample_hitting(&z, &mut rng).unwrap();
                if h.normal()[0] == 1.0 {
                    vertical += 1;
                    offsets.push(h.offset() / ConvexPolytope::width(&z, &[1.0, 0.0]));
                }
            }
            let expected = n as f64 * p_vertical;
            let chi2 = (vertical as f64 - expected).powi(2) / expected
                + (vertical as f64 - expected).powi(2) / (n as f64 - expected);
            assert!(chi2 < CHI2_1_CRIT, "chi2 = {chi2}");
            assert!(ks_uniform(offsets) < KS_CRIT);
        }
    }

    #[test]
    fn isotropic_rejection_rate() {
        let iso = HyperplaneMeasure::<2>::new(DirectionalDistribution::isotropic().unwrap());
        let z = Polygon::unit_square();
        let mut rng = stream(5, "iso-accept", 0);
        let n = 100_000;
        let proposals: usize = (0..n).map(|_| iso.sample_direction(&z, &mut rng).1).sum();
        let rate = n as f64 / proposals as f64;
        let expected = (4.0 / PI) / 2f64.sqrt();
        // binomial standard error of the acceptance rate is ~1e-3
        assert!((rate - expected).abs() < 5e-3, "{rate} vs {expected}");
    }

    #[test]
    fn isotropic_direction_marginal() {
        // CDF of the size-biased angle on [0, π) for the unit square, from
        // quadrature of |cos θ| + |sin θ|
        let cdf = |th: f64| {
            let m = 2000;
            let h = th / m as f64;
            let f = |x: f64| x.cos().abs() + x.sin().abs();
            let mut s = f(0.0) + f(th);
            for k in 1..m {
                s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
            }
            s * h / 3.0 / 4.0
        };
        let iso = HyperplaneMeasure::<2>::new(DirectionalDistribution::isotropic().unwrap());
        let z = Polygon::unit_square();
        let mut rng = stream(5, "iso-angle", 0);
        let us: alloc::vec::Vec<f64> = (0..20_000)
            .map(|_| {
                let (n, _) = iso.sample_direction(&z, &mut rng);
                cdf(n[1].atan2(n[0]))
            })
            .collect();
        assert!(ks_uniform(us) < KS_CRIT);
    }

    #[test]
    fn cube_isotropic_rate() {
        let iso = HyperplaneMeasure::<3>::new(DirectionalDistribution::isotropic().unwrap());
        assert!((iso.hit_rate(&Polyhedron::unit_cube()).unwrap() - 1.5).abs() < 1e-14);
        let ax = HyperplaneMeasure::<3>::new(DirectionalDistribution::axis_parallel());
        assert!((ax.hit_rate(&Polyhedron::unit_cube()).unwrap() - 1.0).abs() < 1e-15);
    }
}
