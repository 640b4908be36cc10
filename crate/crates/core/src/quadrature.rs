//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Cap on the number of bisections over the whole integral.
    pub max_subdivisions: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10, max_subdivisions: 2000 }
    }
}

/// Integral value with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureError {
    /// Tolerance not reached; carries the best estimate obtained.
    NotConverged(Estimate),
    NonFinite,
    InvalidInterval,
}

impl fmt::Display for QuadratureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadratureError::NotConverged(e) => {
                write!(f, "quadrature did not converge (value {}, error {})", e.value, e.error)
            }
            QuadratureError::NonFinite => f.write_str("integrand returned a non-finite value"),
            QuadratureError::InvalidInterval => f.write_str("integration limits must be finite and ordered"),
        }
    }
}

impl core::error::Error for QuadratureError {}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5 and the centre
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Estimate, QuadratureError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    let value = kronrod * h;
    if !value.is_finite() {
        return Err(QuadratureError::NonFinite);
    }
    let error = ((kronrod - gauss) * h).abs() + 50.0 * f64::EPSILON * value.abs();
    Ok(Estimate { value, error })
}

struct Piece {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// `∫_a^b f`.
pub fn integrate<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: &QuadratureOptions,
) -> Result<Estimate, QuadratureError> {
    integrate_with_breaks(f, &[a, b], opts)
}

/// Integral over `[breaks[0], breaks[last]]`, with the integrand's kinks or
/// singularities placed on the given breakpoints (strictly increasing).
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    opts: &QuadratureOptions,
) -> Result<Estimate, QuadratureError> {
    if breaks.len() < 2 || breaks.iter().any(|x| !x.is_finite()) || breaks.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(QuadratureError::InvalidInterval);
    }
    let mut heap = BinaryHeap::new();
    let (mut value, mut error) = (0.0, 0.0);
    for w in breaks.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let est = gk15(&mut f, w[0], w[1])?;
        value += est.value;
        error += est.error;
        heap.push(Piece { a: w[0], b: w[1], est });
    }
    let mut splits = 0;
    while error > opts.abs_tol.max(opts.rel_tol * value.abs()) {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if splits >= opts.max_subdivisions || mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            return Err(QuadratureError::NotConverged(Estimate { value, error }));
        }
        splits += 1;
        let left = gk15(&mut f, worst.a, mid)?;
        let right = gk15(&mut f, mid, worst.b)?;
        value += left.value + right.value - worst.est.value;
        error += left.error + right.error - worst.est.error;
        heap.push(Piece { a: worst.a, b: mid, est: left });
        heap.push(Piece { a: mid, b: worst.b, est: right });
    }
    // re-sum to shed accumulated update rounding
    let (v, e) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.est.value, e + p.est.error));
    Ok(Estimate { value: v, error: e })
}
