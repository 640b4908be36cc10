//! Direct sampler of the typical (j = 0) and length-weighted (j = 1)
//! maximal segment in any dimension.
//!
//! A sample is built from the birth-time law, then the length given the
//! last birth time, then the internal-vertex count given length and birth
//! times. The line-hit factor `b(u)` is normalized to 1, so lengths are in
//! units of `1/b(u)` and the count law does not depend on the measure.

use alloc::vec::Vec;
use core::fmt;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PalmError {
    BadDimension,
    BadWeightIndex,
    BadHorizon,
}

impl fmt::Display for PalmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PalmError::BadDimension => "dimension must be at least 2",
            PalmError::BadWeightIndex => "weight index j must be 0 or 1",
            PalmError::BadHorizon => "horizon t must be positive and finite",
        })
    }
}

impl core::error::Error for PalmError {}

#[derive(Debug, Clone, PartialEq)]
pub struct PalmSegmentSample {
    /// `s₁ < … < s_{d−1}`.
    pub birth_times: Vec<f64>,
    pub length: f64,
    pub internal_vertices: u64,
    pub j: usize,
    pub d: usize,
    pub t: f64,
}

fn check(d: usize, j: usize, t: f64) -> Result<(), PalmError> {
    if d < 2 {
        return Err(PalmError::BadDimension);
    }
    if j > 1 {
        return Err(PalmError::BadWeightIndex);
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(PalmError::BadHorizon);
    }
    Ok(())
}

/// Uniform on `(0, 1]`.
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Ordered birth times: the last has CDF `(s/t)^{d−j}`, the others are
/// sorted uniforms below it.
pub fn sample_birth_times<R: Rng + ?Sized>(d: usize, j: usize, t: f64, rng: &mut R) -> Result<Vec<f64>, PalmError> {
    check(d, j, t)?;
    let last = t * open_unit(rng).powf(1.0 / (d - j) as f64);
    let mut s: Vec<f64> = (0..d - 2).map(|_| last * rng.random::<f64>()).collect();
    s.sort_by(f64::total_cmp);
    s.push(last);
    Ok(s)
}

/// `d·t − 2s_{d−1} − Σ_{i<d−1} s_i`.
pub fn vertex_rate(birth_times: &[f64], d: usize, t: f64) -> f64 {
    let (last, rest) = birth_times.split_last().expect("at least one birth time");
    d as f64 * t - 2.0 * last - rest.iter().sum::<f64>()
}

// above this the Poisson count is its mean to well under one part in 10⁷
const POISSON_DIRECT_LIMIT: f64 = 1e15;

fn poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if !(lambda > 0.0) {
        return 0;
    }
    if lambda > POISSON_DIRECT_LIMIT {
        return lambda.round() as u64;
    }
    Poisson::new(lambda).expect("positive finite mean").sample(rng) as u64
}

pub fn sample_typical_segment<R: Rng + ?Sized>(
    d: usize,
    j: usize,
    t: f64,
    rng: &mut R,
) -> Result<PalmSegmentSample, PalmError> {
    let birth_times = sample_birth_times(d, j, t, rng)?;
    let rate = birth_times[d - 2];
    let e: f64 = Exp1.sample(rng);
    let length = if j == 0 {
        e / rate
    } else {
        // length-biased exponential
        let e2: f64 = Exp1.sample(rng);
        (e + e2) / rate
    };
    let a = vertex_rate(&birth_times, d, t).max(0.0);
    let internal_vertices = poisson(length * a, rng);
    Ok(PalmSegmentSample { birth_times, length, internal_vertices, j, d, t })
}
