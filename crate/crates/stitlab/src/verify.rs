//! Goodness-of-fit and two-sample checks, replication-parallel estimators of
//! both sides of the Mecke-type identity, and the edge-corrected segment
//! intensity estimator.

use rayon::prelude::*;
use stitlab_core::analytics::{self, AnalyticsError, DistributionSpec};
use stitlab_core::engine::{EngineError, Simulator, TessellationState};
use stitlab_core::geometry::{ConvexPolytope, Segment};
use stitlab_core::mecke::{self, Functional, MeckeError, MeckeSetup};
use stitlab_core::palm::PalmError;
use stitlab_core::stream::stream;
use thiserror::Error;

use crate::report::TestReport;
use crate::stats::{self, MeanCi};

pub const DEFAULT_ALPHA: f64 = 0.01;
pub const DEFAULT_MIN_SAMPLES: usize = 1000;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("{test}: {got} samples, at least {needed} required")]
    InsufficientSamples { test: String, needed: usize, got: usize },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Mecke(#[from] MeckeError),
    #[error(transparent)]
    Palm(#[from] PalmError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub alpha: f64,
    pub min_samples: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { alpha: DEFAULT_ALPHA, min_samples: DEFAULT_MIN_SAMPLES }
    }
}

impl Thresholds {
    fn require(&self, test: &str, got: usize) -> Result<(), VerifyError> {
        if got < self.min_samples {
            return Err(VerifyError::InsufficientSamples { test: test.to_owned(), needed: self.min_samples, got });
        }
        Ok(())
    }
}

/// Runs `f(0..reps)` on the rayon pool; results come back in index order,
/// so aggregates do not depend on the number of threads.
pub fn replicate<T, E, F>(reps: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    (0..reps as u64).into_par_iter().map(f).collect()
}

/// KS test of samples against a continuous CDF.
pub fn ks_against(
    name: &str,
    samples: &[f64],
    cdf: impl Fn(f64) -> f64,
    th: &Thresholds,
) -> Result<TestReport, VerifyError> {
    th.require(name, samples.len())?;
    let r = stats::ks_one_sample(samples, cdf);
    Ok(TestReport::from_p_value(name, r.statistic, r.p_value, th.alpha, vec![samples.len()]))
}

/// KS test of last birth times `s_{d−1}` against `(s/t)^{d−j}`.
pub fn gof_birth_times(samples: &[f64], d: usize, j: usize, t: f64, th: &Thresholds) -> Result<TestReport, VerifyError> {
    DistributionSpec::new(d, j)?.with_t(t).validate()?;
    ks_against(&format!("birth times d={d} j={j} t={t}"), samples, |s| analytics::last_birth_cdf(s, d, j, t), th)
}

/// `p1j(0..=n_max)` with `n_max` the first count past the mode whose expected
/// frequency among `n` samples drops below the pooling threshold (at most
/// `cap`).
pub fn p1j_table_for(d: usize, j: usize, n: usize, cap: u64) -> Result<Vec<f64>, VerifyError> {
    let spec = DistributionSpec::new(d, j)?;
    let mut table = Vec::new();
    let mut mass = 0.0;
    for k in 0..=cap {
        let p = analytics::p1j(k, &spec)?.value;
        table.push(p);
        mass += p;
        if p * (n as f64) < stats::MIN_EXPECTED && mass > 0.5 {
            break;
        }
    }
    Ok(table)
}

/// χ² test of internal-vertex counts against the `p1j` table; the counts
/// beyond the table share one tail bin.
pub fn gof_internal_vertices(samples: &[u64], d: usize, j: usize, th: &Thresholds) -> Result<TestReport, VerifyError> {
    let name = format!("internal vertices d={d} j={j}");
    th.require(&name, samples.len())?;
    let table = p1j_table_for(d, j, samples.len(), 5000)?;
    Ok(chi_square_against_table(&name, samples, &table, th))
}

/// χ² of counts against `table[k] = P(N = k)`, with a tail bin holding
/// `1 − Σ table` and every count past the table.
pub fn chi_square_against_table(name: &str, samples: &[u64], table: &[f64], th: &Thresholds) -> TestReport {
    let k = table.len();
    let mut observed = vec![0u64; k + 1];
    for &x in samples {
        observed[(x as usize).min(k)] += 1;
    }
    let mut probs = table.to_vec();
    probs.push((1.0 - table.iter().sum::<f64>()).max(0.0));
    let r = stats::chi_square_gof(&observed, &probs);
    TestReport::from_p_value(name, r.statistic, r.p_value, th.alpha, vec![samples.len()])
        .with_detail(format!("{} pooled bins, {} dof", r.bins, r.dof))
}

/// Pearson χ² for categorical data with given cell probabilities.
pub fn chi_square_categories(name: &str, observed: &[u64], probs: &[f64], th: &Thresholds) -> Result<TestReport, VerifyError> {
    let n: u64 = observed.iter().sum();
    th.require(name, n as usize)?;
    let r = stats::chi_square_gof(observed, probs);
    Ok(TestReport::from_p_value(name, r.statistic, r.p_value, th.alpha, vec![n as usize])
        .with_detail(format!("{} dof", r.dof)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    /// Two-sample Kolmogorov–Smirnov.
    Continuous,
    /// Mann–Whitney, which tolerates ties.
    Discrete,
}

pub fn two_sample(name: &str, a: &[f64], b: &[f64], kind: SampleKind, th: &Thresholds) -> Result<TestReport, VerifyError> {
    th.require(name, a.len().min(b.len()))?;
    let r = match kind {
        SampleKind::Continuous => stats::ks_two_sample(a, b),
        SampleKind::Discrete => stats::mann_whitney(a, b),
    };
    let label = match kind {
        SampleKind::Continuous => "two-sample KS",
        SampleKind::Discrete => "Mann-Whitney",
    };
    Ok(TestReport::from_p_value(name, r.statistic, r.p_value, th.alpha, vec![a.len(), b.len()]).with_detail(label))
}

/// Index-of-dispersion test of counts against Poisson(`mean`).
pub fn poisson_dispersion(name: &str, counts: &[u64], mean: f64, th: &Thresholds) -> Result<TestReport, VerifyError> {
    th.require(name, counts.len())?;
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(VerifyError::Invalid(format!("{name}: Poisson mean must be positive")));
    }
    let r = stats::poisson_dispersion(counts, mean);
    Ok(TestReport::from_p_value(name, r.statistic, r.p_value, th.alpha, vec![counts.len()]).with_detail("dispersion z"))
}

/// Mean and 95% CI of the left side over `reps` replications.
pub fn mecke_lhs<P: ConvexPolytope<D> + Sync, const D: usize>(
    sim: &Simulator<D>,
    setup: &MeckeSetup<P>,
    functional: &Functional,
    reps: usize,
    seed: u64,
) -> Result<MeanCi, VerifyError> {
    let xs = replicate(reps, |r| mecke::lhs_replication(sim, setup, functional, &mut stream(seed, "mecke-lhs", r)))?;
    Ok(MeanCi::of(&xs))
}

/// Mean and 95% CI of the right side over `reps` replications.
pub fn mecke_rhs<P: ConvexPolytope<D> + Sync, const D: usize>(
    sim: &Simulator<D>,
    setup: &MeckeSetup<P>,
    functional: &Functional,
    reps: usize,
    grid: &[f64],
    inner_mc: usize,
    seed: u64,
) -> Result<MeanCi, VerifyError> {
    let xs = replicate(reps, |r| {
        mecke::rhs_replication(sim, setup, functional, grid, inner_mc, &mut stream(seed, "mecke-rhs", r))
    })?;
    Ok(MeanCi::of(&xs))
}

/// Edge-correction weight of a segment observed unclipped in `window` with
/// midpoint in `inner`: `|inner| / |{m ∈ inner : m ± (L/2)u ∈ window}|`,
/// the inverse chance that a copy of it dropped uniformly into `inner`
/// stays inside the window. `None` if no placement fits.
pub fn edge_weight<P>(window: &P, inner: &P, segment: &Segment<2>) -> Option<f64>
where
    P: ConvexPolytope<2, Facet = Segment<2>>,
{
    let half = [0.5 * (segment.b[0] - segment.a[0]), 0.5 * (segment.b[1] - segment.a[1])];
    let admissible = inner
        .intersect(&window.translated(&half))
        .and_then(|(p, _)| p.intersect(&window.translated(&[-half[0], -half[1]])))
        .map(|(p, _)| p.volume())?;
    (admissible > 0.0).then(|| inner.volume() / admissible)
}

/// Unbiased estimate of the planar maximal-segment intensity (midpoints per
/// unit area) from one state: the [`edge_weight`]s of the minus-sampled
/// segments, per unit area of `inner`.
pub fn ht_segment_intensity<P>(state: &TessellationState<P, 2>, inner: &P) -> Result<f64, VerifyError>
where
    P: ConvexPolytope<2, Facet = Segment<2>>,
{
    let mut total = 0.0;
    for s in state.extract_typical_segments_2d(inner)? {
        total += edge_weight(state.window(), inner, &s.segment)
            .ok_or_else(|| VerifyError::Invalid("observed segment has no admissible midpoint region".into()))?;
    }
    Ok(total / inner.volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use stitlab_core::geometry::Polygon;
    use stitlab_core::measure::{DirectionalDistribution, HyperplaneMeasure};
    use rand::Rng;
    use stitlab_core::stream::StreamRng;

    #[test]
    fn refuses_small_samples() {
        let th = Thresholds::default();
        let e = gof_birth_times(&[0.5; 999], 2, 0, 1.0, &th).unwrap_err();
        assert!(matches!(e, VerifyError::InsufficientSamples { needed: 1000, got: 999, .. }));
        assert!(poisson_dispersion("x", &[1; 10], 1.0, &th).is_err());
    }

    #[test]
    fn null_calibration_of_birth_time_test() {
        // samples from the target law itself: about 99% of tests pass
        let th = Thresholds::default();
        let passes = (0..100)
            .filter(|&k| {
                let mut rng: StreamRng = stream(11, "calib", k);
                let xs: Vec<f64> = (0..1000).map(|_| rng.random::<f64>().sqrt()).collect();
                gof_birth_times(&xs, 2, 0, 1.0, &th).unwrap().passed
            })
            .count();
        assert!(passes >= 95, "{passes}");
    }

    #[test]
    fn table_tail_bin_collects_the_rest() {
        let th = Thresholds::default();
        let r = chi_square_against_table("t", &[0, 0, 1, 7, 9, 0, 1, 1, 2, 0], &[0.4, 0.3, 0.2], &th);
        assert_eq!(r.sample_sizes, vec![10]);
        assert!(r.passed);
    }

    #[test]
    fn undivided_window_has_zero_intensity() {
        let w = Polygon::rectangle(0.0, 0.0, 10.0, 10.0).unwrap();
        let inner = Polygon::rectangle(3.0, 3.0, 7.0, 7.0).unwrap();
        let y = TessellationState::new(w).unwrap();
        assert_eq!(ht_segment_intensity(&y, &inner).unwrap(), 0.0);
    }

    #[test]
    fn intensity_estimator_weights_are_at_least_one() {
        let sim = Simulator::new(HyperplaneMeasure::new(DirectionalDistribution::axis_parallel()));
        let w = Polygon::rectangle(0.0, 0.0, 10.0, 10.0).unwrap();
        let inner = Polygon::rectangle(3.0, 3.0, 7.0, 7.0).unwrap();
        let y = sim.run(w, 2.0, &mut stream(3, "ht", 0)).unwrap();
        let raw = y.extract_typical_segments_2d(&inner).unwrap().len() as f64 / inner.volume();
        assert!(ht_segment_intensity(&y, &inner).unwrap() >= raw);
    }
}
