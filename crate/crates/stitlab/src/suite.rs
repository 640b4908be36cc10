//! The scripted acceptance suite: nine criteria tying the simulation engine,
//! the Palm sampler and the analytic laws together. Every criterion draws
//! from its own named streams of the master seed.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use stitlab_core::analytics::{self, DistributionSpec};
use stitlab_core::engine::{Simulator, TessellationState, TypicalSegment};
use stitlab_core::geometry::{ConvexPolytope, Hyperplane, Point, Polygon};
use stitlab_core::measure::{DirectionalDistribution, HyperplaneMeasure};
use stitlab_core::mecke::{uniform_grid, Functional, MeckeSetup};
use stitlab_core::stream::{stream, stream_id};

use crate::batch;
use crate::config::{at_least, positive, ConfigError};
use crate::report::TestReport;
use crate::stats::{MeanCi, Z_975};
use crate::verify::{self, replicate, SampleKind, Thresholds, VerifyError};

pub const REPORT_FORMAT: &str = "stitlab-acceptance/1";

/// `(id, title, runtime budget in seconds)`.
pub const CRITERIA: [(u32, &str, f64); 9] = [
    (1, "golden constants", 1.0),
    (2, "moments", 30.0),
    (3, "Palm sampler vs quadrature", 120.0),
    (4, "window internal vertices", 300.0),
    (5, "window birth times", 120.0),
    (6, "line sections", 120.0),
    (7, "Mecke-type formula", 900.0),
    (8, "STIT stability and scaling", 600.0),
    (9, "first jump", 60.0),
];

// desk-scale planar geometry
const DESK_LO: f64 = 0.0;
const DESK_HI: f64 = 20.0;
const INNER_LO: f64 = 5.0;
const INNER_HI: f64 = 15.0;

// replications simulated per round while collecting window segments
const SEGMENT_ROUND: u64 = 32;

fn desk() -> Polygon {
    Polygon::rectangle(DESK_LO, DESK_LO, DESK_HI, DESK_HI).expect("desk window")
}

fn inner() -> Polygon {
    Polygon::rectangle(INNER_LO, INNER_LO, INNER_HI, INNER_HI).expect("inner window")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcceptanceConfig {
    /// Criterion ids to run.
    pub criteria: Vec<u32>,
    pub alpha: f64,
    pub palm_samples: usize,
    /// Minimum number of minus-sampled segments per measure.
    pub window_segments: usize,
    pub window_t: f64,
    pub probe_count: usize,
    pub probe_t: f64,
    pub mecke_replications: usize,
    pub mecke_grid_intervals: usize,
    pub mecke_inner_mc: usize,
    pub stability_replications: usize,
    pub intensity_replications: usize,
    pub first_jump_replications: usize,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        Self {
            criteria: CRITERIA.iter().map(|c| c.0).collect(),
            alpha: 0.01,
            palm_samples: 1_000_000,
            window_segments: 5_000,
            window_t: 2.0,
            probe_count: 10_000,
            probe_t: 2.0,
            mecke_replications: 500,
            mecke_grid_intervals: 40,
            mecke_inner_mc: 1,
            stability_replications: 400,
            intensity_replications: 1_000,
            first_jump_replications: 100_000,
        }
    }
}

impl AcceptanceConfig {
    pub fn validate(&self, path: &str) -> Result<(), ConfigError> {
        for (i, id) in self.criteria.iter().enumerate() {
            if !CRITERIA.iter().any(|c| c.0 == *id) {
                return Err(ConfigError::Field {
                    path: format!("{path}.criteria[{i}]"),
                    message: format!("unknown criterion {id}"),
                });
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ConfigError::Field { path: format!("{path}.alpha"), message: "must lie in (0, 1)".into() });
        }
        positive(&format!("{path}.window_t"), self.window_t)?;
        positive(&format!("{path}.probe_t"), self.probe_t)?;
        for (name, v, min) in [
            ("palm_samples", self.palm_samples, 2),
            ("window_segments", self.window_segments, 1),
            ("probe_count", self.probe_count, 2),
            ("mecke_replications", self.mecke_replications, 2),
            ("mecke_grid_intervals", self.mecke_grid_intervals, 1),
            ("mecke_inner_mc", self.mecke_inner_mc, 1),
            ("stability_replications", self.stability_replications, 2),
            ("intensity_replications", self.intensity_replications, 2),
            ("first_jump_replications", self.first_jump_replications, 2),
        ] {
            at_least(&format!("{path}.{name}"), v, min)?;
        }
        Ok(())
    }

    fn thresholds(&self) -> Thresholds {
        // sample sizes are fixed by the configuration, not by a floor
        Thresholds { alpha: self.alpha, min_samples: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: String,
    pub passed: bool,
    pub runtime_seconds: f64,
    pub budget_seconds: f64,
    pub tests: Vec<TestReport>,
}

impl CriterionReport {
    /// One line: verdict, id, title, runtime and the failing checks.
    pub fn line(&self) -> String {
        let mut s = format!(
            "{} [{}] {} ({:.1} s of {:.0} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.runtime_seconds,
            self.budget_seconds
        );
        let failed: Vec<&str> = self.tests.iter().filter(|t| !t.passed).map(|t| t.name.as_str()).collect();
        if !failed.is_empty() {
            write!(s, "; failing: {}", failed.join(", ")).unwrap();
        }
        if self.runtime_seconds > self.budget_seconds {
            s.push_str("; over time budget");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub format: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub passed: bool,
    pub criteria: Vec<CriterionReport>,
}

fn fmt_num(x: f64) -> String {
    if x == 0.0 || (1e-3..1e5).contains(&x.abs()) {
        format!("{x:.4}")
    } else {
        format!("{x:.3e}")
    }
}

impl SuiteReport {
    /// Human summary: one table of criteria, one of individual checks.
    pub fn markdown(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# Acceptance report\n").unwrap();
        writeln!(s, "master seed `{}`, config `{}`\n", self.master_seed, self.config_hash).unwrap();
        writeln!(s, "| # | criterion | result | runtime (s) | budget (s) |").unwrap();
        writeln!(s, "|---|---|---|---|---|").unwrap();
        for c in &self.criteria {
            writeln!(
                s,
                "| {} | {} | {} | {:.2} | {:.0} |",
                c.id,
                c.title,
                if c.passed { "PASS" } else { "FAIL" },
                c.runtime_seconds,
                c.budget_seconds
            )
            .unwrap();
        }
        writeln!(s, "\n| # | check | statistic | p-value / band | n | result |").unwrap();
        writeln!(s, "|---|---|---|---|---|---|").unwrap();
        for c in &self.criteria {
            for t in &c.tests {
                let band = match (t.p_value, t.ci) {
                    (Some(p), _) => format!("p = {}", fmt_num(p)),
                    (None, Some([a, b])) => format!("[{}, {}]", fmt_num(a), fmt_num(b)),
                    _ => String::new(),
                };
                let n: Vec<String> = t.sample_sizes.iter().map(|n| n.to_string()).collect();
                writeln!(
                    s,
                    "| {} | {} | {} | {} | {} | {} |",
                    c.id,
                    t.name,
                    fmt_num(t.statistic),
                    band,
                    n.join(" / "),
                    if t.passed { "pass" } else { "fail" }
                )
                .unwrap();
            }
        }
        s
    }
}

/// Runs the configured criteria in order, printing nothing.
pub fn run_suite(cfg: &AcceptanceConfig, master_seed: u64, config_hash: &str) -> Result<SuiteReport, VerifyError> {
    let mut criteria = Vec::new();
    for id in &cfg.criteria {
        criteria.push(run_criterion(*id, cfg, master_seed)?);
    }
    Ok(SuiteReport {
        format: REPORT_FORMAT.to_owned(),
        config_hash: config_hash.to_owned(),
        master_seed,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    })
}

pub fn run_criterion(id: u32, cfg: &AcceptanceConfig, seed: u64) -> Result<CriterionReport, VerifyError> {
    let &(_, title, budget) =
        CRITERIA.iter().find(|c| c.0 == id).ok_or_else(|| VerifyError::Invalid(format!("unknown criterion {id}")))?;
    let start = Instant::now();
    let tests = match id {
        1 => golden_constants()?,
        2 => moments()?,
        3 => palm_vs_quadrature(cfg, seed)?,
        4 => window_internal_vertices(cfg, seed)?,
        5 => window_birth_times(cfg, seed)?,
        6 => line_sections(cfg, seed)?,
        7 => mecke_identity(cfg, seed)?,
        8 => stability_and_scaling(cfg, seed)?,
        _ => first_jump(cfg, seed)?,
    };
    let runtime_seconds = start.elapsed().as_secs_f64();
    let tests: Vec<TestReport> = tests.into_iter().map(|t| t.with_seeds(&[seed])).collect();
    Ok(CriterionReport {
        id,
        title: title.to_owned(),
        passed: tests.iter().all(|t| t.passed) && runtime_seconds <= budget,
        runtime_seconds,
        budget_seconds: budget,
        tests,
    })
}

fn golden_constants() -> Result<Vec<TestReport>, VerifyError> {
    let (ln2, ln3) = (std::f64::consts::LN_2, 3f64.ln());
    let spec = DistributionSpec::new(3, 1)?;
    let mut out = Vec::new();
    for (n, target) in [(0, 5.0 + 18.0 * ln2 - 63.0 / 4.0 * ln3), (1, 28.0 + 90.0 * ln2 - 657.0 / 8.0 * ln3)] {
        let e = analytics::p1j(n, &spec)?;
        out.push(
            TestReport::within(format!("p(d=3, j=1, n={n})"), e.value, target, 1e-6, vec![])
                .with_detail(format!("quadrature error {:.1e}", e.error)),
        );
    }
    Ok(out)
}

fn moments() -> Result<Vec<TestReport>, VerifyError> {
    let mut out = Vec::new();
    for (d, j, target) in
        [(2, 0, 2.0), (3, 0, 2.0), (3, 1, 7.0), (4, 1, 6.0), (5, 1, 19.0 / 3.0), (6, 1, 7.0), (2, 1, f64::INFINITY)]
    {
        let m = analytics::mean_internal_vertices(d, j)?;
        out.push(TestReport::exact(format!("closed-form mean d={d} j={j}"), m, target));
    }
    for (d, j) in [(3, 0), (3, 1), (4, 1)] {
        let closed = analytics::mean_internal_vertices(d, j)?;
        let sum = analytics::mean_by_summation(&DistributionSpec::new(d, j)?, 60)?;
        out.push(
            TestReport::within(format!("summed mean d={d} j={j}"), sum.value, closed, 1e-4, vec![])
                .with_detail(format!("quadrature error {:.1e}", sum.error)),
        );
    }
    Ok(out)
}

fn palm_vs_quadrature(cfg: &AcceptanceConfig, seed: u64) -> Result<Vec<TestReport>, VerifyError> {
    let th = cfg.thresholds();
    let mut out = Vec::new();
    for (d, j) in [(2, 0), (3, 0), (3, 1), (4, 1)] {
        let counts = batch::internal_vertex_counts(d, j, 1.0, cfg.palm_samples, stream_id(&format!("c3-d{d}-j{j}"), seed))?;
        out.push(verify::gof_internal_vertices(&counts, d, j, &th)?);
        let xs: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
        let ci = MeanCi::of(&xs);
        let closed = analytics::mean_internal_vertices(d, j)?;
        out.push(
            TestReport::within(format!("sampled mean d={d} j={j}"), ci.mean, closed, 3.0 * ci.standard_error(), vec![ci.n])
                .with_detail(format!("standard error {:.2e}", ci.standard_error())),
        );
    }
    Ok(out)
}

fn planar_measures() -> [(&'static str, Simulator<2>); 2] {
    [
        ("axis-parallel", Simulator::new(HyperplaneMeasure::new(DirectionalDistribution::axis_parallel()))),
        (
            "isotropic",
            Simulator::new(HyperplaneMeasure::new(DirectionalDistribution::isotropic().expect("planar isotropic"))),
        ),
    ]
}

/// Minus-sampled segments from independent desk-window runs, collected
/// round by round until at least `target` are found.
fn collect_segments(sim: &Simulator<2>, t: f64, target: usize, seed: u64, name: &str) -> Result<(Vec<TypicalSegment>, u64), VerifyError> {
    let (w, i) = (desk(), inner());
    let mut out = Vec::new();
    let mut runs = 0;
    while out.len() < target {
        let round = replicate(SEGMENT_ROUND as usize, |k| -> Result<_, VerifyError> {
            let y = sim.run(w.clone(), t, &mut stream(seed, name, runs + k))?;
            Ok(y.extract_typical_segments_2d(&i)?)
        })?;
        out.extend(round.into_iter().flatten());
        runs += SEGMENT_ROUND;
    }
    Ok((out, runs))
}

fn window_internal_vertices(cfg: &AcceptanceConfig, seed: u64) -> Result<Vec<TestReport>, VerifyError> {
    let th = cfg.thresholds();
    let table = verify::p1j_table_for(2, 0, cfg.window_segments, 5000)?;
    let target = analytics::mean_internal_vertices(2, 0)?;
    let mut out = Vec::new();
    for (label, sim) in planar_measures() {
        let (segs, runs) = collect_segments(&sim, cfg.window_t, cfg.window_segments, seed, &format!("c4-{label}"))?;
        let counts: Vec<u64> = segs.iter().map(|s| s.internal_vertices as u64).collect();
        let mean = counts.iter().sum::<u64>() as f64 / counts.len() as f64;
        out.push(
            TestReport::within(format!("{label} mean count"), mean, target, 0.1, vec![counts.len()])
                .with_detail(format!("{runs} windows at t = {}", cfg.window_t)),
        );
        out.push(verify::chi_square_against_table(&format!("{label} count law"), &counts, &table, &th));
    }
    Ok(out)
}

fn window_birth_times(cfg: &AcceptanceConfig, seed: u64) -> Result<Vec<TestReport>, VerifyError> {
    let th = cfg.thresholds();
    let mut out = Vec::new();
    for (label, sim) in planar_measures() {
        let (segs, runs) = collect_segments(&sim, cfg.window_t, cfg.window_segments, seed, &format!("c5-{label}"))?;
        let times: Vec<f64> = segs.iter().map(|s| s.birth_time).collect();
        let mut r = verify::gof_birth_times(&times, 2, 0, cfg.window_t, &th)?;
        r.name = format!("{label} birth times");
        out.push(r.with_detail(format!("{runs} windows")));
    }
    Ok(out)
}

// interior unit probe, axis-aligned
const PROBE: (Point<2>, Point<2>) = ([9.5, 10.0], [10.5, 10.0]);

fn line_sections(cfg: &AcceptanceConfig, seed: u64) -> Result<Vec<TestReport>, VerifyError> {
    let th = cfg.thresholds();
    let t = cfg.probe_t;
    let mut out = Vec::new();
    for ((label, sim), expected) in planar_measures().into_iter().zip([0.5 * t, 2.0 * t / std::f64::consts::PI]) {
        let w = desk();
        let counts = replicate(cfg.probe_count, |r| -> Result<u64, VerifyError> {
            let y = sim.run(w.clone(), t, &mut stream(seed, &format!("c6-{label}"), r))?;
            Ok(y.line_section(&PROBE.0, &PROBE.1)?.len() as u64)
        })?;
        out.push(verify::poisson_dispersion(&format!("{label} chord dispersion"), &counts, expected, &th)?);
        let mean = counts.iter().sum::<u64>() as f64 / counts.len() as f64;
        out.push(TestReport::within(format!("{label} chord mean"), mean, expected, 0.02 * expected, vec![counts.len()]));
    }
    Ok(out)
}

fn mecke_identity(cfg: &AcceptanceConfig, seed: u64) -> Result<Vec<TestReport>, VerifyError> {
    let sim = Simulator::new(HyperplaneMeasure::new(DirectionalDistribution::axis_parallel()));
    let setup = MeckeSetup { window: desk(), localization: inner(), region: inner(), horizon: 1.0 };
    let grid = uniform_grid(1.0, cfg.mecke_grid_intervals);
    let functionals = [
        ("simple", Functional::Simple { phi: |_| 1.0, psi: |l| l / (1.0 + l) }),
        ("nested", Functional::Nested { count: 0 }),
    ];
    let mut out = Vec::new();
    for (label, g) in functionals {
        let s = stream_id(&format!("c7-{label}"), seed);
        let reps = cfg.mecke_replications;
        let lhs = verify::mecke_lhs(&sim, &setup, &g, reps, s)?;
        let rhs = verify::mecke_rhs(&sim, &setup, &g, reps, &grid, cfg.mecke_inner_mc, s)?;
        out.push(
            TestReport::within(format!("{label} LHS - RHS"), lhs.mean - rhs.mean, 0.0, lhs.half_width + rhs.half_width, vec![reps, reps])
                .with_detail(format!(
                    "LHS {:.4} ± {:.4}, RHS {:.4} ± {:.4}",
                    lhs.mean, lhs.half_width, rhs.mean, rhs.half_width
                )),
        );
    }
    Ok(out)
}

const STABILITY_PROBES: [(Point<2>, Point<2>); 2] = [([8.0, 10.0], [12.0, 10.0]), ([10.0, 8.0], [10.0, 12.0])];

/// Cell count, total face length and chord count of `y ∧ region`.
fn region_summary(y: &TessellationState<Polygon, 2>, region: &Polygon) -> Result<[f64; 3], VerifyError> {
    let r = y.restrict(region)?;
    let s = r.summary_statistics(region, &STABILITY_PROBES)?;
    Ok([s.cell_count as f64, s.total_face_measure, s.chord_counts.iter().sum::<usize>() as f64])
}

fn compare_summaries(label: &str, a: &[[f64; 3]], b: &[[f64; 3]], th: &Thresholds) -> Result<Vec<TestReport>, VerifyError> {
    let col = |v: &[[f64; 3]], k: usize| v.iter().map(|x| x[k]).collect::<Vec<_>>();
    Ok(vec![
        verify::two_sample(&format!("{label}: cell count"), &col(a, 0), &col(b, 0), SampleKind::Discrete, th)?,
        verify::two_sample(&format!("{label}: face length"), &col(a, 1), &col(b, 1), SampleKind::Continuous, th)?,
        verify::two_sample(&format!("{label}: chord count"), &col(a, 2), &col(b, 2), SampleKind::Discrete, th)?,
    ])
}

fn stability_and_scaling(cfg: &AcceptanceConfig, seed: u64) -> Result<Vec<TestReport>, VerifyError> {
    let th = cfg.thresholds();
    let sim = Simulator::new(HyperplaneMeasure::new(DirectionalDistribution::axis_parallel()));
    let reps = cfg.stability_replications;
    let (w, region) = (desk(), inner());
    let half = Polygon::rectangle(DESK_LO, DESK_LO, DESK_HI / 2.0, DESK_HI / 2.0).expect("half window");
    let reference = |name: &str| {
        replicate(reps, |r| -> Result<_, VerifyError> {
            region_summary(&sim.run(w.clone(), 1.0, &mut stream(seed, name, r))?, &region)
        })
    };
    let mut out = Vec::new();

    // (a) iterate Y₁ with fresh Y₁ on half the window, then dilate by 2
    let iterated = replicate(reps, |r| -> Result<_, VerifyError> {
        let y = sim.run(half.clone(), 1.0, &mut stream(seed, "c8a", r))?;
        let fresh_name = format!("c8a-fresh-{r}");
        let fresh = (0..y.cells().len() as u64)
            .map(|i| sim.run(half.clone(), 1.0, &mut stream(seed, &fresh_name, i)))
            .collect::<Result<Vec<_>, _>>()?;
        region_summary(&y.iterate(&fresh)?.rescale(2.0)?, &region)
    })?;
    out.extend(compare_summaries("iterate+rescale", &iterated, &reference("c8a-ref")?, &th)?);

    // (b) Y₂ on half the window dilated by 2
    let dilated = replicate(reps, |r| -> Result<_, VerifyError> {
        region_summary(&sim.run(half.clone(), 2.0, &mut stream(seed, "c8b", r))?.rescale(2.0)?, &region)
    })?;
    out.extend(compare_summaries("rescale", &dilated, &reference("c8b-ref")?, &th)?);

    // (c) restriction to the inner window vs a run there
    let direct = replicate(reps, |r| -> Result<_, VerifyError> {
        region_summary(&sim.run(region.clone(), 1.0, &mut stream(seed, "c8c", r))?, &region)
    })?;
    out.extend(compare_summaries("restriction", &reference("c8c-ref")?, &direct, &th)?);

    // intensities
    let intensity = |t: f64, name: &str| -> Result<MeanCi, VerifyError> {
        let xs = replicate(cfg.intensity_replications, |r| -> Result<f64, VerifyError> {
            verify::ht_segment_intensity(&sim.run(w.clone(), t, &mut stream(seed, name, r))?, &region)
        })?;
        Ok(MeanCi::of(&xs))
    };
    let one = intensity(1.0, "c8-intensity-1")?;
    let two = intensity(2.0, "c8-intensity-2")?;
    let expected = analytics::segment_intensity_2d(1.0, 0.5);
    out.push(
        TestReport::within("intensity at t = 1", one.mean, expected, 0.05 * expected, vec![one.n])
            .with_detail(format!("95% CI ± {:.4}", one.half_width)),
    );
    let ratio = two.mean / one.mean;
    let se = ratio * ((one.standard_error() / one.mean).powi(2) + (two.standard_error() / two.mean).powi(2)).sqrt();
    let exponent = analytics::intensity_scaling(2, 1, 0, 1.0).exponent;
    out.push(
        TestReport::within("intensity ratio t = 2 : 1", ratio, 2f64.powi(exponent), Z_975 * se, vec![one.n, two.n])
            .with_detail(format!("intensity at t = 2: {:.4} ± {:.4}", two.mean, two.half_width)),
    );
    Ok(out)
}

fn first_hyperplanes(sim: &Simulator<2>, reps: usize, seed: u64, name: &str) -> Result<Vec<(f64, Hyperplane<2>)>, VerifyError> {
    replicate(reps, |r| -> Result<_, VerifyError> {
        let mut y = TessellationState::new(Polygon::unit_square())?;
        let mut rng = stream(seed, name, r);
        let t = sim.step(&mut y, &mut rng)?.ok_or_else(|| VerifyError::Invalid("window cannot be hit".into()))?;
        Ok((t, y.events()[0].hyperplane.canonical()))
    })
}

fn first_jump(cfg: &AcceptanceConfig, seed: u64) -> Result<Vec<TestReport>, VerifyError> {
    let th = cfg.thresholds();
    let reps = cfg.first_jump_replications;
    let mut out = Vec::new();
    let [(_, axis), (_, iso)] = planar_measures();
    let square = Polygon::unit_square();

    let draws = first_hyperplanes(&axis, reps, seed, "c9-axis-parallel")?;
    let times: Vec<f64> = draws.iter().map(|d| d.0).collect();
    out.push(verify::ks_against("axis-parallel holding time ~ Exp(1)", &times, |x| 1.0 - (-x).exp(), &th)?);
    let vertical = draws.iter().filter(|d| d.1.normal()[0] > 0.5).count() as u64;
    out.push(verify::chi_square_categories("axis-parallel normal direction", &[vertical, reps as u64 - vertical], &[0.5, 0.5], &th)?);
    let offsets: Vec<f64> = draws.iter().map(|d| d.1.offset()).collect();
    out.push(verify::ks_against("axis-parallel offset ~ U(0, 1)", &offsets, |x| x.clamp(0.0, 1.0), &th)?);

    let rate = 4.0 / std::f64::consts::PI;
    let draws = first_hyperplanes(&iso, reps, seed, "c9-isotropic")?;
    let times: Vec<f64> = draws.iter().map(|d| d.0).collect();
    out.push(verify::ks_against("isotropic holding time ~ Exp(4/pi)", &times, |x| 1.0 - (-rate * x).exp(), &th)?);
    let angles: Vec<f64> = draws.iter().map(|d| d.1.normal()[1].atan2(d.1.normal()[0])).collect();
    // normal angle density ∝ |cos θ| + |sin θ| on [0, π)
    let angle_cdf = |a: f64| {
        if a <= std::f64::consts::FRAC_PI_2 {
            (a.sin() + 1.0 - a.cos()) / 4.0
        } else {
            (3.0 - a.sin() - a.cos()) / 4.0
        }
    };
    out.push(verify::ks_against("isotropic normal angle", &angles, angle_cdf, &th)?);
    let relative: Vec<f64> = draws
        .iter()
        .map(|(_, h)| {
            let (lo, hi) = square.support_interval(h.normal());
            (h.offset() - lo) / (hi - lo)
        })
        .collect();
    out.push(verify::ks_against("isotropic offset uniform on support", &relative, |x| x.clamp(0.0, 1.0), &th)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_complete() {
        let c = AcceptanceConfig::default();
        c.validate("acceptance").unwrap();
        assert_eq!(c.criteria, (1..=9).collect::<Vec<_>>());
        let mut bad = c.clone();
        bad.criteria.push(12);
        assert_eq!(bad.validate("acceptance").unwrap_err().to_string(), "acceptance.criteria[9]: unknown criterion 12");
    }

    #[test]
    fn deterministic_criteria_pass() {
        let cfg = AcceptanceConfig::default();
        for id in [1, 2] {
            let r = run_criterion(id, &cfg, 0).unwrap();
            assert!(r.passed, "{}", r.line());
        }
    }

    #[test]
    fn report_renders() {
        let cfg = AcceptanceConfig { criteria: vec![1], ..Default::default() };
        let r = run_suite(&cfg, 3, "h").unwrap();
        let md = r.markdown();
        assert!(md.contains("| 1 | golden constants | PASS |"));
        assert!(md.contains("p(d=3, j=1, n=0)"));
        assert!(r.criteria[0].line().starts_with("PASS [1] golden constants"));
    }
}
