//! Classical test statistics with asymptotic p-values.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Two-sided 97.5% standard normal quantile.
pub const Z_975: f64 = 1.959_963_984_540_054;

/// Expected count below which adjacent χ² bins are pooled.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// Survival function of the Kolmogorov distribution,
/// `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2k²λ²)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

// Stephens' small-sample correction of the scaled statistic
fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let s = n_eff.sqrt();
    kolmogorov_q((s + 0.12 + 0.11 / s) * d)
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> TestOutcome {
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d = 0.0f64;
    for (i, v) in x.iter().enumerate() {
        let f = cdf(*v);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    TestOutcome { statistic: d, p_value: ks_p_value(d, n) }
}

/// Two-sample Kolmogorov–Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> TestOutcome {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    TestOutcome { statistic: d, p_value: ks_p_value(d, na * nb / (na + nb)) }
}

/// Mann–Whitney U test with tie correction and continuity correction.
/// The statistic is the standardized `U` of the first sample.
pub fn mann_whitney(a: &[f64], b: &[f64]) -> TestOutcome {
    let mut all: Vec<(f64, bool)> = a.iter().map(|&x| (x, true)).chain(b.iter().map(|&x| (x, false))).collect();
    all.sort_by(|p, q| p.0.total_cmp(&q.0));
    let n = all.len();
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let mut rank_sum = 0.0;
    let mut ties = 0.0;
    let mut i = 0;
    while i < n {
        let mut k = i;
        while k + 1 < n && all[k + 1].0 == all[i].0 {
            k += 1;
        }
        // ranks i+1 ..= k+1 share their average
        let rank = 0.5 * ((i + 1) + (k + 1)) as f64;
        let size = (k - i + 1) as f64;
        ties += size * size * size - size;
        rank_sum += rank * all[i..=k].iter().filter(|e| e.1).count() as f64;
        i = k + 1;
    }
    let u = rank_sum - n1 * (n1 + 1.0) / 2.0;
    let nn = n as f64;
    let var = n1 * n2 / 12.0 * ((nn + 1.0) - ties / (nn * (nn - 1.0)));
    if !(var > 0.0) {
        return TestOutcome { statistic: 0.0, p_value: 1.0 };
    }
    let diff = u - n1 * n2 / 2.0;
    let z = (diff.abs() - 0.5).max(0.0) * diff.signum() / var.sqrt();
    TestOutcome { statistic: z, p_value: two_sided_normal(z) }
}

pub fn two_sided_normal(z: f64) -> f64 {
    let n = Normal::standard();
    (2.0 * n.sf(z.abs())).min(1.0)
}

pub fn chi_square_sf(x: f64, dof: usize) -> f64 {
    ChiSquared::new(dof as f64).expect("positive degrees of freedom").sf(x)
}

/// Pearson χ² outcome together with the number of bins after pooling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub bins: usize,
    pub dof: usize,
}

/// Pearson χ² goodness of fit for ordered bins. Adjacent bins are merged
/// left to right until each has expected count at least [`MIN_EXPECTED`];
/// a short remainder joins the last pooled bin. `probs` must sum to one.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> ChiSquareOutcome {
    assert_eq!(observed.len(), probs.len());
    let n: u64 = observed.iter().sum();
    let nf = n as f64;
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (obs, p) in observed.iter().zip(probs) {
        o += *obs as f64;
        e += p * nf;
        if e >= MIN_EXPECTED {
            pooled.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => pooled.push((o, e)),
        }
    }
    let statistic: f64 = pooled.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let bins = pooled.len();
    if bins < 2 {
        return ChiSquareOutcome { statistic, p_value: 1.0, bins, dof: 0 };
    }
    let dof = bins - 1;
    ChiSquareOutcome { statistic, p_value: chi_square_sf(statistic, dof), bins, dof }
}

/// Index-of-dispersion test of counts against Poisson(`mean`):
/// `D = Σ (x − μ)²/μ` has mean `n` and variance `n(2 + 1/μ)` under the
/// null; the statistic is the standardized `D`.
pub fn poisson_dispersion(counts: &[u64], mean: f64) -> TestOutcome {
    let n = counts.len() as f64;
    let d: f64 = counts.iter().map(|&x| (x as f64 - mean).powi(2) / mean).sum();
    let z = (d - n) / (n * (2.0 + 1.0 / mean)).sqrt();
    TestOutcome { statistic: z, p_value: two_sided_normal(z) }
}

/// Sample mean with a normal-approximation 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    pub half_width: f64,
    pub sd: f64,
    pub n: usize,
}

impl MeanCi {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        let nf = n as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let sd = if n > 1 { (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt() } else { 0.0 };
        Self { mean, half_width: Z_975 * sd / nf.sqrt(), sd, n }
    }

    pub fn standard_error(&self) -> f64 {
        self.sd / (self.n as f64).sqrt()
    }

    pub fn interval(&self) -> [f64; 2] {
        [self.mean - self.half_width, self.mean + self.half_width]
    }

    pub fn overlaps(&self, other: &MeanCi) -> bool {
        (self.mean - other.mean).abs() <= self.half_width + other.half_width
    }
}
