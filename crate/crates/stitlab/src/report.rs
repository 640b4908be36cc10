use serde::{Deserialize, Serialize};

/// Outcome of one statistical or deterministic check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    #[serde(with = "extended")]
    pub statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_value: Option<f64>,
    /// Confidence interval or acceptance band, when the check is interval based.
    #[serde(skip_serializing_if = "Option::is_none", default, with = "extended_band")]
    pub ci: Option<[f64; 2]>,
    pub sample_sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Significance level for p-value checks, tolerance otherwise.
    pub threshold: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub detail: String,
}

impl TestReport {
    /// Passes when `p_value > alpha`.
    pub fn from_p_value(name: impl Into<String>, statistic: f64, p_value: f64, alpha: f64, sample_sizes: Vec<usize>) -> Self {
        Self {
            name: name.into(),
            statistic,
            p_value: Some(p_value),
            ci: None,
            sample_sizes,
            seeds: Vec::new(),
            threshold: alpha,
            passed: p_value > alpha,
            detail: String::new(),
        }
    }

    /// Passes when `|value − target| <= tolerance`; `ci` records the band.
    pub fn within(name: impl Into<String>, value: f64, target: f64, tolerance: f64, sample_sizes: Vec<usize>) -> Self {
        Self {
            name: name.into(),
            statistic: value,
            p_value: None,
            ci: Some([target - tolerance, target + tolerance]),
            sample_sizes,
            seeds: Vec::new(),
            threshold: tolerance,
            passed: (value - target).abs() <= tolerance,
            detail: String::new(),
        }
    }

    /// Passes only on exact equality (infinities included).
    pub fn exact(name: impl Into<String>, value: f64, target: f64) -> Self {
        Self {
            name: name.into(),
            statistic: value,
            p_value: None,
            ci: Some([target, target]),
            sample_sizes: Vec::new(),
            seeds: Vec::new(),
            threshold: 0.0,
            passed: value == target,
            detail: String::new(),
        }
    }

    pub fn with_seeds(mut self, seeds: &[u64]) -> Self {
        self.seeds = seeds.to_vec();
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

/// JSON has no infinities: non-finite values travel as `"inf"`, `"-inf"`
/// or `"nan"`; finite ones stay numbers.
mod extended {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        match *x {
            x if x.is_finite() => s.serialize_f64(x),
            x if x.is_nan() => s.serialize_str("nan"),
            x if x > 0.0 => s.serialize_str("inf"),
            _ => s.serialize_str("-inf"),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(de::Error::custom(format!("not a number: {t:?}"))),
            },
        }
    }
}

mod extended_band {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Band(#[serde(with = "super::extended")] f64, #[serde(with = "super::extended")] f64);

    pub fn serialize<S: Serializer>(x: &Option<[f64; 2]>, s: S) -> Result<S::Ok, S::Error> {
        x.map(|[a, b]| Band(a, b)).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<[f64; 2]>, D::Error> {
        Ok(Option::<Band>::deserialize(d)?.map(|Band(a, b)| [a, b]))
    }
}
