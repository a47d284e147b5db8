use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::mc::{mean_half_width, proportion_half_width};

/// Monte-Carlo ratio estimates on an `x` grid, with 95% intervals and the
/// theoretical limit they should approach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCurve {
    pub name: String,
    pub x_grid: Vec<f64>,
    pub point: Vec<f64>,
    pub half_width: Vec<f64>,
    pub n_effective: Vec<u64>,
    /// Raw event counts behind each point (empty for mean-type curves).
    #[serde(default)]
    pub hits: Vec<u64>,
    /// Limit value; may be `+∞`, serialized as the string `"Infinity"`.
    #[serde(with = "extended_real")]
    pub target: f64,
    /// Uncertainty of the target itself when it is estimated.
    #[serde(default)]
    pub target_half_width: f64,
    pub target_ref: String,
}

impl RatioCurve {
    /// Curve of `hits_i / (n_i · denom_i)` with binomial intervals.
    pub fn from_hits(name: &str, x_grid: &[f64], hits: &[u64], n_eff: &[u64], denom: &[f64]) -> Self {
        let mut point = Vec::with_capacity(x_grid.len());
        let mut half_width = Vec::with_capacity(x_grid.len());
        for i in 0..x_grid.len() {
            let n = n_eff[i].max(1) as f64;
            point.push(hits[i] as f64 / n / denom[i]);
            half_width.push(proportion_half_width(hits[i], n_eff[i]) / denom[i]);
        }
        Self {
            name: name.to_string(),
            x_grid: x_grid.to_vec(),
            point,
            half_width,
            n_effective: n_eff.to_vec(),
            hits: hits.to_vec(),
            target: f64::NAN,
            target_half_width: 0.0,
            target_ref: String::new(),
        }
    }

    /// Curve of sample means from per-point sums and sums of squares.
    pub fn from_moments(name: &str, x_grid: &[f64], sums: &[f64], sums_sq: &[f64], n: u64) -> Self {
        let nf = n.max(1) as f64;
        Self {
            name: name.to_string(),
            x_grid: x_grid.to_vec(),
            point: sums.iter().map(|s| s / nf).collect(),
            half_width: sums.iter().zip(sums_sq).map(|(s, q)| mean_half_width(*s, *q, n)).collect(),
            n_effective: vec![n; x_grid.len()],
            hits: Vec::new(),
            target: f64::NAN,
            target_half_width: 0.0,
            target_ref: String::new(),
        }
    }

    pub fn with_target(mut self, target: f64, target_half_width: f64, target_ref: impl Into<String>) -> Self {
        self.target = target;
        self.target_half_width = target_half_width;
        self.target_ref = target_ref.into();
        self
    }

    pub fn len(&self) -> usize {
        self.x_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_grid.is_empty()
    }

    /// Half-width combining the point interval with the target's own uncertainty.
    pub fn combined_half_width(&self, i: usize) -> f64 {
        self.half_width[i].hypot(self.target_half_width)
    }

    /// `|point − target| ≤ k · combined half-width` at grid index `i`.
    pub fn within(&self, i: usize, k: f64) -> bool {
        if self.target.is_infinite() {
            return false;
        }
        (self.point[i] - self.target).abs() <= k * self.combined_half_width(i)
    }

    pub fn ci_low(&self, i: usize) -> f64 {
        self.point[i] - self.half_width[i]
    }

    pub fn ci_high(&self, i: usize) -> f64 {
        self.point[i] + self.half_width[i]
    }
}

/// Serde adapter writing non-finite reals as `"Infinity"`, `"-Infinity"`, `"NaN"`.
pub mod extended_real {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("NaN")
        } else if *v > 0.0 {
            s.serialize_str("Infinity")
        } else {
            s.serialize_str("-Infinity")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "Infinity" => Ok(f64::INFINITY),
                "-Infinity" => Ok(f64::NEG_INFINITY),
                "NaN" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}
