//! Ascending-ladder decomposition of the supremum: `M` has the law of a
//! geometric number `ν` of i.i.d. ladder heights `ψ_i`, with
//! `P(ν = n) = p (1 − p)^n` and `p = P(M = 0)`.

use serde::{Deserialize, Serialize};

use super::curve::RatioCurve;
use super::mc::{proportion_half_width, run_replications, Merge, DEFAULT_CAP};
use crate::distributions::IncrementModel;
use crate::error::{Error, Result};
use crate::rng::RngState;
use crate::walk_engine::{first_ascent, supremum_until_floor, validate_levels, Ascent, ModelSource};

const STREAM_EXCURSION: u64 = 0x1add;
const STREAM_SUPREMUM: u64 = 0x5a9e;
const STREAM_COMPOSE: u64 = 0xc0de;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    /// Excursions from 0 used for `p̂` and the ladder-height sample.
    pub n_cycles: u64,
    /// Size of each of the two samples compared by the KS test.
    pub ks_samples: u64,
    pub floor: f64,
    pub c: f64,
    pub x_grid: Vec<f64>,
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default = "default_cap")]
    pub cap: u64,
}

fn default_cap() -> u64 {
    DEFAULT_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderStats {
    /// Fraction of excursions reaching `−floor` before rising above 0.
    /// Stopping at the floor biases this upward by at most `P(ψ-free descent
    /// to −floor, later ascent)`.
    pub p_hat: f64,
    pub p_half_width: f64,
    /// Ladder heights `S_η` from excursions that rose above 0.
    #[serde(skip)]
    pub psi_samples: Vec<f64>,
    pub psi_count: u64,
    /// `P̂(ψ ∈ (x, x + c]) / F̄(x)`, target `p c / ((1 − p) m)`.
    pub window_ratio: RatioCurve,
    /// `P̂(ψ₁ + ψ₂ ∈ (x, x + c]) / F̄(x)`, target `2 p c / ((1 − p) m)`.
    pub t2_window_ratio: RatioCurve,
    /// Two-sample KS statistic between direct `M` and the geometric compound.
    pub ks_distance: f64,
    /// 5% critical value `1.36 √(2/n)` for the KS statistic.
    pub ks_critical: f64,
    pub n_capped: u64,
}

#[derive(Clone, Default)]
struct Excursions {
    n: u64,
    floored: u64,
    capped: u64,
    heights: Vec<f64>,
}

impl Merge for Excursions {
    fn merge(&mut self, mut o: Self) {
        self.n += o.n;
        self.floored += o.floored;
        self.capped += o.capped;
        self.heights.append(&mut o.heights);
    }
}

#[derive(Clone, Default)]
struct Samples {
    values: Vec<f64>,
    capped: u64,
}

impl Merge for Samples {
    fn merge(&mut self, mut o: Self) {
        self.values.append(&mut o.values);
        self.capped += o.capped;
    }
}

/// Two-sample Kolmogorov–Smirnov statistic; ties across samples are
/// processed together so atoms (here at 0) are compared correctly.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

fn window_hits(values: &[f64], x_grid: &[f64], c: f64) -> Vec<u64> {
    x_grid.iter().map(|&x| values.iter().filter(|&&v| v > x && v <= x + c).count() as u64).collect()
}

pub fn estimate_ladder_decomposition(model: &IncrementModel, cfg: &LadderConfig) -> Result<LadderStats> {
    validate_levels(&cfg.x_grid)?;
    if !(cfg.c > 0.0) || !(cfg.floor > 0.0) || cfg.n_cycles == 0 || cfg.ks_samples == 0 || cfg.cap == 0 {
        return Err(Error::InvalidParameter("ladder config needs positive c, floor, n_cycles, ks_samples and cap".into()));
    }
    let (floor, cap) = (cfg.floor, cfg.cap);
    let exc = run_replications(cfg.n_cycles, cfg.seed, STREAM_EXCURSION, cfg.workers, Excursions::default, |acc, rng| {
        acc.n += 1;
        match first_ascent(&mut ModelSource::new(model, rng), floor, cap) {
            Ascent::Height(h) => acc.heights.push(h),
            Ascent::Floored => acc.floored += 1,
            Ascent::Capped => acc.capped += 1,
        }
    });
    let n_eff = exc.n - exc.capped;
    let p_hat = exc.floored as f64 / n_eff.max(1) as f64;
    if !(p_hat > 0.0 && p_hat < 1.0) {
        return Err(Error::DegeneratePHat(p_hat));
    }
    let m_abs = model.drift();
    let psi = exc.heights;
    let tails: Vec<f64> = cfg.x_grid.iter().map(|&x| model.tail(x)).collect();
    let k = cfg.x_grid.len();
    let scale = p_hat * cfg.c / ((1.0 - p_hat) * m_abs);

    let n_psi = psi.len() as u64;
    let window_ratio = RatioCurve::from_hits("psi_window_ratio", &cfg.x_grid, &window_hits(&psi, &cfg.x_grid, cfg.c), &vec![n_psi; k], &tails)
        .with_target(scale, 0.0, "p c / ((1 - p) m) with p estimated");
    let pairs: Vec<f64> = psi.chunks_exact(2).map(|w| w[0] + w[1]).collect();
    let t2_window_ratio =
        RatioCurve::from_hits("t2_window_ratio", &cfg.x_grid, &window_hits(&pairs, &cfg.x_grid, cfg.c), &vec![pairs.len() as u64; k], &tails)
            .with_target(2.0 * scale, 0.0, "lower limit 2 p c / ((1 - p) m) with p estimated");

    let direct = run_replications(cfg.ks_samples, cfg.seed, STREAM_SUPREMUM, cfg.workers, Samples::default, |acc, rng| {
        let (m, capped) = supremum_until_floor(&mut ModelSource::new(model, rng), floor, cap);
        if capped {
            acc.capped += 1;
        } else {
            acc.values.push(m);
        }
    });
    let composed = run_replications(cfg.ks_samples, cfg.seed, STREAM_COMPOSE, cfg.workers, Samples::default, |acc, rng| {
        acc.values.push(geometric_compound(&psi, p_hat, rng));
    });
    let (mut a, mut b) = (direct.values, composed.values);
    let ks_distance = ks_two_sample(&mut a, &mut b);
    let ks_critical = 1.36 * (1.0 / a.len() as f64 + 1.0 / b.len() as f64).sqrt();

    Ok(LadderStats {
        p_hat,
        p_half_width: proportion_half_width(exc.floored, n_eff),
        psi_count: n_psi,
        psi_samples: psi,
        window_ratio,
        t2_window_ratio,
        ks_distance,
        ks_critical,
        n_capped: exc.capped + direct.capped,
    })
}

/// `Σ_{i≤ν} ψ_i` with `ν` geometric on `{0, 1, …}` (success probability `p`)
/// and `ψ_i` resampled from `psi`.
fn geometric_compound(psi: &[f64], p: f64, rng: &mut RngState) -> f64 {
    let mut total = 0.0;
    while rng.aux_uniform() >= p {
        total += psi[rng.aux_index(psi.len())];
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Family;

    #[test]
    fn ks_handles_atoms() {
        let mut a = vec![0.0, 0.0, 1.0, 2.0];
        let mut b = vec![0.0, 0.0, 1.0, 2.0];
        assert_eq!(ks_two_sample(&mut a, &mut b), 0.0);
        let mut c = vec![0.0, 0.0, 0.0, 2.0];
        assert!((ks_two_sample(&mut a, &mut c) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn degenerate_walk_is_flagged() {
        let m = IncrementModel::new(Family::lattice(1.0, 3.0)).unwrap();
        let cfg = LadderConfig { n_cycles: 1000, ks_samples: 100, floor: 5.0, c: 1.0, x_grid: vec![1.0], seed: 1, workers: None, cap: 1000 };
        assert!(matches!(estimate_ladder_decomposition(&m, &cfg), Err(Error::DegeneratePHat(p)) if p == 1.0));
    }

    #[test]
    fn lattice_p_matches_exact_no_ascent_probability() {
        // for skip-free walks P(M = 0) = m / q (from E τ = q/m and the ladder identity)
        let m = IncrementModel::new(Family::lattice(0.7, 3.0)).unwrap();
        let cfg = LadderConfig { n_cycles: 200_000, ks_samples: 20_000, floor: 400.0, c: 1.0, x_grid: vec![5.0], seed: 5, workers: None, cap: 1 << 30 };
        let s = estimate_ladder_decomposition(&m, &cfg).unwrap();
        let want = m.drift() / 0.7;
        assert!((s.p_hat - want).abs() < 3.0 * s.p_half_width + 1e-4, "{} vs {want}", s.p_hat);
        assert!(s.ks_distance < s.ks_critical, "{} {}", s.ks_distance, s.ks_critical);
    }
}
