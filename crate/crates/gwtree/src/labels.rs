//! Random edge labellings and vertical profiles: each edge carries an
//! i.i.d. integer displacement eta with mean zero, each vertex the sum
//! of displacements along its root path, and the profile counts
//! vertices per label value. Includes the scaling normalization and
//! the characteristic-function statistic Psi(n,t).

use crate::error::{Error, Result};
use crate::mc::{monte_carlo_mean, EstimateTable};
use crate::offspring::OffspringDist;
use crate::trees::Tree;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DisplacementKind {
    UniformPm1,
    Uniform3,
    CustomFinite,
    /// Single-point mass; bypasses the mean-zero and aperiodicity
    /// checks. For exact-label tests only.
    Deterministic(i64),
}

/// An integer-valued displacement law with E eta = 0, Var eta > 0 and
/// characteristic function != 1 everywhere on (0, pi].
#[derive(Debug, Clone)]
pub struct DisplacementDist {
    kind: DisplacementKind,
    spec: String,
    /// (value, weight) pairs, weights summing to 1.
    support: Vec<(i64, f64)>,
    variance: f64,
}

impl DisplacementDist {
    pub fn pm1() -> Self {
        DisplacementDist {
            kind: DisplacementKind::UniformPm1,
            spec: "pm1".into(),
            support: vec![(-1, 0.5), (1, 0.5)],
            variance: 1.0,
        }
    }

    pub fn uniform3() -> Self {
        let w = 1.0 / 3.0;
        DisplacementDist {
            kind: DisplacementKind::Uniform3,
            spec: "uniform3".into(),
            support: vec![(-1, w), (0, w), (1, w)],
            variance: 2.0 / 3.0,
        }
    }

    /// Degenerate one-point displacement for exact-label tests.
    pub fn deterministic(step: i64) -> Self {
        DisplacementDist {
            kind: DisplacementKind::Deterministic(step),
            spec: format!("deterministic:{step}"),
            support: vec![(step, 1.0)],
            variance: 0.0,
        }
    }

    /// Parse "pm1", "uniform3", or "custom:v1:w1,v2:w2,...".
    pub fn from_spec(spec: &str) -> Result<Self> {
        match spec {
            "pm1" => return Ok(Self::pm1()),
            "uniform3" => return Ok(Self::uniform3()),
            _ => {}
        }
        let body = spec
            .strip_prefix("custom:")
            .ok_or_else(|| Error::UnknownSpec(spec.to_string()))?;
        let mut support = Vec::new();
        for item in body.split(',') {
            let (v, w) = item
                .split_once(':')
                .ok_or_else(|| Error::UnknownSpec(spec.to_string()))?;
            let value: i64 = v
                .trim()
                .parse()
                .map_err(|_| Error::UnknownSpec(spec.to_string()))?;
            let weight: f64 = w
                .trim()
                .parse()
                .map_err(|_| Error::UnknownSpec(spec.to_string()))?;
            if !(weight >= 0.0 && weight.is_finite()) {
                return Err(Error::NegativeWeight {
                    index: support.len(),
                    value: weight,
                });
            }
            support.push((value, weight));
        }
        let total: f64 = support.iter().map(|&(_, w)| w).sum();
        if total <= 0.0 {
            return Err(Error::BadDisplacement("weights sum to zero".into()));
        }
        for s in support.iter_mut() {
            s.1 /= total;
        }
        let mean: f64 = support.iter().map(|&(v, w)| v as f64 * w).sum();
        if mean.abs() > 1e-12 {
            return Err(Error::BadDisplacement(format!(
                "mean must be 0, got {mean}"
            )));
        }
        let variance: f64 = support.iter().map(|&(v, w)| (v as f64).powi(2) * w).sum();
        if variance <= 0.0 {
            return Err(Error::BadDisplacement("variance must be positive".into()));
        }
        let dist = DisplacementDist {
            kind: DisplacementKind::CustomFinite,
            spec: spec.to_string(),
            support,
            variance,
        };
        // Aperiodicity on (0, pi]: the characteristic function must stay
        // away from 1, or the label walk lives on a sublattice.
        for i in 1..=4096 {
            let t = PI * i as f64 / 4096.0;
            if (dist.char_fn(t) - 1.0).norm() < 1e-9 {
                return Err(Error::BadDisplacement(format!(
                    "characteristic function equals 1 at t = {t}"
                )));
            }
        }
        Ok(dist)
    }

    pub fn kind(&self) -> &DisplacementKind {
        &self.kind
    }

    pub fn spec(&self) -> &str {
        &self.spec
    }

    pub fn support(&self) -> &[(i64, f64)] {
        &self.support
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// phi_eta(t) = E e^{i t eta}.
    pub fn char_fn(&self, t: f64) -> Complex64 {
        self.support
            .iter()
            .map(|&(v, w)| w * Complex64::new(0.0, t * v as f64).exp())
            .sum()
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> i64 {
        match self.kind {
            DisplacementKind::Deterministic(v) => return v,
            DisplacementKind::UniformPm1 => {
                return if rng.random::<bool>() { 1 } else { -1 };
            }
            DisplacementKind::Uniform3 => return rng.random_range(-1..=1),
            DisplacementKind::CustomFinite => {}
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for &(v, w) in &self.support {
            acc += w;
            if u < acc {
                return v;
            }
        }
        self.support.last().unwrap().0
    }
}

/// gamma = sigma_eta^{-1} sigma^{1/2}, the horizontal scale of the
/// profile limit.
pub fn gamma(dist: &OffspringDist, eta: &DisplacementDist) -> f64 {
    dist.variance().powf(0.25) / eta.variance().sqrt()
}

/// Histogram j -> X(j; tree): number of vertices whose root-path label
/// sum equals j. Dense over [min_label, max_label].
#[derive(Debug, Clone)]
pub struct VerticalProfile {
    n: usize,
    min_label: i64,
    counts: Vec<u64>,
}

impl VerticalProfile {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn min_label(&self) -> i64 {
        self.min_label
    }

    pub fn max_label(&self) -> i64 {
        self.min_label + self.counts.len() as i64 - 1
    }

    pub fn count(&self, j: i64) -> u64 {
        if j < self.min_label {
            return 0;
        }
        self.counts
            .get((j - self.min_label) as usize)
            .copied()
            .unwrap_or(0)
    }

    pub fn counts(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (self.min_label + i as i64, c))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// X_n(u): the count histogram extended to real u by linear
    /// interpolation between integer points, zero far away.
    pub fn interpolate(&self, u: f64) -> f64 {
        let j = u.floor();
        let frac = u - j;
        let j = j as i64;
        self.count(j) as f64 * (1.0 - frac) + self.count(j + 1) as f64 * frac
    }
}

/// Label the tree with one i.i.d. displacement per edge (root labelled
/// 0) and histogram the labels.
pub fn vertical_profile(
    tree: &Tree,
    eta: &DisplacementDist,
    rng: &mut ChaCha8Rng,
) -> VerticalProfile {
    let n = tree.n();
    let mut labels = vec![0i64; n];
    for v in 1..n {
        let p = tree.parent(v as u32).expect("non-root has a parent");
        labels[v] = labels[p as usize] + eta.sample(rng);
    }
    let min_label = labels.iter().copied().min().unwrap();
    let max_label = labels.iter().copied().max().unwrap();
    let mut counts = vec![0u64; (max_label - min_label + 1) as usize];
    for &l in &labels {
        counts[(l - min_label) as usize] += 1;
    }
    VerticalProfile {
        n,
        min_label,
        counts,
    }
}

/// The density-normalized profile
/// x -> (1/n) gamma^{-1} n^{1/4} X_n(gamma^{-1} n^{1/4} x)
/// sampled on `xgrid`.
pub fn normalized_profile(profile: &VerticalProfile, gamma: f64, xgrid: &[f64]) -> Vec<f64> {
    let n = profile.n() as f64;
    let scale = n.powf(0.25) / gamma;
    xgrid
        .iter()
        .map(|&x| scale / n * profile.interpolate(scale * x))
        .collect()
}

/// One replicate of |n^{-1} sum_v e^{i t L_v}|^2 from a label histogram,
/// for every t in the grid.
fn psi_replicate(profile: &VerticalProfile, tgrid: &[f64]) -> Vec<f64> {
    let n = profile.n() as f64;
    tgrid
        .iter()
        .map(|&t| {
            let step = Complex64::new(0.0, t).exp();
            let mut rot = Complex64::new(0.0, t * profile.min_label as f64).exp();
            let mut sum = Complex64::new(0.0, 0.0);
            for &c in &profile.counts {
                if c != 0 {
                    sum += c as f64 * rot;
                }
                rot *= step;
            }
            (sum / n).norm_sqr()
        })
        .collect()
}

/// Monte Carlo estimate of Psi(n,t) = n^{-2} E |sum_v e^{i t L_v}|^2
/// on a grid of t values, over fresh (tree, labelling) pairs.
pub fn psi_sweep(
    dist: &OffspringDist,
    eta: &DisplacementDist,
    n: usize,
    tgrid: &[f64],
    reps: u64,
    seed: u64,
) -> Result<EstimateTable> {
    crate::trees::check_size(dist, n)?;
    Ok(monte_carlo_mean(reps, seed, |rng| {
        let tree = crate::trees::sample_conditioned(dist, n, rng).expect("size pre-checked");
        let profile = vertical_profile(&tree, eta, rng);
        psi_replicate(&profile, tgrid)
    }))
}

/// Single-point Psi estimate; returns (estimate, stderr).
pub fn psi_estimate(
    dist: &OffspringDist,
    eta: &DisplacementDist,
    n: usize,
    t: f64,
    reps: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    let table = psi_sweep(dist, eta, n, &[t], reps, seed)?;
    Ok((table.mean[0], table.stderr[0]))
}
