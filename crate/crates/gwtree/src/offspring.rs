//! Critical offspring laws: probability weights, probability generating
//! function and its first two derivatives, and the structural constants
//! (variance, span) the rest of the crate keys on.
//!
//! Every law here satisfies `E xi = 1` and `0 < Var xi < infinity`.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;

const CRITICALITY_TOL: f64 = 1e-9;
const MASS_TOL: f64 = 1e-12;
/// Tail mass discarded when an infinite-support law is materialized.
const TAIL_TOL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub enum OffspringKind {
    /// p_k = 2^{-k-1}; uniform random ordered trees.
    GeometricHalf,
    /// Poisson(1); uniform random labelled (Cayley) trees.
    PoissonOne,
    /// p_0 = p_2 = 1/2; uniform random full binary trees.
    BinaryZeroTwo,
    /// p_0 = 1 - 1/d, p_d = 1/d; uniform random d-ary trees.
    DAry(usize),
    CustomFinite(Vec<f64>),
}

/// A critical offspring distribution together with its PGF.
///
/// Immutable after construction; cheap to clone and safe to share
/// between threads.
#[derive(Debug, Clone)]
pub struct OffspringDist {
    kind: OffspringKind,
    spec: String,
    mean: f64,
    variance: f64,
    span: usize,
    /// Weights materialized up to negligible tail mass; used by the
    /// sampler's CDF walk and by the series engine's convolutions.
    probs: Vec<f64>,
}

impl OffspringDist {
    /// Parse a distribution spec string.
    ///
    /// Accepted: `geometric`, `poisson`, `binary`, `d-ary:D`,
    /// `custom:p0,p1,...` (weights are normalized, then the law must be
    /// critical within 1e-9).
    pub fn from_spec(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let kind = match spec {
            "geometric" => OffspringKind::GeometricHalf,
            "poisson" => OffspringKind::PoissonOne,
            "binary" => OffspringKind::BinaryZeroTwo,
            _ => {
                if let Some(d) = spec.strip_prefix("d-ary:") {
                    let d: usize = d
                        .parse()
                        .map_err(|_| Error::UnknownSpec(spec.to_string()))?;
                    if d < 2 {
                        return Err(Error::UnknownSpec(spec.to_string()));
                    }
                    OffspringKind::DAry(d)
                } else if let Some(ws) = spec.strip_prefix("custom:") {
                    let mut weights = Vec::new();
                    for w in ws.split(',') {
                        let w: f64 = w
                            .trim()
                            .parse()
                            .map_err(|_| Error::UnknownSpec(spec.to_string()))?;
                        weights.push(w);
                    }
                    OffspringKind::CustomFinite(weights)
                } else {
                    return Err(Error::UnknownSpec(spec.to_string()));
                }
            }
        };
        Self::from_kind(kind, spec.to_string())
    }

    fn from_kind(kind: OffspringKind, spec: String) -> Result<Self> {
        let probs = match &kind {
            OffspringKind::GeometricHalf => {
                // 2^{-(k+1)}; cut where the tail 2^{-(K+1)} drops below TAIL_TOL.
                let mut p = Vec::new();
                let mut w = 0.5f64;
                while w > TAIL_TOL {
                    p.push(w);
                    w *= 0.5;
                }
                p
            }
            OffspringKind::PoissonOne => {
                let mut p = Vec::new();
                let mut w = (-1.0f64).exp();
                let mut k = 0usize;
                let mut cum = 0.0;
                while 1.0 - cum > TAIL_TOL {
                    p.push(w);
                    cum += w;
                    k += 1;
                    w /= k as f64;
                }
                p
            }
            OffspringKind::BinaryZeroTwo => vec![0.5, 0.0, 0.5],
            OffspringKind::DAry(d) => {
                let mut p = vec![0.0; d + 1];
                p[0] = 1.0 - 1.0 / *d as f64;
                p[*d] = 1.0 / *d as f64;
                p
            }
            OffspringKind::CustomFinite(w) => {
                for (index, &value) in w.iter().enumerate() {
                    if value < 0.0 {
                        return Err(Error::NegativeWeight { index, value });
                    }
                }
                let total: f64 = w.iter().sum();
                if total <= 0.0 {
                    return Err(Error::UnknownSpec(spec));
                }
                w.iter().map(|x| x / total).collect()
            }
        };

        let mass: f64 = probs.iter().sum();
        let mean: f64 = probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        if (mean - 1.0).abs() > CRITICALITY_TOL {
            return Err(Error::NotCritical(mean));
        }
        debug_assert!((mass - 1.0).abs() < 100.0 * TAIL_TOL + MASS_TOL);
        let second: f64 = probs
            .iter()
            .enumerate()
            .map(|(k, p)| (k * k) as f64 * p)
            .sum();
        let variance = second - mean * mean;
        if probs[0] <= 0.0 || !(variance > 0.0) {
            return Err(Error::Degenerate);
        }
        let span = match &kind {
            OffspringKind::GeometricHalf | OffspringKind::PoissonOne => 1,
            OffspringKind::BinaryZeroTwo => 2,
            OffspringKind::DAry(d) => *d,
            OffspringKind::CustomFinite(_) => {
                let mut g = 0usize;
                for (k, &p) in probs.iter().enumerate() {
                    if k > 0 && p > 0.0 {
                        g = gcd(g, k);
                    }
                }
                g.max(1)
            }
        };
        Ok(OffspringDist {
            kind,
            spec,
            mean,
            variance,
            span,
            probs,
        })
    }

    pub fn geometric() -> Self {
        Self::from_spec("geometric").unwrap()
    }
    pub fn poisson() -> Self {
        Self::from_spec("poisson").unwrap()
    }
    pub fn binary() -> Self {
        Self::from_spec("binary").unwrap()
    }

    pub fn kind(&self) -> &OffspringKind {
        &self.kind
    }
    /// The spec string this law was built from; also the cache key used by
    /// the series engine.
    pub fn spec(&self) -> &str {
        &self.spec
    }
    pub fn mean(&self) -> f64 {
        self.mean
    }
    /// sigma^2 = Var xi.
    pub fn variance(&self) -> f64 {
        self.variance
    }
    /// Largest d with support contained in d*Z.
    pub fn span(&self) -> usize {
        self.span
    }

    /// P(xi = k), exact closed form for the built-ins.
    pub fn prob(&self, k: usize) -> f64 {
        match &self.kind {
            OffspringKind::GeometricHalf => 0.5f64.powi(k as i32 + 1),
            OffspringKind::PoissonOne => {
                let mut w = (-1.0f64).exp();
                for j in 1..=k {
                    w /= j as f64;
                }
                w
            }
            _ => self.probs.get(k).copied().unwrap_or(0.0),
        }
    }

    /// Weights p_0..p_K with neglected tail mass below `tail_tol`.
    pub fn probs_truncated(&self, tail_tol: f64) -> Vec<f64> {
        match &self.kind {
            OffspringKind::GeometricHalf => {
                let mut p = Vec::new();
                let mut w = 0.5f64;
                while w > tail_tol {
                    p.push(w);
                    w *= 0.5;
                }
                p
            }
            OffspringKind::PoissonOne => {
                let mut p = Vec::new();
                let mut w = (-1.0f64).exp();
                let mut cum = 0.0;
                let mut k = 0usize;
                while 1.0 - cum > tail_tol {
                    p.push(w);
                    cum += w;
                    k += 1;
                    w /= k as f64;
                }
                p
            }
            _ => self.probs.clone(),
        }
    }

    /// The materialized weight table (tail mass below 1e-15).
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Phi(w), Phi'(w) or Phi''(w) on the closed unit disc.
    pub fn pgf(&self, w: Complex64, order: u8) -> Result<Complex64> {
        if w.norm() > 1.0 + 1e-12 {
            return Err(Error::OutsideUnitDisc(w.norm()));
        }
        assert!(order <= 2, "pgf order must be 0, 1 or 2");
        Ok(match &self.kind {
            OffspringKind::GeometricHalf => {
                // Phi(w) = 1/(2-w)
                let s = Complex64::new(2.0, 0.0) - w;
                match order {
                    0 => 1.0 / s,
                    1 => 1.0 / (s * s),
                    _ => 2.0 / (s * s * s),
                }
            }
            OffspringKind::PoissonOne => (w - 1.0).exp(),
            _ => {
                // Finite support: Horner on the k-th derivative coefficients.
                let p = &self.probs;
                let mut acc = Complex64::new(0.0, 0.0);
                for k in (order as usize..p.len()).rev() {
                    let mut c = p[k];
                    for j in 0..order as usize {
                        c *= (k - j) as f64;
                    }
                    acc = acc * w + c;
                }
                acc
            }
        })
    }

    /// Real-argument PGF evaluation (w in [-1, 1] or slightly beyond for
    /// internal fixed-point solves, clamped by the same disc check).
    pub fn pgf_real(&self, w: f64, order: u8) -> Result<f64> {
        Ok(self.pgf(Complex64::new(w, 0.0), order)?.re)
    }

    /// Draw one offspring count.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if let OffspringKind::GeometricHalf = self.kind {
            // Trailing zeros of a uniform word hit k with probability 2^{-k-1}.
            loop {
                let bits: u64 = rng.random();
                if bits != 0 {
                    return bits.trailing_zeros() as usize;
                }
            }
        }
        let mut u: f64 = rng.random();
        for (k, &p) in self.probs.iter().enumerate() {
            u -= p;
            if u <= 0.0 {
                return k;
            }
        }
        self.probs.len() - 1
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if a == 0 {
        b
    } else {
        gcd(b % a, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_constants() {
        let g = OffspringDist::geometric();
        // The variance is a truncated numeric sum; allow ~1e-10.
        assert!((g.variance() - 2.0).abs() < 1e-10);
        assert_eq!(g.span(), 1);
        let b = OffspringDist::binary();
        assert!((b.variance() - 1.0).abs() < 1e-12);
        assert_eq!(b.span(), 2);
        let p = OffspringDist::poisson();
        assert!((p.variance() - 1.0).abs() < 1e-9);
        assert_eq!(p.span(), 1);
        let d = OffspringDist::from_spec("d-ary:3").unwrap();
        assert!((d.variance() - 2.0).abs() < 1e-12);
        assert_eq!(d.span(), 3);
    }

    #[test]
    fn custom_spec() {
        let c = OffspringDist::from_spec("custom:0.3,0.4,0.3").unwrap();
        assert!((c.mean() - 1.0).abs() < 1e-12);
        assert!((c.variance() - 0.6).abs() < 1e-12);
        assert_eq!(c.span(), 1);
        // Non-critical: mean 0.5.
        assert!(matches!(
            OffspringDist::from_spec("custom:0.5,0.5"),
            Err(Error::NotCritical(_))
        ));
        assert!(matches!(
            OffspringDist::from_spec("custom:0.5,-0.1,0.6"),
            Err(Error::NegativeWeight { .. })
        ));
        assert!(OffspringDist::from_spec("nonsense").is_err());
        // Span 2 from a custom law on {0, 2, 4}: mean = 2 p2 + 4 p4 = 1.
        let c2 = OffspringDist::from_spec("custom:0.625,0,0.25,0,0.125").unwrap();
        assert_eq!(c2.span(), 2);
    }

    #[test]
    fn mass_and_mean() {
        for spec in ["geometric", "poisson", "binary", "d-ary:4"] {
            let d = OffspringDist::from_spec(spec).unwrap();
            let mass: f64 = d.probs().iter().sum();
            assert!((mass - 1.0).abs() < 1e-12, "{spec}: mass {mass}");
            assert!((d.mean() - 1.0).abs() < 1e-9);
            assert!(d.variance() > 0.0);
        }
    }

    #[test]
    fn pgf_values() {
        let g = OffspringDist::geometric();
        let w0 = Complex64::new(0.0, 0.0);
        let w1 = Complex64::new(1.0, 0.0);
        assert!((g.pgf(w0, 0).unwrap().re - 0.5).abs() < 1e-14);
        for spec in ["geometric", "poisson", "binary", "custom:0.3,0.4,0.3"] {
            let d = OffspringDist::from_spec(spec).unwrap();
            assert!((d.pgf(w1, 0).unwrap().re - 1.0).abs() < 1e-12);
            assert!((d.pgf(w1, 1).unwrap().re - 1.0).abs() < 1e-9);
            // Phi''(1) = E xi(xi-1) = sigma^2 under criticality.
            assert!(
                (d.pgf(w1, 2).unwrap().re - d.variance()).abs() < 1e-9,
                "{spec}"
            );
        }
        // Phi''(1) = 2/(2-1)^3 = 2 for the geometric law; cross-check by
        // direct series summation of k(k-1) p_k.
        let direct: f64 = (2..60).map(|k| (k * (k - 1)) as f64 * g.prob(k)).sum();
        assert!((g.pgf(w1, 2).unwrap().re - direct).abs() < 1e-12);
        assert!(g.pgf(Complex64::new(1.5, 0.0), 0).is_err());
    }

    #[test]
    fn sampler_matches_weights() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for spec in ["geometric", "poisson", "custom:0.3,0.4,0.3"] {
            let d = OffspringDist::from_spec(spec).unwrap();
            let reps = 200_000usize;
            let mut counts = vec![0u64; 16];
            for _ in 0..reps {
                let k = d.sample(&mut rng);
                if k < counts.len() {
                    counts[k] += 1;
                }
            }
            for k in 0..6 {
                let p = d.prob(k);
                if p < 1e-4 {
                    continue;
                }
                let se = (p * (1.0 - p) / reps as f64).sqrt();
                let obs = counts[k] as f64 / reps as f64;
                assert!(
                    (obs - p).abs() < 4.5 * se,
                    "{spec} k={k}: obs {obs} vs {p}"
                );
            }
        }
    }
}
