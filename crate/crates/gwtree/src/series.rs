//! The exact engine: truncated power series for F(z) = z Phi(F(z)) and
//! A(z) = z Phi'(F(z)), and the coefficient-extraction formulas that turn
//! them into exact conditioned means E Z_k(T_n), E Y_{l,m}(T_n),
//! E P_k(T_n), the Dwass identities, tail asymptotics, and polynomial
//! evaluation of f_n and h_n on the singularity-analysis domain.
//!
//! Everything is binary64; the offspring weight table feeding a
//! convolution is truncated so the neglected tail mass per factor is
//! below 1e-15.

use crate::error::{Error, Result};
use crate::offspring::OffspringDist;
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Real-coefficient formal power series truncated at a fixed degree.
///
/// Arithmetic is exact modulo z^{N+1} up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<f64>,
}

impl TruncatedSeries {
    pub fn zero(degree: usize) -> Self {
        TruncatedSeries {
            coeffs: vec![0.0; degree + 1],
        }
    }

    pub fn constant(c: f64, degree: usize) -> Self {
        let mut s = Self::zero(degree);
        s.coeffs[0] = c;
        s
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty());
        TruncatedSeries { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (i, &c) in other.coeffs.iter().enumerate().take(out.coeffs.len()) {
            out.coeffs[i] += c;
        }
        out
    }

    pub fn add_const(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Truncated product at the degree of `self`.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.degree();
        let mut out = vec![0.0; n + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let lim = (n - i).min(other.coeffs.len() - 1);
            for (j, &b) in other.coeffs[..=lim].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        TruncatedSeries { coeffs: out }
    }

    /// Multiply by z.
    pub fn shift_up(&self) -> Self {
        let mut out = vec![0.0; self.coeffs.len()];
        out[1..].copy_from_slice(&self.coeffs[..self.coeffs.len() - 1]);
        TruncatedSeries { coeffs: out }
    }

    /// 1 / self; requires a nonzero constant term.
    pub fn recip(&self) -> Self {
        let c0 = self.coeffs[0];
        assert!(c0 != 0.0, "reciprocal needs a nonzero constant term");
        let n = self.degree();
        let mut out = vec![0.0; n + 1];
        out[0] = 1.0 / c0;
        for i in 1..=n {
            let mut acc = 0.0;
            for k in 1..=i {
                acc += self.coeffs[k] * out[i - k];
            }
            out[i] = -acc / c0;
        }
        TruncatedSeries { coeffs: out }
    }

    /// Compose a polynomial (outer, by ascending degree) with a series
    /// whose constant term is zero, by Horner.
    pub fn compose_poly(outer: &[f64], inner: &Self) -> Self {
        assert!(
            inner.coeffs[0] == 0.0,
            "composition needs a zero constant term in the inner series"
        );
        let mut acc = Self::constant(*outer.last().unwrap_or(&0.0), inner.degree());
        for &c in outer.iter().rev().skip(1) {
            acc = acc.mul(inner).add_const(c);
        }
        acc
    }

    /// Partial-sum evaluation at a real point.
    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }
}

/// Dense-by-short polynomial convolution truncated at `max_degree`.
fn conv_trunc(dense: &[f64], short: &[f64], max_degree: usize) -> Vec<f64> {
    let out_len = (dense.len() + short.len() - 1).min(max_degree + 1);
    let mut out = vec![0.0; out_len];
    for (i, &a) in dense.iter().enumerate() {
        if a == 0.0 || i >= out_len {
            continue;
        }
        for (j, &b) in short.iter().enumerate() {
            if i + j >= out_len {
                break;
            }
            out[i + j] += a * b;
        }
    }
    out
}

/// Coefficients of the r-th derivative of Phi as a polynomial in w,
/// from the weight table: [w^j] Phi^(r) = (j+r)!/j! * p_{j+r}.
fn pgf_derivative_poly(probs: &[f64], order: usize) -> Vec<f64> {
    if probs.len() <= order {
        return vec![0.0];
    }
    (0..probs.len() - order)
        .map(|j| {
            let mut c = probs[j + order];
            for t in 0..order {
                c *= (j + order - t) as f64;
            }
            c
        })
        .collect()
}

/// The cached series pack for one offspring law at one truncation degree.
///
/// `F` is built eagerly by Lagrange inversion,
/// [z^n]F = (1/n) [t^{n-1}] Phi(t)^n, which is the rotation identity
/// P(|T| = n) = (1/n) P(S_n = n - 1). The derived series A = z Phi'(F),
/// B = z Phi''(F), D = 1/(1-A) and the numerator bases U = D*B*F^2,
/// V = D*F are built on first use.
pub struct GwSeries {
    dist: OffspringDist,
    f: TruncatedSeries,
    derived: OnceLock<Derived>,
}

struct Derived {
    a: TruncatedSeries,
    u: TruncatedSeries,
    v: TruncatedSeries,
}

impl GwSeries {
    pub fn new(dist: &OffspringDist, nmax: usize) -> Self {
        assert!(nmax >= 1);
        let phi = dist.probs_truncated(1e-17);
        let mut f = vec![0.0; nmax + 1];
        let mut pow = vec![1.0]; // Phi^0
        for n in 1..=nmax {
            pow = conv_trunc(&pow, &phi, nmax);
            if n - 1 < pow.len() {
                f[n] = pow[n - 1] / n as f64;
            }
        }
        GwSeries {
            dist: dist.clone(),
            f: TruncatedSeries::from_coeffs(f),
            derived: OnceLock::new(),
        }
    }

    /// Shared engine from the process-wide (dist, degree) cache.
    pub fn cached(dist: &OffspringDist, nmax: usize) -> Arc<GwSeries> {
        static CACHE: OnceLock<Mutex<HashMap<(String, usize), Arc<GwSeries>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (dist.spec().to_string(), nmax);
        if let Some(hit) = cache.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let built = Arc::new(GwSeries::new(dist, nmax));
        cache
            .lock()
            .unwrap()
            .entry(key)
            .or_insert_with(|| built.clone())
            .clone()
    }

    pub fn dist(&self) -> &OffspringDist {
        &self.dist
    }

    pub fn nmax(&self) -> usize {
        self.f.degree()
    }

    /// The series F(z) = E z^{|T|}.
    pub fn f(&self) -> &TruncatedSeries {
        &self.f
    }

    /// P(|T| = n) = [z^n] F.
    pub fn coeff_f(&self, n: usize) -> f64 {
        self.f.coeff(n)
    }

    fn derived(&self) -> &Derived {
        self.derived.get_or_init(|| {
            let probs = self.dist.probs_truncated(1e-17);
            let phi1 = pgf_derivative_poly(&probs, 1);
            let phi2 = pgf_derivative_poly(&probs, 2);
            let a = TruncatedSeries::compose_poly(&phi1, &self.f).shift_up();
            let b = TruncatedSeries::compose_poly(&phi2, &self.f).shift_up();
            let d = TruncatedSeries::constant(1.0, a.degree())
                .add(&a.scale(-1.0))
                .recip();
            let f2 = self.f.mul(&self.f);
            let u = d.mul(&b).mul(&f2);
            let v = d.mul(&self.f);
            Derived { a, u, v }
        })
    }

    /// A(z) = z Phi'(F(z)).
    pub fn a(&self) -> &TruncatedSeries {
        &self.derived().a
    }

    fn check_n(&self, n: usize) -> Result<f64> {
        let q = self.coeff_f(n);
        if n == 0 || n > self.nmax() || n % self.dist.span() != 1 % self.dist.span() || q <= 0.0 {
            return Err(Error::SpanMismatch {
                n,
                span: self.dist.span(),
            });
        }
        Ok(q)
    }

    /// Exact E Z_k(T_n) = [z^n](F A^k) / [z^n]F.
    pub fn mean_z(&self, n: usize, k: usize) -> Result<f64> {
        let q = self.check_n(n)?;
        let mut num = self.f.clone();
        let a = self.a();
        for _ in 0..k {
            num = num.mul(a);
        }
        Ok(num.coeff(n) / q)
    }

    /// Exact E Y_{l,m}(T_n) via the x^l y^m coefficient of H:
    /// U A^{l+m-2} for l,m >= 1; V A^{l+m} when exactly one is zero;
    /// V when both are zero.
    pub fn mean_y(&self, n: usize, l: usize, m: usize) -> Result<f64> {
        let q = self.check_n(n)?;
        let d = self.derived();
        let (mut num, pow) = if l >= 1 && m >= 1 {
            (d.u.clone(), l + m - 2)
        } else {
            (d.v.clone(), l + m)
        };
        for _ in 0..pow {
            num = num.mul(&d.a);
        }
        Ok(num.coeff(n) / q)
    }

    /// Exact E P_k(T_n) = (1/2) sum_{l+m=k} E Y_{l,m}(T_n).
    pub fn mean_p(&self, n: usize, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(Error::InvalidArgument("mean_p needs k >= 1".into()));
        }
        let q = self.check_n(n)?;
        let d = self.derived();
        let mut edge = d.v.clone();
        for _ in 0..k {
            edge = edge.mul(&d.a);
        }
        let mut num = edge.coeff(n);
        if k >= 2 {
            let mut interior = d.u.clone();
            for _ in 0..(k - 2) {
                interior = interior.mul(&d.a);
            }
            num += (k - 1) as f64 / 2.0 * interior.coeff(n);
        }
        Ok(num / q)
    }

    /// E Z_k(T_n) for all k = 0..=kmax and all admissible n at once;
    /// entry [k][n] is NaN where T_n does not exist.
    pub fn z_sweep(&self, kmax: usize) -> Vec<Vec<f64>> {
        let a = self.a().clone();
        let mut num = self.f.clone();
        let mut out = Vec::with_capacity(kmax + 1);
        for _ in 0..=kmax {
            out.push(self.ratio_row(&num));
            num = num.mul(&a);
        }
        out
    }

    /// E P_k(T_n) for all k = 1..=kmax; entry [k-1][n].
    pub fn p_sweep(&self, kmax: usize) -> Vec<Vec<f64>> {
        let d = self.derived();
        let mut edge = d.v.mul(&d.a); // V A^k at k = 1
        let mut interior = d.u.clone(); // U A^{k-2} at k = 2
        let mut out = Vec::with_capacity(kmax);
        for k in 1..=kmax {
            let mut row = Vec::with_capacity(self.nmax() + 1);
            for n in 0..=self.nmax() {
                let q = self.coeff_f(n);
                if n == 0 || q <= 0.0 {
                    row.push(f64::NAN);
                } else {
                    let mut num = edge.coeff(n);
                    if k >= 2 {
                        num += (k - 1) as f64 / 2.0 * interior.coeff(n);
                    }
                    row.push(num / q);
                }
            }
            out.push(row);
            edge = edge.mul(&d.a);
            if k >= 2 {
                interior = interior.mul(&d.a);
            }
        }
        out
    }

    /// E Y_{l,m}(T_n) for l,m >= 1 as a function of s = l+m;
    /// entry [s-2][n], s = 2..=smax.
    pub fn y_interior_sweep(&self, smax: usize) -> Vec<Vec<f64>> {
        let d = self.derived();
        let mut num = d.u.clone();
        let mut out = Vec::new();
        for _s in 2..=smax {
            out.push(self.ratio_row(&num));
            num = num.mul(&d.a);
        }
        out
    }

    /// E Y_{l,0}(T_n) = E Y_{0,l}(T_n); entry [l][n], l = 0..=lmax.
    pub fn y_edge_sweep(&self, lmax: usize) -> Vec<Vec<f64>> {
        let d = self.derived();
        let mut num = d.v.clone();
        let mut out = Vec::new();
        for _l in 0..=lmax {
            out.push(self.ratio_row(&num));
            num = num.mul(&d.a);
        }
        out
    }

    fn ratio_row(&self, num: &TruncatedSeries) -> Vec<f64> {
        (0..=self.nmax())
            .map(|n| {
                let q = self.coeff_f(n);
                if n == 0 || q <= 0.0 {
                    f64::NAN
                } else {
                    num.coeff(n) / q
                }
            })
            .collect()
    }
}

/// Coefficients of F(z) = E z^{|T|} to degree `nmax`.
pub fn series_f(dist: &OffspringDist, nmax: usize) -> TruncatedSeries {
    GwSeries::cached(dist, nmax).f().clone()
}

/// Coefficients of A(z) = z Phi'(F(z)) to degree `nmax`.
pub fn series_a(dist: &OffspringDist, nmax: usize) -> TruncatedSeries {
    GwSeries::cached(dist, nmax).a().clone()
}

pub fn exact_mean_z(dist: &OffspringDist, n: usize, k: usize) -> Result<f64> {
    GwSeries::cached(dist, n).mean_z(n, k)
}

pub fn exact_mean_y(dist: &OffspringDist, n: usize, l: usize, m: usize) -> Result<f64> {
    GwSeries::cached(dist, n).mean_y(n, l, m)
}

pub fn exact_mean_p(dist: &OffspringDist, n: usize, k: usize) -> Result<f64> {
    GwSeries::cached(dist, n).mean_p(n, k)
}

/// Both sides of the Dwass identity P(W_l = n) = (l/n) P(S_n = n-l),
/// computed independently: the series power F^l versus the probability
/// convolution power Phi^n. Returns (0, 0) for impossible parameters.
pub fn dwass_check(dist: &OffspringDist, l: usize, n: usize) -> (f64, f64) {
    if l == 0 || n == 0 || l > n {
        return (0.0, 0.0);
    }
    let engine = GwSeries::cached(dist, n);
    let mut fl = engine.f().clone();
    for _ in 1..l {
        fl = fl.mul(engine.f());
    }
    let lhs = fl.coeff(n);

    let phi = dist.probs_truncated(1e-17);
    let mut pow = vec![1.0];
    for _ in 0..n {
        pow = conv_trunc(&pow, &phi, n);
    }
    let rhs = l as f64 / n as f64 * pow.get(n - l).copied().unwrap_or(0.0);
    (lhs, rhs)
}

/// P(|T| = n) * sigma * sqrt(2 pi) * n^{3/2} / d; tends to 1.
pub fn tail_ratio(dist: &OffspringDist, n: usize) -> Result<f64> {
    let engine = GwSeries::cached(dist, n);
    let q = engine.check_n(n)?;
    let sigma = dist.variance().sqrt();
    Ok(q * sigma * (2.0 * PI).sqrt() * (n as f64).powf(1.5) / dist.span() as f64)
}

/// F(z) for real 0 <= z < 1: the smallest fixed point of w = z Phi(w),
/// by safeguarded Newton iteration (closed form for the geometric law).
pub fn eval_f_point(dist: &OffspringDist, z: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&z) {
        return Err(Error::InvalidArgument(format!(
            "eval_f_point needs 0 <= z < 1, got {z}"
        )));
    }
    if let crate::offspring::OffspringKind::GeometricHalf = dist.kind() {
        return Ok(1.0 - (1.0 - z).sqrt());
    }
    let mut w = 0.0f64;
    for _ in 0..500 {
        let g = w - z * dist.pgf_real(w, 0)?;
        let gp = 1.0 - z * dist.pgf_real(w, 1)?;
        let step = g / gp;
        w = (w - step).clamp(0.0, 1.0);
        if step.abs() < 1e-15 {
            break;
        }
    }
    Ok(w)
}

/// (1 - F(z)) * sigma / (sqrt(2) sqrt(1-z)); tends to 1 as z -> 1
/// for span-1 laws.
pub fn singularity_ratio(dist: &OffspringDist, z: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&z) {
        return Err(Error::InvalidArgument(format!(
            "singularity_ratio needs 0 <= z < 1, got {z}"
        )));
    }
    if dist.span() != 1 {
        return Err(Error::SpanMismatch {
            n: 0,
            span: dist.span(),
        });
    }
    let f = eval_f_point(dist, z)?;
    Ok((1.0 - f) * dist.variance().sqrt() / (2.0f64.sqrt() * (1.0 - z).sqrt()))
}

/// f_n(z) = sum_k E P_k(T_n) z^k as an explicit polynomial.
#[derive(Debug, Clone)]
pub struct FnPolynomial {
    pub n: usize,
    /// coeffs[k] = E P_k(T_n); index 0 is zero, degree < n.
    pub coeffs: Vec<f64>,
}

impl FnPolynomial {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }
}

pub fn fn_polynomial(dist: &OffspringDist, n: usize) -> Result<FnPolynomial> {
    let engine = GwSeries::cached(dist, n);
    engine.check_n(n)?;
    let table = engine.p_sweep(n.saturating_sub(1).max(1));
    let mut coeffs = vec![0.0; n.max(2)];
    for (k1, row) in table.iter().enumerate() {
        coeffs[k1 + 1] = row[n];
    }
    Ok(FnPolynomial { n, coeffs })
}

pub fn eval_fn(dist: &OffspringDist, n: usize, z: Complex64) -> Result<Complex64> {
    Ok(fn_polynomial(dist, n)?.eval(z))
}

/// h_n(x, y) = sum_{l,m} E Y_{l,m}(T_n) x^l y^m in the compressed form
/// the coefficient formulas produce: the interior part depends on l, m
/// only through s = l + m.
#[derive(Debug, Clone)]
pub struct HnPolynomial {
    pub n: usize,
    /// edge[l] = E Y_{l,0}(T_n) = E Y_{0,l}(T_n); edge[0] = n.
    pub edge: Vec<f64>,
    /// interior[s-2] = E Y_{l,m}(T_n) for any l,m >= 1 with l+m = s.
    pub interior: Vec<f64>,
}

impl HnPolynomial {
    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        let n = self.n;
        let pow = |w: Complex64| {
            let mut p = Vec::with_capacity(n);
            let mut acc = Complex64::new(1.0, 0.0);
            for _ in 0..n {
                p.push(acc);
                acc *= w;
            }
            p
        };
        let (xp, yp) = (pow(x), pow(y));
        let mut h = Complex64::new(self.edge[0], 0.0);
        for l in 1..n {
            h += self.edge[l] * (xp[l] + yp[l]);
        }
        for (idx, &e) in self.interior.iter().enumerate() {
            let s = idx + 2;
            if s > n - 1 || e == 0.0 {
                continue;
            }
            let mut inner = Complex64::new(0.0, 0.0);
            for l in 1..s {
                inner += xp[l] * yp[s - l];
            }
            h += e * inner;
        }
        h
    }
}

pub fn hn_polynomial(dist: &OffspringDist, n: usize) -> Result<HnPolynomial> {
    let engine = GwSeries::cached(dist, n);
    engine.check_n(n)?;
    let smax = n.saturating_sub(1).max(2);
    let interior = engine.y_interior_sweep(smax);
    let edges = engine.y_edge_sweep(n - 1);
    Ok(HnPolynomial {
        n,
        edge: (0..n).map(|l| edges[l][n]).collect(),
        interior: interior.iter().map(|row| row[n]).collect(),
    })
}

pub fn eval_hn(dist: &OffspringDist, n: usize, x: Complex64, y: Complex64) -> Result<Complex64> {
    Ok(hn_polynomial(dist, n)?.eval(x, y))
}

/// Membership in the Pac-Man domain Delta(beta, delta):
/// |z| < 1 + delta, z != 1, |arg(z - 1)| > pi/2 - beta.
pub fn in_domain(z: Complex64, beta: f64, delta: f64) -> bool {
    if z == Complex64::new(1.0, 0.0) || z.norm() >= 1.0 + delta {
        return false;
    }
    (z - 1.0).arg().abs() > PI / 2.0 - beta
}

/// Deterministic grid of `count` points in Delta(beta, delta): the unit
/// circle arc e^{+-i theta} with log-spaced theta accumulating at the
/// singularity z = 1. Every such point lies in the domain for any beta,
/// delta (arg(e^{i theta} - 1) = (pi + theta)/2 > pi/2 - beta), and the
/// circle is where |f_n(z)| |1-z|^2 / n peaks; points with |z| > 1 sit
/// in a transient regime growing like exp(c (|z|-1) sqrt(n)) at
/// moderate n, which would swamp any finite-n stability comparison.
pub fn domain_grid(beta: f64, delta: f64, count: usize) -> Vec<Complex64> {
    assert!(beta > 0.0 && beta < PI / 2.0 && delta > 0.0);
    let per_side = (count / 2).max(8);
    let (t_min, t_max) = (0.02f64, PI);
    let mut valid = Vec::new();
    for i in 0..per_side {
        let t = t_min * (t_max / t_min).powf(i as f64 / (per_side - 1) as f64);
        for sign in [1.0, -1.0] {
            let z = Complex64::from_polar(1.0, sign * t);
            if in_domain(z, beta, delta) {
                valid.push(z);
            }
        }
    }
    valid
}
