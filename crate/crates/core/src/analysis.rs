//! Neck analysis: weighted norms on cone annuli, the gluing partition of
//! unity, the fold-over toy model and the abstract contraction scheme.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smooth monotone step: 0 on `(-∞, 0]`, 1 on `[1, ∞)`, built from
/// `exp(-1/x)` and symmetric about `1/2`.
pub fn cutoff(x: f64) -> f64 {
    fn g(x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            (-1.0 / x).exp()
        }
    }
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = g(x);
    a / (a + g(1.0 - x))
}

/// Radii of the neck region: `t r0 < t^ν/2 < t^ν < t^ν' < t^ν'' < R0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GluingSchedule {
    pub t: f64,
    pub nu: f64,
    pub nu_p: f64,
    pub nu_pp: f64,
    pub r0: f64,
    pub big_r0: f64,
}

impl GluingSchedule {
    pub fn new(t: f64, nu: f64, nu_p: f64, nu_pp: f64, r0: f64, big_r0: f64) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidArgument(format!("t = {t} not in (0, 1)")));
        }
        if !(0.0 < nu_pp && nu_pp < nu_p && nu_p < nu && nu < 1.0) {
            return Err(Error::InvalidArgument("need 0 < nu'' < nu' < nu < 1".into()));
        }
        if !(r0 > 0.0 && big_r0 > 0.0) {
            return Err(Error::InvalidArgument("radii must be positive".into()));
        }
        let radii = [
            t * r0,
            t.powf(nu) / 2.0,
            t.powf(nu),
            t.powf(nu_p),
            t.powf(nu_pp),
            big_r0,
        ];
        if radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "radii are not increasing for t = {t}: {radii:?}"
            )));
        }
        Ok(Self { t, nu, nu_p, nu_pp, r0, big_r0 })
    }
}

/// `φ(ρ) = cutoff(ln ρ / ln t)`, forced to 1 below `t r0` and 0 above `R0`.
pub fn partition_phi(sched: &GluingSchedule, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("rho = {rho} must be positive")));
    }
    if rho <= sched.t * sched.r0 {
        return Ok(1.0);
    }
    if rho >= sched.big_r0 {
        return Ok(0.0);
    }
    Ok(cutoff(rho.ln() / sched.t.ln()))
}

/// Weighted `L^p_k` norm with weight `w` at neck parameter `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormSpec {
    pub p: f64,
    pub k: u32,
    pub weight: f64,
    pub t: f64,
}

impl WeightedNormSpec {
    pub fn new(p: f64, k: u32, weight: f64, t: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::InvalidArgument(format!("p = {p} must exceed 1")));
        }
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidArgument(format!("t = {t} not in (0, 1)")));
        }
        Ok(Self { p, k, weight, t })
    }
}

/// `|ζ (ζ−1) ⋯ (ζ−i+1)|` for `i = 0..=k`.
fn falling_factors(zeta: f64, k: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(k as usize + 1);
    let mut c: f64 = 1.0;
    for i in 0..=k {
        out.push(c.abs());
        c *= zeta - i as f64;
    }
    out
}

/// Weighted norm of `s = r^ζ` over the annulus `inner < r < outer` of a
/// 4-dimensional cone with unit-volume link, in closed form.
///
/// Each derivative term contributes `|c_i|^p r^{(ζ−w)p − 1}`, so the norm is
/// `(Σ |c_i|^p)^{1/p} (∫ r^{(ζ−w)p − 1} dr)^{1/p}`.
pub fn annulus_norm(zeta: f64, spec: &WeightedNormSpec, inner: f64, outer: f64) -> Result<f64> {
    if !(inner > 0.0 && inner < outer) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < inner < outer, got {inner}, {outer}"
        )));
    }
    let p = spec.p;
    let a = (zeta - spec.weight) * p;
    let radial = if a.abs() < 1e-12 {
        (outer / inner).ln()
    } else if a > 0.0 {
        // (outer^a − inner^a)/a, rewritten to avoid cancellation
        outer.powf(a) * -(a * (inner / outer).ln()).exp_m1() / a
    } else {
        inner.powf(a) * -(a * (outer / inner).ln()).exp_m1() / -a
    };
    let derivs: f64 = falling_factors(zeta, spec.k).iter().map(|c| c.powf(p)).sum();
    Ok((derivs * radial).powf(1.0 / p))
}

/// Integrand of [`annulus_norm`] before the outer `1/p` power, in the
/// radial variable.
pub fn annulus_integrand(zeta: f64, spec: &WeightedNormSpec, r: f64) -> f64 {
    let p = spec.p;
    falling_factors(zeta, spec.k)
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let i = i as f64;
            // |∇^i r^ζ| ρ^{−w+i}, raised to p, against ρ^{−4} r^3 dr
            (c * r.powf(zeta - i) * r.powf(-spec.weight + i)).powf(p) * r.powi(-4) * r.powi(3)
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NormRegime {
    Bounded,
    Log,
    Power,
}

pub fn norm_regime(zeta: f64, weight: f64) -> NormRegime {
    if weight < zeta {
        NormRegime::Bounded
    } else if weight == zeta {
        NormRegime::Log
    } else {
        NormRegime::Power
    }
}

/// `C_F t^{ν(γ_max − γ)}`.
pub fn glue_error_bound(c_f: f64, t: f64, nu: f64, gamma_max: f64, gamma: f64) -> Result<f64> {
    if !(1.0 < gamma && gamma < gamma_max) {
        return Err(Error::InvalidArgument(format!(
            "need 1 < gamma < gamma_max, got {gamma}, {gamma_max}"
        )));
    }
    if !(0.0 < nu && nu < 1.0) {
        return Err(Error::InvalidArgument(format!("nu = {nu} not in (0, 1)")));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("t = {t} must be positive")));
    }
    Ok(c_f * t.powf(nu * (gamma_max - gamma)))
}

/// `D v + F0 + Q(v) = 0` with `Q(v)_k = Σ q[k][i][j] v_i v_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionProblem {
    pub d: Vec<Vec<f64>>,
    pub q: Vec<Vec<Vec<f64>>>,
    pub f0: Vec<f64>,
}

impl ContractionProblem {
    pub fn new(d: Vec<Vec<f64>>, q: Vec<Vec<Vec<f64>>>, f0: Vec<f64>) -> Result<Self> {
        let n = f0.len();
        let square = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if !square(&d) {
            return Err(Error::Shape(format!("D must be {n}x{n}")));
        }
        if q.len() != n || !q.iter().all(square) {
            return Err(Error::Shape(format!("Q must be {n}x{n}x{n}")));
        }
        let prob = Self { d, q, f0 };
        if prob.min_singular_value() <= 1e-12 {
            return Err(Error::InvalidArgument("D is singular".into()));
        }
        Ok(prob)
    }

    /// Scalar problem `d v + f0 + q v² = 0`.
    pub fn scalar(d: f64, q: f64, f0: f64) -> Result<Self> {
        Self::new(vec![vec![d]], vec![vec![vec![q]]], vec![f0])
    }

    pub fn dim(&self) -> usize {
        self.f0.len()
    }

    fn d_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.d[i][j])
    }

    fn min_singular_value(&self) -> f64 {
        self.d_matrix().singular_values().min()
    }

    /// `‖D⁻¹‖ = 1 / σ_min(D)`.
    pub fn c_d(&self) -> f64 {
        1.0 / self.min_singular_value()
    }

    /// Frobenius norm of the coefficient tensor, which bounds
    /// `‖Q(u) − Q(v)‖ / (‖u − v‖ (‖u‖ + ‖v‖))`.
    pub fn c_q(&self) -> f64 {
        self.q
            .iter()
            .flatten()
            .flatten()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn c_i(&self) -> f64 {
        2.0 * self.c_d()
    }

    pub fn f0_norm(&self) -> f64 {
        norm(&self.f0)
    }

    pub fn quadratic(&self, v: &[f64]) -> Vec<f64> {
        self.q
            .iter()
            .map(|qk| {
                qk.iter()
                    .zip(v)
                    .map(|(row, vi)| vi * row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>())
                    .sum()
            })
            .collect()
    }

    /// `D v + F0 + Q(v)`.
    pub fn residual(&self, v: &[f64]) -> Vec<f64> {
        let qv = self.quadratic(v);
        (0..self.dim())
            .map(|i| {
                self.d[i].iter().zip(v).map(|(a, b)| a * b).sum::<f64>() + self.f0[i] + qv[i]
            })
            .collect()
    }

    /// The smallness condition `4 C_D² C_Q ‖F0‖ < 1` under which the scheme
    /// contracts on the ball of radius `2 C_D ‖F0‖`.
    pub fn contraction_constant(&self) -> f64 {
        4.0 * self.c_d().powi(2) * self.c_q() * self.f0_norm()
    }

    /// Largest observed ratio `‖Q(u)−Q(v)‖ / (‖u−v‖(‖u‖+‖v‖))` over random
    /// pairs; never exceeds [`Self::c_q`].
    pub fn sample_q_constant(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let du: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
            let den = norm(&du) * (norm(&u) + norm(&v));
            if den < 1e-12 {
                continue;
            }
            let dq: Vec<f64> = self
                .quadratic(&u)
                .iter()
                .zip(self.quadratic(&v))
                .map(|(a, b)| a - b)
                .collect();
            worst = worst.max(norm(&dq) / den);
        }
        worst
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionResult {
    pub v_inf: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Iterate norm left the ball `10³ C_D ‖F0‖`.
    pub diverged: bool,
    /// `‖v_{i+1} − v_i‖` for each step.
    pub differences: Vec<f64>,
    pub c_d: f64,
    pub c_q: f64,
    pub c_i: f64,
}

impl ContractionResult {
    /// Largest ratio of successive differences, ignoring steps already at
    /// the floating-point floor.
    pub fn max_decay_ratio(&self) -> f64 {
        self.differences
            .windows(2)
            .filter(|w| w[0] > 1e-13)
            .map(|w| w[1] / w[0])
            .fold(0.0, f64::max)
    }
}

/// Iterates `D v_{i+1} = −F0 − Q(v_i)` from `v_0 = 0`.
pub fn contraction_solve(prob: &ContractionProblem, max_iter: usize, tol: f64) -> ContractionResult {
    let n = prob.dim();
    let lu = prob.d_matrix().lu();
    let c_d = prob.c_d();
    let escape = 1e3 * c_d * prob.f0_norm();
    let mut v = vec![0.0; n];
    let mut differences = Vec::new();
    let mut converged = false;
    let mut diverged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let qv = prob.quadratic(&v);
        let rhs = DVector::from_iterator(n, prob.f0.iter().zip(&qv).map(|(f, q)| -f - q));
        let Some(next) = lu.solve(&rhs) else {
            diverged = true;
            break;
        };
        let next: Vec<f64> = next.iter().copied().collect();
        let diff = norm(&next.iter().zip(&v).map(|(a, b)| a - b).collect::<Vec<_>>());
        differences.push(diff);
        v = next;
        if !diff.is_finite() || norm(&v) > escape {
            diverged = true;
            break;
        }
        if diff < tol {
            converged = true;
            break;
        }
    }
    if !converged && !diverged {
        diverged = true;
    }
    ContractionResult {
        v_inf: v,
        iterations,
        converged,
        diverged,
        differences,
        c_d,
        c_q: prob.c_q(),
        c_i: prob.c_i(),
    }
}

/// Max over `params` of `‖v(s+h) − 2 v(s) + v(s−h)‖ / h²`.
pub fn contraction_family_smoothness<F>(family: F, params: &[f64], h: f64, max_iter: usize, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<ContractionProblem>,
{
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step h = {h} must be positive")));
    }
    let solve = |s: f64| -> Result<Vec<f64>> {
        let res = contraction_solve(&family(s)?, max_iter, tol);
        if res.converged {
            Ok(res.v_inf)
        } else {
            Err(Error::FamilyDivergence(s))
        }
    };
    let mut worst: f64 = 0.0;
    for &s in params {
        let (a, b, c) = (solve(s - h)?, solve(s)?, solve(s + h)?);
        let second: Vec<f64> = (0..a.len()).map(|i| (a[i] - 2.0 * b[i] + c[i]) / (h * h)).collect();
        worst = worst.max(norm(&second));
    }
    Ok(worst)
}

/// `h(s, r, t) = t − s |t|^α |r|^γ` with `0 < α < 1 < γ`, `s >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldModel {
    pub alpha: f64,
    pub gamma: f64,
    pub s: f64,
}

impl FoldModel {
    pub fn new(alpha: f64, gamma: f64, s: f64) -> Result<Self> {
        if !(0.0 < alpha && alpha < 1.0 && gamma > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < alpha < 1 < gamma, got {alpha}, {gamma}"
            )));
        }
        if !(s >= 0.0) {
            return Err(Error::InvalidArgument(format!("s = {s} must be nonnegative")));
        }
        Ok(Self { alpha, gamma, s })
    }
}

pub fn fold_height(m: &FoldModel, r: f64, t: f64) -> f64 {
    t - m.s * t.abs().powf(m.alpha) * r.abs().powf(m.gamma)
}

/// `s^{1/(1−α)}`.
pub fn fold_width(m: &FoldModel) -> Result<f64> {
    if m.s <= 0.0 {
        return Err(Error::InvalidArgument("fold width needs s > 0".into()));
    }
    Ok(m.s.powf(1.0 / (1.0 - m.alpha)))
}

/// Radius where the fibres over `η` and `ε` meet:
/// `((η − ε) / (s (η^α − ε^α)))^{1/γ}`.
pub fn fold_intersection(m: &FoldModel, eta: f64, eps: f64) -> Option<f64> {
    if !(0.0 < eps && eps < eta) {
        return None;
    }
    let den = m.s * (eta.powf(m.alpha) - eps.powf(m.alpha));
    let rad = (eta - eps) / den;
    (den > 0.0 && rad.is_finite() && rad > 0.0).then(|| rad.powf(1.0 / m.gamma))
}

/// Scale `η` at which fibres `η` and `κη` first meet inside the unit ball,
/// found by bisection in `ln η`.
pub fn fold_onset_scale(m: &FoldModel, kappa: f64) -> Result<f64> {
    if !(0.0 < kappa && kappa < 1.0) {
        return Err(Error::InvalidArgument(format!("kappa = {kappa} not in (0, 1)")));
    }
    if m.s <= 0.0 {
        return Err(Error::InvalidArgument("fibres never meet for s = 0".into()));
    }
    let excess = |ln_eta: f64| -> f64 {
        let eta = ln_eta.exp();
        fold_intersection(m, eta, kappa * eta).map_or(f64::INFINITY, |r| r - 1.0)
    };
    let (mut lo, mut hi) = (-700.0f64, 50.0f64);
    if excess(lo) >= 0.0 || excess(hi) <= 0.0 {
        return Err(Error::InvalidArgument("onset scale outside the search window".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Central difference of `∂_t h` at `(r, t)`.
pub fn fold_dt(m: &FoldModel, r: f64, t: f64) -> f64 {
    let h = 1e-4 * t.abs().max(1e-300);
    (fold_height(m, r, t + h) - fold_height(m, r, t - h)) / (2.0 * h)
}
