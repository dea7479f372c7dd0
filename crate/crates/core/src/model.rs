//! The flat Spin(7) local model on `R^8 = C^4`.
//!
//! `C^4` is identified with `R^8` through the interleaved coordinates
//! `(x1, y1, x2, y2, x3, y3, x4, y4)` with `z_k = x_k + i y_k`; complex
//! vectors become real ones by `(Re v_1, Im v_1, ..., Re v_4, Im v_4)`.
//! Forms and indices are 0-based internally and 1-based when printed.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg};

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exterior form with coefficients in `T`, keyed by strictly increasing
/// index tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct AltForm<T> {
    degree: usize,
    dim: usize,
    coeffs: BTreeMap<Vec<usize>, T>,
}

/// Sorts `idx` in place and returns the permutation sign, or `None` when an
/// index repeats.
fn sort_with_sign(idx: &mut [usize]) -> Option<i32> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

impl<T> AltForm<T>
where
    T: Clone + Zero + PartialEq + Neg<Output = T> + Add<Output = T> + Mul<Output = T>,
{
    pub fn zero(degree: usize, dim: usize) -> Self {
        Self { degree, dim, coeffs: BTreeMap::new() }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &T)> {
        self.coeffs.iter()
    }

    /// Adds `c dx_{idx}` for an arbitrary (not necessarily sorted) index list.
    pub fn add_term(&mut self, idx: &[usize], c: T) -> Result<()> {
        if idx.len() != self.degree {
            return Err(Error::DimensionMismatch { expected: self.degree, got: idx.len() });
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.dim) {
            return Err(Error::IndexOutOfRange { index: bad, len: self.dim });
        }
        let mut key = idx.to_vec();
        let Some(sign) = sort_with_sign(&mut key) else {
            return Ok(());
        };
        let c = if sign < 0 { -c } else { c };
        let entry = self.coeffs.entry(key.clone()).or_insert_with(T::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.coeffs.remove(&key);
        }
        Ok(())
    }

    /// Coefficient of `dx_{idx}` with the sign of sorting `idx`.
    pub fn coefficient(&self, idx: &[usize]) -> T {
        let mut key = idx.to_vec();
        match sort_with_sign(&mut key) {
            None => T::zero(),
            Some(s) => {
                let c = self.coeffs.get(&key).cloned().unwrap_or_else(T::zero);
                if s < 0 {
                    -c
                } else {
                    c
                }
            }
        }
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let mut out = Self::zero(self.degree + other.degree, self.dim);
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                let idx: Vec<usize> = a.iter().chain(b).copied().collect();
                out.add_term(&idx, ca.clone() * cb.clone())?;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = Self::zero(self.degree, self.dim);
        for (k, c) in &self.coeffs {
            let v = c.clone() * s.clone();
            if !v.is_zero() {
                out.coeffs.insert(k.clone(), v);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.degree, self.dim) != (other.degree, other.dim) {
            return Err(Error::Shape("forms of different degree or dimension".into()));
        }
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.add_term(k, c.clone())?;
        }
        Ok(out)
    }

    /// Image under `dx_b ↦ signs[b] dx_{perm[b]}`.
    pub fn signed_permute(&self, perm: &[usize], signs: &[i8]) -> Result<Self> {
        let mut out = Self::zero(self.degree, self.dim);
        for (k, c) in &self.coeffs {
            let idx: Vec<usize> = k.iter().map(|&b| perm[b]).collect();
            let neg = k.iter().filter(|&&b| signs[b] < 0).count() % 2 == 1;
            out.add_term(&idx, if neg { -c.clone() } else { c.clone() })?;
        }
        Ok(out)
    }
}

impl<T: fmt::Display> fmt::Display for AltForm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(k, c)| {
                let idx: String = k.iter().map(|i| (i + 1).to_string()).collect();
                format!("({c}) dx_{idx}")
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl AltForm<f64> {
    /// `φ(v_1, ..., v_k)`: sum of coefficient times the matching minor.
    pub fn evaluate(&self, vectors: &[Vec<f64>]) -> Result<f64> {
        if vectors.len() != self.degree {
            return Err(Error::DimensionMismatch { expected: self.degree, got: vectors.len() });
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        let k = self.degree;
        let mut total = 0.0;
        for (idx, c) in &self.coeffs {
            let m = DMatrix::from_fn(k, k, |r, s| vectors[s][idx[r]]);
            total += c * m.determinant();
        }
        Ok(total)
    }
}

fn term_list(terms: &[(i8, [usize; 4])]) -> AltForm<f64> {
    let mut phi = AltForm::zero(4, 8);
    for &(s, idx) in terms {
        let idx: Vec<usize> = idx.iter().map(|i| i - 1).collect();
        phi.add_term(&idx, s as f64).expect("valid term");
    }
    phi
}

/// The standard Cayley 4-form on `R^8` (14 terms).
pub fn cayley_form_standard() -> AltForm<f64> {
    term_list(&[
        (1, [1, 2, 3, 4]),
        (-1, [1, 2, 5, 6]),
        (-1, [1, 2, 7, 8]),
        (-1, [1, 3, 5, 7]),
        (1, [1, 3, 6, 8]),
        (-1, [1, 4, 5, 8]),
        (-1, [1, 4, 6, 7]),
        (-1, [2, 3, 5, 8]),
        (-1, [2, 3, 6, 7]),
        (1, [2, 4, 5, 7]),
        (-1, [2, 4, 6, 8]),
        (-1, [3, 4, 5, 6]),
        (-1, [3, 4, 7, 8]),
        (1, [5, 6, 7, 8]),
    ])
}

fn x(k: usize) -> usize {
    2 * k
}

fn y(k: usize) -> usize {
    2 * k + 1
}

/// `ω0 = Σ dx_k ∧ dy_k` on `C^4`.
pub fn kahler_form<T>() -> AltForm<T>
where
    T: Clone + Zero + PartialEq + Neg<Output = T> + Add<Output = T> + Mul<Output = T> + From<i8>,
{
    let mut w = AltForm::zero(2, 8);
    for k in 0..4 {
        w.add_term(&[x(k), y(k)], T::from(1)).expect("valid term");
    }
    w
}

/// `Ω0 = dz_1 ∧ dz_2 ∧ dz_3 ∧ dz_4` with complex coefficients.
pub fn holomorphic_volume() -> AltForm<Complex64> {
    let mut out = dz(0, false);
    for k in 1..4 {
        out = out.wedge(&dz(k, false)).expect("same dimension");
    }
    out
}

fn dz(k: usize, conj: bool) -> AltForm<Complex64> {
    let mut f = AltForm::zero(1, 8);
    f.add_term(&[x(k)], Complex64::new(1.0, 0.0)).expect("valid term");
    f.add_term(&[y(k)], Complex64::new(0.0, if conj { -1.0 } else { 1.0 }))
        .expect("valid term");
    f
}

/// `Re Ω0 + ½ ω0 ∧ ω0`.
pub fn cy4_cayley_form() -> AltForm<f64> {
    let omega = holomorphic_volume();
    let mut phi = AltForm::zero(4, 8);
    for (k, c) in omega.terms() {
        phi.add_term(k, c.re).expect("valid term");
    }
    let w: AltForm<f64> = kahler_form();
    phi.add(&w.wedge(&w).expect("same dimension").scale(0.5))
        .expect("same shape")
}

/// Exact check of `ω^4 / 4! = (−1)^6 (i/2)^4 Ω ∧ Ω̄` on `C^4`.
pub fn cy_normalization_holds() -> bool {
    use num_complex::Complex;
    use num_rational::Rational64;
    type Q = Complex<Rational64>;
    let q = |re: i64, im: i64| Q::new(Rational64::from_integer(re), Rational64::from_integer(im));
    let dzq = |k: usize, conj: bool| {
        let mut f: AltForm<Q> = AltForm::zero(1, 8);
        f.add_term(&[x(k)], q(1, 0)).expect("valid term");
        f.add_term(&[y(k)], q(0, if conj { -1 } else { 1 })).expect("valid term");
        f
    };
    let mut w: AltForm<Q> = AltForm::zero(2, 8);
    for k in 0..4 {
        w.add_term(&[x(k), y(k)], q(1, 0)).expect("valid term");
    }
    let w4 = w.wedge(&w).and_then(|a| a.wedge(&w)).and_then(|a| a.wedge(&w));
    let mut om = dzq(0, false);
    let mut omb = dzq(0, true);
    for k in 1..4 {
        om = om.wedge(&dzq(k, false)).expect("same dimension");
        omb = omb.wedge(&dzq(k, true)).expect("same dimension");
    }
    let (Ok(w4), Ok(top)) = (w4, om.wedge(&omb)) else {
        return false;
    };
    let lhs = w4.scale(Q::new(Rational64::new(1, 24), Rational64::zero()));
    // (−1)^{4·3/2} (i/2)^4 = 1/16
    let rhs = top.scale(Q::new(Rational64::new(1, 16), Rational64::zero()));
    lhs == rhs && lhs.num_terms() == 1
}

/// Signed coordinate permutation `dx_b ↦ signs[b] dx_{perm[b]}` (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedPermutation {
    pub perm: Vec<usize>,
    pub signs: Vec<i8>,
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// First signed permutation (in lexicographic permutation order, then sign
/// bitmask order) carrying `from` onto `to`.
pub fn find_signed_permutation(from: &AltForm<f64>, to: &AltForm<f64>) -> Option<SignedPermutation> {
    let n = from.dim();
    if n != to.dim() || from.degree() != to.degree() || from.num_terms() != to.num_terms() {
        return None;
    }
    let support: Vec<Vec<usize>> = to.terms().map(|(k, _)| k.clone()).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let supported = from.terms().all(|(k, _)| {
            let mut img: Vec<usize> = k.iter().map(|&b| perm[b]).collect();
            img.sort_unstable();
            support.binary_search(&img).is_ok()
        });
        if supported {
            for mask in 0u32..(1 << n) {
                let signs: Vec<i8> = (0..n).map(|b| if mask >> b & 1 == 1 { -1 } else { 1 }).collect();
                if from.signed_permute(&perm, &signs).ok().as_ref() == Some(to) {
                    return Some(SignedPermutation { perm, signs });
                }
            }
        }
        if !next_permutation(&mut perm) {
            return None;
        }
    }
}

/// Four real 8-vectors spanning a 4-plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame4 {
    pub vectors: [Vec<f64>; 4],
}

impl Frame4 {
    pub fn new(vectors: [Vec<f64>; 4]) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != 8) {
            return Err(Error::DimensionMismatch { expected: 8, got: v.len() });
        }
        Ok(Self { vectors })
    }

    pub fn standard(idx: [usize; 4]) -> Self {
        let e = |i: usize| {
            let mut v = vec![0.0; 8];
            v[i] = 1.0;
            v
        };
        Self { vectors: idx.map(e) }
    }

    pub fn gram(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| dot(&self.vectors[i], &self.vectors[j]))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `φ(f_1, ..., f_4) / sqrt(det Gram(f))`.
pub fn restrict_ratio(phi: &AltForm<f64>, fr: &Frame4) -> Result<f64> {
    let g = fr.gram();
    let scale = g.diagonal().iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let det = g.determinant();
    if !(det > 1e-24 * scale.powi(4)) {
        return Err(Error::DegenerateFrame);
    }
    Ok(phi.evaluate(&fr.vectors)? / det.sqrt())
}

/// Maximum of `|restrict_ratio|` over `samples` Gaussian frames.
pub fn calibration_sweep(phi: &AltForm<f64>, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let vs: [Vec<f64>; 4] =
            std::array::from_fn(|_| (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect());
        match restrict_ratio(phi, &Frame4 { vectors: vs }) {
            Ok(r) => worst = worst.max(r.abs()),
            Err(Error::DegenerateFrame) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(worst)
}

/// `f0(x, y, z, w) = (x² + y² + z², w)`.
pub fn f0(z: &[Complex64; 4]) -> [Complex64; 2] {
    [z[0] * z[0] + z[1] * z[1] + z[2] * z[2], z[3]]
}

/// Complex differential of `f0` applied to `v`.
pub fn df0(z: &[Complex64; 4], v: &[Complex64; 4]) -> [Complex64; 2] {
    [2.0 * (z[0] * v[0] + z[1] * v[1] + z[2] * v[2]), v[3]]
}

/// Point of the fibre `A_eps = f0^{-1}(eps, w0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadricFiberPoint {
    pub eps: Complex64,
    pub w0: Complex64,
    pub point: [Complex64; 4],
}

impl QuadricFiberPoint {
    pub fn new(eps: Complex64, w0: Complex64, point: [Complex64; 4]) -> Result<Self> {
        let [e, w] = f0(&point);
        let scale = 1.0 + point.iter().map(|c| c.norm_sqr()).sum::<f64>();
        let res = (e - eps).norm().max((w - w0).norm());
        if res > 1e-12 * scale {
            return Err(Error::NotOnVariety(res));
        }
        Ok(Self { eps, w0, point })
    }

    /// The point `(sqrt((r²+ε)/2), i sqrt((r²−ε)/2), 0, 0)` on `A_ε`, `ε > 0`
    /// real, at distance `r >= sqrt(ε)` from the vertex.
    pub fn on_real_fiber(eps: f64, r: f64) -> Result<Self> {
        if !(eps > 0.0) || r * r < eps {
            return Err(Error::InvalidArgument(format!(
                "radius {r} is below the waist of A_{eps}"
            )));
        }
        let a = ((r * r + eps) / 2.0).sqrt();
        let b = ((r * r - eps).max(0.0) / 2.0).sqrt();
        let zero = Complex64::new(0.0, 0.0);
        Self::new(
            Complex64::new(eps, 0.0),
            zero,
            [Complex64::new(a, 0.0), Complex64::new(0.0, b), zero, zero],
        )
    }

    /// Sample at radius `r` on `A_1`, or on `A_{r²}` where `A_1` does not
    /// reach (`r < 1`).
    pub fn at_radius(r: f64) -> Result<Self> {
        Self::on_real_fiber(if r >= 1.0 { 1.0 } else { r * r }, r)
    }

    /// `|(x, y, z)|`.
    pub fn radius(&self) -> f64 {
        self.point[..3].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `(Re v_1, Im v_1, ..., Re v_4, Im v_4)`.
pub fn realify(v: &[Complex64; 4]) -> Vec<f64> {
    v.iter().flat_map(|c| [c.re, c.im]).collect()
}

fn times_i(v: &[Complex64; 4]) -> [Complex64; 4] {
    v.map(|c| c * Complex64::i())
}

fn hermitian_dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Real orthonormal frame `(u1, i u1, u2, i u2)` of the tangent space of the
/// fibre through `p`, where `(u1, u2)` is a Hermitian orthonormal basis of
/// `ker Df0`.
pub fn fiber_tangent_frame(p: &QuadricFiberPoint) -> Result<Frame4> {
    let r = p.radius();
    if r < 1e-12 {
        return Err(Error::SingularPoint);
    }
    // ker Df0 = {(a, b, c, 0) : Hermitian-orthogonal to (x̄, ȳ, z̄)}
    let n: Vec<Complex64> = p.point[..3].iter().map(|c| c.conj() / r).collect();
    let mut candidates: Vec<Vec<Complex64>> = (0..3)
        .map(|k| {
            let mut e = vec![Complex64::zero(); 3];
            e[k] = Complex64::new(1.0, 0.0);
            let c = hermitian_dot(&e, &n);
            e.iter().zip(&n).map(|(a, b)| a - c * b).collect()
        })
        .collect();
    candidates.sort_by(|a, b| {
        let na = hermitian_dot(a, a).re;
        let nb = hermitian_dot(b, b).re;
        nb.partial_cmp(&na).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for mut v in candidates {
        for b in &basis {
            let c = hermitian_dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
        let norm = hermitian_dot(&v, &v).re.sqrt();
        if norm > 1e-8 {
            basis.push(v.iter().map(|c| c / norm).collect());
        }
        if basis.len() == 2 {
            break;
        }
    }
    if basis.len() < 2 {
        return Err(Error::DegenerateFrame);
    }
    let lift = |u: &Vec<Complex64>| [u[0], u[1], u[2], Complex64::zero()];
    let u1 = lift(&basis[0]);
    let u2 = lift(&basis[1]);
    Frame4::new([realify(&u1), realify(&times_i(&u1)), realify(&u2), realify(&times_i(&u2))])
}

/// Normalization of `s2`: `s2 = (x̄, ȳ, z̄, 0) / (S2_FACTOR |(x, y, z)|²)`,
/// fixed so that `Df0[s2] = (1, 0)`.
pub const S2_FACTOR: f64 = 2.0;

/// Lifts `s1 = ∂_w` and `s2` of `∂_w` and `∂_ε`.
pub fn deformation_fields(p: &QuadricFiberPoint) -> Result<([Complex64; 4], [Complex64; 4])> {
    let r = p.radius();
    if r < 1e-12 {
        return Err(Error::SingularPoint);
    }
    let zero = Complex64::zero();
    let s1 = [zero, zero, zero, Complex64::new(1.0, 0.0)];
    let d = S2_FACTOR * r * r;
    let s2 = [p.point[0].conj() / d, p.point[1].conj() / d, p.point[2].conj() / d, zero];
    Ok((s1, s2))
}

/// Orthonormal basis `(n̂, i n̂, e_w, i e_w)` of the normal space of the
/// fibre, `n̂ = (x̄, ȳ, z̄, 0) / |(x, y, z)|`.
pub fn normal_frame(p: &QuadricFiberPoint) -> Result<Frame4> {
    let r = p.radius();
    if r < 1e-12 {
        return Err(Error::SingularPoint);
    }
    let zero = Complex64::zero();
    let n = [p.point[0].conj() / r, p.point[1].conj() / r, p.point[2].conj() / r, zero];
    let ew = [zero, zero, zero, Complex64::new(1.0, 0.0)];
    Frame4::new([realify(&n), realify(&times_i(&n)), realify(&ew), realify(&times_i(&ew))])
}

/// `det(w_1, ..., w_l, ρ^{−ζ} w_{l+1}, ..., ρ^{−ζ} w_4)` with each `w_j`
/// replaced by its components in the orthonormal `normal` basis.
pub fn nondegeneracy_det(fields: &[Vec<f64>], normal: &Frame4, l: usize, zeta: f64, rho: f64) -> Result<f64> {
    if fields.len() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: fields.len() });
    }
    if l > 4 {
        return Err(Error::InvalidArgument(format!("l = {l} exceeds 4")));
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("rho = {rho} must be positive")));
    }
    let scale = rho.powf(-zeta);
    let m = Matrix4::from_fn(|i, j| {
        let c = dot(&normal.vectors[i], &fields[j]);
        if j >= l {
            c * scale
        } else {
            c
        }
    });
    Ok(m.determinant())
}

/// The four fields `(s1, i s1, s2, i s2)` at `p` as real vectors.
pub fn deformation_frame_fields(p: &QuadricFiberPoint) -> Result<Vec<Vec<f64>>> {
    let (s1, s2) = deformation_fields(p)?;
    Ok(vec![realify(&s1), realify(&times_i(&s1)), realify(&s2), realify(&times_i(&s2))])
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), got: ys.len() });
    }
    if xs.len() < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument("log fit needs positive samples".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all radii coincide".into()));
    }
    Ok(sxy / sxx)
}

/// Dyadic radii `2^0, ..., 2^10`.
pub fn dyadic_radii() -> Vec<f64> {
    (0..=10).map(|k| 2f64.powi(k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub radii: Vec<f64>,
    pub s1_slope: f64,
    pub s2_slope: f64,
    pub max_lift_error: f64,
}

/// Measures the decay of `|s1|` and `|s2|` along `A_1` and the lifting error
/// `|Df0[s1] − (0,1)|`, `|Df0[s2] − (1,0)|`.
pub fn measure_rates() -> Result<RateReport> {
    let radii = dyadic_radii();
    let mut n1 = Vec::new();
    let mut n2 = Vec::new();
    let mut err: f64 = 0.0;
    let one = Complex64::new(1.0, 0.0);
    for &r in &radii {
        let p = QuadricFiberPoint::at_radius(r)?;
        let (s1, s2) = deformation_fields(&p)?;
        let norm = |v: &[Complex64; 4]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        n1.push(norm(&s1));
        n2.push(norm(&s2));
        let d1 = df0(&p.point, &s1);
        let d2 = df0(&p.point, &s2);
        err = err
            .max(d1[0].norm())
            .max((d1[1] - one).norm())
            .max((d2[0] - one).norm())
            .max(d2[1].norm());
    }
    Ok(RateReport {
        s1_slope: fit_log_slope(&radii, &n1)?,
        s2_slope: fit_log_slope(&radii, &n2)?,
        radii,
        max_lift_error: err,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetSweep {
    pub samples: usize,
    pub min_abs_det: f64,
    pub max_abs_det: f64,
    /// Largest `C <= 1` with every `|det|` in `[C, 1/C]`.
    pub bound: f64,
}

/// `|det|` of `(s1, i s1, ρ^{−ζ} s2, ρ^{−ζ} i s2)` over `samples`
/// log-spaced radii in `[rmin, rmax]`, with `ρ` the sample radius.
pub fn det_sweep(zeta: f64, rmin: f64, rmax: f64, samples: usize) -> Result<DetSweep> {
    if !(rmin > 0.0 && rmax >= rmin) || samples == 0 {
        return Err(Error::InvalidArgument("need 0 < rmin <= rmax and samples > 0".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for i in 0..samples {
        let t = if samples == 1 { 0.0 } else { i as f64 / (samples - 1) as f64 };
        let r = rmin * (rmax / rmin).powf(t);
        let p = QuadricFiberPoint::at_radius(r)?;
        let d = nondegeneracy_det(&deformation_frame_fields(&p)?, &normal_frame(&p)?, 2, zeta, p.radius())?.abs();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    Ok(DetSweep {
        samples,
        min_abs_det: lo,
        max_abs_det: hi,
        bound: lo.min(1.0 / hi).min(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn standard_form_terms() {
        let phi = cayley_form_standard();
        assert_eq!(phi.num_terms(), 14);
        assert_eq!(phi.coefficient(&[0, 1, 2, 3]), 1.0);
        assert_eq!(phi.coefficient(&[4, 5, 6, 7]), 1.0);
        assert_eq!(phi.coefficient(&[0, 1, 4, 5]), -1.0);
        assert_eq!(phi.coefficient(&[1, 0, 2, 3]), -1.0);
    }

    #[test]
    fn restrict_ratio_examples() {
        let phi = cayley_form_standard();
        assert_eq!(restrict_ratio(&phi, &Frame4::standard([0, 1, 2, 3])).unwrap(), 1.0);
        assert_eq!(restrict_ratio(&phi, &Frame4::standard([0, 1, 2, 4])).unwrap(), 0.0);
        assert_eq!(
            restrict_ratio(&phi, &Frame4::standard([0, 1, 2, 2])),
            Err(Error::DegenerateFrame)
        );
        // scaling the frame does not change the ratio
        let mut f = Frame4::standard([0, 1, 2, 3]);
        f.vectors[0][0] = 3.0;
        assert_abs_diff_eq!(restrict_ratio(&phi, &f).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn cy4_form_structure() {
        let phi = cy4_cayley_form();
        assert_eq!(phi.num_terms(), 14);
        // ½ω∧ω contributes dx1 dy1 dx2 dy2 with coefficient 1
        assert_eq!(phi.coefficient(&[x(0), y(0), x(1), y(1)]), 1.0);
        // Re Ω: dx1 dx2 dx3 dx4 with +1, dy1 dy2 dx3 dx4 with -1
        assert_eq!(phi.coefficient(&[x(0), x(1), x(2), x(3)]), 1.0);
        assert_eq!(phi.coefficient(&[y(0), y(1), x(2), x(3)]), -1.0);
        assert_eq!(phi.coefficient(&[y(0), y(1), y(2), y(3)]), 1.0);
        let complex_plane = Frame4::standard([x(0), y(0), x(1), y(1)]);
        assert_eq!(restrict_ratio(&phi, &complex_plane).unwrap(), 1.0);
    }

    #[test]
    fn cy4_and_standard_forms_are_equivalent() {
        let found = find_signed_permutation(&cayley_form_standard(), &cy4_cayley_form())
            .expect("signed permutation exists");
        let image = cayley_form_standard()
            .signed_permute(&found.perm, &found.signs)
            .unwrap();
        assert_eq!(image, cy4_cayley_form());
    }

    #[test]
    fn cy_normalization() {
        assert!(cy_normalization_holds());
    }

    #[test]
    fn wedge_is_graded_commutative() {
        let w: AltForm<f64> = kahler_form();
        let mut a = AltForm::zero(1, 8);
        a.add_term(&[0], 1.0).unwrap();
        let mut b = AltForm::zero(1, 8);
        b.add_term(&[3], 2.0).unwrap();
        assert_eq!(a.wedge(&b).unwrap(), b.wedge(&a).unwrap().scale(-1.0));
        assert_eq!(a.wedge(&a).unwrap().num_terms(), 0);
        assert_eq!(w.wedge(&a).unwrap(), a.wedge(&w).unwrap());
    }

    #[test]
    fn f0_examples() {
        assert_eq!(f0(&[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]), [c(1., 0.), c(0., 0.)]);
        assert_eq!(f0(&[c(1., 0.), c(0., 1.), c(0., 0.), c(5., 0.)]), [c(0., 0.), c(5., 0.)]);
        let z = [c(0.3, -1.), c(2., 0.5), c(-0.7, 0.2), c(1., 1.)];
        let lam = c(0.4, 1.3);
        let zl = [z[0] * lam, z[1] * lam, z[2] * lam, z[3]];
        assert!((f0(&zl)[0] - f0(&z)[0] * lam * lam).norm() < 1e-12);
    }

    #[test]
    fn tangent_frame_at_unit_point() {
        let p = QuadricFiberPoint::new(c(1., 0.), c(0., 0.), [c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        let fr = fiber_tangent_frame(&p).unwrap();
        assert_abs_diff_eq!(restrict_ratio(&cy4_cayley_form(), &fr).unwrap(), 1.0, epsilon = 1e-12);
        let g = fr.gram();
        assert!((g - Matrix4::identity()).abs().max() < 1e-12);
    }

    #[test]
    fn singular_point_rejected() {
        let zero = c(0., 0.);
        let p = QuadricFiberPoint::new(zero, zero, [zero; 4]).unwrap();
        assert_eq!(fiber_tangent_frame(&p), Err(Error::SingularPoint));
        assert!(deformation_fields(&p).is_err());
        assert!(QuadricFiberPoint::new(c(2., 0.), zero, [c(1., 0.), zero, zero, zero]).is_err());
    }

    #[test]
    fn deformation_field_rates() {
        let rep = measure_rates().unwrap();
        assert_abs_diff_eq!(rep.s2_slope, -1.0, epsilon = 0.01);
        assert_abs_diff_eq!(rep.s1_slope, 0.0, epsilon = 1e-12);
        assert!(rep.max_lift_error < 1e-10);
    }

    #[test]
    fn determinant_examples() {
        let p = QuadricFiberPoint::at_radius(1.0).unwrap();
        let normal = normal_frame(&p).unwrap();
        let own: Vec<Vec<f64>> = normal.vectors.to_vec();
        for rho in [0.1, 1.0, 7.0] {
            assert_abs_diff_eq!(nondegeneracy_det(&own, &normal, 4, -1.0, rho).unwrap().abs(), 1.0, epsilon = 1e-12);
        }
        let mut dup = own.clone();
        dup[3] = dup[2].clone();
        assert_eq!(nondegeneracy_det(&dup, &normal, 2, -1.0, 2.0).unwrap(), 0.0);
        assert!(nondegeneracy_det(&own[..3], &normal, 2, -1.0, 2.0).is_err());
    }

    #[test]
    fn determinant_sweep_is_bounded() {
        let s = det_sweep(-1.0, 0.1, 10.0, 41).unwrap();
        assert_abs_diff_eq!(s.min_abs_det, 0.25, epsilon = 1e-10);
        assert_abs_diff_eq!(s.max_abs_det, 0.25, epsilon = 1e-10);
        assert_abs_diff_eq!(s.bound, 0.25, epsilon = 1e-10);
    }

    #[test]
    fn slope_fit_recovers_exponents() {
        let rs = dyadic_radii();
        for g in [-2.0, -1.0, 0.0, 1.0] {
            let ys: Vec<f64> = rs.iter().map(|r: &f64| 3.5 * r.powf(g)).collect();
            assert_abs_diff_eq!(fit_log_slope(&rs, &ys).unwrap(), g, epsilon = 1e-3);
        }
    }

    #[test]
    fn calibration_inequality_on_random_frames() {
        let worst = calibration_sweep(&cayley_form_standard(), 10_000, 7).unwrap();
        assert!(worst <= 1.0 + 1e-10, "max ratio {worst}");
        assert!(worst > 0.5);
    }

    proptest! {
        #[test]
        fn fibres_are_cayley(r in 0.05f64..50.0, theta in 0.0f64..std::f64::consts::TAU, w in -3.0f64..3.0) {
            // rotate the sample point by the SO(3) action in the (x, z) plane
            let p = QuadricFiberPoint::at_radius(r).unwrap();
            let (s, co) = theta.sin_cos();
            let pt = [
                p.point[0] * co - p.point[2] * s,
                p.point[1],
                p.point[0] * s + p.point[2] * co,
                c(w, 0.5 * w),
            ];
            let q = QuadricFiberPoint::new(p.eps, pt[3], pt).unwrap();
            let fr = fiber_tangent_frame(&q).unwrap();
            prop_assert!((restrict_ratio(&cy4_cayley_form(), &fr).unwrap() - 1.0).abs() < 1e-10);
            for v in &fr.vectors {
                let cv = [c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5]), c(v[6], v[7])];
                let d = df0(&q.point, &cv);
                prop_assert!(d[0].norm() < 1e-12 && d[1].norm() < 1e-12);
            }
        }
    }
}
