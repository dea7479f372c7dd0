//! Exact integer linear algebra: Smith invariants, integer kernels,
//! determinants, signatures of symmetric forms, and short-vector enumeration
//! for positive definite Gram matrices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

pub fn to_big(m: &[Vec<i64>]) -> IntMatrix {
    m.iter()
        .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

/// Nonzero invariant factors `d1 | d2 | ...` of an integer matrix, all positive.
pub fn smith_invariants(m: &IntMatrix) -> Vec<BigInt> {
    let mut a = m.clone();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut out = Vec::new();
    for t in 0..rows.min(cols) {
        // smallest nonzero entry in the trailing block becomes the pivot
        let Some((pr, pc)) = min_nonzero(&a, t) else {
            break;
        };
        a.swap(t, pr);
        for row in a.iter_mut() {
            row.swap(t, pc);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                for j in t..cols {
                    let v = &q * &a[t][j];
                    a[i][j] -= v;
                }
                if !a[i][t].is_zero() {
                    a.swap(t, i);
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                for row in a.iter_mut().take(rows).skip(t) {
                    let v = &q * &row[t];
                    row[j] -= v;
                }
                if !a[t][j].is_zero() {
                    for row in a.iter_mut() {
                        row.swap(t, j);
                    }
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // enforce divisibility of the trailing block by the pivot
            let bad = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !(&a[i][j] % &a[t][t]).is_zero());
            match bad {
                Some((i, _)) => {
                    for j in t..cols {
                        let v = a[i][j].clone();
                        a[t][j] += v;
                    }
                }
                None => break,
            }
        }
        out.push(a[t][t].abs());
    }
    out
}

fn min_nonzero(a: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, row) in a.iter().enumerate().skip(t) {
        for (j, v) in row.iter().enumerate().skip(t) {
            if v.is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| v.abs() < a[bi][bj].abs()) {
                best = Some((i, j));
            }
        }
    }
    best
}

/// Rank of an integer matrix (over the rationals).
pub fn rank(m: &IntMatrix) -> usize {
    smith_invariants(m).len()
}

/// A basis (as columns, returned row-wise per basis vector) of the
/// saturated kernel `{x in Z^n : A x = 0}`.
pub fn integer_kernel(a: &IntMatrix, n: usize) -> Vec<Vec<BigInt>> {
    let rows = a.len();
    let mut m: IntMatrix = a.clone();
    // unimodular column transform, stored as columns u[c]
    let mut u: Vec<Vec<BigInt>> = (0..n)
        .map(|c| (0..n).map(|r| if r == c { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let col_op = |m: &mut IntMatrix, u: &mut Vec<Vec<BigInt>>, dst: usize, src: usize, k: &BigInt| {
        // column dst -= k * column src
        for row in m.iter_mut() {
            let v = k * &row[src];
            row[dst] -= v;
        }
        let srcv = u[src].clone();
        for (d, s) in u[dst].iter_mut().zip(srcv) {
            *d -= k * s;
        }
    };
    let swap_cols = |m: &mut IntMatrix, u: &mut Vec<Vec<BigInt>>, i: usize, j: usize| {
        for row in m.iter_mut() {
            row.swap(i, j);
        }
        u.swap(i, j);
    };
    let mut lead = 0;
    for r in 0..rows {
        if lead >= n {
            break;
        }
        loop {
            // pick the smallest nonzero entry of row r among columns >= lead
            let pivot = (lead..n)
                .filter(|&c| !m[r][c].is_zero())
                .min_by(|&x, &y| m[r][x].abs().cmp(&m[r][y].abs()));
            let Some(p) = pivot else { break };
            swap_cols(&mut m, &mut u, lead, p);
            let mut done = true;
            for c in lead + 1..n {
                if m[r][c].is_zero() {
                    continue;
                }
                let q = m[r][c].div_floor(&m[r][lead]);
                col_op(&mut m, &mut u, c, lead, &q);
                if !m[r][c].is_zero() {
                    done = false;
                }
            }
            if done {
                lead += 1;
                break;
            }
        }
    }
    u.into_iter().skip(lead).collect()
}

/// Determinant by fraction-free Bareiss elimination.
pub fn determinant(m: &IntMatrix) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Signature `(positive, negative, zero)` of a symmetric rational matrix,
/// by congruence diagonalization.
pub fn signature(m: &[Vec<BigRational>]) -> (usize, usize, usize) {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let (mut pos, mut neg, mut zero) = (0, 0, 0);
    for k in 0..n {
        if a[k][k].is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !a[j][j].is_zero()) {
                a.swap(k, j);
                for row in a.iter_mut() {
                    row.swap(k, j);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| !a[k][j].is_zero()) {
                // x_k <- x_k + x_j gives a_kk = 2 a_kj != 0
                for c in 0..n {
                    let v = a[j][c].clone();
                    a[k][c] += v;
                }
                for row in a.iter_mut() {
                    let v = row[j].clone();
                    row[k] += v;
                }
            } else {
                zero += 1;
                continue;
            }
        }
        let p = a[k][k].clone();
        if p.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &p;
            for c in k..n {
                let v = &f * &a[k][c];
                a[i][c] -= v;
            }
        }
        for row in a.iter_mut().skip(k + 1) {
            row[k] = BigRational::zero();
        }
        for c in k + 1..n {
            a[k][c] = BigRational::zero();
        }
    }
    (pos, neg, zero)
}

pub fn signature_int(m: &[Vec<i64>]) -> (usize, usize, usize) {
    let q: Vec<Vec<BigRational>> = m
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
        .collect();
    signature(&q)
}

/// LLL reduction of a positive definite integer Gram matrix.
///
/// Returns the unimodular transform `T` (columns are the new basis in old
/// coordinates) and the reduced Gram matrix `T^t G T`.
pub fn lll_gram(gram: &[Vec<i64>]) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let n = gram.len();
    let mut g: Vec<Vec<i128>> = gram.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut t: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect();
    // basis vector k is column k of t; gram indexes the current basis
    let add = |g: &mut Vec<Vec<i128>>, t: &mut Vec<Vec<i128>>, k: usize, j: usize, q: i128| {
        // b_k <- b_k - q b_j
        for row in t.iter_mut() {
            row[k] -= q * row[j];
        }
        let gkj = g[k][j];
        let gjj = g[j][j];
        for i in 0..g.len() {
            if i != k {
                let v = g[i][k] - q * g[i][j];
                g[i][k] = v;
                g[k][i] = v;
            }
        }
        g[k][k] = g[k][k] - 2 * q * gkj + q * q * gjj;
    };
    let swap = |g: &mut Vec<Vec<i128>>, t: &mut Vec<Vec<i128>>, a: usize, b: usize| {
        g.swap(a, b);
        for row in g.iter_mut() {
            row.swap(a, b);
        }
        for row in t.iter_mut() {
            row.swap(a, b);
        }
    };
    let mut k = 1;
    let mut guard = 0usize;
    while k < n && guard < 100_000 {
        guard += 1;
        for j in (0..k).rev() {
            let q = gram_schmidt(&g).0[k][j].round() as i128;
            if q != 0 {
                add(&mut g, &mut t, k, j, q);
            }
        }
        let (mu, bstar) = gram_schmidt(&g);
        if bstar[k] < (0.75 - mu[k][k - 1] * mu[k][k - 1]) * bstar[k - 1] {
            swap(&mut g, &mut t, k, k - 1);
            k = (k - 1).max(1);
        } else {
            k += 1;
        }
    }
    let cast = |m: Vec<Vec<i128>>| -> Vec<Vec<i64>> {
        m.into_iter()
            .map(|r| r.into_iter().map(|x| x as i64).collect())
            .collect()
    };
    (cast(t), cast(g))
}

/// Gram-Schmidt coefficients `mu[i][j]` and squared lengths `|b*_i|^2`
/// computed from a Gram matrix.
fn gram_schmidt(g: &[Vec<i128>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = g.len();
    let mut mu = vec![vec![0.0; n]; n];
    let mut bstar = vec![0.0; n];
    for i in 0..n {
        for j in 0..i {
            let mut v = g[i][j] as f64;
            for k in 0..j {
                v -= mu[j][k] * mu[i][k] * bstar[k];
            }
            mu[i][j] = v / bstar[j];
        }
        let mut v = g[i][i] as f64;
        for k in 0..i {
            v -= mu[i][k] * mu[i][k] * bstar[k];
        }
        bstar[i] = v;
        mu[i][i] = 1.0;
    }
    (mu, bstar)
}

/// All nonzero integer vectors `x` with `x^t G x <= bound` for a positive
/// definite Gram matrix (Fincke-Pohst enumeration).
pub fn short_vectors(gram: &[Vec<i64>], bound: i64) -> Vec<Vec<i64>> {
    let n = gram.len();
    if n == 0 {
        return Vec::new();
    }
    let (t, g) = lll_gram(gram);
    let (mu, bstar) = {
        let g128: Vec<Vec<i128>> = g.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        gram_schmidt(&g128)
    };
    let slack = 1e-6 * (bound as f64).max(1.0);
    let mut found = Vec::new();
    let mut x = vec![0i64; n];
    enumerate_level(n - 1, bound as f64 + slack, &mu, &bstar, &mut x, &mut found, &g, bound);
    // back to the caller's coordinates
    found
        .into_iter()
        .map(|y| {
            (0..n)
                .map(|i| (0..n).map(|j| t[i][j] * y[j]).sum())
                .collect()
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn enumerate_level(
    level: usize,
    budget: f64,
    mu: &[Vec<f64>],
    bstar: &[f64],
    x: &mut Vec<i64>,
    found: &mut Vec<Vec<i64>>,
    g: &[Vec<i64>],
    bound: i64,
) {
    let n = x.len();
    let center: f64 = -(level + 1..n).map(|j| mu[j][level] * x[j] as f64).sum::<f64>();
    let radius = (budget.max(0.0) / bstar[level]).sqrt();
    let lo = (center - radius).ceil() as i64;
    let hi = (center + radius).floor() as i64;
    for v in lo..=hi {
        x[level] = v;
        let d = v as f64 - center;
        let rest = budget - d * d * bstar[level];
        if rest < -1e-9 {
            continue;
        }
        if level == 0 {
            if x.iter().any(|&c| c != 0) {
                let norm: i64 = (0..n)
                    .map(|i| (0..n).map(|j| x[i] * g[i][j] * x[j]).sum::<i64>())
                    .sum();
                if norm <= bound {
                    found.push(x.clone());
                }
            }
        } else {
            enumerate_level(level - 1, rest, mu, bstar, x, found, g, bound);
        }
    }
    x[level] = 0;
}

/// Rational approximation with denominator at most `max_den` by continued
/// fractions; `None` when no convergent lands within `tol` of `x`.
pub fn rationalize(x: f64, max_den: i64, tol: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        if (x - h1 as f64 / k1 as f64).abs() <= tol {
            return Some(BigRational::new(BigInt::from(h1), BigInt::from(k1)));
        }
        let frac = r - a;
        if frac.abs() < 1e-300 {
            break;
        }
        r = 1.0 / frac;
    }
    (k1 != 0 && (x - h1 as f64 / k1 as f64).abs() <= tol)
        .then(|| BigRational::new(BigInt::from(h1), BigInt::from(k1)))
}

pub fn big_to_i64(v: &BigInt) -> Option<i64> {
    v.to_i64()
}
