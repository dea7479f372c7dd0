//! The K3 lattice and its period domains.
//!
//! `Λ = H^2(K3, Z)` is realized as `U ⊕ U ⊕ U ⊕ E8(-1) ⊕ E8(-1)` with basis
//! order `e1, f1, e2, f2, e3, f3`, then the two `E8(-1)` blocks in Bourbaki
//! node order. Real vectors are plain `f64` coordinates in that basis; every
//! floating comparison uses an absolute tolerance supplied by the caller.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlinalg;

/// Symmetric integer bilinear form with labelled basis vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramLattice {
    gram: Vec<Vec<i64>>,
    labels: Vec<String>,
}

impl GramLattice {
    pub fn new(gram: Vec<Vec<i64>>) -> Result<Self> {
        let labels = (0..gram.len()).map(|i| format!("b{}", i + 1)).collect();
        Self::with_labels(gram, labels)
    }

    pub fn with_labels(gram: Vec<Vec<i64>>, labels: Vec<String>) -> Result<Self> {
        let n = gram.len();
        if let Some(row) = gram.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: row.len(),
            });
        }
        for i in 0..n {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidArgument(format!(
                        "gram matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: labels.len(),
            });
        }
        Ok(Self { gram, labels })
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Block-diagonal sum, relabelling blocks as given.
    pub fn direct_sum(blocks: &[GramLattice]) -> GramLattice {
        let n: usize = blocks.iter().map(|b| b.rank()).sum();
        let mut gram = vec![vec![0; n]; n];
        let mut labels = Vec::with_capacity(n);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.rank() {
                for j in 0..b.rank() {
                    gram[off + i][off + j] = b.gram[i][j];
                }
            }
            labels.extend(b.labels.iter().cloned());
            off += b.rank();
        }
        GramLattice { gram, labels }
    }

    fn relabel(mut self, labels: Vec<String>) -> Self {
        self.labels = labels;
        self
    }

    /// `(positive, negative, zero)` counts of the form.
    pub fn signature(&self) -> (usize, usize, usize) {
        intlinalg::signature_int(&self.gram)
    }

    pub fn determinant(&self) -> BigInt {
        intlinalg::determinant(&intlinalg::to_big(&self.gram))
    }

    pub fn is_even(&self) -> bool {
        self.gram.iter().enumerate().all(|(i, r)| r[i] % 2 == 0)
    }

    pub fn pair(&self, v: &LatticeVector, w: &LatticeVector) -> Result<i64> {
        self.check_len(v.0.len())?;
        self.check_len(w.0.len())?;
        Ok(bilinear(&self.gram, &v.0, &w.0))
    }

    pub fn inner(&self, v: &RealVector, w: &RealVector) -> Result<f64> {
        self.check_len(v.0.len())?;
        self.check_len(w.0.len())?;
        let mut s = 0.0;
        for (i, row) in self.gram.iter().enumerate() {
            if v.0[i] == 0.0 {
                continue;
            }
            let rw: f64 = row.iter().zip(&w.0).map(|(&g, &x)| g as f64 * x).sum();
            s += v.0[i] * rw;
        }
        Ok(s)
    }

    /// Gram matrix of the sublattice spanned by `basis`.
    pub fn restrict(&self, basis: &[LatticeVector]) -> Result<Vec<Vec<i64>>> {
        basis
            .iter()
            .map(|v| basis.iter().map(|w| self.pair(v, w)).collect())
            .collect()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                got: len,
            });
        }
        Ok(())
    }

    pub fn basis_vector(&self, i: usize) -> LatticeVector {
        let mut v = vec![0; self.rank()];
        v[i] = 1;
        LatticeVector(v)
    }

    /// Sum of labelled basis vectors with integer weights, e.g. `[("e1", 1), ("f1", 1)]`.
    pub fn vector(&self, parts: &[(&str, i64)]) -> Result<LatticeVector> {
        let mut v = vec![0; self.rank()];
        for (label, c) in parts {
            let i = self
                .index_of(label)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown basis label {label}")))?;
            v[i] += c;
        }
        Ok(LatticeVector(v))
    }
}

fn bilinear(g: &[Vec<i64>], v: &[i64], w: &[i64]) -> i64 {
    g.iter()
        .zip(v)
        .filter(|(_, &vi)| vi != 0)
        .map(|(row, &vi)| vi * row.iter().zip(w).map(|(&a, &b)| a * b).sum::<i64>())
        .sum()
}

/// The hyperbolic plane `U` with `e^2 = f^2 = 0`, `e.f = 1`.
pub fn hyperbolic_plane() -> GramLattice {
    GramLattice::with_labels(vec![vec![0, 1], vec![1, 0]], vec!["e".into(), "f".into()])
        .expect("valid gram")
}

/// The negative definite `E8(-1)`: negated Cartan matrix, Bourbaki labels.
pub fn e8_negative() -> GramLattice {
    // Bourbaki: 1-3-4-5-6-7-8 chain, node 2 attached to node 4
    let edges = [(1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4)];
    let mut g = vec![vec![0i64; 8]; 8];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = -2;
    }
    for (a, b) in edges {
        g[a - 1][b - 1] = 1;
        g[b - 1][a - 1] = 1;
    }
    GramLattice::with_labels(g, (1..=8).map(|i| format!("a{i}")).collect()).expect("valid gram")
}

/// `U^3 ⊕ E8(-1)^2`, rank 22, signature (3, 19).
pub fn k3_lattice() -> GramLattice {
    let mut blocks = Vec::new();
    for k in 1..=3 {
        blocks.push(hyperbolic_plane().relabel(vec![format!("e{k}"), format!("f{k}")]));
    }
    for k in 1..=2 {
        blocks.push(e8_negative().relabel((1..=8).map(|i| format!("E{k}_{i}")).collect()));
    }
    GramLattice::direct_sum(&blocks)
}

/// `U^3`, the unimodular rank-six lattice of signature (3, 3).
pub fn u3_lattice() -> GramLattice {
    let blocks: Vec<_> = (1..=3)
        .map(|k| hyperbolic_plane().relabel(vec![format!("e{k}"), format!("f{k}")]))
        .collect();
    GramLattice::direct_sum(&blocks)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeVector(pub Vec<i64>);

impl LatticeVector {
    pub fn to_real(&self) -> RealVector {
        RealVector(self.0.iter().map(|&x| x as f64).collect())
    }

    pub fn neg(&self) -> LatticeVector {
        LatticeVector(self.0.iter().map(|x| -x).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealVector(pub Vec<f64>);

impl RealVector {
    pub fn neg(&self) -> RealVector {
        RealVector(self.0.iter().map(|x| -x).collect())
    }

    pub fn scale(&self, s: f64) -> RealVector {
        RealVector(self.0.iter().map(|x| s * x).collect())
    }

    pub fn add(&self, other: &RealVector) -> RealVector {
        RealVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl From<LatticeVector> for RealVector {
    fn from(v: LatticeVector) -> Self {
        v.to_real()
    }
}

/// Sublattice given by basis vectors of the ambient lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SublatticeEmbedding {
    pub basis: Vec<LatticeVector>,
}

impl SublatticeEmbedding {
    pub fn new(basis: Vec<LatticeVector>) -> Self {
        Self { basis }
    }

    pub fn empty() -> Self {
        Self { basis: Vec::new() }
    }

    fn matrix(&self) -> intlinalg::IntMatrix {
        self.basis
            .iter()
            .map(|v| v.0.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }
}

/// True iff `Λ / N` is torsion free, i.e. every nonzero Smith invariant of
/// the basis matrix is one.
pub fn is_primitive_embedding(l: &GramLattice, emb: &SublatticeEmbedding) -> Result<bool> {
    for v in &emb.basis {
        l.check_len(v.0.len())?;
    }
    let inv = intlinalg::smith_invariants(&emb.matrix());
    if inv.len() != emb.basis.len() {
        return Err(Error::DependentColumns);
    }
    Ok(inv.iter().all(|d| d.is_one()))
}

/// `u = u_re + i u_im` satisfies `u.u = 0` and `u.ū > 0` within `tol`.
pub fn period_point_check(l: &GramLattice, u_re: &RealVector, u_im: &RealVector, tol: f64) -> Result<bool> {
    let rr = l.inner(u_re, u_re)?;
    let ii = l.inner(u_im, u_im)?;
    let ri = l.inner(u_re, u_im)?;
    Ok((rr - ii).abs() <= tol && ri.abs() <= tol && rr + ii > tol)
}

/// Period point lying in `P(N^⊥ ⊗ C)`.
pub fn in_polarised_domain(
    l: &GramLattice,
    n: &SublatticeEmbedding,
    u_re: &RealVector,
    u_im: &RealVector,
    tol: f64,
) -> Result<bool> {
    if !period_point_check(l, u_re, u_im, tol)? {
        return Ok(false);
    }
    for b in &n.basis {
        let b = b.to_real();
        if l.inner(u_re, &b)?.abs() > tol || l.inner(u_im, &b)?.abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

fn negated(g: &[Vec<i64>]) -> Vec<Vec<i64>> {
    g.iter().map(|r| r.iter().map(|x| -x).collect()).collect()
}

fn combine(basis: &[LatticeVector], coeffs: &[i64], rank: usize) -> LatticeVector {
    let mut out = vec![0; rank];
    for (b, &c) in basis.iter().zip(coeffs) {
        if c == 0 {
            continue;
        }
        for (o, x) in out.iter_mut().zip(&b.0) {
            *o += c * x;
        }
    }
    LatticeVector(out)
}

/// Every `λ` in the span of `basis` with `λ.λ = -2`, when the form restricted
/// to that span is negative definite. The list is sorted and closed under
/// negation.
pub fn enumerate_roots_in_neg_def(l: &GramLattice, basis: &[LatticeVector]) -> Result<Vec<LatticeVector>> {
    let g = l.restrict(basis)?;
    let (pos, neg, zero) = intlinalg::signature_int(&g);
    if pos != 0 || zero != 0 || neg != basis.len() {
        return Err(Error::NotNegativeDefinite);
    }
    let mut roots: Vec<LatticeVector> = intlinalg::short_vectors(&negated(&g), 2)
        .into_iter()
        .map(|c| combine(basis, &c, l.rank()))
        .filter(|v| l.pair(v, v).ok() == Some(-2))
        .collect();
    roots.sort();
    roots.dedup();
    Ok(roots)
}

/// Result of a bounded (possibly incomplete) root search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSearch {
    pub roots: Vec<LatticeVector>,
    /// False when the span is indefinite and the search was cut off by height.
    pub complete: bool,
}

/// Root search that also accepts indefinite spans, where it enumerates the
/// coefficient box `|c_i| <= height` and reports the result as partial.
pub fn enumerate_roots_bounded(l: &GramLattice, basis: &[LatticeVector], height: i64) -> Result<RootSearch> {
    match enumerate_roots_in_neg_def(l, basis) {
        Ok(roots) => return Ok(RootSearch { roots, complete: true }),
        Err(Error::NotNegativeDefinite) => {}
        Err(e) => return Err(e),
    }
    let n = basis.len();
    let g = l.restrict(basis)?;
    let mut roots = Vec::new();
    let mut c = vec![-height; n];
    if n > 0 {
        loop {
            if c.iter().any(|&x| x != 0) && bilinear(&g, &c, &c) == -2 {
                roots.push(combine(basis, &c, l.rank()));
            }
            let mut k = 0;
            while k < n && c[k] == height {
                c[k] = -height;
                k += 1;
            }
            if k == n {
                break;
            }
            c[k] += 1;
        }
    }
    roots.sort();
    roots.dedup();
    Ok(RootSearch { roots, complete: false })
}

/// Hyperkähler triple `(ω+, ω-, ω0)` with common square `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HKTriple {
    pub alpha: [RealVector; 3],
    pub a: f64,
}

impl HKTriple {
    pub fn new(alpha: [RealVector; 3], a: f64) -> Self {
        Self { alpha, a }
    }

    /// Takes `a = ω+.ω+` and checks `α_i.α_j = a δ_ij` within `tol`.
    pub fn from_lattice(l: &GramLattice, alpha: [RealVector; 3], tol: f64) -> Result<Self> {
        let a = l.inner(&alpha[0], &alpha[0])?;
        let t = Self { alpha, a };
        if !t.is_orthonormal(l, tol)? {
            return Err(Error::InvalidArgument(
                "triple is not orthogonal with a common positive square".into(),
            ));
        }
        Ok(t)
    }

    pub fn omega_plus(&self) -> &RealVector {
        &self.alpha[0]
    }

    pub fn omega_minus(&self) -> &RealVector {
        &self.alpha[1]
    }

    pub fn omega_zero(&self) -> &RealVector {
        &self.alpha[2]
    }

    pub fn is_orthonormal(&self, l: &GramLattice, tol: f64) -> Result<bool> {
        if !(self.a > tol) {
            return Ok(false);
        }
        for i in 0..3 {
            for j in i..3 {
                let want = if i == j { self.a } else { 0.0 };
                if (l.inner(&self.alpha[i], &self.alpha[j])? - want).abs() > tol {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Triple JSON: `{"omega_plus": [...], "omega_minus": [...], "omega_zero": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TripleLiteral {
    pub omega_plus: Vec<f64>,
    pub omega_minus: Vec<f64>,
    pub omega_zero: Vec<f64>,
}

impl TripleLiteral {
    pub fn to_triple(&self, l: &GramLattice) -> Result<HKTriple> {
        let alpha = [
            RealVector(self.omega_plus.clone()),
            RealVector(self.omega_minus.clone()),
            RealVector(self.omega_zero.clone()),
        ];
        for v in &alpha {
            l.check_len(v.0.len())?;
        }
        let a = l.inner(&alpha[0], &alpha[0])?;
        Ok(HKTriple::new(alpha, a))
    }
}

/// Lattice JSON: `{"gram": [[...]], "basis": [[...]]}` with `basis` optional.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeLiteral {
    pub gram: Vec<Vec<i64>>,
    #[serde(default)]
    pub basis: Vec<Vec<i64>>,
}

impl LatticeLiteral {
    pub fn lattice(&self) -> Result<GramLattice> {
        GramLattice::new(self.gram.clone())
    }

    pub fn embedding(&self) -> SublatticeEmbedding {
        SublatticeEmbedding::new(self.basis.iter().cloned().map(LatticeVector).collect())
    }
}

/// Diagnostics of [`hk_domain_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HkDomainReport {
    pub orthonormal: bool,
    pub complement_rank: usize,
    pub roots_in_complement: usize,
    pub undetected_roots: usize,
    pub in_domain: bool,
}

fn rational_row(v: &RealVector) -> Result<Vec<BigRational>> {
    v.0.iter()
        .map(|&x| {
            intlinalg::rationalize(x, 1_000_000, 1e-12 * x.abs().max(1.0)).ok_or_else(|| {
                Error::InvalidArgument(format!("coordinate {x} is not a small-denominator rational"))
            })
        })
        .collect()
}

/// Integer basis of `span(vs)^⊥ ∩ Λ` for rational vectors `vs`.
pub fn orthogonal_complement(l: &GramLattice, vs: &[RealVector]) -> Result<Vec<LatticeVector>> {
    let n = l.rank();
    let mut rows: intlinalg::IntMatrix = Vec::with_capacity(vs.len());
    for v in vs {
        l.check_len(v.0.len())?;
        let q = rational_row(v)?;
        // pairing functional v^t G, cleared of denominators
        let func: Vec<BigRational> = (0..n)
            .map(|j| {
                (0..n).fold(BigRational::zero(), |acc, i| {
                    acc + &q[i] * BigRational::from_integer(l.gram[i][j].into())
                })
            })
            .collect();
        let lcm = func
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        rows.push(func.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect());
    }
    intlinalg::integer_kernel(&rows, n)
        .into_iter()
        .map(|col| {
            col.iter()
                .map(|x| {
                    x.to_i64()
                        .ok_or_else(|| Error::InvalidArgument("kernel entry overflows i64".into()))
                })
                .collect::<Result<Vec<_>>>()
                .map(LatticeVector)
        })
        .collect()
}

/// Full diagnostic version of [`hk_domain_check`].
pub fn hk_domain_report(l: &GramLattice, triple: &HKTriple, tol: f64) -> Result<HkDomainReport> {
    let orthonormal = triple.is_orthonormal(l, tol)?;
    if !orthonormal {
        return Ok(HkDomainReport {
            orthonormal,
            complement_rank: 0,
            roots_in_complement: 0,
            undetected_roots: 0,
            in_domain: false,
        });
    }
    let complement = orthogonal_complement(l, &triple.alpha)?;
    let roots = enumerate_roots_in_neg_def(l, &complement)?;
    let mut undetected = 0;
    for r in &roots {
        let r = r.to_real();
        let mut seen = false;
        for a in &triple.alpha {
            if l.inner(a, &r)?.abs() > tol {
                seen = true;
            }
        }
        if !seen {
            undetected += 1;
        }
    }
    Ok(HkDomainReport {
        orthonormal,
        complement_rank: complement.len(),
        roots_in_complement: roots.len(),
        undetected_roots: undetected,
        in_domain: undetected == 0,
    })
}

/// Membership in the hyperkähler period domain: orthogonality with common
/// square `a > 0`, and no `-2` class orthogonal to all three forms.
pub fn hk_domain_check(l: &GramLattice, triple: &HKTriple, tol: f64) -> Result<bool> {
    Ok(hk_domain_report(l, triple, tol)?.in_domain)
}

/// `(ω+, ω-, ω0) ↦ (ω-, ω+, -ω0)`.
pub fn hk_rotate(triple: &HKTriple) -> HKTriple {
    HKTriple {
        alpha: [
            triple.alpha[1].clone(),
            triple.alpha[0].clone(),
            triple.alpha[2].neg(),
        ],
        a: triple.a,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

/// `π±(ω+, ω-, ω0) = span⟨ω∓, ±ω0⟩`, returned as the (real, imaginary) pair.
pub fn matching_project(side: Side, triple: &HKTriple) -> (RealVector, RealVector) {
    match side {
        Side::Plus => (triple.alpha[1].clone(), triple.alpha[2].clone()),
        Side::Minus => (triple.alpha[0].clone(), triple.alpha[2].neg()),
    }
}

/// `ω.ω > 0`, `ω.p = 0` on the period plane, `ω.λ ≠ 0` for the given roots.
pub fn kahler_chamber_check(
    l: &GramLattice,
    omega: &RealVector,
    period_basis: (&RealVector, &RealVector),
    roots: &[LatticeVector],
    tol: f64,
) -> Result<bool> {
    if l.inner(omega, omega)? <= tol {
        return Ok(false);
    }
    if l.inner(omega, period_basis.0)?.abs() > tol || l.inner(omega, period_basis.1)?.abs() > tol {
        return Ok(false);
    }
    for r in roots {
        if l.inner(omega, &r.to_real())?.abs() <= tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `v` lies in the same component of the positive cone as `reference`.
pub fn positive_cone_select(l: &GramLattice, v: &RealVector, reference: &RealVector) -> Result<bool> {
    let vv = l.inner(v, v)?;
    if vv <= 0.0 {
        return Err(Error::NonPositiveSquare(vv));
    }
    let rr = l.inner(reference, reference)?;
    if rr <= 0.0 {
        return Err(Error::NonPositiveSquare(rr));
    }
    Ok(l.inner(v, reference)? > 0.0)
}

/// Triple `α_i = Σ_j R_ij (e_j + f_j)` built from an orthogonal matrix `R`;
/// valid with `a = 2` whenever `R` is orthogonal.
pub fn hk_triple_from_rotation(l: &GramLattice, r: &[[f64; 3]; 3]) -> Result<HKTriple> {
    let mut idx = [[0usize; 2]; 3];
    for (j, slot) in idx.iter_mut().enumerate() {
        for (k, name) in ["e", "f"].iter().enumerate() {
            let label = format!("{name}{}", j + 1);
            slot[k] = l
                .index_of(&label)
                .ok_or_else(|| Error::InvalidArgument(format!("lattice has no basis vector {label}")))?;
        }
    }
    let alpha = r.map(|row| {
        let mut v = vec![0.0; l.rank()];
        for (j, &c) in row.iter().enumerate() {
            v[idx[j][0]] += c;
            v[idx[j][1]] += c;
        }
        RealVector(v)
    });
    let a = l.inner(&alpha[0], &alpha[0])?;
    Ok(HKTriple::new(alpha, a))
}

/// `λ.λ = -2`.
pub fn is_root(l: &GramLattice, v: &LatticeVector) -> bool {
    l.pair(v, v).ok() == Some(-2)
}
