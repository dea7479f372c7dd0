//! Singular fibres of the anticanonical pencil on a quartic threefold.
//!
//! The pencil `[x0:..:x4] -> [x3:x4]` on `{P = 0} ⊂ CP^4` has a singular
//! fibre exactly where `P` and its partials in the three free variables all
//! vanish. For quartics of the shape `sum x_i^4 + x3^3 * (linear in x0..x2)`
//! the system decouples: each free partial is `a_i x_i^3 + b_i x3^3`, so on
//! the chart `x3 = 1` the free coordinates are cube roots and `x4` solves a
//! pure quartic. The structured candidates are then Newton-polished on the
//! full system and classified by the rank of the fibre Hessian.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{chordal_distance, ComplexRational, HomogeneousPoly, Poly, ProjectivePoint};

/// Numerical knobs for [`structured_solve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Newton stops once every equation is below this at the normalized point.
    pub tol: f64,
    /// Singular values below `rank_tol * sigma_max` count as zero.
    pub rank_tol: f64,
    /// Minimum chordal distance between distinct pencil values.
    pub fiber_tol: f64,
    /// Candidates closer than this (chordal) are merged.
    pub cluster_tol: f64,
    pub max_iter: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            rank_tol: 1e-8,
            fiber_tol: 1e-8,
            cluster_tol: 1e-8,
            max_iter: 50,
        }
    }
}

/// A quartic in five variables together with the two pencil coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilProblem {
    poly: HomogeneousPoly,
    pencil_vars: (usize, usize),
    free_vars: [usize; 3],
}

impl PencilProblem {
    pub fn new(poly: HomogeneousPoly) -> Result<Self> {
        Self::with_pencil_vars(poly, (3, 4))
    }

    pub fn with_pencil_vars(poly: HomogeneousPoly, pencil_vars: (usize, usize)) -> Result<Self> {
        if poly.num_vars() != 5 {
            return Err(Error::DimensionMismatch {
                expected: 5,
                got: poly.num_vars(),
            });
        }
        if poly.degree() != Some(4) {
            return Err(Error::Shape(format!(
                "expected a quartic, got degree {:?}",
                poly.degree()
            )));
        }
        let (a, b) = pencil_vars;
        if a >= 5 || b >= 5 || a == b {
            return Err(Error::InvalidArgument(format!(
                "invalid pencil variables ({a}, {b})"
            )));
        }
        let free: Vec<usize> = (0..5).filter(|&i| i != a && i != b).collect();
        Ok(Self {
            poly,
            pencil_vars,
            free_vars: [free[0], free[1], free[2]],
        })
    }

    pub fn poly(&self) -> &HomogeneousPoly {
        &self.poly
    }

    pub fn pencil_vars(&self) -> (usize, usize) {
        self.pencil_vars
    }

    pub fn free_vars(&self) -> [usize; 3] {
        self.free_vars
    }
}

/// `x0^4 + x1^4 + x2^4 + x3^4 + x4^4 + x3^3 (w0 x0 + w1 x1 + w2 x2)`.
pub fn quartic_with_weights(weights: [i64; 3]) -> HomogeneousPoly {
    let mut terms: Vec<(Vec<u32>, ComplexRational)> = (0..5)
        .map(|i| {
            let mut e = vec![0; 5];
            e[i] = 4;
            (e, ComplexRational::one())
        })
        .collect();
    for (i, &w) in weights.iter().enumerate() {
        let mut e = vec![0, 0, 0, 3, 0];
        e[i] = 1;
        terms.push((e, ComplexRational::from_integer(w)));
    }
    HomogeneousPoly::new(Poly::from_terms(5, terms).expect("five-variable exponents"))
        .expect("quartic is homogeneous")
}

/// The quartic of the building-block example, with coefficients (1, 10, 100).
pub fn reference_quartic() -> HomogeneousPoly {
    quartic_with_weights([1, 10, 100])
}

/// `[P, ∂_a P, ∂_b P, ∂_c P]` over the free variables `a, b, c`.
pub fn build_singular_system(prob: &PencilProblem) -> Vec<HomogeneousPoly> {
    let mut system = vec![prob.poly.clone()];
    for &i in &prob.free_vars {
        system.push(
            prob.poly
                .partial_derivative(i)
                .expect("free variable is in range"),
        );
    }
    system
}

/// Bézout number: product of the degrees of the equations.
pub fn bezout_number(system: &[HomogeneousPoly]) -> u64 {
    system
        .iter()
        .map(|p| p.degree().unwrap_or(0) as u64)
        .product()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularPoint {
    /// Normalized projective coordinates, as `[re, im]` pairs.
    #[serde(with = "complex_vec")]
    pub point: Vec<Complex64>,
    /// Normalized `[x_a : x_b]` for the pencil variables.
    #[serde(with = "complex_vec")]
    pub pencil_value: Vec<Complex64>,
    pub hessian_rank: usize,
    /// Max absolute value of the four defining equations at `point`.
    pub residuals: f64,
}

impl SingularPoint {
    pub fn projective(&self) -> ProjectivePoint {
        ProjectivePoint::new(self.point.clone()).expect("stored points are nonzero")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solutions: Vec<SingularPoint>,
    pub bezout: u64,
    pub count_matches_bezout: bool,
    pub all_multiplicity_one: bool,
    pub all_distinct_fibers: bool,
    /// Candidates dropped because `x4^4 = c` had `c = 0`.
    pub discarded_zero_c: usize,
    /// Smallest pairwise chordal distance between solutions.
    pub min_separation: f64,
    /// Smallest pairwise chordal distance between pencil values.
    pub min_fiber_separation: f64,
}

pub(crate) mod complex_vec {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

/// Per-free-variable data `a_i x_i^3 + b_i x_chart^3`, reduced to `x_i^3 = c_i`.
fn cube_constants(prob: &PencilProblem, system: &[HomogeneousPoly]) -> Result<[Complex64; 3]> {
    let chart = prob.pencil_vars.0;
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (k, &i) in prob.free_vars.iter().enumerate() {
        let d = system[k + 1].as_poly();
        let mut a = None;
        let mut b = ComplexRational::zero();
        for (exp, c) in d.terms() {
            let is_pure = |v: usize| exp.iter().enumerate().all(|(j, &e)| (j == v) == (e == 3));
            if is_pure(i) {
                a = Some(c.clone());
            } else if is_pure(chart) {
                b = c.clone();
            } else {
                return Err(Error::Shape(format!(
                    "partial in x{i} has a term outside a*x{i}^3 + b*x{chart}^3"
                )));
            }
        }
        let a = a.ok_or_else(|| Error::Shape(format!("partial in x{i} lacks an x{i}^3 term")))?;
        out[k] = (-b).checked_div(&a)?.to_complex64();
    }
    Ok(out)
}

fn nth_roots(c: Complex64, n: u32) -> Vec<Complex64> {
    let r = c.norm().powf(1.0 / n as f64);
    let theta = c.arg();
    (0..n)
        .map(|k| {
            Complex64::from_polar(
                r,
                (theta + 2.0 * std::f64::consts::PI * k as f64) / n as f64,
            )
        })
        .collect()
}

/// Evaluates the system at `z` after normalizing it projectively.
pub fn system_residual(system: &[HomogeneousPoly], z: &[Complex64]) -> Result<f64> {
    let pt = ProjectivePoint::new(z.to_vec())?;
    let mut worst = 0.0_f64;
    for p in system {
        worst = worst.max(p.evaluate(pt.coords())?.norm());
    }
    Ok(worst)
}

/// Newton's method on the affine chart `x_chart = 1` for a square system
/// (number of equations equals `num_vars - 1`).
pub fn newton_polish(
    system: &[HomogeneousPoly],
    chart: usize,
    start: &[Complex64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<Complex64>, f64)> {
    let n = start.len();
    if system.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            got: system.len(),
        });
    }
    let unknowns: Vec<usize> = (0..n).filter(|&i| i != chart).collect();
    let jac_polys: Vec<Vec<Poly>> = system
        .iter()
        .map(|p| {
            unknowns
                .iter()
                .map(|&j| p.as_poly().partial_derivative(j))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut z: Vec<Complex64> = start.iter().map(|c| c / start[chart]).collect();
    z[chart] = Complex64::new(1.0, 0.0);
    let mut residual = system_residual(system, &z)?;
    for _ in 0..max_iter {
        if residual < tol {
            return Ok((z, residual));
        }
        let m = system.len();
        let mut f = DVector::<Complex64>::zeros(m);
        let mut jac = DMatrix::<Complex64>::zeros(m, m);
        for (r, p) in system.iter().enumerate() {
            f[r] = p.evaluate(&z)?;
            for (c, dp) in jac_polys[r].iter().enumerate() {
                jac[(r, c)] = dp.evaluate(&z)?;
            }
        }
        let step = jac.lu().solve(&f).ok_or(Error::NewtonDivergence {
            iterations: max_iter,
            residual,
        })?;
        for (c, &j) in unknowns.iter().enumerate() {
            z[j] -= step[c];
        }
        let next = system_residual(system, &z)?;
        if !next.is_finite() {
            break;
        }
        // stop at the floating point floor rather than iterating in place
        if next >= residual && residual < tol * 1e3 {
            residual = next.min(residual);
            break;
        }
        residual = next;
    }
    if residual < tol {
        Ok((z, residual))
    } else {
        Err(Error::NewtonDivergence {
            iterations: max_iter,
            residual,
        })
    }
}

fn numerical_rank(m: &DMatrix<Complex64>, rel_tol: f64) -> usize {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

fn pencil_value(prob: &PencilProblem, z: &[Complex64]) -> Result<Vec<Complex64>> {
    let (a, b) = prob.pencil_vars;
    Ok(ProjectivePoint::new(vec![z[a], z[b]])?.coords().to_vec())
}

/// Rank of the Hessian of `P` restricted to the hyperplane section through
/// `pt`, computed on the affine chart of the larger pencil coordinate.
pub fn classify_singularity(
    prob: &PencilProblem,
    pt: &SingularPoint,
    rank_tol: f64,
    on_variety_tol: f64,
) -> Result<usize> {
    let system = build_singular_system(prob);
    let residual = system_residual(&system, &pt.point)?;
    if residual > on_variety_tol {
        return Err(Error::NotOnVariety(residual));
    }
    let (a, b) = prob.pencil_vars;
    let z = &pt.point;
    let chart = if z[a].norm() >= z[b].norm() { a } else { b };
    // normalized points have max coordinate 1, so this is a relative test
    if z[chart].norm() < 1e-12 {
        return Err(Error::DegenerateChart(
            "both pencil coordinates vanish (base locus)".into(),
        ));
    }
    // on the chart x_chart = 1 the fibre is cut out by fixing the other
    // pencil coordinate, so the restricted function is P in the free variables
    let local: Vec<Complex64> = z.iter().map(|c| c / z[chart]).collect();
    let h = prob.poly.hessian(&local, &prob.free_vars)?;
    Ok(numerical_rank(&h, rank_tol))
}

/// True iff all pencil values are pairwise more than `tol` apart (chordal).
pub fn distinct_fibers(solutions: &[SingularPoint], tol: f64) -> bool {
    min_pairwise(solutions.iter().map(|s| s.pencil_value.as_slice())) > tol
}

fn min_pairwise<'a, I>(items: I) -> f64
where
    I: Iterator<Item = &'a [Complex64]>,
{
    let items: Vec<&[Complex64]> = items.collect();
    let mut best = f64::INFINITY;
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            best = best.min(chordal_distance(items[i], items[j]));
        }
    }
    best
}

fn lex_cmp(a: &[Complex64], b: &[Complex64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// Enumerates cube-root triples and quartic roots, polishes each candidate
/// with Newton's method and assembles the census.
pub fn structured_solve(prob: &PencilProblem, cfg: &SolveConfig) -> Result<SolveReport> {
    let system = build_singular_system(prob);
    let bezout = bezout_number(&system);
    let cubes = cube_constants(prob, &system)?;
    let (chart, last) = prob.pencil_vars;
    let free = prob.free_vars;

    // P restricted to x_chart = 1 must read a4 * x_last^4 + (terms free of x_last)
    let mut lead = None;
    for (exp, c) in prob.poly.as_poly().terms() {
        match exp[last] {
            0 => {}
            4 => lead = Some(c.to_complex64()),
            k => {
                return Err(Error::Shape(format!(
                    "P contains x{last}^{k}; expected only x{last}^4"
                )))
            }
        }
    }
    let lead = lead.ok_or_else(|| Error::Shape(format!("P lacks an x{last}^4 term")))?;
    let constant_part = Poly::from_terms(
        5,
        prob.poly
            .as_poly()
            .terms()
            .filter(|(e, _)| e[last] == 0)
            .map(|(e, c)| (e.to_vec(), c.clone())),
    )?;

    let roots: Vec<Vec<Complex64>> = cubes.iter().map(|&c| nth_roots(c, 3)).collect();
    let mut discarded = 0;
    let mut polished: Vec<Vec<Complex64>> = Vec::with_capacity(bezout as usize);
    for &r0 in &roots[0] {
        for &r1 in &roots[1] {
            for &r2 in &roots[2] {
                let mut z = vec![Complex64::new(0.0, 0.0); 5];
                z[chart] = Complex64::new(1.0, 0.0);
                z[free[0]] = r0;
                z[free[1]] = r1;
                z[free[2]] = r2;
                let c = -constant_part.evaluate(&z)? / lead;
                if c.norm() < 1e-14 {
                    discarded += 1;
                    continue;
                }
                for x in nth_roots(c, 4) {
                    z[last] = x;
                    let (sol, _) = newton_polish(&system, chart, &z, cfg.tol, cfg.max_iter)?;
                    polished.push(sol);
                }
            }
        }
    }

    let mut unique: Vec<Vec<Complex64>> = Vec::with_capacity(polished.len());
    for cand in polished {
        if unique
            .iter()
            .all(|u| chordal_distance(u, &cand) > cfg.cluster_tol)
        {
            unique.push(cand);
        }
    }

    let mut solutions = Vec::with_capacity(unique.len());
    for z in unique {
        let point = ProjectivePoint::new(z)?.coords().to_vec();
        let residuals = system_residual(&system, &point)?;
        let mut sp = SingularPoint {
            pencil_value: pencil_value(prob, &point)?,
            point,
            hessian_rank: 0,
            residuals,
        };
        sp.hessian_rank = classify_singularity(prob, &sp, cfg.rank_tol, cfg.tol.max(1e-8))?;
        solutions.push(sp);
    }
    solutions.sort_by(|a, b| lex_cmp(&a.point, &b.point));

    let min_separation = min_pairwise(solutions.iter().map(|s| s.point.as_slice()));
    let min_fiber_separation = min_pairwise(solutions.iter().map(|s| s.pencil_value.as_slice()));
    Ok(SolveReport {
        bezout,
        count_matches_bezout: solutions.len() as u64 == bezout,
        all_multiplicity_one: solutions.iter().all(|s| s.hessian_rank == 3),
        all_distinct_fibers: min_fiber_separation > cfg.fiber_tol,
        discarded_zero_c: discarded,
        min_separation,
        min_fiber_separation,
        solutions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::int_poly;

    fn hom(p: Poly) -> HomogeneousPoly {
        HomogeneousPoly::new(p).unwrap()
    }

    #[test]
    fn reference_quartic_shape() {
        let p = reference_quartic();
        assert_eq!(p.degree(), Some(4));
        assert_eq!(p.as_poly().num_terms(), 8);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(p.evaluate(&[one, zero, zero, zero, zero]).unwrap(), one);
        let v = p
            .evaluate(&[one, zero, zero, zero, Complex64::new(0.0, 1.0)])
            .unwrap();
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_system_degrees_and_entries() {
        let prob = PencilProblem::new(reference_quartic()).unwrap();
        let sys = build_singular_system(&prob);
        let degs: Vec<_> = sys.iter().map(|p| p.degree().unwrap()).collect();
        assert_eq!(degs, vec![4, 3, 3, 3]);
        assert_eq!(bezout_number(&sys), 108);
        let want = int_poly(5, &[(4, &[3, 0, 0, 0, 0]), (1, &[0, 0, 0, 3, 0])]).unwrap();
        assert_eq!(sys[1].as_poly(), &want);
        let want = int_poly(5, &[(4, &[0, 3, 0, 0, 0]), (10, &[0, 0, 0, 3, 0])]).unwrap();
        assert_eq!(sys[2].as_poly(), &want);
    }

    #[test]
    fn degenerate_system() {
        let p = hom(int_poly(5, &[(1, &[4, 0, 0, 0, 0])]).unwrap());
        let prob = PencilProblem::new(p).unwrap();
        let sys = build_singular_system(&prob);
        assert_eq!(
            sys[1].as_poly(),
            &int_poly(5, &[(4, &[3, 0, 0, 0, 0])]).unwrap()
        );
        assert!(sys[2].as_poly().is_zero() && sys[3].as_poly().is_zero());
        // the structured solver refuses this shape
        assert!(matches!(
            structured_solve(&prob, &SolveConfig::default()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn problem_validation() {
        let cubic = hom(int_poly(5, &[(1, &[3, 0, 0, 0, 0])]).unwrap());
        assert!(PencilProblem::new(cubic).is_err());
        let four = hom(int_poly(4, &[(1, &[4, 0, 0, 0])]).unwrap());
        assert!(PencilProblem::new(four).is_err());
        assert!(PencilProblem::with_pencil_vars(reference_quartic(), (3, 3)).is_err());
    }

    #[test]
    fn reference_quartic_census() {
        let prob = PencilProblem::new(reference_quartic()).unwrap();
        let rep = structured_solve(&prob, &SolveConfig::default()).unwrap();
        assert_eq!(rep.solutions.len(), 108);
        assert!(rep.count_matches_bezout);
        assert!(rep.all_multiplicity_one);
        assert!(rep.all_distinct_fibers);
        assert_eq!(rep.discarded_zero_c, 0);
        assert!(rep.min_separation > 1e-6);
        for s in &rep.solutions {
            assert!(s.residuals < 1e-10, "residual {}", s.residuals);
            assert!(s.point[3].norm() > 1e-12);
        }
        let sorted = rep
            .solutions
            .windows(2)
            .all(|w| lex_cmp(&w[0].point, &w[1].point) != Ordering::Greater);
        assert!(sorted);
    }

    #[test]
    fn polishing_is_idempotent() {
        let prob = PencilProblem::new(reference_quartic()).unwrap();
        let cfg = SolveConfig::default();
        let rep = structured_solve(&prob, &cfg).unwrap();
        let sys = build_singular_system(&prob);
        for s in rep.solutions.iter().take(12) {
            let (again, _) = newton_polish(&sys, 3, &s.point, cfg.tol, cfg.max_iter).unwrap();
            assert!(chordal_distance(&again, &s.point) < cfg.tol);
        }
    }

    #[test]
    fn symmetric_coefficients_share_fibres() {
        let prob = PencilProblem::new(quartic_with_weights([1, 1, 1])).unwrap();
        let rep = structured_solve(&prob, &SolveConfig::default()).unwrap();
        assert!(!rep.all_distinct_fibers);
        assert!(!distinct_fibers(&rep.solutions, 1e-8));
    }

    #[test]
    fn duplicated_point_is_not_distinct() {
        let prob = PencilProblem::new(reference_quartic()).unwrap();
        let rep = structured_solve(&prob, &SolveConfig::default()).unwrap();
        let two = vec![rep.solutions[0].clone(), rep.solutions[0].clone()];
        assert!(!distinct_fibers(&two, 1e-8));
    }

    fn model_point(poly: Poly) -> (PencilProblem, SingularPoint) {
        let prob = PencilProblem::new(hom(poly)).unwrap();
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let pt = SingularPoint {
            point: vec![zero, zero, zero, one, zero],
            pencil_value: vec![one, zero],
            hessian_rank: 0,
            residuals: 0.0,
        };
        (prob, pt)
    }

    #[test]
    fn ordinary_double_point_model_has_rank_three() {
        // x3^2 (x0^2 + x1^2 + x2^2): the fibre x4 = 0 near [0:0:0:1:0]
        let (prob, pt) = model_point(
            int_poly(5, &[(1, &[2, 0, 0, 2, 0]), (1, &[0, 2, 0, 2, 0]), (1, &[0, 0, 2, 2, 0])])
                .unwrap(),
        );
        assert_eq!(classify_singularity(&prob, &pt, 1e-8, 1e-8).unwrap(), 3);
    }

    #[test]
    fn cusp_model_has_rank_two() {
        // x0^3 x3 + x3^2 (x1^2 + x2^2)
        let (prob, pt) = model_point(
            int_poly(5, &[(1, &[3, 0, 0, 1, 0]), (1, &[0, 2, 0, 2, 0]), (1, &[0, 0, 2, 2, 0])])
                .unwrap(),
        );
        assert_eq!(classify_singularity(&prob, &pt, 1e-8, 1e-8).unwrap(), 2);
    }

    #[test]
    fn classify_rejects_off_variety_points() {
        let prob = PencilProblem::new(reference_quartic()).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let pt = SingularPoint {
            point: vec![one; 5],
            pencil_value: vec![one, one],
            hessian_rank: 0,
            residuals: 0.0,
        };
        assert!(matches!(
            classify_singularity(&prob, &pt, 1e-8, 1e-8),
            Err(Error::NotOnVariety(_))
        ));
    }

    #[test]
    fn classify_rejects_base_locus_points() {
        // x3 x4 (x0^2 + x1^2) + x2^4 vanishes with its free partials at [1:i:0:0:0]
        let prob = PencilProblem::new(hom(
            int_poly(5, &[(1, &[2, 0, 0, 1, 1]), (1, &[0, 2, 0, 1, 1]), (1, &[0, 0, 4, 0, 0])])
                .unwrap(),
        ))
        .unwrap();
        let zero = Complex64::new(0.0, 0.0);
        let pt = SingularPoint {
            point: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), zero, zero, zero],
            pencil_value: vec![],
            hessian_rank: 0,
            residuals: 0.0,
        };
        assert!(matches!(
            classify_singularity(&prob, &pt, 1e-8, 1e-8),
            Err(Error::DegenerateChart(_))
        ));
    }

    #[test]
    fn hessian_of_solution_has_rank_three_on_chart() {
        let prob = PencilProblem::new(reference_quartic()).unwrap();
        let rep = structured_solve(&prob, &SolveConfig::default()).unwrap();
        let s = &rep.solutions[17];
        let local: Vec<Complex64> = s.point.iter().map(|c| c / s.point[3]).collect();
        let h = prob.poly().hessian(&local, &[0, 1, 2]).unwrap();
        assert_eq!(numerical_rank(&h, 1e-8), 3);
    }
}
