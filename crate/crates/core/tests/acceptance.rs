//! Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Every criterion is computed independently of the others
//! and of the `verify` module, straight from the library primitives.

use std::f64::consts::LN_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cayfib::analysis::{self, ContractionProblem, FoldModel, WeightedNormSpec};
use cayfib::index::{self, IndexProblem, Rate, Side, TopologicalData};
use cayfib::k3lattice::{self, Side as Projection};
use cayfib::model::{self, QuadricFiberPoint};
use cayfib::quartic::{self, PencilProblem, SolveConfig};
use cayfib::tcs::{self, GluingMatrix, SubstitutionKind, TCSPiece};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

/// Ordinary least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    slope(&lx, &ly)
}

fn rel_close(want: f64, got: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs()
}

fn quartic_census() -> Outcome {
    let start = Instant::now();
    let prob = PencilProblem::new(quartic::reference_quartic()).unwrap();
    let rep = quartic::structured_solve(&prob, &SolveConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let bezout = quartic::bezout_number(&quartic::build_singular_system(&prob));
    let max_res = rep.solutions.iter().map(|s| s.residuals).fold(0.0, f64::max);
    let rank3 = rep.solutions.iter().all(|s| s.hessian_rank == 3);
    // Pencil values of the singular points must be pairwise distinct.
    // Chordal distance on P¹: |a₁b₂ − a₂b₁| / (‖(a₁,b₁)‖ ‖(a₂,b₂)‖).
    let fibres: Vec<_> = rep.solutions.iter().map(|s| (s.pencil_value[0], s.pencil_value[1])).collect();
    let mut min_gap = f64::INFINITY;
    for i in 0..fibres.len() {
        for j in 0..i {
            let ((a1, b1), (a2, b2)) = (fibres[i], fibres[j]);
            let n1 = (a1.norm_sqr() + b1.norm_sqr()).sqrt();
            let n2 = (a2.norm_sqr() + b2.norm_sqr()).sqrt();
            min_gap = min_gap.min((a1 * b2 - a2 * b1).norm() / (n1 * n2));
        }
    }
    let pass = rep.solutions.len() == 108
        && bezout == 108
        && max_res < 1e-10
        && rank3
        && min_gap > 1e-6
        && elapsed < Duration::from_secs(5);
    Outcome::new(
        pass,
        format!(
            "count={} bezout={bezout} max_residual={max_res:.1e} rank3={rank3} min_fibre_gap={min_gap:.2e} time={:.2}s",
            rep.solutions.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn symmetric_control() -> Outcome {
    let start = Instant::now();
    let prob = PencilProblem::new(quartic::quartic_with_weights([1, 1, 1])).unwrap();
    let rep = quartic::structured_solve(&prob, &SolveConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let distinct = quartic::distinct_fibers(&rep.solutions, 1e-8);
    Outcome::new(
        !distinct && elapsed < Duration::from_secs(5),
        format!("distinct_fibers={distinct} time={:.2}s", elapsed.as_secs_f64()),
    )
}

fn index_suite() -> Outcome {
    let compact = index::compact_index(&TopologicalData { sigma: -16, chi: 24, self_int: 0, dim_family: 0 }).unwrap();
    let one = index::cs_index_by_gluing(4, &[2]).index;
    let two = index::cs_index_by_gluing(4, &[2, 2]).index;
    let spectrum = index::quadric_spectrum();
    let semistable = index::is_semistable(&spectrum);
    let ac = IndexProblem::new(Side::Ac, Rate::Float(-0.5), 2);
    let crossed = index::index_at(&ac, &spectrum, &Rate::Float(0.5)).unwrap();
    Outcome::new(
        compact == 4 && one == 2 && two == 0 && semistable && crossed == 10,
        format!("compact={compact} cs_one={one} cs_two={two} semistable={semistable} ac_crossing=2->{crossed}"),
    )
}

/// Uniform random rotation from a unit quaternion.
fn quaternion_rotation(rng: &mut impl Rng) -> [[f64; 3]; 3] {
    let q: [f64; 4] = loop {
        let v = [0; 4].map(|_| rng.gen_range(-1.0..1.0f64));
        let n = v.iter().map(|x| x * x).sum::<f64>();
        if n > 1e-3 && n <= 1.0 {
            let n = n.sqrt();
            break v.map(|x| x / n);
        }
    };
    let [w, x, y, z] = q;
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

fn lattice_suite() -> Outcome {
    let l = k3lattice::k3_lattice();
    let sig = l.signature();
    let even = l.is_even();
    let det = l.determinant().magnitude().to_string();
    let e8 = k3lattice::e8_negative();
    let basis: Vec<_> = (0..8).map(|i| e8.basis_vector(i)).collect();
    let roots = k3lattice::enumerate_roots_in_neg_def(&e8, &basis).unwrap().len();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut involution, mut periods) = (true, true);
    for _ in 0..1000 {
        let t = k3lattice::hk_triple_from_rotation(&l, &quaternion_rotation(&mut rng)).unwrap();
        if !t.is_orthonormal(&l, 1e-9).unwrap() {
            continue;
        }
        involution &= k3lattice::hk_rotate(&k3lattice::hk_rotate(&t)) == t;
        for side in [Projection::Plus, Projection::Minus] {
            let (re, im) = k3lattice::matching_project(side, &t);
            // u = re + i·im: u² = re² − im² + 2i re·im and u·ū = re² + im².
            let (rr, ii, ri) = (l.inner(&re, &re).unwrap(), l.inner(&im, &im).unwrap(), l.inner(&re, &im).unwrap());
            periods &= (rr - ii).abs() <= 1e-9 && ri.abs() <= 1e-9 && rr + ii > 0.0;
            periods &= k3lattice::period_point_check(&l, &re, &im, 1e-9).unwrap();
        }
    }
    Outcome::new(
        sig == (3, 19, 0) && even && det == "1" && roots == 240 && involution && periods,
        format!("signature={sig:?} even={even} |det|={det} e8_roots={roots} involution={involution} periods={periods}"),
    )
}

fn neck_norms() -> Outcome {
    let start = Instant::now();
    let ts: Vec<f64> = (4..=20).map(|k| 2f64.powi(-k)).collect();
    let zeta = -1.0;
    let norms = |weight: f64| -> Vec<f64> {
        ts.iter()
            .map(|&t| analysis::annulus_norm(zeta, &WeightedNormSpec::new(2.0, 1, weight, t).unwrap(), t, 1.0).unwrap())
            .collect()
    };
    let bounded = log_slope(&ts, &norms(-1.5));
    // Logarithmic growth: ‖·‖² is linear in ln(1/t).
    let lns: Vec<f64> = ts.iter().map(|t| (1.0 / t).ln()).collect();
    let sq: Vec<f64> = norms(-1.0).iter().map(|n| n * n).collect();
    let log = log_slope(&lns, &sq);
    let power = log_slope(&ts, &norms(-0.5));
    let elapsed = start.elapsed();
    let want_power = zeta - -0.5;
    Outcome::new(
        bounded.abs() <= 0.05
            && rel_close(1.0, log, 0.05)
            && rel_close(want_power, power, 0.05)
            && elapsed < Duration::from_secs(10),
        format!(
            "bounded_exponent={bounded:.4} log_growth_exponent={log:.4} power_exponent={power:.4} (want {want_power}) time={:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn fold_model() -> Outcome {
    let ss = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5];
    let ts: Vec<f64> = (4..=20).map(|k| 2f64.powi(-k)).collect();
    let mut pass = true;
    let mut detail = Vec::new();
    for alpha in [0.25, 0.5, 0.75] {
        let onsets: Vec<f64> = ss
            .iter()
            .map(|&s| analysis::fold_onset_scale(&FoldModel::new(alpha, 2.0, s).unwrap(), 1e-3).unwrap())
            .collect();
        let onset = log_slope(&ss, &onsets);
        let m = FoldModel::new(alpha, 2.0, 0.1).unwrap();
        let blowup: Vec<f64> = ts.iter().map(|&t| (analysis::fold_dt(&m, 1.0, t) - 1.0).abs()).collect();
        let dt = log_slope(&ts, &blowup);
        pass &= rel_close(1.0 / (1.0 - alpha), onset, 0.02) && rel_close(alpha - 1.0, dt, 0.02);
        detail.push(format!("a={alpha}: onset={onset:.4} dt={dt:.4}"));
    }
    Outcome::new(pass, detail.join(" "))
}

fn contraction() -> Outcome {
    let p = ContractionProblem::scalar(1.0, 1.0, 0.1).unwrap();
    let r = analysis::contraction_solve(&p, 500, 1e-14);
    // v = −(0.1 + v²) has the small root (√0.6 − 1)/2 = −0.1127016…
    let exact = (0.6f64.sqrt() - 1.0) / 2.0;
    let v = r.v_inf[0];
    let rounded = (v.abs() * 1e5).round() / 1e5;
    let diffs = &r.differences;
    let geometric = diffs.len() > 3
        && diffs.windows(2).filter(|w| w[0] > 1e-13).all(|w| w[1] <= 0.5 * w[0]);
    let big = analysis::contraction_solve(&ContractionProblem::scalar(1.0, 1.0, 1.0).unwrap(), 10_000, 1e-14);
    let flags = big.diverged && !big.converged;

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let mut all_converged = true;
    for i in 0..1000 {
        let n = 1 + i % 4;
        let d: Vec<Vec<f64>> = (0..n)
            .map(|a| (0..n).map(|b| if a == b { rng.gen_range(1.0..2.0) } else { rng.gen_range(-0.1..0.1) / n as f64 }).collect())
            .collect();
        let q: Vec<Vec<Vec<f64>>> = (0..n)
            .map(|_| (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect())
            .collect();
        let f0: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.02..0.02)).collect();
        let prob = ContractionProblem::new(d, q, f0).unwrap();
        if prob.contraction_constant() > 0.5 {
            continue;
        }
        let res = analysis::contraction_solve(&prob, 1000, 1e-13);
        all_converged &= res.converged;
        let vn = res.v_inf.iter().map(|x| x * x).sum::<f64>().sqrt();
        let f = prob.f0_norm();
        if f > 0.0 {
            worst = worst.max(vn / (2.0 * prob.c_d() * f));
        }
    }
    Outcome::new(
        r.converged && (v - exact).abs() <= 1e-6 && rounded == 0.11270 && geometric && flags && all_converged && worst <= 1.0,
        format!(
            "|v_inf|={:.8} (closed form {:.8}, 5 d.p. {rounded}) geometric={geometric} f0=1_diverges={flags} worst_bound_ratio={worst:.3}",
            v.abs(),
            exact.abs()
        ),
    )
}

fn calibration() -> Outcome {
    let phi0 = model::cayley_form_standard();
    let worst = model::calibration_sweep(&phi0, 10_000, 2024).unwrap();
    let cy = model::cy4_cayley_form();
    let mut fibre_dev: f64 = 0.0;
    for r in [0.05, 0.3, 1.0, 3.0, 30.0] {
        let frame = model::fiber_tangent_frame(&QuadricFiberPoint::at_radius(r).unwrap()).unwrap();
        fibre_dev = fibre_dev.max((model::restrict_ratio(&cy, &frame).unwrap() - 1.0).abs());
    }
    let perm = model::find_signed_permutation(&phi0, &cy);
    let perm_ok = perm.as_ref().is_some_and(|p| phi0.signed_permute(&p.perm, &p.signs).is_ok_and(|f| f == cy));
    let cy_norm = model::cy_normalization_holds();
    Outcome::new(
        worst <= 1.0 + 1e-10 && fibre_dev <= 1e-10 && perm_ok && cy_norm,
        format!("max_ratio={worst:.6} fibre_deviation={fibre_dev:.1e} permutation={perm_ok} cy_normalization={cy_norm}"),
    )
}

fn tcs_suite() -> Outcome {
    let h1 = tcs::torus_gluing_homology(&GluingMatrix::swap());
    let with_rotation = tcs::neck_form_matching_with(SubstitutionKind::Rotation);
    let without = tcs::neck_form_matching_with(SubstitutionKind::Identity);
    let block = TCSPiece::new("quartic", 108);
    let count = tcs::glued_singular_count(&[block.clone(), block]);
    let t = tcs::torsion_threshold(-1.0).unwrap();
    Outcome::new(
        h1.is_empty() && with_rotation && !without && count == 216 && (t - LN_2).abs() <= 1e-12,
        format!("h1={h1:?} rotation={with_rotation} identity={without} count={count} T={t:.15}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("quartic singular-fibre census", quartic_census),
        ("symmetric-coefficient control", symmetric_control),
        ("index suite", index_suite),
        ("lattice suite", lattice_suite),
        ("neck-norm trichotomy", neck_norms),
        ("fold model", fold_model),
        ("contraction scheme", contraction),
        ("calibration", calibration),
        ("twisted connected sum", tcs_suite),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        all &= o.pass;
        println!("criterion {}: {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
