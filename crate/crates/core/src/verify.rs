//! The full verification suite, grouped by subject. Each group returns its
//! checks; [`verify_all`] aggregates them into one report.

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analysis::{self, ContractionProblem, FoldModel, NormRegime, WeightedNormSpec};
use crate::index::{self, IndexProblem, Rate, RateSpectrum, Side, TopologicalData};
use crate::k3lattice::{self, HKTriple};
use crate::model::{self, QuadricFiberPoint};
use crate::quartic::{self, PencilProblem, SolveConfig};
use crate::report::{Check, RunReport};
use crate::tcs::{self, GluingMatrix, SubstitutionKind, TCSPiece};

/// Knobs of the suite. `spectrum` is the cone spectrum fed to the index
/// checks, replaceable for fault injection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub tol_scale: f64,
    pub seed: u64,
    pub random_triples: usize,
    pub calibration_frames: usize,
    pub contraction_instances: usize,
    pub spectrum: RateSpectrum,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            tol_scale: 1.0,
            seed: 20240601,
            random_triples: 1000,
            calibration_frames: 10_000,
            contraction_instances: 1000,
            spectrum: index::quadric_spectrum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    QuarticCensus,
    SymmetricControl,
    Index,
    Lattice,
    NeckNorms,
    Fold,
    Contraction,
    Calibration,
    Tcs,
}

impl Group {
    pub const ALL: [Group; 9] = [
        Group::QuarticCensus,
        Group::SymmetricControl,
        Group::Index,
        Group::Lattice,
        Group::NeckNorms,
        Group::Fold,
        Group::Contraction,
        Group::Calibration,
        Group::Tcs,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Group::QuarticCensus => "quartic_census",
            Group::SymmetricControl => "symmetric_control",
            Group::Index => "index",
            Group::Lattice => "lattice",
            Group::NeckNorms => "neck_norms",
            Group::Fold => "fold",
            Group::Contraction => "contraction",
            Group::Calibration => "calibration",
            Group::Tcs => "tcs",
        }
    }

    pub fn run(&self, cfg: &VerifyConfig) -> Vec<Check> {
        let checks = match self {
            Group::QuarticCensus => quartic_census(cfg),
            Group::SymmetricControl => symmetric_control(cfg),
            Group::Index => index_suite(cfg),
            Group::Lattice => lattice_suite(cfg),
            Group::NeckNorms => neck_norms(cfg),
            Group::Fold => fold_suite(cfg),
            Group::Contraction => contraction_suite(cfg),
            Group::Calibration => calibration_suite(cfg),
            Group::Tcs => tcs_suite(cfg),
        };
        checks
            .into_iter()
            .map(|mut c| {
                c.name = format!("{}.{}", self.name(), c.name);
                c
            })
            .collect()
    }
}

/// Runs every group in order.
pub fn verify_all(cfg: &VerifyConfig) -> RunReport {
    let mut checks = Vec::new();
    let mut groups = serde_json::Map::new();
    for g in Group::ALL {
        let cs = g.run(cfg);
        groups.insert(g.name().to_string(), json!(cs.iter().all(|c| c.pass)));
        checks.extend(cs);
    }
    RunReport::new(
        "verify-all",
        json!({
            "tol_scale": cfg.tol_scale,
            "seed": cfg.seed,
            "spectrum": cfg.spectrum,
        }),
        json!({ "groups": groups }),
        checks,
    )
}

pub fn quartic_census(cfg: &VerifyConfig) -> Vec<Check> {
    let prob = match PencilProblem::new(quartic::reference_quartic()) {
        Ok(p) => p,
        Err(e) => return vec![Check::failed("setup", e)],
    };
    let rep = match quartic::structured_solve(&prob, &SolveConfig::default()) {
        Ok(r) => r,
        Err(e) => return vec![Check::failed("solve", e)],
    };
    let max_res = rep.solutions.iter().map(|s| s.residuals).fold(0.0, f64::max);
    vec![
        Check::exact("count", 108, rep.solutions.len()),
        Check::exact("bezout", 108, rep.bezout),
        Check::holds("count_matches_bezout", rep.count_matches_bezout),
        Check::at_most("max_residual", 1e-10 * cfg.tol_scale, max_res),
        Check::holds(
            "all_hessian_rank_3",
            rep.solutions.iter().all(|s| s.hessian_rank == 3),
        ),
        Check::holds("distinct_fibers", rep.all_distinct_fibers),
    ]
}

pub fn symmetric_control(_cfg: &VerifyConfig) -> Vec<Check> {
    let prob = match PencilProblem::new(quartic::quartic_with_weights([1, 1, 1])) {
        Ok(p) => p,
        Err(e) => return vec![Check::failed("setup", e)],
    };
    match quartic::structured_solve(&prob, &SolveConfig::default()) {
        Ok(rep) => vec![Check::exact("distinct_fibers", false, rep.all_distinct_fibers)],
        Err(e) => vec![Check::failed("solve", e)],
    }
}

pub fn index_suite(cfg: &VerifyConfig) -> Vec<Check> {
    let k3 = TopologicalData { sigma: -16, chi: 24, self_int: 0, dim_family: 0 };
    let mut checks = vec![
        match index::compact_index(&k3) {
            Ok(v) => Check::exact("compact_index", 4, v),
            Err(e) => Check::failed("compact_index", e),
        },
        Check::exact("cs_gluing_one", 2, index::cs_index_by_gluing(4, &[2]).index),
        Check::exact("cs_gluing_two", 0, index::cs_index_by_gluing(4, &[2, 2]).index),
        Check::exact("semistable", true, index::is_semistable(&cfg.spectrum)),
    ];
    let ac = IndexProblem::new(Side::Ac, Rate::Float(-0.5), 2);
    checks.push(match index::index_at(&ac, &cfg.spectrum, &Rate::Float(0.5)) {
        Ok(v) => Check::exact("ac_crossing_zero", 10, v),
        Err(e) => Check::failed("ac_crossing_zero", e),
    });
    checks.push(match index::index_at(&ac, &cfg.spectrum, &Rate::Float(1.5)) {
        Ok(v) => Check::exact("ac_crossing_wide", 38, v),
        Err(e) => Check::failed("ac_crossing_wide", e),
    });
    checks
}

/// Random orthogonal matrix: the Q factor of a uniformly sampled matrix.
pub fn random_rotation(rng: &mut impl Rng) -> [[f64; 3]; 3] {
    loop {
        let m: Matrix3<f64> = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        if m.determinant().abs() < 1e-3 {
            continue;
        }
        let q = m.qr().q();
        return [0, 1, 2].map(|i| [q[(i, 0)], q[(i, 1)], q[(i, 2)]]);
    }
}

pub fn lattice_suite(cfg: &VerifyConfig) -> Vec<Check> {
    let l = k3_lattice_checks();
    let mut checks = l.0;
    let lat = l.1;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let tol = 1e-9 * cfg.tol_scale;
    let mut involution = true;
    let mut periods = true;
    let mut valid = true;
    for _ in 0..cfg.random_triples {
        let t = match k3lattice::hk_triple_from_rotation(&lat, &random_rotation(&mut rng)) {
            Ok(t) => t,
            Err(e) => return vec![Check::failed("random_triples", e)],
        };
        valid &= t.is_orthonormal(&lat, tol).unwrap_or(false);
        involution &= k3lattice::hk_rotate(&k3lattice::hk_rotate(&t)) == t;
        for side in [k3lattice::Side::Plus, k3lattice::Side::Minus] {
            let (re, im) = k3lattice::matching_project(side, &t);
            periods &= k3lattice::period_point_check(&lat, &re, &im, tol).unwrap_or(false);
        }
    }
    checks.push(Check::holds("random_triples_valid", valid));
    checks.push(Check::holds("rotate_involution", involution));
    checks.push(Check::holds("projections_are_periods", periods));
    checks
}

fn k3_lattice_checks() -> (Vec<Check>, k3lattice::GramLattice) {
    let l = k3lattice::k3_lattice();
    let (p, n, z) = l.signature();
    let e8 = k3lattice::e8_negative();
    let basis: Vec<_> = (0..8).map(|i| e8.basis_vector(i)).collect();
    let roots = k3lattice::enumerate_roots_in_neg_def(&e8, &basis).map(|r| r.len());
    let checks = vec![
        Check::exact("signature", [3, 19, 0], [p, n, z]),
        Check::holds("even", l.is_even()),
        Check::exact("abs_det", "1".to_string(), l.determinant().magnitude().to_string()),
        match roots {
            Ok(c) => Check::exact("e8_roots", 240, c),
            Err(e) => Check::failed("e8_roots", e),
        },
    ];
    (checks, l)
}

/// Fitted behaviour of `annulus_norm(t, 1)` over `t = 2^-4 .. 2^-20`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeckFit {
    pub regime: NormRegime,
    /// Slope of `ln ‖·‖` against `ln t`.
    pub power_slope: f64,
    /// Slope of `ln ‖·‖^p` against `ln ln(1/t)`; 1 for logarithmic growth.
    pub log_slope: f64,
}

pub fn neck_fit(zeta: f64, weight: f64, p: f64, k: u32) -> crate::Result<NeckFit> {
    let ts: Vec<f64> = (4..=20).map(|k| 2f64.powi(-k)).collect();
    let mut norms = Vec::with_capacity(ts.len());
    for &t in &ts {
        let spec = WeightedNormSpec::new(p, k, weight, t)?;
        norms.push(analysis::annulus_norm(zeta, &spec, t, 1.0)?);
    }
    let logs: Vec<f64> = ts.iter().map(|t| (1.0 / t).ln()).collect();
    let powered: Vec<f64> = norms.iter().map(|n| n.powf(p)).collect();
    Ok(NeckFit {
        regime: analysis::norm_regime(zeta, weight),
        power_slope: model::fit_log_slope(&ts, &norms)?,
        log_slope: model::fit_log_slope(&logs, &powered)?,
    })
}

pub fn neck_norms(cfg: &VerifyConfig) -> Vec<Check> {
    let tol = 0.05 * cfg.tol_scale;
    let zeta = -1.0;
    let mut checks = Vec::new();
    for (weight, name) in [(-1.5, "bounded"), (-1.0, "log"), (-0.5, "power")] {
        match neck_fit(zeta, weight, 2.0, 1) {
            Ok(f) => match f.regime {
                NormRegime::Bounded => checks.push(Check::approx(name, 0.0, f.power_slope, tol)),
                NormRegime::Log => checks.push(Check::approx(name, 1.0, f.log_slope, tol)),
                NormRegime::Power => {
                    let want = zeta - weight;
                    checks.push(Check::approx(name, want, f.power_slope, tol * want.abs()))
                }
            },
            Err(e) => checks.push(Check::failed(name, e)),
        }
    }
    checks
}

/// Exponent of the onset scale against `s` over `s = 10^-1 .. 10^-4`.
pub fn fold_onset_exponent(alpha: f64) -> crate::Result<f64> {
    let ss = [1e-1, 1e-2, 1e-3, 1e-4];
    let mut onsets = Vec::new();
    for &s in &ss {
        onsets.push(analysis::fold_onset_scale(&FoldModel::new(alpha, 2.0, s)?, 1e-3)?);
    }
    model::fit_log_slope(&ss, &onsets)
}

/// Slope of `ln |∂_t h − 1|` against `ln t` at `r = 1`.
pub fn fold_dt_slope(alpha: f64) -> crate::Result<f64> {
    let m = FoldModel::new(alpha, 2.0, 0.1)?;
    let ts: Vec<f64> = (4..=20).map(|k| 2f64.powi(-k)).collect();
    let ds: Vec<f64> = ts.iter().map(|&t| (analysis::fold_dt(&m, 1.0, t) - 1.0).abs()).collect();
    model::fit_log_slope(&ts, &ds)
}

pub fn fold_suite(cfg: &VerifyConfig) -> Vec<Check> {
    let mut checks = Vec::new();
    for alpha in [0.25, 0.5, 0.75] {
        let want = 1.0 / (1.0 - alpha);
        checks.push(match fold_onset_exponent(alpha) {
            Ok(e) => Check::approx(&format!("onset_exponent_{alpha}"), want, e, 0.02 * want * cfg.tol_scale),
            Err(e) => Check::failed(&format!("onset_exponent_{alpha}"), e),
        });
        let want = alpha - 1.0;
        checks.push(match fold_dt_slope(alpha) {
            Ok(e) => Check::approx(&format!("dt_slope_{alpha}"), want, e, 0.02 * want.abs() * cfg.tol_scale),
            Err(e) => Check::failed(&format!("dt_slope_{alpha}"), e),
        });
    }
    checks
}

/// Random instance with `D = I + 0.2 E` and `F0` scaled so that the
/// smallness constant `4 C_D² C_Q ‖F0‖` is at most one half.
pub fn random_contraction_problem(rng: &mut impl Rng, n: usize) -> crate::Result<ContractionProblem> {
    let d: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j)) + 0.2 * rng.gen_range(-1.0..1.0) / n as f64).collect())
        .collect();
    let q: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|_| (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect())
        .collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let probe = ContractionProblem::new(d.clone(), q.clone(), raw.clone())?;
    let target = rng.gen_range(0.05..0.5);
    let scale = target / probe.contraction_constant().max(1e-300);
    ContractionProblem::new(d, q, raw.iter().map(|x| x * scale).collect())
}

pub fn contraction_suite(cfg: &VerifyConfig) -> Vec<Check> {
    let mut checks = Vec::new();
    match ContractionProblem::scalar(1.0, 1.0, 0.1) {
        Ok(p) => {
            let r = analysis::contraction_solve(&p, 500, 1e-14);
            checks.push(Check::holds("scalar_converged", r.converged));
            checks.push(Check::approx("scalar_abs_fixed_point", 0.11270, r.v_inf[0].abs(), 1e-5 * cfg.tol_scale));
            checks.push(Check::approx(
                "scalar_closed_form",
                (0.6f64.sqrt() - 1.0) / 2.0,
                r.v_inf[0],
                1e-6 * cfg.tol_scale,
            ));
            checks.push(Check::at_most("scalar_decay_ratio", p.contraction_constant() + 1e-9, r.max_decay_ratio()));
        }
        Err(e) => checks.push(Check::failed("scalar", e)),
    }
    match ContractionProblem::scalar(1.0, 1.0, 1.0) {
        Ok(p) => {
            let r = analysis::contraction_solve(&p, 10_000, 1e-14);
            checks.push(Check::exact("large_f0_diverges", true, r.diverged && !r.converged));
        }
        Err(e) => checks.push(Check::failed("large_f0", e)),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let mut worst_ratio: f64 = 0.0;
    let mut all_converged = true;
    for i in 0..cfg.contraction_instances {
        let n = 1 + i % 5;
        let p = match random_contraction_problem(&mut rng, n) {
            Ok(p) => p,
            Err(e) => return {
                checks.push(Check::failed("random_instances", e));
                checks
            },
        };
        let r = analysis::contraction_solve(&p, 1000, 1e-13);
        all_converged &= r.converged;
        let f = p.f0_norm();
        if f > 0.0 {
            let v: f64 = r.v_inf.iter().map(|x| x * x).sum::<f64>().sqrt();
            worst_ratio = worst_ratio.max(v / (r.c_i * f));
        }
    }
    checks.push(Check::holds("random_instances_converge", all_converged));
    checks.push(Check::at_most("random_bound_ratio", 1.0, worst_ratio));
    checks
}

pub fn calibration_suite(cfg: &VerifyConfig) -> Vec<Check> {
    let mut checks = Vec::new();
    checks.push(match model::calibration_sweep(&model::cayley_form_standard(), cfg.calibration_frames, cfg.seed) {
        Ok(w) => Check::at_most("random_frames_max_ratio", 1.0 + 1e-10 * cfg.tol_scale, w),
        Err(e) => Check::failed("random_frames_max_ratio", e),
    });
    let mut worst: f64 = 0.0;
    let mut err = None;
    for &r in &[0.1, 0.5, 1.0, 2.0, 10.0, 100.0] {
        let ratio = QuadricFiberPoint::at_radius(r)
            .and_then(|p| model::fiber_tangent_frame(&p))
            .and_then(|f| model::restrict_ratio(&model::cy4_cayley_form(), &f));
        match ratio {
            Ok(v) => worst = worst.max((v - 1.0).abs()),
            Err(e) => err = Some(e),
        }
    }
    checks.push(match err {
        None => Check::at_most("fiber_frames_deviation", 1e-10 * cfg.tol_scale, worst),
        Some(e) => Check::failed("fiber_frames_deviation", e),
    });
    let perm = model::find_signed_permutation(&model::cayley_form_standard(), &model::cy4_cayley_form());
    checks.push(Check::holds("signed_permutation_found", perm.is_some()));
    checks.push(Check::holds("cy_normalization", model::cy_normalization_holds()));
    checks
}

pub fn tcs_suite(cfg: &VerifyConfig) -> Vec<Check> {
    let q = TCSPiece::new("quartic", 108);
    vec![
        Check::exact("swap_h1", Vec::<u64>::new(), tcs::torus_gluing_homology(&GluingMatrix::swap())),
        Check::exact("match_rotation", true, tcs::neck_form_matching_with(SubstitutionKind::Rotation)),
        Check::exact("match_identity", false, tcs::neck_form_matching_with(SubstitutionKind::Identity)),
        Check::exact("glued_count", 216, tcs::glued_singular_count(&[q.clone(), q])),
        match tcs::torsion_threshold(-1.0) {
            Ok(t) => Check::approx("torsion_threshold", std::f64::consts::LN_2, t, 1e-12 * cfg.tol_scale),
            Err(e) => Check::failed("torsion_threshold", e),
        },
    ]
}

/// The HK triple built from the identity rotation, used in reports.
pub fn standard_triple() -> HKTriple {
    let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    k3lattice::hk_triple_from_rotation(&k3lattice::k3_lattice(), &id).expect("K3 lattice has U blocks")
}
