use std::fs;
use std::path::Path;

use cayfib::analysis::{self, ContractionProblem, FoldModel, WeightedNormSpec};
use cayfib::index::{self, IndexProblem, Rate, RateSpectrum, Side, TopologicalData};
use cayfib::k3lattice::{self, GramLattice, LatticeLiteral, TripleLiteral};
use cayfib::model::{self, QuadricFiberPoint};
use cayfib::quartic::{self, PencilProblem, SolveConfig};
use cayfib::tcs::{self, GluingMatrix, SubstitutionKind, TCSPiece};
use cayfib::verify::{self, VerifyConfig};
use cayfib::{Check, HomogeneousPoly, RunReport};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use thiserror::Error;

use crate::args::*;

/// Failures that make the input unusable (exit code 2).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Core(#[from] cayfib::Error),
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).map_err(|source| CliError::Json {
        path: path.display().to_string(),
        source,
    })
}

pub fn dispatch(cmd: &Command, tol_scale: f64) -> Result<RunReport> {
    match cmd {
        Command::Quartic(QuarticCmd::Solve(a)) => quartic_solve(a, tol_scale),
        Command::K3(c) => match c {
            K3Cmd::CheckTriple(a) => k3_check_triple(a, tol_scale),
            K3Cmd::Match(a) => k3_match(a, tol_scale),
            K3Cmd::Roots(a) => k3_roots(a),
            K3Cmd::Primitive(a) => k3_primitive(a),
        },
        Command::Index(c) => match c {
            IndexCmd::Compact(a) => index_compact(a),
            IndexCmd::Crossing(a) => index_crossing(a),
        },
        Command::Model(c) => match c {
            ModelCmd::Calibrate(a) => model_calibrate(a, tol_scale),
            ModelCmd::Rates => model_rates(tol_scale),
            ModelCmd::Det(a) => model_det(a),
        },
        Command::Neck(c) => match c {
            NeckCmd::Norms(a) => neck_norms(a, tol_scale),
            NeckCmd::Fold(a) => neck_fold(a, tol_scale),
            NeckCmd::Iterate(a) => neck_iterate(a),
        },
        Command::Tcs(c) => match c {
            TcsCmd::Base(a) => tcs_base(a),
            TcsCmd::MatchForms => Ok(tcs_match_forms()),
            TcsCmd::Count(a) => Ok(tcs_count(a)),
            TcsCmd::Torsion(a) => tcs_torsion(a, tol_scale),
        },
        Command::VerifyAll(a) => verify_all(a, tol_scale),
    }
}

fn quartic_solve(a: &SolveArgs, tol_scale: f64) -> Result<RunReport> {
    let (poly, source) = match (&a.poly, &a.weights) {
        (Some(path), _) => (HomogeneousPoly::from_json_str(&read(path)?)?, json!(path.display().to_string())),
        (None, Some(w)) => (quartic::quartic_with_weights([w[0], w[1], w[2]]), json!({ "weights": w })),
        (None, None) => (quartic::reference_quartic(), json!({ "weights": [1, 10, 100] })),
    };
    let prob = PencilProblem::new(poly)?;
    let cfg = SolveConfig { tol: a.tol, ..SolveConfig::default() };
    let rep = quartic::structured_solve(&prob, &cfg)?;
    let max_res = rep.solutions.iter().map(|s| s.residuals).fold(0.0, f64::max);
    let mut results = json!({
        "count": rep.solutions.len(),
        "bezout": rep.bezout,
        "max_residual": max_res,
        "all_multiplicity_one": rep.all_multiplicity_one,
        "all_distinct_fibers": rep.all_distinct_fibers,
        "discarded_zero_c": rep.discarded_zero_c,
        "min_separation": rep.min_separation,
        "min_fiber_separation": rep.min_fiber_separation,
    });
    if a.list {
        results["solutions"] = json!(rep.solutions);
    }
    let checks = vec![
        Check::exact("count_equals_bezout", rep.bezout as usize, rep.solutions.len()),
        Check::at_most("max_residual", 1e-10 * tol_scale, max_res),
        Check::holds("all_hessian_rank_3", rep.solutions.iter().all(|s| s.hessian_rank == 3)),
        Check::holds("distinct_fibers", rep.all_distinct_fibers),
    ];
    Ok(RunReport::new("quartic solve", json!({ "poly": source, "tol": a.tol }), results, checks))
}

fn load_lattice(path: &Option<std::path::PathBuf>, default: fn() -> GramLattice) -> Result<(GramLattice, Option<LatticeLiteral>)> {
    match path {
        None => Ok((default(), None)),
        Some(p) => {
            let lit: LatticeLiteral = read_json(p)?;
            Ok((lit.lattice()?, Some(lit)))
        }
    }
}

fn load_triple(a: &TripleArgs, l: &GramLattice) -> Result<k3lattice::HKTriple> {
    match &a.triple {
        None => {
            let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
            Ok(k3lattice::hk_triple_from_rotation(l, &id)?)
        }
        Some(p) => {
            let lit: TripleLiteral = read_json(p)?;
            Ok(lit.to_triple(l)?)
        }
    }
}

fn path_value(p: &Option<std::path::PathBuf>) -> Value {
    p.as_ref().map_or(Value::Null, |p| json!(p.display().to_string()))
}

fn k3_check_triple(a: &TripleArgs, tol_scale: f64) -> Result<RunReport> {
    let (l, _) = load_lattice(&a.lattice, k3lattice::k3_lattice)?;
    let t = load_triple(a, &l)?;
    let tol = 1e-9 * tol_scale;
    let orthonormal = t.is_orthonormal(&l, tol)?;
    let results = if orthonormal {
        json!({ "a": t.a, "domain": k3lattice::hk_domain_report(&l, &t, tol)? })
    } else {
        json!({ "a": t.a, "domain": { "orthonormal": false, "in_domain": false } })
    };
    Ok(RunReport::new(
        "k3 check-triple",
        json!({ "triple": path_value(&a.triple), "lattice": path_value(&a.lattice) }),
        results,
        vec![Check::holds("orthonormal", orthonormal)],
    ))
}

fn k3_match(a: &TripleArgs, tol_scale: f64) -> Result<RunReport> {
    let (l, _) = load_lattice(&a.lattice, k3lattice::k3_lattice)?;
    let t = load_triple(a, &l)?;
    let tol = 1e-9 * tol_scale;
    let rotated = k3lattice::hk_rotate(&t);
    let (pr, pi) = k3lattice::matching_project(k3lattice::Side::Plus, &t);
    let (mr, mi) = k3lattice::matching_project(k3lattice::Side::Minus, &t);
    let (qr, qi) = k3lattice::matching_project(k3lattice::Side::Plus, &rotated);
    let checks = vec![
        Check::holds("orthonormal", t.is_orthonormal(&l, tol)?),
        Check::holds("rotate_involution", k3lattice::hk_rotate(&rotated) == t),
        Check::holds("plus_projection_is_period", k3lattice::period_point_check(&l, &pr, &pi, tol)?),
        Check::holds("minus_projection_is_period", k3lattice::period_point_check(&l, &mr, &mi, tol)?),
        Check::holds("rotation_exchanges_projections", qr == mr && qi == mi),
    ];
    Ok(RunReport::new(
        "k3 match",
        json!({ "triple": path_value(&a.triple), "lattice": path_value(&a.lattice) }),
        json!({
            "rotated": rotated,
            "pi_plus": [pr, pi],
            "pi_minus": [mr, mi],
        }),
        checks,
    ))
}

fn k3_roots(a: &RootsArgs) -> Result<RunReport> {
    let (l, lit) = load_lattice(&a.lattice, k3lattice::e8_negative)?;
    let basis: Vec<k3lattice::LatticeVector> = match lit.map(|x| x.embedding().basis) {
        Some(b) if !b.is_empty() => b,
        _ => (0..l.rank()).map(|i| l.basis_vector(i)).collect(),
    };
    let search = k3lattice::enumerate_roots_bounded(&l, &basis, a.height)?;
    let closed = search
        .roots
        .iter()
        .all(|r| search.roots.binary_search(&r.neg()).is_ok());
    let mut results = json!({ "count": search.roots.len(), "complete": search.complete });
    if a.list {
        results["roots"] = json!(search.roots);
    }
    Ok(RunReport::new(
        "k3 roots",
        json!({ "lattice": path_value(&a.lattice), "height": a.height }),
        results,
        vec![
            Check::holds("all_square_minus_two", search.roots.iter().all(|r| k3lattice::is_root(&l, r))),
            Check::holds("closed_under_negation", closed),
        ],
    ))
}

fn k3_primitive(a: &LatticeArgs) -> Result<RunReport> {
    let lit: LatticeLiteral = read_json(&a.lattice)?;
    let l = lit.lattice()?;
    let primitive = k3lattice::is_primitive_embedding(&l, &lit.embedding())?;
    Ok(RunReport::new(
        "k3 primitive",
        json!({ "lattice": a.lattice.display().to_string() }),
        json!({ "primitive": primitive, "rank": lit.basis.len() }),
        vec![],
    ))
}

fn expect_check<T: serde::Serialize + PartialEq>(name: &str, expect: Option<T>, actual: T) -> Vec<Check> {
    expect.map(|e| Check::exact(name, e, actual)).into_iter().collect()
}

fn index_compact(a: &CompactArgs) -> Result<RunReport> {
    let t = TopologicalData { sigma: a.sigma, chi: a.chi, self_int: a.self_int, dim_family: a.dim_family };
    let v = index::compact_index(&t)?;
    Ok(RunReport::new(
        "index compact",
        json!(t),
        json!({ "index": v }),
        expect_check("index", a.expect, v),
    ))
}

fn load_spectrum(spec: &str) -> Result<RateSpectrum> {
    if spec == "quadric" {
        return Ok(index::quadric_spectrum());
    }
    Ok(RateSpectrum::from_json_str(&read(Path::new(spec))?)?)
}

fn index_crossing(a: &CrossingArgs) -> Result<RunReport> {
    let spectrum = load_spectrum(&a.spectrum)?;
    let from: Rate = a.from.parse()?;
    let to: Rate = a.to.parse()?;
    let side = match a.side {
        SideArg::Ac => Side::Ac,
        SideArg::Cs => Side::Cs,
        SideArg::Compact => Side::Compact,
    };
    let prob = IndexProblem::new(side, from, a.base_index);
    let v = index::index_at(&prob, &spectrum, &to)?;
    let (lo, hi) = if to >= from { (from, to) } else { (to, from) };
    let crossed: Vec<_> = spectrum.in_open_interval(&lo, &hi).cloned().collect();
    Ok(RunReport::new(
        "index crossing",
        json!({ "problem": prob, "to": to, "spectrum": spectrum }),
        json!({ "index": v, "crossed": crossed }),
        expect_check("index", a.expect, v),
    ))
}

fn model_calibrate(a: &CalibrateArgs, tol_scale: f64) -> Result<RunReport> {
    let phi0 = model::cayley_form_standard();
    let cy = model::cy4_cayley_form();
    let worst = model::calibration_sweep(&phi0, a.samples, a.seed)?;
    let mut fiber_dev: f64 = 0.0;
    for r in [0.1, 0.5, 1.0, 2.0, 10.0, 100.0] {
        let p = QuadricFiberPoint::at_radius(r)?;
        let ratio = model::restrict_ratio(&cy, &model::fiber_tangent_frame(&p)?)?;
        fiber_dev = fiber_dev.max((ratio - 1.0).abs());
    }
    let perm = model::find_signed_permutation(&phi0, &cy);
    let cy_norm = model::cy_normalization_holds();
    let perm_json = perm.as_ref().map(|p| {
        json!({
            "images_1_based": p.perm.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "signs": p.signs,
        })
    });
    Ok(RunReport::new(
        "model calibrate",
        json!({ "samples": a.samples, "seed": a.seed }),
        json!({
            "max_random_ratio": worst,
            "max_fiber_deviation": fiber_dev,
            "signed_permutation": perm_json,
            "cy_normalization": cy_norm,
        }),
        vec![
            Check::at_most("random_frames_max_ratio", 1.0 + 1e-10 * tol_scale, worst),
            Check::at_most("fiber_frames_deviation", 1e-10 * tol_scale, fiber_dev),
            Check::holds("signed_permutation_found", perm.is_some()),
            Check::holds("cy_normalization", cy_norm),
        ],
    ))
}

fn model_rates(tol_scale: f64) -> Result<RunReport> {
    let rep = model::measure_rates()?;
    Ok(RunReport::new(
        "model rates",
        json!({ "s2_factor": model::S2_FACTOR }),
        json!(rep),
        vec![
            Check::approx("s2_slope", -1.0, rep.s2_slope, 0.01 * tol_scale),
            Check::approx("s1_slope", 0.0, rep.s1_slope, 0.01 * tol_scale),
            Check::at_most("lift_error", 1e-10 * tol_scale, rep.max_lift_error),
        ],
    ))
}

fn model_det(a: &DetArgs) -> Result<RunReport> {
    let s = model::det_sweep(a.zeta, a.rmin, a.rmax, a.samples)?;
    Ok(RunReport::new(
        "model det",
        json!({ "zeta": a.zeta, "rmin": a.rmin, "rmax": a.rmax, "samples": a.samples }),
        json!(s),
        vec![Check::holds("bounded_away_from_zero_and_infinity", s.bound > 0.0 && s.bound.is_finite())],
    ))
}

fn neck_norms(a: &NormsArgs, tol_scale: f64) -> Result<RunReport> {
    let spec = WeightedNormSpec::new(a.p, a.k, a.weight, a.t)?;
    let value = analysis::annulus_norm(a.zeta, &spec, a.t, 1.0)?;
    let fit = verify::neck_fit(a.zeta, a.weight, a.p, a.k)?;
    let tol = 0.05 * tol_scale;
    let check = match fit.regime {
        analysis::NormRegime::Bounded => Check::approx("fitted_exponent", 0.0, fit.power_slope, tol),
        analysis::NormRegime::Log => Check::approx("log_growth_exponent", 1.0, fit.log_slope, tol),
        analysis::NormRegime::Power => {
            let want = a.zeta - a.weight;
            Check::approx("fitted_exponent", want, fit.power_slope, tol * want.abs())
        }
    };
    Ok(RunReport::new(
        "neck norms",
        json!(spec).as_object().cloned().map_or(Value::Null, |mut m| {
            m.insert("zeta".into(), json!(a.zeta));
            Value::Object(m)
        }),
        json!({ "norm": value, "regime": fit.regime, "fit": fit }),
        vec![check],
    ))
}

fn neck_fold(a: &FoldArgs, tol_scale: f64) -> Result<RunReport> {
    let m = FoldModel::new(a.alpha, a.gamma, a.s)?;
    let width = analysis::fold_width(&m)?;
    let onset = analysis::fold_onset_scale(&m, 1e-3)?;
    let exponent = verify::fold_onset_exponent(a.alpha)?;
    let want = 1.0 / (1.0 - a.alpha);
    let mut checks = vec![
        Check::holds("onset_within_factor_2_of_width", onset / width > 0.5 && onset / width < 2.0),
        Check::approx("onset_exponent", want, exponent, 0.02 * want * tol_scale),
    ];
    let mut results = json!({ "width": width, "onset_scale": onset, "onset_exponent": exponent });
    if let (Some(eta), Some(eps)) = (a.eta, a.eps) {
        let r = analysis::fold_intersection(&m, eta, eps);
        results["intersection_radius"] = json!(r);
        if let Some(r) = r {
            let gap = (analysis::fold_height(&m, r, eta) - analysis::fold_height(&m, r, eps)).abs();
            checks.push(Check::at_most("heights_agree", 1e-12 * tol_scale, gap));
        }
    }
    Ok(RunReport::new(
        "neck fold",
        json!({ "alpha": a.alpha, "gamma": a.gamma, "s": a.s, "eta": a.eta, "eps": a.eps }),
        results,
        checks,
    ))
}

fn neck_iterate(a: &IterateArgs) -> Result<RunReport> {
    let raw: ContractionProblem = read_json(&a.problem)?;
    let prob = ContractionProblem::new(raw.d, raw.q, raw.f0)?;
    let res = analysis::contraction_solve(&prob, a.max_iter, a.tol);
    let v_norm: f64 = res.v_inf.iter().map(|x| x * x).sum::<f64>().sqrt();
    let residual: f64 = prob.residual(&res.v_inf).iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut checks = vec![Check::holds("converged", res.converged)];
    if res.converged {
        checks.push(Check::at_most("residual", 10.0 * a.tol, residual));
        checks.push(Check::at_most("v_inf_bound", res.c_i * prob.f0_norm(), v_norm));
    }
    Ok(RunReport::new(
        "neck iterate",
        json!({ "problem": a.problem.display().to_string(), "max_iter": a.max_iter, "tol": a.tol }),
        json!({
            "v_inf": res.v_inf,
            "iterations": res.iterations,
            "converged": res.converged,
            "diverged": res.diverged,
            "c_d": res.c_d,
            "c_q": res.c_q,
            "c_i": res.c_i,
            "contraction_constant": prob.contraction_constant(),
            "max_decay_ratio": res.max_decay_ratio(),
            "residual": residual,
        }),
        checks,
    ))
}

fn tcs_base(a: &BaseArgs) -> Result<RunReport> {
    let g = GluingMatrix::parse(&a.matrix)?;
    let factors = tcs::torus_gluing_homology(&g);
    Ok(RunReport::new(
        "tcs base",
        json!({ "matrix": g.entries() }),
        json!({ "h1_invariant_factors": factors, "h1_trivial": factors.is_empty() }),
        vec![],
    ))
}

fn tcs_match_forms() -> RunReport {
    let verdicts: serde_json::Map<String, Value> = SubstitutionKind::ALL
        .iter()
        .map(|k| (format!("{k:?}"), json!(tcs::neck_form_matching_with(*k))))
        .collect();
    RunReport::new(
        "tcs match-forms",
        json!({}),
        json!({
            "phi_plus": tcs::asymptotic_g2_form(tcs::End::Plus).to_string(),
            "phi_minus": tcs::asymptotic_g2_form(tcs::End::Minus).to_string(),
            "verdicts": verdicts,
        }),
        vec![
            Check::exact("rotation", true, tcs::neck_form_matching_with(SubstitutionKind::Rotation)),
            Check::exact("identity", false, tcs::neck_form_matching_with(SubstitutionKind::Identity)),
            Check::exact("no_dt_flip", false, tcs::neck_form_matching_with(SubstitutionKind::NoDtFlip)),
        ],
    )
}

fn tcs_count(a: &CountArgs) -> RunReport {
    let pieces: Vec<TCSPiece> = a
        .pieces
        .iter()
        .enumerate()
        .map(|(i, &c)| TCSPiece::new(format!("block{}", i + 1), c))
        .collect();
    let total = tcs::glued_singular_count(&pieces);
    RunReport::new(
        "tcs count",
        json!({ "pieces": a.pieces }),
        json!({
            "count": total,
            "reference_b2": tcs::REFERENCE_B2,
            "reference_b3": tcs::REFERENCE_B3,
        }),
        expect_check("count", a.expect, total),
    )
}

fn tcs_torsion(a: &TorsionArgs, tol_scale: f64) -> Result<RunReport> {
    let t = tcs::torsion_threshold(a.lambda)?;
    let e = (a.lambda * t).exp();
    Ok(RunReport::new(
        "tcs torsion",
        json!({ "lambda": a.lambda }),
        json!({ "threshold": t }),
        vec![Check::approx("boundary_equation", 0.5, e, 1e-12 * tol_scale)],
    ))
}

fn verify_all(a: &VerifyAllArgs, tol_scale: f64) -> Result<RunReport> {
    let mut cfg = VerifyConfig { tol_scale, ..VerifyConfig::default() };
    if let Some(p) = &a.spectrum {
        cfg.spectrum = RateSpectrum::from_json_str(&read(p)?)?;
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    Ok(verify::verify_all(&cfg))
}
