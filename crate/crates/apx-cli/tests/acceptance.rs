//! Acceptance suite: ten desk-scale criteria covering kernel identities,
//! dual-route operator agreement, explicit-constant envelopes, the exact-L2
//! error oracle, equivalence bands, direct/inverse rate recovery,
//! cross-index embeddings, derivative growth, norm-comparison trends, and
//! byte-level determinism of the command-line driver.
//!
//! Each test prints one `acceptance NN <name>: PASS/FAIL` line (visible with
//! `--nocapture`, or in the failure report otherwise) and then asserts.
//!
//! One criterion is expected to fail: the mean-displacement bound in
//! `kernel_mass_growth_and_mean_displacement_identities` demands
//! `(1/pi) * integral over [0, pi] of u * J_n(u) du <= 1/(2n)` for the
//! normalized fourth-order kernel, but that quantity scales as `c/n` with
//! `c` between 3*ln(2)/pi (~0.66191) and pi/2 - 8/(3*pi) (~0.72197), so it
//! exceeds the stated envelope at every index. The test measures the sweep
//! honestly and reports the observed constants.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use apx_core::best_approx::{best_approx, best_error_profile};
use apx_core::fourier::{analyze, PeriodicGrid, SampledFunction};
use apx_core::harness::{
    estimate_decay_exponent, run_check, CheckId, CheckReport, CheckSpec, NormIndex,
};
use apx_core::norms::norm_poly;
use apx_core::operators::{jackson_kernel, OperatorTag};
use apx_core::quadrature::integrate_panels;
use apx_core::smoothness::modulus;
use apx_core::testfn::{default_family, random_polys, TestFunction};
use apx_core::weights::Weight;
use rayon::prelude::*;

fn line(n: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {n:02} {name}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn family_member(name: &str) -> TestFunction {
    default_family(42)
        .into_iter()
        .find(|f| f.name == name)
        .unwrap_or_else(|| panic!("{name} is in the built-in family"))
}

fn run(spec: &CheckSpec) -> CheckReport {
    run_check(spec).unwrap_or_else(|e| panic!("{} runs: {e}", spec.check_id))
}

// -------------------------------------------------------------------------
// 1. Kernel identities: unit mass, cubic normalization growth, and the mean
//    displacement envelope, for every index 2..=64.
// -------------------------------------------------------------------------
#[test]
fn kernel_mass_growth_and_mean_displacement_identities() {
    let t0 = Instant::now();
    let mut mass_dev_max = 0.0_f64;
    let mut growth_lo = f64::INFINITY;
    let mut growth_hi = f64::NEG_INFINITY;
    let mut disp_lo = f64::INFINITY;
    let mut disp_hi = f64::NEG_INFINITY;
    let mut mass_violations = 0_usize;
    let mut growth_violations = 0_usize;
    let mut disp_violations = 0_usize;
    for n in 2..=64_u32 {
        let (sf, kappa) = jackson_kernel(n).expect("kernel builds");
        // The kernel is a polynomial of degree 2(n-1) <= 126; everything the
        // 16384-point analysis reports above that is rounding noise. Trimming
        // it makes point evaluation ~65x cheaper and cannot hide a defect:
        // non-constant modes integrate to exactly zero over the period, and a
        // <= 1e-12 coefficient shifts the half-period moment by < 1e-12.
        let jp = analyze(&sf).trimmed(1e-12);
        // Unit mean against dt/pi, re-measured with an independent rule.
        let mass = integrate_panels(&|t| jp.eval(t), -PI, PI, 1024) / PI;
        mass_dev_max = mass_dev_max.max((mass - 1.0).abs());
        if (mass - 1.0).abs() > 1e-9 {
            mass_violations += 1;
        }
        // Normalization constant grows like the cube of the index.
        let growth = kappa / (n as f64).powi(3);
        growth_lo = growth_lo.min(growth);
        growth_hi = growth_hi.max(growth);
        if !(1.06066..=1.76777).contains(&growth) {
            growth_violations += 1;
        }
        // Mean displacement against the 1/(2n) envelope.
        let moment = integrate_panels(&|u| u * jp.eval(u), 0.0, PI, 512) / PI;
        let scaled = moment * n as f64;
        disp_lo = disp_lo.min(scaled);
        disp_hi = disp_hi.max(scaled);
        if moment > 0.5 / n as f64 + 1e-12 {
            disp_violations += 1;
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    let pass = mass_violations == 0 && growth_violations == 0 && disp_violations == 0;
    line(
        1,
        "kernel identities",
        pass,
        &format!(
            "mass max|dev| = {mass_dev_max:.2e} (tol 1e-9, {mass_violations} violations); \
             growth kappa/n^3 in [{growth_lo:.5}, {growth_hi:.5}] (band [1.06066, 1.76777], \
             {growth_violations} violations); mean displacement n*M_n in \
             [{disp_lo:.5}, {disp_hi:.5}] against envelope 0.5 ({disp_violations}/63 \
             indices violate); {elapsed:.2}s"
        ),
    );
    assert!(elapsed < 5.0, "kernel sweep took {elapsed:.2}s, budget 5s");
    assert_eq!(mass_violations, 0, "kernel mass identity failed");
    assert_eq!(growth_violations, 0, "kernel growth band failed");
    assert_eq!(
        disp_violations, 0,
        "the mean-displacement envelope n*M_n <= 0.5 fails at every kernel index: \
         measured n*M_n ranges over [{disp_lo:.5}, {disp_hi:.5}]. The first moment of \
         the normalized fourth-order kernel does scale like 1/n, but its constant sits \
         between 3*ln(2)/pi ~= 0.66191 and pi/2 - 8/(3*pi) ~= 0.72197, always above \
         0.5, so the stated envelope cannot hold for any index"
    );
}

// -------------------------------------------------------------------------
// 2. Dual-route agreement: every operator member applied to 20 seeded
//    degree-32 polynomials agrees between the mode-multiplier route and the
//    defining-integral quadrature route, in both weighted L2 norms.
// -------------------------------------------------------------------------
#[test]
fn operator_routes_agree_in_weighted_l2() {
    let t0 = Instant::now();
    let polys = random_polys(42, 20, 32);
    let grid = PeriodicGrid::new(128).expect("grid");
    let xs: Vec<f64> = grid.points().collect();
    let w_half = Weight::power(0.0, 0.5).expect("weight");
    let tags = [
        OperatorTag::Steklov { v: 0.7 },
        OperatorTag::Window {
            lambda: 2.5,
            tau: 0.4,
        },
        OperatorTag::Symmetric { h: 0.6 },
        OperatorTag::Smooth { v: 0.8 },
        OperatorTag::ADelta { v: 0.5, r: 2 },
        OperatorTag::Upsilon { l: 0.9 },
        OperatorTag::Fejer { n: 12 },
        OperatorTag::ValleePoussin { n: 9 },
        OperatorTag::Jackson { n: 14 },
        OperatorTag::Difference { t: 0.35, r: 2 },
        OperatorTag::PartialSum { n: 11 },
    ];
    let jobs: Vec<(usize, usize)> = (0..tags.len())
        .flat_map(|ti| (0..polys.len()).map(move |pi| (ti, pi)))
        .collect();
    let errs: Vec<(f64, usize, usize)> = jobs
        .par_iter()
        .map(|&(ti, pi)| {
            let (tag, f) = (&tags[ti], &polys[pi]);
            let via_mult = tag.apply(f).expect("multiplier route");
            let vals = tag
                .apply_via_quadrature(&|x| f.eval(x), &xs, 32.0)
                .expect("quadrature route");
            let diff: Vec<f64> = vals
                .iter()
                .zip(xs.iter())
                .map(|(&q, &x)| q - via_mult.eval(x))
                .collect();
            let dp = analyze(&SampledFunction::new(grid, diff).expect("sampled diff"));
            let plain = norm_poly(&dp, 2.0, None).expect("plain norm");
            let weighted = norm_poly(&dp, 2.0, Some(&w_half)).expect("weighted norm");
            (plain.max(weighted), ti, pi)
        })
        .collect();
    let mut worst = 0.0_f64;
    let mut worst_label = String::new();
    for &(e, ti, pi) in &errs {
        if e > worst {
            worst = e;
            worst_label = format!("{} on polynomial {pi}", tags[ti].describe());
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    let pass = worst <= 1e-8;
    line(
        2,
        "dual-route operator agreement",
        pass,
        &format!(
            "{} members x 20 seeded degree-32 polynomials x 2 weights; worst route \
             disagreement {worst:.3e} ({worst_label}; tol 1e-8); {elapsed:.2}s",
            tags.len()
        ),
    );
    assert!(
        worst <= 1e-8,
        "operator routes disagree by {worst:.3e} at {worst_label}"
    );
    assert!(elapsed < 30.0, "dual-route sweep took {elapsed:.2}s, budget 30s");
}

// -------------------------------------------------------------------------
// 3. Explicit-constant envelopes: forward averages against C_1, window
//    averages against C_2, and delayed means against 3*C_12, across four
//    (p, weight) combinations, with zero violations.
// -------------------------------------------------------------------------
#[test]
fn averaging_operators_never_exceed_their_explicit_constants() {
    let combos: [(f64, &str); 4] = [
        (2.0, "const(1)"),
        (2.0, "power(0,0.5)"),
        (1.0, "power(0,-0.5)"),
        (f64::INFINITY, "const(1)"),
    ];
    let ops = ["steklov_T", "window_S", "vallee_poussin"];
    let mut violations = 0_usize;
    let mut worst_frac = 0.0_f64;
    let mut worst_label = String::new();
    for (p, wdesc) in combos {
        for op in ops {
            let mut spec = CheckSpec::default_for(CheckId::OperatorUniform);
            spec.operator = Some(op.into());
            spec.weight = wdesc.into();
            spec.p = NormIndex(p);
            let rep = run(&spec);
            let cap = rep.explicit_constant.expect("envelope recorded");
            for row in &rep.rows {
                if row.ratio > cap * (1.0 + 1e-9) {
                    violations += 1;
                }
            }
            let frac = rep.aggregate.max_ratio / cap;
            if frac > worst_frac {
                worst_frac = frac;
                worst_label = format!("{op} at p={p} weight={wdesc}");
            }
            assert!(
                rep.verdict.is_pass(),
                "{op} at p={p} weight={wdesc}: verdict {}",
                rep.verdict
            );
        }
    }
    let pass = violations == 0;
    line(
        3,
        "explicit operator envelopes",
        pass,
        &format!(
            "12 (operator, p, weight) combinations; {violations} violations; fullest \
             envelope use {:.4}% ({worst_label})",
            100.0 * worst_frac
        ),
    );
    assert_eq!(violations, 0, "operator norm exceeded its explicit constant");
}

// -------------------------------------------------------------------------
// 4. Exact-L2 oracle: the projection solver's error matches the spectral
//    tail formula for every degree 4..=64.
// -------------------------------------------------------------------------
#[test]
fn projection_errors_match_the_spectral_tail_formula() {
    let t0 = Instant::now();
    let mut details = Vec::new();
    for (name, deg) in [("abs_sin_pow_1", 2048_usize), ("exp_sin", 128)] {
        let fp = family_member(name).to_poly(deg);
        let total = norm_poly(&fp, 2.0, None).expect("norm");
        let profile = best_error_profile(&fp, 64, None).expect("error profile");
        let mut worst_rel = 0.0_f64;
        for n in 4..=64_usize {
            let direct = best_approx(&fp, n, 2.0, None).expect("projection").error;
            let tail = profile[n];
            if tail >= 1e-9 * total {
                let rel = (direct - tail).abs() / tail;
                worst_rel = worst_rel.max(rel);
                assert!(
                    rel <= 1e-7,
                    "{name} degree {n}: solver error {direct:.12e} vs tail formula \
                     {tail:.12e} (relative gap {rel:.3e} > 1e-7)"
                );
            } else {
                // Below one part in 1e9 of the norm a relative comparison
                // amplifies rounding noise; the routes must instead agree
                // absolutely at the 1e-12 * ||f|| scale.
                assert!(
                    (direct - tail).abs() <= 1e-12 * total,
                    "{name} degree {n}: below the floor the solver reports \
                     {direct:.6e} but the tail formula gives {tail:.6e}"
                );
            }
        }
        details.push(format!("{name}: worst relative gap {worst_rel:.2e}"));
    }
    let elapsed = t0.elapsed().as_secs_f64();
    line(
        4,
        "exact-L2 error oracle",
        true,
        &format!("{}; tol 1e-7 relative; {elapsed:.2}s", details.join("; ")),
    );
    assert!(elapsed < 10.0, "oracle sweep took {elapsed:.2}s, budget 10s");
}

// -------------------------------------------------------------------------
// 5. Equivalence bands: the modulus against both the K-functional and the
//    realization, with the exact lower bound (1 + C_1)^(-r) and a flat
//    trend, for r in {1, 2} and both weights.
// -------------------------------------------------------------------------
#[test]
fn modulus_equivalence_bands_hold_with_exact_lower_bounds() {
    let mut band_lo = f64::INFINITY;
    let mut band_hi = f64::NEG_INFINITY;
    for id in [CheckId::RealizationEquiv, CheckId::KfunctionalEquiv] {
        for r in [1_u32, 2] {
            for wdesc in ["const(1)", "power(0,0.5)"] {
                let mut spec = CheckSpec::default_for(id);
                spec.r = r;
                spec.weight = wdesc.into();
                let rep = run(&spec);
                let lb = rep.hard_lower_bound.expect("lower bound recorded");
                assert!(
                    rep.aggregate.min_ratio >= lb * (1.0 - 1e-9),
                    "{id} r={r} weight={wdesc}: min ratio {} under the exact lower \
                     bound {lb}",
                    rep.aggregate.min_ratio
                );
                assert!(
                    rep.aggregate.slope.abs() <= 0.05 + 1e-12,
                    "{id} r={r} weight={wdesc}: trend slope {} outside the +-0.05 band",
                    rep.aggregate.slope
                );
                assert!(
                    rep.verdict.is_pass(),
                    "{id} r={r} weight={wdesc}: verdict {}",
                    rep.verdict
                );
                band_lo = band_lo.min(rep.aggregate.min_ratio);
                band_hi = band_hi.max(rep.aggregate.max_ratio);
            }
        }
    }
    line(
        5,
        "equivalence bands",
        true,
        &format!(
            "8 (check, order, weight) combinations; ratios confined to \
             [{band_lo:.3}, {band_hi:.3}] with exact lower bounds held and |slope| <= 0.05"
        ),
    );
}

// -------------------------------------------------------------------------
// 6. Direct and inverse estimates sandwich the decay rate, and the fitted
//    modulus exponent matches the exact-L2 oracle exponent within 0.1.
// -------------------------------------------------------------------------
#[test]
fn direct_and_inverse_estimates_recover_the_decay_exponent() {
    let jackson = run(&CheckSpec::default_for(CheckId::Jackson));
    assert!(
        jackson.verdict.is_pass(),
        "direct estimate verdict: {}",
        jackson.verdict
    );
    let stechkin = run(&CheckSpec::default_for(CheckId::StechkinInverse));
    assert!(
        stechkin.verdict.is_pass(),
        "inverse estimate verdict: {}",
        stechkin.verdict
    );
    let mut details = Vec::new();
    for name in ["abs_sin_pow_1", "abs_sin_pow_2.5"] {
        let fp = family_member(name).to_poly(2048);
        let profile = best_error_profile(&fp, 600, None).expect("error profile");
        let ns: Vec<usize> = (3..=9).map(|e| 1_usize << e).collect(); // 8..=512
        let errors: Vec<(f64, f64)> = ns.iter().map(|&n| (n as f64, profile[n])).collect();
        let beta_oracle = estimate_decay_exponent(&errors)
            .expect("oracle exponent fits")
            .beta_hat;
        let moduli: Vec<(f64, f64)> = ns
            .iter()
            .map(|&n| {
                let v = 1.0 / n as f64;
                (
                    n as f64,
                    modulus(&fp, 4, v, 2.0, None).expect("modulus evaluates"),
                )
            })
            .collect();
        let beta_modulus = estimate_decay_exponent(&moduli)
            .expect("modulus exponent fits")
            .beta_hat;
        assert!(
            (beta_modulus - beta_oracle).abs() <= 0.1,
            "{name}: modulus exponent {beta_modulus:.3} vs oracle exponent \
             {beta_oracle:.3} (gap above 0.1)"
        );
        details.push(format!(
            "{name}: oracle {beta_oracle:.3}, modulus {beta_modulus:.3}"
        ));
    }
    line(
        6,
        "direct/inverse rate recovery",
        true,
        &format!(
            "direct {} / inverse {}; fitted exponents within 0.1: {}",
            jackson.verdict,
            stechkin.verdict,
            details.join("; ")
        ),
    );
}

// -------------------------------------------------------------------------
// 7. Cross-index embeddings: the modulus-route and error-route checks stay
//    bounded over (p, q) in {(1,2), (2,inf)} with both admissible weights,
//    and the truncated and tail-extrapolated integrals agree within 5%.
// -------------------------------------------------------------------------
#[test]
fn cross_index_embeddings_hold_with_agreeing_tail_integrals() {
    let t0 = Instant::now();
    let combos: [(f64, f64, &str); 3] = [
        (1.0, 2.0, "const(1)"),
        (2.0, f64::INFINITY, "const(1)"),
        (2.0, f64::INFINITY, "power(0,0.5)"),
    ];
    let mut worst_tail_gap = 0.0_f64;
    let mut runs = 0_usize;
    for id in [CheckId::UlyanovModulus, CheckId::UlyanovBestApprox] {
        for (p, q, wdesc) in combos {
            let mut spec = CheckSpec::default_for(id);
            spec.p = NormIndex(p);
            spec.q = Some(NormIndex(q));
            spec.weight = wdesc.into();
            let rep = run(&spec);
            assert!(
                rep.verdict.is_pass(),
                "{id} p={p} q={q} weight={wdesc}: verdict {}",
                rep.verdict
            );
            for row in &rep.rows {
                if let (Some(tr), Some(ex)) = (row.integral_truncated, row.integral_extrapolated)
                {
                    if ex > 0.0 {
                        let gap = (tr - ex).abs() / ex;
                        worst_tail_gap = worst_tail_gap.max(gap);
                        assert!(
                            gap <= 0.05,
                            "{id} p={p} q={q} weight={wdesc} [{}]: truncated {tr:.6e} vs \
                             extrapolated {ex:.6e} differ by {:.1}% (> 5%)",
                            row.params,
                            100.0 * gap
                        );
                    }
                }
            }
            runs += 1;
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    line(
        7,
        "cross-index embeddings",
        true,
        &format!(
            "{runs} (check, p, q, weight) combinations all bounded; worst \
             truncated/extrapolated gap {:.2}% (tol 5%); {elapsed:.1}s (budget 180s)",
            100.0 * worst_tail_gap
        ),
    );
    assert!(elapsed < 180.0, "embedding suite took {elapsed:.1}s, budget 180s");
}

// -------------------------------------------------------------------------
// 8. Derivative growth: 50 seeded polynomials per degree stay under the
//    (2 C_12)^r n^r envelope for r in {1, 2}, with zero violations.
// -------------------------------------------------------------------------
#[test]
fn derivative_growth_stays_under_the_explicit_envelope() {
    let mut violations = 0_usize;
    let mut worst_frac = 0.0_f64;
    for r in [1_u32, 2] {
        for wdesc in ["const(1)", "power(0,0.5)"] {
            let mut spec = CheckSpec::default_for(CheckId::Bernstein);
            spec.r = r;
            spec.weight = wdesc.into();
            let rep = run(&spec);
            let cap = rep.explicit_constant.expect("envelope recorded");
            for row in &rep.rows {
                if row.ratio > cap * (1.0 + 1e-9) {
                    violations += 1;
                }
            }
            worst_frac = worst_frac.max(rep.aggregate.max_ratio / cap);
            assert!(
                rep.verdict.is_pass(),
                "derivative growth r={r} weight={wdesc}: verdict {}",
                rep.verdict
            );
        }
    }
    let pass = violations == 0;
    line(
        8,
        "derivative growth envelope",
        pass,
        &format!(
            "50 seeded polynomials per degree, r in {{1,2}}, both weights; {violations} \
             violations; fullest envelope use {:.2}%",
            100.0 * worst_frac
        ),
    );
    assert_eq!(violations, 0, "derivative norm exceeded its envelope");
}

// -------------------------------------------------------------------------
// 9. Norm-comparison trend: the cross-index polynomial ratio stays finite
//    with a flat trend for (q, p) in {(1,2), (2,inf)} under the half-power
//    weight.
// -------------------------------------------------------------------------
#[test]
fn norm_comparison_ratios_stay_bounded_with_flat_trend() {
    let mut details = Vec::new();
    for (q, p) in [(1.0, 2.0), (2.0, f64::INFINITY)] {
        let mut spec = CheckSpec::default_for(CheckId::Nikolskii);
        spec.weight = "power(0,0.5)".into();
        spec.p = NormIndex(p);
        spec.q = Some(NormIndex(q));
        let rep = run(&spec);
        assert!(
            rep.aggregate.max_ratio.is_finite(),
            "norm comparison q={q} p={p}: max ratio not finite"
        );
        assert!(
            rep.aggregate.slope <= 0.05 + 1e-12,
            "norm comparison q={q} p={p}: trend slope {} above 0.05",
            rep.aggregate.slope
        );
        assert!(
            rep.verdict.is_pass(),
            "norm comparison q={q} p={p}: verdict {}",
            rep.verdict
        );
        details.push(format!(
            "(q={q}, p={p}): max {:.3e}, slope {:+.3}",
            rep.aggregate.max_ratio, rep.aggregate.slope
        ));
    }
    line(
        9,
        "norm-comparison trend",
        true,
        &format!("{}; degrees 4..=256, 20 seeded polynomials", details.join("; ")),
    );
}

// -------------------------------------------------------------------------
// 10. Determinism: two runs of the bundled suite with the same seed produce
//     byte-identical CSV reports.
// -------------------------------------------------------------------------
#[test]
fn suite_reruns_produce_byte_identical_reports() {
    let config = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets/default_suite.json");
    let base = std::env::temp_dir().join(format!("apx-determinism-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&base);
    let mut runs: Vec<Vec<(String, Vec<u8>)>> = Vec::new();
    for i in 0..2 {
        let dir = base.join(format!("run{i}"));
        std::fs::create_dir_all(&dir).expect("work directory");
        let out = Command::new(env!("CARGO_BIN_EXE_apx"))
            .arg("run")
            .arg(&config)
            .current_dir(&dir)
            .output()
            .expect("suite executes");
        assert!(
            out.status.success(),
            "suite run {i} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        );
        let outdir = dir.join("apx-out");
        let mut files: Vec<String> = std::fs::read_dir(&outdir)
            .expect("output directory")
            .map(|e| e.expect("entry").file_name().into_string().expect("name"))
            .filter(|n| n.ends_with(".csv"))
            .collect();
        files.sort();
        assert_eq!(files.len(), 14, "expected 14 CSV reports, found {files:?}");
        runs.push(
            files
                .into_iter()
                .map(|n| {
                    let bytes = std::fs::read(outdir.join(&n)).expect("report readable");
                    (n, bytes)
                })
                .collect(),
        );
    }
    let (first, second) = (&runs[0], &runs[1]);
    assert_eq!(
        first.iter().map(|(n, _)| n).collect::<Vec<_>>(),
        second.iter().map(|(n, _)| n).collect::<Vec<_>>(),
        "the two runs produced different report sets"
    );
    let mut total_bytes = 0_usize;
    for ((name, a), (_, b)) in first.iter().zip(second) {
        assert_eq!(a, b, "{name} differs between identically-seeded runs");
        total_bytes += a.len();
    }
    std::fs::remove_dir_all(&base).ok();
    line(
        10,
        "byte-identical reruns",
        true,
        &format!("14 CSV reports, {total_bytes} bytes, identical across two seeded runs"),
    );
}
