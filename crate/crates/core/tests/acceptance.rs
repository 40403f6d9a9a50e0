//! Exit criteria. Runs every criterion, prints one PASS/FAIL line each, and exits
//! non-zero if any fails.

use std::f64::consts::FRAC_1_SQRT_2;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use kdq::audit::{check_condition1, check_condition2, check_condition3, kd_rep, make_condition2_violator, mixed_kd_rep, span_residual};
use kdq::kd::kd_inverse;
use kdq::weak::{coupling_sweep, fit_convergence, PointerConfig};
use kdq::wigner::{discrete_wigner, double_slit_state, wigner_as_rep};
use kdq::{
    computational_basis, conditional_weak_value, fourier_basis, kd_marginal_a, kd_marginal_b, kd_transform,
    make_pure_density, product_trace, random_basis, random_density, total_probability, LinearOperator, Ordering,
    OrthonormalBasis, StateVector, C64,
};

const DIMS: std::ops::RangeInclusive<usize> = 2..=8;

type Check = fn() -> Result<String, String>;

fn main() {
    let criteria: Vec<(&str, &str, Check)> = vec![
        ("1", "marginals reproduce Born probabilities", marginals),
        ("2", "eigenstate inputs give delta-weighted overlaps", eigenstate_inputs),
        ("3", "orthogonal compressions vanish", orthogonal_compressions),
        ("4", "span residual separates KD family from violator", span_uniqueness),
        ("5", "total probability decomposition", total_probability_decomposition),
        ("6", "KD round trip reconstruction", reconstruction),
        ("7", "BA table is the conjugate of AB", ordering_conjugation),
        ("8", "double-slit Wigner violation", wigner_violation),
        ("9a", "pointer estimates converge to the weak value", weak_convergence),
        ("9b", "estimated imaginary part flips under g -> -g", weak_imaginary_flip),
        ("10", "CLI reproduces criteria 1, 4, 8, 9 with exit codes", cli_end_to_end),
    ];

    let mut failed = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {id:<3} {name}: {detail} [{secs:.2}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {id:<3} {name}: {detail} [{secs:.2}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criterion/criteria failed");
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn basis_pairs(d: usize, seed: u64) -> Vec<(OrthonormalBasis, OrthonormalBasis)> {
    vec![
        (computational_basis(d).unwrap(), fourier_basis(d).unwrap()),
        (random_basis(d, 2 * seed).unwrap(), random_basis(d, 2 * seed + 1).unwrap()),
    ]
}

fn min_overlap(a: &OrthonormalBasis, b: &OrthonormalBasis) -> f64 {
    a.vectors()
        .iter()
        .flat_map(|x| b.vectors().iter().map(move |y| y.overlap(x).unwrap().norm()))
        .fold(f64::INFINITY, f64::min)
}

fn marginals() -> Result<String, String> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut count = 0;
    for d in DIMS {
        for k in 0..1000u64 {
            let seed = 1_000_000 * d as u64 + k;
            let rho = random_density(d, 1 + (k as usize % d), seed).unwrap();
            let fixed = (computational_basis(d).unwrap(), fourier_basis(d).unwrap());
            let random = (random_basis(d, 2 * seed).unwrap(), random_basis(d, 2 * seed + 1).unwrap());
            for (a, b) in [&fixed, &random] {
                let dist = kd_transform(&rho, a, b, Ordering::AB).unwrap();
                let ma = kd_marginal_a(&dist).unwrap();
                let mb = kd_marginal_b(&dist).unwrap();
                for i in 0..d {
                    worst = worst.max((ma[i] - rho.expectation(a.vector(i)).unwrap()).abs());
                    worst = worst.max((mb[i] - rho.expectation(b.vector(i)).unwrap()).abs());
                }
                count += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-10, || format!("max marginal error {worst:e} > 1e-10"))?;
    ensure(elapsed <= Duration::from_secs(10), || format!("took {elapsed:?} > 10 s"))?;
    Ok(format!("{count} tables, max error {worst:.2e}"))
}

fn eigenstate_inputs() -> Result<String, String> {
    let mut worst = 0.0f64;
    for d in DIMS {
        for (seed, (a, b)) in basis_pairs(d, 77 + d as u64).into_iter().enumerate() {
            for side_a in [true, false] {
                for k in 0..d {
                    let input = if side_a { a.vector(k) } else { b.vector(k) };
                    let dist = kd_transform(&make_pure_density(input), &a, &b, Ordering::AB).unwrap();
                    for i in 0..d {
                        for j in 0..d {
                            let allowed = if side_a { i == k } else { j == k };
                            let expected = if allowed { b.vector(j).overlap(a.vector(i)).unwrap().norm_sqr() } else { 0.0 };
                            worst = worst.max((dist.get(i, j) - C64::from(expected)).norm());
                        }
                    }
                }
            }
            for ordering in [Ordering::AB, Ordering::BA] {
                let report = check_condition2(&kd_rep(&a, &b, ordering).unwrap(), 1e-12);
                ensure(report.passed, || format!("d={d} pair {seed} {ordering}: {}", report.witness))?;
                worst = worst.max(report.worst_violation);
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e} > 1e-12"))?;
    Ok(format!("dims 2-8, max deviation {worst:.2e}"))
}

fn orthogonal_compressions() -> Result<String, String> {
    let mut worst = 0.0f64;
    let mut samples = 0;
    for d in DIMS {
        for (a, b) in basis_pairs(d, 313 + d as u64) {
            for ordering in [Ordering::AB, Ordering::BA] {
                let report = check_condition3(&kd_rep(&a, &b, ordering).unwrap(), 100, d as u64, 1e-12).unwrap();
                ensure(report.passed, || format!("d={d} {ordering}: {}", report.witness))?;
                worst = worst.max(report.worst_violation);
                samples += report.samples_used;
            }
        }
    }
    Ok(format!("{samples} sampled states, max |<m|Pi|m>| or ||QPiQ|| {worst:.2e}"))
}

fn span_uniqueness() -> Result<String, String> {
    let mut worst = 0.0f64;
    for d in DIMS {
        for (a, b) in basis_pairs(d, 991 + d as u64) {
            let mut reps = vec![kd_rep(&a, &b, Ordering::AB).unwrap(), kd_rep(&a, &b, Ordering::BA).unwrap()];
            for lambda in [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0] {
                reps.push(mixed_kd_rep(&a, &b, lambda).unwrap());
            }
            for rep in &reps {
                let r = span_residual(rep).max_nondegenerate();
                ensure(r <= 1e-10, || format!("d={d} {}: residual {r:e} > 1e-10", rep.label()))?;
                worst = worst.max(r);
            }
        }
    }
    let a = computational_basis(4).unwrap();
    let b = fourier_basis(4).unwrap();
    let violator = make_condition2_violator(&a, &b, 0.1).unwrap();
    let vr = span_residual(&violator).max_nondegenerate();
    ensure(vr >= 1e-2, || format!("violator residual {vr:e} < 1e-2"))?;
    let c1 = check_condition1(&violator, 1e-10);
    let c2 = check_condition2(&violator, 1e-10);
    ensure(c1.passed, || format!("violator fails C1: {}", c1.witness))?;
    ensure(!c2.passed, || "violator passes C2".to_owned())?;
    Ok(format!("family max residual {worst:.2e}; violator residual {vr:.3e}, C2 violation {:.3e}", c2.worst_violation))
}

fn random_projector(d: usize, seed: u64) -> LinearOperator {
    let basis = random_basis(d, seed).unwrap();
    let rank = 1 + (seed as usize % d);
    (0..rank).fold(LinearOperator::zeros(d), |acc, k| acc.add(&basis.projector(k)).unwrap())
}

fn total_probability_decomposition() -> Result<String, String> {
    let mut worst = 0.0f64;
    for k in 0..500u64 {
        let d = 2 + (k as usize % 7);
        let seed = 50_000 + k;
        let m = random_projector(d, seed);
        let rho = random_density(d, 1 + (k as usize % d), seed).unwrap();
        let a = random_basis(d, 3 * seed + 1).unwrap();
        let b = random_basis(d, 3 * seed + 2).unwrap();
        let born = product_trace(&m, &rho).unwrap();
        let combined = total_probability(&m, &rho, &a, &b).unwrap();
        // weak values weighted by the KD table
        let dist = kd_transform(&rho, &a, &b, Ordering::AB).unwrap();
        let mut weighted = C64::from(0.0);
        for i in 0..d {
            for j in 0..d {
                weighted += conditional_weak_value(&m, a.vector(i), b.vector(j)).unwrap() * dist.get(i, j);
            }
        }
        worst = worst.max((combined - born).norm()).max((weighted - born).norm());
    }
    ensure(worst <= 1e-10, || format!("max error {worst:e} > 1e-10"))?;
    Ok(format!("500 pairs, max error {worst:.2e}"))
}

fn reconstruction() -> Result<String, String> {
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut k = 0u64;
    while count < 1000 {
        k += 1;
        let d = 2 + (count % 7);
        let seed = 90_000 + k;
        let a = random_basis(d, 2 * seed).unwrap();
        let b = random_basis(d, 2 * seed + 1).unwrap();
        if min_overlap(&a, &b) < 1e-3 {
            continue;
        }
        let rho = random_density(d, 1 + (count % d), seed).unwrap();
        for ordering in [Ordering::AB, Ordering::BA] {
            let back = kd_inverse(&kd_transform(&rho, &a, &b, ordering).unwrap()).map_err(|e| e.to_string())?;
            worst = worst.max(back.frobenius_distance(&rho).unwrap());
        }
        count += 1;
    }
    for d in DIMS {
        let rho = random_density(d, d, d as u64).unwrap();
        let back = kd_inverse(&kd_transform(&rho, &computational_basis(d).unwrap(), &fourier_basis(d).unwrap(), Ordering::AB).unwrap())
            .map_err(|e| e.to_string())?;
        worst = worst.max(back.frobenius_distance(&rho).unwrap());
    }
    ensure(worst <= 1e-9, || format!("max Frobenius error {worst:e} > 1e-9"))?;
    Ok(format!("{count} random states plus Fourier pairs, max error {worst:.2e}"))
}

fn ordering_conjugation() -> Result<String, String> {
    let mut worst = 0.0f64;
    for d in DIMS {
        for k in 0..100u64 {
            let seed = 7_000 * d as u64 + k;
            let rho = random_density(d, 1 + (k as usize % d), seed).unwrap();
            for (a, b) in basis_pairs(d, seed) {
                let ab = kd_transform(&rho, &a, &b, Ordering::AB).unwrap();
                let ba = kd_transform(&rho, &a, &b, Ordering::BA).unwrap();
                worst = worst.max((ab.table().conjugate() - ba.table()).iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e} > 1e-12"))?;
    Ok(format!("1400 tables, max deviation {worst:.2e}"))
}

fn wigner_violation() -> Result<String, String> {
    let rho = make_pure_density(&double_slit_state(5, 1, 3).unwrap());
    let w = discrete_wigner(&rho).unwrap();
    let m2 = w.position_marginal()[2];
    ensure(m2.abs() <= 1e-12, || format!("position marginal at q=2 is {m2:e}"))?;
    let w20 = w.get(2, 0);
    ensure((w20 - 0.2).abs() <= 1e-12, || format!("W(2,0) = {w20}"))?;
    let dist = kd_transform(&rho, &computational_basis(5).unwrap(), &fourier_basis(5).unwrap(), Ordering::AB).unwrap();
    let kd_row = (0..5).map(|p| dist.get(2, p).norm()).fold(0.0, f64::max);
    ensure(kd_row <= 1e-12, || format!("KD row q=2 reaches {kd_row:e}"))?;
    let rep = wigner_as_rep(5).unwrap();
    let c1 = check_condition1(&rep, 1e-10);
    let c3 = check_condition3(&rep, 100, 0, 1e-10).unwrap();
    ensure(c1.passed, || format!("wigner rep fails C1: {}", c1.witness))?;
    ensure(!c3.passed, || "wigner rep passes C3".to_owned())?;
    Ok(format!("W(2,0) = {w20:.15}, KD row max {kd_row:.1e}, C3 violation {:.3}", c3.worst_violation))
}

fn plus() -> StateVector {
    StateVector::new(vec![C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)]).unwrap()
}

fn plus_i() -> StateVector {
    StateVector::new(vec![C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, FRAC_1_SQRT_2)]).unwrap()
}

fn weak_convergence() -> Result<String, String> {
    let start = Instant::now();
    let cfg = PointerConfig::default();
    ensure(cfg.grid_points == 512, || "default grid is not N=512".to_owned())?;
    let a_proj = computational_basis(2).unwrap().projector(0);
    let rows = coupling_sweep(&plus(), &a_proj, &plus_i(), &cfg, &[0.2, 0.1, 0.05]).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let exact = C64::new(0.5, 0.5);
    ensure((rows[0].re_exact - exact.re).abs() < 1e-12 && (rows[0].im_exact - exact.im).abs() < 1e-12, || {
        format!("exact weak value {} {}", rows[0].re_exact, rows[0].im_exact)
    })?;
    let fit = fit_convergence(&rows, cfg.sigma).ok_or("no fit")?;
    let last = rows[2].abs_err;
    ensure(fit.order >= 1.8, || format!("fitted order {:.3} < 1.8", fit.order))?;
    ensure(last <= 0.01, || format!("final error {last:e} > 0.01"))?;
    ensure(elapsed <= Duration::from_secs(5), || format!("sweep took {elapsed:?} > 5 s"))?;
    Ok(format!("order {:.3}, constant {:.3}, error at g=0.05 {last:.2e}", fit.order, fit.constant))
}

fn weak_imaginary_flip() -> Result<String, String> {
    let cfg = PointerConfig::default();
    let a_proj = computational_basis(2).unwrap().projector(0);
    let rows = coupling_sweep(&plus(), &a_proj, &plus_i(), &cfg, &[0.1, -0.1]).map_err(|e| e.to_string())?;
    let (pos, neg) = (rows[0].estimate(), rows[1].estimate());
    ensure((pos.re - neg.re).abs() <= 0.01, || format!("real part changed: {} vs {}", pos.re, neg.re))?;
    ensure(pos.im.signum() != neg.im.signum(), || {
        format!("Im estimate {:.6} at g=+0.1 and {:.6} at g=-0.1 share a sign", pos.im, neg.im)
    })?;
    Ok(format!("Im {:.4} -> {:.4}", pos.im, neg.im))
}

// CLI

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn kdq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdq")).args(args).current_dir(fixtures()).output().expect("spawn kdq")
}

fn json_out(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json stdout")
}

fn jsonl_out(out: &Output) -> Vec<serde_json::Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).expect("jsonl")).collect()
}

fn expect_code(out: &Output, code: i32, what: &str) -> Result<(), String> {
    ensure(out.status.code() == Some(code), || {
        format!("{what}: exit {:?} (expected {code}); stderr {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
    })
}

fn cli_end_to_end() -> Result<String, String> {
    // 1: marginals of a shipped state match Born probabilities
    let out = kdq(&["kd", "--state", "i_state.json", "--basis-a", "computational", "--basis-b", "hadamard2"]);
    expect_code(&out, 0, "kd")?;
    let v = json_out(&out);
    for key in ["marginal_a", "marginal_b"] {
        for p in v[key].as_array().unwrap() {
            let p = p.as_f64().unwrap();
            ensure((p - 0.5).abs() <= 1e-10, || format!("{key} entry {p}"))?;
        }
    }
    let out = kdq(&["kd", "--state", "maximally_mixed_d3.json", "--basis-a", "random:4", "--basis-b", "fourier"]);
    expect_code(&out, 0, "kd mixed")?;
    for p in json_out(&out)["marginal_b"].as_array().unwrap() {
        ensure((p.as_f64().unwrap() - 1.0 / 3.0).abs() <= 1e-10, || format!("mixed marginal {p}"))?;
    }

    // 4
    let out = kdq(&["audit", "kd", "--dim", "4", "--span"]);
    expect_code(&out, 0, "audit kd --span")?;
    let out = kdq(&["audit", "violator:0.1", "--dim", "4", "--c1", "--c2", "--span"]);
    expect_code(&out, 1, "audit violator")?;
    let reports = jsonl_out(&out);
    ensure(reports.len() == 3, || format!("{} reports", reports.len()))?;
    ensure(reports[0]["passed"] == true && reports[1]["passed"] == false, || "violator C1/C2 verdicts".to_owned())?;
    ensure(reports[2]["worst_violation"].as_f64().unwrap() >= 1e-2, || "violator span residual".to_owned())?;

    // 8
    let out = kdq(&["wigner", "--state", "double_slit_d5.json", "--report"]);
    expect_code(&out, 0, "wigner")?;
    let v = json_out(&out);
    let w20 = v["table"][2][0].as_f64().unwrap();
    ensure((w20 - 0.2).abs() <= 1e-12, || format!("W(2,0) = {w20}"))?;
    ensure(v["position_marginal"][2].as_f64().unwrap().abs() <= 1e-12, || "position marginal".to_owned())?;
    ensure(!v["violations"].as_array().unwrap().is_empty(), || "empty violation report".to_owned())?;
    let out = kdq(&["audit", "wigner", "--dim", "5", "--c1", "--c3"]);
    expect_code(&out, 1, "audit wigner")?;
    let reports = jsonl_out(&out);
    ensure(reports[0]["passed"] == true && reports[1]["passed"] == false, || "wigner C1/C3 verdicts".to_owned())?;
    let out = kdq(&["wigner", "--state", "even_d4.json"]);
    expect_code(&out, 2, "even dimension")?;

    // 9
    let out = kdq(&[
        "weak", "--state", "plus.json", "--a-index", "0", "--basis-a", "computational", "--b-index", "0", "--basis-b",
        "y_basis.json", "--couplings", "0.2,0.1,0.05",
    ]);
    expect_code(&out, 0, "weak")?;
    let rows = kdq::io::read_sweep_csv(&String::from_utf8_lossy(&out.stdout)).map_err(|e| e.to_string())?;
    let fit = fit_convergence(&rows, 1.0).ok_or("no fit")?;
    ensure(fit.order >= 1.8 && rows[2].abs_err <= 0.01, || format!("CLI sweep order {:.3}", fit.order))?;
    let out = kdq(&["weak", "--state", "zero.json", "--a-index", "0", "--b-index", "1", "--basis-b", "computational", "--couplings", "0.1"]);
    expect_code(&out, 4, "degenerate post-selection")?;

    // singular overlap on reconstruction
    let kd_path = std::env::temp_dir().join(format!("kdq-acceptance-{}.json", std::process::id()));
    let out = kdq(&["kd", "--state", "zero.json", "--basis-a", "computational", "--basis-b", "computational"]);
    expect_code(&out, 0, "kd computational pair")?;
    std::fs::write(&kd_path, &out.stdout).unwrap();
    let out = kdq(&["reconstruct", "--kd", kd_path.to_str().unwrap()]);
    let _ = std::fs::remove_file(&kd_path);
    expect_code(&out, 3, "singular overlap")?;

    Ok("exit codes 0/1/2/3/4 observed".to_owned())
}
