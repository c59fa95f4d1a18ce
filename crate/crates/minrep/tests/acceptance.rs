//! The twelve acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines come out in order and the
//! process exit code reflects the overall result.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use minrep_core::bessel;
use minrep_core::catalog::{self, Family, FamilyDescriptor};
use minrep_core::liealg::{build_model, GradedModel};
use minrep_core::orbit;
use minrep_core::report::{Status, VerificationReport};
use minrep_core::sphver::{self, GridSpec};
use minrep_core::tensor;

type Outcome = Result<String, String>;

fn model(f: Family, n: usize) -> GradedModel {
    build_model(f, n).unwrap_or_else(|e| panic!("building {f} n={n}: {e}"))
}

fn four_models() -> Vec<GradedModel> {
    vec![
        model(Family::OSplit, 2),
        model(Family::OSplit, 3),
        model(Family::GlReal, 2),
        model(Family::GlReal, 3),
    ]
}

fn require(rep: &VerificationReport, names: &[&str]) -> Result<(), String> {
    for name in names {
        let c = rep
            .check(name)
            .ok_or_else(|| format!("{}: no check {name}", rep.model))?;
        if !c.passed() {
            return Err(format!("{}: {name} {} ({})", rep.model, c.residual, c.detail));
        }
    }
    Ok(())
}

fn require_all(rep: &VerificationReport) -> Result<(), String> {
    match rep.failures().next() {
        None if !rep.checks.is_empty() => Ok(()),
        None => Err(format!("{}: {} has no checks", rep.model, rep.suite)),
        Some(c) => Err(format!("{}: {} {} ({})", rep.model, c.name, c.residual, c.detail)),
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:.1?}, limit {limit:?}"))
    }
}

fn structural() -> Outcome {
    let t = Instant::now();
    for m in four_models() {
        let rep = m.structural_suite(0);
        require(
            &rep,
            &[
                "jacobi",
                "theta_automorphism",
                "form_invariance",
                "grading_orthogonality",
                "sl2_triples",
                "ad_h_grading",
                "form_normalization",
            ],
        )?;
        if let Some(c) = rep.checks.iter().find(|c| c.residual != "0") {
            return Err(format!("{}: {} residual {}", m.name(), c.name, c.residual));
        }
    }
    within(t.elapsed(), Duration::from_secs(60))?;
    Ok(format!("all residuals 0 in {:.1?}", t.elapsed()))
}

fn constant_k() -> Outcome {
    for m in four_models() {
        require(&sphver::verify_k1(&m), &["nu_theta_y1_bracket"])?;
    }
    Ok("ν([θy₁,y]) = ⟨θy₁,y⟩ on every n̄ basis vector".into())
}

fn constant_k_prime() -> Outcome {
    for m in four_models() {
        require(
            &sphver::verify_kprime(&m, 100, 0),
            &["k_prime_on_orbit", "negative_control_rank_two"],
        )?;
    }
    Ok("identity exact on 100 orbit points per model, y₁+y₂ detected".into())
}

fn constant_k_double_prime() -> Outcome {
    for m in four_models() {
        let s = m.casimir_omega_scalar().map_err(|e| format!("{}: {e}", m.name()))?;
        if s != minrep_core::rational::q(2) {
            return Err(format!("{}: scalar {s}", m.name()));
        }
    }
    Ok("Ω = 2 on every n basis vector".into())
}

fn modular() -> Outcome {
    for m in four_models() {
        require_all(&m.modular_character_check())?;
    }
    let o44 = model(Family::OSplit, 2);
    let s1 = o44.stabilizer_algebra(o44.y(0)).map_err(|e| e.to_string())?;
    if s1.len() != 11 {
        return Err(format!("dim s₁ = {} on O_4,4", s1.len()));
    }
    Ok("tr ad = 2dν on a ∩ s₁, dim s₁ = 11 on O_4,4".into())
}

fn bessel_suite() -> Outcome {
    let taus = ["-1/2", "0", "1/2"].map(|s| minrep_core::rational::HalfInt::parse(s).unwrap());
    let zs: Vec<f64> = (0..=120).map(|i| 0.1 * 500f64.powf(i as f64 / 120.0)).collect();
    let rep = bessel::bessel_suite(&taus, &zs);
    require(
        &rep,
        &["d_residual_quadrature", "d_residual_closed_form", "half_order_closed_form", "evenness"],
    )?;
    let tol = |n: &str| rep.check(n).and_then(|c| c.tolerance).unwrap_or(f64::NAN);
    if tol("d_residual_quadrature") > 1e-9 || tol("half_order_closed_form") > 1e-10 || tol("evenness") > 1e-12 {
        return Err("tolerances looser than required".into());
    }
    Ok(format!(
        "max Dφ residual {}, K_1/2 {}, evenness {}",
        rep.check("d_residual_quadrature").unwrap().residual,
        rep.check("half_order_closed_form").unwrap().residual,
        rep.check("evenness").unwrap().residual
    ))
}

fn square_integrability() -> Outcome {
    let t = Instant::now();
    let rep = orbit::square_integrability_suite();
    require(&rep, &["l2_o44_closed", "l2_o44_quadrature", "catalog_finite"])?;
    let v = rep.check("l2_o44_quadrature").and_then(|c| c.value);
    if let Some(v) = v {
        let rel = (v - std::f64::consts::PI / 8.0).abs() / (std::f64::consts::PI / 8.0);
        if rel >= 1e-6 {
            return Err(format!("O_4,4 integral {v}, relative error {rel:e}"));
        }
    }
    within(t.elapsed(), Duration::from_secs(30))?;
    Ok(format!("O_4,4 integral π/8 by two routes, all instances finite, {:.1?}", t.elapsed()))
}

fn measure_scaling() -> Outcome {
    let mut worst: f64 = 0.0;
    for m in [model(Family::OSplit, 2), model(Family::GlReal, 2)] {
        let rep = orbit::scaling_check(&m, 1_000_000, 0);
        require(&rep, &["scaling_z=0.5", "scaling_z=2"])?;
        for c in &rep.checks {
            worst = worst.max(c.residual_f64);
        }
    }
    Ok(format!("largest relative error {:.2}%", 100.0 * worst))
}

fn spherical() -> Outcome {
    let t = Instant::now();
    let m = model(Family::OSplit, 2);
    let rep = sphver::verify_spherical_direct(&m, &GridSpec::default(), 1_000_000, 0);
    let c = rep.check("cancellation").ok_or("no cancellation check")?;
    let ctl = rep.check("control_wrong_tau").ok_or("no control check")?;
    if c.status != Status::Pass {
        return Err(format!("max |z| = {} ({})", c.residual, c.detail));
    }
    if ctl.status != Status::Pass || ctl.residual_f64 <= sphver::CONTROL_SIGMAS {
        return Err(format!("control only at {}σ", ctl.residual));
    }
    within(t.elapsed(), Duration::from_secs(600))?;
    Ok(format!(
        "{} points, max |z| {:.2}, control {:.0}σ, {:.1?}",
        c.count,
        c.residual_f64,
        ctl.residual_f64,
        t.elapsed()
    ))
}

fn tensor_audit() -> Outcome {
    let o66 = model(Family::OSplit, 3);
    let d = tensor::stabilizer_sk(&o66, 2).map_err(|e| e.to_string())?.dims();
    // Sp_4(R) and SL_2(R)²
    if (d.s_k, d.g_k, d.h_k) != (22, 10, 6) {
        return Err(format!("O_6,6: s₂ {} g₂ {} h₂ {}", d.s_k, d.g_k, d.h_k));
    }
    require_all(&tensor::audit_dual_pair(&o66, 2).map_err(|e| e.to_string())?)?;
    let gl6 = model(Family::GlReal, 3);
    let d = tensor::stabilizer_sk(&gl6, 2).map_err(|e| e.to_string())?.dims();
    // GL_2(R) and GL_1(R)²
    if (d.g_k, d.h_k) != (4, 2) {
        return Err(format!("GL_6: g₂ {} h₂ {}", d.g_k, d.h_k));
    }
    require_all(&tensor::audit_dual_pair(&gl6, 2).map_err(|e| e.to_string())?)?;
    Ok("O_6,6: 22/10/6, GL_6: g₂ 4, h₂ 2".into())
}

/// Classification table oracle: group, d, e.
const TABLE: [(&str, &str, u32); 11] = [
    ("GL_2n(R)", "1", 0),
    ("O_2n,2n", "2", 0),
    ("E_7(7)", "4", 0),
    ("O_p+2,p+2", "p", 0),
    ("Sp_n(C)", "1", 1),
    ("GL_2n(C)", "2", 1),
    ("O_4n(C)", "4", 1),
    ("E_7(C)", "8", 1),
    ("O_p+4(C)", "p", 1),
    ("Sp_n,n", "2", 2),
    ("GL_2n(H)", "4", 3),
];

fn catalog_rows() -> Outcome {
    let rows = catalog::list_classes();
    if rows.len() != TABLE.len() {
        return Err(format!("{} rows", rows.len()));
    }
    for (r, (g, d, e)) in rows.iter().zip(TABLE) {
        if r.group_label != g || r.d.to_string() != d || r.e != e {
            return Err(format!("row {} has d = {}, e = {}; expected {g} {d} {e}", r.group_label, r.d, r.e));
        }
    }
    require(
        &catalog::catalog_suite(),
        &["rows", "tau_identity", "square_integrable_n2", "unequal_signature_rejected"],
    )?;
    let adm = catalog::validate_admissible(&FamilyDescriptor::Orthogonal { p: 3, q: 5 });
    if adm.admissible || adm.diagnostic.is_empty() {
        return Err("O(3,5) accepted".into());
    }
    Ok("11 rows verbatim, 4τ < dn − 1 at n = 2, O(3,5) rejected".into())
}

fn run_verify_all(json: &Path) -> Result<serde_json::Value, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_minrep"))
        .args(["verify", "all", "--model", "o2n2n", "--n", "2", "--samples", "20000", "--seed", "7"])
        .arg("--json")
        .arg(json)
        .output()
        .map_err(|e| e.to_string())?;
    // 20 000 samples can leave Monte Carlo checks inconclusive (exit 3);
    // a failure is still an error.
    if !matches!(out.status.code(), Some(0) | Some(3)) {
        return Err(format!(
            "exit {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let text = std::fs::read_to_string(json).map_err(|e| e.to_string())?;
    let mut v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let obj = v.as_object_mut().ok_or("report is not an object")?;
    obj.remove("timestamp");
    obj.insert("exit".into(), out.status.code().into());
    Ok(v)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = run_verify_all(&dir.path().join("a.json"))?;
    let b = run_verify_all(&dir.path().join("b.json"))?;
    if a != b {
        return Err("reports differ".into());
    }
    Ok("two runs of verify all agree".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("structural suite", structural),
        ("constant k = 1", constant_k),
        ("constant k' = 2", constant_k_prime),
        ("constant k'' = 2 - 2e", constant_k_double_prime),
        ("modular character", modular),
        ("bessel suite", bessel_suite),
        ("square integrability", square_integrability),
        ("measure scaling", measure_scaling),
        ("spherical cancellation", spherical),
        ("tensor audit", tensor_audit),
        ("catalog", catalog_rows),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match r {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} [{:.1?}]", i + 1, t.elapsed()),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} [{:.1?}]", i + 1, t.elapsed());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
