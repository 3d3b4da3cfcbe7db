//! Acceptance criteria 1-10. Each criterion prints one PASS/FAIL line; the
//! process exits nonzero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use biham_euler_so4::dynamics::{integrate, State};
use biham_euler_so4::so4::ModelParams;
use biham_euler_so4::verify::{
    run_selected, run_suite, CheckStatus, Overrides, VerificationReport,
};
use biham_euler_so4::xxz::{self, Mutation};
use biham_euler_so4::{Chart, PhasePoint, C};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 42;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn sym() -> ModelParams {
    ModelParams::symmetric(1.0, 2.0, 3.0).unwrap()
}

/// Runs `names` with default point counts and checks each against its
/// registered tolerance and the expected point count.
fn suite_criterion(names: &[(&str, usize)], budget: Option<Duration>) -> Outcome {
    let start = Instant::now();
    let report = run_selected(&sym(), SEED, &Overrides::default(), |n| {
        names.iter().any(|(m, _)| *m == n)
    })
    .unwrap();
    let elapsed = start.elapsed();
    let mut pass = budget.is_none_or(|b| elapsed < b);
    let mut parts = Vec::new();
    for (name, n) in names {
        let c = report.check(name).unwrap();
        let ok = c.status == CheckStatus::Pass && c.n_evaluated >= *n;
        pass &= ok;
        parts.push(format!(
            "{name}={} (tol {:.0e}, n={})",
            c.max_residual.map_or("none".into(), |r| format!("{r:.2e}")),
            c.tolerance,
            c.n_evaluated
        ));
    }
    parts.push(format!("{:.2}s", elapsed.as_secs_f64()));
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

fn criterion_1() -> Outcome {
    suite_criterion(
        &[
            ("jacobi.p1_m", 50),
            ("jacobi.p2_m", 50),
            ("compat.p1_p2_m", 50),
            ("pencil.p1_p2_m", 50),
            ("jacobi.uv", 50),
            ("jacobi.q", 50),
            ("compat.p1_q", 50),
        ],
        Some(Duration::from_secs(5)),
    )
}

fn criterion_2() -> Outcome {
    suite_criterion(&[("lenard.chain_m", 50)], Some(Duration::from_secs(1)))
}

fn criterion_3() -> Outcome {
    suite_criterion(&[("charpoly.identity", 100)], Some(Duration::from_secs(1)))
}

fn criterion_4() -> Outcome {
    suite_criterion(
        &[
            ("transversality.i", 50),
            ("transversality.ii", 50),
            ("stackel.second_lie_derivative", 50),
        ],
        None,
    )
}

fn criterion_5() -> Outcome {
    suite_criterion(
        &[
            ("nijenhuis.closed_form", 50),
            ("nijenhuis.spectrum", 50),
            ("dn.canonical_p", 50),
            ("dn.canonical_q", 50),
            ("dn.eigenforms", 50),
        ],
        None,
    )
}

fn criterion_6() -> Outcome {
    suite_criterion(
        &[
            ("deformation.factorization", 50),
            ("deformation.termination", 50),
            ("deformation.xi2_agreement", 50),
        ],
        None,
    )
}

fn criterion_7() -> Outcome {
    let mut out = suite_criterion(&[("separation.phi1", 103), ("separation.phi2", 100)], None);
    // The three worked points, with their Hamiltonian values.
    let model = xxz::XxzModel::new(1.0, 2.0, 3.0).unwrap();
    let o = xxz::uv_observables(&model);
    for (x, h) in [
        ([1.0, 1.0, 0.0, 1.0, 1.0, 0.0], [2.0, -16.0, 30.0]),
        ([0.0, 0.0, 1.0, 0.0, 0.0, 1.0], [2.0, -12.0, 18.0]),
        ([0.0, 0.0, 1.0, 0.0, 0.0, 0.0], [1.0, -2.0, -13.0]),
    ] {
        let pt = PhasePoint::from_real(Chart::Uv, &x).unwrap();
        let got = [&o.h0, &o.h1, &o.h2].map(|f| f.eval(&pt).unwrap());
        let ok = got
            .iter()
            .zip(h)
            .all(|(g, w)| (g - C::new(w, 0.0)).norm() < 1e-13);
        out.pass &= ok;
    }
    out.detail.push_str(", worked H values match");
    out
}

fn seeded_m0(n: usize) -> Vec<State> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..n)
        .map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..=1.0)))
        .collect()
}

fn criterion_8() -> Outcome {
    let p = ModelParams::symmetric(10.0, 1.0, 2.0).unwrap();
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
    for m0 in seeded_m0(5) {
        let t = integrate(&p, &m0, 1e-3, 10.0, 100).unwrap();
        let h = integrate(&p, &m0, 5e-4, 10.0, 100).unwrap();
        worst = worst.max(t.drift.max());
        let ratio = t.drift.he / h.drift.he;
        rmin = rmin.min(ratio);
        rmax = rmax.max(ratio);
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: worst <= 1e-8 && rmin >= 11.0 && rmax <= 22.0 && elapsed < Duration::from_secs(10),
        detail: format!(
            "max drift {worst:.2e} (tol 1e-8), HE ratio dt/(dt/2) in [{rmin:.2}, {rmax:.2}] (want [11, 22]), {:.2}s",
            elapsed.as_secs_f64()
        ),
    }
}

fn worst_non_diagnostic(r: &VerificationReport) -> f64 {
    r.checks
        .iter()
        .filter(|c| !c.diagnostic && c.status != CheckStatus::Skipped)
        .map(|c| c.max_residual.unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for m in Mutation::ALL {
        let ov = Overrides {
            mutation: Some(m),
            ..Default::default()
        };
        let r = run_suite(&sym(), SEED, &ov).unwrap();
        let w = worst_non_diagnostic(&r);
        let failing = r
            .checks
            .iter()
            .filter(|c| !c.diagnostic && c.status == CheckStatus::Fail)
            .count();
        pass &= w > 1e-3 && !r.passed();
        parts.push(format!("{}: worst {w:.2e}, {failing} failing", m.name()));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(10);
    parts.push(format!("{:.2}s", elapsed.as_secs_f64()));
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_biham-euler-so4"))
        .args([
            "verify", "--mu", "1,2,3", "--points", "100", "--seed", "42", "--report",
        ])
        .arg(&report)
        .output()
        .unwrap();
    let elapsed = start.elapsed();
    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../../../docs/report.schema.json")).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).unwrap();
    let instance: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap_or_default())
            .unwrap_or_default();
    let valid = compiled.is_valid(&instance);
    let code = out.status.code();
    Outcome {
        pass: code == Some(0) && valid && elapsed < Duration::from_secs(60),
        detail: format!(
            "exit {code:?}, schema valid {valid}, overall {}, {:.2}s",
            instance["overall"],
            elapsed.as_secs_f64()
        ),
    }
}

fn main() -> std::process::ExitCode {
    let criteria: [Criterion; 10] = [
        ("structural identities", criterion_1),
        ("Lenard chain", criterion_2),
        ("characteristic polynomial", criterion_3),
        ("transversality and Stackel", criterion_4),
        ("Nijenhuis and DN coordinates", criterion_5),
        ("deformation pipeline", criterion_6),
        ("separation relations", criterion_7),
        ("dynamics drift and order", criterion_8),
        ("mutation sensitivity", criterion_9),
        ("end-to-end CLI", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (title, f)) in criteria.iter().enumerate() {
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {title}: {}", i + 1, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria passed");
        std::process::ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
