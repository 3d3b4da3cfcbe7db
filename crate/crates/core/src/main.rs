use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use biham_euler_so4::dynamics::{self, Invariants};
use biham_euler_so4::leaf::{self, LeafChart};
use biham_euler_so4::so4::ModelParams;
use biham_euler_so4::verify::{self, Overrides};
use biham_euler_so4::xxz::{self, Mutation, XxzModel};
use biham_euler_so4::{Chart, PhasePoint, C};

/// Exit status for input or guard errors.
const EXIT_USAGE: u8 = 2;
/// Exit status for failed checks or nonfinite results.
const EXIT_FAILURE: u8 = 1;

#[derive(Parser)]
#[command(
    name = "biham-euler-so4",
    version,
    about = "Bi-Hamiltonian verification and dynamics of the SO(4) Euler top"
)]
struct Cli {
    /// Worker threads for the verification suite.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every identity check and write a JSON report.
    Verify(VerifyArgs),
    /// Integrate the Euler flow with RK4 and write a CSV trajectory.
    Integrate(IntegrateArgs),
    /// Evaluate Darboux-Nijenhuis coordinates on a leaf.
    Dn(DnArgs),
    /// Evaluate both separation relations at a uv point.
    Separation(SeparationArgs),
}

#[derive(Args)]
struct MuArg {
    /// mu1,mu2,mu3[,mu4]; mu4 defaults to mu3.
    #[arg(long, allow_hyphen_values = true)]
    mu: String,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    mu: MuArg,
    /// Points per check (overrides every default).
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output path of the JSON report.
    #[arg(long)]
    report: PathBuf,
    /// Multiplier applied to every tolerance.
    #[arg(long)]
    tol_scale: Option<f64>,
    /// Build with one sign deliberately flipped (q-wedge-sign,
    /// h2-last-term-sign, nijenhuis-entry-sign).
    #[arg(long)]
    mutation: Option<String>,
}

#[derive(Args)]
struct IntegrateArgs {
    #[command(flatten)]
    mu: MuArg,
    /// m12,m13,m14,m23,m24,m34.
    #[arg(long, allow_hyphen_values = true)]
    m0: String,
    #[arg(long, default_value_t = dynamics::DEFAULT_DT, allow_hyphen_values = true)]
    dt: f64,
    #[arg(long, default_value_t = dynamics::DEFAULT_T_END, allow_hyphen_values = true)]
    t_end: f64,
    #[arg(long, default_value_t = dynamics::DEFAULT_RECORD_EVERY)]
    every: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DnArgs {
    #[command(flatten)]
    mu: MuArg,
    /// u1re,u1im,z1re,z1im,u2re,u2im,z2re,z2im.
    #[arg(long, allow_hyphen_values = true)]
    leaf: String,
    /// re,im
    #[arg(long, allow_hyphen_values = true)]
    h0: String,
    /// re,im
    #[arg(long, allow_hyphen_values = true)]
    c2: String,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SeparationArgs {
    #[command(flatten)]
    mu: MuArg,
    /// Six complex coordinates (u1,v1,z1,u2,v2,z2) as twelve re,im reals.
    #[arg(long, allow_hyphen_values = true)]
    uv: String,
}

/// Error carrying its exit status.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl ToString) -> Self {
        Failure {
            code: EXIT_USAGE,
            msg: msg.to_string(),
        }
    }

    fn failed(msg: impl ToString) -> Self {
        Failure {
            code: EXIT_FAILURE,
            msg: msg.to_string(),
        }
    }
}

impl From<biham_euler_so4::Error> for Failure {
    fn from(e: biham_euler_so4::Error) -> Self {
        Failure::usage(e)
    }
}

type CliResult = std::result::Result<(), Failure>;

fn parse_list(s: &str, what: &str) -> std::result::Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Failure::usage(format!("invalid number {t:?} in --{what}")))
        })
        .collect()
}

fn parse_exact(s: &str, what: &str, n: usize) -> std::result::Result<Vec<f64>, Failure> {
    let v = parse_list(s, what)?;
    if v.len() != n {
        return Err(Failure::usage(format!(
            "--{what} expects {n} comma-separated reals, got {}",
            v.len()
        )));
    }
    Ok(v)
}

fn parse_complex(s: &str, what: &str) -> std::result::Result<Vec<C>, Failure> {
    let v = parse_list(s, what)?;
    if v.len() % 2 != 0 {
        return Err(Failure::usage(format!("--{what} expects re,im pairs")));
    }
    Ok(v.chunks(2).map(|p| C::new(p[0], p[1])).collect())
}

fn parse_mu(s: &str) -> std::result::Result<ModelParams, Failure> {
    let v = parse_list(s, "mu")?;
    let p = match v.as_slice() {
        [a, b, c] => ModelParams::symmetric(*a, *b, *c)?,
        [a, b, c, d] => ModelParams::new([*a, *b, *c, *d])?,
        _ => return Err(Failure::usage("--mu expects 3 or 4 comma-separated reals")),
    };
    verify::validate_params(&p)?;
    Ok(p)
}

fn parse_model(s: &str) -> std::result::Result<XxzModel, Failure> {
    let p = parse_mu(s)?;
    Ok(XxzModel::from_params(&p)?)
}

fn fmt_c(z: C) -> String {
    format!("{:+.16e} {:+.16e}i", z.re, z.im)
}

fn cmd_verify(a: &VerifyArgs, threads: Option<usize>) -> CliResult {
    let params = parse_mu(&a.mu.mu)?;
    if a.points == Some(0) {
        return Err(Failure::usage("--points must be at least 1"));
    }
    if let Some(t) = a.tol_scale {
        if !(t.is_finite() && t > 0.0) {
            return Err(Failure::usage("--tol-scale must be a positive number"));
        }
    }
    let mutation = a.mutation.as_deref().map(Mutation::parse).transpose()?;
    let ov = Overrides {
        n_points: a.points,
        tol_scale: a.tol_scale,
        mutation,
        threads,
    };
    let report = verify::run_suite(&params, a.seed, &ov)?;
    print!("{}", report.summary_table());
    let json = serde_json::to_string_pretty(&report).map_err(Failure::failed)?;
    std::fs::write(&a.report, json + "\n")
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", a.report.display())))?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::failed("verification failed"))
    }
}

fn cmd_integrate(a: &IntegrateArgs) -> CliResult {
    let params = parse_mu(&a.mu.mu)?;
    let m0v = parse_exact(&a.m0, "m0", 6)?;
    let m0: dynamics::State = std::array::from_fn(|i| m0v[i]);
    let traj = dynamics::integrate(&params, &m0, a.dt, a.t_end, a.every)?;
    let file = File::create(&a.out)
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", a.out.display())))?;
    let mut w = BufWriter::new(file);
    let io = |e: std::io::Error| Failure::failed(e);
    writeln!(w, "t,m12,m13,m14,m23,m24,m34,H0,C,HE,KE,zeta1").map_err(io)?;
    for ((t, m), inv) in traj.times.iter().zip(&traj.states).zip(&traj.invariants) {
        let row: Vec<String> = std::iter::once(*t)
            .chain(m.iter().copied())
            .chain(inv.as_array())
            .map(|x| format!("{x:?}"))
            .collect();
        writeln!(w, "{}", row.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)?;
    println!("samples: {}", traj.times.len());
    let d = traj.drift.as_array();
    let parts: Vec<String> = Invariants::NAMES
        .iter()
        .zip(d)
        .map(|(n, v)| format!("{n}={v:.3e}"))
        .collect();
    if traj.aborted {
        println!(
            "aborted: nonfinite state; max relative drift {}",
            parts.join(" ")
        );
        return Err(Failure::failed("integration aborted on a nonfinite state"));
    }
    println!("max relative drift {}", parts.join(" "));
    Ok(())
}

#[derive(Serialize)]
struct DnOutput {
    mu: [f64; 4],
    leaf: [C; 4],
    h0: C,
    c2: C,
    chart: leaf::DnChart,
    lambda1: C,
    p_bracket_residual: Vec<Vec<f64>>,
    q_bracket_residual: Vec<Vec<f64>>,
}

fn cmd_dn(a: &DnArgs) -> CliResult {
    let model = parse_model(&a.mu.mu)?;
    let y = parse_complex(&a.leaf, "leaf")?;
    if y.len() != 4 {
        return Err(Failure::usage(
            "--leaf expects 8 reals (4 complex coordinates)",
        ));
    }
    let one = |s: &str, what: &str| -> std::result::Result<C, Failure> {
        match parse_complex(s, what)?.as_slice() {
            [z] => Ok(*z),
            _ => Err(Failure::usage(format!("--{what} expects re,im"))),
        }
    };
    let (h0, c2) = (one(&a.h0, "h0")?, one(&a.c2, "c2")?);
    let lc = LeafChart::new([y[0], y[1], y[2], y[3]], h0, c2)?;
    let chart = leaf::dn_chart(&model, &lc)?;
    let n = leaf::nijenhuis(&model, &lc)?;
    let [(bp, _), (bq, _)] = leaf::dn_brackets(&model, &lc)?;
    let unit = C::new(1.0, 0.0);
    let rp = bp - leaf::canonical_form(unit, unit);
    let rq = bq - leaf::canonical_form(n.lambda1, n.lambda2);
    let rows = |m: &nalgebra::DMatrix<C>| -> Vec<Vec<f64>> {
        (0..4)
            .map(|i| (0..4).map(|j| m[(i, j)].norm()).collect())
            .collect()
    };
    let out = DnOutput {
        mu: model.params().mu(),
        leaf: lc.coords,
        h0,
        c2,
        chart,
        lambda1: n.lambda1,
        p_bracket_residual: rows(&rp),
        q_bracket_residual: rows(&rq),
    };
    if a.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&out).map_err(Failure::failed)?
        );
    } else {
        println!("zeta1   = {}", fmt_c(chart.zeta1));
        println!("xi1     = {}", fmt_c(chart.xi1));
        println!("lambda2 = {}", fmt_c(chart.lambda2));
        println!("xi2     = {}", fmt_c(chart.xi2));
        for (title, m) in [
            ("P", &out.p_bracket_residual),
            ("Q", &out.q_bracket_residual),
        ] {
            println!("{title} bracket residual (zeta1, xi1, lambda2, xi2):");
            for r in m {
                let cells: Vec<String> = r.iter().map(|x| format!("{x:10.3e}")).collect();
                println!("  {}", cells.join(" "));
            }
        }
    }
    let worst = out
        .p_bracket_residual
        .iter()
        .chain(&out.q_bracket_residual)
        .flatten()
        .fold(0.0f64, |a, &b| a.max(b));
    if !worst.is_finite() {
        return Err(Failure::failed("nonfinite bracket residual"));
    }
    Ok(())
}

fn cmd_separation(a: &SeparationArgs) -> CliResult {
    let model = parse_model(&a.mu.mu)?;
    let x = parse_complex(&a.uv, "uv")?;
    if x.len() != 6 {
        return Err(Failure::usage(
            "--uv expects 12 reals (6 complex coordinates)",
        ));
    }
    let pt = PhasePoint::new(Chart::Uv, x)?;
    xxz::check_uv_domain(&pt)?;
    let p1 = leaf::phi1(&model, &pt)?;
    let p2 = match leaf::phi2(&model, &pt) {
        Ok(r) => Some(r),
        // Phi2 needs the separation chart; Phi1 stays meaningful without it.
        Err(e @ biham_euler_so4::Error::SeparationChartDegenerate(_)) => {
            println!("Phi2: not evaluated ({e})");
            None
        }
        Err(e) => return Err(e.into()),
    };
    for (name, r) in std::iter::once(("Phi1", p1)).chain(p2.map(|r| ("Phi2", r))) {
        println!(
            "{name}: raw {:.3e}  scale {:.3e}  normalized {:.3e}",
            r.abs,
            r.scale,
            r.normalized()
        );
        if !r.normalized().is_finite() {
            return Err(Failure::failed(format!("{name} is not finite")));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Command::Verify(a) => cmd_verify(a, cli.threads),
        Command::Integrate(a) => cmd_integrate(a),
        Command::Dn(a) => cmd_dn(a),
        Command::Separation(a) => cmd_separation(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
