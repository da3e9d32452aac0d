//! Batch driver for the height zeta pipelines.
//!
//! `motivic run <config>` assembles a pipeline from a JSON config and prints
//! its moduli classes, stable value, and certificates, optionally writing a
//! JSON report and a CSV decay table and cross-checking specializations
//! against literal section counts. `motivic oracle ...` runs the
//! finite-field oracles standalone. Output distinguishes three trust
//! levels: exact ring identities, certified weight bounds, and
//! floating-point diagnostics. The exit code is nonzero when any certified
//! check or oracle comparison fails.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use fqoracle::sb::poisson_check;
use motivic::heightzeta::{Pipeline, RunReport};
use motivic_cli::{
    euler_factor_agrees, load_instance, random_poisson_problem, random_tame_factor,
    sections_cross_check, structured_poisson_problems, CliError,
};

#[derive(Parser)]
#[command(name = "motivic", version, about = "Height-graded section counts over function fields, with finite-field cross-checks")]
struct Cli {
    /// Run on the sequential fallback even when built with rayon support.
    #[arg(long, global = true)]
    seq: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Assemble a pipeline from a JSON config and report its invariants.
    Run(RunArgs),
    /// Literal finite-field computations, independent of the symbolic route.
    #[command(subcommand)]
    Oracle(OracleCmd),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON config.
    config: PathBuf,
    /// Override the config's height bound.
    #[arg(long)]
    bound: Option<u64>,
    /// Write the full JSON report to this path.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the decay table to this path as CSV.
    #[arg(long)]
    decay: Option<PathBuf>,
    /// Cross-check specialized moduli classes against literal section
    /// counts at these primes (comma separated).
    #[arg(long, value_delimiter = ',')]
    oracle: Vec<u64>,
    /// Largest height to cross-check per prime.
    #[arg(long, default_value_t = 3)]
    oracle_max: u32,
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Symbolic Euler products of random tame local factors versus the
    /// literal product over closed points.
    Euler {
        #[arg(long, default_value_t = 20)]
        count: u32,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_values_t = vec![2, 3])]
        q: Vec<u64>,
        #[arg(long, default_value_t = 5)]
        degree: u64,
    },
    /// Literal section counts for the model declared in a config.
    Sections {
        config: PathBuf,
        #[arg(long, default_value_t = 2)]
        q: u64,
        #[arg(long, default_value_t = 3)]
        max: u32,
    },
    /// Exact Poisson summation for structured and random product test
    /// functions.
    Poisson {
        #[arg(long, value_delimiter = ',', default_values_t = vec![2, 3])]
        q: Vec<u64>,
        #[arg(long, default_value_t = 20)]
        random: u32,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.seq {
        motivic::exec::set_parallel(false);
    }
    match dispatch(&cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: &Cmd) -> Result<bool, CliError> {
    match cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Oracle(OracleCmd::Euler {
            count,
            seed,
            q,
            degree,
        }) => cmd_euler(*count, *seed, q, *degree),
        Cmd::Oracle(OracleCmd::Sections { config, q, max }) => cmd_sections(config, *q, *max),
        Cmd::Oracle(OracleCmd::Poisson { q, random, seed }) => cmd_poisson(q, *random, *seed),
    }
}

fn cmd_run(args: &RunArgs) -> Result<bool, CliError> {
    let instance = load_instance(&args.config, args.bound)?;
    let pipe = Pipeline::new(instance)?;
    let report = pipe.report()?;
    print_report(&report);

    let mut ok = report.rate_ok;
    if let Some(h) = &report.h_component {
        ok &= h.support_ok && h.bounds_hold;
    }
    for &q in &args.oracle {
        println!();
        println!("oracle cross-check at q = {q} (literal enumeration):");
        for row in sections_cross_check(&pipe, q, args.oracle_max)? {
            let verdict = match (&row.literal, row.agree) {
                (Some(lit), Some(true)) => format!("{lit}  ok"),
                (Some(lit), _) => {
                    ok = false;
                    format!("{lit}  MISMATCH (symbolic {})", row.symbolic)
                }
                _ => "skipped (enumeration budget)".to_owned(),
            };
            println!("  height {:>2}: {verdict}", row.height);
        }
    }

    if let Some(path) = &args.report {
        std::fs::write(path, serde_json::to_string_pretty(&report)? + "\n")?;
        println!();
        println!("report written to {}", path.display());
    }
    if let Some(path) = &args.decay {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["height_degree", "observed_weight", "certified_ceiling"])?;
        for row in &report.decay {
            w.write_record([
                row.degree.to_string(),
                row.observed.map(|v| v.to_string()).unwrap_or_default(),
                row.hypothesis_ceiling.clone(),
            ])?;
        }
        w.flush()?;
        println!("decay table written to {}", path.display());
    }
    Ok(ok)
}

fn print_report(report: &RunReport) {
    println!(
        "pipeline `{}`: genus {}, fibre dimension {}, height bound {}",
        report.name, report.genus, report.dim, report.bound
    );
    println!();
    println!("exact symbolic values:");
    for entry in &report.moduli {
        println!(
            "  height {:>3}  moduli class {}",
            entry.height, entry.class
        );
    }
    println!(
        "  stable value ({}): {}{}",
        report.limit.kind,
        report.limit.value,
        report
            .limit
            .weight_floor
            .map(|f| format!("  [terms below weight {f} dropped]"))
            .unwrap_or_default()
    );
    if let Some(d) = report.exact_from {
        println!("  normalized classes equal the stable value from height {d} on");
    }
    println!();
    println!("certified bounds:");
    println!(
        "  local factor certificate: cut {}, delta {}, rate {}",
        report.local_certificate.cut,
        report.local_certificate.delta,
        report.local_certificate.delta_prime
    );
    for (i, c) in report.place_certificates.iter().enumerate() {
        println!(
            "  place certificate #{i}: cut {}, delta {}, rate {}",
            c.cut, c.delta, c.delta_prime
        );
    }
    println!(
        "  combined certificate: delta {}, rate {}",
        report.combined_certificate.delta, report.combined_certificate.delta_prime
    );
    println!(
        "  decay staircase at rate {}: {}",
        report.rate,
        if report.rate_ok { "ok" } else { "FAILED" }
    );
    if let Some(h) = &report.h_component {
        println!(
            "  correction support (max degree {:?}): {}; weight bounds at delta {}: {}",
            h.max_correction_degree,
            if h.support_ok { "ok" } else { "FAILED" },
            h.delta,
            if h.bounds_hold { "ok" } else { "FAILED" }
        );
    }
    println!();
    println!("empirical diagnostics (floating point, not certified):");
    match report.slope_hint {
        Some(s) => println!("  least-squares decay slope: {s:.4}"),
        None => println!("  least-squares decay slope: not defined (fewer than two observed rows)"),
    }
    println!();
    println!("note: {}", report.scope_note);
}

fn cmd_euler(count: u32, seed: u64, qs: &[u64], degree: u64) -> Result<bool, CliError> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut ok = true;
    println!(
        "euler oracle: {count} random tame factors, degrees <= {degree}, primes {qs:?}, seed {seed}"
    );
    for i in 0..count {
        let factor = random_tame_factor(&mut rng, degree)?;
        let agrees = euler_factor_agrees(&factor, qs, degree)?;
        ok &= agrees;
        println!(
            "  factor #{i:>2} ({} nonzero coefficients): {}",
            factor.num_nonzero(),
            if agrees { "ok" } else { "MISMATCH" }
        );
    }
    Ok(ok)
}

fn cmd_sections(config: &PathBuf, q: u64, max: u32) -> Result<bool, CliError> {
    let instance = load_instance(config, None)?;
    let pipe = Pipeline::new(instance)?;
    let mut ok = true;
    println!("section counts at q = {q}:");
    for row in sections_cross_check(&pipe, q, max)? {
        let verdict = match (&row.literal, row.agree) {
            (Some(lit), Some(true)) => format!("literal {lit}, symbolic agree"),
            (Some(lit), _) => {
                ok = false;
                format!("literal {lit}, symbolic {} MISMATCH", row.symbolic)
            }
            _ => "skipped (enumeration budget)".to_owned(),
        };
        println!("  height {:>2}: {verdict}", row.height);
    }
    Ok(ok)
}

fn cmd_poisson(qs: &[u64], random: u32, seed: u64) -> Result<bool, CliError> {
    let mut ok = true;
    for &q in qs {
        println!("poisson check at q = {q}:");
        for (i, problem) in structured_poisson_problems(q).iter().enumerate() {
            let report = poisson_check(problem)?;
            ok &= report.equal;
            println!(
                "  structured #{i:>2} (dim {}, {} places): lhs {}, {}",
                problem.dim,
                problem.places.len(),
                report.lhs,
                if report.equal { "ok" } else { "MISMATCH" }
            );
        }
        let mut rng = StdRng::seed_from_u64(seed ^ q);
        for i in 0..random {
            let dim = rng.gen_range(1..=2);
            let problem = random_poisson_problem(&mut rng, q, dim);
            let report = poisson_check(&problem)?;
            ok &= report.equal;
            println!(
                "  random     #{i:>2} (dim {}, {} places): lhs {}, {}",
                problem.dim,
                problem.places.len(),
                report.lhs,
                if report.equal { "ok" } else { "MISMATCH" }
            );
        }
    }
    Ok(ok)
}
