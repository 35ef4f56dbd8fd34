//! `hrlab` — command-line front end of the numerical laboratory.
//!
//! Subcommands mirror the library's result families:
//!
//! * `constants` — tabulate every closed-form optimal constant over a
//!   dimension range (CSV).
//! * `certify` — run a super-solution certificate job described by a JSON
//!   job file (JSON certificate out; exit 1 when the verdict is not
//!   `CertifiedNonnegative`).
//! * `rayleigh-sweep` — quotients of a minimizing family over a decreasing
//!   ε list, with the extrapolated limit as a CSV footer.
//! * `eig-estimate` — smallest eigenvalue of the discretized singular-weight
//!   pencil on a logarithmic radial mesh (CSV).
//! * `check-identities` — randomized integral-identity and inequality
//!   checks (CSV; exit 1 when any row fails).
//!
//! Flags and job files funnel into the same typed parameters, so a job file
//! and the equivalent invocation behave identically. Every run is
//! deterministic: the same inputs and seed produce byte-identical output,
//! and files are written atomically (temp + rename). Exit status: 0 =
//! success, 1 = computation finished but its scientific verdict is a
//! failure, 2 = no result (bad input or numerical failure), with a
//! machine-readable JSON report on stderr. The `HF_THREADS` environment
//! variable caps internal parallelism.

mod config;
mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use hrlab_core::constants::{self, ConstantResult, Placement};
use hrlab_core::geometry::Dimension;
use hrlab_core::identities::{run_check_batch, CheckTarget};
use hrlab_core::rayleigh::{sweep, CutoffSpec, FamilyKind, MinimizingFamily, SweepResult};
use hrlab_core::spectrum::{hardy_constant_estimate, RadialMesh};
use hrlab_core::supersolution::{
    certify_fall_local, certify_hardy, certify_rellich, default_fall_local_grid, Verdict,
};

use config::{
    family_from_name, family_name, schema_validate, CertifySpec, CommandKind, CommandParams,
    Violation, MAX_DIMENSION, SCHEMA_VERSION,
};
use output::{deliver, fmt_float, FailureReport, EXIT_SUCCESS, EXIT_VERDICT};

#[derive(Parser)]
#[command(
    name = "hrlab",
    version,
    about = "Numerical laboratory for sharp singular-weight integral inequalities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate every closed-form optimal constant for d in [d-min, d-max].
    Constants {
        #[arg(long = "d-min", default_value_t = 3)]
        d_min: u32,
        #[arg(long = "d-max", default_value_t = 10)]
        d_max: u32,
        /// Destination file (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the certificate job described by a JSON job file.
    Certify {
        /// Path of the job file; its "output" field names the destination.
        #[arg(long)]
        job: PathBuf,
    },
    /// Rayleigh quotients of a minimizing family over a decreasing ε list.
    RayleighSweep {
        /// One of: hardy-interior, half-space, hardy-rellich.
        #[arg(long)]
        family: String,
        #[arg(long)]
        d: u32,
        /// Strictly decreasing positive values, e.g. --eps 0.2,0.1,0.05.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        eps: Vec<f64>,
        /// Plateau radius of the radial cutoff.
        #[arg(long = "cutoff-R", default_value_t = 1.0)]
        cutoff_radius: f64,
        /// Destination file (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Smallest eigenvalue of the discretized singular-weight pencil.
    EigEstimate {
        #[arg(long)]
        d: u32,
        /// Mesh nodes (log-spaced, endpoints clamped).
        #[arg(long, default_value_t = 2048)]
        nodes: usize,
        /// Inner truncation radius.
        #[arg(long)]
        delta: f64,
        /// Outer domain radius.
        #[arg(long = "R")]
        outer_radius: f64,
        /// Destination file (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Randomized integral-identity and inequality checks.
    CheckIdentities {
        /// A check name, or "all" for every check defined in dimension d.
        #[arg(long, default_value = "all")]
        which: String,
        #[arg(long)]
        d: u32,
        /// Independent trials per check.
        #[arg(long, default_value_t = 50)]
        count: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Destination file (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() {
    hrlab_core::configure_thread_cap_from_env();
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(report) => report.emit(),
    };
    std::process::exit(code);
}

/// Translate flags into the same typed parameters a job file produces, then
/// hand off to the shared executor.
fn run(command: Command) -> Result<i32, FailureReport> {
    match command {
        Command::Constants { d_min, d_max, output } => {
            if !(2 <= d_min && d_min <= d_max && d_max <= MAX_DIMENSION) {
                return Err(FailureReport::Input(format!(
                    "dimension range must satisfy 2 <= d-min <= d-max <= {MAX_DIMENSION}, got [{d_min}, {d_max}]"
                )));
            }
            execute(CommandParams::Constants { d_min, d_max }, 0, output.as_deref())
        }
        Command::Certify { job } => {
            let raw = std::fs::read_to_string(&job).map_err(|e| {
                FailureReport::Io(format!("cannot read job file {}: {e}", job.display()))
            })?;
            let cfg = schema_validate(&raw).map_err(FailureReport::Schema)?;
            if cfg.command != CommandKind::Certify {
                return Err(FailureReport::Schema(vec![Violation::new(
                    "command",
                    format!(
                        "this invocation runs \"certify\" jobs, got \"{}\"",
                        cfg.command.name()
                    ),
                )]));
            }
            execute(cfg.params, cfg.seed, Some(Path::new(&cfg.output)))
        }
        Command::RayleighSweep { family, d, eps, cutoff_radius, output } => {
            let kind = family_from_name(&family).ok_or_else(|| {
                FailureReport::Input(format!(
                    "unknown family {family:?}; expected one of \"hardy-interior\", \"half-space\", \"hardy-rellich\""
                ))
            })?;
            execute(
                CommandParams::RayleighSweep {
                    family: kind,
                    d: dimension(d)?,
                    eps,
                    cutoff_radius,
                },
                0,
                output.as_deref(),
            )
        }
        Command::EigEstimate { d, nodes, delta, outer_radius, output } => execute(
            CommandParams::EigEstimate { d: dimension(d)?, nodes, delta, outer_radius },
            0,
            output.as_deref(),
        ),
        Command::CheckIdentities { which, d, count, seed, output } => {
            let which = if which == "all" {
                None
            } else {
                Some(CheckTarget::from_name(&which).ok_or_else(|| {
                    let names = CheckTarget::ALL.map(|t| t.name()).join(", ");
                    FailureReport::Input(format!(
                        "unknown check {which:?}; expected \"all\" or one of: {names}"
                    ))
                })?)
            };
            execute(
                CommandParams::CheckIdentities { which, d: dimension(d)?, count },
                seed,
                output.as_deref(),
            )
        }
    }
}

/// Run one validated job. `out = None` writes to stdout.
fn execute(params: CommandParams, seed: u64, out: Option<&Path>) -> Result<i32, FailureReport> {
    match params {
        CommandParams::Constants { d_min, d_max } => run_constants(d_min, d_max, out),
        CommandParams::Certify(spec) => run_certify(*spec, seed, out),
        CommandParams::RayleighSweep { family, d, eps, cutoff_radius } => {
            run_rayleigh_sweep(family, d, &eps, cutoff_radius, out)
        }
        CommandParams::EigEstimate { d, nodes, delta, outer_radius } => {
            run_eig_estimate(d, nodes, delta, outer_radius, out)
        }
        CommandParams::CheckIdentities { which, d, count } => {
            run_check_identities(which, d, count, seed, out)
        }
    }
}

fn write_out(target: Option<&Path>, content: &str) -> Result<(), FailureReport> {
    deliver(target, content).map_err(|e| {
        let dest = target.map_or_else(|| "stdout".to_string(), |p| p.display().to_string());
        FailureReport::Io(format!("cannot write {dest}: {e}"))
    })
}

fn dimension(d: u32) -> Result<Dimension, FailureReport> {
    if d > MAX_DIMENSION {
        return Err(FailureReport::Input(format!(
            "dimension must not exceed {MAX_DIMENSION}, got {d}"
        )));
    }
    Dimension::new(d).map_err(FailureReport::from_core)
}

fn constants_row(csv: &mut String, c: &ConstantResult, d: u32, n: Option<usize>) {
    let n_col = n.map(|v| v.to_string()).unwrap_or_default();
    csv.push_str(&format!(
        "{},{},{},{},{},{}\n",
        c.setting,
        d,
        n_col,
        fmt_float(c.value),
        c.exact,
        c.attained_claim
    ));
}

fn run_constants(d_min: u32, d_max: u32, out: Option<&Path>) -> Result<i32, FailureReport> {
    let mut csv = String::from("setting,d,n,value,exact,attained\n");
    for raw_d in d_min..=d_max {
        let d = dimension(raw_d)?;
        // Each setting appears exactly for the dimensions it is defined in.
        if raw_d >= 3 {
            let c = constants::hardy_interior_constant(d).map_err(FailureReport::from_core)?;
            constants_row(&mut csv, &c, raw_d, None);
        }
        let c = constants::hardy_boundary_constant(d).map_err(FailureReport::from_core)?;
        constants_row(&mut csv, &c, raw_d, None);
        if raw_d >= 5 {
            let c = constants::rellich_constant(d).map_err(FailureReport::from_core)?;
            constants_row(&mut csv, &c, raw_d, None);
        }
        if raw_d >= 3 {
            let c = constants::hardy_rellich_constant(d).map_err(FailureReport::from_core)?;
            constants_row(&mut csv, &c, raw_d, None);
        }
        for n in 2..=6 {
            if raw_d >= 3 {
                let c = constants::multipolar_constant(d, n, Placement::InteriorWholeSpace)
                    .map_err(FailureReport::from_core)?;
                constants_row(&mut csv, &c, raw_d, Some(n));
            }
            let c = constants::multipolar_constant(d, n, Placement::BoundaryBallOrHalfSpace)
                .map_err(FailureReport::from_core)?;
            constants_row(&mut csv, &c, raw_d, Some(n));
        }
    }
    write_out(out, &csv)?;
    Ok(EXIT_SUCCESS)
}

fn run_certify(spec: CertifySpec, seed: u64, out: Option<&Path>) -> Result<i32, FailureReport> {
    let kind_name = spec.kind_name();
    let d = spec.dimension();
    let certificate = match spec {
        CertifySpec::Hardy { d, potential, ansatz, domain, grid } => {
            certify_hardy(&potential, &ansatz, &domain, d, &grid)
        }
        CertifySpec::Rellich { d, potential, ansatz, grid } => {
            certify_rellich(&potential, &ansatz, d, &grid)
        }
        CertifySpec::FallLocal { d, r, grid } => {
            let grid = match grid {
                Some(grid) => grid,
                None => default_fall_local_grid(r).map_err(FailureReport::from_core)?,
            };
            certify_fall_local(d, r, &grid)
        }
    }
    .map_err(FailureReport::from_core)?;

    let certified = certificate.verdict == Verdict::CertifiedNonnegative;
    let doc = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "command": "certify",
        "kind": kind_name,
        "d": d.get(),
        "seed": seed,
        "certificate": certificate,
    });
    let mut content =
        serde_json::to_string_pretty(&doc).expect("certificate reports serialize cleanly");
    content.push('\n');
    write_out(out, &content)?;
    Ok(if certified { EXIT_SUCCESS } else { EXIT_VERDICT })
}

fn sweep_csv(family: FamilyKind, d: Dimension, result: &SweepResult) -> String {
    let mut csv = String::from("family,d,epsilon,numerator,denominator,quotient,relative_error\n");
    for report in &result.reports {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            family_name(family),
            d,
            fmt_float(report.epsilon),
            fmt_float(report.numerator.value),
            fmt_float(report.denominator.value),
            fmt_float(report.quotient),
            fmt_float(report.relative_error()),
        ));
    }
    csv.push_str(&format!("# extrapolated_limit = {}\n", fmt_float(result.extrapolated_limit)));
    csv.push_str(&format!("# monotone = {}\n", result.monotone));
    csv
}

fn run_rayleigh_sweep(
    family: FamilyKind,
    d: Dimension,
    eps: &[f64],
    cutoff_radius: f64,
    out: Option<&Path>,
) -> Result<i32, FailureReport> {
    let cutoff = CutoffSpec::SmoothBump { radius: cutoff_radius };
    let fam = MinimizingFamily::new(family, d, cutoff).map_err(FailureReport::from_core)?;
    let result = sweep(&fam, eps).map_err(FailureReport::from_core)?;
    write_out(out, &sweep_csv(family, d, &result))?;
    Ok(EXIT_SUCCESS)
}

fn run_eig_estimate(
    d: Dimension,
    nodes: usize,
    delta: f64,
    outer_radius: f64,
    out: Option<&Path>,
) -> Result<i32, FailureReport> {
    let mesh = RadialMesh::log(delta, outer_radius, nodes).map_err(FailureReport::from_core)?;
    let estimate = hardy_constant_estimate(d, &mesh).map_err(FailureReport::from_core)?;
    let csv = format!(
        "d,nodes,delta,estimate,residual\n{},{},{},{},{}\n",
        d,
        nodes,
        fmt_float(delta),
        fmt_float(estimate.value),
        fmt_float(estimate.residual_norm),
    );
    write_out(out, &csv)?;
    Ok(EXIT_SUCCESS)
}

fn run_check_identities(
    which: Option<CheckTarget>,
    d: Dimension,
    count: u32,
    seed: u64,
    out: Option<&Path>,
) -> Result<i32, FailureReport> {
    let targets: Vec<CheckTarget> = match which {
        // "all" means every check defined in this dimension.
        None => CheckTarget::ALL.iter().copied().filter(|t| d.get() >= t.min_dimension()).collect(),
        Some(target) => {
            if d.get() < target.min_dimension() {
                return Err(FailureReport::Input(format!(
                    "check \"{}\" requires d >= {}, got {}",
                    target.name(),
                    target.min_dimension(),
                    d
                )));
            }
            vec![target]
        }
    };
    if count == 0 {
        return Err(FailureReport::Input("count must be at least 1".into()));
    }

    let mut csv = String::from("identity,seed_index,lhs,rhs,gap_or_margin,tolerance,pass\n");
    let mut all_pass = true;
    for target in targets {
        let outcomes = run_check_batch(target, d, count, seed).map_err(FailureReport::from_core)?;
        for outcome in outcomes {
            all_pass &= outcome.report.pass;
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                target.name(),
                outcome.index,
                fmt_float(outcome.report.lhs),
                fmt_float(outcome.report.rhs),
                fmt_float(outcome.report.gap_or_margin),
                fmt_float(outcome.report.tolerance),
                outcome.report.pass,
            ));
        }
    }
    write_out(out, &csv)?;
    Ok(if all_pass { EXIT_SUCCESS } else { EXIT_VERDICT })
}
