use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use siegel_cli::commands::{self, ThetaSpec, TRANSFORM_MIN_IMAG};
use siegel_cli::io::Inputs;
use siegel_cli::manifest::RunManifest;
use siegel_cli::reproduce::{self, DEFAULT_SEED};
use siegel_cli::{CliError, CliResult};
use siegel_theta::dims::DimFormula;
use siegel_theta::quadform::ClassConstraints;
use siegel_theta::span::Family;
use siegel_theta::theta::ThetaConfig;

#[derive(Parser)]
#[command(name = "siegel", version, about = "Theta series, isotropic groups and quadratic form classes")]
struct Cli {
    /// Also write a run manifest (inputs, version, result digest) to this file.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate classes of positive definite forms with c·S⁻¹ integral.
    Classes {
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long)]
        scale: u64,
        #[arg(long)]
        det_square: bool,
    },
    /// Maximal isotropic groups of (S, q), or an isotropy test for V.
    Isotropy {
        #[arg(long)]
        form: PathBuf,
        #[arg(long, default_value_t = 4)]
        level: u64,
        #[arg(long, conflicts_with = "test", required_unless_present = "test")]
        maximal: bool,
        #[arg(long)]
        test: Option<PathBuf>,
    },
    /// Integral A with S = A'A, qA⁻¹ and A'⁻¹V integral.
    GramRoot {
        #[arg(long)]
        form: PathBuf,
        #[arg(long)]
        isotropic: PathBuf,
        #[arg(long, default_value_t = 4)]
        level: u64,
        /// Keep one root per orbit of left multiplication by signed permutations.
        #[arg(long)]
        dedup: bool,
        /// Verify this root instead of searching.
        #[arg(long)]
        verify: Option<PathBuf>,
    },
    /// Theta series evaluation.
    Theta {
        #[command(subcommand)]
        action: ThetaAction,
    },
    /// Both sides of the theta relation for one instance.
    Mumford {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        tau: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        eps: f64,
    },
    /// The multiplier ε_S(M) for M in Γ_g[4,8].
    Epsilon {
        #[arg(long)]
        form: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Compare ϑ_{S,0}(Mτ) with ε_S(M)·det(Cτ+D)²·ϑ_{S,0}(τ).
    TransformCheck {
        #[arg(long)]
        form: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        tau: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
        #[arg(long, default_value_t = TRANSFORM_MIN_IMAG)]
        min_imag: f64,
    },
    /// Exact dimension formulas.
    Dims {
        #[arg(long)]
        which: DimFormula,
        #[arg(long)]
        genus: u32,
    },
    /// Rank of the span of theta monomials from exact Fourier coefficients.
    SpanRank {
        #[arg(long, default_value_t = 1)]
        genus: usize,
        #[arg(long, default_value_t = 4)]
        degree: usize,
        #[arg(long, default_value_t = 32)]
        cutoff: i64,
        #[arg(long, conflicts_with = "fourth_powers")]
        second_kind: bool,
        #[arg(long)]
        fourth_powers: bool,
    },
    /// Run the reproduction checks in order.
    ReproducePaper(ReproduceArgs),
}

#[derive(Subcommand)]
enum ThetaAction {
    Eval {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        tau: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        eps: f64,
    },
}

#[derive(Args)]
struct ReproduceArgs {
    /// Restrict to these items (repeatable).
    #[arg(long)]
    only: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

fn to_json<T: Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("results serialize")
}

/// Returns the JSON result and whether the run counts as a success.
fn execute(command: Command, inputs: &mut Inputs) -> CliResult<(serde_json::Value, bool)> {
    let ok = |v: serde_json::Value| Ok((v, true));
    match command {
        Command::Classes { dim, scale, det_square } => ok(to_json(&commands::classes(ClassConstraints::new(dim, scale, det_square))?)),
        Command::Isotropy { form, level, maximal: _, test } => {
            let s = inputs.form(&form)?;
            match test {
                Some(v) => {
                    let v = inputs.int_matrix(&v)?;
                    ok(to_json(&commands::isotropy_test(&s, level, &v)?))
                }
                None => ok(to_json(&commands::maximal_groups(&s, level)?)),
            }
        }
        Command::GramRoot { form, isotropic, level, dedup, verify } => {
            let s = inputs.form(&form)?;
            let v = inputs.int_matrix(&isotropic)?;
            match verify {
                Some(a) => {
                    let a = inputs.int_matrix(&a)?;
                    let res = commands::verify_root(&s, &v, level, &a);
                    let valid = res.valid;
                    Ok((to_json(&res), valid))
                }
                None => ok(to_json(&commands::gram_roots(&s, &v, level, dedup)?)),
            }
        }
        Command::Theta { action: ThetaAction::Eval { spec, tau, eps } } => {
            let spec: ThetaSpec = inputs.typed(&spec)?;
            let tau = inputs.point(&tau)?;
            ok(to_json(&commands::theta_eval(&spec, &tau, &ThetaConfig::with_eps(eps))?))
        }
        Command::Mumford { instance, tau, eps } => {
            let spec = inputs.typed(&instance)?;
            let tau = inputs.point(&tau)?;
            let res = commands::mumford(&spec, &tau, &ThetaConfig::with_eps(eps))?;
            let pass = res.residual <= res.lhs.bound + res.rhs.bound;
            Ok((to_json(&res), pass))
        }
        Command::Epsilon { form, matrix } => {
            let s = inputs.form(&form)?;
            let m = inputs.int_matrix(&matrix)?;
            ok(to_json(&commands::epsilon(&s, &m)?))
        }
        Command::TransformCheck { form, matrix, tau, eps, min_imag } => {
            let s = inputs.form(&form)?;
            let m = inputs.int_matrix(&matrix)?;
            let tau = inputs.point(&tau)?;
            let cfg = ThetaConfig { min_imag, ..ThetaConfig::with_eps(eps) };
            ok(to_json(&commands::transform_check(&s, &m, &tau, &cfg)?))
        }
        Command::Dims { which, genus } => ok(to_json(&commands::dims(which, genus)?)),
        Command::SpanRank { genus, degree, cutoff, second_kind, fourth_powers } => {
            let family = if second_kind {
                Family::SecondKind
            } else if fourth_powers {
                Family::FourthPowers
            } else {
                Family::Nullwerte
            };
            ok(to_json(&commands::span(genus, degree, cutoff, family)?))
        }
        Command::ReproducePaper(args) => {
            let report = reproduce::run(&args.only, args.seed).map_err(CliError::Usage)?;
            for item in &report.items {
                eprintln!("{} [{}] {} ({:.1}s)", if item.pass { "PASS" } else { "FAIL" }, item.criterion, item.name, item.seconds);
            }
            let passed = report.passed;
            Ok((to_json(&report), passed))
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let start = Instant::now();
    let mut inputs = Inputs::default();
    match execute(cli.command, &mut inputs) {
        Ok((value, pass)) => {
            let text = serde_json::to_string_pretty(&value).expect("JSON values print");
            println!("{text}");
            if let Some(path) = cli.manifest {
                let m = RunManifest::new(argv, inputs.digests().clone(), start.elapsed().as_millis(), &text);
                let body = serde_json::to_string_pretty(&m).expect("manifest serializes");
                if let Err(e) = std::fs::write(&path, body) {
                    eprintln!("error: writing manifest {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
