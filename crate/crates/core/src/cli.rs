//! Command-line front end.
//!
//! Exit codes: `0` success or passing check, `1` failed check (the report
//! names the witness), `2` usage, format or precondition error. Report lines
//! start with `PASS`, `FAIL` or `VALUE`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::canon::{factorizes_over_g, Canonicalizer, Permutation, DEFAULT_MAX_SUPPORT};
use crate::hereditary::{covering_holds, HereditaryFamily};
use crate::io::{
    load_dag, load_model_config, load_opz, save_opz, to_opz_string, FormatError, LoadMode,
};
use crate::measures::checks::{
    check_below_continuity, check_independent, check_monotone, check_positive_definite,
    convergence_diag,
};
use crate::measures::{
    estimate_phi_streams, phi_exact, BaseRelation, EvalMode, Evaluator, MeasureError, MeasureModel,
    ModelKind, Phi, DEFAULT_STREAMS,
};
use crate::process::OrderProcess;

#[derive(Parser, Debug)]
#[command(
    name = "orderproc",
    version,
    about = "Order processes: algebra, canonical forms, sampling and checks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that an OPZ file satisfies the max-triangle constraint.
    Validate { file: PathBuf },
    /// Print the relation Y(t).
    Eval {
        file: PathBuf,
        #[arg(long)]
        t: f64,
    },
    /// Join two processes.
    Join {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test a <= b; exits 1 when false.
    Leq { a: PathBuf, b: PathBuf },
    /// Canonical representative of the isomorphy class.
    Canon {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_SUPPORT)]
        bound: usize,
    },
    /// Sum of two isomorphy classes.
    Add {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_SUPPORT)]
        bound: usize,
    },
    /// Covering witnesses of a member of a finitely generated family.
    Witnesses {
        #[arg(long)]
        z: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Generator files.
        generators: Vec<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Draw processes from a model.
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Estimate phi(z) = P(z <= Y).
    Estimate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        z: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_STREAMS)]
        streams: u64,
        /// Use the closed form instead of sampling.
        #[arg(long)]
        exact: bool,
    },
    /// Simulate a precedence network of jobs and write the completed-order
    /// processes.
    SimulateJobs {
        #[arg(long)]
        dag: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Property checks of phi.
    #[command(subcommand)]
    Check(CheckCommand),
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Monte Carlo sample count; the closed form is used when absent.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl EvalArgs {
    fn mode(&self) -> EvalMode {
        match self.n {
            Some(n) => EvalMode::MonteCarlo { n, seed: self.seed },
            None => EvalMode::Exact,
        }
    }
}

#[derive(Subcommand, Debug)]
enum CheckCommand {
    /// phi(z_i v z_k) is positive semidefinite.
    Pd {
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        zs: Vec<PathBuf>,
    },
    /// phi is invariant under random window permutations.
    Exch {
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long, default_value_t = 20)]
        perms: usize,
        #[arg(long, default_value_t = 0)]
        perm_seed: u64,
        zs: Vec<PathBuf>,
    },
    /// Product rule over disjoint supports; files are taken in pairs.
    Indep {
        #[command(flatten)]
        eval: EvalArgs,
        zs: Vec<PathBuf>,
    },
    /// z1 <= z2 implies phi(z1) >= phi(z2); files are taken in pairs.
    Monotone {
        #[command(flatten)]
        eval: EvalArgs,
        zs: Vec<PathBuf>,
    },
    /// Continuity from below along a decreasing eps sequence.
    Cont {
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long)]
        z: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        /// Lipschitz modulus of the shifted phi; derived from the model when
        /// known, else 0.
        #[arg(long)]
        modulus: Option<f64>,
    },
    /// Sup-gap of a model sequence against a limit model.
    Converge {
        #[arg(long)]
        limit: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        models: Vec<PathBuf>,
        #[arg(long, num_args = 1.., required = true)]
        z: Vec<PathBuf>,
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Result of one CLI invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("{0}")]
    Usage(String),
}

impl From<crate::canon::CanonError> for CliError {
    fn from(e: crate::canon::CanonError) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// Runs the command line `argv` (including the program name) and captures
/// its output.
pub fn run_cli<I, T>(argv: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                CliOutput {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                CliOutput {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    let mut out = String::new();
    match run(cli.cmd, &mut out) {
        Ok(passed) => CliOutput {
            code: if passed { 0 } else { 1 },
            stdout: out,
            stderr: String::new(),
        },
        Err(e) => {
            let hint = match e {
                CliError::Measure(MeasureError::NoClosedForm(_)) => {
                    " (pass --n for a Monte Carlo estimate)"
                }
                _ => "",
            };
            CliOutput {
                code: 2,
                stdout: out,
                stderr: format!("error: {e}{hint}\n"),
            }
        }
    }
}

fn strict(path: &Path) -> Result<OrderProcess, CliError> {
    Ok(load_opz(path, LoadMode::Strict)?)
}

fn load_all(paths: &[PathBuf]) -> Result<Vec<OrderProcess>, CliError> {
    paths.iter().map(|p| strict(p)).collect()
}

fn in_pairs(paths: &[PathBuf]) -> Result<Vec<(OrderProcess, OrderProcess)>, CliError> {
    if paths.is_empty() || !paths.len().is_multiple_of(2) {
        return Err(CliError::Usage(
            "expected a positive, even number of files".into(),
        ));
    }
    let zs = load_all(paths)?;
    Ok(zs.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect())
}

fn write_dir(
    dir: &Path,
    stem: &str,
    zs: &[OrderProcess],
    out: &mut String,
) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| FormatError::Io {
        path: dir.to_owned(),
        source,
    })?;
    for (i, z) in zs.iter().enumerate() {
        let path = dir.join(format!("{stem}_{i:04}.opz"));
        save_opz(z, &path)?;
        writeln!(out, "VALUE wrote {}", path.display()).unwrap();
    }
    Ok(())
}

fn run(cmd: Command, out: &mut String) -> Result<bool, CliError> {
    match cmd {
        Command::Validate { file } => match load_opz(&file, LoadMode::Strict) {
            Ok(z) => {
                writeln!(out, "PASS valid pairs={}", z.len()).unwrap();
                Ok(true)
            }
            Err(FormatError::Invalid(e)) => {
                writeln!(out, "FAIL {e}").unwrap();
                Ok(false)
            }
            Err(e) => Err(e.into()),
        },
        Command::Eval { file, t } => {
            if !(t.is_finite() && t >= 0.0) {
                return Err(CliError::Usage(format!(
                    "t must be finite and nonnegative, got {t}"
                )));
            }
            writeln!(out, "VALUE {}", strict(&file)?.eval(t)).unwrap();
            Ok(true)
        }
        Command::Join { a, b, out: dest } => {
            let joined = strict(&a)?.join(&strict(&b)?);
            match dest {
                Some(p) => save_opz(&joined, p)?,
                None => out.push_str(&to_opz_string(&joined)),
            }
            Ok(true)
        }
        Command::Leq { a, b } => {
            let r = strict(&a)?.leq(&strict(&b)?);
            writeln!(out, "{r}").unwrap();
            Ok(r)
        }
        Command::Canon { file, bound } => {
            let class = Canonicalizer::with_bound(bound).g(&strict(&file)?)?;
            out.push_str(&to_opz_string(class.rep()));
            Ok(true)
        }
        Command::Add { a, b, bound } => {
            let c = Canonicalizer::with_bound(bound);
            let sum = c.add(&c.g(&strict(&a)?)?, &c.g(&strict(&b)?)?)?;
            out.push_str(&to_opz_string(sum.rep()));
            Ok(true)
        }
        Command::Witnesses {
            z,
            eps,
            generators,
            out_dir,
        } => {
            let target = strict(&z)?;
            let fam = HereditaryFamily::new(load_all(&generators)?);
            let ws = match fam.cover_witnesses(&target, eps) {
                Ok(ws) => ws,
                Err(crate::hereditary::HereditaryError::NotAMember) => {
                    writeln!(out, "FAIL not a member of the generated family").unwrap();
                    return Ok(false);
                }
                Err(e) => return Err(CliError::Usage(e.to_string())),
            };
            let ok = covering_holds(&target, &fam, &ws, eps);
            match out_dir {
                Some(dir) => write_dir(&dir, "witness", &ws, out)?,
                None => {
                    for w in &ws {
                        out.push_str(&to_opz_string(w));
                    }
                }
            }
            writeln!(
                out,
                "{} covering witnesses={}",
                if ok { "PASS" } else { "FAIL" },
                ws.len()
            )
            .unwrap();
            Ok(ok)
        }
        Command::Sample {
            model,
            seed,
            count,
            out_dir,
        } => {
            let m = load_model_config(&model)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let zs: Vec<OrderProcess> = (0..count).map(|_| m.sample_with(&mut rng)).collect();
            match out_dir {
                Some(dir) => write_dir(&dir, "sample", &zs, out)?,
                None => zs.iter().for_each(|z| out.push_str(&to_opz_string(z))),
            }
            Ok(true)
        }
        Command::Estimate {
            model,
            z,
            n,
            seed,
            streams,
            exact,
        } => {
            let m = load_model_config(&model)?;
            let target = strict(&z)?;
            if n == 0 {
                return Err(CliError::Usage("--n must be at least 1".into()));
            }
            let e = if exact {
                phi_exact(&m, &target)?
            } else {
                estimate_phi_streams(&m, &target, n, seed, streams)
            };
            writeln!(
                out,
                "VALUE phi={} stderr={} n={} exact={}",
                e.value, e.stderr, e.n, e.exact
            )
            .unwrap();
            Ok(true)
        }
        Command::SimulateJobs {
            dag,
            model,
            count,
            seed,
            out_dir,
        } => {
            let base = load_model_config(&model)?;
            let ModelKind::Completion(c) = base.kind() else {
                return Err(CliError::Usage(
                    "simulate-jobs needs a completion model config".into(),
                ));
            };
            let m = MeasureModel::completion(
                base.window(),
                c.durations,
                BaseRelation::Dag(load_dag(&dag)?),
                c.permute,
            )?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let zs: Vec<OrderProcess> = (0..count).map(|_| m.sample_with(&mut rng)).collect();
            write_dir(&out_dir, "job", &zs, out)?;
            Ok(true)
        }
        Command::Check(check) => run_check(check, out),
    }
}

fn run_check(check: CheckCommand, out: &mut String) -> Result<bool, CliError> {
    match check {
        CheckCommand::Pd { eval, tol, zs } => {
            let m = load_model_config(&eval.model)?;
            let ev = Evaluator {
                model: &m,
                mode: eval.mode(),
            };
            let r = check_positive_definite(&ev, &load_all(&zs)?, tol)?;
            writeln!(out, "{r}").unwrap();
            Ok(r.passed)
        }
        CheckCommand::Exch {
            eval,
            perms,
            perm_seed,
            zs,
        } => {
            let m = load_model_config(&eval.model)?;
            let ev = Evaluator {
                model: &m,
                mode: eval.mode(),
            };
            let samples = load_all(&zs)?;
            let window: Vec<u32> = (0..m.window()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
            let sigmas: Vec<Permutation> = (0..perms)
                .map(|_| Permutation::random(&window, &mut rng))
                .collect();
            let r = factorizes_over_g(|z: &OrderProcess| ev.phi(z), &samples, &sigmas)?;
            match r.witness {
                None => writeln!(
                    out,
                    "PASS exchangeable worst_gap={} perms={}",
                    r.worst_gap,
                    sigmas.len()
                )
                .unwrap(),
                Some((s, p)) => writeln!(
                    out,
                    "FAIL exchangeable worst_gap={} witness={} perm={}",
                    r.worst_gap,
                    zs[s].display(),
                    sigmas[p]
                )
                .unwrap(),
            }
            Ok(r.passed)
        }
        CheckCommand::Indep { eval, zs } => {
            let m = load_model_config(&eval.model)?;
            let ev = Evaluator {
                model: &m,
                mode: eval.mode(),
            };
            let r = check_independent(&ev, &in_pairs(&zs)?)?;
            writeln!(out, "{r}").unwrap();
            Ok(r.passed)
        }
        CheckCommand::Monotone { eval, zs } => {
            let m = load_model_config(&eval.model)?;
            let ev = Evaluator {
                model: &m,
                mode: eval.mode(),
            };
            let r = check_monotone(&ev, &in_pairs(&zs)?)?;
            writeln!(out, "{r}").unwrap();
            Ok(r.passed)
        }
        CheckCommand::Cont {
            eval,
            z,
            eps,
            modulus,
        } => {
            let m = load_model_config(&eval.model)?;
            let ev = Evaluator {
                model: &m,
                mode: eval.mode(),
            };
            let target = strict(&z)?;
            let modulus = modulus
                .or_else(|| m.continuity_modulus(&target))
                .unwrap_or(0.0);
            let r = check_below_continuity(&ev, &target, &eps, modulus)?;
            writeln!(out, "{r}").unwrap();
            Ok(r.passed)
        }
        CheckCommand::Converge {
            limit,
            models,
            z,
            tol,
            n,
            seed,
        } => {
            let limit = load_model_config(&limit)?;
            let seq: Vec<MeasureModel> = models
                .iter()
                .map(load_model_config)
                .collect::<Result<_, _>>()?;
            let mode = match n {
                Some(n) => EvalMode::MonteCarlo { n, seed },
                None => EvalMode::Exact,
            };
            let r = convergence_diag(&seq, &limit, &load_all(&z)?, mode, tol)?;
            writeln!(out, "{r}").unwrap();
            Ok(r.passed)
        }
    }
}
