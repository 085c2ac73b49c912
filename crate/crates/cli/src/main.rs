use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gateforge::compiler::cover_targets;
use gateforge::specgap::lps_lambda;
use gateforge::{
    diagonal_generators, gd_generators, lambda_estimate, lower_bound_length, minimal_m,
    moment_report, parse_gateset, parse_unitary, prop4_bound, scaling_fit, serialize_gateset,
    su2_from_angles, subgroup_experiment, theorem1_length, BoundInputs, Compiler, Error, GateSet,
    Sampler, Strategy, Unitary,
};

const USAGE: u8 = 2;
const BUDGET: u8 = 3;

#[derive(Parser)]
#[command(
    name = "gateforge",
    version,
    about = "Gate-set compilation and spectral-gap experiments on SU(d)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a built-in gate set as JSON.
    Gates {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        set: SetArgs,
    },
    /// Enumerate the net of reduced words up to a length.
    Net {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, default_value_t = 4)]
        length: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        max_entries: Option<usize>,
    },
    /// Compile one target into a word.
    Compile {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        set: SetArgs,
        /// `identity`, `pi8`, `haar`, or a path to a `{"dim", "matrix"}` JSON file.
        #[arg(long, default_value = "pi8")]
        target: String,
        #[arg(long, default_value_t = 10)]
        length: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::Mitm)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_entries: Option<usize>,
        /// Candidate evaluations before giving up (exit 3).
        #[arg(long)]
        search_budget: Option<u64>,
    },
    /// Empirical covering radius against word length, with a log-linear fit.
    Cover {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        set: SetArgs,
        /// Largest length; lengths run 2, 4, … up to it.
        #[arg(long, default_value_t = 14)]
        length: usize,
        #[arg(long, default_value_t = 100)]
        targets: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        max_entries: Option<usize>,
    },
    /// Norms of the mixing operator on the spin-j blocks.
    Gap {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        set: SetArgs,
        /// Largest 2j.
        #[arg(long, default_value_t = 20)]
        jmax: usize,
    },
    /// Minimal block length and the resulting gap bound for the embedded set.
    Prop4 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(2..))]
        dim: u64,
        /// Gap of the underlying SU(2) set; defaults to √5/3.
        #[arg(long)]
        lambda: Option<f64>,
        /// Defaults to the minimal admissible value.
        #[arg(long)]
        m: Option<u32>,
    },
    /// Second moments of the nested-product sampler and the Haar oracle.
    Haar {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(2..))]
        dim: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SamplerArg::Both)]
        sampler: SamplerArg,
    },
    /// Upper and counting lower bounds on the word length for given precisions.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..))]
        dim: u64,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        k1: Option<f64>,
        #[arg(long)]
        k2: Option<f64>,
        /// Number of generators; defaults to 3(d−1).
        #[arg(long)]
        set_size: Option<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001")]
        eps: Vec<f64>,
    },
    /// Largest drift of random words under a perturbation of the generators.
    Perturb {
        #[command(flatten)]
        common: Common,
        /// Defaults to two commuting diagonal gates.
        #[arg(long)]
        gateset: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long, default_value_t = 20)]
        length: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SetArgs {
    /// Dimension of the built-in set (LPS for 2, embedded LPS otherwise).
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    dim: Option<u64>,
    /// JSON gate-set file; overrides the built-in set.
    #[arg(long)]
    gateset: Option<PathBuf>,
    /// Directory for cached half-nets.
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Exhaustive,
    Mitm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SamplerArg {
    Ds,
    Oracle,
    Both,
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(Error::Io(e))
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(USAGE);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            if e.is_budget() {
                ExitCode::from(BUDGET)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("GATEFORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("GATEFORGE_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Gates { common, set } => {
            let gs = load_set(&set)?;
            if common.format == Format::Csv {
                return Err(Failure::Usage("`gates` only supports --format json".into()));
            }
            emit(&common, &serialize_gateset(&gs))
        }
        Command::Net {
            common,
            set,
            length,
            tol,
            max_entries,
        } => {
            let gs = Arc::new(load_set(&set)?);
            let mut compiler = compiler_for(gs, &set).with_dedup_tol(tol);
            if let Some(m) = max_entries {
                compiler = compiler.with_net_budget(m);
            }
            let net = compiler.half_net(length)?;
            match common.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    net.write_csv(&mut buf)?;
                    emit(&common, &String::from_utf8_lossy(&buf))
                }
                Format::Json => emit_json(
                    &common,
                    &json!({
                        "gateset": &net.gateset().content_hash()[..16],
                        "max_length": net.max_length(),
                        "dedup_tol": net.dedup_tol(),
                        "size": net.len(),
                        "length_histogram": net.length_histogram(),
                    }),
                ),
            }
        }
        Command::Compile {
            common,
            set,
            target,
            length,
            strategy,
            seed,
            max_entries,
            search_budget,
        } => {
            let gs = Arc::new(load_set(&set)?);
            let target = load_target(&target, gs.dim(), seed)?;
            let mut compiler = compiler_for(gs, &set);
            if let Some(m) = max_entries {
                compiler = compiler.with_net_budget(m);
            }
            if let Some(b) = search_budget {
                compiler = compiler.with_search_budget(b);
            }
            let strategy = match strategy {
                StrategyArg::Exhaustive => Strategy::Exhaustive,
                StrategyArg::Mitm => Strategy::Mitm,
            };
            let r = compiler.compile(&target, length, strategy)?;
            match common.format {
                Format::Json => emit(&common, &r.to_json()),
                Format::Csv => emit(
                    &common,
                    &format!(
                        "word,length,distance_op,distance_frob,searched\n{},{},{},{},{}\n",
                        r.word,
                        r.word.len(),
                        r.distance_op,
                        r.distance_frob,
                        r.searched
                    ),
                ),
            }
        }
        Command::Cover {
            common,
            set,
            length,
            targets,
            seed,
            max_entries,
        } => {
            if length < 2 {
                return Err(Failure::Usage("--length must be at least 2".into()));
            }
            if targets == 0 {
                return Err(Failure::Usage("--targets must be positive".into()));
            }
            let gs = Arc::new(load_set(&set)?);
            let mut compiler = compiler_for(gs, &set);
            if let Some(m) = max_entries {
                compiler = compiler.with_net_budget(m);
            }
            let lengths: Vec<usize> = (2..=length).step_by(2).collect();
            let report = gateforge::covering_stats_with(&compiler, &lengths, targets, seed)?;
            let fit = scaling_fit(&report).ok();
            match common.format {
                Format::Csv => {
                    if let Some(f) = fit {
                        eprintln!(
                            "scaling fit: ln(max eps) = {} + {}*n, r^2 = {}",
                            f.intercept, f.slope, f.r_squared
                        );
                    }
                    emit(&common, &report.to_csv())
                }
                Format::Json => emit_json(&common, &json!({ "report": report, "fit": fit })),
            }
        }
        Command::Gap { common, set, jmax } => {
            let gs = load_set(&set)?;
            if gs.dim() != 2 {
                return Err(Failure::Usage(
                    "`gap` needs an SU(2) gate set (--dim 2 or a 2x2 --gateset)".into(),
                ));
            }
            let est = lambda_estimate(&gs, jmax)?;
            let is_lps = gs.content_hash() == gateforge::lps_generators::<f64>().content_hash();
            let reference = is_lps.then(lps_lambda);
            match common.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    est.write_csv(&mut buf, reference)?;
                    emit(&common, &String::from_utf8_lossy(&buf))
                }
                Format::Json => {
                    emit_json(&common, &json!({ "estimate": est, "reference": reference }))
                }
            }
        }
        Command::Prop4 {
            common,
            dim,
            lambda,
            m,
        } => {
            let d = dim as usize;
            let lambda = lambda.unwrap_or_else(lps_lambda);
            let m_min = minimal_m(d, lambda).map_err(usage)?;
            let m = m.unwrap_or(m_min);
            let b = prop4_bound(d, m, lambda).map_err(usage)?;
            match common.format {
                Format::Csv => emit(
                    &common,
                    &format!(
                        "d,lambda,minimal_m,m,fraction,deficit,word_block_bound,per_step_bound\n{d},{lambda},{m_min},{m},{},{},{},{}\n",
                        b.fraction, b.deficit, b.word_block_bound, b.per_step_bound
                    ),
                ),
                Format::Json => emit_json(
                    &common,
                    &json!({ "d": d, "lambda": lambda, "minimal_m": m_min, "m": m, "bound": b }),
                ),
            }
        }
        Command::Haar {
            common,
            dim,
            samples,
            seed,
            sampler,
        } => {
            let d = dim as usize;
            let samplers: &[(Sampler, &str)] = match sampler {
                SamplerArg::Ds => &[(Sampler::Ds, "ds")],
                SamplerArg::Oracle => &[(Sampler::Oracle, "oracle")],
                SamplerArg::Both => &[(Sampler::Ds, "ds"), (Sampler::Oracle, "oracle")],
            };
            let reports = samplers
                .iter()
                .map(|&(s, name)| moment_report(s, d, samples, seed).map(|r| (name, r)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(usage)?;
            match common.format {
                Format::Csv => {
                    let mut text =
                        String::from("sampler,p,q,mean,stderr,haar_prediction,deviation_sigmas\n");
                    for (name, r) in &reports {
                        for line in r.to_csv().lines().skip(1) {
                            text.push_str(&format!("{name},{line}\n"));
                        }
                    }
                    emit(&common, &text)
                }
                Format::Json => {
                    let all: Vec<_> = reports.iter().map(|(_, r)| r).collect();
                    emit_json(&common, &json!(all))
                }
            }
        }
        Command::Bounds {
            common,
            dim,
            lambda,
            k1,
            k2,
            set_size,
            eps,
        } => {
            let d = dim as usize;
            let (k1, k2, lambda) = if d == 2 {
                // V(r)/r³ decreases on (0, 2], so its r → 0 limit serves as both constants.
                let k = 2.0 / (3.0 * PI);
                (
                    k1.unwrap_or(k),
                    k2.unwrap_or(k),
                    lambda.unwrap_or_else(lps_lambda),
                )
            } else {
                match (k1, k2, lambda) {
                    (Some(a), Some(b), Some(l)) => (a, b, l),
                    _ => {
                        return Err(Failure::Usage(
                            "--lambda, --k1 and --k2 are required when --dim > 2".into(),
                        ))
                    }
                }
            };
            let set_size = set_size.unwrap_or(3 * (d - 1));
            let mut rows = Vec::new();
            for &e in &eps {
                let b = BoundInputs {
                    d,
                    lambda,
                    k1,
                    k2,
                    set_size,
                    eps: e,
                };
                let upper = theorem1_length(&b).map_err(usage)?;
                let lower = lower_bound_length(&b).map_err(usage)?;
                rows.push((e, lower, upper));
            }
            match common.format {
                Format::Csv => {
                    let mut text = String::from(
                        "eps,lower_bound_length,theorem1_length,d,lambda,k1,k2,set_size\n",
                    );
                    for (e, lo, up) in rows {
                        text.push_str(&format!(
                            "{e},{lo},{up},{d},{lambda},{k1},{k2},{set_size}\n"
                        ));
                    }
                    emit(&common, &text)
                }
                Format::Json => {
                    let table: Vec<_> = rows
                        .iter()
                        .map(|&(e, lo, up)| json!({ "eps": e, "lower_bound_length": lo, "theorem1_length": up }))
                        .collect();
                    emit_json(
                        &common,
                        &json!({ "d": d, "lambda": lambda, "k1": k1, "k2": k2, "set_size": set_size, "rows": table }),
                    )
                }
            }
        }
        Command::Perturb {
            common,
            gateset,
            delta,
            length,
            samples,
            seed,
        } => {
            let base = match gateset {
                Some(p) => read_gateset(&p)?,
                None => diagonal_generators(&[0.3, 1.1])?,
            };
            let drift = subgroup_experiment(&base, delta, length, samples, seed).map_err(usage)?;
            let bound = length as f64 * delta;
            match common.format {
                Format::Csv => emit(
                    &common,
                    &format!("delta,length,samples,seed,max_drift,bound\n{delta},{length},{samples},{seed},{drift},{bound}\n"),
                ),
                Format::Json => emit_json(
                    &common,
                    &json!({ "delta": delta, "length": length, "samples": samples, "seed": seed, "max_drift": drift, "bound": bound }),
                ),
            }
        }
    }
}

fn usage(e: Error) -> Failure {
    if e.is_budget() {
        Failure::Run(e)
    } else {
        Failure::Usage(e.to_string())
    }
}

fn read_gateset(path: &PathBuf) -> Outcome<GateSet> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("--gateset {}: {e}", path.display())))?;
    parse_gateset(&text).map_err(|e| Failure::Usage(format!("--gateset {}: {e}", path.display())))
}

fn load_set(set: &SetArgs) -> Outcome<GateSet> {
    let gs = match &set.gateset {
        Some(p) => read_gateset(p)?,
        None => gd_generators::<f64>(set.dim.unwrap_or(2) as usize)?,
    };
    if let Some(d) = set.dim {
        if d as usize != gs.dim() {
            return Err(Failure::Usage(format!(
                "--dim {d} does not match the gate set dimension {}",
                gs.dim()
            )));
        }
    }
    Ok(gs)
}

fn compiler_for(gs: Arc<GateSet>, set: &SetArgs) -> Compiler {
    let c = Compiler::new(gs);
    match &set.cache {
        Some(dir) => c.with_cache_dir(dir),
        None => c,
    }
}

fn load_target(spec: &str, d: usize, seed: u64) -> Outcome<Unitary> {
    match spec {
        "identity" => Ok(Unitary::identity(d)),
        "pi8" if d == 2 => Ok(su2_from_angles(-PI / 8.0, 0.0, 0.0)),
        "pi8" => Err(Failure::Usage(
            "the pi8 target is only defined for --dim 2".into(),
        )),
        "haar" => Ok(cover_targets(d, 1, seed).remove(0)),
        path => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("--target {path}: {e}")))?;
            let u = parse_unitary(&text)
                .map_err(|e| Failure::Usage(format!("--target {path}: {e}")))?;
            if u.dim() != d {
                return Err(Failure::Usage(format!(
                    "--target has dimension {}, gate set has {d}",
                    u.dim()
                )));
            }
            Ok(u)
        }
    }
}

fn emit(common: &Common, text: &str) -> Outcome {
    match &common.out {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_json(common: &Common, value: &serde_json::Value) -> Outcome {
    let mut s = serde_json::to_string_pretty(value).expect("json");
    s.push('\n');
    emit(common, &s)
}
