use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use stabgame::bounds::{bound_report, toric_bound, BoundReport, ReportOptions, BOUND_NAMES};
use stabgame::cluster::{
    cluster_table, cluster_table_csv, verify_invariant_polytope, DEFAULT_CLUSTER_CAP,
};
use stabgame::game::{
    build_game_capped, classical_value_with, find_refutation, GameInstance, QuerySet, ValueOptions,
    DEFAULT_DIM_CAP, DEFAULT_QUERY_CAP,
};
use stabgame::num::{fmt_decimal, fmt_ratio};
use stabgame::pauli::StabilizerGenerators;
use stabgame::qsim::{fidelity, quantum_win_probability, stabilizer_state, StateVector};
use stabgame::states::{
    ghz_generators, graph_generators, toric_generators, GraphSpec, ToricLattice,
};
use stabgame::Error;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "stabgame",
    version,
    about = "Classical values and bounds for stabilizer-testing games"
)]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, env = "STABGAME_WORKERS", default_value_t = 0, global = true)]
    workers: usize,

    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Exact classical value, refutation and bounds of one game.
    Value(InstanceArgs),
    /// Lower bound, upper bounds and exact value of one game.
    Bounds(InstanceArgs),
    /// Search for a refutation.
    Refute(InstanceArgs),
    /// Exact values of the cyclic cluster game for n = 3..=n_max.
    ClusterTable {
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        #[arg(long, default_value_t = DEFAULT_CLUSTER_CAP)]
        cap: usize,
    },
    /// Derivative bound for the toric code on an L x L torus.
    Toric {
        #[arg(long = "L", short = 'L')]
        l: usize,
    },
    /// Check the invariant polytope of the cluster transfer matrices.
    Polytope {
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Quantum win probability of the default protocol on a demo state.
    Qsim {
        #[command(flatten)]
        instance: InstanceArgs,
        /// stabilizer, basis:K or random
        #[arg(long, default_value = "stabilizer")]
        state: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// ghz:N, cycle:N, path:N, graph:FILE or toric:L
    #[arg(long, conflicts_with = "gens", required_unless_present = "gens")]
    builtin: Option<String>,
    /// File with one signed Pauli string per line.
    #[arg(long)]
    gens: Option<PathBuf>,
    /// full or coset:x1=1,x3=0
    #[arg(long, default_value = "full")]
    queries: String,
    #[arg(long, default_value_t = DEFAULT_DIM_CAP)]
    dim_cap: usize,
    #[arg(long, default_value_t = DEFAULT_QUERY_CAP)]
    query_cap: usize,
}

struct Instance {
    name: String,
    gens: StabilizerGenerators,
    toric: Option<usize>,
    game: GameInstance,
}

fn read(path: &Path) -> Result<String, Error> {
    Ok(fs::read_to_string(path)?)
}

fn parse_size(spec: &str, s: &str) -> Result<usize, Error> {
    s.parse()
        .map_err(|_| Error::Parse(format!("bad size in builtin {spec:?}")))
}

fn load(args: &InstanceArgs) -> Result<Instance, Error> {
    if args.dim_cap == 0 || args.query_cap == 0 {
        return Err(Error::InvalidInput("caps must be positive".into()));
    }
    let mut toric = None;
    let (name, gens) = match (&args.builtin, &args.gens) {
        (Some(spec), _) => {
            let (kind, rest) = spec
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("builtin {spec:?} needs kind:arg")))?;
            let gens = match kind {
                "ghz" => ghz_generators(parse_size(spec, rest)?)?,
                "cycle" => graph_generators(&GraphSpec::cycle(parse_size(spec, rest)?)?)?,
                "path" => graph_generators(&GraphSpec::path(parse_size(spec, rest)?)?)?,
                "graph" => graph_generators(&GraphSpec::parse(&read(Path::new(rest))?)?)?,
                "toric" => {
                    let l = parse_size(spec, rest)?;
                    toric = Some(l);
                    toric_generators(&ToricLattice::new(l)?, false)?
                }
                _ => return Err(Error::Parse(format!("unknown builtin kind {kind:?}"))),
            };
            (spec.clone(), gens)
        }
        (None, Some(path)) => (
            path.display().to_string(),
            StabilizerGenerators::parse(&read(path)?)?,
        ),
        (None, None) => unreachable!("clap requires an instance"),
    };
    let queries: QuerySet = args.queries.parse()?;
    let game = build_game_capped(&gens, &queries, args.query_cap)?;
    Ok(Instance {
        name,
        gens,
        toric,
        game,
    })
}

fn value_opts(args: &InstanceArgs, lhv: bool) -> ValueOptions {
    ValueOptions {
        lhv,
        dim_cap: args.dim_cap,
    }
}

fn opt_ratio(x: &Option<BigRational>) -> Value {
    x.as_ref()
        .map_or(Value::Null, |v| Value::String(fmt_ratio(v)))
}

fn csv_opt(x: &Option<BigRational>) -> String {
    x.as_ref().map(fmt_ratio).unwrap_or_default()
}

/// Exact decimal expansion of a dyadic rational.
fn exact_decimal(x: &BigRational) -> String {
    let s = fmt_decimal(x, 40);
    let s = s.trim_end_matches('0');
    s.trim_end_matches('.').to_string()
}

fn report_json(r: &BoundReport) -> Value {
    let upper: serde_json::Map<String, Value> = BOUND_NAMES
        .iter()
        .filter_map(|&k| r.upper.get(k).map(|v| (k.to_string(), json!(fmt_ratio(v)))))
        .collect();
    json!({
        "lower": fmt_ratio(&r.lower),
        "upper": upper,
        "best_upper": fmt_ratio(&r.best_upper),
        "exact": opt_ratio(&r.exact),
    })
}

fn cmd_value(args: &InstanceArgs, format: Format) -> Result<String, Error> {
    let inst = load(args)?;
    let g = &inst.game;
    let cv = match classical_value_with(g, value_opts(args, false)) {
        Ok(v) => Some(v),
        Err(Error::CapExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let lhv = match classical_value_with(g, value_opts(args, true)) {
        Ok(v) => Some(v.value),
        Err(Error::CapExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let refutation = find_refutation(g)?;
    let opts = ReportOptions {
        value: value_opts(args, false),
        toric: inst
            .toric
            .filter(|_| matches!(g.query_set(), QuerySet::Full)),
        ..ReportOptions::default()
    };
    let report = bound_report(&inst.name, &inst.gens, g, &opts)?;
    let value = cv.as_ref().map(|v| v.value.clone());
    let witness = cv.as_ref().map(|v| v.witness.to_hex());
    let support = refutation.as_ref().map(|r| r.support.clone());
    Ok(match format {
        Format::Json => {
            let v = json!({
                "schema_version": SCHEMA_VERSION,
                "instance": inst.name,
                "queries": g.query_set().to_string(),
                "n": g.n(),
                "r": g.r(),
                "query_count": g.query_count(),
                "classical_value": opt_ratio(&value),
                "lhv_value": opt_ratio(&lhv),
                "has_quantum_advantage": refutation.is_some(),
                "refutation_support": support,
                "witness_strategy": witness,
                "bounds": report_json(&report),
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
        Format::Csv => {
            let support = support
                .map(|s| s.iter().map(usize::to_string).collect::<Vec<_>>().join(" "))
                .unwrap_or_default();
            format!(
                "instance,queries,n,r,query_count,classical_value,lhv_value,has_quantum_advantage,refutation_support,witness_strategy,best_upper\n{},{},{},{},{},{},{},{},{},{},{}\n",
                inst.name,
                g.query_set(),
                g.n(),
                g.r(),
                g.query_count(),
                csv_opt(&value),
                csv_opt(&lhv),
                refutation.is_some(),
                support,
                witness.unwrap_or_default(),
                fmt_ratio(&report.best_upper),
            )
        }
    })
}

fn cmd_bounds(args: &InstanceArgs, format: Format) -> Result<String, Error> {
    let inst = load(args)?;
    let opts = ReportOptions {
        value: value_opts(args, false),
        toric: inst
            .toric
            .filter(|_| matches!(inst.game.query_set(), QuerySet::Full)),
        ..ReportOptions::default()
    };
    let report = bound_report(&inst.name, &inst.gens, &inst.game, &opts)?;
    if !report.is_consistent() {
        return Err(Error::Verification(format!(
            "bounds inconsistent with exact value for {}",
            inst.name
        )));
    }
    Ok(match format {
        Format::Json => {
            let mut v = report_json(&report);
            v["schema_version"] = json!(SCHEMA_VERSION);
            v["instance"] = json!(report.instance);
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
        Format::Csv => format!("{}\n{}\n", BoundReport::csv_header(), report.csv_row()),
    })
}

fn cmd_refute(args: &InstanceArgs, format: Format) -> Result<String, Error> {
    let inst = load(args)?;
    let r = find_refutation(&inst.game)?;
    if let Some(r) = &r {
        if !r.verify(&inst.game) {
            return Err(Error::Verification("refutation failed verification".into()));
        }
    }
    let support = r.map(|r| r.support);
    Ok(match format {
        Format::Json => {
            let v = json!({
                "schema_version": SCHEMA_VERSION,
                "instance": inst.name,
                "refutation_support": support,
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
        Format::Csv => {
            let s = match support {
                Some(s) => s.iter().map(usize::to_string).collect::<Vec<_>>().join(" "),
                None => "none".to_string(),
            };
            format!("instance,refutation_support\n{},{}\n", inst.name, s)
        }
    })
}

fn cmd_cluster_table(n_max: usize, cap: usize, format: Format) -> Result<String, Error> {
    if n_max < 3 {
        return Err(Error::InvalidInput(format!(
            "n_max must be at least 3, got {n_max}"
        )));
    }
    let rows = cluster_table(n_max, cap)?;
    Ok(match format {
        Format::Csv => cluster_table_csv(&rows),
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "n": r.n,
                        "lower_bound": fmt_ratio(&r.lower),
                        "exact": fmt_ratio(&r.exact),
                        "F_c": fmt_decimal(&r.f_c(), 4),
                    })
                })
                .collect();
            let v = json!({"schema_version": SCHEMA_VERSION, "rows": rows});
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
    })
}

fn cmd_toric(l: usize, format: Format) -> Result<String, Error> {
    let t = toric_bound(l)?;
    let dec = exact_decimal(&t.bound);
    Ok(match format {
        Format::Csv => format!(
            "L,bound,bound_decimal,certified_rank\n{},{},{},{}\n",
            l,
            fmt_ratio(&t.bound),
            dec,
            t.certified_rank
        ),
        Format::Json => {
            let v = json!({
                "schema_version": SCHEMA_VERSION,
                "L": l,
                "bound": fmt_ratio(&t.bound),
                "bound_decimal": dec,
                "certified_rank": t.certified_rank,
                "direction": t.direction.iter_ones().collect::<Vec<_>>(),
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
    })
}

fn cmd_polytope(tol: f64, format: Format) -> Result<(String, bool), Error> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let p = verify_invariant_polytope(tol)?;
    let out = match format {
        Format::Csv => format!(
            "lambda,ratio,tolerance,vertices,max_violation_images,max_violation_vertices,max_violation_vertices_symmetric,pass\n{},{},{:e},{},{:e},{:e},{:e},{}\n",
            p.lambda,
            p.ratio,
            p.tolerance,
            p.vertices,
            p.max_violation_images,
            p.max_violation_vertices,
            p.max_violation_vertices_symmetric,
            if p.pass { "pass" } else { "fail" }
        ),
        Format::Json => {
            let v = json!({
                "schema_version": SCHEMA_VERSION,
                "lambda": p.lambda,
                "ratio": p.ratio,
                "tolerance": p.tolerance,
                "vertices": p.vertices,
                "max_violation_images": p.max_violation_images,
                "max_violation_vertices": p.max_violation_vertices,
                "max_violation_vertices_symmetric": p.max_violation_vertices_symmetric,
                "pass": p.pass,
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
    };
    Ok((out, p.pass))
}

fn cmd_qsim(args: &InstanceArgs, state: &str, seed: u64, format: Format) -> Result<String, Error> {
    let inst = load(args)?;
    let target = stabilizer_state(&inst.gens)?;
    let n = inst.gens.n();
    let psi = match state.split_once(':') {
        None if state == "stabilizer" => target.clone(),
        None if state == "random" => StateVector::random(n, &mut ChaCha8Rng::seed_from_u64(seed))?,
        Some(("basis", k)) => StateVector::basis(
            n,
            k.parse()
                .map_err(|_| Error::Parse(format!("bad basis index {k:?}")))?,
        )?,
        _ => return Err(Error::Parse(format!("unknown state {state:?}"))),
    };
    let p = quantum_win_probability(&inst.game, &psi)?;
    let f = fidelity(&psi, &target)?;
    Ok(match format {
        Format::Csv => format!(
            "instance,queries,state,win_probability,fidelity\n{},{},{},{:.12},{:.12}\n",
            inst.name,
            inst.game.query_set(),
            state,
            p,
            f
        ),
        Format::Json => {
            let v = json!({
                "schema_version": SCHEMA_VERSION,
                "instance": inst.name,
                "queries": inst.game.query_set().to_string(),
                "state": state,
                "win_probability": p,
                "fidelity": f,
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
    })
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            let mut tmp = path.clone().into_os_string();
            tmp.push(format!(".tmp{}", std::process::id()));
            let tmp = PathBuf::from(tmp);
            fs::write(&tmp, text)?;
            fs::rename(&tmp, path).inspect_err(|_| {
                let _ = fs::remove_file(&tmp);
            })?;
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Verification(_) => 1,
        Error::Parse(_) => 3,
        Error::CapExceeded { .. } => 4,
        Error::Io(_) => 6,
        _ => 5,
    }
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let (text, ok) = match &cli.command {
        Command::Value(a) => (cmd_value(a, cli.format)?, true),
        Command::Bounds(a) => (cmd_bounds(a, cli.format)?, true),
        Command::Refute(a) => (cmd_refute(a, cli.format)?, true),
        Command::ClusterTable { n_max, cap } => {
            (cmd_cluster_table(*n_max, *cap, cli.format)?, true)
        }
        Command::Toric { l } => (cmd_toric(*l, cli.format)?, true),
        Command::Polytope { tol } => cmd_polytope(*tol, cli.format)?,
        Command::Qsim {
            instance,
            state,
            seed,
        } => (cmd_qsim(instance, state, *seed, cli.format)?, true),
    };
    write_output(&cli.out, &text)?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if cli.workers > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global();
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
