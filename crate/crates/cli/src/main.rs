use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kleinian::config::JobConfig;
use kleinian::export::{off_mesh, parse_word, presentation_text, word_text, RunExport};
use kleinian::group::{eval_word, GroupElement};
use kleinian::master::{run_master, Backend, RunResult};
use kleinian::{Error, Result};

#[derive(Parser)]
#[command(name = "kleinian", version, about = "Fundamental domains and presentations of arithmetic Kleinian groups")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnumArg {
    Det,
    Prob,
}

#[derive(Args)]
struct Common {
    /// Job configuration (TOML).
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured enumeration backend.
    #[arg(long = "enum", value_enum)]
    backend: Option<EnumArg>,
    /// Print the per-routine timing breakdown on stderr.
    #[arg(long)]
    timings: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute a normalized basis and summarize the fundamental domain.
    Domain(Common),
    /// Print the presentation read off the fundamental domain.
    Presentation(Common),
    /// Write a group element as a word in the generators.
    Reduce {
        #[command(flatten)]
        common: Common,
        /// Comma-separated integer coordinates on the order basis.
        #[arg(long, conflicts_with = "word")]
        coords: Option<String>,
        /// A word such as "g1 g2^-1 g3", evaluated and then reduced.
        #[arg(long)]
        word: Option<String>,
    },
    /// Measured domain volume against the covolume formula.
    Volume(Common),
    /// The Dedekind zeta value and the covolume formula (no domain computation).
    Zeta {
        config: PathBuf,
    },
    /// Write JSON, OFF and presentation files.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        off: Option<PathBuf>,
        #[arg(long)]
        presentation: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded(_) => 2,
        Error::PrecisionExhausted(_)
        | Error::NonFiniteOrder(_)
        | Error::NotPositiveDefinite(_)
        | Error::DegenerateBasePoint(_)
        | Error::OriginFixed(_)
        | Error::DegenerateIncidence(..) => 3,
        Error::Config(_)
        | Error::Parse(_)
        | Error::Io(_)
        | Error::NotAtr { .. }
        | Error::ReduciblePoly(_)
        | Error::IndexPrimeUnspecified(_)
        | Error::NotMaximal
        | Error::NotKleinian(_) => 4,
        Error::NotPaired(_) | Error::UnboundedDomain => 1,
    }
}

fn load(common: &Common) -> Result<JobConfig> {
    let mut cfg = JobConfig::load(&common.config)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(b) = common.backend {
        cfg.enumeration.backend = match b {
            EnumArg::Det => Backend::Deterministic,
            EnumArg::Prob => Backend::Probabilistic,
        };
    }
    Ok(cfg)
}

fn print_timings(r: &RunResult) {
    let t = &r.basis.timings;
    eprintln!("timings (s):");
    eprintln!("  zeta                  {:.3}", r.zeta_seconds);
    eprintln!("  enumerate             {:.3}", t.enumerate);
    eprintln!("  keep_same_group       {:.3}", t.keep_same_group);
    eprintln!("  check_pairing         {:.3}", t.check_pairing);
    eprintln!("  check_cycle_condition {:.3}", t.check_cycle_condition);
    eprintln!("  check_complete        {:.3}", t.check_complete);
    eprintln!("  is_full_group         {:.3}", t.is_full_group);
    eprintln!("  total                 {:.3}", r.total_seconds);
}

fn run(common: &Common) -> Result<(JobConfig, RunResult)> {
    let cfg = load(common)?;
    let order = cfg.order()?;
    let opts = cfg.master_options()?;
    let r = match run_master(&order, &opts) {
        Ok(r) => r,
        Err(e @ Error::BudgetExceeded(_)) => {
            if let Some(p) = &cfg.output.json {
                let note = serde_json::json!({ "status": "budget_exceeded", "error": e.to_string(), "seed": cfg.seed });
                std::fs::write(p, serde_json::to_string_pretty(&note).unwrap_or_default())?;
            }
            return Err(e);
        }
        Err(e) => return Err(e),
    };
    if common.timings {
        print_timings(&r);
    }
    Ok((cfg, r))
}

fn summary(r: &RunResult) {
    let d = &r.basis.domain;
    let rep = &r.basis.report;
    println!("basis elements     {}", r.basis.elements.len());
    println!("faces              {}", d.faces.len());
    println!("edges              {}", d.edges.len());
    println!("vertices           {}", d.vertices.iter().filter(|v| !v.faces.is_empty()).count());
    println!("ideal vertices     {}", d.vertices.iter().filter(|v| v.ideal && !v.faces.is_empty()).count());
    println!("volume             {:.10}", r.basis.volume);
    println!("covolume           {:.10}", r.covolume);
    println!("ratio              {:.10}", r.volume_ratio());
    println!("edge cycles        {}", rep.cycle_count);
    println!("tangency cycles    {}", rep.tangency_count);
    println!("face pairing       {}", rep.paired);
    println!("cycle condition    {} (max angle error {:.2e})", rep.cycles_ok, rep.max_angle_error);
    println!("complete           {}", rep.complete);
    println!("euler              {}", rep.euler.map_or("-".into(), |e| e.to_string()));
    println!("enumeration level  {}", r.basis.enumeration_level);
    println!("conjugations       {}", r.attempts - 1);
}

fn parse_coords(s: &str) -> Result<Vec<i128>> {
    s.split(',')
        .map(|t| t.trim().parse::<i128>().map_err(|e| Error::Parse(format!("coordinate {t:?}: {e}"))))
        .collect()
}

fn reduce(common: &Common, coords: Option<&str>, word: Option<&str>) -> Result<()> {
    let (cfg, r) = run(common)?;
    let group = &r.group;
    let gens = r.presentation.generator_elements(&r.basis.elements);
    let gamma: GroupElement = match (coords, word) {
        (Some(c), _) => {
            let c = parse_coords(c)?;
            let a = group.arithmetic().expect("arithmetic run");
            if c.len() != a.order.dim() {
                return Err(Error::Parse(format!("expected {} coordinates, found {}", a.order.dim(), c.len())));
            }
            let small: Vec<i64> = c.iter().map(|&x| i64::try_from(x).map_err(|_| Error::Parse("coordinate too large".into()))).collect::<Result<_>>()?;
            if !a.order.has_unit_norm(&small) {
                return Err(Error::Parse("element does not have reduced norm 1".into()));
            }
            group.from_coords(c)
        }
        (None, Some(w)) => eval_word(group, &gens, &parse_word(w, gens.len())?)?,
        (None, None) => return Err(Error::Config("give --coords or --word".into())),
    };
    let budget = cfg.budget()?;
    match r.presentation.word_for(group, &r.basis.elements, &gamma, &budget)? {
        Some(w) => {
            let back = eval_word(group, &gens, &w)?;
            println!("word   {}", if w.is_empty() { "(identity)".into() } else { word_text(&w) });
            println!("length {}", w.len());
            println!("check  {}", group.same(&back, &gamma));
        }
        None => println!("element is not in the group"),
    }
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn main_inner(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Domain(c) => {
            let (_, r) = run(&c)?;
            summary(&r);
        }
        Cmd::Presentation(c) => {
            let (_, r) = run(&c)?;
            print!("{}", presentation_text(&r.presentation));
        }
        Cmd::Reduce { common, coords, word } => reduce(&common, coords.as_deref(), word.as_deref())?,
        Cmd::Volume(c) => {
            let (_, r) = run(&c)?;
            println!("volume   {:.10}", r.basis.volume);
            println!("covolume {:.10}", r.covolume);
            println!("ratio    {:.10}", r.volume_ratio());
        }
        Cmd::Zeta { config } => {
            let cfg = JobConfig::load(&config)?;
            let order = cfg.order()?;
            let z = order.algebra.field.dedekind_zeta_2(cfg.field.zeta_prime_bound)?;
            println!("discriminant {}", order.algebra.field.discriminant());
            println!("zeta(2)      {:.12}", z.value);
            println!("error bound  {:.2e}", z.error_estimate);
            println!("covolume     {:.10}", order.covolume(z.value)?);
        }
        Cmd::Export { common, json, off, presentation } => {
            let (cfg, r) = run(&common)?;
            let json = json.or(cfg.output.json.clone());
            let off = off.or(cfg.output.off.clone());
            let pres = presentation.or(cfg.output.presentation.clone());
            if json.is_none() && off.is_none() && pres.is_none() {
                return Err(Error::Config("no output paths given".into()));
            }
            if let Some(p) = json {
                write(&p, &RunExport::new(&r, cfg.name.clone(), cfg.seed).to_json()?)?;
            }
            if let Some(p) = off {
                write(&p, &off_mesh(&r.basis.domain))?;
            }
            if let Some(p) = pres {
                write(&p, &presentation_text(&r.presentation))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
