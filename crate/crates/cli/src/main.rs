//! `hemischeme`: build, verify, certify and export the two 3-class schemes.
//!
//! Exit codes: 0 success / verdict pass, 1 construction or verification
//! failure, 2 usage error.

mod formats;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hemischeme::hxscheme::{self, FineClasses, PairSet, TraceSets};
use hemischeme::isocert::{self, CertifyOptions, Depth};
use hemischeme::pwscheme::{self, Hemisystem, SpreadCache};
use hemischeme::schemecore::{self, graph, RelationTable};
use hemischeme::{Error, FieldCtx};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "hemischeme", version, about = "Exact construction and isomorphism certificate for two 3-class schemes over GF(2^h)")]
struct Cli {
    /// Worker threads for pair sweeps (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a relation table.
    Build(TableArgs),
    /// Check the association-scheme axioms of a table.
    Verify(TableArgs),
    /// Run every route and check, and write the certificate.
    Certify(CertifyArgs),
    /// Export a fused class graph (graph6) or the spectral data (csv).
    Export(TableArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum Family {
    Hx,
    Pw,
    Fine,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum DepthArg {
    Full,
    Sampled,
}

impl From<DepthArg> for Depth {
    fn from(d: DepthArg) -> Depth {
        match d {
            DepthArg::Full => Depth::Full,
            DepthArg::Sampled => Depth::Sampled,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Graph6,
}

#[derive(Args, Debug)]
struct TableArgs {
    /// q = 2^h.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=4), required_unless_present = "input")]
    h: Option<u32>,
    #[arg(long, value_enum, default_value = "hx")]
    family: Family,
    /// `pw` tables come from the geometric route at full depth and the Klein route when sampled.
    #[arg(long, value_enum, default_value = "full")]
    depth: DepthArg,
    /// RNG seed, required with `--depth sampled`.
    #[arg(long)]
    seed: Option<u64>,
    /// Read a table written by `build --format json` instead of constructing one.
    #[arg(long, conflicts_with = "h")]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Comma-separated class indices to merge.
    #[arg(long, value_delimiter = ',')]
    classes: Option<Vec<usize>>,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    /// q = 2^h; full depth needs h <= 3.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=4))]
    h: u32,
    /// `full` checks every pair on every route; `sampled` checks seeded samples.
    #[arg(long, value_enum, default_value = "full")]
    depth: DepthArg,
    /// RNG seed, required with `--depth sampled`.
    #[arg(long)]
    seed: Option<u64>,
    /// Certificate path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidOptions(_) | Error::InvalidExponent(_) => Failure::Usage(e.to_string()),
            _ => Failure::Run(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("thread pool is configured once");
    }
    let result = match &cli.command {
        Command::Build(a) => cmd_build(a, cli.threads),
        Command::Verify(a) => cmd_verify(a, cli.threads),
        Command::Certify(a) => cmd_certify(a),
        Command::Export(a) => cmd_export(a, cli.threads),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn write_out(out: &Option<PathBuf>, bytes: &[u8]) -> io::Result<()> {
    match out {
        Some(p) => fs::write(p, bytes),
        None => io::stdout().lock().write_all(bytes),
    }
}

/// A constructed or loaded table with its header.
struct Loaded {
    header: Value,
    pairs: Vec<u32>,
    table: RelationTable,
}

fn load_table(a: &TableArgs, threads: Option<usize>) -> Result<Loaded, Failure> {
    if let Some(path) = &a.input {
        let text = fs::read_to_string(path)?;
        let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?;
        let (header, table) = formats::table_from_json(&v).map_err(Failure::Run)?;
        let pairs = v
            .get("pairs")
            .and_then(Value::as_array)
            .map(|p| p.iter().filter_map(|x| x.as_u64().map(|x| x as u32)).collect())
            .unwrap_or_default();
        return Ok(Loaded { header, pairs, table });
    }
    let h = a.h.expect("clap enforces --h or --input");
    if h > 3 {
        return Err(Failure::Usage("relation tables are built for h <= 3; use certify --depth sampled at h = 4".into()));
    }
    if a.depth == DepthArg::Sampled && a.seed.is_none() {
        return Err(Failure::Usage("sampled depth requires --seed".into()));
    }
    let ctx = FieldCtx::new(h)?;
    let pairs = PairSet::new(&ctx);
    let ts = TraceSets::new(&ctx)?;
    let mut header = json!({
        "artifact_version": isocert::ARTIFACT_VERSION,
        "depth": if a.depth == DepthArg::Full { "full" } else { "sampled" },
        "family": a.family,
        "h": h,
        "modulus_hex": ctx.modulus_hex(),
        "n": pairs.len(),
        "omega": ctx.omega().bits(),
        "q": ctx.q(),
        "seed": a.seed,
        "threads": threads,
    });
    let table = match a.family {
        Family::Hx => hxscheme::hx_table(&ctx, &pairs, &ts)?,
        Family::Fine => {
            let fine = FineClasses::new(&ctx);
            header["labels"] = json!(fine.labels().iter().map(|&(a, b)| [a.bits(), b.bits()]).collect::<Vec<_>>());
            hxscheme::fine_table(&ctx, &pairs, &fine)?
        }
        Family::Pw => match a.depth {
            DepthArg::Full => {
                let hemi = Hemisystem::new(&ctx, &pairs)?;
                let lines = hemi.line_set();
                pwscheme::geometric_table(&ctx, &lines, &SpreadCache::new(&ctx, &lines))?
            }
            DepthArg::Sampled => pwscheme::klein_table(&ctx, &pairs)?,
        },
    };
    header["classes"] = json!(table.d());
    header["valencies"] = json!(table.row_valencies(0)[1..]);
    header["degenerate"] = json!(table.is_degenerate());
    let pairs = pairs.reps().iter().map(|t| t.bits()).collect();
    Ok(Loaded { header, pairs, table })
}

fn cmd_build(a: &TableArgs, threads: Option<usize>) -> CmdResult {
    let l = load_table(a, threads)?;
    let bytes = match a.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut s = serde_json::to_string(&formats::table_json(l.header, &l.pairs, &l.table)).expect("serializable");
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => {
            let mut buf = Vec::new();
            formats::table_csv(&l.header, &l.table, &mut buf)?;
            buf
        }
        Format::Graph6 => return Err(Failure::Usage("build writes json or csv; use export for graph6".into())),
    };
    write_out(&a.out, &bytes)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(a: &TableArgs, threads: Option<usize>) -> CmdResult {
    let l = load_table(a, threads)?;
    let t = &l.table;
    let mut report = json!({
        "header": l.header,
        "class_pair_counts": t.class_pair_counts()[1..],
        "empty_classes": t.empty_classes(),
    });
    let ok = match schemecore::verify_scheme(t) {
        Ok(ints) => {
            report["intersection_numbers"] = json!(ints);
            report["scheme"] = json!(true);
            if let Some(classes) = &a.classes {
                match graph::srg_check(t, classes) {
                    Ok(p) => report["srg"] = json!(p),
                    Err(e) => report["srg_error"] = json!(e.to_string()),
                }
            }
            true
        }
        Err(e) => {
            report["scheme"] = json!(false);
            report["error"] = json!(e.to_string());
            false
        }
    };
    let mut s = serde_json::to_string_pretty(&report).expect("serializable");
    s.push('\n');
    write_out(&a.out, s.as_bytes())?;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_certify(a: &CertifyArgs) -> CmdResult {
    let opts = CertifyOptions { h: a.h, depth: a.depth.into(), seed: a.seed };
    let cert = isocert::certify(opts)?;
    let mut s = serde_json::to_string_pretty(&cert.to_json()).expect("serializable");
    s.push('\n');
    write_out(&a.out, s.as_bytes())?;
    eprintln!(
        "h = {}: verdict {} (hash {})",
        a.h,
        if cert.verdict.pass { "pass" } else { "FAIL" },
        cert.hash
    );
    for b in &cert.verdict.failed_blocks {
        eprintln!("failed block: {b}");
    }
    Ok(if cert.verdict.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_export(a: &TableArgs, threads: Option<usize>) -> CmdResult {
    let format = a.format.unwrap_or(Format::Graph6);
    let l = load_table(a, threads)?;
    match format {
        Format::Graph6 => {
            let classes = a
                .classes
                .as_ref()
                .ok_or_else(|| Failure::Usage("graph6 export needs --classes".into()))?;
            let counts = l.table.class_pair_counts();
            if classes.iter().all(|&c| counts.get(c).is_none_or(|&x| x == 0) || c == 0) {
                return Err(Failure::Run(format!("class union {classes:?} is empty")));
            }
            let adj = graph::adjacency(&l.table, classes)?;
            write_out(&a.out, &formats::graph6(&adj))?;
        }
        Format::Csv => {
            let ints = schemecore::verify_scheme(&l.table)?;
            let mut buf = Vec::new();
            formats::spectral_csv(&ints, &mut buf).map_err(Failure::Run)?;
            write_out(&a.out, &buf)?;
        }
        Format::Json => return Err(Failure::Usage("export writes graph6 or csv; use build for json".into())),
    }
    Ok(ExitCode::SUCCESS)
}
