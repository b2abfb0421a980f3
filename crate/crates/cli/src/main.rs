//! Batch front end: load diagrams or certificates, run a construction or a
//! check, and write JSON (or DOT) into `--out` or onto stdout.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 input error, 3 horizon exhausted.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use bratteli::absorption::{run_absorption, AbsorptionCertificate, QSpec};
use bratteli::counts::{counting_telescope, is_simple_at_horizon, TelescopePlan};
use bratteli::diagram::{validate, DiagramJson};
use bratteli::dot::render_dot;
use bratteli::fixtures;
use bratteli::oracle::{
    check_absorption, check_lemma_clauses, check_main1, check_measure, check_minimality_approx, invariant_weightings,
    Report, SplitView,
};
use bratteli::partition::PartitionJson;
use bratteli::paths::{y_paths, DEFAULT_PATH_CAP};
use bratteli::splitting::{run_splitting, SSequence, SplitCertificate, SplitConfig};
use bratteli::telescope::telescope;
use bratteli::{BratteliDiagram, Error, Subdiagram};

#[derive(Parser, Debug)]
#[command(name = "bratteli", version, about = "Finite-depth splitting and absorption for Bratteli diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Input JSON file (diagram or certificate, depending on the subcommand).
    input: Option<PathBuf>,
    /// Built-in fixture instead of a file: odometer, two_vertex, two_chain,
    /// forked, stationary, disconnected, full, or random:<i>.
    #[arg(long, conflicts_with = "input")]
    fixture: Option<String>,
    /// Truncation depth N; defaults to the depth of the input.
    #[arg(long)]
    depth: Option<usize>,
    /// Maximum number of enumerated paths.
    #[arg(long, default_value_t = DEFAULT_PATH_CAP)]
    cap: usize,
    /// Seed for random fixtures and sampled checks.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output directory; without it the main result goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct CheckOpts {
    /// Levels below the top that clause checks leave out.
    #[arg(long, default_value_t = 2)]
    slack: usize,
    /// Cylinder depth for the minimality check.
    #[arg(long, default_value_t = 2)]
    resolution: usize,
    /// Sampled transports in the measure check.
    #[arg(long, default_value_t = 50)]
    samples: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the standard-diagram and subdiagram invariants.
    Validate(Common),
    /// Telescope to explicit levels, or by the counting construction.
    Telescope {
        #[command(flatten)]
        common: Common,
        /// Comma-separated levels starting at 0.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
    },
    /// Build the refined relation and its certificate.
    Split {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        checks: CheckOpts,
        /// `diagonal`, `tail`, or a JSON file with a list of partitions of Y.
        #[arg(long, default_value = "diagonal")]
        s: String,
    },
    /// Absorb an extension Q of R|Y with M copies.
    Absorb {
        #[command(flatten)]
        common: Common,
        /// Number of copies M.
        #[arg(long, default_value_t = 2)]
        copies: usize,
        /// `tail`, `full`, `full-from:<n>`, or a JSON file with a list of partitions of Y.
        #[arg(long, default_value = "tail")]
        q: String,
    },
    /// Recheck a split or absorption certificate from scratch.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        checks: CheckOpts,
    },
    /// Invariant weightings of a diagram, or the measure checks of a split certificate.
    Measures {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Graphviz rendering of a diagram or of an absorption certificate.
    Render {
        #[command(flatten)]
        common: Common,
        /// Draw no subdiagram.
        #[arg(long)]
        plain: bool,
    },
}

/// A failure that ends the run with a specific exit code.
struct Exit {
    code: u8,
    message: String,
}

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Exhausted { .. } => 3,
            Error::Construction { .. } => 1,
            _ => 2,
        };
        Exit { code, message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> Exit {
    Exit { code: 2, message: message.into() }
}

type CliResult<T> = std::result::Result<T, Exit>;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| input_error(format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column())))
}

fn load_fixture(name: &str, depth: usize, seed: u64) -> CliResult<(BratteliDiagram, Subdiagram)> {
    Ok(match name {
        "odometer" => fixtures::odometer(depth),
        "two_vertex" => fixtures::two_vertex(depth),
        "two_chain" => fixtures::two_chain(depth),
        "forked" => fixtures::forked(depth),
        "stationary" => fixtures::stationary(depth),
        "disconnected" => fixtures::disconnected(depth),
        "full" => {
            let (d, _) = fixtures::two_vertex(depth);
            let s = Subdiagram::full(&d);
            (d, s)
        }
        other => {
            let i: usize = other
                .strip_prefix("random:")
                .and_then(|i| i.parse().ok())
                .ok_or_else(|| input_error(format!("unknown fixture {other:?}")))?;
            fixtures::random_zoo(seed, i + 1, depth).pop().expect("zoo has i + 1 members")
        }
    })
}

/// A diagram with its subdiagram, from a file or a named fixture.
fn load_diagram(c: &Common) -> CliResult<(BratteliDiagram, Option<Subdiagram>)> {
    match (&c.input, &c.fixture) {
        (_, Some(name)) => {
            let (d, s) = load_fixture(name, c.depth.unwrap_or(8), c.seed)?;
            Ok((d, Some(s)))
        }
        (Some(path), None) => Ok(read_json::<DiagramJson>(path)?.into_diagram()?),
        (None, None) => Err(input_error("give an input file or --fixture")),
    }
}

fn load_with_sub(c: &Common) -> CliResult<(BratteliDiagram, Subdiagram, usize)> {
    let (d, s) = load_diagram(c)?;
    let s = s.ok_or_else(|| input_error("the input has no subdiagram"))?;
    let depth = c.depth.unwrap_or(d.depth());
    Ok((d, s, depth))
}

fn input_path(c: &Common) -> CliResult<&Path> {
    c.input.as_deref().ok_or_else(|| input_error("this subcommand reads a certificate file"))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// Write `files` into `--out`, or print the first one.
fn emit(c: &Common, files: &[(&str, String)]) -> CliResult<()> {
    match &c.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| input_error(format!("{}: {e}", dir.display())))?;
            for (name, body) in files {
                let path = dir.join(name);
                fs::write(&path, body).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
            }
        }
        None => print!("{}", files[0].1),
    }
    Ok(())
}

fn verdict(report: &Report) -> u8 {
    if !report.pass() {
        1
    } else if report.exhausted() {
        3
    } else {
        0
    }
}

fn summarize(report: &Report) {
    for c in report.failures() {
        eprintln!("FAIL {} {:?}: {:?}", c.name, c.level, c.status);
    }
    let skipped = report.checks.iter().filter(|c| matches!(c.status, bratteli::oracle::Status::Skipped { .. })).count();
    eprintln!("{} checks, {} failed, {skipped} skipped", report.checks.len(), report.failures().count());
}

fn parse_partitions(
    spec: &str,
    diagram: &BratteliDiagram,
    sub: &Subdiagram,
    depth: usize,
) -> CliResult<Vec<bratteli::Partition>> {
    let list: Vec<PartitionJson> = read_json(Path::new(spec))?;
    let truncated = diagram.truncated(depth);
    let y = y_paths(&truncated, &sub.truncated(depth), depth)?;
    Ok(list.iter().map(|p| p.to_partition(&truncated, &y)).collect::<bratteli::Result<_>>()?)
}

fn split_checks(view: &SplitView, o: &CheckOpts, seed: u64) -> CliResult<Report> {
    let mut report = check_lemma_clauses(view, o.slack);
    report.merge(check_main1(view));
    report.merge(check_minimality_approx(view, o.resolution));
    report.merge(check_measure(view, seed, o.samples)?);
    Ok(report)
}

fn cmd_validate(c: &Common) -> CliResult<u8> {
    let (d, s) = load_diagram(c)?;
    let depth = c.depth.unwrap_or(d.depth()).min(d.depth());
    let d = d.truncated(depth);
    let s = s.map(|s| s.truncated(depth));
    let report = validate(&d, s.as_ref());
    for v in &report.violations {
        eprintln!("violation: {} at {}", v.kind, v.location);
    }
    #[derive(Serialize)]
    struct Out<'a> {
        validation: &'a bratteli::diagram::ValidationReport,
        simplicity: bratteli::counts::SimplicityCheck,
    }
    let out = Out { validation: &report, simplicity: is_simple_at_horizon(&d, depth) };
    emit(c, &[("validation.json", to_json(&out))])?;
    Ok(if report.pass() { 0 } else { 1 })
}

fn cmd_telescope(c: &Common, levels: &Option<Vec<usize>>) -> CliResult<u8> {
    let (d, s, depth) = load_with_sub(c)?;
    let (d, s) = (d.truncated(depth), s.truncated(depth));
    let plan = match levels {
        Some(l) => TelescopePlan::new(l.clone())?,
        None => counting_telescope(&d, &s)?,
    };
    let (t, ts, _) = telescope(&d, &plan, Some(&s))?;
    eprintln!("plan {:?}", plan.levels());
    emit(c, &[("telescoped.json", to_json(&DiagramJson::from_diagram(&t, ts.as_ref())))])?;
    Ok(0)
}

fn cmd_split(c: &Common, o: &CheckOpts, s_arg: &str) -> CliResult<u8> {
    let (d, s, depth) = load_with_sub(c)?;
    let spec = match s_arg {
        "diagonal" => SSequence::Diagonal,
        "tail" => SSequence::Tail,
        file => SSequence::Explicit(parse_partitions(file, &d, &s, depth)?),
    };
    let ctx = run_splitting(&d, &s, &spec, depth, &SplitConfig { cap: c.cap })?;
    let cert = ctx.certificate();
    let view = SplitView::load(&cert, c.cap)?;
    let report = split_checks(&view, o, c.seed)?;
    summarize(&report);
    emit(c, &[("certificate.json", to_json(&cert)), ("report.json", to_json(&report))])?;
    Ok(verdict(&report))
}

fn cmd_absorb(c: &Common, copies: usize, q_arg: &str) -> CliResult<u8> {
    let (d, s, depth) = load_with_sub(c)?;
    let spec = match q_arg {
        "tail" => QSpec::Tail,
        "full" => QSpec::FullFrom(1),
        other => match other.strip_prefix("full-from:") {
            Some(n) => QSpec::FullFrom(n.parse().map_err(|_| input_error(format!("bad level in {other:?}")))?),
            None => QSpec::Explicit(parse_partitions(other, &d, &s, depth)?),
        },
    };
    let run = run_absorption(&d, &s, &spec, copies, depth, &SplitConfig { cap: c.cap })?;
    let report = run.certificate.checks.clone();
    summarize(&report);
    emit(c, &[("absorption.json", to_json(&run.certificate)), ("report.json", to_json(&report))])?;
    Ok(verdict(&report))
}

fn cmd_verify(c: &Common, o: &CheckOpts) -> CliResult<u8> {
    let path = input_path(c)?;
    let value: serde_json::Value = read_json(path)?;
    let report = if value.get("copies").is_some() {
        let cert: AbsorptionCertificate =
            serde_json::from_value(value).map_err(|e| input_error(format!("absorption certificate: {e}")))?;
        let mut report = check_absorption(&cert, c.cap)?;
        let view = SplitView::load(&cert.split, c.cap)?;
        report.merge(check_lemma_clauses(&view, o.slack));
        report.merge(check_main1(&view));
        report
    } else {
        let cert: SplitCertificate =
            serde_json::from_value(value).map_err(|e| input_error(format!("split certificate: {e}")))?;
        split_checks(&SplitView::load(&cert, c.cap)?, o, c.seed)?
    };
    summarize(&report);
    emit(c, &[("report.json", to_json(&report))])?;
    Ok(verdict(&report))
}

fn cmd_measures(c: &Common, samples: usize) -> CliResult<u8> {
    if let Some(path) = &c.input {
        let value: serde_json::Value = read_json(path)?;
        if value.get("working").is_some() {
            let cert: SplitCertificate =
                serde_json::from_value(value).map_err(|e| input_error(format!("split certificate: {e}")))?;
            let report = check_measure(&SplitView::load(&cert, c.cap)?, c.seed, samples)?;
            summarize(&report);
            emit(c, &[("measures.json", to_json(&report))])?;
            return Ok(verdict(&report));
        }
    }
    let (d, _) = load_diagram(c)?;
    let depth = c.depth.unwrap_or(d.depth()).min(d.depth());
    let ws = invariant_weightings(&d, depth)?;
    #[derive(Serialize)]
    struct Out {
        depth: usize,
        variables: usize,
        dimension: usize,
        /// `extreme_points[i][n][v]` is `q_n(v)` as an exact fraction.
        extreme_points: Vec<Vec<Vec<String>>>,
    }
    let out = Out {
        depth,
        variables: ws.variables,
        dimension: ws.dimension,
        extreme_points: ws
            .extreme_points
            .iter()
            .map(|w| w.q.iter().map(|level| level.iter().map(|x| x.to_string()).collect()).collect())
            .collect(),
    };
    emit(c, &[("measures.json", to_json(&out))])?;
    Ok(0)
}

fn cmd_render(c: &Common, plain: bool) -> CliResult<u8> {
    let dot = match (&c.input, &c.fixture) {
        (Some(path), None) => {
            let value: serde_json::Value = read_json(path)?;
            if value.get("copies").is_some() {
                let cert: AbsorptionCertificate =
                    serde_json::from_value(value).map_err(|e| input_error(format!("absorption certificate: {e}")))?;
                let (enl, z) = cert.enlarged.into_diagram()?;
                let z = z.ok_or_else(|| input_error("enlarged diagram lacks the replica"))?;
                let base = cert.base.subdiagram.as_ref().ok_or_else(|| input_error("base lacks its subdiagram"))?;
                let base_sub = Subdiagram::from_names(&enl, &base.w, &base.f)?;
                if plain { render_dot(&enl, &[]) } else { render_dot(&enl, &[&base_sub, &z]) }
            } else {
                let json: DiagramJson =
                    serde_json::from_value(value).map_err(|e| input_error(format!("diagram: {e}")))?;
                let (d, s) = json.into_diagram()?;
                match (&s, plain) {
                    (Some(s), false) => render_dot(&d, &[s]),
                    _ => render_dot(&d, &[]),
                }
            }
        }
        _ => {
            let (d, s) = load_diagram(c)?;
            match (&s, plain) {
                (Some(s), false) => render_dot(&d, &[s]),
                _ => render_dot(&d, &[]),
            }
        }
    };
    emit(c, &[("diagram.dot", dot)])?;
    Ok(0)
}

fn run(cli: Cli) -> CliResult<u8> {
    match &cli.command {
        Command::Validate(c) => cmd_validate(c),
        Command::Telescope { common, levels } => cmd_telescope(common, levels),
        Command::Split { common, checks, s } => cmd_split(common, checks, s),
        Command::Absorb { common, copies, q } => cmd_absorb(common, *copies, q),
        Command::Verify { common, checks } => cmd_verify(common, checks),
        Command::Measures { common, samples } => cmd_measures(common, *samples),
        Command::Render { common, plain } => cmd_render(common, *plain),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
