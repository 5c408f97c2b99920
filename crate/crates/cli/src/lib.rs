//! Command-line front end for `bratteli-core`.
//!
//! Every subcommand prints JSON by default and plain text with `--plain`.
//! Exit codes: 0 success, 1 negative verdict (a failed check or
//! inequivalent diagrams), 2 input or usage error.

use std::fmt::Write as _;
use std::path::{Path as FsPath, PathBuf};

use bratteli_core::crossed_product::{
    af_tower, af_tower_parallel, block_decomposition, tower_doc, tower_dot,
};
use bratteli_core::dynamics::{count_paths, enumerate_paths, iterate, n_n_report};
use bratteli_core::equivalence::{
    check_certificate, find_equivalence, EquivalenceCertificate, Verdict,
};
use bratteli_core::format::{load_diagram, serialize_diagram};
use bratteli_core::operator_model::{
    check_all, check_all_parallel, default_n_max, sample_embedding_checks, RelationReport,
};
use bratteli_core::{Diagram, Path, VertexId};
use clap::{Parser, Subcommand};
use serde::Serialize;

mod schema;

/// Largest number of paths any subcommand enumerates.
const MAX_PATHS: u64 = 1_000_000;
/// Largest truncated basis accepted by `check` and `crossed`.
const MAX_BASIS: u64 = 20_000;

#[derive(Debug, Parser)]
#[command(
    name = "bratteli",
    version,
    about = "Stationary ordered Bratteli diagrams: dynamics, relation checks, AF towers, equivalence"
)]
struct Cli {
    /// Plain text instead of JSON.
    #[arg(long, global = true)]
    plain: bool,
    /// Evaluate independent pieces concurrently.
    #[arg(long, global = true)]
    parallel: bool,
    /// Print the JSON schema of a subcommand's output and exit.
    #[arg(long, value_name = "SUBCOMMAND")]
    schema: Option<String>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Counts, extremal edges, incidence matrix and primitivity.
    Info { file: PathBuf },
    /// Enumerate paths of a given length in colexicographic order.
    Paths {
        file: PathBuf,
        #[arg(long)]
        length: usize,
        /// Only paths ending at this vertex.
        #[arg(long)]
        end: Option<String>,
    },
    /// Apply the successor map (negative counts apply its inverse).
    Vershik {
        file: PathBuf,
        /// Comma-separated edge ids, e.g. A1,A2.
        #[arg(long)]
        path: String,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        iterate: i64,
    },
    /// Successor chains of the paths of a given length.
    Orbit {
        file: PathBuf,
        #[arg(long)]
        length: usize,
        #[arg(long)]
        vertex: Option<String>,
    },
    /// Block sizes, dimensions and inclusion multiplicities of A_1 ⊆ A_2 ⊆ ...
    #[command(name = "af-tower")]
    AfTower {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Graphviz output.
        #[arg(long)]
        dot: bool,
    },
    /// Verify every relation family on the truncated model.
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Largest |n| for the power laws (default: n_sup + 1).
        #[arg(long)]
        nmax: Option<u64>,
        /// Accepted for compatibility; JSON is the default.
        #[arg(long)]
        json: bool,
    },
    /// Seeded checks that the crossed-product representation is a
    /// *-homomorphism, plus linear independence of basis images.
    Crossed {
        file: PathBuf,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Decide equivalence of two diagrams.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        /// Write the certificate found to this file.
        #[arg(long)]
        certificate: Option<PathBuf>,
        /// Validate this certificate instead of searching.
        #[arg(long, conflicts_with = "certificate")]
        verify: Option<PathBuf>,
    },
    /// Rewrite a diagram (e.g. a .sub substitution) in .bd form.
    Convert {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Exit code and captured output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandResult {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandResult {
    fn ok(stdout: String) -> Self {
        Self::with_code(0, stdout)
    }

    fn with_code(code: i32, stdout: String) -> Self {
        Self {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn input_error(message: impl std::fmt::Display) -> Self {
        Self {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

struct Fail(CommandResult);

impl<E: std::fmt::Display> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail(CommandResult::input_error(e))
    }
}

type Outcome = Result<CommandResult, Fail>;

/// Runs one command line (including the program name).
pub fn run<I, T>(args: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    CommandResult::ok(rendered)
                }
                _ => CommandResult {
                    code: 2,
                    stdout: String::new(),
                    stderr: rendered,
                },
            };
        }
    };
    if let Some(name) = &cli.schema {
        return match schema::schema(name) {
            Some(s) => CommandResult::ok(pretty(&s)),
            None => CommandResult::input_error(format!(
                "--schema: unknown subcommand `{name}` (expected one of {})",
                schema::SUBCOMMANDS.join(", ")
            )),
        };
    }
    let Some(command) = &cli.command else {
        return CommandResult::input_error("a subcommand is required (try --help)");
    };
    match dispatch(&cli, command) {
        Ok(r) | Err(Fail(r)) => r,
    }
}

fn dispatch(cli: &Cli, command: &Command) -> Outcome {
    match command {
        Command::Info { file } => info(cli, &load(file)?),
        Command::Paths { file, length, end } => paths(cli, &load(file)?, *length, end.as_deref()),
        Command::Vershik {
            file,
            path,
            iterate,
        } => vershik(cli, &load(file)?, path, *iterate),
        Command::Orbit {
            file,
            length,
            vertex,
        } => orbit(cli, &load(file)?, *length, vertex.as_deref()),
        Command::AfTower { file, levels, dot } => tower(cli, &load(file)?, *levels, *dot),
        Command::Check {
            file, depth, nmax, ..
        } => check(cli, file, &load(file)?, *depth, *nmax),
        Command::Crossed {
            file,
            depth,
            samples,
            seed,
        } => crossed(cli, &load(file)?, *depth, *samples, *seed),
        Command::Equiv {
            a,
            b,
            certificate,
            verify,
        } => equiv(cli, a, b, certificate.as_deref(), verify.as_deref()),
        Command::Convert { file, output } => convert(file, output.as_deref()),
    }
}

fn load(file: &FsPath) -> Result<Diagram, Fail> {
    Ok(load_diagram(file)?)
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
    s.push('\n');
    s
}

fn vertex(d: &Diagram, flag: &str, name: &str) -> Result<VertexId, Fail> {
    d.vertex_by_name(name).ok_or_else(|| {
        Fail(CommandResult::input_error(format!(
            "{flag}: unknown vertex `{name}` (vertices: {})",
            d.vertex_names().join(" ")
        )))
    })
}

fn require_length(flag: &str, length: usize) -> Result<(), Fail> {
    if length == 0 {
        return Err(Fail(CommandResult::input_error(format!(
            "{flag} must be at least 1"
        ))));
    }
    Ok(())
}

fn guard_paths(d: &Diagram, flag: &str, length: usize) -> Result<(), Fail> {
    let count = count_paths(d, length, None);
    if count > MAX_PATHS {
        return Err(Fail(CommandResult::input_error(format!(
            "{flag} {length}: {} paths exceeds the limit of {MAX_PATHS}",
            if count == u64::MAX {
                "too many".to_owned()
            } else {
                count.to_string()
            }
        ))));
    }
    Ok(())
}

fn guard_depth(d: &Diagram, depth: usize) -> Result<(), Fail> {
    if depth < 3 {
        return Err(Fail(CommandResult::input_error(format!(
            "--depth must be at least 3, got {depth}"
        ))));
    }
    let basis = (1..=depth).fold(0u64, |acc, l| acc.saturating_add(count_paths(d, l, None)));
    if basis > MAX_BASIS {
        return Err(Fail(CommandResult::input_error(format!(
            "--depth {depth}: truncated basis of {basis} paths exceeds the limit of {MAX_BASIS}"
        ))));
    }
    Ok(())
}

fn names(d: &Diagram, edges: &[bratteli_core::EdgeId]) -> Vec<String> {
    edges.iter().map(|e| d.edge_name(*e).to_owned()).collect()
}

#[derive(Serialize)]
struct InfoDoc {
    vertices: Vec<String>,
    edges: Vec<EdgeDoc>,
    vertex_count: usize,
    edge_count: usize,
    minimal_edges: Vec<String>,
    maximal_edges: Vec<String>,
    /// Rows: source vertex; columns: target vertex.
    incidence: Vec<Vec<u64>>,
    primitive: bool,
}

#[derive(Serialize)]
struct EdgeDoc {
    id: String,
    source: String,
    target: String,
    rank: usize,
}

fn info(cli: &Cli, d: &Diagram) -> Outcome {
    let ext = d.extremal_edges();
    let doc = InfoDoc {
        vertices: d.vertex_names().to_vec(),
        edges: d
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                id: e.name.clone(),
                source: d.vertex_name(e.source).to_owned(),
                target: d.vertex_name(e.target).to_owned(),
                rank: e.rank,
            })
            .collect(),
        vertex_count: d.vertex_count(),
        edge_count: d.edge_count(),
        minimal_edges: names(d, &ext.minimal),
        maximal_edges: names(d, &ext.maximal),
        incidence: d.incidence_matrix(),
        primitive: d.is_primitive(),
    };
    if !cli.plain {
        return Ok(CommandResult::ok(pretty(&doc)));
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "vertices: {} ({})",
        doc.vertex_count,
        doc.vertices.join(" ")
    );
    let _ = writeln!(out, "edges: {}", doc.edge_count);
    for e in &doc.edges {
        let _ = writeln!(
            out,
            "  {} {} -> {} rank {}",
            e.id, e.source, e.target, e.rank
        );
    }
    let _ = writeln!(out, "minimal: {}", doc.minimal_edges.join(" "));
    let _ = writeln!(out, "maximal: {}", doc.maximal_edges.join(" "));
    let _ = writeln!(out, "incidence:");
    for row in &doc.incidence {
        let row: Vec<String> = row.iter().map(u64::to_string).collect();
        let _ = writeln!(out, "  {}", row.join(" "));
    }
    let _ = writeln!(out, "primitive: {}", doc.primitive);
    Ok(CommandResult::ok(out))
}

#[derive(Serialize)]
struct PathsDoc {
    length: usize,
    end: Option<String>,
    count: usize,
    paths: Vec<String>,
}

fn paths(cli: &Cli, d: &Diagram, length: usize, end: Option<&str>) -> Outcome {
    require_length("--length", length)?;
    guard_paths(d, "--length", length)?;
    let end_v = end.map(|name| vertex(d, "--end", name)).transpose()?;
    let list: Vec<String> = enumerate_paths(d, length, end_v)
        .iter()
        .map(|p| p.display(d).to_string())
        .collect();
    if cli.plain {
        return Ok(CommandResult::ok(
            list.iter().map(|p| format!("{p}\n")).collect(),
        ));
    }
    Ok(CommandResult::ok(pretty(&PathsDoc {
        length,
        end: end.map(str::to_owned),
        count: list.len(),
        paths: list,
    })))
}

#[derive(Serialize)]
struct VershikDoc {
    path: String,
    iterate: i64,
    /// `null` when the iterate leaves the domain.
    result: Option<String>,
}

fn vershik(cli: &Cli, d: &Diagram, path: &str, n: i64) -> Outcome {
    let p = Path::parse(d, path)
        .map_err(|e| Fail(CommandResult::input_error(format!("--path: {e}"))))?;
    let result = iterate(d, &p, n).map(|q| q.display(d).to_string());
    if cli.plain {
        return Ok(CommandResult::ok(format!(
            "{}\n",
            result.as_deref().unwrap_or("undefined")
        )));
    }
    Ok(CommandResult::ok(pretty(&VershikDoc {
        path: p.display(d).to_string(),
        iterate: n,
        result,
    })))
}

#[derive(Serialize)]
struct OrbitDoc {
    length: usize,
    n_sup: u64,
    /// `m^N`, or `null` if it does not fit in 64 bits.
    bound: Option<u64>,
    orbits: Vec<ChainDoc>,
}

#[derive(Serialize)]
struct ChainDoc {
    vertex: String,
    size: usize,
    chain: Vec<String>,
}

fn orbit(cli: &Cli, d: &Diagram, length: usize, vertex_name: Option<&str>) -> Outcome {
    require_length("--length", length)?;
    guard_paths(d, "--length", length)?;
    let only = vertex_name
        .map(|name| vertex(d, "--vertex", name))
        .transpose()?;
    let report = n_n_report(d, length);
    let orbits: Vec<ChainDoc> = block_decomposition(d, length)
        .blocks
        .into_iter()
        .filter(|b| only.is_none_or(|v| v == b.vertex))
        .map(|b| ChainDoc {
            vertex: d.vertex_name(b.vertex).to_owned(),
            size: b.size(),
            chain: b.chain.iter().map(|p| p.display(d).to_string()).collect(),
        })
        .collect();
    if cli.plain {
        let mut out = String::new();
        for o in &orbits {
            let _ = writeln!(out, "{} ({}): {}", o.vertex, o.size, o.chain.join(" -> "));
        }
        let bound = report
            .bound
            .map_or("overflow".to_owned(), |b| b.to_string());
        let _ = writeln!(out, "n_sup: {} (bound {bound})", report.n_sup);
        return Ok(CommandResult::ok(out));
    }
    Ok(CommandResult::ok(pretty(&OrbitDoc {
        length,
        n_sup: report.n_sup,
        bound: report.bound,
        orbits,
    })))
}

fn tower(cli: &Cli, d: &Diagram, levels: usize, dot: bool) -> Outcome {
    require_length("--levels", levels)?;
    guard_paths(d, "--levels", levels + 1)?;
    let t = if cli.parallel {
        af_tower_parallel(d, levels)
    } else {
        af_tower(d, levels)
    };
    if dot {
        return Ok(CommandResult::ok(tower_dot(d, &t)));
    }
    let doc = tower_doc(d, &t);
    if !cli.plain {
        return Ok(CommandResult::ok(pretty(&doc)));
    }
    let mut out = String::new();
    for level in &doc.levels {
        let blocks: Vec<String> = level
            .blocks
            .iter()
            .map(|b| format!("{}:{}", b.vertex, b.size))
            .collect();
        let mult: Vec<String> = level
            .mult
            .iter()
            .map(|r| r.iter().map(u64::to_string).collect::<Vec<_>>().join(" "))
            .collect();
        let _ = writeln!(
            out,
            "N={} dim={} blocks=[{}] mult=[{}]",
            level.level,
            level.dim,
            blocks.join(", "),
            mult.join("; ")
        );
    }
    Ok(CommandResult::ok(out))
}

#[derive(Serialize)]
struct CheckDoc<'a> {
    diagram: String,
    depth: usize,
    n_max: u64,
    pass: bool,
    relations: &'a [RelationReport],
}

fn check(cli: &Cli, file: &FsPath, d: &Diagram, depth: usize, nmax: Option<u64>) -> Outcome {
    guard_depth(d, depth)?;
    if nmax == Some(0) {
        return Err(Fail(CommandResult::input_error(
            "--nmax must be at least 1",
        )));
    }
    let n_max = nmax.unwrap_or_else(|| default_n_max(d, depth));
    let reports = if cli.parallel {
        check_all_parallel(d, depth, Some(n_max))?
    } else {
        check_all(d, depth, Some(n_max))?
    };
    let pass = reports.iter().all(|r| r.pass);
    let code = if pass { 0 } else { 1 };
    if cli.plain {
        let mut out = String::new();
        for r in &reports {
            let _ = writeln!(out, "{r}");
            for c in r.counterexamples.iter().take(3) {
                let _ = writeln!(
                    out,
                    "    [{}] at {}: lhs={:?} rhs={:?}{}",
                    c.instance,
                    c.path,
                    c.lhs,
                    c.rhs,
                    c.detail
                        .as_deref()
                        .map(|s| format!(" ({s})"))
                        .unwrap_or_default()
                );
            }
        }
        let _ = writeln!(
            out,
            "{}",
            if pass { "all relations hold" } else { "FAILED" }
        );
        return Ok(CommandResult::with_code(code, out));
    }
    let doc = CheckDoc {
        diagram: file
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        depth,
        n_max,
        pass,
        relations: &reports,
    };
    Ok(CommandResult::with_code(code, pretty(&doc)))
}

fn crossed(cli: &Cli, d: &Diagram, depth: usize, samples: usize, seed: u64) -> Outcome {
    guard_depth(d, depth)?;
    let report = sample_embedding_checks(d, depth, samples, seed)?;
    let code = if report.pass { 0 } else { 1 };
    if !cli.plain {
        return Ok(CommandResult::with_code(code, pretty(&report)));
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "depth {} seed {} samples {}",
        report.depth, report.seed, report.samples
    );
    let _ = writeln!(out, "unit -> identity: {}", report.unit_is_identity);
    let _ = writeln!(
        out,
        "multiplicative: {}/{}",
        report.multiplicative, report.samples
    );
    let _ = writeln!(
        out,
        "adjoint-compatible: {}/{}",
        report.adjoint_compatible, report.samples
    );
    for c in &report.independence {
        let _ = writeln!(
            out,
            "N={}: rank {} of {} basis images",
            c.level, c.rank, c.basis_size
        );
    }
    for f in &report.failures {
        let _ = writeln!(
            out,
            "failed {}: x={} y={}",
            f.check,
            f.x,
            f.y.as_deref().unwrap_or("-")
        );
    }
    Ok(CommandResult::with_code(code, out))
}

#[derive(Serialize)]
struct EquivDoc {
    equivalent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<EquivalenceCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<bratteli_core::equivalence::NotEquivalent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    violations: Option<Vec<bratteli_core::equivalence::Violation>>,
}

fn equiv(
    cli: &Cli,
    a: &FsPath,
    b: &FsPath,
    out: Option<&FsPath>,
    verify: Option<&FsPath>,
) -> Outcome {
    let (da, db) = (load(a)?, load(b)?);
    if let Some(cert_path) = verify {
        let text = std::fs::read_to_string(cert_path).map_err(|e| {
            Fail(CommandResult::input_error(format!(
                "{}: {e}",
                cert_path.display()
            )))
        })?;
        let cert: EquivalenceCertificate = serde_json::from_str(&text).map_err(|e| {
            Fail(CommandResult::input_error(format!(
                "{}: {e}",
                cert_path.display()
            )))
        })?;
        let checked = check_certificate(&da, &db, &cert)?;
        let code = if checked.valid { 0 } else { 1 };
        if cli.plain {
            let mut text = format!(
                "certificate {}\n",
                if checked.valid { "valid" } else { "invalid" }
            );
            for v in &checked.violations {
                let _ = writeln!(text, "  {v}");
            }
            return Ok(CommandResult::with_code(code, text));
        }
        let doc = EquivDoc {
            equivalent: checked.valid,
            certificate: Some(cert),
            reason: None,
            violations: Some(checked.violations),
        };
        return Ok(CommandResult::with_code(code, pretty(&doc)));
    }
    let doc = match find_equivalence(&da, &db) {
        Verdict::Equivalent(cert) => {
            if let Some(path) = out {
                std::fs::write(path, pretty(&cert)).map_err(|e| {
                    Fail(CommandResult::input_error(format!(
                        "--certificate {}: {e}",
                        path.display()
                    )))
                })?;
            }
            EquivDoc {
                equivalent: true,
                certificate: Some(cert),
                reason: None,
                violations: None,
            }
        }
        Verdict::NotEquivalent(reason) => EquivDoc {
            equivalent: false,
            certificate: None,
            reason: Some(reason),
            violations: None,
        },
    };
    let code = if doc.equivalent { 0 } else { 1 };
    if !cli.plain {
        return Ok(CommandResult::with_code(code, pretty(&doc)));
    }
    let mut text = String::new();
    match (&doc.certificate, &doc.reason) {
        (Some(cert), _) => {
            let _ = writeln!(text, "equivalent");
            for (x, y) in &cert.map {
                let _ = writeln!(text, "  {x} -> {y}");
            }
        }
        (None, Some(reason)) => {
            let _ = writeln!(text, "not equivalent: {reason}");
        }
        (None, None) => {}
    }
    Ok(CommandResult::with_code(code, text))
}

fn convert(file: &FsPath, output: Option<&FsPath>) -> Outcome {
    let bd = serialize_diagram(&load(file)?);
    match output {
        Some(path) => {
            std::fs::write(path, &bd).map_err(|e| {
                Fail(CommandResult::input_error(format!(
                    "--output {}: {e}",
                    path.display()
                )))
            })?;
            Ok(CommandResult::ok(String::new()))
        }
        None => Ok(CommandResult::ok(bd)),
    }
}
