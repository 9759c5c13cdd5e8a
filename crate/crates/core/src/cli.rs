//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a bound was exceeded, 2 unreadable input or bad
//! usage, 3 invalid input (general position, indices), 4 router and graph
//! flavor do not match.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::degree_bounded::{build_g12, build_g9, format_hints, parse_hints, route_g12, route_g9, DegreeError};
use crate::geometry::{ConeSystem, Point};
use crate::graph::{
    build_full_theta6, build_half_theta6, build_rotated_union, format_graph, format_points, normalize_unit_box,
    parse_graph, parse_points, Flavor, Graph, GraphError,
};
use crate::harness::{
    degree_sweep, g9_spanner_sweep, gen_lower_bound_negative, gen_lower_bound_positive, random_graph,
    routing_sweep, spanning_sweep, crossing_edges, non_triangular_faces, trial_seed, HarnessError, RATIO_TOL,
};
use crate::router::{format_trace, parse_trace, route_stateful, route_stateless, Algorithm, RouteError, RouteTrace};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BOUND: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_FLAVOR: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "halftheta", version, about = "Half-θ6-graphs: build, route, verify")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a graph from a point file (points are rescaled to the unit box).
    Build {
        #[arg(long)]
        points: PathBuf,
        /// half6, full6, union:K, g12 or g9
        #[arg(long)]
        graph: Flavor,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        /// Hint file for g9 (defaults to OUTPUT.hints)
        #[arg(long)]
        hints: Option<PathBuf>,
    },
    /// Route a message and write its trace.
    Route {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long)]
        algo: Algorithm,
        #[arg(long)]
        hints: Option<PathBuf>,
        #[arg(long)]
        trace: PathBuf,
    },
    /// Run a seeded check suite.
    Verify {
        #[arg(long, value_enum)]
        check: Check,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long = "n", default_value_t = 60)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "half6")]
        graph: Flavor,
        #[arg(long, default_value = "stateless")]
        algo: Algorithm,
        /// Optional report file
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write an adversarial lower-bound instance.
    Lowerbound {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Point file (positive) or prefix for `-a.txt` / `-b.txt` (negative)
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Render a graph as SVG.
    ExportSvg {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, num_args = 2, value_names = ["I", "J"])]
        triangle: Option<Vec<usize>>,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Spanning,
    Routing,
    Potential,
    Degree,
    Planarity,
    Triangulation,
    G9Spanner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Positive,
    Negative,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error(transparent)]
    Degree(#[from] DegreeError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Usage(_) => EXIT_PARSE,
            CliError::Graph(e) | CliError::Route(RouteError::Graph(e)) | CliError::Harness(HarnessError::Graph(e)) => {
                graph_code(e)
            }
            CliError::Route(RouteError::FlavorMismatch { .. })
            | CliError::Degree(DegreeError::FlavorMismatch { .. })
            | CliError::Degree(DegreeError::HintMismatch { .. })
            | CliError::Harness(HarnessError::Unsupported { .. }) => EXIT_FLAVOR,
            CliError::Route(RouteError::Parse { .. }) | CliError::Degree(DegreeError::Parse { .. }) => EXIT_PARSE,
            CliError::Degree(DegreeError::Graph(e)) => graph_code(e),
            _ => EXIT_INVALID,
        }
    }
}

fn graph_code(e: &GraphError) -> i32 {
    match e {
        GraphError::Parse { .. } | GraphError::Io(_) => EXIT_PARSE,
        _ => EXIT_INVALID,
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Build { points, graph, output, hints } => cmd_build(&points, graph, &output, hints.as_deref()),
        Command::Route { graph, from, to, algo, hints, trace } => {
            cmd_route(&graph, from, to, algo, hints.as_deref(), &trace)
        }
        Command::Verify { check, trials, n, seed, graph, algo, report } => {
            cmd_verify(check, trials, n, seed, graph, algo, report.as_deref())
        }
        Command::Lowerbound { mode, alpha, epsilon, k, output } => cmd_lowerbound(mode, alpha, epsilon, k, &output),
        Command::ExportSvg { graph, trace, triangle, output } => {
            let triangle = triangle.map(|v| (v[0], v[1]));
            cmd_export_svg(&graph, trace.as_deref(), triangle, &output)
        }
    }
}

fn cmd_build(points: &Path, flavor: Flavor, output: &Path, hints: Option<&Path>) -> Result<i32, CliError> {
    let pts = normalize_unit_box(&parse_points(&read(points)?)?);
    let g = match flavor {
        Flavor::Half6 => build_half_theta6(&pts)?,
        Flavor::Full6 => build_full_theta6(&pts)?,
        Flavor::Union(k) => build_rotated_union(&pts, k)?,
        Flavor::G12 => build_g12(&build_half_theta6(&pts)?)?,
        Flavor::G9 => {
            let (g9, h) = build_g9(&build_half_theta6(&pts)?)?;
            let path = hints.map_or_else(|| with_suffix(output, ".hints"), Path::to_path_buf);
            write(&path, &format_hints(&h))?;
            g9
        }
    };
    write(output, &format_graph(&g))?;
    eprintln!("built {} graph: n={} m={} max_degree={}", g.flavor(), g.len(), g.edge_count(), g.max_degree());
    Ok(EXIT_OK)
}

fn load_graph(path: &Path) -> Result<Graph, CliError> {
    Ok(parse_graph(&read(path)?)?)
}

fn cmd_route(
    graph: &Path,
    from: usize,
    to: usize,
    algo: Algorithm,
    hints: Option<&Path>,
    trace_path: &Path,
) -> Result<i32, CliError> {
    let g = load_graph(graph)?;
    let trace: RouteTrace = match algo {
        Algorithm::Stateless => route_stateless(&g, from, to)?,
        Algorithm::Stateful => route_stateful(&g, from, to)?,
        Algorithm::G12 => route_g12(&g, from, to)?.trace,
        Algorithm::G9 => {
            let path = hints.map_or_else(|| with_suffix(graph, ".hints"), Path::to_path_buf);
            let h = parse_hints(&read(&path)?)?;
            route_g9(&g, &h, from, to)?.trace
        }
    };
    write(trace_path, &format_trace(&trace))?;
    println!("total={} bound={} ratio={}", trace.total_length, trace.bound, trace.ratio());
    Ok(if trace.within_bound(RATIO_TOL) { EXIT_OK } else { EXIT_BOUND })
}

fn cmd_verify(
    check: Check,
    trials: usize,
    n: usize,
    seed: u64,
    flavor: Flavor,
    algo: Algorithm,
    report: Option<&Path>,
) -> Result<i32, CliError> {
    if trials == 0 || n < 2 {
        return Err(CliError::Usage("--trials must be positive and --n at least 2".into()));
    }
    let (summary, body, ok) = match check {
        Check::Spanning => {
            let r = spanning_sweep(flavor, trials, n, seed)?;
            let bad = r.violations(RATIO_TOL).len();
            (format!("check=spanning graph={flavor} max={} violations={bad}", r.max_ratio), r.to_tsv(), bad == 0)
        }
        Check::Routing => {
            let r = routing_sweep(algo, trials, n, seed, None)?;
            let bad = r.ratios.violations(RATIO_TOL).len();
            let summary = format!(
                "check=routing algo={algo} routes={} max={} max_positive={} max_negative={} violations={bad} search_violations={} probe_violations={}",
                r.routes,
                r.ratios.max_ratio,
                r.ratios.max_where(true),
                r.ratios.max_where(false),
                r.search_violations.len(),
                r.probe_violations.len()
            );
            (summary, r.ratios.to_tsv(), r.is_clean())
        }
        Check::Potential => {
            let mut body = String::new();
            let mut ok = true;
            let mut parts = Vec::new();
            for algo in [Algorithm::Stateless, Algorithm::Stateful] {
                let r = routing_sweep(algo, trials, n, seed, None)?;
                for (t, u, v) in &r.audits_failed {
                    let _ = writeln!(body, "{algo}\t{t}\t{u}\t{v}");
                }
                ok &= r.audits_failed.is_empty();
                parts.push(format!("{algo}_routes={} {algo}_flagged={}", r.routes, r.audits_failed.len()));
            }
            (format!("check=potential {}", parts.join(" ")), body, ok)
        }
        Check::Degree => {
            let rows = degree_sweep(trials, n, seed)?;
            let mut body = String::from("trial\tg12\tg9\n");
            for (t, a, b) in &rows {
                let _ = writeln!(body, "{t}\t{a}\t{b}");
            }
            let g12 = rows.iter().map(|r| r.1).max().unwrap_or(0);
            let g9 = rows.iter().map(|r| r.2).max().unwrap_or(0);
            (format!("check=degree max_g12={g12} max_g9={g9}"), body, g12 <= 12 && g9 <= 9)
        }
        Check::Planarity | Check::Triangulation => {
            let mut body = String::from("trial\tproblems\n");
            let mut total = 0;
            for i in 0..trials {
                let (g, _) = random_graph(flavor, n, trial_seed(seed, i))?;
                let count = if check == Check::Planarity {
                    crossing_edges(&g).len()
                } else {
                    non_triangular_faces(&g).len()
                };
                total += count;
                let _ = writeln!(body, "{i}\t{count}");
            }
            let name = if check == Check::Planarity { "planarity" } else { "triangulation" };
            (format!("check={name} graph={flavor} problems={total}"), body, total == 0)
        }
        Check::G9Spanner => {
            let r = g9_spanner_sweep(trials, n, seed)?;
            let mut body = String::from("trial\tu\tv\n");
            for (t, u, v) in &r.violations {
                let _ = writeln!(body, "{t}\t{u}\t{v}");
            }
            let summary = format!(
                "check=g9-spanner edges={} max_ratio={} max_canonical_ratio={} violations={}",
                r.edges,
                r.max_ratio,
                r.max_canonical_ratio,
                r.violations.len()
            );
            (summary, body, r.violations.is_empty())
        }
    };
    if let Some(path) = report {
        write(path, &body)?;
    }
    println!("{summary} status={}", if ok { "pass" } else { "fail" });
    Ok(if ok { EXIT_OK } else { EXIT_BOUND })
}

fn cmd_lowerbound(mode: Mode, alpha: f64, epsilon: f64, k: usize, output: &Path) -> Result<i32, CliError> {
    match mode {
        Mode::Positive => {
            let inst = gen_lower_bound_positive(alpha, epsilon)?;
            write(output, &format_points(&inst.points))?;
            write(&with_suffix(output, ".manifest"), &format!("{}\n", inst.manifest()))?;
            println!("{}", inst.manifest());
        }
        Mode::Negative => {
            let (a, b) = gen_lower_bound_negative(alpha, epsilon, k)?;
            let mut manifest = String::new();
            for (tag, inst) in [("a", &a), ("b", &b)] {
                let path = with_suffix(output, &format!("-{tag}.txt"));
                write(&path, &format_points(&inst.points))?;
                let _ = writeln!(manifest, "file={} {}", path.display(), inst.manifest());
            }
            write(&with_suffix(output, ".manifest"), &manifest)?;
            print!("{manifest}");
        }
    }
    Ok(EXIT_OK)
}

/// Deterministic SVG drawing of a graph with an optional trace and
/// canonical triangle.
pub fn render_svg(g: &Graph, trace: &[(usize, usize)], triangle: Option<(usize, usize)>) -> Result<String, CliError> {
    const SIZE: f64 = 800.0;
    const PAD: f64 = 40.0;
    let pts = g.points();
    let mut extra = Vec::new();
    if let Some((i, j)) = triangle {
        g.check_index(i)?;
        g.check_index(j)?;
        let tri = ConeSystem::STANDARD.pair_triangle(pts[i], pts[j]).map_err(GraphError::from)?;
        extra = vec![tri.apex, tri.corner_a, tri.corner_b];
    }
    let all: Vec<Point> = pts.iter().chain(extra.iter()).copied().collect();
    let (mut lo, mut hi) = (Point::new(0.0, 0.0), Point::new(1.0, 1.0));
    if let Some(first) = all.first() {
        (lo, hi) = (*first, *first);
        for p in &all {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
    let scale = (SIZE - 2.0 * PAD) / span;
    let map = |p: Point| ((p.x - lo.x) * scale + PAD, SIZE - ((p.y - lo.y) * scale + PAD));
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    if !extra.is_empty() {
        let corners: Vec<String> = extra
            .iter()
            .map(|&p| {
                let (x, y) = map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            out,
            "<polygon class=\"triangle\" points=\"{}\" fill=\"#dde8f7\" stroke=\"#4a78b5\" stroke-width=\"1\"/>",
            corners.join(" ")
        );
    }
    for (i, j) in g.edges() {
        let ((x1, y1), (x2, y2)) = (map(pts[i]), map(pts[j]));
        let _ = writeln!(
            out,
            "<line class=\"edge\" x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\" stroke=\"#888\" stroke-width=\"1\"/>"
        );
    }
    for &(i, j) in trace {
        g.check_index(i)?;
        g.check_index(j)?;
        let ((x1, y1), (x2, y2)) = (map(pts[i]), map(pts[j]));
        let _ = writeln!(
            out,
            "<line class=\"trace\" x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\" stroke=\"#d62728\" stroke-width=\"3\"/>"
        );
    }
    for (v, &p) in pts.iter().enumerate() {
        let (x, y) = map(p);
        let _ = writeln!(out, "<circle class=\"vertex\" data-id=\"{v}\" cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"3\" fill=\"black\"/>");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn cmd_export_svg(
    graph: &Path,
    trace: Option<&Path>,
    triangle: Option<(usize, usize)>,
    output: &Path,
) -> Result<i32, CliError> {
    let g = load_graph(graph)?;
    let steps = match trace {
        Some(path) => parse_trace(&read(path)?)?.steps.iter().map(|s| (s.0, s.1)).collect(),
        None => Vec::new(),
    };
    write(output, &render_svg(&g, &steps, triangle)?)?;
    Ok(EXIT_OK)
}
