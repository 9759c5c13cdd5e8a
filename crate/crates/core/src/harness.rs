//! Brute-force oracles, ratio measurement, potential audits, structural
//! checks and adversarial lower-bound instances.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_6, PI};
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::degree_bounded::{
    approximation_path, build_g12, build_g9, route_g12, route_g9, DegreeError, VertexHints, G12_FACTOR, G9_FACTOR,
};
use crate::geometry::{positive_bound, union_bound, CanonicalTriangle, ConeSystem, Point, SQRT3};
use crate::graph::{
    build_full_theta6, build_half_theta6, build_rotated_union, neighborhood, random_general_position,
    union_rotations, validate_general_position, Flavor, Graph, GraphError, DEFAULT_MARGIN,
};
use crate::router::{pair_bound, route_stateful, route_stateless, Algorithm, RouteError, RouteTrace};

/// Relative tolerance for ratio comparisons.
pub const RATIO_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error(transparent)]
    Degree(#[from] DegreeError),
    #[error("no path from {from} to {to}{}", if *.restricted { " inside the canonical triangle" } else { "" })]
    Disconnected { from: usize, to: usize, restricted: bool },
    #[error("exhaustive enumeration supports at most {max} vertices, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("alpha {0} outside [0, π/6]")]
    AlphaRange(f64),
    #[error("epsilon {0} must be positive and below 1e-2")]
    EpsilonRange(f64),
    #[error("neighborhood padding k = {0} is not supported (only k = 1)")]
    Padding(usize),
    #[error("generated instance is invalid: {0}")]
    Construction(String),
    #[error("router {algo} does not run on {flavor} graphs")]
    Unsupported { algo: Algorithm, flavor: Flavor },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Single-source uniform-cost search. `allowed` filters usable vertices.
fn dijkstra(g: &Graph, source: usize, allowed: impl Fn(usize) -> bool) -> (Vec<f64>, Vec<Option<usize>>) {
    let mut dist = vec![f64::INFINITY; g.len()];
    let mut parent = vec![None; g.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse((Key(0.0), source)));
    while let Some(Reverse((Key(d), x))) = heap.pop() {
        if d > dist[x] {
            continue;
        }
        for a in g.neighbors(x) {
            let y = a.vertex;
            if !allowed(y) {
                continue;
            }
            let nd = d + g.edge_length(x, y);
            if nd < dist[y] {
                dist[y] = nd;
                parent[y] = Some(x);
                heap.push(Reverse((Key(nd), y)));
            }
        }
    }
    (dist, parent)
}

fn unwind(parent: &[Option<usize>], source: usize, target: usize) -> Vec<usize> {
    let mut path = vec![target];
    let mut x = target;
    while x != source {
        x = parent[x].expect("reached vertices have parents");
        path.push(x);
    }
    path.reverse();
    path
}

/// Shortest path by Euclidean edge weight. With `region`, only vertices in
/// the (closed) triangle are used.
pub fn oracle_shortest_path(
    g: &Graph,
    u: usize,
    v: usize,
    region: Option<&CanonicalTriangle>,
) -> Result<(f64, Vec<usize>), HarnessError> {
    g.check_index(u)?;
    g.check_index(v)?;
    let allowed = |x: usize| region.is_none_or(|t| t.contains(g.point(x)));
    let (dist, parent) = dijkstra(g, u, allowed);
    if !dist[v].is_finite() {
        return Err(HarnessError::Disconnected { from: u, to: v, restricted: region.is_some() });
    }
    Ok((dist[v], unwind(&parent, u, v)))
}

pub const EXHAUSTIVE_MAX: usize = 12;

/// Shortest path by enumerating every simple path.
pub fn exhaustive_shortest_path(g: &Graph, u: usize, v: usize) -> Result<(f64, Vec<usize>), HarnessError> {
    if g.len() > EXHAUSTIVE_MAX {
        return Err(HarnessError::TooLarge { n: g.len(), max: EXHAUSTIVE_MAX });
    }
    g.check_index(u)?;
    g.check_index(v)?;
    fn go(g: &Graph, x: usize, v: usize, len: f64, path: &mut Vec<usize>, used: &mut [bool], best: &mut Option<(f64, Vec<usize>)>) {
        if x == v {
            if best.as_ref().is_none_or(|b| len < b.0) {
                *best = Some((len, path.clone()));
            }
            return;
        }
        for a in g.neighbors(x) {
            let y = a.vertex;
            if used[y] {
                continue;
            }
            used[y] = true;
            path.push(y);
            go(g, y, v, len + g.edge_length(x, y), path, used, best);
            path.pop();
            used[y] = false;
        }
    }
    let mut used = vec![false; g.len()];
    used[u] = true;
    let mut best = None;
    go(g, u, v, 0.0, &mut vec![u], &mut used, &mut best);
    best.ok_or(HarnessError::Disconnected { from: u, to: v, restricted: false })
}

/// One measured pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioRow {
    pub trial: usize,
    pub u: usize,
    pub v: usize,
    pub alpha: f64,
    pub positive: bool,
    pub measured: f64,
    pub bound: f64,
}

impl RatioRow {
    pub fn slack(&self) -> f64 {
        self.bound - self.measured
    }

    pub fn within(&self, tol: f64) -> bool {
        self.measured <= self.bound * (1.0 + tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub max_ratio: f64,
    pub argmax: Option<(usize, usize, usize)>,
    pub rows: Vec<RatioRow>,
    pub trials: usize,
    pub seed: u64,
}

impl RatioReport {
    pub fn new(seed: u64) -> Self {
        RatioReport { max_ratio: 0.0, argmax: None, rows: Vec::new(), trials: 0, seed }
    }

    pub fn push(&mut self, row: RatioRow) {
        if row.measured > self.max_ratio || self.argmax.is_none() {
            self.max_ratio = row.measured;
            self.argmax = Some((row.trial, row.u, row.v));
        }
        self.rows.push(row);
    }

    pub fn merge(mut self, other: RatioReport) -> RatioReport {
        self.trials += other.trials;
        for row in other.rows {
            self.push(row);
        }
        self
    }

    pub fn violations(&self, tol: f64) -> Vec<RatioRow> {
        self.rows.iter().filter(|r| !r.within(tol)).copied().collect()
    }

    pub fn max_where(&self, positive: bool) -> f64 {
        self.rows.iter().filter(|r| r.positive == positive).map(|r| r.measured).fold(0.0, f64::max)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("trial\tu\tv\talpha\tpositive\tmeasured\tbound\tslack\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{:.12}\t{}\t{:.12}\t{:.12}\t{:.3e}",
                r.trial,
                r.u,
                r.v,
                r.alpha,
                u8::from(r.positive),
                r.measured,
                r.bound,
                r.slack()
            );
        }
        let arg = self.argmax.map_or("-".to_string(), |(t, u, v)| format!("{t}:{u}-{v}"));
        let _ = writeln!(
            out,
            "# max_ratio={:.12} argmax={arg} rows={} trials={} seed={} violations={}",
            self.max_ratio,
            self.rows.len(),
            self.trials,
            self.seed,
            self.violations(RATIO_TOL).len()
        );
        out
    }
}

/// Spanning-ratio bound of a pair for a given construction.
pub fn spanning_bound(flavor: Flavor, alpha: f64) -> f64 {
    match flavor {
        Flavor::Half6 | Flavor::Full6 => positive_bound(alpha),
        Flavor::Union(k) => union_bound(k),
        Flavor::G12 | Flavor::G9 => 3.0 * positive_bound(alpha),
    }
}

/// Oracle path length over Euclidean distance, for every unordered pair.
pub fn measure_spanning_ratio(g: &Graph, trial: usize) -> Result<RatioReport, HarnessError> {
    let sys = ConeSystem::STANDARD;
    let mut report = RatioReport::new(0);
    report.trials = 1;
    for u in 0..g.len() {
        let (dist, _) = dijkstra(g, u, |_| true);
        for v in u + 1..g.len() {
            if !dist[v].is_finite() {
                return Err(HarnessError::Disconnected { from: u, to: v, restricted: false });
            }
            let (pu, pv) = (g.point(u), g.point(v));
            let alpha = sys.pair_triangle(pu, pv).map_err(GraphError::from)?.alpha;
            report.push(RatioRow {
                trial,
                u,
                v,
                alpha,
                positive: true,
                measured: dist[v] / pu.dist(pv),
                bound: spanning_bound(g.flavor(), alpha),
            });
        }
    }
    Ok(report)
}

/// Shortest paths restricted to each pair's canonical triangle, against the
/// α-dependent bound. A disconnected restriction is an error.
pub fn measure_restricted_spanning(g: &Graph, trial: usize) -> Result<RatioReport, HarnessError> {
    let sys = ConeSystem::STANDARD;
    let mut report = RatioReport::new(0);
    report.trials = 1;
    for u in 0..g.len() {
        for v in u + 1..g.len() {
            let tri = sys.pair_triangle(g.point(u), g.point(v)).map_err(GraphError::from)?;
            let (len, _) = oracle_shortest_path(g, u, v, Some(&tri))?;
            report.push(RatioRow {
                trial,
                u,
                v,
                alpha: tri.alpha,
                positive: true,
                measured: len / g.point(u).dist(g.point(v)),
                bound: positive_bound(tri.alpha),
            });
        }
    }
    Ok(report)
}

/// Result of checking a trace against its potential.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PotentialAudit {
    /// Steps whose potential drop is smaller than their length.
    pub step_violations: Vec<usize>,
    /// Steps that re-enter case D (or ℬ) after having left it.
    pub d_reentries: Vec<usize>,
    /// Steps that are not edges of the graph.
    pub missing_edges: Vec<usize>,
    pub initial_potential: f64,
    pub total_length: f64,
}

impl PotentialAudit {
    pub fn is_clean(&self) -> bool {
        self.step_violations.is_empty()
            && self.d_reentries.is_empty()
            && self.missing_edges.is_empty()
            && self.total_length <= self.initial_potential + RATIO_TOL * self.initial_potential.max(1.0)
    }
}

pub fn audit_potential(trace: &RouteTrace, g: &Graph) -> PotentialAudit {
    let mut audit = PotentialAudit {
        step_violations: trace.potential_violations(1e-9),
        initial_potential: trace.steps.first().map_or(0.0, |s| s.phi_before),
        total_length: trace.steps.iter().map(|s| s.length).sum(),
        ..Default::default()
    };
    let mut left_d = false;
    for (i, s) in trace.steps.iter().enumerate() {
        if s.case.is_d_like() {
            if left_d {
                audit.d_reentries.push(i);
            }
        } else if i > 0 && trace.steps[i - 1].case.is_d_like() {
            left_d = true;
        }
        if !g.has_edge(s.from, s.to) {
            audit.missing_edges.push(i);
        }
    }
    audit
}

/// Aggregate of routing measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingReport {
    pub ratios: RatioReport,
    pub audits_failed: Vec<(usize, usize, usize)>,
    /// Simulated edges whose realized walk exceeded 19× (G12) or 3× (G9)
    /// their length.
    pub search_violations: Vec<(usize, usize, usize)>,
    /// Routes with more than one failed probe or a probe above its budget.
    pub probe_violations: Vec<(usize, usize, usize)>,
    pub routes: usize,
}

impl RoutingReport {
    fn new(seed: u64) -> Self {
        RoutingReport {
            ratios: RatioReport::new(seed),
            audits_failed: Vec::new(),
            search_violations: Vec::new(),
            probe_violations: Vec::new(),
            routes: 0,
        }
    }

    pub fn merge(mut self, other: RoutingReport) -> RoutingReport {
        self.ratios = self.ratios.merge(other.ratios);
        self.audits_failed.extend(other.audits_failed);
        self.search_violations.extend(other.search_violations);
        self.probe_violations.extend(other.probe_violations);
        self.routes += other.routes;
        self
    }

    pub fn is_clean(&self) -> bool {
        self.ratios.violations(RATIO_TOL).is_empty()
            && self.audits_failed.is_empty()
            && self.search_violations.is_empty()
            && self.probe_violations.is_empty()
    }
}

/// Which ordered pairs to route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pairs {
    All,
    Sample { count: usize, seed: u64 },
}

fn pair_list(n: usize, pairs: Pairs) -> Vec<(usize, usize)> {
    match pairs {
        Pairs::All => (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v))).collect(),
        Pairs::Sample { count, seed } => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut out = Vec::with_capacity(count);
            while out.len() < count && n > 1 {
                let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
                if u != v {
                    out.push((u, v));
                }
            }
            out
        }
    }
}

/// Routes every selected pair on `g` with `algo`, checking each trace against
/// its α-dependent bound and auditing potentials (memoryless and
/// preferred-side routers) or search overheads (G12 and G9).
pub fn measure_routing_ratio(
    algo: Algorithm,
    g: &Graph,
    hints: Option<&[VertexHints]>,
    pairs: Pairs,
    trial: usize,
) -> Result<RoutingReport, HarnessError> {
    let expected = match algo {
        Algorithm::Stateless | Algorithm::Stateful => Flavor::Half6,
        Algorithm::G12 => Flavor::G12,
        Algorithm::G9 => Flavor::G9,
    };
    if g.flavor() != expected || (algo == Algorithm::G9 && hints.is_none()) {
        return Err(HarnessError::Unsupported { algo, flavor: g.flavor() });
    }
    let mut report = RoutingReport::new(0);
    report.ratios.trials = 1;
    for (u, v) in pair_list(g.len(), pairs) {
        let trace = match algo {
            Algorithm::Stateless | Algorithm::Stateful => {
                let trace = if algo == Algorithm::Stateless {
                    route_stateless(g, u, v)?
                } else {
                    route_stateful(g, u, v)?
                };
                if !audit_potential(&trace, g).is_clean() {
                    report.audits_failed.push((trial, u, v));
                }
                trace
            }
            Algorithm::G12 | Algorithm::G9 => {
                let route = if algo == Algorithm::G12 {
                    route_g12(g, u, v)?
                } else {
                    route_g9(g, hints.unwrap_or_default(), u, v)?
                };
                let factor = if algo == Algorithm::G12 { G12_FACTOR } else { G9_FACTOR };
                let search_ok = route.simulated.iter().all(|s| s.travel <= factor * s.edge_length * (1.0 + RATIO_TOL));
                if !search_ok {
                    report.search_violations.push((trial, u, v));
                }
                let cap = if algo == Algorithm::G12 { 20.0 } else { 4.0 };
                let probes_ok = route.probe_failures.len() <= 1
                    && route.probe_failures.iter().all(|f| f.travel <= cap * f.corner_distance * (1.0 + RATIO_TOL));
                if !probes_ok {
                    report.probe_violations.push((trial, u, v));
                }
                route.trace
            }
        };
        report.routes += 1;
        report.ratios.push(RatioRow {
            trial,
            u,
            v,
            alpha: trace.alpha,
            positive: trace.positive,
            measured: trace.total_length / trace.distance,
            bound: trace.bound / trace.distance,
        });
    }
    Ok(report)
}

/// Graph of a flavor over seeded random points in general position for it.
pub fn random_graph(flavor: Flavor, n: usize, seed: u64) -> Result<(Graph, Option<Vec<VertexHints>>), HarnessError> {
    let rotations = match flavor {
        Flavor::Union(k) => union_rotations(k),
        _ => vec![0.0],
    };
    let points = random_general_position(n, seed, &rotations);
    Ok(match flavor {
        Flavor::Half6 => (build_half_theta6(&points)?, None),
        Flavor::Full6 => (build_full_theta6(&points)?, None),
        Flavor::Union(k) => (build_rotated_union(&points, k)?, None),
        Flavor::G12 => (build_g12(&build_half_theta6(&points)?)?, None),
        Flavor::G9 => {
            let (g9, hints) = build_g9(&build_half_theta6(&points)?)?;
            (g9, Some(hints))
        }
    })
}

/// Seed of trial `i` in a sweep started from `seed`.
pub fn trial_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add(i as u64)
}

pub fn spanning_sweep(flavor: Flavor, trials: usize, n: usize, seed: u64) -> Result<RatioReport, HarnessError> {
    let reports: Vec<RatioReport> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let (g, _) = random_graph(flavor, n, trial_seed(seed, i))?;
            measure_spanning_ratio(&g, i)
        })
        .collect::<Result<_, _>>()?;
    Ok(reports.into_iter().fold(RatioReport::new(seed), RatioReport::merge))
}

pub fn restricted_sweep(trials: usize, n: usize, seed: u64) -> Result<RatioReport, HarnessError> {
    let reports: Vec<RatioReport> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let (g, _) = random_graph(Flavor::Half6, n, trial_seed(seed, i))?;
            measure_restricted_spanning(&g, i)
        })
        .collect::<Result<_, _>>()?;
    Ok(reports.into_iter().fold(RatioReport::new(seed), RatioReport::merge))
}

pub fn routing_sweep(
    algo: Algorithm,
    trials: usize,
    n: usize,
    seed: u64,
    pairs_per_trial: Option<usize>,
) -> Result<RoutingReport, HarnessError> {
    let flavor = match algo {
        Algorithm::Stateless | Algorithm::Stateful => Flavor::Half6,
        Algorithm::G12 => Flavor::G12,
        Algorithm::G9 => Flavor::G9,
    };
    let reports: Vec<RoutingReport> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = trial_seed(seed, i);
            let (g, hints) = random_graph(flavor, n, s)?;
            let pairs = pairs_per_trial.map_or(Pairs::All, |count| Pairs::Sample { count, seed: s });
            measure_routing_ratio(algo, &g, hints.as_deref(), pairs, i)
        })
        .collect::<Result<_, _>>()?;
    let mut out = reports.into_iter().fold(RoutingReport::new(seed), RoutingReport::merge);
    out.ratios.seed = seed;
    Ok(out)
}

/// Maximum degrees of G12 and G9 over a sweep, as `(trial, g12, g9)`.
pub fn degree_sweep(trials: usize, n: usize, seed: u64) -> Result<Vec<(usize, usize, usize)>, HarnessError> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let points = random_general_position(n, trial_seed(seed, i), &[0.0]);
            let half = build_half_theta6(&points)?;
            let g12 = build_g12(&half)?;
            let (g9, _) = build_g9(&half)?;
            Ok((i, g12.max_degree(), g9.max_degree()))
        })
        .collect()
}

/// Approximation-path ratios of every half-θ6 edge missing from G9.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpannerReport {
    pub edges: usize,
    pub max_ratio: f64,
    pub max_canonical_ratio: f64,
    pub violations: Vec<(usize, usize, usize)>,
}

pub fn g9_spanner_sweep(trials: usize, n: usize, seed: u64) -> Result<SpannerReport, HarnessError> {
    let reports: Vec<SpannerReport> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let points = random_general_position(n, trial_seed(seed, i), &[0.0]);
            let half = build_half_theta6(&points)?;
            let (g9, _) = build_g9(&half)?;
            let mut r = SpannerReport::default();
            for (u, v) in half.edges() {
                if g9.has_edge(u, v) {
                    continue;
                }
                let p = approximation_path(&half, &g9, u, v)?;
                let len = half.edge_length(u, v);
                let (ratio, canon) = (p.length / len, p.canonical_length / len);
                r.edges += 1;
                r.max_ratio = r.max_ratio.max(ratio);
                r.max_canonical_ratio = r.max_canonical_ratio.max(canon);
                if ratio > 3.0 * (1.0 + RATIO_TOL) || canon > 2.0 * (1.0 + RATIO_TOL) {
                    r.violations.push((i, u, v));
                }
            }
            Ok(r)
        })
        .collect::<Result<_, HarnessError>>()?;
    Ok(reports.into_iter().fold(SpannerReport::default(), |mut a, b| {
        a.edges += b.edges;
        a.max_ratio = a.max_ratio.max(b.max_ratio);
        a.max_canonical_ratio = a.max_canonical_ratio.max(b.max_canonical_ratio);
        a.violations.extend(b.violations);
        a
    }))
}

/// Pairs where "edge of the half-θ6-graph" and "empty canonical triangle"
/// disagree.
pub fn empty_triangle_mismatches(g: &Graph) -> Result<Vec<(usize, usize)>, HarnessError> {
    let sys = ConeSystem::STANDARD;
    let pts = g.points();
    let mut out = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let tri = sys.pair_triangle(pts[i], pts[j]).map_err(GraphError::from)?;
            let empty = (0..pts.len()).filter(|&k| k != i && k != j).all(|k| !tri.strictly_contains(pts[k]));
            if empty != g.has_edge(i, j) {
                out.push((i, j));
            }
        }
    }
    Ok(out)
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    b.sub(a).cross(c.sub(a))
}

/// Pairs of edges that cross at a point interior to both.
pub fn crossing_edges(g: &Graph) -> Vec<((usize, usize), (usize, usize))> {
    let edges = g.edges();
    let mut out = Vec::new();
    for (i, &(a, b)) in edges.iter().enumerate() {
        for &(c, d) in &edges[i + 1..] {
            if a == c || a == d || b == c || b == d {
                continue;
            }
            let (pa, pb, pc, pd) = (g.point(a), g.point(b), g.point(c), g.point(d));
            let d1 = orient(pa, pb, pc);
            let d2 = orient(pa, pb, pd);
            let d3 = orient(pc, pd, pa);
            let d4 = orient(pc, pd, pb);
            if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                out.push(((a, b), (c, d)));
            }
        }
    }
    out
}

/// Faces of a plane straight-line drawing, each as a vertex cycle with its
/// signed area (bounded faces are counter-clockwise and positive).
pub fn faces(g: &Graph) -> Vec<(Vec<usize>, f64)> {
    let order: Vec<Vec<usize>> = (0..g.len())
        .map(|v| {
            let p = g.point(v);
            let mut list: Vec<usize> = g.neighbors(v).iter().map(|a| a.vertex).collect();
            list.sort_by(|&x, &y| {
                let ax = g.point(x).sub(p);
                let ay = g.point(y).sub(p);
                ax.y.atan2(ax.x).total_cmp(&ay.y.atan2(ay.x))
            });
            list
        })
        .collect();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for u in 0..g.len() {
        for &v in &order[u] {
            if seen.contains(&(u, v)) {
                continue;
            }
            let mut cycle = Vec::new();
            let (mut x, mut y) = (u, v);
            while seen.insert((x, y)) {
                cycle.push(x);
                let around = &order[y];
                let pos = around.iter().position(|&z| z == x).expect("edges are symmetric");
                let next = around[(pos + around.len() - 1) % around.len()];
                (x, y) = (y, next);
            }
            let pts: Vec<Point> = cycle.iter().map(|&c| g.point(c)).collect();
            out.push((cycle, crate::geometry::polygon_area(&pts)));
        }
    }
    out
}

/// Bounded faces that are not triangles.
pub fn non_triangular_faces(g: &Graph) -> Vec<Vec<usize>> {
    faces(g).into_iter().filter(|(c, area)| *area > 0.0 && c.len() != 3).map(|(c, _)| c).collect()
}

/// A lower-bound instance: routing (or shortest paths) from `source` to
/// `target` costs at least `expected_lower`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialInstance {
    pub points: Vec<Point>,
    pub u: usize,
    pub w: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub k: usize,
    pub expected_lower: f64,
}

impl AdversarialInstance {
    pub fn graph(&self) -> Result<Graph, HarnessError> {
        Ok(build_half_theta6(&self.points)?)
    }

    /// The instance as a manifest line `key=value ...`.
    pub fn manifest(&self) -> String {
        format!(
            "u={} w={} alpha={} epsilon={} k={} expected_lower={}",
            self.u, self.w, self.alpha, self.epsilon, self.k, self.expected_lower
        )
    }
}

fn check_parameters(alpha: f64, epsilon: f64) -> Result<(), HarnessError> {
    if !(0.0..=FRAC_PI_6 + 1e-12).contains(&alpha) {
        return Err(HarnessError::AlphaRange(alpha));
    }
    if !(epsilon > 0.0 && epsilon < 1e-2) {
        return Err(HarnessError::EpsilonRange(epsilon));
    }
    Ok(())
}

fn require_valid(points: &[Point]) -> Result<(), HarnessError> {
    let report = validate_general_position(points, DEFAULT_MARGIN);
    if report.ok {
        Ok(())
    } else {
        Err(HarnessError::Construction(format!("{} general-position violations", report.violations.len())))
    }
}

const H: f64 = SQRT3 / 2.0;

/// Three points `u`, `w`, `p` with `p` just inside the upper-left corner of
/// the canonical triangle of `u` and `w`, which has unit side. The only
/// `u`–`w` path goes through `p`.
pub fn gen_lower_bound_positive(alpha: f64, epsilon: f64) -> Result<AdversarialInstance, HarnessError> {
    check_parameters(alpha, epsilon)?;
    let u = Point::new(0.0, 0.0);
    let w = Point::new((H * alpha.tan()).min(0.5 - epsilon), H);
    let corner = Point::new(-0.5, H);
    let p = corner.add(Point::unit(-PI / 6.0).scale(epsilon));
    let points = vec![u, w, p];
    require_valid(&points)?;
    let g = build_half_theta6(&points)?;
    if g.has_edge(0, 1) || !g.has_edge(0, 2) || !g.has_edge(1, 2) {
        return Err(HarnessError::Construction("unexpected edge set".into()));
    }
    let actual = ConeSystem::STANDARD.alpha_of(u, w).map_err(GraphError::from)?;
    Ok(AdversarialInstance {
        points,
        u: 0,
        w: 1,
        alpha: actual,
        epsilon,
        k: 0,
        expected_lower: (1.0 - 10.0 * epsilon) * positive_bound(actual) * u.dist(w),
    })
}

/// Two instances that look identical from `w` within `k` hops. Routing from
/// `w` to `u` on the first is expensive after a step toward the upper-left
/// corner, on the second after a step toward the upper-right corner.
///
/// Points: `u`, `w`, `a1` near the upper-left corner, `b1` near the
/// upper-right one (lower than `a1`). In the first instance `u` attaches to
/// `b1`. In the second `u` is shifted left so `b1` leaves its cone, and a
/// blocker `z` below `a1` captures both `u` and `b1`.
pub fn gen_lower_bound_negative(
    alpha: f64,
    epsilon: f64,
    k: usize,
) -> Result<(AdversarialInstance, AdversarialInstance), HarnessError> {
    check_parameters(alpha, epsilon)?;
    if k != 1 {
        return Err(HarnessError::Padding(k));
    }
    let e = epsilon;
    let w = Point::new(-(H * alpha.tan()).min(0.5 - 4.0 * e), H);
    let a1 = Point::new(-0.5 + 1.0 * e, H - 0.5 * e);
    let b1 = Point::new(0.5 - 1.0 * e, H - 0.8 * e);
    let z = Point::new(-0.5 + 0.8 * e, H - 1.2 * e);
    let first = vec![Point::new(0.0, 0.0), w, a1, b1];
    let second = vec![Point::new(-1.0 * e, 0.0), w, a1, b1, z];

    let make = |points: Vec<Point>| -> Result<AdversarialInstance, HarnessError> {
        require_valid(&points)?;
        let (bound, actual, positive) = pair_bound(points[1], points[0]).map_err(GraphError::from)?;
        if positive {
            return Err(HarnessError::Construction("target must lie in a negative cone".into()));
        }
        Ok(AdversarialInstance {
            points,
            u: 0,
            w: 1,
            alpha: actual,
            epsilon,
            k,
            expected_lower: (1.0 - 10.0 * epsilon) * bound,
        })
    };
    let (ia, ib) = (make(first)?, make(second)?);
    let (ga, gb) = (ia.graph()?, ib.graph()?);
    if !neighborhoods_identical(&ga, &gb, 1, k)? {
        return Err(HarnessError::Construction("neighborhoods of w differ".into()));
    }
    for (g, good, bad) in [(&ga, 3, 2), (&gb, 2, 3)] {
        let (via_bad, _) = shortest_avoiding(g, bad, 0, 1)?;
        let (via_good, _) = shortest_avoiding(g, good, 0, 1)?;
        if via_bad <= via_good {
            return Err(HarnessError::Construction("corner detour is not expensive".into()));
        }
    }
    Ok((ia, ib))
}

fn shortest_avoiding(g: &Graph, from: usize, to: usize, avoid: usize) -> Result<(f64, Vec<usize>), HarnessError> {
    let (dist, parent) = dijkstra(g, from, |x| x != avoid);
    if !dist[to].is_finite() {
        return Err(HarnessError::Disconnected { from, to, restricted: true });
    }
    Ok((dist[to], unwind(&parent, from, to)))
}

/// Whether the `k`-hop views around `w` coincide: same vertices, same
/// coordinates, same edges.
pub fn neighborhoods_identical(a: &Graph, b: &Graph, w: usize, k: usize) -> Result<bool, HarnessError> {
    let (na, nb) = (neighborhood(a, w, k)?, neighborhood(b, w, k)?);
    let va: Vec<(usize, Point)> = na.vertices().collect();
    let vb: Vec<(usize, Point)> = nb.vertices().collect();
    Ok(va == vb && na.edges() == nb.edges())
}

/// Measured routes on both instances of a negative pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundOutcome {
    pub first_hops: (usize, usize),
    pub ratios: (f64, f64),
    pub expected: (f64, f64),
    pub identical_neighborhoods: bool,
}

impl LowerBoundOutcome {
    /// Ratio on the instance the router's choice at `w` makes expensive.
    pub fn adverse_ratio(&self) -> f64 {
        self.ratios.0.max(self.ratios.1)
    }

    pub fn adverse_expected(&self) -> f64 {
        if self.ratios.0 >= self.ratios.1 {
            self.expected.0
        } else {
            self.expected.1
        }
    }
}

pub fn run_negative_pair(
    pair: &(AdversarialInstance, AdversarialInstance),
    algo: Algorithm,
) -> Result<LowerBoundOutcome, HarnessError> {
    let route = |inst: &AdversarialInstance| -> Result<RouteTrace, HarnessError> {
        let g = inst.graph()?;
        Ok(match algo {
            Algorithm::Stateless => route_stateless(&g, inst.w, inst.u)?,
            Algorithm::Stateful => route_stateful(&g, inst.w, inst.u)?,
            other => return Err(HarnessError::Unsupported { algo: other, flavor: Flavor::Half6 }),
        })
    };
    let (ta, tb) = (route(&pair.0)?, route(&pair.1)?);
    let hop = |t: &RouteTrace| t.steps.first().map_or(t.target, |s| s.to);
    let dist = |i: &AdversarialInstance| i.points[i.u].dist(i.points[i.w]);
    Ok(LowerBoundOutcome {
        first_hops: (hop(&ta), hop(&tb)),
        ratios: (ta.ratio(), tb.ratio()),
        expected: (pair.0.expected_lower / dist(&pair.0), pair.1.expected_lower / dist(&pair.1)),
        identical_neighborhoods: neighborhoods_identical(&pair.0.graph()?, &pair.1.graph()?, pair.0.w, pair.0.k)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::negative_bound;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn two_points_use_the_direct_edge() {
        let g = build_half_theta6(&[p(0.0, 0.0), p(0.3, 1.0)]).unwrap();
        let (len, path) = oracle_shortest_path(&g, 0, 1, None).unwrap();
        assert!((len - p(0.0, 0.0).dist(p(0.3, 1.0))).abs() < 1e-15);
        assert_eq!(path, vec![0, 1]);
    }

    #[test]
    fn triangle_takes_the_cheaper_of_direct_and_two_hop() {
        let pts = [p(0.0, 0.0), p(1.0, 0.1), p(0.45, 0.3)];
        let edges = vec![(0, 1), (1, 2), (0, 2)];
        let g = Graph::from_edges(pts.to_vec(), edges, Flavor::Full6).unwrap();
        let direct = pts[0].dist(pts[1]);
        let detour = pts[0].dist(pts[2]) + pts[2].dist(pts[1]);
        let (len, _) = oracle_shortest_path(&g, 0, 1, None).unwrap();
        assert_eq!(len, direct.min(detour));
        let g = Graph::from_edges(pts.to_vec(), vec![(1, 2), (0, 2)], Flavor::Full6).unwrap();
        let (len, path) = oracle_shortest_path(&g, 0, 1, None).unwrap();
        assert!((len - detour).abs() < 1e-15);
        assert_eq!(path, vec![0, 2, 1]);
    }

    #[test]
    fn disconnected_pair_is_an_error() {
        let g = Graph::from_edges(vec![p(0.0, 0.0), p(1.0, 0.2), p(0.3, 0.9)], vec![(0, 1)], Flavor::Full6).unwrap();
        assert!(matches!(
            oracle_shortest_path(&g, 0, 2, None),
            Err(HarnessError::Disconnected { from: 0, to: 2, restricted: false })
        ));
        assert!(matches!(exhaustive_shortest_path(&g, 0, 2), Err(HarnessError::Disconnected { .. })));
    }

    #[test]
    fn restricted_paths_respect_the_sharp_bound() {
        let (g, _) = random_graph(Flavor::Half6, 50, 4).unwrap();
        let sys = ConeSystem::STANDARD;
        let pairs = pair_list(g.len(), Pairs::Sample { count: 100, seed: 9 });
        for (u, v) in pairs {
            let tri = sys.pair_triangle(g.point(u), g.point(v)).unwrap();
            let (len, path) = oracle_shortest_path(&g, u, v, Some(&tri)).unwrap();
            assert!(path.iter().all(|&x| tri.contains(g.point(x))));
            assert!(len <= positive_bound(tri.alpha) * g.point(u).dist(g.point(v)) + 1e-9);
        }
    }

    #[test]
    fn positive_instance_limits() {
        for (alpha, limit) in [(0.0, SQRT3), (FRAC_PI_6, 2.0)] {
            let inst = gen_lower_bound_positive(alpha, 1e-6).unwrap();
            let g = inst.graph().unwrap();
            let (len, path) = exhaustive_shortest_path(&g, inst.u, inst.w).unwrap();
            assert_eq!(path, vec![0, 2, 1]);
            let ratio = len / inst.points[0].dist(inst.points[1]);
            assert!((ratio - limit).abs() < 1e-4, "alpha {alpha}: {ratio}");
            assert!(len >= inst.expected_lower);
        }
    }

    #[test]
    fn positive_instance_is_tight_for_every_alpha() {
        for i in 0..=4 {
            let alpha = i as f64 * PI / 24.0;
            let inst = gen_lower_bound_positive(alpha, 1e-4).unwrap();
            let g = inst.graph().unwrap();
            let (len, _) = oracle_shortest_path(&g, inst.u, inst.w, None).unwrap();
            let d = inst.points[0].dist(inst.points[1]);
            assert!(len >= inst.expected_lower);
            assert!(len <= positive_bound(inst.alpha) * d + 1e-9);
        }
    }

    #[test]
    fn generator_parameter_checks() {
        assert!(matches!(gen_lower_bound_positive(1.0, 1e-4), Err(HarnessError::AlphaRange(_))));
        assert!(matches!(gen_lower_bound_positive(0.1, 0.0), Err(HarnessError::EpsilonRange(_))));
        assert!(matches!(gen_lower_bound_negative(0.0, 1e-4, 2), Err(HarnessError::Padding(2))));
    }

    #[test]
    fn negative_pair_separates_routing_from_spanning() {
        let pair = gen_lower_bound_negative(0.0, 1e-4, 1).unwrap();
        let out = run_negative_pair(&pair, Algorithm::Stateless).unwrap();
        assert!(out.identical_neighborhoods);
        assert_eq!(out.first_hops.0, out.first_hops.1);
        assert!(out.adverse_ratio() >= 5.0 / SQRT3 - 1e-2, "{out:?}");
        assert!(out.adverse_ratio() >= out.adverse_expected());
        assert!((negative_bound(0.0) - 5.0 / SQRT3).abs() < 1e-15);
        // the shortest path stays below the spanning bound in both instances
        for inst in [&pair.0, &pair.1] {
            let g = inst.graph().unwrap();
            let (len, _) = oracle_shortest_path(&g, inst.w, inst.u, None).unwrap();
            assert!(len / inst.points[0].dist(inst.points[1]) <= 2.0);
        }
    }

    #[test]
    fn negative_pair_over_alpha() {
        for i in 0..=3 {
            let alpha = i as f64 * PI / 24.0;
            let pair = gen_lower_bound_negative(alpha, 1e-4, 1).unwrap();
            let out = run_negative_pair(&pair, Algorithm::Stateless).unwrap();
            assert!(out.identical_neighborhoods);
            assert!(out.adverse_ratio() >= out.adverse_expected(), "alpha {alpha}: {out:?}");
        }
    }

    #[test]
    fn audit_flags_inflated_step() {
        let (g, _) = random_graph(Flavor::Half6, 40, 2).unwrap();
        let mut flagged = 0;
        for (u, v) in pair_list(g.len(), Pairs::Sample { count: 60, seed: 1 }) {
            let mut trace = route_stateless(&g, u, v).unwrap();
            assert!(audit_potential(&trace, &g).is_clean());
            trace.steps[0].length += 10.0;
            flagged += usize::from(!audit_potential(&trace, &g).step_violations.is_empty());
        }
        assert_eq!(flagged, 60);
    }

    #[test]
    fn faces_of_a_triangle() {
        let g = build_half_theta6(&[p(0.0, 0.0), p(1.0, 0.1), p(0.4, 0.8)]).unwrap();
        let f = faces(&g);
        assert_eq!(f.len(), 2);
        assert_eq!(f.iter().filter(|(_, a)| *a > 0.0).count(), 1);
        assert!(non_triangular_faces(&g).is_empty());
        assert!(crossing_edges(&g).is_empty());
    }

    #[test]
    fn crossing_is_detected() {
        let pts = vec![p(0.0, 0.0), p(1.0, 1.0), p(0.0, 1.0), p(1.0, 0.0)];
        let g = Graph::from_edges(pts, vec![(0, 1), (2, 3)], Flavor::Full6).unwrap();
        assert_eq!(crossing_edges(&g).len(), 1);
    }

    #[test]
    fn square_face_is_not_triangular() {
        let pts = vec![p(0.0, 0.0), p(1.0, 0.05), p(1.05, 1.0), p(0.05, 1.1)];
        let g = Graph::from_edges(pts, vec![(0, 1), (1, 2), (2, 3), (3, 0)], Flavor::Full6).unwrap();
        assert_eq!(non_triangular_faces(&g).len(), 1);
    }

    #[test]
    fn report_tsv_has_header_rows_and_footer() {
        let (g, _) = random_graph(Flavor::Half6, 8, 5).unwrap();
        let r = measure_spanning_ratio(&g, 0).unwrap();
        let tsv = r.to_tsv();
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines.len(), 1 + 28 + 1);
        assert!(lines[0].starts_with("trial\tu\tv"));
        assert!(lines.last().unwrap().starts_with("# max_ratio="));
    }

    #[test]
    fn sweeps_are_deterministic() {
        let a = spanning_sweep(Flavor::Half6, 4, 20, 77).unwrap();
        let b = spanning_sweep(Flavor::Half6, 4, 20, 77).unwrap();
        assert_eq!(a.to_tsv(), b.to_tsv());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn search_matches_enumeration(seed in 0u64..5000, n in 2usize..=10) {
            let (g, _) = random_graph(Flavor::Half6, n, seed).unwrap();
            for u in 0..n {
                for v in u + 1..n {
                    let (a, _) = oracle_shortest_path(&g, u, v, None).unwrap();
                    let (b, _) = exhaustive_shortest_path(&g, u, v).unwrap();
                    prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
                }
            }
        }

        #[test]
        fn half_theta_is_a_plane_triangulation(seed in 0u64..5000, n in 3usize..40) {
            let (g, _) = random_graph(Flavor::Half6, n, seed).unwrap();
            prop_assert!(crossing_edges(&g).is_empty());
            prop_assert!(non_triangular_faces(&g).is_empty());
            prop_assert!(empty_triangle_mismatches(&g).unwrap().is_empty());
        }
    }
}
