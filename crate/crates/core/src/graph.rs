//! Half-θ6-graph construction, rotated unions and locality-restricted views.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::f64::consts::{FRAC_PI_3, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{polar_angle, Cone, ConeSystem, GeometryError, Point};

/// Default angular margin (radians) used by the general-position validator.
pub const DEFAULT_MARGIN: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("points are not in general position: {0}")]
    GeneralPosition(GeneralPositionReport),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("vertex index {index} out of range (n = {n})")]
    InvalidIndex { index: usize, n: usize },
    #[error("neighborhood radius must be at least 1")]
    InvalidHops,
    #[error("vertex {0} is not visible from this view")]
    NotVisible(usize),
    #[error("rotated union needs k >= 1")]
    InvalidUnion,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty point set")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which construction produced a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    Half6,
    Full6,
    Union(usize),
    G12,
    G9,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flavor::Half6 => f.write_str("half6"),
            Flavor::Full6 => f.write_str("full6"),
            Flavor::Union(k) => write!(f, "union:{k}"),
            Flavor::G12 => f.write_str("g12"),
            Flavor::G9 => f.write_str("g9"),
        }
    }
}

impl FromStr for Flavor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "half6" => Ok(Flavor::Half6),
            "full6" => Ok(Flavor::Full6),
            "g12" => Ok(Flavor::G12),
            "g9" => Ok(Flavor::G9),
            _ => {
                let k = s
                    .strip_prefix("union:")
                    .and_then(|k| k.parse::<usize>().ok())
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| format!("unknown graph flavor `{s}`"))?;
                Ok(Flavor::Union(k))
            }
        }
    }
}

/// A neighbor together with the cone (of the standard system, at this
/// endpoint) that contains it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Adjacent {
    pub vertex: usize,
    pub cone: Cone,
}

/// Immutable undirected geometric graph with cone-labelled adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    points: Vec<Point>,
    adj: Vec<Vec<Adjacent>>,
    edge_count: usize,
    flavor: Flavor,
}

impl Graph {
    /// Builds a graph from an edge list; duplicate and reversed edges are merged.
    pub fn from_edges(
        points: Vec<Point>,
        edges: impl IntoIterator<Item = (usize, usize)>,
        flavor: Flavor,
    ) -> Result<Graph, GraphError> {
        let n = points.len();
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            for idx in [i, j] {
                if idx >= n {
                    return Err(GraphError::InvalidIndex { index: idx, n });
                }
            }
            if i == j {
                return Err(GeometryError::DegeneratePair(points[i], points[j]).into());
            }
            set.insert((i.min(j), i.max(j)));
        }
        let mut adj = vec![Vec::new(); n];
        for &(i, j) in &set {
            let sys = ConeSystem::STANDARD;
            adj[i].push(Adjacent { vertex: j, cone: sys.cone_of(points[i], points[j])? });
            adj[j].push(Adjacent { vertex: i, cone: sys.cone_of(points[j], points[i])? });
        }
        for list in &mut adj {
            list.sort_by_key(|a| a.vertex);
        }
        Ok(Graph { points, adj, edge_count: set.len(), flavor })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, v: usize) -> Point {
        self.points[v]
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: usize) -> &[Adjacent] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj
            .get(u)
            .is_some_and(|list| list.binary_search_by_key(&v, |a| a.vertex).is_ok())
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (i, list) in self.adj.iter().enumerate() {
            out.extend(list.iter().filter(|a| a.vertex > i).map(|a| (i, a.vertex)));
        }
        out
    }

    pub fn edge_length(&self, u: usize, v: usize) -> f64 {
        self.points[u].dist(self.points[v])
    }

    pub fn check_index(&self, v: usize) -> Result<(), GraphError> {
        if v < self.len() {
            Ok(())
        } else {
            Err(GraphError::InvalidIndex { index: v, n: self.len() })
        }
    }

    /// Same vertices and edges, relabelled with another flavor.
    pub fn with_flavor(mut self, flavor: Flavor) -> Graph {
        self.flavor = flavor;
        self
    }

    pub fn is_connected(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        bfs_distances(self, 0, usize::MAX).len() == self.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ViolationKind {
    Coincident,
    /// The pair direction lies within the margin of this boundary direction.
    NearBoundary { boundary: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub pair: (usize, usize),
    pub kind: ViolationKind,
    /// Angular distance to the boundary (zero for coincident points).
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GeneralPositionReport {
    pub ok: bool,
    pub margin: f64,
    pub violations: Vec<Violation>,
}

impl fmt::Display for GeneralPositionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violation(s) at margin {:e}", self.violations.len(), self.margin)?;
        for v in self.violations.iter().take(5) {
            match v.kind {
                ViolationKind::Coincident => write!(f, "; {:?} coincident", v.pair)?,
                ViolationKind::NearBoundary { boundary } => write!(
                    f,
                    "; {:?} within {:e} of direction {:.6}",
                    v.pair, v.deviation, boundary
                )?,
            }
        }
        if self.violations.len() > 5 {
            write!(f, "; ...")?;
        }
        Ok(())
    }
}

pub fn validate_general_position(points: &[Point], margin: f64) -> GeneralPositionReport {
    validate_general_position_rotated(points, margin, &[0.0])
}

/// Validates against the boundaries of every cone system in `rotations`.
pub fn validate_general_position_rotated(
    points: &[Point],
    margin: f64,
    rotations: &[f64],
) -> GeneralPositionReport {
    let mut violations = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = points[j].sub(points[i]);
            if d.x == 0.0 && d.y == 0.0 {
                violations.push(Violation {
                    pair: (i, j),
                    kind: ViolationKind::Coincident,
                    deviation: 0.0,
                });
                continue;
            }
            let dir = polar_angle(d);
            for &rot in rotations {
                let rel = (dir - rot).rem_euclid(FRAC_PI_3);
                let deviation = rel.min(FRAC_PI_3 - rel);
                if deviation < margin {
                    let k = ((dir - rot) / FRAC_PI_3).round();
                    violations.push(Violation {
                        pair: (i, j),
                        kind: ViolationKind::NearBoundary {
                            boundary: (rot + k * FRAC_PI_3).rem_euclid(2.0 * PI),
                        },
                        deviation,
                    });
                    break;
                }
            }
        }
    }
    GeneralPositionReport { ok: violations.is_empty(), margin, violations }
}

/// Closest vertex to `u` in `cone` under `system`: smallest projection on the
/// bisector, then smallest perpendicular offset, then smallest index.
pub fn closest_in_cone(points: &[Point], u: usize, cone: Cone, system: ConeSystem) -> Option<usize> {
    let apex = points[u];
    let mut best: Option<(f64, f64, usize)> = None;
    for (v, &p) in points.iter().enumerate() {
        if v == u || p == apex || system.cone_of(apex, p).ok() != Some(cone) {
            continue;
        }
        let key = (
            system.projection_onto(apex, p, cone),
            system.perpendicular_offset(apex, p, cone).abs(),
            v,
        );
        let better = match best {
            None => true,
            Some(b) => key.0 < b.0 || (key.0 == b.0 && (key.1 < b.1 || (key.1 == b.1 && key.2 < b.2))),
        };
        if better {
            best = Some(key);
        }
    }
    best.map(|b| b.2)
}

fn closest_picks(points: &[Point], system: ConeSystem, cones: &[Cone]) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..points.len() {
        for &cone in cones {
            if let Some(v) = closest_in_cone(points, u, cone, system) {
                edges.push((u, v));
            }
        }
    }
    edges
}

const POSITIVE: [Cone; 3] = [Cone::positive(0), Cone::positive(1), Cone::positive(2)];

fn require_points(points: &[Point]) -> Result<(), GraphError> {
    if points.is_empty() {
        return Err(GraphError::Empty);
    }
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite(*p).into());
    }
    Ok(())
}

fn require_general_position(points: &[Point], margin: f64, rotations: &[f64]) -> Result<(), GraphError> {
    let report = validate_general_position_rotated(points, margin, rotations);
    if report.ok {
        Ok(())
    } else {
        Err(GraphError::GeneralPosition(report))
    }
}

pub fn build_half_theta6(points: &[Point]) -> Result<Graph, GraphError> {
    build_half_theta6_with(points, ConeSystem::STANDARD, DEFAULT_MARGIN)
}

/// Half-θ6-graph over an arbitrary cone system. Adjacency cone labels always
/// refer to the standard system.
pub fn build_half_theta6_with(
    points: &[Point],
    system: ConeSystem,
    margin: f64,
) -> Result<Graph, GraphError> {
    require_points(points)?;
    require_general_position(points, margin, &[system.rotation])?;
    let edges = closest_picks(points, system, &POSITIVE);
    Graph::from_edges(points.to_vec(), edges, Flavor::Half6)
}

pub fn build_full_theta6(points: &[Point]) -> Result<Graph, GraphError> {
    require_points(points)?;
    require_general_position(points, DEFAULT_MARGIN, &[0.0])?;
    let edges = closest_picks(points, ConeSystem::STANDARD, &Cone::ALL);
    Graph::from_edges(points.to_vec(), edges, Flavor::Full6)
}

/// Rotations `i·π/(3k)` for `i = 0..k`.
pub fn union_rotations(k: usize) -> Vec<f64> {
    (0..k).map(|i| i as f64 * PI / (3.0 * k as f64)).collect()
}

pub fn build_rotated_union(points: &[Point], k: usize) -> Result<Graph, GraphError> {
    if k == 0 {
        return Err(GraphError::InvalidUnion);
    }
    require_points(points)?;
    let rotations = union_rotations(k);
    require_general_position(points, DEFAULT_MARGIN, &rotations)?;
    let mut edges = Vec::new();
    for &rot in &rotations {
        edges.extend(closest_picks(points, ConeSystem::rotated(rot), &POSITIVE));
    }
    let flavor = if k == 1 { Flavor::Half6 } else { Flavor::Union(k) };
    Graph::from_edges(points.to_vec(), edges, flavor)
}

/// Read access available to a router standing at `center`.
pub trait LocalView {
    fn center(&self) -> usize;
    fn point(&self, v: usize) -> Result<Point, GraphError>;
    fn neighbors(&self, v: usize) -> Result<&[Adjacent], GraphError>;
}

/// Produces the view a router gets at each vertex it visits.
pub trait ViewSource {
    type View: LocalView;
    fn view(&self, center: usize) -> Result<Self::View, GraphError>;
}

/// The `k`-hop ball around a vertex: coordinates of every vertex within `k`
/// edges and the edges among them.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodView {
    center: usize,
    hops: usize,
    visible: BTreeMap<usize, Point>,
    edges: BTreeMap<usize, Vec<Adjacent>>,
}

impl NeighborhoodView {
    pub fn hops(&self) -> usize {
        self.hops
    }

    pub fn vertices(&self) -> impl Iterator<Item = (usize, Point)> + '_ {
        self.visible.iter().map(|(&v, &p)| (v, p))
    }

    pub fn contains(&self, v: usize) -> bool {
        self.visible.contains_key(&v)
    }

    pub fn len(&self) -> usize {
        self.visible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visible.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.values().map(Vec::len).sum::<usize>() / 2
    }

    /// Visible edges as `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (&i, list) in &self.edges {
            out.extend(list.iter().filter(|a| a.vertex > i).map(|a| (i, a.vertex)));
        }
        out
    }
}

impl LocalView for NeighborhoodView {
    fn center(&self) -> usize {
        self.center
    }

    fn point(&self, v: usize) -> Result<Point, GraphError> {
        self.visible.get(&v).copied().ok_or(GraphError::NotVisible(v))
    }

    fn neighbors(&self, v: usize) -> Result<&[Adjacent], GraphError> {
        self.edges.get(&v).map(Vec::as_slice).ok_or(GraphError::NotVisible(v))
    }
}

impl ViewSource for Graph {
    type View = NeighborhoodView;

    fn view(&self, center: usize) -> Result<NeighborhoodView, GraphError> {
        neighborhood(self, center, 1)
    }
}

fn bfs_distances(g: &Graph, v: usize, k: usize) -> BTreeMap<usize, usize> {
    let mut dist = BTreeMap::from([(v, 0usize)]);
    let mut queue = VecDeque::from([v]);
    while let Some(x) = queue.pop_front() {
        let d = dist[&x];
        if d == k {
            continue;
        }
        for a in g.neighbors(x) {
            if !dist.contains_key(&a.vertex) {
                dist.insert(a.vertex, d + 1);
                queue.push_back(a.vertex);
            }
        }
    }
    dist
}

pub fn neighborhood(g: &Graph, v: usize, k: usize) -> Result<NeighborhoodView, GraphError> {
    g.check_index(v)?;
    if k == 0 {
        return Err(GraphError::InvalidHops);
    }
    let dist = bfs_distances(g, v, k);
    let visible: BTreeMap<usize, Point> = dist.keys().map(|&x| (x, g.point(x))).collect();
    let edges = dist
        .keys()
        .map(|&x| {
            let list = g
                .neighbors(x)
                .iter()
                .filter(|a| visible.contains_key(&a.vertex))
                .copied()
                .collect();
            (x, list)
        })
        .collect();
    Ok(NeighborhoodView { center: v, hops: k, visible, edges })
}

/// `n` points uniform in the unit square, drawn from ChaCha8 seeded with `seed`.
pub fn random_points(n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Point::new(rng.gen(), rng.gen())).collect()
}

/// Like [`random_points`], but redraws from the same stream until the set is
/// in general position for every cone system in `rotations`.
pub fn random_general_position(n: usize, seed: u64, rotations: &[f64]) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let pts: Vec<Point> = (0..n).map(|_| Point::new(rng.gen(), rng.gen())).collect();
        if validate_general_position_rotated(&pts, DEFAULT_MARGIN, rotations).ok {
            return pts;
        }
    }
}

/// Affine map onto the unit box: translate the minimum corner to the origin
/// and scale the larger extent to 1. Aspect ratio and cone membership are kept.
pub fn normalize_unit_box(points: &[Point]) -> Vec<Point> {
    if points.is_empty() {
        return Vec::new();
    }
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in points {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let extent = (hi.x - lo.x).max(hi.y - lo.y);
    let scale = if extent > 0.0 { 1.0 / extent } else { 1.0 };
    points.iter().map(|p| p.sub(lo).scale(scale)).collect()
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, body))
    })
}

fn parse_point(line: usize, body: &str) -> Result<Point, GraphError> {
    let fields: Vec<&str> = body.split_whitespace().collect();
    let err = |message: String| GraphError::Parse { line, message };
    if fields.len() != 2 {
        return Err(err(format!("expected `x y`, found {} field(s)", fields.len())));
    }
    let coord = |s: &str| s.parse::<f64>().map_err(|e| err(format!("bad coordinate `{s}`: {e}")));
    let p = Point::new(coord(fields[0])?, coord(fields[1])?);
    if !p.is_finite() {
        return Err(err("non-finite coordinate".into()));
    }
    Ok(p)
}

pub fn parse_points(text: &str) -> Result<Vec<Point>, GraphError> {
    content_lines(text).map(|(line, body)| parse_point(line, body)).collect()
}

pub fn format_points(points: &[Point]) -> String {
    points.iter().map(|p| format!("{} {}\n", p.x, p.y)).collect()
}

pub fn format_graph(g: &Graph) -> String {
    let mut out = format!("{} {} {}\n", g.len(), g.edge_count(), g.flavor());
    out.push_str(&format_points(g.points()));
    for (i, j) in g.edges() {
        out.push_str(&format!("{i} {j}\n"));
    }
    out
}

pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    let mut lines = content_lines(text);
    let (line, header) = lines.next().ok_or(GraphError::Parse {
        line: 1,
        message: "missing header `n m flavor`".into(),
    })?;
    let err = |line: usize, message: String| GraphError::Parse { line, message };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(err(line, "header must be `n m flavor`".into()));
    }
    let n: usize = fields[0].parse().map_err(|_| err(line, format!("bad vertex count `{}`", fields[0])))?;
    let m: usize = fields[1].parse().map_err(|_| err(line, format!("bad edge count `{}`", fields[1])))?;
    let flavor: Flavor = fields[2].parse().map_err(|e| err(line, e))?;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, body) = lines.next().ok_or_else(|| err(line, "truncated point list".into()))?;
        points.push(parse_point(line, body)?);
    }
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (line, body) = lines.next().ok_or_else(|| err(line, "truncated edge list".into()))?;
        let ij: Vec<usize> = body
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| err(line, format!("bad vertex index `{s}`"))))
            .collect::<Result<_, _>>()?;
        if ij.len() != 2 {
            return Err(err(line, "expected `i j`".into()));
        }
        edges.push((ij[0], ij[1]));
    }
    if let Some((line, _)) = lines.next() {
        return Err(err(line, "trailing content after edge list".into()));
    }
    let g = Graph::from_edges(points, edges, flavor)?;
    if g.edge_count() != m {
        return Err(err(1, format!("header declares {m} edges, found {} distinct", g.edge_count())));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::canonical_triangle;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    /// Independent O(n³) oracle: pair is an edge iff no third point lies
    /// strictly inside its canonical triangle.
    fn empty_triangle_edges(points: &[Point]) -> BTreeSet<(usize, usize)> {
        let sys = ConeSystem::STANDARD;
        let mut out = BTreeSet::new();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let tri = sys.pair_triangle(points[i], points[j]).unwrap();
                let empty = (0..points.len())
                    .filter(|&k| k != i && k != j)
                    .all(|k| !tri.strictly_contains(points[k]));
                if empty {
                    out.insert((i, j));
                }
            }
        }
        out
    }

    #[test]
    fn validator_examples() {
        let r = validate_general_position(&[p(0.0, 0.0), p(1.0, 0.0)], 1e-6);
        assert!(!r.ok);
        assert!(matches!(r.violations[0].kind, ViolationKind::NearBoundary { .. }));
        assert!(validate_general_position(&[p(0.0, 0.0), p(1.0, 2.0)], 1e-6).ok);
        let r = validate_general_position(&[p(0.0, 0.0), p(0.0, 0.0)], 1e-6);
        assert_eq!(r.violations[0].kind, ViolationKind::Coincident);
    }

    #[test]
    fn validator_sees_rotated_boundaries() {
        let pts = [p(0.0, 0.0), Point::unit(PI / 6.0)];
        assert!(validate_general_position(&pts, 1e-7).ok);
        assert!(!validate_general_position_rotated(&pts, 1e-7, &union_rotations(2)).ok);
    }

    #[test]
    fn two_points_one_edge() {
        let g = build_half_theta6(&[p(0.0, 0.0), p(0.3, 0.9)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!(g.is_connected());
        let f = build_full_theta6(&[p(0.0, 0.0), p(0.3, 0.9)]).unwrap();
        assert_eq!(f.edge_count(), 1);
    }

    #[test]
    fn closest_by_projection() {
        let pts = [p(0.0, 0.0), p(0.1, 1.0), p(-0.3, 2.0)];
        let g = build_half_theta6(&pts).unwrap();
        let c0: Vec<usize> = g
            .neighbors(0)
            .iter()
            .filter(|a| a.cone == Cone::positive(0))
            .map(|a| a.vertex)
            .collect();
        assert_eq!(c0, vec![1]);
        assert!(!g.has_edge(0, 2));
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(matches!(
            build_half_theta6(&[p(0.0, 0.0), p(1.0, 0.0)]),
            Err(GraphError::GeneralPosition(_))
        ));
        assert!(matches!(build_half_theta6(&[]), Err(GraphError::Empty)));
    }

    #[test]
    fn edges_match_empty_triangle_oracle() {
        for seed in 0..20 {
            let pts = random_general_position(60, seed, &[0.0]);
            let g = build_half_theta6(&pts).unwrap();
            let ours: BTreeSet<_> = g.edges().into_iter().collect();
            assert_eq!(ours, empty_triangle_edges(&pts), "seed {seed}");
        }
    }

    #[test]
    fn half_theta6_structure() {
        for seed in 0..20 {
            let pts = random_general_position(100, 1000 + seed, &[0.0]);
            let g = build_half_theta6(&pts).unwrap();
            assert!(g.edge_count() <= 3 * g.len());
            assert!(g.is_connected());
            for v in 0..g.len() {
                for i in 0..3 {
                    let out = g.neighbors(v).iter().filter(|a| a.cone == Cone::positive(i)).count();
                    assert!(out <= 1);
                }
                for a in g.neighbors(v) {
                    assert!(g.has_edge(a.vertex, v));
                }
            }
        }
    }

    #[test]
    fn full_theta6_is_union_of_two_half_graphs() {
        for seed in 0..10 {
            let pts = random_general_position(50, 77 + seed, &[0.0]);
            let half = build_half_theta6(&pts).unwrap();
            let rotated = build_half_theta6_with(&pts, ConeSystem::rotated(FRAC_PI_3), DEFAULT_MARGIN).unwrap();
            let full = build_full_theta6(&pts).unwrap();
            let mut expected: BTreeSet<_> = half.edges().into_iter().collect();
            expected.extend(rotated.edges());
            let got: BTreeSet<_> = full.edges().into_iter().collect();
            assert_eq!(got, expected);
            assert!(half.edges().iter().all(|e| got.contains(e)));
        }
    }

    #[test]
    fn union_of_one_is_half_graph() {
        let pts = random_general_position(40, 5, &[0.0]);
        let a = build_half_theta6(&pts).unwrap();
        let b = build_rotated_union(&pts, 1).unwrap();
        assert_eq!(a.edges(), b.edges());
        let u3 = build_rotated_union(&random_general_position(40, 6, &union_rotations(3)), 3).unwrap();
        assert!(u3.edge_count() <= 9 * 40);
        assert_eq!(u3.flavor(), Flavor::Union(3));
    }

    #[test]
    fn neighborhood_of_path() {
        // a - b - c along a direction away from the cone boundaries
        let pts = vec![p(0.0, 0.0), p(0.1, 1.0), p(0.2, 2.0)];
        let g = Graph::from_edges(pts, [(0, 1), (1, 2)], Flavor::Half6).unwrap();
        let view = neighborhood(&g, 1, 1).unwrap();
        assert_eq!(view.len(), 3);
        assert_eq!(view.edge_count(), 2);
        let view0 = neighborhood(&g, 0, 1).unwrap();
        assert!(view0.point(2).is_err());
        assert!(neighborhood(&g, 0, 0).is_err());
        assert!(neighborhood(&g, 9, 1).is_err());
    }

    #[test]
    fn neighborhood_matches_reference_bfs() {
        let pts = random_general_position(80, 9, &[0.0]);
        let g = build_half_theta6(&pts).unwrap();
        let edges = g.edges();
        for v in [0, 17, 42, 79] {
            // reference: two rounds of edge-list relaxation
            let mut ball: BTreeSet<usize> = BTreeSet::from([v]);
            for _ in 0..2 {
                let frontier: Vec<usize> = edges
                    .iter()
                    .filter_map(|&(i, j)| {
                        if ball.contains(&i) {
                            Some(j)
                        } else if ball.contains(&j) {
                            Some(i)
                        } else {
                            None
                        }
                    })
                    .collect();
                ball.extend(frontier);
            }
            let view = neighborhood(&g, v, 2).unwrap();
            let got: BTreeSet<usize> = view.vertices().map(|(x, _)| x).collect();
            assert_eq!(got, ball);
        }
    }

    #[test]
    fn graph_file_round_trip() {
        let pts = random_general_position(30, 3, &[0.0]);
        let g = build_half_theta6(&pts).unwrap();
        let text = format_graph(&g);
        let back = parse_graph(&text).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_points("# header\n0 0\n1 x\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 3, .. }));
        assert!(parse_graph("2 1 half6\n0 0\n").is_err());
        assert!(parse_graph("1 0 hexagon\n0 0\n").is_err());
        assert_eq!(parse_points("0.5 0.25 # comment\n\n").unwrap(), vec![p(0.5, 0.25)]);
    }

    #[test]
    fn flavor_names_round_trip() {
        for f in [Flavor::Half6, Flavor::Full6, Flavor::Union(3), Flavor::G12, Flavor::G9] {
            assert_eq!(f.to_string().parse::<Flavor>().unwrap(), f);
        }
        assert!("union:0".parse::<Flavor>().is_err());
    }

    #[test]
    fn edge_triangles_are_empty() {
        let pts = random_general_position(40, 21, &[0.0]);
        let g = build_half_theta6(&pts).unwrap();
        for (i, j) in g.edges() {
            let (u, w) = if crate::geometry::cone_of(pts[i], pts[j]).unwrap().is_positive() {
                (i, j)
            } else {
                (j, i)
            };
            let tri = canonical_triangle(pts[u], pts[w]).unwrap();
            assert!((0..pts.len()).all(|k| k == u || k == w || !tri.strictly_contains(pts[k])));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn normalization_keeps_edges(seed in 0u64..1000, scale in 0.01..100.0f64, dx in -50.0..50.0f64) {
            let pts = random_general_position(25, seed, &[0.0]);
            let moved: Vec<Point> = pts.iter().map(|q| p(q.x * scale + dx, q.y * scale - dx)).collect();
            let back = normalize_unit_box(&moved);
            for q in &back {
                prop_assert!(q.x >= -1e-12 && q.x <= 1.0 + 1e-12 && q.y >= -1e-12 && q.y <= 1.0 + 1e-12);
            }
            let a = build_half_theta6(&pts).unwrap();
            let b = build_half_theta6(&back).unwrap();
            prop_assert_eq!(a.edges(), b.edges());
        }
    }
}
