//! Bounded-degree subgraphs G12 and G9 and routers that simulate the
//! preferred-side router on them.
//!
//! Both simulations replay the decisions of [`route_stateful`] on the
//! half-θ6-graph. Missing positive-cone edges are recovered by walking the
//! canonical path of the far endpoint (exponential search on G12, a stored
//! direction bit on G9); missing negative-cone edges are recovered through the
//! closest vertex followed by a canonical-path walk.
//!
//! [`route_stateful`]: crate::router::route_stateful

use std::f64::consts::{FRAC_PI_6, PI, TAU};
use std::fmt;

use thiserror::Error;

use crate::geometry::{polar_angle, Cone, ConeSystem, Point, Region, RegionSet, Side};
use crate::graph::{Flavor, Graph, GraphError, ViewSource};
use crate::router::{
    classify_stateful, pair_bound, potential, side_left_behind, Local, RouteError, RouteTrace,
    RouterMemory, RoutingCase, Seen, Step,
};

/// Overhead factor of G12 routing over the half-θ6 bounds.
pub const G12_FACTOR: f64 = 19.0;
/// Overhead factor of G9 routing over the half-θ6 bounds.
pub const G9_FACTOR: f64 = 3.0;

#[derive(Debug, Error)]
pub enum DegreeError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error("expected a {expected} graph, got {found}")]
    FlavorMismatch { expected: Flavor, found: Flavor },
    #[error("vertex {anchor} has no neighbor in cone {cone}")]
    EmptyCone { anchor: usize, cone: Cone },
    #[error("consecutive neighbors {0} and {1} on a canonical path are not adjacent")]
    BrokenPath(usize, usize),
    #[error("({0}, {1}) is not an edge of the half-θ6-graph")]
    NotAnEdge(usize, usize),
    #[error("hints cover {found} vertices, graph has {expected}")]
    HintMismatch { expected: usize, found: usize },
    #[error("lost the canonical path at vertex {0}")]
    LostPath(usize),
    #[error("simulation exceeded {0} moves")]
    MoveLimit(usize),
    #[error("hint line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Rotational direction around a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Turn {
    Ccw,
    Cw,
}

impl Turn {
    pub fn other(self) -> Turn {
        match self {
            Turn::Ccw => Turn::Cw,
            Turn::Cw => Turn::Ccw,
        }
    }

    fn symbol(self) -> char {
        match self {
            Turn::Ccw => 'L',
            Turn::Cw => 'R',
        }
    }
}

/// Consecutive neighbors of `anchor` inside one of its negative cones, in
/// clockwise order around `anchor`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalPath {
    pub anchor: usize,
    pub cone: Cone,
    pub vertices: Vec<usize>,
    /// Position in `vertices` of the vertex with the smallest projection.
    pub closest: usize,
}

impl CanonicalPath {
    pub fn position(&self, v: usize) -> Option<usize> {
        self.vertices.iter().position(|&x| x == v)
    }

    pub fn first(&self) -> usize {
        self.vertices[0]
    }

    pub fn last(&self) -> usize {
        *self.vertices.last().unwrap()
    }

    pub fn closest_vertex(&self) -> usize {
        self.vertices[self.closest]
    }

    /// Length of the sub-path between two positions.
    pub fn length_between(&self, points: &[Point], i: usize, j: usize) -> f64 {
        let (lo, hi) = (i.min(j), i.max(j));
        self.vertices[lo..=hi].windows(2).map(|w| points[w[0]].dist(points[w[1]])).sum()
    }
}

/// Signed angle of `p` around `apex` relative to the bisector of `cone`, in
/// `(-π, π]`. Decreasing values are clockwise.
pub fn angle_in_cone(apex: Point, cone: Cone, p: Point) -> f64 {
    let beta = ConeSystem::STANDARD.bisector_angle(cone);
    let mut d = polar_angle(p.sub(apex)) - beta;
    while d <= -PI {
        d += TAU;
    }
    while d > PI {
        d -= TAU;
    }
    d
}

fn closest_key(apex: Point, cone: Cone, p: Point, v: usize) -> (f64, f64, usize) {
    let sys = ConeSystem::STANDARD;
    (sys.projection_onto(apex, p, cone), sys.perpendicular_offset(apex, p, cone).abs(), v)
}

fn key_cmp(a: &(f64, f64, usize), b: &(f64, f64, usize)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2))
}

/// Neighbors of `u` in `cone`, clockwise around `u`.
fn cone_neighbors_clockwise(g: &Graph, u: usize, cone: Cone) -> Vec<usize> {
    let apex = g.point(u);
    let mut out: Vec<usize> =
        g.neighbors(u).iter().filter(|a| a.cone == cone).map(|a| a.vertex).collect();
    out.sort_by(|&a, &b| {
        angle_in_cone(apex, cone, g.point(b)).total_cmp(&angle_in_cone(apex, cone, g.point(a)))
    });
    out
}

fn require_flavor(g: &Graph, expected: Flavor) -> Result<(), DegreeError> {
    if g.flavor() == expected {
        Ok(())
    } else {
        Err(DegreeError::FlavorMismatch { expected, found: g.flavor() })
    }
}

pub fn canonical_path(g: &Graph, anchor: usize, cone: Cone) -> Result<CanonicalPath, DegreeError> {
    g.check_index(anchor)?;
    let vertices = cone_neighbors_clockwise(g, anchor, cone);
    if vertices.is_empty() {
        return Err(DegreeError::EmptyCone { anchor, cone });
    }
    for w in vertices.windows(2) {
        if !g.has_edge(w[0], w[1]) {
            return Err(DegreeError::BrokenPath(w[0], w[1]));
        }
    }
    let apex = g.point(anchor);
    let closest = (0..vertices.len())
        .min_by(|&i, &j| {
            let (vi, vj) = (vertices[i], vertices[j]);
            key_cmp(&closest_key(apex, cone, g.point(vi), vi), &closest_key(apex, cone, g.point(vj), vj))
        })
        .unwrap();
    Ok(CanonicalPath { anchor, cone, vertices, closest })
}

const NEGATIVE: [Cone; 3] = [Cone::negative(0), Cone::negative(1), Cone::negative(2)];

/// Keeps, per vertex and negative cone, the first, last and closest edges.
pub fn build_g12(g: &Graph) -> Result<Graph, DegreeError> {
    require_flavor(g, Flavor::Half6)?;
    let mut edges = Vec::new();
    for u in 0..g.len() {
        for cone in NEGATIVE {
            if g.neighbors(u).iter().all(|a| a.cone != cone) {
                continue;
            }
            let path = canonical_path_unchecked(g, u, cone);
            edges.push((u, path.first()));
            edges.push((u, path.last()));
            edges.push((u, path.closest_vertex()));
        }
    }
    Ok(Graph::from_edges(g.points().to_vec(), edges, Flavor::G12)?)
}

fn canonical_path_unchecked(g: &Graph, anchor: usize, cone: Cone) -> CanonicalPath {
    let vertices = cone_neighbors_clockwise(g, anchor, cone);
    let apex = g.point(anchor);
    let closest = (0..vertices.len())
        .min_by(|&i, &j| {
            let (vi, vj) = (vertices[i], vertices[j]);
            key_cmp(&closest_key(apex, cone, g.point(vi), vi), &closest_key(apex, cone, g.point(vj), vj))
        })
        .unwrap_or(0);
    CanonicalPath { anchor, cone, vertices, closest }
}

/// Per-vertex constants stored alongside G9.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VertexHints {
    /// Per positive cone `C_i`: the side (around this vertex) on which the
    /// canonical path of its `C_i` neighbor continues toward that path's
    /// closest vertex. `None` when there is no such neighbor or when this
    /// vertex is the closest.
    pub direction: [Option<Turn>; 3],
    /// Per negative cone: coordinates of the first and last neighbor in
    /// clockwise order.
    pub first_last: [Option<(Point, Point)>; 3],
}

/// Neighbors of `x` adjacent in cyclic order to `cone`, on its
/// counter-clockwise and clockwise sides. Neighbors inside `cone` are skipped.
fn cyclic_candidates(x: Point, neighbors: &[Seen], cone: Cone) -> (Option<Seen>, Option<Seen>) {
    let beta = ConeSystem::STANDARD.bisector_angle(cone);
    let (hi, lo) = (beta + FRAC_PI_6, beta - FRAC_PI_6);
    let mut ccw: Option<(f64, Seen)> = None;
    let mut cw: Option<(f64, Seen)> = None;
    for n in neighbors.iter().filter(|n| n.cone != cone) {
        let a = polar_angle(n.point.sub(x));
        let off_ccw = (a - hi).rem_euclid(TAU);
        let off_cw = (lo - a).rem_euclid(TAU);
        if ccw.is_none_or(|(o, _)| off_ccw < o) {
            ccw = Some((off_ccw, *n));
        }
        if cw.is_none_or(|(o, _)| off_cw < o) {
            cw = Some((off_cw, *n));
        }
    }
    (ccw.map(|c| c.1), cw.map(|c| c.1))
}

fn seen_of(g: &Graph, u: usize) -> Vec<Seen> {
    g.neighbors(u)
        .iter()
        .map(|a| Seen { vertex: a.vertex, point: g.point(a.vertex), cone: a.cone })
        .collect()
}

/// Keeps the closest edge per negative cone plus every canonical-path edge,
/// and computes the per-vertex hints.
pub fn build_g9(g: &Graph) -> Result<(Graph, Vec<VertexHints>), DegreeError> {
    require_flavor(g, Flavor::Half6)?;
    let mut edges = Vec::new();
    let mut paths: Vec<[Option<CanonicalPath>; 3]> = Vec::with_capacity(g.len());
    for u in 0..g.len() {
        let mut per_cone: [Option<CanonicalPath>; 3] = Default::default();
        for (j, cone) in NEGATIVE.into_iter().enumerate() {
            if g.neighbors(u).iter().all(|a| a.cone != cone) {
                continue;
            }
            let path = canonical_path(g, u, cone)?;
            edges.push((u, path.closest_vertex()));
            edges.extend(path.vertices.windows(2).map(|w| (w[0], w[1])));
            per_cone[j] = Some(path);
        }
        paths.push(per_cone);
    }
    let g9 = Graph::from_edges(g.points().to_vec(), edges, Flavor::G9)?;

    let mut hints = vec![VertexHints::default(); g.len()];
    for s in 0..g.len() {
        let seen = seen_of(g, s);
        for i in 0..3u8 {
            let cone = Cone::positive(i);
            let Some(v) = seen.iter().find(|n| n.cone == cone) else { continue };
            let path = paths[v.vertex][i as usize].as_ref().expect("s lies in a negative cone of v");
            let pos = path.position(s).expect("s is on the canonical path of v");
            if pos == path.closest {
                continue;
            }
            let toward = if path.closest > pos { path.vertices[pos + 1] } else { path.vertices[pos - 1] };
            let (ccw, cw) = cyclic_candidates(g.point(s), &seen, cone);
            hints[s].direction[i as usize] = if ccw.map(|n| n.vertex) == Some(toward) {
                Some(Turn::Ccw)
            } else if cw.map(|n| n.vertex) == Some(toward) {
                Some(Turn::Cw)
            } else {
                return Err(DegreeError::LostPath(s));
            };
        }
        for (j, path) in paths[s].iter().enumerate() {
            if let Some(path) = path {
                hints[s].first_last[j] = Some((g.point(path.first()), g.point(path.last())));
            }
        }
    }
    Ok((g9, hints))
}

/// Substitute path in G9 for a half-θ6 edge.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationPath {
    pub vertices: Vec<usize>,
    pub length: f64,
    /// Length of the part along the canonical path.
    pub canonical_length: f64,
}

/// The edge from `s` to the closest vertex of the negative cone containing
/// `v`, followed by the canonical path to `v`. Arguments are swapped when `v`
/// lies in a positive cone of `s`.
pub fn approximation_path(half: &Graph, g9: &Graph, s: usize, v: usize) -> Result<ApproximationPath, DegreeError> {
    require_flavor(half, Flavor::Half6)?;
    require_flavor(g9, Flavor::G9)?;
    half.check_index(s)?;
    half.check_index(v)?;
    if !half.has_edge(s, v) {
        return Err(DegreeError::NotAnEdge(s, v));
    }
    let sys = ConeSystem::STANDARD;
    let (s, v) = if sys.cone_of(half.point(s), half.point(v)).map_err(RouteError::from)?.is_positive() {
        (v, s)
    } else {
        (s, v)
    };
    let cone = sys.cone_of(half.point(s), half.point(v)).map_err(RouteError::from)?;
    let path = canonical_path(half, s, cone)?;
    let pos = path.position(v).ok_or(DegreeError::NotAnEdge(s, v))?;
    let c = path.closest;
    let mut vertices = vec![s];
    if c <= pos {
        vertices.extend_from_slice(&path.vertices[c..=pos]);
    } else {
        vertices.extend(path.vertices[pos..=c].iter().rev());
    }
    for w in vertices.windows(2) {
        if !g9.has_edge(w[0], w[1]) {
            return Err(DegreeError::BrokenPath(w[0], w[1]));
        }
    }
    let pts = half.points();
    let canonical_length = path.length_between(pts, c, pos);
    let length = pts[s].dist(pts[path.vertices[c]]) + canonical_length;
    Ok(ApproximationPath { vertices, length, canonical_length })
}

/// How a step of the simulated router was carried out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimKind {
    /// The edge exists in the subgraph and was followed.
    Direct,
    /// A positive-cone edge recovered by searching the far endpoint's
    /// canonical path; `path_distance` is the canonical-path distance to the
    /// vertex whose edge was used and `final_hop` that edge's length.
    Search { path_distance: f64, final_hop: f64 },
    /// A negative-cone edge reached through the closest vertex.
    ViaClosest,
}

/// One step of the preferred-side router and the walk that realized it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimStep {
    pub from: usize,
    pub to: usize,
    pub case: RoutingCase,
    /// Length of the simulated half-θ6 edge.
    pub edge_length: f64,
    /// Distance actually travelled in the subgraph (excluding failed probes).
    pub travel: f64,
    pub kind: SimKind,
}

/// Overhead of a probe for an X1/X2 edge that found nothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeFailure {
    pub at: usize,
    pub side: Side,
    /// Distance from the vertex to the corner of the probed side.
    pub corner_distance: f64,
    pub travel: f64,
}

/// Message-carried state of the G12 exponential search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchState {
    pub anchor: usize,
    pub budget: f64,
    pub direction: Turn,
    pub distance_travelled: f64,
    pub preferred_side: Option<Side>,
}

/// Canonical path of a vertex seen from one of its members: the anchor, the
/// negative cone of the anchor, and the coordinates of both ends.
struct AnchorPath {
    anchor: Point,
    cone: Cone,
    first: Point,
    last: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundedRoute {
    /// Every edge traversed in the subgraph.
    pub trace: RouteTrace,
    /// The simulated steps of the preferred-side router.
    pub simulated: Vec<SimStep>,
    pub probe_failures: Vec<ProbeFailure>,
}

impl BoundedRoute {
    pub fn logical_path(&self) -> Vec<(usize, usize)> {
        self.simulated.iter().map(|s| (s.from, s.to)).collect()
    }
}

enum Mode<'h> {
    G12,
    G9(&'h [VertexHints]),
}

enum Walk {
    Found { x: usize, v: Seen, distance: f64 },
    NotFound,
}

struct Sim<'a, S: ViewSource> {
    views: &'a S,
    mode: Mode<'a>,
    t: Point,
    at: Local,
    moves: Vec<(usize, usize, f64)>,
    limit: usize,
}

impl<'a, S: ViewSource> Sim<'a, S> {
    fn load(views: &S, v: usize) -> Result<Local, DegreeError> {
        let view = views.view(v)?;
        Ok(Local::read(&view)?)
    }

    fn here(&self) -> usize {
        self.at.index
    }

    fn travelled_since(&self, mark: usize) -> f64 {
        self.moves[mark..].iter().map(|m| m.2).sum()
    }

    fn goto(&mut self, v: usize) -> Result<(), DegreeError> {
        let n = self
            .at
            .neighbors
            .iter()
            .find(|n| n.vertex == v)
            .copied()
            .ok_or(DegreeError::LostPath(self.here()))?;
        if self.moves.len() >= self.limit {
            return Err(DegreeError::MoveLimit(self.limit));
        }
        self.moves.push((self.here(), v, self.at.point.dist(n.point)));
        self.at = Self::load(self.views, v)?;
        Ok(())
    }

    fn hints(&self) -> Option<&VertexHints> {
        match self.mode {
            Mode::G12 => None,
            Mode::G9(h) => h.get(self.here()),
        }
    }

    /// Next vertex on the canonical path through the current vertex, whose
    /// anchor lies in `cone` here, moving away from `prev`.
    fn path_successor(&self, cone: Cone, prev: usize) -> Option<Seen> {
        match cyclic_candidates(self.at.point, &self.at.neighbors, cone) {
            (Some(a), Some(b)) if a.vertex == prev => Some(b),
            (Some(a), Some(b)) if b.vertex == prev => Some(a),
            _ => None,
        }
    }

    /// Walks from the current vertex along a canonical path (anchor in `cone`
    /// at every path vertex), starting with `first`, until a vertex with an
    /// edge in `cone` is reached or the next edge would exceed `budget`.
    /// Returns to the start when nothing is found.
    fn walk_budget(&mut self, cone: Cone, first: Seen, budget: f64) -> Result<Walk, DegreeError> {
        let start = self.here();
        let first_len = self.at.point.dist(first.point);
        if first_len > budget {
            return Ok(Walk::NotFound);
        }
        let mut back = vec![start];
        self.goto(first.vertex)?;
        let mut distance = first_len;
        loop {
            if let Some(v) = self.at.positive(cone) {
                return Ok(Walk::Found { x: self.here(), v, distance });
            }
            let prev = *back.last().unwrap();
            let Some(next) = self.path_successor(cone, prev) else { break };
            let len = self.at.point.dist(next.point);
            if distance + len > budget {
                break;
            }
            back.push(self.here());
            self.goto(next.vertex)?;
            distance += len;
        }
        while let Some(v) = back.pop() {
            self.goto(v)?;
        }
        Ok(Walk::NotFound)
    }

    /// Exponential search for an edge in positive cone `cone`, alternating
    /// sides of the canonical path and doubling the budget. With a cap, gives
    /// up once both sides were searched at the cap.
    fn exponential_search(&mut self, cone: Cone, cap: Option<f64>) -> Result<Walk, DegreeError> {
        let (ccw, cw) = cyclic_candidates(self.at.point, &self.at.neighbors, cone);
        let side_of = |turn: Turn| if turn == Turn::Ccw { ccw } else { cw };
        let len = |n: Option<Seen>| n.map(|n| self.at.point.dist(n.point));
        let start = match (len(ccw), len(cw)) {
            (None, None) => return Ok(Walk::NotFound),
            (Some(_), None) => Turn::Ccw,
            (None, Some(_)) => Turn::Cw,
            (Some(a), Some(b)) => {
                if a <= b {
                    Turn::Ccw
                } else {
                    Turn::Cw
                }
            }
        };
        let mut state = SearchState {
            anchor: self.here(),
            budget: len(side_of(start)).unwrap(),
            direction: start,
            distance_travelled: 0.0,
            preferred_side: None,
        };
        let mut capped = [false; 2];
        let idx = |t: Turn| if t == Turn::Ccw { 0 } else { 1 };
        for _ in 0..128 {
            let budget = cap.map_or(state.budget, |c| state.budget.min(c));
            let mark = self.moves.len();
            match side_of(state.direction) {
                Some(first) => {
                    if let found @ Walk::Found { .. } = self.walk_budget(cone, first, budget)? {
                        return Ok(found);
                    }
                    if cap.is_some_and(|c| budget >= c) {
                        capped[idx(state.direction)] = true;
                    }
                }
                None => capped[idx(state.direction)] = true,
            }
            state.distance_travelled += self.travelled_since(mark);
            if capped[0] && capped[1] {
                return Ok(Walk::NotFound);
            }
            state.direction = state.direction.other();
            state.budget *= 2.0;
        }
        Err(DegreeError::MoveLimit(self.limit))
    }

    /// Hinted walk toward the closest vertex of the canonical path.
    fn hinted_search(&mut self, cone: Cone, turn: Turn, cap: Option<f64>) -> Result<Walk, DegreeError> {
        let (ccw, cw) = cyclic_candidates(self.at.point, &self.at.neighbors, cone);
        let first = if turn == Turn::Ccw { ccw } else { cw };
        match first {
            Some(first) => self.walk_budget(cone, first, cap.unwrap_or(f64::INFINITY)),
            None => Ok(Walk::NotFound),
        }
    }

    /// Searches for the edge of the current vertex in positive cone `cone`.
    fn search_positive(&mut self, cone: Cone, cap: Option<f64>) -> Result<Walk, DegreeError> {
        match self.mode {
            Mode::G12 => self.exponential_search(cone, cap),
            Mode::G9(_) => match self.hints().and_then(|h| h.direction[cone.index as usize]) {
                Some(turn) => self.hinted_search(cone, turn, cap),
                None => Ok(Walk::NotFound),
            },
        }
    }

    /// Follows the edge in positive cone `cone`, searching if it is missing.
    fn follow_positive(&mut self, cone: Cone) -> Result<(usize, SimKind), DegreeError> {
        if let Some(v) = self.at.positive(cone) {
            self.goto(v.vertex)?;
            return Ok((v.vertex, SimKind::Direct));
        }
        match self.search_positive(cone, None)? {
            Walk::Found { x, v, distance } => {
                let final_hop = self.at.point.dist(v.point);
                debug_assert_eq!(x, self.here());
                self.goto(v.vertex)?;
                Ok((v.vertex, SimKind::Search { path_distance: distance, final_hop }))
            }
            Walk::NotFound => Err(RouteError::NoCandidate { at: self.here(), case: RoutingCase::SA }.into()),
        }
    }

    /// First and last neighbor (clockwise) in a negative cone, as coordinates.
    fn cone_extremes(&self, cone: Cone) -> Option<(Point, Point)> {
        if let Some(h) = self.hints() {
            return h.first_last[cone.index as usize];
        }
        let mut list: Vec<Seen> = self.at.in_cone(cone).copied().collect();
        let apex = self.at.point;
        list.sort_by(|a, b| angle_in_cone(apex, cone, b.point).total_cmp(&angle_in_cone(apex, cone, a.point)));
        Some((list.first()?.point, list.last()?.point))
    }

    fn closest_in(&self, cone: Cone) -> Option<Seen> {
        let apex = self.at.point;
        self.at
            .in_cone(cone)
            .min_by(|a, b| key_cmp(&closest_key(apex, cone, a.point, a.vertex), &closest_key(apex, cone, b.point, b.vertex)))
            .copied()
    }

    /// Decides whether the half-θ6-graph has an edge from here into X0 using
    /// only the first and last neighbor of the cone.
    fn x0_edge_exists(&self, r: &RegionSet) -> bool {
        let Some((first, last)) = self.cone_extremes(r.x0_cone) else { return false };
        if r.contains(Region::X0, first) || r.contains(Region::X0, last) {
            return true;
        }
        if first == last {
            return false;
        }
        r.side_of_line(first) == Side::X2 && r.side_of_line(last) == Side::X1
    }

    /// Next vertex on the canonical path of `path.anchor`, moving in
    /// direction `turn` around the anchor. `None` at the end of the path.
    fn anchor_step(&self, path: &AnchorPath, turn: Turn) -> Option<Seen> {
        let end = if turn == Turn::Cw { path.last } else { path.first };
        if self.at.point == end {
            return None;
        }
        // clockwise around the anchor is counter-clockwise around the path vertex
        let (ccw, cw) = cyclic_candidates(self.at.point, &self.at.neighbors, path.cone.opposite());
        if turn == Turn::Cw {
            ccw
        } else {
            cw
        }
    }

    /// Direction around `anchor` from the current vertex toward `p`.
    fn turn_toward(&self, path: &AnchorPath, p: Point) -> Turn {
        if angle_in_cone(path.anchor, path.cone, p) < angle_in_cone(path.anchor, path.cone, self.at.point) {
            Turn::Cw
        } else {
            Turn::Ccw
        }
    }

    fn anchor_path(&self, cone: Cone) -> Result<AnchorPath, DegreeError> {
        let (first, last) = self.cone_extremes(cone).ok_or(DegreeError::LostPath(self.here()))?;
        Ok(AnchorPath { anchor: self.at.point, cone, first, last })
    }

    fn walk_until(&mut self, path: &AnchorPath, turn: Turn, done: impl Fn(Point) -> bool) -> Result<(), DegreeError> {
        while !done(self.at.point) {
            let next = self.anchor_step(path, turn).ok_or(DegreeError::LostPath(self.here()))?;
            self.goto(next.vertex)?;
        }
        Ok(())
    }

    /// Moves to the neighbor at coordinates `p` in negative cone `cone`,
    /// directly if the edge is present, otherwise through the closest vertex
    /// and along the canonical path.
    fn reach_in_cone(&mut self, cone: Cone, p: Point) -> Result<(usize, SimKind), DegreeError> {
        let direct = self.at.in_cone(cone).find(|n| n.point == p).copied();
        if let Some(n) = direct {
            self.goto(n.vertex)?;
            return Ok((n.vertex, SimKind::Direct));
        }
        let path = self.anchor_path(cone)?;
        let c = self.closest_in(cone).ok_or(DegreeError::LostPath(self.here()))?;
        self.goto(c.vertex)?;
        let turn = self.turn_toward(&path, p);
        self.walk_until(&path, turn, |q| q == p)?;
        Ok((self.here(), SimKind::ViaClosest))
    }

    /// Case ℬ with X0 edges: the same choice as the half-θ6 router.
    fn arbitrary_x0(&mut self, r: &RegionSet) -> Result<(usize, SimKind), DegreeError> {
        let cone = r.x0_cone;
        let path = self.anchor_path(cone)?;
        let closest = self.closest_in(cone).ok_or(DegreeError::LostPath(self.here()))?;
        for p in [closest.point, path.first, path.last] {
            if r.contains(Region::X0, p) {
                return self.reach_in_cone(cone, p);
            }
        }
        self.goto(closest.vertex)?;
        let turn = if r.side_of_line(closest.point) == Side::X2 { Turn::Cw } else { Turn::Ccw };
        self.walk_until(&path, turn, |q| r.contains(Region::X0, q))?;
        Ok((self.here(), SimKind::ViaClosest))
    }

    /// Case 𝒞 with X0 edges: the X0 neighbor nearest the preferred side.
    fn preferred_x0(&mut self, r: &RegionSet, preferred: Side) -> Result<(usize, SimKind), DegreeError> {
        let cone = r.x0_cone;
        let path = self.anchor_path(cone)?;
        let extreme = if preferred == Side::X1 { path.last } else { path.first };
        if r.contains(Region::X0, extreme) {
            return self.reach_in_cone(cone, extreme);
        }
        let toward = if preferred == Side::X1 { Turn::Cw } else { Turn::Ccw };
        let closest = self.closest_in(cone).ok_or(DegreeError::LostPath(self.here()))?;
        self.goto(closest.vertex)?;
        let in_x0 = |p: Point| r.contains(Region::X0, p);
        if !in_x0(closest.point) {
            let turn = if r.side_of_line(closest.point) == Side::X2 { Turn::Cw } else { Turn::Ccw };
            self.walk_until(&path, turn, in_x0)?;
            if r.side_of_line(closest.point) == preferred {
                return Ok((self.here(), SimKind::ViaClosest));
            }
        }
        while let Some(next) = self.anchor_step(&path, toward).filter(|n| in_x0(n.point)) {
            self.goto(next.vertex)?;
        }
        Ok((self.here(), SimKind::ViaClosest))
    }

    /// Probes for an edge into `side`; on success follows it.
    fn probe_side(&mut self, r: &RegionSet, side: Side) -> Result<Option<(usize, SimKind)>, DegreeError> {
        let cone = r.side_cone(side);
        if let Some(v) = self.at.positive(cone) {
            if r.contains(side.region(), v.point) {
                self.goto(v.vertex)?;
                return Ok(Some((v.vertex, SimKind::Direct)));
            }
            return Ok(None);
        }
        let cap = 2.0 * r.corner_dist(side);
        let mark = self.moves.len();
        match self.search_positive(cone, Some(cap))? {
            Walk::Found { v, distance, .. } if r.contains(side.region(), v.point) => {
                let final_hop = self.at.point.dist(v.point);
                self.goto(v.vertex)?;
                Ok(Some((v.vertex, SimKind::Search { path_distance: distance, final_hop })))
            }
            Walk::Found { .. } => {
                let back: Vec<usize> = self.moves[mark..].iter().map(|m| m.0).rev().collect();
                for v in back {
                    self.goto(v)?;
                }
                Ok(None)
            }
            Walk::NotFound => Ok(None),
        }
    }
}

fn route_bounded<S: ViewSource>(
    views: &S,
    mode: Mode<'_>,
    source: usize,
    target: usize,
    target_point: Point,
    n: usize,
    factor: f64,
) -> Result<BoundedRoute, DegreeError> {
    if source == target {
        return Err(RouteError::SameEndpoints.into());
    }
    let start = Sim::<S>::load(views, source)?;
    let source_point = start.point;
    let mut sim = Sim { views, mode, t: target_point, at: start, moves: Vec::new(), limit: 200 * n.max(4) * n.max(4) };
    let mut memory = RouterMemory::default();
    let mut simulated = Vec::new();
    let mut probe_failures = Vec::new();
    let mut ranges: Vec<(usize, usize, f64)> = Vec::new();
    let sys = ConeSystem::STANDARD;
    while sim.here() != target {
        if simulated.len() > n {
            return Err(RouteError::StepLimit { from: source, target, limit: n }.into());
        }
        let from = sim.here();
        let s = sim.at.point;
        let t = sim.t;
        let case = classify_stateful(s, t, &memory)?;
        let mark = sim.moves.len();
        let failures_before = probe_failures.len();
        let none = || DegreeError::Route(RouteError::NoCandidate { at: from, case });
        let (to, kind) = match case {
            RoutingCase::SA => {
                let cone = sys.cone_of(s, t).map_err(RouteError::from)?;
                let (v, kind) = sim.follow_positive(cone)?;
                if let Some(side) = side_left_behind(sim.at.point, t, cone.index)? {
                    memory.set_preferred(side)?;
                }
                (v, kind)
            }
            RoutingCase::SB => {
                let r = sys.regions(s, t).map_err(RouteError::from)?;
                if sim.x0_edge_exists(&r) {
                    sim.arbitrary_x0(&r)?
                } else {
                    let small = r.smaller_side();
                    let probe_mark = sim.moves.len();
                    match sim.probe_side(&r, small)? {
                        Some(found) => found,
                        None => {
                            let travel = sim.travelled_since(probe_mark);
                            if travel > 0.0 {
                                probe_failures.push(ProbeFailure {
                                    at: from,
                                    side: small,
                                    corner_distance: r.corner_dist(small),
                                    travel,
                                });
                            }
                            let found = sim.follow_positive(r.side_cone(small.other())).map_err(|_| none())?;
                            memory.set_preferred(small)?;
                            found
                        }
                    }
                }
            }
            RoutingCase::SC { preferred } => {
                let r = sys.regions(s, t).map_err(RouteError::from)?;
                if sim.x0_edge_exists(&r) {
                    sim.preferred_x0(&r, preferred)?
                } else {
                    sim.follow_positive(r.side_cone(preferred.other())).map_err(|_| none())?
                }
            }
            _ => unreachable!("stateful classification yields SA, SB or SC"),
        };
        let kind = if sim.moves.len() - mark == 1 { SimKind::Direct } else { kind };
        let failed: f64 = probe_failures[failures_before..].iter().map(|f| f.travel).sum();
        simulated.push(SimStep {
            from,
            to,
            case,
            edge_length: s.dist(sim.at.point),
            travel: sim.travelled_since(mark) - failed,
            kind,
        });
        ranges.push((mark, sim.moves.len(), potential(s, t, case)?));
    }

    let mut steps = Vec::with_capacity(sim.moves.len());
    for (k, &(lo, hi, phi)) in ranges.iter().enumerate() {
        let next_phi = ranges.get(k + 1).map_or(0.0, |r| r.2);
        for i in lo..hi {
            let (from, to, length) = sim.moves[i];
            let phi_after = if i + 1 == hi { next_phi } else { phi };
            steps.push(Step { from, to, case: simulated[k].case, phi_before: phi, phi_after, length });
        }
    }
    let (bound, alpha, positive) = pair_bound(source_point, target_point).map_err(RouteError::from)?;
    let total_length = steps.iter().map(|s| s.length).sum();
    let trace = RouteTrace {
        source,
        target,
        steps,
        total_length,
        bound: factor * bound,
        alpha,
        positive,
        distance: source_point.dist(target_point),
    };
    Ok(BoundedRoute { trace, simulated, probe_failures })
}

pub fn route_g12(g12: &Graph, source: usize, target: usize) -> Result<BoundedRoute, DegreeError> {
    require_flavor(g12, Flavor::G12)?;
    g12.check_index(source)?;
    g12.check_index(target)?;
    route_bounded(g12, Mode::G12, source, target, g12.point(target), g12.len(), G12_FACTOR)
}

pub fn route_g9(g9: &Graph, hints: &[VertexHints], source: usize, target: usize) -> Result<BoundedRoute, DegreeError> {
    require_flavor(g9, Flavor::G9)?;
    if hints.len() != g9.len() {
        return Err(DegreeError::HintMismatch { expected: g9.len(), found: hints.len() });
    }
    g9.check_index(source)?;
    g9.check_index(target)?;
    route_bounded(g9, Mode::G9(hints), source, target, g9.point(target), g9.len(), G9_FACTOR)
}

impl fmt::Display for VertexHints {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dirs: Vec<String> = self
            .direction
            .iter()
            .map(|d| d.map_or("-".to_string(), |t| t.symbol().to_string()))
            .collect();
        write!(f, "{}", dirs.join(" "))?;
        for fl in &self.first_last {
            match fl {
                Some((a, b)) => write!(f, " {} {} {} {}", a.x, a.y, b.x, b.y)?,
                None => write!(f, " - - - -")?,
            }
        }
        Ok(())
    }
}

pub fn format_hints(hints: &[VertexHints]) -> String {
    let mut out = String::from("# idx d0 d1 d2 f0x f0y l0x l0y f1x f1y l1x l1y f2x f2y l2x l2y\n");
    for (i, h) in hints.iter().enumerate() {
        out.push_str(&format!("{i} {h}\n"));
    }
    out
}

pub fn parse_hints(text: &str) -> Result<Vec<VertexHints>, DegreeError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| DegreeError::Parse { line: line_no, message };
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let f: Vec<&str> = body.split_whitespace().collect();
        if f.len() != 16 {
            return Err(err(format!("expected 16 fields, found {}", f.len())));
        }
        let idx: usize = f[0].parse().map_err(|_| err(format!("bad index `{}`", f[0])))?;
        if idx != out.len() {
            return Err(err(format!("expected record {}, found {idx}", out.len())));
        }
        let mut h = VertexHints::default();
        for k in 0..3 {
            h.direction[k] = match f[1 + k] {
                "L" => Some(Turn::Ccw),
                "R" => Some(Turn::Cw),
                "-" => None,
                other => return Err(err(format!("bad direction `{other}`"))),
            };
        }
        for k in 0..3 {
            let q = &f[4 + 4 * k..8 + 4 * k];
            if q.iter().all(|s| *s == "-") {
                continue;
            }
            let nums: Vec<f64> = q
                .iter()
                .map(|s| s.parse::<f64>().map_err(|_| err(format!("bad coordinate `{s}`"))))
                .collect::<Result<_, _>>()?;
            h.first_last[k] = Some((Point::new(nums[0], nums[1]), Point::new(nums[2], nums[3])));
        }
        out.push(h);
    }
    Ok(out)
}
