//! 1-local routing on the half-θ6-graph: the memoryless router (cases A-D)
//! and the preferred-side router (cases 𝒜, ℬ, 𝒞).
//!
//! Routers only see the world through [`LocalView`]: the current vertex, its
//! neighbors with their coordinates, the destination's coordinates and, for
//! the stateful variant, a [`RouterMemory`].

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::geometry::{
    negative_bound, positive_bound, Cone, ConeSystem, GeometryError, Point, Region, RegionSet, Side,
};
use crate::graph::{Flavor, Graph, GraphError, LocalView, ViewSource};

/// Slack used by the potential audit.
pub const AUDIT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum RouteError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("no candidate edge at vertex {at} in case {case}")]
    NoCandidate { at: usize, case: RoutingCase },
    #[error("case {case} does not match the position of the destination")]
    CaseMismatch { case: RoutingCase },
    #[error("preferred side already set to {current}, refusing to change it to {requested}")]
    MemoryRewrite { current: Side, requested: Side },
    #[error("route from {from} to {target} exceeded {limit} steps")]
    StepLimit { from: usize, target: usize, limit: usize },
    #[error("source and target coincide")]
    SameEndpoints,
    #[error("router needs a {expected} graph, got {found}")]
    FlavorMismatch { expected: Flavor, found: Flavor },
    #[error("trace line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Case label of a routing step. `A`-`D` belong to the memoryless router,
/// `SA`, `SB`, `SC` to the preferred-side router.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoutingCase {
    A,
    B,
    /// Exactly one of X1, X2 is empty.
    C { empty: Side },
    D,
    SA,
    SB,
    SC { preferred: Side },
}

impl RoutingCase {
    pub fn tag(&self) -> &'static str {
        match self {
            RoutingCase::A => "A",
            RoutingCase::B => "B",
            RoutingCase::C { .. } => "C",
            RoutingCase::D => "D",
            RoutingCase::SA => "SA",
            RoutingCase::SB => "SB",
            RoutingCase::SC { .. } => "SC",
        }
    }

    /// Cases whose potential is the case-D potential.
    pub fn is_d_like(&self) -> bool {
        matches!(self, RoutingCase::D | RoutingCase::SB)
    }
}

impl fmt::Display for RoutingCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoutingCase::C { empty } => write!(f, "C({empty} empty)"),
            RoutingCase::SC { preferred } => write!(f, "SC(prefer {preferred})"),
            other => f.write_str(other.tag()),
        }
    }
}

/// Message-carried state of the preferred-side router.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RouterMemory {
    preferred: Option<Side>,
}

impl RouterMemory {
    pub fn preferred_side(&self) -> Option<Side> {
        self.preferred
    }

    /// Sets the preferred side; it can be written once.
    pub fn set_preferred(&mut self, side: Side) -> Result<(), RouteError> {
        match self.preferred {
            None => {
                self.preferred = Some(side);
                Ok(())
            }
            Some(current) => Err(RouteError::MemoryRewrite { current, requested: side }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub from: usize,
    pub to: usize,
    pub case: RoutingCase,
    pub phi_before: f64,
    pub phi_after: f64,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteTrace {
    pub source: usize,
    pub target: usize,
    pub steps: Vec<Step>,
    pub total_length: f64,
    /// Length bound for the pair, evaluated at its angle α.
    pub bound: f64,
    pub alpha: f64,
    /// Whether the destination starts in a positive cone of the source.
    pub positive: bool,
    /// Euclidean distance between the endpoints.
    pub distance: f64,
}

impl RouteTrace {
    pub fn ratio(&self) -> f64 {
        if self.distance > 0.0 {
            self.total_length / self.distance
        } else {
            1.0
        }
    }

    pub fn within_bound(&self, tol: f64) -> bool {
        self.total_length <= self.bound * (1.0 + tol) + tol
    }

    /// Vertices visited, starting at the source.
    pub fn vertices(&self) -> Vec<usize> {
        let mut out = vec![self.source];
        out.extend(self.steps.iter().map(|s| s.to));
        out
    }

    /// Indices of steps whose potential drop does not pay for the edge.
    pub fn potential_violations(&self, tol: f64) -> Vec<usize> {
        self.steps
            .iter()
            .enumerate()
            .filter(|(_, s)| s.phi_before - s.phi_after < s.length - tol)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Length bound for routing from `u` to `w`.
pub fn pair_bound(u: Point, w: Point) -> Result<(f64, f64, bool), GeometryError> {
    let sys = ConeSystem::STANDARD;
    let positive = sys.cone_of(u, w)?.is_positive();
    let alpha = sys.pair_triangle(u, w)?.alpha;
    let d = u.dist(w);
    let bound = if positive { positive_bound(alpha) } else { negative_bound(alpha) } * d;
    Ok((bound, alpha, positive))
}

/// A neighbor of the current vertex as seen through the view.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Seen {
    pub vertex: usize,
    pub point: Point,
    pub cone: Cone,
}

pub(crate) struct Local {
    pub index: usize,
    pub point: Point,
    pub neighbors: Vec<Seen>,
}

impl Local {
    pub fn read<V: LocalView + ?Sized>(view: &V) -> Result<Local, RouteError> {
        let index = view.center();
        let point = view.point(index)?;
        let neighbors = view
            .neighbors(index)?
            .iter()
            .map(|a| Ok(Seen { vertex: a.vertex, point: view.point(a.vertex)?, cone: a.cone }))
            .collect::<Result<_, RouteError>>()?;
        Ok(Local { index, point, neighbors })
    }

    pub fn in_cone(&self, cone: Cone) -> impl Iterator<Item = &Seen> + '_ {
        self.neighbors.iter().filter(move |n| n.cone == cone)
    }

    /// The neighbor in a positive cone (at most one in the half-θ6-graph).
    pub fn positive(&self, cone: Cone) -> Option<Seen> {
        self.in_cone(cone).next().copied()
    }

    /// Neighbor in `side`'s positive cone if it lies in that region.
    pub fn side_edge(&self, r: &RegionSet, side: Side) -> Option<Seen> {
        self.positive(r.side_cone(side)).filter(|n| r.contains(side.region(), n.point))
    }

    /// Neighbors in X0 sorted clockwise around the current vertex.
    pub fn x0_clockwise(&self, r: &RegionSet) -> Vec<Seen> {
        let mut out: Vec<Seen> = self
            .in_cone(r.x0_cone)
            .filter(|n| r.contains(Region::X0, n.point))
            .copied()
            .collect();
        sort_clockwise(r, &mut out);
        out
    }
}

pub(crate) fn sort_clockwise(r: &RegionSet, list: &mut [Seen]) {
    list.sort_by(|a, b| {
        r.angle_around_source(b.point)
            .total_cmp(&r.angle_around_source(a.point))
            .then(a.vertex.cmp(&b.vertex))
    });
}

/// Extreme of X0 toward a side: the last clockwise for X1, the first for X2.
pub(crate) fn toward_side(list: &[Seen], side: Side) -> Option<Seen> {
    match side {
        Side::X1 => list.last().copied(),
        Side::X2 => list.first().copied(),
    }
}

fn case_of(local: &Local, t: Point) -> Result<(RoutingCase, Option<RegionSet>), RouteError> {
    let sys = ConeSystem::STANDARD;
    if sys.cone_of(local.point, t)?.is_positive() {
        return Ok((RoutingCase::A, None));
    }
    let r = sys.regions(local.point, t)?;
    let x1_empty = local.side_edge(&r, Side::X1).is_none();
    let x2_empty = local.side_edge(&r, Side::X2).is_none();
    let case = match (x1_empty, x2_empty) {
        (true, true) => RoutingCase::B,
        (true, false) => RoutingCase::C { empty: Side::X1 },
        (false, true) => RoutingCase::C { empty: Side::X2 },
        (false, false) => RoutingCase::D,
    };
    Ok((case, Some(r)))
}

/// Case of the memoryless router at the view's center for destination `t`.
pub fn classify_case<V: LocalView + ?Sized>(t: Point, view: &V) -> Result<RoutingCase, RouteError> {
    let local = Local::read(view)?;
    Ok(case_of(&local, t)?.0)
}

/// One step of the memoryless router: returns the next vertex and the case.
pub fn step_stateless<V: LocalView + ?Sized>(
    t: Point,
    view: &V,
) -> Result<(usize, RoutingCase), RouteError> {
    let local = Local::read(view)?;
    let (case, regions) = case_of(&local, t)?;
    let none = || RouteError::NoCandidate { at: local.index, case };
    let next = match (case, regions) {
        (RoutingCase::A, _) => {
            let cone = ConeSystem::STANDARD.cone_of(local.point, t)?;
            local.positive(cone).ok_or_else(none)?
        }
        (RoutingCase::B, Some(r)) => {
            let x0 = local.x0_clockwise(&r);
            let side = if r.dist_as() >= r.dist_sb() { Side::X1 } else { Side::X2 };
            toward_side(&x0, side).ok_or_else(none)?
        }
        (RoutingCase::C { empty }, Some(r)) => {
            let x0 = local.x0_clockwise(&r);
            match toward_side(&x0, empty) {
                Some(v) => v,
                None => local.side_edge(&r, empty.other()).ok_or_else(none)?,
            }
        }
        (RoutingCase::D, Some(r)) => {
            let x0 = local.x0_clockwise(&r);
            match x0.iter().min_by_key(|n| n.vertex) {
                Some(v) => *v,
                None => local.side_edge(&r, r.smaller_side()).ok_or_else(none)?,
            }
        }
        _ => unreachable!("negative cases always carry regions"),
    };
    Ok((next.vertex, case))
}

/// Potential of a configuration. `a`, `b` are the corners of the canonical
/// triangle governing the case.
pub fn potential(s: Point, t: Point, case: RoutingCase) -> Result<f64, RouteError> {
    let sys = ConeSystem::STANDARD;
    let positive = sys.cone_of(s, t)?.is_positive();
    let mismatch = || RouteError::CaseMismatch { case };
    match case {
        RoutingCase::A | RoutingCase::SA => {
            if !positive {
                return Err(mismatch());
            }
            let tri = sys.canonical_triangle(s, t)?;
            Ok(tri.side_length + tri.corner_a.dist(t).max(tri.corner_b.dist(t)))
        }
        _ if positive => Err(mismatch()),
        RoutingCase::B => {
            let r = sys.regions(s, t)?;
            Ok(r.dist_ta() + r.dist_as().min(r.dist_sb()))
        }
        RoutingCase::C { empty } => {
            let r = sys.regions(s, t)?;
            Ok(r.dist_ta() + r.corner_dist(empty.other()))
        }
        RoutingCase::SC { preferred } => {
            let r = sys.regions(s, t)?;
            Ok(r.dist_ta() + r.corner_dist(preferred.other()))
        }
        RoutingCase::D | RoutingCase::SB => {
            let r = sys.regions(s, t)?;
            Ok(2.0 * r.dist_ta() + r.dist_as().min(r.dist_sb()))
        }
    }
}

/// Case of the preferred-side router.
pub fn classify_stateful(s: Point, t: Point, memory: &RouterMemory) -> Result<RoutingCase, RouteError> {
    if ConeSystem::STANDARD.cone_of(s, t)?.is_positive() {
        return Ok(RoutingCase::SA);
    }
    Ok(match memory.preferred_side() {
        None => RoutingCase::SB,
        Some(preferred) => RoutingCase::SC { preferred },
    })
}

/// Side of `v` that becomes preferred after a positive step `s -> v` in cone
/// `C_i` of `s`, when `t` then lies in a negative cone of `v`. It is the side
/// whose cone index differs from `i`; that region lies inside `T_sv`.
pub(crate) fn side_left_behind(v: Point, t: Point, i: u8) -> Result<Option<Side>, RouteError> {
    let sys = ConeSystem::STANDARD;
    if v == t || sys.cone_of(v, t)?.is_positive() {
        return Ok(None);
    }
    let r = sys.regions(v, t)?;
    Ok(Some(if r.x1_cone.index != i { Side::X1 } else { Side::X2 }))
}

/// The X0 neighbor chosen in case ℬ: the cone's closest, first or last
/// neighbor if it lies in X0 (in that order), otherwise the X0 neighbor
/// adjacent in angular order to the closest.
pub(crate) fn arbitrary_x0(local: &Local, r: &RegionSet) -> Option<Seen> {
    let mut cone: Vec<Seen> = local.in_cone(r.x0_cone).copied().collect();
    if cone.is_empty() {
        return None;
    }
    sort_clockwise(r, &mut cone);
    let sys = ConeSystem::STANDARD;
    let key = |n: &Seen| {
        (
            sys.projection_onto(local.point, n.point, r.x0_cone),
            sys.perpendicular_offset(local.point, n.point, r.x0_cone).abs(),
            n.vertex,
        )
    };
    let closest_pos = (0..cone.len())
        .min_by(|&i, &j| {
            let (a, b) = (key(&cone[i]), key(&cone[j]));
            a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2))
        })
        .unwrap();
    let in_x0 = |n: &Seen| r.contains(Region::X0, n.point);
    for pos in [closest_pos, 0, cone.len() - 1] {
        if in_x0(&cone[pos]) {
            return Some(cone[pos]);
        }
    }
    // the X0 neighbors form a contiguous block on one side of the closest
    let after = cone[closest_pos..].iter().find(|n| in_x0(n));
    let before = cone[..closest_pos].iter().rev().find(|n| in_x0(n));
    after.or(before).copied()
}

/// One step of the preferred-side router. Updates `memory` in place.
pub fn step_stateful<V: LocalView + ?Sized>(
    t: Point,
    view: &V,
    memory: &mut RouterMemory,
) -> Result<(usize, RoutingCase), RouteError> {
    let local = Local::read(view)?;
    let sys = ConeSystem::STANDARD;
    let case = classify_stateful(local.point, t, memory)?;
    let none = || RouteError::NoCandidate { at: local.index, case };
    let next = match case {
        RoutingCase::SA => {
            let cone = sys.cone_of(local.point, t)?;
            let v = local.positive(cone).ok_or_else(none)?;
            if let Some(side) = side_left_behind(v.point, t, cone.index)? {
                memory.set_preferred(side)?;
            }
            v
        }
        RoutingCase::SB => {
            let r = sys.regions(local.point, t)?;
            if let Some(v) = arbitrary_x0(&local, &r) {
                v
            } else {
                let small = r.smaller_side();
                match local.side_edge(&r, small) {
                    Some(v) => v,
                    None => {
                        let v = local.side_edge(&r, small.other()).ok_or_else(none)?;
                        memory.set_preferred(small)?;
                        v
                    }
                }
            }
        }
        RoutingCase::SC { preferred } => {
            let r = sys.regions(local.point, t)?;
            let x0 = local.x0_clockwise(&r);
            match toward_side(&x0, preferred) {
                Some(v) => v,
                None => local.side_edge(&r, preferred.other()).ok_or_else(none)?,
            }
        }
        _ => unreachable!("stateful classification yields SA, SB or SC"),
    };
    Ok((next.vertex, case))
}

pub(crate) fn finish_trace(
    source: usize,
    target: usize,
    source_point: Point,
    target_point: Point,
    mut steps: Vec<Step>,
) -> Result<RouteTrace, RouteError> {
    for i in 0..steps.len() {
        steps[i].phi_after = steps.get(i + 1).map_or(0.0, |n| n.phi_before);
    }
    let (bound, alpha, positive) = pair_bound(source_point, target_point)?;
    Ok(RouteTrace {
        source,
        target,
        total_length: steps.iter().map(|s| s.length).sum(),
        steps,
        bound,
        alpha,
        positive,
        distance: source_point.dist(target_point),
    })
}

fn route_with<S, F>(
    views: &S,
    source: usize,
    target: usize,
    target_point: Point,
    limit: usize,
    mut step: F,
) -> Result<RouteTrace, RouteError>
where
    S: ViewSource,
    F: FnMut(Point, &S::View) -> Result<(usize, RoutingCase, f64), RouteError>,
{
    if source == target {
        return Err(RouteError::SameEndpoints);
    }
    let mut steps = Vec::new();
    let mut current = source;
    let mut source_point = None;
    while current != target {
        if steps.len() >= limit {
            return Err(RouteError::StepLimit { from: source, target, limit });
        }
        let view = views.view(current)?;
        let here = view.point(current)?;
        source_point.get_or_insert(here);
        let (next, case, phi) = step(here, &view)?;
        let length = here.dist(view.point(next)?);
        steps.push(Step { from: current, to: next, case, phi_before: phi, phi_after: 0.0, length });
        current = next;
    }
    finish_trace(source, target, source_point.unwrap(), target_point, steps)
}

/// Memoryless routing through an arbitrary view source.
pub fn route_stateless_in<S: ViewSource>(
    views: &S,
    source: usize,
    target: usize,
    target_point: Point,
    limit: usize,
) -> Result<RouteTrace, RouteError> {
    route_with(views, source, target, target_point, limit, |here, view| {
        let (next, case) = step_stateless(target_point, view)?;
        Ok((next, case, potential(here, target_point, case)?))
    })
}

/// Preferred-side routing through an arbitrary view source.
pub fn route_stateful_in<S: ViewSource>(
    views: &S,
    source: usize,
    target: usize,
    target_point: Point,
    limit: usize,
) -> Result<RouteTrace, RouteError> {
    let mut memory = RouterMemory::default();
    route_with(views, source, target, target_point, limit, |here, view| {
        let before = classify_stateful(here, target_point, &memory)?;
        let phi = potential(here, target_point, before)?;
        let (next, case) = step_stateful(target_point, view, &mut memory)?;
        Ok((next, case, phi))
    })
}

fn require_half6(g: &Graph, source: usize, target: usize) -> Result<(), RouteError> {
    g.check_index(source)?;
    g.check_index(target)?;
    if g.flavor() != Flavor::Half6 {
        return Err(RouteError::FlavorMismatch { expected: Flavor::Half6, found: g.flavor() });
    }
    Ok(())
}

pub fn route_stateless(g: &Graph, source: usize, target: usize) -> Result<RouteTrace, RouteError> {
    require_half6(g, source, target)?;
    route_stateless_in(g, source, target, g.point(target), g.len())
}

pub fn route_stateful(g: &Graph, source: usize, target: usize) -> Result<RouteTrace, RouteError> {
    require_half6(g, source, target)?;
    route_stateful_in(g, source, target, g.point(target), g.len())
}

/// Memoryless or preferred-side router.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Stateless,
    Stateful,
    G12,
    G9,
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stateless" => Ok(Algorithm::Stateless),
            "stateful" => Ok(Algorithm::Stateful),
            "g12" => Ok(Algorithm::G12),
            "g9" => Ok(Algorithm::G9),
            _ => Err(format!("unknown routing algorithm `{s}`")),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Stateless => "stateless",
            Algorithm::Stateful => "stateful",
            Algorithm::G12 => "g12",
            Algorithm::G9 => "g9",
        })
    }
}

pub const TRACE_HEADER: &str = "# step\tfrom\tto\tcase\tphi_before\tphi_after\tedge_len";

pub fn format_trace(trace: &RouteTrace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for (i, s) in trace.steps.iter().enumerate() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            i, s.from, s.to, s.case.tag(), s.phi_before, s.phi_after, s.length
        ));
    }
    out.push_str(&format!("total {} bound {}\n", trace.total_length, trace.bound));
    out
}

/// Parsed trace file: steps carry case tags only, so C/SC sides are lost.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub steps: Vec<(usize, usize, String, f64, f64, f64)>,
    pub total: f64,
    pub bound: f64,
}

pub fn parse_trace(text: &str) -> Result<TraceFile, RouteError> {
    let mut steps = Vec::new();
    let mut footer = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| RouteError::Parse { line: line_no, message };
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        if let Some(rest) = body.strip_prefix("total ") {
            let f: Vec<&str> = rest.split_whitespace().collect();
            if f.len() != 3 || f[1] != "bound" {
                return Err(err("footer must be `total L bound B`".into()));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number `{s}`")));
            footer = Some((num(f[0])?, num(f[2])?));
            continue;
        }
        let f: Vec<&str> = body.split('\t').collect();
        if f.len() != 7 {
            return Err(err(format!("expected 7 tab-separated fields, found {}", f.len())));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad index `{s}`")));
        let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number `{s}`")));
        steps.push((int(f[1])?, int(f[2])?, f[3].to_string(), num(f[4])?, num(f[5])?, num(f[6])?));
    }
    let (total, bound) = footer.ok_or(RouteError::Parse { line: 0, message: "missing footer".into() })?;
    Ok(TraceFile { steps, total, bound })
}
