//! Acceptance suite. Runs as a plain binary so that one PASS/FAIL line per
//! criterion is always printed; exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use halftheta::geometry::union_bound;
use halftheta::graph::{build_half_theta6, random_general_position, Flavor};
use halftheta::harness::{
    crossing_edges, degree_sweep, empty_triangle_mismatches, exhaustive_shortest_path, g9_spanner_sweep,
    gen_lower_bound_negative, gen_lower_bound_positive, measure_spanning_ratio, non_triangular_faces,
    oracle_shortest_path, restricted_sweep, routing_sweep, run_negative_pair, spanning_sweep, trial_seed,
    HarnessError, RATIO_TOL,
};
use halftheta::router::Algorithm;

const SEED: u64 = 20_240_611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome, HarnessError> {
    Ok(Outcome { pass, detail })
}

fn spanning() -> Result<Outcome, HarnessError> {
    let sweep = spanning_sweep(Flavor::Half6, 200, 60, SEED)?;
    let mut family_max: f64 = 0.0;
    let mut at_sixth = 0.0;
    for i in 0..=4 {
        let alpha = i as f64 * PI / 24.0;
        let inst = gen_lower_bound_positive(alpha, 1e-4)?;
        let g = inst.graph()?;
        let all = measure_spanning_ratio(&g, i)?;
        family_max = family_max.max(all.max_ratio);
        let (len, _) = oracle_shortest_path(&g, inst.u, inst.w, None)?;
        if i == 4 {
            at_sixth = len / inst.points[inst.u].dist(inst.points[inst.w]);
        }
    }
    let pass = sweep.max_ratio <= 2.0 + RATIO_TOL
        && sweep.violations(RATIO_TOL).is_empty()
        && family_max <= 2.0 + RATIO_TOL
        && at_sixth >= 2.0 - 1e-2;
    outcome(
        pass,
        format!(
            "random max={:.6} violations={} family max={family_max:.6} alpha=pi/6 ratio={at_sixth:.6}",
            sweep.max_ratio,
            sweep.violations(RATIO_TOL).len()
        ),
    )
}

fn restricted() -> Result<Outcome, HarnessError> {
    // A disconnected restricted search surfaces as an error, which fails the criterion.
    let r = restricted_sweep(200, 60, SEED)?;
    let bad = r.violations(RATIO_TOL).len();
    outcome(bad == 0, format!("pairs={} max={:.6} violations={bad}", r.rows.len(), r.max_ratio))
}

struct Routing {
    stateless: halftheta::harness::RoutingReport,
    stateful: halftheta::harness::RoutingReport,
}

fn routing() -> Result<Routing, HarnessError> {
    Ok(Routing {
        stateless: routing_sweep(Algorithm::Stateless, 200, 60, SEED, None)?,
        stateful: routing_sweep(Algorithm::Stateful, 200, 60, SEED, None)?,
    })
}

fn routing_bounds(r: &Routing) -> Result<Outcome, HarnessError> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, rep) in [("stateless", &r.stateless), ("stateful", &r.stateful)] {
        let bad = rep.ratios.violations(RATIO_TOL).len();
        let (pos, neg) = (rep.ratios.max_where(true), rep.ratios.max_where(false));
        pass &= bad == 0 && pos <= 2.0 + RATIO_TOL && neg <= 2.8868;
        parts.push(format!("{name}: routes={} pos={pos:.6} neg={neg:.6} violations={bad}", rep.routes));
    }
    outcome(pass, parts.join("; "))
}

fn separation() -> Result<Outcome, HarnessError> {
    let pair = gen_lower_bound_negative(0.0, 1e-4, 1)?;
    let out = run_negative_pair(&pair, Algorithm::Stateless)?;
    let target = 5.0 / 3f64.sqrt() - 1e-2;
    let pass = out.identical_neighborhoods && out.adverse_ratio() >= target;
    outcome(
        pass,
        format!(
            "adverse ratio={:.6} (need >= {target:.6}) ratios=({:.6}, {:.6}) identical N1(w)={}",
            out.adverse_ratio(),
            out.ratios.0,
            out.ratios.1,
            out.identical_neighborhoods
        ),
    )
}

fn potential(r: &Routing) -> Result<Outcome, HarnessError> {
    let (a, b) = (r.stateless.audits_failed.len(), r.stateful.audits_failed.len());
    outcome(a + b == 0, format!("flagged stateless={a} stateful={b}"))
}

fn degree() -> Result<Outcome, HarnessError> {
    let rows = degree_sweep(100, 200, SEED)?;
    let g12 = rows.iter().map(|r| r.1).max().unwrap_or(0);
    let g9 = rows.iter().map(|r| r.2).max().unwrap_or(0);
    let sp = g9_spanner_sweep(100, 200, SEED)?;
    let pass = g12 <= 12 && g9 <= 9 && sp.violations.is_empty();
    outcome(
        pass,
        format!(
            "max deg g12={g12} g9={g9}; discarded edges={} max approx={:.4} max canonical={:.4} violations={}",
            sp.edges,
            sp.max_ratio,
            sp.max_canonical_ratio,
            sp.violations.len()
        ),
    )
}

fn bounded_routing() -> Result<Outcome, HarnessError> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (algo, pos_cap, neg_cap) in [(Algorithm::G12, 38.0, 54.849), (Algorithm::G9, 6.0, 8.6603)] {
        let r = routing_sweep(algo, 60, 60, SEED, None)?;
        let bad = r.ratios.violations(RATIO_TOL).len();
        let (pos, neg) = (r.ratios.max_where(true), r.ratios.max_where(false));
        pass &= bad == 0
            && pos <= pos_cap
            && neg <= neg_cap
            && r.search_violations.is_empty()
            && r.probe_violations.is_empty();
        parts.push(format!(
            "{algo}: routes={} pos={pos:.4} neg={neg:.4} violations={bad} search={} probe={}",
            r.routes,
            r.search_violations.len(),
            r.probe_violations.len()
        ));
    }
    outcome(pass, parts.join("; "))
}

fn unions() -> Result<Outcome, HarnessError> {
    let mut pass = true;
    let mut parts = Vec::new();
    for k in 1..=3 {
        let r = spanning_sweep(Flavor::Union(k), 40, 60, SEED)?;
        let bound = union_bound(k);
        pass &= r.max_ratio <= bound + RATIO_TOL && r.violations(RATIO_TOL).is_empty();
        if k == 2 {
            pass &= r.max_ratio <= 1.93186;
        }
        parts.push(format!("k={k} max={:.6} bound={bound:.6}", r.max_ratio));
    }
    outcome(pass, parts.join("; "))
}

fn structure() -> Result<Outcome, HarnessError> {
    let (mut mismatches, mut crossings, mut faces, mut oracle_diff) = (0, 0, 0, 0);
    for i in 0..50 {
        let g = build_half_theta6(&random_general_position(60, trial_seed(SEED, i), &[0.0]))?;
        mismatches += empty_triangle_mismatches(&g)?.len();
        let g = build_half_theta6(&random_general_position(40, trial_seed(SEED, i), &[0.0]))?;
        crossings += crossing_edges(&g).len();
        faces += non_triangular_faces(&g).len();
        let n = 4 + i % 9;
        let g = build_half_theta6(&random_general_position(n, trial_seed(SEED, i), &[0.0]))?;
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    let (a, _) = oracle_shortest_path(&g, u, v, None)?;
                    let (b, _) = exhaustive_shortest_path(&g, u, v)?;
                    if (a - b).abs() > 1e-12 * a.max(1.0) {
                        oracle_diff += 1;
                    }
                }
            }
        }
    }
    let pass = mismatches + crossings + faces + oracle_diff == 0;
    outcome(
        pass,
        format!("triangle mismatches={mismatches} crossings={crossings} non-triangular faces={faces} oracle diffs={oracle_diff}"),
    )
}

fn report(id: usize, name: &str, start: Instant, result: Result<Outcome, HarnessError>) -> bool {
    let secs = start.elapsed().as_secs_f64();
    match result {
        Ok(o) => {
            println!("{} {id} {name}: {} [{secs:.1}s]", if o.pass { "PASS" } else { "FAIL" }, o.detail);
            o.pass
        }
        Err(e) => {
            println!("FAIL {id} {name}: error: {e} [{secs:.1}s]");
            false
        }
    }
}

fn main() {
    let mut ok = true;
    let t = Instant::now();
    ok &= report(1, "spanning ratio", t, spanning());
    let t = Instant::now();
    ok &= report(2, "restricted spanning", t, restricted());

    let t = Instant::now();
    let routing = routing();
    ok &= match &routing {
        Ok(r) => report(3, "routing bounds", t, routing_bounds(r)),
        Err(e) => report(3, "routing bounds", t, Err(HarnessError::Construction(e.to_string()))),
    };
    let t = Instant::now();
    ok &= report(4, "lower-bound separation", t, separation());
    ok &= match &routing {
        Ok(r) => report(5, "potential audit", t, potential(r)),
        Err(e) => report(5, "potential audit", t, Err(HarnessError::Construction(e.to_string()))),
    };
    let t = Instant::now();
    ok &= report(6, "degree and spanner", t, degree());
    let t = Instant::now();
    ok &= report(7, "bounded-degree routing", t, bounded_routing());
    let t = Instant::now();
    ok &= report(8, "rotated unions", t, unions());
    let t = Instant::now();
    ok &= report(9, "oracle and structure", t, structure());
    if !ok {
        std::process::exit(1);
    }
}
