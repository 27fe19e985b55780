//! Straight skeleton of a convex polygon, which for convex polygons is the medial axis.

use crate::geometry::domain::{polygon_edges, solve_three_lines, Edge};
use crate::{Point2, Scalar};

/// Medial-axis segments of a strictly convex CCW polygon.
///
/// Edges shrink inward at unit speed; each edge-collapse event joins the two
/// moving vertices of the collapsing edge at the event point.
pub fn convex_polygon_skeleton<T: Scalar>(vertices: &[Point2<T>]) -> Vec<(Point2<T>, Point2<T>)> {
    let edges = polygon_edges(vertices);
    let scale = vertices.iter().map(|p| p.norm()).fold(T::one(), T::max);
    let eps_t = T::epsilon().sqrt() * scale;

    // active[m] is an edge index; starts[m] is where the vertex between active[m-1] and active[m] was born.
    let mut active: Vec<usize> = (0..edges.len()).collect();
    let mut starts: Vec<Point2<T>> = vertices.to_vec();
    let mut now = T::zero();
    let mut segs: Vec<(Point2<T>, Point2<T>)> = Vec::new();

    while active.len() > 3 {
        let n = active.len();
        let events: Vec<Option<(Point2<T>, T)>> = (0..n)
            .map(|m| {
                let l = edges[active[(m + n - 1) % n]];
                let c = edges[active[m]];
                let r = edges[active[(m + 1) % n]];
                collapse(l, c, r).filter(|&(_, t)| t >= now - eps_t)
            })
            .collect();
        let t_min = events.iter().flatten().map(|e| e.1).fold(T::infinity(), T::min);
        if !t_min.is_finite() {
            break;
        }
        let hit: Vec<bool> = events.iter().map(|e| matches!(e, Some((_, t)) if *t <= t_min + eps_t)).collect();
        if hit.iter().all(|&h| h) {
            // Everything meets in one point.
            let p = events[0].expect("hit").0;
            for s in &starts {
                segs.push((*s, p));
            }
            return dedup(segs, eps_t);
        }
        let mut next_active = Vec::new();
        let mut next_starts = Vec::new();
        for m in 0..n {
            if hit[m] {
                let p = events[m].expect("hit").0;
                segs.push((starts[m], p));
                segs.push((starts[(m + 1) % n], p));
                continue;
            }
            next_active.push(active[m]);
            // The vertex before a surviving edge is new if the previous edge collapsed.
            let prev = (m + n - 1) % n;
            next_starts.push(if hit[prev] { events[prev].expect("hit").0 } else { starts[m] });
        }
        active = next_active;
        starts = next_starts;
        now = t_min;
    }

    match active.len() {
        3 => {
            let p = solve_three_lines(edges[active[0]], edges[active[1]], edges[active[2]])
                .map(|s| s.0)
                .unwrap_or_else(|| centroid(&starts));
            for s in &starts {
                segs.push((*s, p));
            }
        }
        2 => segs.push((starts[0], starts[1])),
        _ => {}
    }
    dedup(segs, eps_t)
}

/// Point and time at which edge `c` shrinks to a point between its neighbours.
///
/// Edge lengths are affine in time, so a growing edge reports a past collapse
/// and is filtered by the caller.
fn collapse<T: Scalar>(l: Edge<T>, c: Edge<T>, r: Edge<T>) -> Option<(Point2<T>, T)> {
    solve_three_lines(l, c, r)
}

fn centroid<T: Scalar>(pts: &[Point2<T>]) -> Point2<T> {
    let mut c = Point2::origin();
    for p in pts {
        c = c + *p;
    }
    c.scale(T::one() / T::from_usize_lossy(pts.len().max(1)))
}

fn dedup<T: Scalar>(segs: Vec<(Point2<T>, Point2<T>)>, tol: T) -> Vec<(Point2<T>, Point2<T>)> {
    let mut out: Vec<(Point2<T>, Point2<T>)> = Vec::new();
    for (a, b) in segs {
        if a.dist(b) <= tol {
            continue;
        }
        let dup = out.iter().any(|(c, d)| (a.dist(*c) <= tol && b.dist(*d) <= tol) || (a.dist(*d) <= tol && b.dist(*c) <= tol));
        if !dup {
            out.push((a, b));
        }
    }
    out
}
