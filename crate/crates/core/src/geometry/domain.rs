use crate::geometry::pointset::{closest_on_segment, point_segment_distance, PointSet};
use crate::{Error, Point2, Result, Scalar};

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox<T> {
    pub min: Point2<T>,
    pub max: Point2<T>,
}

impl<T: Scalar> BBox<T> {
    pub fn width(&self) -> T {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> T {
        self.max.y - self.min.y
    }

    pub fn diameter(&self) -> T {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, p: Point2<T>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    fn around(points: impl IntoIterator<Item = Point2<T>>, pad: T) -> Self {
        let mut min = Point2::new(T::infinity(), T::infinity());
        let mut max = Point2::new(T::neg_infinity(), T::neg_infinity());
        for p in points {
            min = Point2::new(min.x.min(p.x), min.y.min(p.y));
            max = Point2::new(max.x.max(p.x), max.y.max(p.y));
        }
        Self { min: Point2::new(min.x - pad, min.y - pad), max: Point2::new(max.x + pad, max.y + pad) }
    }
}

/// The four supported shapes.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind<T> {
    Disc { center: Point2<T>, radius: T },
    /// Strictly convex polygon, vertices counter-clockwise.
    Polygon { vertices: Vec<Point2<T>> },
    /// Parallel set of the segment `[a, b]` (a disc when `a == b` is excluded).
    Stadium { a: Point2<T>, b: Point2<T>, radius: T },
    /// Minkowski sum of a convex polygon and a disc of the given radius.
    ParallelSet { vertices: Vec<Point2<T>>, radius: T },
}

/// Edge `i` of a polygon: supporting line `normal . x = offset`, interior on the side `normal . x < offset`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Edge<T> {
    pub a: Point2<T>,
    pub b: Point2<T>,
    pub normal: Point2<T>,
    pub offset: T,
}

/// A piece of the boundary curve, used for arc-length sampling.
#[derive(Debug, Clone, Copy)]
enum BoundaryPiece<T> {
    Line { a: Point2<T>, b: Point2<T>, inward: Point2<T> },
    Arc { center: Point2<T>, radius: T, start: T, sweep: T },
}

impl<T: Scalar> BoundaryPiece<T> {
    fn length(&self) -> T {
        match *self {
            BoundaryPiece::Line { a, b, .. } => a.dist(b),
            BoundaryPiece::Arc { radius, sweep, .. } => radius * sweep,
        }
    }

    fn at(&self, s: T) -> (Point2<T>, Point2<T>) {
        match *self {
            BoundaryPiece::Line { a, b, inward } => {
                let len = a.dist(b);
                (a.lerp(b, s / len), inward)
            }
            BoundaryPiece::Arc { center, radius, start, sweep: _ } => {
                let th = start + s / radius;
                let dir = Point2::new(th.cos(), th.sin());
                (center + dir.scale(radius), -dir)
            }
        }
    }
}

/// An open bounded convex planar region with exact distance geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexDomain<T> {
    kind: DomainKind<T>,
    bbox: BBox<T>,
}

fn check_convex_ccw<T: Scalar>(vertices: &[Point2<T>]) -> Result<()> {
    let n = vertices.len();
    if n < 3 {
        return Err(Error::InvalidDomain(format!("polygon needs at least 3 vertices, got {n}")));
    }
    if vertices.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidDomain("non-finite polygon vertex".into()));
    }
    let mut turning = T::zero();
    for i in 0..n {
        let e0 = vertices[(i + 1) % n] - vertices[i];
        let e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
        let cross = e0.cross(e1);
        if cross <= T::zero() || e0.norm() <= T::zero() {
            return Err(Error::InvalidDomain(format!(
                "polygon is not strictly convex and counter-clockwise at vertex {}",
                (i + 1) % n
            )));
        }
        turning += cross.atan2(e0.dot(e1));
    }
    // A star polygon has positive turns everywhere but winds more than once.
    let full = T::TAU();
    if (turning - full).abs() > T::lit(1e-3) {
        return Err(Error::InvalidDomain("polygon winds more than once".into()));
    }
    Ok(())
}

pub(crate) fn polygon_edges<T: Scalar>(vertices: &[Point2<T>]) -> Vec<Edge<T>> {
    let n = vertices.len();
    (0..n)
        .map(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let e = b - a;
            let normal = Point2::new(e.y, -e.x).normalized().expect("non-degenerate edge");
            Edge { a, b, normal, offset: normal.dot(a) }
        })
        .collect()
}

/// Signed distance to the polygon boundary: positive inside.
fn polygon_signed_depth<T: Scalar>(edges: &[Edge<T>], x: Point2<T>) -> T {
    edges.iter().map(|e| e.offset - e.normal.dot(x)).fold(T::infinity(), T::min)
}

fn polygon_outside_distance<T: Scalar>(edges: &[Edge<T>], x: Point2<T>) -> T {
    edges.iter().map(|e| point_segment_distance(x, e.a, e.b)).fold(T::infinity(), T::min)
}

/// Largest inscribed circle of a convex polygon: its radius and the argmax set of
/// the depth function (a point or a segment).
pub(crate) fn polygon_chebyshev<T: Scalar>(edges: &[Edge<T>], tol: T) -> (T, Vec<Point2<T>>) {
    let n = edges.len();
    let mut cands: Vec<(T, Point2<T>)> = Vec::new();
    // The depth maximum is a vertex of the LP {n_i . x + t <= c_i}: three active constraints.
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                if let Some((p, t)) = solve_three_lines(edges[i], edges[j], edges[k]) {
                    let depth = polygon_signed_depth(edges, p);
                    if (depth - t).abs() <= tol {
                        cands.push((depth, p));
                    }
                }
            }
        }
    }
    let best = cands.iter().map(|c| c.0).fold(T::neg_infinity(), T::max);
    let top: Vec<Point2<T>> = cands.iter().filter(|c| c.0 >= best - tol).map(|c| c.1).collect();
    // Extreme pair of the optimal candidates.
    let mut pair = (top[0], top[0]);
    let mut far = T::zero();
    for (ia, a) in top.iter().enumerate() {
        for b in &top[ia + 1..] {
            let d = a.dist(*b);
            if d > far {
                far = d;
                pair = (*a, *b);
            }
        }
    }
    if far <= tol {
        let mut c = Point2::origin();
        for p in &top {
            c = c + *p;
        }
        (best, vec![c.scale(T::one() / T::from_usize_lossy(top.len()))])
    } else {
        (best, vec![pair.0, pair.1])
    }
}

/// Point and time where the three edge lines, moved inward at unit speed, meet.
pub(crate) fn solve_three_lines<T: Scalar>(e0: Edge<T>, e1: Edge<T>, e2: Edge<T>) -> Option<(Point2<T>, T)> {
    // Rows: n.x * x + n.y * y + t = c
    let m = [
        [e0.normal.x, e0.normal.y, T::one()],
        [e1.normal.x, e1.normal.y, T::one()],
        [e2.normal.x, e2.normal.y, T::one()],
    ];
    let rhs = [e0.offset, e1.offset, e2.offset];
    let det3 = |a: [[T; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let det = det3(m);
    if det.abs() <= T::lit(1e3) * T::epsilon() {
        return None;
    }
    let mut sol = [T::zero(); 3];
    for (c, s) in sol.iter_mut().enumerate() {
        let mut mc = m;
        for r in 0..3 {
            mc[r][c] = rhs[r];
        }
        *s = det3(mc) / det;
    }
    Some((Point2::new(sol[0], sol[1]), sol[2]))
}

impl<T: Scalar> ConvexDomain<T> {
    pub fn disc(center: Point2<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() || !center.is_finite() {
            return Err(Error::InvalidDomain(format!("disc radius must be positive, got {radius}")));
        }
        let bbox = BBox::around([center], radius);
        Ok(Self { kind: DomainKind::Disc { center, radius }, bbox })
    }

    pub fn polygon(vertices: Vec<Point2<T>>) -> Result<Self> {
        check_convex_ccw(&vertices)?;
        let bbox = BBox::around(vertices.iter().copied(), T::zero());
        Ok(Self { kind: DomainKind::Polygon { vertices }, bbox })
    }

    pub fn stadium(a: Point2<T>, b: Point2<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidDomain(format!("stadium radius must be positive, got {radius}")));
        }
        if !(a.dist(b) > T::zero()) {
            return Err(Error::InvalidDomain("stadium spine has zero length; use a disc".into()));
        }
        let bbox = BBox::around([a, b], radius);
        Ok(Self { kind: DomainKind::Stadium { a, b, radius }, bbox })
    }

    pub fn parallel_set(vertices: Vec<Point2<T>>, radius: T) -> Result<Self> {
        check_convex_ccw(&vertices)?;
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidDomain(format!("parallel-set radius must be positive, got {radius}")));
        }
        let bbox = BBox::around(vertices.iter().copied(), radius);
        Ok(Self { kind: DomainKind::ParallelSet { vertices, radius }, bbox })
    }

    /// Unit disc centred at the origin.
    pub fn unit_disc() -> Self {
        Self::disc(Point2::origin(), T::one()).expect("valid")
    }

    /// Axis-aligned square `[x0, x0 + side] x [y0, y0 + side]`.
    pub fn square(x0: T, y0: T, side: T) -> Result<Self> {
        Self::rectangle(x0, y0, side, side)
    }

    pub fn rectangle(x0: T, y0: T, width: T, height: T) -> Result<Self> {
        Self::polygon(vec![
            Point2::new(x0, y0),
            Point2::new(x0 + width, y0),
            Point2::new(x0 + width, y0 + height),
            Point2::new(x0, y0 + height),
        ])
    }

    pub fn kind(&self) -> &DomainKind<T> {
        &self.kind
    }

    pub fn bounding_box(&self) -> BBox<T> {
        self.bbox
    }

    /// Human-readable shape name.
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            DomainKind::Disc { .. } => "disc",
            DomainKind::Polygon { .. } => "polygon",
            DomainKind::Stadium { .. } => "stadium",
            DomainKind::ParallelSet { .. } => "parallel_set",
        }
    }

    /// Round-off allowance for membership tests.
    pub(crate) fn eps(&self) -> T {
        T::lit(64.0) * T::epsilon() * self.bbox.diameter().max(T::one())
    }

    /// Distance from `x` to the boundary, or `None` if `x` is outside the closure.
    fn depth(&self, x: Point2<T>) -> Option<T> {
        let eps = self.eps();
        let d = match &self.kind {
            DomainKind::Disc { center, radius } => *radius - x.dist(*center),
            DomainKind::Polygon { vertices } => polygon_signed_depth(&polygon_edges(vertices), x),
            DomainKind::Stadium { a, b, radius } => *radius - point_segment_distance(x, *a, *b),
            DomainKind::ParallelSet { vertices, radius } => {
                let edges = polygon_edges(vertices);
                let s = polygon_signed_depth(&edges, x);
                if s >= T::zero() {
                    *radius + s
                } else {
                    *radius - polygon_outside_distance(&edges, x)
                }
            }
        };
        if d < -eps {
            None
        } else {
            Some(d.max(T::zero()))
        }
    }

    /// Distance from `x` to the boundary; `x` must lie in the closure.
    pub fn distance(&self, x: Point2<T>) -> Result<T> {
        self.depth(x).ok_or(Error::OutsideDomain { x: x.x.to_f64_lossy(), y: x.y.to_f64_lossy() })
    }

    /// Distance for points known to be inside; zero outside.
    pub fn distance_or_zero(&self, x: Point2<T>) -> T {
        self.depth(x).unwrap_or_else(T::zero)
    }

    /// `true` for points of the open domain.
    pub fn contains_strictly(&self, x: Point2<T>) -> bool {
        matches!(self.depth(x), Some(d) if d > self.eps())
    }

    pub fn contains(&self, x: Point2<T>) -> bool {
        self.depth(x).is_some()
    }

    /// Maximum of the distance function, which for convex sets is the inradius.
    pub fn max_distance(&self) -> T {
        match &self.kind {
            DomainKind::Disc { radius, .. } | DomainKind::Stadium { radius, .. } => *radius,
            DomainKind::Polygon { vertices } => polygon_chebyshev(&polygon_edges(vertices), self.eps()).0,
            DomainKind::ParallelSet { vertices, radius } => {
                *radius + polygon_chebyshev(&polygon_edges(vertices), self.eps()).0
            }
        }
    }

    pub fn inradius(&self) -> T {
        self.max_distance()
    }

    /// Limit of the rooted p-Laplacian eigenvalues: the reciprocal inradius.
    pub fn lambda_infinity(&self) -> T {
        T::one() / self.max_distance()
    }

    /// Boundary points realising the distance from `x` (up to `tol`).
    ///
    /// Continua of nearest points (the centre of a disc, a spine endpoint of a
    /// stadium, a vertex of the inner polygon of a parallel set) are returned as
    /// sampled arcs with kind `Polyline`.
    pub fn projection_set(&self, x: Point2<T>, tol: T) -> Result<PointSet<T>> {
        let d = self.distance(x)?;
        if d <= self.eps() {
            return Err(Error::DegenerateProjection { x: x.x.to_f64_lossy(), y: x.y.to_f64_lossy() });
        }
        let tol = tol.max(self.eps());
        let set = match &self.kind {
            DomainKind::Disc { center, radius } => {
                let v = x - *center;
                match v.normalized() {
                    Some(u) if v.norm() > tol => PointSet::singleton(*center + u.scale(*radius)),
                    _ => PointSet::polyline(arc_samples(*center, *radius, T::zero(), T::TAU(), 64, false)),
                }
            }
            DomainKind::Polygon { vertices } => {
                let edges = polygon_edges(vertices);
                let mut pts: Vec<Point2<T>> = Vec::new();
                for e in &edges {
                    if (e.offset - e.normal.dot(x)) <= d + tol {
                        let foot = x + e.normal.scale(e.offset - e.normal.dot(x));
                        let y = closest_on_segment(foot, e.a, e.b);
                        if y.dist(x) <= d + tol {
                            push_unique(&mut pts, y, tol);
                        }
                    }
                }
                PointSet::finite(pts)
            }
            DomainKind::Stadium { a, b, radius } => {
                let q = closest_on_segment(x, *a, *b);
                let v = x - q;
                if v.norm() > tol {
                    PointSet::singleton(q + v.normalized().expect("nonzero").scale(*radius))
                } else {
                    let axis = (*b - *a).normalized().expect("nonzero spine");
                    let n = axis.perp();
                    if q.dist(*a) <= tol {
                        let th = (-n).y.atan2((-n).x);
                        PointSet::polyline(arc_samples(*a, *radius, th, T::PI(), 33, true))
                    } else if q.dist(*b) <= tol {
                        let th = n.y.atan2(n.x);
                        PointSet::polyline(arc_samples(*b, *radius, th, T::PI(), 33, true))
                    } else {
                        PointSet::finite(vec![q + n.scale(*radius), q - n.scale(*radius)])
                    }
                }
            }
            DomainKind::ParallelSet { vertices, radius } => {
                let edges = polygon_edges(vertices);
                let s = polygon_signed_depth(&edges, x);
                if s < -tol {
                    // Outside the inner polygon: unique nearest point on it.
                    let q = edges
                        .iter()
                        .map(|e| closest_on_segment(x, e.a, e.b))
                        .min_by(|p, r| p.dist(x).partial_cmp(&r.dist(x)).expect("finite"))
                        .expect("edges");
                    PointSet::singleton(q + (x - q).normalized().expect("outside").scale(*radius))
                } else {
                    let mut pts: Vec<Point2<T>> = Vec::new();
                    let mut arc = false;
                    for (i, e) in edges.iter().enumerate() {
                        let depth = e.offset - e.normal.dot(x);
                        if depth <= s.max(T::zero()) + tol {
                            let foot = closest_on_segment(x + e.normal.scale(depth), e.a, e.b);
                            push_unique(&mut pts, foot + e.normal.scale(*radius), tol);
                            // On a vertex of the inner polygon the whole corner arc is nearest.
                            let next = edges[(i + 1) % edges.len()];
                            if s <= tol && x.dist(e.b) <= tol {
                                let th0 = e.normal.y.atan2(e.normal.x);
                                let mut sweep = next.normal.y.atan2(next.normal.x) - th0;
                                if sweep < T::zero() {
                                    sweep += T::TAU();
                                }
                                for p in arc_samples(e.b, *radius, th0, sweep, 17, true) {
                                    push_unique(&mut pts, p, tol);
                                }
                                arc = true;
                            }
                        }
                    }
                    if arc {
                        PointSet::polyline(pts)
                    } else {
                        PointSet::finite(pts)
                    }
                }
            }
        };
        Ok(set)
    }

    /// Argmax set of the distance function: a point or a segment.
    pub fn high_ridge(&self, tol: T) -> PointSet<T> {
        let tol = tol.max(self.eps());
        match &self.kind {
            DomainKind::Disc { center, .. } => PointSet::singleton(*center),
            DomainKind::Stadium { a, b, .. } => PointSet::segment(*a, *b),
            DomainKind::Polygon { vertices } | DomainKind::ParallelSet { vertices, .. } => {
                let (_, arg) = polygon_chebyshev(&polygon_edges(vertices), tol);
                if arg.len() == 1 {
                    PointSet::singleton(arg[0])
                } else {
                    PointSet::segment(arg[0], arg[1])
                }
            }
        }
    }

    /// Exact medial axis as a list of segments (degenerate for a disc).
    pub fn medial_axis(&self) -> Vec<(Point2<T>, Point2<T>)> {
        match &self.kind {
            DomainKind::Disc { center, .. } => vec![(*center, *center)],
            DomainKind::Stadium { a, b, .. } => vec![(*a, *b)],
            DomainKind::Polygon { vertices } | DomainKind::ParallelSet { vertices, .. } => {
                crate::geometry::skeleton::convex_polygon_skeleton(vertices)
            }
        }
    }

    /// Cut locus (closure of the singular set of the distance), sampled at `resolution`.
    pub fn cut_locus(&self, resolution: T) -> Result<PointSet<T>> {
        if !(resolution > T::zero()) {
            return Err(Error::InvalidArgument(format!("cut locus resolution must be positive, got {resolution}")));
        }
        Ok(match &self.kind {
            DomainKind::Disc { center, .. } => PointSet::singleton(*center),
            DomainKind::Stadium { a, b, .. } => PointSet::segment(*a, *b),
            _ => {
                let mut pts: Vec<Point2<T>> = Vec::new();
                for (a, b) in self.medial_axis() {
                    for p in crate::geometry::pointset::sample_segment(a, b, resolution) {
                        push_unique(&mut pts, p, resolution * T::lit(1e-3));
                    }
                }
                PointSet::polyline(pts)
            }
        })
    }

    /// Boundary pieces in counter-clockwise order.
    fn boundary_pieces(&self) -> Vec<BoundaryPiece<T>> {
        let offset_pieces = |verts: Vec<Point2<T>>, radius: T| {
            // Works for a two-vertex "polygon" (the stadium spine) as well.
            let n = verts.len();
            let mut out = Vec::new();
            for i in 0..n {
                let a = verts[i];
                let b = verts[(i + 1) % n];
                let e = b - a;
                let nrm = Point2::new(e.y, -e.x).normalized().expect("edge");
                out.push(BoundaryPiece::Line { a: a + nrm.scale(radius), b: b + nrm.scale(radius), inward: -nrm });
                let c = verts[(i + 2) % n] - b;
                let nrm_next = Point2::new(c.y, -c.x).normalized().expect("edge");
                let th0 = nrm.y.atan2(nrm.x);
                let mut sweep = nrm_next.y.atan2(nrm_next.x) - th0;
                if sweep <= T::zero() {
                    sweep += T::TAU();
                }
                out.push(BoundaryPiece::Arc { center: b, radius, start: th0, sweep });
            }
            out
        };
        match &self.kind {
            DomainKind::Disc { center, radius } => {
                vec![BoundaryPiece::Arc { center: *center, radius: *radius, start: T::zero(), sweep: T::TAU() }]
            }
            DomainKind::Polygon { vertices } => polygon_edges(vertices)
                .into_iter()
                .map(|e| BoundaryPiece::Line { a: e.a, b: e.b, inward: -e.normal })
                .collect(),
            DomainKind::Stadium { a, b, radius } => offset_pieces(vec![*a, *b], *radius),
            DomainKind::ParallelSet { vertices, radius } => offset_pieces(vertices.clone(), *radius),
        }
    }

    pub fn perimeter(&self) -> T {
        self.boundary_pieces().iter().map(|p| p.length()).sum()
    }

    /// `n` boundary points equally spaced in arc length (offset by half a spacing)
    /// with their inward unit normals.
    pub fn boundary_samples(&self, n: usize) -> Vec<(Point2<T>, Point2<T>)> {
        let pieces = self.boundary_pieces();
        let total: T = pieces.iter().map(|p| p.length()).sum();
        let step = total / T::from_usize_lossy(n.max(1));
        let mut out = Vec::with_capacity(n);
        let mut piece = 0;
        let mut acc = T::zero();
        for k in 0..n {
            let s = (T::from_usize_lossy(k) + T::lit(0.5)) * step;
            while piece + 1 < pieces.len() && s > acc + pieces[piece].length() {
                acc += pieces[piece].length();
                piece += 1;
            }
            out.push(pieces[piece].at((s - acc).min(pieces[piece].length())));
        }
        out
    }

    /// The same shape with all lengths multiplied by `s` (about the origin).
    pub fn scaled(&self, s: T) -> Self {
        let sp = |p: &Point2<T>| p.scale(s);
        let kind = match &self.kind {
            DomainKind::Disc { center, radius } => DomainKind::Disc { center: sp(center), radius: *radius * s },
            DomainKind::Polygon { vertices } => DomainKind::Polygon { vertices: vertices.iter().map(sp).collect() },
            DomainKind::Stadium { a, b, radius } => DomainKind::Stadium { a: sp(a), b: sp(b), radius: *radius * s },
            DomainKind::ParallelSet { vertices, radius } => {
                DomainKind::ParallelSet { vertices: vertices.iter().map(sp).collect(), radius: *radius * s }
            }
        };
        Self { kind, bbox: BBox { min: sp(&self.bbox.min), max: sp(&self.bbox.max) } }
    }
}

fn push_unique<T: Scalar>(pts: &mut Vec<Point2<T>>, p: Point2<T>, tol: T) {
    if !pts.iter().any(|q| q.dist(p) <= tol) {
        pts.push(p);
    }
}

fn arc_samples<T: Scalar>(c: Point2<T>, r: T, start: T, sweep: T, n: usize, closed_ends: bool) -> Vec<Point2<T>> {
    let denom = if closed_ends { n.saturating_sub(1).max(1) } else { n };
    (0..n)
        .map(|k| {
            let th = start + sweep * T::from_usize_lossy(k) / T::from_usize_lossy(denom);
            c + Point2::new(th.cos(), th.sin()).scale(r)
        })
        .collect()
}
