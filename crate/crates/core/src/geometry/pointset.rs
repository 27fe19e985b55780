use crate::{Point2, Scalar};

/// How the points of a [`PointSet`] are to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointSetKind {
    /// Isolated points.
    Finite,
    /// The closed segment between exactly two endpoints.
    Segment,
    /// Dense samples of a curve or of a network of curves.
    Polyline,
}

impl PointSetKind {
    pub fn tag(self) -> &'static str {
        match self {
            PointSetKind::Finite => "finite",
            PointSetKind::Segment => "segment",
            PointSetKind::Polyline => "polyline",
        }
    }
}

/// A planar point set: projection sets, high ridges, cut loci.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet<T> {
    pub points: Vec<Point2<T>>,
    pub kind: PointSetKind,
}

impl<T: Scalar> PointSet<T> {
    pub fn finite(points: Vec<Point2<T>>) -> Self {
        Self { points, kind: PointSetKind::Finite }
    }

    pub fn singleton(p: Point2<T>) -> Self {
        Self::finite(vec![p])
    }

    pub fn segment(a: Point2<T>, b: Point2<T>) -> Self {
        Self { points: vec![a, b], kind: PointSetKind::Segment }
    }

    pub fn polyline(points: Vec<Point2<T>>) -> Self {
        Self { points, kind: PointSetKind::Polyline }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Point samples with spacing at most `resolution` along segment kinds.
    pub fn samples(&self, resolution: T) -> Vec<Point2<T>> {
        match self.kind {
            PointSetKind::Segment => sample_segment(self.points[0], self.points[1], resolution),
            _ => self.points.clone(),
        }
    }

    /// Euclidean distance from `p` to the set (segments treated as continua).
    pub fn distance_to(&self, p: Point2<T>) -> T {
        match self.kind {
            PointSetKind::Segment => point_segment_distance(p, self.points[0], self.points[1]),
            _ => self.points.iter().map(|q| q.dist(p)).fold(T::infinity(), T::min),
        }
    }

    /// CSV with header `x,y,tag`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,tag\n");
        for p in &self.points {
            s.push_str(&format!("{},{},{}\n", p.x, p.y, self.kind.tag()));
        }
        s
    }
}

/// Points `a, ..., b` evenly spaced with gap at most `resolution`.
pub fn sample_segment<T: Scalar>(a: Point2<T>, b: Point2<T>, resolution: T) -> Vec<Point2<T>> {
    let len = a.dist(b);
    if len <= T::zero() || resolution <= T::zero() {
        return vec![a];
    }
    let n = (len / resolution).ceil().to_usize().unwrap_or(1).max(1);
    let nt = T::from_usize_lossy(n);
    (0..=n).map(|k| a.lerp(b, T::from_usize_lossy(k) / nt)).collect()
}

pub fn point_segment_distance<T: Scalar>(p: Point2<T>, a: Point2<T>, b: Point2<T>) -> T {
    p.dist(closest_on_segment(p, a, b))
}

pub fn closest_on_segment<T: Scalar>(p: Point2<T>, a: Point2<T>, b: Point2<T>) -> Point2<T> {
    let ab = b - a;
    let l2 = ab.norm_sq();
    if l2 <= T::zero() {
        return a;
    }
    let t = ((p - a).dot(ab) / l2).max(T::zero()).min(T::one());
    a + ab.scale(t)
}

/// Symmetric Hausdorff distance between two finite samples.
pub fn hausdorff<T: Scalar>(a: &[Point2<T>], b: &[Point2<T>]) -> T {
    if a.is_empty() || b.is_empty() {
        return T::infinity();
    }
    let directed = |from: &[Point2<T>], to: &[Point2<T>]| {
        from.iter()
            .map(|p| to.iter().map(|q| q.dist(*p)).fold(T::infinity(), T::min))
            .fold(T::zero(), T::max)
    };
    directed(a, b).max(directed(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hausdorff_of_segment_samples_and_point() {
        let a = sample_segment(Point2::new(0.0f64, 0.0), Point2::new(1.0, 0.0), 0.1);
        let b = vec![Point2::new(0.0, 0.0)];
        assert!((hausdorff(&a, &b) - 1.0).abs() < 1e-12);
        assert_eq!(hausdorff(&a, &a), 0.0);
    }

    #[test]
    fn segment_samples_respect_resolution() {
        let s = sample_segment(Point2::new(0.0f64, 0.0), Point2::new(0.0, 1.0), 0.3);
        assert_eq!(s.len(), 5);
        for w in s.windows(2) {
            assert!(w[0].dist(w[1]) <= 0.3 + 1e-12);
        }
    }
}
