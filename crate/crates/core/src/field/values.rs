use std::sync::Arc;

use crate::field::Grid;
use crate::geometry::ConvexDomain;
use crate::{Error, Point2, Result, Scalar};

/// Node values on a [`Grid`] with a constant extension outside the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    pub grid: Arc<Grid<T>>,
    pub values: Vec<T>,
    pub boundary_value: T,
}

/// Per-node 2-vectors on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    pub grid: Arc<Grid<T>>,
    pub components: Vec<Point2<T>>,
}

impl<T: Scalar> ScalarField<T> {
    /// Samples `f` at inside nodes; exterior nodes take `boundary_value`.
    pub fn from_fn(grid: Arc<Grid<T>>, boundary_value: T, f: impl Fn(Point2<T>) -> T) -> Self {
        let values = (0..grid.len())
            .map(|k| if grid.inside(k) { f(grid.node_point(k)) } else { boundary_value })
            .collect();
        Self { grid, values, boundary_value }
    }

    /// Samples `f` at every node, exterior included.
    pub fn from_fn_everywhere(grid: Arc<Grid<T>>, boundary_value: T, f: impl Fn(Point2<T>) -> T) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.node_point(k))).collect();
        Self { grid, values, boundary_value }
    }

    pub fn zeros(grid: Arc<Grid<T>>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![T::zero(); n], boundary_value: T::zero() }
    }

    /// Rasterized distance to the boundary (zero outside).
    pub fn distance(dom: &ConvexDomain<T>, grid: Arc<Grid<T>>) -> Self {
        Self::from_fn(grid, T::zero(), |p| dom.distance_or_zero(p))
    }

    /// Same grid, new values; exterior nodes reset to the boundary value.
    pub fn with_values(&self, mut values: Vec<T>) -> Self {
        for (k, v) in values.iter_mut().enumerate() {
            if !self.grid.inside(k) {
                *v = self.boundary_value;
            }
        }
        Self { grid: self.grid.clone(), values, boundary_value: self.boundary_value }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[j * self.grid.nx + i]
    }

    /// Largest value over inside nodes.
    pub fn max_inside(&self) -> T {
        self.grid.inside_nodes().map(|k| self.values[k]).fold(T::neg_infinity(), T::max)
    }

    pub fn min_inside(&self) -> T {
        self.grid.inside_nodes().map(|k| self.values[k]).fold(T::infinity(), T::min)
    }

    /// First inside node attaining the maximum.
    pub fn argmax_node(&self) -> usize {
        let m = self.max_inside();
        self.grid.inside_nodes().find(|&k| self.values[k] == m).expect("non-empty grid")
    }

    /// Inside nodes with value at least `max - band`.
    pub fn near_max_nodes(&self, band: T) -> Vec<usize> {
        let m = self.max_inside();
        self.grid.inside_nodes().filter(|&k| self.values[k] >= m - band).collect()
    }

    /// Multiplies inside values by `s`.
    pub fn scaled(&self, s: T) -> Self {
        self.with_values(self.values.iter().map(|&v| v * s).collect())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    /// `max |self - other|` over inside nodes of the shared grid.
    pub fn sup_diff(&self, other: &Self) -> T {
        self.grid.inside_nodes().map(|k| (self.values[k] - other.values[k]).abs()).fold(T::zero(), T::max)
    }

    /// Bilinear interpolation of node values.
    pub fn interpolate(&self, x: Point2<T>) -> Result<T> {
        let g = &self.grid;
        if !g.in_hull(x) || !x.is_finite() {
            return Err(Error::OutsideHull { x: x.x.to_f64_lossy(), y: x.y.to_f64_lossy() });
        }
        let fx = snap((x.x - g.origin.x) / g.h);
        let fy = snap((x.y - g.origin.y) / g.h);
        let i = fx.floor().to_usize().unwrap_or(0).min(g.nx - 2);
        let j = fy.floor().to_usize().unwrap_or(0).min(g.ny - 2);
        let s = fx - T::from_usize_lossy(i);
        let t = fy - T::from_usize_lossy(j);
        let one = T::one();
        Ok((one - s) * (one - t) * self.at(i, j)
            + s * (one - t) * self.at(i + 1, j)
            + (one - s) * t * self.at(i, j + 1)
            + s * t * self.at(i + 1, j + 1))
    }

    /// Maximum of the interpolant over `nsamples` equi-angular points of the
    /// circle of radius `r` about `x`, with the maximising sample.
    pub fn sphere_max(&self, x: Point2<T>, r: T, nsamples: usize) -> Result<(T, Point2<T>)> {
        if nsamples < 16 {
            return Err(Error::InvalidArgument(format!("sphere_max needs at least 16 samples, got {nsamples}")));
        }
        if !(r > T::zero()) {
            return Err(Error::InvalidArgument(format!("sphere radius must be positive, got {r}")));
        }
        let mut best = (T::neg_infinity(), x);
        for k in 0..nsamples {
            let th = T::TAU() * T::from_usize_lossy(k) / T::from_usize_lossy(nsamples);
            let y = x + Point2::new(th.cos(), th.sin()).scale(r);
            let v = self.interpolate(y)?;
            if v > best.0 {
                best = (v, y);
            }
        }
        Ok(best)
    }

    /// [`sphere_max`](Self::sphere_max) followed by golden-section search on
    /// the bracket around the best sample.
    pub fn sphere_max_refined(&self, x: Point2<T>, r: T, nsamples: usize) -> Result<(T, Point2<T>)> {
        let (v0, y0) = self.sphere_max(x, r, nsamples)?;
        let step = T::TAU() / T::from_usize_lossy(nsamples);
        let d = y0 - x;
        let th0 = d.y.atan2(d.x);
        let at = |th: T| self.interpolate(x + Point2::new(th.cos(), th.sin()).scale(r));
        let phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
        let (mut a, mut b) = (th0 - step, th0 + step);
        let mut c = b - phi * (b - a);
        let mut e = a + phi * (b - a);
        let mut fc = at(c)?;
        let mut fe = at(e)?;
        for _ in 0..40 {
            if fc > fe {
                b = e;
                e = c;
                fe = fc;
                c = b - phi * (b - a);
                fc = at(c)?;
            } else {
                a = c;
                c = e;
                fc = fe;
                e = a + phi * (b - a);
                fe = at(e)?;
            }
        }
        let (th, v) = if fc > fe { (c, fc) } else { (e, fe) };
        if v > v0 {
            Ok((v, x + Point2::new(th.cos(), th.sin()).scale(r)))
        } else {
            Ok((v0, y0))
        }
    }
}

/// Rounds lattice coordinates that are integers up to round-off.
#[inline]
fn snap<T: Scalar>(f: T) -> T {
    let r = f.round();
    if (f - r).abs() <= T::lit(64.0) * T::epsilon() * r.abs().max(T::one()) {
        r
    } else {
        f
    }
}

impl<T: Scalar> VectorField<T> {
    pub fn norms(&self) -> Vec<T> {
        self.components.iter().map(|g| g.norm()).collect()
    }

    /// Bilinear interpolation of both components.
    pub fn interpolate(&self, x: Point2<T>) -> Result<Point2<T>> {
        let g = &self.grid;
        if !g.in_hull(x) || !x.is_finite() {
            return Err(Error::OutsideHull { x: x.x.to_f64_lossy(), y: x.y.to_f64_lossy() });
        }
        let fx = snap((x.x - g.origin.x) / g.h);
        let fy = snap((x.y - g.origin.y) / g.h);
        let i = fx.floor().to_usize().unwrap_or(0).min(g.nx - 2);
        let j = fy.floor().to_usize().unwrap_or(0).min(g.ny - 2);
        let s = fx - T::from_usize_lossy(i);
        let t = fy - T::from_usize_lossy(j);
        let one = T::one();
        let c = |i: usize, j: usize| self.components[g.idx(i, j)];
        Ok(c(i, j).scale((one - s) * (one - t))
            + c(i + 1, j).scale(s * (one - t))
            + c(i, j + 1).scale((one - s) * t)
            + c(i + 1, j + 1).scale(s * t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rasterize;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn square_grid(h: f64) -> Arc<Grid<f64>> {
        Arc::new(rasterize(&ConvexDomain::square(0.0, 0.0, 1.0).unwrap(), h).unwrap())
    }

    #[test]
    fn interpolation_examples() {
        let g = square_grid(0.1);
        let c = ScalarField::from_fn_everywhere(g.clone(), 3.5, |_| 3.5);
        assert_eq!(c.interpolate(Point2::new(0.37, 0.61)).unwrap(), 3.5);
        let fx = ScalarField::from_fn_everywhere(g.clone(), 0.0, |p| p.x);
        assert_relative_eq!(fx.interpolate(Point2::new(0.3, 0.7)).unwrap(), 0.3, epsilon = 1e-14);
        let dom = ConvexDomain::square(0.0, 0.0, 1.0).unwrap();
        let d = ScalarField::distance(&dom, square_grid(1.0 / 64.0));
        assert!((d.interpolate(Point2::new(0.1, 0.5)).unwrap() - 0.1).abs() < 1e-3);
        assert!(fx.interpolate(Point2::new(5.0, 0.0)).is_err());
    }

    #[test]
    fn sphere_max_examples() {
        let g = Arc::new(rasterize(&ConvexDomain::<f64>::unit_disc(), 1.0 / 64.0).unwrap());
        let fx = ScalarField::from_fn_everywhere(g.clone(), 0.0, |p| p.x);
        let (v, y) = fx.sphere_max(Point2::new(0.0, 0.0), 0.1, 64).unwrap();
        assert_relative_eq!(v, 0.1, epsilon = 1e-12);
        assert!(y.dist(Point2::new(0.1, 0.0)) < 1e-12);
        let d = ScalarField::distance(&ConvexDomain::unit_disc(), g.clone());
        let (v, y) = d.sphere_max(Point2::new(0.5, 0.0), 0.1, 64).unwrap();
        assert!((v - 0.6).abs() < 1e-3);
        assert!(y.dist(Point2::new(0.4, 0.0)) < 1e-12);
        let c = ScalarField::from_fn_everywhere(g.clone(), 2.0, |_| 2.0);
        assert_eq!(c.sphere_max(Point2::new(0.2, 0.1), 0.3, 16).unwrap().0, 2.0);
        assert!(c.sphere_max(Point2::new(0.0, 0.0), 5.0, 64).is_err());
        assert!(c.sphere_max(Point2::new(0.0, 0.0), 0.1, 8).is_err());
    }

    #[test]
    fn refined_sphere_max_improves_off_sample_maximum() {
        let g = Arc::new(rasterize(&ConvexDomain::<f64>::unit_disc(), 1.0 / 64.0).unwrap());
        let th = 0.05f64;
        let f = ScalarField::from_fn_everywhere(g, 0.0, |p| th.cos() * p.x + th.sin() * p.y);
        let (v, _) = f.sphere_max_refined(Point2::new(0.0, 0.0), 0.2, 16).unwrap();
        assert_relative_eq!(v, 0.2, epsilon = 1e-9);
    }

    proptest! {
        #[test]
        fn interpolation_reproduces_nodes(k in 0usize..400) {
            let g = square_grid(0.1);
            let f = ScalarField::from_fn(g.clone(), 0.0, |p| (3.0 * p.x).sin() + p.y * p.y);
            let k = k % g.len();
            prop_assert_eq!(f.interpolate(g.node_point(k)).unwrap(), f.values[k]);
        }

        #[test]
        fn sphere_max_dominates_centre_for_linear(a in -1.0..1.0f64, b in -1.0..1.0f64, r in 0.02..0.2f64) {
            let g = Arc::new(rasterize(&ConvexDomain::<f64>::unit_disc(), 1.0 / 32.0).unwrap());
            let f = ScalarField::from_fn_everywhere(g, 0.0, |p| a * p.x + b * p.y);
            let x = Point2::new(0.1, -0.2);
            let (v, _) = f.sphere_max(x, r, 64).unwrap();
            prop_assert!(v >= f.interpolate(x).unwrap() - 1e-12);
        }
    }
}
