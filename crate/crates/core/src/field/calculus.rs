use crate::field::{Grid, ScalarField, VectorField};
use crate::{Point2, Scalar};

/// Symmetric 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2<T> {
    pub xx: T,
    pub xy: T,
    pub yy: T,
}

impl<T: Scalar> Sym2<T> {
    /// `g . H g`
    #[inline]
    pub fn quad(&self, g: Point2<T>) -> T {
        self.xx * g.x * g.x + T::lit(2.0) * self.xy * g.x * g.y + self.yy * g.y * g.y
    }

    /// Spectral norm.
    pub fn norm(&self) -> T {
        let m = (self.xx + self.yy) / T::lit(2.0);
        let r = ((self.xx - self.yy) / T::lit(2.0)).hypot(self.xy);
        (m + r).abs().max((m - r).abs())
    }

    /// Largest eigenvalue.
    pub fn max_eig(&self) -> T {
        (self.xx + self.yy) / T::lit(2.0) + ((self.xx - self.yy) / T::lit(2.0)).hypot(self.xy)
    }
}

/// First difference of `v` at node `k` along a lattice axis with index
/// `pos` in `0..len` and node stride `stride`.
///
/// Central when both neighbours are inside, second-order one-sided when two
/// inside nodes lie on one side, otherwise central on the extended values.
#[inline]
fn diff<T: Scalar>(grid: &Grid<T>, v: &[T], k: usize, pos: usize, len: usize, stride: usize) -> T {
    let h2 = grid.h + grid.h;
    let has = |d: isize| {
        let p = pos as isize + d;
        p >= 0 && (p as usize) < len && grid.inside((k as isize + d * stride as isize) as usize)
    };
    let at = |d: isize| v[(k as isize + d * stride as isize) as usize];
    let (l, r) = (has(-1), has(1));
    if l == r || (!l && !has(2)) || (!r && !has(-2)) {
        if pos == 0 || pos + 1 == len {
            return T::zero();
        }
        return (at(1) - at(-1)) / h2;
    }
    if r {
        (T::lit(-3.0) * at(0) + T::lit(4.0) * at(1) - at(2)) / h2
    } else {
        (T::lit(3.0) * at(0) - T::lit(4.0) * at(-1) + at(-2)) / h2
    }
}

/// Finite-difference gradient at inside nodes; zero at exterior nodes.
pub fn gradient<T: Scalar>(f: &ScalarField<T>) -> VectorField<T> {
    let g = &*f.grid;
    let mut comps = vec![Point2::origin(); g.len()];
    for k in g.inside_nodes() {
        let (i, j) = g.ij(k);
        comps[k] = Point2::new(diff(g, &f.values, k, i, g.nx, 1), diff(g, &f.values, k, j, g.ny, g.nx));
    }
    VectorField { grid: f.grid.clone(), components: comps }
}

fn full_stencil<T: Scalar>(g: &Grid<T>, k: usize) -> bool {
    let (i, j) = g.ij(k);
    if i == 0 || j == 0 || i + 1 == g.nx || j + 1 == g.ny {
        return false;
    }
    let n = g.nx;
    [k - 1, k + 1, k - n, k + n, k - n - 1, k - n + 1, k + n - 1, k + n + 1].iter().all(|&m| g.inside(m))
}

/// Hessian at inside nodes: central second differences where the 3x3 stencil
/// is inside, differences of the gradient elsewhere.
pub fn hessian<T: Scalar>(f: &ScalarField<T>) -> Vec<Sym2<T>> {
    let g = &*f.grid;
    let u = &f.values;
    let grad = gradient(f);
    let gx: Vec<T> = grad.components.iter().map(|p| p.x).collect();
    let gy: Vec<T> = grad.components.iter().map(|p| p.y).collect();
    let h2 = g.h * g.h;
    let n = g.nx;
    let mut out = vec![Sym2::default(); g.len()];
    for k in g.inside_nodes() {
        if full_stencil(g, k) {
            out[k] = Sym2 {
                xx: (u[k + 1] - T::lit(2.0) * u[k] + u[k - 1]) / h2,
                yy: (u[k + n] - T::lit(2.0) * u[k] + u[k - n]) / h2,
                xy: (u[k + n + 1] - u[k + n - 1] - u[k - n + 1] + u[k - n - 1]) / (T::lit(4.0) * h2),
            };
        } else {
            let (i, j) = g.ij(k);
            let xy = (diff(g, &gx, k, j, g.ny, n) + diff(g, &gy, k, i, g.nx, 1)) / T::lit(2.0);
            out[k] = Sym2 { xx: diff(g, &gx, k, i, g.nx, 1), xy, yy: diff(g, &gy, k, j, g.ny, n) };
        }
    }
    out
}

/// `D^2 u Du . Du` at inside nodes; zero outside.
pub fn infinity_laplacian<T: Scalar>(f: &ScalarField<T>) -> ScalarField<T> {
    let grad = gradient(f);
    let hess = hessian(f);
    let mut vals = vec![T::zero(); f.grid.len()];
    for k in f.grid.inside_nodes() {
        vals[k] = hess[k].quad(grad.components[k]);
    }
    ScalarField { grid: f.grid.clone(), values: vals, boundary_value: T::zero() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rasterize;
    use crate::geometry::ConvexDomain;
    use std::sync::Arc;

    fn grid(dom: &ConvexDomain<f64>, h: f64) -> Arc<Grid<f64>> {
        Arc::new(rasterize(dom, h).unwrap())
    }

    #[test]
    fn affine_fields_are_exact() {
        let dom = ConvexDomain::square(0.0, 0.0, 1.0).unwrap();
        let g = grid(&dom, 1.0 / 32.0);
        let f = ScalarField::from_fn(g.clone(), 0.0, |p| 0.7 * p.x - 1.3 * p.y + 0.2);
        let gr = gradient(&f);
        let il = infinity_laplacian(&f);
        for k in g.inside_nodes() {
            assert!((gr.components[k].x - 0.7).abs() < 1e-12);
            assert!((gr.components[k].y + 1.3).abs() < 1e-12);
            assert!(il.values[k].abs() < 1e-9);
        }
        let fx = ScalarField::from_fn(g.clone(), 0.0, |p| p.x);
        for c in gradient(&fx).components.iter().enumerate().filter(|(k, _)| g.inside(*k)).map(|(_, c)| c) {
            assert!((c.x - 1.0).abs() < 1e-12 && c.y.abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_examples() {
        let dom = ConvexDomain::square(0.0, 0.0, 1.0).unwrap();
        let g = grid(&dom, 1.0 / 32.0);
        let f = ScalarField::from_fn(g.clone(), 0.0, |p| p.x * p.x);
        let gr = gradient(&f);
        let il = infinity_laplacian(&f);
        let k = g.idx(2 + 8, 2 + 16);
        assert!(g.node_point(k).dist(Point2::new(0.25, 0.5)) < 1e-12);
        assert!((gr.components[k].x - 0.5).abs() < 1e-12);
        for k in g.inside_nodes() {
            let x = g.node_point(k).x;
            assert!((il.values[k] - 8.0 * x * x).abs() < 1e-9, "{} vs {}", il.values[k], 8.0 * x * x);
        }
    }

    #[test]
    fn distance_gradient_on_disc() {
        let dom = ConvexDomain::<f64>::unit_disc();
        let g = grid(&dom, 1.0 / 64.0);
        let f = ScalarField::distance(&dom, g.clone());
        let (i, j) = g.nearest(Point2::new(0.5, 0.0));
        let c = gradient(&f).components[g.idx(i, j)];
        assert!((c.x + 1.0).abs() < 1e-3 && c.y.abs() < 1e-12);
    }

    #[test]
    fn aronsson_field_is_infinity_harmonic() {
        let dom = ConvexDomain::square(-1.0, -1.0, 2.0).unwrap();
        let a = |p: Point2<f64>| p.x.abs().powf(4.0 / 3.0) - p.y.abs().powf(4.0 / 3.0);
        let mut prev = f64::INFINITY;
        for n in [32.0, 64.0, 128.0] {
            let h = 1.0 / n;
            let g = grid(&dom, h);
            let il = infinity_laplacian(&ScalarField::from_fn(g.clone(), 0.0, a));
            let err = g
                .inside_nodes()
                .filter(|&k| {
                    let p = g.node_point(k);
                    p.x.abs() > 0.2 && p.y.abs() > 0.2
                })
                .map(|k| il.values[k].abs())
                .fold(0.0, f64::max);
            assert!(err < 2.0 * h.powf(2.0 / 3.0), "h={h} err={err}");
            assert!(err < prev);
            prev = err;
        }
    }

    #[test]
    fn eikonal_defect_of_rasterized_distance() {
        for dom in [ConvexDomain::<f64>::unit_disc(), ConvexDomain::square(0.0, 0.0, 1.0).unwrap()] {
            let mut cs = Vec::new();
            for n in [32.0, 64.0, 128.0] {
                let h = 1.0 / n;
                let g = grid(&dom, h);
                let f = ScalarField::distance(&dom, g.clone());
                let gr = gradient(&f);
                let cut = dom.cut_locus(h / 4.0).unwrap().samples(h / 4.0);
                // At a cone apex the defect is O(h^2 / r^2), so a fixed radius is excluded there.
                let apex = if dom.kind_name() == "disc" { 0.1 } else { 2.0 * h };
                let defect = g
                    .inside_nodes()
                    .filter(|&k| {
                        let p = g.node_point(k);
                        dom.distance(p).unwrap() > 2.0 * h && cut.iter().all(|c| c.dist(p) > apex)
                    })
                    .map(|k| (gr.components[k].norm() - 1.0).abs())
                    .fold(0.0, f64::max);
                cs.push(defect / h);
            }
            // Measured constant stays bounded under refinement.
            assert!(cs.iter().all(|&c| c < 4.0), "{}: C = {cs:?}", dom.kind_name());
            assert!(cs[2] <= 1.5 * cs[0] + 1e-12, "{}: C = {cs:?}", dom.kind_name());
        }
    }
}
