use crate::field::Grid;
use crate::Scalar;

/// Discrete p-Dirichlet energy and its rooted Rayleigh quotient.
///
/// Each lattice cell contributes the average of its two P1 triangulations:
/// the four corner gradients built from the cell's edge differences, each
/// weighted `h^2 / 4`. At `p = 2` this is the 5-point Laplacian.
///
/// Values are returned as `ln Lambda_p` with
/// `Lambda_p^p = sum |grad u|^p h^2 / sum |u|^p h^2`, evaluated with the largest
/// gradient and the largest value factored out so that `p = 64` stays finite.
pub struct PEnergy<'a, T> {
    grid: &'a Grid<T>,
    p: T,
    p_int: Option<i32>,
    /// Lower-left node of every cell with at least one inside corner.
    cells: Vec<usize>,
}

/// Edge differences of a cell: bottom, top, left, right.
#[inline]
fn edges<T: Scalar>(u: &[T], k: usize, nx: usize, inv_h: T) -> [T; 4] {
    let (u00, u10, u01, u11) = (u[k], u[k + 1], u[k + nx], u[k + nx + 1]);
    [(u10 - u00) * inv_h, (u11 - u01) * inv_h, (u01 - u00) * inv_h, (u11 - u10) * inv_h]
}

impl<'a, T: Scalar> PEnergy<'a, T> {
    pub fn new(grid: &'a Grid<T>, p: T) -> Self {
        let nx = grid.nx;
        let mut cells = Vec::new();
        for j in 0..grid.ny - 1 {
            for i in 0..nx - 1 {
                let k = j * nx + i;
                if grid.inside(k) || grid.inside(k + 1) || grid.inside(k + nx) || grid.inside(k + nx + 1) {
                    cells.push(k);
                }
            }
        }
        let r = p.round();
        let p_int = if (p - r).abs() < T::lit(1e-12) { r.to_i32() } else { None };
        Self { grid, p, p_int, cells }
    }

    pub fn p(&self) -> T {
        self.p
    }

    /// `x^e` for `x` in `[0, 1]` and `e = p - shift`.
    #[inline]
    fn pw(&self, x: T, shift: i32) -> T {
        match self.p_int {
            Some(n) => x.powi(n - shift),
            None => x.powf(self.p - T::from_i32(shift).expect("small")),
        }
    }

    fn max_grad(&self, u: &[T]) -> T {
        let inv_h = T::one() / self.grid.h;
        let mut g2 = T::zero();
        for &k in &self.cells {
            let [a, b, c, d] = edges(u, k, self.grid.nx, inv_h);
            let (a2, b2, c2, d2) = (a * a, b * b, c * c, d * d);
            g2 = g2.max((a2 + c2).max(a2 + d2).max((b2 + c2).max(b2 + d2)));
        }
        g2.sqrt()
    }

    fn max_abs(&self, u: &[T]) -> T {
        self.grid.inside_nodes().map(|k| u[k].abs()).fold(T::zero(), T::max)
    }

    /// `(ln G + ln(N~)/p, ln U + ln(D~)/p)` where `N = G^p N~`, `D = U^p D~`.
    fn log_parts(&self, u: &[T]) -> Option<(T, T, T, T, T, T)> {
        let h2 = self.grid.h * self.grid.h;
        let gmax = self.max_grad(u);
        let umax = self.max_abs(u);
        if !(gmax > T::zero()) || !(umax > T::zero()) {
            return None;
        }
        let inv_h = T::one() / self.grid.h;
        let quarter = h2 / T::lit(4.0);
        let inv_g2 = T::one() / (gmax * gmax);
        let mut n = T::zero();
        for &k in &self.cells {
            let [a, b, c, d] = edges(u, k, self.grid.nx, inv_h);
            let (a2, b2, c2, d2) = (a * a * inv_g2, b * b * inv_g2, c * c * inv_g2, d * d * inv_g2);
            n += quarter * (self.half_pw(a2 + c2) + self.half_pw(a2 + d2) + self.half_pw(b2 + c2) + self.half_pw(b2 + d2));
        }
        let inv_u = T::one() / umax;
        let mut dd = T::zero();
        for k in self.grid.inside_nodes() {
            dd += h2 * self.pw((u[k] * inv_u).abs(), 0);
        }
        Some((gmax, n, umax, dd, quarter, inv_g2))
    }

    /// `s^(p/2)` for a squared ratio `s` in `[0, 1]`.
    #[inline]
    fn half_pw(&self, s: T) -> T {
        match self.p_int {
            Some(n) if n % 2 == 0 => s.powi(n / 2),
            _ => s.powf(self.p / T::lit(2.0)),
        }
    }

    /// `ln Lambda_p(u)`, or `None` for a constant or zero field.
    pub fn log_lambda(&self, u: &[T]) -> Option<T> {
        let (g, n, um, dd, _, _) = self.log_parts(u)?;
        Some(g.ln() - um.ln() + (n.ln() - dd.ln()) / self.p)
    }

    /// `ln Lambda_p(u)` and its gradient with respect to inside node values.
    pub fn log_lambda_grad(&self, u: &[T], grad: &mut [T]) -> Option<T> {
        let (gmax, n, umax, dd, quarter, inv_g2) = self.log_parts(u)?;
        let nx = self.grid.nx;
        let inv_h = T::one() / self.grid.h;
        for v in grad.iter_mut() {
            *v = T::zero();
        }
        // d/du (1/p) ln N = sum_corners q g . dg/du with q = (h^2/4) (|g|/G)^(p-2) / (G^2 N~).
        let scale = quarter * inv_g2 / n;
        for &k in &self.cells {
            let [a, b, c, d] = edges(u, k, nx, inv_h);
            let (a2, b2, c2, d2) = (a * a * inv_g2, b * b * inv_g2, c * c * inv_g2, d * d * inv_g2);
            let q1 = scale * self.half_pw_m2(a2 + c2);
            let q2 = scale * self.half_pw_m2(a2 + d2);
            let q3 = scale * self.half_pw_m2(b2 + c2);
            let q4 = scale * self.half_pw_m2(b2 + d2);
            let ca = (q1 + q2) * a * inv_h;
            let cb = (q3 + q4) * b * inv_h;
            let cc = (q1 + q3) * c * inv_h;
            let cd = (q2 + q4) * d * inv_h;
            grad[k] -= ca + cc;
            grad[k + 1] += ca - cd;
            grad[k + nx] += cc - cb;
            grad[k + nx + 1] += cb + cd;
        }
        let h2 = self.grid.h * self.grid.h;
        let inv_u = T::one() / umax;
        let dscale = h2 * inv_u * inv_u / dd;
        for k in 0..grad.len() {
            if self.grid.inside(k) {
                let r = u[k] * inv_u;
                grad[k] -= dscale * self.pw(r.abs(), 2) * u[k];
            } else {
                grad[k] = T::zero();
            }
        }
        Some(gmax.ln() - umax.ln() + (n.ln() - dd.ln()) / self.p)
    }

    /// `s^((p-2)/2)` for a squared ratio `s`.
    #[inline]
    fn half_pw_m2(&self, s: T) -> T {
        match self.p_int {
            Some(n) if n % 2 == 0 => s.powi(n / 2 - 1),
            _ => s.powf((self.p - T::lit(2.0)) / T::lit(2.0)),
        }
    }

    /// Factor `s` with `sum |u/s|^p h^2 = 1`.
    pub fn lp_norm(&self, u: &[T]) -> T {
        let h2 = self.grid.h * self.grid.h;
        let umax = self.max_abs(u);
        if !(umax > T::zero()) {
            return T::zero();
        }
        let inv_u = T::one() / umax;
        let dd: T = self.grid.inside_nodes().map(|k| h2 * self.pw((u[k] * inv_u).abs(), 0)).sum();
        umax * dd.powf(T::one() / self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rasterize;
    use crate::geometry::ConvexDomain;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (Grid<f64>, Vec<f64>) {
        let dom = ConvexDomain::square(0.0, 0.0, 1.0).unwrap();
        let g = rasterize(&dom, 1.0 / 16.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = (0..g.len()).map(|k| if g.inside(k) { rng.gen_range(0.1..1.0) } else { 0.0 }).collect();
        (g, u)
    }

    /// Direct (unscaled) evaluation of the quotient.
    fn naive(g: &Grid<f64>, u: &[f64], p: f64) -> f64 {
        let h = g.h;
        let mut n = 0.0;
        for j in 0..g.ny - 1 {
            for i in 0..g.nx - 1 {
                let k = g.idx(i, j);
                let (u00, u10, u01, u11) = (u[k], u[k + 1], u[k + g.nx], u[k + g.nx + 1]);
                let (a, b, c, d) = ((u10 - u00) / h, (u11 - u01) / h, (u01 - u00) / h, (u11 - u10) / h);
                for (x, y) in [(a, c), (a, d), (b, c), (b, d)] {
                    n += h * h / 4.0 * (x * x + y * y).powf(p / 2.0);
                }
            }
        }
        let d: f64 = g.inside_nodes().map(|k| h * h * u[k].abs().powf(p)).sum();
        (n / d).powf(1.0 / p)
    }

    #[test]
    fn matches_naive_quotient() {
        let (g, u) = setup();
        for p in [2.0, 3.5, 8.0] {
            let e = PEnergy::new(&g, p);
            let l = e.log_lambda(&u).unwrap().exp();
            assert!((l - naive(&g, &u, p)).abs() < 1e-10 * l);
        }
    }

    #[test]
    fn p_two_is_five_point_laplacian() {
        let (g, u) = setup();
        let h = g.h;
        let mut num = 0.0;
        for j in 0..g.ny - 1 {
            for i in 0..g.nx - 1 {
                let k = g.idx(i, j);
                num += (u[k + 1] - u[k]).powi(2) + (u[k + g.nx] - u[k]).powi(2);
            }
        }
        let den: f64 = g.inside_nodes().map(|k| h * h * u[k] * u[k]).sum();
        let l = PEnergy::new(&g, 2.0).log_lambda(&u).unwrap().exp();
        assert!((l * l - num / den).abs() < 1e-9 * l * l);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (g, u) = setup();
        for p in [2.0, 5.0, 16.0] {
            let e = PEnergy::new(&g, p);
            let mut grad = vec![0.0; g.len()];
            e.log_lambda_grad(&u, &mut grad).unwrap();
            for k in g.inside_nodes().step_by(7) {
                let mut up = u.clone();
                let mut dn = u.clone();
                let s = 1e-6;
                up[k] += s;
                dn[k] -= s;
                let fd = (e.log_lambda(&up).unwrap() - e.log_lambda(&dn).unwrap()) / (2.0 * s);
                assert!((fd - grad[k]).abs() < 1e-6 * (1.0 + fd.abs()), "p={p} k={k}: {fd} vs {}", grad[k]);
            }
        }
    }

    #[test]
    fn large_p_stays_finite() {
        let (g, u) = setup();
        let big: Vec<f64> = u.iter().map(|v| v * 1e6).collect();
        let e = PEnergy::new(&g, 64.0);
        let a = e.log_lambda(&u).unwrap();
        let b = e.log_lambda(&big).unwrap();
        assert!(a.is_finite() && (a - b).abs() < 1e-10);
        assert!((e.lp_norm(&big) / e.lp_norm(&u) - 1e6).abs() < 1e-3);
    }
}
