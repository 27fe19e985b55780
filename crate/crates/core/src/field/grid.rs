use crate::geometry::ConvexDomain;
use crate::{Error, Point2, Result, Scalar};

/// Classification of a lattice node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// Strictly inside, all four neighbours inside.
    Interior,
    /// Strictly inside with at least one exterior 4-neighbour.
    BoundaryAdjacent,
    Exterior,
}

impl NodeKind {
    /// Interior or boundary-adjacent.
    #[inline]
    pub fn inside(self) -> bool {
        !matches!(self, NodeKind::Exterior)
    }
}

/// Uniform lattice `origin + (i h, j h)` with a node classification.
///
/// Node `(i, j)` has linear index `j * nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    pub origin: Point2<T>,
    pub h: T,
    pub nx: usize,
    pub ny: usize,
    pub mask: Vec<NodeKind>,
}

/// Exterior lattice layers added around the bounding box.
pub const MARGIN: usize = 2;

impl<T: Scalar> Grid<T> {
    /// Lattice with a caller-supplied membership test.
    pub fn from_predicate(origin: Point2<T>, h: T, nx: usize, ny: usize, inside: impl Fn(Point2<T>) -> bool) -> Self {
        let mut raw = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let p = Point2::new(origin.x + T::from_usize_lossy(i) * h, origin.y + T::from_usize_lossy(j) * h);
                raw[j * nx + i] = inside(p);
            }
        }
        let mut mask = vec![NodeKind::Exterior; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                if !raw[j * nx + i] {
                    continue;
                }
                let edge = i == 0 || j == 0 || i + 1 == nx || j + 1 == ny;
                let touches = edge
                    || !raw[j * nx + i - 1]
                    || !raw[j * nx + i + 1]
                    || !raw[(j - 1) * nx + i]
                    || !raw[(j + 1) * nx + i];
                mask[j * nx + i] = if touches { NodeKind::BoundaryAdjacent } else { NodeKind::Interior };
            }
        }
        Self { origin, h, nx, ny, mask }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> Point2<T> {
        Point2::new(self.origin.x + T::from_usize_lossy(i) * self.h, self.origin.y + T::from_usize_lossy(j) * self.h)
    }

    #[inline]
    pub fn node_point(&self, k: usize) -> Point2<T> {
        let (i, j) = self.ij(k);
        self.point(i, j)
    }

    #[inline]
    pub fn inside(&self, k: usize) -> bool {
        self.mask[k].inside()
    }

    /// Number of nodes inside the domain (interior plus boundary-adjacent).
    pub fn interior_count(&self) -> usize {
        self.mask.iter().filter(|m| m.inside()).count()
    }

    /// Indices of nodes inside the domain, in storage order.
    pub fn inside_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| self.inside(k))
    }

    /// Top-right corner of the lattice hull.
    pub fn far_corner(&self) -> Point2<T> {
        self.point(self.nx - 1, self.ny - 1)
    }

    /// `true` if `p` lies in the closed lattice rectangle.
    pub fn in_hull(&self, p: Point2<T>) -> bool {
        let q = self.far_corner();
        p.x >= self.origin.x && p.y >= self.origin.y && p.x <= q.x && p.y <= q.y
    }

    /// Nearest lattice node to `p`, clamped to the lattice.
    pub fn nearest(&self, p: Point2<T>) -> (usize, usize) {
        let fi = ((p.x - self.origin.x) / self.h).round().max(T::zero());
        let fj = ((p.y - self.origin.y) / self.h).round().max(T::zero());
        let i = fi.to_usize().unwrap_or(0).min(self.nx - 1);
        let j = fj.to_usize().unwrap_or(0).min(self.ny - 1);
        (i, j)
    }

    /// Inside nodes with a 4-neighbour outside `set` (restricted to `set`).
    pub fn mask_boundary(&self, set: &[bool]) -> Vec<bool> {
        let mut out = vec![false; self.len()];
        for j in 0..self.ny {
            for i in 0..self.nx {
                let k = self.idx(i, j);
                if !set[k] {
                    continue;
                }
                let edge = i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny;
                out[k] = edge || !set[k - 1] || !set[k + 1] || !set[k - self.nx] || !set[k + self.nx];
            }
        }
        out
    }
}

/// Lattice covering the bounding box of `dom` plus [`MARGIN`] exterior layers.
///
/// Nodes are aligned with the bounding-box corner. Fails when `h` exceeds
/// half the inradius or leaves no node inside.
pub fn rasterize<T: Scalar>(dom: &ConvexDomain<T>, h: T) -> Result<Grid<T>> {
    if !(h > T::zero()) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("grid spacing must be positive, got {h}")));
    }
    let limit = dom.inradius() / T::lit(2.0);
    if h > limit * (T::one() + T::lit(1e-9)) {
        return Err(Error::GridTooCoarse { h: h.to_f64_lossy(), limit: limit.to_f64_lossy() });
    }
    let b = dom.bounding_box();
    let m = T::from_usize_lossy(MARGIN);
    let origin = Point2::new(b.min.x - m * h, b.min.y - m * h);
    let count = |len: T| (len / h - T::lit(1e-9)).ceil().to_usize().unwrap_or(0) + 1 + 2 * MARGIN;
    let grid = Grid::from_predicate(origin, h, count(b.width()), count(b.height()), |p| dom.contains_strictly(p));
    if grid.interior_count() == 0 {
        return Err(Error::GridTooCoarse { h: h.to_f64_lossy(), limit: limit.to_f64_lossy() });
    }
    Ok(grid)
}
