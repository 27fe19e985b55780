use std::fmt::Write as _;
use std::path::Path;

use crate::field::{Grid, ScalarField};
use crate::{Result, Scalar};

impl<T: Scalar> ScalarField<T> {
    /// CSV with header `i,j,x,y,value`, one row per node.
    pub fn to_csv(&self) -> String {
        let g = &self.grid;
        let mut s = String::from("i,j,x,y,value\n");
        for j in 0..g.ny {
            for i in 0..g.nx {
                let p = g.point(i, j);
                let _ = writeln!(s, "{i},{j},{},{},{}", p.x, p.y, self.at(i, j));
            }
        }
        s
    }

    /// 16-bit binary PGM, north up, linear min-max scaling; returns `(min, max)`.
    pub fn to_pgm(&self) -> (Vec<u8>, T, T) {
        let lo = self.values.iter().copied().fold(T::infinity(), T::min);
        let hi = self.values.iter().copied().fold(T::neg_infinity(), T::max);
        let span = if hi > lo { hi - lo } else { T::one() };
        let g = &self.grid;
        let mut out = format!("P5\n{} {}\n65535\n", g.nx, g.ny).into_bytes();
        for j in (0..g.ny).rev() {
            for i in 0..g.nx {
                let q = ((self.at(i, j) - lo) / span * T::lit(65535.0)).round().to_f64_lossy();
                let q = q.clamp(0.0, 65535.0) as u16;
                out.extend_from_slice(&q.to_be_bytes());
            }
        }
        (out, lo, hi)
    }

    /// Writes `<stem>.pgm` and the sidecar `<stem>.pgm.scale` holding the scaling.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let (bytes, lo, hi) = self.to_pgm();
        std::fs::write(path, bytes)?;
        let mut side = path.as_os_str().to_owned();
        side.push(".scale");
        std::fs::write(side, format!("min={lo}\nmax={hi}\nlevels=65535\n"))?;
        Ok(())
    }
}

/// 8-bit PGM of a node mask (255 = set), north up.
pub fn mask_pgm<T: Scalar>(grid: &Grid<T>, mask: &[bool]) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", grid.nx, grid.ny).into_bytes();
    for j in (0..grid.ny).rev() {
        for i in 0..grid.nx {
            out.push(if mask[grid.idx(i, j)] { 255 } else { 0 });
        }
    }
    out
}
