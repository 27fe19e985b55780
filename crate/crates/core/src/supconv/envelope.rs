use crate::Scalar;

/// Work buffers for [`upper_envelope`].
pub(crate) struct Envelope<T> {
    v: Vec<usize>,
    z: Vec<T>,
}

impl<T: Scalar> Envelope<T> {
    pub(crate) fn new(n: usize) -> Self {
        Self { v: vec![0; n], z: vec![T::zero(); n + 1] }
    }

    /// `out[x] = max_q f[q] - c (x - q)^2` over sites with `f[q] > -inf`, in
    /// linear time. Sites whose value is `-inf` are skipped; an empty site set
    /// gives `-inf` everywhere.
    pub(crate) fn upper(&mut self, f: &[T], c: T, out: &mut [T]) {
        let n = f.len();
        let key = |q: usize| {
            let x = T::from_usize_lossy(q);
            -f[q] + c * x * x
        };
        let mut k = 0usize;
        let mut started = false;
        for q in 0..n {
            if f[q] == T::neg_infinity() {
                continue;
            }
            if !started {
                self.v[0] = q;
                self.z[0] = T::neg_infinity();
                self.z[1] = T::infinity();
                started = true;
                continue;
            }
            let mut s;
            loop {
                let p = self.v[k];
                s = (key(q) - key(p)) / (T::lit(2.0) * c * T::from_usize_lossy(q - p));
                if s <= self.z[k] && k > 0 {
                    k -= 1;
                } else {
                    break;
                }
            }
            if s <= self.z[k] {
                // Only the first parabola remained and it is dominated everywhere.
                self.v[0] = q;
                continue;
            }
            k += 1;
            self.v[k] = q;
            self.z[k] = s;
            self.z[k + 1] = T::infinity();
        }
        if !started {
            out.iter_mut().for_each(|o| *o = T::neg_infinity());
            return;
        }
        let eval = |q: usize, x: usize| {
            let d = T::from_usize_lossy(x.abs_diff(q));
            f[q] - c * d * d
        };
        let mut j = 0usize;
        for (x, o) in out.iter_mut().enumerate() {
            let xf = T::from_usize_lossy(x);
            while self.z[j + 1] < xf {
                j += 1;
            }
            // Neighbouring parabolas guard against rounding at breakpoints.
            let mut best = eval(self.v[j], x);
            if j > 0 {
                best = best.max(eval(self.v[j - 1], x));
            }
            if j < k {
                best = best.max(eval(self.v[j + 1], x));
            }
            if f[x] > best {
                best = f[x];
            }
            *o = best;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_brute_force_1d() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..200 {
            let n = rng.gen_range(1..40);
            let c: f64 = rng.gen_range(0.01..5.0);
            let f: Vec<f64> = (0..n)
                .map(|_| if trial % 3 == 0 && rng.gen_bool(0.3) { f64::NEG_INFINITY } else { rng.gen_range(-2.0..2.0) })
                .collect();
            let mut out = vec![0.0; n];
            Envelope::new(n).upper(&f, c, &mut out);
            for x in 0..n {
                let b = (0..n).map(|q| f[q] - c * ((x as f64) - q as f64).powi(2)).fold(f64::NEG_INFINITY, f64::max);
                assert!(out[x] == b || (out[x] - b).abs() < 1e-12, "trial {trial}: {} vs {b}", out[x]);
            }
        }
    }
}
