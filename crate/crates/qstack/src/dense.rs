//! Small dense complex matrices: the oracle side of the crate.
//!
//! The closed-form spectrum and the frozen phase conventions are verified
//! against plain dense linear algebra — matrix products, power iteration for
//! spectral norms, and a Hessenberg + shifted-QR eigensolver. Nothing here is
//! on the primary computational path; everything is guarded by size limits.

use num_complex::Complex64;

use crate::error::{Error, Result};

type C64 = Complex64;

/// Row-major `n × n` complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    n: usize,
    a: Vec<C64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat { n, a: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n);
        for i in 0..n {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.a[r * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.a[r * self.n + c] = v;
    }

    #[inline]
    pub fn add_to(&mut self, r: usize, c: usize, v: C64) {
        self.a[r * self.n + c] += v;
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.a[i * n + j] += aik * other.a[k * n + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMat {
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (x, y) in out.a.iter_mut().zip(&other.a) {
            *x -= y;
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.n);
        let n = self.n;
        let mut out = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                acc += self.a[i * n + j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖A*A − I‖_F`, zero for unitary `A`.
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint().mul(self).sub(&CMat::identity(self.n)).frobenius()
    }

    /// Largest singular value by power iteration on `A*A`; deterministic
    /// start, relative tolerance 1e−12, iteration cap 10⁴.
    pub fn spectral_norm(&self) -> f64 {
        let n = self.n;
        if n == 0 {
            return 0.0;
        }
        // Fixed pseudo-random start to avoid pathological orthogonality.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut v: Vec<C64> = (0..n)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let re = ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let im = ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
                C64::new(re, im)
            })
            .collect();
        let norm = |v: &[C64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let nv = norm(&v);
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|c| *c /= nv);
        let at = self.adjoint();
        let mut sigma2 = 0.0f64;
        for _ in 0..10_000 {
            let w = self.apply(&v);
            let new_sigma2 = w.iter().map(|c| c.norm_sqr()).sum::<f64>();
            let mut z = at.apply(&w);
            let nz = norm(&z);
            if nz == 0.0 {
                return 0.0;
            }
            z.iter_mut().for_each(|c| *c /= nz);
            v = z;
            if (new_sigma2 - sigma2).abs() <= 1e-12 * new_sigma2.max(1e-300) {
                sigma2 = new_sigma2;
                break;
            }
            sigma2 = new_sigma2;
        }
        sigma2.sqrt()
    }

    /// All eigenvalues via Householder Hessenberg reduction followed by
    /// shifted QR with deflation. Intended for the oracle sizes (`n ≤ 512`).
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        let n = self.n;
        if n == 0 {
            return Ok(Vec::new());
        }
        if n == 1 {
            return Ok(vec![self.get(0, 0)]);
        }
        let mut h = self.clone();
        h.hessenberg();
        h.qr_eigenvalues()
    }

    fn hessenberg(&mut self) {
        let n = self.n;
        for k in 0..n.saturating_sub(2) {
            // Reflector zeroing column k below the subdiagonal.
            let mut u: Vec<C64> = (k + 1..n).map(|i| self.get(i, k)).collect();
            let norm_x = u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm_x == 0.0 {
                continue;
            }
            let tail: f64 = u[1..].iter().map(|c| c.norm_sqr()).sum();
            if tail == 0.0 {
                continue;
            }
            let x0 = u[0];
            let phase = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
            let alpha = -phase * norm_x;
            u[0] -= alpha;
            let uu: f64 = u.iter().map(|c| c.norm_sqr()).sum();
            if uu == 0.0 {
                continue;
            }
            let tau = 2.0 / uu;
            // A <- H A, rows k+1..n.
            for j in 0..n {
                let mut dot = C64::new(0.0, 0.0);
                for (idx, ui) in u.iter().enumerate() {
                    dot += ui.conj() * self.get(k + 1 + idx, j);
                }
                dot *= tau;
                for (idx, ui) in u.iter().enumerate() {
                    let v = self.get(k + 1 + idx, j) - ui * dot;
                    self.set(k + 1 + idx, j, v);
                }
            }
            // A <- A H, cols k+1..n.
            for i in 0..n {
                let mut dot = C64::new(0.0, 0.0);
                for (idx, ui) in u.iter().enumerate() {
                    dot += self.get(i, k + 1 + idx) * ui;
                }
                dot *= tau;
                for (idx, ui) in u.iter().enumerate() {
                    let v = self.get(i, k + 1 + idx) - dot * ui.conj();
                    self.set(i, k + 1 + idx, v);
                }
            }
        }
    }

    fn qr_eigenvalues(mut self) -> Result<Vec<C64>> {
        let n = self.n;
        let eps = f64::EPSILON;
        let mut eigs = vec![C64::new(0.0, 0.0); n];
        let mut hi = n - 1;
        let mut iters_here = 0usize;
        let mut total_iters = 0usize;
        let cap = 60 * n.max(10);
        loop {
            // Deflate tiny subdiagonals.
            for i in 1..=hi {
                let bound = eps * (self.get(i - 1, i - 1).norm() + self.get(i, i).norm() + 1e-300);
                if self.get(i, i - 1).norm() <= bound {
                    self.set(i, i - 1, C64::new(0.0, 0.0));
                }
            }
            // Peel converged 1x1 tails.
            while hi > 0 && self.get(hi, hi - 1).norm() == 0.0 {
                eigs[hi] = self.get(hi, hi);
                hi -= 1;
                iters_here = 0;
            }
            if hi == 0 {
                eigs[0] = self.get(0, 0);
                return Ok(eigs);
            }
            // Active block [lo..=hi]. Blocks of size 2 are not read off the
            // closed-form discriminant (it cancels badly for nearly
            // degenerate pairs); the exact-shift QR step below deflates them
            // in one or two sweeps and the diagonal is then accurate.
            let mut lo = hi;
            while lo > 0 && self.get(lo, lo - 1).norm() != 0.0 {
                lo -= 1;
            }

            total_iters += 1;
            iters_here += 1;
            if total_iters > cap {
                return Err(Error::Gluing("qr eigensolver did not converge".into()));
            }
            // Wilkinson shift from the trailing 2x2, with an occasional
            // exceptional shift to break symmetry stalls.
            let mu = if iters_here % 12 == 0 {
                self.get(hi, hi) + C64::new(self.get(hi, hi - 1).norm(), 0.0)
            } else {
                let (l1, l2) = eig2(
                    self.get(hi - 1, hi - 1),
                    self.get(hi - 1, hi),
                    self.get(hi, hi - 1),
                    self.get(hi, hi),
                );
                let d = self.get(hi, hi);
                if (l1 - d).norm() <= (l2 - d).norm() {
                    l1
                } else {
                    l2
                }
            };

            for d in lo..=hi {
                let v = self.get(d, d) - mu;
                self.set(d, d, v);
            }
            let mut rots = Vec::with_capacity(hi - lo);
            for i in lo..hi {
                let (c, s) = givens(self.get(i, i), self.get(i + 1, i));
                for j in i..=hi {
                    let x = self.get(i, j);
                    let y = self.get(i + 1, j);
                    self.set(i, j, c * x + s * y);
                    self.set(i + 1, j, -s.conj() * x + c * y);
                }
                rots.push((c, s));
            }
            for (i, (c, s)) in rots.iter().enumerate() {
                let i = lo + i;
                for r in lo..=hi {
                    let x = self.get(r, i);
                    let y = self.get(r, i + 1);
                    self.set(r, i, c * x + s.conj() * y);
                    self.set(r, i + 1, -s * x + c * y);
                }
            }
            for d in lo..=hi {
                let v = self.get(d, d) + mu;
                self.set(d, d, v);
            }
        }
    }
}

/// Complex Givens rotation `[[c, s], [−conj(s), c]]` (c real) sending
/// `(f, g)` to `(r, 0)`.
///
/// `f/|f|` on a denormal loses its unit modulus (repeated near-zero-shift
/// sweeps on cyclic blocks drive diagonal entries through underflow), so a
/// negligible `f` is treated as exactly zero and the computation is scaled.
fn givens(f: C64, g: C64) -> (f64, C64) {
    let gn = g.norm();
    if gn == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    let fn_ = f.norm();
    if fn_ <= gn * 1e-60 {
        // c would be below eps² anyway; the exact swap keeps unitarity.
        return (0.0, g.conj() / gn);
    }
    let scale = fn_.max(gn);
    let fs = f / scale;
    let gs = g / scale;
    let d = (fs.norm_sqr() + gs.norm_sqr()).sqrt() * scale;
    let c = fn_ / d;
    let s = (f / fn_) * (g.conj() / d);
    (c, s)
}

/// Eigenvalues of a complex 2×2 matrix.
fn eig2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let tr = a + d;
    let disc = ((a - d) * (a - d) + 4.0 * b * c).sqrt();
    ((tr + disc) / 2.0, (tr - disc) / 2.0)
}
