//! Banded linear systems with partial pivoting, plus the cyclic variant used
//! for constant-coefficient operators on periodic grids.
//!
//! Storage follows the LAPACK band layout: entry `A(i, j)` lives at band row
//! `i - j + kl + ku` of column `j`, with `kl` extra leading rows of fill-in
//! workspace for row interchanges. Periodic stencils produce a banded core
//! plus corner entries; those are solved by factoring the core band and
//! applying a rank-`2w` Woodbury correction for the corners.

use crate::error::{Error, Result};

/// General banded matrix of dimension `n` with `kl` sub- and `ku`
/// superdiagonals.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// `(2*kl + ku + 1) x n`, row-major; rows `0..kl` are fill-in space.
    ab: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        assert!(kl < n && ku < n, "bandwidths must be smaller than n");
        BandedMatrix {
            n,
            kl,
            ku,
            ab: vec![0.0; (2 * kl + ku + 1) * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(self.in_band(i, j));
        (i + self.kl + self.ku - j) * self.n + j
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i + self.ku >= j && j + self.kl >= i
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.ab[self.idx(i, j)]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.ab[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.ab[k] += v;
    }

    /// Dense matrix-vector product, used in tests and residual checks.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let jlo = i.saturating_sub(self.kl);
            let jhi = (i + self.ku).min(self.n - 1);
            let mut acc = 0.0;
            for j in jlo..=jhi {
                acc += self.get(i, j) * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// Largest absolute row sum (infinity norm).
    pub fn norm_inf(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            let jlo = i.saturating_sub(self.kl);
            let jhi = (i + self.ku).min(self.n - 1);
            let s: f64 = (jlo..=jhi).map(|j| self.get(i, j).abs()).sum();
            m = m.max(s);
        }
        m
    }

    /// LU factorization with partial pivoting. Consumes the matrix; the
    /// factors reuse the band storage (fill-in goes into the workspace rows).
    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        // Pivot threshold relative to the matrix scale, per the singularity
        // contract: reject pivots below 1e-14 times the row scale.
        let scale = self.norm_inf();
        let threshold = 1e-14 * scale.max(f64::MIN_POSITIVE);
        let mut pivots = vec![0usize; n];
        let kv = kl + ku; // number of superdiagonals in U

        for k in 0..n {
            // Pivot search within the column: rows k..=k+kl.
            let rmax = (k + kl).min(n - 1);
            let mut p = k;
            let mut pmax = self.get_f(k, k, kv).abs();
            for i in (k + 1)..=rmax {
                let v = self.get_f(i, k, kv).abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if pmax <= threshold {
                return Err(Error::SingularMatrix {
                    column: k,
                    pivot: pmax,
                    threshold,
                });
            }
            pivots[k] = p;
            if p != k {
                // Swap rows p and k across the affected columns.
                let jhi = (k + kv).min(n - 1);
                for j in k..=jhi {
                    let a = self.get_f(k, j, kv);
                    let b = self.get_f(p, j, kv);
                    self.set_f(k, j, kv, b);
                    self.set_f(p, j, kv, a);
                }
            }
            let piv = self.get_f(k, k, kv);
            for i in (k + 1)..=rmax {
                let m = self.get_f(i, k, kv) / piv;
                self.set_f(i, k, kv, m);
                if m != 0.0 {
                    let jhi = (k + kv).min(n - 1);
                    for j in (k + 1)..=jhi {
                        let v = self.get_f(i, j, kv) - m * self.get_f(k, j, kv);
                        self.set_f(i, j, kv, v);
                    }
                }
            }
        }

        Ok(BandedLu {
            n,
            kl,
            kv,
            ab: self.ab,
            pivots,
        })
    }

    // Accessors against the widened factorization band (kv superdiagonals).
    #[inline]
    fn get_f(&self, i: usize, j: usize, kv: usize) -> f64 {
        if j > i + kv || i > j + self.kl {
            0.0
        } else {
            self.ab[(i + self.kl + self.ku - j) * self.n + j]
        }
    }

    #[inline]
    fn set_f(&mut self, i: usize, j: usize, _kv: usize, v: f64) {
        self.ab[(i + self.kl + self.ku - j) * self.n + j] = v;
    }
}

/// Factored banded system; solves many right-hand sides cheaply.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    kv: usize,
    ab: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn entry(&self, i: usize, j: usize) -> f64 {
        self.ab[(i + self.kl + (self.kv - self.kl) - j) * self.n + j]
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x = b.to_vec();
        // Forward: apply permutations and L.
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let rmax = (k + self.kl).min(n - 1);
            let xk = x[k];
            if xk != 0.0 {
                for i in (k + 1)..=rmax {
                    x[i] -= self.entry(i, k) * xk;
                }
            }
        }
        // Backward: solve U x = y.
        for k in (0..n).rev() {
            let jhi = (k + self.kv).min(n - 1);
            let mut acc = x[k];
            for j in (k + 1)..=jhi {
                acc -= self.entry(k, j) * x[j];
            }
            x[k] = acc / self.entry(k, k);
        }
        x
    }
}

/// Factor-and-solve in one call: returns `x` with `A x = b`.
pub fn solve_banded(a: &BandedMatrix, b: &[f64]) -> Result<Vec<f64>> {
    Ok(a.clone().factor()?.solve(b))
}

/// Circulant stencil matrix on a periodic grid: row `i` applies
/// `coeffs[w + o]` to column `(i + o) mod n` for offsets `o in -w..=w`.
#[derive(Debug, Clone)]
pub struct CyclicMatrix {
    n: usize,
    w: usize,
    coeffs: Vec<f64>,
}

impl CyclicMatrix {
    pub fn new(n: usize, coeffs: Vec<f64>) -> Self {
        assert!(coeffs.len() % 2 == 1, "stencil length must be odd");
        let w = coeffs.len() / 2;
        assert!(2 * w < n, "stencil wider than the grid");
        CyclicMatrix { n, w, coeffs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let n = self.n as isize;
        let w = self.w as isize;
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                for o in -w..=w {
                    let j = (i + o).rem_euclid(n) as usize;
                    acc += self.coeffs[(o + w) as usize] * x[j];
                }
                acc
            })
            .collect()
    }

    /// Factors via the banded core plus a rank-`2w` Woodbury correction for
    /// the wrap-around corners.
    pub fn factor(&self) -> Result<CyclicLu> {
        let n = self.n;
        let w = self.w;
        let mut band = BandedMatrix::zeros(n, w, w);
        for i in 0..n {
            for o in -(w as isize)..=(w as isize) {
                let j = i as isize + o;
                if j >= 0 && (j as usize) < n {
                    band.set(i, j as usize, self.coeffs[(o + w as isize) as usize]);
                }
            }
        }
        // Corner entries, attached to the first w and last w rows.
        let mut rows: Vec<usize> = Vec::with_capacity(2 * w);
        let mut corrections: Vec<Vec<(usize, f64)>> = Vec::with_capacity(2 * w);
        for i in 0..w {
            let mut entries = Vec::new();
            for o in -(w as isize)..=-1 {
                let j = i as isize + o;
                if j < 0 {
                    entries.push(((j + n as isize) as usize, self.coeffs[(o + w as isize) as usize]));
                }
            }
            rows.push(i);
            corrections.push(entries);
        }
        for i in (n - w)..n {
            let mut entries = Vec::new();
            for o in 1..=(w as isize) {
                let j = i as isize + o;
                if j >= n as isize {
                    entries.push(((j - n as isize) as usize, self.coeffs[(o + w as isize) as usize]));
                }
            }
            rows.push(i);
            corrections.push(entries);
        }

        let lu = band.factor()?;
        let r = rows.len();
        // Z = A_band^{-1} U where U's columns are unit vectors e_{rows[c]}.
        let mut z = Vec::with_capacity(r);
        for &row in &rows {
            let mut e = vec![0.0; n];
            e[row] = 1.0;
            z.push(lu.solve(&e));
        }
        // Capacitance C = I + V^T Z, with V^T rows holding the corner values.
        let mut cap = vec![0.0; r * r];
        for (ci, corr) in corrections.iter().enumerate() {
            for cj in 0..r {
                let mut acc = if ci == cj { 1.0 } else { 0.0 };
                for &(col, v) in corr {
                    acc += v * z[cj][col];
                }
                cap[ci * r + cj] = acc;
            }
        }
        let cap_lu = DenseLu::factor(cap, r)?;
        Ok(CyclicLu {
            lu,
            rows,
            corrections,
            z,
            cap_lu,
        })
    }
}

/// Factored cyclic system.
#[derive(Debug, Clone)]
pub struct CyclicLu {
    lu: BandedLu,
    rows: Vec<usize>,
    corrections: Vec<Vec<(usize, f64)>>,
    z: Vec<Vec<f64>>,
    cap_lu: DenseLu,
}

impl CyclicLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y = self.lu.solve(b);
        let r = self.rows.len();
        if r == 0 {
            return y;
        }
        let mut vty = vec![0.0; r];
        for (ci, corr) in self.corrections.iter().enumerate() {
            vty[ci] = corr.iter().map(|&(col, v)| v * y[col]).sum();
        }
        let s = self.cap_lu.solve(&vty);
        for (c, zc) in self.z.iter().enumerate() {
            let sc = s[c];
            if sc != 0.0 {
                for (yi, zi) in y.iter_mut().zip(zc) {
                    *yi -= sc * zi;
                }
            }
        }
        y
    }
}

/// Small dense LU with partial pivoting for the Woodbury capacitance block.
#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    a: Vec<f64>,
    pivots: Vec<usize>,
}

impl DenseLu {
    pub fn factor(mut a: Vec<f64>, n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let threshold = 1e-14 * scale.max(f64::MIN_POSITIVE);
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let mut p = k;
            let mut pmax = a[k * n + k].abs();
            for i in (k + 1)..n {
                if a[i * n + k].abs() > pmax {
                    pmax = a[i * n + k].abs();
                    p = i;
                }
            }
            if pmax <= threshold {
                return Err(Error::SingularMatrix {
                    column: k,
                    pivot: pmax,
                    threshold,
                });
            }
            pivots[k] = p;
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
            }
            let piv = a[k * n + k];
            for i in (k + 1)..n {
                let m = a[i * n + k] / piv;
                a[i * n + k] = m;
                for j in (k + 1)..n {
                    a[i * n + j] -= m * a[k * n + j];
                }
            }
        }
        Ok(DenseLu { n, a, pivots })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        // The factorization swapped whole rows (multipliers included), so the
        // permutation is applied before the triangular solves.
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
        }
        for k in 0..n {
            for i in (k + 1)..n {
                x[i] -= self.a[i * n + k] * x[k];
            }
        }
        for k in (0..n).rev() {
            let mut acc = x[k];
            for j in (k + 1)..n {
                acc -= self.a[k * n + j] * x[j];
            }
            x[k] = acc / self.a[k * n + k];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn identity(n: usize) -> BandedMatrix {
        let mut a = BandedMatrix::zeros(n, 0, 0);
        for i in 0..n {
            a.set(i, i, 1.0);
        }
        a
    }

    #[test]
    fn identity_returns_rhs() {
        let b = vec![3.0, -1.0, 2.5, 0.0, 7.0];
        let x = solve_banded(&identity(5), &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn dirichlet_laplacian_poisson_is_exact_on_quadratic() {
        // -u'' = 1 on (0,1), u(0)=u(1)=0 has u = x(1-x)/2; the 3-point
        // stencil is exact on quadratics, so the discrete solution matches
        // the continuum one at the nodes.
        let n = 33;
        let dx = 1.0 / (n as f64 + 1.0);
        let mut a = BandedMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.set(i, i, 2.0 / (dx * dx));
            if i > 0 {
                a.set(i, i - 1, -1.0 / (dx * dx));
            }
            if i + 1 < n {
                a.set(i, i + 1, -1.0 / (dx * dx));
            }
        }
        let b = vec![1.0; n];
        let x = solve_banded(&a, &b).unwrap();
        for (i, xi) in x.iter().enumerate() {
            let node = (i as f64 + 1.0) * dx;
            assert!((xi - node * (1.0 - node) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_row_reports_singular() {
        let mut a = BandedMatrix::zeros(5, 1, 1);
        for i in 0..5 {
            if i != 2 {
                a.set(i, i, 1.0);
            }
        }
        match solve_banded(&a, &[1.0; 5]) {
            Err(Error::SingularMatrix { .. }) => {}
            other => panic!("expected singular-matrix error, got {other:?}"),
        }
    }

    #[test]
    fn pivoting_handles_small_leading_pivot() {
        // Leading diagonal entry tiny but matrix well-conditioned.
        let mut a = BandedMatrix::zeros(4, 1, 1);
        a.set(0, 0, 1e-30);
        a.set(0, 1, 1.0);
        a.set(1, 0, 1.0);
        a.set(1, 1, 1.0);
        a.set(1, 2, 1.0);
        a.set(2, 1, 1.0);
        a.set(2, 2, -1.0);
        a.set(2, 3, 2.0);
        a.set(3, 2, 1.0);
        a.set(3, 3, 1.0);
        let b = vec![1.0, 2.0, 0.5, -1.0];
        let x = solve_banded(&a, &b).unwrap();
        let r = a.matvec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() < 1e-10);
        }
    }

    #[test]
    fn cyclic_matches_matvec_roundtrip() {
        let n = 37;
        let c = CyclicMatrix::new(n, vec![-0.4, 1.0, 3.2, 1.1, -0.3]);
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b = c.matvec(&x);
        let xs = c.factor().unwrap().solve(&b);
        for (a, b) in x.iter().zip(&xs) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn dense_lu_with_pivoting_on_random_matrix() {
        let n = 8;
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let a: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| a[i * n + j] * u[j]).sum())
            .collect();
        let x = DenseLu::factor(a.clone(), n).unwrap().solve(&b);
        for (xi, ui) in x.iter().zip(&u) {
            assert!((xi - ui).abs() < 1e-12);
        }
    }

    #[test]
    fn cyclic_stiff_indefinite_pentadiagonal() {
        // Shifted fourth-difference operator: large off-diagonal entries and
        // an indefinite spectrum, exercising the pivoted Woodbury path.
        let n = 24;
        let dx = 1.0 / n as f64;
        let inv4 = 1.0 / (dx * dx * dx * dx);
        let alpha = 3e-3;
        let c = CyclicMatrix::new(
            n,
            vec![
                -alpha * inv4,
                4.0 * alpha * inv4,
                1.0 - alpha * 6.0 * inv4,
                4.0 * alpha * inv4,
                -alpha * inv4,
            ],
        );
        let u: Vec<f64> = (0..n).map(|j| (j as f64 * 0.3).sin()).collect();
        let b = c.matvec(&u);
        let x = c.factor().unwrap().solve(&b);
        for (xi, ui) in x.iter().zip(&u) {
            assert!((xi - ui).abs() < 1e-9, "{xi} vs {ui}");
        }
    }

    #[test]
    fn cyclic_pentadiagonal_against_dense() {
        let n = 12;
        let coeffs = vec![0.5, -2.0, 6.5, -2.0, 0.5];
        let c = CyclicMatrix::new(n, coeffs.clone());
        // Assemble dense and solve through the dense LU as a reference.
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            for o in -2isize..=2 {
                let j = (i as isize + o).rem_euclid(n as isize) as usize;
                dense[i * n + j] += coeffs[(o + 2) as usize];
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x_ref = DenseLu::factor(dense, n).unwrap().solve(&b);
        let x = c.factor().unwrap().solve(&b);
        for (a, r) in x.iter().zip(&x_ref) {
            assert!((a - r).abs() < 1e-11);
        }
    }

    proptest! {
        // Random well-conditioned (diagonally dominant) tridiagonal systems:
        // solve then multiply back, relative residual within 1e-10.
        #[test]
        fn solve_then_apply_is_identity(seed in 0u64..500, n in 4usize..1000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let mut a = BandedMatrix::zeros(n, 1, 1);
            for i in 0..n {
                let lo = if i > 0 { rng.random_range(-1.0..1.0) } else { 0.0 };
                let up = if i + 1 < n { rng.random_range(-1.0..1.0) } else { 0.0 };
                let d = 2.5 + rng.random_range(0.0..1.0);
                if i > 0 { a.set(i, i - 1, lo); }
                if i + 1 < n { a.set(i, i + 1, up); }
                a.set(i, i, d * (1.0 + lo.abs() + up.abs()));
            }
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let x = solve_banded(&a, &b).unwrap();
            let r = a.matvec(&x);
            let bnorm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (ri, bi) in r.iter().zip(&b) {
                prop_assert!((ri - bi).abs() <= 1e-10 * (1.0 + bnorm));
            }
        }
    }
}
