//! Sparse operators on the truncated Hilbert space and the Liouvillian
//! superoperators built from them.
//!
//! Density matrices are vectorised column-major: entry ρ[r, c] sits at
//! `c·d + r`, so vec(AρB) = (Bᵀ ⊗ A) vec(ρ).

use num_complex::Complex64;

/// Square sparse matrix in compressed-row form, duplicates summed.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub dim: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<Complex64>,
}

impl Csr {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            indptr: vec![0; dim + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|k| (k, k, Complex64::new(1.0, 0.0))).collect())
    }

    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside {dim}×{dim}");
            match merged.last_mut() {
                Some(last) if (last.0, last.1) == (r, c) => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|t| t.2 != Complex64::new(0.0, 0.0));
        let mut indptr = vec![0; dim + 1];
        for &(r, _, _) in &merged {
            indptr[r + 1] += 1;
        }
        for r in 0..dim {
            indptr[r + 1] += indptr[r];
        }
        Self {
            dim,
            indptr,
            indices: merged.iter().map(|t| t.1).collect(),
            values: merged.iter().map(|t| t.2).collect(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// (row, col, value) of every stored entry.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.values[k])))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let row = &self.indices[self.indptr[r]..self.indptr[r + 1]];
        match row.binary_search(&c) {
            Ok(k) => self.values[self.indptr[r] + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (r, c, v * s)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(self.dim, self.triplets().chain(other.triplets()).collect())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = Vec::new();
        for (r, k, a) in self.triplets() {
            for j in other.indptr[k]..other.indptr[k + 1] {
                out.push((r, other.indices[j], a * other.values[j]));
            }
        }
        Self::from_triplets(self.dim, out)
    }

    /// out += coef · (self · x)
    pub fn apply_add(&self, coef: Complex64, x: &[Complex64], out: &mut [Complex64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *o += coef * acc;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Accumulates superoperator entries on vec(ρ), where ρ is `d × d`.
pub struct SuperBuilder {
    d: usize,
    triplets: Vec<(usize, usize, Complex64)>,
}

impl SuperBuilder {
    pub fn new(d: usize) -> Self {
        Self { d, triplets: Vec::new() }
    }

    /// ρ ↦ coef · A ρ
    pub fn left(&mut self, coef: Complex64, a: &Csr) {
        let d = self.d;
        for (r, rp, v) in a.triplets() {
            for c in 0..d {
                self.triplets.push((c * d + r, c * d + rp, coef * v));
            }
        }
    }

    /// ρ ↦ coef · ρ B
    pub fn right(&mut self, coef: Complex64, b: &Csr) {
        let d = self.d;
        for (cp, c, v) in b.triplets() {
            for r in 0..d {
                self.triplets.push((c * d + r, cp * d + r, coef * v));
            }
        }
    }

    /// ρ ↦ coef · A ρ B
    pub fn sandwich(&mut self, coef: Complex64, a: &Csr, b: &Csr) {
        let d = self.d;
        for (r, rp, va) in a.triplets() {
            for (cp, c, vb) in b.triplets() {
                self.triplets.push((c * d + r, cp * d + rp, coef * va * vb));
            }
        }
    }

    /// ρ ↦ −i[H, ρ]
    pub fn hamiltonian(&mut self, h: &Csr) {
        self.left(Complex64::new(0.0, -1.0), h);
        self.right(Complex64::new(0.0, 1.0), h);
    }

    /// ρ ↦ rate · (LρL† − ½{L†L, ρ})
    pub fn dissipator(&mut self, rate: f64, l: &Csr) {
        if rate == 0.0 {
            return;
        }
        let ld = l.adjoint();
        let ldl = ld.matmul(l);
        let c = Complex64::new(rate, 0.0);
        self.sandwich(c, l, &ld);
        self.left(-0.5 * c, &ldl);
        self.right(-0.5 * c, &ldl);
    }

    pub fn build(self) -> Csr {
        Csr::from_triplets(self.d * self.d, self.triplets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dense(m: &Csr) -> Vec<Vec<Complex64>> {
        (0..m.dim).map(|r| (0..m.dim).map(|k| m.get(r, k)).collect()).collect()
    }

    fn dense_mul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let n = a.len();
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
            .collect()
    }

    #[test]
    fn duplicates_summed_and_zeros_dropped() {
        let m = Csr::from_triplets(3, vec![(1, 2, c(1.0, 0.0)), (1, 2, c(2.0, 1.0)), (0, 0, c(1.0, 0.0)), (0, 0, c(-1.0, 0.0))]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(1, 2), c(3.0, 1.0));
        assert_eq!(m.get(0, 0), c(0.0, 0.0));
    }

    #[test]
    fn sandwich_matches_dense_product() {
        let a = Csr::from_triplets(3, vec![(0, 1, c(1.0, 2.0)), (2, 0, c(-0.5, 0.0)), (1, 1, c(0.0, 3.0))]);
        let b = Csr::from_triplets(3, vec![(1, 2, c(2.0, -1.0)), (0, 0, c(1.0, 1.0)), (2, 1, c(0.3, 0.0))]);
        let rho: Vec<Vec<Complex64>> = (0..3).map(|r| (0..3).map(|k| c(r as f64 + 0.1 * k as f64, k as f64 - r as f64)).collect()).collect();
        let mut sb = SuperBuilder::new(3);
        sb.sandwich(c(1.0, 0.0), &a, &b);
        sb.left(c(0.5, 0.0), &a);
        sb.right(c(0.0, 2.0), &b);
        let s = sb.build();
        let x: Vec<Complex64> = (0..9).map(|k| rho[k % 3][k / 3]).collect();
        let mut y = vec![c(0.0, 0.0); 9];
        s.apply_add(c(1.0, 0.0), &x, &mut y);

        let (ad, bd) = (dense(&a), dense(&b));
        let arb = dense_mul(&dense_mul(&ad, &rho), &bd);
        let ar = dense_mul(&ad, &rho);
        let rb = dense_mul(&rho, &bd);
        for r in 0..3 {
            for k in 0..3 {
                let want = arb[r][k] + 0.5 * ar[r][k] + c(0.0, 2.0) * rb[r][k];
                assert!((y[k * 3 + r] - want).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn matmul_and_adjoint() {
        let a = Csr::from_triplets(2, vec![(0, 1, c(1.0, 1.0)), (1, 0, c(2.0, 0.0))]);
        let p = a.adjoint().matmul(&a);
        assert_eq!(p.get(0, 0), c(4.0, 0.0));
        assert_eq!(p.get(1, 1), c(2.0, 0.0));
        assert_eq!(p.nnz(), 2);
    }
}
