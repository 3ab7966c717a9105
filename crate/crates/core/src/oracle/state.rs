//! Density matrices on the truncated resonator ⊗ qubit space and the
//! observables read from them.

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Product basis |n⟩ ⊗ |i⟩ with index `n·M + i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TruncatedSpace {
    pub n_fock: usize,
    pub m_levels: usize,
}

impl TruncatedSpace {
    pub fn new(n_fock: usize, m_levels: usize) -> Self {
        Self { n_fock, m_levels }
    }

    pub fn dim(&self) -> usize {
        self.n_fock * self.m_levels
    }

    pub fn index(&self, n: usize, i: usize) -> usize {
        n * self.m_levels + i
    }
}

/// Tolerances applied to every density matrix handed out by the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateTolerances {
    pub trace: f64,
    pub hermiticity: f64,
    /// Smallest eigenvalue allowed, as a negative number.
    pub min_eigenvalue: f64,
}

impl Default for StateTolerances {
    fn default() -> Self {
        Self {
            trace: 1e-8,
            hermiticity: 1e-10,
            min_eigenvalue: -1e-7,
        }
    }
}

/// ρ stored column-major, entry (r, c) at `c·d + r`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub space: TruncatedSpace,
    pub data: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Moments {
    /// ⟨a⟩
    pub a: Complex64,
    /// ⟨a†a⟩
    pub photons: f64,
    /// ⟨a²⟩
    pub a2: Complex64,
    /// Qubit level populations.
    pub populations: Vec<f64>,
}

impl Moments {
    /// Squeezing parameter of the Gaussian state with these moments:
    /// r = −½ ln(1 + 2N − 2|M|) for the fluctuations N = ⟨δa†δa⟩, M = ⟨δa²⟩.
    pub fn inferred_squeezing(&self) -> f64 {
        let n = self.photons - self.a.norm_sqr();
        let m = self.a2 - self.a * self.a;
        -0.5 * (1.0 + 2.0 * n - 2.0 * m.norm()).ln()
    }

    /// Minimum quadrature variance relative to vacuum.
    pub fn min_quadrature_variance(&self) -> f64 {
        let n = self.photons - self.a.norm_sqr();
        let m = self.a2 - self.a * self.a;
        1.0 + 2.0 * n - 2.0 * m.norm()
    }
}

impl DensityMatrix {
    pub fn zeros(space: TruncatedSpace) -> Self {
        let d = space.dim();
        Self {
            space,
            data: vec![Complex64::new(0.0, 0.0); d * d],
        }
    }

    /// Pure state |n⟩ ⊗ |i⟩.
    pub fn basis(space: TruncatedSpace, n: usize, i: usize) -> Self {
        let mut rho = Self::zeros(space);
        let k = space.index(n, i);
        rho.set(k, k, Complex64::new(1.0, 0.0));
        rho
    }

    pub fn from_vec(space: TruncatedSpace, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), space.dim() * space.dim());
        Self { space, data }
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[c * self.dim() + r]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        let d = self.dim();
        self.data[c * d + r] = v;
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|k| self.get(k, k)).sum()
    }

    /// max |ρ − ρ†|
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut err: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                err = err.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        err
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let d = self.dim();
        let m = Mat::<Complex64>::from_fn(d, d, |r, c| 0.5 * (self.get(r, c) + self.get(c, r).conj()));
        m.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::InvalidState(format!("eigendecomposition failed: {e:?}")))
    }

    /// Checks trace, hermiticity and positivity.
    pub fn validate(&self, tol: &StateTolerances) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).norm() > tol.trace {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let h = self.hermiticity_error();
        if h > tol.hermiticity {
            return Err(Error::InvalidState(format!("hermiticity error {h:e}")));
        }
        let min = self.eigenvalues()?.first().copied().unwrap_or(0.0);
        if min < tol.min_eigenvalue {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Photon-number distribution p(n), traced over the qubit.
    pub fn fock_distribution(&self) -> Vec<f64> {
        let s = self.space;
        (0..s.n_fock)
            .map(|n| (0..s.m_levels).map(|i| self.get(s.index(n, i), s.index(n, i)).re).sum())
            .collect()
    }

    pub fn level_populations(&self) -> Vec<f64> {
        let s = self.space;
        (0..s.m_levels)
            .map(|i| (0..s.n_fock).map(|n| self.get(s.index(n, i), s.index(n, i)).re).sum())
            .collect()
    }

    pub fn moments(&self) -> Moments {
        let s = self.space;
        let mut a = Complex64::new(0.0, 0.0);
        let mut a2 = Complex64::new(0.0, 0.0);
        let mut photons = 0.0;
        for n in 0..s.n_fock {
            for i in 0..s.m_levels {
                let k = s.index(n, i);
                photons += n as f64 * self.get(k, k).re;
                // Tr(aρ) = Σ √n ρ[(n, i), (n−1, i)]
                if n >= 1 {
                    a += (n as f64).sqrt() * self.get(k, s.index(n - 1, i));
                }
                if n >= 2 {
                    a2 += ((n * (n - 1)) as f64).sqrt() * self.get(k, s.index(n - 2, i));
                }
            }
        }
        Moments {
            a,
            photons,
            a2,
            populations: self.level_populations(),
        }
    }
}

/// True when p(n) has two local maxima above `floor` separated by a dip
/// below half the smaller one.
pub fn is_bimodal(p: &[f64], floor: f64) -> bool {
    let peaks: Vec<usize> = (0..p.len())
        .filter(|&n| {
            p[n] > floor && (n == 0 || p[n] >= p[n - 1]) && (n + 1 == p.len() || p[n] > p[n + 1])
        })
        .collect();
    peaks.windows(2).any(|w| {
        let dip = p[w[0]..=w[1]].iter().copied().fold(f64::INFINITY, f64::min);
        dip < 0.5 * p[w[0]].min(p[w[1]])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_state_is_valid() {
        let s = TruncatedSpace::new(4, 3);
        let rho = DensityMatrix::basis(s, 2, 1);
        rho.validate(&StateTolerances::default()).unwrap();
        let m = rho.moments();
        assert_eq!(m.photons, 2.0);
        assert_eq!(m.populations, vec![0.0, 1.0, 0.0]);
        assert_eq!(m.a, Complex64::new(0.0, 0.0));
        assert_eq!(rho.fock_distribution(), vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn detects_negative_eigenvalue() {
        let s = TruncatedSpace::new(2, 1);
        let mut rho = DensityMatrix::zeros(s);
        rho.set(0, 0, Complex64::new(1.1, 0.0));
        rho.set(1, 1, Complex64::new(-0.1, 0.0));
        assert!(matches!(rho.validate(&StateTolerances::default()), Err(Error::InvalidState(_))));
    }

    #[test]
    fn superposition_moments() {
        // (|0⟩ + |1⟩)/√2 ⊗ |0⟩ has ⟨a⟩ = 1/2
        let s = TruncatedSpace::new(3, 2);
        let mut rho = DensityMatrix::zeros(s);
        for &r in &[0, 2] {
            for &c in &[0, 2] {
                rho.set(r, c, Complex64::new(0.5, 0.0));
            }
        }
        rho.validate(&StateTolerances::default()).unwrap();
        let m = rho.moments();
        assert!((m.a - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(m.photons, 0.5);
    }

    #[test]
    fn bimodality() {
        assert!(is_bimodal(&[0.4, 0.1, 0.01, 0.1, 0.3, 0.09], 1e-4));
        assert!(!is_bimodal(&[0.1, 0.3, 0.4, 0.2], 1e-4));
        assert!(!is_bimodal(&[0.5, 0.2, 0.3], 1e-4));
    }
}
