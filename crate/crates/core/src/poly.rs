//! Real polynomials with ascending coefficients and bracketed real-root isolation.
//!
//! Roots are isolated recursively: the real roots of p′ split the search
//! interval into pieces on which p is monotone, and each sign change is then
//! bisected to machine precision.

use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self(coeffs)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Σ|c_k||x|^k, the natural scale of rounding error in `eval(x)`.
    fn magnitude(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x.abs() + c.abs())
    }

    pub fn derivative(&self) -> Self {
        if self.0.len() <= 1 {
            return Self::constant(0.0);
        }
        Self::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// Cauchy bound: every root satisfies |x| ≤ 1 + max_k |c_k / c_lead|.
    pub fn root_bound(&self) -> f64 {
        let lead = *self.0.last().unwrap();
        if self.degree() == 0 || lead == 0.0 {
            return 0.0;
        }
        1.0 + self.0[..self.degree()]
            .iter()
            .map(|c| (c / lead).abs())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.0.iter().map(|c| c * s).collect())
    }

    /// Real roots in `[lo, hi]`, sorted ascending. Tangential (even
    /// multiplicity) roots are reported once.
    pub fn real_roots(&self, lo: f64, hi: f64) -> Vec<f64> {
        assert!(lo <= hi, "empty interval");
        if self.is_zero() {
            return Vec::new();
        }
        match self.degree() {
            0 => Vec::new(),
            1 => {
                let r = -self.0[0] / self.0[1];
                if (lo..=hi).contains(&r) {
                    vec![r]
                } else {
                    Vec::new()
                }
            }
            _ => {
                let mut knots = vec![lo];
                knots.extend(self.derivative().real_roots(lo, hi));
                knots.push(hi);
                knots.dedup();

                let mut roots: Vec<f64> = Vec::new();
                let push = |r: f64, roots: &mut Vec<f64>| {
                    if roots
                        .last()
                        .is_none_or(|&last| (r - last).abs() > 4.0 * f64::EPSILON * r.abs().max(1.0))
                    {
                        roots.push(r);
                    }
                };
                for w in knots.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    let (fa, fb) = (self.eval(a), self.eval(b));
                    let (na, nb) = (self.is_negligible_at(a), self.is_negligible_at(b));
                    if na {
                        push(a, &mut roots);
                    }
                    if !na && !nb && (fa < 0.0) != (fb < 0.0) {
                        push(self.bisect(a, b, fa), &mut roots);
                    }
                }
                if self.is_negligible_at(hi) {
                    push(hi, &mut roots);
                }
                roots
            }
        }
    }

    fn is_negligible_at(&self, x: f64) -> bool {
        self.eval(x).abs() <= 64.0 * f64::EPSILON * self.magnitude(x)
    }

    fn bisect(&self, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
        for _ in 0..400 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let fm = self.eval(mid);
            if fm == 0.0 {
                return mid;
            }
            if (fm < 0.0) == (fa < 0.0) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.0.len().max(rhs.0.len());
        Poly::new(
            (0..n)
                .map(|k| self.0.get(k).unwrap_or(&0.0) + rhs.0.get(k).unwrap_or(&0.0))
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &rhs.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_roots(roots: &[f64]) -> Poly {
        roots
            .iter()
            .fold(Poly::constant(1.0), |acc, &r| &acc * &Poly::new(vec![-r, 1.0]))
    }

    #[test]
    fn finds_simple_roots() {
        let p = from_roots(&[-2.0, 0.5, 3.0]);
        let r = p.real_roots(-10.0, 10.0);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([-2.0, 0.5, 3.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert_eq!(p.real_roots(0.0, 1.0).len(), 1);
    }

    #[test]
    fn double_root_reported_once() {
        let p = from_roots(&[1.0, 1.0, 4.0]);
        let r = p.real_roots(0.0, 10.0);
        assert_eq!(r.len(), 2, "{r:?}");
        assert!((r[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn no_real_roots() {
        let p = Poly::new(vec![1.0, 0.0, 1.0]);
        assert!(p.real_roots(-5.0, 5.0).is_empty());
    }

    #[test]
    fn arithmetic() {
        let a = Poly::new(vec![1.0, 2.0]);
        let b = Poly::new(vec![0.0, 1.0, 3.0]);
        assert_eq!((&a * &b).0, vec![0.0, 1.0, 5.0, 6.0]);
        assert_eq!((&a + &b).0, vec![1.0, 3.0, 3.0]);
        assert_eq!((&b - &b).0, vec![0.0]);
        assert_eq!(b.derivative().0, vec![1.0, 6.0]);
        assert_eq!(Poly::new(vec![1.0, 0.0, 0.0]).degree(), 0);
    }
}
