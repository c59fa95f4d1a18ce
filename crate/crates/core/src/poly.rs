//! Sparse multivariate polynomials with rational coefficients.

use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::rational::{q, Q};

/// Exponent vector of a monomial.
pub type Monomial = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    vars: usize,
    terms: BTreeMap<Monomial, Q>,
}

impl Poly {
    pub fn zero(vars: usize) -> Self {
        Poly {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: usize, c: Q) -> Self {
        let mut p = Poly::zero(vars);
        p.add_term(vec![0; vars], c);
        p
    }

    /// The coordinate function `X_i`.
    pub fn var(vars: usize, i: usize) -> Self {
        let mut m = vec![0; vars];
        m[i] = 1;
        let mut p = Poly::zero(vars);
        p.add_term(m, Q::one());
        p
    }

    /// `Σ c_i X_i`.
    pub fn linear(coeffs: &[Q]) -> Self {
        let mut p = Poly::zero(coeffs.len());
        for (i, c) in coeffs.iter().enumerate() {
            let mut m = vec![0; coeffs.len()];
            m[i] = 1;
            p.add_term(m, c.clone());
        }
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().sum()).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        debug_assert_eq!(m.len(), self.vars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Q) -> Poly {
        let mut p = Poly::zero(self.vars);
        for (m, v) in &self.terms {
            p.add_term(m.clone(), v * c);
        }
        p
    }

    /// `∂/∂X_i`.
    pub fn derivative(&self, i: usize) -> Poly {
        let mut p = Poly::zero(self.vars);
        for (m, v) in &self.terms {
            if m[i] == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2[i] -= 1;
            p.add_term(m2, v * q(m[i] as i64));
        }
        p
    }

    /// `Σ v_i ∂_i f` for polynomial coefficients `v_i`.
    pub fn directional(&self, field: &[Poly]) -> Poly {
        let mut out = Poly::zero(self.vars);
        for (i, vi) in field.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            let d = self.derivative(i);
            if !d.is_zero() {
                out = &out + &(vi * &d);
            }
        }
        out
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        let mut s = Q::zero();
        for (m, v) in &self.terms {
            let mut t = v.clone();
            for (xi, &e) in x.iter().zip(m) {
                for _ in 0..e {
                    t *= xi;
                }
            }
            s += t;
        }
        s
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let mut p = self.clone();
        for (m, v) in &o.terms {
            p.add_term(m.clone(), v.clone());
        }
        p
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self + &(-o)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Q::one())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut p = Poly::zero(self.vars);
        for (m1, v1) in &self.terms {
            for (m2, v2) in &o.terms {
                let m: Monomial = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                p.add_term(m, v1 * v2);
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        let f = &(&x * &x) + &y;
        let g = &(&x * &y) - &Poly::constant(2, q(3));
        let lhs = (&f * &g).derivative(0);
        let rhs = &(&f.derivative(0) * &g) + &(&f * &g.derivative(0));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn cancellation_leaves_zero() {
        let x = Poly::var(3, 2);
        assert!((&x - &x).is_zero());
        assert_eq!((&x * &x).degree(), 2);
    }

    #[test]
    fn eval_matches() {
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        let f = &(&(&x * &x) * &y) + &Poly::constant(2, q(1));
        assert_eq!(f.eval(&[q(2), q(3)]), q(13));
    }
}
