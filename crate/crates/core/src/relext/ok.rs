//! The ring of integers `O_K = Z[ω]` of an imaginary quadratic field, with
//! `ω = (δ + √d)/2`, `δ = d mod 2`, so that `ω^2 = δω - n`, `n = (δ - d)/4`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::is_fundamental_negative;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadField {
    d: i64,
    delta: i64,
    n: i64,
}

impl QuadField {
    pub fn new(d: i64) -> Result<Self> {
        if !is_fundamental_negative(d) {
            return Err(Error::NotFundamental(d));
        }
        let delta = d.rem_euclid(2);
        Ok(QuadField {
            d,
            delta,
            n: (delta - d) / 4,
        })
    }

    pub fn discriminant(&self) -> i64 {
        self.d
    }

    /// Trace of `ω`.
    pub fn delta(&self) -> i64 {
        self.delta
    }

    /// Norm of `ω`.
    pub fn omega_norm(&self) -> i64 {
        self.n
    }

    pub fn zero(&self) -> OkElement {
        OkElement::new(0, 0)
    }

    pub fn one(&self) -> OkElement {
        OkElement::new(1, 0)
    }

    pub fn omega(&self) -> OkElement {
        OkElement::new(0, 1)
    }

    pub fn mul(&self, x: &OkElement, y: &OkElement) -> OkElement {
        // (a + bω)(c + eω) = ac + (ae + bc)ω + be(δω - n)
        let be = &x.v * &y.v;
        OkElement {
            u: &x.u * &y.u - &be * self.n,
            v: &x.u * &y.v + &x.v * &y.u + &be * self.delta,
        }
    }

    pub fn conj(&self, x: &OkElement) -> OkElement {
        OkElement {
            u: &x.u + &x.v * self.delta,
            v: -&x.v,
        }
    }

    pub fn norm(&self, x: &OkElement) -> BigInt {
        &x.u * &x.u + &x.u * &x.v * self.delta + &x.v * &x.v * self.n
    }

    /// `x / y` if the quotient lies in `O_K`.
    pub fn div_exact(&self, x: &OkElement, y: &OkElement) -> Option<OkElement> {
        if y.is_zero() {
            return None;
        }
        let num = self.mul(x, &self.conj(y));
        let nm = self.norm(y);
        let (qu, ru) = num.u.div_rem(&nm);
        let (qv, rv) = num.v.div_rem(&nm);
        (ru.is_zero() && rv.is_zero()).then_some(OkElement { u: qu, v: qv })
    }

    pub fn pow(&self, x: &OkElement, e: u32) -> OkElement {
        (0..e).fold(self.one(), |acc, _| self.mul(&acc, x))
    }
}

/// `u + vω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OkElement {
    pub u: BigInt,
    pub v: BigInt,
}

impl OkElement {
    pub fn new(u: impl Into<BigInt>, v: impl Into<BigInt>) -> Self {
        OkElement {
            u: u.into(),
            v: v.into(),
        }
    }

    pub fn from_int(u: impl Into<BigInt>) -> Self {
        OkElement {
            u: u.into(),
            v: BigInt::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.u.is_one() && self.v.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.v.is_zero()
    }

    pub fn add(&self, o: &OkElement) -> OkElement {
        OkElement {
            u: &self.u + &o.u,
            v: &self.v + &o.v,
        }
    }

    pub fn sub(&self, o: &OkElement) -> OkElement {
        OkElement {
            u: &self.u - &o.u,
            v: &self.v - &o.v,
        }
    }

    pub fn neg(&self) -> OkElement {
        OkElement {
            u: -&self.u,
            v: -&self.v,
        }
    }

    pub fn scale(&self, k: &BigInt) -> OkElement {
        OkElement {
            u: &self.u * k,
            v: &self.v * k,
        }
    }
}

impl fmt::Display for OkElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.u.is_zero(), self.v.is_zero()) {
            (_, true) => write!(f, "{}", self.u),
            (true, false) => write!(f, "{}w", self.v),
            (false, false) if self.v.is_negative() => write!(f, "{} - {}w", self.u, -&self.v),
            _ => write!(f, "{} + {}w", self.u, self.v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_relation() {
        for d in [-3, -4, -23, -84] {
            let k = QuadField::new(d).unwrap();
            let w = k.omega();
            let lhs = k.mul(&w, &w);
            let rhs = OkElement::new(-k.omega_norm(), k.delta());
            assert_eq!(lhs, rhs);
            assert_eq!(k.norm(&w), BigInt::from(k.omega_norm()));
        }
    }

    #[test]
    fn norm_multiplicative_and_division() {
        let k = QuadField::new(-23).unwrap();
        let x = OkElement::new(3, -2);
        let y = OkElement::new(-1, 5);
        let xy = k.mul(&x, &y);
        assert_eq!(k.norm(&xy), k.norm(&x) * k.norm(&y));
        assert_eq!(k.div_exact(&xy, &y), Some(x.clone()));
        assert_eq!(k.div_exact(&x, &OkElement::from_int(2)), None);
    }
}
