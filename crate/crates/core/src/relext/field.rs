//! Finite fields `F_ℓ` and `F_{ℓ^2}` and univariate polynomials over them.

use std::fmt;

use crate::arith::{inv_mod, mul_mod};

/// An element `c0 + c1·t` of `F_ℓ` (with `c1 = 0`) or `F_ℓ[t]/(t^2 - s·t - r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fq {
    pub c0: u64,
    pub c1: u64,
}

impl Fq {
    pub const ZERO: Fq = Fq { c0: 0, c1: 0 };

    pub fn is_zero(self) -> bool {
        self.c0 == 0 && self.c1 == 0
    }
}

impl fmt::Display for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c1 == 0 {
            write!(f, "{}", self.c0)
        } else {
            write!(f, "{}+{}t", self.c0, self.c1)
        }
    }
}

/// `F_ℓ` when `quad` is `None`, otherwise `F_ℓ[t]/(t^2 - s·t - r)` for
/// `quad = Some((s, r))` (the caller guarantees irreducibility).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiniteField {
    ell: u64,
    quad: Option<(u64, u64)>,
}

impl FiniteField {
    pub fn prime(ell: u64) -> Self {
        FiniteField { ell, quad: None }
    }

    pub fn quadratic(ell: u64, s: u64, r: u64) -> Self {
        FiniteField {
            ell,
            quad: Some((s % ell, r % ell)),
        }
    }

    pub fn characteristic(&self) -> u64 {
        self.ell
    }

    pub fn degree(&self) -> u32 {
        if self.quad.is_some() {
            2
        } else {
            1
        }
    }

    /// Number of elements.
    pub fn size(&self) -> u64 {
        self.ell.pow(self.degree())
    }

    /// The modulus `(s, r)` of a quadratic field: `t^2 = s·t + r`.
    pub fn modulus(&self) -> Option<(u64, u64)> {
        self.quad
    }

    pub fn zero(&self) -> Fq {
        Fq::ZERO
    }

    pub fn one(&self) -> Fq {
        Fq {
            c0: 1 % self.ell,
            c1: 0,
        }
    }

    pub fn from_i64(&self, x: i64) -> Fq {
        Fq {
            c0: x.rem_euclid(self.ell as i64) as u64,
            c1: 0,
        }
    }

    /// The generator `t` of a quadratic field.
    pub fn gen(&self) -> Fq {
        assert!(
            self.quad.is_some(),
            "prime field has no quadratic generator"
        );
        Fq { c0: 0, c1: 1 }
    }

    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        Fq {
            c0: (a.c0 + b.c0) % self.ell,
            c1: (a.c1 + b.c1) % self.ell,
        }
    }

    pub fn neg(&self, a: Fq) -> Fq {
        Fq {
            c0: (self.ell - a.c0) % self.ell,
            c1: (self.ell - a.c1) % self.ell,
        }
    }

    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        let l = self.ell;
        match self.quad {
            None => Fq {
                c0: mul_mod(a.c0, b.c0, l),
                c1: 0,
            },
            Some((s, r)) => {
                let hi = mul_mod(a.c1, b.c1, l);
                let c0 = (mul_mod(a.c0, b.c0, l) + mul_mod(hi, r, l)) % l;
                let c1 = (mul_mod(a.c0, b.c1, l) + mul_mod(a.c1, b.c0, l) + mul_mod(hi, s, l)) % l;
                Fq { c0, c1 }
            }
        }
    }

    pub fn pow(&self, a: Fq, mut e: u64) -> Fq {
        let mut acc = self.one();
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Fq) -> Fq {
        assert!(!a.is_zero(), "inverse of zero");
        match self.quad {
            None => Fq {
                c0: inv_mod(a.c0, self.ell),
                c1: 0,
            },
            Some(_) => self.pow(a, self.size() - 2),
        }
    }

    /// All elements, `c0` varying fastest.
    pub fn elements(&self) -> impl Iterator<Item = Fq> + '_ {
        let l = self.ell;
        let top = if self.quad.is_some() { l } else { 1 };
        (0..top).flat_map(move |c1| (0..l).map(move |c0| Fq { c0, c1 }))
    }
}

/// Polynomials over a [`FiniteField`], coefficients in ascending order with
/// no trailing zeros.
pub type Poly = Vec<Fq>;

pub fn trim(mut f: Poly) -> Poly {
    while f.last().is_some_and(|c| c.is_zero()) {
        f.pop();
    }
    f
}

/// Degree, with the zero polynomial reported as `None`.
pub fn degree(f: &[Fq]) -> Option<usize> {
    f.iter().rposition(|c| !c.is_zero())
}

pub fn poly_sub(k: &FiniteField, f: &[Fq], g: &[Fq]) -> Poly {
    let n = f.len().max(g.len());
    let get = |p: &[Fq], i: usize| p.get(i).copied().unwrap_or(Fq::ZERO);
    trim((0..n).map(|i| k.sub(get(f, i), get(g, i))).collect())
}

pub fn poly_mul(k: &FiniteField, f: &[Fq], g: &[Fq]) -> Poly {
    if f.is_empty() || g.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Fq::ZERO; f.len() + g.len() - 1];
    for (i, &a) in f.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, &b) in g.iter().enumerate() {
            out[i + j] = k.add(out[i + j], k.mul(a, b));
        }
    }
    trim(out)
}

/// Quotient and remainder; `g` must be nonzero.
pub fn poly_divrem(k: &FiniteField, f: &[Fq], g: &[Fq]) -> (Poly, Poly) {
    let dg = degree(g).expect("division by zero polynomial");
    let lead_inv = k.inv(g[dg]);
    let mut r = trim(f.to_vec());
    let Some(df) = degree(&r) else {
        return (Vec::new(), Vec::new());
    };
    if df < dg {
        return (Vec::new(), r);
    }
    let mut q = vec![Fq::ZERO; df - dg + 1];
    for i in (dg..=df).rev() {
        let c = r.get(i).copied().unwrap_or(Fq::ZERO);
        if c.is_zero() {
            continue;
        }
        let factor = k.mul(c, lead_inv);
        q[i - dg] = factor;
        for (j, &b) in g[..=dg].iter().enumerate() {
            r[i - dg + j] = k.sub(r[i - dg + j], k.mul(factor, b));
        }
    }
    (trim(q), trim(r))
}

pub fn poly_rem(k: &FiniteField, f: &[Fq], g: &[Fq]) -> Poly {
    poly_divrem(k, f, g).1
}

pub fn make_monic(k: &FiniteField, f: &[Fq]) -> Poly {
    let f = trim(f.to_vec());
    match f.last() {
        None => f,
        Some(&lead) => {
            let inv = k.inv(lead);
            f.into_iter().map(|c| k.mul(c, inv)).collect()
        }
    }
}

/// Monic greatest common divisor (zero if both inputs are zero).
pub fn poly_gcd(k: &FiniteField, f: &[Fq], g: &[Fq]) -> Poly {
    let mut a = trim(f.to_vec());
    let mut b = trim(g.to_vec());
    while !b.is_empty() {
        let r = poly_rem(k, &a, &b);
        a = b;
        b = r;
    }
    make_monic(k, &a)
}

pub fn derivative(k: &FiniteField, f: &[Fq]) -> Poly {
    trim(
        f.iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| k.mul(k.from_i64((i as u64 % k.characteristic()) as i64), c))
            .collect(),
    )
}

pub fn eval(k: &FiniteField, f: &[Fq], x: Fq) -> Fq {
    f.iter()
        .rev()
        .fold(Fq::ZERO, |acc, &c| k.add(k.mul(acc, x), c))
}

/// `h^e mod m`.
pub fn poly_powmod(k: &FiniteField, h: &[Fq], mut e: u64, m: &[Fq]) -> Poly {
    let mut acc = poly_rem(k, &[k.one()], m);
    let mut base = poly_rem(k, h, m);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_rem(k, &poly_mul(k, &acc, &base), m);
        }
        base = poly_rem(k, &poly_mul(k, &base, &base), m);
        e >>= 1;
    }
    acc
}

/// Factorization pattern of a polynomial over a finite field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SplitShape {
    /// Degrees of the distinct monic irreducible factors, ascending.
    pub degrees: Vec<u32>,
    /// Set iff `gcd(f, f') != 1`.
    pub repeated: bool,
}

impl SplitShape {
    /// A repeated factor means Dedekind–Kummer cannot be applied.
    pub fn is_determinate(&self) -> bool {
        !self.repeated
    }

    pub fn splits_completely(&self, p: u32) -> bool {
        !self.repeated && self.degrees.len() == p as usize && self.degrees.iter().all(|&d| d == 1)
    }

    pub fn is_inert(&self, p: u32) -> bool {
        !self.repeated && self.degrees == [p]
    }

    /// Neither split completely nor inert.
    pub fn is_mixed(&self, p: u32) -> bool {
        !self.repeated && !self.splits_completely(p) && !self.is_inert(p)
    }

    pub fn has_root(&self) -> bool {
        self.degrees.first() == Some(&1)
    }
}

impl fmt::Display for SplitShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.degrees.iter().map(u32::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))?;
        if self.repeated {
            f.write_str(" repeated")?;
        }
        Ok(())
    }
}

/// Distinct-degree factorization by the gcd ladder with `x^{q^i} mod f`.
/// Repeated copies of a factor are stripped so each distinct irreducible
/// factor is counted once.
pub fn factor_shape(k: &FiniteField, f: &[Fq]) -> SplitShape {
    let f = make_monic(k, f);
    assert!(!f.is_empty(), "shape of the zero polynomial");
    let repeated = degree(&poly_gcd(k, &f, &derivative(k, &f))).is_some_and(|d| d > 0);
    let q = k.size();
    let x: Poly = vec![Fq::ZERO, k.one()];
    let mut rest = f;
    let mut h = poly_rem(k, &x, &rest);
    let mut degrees = Vec::new();
    let mut i = 1usize;
    loop {
        let dr = degree(&rest).unwrap_or(0);
        if dr == 0 {
            break;
        }
        if dr < 2 * i {
            degrees.push(dr as u32);
            break;
        }
        h = poly_powmod(k, &h, q, &rest);
        let g = poly_gcd(k, &poly_sub(k, &h, &x), &rest);
        let dg = degree(&g).unwrap_or(0);
        if dg > 0 {
            degrees.extend(std::iter::repeat_n(i as u32, dg / i));
            let mut c = g;
            while degree(&c).is_some_and(|d| d > 0) {
                rest = poly_divrem(k, &rest, &c).0;
                c = poly_gcd(k, &rest, &c);
            }
            h = poly_rem(k, &h, &rest);
        }
        i += 1;
    }
    degrees.sort_unstable();
    SplitShape { degrees, repeated }
}
