//! Ideal class groups of imaginary quadratic fields via reduced positive
//! definite binary quadratic forms.
//!
//! The form `(a, b, c)` corresponds to the ideal with `Z`-basis
//! `a, (-b + √d)/2`; composition of forms matches multiplication of ideals.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{is_fundamental_negative, is_prime_u64, kronecker, sqrt_mod};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadForm {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
}

impl QuadForm {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>) -> Self {
        QuadForm {
            a: a.into(),
            b: b.into(),
            c: c.into(),
        }
    }

    /// The form `(a, b, (b^2 - d) / 4a)`, if integral.
    pub fn from_ab(a: impl Into<BigInt>, b: impl Into<BigInt>, d: i64) -> Result<Self> {
        let (a, b): (BigInt, BigInt) = (a.into(), b.into());
        let four_a: BigInt = &a * 4;
        if a.is_zero() {
            return Err(Error::InvalidForm("a = 0".into()));
        }
        let num: BigInt = &b * &b - BigInt::from(d);
        if !(&num % &four_a).is_zero() {
            return Err(Error::InvalidForm(format!(
                "b^2 - d not divisible by 4a for ({a}, {b})"
            )));
        }
        Ok(QuadForm {
            c: num / four_a,
            a,
            b,
        })
    }

    pub fn principal(d: i64) -> Self {
        let b = d.rem_euclid(2);
        QuadForm::from_ab(1, b, d).expect("principal form is integral")
    }

    pub fn discriminant(&self) -> BigInt {
        &self.b * &self.b - BigInt::from(4) * &self.a * &self.c
    }

    pub fn disc_i64(&self) -> i64 {
        self.discriminant().to_i64().expect("discriminant fits i64")
    }

    pub fn is_reduced(&self) -> bool {
        let abs_b = self.b.abs();
        if abs_b > self.a || self.a > self.c {
            return false;
        }
        if abs_b == self.a || self.a == self.c {
            return !self.b.is_negative();
        }
        true
    }

    /// `(a, -b, c)`, the inverse class.
    pub fn inverse(&self) -> QuadForm {
        QuadForm {
            a: self.a.clone(),
            b: -&self.b,
            c: self.c.clone(),
        }
    }

    pub fn is_principal(&self) -> bool {
        self.a.is_one()
    }
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

/// Gauss reduction of a positive definite form.
pub fn reduce(f: &QuadForm) -> Result<QuadForm> {
    let d = f.discriminant();
    if !d.is_negative() || !f.a.is_positive() {
        return Err(Error::InvalidForm(format!("{f} is not positive definite")));
    }
    let (mut a, mut b, mut c) = (f.a.clone(), f.b.clone(), f.c.clone());
    loop {
        // Normalize b into (-a, a].
        let two_a = &a * 2;
        let mut nb = b.mod_floor(&two_a);
        if nb > a {
            nb -= &two_a;
        }
        if nb != b {
            b = nb;
            c = (&b * &b - &d) / (&a * 4);
        }
        if a > c {
            std::mem::swap(&mut a, &mut c);
            b = -b;
            continue;
        }
        if a == c && b.is_negative() {
            b = -b;
        }
        return Ok(QuadForm { a, b, c });
    }
}

fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Dirichlet composition followed by reduction.
pub fn compose(f: &QuadForm, g: &QuadForm) -> Result<QuadForm> {
    let d = f.discriminant();
    if d != g.discriminant() {
        return Err(Error::DiscriminantMismatch(
            d.to_string(),
            g.discriminant().to_string(),
        ));
    }
    let s = (&f.b + &g.b) / 2;
    let (e1, x1, y1) = ext_gcd(&f.a, &g.a);
    let (e, x2, w) = ext_gcd(&e1, &s);
    let u = &x2 * x1;
    let v = &x2 * y1;
    let a3 = &f.a * &g.a / (&e * &e);
    let num: BigInt = &u * &f.a * &g.b + &v * &g.a * &f.b + &w * ((&f.b * &g.b + &d) / 2);
    let b3 = (num / &e).mod_floor(&(&a3 * 2));
    let c3 = (&b3 * &b3 - &d) / (&a3 * 4);
    reduce(&QuadForm {
        a: a3,
        b: b3,
        c: c3,
    })
}

/// All reduced forms of discriminant `d` (primitive ones only), ordered by `(a, b)`.
pub fn enumerate_reduced(d: i64) -> Vec<QuadForm> {
    let mut out = Vec::new();
    let bound = ((-d) / 3).sqrt() + 1;
    for a in 1..=bound {
        for b in -a..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            let f = QuadForm::new(a, b, c);
            if f.is_reduced() && a.gcd(&b).gcd(&c) == 1 {
                out.push(f);
            }
        }
    }
    out
}

fn compose_unchecked(f: &QuadForm, g: &QuadForm) -> QuadForm {
    compose(f, g).expect("same discriminant")
}

/// The class group `C_K` of `Q(√d)` for a negative fundamental discriminant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassGroup {
    d: i64,
    elements: Vec<QuadForm>,
    index: HashMap<QuadForm, usize>,
    invariants: Vec<u64>,
    generators: Vec<QuadForm>,
    dlogs: Vec<Vec<u64>>,
}

impl ClassGroup {
    pub fn discriminant(&self) -> i64 {
        self.d
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[QuadForm] {
        &self.elements
    }

    /// Invariant factors `d_1 | d_2 | ...`, all greater than 1.
    pub fn invariants(&self) -> &[u64] {
        &self.invariants
    }

    /// Generators whose orders are the respective invariant factors.
    pub fn generators(&self) -> &[QuadForm] {
        &self.generators
    }

    pub fn is_cyclic(&self) -> bool {
        self.invariants.len() <= 1
    }

    pub fn identity(&self) -> QuadForm {
        QuadForm::principal(self.d)
    }

    pub fn compose(&self, f: &QuadForm, g: &QuadForm) -> Result<QuadForm> {
        compose(f, g)
    }

    pub fn pow(&self, f: &QuadForm, e: i64) -> Result<QuadForm> {
        let h = self.order() as i64;
        let mut e = e.rem_euclid(h.max(1));
        let mut base = reduce(f)?;
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = compose(&acc, &base)?;
            }
            base = compose(&base, &base)?;
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn index_of(&self, f: &QuadForm) -> Option<usize> {
        self.index.get(f).copied()
    }

    /// Coordinates of a (not necessarily reduced) form with respect to the
    /// generators, each taken modulo its invariant factor.
    pub fn dlog(&self, f: &QuadForm) -> Result<&[u64]> {
        if f.disc_i64() != self.d {
            return Err(Error::DiscriminantMismatch(
                f.discriminant().to_string(),
                self.d.to_string(),
            ));
        }
        let r = reduce(f)?;
        let i = self
            .index
            .get(&r)
            .ok_or_else(|| Error::InvalidForm(format!("{r} not primitive")))?;
        Ok(&self.dlogs[*i])
    }

    pub fn from_dlog(&self, coords: &[u64]) -> Result<QuadForm> {
        if coords.len() != self.generators.len() {
            return Err(Error::DimensionMismatch {
                expected: self.generators.len(),
                found: coords.len(),
            });
        }
        let mut acc = self.identity();
        for (g, &e) in self.generators.iter().zip(coords) {
            acc = compose(&acc, &self.pow(g, e as i64)?)?;
        }
        Ok(acc)
    }

    pub fn element_order(&self, f: &QuadForm) -> Result<u64> {
        let coords = self.dlog(f)?;
        Ok(coords
            .iter()
            .zip(&self.invariants)
            .map(|(&c, &n)| n / c.gcd(&n))
            .fold(1u64, |acc, o| acc.lcm(&o)))
    }

    /// Reassemble from stored parts (used by caches); validates the data.
    pub fn from_parts(
        d: i64,
        elements: Vec<QuadForm>,
        invariants: Vec<u64>,
        generators: Vec<QuadForm>,
        dlogs: Vec<Vec<u64>>,
    ) -> Result<Self> {
        let bad = |msg: &str| {
            Err(Error::Invalid(format!(
                "inconsistent class group data: {msg}"
            )))
        };
        if !is_fundamental_negative(d) {
            return Err(Error::NotFundamental(d));
        }
        let h: u64 = invariants.iter().product();
        if h as usize != elements.len() || dlogs.len() != elements.len() {
            return bad("order");
        }
        if generators.len() != invariants.len() || invariants.iter().any(|&n| n < 2) {
            return bad("generators");
        }
        if invariants.windows(2).any(|w| w[1] % w[0] != 0) {
            return bad("invariant divisibility");
        }
        let mut index = HashMap::with_capacity(elements.len());
        for (i, f) in elements.iter().enumerate() {
            if !f.is_reduced() || f.disc_i64() != d {
                return bad("element not reduced");
            }
            if dlogs[i].len() != invariants.len()
                || dlogs[i].iter().zip(&invariants).any(|(&c, &n)| c >= n)
            {
                return bad("dlog range");
            }
            if index.insert(f.clone(), i).is_some() {
                return bad("duplicate element");
            }
        }
        for g in &generators {
            if !index.contains_key(g) {
                return bad("generator not an element");
            }
        }
        Ok(ClassGroup {
            d,
            elements,
            index,
            invariants,
            generators,
            dlogs,
        })
    }

    pub fn dlogs(&self) -> &[Vec<u64>] {
        &self.dlogs
    }
}

/// Compute `C_K` for the negative fundamental discriminant `d`.
///
/// Elements come from direct enumeration of reduced forms. The structure is
/// computed independently by composition: the subgroup generated by classes
/// of primes up to `√(|d|/3)` is built up one generator at a time, the
/// resulting relation lattice is diagonalized, and the generated subgroup
/// must exhaust the enumerated list.
pub fn class_group(d: i64) -> Result<ClassGroup> {
    if !is_fundamental_negative(d) {
        return Err(Error::NotFundamental(d));
    }
    let elements = enumerate_reduced(d);
    let index: HashMap<QuadForm, usize> = elements
        .iter()
        .enumerate()
        .map(|(i, f)| (f.clone(), i))
        .collect();

    let bound = ((-d) / 3).sqrt() as u64;
    let prime_gens: Vec<QuadForm> = (2..=bound)
        .filter(|&l| is_prime_u64(l) && kronecker(d, l) != -1)
        .map(|l| prime_class(l, d).map(|p| p.class_or_principal()))
        .collect::<Result<_>>()?;

    let principal = QuadForm::principal(d);
    let mut sub: HashMap<QuadForm, Vec<i64>> = HashMap::from([(principal.clone(), Vec::new())]);
    let mut gens: Vec<QuadForm> = Vec::new();
    let mut relations: Vec<Vec<i64>> = Vec::new();
    for g in prime_gens {
        if sub.contains_key(&g) {
            continue;
        }
        let k = gens.len();
        let mut power = g.clone();
        let mut e = 1i64;
        while !sub.contains_key(&power) {
            power = compose_unchecked(&power, &g);
            e += 1;
        }
        let mut rel: Vec<i64> = sub[&power].iter().map(|x| -x).collect();
        rel.push(e);
        relations.push(rel);
        let old: Vec<(QuadForm, Vec<i64>)> =
            sub.iter().map(|(f, v)| (f.clone(), v.clone())).collect();
        for (f, v) in &old {
            let mut cur = f.clone();
            let mut lifted = v.clone();
            lifted.push(0);
            sub.get_mut(f).expect("present").push(0);
            for t in 1..e {
                cur = compose_unchecked(&cur, &g);
                lifted[k] = t;
                sub.insert(cur.clone(), lifted.clone());
            }
        }
        gens.push(g);
    }
    if sub.len() != elements.len() {
        return Err(Error::Invalid(format!(
            "composition closure has {} classes but enumeration found {}",
            sub.len(),
            elements.len()
        )));
    }

    let k = gens.len();
    let mut rel_matrix = vec![vec![BigInt::zero(); k]; k];
    for (i, r) in relations.iter().enumerate() {
        for (j, x) in r.iter().enumerate() {
            rel_matrix[i][j] = BigInt::from(*x);
        }
    }
    let (diag, v, vinv) = smith_form(rel_matrix);
    let kept: Vec<usize> = (0..k).filter(|&i| diag[i] > BigInt::one()).collect();
    let invariants: Vec<u64> = kept
        .iter()
        .map(|&i| diag[i].to_u64().expect("small"))
        .collect();

    let h = elements.len() as i64;
    let pow_form = |f: &QuadForm, e: &BigInt| -> QuadForm {
        let mut e = e.mod_floor(&BigInt::from(h)).to_i64().expect("small");
        let mut base = f.clone();
        let mut acc = principal.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = compose_unchecked(&acc, &base);
            }
            base = compose_unchecked(&base, &base);
            e >>= 1;
        }
        acc
    };
    let generators: Vec<QuadForm> = kept
        .iter()
        .map(|&j| {
            gens.iter()
                .enumerate()
                .fold(principal.clone(), |acc, (i, g)| {
                    compose_unchecked(&acc, &pow_form(g, &vinv[j][i]))
                })
        })
        .collect();

    let mut dlogs = vec![Vec::new(); elements.len()];
    for (f, x) in &sub {
        let coords = kept
            .iter()
            .zip(&invariants)
            .map(|(&j, &n)| {
                let s: BigInt = x
                    .iter()
                    .enumerate()
                    .map(|(i, xi)| BigInt::from(*xi) * &v[i][j])
                    .sum();
                s.mod_floor(&BigInt::from(n)).to_u64().expect("small")
            })
            .collect();
        dlogs[index[f]] = coords;
    }
    ClassGroup::from_parts(d, elements, invariants, generators, dlogs)
}

/// Smith form `U A V = D` of a square integer matrix; returns the diagonal,
/// `V` and `V^{-1}`.
fn smith_form(mut a: Vec<Vec<BigInt>>) -> (Vec<BigInt>, Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let n = a.len();
    let ident = |n: usize| -> Vec<Vec<BigInt>> {
        (0..n)
            .map(|i| (0..n).map(|j| BigInt::from(u8::from(i == j))).collect())
            .collect()
    };
    let mut v = ident(n);
    let mut vinv = ident(n);
    for t in 0..n {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if !a[i][j].is_zero()
                        && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            a.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            for row in v.iter_mut() {
                row.swap(t, pj);
            }
            vinv.swap(t, pj);

            let mut clean = true;
            for i in t + 1..n {
                let q = a[i][t].div_floor(&a[t][t]);
                if !q.is_zero() {
                    for j in t..n {
                        let x = &q * &a[t][j];
                        a[i][j] -= x;
                    }
                }
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let q = a[t][j].div_floor(&a[t][t]);
                if !q.is_zero() {
                    for i in t..n {
                        let x = &q * &a[i][t];
                        a[i][j] -= x;
                    }
                    for row in v.iter_mut() {
                        let x = &q * &row[t];
                        row[j] -= x;
                    }
                    for c in 0..n {
                        let x = &q * &vinv[j][c];
                        vinv[t][c] += x;
                    }
                }
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            let offender =
                (t + 1..n).find(|&i| (t + 1..n).any(|j| !(&a[i][j] % &a[t][t]).is_zero()));
            match offender {
                Some(i) => {
                    for j in t..n {
                        let x = a[i][j].clone();
                        a[t][j] += x;
                    }
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            for j in t..n {
                a[t][j] = -&a[t][j];
            }
        }
    }
    ((0..n).map(|i| a[i][i].clone()).collect(), v, vinv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrimeKind {
    Split,
    Inert,
    Ramified,
}

impl fmt::Display for PrimeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrimeKind::Split => "split",
            PrimeKind::Inert => "inert",
            PrimeKind::Ramified => "ramified",
        })
    }
}

/// A prime ideal of `K = Q(√d)` lying over the rational prime `ell`.
///
/// For split and ramified primes the ideal is `(ell, (-b + √d)/2)` where `b`
/// is the minimal solution in `[0, 2·ell)` of `b^2 ≡ d (mod 4·ell)`
/// (`which = 0`) or `2·ell - b` (`which = 1`, the conjugate).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeOfK {
    d: i64,
    ell: u64,
    which: u8,
    kind: PrimeKind,
    b: Option<u64>,
    class: Option<QuadForm>,
}

impl PrimeOfK {
    pub fn discriminant(&self) -> i64 {
        self.d
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn kind(&self) -> PrimeKind {
        self.kind
    }

    pub fn which(&self) -> u8 {
        self.which
    }

    /// `b` with the ideal equal to `(ell, (-b + √d)/2)`; `None` when inert.
    pub fn b(&self) -> Option<u64> {
        self.b
    }

    /// Reduced form of the ideal class; `None` for inert primes.
    pub fn class(&self) -> Option<&QuadForm> {
        self.class.as_ref()
    }

    /// Ideal class, with inert primes `(ell)` mapping to the principal class.
    pub fn class_or_principal(&self) -> QuadForm {
        self.class
            .clone()
            .unwrap_or_else(|| QuadForm::principal(self.d))
    }

    /// Residue degree over `Q`.
    pub fn residue_degree(&self) -> u32 {
        if self.kind == PrimeKind::Inert {
            2
        } else {
            1
        }
    }

    pub fn conjugate(&self) -> Result<PrimeOfK> {
        match self.kind {
            PrimeKind::Split => prime_of_k(self.ell, self.d, 1 - self.which),
            _ => Ok(self.clone()),
        }
    }
}

impl fmt::Display for PrimeOfK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PrimeKind::Split => write!(f, "p{}_{}", self.ell, self.which),
            _ => write!(f, "p{}", self.ell),
        }
    }
}

fn minimal_b(ell: u64, d: i64) -> Option<u64> {
    let modulus = 4 * ell as i128;
    let ok = |b: u64| ((b as i128) * (b as i128) - d as i128).rem_euclid(modulus) == 0;
    if ell == 2 {
        return (0..4).find(|&b| ok(b));
    }
    let s = sqrt_mod(d.rem_euclid(ell as i64) as u64, ell)?;
    [s, ell - s, s + ell, 2 * ell - s]
        .into_iter()
        .filter(|&b| b < 2 * ell && ok(b))
        .min()
}

/// The prime of `K` over `ell` selected by `which` (only `0` is valid unless split).
pub fn prime_of_k(ell: u64, d: i64, which: u8) -> Result<PrimeOfK> {
    if !is_prime_u64(ell) {
        return Err(Error::NotPrime(ell));
    }
    if !is_fundamental_negative(d) {
        return Err(Error::NotFundamental(d));
    }
    let kind = match kronecker(d, ell) {
        1 => PrimeKind::Split,
        -1 => PrimeKind::Inert,
        _ => PrimeKind::Ramified,
    };
    if which > 1 || (which == 1 && kind != PrimeKind::Split) {
        return Err(Error::InvalidPrime(format!(
            "which = {which} for a {kind} prime above {ell}"
        )));
    }
    if kind == PrimeKind::Inert {
        return Ok(PrimeOfK {
            d,
            ell,
            which,
            kind,
            b: None,
            class: None,
        });
    }
    let b0 = minimal_b(ell, d).expect("d is a square mod 4 ell");
    let b = if which == 0 { b0 } else { 2 * ell - b0 };
    let class = reduce(&QuadForm::from_ab(ell, b, d)?)?;
    Ok(PrimeOfK {
        d,
        ell,
        which,
        kind,
        b: Some(b),
        class: Some(class),
    })
}

/// The prime of `K` over `ell` with `which = 0`.
pub fn prime_class(ell: u64, d: i64) -> Result<PrimeOfK> {
    prime_of_k(ell, d, 0)
}

/// All primes of `K` above `ell`.
pub fn primes_above(ell: u64, d: i64) -> Result<Vec<PrimeOfK>> {
    let first = prime_of_k(ell, d, 0)?;
    if first.kind == PrimeKind::Split {
        Ok(vec![first, prime_of_k(ell, d, 1)?])
    } else {
        Ok(vec![first])
    }
}
