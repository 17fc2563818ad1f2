//! Degree-`p` extensions `L = K[x]/(g)` of an imaginary quadratic field `K`,
//! with `g` monic over `O_K`.

pub mod field;
pub mod ok;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::arith::{factor, is_prime_u64};
use crate::classgroup::{primes_above, PrimeKind, PrimeOfK};
use crate::error::{Error, Result};

pub use field::{factor_shape, FiniteField, Fq, Poly, SplitShape};
pub use ok::{OkElement, QuadField};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelativeExtension {
    field: QuadField,
    p: u64,
    g: Vec<OkElement>,
    disc: OkElement,
}

impl RelativeExtension {
    /// `coeffs` are ascending and include the leading 1.
    pub fn new(d: i64, p: u64, coeffs: Vec<OkElement>) -> Result<Self> {
        let field = QuadField::new(d)?;
        if p == 2 || !is_prime_u64(p) {
            return Err(Error::NotOddPrime(p));
        }
        if coeffs.len() as u64 != p + 1 {
            return Err(Error::InvalidPolynomial(format!(
                "expected {} coefficients for degree {p}, found {}",
                p + 1,
                coeffs.len()
            )));
        }
        if !coeffs[p as usize].is_one() {
            return Err(Error::InvalidPolynomial("polynomial is not monic".into()));
        }
        let disc = poly_discriminant(&field, &coeffs);
        if disc.is_zero() {
            return Err(Error::InvalidPolynomial(
                "discriminant is zero (repeated root)".into(),
            ));
        }
        Ok(RelativeExtension {
            field,
            p,
            g: coeffs,
            disc,
        })
    }

    /// Convenience constructor for polynomials with rational integer coefficients.
    pub fn from_integers(d: i64, p: u64, coeffs: &[i64]) -> Result<Self> {
        RelativeExtension::new(
            d,
            p,
            coeffs.iter().map(|&c| OkElement::from_int(c)).collect(),
        )
    }

    pub fn field(&self) -> &QuadField {
        &self.field
    }

    pub fn discriminant_k(&self) -> i64 {
        self.field.discriminant()
    }

    pub fn degree(&self) -> u64 {
        self.p
    }

    pub fn coefficients(&self) -> &[OkElement] {
        &self.g
    }

    pub fn disc_g(&self) -> &OkElement {
        &self.disc
    }
}

impl fmt::Display for RelativeExtension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .g
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("({c})"),
                1 => format!("({c})x"),
                _ => format!("({c})x^{i}"),
            })
            .collect();
        write!(
            f,
            "{} over Q(sqrt({}))",
            terms.join(" + "),
            self.field.discriminant()
        )
    }
}

/// How the commutative order `Ω` is presented.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderSpec {
    /// `Ω = O_K[a]` for a root `a` of `g`. `assume_unramified` asserts that
    /// `L/K` is unramified, which makes the conductor support exact.
    Monogenic { assume_unramified: bool },
    /// `Ω = O_K + ν·O_L`.
    Multiplier { nu: PrimeOfK },
}

/// The residue field of a prime of `K` with the reduction map `O_K -> k(ν)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResidueField {
    field: FiniteField,
    omega: Fq,
}

impl ResidueField {
    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    /// Image of `ω`.
    pub fn omega(&self) -> Fq {
        self.omega
    }

    pub fn reduce(&self, x: &OkElement) -> Fq {
        let k = &self.field;
        let l = k.characteristic();
        let u = Fq {
            c0: crate::arith::big_mod(&x.u, l),
            c1: 0,
        };
        let v = Fq {
            c0: crate::arith::big_mod(&x.v, l),
            c1: 0,
        };
        k.add(u, k.mul(v, self.omega))
    }

    pub fn reduce_poly(&self, g: &[OkElement]) -> Poly {
        field::trim(g.iter().map(|c| self.reduce(c)).collect())
    }
}

pub fn residue_field(nu: &PrimeOfK) -> Result<ResidueField> {
    let k = QuadField::new(nu.discriminant())?;
    let l = nu.ell();
    match nu.b() {
        Some(b) => {
            // (-b + √d)/2 = ω - (b + δ)/2 lies in ν.
            let r = (b as u128 + k.delta() as u128) / 2 % l as u128;
            Ok(ResidueField {
                field: FiniteField::prime(l),
                omega: Fq {
                    c0: r as u64,
                    c1: 0,
                },
            })
        }
        None => {
            // t^2 = δ·t - n
            let s = k.delta() as u64 % l;
            let r = (-k.omega_norm()).rem_euclid(l as i64) as u64;
            let field = FiniteField::quadratic(l, s, r);
            Ok(ResidueField {
                field,
                omega: field.gen(),
            })
        }
    }
}

pub fn splitting_shape(nu: &PrimeOfK, e: &RelativeExtension) -> Result<SplitShape> {
    if nu.discriminant() != e.discriminant_k() {
        return Err(Error::DiscriminantMismatch(
            nu.discriminant().to_string(),
            e.discriminant_k().to_string(),
        ));
    }
    let rf = residue_field(nu)?;
    Ok(factor_shape(rf.field(), &rf.reduce_poly(e.coefficients())))
}

/// Discriminant of a monic polynomial over `O_K`, as `(-1)^{n(n-1)/2} Res(g, g')`.
pub fn poly_discriminant(k: &QuadField, g: &[OkElement]) -> OkElement {
    let n = g.len() - 1;
    if n == 0 {
        return k.one();
    }
    let dg: Vec<OkElement> = g
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.scale(&BigInt::from(i)))
        .collect();
    let m = n - 1;
    let size = n + m;
    let mut rows = vec![vec![k.zero(); size]; size];
    // Coefficients in descending order along each row.
    for r in 0..m {
        for (j, c) in g.iter().rev().enumerate() {
            rows[r][r + j] = c.clone();
        }
    }
    for r in 0..n {
        for (j, c) in dg.iter().rev().enumerate() {
            rows[m + r][r + j] = c.clone();
        }
    }
    let res = bareiss_det(k, rows);
    if (n * (n - 1) / 2) % 2 == 1 {
        res.neg()
    } else {
        res
    }
}

/// Fraction-free determinant over `O_K`.
fn bareiss_det(k: &QuadField, mut a: Vec<Vec<OkElement>>) -> OkElement {
    let n = a.len();
    let mut sign = false;
    let mut prev = k.one();
    for i in 0..n {
        if a[i][i].is_zero() {
            match (i + 1..n).find(|&r| !a[r][i].is_zero()) {
                Some(r) => {
                    a.swap(i, r);
                    sign = !sign;
                }
                None => return k.zero(),
            }
        }
        for r in i + 1..n {
            for c in i + 1..n {
                let num = k.mul(&a[r][c], &a[i][i]).sub(&k.mul(&a[r][i], &a[i][c]));
                a[r][c] = k.div_exact(&num, &prev).expect("Bareiss division is exact");
            }
            a[r][i] = k.zero();
        }
        prev = a[i][i].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if sign {
        det.neg()
    } else {
        det
    }
}

pub fn disc_poly(e: &RelativeExtension) -> OkElement {
    e.disc_g().clone()
}

fn ell_valuation(x: &BigInt, l: u64) -> u32 {
    let l = BigInt::from(l);
    let mut x = x.abs();
    let mut v = 0;
    while !x.is_zero() && (&x % &l).is_zero() {
        x /= &l;
        v += 1;
    }
    v
}

/// `v_ν(α)` for nonzero `α`.
pub fn prime_valuation(nu: &PrimeOfK, alpha: &OkElement) -> Result<u32> {
    if alpha.is_zero() {
        return Err(Error::Invalid("valuation of zero".into()));
    }
    let k = QuadField::new(nu.discriminant())?;
    let l = nu.ell();
    match nu.kind() {
        PrimeKind::Inert => Ok(ell_valuation(&alpha.u, l).min(ell_valuation(&alpha.v, l))),
        PrimeKind::Ramified => Ok(ell_valuation(&k.norm(alpha), l)),
        PrimeKind::Split => {
            let rf = residue_field(nu)?;
            let r = rf.omega().c0 as i64;
            // ω - (δ - r) lies in the conjugate prime but not in ν.
            let beta = OkElement::new(-(k.delta() - r), 1);
            let ell = OkElement::from_int(l);
            let mut x = alpha.clone();
            let mut v = 0;
            while rf.reduce(&x).is_zero() {
                x = k
                    .div_exact(&k.mul(&x, &beta), &ell)
                    .expect("product lies in (ell)");
                v += 1;
            }
            Ok(v)
        }
    }
}

/// The primes of `K` dividing the nonzero element `α`, with their valuations.
pub fn primes_dividing(d: i64, alpha: &OkElement) -> Result<Vec<(PrimeOfK, u32)>> {
    let k = QuadField::new(d)?;
    let nm = k.norm(alpha);
    if nm.is_zero() {
        return Err(Error::Invalid("cannot factor zero".into()));
    }
    let fac = factor(&nm).ok_or_else(|| Error::FactorizationFailed(nm.to_string()))?;
    let mut out = Vec::new();
    for (l, _) in fac {
        for nu in primes_above(l, d)? {
            let v = prime_valuation(&nu, alpha)?;
            if v > 0 {
                out.push((nu, v));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConductorSupport {
    pub primes: Vec<PrimeOfK>,
    /// False when the set is only known to contain the true support.
    pub exact: bool,
}

/// Primes of `K` dividing `N_{L/K}` of the conductor of `Ω`.
///
/// For `O_K[a]` this is the set of primes dividing `disc(g)`: exact when
/// `L/K` is unramified (then the conductor is `g'(a)O_L`), otherwise a
/// superset. For `O_K + νO_L` the conductor is `νO_L`.
pub fn conductor_support(spec: &OrderSpec, e: &RelativeExtension) -> Result<ConductorSupport> {
    match spec {
        OrderSpec::Multiplier { nu } => {
            if nu.discriminant() != e.discriminant_k() {
                return Err(Error::DiscriminantMismatch(
                    nu.discriminant().to_string(),
                    e.discriminant_k().to_string(),
                ));
            }
            Ok(ConductorSupport {
                primes: vec![nu.clone()],
                exact: true,
            })
        }
        OrderSpec::Monogenic { assume_unramified } => {
            let primes = primes_dividing(e.discriminant_k(), e.disc_g())?
                .into_iter()
                .map(|(nu, _)| nu)
                .collect();
            Ok(ConductorSupport {
                primes,
                exact: *assume_unramified,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classgroup::prime_of_k;

    #[test]
    fn residue_fields() {
        let p2 = prime_of_k(2, -23, 0).unwrap();
        let p2c = prime_of_k(2, -23, 1).unwrap();
        let a = residue_field(&p2).unwrap().omega();
        let b = residue_field(&p2c).unwrap().omega();
        assert_ne!(a, b);
        let rf5 = residue_field(&prime_of_k(5, -23, 0).unwrap()).unwrap();
        assert_eq!(rf5.field().size(), 25);
        let rf23 = residue_field(&prime_of_k(23, -23, 0).unwrap()).unwrap();
        assert_eq!(rf23.field().size(), 23);
        // ω^2 - ω + 6 has a double root mod 23.
        let k = rf23.field();
        let w = rf23.omega();
        let val = k.add(k.sub(k.mul(w, w), w), k.from_i64(6));
        assert!(val.is_zero());
    }

    #[test]
    fn discriminants() {
        let e = RelativeExtension::from_integers(-23, 3, &[-1, -1, 0, 1]).unwrap();
        assert_eq!(disc_poly(&e), OkElement::from_int(-23));
        let e = RelativeExtension::from_integers(-23, 3, &[-1, 0, 0, 1]).unwrap();
        assert_eq!(disc_poly(&e), OkElement::from_int(-27));
        assert!(RelativeExtension::from_integers(-23, 3, &[0, 0, 0, 1]).is_err());
        assert!(RelativeExtension::from_integers(-23, 3, &[0, 0, 2, 2]).is_err());
    }

    #[test]
    fn valuations() {
        let k = QuadField::new(-23).unwrap();
        let p2 = prime_of_k(2, -23, 0).unwrap();
        let p2c = prime_of_k(2, -23, 1).unwrap();
        let x = OkElement::from_int(8);
        assert_eq!(prime_valuation(&p2, &x).unwrap(), 3);
        // ω has norm 6 = 2·3, so it lies in exactly one prime above 2.
        let w = k.omega();
        let v = prime_valuation(&p2, &w).unwrap() + prime_valuation(&p2c, &w).unwrap();
        assert_eq!(v, 1);
        let p23 = prime_of_k(23, -23, 0).unwrap();
        assert_eq!(prime_valuation(&p23, &OkElement::from_int(-23)).unwrap(), 2);
    }

    #[test]
    fn conductor_examples() {
        let e = RelativeExtension::from_integers(-23, 3, &[-1, -1, 0, 1]).unwrap();
        let s = conductor_support(
            &OrderSpec::Monogenic {
                assume_unramified: true,
            },
            &e,
        )
        .unwrap();
        assert_eq!(s.primes, vec![prime_of_k(23, -23, 0).unwrap()]);
        let nu = prime_of_k(59, -23, 0).unwrap();
        let s = conductor_support(&OrderSpec::Multiplier { nu: nu.clone() }, &e).unwrap();
        assert_eq!(s.primes, vec![nu]);
    }
}
