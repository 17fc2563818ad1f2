//! Exact arithmetic over the localization of `Z` at a prime `p`.
//!
//! Elements of the local field are exact rationals; the valuation is the
//! ordinary `p`-adic one. A [`LocalMatrix`] is a square matrix of rationals
//! tied to a distinguished prime, used both as a lattice basis (columns span
//! the lattice over `Z_(p)`) and as an element of `M_n(Q_p)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::is_prime_u64;
use crate::error::{Error, Result};

/// A `p`-adic valuation: a finite integer or `+infinity` for zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

fn int_val(n: &BigInt, p: &BigInt) -> i64 {
    debug_assert!(!n.is_zero());
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// `ord_p(x)` for a rational `x`.
pub fn valuation(x: &BigRational, p: u64) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    let bp = BigInt::from(p);
    Valuation::Finite(int_val(x.numer(), &bp) - int_val(x.denom(), &bp))
}

/// `p^e` as an exact rational; `e` may be negative.
pub fn prime_power(p: u64, e: i64) -> BigRational {
    let base = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(base)
    } else {
        BigRational::new(BigInt::one(), base)
    }
}

/// Residue of a `p`-integral rational in `Z/p^k`.
pub fn residue_mod_power(x: &BigRational, p: u64, k: u32) -> BigInt {
    let m = BigInt::from(p).pow(k);
    let den = x.denom().mod_floor(&m);
    let inv = den.extended_gcd(&m).x.mod_floor(&m);
    (x.numer() * inv).mod_floor(&m)
}

/// Residue of a `p`-integral rational in `F_p`.
pub fn residue(x: &BigRational, p: u64) -> u64 {
    residue_mod_power(x, p, 1).to_u64().expect("residue fits")
}

/// Canonical representative of `x` modulo `p^e Z_(p)`: the unique element of
/// `Z[1/p] ∩ [0, p^e)` congruent to `x`.
pub fn reduce_mod_prime_power(x: &BigRational, p: u64, e: i64) -> BigRational {
    let w = match valuation(x, p) {
        Valuation::Infinite => return BigRational::zero(),
        Valuation::Finite(w) => w,
    };
    if w >= e {
        return BigRational::zero();
    }
    let k = (-w).max(0);
    let shifted = x * prime_power(p, k);
    let t = residue_mod_power(&shifted, p, (e + k) as u32);
    BigRational::from_integer(t) * prime_power(p, -k)
}

/// An exact rational with a distinguished prime.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocalScalar {
    value: BigRational,
    prime: u64,
}

impl LocalScalar {
    pub fn new(value: BigRational, prime: u64) -> Result<Self> {
        if !is_prime_u64(prime) {
            return Err(Error::NotPrime(prime));
        }
        Ok(LocalScalar { value, prime })
    }

    pub fn from_ratio(num: i64, den: i64, prime: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Invalid("zero denominator".into()));
        }
        Self::new(BigRational::new(num.into(), den.into()), prime)
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn val(&self) -> Valuation {
        valuation(&self.value, self.prime)
    }

    pub fn is_integral(&self) -> bool {
        self.val() >= Valuation::Finite(0)
    }

    pub fn is_unit(&self) -> bool {
        self.val() == Valuation::Finite(0)
    }
}

impl std::ops::Mul for &LocalScalar {
    type Output = LocalScalar;
    fn mul(self, rhs: &LocalScalar) -> LocalScalar {
        assert_eq!(self.prime, rhs.prime, "prime mismatch");
        LocalScalar {
            value: &self.value * &rhs.value,
            prime: self.prime,
        }
    }
}

impl std::ops::Add for &LocalScalar {
    type Output = LocalScalar;
    fn add(self, rhs: &LocalScalar) -> LocalScalar {
        assert_eq!(self.prime, rhs.prime, "prime mismatch");
        LocalScalar {
            value: &self.value + &rhs.value,
            prime: self.prime,
        }
    }
}

/// Square matrix of rationals over the localization at `prime`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocalMatrix {
    rows: Vec<Vec<BigRational>>,
    prime: u64,
}

impl LocalMatrix {
    pub fn new(prime: u64, rows: Vec<Vec<BigRational>>) -> Result<Self> {
        if !is_prime_u64(prime) {
            return Err(Error::NotPrime(prime));
        }
        let n = rows.len();
        if n == 0 {
            return Err(Error::Invalid("empty matrix".into()));
        }
        for r in &rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
        }
        Ok(LocalMatrix { rows, prime })
    }

    pub fn from_integers<R: AsRef<[i64]>>(prime: u64, rows: &[R]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| {
                r.as_ref()
                    .iter()
                    .map(|&x| BigRational::from_integer(x.into()))
                    .collect()
            })
            .collect();
        Self::new(prime, rows)
    }

    pub fn identity(n: usize, prime: u64) -> Self {
        Self::diagonal(prime, (0..n).map(|_| BigRational::one()).collect())
    }

    pub fn diagonal(prime: u64, diag: Vec<BigRational>) -> Self {
        let n = diag.len();
        let mut rows = vec![vec![BigRational::zero(); n]; n];
        for (i, d) in diag.into_iter().enumerate() {
            rows[i][i] = d;
        }
        LocalMatrix { rows, prime }
    }

    /// `diag(p^{e_1}, ..., p^{e_n})`.
    pub fn prime_power_diagonal(prime: u64, exps: &[i64]) -> Self {
        Self::diagonal(prime, exps.iter().map(|&e| prime_power(prime, e)).collect())
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn rows(&self) -> &[Vec<BigRational>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.rows[i][j]
    }

    pub fn with_prime(&self, prime: u64) -> Result<Self> {
        Self::new(prime, self.rows.clone())
    }

    fn check_compatible(&self, other: &LocalMatrix) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime, other.prime));
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &LocalMatrix) -> Result<LocalMatrix> {
        self.check_compatible(other)?;
        let n = self.dim();
        let mut rows = vec![vec![BigRational::zero(); n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            for (k, a) in self.rows[i].iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (j, out) in row.iter_mut().enumerate() {
                    *out += a * &other.rows[k][j];
                }
            }
        }
        Ok(LocalMatrix {
            rows,
            prime: self.prime,
        })
    }

    pub fn scale(&self, c: &BigRational) -> LocalMatrix {
        LocalMatrix {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|x| x * c).collect())
                .collect(),
            prime: self.prime,
        }
    }

    pub fn transpose(&self) -> LocalMatrix {
        let n = self.dim();
        LocalMatrix {
            rows: (0..n)
                .map(|i| (0..n).map(|j| self.rows[j][i].clone()).collect())
                .collect(),
            prime: self.prime,
        }
    }

    /// Permute columns: column `j` of the result is column `perm[j]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> LocalMatrix {
        LocalMatrix {
            rows: self
                .rows
                .iter()
                .map(|r| perm.iter().map(|&j| r[j].clone()).collect())
                .collect(),
            prime: self.prime,
        }
    }

    pub fn det(&self) -> BigRational {
        let n = self.dim();
        let mut a = self.rows.clone();
        let mut det = BigRational::one();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
                return BigRational::zero();
            };
            if piv != col {
                a.swap(piv, col);
                det = -det;
            }
            let pv = a[col][col].clone();
            det *= &pv;
            for r in col + 1..n {
                if a[r][col].is_zero() {
                    continue;
                }
                let f = &a[r][col] / &pv;
                for c in col..n {
                    let t = &f * &a[col][c];
                    a[r][c] -= t;
                }
            }
        }
        det
    }

    pub fn is_singular(&self) -> bool {
        self.det().is_zero()
    }

    pub fn inverse(&self) -> Result<LocalMatrix> {
        let n = self.dim();
        let mut a = self.rows.clone();
        let mut inv = LocalMatrix::identity(n, self.prime).rows;
        for col in 0..n {
            let piv = (col..n)
                .find(|&r| !a[r][col].is_zero())
                .ok_or(Error::DegenerateLattice)?;
            a.swap(piv, col);
            inv.swap(piv, col);
            let pv = a[col][col].clone();
            for c in 0..n {
                a[col][c] /= &pv;
                inv[col][c] /= &pv;
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for c in 0..n {
                    let t = &f * &a[col][c];
                    a[r][c] -= t;
                    let t = &f * &inv[col][c];
                    inv[r][c] -= t;
                }
            }
        }
        Ok(LocalMatrix {
            rows: inv,
            prime: self.prime,
        })
    }

    pub fn val_det(&self) -> Valuation {
        valuation(&self.det(), self.prime)
    }

    /// Minimal valuation over all entries.
    pub fn min_valuation(&self) -> Valuation {
        self.rows
            .iter()
            .flatten()
            .map(|x| valuation(x, self.prime))
            .min()
            .unwrap_or(Valuation::Infinite)
    }

    /// All entries lie in `Z_(p)`.
    pub fn is_integral(&self) -> bool {
        self.min_valuation() >= Valuation::Finite(0)
    }

    /// Valuations `a_1 <= ... <= a_n` of the invariant factors over `Z_(p)`.
    ///
    /// Elimination pivots on an entry of minimal valuation, ties going to the
    /// lowest `(row, column)`; the pivot valuations come out nondecreasing.
    pub fn smith_invariants(&self) -> Result<Vec<i64>> {
        let n = self.dim();
        let p = self.prime;
        let mut a = self.rows.clone();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut best: Option<(i64, usize, usize)> = None;
            for (i, row) in a.iter().enumerate().skip(k) {
                for (j, x) in row.iter().enumerate().skip(k) {
                    if let Valuation::Finite(v) = valuation(x, p) {
                        if best.is_none_or(|(bv, _, _)| v < bv) {
                            best = Some((v, i, j));
                        }
                    }
                }
            }
            let (v, pi, pj) = best.ok_or(Error::DegenerateLattice)?;
            a.swap(k, pi);
            for row in a.iter_mut() {
                row.swap(k, pj);
            }
            let pv = a[k][k].clone();
            for i in k + 1..n {
                if a[i][k].is_zero() {
                    continue;
                }
                let f = &a[i][k] / &pv;
                for j in k..n {
                    let t = &f * &a[k][j];
                    a[i][j] -= t;
                }
            }
            for j in k + 1..n {
                a[k][j] = BigRational::zero();
            }
            out.push(v);
        }
        Ok(out)
    }

    /// Canonical column form of the `Z_(p)`-span of the columns.
    ///
    /// Upper triangular, diagonal entries `p^{e_i}`, and every entry to the
    /// right of a pivot reduced into `Z[1/p] ∩ [0, p^{e_i})`. Two nonsingular
    /// matrices span the same lattice iff their forms coincide.
    pub fn hnf(&self) -> Result<LocalMatrix> {
        let n = self.dim();
        let p = self.prime;
        // Work on columns.
        let mut cols: Vec<Vec<BigRational>> = self.transpose().rows;
        let mut exps = vec![0i64; n];
        for i in (0..n).rev() {
            let mut best: Option<(i64, usize)> = None;
            for (j, col) in cols.iter().enumerate().take(i + 1) {
                if let Valuation::Finite(v) = valuation(&col[i], p) {
                    if best.is_none_or(|(bv, _)| v < bv) {
                        best = Some((v, j));
                    }
                }
            }
            let (e, pj) = best.ok_or(Error::DegenerateLattice)?;
            cols.swap(i, pj);
            let pv = cols[i][i].clone();
            for j in 0..i {
                if cols[j][i].is_zero() {
                    continue;
                }
                let f = &cols[j][i] / &pv;
                for r in 0..=i {
                    let t = &f * &cols[i][r];
                    cols[j][r] -= t;
                }
            }
            // Normalize the pivot to exactly p^e (multiply by a unit).
            let u = prime_power(p, e) / &pv;
            for x in cols[i].iter_mut() {
                *x *= &u;
            }
            exps[i] = e;
        }
        for j in 1..n {
            for i in (0..j).rev() {
                let r = reduce_mod_prime_power(&cols[j][i], p, exps[i]);
                if r == cols[j][i] {
                    continue;
                }
                let q = (&cols[j][i] - &r) / prime_power(p, exps[i]);
                for row in 0..=i {
                    let t = &q * &cols[i][row];
                    cols[j][row] -= t;
                }
                cols[j][i] = r;
            }
        }
        Ok(LocalMatrix {
            rows: cols,
            prime: p,
        }
        .transpose())
    }

    /// Characteristic polynomial `det(xI - A)`, coefficients in ascending degree.
    pub fn char_poly(&self) -> Vec<BigRational> {
        // Faddeev-LeVerrier; exact over Q.
        let n = self.dim();
        let mut coeffs = vec![BigRational::zero(); n + 1];
        coeffs[n] = BigRational::one();
        let mut m = LocalMatrix {
            rows: vec![vec![BigRational::zero(); n]; n],
            prime: self.prime,
        };
        for k in 1..=n {
            let mut next = self.mul(&m).expect("same shape");
            for i in 0..n {
                next.rows[i][i] += &coeffs[n - k + 1];
            }
            let am = self.mul(&next).expect("same shape");
            let trace: BigRational = (0..n).map(|i| am.rows[i][i].clone()).sum();
            coeffs[n - k] = -trace / BigRational::from_integer(BigInt::from(k));
            m = next;
        }
        coeffs
    }

    /// Entrywise residues in `F_p`; requires an integral matrix.
    pub fn residues(&self) -> Option<Vec<Vec<u64>>> {
        if !self.is_integral() {
            return None;
        }
        Some(
            self.rows
                .iter()
                .map(|r| r.iter().map(|x| residue(x, self.prime)).collect())
                .collect(),
        )
    }
}

impl fmt::Display for LocalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            let parts: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            f.write_str(&parts.join(" "))?;
        }
        Ok(())
    }
}

/// Convenience: `smith_invariants` as a free function.
pub fn smith_invariants(a: &LocalMatrix) -> Result<Vec<i64>> {
    a.smith_invariants()
}

/// Convenience: `hnf` as a free function.
pub fn hnf_local(a: &LocalMatrix) -> Result<LocalMatrix> {
    a.hnf()
}
