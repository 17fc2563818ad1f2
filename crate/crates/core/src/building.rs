//! Vertices of the affine building of `SL_n` over `Q_p`.
//!
//! A vertex is a homothety class of full-rank `Z_(p)`-lattices in `Q_p^n`,
//! equivalently the maximal order `End(Λ)`. Classes carry a canonical
//! representative so equality is structural.

use std::hash::{Hash, Hasher};

use num_rational::BigRational;
use num_traits::Zero;

use crate::dvr::{prime_power, valuation, LocalMatrix, Valuation};
use crate::error::{Error, Result};

/// Homothety class of a lattice whose basis is given by the columns of a matrix.
#[derive(Debug, Clone)]
pub struct LatticeClass {
    basis: LocalMatrix,
    canonical: LocalMatrix,
}

impl LatticeClass {
    pub fn new(basis: LocalMatrix) -> Result<Self> {
        let a1 = *basis.smith_invariants()?.first().expect("nonempty");
        let p = basis.prime();
        let canonical = basis.scale(&prime_power(p, -a1)).hnf()?;
        Ok(LatticeClass { basis, canonical })
    }

    /// The class of `Z_(p)^n`.
    pub fn standard(n: usize, prime: u64) -> Self {
        let id = LocalMatrix::identity(n, prime);
        LatticeClass {
            basis: id.clone(),
            canonical: id,
        }
    }

    pub fn basis(&self) -> &LocalMatrix {
        &self.basis
    }

    pub fn canonical(&self) -> &LocalMatrix {
        &self.canonical
    }

    pub fn prime(&self) -> u64 {
        self.canonical.prime()
    }

    pub fn dim(&self) -> usize {
        self.canonical.dim()
    }

    /// Type label with the standard lattice as type 0: `ord_p(det B) mod n`.
    pub fn type_label(&self) -> u64 {
        let v = self.canonical.val_det().finite().expect("nonsingular");
        v.rem_euclid(self.dim() as i64) as u64
    }

    /// The class of `g·Λ`.
    pub fn translate(&self, g: &LocalMatrix) -> Result<LatticeClass> {
        if g.is_singular() {
            return Err(Error::DegenerateLattice);
        }
        LatticeClass::new(g.mul(&self.canonical)?)
    }

    pub fn is_standard(&self) -> bool {
        self.canonical == LocalMatrix::identity(self.dim(), self.prime())
    }
}

impl PartialEq for LatticeClass {
    fn eq(&self, other: &Self) -> bool {
        self.canonical == other.canonical
    }
}

impl Eq for LatticeClass {}

impl Hash for LatticeClass {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical.hash(state);
    }
}

/// A basis `ω_1, ..., ω_n` (matrix columns) determining an apartment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApartmentFrame {
    basis: LocalMatrix,
}

impl ApartmentFrame {
    pub fn new(basis: LocalMatrix) -> Result<Self> {
        if basis.is_singular() {
            return Err(Error::DegenerateLattice);
        }
        Ok(ApartmentFrame { basis })
    }

    pub fn standard(n: usize, prime: u64) -> Self {
        ApartmentFrame {
            basis: LocalMatrix::identity(n, prime),
        }
    }

    pub fn basis(&self) -> &LocalMatrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn prime(&self) -> u64 {
        self.basis.prime()
    }
}

/// Exponent pattern `(m_1 <= ... <= m_n)` with `m_1 = 0`, standing for the
/// order `diag(p^m) M_n(O) diag(p^m)^{-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderPattern {
    m: Vec<i64>,
}

impl OrderPattern {
    /// Accepts any nondecreasing vector and shifts it so the first entry is 0.
    pub fn new(m: Vec<i64>) -> Result<Self> {
        if m.is_empty() {
            return Err(Error::Invalid("empty order pattern".into()));
        }
        if m.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Invalid(format!(
                "order pattern {m:?} is not nondecreasing"
            )));
        }
        let base = m[0];
        Ok(OrderPattern {
            m: m.into_iter().map(|x| x - base).collect(),
        })
    }

    pub fn exponents(&self) -> &[i64] {
        &self.m
    }

    pub fn is_trivial(&self) -> bool {
        self.m.iter().all(|&x| x == 0)
    }

    /// 1-based index of the first exponent that is at least 1.
    pub fn first_positive(&self) -> Option<usize> {
        self.m.iter().position(|&x| x >= 1).map(|i| i + 1)
    }
}

/// Type distance `td(L1, L2) ∈ Z/n` together with the invariant factors used.
///
/// `L2` is rescaled to the largest `p^e L2` inside `L1`; the returned
/// exponents `0 = a_1 <= ... <= a_n` are the invariant factors of that
/// sublattice in `L1`, and `td = Σ a_i mod n`.
pub fn type_distance_detail(l1: &LatticeClass, l2: &LatticeClass) -> Result<(u64, Vec<i64>)> {
    if l1.prime() != l2.prime() {
        return Err(Error::PrimeMismatch(l1.prime(), l2.prime()));
    }
    if l1.dim() != l2.dim() {
        return Err(Error::DimensionMismatch {
            expected: l1.dim(),
            found: l2.dim(),
        });
    }
    let rel = l1.canonical().inverse()?.mul(l2.canonical())?;
    let raw = rel.smith_invariants()?;
    let shift = raw[0];
    let inv: Vec<i64> = raw.iter().map(|a| a - shift).collect();
    let n = l1.dim() as i64;
    let td = inv.iter().sum::<i64>().rem_euclid(n) as u64;
    Ok((td, inv))
}

pub fn type_distance(l1: &LatticeClass, l2: &LatticeClass) -> Result<u64> {
    type_distance_detail(l1, l2).map(|(td, _)| td)
}

/// The vertex `[a_1, ..., a_n]` of the apartment: the class of `⊕ O p^{a_i} ω_i`.
pub fn vertex_from_coords(frame: &ApartmentFrame, a: &[i64]) -> Result<LatticeClass> {
    let p = BigRational::from_integer(frame.prime().into());
    vertex_from_coords_with_uniformizer(frame, a, &p)
}

/// Same as [`vertex_from_coords`] with an explicit uniformizer `π` (any
/// rational of valuation 1).
pub fn vertex_from_coords_with_uniformizer(
    frame: &ApartmentFrame,
    a: &[i64],
    uniformizer: &BigRational,
) -> Result<LatticeClass> {
    if a.len() != frame.dim() {
        return Err(Error::DimensionMismatch {
            expected: frame.dim(),
            found: a.len(),
        });
    }
    if valuation(uniformizer, frame.prime()) != Valuation::Finite(1) {
        return Err(Error::Invalid(format!(
            "{uniformizer} is not a uniformizer"
        )));
    }
    let diag = a.iter().map(|&ai| pow_signed(uniformizer, ai)).collect();
    let d = LocalMatrix::diagonal(frame.prime(), diag);
    LatticeClass::new(frame.basis().mul(&d)?)
}

fn pow_signed(x: &BigRational, e: i64) -> BigRational {
    let base = if e < 0 { x.recip() } else { x.clone() };
    num_traits::pow(base, e.unsigned_abs() as usize)
}

/// The vertices `Λ^{(k)} = O pω_1 ⊕ ... ⊕ O pω_k ⊕ O ω_{k+1} ⊕ ... ⊕ O ω_n`,
/// `k = 0..n-1`, of one chamber of the apartment.
pub fn chamber_vertices(frame: &ApartmentFrame) -> Result<Vec<LatticeClass>> {
    let n = frame.dim();
    (0..n)
        .map(|k| {
            let a: Vec<i64> = (0..n).map(|i| i64::from(i < k)).collect();
            vertex_from_coords(frame, &a)
        })
        .collect()
}

/// Does `X` preserve `Λ`, i.e. `X ∈ End_O(Λ)`?
pub fn end_contains(l: &LatticeClass, x: &LocalMatrix) -> Result<bool> {
    if x.prime() != l.prime() {
        return Err(Error::PrimeMismatch(l.prime(), x.prime()));
    }
    if x.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            found: x.dim(),
        });
    }
    let b = l.canonical();
    Ok(b.inverse()?.mul(x)?.mul(b)?.is_integral())
}

/// Is `val(X_ij) >= m_i - m_j` for all entries?
pub fn order_pattern_contains(pattern: &OrderPattern, x: &LocalMatrix) -> Result<bool> {
    let m = pattern.exponents();
    if x.dim() != m.len() {
        return Err(Error::DimensionMismatch {
            expected: m.len(),
            found: x.dim(),
        });
    }
    let p = x.prime();
    for (i, row) in x.rows().iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            if entry.is_zero() {
                continue;
            }
            if valuation(entry, p) < Valuation::Finite(m[i] - m[j]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
