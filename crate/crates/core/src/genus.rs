//! The genus group of a maximal order in a degree-`p` central simple algebra
//! over `K`, realized as `C_K / (C_K^p · ⟨ramified classes⟩)`, together with
//! the distance map `ρ` between maximal orders presented by local deviations.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::arith::Primes;
use crate::building::{chamber_vertices, type_distance, ApartmentFrame, LatticeClass};
use crate::classgroup::{prime_of_k, ClassGroup, PrimeKind, PrimeOfK, QuadForm};
use crate::error::{Error, Result};
use crate::relext::{splitting_shape, RelativeExtension};

/// Default number of rational primes scanned when looking for generators.
pub const DEFAULT_GENERATOR_BOUND: usize = 10_000;

fn inv_p(a: u64, p: u64) -> u64 {
    crate::arith::inv_mod(a % p, p)
}

/// A subspace of `F_p^k` kept in reduced row echelon form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpSpan {
    p: u64,
    dim: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl FpSpan {
    pub fn new(p: u64, dim: usize) -> Self {
        FpSpan {
            p,
            dim,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Reduce `v` modulo the span; the result vanishes on pivot coordinates.
    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut v: Vec<u64> = v.iter().map(|x| x % p).collect();
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            let f = v[c];
            if f != 0 {
                for (x, r) in v.iter_mut().zip(row) {
                    *x = (*x + (p - f) * r) % p;
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Add `v`; returns whether the rank grew.
    pub fn insert(&mut self, v: &[u64]) -> bool {
        let p = self.p;
        let mut r = self.reduce(v);
        let Some(c) = r.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = inv_p(r[c], p);
        for x in r.iter_mut() {
            *x = *x * inv % p;
        }
        for row in self.rows.iter_mut() {
            let f = row[c];
            if f != 0 {
                for (x, y) in row.iter_mut().zip(&r) {
                    *x = (*x + (p - f) * y) % p;
                }
            }
        }
        let at = self.pivots.partition_point(|&q| q < c);
        self.rows.insert(at, r);
        self.pivots.insert(at, c);
        true
    }

    /// For a hyperplane (rank `dim - 1`), a nonzero functional vanishing on it.
    pub fn annihilator(&self) -> Option<Vec<u64>> {
        if self.rank() + 1 != self.dim {
            return None;
        }
        let p = self.p;
        let free = (0..self.dim).find(|c| !self.pivots.contains(c))?;
        // Kernel vector of the row space's orthogonal complement: the functional
        // phi with phi(free) = 1 and phi(pivot_i) = -row_i[free].
        let mut phi = vec![0u64; self.dim];
        phi[free] = 1;
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            phi[c] = (p - row[free] % p) % p;
        }
        Some(phi)
    }
}

/// An element of the genus group in canonical coordinates, with the
/// smallest reduced form of its coset as representative.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenusElement {
    pub coords: Vec<u64>,
    pub rep: QuadForm,
}

impl GenusElement {
    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for GenusElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {}", self.coords, self.rep)
    }
}

/// A subgroup of index `p` in the genus group: the kernel of `phi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperplane {
    pub p: u64,
    pub phi: Vec<u64>,
}

impl Hyperplane {
    pub fn new(p: u64, phi: Vec<u64>) -> Result<Self> {
        if phi.iter().all(|&x| x % p == 0) {
            return Err(Error::Invalid(
                "zero functional does not define a hyperplane".into(),
            ));
        }
        Ok(Hyperplane {
            p,
            phi: phi.into_iter().map(|x| x % p).collect(),
        })
    }

    pub fn eval(&self, coords: &[u64]) -> u64 {
        self.phi
            .iter()
            .zip(coords)
            .map(|(a, b)| a * b % self.p)
            .sum::<u64>()
            % self.p
    }

    pub fn contains(&self, g: &GenusElement) -> bool {
        self.eval(&g.coords) == 0
    }
}

#[derive(Debug, Clone)]
pub struct GenusGroup {
    base: ClassGroup,
    p: u64,
    ram: Vec<PrimeOfK>,
    pcoords: Vec<usize>,
    relations: FpSpan,
    free: Vec<usize>,
    reps: HashMap<Vec<u64>, QuadForm>,
}

/// `C_K / (C_K^p · ⟨classes of ram⟩)` for an odd prime `p`.
pub fn genus_group(base: &ClassGroup, p: u64, ram: &[PrimeOfK]) -> Result<GenusGroup> {
    if p == 2 || !crate::arith::is_prime_u64(p) {
        return Err(Error::NotOddPrime(p));
    }
    for nu in ram {
        if nu.discriminant() != base.discriminant() {
            return Err(Error::DiscriminantMismatch(
                nu.discriminant().to_string(),
                base.discriminant().to_string(),
            ));
        }
    }
    let pcoords: Vec<usize> = base
        .invariants()
        .iter()
        .enumerate()
        .filter(|(_, &n)| n % p == 0)
        .map(|(i, _)| i)
        .collect();
    let mut relations = FpSpan::new(p, pcoords.len());
    let mut ram_sorted = ram.to_vec();
    ram_sorted.sort();
    ram_sorted.dedup();
    let mut g = GenusGroup {
        base: base.clone(),
        p,
        ram: ram_sorted,
        pcoords,
        relations: FpSpan::new(p, 0),
        free: Vec::new(),
        reps: HashMap::new(),
    };
    for nu in &g.ram {
        relations.insert(&g.raw_vector(&nu.class_or_principal())?);
    }
    g.free = (0..relations.ambient_dim())
        .filter(|c| !relations.pivots().contains(c))
        .collect();
    g.relations = relations;
    let mut reps: HashMap<Vec<u64>, QuadForm> = HashMap::new();
    for f in base.elements() {
        let c = g.coords_of(f)?;
        let better = reps.get(&c).is_none_or(|r| f < r);
        if better {
            reps.insert(c, f.clone());
        }
    }
    g.reps = reps;
    Ok(g)
}

impl GenusGroup {
    pub fn base(&self) -> &ClassGroup {
        &self.base
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn discriminant(&self) -> i64 {
        self.base.discriminant()
    }

    pub fn ram(&self) -> &[PrimeOfK] {
        &self.ram
    }

    pub fn is_ramified(&self, nu: &PrimeOfK) -> bool {
        self.ram.binary_search(nu).is_ok()
    }

    /// `m` with `|G| = p^m`.
    pub fn rank(&self) -> usize {
        self.free.len()
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.rank() as u32)
    }

    fn raw_vector(&self, f: &QuadForm) -> Result<Vec<u64>> {
        let x = self.base.dlog(f)?;
        Ok(self.pcoords.iter().map(|&i| x[i] % self.p).collect())
    }

    fn coords_of(&self, f: &QuadForm) -> Result<Vec<u64>> {
        let r = self.relations.reduce(&self.raw_vector(f)?);
        Ok(self.free.iter().map(|&c| r[c]).collect())
    }

    fn element(&self, coords: Vec<u64>) -> GenusElement {
        let rep = self
            .reps
            .get(&coords)
            .cloned()
            .expect("every coset is represented");
        GenusElement { coords, rep }
    }

    pub fn identity(&self) -> GenusElement {
        self.element(vec![0; self.rank()])
    }

    pub fn class_of_form(&self, f: &QuadForm) -> Result<GenusElement> {
        Ok(self.element(self.coords_of(f)?))
    }

    /// Image of a prime of `K`; inert primes are principal.
    pub fn class_of_prime(&self, nu: &PrimeOfK) -> Result<GenusElement> {
        if nu.discriminant() != self.discriminant() {
            return Err(Error::DiscriminantMismatch(
                nu.discriminant().to_string(),
                self.discriminant().to_string(),
            ));
        }
        self.class_of_form(&nu.class_or_principal())
    }

    pub fn from_coords(&self, coords: &[u64]) -> Result<GenusElement> {
        if coords.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                found: coords.len(),
            });
        }
        Ok(self.element(coords.iter().map(|c| c % self.p).collect()))
    }

    pub fn compose(&self, a: &GenusElement, b: &GenusElement) -> GenusElement {
        let c = a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| (x + y) % self.p)
            .collect();
        self.element(c)
    }

    pub fn pow(&self, a: &GenusElement, e: i64) -> GenusElement {
        let e = e.rem_euclid(self.p as i64) as u64;
        self.element(a.coords.iter().map(|x| x * e % self.p).collect())
    }

    /// All `p^m` elements in lexicographic coordinate order.
    pub fn elements(&self) -> Vec<GenusElement> {
        let mut out: Vec<GenusElement> =
            self.reps.keys().map(|c| self.element(c.clone())).collect();
        out.sort();
        out
    }
}

/// A maximal order in the genus presented by the local lattices (up to
/// homothety) where it differs from the reference `M_p(O_K)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationData {
    dim: usize,
    entries: BTreeMap<PrimeOfK, LatticeClass>,
}

impl DeviationData {
    pub fn empty(dim: usize) -> Self {
        DeviationData {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Deviations live at primes of `K` split over `Q`, where `K_ν = Q_ℓ`.
    pub fn insert(&mut self, nu: PrimeOfK, lattice: LatticeClass) -> Result<()> {
        check_deviation_prime(&nu)?;
        if lattice.prime() != nu.ell() {
            return Err(Error::PrimeMismatch(nu.ell(), lattice.prime()));
        }
        if lattice.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: lattice.dim(),
            });
        }
        if lattice.is_standard() {
            self.entries.remove(&nu);
        } else {
            self.entries.insert(nu, lattice);
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PrimeOfK, &LatticeClass)> {
        self.entries.iter()
    }

    /// The local lattice at `nu`; the standard lattice when absent.
    pub fn lattice_at(&self, nu: &PrimeOfK) -> LatticeClass {
        self.entries
            .get(nu)
            .cloned()
            .unwrap_or_else(|| LatticeClass::standard(self.dim, nu.ell()))
    }
}

fn check_deviation_prime(nu: &PrimeOfK) -> Result<()> {
    match nu.kind() {
        PrimeKind::Split => Ok(()),
        PrimeKind::Inert => Err(Error::InertDeviation(nu.ell())),
        PrimeKind::Ramified => Err(Error::UnsupportedDeviation(nu.ell())),
    }
}

/// `ρ(R_1, R_2) = ∏_ν [ν]^{td_ν(R_1ν, R_2ν)}` in the genus group.
pub fn rho(dev1: &DeviationData, dev2: &DeviationData, g: &GenusGroup) -> Result<GenusElement> {
    if dev1.dim() != dev2.dim() {
        return Err(Error::DimensionMismatch {
            expected: dev1.dim(),
            found: dev2.dim(),
        });
    }
    if dev1.dim() as u64 != g.p() {
        return Err(Error::DimensionMismatch {
            expected: g.p() as usize,
            found: dev1.dim(),
        });
    }
    let mut primes: Vec<&PrimeOfK> = dev1.entries.keys().chain(dev2.entries.keys()).collect();
    primes.sort();
    primes.dedup();
    let mut acc = g.identity();
    for nu in primes {
        check_deviation_prime(nu)?;
        if g.is_ramified(nu) {
            continue;
        }
        let td = type_distance(&dev1.lattice_at(nu), &dev2.lattice_at(nu))?;
        if td != 0 {
            acc = g.compose(&acc, &g.pow(&g.class_of_prime(nu)?, td as i64));
        }
    }
    Ok(acc)
}

/// Find `m` degree-one primes whose classes form a basis of the genus group.
///
/// With `h_l`, the first prime has class outside the hyperplane and the rest
/// lie inside it. When `ext` is given, primes dividing `disc(g)` are skipped
/// and, under `h_l`, each chosen prime's splitting shape is checked against
/// its membership (inert outside, split completely inside).
pub fn choose_generators(
    g: &GenusGroup,
    ext: Option<&RelativeExtension>,
    h_l: Option<&Hyperplane>,
    avoid: &[PrimeOfK],
    bound: usize,
) -> Result<Vec<PrimeOfK>> {
    let m = g.rank();
    if m == 0 {
        return Ok(Vec::new());
    }
    let d = g.discriminant();
    let p = g.p() as u32;
    let mut span = FpSpan::new(g.p(), m);
    let mut chosen = Vec::new();
    for ell in Primes::new().take(bound) {
        if crate::arith::kronecker(d, ell) != 1 {
            continue;
        }
        for which in 0..2u8 {
            let nu = prime_of_k(ell, d, which)?;
            if avoid.contains(&nu) || g.is_ramified(&nu) {
                continue;
            }
            let class = g.class_of_prime(&nu)?;
            let first = chosen.is_empty();
            if h_l.is_some_and(|h| h.contains(&class) == first) {
                continue;
            }
            let mut trial = span.clone();
            if !trial.insert(&class.coords) {
                continue;
            }
            if let Some(e) = ext {
                let shape = splitting_shape(&nu, e)?;
                if !shape.is_determinate() {
                    continue;
                }
                let consistent = if first {
                    shape.is_inert(p)
                } else {
                    shape.splits_completely(p)
                };
                if h_l.is_some() && !consistent {
                    return Err(Error::Invalid(format!(
                        "prime {nu} has shape {shape}, inconsistent with the given subgroup"
                    )));
                }
            }
            span = trial;
            chosen.push(nu);
            if chosen.len() == m {
                return Ok(chosen);
            }
        }
    }
    Err(Error::SearchBoundExceeded {
        scanned: bound,
        what: format!("found {} of {m} generator primes", chosen.len()),
    })
}

/// The deviation `D^γ`: at `ν_i` the vertex `Λ^{(γ_i)}` of the chamber of `frame_i`.
pub fn parametrization(
    g: &GenusGroup,
    gens: &[PrimeOfK],
    frames: &[ApartmentFrame],
    gamma: &[u64],
) -> Result<DeviationData> {
    let m = g.rank();
    for len in [gens.len(), frames.len(), gamma.len()] {
        if len != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: len,
            });
        }
    }
    let p = g.p();
    let mut dev = DeviationData::empty(p as usize);
    for ((nu, frame), &gi) in gens.iter().zip(frames).zip(gamma) {
        if gi >= p {
            return Err(Error::Invalid(format!(
                "gamma entry {gi} is not reduced mod {p}"
            )));
        }
        if frame.prime() != nu.ell() {
            return Err(Error::PrimeMismatch(nu.ell(), frame.prime()));
        }
        if frame.dim() as u64 != p {
            return Err(Error::DimensionMismatch {
                expected: p as usize,
                found: frame.dim(),
            });
        }
        let chamber = chamber_vertices(frame)?;
        if !chamber[0].is_standard() {
            return Err(Error::FrameOffReference(nu.ell()));
        }
        if gi != 0 {
            dev.insert(nu.clone(), chamber[gi as usize].clone())?;
        }
    }
    Ok(dev)
}

/// Standard frames at each generator prime.
pub fn standard_frames(g: &GenusGroup, gens: &[PrimeOfK]) -> Vec<ApartmentFrame> {
    gens.iter()
        .map(|nu| ApartmentFrame::standard(g.p() as usize, nu.ell()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classgroup::class_group;

    #[test]
    fn genus_examples() {
        let cg = class_group(-23).unwrap();
        let g = genus_group(&cg, 3, &[]).unwrap();
        assert_eq!((g.order(), g.rank()), (3, 1));
        let g4 = genus_group(&class_group(-4).unwrap(), 3, &[]).unwrap();
        assert_eq!(g4.rank(), 0);
        let nu2 = prime_of_k(2, -23, 0).unwrap();
        let gr = genus_group(&cg, 3, &[nu2]).unwrap();
        assert_eq!(gr.order(), 1);
        assert!(genus_group(&cg, 2, &[]).is_err());
    }

    #[test]
    fn span_annihilator() {
        let mut s = FpSpan::new(5, 3);
        assert!(s.insert(&[1, 2, 3]));
        assert!(s.insert(&[0, 1, 4]));
        assert!(!s.insert(&[2, 5, 10]));
        let phi = s.annihilator().unwrap();
        let h = Hyperplane::new(5, phi).unwrap();
        assert_eq!(h.eval(&[1, 2, 3]), 0);
        assert_eq!(h.eval(&[0, 1, 4]), 0);
        assert_ne!(h.eval(&[0, 0, 1]), 0);
    }

    #[test]
    fn generators_and_parametrization() {
        let cg = class_group(-23).unwrap();
        let g = genus_group(&cg, 3, &[]).unwrap();
        let gens = choose_generators(&g, None, None, &[], 100).unwrap();
        assert_eq!(gens, vec![prime_of_k(2, -23, 0).unwrap()]);
        let frames = standard_frames(&g, &gens);
        let devs: Vec<DeviationData> = (0..3)
            .map(|k| parametrization(&g, &gens, &frames, &[k]).unwrap())
            .collect();
        assert!(devs[0].is_empty());
        let empty = DeviationData::empty(3);
        let class = g.class_of_prime(&gens[0]).unwrap();
        for (k, dev) in devs.iter().enumerate() {
            assert_eq!(rho(&empty, dev, &g).unwrap(), g.pow(&class, k as i64));
        }
    }

    #[test]
    fn inert_deviation_rejected() {
        let mut dev = DeviationData::empty(3);
        let nu5 = prime_of_k(5, -23, 0).unwrap();
        let l = LatticeClass::new(crate::dvr::LocalMatrix::prime_power_diagonal(5, &[1, 0, 0]))
            .unwrap();
        assert_eq!(dev.insert(nu5, l), Err(Error::InertDeviation(5)));
    }
}
