//! Embedding of commutative orders into maximal orders of a degree-`p`
//! central simple algebra over an imaginary quadratic field: embeddability,
//! the class field conditions, and the resulting selectivity verdict.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{is_prime_u64, Primes};
use crate::classgroup::{primes_above, PrimeOfK};
use crate::error::{Error, Result};
use crate::genus::{rho, DeviationData, FpSpan, GenusElement, GenusGroup, Hyperplane};
use crate::relext::{
    conductor_support, primes_dividing, splitting_shape, OkElement, OrderSpec, QuadField,
    RelativeExtension, SplitShape,
};

/// Default number of rational primes sampled when deciding class field containment.
pub const DEFAULT_SAMPLE_BOUND: usize = 2000;
/// Default number of consecutive samples without change before accepting.
pub const DEFAULT_STABILIZATION: usize = 200;

/// The algebra `B`: degree `p` over `K = Q(√d)` with local index `p` at each prime of `ram`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraSpec {
    d: i64,
    p: u64,
    ram: Vec<PrimeOfK>,
}

impl AlgebraSpec {
    pub fn new(d: i64, p: u64, mut ram: Vec<PrimeOfK>) -> Result<Self> {
        if !crate::arith::is_fundamental_negative(d) {
            return Err(Error::NotFundamental(d));
        }
        if p == 2 || !is_prime_u64(p) {
            return Err(Error::NotOddPrime(p));
        }
        if let Some(nu) = ram.iter().find(|nu| nu.discriminant() != d) {
            return Err(Error::DiscriminantMismatch(
                nu.discriminant().to_string(),
                d.to_string(),
            ));
        }
        ram.sort();
        ram.dedup();
        Ok(AlgebraSpec { d, p, ram })
    }

    pub fn discriminant(&self) -> i64 {
        self.d
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn ram(&self) -> &[PrimeOfK] {
        &self.ram
    }
}

/// A yes/no answer that may be unavailable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Yes,
    No,
    Indeterminate(String),
}

impl Decision {
    pub fn is_yes(&self) -> bool {
        matches!(self, Decision::Yes)
    }

    pub fn is_determinate(&self) -> bool {
        !matches!(self, Decision::Indeterminate(_))
    }
}

/// One sampled prime of `K` with its splitting shape in `L` and, where
/// relevant, its image in the genus group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub prime: PrimeOfK,
    pub shape: SplitShape,
    pub class: Option<GenusElement>,
}

impl fmt::Display for Sample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.prime, self.shape)?;
        if let Some(c) = &self.class {
            write!(f, " {c}")?;
        }
        Ok(())
    }
}

/// `L/K` embeds into `B` iff no prime of `ram` has a local degree in `L` prime to `p`.
pub fn embeds_in_algebra(
    a: &AlgebraSpec,
    e: &RelativeExtension,
) -> Result<(Decision, Vec<Sample>)> {
    check_compatible(a, e)?;
    let p = a.p() as u32;
    let mut samples = Vec::new();
    for nu in a.ram() {
        let shape = splitting_shape(nu, e)?;
        samples.push(Sample {
            prime: nu.clone(),
            shape: shape.clone(),
            class: None,
        });
        if !shape.is_determinate() {
            return Ok((
                Decision::Indeterminate(format!("ramified prime {nu} divides disc(g)")),
                samples,
            ));
        }
        if !shape.is_inert(p) {
            return Ok((Decision::No, samples));
        }
    }
    Ok((Decision::Yes, samples))
}

fn check_compatible(a: &AlgebraSpec, e: &RelativeExtension) -> Result<()> {
    if a.discriminant() != e.discriminant_k() {
        return Err(Error::DiscriminantMismatch(
            a.discriminant().to_string(),
            e.discriminant_k().to_string(),
        ));
    }
    if a.p() != e.degree() {
        return Err(Error::DimensionMismatch {
            expected: a.p() as usize,
            found: e.degree() as usize,
        });
    }
    Ok(())
}

const ROOT_SEARCH_NORM_LIMIT: u64 = 1_000_000;

/// Evaluate `g(x)` in `O_K`.
fn eval_ok(k: &QuadField, g: &[OkElement], x: &OkElement) -> OkElement {
    g.iter()
        .rev()
        .fold(k.zero(), |acc, c| k.mul(&acc, x).add(c))
}

/// A root of `g` in `O_K`, found by listing all divisors of the constant term
/// when its norm is small enough. `Some(None)` means the search was exhaustive.
fn find_root(e: &RelativeExtension) -> Option<Option<OkElement>> {
    let k = e.field();
    let g = e.coefficients();
    let c0 = &g[0];
    if c0.is_zero() {
        return Some(Some(k.zero()));
    }
    let n0 = k
        .norm(c0)
        .to_u64()
        .filter(|&n| n <= ROOT_SEARCH_NORM_LIMIT)?;
    // N(u + vω) = (u + δv/2)^2 + |d| v^2 / 4 <= n0.
    let absd = k.discriminant().unsigned_abs();
    let vmax = (4 * n0 / absd).sqrt() as i64 + 1;
    let umax = n0.sqrt() as i64 + vmax + 1;
    for v in -vmax..=vmax {
        for u in -umax..=umax {
            let x = OkElement::new(u, v);
            let nx = k.norm(&x);
            if nx.is_zero() || nx > BigInt::from(n0) {
                continue;
            }
            if k.div_exact(c0, &x).is_some() && eval_ok(k, g, &x).is_zero() {
                return Some(Some(x));
            }
        }
    }
    Some(None)
}

/// Irreducibility of `g` over `K`.
///
/// A root in `O_K` (found by divisor search on the constant term) proves
/// reducibility; for `p = 3` an exhaustive root search without success proves
/// irreducibility. Otherwise the shapes at sampled primes constrain the
/// degrees of possible factors: a factor of degree `k` forces a sub-multiset
/// of every shape summing to `k`.
pub fn irreducibility_check(
    e: &RelativeExtension,
    bound: usize,
) -> Result<(Decision, Vec<Sample>)> {
    let p = e.degree() as usize;
    match find_root(e) {
        Some(Some(_)) => return Ok((Decision::No, Vec::new())),
        Some(None) if p == 3 => return Ok((Decision::Yes, Vec::new())),
        _ => {}
    }
    let d = e.discriminant_k();
    let mut possible = vec![true; p + 1];
    for ell in Primes::new().take(bound) {
        for nu in primes_above(ell, d)? {
            let shape = splitting_shape(&nu, e)?;
            if !shape.is_determinate() {
                continue;
            }
            let mut sums = vec![false; p + 1];
            sums[0] = true;
            for &deg in &shape.degrees {
                let deg = deg as usize;
                for s in (deg..=p).rev() {
                    sums[s] |= sums[s - deg];
                }
            }
            for (k, ok) in possible.iter_mut().enumerate() {
                *ok &= sums.get(k).copied().unwrap_or(false) || k == 0 || k == p;
            }
            if (1..p).all(|k| !possible[k]) {
                let sample = Sample {
                    prime: nu,
                    shape,
                    class: None,
                };
                return Ok((Decision::Yes, vec![sample]));
            }
        }
    }
    Ok((
        Decision::Indeterminate(format!(
            "no irreducibility certificate among {bound} primes"
        )),
        Vec::new(),
    ))
}

/// Why `L` is not contained in the class field `K(R)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NonContainment {
    /// The genus group is trivial, so `K(R) = K`.
    TrivialGenus,
    /// A prime with a mixed shape: `L/K` is not Galois.
    MixedShape(Sample),
    /// A prime with trivial class in the genus group that does not split completely.
    TrivialClassNotSplit(Sample),
    /// A prime of `K` ramified in `L` (odd valuation of `disc(g)`).
    Ramified(PrimeOfK),
    /// An inert prime whose class lies in the span of classes of split primes.
    InertInSplitSpan(Sample),
    /// Split primes already generate the whole genus group.
    SplitSpanIsEverything,
}

impl fmt::Display for NonContainment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NonContainment::TrivialGenus => f.write_str("genus group is trivial"),
            NonContainment::MixedShape(s) => write!(f, "mixed splitting shape at {s}"),
            NonContainment::TrivialClassNotSplit(s) => {
                write!(
                    f,
                    "prime with trivial genus class does not split completely: {s}"
                )
            }
            NonContainment::Ramified(nu) => write!(f, "{nu} ramifies in L"),
            NonContainment::InertInSplitSpan(s) => {
                write!(f, "inert prime has class generated by split primes: {s}")
            }
            NonContainment::SplitSpanIsEverything => {
                f.write_str("classes of completely split primes generate the genus group")
            }
        }
    }
}

/// Outcome of the test `L ⊆ K(R)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Containment {
    /// `H_L` is the kernel of the functional; accepted after the subgroup
    /// stayed unchanged for the configured number of samples.
    Contained {
        h_l: Hyperplane,
        stable_for: usize,
    },
    NotContained(NonContainment),
    Indeterminate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingOptions {
    /// Number of rational primes to scan.
    pub bound: usize,
    /// Consecutive samples without change required to accept.
    pub stabilization: usize,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions {
            bound: DEFAULT_SAMPLE_BOUND,
            stabilization: DEFAULT_STABILIZATION,
        }
    }
}

/// Decide whether `L` lies in the class field of the genus group.
///
/// Negative answers carry finite certificates. A positive answer means the
/// span of classes of completely split primes reached index `p` and stayed
/// unchanged for `stabilization` consecutive samples, with every inert prime
/// seen lying outside it.
pub fn class_field_membership(
    g: &GenusGroup,
    e: &RelativeExtension,
    opts: &SamplingOptions,
) -> Result<(Containment, Vec<Sample>)> {
    if g.discriminant() != e.discriminant_k() {
        return Err(Error::DiscriminantMismatch(
            g.discriminant().to_string(),
            e.discriminant_k().to_string(),
        ));
    }
    let p = g.p() as u32;
    let m = g.rank();
    let mut trace = Vec::new();
    if m == 0 {
        return Ok((
            Containment::NotContained(NonContainment::TrivialGenus),
            trace,
        ));
    }
    if let Ok(divisors) = primes_dividing(e.discriminant_k(), e.disc_g()) {
        if let Some((nu, _)) = divisors.into_iter().find(|(_, v)| v % 2 == 1) {
            return Ok((
                Containment::NotContained(NonContainment::Ramified(nu)),
                trace,
            ));
        }
    }
    for nu in g.ram() {
        let shape = splitting_shape(nu, e)?;
        if shape.is_determinate() && !shape.splits_completely(p) {
            let s = Sample {
                prime: nu.clone(),
                shape,
                class: Some(g.identity()),
            };
            return Ok((
                Containment::NotContained(NonContainment::TrivialClassNotSplit(s)),
                trace,
            ));
        }
    }

    let mut split_span = FpSpan::new(g.p(), m);
    let mut inert_classes: Vec<GenusElement> = Vec::new();
    let mut stable = 0usize;
    for ell in Primes::new().take(opts.bound) {
        for nu in primes_above(ell, g.discriminant())? {
            let shape = splitting_shape(&nu, e)?;
            if !shape.is_determinate() {
                continue;
            }
            let class = g.class_of_prime(&nu)?;
            let sample = Sample {
                prime: nu,
                shape: shape.clone(),
                class: Some(class.clone()),
            };
            trace.push(sample.clone());
            if shape.is_mixed(p) {
                return Ok((
                    Containment::NotContained(NonContainment::MixedShape(sample)),
                    trace,
                ));
            }
            let mut grew = false;
            if shape.splits_completely(p) {
                grew = split_span.insert(&class.coords);
                if split_span.rank() == m {
                    return Ok((
                        Containment::NotContained(NonContainment::SplitSpanIsEverything),
                        trace,
                    ));
                }
            } else if class.is_identity() {
                return Ok((
                    Containment::NotContained(NonContainment::TrivialClassNotSplit(sample)),
                    trace,
                ));
            } else {
                inert_classes.push(class);
            }
            if let Some(bad) = inert_classes
                .iter()
                .find(|c| split_span.contains(&c.coords))
            {
                let witness = trace
                    .iter()
                    .rev()
                    .find(|s| s.class.as_ref() == Some(bad) && !s.shape.splits_completely(p))
                    .cloned()
                    .expect("inert sample recorded");
                return Ok((
                    Containment::NotContained(NonContainment::InertInSplitSpan(witness)),
                    trace,
                ));
            }
            if split_span.rank() + 1 == m {
                stable = if grew { 0 } else { stable + 1 };
                if stable >= opts.stabilization && !inert_classes.is_empty() {
                    let phi = split_span.annihilator().expect("rank m - 1");
                    let h_l = Hyperplane::new(g.p(), phi)?;
                    return Ok((
                        Containment::Contained {
                            h_l,
                            stable_for: stable,
                        },
                        trace,
                    ));
                }
            }
        }
    }
    let reason = format!(
        "split-prime span has rank {} of {m} after {} samples; {} consecutive unchanged of {} required",
        split_span.rank(),
        trace.len(),
        stable,
        opts.stabilization
    );
    Ok((Containment::Indeterminate(reason), trace))
}

/// Share of the isomorphism classes of maximal orders containing a conjugate of `Ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fraction {
    None,
    All,
    OneOverP(u64),
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fraction::None => f.write_str("0"),
            Fraction::All => f.write_str("1"),
            Fraction::OneOverP(p) => write!(f, "1/{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// `L` does not embed in `B`, so no maximal order contains `Ω`.
    NotEmbeddable,
    /// Every maximal order contains a conjugate of `Ω`.
    EmbedsInAll,
    /// Exactly `1/p` of the classes do.
    Selective,
    Indeterminate(String),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::NotEmbeddable => f.write_str("not-embeddable"),
            Outcome::EmbedsInAll => f.write_str("embeds-in-all"),
            Outcome::Selective => f.write_str("selective"),
            Outcome::Indeterminate(r) => write!(f, "indeterminate: {r}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SelectivityVerdict {
    pub outcome: Outcome,
    pub irreducible: Decision,
    pub embeds: Decision,
    pub cond1: Option<Containment>,
    pub cond2: Option<Decision>,
    pub conductor: Vec<PrimeOfK>,
    pub genus: GenusGroup,
    pub certificates: Vec<Sample>,
}

impl SelectivityVerdict {
    pub fn selective(&self) -> bool {
        self.outcome == Outcome::Selective
    }

    /// `None` when the outcome is indeterminate.
    pub fn fraction(&self) -> Option<Fraction> {
        match self.outcome {
            Outcome::NotEmbeddable => Some(Fraction::None),
            Outcome::EmbedsInAll => Some(Fraction::All),
            Outcome::Selective => Some(Fraction::OneOverP(self.genus.p())),
            Outcome::Indeterminate(_) => None,
        }
    }

    pub fn h_l(&self) -> Option<&Hyperplane> {
        match &self.cond1 {
            Some(Containment::Contained { h_l, .. }) => Some(h_l),
            _ => None,
        }
    }
}

/// Decide whether `Ω` is selective in `B`.
///
/// `Ω` is selective iff `L` embeds in `B`, `L ⊆ K(R)`, and every prime
/// dividing the norm of the conductor splits completely in `L`; the last is
/// read off from the class of the prime relative to `H_L`.
pub fn selectivity_verdict(
    a: &AlgebraSpec,
    spec: &OrderSpec,
    e: &RelativeExtension,
    g: &GenusGroup,
    opts: &SamplingOptions,
) -> Result<SelectivityVerdict> {
    check_compatible(a, e)?;
    if g.discriminant() != a.discriminant() || g.p() != a.p() || g.ram() != a.ram() {
        return Err(Error::Invalid(
            "genus group does not belong to the algebra".into(),
        ));
    }
    let mut verdict = SelectivityVerdict {
        outcome: Outcome::Indeterminate(String::new()),
        irreducible: Decision::Indeterminate(String::new()),
        embeds: Decision::Indeterminate(String::new()),
        cond1: None,
        cond2: None,
        conductor: Vec::new(),
        genus: g.clone(),
        certificates: Vec::new(),
    };
    let (irr, certs) = irreducibility_check(e, opts.bound)?;
    verdict.certificates.extend(certs);
    verdict.irreducible = irr.clone();
    match irr {
        Decision::No => return Err(Error::InvalidPolynomial("g is reducible over K".into())),
        Decision::Indeterminate(r) => {
            verdict.outcome = Outcome::Indeterminate(r);
            return Ok(verdict);
        }
        Decision::Yes => {}
    }
    let (emb, certs) = embeds_in_algebra(a, e)?;
    verdict.certificates.extend(certs);
    verdict.embeds = emb.clone();
    match emb {
        Decision::No => {
            verdict.outcome = Outcome::NotEmbeddable;
            return Ok(verdict);
        }
        Decision::Indeterminate(r) => {
            verdict.outcome = Outcome::Indeterminate(r);
            return Ok(verdict);
        }
        Decision::Yes => {}
    }
    let (cond1, trace) = class_field_membership(g, e, opts)?;
    verdict.certificates.extend(trace);
    verdict.cond1 = Some(cond1.clone());
    let h_l = match cond1 {
        Containment::NotContained(_) => {
            verdict.outcome = Outcome::EmbedsInAll;
            return Ok(verdict);
        }
        Containment::Indeterminate(r) => {
            verdict.outcome = Outcome::Indeterminate(r);
            return Ok(verdict);
        }
        Containment::Contained { h_l, .. } => h_l,
    };
    let support = conductor_support(spec, e)?;
    verdict.conductor = support.primes.clone();
    let mut all_split = true;
    for nu in &support.primes {
        if !h_l.contains(&g.class_of_prime(nu)?) {
            all_split = false;
        }
    }
    verdict.cond2 = Some(if all_split {
        Decision::Yes
    } else {
        Decision::No
    });
    verdict.outcome = if all_split {
        Outcome::Selective
    } else {
        Outcome::EmbedsInAll
    };
    Ok(verdict)
}

/// Does the maximal order presented by `dev` contain a conjugate of `Ω`?
pub fn admits_order(v: &SelectivityVerdict, dev: &DeviationData) -> Result<bool> {
    match &v.outcome {
        Outcome::Indeterminate(r) => Err(Error::Indeterminate(r.clone())),
        Outcome::NotEmbeddable => Ok(false),
        Outcome::EmbedsInAll => Ok(true),
        Outcome::Selective => {
            let h_l = v.h_l().expect("selective verdicts carry H_L");
            let r = rho(&DeviationData::empty(v.genus.p() as usize), dev, &v.genus)?;
            Ok(h_l.contains(&r))
        }
    }
}
