//! Job file schemas. Every number is a decimal string so values never pass
//! through a 64-bit float on the way in.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Deserialize;

use selorder::building::{ApartmentFrame, LatticeClass};
use selorder::classgroup::{prime_of_k, PrimeOfK};
use selorder::relext::{OkElement, OrderSpec, RelativeExtension};
use selorder::LocalMatrix;

use crate::CliError;

pub type Matrix = Vec<Vec<String>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TdJob {
    pub prime: String,
    pub l1: Matrix,
    pub l2: Matrix,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChamberJob {
    pub prime: String,
    pub frame: Matrix,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassGroupJob {
    pub d: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitJob {
    pub d: String,
    pub g: Vec<Coeff>,
    pub prime: PrimeRef,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoJob {
    pub d: String,
    pub p: String,
    #[serde(default)]
    pub ram: Vec<PrimeRef>,
    #[serde(default)]
    pub dev1: Vec<Deviation>,
    #[serde(default)]
    pub dev2: Vec<Deviation>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictJob {
    pub d: String,
    pub p: String,
    #[serde(default)]
    pub ram: Vec<PrimeRef>,
    pub g: Vec<Coeff>,
    pub order: OrderJob,
    pub bound: Option<String>,
    pub stabilization: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametrizeJob {
    pub d: String,
    pub p: String,
    #[serde(default)]
    pub ram: Vec<PrimeRef>,
    /// With `g` and `order`, generators respect `H_L` and each class is
    /// marked admissible or not.
    pub g: Option<Vec<Coeff>>,
    pub order: Option<OrderJob>,
    pub bound: Option<String>,
    pub stabilization: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimeRef {
    pub ell: String,
    #[serde(default)]
    pub which: u8,
}

/// `"u"` or `["u", "v"]` for `u + vω`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Int(String),
    Pair(String, String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "family", rename_all = "lowercase")]
pub enum OrderJob {
    Monogenic {
        #[serde(default)]
        assume_unramified: bool,
    },
    Multiplier {
        nu: PrimeRef,
    },
}

/// A local lattice at a split prime, as a basis matrix or as apartment
/// coordinates over the standard frame.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Deviation {
    pub prime: PrimeRef,
    pub basis: Option<Matrix>,
    pub coords: Option<Vec<String>>,
}

pub fn int<T: FromStr>(s: &str, field: &str) -> Result<T, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Input(format!("{field}: cannot parse {s:?} as an integer")))
}

pub fn rational(s: &str, field: &str) -> Result<BigRational, CliError> {
    let s = s.trim();
    let parsed = match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = int(n, field)?;
            let d: BigInt = int(d, field)?;
            if d == BigInt::from(0) {
                return Err(CliError::Input(format!(
                    "{field}: zero denominator in {s:?}"
                )));
            }
            BigRational::new(n, d)
        }
        None => BigRational::from_integer(int(s, field)?),
    };
    Ok(parsed)
}

pub fn matrix(m: &Matrix, prime: u64, field: &str) -> Result<LocalMatrix, CliError> {
    let rows = m
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| rational(x, field))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LocalMatrix::new(prime, rows)?)
}

pub fn prime(r: &PrimeRef, d: i64) -> Result<PrimeOfK, CliError> {
    Ok(prime_of_k(int(&r.ell, "prime.ell")?, d, r.which)?)
}

pub fn primes(rs: &[PrimeRef], d: i64) -> Result<Vec<PrimeOfK>, CliError> {
    rs.iter().map(|r| prime(r, d)).collect()
}

pub fn extension(d: i64, p: Option<u64>, g: &[Coeff]) -> Result<RelativeExtension, CliError> {
    let coeffs = g
        .iter()
        .map(|c| match c {
            Coeff::Int(u) => Ok(OkElement::from_int(int::<BigInt>(u, "g")?)),
            Coeff::Pair(u, v) => Ok(OkElement::new(
                int::<BigInt>(u, "g")?,
                int::<BigInt>(v, "g")?,
            )),
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let degree = p.unwrap_or(coeffs.len().saturating_sub(1) as u64);
    Ok(RelativeExtension::new(d, degree, coeffs)?)
}

pub fn order(o: &OrderJob, d: i64) -> Result<OrderSpec, CliError> {
    Ok(match o {
        OrderJob::Monogenic { assume_unramified } => OrderSpec::Monogenic {
            assume_unramified: *assume_unramified,
        },
        OrderJob::Multiplier { nu } => OrderSpec::Multiplier { nu: prime(nu, d)? },
    })
}

pub fn deviation_lattice(
    dev: &Deviation,
    nu: &PrimeOfK,
    dim: usize,
) -> Result<LatticeClass, CliError> {
    match (&dev.basis, &dev.coords) {
        (Some(b), None) => Ok(LatticeClass::new(matrix(b, nu.ell(), "basis")?)?),
        (None, Some(c)) => {
            let a = c
                .iter()
                .map(|x| int(x, "coords"))
                .collect::<Result<Vec<i64>, _>>()?;
            let frame = ApartmentFrame::standard(dim, nu.ell());
            Ok(selorder::building::vertex_from_coords(&frame, &a)?)
        }
        _ => Err(CliError::Input(
            "deviation needs exactly one of basis or coords".into(),
        )),
    }
}
