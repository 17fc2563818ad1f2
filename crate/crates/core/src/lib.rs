//! Exact arithmetic for maximal orders in degree-`p` central simple algebras
//! over `Q`, the vertices of the local buildings they correspond to, and the
//! selectivity of commutative orders built from cyclic extensions of
//! imaginary quadratic fields.

pub mod arith;
pub mod building;
pub mod classgroup;
pub mod dvr;
pub mod error;
pub mod genus;
pub mod relext;
pub mod selectivity;

pub use building::{ApartmentFrame, LatticeClass, OrderPattern};
pub use classgroup::{ClassGroup, PrimeKind, PrimeOfK, QuadForm};
pub use dvr::{LocalMatrix, Valuation};
pub use error::{Error, Result};
