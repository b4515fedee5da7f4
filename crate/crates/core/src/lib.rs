//! Exact construction of the Hollmann–Xiang and Penttila–Williford 3-class
//! association schemes for q = 2^h, and a brute-force certificate that the map
//! 𝐭 ↦ m_𝐭 between their point sets preserves every relation.
//!
//! Module map:
//!
//! * [`fields`]: the tower GF(q) ⊂ GF(q²) ⊂ GF(q⁴) in one ambient field.
//! * [`linalg`]: Gaussian elimination over the ambient field.
//! * [`geom`]: PG(3,q²), the hermitian, symplectic and quadratic forms, and
//!   the Klein correspondence.
//! * [`hxscheme`]: pair invariants ρ, ρ̂ and the conic-side relations.
//! * [`pwscheme`]: the relative hemisystem {m_𝐭}, subtended spreads and the
//!   Klein-side classification.
//! * [`schemecore`]: scheme axioms, exact eigenmatrices, Krein parameters,
//!   fusions and SRG checks over relation tables.
//! * [`isocert`]: the end-to-end certificate.

pub mod fields;
pub mod geom;
pub mod hxscheme;
pub mod isocert;
pub mod linalg;
pub mod pwscheme;
pub mod schemecore;

pub use fields::{Fe, FieldCtx};

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported field exponent h = {0}")]
    InvalidExponent(u32),
    #[error("no irreducible polynomial of degree {0} found")]
    NoIrreducible(u32),
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("bits {bits:#x} do not encode an element of GF(2^{degree})")]
    ForeignElement { bits: u32, degree: u32 },
    #[error("element {bits:#x} is not in GF(2^{m})")]
    NotInSubfield { bits: u32, m: u32 },
    #[error("{m} does not divide the field degree {degree}")]
    NotSubfieldDegree { m: u32, degree: u32 },
    #[error("malformed vector: {0}")]
    Malformed(String),
    #[error("rank deficiency: {0}")]
    Rank(String),
    #[error("geometry violation: {0}")]
    Geometry(String),
    #[error("pairs {s} and {t} are equal or conjugate")]
    SamePair { s: u32, t: u32 },
    #[error("rho(s, t) = 1 for s = {s:#x}, t = {t:#x}")]
    RhoIsOne { s: u32, t: u32 },
    #[error("rho_hat = {value:#x} lies in no class set")]
    Unclassified { value: u32 },
    #[error("invalid relation table: {0}")]
    Table(String),
    #[error(
        "not an association scheme: p^{k}_{{{i},{j}}} is {found} at pair ({x}, {y}) \
         but {expected} at the reference pair of class {k}"
    )]
    NotAScheme {
        i: usize,
        j: usize,
        k: usize,
        x: usize,
        y: usize,
        found: u64,
        expected: u64,
    },
    #[error("spectrum error: {0}")]
    Spectrum(String),
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("{0}")]
    Certificate(String),
    #[error("invalid options: {0}")]
    InvalidOptions(String),
}
