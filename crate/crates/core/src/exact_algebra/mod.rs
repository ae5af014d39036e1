//! Exact arithmetic: rationals, polynomials over `Q` and `F_q`, number fields,
//! factorization and splitting fields.

pub mod factor;
pub mod gf;
pub mod linalg;
pub mod kpoly;
pub mod number_field;
pub mod poly;
pub mod splitting;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub use factor::{factor_over_q, Factorization};
pub use gf::FiniteField;
pub use kpoly::KPoly;
pub use number_field::{FieldElement, FieldEmbedding, NumberField};
pub use poly::QPoly;
pub use splitting::{automorphisms, relative_automorphisms, splitting_field, Bounds, SplittingField};

/// Exact rational numbers, always reduced with positive denominator.
pub type Q = num_rational::BigRational;

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `n`, `-n` or `n/d`.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::invalid(format!("malformed rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::invalid(format!("zero denominator in `{s}`")));
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Always `num/den`, even for integers.
pub fn format_rational(q: &Q) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Integers print bare, other rationals as `num/den`.
pub fn format_rational_short(q: &Q) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format_rational(q)
    }
}
