//! Arithmetic in the characteristic-2 tower GF(q) ⊂ GF(q²) ⊂ GF(q⁴), q = 2^h.
//!
//! Every scalar lives in the single ambient field GF(2^{4h}). Subfields are the
//! Frobenius-fixed subsets, so no conversion between separately built fields is
//! ever needed. An element is the coefficient bit-vector of its residue
//! polynomial: bit `i` is the coefficient of `X^i`, and the integer encoding of
//! that bit-vector is the order used for every "smallest" tie-break.

use std::fmt;

use rand::Rng;

use crate::{Error, Result};

/// Largest supported exponent. Degree 4h = 20 keeps the log tables at 1M entries.
pub const MAX_H: u32 = 5;

/// An element of the ambient field GF(2^{4h}).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fe(u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    /// Integer encoding (bit `i` = coefficient of `X^i`).
    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Wraps an encoding already known to lie in the ambient field.
    #[inline]
    pub(crate) fn from_raw(bits: u32) -> Fe {
        Fe(bits)
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fe({:#x})", self.0)
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

// Addition in characteristic 2 is XOR.
#[allow(clippy::suspicious_arithmetic_impl)]
impl std::ops::Add for Fe {
    type Output = Fe;
    #[inline]
    fn add(self, rhs: Fe) -> Fe {
        Fe(self.0 ^ rhs.0)
    }
}

#[allow(clippy::suspicious_op_assign_impl)]
impl std::ops::AddAssign for Fe {
    #[inline]
    fn add_assign(&mut self, rhs: Fe) {
        self.0 ^= rhs.0;
    }
}

/// Degree of a GF(2) polynomial encoded as bits; `None` for the zero polynomial.
fn poly_degree(p: u64) -> Option<u32> {
    if p == 0 {
        None
    } else {
        Some(63 - p.leading_zeros())
    }
}

fn poly_rem(mut a: u64, b: u64) -> u64 {
    let db = poly_degree(b).expect("division by the zero polynomial");
    while let Some(da) = poly_degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

/// Irreducibility over GF(2) by trial division against every polynomial of
/// degree 1..=deg/2.
pub fn is_irreducible(p: u64) -> bool {
    let Some(d) = poly_degree(p) else {
        return false;
    };
    if d == 0 {
        return false;
    }
    for g in 2u64..(1u64 << (d / 2 + 1)) {
        if poly_rem(p, g) == 0 {
            return false;
        }
    }
    true
}

/// Carry-less product reduced modulo `modulus` (which includes its leading bit).
fn clmul_mod(a: u32, b: u32, modulus: u64, degree: u32) -> u32 {
    let mut acc: u64 = 0;
    let mut a = a as u64;
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> degree & 1 == 1 {
            a ^= modulus;
        }
    }
    acc as u32
}

/// The field context: modulus, distinguished element ω, and lookup tables.
///
/// Immutable after construction; share it by reference across threads.
pub struct FieldCtx {
    h: u32,
    degree: u32,
    modulus: u64,
    omega: Fe,
    order: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    frob_q: Vec<u32>,
    gf_q: Vec<Fe>,
    gf_q2: Vec<Fe>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("h", &self.h)
            .field("modulus", &format_args!("{:#x}", self.modulus))
            .field("omega", &self.omega)
            .finish()
    }
}

impl FieldCtx {
    /// Builds GF(2^{4h}) with the lexicographically smallest irreducible modulus
    /// and ω the smallest solution of `X^{q²} + X = 1`.
    pub fn new(h: u32) -> Result<Self> {
        if h == 0 || h > MAX_H {
            return Err(Error::InvalidExponent(h));
        }
        let degree = 4 * h;
        let modulus = ((1u64 << degree)..(1u64 << (degree + 1)))
            .find(|&p| is_irreducible(p))
            .ok_or(Error::NoIrreducible(degree))?;
        let size = 1u32 << degree;
        let order = size - 1;

        // Smallest primitive element; the cycle of its powers fills the log tables.
        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![0u32; size as usize];
        let mut found = false;
        for g in 2..size {
            let mut x = 1u32;
            let mut len = 0u32;
            loop {
                exp[len as usize] = x;
                x = clmul_mod(x, g, modulus, degree);
                len += 1;
                if x == 1 || len > order {
                    break;
                }
            }
            if len == order {
                found = true;
                break;
            }
        }
        if !found {
            return Err(Error::NoIrreducible(degree));
        }
        for i in 0..order {
            exp[(order + i) as usize] = exp[i as usize];
            log[exp[i as usize] as usize] = i;
        }

        let mut ctx = FieldCtx {
            h,
            degree,
            modulus,
            omega: Fe::ZERO,
            order,
            exp,
            log,
            frob_q: Vec::new(),
            gf_q: Vec::new(),
            gf_q2: Vec::new(),
        };
        ctx.frob_q = (0..size).map(|x| ctx.frob_by_squaring(Fe(x), h).0).collect();
        ctx.omega = (0..size)
            .map(Fe)
            .find(|&x| ctx.frobenius(x, 2 * h as i64) + x == Fe::ONE)
            .ok_or(Error::NoIrreducible(degree))?;
        debug_assert!(!ctx.in_subfield(ctx.omega, 2 * h));
        ctx.gf_q = ctx.enumerate_subfield(h)?;
        ctx.gf_q2 = ctx.enumerate_subfield(2 * h)?;
        Ok(ctx)
    }

    #[inline]
    pub fn h(&self) -> u32 {
        self.h
    }

    /// q = 2^h.
    #[inline]
    pub fn q(&self) -> u64 {
        1 << self.h
    }

    /// Degree 4h of the ambient field over GF(2).
    #[inline]
    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Modulus bits, leading coefficient included.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn modulus_hex(&self) -> String {
        format!("{:x}", self.modulus)
    }

    /// ω with ω^{q²} = ω + 1.
    #[inline]
    pub fn omega(&self) -> Fe {
        self.omega
    }

    /// Number of elements of the ambient field.
    pub fn size(&self) -> u32 {
        1 << self.degree
    }

    /// Validates raw bits as an element of this field.
    pub fn fe(&self, bits: u32) -> Result<Fe> {
        if self.degree < 32 && bits >> self.degree != 0 {
            return Err(Error::ForeignElement { bits, degree: self.degree });
        }
        Ok(Fe(bits))
    }

    /// The GF(2)-constant `c mod 2`.
    pub fn from_bit(&self, c: bool) -> Fe {
        if c {
            Fe::ONE
        } else {
            Fe::ZERO
        }
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        a + b
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        Fe(self.exp[(self.log[a.0 as usize] + self.log[b.0 as usize]) as usize])
    }

    /// Reference multiplication by shift-and-reduce, independent of the tables.
    pub fn mul_slow(&self, a: Fe, b: Fe) -> Fe {
        Fe(clmul_mod(a.0, b.0, self.modulus, self.degree))
    }

    #[inline]
    pub fn square(&self, a: Fe) -> Fe {
        self.mul(a, a)
    }

    /// Inverse by the extended Euclidean algorithm on GF(2)[X].
    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        // Invariant: u ≡ g1·a and v ≡ g2·a (mod modulus).
        let (mut u, mut v) = (a.0 as u64, self.modulus);
        let (mut g1, mut g2) = (1u64, 0u64);
        while u != 1 {
            let du = poly_degree(u).unwrap();
            let dv = poly_degree(v).unwrap();
            if du < dv {
                std::mem::swap(&mut u, &mut v);
                std::mem::swap(&mut g1, &mut g2);
                continue;
            }
            u ^= v << (du - dv);
            g1 ^= g2 << (du - dv);
        }
        Ok(Fe(poly_rem(g1, self.modulus) as u32))
    }

    /// `a / b`.
    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Square-and-multiply; `pow(x, 0) = 1`.
    pub fn pow(&self, x: Fe, mut e: u64) -> Fe {
        let mut base = x;
        let mut acc = Fe::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.square(base);
            e >>= 1;
        }
        acc
    }

    fn frob_by_squaring(&self, mut x: Fe, k: u32) -> Fe {
        for _ in 0..k {
            x = self.square(x);
        }
        x
    }

    /// `x^{2^k}`, with `k` reduced modulo 4h.
    pub fn frobenius(&self, x: Fe, k: i64) -> Fe {
        let k = k.rem_euclid(self.degree as i64) as u32;
        if k.is_multiple_of(self.h) && !self.frob_q.is_empty() {
            let mut y = x;
            for _ in 0..k / self.h {
                y = Fe(self.frob_q[y.0 as usize]);
            }
            y
        } else {
            self.frob_by_squaring(x, k)
        }
    }

    /// `x^q`.
    #[inline]
    pub fn fq(&self, x: Fe) -> Fe {
        Fe(self.frob_q[x.0 as usize])
    }

    /// `x^{q^j}`.
    #[inline]
    pub fn fqj(&self, x: Fe, j: u32) -> Fe {
        let mut y = x;
        for _ in 0..j % 4 {
            y = Fe(self.frob_q[y.0 as usize]);
        }
        y
    }

    /// Square root (the inverse of the Frobenius automorphism).
    pub fn sqrt(&self, x: Fe) -> Fe {
        self.frob_by_squaring(x, self.degree - 1)
    }

    pub fn in_subfield(&self, x: Fe, m: u32) -> bool {
        self.frobenius(x, m as i64) == x
    }

    /// Membership in GF(q).
    #[inline]
    pub fn in_gf_q(&self, x: Fe) -> bool {
        self.fq(x) == x
    }

    /// Membership in GF(q²).
    #[inline]
    pub fn in_gf_q2(&self, x: Fe) -> bool {
        self.fqj(x, 2) == x
    }

    /// Absolute trace of `x ∈ GF(2^m)`, i.e. `Σ_{i<m} x^{2^i}` ∈ {0, 1}.
    pub fn abs_trace(&self, x: Fe, m: u32) -> Result<bool> {
        self.check_subfield_degree(m)?;
        if !self.in_subfield(x, m) {
            return Err(Error::NotInSubfield { bits: x.0, m });
        }
        let mut acc = Fe::ZERO;
        let mut y = x;
        for _ in 0..m {
            acc += y;
            y = self.square(y);
        }
        debug_assert!(acc.0 <= 1);
        Ok(acc == Fe::ONE)
    }

    /// Relative trace to GF(q): `x + x^q + x^{q²} + x^{q³}`.
    pub fn rel_trace_to_q(&self, x: Fe) -> Fe {
        let x1 = self.fq(x);
        let x2 = self.fq(x1);
        let x3 = self.fq(x2);
        x + x1 + x2 + x3
    }

    /// The norm `x^{q+1}` from GF(q²) to GF(q).
    #[inline]
    pub fn norm_q(&self, x: Fe) -> Fe {
        self.mul(x, self.fq(x))
    }

    fn check_subfield_degree(&self, m: u32) -> Result<()> {
        if m == 0 || !self.degree.is_multiple_of(m) {
            return Err(Error::NotSubfieldDegree { m, degree: self.degree });
        }
        Ok(())
    }

    /// All 2^m elements of GF(2^m) in ascending encoding order.
    pub fn enumerate_subfield(&self, m: u32) -> Result<Vec<Fe>> {
        self.check_subfield_degree(m)?;
        Ok((0..self.size())
            .map(Fe)
            .filter(|&x| self.in_subfield(x, m))
            .collect())
    }

    /// Cached GF(q), ascending.
    pub fn gf_q(&self) -> &[Fe] {
        &self.gf_q
    }

    /// Cached GF(q²), ascending.
    pub fn gf_q2(&self) -> &[Fe] {
        &self.gf_q2
    }

    /// Iterator over the whole ambient field.
    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.size()).map(Fe)
    }

    /// Multiplicative order bound `2^{4h} - 1`.
    pub fn group_order(&self) -> u32 {
        self.order
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        Fe(rng.gen_range(0..self.size()))
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        Fe(rng.gen_range(1..self.size()))
    }

    /// Uniform element of GF(q²).
    pub fn random_q2<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        self.gf_q2[rng.gen_range(0..self.gf_q2.len())]
    }

    /// Uniform element of GF(q).
    pub fn random_q<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        self.gf_q[rng.gen_range(0..self.gf_q.len())]
    }

    /// Smallest element of GF(q²) \ GF(q); with 1 it forms a GF(q)-basis of GF(q²).
    pub fn q2_basis_element(&self) -> Fe {
        *self
            .gf_q2
            .iter()
            .find(|&&x| !self.in_gf_q(x))
            .expect("GF(q^2) strictly contains GF(q)")
    }
}
