//! Exact eigenmatrices, multiplicities and Krein parameters.
//!
//! Row l of P is a character of the Bose–Mesner algebra: a vector x with
//! x₀ = 1 and `L_i x = x_i x` for every intersection matrix
//! `(L_i)_{jk} = p^k_{ij}`. The characters are found as joint eigenvectors,
//! starting from the integer roots of the characteristic polynomial of L₁.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::IntersectionNumbers;
use crate::{Error, Result};

pub type Rat = BigRational;
pub type RatMatrix = Vec<Vec<Rat>>;

pub fn rat(x: i64) -> Rat {
    Rat::from_integer(BigInt::from(x))
}

/// `"num/den"` (denominator always present).
pub fn rat_to_string(x: &Rat) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn to_rat_matrix(m: &[Vec<i64>]) -> RatMatrix {
    m.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect()
}

/// Converts a matrix of integral rationals to i64.
pub fn to_int_matrix(m: &RatMatrix) -> Option<Vec<Vec<i64>>> {
    m.iter()
        .map(|r| {
            r.iter()
                .map(|x| if x.is_integer() { x.to_integer().to_i64() } else { None })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let (n, m, k) = (a.len(), b[0].len(), b.len());
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).fold(Rat::zero(), |acc, t| acc + &a[i][t] * &b[t][j]))
                .collect()
        })
        .collect()
}

fn mat_vec(a: &RatMatrix, v: &[Rat]) -> Vec<Rat> {
    a.iter()
        .map(|r| r.iter().zip(v).fold(Rat::zero(), |acc, (x, y)| acc + x * y))
        .collect()
}

pub fn identity(n: usize) -> RatMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect())
        .collect()
}

/// Reduced row-echelon form in place; returns pivot columns and drops zero rows.
pub fn rref(rows: &mut RatMatrix) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = rows[rank][c].recip();
        for x in rows[rank].iter_mut() {
            *x *= &inv;
        }
        for r in 0..rows.len() {
            if r != rank && !rows[r][c].is_zero() {
                let f = rows[r][c].clone();
                for j in c..ncols {
                    let v = &f * &rows[rank][j];
                    rows[r][j] -= v;
                }
            }
        }
        pivots.push(c);
        rank += 1;
    }
    rows.truncate(rank);
    pivots
}

/// Basis of `{x : M x = 0}`.
pub fn nullspace(m: &RatMatrix, ncols: usize) -> Vec<Vec<Rat>> {
    let mut r = m.clone();
    let pivots = rref(&mut r);
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|f| {
            let mut v = vec![Rat::zero(); ncols];
            v[f] = Rat::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -r[row][f].clone();
            }
            v
        })
        .collect()
}

pub fn inverse(m: &RatMatrix) -> Result<RatMatrix> {
    let n = m.len();
    let mut aug: RatMatrix = m
        .iter()
        .zip(identity(n))
        .map(|(r, e)| r.iter().cloned().chain(e).collect())
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return Err(Error::Spectrum("matrix is singular".into()));
    }
    Ok(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Coefficients `c₀..c_n` of `det(xI − M)` by the Faddeev–LeVerrier recursion.
pub fn char_poly(m: &RatMatrix) -> Vec<Rat> {
    let n = m.len();
    let mut c = vec![Rat::zero(); n + 1];
    c[n] = Rat::one();
    let mut mk = vec![vec![Rat::zero(); n]; n];
    for k in 1..=n {
        let mut next = mat_mul(m, &mk);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &c[n + 1 - k];
        }
        mk = next;
        let am = mat_mul(m, &mk);
        let tr = (0..n).fold(Rat::zero(), |acc, i| acc + &am[i][i]);
        c[n - k] = -tr / rat(k as i64);
    }
    c
}

fn eval_poly(c: &[Rat], x: &Rat) -> Rat {
    c.iter().rev().fold(Rat::zero(), |acc, a| acc * x + a)
}

/// Divides by `(x − r)`, assuming r is a root.
fn deflate(c: &[Rat], r: &Rat) -> Vec<Rat> {
    let n = c.len() - 1;
    let mut out = vec![Rat::zero(); n];
    let mut carry = Rat::zero();
    for i in (0..n).rev() {
        carry = &c[i + 1] + carry * r;
        out[i] = carry.clone();
    }
    out
}

/// Integer roots with multiplicity, found by search in `[−bound, bound]`;
/// any leftover factor means a non-integral root.
pub fn integer_roots(poly: &[Rat], bound: i64) -> Result<Vec<(i64, usize)>> {
    let mut c = poly.to_vec();
    let mut roots = Vec::new();
    for x in -bound..=bound {
        let xr = rat(x);
        let mut mult = 0;
        while c.len() > 1 && eval_poly(&c, &xr).is_zero() {
            c = deflate(&c, &xr);
            mult += 1;
        }
        if mult > 0 {
            roots.push((x, mult));
        }
    }
    if c.len() > 1 {
        return Err(Error::Spectrum(format!(
            "characteristic polynomial has a non-integral factor of degree {}",
            c.len() - 1
        )));
    }
    Ok(roots)
}

fn abs_row_bound(m: &RatMatrix) -> i64 {
    m.iter()
        .map(|r| r.iter().fold(Rat::zero(), |acc, x| acc + x.abs()))
        .max()
        .map_or(0, |x| x.ceil().to_integer().to_i64().unwrap_or(i64::MAX))
}

/// Intersection of the span of `basis` with `ker(M − θI)`.
fn restrict_kernel(basis: &[Vec<Rat>], m: &RatMatrix, theta: &Rat) -> Vec<Vec<Rat>> {
    let n = m.len();
    let images: Vec<Vec<Rat>> = basis
        .iter()
        .map(|v| {
            let mut w = mat_vec(m, v);
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= theta * vi;
            }
            w
        })
        .collect();
    // Columns of `sys` are the images; solve sys·a = 0.
    let sys: RatMatrix = (0..n)
        .map(|row| images.iter().map(|img| img[row].clone()).collect())
        .collect();
    nullspace(&sys, basis.len())
        .into_iter()
        .map(|a| {
            (0..n)
                .map(|row| {
                    a.iter()
                        .zip(basis)
                        .fold(Rat::zero(), |acc, (ai, v)| acc + ai * &v[row])
                })
                .collect()
        })
        .collect()
}

/// Splits `basis` into one-dimensional joint eigenspaces of `mats[i..]`.
fn split(basis: Vec<Vec<Rat>>, mats: &[RatMatrix], i: usize, out: &mut Vec<Vec<Rat>>) -> Result<()> {
    if basis.len() == 1 {
        out.push(basis.into_iter().next().unwrap());
        return Ok(());
    }
    let Some(m) = mats.get(i) else {
        return Err(Error::Spectrum("joint eigenspace of dimension > 1".into()));
    };
    let bound = abs_row_bound(m);
    let mut covered = 0;
    for theta in -bound..=bound {
        let sub = restrict_kernel(&basis, m, &rat(theta));
        if !sub.is_empty() {
            covered += sub.len();
            split(sub, mats, i + 1, out)?;
        }
    }
    if covered != basis.len() {
        return Err(Error::Spectrum(format!(
            "intersection matrix {i} has non-integral eigenvalues on a joint eigenspace"
        )));
    }
    Ok(())
}

/// First and second eigenmatrices with multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eigenmatrix {
    /// Rows: eigenspaces (row 0 = valencies); columns: relations.
    pub p: RatMatrix,
    /// `Q = n·P⁻¹`.
    pub q: RatMatrix,
    pub multiplicities: Vec<u64>,
    /// Eigenvalues of L₁ with algebraic multiplicities in L₁.
    pub l1_spectrum: Vec<(i64, usize)>,
}

impl Eigenmatrix {
    pub fn p_int(&self) -> Vec<Vec<i64>> {
        to_int_matrix(&self.p).expect("P is integral by construction")
    }
}

pub fn eigenmatrix(ints: &IntersectionNumbers) -> Result<Eigenmatrix> {
    let d = ints.d;
    let n = ints.n as i64;
    let mats: Vec<RatMatrix> = (0..=d)
        .map(|i| {
            ints.intersection_matrix(i)
                .iter()
                .map(|r| r.iter().map(|&x| rat(x as i64)).collect())
                .collect()
        })
        .collect();
    let l1 = &mats[1.min(d)];
    let spectrum = integer_roots(&char_poly(l1), abs_row_bound(l1))?;
    let mut vectors = Vec::new();
    for &(theta, _) in &spectrum {
        let sub = restrict_kernel(&identity(d + 1), l1, &rat(theta));
        split(sub, &mats, 2, &mut vectors)?;
    }
    if vectors.len() != d + 1 {
        return Err(Error::Spectrum(format!("found {} characters, expected {}", vectors.len(), d + 1)));
    }
    let mut rows = Vec::with_capacity(d + 1);
    for v in vectors {
        if v[0].is_zero() {
            return Err(Error::Spectrum("character with zero first coordinate".into()));
        }
        let s = v[0].recip();
        let x: Vec<Rat> = v.iter().map(|c| c * &s).collect();
        for (i, m) in mats.iter().enumerate() {
            let lhs = mat_vec(m, &x);
            if lhs.iter().zip(&x).any(|(a, b)| *a != &x[i] * b) {
                return Err(Error::Spectrum(format!("vector is not an eigenvector of L_{i}")));
            }
        }
        if x.iter().any(|c| !c.is_integer()) {
            return Err(Error::Spectrum("non-integral eigenvalue".into()));
        }
        rows.push(x);
    }
    let valencies: Vec<Rat> = ints.valencies().iter().map(|&k| rat(k as i64)).collect();
    let pos = rows
        .iter()
        .position(|r| *r == valencies)
        .ok_or_else(|| Error::Spectrum("no valency row".into()))?;
    let first = rows.remove(pos);
    rows.sort_by(|a, b| b[1..].cmp(&a[1..]));
    rows.insert(0, first);

    let pinv = inverse(&rows)?;
    let q: RatMatrix = pinv
        .iter()
        .map(|r| r.iter().map(|x| x * rat(n)).collect())
        .collect();
    let mut multiplicities = Vec::with_capacity(d + 1);
    for m in &q[0] {
        match (m.is_integer(), m.to_integer().to_u64()) {
            (true, Some(v)) if v > 0 => multiplicities.push(v),
            _ => return Err(Error::Spectrum(format!("multiplicity {m} is not a positive integer"))),
        }
    }
    if multiplicities.iter().sum::<u64>() != n as u64 {
        return Err(Error::Spectrum("multiplicities do not sum to n".into()));
    }
    Ok(Eigenmatrix { p: rows, q, multiplicities, l1_spectrum: spectrum })
}

/// Krein parameters `q^k_{ij} = (1/n) Σ_l Q[l][i] Q[l][j] P[k][l]`, indexed `[k][i][j]`.
pub fn krein(em: &Eigenmatrix, n: usize) -> Result<Vec<Vec<Vec<Rat>>>> {
    let d = em.p.len() - 1;
    let inv_n = rat(n as i64).recip();
    let mut out = vec![vec![vec![Rat::zero(); d + 1]; d + 1]; d + 1];
    for (k, out_k) in out.iter_mut().enumerate() {
        for i in 0..=d {
            for j in 0..=d {
                let s = (0..=d).fold(Rat::zero(), |acc, l| {
                    acc + &em.q[l][i] * &em.q[l][j] * &em.p[k][l]
                });
                let v = s * &inv_n;
                if v.is_negative() {
                    return Err(Error::Spectrum(format!("negative Krein parameter q^{k}_{{{i},{j}}} = {v}")));
                }
                out_k[i][j] = v;
            }
        }
    }
    Ok(out)
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (pos, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(pos);
        for mut tail in permutations(&rest) {
            tail.insert(0, x);
            out.push(tail);
        }
    }
    out
}

/// Orderings σ of 1..=d for which the matrix `M[a][b] = f(σ(b), σ(1), σ(a))`
/// (with σ(0) = 0) is tridiagonal with nonzero off-diagonal entries.
fn tridiagonal_orderings<F: Fn(usize, usize, usize) -> bool>(d: usize, nonzero: F) -> Vec<Vec<usize>> {
    let items: Vec<usize> = (1..=d).collect();
    permutations(&items)
        .into_iter()
        .filter(|perm| {
            let o: Vec<usize> = std::iter::once(0).chain(perm.iter().copied()).collect();
            (0..=d).all(|a| {
                (0..=d).all(|b| {
                    let nz = nonzero(o[b], o[1], o[a]);
                    match a.abs_diff(b) {
                        0 => true,
                        1 => nz,
                        _ => !nz,
                    }
                })
            })
        })
        .collect()
}

/// Eigenspace orderings making the scheme Q-polynomial.
pub fn q_polynomial_orderings(krein: &[Vec<Vec<Rat>>]) -> Vec<Vec<usize>> {
    let d = krein.len() - 1;
    tridiagonal_orderings(d, |k, i, j| !krein[k][i][j].is_zero())
}

/// Relation orderings making the scheme P-polynomial.
pub fn p_polynomial_orderings(ints: &IntersectionNumbers) -> Vec<Vec<usize>> {
    tridiagonal_orderings(ints.d, |k, i, j| ints.get(k, i, j) != 0)
}

/// Whether two integer matrices agree after permuting rows 1.. of either.
pub fn equal_up_to_row_permutation(a: &[Vec<i64>], b: &[Vec<i64>]) -> bool {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort();
    y.sort();
    x == y
}

/// Serializable view of the spectral data.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct SpectralSummary {
    pub p: Vec<Vec<i64>>,
    pub q: Vec<Vec<String>>,
    pub multiplicities: Vec<u64>,
    pub krein: Vec<Vec<Vec<String>>>,
    pub krein_nonnegative: bool,
    pub q_polynomial_orderings: Vec<Vec<usize>>,
    pub p_polynomial_orderings: Vec<Vec<usize>>,
}

pub fn spectral_summary(ints: &IntersectionNumbers) -> Result<SpectralSummary> {
    let em = eigenmatrix(ints)?;
    let kr = krein(&em, ints.n)?;
    Ok(SpectralSummary {
        p: em.p_int(),
        q: em.q.iter().map(|r| r.iter().map(rat_to_string).collect()).collect(),
        multiplicities: em.multiplicities.clone(),
        krein: kr
            .iter()
            .map(|m| m.iter().map(|r| r.iter().map(rat_to_string).collect()).collect())
            .collect(),
        krein_nonnegative: true,
        q_polynomial_orderings: q_polynomial_orderings(&kr),
        p_polynomial_orderings: p_polynomial_orderings(ints),
    })
}
