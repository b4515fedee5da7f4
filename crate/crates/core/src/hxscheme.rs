//! The conic side: Frobenius pairs 𝐭 = {t, t^{q²}}, the cross-ratio invariant
//! ρ and its symmetrization ρ̂, and the trace-set relations.
//!
//! Class indices: 1 ↔ ρ̂ ∈ S₀* = T₀(q)∖{0}, 2 ↔ ρ̂ ∈ S₁ = GF(q)∖T₀(q),
//! 3 ↔ ρ̂ ∈ T₀(q²)∖GF(q).

use serde::Serialize;

use crate::fields::{Fe, FieldCtx};
use crate::linalg;
use crate::schemecore::RelationTable;
use crate::{Error, Result};

/// The (q⁴−q²)/2 pairs, indexed by ascending representative.
#[derive(Clone, Debug)]
pub struct PairSet {
    reps: Vec<Fe>,
    index: Vec<u32>,
}

const NO_PAIR: u32 = u32::MAX;

impl PairSet {
    pub fn new(ctx: &FieldCtx) -> Self {
        let mut reps = Vec::new();
        let mut index = vec![NO_PAIR; ctx.size() as usize];
        for x in ctx.elements() {
            let c = ctx.fqj(x, 2);
            if c != x && x.bits() < c.bits() {
                let i = reps.len() as u32;
                index[x.bits() as usize] = i;
                index[c.bits() as usize] = i;
                reps.push(x);
            }
        }
        PairSet { reps, index }
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Smaller-encoding element of pair `i`.
    pub fn rep(&self, i: usize) -> Fe {
        self.reps[i]
    }

    pub fn reps(&self) -> &[Fe] {
        &self.reps
    }

    /// Index of the pair containing `t`, if t ∉ GF(q²).
    pub fn index_of(&self, t: Fe) -> Option<usize> {
        match self.index.get(t.bits() as usize) {
            Some(&i) if i != NO_PAIR => Some(i as usize),
            _ => None,
        }
    }
}

fn check_pair(ctx: &FieldCtx, s: Fe, t: Fe) -> Result<(Fe, Fe)> {
    let (s2, t2) = (ctx.fqj(s, 2), ctx.fqj(t, 2));
    if s2 == s || t2 == t || s == t || s == t2 {
        return Err(Error::SamePair { s: s.bits(), t: t.bits() });
    }
    Ok((s2, t2))
}

/// `ρ(s,t) = (s+t)(s^{q²}+t^{q²}) / ((s+t^{q²})(s^{q²}+t))`.
pub fn rho(ctx: &FieldCtx, s: Fe, t: Fe) -> Result<Fe> {
    let (s2, t2) = check_pair(ctx, s, t)?;
    let num = ctx.mul(s + t, s2 + t2);
    let den = ctx.mul(s + t2, s2 + t);
    ctx.div(num, den)
}

/// `ν = 1/(ρ+1)`.
pub fn nu(ctx: &FieldCtx, s: Fe, t: Fe) -> Result<Fe> {
    let r = rho(ctx, s, t)?;
    ctx.inv(r + Fe::ONE).map_err(|_| Error::RhoIsOne { s: s.bits(), t: t.bits() })
}

/// `ρ̂ = 1/(ρ + ρ⁻¹)`.
pub fn rho_hat(ctx: &FieldCtx, s: Fe, t: Fe) -> Result<Fe> {
    let r = rho(ctx, s, t)?;
    let sum = r + ctx.inv(r)?;
    ctx.inv(sum).map_err(|_| Error::RhoIsOne { s: s.bits(), t: t.bits() })
}

/// `ρ̂` as the symmetric quotient `(s+t)(s'+t')(s+t')(s'+t) / ((s+s')²(t+t')²)`, ' = q²-Frobenius.
pub fn rho_hat_quotient(ctx: &FieldCtx, s: Fe, t: Fe) -> Result<Fe> {
    let (s2, t2) = check_pair(ctx, s, t)?;
    let num = ctx.mul(ctx.mul(s + t, s2 + t2), ctx.mul(s + t2, s2 + t));
    let den = ctx.square(ctx.mul(s + s2, t + t2));
    ctx.div(num, den)
}

/// `ν² + ν`.
pub fn rho_hat_from_nu(ctx: &FieldCtx, s: Fe, t: Fe) -> Result<Fe> {
    let v = nu(ctx, s, t)?;
    Ok(ctx.square(v) + v)
}

/// Membership tables for T₀(q²) and the three class sets.
#[derive(Clone, Debug)]
pub struct TraceSets {
    class: Vec<u8>,
    t0_q2: Vec<Fe>,
}

impl TraceSets {
    pub fn new(ctx: &FieldCtx) -> Result<Self> {
        let mut class = vec![0u8; ctx.size() as usize];
        let mut t0_q2 = Vec::new();
        for &x in ctx.gf_q2() {
            if ctx.abs_trace(x, 2 * ctx.h())? {
                continue;
            }
            t0_q2.push(x);
            class[x.bits() as usize] = if x.is_zero() {
                0
            } else if !ctx.in_gf_q(x) {
                3
            } else if ctx.abs_trace(x, ctx.h())? {
                2
            } else {
                1
            };
        }
        Ok(TraceSets { class, t0_q2 })
    }

    /// Class index of a ρ̂ value, or `None` outside S₀* ∪ S₁ ∪ (T₀∖GF(q)).
    pub fn class_of(&self, x: Fe) -> Option<u8> {
        match self.class.get(x.bits() as usize) {
            Some(&c) if c != 0 => Some(c),
            _ => None,
        }
    }

    pub fn t0_q2(&self) -> &[Fe] {
        &self.t0_q2
    }

    /// Elements of class set `c` in ascending order.
    pub fn members(&self, c: u8) -> Vec<Fe> {
        self.class
            .iter()
            .enumerate()
            .filter(|&(_, &k)| k == c)
            .map(|(b, _)| Fe::from_raw(b as u32))
            .collect()
    }
}

pub fn classify_hx(ctx: &FieldCtx, ts: &TraceSets, s: Fe, t: Fe) -> Result<u8> {
    let r = rho_hat(ctx, s, t)?;
    ts.class_of(r).ok_or(Error::Unclassified { value: r.bits() })
}

/// All conic-side invariants of a pair of pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PairInvariants {
    pub rho: u32,
    pub nu: u32,
    pub rho_hat: u32,
    pub hx_class: u8,
}

pub fn invariants(ctx: &FieldCtx, ts: &TraceSets, s: Fe, t: Fe) -> Result<PairInvariants> {
    Ok(PairInvariants {
        rho: rho(ctx, s, t)?.bits(),
        nu: nu(ctx, s, t)?.bits(),
        rho_hat: rho_hat(ctx, s, t)?.bits(),
        hx_class: classify_hx(ctx, ts, s, t)?,
    })
}

/// Labels {λ, λ⁻¹}, λ ∈ GF(q²)∖{0,1}, numbered 1.. by the smaller element.
#[derive(Clone, Debug)]
pub struct FineClasses {
    labels: Vec<(Fe, Fe)>,
    index: Vec<u16>,
}

impl FineClasses {
    pub fn new(ctx: &FieldCtx) -> Self {
        let mut labels = Vec::new();
        let mut index = vec![0u16; ctx.size() as usize];
        for &l in ctx.gf_q2() {
            if l.is_zero() || l == Fe::ONE || index[l.bits() as usize] != 0 {
                continue;
            }
            let li = ctx.inv(l).expect("nonzero");
            labels.push((l, li));
            let k = labels.len() as u16;
            index[l.bits() as usize] = k;
            index[li.bits() as usize] = k;
        }
        FineClasses { labels, index }
    }

    pub fn count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[(Fe, Fe)] {
        &self.labels
    }

    /// 1-based class of a ρ value.
    pub fn class_of(&self, rho: Fe) -> Option<usize> {
        match self.index.get(rho.bits() as usize) {
            Some(&k) if k != 0 => Some(k as usize),
            _ => None,
        }
    }

    /// Partition of the fine classes by the HX class of `ρ̂ = 1/(λ+λ⁻¹)`;
    /// part i−1 holds the fine classes fusing into HX class i.
    pub fn hx_grouping(&self, ctx: &FieldCtx, ts: &TraceSets) -> Result<Vec<Vec<usize>>> {
        let mut parts = vec![Vec::new(); 3];
        for (k, &(l, li)) in self.labels.iter().enumerate() {
            let rh = ctx.inv(l + li)?;
            let c = ts.class_of(rh).ok_or(Error::Unclassified { value: rh.bits() })?;
            parts[c as usize - 1].push(k + 1);
        }
        Ok(parts)
    }
}

/// `{ρ, ρ⁻¹}` with the smaller encoding first.
pub fn classify_fine(ctx: &FieldCtx, s: Fe, t: Fe) -> Result<(Fe, Fe)> {
    let r = rho(ctx, s, t)?;
    let ri = ctx.inv(r)?;
    Ok(if r.bits() <= ri.bits() { (r, ri) } else { (ri, r) })
}

/// A line of PG(2,q²) as a 2×3 matrix in reduced row-echelon form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaneLine {
    rows: [[Fe; 3]; 2],
}

impl PlaneLine {
    pub fn rows(&self) -> [[Fe; 3]; 2] {
        self.rows
    }

    /// Dual coordinates: the line is `{X : n·X = 0}`.
    pub fn normal(&self, ctx: &FieldCtx) -> [Fe; 3] {
        let [a, b] = self.rows;
        [
            ctx.mul(a[1], b[2]) + ctx.mul(a[2], b[1]),
            ctx.mul(a[2], b[0]) + ctx.mul(a[0], b[2]),
            ctx.mul(a[0], b[1]) + ctx.mul(a[1], b[0]),
        ]
    }

    /// Number of points of C = {⟨(1,t,t²)⟩ : t ∈ GF(q²)} ∪ {⟨(0,0,1)⟩} on the line.
    pub fn conic_points(&self, ctx: &FieldCtx) -> usize {
        conic_points_on(ctx, &self.normal(ctx))
    }
}

fn conic_points_on(ctx: &FieldCtx, n: &[Fe; 3]) -> usize {
    let on_affine = ctx
        .gf_q2()
        .iter()
        .filter(|&&t| (n[0] + ctx.mul(n[1], t) + ctx.mul(n[2], ctx.square(t))).is_zero())
        .count();
    on_affine + usize::from(n[2].is_zero())
}

/// The GF(q²)-rational line whose extension meets the conic in
/// ⟨(1,t,t²)⟩ and ⟨(1,t^{q²},t^{2q²})⟩, spanned by the rational combinations
/// with coefficients (1, 1) and (ω, ω+1).
pub fn elliptic_line(ctx: &FieldCtx, t: Fe) -> Result<PlaneLine> {
    let t2 = ctx.fqj(t, 2);
    if t2 == t {
        return Err(Error::Geometry("t lies in GF(q^2)".into()));
    }
    let w = ctx.omega();
    let w1 = w + Fe::ONE;
    let p = [Fe::ONE, t, ctx.square(t)];
    let pc = [Fe::ONE, t2, ctx.square(t2)];
    let a: Vec<Fe> = (0..3).map(|i| p[i] + pc[i]).collect();
    let b: Vec<Fe> = (0..3).map(|i| ctx.mul(w, p[i]) + ctx.mul(w1, pc[i])).collect();
    debug_assert!(a.iter().chain(&b).all(|&x| ctx.in_gf_q2(x)));
    let mut m = vec![a, b];
    if linalg::rref(ctx, &mut m).len() != 2 {
        return Err(Error::Rank("elliptic line basis is dependent".into()));
    }
    Ok(PlaneLine { rows: [[m[0][0], m[0][1], m[0][2]], [m[1][0], m[1][1], m[1][2]]] })
}

/// Number of lines of PG(2,q²) missing the conic.
pub fn passant_census(ctx: &FieldCtx) -> usize {
    let f = ctx.gf_q2();
    let mut count = 0;
    for lead in 0..3 {
        let free = 2 - lead;
        for idx in 0..f.len().pow(free as u32) {
            let mut n = [Fe::ZERO; 3];
            n[lead] = Fe::ONE;
            let mut r = idx;
            for slot in n.iter_mut().skip(lead + 1) {
                *slot = f[r % f.len()];
                r /= f.len();
            }
            if conic_points_on(ctx, &n) == 0 {
                count += 1;
            }
        }
    }
    count
}

/// The 3-class table `R′₁, R′₂, R′₃` on all pairs.
pub fn hx_table(ctx: &FieldCtx, pairs: &PairSet, ts: &TraceSets) -> Result<RelationTable> {
    RelationTable::try_from_pairs(pairs.len(), 3, |i, j| {
        classify_hx(ctx, ts, pairs.rep(i), pairs.rep(j))
    })
}

/// The (q²/2−1)-class table of {ρ, ρ⁻¹} labels.
pub fn fine_table(ctx: &FieldCtx, pairs: &PairSet, fine: &FineClasses) -> Result<RelationTable> {
    RelationTable::try_from_pairs(pairs.len(), fine.count(), |i, j| {
        let r = rho(ctx, pairs.rep(i), pairs.rep(j))?;
        fine.class_of(r)
            .map(|k| k as u8)
            .ok_or(Error::RhoIsOne { s: pairs.rep(i).bits(), t: pairs.rep(j).bits() })
    })
}

/// The closed-form first eigenmatrix of the 3-class scheme at even q.
pub fn eigenmatrix_formula(q: i64) -> Vec<Vec<i64>> {
    vec![
        vec![1, (q - 2) * (q * q + 1) / 2, q * (q * q + 1) / 2, q * (q - 2) * (q * q + 1) / 2],
        vec![1, -(q - 1) * (q - 2) / 2, -q * (q - 1) / 2, q * (q - 2)],
        vec![1, -(q * q - q + 2) / 2, q * (q + 1) / 2, -q],
        vec![1, q - 1, 0, -q],
    ]
}

/// SRG parameters `(v, k, λ, μ)` of the {1,2}-fusion at even q.
pub fn srg_formula(q: u64) -> (u64, u64, u64, u64) {
    (q * q * (q * q - 1) / 2, (q * q + 1) * (q - 1), q * q + q - 2, 2 * (q * q - q))
}
