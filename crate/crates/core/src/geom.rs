//! Projective geometry over the tower.
//!
//! Points of PG(3,q²) are stored with their first nonzero coordinate equal to
//! 1 and lines as 2×4 reduced row-echelon matrices, so equality of points and
//! lines is plain equality of the stored coordinates.
//!
//! The forms used throughout:
//!
//! * `h(X,Y) = X₁Y₄^q + X₂Y₂^q + X₃Y₃^q + X₄Y₁^q`, the hermitian form defining H(3,q²);
//! * on Ŵ = {(α, x^q, x, β)}: `Q̂ = αβ + x^{q+1}` with polar form `b̂`;
//! * on Ṽ = {(x, x^q, y, y^q, z, z^q)}: `Q̃ = xz^q + x^q z + y^{q+1}` with polar form `b̃`,
//!   the restrictions of the Klein quadric `X₁X₆ + X₂X₅ + X₃X₄` and its polar form.

use std::collections::BTreeSet;

use crate::fields::{Fe, FieldCtx};
use crate::linalg;
use crate::{Error, Result};

/// A coordinate vector of V(4, ·). Coordinates normally lie in GF(q²); the
/// extension points θ(t), t ∈ GF(q⁴), are the exception.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vec4(pub [Fe; 4]);

impl Vec4 {
    pub const ZERO: Vec4 = Vec4([Fe::ZERO; 4]);

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn is_rational(&self, ctx: &FieldCtx) -> bool {
        self.0.iter().all(|&x| ctx.in_gf_q2(x))
    }

    pub fn scale(&self, ctx: &FieldCtx, c: Fe) -> Vec4 {
        Vec4(self.0.map(|x| ctx.mul(c, x)))
    }

    pub fn add(&self, other: &Vec4) -> Vec4 {
        Vec4([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
            self.0[3] + other.0[3],
        ])
    }

    /// Projective normalization (first nonzero coordinate 1); `None` for zero.
    pub fn normalized(&self, ctx: &FieldCtx) -> Option<ProjPoint4> {
        let lead = self.0.iter().find(|x| !x.is_zero())?;
        let inv = ctx.inv(*lead).ok()?;
        Some(ProjPoint4(self.scale(ctx, inv)))
    }
}

/// A point of PG(3, ·) in canonical form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPoint4(Vec4);

impl ProjPoint4 {
    pub fn new(ctx: &FieldCtx, v: Vec4) -> Result<Self> {
        v.normalized(ctx)
            .ok_or_else(|| Error::Malformed("zero vector is not a point".into()))
    }

    pub fn vector(&self) -> &Vec4 {
        &self.0
    }

    pub fn coords(&self) -> [Fe; 4] {
        self.0 .0
    }
}

/// `h(u, v)`.
#[inline]
pub fn hermitian(ctx: &FieldCtx, u: &Vec4, v: &Vec4) -> Fe {
    let (u, v) = (&u.0, &v.0);
    ctx.mul(u[0], ctx.fq(v[3]))
        + ctx.mul(u[1], ctx.fq(v[1]))
        + ctx.mul(u[2], ctx.fq(v[2]))
        + ctx.mul(u[3], ctx.fq(v[0]))
}

pub fn is_isotropic(ctx: &FieldCtx, v: &Vec4) -> bool {
    hermitian(ctx, v, v).is_zero()
}

/// A 4×4 matrix acting on column vectors.
pub type Mat4 = [[Fe; 4]; 4];

pub fn mat4_apply(ctx: &FieldCtx, m: &Mat4, v: &Vec4) -> Vec4 {
    let mut out = [Fe::ZERO; 4];
    for (i, row) in m.iter().enumerate() {
        out[i] = row
            .iter()
            .zip(v.0.iter())
            .fold(Fe::ZERO, |acc, (&a, &b)| acc + ctx.mul(a, b));
    }
    Vec4(out)
}

/// A line of PG(3,q²): the row space of a rank-2 matrix in reduced row-echelon form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Line4 {
    rows: [[Fe; 4]; 2],
}

impl Line4 {
    /// The GF(q²)-span of two vectors.
    pub fn span(ctx: &FieldCtx, a: &Vec4, b: &Vec4) -> Result<Line4> {
        if !a.is_rational(ctx) || !b.is_rational(ctx) {
            return Err(Error::Malformed("line spanned by non-GF(q^2) vectors".into()));
        }
        let mut m = vec![a.0.to_vec(), b.0.to_vec()];
        let piv = linalg::rref(ctx, &mut m);
        if piv.len() != 2 {
            return Err(Error::Rank(format!("span has rank {}", piv.len())));
        }
        Ok(Line4 {
            rows: [
                [m[0][0], m[0][1], m[0][2], m[0][3]],
                [m[1][0], m[1][1], m[1][2], m[1][3]],
            ],
        })
    }

    pub fn basis(&self) -> [Vec4; 2] {
        [Vec4(self.rows[0]), Vec4(self.rows[1])]
    }

    fn pivots(&self) -> (usize, usize) {
        let p0 = self.rows[0].iter().position(|x| !x.is_zero()).unwrap();
        let p1 = self.rows[1].iter().position(|x| !x.is_zero()).unwrap();
        (p0, p1)
    }

    /// All q²+1 points, in the order ⟨r₀ + c·r₁⟩ for c ∈ GF(q²) ascending, then ⟨r₁⟩.
    ///
    /// Both rows have zeros before the first pivot, so every listed vector is
    /// already in canonical form.
    pub fn points(&self, ctx: &FieldCtx) -> Vec<ProjPoint4> {
        let [r0, r1] = self.basis();
        let mut pts: Vec<ProjPoint4> = ctx
            .gf_q2()
            .iter()
            .map(|&c| ProjPoint4(r0.add(&r1.scale(ctx, c))))
            .collect();
        pts.push(ProjPoint4(r1));
        pts
    }

    /// Sorted point list.
    pub fn sorted_points(&self, ctx: &FieldCtx) -> Vec<ProjPoint4> {
        let mut pts = self.points(ctx);
        pts.sort_unstable();
        pts
    }

    pub fn contains(&self, ctx: &FieldCtx, p: &ProjPoint4) -> bool {
        let (p0, p1) = self.pivots();
        let v = p.0;
        let reduced = v
            .add(&Vec4(self.rows[0]).scale(ctx, v.0[p0]))
            .add(&Vec4(self.rows[1]).scale(ctx, v.0[p1]));
        reduced.is_zero()
    }

    /// Dimension of the intersection with `other` as vector subspaces (0, 1 or 2).
    pub fn meet_dim(&self, ctx: &FieldCtx, other: &Line4) -> usize {
        let m: Vec<Vec<Fe>> = self
            .rows
            .iter()
            .chain(other.rows.iter())
            .map(|r| r.to_vec())
            .collect();
        4 - linalg::rank(ctx, &m)
    }

    pub fn apply(&self, ctx: &FieldCtx, m: &Mat4) -> Result<Line4> {
        let [a, b] = self.basis();
        Line4::span(ctx, &mat4_apply(ctx, m, &a), &mat4_apply(ctx, m, &b))
    }

    pub fn is_totally_isotropic(&self, ctx: &FieldCtx) -> bool {
        let [a, b] = self.basis();
        hermitian(ctx, &a, &a).is_zero()
            && hermitian(ctx, &b, &b).is_zero()
            && hermitian(ctx, &a, &b).is_zero()
    }
}

/// Every isotropic point of H(3,q²), sorted.
pub fn hermitian_points(ctx: &FieldCtx) -> Vec<ProjPoint4> {
    let f = ctx.gf_q2();
    let mut out = Vec::new();
    for lead in 0..4 {
        let free = 3 - lead;
        let total = f.len().pow(free as u32);
        for idx in 0..total {
            let mut v = [Fe::ZERO; 4];
            v[lead] = Fe::ONE;
            let mut r = idx;
            for slot in v.iter_mut().skip(lead + 1) {
                *slot = f[r % f.len()];
                r /= f.len();
            }
            let v = Vec4(v);
            if is_isotropic(ctx, &v) {
                out.push(ProjPoint4(v));
            }
        }
    }
    out.sort_unstable();
    out
}

/// An element (α, x^q, x, β) of Ŵ, α, β ∈ GF(q), x ∈ GF(q²).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WHatVec {
    pub alpha: Fe,
    pub x: Fe,
    pub beta: Fe,
}

impl WHatVec {
    pub fn new(ctx: &FieldCtx, alpha: Fe, x: Fe, beta: Fe) -> Result<Self> {
        if !ctx.in_gf_q(alpha) || !ctx.in_gf_q(beta) || !ctx.in_gf_q2(x) {
            return Err(Error::Malformed("W-hat coordinates out of range".into()));
        }
        Ok(WHatVec { alpha, x, beta })
    }

    pub fn from_vec4(ctx: &FieldCtx, v: &Vec4) -> Result<Self> {
        let [a, xq, x, b] = v.0;
        if ctx.fq(x) != xq {
            return Err(Error::Malformed("second coordinate is not x^q".into()));
        }
        WHatVec::new(ctx, a, x, b)
    }

    pub fn to_vec4(&self, ctx: &FieldCtx) -> Vec4 {
        Vec4([self.alpha, ctx.fq(self.x), self.x, self.beta])
    }
}

/// `b̂(v, v') = αβ' + βα' + x x'^q + x^q x'`.
pub fn bhat(ctx: &FieldCtx, u: &WHatVec, v: &WHatVec) -> Fe {
    ctx.mul(u.alpha, v.beta)
        + ctx.mul(u.beta, v.alpha)
        + ctx.mul(u.x, ctx.fq(v.x))
        + ctx.mul(ctx.fq(u.x), v.x)
}

/// `Q̂(v) = αβ + x^{q+1}`.
pub fn qhat(ctx: &FieldCtx, u: &WHatVec) -> Fe {
    ctx.mul(u.alpha, u.beta) + ctx.norm_q(u.x)
}

/// Whether a point of PG(3,q²) is spanned by a vector of Ŵ.
///
/// Scales by the inverse of coordinate 1 (or 4) when nonzero and checks the
/// pattern directly; otherwise the point is ⟨(0, a, b, 0)⟩ and lies in Ŵ iff
/// `(a/b)^{q+1} = 1`, the condition for some c to satisfy `c·a = (c·b)^q`.
pub fn is_what_point(ctx: &FieldCtx, p: &ProjPoint4) -> bool {
    let v = p.0 .0;
    for lead in [0, 3] {
        if !v[lead].is_zero() {
            let inv = ctx.inv(v[lead]).unwrap();
            let w = v.map(|c| ctx.mul(c, inv));
            return ctx.in_gf_q(w[0]) && ctx.in_gf_q(w[3]) && ctx.fq(w[2]) == w[1];
        }
    }
    match (v[1].is_zero(), v[2].is_zero()) {
        (false, false) => {
            let r = ctx.div(v[1], v[2]).unwrap();
            ctx.norm_q(r) == Fe::ONE
        }
        _ => false,
    }
}

/// The (q+1)(q²+1) points of Ŵ, sorted.
pub fn what_points(ctx: &FieldCtx) -> Vec<ProjPoint4> {
    let mut set = BTreeSet::new();
    for &a in ctx.gf_q() {
        for &b in ctx.gf_q() {
            for &x in ctx.gf_q2() {
                let v = WHatVec { alpha: a, x, beta: b }.to_vec4(ctx);
                if let Some(p) = v.normalized(ctx) {
                    set.insert(p);
                }
            }
        }
    }
    set.into_iter().collect()
}

/// The (q+1)(q²+1) lines of Ŵ (extended totally isotropic lines of W(3,q)), sorted.
pub fn what_lines(ctx: &FieldCtx) -> Vec<Line4> {
    let pts = what_points(ctx);
    let mut set = BTreeSet::new();
    for (i, p) in pts.iter().enumerate() {
        for r in &pts[i + 1..] {
            if hermitian(ctx, p.vector(), r.vector()).is_zero() {
                set.insert(Line4::span(ctx, p.vector(), r.vector()).unwrap());
            }
        }
    }
    set.into_iter().collect()
}

pub fn line_meets_what(ctx: &FieldCtx, l: &Line4) -> bool {
    l.points(ctx).iter().any(|p| is_what_point(ctx, p))
}

/// A totally isotropic line through a given point, flagged when it meets Ŵ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IsotropicLine {
    pub line: Line4,
    pub meets_what: bool,
}

/// The q+1 totally isotropic lines through an isotropic point, sorted.
pub fn h_lines_through(ctx: &FieldCtx, p: &ProjPoint4) -> Result<Vec<IsotropicLine>> {
    let v = p.vector();
    if !is_isotropic(ctx, v) || !v.is_rational(ctx) {
        return Err(Error::Geometry("point is not on H(3,q^2)".into()));
    }
    // h(r, p) = 0 is GF(q²)-linear in r.
    let row = vec![ctx.fq(v.0[3]), ctx.fq(v.0[1]), ctx.fq(v.0[2]), ctx.fq(v.0[0])];
    let plane = linalg::nullspace(ctx, &[row], 4);
    let mut complement = None;
    'outer: for i in 0..plane.len() {
        for j in i + 1..plane.len() {
            let m = vec![v.0.to_vec(), plane[i].clone(), plane[j].clone()];
            if linalg::rank(ctx, &m) == 3 {
                complement = Some((plane[i].clone(), plane[j].clone()));
                break 'outer;
            }
        }
    }
    let (u, w) = complement.ok_or_else(|| Error::Rank("degenerate tangent plane".into()))?;
    let u = Vec4([u[0], u[1], u[2], u[3]]);
    let w = Vec4([w[0], w[1], w[2], w[3]]);
    let mut lines = Vec::new();
    let candidates = ctx
        .gf_q2()
        .iter()
        .map(|&c| u.add(&w.scale(ctx, c)))
        .chain(std::iter::once(w));
    for r in candidates {
        if is_isotropic(ctx, &r) {
            let line = Line4::span(ctx, v, &r)?;
            lines.push(IsotropicLine {
                line,
                meets_what: line_meets_what(ctx, &line),
            });
        }
    }
    lines.sort_unstable_by_key(|a| a.line);
    let expected = ctx.q() as usize + 1;
    if lines.len() != expected {
        return Err(Error::Geometry(format!(
            "{} isotropic lines through a point, expected {expected}",
            lines.len()
        )));
    }
    Ok(lines)
}

/// A vector of V(6,q²).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vec6(pub [Fe; 6]);

impl Vec6 {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    /// First nonzero coordinate scaled to 1.
    pub fn normalized(&self, ctx: &FieldCtx) -> Option<Vec6> {
        let lead = self.0.iter().find(|x| !x.is_zero())?;
        let inv = ctx.inv(*lead).ok()?;
        Some(Vec6(self.0.map(|x| ctx.mul(x, inv))))
    }
}

/// `X₁X₆ + X₂X₅ + X₃X₄`.
pub fn klein_quadric(ctx: &FieldCtx, v: &Vec6) -> Fe {
    let x = &v.0;
    ctx.mul(x[0], x[5]) + ctx.mul(x[1], x[4]) + ctx.mul(x[2], x[3])
}

/// Polar form of the Klein quadric.
pub fn klein_polar(ctx: &FieldCtx, a: &Vec6, b: &Vec6) -> Fe {
    let (x, y) = (&a.0, &b.0);
    ctx.mul(x[0], y[5])
        + ctx.mul(x[5], y[0])
        + ctx.mul(x[1], y[4])
        + ctx.mul(x[4], y[1])
        + ctx.mul(x[2], y[3])
        + ctx.mul(x[3], y[2])
}

/// Plücker coordinates `(p₀₁, p₀₂, p₀₃, p₁₂, p₃₁, p₂₃)` of a line, normalized.
pub fn klein_map(ctx: &FieldCtx, l: &Line4) -> Vec6 {
    let [a, b] = l.basis();
    let p = |i: usize, j: usize| ctx.mul(a.0[i], b.0[j]) + ctx.mul(a.0[j], b.0[i]);
    let v = Vec6([p(0, 1), p(0, 2), p(0, 3), p(1, 2), p(3, 1), p(2, 3)]);
    v.normalized(ctx).expect("Plücker vector of a rank-2 line is nonzero")
}

/// An element (x, x^q, y, y^q, z, z^q) of the GF(q)-space Ṽ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VTilde {
    pub x: Fe,
    pub y: Fe,
    pub z: Fe,
}

impl VTilde {
    pub const ZERO: VTilde = VTilde { x: Fe::ZERO, y: Fe::ZERO, z: Fe::ZERO };

    pub fn new(ctx: &FieldCtx, x: Fe, y: Fe, z: Fe) -> Result<Self> {
        if !(ctx.in_gf_q2(x) && ctx.in_gf_q2(y) && ctx.in_gf_q2(z)) {
            return Err(Error::Malformed("V-tilde coordinates outside GF(q^2)".into()));
        }
        Ok(VTilde { x, y, z })
    }

    pub fn to_vec6(&self, ctx: &FieldCtx) -> Vec6 {
        Vec6([
            self.x,
            ctx.fq(self.x),
            self.y,
            ctx.fq(self.y),
            self.z,
            ctx.fq(self.z),
        ])
    }

    /// Accepts a 6-vector only when it has the Ṽ pattern.
    pub fn from_vec6(ctx: &FieldCtx, v: &Vec6) -> Result<Self> {
        let x = v.0;
        if ctx.fq(x[0]) != x[1] || ctx.fq(x[2]) != x[3] || ctx.fq(x[4]) != x[5] {
            return Err(Error::Malformed("vector is not in V-tilde".into()));
        }
        VTilde::new(ctx, x[0], x[2], x[4])
    }

    /// A Ṽ representative of the projective point ⟨v⟩, if one exists.
    pub fn from_projective(ctx: &FieldCtx, v: &Vec6) -> Option<Self> {
        ctx.gf_q2().iter().skip(1).find_map(|&c| {
            let w = Vec6(v.0.map(|x| ctx.mul(c, x)));
            VTilde::from_vec6(ctx, &w).ok()
        })
    }

    pub fn add(&self, o: &VTilde) -> VTilde {
        VTilde { x: self.x + o.x, y: self.y + o.y, z: self.z + o.z }
    }

    /// Scalar multiple by `c ∈ GF(q)`.
    pub fn scale(&self, ctx: &FieldCtx, c: Fe) -> VTilde {
        debug_assert!(ctx.in_gf_q(c));
        VTilde { x: ctx.mul(c, self.x), y: ctx.mul(c, self.y), z: ctx.mul(c, self.z) }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero() && self.z.is_zero()
    }

    /// Coordinates over GF(q) in the basis {1, ε} of GF(q²) for each of x, y, z.
    pub fn coords(&self, ctx: &FieldCtx) -> [Fe; 6] {
        let [x0, x1] = split_q2(ctx, self.x);
        let [y0, y1] = split_q2(ctx, self.y);
        let [z0, z1] = split_q2(ctx, self.z);
        [x0, x1, y0, y1, z0, z1]
    }

    pub fn from_coords(ctx: &FieldCtx, c: &[Fe]) -> VTilde {
        let eps = ctx.q2_basis_element();
        let join = |a: Fe, b: Fe| a + ctx.mul(b, eps);
        VTilde { x: join(c[0], c[1]), y: join(c[2], c[3]), z: join(c[4], c[5]) }
    }
}

/// `a = a₀ + a₁ε` with a₀, a₁ ∈ GF(q).
fn split_q2(ctx: &FieldCtx, a: Fe) -> [Fe; 2] {
    let eps = ctx.q2_basis_element();
    let denom = eps + ctx.fq(eps);
    let a1 = ctx.div(a + ctx.fq(a), denom).expect("ε ∉ GF(q)");
    [a + ctx.mul(a1, eps), a1]
}

/// `Q̃(w) = xz^q + x^q z + y^{q+1}`.
pub fn qtilde(ctx: &FieldCtx, w: &VTilde) -> Fe {
    ctx.mul(w.x, ctx.fq(w.z)) + ctx.mul(ctx.fq(w.x), w.z) + ctx.norm_q(w.y)
}

/// `b̃(w, w') = xz'^q + x^q z' + yy'^q + y^q y' + zx'^q + z^q x'`.
pub fn btilde(ctx: &FieldCtx, a: &VTilde, b: &VTilde) -> Fe {
    ctx.mul(a.x, ctx.fq(b.z))
        + ctx.mul(ctx.fq(a.x), b.z)
        + ctx.mul(a.y, ctx.fq(b.y))
        + ctx.mul(ctx.fq(a.y), b.y)
        + ctx.mul(a.z, ctx.fq(b.x))
        + ctx.mul(ctx.fq(a.z), b.x)
}

/// w₀ = (0, 0, 1, 1, 0, 0).
pub fn w0() -> VTilde {
    VTilde { x: Fe::ZERO, y: Fe::ONE, z: Fe::ZERO }
}

/// A GF(q)-basis of Γ = {(x, x^q, c, c, z, z^q) : c ∈ GF(q)}.
pub fn gamma_basis(ctx: &FieldCtx) -> Vec<VTilde> {
    let eps = ctx.q2_basis_element();
    vec![
        VTilde { x: Fe::ONE, y: Fe::ZERO, z: Fe::ZERO },
        VTilde { x: eps, y: Fe::ZERO, z: Fe::ZERO },
        w0(),
        VTilde { x: Fe::ZERO, y: Fe::ZERO, z: Fe::ONE },
        VTilde { x: Fe::ZERO, y: Fe::ZERO, z: eps },
    ]
}

/// Canonical (RREF over GF(q)) basis of the GF(q)-span of `vs`.
pub fn span_basis(ctx: &FieldCtx, vs: &[VTilde]) -> Vec<VTilde> {
    let mut rows: Vec<Vec<Fe>> = vs.iter().map(|v| v.coords(ctx).to_vec()).collect();
    if rows.is_empty() {
        return Vec::new();
    }
    linalg::rref(ctx, &mut rows);
    rows.iter().map(|r| VTilde::from_coords(ctx, r)).collect()
}

pub fn span_dim(ctx: &FieldCtx, vs: &[VTilde]) -> usize {
    span_basis(ctx, vs).len()
}

/// Canonical basis of `X^⊥ = {w ∈ Ṽ : b̃(w, u) = 0 ∀u ∈ X}`.
pub fn perp(ctx: &FieldCtx, vs: &[VTilde]) -> Vec<VTilde> {
    let unit: Vec<VTilde> = (0..6)
        .map(|k| {
            let mut c = [Fe::ZERO; 6];
            c[k] = Fe::ONE;
            VTilde::from_coords(ctx, &c)
        })
        .collect();
    // Row for u: the GF(q)-linear functional w ↦ b̃(w, u) in coordinates.
    let rows: Vec<Vec<Fe>> = vs
        .iter()
        .map(|u| unit.iter().map(|e| btilde(ctx, e, u)).collect())
        .collect();
    linalg::nullspace(ctx, &rows, 6)
        .iter()
        .map(|r| VTilde::from_coords(ctx, r))
        .collect()
}
