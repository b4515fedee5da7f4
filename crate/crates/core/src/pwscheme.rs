//! The hemisystem side: lines m_𝐭 of H(3,q²), their τ-images, subtended
//! spreads, the geometric relations R̃₁–R̃₃ and their Klein-side evaluation.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::OnceLock;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::fields::{Fe, FieldCtx};
use crate::geom::{
    self, btilde, h_lines_through, hermitian_points, is_what_point, klein_map, qhat, qtilde,
    Line4, Mat4, ProjPoint4, VTilde, Vec4, WHatVec,
};
use crate::hxscheme::PairSet;
use crate::schemecore::RelationTable;
use crate::{Error, Result};

/// An element of GF(q⁴) ∪ {∞}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjParam {
    Finite(Fe),
    Infinity,
}

/// `θ(t) = ⟨(1, t^q, t, t^{q+1})⟩`, `θ(∞) = ⟨(0,0,0,1)⟩`.
pub fn theta(ctx: &FieldCtx, t: ProjParam) -> ProjPoint4 {
    let v = match t {
        ProjParam::Finite(t) => {
            let tq = ctx.fq(t);
            Vec4([Fe::ONE, tq, t, ctx.mul(t, tq)])
        }
        ProjParam::Infinity => Vec4([Fe::ZERO, Fe::ZERO, Fe::ZERO, Fe::ONE]),
    };
    v.normalized(ctx).expect("nonzero")
}

/// `X_λ = (λ+λ', λt^q+λ't^{q³}, λt+λ't^{q²}, λt^{q+1}+λ't^{q³+q²})` with `λ' = λ^{q²}`.
pub fn x_lambda(ctx: &FieldCtx, t: Fe, lambda: Fe) -> Vec4 {
    let l2 = ctx.fqj(lambda, 2);
    let t1 = ctx.fq(t);
    let t2 = ctx.fq(t1);
    let t3 = ctx.fq(t2);
    let comb = |a: Fe, b: Fe| ctx.mul(lambda, a) + ctx.mul(l2, b);
    Vec4([
        lambda + l2,
        comb(t1, t3),
        comb(t, t2),
        comb(ctx.mul(t, t1), ctx.mul(t3, t2)),
    ])
}

/// The line m_𝐭 = ⟨X₁, X_ω⟩.
pub fn m_line(ctx: &FieldCtx, t: Fe) -> Result<Line4> {
    if ctx.in_gf_q2(t) {
        return Err(Error::Geometry("t lies in GF(q^2)".into()));
    }
    Line4::span(ctx, &x_lambda(ctx, t, Fe::ONE), &x_lambda(ctx, t, ctx.omega()))
}

/// `w_𝐭 = (x, x^q, y, y^q, z, z^q)` with `x = t^q + t^{q³}`, `y = t^{1+q} + t^{q²+q³}`,
/// `z = t^{1+q+q³} + t^{q+q²+q³}`.
pub fn w_vec(ctx: &FieldCtx, t: Fe) -> VTilde {
    let t1 = ctx.fq(t);
    let t2 = ctx.fq(t1);
    let t3 = ctx.fq(t2);
    let t13 = ctx.mul(t1, t3);
    VTilde {
        x: t1 + t3,
        y: ctx.mul(t, t1) + ctx.mul(t2, t3),
        z: ctx.mul(t, t13) + ctx.mul(t2, t13),
    }
}

/// `w′_𝐭`: as `w_𝐭` with `y` replaced by `y^q`.
pub fn w_prime_vec(ctx: &FieldCtx, t: Fe) -> VTilde {
    let w = w_vec(ctx, t);
    VTilde { y: ctx.fq(w.y), ..w }
}

/// `τ(X₁,X₂,X₃,X₄) = (X₁^q, X₃^q, X₂^q, X₄^q)`.
pub fn tau_vec(ctx: &FieldCtx, v: &Vec4) -> Vec4 {
    let [a, b, c, d] = v.0;
    Vec4([ctx.fq(a), ctx.fq(c), ctx.fq(b), ctx.fq(d)])
}

pub fn tau(ctx: &FieldCtx, l: &Line4) -> Line4 {
    let [a, b] = l.basis();
    Line4::span(ctx, &tau_vec(ctx, &a), &tau_vec(ctx, &b)).expect("τ is a bijection")
}

/// A line of the hemisystem {m_𝐭} with its Klein data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HemiLine {
    pub line: Line4,
    pub pair: usize,
    pub rep: Fe,
    pub w: VTilde,
    pub w_prime: VTilde,
}

/// The lines m_𝐭 indexed like the pairs.
#[derive(Clone, Debug)]
pub struct Hemisystem {
    lines: Vec<HemiLine>,
    index: HashMap<Line4, usize>,
}

impl Hemisystem {
    pub fn new(ctx: &FieldCtx, pairs: &PairSet) -> Result<Self> {
        let lines = pairs
            .reps()
            .par_iter()
            .enumerate()
            .map(|(i, &t)| {
                Ok(HemiLine {
                    line: m_line(ctx, t)?,
                    pair: i,
                    rep: t,
                    w: w_vec(ctx, t),
                    w_prime: w_prime_vec(ctx, t),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let index: HashMap<Line4, usize> = lines.iter().map(|l| (l.line, l.pair)).collect();
        if index.len() != lines.len() {
            return Err(Error::Geometry("t ↦ m_t is not injective".into()));
        }
        Ok(Hemisystem { lines, index })
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn get(&self, i: usize) -> &HemiLine {
        &self.lines[i]
    }

    pub fn lines(&self) -> &[HemiLine] {
        &self.lines
    }

    pub fn index_of(&self, l: &Line4) -> Option<usize> {
        self.index.get(l).copied()
    }

    pub fn line_set(&self) -> Vec<Line4> {
        self.lines.iter().map(|l| l.line).collect()
    }

    pub fn tau_lines(&self, ctx: &FieldCtx) -> Vec<Line4> {
        self.lines.par_iter().map(|l| tau(ctx, &l.line)).collect()
    }
}

/// Checks one hemisystem line: totally isotropic, disjoint from Ŵ, and with
/// Klein images ⟨w_𝐭⟩ and ⟨w′_𝐭⟩ for the line and its τ-image.
pub fn check_hemiline(ctx: &FieldCtx, hl: &HemiLine) -> Result<()> {
    let fail = |what: &str| Err(Error::Geometry(format!("m_t for t = {}: {what}", hl.rep)));
    if !hl.line.is_totally_isotropic(ctx) {
        return fail("not totally isotropic");
    }
    if geom::line_meets_what(ctx, &hl.line) {
        return fail("meets W-hat");
    }
    if klein_map(ctx, &hl.line) != hl.w.to_vec6(ctx).normalized(ctx).expect("nonzero") {
        return fail("Klein image differs from w_t");
    }
    let tl = tau(ctx, &hl.line);
    if klein_map(ctx, &tl) != hl.w_prime.to_vec6(ctx).normalized(ctx).expect("nonzero") {
        return fail("Klein image of the tau-image differs from w'_t");
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HemisystemReport {
    pub lines: usize,
    pub external_points: usize,
    pub required_count: usize,
    /// Points (as coordinate encodings) whose incidence count deviates, with the count.
    pub deviations: Vec<([u32; 4], usize)>,
    pub pass: bool,
}

/// Counts, for every point of H(3,q²) off Ŵ, the lines of `lines` through it;
/// passes iff each count is q/2 and no line meets Ŵ.
pub fn verify_hemisystem(ctx: &FieldCtx, lines: &[Line4]) -> HemisystemReport {
    let mut incidence: HashMap<ProjPoint4, usize> = HashMap::new();
    for l in lines {
        for p in l.points(ctx) {
            *incidence.entry(p).or_default() += 1;
        }
    }
    let required = (ctx.q() / 2) as usize;
    let mut deviations = Vec::new();
    let mut external = 0;
    for p in hermitian_points(ctx) {
        let c = incidence.remove(&p).unwrap_or(0);
        let expected = if is_what_point(ctx, &p) { 0 } else { required };
        if expected != 0 {
            external += 1;
        }
        if c != expected {
            deviations.push((p.coords().map(Fe::bits), c));
        }
    }
    // Anything left is a non-isotropic point.
    for (p, c) in incidence {
        deviations.push((p.coords().map(Fe::bits), c));
    }
    deviations.sort();
    HemisystemReport {
        lines: lines.len(),
        external_points: external,
        required_count: required,
        pass: deviations.is_empty(),
        deviations,
    }
}

/// The lines of H(3,q²) meeting both `l` and Ŵ, sorted: for each point of l,
/// the unique isotropic line through it that meets Ŵ.
pub fn subtended_spread(ctx: &FieldCtx, l: &Line4) -> Result<Vec<Line4>> {
    let mut spread = Vec::with_capacity(ctx.q().pow(2) as usize + 1);
    for p in l.points(ctx) {
        let meeting: Vec<Line4> = h_lines_through(ctx, &p)?
            .into_iter()
            .filter(|x| x.meets_what)
            .map(|x| x.line)
            .collect();
        if meeting.len() != 1 {
            return Err(Error::Geometry(format!(
                "{} lines through an external point meet W-hat",
                meeting.len()
            )));
        }
        spread.push(meeting[0]);
    }
    spread.sort_unstable();
    spread.dedup();
    let expected = ctx.q().pow(2) as usize + 1;
    if spread.len() != expected {
        return Err(Error::Geometry(format!("spread has {} lines, expected {expected}", spread.len())));
    }
    // Spread property: the Ŵ-points of its lines partition the (q+1)(q²+1) Ŵ-points.
    let covered: HashSet<ProjPoint4> = spread
        .iter()
        .flat_map(|s| s.points(ctx).into_iter().filter(|p| is_what_point(ctx, p)))
        .collect();
    let q = ctx.q() as usize;
    if covered.len() != (q + 1) * (q * q + 1) {
        return Err(Error::Geometry("subtended lines do not partition W-hat".into()));
    }
    Ok(spread)
}

/// Lazily computed, shareable subtended spreads of a fixed line list.
pub struct SpreadCache<'a> {
    ctx: &'a FieldCtx,
    lines: &'a [Line4],
    spreads: Vec<OnceLock<std::result::Result<Vec<Line4>, String>>>,
}

impl<'a> SpreadCache<'a> {
    pub fn new(ctx: &'a FieldCtx, lines: &'a [Line4]) -> Self {
        SpreadCache { ctx, lines, spreads: (0..lines.len()).map(|_| OnceLock::new()).collect() }
    }

    pub fn get(&self, i: usize) -> Result<&[Line4]> {
        self.spreads[i]
            .get_or_init(|| subtended_spread(self.ctx, &self.lines[i]).map_err(|e| e.to_string()))
            .as_deref()
            .map_err(|e| Error::Geometry(e.clone()))
    }

    /// Fills every entry in parallel.
    pub fn fill(&self) -> Result<()> {
        (0..self.lines.len()).into_par_iter().try_for_each(|i| self.get(i).map(|_| ()))
    }
}

fn sorted_intersection_len(a: &[Line4], b: &[Line4]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Geometric outcome for a pair of hemisystem lines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GeometricOutcome {
    pub class: u8,
    pub meet: usize,
    pub spread_meet: usize,
}

/// R̃₁ if the lines meet; otherwise R̃₂ or R̃₃ by |S_l ∩ S_m| ∈ {1, q+1}.
pub fn classify_pw_geometric(
    ctx: &FieldCtx,
    l: &Line4,
    m: &Line4,
    sl: &[Line4],
    sm: &[Line4],
) -> Result<GeometricOutcome> {
    let meet = l.meet_dim(ctx, m);
    let spread_meet = sorted_intersection_len(sl, sm);
    let q = ctx.q() as usize;
    let class = match (meet, spread_meet) {
        (1, _) => 1,
        (0, 1) => 2,
        (0, s) if s == q + 1 => 3,
        _ => {
            return Err(Error::Geometry(format!(
                "lines meet in dimension {meet}, spreads share {spread_meet} lines"
            )))
        }
    };
    Ok(GeometricOutcome { class, meet, spread_meet })
}

/// Klein-side quantities for a pair (s, t).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct KleinOutcome {
    pub class: u8,
    /// `b̃(w_𝐬, w_𝐭)`.
    pub b_st: u32,
    /// `b̃(w_𝐬, w′_𝐭)`.
    pub b_st_prime: u32,
    /// `Q̃(v_{𝐬,𝐭}) = b̃(w_𝐬,w_𝐭)(b̃(w_𝐬,w_𝐭) + Tr(s^{q+1})Tr(t^{q+1})) = b̃(w_𝐬,w_𝐭) b̃(w_𝐬,w′_𝐭)`.
    pub factorization_holds: bool,
    /// `b̃(w_𝐬, w₀) = Tr(s^{q+1})` and `b̃(w_𝐭, w₀) = Tr(t^{q+1})`.
    pub gram_holds: bool,
    /// `v_{𝐬,𝐭}` is orthogonal to w_𝐬, w₀ and w_𝐭.
    pub radical_holds: bool,
}

/// The radical vector `Tr(t^{q+1}) w_𝐬 + b̃(w_𝐬,w_𝐭) w₀ + Tr(s^{q+1}) w_𝐭`.
pub fn radical_vector(ctx: &FieldCtx, s: Fe, t: Fe) -> VTilde {
    let (ws, wt) = (w_vec(ctx, s), w_vec(ctx, t));
    let trs = ctx.rel_trace_to_q(ctx.mul(s, ctx.fq(s)));
    let trt = ctx.rel_trace_to_q(ctx.mul(t, ctx.fq(t)));
    let b = btilde(ctx, &ws, &wt);
    ws.scale(ctx, trt).add(&geom::w0().scale(ctx, b)).add(&wt.scale(ctx, trs))
}

/// Class 1 if `b̃(w_𝐬,w_𝐭) = 0`, 2 if `b̃(w_𝐬,w′_𝐭) = 0`, else 3, together
/// with the exact identity checks behind the case split.
pub fn classify_pw_klein(ctx: &FieldCtx, s: Fe, t: Fe) -> Result<KleinOutcome> {
    let (ws, wt, wtp) = (w_vec(ctx, s), w_vec(ctx, t), w_prime_vec(ctx, t));
    let w0 = geom::w0();
    let b1 = btilde(ctx, &ws, &wt);
    let b2 = btilde(ctx, &ws, &wtp);
    let class = match (b1.is_zero(), b2.is_zero()) {
        (true, true) => {
            return Err(Error::Geometry(format!("both Klein forms vanish for s = {s}, t = {t}")))
        }
        (true, false) => 1,
        (false, true) => 2,
        (false, false) => 3,
    };
    let trs = ctx.rel_trace_to_q(ctx.mul(s, ctx.fq(s)));
    let trt = ctx.rel_trace_to_q(ctx.mul(t, ctx.fq(t)));
    let v = ws.scale(ctx, trt).add(&w0.scale(ctx, b1)).add(&wt.scale(ctx, trs));
    let qv = qtilde(ctx, &v);
    let factorization_holds =
        qv == ctx.mul(b1, b1 + ctx.mul(trs, trt)) && qv == ctx.mul(b1, b2);
    let gram_holds = btilde(ctx, &ws, &w0) == trs && btilde(ctx, &wt, &w0) == trt;
    let radical_holds = [ws, w0, wt].iter().all(|u| btilde(ctx, &v, u).is_zero());
    Ok(KleinOutcome {
        class,
        b_st: b1.bits(),
        b_st_prime: b2.bits(),
        factorization_holds,
        gram_holds,
        radical_holds,
    })
}

/// Whether w₀ lies on the line L_𝐭 = ⟨w_𝐭, w′_𝐭⟩.
pub fn w0_on_l(ctx: &FieldCtx, t: Fe) -> bool {
    let (w, wp) = (w_vec(ctx, t), w_prime_vec(ctx, t));
    geom::span_dim(ctx, &[w, wp]) == 2 && geom::span_dim(ctx, &[w, wp, geom::w0()]) == 2
}

/// Whether the Klein image of the subtended spread of m_𝐭 equals the set of
/// singular points of `L_𝐭^⊥` (which must lie in Γ).
pub fn spread_image_matches(ctx: &FieldCtx, t: Fe, spread: &[Line4]) -> Result<bool> {
    let lperp = geom::perp(ctx, &[w_vec(ctx, t), w_prime_vec(ctx, t)]);
    if lperp.len() != 4 {
        return Err(Error::Rank(format!("L_t^perp has dimension {}", lperp.len())));
    }
    let q = ctx.gf_q();
    let mut singular = BTreeSet::new();
    let total = q.len().pow(4);
    for idx in 1..total {
        let mut v = VTilde::ZERO;
        let mut r = idx;
        for b in &lperp {
            v = v.add(&b.scale(ctx, q[r % q.len()]));
            r /= q.len();
        }
        if !ctx.in_gf_q(v.y) {
            return Ok(false);
        }
        if qtilde(ctx, &v).is_zero() {
            singular.insert(v.to_vec6(ctx).normalized(ctx).expect("nonzero"));
        }
    }
    let image: BTreeSet<_> = spread.iter().map(|l| klein_map(ctx, l)).collect();
    Ok(image == singular)
}

/// Builds the geometric relation table on `lines` (pairs indexed alike).
pub fn geometric_table(ctx: &FieldCtx, lines: &[Line4], spreads: &SpreadCache) -> Result<RelationTable> {
    spreads.fill()?;
    RelationTable::try_from_pairs(lines.len(), 3, |i, j| {
        Ok(classify_pw_geometric(ctx, &lines[i], &lines[j], spreads.get(i)?, spreads.get(j)?)?.class)
    })
}

/// Builds the relation table from the Klein-side case split.
pub fn klein_table(ctx: &FieldCtx, pairs: &PairSet) -> Result<RelationTable> {
    RelationTable::try_from_pairs(pairs.len(), 3, |i, j| {
        Ok(classify_pw_klein(ctx, pairs.rep(i), pairs.rep(j))?.class)
    })
}

/// A 2×2 matrix over GF(q²), acting on column vectors.
pub type Mat2 = [[Fe; 2]; 2];

pub fn det2(ctx: &FieldCtx, g: &Mat2) -> Fe {
    ctx.mul(g[0][0], g[1][1]) + ctx.mul(g[0][1], g[1][0])
}

/// `χ(g) = g ⊗ g^q`.
pub fn chi_matrix(ctx: &FieldCtx, g: &Mat2) -> Result<Mat4> {
    if g.iter().flatten().any(|&x| !ctx.in_gf_q2(x)) {
        return Err(Error::Malformed("matrix entries outside GF(q^2)".into()));
    }
    if det2(ctx, g).is_zero() {
        return Err(Error::Malformed("singular matrix".into()));
    }
    let mut m = [[Fe::ZERO; 4]; 4];
    for i in 0..2 {
        for k in 0..2 {
            for j in 0..2 {
                for l in 0..2 {
                    m[2 * i + k][2 * j + l] = ctx.mul(g[i][j], ctx.fq(g[k][l]));
                }
            }
        }
    }
    Ok(m)
}

pub fn chi_apply(ctx: &FieldCtx, g: &Mat2, v: &Vec4) -> Result<Vec4> {
    Ok(geom::mat4_apply(ctx, &chi_matrix(ctx, g)?, v))
}

/// The point action matching χ: `t ↦ (g₂₁ + g₂₂t)/(g₁₁ + g₁₂t)`.
pub fn mobius(ctx: &FieldCtx, g: &Mat2, t: ProjParam) -> ProjParam {
    let (num, den) = match t {
        ProjParam::Finite(t) => (g[1][0] + ctx.mul(g[1][1], t), g[0][0] + ctx.mul(g[0][1], t)),
        ProjParam::Infinity => (g[1][1], g[0][1]),
    };
    match ctx.div(num, den) {
        Ok(x) => ProjParam::Finite(x),
        Err(_) => ProjParam::Infinity,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivarianceReport {
    pub samples: usize,
    pub diagram_failures: usize,
    pub isometry_failures: usize,
    pub pass: bool,
}

/// Samples `(g, t)` and checks `θ(g·t) = χ(g)θ(t)`, and that χ(g/√det g)
/// maps Ŵ to itself preserving Q̂.
pub fn verify_equivariance<R: Rng + ?Sized>(ctx: &FieldCtx, rng: &mut R, samples: usize) -> EquivarianceReport {
    let (mut diagram_failures, mut isometry_failures) = (0, 0);
    for k in 0..samples {
        let g = loop {
            let g = [[ctx.random_q2(rng), ctx.random_q2(rng)], [ctx.random_q2(rng), ctx.random_q2(rng)]];
            if !det2(ctx, &g).is_zero() {
                break g;
            }
        };
        let t = if k % 10 == 9 { ProjParam::Infinity } else { ProjParam::Finite(ctx.random(rng)) };
        let lhs = theta(ctx, mobius(ctx, &g, t));
        let rhs = chi_apply(ctx, &g, theta(ctx, t).vector()).expect("valid g").normalized(ctx);
        if rhs != Some(lhs) {
            diagram_failures += 1;
        }
        let s = ctx.inv(ctx.sqrt(det2(ctx, &g))).expect("nonzero");
        let g1 = g.map(|r| r.map(|x| ctx.mul(x, s)));
        let v = WHatVec { alpha: ctx.random_q(rng), x: ctx.random_q2(rng), beta: ctx.random_q(rng) };
        let image = chi_apply(ctx, &g1, &v.to_vec4(ctx)).expect("valid g");
        match WHatVec::from_vec4(ctx, &image) {
            Ok(u) if qhat(ctx, &u) == qhat(ctx, &v) => {}
            _ => isometry_failures += 1,
        }
    }
    EquivarianceReport {
        samples,
        diagram_failures,
        isometry_failures,
        pass: diagram_failures == 0 && isometry_failures == 0,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitReport {
    pub generators: usize,
    pub closure_size: usize,
    pub equals_hemisystem: bool,
    pub touches_tau_image: bool,
    pub meets_what: bool,
    pub pass: bool,
}

/// Generators of SL(2,q²): `[[1,0],[a,1]]` for a GF(2)-basis {a} of GF(q²), and `[[0,1],[1,0]]`.
pub fn sl2_generators(ctx: &FieldCtx) -> Vec<Mat2> {
    let mut basis: Vec<u32> = Vec::new();
    let mut reduced: Vec<u32> = Vec::new();
    for &a in ctx.gf_q2() {
        let mut x = a.bits();
        for &r in &reduced {
            x = x.min(x ^ r);
        }
        if x != 0 {
            reduced.push(x);
            reduced.sort_unstable_by(|a, b| b.cmp(a));
            basis.push(a.bits());
        }
    }
    let mut gens: Vec<Mat2> = basis
        .iter()
        .map(|&a| [[Fe::ONE, Fe::ZERO], [ctx.fe(a).expect("field element"), Fe::ONE]])
        .collect();
    gens.push([[Fe::ZERO, Fe::ONE], [Fe::ONE, Fe::ZERO]]);
    gens
}

/// Closes {m_{ω-pair}} under χ of the SL(2,q²) generators and compares with
/// the hemisystem.
pub fn verify_orbit(ctx: &FieldCtx, hemi: &Hemisystem) -> Result<OrbitReport> {
    let gens: Vec<Mat4> = sl2_generators(ctx)
        .iter()
        .map(|g| chi_matrix(ctx, g))
        .collect::<Result<_>>()?;
    let start = m_line(ctx, ctx.omega())?;
    let tau_set: HashSet<Line4> = hemi.tau_lines(ctx).into_iter().collect();
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    let (mut touches_tau_image, mut meets_what) = (false, false);
    while let Some(l) = queue.pop_front() {
        for g in &gens {
            let img = l.apply(ctx, g)?;
            if seen.insert(img) {
                touches_tau_image |= tau_set.contains(&img);
                meets_what |= geom::line_meets_what(ctx, &img);
                queue.push_back(img);
            }
        }
    }
    let hemi_set: HashSet<Line4> = hemi.line_set().into_iter().collect();
    let equals_hemisystem = seen == hemi_set;
    Ok(OrbitReport {
        generators: gens.len(),
        closure_size: seen.len(),
        equals_hemisystem,
        touches_tau_image,
        meets_what,
        pass: equals_hemisystem && !touches_tau_image && !meets_what,
    })
}
