//! Hemisystem geometry at q = 2 and q = 4 against brute-force oracles: line
//! points from X_λ over all λ, Ŵ membership by scalar search, Plücker
//! coordinates from the two spanning vectors.

use std::collections::{BTreeMap, BTreeSet};

use hemischeme::geom::{self, Line4, Vec4};
use hemischeme::hxscheme::PairSet;
use hemischeme::pwscheme::{self, Hemisystem};
use hemischeme::{Fe, FieldCtx};

type P4 = [u32; 4];

/// Scales so the first nonzero coordinate is 1.
fn normalize(ctx: &FieldCtx, v: [Fe; 4]) -> Option<P4> {
    let lead = v.iter().find(|c| !c.is_zero())?;
    let inv = ctx.inv(*lead).unwrap();
    Some(v.map(|c| ctx.mul(c, inv).bits()))
}

fn isotropic(ctx: &FieldCtx, v: [Fe; 4]) -> bool {
    let f = |a: Fe, b: Fe| ctx.mul(a, ctx.fq(b));
    (f(v[0], v[3]) + f(v[1], v[1]) + f(v[2], v[2]) + f(v[3], v[0])).is_zero()
}

/// Some GF(q²)-multiple has the shape (α, x^q, x, β) with α, β ∈ GF(q).
fn in_what(ctx: &FieldCtx, v: [Fe; 4]) -> bool {
    ctx.gf_q2().iter().filter(|c| !c.is_zero()).any(|&c| {
        let w = v.map(|x| ctx.mul(c, x));
        ctx.in_gf_q(w[0]) && ctx.in_gf_q(w[3]) && ctx.fq(w[2]) == w[1]
    })
}

fn fe(ctx: &FieldCtx, p: P4) -> [Fe; 4] {
    p.map(|b| ctx.fe(b).unwrap())
}

/// Points of m_𝐭 as the normalized X_λ, λ ∈ GF(q⁴)*.
fn line_points_oracle(ctx: &FieldCtx, t: Fe) -> BTreeSet<P4> {
    ctx.elements()
        .filter(|l| !l.is_zero())
        .filter_map(|l| normalize(ctx, pwscheme::x_lambda(ctx, t, l).0))
        .collect()
}

fn all_points(ctx: &FieldCtx) -> Vec<P4> {
    let f = ctx.gf_q2();
    let mut out = Vec::new();
    for a in f {
        for b in f {
            for c in f {
                for d in f {
                    let v = [*a, *b, *c, *d];
                    if let Some(p) = normalize(ctx, v) {
                        if p == v.map(Fe::bits) {
                            out.push(p);
                        }
                    }
                }
            }
        }
    }
    out
}

#[test]
fn hemisystem_by_brute_force() {
    for h in 1..=2 {
        let ctx = FieldCtx::new(h).unwrap();
        let q = ctx.q() as usize;
        let pairs = PairSet::new(&ctx);
        let mut count: BTreeMap<P4, usize> = BTreeMap::new();
        for &t in pairs.reps() {
            let pts = line_points_oracle(&ctx, t);
            assert_eq!(pts.len(), q * q + 1);
            for p in pts {
                *count.entry(p).or_default() += 1;
            }
        }
        let (mut external, mut what) = (0, 0);
        for p in all_points(&ctx) {
            let v = fe(&ctx, p);
            let c = count.get(&p).copied().unwrap_or(0);
            if !isotropic(&ctx, v) {
                assert_eq!(c, 0);
            } else if in_what(&ctx, v) {
                what += 1;
                assert_eq!(c, 0, "line meets W-hat at {p:?}");
            } else {
                external += 1;
                assert_eq!(c, q / 2, "point {p:?}");
            }
        }
        assert_eq!(what, (q + 1) * (q * q + 1));
        assert_eq!(external + what, (q * q + 1) * (q * q * q + 1));
        // The library report agrees.
        let hemi = Hemisystem::new(&ctx, &pairs).unwrap();
        let r = pwscheme::verify_hemisystem(&ctx, &hemi.line_set());
        assert!(r.pass);
        assert_eq!(r.external_points, external);
    }
}

#[test]
fn library_lines_match_oracle_points() {
    let ctx = FieldCtx::new(2).unwrap();
    for &t in PairSet::new(&ctx).reps() {
        let lib: BTreeSet<P4> = pwscheme::m_line(&ctx, t)
            .unwrap()
            .points(&ctx)
            .iter()
            .map(|p| p.coords().map(Fe::bits))
            .collect();
        assert_eq!(lib, line_points_oracle(&ctx, t));
    }
}

/// Plücker vector (p01, p02, p03, p12, p31, p23) of ⟨x, y⟩.
fn plucker(ctx: &FieldCtx, x: [Fe; 4], y: [Fe; 4]) -> [Fe; 6] {
    let p = |i: usize, j: usize| ctx.mul(x[i], y[j]) + ctx.mul(x[j], y[i]);
    [p(0, 1), p(0, 2), p(0, 3), p(1, 2), p(3, 1), p(2, 3)]
}

fn proportional(ctx: &FieldCtx, a: [Fe; 6], b: [Fe; 6]) -> bool {
    (0..6).all(|i| (0..6).all(|j| ctx.mul(a[i], b[j]) == ctx.mul(a[j], b[i])))
        && a.iter().any(|c| !c.is_zero())
        && b.iter().any(|c| !c.is_zero())
}

#[test]
fn klein_images_are_w_and_w_prime() {
    for h in 1..=3 {
        let ctx = FieldCtx::new(h).unwrap();
        for &t in PairSet::new(&ctx).reps() {
            let x1 = pwscheme::x_lambda(&ctx, t, Fe::ONE).0;
            let xw = pwscheme::x_lambda(&ctx, t, ctx.omega()).0;
            let w = pwscheme::w_vec(&ctx, t).to_vec6(&ctx).0;
            assert!(proportional(&ctx, plucker(&ctx, x1, xw), w));
            let tau = |v: [Fe; 4]| [ctx.fq(v[0]), ctx.fq(v[2]), ctx.fq(v[1]), ctx.fq(v[3])];
            let wp = pwscheme::w_prime_vec(&ctx, t).to_vec6(&ctx).0;
            assert!(proportional(&ctx, plucker(&ctx, tau(x1), tau(xw)), wp));
        }
    }
}

#[test]
fn spread_by_brute_force_h2() {
    let ctx = FieldCtx::new(2).unwrap();
    let what: Vec<[Fe; 4]> = all_points(&ctx)
        .into_iter()
        .map(|p| fe(&ctx, p))
        .filter(|&v| isotropic(&ctx, v) && in_what(&ctx, v))
        .collect();
    assert_eq!(what.len(), 85);
    let herm = |u: [Fe; 4], v: [Fe; 4]| {
        let f = |a: Fe, b: Fe| ctx.mul(a, ctx.fq(b));
        f(u[0], v[3]) + f(u[1], v[1]) + f(u[2], v[2]) + f(u[3], v[0])
    };
    let pairs = PairSet::new(&ctx);
    for &t in pairs.reps().iter().step_by(7) {
        let l = pwscheme::m_line(&ctx, t).unwrap();
        let spread = pwscheme::subtended_spread(&ctx, &l).unwrap();
        for p in line_points_oracle(&ctx, t) {
            let pv = fe(&ctx, p);
            // Ŵ-points orthogonal to p lie on a common isotropic line through p.
            let perp: Vec<[Fe; 4]> = what.iter().copied().filter(|&w| herm(pv, w).is_zero()).collect();
            assert_eq!(perp.len(), ctx.q() as usize + 1);
            let line = Line4::span(&ctx, &Vec4(pv), &Vec4(perp[0])).unwrap();
            for w in &perp {
                assert!(line.contains(&ctx, &Vec4(*w).normalized(&ctx).unwrap()));
            }
            assert!(spread.contains(&line));
        }
    }
}

#[test]
fn gamma_perp_is_w0() {
    for h in 1..=3 {
        let ctx = FieldCtx::new(h).unwrap();
        let perp = geom::perp(&ctx, &geom::gamma_basis(&ctx));
        assert_eq!(perp.len(), 1);
        assert_eq!(geom::span_dim(&ctx, &[perp[0], geom::w0()]), 1);
    }
}
