//! Field arithmetic and conic-side invariants against independent oracles
//! written from the definitions (carry-less products, traces as sums of
//! Frobenius powers, classes from subfield membership).

use hemischeme::hxscheme::{self, PairSet, TraceSets};
use hemischeme::{Fe, FieldCtx};
use proptest::prelude::*;
use std::sync::OnceLock;

/// Contexts for h = 1..=5, built once.
fn ctx(h: u32) -> &'static FieldCtx {
    static CTXS: OnceLock<Vec<FieldCtx>> = OnceLock::new();
    &CTXS.get_or_init(|| (1..=5).map(|h| FieldCtx::new(h).unwrap()).collect())[h as usize - 1]
}

/// Carry-less product reduced by the modulus, bit by bit.
fn clmul_mod(a: u32, b: u32, modulus: u64, degree: u32) -> u32 {
    let mut acc: u64 = 0;
    for i in 0..degree {
        if b >> i & 1 == 1 {
            acc ^= (a as u64) << i;
        }
    }
    for bit in (degree..2 * degree).rev() {
        if acc >> bit & 1 == 1 {
            acc ^= modulus << (bit - degree);
        }
    }
    acc as u32
}

/// `x^{2^k}` by repeated oracle squaring.
fn frob2(x: u32, k: u32, ctx: &FieldCtx) -> u32 {
    (0..k).fold(x, |y, _| clmul_mod(y, y, ctx.modulus(), ctx.degree()))
}

/// Absolute trace of x viewed in GF(2^m): Σ_{i<m} x^{2^i}.
fn trace_oracle(x: u32, m: u32, ctx: &FieldCtx) -> u32 {
    (0..m).fold(0, |acc, i| acc ^ frob2(x, i, ctx))
}

fn in_sub(x: u32, m: u32, ctx: &FieldCtx) -> bool {
    frob2(x, m, ctx) == x
}

/// HX class from the definition: ρ̂ in GF(q) with trace 0 (nonzero) → 1,
/// in GF(q) with trace 1 → 2, outside GF(q) with GF(q²)-trace 0 → 3.
fn hx_class_oracle(ctx: &FieldCtx, rho_hat: Fe) -> Option<u8> {
    let (h, x) = (ctx.h(), rho_hat.bits());
    if x == 0 || !in_sub(x, 2 * h, ctx) {
        return None;
    }
    if in_sub(x, h, ctx) {
        Some(if trace_oracle(x, h, ctx) == 0 { 1 } else { 2 })
    } else if trace_oracle(x, 2 * h, ctx) == 0 {
        Some(3)
    } else {
        None
    }
}

proptest! {
    #[test]
    fn mul_matches_clmul(h in 1u32..=5, a: u32, b: u32) {
        let ctx = ctx(h);
        let mask = (1u32 << ctx.degree()) - 1;
        let (a, b) = (a & mask, b & mask);
        let (fa, fb) = (ctx.fe(a).unwrap(), ctx.fe(b).unwrap());
        prop_assert_eq!(ctx.mul(fa, fb).bits(), clmul_mod(a, b, ctx.modulus(), ctx.degree()));
    }

    #[test]
    fn inverse_and_frobenius(h in 1u32..=5, a: u32, k in 0i64..20) {
        let ctx = ctx(h);
        let a = a & ((1u32 << ctx.degree()) - 1);
        let fa = ctx.fe(a).unwrap();
        if a != 0 {
            prop_assert_eq!(ctx.mul(fa, ctx.inv(fa).unwrap()), Fe::ONE);
        }
        let k = k % ctx.degree() as i64;
        prop_assert_eq!(ctx.frobenius(fa, k).bits(), frob2(a, k as u32, ctx));
    }

    #[test]
    fn traces_match(h in 1u32..=4, a: u32) {
        let ctx = ctx(h);
        let a = a & ((1u32 << ctx.degree()) - 1);
        let fa = ctx.fe(a).unwrap();
        prop_assert_eq!(ctx.abs_trace(fa, ctx.degree()).unwrap(), trace_oracle(a, ctx.degree(), ctx) == 1);
        // Relative trace to GF(q): x + x^q + x^{q²} + x^{q³}.
        let rel = (0..4).fold(0, |acc, j| acc ^ frob2(a, j * h, ctx));
        prop_assert_eq!(ctx.rel_trace_to_q(fa).bits(), rel);
    }
}

#[test]
fn omega_definition() {
    for h in 1..=5 {
        let ctx = FieldCtx::new(h).unwrap();
        let w = ctx.omega();
        assert_eq!(frob2(w.bits(), 2 * h, &ctx), (w + Fe::ONE).bits());
        // Smallest such element.
        let first = (0..ctx.size()).find(|&x| frob2(x, 2 * h, &ctx) == x ^ 1).unwrap();
        assert_eq!(w.bits(), first);
    }
}

#[test]
fn pair_list_shape() {
    for h in 1..=3 {
        let ctx = FieldCtx::new(h).unwrap();
        let pairs = PairSet::new(&ctx);
        let q = ctx.q() as usize;
        assert_eq!(pairs.len(), (q.pow(4) - q.pow(2)) / 2);
        for &t in pairs.reps() {
            let conj = frob2(t.bits(), 2 * h, &ctx);
            assert!(t.bits() < conj);
        }
    }
}

#[test]
fn hx_classes_match_definition_h2() {
    let ctx = FieldCtx::new(2).unwrap();
    let pairs = PairSet::new(&ctx);
    let ts = TraceSets::new(&ctx).unwrap();
    let t = hxscheme::hx_table(&ctx, &pairs, &ts).unwrap();
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            let (s, u) = (pairs.rep(i), pairs.rep(j));
            // ρ̂ = 1/(ρ + 1/ρ) from the raw Frobenius images.
            let s2 = ctx.fqj(s, 2);
            let u2 = ctx.fqj(u, 2);
            let num = ctx.mul(s + u, s2 + u2);
            let den = ctx.mul(s + u2, s2 + u);
            let rho = ctx.div(num, den).unwrap();
            assert_ne!(rho, Fe::ONE, "rho = 1 at ({i}, {j})");
            let rh = ctx.inv(rho + ctx.inv(rho).unwrap()).unwrap();
            assert_eq!(Some(t.get(i, j)), hx_class_oracle(&ctx, rh), "pair ({i}, {j})");
        }
    }
}

#[test]
fn invariants_are_representative_independent() {
    for h in 1..=2 {
        let ctx = FieldCtx::new(h).unwrap();
        let pairs = PairSet::new(&ctx);
        for i in 0..pairs.len() {
            for j in i + 1..pairs.len() {
                let (s, t) = (pairs.rep(i), pairs.rep(j));
                let t2 = ctx.fqj(t, 2);
                let s2 = ctx.fqj(s, 2);
                let r = hxscheme::rho_hat(&ctx, s, t).unwrap();
                assert_eq!(hxscheme::rho_hat(&ctx, s, t2).unwrap(), r);
                assert_eq!(hxscheme::rho_hat(&ctx, s2, t).unwrap(), r);
                assert_eq!(hxscheme::rho_hat(&ctx, t, s).unwrap(), r);
                // Replacing t by its conjugate inverts ρ.
                let rho = hxscheme::rho(&ctx, s, t).unwrap();
                assert_eq!(ctx.mul(rho, hxscheme::rho(&ctx, s, t2).unwrap()), Fe::ONE);
            }
        }
    }
}

#[test]
fn valency_identity() {
    for h in 1..=3u32 {
        let q = 1i64 << h;
        let row = &hxscheme::eigenmatrix_formula(q)[0];
        assert_eq!(row.iter().sum::<i64>(), (q.pow(4) - q.pow(2)) / 2);
    }
}

#[test]
fn fine_labels_are_all_lambda_pairs_h2() {
    let ctx = FieldCtx::new(2).unwrap();
    let pairs = PairSet::new(&ctx);
    let mut seen = std::collections::BTreeSet::new();
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            seen.insert(hxscheme::classify_fine(&ctx, pairs.rep(i), pairs.rep(j)).unwrap());
        }
    }
    // {λ, λ⁻¹} for λ ∈ GF(16)∖{0,1}: 14 elements, none self-inverse in characteristic 2.
    assert_eq!(seen.len(), 7);
    for (a, b) in seen {
        assert!(ctx.in_gf_q2(a) && a != Fe::ONE && !a.is_zero());
        assert_eq!(ctx.mul(a, b), Fe::ONE);
    }
}
