//! The end-to-end check that 𝐭 ↦ m_𝐭 carries each conic-side class R′ᵢ onto
//! the hemisystem-side class R̃ᵢ, assembled into a hashable certificate.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::fields::{Fe, FieldCtx};
use crate::hxscheme::{self, FineClasses, PairSet, TraceSets};
use crate::pwscheme::{self, EquivarianceReport, Hemisystem, HemisystemReport, OrbitReport, SpreadCache};
use crate::schemecore::eigen::{self, SpectralSummary};
use crate::schemecore::graph::{self, SrgParams};
use crate::schemecore::{self, RelationTable};
use crate::{Error, Result};

pub use crate::schemecore::diff_tables;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Random pairs drawn in sampled mode, on top of the anchor pairs.
pub const RANDOM_PAIRS: usize = 10_000;
pub const ANCHORS: usize = 10;
/// Geometric spot-checks at h = 4, where one spread costs ~10⁶ field operations.
pub const GEOMETRIC_PAIRS_H4: usize = 100;
pub const EQUIVARIANCE_SAMPLES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Depth {
    Full,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Coverage {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CertifyOptions {
    pub h: u32,
    pub depth: Depth,
    pub seed: Option<u64>,
}

impl CertifyOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidOptions(m.into()));
        match (self.h, self.depth, self.seed) {
            (0 | 5.., _, _) => bad("h must lie in 1..=4"),
            (4, Depth::Full, _) => bad("h = 4 requires sampled depth"),
            (_, Depth::Sampled, None) => bad("sampled depth requires a seed"),
            _ => Ok(()),
        }
    }

    /// hx and klein routes run over every pair.
    pub fn algebraic_coverage(&self) -> Coverage {
        if self.h <= 3 {
            Coverage::Exhaustive
        } else {
            Coverage::Sampled
        }
    }

    pub fn geometric_coverage(&self) -> Coverage {
        match self.depth {
            Depth::Full => Coverage::Exhaustive,
            Depth::Sampled => Coverage::Sampled,
        }
    }
}

/// Every unordered pair `i < j`, row-major.
pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Ten evenly spaced indices.
pub fn anchors(n: usize) -> Vec<usize> {
    let set: BTreeSet<usize> = (0..ANCHORS).map(|k| k * n / ANCHORS).collect();
    set.into_iter().collect()
}

/// `count` distinct random unordered pairs (capped at C(n,2)), sorted.
pub fn random_pairs(n: usize, count: usize, rng: &mut impl Rng) -> BTreeSet<(usize, usize)> {
    let target = count.min(n * n.saturating_sub(1) / 2);
    let mut set = BTreeSet::new();
    while set.len() < target {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i != j {
            set.insert((i.min(j), i.max(j)));
        }
    }
    set
}

/// The sampled pair list: `RANDOM_PAIRS` random pairs plus every pair through an anchor.
pub fn sample_pairs(n: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = random_pairs(n, RANDOM_PAIRS, &mut rng);
    for a in anchors(n) {
        for j in (0..n).filter(|&j| j != a) {
            set.insert((a.min(j), a.max(j)));
        }
    }
    set.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Header {
    pub h: u32,
    pub q: u64,
    pub n: usize,
    pub modulus_hex: String,
    pub omega: u32,
    pub artifact_version: String,
    pub depth: Depth,
    pub seed: Option<u64>,
    pub hemisystem_of_record: String,
    pub class_map: String,
}

/// Everything needed to reproduce a failing pair by hand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub i: usize,
    pub j: usize,
    pub s: u32,
    pub t: u32,
    pub reason: String,
    pub hx_class: Option<u8>,
    pub klein_class: Option<u8>,
    pub geometric_class: Option<u8>,
    pub rho: Option<u32>,
    pub nu: Option<u32>,
    pub rho_hat: Option<u32>,
    pub b_st: Option<u32>,
    pub b_st_prime: Option<u32>,
}

impl Witness {
    fn new(ctx: &FieldCtx, ts: &TraceSets, pairs: &PairSet, (i, j): (usize, usize), reason: String, geometric_class: Option<u8>) -> Self {
        let (s, t) = (pairs.rep(i), pairs.rep(j));
        let klein = pwscheme::classify_pw_klein(ctx, s, t).ok();
        Witness {
            i,
            j,
            s: s.bits(),
            t: t.bits(),
            reason,
            hx_class: hxscheme::classify_hx(ctx, ts, s, t).ok(),
            klein_class: klein.map(|k| k.class),
            geometric_class,
            rho: hxscheme::rho(ctx, s, t).ok().map(Fe::bits),
            nu: hxscheme::nu(ctx, s, t).ok().map(Fe::bits),
            rho_hat: hxscheme::rho_hat(ctx, s, t).ok().map(Fe::bits),
            b_st: klein.map(|k| k.b_st),
            b_st_prime: klein.map(|k| k.b_st_prime),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RouteComparison {
    pub routes: [String; 2],
    pub compared: u64,
    pub disagreements: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RouteBlock {
    pub algebraic: Coverage,
    pub geometric: Coverage,
    pub agreement: Vec<RouteComparison>,
    /// Class counts (1..=3) over the pairs each route saw.
    pub hx_counts: [u64; 3],
    pub klein_counts: [u64; 3],
    pub geometric_counts: [u64; 3],
    pub pass: bool,
}

/// Exact identity checks evaluated alongside the klein route.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IdentitySweep {
    pub pairs: u64,
    /// ρ̂ from 1/(ρ+ρ⁻¹), from the quotient form and from ν² + ν disagree.
    pub rho_hat_form_failures: u64,
    /// `Q̃(v_st) = b̃(w_s,w_t)·b̃(w_s,w′_t)` fails.
    pub factorization_failures: u64,
    pub gram_failures: u64,
    pub radical_failures: u64,
    /// Class 1 ⇔ ν ∈ GF(q), class 2 ⇔ ν^q + ν = 1.
    pub nu_dictionary_failures: u64,
    pub rho_one: u64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountsBlock {
    pub hx_pairs: Vec<u64>,
    pub pw_pairs: Vec<u64>,
    pub valencies: Vec<u64>,
    pub expected_valencies: Vec<i64>,
    /// `n·kᵢ = 2·|class-i pairs|` for every class.
    pub double_count_holds: bool,
    pub empty_classes: Vec<usize>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SchemeBlock {
    pub hx_verified: bool,
    pub pw_verified: bool,
    pub hx_error: Option<String>,
    pub pw_error: Option<String>,
    /// Positions where the tables differ under i ↦ i; empty means isomorphic.
    pub table_differences: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EigenBlock {
    pub expected_p: Vec<Vec<i64>>,
    pub hx: SpectralSummary,
    pub pw: SpectralSummary,
    pub hx_matches: bool,
    pub pw_matches: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KreinBlock {
    pub nonnegative: bool,
    pub q_polynomial: bool,
    pub p_polynomial: bool,
    pub primitive: bool,
    pub components: Vec<usize>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SrgBlock {
    /// Classes whose ρ̂ values lie in GF(q)∖{0}.
    pub merged_classes: Vec<usize>,
    pub expected: SrgParams,
    pub found: Option<SrgParams>,
    pub error: Option<String>,
    pub remark: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FineBlock {
    pub classes: usize,
    pub expected_classes: u64,
    pub classes_used: usize,
    /// Axioms are checked through h = 2.
    pub verified: Option<bool>,
    pub fuses_to_hx: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HemisystemBlock {
    pub report: HemisystemReport,
    pub tau_image_pass: bool,
    pub line_checks: u64,
    pub line_failures: Vec<String>,
    pub tau_disjoint: bool,
    pub w0_on_every_l: bool,
    pub spread_images_checked: u64,
    pub spread_image_failures: u64,
    /// Geometric relations on {m_𝐭^τ} equal those on {m_𝐭} index-by-index.
    pub tau_scheme: Option<bool>,
    pub orbit: Option<OrbitReport>,
    pub equivariance: EquivarianceReport,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub failed_blocks: Vec<String>,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsoCertificate {
    pub header: Header,
    pub degenerate: bool,
    pub routes: RouteBlock,
    pub identities: IdentitySweep,
    pub counts: Option<CountsBlock>,
    pub schemes: Option<SchemeBlock>,
    pub eigenmatrix: Option<EigenBlock>,
    pub krein: Option<KreinBlock>,
    pub srg: Option<SrgBlock>,
    pub fine: Option<FineBlock>,
    pub hemisystem: Option<HemisystemBlock>,
    /// Blocks not run, with the reason.
    pub skipped: BTreeMap<String, String>,
    pub verdict: Verdict,
    /// Wall-clock milliseconds per stage; excluded from the hash.
    pub timing_ms: BTreeMap<String, u64>,
    pub hash: String,
}

impl IsoCertificate {
    /// The certificate as JSON with sorted keys.
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("certificate serializes")
    }

    /// SHA-256 of the sorted-key compact JSON without `timing_ms` and `hash`.
    pub fn canonical_hash(&self) -> String {
        let mut v = self.to_json();
        if let Value::Object(m) = &mut v {
            m.remove("timing_ms");
            m.remove("hash");
        }
        let digest = Sha256::digest(v.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

struct AlgebraicResult {
    hx: u8,
    klein: u8,
    rho_hat_forms: bool,
    factorization: bool,
    gram: bool,
    radical: bool,
    nu_dictionary: bool,
    rho_one: bool,
    error: Option<String>,
}

fn algebraic(ctx: &FieldCtx, ts: &TraceSets, s: Fe, t: Fe) -> AlgebraicResult {
    let mut r = AlgebraicResult {
        hx: 0,
        klein: 0,
        rho_hat_forms: false,
        factorization: false,
        gram: false,
        radical: false,
        nu_dictionary: false,
        rho_one: false,
        error: None,
    };
    let hx = hxscheme::classify_hx(ctx, ts, s, t);
    let klein = pwscheme::classify_pw_klein(ctx, s, t);
    let forms = (|| {
        let a = hxscheme::rho_hat(ctx, s, t)?;
        Ok::<_, Error>(a == hxscheme::rho_hat_quotient(ctx, s, t)? && a == hxscheme::rho_hat_from_nu(ctx, s, t)?)
    })();
    match (hx, klein, forms) {
        (Ok(h), Ok(k), Ok(f)) => {
            r.hx = h;
            r.klein = k.class;
            r.rho_hat_forms = f;
            r.factorization = k.factorization_holds;
            r.gram = k.gram_holds;
            r.radical = k.radical_holds;
            let nu = hxscheme::nu(ctx, s, t).expect("ρ ≠ 1 once ρ̂ is defined");
            r.nu_dictionary = (k.class == 1) == ctx.in_gf_q(nu) && (k.class == 2) == (ctx.fq(nu) + nu == Fe::ONE);
        }
        (a, b, c) => {
            let errs: Vec<Error> = [a.err(), b.err(), c.err()].into_iter().flatten().collect();
            r.rho_one = errs.iter().any(|e| matches!(e, Error::RhoIsOne { .. }));
            r.error = Some(errs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "));
        }
    }
    r
}

fn failure_reason(r: &AlgebraicResult) -> Option<String> {
    if let Some(e) = &r.error {
        return Some(e.clone());
    }
    let checks = [
        (r.hx == r.klein, "hx and klein classes differ"),
        (r.rho_hat_forms, "rho_hat forms disagree"),
        (r.factorization, "Q~(v_st) factorization fails"),
        (r.gram, "Gram entries with w0 differ from the traces"),
        (r.radical, "v_st is not in the radical"),
        (r.nu_dictionary, "nu dictionary fails"),
    ];
    checks.iter().find(|(ok, _)| !ok).map(|(_, m)| m.to_string())
}

fn table_from(n: usize, pairs: &[(usize, usize)], classes: impl Fn(usize) -> u8) -> Result<RelationTable> {
    let mut data = vec![0u8; n * n];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        data[i * n + j] = classes(k);
        data[j * n + i] = classes(k);
    }
    RelationTable::from_vec(n, 3, data)
}

fn ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

struct Context<'a> {
    ctx: &'a FieldCtx,
    ts: &'a TraceSets,
    pairs: &'a PairSet,
}

pub fn certify(opts: CertifyOptions) -> Result<IsoCertificate> {
    opts.validate()?;
    let ctx = FieldCtx::new(opts.h)?;
    let pairs = PairSet::new(&ctx);
    let ts = TraceSets::new(&ctx)?;
    let n = pairs.len();
    let mut timing = BTreeMap::new();
    let mut skipped = BTreeMap::new();
    let mut failed = Vec::new();
    let c = Context { ctx: &ctx, ts: &ts, pairs: &pairs };

    let header = Header {
        h: opts.h,
        q: ctx.q(),
        n,
        modulus_hex: ctx.modulus_hex(),
        omega: ctx.omega().bits(),
        artifact_version: ARTIFACT_VERSION.into(),
        depth: opts.depth,
        seed: opts.seed,
        hemisystem_of_record: "m_t".into(),
        class_map: "pair t -> line m_t; class i -> class i".into(),
    };

    // hx and klein routes with the identity sweep.
    let clock = Instant::now();
    let alg_pairs = match opts.algebraic_coverage() {
        Coverage::Exhaustive => all_pairs(n),
        Coverage::Sampled => sample_pairs(n, opts.seed.expect("validated")),
    };
    let results: Vec<AlgebraicResult> = alg_pairs
        .par_iter()
        .map(|&(i, j)| algebraic(&ctx, &ts, pairs.rep(i), pairs.rep(j)))
        .collect();
    let mut sweep = IdentitySweep { pairs: results.len() as u64, ..Default::default() };
    let (mut hx_counts, mut klein_counts) = ([0u64; 3], [0u64; 3]);
    let mut hx_klein_disagreements = 0;
    let mut witness = None;
    for (k, r) in results.iter().enumerate() {
        sweep.rho_hat_form_failures += u64::from(!r.rho_hat_forms);
        sweep.factorization_failures += u64::from(!r.factorization);
        sweep.gram_failures += u64::from(!r.gram);
        sweep.radical_failures += u64::from(!r.radical);
        sweep.nu_dictionary_failures += u64::from(!r.nu_dictionary);
        sweep.rho_one += u64::from(r.rho_one);
        if (1..=3).contains(&r.hx) {
            hx_counts[r.hx as usize - 1] += 1;
        }
        if (1..=3).contains(&r.klein) {
            klein_counts[r.klein as usize - 1] += 1;
        }
        hx_klein_disagreements += u64::from(r.hx != r.klein || r.error.is_some());
        if witness.is_none() {
            if let Some(reason) = failure_reason(r) {
                witness = Some(Witness::new(&ctx, &ts, &pairs, alg_pairs[k], reason, None));
            }
        }
    }
    sweep.pass = sweep.rho_hat_form_failures == 0
        && sweep.factorization_failures == 0
        && sweep.gram_failures == 0
        && sweep.radical_failures == 0
        && sweep.nu_dictionary_failures == 0
        && sweep.rho_one == 0;
    timing.insert("algebraic_routes".into(), ms(clock));

    // Geometric route.
    let clock = Instant::now();
    let hemi = Hemisystem::new(&ctx, &pairs)?;
    let lines = hemi.line_set();
    let cache = SpreadCache::new(&ctx, &lines);
    let geo_pairs = match (opts.geometric_coverage(), opts.h) {
        (Coverage::Exhaustive, _) => all_pairs(n),
        (Coverage::Sampled, 4) => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.expect("validated") ^ 0x6765_6f6d);
            random_pairs(n, GEOMETRIC_PAIRS_H4, &mut rng).into_iter().collect()
        }
        (Coverage::Sampled, _) => sample_pairs(n, opts.seed.expect("validated")),
    };
    if opts.geometric_coverage() == Coverage::Exhaustive {
        // Errors resurface per pair below.
        let _ = cache.fill();
    }
    let geo: Vec<Result<u8>> = geo_pairs
        .par_iter()
        .map(|&(i, j)| {
            Ok(pwscheme::classify_pw_geometric(&ctx, &lines[i], &lines[j], cache.get(i)?, cache.get(j)?)?.class)
        })
        .collect();
    let mut geometric_counts = [0u64; 3];
    let (mut hx_geo, mut klein_geo) = (0u64, 0u64);
    // Reference classes for geometric pairs: reuse the algebraic results when aligned.
    let aligned = alg_pairs == geo_pairs;
    for (k, g) in geo.iter().enumerate() {
        let (i, j) = geo_pairs[k];
        let (hx, kl) = if aligned {
            (results[k].hx, results[k].klein)
        } else {
            let r = algebraic(&ctx, &ts, pairs.rep(i), pairs.rep(j));
            (r.hx, r.klein)
        };
        match g {
            Ok(g) => {
                geometric_counts[*g as usize - 1] += 1;
                hx_geo += u64::from(*g != hx);
                klein_geo += u64::from(*g != kl);
                if *g != hx && witness.is_none() {
                    witness = Some(Witness::new(&ctx, &ts, &pairs, (i, j), "geometric class differs".into(), Some(*g)));
                }
            }
            Err(e) => {
                hx_geo += 1;
                klein_geo += 1;
                if witness.is_none() {
                    witness = Some(Witness::new(&ctx, &ts, &pairs, (i, j), e.to_string(), None));
                }
            }
        }
    }
    timing.insert("geometric_route".into(), ms(clock));
    let cmp = |a: &str, b: &str, compared: usize, disagreements: u64| RouteComparison {
        routes: [a.into(), b.into()],
        compared: compared as u64,
        disagreements,
    };
    let agreement = vec![
        cmp("hx", "pw-klein", alg_pairs.len(), hx_klein_disagreements),
        cmp("hx", "pw-geometric", geo_pairs.len(), hx_geo),
        cmp("pw-klein", "pw-geometric", geo_pairs.len(), klein_geo),
    ];
    let routes = RouteBlock {
        algebraic: opts.algebraic_coverage(),
        geometric: opts.geometric_coverage(),
        pass: agreement.iter().all(|a| a.disagreements == 0),
        agreement,
        hx_counts,
        klein_counts,
        geometric_counts,
    };
    if !routes.pass {
        failed.push("routes".to_string());
    }
    if !sweep.pass {
        failed.push("identities".to_string());
    }
    let degenerate = hx_counts.contains(&0);

    let mut cert = IsoCertificate {
        header,
        degenerate,
        routes,
        identities: sweep,
        counts: None,
        schemes: None,
        eigenmatrix: None,
        krein: None,
        srg: None,
        fine: None,
        hemisystem: None,
        skipped: BTreeMap::new(),
        verdict: Verdict { pass: false, failed_blocks: Vec::new(), witness: None },
        timing_ms: BTreeMap::new(),
        hash: String::new(),
    };

    if witness.is_some() {
        skipped.insert("remaining blocks".into(), "halted at the first failing pair".into());
    } else {
        let clock = Instant::now();
        cert.hemisystem = Some(hemisystem_block(&c, &opts, &hemi, &cache, &geo_pairs, &geo)?);
        timing.insert("hemisystem".into(), ms(clock));

        if opts.algebraic_coverage() == Coverage::Exhaustive {
            let clock = Instant::now();
            let hx = table_from(n, &alg_pairs, |k| results[k].hx)?;
            let pw = if opts.geometric_coverage() == Coverage::Exhaustive {
                table_from(n, &geo_pairs, |k| *geo[k].as_ref().expect("no witness"))?
            } else {
                table_from(n, &alg_pairs, |k| results[k].klein)?
            };
            analytics(&c, &hx, &pw, &mut cert, &mut skipped)?;
            timing.insert("analytics".into(), ms(clock));
        } else {
            skipped.insert("analytics".into(), "tables are not built at h = 4".into());
        }
    }

    for (name, pass) in [
        ("counts", cert.counts.as_ref().map(|b| b.pass)),
        ("schemes", cert.schemes.as_ref().map(|b| b.pass)),
        ("eigenmatrix", cert.eigenmatrix.as_ref().map(|b| b.pass)),
        ("krein", cert.krein.as_ref().map(|b| b.pass)),
        ("srg", cert.srg.as_ref().map(|b| b.pass)),
        ("fine", cert.fine.as_ref().map(|b| b.pass)),
        ("hemisystem", cert.hemisystem.as_ref().map(|b| b.pass)),
    ] {
        if pass == Some(false) {
            failed.push(name.to_string());
        }
    }
    cert.verdict = Verdict { pass: failed.is_empty() && witness.is_none(), failed_blocks: failed, witness };
    cert.skipped = skipped;
    cert.timing_ms = timing;
    cert.hash = cert.canonical_hash();
    Ok(cert)
}

fn hemisystem_block(
    c: &Context,
    opts: &CertifyOptions,
    hemi: &Hemisystem,
    cache: &SpreadCache,
    geo_pairs: &[(usize, usize)],
    geo: &[Result<u8>],
) -> Result<HemisystemBlock> {
    let ctx = c.ctx;
    let lines = hemi.line_set();
    let taus = hemi.tau_lines(ctx);
    let report = verify_hemisystem_capped(ctx, &lines);
    let tau_image_pass = pwscheme::verify_hemisystem(ctx, &taus).pass;
    let line_failures: Vec<String> = hemi
        .lines()
        .par_iter()
        .filter_map(|hl| pwscheme::check_hemiline(ctx, hl).err().map(|e| e.to_string()))
        .collect();
    let line_set: BTreeSet<_> = lines.iter().collect();
    let tau_disjoint = taus.iter().all(|l| !line_set.contains(l));
    let w0_on_every_l = hemi.lines().par_iter().all(|hl| pwscheme::w0_on_l(ctx, hl.rep));

    let spread_lines: Vec<usize> = if opts.h <= 3 { (0..hemi.len()).collect() } else { anchors(hemi.len()) };
    let spread_image_failures = spread_lines
        .par_iter()
        .filter(|&&i| {
            !cache
                .get(i)
                .and_then(|s| pwscheme::spread_image_matches(ctx, hemi.get(i).rep, s))
                .unwrap_or(false)
        })
        .count() as u64;

    let tau_scheme = (opts.geometric_coverage() == Coverage::Exhaustive).then(|| {
        let tcache = SpreadCache::new(ctx, &taus);
        let _ = tcache.fill();
        geo_pairs.par_iter().zip(geo).all(|(&(i, j), g)| {
            let t = pwscheme::classify_pw_geometric(ctx, &taus[i], &taus[j], tcache.get(i).unwrap_or(&[]), tcache.get(j).unwrap_or(&[]));
            matches!((t, g), (Ok(t), Ok(g)) if t.class == *g)
        })
    });
    let orbit = if opts.h <= 2 { Some(pwscheme::verify_orbit(ctx, hemi)?) } else { None };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.unwrap_or(0));
    let equivariance = pwscheme::verify_equivariance(ctx, &mut rng, EQUIVARIANCE_SAMPLES);
    let pass = report.pass
        && tau_image_pass
        && line_failures.is_empty()
        && tau_disjoint
        && w0_on_every_l
        && spread_image_failures == 0
        && tau_scheme != Some(false)
        && orbit.as_ref().is_none_or(|o| o.pass)
        && equivariance.pass;
    Ok(HemisystemBlock {
        report,
        tau_image_pass,
        line_checks: hemi.len() as u64,
        line_failures,
        tau_disjoint,
        w0_on_every_l,
        spread_images_checked: spread_lines.len() as u64,
        spread_image_failures,
        tau_scheme,
        orbit,
        equivariance,
        pass,
    })
}

/// Keeps at most 20 deviating points in the report.
fn verify_hemisystem_capped(ctx: &FieldCtx, lines: &[crate::geom::Line4]) -> HemisystemReport {
    let mut r = pwscheme::verify_hemisystem(ctx, lines);
    r.deviations.truncate(20);
    r
}

fn analytics(
    c: &Context,
    hx: &RelationTable,
    pw: &RelationTable,
    cert: &mut IsoCertificate,
    skipped: &mut BTreeMap<String, String>,
) -> Result<()> {
    let ctx = c.ctx;
    let q = ctx.q() as i64;
    let n = hx.n() as u64;
    let formula = hxscheme::eigenmatrix_formula(q);
    let hx_pairs = hx.class_pair_counts()[1..].to_vec();
    let pw_pairs = pw.class_pair_counts()[1..].to_vec();
    let valencies = hx.row_valencies(0)[1..].to_vec();
    let double_count_holds = valencies.iter().zip(&hx_pairs).all(|(k, p)| n * k == 2 * p);
    let expected_valencies = formula[0][1..].to_vec();
    cert.counts = Some(CountsBlock {
        pass: hx_pairs == pw_pairs
            && double_count_holds
            && valencies.iter().zip(&expected_valencies).all(|(&a, &b)| a as i64 == b),
        hx_pairs,
        pw_pairs,
        valencies,
        expected_valencies,
        double_count_holds,
        empty_classes: hx.empty_classes(),
    });
    let table_differences = diff_tables(hx, pw, None)?.len();

    cert.fine = Some(fine_block(c, hx)?);

    if hx.is_degenerate() {
        let reason = "classes 1 and 3 are empty at q = 2".to_string();
        for b in ["schemes", "eigenmatrix", "krein", "srg"] {
            skipped.insert(b.into(), reason.clone());
        }
        cert.schemes = Some(SchemeBlock {
            hx_verified: false,
            pw_verified: false,
            hx_error: None,
            pw_error: None,
            table_differences,
            pass: table_differences == 0,
        });
        return Ok(());
    }

    let hx_ints = schemecore::verify_scheme(hx);
    let pw_ints = schemecore::verify_scheme(pw);
    cert.schemes = Some(SchemeBlock {
        hx_verified: hx_ints.is_ok(),
        pw_verified: pw_ints.is_ok(),
        hx_error: hx_ints.as_ref().err().map(|e| e.to_string()),
        pw_error: pw_ints.as_ref().err().map(|e| e.to_string()),
        table_differences,
        pass: hx_ints.is_ok() && pw_ints.is_ok() && table_differences == 0,
    });
    let (Ok(hx_ints), Ok(pw_ints)) = (hx_ints, pw_ints) else {
        skipped.insert("eigenmatrix".into(), "a table is not a scheme".into());
        return Ok(());
    };

    match (eigen::spectral_summary(&hx_ints), eigen::spectral_summary(&pw_ints)) {
        (Ok(hs), Ok(ps)) => {
            let hx_matches = eigen::equal_up_to_row_permutation(&hs.p, &formula);
            let pw_matches = eigen::equal_up_to_row_permutation(&ps.p, &formula);
            let prim = graph::primitivity(hx)?;
            cert.krein = Some(KreinBlock {
                nonnegative: hs.krein_nonnegative && ps.krein_nonnegative,
                q_polynomial: !hs.q_polynomial_orderings.is_empty(),
                p_polynomial: !hs.p_polynomial_orderings.is_empty(),
                primitive: prim.primitive,
                pass: hs.krein_nonnegative
                    && ps.krein_nonnegative
                    && hs.krein == ps.krein
                    && !hs.q_polynomial_orderings.is_empty()
                    && hs.p_polynomial_orderings.is_empty()
                    && prim.primitive,
                components: prim.components,
            });
            cert.eigenmatrix = Some(EigenBlock {
                expected_p: formula,
                pass: hx_matches && pw_matches,
                hx: hs,
                pw: ps,
                hx_matches,
                pw_matches,
            });
        }
        (a, b) => {
            let e = a.err().or(b.err()).expect("one side failed");
            skipped.insert("eigenmatrix".into(), format!("spectral computation failed: {e}"));
            skipped.insert("krein".into(), "no eigenmatrix".into());
        }
    }

    let merged: Vec<usize> = (1..=3u8)
        .filter(|&k| c.ts.members(k).iter().all(|&x| ctx.in_gf_q(x)))
        .map(usize::from)
        .collect();
    let (v, k, lambda, mu) = hxscheme::srg_formula(ctx.q());
    let expected = SrgParams { v, k, lambda, mu: Some(mu) };
    let found = graph::srg_check(hx, &merged);
    let pw_found = graph::srg_check(pw, &merged);
    cert.srg = Some(SrgBlock {
        pass: matches!((&found, &pw_found), (Ok(a), Ok(b)) if *a == expected && *b == expected),
        merged_classes: merged,
        expected,
        error: found.as_ref().err().map(|e| e.to_string()),
        found: found.ok(),
        remark: "identical relation tables make the fused graphs of both schemes equal as labeled graphs".into(),
    });
    Ok(())
}

fn fine_block(c: &Context, hx: &RelationTable) -> Result<FineBlock> {
    let ctx = c.ctx;
    let fine = FineClasses::new(ctx);
    let table = hxscheme::fine_table(ctx, c.pairs, &fine)?;
    let classes_used = table.class_pair_counts()[1..].iter().filter(|&&x| x > 0).count();
    let grouping = fine.hx_grouping(ctx, c.ts)?;
    let fuses_to_hx = if grouping.iter().all(|g| !g.is_empty()) {
        schemecore::fuse(&table, &grouping)? == *hx
    } else {
        // Empty HX classes: compare class by class instead of fusing.
        (0..hx.n()).all(|i| {
            (0..hx.n()).all(|j| {
                i == j || grouping[hx.get(i, j) as usize - 1].contains(&(table.get(i, j) as usize))
            })
        })
    };
    let verified = (ctx.h() == 2).then(|| schemecore::verify_scheme(&table).is_ok());
    let expected_classes = ctx.q() * ctx.q() / 2 - 1;
    Ok(FineBlock {
        classes: fine.count(),
        expected_classes,
        classes_used,
        pass: fine.count() as u64 == expected_classes
            && classes_used == fine.count()
            && fuses_to_hx
            && verified != Some(false),
        verified,
        fuses_to_hx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn option_validation() {
        let o = |h, depth, seed| CertifyOptions { h, depth, seed };
        assert!(o(0, Depth::Full, None).validate().is_err());
        assert!(o(5, Depth::Sampled, Some(1)).validate().is_err());
        assert!(o(4, Depth::Full, None).validate().is_err());
        assert!(o(3, Depth::Sampled, None).validate().is_err());
        assert!(o(4, Depth::Sampled, Some(7)).validate().is_ok());
        assert!(o(2, Depth::Full, None).validate().is_ok());
    }

    #[test]
    fn sample_contains_anchor_pairs() {
        let n = 2016;
        let s = sample_pairs(n, 42);
        assert!(s.len() >= RANDOM_PAIRS);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        for a in anchors(n) {
            assert!(s.iter().filter(|&&(i, j)| i == a || j == a).count() == n - 1);
        }
        assert_eq!(s, sample_pairs(n, 42));
        assert_ne!(s, sample_pairs(n, 43));
        // Small n saturates.
        assert_eq!(sample_pairs(6, 1).len(), 15);
    }

    #[test]
    fn certify_h1_and_h2() {
        let c1 = certify(CertifyOptions { h: 1, depth: Depth::Full, seed: None }).unwrap();
        assert!(c1.verdict.pass, "{:?}", c1.verdict);
        assert!(c1.degenerate);
        assert_eq!(c1.routes.hx_counts, [0, 15, 0]);
        let c2 = certify(CertifyOptions { h: 2, depth: Depth::Full, seed: None }).unwrap();
        assert!(c2.verdict.pass, "{:?}", c2.verdict);
        assert_eq!(c2.counts.as_ref().unwrap().hx_pairs, vec![1020, 2040, 4080]);
        assert_eq!(c2.hash, c2.canonical_hash());
        assert_eq!(c2.hash.len(), 64);
    }
}
