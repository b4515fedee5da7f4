use hemischeme::isocert::{self, CertifyOptions, Coverage, Depth};
use hemischeme::Error;
use serde_json::Value;

fn full(h: u32) -> CertifyOptions {
    CertifyOptions { h, depth: Depth::Full, seed: None }
}

#[test]
fn h2_full_is_deterministic() {
    let a = isocert::certify(full(2)).unwrap();
    let b = isocert::certify(full(2)).unwrap();
    assert!(a.verdict.pass);
    assert_eq!(a.hash, b.hash);
    let strip = |c: &isocert::IsoCertificate| {
        let mut v = c.to_json();
        v.as_object_mut().unwrap().remove("timing_ms");
        v
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn hash_ignores_timing_only() {
    let mut c = isocert::certify(full(1)).unwrap();
    let h0 = c.canonical_hash();
    c.timing_ms.insert("extra".into(), 12345);
    assert_eq!(c.canonical_hash(), h0);
    c.routes.hx_counts[1] += 1;
    assert_ne!(c.canonical_hash(), h0);
}

#[test]
fn canonical_json_has_sorted_keys() {
    let c = isocert::certify(full(1)).unwrap();
    fn check(v: &Value) {
        if let Value::Object(m) = v {
            let keys: Vec<&String> = m.keys().collect();
            let mut sorted = keys.clone();
            sorted.sort();
            assert_eq!(keys, sorted);
            m.values().for_each(check);
        } else if let Value::Array(a) = v {
            a.iter().for_each(check);
        }
    }
    let text = serde_json::to_string(&c.to_json()).unwrap();
    check(&serde_json::from_str(&text).unwrap());
}

#[test]
fn h1_is_degenerate_but_routes_agree() {
    let c = isocert::certify(full(1)).unwrap();
    assert!(c.verdict.pass);
    assert!(c.degenerate);
    assert_eq!(c.counts.as_ref().unwrap().empty_classes, vec![1, 3]);
    for a in &c.routes.agreement {
        assert_eq!((a.compared, a.disagreements), (15, 0));
    }
    assert!(c.skipped.contains_key("eigenmatrix"));
    assert_eq!(c.hemisystem.as_ref().unwrap().orbit.as_ref().unwrap().closure_size, 6);
}

#[test]
fn sampled_mode_is_seeded() {
    let opts = |seed| CertifyOptions { h: 2, depth: Depth::Sampled, seed: Some(seed) };
    let a = isocert::certify(opts(5)).unwrap();
    assert_eq!(a.hash, isocert::certify(opts(5)).unwrap().hash);
    assert_ne!(a.hash, isocert::certify(opts(6)).unwrap().hash);
    assert!(a.verdict.pass);
    assert_eq!(a.routes.algebraic, Coverage::Exhaustive);
    assert_eq!(a.routes.geometric, Coverage::Sampled);
}

#[test]
fn h3_sampled_geometric() {
    let c = isocert::certify(CertifyOptions { h: 3, depth: Depth::Sampled, seed: Some(2024) }).unwrap();
    assert!(c.verdict.pass, "{:?}", c.verdict);
    assert_eq!(c.header.n, 2016);
    assert_eq!(c.routes.agreement[0].compared, 2016 * 2015 / 2);
    assert!(c.routes.agreement[1].compared >= 10_000);
    assert_eq!(c.counts.as_ref().unwrap().valencies, vec![195, 260, 1560]);
}

#[test]
fn invalid_options() {
    for o in [
        CertifyOptions { h: 4, depth: Depth::Full, seed: None },
        CertifyOptions { h: 2, depth: Depth::Sampled, seed: None },
        CertifyOptions { h: 0, depth: Depth::Full, seed: None },
    ] {
        assert!(matches!(isocert::certify(o), Err(Error::InvalidOptions(_))));
    }
}
