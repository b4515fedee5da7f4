//! Acceptance suite: one PASS/FAIL line per criterion, driven through the
//! `hemischeme` binary. Exits nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_hemischeme");

struct Run {
    code: i32,
    elapsed: Duration,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let start = Instant::now();
    let out = Command::new(BIN).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        elapsed: start.elapsed(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).expect("output written")).expect("valid json")
}

struct Cert {
    run: Run,
    json: Value,
}

fn certify(dir: &Path, h: u32) -> Cert {
    let out: PathBuf = dir.join(format!("cert_h{h}.json"));
    let h_arg = h.to_string();
    let run = run(&["--threads", "1", "certify", "--h", &h_arg, "--depth", "full", "--out", out.to_str().unwrap()]);
    let json = read_json(&out);
    Cert { run, json }
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn u(v: &Value) -> u64 {
    v.as_u64().unwrap_or(u64::MAX)
}

fn i64s(v: &Value) -> Vec<Vec<i64>> {
    v.as_array()
        .map(|rows| {
            rows.iter()
                .map(|r| r.as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect())
                .collect()
        })
        .unwrap_or_default()
}

/// First eigenmatrix closed form at even q.
fn eq3(q: i64) -> Vec<Vec<i64>> {
    let q2 = q * q;
    vec![
        vec![1, (q - 2) * (q2 + 1) / 2, q * (q2 + 1) / 2, q * (q - 2) * (q2 + 1) / 2],
        vec![1, -(q - 1) * (q - 2) / 2, -q * (q - 1) / 2, q * (q - 2)],
        vec![1, -(q2 - q + 2) / 2, q * (q + 1) / 2, -q],
        vec![1, q - 1, 0, -q],
    ]
}

fn same_rows(a: &[Vec<i64>], b: &[Vec<i64>]) -> bool {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    a.sort();
    b.sort();
    a == b
}

fn all_agree(cert: &Value) -> Result<(), String> {
    for a in cert["routes"]["agreement"].as_array().ok_or("no agreement block")? {
        ensure(u(&a["disagreements"]) == 0, format!("disagreement in {a}"))?;
    }
    Ok(())
}

fn c1(c2: &Cert, again: &Cert) -> Check {
    ensure(c2.run.code == 0, format!("exit {}: {}", c2.run.code, c2.run.stderr))?;
    let ag = c2.json["routes"]["agreement"].as_array().ok_or("no agreement")?;
    ensure(ag.len() == 3, "expected three route comparisons")?;
    for a in ag {
        ensure(u(&a["compared"]) == 7140 && u(&a["disagreements"]) == 0, format!("{a}"))?;
    }
    ensure(c2.run.elapsed < Duration::from_secs(30), format!("took {:?}", c2.run.elapsed))?;
    ensure(c2.json["hash"] == again.json["hash"], "hash differs between runs")?;
    Ok(format!("7140 pairs x 3 routes agree, {:.2?}, hash stable", c2.run.elapsed))
}

fn c2(c3: &Cert) -> Check {
    ensure(c3.run.code == 0, format!("exit {}: {}", c3.run.code, c3.run.stderr))?;
    let ag = &c3.json["routes"]["agreement"];
    ensure(u(&ag[0]["compared"]) == 2_031_120, "hx/klein not exhaustive")?;
    ensure(u(&ag[1]["compared"]) >= 10_000 && u(&ag[2]["compared"]) >= 10_000, "too few geometric checks")?;
    all_agree(&c3.json)?;
    ensure(c3.run.elapsed < Duration::from_secs(600), format!("took {:?}", c3.run.elapsed))?;
    Ok(format!(
        "2031120 hx/klein pairs, {} geometric pairs, {:.2?}",
        u(&ag[1]["compared"]),
        c3.run.elapsed
    ))
}

fn c3(c2: &Cert, c3: &Cert) -> Check {
    for (c, q) in [(c2, 4), (c3, 8)] {
        let e = &c.json["eigenmatrix"];
        for side in ["hx", "pw"] {
            let p = i64s(&e[side]["p"]);
            ensure(same_rows(&p, &eq3(q)), format!("{side} P at q = {q} is {p:?}"))?;
        }
    }
    Ok("P equals the closed form at q = 4 and q = 8 for both tables".into())
}

fn c4(c2: &Cert, c3: &Cert, dir: &Path) -> Check {
    for c in [c2, c3] {
        let s = &c.json["schemes"];
        ensure(s["hx_verified"] == true && s["pw_verified"] == true, format!("{s}"))?;
        ensure(u(&s["table_differences"]) == 0, "tables differ")?;
    }
    let fine = run(&["verify", "--h", "2", "--family", "fine"]);
    ensure(fine.code == 0, format!("fine verify exit {}", fine.code))?;
    // One-flip mutation of the h = 2 table.
    let path = dir.join("hx2.json");
    let b = run(&["build", "--h", "2", "--family", "hx", "--out", path.to_str().unwrap()]);
    ensure(b.code == 0, "build failed")?;
    let mut t = read_json(&path);
    let c = u(&t["table"][5][9]);
    let flipped = c % 3 + 1;
    t["table"][5][9] = flipped.into();
    t["table"][9][5] = flipped.into();
    let mutated = dir.join("hx2_flip.json");
    std::fs::write(&mutated, t.to_string()).unwrap();
    let out = dir.join("verify_flip.json");
    let v = run(&["verify", "--input", mutated.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    ensure(v.code == 1, format!("mutated table exit {}", v.code))?;
    let rep = read_json(&out);
    let err = rep["error"].as_str().unwrap_or("");
    ensure(err.contains("not an association scheme") && err.contains("pair ("), format!("no witness: {err}"))?;
    Ok(format!("HX, PW (h=2,3) and fine (h=2) are schemes; mutation rejected: {err}"))
}

fn c5(c2: &Cert, c3: &Cert) -> Check {
    for (c, per_point, external) in [(c2, 2, 1020), (c3, 4, 32760)] {
        let r = &c.json["hemisystem"]["report"];
        ensure(r["pass"] == true, format!("{r}"))?;
        ensure(u(&r["required_count"]) == per_point, "wrong q/2")?;
        ensure(u(&r["external_points"]) == external, format!("external points {}", r["external_points"]))?;
        ensure(r["deviations"].as_array().is_some_and(|d| d.is_empty()), "deviations")?;
    }
    Ok("1020 points x 2 lines (h=2), 32760 points x 4 lines (h=3)".into())
}

fn nonnegative_fraction(s: &str) -> bool {
    match s.split_once('/') {
        Some((n, d)) => n.parse::<i128>().is_ok_and(|n| n >= 0) && d.parse::<i128>().is_ok_and(|d| d > 0),
        None => false,
    }
}

fn c6(c2: &Cert, c3: &Cert) -> Check {
    for c in [c2, c3] {
        let e = &c.json["eigenmatrix"]["hx"];
        let krein: Vec<&str> = e["krein"]
            .as_array()
            .ok_or("no krein")?
            .iter()
            .flat_map(|m| m.as_array().unwrap().iter().flat_map(|r| r.as_array().unwrap().iter()))
            .map(|x| x.as_str().unwrap())
            .collect();
        ensure(krein.len() == 64 && krein.iter().all(|s| nonnegative_fraction(s)), "negative Krein parameter")?;
        ensure(e["q_polynomial_orderings"].as_array().is_some_and(|a| !a.is_empty()), "no Q-polynomial ordering")?;
        ensure(e["p_polynomial_orderings"].as_array().is_some_and(|a| a.is_empty()), "P-polynomial ordering found")?;
        let k = &c.json["krein"];
        ensure(k["primitive"] == true && k["pass"] == true, format!("{k}"))?;
    }
    Ok("Krein >= 0, Q-polynomial, not P-polynomial, primitive at h=2,3".into())
}

/// Decodes graph6 into an adjacency matrix.
fn decode_graph6(bytes: &[u8]) -> Vec<Vec<bool>> {
    let data: Vec<u8> = bytes.iter().copied().filter(|&b| b != b'\n').map(|b| b - 63).collect();
    let (n, rest) = if data[0] < 63 {
        (data[0] as usize, &data[1..])
    } else {
        let n = data[1..4].iter().fold(0usize, |acc, &x| acc << 6 | x as usize);
        (n, &data[4..])
    };
    let bits = rest.iter().flat_map(|&x| (0..6).rev().map(move |k| x >> k & 1 == 1));
    let mut adj = vec![vec![false; n]; n];
    let mut it = bits;
    for j in 1..n {
        for i in 0..j {
            let b = it.next().unwrap();
            adj[i][j] = b;
            adj[j][i] = b;
        }
    }
    adj
}

fn srg_params(adj: &[Vec<bool>]) -> Option<(usize, usize, usize, usize)> {
    let n = adj.len();
    let k = adj[0].iter().filter(|&&b| b).count();
    let (mut lambda, mut mu) = (None, None);
    for x in 0..n {
        if adj[x].iter().filter(|&&b| b).count() != k {
            return None;
        }
        for y in x + 1..n {
            let c = (0..n).filter(|&z| adj[x][z] && adj[y][z]).count();
            let slot = if adj[x][y] { &mut lambda } else { &mut mu };
            if *slot.get_or_insert(c) != c {
                return None;
            }
        }
    }
    Some((n, k, lambda?, mu?))
}

fn c7(c3: &Cert, dir: &Path) -> Check {
    let srg = |q: usize| (q * q * (q * q - 1) / 2, (q * q + 1) * (q - 1), q * q + q - 2, 2 * (q * q - q));
    let g6 = dir.join("fused.g6");
    let e = run(&["export", "--h", "2", "--family", "pw", "--classes", "1,2", "--format", "graph6", "--out", g6.to_str().unwrap()]);
    ensure(e.code == 0, format!("export exit {}", e.code))?;
    let adj = decode_graph6(&std::fs::read(&g6).unwrap());
    let p = srg_params(&adj).ok_or("h=2 fused graph is not strongly regular")?;
    ensure(p == srg(4), format!("h=2 parameters {p:?}"))?;
    let s = &c3.json["srg"];
    let f = &s["found"];
    let found = (u(&f["v"]) as usize, u(&f["k"]) as usize, u(&f["lambda"]) as usize, u(&f["mu"]) as usize);
    ensure(found == srg(8), format!("h=3 parameters {found:?}"))?;
    ensure(s["merged_classes"] == serde_json::json!([1, 2]), "merged classes")?;
    Ok(format!("{:?} from graph6 export, {:?} from the certificate", p, found))
}

fn c8(dir: &Path) -> Check {
    let (fp, hp) = (dir.join("fine2.json"), dir.join("hx2b.json"));
    ensure(run(&["build", "--h", "2", "--family", "fine", "--out", fp.to_str().unwrap()]).code == 0, "fine build")?;
    ensure(run(&["build", "--h", "2", "--family", "hx", "--out", hp.to_str().unwrap()]).code == 0, "hx build")?;
    let (fine, hx) = (read_json(&fp), read_json(&hp));
    ensure(u(&fine["header"]["classes"]) == 7, "fine class count")?;
    // hx must be a function of the fine class, and every fine class must occur.
    let mut map = [0u64; 8];
    let n = hx["table"].as_array().unwrap().len();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (f, c) = (u(&fine["table"][i][j]) as usize, u(&hx["table"][i][j]));
            if map[f] == 0 {
                map[f] = c;
            }
            ensure(map[f] == c, format!("fine class {f} meets hx classes {} and {c}", map[f]))?;
        }
    }
    ensure(map[1..].iter().all(|&c| c != 0), "unused fine class")?;
    Ok(format!("7 classes fusing onto hx via {:?}", &map[1..]))
}

fn c9(certs: &[(&Cert, u64)]) -> Check {
    let mut msg = Vec::new();
    for (c, min_pairs) in certs {
        let s = &c.json["identities"];
        ensure(s["pass"] == true, format!("{s}"))?;
        ensure(u(&s["pairs"]) >= *min_pairs, "too few pairs")?;
        for k in ["rho_hat_form_failures", "factorization_failures", "radical_failures", "gram_failures", "nu_dictionary_failures", "rho_one"] {
            ensure(u(&s[k]) == 0, format!("{k} = {}", s[k]))?;
        }
        msg.push(u(&s["pairs"]).to_string());
    }
    Ok(format!("identity sweeps over {} pairs", msg.join(" / ")))
}

fn c10(c1: &Cert, c2: &Cert, c3: &Cert) -> Check {
    for (c, size) in [(c1, 6), (c2, 120)] {
        let o = &c.json["hemisystem"]["orbit"];
        ensure(o["pass"] == true && u(&o["closure_size"]) == size, format!("{o}"))?;
    }
    for c in [c2, c3] {
        let e = &c.json["hemisystem"]["equivariance"];
        ensure(e["pass"] == true && u(&e["samples"]) == 100, format!("{e}"))?;
    }
    Ok("orbits of size 6 and 120; 100 commuting samples at h=2,3".into())
}

fn c11(c1: &Cert) -> Check {
    ensure(c1.run.code == 0, format!("exit {}", c1.run.code))?;
    ensure(c1.json["degenerate"] == true, "not flagged degenerate")?;
    ensure(c1.json["counts"]["empty_classes"] == serde_json::json!([1, 3]), "empty classes")?;
    for a in c1.json["routes"]["agreement"].as_array().unwrap() {
        ensure(u(&a["compared"]) == 15 && u(&a["disagreements"]) == 0, format!("{a}"))?;
    }
    Ok("degenerate, classes 1 and 3 empty, 15 pairs agree on all routes".into())
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let d = dir.path();
    let h1 = certify(d, 1);
    let h2 = certify(d, 2);
    let h2b = certify(d, 2);
    let h3 = certify(d, 3);

    let results: Vec<(u32, &str, Check)> = vec![
        (1, "Main theorem at q=4, all routes", c1(&h2, &h2b)),
        (2, "Main theorem at q=8", c2(&h3)),
        (3, "Eigenmatrix equals the closed form", c3(&h2, &h3)),
        (4, "Scheme axioms and mutation control", c4(&h2, &h3, d)),
        (5, "Hemisystem property", c5(&h2, &h3)),
        (6, "Krein / Q-polynomial / not P-polynomial / primitive", c6(&h2, &h3)),
        (7, "SRG fusion parameters", c7(&h3, d)),
        (8, "Fine scheme fuses to HX", c8(d)),
        (9, "Identity sweeps", c9(&[(&h1, 15), (&h2, 7140), (&h3, 100_000)])),
        (10, "Orbit and equivariance", c10(&h1, &h2, &h3)),
        (11, "Degenerate base case h=1", c11(&h1)),
    ];
    let mut failed = 0;
    for (id, name, r) in &results {
        match r {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail}"),
            Err(e) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {e}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
