//! Output formats: table JSON, graph6 and the spectral CSV.

use std::io::Write;

use hemischeme::schemecore::eigen::{self, rat_to_string};
use hemischeme::schemecore::{IntersectionNumbers, RelationTable};
use serde_json::{json, Value};

/// graph6 encoding of a simple graph given by row bitsets, with trailing newline.
pub fn graph6(adj: &[Vec<u64>]) -> Vec<u8> {
    let n = adj.len();
    let mut out = Vec::new();
    match n {
        0..=62 => out.push(n as u8 + 63),
        63..=258_047 => {
            out.push(126);
            out.extend((0..3).rev().map(|k| ((n >> (6 * k)) & 63) as u8 + 63));
        }
        _ => {
            out.extend([126, 126]);
            out.extend((0..6).rev().map(|k| ((n >> (6 * k)) & 63) as u8 + 63));
        }
    }
    let (mut acc, mut bits) = (0u8, 0);
    for j in 1..n {
        for i in 0..j {
            acc = acc << 1 | (adj[i][j / 64] >> (j % 64) & 1) as u8;
            bits += 1;
            if bits == 6 {
                out.push(acc + 63);
                acc = 0;
                bits = 0;
            }
        }
    }
    if bits > 0 {
        out.push((acc << (6 - bits)) + 63);
    }
    out.push(b'\n');
    out
}

pub fn table_json(header: Value, pairs: &[u32], t: &RelationTable) -> Value {
    let rows: Vec<&[u8]> = (0..t.n()).map(|i| t.row(i)).collect();
    json!({ "header": header, "pairs": pairs, "table": rows })
}

/// Reads a table written by `table_json`.
pub fn table_from_json(v: &Value) -> Result<(Value, RelationTable), String> {
    let header = v.get("header").cloned().ok_or("missing header")?;
    let d = header
        .get("classes")
        .and_then(Value::as_u64)
        .ok_or("header lacks a class count")? as usize;
    let rows = v.get("table").and_then(Value::as_array).ok_or("missing table")?;
    let n = rows.len();
    let mut data = Vec::with_capacity(n * n);
    for r in rows {
        let r = r.as_array().filter(|r| r.len() == n).ok_or("table is not square")?;
        for c in r {
            let c = c.as_u64().filter(|&c| c <= u8::MAX as u64).ok_or("class entry out of range")?;
            data.push(c as u8);
        }
    }
    let t = RelationTable::from_vec(n, d, data).map_err(|e| e.to_string())?;
    Ok((header, t))
}

/// Long-format CSV `quantity,k,i,j,value` of P, Q, multiplicities,
/// intersection numbers p^k_ij and Krein parameters q^k_ij; values are "num/den".
pub fn spectral_csv<W: Write>(ints: &IntersectionNumbers, w: W) -> Result<(), String> {
    let em = eigen::eigenmatrix(ints).map_err(|e| e.to_string())?;
    let kr = eigen::krein(&em, ints.n).map_err(|e| e.to_string())?;
    let mut out = csv::Writer::from_writer(w);
    let err = |e: csv::Error| e.to_string();
    out.write_record(["quantity", "k", "i", "j", "value"]).map_err(err)?;
    let d = ints.d;
    for (name, m) in [("P", &em.p), ("Q", &em.q)] {
        for (i, row) in m.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                out.write_record([name, "", &i.to_string(), &j.to_string(), &rat_to_string(x)]).map_err(err)?;
            }
        }
    }
    for (i, m) in em.multiplicities.iter().enumerate() {
        out.write_record(["multiplicity", "", &i.to_string(), "", &format!("{m}/1")]).map_err(err)?;
    }
    for k in 0..=d {
        for i in 0..=d {
            for j in 0..=d {
                let (ks, is, js) = (k.to_string(), i.to_string(), j.to_string());
                out.write_record(["p", &ks, &is, &js, &format!("{}/1", ints.get(k, i, j))]).map_err(err)?;
                out.write_record(["krein", &ks, &is, &js, &rat_to_string(&kr[k][i][j])]).map_err(err)?;
            }
        }
    }
    out.flush().map_err(|e| e.to_string())
}

/// The relation table as CSV rows, preceded by `# key=value` header lines.
pub fn table_csv<W: Write>(header: &Value, t: &RelationTable, mut w: W) -> std::io::Result<()> {
    if let Value::Object(m) = header {
        for (k, v) in m {
            writeln!(w, "# {k}={v}")?;
        }
    }
    let mut out = csv::Writer::from_writer(w);
    for i in 0..t.n() {
        out.write_record(t.row(i).iter().map(|c| c.to_string()))?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<u64>> {
        let mut adj = vec![vec![0u64; n.div_ceil(64)]; n];
        for &(a, b) in edges {
            adj[a][b / 64] |= 1 << (b % 64);
            adj[b][a / 64] |= 1 << (a % 64);
        }
        adj
    }

    #[test]
    fn graph6_known_strings() {
        // Reference encodings from the format description.
        assert_eq!(graph6(&bits(0, &[])), b"?\n");
        let k4: Vec<_> = (0..4).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
        assert_eq!(graph6(&bits(4, &k4)), b"C~\n");
        // Path 0-1-2-3-4: bits x01 x02 x12 x03 x13 x23 | x04 x14 x24 x34 = 101001 0001(00).
        assert_eq!(graph6(&bits(5, &[(0, 1), (1, 2), (2, 3), (3, 4)])), b"DhC\n");
    }

    #[test]
    fn graph6_long_header() {
        let g = graph6(&bits(120, &[]));
        assert_eq!(&g[..4], &[126, 63, 64, 119]);
    }
}
