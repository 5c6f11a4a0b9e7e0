//! Deterministic text rendering: every numeric value is printed in full
//! precision (17 significant digits, exact round-trip) next to a rounded
//! human-readable column, so the same files serve golden-byte comparisons
//! and quick reading.

use caplab_core::solver::SolveResult;
use serde_json::Value;
use std::fmt::Write as _;

/// Full-precision form of a float: 17 significant digits.
pub fn full(x: f64) -> String {
    format!("{x:.16e}")
}

/// Compact rounded form for the human-readable column.
pub fn rounded(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs();
    if (1e-4..1e7).contains(&mag) {
        format!("{x:.6}")
    } else {
        format!("{x:.5e}")
    }
}

/// One aligned `label  full  rounded` report line.
pub fn num_line(label: &str, x: f64) -> String {
    format!("{label:<46} {:>24} {:>14}\n", full(x), rounded(x))
}

/// One aligned `label  value` report line for non-numeric entries.
pub fn text_line(label: &str, value: &str) -> String {
    format!("{label:<46} {value:>24}\n")
}

/// Flatten a JSON document into aligned report lines. Object keys come out
/// in sorted order (the serde_json map is ordered), array entries are
/// indexed, floats get both precision columns.
pub fn flatten_report(value: &Value) -> String {
    let mut out = String::new();
    flatten_into(value, String::new(), &mut out);
    out
}

fn flatten_into(value: &Value, path: String, out: &mut String) {
    match value {
        Value::Object(map) => {
            for (key, sub) in map {
                let child = if path.is_empty() {
                    key.clone()
                } else {
                    format!("{path}.{key}")
                };
                flatten_into(sub, child, out);
            }
        }
        Value::Array(items) => {
            for (i, sub) in items.iter().enumerate() {
                flatten_into(sub, format!("{path}[{i}]"), out);
            }
        }
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&num_line(&path, n.as_f64().unwrap_or(f64::NAN)));
            } else {
                out.push_str(&text_line(&path, &n.to_string()));
            }
        }
        Value::Bool(b) => out.push_str(&text_line(&path, if *b { "true" } else { "false" })),
        Value::String(s) => out.push_str(&text_line(&path, s)),
        Value::Null => out.push_str(&text_line(&path, "null")),
    }
}

/// CSV dump of the recovered boundary profile, one row per angular column.
pub fn boundary_csv(res: &SolveResult) -> String {
    let mut s = String::from("col,angle,u_nu,grad_norm,weight,support,mean_curvature\n");
    for g in &res.gamma {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            g.col,
            full(g.angle),
            full(g.u_nu),
            full(g.grad_norm),
            full(g.weight),
            full(g.support),
            full(g.mean_curvature),
        );
    }
    s
}

/// CSV dump of the nodal field in node order. Coordinates are meridian-plane
/// positions relative to the domain center.
pub fn field_csv(res: &SolveResult) -> String {
    let mesh = &res.mesh;
    let mut s = String::from("node,ring,col,x0,x1,radius,u\n");
    for node in 0..mesh.n_nodes() {
        let ring = mesh.ring_of(node);
        let col = mesh.col_of(node);
        let xy = mesh.coord(node);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            node,
            ring,
            col,
            full(xy[0]),
            full(xy[1]),
            full(mesh.radius(ring, col)),
            full(res.field[node]),
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_precision_round_trips() {
        for &x in &[std::f64::consts::PI, 1.0 / 3.0, 6.02e23, -4.9e-324, 0.1] {
            let printed = full(x);
            let back: f64 = printed.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{printed} failed to round-trip");
        }
    }

    #[test]
    fn flatten_orders_and_types() {
        let v: Value = serde_json::json!({
            "b": {"y": 2.5, "x": true},
            "a": [1, 0.5],
            "c": null,
        });
        let text = flatten_report(&v);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("a[0]"));
        assert!(lines[1].starts_with("a[1]") && lines[1].contains("5.0000000000000000e-1"));
        assert!(lines[2].starts_with("b.x") && lines[2].ends_with("true"));
        assert!(lines[3].starts_with("b.y") && lines[3].contains("2.5000000000000000e0"));
        assert!(lines[4].starts_with("c") && lines[4].ends_with("null"));
    }
}
