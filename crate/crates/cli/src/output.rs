//! JSON rounding and small table helpers.

use std::fmt::Write;

use serde_json::Value;

/// `x` rounded to 12 significant digits; non-finite values pass through.
pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Rounds every real in `value` in place. Integers are left alone.
pub(crate) fn round_reals(value: &mut Value) {
    match value {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            if let Some(r) = n.as_f64().map(round_significant).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_reals),
        Value::Object(map) => map.values_mut().for_each(round_reals),
        _ => {}
    }
}

/// Pretty JSON with rounded reals and a trailing newline.
pub(crate) fn to_json_text(value: &Value) -> String {
    let mut value = value.clone();
    round_reals(&mut value);
    let mut text = serde_json::to_string_pretty(&value).expect("a Value always serializes");
    text.push('\n');
    text
}

pub(crate) fn f3(x: f64) -> String {
    format!("{x:.3}")
}

pub(crate) fn vector(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| f3(x)).collect();
    format!("({})", parts.join(", "))
}

/// Strategy labels, with a contiguous run of four or more shown as `first..last`.
pub(crate) fn strategy_set(labels: &[String], members: &[usize]) -> String {
    if members.is_empty() {
        return "{}".to_string();
    }
    let contiguous = members.windows(2).all(|w| w[1] == w[0] + 1);
    if contiguous && members.len() >= 4 {
        return format!("{}..{}", labels[members[0]], labels[members[members.len() - 1]]);
    }
    let names: Vec<&str> = members.iter().map(|&s| labels[s].as_str()).collect();
    format!("{{{}}}", names.join(", "))
}

/// Rows padded to a common width per column, separated by two spaces.
pub(crate) fn align(rows: &[Vec<String>]) -> String {
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..columns)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                line.push_str("  ");
            }
            let _ = write!(line, "{cell:<w$}", w = widths[c]);
        }
        let _ = writeln!(out, "{}", line.trim_end());
    }
    out
}
