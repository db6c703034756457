//! Number formatting for exported documents.
//!
//! Exported JSON and CSV carry every f64 with 17 significant decimal digits —
//! enough to reconstruct the exact bit pattern on re-parse. serde_json's
//! default float rendering is shortest-roundtrip (lossless but often fewer
//! textual digits), so exporters assemble their documents through these
//! helpers instead.

/// One f64 as a JSON-compatible decimal literal with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        // exported documents must stay valid JSON; non-finite values are a bug
        // upstream, surface them loudly rather than writing "inf".
        panic!("attempted to serialize non-finite value {x}");
    }
}

/// A JSON array of f64 values at full precision.
pub fn fmt17_array(xs: &[f64]) -> String {
    let mut out = String::with_capacity(xs.len() * 26 + 2);
    out.push('[');
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt17(*x));
    }
    out.push(']');
    out
}

/// A JSON array of arrays (row-major matrix) at full precision.
pub fn fmt17_matrix(rows: &[Vec<f64>]) -> String {
    let mut out = String::from("[");
    for (i, row) in rows.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt17_array(row));
    }
    out.push(']');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_roundtrip_exactly() {
        for &x in &[
            0.880_559_922_317_312_8,
            1.0 / 3.0,
            -2.5e-300,
            6.02214076e23,
            0.0,
        ] {
            let s = fmt17(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "lossy roundtrip via {s}");
            // and the text really is parseable as a JSON number
            let v: serde_json::Value = serde_json::from_str(&s).unwrap();
            assert_eq!(v.as_f64().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn arrays_parse_back() {
        let xs = [1.5, -0.25, 3.141592653589793];
        let parsed: Vec<f64> = serde_json::from_str(&fmt17_array(&xs)).unwrap();
        assert_eq!(parsed, xs);
    }
}
