//! Curve files: one curve per line as `label a1 a2 a3 a4 a6 N`, with `#`
//! starting a comment.

use std::collections::HashSet;
use std::path::Path;

use anyhow::{anyhow, bail, Context};

use hw_core::ec::CurveQ;

pub fn parse_curves(text: &str) -> anyhow::Result<Vec<CurveQ>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 7 {
            bail!("line {lineno}: expected 7 fields (label a1 a2 a3 a4 a6 N), found {}", fields.len());
        }
        let label = fields[0].to_string();
        let mut coeffs = [0i64; 5];
        for (k, f) in fields[1..6].iter().enumerate() {
            coeffs[k] =
                f.parse().map_err(|e| anyhow!("line {lineno}: coefficient a{} = {f:?}: {e}", [1, 2, 3, 4, 6][k]))?;
        }
        let n: u64 = fields[6].parse().map_err(|e| anyhow!("line {lineno}: conductor {:?}: {e}", fields[6]))?;
        if !seen.insert(label.clone()) {
            bail!("line {lineno}: duplicate label {label}");
        }
        let curve = CurveQ::from_coefficients(coeffs, n, &label).map_err(|e| anyhow!("line {lineno}: {e}"))?;
        out.push(curve);
    }
    Ok(out)
}

pub fn read_curve_file(path: &Path) -> anyhow::Result<Vec<CurveQ>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_curves(&text).with_context(|| format!("in {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hw_core::ec::Weierstrass;

    #[test]
    fn parses_a_line() {
        let cs = parse_curves("37a 0 0 1 -1 0 37\n").unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].label(), Some("37a"));
        assert_eq!(*cs[0].model(), Weierstrass::new(0, 0, 1, -1, 0));
        assert_eq!(cs[0].conductor(), 37);
    }

    #[test]
    fn comments_and_blank_lines() {
        let cs = parse_curves("# comment\n\n11a 0 -1 1 -10 -20 11  # trailing\n").unwrap();
        assert_eq!(cs.len(), 1);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_curves("# header\n37a 0 0 1\n").unwrap_err().to_string();
        assert!(e.contains("line 2") && e.contains("7 fields"), "{e}");
        let e = parse_curves("37a 0 0 1 -1 0 37\n37a 0 0 1 -1 0 37\n").unwrap_err().to_string();
        assert!(e.contains("line 2") && e.contains("duplicate"), "{e}");
        let e = parse_curves("37a 0 0 x -1 0 37\n").unwrap_err().to_string();
        assert!(e.contains("line 1") && e.contains("a3"), "{e}");
        let e = parse_curves("37a 0 0 1 -1 0 38\n").unwrap_err().to_string();
        assert!(e.contains("line 1"), "{e}");
    }
}
