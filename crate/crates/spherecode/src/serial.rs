//! Canonical text serialization for spherical codes.
//!
//! Two modes share one header layout. `exact` rows print turn fractions of
//! the polar-angle chain; `decimal` rows print Cartesian coordinates with 17
//! significant digits (exact f64 round trip). Rows are sorted
//! lexicographically as strings, so equal codes serialize identically no
//! matter how their points were ordered. The serialization is the identity
//! fed to enumeration-order oracles, so stability here is load-bearing.

use crate::exact::Rat;
use crate::geom::{GeomError, SphericalCode};
use num_traits::One;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SerMode {
    Exact,
    Decimal,
}

#[derive(Debug, Error)]
pub enum SerialError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Geom(#[from] GeomError),
}

fn fmt_turn(t: &Rat) -> String {
    if t.denom().is_one() {
        format!("{}", t.numer())
    } else {
        format!("{}/{}", t.numer(), t.denom())
    }
}

/// Serializes a code; `SerMode::Exact` requires exact turn data.
pub fn serialize_code(code: &SphericalCode, mode: SerMode) -> Result<String, SerialError> {
    let mut rows: Vec<String> = match mode {
        SerMode::Exact => {
            let turns = code.exact_turns().ok_or(GeomError::NoExactForm)?;
            turns
                .iter()
                .map(|t| {
                    let parts: Vec<String> = t.iter().map(fmt_turn).collect();
                    format!("point {}", parts.join(" "))
                })
                .collect()
        }
        SerMode::Decimal => code
            .points()
            .iter()
            .map(|p| {
                let parts: Vec<String> =
                    p.coords().iter().map(|c| format!("{c:.16e}")).collect();
                format!("point {}", parts.join(" "))
            })
            .collect(),
    };
    rows.sort();
    let mut out = String::new();
    writeln!(out, "code v1").unwrap();
    writeln!(out, "dim {}", code.dim()).unwrap();
    writeln!(out, "count {}", code.len()).unwrap();
    writeln!(out, "mode {}", if mode == SerMode::Exact { "exact" } else { "decimal" }).unwrap();
    for r in rows {
        writeln!(out, "{r}").unwrap();
    }
    Ok(out)
}

/// Exact serialization when the code carries exact data, decimal otherwise.
/// This is the canonical identity of a code for hashing and oracle input.
pub fn canonical_serialization(code: &SphericalCode) -> String {
    let mode = if code.exact_turns().is_some() { SerMode::Exact } else { SerMode::Decimal };
    serialize_code(code, mode).expect("mode chosen from availability")
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T, SerialError> {
    Err(SerialError::Parse { line, msg: msg.into() })
}

/// Parses the canonical text form back into a code.
pub fn parse_code(text: &str) -> Result<SphericalCode, SerialError> {
    let mut lines = text.lines().enumerate();
    let mut next_content = |want: &str| -> Result<(usize, String), SerialError> {
        for (i, raw) in lines.by_ref() {
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Ok((i + 1, t.to_string()));
        }
        perr(0, format!("missing {want}"))
    };

    let (ln, header) = next_content("header")?;
    if header != "code v1" {
        return perr(ln, format!("expected 'code v1', got '{header}'"));
    }
    let (ln, dim_line) = next_content("dim line")?;
    let dim: usize = dim_line
        .strip_prefix("dim ")
        .and_then(|v| v.parse().ok())
        .ok_or(SerialError::Parse { line: ln, msg: format!("bad dim line '{dim_line}'") })?;
    let (ln, count_line) = next_content("count line")?;
    let count: usize = count_line
        .strip_prefix("count ")
        .and_then(|v| v.parse().ok())
        .ok_or(SerialError::Parse { line: ln, msg: format!("bad count line '{count_line}'") })?;
    let (ln, mode_line) = next_content("mode line")?;
    let mode = match mode_line.strip_prefix("mode ") {
        Some("exact") => SerMode::Exact,
        Some("decimal") => SerMode::Decimal,
        _ => return perr(ln, format!("bad mode line '{mode_line}'")),
    };

    let mut exact_rows: Vec<Vec<Rat>> = Vec::new();
    let mut decimal_rows: Vec<Vec<f64>> = Vec::new();
    for (i, raw) in lines {
        let line_no = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let body = match t.strip_prefix("point ") {
            Some(b) => b,
            None => return perr(line_no, format!("expected point row, got '{t}'")),
        };
        let fields: Vec<&str> = body.split_whitespace().collect();
        match mode {
            SerMode::Exact => {
                if fields.len() != dim - 1 {
                    return perr(
                        line_no,
                        format!("expected {} turn entries, got {}", dim - 1, fields.len()),
                    );
                }
                let mut row = Vec::with_capacity(fields.len());
                for f in fields {
                    row.push(parse_turn(f).map_err(|msg| SerialError::Parse {
                        line: line_no,
                        msg,
                    })?);
                }
                exact_rows.push(row);
            }
            SerMode::Decimal => {
                if fields.len() != dim {
                    return perr(
                        line_no,
                        format!("expected {} coordinates, got {}", dim, fields.len()),
                    );
                }
                let mut row = Vec::with_capacity(fields.len());
                for f in fields {
                    let v: f64 = f.parse().map_err(|_| SerialError::Parse {
                        line: line_no,
                        msg: format!("bad coordinate '{f}'"),
                    })?;
                    row.push(v);
                }
                decimal_rows.push(row);
            }
        }
    }

    let code = match mode {
        SerMode::Exact => SphericalCode::from_turns_exact(dim, exact_rows)?,
        SerMode::Decimal => {
            let pts = decimal_rows
                .into_iter()
                .map(crate::geom::SpherePoint::from_stored)
                .collect::<Result<Vec<_>, _>>()?;
            SphericalCode::from_points(pts)?
        }
    };
    if code.len() != count {
        return perr(0, format!("count header says {count}, found {} rows", code.len()));
    }
    Ok(code)
}

fn parse_turn(s: &str) -> Result<Rat, String> {
    if let Some((n, d)) = s.split_once('/') {
        let num: num_bigint::BigInt = n.parse().map_err(|_| format!("bad turn '{s}'"))?;
        let den: num_bigint::BigInt = d.parse().map_err(|_| format!("bad turn '{s}'"))?;
        if den == 0.into() {
            return Err(format!("zero denominator in '{s}'"));
        }
        Ok(Rat::new(num, den))
    } else {
        let num: num_bigint::BigInt = s.parse().map_err(|_| format!("bad turn '{s}'"))?;
        Ok(Rat::from_integer(num))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::geom::SpherePoint;

    fn square_code() -> SphericalCode {
        SphericalCode::from_turns_exact(
            2,
            vec![vec![rat(0, 1)], vec![rat(1, 4)], vec![rat(1, 2)], vec![rat(3, 4)]],
        )
        .unwrap()
    }

    #[test]
    fn exact_serialization_is_order_independent() {
        let a = square_code();
        let b = SphericalCode::from_turns_exact(
            2,
            vec![vec![rat(3, 4)], vec![rat(0, 1)], vec![rat(1, 2)], vec![rat(1, 4)]],
        )
        .unwrap();
        assert_eq!(canonical_serialization(&a), canonical_serialization(&b));
    }

    #[test]
    fn exact_roundtrip() {
        let code = square_code();
        let text = serialize_code(&code, SerMode::Exact).unwrap();
        let back = parse_code(&text).unwrap();
        assert_eq!(back.len(), 4);
        assert_eq!(back.dim(), 2);
        assert_eq!(canonical_serialization(&back), text);
    }

    #[test]
    fn decimal_roundtrip_preserves_bits() {
        let pts = vec![
            SpherePoint::new(vec![0.6, 0.8, 0.0]).unwrap(),
            SpherePoint::new(vec![0.0, -0.6, 0.8]).unwrap(),
            SpherePoint::new(vec![1.0, 0.0, 0.0]).unwrap(),
        ];
        let code = SphericalCode::from_points(pts).unwrap();
        let text = serialize_code(&code, SerMode::Decimal).unwrap();
        let back = parse_code(&text).unwrap();
        assert_eq!(serialize_code(&back, SerMode::Decimal).unwrap(), text);
    }

    #[test]
    fn header_snapshot() {
        let text = serialize_code(&square_code(), SerMode::Exact).unwrap();
        let expect = "code v1\ndim 2\ncount 4\nmode exact\npoint 0\npoint 1/2\npoint 1/4\npoint 3/4\n";
        assert_eq!(text, expect);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad_mode = "code v1\ndim 2\ncount 1\nmode polar\npoint 0";
        match parse_code(bad_mode) {
            Err(SerialError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad_row = "code v1\ndim 3\ncount 1\nmode decimal\npoint 1.0 0.0";
        match parse_code(bad_row) {
            Err(SerialError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad_count = "code v1\ndim 2\ncount 3\nmode exact\npoint 0\npoint 1/2";
        assert!(parse_code(bad_count).is_err());
    }

    #[test]
    fn exact_mode_requires_exact_data() {
        let pts = vec![
            SpherePoint::new(vec![0.6, 0.8]).unwrap(),
            SpherePoint::new(vec![-0.8, 0.6]).unwrap(),
        ];
        let code = SphericalCode::from_points(pts).unwrap();
        assert!(serialize_code(&code, SerMode::Exact).is_err());
        assert!(serialize_code(&code, SerMode::Decimal).is_ok());
    }
}
