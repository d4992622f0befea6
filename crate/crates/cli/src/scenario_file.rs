//! Line-oriented `key = value` scenario files.
//!
//! Field elements of `F_q` are written as their integer index: the
//! coefficient vector in the polynomial basis read as base-`p` digits,
//! constant term lowest. Negative integers are reduced into the prime field.

use std::collections::BTreeMap;

use lefschetz_core::correspondence::{Correspondence, SheafDatum};
use lefschetz_core::curve::{CurveError, EllipticCurve, Point, Space};
use lefschetz_core::field::{build_field, Fe, FiniteField};
use lefschetz_core::trace_formula::Scenario;
use lefschetz_core::zpn::{Matrix, Zpn};
use thiserror::Error;

const KEYS: [&str; 13] = [
    "space",
    "p",
    "q_degree",
    "curve",
    "alpha",
    "beta",
    "point_P",
    "sign",
    "k",
    "sheaf_rank",
    "sheaf_n",
    "u",
    "m_range",
];

const LINE_ONLY: [&str; 2] = ["alpha", "beta"];
const CURVE_ONLY: [&str; 4] = ["curve", "point_P", "sign", "k"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("missing required key `{key}`")]
    Missing { key: &'static str },
    #[error("line {line}: key `{key}`: {message}")]
    Invalid {
        line: usize,
        key: String,
        message: String,
    },
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.map.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn require(&self, key: &'static str) -> Result<(usize, &str), ScenarioError> {
        self.get(key).ok_or(ScenarioError::Missing { key })
    }

    fn invalid(&self, key: &str, message: impl ToString) -> ScenarioError {
        ScenarioError::Invalid {
            line: self.map.get(key).map_or(0, |e| e.0),
            key: key.to_string(),
            message: message.to_string(),
        }
    }

    fn parse_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ScenarioError> {
        match self.get(key) {
            None => Ok(default),
            Some((_, v)) => v
                .parse()
                .map_err(|_| self.invalid(key, format!("cannot parse `{v}`"))),
        }
    }
}

fn tokenize(text: &str) -> Result<Entries, ScenarioError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ScenarioError::Syntax {
                line,
                text: content.to_string(),
            });
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(ScenarioError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if map.contains_key(key) {
            return Err(ScenarioError::Duplicate {
                line,
                key: key.to_string(),
            });
        }
        map.insert(key.to_string(), (line, value.trim().to_string()));
    }
    Ok(Entries { map })
}

fn parse_element(field: &FiniteField, s: &str) -> Result<Fe, String> {
    let v: i64 = s.trim().parse().map_err(|_| format!("`{}` is not an integer", s.trim()))?;
    if v < 0 {
        return Ok(field.from_int(v));
    }
    if v as u64 >= field.order() {
        return Err(format!("element index {v} is not below q = {}", field.order()));
    }
    Ok(field.from_index(v as u64))
}

fn parse_elements(field: &FiniteField, s: &str) -> Result<Vec<Fe>, String> {
    s.split(',').map(|t| parse_element(field, t)).collect()
}

/// `a..b` (inclusive) or a comma-separated list.
pub fn parse_m_range(s: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("`{s}` is neither `a..b` nor a comma-separated list");
    let out: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if out.is_empty() {
        return Err(format!("`{s}` is empty"));
    }
    if out.contains(&0) {
        return Err("twists start at 1".into());
    }
    Ok(out)
}

fn parse_space(s: &str) -> Result<Space, String> {
    match s {
        "affine_line" => Ok(Space::AffineLine),
        "open_elliptic" => Ok(Space::OpenElliptic),
        "proper_elliptic" => Ok(Space::ProperElliptic),
        _ => Err(format!(
            "`{s}` is not one of affine_line, open_elliptic, proper_elliptic"
        )),
    }
}

fn parse_matrix(ring: Zpn, rank: usize, s: &str) -> Result<Matrix, String> {
    let rows: Vec<Vec<u64>> = s
        .split(';')
        .map(|row| {
            row.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<i128>()
                        .map(|v| ring.reduce_int(v))
                        .map_err(|_| format!("`{t}` is not an integer"))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    if rows.len() != rank || rows.iter().any(|r| r.len() != rank) {
        return Err(format!("expected {rank} rows of {rank} entries"));
    }
    Ok(Matrix::from_rows(ring, &rows))
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let e = tokenize(text)?;
    let (_, space_s) = e.require("space")?;
    let space = parse_space(space_s).map_err(|m| e.invalid("space", m))?;
    let line = space == Space::AffineLine;
    let foreign: &[&str] = if line { &CURVE_ONLY } else { &LINE_ONLY };
    if let Some(key) = foreign.iter().find(|k| e.get(k).is_some()) {
        return Err(e.invalid(key, format!("does not apply to space {space_s}")));
    }
    let (_, p_s) = e.require("p")?;
    let p: u64 = p_s.parse().map_err(|_| e.invalid("p", format!("cannot parse `{p_s}`")))?;
    let degree: usize = e.parse_or("q_degree", 1)?;
    let field = build_field(p, degree).map_err(|err| {
        let key = if e.get("q_degree").is_some() && degree != 1 { "q_degree" } else { "p" };
        e.invalid(key, err)
    })?;
    let (_, m_s) = e.require("m_range")?;
    let m_range = parse_m_range(m_s).map_err(|m| e.invalid("m_range", m))?;
    let rank: usize = e.parse_or("sheaf_rank", 1)?;
    let n: u32 = e.parse_or("sheaf_n", 1)?;
    if !(1..=3).contains(&n) {
        return Err(e.invalid("sheaf_n", "must be 1, 2 or 3"));
    }
    if p.checked_pow(n).is_none_or(|m| m >= 1 << 63) {
        return Err(e.invalid("sheaf_n", format!("{p}^{n} does not fit in 63 bits")));
    }
    let ring = Zpn::new(p, n);
    let u = match e.get("u") {
        None => Matrix::identity(ring, rank),
        Some((_, s)) => parse_matrix(ring, rank, s).map_err(|m| e.invalid("u", m))?,
    };
    let sheaf = SheafDatum::new(u).map_err(|err| e.invalid("u", err))?;

    let correspondence = if line {
        let el = |key: &'static str| -> Result<Fe, ScenarioError> {
            let (_, s) = e.require(key)?;
            parse_element(&field, s).map_err(|m| e.invalid(key, m))
        };
        let (alpha, beta) = (el("alpha")?, el("beta")?);
        Correspondence::affine_line(&field, alpha, beta).map_err(|err| e.invalid("alpha", err))?
    } else {
        let (_, c_s) = e.require("curve")?;
        let coeffs = parse_elements(&field, c_s).map_err(|m| e.invalid("curve", m))?;
        let curve = EllipticCurve::new(&field, &coeffs).map_err(|err| match err {
            CurveError::Singular => e.invalid("curve", "cubic is singular (discriminant zero)"),
            other => e.invalid("curve", other),
        })?;
        let point = match e.get("point_P") {
            None => Point::Infinity,
            Some((_, s)) if s.eq_ignore_ascii_case("o") => Point::Infinity,
            Some((_, s)) => {
                let xy = parse_elements(&field, s).map_err(|m| e.invalid("point_P", m))?;
                let [x, y] = xy[..] else {
                    return Err(e.invalid("point_P", "expected `O` or `x, y`"));
                };
                Point::Affine(x, y)
            }
        };
        let sign: i8 = match e.get("sign").map(|(_, s)| s) {
            None | Some("+1") | Some("1") | Some("+") => 1,
            Some("-1") | Some("-") => -1,
            Some(s) => return Err(e.invalid("sign", format!("`{s}` is not +1 or -1"))),
        };
        let k: u64 = e.parse_or("k", 1)?;
        Correspondence::elliptic(&curve, point, sign, k).map_err(|err| {
            let key = if k == 0 { "k" } else { "point_P" };
            e.invalid(key, err)
        })?
    };
    Scenario::new(correspondence, sheaf, space, m_range).map_err(|err| e.invalid("sheaf_n", err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_affine_file() {
        let s = parse_scenario("space = affine_line\np = 3\nalpha = 1\nbeta = 1\nm_range = 1..3\n").unwrap();
        assert_eq!(s.space, Space::AffineLine);
        assert_eq!(s.m_range, vec![1, 2, 3]);
        assert_eq!(s.sheaf.trace(), 1);
    }

    #[test]
    fn unknown_key_names_key_and_line() {
        let err = parse_scenario("space = affine_line\n# note\nfoo = 1\n").unwrap_err();
        assert_eq!(
            err,
            ScenarioError::UnknownKey {
                line: 3,
                key: "foo".into()
            }
        );
        assert!(err.to_string().contains("foo"));
    }

    #[test]
    fn singular_cubic_is_rejected_on_curve() {
        // x^3 + 2x + 2 = (x - 1)^2 (x + 2) over F_5
        let err = parse_scenario("space = open_elliptic\np = 5\ncurve = 2, 2, 0\nm_range = 1\n").unwrap_err();
        match err {
            ScenarioError::Invalid { key, line, .. } => assert_eq!((key.as_str(), line), ("curve", 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn elliptic_defaults_and_points() {
        let s = parse_scenario(
            "space = proper_elliptic\np = 5\ncurve = 1, 1, 0\npoint_P = 0, 1\nsign = -1\nk = 2\nu = 2\nm_range = 1, 3\n",
        )
        .unwrap();
        assert_eq!(s.m_range, vec![1, 3]);
        assert_eq!(s.sheaf.trace(), 2);
        let Correspondence::Elliptic { sign, k, translation, .. } = s.correspondence else {
            panic!()
        };
        assert_eq!((sign, k), (-1, 2));
        assert_ne!(translation, Point::Infinity);
    }

    #[test]
    fn rejections() {
        let base = "space = open_elliptic\np = 5\ncurve = 1, 1, 0\nm_range = 1\n";
        for (extra, key) in [
            ("point_P = 1, 1\n", "point_P"),
            ("sign = 2\n", "sign"),
            ("alpha = 1\n", "alpha"),
            ("sheaf_n = 2\n", "sheaf_n"),
            ("sheaf_rank = 2\nu = 1, 2\n", "u"),
        ] {
            match parse_scenario(&format!("{base}{extra}")).unwrap_err() {
                ScenarioError::Invalid { key: k, .. } => assert_eq!(k, key, "{extra}"),
                other => panic!("{extra}: {other:?}"),
            }
        }
        assert!(matches!(
            parse_scenario("space = affine_line\np = 3\nbeta = 1\nm_range = 1\n"),
            Err(ScenarioError::Missing { key: "alpha" })
        ));
        assert!(matches!(
            parse_scenario("space = affine_line\nspace = affine_line\n"),
            Err(ScenarioError::Duplicate { line: 2, .. })
        ));
        assert!(matches!(parse_scenario("p 3\n"), Err(ScenarioError::Syntax { line: 1, .. })));
        assert!(parse_m_range("0..2").is_err());
        assert!(parse_m_range("3..1").is_err());
    }
}
