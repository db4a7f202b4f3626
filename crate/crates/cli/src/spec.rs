//! JSON function specs: strict parsing with JSON-pointer errors, and a
//! canonical encoding that parses back to the identical function.

use hopfseg::analytic::{Factor, PolyFactor, Polynomial, DEFAULT_MARGIN, MERGE_TOL};
use hopfseg::{Func, C64};
use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemaError {
    #[error("line {line}, column {column}: malformed JSON: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{pointer}: {message}")]
    Field { pointer: String, message: String },
}

impl SchemaError {
    fn at(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Field {
            pointer: pointer.into(),
            message: message.into(),
        }
    }

    /// JSON pointer of the offending value; empty for the document root.
    pub fn pointer(&self) -> Option<&str> {
        match self {
            Self::Field { pointer, .. } => Some(pointer),
            Self::Syntax { .. } => None,
        }
    }
}

type Parsed<T> = Result<T, SchemaError>;

/// A parsed function spec.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    pub f: Func,
    /// Base point for the primitive, when the spec pins one.
    pub base: Option<C64>,
    pub warnings: Vec<String>,
}

const FIELDS: [&str; 7] = ["leading", "roots", "unit_num", "unit_den", "unit_poly", "margin", "base"];

fn complex(v: &Value, ptr: &str) -> Parsed<C64> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| SchemaError::at(ptr, "expected [re, im]"))?;
    let part = |k: usize| {
        arr[k]
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| SchemaError::at(format!("{ptr}/{k}"), "expected a finite number"))
    };
    Ok(C64::new(part(0)?, part(1)?))
}

fn mult(v: Option<&Value>, ptr: &str) -> Parsed<u32> {
    let v = v.ok_or_else(|| SchemaError::at(ptr, "missing field"))?;
    v.as_u64()
        .filter(|&m| m >= 1 && m <= u32::MAX as u64)
        .map(|m| m as u32)
        .ok_or_else(|| SchemaError::at(ptr, "multiplicity must be a positive integer"))
}

fn object<'a>(v: &'a Value, ptr: &str, allowed: &[&str]) -> Parsed<&'a Map<String, Value>> {
    let obj = v.as_object().ok_or_else(|| SchemaError::at(ptr, "expected an object"))?;
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(SchemaError::at(format!("{ptr}/{k}"), "unknown field"));
    }
    Ok(obj)
}

fn array<'a>(doc: &'a Map<String, Value>, key: &str) -> Parsed<&'a [Value]> {
    match doc.get(key) {
        None => Ok(&[]),
        Some(v) => v
            .as_array()
            .map(Vec::as_slice)
            .ok_or_else(|| SchemaError::at(format!("/{key}"), "expected an array")),
    }
}

fn factors(doc: &Map<String, Value>, key: &str, warnings: &mut Vec<String>) -> Parsed<Vec<(Factor<f64>, String)>> {
    let mut out: Vec<(Factor<f64>, String)> = Vec::new();
    for (i, item) in array(doc, key)?.iter().enumerate() {
        let ptr = format!("/{key}/{i}");
        let obj = object(item, &ptr, &["z", "mult"])?;
        let z = complex(obj.get("z").ok_or_else(|| SchemaError::at(format!("{ptr}/z"), "missing field"))?, &format!("{ptr}/z"))?;
        let m = mult(obj.get("mult"), &format!("{ptr}/mult"))?;
        if let Some((_, first)) = out.iter().find(|(f, _)| (f.root - z).norm() < MERGE_TOL) {
            warnings.push(format!("{ptr} duplicates {first} within {MERGE_TOL:e}; multiplicities merged"));
        }
        out.push((Factor::new(z, m), ptr));
    }
    Ok(out)
}

fn polys(doc: &Map<String, Value>) -> Parsed<Vec<PolyFactor<f64>>> {
    let mut out = Vec::new();
    for (i, item) in array(doc, "unit_poly")?.iter().enumerate() {
        let ptr = format!("/unit_poly/{i}");
        let obj = object(item, &ptr, &["coeffs", "mult"])?;
        let cptr = format!("{ptr}/coeffs");
        let coeffs = obj
            .get("coeffs")
            .and_then(Value::as_array)
            .filter(|c| !c.is_empty())
            .ok_or_else(|| SchemaError::at(&cptr, "expected a non-empty array of [re, im]"))?
            .iter()
            .enumerate()
            .map(|(k, c)| complex(c, &format!("{cptr}/{k}")))
            .collect::<Parsed<Vec<_>>>()?;
        let m = mult(obj.get("mult"), &format!("{ptr}/mult"))?;
        out.push(PolyFactor {
            poly: Polynomial { coeffs },
            mult: m,
        });
    }
    Ok(out)
}

/// Parses and validates a function spec.
pub fn parse_spec(text: &str) -> Parsed<FunctionSpec> {
    let doc: Value = serde_json::from_str(text).map_err(|e| SchemaError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let doc = object(&doc, "", &FIELDS)?;
    let leading = complex(doc.get("leading").ok_or_else(|| SchemaError::at("/leading", "missing field"))?, "/leading")?;
    if leading.norm() == 0.0 {
        return Err(SchemaError::at("/leading", "leading coefficient must be non-zero"));
    }
    let margin = match doc.get("margin") {
        None => DEFAULT_MARGIN,
        Some(v) => v
            .as_f64()
            .filter(|m| *m > 0.0 && *m < 0.5)
            .ok_or_else(|| SchemaError::at("/margin", "margin must be a number in (0, 0.5)"))?,
    };
    let mut warnings = Vec::new();
    let roots = factors(doc, "roots", &mut warnings)?;
    let unit_num = factors(doc, "unit_num", &mut warnings)?;
    let unit_den = factors(doc, "unit_den", &mut warnings)?;
    let slack = 1e-12;
    for (r, ptr) in &roots {
        if r.root.norm() > 1.0 - margin + slack {
            return Err(SchemaError::at(format!("{ptr}/z"), format!("interior root must satisfy |z| <= 1 - margin ({})", 1.0 - margin)));
        }
    }
    for (r, ptr) in unit_num.iter().chain(&unit_den) {
        if r.root.norm() < 1.0 + margin - slack {
            return Err(SchemaError::at(format!("{ptr}/z"), format!("unit factor must satisfy |z| >= 1 + margin ({})", 1.0 + margin)));
        }
    }
    let unit_poly = polys(doc)?;
    let base = doc.get("base").map(|b| complex(b, "/base")).transpose()?;
    if let Some(b) = base {
        if b.norm() >= 1.0 - margin {
            return Err(SchemaError::at("/base", "base must lie inside the disk, within 1 - margin"));
        }
    }
    let strip = |v: Vec<(Factor<f64>, String)>| v.into_iter().map(|(f, _)| f).collect::<Vec<_>>();
    let f = Func::with_parts(leading, strip(roots), strip(unit_num), strip(unit_den), unit_poly, margin)
        .map_err(|e| SchemaError::at("", e.to_string()))?;
    Ok(FunctionSpec { f, base, warnings })
}

#[derive(Serialize)]
struct FactorOut {
    z: [f64; 2],
    mult: u32,
}

#[derive(Serialize)]
struct PolyOut {
    coeffs: Vec<[f64; 2]>,
    mult: u32,
}

#[derive(Serialize)]
struct SpecOut {
    leading: [f64; 2],
    roots: Vec<FactorOut>,
    unit_num: Vec<FactorOut>,
    unit_den: Vec<FactorOut>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    unit_poly: Vec<PolyOut>,
    margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    base: Option<[f64; 2]>,
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn canonical(f: &Func, base: Option<C64>) -> SpecOut {
    let list = |v: &[Factor<f64>]| v.iter().map(|r| FactorOut { z: pair(r.root), mult: r.mult }).collect();
    SpecOut {
        leading: pair(f.leading()),
        roots: list(f.roots()),
        unit_num: list(f.unit_num()),
        unit_den: list(f.unit_den()),
        unit_poly: f
            .unit_poly()
            .iter()
            .map(|p| PolyOut {
                coeffs: p.poly.coeffs.iter().copied().map(pair).collect(),
                mult: p.mult,
            })
            .collect(),
        margin: f.margin(),
        base: base.map(pair),
    }
}

/// Canonical spec as a JSON value.
pub fn spec_value(f: &Func, base: Option<C64>) -> Value {
    serde_json::to_value(canonical(f, base)).expect("finite spec serializes")
}

/// Canonical text: fixed field order and shortest round-trip decimals.
pub fn emit_spec(f: &Func, base: Option<C64>) -> String {
    let mut s = serde_json::to_string_pretty(&canonical(f, base)).expect("finite spec serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn five_point_spec() {
        let s = parse_spec(r#"{"leading":[0.25,0],"roots":[{"z":[0,0],"mult":3}]}"#).unwrap();
        assert_eq!(s.f, Func::monomial(c(0.25, 0.0), c(0.0, 0.0), 3).unwrap());
        assert!(s.warnings.is_empty());
        assert_eq!(s.base, None);
    }

    #[test]
    fn field_order_is_irrelevant() {
        let a = parse_spec(r#"{"roots":[{"mult":1,"z":[0.1,0.2]}],"leading":[1,0]}"#).unwrap();
        let b = parse_spec(r#"{"leading":[1,0],"roots":[{"z":[0.1,0.2],"mult":1}]}"#).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_leading_points_at_field() {
        let e = parse_spec(r#"{"roots":[]}"#).unwrap_err();
        assert_eq!(e.pointer(), Some("/leading"));
    }

    #[test]
    fn nested_errors_carry_pointers() {
        let cases = [
            (r#"{"leading":[1,0],"roots":[{"z":[0,0],"mult":1},{"z":[0.3],"mult":1}]}"#, "/roots/1/z"),
            (r#"{"leading":[1,0],"roots":[{"z":[0,0],"mult":0}]}"#, "/roots/0/mult"),
            (r#"{"leading":[1,"x"]}"#, "/leading/1"),
            (r#"{"leading":[1,0],"roots":[{"z":[0.99,0],"mult":1}]}"#, "/roots/0/z"),
            (r#"{"leading":[1,0],"unit_num":[{"z":[1.01,0],"mult":1}]}"#, "/unit_num/0/z"),
            (r#"{"leading":[1,0],"colour":"red"}"#, "/colour"),
            (r#"{"leading":[1,0],"margin":0.7}"#, "/margin"),
            (r#"{"leading":[0,0]}"#, "/leading"),
        ];
        for (text, ptr) in cases {
            let e = parse_spec(text).unwrap_err();
            assert_eq!(e.pointer(), Some(ptr), "{text}: {e}");
        }
    }

    #[test]
    fn syntax_errors_report_lines() {
        let e = parse_spec("{\n  \"leading\": [1, 0],\n  \"roots\": [\n}").unwrap_err();
        match e {
            SchemaError::Syntax { line, .. } => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicates_merge_with_warning() {
        let s = parse_spec(r#"{"leading":[1,0],"roots":[{"z":[0.2,0],"mult":1},{"z":[0.2,1e-13],"mult":2}]}"#).unwrap();
        assert_eq!(s.f.roots().len(), 1);
        assert_eq!(s.f.roots()[0].mult, 3);
        assert_eq!(s.warnings.len(), 1);
        assert!(s.warnings[0].contains("/roots/1"));
    }

    #[test]
    fn canonical_round_trip_is_exact() {
        let q = Polynomial::new(vec![c(1.0, 0.0), c(0.1 / 3.0, -0.0), c(-1e-17, 2.0 / 7.0)]);
        let f = Func::with_parts(
            c(0.1 + 0.2, -1.0 / 3.0),
            vec![Factor::new(c(1.0 / 7.0, 0.3), 2), Factor::new(c(-0.5, 1e-300), 1)],
            vec![Factor::new(c(3.0, -0.7), 1)],
            vec![Factor::new(c(0.0, -2.5), 2)],
            vec![PolyFactor { poly: q, mult: 2 }],
            0.07,
        )
        .unwrap();
        let base = Some(c(-0.5, 1e-300));
        let text = emit_spec(&f, base);
        let back = parse_spec(&text).unwrap();
        assert_eq!(back.f, f);
        assert_eq!(back.base, base);
        assert_eq!(emit_spec(&back.f, back.base), text);
        let bits = |z: C64| (z.re.to_bits(), z.im.to_bits());
        assert_eq!(bits(back.f.leading()), bits(f.leading()));
    }
}
