//! Scenario files: JSON with expression strings as leaves.
//!
//! ```json
//! {
//!   "n": 1, "r": 1, "N": 2,
//!   "connection": { "theta": [[{"dz1": "zb1"}]], "gamma": {"1,1,1": "0"} },
//!   "family": { "phi": {"1,1": "t"} },
//!   "forms": { "s": { "bidegree": [1, 0], "word": "scalar", "value": {"dz1": "z1"} } },
//!   "suites": ["mc", "extend_scalar"],
//!   "seed": 0
//! }
//! ```
//!
//! `family` is either `{"zt": [..], "w": [[..]]}` (geometric) or
//! `{"phi": {"i,j": ..}, "psi": [[form]]}` (direct). Forms are objects
//! mapping basis labels (`"dzb1^dz2"`, `"1"`) to expressions; a bare string
//! is a function.

mod random;
mod run;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::bundle::{Christoffel, ConnectionData, EndoField, FormMatrix, ValuedForm};
use crate::coeff::{Chart, PolySeries, SeriesMatrix};
use crate::correspondence::CorrespondenceContext;
use crate::deform::{phi_from_trivialization, psi_from_transition, BeltramiField};
use crate::error::KernelError;
use crate::expr::{parse_expr, print_expr};
use crate::forms::{parse_label, Form, MultiIndex};

pub use random::{random_scenario, RandomParams};
pub use run::{run_batch, run_suites, Failure, Report, Status, SuiteReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{line}:{column}: {path}: {message} (near `{token}`)")]
    Expr { path: String, line: usize, column: usize, token: String, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("{path}: {source}")]
    Kernel { path: String, source: KernelError },
}

/// Verifier names; declaration order is name order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Coro1,
    ExtendBundle,
    ExtendNq,
    ExtendScalar,
    Lry,
    Mc,
    Nabla01,
    Pro2,
    Pro3,
    Pro4,
    SecondIntegrability,
    Thm1,
    Thm2,
}

impl Suite {
    pub const ALL: [Suite; 13] = [
        Suite::Coro1,
        Suite::ExtendBundle,
        Suite::ExtendNq,
        Suite::ExtendScalar,
        Suite::Lry,
        Suite::Mc,
        Suite::Nabla01,
        Suite::Pro2,
        Suite::Pro3,
        Suite::Pro4,
        Suite::SecondIntegrability,
        Suite::Thm1,
        Suite::Thm2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Coro1 => "coro1",
            Suite::ExtendBundle => "extend_bundle",
            Suite::ExtendNq => "extend_nq",
            Suite::ExtendScalar => "extend_scalar",
            Suite::Lry => "lry",
            Suite::Mc => "mc",
            Suite::Nabla01 => "nabla01",
            Suite::Pro2 => "pro2",
            Suite::Pro3 => "pro3",
            Suite::Pro4 => "pro4",
            Suite::SecondIntegrability => "second_integrability",
            Suite::Thm1 => "thm1",
            Suite::Thm2 => "thm2",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = ScenarioError;
    fn from_str(s: &str) -> Result<Self, ScenarioError> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| ScenarioError::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyInput {
    /// Holomorphic coordinates `z_t` and the frame transition `w`.
    Geometric { zt: Vec<PolySeries>, w: SeriesMatrix },
    Direct { phi: BeltramiField, psi: Option<EndoField> },
}

/// A named test form with its declared bidegree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestForm {
    pub p: usize,
    pub q: usize,
    pub value: ValuedForm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeformationScenario {
    pub chart: Chart,
    pub r: usize,
    pub connection: ConnectionData,
    pub family: FamilyInput,
    pub forms: BTreeMap<String, TestForm>,
    /// Empty means the applicable default set.
    pub suites: Vec<Suite>,
    pub seed: u64,
    phi: BeltramiField,
    psi: Option<EndoField>,
}

/// A parsed scenario and the truncation warnings raised on the way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedScenario {
    pub scenario: DeformationScenario,
    pub warnings: Vec<String>,
}

impl DeformationScenario {
    pub fn new(
        chart: Chart,
        r: usize,
        connection: ConnectionData,
        family: FamilyInput,
        forms: BTreeMap<String, TestForm>,
        suites: Vec<Suite>,
        seed: u64,
    ) -> Result<Self, ScenarioError> {
        let kernel = |path: &str| {
            let path = path.to_string();
            move |source| ScenarioError::Kernel { path, source }
        };
        let (phi, psi) = match &family {
            FamilyInput::Geometric { zt, w } => {
                for (k, z) in zt.iter().enumerate() {
                    if z.t_coeff(0) != PolySeries::z(chart, k).map_err(kernel("family.zt"))? {
                        return Err(invalid(&format!("family.zt[{}]", k + 1), format!("must equal z{} at t = 0", k + 1)));
                    }
                }
                if w.size() != r {
                    return Err(invalid("family.w", format!("expected a {r}x{r} matrix")));
                }
                let phi = phi_from_trivialization(zt).map_err(kernel("family.zt"))?;
                let psi = psi_from_transition(w, &connection, &phi).map_err(kernel("family.w"))?;
                (phi, Some(psi))
            }
            FamilyInput::Direct { phi, psi } => (phi.clone(), psi.clone()),
        };
        let s = DeformationScenario { chart, r, connection, family, forms, suites, seed, phi, psi };
        s.context().map_err(kernel("family"))?;
        Ok(s)
    }

    pub fn phi(&self) -> &BeltramiField {
        &self.phi
    }

    /// `ψ_E`: derived from `w` for geometric input.
    pub fn psi(&self) -> Option<&EndoField> {
        self.psi.as_ref()
    }

    pub fn psi_or_zero(&self) -> EndoField {
        self.psi.clone().unwrap_or_else(|| FormMatrix::zero(self.chart, self.r))
    }

    /// Frame transition; the identity for direct input.
    pub fn transition(&self) -> SeriesMatrix {
        match &self.family {
            FamilyInput::Geometric { w, .. } => w.clone(),
            FamilyInput::Direct { .. } => SeriesMatrix::identity(self.chart, self.r),
        }
    }

    pub fn context(&self) -> crate::Result<CorrespondenceContext> {
        CorrespondenceContext::new(self.connection.clone(), self.phi.clone(), self.psi.clone())
    }
}

fn invalid(path: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid { path: path.to_string(), message: message.into() }
}

/// Line and column (1-based) of a byte offset.
fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Byte offsets of the contents of every JSON string literal in `src`,
/// paired with the raw (still escaped) contents.
fn string_literals(src: &str) -> Vec<(usize, &str)> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'"' {
            let start = i + 1;
            let mut j = start;
            while j < bytes.len() && bytes[j] != b'"' {
                j += if bytes[j] == b'\\' { 2 } else { 1 };
            }
            out.push((start, &src[start..j.min(bytes.len())]));
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

struct Reader<'a> {
    src: &'a str,
    literals: Vec<(usize, &'a str)>,
    chart: Chart,
    r: usize,
    warnings: Vec<String>,
}

impl<'a> Reader<'a> {
    fn expr(&mut self, v: &Value, path: &str) -> Result<PolySeries, ScenarioError> {
        let text = v.as_str().ok_or_else(|| invalid(path, "expected an expression string"))?;
        match parse_expr(self.chart, text) {
            Ok(p) => {
                if p.truncated {
                    self.warnings.push(format!("{path}: terms beyond t^{} dropped", self.chart.order));
                }
                Ok(p.value)
            }
            Err(e) => {
                let base = self.literals.iter().find(|(_, raw)| *raw == text).map(|(at, _)| *at);
                let (line, column) = base.map_or((0, 0), |b| line_col(self.src, b + e.offset));
                Err(ScenarioError::Expr { path: path.to_string(), line, column, token: e.token, message: e.message })
            }
        }
    }

    fn form(&mut self, v: &Value, path: &str) -> Result<Form, ScenarioError> {
        match v {
            Value::String(_) => Ok(Form::scalar(self.expr(v, path)?)),
            Value::Object(map) => {
                let mut out = Form::zero(self.chart);
                for (label, e) in map {
                    let sub = format!("{path}.{label}");
                    let (sign, key) = parse_label(self.chart, label).map_err(|source| ScenarioError::Kernel { path: sub.clone(), source })?;
                    let c = self.expr(e, &sub)?;
                    out = &out + &Form::term(key, c.scale_int(sign));
                }
                Ok(out)
            }
            _ => Err(invalid(path, "expected a form (object of label: expression, or an expression)")),
        }
    }

    fn square<T>(&mut self, v: &Value, path: &str, size: usize, mut cell: impl FnMut(&mut Self, &Value, &str) -> Result<T, ScenarioError>) -> Result<Vec<Vec<T>>, ScenarioError> {
        let rows = v.as_array().filter(|a| a.len() == size).ok_or_else(|| invalid(path, format!("expected {size} rows")))?;
        let mut out = Vec::with_capacity(size);
        for (k, row) in rows.iter().enumerate() {
            let cells = row.as_array().filter(|a| a.len() == size).ok_or_else(|| invalid(&format!("{path}[{}]", k + 1), format!("expected {size} entries")))?;
            let mut parsed = Vec::with_capacity(size);
            for (l, c) in cells.iter().enumerate() {
                parsed.push(cell(self, c, &format!("{path}[{}][{}]", k + 1, l + 1))?);
            }
            out.push(parsed);
        }
        Ok(out)
    }

    fn form_matrix(&mut self, v: &Value, path: &str) -> Result<FormMatrix, ScenarioError> {
        let rows = self.square(v, path, self.r, |s, c, p| s.form(c, p))?;
        FormMatrix::from_rows(self.chart, rows).map_err(|source| ScenarioError::Kernel { path: path.to_string(), source })
    }
}

fn indices(key: &str, count: usize, bound: usize, path: &str) -> Result<Vec<usize>, ScenarioError> {
    let parts: Vec<Option<usize>> = key.split(',').map(|p| p.trim().parse::<usize>().ok().filter(|&v| (1..=bound).contains(&v))).collect();
    if parts.len() != count || parts.iter().any(Option::is_none) {
        return Err(invalid(&format!("{path}.{key}"), format!("expected {count} comma-separated indices in 1..={bound}")));
    }
    Ok(parts.into_iter().map(|p| p.unwrap() - 1).collect())
}

fn object<'v>(v: &'v Value, path: &str, allowed: &[&str]) -> Result<&'v Map<String, Value>, ScenarioError> {
    let map = v.as_object().ok_or_else(|| invalid(path, "expected an object"))?;
    if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(invalid(path, format!("unknown field `{k}`")));
    }
    Ok(map)
}

fn uint(map: &Map<String, Value>, key: &str) -> Result<Option<u64>, ScenarioError> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v.as_u64().map(Some).ok_or_else(|| invalid(key, "expected a non-negative integer")),
    }
}

/// Parses and validates a scenario.
pub fn parse_scenario(text: &str) -> Result<ParsedScenario, ScenarioError> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| ScenarioError::Syntax { line: e.line(), column: e.column(), message: e.to_string() })?;
    let top = object(&root, "scenario", &["n", "r", "N", "connection", "family", "forms", "suites", "seed"])?;
    let n = uint(top, "n")?.ok_or_else(|| invalid("n", "missing"))? as usize;
    let order = uint(top, "N")?.ok_or_else(|| invalid("N", "missing"))? as usize;
    let r = uint(top, "r")?.unwrap_or(1) as usize;
    if r == 0 {
        return Err(invalid("r", "rank must be positive"));
    }
    let chart = Chart::new(n, order).map_err(|source| ScenarioError::Kernel { path: "n".into(), source })?;
    let mut rd = Reader { src: text, literals: string_literals(text), chart, r, warnings: Vec::new() };

    let mut connection = ConnectionData::flat(chart, r);
    if let Some(c) = top.get("connection") {
        let c = object(c, "connection", &["theta", "gamma"])?;
        if let Some(t) = c.get("theta") {
            let theta = rd.form_matrix(t, "connection.theta")?;
            if !theta.is_homogeneous_of(1, 0) {
                return Err(invalid("connection.theta", "entries must be (1,0)-forms"));
            }
            connection.theta = Some(theta);
        }
        if let Some(g) = c.get("gamma") {
            let g = g.as_object().ok_or_else(|| invalid("connection.gamma", "expected an object"))?;
            let mut gamma = Christoffel::zero(chart);
            for (key, e) in g {
                let ix = indices(key, 3, n, "connection.gamma")?;
                let v = rd.expr(e, &format!("connection.gamma.{key}"))?;
                gamma.set(ix[0], ix[1], ix[2], &gamma.get(ix[0], ix[1], ix[2]).clone() + &v);
            }
            connection.gamma = Some(gamma);
        }
    }

    let fam = top.get("family").ok_or_else(|| invalid("family", "missing"))?;
    let fam = object(fam, "family", &["zt", "w", "phi", "psi"])?;
    let family = if let Some(zt) = fam.get("zt") {
        if fam.contains_key("phi") || fam.contains_key("psi") {
            return Err(invalid("family", "give either zt/w or phi/psi"));
        }
        let items = zt.as_array().filter(|a| a.len() == n).ok_or_else(|| invalid("family.zt", format!("expected {n} expressions")))?;
        let mut coords = Vec::with_capacity(n);
        for (k, e) in items.iter().enumerate() {
            coords.push(rd.expr(e, &format!("family.zt[{}]", k + 1))?);
        }
        let w = match fam.get("w") {
            None => SeriesMatrix::identity(chart, r),
            Some(w) => {
                let rows = rd.square(w, "family.w", r, |s, c, p| s.expr(c, p))?;
                SeriesMatrix::from_rows(chart, rows).map_err(|source| ScenarioError::Kernel { path: "family.w".into(), source })?
            }
        };
        if !w.is_identity_at_t0() {
            return Err(invalid("family.w", "must be the identity at t = 0"));
        }
        FamilyInput::Geometric { zt: coords, w }
    } else if let Some(phi) = fam.get("phi") {
        if fam.contains_key("w") {
            return Err(invalid("family", "give either zt/w or phi/psi"));
        }
        let map = phi.as_object().ok_or_else(|| invalid("family.phi", "expected an object"))?;
        let mut coeffs = Vec::new();
        for (key, e) in map {
            let ix = indices(key, 2, n, "family.phi")?;
            coeffs.push((ix[0], MultiIndex::single(ix[1]), rd.expr(e, &format!("family.phi.{key}"))?));
        }
        let phi = BeltramiField::from_coeffs(chart, 1, coeffs).map_err(|source| ScenarioError::Kernel { path: "family.phi".into(), source })?;
        let psi = match fam.get("psi") {
            None => None,
            Some(v) => {
                let m = rd.form_matrix(v, "family.psi")?;
                if !m.is_homogeneous_of(0, 1) {
                    return Err(invalid("family.psi", "entries must be (0,1)-forms"));
                }
                Some(m)
            }
        };
        FamilyInput::Direct { phi, psi }
    } else {
        return Err(invalid("family", "expected zt or phi"));
    };

    let mut forms = BTreeMap::new();
    if let Some(fs) = top.get("forms") {
        let fs = fs.as_object().ok_or_else(|| invalid("forms", "expected an object"))?;
        for (name, spec) in fs {
            let path = format!("forms.{name}");
            let spec = object(spec, &path, &["bidegree", "word", "value"])?;
            let bd = spec
                .get("bidegree")
                .and_then(Value::as_array)
                .filter(|a| a.len() == 2)
                .and_then(|a| Some((a[0].as_u64()? as usize, a[1].as_u64()? as usize)))
                .ok_or_else(|| invalid(&format!("{path}.bidegree"), "expected [p, q]"))?;
            let (p, q) = bd;
            if p > n || q > n {
                return Err(invalid(&format!("{path}.bidegree"), format!("degrees must be at most {n}")));
            }
            let word = spec.get("word").map_or(Some("scalar"), Value::as_str);
            let raw = spec.get("value").ok_or_else(|| invalid(&format!("{path}.value"), "missing"))?;
            let vpath = format!("{path}.value");
            let value = match word {
                Some("scalar") => ValuedForm::scalar(rd.form(raw, &vpath)?),
                Some("E") => {
                    let items = raw.as_array().filter(|a| a.len() == r).ok_or_else(|| invalid(&vpath, format!("expected {r} forms")))?;
                    let mut comps = Vec::with_capacity(r);
                    for (k, f) in items.iter().enumerate() {
                        comps.push(rd.form(f, &format!("{vpath}[{}]", k + 1))?);
                    }
                    ValuedForm::e_valued(comps).map_err(|source| ScenarioError::Kernel { path: vpath.clone(), source })?
                }
                _ => return Err(invalid(&format!("{path}.word"), "expected \"scalar\" or \"E\"")),
            };
            if !value.is_homogeneous_of(p, q) {
                return Err(invalid(&vpath, format!("not of declared bidegree ({p},{q})")));
            }
            forms.insert(name.clone(), TestForm { p, q, value });
        }
    }

    let mut suites = Vec::new();
    if let Some(s) = top.get("suites") {
        let items = s.as_array().ok_or_else(|| invalid("suites", "expected an array of names"))?;
        for item in items {
            let name = item.as_str().ok_or_else(|| invalid("suites", "expected an array of names"))?;
            let suite: Suite = name.parse()?;
            if !suites.contains(&suite) {
                suites.push(suite);
            }
        }
        suites.sort();
    }
    let seed = uint(top, "seed")?.unwrap_or(0);
    let warnings = std::mem::take(&mut rd.warnings);
    let scenario = DeformationScenario::new(chart, r, connection, family, forms, suites, seed)?;
    Ok(ParsedScenario { scenario, warnings })
}

fn form_json(f: &Form) -> Value {
    let mut m = Map::new();
    for (k, c) in f.terms() {
        m.insert(k.label(), Value::String(print_expr(c)));
    }
    Value::Object(m)
}

fn matrix_json(m: &FormMatrix) -> Value {
    Value::Array(m.rows().iter().map(|row| Value::Array(row.iter().map(form_json).collect())).collect())
}

/// Canonical scenario text; [`parse_scenario`] reads it back to an equal value.
pub fn print_scenario(s: &DeformationScenario) -> String {
    let n = s.chart.dim;
    let mut conn = Map::new();
    if let Some(t) = &s.connection.theta {
        conn.insert("theta".into(), matrix_json(t));
    }
    if let Some(g) = &s.connection.gamma {
        let mut m = Map::new();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let v = g.get(k, i, j);
                    if !v.is_zero() {
                        m.insert(format!("{},{},{}", k + 1, i + 1, j + 1), Value::String(print_expr(v)));
                    }
                }
            }
        }
        conn.insert("gamma".into(), Value::Object(m));
    }
    let family = match &s.family {
        FamilyInput::Geometric { zt, w } => json!({
            "zt": zt.iter().map(|z| Value::String(print_expr(z))).collect::<Vec<_>>(),
            "w": w.rows().iter().map(|row| row.iter().map(|e| Value::String(print_expr(e))).collect::<Vec<_>>()).collect::<Vec<_>>(),
        }),
        FamilyInput::Direct { phi, psi } => {
            let mut m = Map::new();
            for (i, comp) in phi.components().iter().enumerate() {
                for (k, c) in comp.terms() {
                    let j = k.dzb.entries().next().expect("(0,1) component");
                    m.insert(format!("{},{}", i + 1, j + 1), Value::String(print_expr(c)));
                }
            }
            let mut out = Map::new();
            out.insert("phi".into(), Value::Object(m));
            if let Some(p) = psi {
                out.insert("psi".into(), matrix_json(p));
            }
            Value::Object(out)
        }
    };
    let mut forms = Map::new();
    for (name, f) in &s.forms {
        let (word, value) = if f.value.word().is_empty() {
            ("scalar", form_json(&f.value.component_at(&[])))
        } else {
            ("E", Value::Array((0..s.r).map(|k| form_json(&f.value.component_at(&[k as u16]))).collect()))
        };
        forms.insert(name.clone(), json!({ "bidegree": [f.p, f.q], "word": word, "value": value }));
    }
    let mut top = Map::new();
    top.insert("n".into(), json!(n));
    top.insert("r".into(), json!(s.r));
    top.insert("N".into(), json!(s.chart.order));
    top.insert("connection".into(), Value::Object(conn));
    top.insert("family".into(), family);
    top.insert("forms".into(), Value::Object(forms));
    top.insert("suites".into(), json!(s.suites.iter().map(|x| x.name()).collect::<Vec<_>>()));
    top.insert("seed".into(), json!(s.seed));
    let mut text = serde_json::to_string_pretty(&Value::Object(top)).expect("serializable");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal() {
        let p = parse_scenario(r#"{"n":1, "r":1, "N":2, "family":{"phi":{"1,1":"t"}}, "suites":["mc"]}"#).unwrap();
        assert!(p.warnings.is_empty());
        assert_eq!(p.scenario.suites, vec![Suite::Mc]);
        let c = Chart::new(1, 2).unwrap();
        let want = BeltramiField::from_components(c, 1, vec![Form::dzb(c, 0).unwrap().mul_scalar(&PolySeries::t(c))]).unwrap();
        assert_eq!(p.scenario.phi(), &want);
    }

    #[test]
    fn axis_error_has_location() {
        let text = "{\"n\": 2, \"N\": 2,\n  \"family\": {\"phi\": {\"1,1\": \"t*zb3\"}}}";
        match parse_scenario(text).unwrap_err() {
            ScenarioError::Expr { line, column, token, .. } => {
                assert_eq!((line, column, token.as_str()), (2, 32, "zb3"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn truncation_warns() {
        let p = parse_scenario(r#"{"n":1, "N":2, "family":{"phi":{"1,1":"t + t^3"}}}"#).unwrap();
        assert_eq!(p.warnings.len(), 1);
        assert!(p.warnings[0].starts_with("family.phi.1,1"));
    }

    #[test]
    fn rejections() {
        let bad = [
            r#"{"n":1, "N":2}"#,
            r#"{"n":1, "N":2, "family":{"phi":{"2,1":"t"}}}"#,
            r#"{"n":1, "N":2, "family":{"phi":{"1,1":"t"}}, "suites":["nope"]}"#,
            r#"{"n":1, "N":2, "family":{"zt":["z1 + 1"]}}"#,
            r#"{"n":1, "N":2, "family":{"zt":["z1"], "w":[["2"]]}}"#,
            r#"{"n":1, "N":2, "family":{"phi":{}}, "forms":{"s":{"bidegree":[1,0], "value":"z1"}}}"#,
            r#"{"n":1, "N":2, "family":{"phi":{}}, "extra": 1}"#,
            r#"{"n":1, "N":2, "family":{"phi":{}}, "connection":{"theta":[[{"dzb1":"1"}]]}}"#,
            r#"{"n":1, "N":2, "family":{"phi":{}"#,
        ];
        for b in bad {
            assert!(parse_scenario(b).is_err(), "{b}");
        }
        assert!(matches!(parse_scenario(bad[2]), Err(ScenarioError::UnknownSuite(_))));
        assert!(matches!(parse_scenario(bad[8]), Err(ScenarioError::Syntax { .. })));
    }

    #[test]
    fn round_trip() {
        let text = r#"{
            "n": 2, "r": 2, "N": 2,
            "connection": {"theta": [[{"dz1": "zb2"}, {}], [{}, {"dz2": "1/2*z1"}]], "gamma": {"1,2,1": "zb1 - i"}},
            "family": {"zt": ["z1 + t*zb1", "z2"], "w": [["1 + t*zb2", "0"], ["t", "1"]]},
            "forms": {
                "s": {"bidegree": [1, 1], "word": "scalar", "value": {"dz1^dzb2": "z1", "dzb1^dz2": "3"}},
                "e": {"bidegree": [0, 0], "word": "E", "value": ["z2", {"1": "zb1"}]}
            },
            "suites": ["thm1", "lry"],
            "seed": 9
        }"#;
        let a = parse_scenario(text).unwrap().scenario;
        let printed = print_scenario(&a);
        let b = parse_scenario(&printed).unwrap().scenario;
        assert_eq!(a, b);
        assert_eq!(print_scenario(&b), printed);
        assert_eq!(a.suites, vec![Suite::Lry, Suite::Thm1]);
    }
}
