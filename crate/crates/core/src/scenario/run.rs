use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{DeformationScenario, Suite};
use crate::bundle::{FormMatrix, ValuedForm};
use crate::correspondence::{
    contracted_curvature, coro1_residual, identity_lry, identity_nabla01, identity_pro2, identity_pro4, identity_thm1,
    identity_thm2, require_flat, CorrespondenceContext,
};
use crate::deform::{contract, integrability_check, mc_residual, second_residual};
use crate::exec::Execution;
use crate::extension::{extend_bundle, extend_nq, extend_scalar, DeformationFamily, ExtensionReport};
use crate::random::{self, Shape};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// A precondition of the suite does not hold for this scenario.
    Refused,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Refused => "refused",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub check: String,
    pub residual: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub status: Status,
    pub checks: usize,
    pub failures: Vec<Failure>,
    pub notes: Vec<String>,
    /// Named results, e.g. extended forms.
    pub outputs: BTreeMap<String, String>,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.status == Status::Pass)
    }

    /// Machine-readable report. Timings are left out so equal inputs give
    /// byte-identical output.
    pub fn to_json_value(&self) -> Value {
        let suites: Vec<Value> = self
            .suites
            .iter()
            .map(|s| {
                json!({
                    "name": s.suite.name(),
                    "status": s.status.name(),
                    "checks": s.checks,
                    "failures": s.failures.iter().map(|f| json!({"check": f.check, "residual": f.residual})).collect::<Vec<_>>(),
                    "notes": s.notes,
                    "outputs": s.outputs,
                })
            })
            .collect();
        json!({ "seed": self.seed, "passed": self.passed(), "suites": suites })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("serializable");
        s.push('\n');
        s
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            let tag = match s.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Refused => "REFUSED",
            };
            let _ = writeln!(out, "{tag:<7} {:<20} {:>4} checks  {:>9.1} ms", s.suite.name(), s.checks, s.elapsed.as_secs_f64() * 1e3);
            for n in &s.notes {
                let _ = writeln!(out, "        note: {n}");
            }
            for (k, v) in &s.outputs {
                let _ = writeln!(out, "        {k} = {v}");
            }
            for f in &s.failures {
                let _ = writeln!(out, "        {}: residual {}", f.check, f.residual);
            }
        }
        out
    }
}

fn matrix_text(m: &FormMatrix) -> String {
    let rows: Vec<String> = m.rows().iter().map(|r| format!("[{}]", r.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(", "))).collect();
    format!("[{}]", rows.join(", "))
}

#[derive(Default)]
struct Acc {
    checks: usize,
    failures: Vec<Failure>,
    notes: Vec<String>,
    outputs: BTreeMap<String, String>,
    refused: bool,
}

impl Acc {
    /// `outcome` is `None` when the residual vanishes.
    fn record(&mut self, check: impl Into<String>, outcome: Result<Option<String>>) {
        self.checks += 1;
        let residual = match outcome {
            Ok(None) => return,
            Ok(Some(r)) => r,
            Err(e) => format!("error: {e}"),
        };
        self.failures.push(Failure { check: check.into(), residual });
    }

    fn valued(&mut self, check: impl Into<String>, r: Result<ValuedForm>) {
        self.record(check, r.map(|v| (!v.is_zero()).then(|| v.to_string())));
    }

    fn refuse(&mut self, reason: impl Into<String>) {
        self.refused = true;
        self.notes.push(reason.into());
    }
}

const FORM_SHAPE: Shape = Shape { degree: 2, terms: 2 };

struct Cases {
    scalar: Vec<(String, usize, usize, ValuedForm)>,
    bundle: Vec<(String, usize, usize, ValuedForm)>,
}

/// Declared forms followed by seeded random forms on the full `(p,q)` grid.
fn cases(s: &DeformationScenario, suite: Suite, closed: bool) -> Cases {
    let chart = s.chart;
    let n = chart.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ suite as u64);
    let mut gen = |p, q| if closed { random::closed_form(&mut rng, chart, p, q, FORM_SHAPE) } else { random::form(&mut rng, chart, p, q, FORM_SHAPE) };
    let mut scalar = Vec::new();
    let mut bundle = Vec::new();
    for (name, f) in &s.forms {
        let item = (name.clone(), f.p, f.q, f.value.clone());
        if f.value.word().is_empty() {
            scalar.push(item);
        } else {
            bundle.push(item);
        }
    }
    for p in 0..=n {
        for q in 0..=n {
            scalar.push((format!("random ({p},{q})"), p, q, ValuedForm::scalar(gen(p, q))));
            let comps = (0..s.r).map(|_| gen(p, q)).collect();
            bundle.push((format!("random E ({p},{q})"), p, q, ValuedForm::e_valued(comps).expect("nonzero rank")));
        }
    }
    Cases { scalar, bundle }
}

fn on_shell(ctx: &CorrespondenceContext) -> Result<bool> {
    Ok(mc_residual(&ctx.phi)?.is_zero())
}

/// Suites whose preconditions hold for `s`.
pub fn default_suites(s: &DeformationScenario) -> Vec<Suite> {
    let ctx = s.context().ok();
    let shell = ctx.as_ref().is_some_and(|c| on_shell(c).unwrap_or(false));
    let flat = require_flat(&s.connection).is_ok();
    let centered = DeformationFamily::from_series(s.phi().clone(), s.psi().cloned()).is_ok();
    Suite::ALL
        .into_iter()
        .filter(|x| match x {
            Suite::Pro4 => shell && flat,
            Suite::SecondIntegrability => flat,
            Suite::Coro1 => s.r == 1 && flat,
            Suite::ExtendScalar | Suite::ExtendBundle | Suite::ExtendNq => shell && centered,
            _ => true,
        })
        .collect()
}

fn extension_outcome(r: Result<ExtensionReport>) -> Result<Option<String>> {
    let r = r?;
    Ok((!r.residual_is_zero()).then(|| r.residual.to_string()))
}

fn sigma_text(r: &ExtensionReport) -> String {
    if r.sigma.word().is_empty() {
        r.sigma.component_at(&[]).to_string()
    } else {
        r.sigma.to_string()
    }
}

fn run_one(s: &DeformationScenario, suite: Suite) -> SuiteReport {
    let start = Instant::now();
    let mut acc = Acc::default();
    match s.context() {
        Ok(ctx) => body(s, &ctx, suite, &mut acc),
        Err(e) => acc.refuse(e.to_string()),
    }
    let status = if acc.refused {
        Status::Refused
    } else if acc.failures.is_empty() {
        Status::Pass
    } else {
        Status::Fail
    };
    SuiteReport { suite, status, checks: acc.checks, failures: acc.failures, notes: acc.notes, outputs: acc.outputs, elapsed: start.elapsed() }
}

fn body(s: &DeformationScenario, ctx: &CorrespondenceContext, suite: Suite, acc: &mut Acc) {
    let n = s.chart.dim;
    let order = s.chart.order;
    match suite {
        Suite::Mc => acc.record("phi", mc_residual(&ctx.phi).map(|m| (!m.is_zero()).then(|| m.to_string()))),
        Suite::SecondIntegrability => {
            if let Err(e) = require_flat(&ctx.conn) {
                return acc.refuse(e.to_string());
            }
            acc.record("psi", second_residual(&ctx.conn, &ctx.phi, &s.psi_or_zero()).map(|m| (!m.is_zero()).then(|| matrix_text(&m))))
        }
        Suite::Pro3 => acc.record(
            "frame",
            integrability_check(&s.transition(), &ctx.conn, &ctx.phi, &s.psi_or_zero()).map(|r| (!r.holds).then(|| r.witness.to_string())),
        ),
        Suite::Lry => {
            let c = cases(s, suite, false);
            for (label, _, _, f) in c.scalar.iter().chain(&c.bundle) {
                acc.valued(label.clone(), identity_lry(ctx, f));
            }
        }
        Suite::Thm1 => {
            for (label, p, q, f) in cases(s, suite, false).scalar {
                acc.valued(label, identity_thm1(ctx, &f.component_at(&[]), p, q));
            }
        }
        Suite::Thm2 => {
            for (label, p, q, f) in cases(s, suite, false).bundle {
                acc.valued(label, identity_thm2(ctx, &f, p, q));
            }
        }
        Suite::Nabla01 => {
            let c = cases(s, suite, false);
            for (label, p, q, f) in c.scalar.into_iter().chain(c.bundle) {
                acc.valued(label, identity_nabla01(ctx, &f, p, q));
            }
        }
        Suite::Pro2 => {
            let defect = match mc_residual(&ctx.phi) {
                Ok(d) => d,
                Err(e) => return acc.refuse(e.to_string()),
            };
            if !defect.is_zero() {
                acc.notes.push("phi is off-shell; residuals compared against the Maurer-Cartan defect term".into());
            }
            for (label, _, _, f) in cases(s, suite, false).bundle.into_iter().filter(|c| c.1 == n) {
                acc.valued(label, identity_pro2(ctx, &f).map(|r| &r - &contract(&defect, &f)));
            }
        }
        Suite::Pro4 => {
            match on_shell(ctx) {
                Ok(true) => {}
                Ok(false) => return acc.refuse("phi does not satisfy the Maurer-Cartan equation"),
                Err(e) => return acc.refuse(e.to_string()),
            }
            if let Err(e) = require_flat(&ctx.conn) {
                return acc.refuse(e.to_string());
            }
            if contracted_curvature(ctx).map_or(true, |m| m.is_zero()) {
                acc.notes.push("i_phi Theta vanishes; the bundle checks are vacuous".into());
            }
            let c = cases(s, suite, false);
            for (label, _, _, f) in c.scalar.iter().chain(&c.bundle) {
                acc.valued(label.clone(), identity_pro4(ctx, f));
            }
        }
        Suite::Coro1 => {
            if s.r != 1 {
                return acc.refuse(format!("requires a line bundle, r = {}", s.r));
            }
            if let Err(e) = require_flat(&ctx.conn) {
                return acc.refuse(e.to_string());
            }
            acc.record("psi", coro1_residual(ctx).map(|f| (!f.is_zero()).then(|| f.to_string())));
        }
        Suite::ExtendScalar | Suite::ExtendBundle | Suite::ExtendNq => {
            match on_shell(ctx) {
                Ok(true) => {}
                Ok(false) => return acc.refuse("phi does not satisfy the Maurer-Cartan equation"),
                Err(e) => return acc.refuse(e.to_string()),
            }
            let family = match DeformationFamily::from_series(ctx.phi.clone(), s.psi().cloned()) {
                Ok(f) => f,
                Err(e) => return acc.refuse(e.to_string()),
            };
            let c = cases(s, suite, true);
            let items: Vec<_> = match suite {
                Suite::ExtendBundle => c.bundle,
                Suite::ExtendNq => c.scalar.into_iter().filter(|x| x.1 == n).collect(),
                _ => c.scalar,
            };
            for (label, _, _, f) in items {
                let declared = s.forms.contains_key(&label);
                let closed = f.map_forms(crate::forms::Form::dbar).is_zero();
                let t_free = f.t_coeff(0) == f;
                if declared && !(closed && t_free) {
                    acc.notes.push(format!("{label}: skipped, not a t-free dbar-closed form"));
                    continue;
                }
                let report = match suite {
                    Suite::ExtendBundle => extend_bundle(&family, &ctx.conn, &f, order),
                    Suite::ExtendNq => extend_nq(&family, &f.component_at(&[]), order),
                    _ => extend_scalar(&family, &f.component_at(&[]), order),
                };
                if declared {
                    if let Ok(r) = &report {
                        acc.outputs.insert(format!("{label}(t)"), sigma_text(r));
                    }
                }
                acc.record(label, extension_outcome(report));
            }
        }
    }
}

/// Runs the scenario's suites (or the applicable defaults), sorted by name.
pub fn run_suites(s: &DeformationScenario, exec: Execution) -> Report {
    let mut suites = if s.suites.is_empty() { default_suites(s) } else { s.suites.clone() };
    suites.sort();
    suites.dedup();
    let mut reports = exec.map(suites, |x| run_one(s, x));
    reports.sort_by_key(|r| r.suite);
    Report { seed: s.seed, suites: reports }
}

/// Runs many scenarios; each scenario's suites run sequentially.
pub fn run_batch(scenarios: &[DeformationScenario], exec: Execution) -> Vec<Report> {
    exec.map(scenarios.iter().collect(), |s| run_suites(s, Execution::Sequential))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    fn run(text: &str) -> Report {
        run_suites(&parse_scenario(text).unwrap().scenario, Execution::Sequential)
    }

    #[test]
    fn phi_zero_all_pass() {
        let r = run(r#"{"n": 2, "r": 2, "N": 2, "connection": {"theta": [[{"dz1": "zb2"}, {}], [{}, {}]], "gamma": {"1,1,2": "z1*zb1"}}, "family": {"phi": {}}}"#);
        assert!(r.passed(), "{}", r.render_text());
        let names: Vec<_> = r.suites.iter().map(|s| s.suite).collect();
        assert!(names.contains(&Suite::Lry) && names.contains(&Suite::Thm2));
        assert!(!names.contains(&Suite::Coro1));
    }

    #[test]
    fn worked_extension() {
        let r = run(r#"{"n": 1, "N": 3, "family": {"phi": {"1,1": "t"}},
            "forms": {"s": {"bidegree": [1, 0], "value": {"dz1": "z1"}}}, "suites": ["extend_scalar"]}"#);
        assert!(r.passed(), "{}", r.render_text());
        assert_eq!(r.suites[0].outputs["s(t)"], "(z1 + t*zb1)*dz1");
    }

    #[test]
    fn corrupted_psi_fails_pro3() {
        let text = r#"{"n": 1, "N": 2, "connection": {"theta": [[{"dz1": "zb1"}]]},
            "family": {"phi": {"1,1": "t"}, "psi": [[{"dzb1": "t"}]]}, "suites": ["pro3"]}"#;
        let r = run(text);
        assert_eq!(r.suites[0].status, Status::Fail);
        assert!(!r.suites[0].failures[0].residual.is_empty());
        let ok = run(&text.replace("\"t\"}]]", "\"t*zb1\"}]]"));
        assert!(ok.passed(), "{}", ok.render_text());
    }

    #[test]
    fn refusals() {
        let r = run(r#"{"n": 2, "r": 2, "N": 2, "family": {"phi": {"1,1": "t*zb2"}}, "suites": ["pro4", "coro1", "extend_scalar"]}"#);
        assert!(r.suites.iter().all(|s| s.status == Status::Refused), "{}", r.render_text());
    }

    #[test]
    fn json_is_deterministic() {
        let text = r#"{"n": 2, "N": 2, "family": {"zt": ["z1 + t*zb2", "z2 + t^2*z1*zb1"]}, "seed": 3}"#;
        let a = run(text);
        let b = run_suites(&parse_scenario(text).unwrap().scenario, Execution::Parallel);
        assert!(a.passed(), "{}", a.render_text());
        assert_eq!(a.to_json(), b.to_json());
    }
}
