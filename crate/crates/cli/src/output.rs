//! The report printed by every command.

use std::fmt::Write;

use cpkit::CheckReport;
use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    /// `None` for informational values that are not compared to anything.
    pub eps: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub pass: bool,
    pub residuals: Vec<Residual>,
    pub details: Map<String, Value>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            command: command.into(),
            pass: true,
            residuals: Vec::new(),
            details: Map::new(),
        }
    }

    /// Records `value` against `eps`; exceeding it fails the report.
    pub fn check(&mut self, name: impl Into<String>, value: f64, eps: f64) {
        self.pass &= value <= eps;
        self.residuals.push(Residual {
            name: name.into(),
            value,
            eps: Some(eps),
        });
    }

    pub fn info(&mut self, name: impl Into<String>, value: f64) {
        self.residuals.push(Residual {
            name: name.into(),
            value,
            eps: None,
        });
    }

    pub fn detail(&mut self, key: &str, value: impl Into<Value>) {
        self.details.insert(key.to_string(), value.into());
    }

    pub fn fail(&mut self) {
        self.pass = false;
    }

    /// Folds a checker report in: residual entries become residuals, boolean
    /// entries and coverage notes go to `details`.
    pub fn absorb(&mut self, report: &CheckReport) {
        let mut outcomes = Vec::new();
        for e in &report.entries {
            self.pass &= e.pass;
            match e.residual {
                Some(value) => self.residuals.push(Residual {
                    name: e.name.clone(),
                    value,
                    eps: e.eps,
                }),
                None => outcomes.push(json!({ "name": e.name, "pass": e.pass, "detail": e.detail })),
            }
        }
        let failures: Vec<&str> = report.failures().iter().map(|e| e.name.as_str()).collect();
        self.detail("outcomes", outcomes);
        self.detail("failures", failures);
        self.detail("coverage", report.coverage.clone());
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{}: {verdict}", self.command);
        if !self.residuals.is_empty() {
            let width = self.residuals.iter().map(|r| r.name.len()).max().unwrap_or(0).max(8);
            let _ = writeln!(out, "  {:<width$}  {:>12}  {:>9}", "check", "value", "eps");
            for r in &self.residuals {
                let (eps, mark) = match r.eps {
                    Some(eps) => (format!("{eps:.1e}"), if r.value <= eps { "ok" } else { "FAIL" }),
                    None => ("-".to_string(), ""),
                };
                let _ = writeln!(out, "  {:<width$}  {:>12.4e}  {eps:>9}  {mark}", r.name, r.value);
            }
        }
        for (key, value) in &self.details {
            render_detail(&mut out, key, value);
        }
        out
    }
}

fn is_complex(v: &Value) -> bool {
    matches!(v, Value::Array(p) if p.len() == 2 && p.iter().all(Value::is_number))
}

fn complex_text(v: &Value) -> String {
    let re = v[0].as_f64().unwrap_or(f64::NAN);
    let im = v[1].as_f64().unwrap_or(f64::NAN);
    if im == 0.0 {
        format!("{re:>10.6}")
    } else {
        format!("{re:>10.6}{im:+.6}i")
    }
}

fn is_matrix(v: &Value) -> bool {
    match v {
        Value::Array(rows) => {
            !rows.is_empty()
                && rows
                    .iter()
                    .all(|r| matches!(r, Value::Array(cells) if !cells.is_empty() && cells.iter().all(is_complex)))
        }
        _ => false,
    }
}

fn render_detail(out: &mut String, key: &str, value: &Value) {
    match value {
        Value::Array(items) if items.is_empty() => {}
        v if is_matrix(v) => {
            let _ = writeln!(out, "{key}:");
            for row in v.as_array().unwrap() {
                let cells: Vec<String> = row.as_array().unwrap().iter().map(complex_text).collect();
                let _ = writeln!(out, "  {}", cells.join("  "));
            }
        }
        Value::Array(items) if items.iter().all(|i| i.is_string()) => {
            let _ = writeln!(out, "{key}:");
            for i in items {
                let _ = writeln!(out, "  {}", i.as_str().unwrap());
            }
        }
        Value::Array(items) if items.iter().all(|i| i.get("name").is_some() && i.get("pass").is_some()) => {
            let _ = writeln!(out, "{key}:");
            for i in items {
                let mark = if i["pass"].as_bool() == Some(true) {
                    "ok  "
                } else {
                    "FAIL"
                };
                let _ = write!(out, "  {mark} {}", i["name"].as_str().unwrap_or_default());
                if let Some(d) = i.get("detail").and_then(Value::as_str) {
                    let _ = write!(out, " ({d})");
                }
                let _ = writeln!(out);
            }
        }
        Value::Object(map) if map.contains_key("kraus") => {
            let _ = writeln!(out, "{key}:");
            for (k, v) in map {
                if k == "kraus" {
                    for (x, slice) in v.as_array().into_iter().flatten().enumerate() {
                        render_detail(out, &format!("  kraus[{x}]"), slice);
                    }
                } else {
                    let _ = writeln!(out, "  {k}: {v}");
                }
            }
        }
        other => {
            let _ = writeln!(out, "{key}: {other}");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cpkit::CheckEntry;

    #[test]
    fn checks_drive_the_verdict() {
        let mut r = Report::new("demo");
        r.check("a", 1e-12, 1e-9);
        r.info("b", -3.0);
        assert!(r.pass);
        r.check("c", 1.0, 1e-9);
        assert!(!r.pass);
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn absorbed_reports_split_residuals_and_outcomes() {
        let mut c = CheckReport::new();
        c.push(CheckEntry::residual("x", 0.5, 1.0));
        c.push(CheckEntry::outcome("y", false).with_detail("why"));
        c.note("2 samples");
        let mut r = Report::new("demo");
        r.absorb(&c);
        assert!(!r.pass);
        assert_eq!(r.residuals.len(), 1);
        assert_eq!(r.details["failures"], json!(["y"]));
        assert_eq!(r.details["outcomes"][0]["detail"], json!("why"));
    }

    #[test]
    fn json_schema_keys() {
        let mut r = Report::new("demo");
        r.check("a", 0.0, 1e-9);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["command", "details", "pass", "residuals"]);
        assert_eq!(v["residuals"][0], json!({"name": "a", "value": 0.0, "eps": 1e-9}));
    }

    #[test]
    fn text_renders_matrices() {
        let mut r = Report::new("demo");
        r.detail("m", json!([[[1.0, 0.0], [0.0, 2.0]]]));
        let text = r.to_text();
        assert!(text.contains("demo: PASS"));
        assert!(text.contains("1.000000") && text.contains("+2.000000i"), "{text}");
    }
}
