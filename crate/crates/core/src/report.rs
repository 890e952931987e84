use std::fmt;

use serde::Serialize;

/// One named check: a residual compared against a threshold, or a plain
/// boolean outcome (`residual` is then `None`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub pass: bool,
    pub residual: Option<f64>,
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckEntry {
    pub fn residual(name: impl Into<String>, residual: f64, eps: f64) -> Self {
        CheckEntry {
            name: name.into(),
            pass: residual <= eps,
            residual: Some(residual),
            eps: Some(eps),
            detail: None,
        }
    }

    pub fn outcome(name: impl Into<String>, pass: bool) -> Self {
        CheckEntry {
            name: name.into(),
            pass,
            residual: None,
            eps: None,
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// Ordered list of check entries plus a note on what was sampled.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CheckReport {
    pub entries: Vec<CheckEntry>,
    /// Finite-sample statements say how many cases they covered.
    pub coverage: Vec<String>,
}

impl CheckReport {
    pub fn new() -> Self {
        CheckReport::default()
    }

    pub fn push(&mut self, entry: CheckEntry) {
        self.entries.push(entry);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.coverage.push(line.into());
    }

    pub fn extend(&mut self, other: CheckReport) {
        self.entries.extend(other.entries);
        self.coverage.extend(other.coverage);
    }

    pub fn passes(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    /// Entries whose name starts with `prefix`.
    pub fn group<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a CheckEntry> + 'a {
        self.entries.iter().filter(move |e| e.name.starts_with(prefix))
    }

    pub fn group_passes(&self, prefix: &str) -> bool {
        self.group(prefix).all(|e| e.pass)
    }

    pub fn failures(&self) -> Vec<&CheckEntry> {
        self.entries.iter().filter(|e| !e.pass).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.entries.iter().filter_map(|e| e.residual).fold(0.0, f64::max)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let mark = if e.pass { "ok  " } else { "FAIL" };
            match (e.residual, e.eps) {
                (Some(r), Some(eps)) => write!(f, "{mark} {} residual={r:.3e} eps={eps:.1e}", e.name)?,
                _ => write!(f, "{mark} {}", e.name)?,
            }
            if let Some(d) = &e.detail {
                write!(f, " ({d})")?;
            }
            writeln!(f)?;
        }
        for line in &self.coverage {
            writeln!(f, "     {line}")?;
        }
        Ok(())
    }
}
