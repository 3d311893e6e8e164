//! Machine-readable run reports. Every value is an exact fraction string.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rational::{fmt_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub check: String,
    pub params: BTreeMap<String, String>,
    pub value: String,
    pub bound: String,
    pub pass: bool,
    pub anchor: String,
}

impl Record {
    pub fn new(check: &str, anchor: &str) -> Self {
        Record {
            check: check.to_string(),
            params: BTreeMap::new(),
            value: String::new(),
            bound: String::new(),
            pass: false,
            anchor: anchor.to_string(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn value(mut self, v: &Rational) -> Self {
        self.value = fmt_rational(v);
        self
    }

    pub fn bound(mut self, b: &Rational) -> Self {
        self.bound = fmt_rational(b);
        self
    }

    pub fn pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub records: Vec<Record>,
    pub pass: bool,
    /// Set when a memory cap cut a computation short.
    pub partial: bool,
    pub toolchain: String,
}

impl Report {
    pub fn new(scenario: &str) -> Self {
        Report {
            scenario: scenario.to_string(),
            records: Vec::new(),
            pass: true,
            partial: false,
            toolchain: toolchain(),
        }
    }

    pub fn push(&mut self, record: Record) {
        self.pass &= record.pass;
        self.records.push(record);
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| crate::error::Error::Invariant(format!("report serialization: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::error::Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// One line per record: `PASS check value ≤ bound`.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let status = if r.pass { "PASS" } else { "FAIL" };
            let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            out.push_str(&format!(
                "{status} {} [{}] value={} bound={}",
                r.check,
                params.join(" "),
                r.value,
                r.bound
            ));
            if !r.pass {
                out.push_str(&format!(" anchor: {}", r.anchor));
            }
            out.push('\n');
        }
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        out.push_str(&format!(
            "{verdict} {}: {} records{}\n",
            self.scenario,
            self.records.len(),
            if self.partial { " (partial)" } else { "" }
        ));
        out
    }
}

pub fn toolchain() -> String {
    format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let mut r = Report::new("s");
        r.push(
            Record::new("a2", "x")
                .param("k", 1)
                .value(&Rational::new(1.into(), 3.into()))
                .bound(&Rational::from_integer(1.into()))
                .pass(true),
        );
        let json = r.to_json().unwrap();
        assert!(json.contains("\"1/3\""));
        assert_eq!(Report::from_json(&json).unwrap(), r);
        assert!(r.pass);
        r.push(Record::new("b", "y"));
        assert!(!r.pass);
    }

    #[test]
    fn empty_report_passes() {
        let r = Report::new("empty");
        assert!(r.pass);
        assert!(r.summary().starts_with("PASS empty"));
    }
}
