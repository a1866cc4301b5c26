//! Machine-checkable certificate records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::scalar::Scalar;

/// Relation asserted by a check, `lhs REL rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    pub fn holds<S: Scalar>(self, lhs: &S, rhs: &S) -> bool {
        match self {
            Rel::Lt => lhs.less_than(rhs),
            Rel::Le => lhs.at_most(rhs),
            Rel::Eq => lhs.approx_eq(rhs),
            Rel::Ge => lhs.at_least(rhs),
            Rel::Gt => lhs.greater_than(rhs),
        }
    }

    /// Signed margin; nonnegative when the relation holds (up to
    /// strictness).
    pub fn slack<S: Scalar>(self, lhs: &S, rhs: &S) -> S {
        match self {
            Rel::Lt | Rel::Le => rhs.clone() - lhs.clone(),
            Rel::Ge | Rel::Gt => lhs.clone() - rhs.clone(),
            Rel::Eq => -(lhs.clone() - rhs.clone()).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub description: String,
    pub relation: String,
    pub lhs: String,
    pub rhs: String,
    pub slack: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub claim: String,
    pub parameters: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub witnesses: BTreeMap<String, Value>,
    pub verified: bool,
    /// Smallest slack over the numeric checks.
    pub slack: Option<String>,
    pub mode: String,
    /// Comparison tolerance, present in float mode only.
    pub tolerance: Option<String>,
    pub seed: Option<u64>,
    #[serde(skip)]
    min_slack: Option<f64>,
}

impl CertificateReport {
    pub fn new<S: Scalar>(claim: impl Into<String>) -> Self {
        Self {
            claim: claim.into(),
            parameters: BTreeMap::new(),
            checks: Vec::new(),
            witnesses: BTreeMap::new(),
            verified: false,
            slack: None,
            mode: S::MODE.to_string(),
            tolerance: (!S::EXACT).then(|| format!("{:e}", S::tolerance())),
            seed: None,
            min_slack: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn param(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.parameters.insert(key.into(), value.to_string());
        self
    }

    pub fn witness(&mut self, key: impl Into<String>, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.witnesses.insert(key.into(), v);
        self
    }

    /// Records `lhs REL rhs` and returns whether it holds.
    pub fn check<S: Scalar>(&mut self, description: impl Into<String>, lhs: &S, rel: Rel, rhs: &S) -> bool {
        let pass = rel.holds(lhs, rhs);
        let slack = rel.slack(lhs, rhs);
        let f = slack.to_f64();
        if self.min_slack.is_none_or(|m| f < m) {
            self.min_slack = Some(f);
            self.slack = Some(slack.render());
        }
        self.checks.push(Check {
            description: description.into(),
            relation: rel.symbol().to_string(),
            lhs: lhs.render(),
            rhs: rhs.render(),
            slack: slack.render(),
            pass,
        });
        self.verified = self.all_pass();
        pass
    }

    /// Records a non-numeric check.
    pub fn check_bool(&mut self, description: impl Into<String>, pass: bool, detail: impl Into<String>) -> bool {
        self.checks.push(Check {
            description: description.into(),
            relation: "holds".to_string(),
            lhs: detail.into(),
            rhs: String::new(),
            slack: String::new(),
            pass,
        });
        self.verified = self.all_pass();
        pass
    }

    fn all_pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Appends the checks of `other`, prefixing descriptions.
    pub fn absorb(&mut self, prefix: &str, other: &CertificateReport) {
        for c in &other.checks {
            let mut c = c.clone();
            c.description = format!("{prefix}: {}", c.description);
            self.checks.push(c);
        }
        if let (Some(s), Some(m)) = (&other.slack, other.min_slack) {
            if self.min_slack.is_none_or(|x| m < x) {
                self.min_slack = Some(m);
                self.slack = Some(s.clone());
            }
        }
        self.verified = self.all_pass();
    }

    /// Canonical pretty JSON; identical inputs give identical bytes.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
