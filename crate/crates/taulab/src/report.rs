//! Machine-readable verification reports shared between the library's
//! verification suites and the command-line front end.

use serde::{Deserialize, Serialize};

/// One verified identity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Case {
    /// stable case identifier (sorted on in reports)
    pub id: String,
    /// identity tag the case checks
    pub eq_tag: String,
    /// "pass" or "fail"
    pub status: String,
    /// numeric residual; exact checks report 0.0 on success and 1.0 on a
    /// nonzero symbolic residual
    pub residual: f64,
    /// elapsed milliseconds (informational; not part of the deterministic
    /// payload)
    pub ms: u64,
}

impl Case {
    pub fn exact(id: impl Into<String>, eq_tag: impl Into<String>, zero: bool, ms: u64) -> Case {
        Case {
            id: id.into(),
            eq_tag: eq_tag.into(),
            status: if zero { "pass" } else { "fail" }.to_string(),
            residual: if zero { 0.0 } else { 1.0 },
            ms,
        }
    }

    pub fn numeric(
        id: impl Into<String>,
        eq_tag: impl Into<String>,
        residual: f64,
        tol: f64,
        ms: u64,
    ) -> Case {
        Case {
            id: id.into(),
            eq_tag: eq_tag.into(),
            status: if residual <= tol { "pass" } else { "fail" }.to_string(),
            residual,
            ms,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

/// Full report of a verification run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub seed: u64,
    pub cases: Vec<Case>,
}

impl Report {
    pub fn new(command: impl Into<String>, seed: u64, mut cases: Vec<Case>) -> Report {
        cases.sort_by(|a, b| a.id.cmp(&b.id));
        Report {
            schema: 1,
            command: command.into(),
            seed,
            cases,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,eq_tag,status,residual,ms\n");
        for c in &self.cases {
            out.push_str(&format!(
                "{},{},{},{:.3e},{}\n",
                c.id, c.eq_tag, c.status, c.residual, c.ms
            ));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.cases {
            out.push_str(&format!(
                "{:<40} [{}] {} (residual {:.3e}, {} ms)\n",
                c.id, c.eq_tag, c.status, c.residual, c.ms
            ));
        }
        let (pass, total) = (
            self.cases.iter().filter(|c| c.passed()).count(),
            self.cases.len(),
        );
        out.push_str(&format!("{pass}/{total} cases passed\n"));
        out
    }
}
