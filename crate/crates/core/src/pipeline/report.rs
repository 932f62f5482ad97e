//! The JSON report. Every numeric entry carries a precision tag and every
//! pass/fail record carries the certificate it rests on. Field order and
//! list order are fixed, so equal jobs serialize to identical bytes.

use serde::{Deserialize, Serialize};

use super::expansion::format_expansion;
use super::job::JobSpec;
use crate::cech::RankEstimate;
use crate::chart::Window;
use crate::linalg::{PrecMatrix, Scalar};
use crate::padic::KElement;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub spec: JobSpec,
    pub windows: WindowsReport,
    pub classes: Vec<ClassReport>,
    pub matrices: Vec<MatrixReport>,
    pub filtration: Vec<FiltrationReport>,
    pub identifications: Vec<IdentificationReport>,
    pub suites: Vec<SuiteRecord>,
    pub meta: Meta,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn matrix(&self, name: &str) -> Option<&MatrixReport> {
        self.matrices.iter().find(|m| m.name == name)
    }

    /// True when every certificate in the report passed.
    pub fn all_passed(&self) -> bool {
        self.classes.iter().all(|c| c.cocycle)
            && self.identifications.iter().all(|i| i.matches)
            && self.suites.iter().all(|s| s.passed)
            && self.windows.matrices_stable != Some(false)
            && self.windows.ranks.iter().flatten().all(|r| r.estimate.stable)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowsReport {
    pub base: Window,
    pub enlarged: Window,
    /// Whether every matrix came out the same at the enlarged window;
    /// `None` when the rerun was not requested.
    pub matrices_stable: Option<bool>,
    pub ranks: Option<Vec<RankRecord>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankRecord {
    pub side: String,
    #[serde(flatten)]
    pub estimate: RankEstimateRecord,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankEstimateRecord {
    pub degree: usize,
    pub rank: usize,
    pub enlarged_rank: usize,
    pub stable: bool,
}

impl From<RankEstimate> for RankEstimateRecord {
    fn from(e: RankEstimate) -> Self {
        RankEstimateRecord { degree: e.degree, rank: e.rank, enlarged_rank: e.enlarged_rank, stable: e.stable }
    }
}

/// A class representative as a monomial listing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub side: String,
    pub degree: usize,
    pub name: String,
    pub cocycle: bool,
    pub terms: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub name: String,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub entries: Vec<Vec<String>>,
    pub precision: Vec<Vec<String>>,
}

/// Renders an entry: `pi`-adic expansions over `K`, fractions over `Q`.
pub trait Render: Scalar {
    fn render_entry(&self) -> String;
}

impl Render for KElement {
    fn render_entry(&self) -> String {
        format_expansion(self)
    }
}

impl Render for num_rational::BigRational {
    fn render_entry(&self) -> String {
        self.render()
    }
}

impl MatrixReport {
    pub fn new<T: Render>(name: &str, m: &PrecMatrix<T>) -> Self {
        let grid = |f: &dyn Fn(&T) -> String| (0..m.rows()).map(|i| m.row(i).iter().map(f).collect()).collect();
        MatrixReport {
            name: name.into(),
            rows: m.row_labels().to_vec(),
            cols: m.col_labels().to_vec(),
            entries: grid(&|x| x.render_entry()),
            precision: grid(&|x| x.precision_tag()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiltrationStepReport {
    pub level: i32,
    pub dim: usize,
    /// Spanning columns in the de Rham basis.
    pub span: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiltrationReport {
    pub group: String,
    pub basis: Vec<String>,
    pub steps: Vec<FiltrationStepReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentificationReport {
    pub group: String,
    pub target: String,
    pub rank: usize,
    pub phi_eigenvalue: String,
    pub monodromy_zero: bool,
    pub hodge_jumps: Vec<i32>,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub samples: usize,
    /// What certifies the outcome: `exact`, or the smallest residual
    /// valuation against the required bound.
    pub certificate: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteRecord {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
}

impl SuiteRecord {
    pub fn new(name: &str, checks: Vec<CheckRecord>) -> Self {
        SuiteRecord { name: name.into(), passed: checks.iter().all(|c| c.passed), checks }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub eisenstein: String,
    pub e: usize,
    pub fiber_point: String,
    pub period: String,
    pub strictly_semistable: bool,
    pub branch_q: String,
    pub branch_m: i64,
    pub log_q_pi: String,
    pub zero_precision: i64,
}
