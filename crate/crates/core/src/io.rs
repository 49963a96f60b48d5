//! On-disk documents. Everything is pretty-printed JSON carrying a `schema`
//! field; unknown keys are rejected.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::extremal::{Diagnostics, GridSpec, Mode, Problem, Solution};
use crate::glue::{GlueCheck, SubmeanReport, TrigHarmonic};
use crate::measure::{RadialMeasure, SupportReport};
use crate::persson::Admissibility;
use crate::radial::{ClassFlags, RadialProfile, RadialSet, RadialWeight, WeightKind};
use crate::{Error, Result};

pub const PROBLEM_SCHEMA: &str = "radeq/problem/v1";
pub const PROFILE_SCHEMA: &str = "radeq/profile/v1";
pub const MEASURE_SCHEMA: &str = "radeq/measure/v1";
pub const GLUE_SCHEMA: &str = "radeq/glue/v1";
pub const REPORT_SCHEMA: &str = "radeq/report/v1";
pub const MEASURE_REPORT_SCHEMA: &str = "radeq/measure-report/v1";
pub const PROFILE_REPORT_SCHEMA: &str = "radeq/profile-report/v1";
pub const GLUE_REPORT_SCHEMA: &str = "radeq/glue-report/v1";
pub const COMPARE_SCHEMA: &str = "radeq/compare/v1";
pub const GALLERY_SCHEMA: &str = "radeq/gallery/v1";

/// Where `solve` writes its outputs; paths are relative to the output directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure_csv: Option<String>,
}

impl OutputSpec {
    pub fn is_empty(&self) -> bool {
        self.report.is_none() && self.profile_csv.is_none() && self.measure_csv.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub schema: String,
    pub dim: usize,
    /// Closed radius intervals `[a, b]`.
    pub set: Vec<[f64; 2]>,
    pub weight: WeightKind,
    pub mode: Mode,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "OutputSpec::is_empty")]
    pub output: OutputSpec,
}

impl ProblemSpec {
    pub fn from_problem(prob: &Problem, grid: &GridSpec) -> Self {
        ProblemSpec {
            schema: PROBLEM_SCHEMA.into(),
            dim: prob.dim(),
            set: prob.set().intervals().to_vec(),
            weight: prob.weight().kind().clone(),
            mode: prob.mode(),
            grid: grid.clone(),
            output: OutputSpec::default(),
        }
    }

    pub fn to_problem(&self) -> Result<Problem> {
        let set = RadialSet::new(self.set.clone())?;
        let weight = RadialWeight::new(self.weight.clone(), set)?;
        Problem::new(self.dim, weight, self.mode)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub schema: String,
    pub dim: usize,
    pub profile: RadialProfile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub schema: String,
    pub measure: RadialMeasure,
    /// Value of the reconstructed profile at the origin.
    #[serde(default)]
    pub u0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GlueTarget {
    Radial { dim: usize, radius: f64, inner: RadialProfile, outer: RadialProfile },
    Disc { h: TrigHarmonic },
}

fn default_samples() -> usize {
    100_000
}

fn default_range() -> [f64; 2] {
    [0.01, 0.2]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlueSpec {
    pub schema: String,
    pub glue: GlueTarget,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Circle radii, as fractions of the interface radius.
    #[serde(default = "default_range")]
    pub radius_range: [f64; 2],
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    /// sha256 of the input document bytes, hex.
    pub input_sha256: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionReport {
    pub schema: String,
    pub problem: ProblemSpec,
    pub profile: RadialProfile,
    pub measure: RadialMeasure,
    pub support: SupportReport,
    pub contact_set: SupportReport,
    pub total_mass: f64,
    pub diagnostics: Diagnostics,
    pub provenance: Provenance,
}

impl SolutionReport {
    pub fn new(spec: &ProblemSpec, sol: &Solution, provenance: Provenance) -> Self {
        let mut problem = spec.clone();
        problem.output = OutputSpec::default();
        SolutionReport {
            schema: REPORT_SCHEMA.into(),
            problem,
            profile: sol.profile.clone(),
            total_mass: sol.measure.total(),
            measure: sol.measure.clone(),
            support: sol.support.clone(),
            contact_set: sol.contact_set.clone(),
            diagnostics: sol.diagnostics.clone(),
            provenance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureReport {
    pub schema: String,
    pub measure: RadialMeasure,
    pub support: SupportReport,
    pub total_mass: f64,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileReport {
    pub schema: String,
    pub profile: RadialProfile,
    pub class: ClassFlags,
    pub admissibility: Admissibility,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlueReport {
    pub schema: String,
    /// Normal-derivative check; radial targets only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<GlueCheck>,
    /// Set when the construction itself was refused.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejected: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub submean: Option<SubmeanReport>,
    pub accepted: bool,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareReport {
    pub schema: String,
    /// Whether the first measure is absolutely continuous w.r.t. the second.
    pub m1_ll_m2: bool,
    pub m2_ll_m1: bool,
}

/// Parses a document and checks its schema tag.
pub fn parse<T: DeserializeOwned>(text: &str, schema: &str) -> Result<T> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Structural(format!("not valid JSON: {e}")))?;
    match value.get("schema").and_then(|v| v.as_str()) {
        Some(s) if s == schema => {}
        Some(s) => return Err(Error::Structural(format!("expected schema {schema}, found {s}"))),
        None => return Err(Error::Structural(format!("missing schema field (expected {schema})"))),
    }
    serde_json::from_value(value).map_err(|e| Error::Structural(format!("invalid {schema} document: {e}")))
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

/// `points` radii from 0 to `r_max` inclusive.
pub fn csv_radii(r_max: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|i| r_max * i as f64 / (n - 1) as f64).collect()
}

fn csv(header: &str, rs: &[f64], f: impl Fn(f64) -> f64) -> String {
    let mut out = format!("{header}\n");
    for &r in rs {
        out.push_str(&format!("{:.15e},{:.15e}\n", r, f(r)));
    }
    out
}

/// `(r, V(r))` rows.
pub fn profile_csv(p: &RadialProfile, rs: &[f64]) -> String {
    csv("r,V", rs, |r| p.value_at_radius(r))
}

/// `(r, f(r))` rows of the ball-mass function.
pub fn measure_csv(m: &RadialMeasure, rs: &[f64]) -> String {
    csv("r,f", rs, |r| m.cdf(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    const PROBLEM: &str = r#"{
        "schema": "radeq/problem/v1",
        "dim": 2,
        "set": [[0.0, 1.0]],
        "weight": {"kind": "constant", "c": 0.0},
        "mode": "global"
    }"#;

    #[test]
    fn problem_spec_parses() {
        let spec: ProblemSpec = parse(PROBLEM, PROBLEM_SCHEMA).unwrap();
        let prob = spec.to_problem().unwrap();
        assert_eq!(prob.dim(), 2);
        let again: ProblemSpec = parse(&to_pretty(&spec), PROBLEM_SCHEMA).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn relative_mode_syntax() {
        let text = PROBLEM.replace(r#""mode": "global""#, r#""mode": {"relative": 2.0}"#);
        let spec: ProblemSpec = parse(&text, PROBLEM_SCHEMA).unwrap();
        assert_eq!(spec.mode, Mode::Relative(2.0));
    }

    #[test]
    fn unknown_keys_and_schema_rejected() {
        let text = PROBLEM.replace(r#""dim": 2,"#, r#""dim": 2, "colour": 1,"#);
        assert!(matches!(parse::<ProblemSpec>(&text, PROBLEM_SCHEMA), Err(Error::Structural(_))));
        let text = PROBLEM.replace("problem/v1", "problem/v0");
        assert!(parse::<ProblemSpec>(&text, PROBLEM_SCHEMA).is_err());
        assert!(parse::<ProblemSpec>("{", PROBLEM_SCHEMA).is_err());
    }

    #[test]
    fn empty_set_fails_validation() {
        let text = PROBLEM.replace("[[0.0, 1.0]]", "[]");
        let spec: ProblemSpec = parse(&text, PROBLEM_SCHEMA).unwrap();
        assert!(spec.to_problem().is_err());
    }

    #[test]
    fn csv_rendering() {
        let p = RadialProfile::log_max(1.0);
        let rows = profile_csv(&p, &[0.0, std::f64::consts::E]);
        assert_eq!(rows, "r,V\n0.000000000000000e0,0.000000000000000e0\n2.718281828459045e0,1.000000000000000e0\n");
    }
}
