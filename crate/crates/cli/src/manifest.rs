//! Run manifests: a self-contained record of one solve that replays to the
//! same bytes in deterministic mode.

use caplab_core::geometry::DomainSpec;
use caplab_core::solver::{ProblemKind, SolverConfig};
use serde::{Deserialize, Serialize};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// CLI-level scenario names, mapped onto the solver problem kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Exterior p-capacitary potential (1 < p < N).
    Exterior,
    /// Conformal exponent p = N = 2 exterior problem.
    Conformal,
    /// Interior problem with a singular puncture at the center.
    Interior,
    /// Torsion problem -div(grad u) = N with u = 0 on the boundary.
    Torsion,
}

impl Scenario {
    pub fn problem_kind(self) -> ProblemKind {
        match self {
            Scenario::Exterior => ProblemKind::ExteriorCapacitary,
            Scenario::Conformal => ProblemKind::ConformalExterior,
            Scenario::Interior => ProblemKind::InteriorPunctured,
            Scenario::Torsion => ProblemKind::Torsion,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Exterior => "exterior",
            Scenario::Conformal => "conformal",
            Scenario::Interior => "interior",
            Scenario::Torsion => "torsion",
        }
    }
}

/// File names written inside the output directory. Relative names keep the
/// manifest portable: replaying into a different directory reproduces the
/// same report bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputNames {
    pub manifest: String,
    pub report_json: String,
    pub report_txt: String,
    pub boundary_csv: String,
    pub field_csv: String,
}

impl Default for OutputNames {
    fn default() -> Self {
        OutputNames {
            manifest: "manifest.json".to_string(),
            report_json: "report.json".to_string(),
            report_txt: "report.txt".to_string(),
            boundary_csv: "boundary.csv".to_string(),
            field_csv: "field.csv".to_string(),
        }
    }
}

/// Everything needed to reproduce one solve: scenario, domain, exponent,
/// solver configuration, and output layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub domain: DomainSpec,
    pub p: f64,
    pub dimension: usize,
    pub solver: SolverConfig,
    /// Recorded mode flag. The solver always runs serial fixed-order
    /// reductions, so every run is deterministic; the flag records that the
    /// caller relies on byte-stable output.
    pub deterministic: bool,
    #[serde(default)]
    pub outputs: OutputNames,
}

impl RunManifest {
    pub fn validate(&self) -> Result<(), String> {
        if self.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(format!(
                "manifest schema version {} is not supported (expected {})",
                self.schema_version, MANIFEST_SCHEMA_VERSION
            ));
        }
        if self.dimension != self.domain.dimension {
            return Err(format!(
                "manifest dimension {} disagrees with the domain config dimension {}",
                self.dimension, self.domain.dimension
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips_through_json() {
        let m = RunManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            scenario: Scenario::Exterior,
            domain: DomainSpec {
                dimension: 2,
                center: vec![0.0, 0.0],
                cos_coeffs: vec![1.0, 0.1],
                sin_coeffs: vec![],
                ellipse: None,
            },
            p: 1.5,
            dimension: 2,
            solver: SolverConfig::default(),
            deterministic: true,
            outputs: OutputNames::default(),
        };
        let text = serde_json::to_string_pretty(&m).unwrap();
        let back: RunManifest = serde_json::from_str(&text).unwrap();
        assert!(back.validate().is_ok());
        assert_eq!(back.scenario, Scenario::Exterior);
        assert_eq!(back.p, 1.5);
        assert_eq!(back.solver.n_r, m.solver.n_r);
        assert!(text.contains("\"scenario\": \"exterior\""));
    }

    #[test]
    fn validate_rejects_mismatched_dimension() {
        let m = RunManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            scenario: Scenario::Torsion,
            domain: DomainSpec {
                dimension: 3,
                center: vec![],
                cos_coeffs: vec![1.0],
                sin_coeffs: vec![],
                ellipse: None,
            },
            p: 2.0,
            dimension: 2,
            solver: SolverConfig::default(),
            deterministic: false,
            outputs: OutputNames::default(),
        };
        assert!(m.validate().is_err());
    }
}
