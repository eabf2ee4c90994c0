//! Verdict and report records shared by the 1-d and multidimensional
//! classifiers. These serialize to the JSON report emitted by the CLI.

use serde::{Deserialize, Serialize};

use crate::hamza::CaseTag;
use crate::quad::divergence::{DecayVerdict, DivergenceVerdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Recurrent,
    Inconclusive,
    /// Optional extension: all scale integrals bounded in a natural-scale
    /// case. Rests on the cited scale equivalence, not on the sufficient
    /// criteria themselves; off by default.
    TransientByScale,
}

/// One required integral sequence with its divergence diagnosis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceEvidence {
    pub label: String,
    pub diagnosis: DivergenceVerdict,
}

/// One required vanishing-ratio condition (multidimensional criteria).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioEvidence {
    pub label: String,
    pub diagnosis: DecayVerdict,
}

/// Closed-form energy of the recurrence-determining test function at index n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyPoint {
    pub n: u32,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceVerdict {
    pub kind: VerdictKind,
    pub case_tag: Option<CaseTag>,
    pub sequences: Vec<SequenceEvidence>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ratios: Vec<RatioEvidence>,
    /// Trace of the proof's closed-form energy bound along n.
    pub energy_trace: Vec<EnergyPoint>,
    /// Declared, unverified assumptions the verdict rests on.
    pub assumptions: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub n_max: u32,
}

impl RecurrenceVerdict {
    pub fn inconclusive(reason: impl Into<String>, n_max: u32) -> Self {
        RecurrenceVerdict {
            kind: VerdictKind::Inconclusive,
            case_tag: None,
            sequences: vec![],
            ratios: vec![],
            energy_trace: vec![],
            assumptions: standard_assumptions(n_max),
            notes: vec![reason.into()],
            n_max,
        }
    }
}

pub fn standard_assumptions(n_max: u32) -> Vec<String> {
    vec![
        "closability of the form on its core is assumed, not verified".into(),
        format!("verdict is numerical evidence at n_max={n_max}, not a proof"),
    ]
}
