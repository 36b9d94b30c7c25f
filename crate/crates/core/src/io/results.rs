//! JSON results documents for bounds, samples, metrics and refinement runs.
//!
//! Reals are written with 17 significant digits; non-finite reals become
//! `null` and read back as NaN.

use serde::de::Deserializer;
use serde::ser::{Error as _, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::bench::{BenchmarkRecord, SampleSet};
use crate::bound::{BoundFunction, Route, Segment, Side};
use crate::io::IoError;
use crate::refine::{Action, RefineConfig, RefineResult};
use crate::simplex::Status;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(S::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Real(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub lo: Real,
    pub hi: Real,
    pub coeffs: Option<[Real; 3]>,
    pub available: bool,
}

impl From<&Segment> for SegmentRecord {
    fn from(s: &Segment) -> Self {
        SegmentRecord {
            lo: Real(s.lo),
            hi: Real(s.hi),
            coeffs: s.coeffs.map(|c| c.map(Real)),
            available: s.is_available(),
        }
    }
}

impl SegmentRecord {
    pub fn to_segment(&self) -> Segment {
        Segment::new(self.lo.0, self.hi.0, self.coeffs.map(|c| c.map(|r| r.0)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub lambda: Real,
    pub f: Real,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub availability: Real,
    pub rmse: Real,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_time: Option<Real>,
    pub timeout: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<Route>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub segments: Vec<SegmentRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<SampleRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ResultsDocument {
    pub fn from_bound(bf: &BoundFunction) -> Self {
        ResultsDocument {
            method: (!bf.provenance.method.is_empty()).then(|| bf.provenance.method.clone()),
            side: Some(bf.side),
            n: Some(bf.provenance.splits),
            route: Some(bf.provenance.route),
            segments: bf.segments.iter().map(SegmentRecord::from).collect(),
            notes: bf.provenance.notes.clone(),
            ..Default::default()
        }
    }

    pub fn with_problem(mut self, name: impl Into<String>) -> Self {
        self.problem = Some(name.into());
        self
    }

    pub fn with_samples(mut self, samples: &SampleSet) -> Self {
        self.samples = samples
            .lambdas
            .iter()
            .zip(&samples.values)
            .zip(&samples.statuses)
            .map(|((&l, &f), &status)| SampleRecord {
                lambda: Real(l),
                f: Real(f),
                status,
            })
            .collect();
        self
    }

    /// Attaches metrics; the relative time only when `timing` is set.
    pub fn with_metrics(mut self, record: &BenchmarkRecord, timing: bool) -> Self {
        self.metrics = Some(MetricsRecord {
            availability: Real(record.availability),
            rmse: Real(record.rmse),
            rel_time: timing.then_some(Real(record.rel_time)),
            timeout: record.timeout,
        });
        self.seed = Some(record.seed);
        self
    }

    pub fn segments(&self) -> Vec<Segment> {
        self.segments.iter().map(SegmentRecord::to_segment).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// One JSON document per bound, in order, as a pretty-printed array
/// (a single bound is written as a bare object).
pub fn emit_results(docs: &[ResultsDocument]) -> String {
    match docs {
        [] => ResultsDocument::default().to_json(),
        [one] => one.to_json(),
        many => serde_json::to_string_pretty(many).expect("results serialize"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub lambda: Real,
    pub f: Real,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafRecord {
    pub lo: Real,
    pub hi: Real,
    pub gap: Real,
    pub lower: Vec<SegmentRecord>,
    pub upper: Vec<SegmentRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub lo: Real,
    pub hi: Real,
    pub gap: Real,
    pub action: Action,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    pub lower_method: String,
    pub upper_method: String,
    pub epsilon_lambda: Real,
    pub max_gap: Real,
    pub points: Vec<PointRecord>,
    pub leaves: Vec<LeafRecord>,
    pub iterations: Vec<IterationRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<Real>,
}

impl RefineDocument {
    pub fn new(cfg: &RefineConfig, result: &RefineResult, timing: bool) -> Self {
        let segs = |bf: &BoundFunction| bf.segments.iter().map(SegmentRecord::from).collect();
        RefineDocument {
            problem: None,
            lower_method: cfg.lower_method.name().to_string(),
            upper_method: cfg.upper_method.name().to_string(),
            epsilon_lambda: Real(cfg.epsilon_lambda),
            max_gap: Real(result.max_gap()),
            points: result
                .points
                .iter()
                .map(|&(l, f)| PointRecord {
                    lambda: Real(l),
                    f: Real(f),
                })
                .collect(),
            leaves: result
                .leaves
                .iter()
                .map(|leaf| LeafRecord {
                    lo: Real(leaf.interval.lo),
                    hi: Real(leaf.interval.hi),
                    gap: Real(leaf.gap),
                    lower: segs(&leaf.lower),
                    upper: segs(&leaf.upper),
                })
                .collect(),
            iterations: result
                .trace
                .iter()
                .map(|t| IterationRecord {
                    iteration: t.iteration,
                    lo: Real(t.interval.lo),
                    hi: Real(t.interval.hi),
                    gap: Real(t.gap),
                    action: t.action,
                })
                .collect(),
            elapsed_seconds: timing.then_some(Real(result.elapsed.as_secs_f64())),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results serialize")
    }
}
