//! Turning result lists into something a human can read: the
//! red-yellow-green utility color scale, bar plots and curves as SVG,
//! templated sentences, and a stable JSON-compatible structure.

mod svg;

pub use svg::{
    check_svg_well_formed, render_barplot, render_curve, BarPlotSpec, BarSort, CurvePlotSpec,
};

use serde::{Deserialize, Serialize};

use crate::error::{CiuError, Result};
use crate::types::{CiuResult, ConceptVocabulary, Target};

/// Color scale for contextual utility: red at 0, yellow at the neutral
/// point, dark green at 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColorSpec {
    /// Threshold splitting the utility range into unfavorable and
    /// favorable bands. Strictly inside (0, 1).
    pub cu_neutral: f64,
    pub red: [u8; 3],
    pub yellow: [u8; 3],
    pub dark_green: [u8; 3],
}

impl Default for ColorSpec {
    fn default() -> Self {
        Self {
            cu_neutral: 0.5,
            red: [220, 50, 32],
            yellow: [255, 200, 0],
            dark_green: [0, 120, 40],
        }
    }
}

impl ColorSpec {
    pub fn with_neutral(cu_neutral: f64) -> Result<Self> {
        let spec = Self {
            cu_neutral,
            ..Self::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cu_neutral > 0.0 && self.cu_neutral < 1.0) {
            return Err(CiuError::InvalidColorSpec {
                reason: format!("cu_neutral {} not strictly inside (0, 1)", self.cu_neutral),
            });
        }
        Ok(())
    }
}

fn lerp_channel(a: u8, b: u8, t: f64) -> u8 {
    (a as f64 + (b as f64 - a as f64) * t).round() as u8
}

fn lerp(a: [u8; 3], b: [u8; 3], t: f64) -> [u8; 3] {
    [
        lerp_channel(a[0], b[0], t),
        lerp_channel(a[1], b[1], t),
        lerp_channel(a[2], b[2], t),
    ]
}

/// Map a utility value to its color: a continuous red-to-yellow transition
/// on `[0, cu_neutral]` and yellow-to-dark-green on `[cu_neutral, 1]`.
pub fn cu_color(cu: f64, spec: &ColorSpec) -> Result<[u8; 3]> {
    spec.validate()?;
    if !(0.0..=1.0).contains(&cu) || cu.is_nan() {
        return Err(CiuError::CuOutOfRange { cu });
    }
    Ok(if cu <= spec.cu_neutral {
        lerp(spec.red, spec.yellow, cu / spec.cu_neutral)
    } else {
        lerp(
            spec.yellow,
            spec.dark_green,
            (cu - spec.cu_neutral) / (1.0 - spec.cu_neutral),
        )
    })
}

/// Graded vocabulary mapping numeric importance and utility onto words.
/// Each entry is an inclusive upper bound paired with the word used up to
/// that bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordTable {
    ci_words: Vec<(f64, String)>,
    cu_words: Vec<(f64, String)>,
}

impl Default for WordTable {
    fn default() -> Self {
        let grade = |pairs: &[(f64, &str)]| {
            pairs
                .iter()
                .map(|(b, w)| (*b, (*w).to_string()))
                .collect::<Vec<_>>()
        };
        Self {
            ci_words: grade(&[
                (0.25, "slightly important"),
                (0.5, "important"),
                (0.75, "very important"),
                (1.0, "extremely important"),
            ]),
            cu_words: grade(&[
                (0.25, "very unfavorable"),
                (0.5, "unfavorable"),
                (0.75, "favorable"),
                (1.0, "very favorable"),
            ]),
        }
    }
}

impl WordTable {
    pub fn new(ci_words: Vec<(f64, String)>, cu_words: Vec<(f64, String)>) -> Result<Self> {
        let table = Self { ci_words, cu_words };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        for (label, words) in [("ci", &self.ci_words), ("cu", &self.cu_words)] {
            if words.is_empty() {
                return Err(CiuError::InvalidWordTable {
                    reason: format!("{label} word list is empty"),
                });
            }
            for pair in words.windows(2) {
                if !(pair[0].0 < pair[1].0) {
                    return Err(CiuError::InvalidWordTable {
                        reason: format!(
                            "{label} bounds not strictly increasing: {} then {}",
                            pair[0].0, pair[1].0
                        ),
                    });
                }
            }
            let last = words.last().expect("checked non-empty").0;
            if last < 1.0 {
                return Err(CiuError::InvalidWordTable {
                    reason: format!("{label} final bound {last} below 1"),
                });
            }
        }
        Ok(())
    }

    fn word(words: &[(f64, String)], value: f64) -> &str {
        words
            .iter()
            .find(|(bound, _)| value <= *bound)
            .or_else(|| words.last())
            .map(|(_, w)| w.as_str())
            .expect("validated non-empty")
    }

    pub fn ci_word(&self, ci: f64) -> &str {
        Self::word(&self.ci_words, ci)
    }

    pub fn cu_word(&self, cu: f64) -> &str {
        Self::word(&self.cu_words, cu)
    }
}

/// Order results by descending importance; the sort is stable so ties keep
/// their input order.
pub fn sort_by_ci(results: &[CiuResult]) -> Vec<&CiuResult> {
    let mut sorted: Vec<&CiuResult> = results.iter().collect();
    sorted.sort_by(|a, b| b.ci.partial_cmp(&a.ci).expect("finite ci"));
    sorted
}

/// Human-readable label for a target. Concepts go through the vocabulary's
/// display synonyms; feature sets use the feature names, falling back to
/// the raw index when no name is known.
pub fn target_label(
    target: &Target,
    feature_names: &[String],
    vocabulary: &ConceptVocabulary,
) -> String {
    match target {
        Target::Concept(name) => vocabulary.display_name(name).to_string(),
        Target::Features(set) => {
            if let Some(concept) = vocabulary.concept_for(set) {
                return vocabulary.display_name(concept).to_string();
            }
            set.indices()
                .iter()
                .map(|i| {
                    feature_names
                        .get(*i)
                        .cloned()
                        .unwrap_or_else(|| format!("input {i}"))
                })
                .collect::<Vec<_>>()
                .join(" & ")
        }
    }
}

/// One sentence naming the `top_k` targets by importance, each with its
/// importance and utility word.
pub fn textual_explanation(
    results: &[CiuResult],
    feature_names: &[String],
    vocabulary: &ConceptVocabulary,
    words: &WordTable,
    top_k: usize,
) -> Result<String> {
    if results.is_empty() {
        return Err(CiuError::EmptyResults);
    }
    if top_k < 1 {
        return Err(CiuError::InvalidTopK);
    }
    words.validate()?;

    let parts: Vec<String> = sort_by_ci(results)
        .into_iter()
        .take(top_k)
        .map(|r| {
            format!(
                "{} is {} and its value is {}",
                target_label(&r.target, feature_names, vocabulary),
                words.ci_word(r.ci),
                words.cu_word(r.cu)
            )
        })
        .collect();
    Ok(format!("Because {}.", parts.join("; ")))
}

/// Results as a JSON-compatible tree with the stable field names
/// `target, output_index, ci, cu, cmin, cmax, y, n, seed` (plus the two
/// diagnostic flags). Round-trips losslessly.
pub fn results_to_structured(results: &[CiuResult]) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(results)?)
}

/// Inverse of [`results_to_structured`].
pub fn structured_to_results(value: &serde_json::Value) -> Result<Vec<CiuResult>> {
    Ok(serde_json::from_value(value.clone())?)
}

/// Deterministic pretty-printed form of the structured document.
pub fn results_to_json_string(results: &[CiuResult]) -> Result<String> {
    Ok(serde_json::to_string_pretty(results)?)
}
