//! Construction of the representative sample set: perturbed copies of the
//! context, varied only at the studied indices, plus the one-hot correction
//! and training-set proximity filter.
//!
//! Everything here is a pure function of (arguments, seed), so sample
//! generation for disjoint studied sets may run concurrently.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CiuError, Result};
use crate::types::{Context, IndexSet, InputDescriptor, InputKind};

/// Knobs for sample-set construction. `n` is the only genuinely adjustable
/// parameter; the rest default to the choices that keep utility within
/// bounds and make range estimates exact on monotone models.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingConfig {
    /// Number of random perturbation rows.
    pub n: usize,
    /// Seed for the deterministic sample stream.
    pub seed: u64,
    /// Prepend the unmodified context as an anchor row. Guarantees the
    /// context's output lies inside the estimated range, which keeps
    /// contextual utility in `[0, 1]`.
    pub include_context: bool,
    /// Append, per studied continuous feature, one row at the feature's
    /// minimum and one at its maximum (other inputs at the context). Makes
    /// range estimates exact for monotone models regardless of `n`.
    pub include_extremes: bool,
    /// When set, drop sample rows farther than this (range-normalized
    /// Euclidean distance) from every training row.
    pub filter_distance: Option<f64>,
}

impl SamplingConfig {
    pub fn new(n: usize, seed: u64) -> Result<Self> {
        let config = Self {
            n,
            seed,
            ..Self::default()
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(CiuError::InvalidSamplingConfig {
                reason: "n must be >= 1".into(),
            });
        }
        if let Some(d) = self.filter_distance {
            if !(d > 0.0) {
                return Err(CiuError::InvalidSamplingConfig {
                    reason: format!("filter_distance must be > 0, got {d}"),
                });
            }
        }
        Ok(())
    }
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            seed: 42,
            include_context: true,
            include_extremes: true,
            filter_distance: None,
        }
    }
}

/// The sample set: rows equal to the context everywhere except at the
/// studied indices.
///
/// Row layout: optional anchor row (the untouched context) first, then the
/// extreme rows, then the random rows. The anchor and extreme rows are
/// "pinned": the one-hot correction leaves them alone and the realism filter
/// never drops the anchor.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleMatrix {
    rows: Vec<Vec<f64>>,
    studied: IndexSet,
    base_context: Context,
    anchor: bool,
    n_pinned: usize,
}

impl SampleMatrix {
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn studied(&self) -> &IndexSet {
        &self.studied
    }

    pub fn base_context(&self) -> &Context {
        &self.base_context
    }

    /// Position of the anchor row, when the context was included.
    pub fn anchor_row(&self) -> Option<usize> {
        self.anchor.then_some(0)
    }

    /// Rows `[0, n_pinned)` are the anchor and extreme rows.
    pub fn n_pinned(&self) -> usize {
        self.n_pinned
    }
}

/// Build the sample matrix for `studied`: every row starts as the context
/// and the studied inputs are replaced with random values from their
/// descriptor ranges. Deterministic for a fixed seed, and the random rows of
/// a smaller `n` are a prefix of those of a larger `n` under the same seed.
pub fn generate_samples(
    context: &Context,
    studied: &IndexSet,
    inputs: &[InputDescriptor],
    config: &SamplingConfig,
) -> Result<SampleMatrix> {
    config.validate()?;
    studied.check_arity(inputs.len(), "studied input")?;
    if context.len() != inputs.len() {
        return Err(CiuError::ArityMismatch {
            what: "context",
            expected: inputs.len(),
            actual: context.len(),
        });
    }

    let base = context.values();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(config.n + 1 + 2 * studied.len());

    if config.include_context {
        rows.push(base.to_vec());
    }
    if config.include_extremes {
        for &i in studied.indices() {
            if inputs[i].kind == InputKind::Continuous {
                let mut lo = base.to_vec();
                lo[i] = inputs[i].min_value;
                rows.push(lo);
                let mut hi = base.to_vec();
                hi[i] = inputs[i].max_value;
                rows.push(hi);
            }
        }
    }
    let n_pinned = rows.len();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.n {
        let mut row = base.to_vec();
        for &i in studied.indices() {
            let d = &inputs[i];
            row[i] = match &d.kind {
                InputKind::Continuous => rng.gen_range(d.min_value..=d.max_value),
                InputKind::Categorical => {
                    let cats = d.categories.as_ref().expect("validated categorical");
                    cats[rng.gen_range(0..cats.len())]
                }
                // Placeholder draw; made coherent by correct_one_hot.
                InputKind::OneHotMember { .. } => rng.gen_range(0.0..=1.0),
            };
        }
        rows.push(row);
    }

    Ok(SampleMatrix {
        rows,
        studied: studied.clone(),
        base_context: context.clone(),
        anchor: config.include_context,
        n_pinned,
    })
}

/// One-hot groups (name, member indices) present in the descriptors.
fn one_hot_groups(inputs: &[InputDescriptor]) -> Vec<(String, Vec<usize>)> {
    let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
    for d in inputs {
        if let InputKind::OneHotMember { group } = &d.kind {
            match groups.iter_mut().find(|(g, _)| g == group) {
                Some((_, members)) => members.push(d.index),
                None => groups.push((group.clone(), vec![d.index])),
            }
        }
    }
    groups
}

/// Re-roll the studied one-hot groups so that in every random row exactly
/// one member of each group is 1 and the rest are 0, the hot member chosen
/// uniformly. Pinned rows (anchor, extremes) keep the context's own group
/// values. No-op when no group intersects the studied set.
///
/// A group that is only partially covered by the studied set is an error:
/// perturbing part of a one-hot group cannot produce coherent vectors.
pub fn correct_one_hot(
    mut samples: SampleMatrix,
    inputs: &[InputDescriptor],
    seed: u64,
) -> Result<SampleMatrix> {
    let mut studied_groups: Vec<Vec<usize>> = Vec::new();
    for (group, members) in one_hot_groups(inputs) {
        let covered = members.iter().filter(|i| samples.studied.contains(**i)).count();
        if covered == 0 {
            continue;
        }
        if covered < members.len() {
            return Err(CiuError::PartialOneHotGroup { group });
        }
        studied_groups.push(members);
    }
    if studied_groups.is_empty() {
        return Ok(samples);
    }

    let n_pinned = samples.n_pinned;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for row in samples.rows.iter_mut().skip(n_pinned) {
        for members in &studied_groups {
            let hot = members[rng.gen_range(0..members.len())];
            for &i in members {
                row[i] = if i == hot { 1.0 } else { 0.0 };
            }
        }
    }
    Ok(samples)
}

/// Range-normalized Euclidean distance: each dimension scaled to `[0, 1]`
/// by its descriptor range before the usual Euclidean sum. Dimensions with
/// zero range contribute nothing.
fn normalized_distance_sq(a: &[f64], b: &[f64], scale: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(scale)
        .map(|((x, y), s)| {
            let d = (x - y) * s;
            d * d
        })
        .sum()
}

/// Drop sample rows whose minimum normalized distance to every training row
/// exceeds `threshold`. The anchor row is never removed. Errors when the
/// filter would leave no rows at all.
pub fn filter_unrealistic(
    samples: SampleMatrix,
    training_data: &[Vec<f64>],
    threshold: f64,
    inputs: &[InputDescriptor],
) -> Result<SampleMatrix> {
    if training_data.is_empty() {
        return Err(CiuError::EmptyTrainingData);
    }
    if !(threshold > 0.0) {
        return Err(CiuError::InvalidSamplingConfig {
            reason: format!("filter threshold must be > 0, got {threshold}"),
        });
    }
    for row in training_data {
        if row.len() != inputs.len() {
            return Err(CiuError::ArityMismatch {
                what: "training row",
                expected: inputs.len(),
                actual: row.len(),
            });
        }
    }

    let scale: Vec<f64> = inputs
        .iter()
        .map(|d| {
            let w = d.range_width();
            if w > 0.0 {
                1.0 / w
            } else {
                0.0
            }
        })
        .collect();
    let threshold_sq = threshold * threshold;

    let anchor_row = samples.anchor_row();
    let n_pinned = samples.n_pinned;
    let mut rows = Vec::with_capacity(samples.rows.len());
    let mut kept_pinned = 0usize;
    for (idx, row) in samples.rows.into_iter().enumerate() {
        let keep = Some(idx) == anchor_row
            || training_data
                .iter()
                .any(|t| normalized_distance_sq(&row, t, &scale) <= threshold_sq);
        if keep {
            if idx < n_pinned {
                kept_pinned += 1;
            }
            rows.push(row);
        }
    }
    if rows.is_empty() {
        return Err(CiuError::AllRowsFiltered { threshold });
    }

    Ok(SampleMatrix {
        rows,
        studied: samples.studied,
        base_context: samples.base_context,
        anchor: samples.anchor,
        n_pinned: kept_pinned,
    })
}
