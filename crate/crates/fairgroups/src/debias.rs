//! Optimal-transport post-processing of model scores.
//!
//! Per-group score distributions are summarized as empirical quantile
//! functions on a fixed grid. Their Wasserstein-1 barycenter is the
//! pointwise weighted median of the group quantiles (the exact
//! one-dimensional minimizer of the weighted sum of W1 distances), and
//! each group is mapped part of the way toward it: with
//! `D = max_{k,k'} sup_u |Q_k(u) - Q_{k'}(u)|`, the interpolation factor
//! `t = max(0, 1 - alpha / D)` is the smallest one that brings every
//! pairwise sup-norm gap down to `alpha`. `alpha = 1` keeps the original
//! scores, `alpha = 0` sends every group to the common barycenter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{accuracy, hgr, pr_auc};
use crate::types::{assign_groups_with, Dataset, GroupAssignment, Partition, Target};

/// Quantile-grid settings for fitting transport maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarycenterSpec {
    /// Number of quantile-grid intervals (knots are `r / resolution`).
    pub resolution: usize,
}

impl Default for BarycenterSpec {
    fn default() -> Self {
        BarycenterSpec { resolution: 512 }
    }
}

/// Minimum accepted quantile-grid resolution.
pub const MIN_RESOLUTION: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct GroupTransport {
    pub weight: f64,
    /// Source and target quantile knots; `None` means the identity map
    /// (group unseen at fit time).
    pub source: Option<Vec<f64>>,
    pub target: Option<Vec<f64>>,
}

/// Monotone per-group score remapping on a fixed quantile grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportMap {
    pub(crate) alpha: f64,
    pub(crate) resolution: usize,
    pub(crate) groups: Vec<GroupTransport>,
}

impl TransportMap {
    pub fn k(&self) -> usize {
        self.groups.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Group weight used when the map was fitted.
    pub fn weight(&self, group: usize) -> Option<f64> {
        self.groups.get(group).map(|g| g.weight)
    }

    /// Source quantile knots of a fitted group (`None` for identity).
    pub fn source_quantiles(&self, group: usize) -> Option<&[f64]> {
        self.groups.get(group).and_then(|g| g.source.as_deref())
    }

    /// Target quantile knots of a fitted group (`None` for identity).
    pub fn target_quantiles(&self, group: usize) -> Option<&[f64]> {
        self.groups.get(group).and_then(|g| g.target.as_deref())
    }

    /// Remaps one score belonging to `group`. Scores outside `[0, 1]` are
    /// clamped before mapping; the map is monotone within each group.
    pub fn apply(&self, score: f64, group: usize) -> Result<f64> {
        let gt = self.groups.get(group).ok_or(Error::UnknownGroup {
            group,
            k: self.groups.len(),
        })?;
        if !score.is_finite() {
            return Err(Error::invalid(format!("score must be finite, got {score}")));
        }
        let s = score.clamp(0.0, 1.0);
        let (Some(source), Some(target)) = (&gt.source, &gt.target) else {
            return Ok(s);
        };
        // Position of s in the source quantile function: left-continuous
        // generalized inverse with linear interpolation inside the
        // bracketing knot interval.
        let i = source.partition_point(|&q| q < s);
        if i == 0 {
            return Ok(target[0]);
        }
        if i == source.len() {
            return Ok(*target.last().unwrap());
        }
        let (q0, q1) = (source[i - 1], source[i]);
        let frac = if q1 > q0 { (s - q0) / (q1 - q0) } else { 0.0 };
        Ok(target[i - 1] + frac * (target[i] - target[i - 1]))
    }
}

/// Free-function form of [`TransportMap::apply`].
pub fn apply_postprocessor(map: &TransportMap, score: f64, group: usize) -> Result<f64> {
    map.apply(score, group)
}

impl TransportMap {
    /// Rebuilds a map from its serialized parts, re-validating every
    /// invariant (used by the artifact reader).
    pub(crate) fn from_parts(
        alpha: f64,
        resolution: usize,
        groups: Vec<GroupTransport>,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        if resolution < MIN_RESOLUTION {
            return Err(Error::invalid(format!(
                "quantile resolution must be at least {MIN_RESOLUTION}"
            )));
        }
        if groups.is_empty() {
            return Err(Error::invalid("transport map needs at least one group"));
        }
        for (g, gt) in groups.iter().enumerate() {
            if !(gt.weight.is_finite() && (0.0..=1.0).contains(&gt.weight)) {
                return Err(Error::invalid(format!(
                    "group {g} weight {} is not a probability",
                    gt.weight
                )));
            }
            if gt.source.is_some() != gt.target.is_some() {
                return Err(Error::invalid(format!(
                    "group {g} must have both quantile curves or neither"
                )));
            }
            for curve in [&gt.source, &gt.target].into_iter().flatten() {
                if curve.len() != resolution + 1 {
                    return Err(Error::invalid(format!(
                        "group {g} curve has {} knots, expected {}",
                        curve.len(),
                        resolution + 1
                    )));
                }
                if curve.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::invalid(format!(
                        "group {g} quantiles must lie in [0, 1]"
                    )));
                }
                if curve.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::invalid(format!(
                        "group {g} quantiles must be non-decreasing"
                    )));
                }
            }
        }
        Ok(TransportMap {
            alpha,
            resolution,
            groups,
        })
    }
}

/// Empirical quantiles of sorted `values` at knots `r / resolution` using
/// linear interpolation between order statistics.
fn quantile_knots(sorted: &[f64], resolution: usize) -> Vec<f64> {
    let n = sorted.len();
    (0..=resolution)
        .map(|r| {
            let h = (n - 1) as f64 * r as f64 / resolution as f64;
            let lo = h.floor() as usize;
            let frac = h - lo as f64;
            if lo + 1 < n {
                sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
            } else {
                sorted[n - 1]
            }
        })
        .collect()
}

/// Weighted median with ties broken toward the lower value.
fn weighted_median(pairs: &mut [(f64, f64)]) -> f64 {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for &(v, w) in pairs.iter() {
        acc += w;
        if acc >= total / 2.0 {
            return v;
        }
    }
    pairs.last().expect("non-empty weights").0
}

/// Fits the per-group transport maps for the given repair strength.
///
/// Groups present in the assignment but empty at fit time get the
/// identity map with a warning; groups holding a single distinct score
/// cannot support a quantile map and are an error.
pub fn fit_postprocessor(
    scores: &[f64],
    assignment: &GroupAssignment,
    alpha: f64,
    spec: &BarycenterSpec,
) -> Result<TransportMap> {
    if scores.len() != assignment.n() {
        return Err(Error::invalid(format!(
            "scores ({}) and assignment ({}) differ in length",
            scores.len(),
            assignment.n()
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    if spec.resolution < MIN_RESOLUTION {
        return Err(Error::invalid(format!(
            "quantile resolution must be at least {MIN_RESOLUTION}"
        )));
    }
    let k = assignment.k();
    let r = spec.resolution;

    let mut per_group: Vec<Vec<f64>> = vec![Vec::new(); k];
    for (i, &g) in assignment.labels().iter().enumerate() {
        let s = scores[i];
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidSample {
                index: i,
                reason: format!("score must lie in [0, 1], got {s}"),
            });
        }
        per_group[g].push(s);
    }

    let mut sources: Vec<Option<Vec<f64>>> = Vec::with_capacity(k);
    for (g, values) in per_group.iter_mut().enumerate() {
        if values.is_empty() {
            log::warn!("group {g} has no samples at fit time; using the identity map");
            sources.push(None);
            continue;
        }
        values.sort_by(f64::total_cmp);
        if values.first() == values.last() {
            return Err(Error::DegenerateGroup {
                group: g,
                reason: "needs at least two distinct scores".to_string(),
            });
        }
        sources.push(Some(quantile_knots(values, r)));
    }
    if sources.iter().all(Option::is_none) {
        return Err(Error::invalid("no group has samples to fit on"));
    }

    // Pointwise weighted median of the fitted group quantiles.
    let mut barycenter = Vec::with_capacity(r + 1);
    for knot in 0..=r {
        let mut pairs: Vec<(f64, f64)> = sources
            .iter()
            .enumerate()
            .filter_map(|(g, s)| s.as_ref().map(|q| (q[knot], assignment.weight(g))))
            .collect();
        barycenter.push(weighted_median(&mut pairs));
    }

    // Largest sup-norm gap between fitted group quantile functions.
    let mut d = 0.0f64;
    let fitted: Vec<&Vec<f64>> = sources.iter().flatten().collect();
    for a in 0..fitted.len() {
        for b in a + 1..fitted.len() {
            for knot in 0..=r {
                d = d.max((fitted[a][knot] - fitted[b][knot]).abs());
            }
        }
    }
    let t = if d <= alpha { 0.0 } else { 1.0 - alpha / d };

    let groups = sources
        .into_iter()
        .enumerate()
        .map(|(g, source)| match source {
            None => GroupTransport {
                weight: assignment.weight(g),
                source: None,
                target: None,
            },
            Some(q) => {
                let target: Vec<f64> = q
                    .iter()
                    .zip(&barycenter)
                    .map(|(&qv, &bv)| (1.0 - t) * qv + t * bv)
                    .collect();
                GroupTransport {
                    weight: assignment.weight(g),
                    source: Some(q),
                    target: Some(target),
                }
            }
        })
        .collect();
    Ok(TransportMap {
        alpha,
        resolution: r,
        groups,
    })
}

/// Model metrics before or after repair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DebiasMetrics {
    pub accuracy: f64,
    pub pr_auc: f64,
    pub hgr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DebiasRow {
    pub alpha: f64,
    pub metrics: DebiasMetrics,
}

/// Metrics table across repair strengths, evaluated on a held-out split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebiasReport {
    /// Unrepaired scores on the held-out split.
    pub baseline: DebiasMetrics,
    pub rows: Vec<DebiasRow>,
    /// Samples in the fit split.
    pub train_n: usize,
    /// Samples in the evaluation split.
    pub test_n: usize,
}

/// Number of equal-frequency bins used for the dependence estimate in
/// [`debias_report`].
pub const REPORT_HGR_BINS: usize = 20;

/// Fits transport maps on a random half split and evaluates accuracy,
/// PR-AUC and the dependence between repaired score and the sensitive
/// value on the held-out half, once per repair strength.
///
/// Predictions are thresholded at 0.5. The split is drawn from a seeded
/// shuffle, so the whole report is deterministic given `seed`.
pub fn debias_report(
    dataset: &Dataset,
    partition: &Partition,
    alphas: &[f64],
    spec: &BarycenterSpec,
    seed: u64,
) -> Result<DebiasReport> {
    use rand::prelude::*;

    let _ = dataset.score().ok_or(Error::MissingColumn("score"))?;
    if dataset.len() < 4 {
        return Err(Error::invalid("need at least 4 samples to split"));
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let half = dataset.len() / 2;
    let (train_idx, test_idx) = order.split_at(half);

    let train = dataset.subset(train_idx)?;
    let test = dataset.subset(test_idx)?;
    let train_assignment = assign_groups_with(&train, partition, Target::Y)?;
    let test_assignment = assign_groups_with(&test, partition, Target::Y)?;

    let evaluate = |scores: &[f64]| -> Result<DebiasMetrics> {
        let y_hat: Vec<u8> = scores.iter().map(|&s| u8::from(s > 0.5)).collect();
        Ok(DebiasMetrics {
            accuracy: accuracy(&y_hat, test.y())?,
            pr_auc: pr_auc(scores, test.y())?,
            hgr: hgr(scores, test.l1(), REPORT_HGR_BINS)?,
        })
    };

    let test_scores = test.score().expect("score column checked above");
    let baseline = evaluate(test_scores)?;
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let map = fit_postprocessor(
            train.score().expect("score column checked above"),
            &train_assignment,
            alpha,
            spec,
        )?;
        let repaired: Vec<f64> = test_scores
            .iter()
            .zip(test_assignment.labels())
            .map(|(&s, &g)| map.apply(s, g))
            .collect::<Result<_>>()?;
        rows.push(DebiasRow {
            alpha,
            metrics: evaluate(&repaired)?,
        });
    }
    Ok(DebiasReport {
        baseline,
        rows,
        train_n: train.len(),
        test_n: test.len(),
    })
}
