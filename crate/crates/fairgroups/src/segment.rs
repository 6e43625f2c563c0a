//! Partition search over the sensitive space.
//!
//! The main entry points are [`fairgroups_1d`] (exhaustive or
//! dynamic-programming search for the variance-maximizing segment
//! partition), [`kmeans_1d`] (clustering heuristic on per-bin deviations),
//! [`fairgroups_2d`] (guillotine rectangle search), the fixed-threshold
//! baselines, and the evaluation helpers [`transfer_evaluate`] and
//! [`bias_amplification_report`].

mod kmeans;
mod search2d;

pub use kmeans::kmeans_1d;
pub use search2d::fairgroups_2d;

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::metrics::{
    self, assignment_variance, group_stats, ConfidenceInterval, FairnessMeasure, GroupStats,
};
use crate::rangesum::{psi_matrix, PsiMatrix};
use crate::types::{
    assign_groups_clamped, assign_groups_with, Dataset, Grid, GridAxis, Partition, PartitionMeta,
    Target,
};

/// Candidates whose objectives differ by no more than this are considered
/// tied; ties resolve to the lexicographically smallest boundary vector.
pub const OBJECTIVE_TIE_EPS: f64 = 1e-12;

/// How a grid axis is derived for a search.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// `m` equal-width bins; bounds default to the data range.
    EqualWidth {
        m: usize,
        bounds: Option<(f64, f64)>,
    },
    Explicit {
        edges: Vec<f64>,
    },
}

impl GridSpec {
    pub fn resolve(&self, values: &[f64]) -> Result<GridAxis> {
        match self {
            GridSpec::EqualWidth { m, bounds } => {
                let (lo, hi) = match bounds {
                    Some(b) => *b,
                    None => {
                        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        (lo, hi)
                    }
                };
                GridAxis::equal_width(lo, hi, *m)
            }
            GridSpec::Explicit { edges } => GridAxis::new(edges.clone()),
        }
    }
}

/// Search method selector (used by front ends to dispatch).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    FairGroups,
    KMeans,
    Fixed,
}

/// Tie-breaking rule among objective-equal candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Smallest boundary-index vector in lexicographic order.
    #[default]
    LexSmallestBoundaries,
}

/// Parameters shared by the partition searches.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Number of groups to fit.
    pub k: usize,
    /// Grid for the (first) axis.
    pub grid: GridSpec,
    /// Grid for the second axis of 2-D searches.
    pub grid2: Option<GridSpec>,
    pub method: Method,
    pub target: Target,
    pub measure: FairnessMeasure,
    pub tie_break: TieBreak,
    /// Candidates containing a group with fewer samples are skipped.
    pub min_group_count: usize,
    /// Use the `O(M^2 K)` dynamic program when the measure has zero
    /// weighted mean (same optimum as exhaustive enumeration).
    pub use_fast_path: bool,
    /// Worker threads for exhaustive candidate evaluation.
    pub threads: usize,
    /// Confidence level of the per-group intervals in the result.
    pub ci_level: f64,
}

impl SearchConfig {
    pub fn new(k: usize) -> Self {
        SearchConfig {
            k,
            grid: GridSpec::EqualWidth {
                m: 100,
                bounds: None,
            },
            grid2: None,
            method: Method::FairGroups,
            target: Target::Y,
            measure: FairnessMeasure::OneVsAllDi,
            tie_break: TieBreak::LexSmallestBoundaries,
            min_group_count: 1,
            use_fast_path: true,
            threads: 1,
            ci_level: 0.95,
        }
    }

    pub fn with_grid(mut self, grid: GridSpec) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_grid2(mut self, grid: GridSpec) -> Self {
        self.grid2 = Some(grid);
        self
    }

    pub fn with_target(mut self, target: Target) -> Self {
        self.target = target;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn with_fast_path(mut self, on: bool) -> Self {
        self.use_fast_path = on;
        self
    }
}

/// Search telemetry.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchDiagnostics {
    /// Complete candidate partitions whose objective was computed.
    pub candidates_evaluated: u64,
    /// Set when a clustering produced groups that are not connected.
    pub disconnected_clusters: bool,
}

/// A fitted partition with its objective and per-group statistics.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub partition: Partition,
    /// Achieved inter-group variance.
    pub objective: f64,
    pub stats: GroupStats,
    pub diagnostics: SearchDiagnostics,
}

/// Routes to the search selected by `config.method` and the dataset
/// dimension. Fixed partitions take explicit thresholds and are built
/// with [`fixed_partition`] / [`fixed_partition_1d`] instead.
pub fn fit_partition(dataset: &Dataset, config: &SearchConfig) -> Result<SearchResult> {
    match (config.method, dataset.dimension()) {
        (Method::FairGroups, 2) => fairgroups_2d(dataset, config),
        (Method::FairGroups, _) => fairgroups_1d(dataset, config),
        (Method::KMeans, _) => kmeans_1d(dataset, config),
        (Method::Fixed, _) => Err(Error::invalid(
            "fixed partitions take explicit thresholds; use fixed_partition_1d / fixed_partition"
                .to_string(),
        )),
    }
}

/// Exhaustive (or equivalent dynamic-programming) search for the segment
/// partition maximizing the inter-group variance of the fairness measure.
///
/// All `C(M-1, K-1)` placements of `K - 1` interior cuts on the grid are
/// considered, skipping placements with an undersized group; the result is
/// exact up to the grid resolution. With the default zero-mean measure the
/// objective is additive over segments and an `O(M^2 K)` dynamic program
/// finds the same optimum; disable `use_fast_path` to force enumeration.
pub fn fairgroups_1d(dataset: &Dataset, config: &SearchConfig) -> Result<SearchResult> {
    if dataset.dimension() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: dataset.dimension(),
        });
    }
    let axis = config.grid.resolve(dataset.l1())?;
    let m = axis.m();
    if config.k < 1 || config.k > m {
        return Err(Error::invalid(format!(
            "need 1 <= K <= M, got K = {} with M = {m}",
            config.k
        )));
    }
    let grid = Grid::new_1d(axis)?;
    let psi = psi_matrix(dataset, &grid, config.target)?;
    let min_count = config.min_group_count.max(1) as f64;

    let (boundaries, objective, evaluated) =
        if config.use_fast_path && config.measure.is_zero_mean() {
            dp_search(&psi, config.k, min_count)?
        } else {
            enumerate_search(&psi, config.k, min_count, config.threads.max(1))?
        };

    let mut partition = Partition::segments(grid, boundaries)?;
    let assignment = assign_groups_with(dataset, &partition, config.target)?;
    let stats = group_stats(&assignment, config.ci_level)?;
    partition.set_meta(PartitionMeta {
        method: Some("fairgroups".into()),
        measure: Some(config.measure.name().into()),
        objective: Some(objective),
        n: Some(dataset.len()),
        seed: None,
        timestamp: None,
    });
    Ok(SearchResult {
        partition,
        objective,
        stats,
        diagnostics: SearchDiagnostics {
            candidates_evaluated: evaluated,
            disconnected_clusters: false,
        },
    })
}

/// Weight and deviation of the segment spanning edges `e..j`
/// (bins `e..j-1`); `None` when the segment is undersized or undefined.
#[inline]
fn seg_wp(psi: &PsiMatrix, min_count: f64, e: usize, j: usize) -> Option<(f64, f64)> {
    if psi.count(e, j - 1) < min_count {
        return None;
    }
    Some((psi.weight(e, j - 1), psi.psi(e, j - 1)?))
}

/// Suffix dynamic program over segment ends, exact for zero-mean measures
/// where the objective decomposes as `sum_k w_k psi_k^2`.
fn dp_search(psi: &PsiMatrix, k: usize, min_count: f64) -> Result<(Vec<usize>, f64, u64)> {
    let m = psi.m();
    let neg = f64::NEG_INFINITY;
    // suffix[r][e]: best objective over bins e.. with r groups.
    let mut suffix = vec![vec![neg; m + 1]; k + 1];
    suffix[0][m] = 0.0;
    let mut evaluated = 0u64;
    for r in 1..=k {
        for e in (0..=m - r).rev() {
            let mut best = neg;
            for j in e + 1..=m - (r - 1) {
                if suffix[r - 1][j] == neg {
                    continue;
                }
                if let Some((w, p)) = seg_wp(psi, min_count, e, j) {
                    evaluated += 1;
                    let v = w * p * p + suffix[r - 1][j];
                    if v > best {
                        best = v;
                    }
                }
            }
            suffix[r][e] = best;
        }
    }
    if suffix[k][0] == neg {
        return Err(Error::Infeasible(format!(
            "no placement of {k} non-empty groups exists on this grid"
        )));
    }

    // Forward reconstruction picks the lexicographically smallest boundary
    // vector within the tie window.
    let mut boundaries = vec![0usize];
    let mut e = 0usize;
    let mut r = k;
    while r >= 2 {
        let target = suffix[r][e];
        let mut chosen = None;
        for j in e + 1..=m - (r - 1) {
            if suffix[r - 1][j] == neg {
                continue;
            }
            if let Some((w, p)) = seg_wp(psi, min_count, e, j) {
                if w * p * p + suffix[r - 1][j] >= target - OBJECTIVE_TIE_EPS {
                    chosen = Some(j);
                    break;
                }
            }
        }
        let j = chosen.expect("dp table admits a reconstruction");
        boundaries.push(j);
        e = j;
        r -= 1;
    }
    boundaries.push(m);
    Ok((boundaries, suffix[k][0], evaluated))
}

#[derive(Debug, Clone)]
struct Candidate {
    objective: f64,
    cuts: Vec<usize>,
}

/// Replaces `best` when `obj` beats it by more than the tie window, or
/// ties within the window with a lexicographically smaller cut vector.
fn consider(best: &mut Option<Candidate>, objective: f64, cuts: &[usize]) {
    match best {
        None => {
            *best = Some(Candidate {
                objective,
                cuts: cuts.to_vec(),
            })
        }
        Some(b) => {
            let wins = objective > b.objective + OBJECTIVE_TIE_EPS
                || (objective >= b.objective - OBJECTIVE_TIE_EPS && cuts < b.cuts.as_slice());
            if wins {
                b.objective = objective;
                b.cuts.clear();
                b.cuts.extend_from_slice(cuts);
            }
        }
    }
}

fn merge(best: &mut Option<Candidate>, other: Option<Candidate>) {
    if let Some(c) = other {
        consider(best, c.objective, &c.cuts);
    }
}

/// Depth-first enumeration of the remaining cuts, carrying partial sums
/// `sum w psi` and `sum w psi^2` so each complete candidate costs O(1).
/// The objective is `sum w psi^2 - (sum w psi)^2`, the variance identity.
#[allow(clippy::too_many_arguments)]
fn explore(
    psi: &PsiMatrix,
    min_count: f64,
    m: usize,
    k: usize,
    start: usize,
    sw: f64,
    sw2: f64,
    cuts: &mut Vec<usize>,
    best: &mut Option<Candidate>,
    evaluated: &mut u64,
) {
    if cuts.len() == k - 1 {
        if let Some((w, p)) = seg_wp(psi, min_count, start, m) {
            *evaluated += 1;
            let swt = sw + w * p;
            let sw2t = sw2 + w * p * p;
            consider(best, sw2t - swt * swt, cuts);
        }
        return;
    }
    let remaining = (k - 1) - cuts.len();
    for j in start + 1..=m - remaining {
        if let Some((w, p)) = seg_wp(psi, min_count, start, j) {
            cuts.push(j);
            explore(
                psi,
                min_count,
                m,
                k,
                j,
                sw + w * p,
                sw2 + w * p * p,
                cuts,
                best,
                evaluated,
            );
            cuts.pop();
        }
    }
}

/// Raw exhaustive enumeration over all cut placements, parallelized over
/// the leading cut. Worker results are folded in leading-cut order with
/// the deterministic tie-break, so the outcome is independent of the
/// number of threads.
fn enumerate_search(
    psi: &PsiMatrix,
    k: usize,
    min_count: f64,
    threads: usize,
) -> Result<(Vec<usize>, f64, u64)> {
    let m = psi.m();
    let mut best: Option<Candidate> = None;
    let mut evaluated = 0u64;

    if k == 1 {
        if let Some((w, p)) = seg_wp(psi, min_count, 0, m) {
            evaluated = 1;
            consider(&mut best, w * p * p - (w * p) * (w * p), &[]);
        }
    } else {
        let leads: Vec<usize> = (1..=m - (k - 1)).collect();
        let run_lead = |lead: usize| -> (Option<Candidate>, u64) {
            let mut local_best = None;
            let mut local_eval = 0u64;
            if let Some((w, p)) = seg_wp(psi, min_count, 0, lead) {
                let mut cuts = vec![lead];
                explore(
                    psi,
                    min_count,
                    m,
                    k,
                    lead,
                    w * p,
                    w * p * p,
                    &mut cuts,
                    &mut local_best,
                    &mut local_eval,
                );
            }
            (local_best, local_eval)
        };

        if threads <= 1 {
            for &lead in &leads {
                let (local, count) = run_lead(lead);
                merge(&mut best, local);
                evaluated += count;
            }
        } else {
            let next = AtomicUsize::new(0);
            let mut slots: Vec<(usize, Option<Candidate>, u64)> = std::thread::scope(|scope| {
                let handles: Vec<_> = (0..threads)
                    .map(|_| {
                        scope.spawn(|| {
                            let mut out = Vec::new();
                            loop {
                                let i = next.fetch_add(1, Ordering::Relaxed);
                                if i >= leads.len() {
                                    break;
                                }
                                let (local, count) = run_lead(leads[i]);
                                out.push((i, local, count));
                            }
                            out
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .flat_map(|h| h.join().expect("search worker panicked"))
                    .collect()
            });
            slots.sort_by_key(|(i, _, _)| *i);
            for (_, local, count) in slots {
                merge(&mut best, local);
                evaluated += count;
            }
        }
    }

    let best = best.ok_or_else(|| {
        Error::Infeasible(format!(
            "no placement of {k} non-empty groups exists on this grid"
        ))
    })?;
    let mut boundaries = Vec::with_capacity(k + 1);
    boundaries.push(0);
    boundaries.extend_from_slice(&best.cuts);
    boundaries.push(m);
    Ok((boundaries, best.objective, evaluated))
}

/// Named fixed-threshold schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedScheme {
    /// Six ITA groups at thresholds -30, 10, 28, 41, 55 degrees over
    /// [-90, 90].
    FitzpatrickIta,
    /// Two groups split at L = 60 over [0, 100].
    LightDarkL60,
    /// Four quadrants at L = 60, h = 55 over [0, 100] x [0, 90].
    Default2d,
}

/// Builds a named fixed partition with its canonical bounds.
pub fn fixed_partition(scheme: FixedScheme) -> Partition {
    let p = match scheme {
        FixedScheme::FitzpatrickIta => {
            fixed_partition_1d(-90.0, 90.0, &[-30.0, 10.0, 28.0, 41.0, 55.0])
        }
        FixedScheme::LightDarkL60 => fixed_partition_1d(0.0, 100.0, &[60.0]),
        FixedScheme::Default2d => fixed_partition_2d((0.0, 100.0), (0.0, 90.0), &[60.0], &[55.0]),
    };
    let mut p = p.expect("canonical schemes are valid");
    let name = match scheme {
        FixedScheme::FitzpatrickIta => "fixed:fitzpatrick-ita",
        FixedScheme::LightDarkL60 => "fixed:l60",
        FixedScheme::Default2d => "fixed:default-2d",
    };
    p.set_meta(PartitionMeta {
        method: Some(name.into()),
        ..PartitionMeta::default()
    });
    p
}

/// Segment partition cut at the given thresholds, which must lie strictly
/// inside `(lo, hi)` in increasing order.
pub fn fixed_partition_1d(lo: f64, hi: f64, thresholds: &[f64]) -> Result<Partition> {
    let mut edges = Vec::with_capacity(thresholds.len() + 2);
    edges.push(lo);
    for &t in thresholds {
        if !(t > lo && t < hi) {
            return Err(Error::invalid(format!(
                "threshold {t} lies outside the data range ({lo}, {hi})"
            )));
        }
        edges.push(t);
    }
    edges.push(hi);
    let axis = GridAxis::new(edges)?;
    let k = axis.m();
    let grid = Grid::new_1d(axis)?;
    Partition::segments(grid, (0..=k).collect())
}

/// Cross-product rectangle partition from per-axis thresholds.
pub fn fixed_partition_2d(
    x_bounds: (f64, f64),
    y_bounds: (f64, f64),
    x_thresholds: &[f64],
    y_thresholds: &[f64],
) -> Result<Partition> {
    let build_axis = |(lo, hi): (f64, f64), ts: &[f64]| -> Result<GridAxis> {
        let mut edges = Vec::with_capacity(ts.len() + 2);
        edges.push(lo);
        for &t in ts {
            if !(t > lo && t < hi) {
                return Err(Error::invalid(format!(
                    "threshold {t} lies outside the data range ({lo}, {hi})"
                )));
            }
            edges.push(t);
        }
        edges.push(hi);
        GridAxis::new(edges)
    };
    let ax = build_axis(x_bounds, x_thresholds)?;
    let ay = build_axis(y_bounds, y_thresholds)?;
    let (ml, mh) = (ax.m(), ay.m());
    let grid = Grid::new_2d(ax, ay)?;
    let mut rects = Vec::with_capacity(ml * mh);
    for x in 0..ml {
        for y in 0..mh {
            rects.push(crate::types::GridRect {
                x0: x,
                x1: x + 1,
                y0: y,
                y1: y + 1,
            });
        }
    }
    Partition::rectangles(grid, rects)
}

/// Result of applying a fitted partition to another dataset.
#[derive(Debug, Clone)]
pub struct TransferReport {
    pub variance: f64,
    pub stats: GroupStats,
    /// Samples outside the fitted cover, clamped into boundary groups.
    pub clamped_samples: usize,
}

/// Re-evaluates a fitted partition on a new dataset: samples are
/// reassigned (clamping any that fall outside the fitted cover) and the
/// variance and per-group statistics are recomputed.
pub fn transfer_evaluate(
    partition: &Partition,
    dataset: &Dataset,
    target: Target,
    level: f64,
) -> Result<TransferReport> {
    let (assignment, clamped_samples) = assign_groups_clamped(dataset, partition, target)?;
    Ok(TransferReport {
        variance: assignment_variance(&assignment, FairnessMeasure::OneVsAllDi)?,
        stats: group_stats(&assignment, level)?,
        clamped_samples,
    })
}

/// Paired deviations of outcome and prediction for one group.
#[derive(Debug, Clone)]
pub struct BiasAmplificationRow {
    pub group: usize,
    pub phi_y: f64,
    pub ci_y: ConfidenceInterval,
    pub phi_y_hat: f64,
    pub ci_y_hat: ConfidenceInterval,
    /// Set when the two intervals are disjoint.
    pub amplified: bool,
}

#[derive(Debug, Clone)]
pub struct BiasAmplificationReport {
    pub rows: Vec<BiasAmplificationRow>,
    pub level: f64,
}

/// Compares per-group deviations computed on the observed outcome with
/// those computed on the model prediction, flagging groups whose
/// confidence intervals do not overlap.
pub fn bias_amplification_report(
    dataset: &Dataset,
    partition: &Partition,
    level: f64,
) -> Result<BiasAmplificationReport> {
    if dataset.y_hat().is_none() {
        return Err(Error::MissingColumn("y_hat"));
    }
    let a_y = assign_groups_with(dataset, partition, Target::Y)?;
    let a_hat = assign_groups_with(dataset, partition, Target::YHat)?;
    let mut rows = Vec::with_capacity(partition.k());
    for k in 0..partition.k() {
        let phi_y = metrics::phi(&a_y, k)?;
        let phi_y_hat = metrics::phi(&a_hat, k)?;
        let ci_y = metrics::phi_confidence_interval(&a_y, k, level)?;
        let ci_y_hat = metrics::phi_confidence_interval(&a_hat, k, level)?;
        let amplified = ci_y.low > ci_y_hat.high || ci_y_hat.low > ci_y.high;
        rows.push(BiasAmplificationRow {
            group: k,
            phi_y,
            ci_y,
            phi_y_hat,
            ci_y_hat,
            amplified,
        });
    }
    Ok(BiasAmplificationReport { rows, level })
}
