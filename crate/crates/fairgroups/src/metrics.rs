//! Fairness measures, the partition-variance objective, comparison and
//! model-evaluation metrics, and delta-method confidence intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::types::{assign_groups_with, Dataset, GroupAssignment, Partition, Target};

/// Per-group fairness measure used by the partition searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[non_exhaustive]
pub enum FairnessMeasure {
    /// One-vs-all disparate impact: group positive rate minus the overall
    /// positive rate. Its group-weighted mean is zero by construction.
    #[default]
    #[serde(rename = "one_vs_all_di")]
    OneVsAllDi,
}

impl FairnessMeasure {
    /// Whether the weighted mean of group values vanishes identically,
    /// which makes the variance objective additive over groups.
    pub fn is_zero_mean(&self) -> bool {
        match self {
            FairnessMeasure::OneVsAllDi => true,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FairnessMeasure::OneVsAllDi => "one_vs_all_di",
        }
    }
}

/// Two-sided confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub low: f64,
    pub high: f64,
    pub level: f64,
}

/// `phi(k) = P(target = 1 | group k) - P(target = 1)`.
pub fn phi(assignment: &GroupAssignment, k: usize) -> Result<f64> {
    let rate = assignment.rate(k).ok_or(Error::EmptyGroup { group: k })?;
    Ok(rate - assignment.overall_rate())
}

/// All group deviations; errors if any group is empty.
pub fn phis(assignment: &GroupAssignment) -> Result<Vec<f64>> {
    (0..assignment.k()).map(|k| phi(assignment, k)).collect()
}

/// Inter-group variance of the fairness measure under `partition`:
/// `sum_k w_k (phi(k) - phi_bar)^2` with `phi_bar = sum_k w_k phi(k)`
/// (identically zero for the one-vs-all measure).
pub fn partition_variance(
    dataset: &Dataset,
    partition: &Partition,
    measure: FairnessMeasure,
    target: Target,
) -> Result<f64> {
    let assignment = assign_groups_with(dataset, partition, target)?;
    assignment_variance(&assignment, measure)
}

/// The variance objective computed from an existing assignment.
pub fn assignment_variance(assignment: &GroupAssignment, _measure: FairnessMeasure) -> Result<f64> {
    let phis = phis(assignment)?;
    let mean: f64 = phis
        .iter()
        .enumerate()
        .map(|(k, p)| assignment.weight(k) * p)
        .sum();
    Ok(phis
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let d = p - mean;
            assignment.weight(k) * d * d
        })
        .sum())
}

/// Both sides of the two-group identity `variance = pi (1 - pi) DI^2`.
#[derive(Debug, Clone, Copy)]
pub struct BinaryDiIdentity {
    /// Variance computed directly from the group deviations.
    pub variance: f64,
    /// Weight of the second group.
    pub pi: f64,
    /// Difference of positive rates between the two groups.
    pub di: f64,
}

impl BinaryDiIdentity {
    /// `pi (1 - pi) DI^2`, the closed form the direct variance must equal.
    pub fn product_form(&self) -> f64 {
        self.pi * (1.0 - self.pi) * self.di * self.di
    }
}

/// For a two-group partition, returns the directly computed variance
/// together with `pi` and `DI` so callers can assert the identity.
pub fn binary_di_identity_check(
    dataset: &Dataset,
    partition: &Partition,
    target: Target,
) -> Result<BinaryDiIdentity> {
    if partition.k() != 2 {
        return Err(Error::invalid(format!(
            "identity check needs K = 2, got K = {}",
            partition.k()
        )));
    }
    let assignment = assign_groups_with(dataset, partition, target)?;
    let r0 = assignment.rate(0).ok_or(Error::EmptyGroup { group: 0 })?;
    let r1 = assignment.rate(1).ok_or(Error::EmptyGroup { group: 1 })?;
    Ok(BinaryDiIdentity {
        variance: assignment_variance(&assignment, FairnessMeasure::OneVsAllDi)?,
        pi: assignment.weight(1),
        di: r1 - r0,
    })
}

/// Fraction of sample pairs on which the two assignments agree about
/// same-group versus different-group membership. Computed through the
/// contingency table in `O(N + K_a K_b)`.
pub fn rand_index(a: &GroupAssignment, b: &GroupAssignment) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::invalid(format!(
            "assignments have different sample counts: {} vs {}",
            a.n(),
            b.n()
        )));
    }
    let n = a.n() as u64;
    if n < 2 {
        return Err(Error::invalid("rand index needs at least two samples"));
    }
    let (ka, kb) = (a.k(), b.k());
    let mut table = vec![0u64; ka * kb];
    for (&la, &lb) in a.labels().iter().zip(b.labels()) {
        table[la * kb + lb] += 1;
    }
    let choose2 = |v: u64| v * v.saturating_sub(1) / 2;
    let same_both: u64 = table.iter().map(|&v| choose2(v)).sum();
    let same_a: u64 = a.counts().iter().map(|&v| choose2(v as u64)).sum();
    let same_b: u64 = b.counts().iter().map(|&v| choose2(v as u64)).sum();
    let pairs = choose2(n);
    // Agreements: together in both, or apart in both.
    let agree = pairs + 2 * same_both - same_a - same_b;
    Ok(agree as f64 / pairs as f64)
}

/// Asymptotic confidence interval for `phi(k)`.
///
/// The four cell counts (in-group positive/negative, out-group
/// positive/negative) are treated as one multinomial draw; `phi` is a
/// smooth function of the cell frequencies and its variance follows from
/// the delta method: `Var = (sum_i f_i g_i^2 - (sum_i f_i g_i)^2) / N`
/// where `g` is the gradient of `phi` in the frequencies.
pub fn phi_confidence_interval(
    assignment: &GroupAssignment,
    k: usize,
    level: f64,
) -> Result<ConfidenceInterval> {
    if !(0.0 < level && level < 1.0) {
        return Err(Error::invalid(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    let n_k = assignment.counts()[k];
    if n_k == 0 {
        return Err(Error::EmptyGroup { group: k });
    }
    if n_k < 30 {
        log::warn!("group {k} has only {n_k} samples; the asymptotic interval may be unreliable");
    }
    let n = assignment.n() as f64;
    let estimate = phi(assignment, k)?;

    // Cell frequencies.
    let fa = assignment.positives()[k] as f64 / n;
    let fb = (n_k - assignment.positives()[k]) as f64 / n;
    let fc = (assignment.total_positives() - assignment.positives()[k]) as f64 / n;
    let fd = 1.0 - fa - fb - fc;
    let s = fa + fb;

    // Gradient of phi = fa / (fa + fb) - (fa + fc).
    let ga = fb / (s * s) - 1.0;
    let gb = -fa / (s * s);
    let gc = -1.0;
    let gd = 0.0;

    let cells = [(fa, ga), (fb, gb), (fc, gc), (fd, gd)];
    let mean: f64 = cells.iter().map(|(f, g)| f * g).sum();
    let second: f64 = cells.iter().map(|(f, g)| f * g * g).sum();
    let variance = ((second - mean * mean) / n).max(0.0);

    let z = Normal::standard().inverse_cdf(0.5 + level / 2.0);
    let half = z * variance.sqrt();
    Ok(ConfidenceInterval {
        low: estimate - half,
        high: estimate + half,
        level,
    })
}

/// Per-group weight, rate, deviation and confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStat {
    pub weight: f64,
    pub rate: f64,
    pub phi: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Group-level summary of a partition on a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub groups: Vec<GroupStat>,
    pub overall_rate: f64,
    pub level: f64,
}

/// Builds [`GroupStats`] from an assignment at the given confidence level.
pub fn group_stats(assignment: &GroupAssignment, level: f64) -> Result<GroupStats> {
    let mut groups = Vec::with_capacity(assignment.k());
    for k in 0..assignment.k() {
        let rate = assignment.rate(k).ok_or(Error::EmptyGroup { group: k })?;
        let ci = phi_confidence_interval(assignment, k, level)?;
        groups.push(GroupStat {
            weight: assignment.weight(k),
            rate,
            phi: phi(assignment, k)?,
            ci_low: ci.low,
            ci_high: ci.high,
        });
    }
    Ok(GroupStats {
        groups,
        overall_rate: assignment.overall_rate(),
        level,
    })
}

/// Binned estimate of the maximal-correlation dependence between two real
/// variables, in `[0, 1]`.
///
/// Both variables are discretized into `bins` equal-frequency bins; the
/// normalized joint matrix `Q_ij = p_ij / sqrt(p_i. p_.j)` has largest
/// singular value 1, and its second-largest singular value is the
/// estimate. Constant inputs carry no dependence and return 0.
pub fn hgr(x: &[f64], y: &[f64], bins: usize) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "inputs differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if bins < 2 {
        return Err(Error::invalid("need at least 2 bins"));
    }
    let n = x.len();
    if n < 2 * bins {
        return Err(Error::invalid(format!(
            "need at least {} samples for {bins} bins",
            2 * bins
        )));
    }
    if !x.iter().chain(y).all(|v| v.is_finite()) {
        return Err(Error::invalid("inputs must be finite"));
    }
    let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if constant(x) || constant(y) {
        log::warn!("constant input to the dependence estimate; returning 0");
        return Ok(0.0);
    }

    let bx = equal_frequency_bins(x, bins);
    let by = equal_frequency_bins(y, bins);
    let mut joint = vec![0.0f64; bins * bins];
    for (&i, &j) in bx.iter().zip(&by) {
        joint[i * bins + j] += 1.0;
    }
    let n = n as f64;
    let mut row = vec![0.0; bins];
    let mut col = vec![0.0; bins];
    for i in 0..bins {
        for j in 0..bins {
            row[i] += joint[i * bins + j];
            col[j] += joint[i * bins + j];
        }
    }
    let mut q = nalgebra::DMatrix::<f64>::zeros(bins, bins);
    for i in 0..bins {
        for j in 0..bins {
            let denom = (row[i] * col[j]).sqrt();
            if denom > 0.0 {
                q[(i, j)] = joint[i * bins + j] / n / (denom / n);
            }
        }
    }
    let svd = q.svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv.get(1).copied().unwrap_or(0.0).clamp(0.0, 1.0))
}

/// Rank-based equal-frequency binning; ties split by original index.
fn equal_frequency_bins(v: &[f64], bins: usize) -> Vec<usize> {
    let n = v.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    let mut out = vec![0usize; n];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = rank * bins / n;
    }
    out
}

/// Fraction of positions where prediction and outcome agree.
pub fn accuracy(y_hat: &[u8], y: &[u8]) -> Result<f64> {
    if y_hat.len() != y.len() || y.is_empty() {
        return Err(Error::invalid(
            "accuracy needs equal-length non-empty inputs",
        ));
    }
    let agree = y_hat.iter().zip(y).filter(|(a, b)| a == b).count();
    Ok(agree as f64 / y.len() as f64)
}

/// Area under the precision-recall curve by trapezoidal integration.
///
/// Thresholds sweep the distinct scores in descending order with
/// "positive" meaning `score >= threshold`; the curve is anchored at
/// recall 0 with the precision of the highest-threshold point.
pub fn pr_auc(score: &[f64], y: &[u8]) -> Result<f64> {
    if score.len() != y.len() || y.is_empty() {
        return Err(Error::invalid("pr_auc needs equal-length non-empty inputs"));
    }
    let total_pos = y.iter().filter(|&&v| v == 1).count();
    if total_pos == 0 {
        return Err(Error::invalid(
            "pr_auc is undefined without positive labels".to_string(),
        ));
    }
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));

    let mut tp = 0usize;
    let mut predicted = 0usize;
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let threshold = score[order[i]];
        while i < order.len() && score[order[i]] == threshold {
            predicted += 1;
            if y[order[i]] == 1 {
                tp += 1;
            }
            i += 1;
        }
        let recall = tp as f64 / total_pos as f64;
        let precision = tp as f64 / predicted as f64;
        points.push((recall, precision));
    }

    let mut auc = 0.0;
    let mut prev = (0.0, points[0].1);
    for &(r, p) in &points {
        auc += (r - prev.0) * (p + prev.1) / 2.0;
        prev = (r, p);
    }
    Ok(auc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{assign_groups, Grid, GridAxis};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn two_group_dataset(rates: (f64, f64), n_per: usize, seed: u64) -> (Dataset, Partition) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut l = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n_per {
            l.push(rng.random::<f64>() * 50.0);
            y.push(u8::from(rng.random::<f64>() < rates.0));
        }
        for _ in 0..n_per {
            l.push(50.0 + rng.random::<f64>() * 50.0);
            y.push(u8::from(rng.random::<f64>() < rates.1));
        }
        let d = Dataset::new_1d(l, y, None, None).unwrap();
        let grid = Grid::new_1d(GridAxis::new(vec![0.0, 50.0, 100.0]).unwrap()).unwrap();
        let p = Partition::segments(grid, vec![0, 1, 2]).unwrap();
        (d, p)
    }

    /// Exact two-group dataset: rates 0.2 and 0.8 with equal weights.
    fn exact_balanced() -> (Dataset, Partition) {
        let mut l = Vec::new();
        let mut y = Vec::new();
        for i in 0..10 {
            l.push(1.0 + i as f64);
            y.push(u8::from(i < 2));
            l.push(51.0 + i as f64);
            y.push(u8::from(i < 8));
        }
        let d = Dataset::new_1d(l, y, None, None).unwrap();
        let grid = Grid::new_1d(GridAxis::new(vec![0.0, 50.0, 100.0]).unwrap()).unwrap();
        let p = Partition::segments(grid, vec![0, 1, 2]).unwrap();
        (d, p)
    }

    #[test]
    fn phi_of_benchmark_bottom_group() {
        // Step population: rate 0.1 on [0, 20] against overall 0.514.
        let d = crate::synth::generate_step_dataset(
            &crate::synth::benchmark_step_spec(),
            &crate::synth::benchmark_uniform(),
            50_000,
            19,
        )
        .unwrap();
        let gt = crate::synth::benchmark_ground_truth_partition();
        let a = assign_groups(&d, &gt).unwrap();
        assert!((phi(&a, 0).unwrap() - (0.1 - 0.514)).abs() <= 0.01);
    }

    #[test]
    fn phi_is_zero_for_whole_population_group() {
        let (d, _) = exact_balanced();
        let grid = Grid::new_1d(GridAxis::new(vec![0.0, 50.0, 100.0]).unwrap()).unwrap();
        let p = Partition::segments(grid, vec![0, 2]).unwrap();
        let a = assign_groups(&d, &p).unwrap();
        assert_eq!(phi(&a, 0).unwrap(), 0.0);
    }

    #[test]
    fn weighted_phi_mean_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let n = rng.random_range(10..200);
            let l: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 100.0).collect();
            let y: Vec<u8> = (0..n)
                .map(|_| u8::from(rng.random::<f64>() < 0.3))
                .collect();
            let d = Dataset::new_1d(l, y, None, None).unwrap();
            let m = rng.random_range(2..12);
            let grid = Grid::new_1d(GridAxis::equal_width(-1.0, 101.0, m).unwrap()).unwrap();
            let mut cuts = vec![0, m];
            for j in 1..m {
                if rng.random::<f64>() < 0.4 {
                    cuts.push(j);
                }
            }
            cuts.sort_unstable();
            cuts.dedup();
            let p = Partition::segments(grid, cuts).unwrap();
            let a = assign_groups(&d, &p).unwrap();
            if let Ok(phis) = phis(&a) {
                let mean: f64 = phis.iter().enumerate().map(|(k, v)| a.weight(k) * v).sum();
                assert!(mean.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn variance_of_single_group_is_zero() {
        let (d, _) = exact_balanced();
        let grid = Grid::new_1d(GridAxis::new(vec![0.0, 50.0, 100.0]).unwrap()).unwrap();
        let p = Partition::segments(grid, vec![0, 2]).unwrap();
        assert_eq!(
            partition_variance(&d, &p, FairnessMeasure::OneVsAllDi, Target::Y).unwrap(),
            0.0
        );
    }

    #[test]
    fn binary_identity_exact_case() {
        // pi = 0.5, rates 0.2 / 0.8: DI = 0.6, variance = 0.25 * 0.36.
        let (d, p) = exact_balanced();
        let id = binary_di_identity_check(&d, &p, Target::Y).unwrap();
        assert!((id.variance - 0.09).abs() < 1e-12);
        assert!((id.di - 0.6).abs() < 1e-12);
        assert!((id.variance - id.product_form()).abs() < 1e-12);
    }

    #[test]
    fn binary_identity_zero_di() {
        let (d, p) = two_group_dataset((0.5, 0.5), 400, 23);
        let id = binary_di_identity_check(&d, &p, Target::Y).unwrap();
        assert!((id.variance - id.product_form()).abs() < 1e-12);
        if id.di == 0.0 {
            assert_eq!(id.variance, 0.0);
        }
    }

    #[test]
    fn rand_index_identical_and_opposite() {
        let pos = &[false, true];
        let a = GroupAssignment::from_labels(vec![0, 0], 1, pos).unwrap();
        let b = GroupAssignment::from_labels(vec![0, 1], 2, pos).unwrap();
        assert_eq!(rand_index(&a, &a).unwrap(), 1.0);
        assert_eq!(rand_index(&a, &b).unwrap(), 0.0);
        assert_eq!(rand_index(&b, &a).unwrap(), 0.0);
    }

    #[test]
    fn rand_index_matches_naive_pair_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 50;
        let pos = vec![false; n];
        let la: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let lb: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let a = GroupAssignment::from_labels(la.clone(), 4, &pos).unwrap();
        let b = GroupAssignment::from_labels(lb.clone(), 3, &pos).unwrap();
        let mut agree = 0u64;
        let mut pairs = 0u64;
        for i in 0..n {
            for j in 0..i {
                pairs += 1;
                if (la[i] == la[j]) == (lb[i] == lb[j]) {
                    agree += 1;
                }
            }
        }
        let expect = agree as f64 / pairs as f64;
        assert!((rand_index(&a, &b).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn ci_degenerates_when_group_is_population() {
        let (d, _) = exact_balanced();
        let grid = Grid::new_1d(GridAxis::new(vec![0.0, 50.0, 100.0]).unwrap()).unwrap();
        let p = Partition::segments(grid, vec![0, 2]).unwrap();
        let a = assign_groups(&d, &p).unwrap();
        let ci = phi_confidence_interval(&a, 0, 0.95).unwrap();
        assert_eq!((ci.low, ci.high), (0.0, 0.0));
    }

    #[test]
    fn ci_matches_bootstrap_width() {
        // Group [0, 20] of the step population, N = 2000.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let n = 2000;
        let mut l = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let v = rng.random::<f64>() * 100.0;
            let p = if v <= 20.0 {
                0.1
            } else if v <= 30.0 {
                0.3
            } else if v <= 55.0 {
                0.5
            } else if v <= 88.0 {
                0.7
            } else {
                0.9
            };
            l.push(v);
            y.push(u8::from(rng.random::<f64>() < p));
        }
        let d = Dataset::new_1d(l.clone(), y.clone(), None, None).unwrap();
        let grid = Grid::new_1d(GridAxis::new(vec![0.0, 20.0, 100.0]).unwrap()).unwrap();
        let p = Partition::segments(grid, vec![0, 1, 2]).unwrap();
        let a = assign_groups(&d, &p).unwrap();
        let ci = phi_confidence_interval(&a, 0, 0.95).unwrap();

        // Bootstrap the four multinomial cells.
        let cells: Vec<u8> = (0..n)
            .map(|i| match (l[i] <= 20.0, y[i] == 1) {
                (true, true) => 0,
                (true, false) => 1,
                (false, true) => 2,
                (false, false) => 3,
            })
            .collect();
        let reps = 10_000;
        let mut stats = Vec::with_capacity(reps);
        for _ in 0..reps {
            let mut tally = [0u32; 4];
            for _ in 0..n {
                tally[cells[rng.random_range(0..n)] as usize] += 1;
            }
            let (a_, b_, c_) = (
                f64::from(tally[0]),
                f64::from(tally[1]),
                f64::from(tally[2]),
            );
            stats.push(a_ / (a_ + b_) - (a_ + c_) / n as f64);
        }
        stats.sort_by(f64::total_cmp);
        let lo = stats[(reps as f64 * 0.025) as usize];
        let hi = stats[(reps as f64 * 0.975) as usize];
        let delta_width = ci.high - ci.low;
        let boot_width = hi - lo;
        assert!(
            (delta_width - boot_width).abs() / boot_width < 0.10,
            "delta width {delta_width} vs bootstrap width {boot_width}"
        );
    }

    #[test]
    fn hgr_perfect_dependence() {
        let x: Vec<f64> = (0..5000).map(|i| i as f64 / 5000.0).collect();
        let v = hgr(&x, &x, 20).unwrap();
        assert!((v - 1.0).abs() < 0.01, "got {v}");
    }

    #[test]
    fn hgr_independent_baseline() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..10_000).map(|_| rng.random()).collect();
        let y: Vec<f64> = (0..10_000).map(|_| rng.random()).collect();
        let v = hgr(&x, &y, 20).unwrap();
        assert!(v <= 0.1, "independent baseline {v}");
    }

    #[test]
    fn hgr_invariant_under_monotone_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x: Vec<f64> = (0..4000).map(|_| rng.random()).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&v| (v * 3.0).sin() * 0.2 + v + rng.random::<f64>() * 0.1)
            .collect();
        let base = hgr(&y, &x, 20).unwrap();
        let fx: Vec<f64> = x.iter().map(|&v| (5.0 * v).exp()).collect();
        let transformed = hgr(&y, &fx, 20).unwrap();
        assert!((base - transformed).abs() <= 0.02);
    }

    #[test]
    fn hgr_constant_input_is_zero() {
        let x = vec![0.5; 100];
        let y: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(hgr(&x, &y, 10).unwrap(), 0.0);
    }

    #[test]
    fn accuracy_and_pr_auc_perfect() {
        let y = vec![0, 1, 1, 0, 1];
        let score = vec![0.1, 0.9, 0.8, 0.2, 0.7];
        let y_hat = vec![0, 1, 1, 0, 1];
        assert_eq!(accuracy(&y_hat, &y).unwrap(), 1.0);
        assert_eq!(pr_auc(&score, &y).unwrap(), 1.0);
    }

    #[test]
    fn pr_auc_constant_score_is_base_rate() {
        let y = vec![1, 0, 0, 0, 1, 0, 0, 0, 0, 0];
        let score = vec![0.5; 10];
        assert!((pr_auc(&score, &y).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn pr_auc_matches_naive_threshold_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 200;
        let y: Vec<u8> = (0..n)
            .map(|_| u8::from(rng.random::<f64>() < 0.35))
            .collect();
        let score: Vec<f64> = y
            .iter()
            .map(|&v| {
                let base = if v == 1 { 0.6 } else { 0.4 };
                (base + rng.random::<f64>() * 0.4 - 0.2).clamp(0.0, 1.0)
            })
            .collect();

        // Naive oracle: recompute precision/recall from scratch at every
        // distinct threshold, then integrate trapezoidally.
        let mut thresholds: Vec<f64> = score.clone();
        thresholds.sort_by(|a, b| b.total_cmp(a));
        thresholds.dedup();
        let total_pos = y.iter().filter(|&&v| v == 1).count() as f64;
        let mut pts = Vec::new();
        for &t in &thresholds {
            let tp = (0..n).filter(|&i| score[i] >= t && y[i] == 1).count() as f64;
            let pp = (0..n).filter(|&i| score[i] >= t).count() as f64;
            pts.push((tp / total_pos, tp / pp));
        }
        let mut expect = 0.0;
        let mut prev = (0.0, pts[0].1);
        for &(r, p) in &pts {
            expect += (r - prev.0) * (p + prev.1) / 2.0;
            prev = (r, p);
        }
        assert!((pr_auc(&score, &y).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn pr_auc_requires_positives() {
        assert!(pr_auc(&[0.3, 0.4], &[0, 0]).is_err());
    }

    #[test]
    fn variance_nonnegative_and_zero_iff_equal_phis() {
        let (d, p) = two_group_dataset((0.4, 0.4), 100, 3);
        let v = partition_variance(&d, &p, FairnessMeasure::OneVsAllDi, Target::Y).unwrap();
        assert!(v >= 0.0);
        let a = assign_groups(&d, &p).unwrap();
        let phis = phis(&a).unwrap();
        if (phis[0] - phis[1]).abs() < 1e-15 {
            assert!(v < 1e-15);
        } else {
            assert!(v > 0.0);
        }
    }

    #[test]
    fn variance_invariant_under_monotone_reparameterization() {
        let (d, p) = two_group_dataset((0.2, 0.7), 150, 31);
        let v1 = partition_variance(&d, &p, FairnessMeasure::OneVsAllDi, Target::Y).unwrap();
        // Cube the axis (monotone on [0, 100]) and the grid edges alike.
        let l3: Vec<f64> = d.l1().iter().map(|&v| v.powi(3)).collect();
        let d3 = Dataset::new_1d(l3, d.y().to_vec(), None, None).unwrap();
        let edges: Vec<f64> = p
            .grid()
            .axis(0)
            .edges()
            .iter()
            .map(|&e| e.powi(3))
            .collect();
        let grid = Grid::new_1d(GridAxis::new(edges).unwrap()).unwrap();
        let p3 = Partition::segments(grid, vec![0, 1, 2]).unwrap();
        let v2 = partition_variance(&d3, &p3, FairnessMeasure::OneVsAllDi, Target::Y).unwrap();
        assert_eq!(v1, v2);
    }
}
