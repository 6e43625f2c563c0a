//! Clustering heuristic: exact 1-D K-means on per-bin deviations.
//!
//! The per-bin deviations `psi_j` (diagonal of the range-statistics table)
//! are clustered into `K` groups minimizing within-cluster
//! sum-of-squared-deviations. Optimal 1-D clusters are contiguous in
//! sorted order, so a dynamic program over the sorted values finds the
//! exact optimum with no seed sensitivity. Clusters are then mapped back
//! to grid bins; when every cluster occupies a contiguous run of bins the
//! result is a segment partition, otherwise the bin-labelled partition is
//! returned along with a disconnection diagnostic.

use super::{SearchConfig, SearchDiagnostics, SearchResult};
use crate::error::{Error, Result};
use crate::metrics::{assignment_variance, group_stats};
use crate::rangesum::psi_matrix;
use crate::types::{assign_groups_with, Dataset, Grid, Partition, PartitionMeta};

/// Exact K-means for scalar data: returns the cluster index of every
/// input value, with clusters numbered in increasing value order.
fn exact_kmeans_scalar(values: &[f64], k: usize) -> Vec<usize> {
    let n = values.len();
    debug_assert!(k >= 1 && k <= n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    // Prefix sums over the sorted values for O(1) within-cluster cost.
    let mut sum = vec![0.0; n + 1];
    let mut sum2 = vec![0.0; n + 1];
    for (i, &idx) in order.iter().enumerate() {
        sum[i + 1] = sum[i] + values[idx];
        sum2[i + 1] = sum2[i] + values[idx] * values[idx];
    }
    // Cost of grouping sorted positions i..=j into one cluster.
    let cost = |i: usize, j: usize| -> f64 {
        let len = (j + 1 - i) as f64;
        let s = sum[j + 1] - sum[i];
        let s2 = sum2[j + 1] - sum2[i];
        (s2 - s * s / len).max(0.0)
    };

    // dp[r][j]: best cost covering sorted positions 0..=j with r clusters.
    let inf = f64::INFINITY;
    let mut dp = vec![vec![inf; n]; k + 1];
    let mut back = vec![vec![0usize; n]; k + 1];
    for j in 0..n {
        dp[1][j] = cost(0, j);
    }
    for r in 2..=k {
        for j in r - 1..n {
            let mut best = inf;
            let mut arg = r - 1;
            for i in r - 1..=j {
                let v = dp[r - 1][i - 1] + cost(i, j);
                if v < best {
                    best = v;
                    arg = i;
                }
            }
            dp[r][j] = best;
            back[r][j] = arg;
        }
    }

    // Recover cluster start positions, then label the original indices.
    let mut cluster_of_pos = vec![0usize; n];
    let mut j = n - 1;
    let mut r = k;
    while r >= 1 {
        let start = if r == 1 { 0 } else { back[r][j] };
        for pos in start..=j {
            cluster_of_pos[pos] = r - 1;
        }
        if r == 1 {
            break;
        }
        j = start - 1;
        r -= 1;
    }
    let mut labels = vec![0usize; n];
    for (pos, &idx) in order.iter().enumerate() {
        labels[idx] = cluster_of_pos[pos];
    }
    labels
}

/// K-means partition of the per-bin deviations.
///
/// Empty grid bins carry no deviation and are dropped from the clustering
/// input; in the returned partition they attach to the group of the
/// nearest populated bin on their left (or right, at the very start of
/// the grid). When the outcome probability is monotone in the sensitive
/// value the clusters always form contiguous segments; otherwise the
/// result may be disconnected, which is reported in the diagnostics and
/// representable only as a bin-labelled partition.
pub fn kmeans_1d(dataset: &Dataset, config: &SearchConfig) -> Result<SearchResult> {
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

    let mut populated: Vec<usize> = Vec::with_capacity(m);
    let mut values: Vec<f64> = Vec::with_capacity(m);
    for j in 0..m {
        if let Some(v) = psi.bin_psi(j) {
            populated.push(j);
            values.push(v);
        }
    }
    let mut distinct = values.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < config.k {
        return Err(Error::invalid(format!(
            "only {} distinct per-bin deviations for K = {}",
            distinct.len(),
            config.k
        )));
    }

    let cluster_labels = exact_kmeans_scalar(&values, config.k);

    // Contiguity check over the populated bins in grid order: each cluster
    // must occupy exactly one run.
    let mut runs = 1usize;
    for w in cluster_labels.windows(2) {
        if w[0] != w[1] {
            runs += 1;
        }
    }
    let contiguous = runs == config.k;

    let mut partition = if contiguous {
        let mut boundaries = vec![0usize];
        for (i, w) in cluster_labels.windows(2).enumerate() {
            if w[0] != w[1] {
                // Empty bins between runs attach to the left group.
                boundaries.push(populated[i + 1]);
            }
        }
        boundaries.push(m);
        Partition::segments(grid, boundaries)?
    } else {
        // Renumber clusters by first appearance in grid order.
        let mut rename = vec![usize::MAX; config.k];
        let mut next = 0usize;
        let mut bin_labels = vec![usize::MAX; m];
        for (i, &bin) in populated.iter().enumerate() {
            let c = cluster_labels[i];
            if rename[c] == usize::MAX {
                rename[c] = next;
                next += 1;
            }
            bin_labels[bin] = rename[c];
        }
        // Fill empty bins from the left neighbour (or the first populated
        // label at the grid start).
        let first = bin_labels
            .iter()
            .find(|&&l| l != usize::MAX)
            .copied()
            .expect("at least one populated bin");
        let mut current = first;
        for label in bin_labels.iter_mut() {
            if *label == usize::MAX {
                *label = current;
            } else {
                current = *label;
            }
        }
        log::warn!(
            "k-means clusters are not contiguous on the grid ({runs} runs for K = {}); \
             returning a bin-labelled partition",
            config.k
        );
        Partition::bin_labels(grid, bin_labels, config.k)?
    };

    let assignment = assign_groups_with(dataset, &partition, config.target)?;
    let objective = assignment_variance(&assignment, config.measure)?;
    let stats = group_stats(&assignment, config.ci_level)?;
    partition.set_meta(PartitionMeta {
        method: Some("kmeans".into()),
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
            candidates_evaluated: 0,
            disconnected_clusters: !contiguous,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::super::{GridSpec, SearchConfig};
    use super::*;
    use crate::synth::{benchmark_step_spec, benchmark_uniform, generate_step_dataset, StepSpec};
    use crate::types::PartitionShape;

    #[test]
    fn scalar_kmeans_finds_obvious_clusters() {
        let values = vec![10.0, 0.1, 9.8, 0.0, 10.2, 0.2, 5.0];
        let labels = exact_kmeans_scalar(&values, 3);
        assert_eq!(labels, vec![2, 0, 2, 0, 2, 0, 1]);
    }

    #[test]
    fn scalar_kmeans_matches_exhaustive_partitioning() {
        let ssq = |s: &[f64]| -> f64 {
            let mean = s.iter().sum::<f64>() / s.len() as f64;
            s.iter().map(|v| (v - mean) * (v - mean)).sum()
        };
        // Optimal 1-D clusters are contiguous in sorted order, so trying
        // every pair of cut positions is an exhaustive oracle for K = 3.
        let values = vec![0.3, 1.9, 0.1, 2.2, 0.9, 1.4];
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let mut best = f64::INFINITY;
        for c1 in 1..5 {
            for c2 in c1 + 1..6 {
                let total = ssq(&sorted[..c1]) + ssq(&sorted[c1..c2]) + ssq(&sorted[c2..]);
                best = best.min(total);
            }
        }
        let labels = exact_kmeans_scalar(&values, 3);
        let mut by_cluster: Vec<Vec<f64>> = vec![Vec::new(); 3];
        for (i, &l) in labels.iter().enumerate() {
            by_cluster[l].push(values[i]);
        }
        let cost: f64 = by_cluster.iter().map(|c| ssq(c)).sum();
        assert!((cost - best).abs() < 1e-12);
    }

    #[test]
    fn benchmark_uniform_recovery() {
        let d =
            generate_step_dataset(&benchmark_step_spec(), &benchmark_uniform(), 50_000, 7).unwrap();
        let config = SearchConfig::new(5).with_grid(GridSpec::EqualWidth {
            m: 100,
            bounds: Some((0.0, 100.0)),
        });
        let r = kmeans_1d(&d, &config).unwrap();
        assert!(r.objective >= 0.06, "objective {}", r.objective);
        let a = crate::types::assign_groups(&d, &r.partition).unwrap();
        let gt = crate::types::assign_groups(&d, &crate::synth::benchmark_ground_truth_partition())
            .unwrap();
        let rand = crate::metrics::rand_index(&a, &gt).unwrap();
        assert!(rand >= 0.9, "rand index {rand}");
    }

    #[test]
    fn monotone_data_yields_contiguous_segments() {
        let d =
            generate_step_dataset(&benchmark_step_spec(), &benchmark_uniform(), 30_000, 3).unwrap();
        let config = SearchConfig::new(5).with_grid(GridSpec::EqualWidth {
            m: 50,
            bounds: Some((0.0, 100.0)),
        });
        let r = kmeans_1d(&d, &config).unwrap();
        assert!(!r.diagnostics.disconnected_clusters);
        assert!(matches!(
            r.partition.shape(),
            PartitionShape::Segments { .. }
        ));
    }

    #[test]
    fn non_monotone_data_raises_disconnection_diagnostic() {
        // High success rate on both ends, low in the middle: the two ends
        // share a cluster that is split by the middle group.
        let spec = StepSpec::new(vec![0.0, 30.0, 70.0, 100.0], vec![0.9, 0.1, 0.9]).unwrap();
        let d = generate_step_dataset(&spec, &benchmark_uniform(), 20_000, 4).unwrap();
        let config = SearchConfig::new(2).with_grid(GridSpec::EqualWidth {
            m: 50,
            bounds: Some((0.0, 100.0)),
        });
        let r = kmeans_1d(&d, &config).unwrap();
        assert!(r.diagnostics.disconnected_clusters);
        match r.partition.shape() {
            PartitionShape::BinLabels { labels } => {
                // First and last bins cluster together, the middle apart.
                assert_eq!(labels[0], labels[49]);
                assert_ne!(labels[0], labels[25]);
            }
            other => panic!("expected bin labels, got {other:?}"),
        }
    }

    #[test]
    fn needs_k_distinct_deviations() {
        let d = Dataset::new_1d(vec![0.25, 0.75], vec![1, 1], None, None).unwrap();
        let config = SearchConfig::new(2).with_grid(GridSpec::Explicit {
            edges: vec![0.0, 0.5, 1.0],
        });
        assert!(kmeans_1d(&d, &config).is_err());
    }
}
