//! Range statistics precomputed by dynamic programming.
//!
//! [`count_on_all_ranges`] turns a per-bin vector into the table of sums
//! over every bin interval in `O(M^2)`. [`psi_matrix`] composes two such
//! tables (counts and positive counts) into the upper-triangular matrix of
//! interval deviations `psi(j1, j2) = P(target = 1 | L in interval) -
//! P(target = 1)` together with interval weights, which is what the
//! partition searches consume. [`rect_prefix_sums`] is the 2-D analogue:
//! cumulative tables answering rectangle count queries in `O(1)` by
//! four-corner inclusion-exclusion.

use crate::error::{Error, Result};
use crate::types::{Dataset, Grid, GridRect, Target};

/// Upper-triangular table of interval sums, packed row-major.
///
/// `get(j1, j2)` with `j1 <= j2` (zero-based bin indices) is the sum of the
/// input vector over bins `j1..=j2`; entries below the diagonal do not
/// exist in the packed layout.
#[derive(Debug, Clone)]
pub struct RangeSumTable {
    m: usize,
    data: Vec<f64>,
}

#[inline]
fn tri_index(m: usize, j1: usize, j2: usize) -> usize {
    debug_assert!(j1 <= j2 && j2 < m);
    j1 * m - (j1 * j1 - j1) / 2 + (j2 - j1)
}

impl RangeSumTable {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, j1: usize, j2: usize) -> f64 {
        assert!(
            j1 <= j2 && j2 < self.m,
            "interval ({j1}, {j2}) out of range"
        );
        self.data[tri_index(self.m, j1, j2)]
    }
}

/// Fills the interval-sum table with the two-phase recurrence: the first
/// row is the running prefix sum, and each later row is the previous row
/// minus the bin that dropped out on the left. Total cost `O(M^2)`.
pub fn count_on_all_ranges(sum_by_bin: &[f64]) -> RangeSumTable {
    let m = sum_by_bin.len();
    assert!(m >= 1, "need at least one bin");
    let mut data = vec![0.0; m * (m + 1) / 2];
    data[0] = sum_by_bin[0];
    for j2 in 1..m {
        data[j2] = data[j2 - 1] + sum_by_bin[j2];
    }
    for j1 in 1..m {
        for j2 in j1..m {
            data[tri_index(m, j1, j2)] = data[tri_index(m, j1 - 1, j2)] - sum_by_bin[j1 - 1];
        }
    }
    RangeSumTable { m, data }
}

/// Precomputed interval deviations and weights over a 1-D grid.
///
/// Intervals with no samples have no defined deviation; they are reported
/// as `None` rather than silently zero, and searches skip candidates that
/// touch them.
#[derive(Debug, Clone)]
pub struct PsiMatrix {
    m: usize,
    n: usize,
    overall_rate: f64,
    counts: Vec<f64>,
    psi: Vec<f64>,
    weights: Vec<f64>,
}

impl PsiMatrix {
    pub fn m(&self) -> usize {
        self.m
    }

    /// Total number of samples.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Overall positive rate `P(target = 1)`.
    pub fn overall_rate(&self) -> f64 {
        self.overall_rate
    }

    /// Deviation for bins `j1..=j2`, `None` when the interval is empty.
    pub fn psi(&self, j1: usize, j2: usize) -> Option<f64> {
        let v = self.psi[tri_index(self.m, j1, j2)];
        if v.is_nan() {
            None
        } else {
            Some(v)
        }
    }

    /// Interval probability `P(L in bins j1..=j2)`.
    pub fn weight(&self, j1: usize, j2: usize) -> f64 {
        self.weights[tri_index(self.m, j1, j2)]
    }

    /// Sample count of the interval.
    pub fn count(&self, j1: usize, j2: usize) -> f64 {
        self.counts[tri_index(self.m, j1, j2)]
    }

    /// Single-bin deviation (the table diagonal).
    pub fn bin_psi(&self, j: usize) -> Option<f64> {
        self.psi(j, j)
    }
}

/// Builds the deviation matrix for a 1-D dataset over `grid`, targeting
/// `Y`, `Y_HAT`, or the thresholded score.
///
/// Two [`count_on_all_ranges`] passes (all samples, positive samples) give
/// every interval count in `O(M^2 + N)`; each defined entry is then
/// `positives / count - overall_rate`.
pub fn psi_matrix(dataset: &Dataset, grid: &Grid, target: Target) -> Result<PsiMatrix> {
    if grid.dimension() != 1 || dataset.dimension() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: grid.dimension().max(dataset.dimension()),
        });
    }
    let axis = grid.axis(0);
    let positive = target.positives(dataset)?;
    let m = axis.m();
    let mut count_by_bin = vec![0.0; m];
    let mut pos_by_bin = vec![0.0; m];
    for (i, &v) in dataset.l1().iter().enumerate() {
        let bin = axis.bin_of(v).ok_or(Error::OutOfRange {
            index: i,
            axis: 0,
            value: v,
            lo: axis.lo(),
            hi: axis.hi(),
        })?;
        count_by_bin[bin] += 1.0;
        if positive[i] {
            pos_by_bin[bin] += 1.0;
        }
    }

    let counts = count_on_all_ranges(&count_by_bin);
    let positives = count_on_all_ranges(&pos_by_bin);
    let n = dataset.len();
    let overall_rate = positive.iter().filter(|&&p| p).count() as f64 / n as f64;

    let mut psi = vec![f64::NAN; counts.data.len()];
    let mut weights = vec![0.0; counts.data.len()];
    for (i, (&c, &p)) in counts.data.iter().zip(&positives.data).enumerate() {
        weights[i] = c / n as f64;
        if c > 0.0 {
            psi[i] = p / c - overall_rate;
        }
    }
    Ok(PsiMatrix {
        m,
        n,
        overall_rate,
        counts: counts.data,
        psi,
        weights,
    })
}

/// Cumulative 2-D count tables for a two-axis grid.
#[derive(Debug, Clone)]
pub struct RectPrefixSums {
    ml: usize,
    mh: usize,
    n: usize,
    cum_count: Vec<u64>,
    cum_pos: Vec<u64>,
}

impl RectPrefixSums {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn at(cum: &[u64], mh: usize, x: usize, y: usize) -> u64 {
        cum[x * (mh + 1) + y]
    }

    fn rect_sum(&self, cum: &[u64], r: &GridRect) -> u64 {
        assert!(r.x0 < r.x1 && r.x1 <= self.ml && r.y0 < r.y1 && r.y1 <= self.mh);
        Self::at(cum, self.mh, r.x1, r.y1) + Self::at(cum, self.mh, r.x0, r.y0)
            - Self::at(cum, self.mh, r.x0, r.y1)
            - Self::at(cum, self.mh, r.x1, r.y0)
    }

    /// Sample count inside the rectangle.
    pub fn count(&self, r: &GridRect) -> u64 {
        self.rect_sum(&self.cum_count, r)
    }

    /// Positive-sample count inside the rectangle.
    pub fn positives(&self, r: &GridRect) -> u64 {
        self.rect_sum(&self.cum_pos, r)
    }
}

/// Builds cumulative count and positive-count tables for a 2-D dataset;
/// rectangle statistics then cost four lookups each.
pub fn rect_prefix_sums(dataset: &Dataset, grid: &Grid, target: Target) -> Result<RectPrefixSums> {
    if grid.dimension() != 2 || dataset.dimension() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: grid.dimension().min(dataset.dimension()),
        });
    }
    let positive = target.positives(dataset)?;
    let (ax, ay) = (grid.axis(0), grid.axis(1));
    let (ml, mh) = (ax.m(), ay.m());
    let stride = mh + 1;
    let mut cum_count = vec![0u64; (ml + 1) * stride];
    let mut cum_pos = vec![0u64; (ml + 1) * stride];

    let l2 = dataset.l2().expect("2-D dataset");
    for (i, (&x, &y)) in dataset.l1().iter().zip(l2).enumerate() {
        let bx = ax.bin_of(x).ok_or(Error::OutOfRange {
            index: i,
            axis: 0,
            value: x,
            lo: ax.lo(),
            hi: ax.hi(),
        })?;
        let by = ay.bin_of(y).ok_or(Error::OutOfRange {
            index: i,
            axis: 1,
            value: y,
            lo: ay.lo(),
            hi: ay.hi(),
        })?;
        cum_count[(bx + 1) * stride + by + 1] += 1;
        if positive[i] {
            cum_pos[(bx + 1) * stride + by + 1] += 1;
        }
    }
    for cum in [&mut cum_count, &mut cum_pos] {
        for x in 0..=ml {
            for y in 1..=mh {
                cum[x * stride + y] += cum[x * stride + y - 1];
            }
        }
        for x in 1..=ml {
            for y in 0..=mh {
                cum[x * stride + y] += cum[(x - 1) * stride + y];
            }
        }
    }
    Ok(RectPrefixSums {
        ml,
        mh,
        n: dataset.len(),
        cum_count,
        cum_pos,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Dataset, Grid, GridAxis};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ones_give_interval_lengths() {
        let t = count_on_all_ranges(&[1.0, 1.0, 1.0]);
        assert_eq!(
            [
                t.get(0, 0),
                t.get(0, 1),
                t.get(0, 2),
                t.get(1, 1),
                t.get(1, 2),
                t.get(2, 2),
            ],
            [1.0, 2.0, 3.0, 1.0, 2.0, 1.0]
        );
    }

    #[test]
    fn single_bin_table() {
        let t = count_on_all_ranges(&[7.25]);
        assert_eq!(t.get(0, 0), 7.25);
    }

    #[test]
    fn matches_naive_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let bins: Vec<f64> = (0..8).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect();
        let t = count_on_all_ranges(&bins);
        for j1 in 0..8 {
            for j2 in j1..8 {
                let naive: f64 = bins[j1..=j2].iter().sum();
                assert!(
                    (t.get(j1, j2) - naive).abs() <= 1e-9,
                    "({j1}, {j2}): {} vs {naive}",
                    t.get(j1, j2)
                );
            }
        }
    }

    #[test]
    fn interval_recurrence_holds_up_to_m_64() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in [1usize, 2, 5, 64] {
            let bins: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
            let t = count_on_all_ranges(&bins);
            for j in 0..m {
                assert!((t.get(j, j) - bins[j]).abs() <= 1e-12);
            }
            for j1 in 0..m {
                for j2 in j1 + 1..m {
                    let expect = t.get(j1, j2 - 1) + bins[j2];
                    assert!((t.get(j1, j2) - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
                }
            }
        }
    }

    fn grid_1d(lo: f64, hi: f64, m: usize) -> Grid {
        Grid::new_1d(GridAxis::equal_width(lo, hi, m).unwrap()).unwrap()
    }

    #[test]
    fn constant_outcome_gives_zero_deviations() {
        let d = Dataset::new_1d(vec![5.0, 15.0, 25.0, 35.0], vec![1, 1, 1, 1], None, None).unwrap();
        let psi = psi_matrix(&d, &grid_1d(0.0, 40.0, 4), Target::Y).unwrap();
        for j1 in 0..4 {
            for j2 in j1..4 {
                if let Some(v) = psi.psi(j1, j2) {
                    assert!(v.abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn hand_counted_interval() {
        let d = Dataset::new_1d(
            vec![5.0, 15.0, 25.0, 35.0, 45.0, 55.0],
            vec![1, 1, 0, 0, 0, 0],
            None,
            None,
        )
        .unwrap();
        let psi = psi_matrix(&d, &grid_1d(0.0, 60.0, 6), Target::Y).unwrap();
        // Interval [0, 20] holds the two positives: 1 - 2/6 = 2/3.
        let got = psi.psi(0, 1).unwrap();
        assert!((got - 2.0 / 3.0).abs() < 1e-12, "got {got}");
        assert!((psi.weight(0, 1) - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn full_range_deviation_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l: Vec<f64> = (0..500).map(|_| rng.random::<f64>() * 100.0).collect();
        let y: Vec<u8> = (0..500)
            .map(|_| u8::from(rng.random::<f64>() < 0.37))
            .collect();
        let d = Dataset::new_1d(l, y, None, None).unwrap();
        let psi = psi_matrix(&d, &grid_1d(0.0, 100.0, 25), Target::Y).unwrap();
        assert!(psi.psi(0, 24).unwrap().abs() < 1e-12);
    }

    #[test]
    fn empty_intervals_are_flagged_undefined() {
        let d = Dataset::new_1d(vec![5.0, 45.0], vec![1, 0], None, None).unwrap();
        let psi = psi_matrix(&d, &grid_1d(0.0, 50.0, 5), Target::Y).unwrap();
        assert!(psi.psi(1, 3).is_none());
        assert_eq!(psi.count(1, 3), 0.0);
        assert!(psi.psi(0, 3).is_some());
    }

    #[test]
    fn diagonal_equals_per_bin_deviations() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let l: Vec<f64> = (0..800).map(|_| rng.random::<f64>() * 10.0).collect();
        let y: Vec<u8> = l
            .iter()
            .map(|&v| u8::from(rng.random::<f64>() < v / 10.0))
            .collect();
        let d = Dataset::new_1d(l.clone(), y.clone(), None, None).unwrap();
        let grid = grid_1d(0.0, 10.0, 10);
        let psi = psi_matrix(&d, &grid, Target::Y).unwrap();
        let overall = d.positive_rate();
        for j in 0..10 {
            let in_bin: Vec<usize> = (0..d.len())
                .filter(|&i| grid.axis(0).bin_of(l[i]) == Some(j))
                .collect();
            if in_bin.is_empty() {
                assert!(psi.bin_psi(j).is_none());
            } else {
                let rate =
                    in_bin.iter().filter(|&&i| y[i] == 1).count() as f64 / in_bin.len() as f64;
                assert!((psi.bin_psi(j).unwrap() - (rate - overall)).abs() < 1e-12);
            }
        }
    }

    fn grid_2d(m: usize) -> Grid {
        Grid::new_2d(
            GridAxis::equal_width(0.0, 1.0, m).unwrap(),
            GridAxis::equal_width(0.0, 1.0, m).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn table_fill_scales_quadratically() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let l: Vec<f64> = (0..2000).map(|_| rng.random::<f64>()).collect();
        let y: Vec<u8> = (0..2000)
            .map(|_| u8::from(rng.random::<f64>() < 0.5))
            .collect();
        let d = Dataset::new_1d(l, y, None, None).unwrap();
        let time_fill = |m: usize| -> f64 {
            let grid = grid_1d(0.0, 1.0, m);
            let mut best = f64::INFINITY;
            for _ in 0..5 {
                let start = std::time::Instant::now();
                let psi = psi_matrix(&d, &grid, Target::Y).unwrap();
                best = best.min(start.elapsed().as_secs_f64());
                assert_eq!(psi.m(), m);
            }
            best
        };
        // Both sizes sit in the same (memory-bound) regime, so doubling M
        // should cost about 4x; anything superquadratic blows well past
        // the ratio and the absolute ceiling.
        let _ = time_fill(1024);
        let small = time_fill(1024);
        let large = time_fill(2048);
        assert!(
            large <= small * 8.0,
            "fill times {small:.6}s -> {large:.6}s scale worse than quadratic"
        );
        assert!(
            large < 0.5,
            "filling the M = 2048 tables took {large:.3}s; the fill is not O(M^2)"
        );
    }

    #[test]
    fn single_center_sample_rect_queries() {
        let d = Dataset::new_2d(vec![0.5], vec![0.5], vec![1], None, None).unwrap();
        let grid = grid_2d(4);
        let t = rect_prefix_sums(&d, &grid, Target::Y).unwrap();
        for x0 in 0..4 {
            for x1 in x0 + 1..=4 {
                for y0 in 0..4 {
                    for y1 in y0 + 1..=4 {
                        let r = GridRect { x0, x1, y0, y1 };
                        let contains = x0 <= 2 && x1 > 2 && y0 <= 2 && y1 > 2;
                        assert_eq!(t.count(&r), u64::from(contains));
                        assert_eq!(t.positives(&r), u64::from(contains));
                    }
                }
            }
        }
    }

    #[test]
    fn four_corner_samples_full_box() {
        let d = Dataset::new_2d(
            vec![0.0, 0.0, 1.0, 1.0],
            vec![0.0, 1.0, 0.0, 1.0],
            vec![1, 0, 0, 1],
            None,
            None,
        )
        .unwrap();
        let t = rect_prefix_sums(&d, &grid_2d(3), Target::Y).unwrap();
        let full = GridRect {
            x0: 0,
            x1: 3,
            y0: 0,
            y1: 3,
        };
        assert_eq!(t.count(&full), 4);
        assert_eq!(t.positives(&full), 2);
    }

    #[test]
    fn random_rect_queries_match_naive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100;
        let l1: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let l2: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let y: Vec<u8> = (0..n)
            .map(|_| u8::from(rng.random::<f64>() < 0.4))
            .collect();
        let d = Dataset::new_2d(l1.clone(), l2.clone(), y.clone(), None, None).unwrap();
        let grid = grid_2d(8);
        let t = rect_prefix_sums(&d, &grid, Target::Y).unwrap();
        for _ in 0..20 {
            let x0 = rng.random_range(0..8);
            let x1 = rng.random_range(x0 + 1..=8);
            let y0 = rng.random_range(0..8);
            let y1 = rng.random_range(y0 + 1..=8);
            let r = GridRect { x0, x1, y0, y1 };
            let mut count = 0u64;
            let mut pos = 0u64;
            for i in 0..n {
                let bx = grid.axis(0).bin_of(l1[i]).unwrap();
                let by = grid.axis(1).bin_of(l2[i]).unwrap();
                if bx >= x0 && bx < x1 && by >= y0 && by < y1 {
                    count += 1;
                    pos += u64::from(y[i]);
                }
            }
            assert_eq!(t.count(&r), count);
            assert_eq!(t.positives(&r), pos);
        }
    }
}
