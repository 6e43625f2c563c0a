//! Domain types: datasets, grids, partitions and group assignments.
//!
//! A [`Dataset`] holds per-sample records of a continuous sensitive value
//! (one or two axes), a binary outcome, and optionally a model score in
//! `[0, 1]` and a binary prediction. A [`Partition`] divides the sensitive
//! space into `K` groups aligned to a [`Grid`]; [`assign_groups`] turns a
//! dataset plus a partition into per-sample labels with per-group tallies.
//!
//! Bin membership is half-open: a value `v` belongs to bin `j` when
//! `edges[j] <= v < edges[j + 1]`, except the last bin which also includes
//! its right edge. All types are immutable after construction.

use crate::error::{Error, Result};

/// One observation row. `l2` is `Some` exactly when the dataset is 2-D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub l1: f64,
    pub l2: Option<f64>,
    pub y: u8,
    pub score: Option<f64>,
    pub y_hat: Option<u8>,
}

/// Column-oriented, validated collection of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    l1: Vec<f64>,
    l2: Option<Vec<f64>>,
    y: Vec<u8>,
    score: Option<Vec<f64>>,
    y_hat: Option<Vec<u8>>,
}

impl Dataset {
    pub fn new_1d(
        l: Vec<f64>,
        y: Vec<u8>,
        score: Option<Vec<f64>>,
        y_hat: Option<Vec<u8>>,
    ) -> Result<Self> {
        let d = Dataset {
            l1: l,
            l2: None,
            y,
            score,
            y_hat,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn new_2d(
        l1: Vec<f64>,
        l2: Vec<f64>,
        y: Vec<u8>,
        score: Option<Vec<f64>>,
        y_hat: Option<Vec<u8>>,
    ) -> Result<Self> {
        let d = Dataset {
            l1,
            l2: Some(l2),
            y,
            score,
            y_hat,
        };
        d.validate()?;
        Ok(d)
    }

    /// Builds a dataset from row records, enforcing that every row has the
    /// same dimension and the same optional columns.
    pub fn from_samples(samples: &[Sample]) -> Result<Self> {
        let first = samples.first().ok_or(Error::EmptyDataset)?;
        let dim2 = first.l2.is_some();
        let has_score = first.score.is_some();
        let has_y_hat = first.y_hat.is_some();

        let mut l1 = Vec::with_capacity(samples.len());
        let mut l2 = if dim2 {
            Some(Vec::with_capacity(samples.len()))
        } else {
            None
        };
        let mut y = Vec::with_capacity(samples.len());
        let mut score = if has_score {
            Some(Vec::with_capacity(samples.len()))
        } else {
            None
        };
        let mut y_hat = if has_y_hat {
            Some(Vec::with_capacity(samples.len()))
        } else {
            None
        };

        for (i, s) in samples.iter().enumerate() {
            if s.l2.is_some() != dim2
                || s.score.is_some() != has_score
                || s.y_hat.is_some() != has_y_hat
            {
                return Err(Error::InvalidSample {
                    index: i,
                    reason: "columns differ from the first sample".into(),
                });
            }
            l1.push(s.l1);
            if let Some(v) = &mut l2 {
                v.push(s.l2.unwrap());
            }
            y.push(s.y);
            if let Some(v) = &mut score {
                v.push(s.score.unwrap());
            }
            if let Some(v) = &mut y_hat {
                v.push(s.y_hat.unwrap());
            }
        }
        let d = Dataset {
            l1,
            l2,
            y,
            score,
            y_hat,
        };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        let n = self.l1.len();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let len_ok = self.y.len() == n
            && self.l2.as_ref().is_none_or(|v| v.len() == n)
            && self.score.as_ref().is_none_or(|v| v.len() == n)
            && self.y_hat.as_ref().is_none_or(|v| v.len() == n);
        if !len_ok {
            return Err(Error::invalid("dataset columns have different lengths"));
        }
        for (i, &v) in self.l1.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidSample {
                    index: i,
                    reason: format!("non-finite sensitive value {v}"),
                });
            }
        }
        if let Some(l2) = &self.l2 {
            for (i, &v) in l2.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidSample {
                        index: i,
                        reason: format!("non-finite sensitive value {v}"),
                    });
                }
            }
        }
        for (i, &v) in self.y.iter().enumerate() {
            if v > 1 {
                return Err(Error::InvalidSample {
                    index: i,
                    reason: format!("y must be 0 or 1, got {v}"),
                });
            }
        }
        if let Some(score) = &self.score {
            for (i, &v) in score.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidSample {
                        index: i,
                        reason: format!("score must lie in [0, 1], got {v}"),
                    });
                }
            }
        }
        if let Some(y_hat) = &self.y_hat {
            for (i, &v) in y_hat.iter().enumerate() {
                if v > 1 {
                    return Err(Error::InvalidSample {
                        index: i,
                        reason: format!("y_hat must be 0 or 1, got {v}"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.l1.len()
    }

    /// Datasets are non-empty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dimension(&self) -> usize {
        if self.l2.is_some() {
            2
        } else {
            1
        }
    }

    pub fn l1(&self) -> &[f64] {
        &self.l1
    }

    pub fn l2(&self) -> Option<&[f64]> {
        self.l2.as_deref()
    }

    /// Sensitive values along axis 0 or 1.
    pub fn axis(&self, axis: usize) -> Result<&[f64]> {
        match axis {
            0 => Ok(&self.l1),
            1 => self.l2.as_deref().ok_or(Error::DimensionMismatch {
                expected: 2,
                got: 1,
            }),
            _ => Err(Error::invalid(format!("axis {axis} out of range"))),
        }
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn score(&self) -> Option<&[f64]> {
        self.score.as_deref()
    }

    pub fn y_hat(&self) -> Option<&[u8]> {
        self.y_hat.as_deref()
    }

    pub fn sample(&self, i: usize) -> Sample {
        Sample {
            l1: self.l1[i],
            l2: self.l2.as_ref().map(|v| v[i]),
            y: self.y[i],
            score: self.score.as_ref().map(|v| v[i]),
            y_hat: self.y_hat.as_ref().map(|v| v[i]),
        }
    }

    pub fn samples(&self) -> impl Iterator<Item = Sample> + '_ {
        (0..self.len()).map(move |i| self.sample(i))
    }

    /// New dataset keeping only the rows in `indices` (in that order).
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let pick_f = |v: &Vec<f64>| indices.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let pick_u = |v: &Vec<u8>| indices.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Ok(Dataset {
            l1: pick_f(&self.l1),
            l2: self.l2.as_ref().map(pick_f),
            y: pick_u(&self.y),
            score: self.score.as_ref().map(pick_f),
            y_hat: self.y_hat.as_ref().map(pick_u),
        })
    }

    /// Empirical `P(Y = 1)`.
    pub fn positive_rate(&self) -> f64 {
        let pos: u64 = self.y.iter().map(|&v| u64::from(v)).sum();
        pos as f64 / self.len() as f64
    }
}

/// Which binary variable plays the role of the outcome.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Target {
    #[default]
    Y,
    YHat,
    /// Thresholded score: positive when `score > threshold`.
    Score {
        threshold: f64,
    },
}

impl Target {
    /// Per-sample positivity under this target.
    pub fn positives(&self, dataset: &Dataset) -> Result<Vec<bool>> {
        match self {
            Target::Y => Ok(dataset.y().iter().map(|&v| v == 1).collect()),
            Target::YHat => {
                let y_hat = dataset.y_hat().ok_or(Error::MissingColumn("y_hat"))?;
                Ok(y_hat.iter().map(|&v| v == 1).collect())
            }
            Target::Score { threshold } => {
                let score = dataset.score().ok_or(Error::MissingColumn("score"))?;
                Ok(score.iter().map(|&v| v > *threshold).collect())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Target::Y => "y",
            Target::YHat => "y_hat",
            Target::Score { .. } => "score",
        }
    }
}

/// Strictly increasing bin edges along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    edges: Vec<f64>,
}

impl GridAxis {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 3 {
            return Err(Error::invalid("a grid axis needs at least 2 bins"));
        }
        for w in edges.windows(2) {
            // Written so that NaN edges are also rejected.
            if !(w[0] < w[1]) {
                return Err(Error::invalid(format!(
                    "grid edges must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(GridAxis { edges })
    }

    pub fn equal_width(lo: f64, hi: f64, m: usize) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::invalid(format!(
                "grid bounds must satisfy lo < hi, got [{lo}, {hi}]"
            )));
        }
        if m < 2 {
            return Err(Error::invalid("a grid axis needs at least 2 bins"));
        }
        let step = (hi - lo) / m as f64;
        let mut edges: Vec<f64> = (0..m).map(|j| lo + j as f64 * step).collect();
        edges.push(hi);
        GridAxis::new(edges)
    }

    /// Number of bins `M`.
    pub fn m(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn lo(&self) -> f64 {
        self.edges[0]
    }

    pub fn hi(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    /// Bin index for `v`, or `None` when `v` is outside `[lo, hi]`.
    ///
    /// Bins are `[edge[j], edge[j+1])`, the last bin being closed on the
    /// right, so every in-range value falls in exactly one bin.
    pub fn bin_of(&self, v: f64) -> Option<usize> {
        if !(v >= self.lo() && v <= self.hi()) {
            return None;
        }
        let inner = &self.edges[1..self.edges.len() - 1];
        Some(inner.partition_point(|&e| e <= v))
    }

    /// Bin index with out-of-range values clamped to the nearest end bin.
    /// The flag reports whether clamping happened.
    pub fn bin_of_clamped(&self, v: f64) -> (usize, bool) {
        if v < self.lo() {
            (0, true)
        } else if v > self.hi() {
            (self.m() - 1, true)
        } else {
            (self.bin_of(v).unwrap(), false)
        }
    }
}

/// Grid over the sensitive space: one axis in 1-D, two in 2-D.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<GridAxis>,
}

/// Hard cap on 1-D grid resolution.
pub const MAX_BINS_1D: usize = 4096;
/// Hard cap per axis on 2-D grid resolution.
pub const MAX_BINS_2D: usize = 512;

impl Grid {
    pub fn new_1d(axis: GridAxis) -> Result<Self> {
        if axis.m() > MAX_BINS_1D {
            return Err(Error::invalid(format!(
                "1-D grids are capped at {MAX_BINS_1D} bins"
            )));
        }
        Ok(Grid { axes: vec![axis] })
    }

    pub fn new_2d(x: GridAxis, y: GridAxis) -> Result<Self> {
        if x.m() > MAX_BINS_2D || y.m() > MAX_BINS_2D {
            return Err(Error::invalid(format!(
                "2-D grids are capped at {MAX_BINS_2D} bins per axis"
            )));
        }
        Ok(Grid { axes: vec![x, y] })
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, i: usize) -> &GridAxis {
        &self.axes[i]
    }

    /// Checks that every sample of `dataset` lies inside the grid cover.
    pub fn check_cover(&self, dataset: &Dataset) -> Result<()> {
        if dataset.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: dataset.dimension(),
            });
        }
        for axis_i in 0..self.dimension() {
            let axis = &self.axes[axis_i];
            for (i, &v) in dataset.axis(axis_i)?.iter().enumerate() {
                if axis.bin_of(v).is_none() {
                    return Err(Error::OutOfRange {
                        index: i,
                        axis: axis_i,
                        value: v,
                        lo: axis.lo(),
                        hi: axis.hi(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Axis-aligned rectangle of grid cells, given as edge indices with
/// `x0 < x1`, `y0 < y1` (cells `x0..x1` by `y0..y1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridRect {
    pub x0: usize,
    pub x1: usize,
    pub y0: usize,
    pub y1: usize,
}

/// Group geometry of a partition.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionShape {
    /// 1-D segments: `boundaries[k-1]..boundaries[k]` are the bins of group
    /// `k`; boundaries are edge indices `0 = b_0 < … < b_K = M`.
    Segments { boundaries: Vec<usize> },
    /// 1-D with one group label per grid bin. Produced when a clustering
    /// yields disconnected groups that segments cannot represent.
    BinLabels { labels: Vec<usize> },
    /// 2-D axis-aligned rectangles, pairwise disjoint and covering the grid.
    Rectangles { rects: Vec<GridRect> },
}

/// Provenance carried along with a fitted partition.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartitionMeta {
    pub method: Option<String>,
    pub measure: Option<String>,
    pub objective: Option<f64>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub timestamp: Option<String>,
}

/// K connected groups covering the grid (segments in 1-D, rectangles in
/// 2-D), plus the bin-labelled escape hatch for disconnected clusterings.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    grid: Grid,
    shape: PartitionShape,
    k: usize,
    meta: PartitionMeta,
    /// 2-D only: group label per grid cell, row-major over (x bin, y bin).
    cell_labels: Option<Vec<usize>>,
}

impl Partition {
    pub fn segments(grid: Grid, boundaries: Vec<usize>) -> Result<Self> {
        if grid.dimension() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: grid.dimension(),
            });
        }
        let m = grid.axis(0).m();
        if boundaries.len() < 2 || boundaries[0] != 0 || *boundaries.last().unwrap() != m {
            return Err(Error::invalid(
                "segment boundaries must start at 0 and end at M".to_string(),
            ));
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "segment boundaries must be strictly increasing".to_string(),
            ));
        }
        let k = boundaries.len() - 1;
        Ok(Partition {
            grid,
            shape: PartitionShape::Segments { boundaries },
            k,
            meta: PartitionMeta::default(),
            cell_labels: None,
        })
    }

    pub fn bin_labels(grid: Grid, labels: Vec<usize>, k: usize) -> Result<Self> {
        if grid.dimension() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: grid.dimension(),
            });
        }
        if labels.len() != grid.axis(0).m() {
            return Err(Error::invalid("need exactly one label per grid bin"));
        }
        if k == 0 {
            return Err(Error::invalid("a partition needs at least one group"));
        }
        let mut seen = vec![false; k];
        for &l in &labels {
            if l >= k {
                return Err(Error::invalid(format!("bin label {l} out of range 0..{k}")));
            }
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::EmptyGroup { group: missing });
        }
        Ok(Partition {
            grid,
            shape: PartitionShape::BinLabels { labels },
            k,
            meta: PartitionMeta::default(),
            cell_labels: None,
        })
    }

    pub fn rectangles(grid: Grid, rects: Vec<GridRect>) -> Result<Self> {
        if grid.dimension() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: grid.dimension(),
            });
        }
        let (ml, mh) = (grid.axis(0).m(), grid.axis(1).m());
        if rects.is_empty() {
            return Err(Error::invalid("a partition needs at least one group"));
        }
        // Paint the cell grid; double paint means overlap, unpainted cells
        // mean the rectangles do not cover the grid.
        let mut labels = vec![usize::MAX; ml * mh];
        for (g, r) in rects.iter().enumerate() {
            if r.x0 >= r.x1 || r.x1 > ml || r.y0 >= r.y1 || r.y1 > mh {
                return Err(Error::invalid(format!(
                    "rectangle {g} has invalid extent {r:?} for a {ml}x{mh} grid"
                )));
            }
            for x in r.x0..r.x1 {
                for y in r.y0..r.y1 {
                    let cell = &mut labels[x * mh + y];
                    if *cell != usize::MAX {
                        return Err(Error::invalid(format!(
                            "rectangles {} and {g} overlap at cell ({x}, {y})",
                            *cell
                        )));
                    }
                    *cell = g;
                }
            }
        }
        if labels.contains(&usize::MAX) {
            return Err(Error::invalid(
                "rectangles do not cover the whole grid".to_string(),
            ));
        }
        let k = rects.len();
        Ok(Partition {
            grid,
            shape: PartitionShape::Rectangles { rects },
            k,
            meta: PartitionMeta::default(),
            cell_labels: Some(labels),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dimension(&self) -> usize {
        self.grid.dimension()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn shape(&self) -> &PartitionShape {
        &self.shape
    }

    pub fn meta(&self) -> &PartitionMeta {
        &self.meta
    }

    pub fn set_meta(&mut self, meta: PartitionMeta) {
        self.meta = meta;
    }

    /// Group of an in-range 1-D value (`None` when outside the grid).
    pub fn group_of_1d(&self, v: f64) -> Option<usize> {
        let bin = self.grid.axis(0).bin_of(v)?;
        Some(self.group_of_bin_1d(bin))
    }

    fn group_of_bin_1d(&self, bin: usize) -> usize {
        match &self.shape {
            PartitionShape::Segments { boundaries } => {
                let inner = &boundaries[1..boundaries.len() - 1];
                inner.partition_point(|&b| b <= bin)
            }
            PartitionShape::BinLabels { labels } => labels[bin],
            PartitionShape::Rectangles { .. } => unreachable!("1-D lookup on 2-D partition"),
        }
    }

    /// Group of an in-range 2-D value.
    pub fn group_of_2d(&self, x: f64, y: f64) -> Option<usize> {
        let bx = self.grid.axis(0).bin_of(x)?;
        let by = self.grid.axis(1).bin_of(y)?;
        Some(self.group_of_cell_2d(bx, by))
    }

    fn group_of_cell_2d(&self, bx: usize, by: usize) -> usize {
        let mh = self.grid.axis(1).m();
        self.cell_labels
            .as_ref()
            .expect("2-D partition has cell labels")[bx * mh + by]
    }

    fn group_of_sample(&self, dataset: &Dataset, i: usize, clamp: bool) -> Result<(usize, bool)> {
        let mut clamped = false;
        let mut bins = [0usize; 2];
        for axis_i in 0..self.dimension() {
            let v = dataset.axis(axis_i)?[i];
            let axis = self.grid.axis(axis_i);
            bins[axis_i] = if clamp {
                let (b, c) = axis.bin_of_clamped(v);
                clamped |= c;
                b
            } else {
                axis.bin_of(v).ok_or(Error::OutOfRange {
                    index: i,
                    axis: axis_i,
                    value: v,
                    lo: axis.lo(),
                    hi: axis.hi(),
                })?
            };
        }
        let g = match self.dimension() {
            1 => self.group_of_bin_1d(bins[0]),
            _ => self.group_of_cell_2d(bins[0], bins[1]),
        };
        Ok((g, clamped))
    }
}

/// Per-sample group labels with per-group tallies for a chosen target.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAssignment {
    labels: Vec<usize>,
    counts: Vec<usize>,
    positives: Vec<usize>,
}

impl GroupAssignment {
    /// Builds an assignment from raw labels (used by tests and oracles);
    /// `positives` is the per-sample positivity under the chosen target.
    pub fn from_labels(labels: Vec<usize>, k: usize, positive: &[bool]) -> Result<Self> {
        if labels.len() != positive.len() {
            return Err(Error::invalid("labels and positives differ in length"));
        }
        let mut counts = vec![0usize; k];
        let mut positives = vec![0usize; k];
        for (&l, &p) in labels.iter().zip(positive) {
            if l >= k {
                return Err(Error::invalid(format!("label {l} out of range 0..{k}")));
            }
            counts[l] += 1;
            if p {
                positives[l] += 1;
            }
        }
        Ok(GroupAssignment {
            labels,
            counts,
            positives,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn positives(&self) -> &[usize] {
        &self.positives
    }

    pub fn total_positives(&self) -> usize {
        self.positives.iter().sum()
    }

    /// `w_k = n_k / N`.
    pub fn weight(&self, k: usize) -> f64 {
        self.counts[k] as f64 / self.n() as f64
    }

    /// `P(target = 1 | group k)`; `None` for an empty group.
    pub fn rate(&self, k: usize) -> Option<f64> {
        if self.counts[k] == 0 {
            None
        } else {
            Some(self.positives[k] as f64 / self.counts[k] as f64)
        }
    }

    /// Overall positive rate under the assignment's target.
    pub fn overall_rate(&self) -> f64 {
        self.total_positives() as f64 / self.n() as f64
    }
}

/// Labels every sample with its group under `partition`, tallying counts
/// and positive counts for outcome `Y`. Errors when a sample falls outside
/// the partition cover.
pub fn assign_groups(dataset: &Dataset, partition: &Partition) -> Result<GroupAssignment> {
    assign_groups_with(dataset, partition, Target::Y)
}

/// [`assign_groups`] with an explicit target variable.
pub fn assign_groups_with(
    dataset: &Dataset,
    partition: &Partition,
    target: Target,
) -> Result<GroupAssignment> {
    let (assignment, _clamped) = assign_impl(dataset, partition, target, false)?;
    Ok(assignment)
}

/// Like [`assign_groups_with`] but clamps out-of-cover samples into the
/// nearest boundary group instead of failing, returning how many samples
/// were clamped. Used when transferring a partition onto a new dataset.
pub fn assign_groups_clamped(
    dataset: &Dataset,
    partition: &Partition,
    target: Target,
) -> Result<(GroupAssignment, usize)> {
    assign_impl(dataset, partition, target, true)
}

fn assign_impl(
    dataset: &Dataset,
    partition: &Partition,
    target: Target,
    clamp: bool,
) -> Result<(GroupAssignment, usize)> {
    if dataset.dimension() != partition.dimension() {
        return Err(Error::DimensionMismatch {
            expected: partition.dimension(),
            got: dataset.dimension(),
        });
    }
    let positive = target.positives(dataset)?;
    let k = partition.k();
    let mut labels = Vec::with_capacity(dataset.len());
    let mut counts = vec![0usize; k];
    let mut positives = vec![0usize; k];
    let mut clamped_total = 0usize;
    for i in 0..dataset.len() {
        let (g, clamped) = partition.group_of_sample(dataset, i, clamp)?;
        if clamped {
            clamped_total += 1;
        }
        labels.push(g);
        counts[g] += 1;
        if positive[i] {
            positives[g] += 1;
        }
    }
    if clamped_total > 0 {
        log::warn!("{clamped_total} samples fell outside the partition cover and were clamped");
    }
    Ok((
        GroupAssignment {
            labels,
            counts,
            positives,
        },
        clamped_total,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset_1d(ls: &[f64]) -> Dataset {
        Dataset::new_1d(ls.to_vec(), vec![0; ls.len()], None, None).unwrap()
    }

    #[test]
    fn single_group_covers_everything() {
        let d = dataset_1d(&[0.0, 12.5, 99.9, 100.0]);
        let grid = Grid::new_1d(GridAxis::equal_width(0.0, 100.0, 4).unwrap()).unwrap();
        let p = Partition::segments(grid, vec![0, 4]).unwrap();
        let a = assign_groups(&d, &p).unwrap();
        assert_eq!(a.labels(), &[0, 0, 0, 0]);
        assert_eq!(a.counts(), &[4]);
    }

    #[test]
    fn boundary_values_go_to_the_left_closed_bin() {
        let d = dataset_1d(&[49.9, 50.0, 50.1]);
        let grid = Grid::new_1d(GridAxis::new(vec![0.0, 50.0, 100.0]).unwrap()).unwrap();
        let p = Partition::segments(grid, vec![0, 1, 2]).unwrap();
        let a = assign_groups(&d, &p).unwrap();
        assert_eq!(a.labels(), &[0, 1, 1]);
    }

    #[test]
    fn last_bin_is_right_closed() {
        let axis = GridAxis::equal_width(0.0, 100.0, 10).unwrap();
        assert_eq!(axis.bin_of(100.0), Some(9));
        assert_eq!(axis.bin_of(0.0), Some(0));
        assert_eq!(axis.bin_of(100.0001), None);
        assert_eq!(axis.bin_of(-0.0001), None);
    }

    #[test]
    fn quadrant_assignment_matches_pointwise_membership() {
        // Quadrants cut at L = 60, h = 55 over [0,100] x [0,110].
        let gx = GridAxis::new(vec![0.0, 60.0, 100.0]).unwrap();
        let gy = GridAxis::new(vec![0.0, 55.0, 110.0]).unwrap();
        let grid = Grid::new_2d(gx, gy).unwrap();
        let rects = vec![
            GridRect {
                x0: 0,
                x1: 1,
                y0: 0,
                y1: 1,
            },
            GridRect {
                x0: 0,
                x1: 1,
                y0: 1,
                y1: 2,
            },
            GridRect {
                x0: 1,
                x1: 2,
                y0: 0,
                y1: 1,
            },
            GridRect {
                x0: 1,
                x1: 2,
                y0: 1,
                y1: 2,
            },
        ];
        let p = Partition::rectangles(grid, rects).unwrap();

        let pts = [
            (10.0, 10.0),
            (10.0, 80.0),
            (70.0, 10.0),
            (70.0, 80.0),
            (59.9, 54.9),
            (60.0, 55.0),
            (100.0, 110.0),
            (0.0, 0.0),
        ];
        let l1: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let l2: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let d = Dataset::new_2d(l1, l2, vec![0; pts.len()], None, None).unwrap();
        let a = assign_groups(&d, &p).unwrap();

        for (i, &(x, y)) in pts.iter().enumerate() {
            // Direct membership test against the rectangle bounds.
            let expect = match (x >= 60.0, y >= 55.0) {
                (false, false) => 0,
                (false, true) => 1,
                (true, false) => 2,
                (true, true) => 3,
            };
            assert_eq!(a.labels()[i], expect, "point {i} ({x}, {y})");
        }
    }

    #[test]
    fn out_of_range_sample_is_reported_by_index() {
        let d = dataset_1d(&[1.0, 200.0]);
        let grid = Grid::new_1d(GridAxis::equal_width(0.0, 100.0, 4).unwrap()).unwrap();
        let p = Partition::segments(grid, vec![0, 4]).unwrap();
        match assign_groups(&d, &p) {
            Err(Error::OutOfRange { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected OutOfRange, got {other:?}"),
        }
    }

    #[test]
    fn clamped_assignment_counts_clamps() {
        let d = dataset_1d(&[-5.0, 1.0, 200.0]);
        let grid = Grid::new_1d(GridAxis::new(vec![0.0, 50.0, 100.0]).unwrap()).unwrap();
        let p = Partition::segments(grid, vec![0, 1, 2]).unwrap();
        let (a, clamped) = assign_groups_clamped(&d, &p, Target::Y).unwrap();
        assert_eq!(clamped, 2);
        assert_eq!(a.labels(), &[0, 0, 1]);
    }

    #[test]
    fn clamping_works_per_axis_in_2d() {
        let gx = GridAxis::new(vec![0.0, 50.0, 100.0]).unwrap();
        let gy = GridAxis::new(vec![0.0, 50.0, 100.0]).unwrap();
        let grid = Grid::new_2d(gx, gy).unwrap();
        let rects = vec![
            GridRect {
                x0: 0,
                x1: 1,
                y0: 0,
                y1: 2,
            },
            GridRect {
                x0: 1,
                x1: 2,
                y0: 0,
                y1: 2,
            },
        ];
        let p = Partition::rectangles(grid, rects).unwrap();
        let d = Dataset::new_2d(
            vec![-10.0, 150.0, 60.0],
            vec![150.0, -10.0, 60.0],
            vec![0, 0, 0],
            None,
            None,
        )
        .unwrap();
        assert!(assign_groups(&d, &p).is_err());
        let (a, clamped) = assign_groups_clamped(&d, &p, Target::Y).unwrap();
        assert_eq!(clamped, 2);
        assert_eq!(a.labels(), &[0, 1, 1]);
    }

    #[test]
    fn rectangles_must_tile_the_grid() {
        let gx = GridAxis::equal_width(0.0, 1.0, 2).unwrap();
        let gy = GridAxis::equal_width(0.0, 1.0, 2).unwrap();
        // Missing one quadrant.
        let rects = vec![
            GridRect {
                x0: 0,
                x1: 1,
                y0: 0,
                y1: 2,
            },
            GridRect {
                x0: 1,
                x1: 2,
                y0: 0,
                y1: 1,
            },
        ];
        assert!(
            Partition::rectangles(Grid::new_2d(gx.clone(), gy.clone()).unwrap(), rects).is_err()
        );
        // Overlapping tiles.
        let rects = vec![
            GridRect {
                x0: 0,
                x1: 2,
                y0: 0,
                y1: 2,
            },
            GridRect {
                x0: 1,
                x1: 2,
                y0: 1,
                y1: 2,
            },
        ];
        assert!(Partition::rectangles(Grid::new_2d(gx, gy).unwrap(), rects).is_err());
    }

    #[test]
    fn relabeling_is_per_sample() {
        // Assigning a superset never changes labels of existing samples.
        let grid = Grid::new_1d(GridAxis::equal_width(0.0, 10.0, 5).unwrap()).unwrap();
        let p = Partition::segments(grid, vec![0, 2, 5]).unwrap();
        let d1 = dataset_1d(&[1.0, 9.0]);
        let d2 = dataset_1d(&[1.0, 9.0, 5.0]);
        let a1 = assign_groups(&d1, &p).unwrap();
        let a2 = assign_groups(&d2, &p).unwrap();
        assert_eq!(a1.labels(), &a2.labels()[..2]);
    }

    #[test]
    fn dataset_rejects_bad_values() {
        assert!(Dataset::new_1d(vec![], vec![], None, None).is_err());
        assert!(Dataset::new_1d(vec![f64::NAN], vec![0], None, None).is_err());
        assert!(Dataset::new_1d(vec![1.0], vec![2], None, None).is_err());
        assert!(Dataset::new_1d(vec![1.0], vec![0], Some(vec![1.5]), None).is_err());
        let err = Dataset::from_samples(&[
            Sample {
                l1: 1.0,
                l2: None,
                y: 0,
                score: None,
                y_hat: None,
            },
            Sample {
                l1: 2.0,
                l2: Some(3.0),
                y: 0,
                score: None,
                y_hat: None,
            },
        ]);
        assert!(err.is_err());
    }
}
