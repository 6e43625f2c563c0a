//! Rectangle partition search over a two-axis grid.
//!
//! The search space is the set of guillotine partitions: recursive binary
//! cuts along grid lines until `K` rectangles remain. Because the default
//! measure has zero weighted mean, the variance objective is additive over
//! groups, and a memoized recursion over (sub-rectangle, group budget)
//! maximizes it exactly over that space. Rectangle statistics come from
//! the 2-D prefix-sum tables, so each term costs four lookups.

use std::collections::HashMap;

use super::{SearchConfig, SearchDiagnostics, SearchResult};
use crate::error::{Error, Result};
use crate::metrics::group_stats;
use crate::rangesum::{rect_prefix_sums, RectPrefixSums};
use crate::types::{assign_groups_with, Dataset, Grid, GridRect, Partition, PartitionMeta};

/// Group-count cap for the 2-D search.
pub const MAX_GROUPS_2D: usize = 16;
/// Per-axis grid cap for the 2-D search.
pub const MAX_BINS_2D_SEARCH: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct State {
    rect: GridRect,
    k: usize,
}

#[derive(Debug, Clone, Copy)]
enum Choice {
    Leaf,
    /// Split `rect` at `pos` along `axis` (0 = first axis), giving `k1`
    /// groups to the low side.
    Cut {
        axis: u8,
        pos: usize,
        k1: usize,
    },
}

struct Search<'a> {
    table: &'a RectPrefixSums,
    n: f64,
    overall: f64,
    min_count: f64,
    memo: HashMap<State, (f64, Choice)>,
    evaluated: u64,
}

impl Search<'_> {
    /// `w * psi^2` of a single rectangle, `None` when undersized.
    fn leaf_term(&self, rect: &GridRect) -> Option<f64> {
        let count = self.table.count(rect) as f64;
        if count < self.min_count || count == 0.0 {
            return None;
        }
        let rate = self.table.positives(rect) as f64 / count;
        let w = count / self.n;
        let psi = rate - self.overall;
        Some(w * psi * psi)
    }

    fn best(&mut self, state: State) -> Option<f64> {
        if let Some(&(v, _)) = self.memo.get(&state) {
            return if v == f64::NEG_INFINITY {
                None
            } else {
                Some(v)
            };
        }
        let State { rect, k } = state;
        let mut best = f64::NEG_INFINITY;
        let mut choice = Choice::Leaf;
        if k == 1 {
            if let Some(v) = self.leaf_term(&rect) {
                self.evaluated += 1;
                best = v;
            }
        } else if (self.table.count(&rect) as f64) >= self.min_count * k as f64 {
            // Vertical cuts (first axis), then horizontal, ascending; the
            // first strict improvement wins, which keeps the result
            // deterministic.
            for axis in 0..2u8 {
                let (lo, hi) = if axis == 0 {
                    (rect.x0, rect.x1)
                } else {
                    (rect.y0, rect.y1)
                };
                for pos in lo + 1..hi {
                    let (low, high) = split(&rect, axis, pos);
                    for k1 in 1..k {
                        let k2 = k - k1;
                        if k1 > cells(&low) || k2 > cells(&high) {
                            continue;
                        }
                        let (Some(a), Some(b)) = (
                            self.best(State { rect: low, k: k1 }),
                            self.best(State { rect: high, k: k2 }),
                        ) else {
                            continue;
                        };
                        if a + b > best {
                            best = a + b;
                            choice = Choice::Cut { axis, pos, k1 };
                        }
                    }
                }
            }
        }
        self.memo.insert(state, (best, choice));
        if best == f64::NEG_INFINITY {
            None
        } else {
            Some(best)
        }
    }

    fn collect(&self, state: State, out: &mut Vec<GridRect>) {
        let (_, choice) = self.memo[&state];
        match choice {
            Choice::Leaf => out.push(state.rect),
            Choice::Cut { axis, pos, k1 } => {
                let (low, high) = split(&state.rect, axis, pos);
                self.collect(State { rect: low, k: k1 }, out);
                self.collect(
                    State {
                        rect: high,
                        k: state.k - k1,
                    },
                    out,
                );
            }
        }
    }
}

fn split(rect: &GridRect, axis: u8, pos: usize) -> (GridRect, GridRect) {
    if axis == 0 {
        (GridRect { x1: pos, ..*rect }, GridRect { x0: pos, ..*rect })
    } else {
        (GridRect { y1: pos, ..*rect }, GridRect { y0: pos, ..*rect })
    }
}

fn cells(rect: &GridRect) -> usize {
    (rect.x1 - rect.x0) * (rect.y1 - rect.y0)
}

/// Exhaustive search over guillotine rectangle partitions of a 2-D grid.
///
/// Groups in the result are numbered in lexicographic order of their
/// rectangle corners, which makes the output deterministic.
pub fn fairgroups_2d(dataset: &Dataset, config: &SearchConfig) -> Result<SearchResult> {
    if dataset.dimension() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: dataset.dimension(),
        });
    }
    if config.k < 1 || config.k > MAX_GROUPS_2D {
        return Err(Error::invalid(format!(
            "2-D search supports 1 <= K <= {MAX_GROUPS_2D}, got {}",
            config.k
        )));
    }
    if !config.measure.is_zero_mean() {
        return Err(Error::invalid(
            "2-D search requires a zero-mean measure".to_string(),
        ));
    }
    let ax = config.grid.resolve(dataset.l1())?;
    let ay = config
        .grid2
        .as_ref()
        .ok_or_else(|| Error::invalid("2-D search needs a grid for the second axis"))?
        .resolve(dataset.l2().expect("2-D dataset"))?;
    if ax.m() > MAX_BINS_2D_SEARCH || ay.m() > MAX_BINS_2D_SEARCH {
        return Err(Error::invalid(format!(
            "2-D search grids are capped at {MAX_BINS_2D_SEARCH} bins per axis"
        )));
    }
    if config.k > ax.m() * ay.m() {
        return Err(Error::invalid("K exceeds the number of grid cells"));
    }
    let grid = Grid::new_2d(ax, ay)?;
    let table = rect_prefix_sums(dataset, &grid, config.target)?;
    let full = GridRect {
        x0: 0,
        x1: grid.axis(0).m(),
        y0: 0,
        y1: grid.axis(1).m(),
    };
    let n = dataset.len() as f64;
    let overall = table.positives(&full) as f64 / n;

    let mut search = Search {
        table: &table,
        n,
        overall,
        min_count: config.min_group_count.max(1) as f64,
        memo: HashMap::new(),
        evaluated: 0,
    };
    let root = State {
        rect: full,
        k: config.k,
    };
    let objective = search.best(root).ok_or_else(|| {
        Error::Infeasible(format!(
            "no guillotine partition into {} non-empty rectangles exists",
            config.k
        ))
    })?;
    let mut rects = Vec::with_capacity(config.k);
    search.collect(root, &mut rects);
    rects.sort();

    let mut partition = Partition::rectangles(grid, rects)?;
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
            candidates_evaluated: search.evaluated,
            disconnected_clusters: false,
        },
    })
}
