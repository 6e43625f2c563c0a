//! Synthetic populations with step-shaped outcome probabilities, and a
//! controllable biased scorer for exercising the repair pipeline.
//!
//! All randomness comes from a ChaCha8 stream seeded with
//! `seed_from_u64`, consumed as 53-bit standard uniforms. Normal draws use
//! the Box-Muller transform `z = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)` (one
//! draw per uniform pair), and truncated normals reject from the parent
//! normal. Identical seeds therefore reproduce identical datasets,
//! bit for bit.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::types::{Dataset, Grid, GridAxis, Partition};

/// Right-closed step function on a breakpoint grid: value `g` applies on
/// `(b[g], b[g+1]]`, with the first interval closed on both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFn {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepFn {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::invalid(
                "need G + 1 breakpoints for G step values".to_string(),
            ));
        }
        for w in breakpoints.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::invalid(
                    "breakpoints must be strictly increasing".to_string(),
                ));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("step values must be finite"));
        }
        Ok(StepFn {
            breakpoints,
            values,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at `l`; values outside the breakpoint range take the nearest
    /// end step.
    pub fn value_at(&self, l: f64) -> f64 {
        let inner = &self.breakpoints[1..self.breakpoints.len() - 1];
        let g = inner.partition_point(|&b| b < l);
        self.values[g]
    }
}

/// Step function whose values are success probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSpec(StepFn);

impl StepSpec {
    pub fn new(breakpoints: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("success probabilities must lie in [0, 1]"));
        }
        Ok(StepSpec(StepFn::new(breakpoints, probabilities)?))
    }

    pub fn step_fn(&self) -> &StepFn {
        &self.0
    }

    pub fn probability_at(&self, l: f64) -> f64 {
        self.0.value_at(l)
    }
}

/// Distribution of the sensitive value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SensitiveDistribution {
    Uniform { a: f64, b: f64 },
    TruncatedNormal { mean: f64, sd: f64, a: f64, b: f64 },
}

impl SensitiveDistribution {
    fn validate(&self) -> Result<()> {
        let (a, b) = match self {
            SensitiveDistribution::Uniform { a, b } => (*a, *b),
            SensitiveDistribution::TruncatedNormal { sd, a, b, .. } => {
                if !(*sd > 0.0) {
                    return Err(Error::invalid("sd must be positive"));
                }
                (*a, *b)
            }
        };
        if !(a < b) {
            return Err(Error::invalid("support bounds must satisfy a < b"));
        }
        Ok(())
    }
}

#[inline]
fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>()
}

/// Standard normal via Box-Muller; consumes exactly two uniforms.
#[inline]
fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = uniform01(rng);
    let u2 = uniform01(rng);
    (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn draw_sensitive(dist: &SensitiveDistribution, rng: &mut ChaCha8Rng) -> f64 {
    match *dist {
        SensitiveDistribution::Uniform { a, b } => a + (b - a) * uniform01(rng),
        SensitiveDistribution::TruncatedNormal { mean, sd, a, b } => loop {
            let x = mean + sd * std_normal(rng);
            if (a..=b).contains(&x) {
                return x;
            }
        },
    }
}

/// Samples `n` pairs `(L, Y)` with `L ~ dist` and
/// `Y ~ Bernoulli(spec(L))`. Deterministic given `seed`.
pub fn generate_step_dataset(
    spec: &StepSpec,
    dist: &SensitiveDistribution,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    dist.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut l = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let v = draw_sensitive(dist, &mut rng);
        let p = spec.probability_at(v);
        l.push(v);
        y.push(u8::from(uniform01(&mut rng) < p));
    }
    Dataset::new_1d(l, y, None, None)
}

/// Base score assigned to negatives by the synthetic scorer.
pub const SCORE_BASE_NEGATIVE: f64 = 0.4;
/// Base score assigned to positives by the synthetic scorer.
pub const SCORE_BASE_POSITIVE: f64 = 0.6;

/// Attaches scores and thresholded predictions to a 1-D dataset:
/// `score = clamp(base(Y) + shift(L) + noise_sd * z)` with
/// `base(0) = 0.4`, `base(1) = 0.6`, and `y_hat = 1{score > 0.5}`.
///
/// With zero shifts and zero noise the scorer is perfectly calibrated;
/// the per-interval `shift` plants a group-dependent bias for repair
/// experiments. Deterministic given `seed`.
pub fn generate_biased_scores(
    dataset: &Dataset,
    group_bias: &StepFn,
    noise_sd: f64,
    seed: u64,
) -> Result<Dataset> {
    if dataset.dimension() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: dataset.dimension(),
        });
    }
    if !(noise_sd >= 0.0) {
        return Err(Error::invalid("noise_sd must be non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = dataset.len();
    let mut score = Vec::with_capacity(n);
    let mut y_hat = Vec::with_capacity(n);
    for i in 0..n {
        let base = if dataset.y()[i] == 1 {
            SCORE_BASE_POSITIVE
        } else {
            SCORE_BASE_NEGATIVE
        };
        let noise = if noise_sd > 0.0 {
            noise_sd * std_normal(&mut rng)
        } else {
            0.0
        };
        let s = (base + group_bias.value_at(dataset.l1()[i]) + noise).clamp(0.0, 1.0);
        score.push(s);
        y_hat.push(u8::from(s > 0.5));
    }
    Dataset::new_1d(
        dataset.l1().to_vec(),
        dataset.y().to_vec(),
        Some(score),
        Some(y_hat),
    )
}

/// The five-level step population used across the test suite:
/// success probability 0.1 on [0, 20], 0.3 on (20, 30], 0.5 on (30, 55],
/// 0.7 on (55, 88] and 0.9 on (88, 100].
pub fn benchmark_step_spec() -> StepSpec {
    StepSpec::new(
        vec![0.0, 20.0, 30.0, 55.0, 88.0, 100.0],
        vec![0.1, 0.3, 0.5, 0.7, 0.9],
    )
    .expect("static spec is valid")
}

/// `L ~ U(0, 100)`.
pub fn benchmark_uniform() -> SensitiveDistribution {
    SensitiveDistribution::Uniform { a: 0.0, b: 100.0 }
}

/// `L ~ N(50, 20)` truncated to [0, 100].
pub fn benchmark_truncated_normal() -> SensitiveDistribution {
    SensitiveDistribution::TruncatedNormal {
        mean: 50.0,
        sd: 20.0,
        a: 0.0,
        b: 100.0,
    }
}

/// Monotone staircase of score shifts used by the planted-bias scorer:
/// -0.2 to +0.2 across five intervals of the sensitive range.
pub fn benchmark_bias_shift() -> StepFn {
    StepFn::new(
        vec![0.0, 20.0, 35.0, 55.0, 80.0, 100.0],
        vec![-0.2, -0.1, 0.0, 0.1, 0.2],
    )
    .expect("static shift is valid")
}

/// The partition whose groups are exactly the benchmark step intervals.
pub fn benchmark_ground_truth_partition() -> Partition {
    let axis = GridAxis::new(vec![0.0, 20.0, 30.0, 55.0, 88.0, 100.0]).expect("static grid");
    let grid = Grid::new_1d(axis).expect("static grid");
    Partition::segments(grid, vec![0, 1, 2, 3, 4, 5]).expect("static partition")
}
