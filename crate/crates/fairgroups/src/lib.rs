//! Data-driven grouping of continuous sensitive attributes, and score
//! repair toward statistical parity on the resulting groups.
//!
//! Given samples of a continuous (1-D or 2-D) sensitive value `L` and a
//! binary outcome, the crate searches for the partition of the sensitive
//! space into `K` connected groups that maximizes the inter-group variance
//! of a one-vs-all disparate-impact measure — the grouping under which
//! observed discrimination is most sharply expressed. Fitted groups can
//! then drive an optimal-transport post-processing step that aligns
//! per-group score distributions toward their Wasserstein-1 barycenter.
//!
//! ```
//! use fairgroups::segment::{fairgroups_1d, SearchConfig};
//! use fairgroups::synth::{benchmark_step_spec, benchmark_uniform, generate_step_dataset};
//!
//! let data = generate_step_dataset(&benchmark_step_spec(), &benchmark_uniform(), 2000, 7)?;
//! let result = fairgroups_1d(&data, &SearchConfig::new(5))?;
//! assert_eq!(result.partition.k(), 5);
//! # Ok::<(), fairgroups::Error>(())
//! ```

pub mod color;
pub mod debias;
mod error;
pub mod io;
pub mod metrics;
pub mod rangesum;
pub mod segment;
pub mod synth;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    assign_groups, assign_groups_clamped, assign_groups_with, Dataset, Grid, GridAxis, GridRect,
    GroupAssignment, Partition, PartitionMeta, PartitionShape, Sample, Target,
};
