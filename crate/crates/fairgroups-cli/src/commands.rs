//! Subcommand implementations: config merging, execution, artifact and
//! manifest writing.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use fairgroups::debias::{debias_report, fit_postprocessor, BarycenterSpec};
use fairgroups::io::{
    read_dataset, read_partition, write_dataset, write_partition, write_transport, RunConfig,
};
use fairgroups::metrics::{
    assignment_variance, group_stats, rand_index, FairnessMeasure, GroupStats,
};
use fairgroups::segment::{
    bias_amplification_report, fairgroups_1d, fairgroups_2d, fixed_partition, fixed_partition_1d,
    kmeans_1d, transfer_evaluate, FixedScheme, GridSpec, SearchConfig, SearchResult,
};
use fairgroups::synth::{
    benchmark_bias_shift, benchmark_step_spec, benchmark_truncated_normal, benchmark_uniform,
    generate_biased_scores, generate_step_dataset,
};
use fairgroups::{
    assign_groups_clamped, assign_groups_with, Dataset, Error, Partition, PartitionShape, Result,
    Target,
};

use crate::args::{self, Cli, Command};
use crate::manifest::Manifest;

pub fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_toml_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(output) = cli.output {
        config.output = output;
    }
    if let Some(threads) = cli.threads {
        config.threads = threads;
    }
    std::fs::create_dir_all(&config.output)?;
    let mut manifest = Manifest::new(config.seed);
    if let Some(path) = &cli.config {
        manifest.record_input(path)?;
    }

    match cli.command {
        Command::Generate(a) => generate(a, &config, &mut manifest),
        Command::Partition(a) => partition(a, &config, &mut manifest),
        Command::Evaluate(a) => evaluate(a, &config, &mut manifest),
        Command::Transfer(a) => transfer(a, &config, &mut manifest),
        Command::Debias(a) => debias(a, &config, &mut manifest),
        Command::Report(a) => report(a, &config, &mut manifest),
    }?;

    manifest.write(&config.output)?;
    Ok(())
}

fn parse_target(name: &str, threshold: f64) -> Result<Target> {
    match name {
        "y" => Ok(Target::Y),
        "y_hat" => Ok(Target::YHat),
        "score" => Ok(Target::Score { threshold }),
        other => Err(Error::InvalidArgument(format!(
            "unknown target `{other}` (expected y, y_hat or score)"
        ))),
    }
}

fn emit<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    println!("{}", s.trim_end());
    Ok(s)
}

fn write_text(path: &Path, body: &str, manifest: &mut Manifest) -> Result<()> {
    let mut f = File::create(path)?;
    f.write_all(body.as_bytes())?;
    manifest.record_output(path);
    Ok(())
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct GenerateSummary {
    preset: String,
    n: usize,
    seed: u64,
    positive_rate: f64,
    scored: bool,
    path: String,
}

fn generate(a: args::GenerateArgs, config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let preset = a
        .preset
        .or_else(|| config.preset.clone())
        .unwrap_or_else(|| "paper-uniform".to_string());
    let dist = match preset.as_str() {
        "paper-uniform" => benchmark_uniform(),
        "paper-truncnormal" => benchmark_truncated_normal(),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown preset `{other}` (expected paper-uniform or paper-truncnormal)"
            )))
        }
    };
    let n = a.n.unwrap_or(config.n);
    let scored = a.scored || config.scored;
    let noise_sd = a.noise_sd.unwrap_or(config.noise_sd);

    eprintln!(
        "generating {n} samples from preset {preset} (seed {})",
        config.seed
    );
    let mut data = generate_step_dataset(&benchmark_step_spec(), &dist, n, config.seed)?;
    if scored {
        // The scorer stream is derived from the run seed so one seed pins
        // the whole artifact.
        data = generate_biased_scores(
            &data,
            &benchmark_bias_shift(),
            noise_sd,
            config.seed.wrapping_add(1),
        )?;
    }

    let out = a
        .out_data
        .unwrap_or_else(|| config.output.join("dataset.csv"));
    write_dataset(&data, &out)?;
    manifest.record_output(&out);
    emit(&GenerateSummary {
        preset,
        n,
        seed: config.seed,
        positive_rate: data.positive_rate(),
        scored,
        path: out.display().to_string(),
    })?;
    Ok(())
}

// ---------------------------------------------------------------------------
// partition
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct PartitionSummary {
    method: String,
    k: usize,
    dimension: usize,
    objective: f64,
    /// Interior cut positions in value space (1-D segment results).
    cuts: Option<Vec<f64>>,
    disconnected_clusters: bool,
    candidates_evaluated: u64,
    stats: GroupStats,
    path: String,
}

fn required_input(input: Option<PathBuf>, config: &RunConfig) -> Result<PathBuf> {
    input
        .or_else(|| config.input.clone())
        .ok_or_else(|| Error::InvalidArgument("an input dataset is required (--input)".into()))
}

fn search_config(a: &args::PartitionArgs, config: &RunConfig, dimension: usize) -> SearchConfig {
    let m = a.m.unwrap_or(config.m);
    let bounds = match (a.lo.or(config.lo), a.hi.or(config.hi)) {
        (Some(lo), Some(hi)) => Some((lo, hi)),
        _ => None,
    };
    let mut sc = SearchConfig::new(a.k.unwrap_or(config.k))
        .with_grid(GridSpec::EqualWidth { m, bounds })
        .with_threads(config.threads)
        .with_fast_path(!(a.exhaustive || config.exhaustive));
    if dimension == 2 {
        let m2 = a.m2.or(config.m2).unwrap_or(m);
        let bounds2 = match (a.lo2.or(config.lo2), a.hi2.or(config.hi2)) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            _ => None,
        };
        sc = sc.with_grid2(GridSpec::EqualWidth {
            m: m2,
            bounds: bounds2,
        });
    }
    sc.ci_level = config.level;
    sc
}

fn partition(a: args::PartitionArgs, config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let input = required_input(a.input.clone(), config)?;
    manifest.record_input(&input)?;
    let data = read_dataset(&input)?;
    let target = parse_target(
        a.target.as_deref().unwrap_or(&config.target),
        a.score_threshold.unwrap_or(config.score_threshold),
    )?;
    let method = a.method.clone().unwrap_or_else(|| config.method.clone());

    let result: SearchResult = match method.as_str() {
        "fairgroups" => {
            let sc = search_config(&a, config, data.dimension()).with_target(target);
            eprintln!(
                "fitting fairgroups partition (k = {}, dimension {})",
                sc.k,
                data.dimension()
            );
            if data.dimension() == 2 {
                fairgroups_2d(&data, &sc)?
            } else {
                fairgroups_1d(&data, &sc)?
            }
        }
        "kmeans" => {
            let sc = search_config(&a, config, data.dimension()).with_target(target);
            eprintln!("fitting k-means partition (k = {})", sc.k);
            kmeans_1d(&data, &sc)?
        }
        "fixed" => {
            let scheme = a.scheme.as_deref().or(config.scheme.as_deref());
            let mut p = match scheme {
                Some("fitzpatrick-ita") => fixed_partition(FixedScheme::FitzpatrickIta),
                Some("l60") => fixed_partition(FixedScheme::LightDarkL60),
                Some("default-2d") => fixed_partition(FixedScheme::Default2d),
                Some(other) => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown scheme `{other}` (expected fitzpatrick-ita, l60 or default-2d)"
                    )))
                }
                None => {
                    let thresholds = a
                        .thresholds
                        .clone()
                        .unwrap_or_else(|| config.thresholds.clone());
                    if thresholds.is_empty() {
                        return Err(Error::InvalidArgument(
                            "the fixed method needs --thresholds or --scheme".into(),
                        ));
                    }
                    let lo = a
                        .lo
                        .or(config.lo)
                        .unwrap_or_else(|| data.l1().iter().copied().fold(f64::INFINITY, f64::min));
                    let hi = a.hi.or(config.hi).unwrap_or_else(|| {
                        data.l1().iter().copied().fold(f64::NEG_INFINITY, f64::max)
                    });
                    fixed_partition_1d(lo, hi, &thresholds)?
                }
            };
            let assignment = assign_groups_with(&data, &p, target)?;
            let objective = assignment_variance(&assignment, FairnessMeasure::OneVsAllDi)?;
            let stats = group_stats(&assignment, config.level)?;
            let mut meta = p.meta().clone();
            meta.measure = Some(FairnessMeasure::OneVsAllDi.name().into());
            meta.objective = Some(objective);
            meta.n = Some(data.len());
            p.set_meta(meta);
            SearchResult {
                partition: p,
                objective,
                stats,
                diagnostics: Default::default(),
            }
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown method `{other}` (expected fairgroups, kmeans or fixed)"
            )))
        }
    };

    let out = a
        .out_partition
        .unwrap_or_else(|| config.output.join("partition.json"));
    write_partition(&result.partition, &out)?;
    manifest.record_output(&out);

    let cuts = match result.partition.shape() {
        PartitionShape::Segments { boundaries } => {
            let edges = result.partition.grid().axis(0).edges();
            Some(
                boundaries[1..boundaries.len() - 1]
                    .iter()
                    .map(|&b| edges[b])
                    .collect(),
            )
        }
        _ => None,
    };
    emit(&PartitionSummary {
        method,
        k: result.partition.k(),
        dimension: result.partition.dimension(),
        objective: result.objective,
        cuts,
        disconnected_clusters: result.diagnostics.disconnected_clusters,
        candidates_evaluated: result.diagnostics.candidates_evaluated,
        stats: result.stats,
        path: out.display().to_string(),
    })?;
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct EvaluateSummary {
    variance: f64,
    stats: GroupStats,
    /// Present when a second partition was given.
    rand_index: Option<f64>,
    against_variance: Option<f64>,
}

fn evaluate(a: args::EvaluateArgs, config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let input = required_input(a.input.clone(), config)?;
    manifest.record_input(&input)?;
    manifest.record_input(&a.partition)?;
    let data = read_dataset(&input)?;
    let p = read_partition(&a.partition)?;
    let target = parse_target(
        a.target.as_deref().unwrap_or(&config.target),
        a.score_threshold.unwrap_or(config.score_threshold),
    )?;
    let level = a.level.unwrap_or(config.level);

    let assignment = assign_groups_with(&data, &p, target)?;
    let variance = assignment_variance(&assignment, FairnessMeasure::OneVsAllDi)?;
    let stats = group_stats(&assignment, level)?;

    let (rand, against_variance) = match &a.against {
        Some(path) => {
            manifest.record_input(path)?;
            let q = read_partition(path)?;
            let other = assign_groups_with(&data, &q, target)?;
            (
                Some(rand_index(&assignment, &other)?),
                Some(assignment_variance(&other, FairnessMeasure::OneVsAllDi)?),
            )
        }
        None => (None, None),
    };

    let summary = EvaluateSummary {
        variance,
        stats,
        rand_index: rand,
        against_variance,
    };
    let body = emit(&summary)?;
    write_text(&config.output.join("evaluation.json"), &body, manifest)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// transfer
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TransferSummary {
    variance: f64,
    clamped_samples: usize,
    stats: GroupStats,
}

fn transfer(a: args::TransferArgs, config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let input = required_input(a.input.clone(), config)?;
    manifest.record_input(&input)?;
    manifest.record_input(&a.partition)?;
    let data = read_dataset(&input)?;
    let p = read_partition(&a.partition)?;
    let target = parse_target(
        a.target.as_deref().unwrap_or(&config.target),
        a.score_threshold.unwrap_or(config.score_threshold),
    )?;
    let report = transfer_evaluate(&p, &data, target, a.level.unwrap_or(config.level))?;
    let summary = TransferSummary {
        variance: report.variance,
        clamped_samples: report.clamped_samples,
        stats: report.stats,
    };
    let body = emit(&summary)?;
    write_text(&config.output.join("transfer.json"), &body, manifest)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// debias
// ---------------------------------------------------------------------------

fn debias(a: args::DebiasArgs, config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let input = required_input(a.input.clone(), config)?;
    manifest.record_input(&input)?;
    manifest.record_input(&a.partition)?;
    let data = read_dataset(&input)?;
    let p = read_partition(&a.partition)?;
    let alphas = a.alphas.clone().unwrap_or_else(|| config.alphas.clone());
    let spec = BarycenterSpec {
        resolution: a.resolution.unwrap_or(config.resolution),
    };

    eprintln!("evaluating repair at alphas {alphas:?}");
    let report = debias_report(&data, &p, &alphas, &spec, config.seed)?;

    let body = emit(&report)?;
    write_text(&config.output.join("debias.json"), &body, manifest)?;

    let mut csv = String::from("alpha,accuracy,pr_auc,hgr\n");
    csv.push_str(&format!(
        "baseline,{},{},{}\n",
        report.baseline.accuracy, report.baseline.pr_auc, report.baseline.hgr
    ));
    for row in &report.rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            row.alpha, row.metrics.accuracy, row.metrics.pr_auc, row.metrics.hgr
        ));
    }
    write_text(&config.output.join("debias.csv"), &csv, manifest)?;

    if let Some(alpha) = a.fit_alpha {
        let scores = data.score().ok_or(Error::MissingColumn("score"))?;
        let assignment = assign_groups_with(&data, &p, Target::Y)?;
        let map = fit_postprocessor(scores, &assignment, alpha, &spec)?;
        let out = a
            .out_transport
            .unwrap_or_else(|| config.output.join("transport.json"));
        write_transport(&map, &out)?;
        manifest.record_output(&out);
        eprintln!("transport map fitted at alpha {alpha} -> {}", out.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct AmplificationRow {
    group: usize,
    phi_y: f64,
    ci_y_low: f64,
    ci_y_high: f64,
    phi_y_hat: f64,
    ci_y_hat_low: f64,
    ci_y_hat_high: f64,
    amplified: bool,
}

#[derive(Serialize)]
struct ReportSummary {
    variance: f64,
    level: f64,
    stats: GroupStats,
    amplification: Option<Vec<AmplificationRow>>,
}

fn report(a: args::ReportArgs, config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let input = required_input(a.input.clone(), config)?;
    manifest.record_input(&input)?;
    manifest.record_input(&a.partition)?;
    let data = read_dataset(&input)?;
    let p = read_partition(&a.partition)?;
    let target = parse_target(
        a.target.as_deref().unwrap_or(&config.target),
        a.score_threshold.unwrap_or(config.score_threshold),
    )?;
    let level = a.level.unwrap_or(config.level);

    let assignment = assign_or_clamped(&data, &p, target)?;
    let variance = assignment_variance(&assignment, FairnessMeasure::OneVsAllDi)?;
    let stats = group_stats(&assignment, level)?;

    let amplification = if a.amplification {
        let rows = bias_amplification_report(&data, &p, level)?;
        Some(
            rows.rows
                .into_iter()
                .map(|r| AmplificationRow {
                    group: r.group,
                    phi_y: r.phi_y,
                    ci_y_low: r.ci_y.low,
                    ci_y_high: r.ci_y.high,
                    phi_y_hat: r.phi_y_hat,
                    ci_y_hat_low: r.ci_y_hat.low,
                    ci_y_hat_high: r.ci_y_hat.high,
                    amplified: r.amplified,
                })
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };

    let summary = ReportSummary {
        variance,
        level,
        stats,
        amplification,
    };
    let body = emit(&summary)?;
    write_text(&config.output.join("report.json"), &body, manifest)?;

    let mut csv = String::from("group,weight,rate,phi,ci_low,ci_high\n");
    for (k, g) in summary.stats.groups.iter().enumerate() {
        csv.push_str(&format!(
            "{k},{},{},{},{},{}\n",
            g.weight, g.rate, g.phi, g.ci_low, g.ci_high
        ));
    }
    if let Some(rows) = &summary.amplification {
        csv.push_str(
            "\ngroup,phi_y,ci_y_low,ci_y_high,phi_y_hat,ci_y_hat_low,ci_y_hat_high,amplified\n",
        );
        for r in rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.group,
                r.phi_y,
                r.ci_y_low,
                r.ci_y_high,
                r.phi_y_hat,
                r.ci_y_hat_low,
                r.ci_y_hat_high,
                r.amplified
            ));
        }
    }
    write_text(&config.output.join("report.csv"), &csv, manifest)?;
    Ok(())
}

fn assign_or_clamped(
    data: &Dataset,
    p: &Partition,
    target: Target,
) -> Result<fairgroups::GroupAssignment> {
    match assign_groups_with(data, p, target) {
        Ok(a) => Ok(a),
        Err(Error::OutOfRange { .. }) => Ok(assign_groups_clamped(data, p, target)?.0),
        Err(e) => Err(e),
    }
}
