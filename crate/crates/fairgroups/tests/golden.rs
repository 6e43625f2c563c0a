//! Byte-exact golden files for every serialized format. A format change
//! that alters bytes must be deliberate: regenerate with
//! `cargo test -p fairgroups --test golden -- --ignored` and review the
//! diff.

use std::path::PathBuf;

use fairgroups::debias::{fit_postprocessor, BarycenterSpec};
use fairgroups::io::{
    partition_to_json, read_dataset, read_partition, read_transport, transport_to_json,
    write_dataset_to_writer,
};
use fairgroups::segment::{fixed_partition_1d, fixed_partition_2d};
use fairgroups::types::{Dataset, GroupAssignment, PartitionMeta};

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn golden_dataset() -> Dataset {
    Dataset::new_1d(
        vec![12.5, 47.25, 99.0625],
        vec![1, 0, 1],
        Some(vec![0.875, 0.125, 0.5]),
        Some(vec![1, 0, 0]),
    )
    .unwrap()
}

fn golden_partition_1d() -> fairgroups::Partition {
    let mut p = fixed_partition_1d(0.0, 100.0, &[20.0, 30.0, 55.0, 88.0]).unwrap();
    p.set_meta(PartitionMeta {
        method: Some("fairgroups".into()),
        measure: Some("one_vs_all_di".into()),
        objective: Some(0.068),
        n: Some(50_000),
        seed: Some(7),
        timestamp: None,
    });
    p
}

fn golden_partition_2d() -> fairgroups::Partition {
    let mut p = fixed_partition_2d((0.0, 100.0), (0.0, 90.0), &[60.0], &[55.0]).unwrap();
    p.set_meta(PartitionMeta {
        method: Some("fixed:default-2d".into()),
        ..PartitionMeta::default()
    });
    p
}

fn golden_transport() -> fairgroups::debias::TransportMap {
    let scores: Vec<f64> = (0..32).map(|i| i as f64 / 31.0).collect();
    let labels: Vec<usize> = (0..32).map(|i| i % 2).collect();
    let assignment = GroupAssignment::from_labels(labels, 2, &[false; 32]).unwrap();
    fit_postprocessor(
        &scores,
        &assignment,
        0.5,
        &BarycenterSpec { resolution: 16 },
    )
    .unwrap()
}

#[test]
fn dataset_csv_matches_golden_bytes() {
    let mut bytes = Vec::new();
    write_dataset_to_writer(&golden_dataset(), &mut bytes).unwrap();
    let golden = std::fs::read(golden_dir().join("dataset_1d.csv")).unwrap();
    assert_eq!(bytes, golden, "dataset serialization drifted");
    assert_eq!(
        read_dataset(golden_dir().join("dataset_1d.csv")).unwrap(),
        golden_dataset()
    );
}

#[test]
fn partition_json_matches_golden_bytes() {
    for (file, partition) in [
        ("partition_1d.json", golden_partition_1d()),
        ("partition_2d.json", golden_partition_2d()),
    ] {
        let json = partition_to_json(&partition).unwrap();
        let golden = std::fs::read_to_string(golden_dir().join(file)).unwrap();
        assert_eq!(json, golden, "{file} serialization drifted");
        assert_eq!(read_partition(golden_dir().join(file)).unwrap(), partition);
    }
}

#[test]
fn transport_json_matches_golden_bytes() {
    let json = transport_to_json(&golden_transport()).unwrap();
    let golden = std::fs::read_to_string(golden_dir().join("transport.json")).unwrap();
    assert_eq!(json, golden, "transport serialization drifted");
    assert_eq!(
        read_transport(golden_dir().join("transport.json")).unwrap(),
        golden_transport()
    );
}

#[test]
#[ignore = "writes the golden files; run after a deliberate format change"]
fn regenerate_golden_files() {
    let dir = golden_dir();
    std::fs::create_dir_all(&dir).unwrap();
    let mut bytes = Vec::new();
    write_dataset_to_writer(&golden_dataset(), &mut bytes).unwrap();
    std::fs::write(dir.join("dataset_1d.csv"), bytes).unwrap();
    std::fs::write(
        dir.join("partition_1d.json"),
        partition_to_json(&golden_partition_1d()).unwrap(),
    )
    .unwrap();
    std::fs::write(
        dir.join("partition_2d.json"),
        partition_to_json(&golden_partition_2d()).unwrap(),
    )
    .unwrap();
    std::fs::write(
        dir.join("transport.json"),
        transport_to_json(&golden_transport()).unwrap(),
    )
    .unwrap();
}
