//! Acceptance: rerunning any pipeline with the same seed produces
//! byte-identical outputs, with only the manifest timestamp differing.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fairgroups"))
}

fn run_ok(args: &[&str]) {
    let out = bin().args(args).output().expect("spawn");
    assert!(
        out.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Runs the full pipeline into `dir` and returns every produced file.
fn run_pipeline(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let d = dir.to_str().unwrap();
    let data = format!("{d}/dataset.csv");
    let partition = format!("{d}/partition.json");
    let gt = format!("{d}/gt.json");

    run_ok(&[
        "generate",
        "--preset",
        "paper-uniform",
        "--n",
        "20000",
        "--seed",
        "7",
        "--scored",
        "--output",
        d,
    ]);
    run_ok(&[
        "partition",
        "--input",
        &data,
        "--method",
        "fairgroups",
        "--k",
        "5",
        "--m",
        "100",
        "--output",
        d,
    ]);
    run_ok(&[
        "partition",
        "--input",
        &data,
        "--method",
        "fixed",
        "--thresholds",
        "20,30,55,88",
        "--lo",
        "0",
        "--hi",
        "100",
        "--out-partition",
        &gt,
        "--output",
        d,
    ]);
    run_ok(&[
        "evaluate",
        "--input",
        &data,
        "--partition",
        &gt,
        "--against",
        &partition,
        "--output",
        d,
    ]);
    run_ok(&[
        "debias",
        "--input",
        &data,
        "--partition",
        &partition,
        "--alphas",
        "1,0.5,0",
        "--seed",
        "11",
        "--fit-alpha",
        "0.5",
        "--output",
        d,
    ]);
    run_ok(&[
        "report",
        "--input",
        &data,
        "--partition",
        &partition,
        "--amplification",
        "--output",
        d,
    ]);

    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        let name = entry.file_name().into_string().unwrap();
        files.insert(name, std::fs::read(entry.path()).unwrap());
    }
    files
}

#[test]
fn criterion_11_pipeline_reruns_are_byte_identical() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let a = run_pipeline(dir_a.path());
    let b = run_pipeline(dir_b.path());

    assert_eq!(
        a.keys().collect::<Vec<_>>(),
        b.keys().collect::<Vec<_>>(),
        "runs produced different file sets"
    );
    for (name, bytes_a) in &a {
        let bytes_b = &b[name];
        if name == "manifest.json" {
            // The manifest may differ only in its timestamp.
            let strip = |bytes: &[u8]| -> serde_json::Value {
                let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
                let obj = v.as_object_mut().unwrap();
                assert!(obj.remove("timestamp_unix").is_some());
                // Output paths embed the temp dir; compare file names only.
                for key in ["inputs", "outputs", "command"] {
                    obj.remove(key);
                }
                v
            };
            assert_eq!(strip(bytes_a), strip(bytes_b), "manifest mismatch");
            // Input digests must agree even though paths differ.
            let digests = |bytes: &[u8]| -> Vec<String> {
                let v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
                v["inputs"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .map(|i| i["sha256"].as_str().unwrap().to_string())
                    .collect()
            };
            assert_eq!(digests(bytes_a), digests(bytes_b), "input digests differ");
        } else {
            assert_eq!(bytes_a, bytes_b, "file {name} differs between reruns");
        }
    }
    println!(
        "ACCEPTANCE 11 cli-determinism: PASS ({} files byte-identical)",
        a.len() - 1
    );
}
