//! End-to-end tests of the `hrlab` binary: exit-code partition, output
//! formats, determinism, and machine-readable error reporting.

use std::path::Path;
use std::process::{Command, Output};

fn hrlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hrlab"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary launches")
}

fn write_job(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn hardy_job(out: &Path, scale: f64) -> String {
    format!(
        r#"{{
  "schema_version": 1,
  "command": "certify",
  "parameters": {{
    "kind": "hardy",
    "d": 5,
    "potential": {{"kind": "InverseSquare", "pole": [0, 0, 0, 0, 0], "scale": {scale}}},
    "ansatz": {{"prefactor": {{"kind": "One"}}, "power": -1.5}},
    "domain": {{"kind": "WholeSpace"}},
    "grid": {{
      "radial": {{"lo": 0.01, "hi": 100.0, "shells": 64, "spacing": "log"}},
      "angular": {{"directions": 128, "seed": 0}}
    }}
  }},
  "output": {out:?},
  "seed": 0
}}"#,
        out = out.display().to_string(),
    )
}

#[test]
fn constants_csv_covers_the_range_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("constants.csv");
    let result = run(hrlab().args(["constants", "--d-min", "3", "--d-max", "6", "--output"]).arg(&out));
    assert_eq!(result.status.code(), Some(0), "{result:?}");

    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "setting,d,n,value,exact,attained");
    // d = 3, 4: 13 settings each; d = 5, 6: 14 (the fourth-order constant
    // joins at d = 5).
    assert_eq!(lines.len(), 1 + 13 + 13 + 14 + 14);
    assert!(csv.contains("hardy-interior,3,,2.5000000000000000e-1,1/4,NotAttained"), "{csv}");
    assert!(csv.contains("rellich,5,,1.5625000000000000e0,25/16,NotAttained"), "{csv}");
    assert!(csv.contains("multipolar-boundary,3,3,1.0000000000000000e0,1,Attained"), "{csv}");
    assert!(!lines.iter().any(|l| l.starts_with("rellich,3,")), "no fourth-order row below d=5");
}

#[test]
fn certify_optimal_pair_exits_zero_and_perturbed_scale_exits_one() {
    let dir = tempfile::tempdir().unwrap();

    let cert = dir.path().join("cert.json");
    let job = write_job(dir.path(), "job.json", &hardy_job(&cert, 2.25));
    let result = run(hrlab().arg("certify").arg("--job").arg(&job));
    assert_eq!(result.status.code(), Some(0), "{result:?}");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["certificate"]["verdict"], "CertifiedNonnegative");
    assert_eq!(doc["kind"], "hardy");

    // 1% above the optimal constant: the power ansatz stops being a
    // super-solution, and the run must say so through its exit code.
    let cert_bad = dir.path().join("cert_bad.json");
    let job_bad = write_job(dir.path(), "job_bad.json", &hardy_job(&cert_bad, 2.25 * 1.01));
    let result = run(hrlab().arg("certify").arg("--job").arg(&job_bad));
    assert_eq!(result.status.code(), Some(1), "{result:?}");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cert_bad).unwrap()).unwrap();
    assert_eq!(doc["certificate"]["verdict"], "Violated");
}

#[test]
fn certify_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let job = write_job(dir.path(), "job.json", &hardy_job(&cert, 2.25));

    run(hrlab().arg("certify").arg("--job").arg(&job));
    let first = std::fs::read(&cert).unwrap();
    run(hrlab().arg("certify").arg("--job").arg(&job));
    let second = std::fs::read(&cert).unwrap();
    assert_eq!(first, second);
}

#[test]
fn bad_job_reports_every_violation_and_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    // Three separate problems: missing seed, non-decreasing ε list, and an
    // unknown top-level field.
    let job = write_job(
        dir.path(),
        "job.json",
        r#"{
  "command": "rayleigh-sweep",
  "typo": true,
  "parameters": {"family": "hardy-interior", "d": 3, "eps": [0.1, 0.2]},
  "output": "sweep.csv"
}"#,
    );
    let result = run(hrlab().arg("certify").arg("--job").arg(&job));
    assert_eq!(result.status.code(), Some(2), "{result:?}");

    let stderr: serde_json::Value =
        serde_json::from_slice(&result.stderr).expect("stderr is one JSON object");
    assert_eq!(stderr["schema_version"], 1);
    assert_eq!(stderr["error"]["kind"], "schema");
    let violations = stderr["error"]["violations"].as_array().unwrap();
    let paths: Vec<&str> = violations.iter().map(|v| v["path"].as_str().unwrap()).collect();
    for expected in ["seed", "parameters.eps", "typo"] {
        assert!(paths.contains(&expected), "missing {expected} in {paths:?}");
    }
}

#[test]
fn job_for_a_different_command_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let job = write_job(
        dir.path(),
        "job.json",
        r#"{
  "command": "constants",
  "parameters": {"d_min": 3, "d_max": 6},
  "output": "constants.csv",
  "seed": 0
}"#,
    );
    let result = run(hrlab().arg("certify").arg("--job").arg(&job));
    assert_eq!(result.status.code(), Some(2), "{result:?}");
    let stderr: serde_json::Value = serde_json::from_slice(&result.stderr).unwrap();
    assert_eq!(stderr["error"]["violations"][0]["path"], "command");
}

#[test]
fn check_identities_emits_the_contracted_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("checks.csv");
    let result = run(hrlab()
        .args(["check-identities", "--which", "hessian-sum", "--d", "3", "--count", "2", "--seed", "1", "--output"])
        .arg(&out));
    assert_eq!(result.status.code(), Some(0), "{result:?}");

    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "identity,seed_index,lhs,rhs,gap_or_margin,tolerance,pass");
    assert_eq!(lines.len(), 3);
    for row in &lines[1..] {
        assert!(row.starts_with("hessian-sum,"), "{row}");
        assert!(row.ends_with(",true"), "{row}");
    }
}

#[test]
fn eig_estimate_emits_one_row_in_the_expected_band() {
    let result = run(hrlab().args([
        "eig-estimate", "--d", "3", "--nodes", "128", "--delta", "1e-4", "--R", "1.0",
    ]));
    assert_eq!(result.status.code(), Some(0), "{result:?}");
    let csv = String::from_utf8(result.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "d,nodes,delta,estimate,residual");
    assert_eq!(lines.len(), 2);
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&fields[..2], &["3", "128"]);
    let estimate: f64 = fields[3].parse().unwrap();
    assert!((0.25..0.40).contains(&estimate), "{estimate}");
}

#[test]
fn sweep_footer_carries_the_limit_and_monotonicity() {
    let result = run(hrlab().args([
        "rayleigh-sweep", "--family", "half-space", "--d", "3", "--eps", "0.2,0.1,0.05",
    ]));
    assert_eq!(result.status.code(), Some(0), "{result:?}");
    let csv = String::from_utf8(result.stdout).unwrap();
    let limit_line = csv
        .lines()
        .find(|l| l.starts_with("# extrapolated_limit = "))
        .expect("footer present");
    let limit: f64 = limit_line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!((limit - 2.25).abs() < 1e-9, "{limit}");
    assert!(csv.contains("# monotone = true"), "{csv}");
}

#[test]
fn domain_errors_exit_two_with_an_input_report() {
    let result = run(hrlab().args([
        "rayleigh-sweep", "--family", "no-such-family", "--d", "3", "--eps", "0.1",
    ]));
    assert_eq!(result.status.code(), Some(2), "{result:?}");
    let stderr: serde_json::Value = serde_json::from_slice(&result.stderr).unwrap();
    assert_eq!(stderr["error"]["kind"], "input");

    // A named check below its dimension floor is caught before computing.
    let result = run(hrlab().args([
        "check-identities", "--which", "rellich", "--d", "3", "--count", "1",
    ]));
    assert_eq!(result.status.code(), Some(2), "{result:?}");
    let stderr: serde_json::Value = serde_json::from_slice(&result.stderr).unwrap();
    assert_eq!(stderr["error"]["kind"], "input");
}

#[test]
fn fall_local_default_radius_certifies_and_large_radius_violates() {
    let dir = tempfile::tempdir().unwrap();

    let cert = dir.path().join("cert.json");
    let job = write_job(
        dir.path(),
        "job.json",
        &format!(
            r#"{{
  "command": "certify",
  "parameters": {{"kind": "fall-local", "d": 3, "r": 0.001}},
  "output": {:?},
  "seed": 0
}}"#,
            cert.display().to_string()
        ),
    );
    let result = run(hrlab().arg("certify").arg("--job").arg(&job));
    assert_eq!(result.status.code(), Some(0), "{result:?}");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(doc["certificate"]["verdict"], "CertifiedNonnegative");

    let cert_big = dir.path().join("cert_big.json");
    let job_big = write_job(
        dir.path(),
        "job_big.json",
        &format!(
            r#"{{
  "command": "certify",
  "parameters": {{"kind": "fall-local", "d": 3, "r": 0.05}},
  "output": {:?},
  "seed": 0
}}"#,
            cert_big.display().to_string()
        ),
    );
    let result = run(hrlab().arg("certify").arg("--job").arg(&job_big));
    assert_eq!(result.status.code(), Some(1), "{result:?}");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cert_big).unwrap()).unwrap();
    assert_eq!(doc["certificate"]["verdict"], "Violated");
}

/// The committed schema document must track the binary's actual catalog of
/// commands, check names, and families — this is the drift most likely when
/// a new subcommand lands.
#[test]
fn schema_document_stays_in_sync_with_the_binary() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/jobconfig.schema.json");
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();

    let names = |v: &serde_json::Value| -> Vec<String> {
        v.as_array()
            .unwrap()
            .iter()
            .map(|s| s.as_str().unwrap().to_string())
            .collect()
    };

    assert_eq!(
        names(&schema["properties"]["command"]["enum"]),
        ["constants", "certify", "rayleigh-sweep", "eig-estimate", "check-identities"],
    );
    assert_eq!(schema["properties"]["schema_version"]["const"], 1);
    assert_eq!(
        names(&schema["required"]),
        ["command", "parameters", "output", "seed"],
    );

    assert_eq!(
        names(&schema["$defs"]["rayleighSweepParams"]["properties"]["family"]["enum"]),
        ["hardy-interior", "half-space", "hardy-rellich"],
    );

    // "all" plus the eleven named checks, in the binary's catalog order.
    assert_eq!(
        names(&schema["$defs"]["checkIdentitiesParams"]["properties"]["which"]["enum"]),
        [
            "all",
            "hardy-remainder",
            "ground-state-power",
            "ground-state-boundary",
            "hessian-sum",
            "gradient-weight",
            "hardy",
            "rellich",
            "hardy-rellich",
            "radial-rellich",
            "multipolar-hardy",
            "componentwise-hardy-rellich",
        ],
    );

    assert_eq!(schema["$defs"]["dimension"]["maximum"], 64);

    // A job the test suite also feeds to the binary must carry only fields
    // the schema knows about (spot check, not a full validator).
    let job: serde_json::Value =
        serde_json::from_str(&hardy_job(Path::new("cert.json"), 2.25)).unwrap();
    let allowed = schema["properties"].as_object().unwrap();
    for key in job.as_object().unwrap().keys() {
        assert!(allowed.contains_key(key), "schema lacks top-level field {key:?}");
    }
    let certify_hardy = &schema["$defs"]["certifyParams"]["oneOf"][0];
    assert_eq!(certify_hardy["properties"]["kind"]["const"], "hardy");
    let allowed = certify_hardy["properties"].as_object().unwrap();
    for key in job["parameters"].as_object().unwrap().keys() {
        assert!(allowed.contains_key(key), "schema lacks certify field {key:?}");
    }
}
