//! Acceptance: every subcommand rerun with an identical configuration
//! produces byte-identical output files, and exit codes follow the
//! 0/1/2 contract.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bertini"))
}

/// Run one invocation twice into two files; assert success, byte equality,
/// and return the bytes.
fn run_twice(args: &[&str], dir: &Path, name: &str, expect_code: i32) -> Vec<u8> {
    let mut outputs = vec![];
    for pass in 0..2 {
        let out = dir.join(format!("{}_{}.out", name, pass));
        let status = bin()
            .args(args)
            .arg("--out")
            .arg(&out)
            .status()
            .expect("binary runs");
        assert_eq!(
            status.code(),
            Some(expect_code),
            "{} pass {}: unexpected exit code",
            name,
            pass
        );
        outputs.push(fs::read(&out).expect("output file written"));
    }
    assert_eq!(
        outputs[0], outputs[1],
        "{}: reruns must be byte-identical",
        name
    );
    outputs.pop().unwrap()
}

#[test]
fn criterion_9_byte_identical_reruns_per_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    // sweep — and the density record carries exactly 1/2.
    let sweep = run_twice(
        &[
            "sweep", "--q", "2", "--n", "2", "--stat", "vanishes-at", "--points", "1:0:0", "--d",
            "1..3", "--seed", "3",
        ],
        d,
        "sweep",
        0,
    );
    let text = String::from_utf8(sweep).unwrap();
    assert!(text.contains("vanishes-at,2,2,3,exhaustive,1023,511,1,2,0.5"));

    // sample — deterministic Monte Carlo, JSON flavor.
    run_twice(
        &[
            "sample", "--q", "2", "--n", "2", "--stat", "geom-irred", "--d", "3", "--trials",
            "400", "--seed", "11", "--format", "json", "--threads", "2",
        ],
        d,
        "sample",
        0,
    );

    // zeta — exact 3/32 at r = 3.
    let zeta = run_twice(
        &["zeta", "--q", "2", "--n", "2", "--x", "x2", "--r", "3"],
        d,
        "zeta",
        0,
    );
    assert!(String::from_utf8(zeta).unwrap().contains(",3,32,"));

    // product.
    let product = run_twice(&["product", "--q", "2", "--degs", "1,2"], d, "product", 0);
    assert!(String::from_utf8(product).unwrap().contains(",3,8,"));

    // components — plane and space variants.
    run_twice(
        &["components", "--q", "2", "--f", "x0^2+x0*x1+x1^2"],
        d,
        "components_plane",
        0,
    );
    let space = run_twice(
        &[
            "components",
            "--q",
            "2",
            "--g",
            "x0*x3+x1*x2",
            "--f",
            "x0",
            "--seed",
            "5",
        ],
        d,
        "components_space",
        0,
    );
    let text = String::from_utf8(space).unwrap();
    assert!(text.lines().any(|l| l.contains(",2,2,0,")), "two geometric components");

    // antibertini — certificate files identical across reruns.
    let cert_bytes = run_twice(
        &[
            "antibertini",
            "--q",
            "2",
            "--dmax",
            "10",
            "--samples",
            "4",
            "--seed",
            "7",
        ],
        d,
        "antibertini",
        0,
    );
    let cert_path = d.join("cert.json");
    fs::write(&cert_path, &cert_bytes).unwrap();

    // verify — replays the certificate deterministically.
    let verify = run_twice(
        &["verify", "--cert", cert_path.to_str().unwrap()],
        d,
        "verify",
        0,
    );
    let text = String::from_utf8(verify).unwrap();
    assert!(text.contains("ok contains-all-lines"));
    assert!(text.contains("status=certified"));

    // through-points.
    run_twice(
        &[
            "through-points",
            "--q",
            "2",
            "--n",
            "2",
            "--points",
            "1:0:0;t:1:0@2",
            "--dmax",
            "5",
            "--samples",
            "20",
            "--seed",
            "2",
        ],
        d,
        "through_points",
        0,
    );

    println!("acceptance criterion 9 (byte-identical reruns per subcommand): PASS");
}

#[test]
fn config_file_layer_applies_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bounds.cfg");
    fs::write(&cfg_path, "# tiny sweep bound\nmax_sweep_classes = 10\n").unwrap();
    // The config file bound blocks a d=3 sweep (1023 classes)...
    let out = bin()
        .args([
            "sweep", "--q", "2", "--n", "2", "--stat", "vanishes-at", "--points", "1:0:0",
            "--d", "3", "--config",
        ])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep-bound"));
    // ...and the flag layer overrides the file.
    let out = bin()
        .args([
            "sweep", "--q", "2", "--n", "2", "--stat", "vanishes-at", "--points", "1:0:0",
            "--d", "3", "--sweep-bound", "2048", "--config",
        ])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("max_sweep_classes=2048"));
    println!("config layer: PASS");
}

#[test]
fn exit_codes_follow_the_contract() {
    // Unknown statistic value: usage error, exit 2.
    let out = bin()
        .args(["sweep", "--q", "2", "--n", "2", "--stat", "bogus", "--d", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Invalid form text: exit 2 with the parser error on stderr.
    let out = bin()
        .args([
            "sweep", "--q", "2", "--n", "2, ", "--stat", "meets-x", "--x", "x0^^", "--d", "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Not a prime power: exit 2.
    let out = bin()
        .args(["product", "--q", "12", "--degs", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("prime power"));

    // A search that cannot certify (zero-plane budget) still writes the
    // unverified certificate and exits 1. Seed 3 is known to produce a
    // sample passing the plane criterion at degree 8.
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("unverified.json");
    let out = bin()
        .args([
            "antibertini",
            "--q",
            "2",
            "--dmax",
            "8",
            "--samples",
            "5",
            "--seed",
            "3",
            "--cert-budget",
            "0",
        ])
        .arg("--out")
        .arg(&cert)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = fs::read_to_string(&cert).unwrap();
    assert!(text.contains("\"status\": \"unverified\""));

    // A search with no candidate at all still writes an error record.
    let record = dir.path().join("notfound.csv");
    let out = bin()
        .args([
            "antibertini",
            "--q",
            "2",
            "--dmax",
            "8",
            "--samples",
            "2",
            "--seed",
            "1",
        ])
        .arg("--out")
        .arg(&record)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = fs::read_to_string(&record).unwrap();
    assert!(text.contains("# error: code=not-found"));

    println!("exit-code contract: PASS");
}
