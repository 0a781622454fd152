use std::f64::consts::FRAC_1_PI;
use std::path::Path;
use std::process::{Command, Output};

fn phasezone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasezone"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn summary_value(text: &str, key: &str) -> f64 {
    text.split_whitespace()
        .find_map(|tok| tok.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text:?}"))
        .parse()
        .unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

fn validate(path: &Path) -> Output {
    phasezone(&["validate", path.to_str().unwrap()])
}

#[test]
fn vacuum_field_peaks_at_one_over_pi() {
    let out = phasezone(&["wigner", "--state", "vacuum", "--grid", "-4:4:81"]);
    assert_eq!(code(&out), 0);
    let csv = stdout(&out);
    let row = csv
        .lines()
        .find(|l| l.starts_with("0.0000000000000000e0,0.0000000000000000e0,"))
        .unwrap();
    let w: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((w - FRAC_1_PI).abs() < 1e-9);
    assert_eq!(csv.lines().count(), 81 * 81 + 1);
}

#[test]
fn both_methods_agree_and_write_two_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fock1.csv");
    let out = phasezone(&[
        "--out",
        path.to_str().unwrap(),
        "wigner",
        "--state",
        "fock:1",
        "--grid",
        "-4:4:81",
        "--method",
        "both",
    ]);
    assert_eq!(code(&out), 0);
    assert!(summary_value(&stdout(&out), "max_deviation") < 1e-6);
    let parity = dir.path().join("fock1-parity.csv");
    assert!(parity.exists());
    for p in [&path, &parity] {
        let v = validate(p);
        assert_eq!(code(&v), 0, "{}", String::from_utf8_lossy(&v.stderr));
        assert!(stdout(&v).contains("schema=wigner"));
    }
}

#[test]
fn rectangular_grids_and_json() {
    let out = phasezone(&[
        "--format",
        "json",
        "wigner",
        "--state",
        "mixture:vacuum@1;fock:2@1",
        "--grid",
        "-6:6:13",
        "--grid-v",
        "-5:5:11",
    ]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["grid"]["n_u"], 13);
    assert_eq!(v["grid"]["n_v"], 11);
    assert_eq!(v["values"].as_array().unwrap().len(), 143);
}

#[test]
fn malformed_inputs_exit_two() {
    let cases: &[&[&str]] = &[
        &["wigner", "--state", "fock:", "--grid", "-1:1:3"],
        &["wigner", "--state", "vacuum", "--grid", "-1:1"],
        &["wigner", "--state", "vacuum", "--grid", "1:-1:3"],
        &["wigner", "--state", "vacuum", "--grid", "-1:1:3", "--method", "fourier"],
        &["overlap", "--beta", "-1"],
        &["overlap", "--beta", "x"],
        &[
            "fresnel", "--r0", "-1", "--b", "100", "--lambda", "1", "zones", "--n", "5",
        ],
        &[
            "fresnel",
            "--r0",
            "100",
            "--b",
            "100",
            "--lambda",
            "1",
            "--density",
            "2",
            "zonesum",
            "--n",
            "5",
        ],
        &[
            "fresnel", "--r0", "100", "--b", "100", "--lambda", "1", "zones", "--n", "100000",
        ],
        &[
            "fresnel", "--r0", "100", "--b", "100", "--lambda", "1", "plate", "--open", "list", "--n", "5",
        ],
        &["spin", "--j", "0", "belts"],
        &["spin", "--j", "0.3", "belts"],
        &["spin", "--j", "-2", "project"],
        &["frobnicate"],
        &[],
    ];
    for args in cases {
        let out = phasezone(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn unwritable_output_exits_one() {
    let out = phasezone(&["--out", "/nonexistent/dir/x.csv", "overlap", "--beta", "1"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn overlap_reports() {
    let out = phasezone(&["overlap", "--beta", "0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(summary_value(&String::from_utf8_lossy(&out.stderr), "tv_distance"), 0.0);

    let out = phasezone(&["overlap", "--beta", "5"]);
    let csv = stdout(&out);
    assert!(csv.starts_with("n,p_overlap,p_poisson\n"));
    let mean = summary_value(&String::from_utf8_lossy(&out.stderr), "overlap_mean");
    assert!((23.75..=26.25).contains(&mean));
    let p = column(&csv, "p_overlap");
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    let out = phasezone(&["--format", "json", "overlap", "--beta", "5", "--bands", "80"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["table"].as_array().unwrap().len() >= 80);
}

#[test]
fn fresnel_subcommands() {
    let geom = ["fresnel", "--r0", "100", "--b", "100", "--lambda", "1"];
    let with = |rest: &[&str]| phasezone(&[&geom[..], rest].concat());

    let out = with(&["zones", "--n", "100"]);
    assert_eq!(code(&out), 0);
    let slope = summary_value(&String::from_utf8_lossy(&out.stderr), "fitted_slope");
    assert!((slope - 0.5).abs() < 0.01, "{slope}");
    assert_eq!(stdout(&out).lines().count(), 101);

    let out = with(&["zonesum", "--n", "200", "--mode", "averaged"]);
    let csv = stdout(&out);
    let abs = column(&csv, "abs");
    assert!((abs[1] / abs[0] - 1.0).abs() < 0.01);

    let out = with(&["plate", "--open", "odd", "--n", "20"]);
    assert!(summary_value(&String::from_utf8_lossy(&out.stderr), "ratio_to_free") > 5.0);

    let out = with(&["plate", "--open", "list", "--n", "4", "--zones", "0,2"]);
    assert_eq!(code(&out), 0);

    let out = phasezone(&[&["--format", "json"][..], &geom, &["integral", "--n", "50"]].concat());
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["zones"], 50);
    assert!(v["U_integral"]["abs"].as_f64().unwrap() > 0.0);
}

#[test]
fn spin_subcommands() {
    let out = phasezone(&["spin", "--j", "0.5", "belts"]);
    assert_eq!(stdout(&out).lines().count(), 3);

    let out = phasezone(&["spin", "--j", "200", "project"]);
    let rho = column(&stdout(&out), "rho_lo");
    assert_eq!(rho.len(), 401);
    assert!((rho[1] / 2f64.sqrt() - 1.0).abs() < 0.01);

    let out = phasezone(&["spin", "--j", "200", "areas"]);
    let area = column(&stdout(&out), "area");
    assert_eq!(area.len(), 400);
    assert!(area.windows(2).all(|w| w[1] > w[0]));

    let out = phasezone(&["spin", "--j", "1", "converge", "--j-values", "20,80,200", "--n", "3"]);
    assert_eq!(stdout(&out).lines().count(), 4);
}

#[test]
fn written_tables_validate() {
    let dir = tempfile::tempdir().unwrap();
    let runs: &[(&str, &[&str])] = &[
        ("overlap.csv", &["overlap", "--beta", "2.5"]),
        (
            "zones.csv",
            &[
                "fresnel", "--r0", "50", "--b", "80", "--lambda", "1", "zones", "--n", "30",
            ],
        ),
        (
            "summary.csv",
            &[
                "fresnel", "--r0", "50", "--b", "80", "--lambda", "1", "integral", "--n", "30",
            ],
        ),
        ("belts.csv", &["spin", "--j", "3", "belts"]),
        ("bands.csv", &["spin", "--j", "3", "project"]),
        (
            "conv.csv",
            &["spin", "--j", "3", "converge", "--j-values", "5,50", "--n", "2"],
        ),
        ("spin.json", &["--format", "json", "spin", "--j", "3", "project"]),
    ];
    for (name, args) in runs {
        let path = dir.path().join(name);
        let out = phasezone(&[&["--out", path.to_str().unwrap()][..], args].concat());
        assert_eq!(code(&out), 0, "{name}");
        let v = validate(&path);
        assert_eq!(code(&v), 0, "{name}: {}", String::from_utf8_lossy(&v.stderr));
    }
    let broken = dir.path().join("broken.csv");
    std::fs::write(&broken, "u,v,w\n0.5,0.5,0.5\n").unwrap();
    assert_eq!(code(&validate(&broken)), 2);
    assert_eq!(code(&validate(&dir.path().join("missing.csv"))), 1);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = [
        "wigner",
        "--state",
        "coherent:1,0.5",
        "--grid",
        "-5:5:41",
        "--method",
        "parity",
    ];
    let a = phasezone(&args);
    let b = phasezone(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}
