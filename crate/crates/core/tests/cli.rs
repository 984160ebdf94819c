use std::path::Path;
use std::process::{Command, Output};

use chiral_chain::cli::RunManifest;
use chiral_chain::oracles::cascaded_n3;
use chiral_chain::specfun::bessel_j;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_chiral-chain"));
    c.env_remove("CHIRAL_CHAIN_OUT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

struct Table {
    meta: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn parse(text: &str) -> Table {
        let mut lines = text.lines();
        let mut meta = Vec::new();
        let header = loop {
            let line = lines.next().expect("header");
            match line.strip_prefix("# ") {
                Some(m) => meta.push(m.to_string()),
                None => break line.split(',').map(String::from).collect(),
            }
        };
        let rows = lines
            .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
            .collect();
        Table { meta, header, rows }
    }

    fn read(path: &Path) -> Table {
        Table::parse(&std::fs::read_to_string(path).unwrap())
    }

    fn column(&self, name: &str) -> Vec<f64> {
        let j = self.header.iter().position(|h| h == name).expect(name);
        self.rows.iter().map(|r| r[j]).collect()
    }
}

fn stdout_table(args: &[&str]) -> Table {
    let out = run(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    Table::parse(&String::from_utf8(out.stdout).unwrap())
}

#[test]
fn balanced_pair_keeps_its_excitation() {
    let t = stdout_table(&[
        "simulate",
        "--n",
        "2",
        "--xi-over-pi",
        "1",
        "--gamma-l",
        "1",
        "--gamma-r",
        "1",
        "--stdout",
    ]);
    assert_eq!(t.header, ["t", "P_1", "P_2", "P_tot", "I_tot"]);
    assert_eq!(t.rows.len(), 2000);
    assert!(t.column("P_tot").iter().all(|p| (p - 1.0).abs() < 1e-12));
    assert!(t.meta.iter().any(|m| m.starts_with("request: ")));
}

#[test]
fn cascaded_triple_matches_closed_form() {
    let t = stdout_table(&[
        "simulate",
        "--n",
        "3",
        "--xi-over-pi",
        "1",
        "--gamma-l",
        "0",
        "--gamma-r",
        "1",
        "--stdout",
    ]);
    for row in &t.rows {
        let (a, b, c) = cascaded_n3(std::f64::consts::PI, row[0]).unwrap();
        for (m, z) in [a, b, c].iter().enumerate() {
            assert!((row[m + 1] - z.norm_sqr()).abs() < 1e-9);
        }
    }
}

#[test]
fn manifest_replay_is_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    let out = run(&[
        "simulate",
        "--n",
        "5",
        "--xi-over-pi",
        "0.75",
        "--gamma-l",
        "0.9",
        "--gamma-r",
        "1",
        "--shift-site",
        "3",
        "--shift",
        "0.30",
        "--horizon",
        "1e4",
        "--log-grid",
        "--json",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let manifest: RunManifest =
        serde_json::from_str(&std::fs::read_to_string(first.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest.outputs, ["trajectory.csv", "trajectory.json"]);
    let replay = run(&[
        "replay",
        first.join("manifest.json").to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(replay.status.success());
    for name in &manifest.outputs {
        assert_eq!(
            std::fs::read(first.join(name)).unwrap(),
            std::fs::read(second.join(name)).unwrap()
        );
    }
    let t = Table::read(&first.join("trajectory.csv"));
    assert_eq!(*t.rows.last().unwrap().first().unwrap(), 1e4);

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(first.join("trajectory.json")).unwrap())
            .unwrap();
    let c0 = &json["amplitudes"][0][0];
    assert!((c0[0].as_f64().unwrap() - 5f64.sqrt().recip()).abs() < 1e-15);
    assert_eq!(c0[1].as_f64().unwrap(), 0.0);
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "n_atoms = 4\nxi_over_pi = 0.5\ngamma_left = 0.3\ngamma_right = 1\ndisorder.mode = single_site\ndisorder.site = 2\ndisorder.shift_fraction = 0.05\n",
    )
    .unwrap();
    let t = stdout_table(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "3",
        "--stdout",
    ]);
    assert_eq!(t.header.len(), 6);
    let request = t
        .meta
        .iter()
        .find_map(|m| m.strip_prefix("request: "))
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(request).unwrap();
    assert_eq!(v["chain"]["n_atoms"], 3);
    assert_eq!(v["chain"]["gamma_left"], 0.3);
    assert_eq!(v["disorder"]["site"], 2);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code().unwrap();
    assert_eq!(code(&["simulate", "--gamma-l", "-1", "--stdout"]), 2);
    assert_eq!(
        code(&[
            "simulate",
            "--n",
            "3",
            "--shift-site",
            "7",
            "--shift",
            "0.1",
            "--stdout"
        ]),
        2
    );
    assert_eq!(code(&["figure", "fig9"]), 2);
    assert_eq!(code(&["kernel", "--dim", "4", "--xi", "1"]), 2);
    assert_eq!(
        code(&["kernel", "--dim", "3", "--xi", "2:0.1:1", "--stdout"]),
        2
    );
    assert_eq!(
        code(&["simulate", "--config", "/nonexistent/run.cfg", "--stdout"]),
        1
    );
    assert_eq!(code(&["replay", "/nonexistent/manifest.json"]), 1);
    let out = run(&["simulate", "--n", "0", "--stdout"]);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_atoms"));
}

#[test]
fn kernel_tables() {
    let t = stdout_table(&["kernel", "--dim", "1", "--xi", "0:0.01:6.283", "--stdout"]);
    assert_eq!(t.header, ["xi", "decay", "shift"]);
    for r in &t.rows {
        assert!((r[1] - r[0].cos()).abs() < 1e-15 && (r[2] - 0.5 * r[0].sin()).abs() < 1e-15);
    }

    let t = stdout_table(&[
        "kernel",
        "--dim",
        "3",
        "--alignment",
        "0",
        "--xi",
        "0.01:0.01:20",
        "--stdout",
    ]);
    assert!((t.rows[0][1] - 1.0).abs() < 1e-4);
    assert_eq!(t.rows.len(), 2000);

    let t = stdout_table(&[
        "kernel",
        "--dim",
        "2",
        "--alignment",
        "1",
        "--xi",
        "1",
        "--stdout",
    ]);
    let f =
        2.0 * (bessel_j(0, 1.0).unwrap() - bessel_j(1, 1.0).unwrap() + bessel_j(2, 1.0).unwrap());
    assert!((t.rows[0][1] - f).abs() < 1e-14);

    let t = stdout_table(&["kernel", "--dim", "2", "--xi", "0:1:2", "--stdout"]);
    assert!(t.rows[0][2].is_nan() && t.rows[1][2].is_finite());
    assert!(t.meta.iter().any(|m| m.starts_with("shift diverges")));

    let t = stdout_table(&["kernel", "--dim", "1chiral", "--xi", "0:0.5:3", "--stdout"]);
    assert_eq!(
        t.header,
        ["xi", "decay", "shift", "F_re", "F_im", "G_re", "G_im"]
    );
    for r in &t.rows {
        assert!((r[1] - r[0].cos()).abs() < 1e-15 && (r[2] - 0.5 * r[0].sin()).abs() < 1e-15);
    }
}

#[test]
fn ensembles_are_reproducible_and_zero_width_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let args = |fluct: &str, out: &Path| {
        vec![
            "ensemble".to_string(),
            "--fluct".into(),
            fluct.into(),
            "--realizations".into(),
            "20".into(),
            "--seed".into(),
            "7".into(),
            "--horizon".into(),
            "30".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let (a, b, z) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("z"),
    );
    for (fluct, out) in [("0.005", &a), ("0.005", &b), ("0", &z)] {
        let o = bin().args(args(fluct, out)).output().unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let bytes = |d: &Path| std::fs::read(d.join("ensemble.csv")).unwrap();
    assert_eq!(bytes(&a), bytes(&b));
    let t = Table::read(&z.join("ensemble.csv"));
    assert_eq!(
        t.header,
        ["t", "mean_P_tot", "std_P_tot", "mean_I_tot", "std_I_tot"]
    );
    assert!(t
        .column("std_P_tot")
        .iter()
        .chain(&t.column("std_I_tot"))
        .all(|&s| s == 0.0));
    let manifest: RunManifest =
        serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.seed, Some(7));
    assert!(a.join("ensemble_report.json").exists());
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("CHIRAL_CHAIN_OUT", dir.path())
        .args(["kernel", "--dim", "1", "--xi", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(dir.path().join("kernel/kernel.csv").exists());
    assert!(dir.path().join("kernel/manifest.json").exists());
}

#[test]
fn figure_two_panels() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["figure", "fig2", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let mut csvs: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    csvs.sort();
    assert_eq!(
        csvs,
        [
            "n2_xi0pi.csv",
            "n2_xi1pi.csv",
            "n3_xi0pi.csv",
            "n3_xi1pi.csv"
        ]
    );
    let t = Table::read(&dir.path().join("n3_xi1pi.csv"));
    for r in &t.rows {
        assert!((r[1] - (-r[0]).exp() / 3.0).abs() < 1e-10);
    }
    let script = std::fs::read_to_string(dir.path().join("plot.gp")).unwrap();
    assert_eq!(script.matches("set output").count(), 4);
}
