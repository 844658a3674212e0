use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn oqwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oqwalk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = oqwalk(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    oqwalk(args).status.code().expect("exit code")
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(text: &str) -> Csv {
        let mut lines = text.lines();
        let header = lines
            .next()
            .unwrap()
            .split(',')
            .map(String::from)
            .collect::<Vec<_>>();
        let rows = lines
            .map(|l| l.split(',').map(String::from).collect::<Vec<_>>())
            .collect::<Vec<_>>();
        for r in &rows {
            assert_eq!(r.len(), header.len());
        }
        Csv { header, rows }
    }

    fn col(&self, name: &str) -> Vec<f64> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no {name}"));
        self.rows
            .iter()
            .map(|r| r[i].parse::<f64>().unwrap())
            .collect()
    }
}

fn csv(args: &[&str]) -> Csv {
    Csv::parse(&stdout_of(args))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn steady_state_columns() {
    let uniform = csv(&["steady-state", "--n-nodes", "30", "--omega", "0.5"]);
    assert_eq!(uniform.header, ["m", "pi"]);
    let pi = uniform.col("pi");
    assert_eq!(pi.len(), 30);
    for p in &pi {
        assert!((p - 1.0 / 30.0).abs() < 1e-15);
    }

    let right = csv(&["steady-state", "--n-nodes", "30", "--omega", "2/3"]).col("pi");
    let left = csv(&["steady-state", "--n-nodes", "30", "--omega", "1/3"]).col("pi");
    assert!((right.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(right.windows(2).all(|w| w[1] > w[0]));
    for m in 0..30 {
        assert!(right[m] >= 0.0);
        assert!((right[m] - left[29 - m]).abs() < 1e-12);
    }
}

#[test]
fn omega_sweeps_are_labelled_and_ordered() {
    let t = csv(&["steady-state", "--n-nodes", "5", "--omega", "0.2:0.8:0.3"]);
    assert_eq!(t.header, ["omega", "m", "pi"]);
    let w = t.col("omega");
    assert_eq!(w.len(), 15);
    assert!(w.windows(2).all(|p| p[1] >= p[0]));
    assert!((w[14] - 0.8).abs() < 1e-12);
}

#[test]
fn equilibrium_sweep() {
    let t = csv(&[
        "equilibrium",
        "--n-nodes",
        "500",
        "--omega",
        "0.05:0.95:0.05",
    ]);
    assert_eq!(
        t.header,
        ["omega", "beta", "T", "Z", "E", "varE", "S", "F", "Cv"]
    );
    let s = t.col("S");
    let w = t.col("omega");
    let imax = (0..s.len()).max_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap();
    assert!((w[imax] - 0.5).abs() < 1e-12);
    assert!((s[imax] - 500f64.ln()).abs() < 1e-12);
    for (i, &v) in s.iter().enumerate() {
        assert!(v >= 0.0);
        if i != imax {
            assert!(v < 500f64.ln());
        }
    }
    for v in t.col("varE").into_iter().chain(t.col("Cv")) {
        assert!(v >= 0.0);
    }
    // T diverges at the unbiased point.
    assert_eq!(t.col("T")[imax], f64::INFINITY);

    let third = csv(&["equilibrium", "--n-nodes", "100", "--omega", "1/3"]);
    assert!((third.col("T")[0] - 1.0 / 2f64.ln()).abs() < 1e-12);
    assert!((third.col("beta")[0] - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn trajectory_and_distribution_dump() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("traj.csv");
    let status = oqwalk(&[
        "trajectory",
        "--n-nodes",
        "20",
        "--omega",
        "0.6",
        "--steps",
        "400",
        "--dump-distributions",
        "--out",
        path_str(&out),
    ]);
    assert!(status.status.success());
    let t = Csv::parse(&fs::read_to_string(&out).unwrap());
    assert_eq!(t.header, ["n", "S", "E", "T_est", "S_gen"]);
    assert_eq!(t.rows.len(), 401);
    let s_gen = t.col("S_gen");
    assert!(s_gen[0].abs() < 1e-15);
    for w in s_gen.windows(2) {
        assert!(w[1] - w[0] >= -1e-8);
    }
    for e in t.col("E") {
        assert!((0.0..=19.0).contains(&e));
    }

    let d = Csv::parse(&fs::read_to_string(dir.path().join("traj.csv.dist.csv")).unwrap());
    assert_eq!(d.header, ["n", "m", "p"]);
    assert_eq!(d.rows.len(), 401 * 20);
    let p = d.col("p");
    for chunk in p.chunks(20) {
        assert!(chunk.iter().all(|&x| x >= 0.0));
        assert!((chunk.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    assert_eq!(p[0], 1.0);
}

#[test]
fn window_and_dqc() {
    let w = csv(&["window", "--n-nodes", "100", "--omega", "2/3"]);
    assert_eq!(w.header, ["N", "omega", "t_start", "t_end", "t_therm"]);
    assert_eq!(w.col("t_start")[0].round(), 213.0);
    assert_eq!(w.col("t_end")[0].round(), 423.0);

    let d = csv(&["dqc", "--n-nodes", "100", "--omega", "0.51"]);
    let (start, steps, end) = (d.col("n_start")[0], d.col("n_steps")[0], d.col("n_end")[0]);
    assert!((steps - 5000.0).abs() < 1e-9);
    assert!(start < steps && steps < end);
    let d = csv(&["dqc", "--n-nodes", "100", "--omega", "0.9"]);
    assert_eq!(d.col("n_start")[0].round(), 100.0);
    assert!((d.col("n_steps")[0] - 125.0).abs() < 1e-9);
    assert_eq!(d.col("n_end")[0].round(), 156.0);
}

#[test]
fn approx_entropy_columns() {
    let t = csv(&[
        "approx-entropy",
        "--n-nodes",
        "50",
        "--omega",
        "2/3",
        "--steps",
        "300",
    ]);
    assert_eq!(t.header, ["t", "S_a", "S_G", "S_B", "w", "S_exact"]);
    assert_eq!(t.rows.len(), 300);
    let (sa, sg, sb) = (t.col("S_a"), t.col("S_G"), t.col("S_B"));
    for i in 0..sa.len() {
        assert!((sa[i] - sg[i] - sb[i]).abs() < 1e-12);
        assert!(sb[i] >= 0.0);
    }
    for w in t.col("w") {
        assert!((0.0..=1.0).contains(&w));
    }
}

#[test]
fn table_metrics() {
    let t = csv(&["table", "--n-nodes", "100", "--omega", "2/3"]);
    assert_eq!(t.header, ["metric", "value"]);
    let names: Vec<&str> = t.rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(
        &names[..5],
        [
            "delta_max",
            "delta_rel_max",
            "mean_rel",
            "delta_logN_max",
            "mean_logN"
        ]
    );
    let values = t.col("value");
    for v in &values[..5] {
        assert!(v.is_finite() && *v >= 0.0);
    }
    assert!(values[1] < 0.2);
}

#[test]
fn json_mirrors_csv() {
    let args = ["equilibrium", "--n-nodes", "40", "--omega", "0.3:0.7:0.2"];
    let c = csv(&args);
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let j: serde_json::Value = serde_json::from_str(&stdout_of(&json_args)).unwrap();
    let records = j.as_array().unwrap();
    assert_eq!(records.len(), c.rows.len());
    for (rec, row) in records.iter().zip(&c.rows) {
        let obj = rec.as_object().unwrap();
        assert_eq!(obj.len(), c.header.len());
        for (name, text) in c.header.iter().zip(row) {
            let v = &obj[name];
            match v.as_f64() {
                Some(x) => assert_eq!(x, text.parse::<f64>().unwrap(), "{name}"),
                None => assert_eq!(v.as_str().unwrap(), text, "{name}"),
            }
        }
    }
}

#[test]
fn output_is_deterministic_across_runs_and_workers() {
    let dir = TempDir::new().unwrap();
    let mut files = Vec::new();
    for (i, jobs) in ["1", "4", "4"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}.csv"));
        let r = oqwalk(&[
            "trajectory",
            "--n-nodes",
            "30",
            "--omega",
            "0.55:0.95:0.1",
            "--steps",
            "200",
            "--jobs",
            jobs,
            "--dump-distributions",
            "--out",
            path_str(&out),
        ]);
        assert!(r.status.success());
        let main = fs::read(&out).unwrap();
        let dist = fs::read(dir.path().join(format!("run{i}.csv.dist.csv"))).unwrap();
        files.push((main, dist));
    }
    assert!(files.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn config_file_fills_gaps_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(
        &cfg,
        "# settings\nn_nodes = 12\nomega = 1/3\nformat = json\n",
    )
    .unwrap();
    let from_file: serde_json::Value =
        serde_json::from_str(&stdout_of(&["steady-state", "--config", path_str(&cfg)])).unwrap();
    assert_eq!(from_file.as_array().unwrap().len(), 12);

    let overridden = csv(&[
        "steady-state",
        "--config",
        path_str(&cfg),
        "--n-nodes",
        "7",
        "--format",
        "csv",
    ]);
    let pi = overridden.col("pi");
    assert_eq!(pi.len(), 7);
    assert!(pi.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&["window", "--omega", "0.9"]), 0);

    // Validation.
    assert_eq!(code(&["window", "--omega", "0.4"]), 2);
    assert_eq!(code(&["dqc", "--omega", "0.5"]), 2);
    assert_eq!(code(&["equilibrium", "--omega", "1.2"]), 2);
    assert_eq!(code(&["equilibrium", "--omega", "0.9:0.1:0.1"]), 2);
    assert_eq!(code(&["steady-state", "--n-nodes", "1"]), 2);
    assert_eq!(code(&["steady-state", "--epsilon", "-1"]), 2);
    assert_eq!(
        code(&["trajectory", "--steps", "5", "--dump-distributions"]),
        2
    );
    assert_eq!(code(&["steady-state", "--jobs", "0"]), 2);
    assert_eq!(code(&["steady-state", "--no-such-flag"]), 2);
    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "colour = red\n").unwrap();
    assert_eq!(code(&["steady-state", "--config", path_str(&bad)]), 2);

    // I/O.
    let missing = dir.path().join("missing.conf");
    assert_eq!(code(&["steady-state", "--config", path_str(&missing)]), 3);
    let unwritable = dir.path().join("no/such/dir/out.csv");
    assert_eq!(code(&["steady-state", "--out", path_str(&unwritable)]), 3);
}
