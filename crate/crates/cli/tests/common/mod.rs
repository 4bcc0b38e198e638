#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const CURVE: &str = include_str!("../../data/p1110_approx.csv");

pub const BIN: &str = env!("CARGO_BIN_EXE_drama");

/// A scratch directory holding a config and the approximate curve file.
pub struct Workspace {
    pub dir: tempfile::TempDir,
}

impl Workspace {
    pub fn new(config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("curve.csv"), CURVE).unwrap();
        std::fs::write(dir.path().join("drama.toml"), config).unwrap();
        Self { dir }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn config(&self) -> PathBuf {
        self.path("drama.toml")
    }

    pub fn run(&self, args: &[&str]) -> Output {
        run_in(self.dir.path(), &self.config(), args)
    }

    /// Runs `cmd`, writing the CSV to `out`, and returns its contents.
    pub fn csv(&self, cmd: &str, out: &str, extra: &[&str]) -> String {
        let out_path = self.path(out);
        let mut args = vec![cmd, "--out", out_path.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = self.run(&args);
        assert!(
            o.status.success(),
            "{cmd} failed: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        std::fs::read_to_string(out_path).unwrap()
    }
}

pub fn run_in(dir: &Path, config: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .unwrap()
}

/// Data rows (header row included) with comments stripped.
pub fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

/// Footer/header comment lines starting with `# {tag},`, split on commas.
pub fn tagged(csv: &str, tag: &str) -> Vec<Vec<String>> {
    let prefix = format!("# {tag},");
    csv.lines()
        .filter_map(|l| l.strip_prefix(&prefix))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

pub fn parse(cell: &str) -> f64 {
    match cell {
        "inf" => f64::INFINITY,
        "nan" => f64::NAN,
        c => c.parse().unwrap_or_else(|_| panic!("not a number: {c}")),
    }
}

/// Two equidistant transmitters, one sensor, every section present.
pub const FULL: &str = r#"
[run]
seed = 42
mc_samples = 20000
m_values = [1, 2, 5]
pdf_bins = 50
averaging = "both"

[topology]
ets = [
  { x = -1.0, y = 0.0, tx_dbm = 30.0 },
  { x = 1.0, y = 0.0, tx_dbm = 30.0 },
]
sensors = [{ x = 0.0, y = 0.0 }]

[curve]
file = "curve.csv"

[schemes]
list = [
  { kind = "drama", period_s = 0.042, duty = 0.5 },
  { kind = "orthogonal" },
  { kind = "continuous" },
]

[capacitor]
capacitance_f = 0.001
v_target = 3.2

[sweep]
min_dbm = -9.0
max_dbm = 6.0
step_db = 1.0
trace_dbm = [-5.0]
dt_s = 0.004
timeout_s = 120.0
trace_stride = 25
"#;
