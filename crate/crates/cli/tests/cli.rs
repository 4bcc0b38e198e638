mod common;

use common::{parse, rows, tagged, Workspace, FULL};

fn stderr(o: &std::process::Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn missing_seed_is_a_config_error() {
    let ws = Workspace::new("[run]\nmc_samples = 1000\n");
    let o = ws.run(&["stats"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("run.seed"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());

    let o = ws.run(&["stats", "--seed", "5", "--samples", "2000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("# seed=5\n"));
}

#[test]
fn all_invalid_fields_are_listed() {
    let cfg = r#"
        [run]
        seed = 1
        pdf_bins = 0
        [capacitor]
        capacitance_f = 1.0
        v_start = -1.0
        v_target = 3.2
        [schemes]
        list = [ { kind = "drama", period_s = 0.04 } ]
    "#;
    let o = Workspace::new(cfg).run(&["stats"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    for field in ["run.pdf_bins", "capacitor", "schemes.list[0].duty"] {
        assert!(err.contains(field), "missing {field}: {err}");
    }
}

#[test]
fn unknown_key_and_bad_toml_exit_one() {
    let o = Workspace::new("[run]\nseed = 1\nsamples = 3\n").run(&["stats"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("samples"));

    let o = Workspace::new("[run\n").run(&["stats"]);
    assert_eq!(o.status.code(), Some(1));

    let ws = Workspace::new("[run]\nseed = 1\n");
    let o = common::run_in(ws.dir.path(), &ws.path("absent.toml"), &["stats"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn curve_parse_error_names_the_line() {
    let ws = Workspace::new(FULL);
    std::fs::write(ws.path("curve.csv"), "# p, eta\n-3, 0.1\n-2, abc\n").unwrap();
    let o = ws.run(&["curve"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("curve.file") && err.contains("line 3"), "{err}");
}

#[test]
fn runtime_errors_exit_two() {
    // below the Monte Carlo minimum for a drama harvest estimate
    let ws = Workspace::new(FULL);
    let o = ws.run(&["compare", "--samples", "100"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    // time step too coarse to resolve the bursts
    let cfg = FULL.replace("dt_s = 0.004", "dt_s = 0.01");
    let o = Workspace::new(&cfg).run(&["trace"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn unused_sections_warn() {
    let ws = Workspace::new(FULL);
    let o = ws.run(&["stats", "--samples", "2000"]);
    assert!(o.status.success());
    let err = stderr(&o);
    assert!(err.contains("[capacitor]") && err.contains("[topology]"), "{err}");
    assert!(!err.contains("[schemes]"));
}

#[test]
fn missing_section_for_command() {
    let o = Workspace::new("[run]\nseed = 1\n").run(&["compare"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("topology") && err.contains("capacitor"), "{err}");
}

#[test]
fn output_path_from_config_is_relative_to_it() {
    let cfg = FULL.replace("seed = 42", "seed = 42\noutput = \"stats.csv\"");
    let ws = Workspace::new(&cfg);
    let o = ws.run(&["stats", "--samples", "2000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(ws.path("stats.csv")).unwrap();
    assert!(text.starts_with("# drama stats schema=1\n# seed=42\n# config_sha256="));
}

#[test]
fn stats_rows() {
    let ws = Workspace::new(FULL);
    let csv = ws.csv("stats", "s.csv", &[]);
    let r = rows(&csv);
    assert_eq!(
        r[0].join(","),
        "m,duty,analytic_mean_mw,analytic_std_mw,analytic_cv,mc_mean_mw,mc_std_mw,mc_cv,samples"
    );
    assert_eq!(r[1][0], "1");
    assert_eq!(parse(&r[1][4]), 0.0);
    assert_eq!(parse(&r[1][7]), 0.0);
    assert_eq!(format!("{:.5}", parse(&r[2][4])), "0.70711");
    assert_eq!(r[3][8], "20000");
}

#[test]
fn pdf_columns_integrate_to_one() {
    let ws = Workspace::new(FULL);
    let csv = ws.csv("pdf", "p.csv", &[]);
    let r = rows(&csv);
    assert_eq!(r[0].join(","), "x_lo,x_hi,m1,m2,m5,arcsine2,exponential");
    let integrals = tagged(&csv, "integral");
    assert_eq!(integrals.len(), 5);
    for i in &integrals {
        assert!((parse(&i[1]) - 1.0).abs() < 1e-6, "{i:?}");
    }
    // direct sum over the printed grid
    for col in 2..7 {
        let total: f64 = r[1..]
            .iter()
            .map(|row| parse(&row[col]) * (parse(&row[1]) - parse(&row[0])))
            .sum();
        assert!((total - 1.0).abs() < 1e-6, "column {col}: {total}");
    }
    assert_eq!(tagged(&csv, "l1").len(), 6);
}

#[test]
fn curve_baseline_matches_the_file() {
    let cfg = FULL.replace(
        "min_dbm = -9.0\nmax_dbm = 6.0\nstep_db = 1.0",
        "dbm = [-4.0, -3.0, -1.0, 2.0, 10.0]",
    );
    let ws = Workspace::new(&cfg);
    let csv = ws.csv("curve", "c.csv", &[]);
    let r = rows(&csv);
    assert_eq!(
        r[0].join(","),
        "p_dbm,baseline,duty_shifted,arcsine2_power_weighted,exponential_power_weighted,arcsine2_unweighted,exponential_unweighted"
    );
    let expected = [0.0, 0.05, 0.25, 0.45, 0.60];
    for (row, e) in r[1..].iter().zip(expected) {
        assert!((parse(&row[1]) - e).abs() < 1e-12, "{row:?}");
    }
    // exponential averaging reaches below the baseline's cutoff
    assert!(parse(&r[1][4]) > 0.0);
}

#[test]
fn single_et_full_duty_drama_equals_continuous() {
    let cfg = FULL
        .replace("  { x = 1.0, y = 0.0, tx_dbm = 30.0 },\n", "")
        .replace("duty = 0.5", "duty = 1.0");
    let ws = Workspace::new(&cfg);
    let csv = ws.csv("compare", "c.csv", &[]);
    let r = rows(&csv);
    let drama: Vec<_> = r.iter().filter(|row| row[0] == "drama").collect();
    let cont: Vec<_> = r.iter().filter(|row| row[0] == "continuous").collect();
    assert_eq!(drama.len(), 16);
    for (d, c) in drama.iter().zip(&cont) {
        assert_eq!(d[1..], c[1..]);
    }
}

#[test]
fn trace_endpoints_and_monotone_voltage() {
    let ws = Workspace::new(FULL);
    let trace = ws.csv("trace", "t.csv", &[]);
    let compare = ws.csv("compare", "c.csv", &[]);

    let r = rows(&trace);
    assert_eq!(r[0].join(","), "scheme,input_dbm,time_s,voltage_v");
    for scheme in ["drama", "orthogonal", "continuous"] {
        let pts: Vec<(f64, f64)> = r[1..]
            .iter()
            .filter(|row| row[0] == scheme)
            .map(|row| (parse(&row[2]), parse(&row[3])))
            .collect();
        assert!(pts.windows(2).all(|w| w[1].1 >= w[0].1 && w[1].0 > w[0].0), "{scheme}");
    }

    let status = tagged(&trace, "status");
    let end = |s: &str| status.iter().find(|x| x[0] == s).unwrap().clone();
    // drama charges at -5 dBm; the constant schemes sit below the curve cutoff
    assert_eq!(end("drama")[2], "complete");
    assert_eq!(end("orthogonal")[2], "timeout");

    // at -5 dBm orthogonal never charges, so compare reports inf
    let c = rows(&compare);
    let orth = c.iter().find(|row| row[0] == "orthogonal" && row[1] == "-5").unwrap();
    assert_eq!(orth[4], "inf");
}

#[test]
fn constant_trace_matches_charging_time() {
    let cfg = FULL.replace("trace_dbm = [-5.0]", "trace_dbm = [2.0]");
    let ws = Workspace::new(&cfg);
    let trace = ws.csv("trace", "t.csv", &[]);
    let compare = ws.csv("compare", "c.csv", &[]);
    let status = tagged(&trace, "status");
    for scheme in ["orthogonal", "continuous"] {
        let s = status.iter().find(|x| x[0] == scheme).unwrap();
        assert_eq!(s[2], "complete");
        let expected = rows(&compare)
            .into_iter()
            .find(|row| row[0] == scheme && row[1] == "2")
            .map(|row| parse(&row[4]))
            .unwrap();
        assert!(
            (parse(&s[3]) - expected).abs() <= 0.004 + 1e-9,
            "{scheme}: {s:?} vs {expected}"
        );
    }
    // the drama trace crosses the target first
    let t = |s: &str| parse(&status.iter().find(|x| x[0] == s).unwrap()[3]);
    assert!(t("drama") < t("orthogonal"));
}

#[test]
fn seed_override_changes_monte_carlo_output() {
    let ws = Workspace::new(FULL);
    let a = ws.csv("stats", "a.csv", &[]);
    let b = ws.csv("stats", "b.csv", &["--seed", "43"]);
    assert_ne!(a, b);
    assert!(b.contains("# seed=43\n"));
}
