use shishkin_sdfem::harness::{run_decay, run_green_suite, run_solve, AnchorRule, ExperimentConfig, RegionGroup};

fn small() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.mesh.n = vec![8, 16];
    cfg.problem.eps = vec![1e-3];
    cfg.green.k = vec![2.0];
    cfg.green.random_checks = 3;
    cfg.run.seed = 11;
    cfg
}

#[test]
fn identical_config_gives_identical_csv() {
    let cfg = small();
    let a = run_green_suite(&cfg).unwrap();
    let b = run_green_suite(&cfg).unwrap();
    assert_eq!(a.csv_string().unwrap(), b.csv_string().unwrap());
    assert_eq!(a.summary_json().unwrap(), b.summary_json().unwrap());

    let mut par = cfg.clone();
    par.run.parallel = true;
    let c = run_green_suite(&par).unwrap();
    assert_eq!(a.csv_string().unwrap(), c.csv_string().unwrap());
}

#[test]
fn failing_runs_do_not_disturb_other_rows() {
    let mut cfg = small();
    // eps = 0.2 exceeds 1/N for both meshes.
    cfg.problem.eps = vec![1e-3, 0.2];
    let report = run_solve(&cfg).unwrap();
    assert_eq!(report.rows.len(), 2 * 2 * 2);
    for row in &report.rows {
        if row.eps == 0.2 {
            assert!(row.status.starts_with("error"), "{row:?}");
            assert!(row.u_max.is_none());
        } else {
            assert_eq!(row.status, "ok");
            assert!(row.u_max.unwrap() > 0.0);
        }
    }
    assert_eq!(report.summary.failures, 4);

    cfg.mesh.allow_non_assumption1 = true;
    let report = run_solve(&cfg).unwrap();
    assert_eq!(report.summary.failures, 0);
}

#[test]
fn green_suite_reports_all_quantities() {
    let report = run_green_suite(&small()).unwrap();
    assert_eq!(report.rows.len(), 2);
    for row in &report.rows {
        assert!(row.ok(), "{row:?}");
        assert!(row.definition_residual.unwrap() < 1e-10);
        assert!(row.random_test_residual.unwrap() < 1e-10);
        assert!(row.duality_gap.unwrap() < 1e-10);
        assert!(!row.rings.as_deref().unwrap().is_empty());
    }
    assert_eq!(report.summary.norm_growth.len(), 1);
    assert_eq!(report.summary.norm_growth[0].n, vec![8, 16]);
    assert!(!report.records.is_empty());

    let json: serde_json::Value = serde_json::from_str(&report.records_json().unwrap()).unwrap();
    let first = &json[0];
    for key in ["N", "eps", "k", "x_star", "quantity_name", "value", "implied_C"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
    let summary: serde_json::Value = serde_json::from_str(&report.summary_json().unwrap()).unwrap();
    assert_eq!(summary["config"]["mesh"]["N"], serde_json::json!([8, 16]));
}

#[test]
fn larger_exclusion_exponent_never_raises_the_sup() {
    let mut cfg = ExperimentConfig::default();
    cfg.mesh.n = vec![64];
    cfg.problem.eps = vec![1e-3];
    cfg.green.k = vec![1.0];
    cfg.green.exclusion_k = vec![0.5, 1.0, 1.5, 2.0];
    let report = run_decay(&cfg).unwrap();
    for group in RegionGroup::ALL {
        let sups: Vec<Option<f64>> = report
            .rows
            .iter()
            .filter(|r| r.region == group)
            .map(|r| r.sup_g)
            .collect();
        let mut prev = f64::INFINITY;
        for s in sups {
            let v = s.unwrap_or(0.0);
            assert!(v <= prev, "{group:?}: {v} > {prev}");
            prev = v;
        }
    }
    let empty = report.rows.iter().filter(|r| r.status == "empty").count();
    assert_eq!(empty, report.summary.empty_sets);
    assert!(report
        .rows
        .iter()
        .filter(|r| r.status == "empty")
        .all(|r| r.norm.is_none()));
}

#[test]
fn decay_rejects_anchor_in_corner_layer() {
    let mut cfg = small();
    cfg.green.xstar = "14,14".into();
    let report = run_decay(&cfg).unwrap();
    assert!(report
        .rows
        .iter()
        .filter(|r| r.n == 16)
        .all(|r| r.status.contains("corner")));
    assert_eq!(AnchorRule::parse("14,14").unwrap().resolve(16), (14, 14));
}

#[test]
fn files_are_written_with_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("nested").join("run");
    let report = run_solve(&small()).unwrap();
    let written = report.write_files(&prefix).unwrap();
    assert_eq!(written.len(), 2);
    let csv = std::fs::read_to_string(&written[0]).unwrap();
    assert!(csv.starts_with("N,eps,source,status,unknowns,u_min,u_max"));
}
