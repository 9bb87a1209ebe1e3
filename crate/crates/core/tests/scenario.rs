use osg_core::oracle::Case;
use osg_core::scenario::{columns, parse_config, render, run_scenario, Cell, OutputFormat, ScenarioConfig};
use osg_core::ScenarioError;

fn quick(case: Case) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::defaults(case);
    cfg.n_samples = 301;
    cfg
}

fn num(cell: &Cell) -> f64 {
    match cell {
        Cell::Num(v) => *v,
        Cell::Bool(_) => panic!("expected a number"),
    }
}

#[test]
fn rows_grouped_by_angle_and_ordered_in_time() {
    for case in [Case::Psi, Case::Phi, Case::OneAtom] {
        let cfg = quick(case);
        let data = run_scenario(&cfg).unwrap();
        assert_eq!(data.columns, columns(case));
        assert_eq!(data.rows.len(), cfg.gammas.len() * cfg.n_samples);
        for (block, &g) in data.rows.chunks(cfg.n_samples).zip(&cfg.gammas) {
            assert!(block.iter().all(|r| num(&r[1]) == g && r.len() == data.columns.len()));
            assert!(block.windows(2).all(|w| num(&w[0][0]) < num(&w[1][0])));
            assert_eq!(num(&block[cfg.n_samples - 1][0]), cfg.t_max);
        }
    }
}

#[test]
fn death_times_follow_angle_order() {
    let data = run_scenario(&quick(Case::Phi)).unwrap();
    // gammas default to π/4, π/6, π/12
    let t: Vec<f64> = data.summary.death_times.iter().map(|d| d.t_star.unwrap()).collect();
    assert!(t[0] > t[1] && t[1] > t[2], "{t:?}");
    assert!(run_scenario(&quick(Case::Psi)).unwrap().summary.death_times.is_empty());

    let mut edge = quick(Case::Phi);
    edge.gammas = vec![0.0, std::f64::consts::FRAC_PI_2];
    let data = run_scenario(&edge).unwrap();
    assert!(data.summary.death_times.iter().all(|d| d.t_star.is_none()));
}

#[test]
fn death_scan_extends_past_short_windows() {
    let mut cfg = quick(Case::Phi);
    cfg.t_max = 2e-4;
    cfg.gammas = vec![1.5];
    let data = run_scenario(&cfg).unwrap();
    let t = data.summary.death_times[0].t_star.unwrap();
    assert!(t > 1e-3 && t < 2e-3, "{t}");
}

#[test]
fn optical_phase_switch_touches_only_phase_columns() {
    for case in [Case::Phi, Case::OneAtom, Case::Psi] {
        let base = quick(case);
        let zeroed = ScenarioConfig { zero_optical_phase: true, ..base.clone() };
        let (a, b) = (run_scenario(&base).unwrap(), run_scenario(&zeroed).unwrap());
        let phase_cols = ["re_b1", "im_b1", "re_q2", "im_q2"];
        let mut changed = false;
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            for ((name, x), y) in a.columns.iter().zip(ra).zip(rb) {
                match (x, y) {
                    (Cell::Num(x), Cell::Num(y)) if phase_cols.contains(name) => changed |= x != y,
                    (Cell::Num(x), Cell::Num(y)) => {
                        assert!((x - y).abs() <= 1e-15 * x.abs().max(1.0), "{case:?} {name}: {x} vs {y}")
                    }
                    (x, y) => assert_eq!(x, y, "{case:?} {name}"),
                }
            }
        }
        assert_eq!(changed, case != Case::Psi, "{case:?}");
    }
}

#[test]
fn csv_layout() {
    let cfg = quick(Case::Psi);
    let text = render(&cfg, &run_scenario(&cfg).unwrap()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), columns(Case::Psi).join(","));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "0.0000000000000000e0");
    assert_eq!(first[1], "7.8539816339744828e-1");
    assert_eq!(*first.last().unwrap(), "false");
    assert!(text.ends_with('\n'));
    // 17 significant digits read back exactly
    for field in text.lines().nth(50).unwrap().split(',').filter(|f| f.parse::<bool>().is_err()) {
        let v: f64 = field.parse().unwrap();
        assert_eq!(format!("{v:.16e}"), field);
    }
}

#[test]
fn json_mirrors_rows() {
    let mut cfg = quick(Case::Phi);
    cfg.output_format = OutputFormat::Json;
    let data = run_scenario(&cfg).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&render(&cfg, &data).unwrap()).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), data.rows.len());
    assert_eq!(rows[10]["d_value"].as_f64().unwrap(), num(&data.rows[10][10]));
    assert!(rows[0]["separable"].is_boolean());
    let meta = &doc["metadata"];
    assert_eq!(meta["config"]["scenario"], "phi");
    assert_eq!(meta["death_times"].as_array().unwrap().len(), 3);
    assert!(meta["constants"]["omega0"].as_f64().unwrap() > 1.2e4);
    assert!(meta["oracle_max_discrepancy"].is_null());
}

#[test]
fn oracle_summary_on_short_run() {
    let mut cfg = parse_config("scenario = phi\nt_max = 2e-4\nn_samples = 21\nrun_oracle = true\n").unwrap();
    let gap = run_scenario(&cfg).unwrap().summary.oracle_max_discrepancy.unwrap();
    assert!(gap < 1e-6, "{gap:e}");
    cfg.zero_optical_phase = true;
    cfg.scenario = Case::OneAtom;
    assert!(run_scenario(&cfg).unwrap().summary.oracle_max_discrepancy.unwrap() < 1e-6);

    cfg.t_max = 1.0;
    let err = run_scenario(&cfg).unwrap_err();
    assert!(matches!(err, ScenarioError::Tolerance { .. }));
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn bounded_worker_pool() {
    let mut cfg = quick(Case::Psi);
    let all = run_scenario(&cfg).unwrap();
    cfg.workers = 2;
    assert_eq!(run_scenario(&cfg).unwrap(), all);
}
