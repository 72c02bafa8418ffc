use diffusion_gof::gof::Method;
use diffusion_gof::harness::{run_config, run_scenario, HarnessConfig, McReport, Scenario};

fn small() -> HarnessConfig {
    HarnessConfig::parse(
        "scenarios = m4, s2\nn = 60\nreps = 12\nB = 100\nseed = 17\n\
         methods = er-ks, er-cvm, np, glrt, dcov\nbandwidth = rot\n",
    )
    .unwrap()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn report_independent_of_worker_count() {
    let cfg = small();
    let a = in_pool(1, || run_config(&cfg).unwrap());
    let b = in_pool(3, || run_config(&cfg).unwrap());
    assert!(a.same_cells(&b));
    let c = in_pool(2, || run_config(&cfg).unwrap());
    assert!(a.same_cells(&c));
}

#[test]
fn car_report_independent_of_worker_count() {
    let cfg = HarnessConfig::parse(
        "scenarios = ou, ctar\nn = 60\nreps = 6\nB = 100\nseed = 3\norders = 1, 2\n\
         methods = er-ks, dcov\ncalibration = permutation\n",
    )
    .unwrap();
    let a = in_pool(1, || run_config(&cfg).unwrap());
    let b = in_pool(2, || run_config(&cfg).unwrap());
    assert!(a.same_cells(&b));
    assert_eq!(a.cells.len(), 2 * 2 * 2);
}

#[test]
fn rejection_counts_and_standard_errors() {
    let cfg = small();
    let report = run_config(&cfg).unwrap();
    assert_eq!(report.cells.len(), 2 * 5);
    for cell in &report.cells {
        assert_eq!(cell.p_values.len(), cell.reps);
        let recount = cell.p_values.iter().filter(|&&p| p <= cfg.alpha).count();
        assert_eq!(cell.rejections, recount);
        let r = recount as f64 / cell.reps as f64;
        assert_eq!(cell.se(), (r * (1.0 - r) / cell.reps as f64).sqrt());
    }
    assert!(report.cell("m4", 60, 0, Method::Dcov).is_some());
}

#[test]
fn zero_replicates_give_empty_fragment() {
    let mut cfg = small();
    cfg.reps = 0;
    assert!(run_scenario(&cfg, Scenario::Size(diffusion_gof::sde::ScenarioDrift::Zero), 60)
        .unwrap()
        .is_empty());
}

#[test]
fn csv_has_one_row_per_cell() {
    let report = run_config(&small()).unwrap();
    let mut buf = Vec::new();
    report.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), McReport::CSV_HEADER);
    assert_eq!(lines.count(), report.cells.len());
}

#[test]
fn rerun_is_identical() {
    let cfg = small();
    assert!(run_config(&cfg).unwrap().same_cells(&run_config(&cfg).unwrap()));
}
