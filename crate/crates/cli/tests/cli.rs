use std::path::PathBuf;
use std::process::{Command, Output};

use diffusion_gof_cli::{load_csv, simulate_path, ColumnSpec, SimModel, SimulateArgs};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diffgof")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("diffgof-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn simulate_is_deterministic() {
    let args = ["simulate", "--model", "ou", "--n", "1000", "--kappa", "0.5", "--mu", "0.08", "--sigma", "0.5", "--seed", "42"];
    let a = stdout(&bin(&args));
    assert_eq!(a, stdout(&bin(&args)));
    assert_eq!(a.lines().count(), 1002);
    assert_eq!(a.lines().next(), Some("t,x"));
    let other = stdout(&bin(&["simulate", "--model", "ou", "--n", "1000", "--seed", "43"]));
    assert_ne!(a, other);
}

#[test]
fn simulated_file_loads_back() {
    let out = scratch("ckls.csv");
    let o = bin(&["simulate", "--model", "ckls", "--n", "300", "--mu", "2", "--sigma", "0.5", "--seed", "3", "-o", out.to_str().unwrap()]);
    assert!(o.status.success() && o.stdout.is_empty());
    let series = load_csv(&out, &ColumnSpec::default()).unwrap();
    let mut args = SimulateArgs::new(SimModel::Ckls);
    args.n = 300;
    args.mu = 2.0;
    args.sigma = Some(0.5);
    args.seed = 3;
    let path = simulate_path(&args).unwrap();
    assert_eq!(series.rates, path.values());
    assert!((series.delta - path.delta()).abs() < 1e-15);
    assert!(!out.with_extension("csv.partial").exists());
}

#[test]
fn sigma_and_sigma2_agree() {
    let mut a = SimulateArgs::new(SimModel::Scale);
    a.sigma = Some(0.3);
    let mut b = a.clone();
    b.sigma = None;
    b.sigma2 = Some(0.09);
    let (pa, pb) = (simulate_path(&a).unwrap(), simulate_path(&b).unwrap());
    let gap = pa.values().iter().zip(pb.values()).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    assert!(gap < 1e-9);
}

#[test]
fn fit_prints_named_parameters() {
    let data = scratch("ou.csv");
    stdout(&bin(&["simulate", "--model", "ou", "--n", "2000", "--delta", "0.1", "--mu", "1", "--seed", "5", "-o", data.to_str().unwrap()]));
    let text = stdout(&bin(&["fit", "-i", data.to_str().unwrap(), "--model", "ou"]));
    let names: Vec<&str> = text.lines().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["parameter", "mu", "kappa", "sigma", "loglik", "converged"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&bin(&["fit", "-i", data.to_str().unwrap(), "--model", "ou", "--json"]))).unwrap();
    assert_eq!(json["model"], "ou");
    assert!((json["theta"]["mu"].as_f64().unwrap() - 1.0).abs() < 0.5);
}

#[test]
fn test_command_writes_one_row_per_method() {
    let data = scratch("test-in.csv");
    let out = scratch("test-out.csv");
    stdout(&bin(&["simulate", "--model", "ckls", "--n", "400", "--delta", "0.1", "--kappa", "0.5", "--mu", "2", "--sigma", "0.5", "--seed", "8", "-o", data.to_str().unwrap()]));
    let args = ["test", "-i", data.to_str().unwrap(), "--method", "er-ks,dcov", "--B", "100", "--bandwidth", "rot", "--seed", "4", "-o", out.to_str().unwrap()];
    stdout(&bin(&args));
    let first = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = first.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("ER-KS,") && rows[2].starts_with("DCOV,"));
    assert!(rows[1].ends_with(",4"));
    stdout(&bin(&args));
    assert_eq!(first, std::fs::read_to_string(&out).unwrap());
}

#[test]
fn bands_cover_truth_on_most_of_the_grid() {
    let data = scratch("bands-in.csv");
    stdout(&bin(&["simulate", "--model", "ckls", "--n", "5000", "--delta", "0.01", "--kappa", "2", "--mu", "1", "--sigma", "1", "--gamma", "1", "--x0", "1", "--seed", "12", "-o", data.to_str().unwrap()]));
    let csv = stdout(&bin(&["bands", "-i", data.to_str().unwrap(), "--bandwidth", "rot*0.5"]));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,sigma2_hat,lower,upper"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 101);
    let covered = rows.iter().filter(|r| r[2] <= r[0] * r[0] && r[0] * r[0] <= r[3]).count();
    assert!(covered >= 90, "{covered} of 101");
}

#[test]
fn mc_seed_flag_overrides_file() {
    let cfg = scratch("mc.cfg");
    std::fs::write(&cfg, "scenarios = m4\nn = 50\nreps = 4\nB = 100\nseed = 1\nmethods = er-ks, dcov\nbandwidth = rot\n").unwrap();
    let a = stdout(&bin(&["mc", "--config", cfg.to_str().unwrap(), "--seed", "9"]));
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].contains(",9,"), "{}", lines[1]);
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let short = scratch("short.csv");
    std::fs::write(&short, "date,rate\n2020-01-02,1.5\n2020-01-03,1.6\n2020-01-06,1.55\n").unwrap();
    let o = bin(&["test", "-i", short.to_str().unwrap(), "--B", "100"]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.lines().last().unwrap().starts_with("error:"), "{err}");

    let o = bin(&["fit", "-i", short.to_str().unwrap(), "--column", "DGS10"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("available columns: date, rate"));

    assert!(!bin(&["mc", "--config", "missing.cfg"]).status.success());
    assert!(!bin(&["simulate", "--model", "car"]).status.success());
    assert!(!bin(&["simulate", "--model", "ou", "--sigma", "1", "--sigma2", "1"]).status.success());
}
