use std::ffi::OsString;

use clap::Parser;
use flowtree::cli::{main_with_args, run, Cli, EXIT_FAIL, EXIT_OK, EXIT_USAGE};
use flowtree::report::Format;
use flowtree::treeheat::{heat_kernel, KernelQuery};
use flowtree::{RelPos, TreeParams};

fn args(list: &[&str]) -> Vec<OsString> {
    std::iter::once("flowtree").chain(list.iter().copied()).map(OsString::from).collect()
}

fn output(list: &[&str], format: Format) -> (bool, String) {
    let cli = Cli::try_parse_from(args(list)).unwrap();
    let mut buf = Vec::new();
    let o = run(&cli.command, format, &mut buf).unwrap();
    (o.passed, String::from_utf8(buf).unwrap())
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn single_kernel_entry_is_the_heat_kernel() {
    let (_, out) = output(&["kernel", "--q", "2", "--t", "1", "--d", "0", "--s", "0"], Format::Csv);
    let rows = data_lines(&out);
    assert_eq!(rows.len(), 1);
    let value: f64 = rows[0].split(',').nth(6).unwrap().parse().unwrap();
    let p = TreeParams::new(2).unwrap();
    let want = heat_kernel(&KernelQuery::new(1.0, 0, 0, RelPos::Equal).unwrap(), &p).unwrap();
    assert!((value - want).abs() <= 1e-15 * want);
}

#[test]
fn kernel_rows_cover_the_grid_and_are_reproducible() {
    let a = [
        "kernel", "--q", "3", "--t", "0.5,2,8", "--d", "2,3", "--s=-1,0,4", "--rel",
        "ancestor,incomparable", "--kinds", "H,gradX,gradXY,R",
    ];
    let (_, first) = output(&a, Format::Csv);
    let (_, second) = output(&a, Format::Csv);
    assert_eq!(first, second);
    assert_eq!(data_lines(&first).len(), 3 * 2 * 3 * 2 * 4);
    assert!(first.starts_with("# command=kernel\n# version="));
    let (_, json) = output(&a, Format::Json);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["cells"].as_array().unwrap().len(), 144);
    assert_eq!(v["summary"]["rows"], 144);
}

#[test]
fn inconsistent_query_is_a_usage_error() {
    let dir = std::env::temp_dir().join("flowtree-cli-usage");
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("k.csv");
    let out = out.to_str().unwrap();
    assert_eq!(main_with_args(args(&["kernel", "--d", "1", "--rel", "equal", "-o", out])), EXIT_USAGE);
    assert_eq!(main_with_args(args(&["kernel", "--q", "1", "-o", out])), EXIT_USAGE);
    assert_eq!(main_with_args(args(&["nonsense"])), EXIT_USAGE);
    assert_eq!(main_with_args(args(&["kernel", "--format", "xml", "-o", out])), EXIT_USAGE);
    assert_eq!(main_with_args(args(&["kernel", "--t", "1,2", "-o", out])), EXIT_OK);
}

#[test]
fn corrupted_heat_power_fails_verification() {
    let dir = std::env::temp_dir().join("flowtree-cli-verify");
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("v.csv");
    let out = out.to_str().unwrap();
    let base = ["verify", "--criteria", "1,8", "-o", out];
    assert_eq!(main_with_args(args(&base)), EXIT_OK);
    // H with power 1 breaks the exponent fit of the first series
    let (passed, csv) = output(
        &["verify", "--criteria", "5", "--q", "2", "--eps", "1", "--h-power", "1"],
        Format::Csv,
    );
    assert!(!passed);
    assert!(csv.contains("# h_power=1"));
    assert!(csv.contains("q2_eps1_H_exponent"));
    let (_, json) = output(&["verify", "--criteria", "7", "--t", "1,4,16,64"], Format::Json);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let names: Vec<&str> = v["cells"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["metric"].as_str().unwrap())
        .collect();
    assert!(names.iter().any(|n| n.ends_with("_spread")));
    assert_eq!(v["summary"]["checks"][0]["id"], 7);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = std::env::temp_dir().join("flowtree-cli-config");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("sweep.conf");
    std::fs::write(&cfg, "# sweep\nq=2\nt=1,4,16,64\neps=0\nkinds=H\n").unwrap();
    let out = dir.join("s.csv");
    let code = main_with_args(args(&[
        "sweep", "--config", cfg.to_str().unwrap(), "--eps", "1", "-o", out.to_str().unwrap(),
    ]));
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# eps=1\n"));
    assert!(text.contains("# t=1,4,16,64\n"));
    assert_eq!(data_lines(&text).len(), 4);
}

#[test]
fn spectrum_walk_and_riesz_commands() {
    let (passed, csv) = output(&["spectrum", "--q", "2", "--radius", "4,6"], Format::Csv);
    assert!(passed);
    assert_eq!(data_lines(&csv).len(), 6);
    let (_, full) = output(&["spectrum", "--q", "3", "--radius", "3", "--eigenvalues"], Format::Csv);
    let dim: f64 = data_lines(&full)
        .iter()
        .filter(|l| l.contains(",flow,"))
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert_eq!(dim, 53.0);

    let walk = ["walk", "--t", "0", "--replicates", "10000", "--seed", "3"];
    let (passed, csv) = output(&walk, Format::Csv);
    assert!(passed);
    assert!(csv.contains("# seed=3"));
    assert!(data_lines(&csv)[0].contains(",10000,1.0,0.0,1.0,0.0"));
    let (_, again) = output(&walk, Format::Csv);
    assert_eq!(csv, again);
    let (passed, _) = output(&["walk", "--t", "2", "--replicates", "100000"], Format::Csv);
    assert!(passed);
    assert_eq!(main_with_args(args(&["walk", "--replicates", "10"])), EXIT_USAGE);

    let (_, csv) = output(&["riesz", "--n-max", "5", "--eps", "0"], Format::Csv);
    assert!(csv.lines().any(|l| l == "n,epsilon,sum_kind,value,fitted_exponent,error_bound"));
    assert_eq!(data_lines(&csv).len(), 18);
}

#[test]
fn failed_check_exits_with_one() {
    let dir = std::env::temp_dir().join("flowtree-cli-fail");
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("v.json");
    let code = main_with_args(args(&[
        "verify", "--criteria", "5", "--q", "2", "--eps", "1", "--h-power", "1", "--format", "json",
        "-o", out.to_str().unwrap(),
    ]));
    assert_eq!(code, EXIT_FAIL);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["config"]["command"], "verify");
}
