use std::path::Path;
use std::process::{Command, Output};

use lgf_cli::table_file::{Format, LgfTableFile};

fn lgf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lgf")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn read_table(path: &Path) -> (String, LgfTableFile) {
    let text = std::fs::read_to_string(path).unwrap();
    let table = LgfTableFile::parse(&text).unwrap();
    (text, table)
}

#[test]
fn tabulate_matches_a_tighter_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("t.csv");
    let b = dir.path().join("t_tight.csv");
    let base = ["tabulate", "--alpha1", "0.5", "--c", "0.3", "--L", "99", "--M", "99"];
    stdout(&lgf(&[&base[..], &["--eps", "1e-10", "-o", a.to_str().unwrap()]].concat()));
    stdout(&lgf(&[&base[..], &["--eps", "5e-11", "-o", b.to_str().unwrap()]].concat()));
    let (_, ta) = read_table(&a);
    let (_, tb) = read_table(&b);
    assert_eq!(ta.entries.len(), 100 * 100);
    let worst = ta
        .entries
        .iter()
        .zip(&tb.entries)
        .map(|(x, y)| {
            assert_eq!((x.0, x.1), (y.0, y.1));
            (x.2 - y.2).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-10, "{worst}");
    assert_eq!(ta.metadata_value("method"), Some("fft_batch"));
    assert_eq!(ta.metadata_value("bound"), Some("trapezoid_strip"));
    assert_eq!(ta.metadata_value("c2"), Some("0.09"));
    assert!(ta.metadata_value("n_pts_used").is_some());
}

#[test]
fn emitted_tables_round_trip_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    for (format, name) in [("csv", "t.csv"), ("json", "t.json")] {
        let path = dir.path().join(name);
        let args = ["tabulate", "--alpha1", "0.7", "--c2", "0.02", "--L", "12", "--M", "5", "--format", format];
        stdout(&lgf(&[&args[..], &["-o", path.to_str().unwrap()]].concat()));
        let (text, table) = read_table(&path);
        let fmt = if format == "csv" { Format::Csv } else { Format::Json };
        assert_eq!(table.render(fmt), text);
    }
    let csv = LgfTableFile::parse(&std::fs::read_to_string(dir.path().join("t.csv")).unwrap()).unwrap();
    let json = LgfTableFile::parse(&std::fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
    assert_eq!(csv, json);
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let args = ["tabulate", "--alpha1", "0.5", "--c", "0.05", "--L", "40", "--M", "40"];
    let one = stdout(&lgf(&[&args[..], &["--threads", "1"]].concat()));
    let two = stdout(&lgf(&[&args[..], &["--threads", "2"]].concat()));
    assert_eq!(one, two);
}

#[test]
fn probe_reports_the_series_certificate_under_strong_screening() {
    let text = stdout(&lgf(&["probe", "--alpha1", "1", "--c", "2", "--n", "0", "--m", "0"]));
    let table = LgfTableFile::parse(&text).unwrap();
    assert_eq!(table.metadata_value("method"), Some("series"));
    assert_eq!(table.metadata_value("bound"), Some("series_truncation"));
    assert!(table.metadata_value("terms_used").is_some());
    assert_eq!(table.entries.len(), 1);
    let certificate: f64 = table.metadata_value("certificate").unwrap().parse().unwrap();
    assert!(certificate <= 1e-10);
}

#[test]
fn probe_accepts_negative_indices() {
    let a = LgfTableFile::parse(&stdout(&lgf(&["probe", "--c", "0.4", "--n", "-3", "--m", "2"]))).unwrap();
    let b = LgfTableFile::parse(&stdout(&lgf(&["probe", "--c", "0.4", "--n", "3", "--m", "-2"]))).unwrap();
    assert_eq!(a.entries[0].2, b.entries[0].2);
    assert_eq!((a.entries[0].0, a.entries[0].1), (-3, 2));
}

#[test]
fn walk_prints_exact_terminal_condition() {
    let text = stdout(&lgf(&["walk", "--p1", "0.1", "--p2", "0.15", "--ray", "diagonal", "--max", "20"]));
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines[0], "ray,n,m,rho");
    assert_eq!(lines[1], "diagonal,0,0,1.0");
    assert_eq!(lines.len(), 22);
    let rho: Vec<f64> = lines[1..].iter().map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!(rho.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn walk_monte_carlo_columns() {
    let text = stdout(&lgf(&["walk", "--pk", "0.3", "--ray", "axis", "--max", "2", "--mc-trials", "20000", "--seed", "5"]));
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines[0], "ray,n,m,rho,mc,mc_se");
    for line in &lines[2..] {
        let f: Vec<f64> = line.split(',').skip(3).map(|x| x.parse().unwrap()).collect();
        assert!((f[0] - f[1]).abs() < 5.0 * f[2] + 1e-3, "{line}");
    }
}

#[test]
fn app3d_reports_levels_and_slope() {
    let text = stdout(&lgf(&["app3d", "--aspect", "2", "--periods", "8,16"]));
    let table: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(table[0], "aspect,n_p,dx1,dx2,dx3,n1,n2,n3,max_error");
    assert_eq!(table.len(), 3);
    let slope: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# slope_aspect_2.0="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(slope > 1.5 && slope < 2.5, "{slope}");
}

#[test]
fn bench_flags_divergent_oracle_with_exit_code_4() {
    let out = lgf(&["bench", "--alpha1", "0.5", "--c", "0.01", "--L", "2", "--M", "2", "--runs", "1"]);
    assert_eq!(out.status.code(), Some(4));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\nbessel,"));
    assert!(text.lines().any(|l| l.starts_with("bessel,") && l.ends_with(",true")));
}

#[test]
fn bench_succeeds_when_the_oracle_converges() {
    let text = stdout(&lgf(&["bench", "--c", "1", "--L", "3", "--M", "3", "--runs", "1", "--format", "json"]));
    assert!(text.contains("\"method\": \"fft_batch\""));
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| lgf(args).status.code();
    assert_eq!(code(&["tabulate", "--L", "3", "--M", "3"]), Some(2));
    assert_eq!(code(&["tabulate", "--c", "1", "--c2", "1", "--L", "3", "--M", "3"]), Some(2));
    assert_eq!(code(&["probe", "--alpha1", "1.5", "--c", "1", "--n", "0", "--m", "0"]), Some(2));
    assert_eq!(code(&["probe", "--c", "1", "--n", "0", "--m", "0", "--delta", "1.5"]), Some(2));
    assert_eq!(code(&["probe", "--c", "1", "--n", "0", "--m", "0", "--eps", "1e-16"]), Some(3));
    assert_eq!(code(&["walk", "--p1", "0.3", "--p2", "0.3"]), Some(2));
    assert_eq!(code(&["probe", "--c", "1", "--n", "0", "--m", "0", "--eps", "1e-15"]), Some(0));
}
