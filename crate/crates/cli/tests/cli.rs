use std::fs;
use std::path::Path;
use std::process::Command;

use hyperlab::porosity::lemmas::calibrate_nu;
use hyperlab::porosity::{cantor_generate, scale_ladder, CantorSpec, PorosityKind};
use tempfile::TempDir;

fn hyperlab(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_hyperlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    let text =
        String::from_utf8_lossy(&o.stdout).into_owned() + &String::from_utf8_lossy(&o.stderr);
    (o.status.code().expect("exit code"), text)
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn empty_set_passes_and_full_cube_fails() {
    let dir = TempDir::new().unwrap();
    let empty = write(
        &dir,
        "empty.toml",
        "boxes = []\nresolution = 256\ndims = 1\n",
    );
    let full = write(
        &dir,
        "full.toml",
        "boxes = [[[0.0], [1.0]]]\nresolution = 256\n",
    );
    let args = ["--nu", "0.3", "--alpha0", "0.1", "--alpha1", "0.5"];

    let mut a = vec!["porosity-check", empty.as_str()];
    a.extend(args);
    assert_eq!(hyperlab(&a, &dir.path().join("e")).0, 0);

    let mut a = vec!["porosity-check", full.as_str()];
    a.extend(args);
    let (code, _) = hyperlab(&a, &dir.path().join("f"));
    assert_eq!(code, 2);
    let report = fs::read_to_string(dir.path().join("f/porosity.txt")).unwrap();
    assert!(report.contains("CounterexampleFound"));
}

#[test]
fn cantor_below_its_threshold_is_certified() {
    let x = cantor_generate(&CantorSpec::middle_third(6), 1).unwrap();
    let alpha0 = 0.06;
    let nu_star = calibrate_nu(&x, PorosityKind::Ball, 0, 0.1, 0.5, 20, |nu| {
        (4.0 * x.delta() / nu <= alpha0).then(|| scale_ladder(alpha0, 1.0).unwrap())
    })
    .unwrap()
    .expect("certified at the lower bracket");
    assert!(nu_star > 0.1);

    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "c.toml",
        "[cantor]\nbase = 3\nkept_digits = [0, 2]\ndepth = 6\ndims = 1\n",
    );
    let nu = format!("{}", 0.95 * nu_star);
    let (code, text) = hyperlab(
        &[
            "porosity-check",
            &spec,
            "--nu",
            &nu,
            "--alpha0",
            "0.06",
            "--alpha1",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(code, 0, "{text}");
}

#[test]
fn unresolvable_parameters_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "c.toml",
        "[cantor]\nbase = 3\nkept_digits = [0, 2]\ndepth = 3\ndims = 1\n",
    );
    let (code, text) = hyperlab(
        &[
            "porosity-check",
            &spec,
            "--nu",
            "0.1",
            "--alpha0",
            "0.01",
            "--alpha1",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(code, 1);
    assert!(text.contains("error"));
}

#[test]
fn malformed_config_reports_the_line() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.toml", "depths = [3, 4\n");
    let (code, text) = hyperlab(&["fup-scan", &bad], dir.path());
    assert_eq!(code, 1);
    assert!(text.contains("line 1"), "{text}");

    let wrong = write(
        &dir,
        "wrong.toml",
        "depths = [3, 4]\nbase = \"three\"\n[core]\nkind = \"fourier\"\n",
    );
    let (code, text) = hyperlab(&["fup-scan", &wrong], dir.path());
    assert_eq!(code, 1);
    assert!(text.contains("base"), "{text}");
}

#[test]
fn full_masks_have_zero_decay() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "full.toml",
        "depths = [1, 2, 3, 4]\nkept = [0, 1, 2]\n[core]\nkind = \"fourier\"\n",
    );
    let (code, _) = hyperlab(&["fup-scan", &cfg], &dir.path().join("o"));
    assert_eq!(code, 0);
    let csv = fs::read_to_string(dir.path().join("o/fup.csv")).unwrap();
    let beta: f64 = csv
        .lines()
        .find_map(|l| l.strip_prefix("# beta = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(beta.abs() < 1e-12);
}

#[test]
fn flipped_generator_names_the_broken_relation() {
    let dir = TempDir::new().unwrap();
    let (code, text) = hyperlab(
        &[
            "algebra-verify",
            "--n-min",
            "2",
            "--n-max",
            "2",
            "--samples",
            "20",
            "--flip",
            "U1+",
        ],
        dir.path(),
    );
    assert_eq!(code, 2);
    assert!(text.contains("FAIL n=2 [U1+,U1-]"), "{text}");

    let (code, _) = hyperlab(
        &[
            "algebra-verify",
            "--n-min",
            "1",
            "--n-max",
            "2",
            "--samples",
            "20",
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
}

#[test]
fn single_rung_ladder_has_one_row_and_no_fit() {
    let dir = TempDir::new().unwrap();
    let (code, _) = hyperlab(
        &[
            "words-count",
            "--alpha",
            "0.04",
            "--rho",
            "0.9",
            "--j-min",
            "50",
            "--j-max",
            "50",
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
    let csv = fs::read_to_string(dir.path().join("words.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(!csv.contains('#'));
}

#[test]
fn degenerate_ladder_counts_one() {
    let dir = TempDir::new().unwrap();
    let (code, _) = hyperlab(
        &[
            "words-count",
            "--alpha",
            "1/100",
            "--rho",
            "0.9",
            "--j-min",
            "2",
            "--j-max",
            "6",
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
    let csv = fs::read_to_string(dir.path().join("words.csv")).unwrap();
    for row in csv.lines().skip(1) {
        assert_eq!(row.split(',').nth(4), Some("1"));
    }
}

#[test]
fn replay_reproduces_outputs() {
    let dir = TempDir::new().unwrap();
    let first = dir.path().join("first");
    let (code, _) = hyperlab(
        &[
            "group-decompose",
            "--n",
            "2",
            "--samples",
            "50",
            "--seed",
            "7",
        ],
        &first,
    );
    assert_eq!(code, 0);
    let manifest = first.join("manifest.toml");
    let text = fs::read_to_string(&manifest).unwrap();
    assert!(text.contains("decompose.csv"));
    assert!(text.contains("seed = 7"));

    let second = dir.path().join("second");
    let (code, text) = hyperlab(&["replay", manifest.to_str().unwrap()], &second);
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("identical decompose.csv"));
    assert_eq!(
        fs::read(first.join("decompose.csv")).unwrap(),
        fs::read(second.join("decompose.csv")).unwrap()
    );
}

#[test]
fn replay_refuses_changed_inputs() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "empty.toml",
        "boxes = []\nresolution = 128\ndims = 1\n",
    );
    let run = dir.path().join("run");
    let (code, _) = hyperlab(
        &[
            "porosity-check",
            &spec,
            "--nu",
            "0.3",
            "--alpha0",
            "0.2",
            "--alpha1",
            "0.5",
        ],
        &run,
    );
    assert_eq!(code, 0);
    fs::write(&spec, "boxes = []\nresolution = 256\ndims = 1\n").unwrap();
    let (code, text) = hyperlab(
        &["replay", run.join("manifest.toml").to_str().unwrap()],
        &dir.path().join("r"),
    );
    assert_eq!(code, 1);
    assert!(text.contains("changed"), "{text}");
}

#[test]
fn workers_do_not_change_results() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(
        hyperlab(&["fio-sphere", "--w", "1", "--depth-max", "4"], &a).0,
        0
    );
    assert_eq!(
        hyperlab(
            &[
                "fio-sphere",
                "--w",
                "1",
                "--depth-max",
                "4",
                "--workers",
                "2"
            ],
            &b
        )
        .0,
        0
    );
    assert_eq!(
        fs::read(a.join("fio_w1.csv")).unwrap(),
        fs::read(b.join("fio_w1.csv")).unwrap()
    );
}

#[test]
fn help_exits_zero_and_unknown_flags_exit_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(hyperlab(&["--help"], dir.path()).0, 0);
    assert_eq!(hyperlab(&["words-count", "--bogus"], dir.path()).0, 1);
}
