use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn wikigame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wikigame"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = wikigame(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

type Row = BTreeMap<String, serde_json::Value>;

fn json_rows(text: &str, table: &str) -> Vec<Row> {
    text.lines()
        .map(|l| serde_json::from_str::<Row>(l).unwrap())
        .filter(|r| r["table"] == table)
        .collect()
}

fn num(row: &Row, key: &str) -> f64 {
    row[key]
        .as_f64()
        .unwrap_or_else(|| panic!("{key} is not a number in {row:?}"))
}

fn csv_rows(text: &str, table: &str) -> Vec<BTreeMap<String, String>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut header: Vec<String> = Vec::new();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        if &rec[0] == "table" {
            header = rec.iter().map(String::from).collect();
        } else if &rec[0] == table {
            rows.push(
                header
                    .iter()
                    .cloned()
                    .zip(rec.iter().map(String::from))
                    .collect(),
            );
        }
    }
    rows
}

#[test]
fn solve_reports_equilibrium() {
    let dir = TempDir::new().unwrap();
    let cases: [(&str, &[f64]); 3] = [
        ("1,1\n", &[0.5, 0.5]),
        ("1,1.5,2\n", &[5.0 / 9.0, 3.0 / 9.0, 1.0 / 9.0]),
        ("1\n1\n2\n", &[0.5, 0.5, 0.0]),
    ];
    for (text, want) in cases {
        let betas = write(dir.path(), "b", text);
        let out = ok(&["solve", "--betas", &betas, "--format", "json-lines"]);
        let players = json_rows(&out, "players");
        assert_eq!(players.len(), want.len());
        for (row, u) in players.iter().zip(want) {
            assert!((num(row, "u") - u).abs() < 1e-11, "{text}: {row:?}");
        }
        let summary = &json_rows(&out, "summary")[0];
        assert!(num(summary, "foc_residual_max") <= 1e-10);
    }
    let out = ok(&[
        "solve",
        "--betas",
        &write(dir.path(), "b", "1,1,2"),
        "--format",
        "json-lines",
    ]);
    let third = &json_rows(&out, "players")[2];
    assert_eq!(third["feasible"], false);
    assert_eq!(third["active"], false);
}

#[test]
fn solve_methods_agree() {
    let dir = TempDir::new().unwrap();
    let betas = write(dir.path(), "b", "0.4,0.5,0.45,0.55,0.42,3.0\n");
    let xs: Vec<Vec<f64>> = ["closed-form", "spectral", "dynamics"]
        .iter()
        .map(|m| {
            let out = ok(&[
                "solve",
                "--betas",
                &betas,
                "--method",
                m,
                "--format",
                "json-lines",
            ]);
            json_rows(&out, "players")
                .iter()
                .map(|r| num(r, "x"))
                .collect()
        })
        .collect();
    for other in &xs[1..] {
        for (a, b) in xs[0].iter().zip(other) {
            assert!((a - b).abs() < 1e-8);
        }
    }
    assert_eq!(xs[0][5], 0.0);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let code = |args: &[&str]| wikigame(args).status.code().unwrap();
    assert_eq!(
        code(&["solve", "--betas", &write(dir.path(), "a", "1,abc")]),
        2
    );
    assert_eq!(
        code(&["solve", "--betas", &write(dir.path(), "b", "1,-1")]),
        2
    );
    assert_eq!(code(&["solve", "--betas", "/nonexistent/betas"]), 2);
    assert_eq!(code(&["solve"]), 2);
    assert_eq!(code(&["solve", "--betas", &write(dir.path(), "c", "4")]), 3);
    assert_eq!(
        code(&[
            "classes",
            "--betas",
            &write(dir.path(), "d", "1,2"),
            "--tol",
            "-1"
        ]),
        2
    );
    assert_eq!(code(&["simulate", "--preset", "articles", "--out", "x"]), 2);
    assert_eq!(
        code(&[
            "simulate",
            "--config",
            &write(
                dir.path(),
                "e",
                "[[page]]\nname = \"p\"\neditors = 5\nedits = 3\n"
            ),
            "--seed",
            "1",
            "--out",
            dir.path().join("o").to_str().unwrap()
        ]),
        2
    );

    // Observed shares that are all equal make the correlation undefined.
    let page = dir.path().join("flat");
    fs::create_dir(&page).unwrap();
    write(
        &page,
        "edits.csv",
        "contributor,kind,scope,effort\n1,add_content,1,1\n2,add_content,2,2\n",
    );
    write(
        &page,
        "census.csv",
        "revision,contributor,sentences\n2,1,1\n2,2,1\n",
    );
    let out = wikigame(&["validate", "--train", page.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn simulate(dir: &Path, config: &str, seed: &str, out: &str) -> PathBuf {
    let cfg = write(dir, "sim.toml", config);
    let target = dir.join(out);
    ok(&[
        "simulate",
        "--config",
        &cfg,
        "--seed",
        seed,
        "--out",
        target.to_str().unwrap(),
    ]);
    target
}

#[test]
fn simulate_is_byte_reproducible() {
    let dir = TempDir::new().unwrap();
    let config = "[[page]]\nname = \"aikido\"\neditors = 62\nedits = 72\n\n\
                  [[page]]\nname = \"small\"\neditors = 3\nedits = 12\nbetas = [1.0, 1.5, 2.0]\n";
    let a = simulate(dir.path(), config, "42", "a");
    let b = simulate(dir.path(), config, "42", "b");
    let c = simulate(dir.path(), config, "43", "c");
    for page in ["aikido", "small"] {
        for file in ["history.tsv", "edits.csv", "census.csv"] {
            let x = fs::read(a.join(page).join(file)).unwrap();
            assert_eq!(
                x,
                fs::read(b.join(page).join(file)).unwrap(),
                "{page}/{file}"
            );
        }
        assert_ne!(
            fs::read(a.join(page).join("history.tsv")).unwrap(),
            fs::read(c.join(page).join("history.tsv")).unwrap()
        );
    }
    let history = fs::read_to_string(a.join("aikido/history.tsv")).unwrap();
    assert_eq!(history.lines().count(), 72);

    // census sums to the number of surviving sentences
    let census = fs::read_to_string(a.join("small/census.csv")).unwrap();
    let owned: usize = census
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(owned, 9);
}

#[test]
fn validate_recovers_a_model_consistent_page() {
    let dir = TempDir::new().unwrap();
    let config = "[[page]]\nname = \"p\"\neditors = 3\nedits = 12\nbetas = [1.0, 1.5, 2.0]\n";
    let out = simulate(dir.path(), config, "5", "corpus");
    let text = ok(&[
        "validate",
        "--train",
        out.join("p").to_str().unwrap(),
        "--format",
        "json-lines",
    ]);
    let summary = &json_rows(&text, "summary")[0];
    assert!((num(summary, "pooled_pearson") - 1.0).abs() < 1e-9);
    assert!(
        !summary.contains_key("rho"),
        "single page without holdout has no fit"
    );
    assert!(json_rows(&text, "holdout").is_empty());
    let betas: Vec<f64> = json_rows(&text, "contributors")
        .iter()
        .map(|r| num(r, "beta"))
        .collect();
    assert_eq!(betas, vec![1.0, 1.5, 2.0]);
}

#[test]
fn four_train_five_holdout_protocol() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("corpus");
    ok(&[
        "simulate",
        "--preset",
        "articles",
        "--seed",
        "3",
        "--out",
        corpus.to_str().unwrap(),
    ]);
    let page = |n: &str| corpus.join(n).to_str().unwrap().to_string();
    let train = ["aikido", "angel", "baryon", "board_game"]
        .map(page)
        .join(",");
    let holdout = [
        "buckminster_fuller",
        "cdc",
        "classical_mechanics",
        "dartmouth_college",
        "erin_brockovich",
    ]
    .map(page);
    let mut args = vec!["validate", "--train", &train, "--holdout"];
    args.extend(holdout.iter().map(String::as_str));

    let json = ok(&[args.as_slice(), &["--format", "json-lines"]].concat());
    let summary = &json_rows(&json, "summary")[0];
    assert!((num(summary, "pooled_pearson") - 1.0).abs() < 1e-9);
    assert!((num(summary, "rho") - 1.0).abs() < 1e-6);
    assert!(num(summary, "delta").abs() < 1e-6);
    let errors = json_rows(&json, "holdout");
    assert_eq!(
        errors
            .iter()
            .map(|r| r["page"].as_str().unwrap())
            .collect::<Vec<_>>(),
        [
            "buckminster_fuller",
            "cdc",
            "classical_mechanics",
            "dartmouth_college",
            "erin_brockovich"
        ]
    );
    assert!(errors.iter().all(|r| num(r, "error_percent").abs() < 1e-6));
    let roles: Vec<String> = json_rows(&json, "pages")
        .iter()
        .map(|r| r["role"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(roles.iter().filter(|r| *r == "train").count(), 4);
    assert_eq!(roles.iter().filter(|r| *r == "holdout").count(), 5);

    // json-lines and csv carry the same numbers
    let csv = ok(&[args.as_slice(), &["--format", "csv"]].concat());
    for table in ["pages", "contributors", "classes", "summary", "holdout"] {
        let j = json_rows(&json, table);
        let c = csv_rows(&csv, table);
        assert_eq!(j.len(), c.len(), "{table}");
        for (jr, cr) in j.iter().zip(&c) {
            for (key, value) in jr {
                let cell = &cr[key];
                match value {
                    serde_json::Value::Number(n) => {
                        let x = n.as_f64().unwrap();
                        assert!(
                            (x - cell.parse::<f64>().unwrap()).abs() <= 1e-12,
                            "{table}.{key}"
                        );
                    }
                    serde_json::Value::String(s) => assert_eq!(s, cell),
                    serde_json::Value::Bool(b) => assert_eq!(b.to_string(), *cell),
                    serde_json::Value::Null => assert_eq!(cell, ""),
                    other => panic!("unexpected {other:?}"),
                }
            }
        }
    }

    // the table format writes to --out as well
    let report = dir.path().join("report.txt");
    ok(&[args.as_slice(), &["--out", report.to_str().unwrap()]].concat());
    assert!(fs::read_to_string(report).unwrap().contains("# holdout"));
}

#[test]
fn classes_from_five_levels() {
    let dir = TempDir::new().unwrap();
    let levels = ["1.000", "1.002", "1.004", "1.006", "1.008"];
    let text: Vec<&str> = (0..62).map(|i| levels[i % 5]).collect();
    let betas = write(dir.path(), "b", &text.join("\n"));
    let out = ok(&["classes", "--betas", &betas, "--format", "csv"]);
    let rows = csv_rows(&out, "classes");
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r["beta_min"] == r["beta_max"]));
    let sizes: usize = rows
        .iter()
        .map(|r| r["size"].parse::<usize>().unwrap())
        .sum();
    assert_eq!(sizes, 62);
}

#[test]
fn twelve_significant_digits() {
    let dir = TempDir::new().unwrap();
    let out = ok(&[
        "solve",
        "--betas",
        &write(dir.path(), "b", "1,1.5,2"),
        "--format",
        "csv",
    ]);
    let rows = csv_rows(&out, "players");
    assert_eq!(rows[0]["u"], "0.555555555556");
    assert_eq!(rows[2]["x"], "0.0493827160494");
}
