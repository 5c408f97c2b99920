use std::path::PathBuf;
use std::process::Command;

use bratteli_cli::run;
use serde_json::Value;

const CORPUS: [&str; 6] = [
    "fib.sub",
    "fib.bd",
    "thue-morse.sub",
    "single-loop.bd",
    "ex4-E.bd",
    "ex4-F.bd",
];

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

/// Runs the real binary, returning (exit code, stdout, stderr).
fn bratteli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_bratteli"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> (i32, Value) {
    let (code, stdout, stderr) = bratteli(args);
    let value =
        serde_json::from_str(&stdout).unwrap_or_else(|e| panic!("{args:?}: {e}\n{stdout}{stderr}"));
    (code, value)
}

/// Minimal structural validation: required keys present, `type` matches.
fn conforms(value: &Value, schema: &Value) -> bool {
    let type_ok = match &schema["type"] {
        Value::String(t) => type_matches(value, t),
        Value::Array(ts) => ts.iter().any(|t| type_matches(value, t.as_str().unwrap())),
        _ => true,
    };
    if !type_ok {
        return false;
    }
    if let Some(required) = schema["required"].as_array() {
        if !required
            .iter()
            .all(|k| value.get(k.as_str().unwrap()).is_some())
        {
            return false;
        }
    }
    if let (Some(props), Some(obj)) = (schema["properties"].as_object(), value.as_object()) {
        for (k, sub) in props {
            if let Some(v) = obj.get(k) {
                if !conforms(v, sub) {
                    return false;
                }
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), value.as_array()) {
        return arr.iter().all(|v| conforms(v, items));
    }
    true
}

fn type_matches(value: &Value, t: &str) -> bool {
    match t {
        "object" => value.is_object(),
        "array" => value.is_array(),
        "string" => value.is_string(),
        "integer" => value.is_i64() || value.is_u64(),
        "boolean" => value.is_boolean(),
        "null" => value.is_null(),
        _ => true,
    }
}

fn schema_of(name: &str) -> Value {
    let (code, value) = json(&["--schema", name]);
    assert_eq!(code, 0);
    value
}

#[test]
fn every_subcommand_runs_on_every_corpus_file() {
    let e = corpus("ex4-E.bd");
    for name in CORPUS {
        let file = corpus(name);
        let runs: Vec<(&str, Vec<&str>)> = vec![
            ("info", vec!["info", &file]),
            ("paths", vec!["paths", &file, "--length", "3"]),
            ("orbit", vec!["orbit", &file, "--length", "3"]),
            ("af-tower", vec!["af-tower", &file, "--levels", "3"]),
            ("check", vec!["check", &file, "--depth", "5"]),
            (
                "crossed",
                vec!["crossed", &file, "--depth", "5", "--samples", "20"],
            ),
        ];
        for (sub, args) in runs {
            let (code, value) = json(&args);
            assert_eq!(code, 0, "{sub} {name}");
            assert!(conforms(&value, &schema_of(sub)), "{sub} {name}: {value}");
        }
        let (code, value) = json(&["equiv", &file, &e]);
        assert!(code == 0 || code == 1, "equiv {name}");
        assert!(conforms(&value, &schema_of("equiv")));

        let (code, out, _) = bratteli(&["convert", &file]);
        assert_eq!(code, 0);
        assert!(out.starts_with("vertices:"));

        let first: String = json(&["paths", &file, "--length", "1"]).1["paths"][0]
            .as_str()
            .unwrap()
            .to_owned();
        let (code, value) = json(&["vershik", &file, "--path", &first]);
        assert_eq!(code, 0);
        assert!(conforms(&value, &schema_of("vershik")));

        let (code, dot, _) = bratteli(&["af-tower", &file, "--dot"]);
        assert_eq!(code, 0);
        assert!(dot.starts_with("digraph"));
        for sub in ["info", "check", "crossed", "equiv"] {
            let args: Vec<&str> = match sub {
                "equiv" => vec!["--plain", sub, &file, &file],
                "check" | "crossed" => vec!["--plain", sub, &file, "--depth", "4"],
                _ => vec!["--plain", sub, &file],
            };
            let (code, out, _) = bratteli(&args);
            assert_eq!(code, 0, "--plain {sub} {name}");
            assert!(!out.is_empty());
        }
    }
}

#[test]
fn documented_examples() {
    let (code, out, _) = bratteli(&[
        "--plain",
        "vershik",
        &corpus("fib.bd"),
        "--path",
        "A1,A1",
        "--iterate",
        "2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "B1,A2");
    let (_, value) = json(&[
        "vershik",
        &corpus("fib.bd"),
        "--path",
        "B1,A2",
        "--iterate",
        "-2",
    ]);
    assert_eq!(value["result"], "A1,A1");

    let (_, info) = json(&["info", &corpus("fib.sub")]);
    assert_eq!(info["vertex_count"], 2);
    assert_eq!(info["edge_count"], 3);
    assert_eq!(info["incidence"], serde_json::json!([[1, 1], [1, 0]]));
    assert_eq!(info["primitive"], true);

    let (_, tower) = json(&["af-tower", &corpus("fib.sub"), "--levels", "3"]);
    let dims: Vec<u64> = tower["levels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["dim"].as_u64().unwrap())
        .collect();
    assert_eq!(dims, [5, 13, 34]);

    let (code, value) = json(&["equiv", &corpus("ex4-E.bd"), &corpus("ex4-F.bd")]);
    assert_eq!(code, 0);
    assert_eq!(value["equivalent"], true);
    assert_eq!(value["certificate"]["T"].as_object().unwrap().len(), 6);
}

#[test]
fn exit_codes_carry_the_verdict() {
    let (code, value) = json(&["check", &corpus("fib-corrupted.bd"), "--depth", "5"]);
    assert_eq!(code, 1);
    assert_eq!(value["pass"], false);
    let failing: Vec<&Value> = value["relations"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["pass"] == false)
        .collect();
    assert!(!failing.is_empty());
    assert!(failing
        .iter()
        .all(|r| !r["counterexamples"].as_array().unwrap().is_empty()));

    let (code, value) = json(&["equiv", &corpus("fib.sub"), &corpus("thue-morse.sub")]);
    assert_eq!(code, 1);
    assert_eq!(value["reason"]["reason"], "edge-count-mismatch");
}

#[test]
fn usage_errors_name_the_problem() {
    let fib = corpus("fib.sub");
    let readme = corpus("README.md");
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["paths", &fib], "--length"),
        (vec!["paths", &fib, "--length", "0"], "--length"),
        (vec!["paths", &fib, "--length", "40"], "--length"),
        (vec!["paths", &fib, "--length", "2", "--end", "zz"], "--end"),
        (vec!["check", &fib, "--depth", "2"], "--depth"),
        (vec!["check", &fib, "--nmax", "0"], "--nmax"),
        (vec!["vershik", &fib, "--path", "A1,B1,B1"], "B1"),
        (vec!["info", "/nonexistent/x.bd"], "x.bd"),
        (vec!["info", &readme], "README.md"),
        (vec!["--schema", "nope"], "--schema"),
        (vec!["frobnicate"], "frobnicate"),
        (vec![], "subcommand"),
    ];
    for (args, needle) in cases {
        let (code, out, err) = bratteli(&args);
        assert_eq!(code, 2, "{args:?}: {out}{err}");
        assert!(out.is_empty(), "{args:?}");
        assert!(err.contains(needle), "{args:?}: {err}");
    }
    let (code, out, _) = bratteli(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("af-tower"));
    let (code, out, _) = bratteli(&["--version"]);
    assert_eq!(code, 0);
    assert!(out.contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn crossed_is_deterministic() {
    let file = corpus("thue-morse.sub");
    let args = [
        "crossed",
        file.as_str(),
        "--depth",
        "5",
        "--samples",
        "50",
        "--seed",
        "7",
    ];
    let first = bratteli(&args);
    let mut argv = vec!["bratteli"];
    argv.extend(args);
    assert_eq!(first.0, 0);
    assert_eq!(first, bratteli(&args));
    let other = bratteli(&[
        "crossed",
        &file,
        "--depth",
        "5",
        "--samples",
        "50",
        "--seed",
        "8",
    ]);
    assert_eq!(other.0, 0);
    // in-process and subprocess runs agree byte for byte
    assert_eq!(run(argv).stdout, first.1);
}

#[test]
fn parallel_flag_does_not_change_results() {
    for name in ["fib.sub", "fib-corrupted.bd"] {
        let file = corpus(name);
        let seq = bratteli(&["check", &file, "--depth", "5"]);
        let par = bratteli(&["--parallel", "check", &file, "--depth", "5"]);
        assert_eq!(seq, par, "{name}");
    }
    let file = corpus("fib.sub");
    assert_eq!(
        bratteli(&["af-tower", &file, "--levels", "4"]),
        bratteli(&["--parallel", "af-tower", &file, "--levels", "4"])
    );
}

#[test]
fn every_schema_is_printable() {
    for name in [
        "info", "paths", "vershik", "orbit", "af-tower", "check", "crossed", "equiv", "convert",
    ] {
        let value = schema_of(name);
        assert_eq!(value["title"], format!("bratteli {name}"));
    }
}

#[test]
fn convert_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for name in CORPUS {
        let out = dir.path().join(format!("{name}.bd"));
        let out_s = out.to_string_lossy().into_owned();
        let (code, stdout, _) = bratteli(&["convert", &corpus(name), "-o", &out_s]);
        assert_eq!(code, 0);
        assert!(stdout.is_empty());
        let (_, direct) = json(&["info", &corpus(name)]);
        let (_, converted) = json(&["info", &out_s]);
        assert_eq!(direct, converted, "{name}");
        let (_, again, _) = bratteli(&["convert", &out_s]);
        assert_eq!(again, std::fs::read_to_string(&out).unwrap());
    }
}

#[test]
fn certificates_are_written_and_verified() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let cert_s = cert.to_string_lossy().into_owned();
    let (e, f) = (corpus("ex4-E.bd"), corpus("ex4-F.bd"));
    let (code, value) = json(&["equiv", &e, &f, "--certificate", &cert_s]);
    assert_eq!(code, 0);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(written, value["certificate"]);

    let (code, checked) = json(&["equiv", &e, &f, "--verify", &cert_s]);
    assert_eq!(code, 0);
    assert_eq!(checked["violations"], serde_json::json!([]));

    let named = dir.path().join("named.json");
    let pairs: serde_json::Map<String, Value> = (1..=6)
        .map(|i| (format!("e{i}"), Value::from(format!("f{i}"))))
        .collect();
    std::fs::write(&named, serde_json::json!({ "T": pairs }).to_string()).unwrap();
    let (code, _) = json(&["equiv", &e, &f, "--verify", &named.to_string_lossy()]);
    assert_eq!(code, 0);

    let bad = dir.path().join("bad.json");
    let swapped: serde_json::Map<String, Value> = (1..=6)
        .map(|i| {
            (
                format!("e{i}"),
                Value::from(format!(
                    "f{}",
                    if i == 1 {
                        2
                    } else if i == 2 {
                        1
                    } else {
                        i
                    }
                )),
            )
        })
        .collect();
    std::fs::write(&bad, serde_json::json!({ "T": swapped }).to_string()).unwrap();
    let (code, checked) = json(&["equiv", &e, &f, "--verify", &bad.to_string_lossy()]);
    assert_eq!(code, 1);
    assert!(!checked["violations"].as_array().unwrap().is_empty());

    let (code, _, err) = bratteli(&[
        "equiv",
        &e,
        &f,
        "--verify",
        &cert_s,
        "--certificate",
        &cert_s,
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("--certificate") || err.contains("--verify"));
}
