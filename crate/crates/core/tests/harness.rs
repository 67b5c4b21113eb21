use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use kquant::harness::{run, CachePolicy, ExperimentConfig, GramCache, SUMMARY_FILE};
use kquant::{build_model, Error, Potential};
use serde_json::{json, Value};

fn config(dir: &Path, extra: Value) -> ExperimentConfig {
    let mut base = json!({
        "model": { "name": "CP1", "resolution": 8 },
        "suite": [{ "family": "constant", "value": 0.0 }],
        "k_list": [2, 4],
        "experiments": ["bergman"],
        "output_dir": dir,
        "cache": { "policy": "off" }
    });
    for (k, v) in extra.as_object().unwrap() {
        base[k] = v.clone();
    }
    ExperimentConfig::from_json(&base.to_string()).unwrap()
}

fn write_config(dir: &Path, c: &ExperimentConfig) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, serde_json::to_string_pretty(c).unwrap()).unwrap();
    p
}

#[test]
fn bergman_table_has_closed_form_rho() {
    let tmp = tempfile::tempdir().unwrap();
    let report = run(&config(tmp.path(), json!({}))).unwrap();
    assert!(report.passed());
    let text = fs::read_to_string(tmp.path().join("bergman.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let k: f64 = row[col("k")].parse().unwrap();
        for c in ["rho_min", "rho_max", "rho_expected"] {
            let v: f64 = row[col(c)].parse().unwrap();
            assert!((v - (k + 1.0) / k).abs() < 1e-10, "{c} = {v} at k = {k}");
        }
    }
}

#[test]
fn repeated_runs_are_byte_identical_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let extra = json!({
        "suite": [
            { "family": "constant", "value": 0.0 },
            { "family": "legendre", "l": 2, "eps": 0.05 }
        ],
        "k_list": [3, 4, 5, 6],
        "experiments": ["bergman", "lemmas", "geodesic", "titerate"],
        "seed": 7,
        "geodesic": { "samples": 2, "s_points": 5 },
        "lemmas": { "pairs": 3 }
    });
    let ra = run(&config(a.path(), extra.clone())).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let rb = pool.install(|| run(&config(b.path(), extra))).unwrap();
    assert_eq!(ra.tables.len(), rb.tables.len());
    for p in ra.tables.iter().chain([&ra.summary_path]) {
        let name = p.file_name().unwrap();
        assert_eq!(fs::read(p).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name:?}");
    }
}

#[test]
fn capability_error_before_any_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    let c = config(&out, json!({ "k_list": [100], "model": { "name": "CP1", "resolution": 40 } }));
    assert!(matches!(run(&c), Err(Error::Capability { k: 100, capability: 40 })));
    assert!(!out.exists());
}

#[test]
fn config_errors_are_field_level() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = |v: Value| {
        let mut base = serde_json::to_value(config(tmp.path(), json!({}))).unwrap();
        for (k, x) in v.as_object().unwrap() {
            base[k] = x.clone();
        }
        ExperimentConfig::from_json(&base.to_string()).and_then(|c| c.validate().map(|_| ()))
    };
    let msg = |r: kquant::Result<()>| r.unwrap_err().to_string();
    assert!(msg(bad(json!({ "colour": 1 }))).contains("colour"));
    assert!(msg(bad(json!({ "suite": [{ "family": "bogus" }] }))).contains("bogus"));
    assert!(matches!(bad(json!({ "model": { "name": "CP3", "resolution": 4 } })), Err(Error::UnknownModel(_))));
    assert!(msg(bad(json!({ "experiments": ["geodesic"] }))).contains("seed"));
    assert!(msg(bad(json!({ "k_list": [4, 2] }))).contains("increasing"));
    assert!(msg(bad(json!({ "suite": [{ "family": "legendre", "l": 2, "eps": 0.3 }] }))).contains("suite[0]"));
    assert!(msg(bad(json!({ "suite": [{ "family": "weighted_fs", "a": 1.0, "b": 2.0 }] }))).contains("not defined"));
    assert!(msg(bad(json!({ "model": { "name": "CP2_toric", "resolution": 4 }, "experiments": ["kenergy"] })))
        .contains("not available"));
}

#[test]
fn cache_hits_misses_and_corruption() {
    let tmp = tempfile::tempdir().unwrap();
    let store = GramCache::new(tmp.path(), CachePolicy::ReadWrite);
    let m = build_model("CP1", 20).unwrap();
    let phi = Potential::legendre(2, 0.05).unwrap();
    let first = store.cache_gram(&m, &phi, 20).unwrap();
    let key = GramCache::key(&m, &phi, 20);
    let path = store.path_for(&key);
    assert!(path.exists());
    let second = store.cache_gram(&m, &phi, 20).unwrap();
    assert_eq!(first.matrix(), second.matrix());

    let finer = build_model("CP1", 22).unwrap();
    assert_ne!(GramCache::key(&finer, &phi, 20), key);

    let bytes = fs::read(&path).unwrap();
    fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
    let third = store.cache_gram(&m, &phi, 20).unwrap();
    assert_eq!(first.matrix(), third.matrix());
    assert_eq!(fs::read(&path).unwrap(), bytes, "entry rewritten after corruption");

    // a flipped matrix entry fails the checksum
    let mut entry: Value = serde_json::from_slice(&bytes).unwrap();
    entry["re"][0] = json!(123.0);
    fs::write(&path, entry.to_string()).unwrap();
    let fourth = store.cache_gram(&m, &phi, 20).unwrap();
    assert_eq!(first.matrix(), fourth.matrix());
}

#[test]
fn run_uses_the_cache_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cache_dir = tmp.path().join("cache");
    let c = config(&tmp.path().join("out"), json!({ "cache": { "policy": "read_write", "dir": cache_dir } }));
    run(&c).unwrap();
    if std::env::var_os(kquant::harness::CACHE_DIR_ENV).is_none() {
        assert_eq!(fs::read_dir(&cache_dir).unwrap().count(), 2);
    }
}

#[test]
fn example_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let p = entry.unwrap().path();
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        if name.ends_with(".schema.json") || !name.ends_with(".json") {
            continue;
        }
        let c = ExperimentConfig::load(&p).unwrap();
        c.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        n += 1;
    }
    assert!(n >= 2);
}

#[test]
fn schema_lists_every_config_field() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let schema: Value = serde_json::from_str(&fs::read_to_string(dir.join("experiment-config.schema.json")).unwrap()).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let c = serde_json::to_value(config(tmp.path(), json!({ "seed": 1 }))).unwrap();
    let props = schema["properties"].as_object().unwrap();
    for (key, value) in c.as_object().unwrap() {
        assert!(props.contains_key(key), "schema misses `{key}`");
        if let (Some(obj), Some(sub)) = (value.as_object(), props[key].get("properties")) {
            for k in obj.keys() {
                assert!(sub.get(k).is_some(), "schema misses `{key}.{k}`");
            }
        }
    }
    assert_eq!(props.len(), c.as_object().unwrap().len());
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_kquant")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn cli_exit_status_contract() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(&tmp.path().join("out"), json!({}));
    let path = write_config(tmp.path(), &c);
    let p = path.to_str().unwrap();

    let (code, stdout) = cli(&["bergman", "--config", p, "--no-cache"]);
    assert_eq!(code, 0, "{stdout}");
    assert!(tmp.path().join("out").join(SUMMARY_FILE).exists());

    let alt = tmp.path().join("alt");
    let (code, _) = cli(&["bergman", "--config", p, "--no-cache", "--out", alt.to_str().unwrap(), "--k", "3..5"]);
    assert_eq!(code, 0);
    let summary: Value = serde_json::from_str(&fs::read_to_string(alt.join(SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(summary["experiments"][0]["levels"], json!([3, 4, 5]));

    // a check that cannot pass
    let strict = config(&tmp.path().join("strict"), json!({ "experiments": ["titerate"], "seed": 1, "tolerances": { "titerate_reduction": 0.0 } }));
    fs::create_dir_all(tmp.path().join("strict")).unwrap();
    let sp = write_config(&tmp.path().join("strict"), &strict);
    let (code, stdout) = cli(&["titerate", "--config", sp.to_str().unwrap(), "--no-cache"]);
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.contains("FAIL"));

    assert_eq!(cli(&["bergman", "--config", p, "--k", "1..100"]).0, 2);
    assert_eq!(cli(&["geodesic", "--config", p]).0, 2, "seed is required");
    assert_eq!(cli(&["bergman", "--config", "/nonexistent.json"]).0, 2);
    assert_eq!(cli(&["bergman"]).0, 2);
    assert_eq!(cli(&["frobnicate"]).0, 2);
}
