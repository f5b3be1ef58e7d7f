use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use locblur::io::{write_image, write_mask};
use locblur::{AlphaMask, SrgbImage};

fn locblur(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locblur"))
        .args(args)
        .current_dir(cwd)
        .env_remove("LOCBLUR_SEED")
        .env_remove("LOCBLUR_WORKERS")
        .env_remove("LOCBLUR_OUT")
        .output()
        .unwrap()
}

fn pattern(w: usize, h: usize, k: usize) -> SrgbImage {
    SrgbImage::from_fn(w, h, |x, y| {
        let v = (((x * 3 + y * 5 + k * 11) % 23) as f64 / 22.0 * 0.8) + 0.1;
        [v, 1.0 - v, 0.5 * v + 0.2]
    })
}

/// Two backgrounds and five objects under `root`.
fn inputs(root: &Path) -> (PathBuf, PathBuf) {
    let bg = root.join("bg");
    let obj = root.join("obj");
    std::fs::create_dir_all(&bg).unwrap();
    std::fs::create_dir_all(&obj).unwrap();
    for k in 0..2 {
        write_image(bg.join(format!("b{k}.png")), &pattern(96, 72, k)).unwrap();
    }
    for k in 0..5 {
        let side = 20 + 2 * k;
        write_image(obj.join(format!("o{k}.png")), &pattern(side, side, k + 3)).unwrap();
        let r = side as f64 / 2.0;
        let mask = AlphaMask::from_fn(side, side, |x, y| {
            let d = ((x as f64 + 0.5 - r).powi(2) + (y as f64 + 0.5 - r).powi(2)).sqrt();
            if d < r - 1.0 {
                1.0
            } else {
                0.0
            }
        });
        write_mask(obj.join(format!("o{k}.mask.png")), &mask).unwrap();
    }
    (bg, obj)
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn synth_stats_eval_round() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let (bg, obj) = inputs(root);
    let cfg = format!(
        r#"{{"sample_count": 3, "background_dir": "{}", "object_dir": "{}", "master_seed": 5}}"#,
        bg.display(),
        obj.display()
    );
    std::fs::write(root.join("cfg.json"), cfg).unwrap();

    let o = locblur(&["synth", "--config", "cfg.json", "--out", "ds", "--workers", "2"], root);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for sub in ["blur", "sharp", "mask"] {
        assert_eq!(std::fs::read_dir(root.join("ds").join(sub)).unwrap().count(), 3);
    }
    let manifest = std::fs::read_to_string(root.join("ds/manifest.jsonl")).unwrap();
    assert_eq!(manifest.lines().count(), 3);
    let first: serde_json::Value = serde_json::from_str(manifest.lines().next().unwrap()).unwrap();
    assert_eq!(first["index"], 0);
    assert_eq!(first["status"], "ok");
    assert!(first["L"].as_u64().unwrap() % 2 == 1);

    let o = locblur(&["stats", "--dataset", "ds", "--out", "curve.csv", "--flow-out", "flows"], root);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(root.join("curve.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("threshold,ratio"));
    assert_eq!(csv.lines().count(), 52);
    assert!(csv.lines().nth(1).unwrap().starts_with("0.000000,"));
    let summary = String::from_utf8_lossy(&o.stderr);
    assert!(summary.contains("ratio@0.5=") && summary.contains("ratio@5.0="));

    let o = locblur(
        &["eval", "--pred", "ds/blur", "--gt", "ds/sharp", "--flow", "flows", "--out", "rep.json"],
        root,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(root.join("rep.json")).unwrap()).unwrap();
    assert_eq!(rep["images"].as_array().unwrap().len(), 3);
    assert_eq!(rep["aggregate"]["averaging"], "per-image-then-average");
    assert!(rep["images"][0]["stratified"]["low_pixels"].is_u64());
    assert!(String::from_utf8_lossy(&o.stdout).contains("mean (3)"));

    let o = locblur(&["eval", "--pred", "ds/sharp", "--gt", "ds/sharp", "--out", "same.json"], root);
    assert_eq!(code(&o), 0);
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(root.join("same.json")).unwrap()).unwrap();
    assert_eq!(rep["aggregate"]["psnr"], "inf");
    assert_eq!(rep["aggregate"]["ssim"], 1.0);
}

#[test]
fn precedence_flags_over_env_over_file() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let (bg, obj) = inputs(root);
    let cfg = format!(
        r#"{{"sample_count": 1, "background_dir": "{}", "object_dir": "{}", "master_seed": 1, "output_dir": "from_file"}}"#,
        bg.display(),
        obj.display()
    );
    std::fs::write(root.join("cfg.json"), cfg).unwrap();
    let run = |extra_env: &[(&str, &str)], args: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_locblur"));
        c.arg("synth").arg("--config").arg("cfg.json").args(args).current_dir(root);
        for (k, v) in extra_env {
            c.env(k, v);
        }
        c.output().unwrap()
    };
    assert_eq!(code(&run(&[], &[])), 0);
    assert!(root.join("from_file/manifest.jsonl").is_file());

    assert_eq!(code(&run(&[("LOCBLUR_OUT", "from_env"), ("LOCBLUR_SEED", "2")], &[])), 0);
    let m = std::fs::read_to_string(root.join("from_env/config.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&m).unwrap();
    assert_eq!(v["master_seed"], 2);

    let o = run(&[("LOCBLUR_OUT", "from_env2"), ("LOCBLUR_SEED", "2")], &["--out", "from_flag", "--seed", "3"]);
    assert_eq!(code(&o), 0);
    assert!(!root.join("from_env2").exists());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(root.join("from_flag/config.json")).unwrap()).unwrap();
    assert_eq!(v["master_seed"], 3);
    assert!(v.get("output_dir").is_none());
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let o = locblur(&["synth", "--backgrounds", "nope", "--objects", "nope", "--out", "x"], root);
    assert_eq!(code(&o), 2);
    assert!(!root.join("x").exists());

    std::fs::write(root.join("bad.json"), r#"{"sample_count": "three"}"#).unwrap();
    assert_eq!(code(&locblur(&["synth", "--config", "bad.json"], root)), 2);
    assert_eq!(code(&locblur(&["synth", "--config", "missing.json"], root)), 2);
    assert_eq!(code(&locblur(&["stats", "--dataset", "nowhere"], root)), 2);
    assert_eq!(code(&locblur(&["eval", "--pred", "a", "--gt", "b"], root)), 2);
    assert_eq!(code(&locblur(&["bogus"], root)), 2);
}

#[test]
fn partial_failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::create_dir_all(root.join("p")).unwrap();
    std::fs::create_dir_all(root.join("g")).unwrap();
    let img = pattern(24, 24, 0);
    write_image(root.join("p/a.png"), &img).unwrap();
    write_image(root.join("g/a.png"), &img).unwrap();
    write_image(root.join("p/extra.png"), &img).unwrap();
    let o = locblur(&["eval", "--pred", "p", "--gt", "g", "--out", "r.json"], root);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("extra.png"));
    assert!(root.join("r.json").is_file());

    std::fs::write(root.join("pairs.txt"), "missing1.png missing2.png\n").unwrap();
    let o = locblur(&["stats", "--pairs", "pairs.txt", "--mode", "estimated"], root);
    assert_eq!(code(&o), 1);
}
