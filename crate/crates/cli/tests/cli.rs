use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_chromaforge"));
    c.env_remove("CHROMAFORGE_THREADS").env_remove("RUST_LOG");
    c
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy")
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(dir: &Path, base: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(&p, base, out);
            } else {
                out.insert(p.strip_prefix(base).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn copy_dir(src: &Path, dst: &Path) {
    std::fs::create_dir_all(dst).unwrap();
    for e in std::fs::read_dir(src).unwrap() {
        let p = e.unwrap().path();
        let target = dst.join(p.file_name().unwrap());
        if p.is_dir() {
            copy_dir(&p, &target);
        } else {
            std::fs::copy(&p, &target).unwrap();
        }
    }
}

fn assert_code(o: &Output, code: i32) {
    assert_eq!(o.status.code(), Some(code), "stderr: {}", stderr(o));
    if code != 0 {
        assert!(stderr(o).starts_with(&format!("ERROR {code}: ")), "stderr: {}", stderr(o));
    }
}

#[test]
fn help_and_version_succeed_without_side_effects() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["--help"][..], &["--version"], &["generate", "--help"], &["amygdala", "--help"]] {
        let o = run(args, dir.path());
        assert_eq!(o.status.code(), Some(0));
        assert!(!o.stdout.is_empty());
    }
    assert!(String::from_utf8_lossy(&run(&["--version"], dir.path()).stdout).contains(env!("CARGO_PKG_VERSION")));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn bad_arguments_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(&run(&["frobnicate"], dir.path()), 2);
    assert_code(&run(&["ace", "only-one-path.png"], dir.path()), 2);
    assert_code(&run(&["amygdala", "--out", "x.csv"], dir.path()), 2);
    let o = bin().args(["stats", "."]).env("CHROMAFORGE_THREADS", "many").current_dir(dir.path()).output().unwrap();
    assert_code(&o, 2);
    assert!(stderr(&o).contains("CHROMAFORGE_THREADS"));
}

#[test]
fn ace_command() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture().join("captures/ball/high/0000.png");
    let out = dir.path().join("eq.png");
    let o = run(&["ace", input.to_str().unwrap(), out.to_str().unwrap(), "--samples", "64"], dir.path());
    assert_code(&o, 0);
    assert!(out.is_file());

    let o = run(&["ace", "nope/missing.png", "x.png"], dir.path());
    assert_code(&o, 3);
    assert!(stderr(&o).contains("nope/missing.png"));

    let o = run(&["ace", input.to_str().unwrap(), "y.png", "--samples", "4"], dir.path());
    assert_code(&o, 2);
    assert!(!dir.path().join("y.png").exists());

    std::fs::write(dir.path().join("junk.png"), b"not a png").unwrap();
    assert_code(&run(&["ace", "junk.png", "z.png"], dir.path()), 3);
}

#[test]
fn segment_command() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture().join("captures/block/low/0002.png");
    let o = run(&["segment", input.to_str().unwrap(), "mask.png", "--cutout", "cut.png", "--ace"], dir.path());
    assert_code(&o, 0);
    let line = String::from_utf8(o.stdout).unwrap();
    assert!(line.starts_with("bbox "), "{line}");
    assert!(dir.path().join("mask.png").is_file() && dir.path().join("cut.png").is_file());
    let o = run(&["segment", input.to_str().unwrap(), "m.png", "--hue-min", "90", "--hue-max", "80"], dir.path());
    assert_code(&o, 2);
}

#[test]
fn ingest_command() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture();
    let o = run(
        &[
            "ingest",
            f.join("captures").to_str().unwrap(),
            "--classes",
            f.join("classes.tsv").to_str().unwrap(),
            "--out",
            "crops",
            "--views",
            "6",
        ],
        dir.path(),
    );
    assert_code(&o, 0);
    let crops = dir.path().join("crops");
    assert_eq!(tree(&crops).keys().filter(|k| k.ends_with(".png")).count(), 24);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(crops.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["total_crops"], 24);
    assert!(report["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn generate_is_deterministic_and_guards_its_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture().join("config.json");
    let config = config.to_str().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));

    let o = run(&["generate", config, "--output", a.to_str().unwrap(), "--rounds", "3"], dir.path());
    assert_code(&o, 0);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("samples: 6"), "{stdout}");
    assert!(stdout.contains("manifest.json"));
    let first = tree(&a);
    assert_eq!(first.keys().filter(|k| k.starts_with("images/")).count(), 6);
    assert_eq!(first.keys().filter(|k| k.starts_with("labels/")).count(), 6);
    for name in ["obj.names", "obj.data", "train.txt", "manifest.json"] {
        assert!(first.contains_key(name), "{name}");
    }

    // an existing tree is only replaced with --force
    let o = run(&["generate", config, "--output", a.to_str().unwrap(), "--rounds", "3"], dir.path());
    assert_code(&o, 2);
    assert_eq!(tree(&a), first);

    let o = bin()
        .args(["generate", config, "--output", b.to_str().unwrap(), "--rounds", "3", "--threads", "3"])
        .output()
        .unwrap();
    assert_code(&o, 0);
    assert_eq!(tree(&b), first);

    let o = run(&["generate", config, "--output", a.to_str().unwrap(), "--rounds", "3", "--force"], dir.path());
    assert_code(&o, 0);
    assert_eq!(tree(&a), first);

    // --force never deletes something that is not a dataset
    let c = dir.path().join("c");
    std::fs::create_dir(&c).unwrap();
    std::fs::write(c.join("notes.txt"), "keep").unwrap();
    assert_code(&run(&["generate", config, "--output", c.to_str().unwrap(), "--force"], dir.path()), 2);
    assert_eq!(std::fs::read_to_string(c.join("notes.txt")).unwrap(), "keep");

    let o = run(&["stats", a.to_str().unwrap()], dir.path());
    assert_code(&o, 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("images: 6") && text.contains("boxes: 30"), "{text}");
}

#[test]
fn generate_rejects_bad_configs_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let fx = dir.path().join("fx");
    copy_dir(&fixture(), &fx);
    let cfg = fx.join("config.json");

    assert_code(&run(&["generate", "missing.json"], dir.path()), 3);

    std::fs::write(
        fx.join("layouts/attic.json"),
        r#"{"background_id": "attic", "anchors": [{"cx": 10, "cy": 10, "max_w": 5, "max_h": 5}]}"#,
    )
    .unwrap();
    let o = run(&["generate", cfg.to_str().unwrap()], dir.path());
    assert_code(&o, 2);
    assert!(stderr(&o).contains("attic"), "{}", stderr(&o));
    assert!(!fx.join("out").exists());
    std::fs::remove_file(fx.join("layouts/attic.json")).unwrap();

    let original: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cfg).unwrap()).unwrap();
    let write_with = |edit: &dyn Fn(&mut serde_json::Value)| {
        let mut v = original.clone();
        edit(&mut v);
        std::fs::write(&cfg, serde_json::to_string(&v).unwrap()).unwrap();
    };
    write_with(&|v| {
        v["generation"].as_object_mut().unwrap().remove("seed");
    });
    let o = run(&["generate", cfg.to_str().unwrap()], dir.path());
    assert_code(&o, 2);
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));
    assert!(!fx.join("out").exists());

    write_with(&|v| v["generation"]["rounds"] = 0.into());
    assert_code(&run(&["generate", cfg.to_str().unwrap()], dir.path()), 2);
    write_with(&|v| v["captures"] = "nowhere".into());
    assert_code(&run(&["generate", cfg.to_str().unwrap()], dir.path()), 2);
    write_with(&|v| v["ace"] = serde_json::json!({"samples": 3}));
    assert_code(&run(&["generate", cfg.to_str().unwrap()], dir.path()), 2);
    assert!(!fx.join("out").exists());
}

#[test]
fn amygdala_command() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let o = run(&["amygdala", "--two-situation", "--seed", "7", "--out", name], dir.path());
        assert_code(&o, 0);
        assert!(String::from_utf8(o.stdout).unwrap().starts_with("final estimate: object A"));
    }
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read_to_string(dir.path().join("b.csv")).unwrap());
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "step,P(obj0),P(obj1)");
    assert_eq!(lines.len(), 11);
    for (k, line) in lines[1..].iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], (k + 1).to_string());
        let sum: f64 = fields[1..].iter().map(|v| v.parse::<f64>().unwrap()).sum();
        assert!((sum - 1.0).abs() <= 1e-6);
    }

    let o = run(&["amygdala", "--two-situation", "--out", "c.csv", "--checkpoint", "model.json"], dir.path());
    assert_code(&o, 0);
    let schedule = r#"{"objects": ["object A", "object B"],
        "steps": [{"face": [1,0,0,0,0,0,0,0], "place": [0.2, 0.3], "hour": 9, "object": 0}]}"#;
    std::fs::write(dir.path().join("s.json"), schedule).unwrap();
    let o = run(&["amygdala", "s.json", "--resume", "model.json", "--out", "d.csv"], dir.path());
    assert_code(&o, 0);
    let d = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    let p_a: f64 = d.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(p_a < 0.5, "resumed model should remember the B training: {d}");

    std::fs::write(dir.path().join("bad.json"), r#"{"objects": ["x"], "steps": []}"#).unwrap();
    assert_code(&run(&["amygdala", "bad.json", "--out", "e.csv"], dir.path()), 2);
    assert!(!dir.path().join("e.csv").exists());
    assert_code(&run(&["amygdala", "none.json", "--out", "e.csv"], dir.path()), 3);
}
