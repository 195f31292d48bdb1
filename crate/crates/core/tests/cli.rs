use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn oaktd(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oaktd"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env("OAKTD_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], out: &Path) -> String {
    let o = oaktd(args, out);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn train_is_byte_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = [
        "train",
        "--env",
        "puddle-world",
        "--algo",
        "oaktd",
        "--seeds",
        "0..2",
        "--steps",
        "3000",
        "--eval-every",
        "1000",
    ];
    let out_a = ok(&args, a.path());
    let out_b = ok(&args, b.path());
    assert_eq!(out_a, out_b);
    let (fa, fb) = (csv_files(a.path()), csv_files(b.path()));
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["dictionary.csv", "learning_curve.csv", "runs.csv"]);
    assert_eq!(fa, fb);

    let lines: Vec<&str> = out_a.lines().collect();
    assert_eq!(lines.len(), 3);
    for (i, l) in lines.iter().enumerate() {
        assert!(
            l.starts_with(&format!("oaktd puddle-world seed={i} ")),
            "{l}"
        );
    }
    let curve = fs::read_to_string(a.path().join("learning_curve.csv")).unwrap();
    assert!(curve.starts_with("algo,env,seed,step,mean_return,std_return\n"));
    assert_eq!(curve.lines().count(), 1 + 3 * 3);
    assert!(a
        .path()
        .join("models/oaktd_puddle-world_seed1.json")
        .exists());
    let config = fs::read_to_string(a.path().join("config.txt")).unwrap();
    assert!(config.contains("total_steps = 3000"));
}

#[test]
fn precedence_of_file_set_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(
        &cfg,
        "env = acrobot\nmu1 = 0.5\ntotal_steps = 50\neval_every = 25\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    ok(
        &[
            "train", "--config", cfg, "--set", "mu1=0.4", "--steps", "100",
        ],
        dir.path(),
    );
    let text = fs::read_to_string(dir.path().join("config.txt")).unwrap();
    assert!(text.contains("env = acrobot\n"));
    assert!(text.contains("mu1 = 0.4\n"));
    assert!(text.contains("total_steps = 100\n"));
    assert!(text.contains("eval_every = 25\n"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = oaktd(
        &["train", "--env", "mountain-car", "--set", "learning_rate=3"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("learning_rate") && err.contains("mu1"),
        "{err}"
    );

    let o = oaktd(&["train", "--algo", "oaktd"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("env"));

    let o = oaktd(
        &[
            "train",
            "--env",
            "mountain-car",
            "--algo",
            "tile-td",
            "--set",
            "tiles=250",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dict_stats_from_recorded_runs() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &[
            "train", "--env", "acrobot", "--seeds", "0..1", "--steps", "2000",
        ],
        dir.path(),
    );
    let text = ok(&["dict-stats", "--env", "acrobot"], dir.path());
    assert!(text.starts_with("acrobot: runs=2 "), "{text}");
    let stats = fs::read_to_string(dir.path().join("dict_stats.csv")).unwrap();
    assert!(stats.starts_with("env,runs,size_mean,size_std,conv_pct_mean,conv_pct_std\nacrobot,2,"));

    let o = oaktd(
        &["dict-stats", "--env", "acrobot"],
        tempfile::tempdir().unwrap().path(),
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn probes_reuse_trained_models() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["--env", "mountain-car", "--seeds", "3", "--steps", "5000"];
    let with = |cmd: &'static str| {
        let mut v = vec![cmd];
        v.extend(common);
        v
    };
    ok(&with("train"), dir.path());
    let model = dir.path().join("models/oaktd_mountain-car_seed3.json");
    let before = fs::read(&model).unwrap();

    ok(&with("dump-attention"), dir.path());
    let att = fs::read_to_string(dir.path().join("attention.csv")).unwrap();
    let rows: Vec<&str> = att.lines().skip(1).collect();
    assert_eq!(att.lines().next(), Some("state_index,dict_index,weight"));
    let per_state = rows.len() / 3;
    assert_eq!(rows.len(), 3 * per_state);
    for s in 0..3 {
        let total: f64 = rows[s * per_state..(s + 1) * per_state]
            .iter()
            .map(|r| r.rsplit(',').next().unwrap().parse::<f64>().unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    let mut custom = with("dump-attention");
    custom.extend(["--w", "-0.13,-0.04", "--states", "0.1,0.01"]);
    ok(&custom, dir.path());
    let att = fs::read_to_string(dir.path().join("attention.csv")).unwrap();
    assert_eq!(att.lines().count(), 1 + per_state);

    let mut probe = with("probe-interference");
    probe.extend(["--pairs", "200"]);
    ok(&probe, dir.path());
    let inter = fs::read_to_string(dir.path().join("interference.csv")).unwrap();
    assert_eq!(inter.lines().count(), 201);

    let mut eval = with("eval");
    eval.extend(["--episodes", "2", "--cap", "300"]);
    let text = ok(&eval, dir.path());
    assert!(text.starts_with("oaktd mountain-car seed=3 return="));

    let mut grid = with("grid-eval");
    grid.extend(["--cap", "50"]);
    ok(&grid, dir.path());
    let cells = fs::read_to_string(dir.path().join("grid_eval.csv")).unwrap();
    assert_eq!(cells.lines().count(), 1 + 171 * 141);
    assert_eq!(cells.lines().next(), Some("position,velocity,return"));

    assert_eq!(
        fs::read(&model).unwrap(),
        before,
        "probes must not retrain a matching model"
    );
}

#[test]
fn sweep_covers_every_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &[
            "sweep", "--env", "cartpole", "--seeds", "0", "--steps", "2000",
        ],
        dir.path(),
    );
    let curve = fs::read_to_string(dir.path().join("learning_curve.csv")).unwrap();
    for algo in ["oaktd", "oktd", "osktd", "tile-td"] {
        assert!(
            curve.contains(&format!("\n{algo},cartpole,0,")),
            "{algo} missing"
        );
    }
    assert!(dir.path().join("dict_stats.csv").exists());
}
