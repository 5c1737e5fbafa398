use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dzt-otfs"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).env_remove("DZT_OTFS_WORKERS").output().unwrap()
}

fn small_config(dir: &Path) -> PathBuf {
    let path = dir.join("small.toml");
    std::fs::write(
        &path,
        "[grid]\nK = 4\nL = 4\n\n[channel]\nP = 2\ntau_max_s = 3.3e-5\n\n\
         [run]\nmin_errors = 20\nmax_trials = 64\nbatch = 8\nsnr_grid_db = [0.0, 10.0]\n\n\
         [sweep]\nnu_max_hz = [500.0, 9000.0]\ntau_max_s = [1.0e-5, 3.3e-5]\nfixed_tau_max_s = 1.6e-5\n",
    )
    .unwrap();
    path
}

#[test]
fn ber_vs_snr_is_byte_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    let mut outputs = Vec::new();
    for (name, workers) in [("a.csv", "1"), ("b.csv", "1"), ("c.csv", "3")] {
        let out = run(
            &["ber-vs-snr", "--config", cfg, "--scheme", "all", "--seed", "7", "--workers", workers, "-o", name],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(std::fs::read(dir.path().join(name)).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scheme,axis_name,axis_value,snr_db,trials,bit_errors,ber,ci_halfwidth,seed,config_hash"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.contains(",7,")));

    let other = run(&["ber-vs-snr", "--config", cfg, "--seed", "8", "-o", "d.csv"], dir.path());
    assert!(other.status.success());
    assert_ne!(std::fs::read(dir.path().join("d.csv")).unwrap(), outputs[0]);
}

#[test]
fn worker_count_can_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    let a = run(&["ber-vs-doppler", "--config", cfg, "--scheme", "dzt", "-o", "a.csv"], dir.path());
    let b = bin()
        .args(["ber-vs-doppler", "--config", cfg, "--scheme", "dzt", "-o", "b.csv"])
        .current_dir(dir.path())
        .env("DZT_OTFS_WORKERS", "2")
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(
        std::fs::read(dir.path().join("a.csv")).unwrap(),
        std::fs::read(dir.path().join("b.csv")).unwrap()
    );
    // 9 kHz is past the unaliased Doppler range of a 4 x 4 grid.
    assert!(String::from_utf8_lossy(&a.stderr).contains("alias"));
}

#[test]
fn rank_profile_matches_the_first_table_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["rank-profile", "--system", "s1", "--profile", "A", "-o", "r.csv"], dir.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][..7], ["s1", "A", "false", "0", "32", "208", "1"]);
    assert_eq!(rows[1][..7], ["s1", "A", "true", "0", "0", "240", "2"]);

    let file = configs().join("profiles/b.toml");
    let out = run(
        &["rank-profile", "--system", "s1", "--profile", file.to_str().unwrap(), "--pr", "off", "-o", "b.csv"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("s1,b,false,0,0,240,2,"));
}

#[test]
fn verify_passes_and_bad_input_sets_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("ok")).count(), 6);

    let out = run(&["no-such-command"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error code=1 kind=usage"));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[pulse]\nrolloff = 1.5\n").unwrap();
    let out = run(&["verify", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("kind=validation field=pulse.rolloff"), "{stderr}");

    let out = run(&["verify", "--config", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["rank-profile", "--system", "s9"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn shipped_configs_load() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["reproduce.toml", "quick.toml", "fixed_profile.toml"] {
        let path = configs().join(name);
        let out = run(&["verify", "--config", path.to_str().unwrap()], dir.path());
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn plot_script_is_written_next_to_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = run(
        &[
            "rolloff-study",
            "--config",
            cfg.to_str().unwrap(),
            "--axis",
            "delay",
            "-o",
            "roll.csv",
            "--plot-script",
            "roll.py",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let script = std::fs::read_to_string(dir.path().join("roll.py")).unwrap();
    assert!(script.contains("\"roll.csv\"") && script.contains("matplotlib"));
    let csv = std::fs::read_to_string(dir.path().join("roll.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 2);
    assert!(csv.contains("dzt rolloff=0.9,tau_max_s,"));
}

#[test]
fn pep_bounds_and_bench_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("pep.toml");
    std::fs::write(&cfg, "[run]\nmin_errors = 10\nmax_trials = 100\n\n[diversity]\nsnr_grid_db = [0.0, 10.0]\n").unwrap();
    let out = run(
        &["pep-bounds", "--config", cfg.to_str().unwrap(), "--pr", "both", "-o", "pep.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("pep.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 2);
    for line in text.lines().skip(1) {
        let f: Vec<f64> = line.split(',').skip(3).take(8).map(|v| v.parse().unwrap()).collect();
        assert!(f[6] <= f[5], "lower bound above upper: {line}");
    }

    let out = run(&["bench-transforms", "--sizes", "8,16", "--repetitions", "3", "-o", "b.csv"], dir.path());
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(dir.path().join("b.csv")).unwrap().lines().count(), 3);
    let out = run(&["bench-transforms", "--sizes", "12"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
