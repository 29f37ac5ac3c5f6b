use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sqvae(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqvae")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = sqvae(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn param_count_rows() {
    let s = ok(&["param-count", "--variant", "fbq-ae"]);
    assert!(s.contains("fbq-ae\t108\t0\t108"), "{s}");
    let s = ok(&["param-count", "--variant", "fbq-vae"]);
    assert!(s.contains("fbq-vae\t108\t84\t192"), "{s}");
    let s = ok(&["param-count", "--variant", "sq-ae", "--feature-dim", "1024", "--patches", "4", "--layers", "5"]);
    assert!(s.contains("sq-ae\t960\t"), "{s}");
}

#[test]
fn unknown_variant_is_usage_error() {
    let out = sqvae(&["param-count", "--variant", "gan"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown variant"));
}

#[test]
fn seed_is_mandatory() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["train", "--variant", "sq-ae", "--out", p(dir.path())],
        vec!["synth", "--kind", "qm9", "--out", "x.txt"],
        vec!["sample", "--checkpoint", "x.bin"],
    ] {
        let out = sqvae(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("--seed is required"), "{args:?}");
    }
}

#[test]
fn train_sample_reconstruct_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("mols.txt");
    ok(&["synth", "--kind", "qm9", "--count", "24", "--seed", "3", "--out", p(&data)]);
    assert!(fs::read_to_string(&data).unwrap().starts_with("dim=64 style=qm9\n"));

    let run = dir.path().join("run");
    let s = ok(&[
        "train", "--variant", "sq-vae", "--patches", "4", "--epochs", "2", "--batch-size", "8", "--seed", "1",
        "--data", p(&data), "--out", p(&run),
    ]);
    assert!(s.contains("sq-vae: quantum"));
    let csv = fs::read_to_string(run.join("metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);

    let ck = run.join("checkpoint.bin");
    let samples = dir.path().join("samples.txt");
    ok(&["sample", "--checkpoint", p(&ck), "--count", "7", "--seed", "2", "--out", p(&samples)]);
    let d = sqvae::moldata::read_dataset(&samples).unwrap();
    assert_eq!(d.len(), 7);

    let rec = dir.path().join("rec");
    ok(&["reconstruct", "--checkpoint", p(&ck), "--k", "3", "--seed", "5", "--out", p(&rec)]);
    assert_eq!(fs::read_to_string(rec.join("reconstruct_mse.csv")).unwrap().lines().count(), 4);
}

#[test]
fn fbq_needs_l1_flag() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["train", "--variant", "fbq-ae", "--epochs", "1", "--synth-count", "16", "--seed", "1", "--out", p(dir.path())];
    let out = sqvae(&base);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("contract violated"));
    let mut with = base.to_vec();
    with.push("--l1-normalize");
    ok(&with);
}

#[test]
fn config_file_keys_are_flag_names_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("from-file");
    fs::write(
        &cfg,
        format!("preset = \"sq-mini\"\nseed = 4\nepochs = 5\nsynth-count = 12\nbatch-size = 6\nout = {:?}\n", p(&out)),
    )
    .unwrap();
    ok(&["train", "--config", p(&cfg), "--epochs", "1"]);
    let csv = fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    fs::write(&cfg, "seed = 4\nvariant = \"sq-ae\"\nnot-a-flag = 1\n").unwrap();
    assert_eq!(sqvae(&["train", "--config", p(&cfg)]).status.code(), Some(2));
}

#[test]
fn resume_continues_to_total_epochs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let common = ["--variant", "classical-vae", "--synth-count", "16", "--batch-size", "4", "--seed", "8"];
    let mut full = vec!["train", "--epochs", "2", "--out", p(&a)];
    full.extend(common);
    ok(&full);
    let mut half = vec!["train", "--epochs", "1", "--out", p(&b)];
    half.extend(common);
    ok(&half);
    let ck = b.join("checkpoint.bin");
    ok(&["train", "--resume", p(&ck), "--epochs", "2", "--out", p(&b)]);
    assert_eq!(fs::read(a.join("metrics.csv")).unwrap(), fs::read(b.join("metrics.csv")).unwrap());
}

#[test]
fn ablation_commands_write_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["--preset", "sq-mini", "--synth-count", "12", "--epochs", "2", "--batch-size", "6", "--seed", "2"];
    let mut depth = vec!["ablate-depth", "--depths", "1,3,5", "--out", p(dir.path())];
    depth.extend(common);
    ok(&depth);
    assert_eq!(fs::read_to_string(dir.path().join("ablate_depth.csv")).unwrap().lines().count(), 13);

    let mut lr = vec!["ablate-lr", "--classical-rates", "0.01,0.03", "--quantum-rates", "0.01,0.03", "--out", p(dir.path())];
    lr.extend(common);
    ok(&lr);
    assert_eq!(fs::read_to_string(dir.path().join("ablate_lr.csv")).unwrap().lines().count(), 5);
}
