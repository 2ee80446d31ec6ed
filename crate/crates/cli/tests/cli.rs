//! Exit codes, outputs and option handling of the `amfm` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use amfm_core::detect::{KnnModel, Label};
use amfm_core::pnm::{save_pgm, save_ppm};
use amfm_core::{Plane, RgbImage};

fn amfm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amfm"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A blank frame, a skin-free model and a training block in `dir`.
fn fixtures(dir: &Path) {
    let frame: RgbImage = Plane::filled(240, 220, [128, 128, 128]);
    save_ppm(&frame, dir.join("blank.ppm")).unwrap();
    let model = KnnModel::new(1, 60, 60, vec![(Label::NonFace, vec![0; 3600])]).unwrap();
    model.save(dir.join("model.knn")).unwrap();
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    for args in [
        vec!["frobnicate"],
        vec!["detect", "blank.ppm"],
        vec![
            "--classifier",
            "coin",
            "detect",
            "blank.ppm",
            "--model",
            "model.knn",
            "--json",
            "-",
        ],
        vec!["--block-size", "0", "bench"],
        vec!["demod", "blank.ppm"],
        vec!["demod", "blank.ppm", "--out-fm", "fm.pgm", "--scale", "7"],
    ] {
        let out = amfm(dir.path(), &args);
        assert_eq!(code(&out), 1, "{args:?}: {}", stderr(&out));
    }
    assert_eq!(code(&amfm(dir.path(), &["--help"])), 0);
}

#[test]
fn io_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let out = amfm(
        dir.path(),
        &["detect", "missing.ppm", "--model", "model.knn", "--json", "-"],
    );
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("missing.ppm"));
    fs::write(dir.path().join("broken.ppm"), b"P6\n4 4\n255\nxx").unwrap();
    let out = amfm(dir.path(), &["demod", "broken.ppm", "--out-fm", "fm.pgm"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let out = amfm(dir.path(), &["--config", "nope.cfg", "bench"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn model_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let out = amfm(
        dir.path(),
        &["detect", "blank.ppm", "--model", "absent.knn", "--json", "-"],
    );
    assert_eq!(code(&out), 3);
    fs::write(dir.path().join("bad.knn"), "not a model\n").unwrap();
    let out = amfm(
        dir.path(),
        &["detect", "blank.ppm", "--model", "bad.knn", "--json", "-"],
    );
    assert_eq!(code(&out), 3);
    fs::write(dir.path().join("train.csv"), "block.pgm,face\n").unwrap();
    let out = amfm(dir.path(), &["train-knn", "train.csv", "--out", "m.knn"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("row 1"));
}

#[test]
fn all_frames_abstaining_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let frames = dir.path().join("frames");
    fs::create_dir(&frames).unwrap();
    for name in ["a.ppm", "b.ppm"] {
        save_ppm(&Plane::filled(30, 30, [90, 90, 90]), frames.join(name)).unwrap();
    }
    let out = amfm(
        dir.path(),
        &["detect", "frames", "--model", "model.knn", "--json", "out.jsonl"],
    );
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("out.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 2);

    // one usable frame is enough for success
    fs::copy(dir.path().join("blank.ppm"), frames.join("c.ppm")).unwrap();
    let out = amfm(
        dir.path(),
        &["detect", "frames", "--model", "model.knn", "--json", "out.jsonl"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn blank_frame_reports_nothing() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let out = amfm(
        dir.path(),
        &["detect", "blank.ppm", "--model", "model.knn", "--json", "-"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "{\"frame\":\"blank.ppm\",\"detections\":[]}\n"
    );
}

#[test]
fn demod_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let img = Plane::from_fn(96, 80, |x, y| ((x * 7 + y * 3) % 23) as f64 * 11.0);
    save_pgm(&img, dir.path().join("in.pgm")).unwrap();
    for run in ["1", "2"] {
        let out = amfm(
            dir.path(),
            &[
                "--threads",
                run,
                "demod",
                "in.pgm",
                "--out-am",
                &format!("am{run}.pgm"),
                "--out-fm",
                &format!("fm{run}.pgm"),
            ],
        );
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let read = |n: &str| fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("am1.pgm"), read("am2.pgm"));
    assert_eq!(read("fm1.pgm"), read("fm2.pgm"));
    assert!(read("fm1.pgm").starts_with(b"P5\n96 80\n255\n"));

    let out = amfm(
        dir.path(),
        &["demod", "in.pgm", "--scale", "3", "--dump-channels", "ch"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut names: Vec<_> = fs::read_dir(dir.path().join("ch"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["ch52_ia.pgm", "ch52_ip.pgm", "ch53_ia.pgm", "ch53_ip.pgm"]
    );
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let detect = ["detect", "blank.ppm", "--model", "model.knn", "--json", "-"];
    fs::write(dir.path().join("empty.cfg"), "# defaults only\n").unwrap();
    let plain = amfm(dir.path(), &detect);
    let mut args = vec!["--config", "empty.cfg"];
    args.extend(detect);
    let with_empty = amfm(dir.path(), &args);
    assert_eq!(code(&with_empty), 0);
    assert_eq!(plain.stdout, with_empty.stdout);

    // the 60x60 model no longer matches a 40 px block size
    fs::write(dir.path().join("small.cfg"), "block-size = 40\n").unwrap();
    let mut args = vec!["--config", "small.cfg"];
    args.extend(detect);
    assert_eq!(code(&amfm(dir.path(), &args)), 3);
    let mut args = vec!["--config", "small.cfg", "--block-size", "60"];
    args.extend(detect);
    assert_eq!(code(&amfm(dir.path(), &args)), 0);

    fs::write(dir.path().join("typo.cfg"), "blok-size = 40\n").unwrap();
    let mut args = vec!["--config", "typo.cfg"];
    args.extend(detect);
    assert_eq!(code(&amfm(dir.path(), &args)), 1);
}

#[test]
fn trained_model_is_usable_by_detect() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    fs::create_dir(dir.path().join("blocks")).unwrap();
    let mut manifest = String::new();
    for (i, v) in [20.0, 120.0, 220.0].into_iter().enumerate() {
        save_pgm(
            &Plane::filled(60, 60, v),
            dir.path().join(format!("blocks/{i}.pgm")),
        )
        .unwrap();
        manifest.push_str(&format!(
            "blocks/{i}.pgm,{}\n",
            if i == 1 { "face" } else { "nonface" }
        ));
    }
    fs::write(dir.path().join("train.csv"), manifest).unwrap();
    let out = amfm(
        dir.path(),
        &["train-knn", "train.csv", "--out", "trained.knn", "--k", "1"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let model = KnnModel::load(dir.path().join("trained.knn")).unwrap();
    assert_eq!((model.k(), model.len(), model.block_dims()), (1, 3, (60, 60)));
    assert_eq!(model.classify(&[118; 3600]).unwrap().label, Label::Face);

    let out = amfm(
        dir.path(),
        &["train-knn", "train.csv", "--out", "even.knn", "--k", "2"],
    );
    assert_ne!(code(&out), 0);
}

#[test]
fn overlays_are_written_per_frame() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let out = amfm(
        dir.path(),
        &[
            "detect",
            "blank.ppm",
            "--model",
            "model.knn",
            "--json",
            "out.jsonl",
            "--overlay-dir",
            "ov",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let overlay = fs::read(dir.path().join("ov/blank.ppm")).unwrap();
    assert_eq!(overlay, fs::read(dir.path().join("blank.ppm")).unwrap());
}
