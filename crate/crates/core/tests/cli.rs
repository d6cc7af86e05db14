//! End-to-end runs of the `msfusion` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use msfusion::config::{Config, KEYS};
use msfusion::eval::{natural_texture, simulate_pair, Modality};
use msfusion::raster::{read_image, write_gray, write_image, AnyImage, BitDepth, ColorImage, GrayImage};
use msfusion::registration::{read_transform, write_transform_json, TransformRecord};
use msfusion::transform::AffineTransform;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn msfusion(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_msfusion"));
    for a in args {
        cmd.arg(a);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn gray_file(dir: &Path, name: &str, img: &GrayImage) -> PathBuf {
    let p = dir.join(name);
    write_gray(&p, img, BitDepth::Sixteen).unwrap();
    p
}

fn transform_file(dir: &Path, name: &str, t: &AffineTransform) -> PathBuf {
    let p = dir.join(name);
    write_transform_json(&p, &TransformRecord::from_transform(t)).unwrap();
    p
}

fn dir_names(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}

#[test]
fn help_lists_every_key_with_default() {
    let o = msfusion(&[&"--help"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let defaults = Config::default();
    for (key, _) in KEYS {
        let line = text.lines().find(|l| l.trim_start().starts_with(key)).unwrap_or_else(|| panic!("{key} missing"));
        assert!(line.contains(&format!("[default: {}]", defaults.get(key).unwrap())), "{line}");
    }
    for sub in ["register", "warp", "fuse", "eval"] {
        assert!(text.contains(sub));
    }
    assert_eq!(code(&msfusion(&[&"register", &"--help"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&msfusion(&[])), 1);
    assert_eq!(code(&msfusion(&[&"frobnicate"])), 1);
    assert_eq!(code(&msfusion(&[&"register", &"only-one.png"])), 1);
}

#[test]
fn register_same_file_is_identity() {
    let dir = TempDir::new().unwrap();
    let img = gray_file(dir.path(), "a.png", &natural_texture(160, 140, 1));
    let out = dir.path().join("t.json");
    let o = msfusion(&[&"register", &img, &img, &"-o", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("iteration 3"));
    let t = read_transform(&out).unwrap();
    assert!(t.max_abs_diff(&AffineTransform::identity()) < 1e-9);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(json["model"], "translation");
    assert!(json["support"].as_u64().unwrap() > 0);
}

#[test]
fn register_missing_file_names_path() {
    let dir = TempDir::new().unwrap();
    let img = gray_file(dir.path(), "a.png", &natural_texture(100, 100, 1));
    let missing = dir.path().join("nope.png");
    let out = dir.path().join("t.json");
    let o = msfusion(&[&"register", &img, &missing, &"-o", &out]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("nope.png"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn register_recovers_planted_shift_across_inversion() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let base = natural_texture(320, 300, 3);
    let pair = simulate_pair(&base, &AffineTransform::translation(7.0, -3.0), Modality::Invert, 0.0, &mut rng).unwrap();
    let v = gray_file(dir.path(), "v.png", &pair.img_v);
    let ir = gray_file(dir.path(), "ir.pgm", &pair.img_ir);
    let out = dir.path().join("t.json");
    let o = msfusion(&[&"register", &v, &ir, &"-o", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = read_transform(&out).unwrap();
    assert!((t.tx() - pair.t_true.tx()).hypot(t.ty() - pair.t_true.ty()) <= 1.0, "{t:?}");

    let txt = dir.path().join("t.txt");
    assert_eq!(code(&msfusion(&[&"register", &v, &ir, &"-o", &txt])), 0);
    assert_eq!(read_transform(&txt).unwrap().matrix(), t.matrix());
}

#[test]
fn register_failure_exits_two_without_output() {
    let dir = TempDir::new().unwrap();
    let flat = gray_file(dir.path(), "flat.png", &GrayImage::filled(128, 128, 0.5));
    let out = dir.path().join("t.json");
    let before = dir_names(dir.path());
    let o = msfusion(&[&"register", &flat, &flat, &"-o", &out]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert_eq!(dir_names(dir.path()), before);
}

#[test]
fn config_errors_name_the_key() {
    let dir = TempDir::new().unwrap();
    let img = gray_file(dir.path(), "a.png", &natural_texture(160, 160, 1));
    let out = dir.path().join("t.json");
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "# tuned\nharris.k = 0.04\nransac.rd2 = 7\n").unwrap();
    let o = msfusion(&[&"register", &img, &img, &"-o", &out, &"--config", &cfg]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("ransac.rd2"), "{}", stderr(&o));

    // The override wins over the file and fixes the value.
    let o = msfusion(&[&"register", &img, &img, &"-o", &out, &"--config", &cfg, &"--set", &"ransac.rd2=2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let o = msfusion(&[&"register", &img, &img, &"-o", &out, &"--set", &"canny.colour=3"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("canny.colour"));
}

#[test]
fn warp_identity_and_integer_shift() {
    let dir = TempDir::new().unwrap();
    let src = natural_texture(90, 70, 4);
    let input = gray_file(dir.path(), "in.png", &src);
    let decoded = read_image(&input).unwrap().to_gray();

    let id = transform_file(dir.path(), "id.json", &AffineTransform::identity());
    let out = dir.path().join("id.png");
    let o = msfusion(&[&"warp", &input, &id, &"-o", &out, &"--depth", &"16"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(read_image(&out).unwrap().to_gray(), decoded);

    let shift = dir.path().join("shift.txt");
    std::fs::write(&shift, "1 0 3\n0 1 4\n").unwrap();
    let out = dir.path().join("shift.png");
    assert_eq!(code(&msfusion(&[&"warp", &input, &shift, &"-o", &out, &"--depth", &"16"])), 0);
    let w = read_image(&out).unwrap().to_gray();
    for y in 0..70 {
        for x in 0..90 {
            let expect = if x >= 3 && y >= 4 { decoded.get(x - 3, y - 4) } else { 0.0 };
            assert_eq!(w.get(x, y), expect, "({x}, {y})");
        }
    }
}

#[test]
fn warp_round_trip_and_colour() {
    let dir = TempDir::new().unwrap();
    // Double bilinear resampling only meets the bound on band-limited content.
    let wave = |fx: f32, fy: f32, phase: f32| {
        GrayImage::from_fn(120, 100, move |x, y| {
            let (x, y) = (x as f32, y as f32);
            0.5 + 0.25 * (x * fx + phase).sin() * (y * fy).cos() + 0.2 * ((x + 2.0 * y) * 0.05).sin()
        })
    };
    let src = ColorImage::from_planes(wave(0.21, 0.17, 0.0), wave(0.15, 0.2, 1.0), wave(0.18, 0.12, 2.0)).unwrap();
    let input = dir.path().join("in.ppm");
    write_image(&input, &AnyImage::Color(src.clone()), BitDepth::Sixteen).unwrap();
    let t = AffineTransform::similarity(1.02, 0.03, 2.5, -1.75);
    let fwd = transform_file(dir.path(), "fwd.json", &t);
    let inv = transform_file(dir.path(), "inv.json", &t.inverse().unwrap());
    let (mid, back) = (dir.path().join("mid.ppm"), dir.path().join("back.ppm"));
    assert_eq!(code(&msfusion(&[&"warp", &input, &fwd, &"-o", &mid, &"--depth", &"16"])), 0);
    assert_eq!(code(&msfusion(&[&"warp", &mid, &inv, &"-o", &back, &"--depth", &"16"])), 0);
    let back = read_image(&back).unwrap().to_color();
    let mut worst = 0.0f32;
    for y in 15..85 {
        for x in 15..105 {
            for c in 0..3 {
                worst = worst.max((back.pixel(x, y)[c] - src.pixel(x, y)[c]).abs());
            }
        }
    }
    assert!(worst <= 2e-2, "{worst}");
}

#[test]
fn warp_singular_exits_two() {
    let dir = TempDir::new().unwrap();
    let input = gray_file(dir.path(), "in.png", &natural_texture(40, 40, 6));
    let t = dir.path().join("bad.txt");
    std::fs::write(&t, "1 2 0\n2 4 0\n").unwrap();
    let out = dir.path().join("out.png");
    let o = msfusion(&[&"warp", &input, &t, &"-o", &out]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn fuse_self_fusion_and_scale_dump() {
    let dir = TempDir::new().unwrap();
    let g = natural_texture(96, 80, 7);
    let v = dir.path().join("v.ppm");
    write_image(&v, &AnyImage::Color(ColorImage::from_gray(&g)), BitDepth::Sixteen).unwrap();
    let ir = gray_file(dir.path(), "ir.pgm", &g);
    let (fg, fc, scales) = (dir.path().join("f.png"), dir.path().join("fc.png"), dir.path().join("scales"));
    let o = msfusion(&[
        &"fuse", &v, &ir, &"--gray", &fg, &"--color", &fc, &"--set", &"fusion.gain=1", &"--dump-scales", &scales,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let f = read_image(&fg).unwrap().to_gray();
    assert!(f.max_abs_diff(&g).unwrap() <= 2e-2);
    assert!(matches!(read_image(&fc).unwrap(), AnyImage::Color(_)));
    assert_eq!(dir_names(&scales).len(), 3);
}

#[test]
fn fuse_constants_blend_to_half() {
    let dir = TempDir::new().unwrap();
    let v = gray_file(dir.path(), "v.png", &GrayImage::filled(40, 30, 0.2));
    let ir = gray_file(dir.path(), "ir.png", &GrayImage::filled(40, 30, 0.8));
    let (fg, fc) = (dir.path().join("f.pgm"), dir.path().join("fc.ppm"));
    assert_eq!(code(&msfusion(&[&"fuse", &v, &ir, &"--gray", &fg, &"--color", &fc, &"--depth", &"16"])), 0);
    let f = read_image(&fg).unwrap().to_gray();
    assert!(f.data().iter().all(|&x| (x - 0.5).abs() < 1e-4));
}

#[test]
fn fuse_size_mismatch_reports_both_sizes() {
    let dir = TempDir::new().unwrap();
    let v = gray_file(dir.path(), "v.png", &GrayImage::filled(40, 30, 0.2));
    let ir = gray_file(dir.path(), "ir.png", &GrayImage::filled(41, 30, 0.8));
    let (fg, fc) = (dir.path().join("f.png"), dir.path().join("fc.png"));
    let o = msfusion(&[&"fuse", &v, &ir, &"--gray", &fg, &"--color", &fc]);
    assert_eq!(code(&o), 1);
    let e = stderr(&o);
    assert!(e.contains("40x30") && e.contains("41x30"), "{e}");
    assert!(!fg.exists() && !fc.exists());
}

fn dataset(dir: &Path, n: u64, side: usize) -> PathBuf {
    let d = dir.join("data");
    std::fs::create_dir(&d).unwrap();
    for i in 0..n {
        gray_file(&d, &format!("b{i}.png"), &natural_texture(side, side, 40 + i));
    }
    d
}

#[test]
fn eval_with_oracle_registrar_reports_zero() {
    let dir = TempDir::new().unwrap();
    let data = dataset(dir.path(), 1, 128);
    let out = dir.path().join("r.csv");
    let o = msfusion(&[&"eval", &data, &"-o", &out, &"--set", &"eval.registrar=oracle", &"--set", &"sim.trials=4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("mean error 0.0000 px"), "{}", stdout(&o));
}

#[test]
fn eval_twenty_trials_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let data = dataset(dir.path(), 2, 224);
    let cfg = dir.path().join("spec.cfg");
    std::fs::write(&cfg, "sim.modality = invert\nsim.trials = 20\nsim.seed = 9\n").unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let o = msfusion(&[&"eval", &data, &"-o", out, &"--config", &cfg]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 21);
    assert!(!text.contains('\r'));
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
}

#[test]
fn eval_empty_dataset_exits_one() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let out = dir.path().join("r.csv");
    let o = msfusion(&[&"eval", &empty, &"-o", &out]);
    assert_eq!(code(&o), 1);
    assert!(!out.exists());
}
