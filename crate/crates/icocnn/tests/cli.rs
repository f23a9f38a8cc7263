use std::path::Path;
use std::process::{Command, Output};

use icocnn::format::{load_sphere, save_sphere};
use icocnn_core::SphereTensor;
use serde_json::Value;

fn icocnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_icocnn")).args(args).env_remove("ICO_CACHE_DIR").output().unwrap()
}

fn ok(args: &[&str]) -> Value {
    let out = icocnn(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn mesh_info_reports_counts() {
    let v = ok(&["mesh", "info", "--level", "8"]);
    assert_eq!(v["vertices"], 655_362);
    assert_eq!(v["faces"], 1_310_720);
    assert_eq!(v["edges"], 1_966_080);
    assert_eq!(v["component_shape"], serde_json::json!([512, 256]));
}

#[test]
fn bad_level_fails_with_message() {
    let out = icocnn(&["mesh", "info", "--level", "40"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("level 40"));
}

#[test]
fn mesh_exports() {
    let dir = tempfile::tempdir().unwrap();
    let alpha = dir.path().join("a.ten");
    let v = ok(&["mesh", "alpha", "--level", "3", "--out", s(&alpha)]);
    assert!(v["min"].as_f64().unwrap() > 0.0 && v["max"].as_f64().unwrap() < 1.0);
    assert_eq!(icocnn::format::load_alpha(&alpha).unwrap().level(), 3);
    let dump = dir.path().join("m.icom");
    assert_eq!(ok(&["mesh", "dump", "--level", "2", "--out", s(&dump)])["vertices"], 162);
    assert_eq!(icocnn::format::MeshDump::load(&dump).unwrap().level, 2);
}

#[test]
fn net_params() {
    assert_eq!(ok(&["net", "params", "--arch", "hexrunet-c"])["params"], 74_730);
    let v = ok(&["net", "params", "--arch", "hexrunet", "--base", "8", "--in-ch", "16", "--out-ch", "3"]);
    assert_eq!(v["params"], 476_747);
    let v = ok(&["net", "params", "--arch", "hexunet", "--audit"]);
    assert_eq!(v["params_dense_masks"], 7_245_101);
    let rows = v["layers"].as_array().unwrap();
    let sum: u64 = rows.iter().map(|r| r["params"].as_u64().unwrap()).sum();
    assert_eq!(Some(sum), v["params"].as_u64());
    assert!(!icocnn(&["net", "params", "--arch", "hexrunet-c", "--in-ch", "3"]).status.success());
}

#[test]
fn init_forward_and_visualise() {
    let dir = tempfile::tempdir().unwrap();
    let weights = dir.path().join("w");
    ok(&[
        "net",
        "init",
        "--arch",
        "hexunet",
        "--in-ch",
        "3",
        "--out-ch",
        "5",
        "--level",
        "4",
        "--seed",
        "1",
        "--out",
        s(&weights),
    ]);
    let input = dir.path().join("x.sph");
    save_sphere(&input, &SphereTensor::from_fn(4, 3, |k, c, r, col| ((k + c + r + col) % 7) as f32 / 7.0)).unwrap();
    let out = dir.path().join("y.sph");
    let v = ok(&[
        "net",
        "forward",
        "--arch",
        "hexunet",
        "--in-ch",
        "3",
        "--out-ch",
        "5",
        "--level",
        "4",
        "--weights",
        s(&weights),
        "--input",
        s(&input),
        "--out",
        s(&out),
    ]);
    assert_eq!(v["channels"], 5);
    let y = load_sphere(&out).unwrap();
    assert_eq!((y.level(), y.channels()), (4, 5));
    assert!(y.all_finite());

    let ppm = dir.path().join("y.ppm");
    let v = ok(&["viz", "unfold", "--input", s(&out), "--out", s(&ppm), "--argmax"]);
    assert_eq!((v["width"].as_u64(), v["height"].as_u64()), (Some(80), Some(32)));
    ok(&["viz", "unfold", "--input", s(&out), "--out", s(&ppm), "--channel", "2"]);
    assert!(!icocnn(&["viz", "unfold", "--input", s(&out), "--out", s(&ppm), "--channel", "9"]).status.success());

    // A network for another level rejects the input.
    assert!(!icocnn(&[
        "net",
        "forward",
        "--arch",
        "hexunet",
        "--in-ch",
        "3",
        "--out-ch",
        "5",
        "--weights",
        s(&weights),
        "--input",
        s(&input),
        "--out",
        s(&out),
    ])
    .status
    .success());
}

#[test]
fn classifier_forward_writes_logits() {
    let dir = tempfile::tempdir().unwrap();
    let weights = dir.path().join("w");
    ok(&["net", "init", "--arch", "hexrunet-c", "--out", s(&weights)]);
    let input = dir.path().join("x.sph");
    save_sphere(&input, &SphereTensor::from_fn(4, 1, |k, _, r, c| (k * r + c) as f32 * 0.01)).unwrap();
    let v = ok(&[
        "net",
        "forward",
        "--arch",
        "hexrunet-c",
        "--weights",
        s(&weights),
        "--input",
        s(&input),
        "--out",
        s(&dir.path().join("l.ten")),
    ]);
    assert_eq!(v["logits"].as_array().unwrap().len(), 10);
}

#[test]
fn resample_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let pgm = dir.path().join("in.pgm");
    icocnn::imageio::write_pnm(&pgm, &icocnn::equirect::EquirectImage::from_fn(32, 1, |_, _, _| 77.0)).unwrap();
    let sph = dir.path().join("s.sph");
    for mode in ["bilinear", "nearest"] {
        ok(&["resample", "to-sphere", "--level", "3", "--mode", mode, "--input", s(&pgm), "--out", s(&sph)]);
        assert_eq!(load_sphere(&sph).unwrap(), SphereTensor::full(3, 1, 77.0));
    }
    let back = dir.path().join("back.pgm");
    let v = ok(&["resample", "to-equirect", "--input", s(&sph), "--out", s(&back), "--height", "16"]);
    assert_eq!(v["width"], 32);
    let img = icocnn::imageio::read_pnm(&back).unwrap();
    assert!(img.data().iter().all(|&x| x == 77.0));
}

#[test]
fn transfer_command() {
    let dir = tempfile::tempdir().unwrap();
    let (src, dst) = (dir.path().join("src"), dir.path().join("dst"));
    std::fs::create_dir(&src).unwrap();
    icocnn::format::save_tensor(&src.join("k.ten"), &icocnn_core::Tensor::full(&[1, 1, 3, 3], 1.0)).unwrap();
    let manifest = r#"{"network":"p","params":[{"name":"k","file":"k.ten","shape":[1,1,3,3],"role":"perspective"}]}"#;
    std::fs::write(src.join("manifest.json"), manifest).unwrap();
    assert_eq!(ok(&["net", "transfer", "--in", s(&src), "--out", s(&dst)])["converted"], 1);
}

#[test]
fn oracle_check_passes() {
    let v = ok(&["oracle", "check", "--level", "2"]);
    assert_eq!(v["pass"], true);
    assert!(v["hexconv_max_rel"].as_f64().unwrap() < 1e-5);
}
