use std::f64::consts::PI;
use std::io::Cursor;

use icocnn::equirect::{equirect_to_sphere, sphere_to_equirect, EquirectImage, Sampling};
use icocnn::format::{load_sphere, read_sphere, read_ten, save_sphere, write_sphere, write_ten, MeshDump};
use icocnn::imageio::{read_pnm, write_pnm};
use icocnn::unfold::{export_unfolded, label_color, ChannelMap};
use icocnn::weights::{import_perspective, load_weights, read_manifest, save_weights, transfer_bank};
use icocnn::Error;
use icocnn_core::mesh::{build_mesh, NONE};
use icocnn_core::nn::{build_hexrunet_c, transfer_weights, WeightStore};
use icocnn_core::{SphereTensor, Tensor};

fn ramp_sphere(level: u32, channels: usize) -> SphereTensor {
    SphereTensor::from_fn(level, channels, |k, c, r, col| (k * 1000 + c * 100 + r * 10 + col) as f32 * 0.25 - 3.0)
}

#[test]
fn ten_round_trip() {
    let t = Tensor::from_fn(&[2, 3, 4], |i| i as f32 * 0.5 - 1.0);
    let mut buf = Vec::new();
    write_ten(&mut buf, &t).unwrap();
    assert!(buf.starts_with(br#"{"shape":[2,3,4],"dtype":"f32"}"#));
    assert_eq!(read_ten(&mut Cursor::new(buf)).unwrap(), t);
}

#[test]
fn ten_rejects_truncated_payload_and_foreign_dtype() {
    let mut buf = Vec::new();
    write_ten(&mut buf, &Tensor::zeros(&[4])).unwrap();
    buf.truncate(buf.len() - 1);
    assert!(matches!(read_ten(&mut Cursor::new(buf)), Err(Error::Format { .. })));
    let f64_header = b"{\"shape\":[1],\"dtype\":\"f64\"}\n\0\0\0\0\0\0\0\0".to_vec();
    assert!(matches!(read_ten(&mut Cursor::new(f64_header)), Err(Error::Format { .. })));
}

#[test]
fn sphere_round_trip() {
    let t = ramp_sphere(2, 3);
    let mut buf = Vec::new();
    write_sphere(&mut buf, &t).unwrap();
    assert_eq!(read_sphere(&mut Cursor::new(&buf)).unwrap(), t);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.sph");
    save_sphere(&path, &t).unwrap();
    assert_eq!(load_sphere(&path).unwrap(), t);
}

#[test]
fn sphere_header_must_match_payload() {
    let mut buf = Vec::new();
    write_sphere(&mut buf, &ramp_sphere(1, 2)).unwrap();
    let text = String::from_utf8_lossy(&buf).replacen("\"channels\":2", "\"channels\":3", 1);
    assert!(read_sphere(&mut Cursor::new(text.into_bytes())).is_err());
}

#[test]
fn missing_file_names_the_path() {
    let err = load_sphere(std::path::Path::new("/nonexistent/x.sph")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/x.sph"), "{err}");
}

#[test]
fn mesh_dump_round_trip() {
    let mesh = build_mesh(2).unwrap();
    let dump = MeshDump::from_mesh(&mesh);
    let mut buf = Vec::new();
    dump.write(&mut buf).unwrap();
    assert_eq!(&buf[..4], b"ICOM");
    assert_eq!(buf.len(), 8 + 162 * 60);
    let back = MeshDump::read(&mut Cursor::new(&buf)).unwrap();
    assert_eq!(back, dump);
    for v in 0..mesh.vertex_count() as u32 {
        if mesh.is_pole(v) {
            assert_eq!(back.neighbors[v as usize], [NONE; 6]);
            assert_eq!(back.grid[v as usize], [NONE; 3]);
        } else {
            assert_eq!(back.neighbors[v as usize], mesh.neighbors(v).unwrap());
            let [k, r, c] = back.grid[v as usize];
            assert_eq!(mesh.grid_to_vertex(k as usize, r as usize, c as usize).unwrap(), v);
        }
    }
    buf[0] = b'X';
    assert!(MeshDump::read(&mut Cursor::new(&buf)).is_err());
}

#[test]
fn equirect_rejects_bad_aspect() {
    assert!(EquirectImage::new(4, 7, 1, vec![0.0; 28]).is_err());
    assert!(EquirectImage::new(4, 8, 1, vec![0.0; 31]).is_err());
    assert!(EquirectImage::new(1, 2, 1, vec![f32::NAN, 0.0]).is_err());
}

#[test]
fn constant_image_samples_to_constant_sphere() {
    let mesh = build_mesh(3).unwrap();
    let img = EquirectImage::from_fn(16, 2, |_, _, c| [0.75, -2.0][c]);
    for mode in [Sampling::Bilinear, Sampling::Nearest] {
        let t = equirect_to_sphere(&img, &mesh, mode);
        assert_eq!(t, SphereTensor::from_fn(3, 2, |_, c, _, _| [0.75, -2.0][c]));
    }
}

#[test]
fn nearest_sampling_only_returns_pixel_values() {
    let mesh = build_mesh(4).unwrap();
    let img = EquirectImage::from_fn(20, 1, |r, c, _| (r * 40 + c) as f32);
    let t = equirect_to_sphere(&img, &mesh, Sampling::Nearest);
    for k in 0..5 {
        for &x in t.component(k).data() {
            assert_eq!(x.fract(), 0.0);
            assert!((0.0..800.0).contains(&x));
        }
    }
}

#[test]
fn longitude_ramp_reproduces_vertex_azimuth() {
    let mesh = build_mesh(4).unwrap();
    let img = EquirectImage::from_fn(64, 1, |_, col, _| ((col as f64 + 0.5) / 128.0 * 2.0 * PI - PI) as f32);
    let t = equirect_to_sphere(&img, &mesh, Sampling::Bilinear);
    let pixel = 2.0 * PI / 128.0;
    for &v in mesh.cell_vertices() {
        let p = mesh.positions()[v as usize];
        let (k, r, c) = mesh.vertex_to_grid(v).unwrap();
        // Half a pixel either side of the wrap the ramp jumps by 2 pi.
        if p.azimuth().abs() < PI - pixel {
            assert!((f64::from(t.get(k, 0, r, c)) - p.azimuth()).abs() < 1e-5, "vertex {v}");
        }
    }
}

#[test]
fn constant_sphere_renders_constant_image() {
    let mesh = build_mesh(3).unwrap();
    let img = sphere_to_equirect(&SphereTensor::full(3, 1, 0.5), &mesh, 24).unwrap();
    assert_eq!((img.height(), img.width()), (24, 48));
    assert!(img.data().iter().all(|&x| (x - 0.5).abs() < 1e-6));
}

#[test]
fn smooth_field_round_trip_error_is_small() {
    // f(p) = 0.5 x + y z, sampled onto r=7 and rendered back.
    let field = |lon: f64, zen: f64| {
        let (x, y, z) = (zen.sin() * lon.cos(), zen.cos(), zen.sin() * lon.sin());
        0.5 * x + y * z
    };
    let mesh = build_mesh(7).unwrap();
    let src = EquirectImage::from_fn(256, 1, |_, _, _| 0.0);
    let src = EquirectImage::from_fn(256, 1, |r, c, _| {
        let (lon, zen) = src.pixel_angles(r, c);
        field(lon, zen) as f32
    });
    let back = sphere_to_equirect(&equirect_to_sphere(&src, &mesh, Sampling::Bilinear), &mesh, 256).unwrap();
    let mut max_err = 0.0f32;
    for r in 8..248 {
        for c in 0..512 {
            max_err = max_err.max((back.get(r, c, 0) - src.get(r, c, 0)).abs());
        }
    }
    assert!(max_err < ROUND_TRIP_TOL, "max error {max_err}");
}

/// Measured 6.9e-5 on the field above, away from the eight rows nearest
/// each pole (where faces touching a pole fall back to one corner).
const ROUND_TRIP_TOL: f32 = 2e-4;

#[test]
fn pnm_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let gray = EquirectImage::from_fn(4, 1, |r, c, _| (r * 8 + c) as f32);
    let rgb = EquirectImage::from_fn(4, 3, |r, c, ch| (r * 8 + c + 100 * ch) as f32);
    for (name, img) in [("g.pgm", &gray), ("c.ppm", &rgb)] {
        let path = dir.path().join(name);
        write_pnm(&path, img).unwrap();
        assert_eq!(&read_pnm(&path).unwrap(), img);
    }
    let two = EquirectImage::from_fn(4, 2, |_, _, _| 0.0);
    assert!(write_pnm(&dir.path().join("x.pgm"), &two).is_err());
}

#[test]
fn unfolded_export_tiles_components() {
    let t = SphereTensor::from_fn(2, 1, |k, _, _, _| k as f32);
    let img = export_unfolded(&t, &ChannelMap::Gray { channel: 0, min: 0.0, max: 4.0 }).unwrap();
    assert_eq!((img.width(), img.height()), (20, 8));
    for k in 0..5u32 {
        let expect = (k as f32 / 4.0 * 255.0).round() as u8;
        for y in 0..8 {
            for x in 4 * k..4 * k + 4 {
                assert_eq!(img.get_pixel(x, y).0, [expect; 3]);
            }
        }
    }
    assert!(export_unfolded(&t, &ChannelMap::Gray { channel: 1, min: 0.0, max: 1.0 }).is_err());
}

#[test]
fn labels_and_argmax_use_the_palette() {
    let labels = SphereTensor::from_fn(1, 1, |k, _, r, _| (k + r) as f32);
    let img = export_unfolded(&labels, &ChannelMap::Labels { channel: 0 }).unwrap();
    assert_eq!(img.get_pixel(4, 1).0, label_color(3));
    let scores = SphereTensor::from_fn(1, 3, |k, c, _, _| if c == k % 3 { 1.0 } else { 0.0 });
    let img = export_unfolded(&scores, &ChannelMap::Argmax).unwrap();
    for k in 0..5u32 {
        assert_eq!(img.get_pixel(2 * k, 0).0, label_color(k % 3));
    }
}

#[test]
fn palette_is_injective() {
    let mut seen: Vec<[u8; 3]> = (0..4096).map(label_color).collect();
    assert_eq!(seen[0], [0, 0, 0]);
    assert_eq!(seen[1], [128, 0, 0]);
    seen.sort_unstable();
    seen.dedup();
    assert_eq!(seen.len(), 4096);
}

#[test]
fn weights_round_trip() {
    let spec = build_hexrunet_c();
    let store = WeightStore::random(&spec, 3);
    let dir = tempfile::tempdir().unwrap();
    save_weights(dir.path(), &spec, &store).unwrap();
    let (manifest, back) = load_weights(dir.path()).unwrap();
    assert_eq!(manifest.network, "hexrunet-c");
    assert_eq!(back, store);
    back.check(&spec).unwrap();
}

#[test]
fn manifest_paths_cannot_escape() {
    let spec = build_hexrunet_c();
    let dir = tempfile::tempdir().unwrap();
    save_weights(dir.path(), &spec, &WeightStore::zeros(&spec)).unwrap();
    let mut manifest = read_manifest(dir.path()).unwrap();
    manifest.params[0].file = "../outside.ten".into();
    std::fs::write(dir.path().join("manifest.json"), serde_json::to_string(&manifest).unwrap()).unwrap();
    assert!(matches!(load_weights(dir.path()), Err(Error::Format { .. })));
}

#[test]
fn perspective_kernels_are_transferred() {
    let src = tempfile::tempdir().unwrap();
    let dst = tempfile::tempdir().unwrap();
    let kernel = Tensor::from_fn(&[2, 1, 3, 3], |i| (i as f32 + 1.0) / 8.0);
    icocnn::format::save_tensor(&src.path().join("k.ten"), &kernel).unwrap();
    icocnn::format::save_tensor(&src.path().join("b.ten"), &Tensor::full(&[2], 0.5)).unwrap();
    let manifest = serde_json::json!({
        "network": "planar",
        "params": [
            {"name": "conv.weight", "file": "k.ten", "shape": [2, 1, 3, 3], "role": "perspective"},
            {"name": "conv.bias", "file": "b.ten", "shape": [2], "role": "bias"},
        ]
    });
    std::fs::write(src.path().join("manifest.json"), manifest.to_string()).unwrap();
    assert_eq!(import_perspective(src.path(), dst.path()).unwrap(), 1);
    let (m, store) = load_weights(dst.path()).unwrap();
    assert_eq!(m.params[0].role, "hex_weight");
    let hex = store.get("conv.weight").unwrap();
    assert_eq!(hex.shape(), &[2, 1, 7]);
    for o in 0..2 {
        let p: [f64; 9] = std::array::from_fn(|j| f64::from(kernel.data()[9 * o + j]));
        let w = transfer_weights(&p);
        for (j, w) in w.iter().enumerate() {
            assert!((f64::from(hex.data()[7 * o + j]) - w).abs() < 1e-6);
        }
    }
    assert_eq!(store.get("conv.bias").unwrap(), &Tensor::full(&[2], 0.5));
    assert!(transfer_bank(&Tensor::zeros(&[1, 1, 2, 2])).is_err());
}
