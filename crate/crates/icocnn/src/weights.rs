//! Weight directories: `manifest.json` plus one `.ten` blob per parameter.
//!
//! ```json
//! {"network": "hexunet",
//!  "params": [{"name": "enc1.conv1.weight", "file": "enc1.conv1.weight.ten",
//!              "shape": [32, 3, 7], "role": "hex_weight"}, ...]}
//! ```
//!
//! A directory may also hold 3x3 perspective kernels (role `perspective`,
//! shape `C_out x C_in x 3 x 3`); [`import_perspective`] converts those to
//! hexagonal taps.

use std::fs;
use std::path::Path;

use icocnn_core::nn::{layer_params, transfer_weights, NetworkSpec, ParamRole, WeightStore};
use icocnn_core::Tensor;
use serde::{Deserialize, Serialize};

use crate::error::{format_err, PathContext, Result};
use crate::format::{load_tensor, save_tensor};

pub const MANIFEST: &str = "manifest.json";
pub const PERSPECTIVE_ROLE: &str = "perspective";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub file: String,
    pub shape: Vec<usize>,
    pub role: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub network: String,
    pub params: Vec<ManifestEntry>,
}

fn write_dir(dir: &Path, network: &str, entries: Vec<(ManifestEntry, &Tensor)>) -> Result<()> {
    fs::create_dir_all(dir).at(dir)?;
    for (e, t) in &entries {
        save_tensor(&dir.join(&e.file), t)?;
    }
    let manifest = Manifest { network: network.into(), params: entries.into_iter().map(|(e, _)| e).collect() };
    let path = dir.join(MANIFEST);
    fs::write(&path, serde_json::to_string_pretty(&manifest)?).at(&path)
}

fn entry(name: &str, t: &Tensor, role: &str) -> ManifestEntry {
    ManifestEntry { name: name.into(), file: format!("{name}.ten"), shape: t.shape().to_vec(), role: role.into() }
}

/// Writes every parameter of `spec`.
pub fn save_weights(dir: &Path, spec: &NetworkSpec, store: &WeightStore) -> Result<()> {
    let mut entries = Vec::new();
    for l in &spec.layers {
        for p in layer_params(l) {
            let t = store.get(&p.name)?;
            entries.push((entry(&p.name, t, p.role.as_str()), t));
        }
    }
    write_dir(dir, &spec.name, entries)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST);
    Ok(serde_json::from_str(&fs::read_to_string(&path).at(&path)?)?)
}

/// Loads every blob listed in the manifest, checking the recorded shapes.
pub fn load_weights(dir: &Path) -> Result<(Manifest, WeightStore)> {
    let manifest = read_manifest(dir)?;
    let mut store = WeightStore::new();
    for e in &manifest.params {
        if e.file.contains(['/', '\\']) || e.file.starts_with("..") {
            return Err(format_err("weight manifest", format!("blob path {:?} leaves the directory", e.file)));
        }
        let t = load_tensor(&dir.join(&e.file))?;
        if t.shape() != e.shape.as_slice() {
            return Err(format_err(
                "weight manifest",
                format!("`{}` has shape {:?}, manifest says {:?}", e.name, t.shape(), e.shape),
            ));
        }
        store.insert(&e.name, t);
    }
    Ok((manifest, store))
}

/// Converts a `C_out x C_in x 3 x 3` perspective bank to `C_out x C_in x 7`
/// hexagonal taps.
pub fn transfer_bank(t: &Tensor) -> Result<Tensor> {
    let &[o, i, 3, 3] = t.shape() else {
        return Err(format_err("perspective kernel", format!("shape {:?} is not C_out x C_in x 3 x 3", t.shape())));
    };
    let mut data = Vec::with_capacity(o * i * 7);
    for k in t.data().chunks_exact(9) {
        let p: [f64; 9] = std::array::from_fn(|j| f64::from(k[j]));
        data.extend(transfer_weights(&p).iter().map(|&w| w as f32));
    }
    Ok(Tensor::new(vec![o, i, 7], data)?)
}

/// Copies a weight directory, replacing every perspective kernel by its
/// hexagonal transfer. Returns the number of converted kernels.
pub fn import_perspective(src: &Path, dst: &Path) -> Result<usize> {
    let (manifest, store) = load_weights(src)?;
    let mut converted = Vec::new();
    for e in &manifest.params {
        let t = store.get(&e.name)?;
        converted.push(if e.role == PERSPECTIVE_ROLE {
            let hex = transfer_bank(t)?;
            let e = entry(&e.name, &hex, ParamRole::HexWeight.as_str());
            (e, hex)
        } else {
            (e.clone(), t.clone())
        });
    }
    let n = manifest.params.iter().filter(|e| e.role == PERSPECTIVE_ROLE).count();
    write_dir(dst, &manifest.network, converted.iter().map(|(e, t)| (e.clone(), t)).collect())?;
    Ok(n)
}
