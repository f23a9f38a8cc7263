//! Optional on-disk cache of blend weights and mesh dumps, enabled by the
//! `ICO_CACHE_DIR` environment variable.

use std::path::{Path, PathBuf};

use icocnn_core::mesh::{build_mesh, compute_alpha_maps};
use icocnn_core::nn::AlphaSet;
use icocnn_core::AlphaMaps;

use crate::error::{PathContext, Result};
use crate::format::{load_alpha, save_alpha, MeshDump};

pub const CACHE_ENV: &str = "ICO_CACHE_DIR";

pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn cached<T>(
    file: &str,
    load: impl Fn(&Path) -> Result<T>,
    build: impl Fn() -> Result<T>,
    save: impl Fn(&Path, &T) -> Result<()>,
) -> Result<T> {
    let Some(dir) = cache_dir() else {
        return build();
    };
    let path = dir.join(file);
    if path.exists() {
        return load(&path);
    }
    let value = build()?;
    std::fs::create_dir_all(&dir).at(&dir)?;
    save(&path, &value)?;
    Ok(value)
}

/// Blend weights of `level`, rounded to single precision (the precision the
/// convolution uses) so cached and freshly computed maps are identical.
pub fn alpha_maps(level: u32) -> Result<AlphaMaps> {
    cached(
        &format!("alpha-r{level}.ten"),
        load_alpha,
        || {
            let exact = compute_alpha_maps(&build_mesh(level)?)?;
            let rounded = exact.values().iter().map(|&x| f64::from(x as f32)).collect();
            Ok(AlphaMaps::from_values(level, rounded)?)
        },
        save_alpha,
    )
}

pub fn alpha_set(levels: &[u32]) -> Result<AlphaSet> {
    let mut set = AlphaSet::default();
    for &r in levels {
        set.insert(alpha_maps(r)?);
    }
    Ok(set)
}

pub fn mesh_dump(level: u32) -> Result<MeshDump> {
    cached(
        &format!("mesh-r{level}.icom"),
        MeshDump::load,
        || Ok(MeshDump::from_mesh(&build_mesh(level)?)),
        |p, d| d.save(p),
    )
}
