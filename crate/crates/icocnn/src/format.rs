//! Binary containers.
//!
//! * `.ten`: one JSON header line `{"shape":[...],"dtype":"f32"}` followed by
//!   the row-major little-endian `f32` payload.
//! * Sphere file: one JSON header line `{"r":..,"channels":..}` followed by
//!   the five components as `.ten` records, in component order.
//! * Mesh dump: magic `ICOM`, `u32` level, vertex positions as `f64`
//!   triples, the neighbour table as six `u32` per vertex and the grid map as
//!   `(component, row, col)` `u32` triples per vertex; all little-endian.
//!   Pole vertices carry `u32::MAX` in both tables.
//! * Blend weights: a `.ten` of shape `5 x 2W x W`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use icocnn_core::mesh::{MeshLevel, NONE};
use icocnn_core::{AlphaMaps, SphereTensor, Tensor};
use serde::{Deserialize, Serialize};

use crate::error::{format_err, PathContext, Result};

#[derive(Serialize, Deserialize)]
struct TenHeader {
    shape: Vec<usize>,
    dtype: String,
}

#[derive(Serialize, Deserialize)]
struct SphereHeader {
    r: u32,
    channels: usize,
}

fn read_header_line(r: &mut impl BufRead, what: &'static str) -> Result<String> {
    let mut line = String::new();
    if r.read_line(&mut line)? == 0 {
        return Err(format_err(what, "missing header line"));
    }
    Ok(line)
}

pub fn write_ten(w: &mut impl Write, t: &Tensor) -> Result<()> {
    let header = TenHeader { shape: t.shape().to_vec(), dtype: "f32".into() };
    serde_json::to_writer(&mut *w, &header)?;
    w.write_all(b"\n")?;
    let mut bytes = Vec::with_capacity(4 * t.len());
    for x in t.data() {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&bytes)?;
    Ok(())
}

pub fn read_ten(r: &mut impl BufRead) -> Result<Tensor> {
    let header: TenHeader = serde_json::from_str(&read_header_line(r, "tensor")?)?;
    if header.dtype != "f32" {
        return Err(format_err("tensor", format!("unsupported dtype {:?}", header.dtype)));
    }
    let n: usize = header.shape.iter().product();
    let mut bytes = vec![0u8; 4 * n];
    r.read_exact(&mut bytes).map_err(|e| format_err("tensor", format!("payload of {n} values: {e}")))?;
    let data = bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
    Ok(Tensor::new(header.shape, data)?)
}

pub fn save_tensor(path: &Path, t: &Tensor) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).at(path)?);
    write_ten(&mut w, t)?;
    w.flush().at(path)
}

pub fn load_tensor(path: &Path) -> Result<Tensor> {
    read_ten(&mut BufReader::new(File::open(path).at(path)?))
}

pub fn write_sphere(w: &mut impl Write, t: &SphereTensor) -> Result<()> {
    serde_json::to_writer(&mut *w, &SphereHeader { r: t.level(), channels: t.channels() })?;
    w.write_all(b"\n")?;
    for c in t.components() {
        write_ten(w, c)?;
    }
    Ok(())
}

pub fn read_sphere(r: &mut impl BufRead) -> Result<SphereTensor> {
    let header: SphereHeader = serde_json::from_str(&read_header_line(r, "sphere tensor")?)?;
    let comps = (0..5).map(|_| read_ten(r)).collect::<Result<Vec<_>>>()?;
    let t = SphereTensor::new(header.r, comps)?;
    if t.channels() != header.channels {
        return Err(format_err(
            "sphere tensor",
            format!("header says {} channels, payload has {}", header.channels, t.channels()),
        ));
    }
    Ok(t)
}

pub fn save_sphere(path: &Path, t: &SphereTensor) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).at(path)?);
    write_sphere(&mut w, t)?;
    w.flush().at(path)
}

pub fn load_sphere(path: &Path) -> Result<SphereTensor> {
    read_sphere(&mut BufReader::new(File::open(path).at(path)?))
}

pub fn save_alpha(path: &Path, a: &AlphaMaps) -> Result<()> {
    let w = a.width();
    let data = a.values().iter().map(|&x| x as f32).collect();
    save_tensor(path, &Tensor::new(vec![5, 2 * w, w], data)?)
}

pub fn load_alpha(path: &Path) -> Result<AlphaMaps> {
    let t = load_tensor(path)?;
    let &[5, h, w] = t.shape() else {
        return Err(format_err("blend weights", format!("shape {:?} is not 5 x 2W x W", t.shape())));
    };
    if h != 2 * w || !w.is_power_of_two() {
        return Err(format_err("blend weights", format!("component {h} x {w} is not 2W x W")));
    }
    let level = w.trailing_zeros();
    Ok(AlphaMaps::from_values(level, t.data().iter().map(|&x| f64::from(x)).collect())?)
}

pub const ICOM_MAGIC: &[u8; 4] = b"ICOM";

/// Contents of a mesh dump.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshDump {
    pub level: u32,
    pub positions: Vec<[f64; 3]>,
    pub neighbors: Vec<[u32; 6]>,
    pub grid: Vec<[u32; 3]>,
}

impl MeshDump {
    pub fn from_mesh(mesh: &MeshLevel) -> Self {
        let n = mesh.vertex_count();
        let (mut neighbors, mut grid) = (vec![[NONE; 6]; n], vec![[NONE; 3]; n]);
        for &v in mesh.cell_vertices() {
            neighbors[v as usize] = mesh.neighbors(v).expect("cell vertex");
            let (k, row, col) = mesh.vertex_to_grid(v).expect("cell vertex");
            grid[v as usize] = [k as u32, row as u32, col as u32];
        }
        Self {
            level: mesh.level(),
            positions: mesh.positions().iter().map(|p| p.as_array()).collect(),
            neighbors,
            grid,
        }
    }

    pub fn write(&self, w: &mut impl Write) -> Result<()> {
        let mut b = Vec::with_capacity(8 + self.positions.len() * (24 + 24 + 12));
        b.extend_from_slice(ICOM_MAGIC);
        b.extend_from_slice(&self.level.to_le_bytes());
        for p in &self.positions {
            p.iter().for_each(|x| b.extend_from_slice(&x.to_le_bytes()));
        }
        for nb in &self.neighbors {
            nb.iter().for_each(|x| b.extend_from_slice(&x.to_le_bytes()));
        }
        for g in &self.grid {
            g.iter().for_each(|x| b.extend_from_slice(&x.to_le_bytes()));
        }
        w.write_all(&b)?;
        Ok(())
    }

    pub fn read(r: &mut impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() < 8 || &bytes[..4] != ICOM_MAGIC {
            return Err(format_err("mesh dump", "missing ICOM magic"));
        }
        let level = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
        if level > icocnn_core::mesh::MAX_LEVEL {
            return Err(format_err("mesh dump", format!("level {level} out of range")));
        }
        let n = icocnn_core::mesh::vertex_count(level);
        if bytes.len() != 8 + n * (24 + 24 + 12) {
            return Err(format_err("mesh dump", format!("{} bytes for {n} vertices", bytes.len())));
        }
        let body = &bytes[8..];
        let f64_at = |i: usize| f64::from_le_bytes(body[8 * i..8 * i + 8].try_into().expect("8 bytes"));
        let ints = &body[24 * n..];
        let u32_at = |i: usize| u32::from_le_bytes(ints[4 * i..4 * i + 4].try_into().expect("4 bytes"));
        Ok(Self {
            level,
            positions: (0..n).map(|v| [f64_at(3 * v), f64_at(3 * v + 1), f64_at(3 * v + 2)]).collect(),
            neighbors: (0..n).map(|v| std::array::from_fn(|j| u32_at(6 * v + j))).collect(),
            grid: (0..n).map(|v| std::array::from_fn(|j| u32_at(6 * n + 3 * v + j))).collect(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path).at(path)?);
        self.write(&mut w)?;
        w.flush().at(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read(&mut BufReader::new(File::open(path).at(path)?))
    }
}
