use alloc::vec::Vec;

use super::{MeshLevel, COMPONENTS};
use crate::geom::Vec3;
use crate::{Error, Result};

/// Clamp applied to every blend weight.
pub const ALPHA_EPS: f64 = 1e-6;

/// Per-cell north-alignment weights, one `2W x W` grid per component, in the
/// same linear cell order as the mesh grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaMaps {
    level: u32,
    width: usize,
    values: Vec<f64>,
}

impl AlphaMaps {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// All cells in linear order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn component(&self, k: usize) -> &[f64] {
        let n = 2 * self.width * self.width;
        &self.values[k * n..(k + 1) * n]
    }

    pub fn get(&self, comp: usize, row: usize, col: usize) -> f64 {
        self.values[(comp * 2 * self.width + row) * self.width + col]
    }

    /// Single-precision copy of one component grid.
    pub fn component_f32(&self, k: usize) -> Vec<f32> {
        self.component(k).iter().map(|&a| a as f32).collect()
    }

    pub fn from_values(level: u32, values: Vec<f64>) -> Result<Self> {
        let width = 1usize << level;
        if values.len() != COMPONENTS * 2 * width * width {
            return Err(crate::shape_err!(
                "alpha map of level {level} needs {} cells, got {}",
                COMPONENTS * 2 * width * width,
                values.len()
            ));
        }
        Ok(Self { level, width, values })
    }
}

/// Angle between edge `e` and its projection onto the plane with normal `n`.
pub(crate) fn projected_angle(e: Vec3, n: Vec3) -> f64 {
    let pe = e - n * n.dot(e);
    let (ne, npe) = (e.norm(), pe.norm());
    if npe == 0.0 {
        return core::f64::consts::FRAC_PI_2;
    }
    libm::acos((e.dot(pe) / (ne * npe)).clamp(-1.0, 1.0))
}

/// Blend weight `phi / (phi + psi)` of one non-pole vertex, where `psi` and
/// `phi` are the angles the edges to `n1` and `n6` make with the meridian
/// plane through the vertex.
pub fn raw_alpha(mesh: &MeshLevel, v: u32) -> Result<f64> {
    let nb = mesh.neighbors(v)?;
    let p = mesh.positions[v as usize];
    let axis = p.cross(Vec3::NORTH);
    let len = axis.norm();
    if len < 1e-9 {
        return Err(Error::DegenerateGeometry { vertex: v, norm: len });
    }
    let n = axis * (1.0 / len);
    let psi = projected_angle(p - mesh.positions[nb[0] as usize], n);
    let phi = projected_angle(p - mesh.positions[nb[5] as usize], n);
    Ok((phi / (phi + psi)).clamp(ALPHA_EPS, 1.0 - ALPHA_EPS))
}

/// Builds the blend-weight grids. The five gore-equivalent cells (same row
/// and column in every component) are averaged so that the maps are exactly
/// invariant under a 72-degree rotation; the unaveraged weights differ from
/// the average only by rounding.
pub fn compute_alpha_maps(mesh: &MeshLevel) -> Result<AlphaMaps> {
    let per = mesh.cells_per_component();
    let cells = mesh.cell_vertices();
    let mut values = Vec::with_capacity(mesh.cell_count());
    for c in 0..per {
        let mut sum = 0.0;
        for k in 0..COMPONENTS {
            sum += raw_alpha(mesh, cells[k * per + c])?;
        }
        values.push(sum / COMPONENTS as f64);
    }
    let mut all = Vec::with_capacity(mesh.cell_count());
    for _ in 0..COMPONENTS {
        all.extend_from_slice(&values);
    }
    Ok(AlphaMaps { level: mesh.level, width: mesh.width, values: all })
}

/// Largest spread between the unaveraged weights of gore-equivalent cells.
pub fn gore_asymmetry(mesh: &MeshLevel) -> Result<f64> {
    let per = mesh.cells_per_component();
    let cells = mesh.cell_vertices();
    let mut worst: f64 = 0.0;
    for c in 0..per {
        let a0 = raw_alpha(mesh, cells[c])?;
        for k in 1..COMPONENTS {
            worst = worst.max((raw_alpha(mesh, cells[k * per + c])? - a0).abs());
        }
    }
    Ok(worst)
}
