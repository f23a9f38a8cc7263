//! Reference implementations evaluated vertex by vertex on the mesh graph.
//!
//! Nothing here looks at the chart layout beyond converting to and from
//! [`SphereTensor`]: every operator walks vertex ids and the neighbour table
//! in plain loops, in `f64`. They are slow on purpose and exist to be read
//! next to the grid operators in [`crate::sphere`].

use alloc::vec;
use alloc::vec::Vec;

use crate::geom::Vec3;
use crate::mesh::{projected_angle, AlphaMaps, MeshLevel, ALPHA_EPS};
use crate::sphere::{HexKernelBank, SphereTensor};
use crate::tensor::PoolMode;
use crate::{shape_err, Error, Result};

/// A `C`-channel signal indexed by vertex id. Pole rows exist but are
/// flagged: they are zero on conversion from a [`SphereTensor`] and are
/// dropped on the way back.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexSignal {
    level: u32,
    channels: usize,
    /// `n_r x C`, vertex-major.
    values: Vec<f64>,
    poles: [u32; 2],
}

impl VertexSignal {
    pub fn zeros(mesh: &MeshLevel, channels: usize) -> Self {
        Self {
            level: mesh.level(),
            channels,
            values: vec![0.0; mesh.vertex_count() * channels],
            poles: [mesh.north_pole(), mesh.south_pole()],
        }
    }

    pub fn from_sphere(t: &SphereTensor, mesh: &MeshLevel) -> Result<Self> {
        check_level(mesh, t.level())?;
        let mut s = Self::zeros(mesh, t.channels());
        let w = mesh.width();
        for (cell, &v) in mesh.cell_vertices().iter().enumerate() {
            let (k, row, col) = (cell / (2 * w * w), (cell / w) % (2 * w), cell % w);
            for c in 0..t.channels() {
                s.values[v as usize * s.channels + c] = f64::from(t.get(k, c, row, col));
            }
        }
        Ok(s)
    }

    pub fn to_sphere(&self, mesh: &MeshLevel) -> Result<SphereTensor> {
        check_level(mesh, self.level)?;
        let cells = mesh.cell_vertices();
        let w = mesh.width();
        Ok(SphereTensor::from_fn(self.level, self.channels, |k, c, row, col| {
            let v = cells[(k * 2 * w + row) * w + col];
            self.values[v as usize * self.channels + c] as f32
        }))
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn is_pole(&self, v: u32) -> bool {
        self.poles.contains(&v)
    }

    pub fn get(&self, v: u32, c: usize) -> f64 {
        self.values[v as usize * self.channels + c]
    }

    pub fn set(&mut self, v: u32, c: usize, x: f64) {
        self.values[v as usize * self.channels + c] = x;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn check_level(mesh: &MeshLevel, level: u32) -> Result<()> {
    if mesh.level() != level {
        return Err(Error::LevelMismatch { expected: mesh.level(), found: level });
    }
    Ok(())
}

fn check_bank(sig: &VertexSignal, bank: &HexKernelBank) -> Result<()> {
    if bank.c_in() != sig.channels {
        return Err(shape_err!("hex bank expects {} input channels, signal has {}", bank.c_in(), sig.channels));
    }
    Ok(())
}

/// Hexagonal convolution in the single-weight form: per vertex `i`,
///
/// ```text
/// y_i = a_i (sum_j w_j x[n_j] + w7 x_i)
///     + (1 - a_i) (w1 x[n6] + sum_{j>=2} w_j x[n_{j-1}] + w7 x_i) + b
/// ```
pub fn graph_hexconv_ref(
    sig: &VertexSignal,
    bank: &HexKernelBank,
    mesh: &MeshLevel,
    alphas: &AlphaMaps,
) -> Result<VertexSignal> {
    check_level(mesh, sig.level)?;
    check_level(mesh, alphas.level())?;
    check_bank(sig, bank)?;
    let mut out = VertexSignal::zeros(mesh, bank.c_out());
    for &v in mesh.cell_vertices() {
        let a = alphas.values()[mesh.vertex_cell(v)?];
        out_vertex(sig, bank, mesh, v, &mut out, |_| a)?;
    }
    Ok(out)
}

/// Hexagonal convolution with one interpolation weight per neighbour pair:
/// tap `w_j` reads `t_j x[n_j] + (1 - t_j) x[n_{j-1}]`, `n_0 = n_6`.
/// `thetas` is indexed by cell, as produced by [`compute_thetas`].
pub fn graph_eq1_ref(
    sig: &VertexSignal,
    bank: &HexKernelBank,
    mesh: &MeshLevel,
    thetas: &[[f64; 6]],
) -> Result<VertexSignal> {
    check_level(mesh, sig.level)?;
    check_bank(sig, bank)?;
    if thetas.len() != mesh.cell_count() {
        return Err(shape_err!("{} theta rows for {} cells", thetas.len(), mesh.cell_count()));
    }
    let mut out = VertexSignal::zeros(mesh, bank.c_out());
    for &v in mesh.cell_vertices() {
        let th = thetas[mesh.vertex_cell(v)?];
        out_vertex(sig, bank, mesh, v, &mut out, |j| th[j])?;
    }
    Ok(out)
}

fn out_vertex(
    sig: &VertexSignal,
    bank: &HexKernelBank,
    mesh: &MeshLevel,
    v: u32,
    out: &mut VertexSignal,
    theta: impl Fn(usize) -> f64,
) -> Result<()> {
    let nb = mesh.neighbors(v)?;
    for o in 0..bank.c_out() {
        let mut acc = bank.bias().map_or(0.0, |b| f64::from(b[o]));
        for c in 0..bank.c_in() {
            let taps = bank.taps(o, c);
            acc += f64::from(taps[6]) * sig.get(v, c);
            for j in 0..6 {
                let t = theta(j);
                let here = sig.get(nb[j], c);
                let prev = sig.get(nb[(j + 5) % 6], c);
                acc += f64::from(taps[j]) * (t * here + (1.0 - t) * prev);
            }
        }
        out.set(v, o, acc);
    }
    Ok(())
}

/// Rotates `p` by `angle` about the unit vector `axis` (right-handed).
fn rotate(p: Vec3, axis: Vec3, angle: f64) -> Vec3 {
    let (s, c) = (libm::sin(angle), libm::cos(angle));
    p * c + axis.cross(p) * s + axis * (axis.dot(p) * (1.0 - c))
}

/// Per-pair interpolation weights. For slot `j` the target direction is
/// north turned by `(j-1) * 60` degrees towards `n2`; `t_j` is built from
/// the angles the edges to `n_j` and `n_{j-1}` make with the plane through
/// the vertex and that direction, exactly as the single weight is built
/// from the meridian plane (so `t_1` equals the unaveraged weight).
pub fn compute_thetas(mesh: &MeshLevel) -> Result<Vec<[f64; 6]>> {
    let pos = mesh.positions();
    mesh.cell_vertices()
        .iter()
        .map(|&v| {
            let p = pos[v as usize];
            let nb = mesh.neighbors(v)?;
            let axis = p.cross(Vec3::NORTH);
            let len = axis.norm();
            if len < 1e-9 {
                return Err(Error::DegenerateGeometry { vertex: v, norm: len });
            }
            let normal = axis * (1.0 / len);
            let dir = |u: u32| pos[u as usize] - p;
            let turn: f64 = (0..6).map(|j| p.dot(dir(nb[j]).cross(dir(nb[(j + 1) % 6])))).sum();
            let sense = if turn >= 0.0 { 1.0 } else { -1.0 };
            let mut th = [0.5; 6];
            for (j, t) in th.iter_mut().enumerate() {
                let (here, prev) = (nb[j], nb[(j + 5) % 6]);
                if here == prev {
                    continue;
                }
                let n = rotate(normal, p, sense * j as f64 * core::f64::consts::FRAC_PI_3);
                let psi = projected_angle(p - pos[here as usize], n);
                let phi = projected_angle(p - pos[prev as usize], n);
                *t = (phi / (phi + psi)).clamp(ALPHA_EPS, 1.0 - ALPHA_EPS);
            }
            Ok(th)
        })
        .collect()
}

/// Pools `{v, n1, n2, n3}` (fine-level neighbours) onto every non-pole
/// vertex `v` of the coarse level.
pub fn graph_pool_ref(
    sig: &VertexSignal,
    fine: &MeshLevel,
    coarse: &MeshLevel,
    mode: PoolMode,
) -> Result<VertexSignal> {
    check_level(fine, sig.level)?;
    check_level(fine, coarse.level() + 1)?;
    let mut out = VertexSignal::zeros(coarse, sig.channels);
    for &v in coarse.cell_vertices() {
        let nb = fine.neighbors(v)?;
        let group = [v, nb[0], nb[1], nb[2]];
        for c in 0..sig.channels {
            let x = group.map(|u| sig.get(u, c));
            let y = match mode {
                PoolMode::Max => x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                PoolMode::Average => x.iter().sum::<f64>() / 4.0,
            };
            out.set(v, c, y);
        }
    }
    Ok(out)
}

/// Mean of the vertices adjacent to pole `pole`.
fn pole_estimate(sig: &VertexSignal, mesh: &MeshLevel, pole: u32, c: usize) -> f64 {
    let mut ring: Vec<u32> = mesh
        .faces()
        .iter()
        .filter(|f| f.contains(&pole))
        .flat_map(|f| f.iter().copied().filter(|&u| u != pole))
        .collect();
    ring.sort_unstable();
    ring.dedup();
    ring.iter().map(|&u| sig.get(u, c)).sum::<f64>() / ring.len() as f64
}

/// Interpolates the fine level from the coarse one. Surviving vertices keep
/// their value. A new vertex on coarse edge `(p, q)` takes the edge mean,
/// except when its parents sit in its own `n2`/`n5` slots: there it averages
/// the four corners of the two coarse triangles sharing the edge, which is
/// what bilinear interpolation does at a cell centre of the sheared lattice.
/// Poles enter as the mean of their ring.
pub fn graph_upsample_ref(sig: &VertexSignal, coarse: &MeshLevel, fine: &MeshLevel) -> Result<VertexSignal> {
    check_level(coarse, sig.level)?;
    check_level(fine, coarse.level() + 1)?;
    let n_coarse = coarse.vertex_count() as u32;
    let mut src = sig.clone();
    for pole in [coarse.north_pole(), coarse.south_pole()] {
        for c in 0..sig.channels {
            let x = pole_estimate(sig, coarse, pole, c);
            src.set(pole, c, x);
        }
    }
    // Edge -> the two vertices opposite it.
    let mut opposite: Vec<((u32, u32), u32)> = coarse
        .faces()
        .iter()
        .flat_map(|&[a, b, c]| [((a, b), c), ((b, c), a), ((c, a), b)])
        .map(|((a, b), o)| ((a.min(b), a.max(b)), o))
        .collect();
    opposite.sort_unstable();
    let mut out = VertexSignal::zeros(fine, sig.channels);
    for &v in fine.cell_vertices() {
        let support = if v < n_coarse {
            vec![v]
        } else {
            let nb = fine.neighbors(v)?;
            let parents: Vec<usize> = (0..6).filter(|&j| nb[j] < n_coarse).collect();
            let [i, j] = parents[..] else {
                return Err(shape_err!("vertex {v} has {} coarse neighbours", parents.len()));
            };
            let (p, q) = (nb[i], nb[j]);
            if (i, j) == (1, 4) {
                let key = (p.min(q), p.max(q));
                let from = opposite.partition_point(|e| e.0 < key);
                let mut s = vec![p, q];
                s.extend(opposite[from..].iter().take_while(|e| e.0 == key).map(|e| e.1));
                s
            } else {
                vec![p, q]
            }
        };
        for c in 0..sig.channels {
            let x = support.iter().map(|&u| src.get(u, c)).sum::<f64>() / support.len() as f64;
            out.set(v, c, x);
        }
    }
    Ok(out)
}
