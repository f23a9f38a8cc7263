//! Level-`r` icosahedral mesh and its five-chart grid layout.
//!
//! The base icosahedron has its poles on `±y`. The ten remaining vertices
//! form two staggered rings; together with the poles they split the sphere
//! into five "gores" of four base triangles each. Every gore is sheared onto
//! an integer lattice (rows grow southward, columns eastward), giving the
//! closed parallelogram
//!
//! ```text
//! lattice (0,0)   = upper-ring vertex U_k     (0,W)   = north pole
//! lattice (W,0)   = lower-ring vertex L_k     (W,W)   = U_{k+1}
//! lattice (2W,0)  = south pole                (2W,W)  = L_{k+1}
//! ```
//!
//! Component `k` stores lattice rows `1..=2W`, columns `1..=W` as its
//! `2W x W` cell grid; row 0 and column 0 belong to the western component.
//! The hexagonal neighbours of a lattice point sit at offsets
//! `(-1,0) (-1,-1) (0,-1) (+1,0) (+1,+1) (0,+1)`, which is the slot order
//! `n1..n6` of [`MeshLevel::neighbors`].

mod alpha;
mod build;

use alloc::vec::Vec;

use crate::geom::Vec3;
use crate::{Error, Result};

pub(crate) use alpha::projected_angle;
pub use alpha::{compute_alpha_maps, gore_asymmetry, raw_alpha, AlphaMaps, ALPHA_EPS};

/// Highest supported resolution level.
pub const MAX_LEVEL: u32 = 10;

/// Sentinel for "no vertex".
pub const NONE: u32 = u32::MAX;

/// Number of gores / grid components.
pub const COMPONENTS: usize = 5;

/// Winding of every face seen from outside the sphere: positive lattice
/// orientation turns out clockwise (`-1`) because azimuth `atan2(z, x)`
/// increases clockwise when viewed from the north pole.
pub const FACE_WINDING: f64 = -1.0;

/// Lattice offsets of neighbour slots `n1..n6`.
pub const NEIGHBOR_OFFSETS: [(i64, i64); 6] = [(-1, 0), (-1, -1), (0, -1), (1, 0), (1, 1), (0, 1)];

pub const fn vertex_count(r: u32) -> usize {
    2 + 10 * (1usize << (2 * r))
}

pub const fn face_count(r: u32) -> usize {
    20 * (1usize << (2 * r))
}

pub const fn edge_count(r: u32) -> usize {
    30 * (1usize << (2 * r))
}

/// The subdivided icosahedron at one resolution level.
///
/// Vertex ids of coarser levels are a prefix of the finer ids: vertex `v` of
/// level `r-1` is vertex `v` of level `r`. Faces are stored in subdivision
/// order, so the level-`l` ancestor of face `f` is `f >> 2(r-l)`.
#[derive(Debug, Clone)]
pub struct MeshLevel {
    level: u32,
    width: usize,
    positions: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    neighbors: Vec<[u32; 6]>,
    cell_of: Vec<u32>,
    vertex_of_cell: Vec<u32>,
    /// Closed-lattice lookup, `5 x (2W+1) x (W+1)`.
    frames: Vec<u32>,
}

/// Builds the level-`r` mesh.
pub fn build_mesh(r: u32) -> Result<MeshLevel> {
    MeshLevel::new(r)
}

impl MeshLevel {
    pub fn new(r: u32) -> Result<Self> {
        if r > MAX_LEVEL {
            return Err(Error::LevelOutOfRange { level: r, max: MAX_LEVEL });
        }
        Ok(build::build(r))
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Component width `W = 2^r`; components are `2W x W`.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Cells per component, `2W * W`.
    pub fn cells_per_component(&self) -> usize {
        2 * self.width * self.width
    }

    /// Total cell count over the five components, `n_r - 2`.
    pub fn cell_count(&self) -> usize {
        COMPONENTS * self.cells_per_component()
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn position(&self, v: u32) -> Result<Vec3> {
        self.positions.get(v as usize).copied().ok_or(Error::NoSuchVertex(v))
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn north_pole(&self) -> u32 {
        build::NORTH
    }

    pub fn south_pole(&self) -> u32 {
        build::SOUTH
    }

    pub fn is_pole(&self, v: u32) -> bool {
        v == build::NORTH || v == build::SOUTH
    }

    /// Linear cell index of `(comp, row, col)`.
    #[inline]
    pub fn cell_index(&self, comp: usize, row: usize, col: usize) -> usize {
        (comp * 2 * self.width + row) * self.width + col
    }

    fn check_cell(&self, comp: usize, row: usize, col: usize) -> Result<()> {
        if comp >= COMPONENTS || row >= 2 * self.width || col >= self.width {
            return Err(Error::CellOutOfBounds { level: self.level, comp, row, col });
        }
        Ok(())
    }

    pub fn grid_to_vertex(&self, comp: usize, row: usize, col: usize) -> Result<u32> {
        self.check_cell(comp, row, col)?;
        Ok(self.vertex_of_cell[self.cell_index(comp, row, col)])
    }

    pub fn vertex_to_grid(&self, v: u32) -> Result<(usize, usize, usize)> {
        let cell = self.vertex_cell(v)?;
        let w = self.width;
        Ok((cell / (2 * w * w), (cell / w) % (2 * w), cell % w))
    }

    /// Linear cell index of a non-pole vertex.
    pub fn vertex_cell(&self, v: u32) -> Result<usize> {
        if self.is_pole(v) {
            return Err(Error::PoleVertex(v));
        }
        match self.cell_of.get(v as usize) {
            Some(&c) => Ok(c as usize),
            None => Err(Error::NoSuchVertex(v)),
        }
    }

    /// Vertex stored in each cell, in linear cell order.
    pub fn cell_vertices(&self) -> &[u32] {
        &self.vertex_of_cell
    }

    /// Neighbour slots `n1..n6` of a non-pole vertex. Valence-5 vertices
    /// repeat one entry at the slot whose lattice offset has no mesh edge.
    pub fn neighbors(&self, v: u32) -> Result<[u32; 6]> {
        self.vertex_cell(v)?;
        Ok(self.neighbors[v as usize])
    }

    /// Vertex at a point of component `comp`'s closed lattice parallelogram,
    /// `0 <= lr <= 2W`, `0 <= lc <= W`.
    pub fn lattice_vertex(&self, comp: usize, lr: usize, lc: usize) -> Option<u32> {
        let w = self.width;
        if comp >= COMPONENTS || lr > 2 * w || lc > w {
            return None;
        }
        Some(self.frames[(comp * (2 * w + 1) + lr) * (w + 1) + lc])
    }

    /// Corners of face `index` of the level-`l` mesh (`l <= r`), expressed
    /// with this level's vertex ids.
    pub fn face_at_level(&self, l: u32, index: usize) -> [u32; 3] {
        debug_assert!(l <= self.level);
        let shift = 2 * (self.level - l);
        let base = index << shift;
        // Child `j` of a face keeps corner `j`; the all-`j` descendant path
        // therefore ends at a fine face whose corner `j` is the coarse corner.
        let ones = ((1usize << shift) - 1) / 3;
        [self.faces[base][0], self.faces[base + ones][1], self.faces[base + 2 * ones][2]]
    }

    /// Finest face containing direction `p`, with planar barycentric
    /// coordinates of `p`'s central projection onto that face.
    pub fn locate(&self, p: Vec3) -> (usize, [f64; 3]) {
        let inside = |f: [u32; 3]| -> f64 {
            let [a, b, c] = f.map(|v| self.positions[v as usize]);
            let s0 = FACE_WINDING * p.dot(b.cross(c));
            let s1 = FACE_WINDING * p.dot(c.cross(a));
            let s2 = FACE_WINDING * p.dot(a.cross(b));
            s0.min(s1).min(s2)
        };
        let mut best = 0usize;
        let mut best_score = f64::NEG_INFINITY;
        for f in 0..face_count(0) {
            let s = inside(self.face_at_level(0, f));
            if s > best_score {
                best_score = s;
                best = f;
            }
        }
        for l in 1..=self.level {
            let first = best * 4;
            best_score = f64::NEG_INFINITY;
            let mut next = first;
            for f in first..first + 4 {
                let s = inside(self.face_at_level(l, f));
                if s > best_score {
                    best_score = s;
                    next = f;
                }
            }
            best = next;
        }
        let [a, b, c] = self.faces[best].map(|v| self.positions[v as usize]);
        // Intersect the ray through p with the face plane.
        let n = (b - a).cross(c - a);
        let q = p * (n.dot(a) / n.dot(p));
        let area = n.dot(n);
        let w0 = (b - q).cross(c - q).dot(n) / area;
        let w1 = (c - q).cross(a - q).dot(n) / area;
        (best, [w0, w1, 1.0 - w0 - w1])
    }
}

#[cfg(test)]
mod tests;
