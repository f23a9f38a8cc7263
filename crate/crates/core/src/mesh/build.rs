use alloc::vec;
use alloc::vec::Vec;

use super::{MeshLevel, COMPONENTS, NEIGHBOR_OFFSETS, NONE};
use crate::geom::Vec3;

pub(super) const NORTH: u32 = 0;
pub(super) const SOUTH: u32 = 1;

const fn upper(k: usize) -> u32 {
    2 + (k % 5) as u32
}

const fn lower(k: usize) -> u32 {
    7 + (k % 5) as u32
}

type Lattice = [i64; 2];

fn base() -> (Vec<Vec3>, Vec<[u32; 3]>, Vec<[Lattice; 3]>) {
    let y = 1.0 / libm::sqrt(5.0);
    let rho = 2.0 * y;
    let deg = core::f64::consts::PI / 180.0;
    let ring = |az: f64, y: f64| Vec3::new(rho * libm::cos(az * deg), y, rho * libm::sin(az * deg));

    let mut pos = vec![Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, -1.0, 0.0)];
    pos.extend((0..5).map(|k| ring(72.0 * k as f64 - 18.0, y)));
    pos.extend((0..5).map(|k| ring(72.0 * k as f64 + 18.0, -y)));

    let mut faces = Vec::with_capacity(20);
    let mut coords = Vec::with_capacity(20);
    for k in 0..COMPONENTS {
        let (u0, u1, l0, l1) = (upper(k), upper(k + 1), lower(k), lower(k + 1));
        let gore: [([u32; 3], [Lattice; 3]); 4] = [
            ([NORTH, u0, u1], [[0, 1], [0, 0], [1, 1]]),
            ([u0, u1, l0], [[0, 0], [1, 1], [1, 0]]),
            ([u1, l0, l1], [[1, 1], [1, 0], [2, 1]]),
            ([SOUTH, l0, l1], [[2, 0], [1, 0], [2, 1]]),
        ];
        for (mut f, mut c) in gore {
            // Orient every face positively in the lattice.
            if orientation(c) < 0 {
                f.swap(1, 2);
                c.swap(1, 2);
            }
            faces.push(f);
            coords.push(c);
        }
    }
    (pos, faces, coords)
}

fn orientation([a, b, c]: [Lattice; 3]) -> i64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

#[inline]
fn edge_key(a: u32, b: u32) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    ((lo as u64) << 32) | hi as u64
}

fn subdivide(pos: &mut Vec<Vec3>, faces: &[[u32; 3]], coords: &[[Lattice; 3]]) -> (Vec<[u32; 3]>, Vec<[Lattice; 3]>) {
    let mut edges: Vec<u64> = Vec::with_capacity(faces.len() * 3);
    for &[a, b, c] in faces {
        edges.extend([edge_key(a, b), edge_key(b, c), edge_key(c, a)]);
    }
    edges.sort_unstable();
    edges.dedup();

    let first = pos.len() as u32;
    pos.reserve(edges.len());
    for &e in &edges {
        let (a, b) = ((e >> 32) as usize, (e & 0xffff_ffff) as usize);
        pos.push(((pos[a] + pos[b]) * 0.5).normalized());
    }
    let mid = |a: u32, b: u32| -> u32 { first + edges.binary_search(&edge_key(a, b)).expect("edge registered") as u32 };

    let mut out = Vec::with_capacity(faces.len() * 4);
    let mut out_coords = Vec::with_capacity(faces.len() * 4);
    for (&[a, b, c], &[ka, kb, kc]) in faces.iter().zip(coords) {
        let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
        out.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);

        let dbl = |p: Lattice| [2 * p[0], 2 * p[1]];
        let sum = |p: Lattice, q: Lattice| [p[0] + q[0], p[1] + q[1]];
        let (la, lb, lc) = (dbl(ka), dbl(kb), dbl(kc));
        let (lab, lbc, lca) = (sum(ka, kb), sum(kb, kc), sum(kc, ka));
        out_coords.extend([[la, lab, lca], [lab, lb, lbc], [lca, lbc, lc], [lab, lbc, lca]]);
    }
    (out, out_coords)
}

/// Face fan around one vertex: `(x, y)` pairs with `y` following `x`
/// counter-clockwise in lattice orientation.
#[derive(Clone, Copy)]
struct Fan {
    len: u8,
    pairs: [[u32; 2]; 6],
}

impl Fan {
    fn prev(&self, y: u32) -> u32 {
        self.pairs[..self.len as usize].iter().find(|p| p[1] == y).map_or(NONE, |p| p[0])
    }

    fn next(&self, x: u32) -> u32 {
        self.pairs[..self.len as usize].iter().find(|p| p[0] == x).map_or(NONE, |p| p[1])
    }
}

pub(super) fn build(r: u32) -> MeshLevel {
    let (mut pos, mut faces, mut coords) = base();
    for _ in 0..r {
        let (f, c) = subdivide(&mut pos, &faces, &coords);
        faces = f;
        coords = c;
    }

    let w = 1usize << r;
    let (fr, fc) = (2 * w + 1, w + 1);
    let mut frames = vec![NONE; COMPONENTS * fr * fc];
    let faces_per_gore = 4usize << (2 * r);
    for (f, corners) in coords.iter().enumerate() {
        let k = f / faces_per_gore;
        for (j, &[lr, lc]) in corners.iter().enumerate() {
            let slot = &mut frames[(k * fr + lr as usize) * fc + lc as usize];
            debug_assert!(*slot == NONE || *slot == faces[f][j]);
            *slot = faces[f][j];
        }
    }
    drop(coords);

    let n = pos.len();
    let cells = COMPONENTS * 2 * w * w;
    let mut cell_of = vec![NONE; n];
    let mut vertex_of_cell = vec![NONE; cells];
    for k in 0..COMPONENTS {
        for row in 0..2 * w {
            for col in 0..w {
                let v = frames[(k * fr + row + 1) * fc + col + 1];
                let cell = (k * 2 * w + row) * w + col;
                vertex_of_cell[cell] = v;
                cell_of[v as usize] = cell as u32;
            }
        }
    }

    let mut fans = vec![Fan { len: 0, pairs: [[NONE; 2]; 6] }; n];
    for &[a, b, c] in &faces {
        for (v, x, y) in [(a, b, c), (b, c, a), (c, a, b)] {
            let fan = &mut fans[v as usize];
            fan.pairs[fan.len as usize] = [x, y];
            fan.len += 1;
        }
    }

    let mut neighbors = vec![[NONE; 6]; n];
    for k in 0..COMPONENTS {
        for lr in 1..=2 * w {
            for lc in 1..=w {
                let v = frames[(k * fr + lr) * fc + lc];
                let mut slots = [NONE; 6];
                for (s, &(dr, dc)) in NEIGHBOR_OFFSETS.iter().enumerate() {
                    let (nr, nc) = ((lr as i64 + dr) as usize, (lc as i64 + dc) as usize);
                    if nr <= 2 * w && nc <= w {
                        slots[s] = frames[(k * fr + nr) * fc + nc];
                    }
                }
                fill_off_chart(&mut slots, &fans[v as usize]);
                debug_assert!(ring_consistent(&slots, &fans[v as usize]), "vertex {v}");
                neighbors[v as usize] = slots;
            }
        }
    }

    MeshLevel { level: r, width: w, positions: pos, faces, neighbors, cell_of, vertex_of_cell, frames }
}

/// Completes the slots whose lattice offsets leave the chart. They form one
/// contiguous run ending before slot `n1`, which is always on-chart. The run
/// is filled backwards by walking the face fan clockwise from its successor;
/// once the walk reaches the known slot before the run (valence-5 vertex),
/// the remaining slot repeats its successor.
fn fill_off_chart(slots: &mut [u32; 6], fan: &Fan) {
    let Some(last) = slots.iter().rposition(|&s| s == NONE) else {
        return;
    };
    let first = slots[..=last].iter().rposition(|&s| s != NONE).map_or(0, |p| p + 1);
    let before = slots[first - 1];
    for j in (first..=last).rev() {
        let succ = slots[(j + 1) % 6];
        let p = fan.prev(succ);
        slots[j] = if p == before { succ } else { p };
    }
}

fn ring_consistent(slots: &[u32; 6], fan: &Fan) -> bool {
    let mut distinct = 0;
    for j in 0..6 {
        let (a, b) = (slots[j], slots[(j + 1) % 6]);
        if a != b {
            if fan.next(a) != b {
                return false;
            }
            distinct += 1;
        }
    }
    distinct == fan.len as usize
}
