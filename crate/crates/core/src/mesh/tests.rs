use alloc::vec::Vec;

use super::*;

fn sorted_edges(mesh: &MeshLevel) -> Vec<(u32, u32)> {
    let mut e: Vec<(u32, u32)> = mesh
        .faces()
        .iter()
        .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    e.sort_unstable();
    e.dedup();
    e
}

fn is_edge(edges: &[(u32, u32)], a: u32, b: u32) -> bool {
    edges.binary_search(&(a.min(b), a.max(b))).is_ok()
}

#[test]
fn counts_and_euler_characteristic() {
    for r in 0..=5 {
        let m = build_mesh(r).unwrap();
        assert_eq!(m.vertex_count(), vertex_count(r));
        assert_eq!(m.face_count(), face_count(r));
        let e = sorted_edges(&m).len();
        assert_eq!(e, edge_count(r));
        assert_eq!(m.vertex_count() as i64 - e as i64 + m.face_count() as i64, 2);
    }
}

#[test]
fn level_out_of_range() {
    assert!(matches!(build_mesh(11), Err(Error::LevelOutOfRange { level: 11, .. })));
}

#[test]
fn positions_are_unit() {
    let m = build_mesh(5).unwrap();
    for p in m.positions() {
        assert!((p.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn poles_are_antipodal_extremes() {
    let m = build_mesh(2).unwrap();
    let (n, s) = (m.position(m.north_pole()).unwrap(), m.position(m.south_pole()).unwrap());
    let d = (n - s).norm();
    assert_eq!(d, 2.0);
    for a in m.positions() {
        for b in m.positions() {
            assert!((*a - *b).norm() <= d + 1e-12);
        }
    }
}

#[test]
fn faces_share_one_orientation_on_the_sphere() {
    let m = build_mesh(4).unwrap();
    for &[a, b, c] in m.faces() {
        let [pa, pb, pc] = [a, b, c].map(|v| m.positions()[v as usize]);
        assert!(FACE_WINDING * (pb - pa).cross(pc - pa).dot(pa) > 0.0);
    }
}

#[test]
fn grid_map_is_a_bijection() {
    for r in 0..=4 {
        let m = build_mesh(r).unwrap();
        let w = m.width();
        let mut seen = alloc::vec![false; m.vertex_count()];
        for k in 0..COMPONENTS {
            for row in 0..2 * w {
                for col in 0..w {
                    let v = m.grid_to_vertex(k, row, col).unwrap();
                    assert!(!m.is_pole(v));
                    assert!(!seen[v as usize], "vertex {v} stored twice");
                    seen[v as usize] = true;
                    assert_eq!(m.vertex_to_grid(v).unwrap(), (k, row, col));
                }
            }
        }
        assert_eq!(seen.iter().filter(|&&s| s).count(), m.vertex_count() - 2);
        assert_eq!(m.cell_count(), m.vertex_count() - 2);
    }
}

#[test]
fn grid_errors() {
    let m = build_mesh(1).unwrap();
    assert!(m.grid_to_vertex(5, 0, 0).is_err());
    assert!(m.grid_to_vertex(0, 4, 0).is_err());
    assert!(m.grid_to_vertex(0, 0, 2).is_err());
    assert_eq!(m.neighbors(m.north_pole()), Err(Error::PoleVertex(0)));
    assert_eq!(m.vertex_to_grid(1), Err(Error::PoleVertex(1)));
    assert_eq!(m.neighbors(42), Err(Error::NoSuchVertex(42)));
}

#[test]
fn neighbor_slots_are_mesh_edges_and_symmetric() {
    for r in 0..=4 {
        let m = build_mesh(r).unwrap();
        let edges = sorted_edges(&m);
        let mut repeated = Vec::new();
        for &v in m.cell_vertices() {
            let nb = m.neighbors(v).unwrap();
            for &u in &nb {
                assert!(is_edge(&edges, v, u), "r={r}: {v}-{u} not an edge");
                if !m.is_pole(u) {
                    assert!(m.neighbors(u).unwrap().contains(&v));
                }
            }
            let mut d = nb;
            d.sort_unstable();
            let distinct = 1 + d.windows(2).filter(|w| w[0] != w[1]).count();
            match distinct {
                6 => {}
                5 => repeated.push(v),
                _ => panic!("vertex {v} has {distinct} distinct neighbours"),
            }
        }
        repeated.sort_unstable();
        assert_eq!(repeated, (2..12).collect::<Vec<u32>>(), "r={r}");
    }
}

#[test]
fn valence_five_duplicates_are_adjacent_slots() {
    let m = build_mesh(3).unwrap();
    for v in 2..12u32 {
        let nb = m.neighbors(v).unwrap();
        let dup = (0..6).filter(|&j| nb[j] == nb[(j + 1) % 6]).count();
        assert_eq!(dup, 1, "vertex {v}: {nb:?}");
    }
}

#[test]
fn on_chart_slots_follow_lattice_offsets() {
    let m = build_mesh(3).unwrap();
    let w = m.width();
    for k in 0..COMPONENTS {
        for row in 0..2 * w {
            for col in 0..w {
                let v = m.grid_to_vertex(k, row, col).unwrap();
                let nb = m.neighbors(v).unwrap();
                for (s, &(dr, dc)) in NEIGHBOR_OFFSETS.iter().enumerate() {
                    let (lr, lc) = ((row as i64 + 1 + dr) as usize, (col as i64 + 1 + dc) as usize);
                    if let Some(u) = m.lattice_vertex(k, lr, lc) {
                        assert_eq!(nb[s], u);
                    }
                }
            }
        }
    }
}

#[test]
fn coarse_ids_and_faces_are_prefixes() {
    let coarse = build_mesh(2).unwrap();
    let fine = build_mesh(4).unwrap();
    assert_eq!(&fine.positions()[..coarse.vertex_count()], coarse.positions());
    for (f, &corners) in coarse.faces().iter().enumerate() {
        assert_eq!(fine.face_at_level(2, f), corners);
    }
}

#[test]
fn coarse_cells_sit_on_even_lattice_points() {
    let coarse = build_mesh(2).unwrap();
    let fine = build_mesh(3).unwrap();
    let w = coarse.width();
    for k in 0..COMPONENTS {
        for row in 0..2 * w {
            for col in 0..w {
                let v = coarse.grid_to_vertex(k, row, col).unwrap();
                assert_eq!(fine.lattice_vertex(k, 2 * (row + 1), 2 * (col + 1)), Some(v));
            }
        }
    }
}

#[test]
fn mean_component_azimuth_is_gore_centre() {
    let m = build_mesh(4).unwrap();
    let per = m.cells_per_component();
    for k in 0..COMPONENTS {
        let centre = (k as f64 + 0.5) * 72f64.to_radians();
        let (mut sx, mut sz) = (0.0, 0.0);
        for &v in &m.cell_vertices()[k * per..(k + 1) * per] {
            let p = m.positions()[v as usize];
            sx += p.x;
            sz += p.z;
        }
        let mean = libm::atan2(sz, sx);
        let d = libm::remainder(mean - centre, 2.0 * core::f64::consts::PI);
        assert!(d.abs() < 72f64.to_radians() / m.width() as f64, "component {k}: {d}");
    }
}

#[test]
fn locate_recovers_face_and_barycentrics() {
    let m = build_mesh(3).unwrap();
    let mut s = 0x9e37_79b9u64;
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64) / (1u64 << 53) as f64
    };
    for _ in 0..500 {
        let f = (next() * m.face_count() as f64) as usize;
        let (a, b) = (0.05 + 0.9 * next(), next());
        let w = [a * b.max(0.05), a * (1.0 - b).max(0.05), 1.0 - a];
        let w = w.map(|x| x.max(0.02));
        let [pa, pb, pc] = m.faces()[f].map(|v| m.positions()[v as usize]);
        let p = (pa * w[0] + pb * w[1] + pc * w[2]).normalized();
        let (g, bary) = m.locate(p);
        assert_eq!(g, f);
        let q = pa * bary[0] + pb * bary[1] + pc * bary[2];
        assert!((q.normalized() - p).norm() < 1e-12);
        assert!(bary.iter().all(|&x| x > -1e-12));
    }
}

#[test]
fn alpha_strictly_inside_unit_interval() {
    let m = build_mesh(4).unwrap();
    let a = compute_alpha_maps(&m).unwrap();
    assert_eq!(a.values().len(), m.cell_count());
    assert!(a.values().iter().all(|&x| x > 0.0 && x < 1.0));
}

#[test]
fn alpha_is_deterministic_and_gore_symmetric() {
    let m = build_mesh(3).unwrap();
    let a = compute_alpha_maps(&m).unwrap();
    let b = compute_alpha_maps(&build_mesh(3).unwrap()).unwrap();
    assert_eq!(a, b);
    for k in 1..COMPONENTS {
        assert_eq!(a.component(0), a.component(k));
    }
    assert!(gore_asymmetry(&m).unwrap() < 1e-12);
}

#[test]
fn alpha_of_equatorial_vertex_is_half_by_symmetry() {
    // U_0's lattice neighbourhood is symmetric about its meridian only up
    // to the valence-5 repeat, so check a generic interior instead: the
    // average over a component stays near one half.
    let m = build_mesh(4).unwrap();
    let a = compute_alpha_maps(&m).unwrap();
    let mean: f64 = a.component(0).iter().sum::<f64>() / a.component(0).len() as f64;
    assert!((mean - 0.5).abs() < 0.1, "{mean}");
}

/// Vertex at (numerically) the given position, by sorted-key lookup.
fn position_index(m: &MeshLevel) -> Vec<([i64; 3], u32)> {
    let mut idx: Vec<([i64; 3], u32)> = m
        .positions()
        .iter()
        .enumerate()
        .map(|(v, p)| (p.as_array().map(|x| libm::round(x * 1e9) as i64), v as u32))
        .collect();
    idx.sort_unstable();
    idx
}

fn find(idx: &[([i64; 3], u32)], p: crate::geom::Vec3) -> u32 {
    let key = p.as_array().map(|x| libm::round(x * 1e9) as i64);
    idx[idx.binary_search_by(|e| e.0.cmp(&key)).expect("mirror image is a vertex")].1
}

#[test]
fn alpha_mirror_relation() {
    // Reflection through the meridian plane containing U_0 swaps the
    // hexagon's first and sixth neighbours, exchanging psi and phi. The ten
    // valence-5 vertices are excluded (their repeated slot has no mirror),
    // as are vertices on the pole seams, where the lattice turns by 60
    // degrees and the image's slots come from a rotated chart.
    for r in 1..=5 {
        let m = build_mesh(r).unwrap();
        let a = compute_alpha_maps(&m).unwrap();
        let idx = position_index(&m);
        let az = (-18f64).to_radians();
        let normal = crate::geom::Vec3::new(-libm::sin(az), 0.0, libm::cos(az));
        for (c, &v) in m.cell_vertices().iter().enumerate() {
            let (_, row, col) = m.vertex_to_grid(v).unwrap();
            let w = m.width();
            let on_seam = (col == w - 1 && row < w) || row == 2 * w - 1;
            if v < 12 || on_seam {
                continue;
            }
            let p = m.positions()[v as usize];
            let q = p - normal * (2.0 * p.dot(normal));
            let u = find(&idx, q);
            let cu = m.vertex_cell(u).unwrap();
            let (av, au) = (a.values()[c], a.values()[cu]);
            assert!((av + au - 1.0).abs() < 1e-9, "r={r} v={v} u={u}: {av} {au}");
        }
    }
}
