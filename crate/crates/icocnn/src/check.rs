//! Grid-versus-graph comparison used by `oracle check`.

use icocnn_core::mesh::{build_mesh, compute_alpha_maps};
use icocnn_core::oracle::{graph_hexconv_ref, graph_pool_ref, graph_upsample_ref, VertexSignal};
use icocnn_core::sphere::{hexconv, sphere_pool, sphere_upsample, touches_zero_corner};
use icocnn_core::tensor::PoolMode;
use icocnn_core::{HexKernelBank, SphereTensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub level: u32,
    pub seed: u64,
    pub instances: usize,
    /// Cells compared per instance (windows free of padding zeros).
    pub cells_checked: usize,
    pub cells_excluded: usize,
    pub hexconv_max_abs: f64,
    /// `|grid - graph| / max(|graph|, 1)`.
    pub hexconv_max_rel: f64,
    pub pool_max_abs: f64,
    pub upsample_max_abs: f64,
}

/// Compares grid hexconv with the per-vertex oracle on `instances` random
/// `(input, kernel)` pairs, plus pooling and up-sampling once each.
pub fn oracle_check(level: u32, seed: u64, instances: usize, c_in: usize, c_out: usize) -> Result<OracleReport> {
    let mesh = build_mesh(level)?;
    let alphas = compute_alpha_maps(&mesh)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_sphere =
        |level, ch, rng: &mut ChaCha8Rng| SphereTensor::from_fn(level, ch, |_, _, _, _| rng.gen_range(-1.0f32..1.0));
    let w = mesh.width();
    let mut report = OracleReport {
        level,
        seed,
        instances,
        cells_checked: 0,
        cells_excluded: 0,
        hexconv_max_abs: 0.0,
        hexconv_max_rel: 0.0,
        pool_max_abs: 0.0,
        upsample_max_abs: 0.0,
    };
    for _ in 0..instances {
        let x = random_sphere(level, c_in, &mut rng);
        let weights = (0..c_out * c_in * 7).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
        let bias = (0..c_out).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
        let bank = HexKernelBank::new(c_out, c_in, weights, Some(bias))?;
        let grid = VertexSignal::from_sphere(&hexconv(&x, &bank, &alphas)?, &mesh)?;
        let graph = graph_hexconv_ref(&VertexSignal::from_sphere(&x, &mesh)?, &bank, &mesh, &alphas)?;
        let (mut checked, mut excluded) = (0, 0);
        for &v in mesh.cell_vertices() {
            let (_, row, col) = mesh.vertex_to_grid(v)?;
            if touches_zero_corner(w, row, col) {
                excluded += 1;
                continue;
            }
            checked += 1;
            for o in 0..c_out {
                let (g, h) = (grid.get(v, o), graph.get(v, o));
                report.hexconv_max_abs = report.hexconv_max_abs.max((g - h).abs());
                report.hexconv_max_rel = report.hexconv_max_rel.max((g - h).abs() / h.abs().max(1.0));
            }
        }
        report.cells_checked = checked;
        report.cells_excluded = excluded;
    }
    let diff = |a: &VertexSignal, b: &VertexSignal, cells: &[u32]| {
        cells
            .iter()
            .flat_map(|&v| (0..a.channels()).map(move |c| (a.get(v, c) - b.get(v, c)).abs()))
            .fold(0.0, f64::max)
    };
    if level >= 1 {
        let coarse = build_mesh(level - 1)?;
        let x = random_sphere(level, c_in, &mut rng);
        let fine_sig = VertexSignal::from_sphere(&x, &mesh)?;
        let grid = VertexSignal::from_sphere(&sphere_pool(&x, PoolMode::Average)?, &coarse)?;
        let graph = graph_pool_ref(&fine_sig, &mesh, &coarse, PoolMode::Average)?;
        report.pool_max_abs = diff(&grid, &graph, coarse.cell_vertices());

        let x = random_sphere(level - 1, c_in, &mut rng);
        let grid = VertexSignal::from_sphere(&sphere_upsample(&x)?, &mesh)?;
        let graph = graph_upsample_ref(&VertexSignal::from_sphere(&x, &coarse)?, &coarse, &mesh)?;
        report.upsample_max_abs = diff(&grid, &graph, mesh.cell_vertices());
    }
    Ok(report)
}
