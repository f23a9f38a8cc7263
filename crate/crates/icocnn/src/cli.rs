//! The `icocnn` command. Every subcommand returns a JSON summary; the binary
//! prints it and exits 0, or prints the error and exits 1.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use icocnn_core::mesh::{build_mesh, edge_count, face_count, vertex_count};
use icocnn_core::nn::{
    audit, build_hexrunet, build_hexrunet_c, build_hexunet, count_params, count_params_with, forward, Convention,
    NetworkSpec, Output, WeightStore,
};
use serde_json::{json, Value};

use crate::cache;
use crate::check::oracle_check;
use crate::equirect::{default_equirect_height, equirect_to_sphere, sphere_to_equirect, EquirectImage, Sampling};
use crate::error::{format_err, Result};
use crate::format::{load_sphere, load_tensor, save_alpha, save_sphere, save_tensor, MeshDump};
use crate::imageio::{read_pnm, write_pnm, write_ppm};
use crate::unfold::{export_unfolded, ChannelMap};
use crate::weights::{import_perspective, load_weights, save_weights};

#[derive(Debug, Parser)]
#[command(name = "icocnn", version, about = "Icosahedral spherical CNN tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mesh statistics and exports.
    #[command(subcommand)]
    Mesh(MeshCmd),
    /// Equirectangular images to and from sphere tensors.
    #[command(subcommand)]
    Resample(ResampleCmd),
    /// Network construction, weights and inference.
    #[command(subcommand)]
    Net(NetCmd),
    /// Grid operators against the per-vertex reference.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Images of sphere tensors.
    #[command(subcommand)]
    Viz(VizCmd),
}

#[derive(Debug, Subcommand)]
pub enum MeshCmd {
    /// Vertex, face and edge counts of a level.
    Info {
        #[arg(long)]
        level: u32,
    },
    /// Writes the blend weights of a level as a `.ten` file.
    Alpha {
        #[arg(long)]
        level: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Writes positions, neighbour table and grid map.
    Dump {
        #[arg(long)]
        level: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Mode {
    Bilinear,
    Nearest,
}

impl From<Mode> for Sampling {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Bilinear => Sampling::Bilinear,
            Mode::Nearest => Sampling::Nearest,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum ResampleCmd {
    /// Samples an equirectangular image (`.pgm`, `.ppm` or `.ten` of shape
    /// `H x 2H x C`) at every vertex.
    ToSphere {
        #[arg(long)]
        level: u32,
        #[arg(long, value_enum, default_value = "bilinear")]
        mode: Mode,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Renders a sphere tensor as an equirectangular `.ten`, `.pgm` or
    /// `.ppm`.
    ToEquirect {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        height: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Arch {
    HexrunetC,
    Hexrunet,
    Hexunet,
}

#[derive(Debug, Clone, Args)]
pub struct ArchArgs {
    #[arg(long, value_enum)]
    pub arch: Arch,
    /// Base width of the residual U-Net.
    #[arg(long, default_value_t = 16)]
    pub base: usize,
    #[arg(long = "in-ch")]
    pub in_ch: Option<usize>,
    #[arg(long = "out-ch")]
    pub out_ch: Option<usize>,
    /// Input level; defaults to the architecture's own.
    #[arg(long)]
    pub level: Option<u32>,
}

impl ArchArgs {
    pub fn spec(&self) -> Result<NetworkSpec> {
        let spec = match self.arch {
            Arch::HexrunetC => {
                if self.in_ch.is_some_and(|c| c != 1) || self.out_ch.is_some_and(|c| c != 10) {
                    return Err(format_err("architecture", "hexrunet-c has 1 input and 10 output channels"));
                }
                build_hexrunet_c()
            }
            Arch::Hexrunet => build_hexrunet(self.in_ch.unwrap_or(4), self.base, self.out_ch.unwrap_or(13)),
            Arch::Hexunet => build_hexunet(self.in_ch.unwrap_or(3), self.out_ch.unwrap_or(13)),
        };
        match self.level {
            Some(r) if r != spec.input_level() => Ok(spec.at_level(r)?),
            _ => Ok(spec),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum NetCmd {
    /// Trainable parameter count, optionally per layer.
    Params {
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long)]
        audit: bool,
    },
    /// Writes seeded random weights.
    Init {
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs a network on a sphere tensor.
    Forward {
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Sphere tensor output, or a `.ten` of logits for the classifier.
        #[arg(long)]
        out: PathBuf,
    },
    /// Converts 3x3 perspective kernels in a weight directory to hexagonal
    /// taps.
    Transfer {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum OracleCmd {
    /// Maximum deviation between grid and per-vertex operators.
    Check {
        #[arg(long)]
        level: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        instances: usize,
        #[arg(long = "in-ch", default_value_t = 3)]
        in_ch: usize,
        #[arg(long = "out-ch", default_value_t = 2)]
        out_ch: usize,
        /// Relative tolerance for success.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum VizCmd {
    /// The five components side by side as a PPM.
    Unfold {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0, conflicts_with = "argmax")]
        channel: usize,
        /// Treat the channel as integer class labels.
        #[arg(long)]
        labels: bool,
        /// Colour each cell by its highest channel.
        #[arg(long)]
        argmax: bool,
        #[arg(long)]
        min: Option<f32>,
        #[arg(long)]
        max: Option<f32>,
    },
}

pub fn run(cli: &Cli) -> Result<Value> {
    match &cli.command {
        Command::Mesh(c) => mesh(c),
        Command::Resample(c) => resample(c),
        Command::Net(c) => net(c),
        Command::Oracle(c) => oracle(c),
        Command::Viz(c) => viz(c),
    }
}

fn check_level(level: u32) -> Result<()> {
    if level > icocnn_core::mesh::MAX_LEVEL {
        return Err(icocnn_core::Error::LevelOutOfRange { level, max: icocnn_core::mesh::MAX_LEVEL }.into());
    }
    Ok(())
}

fn mesh(c: &MeshCmd) -> Result<Value> {
    match c {
        MeshCmd::Info { level } => {
            check_level(*level)?;
            let w = 1usize << level;
            Ok(json!({
                "level": level,
                "vertices": vertex_count(*level),
                "faces": face_count(*level),
                "edges": edge_count(*level),
                "components": 5,
                "component_shape": [2 * w, w],
            }))
        }
        MeshCmd::Alpha { level, out } => {
            let alphas = cache::alpha_maps(*level)?;
            save_alpha(out, &alphas)?;
            let (lo, hi) =
                alphas.values().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            Ok(json!({ "level": level, "out": out, "min": lo, "max": hi }))
        }
        MeshCmd::Dump { level, out } => {
            check_level(*level)?;
            let dump = MeshDump::from_mesh(&build_mesh(*level)?);
            dump.save(out)?;
            Ok(json!({ "level": level, "out": out, "vertices": dump.positions.len() }))
        }
    }
}

fn extension(path: &Path) -> String {
    path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase()
}

fn load_equirect(path: &Path) -> Result<EquirectImage> {
    match extension(path).as_str() {
        "ten" => {
            let t = load_tensor(path)?;
            let &[h, w, c] = t.shape() else {
                return Err(format_err("equirectangular tensor", format!("shape {:?} is not H x 2H x C", t.shape())));
            };
            EquirectImage::new(h, w, c, t.data().to_vec())
        }
        _ => read_pnm(path),
    }
}

fn resample(c: &ResampleCmd) -> Result<Value> {
    match c {
        ResampleCmd::ToSphere { level, mode, input, out } => {
            check_level(*level)?;
            let img = load_equirect(input)?;
            let mesh = build_mesh(*level)?;
            let t = equirect_to_sphere(&img, &mesh, (*mode).into());
            save_sphere(out, &t)?;
            Ok(json!({ "level": level, "channels": t.channels(), "input": [img.height(), img.width()], "out": out }))
        }
        ResampleCmd::ToEquirect { input, out, height } => {
            let t = load_sphere(input)?;
            let mesh = build_mesh(t.level())?;
            let height = height.unwrap_or_else(|| default_equirect_height(t.level()));
            let img = sphere_to_equirect(&t, &mesh, height)?;
            match extension(out).as_str() {
                "ten" => save_tensor(
                    out,
                    &icocnn_core::Tensor::new(vec![img.height(), img.width(), img.channels()], img.data().to_vec())?,
                )?,
                _ => write_pnm(out, &img)?,
            }
            Ok(json!({ "level": t.level(), "height": height, "width": 2 * height, "out": out }))
        }
    }
}

fn net(c: &NetCmd) -> Result<Value> {
    match c {
        NetCmd::Params { arch, audit: with_audit } => {
            let spec = arch.spec()?;
            let mut v = json!({
                "network": spec.name,
                "input_level": spec.input_level(),
                "params": count_params(&spec),
                "params_dense_masks": count_params_with(&spec, &Convention::DENSE_MASKS),
            });
            if *with_audit {
                let rows: Vec<Value> = audit(&spec, &Convention::DENSE_MASKS)
                    .into_iter()
                    .map(|r| {
                        json!({
                            "index": r.index, "name": r.name, "kind": r.kind, "level": r.level,
                            "channels": [r.channels.0, r.channels.1, r.channels.2],
                            "params": r.canonical, "params_dense_masks": r.alternative,
                        })
                    })
                    .collect();
                v["layers"] = Value::Array(rows);
            }
            Ok(v)
        }
        NetCmd::Init { arch, seed, out } => {
            let spec = arch.spec()?;
            let store = WeightStore::random(&spec, *seed);
            save_weights(out, &spec, &store)?;
            Ok(json!({ "network": spec.name, "seed": seed, "tensors": store.len(), "out": out }))
        }
        NetCmd::Forward { arch, weights, input, out } => {
            let spec = arch.spec()?;
            let (_, store) = load_weights(weights)?;
            store.check(&spec)?;
            let x = load_sphere(input)?;
            let alphas = cache::alpha_set(&spec.levels())?;
            let start = Instant::now();
            let y = forward(&spec, &store, &x, &alphas)?;
            let seconds = start.elapsed().as_secs_f64();
            match y {
                Output::Sphere(t) => {
                    save_sphere(out, &t)?;
                    Ok(
                        json!({ "network": spec.name, "level": t.level(), "channels": t.channels(), "seconds": seconds, "out": out }),
                    )
                }
                Output::Logits(l) => {
                    save_tensor(out, &icocnn_core::Tensor::new(vec![l.len()], l.clone())?)?;
                    Ok(json!({ "network": spec.name, "logits": l, "seconds": seconds, "out": out }))
                }
            }
        }
        NetCmd::Transfer { input, out } => {
            let n = import_perspective(input, out)?;
            Ok(json!({ "converted": n, "out": out }))
        }
    }
}

fn oracle(c: &OracleCmd) -> Result<Value> {
    let OracleCmd::Check { level, seed, instances, in_ch, out_ch, tol } = c;
    check_level(*level)?;
    let report = oracle_check(*level, *seed, *instances, *in_ch, *out_ch)?;
    let exact = report.pool_max_abs == 0.0 && report.upsample_max_abs <= 1e-6;
    let mut v = serde_json::to_value(&report)?;
    v["pass"] = Value::Bool(report.hexconv_max_rel <= *tol && exact);
    if report.hexconv_max_rel > *tol || !exact {
        return Err(format_err("oracle check", format!("deviation above tolerance: {v}")));
    }
    Ok(v)
}

fn viz(c: &VizCmd) -> Result<Value> {
    let VizCmd::Unfold { input, out, channel, labels, argmax, min, max } = c;
    let t = load_sphere(input)?;
    let map = if *argmax {
        ChannelMap::Argmax
    } else if *labels {
        ChannelMap::Labels { channel: *channel }
    } else {
        let values = (0..5).flat_map(|k| {
            let t = &t;
            (0..2 * t.width()).flat_map(move |r| (0..t.width()).map(move |col| t.get(k, *channel, r, col)))
        });
        let (lo, hi) = if *channel < t.channels() {
            values.fold((f32::INFINITY, f32::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)))
        } else {
            (0.0, 1.0)
        };
        ChannelMap::Gray { channel: *channel, min: min.unwrap_or(lo), max: max.unwrap_or(hi) }
    };
    let img = export_unfolded(&t, &map)?;
    write_ppm(out, &img)?;
    Ok(json!({ "level": t.level(), "width": img.width(), "height": img.height(), "out": out }))
}
