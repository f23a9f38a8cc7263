//! Orientation-aware convolutional operators on icosahedral spherical grids.
//!
//! A level-`r` icosahedral mesh is unfolded into five sheared charts
//! ("components") of `2W x W` cells, `W = 2^r`, which lets hexagonal
//! convolution, pooling and up-sampling run as ordinary dense 2D operators
//! after padding each chart from its neighbours.
//!
//! * [`mesh`]: subdivided icosahedron, chart layout, neighbour table and
//!   north-alignment weights.
//! * [`tensor`]: the handful of dense f32 operators the sphere layer needs.
//! * [`sphere`]: padding, hexagonal convolution, pooling and up-sampling on
//!   five-component [`SphereTensor`](sphere::SphereTensor)s.
//! * [`oracle`]: per-vertex reference implementations over the mesh graph.
//! * [`nn`]: network specifications, parameter counting, weights, forward
//!   inference and perspective kernel transfer.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

mod error;
pub mod geom;
pub mod mesh;
pub mod nn;
pub mod oracle;
pub mod sphere;
pub mod tensor;

pub(crate) use error::shape_err;
pub use error::{Error, Result};
pub use mesh::{AlphaMaps, MeshLevel};
pub use sphere::{HexKernelBank, SphereTensor};
pub use tensor::Tensor;
