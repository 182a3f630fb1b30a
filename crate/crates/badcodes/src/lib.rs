//! Bad codes for relay and interference channels: erasure algebra, LDPC
//! ensembles, belief propagation on the BEC, (simultaneous) density
//! evolution, achievable-rate bounds, Gaussian interference benchmarks and
//! degree-distribution optimization.

pub mod bec_bp;
pub mod benchmarks;
pub mod density_evolution;
pub mod ensemble;
pub mod erasure;
pub mod error;
pub mod info_bounds;
pub mod interference;
pub mod llr_density;
pub mod optimizer;
pub mod parallel;
pub mod quadrature;
pub mod relay;
pub mod rng;

pub use ensemble::{EdgeDistribution, TannerGraph};
pub use erasure::{ErasureWord, Sym};
pub use error::{Error, Result};
pub use rng::Stream;
