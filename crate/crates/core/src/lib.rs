//! Decoherence of a qubit coupled to spin-chain baths.

pub mod compiler;
pub mod echo;
pub mod ed;
pub mod entanglement;
pub mod error;
pub mod freefermion;
mod linalg;
pub mod model;
pub mod perturbation;
pub mod scalar;
pub mod studies;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Bath parameters in double precision.
pub type Chain = model::ChainSpec<f64>;
/// Qubit-bath coupling in double precision.
pub type Coupling = model::CouplingSpec<f64>;
pub type Form = model::QuadraticForm<f64>;
pub type Basis = freefermion::BogoliubovBasis<f64>;
pub type Series = echo::EchoSeries<f64>;
pub type State = ed::DenseState<f64>;
pub type Hamiltonian = ed::DenseHamiltonian<f64>;
