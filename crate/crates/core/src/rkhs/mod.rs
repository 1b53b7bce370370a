//! RKHS elements and norms, smoothing approximations, entropy nets and the
//! concentration function.

pub mod approx;
pub mod concentration;
pub mod element;
pub mod entropy;
mod fourier;
pub mod psi;

pub use approx::{holder_approx, ibm_approx, sobolev_rkhs_norm, write_approx_csv, HolderApprox, IbmApprox};
pub use concentration::{concentration_estimate, write_concentration_csv, ConcentrationEstimate};
pub use element::{rkhs_norm_finite, spectral_transform, spectral_transform_element, GridFunction, Representation, RkhsElement};
pub use entropy::{entropy_net, net_covers, write_nets_csv, EntropyNet};
pub use psi::{bump, SmoothingKernelPsi};
