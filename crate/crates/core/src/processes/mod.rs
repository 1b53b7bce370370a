//! Prior families, their covariance kernels and grid sampling.

pub mod ibm;
pub mod prior;
pub mod sampling;
pub mod spectral;

pub use ibm::{ibm_covariance, MAX_IBM_ORDER};
pub use prior::{prior_covariance_matrix, GaussianPrior, Grid, DEFAULT_GRID_SIZE};
pub use sampling::{sample_paths, write_paths_csv, PathSample, PriorSampler};
pub use spectral::{
    spectral_density, stationary_covariance, SpectralFamily, SpectralMeasure, StationaryKernel,
};
