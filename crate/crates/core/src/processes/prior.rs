use super::ibm::{ibm_quadrature, MAX_IBM_ORDER};
use super::spectral::{SpectralFamily, StationaryKernel};
use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Strictly increasing evaluation points in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct Grid(Vec<f64>);

pub const DEFAULT_GRID_SIZE: usize = 256;

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if let Some(bad) = points.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(Error::InvalidGrid(format!("point {bad} outside [0, 1]")));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("points are not strictly increasing".into()));
        }
        Ok(Grid(points))
    }

    /// `n` equispaced points including both end points.
    pub fn uniform(n: usize) -> Self {
        assert!(n >= 1);
        if n == 1 {
            return Grid(vec![0.0]);
        }
        Grid((0..n).map(|i| i as f64 / (n - 1) as f64).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid::uniform(DEFAULT_GRID_SIZE)
    }
}

/// The two prior families: a stationary process observed on the stretched
/// time axis `t ↦ W_{t/c}`, or the k-fold integrated Brownian motion on the
/// stretched axis plus an independent random polynomial of degree k with
/// coefficient variance `1/a`.
#[derive(Clone, Debug, PartialEq)]
pub enum GaussianPrior {
    RescaledStationary { kernel: StationaryKernel, c: f64 },
    ModifiedIbm { k: u32, c: f64, a: f64 },
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && !v.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

impl GaussianPrior {
    pub fn stationary(family: SpectralFamily, c: f64) -> Result<Self> {
        check_positive("c", c)?;
        Ok(GaussianPrior::RescaledStationary {
            kernel: StationaryKernel::new(family),
            c,
        })
    }

    pub fn squared_exponential(c: f64) -> Result<Self> {
        Self::stationary(SpectralFamily::Gaussian, c)
    }

    /// `a = f64::INFINITY` drops the polynomial part.
    pub fn modified_ibm(k: u32, c: f64, a: f64) -> Result<Self> {
        check_positive("c", c)?;
        check_positive("a", a)?;
        if k > MAX_IBM_ORDER {
            return Err(Error::InvalidParameter(format!(
                "integration order {k} outside supported range 0..={MAX_IBM_ORDER}"
            )));
        }
        Ok(GaussianPrior::ModifiedIbm { k, c, a })
    }

    /// k-fold integrated Brownian motion without the polynomial part.
    pub fn pure_ibm(k: u32, c: f64) -> Result<Self> {
        Self::modified_ibm(k, c, f64::INFINITY)
    }

    pub fn c(&self) -> f64 {
        match self {
            GaussianPrior::RescaledStationary { c, .. } | GaussianPrior::ModifiedIbm { c, .. } => *c,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            GaussianPrior::RescaledStationary { kernel, .. } => kernel.family().name(),
            GaussianPrior::ModifiedIbm { .. } => "modified_ibm",
        }
    }

    /// `(a, k)` for the integrated family, `None` for stationary priors.
    pub fn ibm_params(&self) -> Option<(f64, u32)> {
        match self {
            GaussianPrior::ModifiedIbm { k, a, .. } => Some((*a, *k)),
            _ => None,
        }
    }

    /// Same family with the scaling constant replaced by `c_new`.
    pub fn rescale(&self, c_new: f64) -> Result<Self> {
        check_positive("c_new", c_new)?;
        Ok(match self {
            GaussianPrior::RescaledStationary { kernel, .. } => GaussianPrior::RescaledStationary {
                kernel: *kernel,
                c: c_new,
            },
            GaussianPrior::ModifiedIbm { k, a, .. } => GaussianPrior::ModifiedIbm {
                k: *k,
                c: c_new,
                a: *a,
            },
        })
    }

    /// Prior covariance of the values at `s` and `t` (both ≥ 0).
    pub fn covariance(&self, s: f64, t: f64) -> f64 {
        match self {
            GaussianPrior::RescaledStationary { kernel, c } => kernel.phi((s - t) / c),
            GaussianPrior::ModifiedIbm { k, c, a } => {
                let (u, v) = (s / c, t / c);
                let ibm = match k {
                    0 => u.min(v),
                    1 => {
                        let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
                        lo * lo * hi / 2.0 - lo * lo * lo / 6.0
                    }
                    _ => ibm_quadrature(*k, u, v).expect("polynomial integrand converges"),
                };
                ibm + polynomial_covariance(*k, *a, s, t)
            }
        }
    }

    pub fn variance(&self, t: f64) -> f64 {
        self.covariance(t, t)
    }
}

/// `(1/a) Σ_{i=0}^{k} (st)^i / (i!)²`.
fn polynomial_covariance(k: u32, a: f64, s: f64, t: f64) -> f64 {
    if a.is_infinite() {
        return 0.0;
    }
    let st = s * t;
    let mut term = 1.0;
    let mut sum = 1.0;
    for i in 1..=k {
        term *= st / (i as f64 * i as f64);
        sum += term;
    }
    sum / a
}

/// Covariance matrix of the prior on `grid`.
pub fn prior_covariance_matrix(prior: &GaussianPrior, grid: &Grid) -> DMatrix<f64> {
    let pts = grid.points();
    let n = pts.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = prior.covariance(pts[i], pts[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::jittered_cholesky;
    use crate::processes::ibm::ibm_covariance;
    use proptest::prelude::*;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(vec![0.0, 0.5, 0.5]).is_err());
        assert!(Grid::new(vec![0.2, 0.1]).is_err());
        assert!(Grid::new(vec![0.0, 1.2]).is_err());
        assert!(Grid::new(vec![]).is_err());
        assert_eq!(Grid::uniform(3).points(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn ibm_matrix_examples() {
        let p = GaussianPrior::modified_ibm(0, 1.0, 1.0).unwrap();
        let m = prior_covariance_matrix(&p, &Grid::new(vec![0.0]).unwrap());
        assert_eq!(m[(0, 0)], 1.0);

        let p = GaussianPrior::modified_ibm(1, 1.0, 4.0).unwrap();
        let m = prior_covariance_matrix(&p, &Grid::new(vec![1.0]).unwrap());
        let expected = ibm_covariance(1, 1.0, 1.0).unwrap() + 0.25 * 2.0;
        assert!((m[(0, 0)] - expected).abs() < 1e-15);
        assert!((m[(0, 0)] - 0.833_333_333_333_333_4).abs() < 1e-12);
    }

    #[test]
    fn stationary_matrix_example() {
        let p = GaussianPrior::squared_exponential(1.0).unwrap();
        let m = prior_covariance_matrix(&p, &Grid::uniform(3));
        let (a, b) = ((-0.25f64).exp(), (-1.0f64).exp());
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, a, b, a, 1.0, a, b, a, 1.0]);
        assert!((m - expected).abs().max() < 1e-15);
    }

    #[test]
    fn rescale_examples() {
        let p = GaussianPrior::squared_exponential(0.3).unwrap();
        let same = p.rescale(0.3).unwrap();
        let g = Grid::uniform(17);
        assert_eq!(prior_covariance_matrix(&p, &g), prior_covariance_matrix(&same, &g));
        let q = p.rescale(0.5).unwrap();
        assert!((q.covariance(0.25, 0.0) - (-0.25f64).exp()).abs() < 1e-15);
        assert!(p.rescale(0.0).is_err());
        assert!(p.rescale(-1.0).is_err());

        let w = GaussianPrior::pure_ibm(0, 1.0).unwrap().rescale(2.0).unwrap();
        assert_eq!(w.covariance(1.0, 1.0), 0.5);
    }

    #[test]
    fn self_similarity_of_integrated_brownian_motion() {
        let g = Grid::uniform(40);
        for k in 0..=3u32 {
            let base = prior_covariance_matrix(&GaussianPrior::pure_ibm(k, 1.0).unwrap(), &g);
            for c in [0.25, 0.7, 3.0] {
                let scaled =
                    prior_covariance_matrix(&GaussianPrior::pure_ibm(k, c).unwrap(), &g);
                let factor = c.powi(-(2 * k as i32 + 1));
                let diff = (scaled - &base * factor).abs().max();
                let size = base.abs().max() * factor;
                assert!(diff <= 1e-10 * size.max(1e-300), "k={k} c={c} diff={diff}");
            }
        }
    }

    #[test]
    fn large_grids_factor_with_bounded_jitter() {
        let g = Grid::uniform(512);
        let priors = [
            GaussianPrior::squared_exponential(1.0).unwrap(),
            GaussianPrior::squared_exponential(0.05).unwrap(),
            GaussianPrior::stationary(SpectralFamily::Laplace, 0.1).unwrap(),
            GaussianPrior::modified_ibm(1, 0.5, 1.0).unwrap(),
            GaussianPrior::pure_ibm(2, 1.0).unwrap(),
        ];
        for p in priors {
            let ch = jittered_cholesky(&prior_covariance_matrix(&p, &g)).unwrap();
            let max_diag = (0..512).map(|i| p.variance(g.points()[i])).fold(0.0, f64::max);
            assert!(ch.jitter <= 1e-6 * max_diag * 1.0001, "{p:?}");
        }
    }

    proptest! {
        #[test]
        fn stationary_covariance_depends_on_lag_only(
            s in 0.0f64..1.0, t in 0.0f64..1.0, h in -5.0f64..5.0, c in 0.05f64..2.0
        ) {
            for fam in [SpectralFamily::Gaussian, SpectralFamily::Laplace] {
                let p = GaussianPrior::stationary(fam, c).unwrap();
                let a = p.covariance(s + h, t + h);
                let b = p.covariance(s, t);
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn covariance_matrices_are_symmetric_psd(c in 0.1f64..2.0, k in 0u32..3, a in 0.1f64..10.0) {
            let g = Grid::uniform(33);
            for p in [
                GaussianPrior::squared_exponential(c).unwrap(),
                GaussianPrior::modified_ibm(k, c, a).unwrap(),
            ] {
                let m = prior_covariance_matrix(&p, &g);
                prop_assert_eq!(&m, &m.transpose());
                prop_assert!(jittered_cholesky(&m).is_ok());
            }
        }
    }
}
