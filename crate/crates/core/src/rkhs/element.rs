use crate::error::{Error, Result};
use crate::processes::{GaussianPrior, Grid, StationaryKernel};
use crate::quad;
use num_complex::Complex64;

/// Tabulated function, optionally with derivatives and an RKHS norm bound.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `derivatives[j]` holds the `(j+1)`-th derivative on the grid.
    pub derivatives: Vec<Vec<f64>>,
    pub norm_bound: Option<f64>,
}

impl GridFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::LengthMismatch(grid.len(), values.len()));
        }
        Ok(GridFunction {
            grid,
            values,
            derivatives: Vec::new(),
            norm_bound: None,
        })
    }

    pub fn with_derivatives(mut self, derivatives: Vec<Vec<f64>>) -> Result<Self> {
        for d in &derivatives {
            if d.len() != self.grid.len() {
                return Err(Error::LengthMismatch(self.grid.len(), d.len()));
            }
        }
        self.derivatives = derivatives;
        Ok(self)
    }

    /// `j`-th derivative table, `j = 0` being the values.
    pub fn derivative(&self, j: usize) -> Option<&[f64]> {
        if j == 0 {
            Some(&self.values)
        } else {
            self.derivatives.get(j - 1).map(|v| v.as_slice())
        }
    }

    /// Linear interpolation, constant beyond the end points.
    pub fn interpolate(&self, t: f64) -> f64 {
        interpolate(&self.grid, &self.values, t)
    }

    pub fn sup_distance(&self, other: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn interpolate(grid: &[f64], values: &[f64], t: f64) -> f64 {
    let n = grid.len();
    if t <= grid[0] {
        return values[0];
    }
    if t >= grid[n - 1] {
        return values[n - 1];
    }
    let i = grid.partition_point(|&g| g <= t) - 1;
    let w = (t - grid[i]) / (grid[i + 1] - grid[i]);
    values[i] * (1.0 - w) + values[i + 1] * w
}

#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    /// `Σ coeffs[i] K(points[i], ·)`.
    KernelSections { points: Vec<f64>, coeffs: Vec<f64> },
    /// Real part of `t ↦ Σ weights[i] e^{−itλ_i} h_i`, the weights carrying
    /// the density of `μ_c`.
    SpectralTransform {
        nodes: Vec<f64>,
        weights: Vec<f64>,
        h: Vec<Complex64>,
    },
    GridFunction(GridFunction),
}

/// An element of the RKHS of `prior`.
#[derive(Clone, Debug, PartialEq)]
pub struct RkhsElement {
    pub representation: Representation,
    pub prior: GaussianPrior,
}

impl RkhsElement {
    pub fn kernel_sections(prior: &GaussianPrior, points: Vec<f64>, coeffs: Vec<f64>) -> Result<Self> {
        if points.len() != coeffs.len() {
            return Err(Error::LengthMismatch(points.len(), coeffs.len()));
        }
        Ok(RkhsElement {
            representation: Representation::KernelSections { points, coeffs },
            prior: prior.clone(),
        })
    }

    /// RKHS norm; for grid functions the stored bound.
    pub fn norm(&self) -> Result<f64> {
        match &self.representation {
            Representation::KernelSections { points, coeffs } => {
                rkhs_norm_finite(&self.prior, points, coeffs)
            }
            Representation::SpectralTransform { weights, h, .. } => Ok(weights
                .iter()
                .zip(h)
                .map(|(w, h)| w * h.norm_sqr())
                .sum::<f64>()
                .sqrt()),
            Representation::GridFunction(g) => g
                .norm_bound
                .ok_or_else(|| Error::InvalidParameter("grid function carries no norm bound".into())),
        }
    }

    /// Multiply by a scalar.
    pub fn scaled(&self, factor: f64) -> Self {
        let representation = match &self.representation {
            Representation::KernelSections { points, coeffs } => Representation::KernelSections {
                points: points.clone(),
                coeffs: coeffs.iter().map(|c| c * factor).collect(),
            },
            Representation::SpectralTransform { nodes, weights, h } => {
                Representation::SpectralTransform {
                    nodes: nodes.clone(),
                    weights: weights.clone(),
                    h: h.iter().map(|v| v * factor).collect(),
                }
            }
            Representation::GridFunction(g) => {
                let mut g = g.clone();
                g.values.iter_mut().for_each(|v| *v *= factor);
                g.derivatives
                    .iter_mut()
                    .for_each(|d| d.iter_mut().for_each(|v| *v *= factor));
                g.norm_bound = g.norm_bound.map(|b| b * factor.abs());
                Representation::GridFunction(g)
            }
        };
        RkhsElement {
            representation,
            prior: self.prior.clone(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.derivative(0, t).expect("values are always available")
    }

    /// `j`-th derivative at `t` when it is available in closed form.
    pub fn derivative(&self, j: usize, t: f64) -> Option<f64> {
        match &self.representation {
            Representation::KernelSections { points, coeffs } => match &self.prior {
                GaussianPrior::RescaledStationary { kernel, c } => Some(
                    points
                        .iter()
                        .zip(coeffs)
                        .map(|(s, a)| a * kernel.phi_derivative(j, (t - s) / c))
                        .sum::<f64>()
                        / c.powi(j as i32),
                ),
                _ if j == 0 => Some(
                    points
                        .iter()
                        .zip(coeffs)
                        .map(|(s, a)| a * self.prior.covariance(*s, t))
                        .sum(),
                ),
                _ => None,
            },
            Representation::SpectralTransform { nodes, weights, h } => {
                let mut acc = 0.0;
                for ((l, w), hv) in nodes.iter().zip(weights).zip(h) {
                    let f = Complex64::new(0.0, -l).powu(j as u32) * Complex64::from_polar(1.0, -t * l);
                    acc += w * (f * hv).re;
                }
                Some(acc)
            }
            Representation::GridFunction(g) => {
                let table = g.derivative(j)?;
                Some(interpolate(&g.grid, table, t))
            }
        }
    }

    pub fn to_grid_function(&self, grid: &Grid) -> GridFunction {
        let pts = grid.points().to_vec();
        let values = pts.iter().map(|&t| self.eval(t)).collect();
        GridFunction {
            grid: pts,
            values,
            derivatives: Vec::new(),
            norm_bound: self.norm().ok(),
        }
    }
}

/// `sqrt(aᵀ K a)` for the covariance matrix `K` of the prior on `points`.
pub fn rkhs_norm_finite(prior: &GaussianPrior, points: &[f64], coeffs: &[f64]) -> Result<f64> {
    if points.len() != coeffs.len() {
        return Err(Error::LengthMismatch(points.len(), coeffs.len()));
    }
    let n = points.len();
    let mut q = 0.0;
    for i in 0..n {
        q += coeffs[i] * coeffs[i] * prior.covariance(points[i], points[i]);
        for j in 0..i {
            q += 2.0 * coeffs[i] * coeffs[j] * prior.covariance(points[i], points[j]);
        }
    }
    if q < -1e-10 {
        return Err(Error::NegativeQuadraticForm(q));
    }
    Ok(q.max(0.0).sqrt())
}

const MAX_TRANSFORM_PANELS: usize = 1 << 14;

/// The element `F_c h` of the RKHS of a rescaled stationary prior, with the
/// quadrature over `μ_c` refined until the values on `grid` and the norm
/// change by less than 1e-8.
pub fn spectral_transform_element<H>(prior: &GaussianPrior, h: H, grid: &Grid) -> Result<RkhsElement>
where
    H: Fn(f64) -> Complex64,
{
    let (kernel, c) = match prior {
        GaussianPrior::RescaledStationary { kernel, c } => (*kernel, *c),
        _ => {
            return Err(Error::InvalidParameter(
                "spectral transforms need a stationary prior".into(),
            ))
        }
    };
    let build = |panels: usize| -> RkhsElement {
        let (nodes, weights, h) = transform_nodes(&kernel, c, &h, panels);
        RkhsElement {
            representation: Representation::SpectralTransform { nodes, weights, h },
            prior: prior.clone(),
        }
    };
    let summary = |e: &RkhsElement| -> Vec<f64> {
        let mut v: Vec<f64> = grid.points().iter().map(|&t| e.eval(t)).collect();
        v.push(e.norm().unwrap_or(f64::NAN));
        v
    };
    let mut panels = 16;
    let mut prev = build(panels);
    let mut prev_summary = summary(&prev);
    while panels < MAX_TRANSFORM_PANELS {
        panels *= 2;
        let next = build(panels);
        let next_summary = summary(&next);
        let diff = prev_summary
            .iter()
            .zip(&next_summary)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if !diff.is_finite() {
            break;
        }
        if diff < 1e-8 {
            return Ok(next);
        }
        prev = next;
        prev_summary = next_summary;
    }
    let _ = prev;
    Err(Error::QuadratureDivergence(format!(
        "spectral transform did not settle with {panels} panels"
    )))
}

fn transform_nodes<H: Fn(f64) -> Complex64>(
    kernel: &StationaryKernel,
    c: f64,
    h: &H,
    panels: usize,
) -> (Vec<f64>, Vec<f64>, Vec<Complex64>) {
    // μ_c(|λ| > L) = μ(|λ| > cL)
    let l = kernel.spectral.tail_radius(1e-12) / c;
    let (nodes, mut weights) = quad::gl_panel_nodes(-l, l, panels);
    for (w, &x) in weights.iter_mut().zip(&nodes) {
        *w *= c * kernel.spectral.density(c * x);
    }
    let hv = nodes.iter().map(|&x| h(x)).collect();
    (nodes, weights, hv)
}

/// Real part of `F_c h` on `grid`, with `norm_bound = ‖h‖_{L₂(μ_c)}`.
pub fn spectral_transform<H>(prior: &GaussianPrior, h: H, grid: &Grid) -> Result<GridFunction>
where
    H: Fn(f64) -> Complex64,
{
    Ok(spectral_transform_element(prior, h, grid)?.to_grid_function(grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn se(c: f64) -> GaussianPrior {
        GaussianPrior::squared_exponential(c).unwrap()
    }

    #[test]
    fn norm_examples() {
        assert_eq!(rkhs_norm_finite(&se(1.0), &[0.4], &[1.0]).unwrap(), 1.0);
        assert_eq!(rkhs_norm_finite(&se(1.0), &[0.1, 0.7], &[0.0, 0.0]).unwrap(), 0.0);
        let v = rkhs_norm_finite(&se(1.0), &[0.0, 0.1], &[1.0, -1.0]).unwrap();
        let oracle = (2.0 - 2.0 * (-0.01f64).exp()).sqrt();
        assert!((v - oracle).abs() < 1e-12);
        assert!(matches!(
            rkhs_norm_finite(&se(1.0), &[0.0, 0.1], &[1.0]),
            Err(Error::LengthMismatch(2, 1))
        ));
    }

    #[test]
    fn transform_of_constant_is_the_covariance_at_zero_lag() {
        let p = se(0.5);
        let g = Grid::uniform(11);
        let f = spectral_transform(&p, |_| Complex64::new(1.0, 0.0), &g).unwrap();
        assert!((f.values[0] - 1.0).abs() < 1e-8);
        for (t, v) in g.points().iter().zip(&f.values) {
            assert!((v - (-(t / 0.5) * (t / 0.5)).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn transform_of_exponential_is_kernel_section() {
        for fam in [crate::processes::SpectralFamily::Gaussian, crate::processes::SpectralFamily::Laplace] {
            let p = GaussianPrior::stationary(fam, 0.3).unwrap();
            let s = 0.35;
            let g = Grid::uniform(10);
            let f = spectral_transform(&p, |l| Complex64::from_polar(1.0, s * l), &g).unwrap();
            for (t, v) in g.points().iter().zip(&f.values) {
                assert!((v - p.covariance(s, *t)).abs() < 1e-6, "{fam:?} t={t}");
            }
            assert!((f.norm_bound.unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn isometry_on_random_sections() {
        use rand::Rng;
        let mut rng = crate::rng::stream(17);
        let g = Grid::uniform(5);
        for _ in 0..20 {
            let s: f64 = rng.random();
            let c: f64 = rng.random_range(0.1..1.0);
            let p = se(c);
            let e = spectral_transform_element(&p, |l| Complex64::from_polar(1.0, s * l), &g).unwrap();
            let direct = rkhs_norm_finite(&p, &[s], &[1.0]).unwrap();
            assert!((e.norm().unwrap() - direct).abs() < 1e-6);
        }
    }

    #[test]
    fn derivatives_of_transform_match_kernel_sections() {
        let p = se(0.4);
        let s = 0.2;
        let e = spectral_transform_element(&p, |l| Complex64::from_polar(1.0, s * l), &Grid::uniform(5)).unwrap();
        let k = RkhsElement::kernel_sections(&p, vec![s], vec![1.0]).unwrap();
        for j in 0..4 {
            for t in [0.0, 0.5, 0.9] {
                let a = e.derivative(j, t).unwrap();
                let b = k.derivative(j, t).unwrap();
                assert!((a - b).abs() < 1e-6 * (1.0 + b.abs()), "j={j} t={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn stationary_transform_rejects_integrated_prior() {
        let p = GaussianPrior::pure_ibm(1, 1.0).unwrap();
        assert!(spectral_transform(&p, |_| Complex64::new(1.0, 0.0), &Grid::uniform(4)).is_err());
    }

    proptest! {
        #[test]
        fn reproducing_property(
            pts in proptest::collection::vec(0.0f64..1.0, 1..6),
            seed in 0u64..1000,
            t in 0.0f64..1.0,
            c in 0.1f64..1.5,
        ) {
            use rand::Rng;
            let mut rng = crate::rng::stream(seed);
            let coeffs: Vec<f64> = pts.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
            let p = se(c);
            let f = RkhsElement::kernel_sections(&p, pts.clone(), coeffs.clone()).unwrap();
            // ⟨f, K(t, ·)⟩ by polarisation of the quadratic form
            let mut all = pts.clone();
            all.push(t);
            let mut plus = coeffs.clone();
            plus.push(1.0);
            let mut minus = coeffs.clone();
            minus.push(-1.0);
            let np = rkhs_norm_finite(&p, &all, &plus).unwrap();
            let nm = rkhs_norm_finite(&p, &all, &minus).unwrap();
            let inner = (np * np - nm * nm) / 4.0;
            prop_assert!((inner - f.eval(t)).abs() < 1e-10);
        }
    }
}
