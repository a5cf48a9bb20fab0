// SPDX-License-Identifier: MIT OR Apache-2.0

//! Synthetic functional time series with planted changepoints.
//!
//! Curves are `Z_t = μ_t + ε_t` where `ε_t` is a zero-mean Gaussian or
//! Student-t process with Matérn covariance, optionally passed through
//! `log(1 + e^z)` to make them skewed. Consecutive segments differ in exactly
//! one of the mean function, the variance or the range.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::projections::CovarianceMatrix;
use crate::series::{uniform_grid, FunctionalSeries};

/// Grid resolution used when a scenario does not set one.
pub const DEFAULT_GRID_SIZE: usize = 50;
/// Degrees of freedom of the t-process.
pub const DEFAULT_DF: f64 = 3.0;

/// Candidate variances for variance-change scenarios.
pub const VARIANCE_GRID: [f64; 10] = [0.50, 0.66, 0.83, 1.00, 1.16, 1.33, 1.50, 1.66, 1.83, 2.00];
/// Candidate ranges for range-change scenarios.
pub const RANGE_GRID: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

const PSD_TOLERANCE: f64 = 1e-8;

/// Modified Bessel function of the second kind `K_ν(x)` for `x > 0`.
///
/// Uses `K_ν(x) = ∫_0^∞ exp(−x cosh t) cosh(νt) dt` with the trapezoid rule,
/// which converges geometrically for this analytic, doubly-exponentially
/// decaying integrand.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    assert!(x > 0.0, "K_nu is evaluated for positive arguments only");
    let nu = nu.abs();
    let h = 0.02;
    let mut sum = 0.5 * (-x).exp();
    let mut t: f64 = h;
    loop {
        let term = (-x * t.cosh() + nu * t).exp() * 0.5 * (1.0 + (-2.0 * nu * t).exp());
        sum += term;
        if term < 1e-18 * sum && x * t.cosh() > nu * t + 1.0 {
            break;
        }
        t += h;
    }
    sum * h
}

/// Matérn parameters `σ²`, range `r` and smoothness `ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaternParams {
    pub sigma2: f64,
    pub range: f64,
    pub smoothness: f64,
}

impl MaternParams {
    pub fn new(sigma2: f64, range: f64, smoothness: f64) -> Result<Self> {
        let p = Self { sigma2, range, smoothness };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma2", self.sigma2), ("range", self.range), ("smoothness", self.smoothness)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidScenario(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Kernel at distance `d ≥ 0`:
    /// `σ² √π r^{2ν} / (2^{ν−1} Γ(ν + ½)) · (d/r)^ν K_ν(d/r)`.
    pub fn kernel(&self, d: f64) -> f64 {
        let nu = self.smoothness;
        let scale = self.sigma2 * std::f64::consts::PI.sqrt() * self.range.powf(2.0 * nu);
        if d == 0.0 {
            // (x)^ν K_ν(x) → Γ(ν) 2^{ν−1} as x → 0.
            return scale * gamma(nu) / gamma(nu + 0.5);
        }
        let x = d / self.range;
        scale / (2f64.powf(nu - 1.0) * gamma(nu + 0.5)) * x.powf(nu) * bessel_k(nu, x)
    }
}

/// Matérn covariance evaluated on all grid pairs.
pub fn matern_cov(grid: &[f64], params: &MaternParams) -> CovarianceMatrix<f64> {
    let m = grid.len();
    let mut values = vec![0.0; m * m];
    for j in 0..m {
        for k in j..m {
            let v = params.kernel((grid[j] - grid[k]).abs());
            values[j * m + k] = v;
            values[k * m + j] = v;
        }
    }
    CovarianceMatrix::new(values, m).expect("Matérn matrix is symmetric")
}

/// Square-root factor `L` with `L Lᵀ = Σ`, built from the eigendecomposition so
/// semidefinite matrices are accepted.
#[derive(Debug, Clone)]
pub struct GaussianFactor {
    factor: DMatrix<f64>,
}

impl GaussianFactor {
    pub fn new(cov: &CovarianceMatrix<f64>) -> Result<Self> {
        let m = cov.dim();
        let matrix = DMatrix::from_row_slice(m, m, cov.as_slice());
        let eig = SymmetricEigen::new(matrix);
        let largest = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let smallest = eig.eigenvalues.iter().fold(f64::INFINITY, |a, v| a.min(*v));
        if smallest < -PSD_TOLERANCE * largest.max(1.0) {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue: smallest });
        }
        let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
        let factor = eig.eigenvectors * DMatrix::from_diagonal(&roots);
        Ok(Self { factor })
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    /// Zero-mean draw `L z`.
    pub fn sample_zero_mean<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let m = self.dim();
        let z: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        (0..m)
            .map(|i| (0..m).map(|j| self.factor[(i, j)] * z[j]).sum())
            .collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, mean: &[f64], rng: &mut R) -> Vec<f64> {
        self.sample_zero_mean(rng)
            .into_iter()
            .zip(mean)
            .map(|(e, mu)| mu + e)
            .collect()
    }

    /// Multivariate-t draw with scale matrix `Σ`: `mean + L z · sqrt(df / χ²_df)`.
    pub fn sample_t<R: Rng + ?Sized>(&self, mean: &[f64], df: f64, rng: &mut R) -> Vec<f64> {
        let e = self.sample_zero_mean(rng);
        let chi2: f64 = ChiSquared::new(df).expect("positive df").sample(rng);
        let scale = (df / chi2).sqrt();
        e.into_iter().zip(mean).map(|(e, mu)| mu + e * scale).collect()
    }
}

/// One Gaussian-process draw `mean + L z`.
pub fn sample_gp<R: Rng + ?Sized>(mean: &[f64], cov: &CovarianceMatrix<f64>, rng: &mut R) -> Result<Vec<f64>> {
    Ok(GaussianFactor::new(cov)?.sample(mean, rng))
}

/// One t-process draw; `cov` is the scale matrix, not the covariance.
pub fn sample_tp<R: Rng + ?Sized>(
    mean: &[f64],
    cov: &CovarianceMatrix<f64>,
    df: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(df > 0.0) {
        return Err(Error::InvalidScenario(format!("df must be positive, got {df}")));
    }
    Ok(GaussianFactor::new(cov)?.sample_t(mean, df, rng))
}

/// `log(1 + e^z)` elementwise without overflow.
pub fn log_sum_transform(z: &[f64]) -> Vec<f64> {
    z.iter().map(|v| softplus(*v)).collect()
}

fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean functions ψ₁…ψ₅.
pub fn psi(index: u8, t: f64) -> f64 {
    use std::f64::consts::PI;
    let psi2 = |t: f64| 0.5 - 100.0 * (t - 0.1) * (t - 0.3) * (t - 0.5) * (t - 0.9);
    match index {
        1 => 5.0 * t * t - (1.0 - 20.0 * t).exp(),
        2 => psi2(t),
        3 => psi2(t) + 0.8 * (1.0 + 10.0 * PI * t).sin(),
        4 => 1.0 + 3.0 * t * t - 5.0 * t.powi(3) + 0.6 * (1.0 + 10.0 * PI * t).sin(),
        5 => 1.0 + 3.0 * t * t - 5.0 * t.powi(3),
        other => panic!("psi index must be in 1..=5, got {other}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanFunction {
    Zero,
    Psi(u8),
}

impl MeanFunction {
    pub fn evaluate(&self, grid: &[f64]) -> Vec<f64> {
        match *self {
            MeanFunction::Zero => vec![0.0; grid.len()],
            MeanFunction::Psi(i) => grid.iter().map(|s| psi(i, *s)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    StudentT { df: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Identity,
    #[default]
    LogSum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub mean: MeanFunction,
    pub matern: MaternParams,
    pub length: usize,
    pub family: Family,
}

/// Ordered segments on a shared grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub segments: Vec<SegmentSpec>,
    pub transform: Transform,
    pub grid: Vec<f64>,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidScenario("no segments".into()));
        }
        if self.grid.len() < 2 {
            return Err(Error::InvalidScenario("grid needs at least 2 points".into()));
        }
        for (i, seg) in self.segments.iter().enumerate() {
            seg.matern.validate()?;
            if seg.length == 0 {
                return Err(Error::InvalidScenario(format!("segment {i} is empty")));
            }
            if let Family::StudentT { df } = seg.family {
                if !(df > 0.0) {
                    return Err(Error::InvalidScenario(format!("segment {i} has df {df}")));
                }
            }
            if let MeanFunction::Psi(k) = seg.mean {
                if !(1..=5).contains(&k) {
                    return Err(Error::InvalidScenario(format!("segment {i} uses psi {k}")));
                }
            }
        }
        for (i, w) in self.segments.windows(2).enumerate() {
            if w[0].mean == w[1].mean && w[0].matern == w[1].matern && w[0].family == w[1].family {
                return Err(Error::InvalidScenario(format!(
                    "segments {i} and {} share all parameters",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.segments.iter().map(|s| s.length).sum()
    }

    /// Cumulative segment lengths, excluding the last.
    pub fn true_changepoints(&self) -> Vec<usize> {
        let mut acc = 0;
        let k = self.segments.len();
        self.segments[..k - 1]
            .iter()
            .map(|s| {
                acc += s.length;
                acc
            })
            .collect()
    }
}

/// Draws the curves of a scenario and returns them with the planted changepoints.
pub fn generate_series(scenario: &Scenario) -> Result<(FunctionalSeries<f64>, Vec<usize>)> {
    scenario.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let m = scenario.grid.len();
    let mut values = Vec::with_capacity(scenario.n() * m);
    for seg in &scenario.segments {
        let factor = GaussianFactor::new(&matern_cov(&scenario.grid, &seg.matern))?;
        let mean = seg.mean.evaluate(&scenario.grid);
        for _ in 0..seg.length {
            let draw = match seg.family {
                Family::Gaussian => factor.sample(&mean, &mut rng),
                Family::StudentT { df } => factor.sample_t(&mean, df, &mut rng),
            };
            match scenario.transform {
                Transform::Identity => values.extend(draw),
                Transform::LogSum => values.extend(draw.into_iter().map(softplus)),
            }
        }
    }
    let series = FunctionalSeries::from_flat(values, scenario.grid.clone())?;
    Ok((series, scenario.true_changepoints()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    None,
    Sparse,
    Dense,
}

impl ScenarioKind {
    pub fn default_changepoints(self) -> usize {
        match self {
            ScenarioKind::None => 0,
            ScenarioKind::Sparse => 5,
            ScenarioKind::Dense => 50,
        }
    }

    pub fn default_segment_length(self) -> (usize, usize) {
        match self {
            ScenarioKind::None | ScenarioKind::Sparse => (5000, 10000),
            ScenarioKind::Dense => (500, 1000),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariedParameter {
    Mean,
    Variance,
    Range,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Gp,
    Tp,
}

/// Scenario file: what to vary and how to draw it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSettings {
    pub kind: ScenarioKind,
    #[serde(default = "default_varied")]
    pub varied: VariedParameter,
    pub family: FamilyKind,
    #[serde(default)]
    pub transform: Transform,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub df: Option<f64>,
    #[serde(default)]
    pub grid_size: Option<usize>,
    /// Overrides the number of changepoints implied by `kind`.
    #[serde(default)]
    pub changepoints: Option<usize>,
    /// Inclusive `[min, max]` segment length, overriding the `kind` default.
    #[serde(default)]
    pub segment_length: Option<(usize, usize)>,
}

fn default_varied() -> VariedParameter {
    VariedParameter::Mean
}

fn default_replicates() -> usize {
    1
}

impl ScenarioSettings {
    pub fn new(kind: ScenarioKind, varied: VariedParameter, family: FamilyKind) -> Self {
        Self {
            kind,
            varied,
            family,
            transform: Transform::LogSum,
            seed: 0,
            replicates: 1,
            df: None,
            grid_size: None,
            changepoints: None,
            segment_length: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let settings: Self = serde_json::from_str(text)?;
        settings.validate()?;
        Ok(settings)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidScenario("replicates must be at least 1".into()));
        }
        if let Some((lo, hi)) = self.segment_length {
            if lo == 0 || hi < lo {
                return Err(Error::InvalidScenario(format!("bad segment length range [{lo}, {hi}]")));
            }
        }
        if matches!(self.grid_size, Some(m) if m < 2) {
            return Err(Error::InvalidScenario("grid_size must be at least 2".into()));
        }
        if matches!(self.df, Some(df) if !(df > 0.0)) {
            return Err(Error::InvalidScenario("df must be positive".into()));
        }
        Ok(())
    }

    fn family(&self) -> Family {
        match self.family {
            FamilyKind::Gp => Family::Gaussian,
            FamilyKind::Tp => Family::StudentT { df: self.df.unwrap_or(DEFAULT_DF) },
        }
    }
}

/// Draws from `pool` avoiding `previous`.
fn draw_distinct<T: Copy + PartialEq, R: Rng + ?Sized>(pool: &[T], previous: Option<T>, rng: &mut R) -> T {
    loop {
        let v = *pool.choose(rng).expect("non-empty pool");
        if Some(v) != previous {
            return v;
        }
    }
}

/// Random scenario following the settings' kind and varied parameter.
pub fn sample_scenario<R: Rng + ?Sized>(settings: &ScenarioSettings, rng: &mut R) -> Scenario {
    let segments_count = match settings.kind {
        ScenarioKind::None => 1,
        kind => settings.changepoints.unwrap_or(kind.default_changepoints()) + 1,
    };
    let (lo, hi) = settings
        .segment_length
        .unwrap_or(settings.kind.default_segment_length());
    let family = settings.family();
    let base = MaternParams { sigma2: 1.0, range: 0.2, smoothness: 1.0 };
    let psis: [u8; 5] = [1, 2, 3, 4, 5];

    let mut segments: Vec<SegmentSpec> = Vec::with_capacity(segments_count);
    let (mut prev_psi, mut prev_var, mut prev_range) = (None, None, None);
    for _ in 0..segments_count {
        let length = rng.random_range(lo..=hi);
        let (mean, matern) = if settings.kind == ScenarioKind::None {
            (MeanFunction::Zero, base)
        } else {
            match settings.varied {
                VariedParameter::Mean => {
                    let p = draw_distinct(&psis, prev_psi, rng);
                    prev_psi = Some(p);
                    (MeanFunction::Psi(p), base)
                }
                VariedParameter::Variance => {
                    let v = draw_distinct(&VARIANCE_GRID, prev_var, rng);
                    prev_var = Some(v);
                    (MeanFunction::Zero, MaternParams { sigma2: v, ..base })
                }
                VariedParameter::Range => {
                    let r = draw_distinct(&RANGE_GRID, prev_range, rng);
                    prev_range = Some(r);
                    (MeanFunction::Zero, MaternParams { range: r, ..base })
                }
            }
        };
        segments.push(SegmentSpec { mean, matern, length, family });
    }
    Scenario {
        segments,
        transform: settings.transform,
        grid: uniform_grid(settings.grid_size.unwrap_or(DEFAULT_GRID_SIZE)),
        seed: rng.random(),
    }
}

/// Seed for replicate `index` derived from a base seed (SplitMix64 step).
pub fn replicate_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A two-segment scenario with one change of `after` relative to `before`
/// at the midpoint of `n` curves.
pub fn midpoint_change(
    n: usize,
    before: (MeanFunction, MaternParams),
    after: (MeanFunction, MaternParams),
    family: Family,
    grid_size: usize,
    seed: u64,
) -> Scenario {
    let half = n / 2;
    Scenario {
        segments: vec![
            SegmentSpec { mean: before.0, matern: before.1, length: half, family },
            SegmentSpec { mean: after.0, matern: after.1, length: n - half, family },
        ],
        transform: Transform::LogSum,
        grid: uniform_grid(grid_size),
        seed,
    }
}
