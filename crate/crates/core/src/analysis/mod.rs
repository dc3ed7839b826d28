//! L^p engines over cells and the alcove, the Schrödinger kernel, and
//! exponent fits for the resulting scans.

pub mod kernel;
pub mod lp;
pub mod strichartz;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rootsys::RootSystem;

pub use kernel::{
    derivative_bound_check, kernel_cell_formula_check, kernel_l2_invariance, kernel_lp_majorarc_scan, kernel_norm_fft,
    kernel_terms, kernel_whole_lattice, majorarc_pointwise_check, periodicity_check, q_scaling_check, schrodinger_kernel,
    Arc, KernelSpec, KernelTerm,
};
pub use lp::{character_lp_scan, lp_inv_delta_scan, mu_for, parseval_check, MuFamily};
pub use strichartz::class_strichartz_scan;

/// The spectral cutoff: 1 on [0,1], 0 from 4 on, a quintic smoothstep between.
pub fn cutoff(y: f64) -> f64 {
    if y <= 1.0 {
        1.0
    } else if y >= 4.0 {
        0.0
    } else {
        let u = (y - 1.0) / 3.0;
        1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

pub const CUTOFF_NAME: &str = "quintic-smoothstep[1,4]";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    InvDelta,
    CharNorm,
    Kernel,
    ClassStrichartz,
}

impl Quantity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::InvDelta => "inv-delta",
            Quantity::CharNorm => "char-norm",
            Quantity::Kernel => "kernel",
            Quantity::ClassStrichartz => "class-strichartz",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LpScanConfig {
    pub p: f64,
    pub n_values: Vec<u32>,
    pub samples_per_cell: u64,
    pub seed: u64,
    /// Overrides the default slope tolerance.
    pub tolerance: Option<f64>,
}

impl LpScanConfig {
    pub fn dyadic(p: f64, n_min: u32, n_max: u32, samples: u64, seed: u64) -> Result<Self> {
        Ok(Self { p, n_values: dyadic_range(n_min, n_max)?, samples_per_cell: samples, seed, tolerance: None })
    }

    pub fn validate(&self, min_n: u32) -> Result<()> {
        if !(self.p >= 1.0) {
            return Err(Error::Config(format!("p = {} must be at least 1", self.p)));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("N values must be strictly increasing".into()));
        }
        if let Some(&n) = self.n_values.first() {
            if n < min_n {
                return Err(Error::Scale(format!("N = {n} is below the threshold {min_n}")));
            }
        }
        Ok(())
    }
}

/// Powers of two from n_min to n_max inclusive.
pub fn dyadic_range(n_min: u32, n_max: u32) -> Result<Vec<u32>> {
    if n_min == 0 || !n_min.is_power_of_two() || !n_max.is_power_of_two() || n_min > n_max {
        return Err(Error::Config(format!("N range {n_min}..{n_max} is not a dyadic range")));
    }
    let mut v = Vec::new();
    let mut n = n_min;
    while n <= n_max {
        v.push(n);
        n *= 2;
    }
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub n: u32,
    pub value: f64,
    pub se: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMode {
    /// Fitted slope must equal the prediction.
    Slope,
    /// Fitted slope must not exceed the prediction.
    UpperBound,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub quantity: Quantity,
    pub type_label: String,
    pub i: Vec<usize>,
    pub j: Vec<usize>,
    pub p: f64,
    pub rows: Vec<ScanRow>,
    pub fitted_slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    pub predicted_exponent: f64,
    pub tolerance: f64,
    pub mode: FitMode,
    pub pass: bool,
    pub skipped: Vec<String>,
    pub notes: Vec<String>,
}

impl ScanResult {
    #[allow(clippy::too_many_arguments)]
    pub fn from_rows(
        quantity: Quantity,
        rs: &RootSystem,
        i: &[usize],
        j: &[usize],
        p: f64,
        rows: Vec<ScanRow>,
        predicted: f64,
        tolerance: f64,
        mode: FitMode,
    ) -> Result<Self> {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.value)).collect();
        let fit = fit_slope(&pts)?;
        let slack = tolerance + 2.0 * fit.se;
        let pass = match mode {
            FitMode::Slope => (fit.slope - predicted).abs() <= slack,
            FitMode::UpperBound => fit.slope <= predicted + slack,
        };
        Ok(Self {
            quantity,
            type_label: rs.label.clone(),
            i: i.to_vec(),
            j: j.to_vec(),
            p,
            rows,
            fitted_slope: fit.slope,
            slope_se: fit.se,
            intercept: fit.intercept,
            predicted_exponent: predicted,
            tolerance,
            mode,
            pass,
            skipped: Vec::new(),
            notes: Vec::new(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub se: f64,
    pub intercept: f64,
}

/// Ordinary least squares of log value on log N.
pub fn fit_slope(rows: &[(f64, f64)]) -> Result<SlopeFit> {
    if rows.len() < 3 {
        return Err(Error::Degenerate(format!("a slope fit needs at least 3 points, got {}", rows.len())));
    }
    if let Some(bad) = rows.iter().find(|(n, v)| !(*v > 0.0) || !(*n > 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("nonpositive value {} at N = {}", bad.1, bad.0)));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all N values are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let se = (rss / (n - 2.0) / sxx).sqrt();
    Ok(SlopeFit { slope, se, intercept })
}

/// Default slope tolerance: 0.1 in rank one, 0.15 otherwise.
pub fn default_tolerance(rs: &RootSystem) -> f64 {
    if rs.rank == 1 {
        0.1
    } else {
        0.15
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.5), 1.0);
        assert_eq!(cutoff(1.0), 1.0);
        assert_eq!(cutoff(4.0), 0.0);
        assert!((cutoff(2.5) - 0.5).abs() < 1e-12);
        // C² at both joins
        let h = 1e-4;
        for y in [1.0, 4.0] {
            let d1 = (cutoff(y + h) - cutoff(y - h)) / (2.0 * h);
            let d2 = (cutoff(y + h) - 2.0 * cutoff(y) + cutoff(y - h)) / (h * h);
            assert!(d1.abs() < 1e-6 && d2.abs() < 1e-2, "{y}: {d1} {d2}");
        }
        let mut prev = 1.0;
        for k in 0..=300 {
            let v = cutoff(1.0 + k as f64 / 100.0);
            assert!((0.0..=1.0).contains(&v) && v <= prev);
            prev = v;
        }
    }

    #[test]
    fn fit_examples() {
        let exact: Vec<(f64, f64)> = [16.0, 32.0, 64.0, 128.0].iter().map(|&n: &f64| (n, n * n)).collect();
        let f = fit_slope(&exact).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && f.se < 1e-12);
        let mut r = crate::rng::stream(&[3]);
        let noisy: Vec<(f64, f64)> =
            [16.0, 32.0, 64.0, 128.0, 256.0].iter().map(|&n: &f64| (n, n * n * (1.0 + 0.01 * (2.0 * r.gen::<f64>() - 1.0)))).collect();
        assert!((fit_slope(&noisy).unwrap().slope - 2.0).abs() < 0.02);
        let flat: Vec<(f64, f64)> = [16.0, 32.0, 64.0, 128.0].iter().map(|&n| (n, 3.0)).collect();
        assert!(fit_slope(&flat).unwrap().slope.abs() < 1e-12);
        assert!(fit_slope(&[(16.0, 1.0), (32.0, 0.0), (64.0, 1.0)]).is_err());
    }

    #[test]
    fn dyadic() {
        assert_eq!(dyadic_range(16, 128).unwrap(), vec![16, 32, 64, 128]);
        assert!(dyadic_range(16, 100).is_err());
    }
}
