//! The oscillatory integral J(x, γ, m; q) with a Gaussian amplitude.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use serde::Serialize;

use super::expsum::IntegralQuadraticForm;
use crate::error::{Error, Result};
use crate::numeric::integrate_breaks;

/// J = ∫ e(y·(x + m/q) - γ(y A yᵀ + y·b)) e^{-π|y|²/N²} dy in closed form.
pub fn oscillatory_integral(form: &IntegralQuadraticForm, x: &[f64], gamma: f64, m: &[i64], q: i64, n: f64) -> Result<C> {
    let r = form.rank();
    if r > 2 {
        return Err(Error::Capability("oscillatory integrals are implemented for r ≤ 2".into()));
    }
    let b: Vec<f64> = form.b.clone().unwrap_or_else(|| vec![0; r]).iter().map(|&v| v as f64).collect();
    // exp(-π yCyᵀ + 2πi η·y) with C = I/N² + 2iγA and η = x + m/q - γ b.
    let eta: Vec<f64> = (0..r).map(|j| x[j] + m[j] as f64 / q as f64 - gamma * b[j]).collect();
    let cm: Vec<Vec<C>> = (0..r)
        .map(|i| (0..r).map(|j| C::new(if i == j { 1.0 / (n * n) } else { 0.0 }, 2.0 * gamma * form.a[i][j] as f64)).collect())
        .collect();
    let eig = eigen_sym(&form.a);
    let det_pow: C = eig.iter().map(|&l| C::new(1.0 / (n * n), 2.0 * gamma * l).sqrt().inv()).product();
    let quad = if r == 1 {
        C::new(eta[0] * eta[0], 0.0) / cm[0][0]
    } else {
        let det = cm[0][0] * cm[1][1] - cm[0][1] * cm[1][0];
        (cm[1][1] * eta[0] * eta[0] - (cm[0][1] + cm[1][0]) * eta[0] * eta[1] + cm[0][0] * eta[1] * eta[1]) / det
    };
    Ok(det_pow * (-PI * quad).exp())
}

fn eigen_sym(a: &[Vec<i64>]) -> Vec<f64> {
    if a.len() == 1 {
        return vec![a[0][0] as f64];
    }
    let (p, qq, s) = (a[0][0] as f64, a[1][1] as f64, a[0][1] as f64);
    let m = (p + qq) / 2.0;
    let d = (((p - qq) / 2.0).powi(2) + s * s).sqrt();
    vec![m - d, m + d]
}

/// Rank-one quadrature of the same integral, for cross-checking the closed form.
pub fn oscillatory_quadrature(form: &IntegralQuadraticForm, x: f64, gamma: f64, m: i64, q: i64, n: f64) -> C {
    let a = form.a[0][0] as f64;
    let b = form.b.as_ref().map_or(0.0, |v| v[0] as f64);
    let xi = x + m as f64 / q as f64;
    let span = 7.0 * n;
    // Enough panels to resolve the local frequency everywhere.
    let fmax = xi.abs() + gamma.abs() * (2.0 * a * span + b.abs()) + 1.0 / n;
    let panels = ((2.0 * span * fmax).ceil() as usize).clamp(64, 4_000_000);
    let breaks: Vec<f64> = (0..=panels).map(|i| -span + 2.0 * span * i as f64 / panels as f64).collect();
    let phase = |y: f64| 2.0 * PI * (y * xi - gamma * (a * y * y + b * y));
    let amp = |y: f64| (-PI * y * y / (n * n)).exp();
    let re = integrate_breaks(&breaks, 8, |y| phase(y).cos() * amp(y));
    let im = integrate_breaks(&breaks, 8, |y| phase(y).sin() * amp(y));
    C::new(re, im)
}

#[derive(Clone, Debug, Serialize)]
pub struct OscillatoryReport {
    pub n: f64,
    /// (γ, |J|, |J| / min{N^r, |γ|^{-r/2}}).
    pub grid: Vec<(f64, f64, f64)>,
    pub quadrature_residual: Option<f64>,
    /// |J| at |xq + m| = N^{1/2} relative to the γ = 0 value.
    pub decay_ratio: f64,
}

pub fn oscillatory_integral_check(form: &IntegralQuadraticForm, n: f64, q: i64) -> Result<OscillatoryReport> {
    let r = form.rank();
    let zero_x = vec![0.0; r];
    let zero_m = vec![0i64; r];
    let mut grid = Vec::new();
    for gamma in [0.0, n.powi(-2), 1.0 / n, 1.0] {
        let j = oscillatory_integral(form, &zero_x, gamma, &zero_m, q, n)?;
        let bound = if gamma == 0.0 { n.powi(r as i32) } else { n.powi(r as i32).min(gamma.abs().powf(-(r as f64) / 2.0)) };
        grid.push((gamma, j.norm(), j.norm() / bound));
    }
    let quadrature_residual = if r == 1 {
        let mut worst = 0.0f64;
        let nq = n.min(64.0);
        for &(gamma, _, _) in &grid {
            // A frequency inside the amplitude's band, so the value is not negligible.
            let x = 0.3 / nq;
            let a = oscillatory_integral(form, &[x], gamma, &[0], q, nq)?;
            let b = oscillatory_quadrature(form, x, gamma, 0, q, nq);
            worst = worst.max((a - b).norm() / nq);
        }
        Some(worst)
    } else {
        None
    };
    let mut xs = vec![0.0; r];
    xs[0] = n.sqrt() / q as f64;
    let far = oscillatory_integral(form, &xs, 0.0, &zero_m, q, n)?;
    let decay_ratio = far.norm() / grid[0].1;
    Ok(OscillatoryReport { n, grid, quadrature_residual, decay_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_matches_quadrature() {
        let f = IntegralQuadraticForm::new(vec![vec![1]]).unwrap();
        let rep = oscillatory_integral_check(&f, 256.0, 3).unwrap();
        assert!(rep.quadrature_residual.unwrap() < 1e-8, "{rep:?}");
        assert!((rep.grid[0].2 - 1.0).abs() < 1e-12);
        // Stationary phase at γ = 1: |J| ≈ (2γa)^{-1/2}.
        assert!(rep.grid[3].2 > 0.25 && rep.grid[3].2 < 4.0);
        assert!(rep.decay_ratio < 256f64.powi(-8));
        let g = IntegralQuadraticForm::new(vec![vec![2, 1], vec![1, 2]]).unwrap();
        let rep = oscillatory_integral_check(&g, 64.0, 1).unwrap();
        assert!(rep.grid.iter().all(|x| x.2 <= 1.0 + 1e-12));
    }
}
