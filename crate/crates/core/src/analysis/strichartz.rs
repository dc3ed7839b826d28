//! Strichartz norms of class-function Schrödinger evolutions.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::kernel::{grid_size, next_pow2, OFFSETS};
use super::{FitMode, LpScanConfig, Quantity, ScanResult, ScanRow};
use crate::charkit::System;
use crate::error::{Error, Result};
use crate::lattice::spectral_gap;
use crate::rational::{denom_lcm, q, to_f64};
use crate::rootsys::RootSystem;

/// ‖Σ a_μ e^{-it|μ|²} χ_μ |δ|^{2/p}‖_{L^p([0,T]×A)}, time normalized to mean.
///
/// The time grid has at least 8N² points; the torus grid is fine enough that
/// both directions are integrated without aliasing for even p.
pub fn class_strichartz_norm(rs: &RootSystem, coeffs: &[(Vec<i64>, f64)], p: f64, n_hint: u32) -> Result<f64> {
    let r = rs.rank;
    if r == 0 || r > 2 {
        return Err(Error::Capability(format!("class Strichartz norms need rank 1 or 2, got {r}")));
    }
    if coeffs.is_empty() {
        return Err(Error::Degenerate("no coefficients".into()));
    }
    let sys = System::get(&rs.datum.gram)?;
    let wg = rs.datum.weight_gram();
    let g = spectral_gap(rs);
    let mut all: Vec<_> = wg.iter().flatten().cloned().collect();
    all.push(g);
    let scale = denom_lcm(all.iter());
    let gi: Vec<Vec<i64>> = wg.iter().map(|row| row.iter().map(|x| (*x * q(scale)).to_integer()).collect()).collect();
    let gap = (g * q(scale)).to_integer();
    let rho: i64 = gi.iter().flatten().sum();
    let ks: Vec<i64> = coeffs
        .iter()
        .map(|(l, _)| ((0..r).map(|i| (0..r).map(|j| l[i] * gi[i][j] * l[j]).sum::<i64>()).sum::<i64>() - rho) / gap)
        .collect();
    let kmax = *ks.iter().max().unwrap_or(&0) as usize;
    let pc = p.ceil() as usize;
    let nyquist = (8.0 * (n_hint as f64).powi(2) / to_f64(&g)).ceil() as usize;
    let len = next_pow2(nyquist.max((pc / 2 + 1) * kmax + 1));
    // W-orbits with signs.
    let orbits: Vec<Vec<(Vec<f64>, f64)>> = coeffs
        .iter()
        .map(|(l, _)| sys.weyl.iter().map(|w| (w.apply(l).iter().map(|&x| x as f64).collect(), w.det as f64)).collect())
        .collect();
    let max_label = orbits.iter().flatten().flat_map(|(l, _)| l.iter()).fold(0.0f64, |a, b| a.max(b.abs())) as i64;
    let m = grid_size(rs, max_label, p);
    let total = m.pow(r as u32);
    let pos: Vec<Vec<f64>> = rs.datum.positive.iter().map(|a| a.iter().map(|&x| x as f64).collect()).collect();
    let cartan: Vec<Vec<f64>> = rs.datum.cartan.iter().map(|row| row.iter().map(|&x| x as f64).collect()).collect();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(len);
    let sum: f64 = (0..total)
        .into_par_iter()
        .map_init(
            || vec![C::new(0.0, 0.0); len],
            |buf, idx| {
                let mut x = [0.0; 2];
                let mut rem = idx;
                for i in (0..r).rev() {
                    x[i] = ((rem % m) as f64 + OFFSETS[i]) / m as f64;
                    rem /= m;
                }
                buf.iter_mut().for_each(|z| *z = C::new(0.0, 0.0));
                for ((orbit, (_, a)), &k) in orbits.iter().zip(coeffs).zip(&ks) {
                    let s: C = orbit
                        .iter()
                        .map(|(l, det)| C::from_polar(*det, 2.0 * PI * l.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>()))
                        .sum();
                    buf[k as usize % len] += s * *a;
                }
                fft.process(buf);
                let theta: Vec<f64> = (0..r).map(|i| (0..r).map(|k| cartan[i][k] * x[k]).sum()).collect();
                let dl: f64 = pos
                    .iter()
                    .map(|a| (2.0 * (PI * a.iter().zip(&theta).map(|(c, t)| c * t).sum::<f64>()).sin()).abs())
                    .product();
                let w = dl.powf(2.0 - p);
                buf.iter().map(|z| z.norm().powf(p)).sum::<f64>() * w
            },
        )
        .sum();
    let mean = sum / (total as f64 * len as f64) / rs.weyl_order() as f64;
    Ok(mean.powf(1.0 / p))
}

/// Strictly dominant μ with |μ| ≤ N.
pub fn ball_weights(rs: &RootSystem, n: u32) -> Vec<Vec<i64>> {
    let wg: Vec<Vec<f64>> = rs.datum.weight_gram().iter().map(|row| row.iter().map(to_f64).collect()).collect();
    let r = rs.rank;
    let n2 = (n as f64).powi(2);
    let bound: Vec<i64> = (0..r).map(|i| (2.0 * n as f64 / to_f64(&rs.datum.gram[i][i]).sqrt()).floor() as i64 + 1).collect();
    let mut out = Vec::new();
    let mut v = vec![1i64; r];
    loop {
        let e: f64 = (0..r).map(|i| (0..r).map(|j| v[i] as f64 * wg[i][j] * v[j] as f64).sum::<f64>()).sum();
        if e <= n2 + 1e-9 {
            out.push(v.clone());
        }
        let mut i = 0;
        loop {
            if i == r {
                return out;
            }
            v[i] += 1;
            if v[i] <= bound[i] {
                break;
            }
            v[i] = 1;
            i += 1;
        }
    }
}

/// Class-function Strichartz norms with a_μ ≡ 1 on |μ| ≤ N, divided by ‖a‖_{ℓ²},
/// fitted against d/2 - (d+2)/p.
pub fn class_strichartz_scan(rs: &RootSystem, config: &LpScanConfig) -> Result<ScanResult> {
    rs.require_irreducible("class Strichartz scan")?;
    config.validate(1)?;
    let p = config.p;
    let r = rs.rank as f64;
    if p <= 2.0 + 4.0 / r {
        return Err(Error::Config(format!("p = {p} must exceed 2 + 4/r = {}", 2.0 + 4.0 / r)));
    }
    let d = rs.group_dim() as f64;
    let mut rows = Vec::new();
    for &n in &config.n_values {
        let mus = ball_weights(rs, n);
        let coeffs: Vec<(Vec<i64>, f64)> = mus.into_iter().map(|m| (m, 1.0)).collect();
        let norm = class_strichartz_norm(rs, &coeffs, p, n)?;
        rows.push(ScanRow { n, value: norm / (coeffs.len() as f64).sqrt(), se: 0.0 });
    }
    let tol = config.tolerance.unwrap_or(0.15);
    let all: Vec<usize> = (1..=rs.rank).collect();
    ScanResult::from_rows(Quantity::ClassStrichartz, rs, &all, &[], p, rows, d / 2.0 - (d + 2.0) / p, tol, FitMode::Slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::lp::{character_lp_scan, MuFamily};

    #[test]
    fn single_frequency_matches_character_norm() {
        let rs = RootSystem::build("A1").unwrap();
        let v = class_strichartz_norm(&rs, &[(vec![12], 1.0)], 6.0, 12).unwrap();
        let cfg = LpScanConfig { p: 6.0, n_values: vec![12, 13, 14], samples_per_cell: 0, seed: 0, tolerance: None };
        let c = character_lp_scan(&rs, MuFamily::RhoMultiple, &cfg).unwrap();
        assert!((v - c.rows[0].value).abs() < 1e-8 * v, "{v} {}", c.rows[0].value);
    }

    #[test]
    fn a1_p8_slope() {
        let rs = RootSystem::build("A1").unwrap();
        let cfg = LpScanConfig { p: 8.0, n_values: vec![8, 16, 32, 64], samples_per_cell: 0, seed: 0, tolerance: None };
        let res = class_strichartz_scan(&rs, &cfg).unwrap();
        assert!((res.predicted_exponent - 0.875).abs() < 1e-12);
        assert!(res.pass, "{res:?}");
    }
}
