//! L^p norms of 1/δ_{I,J} on cells and of characters on the alcove.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::{default_tolerance, FitMode, LpScanConfig, Quantity, ScanResult, ScanRow};
use crate::alcove::{self, AlcovePoint, Cell, Classifier};
use crate::charkit::{self, character};
use crate::error::{Error, Result};
use crate::numeric::integrate_breaks;
use crate::rational::to_f64;
use crate::rng;
use crate::rootsys::RootSystem;

const QUAD_ORDER: usize = 24;

/// Positive-root indices in Σ_I^+ \ Σ_J^+.
fn ij_roots(rs: &RootSystem, i: &[usize], j: &[usize]) -> Result<Vec<usize>> {
    let pi = rs.parabolic_subsystem(i)?;
    let pj = rs.parabolic_subsystem(j)?;
    Ok(pi.positive.iter().copied().filter(|&a| !pj.contains_root(a)).collect())
}

fn theta_of(t: &[f64]) -> &[f64] {
    &t[1..]
}

fn pairing(root: &[i64], theta: &[f64]) -> f64 {
    root.iter().zip(theta).map(|(&c, x)| c as f64 * x).sum()
}

/// Rank-one cells as unions of θ-intervals, found by classifying midpoints.
fn rank_one_intervals(rs: &RootSystem, cell: &Cell) -> Result<Vec<(f64, f64)>> {
    let cls = Classifier::new(rs, cell.n)?;
    let inv_n = 1.0 / cell.n as f64;
    let m1 = rs.mark(1) as f64;
    let m0 = rs.mark(0) as f64;
    let end = 1.0 / m1;
    let mut cuts = vec![0.0, inv_n, end, (1.0 - m0 * inv_n) / m1];
    // barycentric switch m0 t0 = m1 t1
    cuts.push(0.5 / m1);
    cuts.retain(|x| (0.0..=end).contains(x));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let t = [1.0 - m1 * mid, mid];
        let (k, jm) = cls.classify_raw(&t);
        let jv: Vec<usize> = (0..2).filter(|&x| jm & (1 << x) != 0).collect();
        if k == cell.omitted() && jv == cell.j {
            out.push((w[0], w[1]));
        }
    }
    Ok(out)
}

/// Geometric panels toward both ends of [a, b], where the integrands blow up.
fn graded_breaks(a: f64, b: f64, extra: &[f64]) -> Vec<f64> {
    let mut v = vec![a, b];
    let mut h = 1.0;
    while h > 1e-12 {
        for x in [h, 1.0 - h] {
            if x > a && x < b {
                v.push(x);
            }
        }
        h *= 0.5;
    }
    v.extend(extra.iter().copied().filter(|&x| x > a && x < b));
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// (∫_{P_{I,J}} |δ_{I,J}|^{-p} dH)^{1/p} per N, fitted against |Σ^+| - |Σ_J^+| - r/p.
pub fn lp_inv_delta_scan(rs: &RootSystem, i: &[usize], j: &[usize], config: &LpScanConfig) -> Result<ScanResult> {
    rs.require_irreducible("inverse-delta scan")?;
    config.validate(alcove::n_threshold(rs))?;
    let roots = ij_roots(rs, i, j)?;
    let coeffs: Vec<Vec<i64>> = roots.iter().map(|&a| rs.datum.positive[a].clone()).collect();
    let p = config.p;
    let r = rs.rank as f64;
    let npos = rs.num_positive() as f64;
    let nj = rs.parabolic_subsystem(j)?.num_positive() as f64;
    let haar = alcove::haar_factor(rs);
    let integrand = |theta: &[f64]| -> f64 {
        coeffs.iter().map(|c| (2.0 * (PI * pairing(c, theta)).sin()).abs().powf(-p)).product()
    };
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &n in &config.n_values {
        let cell = Cell::new(rs, i, j, n)?;
        let (value, se) = if rs.rank == 1 {
            let mut s = 0.0;
            for (a, b) in rank_one_intervals(rs, &cell)? {
                s += integrate_breaks(&graded_breaks(a, b, &[]), QUAD_ORDER, |x| integrand(&[x]));
            }
            (s, 0.0)
        } else {
            let keys = [config.seed, rng::str_key("inv-delta")];
            let out = alcove::integrate_cells(rs, std::slice::from_ref(&cell), config.samples_per_cell, &keys, &|t| {
                integrand(theta_of(t))
            });
            if out[0].accepted == 0 {
                (0.0, 0.0)
            } else {
                (out[0].value, out[0].se)
            }
        };
        if !(value > 0.0) {
            skipped.push(format!("P_{{{},{}}} is empty at N = {n}", cell.label_i(), cell.label_j()));
            continue;
        }
        let v = (haar * value).powf(1.0 / p);
        rows.push(ScanRow { n, value: v, se: v / p * se / value });
    }
    let tol = config.tolerance.unwrap_or_else(|| default_tolerance(rs));
    let (pred, mode) = if p > r / npos { (npos - nj - r / p, FitMode::Slope) } else { (-nj, FitMode::UpperBound) };
    let mut res = ScanResult::from_rows(Quantity::InvDelta, rs, i, j, p, rows, pred, tol, mode)?;
    res.skipped = skipped;
    Ok(res)
}

/// How μ grows with N in character scans.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MuFamily {
    /// μ = N·ρ (Dynkin labels all N).
    RhoMultiple,
    /// Nearest strictly dominant point to N·ρ/|ρ|.
    Regular,
}

pub fn mu_for(rs: &RootSystem, family: MuFamily, n: u32) -> Vec<i64> {
    match family {
        MuFamily::RhoMultiple => vec![n as i64; rs.rank],
        MuFamily::Regular => {
            let rho = to_f64(&rs.norm2(&rs.weyl_vector)).sqrt();
            vec![((n as f64 / rho).round() as i64).max(1); rs.rank]
        }
    }
}

/// ‖χ_μ |δ|^{2/p}‖_{L^p(A)} per N, fitted against (d-r)/2 - d/p above 2d/(d-r) and 0 below.
pub fn character_lp_scan(rs: &RootSystem, family: MuFamily, config: &LpScanConfig) -> Result<ScanResult> {
    rs.require_irreducible("character scan")?;
    let p = config.p;
    let d = rs.group_dim() as f64;
    let r = rs.rank as f64;
    let critical = 2.0 * d / (d - r);
    if (p - critical).abs() < 1e-12 {
        return Err(Error::Config(format!("p = {p} is the critical exponent")));
    }
    if rs.rank > 1 {
        config.validate(alcove::n_threshold(rs))?;
    } else {
        config.validate(1)?;
    }
    let haar = alcove::haar_factor(rs);
    let mut rows = Vec::new();
    for &n in &config.n_values {
        let mu = mu_for(rs, family, n);
        let f = |t: &[f64]| -> f64 {
            let pt = AlcovePoint { t: t.to_vec() };
            let chi = character(rs, &mu, &pt, Some(n.max(alcove::n_threshold(rs)))).map(|c| c.value.norm()).unwrap_or(f64::NAN);
            let dl = charkit::delta(rs, &pt).norm();
            chi.powf(p) * dl * dl
        };
        let (value, se) = if rs.rank == 1 {
            // Panels of a quarter period of the numerator.
            let m1 = rs.mark(1) as f64;
            let panels = 4 * mu[0].max(1) as usize;
            let breaks: Vec<f64> = (0..=panels).map(|k| k as f64 / panels as f64 / m1).collect();
            (integrate_breaks(&breaks, 16, |x| f(&[1.0 - m1 * x, x])), 0.0)
        } else {
            let cells = alcove::all_cells(rs, n);
            let keys = [config.seed, rng::str_key("char-norm")];
            let out = alcove::integrate_cells(rs, &cells, config.samples_per_cell * cells.len() as u64, &keys, &f);
            let v: f64 = out.iter().map(|o| o.value).sum();
            let s: f64 = out.iter().map(|o| o.se * o.se).sum::<f64>().sqrt();
            (v, s)
        };
        if !value.is_finite() {
            return Err(Error::Degenerate(format!("character integral is not finite at N = {n}")));
        }
        let v = (haar * value).powf(1.0 / p);
        rows.push(ScanRow { n, value: v, se: v / p * se / value });
    }
    let pred = if p > critical { (d - r) / 2.0 - d / p } else { 0.0 };
    let tol = config.tolerance.unwrap_or_else(|| default_tolerance(rs));
    let all: Vec<usize> = (1..=rs.rank).collect();
    let mut res = ScanResult::from_rows(Quantity::CharNorm, rs, &all, &[], p, rows, pred, tol, FitMode::Slope)?;
    res.notes.push(format!("mu family {family:?}"));
    Ok(res)
}

#[derive(Clone, Debug, Serialize)]
pub struct ParsevalReport {
    pub estimate: f64,
    pub se: f64,
    pub exact: f64,
    pub z: f64,
}

/// Monte-Carlo L² norm of Σ a_μ χ_μ over (A, |δ|² dH) against Σ|a_μ|².
pub fn parseval_check(rs: &RootSystem, terms: &[(Vec<i64>, f64)], samples: u64, seed: u64) -> Result<ParsevalReport> {
    rs.require_irreducible("Parseval check")?;
    let n = alcove::n_threshold(rs);
    let cells = alcove::all_cells(rs, n);
    let haar = alcove::haar_factor(rs);
    for (mu, _) in terms {
        if !mu.iter().all(|&x| x >= 1) {
            return Err(Error::Domain(format!("μ = {mu:?} is not strictly dominant")));
        }
    }
    let f = |t: &[f64]| -> f64 {
        let pt = AlcovePoint { t: t.to_vec() };
        let s: num_complex::Complex64 =
            terms.iter().map(|(mu, a)| character(rs, mu, &pt, Some(n)).map(|c| c.value * *a).unwrap_or_default()).sum();
        let dl = charkit::delta(rs, &pt).norm();
        s.norm_sqr() * dl * dl
    };
    let out = alcove::integrate_cells(rs, &cells, samples, &[seed, rng::str_key("parseval")], &f);
    let est = haar * out.iter().map(|o| o.value).sum::<f64>();
    let se = haar * out.iter().map(|o| o.se * o.se).sum::<f64>().sqrt();
    let exact: f64 = terms.iter().map(|(_, a)| a * a).sum();
    Ok(ParsevalReport { estimate: est, se, exact, z: (est - exact) / se.max(1e-300) })
}

/// ∫_A |δ|² dH, which the Haar normalization makes 1.
pub fn haar_total(rs: &RootSystem, samples: u64, seed: u64) -> Result<(f64, f64)> {
    let n = alcove::n_threshold(rs);
    let cells = alcove::all_cells(rs, n);
    let haar = alcove::haar_factor(rs);
    let out: Vec<_> = alcove::integrate_cells(rs, &cells, samples, &[seed, rng::str_key("haar")], &|t| {
        charkit::delta(rs, &AlcovePoint { t: t.to_vec() }).norm_sqr()
    });
    let v = out.par_iter().map(|o| o.value).sum::<f64>() * haar;
    let s = out.iter().map(|o| o.se * o.se).sum::<f64>().sqrt() * haar;
    Ok((v, s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: f64, n: &[u32], samples: u64) -> LpScanConfig {
        LpScanConfig { p, n_values: n.to_vec(), samples_per_cell: samples, seed: 11, tolerance: None }
    }

    #[test]
    fn haar_normalization() {
        for label in ["A1", "A2", "B2"] {
            let rs = RootSystem::build(label).unwrap();
            let (v, s) = haar_total(&rs, 200_000, 1).unwrap();
            assert!((v - 1.0).abs() < 4.0 * s + 1e-9, "{label}: {v} ± {s}");
        }
    }

    #[test]
    fn a1_inv_delta_quadrature() {
        let rs = RootSystem::build("A1").unwrap();
        let ns = [16, 32, 64, 128, 256, 512, 1024];
        let res = lp_inv_delta_scan(&rs, &[1], &[], &cfg(2.0, &ns, 0)).unwrap();
        assert!((res.predicted_exponent - 0.5).abs() < 1e-12);
        assert!(res.pass, "{}", res.fitted_slope);
        let res = lp_inv_delta_scan(&rs, &[0], &[0], &cfg(2.0, &ns, 0)).unwrap();
        assert!((res.fitted_slope + 0.5).abs() < 1e-6, "{}", res.fitted_slope);
    }

    #[test]
    fn a2_inv_delta_examples() {
        let rs = RootSystem::build("A2").unwrap();
        let ns = [16, 32, 64, 128];
        let res = lp_inv_delta_scan(&rs, &[1, 2], &[], &cfg(2.0, &ns, 100_000)).unwrap();
        assert_eq!(res.predicted_exponent, 2.0);
        assert!(res.pass, "{res:?}");
        let res = lp_inv_delta_scan(&rs, &[1, 2], &[1], &cfg(2.0, &ns, 100_000)).unwrap();
        assert_eq!(res.predicted_exponent, 1.0);
        assert!(res.pass, "{res:?}");
    }

    #[test]
    fn a1_character_norms() {
        let rs = RootSystem::build("A1").unwrap();
        let ns = [16, 32, 64, 128, 256];
        let res = character_lp_scan(&rs, MuFamily::RhoMultiple, &cfg(2.0, &ns, 0)).unwrap();
        for row in &res.rows {
            assert!((row.value - 1.0).abs() < 1e-9, "{row:?}");
        }
        let res = character_lp_scan(&rs, MuFamily::RhoMultiple, &cfg(6.0, &ns, 0)).unwrap();
        assert!((res.fitted_slope - 0.5).abs() < 0.05, "{}", res.fitted_slope);
    }

    #[test]
    fn parseval_a2() {
        let rs = RootSystem::build("A2").unwrap();
        let terms = vec![(vec![1, 1], 0.5), (vec![2, 1], -1.0), (vec![1, 3], 0.25)];
        let rep = parseval_check(&rs, &terms, 200_000, 5).unwrap();
        assert!(rep.z.abs() < 3.0, "{rep:?}");
    }
}
