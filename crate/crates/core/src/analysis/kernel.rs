//! The Schrödinger kernel K_N(t, exp H) and its structural identities.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use num_integer::Integer;
use rand::Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use super::{cutoff, fit_slope, FitMode, LpScanConfig, Quantity, ScanResult, ScanRow};
use crate::alcove::{self, AlcovePoint, Cell};
use crate::charkit::{self, character, parabolic_from_labels, System};
use crate::error::{Error, Result};
use crate::lattice::{coset_decomposition, schrodinger_period, spectral_gap};
use crate::rational::{denom_lcm, q, to_f64};
use crate::rng;
use crate::rootsys::RootSystem;

const BOX_CAP: u128 = 200_000_000;

/// Scale N and time t of a kernel evaluation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct KernelSpec {
    pub n: u32,
    pub t: f64,
}

impl KernelSpec {
    /// t = T·s for a fraction s of the period.
    pub fn at_fraction(rs: &RootSystem, n: u32, s: f64) -> Self {
        Self { n, t: period(rs) * s }
    }
}

/// The period T = 2π / g, g the generator of |Λ|² - |ρ|².
pub fn period(rs: &RootSystem) -> f64 {
    2.0 * PI * to_f64(&schrodinger_period(rs))
}

/// One weight ν with E = |ν|² - |ρ|², k = E/g, and weight φ(E/N²) d_ν.
#[derive(Clone, Debug, Serialize)]
pub struct KernelTerm {
    pub labels: Vec<i64>,
    pub energy: f64,
    pub k: i64,
    pub weight: f64,
}

struct Metric {
    gram: Vec<Vec<i64>>,
    scale: i64,
    rho: i64,
    gap: i64,
    len: Vec<i64>,
    gram_f: Vec<Vec<f64>>,
}

impl Metric {
    fn new(rs: &RootSystem) -> Self {
        let wg = rs.datum.weight_gram();
        let g = spectral_gap(rs);
        let mut all: Vec<_> = wg.iter().flatten().cloned().collect();
        all.push(g);
        let scale = denom_lcm(all.iter());
        let gram: Vec<Vec<i64>> = wg.iter().map(|r| r.iter().map(|x| (*x * q(scale)).to_integer()).collect()).collect();
        let rho = gram.iter().flatten().sum();
        let gap = (g * q(scale)).to_integer();
        let lens: Vec<_> = (0..rs.rank).map(|i| rs.datum.gram[i][i]).collect();
        let lscale = denom_lcm(lens.iter());
        let len = lens.iter().map(|x| (*x * q(lscale)).to_integer()).collect();
        let gram_f = wg.iter().map(|r| r.iter().map(to_f64).collect()).collect();
        Self { gram, scale, rho, gap, len, gram_f }
    }

    fn norm_scaled(&self, l: &[i64]) -> i64 {
        let r = l.len();
        (0..r).map(|i| (0..r).map(|j| l[i] * self.gram[i][j] * l[j]).sum::<i64>()).sum()
    }

    fn inner_f(&self, a: &[f64], b: &[f64]) -> f64 {
        let r = a.len();
        (0..r).map(|i| (0..r).map(|j| a[i] * self.gram_f[i][j] * b[j]).sum::<f64>()).sum()
    }

    /// (α, ν) = 0 for some positive α, decided exactly.
    fn singular(&self, rs: &RootSystem, l: &[i64]) -> bool {
        rs.datum.positive.iter().any(|a| a.iter().zip(l).zip(&self.len).map(|((c, x), w)| c * x * w).sum::<i64>() == 0)
    }
}

/// Label bound from |ν|² ≤ R²: |⟨ν, α_i^∨⟩| ≤ 2R/|α_i|.
fn label_bounds(rs: &RootSystem, r2: f64) -> Vec<i64> {
    (0..rs.rank).map(|i| (2.0 * r2.sqrt() / to_f64(&rs.datum.gram[i][i]).sqrt()).floor() as i64 + 1).collect()
}

fn for_each_in_box(lo: &[i64], hi: &[i64], mut f: impl FnMut(&[i64])) {
    let r = lo.len();
    if r == 0 {
        f(&[]);
        return;
    }
    let mut v = lo.to_vec();
    loop {
        f(&v);
        let mut i = 0;
        loop {
            if i == r {
                return;
            }
            v[i] += 1;
            if v[i] <= hi[i] {
                break;
            }
            v[i] = lo[i];
            i += 1;
        }
    }
}

fn box_size(lo: &[i64], hi: &[i64]) -> u128 {
    lo.iter().zip(hi).map(|(a, b)| (b - a + 1).max(0) as u128).product()
}

/// Terms of the kernel: strictly dominant weights, or the whole lattice (nonsingular ν only).
pub fn kernel_terms(rs: &RootSystem, n: u32, whole: bool) -> Result<Vec<KernelTerm>> {
    let m = Metric::new(rs);
    let sys = System::get(&rs.datum.gram)?;
    let rho2 = m.rho as f64 / m.scale as f64;
    let r2 = 4.0 * (n as f64).powi(2) + rho2;
    let b = label_bounds(rs, r2);
    let lo: Vec<i64> = if whole { b.iter().map(|x| -x).collect() } else { vec![1; rs.rank] };
    if box_size(&lo, &b) > BOX_CAP {
        return Err(Error::Capability(format!("kernel enumeration at N = {n} exceeds {BOX_CAP} lattice points")));
    }
    let lim = (r2 * m.scale as f64).ceil() as i64;
    let mut out = Vec::new();
    for_each_in_box(&lo, &b, |l| {
        let e = m.norm_scaled(l);
        if e > lim || m.singular(rs, l) {
            return;
        }
        let es = e - m.rho;
        let energy = es as f64 / m.scale as f64;
        let phi = cutoff(energy / (n as f64).powi(2));
        if phi == 0.0 {
            return;
        }
        let lf: Vec<f64> = l.iter().map(|&x| x as f64).collect();
        out.push(KernelTerm { labels: l.to_vec(), energy, k: es / m.gap, weight: phi * sys.dimension(&lf) });
    });
    Ok(out)
}

fn time_phase(t: f64, e: f64) -> C {
    C::from_polar(1.0, -t * e)
}

/// K_N(t, exp H) as a sum over strictly dominant weights with characters.
pub fn schrodinger_kernel(rs: &RootSystem, spec: &KernelSpec, p: &AlcovePoint) -> Result<C> {
    let terms = kernel_terms(rs, spec.n, false)?;
    kernel_from_terms(rs, &terms, spec.t, p)
}

fn kernel_from_terms(rs: &RootSystem, terms: &[KernelTerm], t: f64, p: &AlcovePoint) -> Result<C> {
    let mut s = C::new(0.0, 0.0);
    for term in terms {
        let chi = character(rs, &term.labels, p, None)?.value;
        s += time_phase(t, term.energy) * term.weight * chi;
    }
    Ok(s)
}

/// (1/|W|) Σ_{ν∈Λ} φ e^{-itE} d_ν χ_ν(H).
pub fn kernel_whole_lattice(rs: &RootSystem, spec: &KernelSpec, p: &AlcovePoint) -> Result<C> {
    let terms = kernel_terms(rs, spec.n, true)?;
    let s = kernel_from_terms(rs, &terms, spec.t, p)?;
    Ok(s / rs.weyl_order() as f64)
}

/// K·δ = Σ_{ν∈Λ} φ e^{-itE} d_ν e^{2πi(ν,h)}, with z = dual coordinates of h.
fn kernel_delta(terms: &[KernelTerm], t: f64, z: &[f64]) -> C {
    terms
        .iter()
        .map(|term| {
            let x: f64 = term.labels.iter().zip(z).map(|(&a, b)| a as f64 * b).sum();
            term.weight * C::from_polar(1.0, 2.0 * PI * x - t * term.energy)
        })
        .sum()
}

/// Phase e^{-2πi k s} for s = a/q + γ, reduced exactly in the a/q part.
fn arc_phase(k: i64, a: i64, qq: i64, gamma: f64) -> C {
    let frac = (k * a).rem_euclid(qq) as f64 / qq as f64 + (k as f64 * gamma).rem_euclid(1.0);
    C::from_polar(1.0, -2.0 * PI * frac)
}

#[derive(Clone, Debug, Serialize)]
pub struct CellFormulaCheck {
    pub lhs: C,
    pub rhs: C,
    pub residual: f64,
    pub cosets: usize,
    pub terms: usize,
}

/// Direct Λ^+ evaluation against the coset sum Σ_μ a(t,μ,H) κ_N^J(μ,t,H) over
/// ^JΛ/^JΓ, with λ_1 ∈ ^JΓ, λ_2 ∈ ^JΛ^⊥, divided by |W_J| δ_I δ_{I,J}.
pub fn kernel_cell_formula_check(rs: &RootSystem, cell: &Cell, n: u32, t: f64, p: &AlcovePoint) -> Result<CellFormulaCheck> {
    let found = alcove::classify(rs, p, cell.n)?;
    if found.i != cell.i || found.j != cell.j {
        return Err(Error::Domain(format!("H lies in P_{{{:?},{:?}}}, not the requested cell", found.i, found.j)));
    }
    let m = Metric::new(rs);
    let sys = System::get(&rs.datum.gram)?;
    let par = rs.parabolic_subsystem(&cell.j)?;
    let sub = System::get(&par.datum.gram)?;
    let cd = coset_decomposition(rs, &par);
    let split = alcove::split_h(rs, &cell.j, p)?;
    let zp = sys.dual(&split.h_perp);
    let r = rs.rank;

    let lhs_terms = kernel_terms(rs, n, false)?;
    let lhs = kernel_from_terms(rs, &lhs_terms, t, p)?;
    let scale: f64 = lhs_terms.iter().map(|x| x.weight * x.weight).sum();

    let basis: Vec<Vec<i64>> = cd.gamma.iter().chain(&cd.perp).cloned().collect();
    let bf: Vec<Vec<f64>> = basis.iter().map(|row| row.iter().map(|&x| x as f64).collect()).collect();
    // Columns of B^{-1} bound the coefficients of ν - μ.
    let binv: Vec<Vec<f64>> = (0..r)
        .map(|c| {
            let e: Vec<f64> = (0..r).map(|k| if k == c { 1.0 } else { 0.0 }).collect();
            let bt: Vec<Vec<f64>> = (0..r).map(|i| (0..r).map(|k| bf[k][i]).collect()).collect();
            crate::numeric::solve(&bt, &e)
        })
        .collect();
    let rho2 = m.rho as f64 / m.scale as f64;
    let r2 = 4.0 * (n as f64).powi(2) + rho2;
    let lb = label_bounds(rs, r2);
    let lim = (r2 * m.scale as f64).ceil() as i64;
    let ff = |v: &[i64]| -> Vec<f64> { v.iter().map(|&x| x as f64).collect() };
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let mut total = C::new(0.0, 0.0);
    let mut count = 0usize;
    for rep in &cd.reps {
        let cb: Vec<i64> = (0..r)
            .map(|k| {
                let s: f64 = (0..r).map(|i| (lb[i] + rep[i].abs()) as f64 * binv[i][k].abs()).sum();
                s.ceil() as i64 + 1
            })
            .collect();
        let lo: Vec<i64> = cb.iter().map(|x| -x).collect();
        if box_size(&lo, &cb) > BOX_CAP {
            return Err(Error::Capability("coset enumeration box is too large".into()));
        }
        let repf = ff(rep);
        let e_mu = (m.norm_scaled(rep) - m.rho) as f64 / m.scale as f64;
        let a_phase = C::from_polar(1.0, 2.0 * PI * dot(&repf, &zp) - t * e_mu);
        let mut kappa = C::new(0.0, 0.0);
        let mut err = None;
        for_each_in_box(&lo, &cb, |c| {
            if err.is_some() {
                return;
            }
            let lam: Vec<i64> = (0..r).map(|i| (0..r).map(|k| c[k] * basis[k][i]).sum()).collect();
            let nu: Vec<i64> = rep.iter().zip(&lam).map(|(a, b)| a + b).collect();
            let e = m.norm_scaled(&nu);
            if e > lim || m.singular(rs, &nu) {
                return;
            }
            let energy = (e - m.rho) as f64 / m.scale as f64;
            let phi = cutoff(energy / (n as f64).powi(2));
            if phi == 0.0 {
                return;
            }
            let lamf = ff(&lam);
            let cross = m.inner_f(&lamf, &lamf) + 2.0 * m.inner_f(&repf, &lamf);
            let nuf = ff(&nu);
            let amp = phi * sys.dimension(&nuf);
            // J-labels of ν_J, moved into the dominant chamber of W_J.
            let l: Vec<i64> = par.base.iter().map(|b| rs.coroot_pairing(&nu, b)).collect();
            let (sign, ld) = match sub.weyl.iter().map(|w| (w.det, w.apply(&l))).find(|(_, x)| x.iter().all(|&y| y > 0)) {
                Some(x) => x,
                None => return,
            };
            let chi = match parabolic_from_labels(&par, &ld, p) {
                Ok(v) => v * sign as f64,
                Err(e) => {
                    err = Some(e);
                    return;
                }
            };
            count += 1;
            kappa += C::from_polar(amp, 2.0 * PI * dot(&lamf, &zp) - t * cross) * chi;
        });
        if let Some(e) = err {
            return Err(e);
        }
        total += a_phase * kappa;
    }
    let pa = charkit::root_pairings(rs, p.theta());
    let rest: C = pa
        .iter()
        .enumerate()
        .filter(|(k, _)| !par.contains_root(*k))
        .map(|(_, &x)| C::new(0.0, 2.0 * (PI * x).sin()))
        .product();
    let rhs = total / (rest * par.weyl_order as f64);
    let floor = 1e-9 * scale.sqrt();
    let residual = (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(floor);
    Ok(CellFormulaCheck { lhs, rhs, residual, cosets: cd.reps.len(), terms: count })
}

/// Max |K(t+T, H) - K(t, H)| over random (t, H), relative to ‖K‖_{L²} = (Σ φ² d²)^{1/2}.
///
/// Pointwise normalization is useless near zeros of K.
pub fn periodicity_check(rs: &RootSystem, n: u32, samples: usize, seed: u64) -> Result<f64> {
    let terms = kernel_terms(rs, n, false)?;
    let tp = period(rs);
    let scale: f64 = terms.iter().map(|x| x.weight * x.weight).sum::<f64>().sqrt();
    let mut r = rng::stream(&[seed, rng::str_key("period")]);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let t = tp * r.gen::<f64>();
        let p = alcove::uniform_point(rs, &mut r);
        let a = kernel_from_terms(rs, &terms, t, &p)?;
        let b = kernel_from_terms(rs, &terms, t + tp, &p)?;
        worst = worst.max((a - b).norm() / scale);
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct L2Row {
    pub t_fraction: f64,
    pub estimate: f64,
    pub se: f64,
    pub exact: f64,
    pub z: f64,
}

/// Monte-Carlo ‖K_N(t,·)‖²_{L²(U)} at several times against Σ φ² d_μ².
pub fn kernel_l2_invariance(rs: &RootSystem, n: u32, fractions: &[f64], samples: u64, seed: u64) -> Result<Vec<L2Row>> {
    rs.require_irreducible("kernel L² check")?;
    let whole = kernel_terms(rs, n, true)?;
    let exact: f64 = kernel_terms(rs, n, false)?.iter().map(|x| x.weight * x.weight).sum();
    let sys = System::get(&rs.datum.gram)?;
    let cn = alcove::n_threshold(rs);
    let cells = alcove::all_cells(rs, cn);
    let haar = alcove::haar_factor(rs);
    let tp = period(rs);
    let mut out = Vec::new();
    for (idx, &s) in fractions.iter().enumerate() {
        let t = tp * s;
        let f = |tt: &[f64]| -> f64 { kernel_delta(&whole, t, &sys.dual(&tt[1..])).norm_sqr() };
        let ints = alcove::integrate_cells(rs, &cells, samples, &[seed, idx as u64, rng::str_key("l2")], &f);
        let est = haar * ints.iter().map(|o| o.value).sum::<f64>();
        let se = haar * ints.iter().map(|o| o.se * o.se).sum::<f64>().sqrt();
        out.push(L2Row { t_fraction: s, estimate: est, se, exact, z: (est - exact) / se.max(1e-300) });
    }
    Ok(out)
}

/// A major arc t/T = a/q + γ with γ = coeff · N^{-exponent}.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Arc {
    pub a: i64,
    pub q: i64,
    pub gamma_coeff: f64,
    pub gamma_exponent: f64,
}

impl Arc {
    pub fn rational(a: i64, q: i64) -> Self {
        Self { a, q, gamma_coeff: 0.0, gamma_exponent: 0.0 }
    }

    pub fn gamma(&self, n: u32) -> f64 {
        self.gamma_coeff * (n as f64).powf(-self.gamma_exponent)
    }

    pub fn validate(&self, n: u32) -> Result<()> {
        if self.q < 1 || self.a.gcd(&self.q) != 1 {
            return Err(Error::Config(format!("({}, {}) is not a reduced fraction", self.a, self.q)));
        }
        if self.q >= n as i64 {
            return Err(Error::Config(format!("q = {} must be below N = {n}", self.q)));
        }
        if self.gamma(n).abs() > 1.0 / (self.q as f64 * n as f64) + 1e-15 {
            return Err(Error::Config(format!("|γ| = {} exceeds 1/(qN) at N = {n}", self.gamma(n))));
        }
        Ok(())
    }
}

pub(super) fn next_pow2(x: usize) -> usize {
    x.max(16).next_power_of_two()
}

/// Grid size for trapezoidal integration of |F|^p |δ|² on the torus.
pub(super) fn grid_size(rs: &RootSystem, max_label: i64, p: f64) -> usize {
    next_pow2((p.ceil() as usize + 1) * max_label as usize + 4 * rs.num_positive() + 2)
}

/// Irrational grid offsets keep every node off the walls.
pub(super) const OFFSETS: [f64; 2] = [0.381_966_011_250_105, 0.236_067_977_499_789_7];

/// (1/|W|) mean over the torus grid of |F|^p |δ|^{2-p}, where F = K δ has the
/// given Fourier coefficients.
fn torus_lp(rs: &RootSystem, coeffs: &[(Vec<i64>, C)], p: f64, m: usize) -> Result<f64> {
    let r = rs.rank;
    if r == 0 || r > 2 {
        return Err(Error::Capability(format!("torus FFT norms need rank 1 or 2, got {r}")));
    }
    let total = m.pow(r as u32);
    let mut grid = vec![C::new(0.0, 0.0); total];
    for (l, c) in coeffs {
        let mut idx = 0;
        let mut shift = 0.0;
        for i in 0..r {
            idx = idx * m + l[i].rem_euclid(m as i64) as usize;
            shift += l[i] as f64 * OFFSETS[i] / m as f64;
        }
        grid[idx] += c * C::from_polar(1.0, 2.0 * PI * shift);
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_inverse(m);
    for row in grid.chunks_mut(m) {
        fft.process(row);
    }
    if r == 2 {
        let mut col = vec![C::new(0.0, 0.0); m];
        for c in 0..m {
            for k in 0..m {
                col[k] = grid[k * m + c];
            }
            fft.process(&mut col);
            for k in 0..m {
                grid[k * m + c] = col[k];
            }
        }
    }
    // Index layout: first label is the slow axis.
    let pos: Vec<Vec<f64>> = rs.datum.positive.iter().map(|a| a.iter().map(|&x| x as f64).collect()).collect();
    let cartan: Vec<Vec<f64>> = rs.datum.cartan.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    let s: f64 = grid
        .par_iter()
        .enumerate()
        .map(|(idx, f)| {
            let mut x = [0.0; 2];
            let mut rem = idx;
            for i in (0..r).rev() {
                x[i] = ((rem % m) as f64 + OFFSETS[i]) / m as f64;
                rem /= m;
            }
            let theta: Vec<f64> = (0..r).map(|i| (0..r).map(|k| cartan[i][k] * x[k]).sum()).collect();
            let dl: f64 = pos.iter().map(|a| (2.0 * (PI * a.iter().zip(&theta).map(|(c, t)| c * t).sum::<f64>()).sin()).abs()).product();
            f.norm().powf(p) * dl.powf(2.0 - p)
        })
        .sum();
    Ok(s / total as f64 / rs.weyl_order() as f64)
}

/// ‖K_N(t,·)‖_{L^p(U)} at t/T = a/q + γ, by FFT on an off-wall torus grid.
pub fn kernel_norm_fft(rs: &RootSystem, n: u32, arc: &Arc, p: f64) -> Result<f64> {
    let terms = kernel_terms(rs, n, true)?;
    let gamma = arc.gamma(n);
    let max_label = terms.iter().flat_map(|t| t.labels.iter()).map(|x| x.abs()).max().unwrap_or(1);
    let coeffs: Vec<(Vec<i64>, C)> =
        terms.iter().map(|t| (t.labels.clone(), arc_phase(t.k, arc.a, arc.q, gamma) * t.weight)).collect();
    let m = grid_size(rs, max_label, p);
    Ok(torus_lp(rs, &coeffs, p, m)?.powf(1.0 / p))
}

/// Kernel L^p norms on a major arc, fitted against d - d/p.
pub fn kernel_lp_majorarc_scan(rs: &RootSystem, arc: &Arc, config: &LpScanConfig) -> Result<ScanResult> {
    rs.require_irreducible("kernel scan")?;
    config.validate(1)?;
    let p = config.p;
    let d = rs.group_dim() as f64;
    let r = rs.rank as f64;
    if p <= 2.0 * d / (d - r) {
        return Err(Error::Config(format!("p = {p} must exceed 2d/(d-r) = {}", 2.0 * d / (d - r))));
    }
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for &n in &config.n_values {
        arc.validate(n)?;
        let v = kernel_norm_fft(rs, n, arc, p)?;
        let g = arc.gamma(n).abs();
        let rhs = (n as f64).powf(d - d / p) / ((arc.q as f64).sqrt() * (1.0 + n as f64 * g.sqrt())).powf(r);
        notes.push(format!("N = {n}: norm/rhs = {:.6e}", v / rhs));
        rows.push(ScanRow { n, value: v, se: 0.0 });
    }
    let tol = config.tolerance.unwrap_or_else(|| super::default_tolerance(rs));
    let all: Vec<usize> = (1..=rs.rank).collect();
    let mut res = ScanResult::from_rows(Quantity::Kernel, rs, &all, &[], p, rows, d - d / p, tol, FitMode::Slope)?;
    res.notes = notes;
    res.notes.push(format!("arc a/q = {}/{}, gamma = {}·N^-{}", arc.a, arc.q, arc.gamma_coeff, arc.gamma_exponent));
    Ok(res)
}

#[derive(Clone, Debug, Serialize)]
pub struct QScaleRow {
    pub q: i64,
    pub norm: f64,
    /// (norm_q / norm_1) / q^{-r/2}; the target band is [1/2, 2].
    pub normalized: f64,
}

pub fn q_scaling_check(rs: &RootSystem, n: u32, p: f64, qs: &[i64]) -> Result<Vec<QScaleRow>> {
    let base = kernel_norm_fft(rs, n, &Arc::rational(0, 1), p)?;
    let mut out = Vec::new();
    for &qq in qs {
        let arc = if qq == 1 { Arc::rational(0, 1) } else { Arc::rational(1, qq) };
        arc.validate(n)?;
        let v = kernel_norm_fft(rs, n, &arc, p)?;
        out.push(QScaleRow { q: qq, norm: v, normalized: v / base / (qq as f64).powf(-(rs.rank as f64) / 2.0) });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivativeRow {
    pub order: usize,
    pub direction: usize,
    pub slope: f64,
    pub predicted: f64,
    pub pass: bool,
}

/// Finite differences of the amplitude P(0, n_1..n_r, H) along each n_j.
///
/// P is evaluated with the U_J integral in closed form, so that
/// P = φ d_ν Σ_{w∈W_J} det w e^{(wν_J)(X)} / Π_{α∈Σ_J^+} α(X), X = H_J^1.
pub fn derivative_bound_check(rs: &RootSystem, j: &[usize], n_values: &[u32], max_order: usize, seed: u64) -> Result<Vec<DerivativeRow>> {
    let par = rs.parabolic_subsystem(j)?;
    let sub = System::get(&par.datum.gram)?;
    let sys = System::get(&rs.datum.gram)?;
    let m = Metric::new(rs);
    let cd = coset_decomposition(rs, &par);
    let r = rs.rank;
    let basis: Vec<Vec<f64>> = cd.gamma.iter().chain(&cd.perp).map(|v| v.iter().map(|&x| x as f64).collect()).collect();
    let lens: Vec<f64> = (0..r).map(|i| to_f64(&rs.datum.gram[i][i])).collect();
    let blen: Vec<f64> = par.base.iter().map(|b| to_f64(&rs.datum.inner(b, b))).collect();
    let rho2 = m.rho as f64 / m.scale as f64;
    let npos = rs.num_positive() as f64;
    let nj = par.num_positive() as f64;
    // Sample directions, shared across N so the shapes are comparable.
    let mut rg = rng::stream(&[seed, rng::str_key("dP")]);
    let mut dirs = Vec::new();
    while dirs.len() < 48 {
        let c: Vec<f64> = (0..r).map(|_| 4.0 * rg.gen::<f64>() - 2.0).collect();
        let nu: Vec<f64> = (0..r).map(|i| (0..r).map(|k| c[k] * basis[k][i]).sum()).collect();
        let e = m.inner_f(&nu, &nu);
        if (1.0..3.5).contains(&e) {
            dirs.push(c);
        }
    }
    let amp = |nn: &[f64], n: u32, tj: &[f64]| -> C {
        let nu: Vec<f64> = (0..r).map(|i| (0..r).map(|k| nn[k] * basis[k][i]).sum()).collect();
        let phi = cutoff((m.inner_f(&nu, &nu) - rho2) / (n as f64).powi(2));
        let d = sys.dimension(&nu);
        if par.base.is_empty() {
            return C::new(phi * d, 0.0);
        }
        let l: Vec<f64> = par
            .base
            .iter()
            .zip(&blen)
            .map(|(b, bl)| (0..r).map(|i| nu[i] * b[i] as f64 * lens[i]).sum::<f64>() / bl)
            .collect();
        let z = sub.dual(tj);
        let num: C = sub
            .weyl
            .iter()
            .map(|w| {
                let wl = charkit::eval::apply_f64(w, &l);
                C::from_polar(w.det as f64, 2.0 * PI * wl.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>())
            })
            .sum();
        let den: f64 = sub.pos.iter().map(|a| 2.0 * PI * a.iter().zip(tj).map(|(x, y)| x * y).sum::<f64>()).product();
        num * phi * d / C::new(0.0, 1.0).powi(sub.pos.len() as i32) / den
    };
    let mut out = Vec::new();
    for order in 0..=max_order {
        for dir in 0..r {
            let mut pts = Vec::new();
            for &n in n_values {
                let nf = n as f64;
                let tj: Vec<f64> = (0..par.base.len()).map(|k| (0.3 + 0.2 * k as f64) / nf).collect();
                let mut best = 0.0f64;
                for c in &dirs {
                    let base: Vec<f64> = c.iter().map(|x| (x * nf).round()).collect();
                    // m-th forward difference: Σ (-1)^{m-i} C(m,i) P(n + i e_dir)
                    let mut acc = C::new(0.0, 0.0);
                    let mut binom = 1.0;
                    for i in 0..=order {
                        let mut nn = base.clone();
                        nn[dir] += i as f64;
                        let sgn = if (order - i) % 2 == 0 { 1.0 } else { -1.0 };
                        acc += amp(&nn, n, &tj) * (sgn * binom);
                        binom = binom * (order - i) as f64 / (i + 1) as f64;
                    }
                    best = best.max(acc.norm());
                }
                pts.push((nf, best));
            }
            let fit = fit_slope(&pts)?;
            let predicted = npos + nj - order as f64;
            out.push(DerivativeRow { order, direction: dir, slope: fit.slope, predicted, pass: (fit.slope - predicted).abs() <= 0.2 });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct MajorArcRow {
    pub n: u32,
    pub max_ratio: f64,
    pub points: usize,
}

/// max |K_N^J(t,H)| (√q(1+N‖γ‖^{1/2}))^r / N^{|Σ^+|+|Σ_J^+|+r} over arcs and H ∈ P_J.
pub fn majorarc_pointwise_check(
    rs: &RootSystem,
    n_values: &[u32],
    qs: &[i64],
    points_per_cell: usize,
    seed: u64,
) -> Result<(Vec<MajorArcRow>, f64)> {
    let sys = System::get(&rs.datum.gram)?;
    let r = rs.rank as f64;
    let npos = rs.num_positive() as f64;
    let mut rows = Vec::new();
    for &n in n_values {
        let terms = kernel_terms(rs, n, true)?;
        let cells = alcove::all_cells(rs, n);
        let mut best = 0.0f64;
        let mut count = 0;
        for cell in &cells {
            let par = rs.parabolic_subsystem(&cell.j)?;
            let pts = match alcove::sample_cell(rs, cell, points_per_cell, seed) {
                Ok((v, _)) => v,
                Err(Error::EmptyCell(_)) => continue,
                Err(e) => return Err(e),
            };
            for p in &pts {
                let z = sys.dual(p.theta());
                let pa = charkit::root_pairings(rs, p.theta());
                let dj: f64 = par.positive.iter().map(|&k| (2.0 * (PI * pa[k]).sin()).abs()).product();
                for &qq in qs {
                    if qq >= n as i64 {
                        continue;
                    }
                    let a = if qq == 1 { 0 } else { 1 };
                    for gcoef in [0.0, 0.5] {
                        let gamma = gcoef / (qq as f64 * n as f64);
                        let kd: C = terms
                            .iter()
                            .map(|t| {
                                let x: f64 = t.labels.iter().zip(&z).map(|(&l, y)| l as f64 * y).sum();
                                t.weight * C::from_polar(1.0, 2.0 * PI * x) * arc_phase(t.k, a, qq, gamma)
                            })
                            .sum();
                        let kj = kd.norm() * par.weyl_order as f64 / dj;
                        let den = ((qq as f64).sqrt() * (1.0 + n as f64 * gamma.sqrt())).powf(r);
                        let ratio = kj * den / (n as f64).powf(npos + par.num_positive() as f64 + r);
                        best = best.max(ratio);
                        count += 1;
                    }
                }
            }
        }
        rows.push(MajorArcRow { n, max_ratio: best, points: count });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|x| (x.n as f64, x.max_ratio)).collect();
    let slope = fit_slope(&pts)?.slope;
    Ok((rows, slope))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a1_at_identity() {
        let rs = RootSystem::build("A1").unwrap();
        let p = AlcovePoint::from_theta(&rs, &[1e-9]);
        let k = schrodinger_kernel(&rs, &KernelSpec { n: 8, t: 0.0 }, &p).unwrap();
        let want: f64 = (1..200).map(|n: i64| cutoff((n * n - 1) as f64 / 128.0) * (n * n) as f64).sum();
        assert!((k.re - want).abs() < 1e-6 * want && k.im.abs() < 1e-6 * want, "{k} vs {want}");
    }

    #[test]
    fn whole_lattice_agrees() {
        for label in ["A1", "A2", "B2"] {
            let rs = RootSystem::build(label).unwrap();
            let mut r = rng::stream(&[4]);
            for _ in 0..5 {
                let p = alcove::uniform_point(&rs, &mut r);
                let spec = KernelSpec::at_fraction(&rs, 6, r.gen());
                let a = schrodinger_kernel(&rs, &spec, &p).unwrap();
                let b = kernel_whole_lattice(&rs, &spec, &p).unwrap();
                assert!((a - b).norm() <= 1e-8 * a.norm().max(1.0), "{label}: {a} {b}");
            }
        }
    }

    #[test]
    fn periods() {
        for label in ["A1", "A2", "G2"] {
            let rs = RootSystem::build(label).unwrap();
            assert!(periodicity_check(&rs, 6, 20, 1).unwrap() < 1e-9, "{label}");
        }
        let rs = RootSystem::build("A1").unwrap();
        assert!((period(&rs) - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn cell_formula_a1_a2() {
        for label in ["A1", "A2"] {
            let rs = RootSystem::build(label).unwrap();
            let cn = alcove::n_threshold(&rs);
            for cell in alcove::all_cells(&rs, cn) {
                let Ok((pts, _)) = alcove::sample_cell(&rs, &cell, 2, 9) else { continue };
                for p in pts {
                    let c = kernel_cell_formula_check(&rs, &cell, 8, 0.37, &p).unwrap();
                    assert!(c.residual < 1e-7, "{label} {cell:?}: {c:?}");
                }
            }
        }
        // near the wall t_1 = 0
        let rs = RootSystem::build("A1").unwrap();
        let p = AlcovePoint::from_theta(&rs, &[1e-6]);
        let cell = alcove::classify(&rs, &p, 16).unwrap();
        assert_eq!(cell.j, vec![1]);
        let c = kernel_cell_formula_check(&rs, &cell, 8, 1.1, &p).unwrap();
        assert!(c.residual < 1e-7, "{c:?}");
    }

    #[test]
    fn l2_is_time_independent() {
        let rs = RootSystem::build("A1").unwrap();
        for row in kernel_l2_invariance(&rs, 8, &[0.0, 0.13, 0.5], 100_000, 2).unwrap() {
            assert!(row.z.abs() < 3.0, "{row:?}");
        }
    }

    #[test]
    fn fft_l2_matches_exact() {
        for label in ["A1", "A2"] {
            let rs = RootSystem::build(label).unwrap();
            let exact: f64 = kernel_terms(&rs, 8, false).unwrap().iter().map(|x| x.weight * x.weight).sum();
            let v = kernel_norm_fft(&rs, 8, &Arc::rational(1, 3), 2.0).unwrap();
            assert!((v * v - exact).abs() < 1e-8 * exact, "{label}: {} {exact}", v * v);
        }
    }

    #[test]
    fn a1_majorarc_slope() {
        let rs = RootSystem::build("A1").unwrap();
        let cfg = LpScanConfig { p: 4.0, n_values: vec![16, 32, 64, 128, 256], samples_per_cell: 0, seed: 0, tolerance: None };
        let res = kernel_lp_majorarc_scan(&rs, &Arc::rational(0, 1), &cfg).unwrap();
        assert!(res.pass, "{res:?}");
    }

    #[test]
    fn derivative_scaling_a1() {
        let rs = RootSystem::build("A1").unwrap();
        for row in derivative_bound_check(&rs, &[1], &[32, 64, 128, 256, 512], 2, 3).unwrap() {
            assert!(row.pass, "{row:?}");
        }
    }

    #[test]
    fn arc_validation() {
        assert!(Arc::rational(2, 4).validate(64).is_err());
        assert!(Arc::rational(1, 80).validate(64).is_err());
        assert!(Arc { a: 1, q: 3, gamma_coeff: 1.0, gamma_exponent: 1.0 }.validate(64).is_err());
        assert!(Arc { a: 1, q: 1, gamma_coeff: 1.0, gamma_exponent: 2.0 }.validate(64).is_ok());
    }
}
