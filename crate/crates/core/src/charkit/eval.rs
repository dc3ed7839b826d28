//! Alternating-sum ratios Σ_w det w e^{(wγ)(h)} / Π_{α>0} 2i sin(π(α,h)) on a root datum.
//!
//! The evaluator picks, at each level, whichever of the direct quotient, a
//! Taylor expansion of the numerator, or a split along a sub-parabolic has the
//! smallest estimated rounding error.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use num_complex::Complex64 as C;

use crate::error::Result;
use crate::rational::{qmat_inverse, to_f64, QMatrix};
use crate::rootsys::RootDatum;
use crate::weyl::{weyl_group_of, WeylElement, DEFAULT_WEYL_CAP};

/// A root datum with its Weyl group and float caches.
#[derive(Debug)]
pub struct System {
    pub datum: RootDatum,
    pub weyl: Vec<WeylElement>,
    /// Inverse Cartan matrix: base coefficients c = labels · inv.
    pub inv: Vec<Vec<f64>>,
    pub pos: Vec<Vec<f64>>,
    pub comps: Vec<Vec<usize>>,
    pub half_len: Vec<f64>,
    pub rho_pair: Vec<f64>,
}

type Cache = RwLock<HashMap<String, Arc<System>>>;

fn cache() -> &'static Cache {
    static C: std::sync::OnceLock<Cache> = std::sync::OnceLock::new();
    C.get_or_init(|| RwLock::new(HashMap::new()))
}

pub fn sub_gram(g: &QMatrix, nodes: &[usize]) -> QMatrix {
    nodes.iter().map(|&a| nodes.iter().map(|&b| g[a][b]).collect()).collect()
}

impl System {
    pub fn get(gram: &QMatrix) -> Result<Arc<System>> {
        let key = format!("{gram:?}");
        if let Some(s) = cache().read().unwrap().get(&key) {
            return Ok(s.clone());
        }
        let s = Arc::new(Self::build(gram.clone())?);
        cache().write().unwrap().insert(key, s.clone());
        Ok(s)
    }

    fn build(gram: QMatrix) -> Result<Self> {
        let datum = RootDatum::from_gram(gram);
        let r = datum.rank();
        let order: u128 = if r == 0 { 1 } else { datum.component_types().iter().map(|t| t.weyl_order()).product() };
        let weyl = weyl_group_of(&datum, order, DEFAULT_WEYL_CAP)?;
        let inv = if r == 0 {
            Vec::new()
        } else {
            let q: QMatrix = datum.cartan.iter().map(|row| row.iter().map(|&x| crate::rational::q(x)).collect()).collect();
            qmat_inverse(&q).expect("Cartan invertible").iter().map(|row| row.iter().map(to_f64).collect()).collect()
        };
        let pos: Vec<Vec<f64>> = datum.positive.iter().map(|a| a.iter().map(|&x| x as f64).collect()).collect();
        let comps = if r == 0 { Vec::new() } else { datum.components() };
        let half_len: Vec<f64> = (0..r).map(|i| to_f64(&datum.gram[i][i]) / 2.0).collect();
        let rho_pair = pos.iter().map(|a| a.iter().zip(&half_len).map(|(x, h)| x * h).sum()).collect();
        Ok(Self { datum, weyl, inv, pos, comps, half_len, rho_pair })
    }

    pub fn rank(&self) -> usize {
        self.datum.rank()
    }

    /// (α, γ) for a positive root given by base coefficients, γ by labels.
    fn root_pair(&self, a: &[f64], l: &[f64]) -> f64 {
        a.iter().zip(l).zip(&self.half_len).map(|((x, y), h)| x * y * h).sum()
    }

    /// Weyl dimension polynomial Π(α,γ)/(α,ρ) in floats.
    pub fn dimension(&self, l: &[f64]) -> f64 {
        self.pos.iter().zip(&self.rho_pair).map(|(a, rp)| self.root_pair(a, l) / rp).product()
    }

    /// z = inv · u, so that (γ, h) = labels(γ) · z.
    pub fn dual(&self, u: &[f64]) -> Vec<f64> {
        self.inv.iter().map(|row| row.iter().zip(u).map(|(a, b)| a * b).sum()).collect()
    }
}

pub fn apply_f64(w: &WeylElement, l: &[f64]) -> Vec<f64> {
    let r = l.len();
    (0..r).map(|i| (0..r).map(|k| w.matrix[i * r + k] as f64 * l[k]).sum()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn two_i_sin(x: f64) -> C {
    C::new(0.0, 2.0 * (PI * x).sin())
}

/// sin(πλu)/sin(πu), the rank-one ratio.
pub fn rank_one(l: f64, u: f64) -> C {
    let s = (PI * u).sin();
    if s.abs() < 1e-300 {
        let n = u.round();
        let sign = if ((n as i64) * (l as i64 - 1)).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        return C::new(sign * l, 0.0);
    }
    C::new((PI * l * u).sin() / s, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Quotient,
    Taylor,
    Split,
}

/// Evaluate χ^D_γ(h) for γ given by labels and h by u_j = (β_j, h), u ≥ 0.
pub fn alt_ratio(sys: &System, l: &[f64], u: &[f64]) -> Result<C> {
    let r = l.len();
    if r == 0 {
        return Ok(C::new(1.0, 0.0));
    }
    if sys.comps.len() > 1 {
        let mut v = C::new(1.0, 0.0);
        for comp in &sys.comps {
            let sub = System::get(&sub_gram(&sys.datum.gram, comp))?;
            let lc: Vec<f64> = comp.iter().map(|&i| l[i]).collect();
            let uc: Vec<f64> = comp.iter().map(|&i| u[i]).collect();
            v *= alt_ratio(&sub, &lc, &uc)?;
        }
        return Ok(v);
    }
    if r == 1 {
        return Ok(rank_one(l[0], u[0]));
    }
    let d = sys.dimension(l);
    if d == 0.0 {
        return Ok(C::new(0.0, 0.0));
    }
    let umax = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if umax == 0.0 {
        return Ok(C::new(d, 0.0));
    }
    let z = sys.dual(u);
    let xs: Vec<f64> = sys.weyl.iter().map(|w| 2.0 * PI * dot(&apply_f64(w, l), &z)).collect();
    let pa: Vec<f64> = sys.pos.iter().map(|a| dot(a, u)).collect();
    let delta: C = pa.iter().map(|&x| two_i_sin(x)).product();
    let n0 = sys.pos.len();
    let nw = sys.weyl.len() as f64;

    // Rounding-error bounds on the numerator, all relative to the same |δ|.
    let err_q = nw;
    let xmax = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let err_t = if xmax < 40.0 { taylor_scale(&xs, n0) } else { f64::INFINITY };
    let small: Vec<usize> = (0..r).filter(|&j| u[j].abs() < umax / 16.0).collect();
    let err_s = if small.is_empty() {
        f64::INFINITY
    } else {
        // Outer cancellation is against δ_rest instead of δ.
        let rest: C = sys
            .pos
            .iter()
            .zip(&pa)
            .filter(|(a, _)| (0..r).any(|k| a[k] != 0.0 && !small.contains(&k)))
            .map(|(_, &x)| two_i_sin(x))
            .product();
        nw * d.abs().max(1.0) * delta.norm() / rest.norm()
    };
    let route = if err_s < err_q.min(err_t) {
        Route::Split
    } else if err_t < err_q {
        Route::Taylor
    } else {
        Route::Quotient
    };
    match route {
        Route::Quotient => {
            let num: C = sys.weyl.iter().zip(&xs).map(|(w, &x)| C::from_polar(w.det as f64, x)).sum();
            Ok(num / delta)
        }
        Route::Taylor => Ok(taylor_numerator(sys, &xs, n0) / delta),
        Route::Split => split(sys, l, u, &small, &pa),
    }
}

/// max_{n ≥ n0} Σ_w |x_w|^n / n!.
fn taylor_scale(xs: &[f64], n0: usize) -> f64 {
    let mut p: Vec<f64> = xs.iter().map(|x| x.abs()).map(|x| (1..=n0).fold(1.0, |acc, k| acc * x / k as f64)).collect();
    let mut best = 0.0f64;
    for n in n0..n0 + 400 {
        let s: f64 = p.iter().sum();
        best = best.max(s);
        if s < best * 1e-3 && n > n0 + 2 {
            break;
        }
        for (pi, x) in p.iter_mut().zip(xs) {
            *pi *= x.abs() / (n + 1) as f64;
        }
    }
    best
}

fn taylor_numerator(sys: &System, xs: &[f64], n0: usize) -> C {
    let dets: Vec<f64> = sys.weyl.iter().map(|w| w.det as f64).collect();
    let mut p: Vec<f64> = xs.iter().map(|&x| (1..=n0).fold(1.0, |acc, k| acc * x / k as f64)).collect();
    let ipow = [C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(-1.0, 0.0), C::new(0.0, -1.0)];
    let mut acc = C::new(0.0, 0.0);
    for n in n0..n0 + 400 {
        let s: f64 = p.iter().zip(&dets).map(|(a, b)| a * b).sum();
        acc += ipow[n % 4] * s;
        let mag: f64 = p.iter().map(|x| x.abs()).sum();
        if n > n0 + 1 && mag < 1e-18 * acc.norm() {
            break;
        }
        for (pi, x) in p.iter_mut().zip(xs) {
            *pi *= x / (n + 1) as f64;
        }
    }
    acc
}

/// Split along the sub-parabolic on the small nodes S:
/// χ = Σ_{w : wγ S-dominant} det w e^{2πi (wγ, h_S^⊥)} χ^S_{(wγ)_S}(h_S) / δ_rest.
fn split(sys: &System, l: &[f64], u: &[f64], small: &[usize], pa: &[f64]) -> Result<C> {
    let r = l.len();
    let sub = System::get(&sub_gram(&sys.datum.gram, small))?;
    let z = sys.dual(u);
    let us: Vec<f64> = small.iter().map(|&j| u[j]).collect();
    let zs = sub.dual(&us);
    let mut num = C::new(0.0, 0.0);
    for w in &sys.weyl {
        let wl = apply_f64(w, l);
        let ls: Vec<f64> = small.iter().map(|&j| wl[j]).collect();
        if ls.iter().any(|&x| x <= 0.0) {
            continue;
        }
        let phase = 2.0 * PI * (dot(&wl, &z) - dot(&ls, &zs));
        num += C::from_polar(w.det as f64, phase) * alt_ratio(&sub, &ls, &us)?;
    }
    let rest: C = sys
        .pos
        .iter()
        .zip(pa)
        .filter(|(a, _)| (0..r).any(|k| a[k] != 0.0 && !small.contains(&k)))
        .map(|(_, &x)| two_i_sin(x))
        .product();
    Ok(num / rest)
}
