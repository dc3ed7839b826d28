//! Weight multiplicities by Freudenthal's formula, and the resulting character sums.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64 as C;

use crate::error::{Error, Result};
use crate::rational::{denom_lcm, to_f64};
use crate::rootsys::RootDatum;

pub const DEFAULT_WEIGHT_CAP: usize = 2_000_000;

/// All weights of an irreducible module with multiplicities.
#[derive(Debug)]
pub struct WeightDiagram {
    pub labels: Vec<Vec<i64>>,
    pub mult: Vec<u64>,
    /// Simple-root coefficients of each weight.
    pub coeffs: Vec<Vec<f64>>,
}

impl WeightDiagram {
    pub fn dimension(&self) -> u64 {
        self.mult.iter().sum()
    }

    /// Σ mult(ν) e^{2πi (ν, h)} with θ_j = (α_j, h).
    pub fn eval(&self, theta: &[f64]) -> C {
        let mut s = C::new(0.0, 0.0);
        for (c, &m) in self.coeffs.iter().zip(&self.mult) {
            let x: f64 = c.iter().zip(theta).map(|(a, b)| a * b).sum();
            s += C::from_polar(m as f64, 2.0 * PI * x);
        }
        s
    }
}

type Cache = RwLock<HashMap<String, Arc<WeightDiagram>>>;

fn cache() -> &'static Cache {
    static C: OnceLock<Cache> = OnceLock::new();
    C.get_or_init(|| RwLock::new(HashMap::new()))
}

fn dominant_rep(cartan: &[Vec<i64>], l: &[i64]) -> Vec<i64> {
    let mut v = l.to_vec();
    while let Some(i) = (0..v.len()).find(|&i| v[i] < 0) {
        let li = v[i];
        for j in 0..v.len() {
            v[j] -= li * cartan[i][j];
        }
    }
    v
}

/// Weight diagram of the module with highest weight `highest` (dominant labels).
pub fn weight_diagram(datum: &RootDatum, highest: &[i64], cap: usize) -> Result<Arc<WeightDiagram>> {
    let key = format!("{:?}|{highest:?}", datum.gram);
    if let Some(d) = cache().read().unwrap().get(&key) {
        return Ok(d.clone());
    }
    let d = Arc::new(build(datum, highest, cap)?);
    cache().write().unwrap().insert(key, d.clone());
    Ok(d)
}

fn build(datum: &RootDatum, highest: &[i64], cap: usize) -> Result<WeightDiagram> {
    let r = datum.rank();
    if highest.iter().any(|&x| x < 0) {
        return Err(Error::Domain(format!("highest weight {highest:?} is not dominant")));
    }
    let cartan = &datum.cartan;
    let wg = datum.weight_gram();
    let scale = denom_lcm(wg.iter().flatten()) as i128;
    let gi: Vec<Vec<i128>> = wg.iter().map(|row| row.iter().map(|x| (x * crate::rational::q(scale as i64)).to_integer() as i128).collect()).collect();
    let inner = |a: &[i64], b: &[i64]| -> i128 {
        let mut s = 0i128;
        for i in 0..r {
            if a[i] == 0 {
                continue;
            }
            for j in 0..r {
                s += a[i] as i128 * gi[i][j] * b[j] as i128;
            }
        }
        s
    };
    let roots: Vec<Vec<i64>> = datum.positive.iter().map(|a| datum.coroot_pairings(a)).collect();
    let heights: Vec<i64> = datum.positive.iter().map(|a| a.iter().sum()).collect();

    // Dominant weights below the highest one, with their depth.
    let mut depth: HashMap<Vec<i64>, i64> = HashMap::new();
    depth.insert(highest.to_vec(), 0);
    let mut queue = VecDeque::from([highest.to_vec()]);
    while let Some(v) = queue.pop_front() {
        let dv = depth[&v];
        for (a, h) in roots.iter().zip(&heights) {
            let w: Vec<i64> = v.iter().zip(a).map(|(x, y)| x - y).collect();
            if w.iter().all(|&x| x >= 0) && !depth.contains_key(&w) {
                depth.insert(w.clone(), dv + h);
                queue.push_back(w);
                if depth.len() > cap {
                    return Err(Error::Capability(format!("weight diagram exceeds {cap} dominant weights")));
                }
            }
        }
    }
    let mut dom: Vec<(i64, Vec<i64>)> = depth.into_iter().map(|(k, v)| (v, k)).collect();
    dom.sort();
    let lr: Vec<i64> = highest.iter().map(|x| x + 1).collect();
    let top = inner(&lr, &lr);
    let mut mult: HashMap<Vec<i64>, i128> = HashMap::new();
    for (dpt, nu) in &dom {
        if *dpt == 0 {
            mult.insert(nu.clone(), 1);
            continue;
        }
        let mut acc = 0i128;
        for a in &roots {
            let mut w = nu.clone();
            loop {
                for (x, y) in w.iter_mut().zip(a) {
                    *x += y;
                }
                let Some(&m) = mult.get(&dominant_rep(cartan, &w)) else { break };
                acc += m * inner(&w, a);
            }
        }
        let nr: Vec<i64> = nu.iter().map(|x| x + 1).collect();
        let den = top - inner(&nr, &nr);
        debug_assert!(den > 0 && (2 * acc) % den == 0);
        mult.insert(nu.clone(), 2 * acc / den);
    }

    // Expand each dominant weight to its W-orbit.
    let inv = {
        let q: crate::rational::QMatrix = cartan.iter().map(|row| row.iter().map(|&x| crate::rational::q(x)).collect()).collect();
        crate::rational::qmat_inverse(&q).expect("Cartan invertible")
    };
    let mut labels = Vec::new();
    let mut mults = Vec::new();
    for (_, nu) in &dom {
        let m = mult[nu];
        if m == 0 {
            continue;
        }
        let mut seen = std::collections::HashSet::from([nu.clone()]);
        let mut q = vec![nu.clone()];
        while let Some(v) = q.pop() {
            for i in 0..r {
                if v[i] == 0 {
                    continue;
                }
                let mut w = v.clone();
                for j in 0..r {
                    w[j] -= v[i] * cartan[i][j];
                }
                if seen.insert(w.clone()) {
                    q.push(w);
                }
            }
            if seen.len() + labels.len() > cap {
                return Err(Error::Capability(format!("weight diagram exceeds {cap} weights")));
            }
        }
        let mut orbit: Vec<Vec<i64>> = seen.into_iter().collect();
        orbit.sort();
        for w in orbit {
            labels.push(w);
            mults.push(m as u64);
        }
    }
    let coeffs = labels
        .iter()
        .map(|l| (0..r).map(|j| (0..r).map(|i| l[i] as f64 * to_f64(&inv[i][j])).sum()).collect())
        .collect();
    Ok(WeightDiagram { labels, mult: mults, coeffs })
}
