//! Finite Weyl groups as integer matrices on Dynkin-label coordinates.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::rootsys::{RootDatum, RootSystem};

pub const DEFAULT_WEYL_CAP: u128 = 1_000_000;

/// A Weyl group element: `labels' = matrix * labels`, row-major r×r.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeylElement {
    pub matrix: Vec<i64>,
    pub det: i64,
}

impl WeylElement {
    pub fn apply(&self, labels: &[i64]) -> Vec<i64> {
        let r = labels.len();
        (0..r).map(|i| (0..r).map(|k| self.matrix[i * r + k] * labels[k]).sum()).collect()
    }
}

/// Simple reflection s_i on labels: (s_i λ)_j = λ_j - λ_i A[i][j].
fn simple_reflection(cartan: &[Vec<i64>], i: usize) -> Vec<i64> {
    let r = cartan.len();
    let mut m = vec![0i64; r * r];
    for j in 0..r {
        m[j * r + j] = 1;
        m[j * r + i] -= cartan[i][j];
    }
    m
}

fn mat_mul(a: &[i64], b: &[i64], r: usize) -> Vec<i64> {
    let mut out = vec![0i64; r * r];
    for i in 0..r {
        for k in 0..r {
            let x = a[i * r + k];
            if x != 0 {
                for j in 0..r {
                    out[i * r + j] += x * b[k * r + j];
                }
            }
        }
    }
    out
}

/// Enumerate W by closure under simple reflections.
pub fn weyl_group_of(datum: &RootDatum, expected_order: u128, cap: u128) -> Result<Vec<WeylElement>> {
    if expected_order > cap {
        return Err(Error::Capability(format!(
            "|W| = {expected_order} exceeds the cap {cap}; use combinatorial-only operations"
        )));
    }
    let r = datum.rank();
    let gens: Vec<Vec<i64>> = (0..r).map(|i| simple_reflection(&datum.cartan, i)).collect();
    let mut id = vec![0i64; r * r];
    for i in 0..r {
        id[i * r + i] = 1;
    }
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    seen.insert(id.clone());
    let mut out = vec![WeylElement { matrix: id, det: 1 }];
    let mut head = 0;
    while head < out.len() {
        let w = out[head].clone();
        head += 1;
        for g in &gens {
            let m = mat_mul(g, &w.matrix, r);
            if seen.insert(m.clone()) {
                out.push(WeylElement { matrix: m, det: -w.det });
            }
        }
    }
    Ok(out)
}

pub fn weyl_group_elements(rs: &RootSystem) -> Result<Vec<WeylElement>> {
    weyl_group_of(&rs.datum, rs.weyl_order(), DEFAULT_WEYL_CAP)
}

/// Ambient realization of a Weyl element (float), for inspection.
pub fn ambient_matrix(rs: &RootSystem, w: &WeylElement) -> Vec<Vec<f64>> {
    // The action on ambient vectors is fixed by the images of the simple roots;
    // the orthogonal complement of the root span is fixed pointwise.
    let n = rs.ambient_dim;
    let r = rs.rank;
    let simple: Vec<Vec<f64>> = rs.simple_roots.iter().map(|v| v.to_f64()).collect();
    let metric: Vec<f64> = rs.metric.iter().map(crate::rational::to_f64).collect();
    let mut out = vec![vec![0.0; n]; n];
    for col in 0..n {
        let mut x = vec![0.0; n];
        x[col] = 1.0;
        // reflect through the word is unknown; use s_beta products via labels:
        // decompose x = x_par + x_perp with x_par in the root span.
        let gram: Vec<Vec<f64>> = (0..r)
            .map(|i| (0..r).map(|j| (0..n).map(|k| simple[i][k] * simple[j][k] * metric[k]).sum()).collect())
            .collect();
        let rhs: Vec<f64> = (0..r).map(|i| (0..n).map(|k| simple[i][k] * x[k] * metric[k]).sum()).collect();
        let c = solve(&gram, &rhs);
        let par: Vec<f64> = (0..n).map(|k| (0..r).map(|i| c[i] * simple[i][k]).sum()).collect();
        // act on coefficient vector: simple root α_i has labels = row i of the Cartan matrix
        let mut img = vec![0.0; n];
        for i in 0..r {
            let labels = rs.datum.cartan[i].clone();
            let wl = w.apply(&labels);
            let coeff = rs.labels_to_coeffs_f64(&wl);
            for k in 0..n {
                img[k] += c[i] * (0..r).map(|m| coeff[m] * simple[m][k]).sum::<f64>();
            }
        }
        for k in 0..n {
            out[k][col] = img[k] + (x[k] - par[k]);
        }
    }
    out
}

fn solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(row, &bi)| {
        let mut r = row.clone();
        r.push(bi);
        r
    }).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs())).unwrap();
        m.swap(col, piv);
        let p = m[col][col];
        for r in 0..n {
            if r != col {
                let f = m[r][col] / p;
                for c in col..=n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    (0..n).map(|i| m[i][n] / m[i][i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        for (label, n) in [("A1", 2usize), ("A2", 6), ("B2", 8), ("G2", 12), ("F4", 1152), ("A1xA2", 12)] {
            let rs = RootSystem::build(label).unwrap();
            let w = weyl_group_elements(&rs).unwrap();
            assert_eq!(w.len(), n, "{label}");
            let dets: i64 = w.iter().map(|x| x.det).sum();
            assert_eq!(dets, 0, "{label}");
        }
    }

    #[test]
    fn cap_enforced() {
        let rs = RootSystem::build("E8").unwrap();
        assert!(matches!(weyl_group_elements(&rs), Err(Error::Capability(_))));
    }

    #[test]
    fn ambient_matrices_are_orthogonal() {
        let rs = RootSystem::build("B2").unwrap();
        let metric: Vec<f64> = rs.metric.iter().map(crate::rational::to_f64).collect();
        for w in weyl_group_elements(&rs).unwrap() {
            let m = ambient_matrix(&rs, &w);
            for a in 0..2 {
                for b in 0..2 {
                    let ip: f64 = (0..2).map(|k| m[k][a] * m[k][b] * metric[k]).sum();
                    let want = if a == b { metric[a] } else { 0.0 };
                    assert!((ip - want).abs() < 1e-12);
                }
            }
        }
    }
}
