//! Exact rational scalars, vectors and small dense matrices.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

pub type Q = Ratio<i64>;

pub fn q(n: i64) -> Q {
    Q::from_integer(n)
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn to_f64(x: &Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Exact vector in an ambient Euclidean realization.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightVector {
    pub coords: Vec<Q>,
}

impl WeightVector {
    pub fn zero(dim: usize) -> Self {
        Self { coords: vec![Q::zero(); dim] }
    }

    pub fn from_ints(v: &[i64]) -> Self {
        Self { coords: v.iter().map(|&x| q(x)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, s: Q) -> Self {
        Self { coords: self.coords.iter().map(|c| c * s).collect() }
    }

    /// `self + s * other`
    pub fn add_scaled(&self, s: Q, other: &Self) -> Self {
        Self {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + s * b).collect(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(to_f64).collect()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coords.iter().map(|c| c.to_string()).collect()
    }
}

impl Add for &WeightVector {
    type Output = WeightVector;
    fn add(self, o: &WeightVector) -> WeightVector {
        WeightVector { coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &WeightVector {
    type Output = WeightVector;
    fn sub(self, o: &WeightVector) -> WeightVector {
        WeightVector { coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &WeightVector {
    type Output = WeightVector;
    fn neg(self) -> WeightVector {
        WeightVector { coords: self.coords.iter().map(|a| -a).collect() }
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for WeightVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

pub type QMatrix = Vec<Vec<Q>>;

pub fn qmat_from_ints(m: &[Vec<i64>]) -> QMatrix {
    m.iter().map(|row| row.iter().map(|&x| q(x)).collect()).collect()
}

pub fn qmat_mul(a: &QMatrix, b: &QMatrix) -> QMatrix {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut out = vec![vec![Q::zero(); m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                out[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    out
}

/// Row vector times matrix.
pub fn qvec_mat(v: &[Q], m: &QMatrix) -> Vec<Q> {
    let cols = if m.is_empty() { 0 } else { m[0].len() };
    let mut out = vec![Q::zero(); cols];
    for (i, vi) in v.iter().enumerate() {
        if vi.is_zero() {
            continue;
        }
        for j in 0..cols {
            out[j] += vi * m[i][j];
        }
    }
    out
}

/// Inverse of a square rational matrix, `None` if singular.
pub fn qmat_inverse(a: &QMatrix) -> Option<QMatrix> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let p = m[col][col];
        for x in m[col].iter_mut() {
            *x /= p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col];
                let pivot_row = m[col].clone();
                for (x, y) in m[r].iter_mut().zip(pivot_row.iter()) {
                    *x -= f * y;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn qmat_det(a: &QMatrix) -> Q {
    let n = a.len();
    let mut m = a.clone();
    let mut det = Q::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Q::zero();
        };
        if piv != col {
            m.swap(col, piv);
            det = -det;
        }
        let p = m[col][col];
        det *= p;
        for r in col + 1..n {
            if !m[r][col].is_zero() {
                let f = m[r][col] / p;
                let pivot_row = m[col].clone();
                for (x, y) in m[r].iter_mut().zip(pivot_row.iter()) {
                    *x -= f * y;
                }
            }
        }
    }
    det
}

pub fn qmat_to_f64(a: &QMatrix) -> Vec<Vec<f64>> {
    a.iter().map(|row| row.iter().map(to_f64).collect()).collect()
}

/// Least common multiple of the denominators.
pub fn denom_lcm<'a>(xs: impl IntoIterator<Item = &'a Q>) -> i64 {
    xs.into_iter().fold(1i64, |acc, x| acc.lcm(x.denom()))
}

/// Greatest common divisor of rationals, as a nonnegative rational.
pub fn rational_gcd<'a>(xs: impl IntoIterator<Item = &'a Q>) -> Q {
    let mut g = Q::zero();
    for x in xs {
        let x = x.abs();
        if g.is_zero() {
            g = x;
        } else if !x.is_zero() {
            let n = (g.numer() * x.denom()).gcd(&(x.numer() * g.denom()));
            g = Q::new(n, g.denom() * x.denom());
        }
    }
    g
}

pub fn is_integer(x: &Q) -> bool {
    x.is_integer()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let a = qmat_from_ints(&[vec![2, -1], vec![-1, 2]]);
        let inv = qmat_inverse(&a).unwrap();
        assert_eq!(inv[0][0], qf(2, 3));
        assert_eq!(qmat_mul(&a, &inv), qmat_from_ints(&[vec![1, 0], vec![0, 1]]));
        assert_eq!(qmat_det(&a), q(3));
    }

    #[test]
    fn gcd_of_rationals() {
        assert_eq!(rational_gcd(&[qf(2, 3), qf(2, 3)]), qf(2, 3));
        assert_eq!(rational_gcd(&[qf(1, 2), q(3)]), qf(1, 2));
        assert_eq!(rational_gcd(&[qf(3, 2), q(4)]), qf(1, 2));
    }
}
