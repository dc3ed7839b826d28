//! Quadratic exponential sums with exact phase reduction.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use num_integer::Integer;
use serde::Serialize;

use super::count::is_prime;
use crate::error::{Error, Result};
use crate::rational::{denom_lcm, Q};
use crate::rootsys::RootSystem;

/// Positive-definite integral form k ↦ k A kᵀ with an optional linear part.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralQuadraticForm {
    pub a: Vec<Vec<i64>>,
    pub b: Option<Vec<i64>>,
    /// Integrality scalar: A = M · Gram exactly.
    pub m: i64,
}

impl IntegralQuadraticForm {
    pub fn new(a: Vec<Vec<i64>>) -> Result<Self> {
        let f = Self { a, b: None, m: 1 };
        f.validate()?;
        Ok(f)
    }

    /// M · Gram of the fundamental weights, with M the least integrality scalar.
    pub fn from_weight_lattice(rs: &RootSystem) -> Self {
        let g = rs.datum.weight_gram();
        let m = denom_lcm(g.iter().flatten());
        let a = g.iter().map(|row| row.iter().map(|x: &Q| (x * m).to_integer()).collect()).collect();
        Self { a, b: None, m }
    }

    pub fn rank(&self) -> usize {
        self.a.len()
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.a.len();
        if self.a.iter().any(|row| row.len() != r) {
            return Err(Error::Config("quadratic form matrix must be square".into()));
        }
        for i in 0..r {
            for j in 0..r {
                if self.a[i][j] != self.a[j][i] {
                    return Err(Error::Config("quadratic form matrix must be symmetric".into()));
                }
            }
        }
        // Sylvester: all leading minors positive.
        for k in 1..=r {
            let sub: Vec<Vec<i128>> = (0..k).map(|i| (0..k).map(|j| self.a[i][j] as i128).collect()).collect();
            if crate::hnf::det(&sub) <= 0 {
                return Err(Error::Config("quadratic form must be positive definite".into()));
            }
        }
        Ok(())
    }

    pub fn eval(&self, k: &[i64]) -> i64 {
        let r = k.len();
        let mut s = 0;
        for i in 0..r {
            for j in 0..r {
                s += self.a[i][j] * k[i] * k[j];
            }
        }
        s
    }
}

/// e(k/q) for k reduced mod q.
pub struct PhaseTable {
    pub q: i64,
    table: Vec<C>,
}

impl PhaseTable {
    pub fn new(q: i64) -> Self {
        let table = (0..q).map(|k| C::from_polar(1.0, 2.0 * PI * k as f64 / q as f64)).collect();
        Self { q, table }
    }

    pub fn e(&self, k: i64) -> C {
        self.table[k.rem_euclid(self.q) as usize]
    }
}

pub fn mod_inverse(a: i64, q: i64) -> Option<i64> {
    let g = a.rem_euclid(q).extended_gcd(&q);
    (g.gcd == 1).then(|| g.x.rem_euclid(q))
}

/// Jacobi symbol (a | n) for odd n > 0; the Legendre symbol when n is prime.
pub fn jacobi(a: i64, n: i64) -> i64 {
    assert!(n > 0 && n % 2 == 1);
    let mut a = a.rem_euclid(n);
    let mut n = n;
    let mut t = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// S(a, c; q) = q^{-r} Σ_{k ∈ (Z/q)^r} e(-(a/q) k A kᵀ - (1/q) k·c).
pub fn gauss_sum(form: &IntegralQuadraticForm, a: i64, c: &[i64], q: i64) -> Result<C> {
    if q < 1 {
        return Err(Error::Domain(format!("modulus q = {q} must be positive")));
    }
    if a.gcd(&q) != 1 {
        return Err(Error::Domain(format!("gcd(a, q) = gcd({a}, {q}) ≠ 1")));
    }
    let r = form.rank();
    let mut hist = vec![0u64; q as usize];
    let mut k = vec![0i64; r];
    loop {
        let v = (a * form.eval(&k) + k.iter().zip(c).map(|(x, y)| x * y).sum::<i64>()).rem_euclid(q);
        hist[v as usize] += 1;
        let mut i = 0;
        while i < r {
            k[i] += 1;
            if k[i] < q {
                break;
            }
            k[i] = 0;
            i += 1;
        }
        if i == r {
            break;
        }
    }
    let pt = PhaseTable::new(q);
    let s: C = hist.iter().enumerate().filter(|(_, &n)| n > 0).map(|(v, &n)| pt.e(-(v as i64)) * n as f64).sum();
    Ok(s / (q as f64).powi(r as i32))
}

/// 𝒮(q, n0) = Σ_{(a,q)=1} S(a, a b + m; q) e(a n0 / q).
pub fn script_s(form: &IntegralQuadraticForm, b: &[i64], m: &[i64], n0: i64, q: i64) -> Result<C> {
    let pt = PhaseTable::new(q);
    let mut s = C::new(0.0, 0.0);
    for a in 0..q {
        if a.gcd(&q) != 1 {
            continue;
        }
        let c: Vec<i64> = b.iter().zip(m).map(|(x, y)| a * x + y).collect();
        s += gauss_sum(form, a, &c, q)? * pt.e(a * n0);
    }
    Ok(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct MultiplicativityCheck {
    pub q1: i64,
    pub q2: i64,
    /// |𝒮(q1 q2) - 𝒮(q1) 𝒮(q2)| with m as given (holds exactly when m = 0).
    pub plain_residual: f64,
    /// |𝒮(q1 q2; m) - 𝒮(q1; q2* m) 𝒮(q2; q1* m)|, inverses taken mod the other factor.
    pub twisted_residual: f64,
}

pub fn check_multiplicativity(form: &IntegralQuadraticForm, b: &[i64], m: &[i64], n0: i64, q1: i64, q2: i64) -> Result<MultiplicativityCheck> {
    if q1.gcd(&q2) != 1 {
        return Err(Error::Domain(format!("{q1} and {q2} are not coprime")));
    }
    let whole = script_s(form, b, m, n0, q1 * q2)?;
    let plain = script_s(form, b, m, n0, q1)? * script_s(form, b, m, n0, q2)?;
    let i2 = mod_inverse(q2, q1).unwrap_or(0);
    let i1 = mod_inverse(q1, q2).unwrap_or(0);
    let m1: Vec<i64> = m.iter().map(|x| x * i2).collect();
    let m2: Vec<i64> = m.iter().map(|x| x * i1).collect();
    let twisted = script_s(form, b, &m1, n0, q1)? * script_s(form, b, &m2, n0, q2)?;
    Ok(MultiplicativityCheck { q1, q2, plain_residual: (whole - plain).norm(), twisted_residual: (whole - twisted).norm() })
}

/// K(m, n; q) = Σ_{(a,q)=1} e((a m + a* n)/q).
pub fn kloosterman(m: i64, n: i64, q: i64) -> C {
    let pt = PhaseTable::new(q);
    (1..q).filter_map(|a| mod_inverse(a, q).map(|ai| pt.e(a * m + ai * n))).sum()
}

/// Salié sum: the Kloosterman sum twisted by the Jacobi symbol (a | q), q odd.
pub fn salie(m: i64, n: i64, q: i64) -> C {
    let pt = PhaseTable::new(q);
    (1..q).filter_map(|a| mod_inverse(a, q).map(|ai| pt.e(a * m + ai * n) * jacobi(a, q) as f64)).sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct WeilReport {
    pub primes: usize,
    pub pairs: u64,
    pub kloosterman_max_ratio: f64,
    pub salie_max_ratio: f64,
    pub violations: u64,
}

/// Exhaustive Weil and Salié bound checks for every prime q ≤ max_q and all (m, n) mod q.
pub fn weil_bound_check(max_q: i64) -> WeilReport {
    use rayon::prelude::*;
    let primes: Vec<i64> = (3..=max_q).filter(|&q| is_prime(q as u64)).collect();
    let per: Vec<(u64, f64, f64, u64)> = primes
        .par_iter()
        .map(|&q| {
            let pt = PhaseTable::new(q);
            let inv: Vec<i64> = (0..q).map(|a| mod_inverse(a, q).unwrap_or(0)).collect();
            let leg: Vec<f64> = (0..q).map(|a| jacobi(a, q) as f64).collect();
            let (mut kr, mut sr, mut bad, mut pairs) = (0.0f64, 0.0f64, 0u64, 0u64);
            let sq = (q as f64).sqrt();
            for m in 0..q {
                for n in 0..q {
                    let mut k = C::new(0.0, 0.0);
                    let mut s = C::new(0.0, 0.0);
                    for a in 1..q {
                        let e = pt.e(a * m + inv[a as usize] * n);
                        k += e;
                        s += e * leg[a as usize];
                    }
                    let g = m.gcd(&n).gcd(&q) as f64;
                    let kb = 2.0 * g.sqrt() * sq;
                    let sb = 2.0 * sq;
                    kr = kr.max(k.norm() / kb);
                    sr = sr.max(s.norm() / sb);
                    if k.norm() > kb * (1.0 + 1e-9) || s.norm() > sb * (1.0 + 1e-9) {
                        bad += 1;
                    }
                    pairs += 1;
                }
            }
            (pairs, kr, sr, bad)
        })
        .collect();
    WeilReport {
        primes: primes.len() + usize::from(max_q >= 2),
        pairs: per.iter().map(|x| x.0).sum(),
        kloosterman_max_ratio: per.iter().map(|x| x.1).fold(0.0, f64::max),
        salie_max_ratio: per.iter().map(|x| x.2).fold(0.0, f64::max),
        violations: per.iter().map(|x| x.3).sum(),
    }
}

/// Matrix inverse over F_q by Gauss-Jordan.
pub fn mat_inverse_mod(a: &[Vec<i64>], q: i64) -> Option<Vec<Vec<i64>>> {
    let r = a.len();
    let mut m: Vec<Vec<i64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut v: Vec<i64> = row.iter().map(|x| x.rem_euclid(q)).collect();
            v.extend((0..r).map(|j| i64::from(i == j)));
            v
        })
        .collect();
    for col in 0..r {
        let piv = (col..r).find(|&i| m[i][col] != 0)?;
        m.swap(col, piv);
        let inv = mod_inverse(m[col][col], q)?;
        for x in m[col].iter_mut() {
            *x = (*x * inv).rem_euclid(q);
        }
        for i in 0..r {
            if i != col && m[i][col] != 0 {
                let f = m[i][col];
                for j in 0..2 * r {
                    m[i][j] = (m[i][j] - f * m[col][j]).rem_euclid(q);
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[r..].to_vec()).collect())
}

fn vec_mat(v: &[i64], a: &[Vec<i64>], q: i64) -> Vec<i64> {
    (0..a.len()).map(|j| v.iter().enumerate().map(|(i, x)| x * a[i][j]).sum::<i64>().rem_euclid(q)).collect()
}

fn dotq(u: &[i64], v: &[i64], q: i64) -> i64 {
    u.iter().zip(v).map(|(x, y)| x * y).sum::<i64>().rem_euclid(q)
}

#[derive(Clone, Debug, Serialize)]
pub struct CompletionCheck {
    pub q: i64,
    pub l: Vec<i64>,
    /// The congruence holds for every k tested.
    pub identity_holds: bool,
    /// |𝒮(q, n0) - closed form through the Salié or Kloosterman sum|.
    pub closed_form_residual: f64,
}

/// l = 2*(b + a* m) A* satisfies a kAkᵀ + k(ab+m)ᵀ ≡ a (k+l)A(k+l)ᵀ - a lAlᵀ (mod q).
pub fn completing_square_check(form: &IntegralQuadraticForm, a: i64, b: &[i64], m: &[i64], n0: i64, q: i64) -> Result<CompletionCheck> {
    if !is_prime(q as u64) || q == 2 {
        return Err(Error::Domain(format!("q = {q} must be an odd prime")));
    }
    let r = form.rank();
    let ai = mod_inverse(a, q).ok_or_else(|| Error::Domain("a is not invertible mod q".into()))?;
    let astar = mat_inverse_mod(&form.a, q).ok_or_else(|| Error::Domain("A is singular mod q".into()))?;
    let two = mod_inverse(2, q).unwrap();
    let four = mod_inverse(4, q).unwrap();
    let v: Vec<i64> = b.iter().zip(m).map(|(x, y)| (x + ai * y) * two).collect();
    let l = vec_mat(&v, &astar, q);
    let mut ok = true;
    // Both sides are quadratic in k; checking 0, unit vectors and pairs covers every coefficient.
    let mut tests: Vec<Vec<i64>> = vec![vec![0; r]];
    for i in 0..r {
        for j in i..r {
            let mut k = vec![0; r];
            k[i] += 1;
            k[j] += 1;
            tests.push(k.clone());
            k[i] = 1;
            k[j] = if i == j { 1 } else { 0 };
            tests.push(k);
        }
    }
    for k in &tests {
        let lhs = (a * form.eval(k) + k.iter().zip(b).zip(m).map(|((x, bb), mm)| x * (a * bb + mm)).sum::<i64>()).rem_euclid(q);
        let kl: Vec<i64> = k.iter().zip(&l).map(|(x, y)| x + y).collect();
        let rhs = (a * form.eval(&kl) - a * form.eval(&l)).rem_euclid(q);
        ok &= lhs == rhs;
    }
    // 𝒮 = e(2* m A* bᵀ/q) S(1,0;q) Σ_a (a|q)^r e(a(4* bA*bᵀ + n0)/q + a*(4* mA*mᵀ)/q).
    let direct = script_s(form, b, m, n0, q)?;
    let s10 = gauss_sum(form, 1, &vec![0; r], q)?;
    let n1 = (four * dotq(&vec_mat(b, &astar, q), b, q) + n0).rem_euclid(q);
    let n2 = (four * dotq(&vec_mat(m, &astar, q), m, q)).rem_euclid(q);
    let sum = if r % 2 == 1 { salie(n1, n2, q) } else { kloosterman(n1, n2, q) };
    let pt = PhaseTable::new(q);
    let closed = pt.e(two * dotq(&vec_mat(m, &astar, q), b, q)) * s10 * sum;
    Ok(CompletionCheck { q, l, identity_holds: ok, closed_form_residual: (direct - closed).norm() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_gauss_sum() {
        let f = IntegralQuadraticForm::new(vec![vec![1]]).unwrap();
        let s = gauss_sum(&f, 1, &[0], 3).unwrap();
        assert!((s - C::new(0.0, -1.0 / 3f64.sqrt())).norm() < 1e-15);
        assert!(gauss_sum(&f, 3, &[0], 3).is_err());
    }

    #[test]
    fn legendre_identity() {
        let f = IntegralQuadraticForm::new(vec![vec![2, 1], vec![1, 2]]).unwrap();
        // q = 3 divides det A, where the form degenerates.
        for q in [5i64, 7, 11, 13] {
            let s1 = gauss_sum(&f, 1, &[0, 0], q).unwrap();
            for a in 1..q {
                let sa = gauss_sum(&f, a, &[0, 0], q).unwrap();
                assert!((sa - s1 * (jacobi(a, q) as f64).powi(2)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn kloosterman_examples() {
        let k = kloosterman(1, 1, 5);
        assert!((k.re - (2.0 + 2.0 * (4.0 * PI / 5.0).cos())).abs() < 1e-12);
        assert!((kloosterman(0, 0, 7).re - 6.0).abs() < 1e-12);
        let w = weil_bound_check(31);
        assert_eq!(w.violations, 0);
    }

    #[test]
    fn multiplicativity_and_completion() {
        let f = IntegralQuadraticForm::new(vec![vec![2, 1], vec![1, 2]]).unwrap();
        let c = check_multiplicativity(&f, &[1, 2], &[3, 1], 5, 4, 9).unwrap();
        assert!(c.twisted_residual < 1e-10, "{c:?}");
        let c0 = check_multiplicativity(&f, &[1, 2], &[0, 0], 5, 4, 9).unwrap();
        assert!(c0.plain_residual < 1e-10);
        let g = IntegralQuadraticForm::new(vec![vec![3]]).unwrap();
        for (form, b, m) in [(&f, vec![1, 2], vec![3, 1]), (&g, vec![2], vec![5])] {
            let cc = completing_square_check(form, 3, &b, &m, 4, 11).unwrap();
            assert!(cc.identity_holds && cc.closed_form_residual < 1e-10, "{cc:?}");
        }
    }
}
