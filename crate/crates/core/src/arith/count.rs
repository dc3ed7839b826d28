//! Factorization, divisor counts and lattice-point counts for quadratic forms.

use num_integer::Integer;
use serde::Serialize;

use super::expsum::IntegralQuadraticForm;

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorization as (prime, exponent) pairs, sorted.
pub fn factorize(n: u64) -> Vec<(u64, u32)> {
    let mut primes = Vec::new();
    let mut n = n;
    for p in 2u64..1000 {
        if p * p > n {
            break;
        }
        while n % p == 0 {
            primes.push(p);
            n /= p;
        }
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            primes.push(m);
            continue;
        }
        let d = pollard_rho(m);
        stack.push(d);
        stack.push(m / d);
    }
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

pub fn divisor_count(n: u64) -> u64 {
    assert!(n >= 1, "divisor_count needs n ≥ 1");
    factorize(n).iter().map(|(_, e)| *e as u64 + 1).product()
}

/// max_{n ≤ limit} d(n)/n^eps, with d computed by a sieve.
pub fn divisor_sweep(limit: usize, eps: f64) -> (f64, usize) {
    let mut d = vec![0u32; limit + 1];
    for i in 1..=limit {
        let mut j = i;
        while j <= limit {
            d[j] += 1;
            j += i;
        }
    }
    let mut best = (0.0, 1);
    for (n, &dn) in d.iter().enumerate().skip(1) {
        let v = dn as f64 / (n as f64).powf(eps);
        if v > best.0 {
            best = (v, n);
        }
    }
    best
}

/// #{k ∈ Z^r : |k_i| ≤ bound, k A kᵀ = m}.
pub fn count_representations(form: &IntegralQuadraticForm, m: i64, bound: i64) -> u64 {
    let r = form.rank();
    let mut k = vec![-bound; r];
    let mut count = 0;
    loop {
        if form.eval(&k) == m {
            count += 1;
        }
        let mut i = 0;
        while i < r {
            k[i] += 1;
            if k[i] <= bound {
                break;
            }
            k[i] = -bound;
            i += 1;
        }
        if i == r {
            return count;
        }
    }
}

/// r(m) for every m ≤ max_m, by enumerating the ellipsoid k A kᵀ ≤ max_m (rank 2).
pub fn representation_histogram(form: &IntegralQuadraticForm, max_m: i64) -> Vec<u64> {
    assert_eq!(form.rank(), 2, "histogram enumeration is implemented for binary forms");
    let a = &form.a;
    let mut h = vec![0u64; max_m as usize + 1];
    // k A kᵀ ≥ λ_min |k|², and λ_min ≥ det/trace.
    let det = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) as f64;
    let lmin = det / (a[0][0] + a[1][1]) as f64;
    let b = (max_m as f64 / lmin).sqrt().ceil() as i64 + 1;
    for x in -b..=b {
        for y in -b..=b {
            let v = form.eval(&[x, y]);
            if v <= max_m {
                h[v as usize] += 1;
            }
        }
    }
    h
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthFit {
    /// Slope of log max_{m ≤ M} r(m) against log M at dyadic M.
    pub envelope_slope: f64,
    /// OLS slope of log r(m) against log m over represented m.
    pub ols_slope: f64,
    /// Slope of log of dyadic-block means of r(m) over represented m.
    pub block_mean_slope: f64,
    /// Constant C with max r(m) ≤ C m^{0.25} over the range.
    pub constant_quarter: f64,
}

pub fn growth_fit(h: &[u64]) -> GrowthFit {
    let max_m = h.len() - 1;
    let mut env = Vec::new();
    let mut running = 0u64;
    let mut next = 2usize;
    for (m, &c) in h.iter().enumerate().skip(1) {
        running = running.max(c);
        if m == next {
            env.push(((m as f64).ln(), (running as f64).ln()));
            next *= 2;
        }
    }
    let pts: Vec<(f64, f64)> = h.iter().enumerate().skip(1).filter(|(_, &c)| c > 0).map(|(m, &c)| ((m as f64).ln(), (c as f64).ln())).collect();
    let mut blocks = Vec::new();
    let mut lo = 1usize;
    while lo <= max_m {
        let hi = (2 * lo).min(max_m + 1);
        let rep: Vec<u64> = h[lo..hi].iter().copied().filter(|&c| c > 0).collect();
        if !rep.is_empty() {
            let mean = rep.iter().sum::<u64>() as f64 / rep.len() as f64;
            blocks.push((((lo + hi - 1) as f64 / 2.0).ln(), mean.ln()));
        }
        lo = hi;
    }
    let constant_quarter = h.iter().enumerate().skip(1).map(|(m, &c)| c as f64 / (m as f64).powf(0.25)).fold(0.0, f64::max);
    GrowthFit {
        envelope_slope: ols(&env),
        ols_slope: ols(&pts),
        block_mean_slope: ols(&blocks),
        constant_quarter,
    }
}

fn ols(p: &[(f64, f64)]) -> f64 {
    let n = p.len() as f64;
    let mx = p.iter().map(|x| x.0).sum::<f64>() / n;
    let my = p.iter().map(|x| x.1).sum::<f64>() / n;
    let sxy: f64 = p.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = p.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divisors() {
        assert_eq!(divisor_count(12), 6);
        assert_eq!(divisor_count(1_000_000_007), 2);
        assert_eq!(divisor_count(600851475143), 16);
        assert_eq!(factorize(999_999_000_001 * 3), vec![(3, 1), (999_999_000_001, 1)]);
    }

    #[test]
    fn sums_of_two_squares() {
        let f = IntegralQuadraticForm::new(vec![vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(count_representations(&f, 25, 10), 12);
        assert_eq!(count_representations(&f, 3, 10), 0);
        let h = representation_histogram(&f, 100);
        assert_eq!((h[25], h[3], h[0]), (12, 0, 1));
    }
}

#[cfg(test)]
mod growth {
    use super::*;

    #[test]
    fn a2_form_growth_numbers() {
        let f = IntegralQuadraticForm::new(vec![vec![2, 1], vec![1, 2]]).unwrap();
        let g = growth_fit(&representation_histogram(&f, 10_000));
        eprintln!("{g:?}");
        assert!(g.ols_slope < 0.15);
    }
}
