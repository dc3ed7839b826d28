//! Farey dissection of the circle and its dyadic sub-arcs.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::rational::{q, qf, to_f64, Q};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FareyArc {
    pub a: i64,
    pub q: i64,
    #[serde(serialize_with = "ser_q")]
    pub left: Q,
    #[serde(serialize_with = "ser_q")]
    pub right: Q,
}

fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

impl FareyArc {
    pub fn center(&self) -> Q {
        qf(self.a, self.q)
    }

    pub fn length(&self) -> Q {
        self.right - self.left
    }
}

/// Reduced fractions a/q in [0, 1) with q ≤ n, in increasing order.
pub fn farey_fractions(n: i64) -> Vec<(i64, i64)> {
    // Next-term recurrence for the Farey sequence.
    let mut out = vec![(0, 1)];
    let (mut a, mut b, mut c, mut d) = (0i64, 1i64, 1i64, n);
    while c < d {
        out.push((c, d));
        let k = (n + b) / d;
        let (e, f) = (k * c - a, k * d - b);
        a = c;
        b = d;
        c = e;
        d = f;
    }
    out
}

/// Arcs around each a/q bounded by mediants with the circular neighbours.
pub fn farey_dissection(n: i64) -> Vec<FareyArc> {
    let f = farey_fractions(n.max(1));
    let k = f.len();
    (0..k)
        .map(|i| {
            let (a, qq) = f[i];
            let (la, lq) = if i == 0 { (f[k - 1].0 - f[k - 1].1, f[k - 1].1) } else { f[i - 1] };
            let (ra, rq) = if i + 1 == k { (1, 1) } else { f[i + 1] };
            FareyArc { a, q: qq, left: qf(la + a, lq + qq), right: qf(a + ra, qq + rq) }
        })
        .collect()
}

fn big(x: &Q) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

/// Exact sum of interval lengths.
pub fn total_length<'a>(pieces: impl IntoIterator<Item = (&'a Q, &'a Q)>) -> BigRational {
    pieces.into_iter().fold(BigRational::zero(), |acc, (lo, hi)| acc + big(&(hi - lo)))
}

/// The arcs tile a circle of length one with no overlaps or gaps.
pub fn check_partition(arcs: &[FareyArc]) -> bool {
    let total = total_length(arcs.iter().map(|a| (&a.left, &a.right)));
    let mut ok = total == big(&q(1));
    for w in arcs.windows(2) {
        ok &= w[0].right == w[1].left;
    }
    if let (Some(first), Some(last)) = (arcs.first(), arcs.last()) {
        ok &= last.right - first.left == q(1);
    }
    ok && arcs.iter().all(|a| a.a.gcd(&a.q) == 1 && a.left < a.center() && a.center() < a.right)
}

/// Half-arc lengths lie in [1/(2qn), 1/(qn)].
pub fn check_half_lengths(arcs: &[FareyArc], n: i64) -> bool {
    arcs.iter().all(|a| {
        let lo = qf(1, 2 * a.q * n);
        let hi = qf(1, a.q * n);
        let l = a.center() - a.left;
        let r = a.right - a.center();
        lo <= l && l <= hi && lo <= r && r <= hi
    })
}

/// A piece of M_{a,q} at distance ≍ 1/(NM) from a/q.
#[derive(Clone, Debug, Serialize)]
pub struct SubArc {
    pub a: i64,
    pub q: i64,
    pub m: i64,
    #[serde(serialize_with = "ser_q")]
    pub lo: Q,
    #[serde(serialize_with = "ser_q")]
    pub hi: Q,
}

fn overlap(a0: Q, a1: Q, b0: Q, b1: Q) -> Option<(Q, Q)> {
    let lo = if a0 > b0 { a0 } else { b0 };
    let hi = if a1 < b1 { a1 } else { b1 };
    (hi > lo).then_some((lo, hi))
}

/// Pieces of M_{a,q}, Q ≤ q < 2Q, with 1/(2NM) < |t - a/q| ≤ 1/(NM); for M = N the whole core |t - a/q| ≤ 1/N².
pub fn farey_subarcs(n: i64, qd: i64, m: i64) -> Vec<SubArc> {
    let mut out = Vec::new();
    for arc in farey_dissection(n) {
        if arc.q < qd || arc.q >= 2 * qd {
            continue;
        }
        let c = arc.center();
        let outer = qf(1, n * m);
        let inner = if m >= n { Q::zero() } else { qf(1, 2 * n * m) };
        let mut pieces = Vec::new();
        if inner.is_zero() {
            pieces.push((c - outer, c + outer));
        } else {
            pieces.push((c - outer, c - inner));
            pieces.push((c + inner, c + outer));
        }
        for (lo, hi) in pieces {
            if let Some((lo, hi)) = overlap(lo, hi, arc.left, arc.right) {
                out.push(SubArc { a: arc.a, q: arc.q, m, lo, hi });
            }
        }
    }
    out
}

pub fn dyadics_up_to(n: i64) -> Vec<i64> {
    let mut v = Vec::new();
    let mut x = 1;
    while x <= n {
        v.push(x);
        x *= 2;
    }
    v
}

#[derive(Clone, Debug, Serialize)]
pub struct IndicatorBound {
    pub n: i64,
    pub q: i64,
    pub m: i64,
    pub length: String,
    pub length_f64: f64,
    /// length / (Q²/(NM)).
    pub ratio: f64,
    /// max_{1≤k≤K} |1̂(k)|, never above 1̂(0) = length.
    pub max_nonzero_coefficient: f64,
}

pub fn indicator_fourier_bound_check(n: i64, qd: i64, m: i64) -> IndicatorBound {
    let arcs = farey_subarcs(n, qd, m);
    let len = total_length(arcs.iter().map(|s| (&s.lo, &s.hi)));
    let scale = (qd * qd) as f64 / (n * m) as f64;
    let mut maxc = 0.0f64;
    for k in 1..=64i64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for s in &arcs {
            // ∫_lo^hi e(-kt) dt, with phases reduced exactly mod 1.
            let f = |x: Q| {
                let y = (x * k).fract();
                let th = -2.0 * std::f64::consts::PI * to_f64(&y);
                (th.sin(), -th.cos())
            };
            let (s1, c1) = f(s.hi);
            let (s0, c0) = f(s.lo);
            let w = 2.0 * std::f64::consts::PI * k as f64;
            re += (s0 - s1) / w;
            im += (c0 - c1) / w;
        }
        maxc = maxc.max((re * re + im * im).sqrt());
    }
    let lf = big_to_f64(&len);
    IndicatorBound {
        n,
        q: qd,
        m,
        length: len.to_string(),
        length_f64: lf,
        ratio: lf / scale,
        max_nonzero_coefficient: maxc,
    }
}

fn big_to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

/// All M_{Q,M} together: exact total length and whether the pieces tile without overlap.
pub fn subarc_tiling(n: i64) -> (BigRational, bool) {
    let mut all: Vec<SubArc> = Vec::new();
    for &qd in &dyadics_up_to(n) {
        for &m in dyadics_up_to(n).iter().filter(|&&m| m >= qd) {
            all.extend(farey_subarcs(n, qd, m));
        }
    }
    all.sort_by(|a, b| a.lo.cmp(&b.lo));
    let total = total_length(all.iter().map(|s| (&s.lo, &s.hi)));
    let adjacent = all.windows(2).all(|w| w[0].hi == w[1].lo);
    (total, adjacent)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_three() {
        assert_eq!(farey_fractions(3), vec![(0, 1), (1, 3), (1, 2), (2, 3)]);
        let arcs = farey_dissection(3);
        assert_eq!((arcs[2].left, arcs[2].right), (qf(2, 5), qf(3, 5)));
        assert!(check_partition(&arcs) && check_half_lengths(&arcs, 3));
    }

    #[test]
    fn subarcs_tile_the_circle() {
        for n in [16, 64, 256] {
            let (total, adjacent) = subarc_tiling(n);
            assert!(adjacent);
            assert_eq!(total, big(&q(1)));
        }
        let b = indicator_fourier_bound_check(256, 4, 16);
        assert!(b.ratio <= 4.0 && b.max_nonzero_coefficient <= b.length_f64 + 1e-15);
    }
}
