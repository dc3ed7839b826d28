//! Alcove coordinates and the barycentric-semiclassical subdivision.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::to_f64;
use crate::rng;
use crate::rootsys::RootSystem;

pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// A point of the closed alcove in coordinates t_0..t_r.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlcovePoint {
    pub t: Vec<f64>,
}

impl AlcovePoint {
    /// From θ_j = α_j(H)/2πi, j = 1..r.
    pub fn from_theta(rs: &RootSystem, theta: &[f64]) -> Self {
        let mut t = Vec::with_capacity(theta.len() + 1);
        let s: f64 = theta.iter().zip(&rs.marks).map(|(x, &m)| x * m as f64).sum();
        t.push(1.0 - s);
        t.extend_from_slice(theta);
        Self { t }
    }

    /// From t_0..t_r; the affine relation t_0 + Σ m_j t_j = 1 is checked.
    pub fn from_t(rs: &RootSystem, t: &[f64]) -> Result<Self> {
        if t.len() != rs.rank + 1 {
            return Err(Error::Domain(format!("expected {} coordinates, got {}", rs.rank + 1, t.len())));
        }
        let s: f64 = t.iter().enumerate().map(|(j, x)| x * rs.mark(j) as f64).sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("t_0 + Σ m_j t_j = {s}, expected 1")));
        }
        Ok(Self { t: t.to_vec() })
    }

    pub fn theta(&self) -> &[f64] {
        &self.t[1..]
    }

    pub fn in_closed_alcove(&self) -> bool {
        self.t.iter().all(|&x| x >= -MEMBERSHIP_TOL)
    }
}

/// A barycentric-semiclassical cell P_{I,J} at scale N.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Cell {
    pub i: Vec<usize>,
    pub j: Vec<usize>,
    pub n: u32,
}

impl Cell {
    pub fn new(rs: &RootSystem, i: &[usize], j: &[usize], n: u32) -> Result<Self> {
        let mut i = i.to_vec();
        let mut j = j.to_vec();
        i.sort_unstable();
        i.dedup();
        j.sort_unstable();
        j.dedup();
        if i.len() != rs.rank || i.iter().any(|&x| x > rs.rank) {
            return Err(Error::Config(format!("I must be an r-subset of 0..={}, got {i:?}", rs.rank)));
        }
        if !j.iter().all(|x| i.contains(x)) {
            return Err(Error::Config(format!("J = {j:?} is not contained in I = {i:?}")));
        }
        Ok(Self { i, j, n })
    }

    /// The node not in I; the cell sits at the vertex where all t_j, j ∈ I, vanish.
    pub fn omitted(&self) -> usize {
        (0..=self.i.len()).find(|k| !self.i.contains(k)).expect("I is an r-subset")
    }

    pub fn id(&self) -> u64 {
        let mi: u64 = self.i.iter().map(|&x| 1u64 << x).sum();
        let mj: u64 = self.j.iter().map(|&x| 1u64 << x).sum();
        (mi << 16) | mj
    }

    pub fn label_i(&self) -> String {
        join(&self.i)
    }

    pub fn label_j(&self) -> String {
        join(&self.j)
    }
}

pub fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Smallest dyadic N ≥ 16 with N > (r+1)·max m_j, which forces J ⊆ I.
pub fn n_threshold(rs: &RootSystem) -> u32 {
    let m = rs.marks.iter().copied().max().unwrap_or(1) as u32;
    let need = (rs.rank as u32 + 1) * m;
    let mut n = 16;
    while n <= need {
        n *= 2;
    }
    n
}

/// θ-volume of the alcove, 1/(r! Π m_j).
pub fn alcove_volume(rs: &RootSystem) -> f64 {
    let fact: f64 = (1..=rs.rank).map(|x| x as f64).product();
    let pm: f64 = rs.marks.iter().map(|&m| m as f64).product();
    1.0 / (fact * pm)
}

/// Normalization of dH relative to dθ, so that ∫_A |δ|² dH = 1.
pub fn haar_factor(rs: &RootSystem) -> f64 {
    1.0 / crate::lattice::lattice_index(rs) as f64
}

pub fn barycentric(rs: &RootSystem, t: &[f64]) -> Vec<f64> {
    t.iter().enumerate().map(|(k, x)| x * rs.mark(k) as f64).collect()
}

/// Node k whose barycentric coordinate is maximal (ties to the smallest index).
pub fn dominant_node(marks0: &[f64], t: &[f64]) -> usize {
    let mut best = 0;
    let mut bv = t[0] * marks0[0];
    for k in 1..t.len() {
        let b = t[k] * marks0[k];
        if b > bv {
            bv = b;
            best = k;
        }
    }
    best
}

pub fn barycentric_cell_membership(rs: &RootSystem, p: &AlcovePoint, i: &[usize]) -> bool {
    let b = barycentric(rs, &p.t);
    let Some(k) = (0..=rs.rank).find(|k| !i.contains(k)) else { return false };
    b.iter().all(|&x| x <= b[k] + MEMBERSHIP_TOL)
}

/// Fast classification context.
#[derive(Clone, Debug)]
pub struct Classifier {
    pub rank: usize,
    pub marks0: Vec<f64>,
    pub n: u32,
    pub inv_n: f64,
}

impl Classifier {
    pub fn new(rs: &RootSystem, n: u32) -> Result<Self> {
        rs.require_irreducible("alcove subdivision")?;
        let th = n_threshold(rs);
        if n < th {
            return Err(Error::Scale(format!("N = {n} is below the threshold {th} for {}", rs.label)));
        }
        Ok(Self { rank: rs.rank, marks0: (0..=rs.rank).map(|k| rs.mark(k) as f64).collect(), n, inv_n: 1.0 / n as f64 })
    }

    /// (omitted node k, J bitmask).
    pub fn classify_raw(&self, t: &[f64]) -> (usize, u64) {
        let k = dominant_node(&self.marks0, t);
        let mut jm = 0u64;
        for (j, &x) in t.iter().enumerate() {
            if x <= self.inv_n {
                jm |= 1 << j;
            }
        }
        (k, jm)
    }
}

pub fn classify(rs: &RootSystem, p: &AlcovePoint, n: u32) -> Result<Cell> {
    if !p.in_closed_alcove() {
        return Err(Error::Domain(format!("point {:?} is outside the alcove", p.t)));
    }
    let c = Classifier::new(rs, n)?;
    let (k, jm) = c.classify_raw(&p.t);
    let i: Vec<usize> = (0..=rs.rank).filter(|&x| x != k).collect();
    let j: Vec<usize> = (0..=rs.rank).filter(|&x| jm & (1 << x) != 0).collect();
    if jm & (1 << k) != 0 {
        return Err(Error::Scale(format!("J ⊄ I at N = {n}")));
    }
    Ok(Cell { i, j, n })
}

/// All cells (I, J ⊆ I) at scale N.
pub fn all_cells(rs: &RootSystem, n: u32) -> Vec<Cell> {
    let mut out = Vec::new();
    for k in 0..=rs.rank {
        let i: Vec<usize> = (0..=rs.rank).filter(|&x| x != k).collect();
        for m in 0u32..(1 << rs.rank) {
            let j: Vec<usize> = (0..rs.rank).filter(|b| m & (1 << b) != 0).map(|b| i[b]).collect();
            out.push(Cell { i: i.clone(), j, n });
        }
    }
    out
}

/// Uniform point of the alcove (θ-Lebesgue measure).
pub fn uniform_point<R: Rng>(rs: &RootSystem, rng: &mut R) -> AlcovePoint {
    let e: Vec<f64> = (0..=rs.rank).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    AlcovePoint { t: e.iter().enumerate().map(|(k, x)| x / s / rs.mark(k) as f64).collect() }
}

/// One box of a cell: ranges for the free coordinates t_i, i ∈ I.
#[derive(Clone, Debug)]
pub struct Stratum {
    pub cell: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// θ-volume of the box (t-box volume / m_k).
    pub volume: f64,
}

pub fn cell_strata(rs: &RootSystem, cell: &Cell, cell_index: usize) -> Vec<Stratum> {
    let inv_n = 1.0 / cell.n as f64;
    let k = cell.omitted();
    let per: Vec<Vec<(f64, f64)>> = cell
        .i
        .iter()
        .map(|&j| {
            if cell.j.contains(&j) {
                vec![(0.0, inv_n)]
            } else {
                let cap = 0.5 / rs.mark(j) as f64;
                let mut v = Vec::new();
                let mut lo = inv_n;
                while lo < cap {
                    let hi = (2.0 * lo).min(cap);
                    v.push((lo, hi));
                    lo = hi;
                }
                v
            }
        })
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; per.len()];
    if per.iter().any(|v| v.is_empty()) {
        return out;
    }
    loop {
        let lo: Vec<f64> = idx.iter().enumerate().map(|(a, &b)| per[a][b].0).collect();
        let hi: Vec<f64> = idx.iter().enumerate().map(|(a, &b)| per[a][b].1).collect();
        let vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product::<f64>() / rs.mark(k) as f64;
        out.push(Stratum { cell: cell_index, lo, hi, volume: vol });
        let mut pos = 0;
        while pos < per.len() {
            idx[pos] += 1;
            if idx[pos] < per[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == per.len() {
            break;
        }
    }
    out
}

/// Sampler state for one cell.
#[derive(Clone, Debug)]
pub struct CellGeometry {
    pub cell: Cell,
    pub k: usize,
    pub mk: f64,
    pub marks0: Vec<f64>,
    pub jmask: u64,
}

impl CellGeometry {
    pub fn new(rs: &RootSystem, cell: &Cell) -> Self {
        let k = cell.omitted();
        Self {
            cell: cell.clone(),
            k,
            mk: rs.mark(k) as f64,
            marks0: (0..=rs.rank).map(|x| rs.mark(x) as f64).collect(),
            jmask: cell.j.iter().map(|&x| 1u64 << x).sum(),
        }
    }

    /// Fill t from the free coordinates; false when the point is outside P_{I,J}.
    pub fn complete(&self, free: &[f64], t: &mut [f64], inv_n: f64) -> bool {
        let mut s = 0.0;
        for (a, &i) in self.cell.i.iter().enumerate() {
            t[i] = free[a];
            s += self.marks0[i] * free[a];
        }
        let tk = (1.0 - s) / self.mk;
        if tk < 0.0 {
            return false;
        }
        t[self.k] = tk;
        if tk <= inv_n {
            return false;
        }
        if dominant_node(&self.marks0, t) != self.k {
            return false;
        }
        let mut jm = 0u64;
        for (j, &x) in t.iter().enumerate() {
            if x <= inv_n {
                jm |= 1 << j;
            }
        }
        jm == self.jmask
    }
}

/// Result of integrating over a family of strata.
#[derive(Clone, Debug, Serialize)]
pub struct Integral {
    pub value: f64,
    pub se: f64,
    pub accepted: u64,
    pub total: u64,
}

impl Integral {
    pub fn acceptance_rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.accepted as f64 / self.total as f64
        }
    }
}

#[derive(Clone, Copy, Default)]
struct Moments {
    n: u64,
    acc: u64,
    sum: f64,
    sum2: f64,
}

impl Moments {
    fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        self.acc += o.acc;
        self.sum += o.sum;
        self.sum2 += o.sum2;
    }
    fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }
    fn var(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let m = self.mean();
        ((self.sum2 / self.n as f64 - m * m) * self.n as f64 / (self.n - 1) as f64).max(0.0)
    }
}

/// Stratified Monte Carlo over the given cells with Neyman allocation.
///
/// `f` receives t_0..t_r and returns the integrand; the measure is θ-Lebesgue.
/// Returns one integral per cell.
pub fn integrate_cells<F>(rs: &RootSystem, cells: &[Cell], budget: u64, keys: &[u64], f: &F) -> Vec<Integral>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let geoms: Vec<CellGeometry> = cells.iter().map(|c| CellGeometry::new(rs, c)).collect();
    let strata: Vec<Stratum> =
        cells.iter().enumerate().flat_map(|(ci, c)| cell_strata(rs, c, ci)).collect();
    let ns = strata.len().max(1) as u64;
    let pilot = (budget / (4 * ns)).clamp(8, 256);
    let run = |si: usize, count: u64, phase: u64| -> Moments {
        let st = &strata[si];
        let g = &geoms[st.cell];
        let inv_n = 1.0 / g.cell.n as f64;
        let mut keyv = keys.to_vec();
        keyv.extend_from_slice(&[g.cell.n as u64, g.cell.id(), si as u64, phase]);
        let mut r = rng::stream(&keyv);
        let mut free = vec![0.0; st.lo.len()];
        let mut t = vec![0.0; rs.rank + 1];
        let mut m = Moments::default();
        for _ in 0..count {
            for (a, x) in free.iter_mut().enumerate() {
                *x = st.lo[a] + (st.hi[a] - st.lo[a]) * r.gen::<f64>();
            }
            m.n += 1;
            if g.complete(&free, &mut t, inv_n) {
                let y = f(&t);
                m.acc += 1;
                m.sum += y;
                m.sum2 += y * y;
            }
        }
        m
    };
    let pilots: Vec<Moments> = (0..strata.len()).into_par_iter().map(|s| run(s, pilot, 0)).collect();
    let spent = pilot * strata.len() as u64;
    let remaining = budget.saturating_sub(spent);
    let weights: Vec<f64> = pilots
        .iter()
        .zip(&strata)
        .map(|(m, s)| {
            if m.acc == 0 {
                0.0
            } else {
                s.volume * (m.var().sqrt() + 0.05 * m.mean().abs())
            }
        })
        .collect();
    let wsum: f64 = weights.iter().sum();
    let alloc: Vec<u64> = weights
        .iter()
        .zip(&pilots)
        .map(|(w, m)| {
            let share = if wsum > 0.0 { (remaining as f64 * 0.9 * w / wsum) as u64 } else { 0 };
            let floor = if m.acc == 0 { pilot / 2 } else { pilot };
            share + floor.min(remaining / ns)
        })
        .collect();
    let mains: Vec<Moments> = (0..strata.len()).into_par_iter().map(|s| run(s, alloc[s], 1)).collect();
    let mut out = vec![Integral { value: 0.0, se: 0.0, accepted: 0, total: 0 }; cells.len()];
    let mut var = vec![0.0; cells.len()];
    for s in 0..strata.len() {
        let mut m = pilots[s];
        m.merge(&mains[s]);
        let c = strata[s].cell;
        let v = strata[s].volume;
        out[c].value += v * m.mean();
        if m.n > 0 {
            var[c] += v * v * m.var() / m.n as f64;
        }
        out[c].accepted += m.acc;
        out[c].total += m.n;
    }
    for (o, v) in out.iter_mut().zip(var) {
        o.se = v.sqrt();
    }
    out
}

/// θ-volume estimate of P_{I,J}.
pub fn cell_volume(rs: &RootSystem, cell: &Cell, budget: u64, seed: u64) -> Integral {
    integrate_cells(rs, std::slice::from_ref(cell), budget, &[seed, rng::str_key("volume")], &|_t| 1.0)[0].clone()
}

/// Points of P_{I,J}, uniform in θ-measure, by rejection from the cell's t-box.
pub fn sample_cell(rs: &RootSystem, cell: &Cell, count: usize, seed: u64) -> Result<(Vec<AlcovePoint>, f64)> {
    Classifier::new(rs, cell.n)?;
    let g = CellGeometry::new(rs, cell);
    let inv_n = 1.0 / cell.n as f64;
    let lo: Vec<f64> = cell.i.iter().map(|j| if cell.j.contains(j) { 0.0 } else { inv_n }).collect();
    let hi: Vec<f64> = cell.i.iter().map(|&j| if cell.j.contains(&j) { inv_n } else { 0.5 / rs.mark(j) as f64 }).collect();
    let mut r = rng::stream(&[seed, cell.n as u64, cell.id(), rng::str_key("sample")]);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0u64;
    let budget = 1000 * count as u64 + 100_000;
    let mut free = vec![0.0; lo.len()];
    let mut t = vec![0.0; rs.rank + 1];
    while out.len() < count {
        if tries >= budget {
            if out.is_empty() {
                return Err(Error::EmptyCell(format!("no point of P_{{{:?},{:?}}} found at N = {}", cell.i, cell.j, cell.n)));
            }
            break;
        }
        tries += 1;
        for (a, x) in free.iter_mut().enumerate() {
            *x = lo[a] + (hi[a] - lo[a]) * r.gen::<f64>();
        }
        if g.complete(&free, &mut t, inv_n) {
            out.push(AlcovePoint { t: t.clone() });
        }
    }
    let rate = out.len() as f64 / tries as f64;
    Ok((out, rate))
}

/// Decomposition of H relative to t_J, as pairings with α_1..α_r.
#[derive(Clone, Debug, Serialize)]
pub struct SplitH {
    pub h_j: Vec<f64>,
    pub h_perp: Vec<f64>,
    pub h0: Vec<f64>,
    pub h1: Vec<f64>,
}

/// Squared norm of H given by θ-pairings, via the Gram matrix of fundamental coweights.
pub fn h_norm2(rs: &RootSystem, theta: &[f64]) -> f64 {
    let inv = crate::rational::qmat_inverse(&rs.datum.gram).expect("Gram invertible");
    let inv: Vec<Vec<f64>> = inv.iter().map(|r| r.iter().map(to_f64).collect()).collect();
    let r = theta.len();
    (0..r).map(|i| (0..r).map(|j| theta[i] * inv[i][j] * theta[j]).sum::<f64>()).sum()
}

pub fn split_h(rs: &RootSystem, j: &[usize], p: &AlcovePoint) -> Result<SplitH> {
    let par = rs.parabolic_subsystem(j)?;
    let r = rs.rank;
    let k = par.base.len();
    let theta = p.theta();
    if k == 0 {
        return Ok(SplitH { h_j: vec![0.0; r], h_perp: theta.to_vec(), h0: vec![0.0; r], h1: vec![0.0; r] });
    }
    let gram: Vec<Vec<f64>> =
        par.base.iter().map(|a| par.base.iter().map(|b| to_f64(&rs.datum.inner(a, b))).collect()).collect();
    let pair = |c: &[i64], th: &[f64]| -> f64 { c.iter().zip(th).map(|(a, b)| *a as f64 * b).sum() };
    let solve = |rhs: &[f64]| -> Vec<f64> { crate::numeric::solve(&gram, rhs) };
    let u: Vec<f64> = par.base.iter().map(|c| pair(c, theta)).collect();
    let u0: Vec<f64> = par.nodes.iter().map(|&n| if n == 0 { -1.0 } else { 0.0 }).collect();
    let to_theta = |y: &[f64]| -> Vec<f64> {
        (0..r)
            .map(|i| {
                let mut e = vec![0i64; r];
                e[i] = 1;
                y.iter().zip(&par.base).map(|(yy, b)| yy * to_f64(&rs.datum.inner(&e, b))).sum()
            })
            .collect()
    };
    let h_j = to_theta(&solve(&u));
    let h0 = to_theta(&solve(&u0));
    let h1: Vec<f64> = h_j.iter().zip(&h0).map(|(a, b)| a - b).collect();
    let h_perp: Vec<f64> = theta.iter().zip(&h_j).map(|(a, b)| a - b).collect();
    Ok(SplitH { h_j, h_perp, h0, h1 })
}

/// Partition check: fraction of uniform samples claimed by exactly one cell.
pub fn partition_check(rs: &RootSystem, n: u32, samples: usize, seed: u64) -> Result<usize> {
    let cls = Classifier::new(rs, n)?;
    let cells = all_cells(rs, n);
    let geoms: Vec<CellGeometry> = cells.iter().map(|c| CellGeometry::new(rs, c)).collect();
    let mut r = rng::stream(&[seed, n as u64, rng::str_key("partition")]);
    let mut bad = 0;
    for _ in 0..samples {
        let p = uniform_point(rs, &mut r);
        let (k, _) = cls.classify_raw(&p.t);
        let mut claims = 0;
        let mut t = vec![0.0; rs.rank + 1];
        for g in &geoms {
            if g.k != k {
                continue;
            }
            let free: Vec<f64> = g.cell.i.iter().map(|&i| p.t[i]).collect();
            if g.complete(&free, &mut t, cls.inv_n) {
                claims += 1;
            }
        }
        if claims != 1 {
            bad += 1;
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds() {
        assert_eq!(n_threshold(&RootSystem::build("A2").unwrap()), 16);
        assert_eq!(n_threshold(&RootSystem::build("G2").unwrap()), 16);
        assert_eq!(n_threshold(&RootSystem::build("E8").unwrap()), 64);
    }

    #[test]
    fn classify_vertex_neighbourhood() {
        let rs = RootSystem::build("A2").unwrap();
        let p = AlcovePoint::from_theta(&rs, &[0.01, 0.02]);
        let c = classify(&rs, &p, 16).unwrap();
        assert_eq!(c.i, vec![1, 2]);
        assert_eq!(c.j, vec![1, 2]);
        assert!(classify(&rs, &p, 4).is_err());
    }

    #[test]
    fn cell_volumes_sum_to_alcove() {
        for label in ["A2", "B2", "G2"] {
            let rs = RootSystem::build(label).unwrap();
            let cells = all_cells(&rs, 16);
            let res = integrate_cells(&rs, &cells, 200_000, &[7], &|_t| 1.0);
            let total: f64 = res.iter().map(|r| r.value).sum();
            let se: f64 = res.iter().map(|r| r.se * r.se).sum::<f64>().sqrt();
            let v = alcove_volume(&rs);
            assert!((total - v).abs() < 5.0 * se + 1e-3 * v, "{label}: {total} vs {v}");
        }
    }

    #[test]
    fn cells_partition() {
        let rs = RootSystem::build("B3").unwrap();
        assert_eq!(partition_check(&rs, 32, 20_000, 3).unwrap(), 0);
    }

    #[test]
    fn split_h_recovers_theta() {
        let rs = RootSystem::build("A3").unwrap();
        let p = AlcovePoint::from_theta(&rs, &[0.01, 0.3, 0.02]);
        let s = split_h(&rs, &[1, 3], &p).unwrap();
        // H_J^perp is orthogonal to the J roots.
        assert!(s.h_perp[0].abs() < 1e-12 && s.h_perp[2].abs() < 1e-12);
        assert!((s.h_j[0] - 0.01).abs() < 1e-12);
    }
}
