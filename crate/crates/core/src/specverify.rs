//! Exact verification of the root-product exponent lemma and its corollaries.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{qf, Q};
use crate::rootsys::{CartanType, RootSystem};

pub const MONOMIAL_CAP: usize = 10_000_000;
/// Largest rank for which `find_exponent_tuple` expands by default.
pub const EXPANSION_MAX_RANK: usize = 4;

/// Exponent vector → exact coefficient.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SparsePolynomial {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u16>, i128>,
}

impl SparsePolynomial {
    pub fn one(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::from([(vec![0; nvars], 1)]) }
    }

    pub fn coeff(&self, e: &[u16]) -> i128 {
        self.terms.get(e).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next().map(|e| e.iter().map(|&x| x as u32).sum())
    }

    /// Multiply by the linear form Σ c_i t_i.
    pub fn mul_linear(&self, c: &[i64], cap: usize) -> Result<Self> {
        let mut out: BTreeMap<Vec<u16>, i128> = BTreeMap::new();
        for (e, &v) in &self.terms {
            for (i, &ci) in c.iter().enumerate() {
                if ci == 0 {
                    continue;
                }
                let mut f = e.clone();
                f[i] += 1;
                *out.entry(f).or_insert(0) += v * ci as i128;
            }
            if out.len() > cap {
                return Err(Error::Capability(format!("expansion exceeds {cap} monomials; use counting mode")));
            }
        }
        out.retain(|_, v| *v != 0);
        Ok(Self { nvars: self.nvars, terms: out })
    }
}

/// Π_{α ∈ Σ^+ \ Σ_J^+} α(H)/2πi in the variables t_1..t_r.
pub fn expand_root_product(rs: &RootSystem, excluded: &[usize], cap: usize) -> Result<SparsePolynomial> {
    let skip: Vec<usize> = if excluded.is_empty() { Vec::new() } else { rs.parabolic_subsystem(excluded)?.positive };
    let mut p = SparsePolynomial::one(rs.rank);
    for (k, a) in rs.datum.positive.iter().enumerate() {
        if skip.binary_search(&k).is_ok() {
            continue;
        }
        p = p.mul_linear(a, cap)?;
    }
    Ok(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Expansion,
    Counting,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentTuple {
    pub p: Vec<u32>,
    pub mode: Mode,
    /// Smallest coefficient over all permuted monomials (expansion mode only).
    pub min_coefficient: Option<i128>,
}

/// Minimal number of positive roots meeting a variable set of each size k = 0..=r.
pub fn support_minima(rs: &RootSystem) -> Vec<usize> {
    let r = rs.rank;
    let masks: Vec<u32> = rs
        .datum
        .positive
        .iter()
        .map(|a| a.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, _)| 1u32 << i).sum())
        .collect();
    let mut best = vec![usize::MAX; r + 1];
    for s in 0u32..(1 << r) {
        let k = s.count_ones() as usize;
        let n = masks.iter().filter(|&&m| m & s != 0).count();
        best[k] = best[k].min(n);
    }
    best
}

/// Hall's condition: every permuted monomial is present iff the k largest
/// exponents sum to at most the minimal count of roots meeting any k variables.
fn counting_ok(minima: &[usize], p: &[u32]) -> bool {
    let mut sorted: Vec<u32> = p.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut s = 0usize;
    for (k, x) in sorted.iter().enumerate() {
        s += *x as usize;
        if s > minima[k + 1] {
            return false;
        }
    }
    true
}

/// Majorization-minimal strictly increasing completion of a prefix, if any.
fn flattest_completion(prefix: &[u32], r: usize, total: u32) -> Option<Vec<u32>> {
    let m = r - prefix.len();
    let used: u32 = prefix.iter().sum();
    let last = *prefix.last().unwrap_or(&0);
    let base: Vec<u32> = (1..=m as u32).map(|j| last + j).collect();
    let bsum: u32 = base.iter().sum();
    if used + bsum > total {
        return None;
    }
    if m == 0 {
        return (used == total).then(|| prefix.to_vec());
    }
    let extra = total - used - bsum;
    let (each, rem) = (extra / m as u32, (extra % m as u32) as usize);
    let mut out = prefix.to_vec();
    for (j, b) in base.iter().enumerate() {
        out.push(b + each + u32::from(j >= m - rem));
    }
    Some(out)
}

/// Lexicographically smallest tuple 1 = p_1 < … < p_r, Σ p = |Σ^+|, passing `ok`.
fn lex_smallest(r: usize, total: u32, ok: &dyn Fn(&[u32]) -> bool, monotone: bool) -> Option<Vec<u32>> {
    if monotone {
        // Feasibility of a prefix is decided by its flattest completion.
        let mut prefix = vec![1u32];
        if !flattest_completion(&prefix, r, total).is_some_and(|c| ok(&c)) {
            return None;
        }
        while prefix.len() < r {
            let last = *prefix.last().unwrap();
            let used: u32 = prefix.iter().sum();
            let mut chosen = None;
            if used >= total {
                return None;
            }
            let range = if prefix.len() + 1 == r { total - used..=total - used } else { last + 1..=total };
            for v in range {
                if v <= last {
                    break;
                }
                let mut cand = prefix.clone();
                cand.push(v);
                match flattest_completion(&cand, r, total) {
                    Some(c) if ok(&c) => {
                        chosen = Some(v);
                        break;
                    }
                    Some(_) => continue,
                    None => break,
                }
            }
            prefix.push(chosen?);
        }
        return Some(prefix);
    }
    let mut out = None;
    let mut cur = vec![1u32];
    search(&mut cur, r, total, ok, &mut out);
    out
}

fn search(cur: &mut Vec<u32>, r: usize, total: u32, ok: &dyn Fn(&[u32]) -> bool, out: &mut Option<Vec<u32>>) -> bool {
    let used: u32 = cur.iter().sum();
    if cur.len() == r {
        if used == total && ok(cur) {
            *out = Some(cur.clone());
            return true;
        }
        return false;
    }
    let last = *cur.last().unwrap();
    if cur.len() + 1 == r {
        if total - used <= last {
            return false;
        }
        cur.push(total - used);
        let found = search(cur, r, total, ok, out);
        cur.pop();
        return found;
    }
    for v in last + 1..=total {
        let mut test = cur.clone();
        test.push(v);
        if flattest_completion(&test, r, total).is_none() {
            break;
        }
        cur.push(v);
        if search(cur, r, total, ok, out) {
            return true;
        }
        cur.pop();
    }
    false
}

fn permutations(r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut a: Vec<usize> = (0..r).collect();
    permute(&mut a, 0, &mut out);
    out
}

fn permute(a: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == a.len() {
        out.push(a.clone());
        return;
    }
    for i in k..a.len() {
        a.swap(k, i);
        permute(a, k + 1, out);
        a.swap(k, i);
    }
}

/// Smallest coefficient of the monomials Π_k t_{σ(k)}^{p_k} over all σ.
pub fn min_permuted_coefficient(poly: &SparsePolynomial, p: &[u32]) -> i128 {
    permutations(p.len())
        .iter()
        .map(|sigma| {
            let mut e = vec![0u16; p.len()];
            for (k, &v) in sigma.iter().enumerate() {
                e[v] = p[k] as u16;
            }
            poly.coeff(&e)
        })
        .min()
        .unwrap_or(0)
}

pub fn find_exponent_tuple(rs: &RootSystem) -> Result<ExponentTuple> {
    let mode = if rs.rank <= EXPANSION_MAX_RANK { Mode::Expansion } else { Mode::Counting };
    find_exponent_tuple_with(rs, mode)
}

pub fn find_exponent_tuple_with(rs: &RootSystem, mode: Mode) -> Result<ExponentTuple> {
    rs.require_irreducible("exponent tuple")?;
    let total = rs.num_positive() as u32;
    let r = rs.rank;
    match mode {
        Mode::Counting => {
            let minima = support_minima(rs);
            let p = lex_smallest(r, total, &|p| counting_ok(&minima, p), true)
                .ok_or_else(|| Error::Domain(format!("no exponent tuple for {}: lemma violation", rs.label)))?;
            Ok(ExponentTuple { p, mode, min_coefficient: None })
        }
        Mode::Expansion => {
            let poly = expand_root_product(rs, &[], MONOMIAL_CAP)?;
            let p = lex_smallest(r, total, &|p| min_permuted_coefficient(&poly, p) >= 1, false)
                .ok_or_else(|| Error::Domain(format!("no exponent tuple for {}: lemma violation", rs.label)))?;
            let min_coefficient = Some(min_permuted_coefficient(&poly, &p));
            Ok(ExponentTuple { p, mode, min_coefficient })
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentCheck {
    pub vertex: usize,
    pub component: String,
    pub rank: usize,
    pub positive: usize,
    pub strict: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubsystemReport {
    pub type_label: String,
    pub rank: usize,
    pub positive: usize,
    /// Subsets of {0..r} checked.
    pub checked: usize,
    /// Of those, subsets avoiding the affine node 0.
    pub checked_finite: usize,
    pub violations: Vec<Vec<usize>>,
    pub min_slack: String,
    pub min_slack_j: Vec<usize>,
    pub components: Vec<ComponentCheck>,
    pub pass: bool,
}

/// |J|/|Σ_J^+| > r/|Σ^+| for every nonempty J ⊊ {0..r} with |J| ≤ r-1.
pub fn verify_subsystem_inequality(rs: &RootSystem) -> Result<SubsystemReport> {
    rs.require_irreducible("subsystem inequality")?;
    let r = rs.rank;
    let total = rs.num_positive() as i64;
    let rhs = qf(r as i64, total);
    let subsets: Vec<u32> = (1u32..(1 << (r + 1))).filter(|m| (m.count_ones() as usize) < r).collect();
    let results: Vec<(Vec<usize>, Q)> = subsets
        .par_iter()
        .map(|&m| {
            let j: Vec<usize> = (0..=r).filter(|b| m & (1 << b) != 0).collect();
            let npos = rs.parabolic_subsystem(&j).expect("proper subset").num_positive() as i64;
            let slack = qf(j.len() as i64, npos) - rhs;
            (j, slack)
        })
        .collect();
    let mut violations = Vec::new();
    let mut best: Option<(Q, Vec<usize>)> = None;
    for (j, s) in &results {
        if *s <= qf(0, 1) {
            violations.push(j.clone());
        }
        if best.as_ref().is_none_or(|(b, _)| s < b) {
            best = Some((*s, j.clone()));
        }
    }
    let checked_finite = results.iter().filter(|(j, _)| !j.contains(&0)).count();
    let mut components = Vec::new();
    for k in 0..=r {
        let i: Vec<usize> = (0..=r).filter(|&x| x != k).collect();
        let par = rs.parabolic_subsystem(&i)?;
        if par.types.len() < 2 {
            continue;
        }
        for t in &par.types {
            let np = t.num_positive_roots() as i64;
            components.push(ComponentCheck {
                vertex: k,
                component: t.to_string(),
                rank: t.rank,
                positive: np as usize,
                strict: qf(t.rank as i64, np) > rhs,
            });
        }
    }
    let (min_slack, min_slack_j) = best.map(|(s, j)| (s.to_string(), j)).unwrap_or_default();
    let pass = violations.is_empty() && components.iter().all(|c| c.strict);
    Ok(SubsystemReport {
        type_label: rs.label.clone(),
        rank: r,
        positive: total as usize,
        checked: results.len(),
        checked_finite,
        violations,
        min_slack,
        min_slack_j,
        components,
        pass,
    })
}

/// Run the subsystem check over every irreducible type of rank ≤ max_rank.
pub fn verify_subsystem_all(max_rank: usize) -> Result<Vec<SubsystemReport>> {
    CartanType::all_up_to(max_rank)
        .iter()
        .map(|t| verify_subsystem_inequality(&RootSystem::from_types(&[*t])))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct QjReport {
    /// q_{|J|+1}, …, q_r.
    pub q: Vec<usize>,
    /// Σ_{k>j} q_k - |Σ^+|(r-j)/r for j = |J|..r-1.
    pub slacks: Vec<String>,
    pub equality_at: Vec<usize>,
    pub pass: bool,
}

/// Counts n_j of positive roots whose support meets the variables ranked j..r.
///
/// `perm[k]` is the simple index (1-based) of the (k+1)-th smallest variable;
/// the J variables must come first.
pub fn verify_qj_condition(rs: &RootSystem, j: &[usize], perm: &[usize]) -> Result<QjReport> {
    let r = rs.rank;
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if sorted != (1..=r).collect::<Vec<_>>() {
        return Err(Error::Config(format!("{perm:?} is not a permutation of 1..={r}")));
    }
    if j.iter().any(|&x| x == 0 || x > r) || j.len() >= r {
        return Err(Error::Config(format!("J = {j:?} must be a proper subset of 1..={r}")));
    }
    let lowest: Vec<usize> = perm[..j.len()].to_vec();
    if !j.iter().all(|x| lowest.contains(x)) {
        return Err(Error::Config(format!("the J variables {j:?} must be ranked lowest in {perm:?}")));
    }
    let total = rs.num_positive();
    // n[k] for k = 1..=r+1 (1-based ranks).
    let mut n = vec![0usize; r + 2];
    for k in 1..=r {
        let top: Vec<usize> = perm[k - 1..].iter().map(|x| x - 1).collect();
        n[k] = rs.datum.positive.iter().filter(|a| top.iter().any(|&i| a[i] != 0)).count();
    }
    let q: Vec<usize> = (j.len() + 1..=r).map(|k| n[k] - n[k + 1]).collect();
    let mut slacks = Vec::new();
    let mut equality_at = Vec::new();
    let mut pass = true;
    for jj in j.len()..r {
        let s = qf(n[jj + 1] as i64, 1) - qf((total * (r - jj)) as i64, r as i64);
        if s < qf(0, 1) {
            pass = false;
        }
        if s == qf(0, 1) {
            equality_at.push(jj);
            if !(jj == 0 && j.is_empty()) {
                pass = false;
            }
        }
        slacks.push(s.to_string());
    }
    Ok(QjReport { q, slacks, equality_at, pass })
}

/// The q_j check over every J ⊊ {1..r} and every admissible ranking.
pub fn verify_qj_all(rs: &RootSystem) -> Result<(usize, bool)> {
    let r = rs.rank;
    let mut count = 0;
    let mut ok = true;
    for m in 0u32..(1 << r) {
        let j: Vec<usize> = (0..r).filter(|b| m & (1 << b) != 0).map(|b| b + 1).collect();
        if j.len() >= r {
            continue;
        }
        let rest: Vec<usize> = (1..=r).filter(|x| !j.contains(x)).collect();
        for sigma in permutations(rest.len()) {
            let mut perm = j.clone();
            perm.extend(sigma.iter().map(|&i| rest[i]));
            count += 1;
            ok &= verify_qj_condition(rs, &j, &perm)?.pass;
        }
    }
    Ok((count, ok))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_expansions() {
        let a2 = RootSystem::build("A2").unwrap();
        let p = expand_root_product(&a2, &[], MONOMIAL_CAP).unwrap();
        assert_eq!(p.coeff(&[2, 1]), 1);
        assert_eq!(p.coeff(&[1, 2]), 1);
        let b2 = RootSystem::build("B2").unwrap();
        let p = expand_root_product(&b2, &[], MONOMIAL_CAP).unwrap();
        assert_eq!((p.coeff(&[3, 1]), p.coeff(&[2, 2]), p.coeff(&[1, 3])), (1, 3, 2));
        let g2 = RootSystem::build("G2").unwrap();
        let p = expand_root_product(&g2, &[], MONOMIAL_CAP).unwrap();
        // The short simple root comes first in the Cartan convention used here.
        let (a, b) = (p.coeff(&[5, 1]), p.coeff(&[1, 5]));
        assert_eq!((a.min(b), a.max(b)), (2, 18));
    }

    #[test]
    fn small_tuples() {
        for (l, t) in [("A2", vec![1, 2]), ("B2", vec![1, 3]), ("G2", vec![1, 5])] {
            let rs = RootSystem::build(l).unwrap();
            assert_eq!(find_exponent_tuple(&rs).unwrap().p, t);
            assert_eq!(find_exponent_tuple_with(&rs, Mode::Counting).unwrap().p, t);
        }
    }

    #[test]
    fn modes_agree_through_rank_four() {
        for t in CartanType::all_up_to(4) {
            let rs = RootSystem::from_types(&[t]);
            let a = find_exponent_tuple_with(&rs, Mode::Expansion).unwrap();
            let b = find_exponent_tuple_with(&rs, Mode::Counting).unwrap();
            assert_eq!(a.p, b.p, "{t}");
            assert!(a.min_coefficient.unwrap() >= 1);
        }
        for t in CartanType::all_up_to(8) {
            let rs = RootSystem::from_types(&[t]);
            let p = find_exponent_tuple(&rs).unwrap().p;
            assert_eq!(p.iter().sum::<u32>() as usize, rs.num_positive(), "{t}");
        }
    }

    #[test]
    fn subsystem_examples() {
        let a2 = RootSystem::build("A2").unwrap();
        let rep = verify_subsystem_inequality(&a2).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.min_slack, "1/3");
        let e8 = RootSystem::build("E8").unwrap();
        let rep = verify_subsystem_inequality(&e8).unwrap();
        assert!(rep.pass);
        assert_eq!((rep.checked, rep.checked_finite), (501, 254));
    }

    #[test]
    fn qj_examples() {
        let b2 = RootSystem::build("B2").unwrap();
        let rep = verify_qj_condition(&b2, &[2], &[2, 1]).unwrap();
        assert_eq!(rep.q, vec![3]);
        assert!(rep.pass);
        let a1 = RootSystem::build("A1").unwrap();
        let rep = verify_qj_condition(&a1, &[], &[1]).unwrap();
        assert_eq!((rep.q.clone(), rep.equality_at.clone(), rep.pass), (vec![1], vec![0], true));
        let a2 = RootSystem::build("A2").unwrap();
        for perm in [[1, 2], [2, 1]] {
            assert!(verify_qj_condition(&a2, &[], &perm).unwrap().q[1] >= 2);
        }
    }
}
