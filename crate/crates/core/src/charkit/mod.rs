//! Weyl denominators, dimensions and characters.

pub mod eval;
pub mod oracle;

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::alcove::{self, AlcovePoint, Cell};
use crate::error::{Error, Result};
use crate::lattice::project_onto_vj;
use crate::rational::{q, WeightVector, Q};
use crate::rng;
use crate::rootsys::{Parabolic, RootSystem};

pub use eval::{alt_ratio, System};
pub use oracle::{weight_diagram, WeightDiagram};

/// The four Weyl-denominator factors at H for a cell (I, J).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DeltaFactors {
    pub delta: C,
    pub delta_i: C,
    pub delta_ij: C,
    pub delta_j: C,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    WeylQuotient,
    CellDecomposition,
    FreudenthalOracle,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CharacterValue {
    pub value: C,
    pub method: Method,
    pub condition_estimate: f64,
}

fn two_i_sin(x: f64) -> C {
    C::new(0.0, 2.0 * (PI * x).sin())
}

/// (α, h) for every positive root.
pub fn root_pairings(rs: &RootSystem, theta: &[f64]) -> Vec<f64> {
    rs.datum.positive.iter().map(|a| a.iter().zip(theta).map(|(&c, t)| c as f64 * t).sum()).collect()
}

/// δ(H) = Π_{α>0} 2i sin(π(α,h)).
pub fn delta(rs: &RootSystem, p: &AlcovePoint) -> C {
    root_pairings(rs, p.theta()).into_iter().map(two_i_sin).product()
}

/// Σ_s det s e^{(sρ)(H)}, the alternating form of δ.
pub fn delta_alternating(rs: &RootSystem, p: &AlcovePoint) -> Result<C> {
    let sys = System::get(&rs.datum.gram)?;
    let rho = vec![1.0; rs.rank];
    let z: Vec<f64> = sys.dual(p.theta());
    Ok(sys
        .weyl
        .iter()
        .map(|w| {
            let x: f64 = eval::apply_f64(w, &rho).iter().zip(&z).map(|(a, b)| a * b).sum();
            C::from_polar(w.det as f64, 2.0 * PI * x)
        })
        .sum())
}

pub fn delta_factors(rs: &RootSystem, cell: &Cell, p: &AlcovePoint) -> Result<DeltaFactors> {
    let pi = rs.parabolic_subsystem(&cell.i)?;
    let pj = rs.parabolic_subsystem(&cell.j)?;
    let pa = root_pairings(rs, p.theta());
    let mut f = DeltaFactors { delta: C::new(1.0, 0.0), delta_i: C::new(1.0, 0.0), delta_ij: C::new(1.0, 0.0), delta_j: C::new(1.0, 0.0) };
    for (k, &x) in pa.iter().enumerate() {
        let v = two_i_sin(x);
        f.delta *= v;
        if pj.contains_root(k) {
            f.delta_j *= v;
        } else if pi.contains_root(k) {
            f.delta_ij *= v;
        } else {
            f.delta_i *= v;
        }
    }
    Ok(f)
}

/// Exact Weyl dimension Π(μ,α)/(ρ,α) for μ in Dynkin labels.
pub fn weyl_dimension(rs: &RootSystem, mu: &[Q]) -> Q {
    let half: Vec<Q> = (0..rs.rank).map(|i| rs.datum.gram[i][i] / q(2)).collect();
    let mut d = q(1);
    for a in &rs.datum.positive {
        let mut num = q(0);
        let mut den = q(0);
        for i in 0..rs.rank {
            num += mu[i] * half[i] * a[i];
            den += half[i] * a[i];
        }
        d *= num / den;
    }
    d
}

pub fn weyl_dimension_labels(rs: &RootSystem, mu: &[i64]) -> Q {
    weyl_dimension(rs, &mu.iter().map(|&x| q(x)).collect::<Vec<_>>())
}

/// ε_sing: below this |δ| the quotient is abandoned for the cell formula.
pub fn eps_sing(rs: &RootSystem) -> f64 {
    1e-6 * 2f64.powi(rs.num_positive() as i32)
}

/// χ_μ(H) = Σ_s det s e^{(sμ)(H)} / δ(H), μ in Dynkin labels.
pub fn character(rs: &RootSystem, mu: &[i64], p: &AlcovePoint, n_hint: Option<u32>) -> Result<CharacterValue> {
    let sys = System::get(&rs.datum.gram)?;
    let d = delta(rs, p);
    let scale = 2f64.powi(rs.num_positive() as i32);
    if d.norm() >= eps_sing(rs) || !rs.is_irreducible() {
        let z = sys.dual(p.theta());
        let mf: Vec<f64> = mu.iter().map(|&x| x as f64).collect();
        let num: C = sys
            .weyl
            .iter()
            .map(|w| {
                let x: f64 = eval::apply_f64(w, &mf).iter().zip(&z).map(|(a, b)| a * b).sum();
                C::from_polar(w.det as f64, 2.0 * PI * x)
            })
            .sum();
        return Ok(CharacterValue { value: num / d, method: Method::WeylQuotient, condition_estimate: scale / d.norm() });
    }
    let n = n_hint.unwrap_or_else(|| alcove::n_threshold(rs)).max(alcove::n_threshold(rs));
    let cell = alcove::classify(rs, p, n)?;
    let par = rs.parabolic_subsystem(&cell.j)?;
    let (value, rest) = cell_formula(rs, &sys, &par, mu, p)?;
    Ok(CharacterValue { value, method: Method::CellDecomposition, condition_estimate: scale / rest.max(1e-300) })
}

/// Cell-decomposition evaluation; returns the value and |δ_I δ_{I,J}|.
pub fn cell_formula(rs: &RootSystem, sys: &System, par: &Parabolic, mu: &[i64], p: &AlcovePoint) -> Result<(C, f64)> {
    let theta = p.theta();
    let pa = root_pairings(rs, theta);
    // A singular μ has identically vanishing numerator.
    if weyl_dimension_labels(rs, mu) == q(0) {
        return Ok((C::new(0.0, 0.0), 1.0));
    }
    let rest: C = pa.iter().enumerate().filter(|(k, _)| !par.contains_root(*k)).map(|(_, &x)| two_i_sin(x)).product();
    let sub = System::get(&par.datum.gram)?;
    let tj: Vec<f64> = par.nodes.iter().map(|&j| p.t[j]).collect();
    let zj = sub.dual(&tj);
    let z = sys.dual(theta);
    let mf: Vec<f64> = mu.iter().map(|&x| x as f64).collect();
    let mut num = C::new(0.0, 0.0);
    for w in &sys.weyl {
        let smu = w.apply(mu);
        let l: Vec<f64> = par.base.iter().map(|b| rs.coroot_pairing(&smu, b) as f64).collect();
        if l.iter().any(|&x| x <= 0.0) {
            continue;
        }
        let smf: Vec<f64> = eval::apply_f64(w, &mf);
        let x: f64 = smf.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() - l.iter().zip(&zj).map(|(a, b)| a * b).sum::<f64>();
        num += C::from_polar(w.det as f64, 2.0 * PI * x) * alt_ratio(&sub, &l, &tj)?;
    }
    let sign = par.sign as f64 * shift_sign(par);
    Ok((num * sign / rest, rest.norm()))
}

/// (-1)^{(2ρ_J, H^0)} for the base-positive system of J.
fn shift_sign(par: &Parabolic) -> f64 {
    match par.nodes.iter().position(|&j| j == 0) {
        Some(i) if par.datum.two_rho()[i].rem_euclid(2) == 1 => -1.0,
        _ => 1.0,
    }
}

/// χ^J_γ(H_J) for γ ∈ V_J, via the shift identity and the W_J quotient.
pub fn parabolic_character(rs: &RootSystem, j: &[usize], gamma: &WeightVector, p: &AlcovePoint) -> Result<C> {
    let par = rs.parabolic_subsystem(j)?;
    let proj = project_onto_vj(rs, j, gamma)?;
    if proj != *gamma {
        return Err(Error::Domain(format!("γ = {gamma} is not in V_J for J = {j:?}")));
    }
    let mut l = Vec::with_capacity(par.base.len());
    for b in &par.base {
        let amb = rs.coeffs_to_ambient(b);
        let x = q(2) * rs.inner(gamma, &amb) / rs.inner(&amb, &amb);
        if !x.is_integer() {
            return Err(Error::Domain(format!("γ = {gamma} is not J-integral")));
        }
        l.push(x.to_integer());
    }
    parabolic_from_labels(&par, &l, p)
}

/// χ^J with γ given by its J-labels ⟨γ, β_j^∨⟩.
pub fn parabolic_from_labels(par: &Parabolic, l: &[i64], p: &AlcovePoint) -> Result<C> {
    let sub = System::get(&par.datum.gram)?;
    let tj: Vec<f64> = par.nodes.iter().map(|&j| p.t[j]).collect();
    let lf: Vec<f64> = l.iter().map(|&x| x as f64).collect();
    // (γ, H^0) = -c_0 where c are the J-base coefficients of γ.
    let phase = match par.nodes.iter().position(|&j| j == 0) {
        Some(i) => -(0..lf.len()).map(|k| lf[k] * sub.inv[k][i]).sum::<f64>(),
        None => 0.0,
    };
    let v = alt_ratio(&sub, &lf, &tj)?;
    Ok(C::from_polar(par.sign as f64 * shift_sign(par), 2.0 * PI * phase) * v)
}

/// Σ_λ mult(λ) e^{λ(H)} for the module with highest weight μ - ρ.
pub fn freudenthal_character_oracle(rs: &RootSystem, mu: &[i64], p: &AlcovePoint) -> Result<C> {
    if !mu.iter().all(|&x| x >= 1) {
        return Err(Error::Domain(format!("μ = {mu:?} is not strictly dominant")));
    }
    let hw: Vec<i64> = mu.iter().map(|x| x - 1).collect();
    let wd = weight_diagram(&rs.datum, &hw, oracle::DEFAULT_WEIGHT_CAP)?;
    Ok(wd.eval(p.theta()))
}

/// Harish-Chandra integral on SU(2): ∫ e^{i(Ad_u λ, μ)} du against the closed form.
///
/// λ = a·α/2 and μ = b·α/2. Returns (lhs, lhs standard error, rhs, relative error).
pub fn hc_integral_check(rs: &RootSystem, a: f64, b: f64, samples: usize, seed: u64) -> Result<(f64, f64, f64, f64)> {
    if rs.rank != 1 {
        return Err(Error::Capability("the Harish-Chandra check is rank one only".into()));
    }
    // (λ, μ) = ab/2 for the normalization |α|² = 2.
    let k = a * b / 2.0;
    let mut r = rng::stream(&[seed, rng::str_key("hc")]);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let v: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut r));
        let n2: f64 = v.iter().map(|x| x * x).sum();
        // Rotation by the unit quaternion maps the i axis to a vector with this first component.
        let c = 1.0 - 2.0 * (v[2] * v[2] + v[3] * v[3]) / n2;
        let y = (k * c).cos();
        s += y;
        s2 += y * y;
    }
    let n = samples as f64;
    let lhs = s / n;
    let se = ((s2 / n - lhs * lhs).max(0.0) / n).sqrt();
    // (e^{ik} - e^{-ik}) (α,ρ) / ((α, iλ)(α, μ)) with (α,λ) = a, (α,μ) = b.
    let rhs = if k == 0.0 { 1.0 } else { 2.0 * k.sin() / (a * b) };
    let rel = (lhs - rhs).abs() / rhs.abs().max(1e-300);
    Ok((lhs, se, rhs, rel))
}

/// max over sampled H ∈ P_J, μ with |μ| ≤ N of |χ^J_{μ_J}(H_J)| N^{-|Σ_J^+|}.
pub fn charbound_ratio(rs: &RootSystem, n: u32, samples: usize, seed: u64) -> Result<f64> {
    let cells: Vec<Cell> = alcove::all_cells(rs, n).into_iter().filter(|c| !c.j.is_empty()).collect();
    let per = samples.div_ceil(cells.len()).max(1);
    let rho_norm = crate::rational::to_f64(&rs.norm2(&rs.weyl_vector)).sqrt();
    let mut r = rng::stream(&[seed, n as u64, rng::str_key("charbound")]);
    let mut best = 0.0f64;
    for cell in &cells {
        let par = rs.parabolic_subsystem(&cell.j)?;
        let (pts, _) = alcove::sample_cell(rs, cell, per, seed ^ n as u64)?;
        for p in &pts {
            // Labels bounded so that |μ| ≤ N.
            let maxl = ((n as f64 / rho_norm).floor() as i64).max(1);
            let mu: Vec<i64> = (0..rs.rank).map(|_| r.gen_range(1..=maxl)).collect();
            let l: Vec<i64> = par.base.iter().map(|b| rs.coroot_pairing(&mu, b)).collect();
            let v = parabolic_from_labels(&par, &l, p)?;
            best = best.max(v.norm() / (n as f64).powi(par.num_positive() as i32));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn delta_at_midpoint() {
        let rs = RootSystem::build("A1").unwrap();
        let p = AlcovePoint::from_theta(&rs, &[0.5]);
        assert!((delta(&rs, &p).norm() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn dimensions() {
        let a2 = RootSystem::build("A2").unwrap();
        assert_eq!(weyl_dimension_labels(&a2, &[2, 1]), q(3));
        assert_eq!(weyl_dimension_labels(&a2, &[1, 1]), q(1));
        let a1 = RootSystem::build("A1").unwrap();
        assert_eq!(weyl_dimension_labels(&a1, &[7]), q(7));
        let g2 = RootSystem::build("G2").unwrap();
        assert_eq!(weyl_dimension_labels(&g2, &[2, 1]), q(7));
        assert_eq!(weyl_dimension_labels(&g2, &[1, 2]), q(14));
    }

    #[test]
    fn oracle_dimension_matches() {
        for label in ["A2", "B2", "G2", "B3"] {
            let rs = RootSystem::build(label).unwrap();
            let mu: Vec<i64> = (0..rs.rank).map(|i| 2 + i as i64).collect();
            let p = AlcovePoint::from_theta(&rs, &vec![0.0; rs.rank]);
            let v = freudenthal_character_oracle(&rs, &mu, &p).unwrap();
            assert!((v.re - crate::rational::to_f64(&weyl_dimension_labels(&rs, &mu))).abs() < 1e-9, "{label}");
        }
    }

    #[test]
    fn rank_one_closed_form() {
        let rs = RootSystem::build("A1").unwrap();
        for &t in &[0.3, 1e-7, 0.999_999_9] {
            let p = AlcovePoint::from_theta(&rs, &[t]);
            let v = character(&rs, &[5], &p, None).unwrap();
            let exact = (5.0 * PI * t).sin() / (PI * t).sin();
            assert!((v.value.re - exact).abs() < 1e-9 * exact.abs().max(1.0), "{t}: {:?}", v);
        }
    }

    #[test]
    fn cell_formula_matches_quotient_and_oracle() {
        for label in ["A2", "B2", "G2"] {
            let rs = RootSystem::build(label).unwrap();
            let sys = System::get(&rs.datum.gram).unwrap();
            let mut r = rng::stream(&[11]);
            for _ in 0..200 {
                let p = alcove::uniform_point(&rs, &mut r);
                let mu: Vec<i64> = (0..rs.rank).map(|_| r.gen_range(1..8)).collect();
                let cell = alcove::classify(&rs, &p, 16).unwrap();
                let par = rs.parabolic_subsystem(&cell.j).unwrap();
                let (cf, _) = cell_formula(&rs, &sys, &par, &mu, &p).unwrap();
                let or = freudenthal_character_oracle(&rs, &mu, &p).unwrap();
                assert!(close(cf, or, 1e-8), "{label} {mu:?} {:?}: {cf} vs {or}", p.t);
            }
        }
    }

    #[test]
    fn near_vertex_stability() {
        let rs = RootSystem::build("B2").unwrap();
        for k in 4..=8 {
            let e = 10f64.powi(-k);
            let p = AlcovePoint::from_t(&rs, &[1.0 - 3.0 * e, e, e]).unwrap();
            let v = character(&rs, &[3, 2], &p, None).unwrap();
            let or = freudenthal_character_oracle(&rs, &[3, 2], &p).unwrap();
            assert!(close(v.value, or, 1e-8), "k={k}: {} vs {or}", v.value);
        }
    }

    #[test]
    fn factorization() {
        let rs = RootSystem::build("A2").unwrap();
        let cell = Cell::new(&rs, &[1, 2], &[1], 16).unwrap();
        let (pts, _) = alcove::sample_cell(&rs, &cell, 50, 1).unwrap();
        for p in &pts {
            let f = delta_factors(&rs, &cell, p).unwrap();
            assert!(close(f.delta_i * f.delta_ij * f.delta_j, f.delta, 1e-9));
            assert!(close(delta_alternating(&rs, p).unwrap(), f.delta, 1e-9));
        }
    }

    #[test]
    fn parabolic_rank_one() {
        let rs = RootSystem::build("A2").unwrap();
        let p = AlcovePoint::from_theta(&rs, &[0.01, 0.4]);
        let gamma = rs.coeffs_to_ambient(&[1, 0]).scale(crate::rational::qf(3, 2));
        let v = parabolic_character(&rs, &[1], &gamma, &p).unwrap();
        let exact = (3.0 * PI * 0.01).sin() / (PI * 0.01).sin();
        assert!((v.re - exact).abs() < 1e-12);
        let bad = rs.coeffs_to_ambient(&[0, 1]);
        assert!(parabolic_character(&rs, &[1], &bad, &p).is_err());
    }

    #[test]
    fn harish_chandra_rank_one() {
        let rs = RootSystem::build("A1").unwrap();
        let (l, se, rhs, _) = hc_integral_check(&rs, 1.3, 2.1, 200_000, 5).unwrap();
        assert!((l - rhs).abs() < 4.0 * se + 1e-12);
        let (l0, _, r0, _) = hc_integral_check(&rs, 0.0, 0.0, 10, 5).unwrap();
        assert_eq!((l0, r0), (1.0, 1.0));
    }
}
