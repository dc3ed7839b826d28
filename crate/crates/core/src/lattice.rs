//! Weight and root lattices, parabolic projections and lattice splittings.

use num_integer::Integer;
use num_traits::Zero;
use serde::Serialize;

use crate::error::Result;
use crate::hnf::{self, IMatrix};
use crate::rational::{denom_lcm, q, qmat_det, qmat_from_ints, qmat_inverse, rational_gcd, QMatrix, WeightVector, Q};
use crate::rootsys::{Parabolic, RootSystem};

/// A lattice with an explicit Z-basis.
#[derive(Clone, Debug, Serialize)]
pub struct Lattice {
    pub basis: Vec<WeightVector>,
    #[serde(serialize_with = "ser_qmat")]
    pub gram: QMatrix,
}

fn ser_qmat<S: serde::Serializer>(m: &QMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    let v: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
    v.serialize(s)
}

impl Lattice {
    pub fn from_basis(rs: &RootSystem, basis: Vec<WeightVector>) -> Self {
        let gram = basis.iter().map(|a| basis.iter().map(|b| rs.inner(a, b)).collect()).collect();
        Self { basis, gram }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }
}

pub fn weight_lattice(rs: &RootSystem) -> Lattice {
    Lattice::from_basis(rs, rs.fundamental_weights())
}

pub fn root_lattice(rs: &RootSystem) -> Lattice {
    Lattice::from_basis(rs, rs.simple_roots.clone())
}

/// [Λ:Γ], the determinant of the Cartan matrix.
pub fn lattice_index(rs: &RootSystem) -> i64 {
    qmat_det(&qmat_from_ints(&rs.cartan_matrix)).to_integer().abs()
}

pub fn strictly_dominant(rs: &RootSystem, mu: &WeightVector) -> Result<bool> {
    let labels = rs.weight_labels(mu)?;
    Ok(labels.iter().all(|&l| l >= 1))
}

pub fn strictly_dominant_labels(labels: &[i64]) -> bool {
    labels.iter().all(|&l| l >= 1)
}

fn base_gram(rs: &RootSystem, p: &Parabolic) -> QMatrix {
    p.base.iter().map(|a| p.base.iter().map(|b| rs.datum.inner(a, b)).collect()).collect()
}

/// Coefficients y with Proj_{V_J}(μ) = Σ y_j α_j over the nodes of J.
pub fn projection_coeffs(rs: &RootSystem, p: &Parabolic, mu: &WeightVector) -> Vec<Q> {
    if p.base.is_empty() {
        return Vec::new();
    }
    let g = base_gram(rs, p);
    let inv = qmat_inverse(&g).expect("base of a parabolic subsystem is independent");
    let b: Vec<Q> = p.base.iter().map(|c| rs.inner(mu, &rs.coeffs_to_ambient(c))).collect();
    (0..b.len()).map(|i| (0..b.len()).map(|k| inv[i][k] * b[k]).sum()).collect()
}

pub fn project_onto_vj(rs: &RootSystem, j: &[usize], mu: &WeightVector) -> Result<WeightVector> {
    let p = rs.parabolic_subsystem(j)?;
    Ok(project_with(rs, &p, mu))
}

pub fn project_with(rs: &RootSystem, p: &Parabolic, mu: &WeightVector) -> WeightVector {
    let y = projection_coeffs(rs, p, mu);
    let mut v = WeightVector::zero(rs.ambient_dim);
    for (c, yj) in p.base.iter().zip(&y) {
        v = v.add_scaled(*yj, &rs.coeffs_to_ambient(c));
    }
    v
}

pub fn project_onto_vj_perp(rs: &RootSystem, j: &[usize], mu: &WeightVector) -> Result<WeightVector> {
    let p = rs.parabolic_subsystem(j)?;
    Ok(mu - &project_with(rs, &p, mu))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SplitMode {
    SpanSide,
    PerpSide,
}

/// Λ = part ⊕ complement, with bases also recorded as Dynkin labels.
#[derive(Clone, Debug, Serialize)]
pub struct LatticeSplit {
    pub mode: SplitMode,
    pub part: Lattice,
    pub complement: Lattice,
    pub part_labels: Vec<Vec<i64>>,
    pub complement_labels: Vec<Vec<i64>>,
    /// Determinant of the change of basis to the fundamental weights.
    pub change_of_basis_det: i64,
}

fn to_i64(m: &IMatrix) -> Vec<Vec<i64>> {
    m.iter().map(|r| r.iter().map(|&x| i64::try_from(x).expect("entry fits in i64")).collect()).collect()
}

/// Integer matrix of pairings <ω_i, α_j^∨> for j in J.
fn pairing_matrix(rs: &RootSystem, p: &Parabolic) -> IMatrix {
    (0..rs.rank)
        .map(|i| {
            let mut e = vec![0i64; rs.rank];
            e[i] = 1;
            p.base.iter().map(|b| rs.coroot_pairing(&e, b) as i128).collect()
        })
        .collect()
}

fn labels_to_lattice(rs: &RootSystem, rows: &[Vec<i64>]) -> Lattice {
    Lattice::from_basis(rs, rows.iter().map(|r| rs.labels_to_ambient(r)).collect())
}

pub fn split_lattice(rs: &RootSystem, j: &[usize], mode: SplitMode) -> Result<LatticeSplit> {
    let p = rs.parabolic_subsystem(j)?;
    Ok(split_with(rs, &p, mode))
}

pub fn split_with(rs: &RootSystem, p: &Parabolic, mode: SplitMode) -> LatticeSplit {
    let r = rs.rank;
    let k = p.base.len();
    let (u, rank) = if k == 0 {
        let id: IMatrix = (0..r).map(|i| (0..r).map(|j| (i == j) as i128).collect()).collect();
        (id, 0)
    } else {
        match mode {
            SplitMode::SpanSide => {
                let f = hnf::hnf(&pairing_matrix(rs, p));
                (f.u, f.rank)
            }
            SplitMode::PerpSide => {
                let w = rs.fundamental_weights();
                let rows: Vec<Vec<Q>> = w.iter().map(|om| (om - &project_with(rs, p, om)).coords).collect();
                let den = denom_lcm(rows.iter().flatten());
                let m: IMatrix =
                    rows.iter().map(|row| row.iter().map(|x| (x * den).to_integer() as i128).collect()).collect();
                let f = hnf::hnf(&m);
                (f.u, f.rank)
            }
        }
    };
    let u64m = to_i64(&u);
    let (part_labels, complement_labels) = match mode {
        // Proj_{V_J} is injective on the first rows and vanishes on the rest.
        SplitMode::SpanSide => (u64m[..rank].to_vec(), u64m[rank..].to_vec()),
        // Proj_{V_J^⊥} vanishes on Λ ∩ V_J, the trailing rows.
        SplitMode::PerpSide => (u64m[rank..].to_vec(), u64m[..rank].to_vec()),
    };
    let mut all = part_labels.clone();
    all.extend(complement_labels.iter().cloned());
    let d = hnf::det(&all.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect());
    LatticeSplit {
        mode,
        part: labels_to_lattice(rs, &part_labels),
        complement: labels_to_lattice(rs, &complement_labels),
        part_labels,
        complement_labels,
        change_of_basis_det: d as i64,
    }
}

/// Span-side split together with the preimage ^JΓ of Γ_J and coset representatives.
#[derive(Clone, Debug, Serialize)]
pub struct CosetDecomposition {
    pub nodes: Vec<usize>,
    /// Basis of ^JΛ (labels).
    pub part: Vec<Vec<i64>>,
    /// Basis of ^JΛ^⊥ (labels).
    pub perp: Vec<Vec<i64>>,
    /// Basis of ^JΓ (labels).
    pub gamma: Vec<Vec<i64>>,
    /// A transversal of ^JΛ/^JΓ (labels).
    pub reps: Vec<Vec<i64>>,
    /// A second, differently shifted transversal.
    pub reps_alt: Vec<Vec<i64>>,
    pub index: usize,
}

pub fn coset_decomposition(rs: &RootSystem, p: &Parabolic) -> CosetDecomposition {
    let r = rs.rank;
    let k = p.base.len();
    let split = split_with(rs, p, SplitMode::SpanSide);
    if k == 0 {
        return CosetDecomposition {
            nodes: p.nodes.clone(),
            part: Vec::new(),
            perp: split.complement_labels,
            gamma: Vec::new(),
            reps: vec![vec![0; r]],
            reps_alt: vec![vec![0; r]],
            index: 1,
        };
    }
    // Rows of P: Proj_{V_J} of the ^JΛ basis in α_J coordinates, x = labels_J · A_J^{-1}.
    let a_j = p.datum.inverse_cartan();
    let m = pairing_matrix(rs, p);
    let labels_j: Vec<Vec<Q>> = split
        .part_labels
        .iter()
        .map(|row| (0..k).map(|c| q((0..r).map(|i| row[i] as i128 * m[i][c]).sum::<i128>() as i64)).collect())
        .collect();
    let pm: QMatrix = labels_j.iter().map(|row| (0..k).map(|c| (0..k).map(|l| row[l] * a_j[l][c]).sum()).collect()).collect();
    let pinv = qmat_inverse(&pm).expect("projection is injective on ^JΛ");
    let pinv_i: IMatrix = pinv
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| {
                    assert!(x.is_integer(), "Γ_J is contained in Proj(Λ)");
                    x.to_integer() as i128
                })
                .collect()
        })
        .collect();
    let part_i: IMatrix = split.part_labels.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let gamma = to_i64(&hnf::mat_mul(&pinv_i, &part_i));
    let f = hnf::hnf(&pinv_i);
    let diag: Vec<i128> = (0..k).map(|i| f.h[i][f.pivots[i]]).collect();
    let index = diag.iter().product::<i128>() as usize;
    let mut reps = Vec::with_capacity(index);
    let mut n = vec![0i128; k];
    loop {
        let lab: Vec<i64> = (0..r).map(|c| (0..k).map(|i| n[i] * part_i[i][c]).sum::<i128>() as i64).collect();
        reps.push(lab);
        let mut pos = 0;
        loop {
            if pos == k {
                break;
            }
            n[pos] += 1;
            if n[pos] < diag[pos] {
                break;
            }
            n[pos] = 0;
            pos += 1;
        }
        if pos == k {
            break;
        }
    }
    let reps_alt = reps
        .iter()
        .enumerate()
        .map(|(i, rep)| {
            let s = i as i64 + 1;
            rep.iter().zip(&gamma[0]).map(|(a, g)| a - s * g).collect()
        })
        .collect();
    CosetDecomposition {
        nodes: p.nodes.clone(),
        part: split.part_labels,
        perp: split.complement_labels,
        gamma,
        reps,
        reps_alt,
        index,
    }
}

pub fn preimage_of_gamma_j(rs: &RootSystem, j: &[usize]) -> Result<Lattice> {
    let p = rs.parabolic_subsystem(j)?;
    let cd = coset_decomposition(rs, &p);
    Ok(labels_to_lattice(rs, &cd.gamma))
}

pub fn coset_reps(rs: &RootSystem, j: &[usize]) -> Result<Vec<WeightVector>> {
    let p = rs.parabolic_subsystem(j)?;
    let cd = coset_decomposition(rs, &p);
    Ok(cd.reps.iter().map(|l| rs.labels_to_ambient(l)).collect())
}

/// Containments Λ_J ⊇ Proj_{V_J}(Λ) ⊇ Γ_J, checked exactly.
pub fn projection_containments(rs: &RootSystem, p: &Parabolic) -> (bool, bool) {
    let k = p.base.len();
    if k == 0 {
        return (true, true);
    }
    let m = pairing_matrix(rs, p);
    // Λ_J membership: integer pairings with the coroots of J, which Proj preserves.
    let w = rs.fundamental_weights();
    let mut first = true;
    let a_j = p.datum.inverse_cartan();
    let mut gens: Vec<Vec<Q>> = Vec::new();
    for (i, om) in w.iter().enumerate() {
        let pr = project_with(rs, p, om);
        let lab: Vec<Q> =
            p.base.iter().map(|b| q(2) * rs.inner(&pr, &rs.coeffs_to_ambient(b)) / rs.root_length2(b)).collect();
        if lab.iter().zip(&m[i]).any(|(x, &y)| !x.is_integer() || x.to_integer() as i128 != y) {
            first = false;
        }
        gens.push((0..k).map(|c| (0..k).map(|l| lab[l] * a_j[l][c]).sum()).collect());
    }
    let den = denom_lcm(gens.iter().flatten());
    let gi: IMatrix = gens.iter().map(|g| g.iter().map(|x| (x * den).to_integer() as i128).collect()).collect();
    let f = hnf::hnf(&gi);
    let second = (0..k).all(|j| {
        let mut e = vec![0i128; k];
        e[j] = den as i128;
        hnf::in_row_lattice(&f, &e)
    });
    (first, second)
}

/// D with (μ,λ) ∈ D·Z for all weights.
pub fn rationality_constant(rs: &RootSystem) -> Q {
    let g = rs.datum.weight_gram();
    Q::new(1, denom_lcm(g.iter().flatten()))
}

/// The generator g of {|μ|² - |ρ|² : μ ∈ Λ} ⊂ gZ.
pub fn spectral_gap(rs: &RootSystem) -> Q {
    let g = rs.datum.weight_gram();
    let mut gens = Vec::new();
    for i in 0..rs.rank {
        gens.push(g[i][i]);
        for j in i + 1..rs.rank {
            gens.push(g[i][j] * q(2));
        }
    }
    rational_gcd(&gens)
}

/// Period T of the Schrödinger kernel, returned as T/(2π).
pub fn schrodinger_period(rs: &RootSystem) -> Q {
    spectral_gap(rs).recip()
}

pub fn is_multiple_of(x: Q, g: Q) -> bool {
    if g.is_zero() {
        return x.is_zero();
    }
    (x / g).is_integer()
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    #[test]
    fn indices() {
        for (l, i) in [("A1", 2), ("A2", 3), ("G2", 1), ("B2", 2), ("E8", 1), ("E6", 3)] {
            assert_eq!(lattice_index(&RootSystem::build(l).unwrap()), i, "{l}");
        }
    }

    #[test]
    fn dominance() {
        let rs = RootSystem::build("A2").unwrap();
        assert!(strictly_dominant(&rs, &rs.weyl_vector).unwrap());
        let w = rs.fundamental_weights();
        assert!(!strictly_dominant(&rs, &w[0]).unwrap());
        let half = rs.simple_roots[0].scale(qf(1, 3));
        assert!(matches!(strictly_dominant(&rs, &half), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn projections_in_a2() {
        let rs = RootSystem::build("A2").unwrap();
        let w = rs.fundamental_weights();
        assert!(project_onto_vj(&rs, &[1], &w[1]).unwrap().is_zero());
        assert_eq!(project_onto_vj(&rs, &[1], &w[0]).unwrap(), rs.simple_roots[0].scale(qf(1, 2)));
    }

    #[test]
    fn rationality_and_period() {
        let a1 = RootSystem::build("A1").unwrap();
        assert_eq!(rationality_constant(&a1), qf(1, 2));
        assert_eq!(schrodinger_period(&a1), q(2));
        let a2 = RootSystem::build("A2").unwrap();
        assert_eq!(rationality_constant(&a2), qf(1, 3));
        assert_eq!(schrodinger_period(&a2), qf(3, 2));
    }

    #[test]
    fn coset_counts() {
        let a1 = RootSystem::build("A1").unwrap();
        let p = a1.parabolic_subsystem(&[1]).unwrap();
        assert_eq!(coset_decomposition(&a1, &p).index, 2);
        let g2 = RootSystem::build("G2").unwrap();
        let p = g2.parabolic_subsystem(&[1, 2]).unwrap();
        assert_eq!(coset_decomposition(&g2, &p).index, 1);
        let a2 = RootSystem::build("A2").unwrap();
        let p = a2.parabolic_subsystem(&[1]).unwrap();
        assert_eq!(2 % coset_decomposition(&a2, &p).index, 0);
    }

    #[test]
    fn split_examples() {
        let a1 = RootSystem::build("A1").unwrap();
        let s = split_lattice(&a1, &[1], SplitMode::SpanSide).unwrap();
        assert_eq!(s.part.rank(), 1);
        assert_eq!(s.complement.rank(), 0);
        let a2 = RootSystem::build("A2").unwrap();
        let s = split_lattice(&a2, &[1], SplitMode::SpanSide).unwrap();
        assert_eq!(s.complement.rank(), 1);
        let alpha1 = &a2.simple_roots[0];
        assert!(a2.inner(&s.complement.basis[0], alpha1).is_zero());
        assert_eq!(s.change_of_basis_det.abs(), 1);
    }
}
