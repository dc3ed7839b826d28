//! Structural invariants, exhaustive where cheap and randomized otherwise.

use lielab_core::alcove::{self, AlcovePoint};
use lielab_core::analysis::fit_slope;
use lielab_core::arith::{self, expsum, farey, IntegralQuadraticForm};
use lielab_core::charkit;
use lielab_core::lattice::{self, SplitMode};
use lielab_core::rational::{is_integer, q, qmat_from_ints, qmat_inverse, qvec_mat};
use lielab_core::specverify::{expand_root_product, SparsePolynomial};
use lielab_core::weyl::weyl_group_elements;
use lielab_core::{CartanType, RootSystem};
use proptest::prelude::*;

const RANK2: [&str; 3] = ["A2", "B2", "G2"];
const SMALL: [&str; 8] = ["A1", "A2", "B2", "G2", "A3", "B3", "C3", "D4"];

fn systems_up_to(r: usize) -> Vec<RootSystem> {
    CartanType::all_up_to(r).into_iter().map(|t| RootSystem::from_types(&[t])).collect()
}

/// ⟨β, α_j^∨⟩ from base coefficients of β.
fn coroot_pairing(rs: &RootSystem, beta: &[i64], j: usize) -> i64 {
    beta.iter().enumerate().map(|(i, b)| b * rs.datum.cartan[i][j]).sum()
}

#[test]
fn weyl_signs_balance() {
    for rs in systems_up_to(4) {
        let w = weyl_group_elements(&rs).unwrap();
        assert_eq!(w.len() as u128, rs.weyl_order(), "{}", rs.label);
        assert_eq!(w.iter().map(|x| x.det).sum::<i64>(), 0, "{}", rs.label);
    }
}

#[test]
fn simple_reflections_permute_other_positive_roots() {
    for rs in systems_up_to(5) {
        let pos = &rs.datum.positive;
        for j in 0..rs.rank {
            let mut seen = vec![false; pos.len()];
            for beta in pos {
                let is_simple_j = beta.iter().enumerate().all(|(i, &c)| c == i64::from(i == j));
                if is_simple_j {
                    continue;
                }
                let k = coroot_pairing(&rs, beta, j);
                let mut img = beta.clone();
                img[j] -= k;
                let idx = rs.datum.root_index(&img).unwrap_or_else(|| panic!("{}: s_{j} {beta:?} not positive", rs.label));
                assert!(!seen[idx]);
                seen[idx] = true;
            }
            assert_eq!(seen.iter().filter(|&&x| x).count(), pos.len() - 1);
        }
    }
}

#[test]
fn weyl_vector_pairs_to_one() {
    for rs in systems_up_to(8) {
        for a in &rs.simple_roots {
            assert_eq!(q(2) * rs.inner(&rs.weyl_vector, a) / rs.inner(a, a), q(1), "{}", rs.label);
        }
    }
}

#[test]
fn parabolic_subsystems_are_closed() {
    for rs in systems_up_to(4) {
        let r = rs.rank;
        for mask in 1u32..(1 << (r + 1)) - 1 {
            let j: Vec<usize> = (0..=r).filter(|k| mask >> k & 1 == 1).collect();
            let par = rs.parabolic_subsystem(&j).unwrap();
            let mut roots: Vec<Vec<i64>> = Vec::new();
            for &i in &par.positive {
                let a = rs.datum.positive[i].clone();
                roots.push(a.iter().map(|x| -x).collect());
                roots.push(a);
            }
            for a in &roots {
                for b in &roots {
                    let s: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                    if let Some((idx, _)) = rs.datum.signed_root_index(&s) {
                        assert!(par.contains_root(idx), "{} J={j:?}: {a:?}+{b:?}", rs.label);
                    }
                }
            }
        }
    }
}

#[test]
fn root_products_have_nonnegative_coefficients() {
    for rs in systems_up_to(4) {
        let p: SparsePolynomial = expand_root_product(&rs, &[], 10_000_000).unwrap();
        assert!(p.terms.values().all(|&c| c >= 0), "{}", rs.label);
        assert_eq!(p.degree(), Some(rs.num_positive() as u32));
    }
}

fn labels(r: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-12i64..=12, r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weight_pairings_are_multiples_of_d(k in 0usize..SMALL.len(), a in labels(4), b in labels(4)) {
        let rs = RootSystem::build(SMALL[k]).unwrap();
        let (a, b) = (&a[..rs.rank], &b[..rs.rank]);
        let d = lattice::rationality_constant(&rs);
        prop_assert!(is_integer(&(rs.labels_inner(a, b) / d)));
    }

    #[test]
    fn lattice_split_recovers_weights(k in 0usize..SMALL.len(), mask in 1u32..15, mu in labels(4), perp in any::<bool>()) {
        let rs = RootSystem::build(SMALL[k]).unwrap();
        let j: Vec<usize> = (1..=rs.rank).filter(|x| mask >> (x - 1) & 1 == 1).collect();
        prop_assume!(!j.is_empty());
        let mode = if perp { SplitMode::PerpSide } else { SplitMode::SpanSide };
        let s = lattice::split_lattice(&rs, &j, mode).unwrap();
        let basis: Vec<Vec<i64>> = s.part_labels.iter().chain(&s.complement_labels).cloned().collect();
        prop_assert_eq!(basis.len(), rs.rank);
        let inv = qmat_inverse(&qmat_from_ints(&basis)).unwrap();
        let mu_q: Vec<_> = mu[..rs.rank].iter().map(|&x| q(x)).collect();
        let coeffs = qvec_mat(&mu_q, &inv);
        prop_assert!(coeffs.iter().all(is_integer), "{:?}", coeffs);
    }

    #[test]
    fn projection_is_idempotent_and_self_adjoint(k in 0usize..SMALL.len(), mask in 1u32..15, a in labels(4), b in labels(4)) {
        let rs = RootSystem::build(SMALL[k]).unwrap();
        let j: Vec<usize> = (1..=rs.rank).filter(|x| mask >> (x - 1) & 1 == 1).collect();
        prop_assume!(!j.is_empty() && j.len() < rs.rank + 1);
        let mu = rs.labels_to_ambient(&a[..rs.rank]);
        let nu = rs.labels_to_ambient(&b[..rs.rank]);
        let pm = lattice::project_onto_vj(&rs, &j, &mu).unwrap();
        prop_assert_eq!(&lattice::project_onto_vj(&rs, &j, &pm).unwrap(), &pm);
        let pn = lattice::project_onto_vj(&rs, &j, &nu).unwrap();
        prop_assert_eq!(rs.inner(&pm, &nu), rs.inner(&mu, &pn));
    }

    #[test]
    fn exactly_one_big_cell_claims_a_point(k in 0usize..RANK2.len(), seed in any::<u64>()) {
        let rs = RootSystem::build(RANK2[k]).unwrap();
        let mut r = lielab_core::rng::stream(&[seed]);
        let p = alcove::uniform_point(&rs, &mut r);
        let owners = (0..=rs.rank)
            .filter(|&omit| {
                let i: Vec<usize> = (0..=rs.rank).filter(|&x| x != omit).collect();
                alcove::barycentric_cell_membership(&rs, &p, &i)
            })
            .count();
        prop_assert_eq!(owners, 1);
        let cell = alcove::classify(&rs, &p, 64).unwrap();
        prop_assert!(cell.j.iter().all(|x| cell.i.contains(x)));
    }

    #[test]
    fn delta_factorizes_on_cells(k in 0usize..RANK2.len(), which in 0usize..12, seed in any::<u64>()) {
        let rs = RootSystem::build(RANK2[k]).unwrap();
        let cells = alcove::all_cells(&rs, alcove::n_threshold(&rs));
        let cell = &cells[which % cells.len()];
        let (pts, _) = alcove::sample_cell(&rs, cell, 4, seed).unwrap();
        for p in &pts {
            let f = charkit::delta_factors(&rs, cell, p).unwrap();
            let prod = f.delta_i * f.delta_ij * f.delta_j;
            prop_assert!((prod - f.delta).norm() <= 1e-9 * f.delta.norm().max(1e-300));
        }
    }

    #[test]
    fn characters_match_oracle(k in 0usize..RANK2.len(), mu in prop::collection::vec(1i64..8, 2), seed in any::<u64>()) {
        let rs = RootSystem::build(RANK2[k]).unwrap();
        let mut r = lielab_core::rng::stream(&[seed]);
        let p = alcove::uniform_point(&rs, &mut r);
        let v = charkit::character(&rs, &mu, &p, None).unwrap().value;
        let o = charkit::freudenthal_character_oracle(&rs, &mu, &p).unwrap();
        prop_assert!((v - o).norm() <= 1e-8 * o.norm().max(1.0), "{} vs {}", v, o);
    }

    #[test]
    fn character_is_weyl_antisymmetric_in_the_numerator(k in 0usize..RANK2.len(), mu in prop::collection::vec(1i64..8, 2), theta in prop::collection::vec(0.01f64..0.3, 2)) {
        // Σ_w det w e((wμ, h)) picks up det s when μ is replaced by sμ
        let rs = RootSystem::build(RANK2[k]).unwrap();
        let sys = charkit::System::get(&rs.datum.gram).unwrap();
        let z = sys.dual(&theta);
        let alt = |l: &[i64]| -> num_complex::Complex64 {
            sys.weyl
                .iter()
                .map(|w| {
                    let x: f64 = w.apply(l).iter().zip(&z).map(|(a, b)| *a as f64 * b).sum();
                    num_complex::Complex64::from_polar(w.det as f64, 2.0 * std::f64::consts::PI * x)
                })
                .sum()
        };
        let base = alt(&mu);
        for s in &sys.weyl {
            let other = alt(&s.apply(&mu)) * s.det as f64;
            prop_assert!((other - base).norm() < 1e-9 * (1.0 + base.norm()));
        }
        let p = AlcovePoint::from_theta(&rs, &theta);
        let chi = charkit::character(&rs, &mu, &p, None).unwrap().value;
        let rho = vec![1i64; rs.rank];
        prop_assert!((chi * alt(&rho) - base).norm() < 1e-8 * (1.0 + base.norm()));
    }

    #[test]
    fn farey_dissections_partition(n in 1i64..200) {
        let arcs = farey::farey_dissection(n);
        prop_assert!(farey::check_partition(&arcs));
        prop_assert!(farey::check_half_lengths(&arcs, n));
    }

    #[test]
    fn kloosterman_symmetries(qi in 0usize..8, m in 1i64..50, n in 0i64..50) {
        let qq = [3i64, 5, 7, 11, 13, 17, 19, 23][qi];
        let k = expsum::kloosterman(m, n, qq);
        prop_assert!(k.im.abs() < 1e-9);
        prop_assert!((k - expsum::kloosterman(n, m, qq)).norm() < 1e-9);
        if m % qq != 0 {
            prop_assert!((k - expsum::kloosterman(1, m * n, qq)).norm() < 1e-9);
        }
    }

    #[test]
    fn gauss_sums_have_square_root_size(qi in 0usize..8, a in 1i64..100) {
        let qq = [3i64, 5, 7, 11, 13, 17, 19, 23][qi];
        prop_assume!(a % qq != 0);
        let form = IntegralQuadraticForm::new(vec![vec![1]]).unwrap();
        let s = arith::gauss_sum(&form, a, &[0], qq).unwrap();
        prop_assert!((s.norm() * (qq as f64).sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slope_fit_recovers_power_laws(e in -4.0f64..4.0, c in 0.1f64..100.0) {
        let rows: Vec<(f64, f64)> = [16.0, 32.0, 64.0, 128.0, 256.0].iter().map(|&n: &f64| (n, c * n.powf(e))).collect();
        let f = fit_slope(&rows).unwrap();
        prop_assert!((f.slope - e).abs() < 1e-9);
        prop_assert!((f.intercept - c.ln()).abs() < 1e-8);
    }
}
