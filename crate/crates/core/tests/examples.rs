//! Worked examples checked against hand computations and closed forms.

use std::f64::consts::PI;

use lielab_core::alcove::{self, AlcovePoint, Cell};
use lielab_core::analysis::{self, Arc, KernelSpec, LpScanConfig, MuFamily};
use lielab_core::arith::{self, count, expsum, farey, oscillatory, IntegralQuadraticForm};
use lielab_core::charkit;
use lielab_core::lattice;
use lielab_core::rational::{q, qf, qmat_det, qmat_from_ints};
use lielab_core::specverify;
use lielab_core::weyl::weyl_group_elements;
use lielab_core::RootSystem;
use num_complex::Complex64 as C;

fn rs(label: &str) -> RootSystem {
    RootSystem::build(label).unwrap()
}

#[test]
fn root_counts_and_marks() {
    assert_eq!(rs("A2").num_positive(), 3);
    let g2 = rs("G2");
    assert_eq!(g2.num_positive(), 6);
    let mut m = g2.marks.clone();
    m.sort_unstable();
    assert_eq!(m, vec![2, 3]);
}

#[test]
fn weyl_group_orders_by_enumeration() {
    for (l, n) in [("A2", 6), ("B2", 8), ("G2", 12), ("F4", 1152)] {
        assert_eq!(weyl_group_elements(&rs(l)).unwrap().len(), n, "{l}");
    }
    assert_eq!(rs("E8").weyl_order(), 696_729_600);
}

#[test]
fn vertex_subsystems() {
    // the mark-2 vertex of B2 and the mark-3 vertex of G2
    let b2 = rs("B2");
    let labels: Vec<String> = [[0, 1], [0, 2], [1, 2]].iter().map(|j| b2.parabolic_subsystem(j).unwrap().label()).collect();
    assert_eq!(labels.iter().filter(|l| *l == "A1xA1").count(), 1);
    let g2 = rs("G2");
    let labels: Vec<String> = [[0, 1], [0, 2], [1, 2]].iter().map(|j| g2.parabolic_subsystem(j).unwrap().label()).collect();
    assert!(labels.contains(&"A2".to_string()));
}

#[test]
fn lattice_indices_are_cartan_determinants() {
    for (l, idx) in [("A1", 2), ("A2", 3), ("G2", 1), ("B3", 2), ("E6", 3), ("E8", 1)] {
        let r = rs(l);
        assert_eq!(lattice::lattice_index(&r), idx, "{l}");
        let det = qmat_det(&qmat_from_ints(&r.cartan_matrix));
        assert_eq!(det, q(idx), "{l}");
    }
}

#[test]
fn rationality_and_periods() {
    assert_eq!(lattice::rationality_constant(&rs("A1")), qf(1, 2));
    assert_eq!(lattice::rationality_constant(&rs("A2")), qf(1, 3));
    // A1: |μ_n|² - |ρ|² = (n² - 1)/2, whose values generate (1/2)Z, so T = 4π
    let a1 = rs("A1");
    let energies: Vec<_> = (1..20i64).map(|n| qf(n * n - 1, 2)).collect();
    assert!(energies.iter().all(|e| lattice::is_multiple_of(*e, lattice::spectral_gap(&a1))));
    assert_eq!(lattice::schrodinger_period(&a1), q(2));
    assert!((analysis::kernel::period(&a1) - 4.0 * PI).abs() < 1e-12);
}

#[test]
fn coset_counts() {
    let a1 = rs("A1");
    assert_eq!(lattice::coset_decomposition(&a1, &a1.parabolic_subsystem(&[1]).unwrap()).index, 2);
    let a2 = rs("A2");
    let c = lattice::coset_decomposition(&a2, &a2.parabolic_subsystem(&[1]).unwrap()).index;
    assert_eq!(2 % c, 0);
    let g2 = rs("G2");
    assert_eq!(lattice::coset_decomposition(&g2, &g2.parabolic_subsystem(&[1, 2]).unwrap()).index, 1);
}

#[test]
fn a2_projection_of_first_fundamental_weight() {
    let a2 = rs("A2");
    let w1 = a2.labels_to_ambient(&[1, 0]);
    let p = lattice::project_onto_vj(&a2, &[1], &w1).unwrap();
    assert_eq!(p, a2.simple_roots[0].scale(qf(1, 2)));
}

#[test]
fn weyl_dimensions() {
    let a2 = rs("A2");
    for a in 1..12i64 {
        for b in 1..12i64 {
            assert_eq!(charkit::weyl_dimension_labels(&a2, &[a, b]), q(a * b * (a + b) / 2));
        }
    }
    let a1 = rs("A1");
    for n in 1..30 {
        assert_eq!(charkit::weyl_dimension_labels(&a1, &[n]), q(n));
    }
}

#[test]
fn delta_at_a1_midpoint() {
    let a1 = rs("A1");
    let p = AlcovePoint::from_theta(&a1, &[0.5]);
    assert!((charkit::delta(&a1, &p).norm() - 2.0).abs() < 1e-12);
}

#[test]
fn rank_one_characters_are_dirichlet_kernels() {
    let a1 = rs("A1");
    for n in [1i64, 2, 7, 40, 301] {
        for t in [1e-9, 1e-5, 0.013, 0.25, 0.4999] {
            let p = AlcovePoint::from_theta(&a1, &[t]);
            let v = charkit::character(&a1, &[n], &p, None).unwrap().value;
            let exact = if t < 1e-6 { n as f64 } else { (n as f64 * PI * t).sin() / (PI * t).sin() };
            assert!((v.re - exact).abs() <= 1e-8 * exact.abs().max(1.0) && v.im.abs() < 1e-8, "n={n} t={t}: {v}");
        }
    }
}

#[test]
fn characters_stay_stable_near_vertices() {
    for l in ["A2", "B2", "G2"] {
        let r = rs(l);
        for k in 4..=8 {
            let e = 10f64.powi(-k);
            let mut t = vec![e; r.rank + 1];
            // all the weight sits on the node 0 vertex direction
            let rest: f64 = (1..=r.rank).map(|j| e * r.mark(j) as f64).sum();
            t[0] = 1.0 - rest;
            let p = AlcovePoint::from_t(&r, &t).unwrap();
            for mu in [[1i64, 1], [4, 3], [9, 2]] {
                let v = charkit::character(&r, &mu, &p, None).unwrap().value;
                let o = charkit::freudenthal_character_oracle(&r, &mu, &p).unwrap();
                assert!((v - o).norm() <= 1e-8 * o.norm().max(1.0), "{l} k={k} {mu:?}: {v} vs {o}");
            }
        }
    }
}

#[test]
fn oracle_at_identity_is_dimension() {
    let a2 = rs("A2");
    let p = AlcovePoint::from_theta(&a2, &[0.0, 0.0]);
    let o = charkit::freudenthal_character_oracle(&a2, &[2, 1], &p).unwrap();
    assert!((o - C::new(3.0, 0.0)).norm() < 1e-12);
}

#[test]
fn root_product_expansions() {
    let b2 = rs("B2");
    let p = specverify::expand_root_product(&b2, &[], 1_000_000).unwrap();
    let c = (p.coeff(&[3, 1]), p.coeff(&[2, 2]), p.coeff(&[1, 3]));
    assert!(c == (1, 3, 2) || c == (2, 3, 1), "{c:?}");
    let g2 = rs("G2");
    let p = specverify::expand_root_product(&g2, &[], 1_000_000).unwrap();
    let mut c = [p.coeff(&[5, 1]), p.coeff(&[1, 5])];
    c.sort_unstable();
    assert_eq!(c, [2, 18]);
}

#[test]
fn exponent_tuples_and_slacks() {
    for (l, t) in [("A2", vec![1, 2]), ("B2", vec![1, 3]), ("G2", vec![1, 5])] {
        assert_eq!(specverify::find_exponent_tuple(&rs(l)).unwrap().p, t);
    }
    let rep = specverify::verify_subsystem_inequality(&rs("A2")).unwrap();
    assert_eq!(rep.min_slack, "1/3");
    let rep = specverify::verify_subsystem_inequality(&rs("E8")).unwrap();
    assert!(rep.pass && rep.violations.is_empty());
    assert_eq!(rep.checked_finite, 254);
}

#[test]
fn predicted_exponents() {
    let a1 = rs("A1");
    let a2 = rs("A2");
    let cfg = |ns: Vec<u32>, p: f64| LpScanConfig { p, n_values: ns, samples_per_cell: 4000, seed: 5, tolerance: None };
    let s = analysis::lp_inv_delta_scan(&a1, &[1], &[], &cfg(vec![16, 32, 64], 2.0)).unwrap();
    assert_eq!(s.predicted_exponent, 0.5);
    let s = analysis::lp_inv_delta_scan(&a2, &[1, 2], &[], &cfg(vec![16, 32, 64], 2.0)).unwrap();
    assert_eq!(s.predicted_exponent, 2.0);
    let s = analysis::lp_inv_delta_scan(&a2, &[1, 2], &[1], &cfg(vec![16, 32, 64], 2.0)).unwrap();
    assert_eq!(s.predicted_exponent, 1.0);
    let s = analysis::character_lp_scan(&a1, MuFamily::RhoMultiple, &cfg(vec![16, 32, 64], 6.0)).unwrap();
    assert_eq!(s.predicted_exponent, 0.5);
    let s = analysis::kernel_lp_majorarc_scan(&a1, &Arc::rational(0, 1), &cfg(vec![16, 32, 64], 4.0)).unwrap();
    assert_eq!(s.predicted_exponent, 2.25);
    assert!(s.pass);
}

#[test]
fn a1_thin_cell_sampling() {
    let a1 = rs("A1");
    let cell = Cell::new(&a1, &[1], &[1], 16).unwrap();
    let (pts, rate) = alcove::sample_cell(&a1, &cell, 500, 3).unwrap();
    assert!(rate > 0.99);
    assert!(pts.iter().all(|p| p.t[1] > 0.0 && p.t[1] <= 1.0 / 16.0));
    let v = alcove::cell_volume(&a1, &cell, 20_000, 3);
    assert!((v.value - 1.0 / 16.0).abs() <= 3.0 * v.se + 1e-12, "{v:?}");
}

#[test]
fn a2_big_cells_have_equal_volume() {
    let a2 = rs("A2");
    let total = alcove::alcove_volume(&a2);
    let cells = alcove::all_cells(&a2, 16);
    let mut sum = 0.0;
    let mut var = 0.0;
    for omit in 0..=2usize {
        let mine: Vec<&Cell> = cells.iter().filter(|c| c.omitted() == omit).collect();
        let vols: Vec<_> = mine.iter().map(|c| alcove::cell_volume(&a2, c, 200_000, 11)).collect();
        let v: f64 = vols.iter().map(|x| x.value).sum();
        let se = vols.iter().map(|x| x.se * x.se).sum::<f64>().sqrt();
        assert!((v - total / 3.0).abs() <= 3.0 * se + 1e-12, "C_I omitting {omit}: {v} ± {se} vs {}", total / 3.0);
        sum += v;
        var += se * se;
    }
    assert!((sum - total).abs() <= 3.0 * var.sqrt() + 1e-12);
}

#[test]
fn kernel_period_and_lattice_form() {
    let a1 = rs("A1");
    let mut r = lielab_core::rng::stream(&[17]);
    let t = 4.0 * PI;
    for _ in 0..10 {
        let p = alcove::uniform_point(&a1, &mut r);
        let s = rand::Rng::gen::<f64>(&mut r) * t;
        let a = analysis::schrodinger_kernel(&a1, &KernelSpec { n: 16, t: s }, &p).unwrap();
        let b = analysis::schrodinger_kernel(&a1, &KernelSpec { n: 16, t: s + t }, &p).unwrap();
        let w = analysis::kernel_whole_lattice(&a1, &KernelSpec { n: 16, t: s }, &p).unwrap();
        assert!((a - b).norm() < 1e-9 * a.norm().max(1.0));
        assert!((a - w).norm() < 1e-9 * a.norm().max(1.0));
    }
}

#[test]
fn small_exponential_sums() {
    let f = IntegralQuadraticForm::new(vec![vec![1]]).unwrap();
    let s = arith::gauss_sum(&f, 1, &[0], 3).unwrap();
    // (1/3)(1 + 2 e(-1/3)) = -i/√3
    assert!((s - C::new(0.0, -1.0 / 3f64.sqrt())).norm() < 1e-12);
    let k = expsum::kloosterman(1, 1, 5);
    assert!((k.re - (2.0 + 2.0 * (4.0 * PI / 5.0).cos())).abs() < 1e-12);
    assert!(k.norm() <= 2.0 * 5f64.sqrt());
}

#[test]
fn farey_order_three() {
    assert_eq!(farey::farey_fractions(3), vec![(0, 1), (1, 3), (1, 2), (2, 3)]);
    let arcs = farey::farey_dissection(3);
    let half = arcs.iter().find(|a| (a.a, a.q) == (1, 2)).unwrap();
    assert_eq!((half.left, half.right), (qf(2, 5), qf(3, 5)));
    let b = farey::indicator_fourier_bound_check(256, 4, 16);
    assert!(b.ratio <= 4.0);
}

#[test]
fn representation_counts() {
    let f = IntegralQuadraticForm::new(vec![vec![1, 0], vec![0, 1]]).unwrap();
    assert_eq!(count::count_representations(&f, 25, 10), 12);
    // r_2(5^k) = 4(k + 1)
    for k in 0..5u32 {
        assert_eq!(count::count_representations(&f, 5i64.pow(k), 200), 4 * (k as u64 + 1));
    }
    let (worst, _) = count::divisor_sweep(1_000_000, 0.3);
    assert!(worst < 10.0);
}

#[test]
fn oscillatory_decay() {
    let f = IntegralQuadraticForm::new(vec![vec![1]]).unwrap();
    let rep = oscillatory::oscillatory_integral_check(&f, 256.0, 1).unwrap();
    assert!(rep.decay_ratio < 256f64.powi(-8), "{rep:?}");
    // γ = 1: |J| ~ γ^{-1/2} up to a factor 4
    let last = rep.grid.last().unwrap();
    assert!(last.2 > 0.25 && last.2 < 4.0, "{rep:?}");
}
