//! The acceptance battery: one verdict per criterion, with timings.

use std::time::Instant;

use num_integer::Integer;
use rand::Rng;
use serde::Serialize;

use crate::alcove::{self, AlcovePoint};
use crate::analysis::{self, Arc, LpScanConfig, MuFamily};
use crate::arith::{self, count, expsum, farey, IntegralQuadraticForm};
use crate::charkit;
use crate::error::Result;
use crate::rng;
use crate::rootsys::{CartanType, RootSystem};
use crate::specverify;

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub title: String,
    pub pass: bool,
    pub seconds: f64,
    pub details: Vec<String>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {:<44} ({:.1}s)",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.title,
            self.seconds
        )
    }
}

pub const TITLES: [&str; 10] = [
    "subsystem inequality, rank <= 8",
    "exponent tuples, rank <= 8",
    "inverse-delta slopes on cells",
    "character L^p slopes",
    "kernel major-arc slopes",
    "kernel structural identities",
    "arithmetic suite",
    "representation counts",
    "character engine vs oracle",
    "class-function Strichartz slope",
];

pub fn run_acceptance(seed: u64) -> Result<Vec<CriterionResult>> {
    (1..=10).map(|id| run_criterion(id, seed)).collect()
}

pub fn run_criterion(id: u32, seed: u64) -> Result<CriterionResult> {
    let start = Instant::now();
    let (pass, details) = match id {
        1 => c1()?,
        2 => c2()?,
        3 => c3(seed)?,
        4 => c4(seed)?,
        5 => c5()?,
        6 => c6(seed)?,
        7 => c7(seed)?,
        8 => c8()?,
        9 => c9(seed)?,
        10 => c10()?,
        _ => return Err(crate::Error::Config(format!("no acceptance criterion {id}"))),
    };
    Ok(CriterionResult { id, title: TITLES[id as usize - 1].into(), pass, seconds: start.elapsed().as_secs_f64(), details })
}

type Verdict = Result<(bool, Vec<String>)>;

fn c1() -> Verdict {
    let t = Instant::now();
    let reports = specverify::verify_subsystem_all(8)?;
    let mut ok = true;
    let mut d = Vec::new();
    for r in &reports {
        ok &= r.pass;
        d.push(format!("{}: {} subsets, min slack {}, pass {}", r.type_label, r.checked, r.min_slack, r.pass));
    }
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    d.push(format!("runtime {secs:.2}s (limit 60s)"));
    Ok((ok, d))
}

fn c2() -> Verdict {
    let t = Instant::now();
    let mut ok = true;
    let mut d = Vec::new();
    for ct in CartanType::all_up_to(8) {
        let rs = RootSystem::from_types(&[ct]);
        match specverify::find_exponent_tuple(&rs) {
            Ok(e) => {
                let good = e.min_coefficient.map_or(true, |c| c >= 1);
                ok &= good;
                d.push(format!("{}: p = {:?}, {:?}, min coefficient {:?}", rs.label, e.p, e.mode, e.min_coefficient));
            }
            Err(e) => {
                ok = false;
                d.push(format!("{}: {e}", rs.label));
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 600.0;
    d.push(format!("runtime {secs:.2}s (limit 600s)"));
    Ok((ok, d))
}

fn c3(seed: u64) -> Verdict {
    let ns: Vec<u32> = vec![16, 32, 64, 128, 256, 512, 1024];
    let mut ok = true;
    let mut d = Vec::new();
    let a1 = RootSystem::build("A1")?;
    for cell in alcove::all_cells(&a1, 16) {
        let cfg = LpScanConfig { p: 2.0, n_values: ns.clone(), samples_per_cell: 0, seed, tolerance: Some(0.1) };
        let res = analysis::lp_inv_delta_scan(&a1, &cell.i, &cell.j, &cfg)?;
        ok &= res.pass;
        d.push(scan_line(&res));
    }
    for label in ["A2", "B2"] {
        let rs = RootSystem::build(label)?;
        for cell in alcove::all_cells(&rs, 16) {
            let cfg = LpScanConfig { p: 2.0, n_values: ns.clone(), samples_per_cell: 1_000_000, seed, tolerance: Some(0.15) };
            let res = analysis::lp_inv_delta_scan(&rs, &cell.i, &cell.j, &cfg)?;
            ok &= res.pass;
            d.push(scan_line(&res));
        }
    }
    Ok((ok, d))
}

fn scan_line(res: &analysis::ScanResult) -> String {
    format!(
        "{} I={:?} J={:?} p={}: slope {:.4} ± {:.4}, predicted {:.4}, {}",
        res.type_label,
        res.i,
        res.j,
        res.p,
        res.fitted_slope,
        res.slope_se,
        res.predicted_exponent,
        if res.pass { "pass" } else { "FAIL" }
    )
}

fn c4(seed: u64) -> Verdict {
    let a1 = RootSystem::build("A1")?;
    let a2 = RootSystem::build("A2")?;
    let ns1: Vec<u32> = vec![16, 32, 64, 128, 256, 512, 1024];
    let mut ok = true;
    let mut d = Vec::new();
    for (p, tol) in [(6.0, 0.05), (2.0, 0.03)] {
        let cfg = LpScanConfig { p, n_values: ns1.clone(), samples_per_cell: 0, seed, tolerance: Some(tol) };
        let res = analysis::character_lp_scan(&a1, MuFamily::RhoMultiple, &cfg)?;
        ok &= res.pass;
        d.push(scan_line(&res));
    }
    let cfg = LpScanConfig { p: 8.0, n_values: vec![16, 32, 64, 128, 256], samples_per_cell: 40_000, seed, tolerance: Some(0.15) };
    let res = analysis::character_lp_scan(&a2, MuFamily::Regular, &cfg)?;
    ok &= res.pass;
    d.push(scan_line(&res));
    Ok((ok, d))
}

fn c5() -> Verdict {
    let a1 = RootSystem::build("A1")?;
    let a2 = RootSystem::build("A2")?;
    let mut ok = true;
    let mut d = Vec::new();
    let cfg = LpScanConfig { p: 4.0, n_values: vec![16, 32, 64, 128, 256, 512, 1024], samples_per_cell: 0, seed: 0, tolerance: Some(0.1) };
    let res = analysis::kernel_lp_majorarc_scan(&a1, &Arc::rational(0, 1), &cfg)?;
    ok &= res.pass;
    d.push(scan_line(&res));
    for row in analysis::q_scaling_check(&a1, 256, 4.0, &[1, 2, 3, 5])? {
        let good = (0.5..=2.0).contains(&row.normalized);
        ok &= good;
        d.push(format!("A1 q={}: norm {:.6e}, (norm_q/norm_1)·q^(1/2) = {:.4}", row.q, row.norm, row.normalized));
    }
    let cfg = LpScanConfig { p: 4.0, n_values: vec![8, 16, 32, 64, 128], samples_per_cell: 0, seed: 0, tolerance: Some(0.2) };
    let res = analysis::kernel_lp_majorarc_scan(&a2, &Arc::rational(0, 1), &cfg)?;
    ok &= res.pass;
    d.push(scan_line(&res));
    Ok((ok, d))
}

fn c6(seed: u64) -> Verdict {
    let mut ok = true;
    let mut d = Vec::new();
    for label in ["A1", "A2"] {
        let rs = RootSystem::build(label)?;
        let cn = alcove::n_threshold(&rs);
        let cells = alcove::all_cells(&rs, cn);
        let tp = analysis::kernel::period(&rs);
        let mut r = rng::stream(&[seed, rng::str_key("c6"), rng::str_key(label)]);
        let mut worst = 0.0f64;
        let mut done = 0;
        while done < 100 {
            let cell = &cells[r.gen_range(0..cells.len())];
            let Ok((pts, _)) = alcove::sample_cell(&rs, cell, 1, r.gen()) else { continue };
            let c = analysis::kernel_cell_formula_check(&rs, cell, 16, tp * r.gen::<f64>(), &pts[0])?;
            worst = worst.max(c.residual);
            done += 1;
        }
        ok &= worst <= 1e-7;
        d.push(format!("{label}: cell-formula residual max {worst:.3e} over 100 (cell, t, H) (limit 1e-7)"));
        let per = analysis::periodicity_check(&rs, 16, 100, seed)?;
        ok &= per <= 1e-9;
        d.push(format!("{label}: periodicity residual max {per:.3e} (limit 1e-9)"));
        for row in analysis::kernel_l2_invariance(&rs, 8, &[0.0, 0.1, 0.25, 0.7], 200_000, seed)? {
            ok &= row.z.abs() <= 3.0;
            d.push(format!(
                "{label}: t/T = {}: L2² estimate {:.6} ± {:.6} vs exact {:.6} (z = {:.2})",
                row.t_fraction, row.estimate, row.se, row.exact, row.z
            ));
        }
    }
    Ok((ok, d))
}

fn c7(seed: u64) -> Verdict {
    let t = Instant::now();
    let mut ok = true;
    let mut d = Vec::new();
    let mut farey_ok = true;
    for n in 1..=512 {
        let arcs = farey::farey_dissection(n);
        farey_ok &= farey::check_partition(&arcs) && farey::check_half_lengths(&arcs, n);
    }
    ok &= farey_ok;
    d.push(format!("Farey dissections exact for every order <= 512: {farey_ok}"));
    let w = expsum::weil_bound_check(199);
    ok &= w.violations == 0;
    d.push(format!(
        "Weil/Salie bounds over {} primes <= 199, {} pairs: max ratios {:.4} / {:.4}, violations {}",
        w.primes, w.pairs, w.kloosterman_max_ratio, w.salie_max_ratio, w.violations
    ));
    let forms = [
        ("x^2", IntegralQuadraticForm::new(vec![vec![1]])?),
        ("A2 weight form", IntegralQuadraticForm::new(vec![vec![2, 1], vec![1, 2]])?),
    ];
    let primes: Vec<i64> = (3..=97).filter(|&q| arith::is_prime(q as u64)).collect();
    for (name, f) in &forms {
        let det = if f.rank() == 1 { f.a[0][0] } else { f.a[0][0] * f.a[1][1] - f.a[0][1] * f.a[1][0] };
        let mut worst = 0.0f64;
        let mut used = 0;
        for &q in &primes {
            if det % q == 0 {
                continue;
            }
            used += 1;
            let zero = vec![0; f.rank()];
            let s1 = arith::gauss_sum(f, 1, &zero, q)?;
            for a in 1..q {
                let sa = arith::gauss_sum(f, a, &zero, q)?;
                worst = worst.max((sa - s1 * (expsum::jacobi(a, q) as f64).powi(f.rank() as i32)).norm());
            }
        }
        ok &= worst < 1e-12;
        d.push(format!("Legendre identity, {name}: {used} odd primes <= 97 coprime to det, max residual {worst:.2e}"));
    }
    let f = &forms[1].1;
    let mut r = rng::stream(&[seed, rng::str_key("mult")]);
    let (mut worst_t, mut worst_p) = (0.0f64, 0.0f64);
    let mut pairs = 0;
    while pairs < 200 {
        let q1: i64 = r.gen_range(2..=13);
        let q2: i64 = r.gen_range(2..=13);
        if q1.gcd(&q2) != 1 {
            continue;
        }
        let b: Vec<i64> = (0..2).map(|_| r.gen_range(0..20)).collect();
        let m: Vec<i64> = (0..2).map(|_| r.gen_range(0..20)).collect();
        let n0 = r.gen_range(0..20);
        worst_t = worst_t.max(expsum::check_multiplicativity(f, &b, &m, n0, q1, q2)?.twisted_residual);
        worst_p = worst_p.max(expsum::check_multiplicativity(f, &b, &[0, 0], n0, q1, q2)?.plain_residual);
        pairs += 1;
    }
    ok &= worst_t < 1e-10 && worst_p < 1e-10;
    d.push(format!("S multiplicativity, 200 coprime pairs: twisted max {worst_t:.2e}, m = 0 plain max {worst_p:.2e}"));
    let s = arith::gauss_sum(&forms[0].1, 1, &[0], 3)?;
    let dev = (s.norm() - 3f64.powf(-0.5)).abs();
    ok &= dev < 1e-12;
    d.push(format!("|S(1,0;3)| - 3^(-1/2) = {dev:.2e}"));
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 600.0;
    d.push(format!("runtime {secs:.2}s (limit 600s)"));
    Ok((ok, d))
}

fn c8() -> Verdict {
    let sq = IntegralQuadraticForm::new(vec![vec![1, 0], vec![0, 1]])?;
    let n25 = count::count_representations(&sq, 25, 10);
    let a2 = IntegralQuadraticForm::new(vec![vec![2, 1], vec![1, 2]])?;
    let g = count::growth_fit(&count::representation_histogram(&a2, 10_000));
    let ok = n25 == 12 && g.envelope_slope < 0.15;
    Ok((
        ok,
        vec![
            format!("#{{x^2 + y^2 = 25}} = {n25}"),
            format!(
                "A2 form, m <= 10^4: envelope slope {:.4} (criterion < 0.15), OLS slope {:.4}, block-mean slope {:.4}, max r(m)/m^(1/4) = {:.3}",
                g.envelope_slope, g.ols_slope, g.block_mean_slope, g.constant_quarter
            ),
        ],
    ))
}

fn c9(seed: u64) -> Verdict {
    let mut ok = true;
    let mut d = Vec::new();
    for label in ["A1", "A2", "B2", "G2"] {
        let rs = RootSystem::build(label)?;
        let mut r = rng::stream(&[seed, rng::str_key("c9"), rng::str_key(label)]);
        let mus: Vec<Vec<i64>> = (0..20).map(|_| (0..rs.rank).map(|_| r.gen_range(1..=9)).collect()).collect();
        let mut worst = 0.0f64;
        let mut near = 0;
        for k in 0..10_000 {
            let p = if k % 4 == 0 {
                // a vertex or wall neighbourhood down to min t_j = 1e-7
                let e = 10f64.powf(-r.gen_range(1.0..7.0));
                let mut t: Vec<f64> = (0..=rs.rank).map(|_| r.gen::<f64>()).collect();
                let j = r.gen_range(0..=rs.rank);
                t[j] = 0.0;
                let s: f64 = t.iter().enumerate().map(|(i, x)| x * rs.mark(i) as f64).sum();
                let mut t: Vec<f64> = t.iter().map(|x| x / s * (1.0 - e * rs.mark(j) as f64)).collect();
                t[j] = e;
                if k % 8 == 0 {
                    t[j] = 1e-7;
                    let s: f64 = t.iter().enumerate().filter(|&(i, _)| i != j).map(|(i, x)| x * rs.mark(i) as f64).sum();
                    let scale = (1.0 - 1e-7 * rs.mark(j) as f64) / s;
                    for (i, x) in t.iter_mut().enumerate() {
                        if i != j {
                            *x *= scale;
                        }
                    }
                }
                near += 1;
                AlcovePoint::from_t(&rs, &t)?
            } else {
                alcove::uniform_point(&rs, &mut r)
            };
            let mu = &mus[k % mus.len()];
            let v = charkit::character(&rs, mu, &p, None)?.value;
            let o = charkit::freudenthal_character_oracle(&rs, mu, &p)?;
            worst = worst.max((v - o).norm() / o.norm().max(1.0));
        }
        ok &= worst <= 1e-8;
        d.push(format!("{label}: 10^4 points ({near} near walls, min t_j down to 1e-7), max relative deviation {worst:.3e}"));
    }
    for label in ["A2", "B2", "G2"] {
        let rs = RootSystem::build(label)?;
        let vals: Vec<f64> = [64u32, 256, 1024].iter().map(|&n| charkit::charbound_ratio(&rs, n, 2000, seed)).collect::<Result<_>>()?;
        let spread = vals.iter().cloned().fold(0.0, f64::max) / vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let bounded = vals[2] <= 2.0 * vals[0].max(vals[1]) && vals.iter().all(|v| v.is_finite());
        ok &= bounded;
        d.push(format!("{label}: |chi^J| N^(-|Sigma_J^+|) max at N = 64/256/1024: {:.4} {:.4} {:.4} (spread {spread:.2})", vals[0], vals[1], vals[2]));
    }
    Ok((ok, d))
}

fn c10() -> Verdict {
    let a1 = RootSystem::build("A1")?;
    let cfg = LpScanConfig { p: 8.0, n_values: vec![8, 16, 32, 64], samples_per_cell: 0, seed: 0, tolerance: Some(0.15) };
    let res = analysis::class_strichartz_scan(&a1, &cfg)?;
    Ok((res.pass, vec![scan_line(&res)]))
}
