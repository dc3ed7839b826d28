use std::path::Path;

use lielab_core::alcove::{self, AlcovePoint, Cell};
use lielab_core::analysis::{self, Arc, LpScanConfig, MuFamily, ScanResult};
use lielab_core::arith::{self, expsum, farey, IntegralQuadraticForm};
use lielab_core::charkit;
use lielab_core::lattice::{self, SplitMode};
use lielab_core::rational::to_f64;
use lielab_core::specverify::{self, Mode};
use lielab_core::suite;
use lielab_core::RootSystem;
use serde::Serialize;
use serde_json::json;

use crate::emit::{self, Table};
use crate::manifest::RunManifest;
use crate::*;

/// Ok(true) on pass, Ok(false) on a failed verdict.
pub fn dispatch(cli: &Cli, argv: &[String]) -> Result<bool, CliError> {
    let ctx = Ctx { cli, argv };
    match &cli.command {
        Command::Rootsys(RootsysCmd::Dump { type_label }) => rootsys_dump(&ctx, type_label),
        Command::Lattice(LatticeCmd::Split { type_label, j }) => lattice_split(&ctx, type_label, j),
        Command::Alcove(AlcoveCmd::Cells { type_label, n, samples }) => alcove_cells(&ctx, type_label, *n, *samples),
        Command::Char(CharCmd::Eval { type_label, mu, t, oracle }) => char_eval(&ctx, type_label, mu, t, *oracle),
        Command::Verify(VerifyCmd::KeyLemma { type_label, mode }) => key_lemma(&ctx, type_label, *mode),
        Command::Verify(VerifyCmd::Subsystem { max_rank }) => subsystem(&ctx, *max_rank),
        Command::Scan(args) => scan(&ctx, args),
        Command::Arith(ArithCmd::Farey { order }) => arith_farey(&ctx, *order),
        Command::Arith(ArithCmd::Gauss { a_matrix, q, a, c }) => arith_gauss(&ctx, a_matrix, *q, *a, c.as_deref()),
        Command::Arith(ArithCmd::Kloosterman { q, exhaustive, m, n }) => arith_kloosterman(&ctx, *q, *exhaustive, *m, *n),
        Command::Suite(SuiteCmd::Acceptance { only }) => acceptance(&ctx, only.as_deref()),
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    argv: &'a [String],
}

impl Ctx<'_> {
    fn manifest(&self, type_label: Option<&str>) -> Result<RunManifest, CliError> {
        let config = json!({ "command": serde_json::to_value(&self.cli.command)?, "seed": self.cli.seed });
        Ok(RunManifest::new(self.argv, self.cli.seed, type_label.map(String::from), &config))
    }

    fn format(&self, default: Format) -> Format {
        self.cli.format.unwrap_or(default)
    }

    fn json_only(&self, what: &str) -> Result<(), CliError> {
        if self.cli.format == Some(Format::Csv) {
            return Err(CliError::Usage(format!("{what} only emits JSON")));
        }
        Ok(())
    }

    fn json<T: Serialize>(&self, type_label: Option<&str>, result: &T) -> Result<(), CliError> {
        let m = self.manifest(type_label)?;
        emit::write_out(self.cli.out.as_deref(), &emit::json_string(&m, result)?)
    }

    /// A table as CSV, or as JSON records.
    fn table(&self, type_label: Option<&str>, table: &Table, default: Format) -> Result<(), CliError> {
        let m = self.manifest(type_label)?;
        let text = match self.format(default) {
            Format::Csv => emit::csv_string(&m, table)?,
            Format::Json => emit::json_string(&m, &records(table))?,
        };
        emit::write_out(self.cli.out.as_deref(), &text)
    }
}

fn records(t: &Table) -> Vec<serde_json::Map<String, serde_json::Value>> {
    t.rows
        .iter()
        .map(|r| t.header.iter().zip(r).map(|(h, v)| (h.to_string(), cell_value(v))).collect())
        .collect()
}

fn cell_value(v: &str) -> serde_json::Value {
    if let Ok(i) = v.parse::<i64>() {
        return json!(i);
    }
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => json!(x),
        _ => json!(v),
    }
}

fn build(label: &str) -> Result<RootSystem, CliError> {
    Ok(RootSystem::build(label)?)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| CliError::Usage(format!("bad {what} entry '{x}' in '{s}'"))))
        .collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn rootsys_dump(ctx: &Ctx, label: &str) -> Result<bool, CliError> {
    ctx.json_only("rootsys dump")?;
    let rs = build(label)?;
    let strings = |v: &[lielab_core::WeightVector]| v.iter().map(|w| w.to_strings()).collect::<Vec<_>>();
    let out = json!({
        "label": rs.label,
        "rank": rs.rank,
        "ambient_dim": rs.ambient_dim,
        "metric": rs.metric.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "simple_roots": strings(&rs.simple_roots),
        "positive_roots": strings(&rs.positive_roots),
        "lowest_root": rs.lowest_root.to_strings(),
        "weyl_vector": rs.weyl_vector.to_strings(),
        "cartan_matrix": rs.cartan_matrix,
        "marks": rs.marks,
        "num_positive": rs.num_positive(),
        "group_dim": rs.group_dim(),
        "weyl_order": rs.weyl_order().to_string(),
    });
    ctx.json(Some(&rs.label), &out)?;
    Ok(true)
}

fn lattice_split(ctx: &Ctx, label: &str, j: &str) -> Result<bool, CliError> {
    ctx.json_only("lattice split")?;
    let rs = build(label)?;
    let j: Vec<usize> = parse_list(j, "J")?;
    let par = rs.parabolic_subsystem(&j)?;
    let out = json!({
        "type": rs.label,
        "J": j,
        "subsystem": par.label(),
        "span_side": lattice::split_with(&rs, &par, SplitMode::SpanSide),
        "perp_side": lattice::split_with(&rs, &par, SplitMode::PerpSide),
        "cosets": lattice::coset_decomposition(&rs, &par),
    });
    ctx.json(Some(&rs.label), &out)?;
    Ok(true)
}

fn alcove_cells(ctx: &Ctx, label: &str, n: u32, samples: u64) -> Result<bool, CliError> {
    let rs = build(label)?;
    rs.require_irreducible("alcove cells")?;
    let min = alcove::n_threshold(&rs);
    if n < min {
        return Err(CliError::Usage(format!("N = {n} is below the threshold {min} for {}", rs.label)));
    }
    let mut t = Table::new(vec!["cell_I", "cell_J", "volume_est", "volume_se", "acceptance_rate"]);
    for cell in alcove::all_cells(&rs, n) {
        let v = alcove::cell_volume(&rs, &cell, samples, ctx.cli.seed);
        t.rows.push(vec![join(&cell.i), join(&cell.j), v.value.to_string(), v.se.to_string(), v.acceptance_rate().to_string()]);
    }
    ctx.table(Some(&rs.label), &t, Format::Csv)?;
    Ok(true)
}

fn char_eval(ctx: &Ctx, label: &str, mu: &str, t: &str, oracle: bool) -> Result<bool, CliError> {
    let rs = build(label)?;
    let mu: Vec<i64> = parse_list(mu, "mu")?;
    let t: Vec<f64> = parse_list(t, "t")?;
    let p = if t.len() == rs.rank + 1 {
        AlcovePoint::from_t(&rs, &t)?
    } else if t.len() == rs.rank {
        AlcovePoint::from_theta(&rs, &t)
    } else {
        return Err(CliError::Usage(format!("--t needs {} or {} entries, got {}", rs.rank, rs.rank + 1, t.len())));
    };
    let v = charkit::character(&rs, &mu, &p, None)?;
    let dim = to_f64(&charkit::weyl_dimension_labels(&rs, &mu));
    let mut header = vec!["type", "mu", "t", "re", "im", "abs", "dimension", "method", "condition_estimate"];
    let mut row = vec![
        rs.label.clone(),
        join(&mu),
        join(&p.t),
        v.value.re.to_string(),
        v.value.im.to_string(),
        v.value.norm().to_string(),
        dim.to_string(),
        serde_json::to_value(v.method)?.as_str().unwrap_or_default().to_string(),
        v.condition_estimate.to_string(),
    ];
    if oracle {
        let o = charkit::freudenthal_character_oracle(&rs, &mu, &p)?;
        header.extend(["oracle_re", "oracle_im"]);
        row.extend([o.re.to_string(), o.im.to_string()]);
    }
    let mut table = Table::new(header);
    table.rows.push(row);
    ctx.table(Some(&rs.label), &table, Format::Csv)?;
    Ok(true)
}

fn key_lemma(ctx: &Ctx, label: &str, mode: Option<TupleMode>) -> Result<bool, CliError> {
    ctx.json_only("verify key-lemma")?;
    let rs = build(label)?;
    let res = match mode {
        None => specverify::find_exponent_tuple(&rs),
        Some(TupleMode::Expansion) => specverify::find_exponent_tuple_with(&rs, Mode::Expansion),
        Some(TupleMode::Counting) => specverify::find_exponent_tuple_with(&rs, Mode::Counting),
    };
    let (pass, out) = match res {
        Ok(t) => (true, json!({ "type": rs.label, "pass": true, "tuple": t })),
        Err(lielab_core::Error::Capability(e)) => return Err(CliError::Core(lielab_core::Error::Capability(e))),
        Err(e) => (false, json!({ "type": rs.label, "pass": false, "reason": e.to_string() })),
    };
    ctx.json(Some(&rs.label), &out)?;
    Ok(pass)
}

fn subsystem(ctx: &Ctx, max_rank: usize) -> Result<bool, CliError> {
    ctx.json_only("verify subsystem")?;
    let reports = specverify::verify_subsystem_all(max_rank)?;
    let pass = reports.iter().all(|r| r.pass);
    ctx.json(None, &json!({ "max_rank": max_rank, "pass": pass, "types": reports }))?;
    Ok(pass)
}

fn scan(ctx: &Ctx, a: &ScanArgs) -> Result<bool, CliError> {
    let rs = build(&a.type_label)?;
    if a.quantity != ScanKind::InvDelta && (a.i.is_some() || a.j.is_some()) {
        return Err(CliError::Usage("--I and --J only apply to inv-delta".into()));
    }
    let mut config = LpScanConfig::dyadic(a.p, a.n_min, a.n_max, a.samples, ctx.cli.seed).map_err(CliError::Core)?;
    config.tolerance = a.tol;
    let res = match a.quantity {
        ScanKind::InvDelta => {
            let i: Vec<usize> = parse_list(a.i.as_deref().ok_or_else(|| CliError::Usage("inv-delta needs --I".into()))?, "I")?;
            let j: Vec<usize> = parse_list(a.j.as_deref().unwrap_or(""), "J")?;
            // validates I and J
            Cell::new(&rs, &i, &j, a.n_min)?;
            analysis::lp_inv_delta_scan(&rs, &i, &j, &config)?
        }
        ScanKind::CharNorm => {
            let family = match a.family {
                Some(Family::Rho) => MuFamily::RhoMultiple,
                Some(Family::Regular) => MuFamily::Regular,
                None if rs.rank == 1 => MuFamily::RhoMultiple,
                None => MuFamily::Regular,
            };
            analysis::character_lp_scan(&rs, family, &config)?
        }
        ScanKind::Kernel => {
            let arc = Arc { a: a.a, q: a.q, gamma_coeff: a.gamma_coeff, gamma_exponent: a.gamma_exp };
            analysis::kernel_lp_majorarc_scan(&rs, &arc, &config)?
        }
        ScanKind::ClassStrichartz => analysis::class_strichartz_scan(&rs, &config)?,
    };
    emit_scan(ctx, &rs, &res, a.plot.as_deref())?;
    Ok(res.pass)
}

/// Scan rows as CSV plus a companion JSON verdict.
fn emit_scan(ctx: &Ctx, rs: &RootSystem, res: &ScanResult, plot: Option<&Path>) -> Result<(), CliError> {
    let m = ctx.manifest(Some(&rs.label))?;
    let mut t = Table::new(vec!["quantity", "type", "I", "J", "p", "N", "value", "se"]);
    for r in &res.rows {
        t.rows.push(vec![
            res.quantity.as_str().into(),
            res.type_label.clone(),
            join(&res.i),
            join(&res.j),
            res.p.to_string(),
            r.n.to_string(),
            r.value.to_string(),
            r.se.to_string(),
        ]);
    }
    let verdict = emit::json_string(&m, res)?;
    match (ctx.format(Format::Csv), ctx.cli.out.as_deref()) {
        (Format::Csv, Some(path)) => {
            emit::write_out(Some(path), &emit::csv_string(&m, &t)?)?;
            emit::write_out(Some(&emit::companion(path)), &verdict)?;
        }
        (Format::Csv, None) => {
            emit::write_out(None, &emit::csv_string(&m, &t)?)?;
            eprint!("{verdict}");
        }
        (Format::Json, out) => emit::write_out(out, &verdict)?,
    }
    if let Some(path) = plot {
        emit::emit_plotdata(res, path)?;
    }
    eprintln!(
        "{} {}: slope {:.4} ± {:.4}, predicted {:.4} ({:?}), {}",
        res.quantity.as_str(),
        res.type_label,
        res.fitted_slope,
        res.slope_se,
        res.predicted_exponent,
        res.mode,
        if res.pass { "pass" } else { "FAIL" }
    );
    Ok(())
}

fn arith_farey(ctx: &Ctx, order: i64) -> Result<bool, CliError> {
    if !(1..=100_000).contains(&order) {
        return Err(CliError::Usage(format!("order {order} out of range 1..=100000")));
    }
    let arcs = farey::farey_dissection(order);
    let partition = farey::check_partition(&arcs);
    let half = farey::check_half_lengths(&arcs, order);
    let pass = partition && half;
    match ctx.format(Format::Csv) {
        Format::Csv => {
            let mut t = Table::new(vec!["a", "q", "left", "right"]);
            for x in &arcs {
                t.rows.push(vec![x.a.to_string(), x.q.to_string(), x.left.to_string(), x.right.to_string()]);
            }
            ctx.table(None, &t, Format::Csv)?;
            eprintln!("{}", json!({ "order": order, "arcs": arcs.len(), "partition_exact": partition, "half_lengths": half }));
        }
        Format::Json => ctx.json(
            None,
            &json!({ "order": order, "partition_exact": partition, "half_lengths": half, "pass": pass, "arcs": arcs }),
        )?,
    }
    Ok(pass)
}

fn parse_matrix(s: &str) -> Result<Vec<Vec<i64>>, CliError> {
    s.split(';').map(|row| parse_list(row, "matrix")).collect()
}

fn arith_gauss(ctx: &Ctx, a_matrix: &str, q: i64, a: i64, c: Option<&str>) -> Result<bool, CliError> {
    let form = IntegralQuadraticForm::new(parse_matrix(a_matrix)?)?;
    let r = form.rank();
    let c: Vec<i64> = match c {
        Some(c) => parse_list(c, "c")?,
        None => vec![0; r],
    };
    if c.len() != r {
        return Err(CliError::Usage(format!("--c needs {r} entries")));
    }
    let s = arith::gauss_sum(&form, a, &c, q)?;
    let scaled = s.norm() * (q as f64).powf(r as f64 / 2.0);
    let mut t = Table::new(vec!["q", "a", "c", "re", "im", "abs", "abs_times_q_half_r"]);
    t.rows.push(vec![
        q.to_string(),
        a.to_string(),
        join(&c),
        s.re.to_string(),
        s.im.to_string(),
        s.norm().to_string(),
        scaled.to_string(),
    ]);
    ctx.table(None, &t, Format::Json)?;
    Ok(true)
}

fn arith_kloosterman(ctx: &Ctx, q: i64, exhaustive: bool, m: Option<i64>, n: Option<i64>) -> Result<bool, CliError> {
    if q < 3 || !arith::is_prime(q as u64) {
        return Err(CliError::Usage(format!("q = {q} must be an odd prime")));
    }
    let pairs: Vec<(i64, i64)> = if exhaustive {
        if m.is_some() || n.is_some() {
            return Err(CliError::Usage("--exhaustive excludes --m and --n".into()));
        }
        (0..q).flat_map(|m| (0..q).map(move |n| (m, n))).collect()
    } else {
        match (m, n) {
            (Some(m), Some(n)) => vec![(m, n)],
            _ => return Err(CliError::Usage("give --m and --n, or --exhaustive".into())),
        }
    };
    let sq = (q as f64).sqrt();
    let mut t = Table::new(vec!["q", "m", "n", "kloosterman_re", "kloosterman_im", "kloosterman_ratio", "salie_re", "salie_im", "salie_ratio"]);
    let mut pass = true;
    for (m, n) in pairs {
        let k = expsum::kloosterman(m, n, q);
        let s = expsum::salie(m, n, q);
        let g = num_gcd(num_gcd(m, n), q) as f64;
        let kr = k.norm() / (2.0 * g.sqrt() * sq);
        let sr = s.norm() / (2.0 * sq);
        pass &= kr <= 1.0 + 1e-9 && sr <= 1.0 + 1e-9;
        t.rows.push(vec![
            q.to_string(),
            m.to_string(),
            n.to_string(),
            k.re.to_string(),
            k.im.to_string(),
            kr.to_string(),
            s.re.to_string(),
            s.im.to_string(),
            sr.to_string(),
        ]);
    }
    ctx.table(None, &t, Format::Csv)?;
    Ok(pass)
}

fn num_gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn acceptance(ctx: &Ctx, only: Option<&str>) -> Result<bool, CliError> {
    ctx.json_only("suite acceptance")?;
    let ids: Vec<u32> = match only {
        Some(s) => parse_list(s, "criterion")?,
        None => (1..=10).collect(),
    };
    let mut results = Vec::new();
    for id in ids {
        let r = suite::run_criterion(id, ctx.cli.seed)?;
        eprintln!("{}", r.line());
        results.push(r);
    }
    let pass = results.iter().all(|r| r.pass);
    let passed = results.iter().filter(|r| r.pass).count();
    eprintln!("acceptance: {passed}/{} criteria pass", results.len());
    ctx.json(None, &json!({ "pass": pass, "passed": passed, "criteria": results }))?;
    Ok(pass)
}
