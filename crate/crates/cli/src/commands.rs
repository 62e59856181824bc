use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use metapop_core::compare::{asymptotic_data, compare_rows, validate_eps_list};
use metapop_core::correctors::{chain_residuals, corrector_set, source_sink_correctors};
use metapop_core::ess::{as1_gap, dimorphism_conditions};
use metapop_core::fd::{extract_numeric_moments, steady_state_solve_many, FdOptions, GridSolution, Init};
use metapop_core::hj::{default_grid, source_sink_u, u_profile, u_taylor, uniform_grid, UTaylor};
use metapop_core::model::{check_assumptions, parse_key_values, RegimeReport};
use metapop_core::moments::{moment_summary, MomentSummary};
use metapop_core::{solve, Ess, EssKind, EssSolution, ModelParams, Regime};

use crate::table::{Cell, Table};
use crate::{Cli, Command, Common, EpsArgs, FdArgs, GridArgs};

/// 0 on success, 3 for numerical failures, 2 for everything else
/// (bad input, unsupported regime, violated assumptions).
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<metapop_core::Error>() {
        Some(e) if e.is_numerical() => 3,
        _ => 2,
    }
}

/// Run one command; returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let stage = cli.command.name();
    let common = cli.command.common();
    let p = load_params(common).context("reading parameters")?;
    fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    let out = Output { dir: common.out.clone(), ext: common.format.ext(), written: Vec::new() };
    let result = match &cli.command {
        Command::Check(_) => check(&p, out),
        Command::Ess(_) => ess(&p, out),
        Command::Profile(g) => profile(&p, g, out),
        Command::Correctors(_) => correctors(&p, out),
        Command::Moments(e) => moments(&p, e, out),
        Command::Solve(f) => solve_fd(&p, f, out),
        Command::Compare(f) => compare(&p, f, out),
    };
    result.with_context(|| format!("stage `{stage}` failed"))
}

struct Output {
    dir: PathBuf,
    ext: &'static str,
    written: Vec<PathBuf>,
}

impl Output {
    fn emit(&mut self, stem: &str, table: &Table) -> Result<()> {
        let path = self.dir.join(format!("{stem}.{}", self.ext));
        table.write(&path)?;
        eprintln!("wrote {}", path.display());
        self.written.push(path);
        Ok(())
    }
}

pub fn load_params(common: &Common) -> Result<ModelParams> {
    let mut map = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_key_values(&text)?
        }
        None => Default::default(),
    };
    for kv in &common.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("--set expects KEY=VALUE, got `{kv}`"))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(ModelParams::from_map(&map)?)
}

fn require_valid(report: &RegimeReport) -> Result<()> {
    if report.regime == Regime::Invalid {
        let name = report.violated.as_deref().unwrap_or("params");
        return Err(metapop_core::Error::Regime(format!("{name} violated: {}", report.message)).into());
    }
    Ok(())
}

fn check(p: &ModelParams, mut out: Output) -> Result<Vec<PathBuf>> {
    let report = check_assumptions(p);
    let cond = dimorphism_conditions(p);
    let table = Table::record(vec![
        ("regime", report.regime.to_string().into()),
        ("violated", report.violated.clone().map_or(Cell::Empty, Cell::Text)),
        ("message", report.message.clone().into()),
        ("viability_margin", report.viability_margin.into()),
        ("as1_gap", as1_gap(p).into()),
        ("c1", cond.c1.into()),
        ("c2", cond.c2.into()),
        ("c3", cond.c3.into()),
        ("dimorphic", cond.all_strict().into()),
    ]);
    out.emit("check", &table)?;
    println!("regime: {} ({})", report.regime, report.message);
    require_valid(&report)?;
    Ok(out.written)
}

fn ess_fields(prefix: &str, ess: &Ess) -> Vec<(String, Cell)> {
    let (kind, z1, z2, w) = match ess.kind {
        EssKind::Monomorphic { z_star } => ("monomorphic", z_star, None, None),
        EssKind::Dimorphic { z_1, z_2, weights } => ("dimorphic", z_1, Some(z_2), Some(weights)),
    };
    let mut f: Vec<(String, Cell)> = vec![
        ("kind".into(), kind.into()),
        ("z1".into(), z1.into()),
        ("z2".into(), z2.into()),
        ("n1".into(), ess.n_star.n1.into()),
        ("n2".into(), ess.n_star.n2.into()),
        ("mu1".into(), ess.mu_star.mu1.into()),
        ("mu2".into(), ess.mu_star.mu2.into()),
        ("boundary_case".into(), ess.boundary_case.into()),
    ];
    // weights[k][i]: share of trait k in habitat i
    for (k, i) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        f.push((format!("w{}_{}", k + 1, i + 1), w.map(|w| w[k][i]).into()));
    }
    f.into_iter().map(|(k, v)| (format!("{prefix}{k}"), v)).collect()
}

fn ess(p: &ModelParams, mut out: Output) -> Result<Vec<PathBuf>> {
    require_valid(&check_assumptions(p))?;
    let (regime, fields) = match solve(p)? {
        EssSolution::TwoWay(e) => ("two-way", ess_fields("", &e)),
        EssSolution::SourceSink(ss) => {
            let mut f = ess_fields("patch1_", &ss.patch1);
            f.extend(ess_fields("patch2_", &ss.patch2));
            f.push(("con_dim_source_gap".into(), ss.con_dim_source_gap.into()));
            ("source-sink", f)
        }
    };
    let mut fields: Vec<(String, Cell)> = fields;
    fields.insert(0, ("regime".into(), regime.into()));
    let table = Table::record(fields.iter().map(|(k, v)| (k.as_str(), v.clone())).collect());
    out.emit("ess", &table)?;
    Ok(out.written)
}

fn grid_for(p: &ModelParams, half_width: Option<f64>, n_pts: usize) -> Result<Vec<f64>> {
    if half_width.is_none() && n_pts == 4001 {
        return Ok(default_grid(p));
    }
    let l = half_width.unwrap_or(p.theta + 3.0);
    if !(l > p.theta) || n_pts < 3 {
        bail!(metapop_core::Error::InvalidInput(format!(
            "grid must cover [-theta, theta] with at least 3 points (L = {l}, n = {n_pts})"
        )));
    }
    Ok(uniform_grid(-l, l, n_pts))
}

fn taylor_table(rows: &[(&str, UTaylor)]) -> Table {
    let mut t = Table::new(&["branch", "z_star", "a", "b", "c"]);
    for (name, u) in rows {
        t.push(vec![(*name).into(), u.z_star.into(), u.a.into(), u.b.into(), u.c.into()]);
    }
    t
}

fn profile(p: &ModelParams, g: &GridArgs, mut out: Output) -> Result<Vec<PathBuf>> {
    require_valid(&check_assumptions(p))?;
    let grid = grid_for(p, g.half_width, g.n_pts)?;
    match solve(p)? {
        EssSolution::TwoWay(ess) => {
            let prof = u_profile(&grid, &ess, p)?;
            let mut t = Table::new(&["z", "u"]);
            for (z, u) in prof.grid.iter().zip(&prof.u) {
                t.push(vec![(*z).into(), (*u).into()]);
            }
            out.emit("profile", &t)?;
            let names = ["z1", "z2"];
            let taylors = ess
                .support()
                .iter()
                .zip(names)
                .map(|(&z, name)| Ok((name, u_taylor(z, ess.n_star, p)?)))
                .collect::<Result<Vec<_>>>()?;
            out.emit("taylor", &taylor_table(&taylors))?;
        }
        EssSolution::SourceSink(ss) => {
            let su = source_sink_u(&grid, &ss, p)?;
            let mut t = Table::new(&["z", "u1", "u2_upper"]);
            for ((z, u1), u2) in grid.iter().zip(&su.u1.u).zip(&su.u2_upper) {
                t.push(vec![(*z).into(), (*u1).into(), (*u2).into()]);
            }
            out.emit("profile", &t)?;
            let mut t = Table::new(&["branch", "center", "coefficient", "lo", "hi"]);
            let parabolas = [("source", Some(su.near_source)), ("sink", su.near_sink)];
            for (name, par) in parabolas.iter().filter_map(|(n, q)| q.map(|q| (*n, q))) {
                t.push(vec![name.into(), par.center.into(), par.coefficient.into(), par.lo.into(), par.hi.into()]);
            }
            out.emit("parabolas", &t)?;
        }
    }
    Ok(out.written)
}

fn correctors(p: &ModelParams, mut out: Output) -> Result<Vec<PathBuf>> {
    require_valid(&check_assumptions(p))?;
    let (t, cs, residual) = match solve(p)? {
        EssSolution::TwoWay(ess) => {
            let z = ess.monomorphic_point().ok_or_else(|| {
                metapop_core::Error::InvalidInput("correctors are only available at a monomorphic ESS".into())
            })?;
            let t = u_taylor(z, ess.n_star, p)?;
            let cs = corrector_set(&ess, &t, p)?;
            let r = chain_residuals(&cs, &t, p).max_abs();
            (t, cs, Some(r))
        }
        EssSolution::SourceSink(ss) => {
            let cs = source_sink_correctors(&ss, p)?;
            (u_taylor(-p.theta, ss.patch2.n_star, p)?, cs, None)
        }
    };
    let mut fields: Vec<(String, Cell)> = vec![
        ("z_star".into(), cs.z_star.into()),
        ("n1".into(), cs.n_star.n1.into()),
        ("n2".into(), cs.n_star.n2.into()),
        ("a".into(), t.a.into()),
        ("b".into(), t.b.into()),
        ("c".into(), t.c.into()),
    ];
    for (name, v) in [("v_offset", cs.v_offset), ("d", cs.d), ("e", cs.e), ("f", cs.f), ("k", cs.k)] {
        fields.push((format!("{name}1"), v[0].into()));
        fields.push((format!("{name}2"), v[1].into()));
    }
    fields.extend([
        ("lambda1".into(), cs.lambda1.into()),
        ("lambda2".into(), cs.lambda2.into()),
        ("lambda3".into(), cs.lambda3.into()),
        ("g_gap".into(), cs.g_gap.into()),
        ("chain_residual".into(), residual.into()),
    ]);
    let table = Table::record(fields.iter().map(|(k, v)| (k.as_str(), v.clone())).collect());
    out.emit("correctors", &table)?;
    Ok(out.written)
}

fn eps_values(e: &EpsArgs, default: &[f64]) -> Result<Vec<f64>> {
    let list = match (&e.eps, &e.eps_list) {
        (Some(x), _) => vec![*x],
        (None, Some(l)) => l.clone(),
        (None, None) => default.to_vec(),
    };
    validate_eps_list(&list)?;
    Ok(list)
}

const MOMENT_COLUMNS: [&str; 7] = ["eps", "habitat", "source", "n", "mean", "variance", "skewness"];

fn push_moments(t: &mut Table, m: &MomentSummary, source: &str) {
    for i in 0..2 {
        t.push(vec![
            m.eps.into(),
            ((i + 1) as u8).into(),
            source.into(),
            m.n_eps[i].into(),
            m.mean[i].into(),
            m.variance[i].into(),
            m.skewness[i].into(),
        ]);
    }
}

fn moments(p: &ModelParams, e: &EpsArgs, mut out: Output) -> Result<Vec<PathBuf>> {
    require_valid(&check_assumptions(p))?;
    let eps = eps_values(e, &[0.05])?;
    let (t, cs) = asymptotic_data(p)?;
    let mut table = Table::new(&MOMENT_COLUMNS);
    for &x in &eps {
        push_moments(&mut table, &moment_summary(&t, &cs, x)?, "asymptotic");
    }
    out.emit("moments", &table)?;
    Ok(out.written)
}

fn parse_init(s: &str, p: &ModelParams) -> Result<Init> {
    let center = match s.trim() {
        "theta" => p.theta,
        "-theta" => -p.theta,
        other => other
            .parse::<f64>()
            .map_err(|_| metapop_core::Error::InvalidInput(format!("--init: cannot parse `{other}`")))?,
    };
    Ok(Init::Gaussian { center })
}

fn fd_solutions(p: &ModelParams, f: &FdArgs, eps: &[f64]) -> Result<Vec<GridSolution>> {
    let init = parse_init(&f.init, p)?;
    let opts: Vec<FdOptions> = eps
        .iter()
        .map(|&x| {
            let mut o = FdOptions::new(p, x)
                .with_init(init.clone())
                .with_grid(f.half_width.unwrap_or(p.theta + 3.0), f.n_pts);
            o.tol = f.tol;
            o.max_steps = f.max_steps;
            o
        })
        .collect();
    for o in &opts {
        o.validate(p)?;
    }
    let solutions = steady_state_solve_many(p, &opts).into_iter().collect::<metapop_core::Result<Vec<_>>>()?;
    for s in &solutions {
        eprintln!("eps = {}: {} steps, residual {:.3e}", s.eps, s.iterations, s.residual);
    }
    Ok(solutions)
}

fn solve_fd(p: &ModelParams, f: &FdArgs, mut out: Output) -> Result<Vec<PathBuf>> {
    require_valid(&check_assumptions(p))?;
    let eps = eps_values(&f.eps, &[0.05])?;
    let solutions = fd_solutions(p, f, &eps)?;
    let mut dens = Table::new(&["eps", "z", "n1", "n2"]);
    let mut summary = Table::new(&["eps", "big_n1", "big_n2", "residual", "iterations", "balance1", "balance2"]);
    let mut mom = Table::new(&MOMENT_COLUMNS);
    for s in &solutions {
        for k in 0..s.z.len() {
            dens.push(vec![s.eps.into(), s.z[k].into(), s.n1[k].into(), s.n2[k].into()]);
        }
        let b = s.balance(p);
        summary.push(vec![
            s.eps.into(),
            s.big_n.n1.into(),
            s.big_n.n2.into(),
            s.residual.into(),
            s.iterations.into(),
            b[0].into(),
            b[1].into(),
        ]);
        push_moments(&mut mom, &extract_numeric_moments(s), "fd");
    }
    out.emit("solution", &dens)?;
    out.emit("solve_summary", &summary)?;
    out.emit("fd_moments", &mom)?;
    Ok(out.written)
}

fn compare(p: &ModelParams, f: &FdArgs, mut out: Output) -> Result<Vec<PathBuf>> {
    require_valid(&check_assumptions(p))?;
    let eps = eps_values(&f.eps, &[0.1, 0.05, 0.025])?;
    let (t, cs) = asymptotic_data(p)?;
    let solutions = fd_solutions(p, f, &eps)?;
    let rows = compare_rows(&t, &cs, &solutions)?;
    let mut table = Table::new(&["eps", "habitat", "quantity", "fd", "asymptotic", "error", "ratio"]);
    for r in rows {
        table.push(vec![
            r.eps.into(),
            r.habitat.into(),
            r.quantity.name().into(),
            r.fd.into(),
            r.asymptotic.into(),
            r.error.into(),
            r.ratio.into(),
        ]);
    }
    out.emit("compare", &table)?;
    Ok(out.written)
}
