use rayon::prelude::*;

use super::{ExperimentConfig, Plot, ResultRow, ResultTable, RunOutput, Series};
use crate::analysis::square_function;
use crate::bumps::Profiles;
use crate::error::{Error, Result};
use crate::extremals::{
    d_lambda_tensor, deviation_bound, feasible_ns, kernel_1d, loglog_fit, make_bilinear_extremal,
    make_linear_extremal,
};
use crate::grid::{Grid1D, Grid2D};
use crate::norms::{d_lambda, lp_norm, luxemburg_functional, luxemburg_norm};
use crate::packet::shifted_square_norm_packets;
use crate::rough::{
    drf_decompose, fit_delta, generate, level_norm_table, level_split, mikhlin_check, orlicz_norm,
    project_vanishing, small_xi_slope, Dictionary, SphereFunction,
};

fn layout(cfg: &ExperimentConfig) -> Result<Grid1D> {
    Grid1D::new(cfg.grid.envelope as f64, cfg.grid.envelope)
}

/// Feasible `N`, recording the dropped ones.
fn feasible(cfg: &ExperimentConfig, table: &mut ResultTable) -> Result<Vec<u32>> {
    let lay = layout(cfg)?;
    let ns = feasible_ns(&cfg.family.n, cfg.family.c, &lay);
    for n in cfg.family.n.iter().filter(|n| !ns.contains(n)) {
        table.push(ResultRow::new(format!("N={n};c={}", cfg.family.c), "dropped (infeasible)", *n as f64));
    }
    if ns.is_empty() {
        return Err(Error::Infeasible(format!("no feasible N in {:?} at c = {}", cfg.family.n, cfg.family.c)));
    }
    Ok(ns)
}

fn log_plot(name: &str, title: &str, x: &str, y: &str, series: Vec<Series>) -> Plot {
    Plot { name: name.into(), title: title.into(), x_label: x.into(), y_label: y.into(), log_x: true, log_y: true, series }
}

/// Kernel window for `D_λ`: β has unit-scale decay, so a fixed window suffices.
fn dlambda_grid() -> Grid1D {
    Grid1D::new(1024.0, 8192).expect("valid")
}

fn sq_envelope(y: f64, p: f64) -> f64 {
    2.0 * (std::f64::consts::E + y.abs()).ln().powf((1.0 / p - 0.5).abs())
}

pub(super) fn shifted_square_growth(cfg: &ExperimentConfig, prof: &Profiles) -> Result<RunOutput> {
    let mut table = ResultTable::new(&cfg.experiment);
    let fam = &cfg.family;
    let ns = feasible(cfg, &mut table)?;
    let n = *ns.iter().max().expect("nonempty");
    let inst = make_linear_extremal(n, fam.c, prof, layout(cfg)?)?;
    let mut plots = Vec::new();
    let mut series = Vec::new();
    for &p in &fam.p {
        let pi = p as u32;
        let tag = format!("family;N={n};c={};p={p}", fam.c);
        if p.fract() != 0.0 || !(pi == 2 || pi % 4 == 0) {
            table.push(ResultRow::new(tag, "skipped (packet norms need p = 2 or 4 | p)", p));
            continue;
        }
        let s0 = shifted_square_norm_packets(&inst.f, &prof.psi, 0.0, pi)?;
        let ratios: Vec<f64> = fam
            .y
            .par_iter()
            .map(|&y| Ok(shifted_square_norm_packets(&inst.f, &prof.psi, y, pi)? / s0))
            .collect::<Result<_>>()?;
        for (&y, &r) in fam.y.iter().zip(&ratios) {
            let row = ResultRow::new(format!("{tag};y={y}"), "ratio", r);
            table.push(match pi {
                2 => row.check("acceptance-6", (r - 1.0).abs() <= 1e-10),
                4 => row.check("acceptance-6", r >= 1.0 - 1e-12 && r <= sq_envelope(y, p)),
                _ => row,
            });
        }
        let logs: Vec<f64> = fam.y.iter().map(|y| (std::f64::consts::E + y.abs()).ln()).collect();
        if logs.len() >= 2 && ratios.iter().all(|&r| r > 0.0) {
            let (s, _, res) = loglog_fit(&logs, &ratios);
            table.push(ResultRow::new(tag.clone(), "exponent of log(e+|y|)", s).fit(s, res));
        }
        series.push(Series { label: format!("p={p}"), points: fam.y.iter().copied().zip(ratios).collect() });
        series.push(Series {
            label: format!("envelope p={p}"),
            points: fam.y.iter().map(|&y| (y, sq_envelope(y, p))).collect(),
        });
    }
    plots.push(log_plot("shifted-square-family", "shifted square function, extremal family", "y", "ratio", series));

    let grid = Grid1D::new(cfg.grid.period, cfg.grid.samples)?;
    let m = cfg.grid.samples as i64;
    let dict = Dictionary::random(grid, fam.random_count, (m / 8 + 1, m / 4 - 1), cfg.seed);
    for (i, f) in dict.functions.iter().enumerate() {
        for &p in &fam.p {
            let s0 = lp_norm(&square_function(f, 0.0, prof)?, p);
            for &y in &fam.y {
                let tag = format!("random#{i};p={p};y={y}");
                match square_function(f, y, prof) {
                    Ok(s) => {
                        let r = lp_norm(&s, p) / s0;
                        let row = ResultRow::new(tag, "ratio", r);
                        table.push(if p == 2.0 { row.check("acceptance-6", (r - 1.0).abs() <= 1e-10) } else { row });
                    }
                    Err(Error::Wrap { shift, .. }) => {
                        table.push(ResultRow::new(tag, "skipped (torus wrap)", shift));
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(RunOutput { table, plots })
}

struct LinearPoint {
    n: u32,
    dev: f64,
    l2_err: f64,
    f4: f64,
    tf4: f64,
    tf2: f64,
    support: f64,
    disjoint: bool,
    dl: Vec<f64>,
    d_cert: f64,
}

/// `λ` for the ratio certificate, below `1/2 − 1/4`.
const CERT_LAMBDA: f64 = 0.125;

pub(super) fn linear_extremal(cfg: &ExperimentConfig, prof: &Profiles) -> Result<RunOutput> {
    let mut table = ResultTable::new(&cfg.experiment);
    let fam = &cfg.family;
    let ns = feasible(cfg, &mut table)?;
    let lay = layout(cfg)?;
    let pts: Vec<LinearPoint> = ns
        .par_iter()
        .map(|&n| {
            let inst = make_linear_extremal(n, fam.c, prof, lay)?;
            let tf = inst.tf()?;
            let k = inst.kernel_1d(dlambda_grid())?;
            Ok(LinearPoint {
                n,
                dev: deviation_bound(&tf, &inst.expected_tf()) / inst.eta_sup(),
                l2_err: tf.l2_norm() / (inst.eta_l2() * (n as f64).sqrt()) - 1.0,
                f4: inst.f.lp_norm_even(4)?,
                tf4: tf.lp_norm_even(4)?,
                tf2: tf.l2_norm(),
                support: inst.support_identity_residual(),
                disjoint: inst.pieces_disjoint(),
                dl: fam.lambda.iter().map(|&l| d_lambda(&k, l).value).collect(),
                d_cert: d_lambda(&k, CERT_LAMBDA).value,
            })
        })
        .collect::<Result<_>>()?;
    for pt in &pts {
        let t = format!("N={};c={}", pt.n, fam.c);
        table.push(ResultRow::new(&t, "max |Tf - sum eta e(2^{ck}x)| / sup eta", pt.dev).check("acceptance-2", pt.dev <= 1e-8));
        table.push(ResultRow::new(&t, "|Tf|_2 / (sqrt(N) |eta|_2) - 1", pt.l2_err).check("acceptance-3", pt.l2_err.abs() <= 1e-9));
        table.push(ResultRow::new(&t, "support identity residual", pt.support).check("invariant", pt.support == 0.0));
        table.push(ResultRow::new(&t, "pieces frequency-disjoint", pt.disjoint as u8 as f64).check("invariant", pt.disjoint));
        table.push(ResultRow::new(&t, "|f|_4", pt.f4));
        table.push(ResultRow::new(&t, "|Tf|_4", pt.tf4));
        for (l, d) in fam.lambda.iter().zip(&pt.dl) {
            table.push(ResultRow::new(format!("{t};lambda={l}"), "D_lambda(K)", *d));
        }
    }
    let grow: Vec<&LinearPoint> = pts.iter().filter(|p| p.n >= 2).collect();
    if grow.len() >= 2 {
        let x: Vec<f64> = grow.iter().map(|p| p.n as f64).collect();
        let col = |f: &dyn Fn(&LinearPoint) -> f64| grow.iter().map(|p| f(p)).collect::<Vec<f64>>();
        let tag = format!("N>=2;c={}", fam.c);
        let (s, _, r) = loglog_fit(&x, &col(&|p| p.tf4));
        table.push(ResultRow::new(&tag, "slope log|Tf|_4", s).fit(s, r).check("acceptance-4", (0.40..=0.60).contains(&s)));
        let (s, _, r) = loglog_fit(&x, &col(&|p| p.f4));
        table.push(ResultRow::new(&tag, "slope log|f|_4", s).fit(s, r).check("acceptance-4", (0.15..=0.35).contains(&s)));
        let (s, _, r) = loglog_fit(&x, &col(&|p| p.tf2));
        table.push(ResultRow::new(&tag, "slope log|Tf|_2", s).fit(s, r).check("invariant", (s - 0.5).abs() <= 0.01));
        let (s, _, r) = loglog_fit(&x, &col(&|p| p.tf4 / (p.d_cert * p.f4)));
        table.push(
            ResultRow::new(format!("{tag};lambda={CERT_LAMBDA}"), "slope |Tf|_4 / (D_lambda |f|_4)", s)
                .fit(s, r)
                .check("invariant", s > 0.0),
        );
    }
    let plots = vec![log_plot(
        "linear-extremal-l4",
        "linear family, L4 norms",
        "N",
        "norm",
        vec![
            Series { label: "|f|_4".into(), points: pts.iter().map(|p| (p.n as f64, p.f4)).collect() },
            Series { label: "|Tf|_4".into(), points: pts.iter().map(|p| (p.n as f64, p.tf4)).collect() },
        ],
    )];
    Ok(RunOutput { table, plots })
}

pub(super) fn bilinear_extremal(cfg: &ExperimentConfig, prof: &Profiles) -> Result<RunOutput> {
    let mut table = ResultTable::new(&cfg.experiment);
    let fam = &cfg.family;
    let ns = feasible(cfg, &mut table)?;
    let lay = layout(cfg)?;
    let tensor_grid = Grid1D::new(1024.0, 4096)?;
    #[allow(clippy::type_complexity)]
    let pts: Vec<(u32, f64, f64, f64, f64, Vec<f64>)> = ns
        .par_iter()
        .map(|&n| {
            let inst = make_bilinear_extremal(n, fam.c, prof, lay)?;
            let b = inst.bfg()?;
            let want = inst.expected_bfg()?;
            let dev = deviation_bound(&b, &want) / (n as f64 * inst.eta_sq_sup());
            let l2 = b.l2_norm();
            let l2_err = l2 / want.l2_norm() - 1.0;
            let gsup = inst.g.as_ref().expect("bilinear").envelope_sup()?;
            let k = kernel_1d(prof, inst.kernel_center, tensor_grid)?;
            let dl = fam.lambda.iter().map(|&l| d_lambda_tensor(&k, &k, l)).collect();
            Ok((n, dev, l2, l2_err, gsup, dl))
        })
        .collect::<Result<_>>()?;
    let g1 = pts.iter().find(|p| p.0 == 1).map(|p| p.4);
    for (n, dev, l2, l2_err, gsup, dl) in &pts {
        let t = format!("N={n};c={}", fam.c);
        table.push(ResultRow::new(&t, "max |B(f,g) - N eta^2| / (N sup eta^2)", *dev).check("acceptance-1", *dev <= 1e-7));
        table.push(ResultRow::new(&t, "|B(f,g)|_2 / (N |eta^2|_2) - 1", *l2_err).check("invariant", l2_err.abs() <= 1e-9));
        table.push(ResultRow::new(&t, "|B(f,g)|_2", *l2));
        table.push(ResultRow::new(&t, "max sum |envelopes of g|", *gsup));
        if let Some(g1) = g1 {
            table.push(ResultRow::new(&t, "g envelope sup / value at N=1", gsup / g1));
        }
        for (l, d) in fam.lambda.iter().zip(dl) {
            table.push(ResultRow::new(format!("{t};lambda={l}"), "D_lambda(K tensor K)", *d));
        }
    }
    if pts.len() >= 2 {
        let x: Vec<f64> = pts.iter().map(|p| p.0 as f64).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.2).collect();
        let (s, _, r) = loglog_fit(&x, &y);
        table.push(ResultRow::new(format!("c={}", fam.c), "slope log|B(f,g)|_2", s).fit(s, r).check("invariant", (s - 1.0).abs() <= 0.01));
        for (i, l) in fam.lambda.iter().enumerate() {
            let d: Vec<f64> = pts.iter().map(|p| p.5[i]).collect();
            let (s, _, r) = loglog_fit(&x, &d);
            table.push(ResultRow::new(format!("c={};lambda={l}", fam.c), "slope log D_lambda(K tensor K)", s).fit(s, r));
        }
    }
    let plots = vec![log_plot(
        "bilinear-extremal",
        "bilinear family",
        "N",
        "value",
        vec![
            Series { label: "|B(f,g)|_2".into(), points: pts.iter().map(|p| (p.0 as f64, p.2)).collect() },
            Series { label: "g envelope sup".into(), points: pts.iter().map(|p| (p.0 as f64, p.4)).collect() },
        ],
    )];
    Ok(RunOutput { table, plots })
}

pub(super) fn dlambda_scaling(cfg: &ExperimentConfig, prof: &Profiles) -> Result<RunOutput> {
    let mut table = ResultTable::new(&cfg.experiment);
    let fam = &cfg.family;
    let nmax = *fam.n.iter().max().expect("validated");
    let ns: Vec<u32> = (1..=nmax).collect();
    let mut series = Vec::new();
    for &l in &fam.lambda {
        let ds: Vec<f64> = ns
            .par_iter()
            .map(|&n| {
                let k = kernel_1d(prof, 2f64.powi((fam.c * n) as i32), dlambda_grid())?;
                Ok(d_lambda(&k, l).value)
            })
            .collect::<Result<_>>()?;
        for (n, d) in ns.iter().zip(&ds) {
            table.push(ResultRow::new(format!("N={n};c={};lambda={l}", fam.c), "D_lambda(K)", *d));
        }
        let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        if x.len() >= 2 {
            let (s, _, r) = loglog_fit(&x, &ds);
            table.push(
                ResultRow::new(format!("c={};lambda={l}", fam.c), "slope log D_lambda", s)
                    .fit(s, r)
                    .check("acceptance-5", (s - l).abs() <= 0.2),
            );
        }
        series.push(Series { label: format!("lambda={l}"), points: x.into_iter().zip(ds).collect() });
    }
    Ok(RunOutput { table, plots: vec![log_plot("dlambda-scaling", "D_lambda of the translated kernel", "N", "D_lambda", series)] })
}

fn load_omega(cfg: &ExperimentConfig) -> Result<SphereFunction> {
    match &cfg.family.omega_csv {
        Some(p) => SphereFunction::read_csv(p),
        None => generate(&cfg.family.omega, cfg.grid.sphere, cfg.family.omega_param),
    }
}

pub(super) fn drf_mikhlin(cfg: &ExperimentConfig, prof: &Profiles) -> Result<RunOutput> {
    let mut table = ResultTable::new(&cfg.experiment);
    let fam = &cfg.family;
    let omega = project_vanishing(&load_omega(cfg)?);
    let grid = Grid2D::new(cfg.grid.kernel_period, cfg.grid.kernel_samples)?;
    let (j0, j1) = (fam.j_min, fam.j_max.min(0));
    let dec = drf_decompose(&omega, prof, grid, (j0, j1), (0, 0))?;
    let tel = dec.telescoping_residual();
    table.push(ResultRow::new(format!("j in [{j0},{j1}]"), "telescoping residual", tel).check("invariant", tel <= 1e-12));
    let mut per_alpha: std::collections::BTreeMap<(u32, u32), Vec<(f64, f64)>> = Default::default();
    for j in j0..=j1 {
        let oob = dec.out_of_band(j)?;
        table.push(ResultRow::new(format!("j={j}"), "out-of-band energy", oob).check("acceptance-10", oob < 1e-6));
        table.push(ResultRow::new(format!("j={j}"), "|K^j_0|_1 / |Omega|_1", dec.l1(j)? / omega.l1()));
        let rep = mikhlin_check(&dec, j, 2)?;
        for (a, v) in &rep.constants {
            table.push(ResultRow::new(format!("j={j};alpha=({},{})", a.0, a.1), "Mikhlin constant", *v));
            per_alpha.entry(*a).or_default().push((j as f64, *v));
        }
    }
    for (a, vals) in &per_alpha {
        let hi = vals.iter().map(|v| v.1).fold(0.0, f64::max);
        let lo = vals.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        let row = ResultRow::new(format!("alpha=({},{});j in [{j0},{j1}]", a.0, a.1), "max/min Mikhlin constant", hi / lo);
        table.push(if *a == (0, 0) { row.check("acceptance-10", hi / lo < 2.0) } else { row });
    }
    let (s, r) = small_xi_slope(&dec, 1e-4, 1e-2);
    table.push(ResultRow::new("vanishing moment", "small-xi slope of log|K0^|", s).fit(s, r).check("acceptance-10", s >= 0.9));
    let shifted = omega.map(|v| v + 1.0);
    let dec1 = drf_decompose(&shifted, prof, grid, (0, 0), (0, 0))?;
    let (s, r) = small_xi_slope(&dec1, 1e-4, 1e-2);
    table.push(ResultRow::new("Omega + 1", "small-xi slope of log|K0^|", s).fit(s, r).check("acceptance-10", s <= 0.2));
    let series = per_alpha
        .iter()
        .map(|(a, v)| Series { label: format!("alpha=({},{})", a.0, a.1), points: v.clone() })
        .collect();
    let plot = Plot {
        name: "drf-mikhlin".into(),
        title: "Mikhlin constants".into(),
        x_label: "j".into(),
        y_label: "constant".into(),
        log_x: false,
        log_y: true,
        series,
    };
    Ok(RunOutput { table, plots: vec![plot] })
}

pub(super) fn level_split_audit(cfg: &ExperimentConfig, prof: &Profiles) -> Result<RunOutput> {
    let mut table = ResultTable::new(&cfg.experiment);
    let fam = &cfg.family;
    let omega = project_vanishing(&load_omega(cfg)?);
    let split = level_split(&omega);
    for (mu, piece) in &split.pieces {
        let t = format!("mu={mu}");
        let mean = piece.mean().abs();
        table.push(ResultRow::new(&t, "|mean of Omega^mu|", mean).check("acceptance-10", mean <= 1e-10));
        table.push(ResultRow::new(&t, "mass of D^mu", split.masses[mu]));
        table.push(ResultRow::new(&t, "sup |Omega^mu|", piece.linf()));
        table.push(ResultRow::new(format!("{t};A={}", fam.a), "Orlicz norm of Omega^mu", orlicz_norm(piece, fam.a)?.value));
    }
    let m = omega.mean();
    let res = split.sum().iter().zip(omega.values()).map(|(a, b)| (a - (b - m)).abs()).fold(0.0, f64::max);
    table.push(ResultRow::new("all mu", "max |sum Omega^mu - Omega|", res).check("invariant", res <= 1e-12 * omega.linf().max(1.0)));
    let grid = Grid2D::new(cfg.grid.kernel_period, cfg.grid.kernel_samples)?;
    let dict = Dictionary::random(Grid1D::new(16.0, 512)?, fam.random_count + 2, (1, 12), cfg.seed);
    let cells = level_norm_table(&omega, prof, grid, (1, fam.table_j.max(1)), &dict)?;
    let mut series = Vec::new();
    for mu in split.pieces.keys() {
        let pts: Vec<(f64, f64)> = cells.iter().filter(|c| c.mu == *mu).map(|c| (c.j as f64, c.value)).collect();
        for (j, v) in &pts {
            table.push(ResultRow::new(format!("j={j};mu={mu}"), "norm lower bound", *v));
        }
        if let Some(d) = fit_delta(&cells, *mu) {
            table.push(ResultRow::new(format!("mu={mu}"), "fitted delta", d).check("invariant", d > 0.0));
        }
        if !pts.is_empty() {
            series.push(Series { label: format!("mu={mu}"), points: pts });
        }
    }
    let plot = Plot {
        name: "level-split-table".into(),
        title: "norm lower bounds by (j, mu)".into(),
        x_label: "j".into(),
        y_label: "norm".into(),
        log_x: false,
        log_y: true,
        series,
    };
    Ok(RunOutput { table, plots: vec![plot] })
}

/// Test sphere functions, and whether doubling `Q` samples the same function.
fn orlicz_set(q: usize, seed: u64) -> Result<Vec<(&'static str, SphereFunction, bool)>> {
    Ok(vec![
        ("cos", generate("cos", q, 0.0)?, true),
        ("odd-harmonics", generate("odd-harmonics", q, 3.0)?, true),
        ("two-level", generate("two-level", q, 8.0)?, true),
        ("spike", generate("spike", q, 64.0)?, false),
        ("random", generate("random", q, seed as f64)?, false),
    ])
}

pub(super) fn orlicz_suite(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let mut table = ResultTable::new(&cfg.experiment);
    let q = cfg.grid.sphere;
    let alphas = &cfg.family.alpha;
    let coarse = orlicz_set(q, cfg.seed)?;
    let fine = orlicz_set(2 * q, cfg.seed)?;
    let mut series = Vec::new();
    for ((name, om, refinable), (_, om2, _)) in coarse.iter().zip(&fine) {
        let mut norms = Vec::new();
        for &a in alphas {
            let t = format!("Omega={name};alpha={a}");
            let v = luxemburg_norm(om.values(), a)?.value;
            let resid = (luxemburg_functional(om.values(), a, v) - 1.0).abs();
            table.push(ResultRow::new(&t, "Luxemburg norm", v));
            table.push(ResultRow::new(&t, "defining-equation residual", resid).check("acceptance-11", resid < 1e-9));
            if a == 0.0 {
                let d = (v - om.l1()).abs() / om.l1();
                table.push(ResultRow::new(&t, "relative gap to L1", d).check("acceptance-11", d <= 1e-9));
            }
            let v2 = luxemburg_norm(om2.values(), a)?.value;
            let rel = (v2 - v).abs() / v;
            let row = ResultRow::new(&t, "relative change Q -> 2Q", rel);
            table.push(if *refinable { row.check("invariant", rel <= 1e-6) } else { row });
            norms.push((a, v));
        }
        let mut sorted = norms.clone();
        sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mono = sorted.windows(2).all(|w| w[1].1 >= w[0].1 * (1.0 - 1e-12));
        table.push(ResultRow::new(format!("Omega={name}"), "monotone in alpha", mono as u8 as f64).check("acceptance-11", mono));
        series.push(Series { label: (*name).into(), points: sorted });
    }
    let plot = Plot {
        name: "orlicz-suite".into(),
        title: "Luxemburg norms".into(),
        x_label: "alpha".into(),
        y_label: "norm".into(),
        log_x: false,
        log_y: true,
        series,
    };
    Ok(RunOutput { table, plots: vec![plot] })
}
