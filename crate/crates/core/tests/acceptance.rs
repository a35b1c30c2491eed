//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Two criteria do not hold with the prescribed parameters (see README,
//! "Known deviations"). They print FAIL; the run only errors out when a
//! criterion that used to pass starts failing, or when a known failure
//! drifts from its recorded value.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use dyadic::analysis::square_function;
use dyadic::bumps::{make_family, validate_family, Profiles};
use dyadic::experiments::{run, ExperimentConfig, ResultTable};
use dyadic::extremals::{loglog_fit, make_linear_extremal};
use dyadic::grid::{Grid1D, Grid2D};
use dyadic::norms::lp_norm;
use dyadic::operators::{
    apply_bilinear, assemble_symbol_2d, bilinear_oracle, pairing, RadialSymbol, Slot, Symbol2D,
};
use dyadic::rough::{drf_decompose, mikhlin_zero_order, odd_harmonics, Dictionary};
use dyadic::Error;

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
}

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.toml"));
    ExperimentConfig::from_path(&path).expect("shipped config parses")
}

/// Rows tagged `acceptance-<id>`, and whether all of them pass.
fn tagged(table: &ResultTable, id: u32) -> (bool, usize) {
    let tag = format!("acceptance-{id}");
    let rows: Vec<_> = table.rows.iter().filter(|r| r.check == tag).collect();
    (!rows.is_empty() && rows.iter().all(|r| r.pass == Some(true)), rows.len())
}

fn value(table: &ResultTable, params: &str, quantity: &str) -> f64 {
    table.find(params, quantity).unwrap_or_else(|| panic!("missing row {params} / {quantity}")).value
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn gamma_symbol(prof: &Profiles, offset: (f64, f64)) -> dyadic::operators::DyadicSymbol2D {
    let m0: Arc<dyn Symbol2D> = Arc::new(RadialSymbol { profile: prof.gamma.clone(), offset });
    assemble_symbol_2d(m0, None).expect("annulus symbol")
}

fn c1(out: &mut Vec<Outcome>) {
    let (res, t) = timed(|| run(&config("bilinear-extremal")).expect("run"));
    let (ok, n) = tagged(&res.table, 1);
    let worst = (1..=4).map(|n| value(&res.table, &format!("N={n};c=4"), "max |B(f,g) - N eta^2| / (N sup eta^2)")).fold(0.0, f64::max);
    let pass = ok && n == 4 && t < Duration::from_secs(120);
    out.push(Outcome { id: 1, pass, detail: format!("max relative deviation {worst:.2e} over N=1..4, {:.1}s", t.as_secs_f64()) });
}

fn c2_to_4(out: &mut Vec<Outcome>, supplementary: &mut Vec<String>) -> (f64, f64) {
    let (res, t) = timed(|| run(&config("linear-extremal")).expect("run"));
    let tab = &res.table;
    let dev = (1..=5).map(|n| value(tab, &format!("N={n};c=4"), "max |Tf - sum eta e(2^{ck}x)| / sup eta")).fold(0.0, f64::max);
    let (ok2, n2) = tagged(tab, 2);
    out.push(Outcome { id: 2, pass: ok2 && n2 == 5, detail: format!("max deviation {dev:.2e}·sup η, N=1..5") });

    let l2 = (1..=5).map(|n| value(tab, &format!("N={n};c=4"), "|Tf|_2 / (sqrt(N) |eta|_2) - 1").abs()).fold(0.0, f64::max);
    let (ok3, n3) = tagged(tab, 3);
    out.push(Outcome { id: 3, pass: ok3 && n3 == 5, detail: format!("max |‖Tf‖₂/(√N‖η‖₂) − 1| = {l2:.2e}") });

    let s_tf = value(tab, "N>=2;c=4", "slope log|Tf|_4");
    let s_f = value(tab, "N>=2;c=4", "slope log|f|_4");
    let (ok4, _) = tagged(tab, 4);
    out.push(Outcome {
        id: 4,
        pass: ok4 && t < Duration::from_secs(300),
        detail: format!("slope ‖Tf‖₄ {s_tf:.4} (want [0.40, 0.60]), slope ‖f‖₄ {s_f:.4} (want [0.15, 0.35]), {:.1}s", t.as_secs_f64()),
    });

    // At spacing 10 the translates of η are separated, so ‖f‖₄ grows like N^{1/4}.
    let prof = Profiles::default();
    let lay = Grid1D::new(16384.0, 16384).expect("grid");
    let ns = [1u32, 2, 3];
    let (mut f4, mut tf4) = (Vec::new(), Vec::new());
    for &n in &ns {
        let inst = make_linear_extremal(n, 10, &prof, lay).expect("feasible at c = 10");
        f4.push(inst.f.lp_norm_even(4).expect("norm"));
        tf4.push(inst.tf().expect("tf").lp_norm_even(4).expect("norm"));
    }
    let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let (sf, _, _) = loglog_fit(&x, &f4);
    let (stf, _, _) = loglog_fit(&x, &tf4);
    supplementary.push(format!(
        "criterion 4 at c=10, N=1..3: slope ‖f‖₄ {sf:.4} [{}] (‖Tf‖₄ slope {stf:.4}, reported)",
        if (0.15..=0.35).contains(&sf) { "PASS" } else { "FAIL" }
    ));
    (s_f, s_tf)
}

fn c5(out: &mut Vec<Outcome>) {
    let res = run(&config("dlambda-scaling")).expect("run");
    let (ok, n) = tagged(&res.table, 5);
    let s1 = value(&res.table, "c=4;lambda=1", "slope log D_lambda");
    let s2 = value(&res.table, "c=4;lambda=2", "slope log D_lambda");
    out.push(Outcome { id: 5, pass: ok && n == 2, detail: format!("slopes {s1:.3} (λ=1), {s2:.3} (λ=2), N=1..6") });
}

fn c6(out: &mut Vec<Outcome>) {
    // Extremal family at p = 2 and p = 4 over every y = 2^4..2^16.
    let mut cfg = config("shifted-square-growth");
    cfg.family.y = (4..=16).map(|e| 2f64.powi(e)).collect();
    cfg.family.random_count = 0;
    let res = run(&cfg).expect("run");
    let (ok_family, n_family) = tagged(&res.table, 6);
    let worst4 = res
        .table
        .rows
        .iter()
        .filter(|r| r.parameters.starts_with("family;N=5;c=4;p=4") && r.quantity == "ratio")
        .map(|r| r.value)
        .fold(0.0, f64::max);

    // Ten random band-limited f. Frequencies sit near 2^9, so the largest
    // shift 2^{-k}·2^16 stays below a quarter of the period.
    let prof = Profiles::default();
    let grid = Grid1D::new(1024.0, 1 << 21).expect("grid");
    let dict = Dictionary::random(grid, 10, ((1 << 19) + 1, (1 << 20) - 1), 11);
    let mut worst2 = 0.0f64;
    let mut skipped = 0;
    for f in &dict.functions {
        let s0 = lp_norm(&square_function(f, 0.0, &prof).expect("square function"), 2.0);
        for e in 4..=16 {
            match square_function(f, 2f64.powi(e), &prof) {
                Ok(s) => worst2 = worst2.max((lp_norm(&s, 2.0) / s0 - 1.0).abs()),
                Err(Error::Wrap { .. }) => skipped += 1,
                Err(e) => panic!("{e}"),
            }
        }
    }
    let pass = ok_family && n_family == 26 && skipped == 0 && worst2 <= 1e-10;
    out.push(Outcome {
        id: 6,
        pass,
        detail: format!("random L² max |ratio − 1| {worst2:.2e} (10 f × 13 y); family p=4 max ratio {worst4:.6}"),
    });
}

fn c7(out: &mut Vec<Outcome>) {
    let fam = make_family(Grid1D::new(1024.0, 16384).expect("grid"), Grid2D::new(64.0, 1024).expect("grid")).expect("family");
    let rep = validate_family(&fam);
    let worst = rep.checks.iter().map(|c| c.residual).fold(0.0, f64::max);
    let pass = rep.all_pass() && worst < 1e-8 && rep.get("c_partition_random").is_some();
    out.push(Outcome { id: 7, pass, detail: format!("{} checks, max residual {worst:.2e}", rep.checks.len()) });
}

fn c8(out: &mut Vec<Outcome>) {
    let prof = Profiles::default();
    let grid = Grid1D::new(16.0, 64).expect("grid");
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let off = ((seed % 5) as f64 * 0.5 - 1.0, (seed % 3) as f64 * 0.75);
        let sym = gamma_symbol(&prof, off);
        let d = Dictionary::random(grid, 2, (1, 15), 100 + seed);
        let fast = apply_bilinear(&sym, &d.functions[0], &d.functions[1]).expect("fast");
        let slow = bilinear_oracle(&sym, &d.functions[0], &d.functions[1]).expect("oracle");
        worst = worst.max(fast.sub(&slow).expect("same grid").max_abs());
    }
    out.push(Outcome { id: 8, pass: worst <= 1e-9, detail: format!("max deviation {worst:.2e} over 20 instances, M=64") });
}

fn c9(out: &mut Vec<Outcome>) {
    let prof = Profiles::default();
    let grid = Grid1D::new(16.0, 256).expect("grid");
    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        let sym = gamma_symbol(&prof, (0.25 * seed as f64, -0.5));
        let d = Dictionary::random(grid, 3, (1, 40), 200 + seed);
        let (f1, f2, f3) = (&d.functions[0], &d.functions[1], &d.functions[2]);
        let scale = lp_norm(f1, 2.0) * lp_norm(f2, 2.0) * lp_norm(f3, 2.0);
        let lhs = pairing(&apply_bilinear(&sym, f1, f2).expect("B"), f3).expect("pair");
        let r1 = pairing(&apply_bilinear(&sym.transpose(Slot::First), f3, f2).expect("B*1"), f1).expect("pair");
        let r2 = pairing(&apply_bilinear(&sym.transpose(Slot::Second), f1, f3).expect("B*2"), f2).expect("pair");
        worst = worst.max((lhs - r1).norm() / scale).max((lhs - r2).norm() / scale);
    }
    out.push(Outcome { id: 9, pass: worst <= 1e-8, detail: format!("max relative duality gap {worst:.2e} over 10 triples") });
}

fn c10(out: &mut Vec<Outcome>, supplementary: &mut Vec<String>) -> f64 {
    let (res, t) = timed(|| run(&config("drf-mikhlin")).expect("run"));
    let tab = &res.table;
    let levels = run(&config("level-split-audit")).expect("run");
    let (ok_a, na) = tagged(&levels.table, 10);
    let means = levels.table.rows.iter().filter(|r| r.quantity == "|mean of Omega^mu|").map(|r| r.value).fold(0.0, f64::max);
    let oob = (-3..=0).map(|j| value(tab, &format!("j={j}"), "out-of-band energy")).fold(0.0, f64::max);
    let ratio = value(tab, "alpha=(0,0);j in [-3,0]", "max/min Mikhlin constant");
    let s_van = value(tab, "vanishing moment", "small-xi slope of log|K0^|");
    let s_one = value(tab, "Omega + 1", "small-xi slope of log|K0^|");
    let a = ok_a && na > 0 && means <= 1e-10;
    let b = oob < 1e-6;
    let c = ratio < 2.0;
    let d = s_van >= 0.9 && s_one <= 0.2;
    let flag = |p: bool| if p { "ok" } else { "FAIL" };
    out.push(Outcome {
        id: 10,
        pass: a && b && c && d && t < Duration::from_secs(300),
        detail: format!(
            "(a) mean {means:.1e} {} (b) out-of-band {oob:.1e} {} (c) max/min {ratio:.3} {} (d) slopes {s_van:.3}/{s_one:.3} {}, {:.1}s",
            flag(a),
            flag(b),
            flag(c),
            flag(d),
            t.as_secs_f64()
        ),
    });

    // The same α = 0 constant deeper in j, by direct shell evaluation.
    let prof = Profiles::default();
    let om = odd_harmonics(2048, 2).expect("omega");
    let dec = drf_decompose(&om, &prof, Grid2D::new(64.0, 1024).expect("grid"), (0, 0), (0, 0)).expect("dec");
    let deep: Vec<f64> = (-8..=-5).map(|j| mikhlin_zero_order(&dec, j, 17, 64)).collect();
    let hi = deep.iter().copied().fold(0.0, f64::max);
    let lo = deep.iter().copied().fold(f64::INFINITY, f64::min);
    supplementary.push(format!(
        "criterion 10(c) over j=-8..-5: constants {:?}, max/min {:.4} [{}]",
        deep.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>(),
        hi / lo,
        if hi / lo < 2.0 { "PASS" } else { "FAIL" }
    ));
    ratio
}

fn c11(out: &mut Vec<Outcome>) {
    let res = run(&config("orlicz-suite")).expect("run");
    let (ok, n) = tagged(&res.table, 11);
    let resid = res.table.rows.iter().filter(|r| r.quantity == "defining-equation residual").map(|r| r.value).fold(0.0, f64::max);
    let gap = res.table.rows.iter().filter(|r| r.quantity == "relative gap to L1").map(|r| r.value).fold(0.0, f64::max);
    let monos = res.table.rows.iter().filter(|r| r.quantity == "monotone in alpha").count();
    out.push(Outcome {
        id: 11,
        pass: ok && n > 0 && monos == 5,
        detail: format!("residual {resid:.1e}, α=0 gap to L¹ {gap:.1e}, monotone on {monos} Ω"),
    });
}

// Measured values of the two criteria that fail as specified.
const F_SLOPE_C4: f64 = 0.1150;
const MIKHLIN_RATIO: f64 = 20.7;

fn main() -> ExitCode {
    let mut out = Vec::new();
    let mut supp = Vec::new();
    c1(&mut out);
    let (f_slope, _) = c2_to_4(&mut out, &mut supp);
    c5(&mut out);
    c6(&mut out);
    c7(&mut out);
    c8(&mut out);
    c9(&mut out);
    let ratio = c10(&mut out, &mut supp);
    c11(&mut out);

    out.sort_by_key(|o| o.id);
    for o in &out {
        println!("criterion {:>2}: {}  {}", o.id, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    for s in &supp {
        println!("supplementary: {s}");
    }

    let known = [4u32, 10];
    let mut bad = Vec::new();
    for o in out.iter().filter(|o| !o.pass && !known.contains(&o.id)) {
        bad.push(format!("criterion {} regressed", o.id));
    }
    if (f_slope - F_SLOPE_C4).abs() > 2e-3 {
        bad.push(format!("‖f‖₄ slope at c=4 moved: {f_slope} vs recorded {F_SLOPE_C4}"));
    }
    if (ratio / MIKHLIN_RATIO - 1.0).abs() > 1e-2 {
        bad.push(format!("Mikhlin max/min moved: {ratio} vs recorded {MIKHLIN_RATIO}"));
    }
    if supp.iter().any(|s| s.contains("[FAIL]")) {
        bad.push("a supplementary check failed".into());
    }
    for b in &bad {
        println!("error: {b}");
    }
    if bad.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
