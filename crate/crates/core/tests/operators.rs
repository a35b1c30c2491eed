use std::sync::Arc;

use dyadic::bumps::{bump, Profiles};
use dyadic::grid::{Grid1D, Grid2D, SampledFunction1D, SampledFunction2D};
use dyadic::norms::{d_lambda_2d, lp_norm};
use dyadic::operators::*;
use dyadic::rough::Dictionary;
use dyadic::{Error, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn prof() -> Profiles {
    Profiles::default()
}

fn gamma_1d(p: &Profiles) -> Arc<dyn Symbol1D> {
    Arc::new(ProfileSymbol::new(p.gamma.clone()))
}

fn gamma_2d(p: &Profiles, offset: (f64, f64)) -> DyadicSymbol2D {
    assemble_symbol_2d(Arc::new(RadialSymbol { profile: p.gamma.clone(), offset }), None).unwrap()
}

fn character(g: Grid1D, m: i64) -> SampledFunction1D {
    SampledFunction1D::from_fn(g, |x| C64::from_polar(1.0, std::f64::consts::TAU * x * m as f64 / g.period()))
}

#[test]
fn psi_sum_is_partition_constant_on_safe_band() {
    let p = prof();
    let sym = assemble_symbol(Arc::new(ProfileSymbol::new(p.psi.clone())), Some((-5, 5))).unwrap();
    let (lo, hi) = sym.safe_band();
    assert_eq!((lo, hi), (1.0 / 16.0, 16.0));
    for i in 0..=500 {
        let xi = lo * (hi / lo).powf(i as f64 / 500.0);
        assert!((sym.eval(xi).re - p.c_partition).abs() < 1e-12);
        assert!((sym.eval(-xi).re - p.c_partition).abs() < 1e-12);
    }
}

#[test]
fn disjoint_dilates_pick_one_term() {
    let m0 = FnSymbol1D::new((0.5, 1.0), |xi: f64| C64::new(bump((xi.abs() - 0.75) / 0.25), 0.0));
    let sym = assemble_symbol(Arc::new(m0.clone()), None).unwrap();
    for xi in [0.3f64, 0.6, 0.74, 1.1, 5.5, 17.0] {
        let j = xi.log2().ceil() as i32;
        let want = m0.eval(xi * 2f64.powi(-j));
        assert!((sym.eval(xi) - want).norm() < 1e-15, "ξ = {xi}");
        assert!(sym.overlap(xi) <= 1);
    }
}

#[test]
fn random_symbol_is_dyadically_periodic() {
    let p = prof();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let g = p.gamma.clone();
    let m0 = FnSymbol1D::new((0.5, 2.0), move |xi: f64| {
        let r = xi.abs();
        C64::new(g.eval(r) * (1.0 + c[0] * r + c[1] * r * r), g.eval(r) * (c[2] * (3.0 * r).sin() + c[3]))
    });
    let sym = assemble_symbol(Arc::new(m0), Some((-8, 8))).unwrap();
    let (lo, hi) = sym.safe_band();
    for _ in 0..200 {
        let xi = lo * (hi / (2.0 * lo)).powf(rng.gen_range(0.0..1.0));
        assert!((sym.eval(2.0 * xi) - sym.eval(xi)).norm() < 1e-10);
    }
}

#[test]
fn annulus_violation_is_rejected() {
    let wide = FnSymbol1D::new((0.25, 2.0), |_| C64::new(1.0, 0.0));
    assert!(matches!(assemble_symbol(Arc::new(wide), None), Err(Error::Support(_))));
    let lying = FnSymbol1D::new((0.5, 2.0), |_| C64::new(1.0, 0.0));
    assert!(matches!(assemble_symbol(Arc::new(lying), None), Err(Error::Support(_))));
}

#[test]
fn unit_symbol_is_identity_and_characters_scale() {
    let p = prof();
    let sym = assemble_symbol(gamma_1d(&p), None).unwrap();
    let g = Grid1D::new(32.0, 512).unwrap().centered_at(2.0);
    let f = Dictionary::random(g, 1, (1, 120), 5).functions.remove(0);
    let tf = apply_linear(&sym, &f).unwrap();
    assert!(tf.sub(&f).unwrap().max_abs() < 1e-12 * f.max_abs());

    let shifted = assemble_symbol(Arc::new(ProfileSymbol::translated(p.psi.clone(), 1.5)), None).unwrap();
    let e = character(g, 37);
    let out = apply_linear(&shifted, &e).unwrap();
    let want = e.scale(shifted.eval(37.0 / 32.0));
    assert!(out.sub(&want).unwrap().max_abs() < 1e-12);
}

#[test]
fn safe_band_is_enforced() {
    let p = prof();
    let sym = assemble_symbol(gamma_1d(&p), Some((0, 2))).unwrap();
    let g = Grid1D::new(32.0, 512).unwrap();
    assert!(matches!(apply_linear(&sym, &character(g, 2)), Err(Error::SafeBand(_))));
    assert!(apply_linear(&sym, &character(g, 64)).is_ok());
}

#[test]
fn spatial_route_agrees_with_spectral() {
    let p = prof();
    let sym = assemble_symbol(Arc::new(ProfileSymbol::translated(p.psi.clone(), 0.25)), Some((-2, 1))).unwrap();
    let g = Grid1D::new(256.0, 8192).unwrap();
    let f = Dictionary::random(g, 1, (136, 250), 8).functions.remove(0);
    let a = apply_linear(&sym, &f).unwrap();
    let b = apply_linear_spatial(&sym, &f).unwrap();
    let e = a.sub(&b).unwrap().max_abs() / a.max_abs();
    assert!(e < 1e-9, "{e:e}");
}

#[test]
fn bilinear_unit_symbol_is_pointwise_product() {
    let p = prof();
    let sym = gamma_2d(&p, (0.0, 0.0));
    let g = Grid1D::new(16.0, 256).unwrap();
    let d = Dictionary::random(g, 2, (1, 60), 12);
    let out = apply_bilinear(&sym, &d.functions[0], &d.functions[1]).unwrap();
    let prod = d.functions[0].mul(&d.functions[1]).unwrap();
    assert!(out.sub(&prod).unwrap().max_abs() < 1e-11 * prod.max_abs());
}

#[test]
fn bilinear_degenerates_to_linear() {
    let p = prof();
    let g1 = p.gamma.clone();
    let g2 = p.gamma.clone();
    let m2 = FnSymbol2D::new((0.5, 2.0), move |a: f64, b: f64| C64::new(g1.eval(a.hypot(b)), 0.0) * C64::new(1.0, a.sin()));
    let m1 = FnSymbol1D::new((0.5, 2.0), move |a: f64| C64::new(g2.eval(a), 0.0) * C64::new(1.0, a.sin()));
    let b = assemble_symbol_2d(Arc::new(m2), None).unwrap();
    let l = assemble_symbol(Arc::new(m1), None).unwrap();
    let g = Grid1D::new(16.0, 256).unwrap();
    let f = Dictionary::random(g, 1, (1, 60), 13).functions.remove(0);
    let one = SampledFunction1D::from_fn(g, |_| C64::new(1.0, 0.0));
    let out = apply_bilinear(&b, &f, &one).unwrap();
    let want = apply_linear(&l, &f).unwrap();
    assert!(out.sub(&want).unwrap().max_abs() < 1e-12 * want.max_abs());
}

#[test]
fn bilinear_rejects_wide_inputs() {
    let p = prof();
    let g = Grid1D::new(16.0, 64).unwrap();
    let e = character(g, 20);
    assert!(matches!(apply_bilinear(&gamma_2d(&p, (0.0, 0.0)), &e, &e), Err(Error::SafeBand(_))));
}

#[test]
fn oracle_agrees_and_degenerate_cases() {
    let p = prof();
    let g = Grid1D::new(16.0, 64).unwrap();
    for seed in 0..5 {
        let sym = gamma_2d(&p, (seed as f64 * 0.5, -1.0));
        let d = Dictionary::random(g, 2, (1, 15), seed);
        let a = apply_bilinear(&sym, &d.functions[0], &d.functions[1]).unwrap();
        let b = bilinear_oracle(&sym, &d.functions[0], &d.functions[1]).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-9);
    }
    let zero = DyadicSymbol2D::new_unchecked(Arc::new(FnSymbol2D::new((0.5, 2.0), |_, _| C64::new(0.0, 0.0))), None);
    let d = Dictionary::random(g, 2, (1, 15), 9);
    assert_eq!(bilinear_oracle(&zero, &d.functions[0], &d.functions[1]).unwrap().max_abs(), 0.0);
    // symmetric symbol: swapping inputs changes nothing
    let sym = gamma_2d(&p, (0.75, 0.75));
    let ab = bilinear_oracle(&sym, &d.functions[0], &d.functions[1]).unwrap();
    let ba = bilinear_oracle(&sym, &d.functions[1], &d.functions[0]).unwrap();
    assert!(ab.sub(&ba).unwrap().max_abs() < 1e-12);
    assert!(matches!(bilinear_oracle(&sym, &d.functions[0], &SampledFunction1D::zeros(Grid1D::new(16.0, 256).unwrap())), Err(_)));
    let big = SampledFunction1D::zeros(Grid1D::new(16.0, 256).unwrap());
    assert!(matches!(bilinear_oracle(&sym, &big, &big), Err(Error::SizeGuard(_))));
}

#[test]
fn duality_for_both_transposes() {
    let p = prof();
    let g = Grid1D::new(16.0, 256).unwrap();
    for seed in 0..4 {
        let sym = gamma_2d(&p, (1.0, 0.25 * seed as f64));
        let d = Dictionary::random(g, 3, (1, 50), 40 + seed);
        let (f1, f2, f3) = (&d.functions[0], &d.functions[1], &d.functions[2]);
        let scale = lp_norm(f1, 2.0) * lp_norm(f2, 2.0) * lp_norm(f3, 2.0);
        let lhs = pairing(&apply_bilinear(&sym, f1, f2).unwrap(), f3).unwrap();
        let r1 = pairing(&apply_bilinear(&sym.transpose(Slot::First), f3, f2).unwrap(), f1).unwrap();
        let r2 = pairing(&apply_bilinear(&sym.transpose(Slot::Second), f1, f3).unwrap(), f2).unwrap();
        assert!((lhs - r1).norm() <= 1e-8 * scale);
        assert!((lhs - r2).norm() <= 1e-8 * scale);
        assert!(lhs.norm() > 1e-6 * scale, "nontrivial pairing");
    }
}

fn kernel_2d() -> SampledFunction2D {
    let g = Grid2D::new(16.0, 64).unwrap();
    SampledFunction2D::from_fn(g, |a, b| {
        let (a, b) = (a - 0.5, b + 0.25);
        C64::new((-(a * a + 2.0 * b * b)).exp() * (1.0 + a), b * (-(a * a + b * b)).exp())
    })
}

#[test]
fn transposes_are_involutions() {
    let k = kernel_2d();
    for slot in [Slot::First, Slot::Second] {
        let m = slot.matrix();
        let sq = [[m[0][0] * m[0][0] + m[0][1] * m[1][0], m[0][0] * m[0][1] + m[0][1] * m[1][1]], [m[1][0] * m[0][0] + m[1][1] * m[1][0], m[1][0] * m[0][1] + m[1][1] * m[1][1]]];
        assert_eq!(sq, [[1, 0], [0, 1]]);
        let once = remap(&k, slot, Resample::Pad).unwrap();
        let twice = remap(&once, slot, Resample::Pad).unwrap();
        // the padded window contains the original one: compare on the original points
        let tg = *twice.grid();
        let (t1, t2) = tg.axes();
        let (o1, o2) = k.grid().axes();
        let h = k.grid().spacing();
        let off1 = ((o1.start() - t1.start()) / h).round() as usize;
        let off2 = ((o2.start() - t2.start()) / h).round() as usize;
        let n = k.grid().samples();
        let tn = tg.samples();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((twice.values()[(i + off1) * tn + j + off2] - k.at(i, j)).norm());
            }
        }
        assert!(worst < 1e-9);
        // mass is preserved (unimodular change of variables)
        let s = |f: &SampledFunction2D| f.values().iter().map(|v| v.norm()).sum::<f64>();
        assert!((s(&once) - s(&k)).abs() < 1e-9 * s(&k));
    }
    // the first transpose applied three times is the first transpose again
    let a = remap(&k, Slot::First, Resample::Pad).unwrap();
    let c = remap(&remap(&a, Slot::First, Resample::Pad).unwrap(), Slot::First, Resample::Pad).unwrap();
    let s = |f: &SampledFunction2D| f.values().iter().map(|v| v.norm_sqr()).sum::<f64>();
    assert!((s(&a) - s(&c)).abs() < 1e-9 * s(&a));
}

#[test]
fn transpose_dlambda_within_factor() {
    let k = kernel_2d();
    let bk = BilinearKernel::new(DyadicSymbol2D::new_unchecked(Arc::new(FnSymbol2D::new((0.5, 2.0), |_, _| C64::new(0.0, 0.0))), None), Some(k.clone()));
    for lambda in [0.0, 1.0, 2.0] {
        let base = d_lambda_2d(&k, lambda).value;
        let bound = transpose_dlambda_factor(lambda);
        for slot in [Slot::First, Slot::Second] {
            let t = bk.transpose(slot);
            let v = d_lambda_2d(t.kernel.as_ref().unwrap(), lambda).value;
            assert!(v <= bound * base * (1.0 + 1e-9) && v >= base / bound * (1.0 - 1e-9), "λ={lambda}");
        }
    }
    // the cached transpose is reused
    assert!(Arc::ptr_eq(&bk.transpose(Slot::First), &bk.transpose(Slot::First)));
}

#[test]
fn reject_mode_reports_lost_samples() {
    let g = Grid2D::new(16.0, 64).unwrap();
    let wide = SampledFunction2D::from_fn(g, |a, b| C64::new((-(a * a + b * b) / 20.0).exp(), 0.0));
    assert!(matches!(remap(&wide, Slot::First, Resample::Reject), Err(Error::Support(_))));
}

#[test]
fn sampled_kernel_symbol_matches_analytic() {
    let p = prof();
    // exact on the lattice of the window
    let g = Grid2D::new(64.0, 256).unwrap();
    let sym = SampledSymbol2D::new(&p.gamma.sample_2d(g), (0.5, 2.0));
    for &(m1, m2) in &[(40i64, 6i64), (-77, 58), (0, 109), (64, 64)] {
        let (a, b) = (m1 as f64 / 64.0, m2 as f64 / 64.0);
        let want = C64::new(p.gamma.eval(a.hypot(b)), 0.0);
        assert!((sym.eval(a, b) - want).norm() < 1e-12);
    }
    // off the lattice only the truncated kernel tail is missing; it shrinks with the window
    let off = |l: f64, m: usize| {
        let s = SampledSymbol2D::new(&p.gamma.sample_2d(Grid2D::new(l, m).unwrap()), (0.5, 2.0));
        [(0.6013, 0.1007), (-1.2031, 0.9047)]
            .iter()
            .map(|&(a, b): &(f64, f64)| (s.eval(a, b) - C64::new(p.gamma.eval(a.hypot(b)), 0.0)).norm())
            .fold(0.0, f64::max)
    };
    let (e64, e128) = (off(64.0, 256), off(128.0, 512));
    assert!(e64 < 1e-6 && e128 < e64, "{e64:e} {e128:e}");
}
