use std::sync::Arc;

use dyadic::bumps::{smooth_step, Profiles};
use dyadic::extremals::loglog_fit;
use dyadic::grid::{Grid1D, SampledFunction1D};
use dyadic::norms::{lp_norm, luxemburg_functional, luxemburg_norm};
use dyadic::operators::{assemble_symbol, ProfileSymbol};
use dyadic::rough::{level_of, level_split, SphereFunction};
use dyadic::C64;
use proptest::prelude::*;

fn samples(max_log2: u32) -> impl Strategy<Value = Vec<(f64, f64)>> {
    (3..=max_log2).prop_flat_map(|k| prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 1usize << k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_roundtrip_and_parseval(v in samples(9), period in 1.0..100.0f64, c in -50.0..50.0f64) {
        let g = Grid1D::new(period, v.len()).unwrap().centered_at(c);
        let f = SampledFunction1D::new(g, v.iter().map(|&(a, b)| C64::new(a, b)).collect()).unwrap();
        let s = f.forward_transform();
        prop_assert!(s.inverse_transform().sub(&f).unwrap().max_abs() <= 1e-12 * f.max_abs().max(1.0));
        let l2 = lp_norm(&f, 2.0).powi(2);
        prop_assert!((s.energy() - l2).abs() <= 1e-11 * l2.max(1e-300));
    }

    #[test]
    fn luxemburg_hits_the_defining_equation(v in prop::collection::vec(-50.0..50.0f64, 1..64), alpha in 0.0..3.0f64) {
        prop_assume!(v.iter().any(|x| x.abs() > 1e-6));
        let r = luxemburg_norm(&v, alpha).unwrap();
        prop_assert!((luxemburg_functional(&v, alpha, r.value) - 1.0).abs() < 1e-9);
        let l1 = v.iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64;
        prop_assert!(r.value >= l1 * (1.0 - 1e-12));
        if alpha > 0.0 {
            prop_assert!(luxemburg_norm(&v, alpha / 2.0).unwrap().value <= r.value * (1.0 + 1e-12));
        }
    }

    #[test]
    fn level_split_is_exact(v in prop::collection::vec(-300.0..300.0f64, 2..128)) {
        let om = SphereFunction::new(v.clone()).unwrap();
        let s = level_split(&om);
        let mean = om.mean();
        for (a, b) in s.sum().iter().zip(&v) {
            prop_assert!((a - (b - mean)).abs() < 1e-9);
        }
        for (mu, piece) in &s.pieces {
            prop_assert!(piece.mean().abs() < 1e-9);
            prop_assert!(piece.l1() <= 2.0 * s.masses[mu] + 1e-9);
        }
    }

    #[test]
    fn level_brackets_the_value(v in -1e6..1e6f64) {
        let mu = level_of(v);
        let a = v.abs();
        if mu == 0 {
            prop_assert!(a <= 1.0);
        } else {
            prop_assert!(2f64.powi(mu as i32 - 1) < a && a <= 2f64.powi(mu as i32));
        }
    }

    #[test]
    fn power_laws_fit_exactly(s in -3.0..3.0f64, c in 0.1..10.0f64) {
        let ps = [1.0, 2.0, 3.0, 4.0, 7.0];
        let vs: Vec<f64> = ps.iter().map(|p: &f64| c * p.powf(s)).collect();
        let (slope, b, r) = loglog_fit(&ps, &vs);
        prop_assert!((slope - s).abs() < 1e-10 && (b - c.ln()).abs() < 1e-10 && r < 1e-10);
    }

    #[test]
    fn smooth_step_is_antisymmetric(t in -1.0..2.0f64) {
        prop_assert!((smooth_step(t) + smooth_step(1.0 - t) - 1.0).abs() < 1e-14);
        prop_assert!((0.0..=1.0).contains(&smooth_step(t)));
    }

    #[test]
    fn psi_symbol_is_dilation_invariant(u in 0.0..1.0f64, sign in prop::bool::ANY) {
        let p = Profiles::default();
        let sym = assemble_symbol(Arc::new(ProfileSymbol::new(p.psi.clone())), Some((-6, 6))).unwrap();
        let (lo, hi) = sym.safe_band();
        let xi = lo * (hi / (2.0 * lo)).powf(u) * if sign { 1.0 } else { -1.0 };
        prop_assert!((sym.eval(2.0 * xi) - sym.eval(xi)).norm() < 1e-12);
    }
}
