use dyadic::bumps::Profiles;
use dyadic::extremals::*;
use dyadic::grid::{Grid1D, Spectrum1D};
use dyadic::norms::lp_norm;
use dyadic::operators::apply_linear;
use dyadic::packet::default_layout;
use dyadic::{Error, C64};

fn prof() -> Profiles {
    Profiles::default()
}

#[test]
fn feasibility_boundaries() {
    let l = default_layout();
    assert!(!feasibility(10, 4, &l).feasible);
    assert!(matches!(make_linear_extremal(10, 4, &prof(), l), Err(Error::Infeasible(_))));
    for n in 1..=3 {
        assert!(feasibility(n, 10, &l).feasible, "N = {n}");
    }
    assert!(!feasibility(4, 10, &l).feasible);
    assert_eq!(feasible_ns(&[1, 2, 3, 4, 5], 10, &l), vec![1, 2, 3]);
    let fz = feasibility(10, 4, &l);
    // dense sizing: L = 4·2^{36}, Nyquist 1.2·2^{40}
    assert_eq!(fz.dense_period, 4.0 * 2f64.powi(36));
    assert_eq!(fz.dense_samples_log2, (2.4 * 2f64.powi(40) * fz.dense_period).log2().ceil());
    assert!(matches!(make_linear_extremal(0, 4, &prof(), l), Err(Error::Config(_))));
}

#[test]
fn linear_instance_identities() {
    let p = prof();
    for n in 1..=4 {
        let inst = make_linear_extremal(n, 4, &p, default_layout()).unwrap();
        assert_eq!(inst.f.len(), n as usize);
        assert!(inst.pieces_disjoint());
        assert_eq!(inst.support_identity_residual(), 0.0);
        // orthogonal pieces: ‖f‖₂ = √N ‖η‖₂
        assert!((inst.f.l2_norm() / ((n as f64).sqrt() * inst.eta_l2()) - 1.0).abs() < 1e-12);
        let tf = inst.tf().unwrap();
        assert!(deviation_bound(&tf, &inst.expected_tf()) < 1e-12);
    }
}

#[test]
fn linear_route_agrees_with_dense_grid_for_one_piece() {
    // c = 4, N = 1: f(x) = η(x + 1) e^{2πi 16 x}, kernel β(· − 16); Nyquist 32 needs M = 2^20
    let p = prof();
    let inst = make_linear_extremal(1, 4, &p, default_layout()).unwrap();
    let g = Grid1D::new(16384.0, 1 << 20).unwrap();
    let eta = p.eta.clone();
    let f = Spectrum1D::from_fn(g, move |xi| {
        C64::new(eta.eval(xi - 16.0), 0.0) * C64::from_polar(1.0, std::f64::consts::TAU * (xi - 16.0))
    })
    .inverse_transform();
    let tf = apply_linear(inst.linear.as_ref().unwrap(), &f).unwrap();
    let packets = inst.tf().unwrap();
    let mut worst = 0.0f64;
    for i in (0..g.samples()).step_by(997) {
        let x = g.x(i);
        worst = worst.max((tf.values()[i] - packets.eval(x)).norm());
    }
    assert!(worst < 1e-9 * tf.max_abs(), "{worst:e}");
    assert!((lp_norm(&f, 2.0) / inst.f.l2_norm() - 1.0).abs() < 1e-9);
}

#[test]
fn bilinear_instance_identities() {
    let p = prof();
    for n in 1..=3 {
        let inst = make_bilinear_extremal(n, 4, &p, default_layout()).unwrap();
        let b = inst.bfg().unwrap();
        assert!(deviation_bound(&b, &inst.expected_bfg().unwrap()) < 1e-10, "N = {n}");
        let g = inst.g.as_ref().unwrap();
        for (a, c) in inst.f.packets().iter().zip(g.packets()) {
            assert_eq!(a.carrier, -c.carrier);
        }
        assert!(inst.tf().is_err());
    }
    assert!(make_linear_extremal(1, 4, &p, default_layout()).unwrap().bfg().is_err());
}

#[test]
fn g_envelope_is_uniform_when_translates_separate() {
    // c = 10: translates 2^10 apart against an η of width ~ 10²
    let p = prof();
    for n in 1..=3 {
        let inst = make_bilinear_extremal(n, 10, &p, default_layout()).unwrap();
        let r = inst.g.as_ref().unwrap().envelope_sup().unwrap() / inst.eta_sup();
        assert!((0.7..1.3).contains(&r), "N = {n}: {r}");
        assert!((inst.eta_sq_sup() - inst.eta_sup().powi(2)).abs() < 1e-15);
    }
}

#[test]
fn kernel_sits_at_its_center() {
    let p = prof();
    let g = Grid1D::new(256.0, 1024).unwrap();
    let k = kernel_1d(&p, 64.0, g).unwrap();
    let a = k.abs();
    let i = (0..a.len()).max_by(|&i, &j| a[i].total_cmp(&a[j])).unwrap();
    assert!((k.grid().x(i) - 64.0).abs() < 1e-12);
    // β̂ has no mass at 0
    assert!(k.quadrature(|_| 1.0).norm() < 1e-12 * lp_norm(&k, 1.0));
    assert!(matches!(kernel_1d(&p, 0.0, Grid1D::new(256.0, 256).unwrap()), Err(Error::Nyquist(_))));
}

#[test]
fn tensor_dlambda_at_zero_is_product_of_l1() {
    let p = prof();
    let g = Grid1D::new(64.0, 256).unwrap();
    let a = kernel_1d(&p, 3.0, g).unwrap();
    let b = kernel_1d(&p, -5.0, g).unwrap();
    let d0 = d_lambda_tensor(&a, &b, 0.0);
    assert!((d0 / (lp_norm(&a, 1.0) * lp_norm(&b, 1.0)) - 1.0).abs() < 1e-12);
    assert!(d_lambda_tensor(&a, &b, 1.0) > d0);
}

#[test]
fn loglog_fit_recovers_power_law() {
    let ns = [1.0, 2.0, 3.0, 5.0, 8.0];
    let vs: Vec<f64> = ns.iter().map(|n: &f64| 3.0 * n.powf(0.25)).collect();
    let (s, b, r) = loglog_fit(&ns, &vs);
    assert!((s - 0.25).abs() < 1e-14 && (b - 3f64.ln()).abs() < 1e-14 && r < 1e-14);
    let fit = measure_growth(&[1, 2, 4], |n| Ok(n as f64 * 2.0)).unwrap();
    assert!((fit.slope - 1.0).abs() < 1e-14);
    let path = std::env::temp_dir().join(format!("dyadic-growth-{}.csv", std::process::id()));
    fit.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("N,norm,slope,residual"));
    std::fs::remove_file(path).ok();
}

#[test]
fn deviation_bound_dominates_pointwise_gap() {
    let p = prof();
    let inst = make_linear_extremal(2, 4, &p, default_layout()).unwrap();
    let a = inst.f.clone();
    let b = inst.f.scale(C64::new(0.9, 0.1));
    let bound = deviation_bound(&a, &b);
    for i in 0..200 {
        let x = -400.0 + 4.0 * i as f64;
        assert!((a.eval(x) - b.eval(x)).norm() <= bound * (1.0 + 1e-12));
    }
}
