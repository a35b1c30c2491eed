use std::f64::consts::PI;

use dyadic::bumps::Profiles;
use dyadic::grid::{Grid1D, Grid2D};
use dyadic::norms::lp_norm;
use dyadic::rough::*;
use dyadic::Error;

fn prof() -> Profiles {
    Profiles::default()
}

#[test]
fn level_of_boundaries() {
    assert_eq!(level_of(0.0), 0);
    assert_eq!(level_of(-1.0), 0);
    assert_eq!(level_of(1.0 + 1e-12), 1);
    assert_eq!(level_of(2.0), 1);
    assert_eq!(level_of(-2.0000001), 2);
    assert_eq!(level_of(4.0), 2);
    assert_eq!(level_of(32.0), 5);
    assert_eq!(level_of(33.0), 6);
}

#[test]
fn bounded_omega_has_only_level_zero() {
    let om = odd_harmonics(256, 3).unwrap();
    assert!(om.linf() <= 1.0 + 1.0 / 3.0 + 1.0 / 5.0);
    let om = om.map(|v| v / 1.6);
    let s = level_split(&om);
    assert_eq!(s.pieces.keys().copied().collect::<Vec<_>>(), vec![0]);
    assert_eq!(s.mu_max(), 0);
}

#[test]
fn two_valued_omega_lands_on_one_level() {
    let om = SphereFunction::from_fn(64, |t| if t < PI { 32.0 } else { -32.0 }).unwrap();
    let s = level_split(&om);
    assert_eq!(s.pieces.keys().copied().collect::<Vec<_>>(), vec![5]);
    assert!((s.masses[&5] - 32.0).abs() < 1e-12);
}

#[test]
fn split_pieces_sum_back_and_have_mean_zero() {
    let om = SphereFunction::new(vec![0.5, 3.0, -40.0, 0.0, 7.5, -1.5, 2.0, 100.0]).unwrap();
    let s = level_split(&om);
    assert_eq!(s.pieces.keys().copied().collect::<Vec<_>>(), vec![0, 1, 2, 3, 6, 7]);
    let mean = om.mean();
    for (a, b) in s.sum().iter().zip(om.values()) {
        assert!((a - (b - mean)).abs() < 1e-12);
    }
    for (mu, piece) in &s.pieces {
        assert!(piece.mean().abs() < 1e-12);
        // ‖Ω^μ‖₁ ≤ 2 ∫_{D^μ}|Ω|
        assert!(piece.l1() <= 2.0 * s.masses[mu] + 1e-12, "μ = {mu}");
        for &i in &s.sets[mu] {
            assert_eq!(level_of(om.values()[i]), *mu);
        }
    }
}

#[test]
fn generators_and_projection() {
    let om = odd_harmonics(512, 4).unwrap();
    assert!(om.mean().abs() < 1e-14);
    for i in 0..256 {
        assert!((om.values()[i] + om.values()[i + 256]).abs() < 1e-12);
    }
    let p = project_vanishing(&generate("one-plus-cos", 128, 0.0).unwrap());
    assert!(p.mean().abs() < 1e-14);
    assert!((p.eval(0.3) - 0.3f64.cos()).abs() < 1e-12);
    assert!(generate("random", 100, 5.0).unwrap().mean().abs() < 1e-14);
    assert_eq!(generate("random", 100, 5.0).unwrap(), generate("random", 100, 5.0).unwrap());
    let sp = spike(4096, 64.0, 1.0).unwrap();
    assert!(sp.mean().abs() < 1e-12);
    assert!(matches!(generate("nope", 16, 0.0), Err(Error::Config(_))));
    assert!(SphereFunction::new(vec![1.0]).is_err());
}

#[test]
fn sphere_interpolation() {
    // few harmonics: exact between samples
    let om = harmonics(16, &[(1, 1.0, 0.0), (3, 0.0, 0.5)]).unwrap();
    for t in [0.1, 1.234, 5.9, -0.7] {
        assert!((om.eval(t) - (t.cos() + 0.5 * (3.0 * t).sin())).abs() < 1e-12);
    }
    // many harmonics: periodic linear interpolation
    let om = generate("random", 64, 2.0).unwrap();
    let h = 2.0 * PI / 64.0;
    let t = 10.25 * h;
    assert!((om.eval(t) - 0.75 * om.values()[10] - 0.25 * om.values()[11]).abs() < 1e-12);
    assert!((om.eval(63.5 * h) - 0.5 * (om.values()[63] + om.values()[0])).abs() < 1e-12);
}

#[test]
fn sphere_csv_roundtrip() {
    let dir = std::env::temp_dir();
    let path = dir.join(format!("dyadic-omega-{}.csv", std::process::id()));
    let om = two_level(64, 8.0, 0.25).unwrap();
    om.write_csv(&path).unwrap();
    assert_eq!(SphereFunction::read_csv(&path).unwrap(), om);
    std::fs::write(&path, "theta,value\n0,1\n0.5,2\n").unwrap();
    assert!(matches!(SphereFunction::read_csv(&path), Err(Error::InvalidGrid(_))));
    std::fs::remove_file(path).ok();
}

#[test]
fn orlicz_at_zero_is_l1() {
    let om = two_level(256, 8.0, 0.25).unwrap();
    assert!((orlicz_norm(&om, 0.0).unwrap().value - om.l1()).abs() < 1e-13);
    assert!(orlicz_norm(&om, 1.0).unwrap().value > om.l1());
}

fn small_dec(om: &SphereFunction) -> KernelDecomposition {
    drf_decompose(om, &prof(), Grid2D::new(32.0, 256).unwrap(), (-3, 0), (-1, 0)).unwrap()
}

#[test]
fn decomposition_bands_and_telescoping() {
    let om = odd_harmonics(1024, 2).unwrap();
    let dec = small_dec(&om);
    for j in -3..=0 {
        assert!(dec.out_of_band(j).unwrap() < 1e-12, "j = {j}");
    }
    assert!(dec.telescoping_residual() < 1e-12);
    assert!(dec.piece(1, 0).is_err());
    assert!(dec.piece(0, 1).is_err());
}

#[test]
fn decomposition_guards() {
    let om = odd_harmonics(256, 1).unwrap();
    let g = Grid2D::new(32.0, 128).unwrap();
    assert!(matches!(drf_decompose(&om, &prof(), g, (0, 2), (0, 0)), Err(Error::Nyquist(_))));
    assert!(matches!(drf_decompose(&om, &prof(), g, (-1, 0), (-5, 0)), Err(Error::OutOfRange { .. })));
    assert!(drf_decompose(&om, &prof(), g, (0, -1), (0, 0)).is_err());
}

#[test]
fn dilates_agree_with_direct_sampling() {
    let om = odd_harmonics(2048, 2).unwrap();
    let dec = drf_decompose(&om, &prof(), Grid2D::new(16.0, 1024).unwrap(), (-1, 0), (-1, 0)).unwrap();
    for (j, k) in [(0, 0), (-1, 0), (0, -1), (-1, -1)] {
        let r = dec.self_similarity_residual(j, k).unwrap();
        assert!(r < 1e-8, "j = {j} k = {k}: {r:e}");
    }
}

#[test]
fn small_frequency_slopes() {
    let p = prof();
    let g = Grid2D::new(64.0, 512).unwrap();
    let van = drf_decompose(&odd_harmonics(2048, 2).unwrap(), &p, g, (0, 0), (0, 0)).unwrap();
    let one = drf_decompose(&odd_harmonics(2048, 2).unwrap().map(|v| v + 1.0), &p, g, (0, 0), (0, 0)).unwrap();
    let (s_van, _) = small_xi_slope(&van, 1e-4, 1e-2);
    let (s_one, _) = small_xi_slope(&one, 1e-4, 1e-2);
    assert!((s_van - 1.0).abs() < 0.05, "{s_van}");
    assert!(s_one.abs() < 0.05, "{s_one}");
}

#[test]
fn mikhlin_lattice_and_polar_agree() {
    let om = odd_harmonics(2048, 2).unwrap();
    let dec = drf_decompose(&om, &prof(), Grid2D::new(64.0, 512).unwrap(), (-2, 0), (0, 0)).unwrap();
    assert!(mikhlin_check(&dec, 1, 2).is_err());
    for j in -2..=0 {
        let rep = mikhlin_check(&dec, j, 2).unwrap();
        assert_eq!(rep.constants.len(), 6);
        let lattice = rep.get((0, 0)).unwrap();
        let polar = mikhlin_zero_order(&dec, j, 33, 128);
        assert!((lattice / polar - 1.0).abs() < 0.05, "j = {j}: {lattice} vs {polar}");
        assert!(rep.constants.iter().all(|(_, v)| v.is_finite() && *v > 0.0));
    }
}

#[test]
fn t_omega_vanishes_for_zero_omega() {
    let g1 = Grid1D::new(32.0, 256).unwrap();
    let d = Dictionary::random(g1, 2, (4, 40), 1);
    let zero = SphereFunction::new(vec![0.0; 64]).unwrap();
    let dec = small_dec(&zero);
    let rep = apply_t_omega(&dec, &d.functions[0], &d.functions[1], (-3, 0)).unwrap();
    assert_eq!(rep.output.max_abs(), 0.0);
    assert_eq!(rep.per_j.len(), 4);
}

#[test]
fn t_omega_output_is_sum_of_levels() {
    let g1 = Grid1D::new(32.0, 256).unwrap();
    let d = Dictionary::random(g1, 2, (4, 40), 2);
    let dec = small_dec(&odd_harmonics(1024, 2).unwrap());
    let all = apply_t_omega(&dec, &d.functions[0], &d.functions[1], (-3, 0)).unwrap();
    let mut acc = dyadic::grid::SampledFunction1D::zeros(g1);
    for j in -3..=0 {
        let one = apply_t_omega(&dec, &d.functions[0], &d.functions[1], (j, j)).unwrap();
        assert_eq!(one.per_j, vec![all.per_j[(j + 3) as usize]]);
        acc = acc.add(&one.output).unwrap();
    }
    assert!(acc.sub(&all.output).unwrap().max_abs() < 1e-13 * all.output.max_abs().max(1e-300));
    // linear in Ω
    let dec2 = small_dec(&odd_harmonics(1024, 2).unwrap().map(|v| -2.0 * v));
    let neg = apply_t_omega(&dec2, &d.functions[0], &d.functions[1], (-3, 0)).unwrap();
    let back = neg.output.add(&all.output.scale(dyadic::C64::new(2.0, 0.0))).unwrap();
    assert!(back.max_abs() < 1e-12 * lp_norm(&all.output, f64::INFINITY));
}

#[test]
fn dictionary_is_seeded_and_band_limited() {
    let g = Grid1D::new(16.0, 128).unwrap();
    let a = Dictionary::random(g, 3, (5, 9), 42);
    let b = Dictionary::random(g, 3, (5, 9), 42);
    assert_eq!(a.functions, b.functions);
    assert_ne!(a.functions[0], a.functions[1]);
    let s = a.functions[0].forward_transform();
    for m in -64..64i64 {
        if !(5..=9).contains(&m.abs()) {
            assert!(s.coeff(m).norm() < 1e-12);
        }
    }
}

#[test]
fn fit_delta_recovers_exponent() {
    let cells: Vec<NormCell> =
        (-4..=0).map(|j| NormCell { j, mu: 3, value: 2f64.powf(-1.5 * j as f64) * 7.0, mass: 1.0 }).collect();
    assert!((fit_delta(&cells, 3).unwrap() - 1.5).abs() < 1e-12);
    assert!(fit_delta(&cells, 2).is_none());
}

#[test]
fn level_table_covers_every_level() {
    let om = SphereFunction::from_fn(256, |t| if t < PI / 2.0 { 12.0 } else if t < PI { -0.5 } else { -3.5 }).unwrap();
    let split = level_split(&om);
    let g1 = Grid1D::new(32.0, 128).unwrap();
    let dict = Dictionary::random(g1, 3, (2, 20), 4);
    let cells = level_norm_table(&om, &prof(), Grid2D::new(32.0, 256).unwrap(), (-2, -1), &dict).unwrap();
    let mus: std::collections::BTreeSet<u32> = cells.iter().map(|c| c.mu).collect();
    assert_eq!(mus, split.pieces.keys().copied().collect());
    for c in &cells {
        assert_eq!(c.mass, split.masses[&c.mu]);
        assert!(c.value >= 0.0 && c.value.is_finite());
    }
    assert_eq!(cells.len(), 2 * mus.len());
}
