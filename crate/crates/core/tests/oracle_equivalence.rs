use klein_core::oracle::{
    default_window, extract_amplitudes, integrate_dirac, sharp_limit, solve_profile, SmoothProfile,
    DEFAULT_TOL, DEFAULT_WIDTHS,
};
use klein_core::*;

fn p4() -> PhysParams {
    PhysParams::new(1.0, 4.0).unwrap()
}

#[test]
fn klein_zone_extrapolation_matches_closed_form() {
    let p = p4();
    for i in 0..50 {
        let e = 1.02 + 1.96 * i as f64 / 49.0;
        let exact = solve_traditional(&p, e).unwrap();
        let limit = sharp_limit(&p, e, &DEFAULT_WIDTHS).unwrap();
        assert!(
            (limit.reflection - exact.left_coefficients().1).norm() <= 1e-4,
            "E = {e}: {} vs {}",
            limit.reflection,
            exact.left_coefficients().1
        );
        assert!(limit.order > 0.0, "E = {e}: order {}", limit.order);
        let virt = solve_virtual(&p, e).unwrap();
        assert!((limit.virtual_reflection.unwrap() - virt.right_coefficients().1).norm() <= 1e-4);
    }
}

#[test]
fn integration_conserves_current() {
    let p = p4();
    for e in [1.5, 2.0, 3.5, 6.0] {
        let profile = SmoothProfile::step(p.height(), 1e-2).unwrap();
        let (lo, hi) = default_window(1.0, &profile, e).unwrap();
        let sol = integrate_dirac(1.0, &profile, e, lo, hi, DEFAULT_TOL).unwrap();
        let amps = extract_amplitudes(&sol).unwrap();
        assert!(
            (amps.current_left - amps.current_right).abs() <= 10.0 * DEFAULT_TOL,
            "E = {e}: {amps:?}"
        );
    }
}

#[test]
fn raw_runs_at_fine_smoothing() {
    let profile = SmoothProfile::step(4.0, 1e-3).unwrap();
    let klein = solve_profile(1.0, &profile, 2.0, DEFAULT_TOL).unwrap();
    assert!((klein.reflection.norm_sqr() - 0.25).abs() < 1e-4);
    let evanescent = solve_profile(1.0, &profile, 3.5, DEFAULT_TOL).unwrap();
    assert!((evanescent.reflection.norm_sqr() - 1.0).abs() < 1e-6);
    let over = solve_profile(1.0, &profile, 6.0, DEFAULT_TOL).unwrap();
    assert!(over.defect.abs() < 1e-6);
}

#[test]
fn coarse_sequence_still_extrapolates() {
    let limit = sharp_limit(&p4(), 2.0, &[1e-1, 1e-2, 1e-3]).unwrap();
    assert!((limit.reflection - Complex64::new(-0.5, 0.0)).norm() < 1e-4);
}

#[test]
fn half_height_reflection_for_several_steps() {
    for v in [2.5, 4.0, 7.0, 12.0] {
        let p = PhysParams::new(1.0, v).unwrap();
        let limit = sharp_limit(&p, v / 2.0, &DEFAULT_WIDTHS).unwrap();
        assert!((limit.reflection.norm() - 2.0 / v).abs() < 1e-4, "V = {v}");
    }
}

#[test]
fn evanescent_phase_and_overbarrier_probabilities() {
    let p = p4();
    let ev = sharp_limit(&p, 3.5, &DEFAULT_WIDTHS).unwrap();
    let exact = solve_evanescent(&p, 3.5).unwrap().left_coefficients().1;
    assert!((ev.reflection.arg() - exact.arg()).abs() < 1e-4);

    let over = sharp_limit(&p, 6.0, &DEFAULT_WIDTHS).unwrap();
    let exact = solve_overbarrier(&p, 6.0).unwrap();
    assert!((over.reflection.norm_sqr() - exact.reflection_probability()).abs() < 1e-4);
    assert!((over.transmission_flux - exact.transmission_probability()).abs() < 1e-4);
}
