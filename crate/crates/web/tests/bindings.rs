use klein_web::{reflection_curve_points, stationary_field_rows, Packet};

#[test]
fn curve_skips_boundaries() {
    let pts = reflection_curve_points(1.0, 4.0, 1.0, 3.0, 5).unwrap();
    // E = 1 and E = 3 sit on zone boundaries.
    assert_eq!(pts.len(), 6);
    assert_eq!(pts[2], 2.0);
    assert!((pts[3] - 0.25).abs() < 1e-12);
    assert!(reflection_curve_points(1.0, 4.0, 2.0, 1.5, 5).is_err());
}

#[test]
fn combined_field_carries_no_current() {
    let rows = stationary_field_rows(1.0, 4.0, 2.0, -5.0, 5.0, 11, true).unwrap();
    for r in rows.chunks(5) {
        let j = 2.0 * (r[1] * r[4] - r[2] * r[3]);
        assert!(j.abs() < 1e-12, "J = {j} at x = {}", r[0]);
    }
    let rows = stationary_field_rows(1.0, 4.0, 2.0, -5.0, 5.0, 11, false).unwrap();
    let j = 2.0 * (rows[1] * rows[4] - rows[2] * rows[3]);
    assert!(j > 0.1);
}

#[test]
fn packet_reports_diagnostics() {
    let p = Packet::build(1.0, 4.0, 6.0, 0.1, 64, true).unwrap();
    let out = p.sample(p.final_time(), 10).unwrap();
    let n = out.len();
    assert_eq!((n - 3) % 2, 0);
    let trans = out[n - 1];
    assert!(trans > 0.9 && trans < 1.0, "{trans}");
    assert!(Packet::build(1.0, 4.0, 0.5, 0.1, 64, true).is_err());
}
