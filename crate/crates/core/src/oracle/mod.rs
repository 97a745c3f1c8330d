//! Brute-force check of the closed-form amplitudes.
//!
//! The sharp step (or barrier) is replaced by a smooth profile of width `a`,
//! the first-order Dirac system is integrated numerically across it, the
//! numerical field is projected onto the asymptotic plane-wave bases and the
//! resulting amplitudes are extrapolated to `a → 0`. Nothing here uses the
//! closed forms of [`crate::scatter`].

pub mod ode;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kinematics::{Channel, PhysParams};
use crate::spinor::Spinor2;
use ode::{integrate_segment, Tolerance, Trajectory};

pub const DEFAULT_TOL: f64 = 1e-10;

/// Default smoothing widths for [`sharp_limit`].
pub const DEFAULT_WIDTHS: [f64; 3] = [4e-3, 2e-3, 1e-3];

/// Edge half-width, in units of `a`, beyond which the profile is flat to
/// double precision (`e^{-40} ≈ 4e-18`).
const EDGE_HALF_WIDTH: f64 = 40.0;

const LOCAL_TOL_FACTOR: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileShape {
    /// `V(x) = V0 / (1 + e^{-x/a})`.
    SauterStep,
    /// Rising edge at `0` and falling edge at `width`, both Sauter shaped.
    SmoothedBarrier { width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothProfile {
    pub height: f64,
    pub smoothing: f64,
    pub shape: ProfileShape,
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl SmoothProfile {
    pub fn step(height: f64, smoothing: f64) -> Result<Self> {
        Self::checked(height, smoothing, ProfileShape::SauterStep)
    }

    pub fn barrier(height: f64, width: f64, smoothing: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::NonpositiveWidth(width));
        }
        Self::checked(height, smoothing, ProfileShape::SmoothedBarrier { width })
    }

    fn checked(height: f64, smoothing: f64, shape: ProfileShape) -> Result<Self> {
        if !(smoothing > 0.0 && smoothing.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "smoothing width must be positive, got {smoothing}"
            )));
        }
        if !height.is_finite() {
            return Err(Error::InvalidParams(format!(
                "height must be finite, got {height}"
            )));
        }
        Ok(Self {
            height,
            smoothing,
            shape,
        })
    }

    pub fn potential(&self, x: f64) -> f64 {
        let a = self.smoothing;
        match self.shape {
            ProfileShape::SauterStep => self.height * logistic(x / a),
            ProfileShape::SmoothedBarrier { width } => {
                self.height * (logistic(x / a) - logistic((x - width) / a))
            }
        }
    }

    /// Potential as `x → +∞`.
    pub fn right_asymptote(&self) -> f64 {
        match self.shape {
            ProfileShape::SauterStep => self.height,
            ProfileShape::SmoothedBarrier { .. } => 0.0,
        }
    }

    fn edges(&self) -> Vec<f64> {
        match self.shape {
            ProfileShape::SauterStep => vec![0.0],
            ProfileShape::SmoothedBarrier { width } => vec![0.0, width],
        }
    }

    /// Rightmost point at which the profile still varies appreciably.
    fn right_edge(&self) -> f64 {
        self.edges().last().copied().unwrap_or(0.0)
    }
}

/// Numerical solution of the Dirac system on a smooth profile.
///
/// Two fundamental solutions are carried, seeded at `x_right` with the
/// right-region right mode (`outgoing`) and left mode (`incoming`).
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub mass: f64,
    pub energy: f64,
    pub profile: SmoothProfile,
    pub left: Channel,
    pub right: Channel,
    /// Ascending sample positions.
    pub grid: Vec<f64>,
    pub outgoing: Vec<Spinor2>,
    pub incoming: Vec<Spinor2>,
    pub steps_rejected: usize,
}

/// Integration window `(x_left, x_right)` reaching the asymptotic flats.
pub fn default_window(mass: f64, profile: &SmoothProfile, energy: f64) -> Result<(f64, f64)> {
    let (left, right) = asymptotic_channels(mass, profile, energy)?;
    let k_min = left.wavenumber().min(right.wavenumber());
    let reach = (EDGE_HALF_WIDTH * profile.smoothing).max(5.0 / k_min);
    Ok((-reach, profile.right_edge() + reach))
}

fn asymptotic_channels(
    mass: f64,
    profile: &SmoothProfile,
    energy: f64,
) -> Result<(Channel, Channel)> {
    let tolerance = 1e-9 * mass.max(1.0);
    let left = Channel::for_region(mass, energy, 0.0, tolerance)?;
    if !matches!(left, Channel::Particle { .. }) {
        return Err(Error::SubThresholdEnergy { energy, mass });
    }
    let right = Channel::for_region(mass, energy, profile.right_asymptote(), tolerance)?;
    Ok((left, right))
}

/// Integrates `ψ⁺' = (E - V + m) ψ⁻`, `ψ⁻' = (m + V - E) ψ⁺` from `x_right`
/// down to `x_left` for both fundamental solutions.
pub fn integrate_dirac(
    mass: f64,
    profile: &SmoothProfile,
    energy: f64,
    x_left: f64,
    x_right: f64,
    tol: f64,
) -> Result<OdeSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let a = profile.smoothing;
    if !(x_left < -10.0 * a && x_right > profile.right_edge() + 10.0 * a) {
        return Err(Error::InvalidParams(format!(
            "window [{x_left}, {x_right}] does not reach the asymptotic flats"
        )));
    }
    let (left, right) = asymptotic_channels(mass, profile, energy)?;

    let rhs = |x: f64, y: &[Complex64; 4]| {
        let v = profile.potential(x);
        let up = energy - v + mass;
        let down = mass + v - energy;
        [y[1] * up, y[0] * down, y[3] * up, y[2] * down]
    };

    // Breakpoints: fine steps inside each edge, free steps elsewhere.
    let fine = 0.5 * a;
    let coarse = 0.25 * std::f64::consts::PI / left.wavenumber().max(right.wavenumber()).max(mass);
    let mut segments: Vec<(f64, f64, f64)> = Vec::new();
    let mut cursor = x_right;
    for &edge in profile.edges().iter().rev() {
        let hi = (edge + EDGE_HALF_WIDTH * a).min(cursor);
        let lo = (edge - EDGE_HALF_WIDTH * a).max(x_left);
        if hi < cursor {
            segments.push((cursor, hi, coarse));
        }
        if lo < hi {
            segments.push((hi, lo, fine));
        }
        cursor = lo;
    }
    if x_left < cursor {
        segments.push((cursor, x_left, coarse));
    }

    let out0 = right.right_mode(x_right);
    let in0 = right.left_mode(x_right);
    let mut traj: Trajectory<4> = Trajectory {
        x: vec![x_right],
        y: vec![[out0.upper, out0.lower, in0.upper, in0.lower]],
        rejected: 0,
    };
    // Local error control is tightened so that the accumulated error over
    // the whole window stays below `tol`.
    let tolerance = Tolerance::uniform(LOCAL_TOL_FACTOR * tol);
    for (from, to, max_step) in segments {
        integrate_segment(&rhs, from, to, max_step, tolerance, &mut traj)?;
    }

    let n = traj.x.len();
    let mut grid = Vec::with_capacity(n);
    let mut outgoing = Vec::with_capacity(n);
    let mut incoming = Vec::with_capacity(n);
    for (x, y) in traj.x.iter().zip(&traj.y).rev() {
        grid.push(*x);
        outgoing.push(Spinor2::new(y[0], y[1]));
        incoming.push(Spinor2::new(y[2], y[3]));
    }
    Ok(OdeSolution {
        mass,
        energy,
        profile: *profile,
        left,
        right,
        grid,
        outgoing,
        incoming,
        steps_rejected: traj.rejected,
    })
}

/// Amplitudes read off a numerical solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleAmplitudes {
    /// Reflection amplitude for unit electron incidence from the left.
    pub reflection: Complex64,
    /// Transmitted flux per unit incident flux.
    pub transmission_flux: f64,
    /// `|R|² + T - 1`, a measure of integration error.
    pub defect: f64,
    /// Reflection amplitude for a unit wave incident from the right with no
    /// electron incidence from the left; `None` when the right region is
    /// not an antiparticle channel.
    pub virtual_reflection: Option<Complex64>,
    pub current_left: f64,
    pub current_right: f64,
}

pub fn extract_amplitudes(sol: &OdeSolution) -> Result<OracleAmplitudes> {
    let x_left = sol.grid[0];
    let x_right = *sol.grid.last().unwrap();
    let (incident, reflected) = sol.left.project(sol.outgoing[0], x_left)?;
    if incident.norm() == 0.0 {
        return Err(Error::ProjectionIllConditioned(f64::INFINITY));
    }
    let reflection = reflected / incident;
    let current_left = sol.outgoing[0].current();
    let current_right = sol.outgoing.last().unwrap().current();
    let transmission_flux = current_right / (incident.norm_sqr() * sol.left.flux());
    let virtual_reflection = match sol.right {
        Channel::Antiparticle { .. } => {
            let (from_right, _) = sol.left.project(sol.incoming[0], x_left)?;
            Some(-from_right / incident)
        }
        _ => None,
    };
    debug_assert!(x_right > x_left);
    Ok(OracleAmplitudes {
        reflection,
        transmission_flux,
        defect: reflection.norm_sqr() + transmission_flux - 1.0,
        virtual_reflection,
        current_left,
        current_right,
    })
}

/// Integrates and projects in one go, using [`default_window`].
pub fn solve_profile(
    mass: f64,
    profile: &SmoothProfile,
    energy: f64,
    tol: f64,
) -> Result<OracleAmplitudes> {
    let (x_left, x_right) = default_window(mass, profile, energy)?;
    extract_amplitudes(&integrate_dirac(
        mass, profile, energy, x_left, x_right, tol,
    )?)
}

/// Result of extrapolating a sequence of smooth-profile runs to `a → 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SharpLimit {
    pub reflection: Complex64,
    pub transmission_flux: f64,
    pub virtual_reflection: Option<Complex64>,
    /// Fitted exponent `q` of `R(a) = R₀ + c·a^q`.
    pub order: f64,
    /// `(a, R(a))` for each run.
    pub samples: Vec<(f64, Complex64)>,
}

/// Difference below which a run sequence is treated as already converged.
const CONVERGED: f64 = 1e-9;

fn check_sequence(widths: &[f64]) -> Result<()> {
    if widths.len() < 3 {
        return Err(Error::InvalidSequence(format!(
            "need at least 3 smoothing widths, got {}",
            widths.len()
        )));
    }
    if widths.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::InvalidSequence(
            "smoothing widths must be positive".into(),
        ));
    }
    if widths.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidSequence(
            "smoothing widths must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Fits `R(a) = R₀ + c·a^q` to the last three samples and returns `(R₀, q)`.
///
/// The exponent solves `(a₁^q - a₂^q)/(a₂^q - a₃^q) = |R₁ - R₂|/|R₂ - R₃|`;
/// earlier samples, if any, must be reproduced by the fit.
pub fn extrapolate(widths: &[f64], values: &[Complex64]) -> Result<(Complex64, f64)> {
    check_sequence(widths)?;
    let n = widths.len();
    let (a1, a2, a3) = (widths[n - 3], widths[n - 2], widths[n - 1]);
    let (r1, r2, r3) = (values[n - 3], values[n - 2], values[n - 1]);
    let (d1, d2) = (r1 - r2, r2 - r3);
    if d1.norm() < CONVERGED && d2.norm() < CONVERGED {
        // Already flat at the integrator's noise level; any q > 0 fits.
        return Ok((r3, f64::INFINITY));
    }
    let ratio = d1.norm() / d2.norm();
    let g = |q: f64| (a1.powf(q) - a2.powf(q)) / (a2.powf(q) - a3.powf(q));
    let (mut lo, mut hi) = (1e-3, 12.0);
    if !(ratio > g(lo) && ratio < g(hi)) {
        return Err(Error::NoConvergence(format!(
            "difference ratio {ratio:.4} outside the range of any power law"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < ratio {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = 0.5 * (lo + hi);
    let c = d2 / (a2.powf(q) - a3.powf(q));
    let r0 = r3 - c * a3.powf(q);
    // The two differences must point the same way in the complex plane.
    let alignment = (d1 / d2).im.abs() / (d1 / d2).norm();
    if alignment > 0.8 || (d1 / d2).re <= 0.0 {
        return Err(Error::NoConvergence(format!(
            "successive corrections are not aligned (misalignment {alignment:.3})"
        )));
    }
    for (&a, &r) in widths.iter().zip(values).take(n - 3) {
        let predicted = r0 + c * a.powf(q);
        if (predicted - r).norm() > 0.1 * (r - r3).norm() + CONVERGED {
            return Err(Error::NoConvergence(format!(
                "fit does not reproduce the run at a = {a:e}"
            )));
        }
    }
    Ok((r0, q))
}

fn extrapolate_with_order(widths: &[f64], values: &[Complex64], q: f64) -> Complex64 {
    let n = widths.len();
    let (a2, a3) = (widths[n - 2], widths[n - 1]);
    let (r2, r3) = (values[n - 2], values[n - 1]);
    if !q.is_finite() {
        return r3;
    }
    r3 - (r2 - r3) * (a3.powf(q) / (a2.powf(q) - a3.powf(q)))
}

fn run_sequence<P>(
    mass: f64,
    energy: f64,
    widths: &[f64],
    tol: f64,
    profile: P,
) -> Result<SharpLimit>
where
    P: Fn(f64) -> Result<SmoothProfile>,
{
    check_sequence(widths)?;
    let runs = widths
        .iter()
        .map(|&a| solve_profile(mass, &profile(a)?, energy, tol))
        .collect::<Result<Vec<_>>>()?;
    let reflections: Vec<Complex64> = runs.iter().map(|r| r.reflection).collect();
    let (reflection, order) = extrapolate(widths, &reflections)?;
    let flux: Vec<Complex64> = runs
        .iter()
        .map(|r| Complex64::new(r.transmission_flux, 0.0))
        .collect();
    let virtual_reflection = runs
        .iter()
        .map(|r| r.virtual_reflection)
        .collect::<Option<Vec<_>>>()
        .map(|v| extrapolate_with_order(widths, &v, order));
    Ok(SharpLimit {
        reflection,
        transmission_flux: extrapolate_with_order(widths, &flux, order).re,
        virtual_reflection,
        order,
        samples: widths.iter().copied().zip(reflections).collect(),
    })
}

/// Sharp-step amplitudes predicted by Sauter steps of decreasing width.
pub fn sharp_limit(params: &PhysParams, energy: f64, widths: &[f64]) -> Result<SharpLimit> {
    sharp_limit_with_tol(params, energy, widths, DEFAULT_TOL)
}

/// [`sharp_limit`] with an explicit integrator tolerance.
pub fn sharp_limit_with_tol(
    params: &PhysParams,
    energy: f64,
    widths: &[f64],
    tol: f64,
) -> Result<SharpLimit> {
    run_sequence(params.mass(), energy, widths, tol, |a| {
        SmoothProfile::step(params.height(), a)
    })
}

/// Square-barrier amplitudes predicted by smoothed barriers of decreasing
/// edge width.
pub fn sharp_limit_barrier(
    params: &PhysParams,
    width: f64,
    energy: f64,
    widths: &[f64],
) -> Result<SharpLimit> {
    run_sequence(params.mass(), energy, widths, DEFAULT_TOL, |a| {
        SmoothProfile::barrier(params.height(), width, a)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_shapes() {
        let step = SmoothProfile::step(4.0, 0.1).unwrap();
        assert!(step.potential(-10.0) < 1e-30);
        assert!((step.potential(10.0) - 4.0).abs() < 1e-30);
        assert!((step.potential(0.0) - 2.0).abs() < 1e-15);
        let xs: Vec<f64> = (-100..=100).map(|i| i as f64 * 0.01).collect();
        assert!(xs
            .windows(2)
            .all(|w| step.potential(w[1]) >= step.potential(w[0])));

        let barrier = SmoothProfile::barrier(4.0, 1.0, 0.01).unwrap();
        assert!((barrier.potential(0.5) - 4.0).abs() < 1e-12);
        assert!(barrier.potential(2.0) < 1e-30 && barrier.potential(-1.0) < 1e-30);
        assert!(SmoothProfile::barrier(4.0, 0.0, 0.01).is_err());
        assert!(SmoothProfile::step(4.0, 0.0).is_err());
    }

    #[test]
    fn free_particle_plane_wave() {
        let profile = SmoothProfile::step(0.0, 1e-2).unwrap();
        let (m, e) = (1.0, 2.5);
        let sol = integrate_dirac(m, &profile, e, -20.0, 20.0, 1e-10).unwrap();
        let k = (e * e - m * m).sqrt();
        let ch = sol.left;
        assert!((ch.wavenumber() - k).abs() < 1e-15);
        // The outgoing seed is a pure right-moving plane wave everywhere.
        let mut worst = 0.0f64;
        for (x, psi) in sol.grid.iter().zip(&sol.outgoing) {
            worst = worst.max(psi.max_abs_diff(&ch.right_mode(*x)));
        }
        assert!(worst < 1e-8, "worst deviation {worst:e}");
        let amps = extract_amplitudes(&sol).unwrap();
        assert!(amps.reflection.norm() < 1e-9);
        assert!(
            (amps.current_left - amps.current_right).abs() < 10.0 * 1e-10,
            "{amps:?}"
        );
    }

    #[test]
    fn window_must_reach_flats() {
        let profile = SmoothProfile::step(4.0, 0.1).unwrap();
        assert!(integrate_dirac(1.0, &profile, 2.0, -0.5, 10.0, 1e-10).is_err());
        assert!(integrate_dirac(1.0, &profile, 2.0, -10.0, 10.0, 0.0).is_err());
    }

    #[test]
    fn subthreshold_and_branch_inputs_fail() {
        let profile = SmoothProfile::step(4.0, 1e-3).unwrap();
        assert!(matches!(
            solve_profile(1.0, &profile, 0.5, 1e-10),
            Err(Error::SubThresholdEnergy { .. })
        ));
        assert!(matches!(
            solve_profile(1.0, &profile, 3.0, 1e-10),
            Err(Error::BranchPoint { .. })
        ));
    }

    #[test]
    fn sequence_validation() {
        let p = PhysParams::new(1.0, 4.0).unwrap();
        assert!(matches!(
            sharp_limit(&p, 2.0, &[1e-2, 1e-1, 1e-3]),
            Err(Error::InvalidSequence(_))
        ));
        assert!(matches!(
            sharp_limit(&p, 2.0, &[1e-2, 1e-3]),
            Err(Error::InvalidSequence(_))
        ));
    }

    #[test]
    fn extrapolation_recovers_power_law() {
        let widths = [0.08, 0.04, 0.02, 0.01];
        let r0 = Complex64::new(-0.3, 0.2);
        let c = Complex64::new(0.5, -1.0);
        let values: Vec<Complex64> = widths.iter().map(|&a: &f64| r0 + c * a.powf(1.7)).collect();
        let (fit, q) = extrapolate(&widths, &values).unwrap();
        assert!((fit - r0).norm() < 1e-12);
        assert!((q - 1.7).abs() < 1e-9);
    }

    #[test]
    fn extrapolation_rejects_divergence() {
        let widths = [0.04, 0.02, 0.01];
        let values = [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.001, 0.0),
            Complex64::new(0.1, 0.0),
        ];
        assert!(matches!(
            extrapolate(&widths, &values),
            Err(Error::NoConvergence(_))
        ));
    }
}
