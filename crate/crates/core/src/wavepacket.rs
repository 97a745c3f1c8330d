//! Gaussian wave packets built from exact stationary states.
//!
//! A packet is `ψ(x, t) = ∫ dE c(E) e^{-iEt} φ_E(x)` with `φ_E` the
//! stationary state of energy `E` normalized to `δ(E - E')`, evaluated by
//! the trapezoid rule on a uniform energy grid. Because the stationary
//! states are exact, the evolution has no spatial discretization error.
//!
//! In the Klein zone the stationary state is, by default, the electron
//! solution plus the flux-matched virtual solution (see
//! [`crate::scatter::solve_combined`]). That state contains a negative-energy
//! wave approaching the step from the right with the same flux as the
//! electron beam. Its norm is the packet's *virtual norm*; it sits under the
//! step before the collision and leaves to the right afterwards, and is
//! subtracted when the probability held under the step is reported.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kinematics::{classify_zone, kinematics, EnergyZone, PhysParams};
use crate::scatter::{solve, solve_combined, Family, ScatterSolution};
use crate::spinor::Spinor2;

/// How Klein-zone components of a packet are represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KleinTreatment {
    /// Electron incidence only; the step emits a negative-energy beam.
    Traditional,
    /// Electron incidence plus flux-matched virtual incidence from the right.
    #[default]
    VirtualIncidence,
}

/// Energy samples and complex spectral weights of a packet.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    pub params: PhysParams,
    pub energies: Vec<f64>,
    pub weights: Vec<Complex64>,
    /// Trapezoid weight of each sample (includes the grid spacing).
    pub quadrature: Vec<f64>,
    pub zones: Vec<EnergyZone>,
    pub center: f64,
    pub sigma: f64,
    /// Position of the incident electron lump at `t = 0`.
    pub launch: f64,
    pub treatment: KleinTreatment,
    /// The untruncated spectrum crosses a zone boundary.
    pub straddles: bool,
}

/// Group velocity `k/E` of a free electron.
fn group_velocity(mass: f64, energy: f64) -> f64 {
    ((energy - mass) * (energy + mass)).sqrt() / energy
}

/// Gaussian spectrum `c(E) ∝ exp(-(E - E0)²/4σ²)` on `E0 ± 4σ`.
///
/// Samples at or below the rest mass, or within the branch tolerance of a
/// zone boundary, are dropped and the remainder renormalized; a spectrum
/// crossing a zone boundary is flagged in [`SpectralGrid::straddles`].
pub fn build_gaussian(
    params: &PhysParams,
    center: f64,
    sigma: f64,
    n_samples: usize,
) -> Result<SpectralGrid> {
    if n_samples < 16 {
        return Err(Error::InvalidPacket(format!(
            "need at least 16 samples, got {n_samples}"
        )));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidPacket(format!(
            "spectral width must be positive, got {sigma}"
        )));
    }
    let m = params.mass();
    if !(center.is_finite() && center > m) {
        return Err(Error::InvalidPacket(format!(
            "centre energy {center} must exceed the rest mass {m}"
        )));
    }
    let lo = center - 4.0 * sigma;
    let hi = center + 4.0 * sigma;
    let spacing = (hi - lo) / (n_samples - 1) as f64;
    let straddles = params.boundaries().iter().any(|&b| lo < b && b < hi);

    let mut energies = Vec::with_capacity(n_samples);
    let mut weights = Vec::with_capacity(n_samples);
    let mut quadrature = Vec::with_capacity(n_samples);
    let mut zones = Vec::with_capacity(n_samples);
    for j in 0..n_samples {
        let e = lo + j as f64 * spacing;
        match classify_zone(params, e) {
            Ok(EnergyZone::SubThreshold) | Err(_) => continue,
            Ok(zone) => {
                let end = j == 0 || j == n_samples - 1;
                energies.push(e);
                weights.push(Complex64::new(
                    (-(e - center).powi(2) / (4.0 * sigma * sigma)).exp(),
                    0.0,
                ));
                quadrature.push(if end { 0.5 * spacing } else { spacing });
                zones.push(zone);
            }
        }
    }
    if energies.is_empty() {
        return Err(Error::InvalidPacket("no admissible energy samples".into()));
    }
    let norm: f64 = weights
        .iter()
        .zip(&quadrature)
        .map(|(w, q)| w.norm_sqr() * q)
        .sum::<f64>()
        .sqrt();
    for w in &mut weights {
        *w /= norm;
    }
    // Spatial rms width of |ψ|² is v/(2σ); launch eight widths upstream.
    let width = group_velocity(m, center) / (2.0 * sigma);
    Ok(SpectralGrid {
        params: *params,
        energies,
        weights,
        quadrature,
        zones,
        center,
        sigma,
        launch: -8.0 * width,
        treatment: KleinTreatment::default(),
        straddles,
    })
}

impl SpectralGrid {
    pub fn with_launch(mut self, launch: f64) -> Self {
        self.launch = launch;
        self
    }

    pub fn with_treatment(mut self, treatment: KleinTreatment) -> Self {
        self.treatment = treatment;
        self
    }

    /// `∫ |c(E)|² dE` by the trapezoid rule.
    pub fn norm(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.quadrature)
            .map(|(w, q)| w.norm_sqr() * q)
            .sum()
    }

    /// Spectral weight held in each zone.
    pub fn zone_fractions(&self) -> Vec<(EnergyZone, f64)> {
        let mut out: Vec<(EnergyZone, f64)> = Vec::new();
        for ((zone, w), q) in self.zones.iter().zip(&self.weights).zip(&self.quadrature) {
            let weight = w.norm_sqr() * q;
            match out.iter_mut().find(|(z, _)| z == zone) {
                Some((_, acc)) => *acc += weight,
                None => out.push((*zone, weight)),
            }
        }
        out
    }

    /// `a·self + b·other`; both grids must share the same energy samples.
    pub fn combine(
        &self,
        a: Complex64,
        other: &SpectralGrid,
        b: Complex64,
    ) -> Result<SpectralGrid> {
        if self.energies != other.energies
            || self.launch != other.launch
            || self.treatment != other.treatment
        {
            return Err(Error::InvalidPacket(
                "grids differ in samples, launch or treatment".into(),
            ));
        }
        let mut out = self.clone();
        for (w, o) in out.weights.iter_mut().zip(&other.weights) {
            *w = a * *w + b * o;
        }
        Ok(out)
    }

    fn stationary_state(&self, energy: f64, zone: EnergyZone) -> Result<ScatterSolution> {
        match (zone, self.treatment) {
            (EnergyZone::Klein, KleinTreatment::VirtualIncidence) => {
                solve_combined(&self.params, energy, None)
            }
            _ => solve(&self.params, energy, Family::Traditional),
        }
    }

    fn components(&self, time: f64) -> Result<Vec<Component>> {
        self.energies
            .iter()
            .zip(&self.zones)
            .zip(self.weights.iter().zip(&self.quadrature))
            .map(|((&e, &zone), (&w, &q))| {
                let solution = self.stationary_state(e, zone)?;
                let incident_flux = solution.kin.left().flux();
                let phase = Complex64::from_polar(1.0, -e * time - solution.kin.k * self.launch);
                Ok(Component {
                    coefficient: w * q * phase / (2.0 * PI * incident_flux).sqrt(),
                    solution,
                })
            })
            .collect()
    }

    /// Norm of the virtual negative-energy beam carried by the packet.
    pub fn virtual_norm(&self) -> f64 {
        self.energies
            .iter()
            .zip(&self.zones)
            .zip(self.weights.iter().zip(&self.quadrature))
            .filter(|((_, zone), _)| **zone == EnergyZone::Klein)
            .filter_map(|((&e, &zone), (w, q))| {
                let sol = self.stationary_state(e, zone).ok()?;
                let (right_in, _) = sol.right_coefficients();
                let ratio = right_in.norm_sqr() * sol.kin.right.flux() / sol.kin.left().flux();
                Some(w.norm_sqr() * q * ratio)
            })
            .sum()
    }

    /// Spectral average of the net transmitted flux fraction of each
    /// stationary state, computed from the closed forms alone.
    pub fn spectral_transmission(&self) -> Result<f64> {
        let mut acc = 0.0;
        for ((&e, &zone), (w, q)) in self
            .energies
            .iter()
            .zip(&self.zones)
            .zip(self.weights.iter().zip(&self.quadrature))
        {
            let sol = self.stationary_state(e, zone)?;
            let (right_in, right_out) = sol.right_coefficients();
            let net = (right_out.norm_sqr() - right_in.norm_sqr()) * sol.kin.right.flux()
                / sol.kin.left().flux();
            acc += w.norm_sqr() * q * net;
        }
        Ok(acc / self.norm())
    }

    /// Time after which the slowest significant component has returned as
    /// far from the step as it was launched, times a safety factor.
    pub fn asymptotic_time(&self) -> f64 {
        let m = self.params.mass();
        let slow = (self.center - 2.0 * self.sigma).max(m + 0.25 * (self.center - m));
        3.0 * self.launch.abs() / group_velocity(m, slow)
    }

    /// Uniform grid through `x = 0` wide enough to hold the packet at `time`.
    pub fn suggested_x_grid(&self, time: f64) -> Vec<f64> {
        let m = self.params.mass();
        let width = group_velocity(m, self.center) / (2.0 * self.sigma);
        let mut mirror = self.launch.abs();
        let mut k_max = 0.0f64;
        for &e in &self.energies {
            if let Ok(kin) = kinematics(&self.params, e) {
                k_max = k_max.max(kin.k).max(kin.right.wavenumber());
                if kin.zone == EnergyZone::Klein && (e - self.center).abs() <= 2.0 * self.sigma {
                    let v_right = kin.right.flux();
                    mirror = mirror.max(self.launch.abs() * v_right / kin.left().flux());
                }
            }
        }
        let dx = (std::f64::consts::PI / (8.0 * k_max.max(m))).min(0.05);
        let left = self.launch.abs() + time.abs() + 12.0 * width;
        let right = mirror + time.abs() + 12.0 * width;
        let lo = -(left / dx).ceil() as i64;
        let hi = (right / dx).ceil() as i64;
        (lo..=hi).map(|i| i as f64 * dx).collect()
    }
}

struct Component {
    coefficient: Complex64,
    solution: ScatterSolution,
}

/// Packet field on an x-grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketState {
    pub time: f64,
    pub x: Vec<f64>,
    pub field: Vec<Spinor2>,
    /// Reflected (left-moving) waves, on `x <= 0`; zero elsewhere.
    pub reflected: Vec<Spinor2>,
    /// Outgoing propagating waves under the step, on `x >= 0`; zero elsewhere.
    pub transmitted: Vec<Spinor2>,
    /// Waves approaching the step from the right, on `x >= 0`.
    pub incoming_right: Vec<Spinor2>,
    /// Virtual norm of the spectral grid the state came from.
    pub virtual_norm: f64,
    /// Spectral norm of the electron packet.
    pub spectral_norm: f64,
}

/// Trapezoid integral of `f` over grid nodes with `keep(x)`.
fn integrate(x: &[f64], values: &[Spinor2], keep: impl Fn(f64) -> bool) -> f64 {
    x.windows(2)
        .zip(values.windows(2))
        .filter(|(xs, _)| keep(xs[0]) && keep(xs[1]))
        .map(|(xs, vs)| 0.5 * (xs[1] - xs[0]) * (vs[0].density() + vs[1].density()))
        .sum()
}

impl PacketState {
    pub fn density(&self) -> Vec<f64> {
        self.field.iter().map(Spinor2::density).collect()
    }

    /// `∫ |ψ|² dx` over the grid.
    pub fn total_norm(&self) -> f64 {
        integrate(&self.x, &self.field, |_| true)
    }

    /// Norm of the electron packet on the grid: total minus virtual norm.
    pub fn physical_norm(&self) -> f64 {
        self.total_norm() - self.virtual_norm
    }
}

/// Evaluates the packet at `time` on `x_grid` without checking coverage.
pub fn evaluate_packet(grid: &SpectralGrid, time: f64, x_grid: &[f64]) -> Result<PacketState> {
    let components = grid.components(time)?;
    let n = x_grid.len();
    let mut field = vec![Spinor2::ZERO; n];
    let mut reflected = vec![Spinor2::ZERO; n];
    let mut transmitted = vec![Spinor2::ZERO; n];
    let mut incoming_right = vec![Spinor2::ZERO; n];
    for (i, &x) in x_grid.iter().enumerate() {
        for c in &components {
            let parts = c.solution.evaluate_parts(x);
            field[i] += parts.total() * c.coefficient;
            if x <= 0.0 {
                reflected[i] += c.solution.kin.left().left_mode(x)
                    * (c.solution.left_coefficients().1 * c.coefficient);
            }
            if x >= 0.0 {
                if c.solution.kin.right.is_propagating() {
                    transmitted[i] += parts.outgoing * c.coefficient;
                }
                incoming_right[i] += parts.incoming * c.coefficient;
            }
        }
    }
    Ok(PacketState {
        time,
        x: x_grid.to_vec(),
        field,
        reflected,
        transmitted,
        incoming_right,
        virtual_norm: grid.virtual_norm(),
        spectral_norm: grid.norm(),
    })
}

/// Fraction of the packet norm allowed outside the x-grid.
pub const MAX_NORM_OUTSIDE: f64 = 1e-3;

/// Evaluates the packet at `time`; fails if the grid misses more than
/// [`MAX_NORM_OUTSIDE`] of the norm.
pub fn evolve(grid: &SpectralGrid, time: f64, x_grid: &[f64]) -> Result<PacketState> {
    let state = evaluate_packet(grid, time, x_grid)?;
    let expected = state.spectral_norm + state.virtual_norm;
    let missing = (expected - state.total_norm()) / expected;
    if missing > MAX_NORM_OUTSIDE {
        return Err(Error::GridTooNarrow { missing, time });
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketDiagnostics {
    /// Norm of reflected waves in `x < 0`.
    pub refl_norm: f64,
    /// Norm under the step in excess of the virtual beam.
    pub pen_prob: f64,
    /// Norm of outgoing propagating waves under the step in excess of the
    /// virtual beam that has already reached the step.
    pub trans_norm: f64,
}

pub fn reflection_and_penetration(state: &PacketState) -> PacketDiagnostics {
    let scale = state.spectral_norm;
    let refl = integrate(&state.x, &state.reflected, |x| x <= 0.0);
    let under = integrate(&state.x, &state.field, |x| x >= 0.0);
    let out = integrate(&state.x, &state.transmitted, |x| x >= 0.0);
    let still_incoming = integrate(&state.x, &state.incoming_right, |x| x >= 0.0);
    PacketDiagnostics {
        refl_norm: refl / scale,
        pen_prob: (under - state.virtual_norm) / scale,
        trans_norm: (out - (state.virtual_norm - still_incoming)) / scale,
    }
}
