//! Physical parameters, energy zones and the constant-potential mode basis.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spinor::Spinor2;

/// Mass `m` and step height `V`, both in the same (arbitrary) energy unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    mass: f64,
    height: f64,
}

impl PhysParams {
    pub fn new(mass: f64, height: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidParams(format!(
                "mass must be positive, got {mass}"
            )));
        }
        if !(height.is_finite() && height > 0.0) {
            return Err(Error::InvalidParams(format!(
                "step height must be positive, got {height}"
            )));
        }
        Ok(Self { mass, height })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    /// The window `m < E < V - m` is non-empty only for `V > 2m`.
    pub fn has_klein_zone(&self) -> bool {
        self.height > 2.0 * self.mass
    }

    /// Distance from a branch point below which an energy is rejected.
    pub fn branch_tolerance(&self) -> f64 {
        1e-9 * self.mass.max(1.0)
    }

    /// Zone boundaries `[m, V - m, V + m]`.
    pub fn boundaries(&self) -> [f64; 3] {
        [self.mass, self.height - self.mass, self.height + self.mass]
    }

    /// Klein zone as an open interval, if it exists.
    pub fn klein_interval(&self) -> Option<(f64, f64)> {
        self.has_klein_zone()
            .then_some((self.mass, self.height - self.mass))
    }

    /// Evanescent zone `max(m, V - m) < E < V + m`.
    pub fn evanescent_interval(&self) -> (f64, f64) {
        (
            self.mass.max(self.height - self.mass),
            self.height + self.mass,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnergyZone {
    /// `E < m`: no propagating wave on the left.
    SubThreshold,
    /// `m < E < V - m`: negative-energy waves propagate under the step.
    Klein,
    /// `|E - V| < m` with `E > m`: the field decays under the step.
    Evanescent,
    /// `E > V + m`: positive-energy waves on both sides.
    OverBarrier,
}

impl EnergyZone {
    pub fn as_str(&self) -> &'static str {
        match self {
            EnergyZone::SubThreshold => "subthreshold",
            EnergyZone::Klein => "klein",
            EnergyZone::Evanescent => "evanescent",
            EnergyZone::OverBarrier => "overbarrier",
        }
    }
}

impl std::fmt::Display for EnergyZone {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify_zone(params: &PhysParams, energy: f64) -> Result<EnergyZone> {
    if !energy.is_finite() {
        return Err(Error::InvalidParams(format!(
            "energy must be finite, got {energy}"
        )));
    }
    let tolerance = params.branch_tolerance();
    if let Some(&boundary) = params
        .boundaries()
        .iter()
        .find(|&&b| (energy - b).abs() < tolerance)
    {
        return Err(Error::BranchPoint {
            energy,
            boundary,
            tolerance,
        });
    }
    let [lower, middle, upper] = params.boundaries();
    Ok(if energy < lower {
        EnergyZone::SubThreshold
    } else if energy < middle {
        EnergyZone::Klein
    } else if energy < upper {
        EnergyZone::Evanescent
    } else {
        EnergyZone::OverBarrier
    })
}

/// Mode structure of a region with constant potential, selected by the local
/// kinetic energy `ε = E - V_local`.
///
/// Every channel has a "right" mode (right-moving, or decaying to the right)
/// and a "left" mode (left-moving, or decaying to the left). Mode spinors are
/// normalized to unit `ψ†ψ` at `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Channel {
    /// `ε > m`: right mode `(1, iα) e^{ikx}`, left mode `(1, -iα) e^{-ikx}`.
    Particle { k: f64, alpha: f64 },
    /// `ε < -m`: right mode `(-iβ, 1) e^{-ipx}`, left mode `(iβ, 1) e^{ipx}`.
    Antiparticle { p: f64, beta: f64 },
    /// `|ε| < m`: right mode `(1, -γ) e^{-κx}`, left mode `(1, γ) e^{κx}`.
    Evanescent { kappa: f64, gamma: f64 },
}

impl Channel {
    /// Channel of a region at potential `potential` for total energy `energy`.
    pub fn for_region(mass: f64, energy: f64, potential: f64, tolerance: f64) -> Result<Self> {
        let eps = energy - potential;
        for boundary in [potential - mass, potential + mass] {
            if (energy - boundary).abs() < tolerance {
                return Err(Error::BranchPoint {
                    energy,
                    boundary,
                    tolerance,
                });
            }
        }
        Ok(if eps > mass {
            Channel::Particle {
                k: ((eps - mass) * (eps + mass)).sqrt(),
                alpha: ((eps - mass) / (eps + mass)).sqrt(),
            }
        } else if eps < -mass {
            let depth = -eps;
            Channel::Antiparticle {
                p: ((depth - mass) * (depth + mass)).sqrt(),
                beta: ((depth - mass) / (depth + mass)).sqrt(),
            }
        } else {
            Channel::Evanescent {
                kappa: ((mass - eps) * (mass + eps)).sqrt(),
                gamma: ((mass - eps) / (mass + eps)).sqrt(),
            }
        })
    }

    pub fn is_propagating(&self) -> bool {
        !matches!(self, Channel::Evanescent { .. })
    }

    /// Wavenumber, or decay rate for an evanescent channel.
    pub fn wavenumber(&self) -> f64 {
        match *self {
            Channel::Particle { k, .. } => k,
            Channel::Antiparticle { p, .. } => p,
            Channel::Evanescent { kappa, .. } => kappa,
        }
    }

    /// The spinor ratio (α, β or γ).
    pub fn ratio(&self) -> f64 {
        match *self {
            Channel::Particle { alpha, .. } => alpha,
            Channel::Antiparticle { beta, .. } => beta,
            Channel::Evanescent { gamma, .. } => gamma,
        }
    }

    fn norm(&self) -> f64 {
        1.0 / (1.0 + self.ratio() * self.ratio()).sqrt()
    }

    /// Current carried by the normalized right mode. Equals the group
    /// velocity for propagating channels and zero otherwise.
    pub fn flux(&self) -> f64 {
        match self {
            Channel::Evanescent { .. } => 0.0,
            _ => 2.0 * self.ratio() / (1.0 + self.ratio() * self.ratio()),
        }
    }

    /// Right mode evaluated at `x`.
    pub fn right_mode(&self, x: f64) -> Spinor2 {
        let n = self.norm();
        match *self {
            Channel::Particle { k, alpha } => {
                spinor(1.0, 0.0, 0.0, alpha) * (Complex64::from_polar(n, k * x))
            }
            Channel::Antiparticle { p, beta } => {
                spinor(0.0, -beta, 1.0, 0.0) * (Complex64::from_polar(n, -p * x))
            }
            Channel::Evanescent { kappa, gamma } => {
                spinor(1.0, 0.0, -gamma, 0.0) * (n * (-kappa * x).exp())
            }
        }
    }

    /// Left mode evaluated at `x`.
    pub fn left_mode(&self, x: f64) -> Spinor2 {
        let n = self.norm();
        match *self {
            Channel::Particle { k, alpha } => {
                spinor(1.0, 0.0, 0.0, -alpha) * (Complex64::from_polar(n, -k * x))
            }
            Channel::Antiparticle { p, beta } => {
                spinor(0.0, beta, 1.0, 0.0) * (Complex64::from_polar(n, p * x))
            }
            Channel::Evanescent { kappa, gamma } => {
                spinor(1.0, 0.0, gamma, 0.0) * (n * (kappa * x).exp())
            }
        }
    }

    /// Position dependence `(right, left)` of the two modes at `x`.
    pub fn phase_factors(&self, x: f64) -> (Complex64, Complex64) {
        match *self {
            Channel::Particle { k, .. } => (
                Complex64::from_polar(1.0, k * x),
                Complex64::from_polar(1.0, -k * x),
            ),
            Channel::Antiparticle { p, .. } => (
                Complex64::from_polar(1.0, -p * x),
                Complex64::from_polar(1.0, p * x),
            ),
            Channel::Evanescent { kappa, .. } => (
                Complex64::new((-kappa * x).exp(), 0.0),
                Complex64::new((kappa * x).exp(), 0.0),
            ),
        }
    }

    /// Amplitudes `(right, left)` of `psi` at `x` in this channel's basis.
    pub fn project(&self, psi: Spinor2, x: f64) -> Result<(Complex64, Complex64)> {
        let r = self.right_mode(x);
        let l = self.left_mode(x);
        let det = r.upper * l.lower - l.upper * r.lower;
        let scale = r.density().sqrt() * l.density().sqrt();
        if !(det.norm() > 1e-12 * scale) {
            return Err(Error::ProjectionIllConditioned(scale / det.norm()));
        }
        let right = (psi.upper * l.lower - l.upper * psi.lower) / det;
        let left = (r.upper * psi.lower - psi.upper * r.lower) / det;
        Ok((right, left))
    }
}

fn spinor(up_re: f64, up_im: f64, low_re: f64, low_im: f64) -> Spinor2 {
    Spinor2::new(Complex64::new(up_re, up_im), Complex64::new(low_re, low_im))
}

/// Wavenumbers and spinor ratios on both sides of the step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub energy: f64,
    pub zone: EnergyZone,
    /// `k = √(E² - m²)`.
    pub k: f64,
    /// `α = √((E - m)/(E + m))`.
    pub alpha: f64,
    /// Mode structure under the step (`x > 0`).
    pub right: Channel,
}

impl Kinematics {
    pub fn left(&self) -> Channel {
        Channel::Particle {
            k: self.k,
            alpha: self.alpha,
        }
    }
}

pub fn kinematics(params: &PhysParams, energy: f64) -> Result<Kinematics> {
    let zone = classify_zone(params, energy)?;
    if zone == EnergyZone::SubThreshold {
        return Err(Error::SubThresholdEnergy {
            energy,
            mass: params.mass(),
        });
    }
    let m = params.mass();
    let tolerance = params.branch_tolerance();
    let right = Channel::for_region(m, energy, params.height(), tolerance)?;
    Ok(Kinematics {
        energy,
        zone,
        k: ((energy - m) * (energy + m)).sqrt(),
        alpha: ((energy - m) / (energy + m)).sqrt(),
        right,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> PhysParams {
        PhysParams::new(1.0, 4.0).unwrap()
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(PhysParams::new(0.0, 4.0).is_err());
        assert!(PhysParams::new(1.0, -1.0).is_err());
        assert!(PhysParams::new(f64::NAN, 4.0).is_err());
    }

    #[test]
    fn zone_examples() {
        let p = params();
        assert_eq!(classify_zone(&p, 2.0).unwrap(), EnergyZone::Klein);
        assert_eq!(classify_zone(&p, 3.5).unwrap(), EnergyZone::Evanescent);
        assert_eq!(classify_zone(&p, 6.0).unwrap(), EnergyZone::OverBarrier);
        assert_eq!(classify_zone(&p, 0.5).unwrap(), EnergyZone::SubThreshold);
        assert_eq!(classify_zone(&p, -3.0).unwrap(), EnergyZone::SubThreshold);
    }

    #[test]
    fn boundaries_are_branch_points() {
        let p = params();
        for e in [1.0, 3.0, 5.0, 1.0 + 1e-10, 5.0 - 5e-10] {
            assert!(matches!(
                classify_zone(&p, e),
                Err(Error::BranchPoint { .. })
            ));
        }
        assert!(classify_zone(&p, f64::INFINITY).is_err());
    }

    #[test]
    fn threshold_step_with_tiny_klein_zone() {
        let p = PhysParams::new(1.0, 2.0 + 1e-15).unwrap();
        assert!(matches!(
            kinematics(&p, 1.0 + 1e-11),
            Err(Error::BranchPoint { .. })
        ));
    }

    #[test]
    fn no_klein_zone_below_twice_the_mass() {
        let p = PhysParams::new(1.0, 1.5).unwrap();
        assert!(!p.has_klein_zone());
        assert_eq!(classify_zone(&p, 1.2).unwrap(), EnergyZone::Evanescent);
    }

    #[test]
    fn klein_zone_kinematics() {
        let kin = kinematics(&params(), 2.0).unwrap();
        assert!((kin.k - 3f64.sqrt()).abs() < 1e-15);
        assert!((kin.alpha - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        match kin.right {
            Channel::Antiparticle { p, beta } => {
                assert!((p - 3f64.sqrt()).abs() < 1e-15);
                assert!((beta - 1.0 / 3f64.sqrt()).abs() < 1e-15);
            }
            other => panic!("unexpected channel {other:?}"),
        }
    }

    #[test]
    fn evanescent_decay_rate() {
        let kin = kinematics(&params(), 3.5).unwrap();
        match kin.right {
            Channel::Evanescent { kappa, .. } => assert!((kappa - 0.75f64.sqrt()).abs() < 1e-15),
            other => panic!("unexpected channel {other:?}"),
        }
    }

    #[test]
    fn subthreshold_energy_has_no_kinematics() {
        assert!(matches!(
            kinematics(&params(), 0.5),
            Err(Error::SubThresholdEnergy { .. })
        ));
    }

    /// Each mode must solve ψ⁺' = (ε + m) ψ⁻, ψ⁻' = (m - ε) ψ⁺.
    #[test]
    fn modes_solve_the_free_equation() {
        let m = 1.3;
        for eps in [-4.0, -1.5, -0.7, 0.0, 0.9, 2.0, 6.5] {
            let ch = Channel::for_region(m, eps, 0.0, 1e-9).unwrap();
            for mode in [&(|x| ch.right_mode(x)) as &dyn Fn(f64) -> Spinor2, &|x| {
                ch.left_mode(x)
            }] {
                let x = 0.37;
                let h = 1e-5;
                let d = (mode(x + h) - mode(x - h)) * (0.5 / h);
                let psi = mode(x);
                assert!((d.upper - psi.lower * (eps + m)).norm() < 1e-7);
                assert!((d.lower - psi.upper * (m - eps)).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn mode_flux_matches_current() {
        for eps in [-3.0, 2.5] {
            let ch = Channel::for_region(1.0, eps, 0.0, 1e-9).unwrap();
            assert!((ch.right_mode(0.4).current() - ch.flux()).abs() < 1e-14);
            assert!((ch.left_mode(0.4).current() + ch.flux()).abs() < 1e-14);
            assert!(ch.flux() > 0.0);
        }
    }

    #[test]
    fn projection_inverts_mode_sum() {
        let ch = Channel::for_region(1.0, -2.2, 0.0, 1e-9).unwrap();
        let (a, b) = (Complex64::new(0.3, 0.4), Complex64::new(-1.1, 0.2));
        let x = 1.7;
        let psi = ch.right_mode(x) * a + ch.left_mode(x) * b;
        let (ra, rb) = ch.project(psi, x).unwrap();
        assert!((ra - a).norm() < 1e-14 && (rb - b).norm() < 1e-14);
    }
}
