//! Matched stationary solutions.
//!
//! Every solution is stored as four mode coefficients: on the left (`x < 0`)
//! an incoming right-moving wave and an outgoing reflected wave, on the right
//! (`x >= 0`) an incoming left-moving (or growing) wave and an outgoing
//! right-moving (or decaying) wave, all in the normalized bases of
//! [`Channel`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kinematics::{kinematics, Channel, EnergyZone, Kinematics, PhysParams};
use crate::spinor::Spinor2;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which stationary solution of the Klein zone is represented.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Electron incident from the left, negative-energy wave transmitted.
    Traditional,
    /// Negative-energy wave incident from under the step, electron
    /// transmitted to the left.
    Virtual,
    /// `ψ + w·χ`: traditional plus `w` times virtual.
    Combined(Complex64),
}

/// Raw and flux-weighted amplitudes of the step in the Klein zone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepAmplitudes {
    /// Reflected amplitude of the traditional solution.
    pub a: Complex64,
    /// Transmitted amplitude of the traditional solution.
    pub b: Complex64,
    /// Reflected amplitude of the virtual solution.
    pub c: Complex64,
    /// Transmitted amplitude of the virtual solution.
    pub d: Complex64,
    pub r: Complex64,
    pub t: Complex64,
    pub r_virt: Complex64,
    pub t_virt: Complex64,
}

impl StepAmplitudes {
    fn new(alpha: f64, beta: f64) -> Self {
        let ab = alpha * beta;
        let one_a = 1.0 + alpha * alpha;
        let one_b = 1.0 + beta * beta;
        let a = Complex64::new((ab - 1.0) / (ab + 1.0), 0.0);
        let c = a;
        let b = I * (2.0 * alpha / (ab + 1.0) * (one_b / one_a).sqrt());
        let d = I * (2.0 * beta / (ab + 1.0) * (one_a / one_b).sqrt());
        let t = b * ((beta / alpha) * one_a / one_b).sqrt();
        let t_virt = d * ((alpha / beta) * one_b / one_a).sqrt();
        Self {
            a,
            b,
            c,
            d,
            r: a,
            t,
            r_virt: c,
            t_virt,
        }
    }
}

/// Zone-specific amplitude set of a solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZoneAmplitudes {
    Klein(StepAmplitudes),
    Evanescent {
        reflected: Complex64,
        decaying: Complex64,
    },
    OverBarrier {
        reflected: Complex64,
        transmitted: Complex64,
        /// Flux-weighted reflection amplitude.
        r: Complex64,
        /// Flux-weighted transmission amplitude.
        t: Complex64,
    },
}

/// Field decomposition on one side of the step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParts {
    /// Wave travelling toward the step (or growing away from it).
    pub incoming: Spinor2,
    /// Wave travelling away from the step (or decaying away from it).
    pub outgoing: Spinor2,
}

impl WaveParts {
    pub fn total(&self) -> Spinor2 {
        self.incoming + self.outgoing
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterSolution {
    pub params: PhysParams,
    pub kin: Kinematics,
    pub amps: ZoneAmplitudes,
    pub family: Family,
    left_in: Complex64,
    left_out: Complex64,
    right_in: Complex64,
    right_out: Complex64,
}

impl ScatterSolution {
    pub fn energy(&self) -> f64 {
        self.kin.energy
    }

    pub fn zone(&self) -> EnergyZone {
        self.kin.zone
    }

    /// Coefficients `(incoming, outgoing)` of the left-region modes.
    pub fn left_coefficients(&self) -> (Complex64, Complex64) {
        (self.left_in, self.left_out)
    }

    /// Coefficients `(incoming, outgoing)` of the right-region modes.
    pub fn right_coefficients(&self) -> (Complex64, Complex64) {
        (self.right_in, self.right_out)
    }

    /// Incoming and outgoing pieces of the field on the side containing `x`.
    pub fn evaluate_parts(&self, x: f64) -> WaveParts {
        if x < 0.0 {
            let ch = self.kin.left();
            WaveParts {
                incoming: ch.right_mode(x) * self.left_in,
                outgoing: ch.left_mode(x) * self.left_out,
            }
        } else {
            let ch = self.kin.right;
            WaveParts {
                incoming: ch.left_mode(x) * self.right_in,
                outgoing: ch.right_mode(x) * self.right_out,
            }
        }
    }

    pub fn evaluate(&self, x: f64) -> Spinor2 {
        self.evaluate_parts(x).total()
    }

    /// Limit of the field from the left at `x = 0`.
    pub fn evaluate_left_limit(&self) -> Spinor2 {
        let ch = self.kin.left();
        ch.right_mode(0.0) * self.left_in + ch.left_mode(0.0) * self.left_out
    }

    /// Limit of the field from the right at `x = 0`.
    pub fn evaluate_right_limit(&self) -> Spinor2 {
        self.evaluate(0.0)
    }

    /// Net current of the solution (independent of `x`).
    pub fn current(&self) -> f64 {
        let flux = self.kin.left().flux();
        flux * (self.left_in.norm_sqr() - self.left_out.norm_sqr())
    }

    /// Flux reflected back into the left region per unit incident flux, for
    /// an electron-incident solution.
    pub fn reflection_probability(&self) -> f64 {
        (self.left_out / self.left_in).norm_sqr()
    }

    /// Flux emitted into the right region per unit incident flux, for an
    /// electron-incident solution.
    pub fn transmission_probability(&self) -> f64 {
        self.right_out.norm_sqr() * self.kin.right.flux()
            / (self.left_in.norm_sqr() * self.kin.left().flux())
    }
}

fn require_zone(kin: &Kinematics, expected: EnergyZone) -> Result<()> {
    if kin.zone == expected {
        Ok(())
    } else {
        Err(Error::WrongZone {
            expected,
            found: kin.zone,
            energy: kin.energy,
        })
    }
}

fn klein_parts(params: &PhysParams, energy: f64) -> Result<(Kinematics, StepAmplitudes)> {
    let kin = kinematics(params, energy)?;
    require_zone(&kin, EnergyZone::Klein)?;
    let Channel::Antiparticle { beta, .. } = kin.right else {
        unreachable!("Klein zone always has an antiparticle channel")
    };
    Ok((kin, StepAmplitudes::new(kin.alpha, beta)))
}

/// Electron incident from the left in the Klein zone.
pub fn solve_traditional(params: &PhysParams, energy: f64) -> Result<ScatterSolution> {
    let (kin, amps) = klein_parts(params, energy)?;
    Ok(ScatterSolution {
        params: *params,
        kin,
        amps: ZoneAmplitudes::Klein(amps),
        family: Family::Traditional,
        left_in: Complex64::new(1.0, 0.0),
        left_out: amps.a,
        right_in: Complex64::new(0.0, 0.0),
        right_out: amps.b,
    })
}

/// Unit-amplitude negative-energy wave incident on the step from the right.
pub fn solve_virtual(params: &PhysParams, energy: f64) -> Result<ScatterSolution> {
    let (kin, amps) = klein_parts(params, energy)?;
    Ok(ScatterSolution {
        params: *params,
        kin,
        amps: ZoneAmplitudes::Klein(amps),
        family: Family::Virtual,
        left_in: Complex64::new(0.0, 0.0),
        left_out: amps.d,
        right_in: Complex64::new(1.0, 0.0),
        right_out: amps.c,
    })
}

/// Weight that gives the virtual beam the same incident flux as the
/// electron beam. With it the combined solution carries no net current:
/// the left region sees `|R + 𝒯|² = |R|² + |𝒯|² = 1`.
pub fn flux_matched_weight(kin: &Kinematics) -> Complex64 {
    Complex64::new((kin.left().flux() / kin.right.flux()).sqrt(), 0.0)
}

/// `ψ + w·χ`; `weight = None` selects [`flux_matched_weight`].
pub fn solve_combined(
    params: &PhysParams,
    energy: f64,
    weight: Option<Complex64>,
) -> Result<ScatterSolution> {
    let (kin, amps) = klein_parts(params, energy)?;
    let w = weight.unwrap_or_else(|| flux_matched_weight(&kin));
    Ok(ScatterSolution {
        params: *params,
        kin,
        amps: ZoneAmplitudes::Klein(amps),
        family: Family::Combined(w),
        left_in: Complex64::new(1.0, 0.0),
        left_out: amps.a + w * amps.d,
        right_in: w,
        right_out: amps.b + w * amps.c,
    })
}

/// Electron incident in the window `V - m < E < V + m`: a single decaying
/// mode under the step and total reflection.
pub fn solve_evanescent(params: &PhysParams, energy: f64) -> Result<ScatterSolution> {
    let kin = kinematics(params, energy)?;
    require_zone(&kin, EnergyZone::Evanescent)?;
    let Channel::Evanescent { gamma, .. } = kin.right else {
        unreachable!("evanescent zone always has a decaying channel")
    };
    let ia = I * kin.alpha;
    let reflected = (ia + gamma) / (ia - gamma);
    let scale = ((1.0 + gamma * gamma) / (1.0 + kin.alpha * kin.alpha)).sqrt();
    let decaying = (2.0 * ia / (ia - gamma)) * scale;
    Ok(ScatterSolution {
        params: *params,
        kin,
        amps: ZoneAmplitudes::Evanescent {
            reflected,
            decaying,
        },
        family: Family::Traditional,
        left_in: Complex64::new(1.0, 0.0),
        left_out: reflected,
        right_in: Complex64::new(0.0, 0.0),
        right_out: decaying,
    })
}

/// Electron incident above `V + m`: positive-energy waves on both sides.
pub fn solve_overbarrier(params: &PhysParams, energy: f64) -> Result<ScatterSolution> {
    let kin = kinematics(params, energy)?;
    require_zone(&kin, EnergyZone::OverBarrier)?;
    let Channel::Particle { alpha: alpha_p, .. } = kin.right else {
        unreachable!("over-barrier zone always has a particle channel")
    };
    let alpha = kin.alpha;
    let reflected = Complex64::new((alpha - alpha_p) / (alpha + alpha_p), 0.0);
    let scale = ((1.0 + alpha_p * alpha_p) / (1.0 + alpha * alpha)).sqrt();
    let transmitted = Complex64::new(2.0 * alpha / (alpha + alpha_p) * scale, 0.0);
    let t = transmitted * (kin.right.flux() / kin.left().flux()).sqrt();
    Ok(ScatterSolution {
        params: *params,
        kin,
        amps: ZoneAmplitudes::OverBarrier {
            reflected,
            transmitted,
            r: reflected,
            t,
        },
        family: Family::Traditional,
        left_in: Complex64::new(1.0, 0.0),
        left_out: reflected,
        right_in: Complex64::new(0.0, 0.0),
        right_out: transmitted,
    })
}

/// Zone dispatch. `Virtual` and `Combined` exist only in the Klein zone.
pub fn solve(params: &PhysParams, energy: f64, family: Family) -> Result<ScatterSolution> {
    let kin = kinematics(params, energy)?;
    match (kin.zone, family) {
        (EnergyZone::Klein, Family::Traditional) => solve_traditional(params, energy),
        (EnergyZone::Klein, Family::Virtual) => solve_virtual(params, energy),
        (EnergyZone::Klein, Family::Combined(w)) => solve_combined(params, energy, Some(w)),
        (EnergyZone::Evanescent, Family::Traditional) => solve_evanescent(params, energy),
        (EnergyZone::OverBarrier, Family::Traditional) => solve_overbarrier(params, energy),
        (found, _) => Err(Error::WrongZone {
            expected: EnergyZone::Klein,
            found,
            energy,
        }),
    }
}

/// `J = -i ψ† σ₃ σ₁ ψ`.
pub fn current_density(psi: &Spinor2) -> f64 {
    psi.current()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitarityReport {
    /// `|R|² + |𝒯|²`: electron flux leaving to the left.
    pub sum_traditional: f64,
    /// `|ℛ|² + |T|²`: antiparticle flux leaving to the right.
    pub sum_virtual: f64,
    /// `|A - C|`.
    pub a_eq_c_gap: f64,
}

pub fn unitarity_report(params: &PhysParams, energy: f64) -> Result<UnitarityReport> {
    let (_, amps) = klein_parts(params, energy)?;
    Ok(UnitarityReport {
        sum_traditional: amps.r.norm_sqr() + amps.t_virt.norm_sqr(),
        sum_virtual: amps.r_virt.norm_sqr() + amps.t.norm_sqr(),
        a_eq_c_gap: (amps.a - amps.c).norm(),
    })
}

/// 2×2 complex matrix acting on `(right, left)` mode amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transfer(pub [[Complex64; 2]; 2]);

impl Transfer {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Transfer([[one, zero], [zero, one]])
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn mul(&self, rhs: &Transfer) -> Transfer {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Transfer(out)
    }

    fn inverse(&self) -> Transfer {
        let m = &self.0;
        let det = self.det();
        Transfer([
            [m[1][1] / det, -m[0][1] / det],
            [-m[1][0] / det, m[0][0] / det],
        ])
    }

    fn mode_matrix(channel: &Channel, x: f64) -> Transfer {
        let r = channel.right_mode(x);
        let l = channel.left_mode(x);
        Transfer([[r.upper, l.upper], [r.lower, l.lower]])
    }

    /// Diagonal map from amplitudes referenced at `x` to amplitudes
    /// referenced at the origin. Its determinant is exactly one.
    pub fn propagation(channel: &Channel, x: f64) -> Transfer {
        let (r, l) = channel.phase_factors(x);
        let zero = Complex64::new(0.0, 0.0);
        Transfer([[r, zero], [zero, l]])
    }

    /// Inverse of [`Transfer::propagation`].
    pub fn propagation_inverse(channel: &Channel, x: f64) -> Transfer {
        Self::propagation(channel, -x)
    }

    /// Maps amplitudes in `from` to amplitudes in `to` across an interface
    /// at `x0`, by continuity of both spinor components.
    pub fn interface(from: &Channel, to: &Channel, x0: f64) -> Transfer {
        Self::mode_matrix(to, x0)
            .inverse()
            .mul(&Self::mode_matrix(from, x0))
    }
}

/// Square barrier of height `V` on `0 < x < width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierAmplitudes {
    pub r: Complex64,
    pub t: Complex64,
    pub transfer: Transfer,
    /// Determinant of `transfer`, accumulated factor by factor.
    pub det: Complex64,
    pub interior: Channel,
}

impl BarrierAmplitudes {
    pub fn unitarity_defect(&self) -> f64 {
        (self.r.norm_sqr() + self.t.norm_sqr() - 1.0).abs()
    }
}

/// Reflection and transmission of an electron incident from the left on a
/// square barrier, by composing the interface transfer matrices. Both
/// outer regions are field free, so `r` and `t` are already flux weighted.
pub fn square_barrier(params: &PhysParams, width: f64, energy: f64) -> Result<BarrierAmplitudes> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::NonpositiveWidth(width));
    }
    let m = params.mass();
    let tolerance = params.branch_tolerance();
    let outside = Channel::for_region(m, energy, 0.0, tolerance)?;
    if !matches!(outside, Channel::Particle { .. }) {
        return Err(Error::SubThresholdEnergy { energy, mass: m });
    }
    let interior = Channel::for_region(m, energy, params.height(), tolerance)?;
    // Interface matrices are built at the origin; the interior and exit
    // phases enter through diagonal factors of unit determinant, so large
    // evanescent growth never cancels inside a single matrix.
    let entry = Transfer::interface(&outside, &interior, 0.0);
    let exit = Transfer::interface(&interior, &outside, 0.0);
    let transfer = Transfer::propagation_inverse(&outside, width)
        .mul(&exit)
        .mul(&Transfer::propagation(&interior, width))
        .mul(&entry);
    let det = entry.det() * exit.det();
    let m = &transfer.0;
    let r = -m[1][0] / m[1][1];
    let t = det / m[1][1];
    Ok(BarrierAmplitudes {
        r,
        t,
        transfer,
        det,
        interior,
    })
}
