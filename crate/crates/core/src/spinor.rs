use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

/// Two-component field value `(ψ⁺, ψ⁻)`. No normalization is implied.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Spinor2 {
    pub upper: Complex64,
    pub lower: Complex64,
}

impl Spinor2 {
    pub const ZERO: Spinor2 = Spinor2 {
        upper: Complex64::new(0.0, 0.0),
        lower: Complex64::new(0.0, 0.0),
    };

    pub const fn new(upper: Complex64, lower: Complex64) -> Self {
        Self { upper, lower }
    }

    pub fn from_real(upper: f64, lower: f64) -> Self {
        Self::new(Complex64::new(upper, 0.0), Complex64::new(lower, 0.0))
    }

    /// Probability density `ψ†ψ`.
    pub fn density(&self) -> f64 {
        self.upper.norm_sqr() + self.lower.norm_sqr()
    }

    /// Conserved current `-i ψ† σ₃ σ₁ ψ = 2 Im(conj(ψ⁺) ψ⁻)`.
    pub fn current(&self) -> f64 {
        2.0 * (self.upper.conj() * self.lower).im
    }

    pub fn is_finite(&self) -> bool {
        self.upper.is_finite() && self.lower.is_finite()
    }

    /// Largest componentwise distance to `other`.
    pub fn max_abs_diff(&self, other: &Spinor2) -> f64 {
        (self.upper - other.upper)
            .norm()
            .max((self.lower - other.lower).norm())
    }
}

impl Add for Spinor2 {
    type Output = Spinor2;
    fn add(self, rhs: Spinor2) -> Spinor2 {
        Spinor2::new(self.upper + rhs.upper, self.lower + rhs.lower)
    }
}

impl AddAssign for Spinor2 {
    fn add_assign(&mut self, rhs: Spinor2) {
        self.upper += rhs.upper;
        self.lower += rhs.lower;
    }
}

impl Sub for Spinor2 {
    type Output = Spinor2;
    fn sub(self, rhs: Spinor2) -> Spinor2 {
        Spinor2::new(self.upper - rhs.upper, self.lower - rhs.lower)
    }
}

impl Neg for Spinor2 {
    type Output = Spinor2;
    fn neg(self) -> Spinor2 {
        Spinor2::new(-self.upper, -self.lower)
    }
}

impl Mul<Complex64> for Spinor2 {
    type Output = Spinor2;
    fn mul(self, rhs: Complex64) -> Spinor2 {
        Spinor2::new(self.upper * rhs, self.lower * rhs)
    }
}

impl Mul<f64> for Spinor2 {
    type Output = Spinor2;
    fn mul(self, rhs: f64) -> Spinor2 {
        Spinor2::new(self.upper * rhs, self.lower * rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn current_vanishes_for_real_or_single_component() {
        assert_eq!(Spinor2::from_real(1.0, 0.0).current(), 0.0);
        assert_eq!(Spinor2::from_real(1.0, 1.0).current(), 0.0);
    }

    #[test]
    fn current_of_positive_energy_plane_wave() {
        // (1, iα) carries 2α.
        let alpha = 0.3;
        let s = Spinor2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, alpha));
        assert!((s.current() - 2.0 * alpha).abs() < 1e-15);
    }

    #[test]
    fn current_is_phase_invariant() {
        let s = Spinor2::new(Complex64::new(0.3, -1.2), Complex64::new(0.7, 0.4));
        let rotated = s * Complex64::from_polar(1.0, 0.83);
        assert!((s.current() - rotated.current()).abs() < 1e-15);
    }
}
