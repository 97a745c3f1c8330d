//! Dormand–Prince 5(4) integrator for small complex linear systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Local error control settings.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerance {
    pub fn uniform(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 5th-order weights minus embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MAX_STEPS: usize = 2_000_000;

/// Accepted steps of an integration, in integration order.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub x: Vec<f64>,
    pub y: Vec<[Complex64; N]>,
    pub rejected: usize,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> (f64, [Complex64; N]) {
        (*self.x.last().unwrap(), *self.y.last().unwrap())
    }
}

fn axpy<const N: usize>(
    y: &[Complex64; N],
    h: f64,
    ks: &[[Complex64; N]],
    coef: &[f64],
) -> [Complex64; N] {
    let mut out = *y;
    for (k, &c) in ks.iter().zip(coef) {
        if c != 0.0 {
            for (o, ki) in out.iter_mut().zip(k) {
                *o += ki * (h * c);
            }
        }
    }
    out
}

/// Integrates `y' = f(x, y)` from `x0` to `x1` (either direction), never
/// taking a step longer than `max_step`. Extends `traj` in place so several
/// segments can be chained.
pub fn integrate_segment<const N: usize, F>(
    f: &F,
    x0: f64,
    x1: f64,
    max_step: f64,
    tol: Tolerance,
    traj: &mut Trajectory<N>,
) -> Result<()>
where
    F: Fn(f64, &[Complex64; N]) -> [Complex64; N],
{
    let span = x1 - x0;
    if span == 0.0 {
        return Ok(());
    }
    let dir = span.signum();
    let max_step = max_step.min(span.abs());
    let h_min = 1e-14 * (x0.abs().max(x1.abs()).max(1e-3));
    let mut h = max_step.min(0.01 * span.abs().max(1e-3)) * dir;
    let mut x = x0;
    let mut y = *traj.y.last().expect("trajectory must be seeded");
    let mut k = [[Complex64::new(0.0, 0.0); N]; 7];
    k[0] = f(x, &y);

    for _ in 0..MAX_STEPS {
        if (x1 - x) * dir <= 0.0 {
            return Ok(());
        }
        let last = (x + h - x1) * dir >= 0.0;
        if last {
            h = x1 - x;
        }
        for s in 1..7 {
            let ys = axpy(&y, h, &k[..s], &A[s][..s]);
            k[s] = f(x + C[s] * h, &ys);
        }
        let y_new = axpy(&y, h, &k[..6], &A[6][..6]);
        let err_vec = axpy(&[Complex64::new(0.0, 0.0); N], h, &k, &E);
        let err = (err_vec
            .iter()
            .zip(y.iter().zip(&y_new))
            .map(|(e, (a, b))| {
                let sc = tol.atol + tol.rtol * a.norm().max(b.norm());
                (e.norm() / sc).powi(2)
            })
            .sum::<f64>()
            / N as f64)
            .sqrt();

        if err <= 1.0 {
            x = if last { x1 } else { x + h };
            y = y_new;
            traj.x.push(x);
            traj.y.push(y);
            // FSAL: the 7th stage is f at the new point.
            k[0] = k[6];
        } else {
            traj.rejected += 1;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        let next = (h.abs() * if err <= 1.0 { factor } else { factor.min(1.0) }).min(max_step);
        if next < h_min {
            return Err(Error::StiffnessFailure { x, step: next });
        }
        h = next * dir;
    }
    Err(Error::StiffnessFailure { x, step: h.abs() })
}
