//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every exported function has a plain Rust counterpart returning
//! [`klein_core::Result`], which is what the native tests exercise.

use klein_core::wavepacket::{
    build_gaussian, evaluate_packet, reflection_and_penetration, KleinTreatment, SpectralGrid,
};
use klein_core::{solve, Error, Family, PhysParams, Result};
use wasm_bindgen::prelude::*;

/// Interleaved `(E, R2)` pairs over `[emin, emax]`, skipping energies that
/// cannot be solved (below the mass or on a zone boundary).
pub fn reflection_curve_points(m: f64, v: f64, emin: f64, emax: f64, n: usize) -> Result<Vec<f64>> {
    let params = PhysParams::new(m, v)?;
    if n < 2 || !(emax > emin) {
        return Err(Error::InvalidParams("need n >= 2 and emax > emin".into()));
    }
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        let e = emin + (emax - emin) * i as f64 / (n - 1) as f64;
        if let Ok(sol) = solve(&params, e, Family::Traditional) {
            out.extend([e, sol.reflection_probability()]);
        }
    }
    Ok(out)
}

/// Stationary field on `n` points of `[xmin, xmax]` as interleaved
/// `(x, re_upper, im_upper, re_lower, im_lower)` rows. `combined` selects
/// the zero-current superposition in the Klein zone.
pub fn stationary_field_rows(
    m: f64,
    v: f64,
    e: f64,
    xmin: f64,
    xmax: f64,
    n: usize,
    combined: bool,
) -> Result<Vec<f64>> {
    let params = PhysParams::new(m, v)?;
    if n < 2 || !(xmax > xmin) {
        return Err(Error::InvalidParams("need n >= 2 and xmax > xmin".into()));
    }
    let sol = match solve(&params, e, Family::Traditional)? {
        s if combined && s.zone() == klein_core::EnergyZone::Klein => {
            klein_core::scatter::solve_combined(&params, e, None)?
        }
        s => s,
    };
    let mut out = Vec::with_capacity(5 * n);
    for i in 0..n {
        let x = xmin + (xmax - xmin) * i as f64 / (n - 1) as f64;
        let psi = sol.evaluate(x);
        out.extend([x, psi.upper.re, psi.upper.im, psi.lower.re, psi.lower.im]);
    }
    Ok(out)
}

/// A Gaussian packet prepared once and sampled at any time.
#[wasm_bindgen]
pub struct Packet {
    grid: SpectralGrid,
    x: Vec<f64>,
    final_time: f64,
}

impl Packet {
    pub fn build(
        m: f64,
        v: f64,
        e0: f64,
        sigma: f64,
        samples: usize,
        virtual_incidence: bool,
    ) -> Result<Packet> {
        let params = PhysParams::new(m, v)?;
        let treatment = if virtual_incidence {
            KleinTreatment::VirtualIncidence
        } else {
            KleinTreatment::Traditional
        };
        let grid = build_gaussian(&params, e0, sigma, samples)?.with_treatment(treatment);
        let final_time = grid.asymptotic_time();
        let x = grid.suggested_x_grid(final_time);
        Ok(Packet {
            grid,
            x,
            final_time,
        })
    }

    /// Interleaved `(x, density)` followed by `[refl_norm, pen_prob,
    /// trans_norm]` in the last three slots.
    pub fn sample(&self, time: f64, stride: usize) -> Result<Vec<f64>> {
        let state = evaluate_packet(&self.grid, time, &self.x)?;
        let d = reflection_and_penetration(&state);
        let stride = stride.max(1);
        let mut out: Vec<f64> = state
            .x
            .iter()
            .zip(state.density())
            .step_by(stride)
            .flat_map(|(&x, rho)| [x, rho])
            .collect();
        out.extend([d.refl_norm, d.pen_prob, d.trans_norm]);
        Ok(out)
    }
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
impl Packet {
    #[wasm_bindgen(constructor)]
    pub fn new(
        m: f64,
        v: f64,
        e0: f64,
        sigma: f64,
        samples: usize,
        virtual_incidence: bool,
    ) -> std::result::Result<Packet, JsError> {
        Packet::build(m, v, e0, sigma, samples, virtual_incidence).map_err(js)
    }

    #[wasm_bindgen(getter, js_name = finalTime)]
    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn snapshot(&self, time: f64, stride: usize) -> std::result::Result<Vec<f64>, JsError> {
        self.sample(time, stride).map_err(js)
    }
}

#[wasm_bindgen(js_name = reflectionCurve)]
pub fn reflection_curve(
    m: f64,
    v: f64,
    emin: f64,
    emax: f64,
    n: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    reflection_curve_points(m, v, emin, emax, n).map_err(js)
}

#[wasm_bindgen(js_name = stationaryField)]
pub fn stationary_field(
    m: f64,
    v: f64,
    e: f64,
    xmin: f64,
    xmax: f64,
    n: usize,
    combined: bool,
) -> std::result::Result<Vec<f64>, JsError> {
    stationary_field_rows(m, v, e, xmin, xmax, n, combined).map_err(js)
}
