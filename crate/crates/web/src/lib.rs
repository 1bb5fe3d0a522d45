//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain numbers and returns a JS object; Bloch vectors
//! are passed as three components.

pub mod demo;

use wasm_bindgen::prelude::*;

use demo::{DemoError, Qubit};

fn js_err(e: DemoError) -> JsError {
    JsError::new(&e.to_string())
}

fn to_js<T: serde::Serialize>(value: &T) -> Result<JsValue, JsError> {
    serde_wasm_bindgen::to_value(value).map_err(|e| JsError::new(&e.to_string()))
}

fn qubit(mass: f64, x: f64, y: f64, z: f64) -> Result<Qubit, JsError> {
    Qubit::new(mass, [x, y, z]).map_err(js_err)
}

/// `F_s(η, φ)` on `points` equally spaced `s` with both lower bounds.
#[wasm_bindgen(js_name = overlapSweep)]
#[allow(clippy::too_many_arguments)]
pub fn overlap_sweep(
    eta_mass: f64,
    eta_x: f64,
    eta_y: f64,
    eta_z: f64,
    phi_mass: f64,
    phi_x: f64,
    phi_y: f64,
    phi_z: f64,
    points: usize,
) -> Result<JsValue, JsError> {
    let eta = qubit(eta_mass, eta_x, eta_y, eta_z)?;
    let phi = qubit(phi_mass, phi_x, phi_y, phi_z)?;
    to_js(&demo::overlap_sweep(eta, phi, points).map_err(js_err)?)
}

/// `Q(s)` on a grid, the minimizer, and `P_e(n)` against the bound for `n = 1..=n_max`.
#[wasm_bindgen(js_name = chernoffCurve)]
#[allow(clippy::too_many_arguments)]
pub fn chernoff_curve(
    rho_x: f64,
    rho_y: f64,
    rho_z: f64,
    sigma_x: f64,
    sigma_y: f64,
    sigma_z: f64,
    prior: f64,
    n_max: usize,
    points: usize,
) -> Result<JsValue, JsError> {
    let rho = qubit(1.0, rho_x, rho_y, rho_z)?;
    let sigma = qubit(1.0, sigma_x, sigma_y, sigma_z)?;
    to_js(&demo::chernoff_curve(rho, sigma, prior, n_max, points).map_err(js_err)?)
}

/// Structural equality test for the main inequality.
#[wasm_bindgen(js_name = equalityCertificate)]
#[allow(clippy::too_many_arguments)]
pub fn equality_certificate(
    eta_mass: f64,
    eta_x: f64,
    eta_y: f64,
    eta_z: f64,
    phi_mass: f64,
    phi_x: f64,
    phi_y: f64,
    phi_z: f64,
) -> Result<JsValue, JsError> {
    let eta = qubit(eta_mass, eta_x, eta_y, eta_z)?;
    let phi = qubit(phi_mass, phi_x, phi_y, phi_z)?;
    to_js(&demo::equality_certificate(eta, phi).map_err(js_err)?)
}
