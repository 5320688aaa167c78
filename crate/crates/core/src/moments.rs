//! Equilibrium second moments of the effective oscillators.
//!
//! ```text
//! ⟨q²⟩ = (2ħγ/mπ)  ∫₀^Ω ω  coth(ħωβ/2) / [(ω_j² − ω²)² + 4γ²ω²] dω
//! ⟨p²⟩ = (2mħγ/π)  ∫₀^Ω ω³ coth(ħωβ/2) / [(ω_j² − ω²)² + 4γ²ω²] dω
//! ```

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{derived_modes, ModeParams, PhysicalParams};
use crate::quadrature::{integrate, QuadValue, Tolerance};

/// `ω coth(ħωβ/2)`, finite at `ω = 0`. `None` means zero temperature.
pub fn omega_coth(omega: f64, hbar_beta: Option<f64>) -> f64 {
    match hbar_beta {
        None => omega.abs(),
        Some(hb) => {
            // ω coth(y/2) = ω + (2/ħβ) · y/(e^y − 1), y = ħβω
            let y = hb * omega;
            let bose = if y == 0.0 { 1.0 } else { y / y.exp_m1() };
            omega + 2.0 / hb * bose
        }
    }
}

fn breakpoints(mode: &ModeParams, cutoff: f64) -> Vec<f64> {
    let mut pts = vec![0.5 * cutoff];
    if mode.omega > 0.0 {
        let (w, g) = (mode.omega, mode.gamma);
        pts.extend([w - 10.0 * g, w - g, w, w + g, w + 10.0 * g]);
    } else {
        pts.extend([2.0 * mode.gamma, 20.0 * mode.gamma]);
    }
    pts
}

fn moment_tolerance() -> Tolerance {
    Tolerance {
        abs: 0.0,
        rel: 1e-11,
        max_intervals: 4000,
    }
}

/// Position variance `⟨q_j²⟩`. Requires `ω_j > 0`.
pub fn q2(mode: &ModeParams, params: &PhysicalParams) -> Result<QuadValue> {
    if mode.omega <= 0.0 {
        return Err(Error::Divergent(
            "position variance of a free mode (integrand ~ 1/ω² at the origin)",
        ));
    }
    let hb = params.hbar_beta();
    let (w2, g2) = (mode.omega * mode.omega, 4.0 * mode.gamma * mode.gamma);
    let integrand = |w: f64| {
        let d = w2 - w * w;
        omega_coth(w, hb) / (d * d + g2 * w * w)
    };
    let v = integrate(
        integrand,
        0.0,
        params.cutoff,
        &breakpoints(mode, params.cutoff),
        moment_tolerance(),
    )?;
    Ok(v.scale(2.0 * params.hbar * mode.gamma / (mode.mass * PI)))
}

/// Momentum variance `⟨p_j²⟩`. A free mode (`ω_j = 0`) is allowed.
pub fn p2(mode: &ModeParams, params: &PhysicalParams) -> Result<QuadValue> {
    let hb = params.hbar_beta();
    let (w2, g2) = (mode.omega * mode.omega, 4.0 * mode.gamma * mode.gamma);
    let free = mode.omega == 0.0;
    let integrand = |w: f64| {
        let wc = omega_coth(w, hb);
        if free {
            // ω³/(ω⁴ + 4γ²ω²) with the ω² cancelled.
            wc / (w * w + g2)
        } else {
            let d = w2 - w * w;
            w * w * wc / (d * d + g2 * w * w)
        }
    };
    let v = integrate(
        integrand,
        0.0,
        params.cutoff,
        &breakpoints(mode, params.cutoff),
        moment_tolerance(),
    )?;
    Ok(v.scale(2.0 * mode.mass * params.hbar * mode.gamma / PI))
}

/// `⟨q_ζ²⟩` of the free centre of mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PositionVariance {
    Finite(f64),
    /// Translation-invariant: `1/⟨q²⟩ = 0`.
    Infinite,
}

impl PositionVariance {
    pub fn is_infinite(&self) -> bool {
        matches!(self, PositionVariance::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            PositionVariance::Finite(v) => Some(*v),
            PositionVariance::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondMoments {
    pub q2_xi: QuadValue,
    pub p2_xi: QuadValue,
    pub p2_zeta: QuadValue,
    pub q2_zeta: PositionVariance,
}

impl SecondMoments {
    /// Moments given directly, with exact (zero-error) values.
    pub fn from_values(q2_zeta: PositionVariance, p2_zeta: f64, q2_xi: f64, p2_xi: f64) -> Self {
        let exact = |value| QuadValue { value, error: 0.0 };
        SecondMoments {
            q2_xi: exact(q2_xi),
            p2_xi: exact(p2_xi),
            p2_zeta: exact(p2_zeta),
            q2_zeta,
        }
    }

    /// Largest relative quadrature error among the finite moments.
    pub fn max_relative_error(&self) -> f64 {
        [self.q2_xi, self.p2_xi, self.p2_zeta]
            .iter()
            .map(QuadValue::relative_error)
            .fold(0.0, f64::max)
    }
}

pub fn moments_all(params: &PhysicalParams) -> Result<SecondMoments> {
    params.validate()?;
    let (zeta, xi) = derived_modes(params);
    Ok(SecondMoments {
        q2_xi: q2(&xi, params)?,
        p2_xi: p2(&xi, params)?,
        p2_zeta: p2(&zeta, params)?,
        q2_zeta: PositionVariance::Infinite,
    })
}
