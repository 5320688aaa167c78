//! Bath response functions and the imaginary-time kernel.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::PhysicalParams;
use crate::quadrature::{integrate, QuadValue, Tolerance};

/// One weakly damped reservoir oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathOscillator {
    pub mass: f64,
    pub frequency: f64,
    pub damping: f64,
}

/// `χ″_k(ω) = γ_k ω / (m_k [(ω² − ω_k²)² + ω² γ_k²])`.
pub fn chi_oscillator(omega: f64, k: &BathOscillator) -> f64 {
    let w2 = omega * omega;
    let detune = w2 - k.frequency * k.frequency;
    k.damping * omega / (k.mass * (detune * detune + w2 * k.damping * k.damping))
}

/// Low-frequency ohmic form `f(k) ω Θ(Ω − ω)`.
pub fn chi_lowfreq(omega: f64, f_k: f64, cutoff: f64) -> f64 {
    if omega < cutoff {
        f_k * omega
    } else {
        0.0
    }
}

/// `ω cosh[ω(τ − ħβ/2)] / sinh(ħωβ/2)` written without overflow for large ω.
fn thermal_ratio(omega: f64, tau: f64, hbar_beta: f64) -> f64 {
    let half = 0.5 * hbar_beta;
    if omega == 0.0 {
        return 1.0 / half;
    }
    let s = (tau - half).abs();
    let num = (-omega * (half - s)).exp() * (1.0 + (-2.0 * omega * s).exp());
    omega * num / -(-2.0 * omega * half).exp_m1()
}

fn check_tau(tau: f64, params: &PhysicalParams) -> Result<f64> {
    let hbar_beta = params
        .hbar_beta()
        .ok_or_else(|| Error::param("temperature", "the imaginary-time kernel needs T > 0"))?;
    if !(0.0..=hbar_beta).contains(&tau) {
        return Err(Error::OutOfDomain {
            value: tau,
            lower: 0.0,
            upper: hbar_beta,
        });
    }
    Ok(hbar_beta)
}

fn kernel_tolerance() -> Tolerance {
    Tolerance {
        abs: 0.0,
        rel: 1e-12,
        max_intervals: 4000,
    }
}

/// `K(τ) = (η/π) ∫₀^Ω dω ω cosh[ω(τ − ħβ/2)] / sinh(ħωβ/2)` for `0 ≤ τ ≤ ħβ`.
pub fn kernel_k(tau: f64, params: &PhysicalParams) -> Result<QuadValue> {
    let hbar_beta = check_tau(tau, params)?;
    let omega_max = params.cutoff;
    let cuts = [0.5 * omega_max];
    let v = integrate(
        |w| thermal_ratio(w, tau, hbar_beta),
        0.0,
        omega_max,
        &cuts,
        kernel_tolerance(),
    )?;
    Ok(v.scale(params.eta / PI))
}

/// `Φ_k(τ) = f(k) (ħ/η) K(τ)`.
pub fn phi_k(tau: f64, f_k: f64, params: &PhysicalParams) -> Result<QuadValue> {
    Ok(kernel_k(tau, params)?.scale(f_k * params.hbar / params.eta))
}

/// `Φ_k(τ) = (ħ/π) ∫₀^∞ dω χ″_k(ω) cosh[ω(τ − ħβ/2)] / sinh(ħωβ/2)` with the
/// low-frequency response, integrated directly. Used as an independent check
/// on [`phi_k`].
pub fn phi_k_direct(tau: f64, f_k: f64, params: &PhysicalParams) -> Result<QuadValue> {
    let hbar_beta = check_tau(tau, params)?;
    let half = 0.5 * hbar_beta;
    let s = (tau - half).abs();
    let cutoff = params.cutoff;
    let integrand = |w: f64| {
        if w == 0.0 {
            // χ″/sinh → f_k·2/(ħβ) as ω → 0.
            return f_k / half;
        }
        let chi = chi_lowfreq(w, f_k, cutoff);
        if chi == 0.0 {
            return 0.0;
        }
        // cosh and sinh both scaled by e^{−ω ħβ/2}.
        let c = 0.5 * ((w * (s - half)).exp() + (-w * (s + half)).exp());
        let sh = -0.5 * (-2.0 * w * half).exp_m1();
        chi * c / sh
    };
    // Integrate past the cutoff to exercise the step in χ″ itself.
    let v = integrate(integrand, 0.0, 2.0 * cutoff, &[cutoff], kernel_tolerance())?;
    Ok(v.scale(params.hbar / PI))
}

/// Samples of `K(τ)` on a uniform grid over `[0, ħβ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrid {
    pub beta_hbar: f64,
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
}

impl KernelGrid {
    pub fn sample(params: &PhysicalParams, n: usize) -> Result<Self> {
        let beta_hbar = params
            .hbar_beta()
            .ok_or_else(|| Error::param("temperature", "the imaginary-time kernel needs T > 0"))?;
        if n < 2 {
            return Err(Error::param("n", "need at least two samples"));
        }
        let taus: Vec<f64> = (0..n)
            .map(|i| beta_hbar * i as f64 / (n - 1) as f64)
            .collect();
        let mut values = Vec::with_capacity(n);
        let mut errors = Vec::with_capacity(n);
        for &t in &taus {
            let k = kernel_k(t.min(beta_hbar), params)?;
            values.push(k.value);
            errors.push(k.error);
        }
        Ok(KernelGrid {
            beta_hbar,
            taus,
            values,
            errors,
        })
    }

    /// Largest `|K(τ) − K(ħβ − τ)|` relative to the local value.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.values.len();
        (0..n)
            .map(|i| {
                let a = self.values[i];
                let b = self.values[n - 1 - i];
                (a - b).abs() / a.abs().max(b.abs())
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t: f64) -> PhysicalParams {
        PhysicalParams::natural(1.0, 0.6, 3.0, 1.0, t).unwrap()
    }

    #[test]
    fn chi_oscillator_zero_and_odd() {
        let k = BathOscillator {
            mass: 1.7,
            frequency: 2.0,
            damping: 0.05,
        };
        assert_eq!(chi_oscillator(0.0, &k), 0.0);
        for i in 1..100 {
            let w = i as f64 * 0.07;
            assert_eq!(chi_oscillator(-w, &k), -chi_oscillator(w, &k));
        }
    }

    #[test]
    fn chi_oscillator_peak_height() {
        let k = BathOscillator {
            mass: 1.7,
            frequency: 2.0,
            damping: 0.05,
        };
        let peak = chi_oscillator(k.frequency, &k);
        let expected = 1.0 / (k.mass * k.frequency * k.damping);
        assert!((peak - expected).abs() / expected < 1e-14);
    }

    #[test]
    fn chi_lowfreq_cutoff() {
        assert_eq!(chi_lowfreq(1.0, 0.3, 2.0), 0.3);
        assert_eq!(chi_lowfreq(4.0, 0.3, 2.0), 0.0);
    }

    #[test]
    fn lowfreq_slope_matches_oscillator_expansion() {
        let k = BathOscillator {
            mass: 1.7,
            frequency: 2.0,
            damping: 0.05,
        };
        let f_k = k.damping / (k.mass * k.frequency.powi(4));
        let w = 1e-5;
        let ratio = chi_oscillator(w, &k) / chi_lowfreq(w, f_k, 10.0);
        assert!((ratio - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kernel_symmetric_and_positive() {
        let p = params(0.3);
        let grid = KernelGrid::sample(&p, 41).unwrap();
        assert!(grid.values.iter().all(|v| *v > 0.0));
        assert!(grid.symmetry_defect() < 1e-11);
    }

    #[test]
    fn kernel_minimum_at_midpoint() {
        let p = params(0.3);
        let grid = KernelGrid::sample(&p, 201).unwrap();
        let (imin, _) = grid
            .values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        assert_eq!(imin, 100);
    }

    #[test]
    fn kernel_high_temperature_is_flat() {
        // ħβΩ = 0.01: sinh(x) ≈ x, cosh ≈ 1.
        let p = params(300.0);
        let hb = p.hbar_beta().unwrap();
        let flat = p.eta / PI * 2.0 / hb * p.cutoff;
        for i in 0..=10 {
            let k = kernel_k(hb * i as f64 / 10.0, &p).unwrap().value;
            assert!((k - flat).abs() / flat < 0.02);
        }
    }

    #[test]
    fn kernel_rejects_outside_interval() {
        let p = params(0.5);
        assert!(matches!(kernel_k(-0.1, &p), Err(Error::OutOfDomain { .. })));
        assert!(matches!(kernel_k(2.5, &p), Err(Error::OutOfDomain { .. })));
        assert!(kernel_k(0.0, &params(0.0)).is_err());
    }

    #[test]
    fn phi_k_scaling_and_direct_route() {
        let p = params(0.7);
        let f_k = p.eta / p.hbar;
        let hb = p.hbar_beta().unwrap();
        for i in 0..=8 {
            let tau = hb * i as f64 / 8.0;
            let k = kernel_k(tau, &p).unwrap().value;
            let phi = phi_k(tau, f_k, &p).unwrap().value;
            assert_eq!(phi, k);
            let direct = phi_k_direct(tau, 0.37, &p).unwrap().value;
            let via_k = phi_k(tau, 0.37, &p).unwrap().value;
            assert!((direct - via_k).abs() / via_k < 1e-8);
        }
    }
}
