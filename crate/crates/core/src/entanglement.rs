//! Partial-transpose symplectic eigenvalue and logarithmic negativity.
//!
//! Two routes to `ν̃₋` exist: the general one works from any 4×4 covariance
//! through its local symplectic invariants; the closed one uses
//! `ν̃₋ = √(⟨p_ζ²⟩⟨q_ξ²⟩)/2`, the limit of the general route as the
//! centre-of-mass variance grows without bound.

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::moments::SecondMoments;

/// Which normalisation of `ν̃₋` the negativity is computed against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Convention {
    /// `E_N = max(0, −ln(2ν̃₋/ħ))`; entangled iff `2ν̃₋ < ħ`.
    #[default]
    Standard,
    /// `E_N = max(0, −ln(ν̃₋/ħ))`, i.e. `−½ ln(⟨p_ζ²⟩⟨q_ξ²⟩/4ħ²)`. Assigns
    /// `ln 2` to an uncorrelated product of ground states.
    HbarUnit,
}

impl Convention {
    pub fn name(self) -> &'static str {
        match self {
            Convention::Standard => "standard",
            Convention::HbarUnit => "paper",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementResult {
    pub nu_minus: f64,
    pub log_negativity: f64,
    pub separable: bool,
    pub convention: Convention,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticInvariants {
    /// `det α + det β − 2 det γ`.
    pub delta_tilde: f64,
    pub det_sigma: f64,
    pub det_alpha: f64,
    pub det_beta: f64,
    pub det_gamma: f64,
}

fn det2(m: &[[f64; 4]; 4], r: usize, c: usize) -> f64 {
    m[r][c] * m[r + 1][c + 1] - m[r][c + 1] * m[r + 1][c]
}

fn det4(m: &[[f64; 4]; 4]) -> f64 {
    // Laplace expansion over the first two rows.
    let minor =
        |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut total = 0.0;
    for &(c0, c1) in &pairs {
        let rest: Vec<usize> = (0..4).filter(|c| *c != c0 && *c != c1).collect();
        let sign = if (c0 + c1 + 1) % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * minor(0, 1, c0, c1) * minor(2, 3, rest[0], rest[1]);
    }
    total
}

pub fn symplectic_invariants(sigma: &CovarianceMatrix) -> SymplecticInvariants {
    let m = sigma.entries();
    let det_alpha = det2(m, 0, 0);
    let det_beta = det2(m, 2, 2);
    let det_gamma = det2(m, 0, 2);
    SymplecticInvariants {
        delta_tilde: det_alpha + det_beta - 2.0 * det_gamma,
        det_sigma: det4(m),
        det_alpha,
        det_beta,
        det_gamma,
    }
}

const DISCRIMINANT_CLIP: f64 = 1e-12;

/// `ν̃₋ = √[(Δ̃ − √(Δ̃² − 4 det σ))/2]`.
pub fn nu_minus_general(sigma: &CovarianceMatrix) -> Result<f64> {
    let inv = symplectic_invariants(sigma);
    let d = inv.delta_tilde;
    if !(d > 0.0) || !(inv.det_sigma > 0.0) {
        return Err(Error::InvalidState(format!(
            "Δ̃ = {d:e}, det σ = {:e}",
            inv.det_sigma
        )));
    }
    let mut disc = d * d - 4.0 * inv.det_sigma;
    if disc < 0.0 {
        if disc < -DISCRIMINANT_CLIP * d * d {
            return Err(Error::InvalidState(format!(
                "negative discriminant {disc:e} (Δ̃² = {:e})",
                d * d
            )));
        }
        disc = 0.0;
    }
    // (Δ̃ − √disc)/2 rewritten as 2 det σ/(Δ̃ + √disc) to avoid cancellation.
    let nu2 = 2.0 * inv.det_sigma / (d + disc.sqrt());
    Ok(nu2.sqrt())
}

/// `√(⟨p_ζ²⟩⟨q_ξ²⟩)/2`, in action units.
pub fn nu_minus_closed(moments: &SecondMoments) -> f64 {
    (moments.p2_zeta.value * moments.q2_xi.value).sqrt() / 2.0
}

pub fn log_negativity(nu_minus: f64, hbar: f64, convention: Convention) -> EntanglementResult {
    let reference = match convention {
        Convention::Standard => hbar / 2.0,
        Convention::HbarUnit => hbar,
    };
    let separable = nu_minus >= reference;
    let log_negativity = if separable {
        0.0
    } else {
        -(nu_minus / reference).ln()
    };
    EntanglementResult {
        nu_minus,
        log_negativity,
        separable,
        convention,
    }
}
