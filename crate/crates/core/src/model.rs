//! Physical constants of the two-particle system, the effective oscillators of
//! the centre-of-mass and relative sectors, and the bath-mediated potential
//! and distance-dependent friction.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadValue, Tolerance};

/// Constants defining one experiment.
///
/// `temperature` may be exactly zero, meaning the ground state
/// (`coth(ħωβ/2) = 1`); every other field must be strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Particle mass `M`.
    pub mass: f64,
    /// Dissipation constant `η` (mass / time).
    pub eta: f64,
    /// Bath cutoff frequency `Ω`.
    pub cutoff: f64,
    /// Inverse bath length scale `k₀`.
    pub k0: f64,
    pub temperature: f64,
    pub hbar: f64,
    pub k_b: f64,
}

impl PhysicalParams {
    pub fn new(
        mass: f64,
        eta: f64,
        cutoff: f64,
        k0: f64,
        temperature: f64,
        hbar: f64,
        k_b: f64,
    ) -> Result<Self> {
        let p = PhysicalParams {
            mass,
            eta,
            cutoff,
            k0,
            temperature,
            hbar,
            k_b,
        };
        p.validate()?;
        Ok(p)
    }

    /// Natural units, `ħ = k_B = 1`.
    pub fn natural(mass: f64, eta: f64, cutoff: f64, k0: f64, temperature: f64) -> Result<Self> {
        Self::new(mass, eta, cutoff, k0, temperature, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("eta", self.eta),
            ("cutoff", self.cutoff),
            ("k0", self.k0),
            ("hbar", self.hbar),
            ("k_b", self.k_b),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(
                    field,
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::param(
                "temperature",
                format!("must be finite and >= 0, got {}", self.temperature),
            ));
        }
        Ok(())
    }

    /// `ħβ`, or `None` at zero temperature.
    pub fn hbar_beta(&self) -> Option<f64> {
        if self.temperature > 0.0 {
            Some(self.hbar / (self.k_b * self.temperature))
        } else {
            None
        }
    }

    /// `ω₀² = 4ηΩ/(Mπ)`, the curvature of the effective potential at contact.
    pub fn omega0_sq(&self) -> f64 {
        4.0 * self.eta * self.cutoff / (self.mass * PI)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0_sq().sqrt()
    }

    /// Centre-of-mass damping `γ_ζ = η/M`.
    pub fn gamma_cm(&self) -> f64 {
        self.eta / self.mass
    }

    pub fn with_temperature(&self, temperature: f64) -> Self {
        PhysicalParams {
            temperature,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeKind {
    /// Centre of mass, `ζ = (x₁ + x₂)/2`.
    Zeta,
    /// Relative coordinate, `ξ = x₁ − x₂`.
    Xi,
}

/// Effective damped oscillator of one sector, with damping `γ = η_j / (2 m_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    pub mass: f64,
    pub omega: f64,
    pub gamma: f64,
    pub kind: ModeKind,
}

impl ModeParams {
    pub fn new(mass: f64, omega: f64, gamma: f64, kind: ModeKind) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::param("mass", format!("must be > 0, got {mass}")));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::param("gamma", format!("must be > 0, got {gamma}")));
        }
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::param("omega", format!("must be >= 0, got {omega}")));
        }
        Ok(ModeParams {
            mass,
            omega,
            gamma,
            kind,
        })
    }
}

/// Returns the `(ζ, ξ)` oscillators.
///
/// ζ: `m = 2M`, `ω = 0`, `η_ζ = 4η`. ξ: `m = M/2`, `ω² = 4ηΩ/(Mπ)`, `η_ξ = η/2`.
/// Hence `γ_ζ = η/M` and `γ_ξ = η/(2M)`.
pub fn derived_modes(params: &PhysicalParams) -> (ModeParams, ModeParams) {
    let m_zeta = 2.0 * params.mass;
    let eta_zeta = 4.0 * params.eta;
    let zeta = ModeParams {
        mass: m_zeta,
        omega: 0.0,
        gamma: eta_zeta / (2.0 * m_zeta),
        kind: ModeKind::Zeta,
    };

    let m_xi = 0.5 * params.mass;
    let eta_xi = 0.5 * params.eta;
    let xi = ModeParams {
        mass: m_xi,
        omega: params.omega0(),
        gamma: eta_xi / (2.0 * m_xi),
        kind: ModeKind::Xi,
    };
    (zeta, xi)
}

/// Coupling ratio `r = γ_ζ/ω₀` and squared reduced temperature
/// `A = (k_B T / ħγ_ζ)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessPoint {
    pub r: f64,
    pub a: f64,
}

impl DimensionlessPoint {
    pub fn new(r: f64, a: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::param("r", format!("must be > 0, got {r}")));
        }
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::param("A", format!("must be >= 0, got {a}")));
        }
        Ok(DimensionlessPoint { r, a })
    }
}

/// Everything besides `(r, A)` needed to build a [`PhysicalParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceScale {
    /// Reference frequency `ω₀`.
    pub omega0: f64,
    pub mass: f64,
    pub k0: f64,
    pub hbar: f64,
    pub k_b: f64,
}

impl Default for ReferenceScale {
    fn default() -> Self {
        ReferenceScale {
            omega0: 1.0,
            mass: 1.0,
            k0: 1.0,
            hbar: 1.0,
            k_b: 1.0,
        }
    }
}

impl ReferenceScale {
    /// The scale that reproduces `params` under [`from_dimensionless`].
    pub fn of(params: &PhysicalParams) -> Self {
        ReferenceScale {
            omega0: params.omega0(),
            mass: params.mass,
            k0: params.k0,
            hbar: params.hbar,
            k_b: params.k_b,
        }
    }
}

pub fn from_dimensionless(
    point: DimensionlessPoint,
    scale: &ReferenceScale,
) -> Result<PhysicalParams> {
    let point = DimensionlessPoint::new(point.r, point.a)?;
    if !(scale.omega0.is_finite() && scale.omega0 > 0.0) {
        return Err(Error::param(
            "omega0",
            format!("must be > 0, got {}", scale.omega0),
        ));
    }
    let eta = scale.mass * point.r * scale.omega0;
    let cutoff = PI * scale.omega0 / (4.0 * point.r);
    let gamma_cm = point.r * scale.omega0;
    let temperature = scale.hbar * gamma_cm * point.a.sqrt() / scale.k_b;
    PhysicalParams::new(
        scale.mass,
        eta,
        cutoff,
        scale.k0,
        temperature,
        scale.hbar,
        scale.k_b,
    )
}

pub fn to_dimensionless(params: &PhysicalParams) -> DimensionlessPoint {
    let gamma_cm = params.gamma_cm();
    let thermal = params.k_b * params.temperature / (params.hbar * gamma_cm);
    DimensionlessPoint {
        r: gamma_cm / params.omega0(),
        a: thermal * thermal,
    }
}

/// Bath-mediated potential `V_eff(ξ) = −(2Ωη/πk₀²) / (k₀²ξ² + 1)`.
pub fn v_eff(xi: f64, params: &PhysicalParams) -> f64 {
    let k0 = params.k0;
    let depth = 2.0 * params.cutoff * params.eta / (PI * k0 * k0);
    -depth / (k0 * k0 * xi * xi + 1.0)
}

pub fn v_eff_prime(xi: f64, params: &PhysicalParams) -> f64 {
    let u = params.k0 * params.k0 * xi * xi + 1.0;
    4.0 * params.cutoff * params.eta / PI * xi / (u * u)
}

/// Distance-dependent friction `η̃(ξ) = η(1 − 3k₀²ξ²)/(1 + k₀²ξ²)³`.
pub fn eta_tilde(xi: f64, params: &PhysicalParams) -> f64 {
    let u = params.k0 * params.k0 * xi * xi;
    params.eta * (1.0 - 3.0 * u) / (1.0 + u).powi(3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KWeight {
    /// `k⁰`, the weight of the potential-type mode sum.
    Potential,
    /// `k²`, the weight of the friction-type mode sum.
    Friction,
}

impl KWeight {
    fn power(self) -> i32 {
        match self {
            KWeight::Potential => 0,
            KWeight::Friction => 2,
        }
    }
}

/// Result of a brute-force mode-sum integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub value: f64,
    /// Quadrature error estimate on `[0, 40k₀]`.
    pub error: f64,
    /// Analytic bound on the discarded tail `[40k₀, ∞)`.
    pub truncation_bound: f64,
}

const ORACLE_RANGE: f64 = 40.0;

/// `C ∫₀^∞ dk e^{−k/k₀} kᵖ cos(kθ)` with `C = η/(2k₀³)`, so that the friction
/// weight at `θ = 0` equals `η`. The friction weight reproduces
/// [`eta_tilde`]; the potential weight is proportional to `−V_eff`.
pub fn k_integral_oracle(
    theta: f64,
    params: &PhysicalParams,
    weight: KWeight,
) -> Result<OracleValue> {
    let k0 = params.k0;
    let norm = params.eta / (2.0 * k0.powi(3));
    let p = weight.power();
    let upper = ORACLE_RANGE * k0;

    // Cut at every half period so each panel holds at most one lobe of cos(kθ).
    let mut cuts = Vec::new();
    if theta != 0.0 {
        let half_period = PI / theta.abs();
        let n = (upper / half_period).floor() as usize;
        cuts.extend((1..=n).map(|i| i as f64 * half_period));
    }
    cuts.extend((1..40).map(|i| i as f64 * k0));

    // Scale of the non-oscillating integral, p!·C·k₀^{p+1}.
    let magnitude = norm * k0.powi(p + 1) * if p == 2 { 2.0 } else { 1.0 };
    let tol = Tolerance {
        abs: 1e-14 * magnitude,
        rel: 1e-12,
        max_intervals: 20_000,
    };
    let QuadValue { value, error } = integrate(
        |k| norm * (-k / k0).exp() * k.powi(p) * (k * theta).cos(),
        0.0,
        upper,
        &cuts,
        tol,
    )?;

    // ∫_L^∞ kᵖ e^{−k/k₀} dk = k₀ e^{−L/k₀} Σ_{j≤p} p!/(p−j)! Lᵖ⁻ʲ k₀ʲ
    let mut tail = 0.0;
    let mut falling = 1.0;
    for j in 0..=p {
        tail += falling * upper.powi(p - j) * k0.powi(j);
        falling *= (p - j) as f64;
    }
    let truncation_bound = norm * k0 * (-ORACLE_RANGE).exp() * tail;

    Ok(OracleValue {
        value,
        error,
        truncation_bound,
    })
}

/// Measured constant relating the potential-type mode sum to `V_eff`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialRatio {
    /// `P(θ) / (−V_eff(θ))` with `P = 2 Σ κκ f cos(kθ)` evaluated by quadrature.
    pub measured: f64,
    /// `π/Ω`, the proportionality constant expected when `P = −(π/Ω) V_eff`.
    pub pi_over_cutoff: f64,
    /// Maximum relative deviation of the ratio across the θ samples.
    pub spread: f64,
}

pub fn potential_ratio(params: &PhysicalParams, thetas: &[f64]) -> Result<PotentialRatio> {
    let mut ratios = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let sum = 2.0 * k_integral_oracle(theta, params, KWeight::Potential)?.value;
        ratios.push(sum / -v_eff(theta, params));
    }
    if ratios.is_empty() {
        return Err(Error::param("thetas", "at least one sample is required"));
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = ratios
        .iter()
        .map(|r| ((r - mean) / mean).abs())
        .fold(0.0, f64::max);
    Ok(PotentialRatio {
        measured: mean,
        pi_over_cutoff: PI / params.cutoff,
        spread,
    })
}
