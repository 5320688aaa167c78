//! Thermal equilibrium of two Brownian particles sharing one ohmic heat bath.
//!
//! The bath induces an attractive Lorentzian potential and a
//! separation-dependent friction between the particles. In equilibrium the
//! reduced state is Gaussian and factorises into a free centre of mass and a
//! damped relative oscillator; its covariance determines the logarithmic
//! negativity between the particles as a function of temperature and coupling.
//!
//! Modules, bottom up:
//! - [`quadrature`]: adaptive Gauss-Kronrod integration
//! - [`model`]: parameters, effective modes, `V_eff`, `η̃`, mode-sum oracle
//! - [`spectral`]: bath response and imaginary-time kernel
//! - [`moments`]: equilibrium second moments
//! - [`gaussian`]: density matrix, covariance and characteristic function
//! - [`entanglement`]: symplectic eigenvalue and logarithmic negativity
//! - [`langevin`]: classical stochastic dynamics of the pair

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod entanglement;
pub mod error;
pub mod gaussian;
pub mod langevin;
pub mod model;
pub mod moments;
pub mod output;
pub mod quadrature;
pub mod spectral;

pub use entanglement::{Convention, EntanglementResult};
pub use error::{Error, Result};
pub use gaussian::CovarianceMatrix;
pub use model::{DimensionlessPoint, ModeParams, PhysicalParams, ReferenceScale};
pub use moments::SecondMoments;

/// Entanglement of the equilibrium state at `params` through the closed form.
pub fn equilibrium_entanglement(
    params: &PhysicalParams,
    convention: Convention,
) -> Result<(SecondMoments, EntanglementResult)> {
    let moments = moments::moments_all(params)?;
    let nu = entanglement::nu_minus_closed(&moments);
    Ok((
        moments,
        entanglement::log_negativity(nu, params.hbar, convention),
    ))
}
