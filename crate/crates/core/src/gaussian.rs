//! The two-particle Gaussian state in the original coordinates.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::moments::{PositionVariance, SecondMoments};

/// Quadratic coefficients of `ρ(x₁,x₂;y₁,y₂) = C_ξ exp[−f]`.
///
/// `C_ξ` normalises the relative-coordinate diagonal; the centre-of-mass
/// sector is left unnormalised, so `ρ` is a density per unit centre-of-mass
/// length when `c3 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianExponent {
    /// `1/(8⟨q_ξ²⟩)`
    pub c1: f64,
    /// `⟨p_ξ²⟩/(2ħ²)`
    pub c2: f64,
    /// `1/(32⟨q_ζ²⟩)`, zero for a free centre of mass
    pub c3: f64,
    /// `⟨p_ζ²⟩/(8ħ²)`
    pub c4: f64,
    /// `C_ξ = 1/√(2π⟨q_ξ²⟩)`
    pub norm: f64,
}

fn positive(field: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::param(
            field,
            format!("moment must be finite and > 0, got {v}"),
        ))
    }
}

pub fn density_exponent(moments: &SecondMoments, hbar: f64) -> Result<GaussianExponent> {
    let q_xi = positive("q2_xi", moments.q2_xi.value)?;
    let p_xi = positive("p2_xi", moments.p2_xi.value)?;
    let p_zeta = positive("p2_zeta", moments.p2_zeta.value)?;
    let c3 = match moments.q2_zeta {
        PositionVariance::Infinite => 0.0,
        PositionVariance::Finite(q) => 1.0 / (32.0 * positive("q2_zeta", q)?),
    };
    let hbar2 = hbar * hbar;
    Ok(GaussianExponent {
        c1: 1.0 / (8.0 * q_xi),
        c2: p_xi / (2.0 * hbar2),
        c3,
        c4: p_zeta / (8.0 * hbar2),
        norm: 1.0 / (2.0 * PI * q_xi).sqrt(),
    })
}

impl GaussianExponent {
    pub fn exponent(&self, x1: f64, x2: f64, y1: f64, y2: f64) -> f64 {
        let s1 = y1 - y2 + x1 - x2;
        let s2 = y1 - y2 - x1 + x2;
        let s3 = y1 + y2 + x1 + x2;
        let s4 = y1 + y2 - x1 - x2;
        self.c1 * s1 * s1 + self.c2 * s2 * s2 + self.c3 * s3 * s3 + self.c4 * s4 * s4
    }
}

/// `⟨x₁ x₂|ρ|y₁ y₂⟩`.
pub fn rho_element(x1: f64, x2: f64, y1: f64, y2: f64, exponent: &GaussianExponent) -> f64 {
    exponent.norm * (-exponent.exponent(x1, x2, y1, y2)).exp()
}

/// Symmetric 4×4 covariance over `(x₁, p₁, x₂, p₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix {
    entries: [[f64; 4]; 4],
}

impl CovarianceMatrix {
    pub fn new(entries: [[f64; 4]; 4]) -> Result<Self> {
        for i in 0..4 {
            for j in 0..4 {
                let (a, b) = (entries[i][j], entries[j][i]);
                if !a.is_finite() {
                    return Err(Error::InvalidState(format!("entry ({i},{j}) is {a}")));
                }
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()) {
                    return Err(Error::InvalidState(format!(
                        "not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
            if entries[i][i] <= 0.0 {
                return Err(Error::InvalidState(format!(
                    "diagonal entry {i} is {}",
                    entries[i][i]
                )));
            }
        }
        Ok(CovarianceMatrix { entries })
    }

    /// Builds `σ` from the sector variances `a = ⟨ζ²⟩`, `b = ⟨p_ζ²⟩`,
    /// `c = ⟨ξ²⟩`, `d = ⟨p_ξ²⟩` using `x₁,₂ = ζ ± ξ/2`, `p₁,₂ = p_ζ/2 ± p_ξ`.
    pub fn from_sector_variances(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d)] {
            positive(name, v)?;
        }
        let xx = a + c / 4.0;
        let x12 = a - c / 4.0;
        let pp = b / 4.0 + d;
        let p12 = b / 4.0 - d;
        Ok(CovarianceMatrix {
            entries: [
                [xx, 0.0, x12, 0.0],
                [0.0, pp, 0.0, p12],
                [x12, 0.0, xx, 0.0],
                [0.0, p12, 0.0, pp],
            ],
        })
    }

    /// Inverse of [`Self::from_sector_variances`]: `(a, b, c, d)`.
    pub fn sector_variances(&self) -> (f64, f64, f64, f64) {
        let e = &self.entries;
        let a = 0.5 * (e[0][0] + e[0][2]);
        let c = 2.0 * (e[0][0] - e[0][2]);
        let b = 2.0 * (e[1][1] + e[1][3]);
        let d = 0.5 * (e[1][1] - e[1][3]);
        (a, b, c, d)
    }

    pub fn entries(&self) -> &[[f64; 4]; 4] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    /// `σ` in units where positions are measured in `length` and momenta in
    /// `ħ/length`, doubled so the vacuum of an oscillator with
    /// `ħ/(mω) = length²` is the identity.
    pub fn dimensionless(&self, length: f64, hbar: f64) -> CovarianceMatrix {
        let s = [1.0 / length, length / hbar, 1.0 / length, length / hbar];
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = 2.0 * s[i] * s[j] * self.entries[i][j];
            }
        }
        CovarianceMatrix { entries: out }
    }

    /// `S σ Sᵀ`.
    pub fn transform(&self, s: &[[f64; 4]; 4]) -> CovarianceMatrix {
        let mut tmp = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                tmp[i][j] = (0..4).map(|k| s[i][k] * self.entries[k][j]).sum();
            }
        }
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = (0..4).map(|k| tmp[i][k] * s[j][k]).sum();
            }
        }
        CovarianceMatrix { entries: out }
    }

    /// Exchanges `(x₁, p₁) ↔ (x₂, p₂)`.
    pub fn swap_particles(&self) -> CovarianceMatrix {
        let perm = [2, 3, 0, 1];
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = self.entries[perm[i]][perm[j]];
            }
        }
        CovarianceMatrix { entries: out }
    }
}

/// Default centre-of-mass regulator `10⁶ · max(⟨q_ξ²⟩, ħ²/⟨p_ζ²⟩)`.
pub fn default_regulator(moments: &SecondMoments, hbar: f64) -> f64 {
    1e6 * regulator_scale(moments, hbar)
}

/// Natural length² scale of the state, `max(⟨q_ξ²⟩, ħ²/⟨p_ζ²⟩)`.
pub fn regulator_scale(moments: &SecondMoments, hbar: f64) -> f64 {
    moments.q2_xi.value.max(hbar * hbar / moments.p2_zeta.value)
}

/// Covariance of the state. With a free centre of mass `regulator` stands in
/// for `⟨q_ζ²⟩` and must be supplied.
pub fn covariance_from_moments(
    moments: &SecondMoments,
    regulator: Option<f64>,
) -> Result<CovarianceMatrix> {
    let a = match (moments.q2_zeta, regulator) {
        (PositionVariance::Finite(q), _) => q,
        (PositionVariance::Infinite, Some(r)) => {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::param("regulator", format!("must be > 0, got {r}")));
            }
            r
        }
        (PositionVariance::Infinite, None) => {
            return Err(Error::param(
                "regulator",
                "required when the centre-of-mass variance is infinite",
            ))
        }
    };
    CovarianceMatrix::from_sector_variances(
        a,
        moments.p2_zeta.value,
        moments.q2_xi.value,
        moments.p2_xi.value,
    )
}

/// `W̃(X) = exp[−½ X σ Xᵀ]`.
pub fn characteristic_function(x: &[f64; 4], sigma: &CovarianceMatrix) -> f64 {
    let mut quad = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            quad += x[i] * sigma.entries[i][j] * x[j];
        }
    }
    (-0.5 * quad).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, Tolerance};

    fn sample() -> SecondMoments {
        SecondMoments::from_values(PositionVariance::Infinite, 0.8, 1.3, 0.35)
    }

    #[test]
    fn exponent_coefficients() {
        let m = SecondMoments::from_values(PositionVariance::Infinite, 0.8, 2.0, 0.35);
        let e = density_exponent(&m, 1.0).unwrap();
        assert_eq!(e.c1, 1.0 / 16.0);
        assert_eq!(e.c3, 0.0);
        assert_eq!(e.c2, 0.35 / 2.0);
        assert_eq!(e.c4, 0.1);
        let finite = SecondMoments::from_values(PositionVariance::Finite(4.0), 0.8, 2.0, 0.35);
        assert_eq!(density_exponent(&finite, 1.0).unwrap().c3, 1.0 / 128.0);
    }

    #[test]
    fn exponent_rejects_nonpositive_moment() {
        let m = SecondMoments::from_values(PositionVariance::Infinite, 0.8, -2.0, 0.35);
        assert!(density_exponent(&m, 1.0).is_err());
    }

    #[test]
    fn diagonal_depends_only_on_separation() {
        let e = density_exponent(&sample(), 1.0).unwrap();
        let base = e.exponent(0.3, -0.2, 0.3, -0.2);
        for shift in [-5.0, 0.1, 17.0] {
            let v = e.exponent(0.3 + shift, -0.2 + shift, 0.3 + shift, -0.2 + shift);
            assert!((v - base).abs() < 1e-12);
        }
    }

    #[test]
    fn hermitian_and_translation_invariant() {
        let e = density_exponent(&sample(), 1.0).unwrap();
        let pts = [
            (0.1, -0.4, 0.7, 0.2),
            (1.0, 2.0, -1.0, 0.5),
            (0.0, 0.3, 0.3, 0.0),
        ];
        for (x1, x2, y1, y2) in pts {
            assert_eq!(
                rho_element(x1, x2, y1, y2, &e),
                rho_element(y1, y2, x1, x2, &e)
            );
            for a in [-3.0, 0.25, 9.0] {
                let shifted = rho_element(x1 + a, x2 + a, y1 + a, y2 + a, &e);
                let base = rho_element(x1, x2, y1, y2, &e);
                assert!((shifted - base).abs() <= 1e-12 * base);
            }
        }
    }

    #[test]
    fn relative_diagonal_is_normalised_with_variance_q2_xi() {
        let m = sample();
        let e = density_exponent(&m, 1.0).unwrap();
        let tol = Tolerance::default();
        let diag = |xi: f64| rho_element(xi, 0.0, xi, 0.0, &e);
        let lim = 30.0 * m.q2_xi.value.sqrt();
        let norm = integrate(diag, -lim, lim, &[0.0], tol).unwrap().value;
        let second = integrate(|x| x * x * diag(x), -lim, lim, &[0.0], tol)
            .unwrap()
            .value;
        assert!((norm - 1.0).abs() < 1e-10);
        assert!((second - m.q2_xi.value).abs() / m.q2_xi.value < 1e-10);
    }

    #[test]
    fn uncorrelated_positions_when_a_is_quarter_c() {
        let s = CovarianceMatrix::from_sector_variances(0.25, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(s.get(0, 2), 0.0);
    }

    #[test]
    fn product_ground_state_assembles_to_diagonal() {
        let (m, w, hbar) = (1.7, 0.9, 1.3);
        let a = hbar / (4.0 * m * w);
        let b = m * hbar * w;
        let c = hbar / (m * w);
        let d = m * hbar * w / 4.0;
        let s = CovarianceMatrix::from_sector_variances(a, b, c, d).unwrap();
        let x = hbar / (2.0 * m * w);
        let p = m * hbar * w / 2.0;
        let expected = [
            [x, 0.0, 0.0, 0.0],
            [0.0, p, 0.0, 0.0],
            [0.0, 0.0, x, 0.0],
            [0.0, 0.0, 0.0, p],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((s.get(i, j) - expected[i][j]).abs() < 1e-15);
            }
        }
        let unit = s.dimensionless((hbar / (m * w)).sqrt(), hbar);
        for i in 0..4 {
            assert!((unit.get(i, i) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn exchange_symmetric() {
        let s = covariance_from_moments(&sample(), Some(1e3)).unwrap();
        assert_eq!(s.swap_particles(), s);
    }

    #[test]
    fn regulator_required_for_free_centre_of_mass() {
        assert!(covariance_from_moments(&sample(), None).is_err());
        let finite = SecondMoments::from_values(PositionVariance::Finite(2.0), 0.8, 1.3, 0.35);
        assert!(covariance_from_moments(&finite, None).is_ok());
    }

    #[test]
    fn regulator_only_enters_position_slots() {
        let m = sample();
        let s1 = covariance_from_moments(&m, Some(1e4)).unwrap();
        let s2 = covariance_from_moments(&m, Some(1e8)).unwrap();
        for (i, j) in [(1, 1), (1, 3), (3, 3), (0, 1), (2, 3)] {
            assert_eq!(s1.get(i, j), s2.get(i, j));
        }
        assert!(s2.get(0, 0) > s1.get(0, 0));
    }

    #[test]
    fn characteristic_function_basics() {
        let s = covariance_from_moments(&sample(), Some(10.0)).unwrap();
        assert_eq!(characteristic_function(&[0.0; 4], &s), 1.0);
        let x = [0.3, -0.1, 0.7, 0.2];
        let nx = [-0.3, 0.1, -0.7, -0.2];
        assert_eq!(
            characteristic_function(&x, &s),
            characteristic_function(&nx, &s)
        );
        assert!(characteristic_function(&x, &s) <= 1.0);

        // Along (q, 0, 0, 0): ln W̃ = −½⟨x₁²⟩q², concave with second difference −⟨x₁²⟩h².
        let h = 0.05;
        let lw = |q: f64| characteristic_function(&[q, 0.0, 0.0, 0.0], &s).ln();
        for i in -20..20 {
            let q = i as f64 * h;
            let d2 = lw(q + h) - 2.0 * lw(q) + lw(q - h);
            assert!((d2 + s.get(0, 0) * h * h).abs() < 1e-10);
        }
    }
}
