//! Subcommand implementations. Each writes CSV with `#` metadata lines.

use std::io::Write;

use rayon::prelude::*;

use qbm_core::entanglement::{log_negativity, nu_minus_closed, nu_minus_general};
use qbm_core::gaussian::{
    covariance_from_moments, default_regulator, density_exponent, rho_element,
};
use qbm_core::model::{from_dimensionless, DimensionlessPoint, PhysicalParams, ReferenceScale};
use qbm_core::moments::moments_all;
use qbm_core::output::format_float;
use qbm_core::Convention;

use crate::config::{Config, SweepSpec};
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Commit the binary was built from, or `unknown`.
pub const COMMIT: &str = env!("QBM_COMMIT");

fn preamble(out: &mut dyn Write, kind: &str, extra: &[(&str, String)]) -> std::io::Result<()> {
    writeln!(out, "# schema: qbm-{kind} v{SCHEMA_VERSION}")?;
    writeln!(out, "# commit: {COMMIT}")?;
    for (k, v) in extra {
        writeln!(out, "# {k}: {v}")?;
    }
    Ok(())
}

fn params_comment(p: &PhysicalParams) -> String {
    format!(
        "M={} eta={} Omega={} k0={} T={} hbar={} kB={}",
        format_float(p.mass),
        format_float(p.eta),
        format_float(p.cutoff),
        format_float(p.k0),
        format_float(p.temperature),
        format_float(p.hbar),
        format_float(p.k_b)
    )
}

fn scale_comment(s: &ReferenceScale) -> String {
    format!(
        "omega0={} M={} k0={} hbar={} kB={}",
        format_float(s.omega0),
        format_float(s.mass),
        format_float(s.k0),
        format_float(s.hbar),
        format_float(s.k_b)
    )
}

pub const MOMENTS_HEADER: &str = "q2_xi,q2_xi_err,p2_xi,p2_xi_err,p2_zeta,p2_zeta_err,q2_zeta";

pub fn cmd_moments(config: &Config, out: &mut dyn Write) -> Result<(), CliError> {
    let p = config.physical_params()?;
    let m = moments_all(&p)?;
    preamble(out, "moments", &[("params", params_comment(&p))])?;
    writeln!(out, "{MOMENTS_HEADER}")?;
    let q2_zeta = match m.q2_zeta.finite() {
        Some(v) => format_float(v),
        None => "inf".to_string(),
    };
    writeln!(
        out,
        "{},{},{},{},{},{},{}",
        format_float(m.q2_xi.value),
        format_float(m.q2_xi.error),
        format_float(m.p2_xi.value),
        format_float(m.p2_xi.error),
        format_float(m.p2_zeta.value),
        format_float(m.p2_zeta.error),
        q2_zeta
    )?;
    Ok(())
}

/// One evaluated grid point of the negativity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub r: f64,
    pub a: f64,
    pub nu_minus: f64,
    pub log_negativity: f64,
    pub separable: bool,
    pub nu_minus_general: Option<f64>,
    pub status: String,
}

/// Closed-form `E_N` at `(r, A)`.
pub fn entanglement_at(
    point: DimensionlessPoint,
    scale: &ReferenceScale,
    convention: Convention,
) -> Result<f64, CliError> {
    let p = from_dimensionless(point, scale).map_err(|e| CliError::config("sweep", e))?;
    let (_, e) = qbm_core::equilibrium_entanglement(&p, convention)?;
    Ok(e.log_negativity)
}

pub fn evaluate_point(
    point: DimensionlessPoint,
    scale: &ReferenceScale,
    convention: Convention,
    regulator_check: bool,
) -> SweepRow {
    let mut row = SweepRow {
        r: point.r,
        a: point.a,
        nu_minus: f64::NAN,
        log_negativity: f64::NAN,
        separable: false,
        nu_minus_general: None,
        status: "ok".into(),
    };
    let result = (|| -> Result<(), qbm_core::Error> {
        let p = from_dimensionless(point, scale)?;
        let m = moments_all(&p)?;
        let nu = nu_minus_closed(&m);
        let e = log_negativity(nu, p.hbar, convention);
        row.nu_minus = nu;
        row.log_negativity = e.log_negativity;
        row.separable = e.separable;
        if regulator_check {
            let sigma = covariance_from_moments(&m, Some(default_regulator(&m, p.hbar)))?;
            row.nu_minus_general = Some(nu_minus_general(&sigma)?);
        }
        Ok(())
    })();
    if let Err(e) = result {
        row.status = format!("error: {e}").replace(',', ";");
    }
    row
}

/// Evaluates the grid r-major, A ascending. Rows keep grid order regardless
/// of scheduling.
pub fn run_sweep(spec: &SweepSpec, scale: &ReferenceScale) -> Result<Vec<SweepRow>, CliError> {
    spec.validate()?;
    let mut a_values = spec.a_range.values();
    a_values.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let points: Vec<DimensionlessPoint> = spec
        .r_values
        .iter()
        .flat_map(|&r| a_values.iter().map(move |&a| DimensionlessPoint { r, a }))
        .collect();
    let convention = spec.convention.into();
    Ok(points
        .par_iter()
        .map(|&pt| evaluate_point(pt, scale, convention, spec.regulator_check))
        .collect())
}

pub fn write_sweep(
    rows: &[SweepRow],
    spec: &SweepSpec,
    scale: &ReferenceScale,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let convention: Convention = spec.convention.into();
    preamble(
        out,
        "sweep",
        &[
            ("convention", convention.name().to_string()),
            ("scale", scale_comment(scale)),
        ],
    )?;
    if spec.regulator_check {
        writeln!(out, "r,A,nu_minus,E_N,separable,nu_minus_general,status")?;
    } else {
        writeln!(out, "r,A,nu_minus,E_N,separable,status")?;
    }
    for row in rows {
        write!(
            out,
            "{},{},{},{},{}",
            format_float(row.r),
            format_float(row.a),
            format_float(row.nu_minus),
            format_float(row.log_negativity),
            row.separable
        )?;
        if spec.regulator_check {
            write!(
                out,
                ",{}",
                row.nu_minus_general.map_or("nan".into(), format_float)
            )?;
        }
        writeln!(out, ",{}", row.status)?;
    }
    Ok(())
}

pub fn cmd_sweep(
    config: &Config,
    convention: Option<Convention>,
    regulator_check: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let mut spec = config.sweep.clone().unwrap_or_default();
    if let Some(c) = convention {
        spec.convention = match c {
            Convention::Standard => crate::config::ConventionName::Standard,
            Convention::HbarUnit => crate::config::ConventionName::Paper,
        };
    }
    spec.regulator_check |= regulator_check;
    let scale = config.reference_scale()?;
    let rows = run_sweep(&spec, &scale)?;
    write_sweep(&rows, &spec, &scale, out)?;
    if rows.iter().any(|r| r.status != "ok") {
        return Err(CliError::Numerical(qbm_core::Error::InvalidState(
            "one or more sweep points failed; see status column".into(),
        )));
    }
    Ok(())
}

/// Outcome of the death-temperature search at one `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeathOutcome {
    /// `E_N` first reaches zero inside `[lo, hi]`, an interval of relative
    /// width at most [`DEATH_REL_WIDTH`].
    Found { a_star: f64, lo: f64, hi: f64 },
    /// The ground state (`A = 0`) is already separable.
    NoEntangledRegion,
}

pub const DEATH_REL_WIDTH: f64 = 1e-6;

/// Bisects for the smallest `A` with `E_N = 0`, given `E_N(a_lo) > 0` and
/// `E_N(a_hi) = 0`.
pub fn death_temperature(
    r: f64,
    scale: &ReferenceScale,
    convention: Convention,
    a_lo: f64,
    a_hi: f64,
) -> Result<DeathOutcome, CliError> {
    bisect_death(
        |a| entanglement_at(DimensionlessPoint { r, a }, scale, convention),
        a_lo,
        a_hi,
    )
    .map_err(|e| match e {
        CliError::Numerical(qbm_core::Error::InvalidState(msg)) => {
            CliError::Numerical(qbm_core::Error::InvalidState(format!("r = {r}: {msg}")))
        }
        other => other,
    })
}

/// Death-point bisection over an arbitrary `E_N(A)`.
pub fn bisect_death<F>(e_n: F, a_lo: f64, a_hi: f64) -> Result<DeathOutcome, CliError>
where
    F: Fn(f64) -> Result<f64, CliError>,
{
    if !(a_lo >= 0.0 && a_hi > a_lo && a_hi.is_finite()) {
        return Err(CliError::Config(format!(
            "death: need 0 <= A_lo < A_hi, got [{a_lo}, {a_hi}]"
        )));
    }
    if e_n(0.0)? == 0.0 {
        return Ok(DeathOutcome::NoEntangledRegion);
    }
    let (mut lo, mut hi) = (a_lo, a_hi);
    if e_n(lo)? == 0.0 || e_n(hi)? > 0.0 {
        return Err(CliError::Numerical(qbm_core::Error::InvalidState(format!(
            "death temperature not bracketed by [{a_lo}, {a_hi}]; widen the bounds"
        ))));
    }
    while hi - lo > DEATH_REL_WIDTH * hi {
        let mid = 0.5 * (lo + hi);
        if e_n(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(DeathOutcome::Found {
        a_star: 0.5 * (lo + hi),
        lo,
        hi,
    })
}

pub fn cmd_death(
    config: &Config,
    convention: Option<Convention>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let section = config
        .death
        .as_ref()
        .ok_or_else(|| CliError::Config("death: section missing".into()))?;
    let scale = config.reference_scale()?;
    let convention = convention.unwrap_or_default();
    let rs = section.r_values();
    if let Some(r) = rs.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(CliError::Config(format!("death.r: {r} is not in (0, ∞)")));
    }
    let results: Vec<Result<DeathOutcome, CliError>> = rs
        .par_iter()
        .map(|&r| death_temperature(r, &scale, convention, section.a_lo, section.a_hi))
        .collect();
    let mut rows = Vec::with_capacity(rs.len());
    for (r, res) in rs.iter().zip(results) {
        rows.push((*r, res?));
    }
    preamble(
        out,
        "death",
        &[
            ("convention", convention.name().to_string()),
            ("scale", scale_comment(&scale)),
            ("relative_width", format_float(DEATH_REL_WIDTH)),
        ],
    )?;
    writeln!(out, "r,A_star,A_lo,A_hi,status")?;
    for (r, outcome) in rows {
        match outcome {
            DeathOutcome::Found { a_star, lo, hi } => writeln!(
                out,
                "{},{},{},{},ok",
                format_float(r),
                format_float(a_star),
                format_float(lo),
                format_float(hi)
            )?,
            DeathOutcome::NoEntangledRegion => {
                writeln!(out, "{},nan,nan,nan,no entangled region", format_float(r))?
            }
        }
    }
    Ok(())
}

pub fn cmd_langevin(
    config: &Config,
    seed: Option<u64>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let section = config
        .langevin
        .as_ref()
        .ok_or_else(|| CliError::Config("langevin: section missing".into()))?;
    let p = config.physical_params()?;
    let sim = section.sim_config(seed);
    sim.validate(&p)
        .map_err(|e| CliError::config("langevin", e))?;
    let stats = qbm_core::langevin::simulate_ensemble(&sim, &p, &section.initial_state())?;
    let comments = vec![
        format!("schema: qbm-langevin v{SCHEMA_VERSION}"),
        format!("commit: {COMMIT}"),
        format!("params: {}", params_comment(&p)),
        format!("seed: {}", sim.seed),
        format!("dt: {}", format_float(sim.dt)),
        format!("n_steps: {}", sim.n_steps),
        format!("record_every: {}", sim.record_every),
        format!("ensemble: {}", sim.ensemble),
        format!("noise_mode: {:?}", sim.noise_mode),
        format!("potential: {}", sim.potential),
    ];
    stats.write_csv(out, &comments)?;
    if let Some(path) = &section.binary_out {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        stats.write_binary(&mut f)?;
        f.flush()?;
    }
    Ok(())
}

pub fn cmd_density(config: &Config, out: &mut dyn Write) -> Result<(), CliError> {
    let section = config.density.clone().unwrap_or_default();
    let p = config.physical_params()?;
    let m = moments_all(&p)?;
    let e = density_exponent(&m, p.hbar)?;
    let mut points = section.points.clone();
    if let Some(g) = &section.diagonal_grid {
        if g.count < 2 || !(g.max > g.min) {
            return Err(CliError::Config(
                "density.diagonal_grid: need count >= 2 and max > min".into(),
            ));
        }
        let xs: Vec<f64> = (0..g.count)
            .map(|i| g.min + (g.max - g.min) * i as f64 / (g.count - 1) as f64)
            .collect();
        for &x1 in &xs {
            for &x2 in &xs {
                points.push([x1, x2, x1, x2]);
            }
        }
    }
    if points.is_empty() {
        return Err(CliError::Config(
            "density: give `points` or `diagonal_grid`".into(),
        ));
    }
    preamble(out, "density", &[("params", params_comment(&p))])?;
    writeln!(out, "x1,x2,y1,y2,rho")?;
    for [x1, x2, y1, y2] in points {
        writeln!(
            out,
            "{},{},{},{},{}",
            format_float(x1),
            format_float(x2),
            format_float(y1),
            format_float(y2),
            format_float(rho_element(x1, x2, y1, y2, &e))
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_order_is_grid_order() {
        let spec = SweepSpec {
            r_values: vec![0.3, 0.1],
            ..SweepSpec::default()
        };
        let rows = run_sweep(&spec, &ReferenceScale::default()).unwrap();
        assert_eq!(rows.len(), 20);
        assert_eq!(rows[0].r, 0.3);
        assert_eq!(rows[10].r, 0.1);
        for w in rows[..10].windows(2) {
            assert!(w[0].a < w[1].a);
        }
        assert!(rows.iter().all(|r| r.status == "ok"));
    }

    #[test]
    fn death_bracketing_errors() {
        let s = ReferenceScale::default();
        // At r = 0.5 entanglement dies near A = 1.2, so [2, 3] is unbracketed.
        let err = death_temperature(0.5, &s, Convention::Standard, 2.0, 3.0).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(death_temperature(0.5, &s, Convention::Standard, 1.0, 0.5).is_err());
    }

    #[test]
    fn separable_ground_state_reported() {
        let out = bisect_death(|a| Ok((0.0f64).max(-a)), 0.1, 1.0).unwrap();
        assert_eq!(out, DeathOutcome::NoEntangledRegion);
    }

    #[test]
    fn bisection_on_synthetic_slope() {
        match bisect_death(|a| Ok((2.0 - a).max(0.0)), 0.5, 10.0).unwrap() {
            DeathOutcome::Found { a_star, .. } => assert!((a_star - 2.0).abs() < 2e-6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn death_found_within_width() {
        let s = ReferenceScale::default();
        match death_temperature(0.5, &s, Convention::Standard, 0.1, 100.0).unwrap() {
            DeathOutcome::Found { a_star, lo, hi } => {
                assert!(hi - lo <= DEATH_REL_WIDTH * hi);
                assert!(lo <= a_star && a_star <= hi);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn moments_csv_layout() {
        let c = Config::from_json(r#"{"dimensionless": {"r": 0.3, "A": 0.5}}"#).unwrap();
        let mut buf = Vec::new();
        cmd_moments(&c, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines[0], MOMENTS_HEADER);
        assert!(lines[1].ends_with(",inf"));
        assert_eq!(lines[1].split(',').count(), 7);
    }
}
