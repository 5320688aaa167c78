//! Classical Langevin dynamics of the centre-of-mass and relative coordinates
//! with distance-dependent friction and the bath-mediated potential:
//!
//! ```text
//! M ξ̈ + (η − η̃(ξ)) ξ̇ + V_eff'(ξ) = F_ξ
//! M ζ̈ + (η + η̃(ξ)) ζ̇            = F_ζ
//! ```
//!
//! The ζ friction is evaluated at the current separation ξ.

use std::f64::consts::PI;
use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};
use crate::model::{eta_tilde, v_eff_prime, PhysicalParams};
use crate::output::format_float;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrajectoryState {
    pub t: f64,
    pub zeta: f64,
    pub zeta_dot: f64,
    pub xi: f64,
    pub xi_dot: f64,
}

impl TrajectoryState {
    fn is_finite(&self) -> bool {
        [self.t, self.zeta, self.zeta_dot, self.xi, self.xi_dot]
            .iter()
            .all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseMode {
    Off,
    /// White noise with `⟨FF⟩ = 2ηk_BT δ` on both coordinates.
    #[default]
    ConstantEta,
    /// Amplitude `2(η ∓ η̃(ξ))k_BT` at the midpoint separation. Experimental.
    LocalFdr,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub n_steps: u64,
    pub seed: u64,
    pub noise_mode: NoiseMode,
    pub ensemble: usize,
    /// Statistics are recorded every `record_every` steps.
    pub record_every: u64,
    /// Include `V_eff'` in the ξ equation.
    pub potential: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.01,
            n_steps: 1000,
            seed: 0,
            noise_mode: NoiseMode::ConstantEta,
            ensemble: 1,
            record_every: 1,
            potential: true,
        }
    }
}

/// Largest `dt·ω₀` accepted when the potential is on.
pub const MAX_DT_OMEGA0: f64 = 0.05;

impl SimConfig {
    pub fn validate(&self, params: &PhysicalParams) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::param("dt", format!("must be > 0, got {}", self.dt)));
        }
        if self.n_steps == 0 {
            return Err(Error::param("n_steps", "must be >= 1"));
        }
        if self.ensemble == 0 {
            return Err(Error::param("ensemble", "must be >= 1"));
        }
        if self.record_every == 0 {
            return Err(Error::param("record_every", "must be >= 1"));
        }
        if self.potential && self.dt * params.omega0() > MAX_DT_OMEGA0 {
            return Err(Error::param(
                "dt",
                format!(
                    "dt·ω₀ = {:.4} exceeds {MAX_DT_OMEGA0} for an oscillatory run",
                    self.dt * params.omega0()
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accelerations {
    pub zeta: f64,
    pub xi: f64,
}

fn accelerations(s: &TrajectoryState, params: &PhysicalParams, potential: bool) -> Accelerations {
    let et = eta_tilde(s.xi, params);
    let force = if potential {
        v_eff_prime(s.xi, params)
    } else {
        0.0
    };
    Accelerations {
        xi: (-(params.eta - et) * s.xi_dot - force) / params.mass,
        zeta: -(params.eta + et) * s.zeta_dot / params.mass,
    }
}

/// Deterministic accelerations `(ζ̈, ξ̈)`.
pub fn drift(state: &TrajectoryState, params: &PhysicalParams) -> Accelerations {
    accelerations(state, params, true)
}

/// Advances one step: explicit midpoint for the drift, then a Gaussian
/// velocity kick per `config.noise_mode`.
pub fn step<R: rand::Rng>(
    state: &TrajectoryState,
    config: &SimConfig,
    params: &PhysicalParams,
    rng: &mut R,
) -> TrajectoryState {
    let dt = config.dt;
    let h = 0.5 * dt;
    let a0 = accelerations(state, params, config.potential);
    let mid = TrajectoryState {
        t: state.t + h,
        zeta: state.zeta + h * state.zeta_dot,
        zeta_dot: state.zeta_dot + h * a0.zeta,
        xi: state.xi + h * state.xi_dot,
        xi_dot: state.xi_dot + h * a0.xi,
    };
    let am = accelerations(&mid, params, config.potential);
    let mut next = TrajectoryState {
        t: state.t + dt,
        zeta: state.zeta + dt * mid.zeta_dot,
        zeta_dot: state.zeta_dot + dt * am.zeta,
        xi: state.xi + dt * mid.xi_dot,
        xi_dot: state.xi_dot + dt * am.xi,
    };

    let kt = params.k_b * params.temperature;
    let (gamma_zeta, gamma_xi) = match config.noise_mode {
        NoiseMode::Off => return next,
        NoiseMode::ConstantEta => (params.eta, params.eta),
        NoiseMode::LocalFdr => {
            let et = eta_tilde(mid.xi, params);
            ((params.eta + et).max(0.0), (params.eta - et).max(0.0))
        }
    };
    let n_zeta: f64 = StandardNormal.sample(rng);
    let n_xi: f64 = StandardNormal.sample(rng);
    let kick_zeta = (2.0 * gamma_zeta * kt * dt).sqrt() / params.mass * n_zeta;
    let kick_xi = (2.0 * gamma_xi * kt * dt).sqrt() / params.mass * n_xi;
    next.zeta_dot += kick_zeta;
    next.xi_dot += kick_xi;
    next.zeta += h * kick_zeta;
    next.xi += h * kick_xi;
    next
}

fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs trajectory `index` of the ensemble, returning the recorded states.
pub fn simulate_trajectory(
    config: &SimConfig,
    params: &PhysicalParams,
    initial: &TrajectoryState,
    index: u64,
) -> Result<Vec<TrajectoryState>> {
    config.validate(params)?;
    let mut out = Vec::with_capacity((config.n_steps / config.record_every + 1) as usize);
    run(config, params, initial, index, |s| out.push(*s))?;
    Ok(out)
}

fn run<F: FnMut(&TrajectoryState)>(
    config: &SimConfig,
    params: &PhysicalParams,
    initial: &TrajectoryState,
    index: u64,
    mut record: F,
) -> Result<()> {
    let mut rng = trajectory_rng(config.seed, index);
    let mut s = *initial;
    record(&s);
    for n in 1..=config.n_steps {
        s = step(&s, config, params, &mut rng);
        if !s.is_finite() {
            return Err(Error::NonFinite {
                step: n,
                detail: format!("trajectory {index}: {s:?}"),
            });
        }
        if n % config.record_every == 0 {
            record(&s);
        }
    }
    Ok(())
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Sum {
    sum: f64,
    comp: f64,
}

impl Sum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(&mut self, other: &Sum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone)]
struct Partial {
    zeta: Vec<Sum>,
    zeta_sq: Vec<Sum>,
    xi: Vec<Sum>,
    xi_sq: Vec<Sum>,
    power: Vec<Sum>,
}

impl Partial {
    fn new(n: usize, n_freq: usize) -> Self {
        Partial {
            zeta: vec![Sum::default(); n],
            zeta_sq: vec![Sum::default(); n],
            xi: vec![Sum::default(); n],
            xi_sq: vec![Sum::default(); n],
            power: vec![Sum::default(); n_freq],
        }
    }

    fn merge(&mut self, other: &Partial) {
        let pairs = [
            (&mut self.zeta, &other.zeta),
            (&mut self.zeta_sq, &other.zeta_sq),
            (&mut self.xi, &other.xi),
            (&mut self.xi_sq, &other.xi_sq),
            (&mut self.power, &other.power),
        ];
        for (mine, theirs) in pairs {
            for (a, b) in mine.iter_mut().zip(theirs) {
                a.merge(b);
            }
        }
    }
}

/// Per-slice ensemble statistics plus the ensemble-averaged periodogram of ξ.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub t: Vec<f64>,
    pub mean_zeta: Vec<f64>,
    /// `⟨(ζ(t) − ζ(0))²⟩`
    pub msd_zeta: Vec<f64>,
    pub mean_xi: Vec<f64>,
    pub msd_xi: Vec<f64>,
    /// Angular frequencies of the ξ spectrum, `0 ≤ ω ≤ π/Δt_record`.
    pub frequencies: Vec<f64>,
    pub xi_spectrum: Vec<f64>,
    pub ensemble: usize,
}

const CHUNK: usize = 32;

pub fn simulate_ensemble(
    config: &SimConfig,
    params: &PhysicalParams,
    initial: &TrajectoryState,
) -> Result<EnsembleStats> {
    params.validate()?;
    config.validate(params)?;
    let n_rec = (config.n_steps / config.record_every + 1) as usize;
    let n_freq = n_rec / 2 + 1;
    let chunks: Vec<(usize, usize)> = (0..config.ensemble)
        .step_by(CHUNK)
        .map(|start| (start, (start + CHUNK).min(config.ensemble)))
        .collect();

    let partials: Vec<Result<Partial>> = chunks
        .par_iter()
        .map(|&(start, end)| {
            let mut partial = Partial::new(n_rec, n_freq);
            let fft = FftPlanner::<f64>::new().plan_fft_forward(n_rec);
            let mut zeta = Vec::with_capacity(n_rec);
            let mut xi = Vec::with_capacity(n_rec);
            for index in start..end {
                zeta.clear();
                xi.clear();
                run(config, params, initial, index as u64, |s| {
                    zeta.push(s.zeta);
                    xi.push(s.xi);
                })?;
                for i in 0..n_rec {
                    let dz = zeta[i] - zeta[0];
                    let dx = xi[i] - xi[0];
                    partial.zeta[i].add(zeta[i]);
                    partial.zeta_sq[i].add(dz * dz);
                    partial.xi[i].add(xi[i]);
                    partial.xi_sq[i].add(dx * dx);
                }
                let mean = xi.iter().sum::<f64>() / n_rec as f64;
                let mut buf: Vec<Complex<f64>> =
                    xi.iter().map(|v| Complex::new(v - mean, 0.0)).collect();
                fft.process(&mut buf);
                for (p, c) in partial.power.iter_mut().zip(&buf) {
                    p.add(c.norm_sqr());
                }
            }
            Ok(partial)
        })
        .collect();

    let mut total = Partial::new(n_rec, n_freq);
    for p in partials {
        total.merge(&p?);
    }

    let n = config.ensemble as f64;
    let dt_rec = config.dt * config.record_every as f64;
    let avg = |v: &[Sum]| v.iter().map(|s| s.value() / n).collect::<Vec<_>>();
    let spectrum_norm = dt_rec / (n_rec as f64 * n);
    Ok(EnsembleStats {
        t: (0..n_rec).map(|i| initial.t + i as f64 * dt_rec).collect(),
        mean_zeta: avg(&total.zeta),
        msd_zeta: avg(&total.zeta_sq),
        mean_xi: avg(&total.xi),
        msd_xi: avg(&total.xi_sq),
        frequencies: (0..n_freq)
            .map(|k| 2.0 * PI * k as f64 / (n_rec as f64 * dt_rec))
            .collect(),
        xi_spectrum: total
            .power
            .iter()
            .map(|s| s.value() * spectrum_norm)
            .collect(),
        ensemble: config.ensemble,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    Zeta,
    Xi,
}

impl EnsembleStats {
    /// Frequency of the largest non-zero-frequency spectral bin, refined by a
    /// parabola through its neighbours.
    pub fn dominant_frequency(&self) -> Option<f64> {
        let (k, _) = self
            .xi_spectrum
            .iter()
            .enumerate()
            .skip(1)
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())?;
        if k + 1 >= self.xi_spectrum.len() {
            return Some(self.frequencies[k]);
        }
        let (l, c, r) = (
            self.xi_spectrum[k - 1],
            self.xi_spectrum[k],
            self.xi_spectrum[k + 1],
        );
        let denom = l - 2.0 * c + r;
        let shift = if denom != 0.0 {
            0.5 * (l - r) / denom
        } else {
            0.0
        };
        let dw = self.frequencies[1] - self.frequencies[0];
        Some(self.frequencies[k] + shift.clamp(-0.5, 0.5) * dw)
    }

    /// Least-squares slope of the MSD over samples with `t ≥ t_from`.
    pub fn msd_slope(&self, coord: Coordinate, t_from: f64) -> Option<f64> {
        let msd = match coord {
            Coordinate::Zeta => &self.msd_zeta,
            Coordinate::Xi => &self.msd_xi,
        };
        let pts: Vec<(f64, f64)> = self
            .t
            .iter()
            .zip(msd)
            .filter(|(t, _)| **t >= t_from)
            .map(|(t, m)| (*t, *m))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let mm = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mm)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
        Some(sxy / sxx)
    }

    pub const CSV_HEADER: &'static str = "t,mean_zeta,msd_zeta,mean_xi,msd_xi";

    /// Writes `#`-prefixed `comments`, the header, then one row per slice.
    pub fn write_csv<W: Write + ?Sized>(&self, out: &mut W, comments: &[String]) -> io::Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for i in 0..self.t.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                format_float(self.t[i]),
                format_float(self.mean_zeta[i]),
                format_float(self.msd_zeta[i]),
                format_float(self.mean_xi[i]),
                format_float(self.msd_xi[i]),
            )?;
        }
        Ok(())
    }

    pub const BINARY_MAGIC: &'static [u8; 8] = b"QBMLGV01";

    /// Binary dump: the 8-byte magic, `u64` row count, `u64` column count (5),
    /// then row-major little-endian `f64` in CSV column order.
    pub fn write_binary<W: Write + ?Sized>(&self, out: &mut W) -> io::Result<()> {
        out.write_all(Self::BINARY_MAGIC)?;
        out.write_all(&(self.t.len() as u64).to_le_bytes())?;
        out.write_all(&5u64.to_le_bytes())?;
        for i in 0..self.t.len() {
            for v in [
                self.t[i],
                self.mean_zeta[i],
                self.msd_zeta[i],
                self.mean_xi[i],
                self.msd_xi[i],
            ] {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> PhysicalParams {
        PhysicalParams::natural(1.0, 0.5, 2.0, 1.0, 0.3).unwrap()
    }

    #[test]
    fn friction_vanishes_at_contact() {
        let p = params();
        let s = TrajectoryState {
            xi_dot: 2.0,
            ..Default::default()
        };
        let a = drift(&s, &p);
        assert_eq!(a.xi, 0.0);
    }

    #[test]
    fn far_apart_frictions_approach_eta() {
        let p = params();
        let s = TrajectoryState {
            xi: 1e4,
            xi_dot: 1.0,
            zeta_dot: 1.0,
            ..Default::default()
        };
        let a = drift(&s, &p);
        assert!((a.zeta + p.eta / p.mass).abs() < 1e-9);
        assert!((a.xi + p.eta / p.mass).abs() < 1e-9);
    }

    #[test]
    fn small_separation_is_harmonic() {
        let p = params();
        let s = TrajectoryState {
            xi: 1e-4,
            ..Default::default()
        };
        let a = drift(&s, &p);
        let expected = -p.omega0_sq() * 1e-4;
        assert!((a.xi - expected).abs() / expected.abs() < 1e-7);
    }

    #[test]
    fn free_velocity_decay() {
        let p = params();
        let cfg = SimConfig {
            dt: 0.01 * p.mass / p.eta,
            n_steps: 500,
            noise_mode: NoiseMode::Off,
            potential: false,
            ..Default::default()
        };
        let init = TrajectoryState {
            xi: 1e6,
            zeta_dot: 1.0,
            ..Default::default()
        };
        let traj = simulate_trajectory(&cfg, &p, &init, 0).unwrap();
        for s in &traj {
            let exact = (-p.eta / p.mass * s.t).exp();
            assert!((s.zeta_dot - exact).abs() / exact < 0.01);
        }
    }

    #[test]
    fn validate_rejects_coarse_oscillatory_step() {
        let p = params();
        let cfg = SimConfig {
            dt: 1.0,
            ..Default::default()
        };
        assert!(cfg.validate(&p).is_err());
        let free = SimConfig {
            potential: false,
            ..cfg
        };
        assert!(free.validate(&p).is_ok());
    }

    #[test]
    fn seeded_runs_are_identical() {
        let p = params();
        let cfg = SimConfig {
            dt: 0.01,
            n_steps: 200,
            seed: 9,
            ensemble: 70,
            record_every: 10,
            ..Default::default()
        };
        let init = TrajectoryState {
            xi: 0.3,
            ..Default::default()
        };
        let a = simulate_ensemble(&cfg, &p, &init).unwrap();
        let b = simulate_ensemble(&cfg, &p, &init).unwrap();
        assert_eq!(a, b);
        let other = simulate_ensemble(&SimConfig { seed: 10, ..cfg }, &p, &init).unwrap();
        assert_ne!(a.msd_xi, other.msd_xi);
    }

    #[test]
    fn zero_temperature_relaxes_to_contact() {
        let p = params().with_temperature(0.0);
        let cfg = SimConfig {
            dt: 0.01,
            n_steps: 40_000,
            record_every: 1000,
            ..Default::default()
        };
        let init = TrajectoryState {
            xi: 0.8,
            ..Default::default()
        };
        let traj = simulate_trajectory(&cfg, &p, &init, 0).unwrap();
        let last = traj.last().unwrap();
        assert!(last.xi.abs() < 0.8);
        let amp = |s: &TrajectoryState| {
            0.5 * p.mass * s.xi_dot * s.xi_dot + crate::model::v_eff(s.xi, &p)
                - crate::model::v_eff(0.0, &p)
        };
        assert!(amp(last) < amp(&traj[0]));
        for w in traj.windows(2) {
            assert!(amp(&w[1]) <= amp(&w[0]) + 1e-9);
        }
    }

    #[test]
    fn csv_and_binary_layout() {
        let stats = EnsembleStats {
            t: vec![0.0, 0.5],
            mean_zeta: vec![0.0, 0.1],
            msd_zeta: vec![0.0, 0.01],
            mean_xi: vec![1.0, 1.0],
            msd_xi: vec![0.0, 0.0],
            frequencies: vec![0.0, 1.0],
            xi_spectrum: vec![0.0, 0.0],
            ensemble: 1,
        };
        let mut csv = Vec::new();
        stats.write_csv(&mut csv, &["seed: 1".to_string()]).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# seed: 1");
        assert_eq!(lines[1], EnsembleStats::CSV_HEADER);
        assert_eq!(lines.len(), 4);

        let mut bin = Vec::new();
        stats.write_binary(&mut bin).unwrap();
        assert_eq!(&bin[..8], EnsembleStats::BINARY_MAGIC);
        assert_eq!(u64::from_le_bytes(bin[8..16].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bin[16..24].try_into().unwrap()), 5);
        assert_eq!(bin.len(), 24 + 2 * 5 * 8);
        let v = f64::from_le_bytes(bin[24 + 6 * 8..24 + 7 * 8].try_into().unwrap());
        assert_eq!(v, 0.1);
    }
}
