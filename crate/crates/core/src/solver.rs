//! Strang split-step integration of `i u_t + Δu = |u|^{p-1} u` and its
//! conserved quantities.

use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::spectral::{gradient, spectrum};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub p: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub dt_out: f64,
}

fn integer_ratio(num: f64, den: f64) -> Option<usize> {
    let r = num / den;
    let k = r.round();
    if k >= 1.0 && (r - k).abs() <= 1e-9 * k {
        Some(k as usize)
    } else {
        None
    }
}

impl SolverConfig {
    pub fn new(p: f64, dt: f64, t_final: f64, dt_out: f64) -> Result<Self> {
        let cfg = SolverConfig { p, dt, t_final, dt_out };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Config with the default snapshot cadence `dt_out = 10 dt`.
    pub fn with_default_output(p: f64, dt: f64, t_final: f64) -> Result<Self> {
        SolverConfig::new(p, dt, t_final, 10.0 * dt)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(Error::param("p", format!("must be > 1, got {}", self.p)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::param("dt", format!("must be > 0, got {}", self.dt)));
        }
        if !(self.dt_out.is_finite() && self.dt_out >= self.dt) {
            return Err(Error::param("dt_out", format!("must be >= dt, got {}", self.dt_out)));
        }
        if !(self.t_final.is_finite() && self.t_final >= self.dt_out) {
            return Err(Error::param("T", format!("must be >= dt_out, got {}", self.t_final)));
        }
        if integer_ratio(self.dt_out, self.dt).is_none() {
            return Err(Error::param("dt_out", "must be an integer multiple of dt"));
        }
        if integer_ratio(self.t_final, self.dt_out).is_none() {
            return Err(Error::param("T", "must be an integer multiple of dt_out"));
        }
        Ok(())
    }

    pub fn steps_per_output(&self) -> usize {
        integer_ratio(self.dt_out, self.dt).unwrap_or(1)
    }

    /// Number of output intervals; the trajectory holds one more snapshot.
    pub fn outputs(&self) -> usize {
        integer_ratio(self.t_final, self.dt_out).unwrap_or(1)
    }
}

/// Which parts of the equation are integrated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flow {
    #[default]
    Nonlinear,
    /// Nonlinear coupling switched off: the free Schrödinger flow.
    Linear,
    /// No evolution at all; every snapshot equals the initial data.
    Frozen,
}

/// What `evolve` does when the truncation guard trips.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BreachPolicy {
    #[default]
    Error,
    /// Stop and return the snapshots recorded so far.
    Stop,
}

#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    pub flow: Flow,
    pub breach: BreachPolicy,
    /// Largest admissible mass fraction outside the guard box.
    pub guard_tolerance: f64,
    /// Sup-norm growth factor treated as a numerical blowup.
    pub blowup_factor: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            flow: Flow::Nonlinear,
            breach: BreachPolicy::Error,
            guard_tolerance: 1e-6,
            blowup_factor: 10.0,
        }
    }
}

impl EvolveOptions {
    pub fn with_flow(flow: Flow) -> Self {
        EvolveOptions {
            flow,
            ..Default::default()
        }
    }
}

/// Exact flow of `i u_t = |u|^{p-1} u` over time `dt`.
pub fn nonlinear_phase(f: &Field, p: f64, dt: f64) -> Field {
    f.map(|u| u * Complex64::from_polar(1.0, -nonlinear_potential(u.norm_sqr(), p) * dt))
}

#[inline]
fn nonlinear_potential(abs_sq: f64, p: f64) -> f64 {
    if p == 3.0 {
        abs_sq
    } else if abs_sq == 0.0 {
        0.0
    } else {
        abs_sq.powf(0.5 * (p - 1.0))
    }
}

/// Split-step integrator with precomputed propagator tables.
///
/// Any real `dt` is accepted, so negative steps run the flow backwards.
pub struct Stepper {
    grid: Grid,
    p: f64,
    dt: f64,
    flow: Flow,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
}

impl Stepper {
    pub fn new(grid: &Grid, p: f64, dt: f64, flow: Flow) -> Self {
        let table = |t: f64| -> Vec<Complex64> {
            (0..grid.len())
                .map(|k| Complex64::from_polar(1.0, -t * grid.wavenumber_sq(k)))
                .collect()
        };
        Stepper {
            grid: grid.clone(),
            p,
            dt,
            flow,
            half: table(0.5 * dt),
            full: table(dt),
        }
    }

    fn propagate(&self, buf: &mut [Complex64], table: &[Complex64]) {
        self.grid.forward(buf);
        for (v, m) in buf.iter_mut().zip(table) {
            *v *= m;
        }
        self.grid.inverse(buf);
    }

    fn phase(&self, buf: &mut [Complex64]) {
        let dt = self.dt;
        for u in buf.iter_mut() {
            *u *= Complex64::from_polar(1.0, -nonlinear_potential(u.norm_sqr(), self.p) * dt);
        }
    }

    /// One Strang step `F(dt/2) ∘ N(dt) ∘ F(dt/2)`.
    pub fn step(&self, f: &Field) -> Result<Field> {
        let mut buf = f.values().to_vec();
        self.advance(&mut buf, 1);
        Field::new(&self.grid, buf).map_err(|_| Error::NumericalBlowup {
            t: self.dt,
            reason: "non-finite value after step".into(),
        })
    }

    /// `steps` Strang steps with adjacent free half-steps fused.
    pub fn advance(&self, buf: &mut [Complex64], steps: usize) {
        if steps == 0 {
            return;
        }
        match self.flow {
            Flow::Frozen => {}
            Flow::Linear => {
                for _ in 0..steps {
                    self.propagate(buf, &self.full);
                }
            }
            Flow::Nonlinear => {
                self.propagate(buf, &self.half);
                for i in 0..steps {
                    self.phase(buf);
                    let table = if i + 1 == steps { &self.half } else { &self.full };
                    self.propagate(buf, table);
                }
            }
        }
    }
}

pub fn strang_step(f: &Field, cfg: &SolverConfig) -> Result<Field> {
    Stepper::new(f.grid(), cfg.p, cfg.dt, Flow::Nonlinear).step(f)
}

/// Fraction of mass outside the central box `max_j |x_j| <= 0.75 L/2`.
pub fn outer_mass_fraction(f: &Field) -> f64 {
    let grid = f.grid();
    let cut = 0.375 * grid.length();
    let mut total = 0.0;
    let mut outer = 0.0;
    for (i, v) in f.values().iter().enumerate() {
        let m = v.norm_sqr();
        total += m;
        let [x, y] = grid.point(i);
        if x.abs().max(y.abs()) > cut {
            outer += m;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        outer / total
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuardStats {
    pub max_outer_fraction: f64,
    pub max_sup_ratio: f64,
    /// Time and outer fraction of a breach under [`BreachPolicy::Stop`].
    pub breach: Option<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    grid: Grid,
    config: SolverConfig,
    flow: Flow,
    snapshots: Vec<(f64, Field)>,
    guard: GuardStats,
}

pub fn evolve(f0: &Field, cfg: &SolverConfig) -> Result<Trajectory> {
    evolve_with(f0, cfg, &EvolveOptions::default())
}

pub fn evolve_with(f0: &Field, cfg: &SolverConfig, opts: &EvolveOptions) -> Result<Trajectory> {
    cfg.validate()?;
    let grid = f0.grid().clone();
    let outer0 = outer_mass_fraction(f0);
    if outer0 >= opts.guard_tolerance {
        return Err(Error::TruncationBreach {
            t: 0.0,
            fraction: outer0,
        });
    }
    let sup0 = f0.sup_abs();
    let stepper = Stepper::new(&grid, cfg.p, cfg.dt, opts.flow);
    let per = cfg.steps_per_output();
    let mut guard = GuardStats {
        max_outer_fraction: outer0,
        max_sup_ratio: 1.0,
        breach: None,
    };
    let mut snapshots = Vec::with_capacity(cfg.outputs() + 1);
    snapshots.push((0.0, f0.clone()));
    let mut buf = f0.values().to_vec();
    for i in 1..=cfg.outputs() {
        let t = i as f64 * cfg.dt_out;
        stepper.advance(&mut buf, per);
        let field = Field::new(&grid, buf.clone()).map_err(|_| Error::NumericalBlowup {
            t,
            reason: "non-finite value".into(),
        })?;
        let sup = field.sup_abs();
        if sup0 > 0.0 {
            let ratio = sup / sup0;
            guard.max_sup_ratio = guard.max_sup_ratio.max(ratio);
            if ratio > opts.blowup_factor {
                return Err(Error::NumericalBlowup {
                    t,
                    reason: format!("sup norm grew by a factor {ratio:.3e}"),
                });
            }
        }
        let outer = outer_mass_fraction(&field);
        if outer >= opts.guard_tolerance {
            match opts.breach {
                BreachPolicy::Error => return Err(Error::TruncationBreach { t, fraction: outer }),
                BreachPolicy::Stop => {
                    guard.breach = Some((t, outer));
                    break;
                }
            }
        }
        guard.max_outer_fraction = guard.max_outer_fraction.max(outer);
        snapshots.push((t, field));
    }
    Ok(Trajectory {
        grid,
        config: *cfg,
        flow: opts.flow,
        snapshots,
        guard,
    })
}

#[derive(Serialize, Deserialize)]
struct GridRecord {
    n: usize,
    #[serde(rename = "L")]
    length: f64,
    #[serde(rename = "M")]
    points: usize,
}

#[derive(Serialize, Deserialize)]
struct SnapshotRecord {
    index: usize,
    t: f64,
    file: String,
}

#[derive(Serialize, Deserialize)]
struct TrajectoryManifest {
    grid: GridRecord,
    config: SolverConfig,
    flow: Flow,
    guard: GuardStats,
    snapshots: Vec<SnapshotRecord>,
}

impl Trajectory {
    /// Assemble a trajectory from uniformly spaced snapshots starting at `t = 0`.
    pub fn from_snapshots(config: SolverConfig, flow: Flow, snapshots: Vec<(f64, Field)>) -> Result<Self> {
        let first = snapshots.first().ok_or(Error::InsufficientSnapshots(0))?;
        let grid = first.1.grid().clone();
        for (i, (t, f)) in snapshots.iter().enumerate() {
            f.check_same_grid(&first.1)?;
            let expect = i as f64 * config.dt_out;
            if (t - expect).abs() > 1e-9 * config.dt_out.max(expect) {
                return Err(Error::Format(format!("snapshot {i} at t={t}, expected {expect}")));
            }
        }
        let max_outer_fraction = snapshots.iter().map(|(_, f)| outer_mass_fraction(f)).fold(0.0, f64::max);
        let sup0 = first.1.sup_abs();
        let max_sup_ratio = if sup0 > 0.0 {
            snapshots.iter().map(|(_, f)| f.sup_abs() / sup0).fold(0.0, f64::max)
        } else {
            1.0
        };
        Ok(Trajectory {
            grid,
            config,
            flow,
            snapshots,
            guard: GuardStats {
                max_outer_fraction,
                max_sup_ratio,
                breach: None,
            },
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn flow(&self) -> Flow {
        self.flow
    }

    pub fn guard(&self) -> &GuardStats {
        &self.guard
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn dt_out(&self) -> f64 {
        self.config.dt_out
    }

    /// Time covered by the recorded snapshots.
    pub fn span(&self) -> f64 {
        self.snapshots.last().map(|s| s.0).unwrap_or(0.0)
    }

    pub fn snapshots(&self) -> &[(f64, Field)] {
        &self.snapshots
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.0).collect()
    }

    pub fn fields(&self) -> impl Iterator<Item = &Field> {
        self.snapshots.iter().map(|s| &s.1)
    }

    pub fn first(&self) -> &Field {
        &self.snapshots[0].1
    }

    pub fn last(&self) -> &Field {
        &self.snapshots[self.snapshots.len() - 1].1
    }

    /// Write `manifest.json` and one binary file per snapshot into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut records = Vec::with_capacity(self.snapshots.len());
        for (index, (t, f)) in self.snapshots.iter().enumerate() {
            let file = format!("snap_{index:06}.bin");
            let out = BufWriter::new(fs::File::create(dir.join(&file))?);
            f.write_binary(out)?;
            records.push(SnapshotRecord { index, t: *t, file });
        }
        let manifest = TrajectoryManifest {
            grid: GridRecord {
                n: self.grid.dim(),
                length: self.grid.length(),
                points: self.grid.points(),
            },
            config: self.config,
            flow: self.flow,
            guard: self.guard.clone(),
            snapshots: records,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
        fs::write(dir.join("manifest.json"), text)?;
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Trajectory> {
        let text = fs::read_to_string(dir.join("manifest.json"))?;
        let manifest: TrajectoryManifest =
            serde_json::from_str(&text).map_err(|e| Error::Format(format!("trajectory manifest: {e}")))?;
        let grid = Grid::new(manifest.grid.n, manifest.grid.length, manifest.grid.points)?;
        let mut snapshots = Vec::with_capacity(manifest.snapshots.len());
        for rec in &manifest.snapshots {
            let f = Field::read_binary(BufReader::new(fs::File::open(dir.join(&rec.file))?))?;
            if f.grid() != &grid {
                return Err(Error::GridMismatch);
            }
            snapshots.push((rec.t, f.on_grid(&grid)?));
        }
        if snapshots.is_empty() {
            return Err(Error::InsufficientSnapshots(0));
        }
        Ok(Trajectory {
            grid,
            config: manifest.config,
            flow: manifest.flow,
            snapshots,
            guard: manifest.guard,
        })
    }
}

/// `‖f‖²_{L²}`.
pub fn mass(f: &Field) -> f64 {
    f.grid().cell_volume() * f.values().iter().map(|v| v.norm_sqr()).sum::<f64>()
}

/// `½‖∇f‖² + ‖f‖^{p+1}_{L^{p+1}}/(p+1)`, gradient term computed spectrally.
pub fn energy(f: &Field, p: f64) -> f64 {
    kinetic_energy(f) + potential_energy(f, p)
}

/// `½‖∇f‖²_{L²}`.
pub fn kinetic_energy(f: &Field) -> f64 {
    let grid = f.grid();
    let spec = spectrum(f);
    let sum: f64 = spec
        .iter()
        .enumerate()
        .filter(|(k, _)| !grid.is_nyquist(*k))
        .map(|(k, v)| grid.wavenumber_sq(k) * v.norm_sqr())
        .sum();
    0.5 * grid.cell_volume() / grid.len() as f64 * sum
}

/// `‖f‖^{p+1}_{L^{p+1}}/(p+1)`.
pub fn potential_energy(f: &Field, p: f64) -> f64 {
    let e = 0.5 * (p + 1.0);
    let sum: f64 = f.values().iter().map(|v| v.norm_sqr().powf(e)).sum();
    f.grid().cell_volume() * sum / (p + 1.0)
}

/// `Im ∫ f̄ ∇f`, one component per axis.
pub fn momentum(f: &Field) -> Vec<f64> {
    let h = f.grid().cell_volume();
    gradient(f)
        .iter()
        .map(|g| h * f.values().iter().zip(g.values()).map(|(u, du)| (u.conj() * du).im).sum::<f64>())
        .collect()
}

/// Mass fraction in modes with `|k_j| > M/4` on some axis.
pub fn spectral_tail_fraction(f: &Field) -> f64 {
    let grid = f.grid();
    let quarter = grid.points() as i64 / 4;
    let spec = spectrum(f);
    let mut total = 0.0;
    let mut tail = 0.0;
    for (k, v) in spec.iter().enumerate() {
        let m = v.norm_sqr();
        total += m;
        let [i, j] = grid.axes(k);
        let high = grid.mode(i).abs() > quarter || (grid.dim() == 2 && grid.mode(j).abs() > quarter);
        if high {
            tail += m;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

/// Scaling symmetry `u ↦ λ^{-2/(p-1)} u(x/λ)`.
///
/// The samples are reused unchanged on a box of side `λL`, so no
/// interpolation is involved. A warning is logged when the spectral tail
/// of the data exceeds `1e-8`, since the scaled grid is no finer than the old one.
pub fn rescale(f: &Field, lambda: f64, p: f64) -> Result<(Field, Grid)> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::param("lambda", format!("must be > 0, got {lambda}")));
    }
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::param("p", format!("must be > 1, got {p}")));
    }
    let grid = f.grid().scaled(lambda)?;
    let tail = spectral_tail_fraction(f);
    if tail > 1e-8 {
        log::warn!("rescale: spectral tail fraction {tail:.3e} exceeds 1e-8; data may be under-resolved");
    }
    let factor = lambda.powf(-2.0 / (p - 1.0));
    let values = f.values().iter().map(|v| v * factor).collect();
    Ok((Field::from_parts(&grid, values), grid))
}
