//! Fourier multiplier calculus on a [`Grid`].
//!
//! Symbols receive the frequency vector `ξ` in cycles per unit length; any
//! symbol that represents differentiation goes through
//! [`physical_frequency`] so that derivatives carry the `2π`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{physical_frequency, Grid, Vec2};

/// What a multiplier does with the Nyquist mode, which has no sign of frequency.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NyquistRule {
    /// Drop it (derivatives, fractional powers).
    Zero,
    /// Evaluate the symbol there (even, bounded symbols).
    Keep,
}

pub type Symbol = dyn Fn(Vec2) -> Complex64 + Send + Sync;

#[derive(Clone)]
pub struct Multiplier {
    label: String,
    symbol: Arc<Symbol>,
    nyquist: NyquistRule,
}

impl Multiplier {
    /// A multiplier that zeroes the Nyquist mode.
    pub fn new(label: impl Into<String>, symbol: impl Fn(Vec2) -> Complex64 + Send + Sync + 'static) -> Self {
        Multiplier {
            label: label.into(),
            symbol: Arc::new(symbol),
            nyquist: NyquistRule::Zero,
        }
    }

    /// Real-valued symbol.
    pub fn real(label: impl Into<String>, symbol: impl Fn(Vec2) -> f64 + Send + Sync + 'static) -> Self {
        Multiplier::new(label, move |xi| Complex64::new(symbol(xi), 0.0))
    }

    pub fn keep_nyquist(mut self) -> Self {
        self.nyquist = NyquistRule::Keep;
        self
    }

    pub fn identity() -> Self {
        Multiplier::real("identity", |_| 1.0).keep_nyquist()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn nyquist_rule(&self) -> NyquistRule {
        self.nyquist
    }

    pub fn eval(&self, xi: Vec2) -> Complex64 {
        (self.symbol)(xi)
    }

    /// Symbol values on the whole spectral lattice of `grid`, FFT order.
    pub fn on_grid(&self, grid: &Grid) -> Vec<Complex64> {
        (0..grid.len())
            .map(|k| {
                if self.nyquist == NyquistRule::Zero && grid.is_nyquist(k) {
                    Complex64::new(0.0, 0.0)
                } else {
                    self.eval(grid.frequency(k))
                }
            })
            .collect()
    }
}

impl fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Multiplier")
            .field("label", &self.label)
            .field("nyquist", &self.nyquist)
            .finish()
    }
}

/// Forward DFT of the samples.
pub fn spectrum(f: &Field) -> Vec<Complex64> {
    let mut buf = f.values().to_vec();
    f.grid().forward(&mut buf);
    buf
}

/// Field whose DFT is `spec`.
pub fn from_spectrum(grid: &Grid, mut spec: Vec<Complex64>) -> Field {
    grid.inverse(&mut spec);
    Field::from_parts(grid, spec)
}

pub fn apply_multiplier(f: &Field, m: &Multiplier) -> Field {
    let grid = f.grid();
    let mut spec = spectrum(f);
    for (k, v) in spec.iter_mut().enumerate() {
        if m.nyquist == NyquistRule::Zero && grid.is_nyquist(k) {
            *v = Complex64::new(0.0, 0.0);
        } else {
            *v *= m.eval(grid.frequency(k));
        }
    }
    from_spectrum(grid, spec)
}

#[inline]
pub fn abs_frequency(xi: Vec2) -> f64 {
    xi[0].hypot(xi[1])
}

/// Symbol `|2πξ|^s`, with the zero mode sent to 0 for `s != 0`.
pub fn fractional_symbol(s: f64) -> impl Fn(Vec2) -> f64 + Send + Sync + Copy {
    move |xi| {
        if s == 0.0 {
            return 1.0;
        }
        let r = physical_frequency(abs_frequency(xi));
        if r == 0.0 {
            0.0
        } else {
            r.powf(s)
        }
    }
}

/// `|∇|^s f` for `s >= 0`.
pub fn fractional_derivative(f: &Field, s: f64) -> Result<Field> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::param("s", format!("fractional order must be >= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(f.clone());
    }
    Ok(apply_multiplier(f, &Multiplier::real(format!("|D|^{s}"), fractional_symbol(s))))
}

/// Spectral gradient, one field per axis.
pub fn gradient(f: &Field) -> Vec<Field> {
    let grid = f.grid();
    let spec = spectrum(f);
    (0..grid.dim())
        .map(|axis| {
            let mut d = spec.clone();
            for (k, v) in d.iter_mut().enumerate() {
                if grid.is_nyquist(k) {
                    *v = Complex64::new(0.0, 0.0);
                } else {
                    *v *= Complex64::new(0.0, physical_frequency(grid.frequency(k)[axis]));
                }
            }
            from_spectrum(grid, d)
        })
        .collect()
}

/// Spectral gradient of a real sampled function.
pub fn real_gradient(grid: &Grid, values: &[f64]) -> Vec<Vec<f64>> {
    gradient(&Field::from_real(grid, values))
        .into_iter()
        .map(|g| g.real_parts())
        .collect()
}

/// Gaussian smoothing `G_ε f = g_ε * f` with the unit-mass kernel
/// `g_ε(z) = exp(-|z|²/ε²) / (√π ε)^n`, i.e. symbol `exp(-ε²|2πξ|²/4)`.
pub fn heat_smooth(f: &Field, epsilon: f64) -> Field {
    let e2 = epsilon * epsilon;
    let m = Multiplier::real("heat", move |xi| {
        let k = physical_frequency(abs_frequency(xi));
        (-0.25 * e2 * k * k).exp()
    })
    .keep_nyquist();
    apply_multiplier(f, &m)
}

/// Unitary free Schrödinger group `e^{itΔ}`: symbol `exp(-i t |2πξ|²)`.
pub fn free_propagate(f: &Field, t: f64) -> Field {
    if t == 0.0 {
        return f.clone();
    }
    let m = Multiplier::new("free", move |xi| {
        let k = physical_frequency(abs_frequency(xi));
        Complex64::from_polar(1.0, -t * k * k)
    })
    .keep_nyquist();
    apply_multiplier(f, &m)
}

fn smoothstep(t: f64) -> f64 {
    let psi = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let a = psi(t);
    let b = psi(1.0 - t);
    a / (a + b)
}

/// Smooth even bump: 1 on `|r| <= 1`, 0 on `|r| >= 2`, `C^∞` in between.
pub fn bump(r: f64) -> f64 {
    let r = r.abs();
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        1.0 - smoothstep(r - 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpKind {
    /// `P_{≤N}`
    Leq,
    /// `P_N`
    Band,
    /// `P_{>N}`
    Gt,
}

/// Frequency `N` is dyadic on the lattice: `N·L = 2^j` for an integer `j >= 0`.
pub fn is_lattice_dyadic(grid: &Grid, n: f64) -> bool {
    let modes = n * grid.length();
    if !(modes.is_finite() && modes >= 1.0) {
        return false;
    }
    let j = modes.log2().round();
    (modes - 2f64.powf(j)).abs() <= 1e-9 * modes
}

pub fn littlewood_paley_symbol(kind: LpKind, n: f64) -> impl Fn(Vec2) -> f64 + Send + Sync + Copy {
    move |xi| {
        let r = abs_frequency(xi) / n;
        match kind {
            LpKind::Leq => bump(r),
            LpKind::Band => bump(r) - bump(2.0 * r),
            LpKind::Gt => 1.0 - bump(r),
        }
    }
}

/// Smooth Littlewood–Paley projection at dyadic frequency `n` (cycles per unit length).
pub fn littlewood_paley(f: &Field, n: f64, kind: LpKind) -> Result<Field> {
    let grid = f.grid();
    if !is_lattice_dyadic(grid, n) || n > grid.nyquist_frequency() {
        return Err(Error::param(
            "N",
            format!(
                "must be a dyadic multiple of 1/L in [{}, {}], got {n}",
                grid.fundamental_frequency(),
                grid.nyquist_frequency()
            ),
        ));
    }
    let m = Multiplier::real(format!("P[{kind:?}]{n}"), littlewood_paley_symbol(kind, n)).keep_nyquist();
    Ok(apply_multiplier(f, &m))
}

/// Radial I-operator symbol `m_N(|ξ|)`.
///
/// Between `N` and `2N` the logarithm of the symbol is the cubic Hermite
/// interpolant in `log|ξ|` with end slopes `0` and `s-1`, which is monotone
/// and `C^1` at both joins.
pub fn i_symbol(abs_xi: f64, n: f64, s: f64) -> f64 {
    if abs_xi <= n {
        return 1.0;
    }
    if abs_xi >= 2.0 * n {
        return (abs_xi / n).powf(s - 1.0);
    }
    let span = std::f64::consts::LN_2;
    let t = (abs_xi / n).ln() / span;
    let log_m = (s - 1.0) * span * t * t * (2.0 - t);
    log_m.exp()
}

/// `I_N f` for a lattice-dyadic `n` (cycles per unit length) with `n·L >= 2` and `0 < s < 1`.
///
/// `n` above the Nyquist frequency is accepted; the operator is then the
/// identity on every mode with `|ξ| <= n`.
pub fn i_operator(f: &Field, n: f64, s: f64) -> Result<Field> {
    validate_i_params(f.grid(), n, s)?;
    let m = Multiplier::real(format!("I[N={n},s={s}]"), move |xi| i_symbol(abs_frequency(xi), n, s)).keep_nyquist();
    Ok(apply_multiplier(f, &m))
}

pub(crate) fn validate_i_params(grid: &Grid, n: f64, s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::param("s", format!("must lie in (0, 1), got {s}")));
    }
    if !is_lattice_dyadic(grid, n) || n * grid.length() < 2.0 - 1e-9 {
        return Err(Error::param(
            "N",
            format!("must be 2^j / L with j >= 1 (L = {}), got {n}", grid.length()),
        ));
    }
    Ok(())
}

/// Plane wave `A e^{2πi ξ₀·x}`; `xi0` must lie on the lattice to be periodic.
pub fn plane_wave(grid: &Grid, xi0: Vec2, amplitude: f64) -> Field {
    let values = (0..grid.len())
        .map(|i| {
            let [x, y] = grid.point(i);
            Complex64::from_polar(amplitude, 2.0 * PI * (xi0[0] * x + xi0[1] * y))
        })
        .collect();
    Field::from_parts(grid, values)
}
