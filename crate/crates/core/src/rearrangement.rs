//! Distribution functions, decreasing rearrangements, running averages,
//! oscillation and truncations.
//!
//! Rearrangement is computed by a weighted cell sort: cells are ordered by
//! `|f(center)|` descending (ties broken by cell index for determinism) and
//! their μ-masses accumulated, which is exact for the cell-piecewise-constant
//! surrogate. Profiles keep both the exact step representation and a resample
//! onto a geometric grid; the grid spans `[1e-6·T, T]` because the downstream
//! inequalities weight small `t` via `t^{-1/D}` and log spacing resolves that
//! regime.

use crate::error::{Error, Result};
use crate::measure::{BoxDomain, CellDecomposition, MonomialWeight};

/// Number of geometric grid points used by default.
pub const DEFAULT_GRID_SIZE: usize = 4096;

/// Lower end of the geometric grid as a fraction of the support mass.
pub const GRID_SPAN: f64 = 1e-6;

/// Analytic behavior of a sampled function beyond its grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// Identically zero beyond the last grid point.
    Zero,
    /// `coef * t^exponent` beyond the last grid point; `exponent < 0`.
    Power { coef: f64, exponent: f64 },
}

impl Tail {
    pub fn value_at(&self, t: f64) -> f64 {
        match *self {
            Tail::Zero => 0.0,
            Tail::Power { coef, exponent } => coef * t.powf(exponent),
        }
    }

    /// `∫_a^∞ t^gamma · tail(t) dt`; `None` when divergent.
    pub fn integral_with_power(&self, a: f64, gamma: f64) -> Option<f64> {
        match *self {
            Tail::Zero => Some(0.0),
            Tail::Power { coef, exponent } => {
                let e = exponent + gamma;
                if e < -1.0 {
                    Some(coef * a.powf(e + 1.0) / (-(e + 1.0)))
                } else if coef == 0.0 {
                    Some(0.0)
                } else {
                    None
                }
            }
        }
    }

    pub fn scaled(&self, c: f64) -> Tail {
        match *self {
            Tail::Zero => Tail::Zero,
            Tail::Power { coef, exponent } => Tail::Power {
                coef: coef * c,
                exponent,
            },
        }
    }

    pub fn powered(&self, p: f64) -> Tail {
        match *self {
            Tail::Zero => Tail::Zero,
            Tail::Power { coef, exponent } => Tail::Power {
                coef: coef.powf(p),
                exponent: exponent * p,
            },
        }
    }
}

/// How grid samples are interpreted between grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interp {
    /// Right-continuous piecewise constant: value `v_j` on `[t_j, t_{j+1})`.
    StepRight,
    /// Piecewise linear between samples.
    Linear,
}

/// Exact nonincreasing step function: value `values[k]` on `[cum[k-1], cum[k])`.
#[derive(Debug, Clone)]
pub struct StepFn {
    pub cum: Vec<f64>,
    pub values: Vec<f64>,
}

impl StepFn {
    pub fn total(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }

    /// Right-continuous value at `t`; zero beyond the total mass.
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.cum.partition_point(|&c| c <= t);
        if k < self.values.len() {
            self.values[k]
        } else {
            0.0
        }
    }

    /// `∫_0^t` of the step function (piecewise linear in `t`).
    pub fn cumulative_at(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        let mut prev = 0.0;
        for (c, v) in self.cum.iter().zip(&self.values) {
            if t <= *c {
                return acc + v * (t - prev);
            }
            acc += v * (c - prev);
            prev = *c;
        }
        acc
    }

    pub fn integral(&self) -> f64 {
        let mut acc = 0.0;
        let mut prev = 0.0;
        for (c, v) in self.cum.iter().zip(&self.values) {
            acc += v * (c - prev);
            prev = *c;
        }
        acc
    }

    /// Lebesgue measure of `{ t : step(t) > s }` (values are nonincreasing).
    pub fn measure_above(&self, s: f64) -> f64 {
        let k = self.values.partition_point(|&v| v > s);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    /// `∫_0^∞ a(t) b(t) dt` over the merged step partition, exact.
    pub fn inner_product(&self, other: &StepFn) -> f64 {
        let mut acc = 0.0;
        let mut prev = 0.0;
        let (mut i, mut j) = (0usize, 0usize);
        while i < self.cum.len() && j < other.cum.len() {
            let next = self.cum[i].min(other.cum[j]);
            acc += self.values[i] * other.values[j] * (next - prev);
            prev = next;
            if self.cum[i] <= next {
                i += 1;
            }
            if j < other.cum.len() && other.cum[j] <= next {
                j += 1;
            }
        }
        acc
    }
}

/// Returns `n` log-spaced points on `[GRID_SPAN·t_max, t_max]`, last point exact.
pub fn geometric_grid(t_max: f64, n: usize) -> Vec<f64> {
    assert!(t_max > 0.0 && n >= 2);
    let ln_min = (GRID_SPAN * t_max).ln();
    let ln_max = t_max.ln();
    let mut grid: Vec<f64> = (0..n)
        .map(|j| (ln_min + (ln_max - ln_min) * j as f64 / (n - 1) as f64).exp())
        .collect();
    grid[n - 1] = t_max;
    grid
}

/// A nonnegative sampled function on `(0, ∞)`: geometric grid plus tail.
/// On `(0, grid[0])` the function is treated as constant `values[0]`.
#[derive(Debug, Clone)]
pub struct Curve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub tail: Tail,
    pub interp: Interp,
}

impl Curve {
    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn t_max(&self) -> f64 {
        self.grid.last().copied().unwrap_or(0.0)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    pub fn value_at(&self, t: f64) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        if t <= self.grid[0] {
            return self.values[0];
        }
        if t > self.t_max() {
            return self.tail.value_at(t);
        }
        let k = self.grid.partition_point(|&g| g <= t);
        match self.interp {
            Interp::StepRight => self.values[k - 1],
            Interp::Linear => {
                if k >= self.len() {
                    return self.values[self.len() - 1];
                }
                let (t0, t1) = (self.grid[k - 1], self.grid[k]);
                let (v0, v1) = (self.values[k - 1], self.values[k]);
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// `∫_0^{t_j}` at every grid point, including the constant head piece.
    pub fn cumulative(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        if n == 0 {
            return out;
        }
        out[0] = self.values[0] * self.grid[0];
        for j in 1..n {
            let dt = self.grid[j] - self.grid[j - 1];
            let piece = match self.interp {
                Interp::StepRight => self.values[j - 1] * dt,
                Interp::Linear => 0.5 * (self.values[j - 1] + self.values[j]) * dt,
            };
            out[j] = out[j - 1] + piece;
        }
        out
    }

    /// `∫_0^∞`; `None` when the tail diverges.
    pub fn total_integral(&self) -> Option<f64> {
        if self.is_empty() {
            return Some(0.0);
        }
        let grid_part = *self.cumulative().last().unwrap();
        self.tail
            .integral_with_power(self.t_max(), 0.0)
            .map(|t| grid_part + t)
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64, tail: Tail) -> Curve {
        Curve {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            tail,
            interp: self.interp,
        }
    }

    pub fn scaled(&self, c: f64) -> Curve {
        self.map_values(|v| v * c, self.tail.scaled(c))
    }

    pub fn powered(&self, p: f64) -> Curve {
        let mut out = self.map_values(|v| v.powf(p), self.tail.powered(p));
        out.interp = Interp::Linear;
        out
    }

    /// Decreasing rearrangement with respect to Lebesgue measure on `(0, ∞)`.
    ///
    /// The curve is treated as piecewise constant on its grid intervals (with
    /// midpoint values in the linear case); a power tail is extended
    /// geometrically until its values drop below `1e-9` of the peak.
    pub fn rearranged(&self, grid_size: usize) -> MonotoneProfile {
        if self.is_empty() {
            return MonotoneProfile::empty();
        }
        let mut lengths: Vec<f64> = Vec::with_capacity(self.len() + 1);
        let mut vals: Vec<f64> = Vec::with_capacity(self.len() + 1);
        lengths.push(self.grid[0]);
        vals.push(self.values[0]);
        for j in 1..self.len() {
            lengths.push(self.grid[j] - self.grid[j - 1]);
            vals.push(match self.interp {
                Interp::StepRight => self.values[j - 1],
                Interp::Linear => 0.5 * (self.values[j - 1] + self.values[j]),
            });
        }
        let peak = self.max_value();
        if let Tail::Power { coef, exponent } = self.tail {
            if coef > 0.0 && peak > 0.0 {
                let ratio = if self.len() >= 2 {
                    (self.grid[1] / self.grid[0]).max(1.0 + 1e-6)
                } else {
                    1.01
                };
                let cutoff = 1e-9 * peak;
                let mut prev = self.t_max();
                let limit = self.t_max() * 1e8;
                while prev < limit {
                    let next = prev * ratio;
                    let mid = 0.5 * (prev + next);
                    let v = coef * mid.powf(exponent);
                    lengths.push(next - prev);
                    vals.push(v);
                    prev = next;
                    if v < cutoff {
                        break;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.sort_unstable_by(|&a, &b| {
            vals[b].partial_cmp(&vals[a]).unwrap().then(a.cmp(&b))
        });
        let mut cum = Vec::with_capacity(order.len());
        let mut sorted_vals = Vec::with_capacity(order.len());
        let mut acc = 0.0;
        for &k in &order {
            if vals[k] <= 0.0 {
                break;
            }
            acc += lengths[k];
            if let Some(last) = sorted_vals.last() {
                if *last == vals[k] {
                    *cum.last_mut().unwrap() = acc;
                    continue;
                }
            }
            cum.push(acc);
            sorted_vals.push(vals[k]);
        }
        if cum.is_empty() {
            return MonotoneProfile::empty();
        }
        let steps = StepFn {
            cum,
            values: sorted_vals,
        };
        MonotoneProfile::from_steps(steps, grid_size, self.tail)
    }
}

/// A nonincreasing right-continuous profile on `(0, ∞)`: the shape shared by
/// `f*_μ`, `f**_μ` and the rearranged gradient quantities.
#[derive(Debug, Clone)]
pub struct MonotoneProfile {
    curve: Curve,
    steps: Option<StepFn>,
}

impl MonotoneProfile {
    pub fn empty() -> Self {
        Self {
            curve: Curve {
                grid: Vec::new(),
                values: Vec::new(),
                tail: Tail::Zero,
                interp: Interp::StepRight,
            },
            steps: None,
        }
    }

    /// Resamples an exact step function onto the geometric grid.
    pub fn from_steps(steps: StepFn, grid_size: usize, tail: Tail) -> Self {
        let total = steps.total();
        if total <= 0.0 || steps.values.is_empty() {
            return Self::empty();
        }
        let grid = geometric_grid(total, grid_size.max(2));
        let values: Vec<f64> = grid.iter().map(|&t| steps.value_at(t)).collect();
        Self {
            curve: Curve {
                grid,
                values,
                tail,
                interp: Interp::StepRight,
            },
            steps: Some(steps),
        }
    }

    /// Builds a profile from samples, clamping to enforce monotonicity.
    pub fn from_samples(grid: Vec<f64>, values: Vec<f64>, tail: Tail, interp: Interp) -> Self {
        assert_eq!(grid.len(), values.len());
        let mut vals = values;
        let mut prev = f64::INFINITY;
        for v in vals.iter_mut() {
            if *v > prev {
                *v = prev;
            }
            if *v < 0.0 {
                *v = 0.0;
            }
            prev = *v;
        }
        Self {
            curve: Curve {
                grid,
                values: vals,
                tail,
                interp,
            },
            steps: None,
        }
    }

    /// Samples a closed form on the geometric grid over `(0, t_max]`.
    pub fn from_fn(t_max: f64, grid_size: usize, f: impl Fn(f64) -> f64) -> Self {
        let grid = geometric_grid(t_max, grid_size.max(2));
        let values = grid.iter().map(|&t| f(t).max(0.0)).collect();
        Self::from_samples(grid, values, Tail::Zero, Interp::Linear)
    }

    /// Indicator-style profile: value `c` on `[0, a)`, with exact steps.
    pub fn step(c: f64, a: f64, grid_size: usize) -> Self {
        Self::from_steps(
            StepFn {
                cum: vec![a],
                values: vec![c],
            },
            grid_size,
            Tail::Zero,
        )
    }

    pub fn is_empty(&self) -> bool {
        self.curve.is_empty()
    }

    pub fn grid(&self) -> &[f64] {
        &self.curve.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.curve.values
    }

    pub fn tail(&self) -> Tail {
        self.curve.tail
    }

    pub fn interp(&self) -> Interp {
        self.curve.interp
    }

    pub fn steps(&self) -> Option<&StepFn> {
        self.steps.as_ref()
    }

    pub fn as_curve(&self) -> &Curve {
        &self.curve
    }

    pub fn into_curve(self) -> Curve {
        self.curve
    }

    /// Mass of the support: the `T` with `f*(t) = 0` for `t >= T` (zero-tail profiles).
    pub fn support_mass(&self) -> f64 {
        self.curve.t_max()
    }

    pub fn sup(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.curve.values[0].max(self.curve.tail.value_at(self.curve.t_max()))
        }
    }

    pub fn value_at(&self, t: f64) -> f64 {
        match &self.steps {
            Some(s) if matches!(self.curve.tail, Tail::Zero) => s.value_at(t),
            _ => self.curve.value_at(t),
        }
    }

    /// `∫_0^t` using the exact steps when available.
    pub fn cumulative_at(&self, t: f64) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        if let Some(s) = &self.steps {
            if t <= s.total() {
                return s.cumulative_at(t);
            }
            let beyond = match self.curve.tail {
                Tail::Zero => 0.0,
                Tail::Power { coef, exponent } => {
                    let e1 = exponent + 1.0;
                    if e1.abs() < 1e-12 {
                        coef * (t / s.total()).ln()
                    } else {
                        coef * (t.powf(e1) - s.total().powf(e1)) / e1
                    }
                }
            };
            return s.integral() + beyond;
        }
        if t >= self.curve.t_max() {
            let grid_part = *self.curve.cumulative().last().unwrap();
            let beyond = match self.curve.tail {
                Tail::Zero => 0.0,
                Tail::Power { coef, exponent } => {
                    let e1 = exponent + 1.0;
                    if e1.abs() < 1e-12 {
                        coef * (t / self.curve.t_max()).ln()
                    } else {
                        coef * (t.powf(e1) - self.curve.t_max().powf(e1)) / e1
                    }
                }
            };
            return grid_part + beyond;
        }
        // partial trapezoid on the grid
        let cum = self.curve.cumulative();
        let k = self.curve.grid.partition_point(|&g| g <= t);
        if k == 0 {
            return self.curve.values[0] * t;
        }
        let base = cum[k - 1];
        let extra = match self.curve.interp {
            Interp::StepRight => self.curve.values[k - 1] * (t - self.curve.grid[k - 1]),
            Interp::Linear => {
                let v_t = self.curve.value_at(t);
                0.5 * (self.curve.values[k - 1] + v_t) * (t - self.curve.grid[k - 1])
            }
        };
        base + extra
    }

    /// Running average `t ↦ (1/t)∫_0^t`, with exact hyperbolic tail.
    pub fn double_star(&self) -> MonotoneProfile {
        if self.is_empty() {
            return MonotoneProfile::empty();
        }
        let grid = self.curve.grid.clone();
        let values: Vec<f64> = grid
            .iter()
            .zip(&self.curve.values)
            .map(|(&t, &v)| (self.cumulative_at(t) / t).max(v))
            .collect();
        let total = self.cumulative_at(self.curve.t_max());
        let tail = match self.curve.tail {
            Tail::Zero => Tail::Power {
                coef: total,
                exponent: -1.0,
            },
            // dominant term of (1/t)(I_T + ∫ tail): hyperbolic unless the tail
            // itself decays slower than 1/t
            Tail::Power { coef, exponent } => {
                if exponent > -1.0 {
                    Tail::Power {
                        coef: coef / (exponent + 1.0),
                        exponent,
                    }
                } else {
                    Tail::Power {
                        coef: total,
                        exponent: -1.0,
                    }
                }
            }
        };
        MonotoneProfile::from_samples(grid, values, tail, Interp::Linear)
    }

    /// Oscillation `t ↦ (1/t)∫_0^t p - p(t)`, returned as a curve on the same grid.
    pub fn oscillation(&self) -> Curve {
        if self.is_empty() {
            return self.curve.clone();
        }
        let dstar = self.double_star();
        let values: Vec<f64> = dstar
            .values()
            .iter()
            .zip(self.values())
            .map(|(&a, &b)| (a - b).max(0.0))
            .collect();
        let tail = match self.curve.tail {
            Tail::Zero => dstar.tail(),
            Tail::Power { .. } => Tail::Zero,
        };
        Curve {
            grid: self.curve.grid.clone(),
            values,
            tail,
            interp: Interp::Linear,
        }
    }

    /// Values multiplied by a constant `c >= 0`.
    pub fn scaled(&self, c: f64) -> MonotoneProfile {
        MonotoneProfile {
            curve: self.curve.scaled(c),
            steps: self.steps.as_ref().map(|s| StepFn {
                cum: s.cum.clone(),
                values: s.values.iter().map(|v| v * c).collect(),
            }),
        }
    }

    /// Pointwise `p`-th power (`p > 0` preserves monotonicity).
    pub fn powered(&self, p: f64) -> MonotoneProfile {
        MonotoneProfile {
            curve: Curve {
                grid: self.curve.grid.clone(),
                values: self.curve.values.iter().map(|v| v.powf(p)).collect(),
                tail: self.curve.tail.powered(p),
                interp: self.curve.interp,
            },
            steps: self.steps.as_ref().map(|s| StepFn {
                cum: s.cum.clone(),
                values: s.values.iter().map(|v| v.powf(p)).collect(),
            }),
        }
    }

    /// Dilation `E_s: f*(t) ↦ f*(t/s)`, exact on steps and grid.
    pub fn dilated(&self, s: f64) -> MonotoneProfile {
        assert!(s > 0.0);
        let tail = match self.curve.tail {
            Tail::Zero => Tail::Zero,
            Tail::Power { coef, exponent } => Tail::Power {
                coef: coef * s.powf(-exponent),
                exponent,
            },
        };
        MonotoneProfile {
            curve: Curve {
                grid: self.curve.grid.iter().map(|t| t * s).collect(),
                values: self.curve.values.clone(),
                tail,
                interp: self.curve.interp,
            },
            steps: self.steps.as_ref().map(|st| StepFn {
                cum: st.cum.iter().map(|c| c * s).collect(),
                values: st.values.clone(),
            }),
        }
    }
}

/// Sampled derivative `(-p)'` of a profile, clamped nonnegative.
#[derive(Debug, Clone)]
pub struct ProfileDerivative {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// False when a macroscopic single-interval jump was detected, i.e. the
    /// profile does not look locally absolutely continuous.
    pub absolutely_continuous: bool,
}

impl ProfileDerivative {
    pub fn as_curve(&self) -> Curve {
        Curve {
            grid: self.grid.clone(),
            values: self.values.clone(),
            tail: Tail::Zero,
            interp: Interp::Linear,
        }
    }
}

/// Central finite differences of `-p` on the grid, widened until the window
/// spans enough distinct steps to average out cell quantization.
pub fn profile_derivative(p: &MonotoneProfile) -> ProfileDerivative {
    let grid = p.grid();
    let vals = p.values();
    let n = grid.len();
    if n < 3 {
        return ProfileDerivative {
            grid: grid.to_vec(),
            values: vec![0.0; n],
            absolutely_continuous: true,
        };
    }
    let min_drops = match p.interp() {
        Interp::StepRight => 3,
        Interp::Linear => 2,
    };
    let max_half = 48usize;
    let mut values = Vec::with_capacity(n);
    for j in 0..n {
        let mut h = 1usize;
        let (mut lo, mut hi);
        loop {
            lo = j.saturating_sub(h);
            hi = (j + h).min(n - 1);
            let drops = (lo..hi).filter(|&k| vals[k] > vals[k + 1]).count();
            if drops >= min_drops || h >= max_half || (lo == 0 && hi == n - 1) {
                break;
            }
            h += 1;
        }
        let dt = grid[hi] - grid[lo];
        let dv = vals[lo] - vals[hi];
        values.push(if dt > 0.0 { (dv / dt).max(0.0) } else { 0.0 });
    }
    // jump detection: a macroscopic drop across one interval, far above the
    // local wide-window trend, marks a non-absolutely-continuous profile
    let sup = p.sup();
    let mut absolutely_continuous = true;
    for j in 0..n - 1 {
        let drop = vals[j] - vals[j + 1];
        if drop <= 0.05 * sup {
            continue;
        }
        let lo = j.saturating_sub(32);
        let hi = (j + 33).min(n - 1);
        let wide = (vals[lo] - vals[hi]) / (grid[hi] - grid[lo]);
        let expected = wide * (grid[j + 1] - grid[j]);
        if drop > 10.0 * expected + 1e-9 * sup {
            absolutely_continuous = false;
            break;
        }
    }
    ProfileDerivative {
        grid: grid.to_vec(),
        values,
        absolutely_continuous,
    }
}

/// `t ↦ (1/t)∫_0^t s·(-p)'(s) ds`: the oscillation reconstructed from the
/// derivative; must agree with [`MonotoneProfile::oscillation`].
pub fn oscillation_from_derivative(p: &MonotoneProfile) -> Curve {
    let deriv = profile_derivative(p);
    let n = deriv.grid.len();
    if n == 0 {
        return deriv.as_curve();
    }
    let integrand = Curve {
        grid: deriv.grid.clone(),
        values: deriv
            .grid
            .iter()
            .zip(&deriv.values)
            .map(|(&t, &d)| t * d)
            .collect(),
        tail: Tail::Zero,
        interp: Interp::Linear,
    };
    let cum = integrand.cumulative();
    // Head piece `∫_0^{t_0} s·d(s) ds` with `d` modelled as a power law fitted
    // to the first samples; the derivative of a profile may blow up near zero
    // (e.g. like t^{-2/3}) and a constant head would underestimate it.
    let t0 = integrand.grid[0];
    let d0 = deriv.values[0];
    let mut sigma = 0.0;
    let fit_end = n.min(64);
    if d0 > 0.0 && fit_end > 8 {
        let pts: Vec<(f64, f64)> = (0..fit_end)
            .filter(|&j| deriv.values[j] > 0.0)
            .map(|j| (deriv.grid[j].ln(), deriv.values[j].ln()))
            .collect();
        if pts.len() >= 4 {
            let m = pts.len() as f64;
            let sx: f64 = pts.iter().map(|p| p.0).sum();
            let sy: f64 = pts.iter().map(|p| p.1).sum();
            let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
            let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
            let denom = m * sxx - sx * sx;
            if denom.abs() > 1e-12 {
                sigma = ((m * sxy - sx * sy) / denom).clamp(-1.9, 4.0);
            }
        }
    }
    let head = d0 * t0 * t0 / (sigma + 2.0);
    let head_fix = head - integrand.values[0] * t0;
    let total = cum[n - 1] + head_fix;
    let values: Vec<f64> = (0..n)
        .map(|j| ((cum[j] + head_fix) / integrand.grid[j]).max(0.0))
        .collect();
    Curve {
        grid: deriv.grid,
        values,
        tail: Tail::Power {
            coef: total,
            exponent: -1.0,
        },
        interp: Interp::Linear,
    }
}

/// Sorted support cells: indices with `|f| > 0` ordered by value descending,
/// ties broken by cell index.
pub(crate) fn sorted_support(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).filter(|&i| values[i] > 0.0).collect();
    order.sort_unstable_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
    order
}

pub(crate) fn steps_from_sorted(
    order: &[usize],
    values: &[f64],
    masses: impl Fn(usize) -> f64,
) -> StepFn {
    let mut cum = Vec::new();
    let mut step_values = Vec::new();
    let mut acc = 0.0;
    for &i in order {
        acc += masses(i);
        match step_values.last() {
            Some(&last) if last == values[i] => {
                *cum.last_mut().unwrap() = acc;
            }
            _ => {
                cum.push(acc);
                step_values.push(values[i]);
            }
        }
    }
    StepFn {
        cum,
        values: step_values,
    }
}

/// Decreasing rearrangement of `|f|` against a precomputed decomposition.
pub fn rearrange_cells<F>(dec: &CellDecomposition, f: F, grid_size: usize) -> MonotoneProfile
where
    F: Fn(&[f64]) -> f64,
{
    let vals: Vec<f64> = dec
        .cells
        .iter()
        .map(|c| f(c.center(dec.dim())).abs())
        .collect();
    let order = sorted_support(&vals);
    if order.is_empty() {
        return MonotoneProfile::empty();
    }
    let steps = steps_from_sorted(&order, &vals, |i| dec.cells[i].weighted_mass);
    MonotoneProfile::from_steps(steps, grid_size, Tail::Zero)
}

/// Decreasing rearrangement `f*_μ` of `|f|` on `domain`.
pub fn rearrange<F>(
    weight: &MonomialWeight,
    f: F,
    domain: &BoxDomain,
    resolution: usize,
    grid_size: usize,
) -> Result<MonotoneProfile>
where
    F: Fn(&[f64]) -> f64,
{
    let dec = CellDecomposition::new(weight, domain, resolution)?;
    Ok(rearrange_cells(&dec, f, grid_size))
}

/// The distribution function `s ↦ μ{|f| > s}` sampled on `[0, sup|f|]`.
#[derive(Debug, Clone)]
pub struct DistributionFunction {
    pub s_grid: Vec<f64>,
    pub masses: Vec<f64>,
}

pub fn distribution<F>(dec: &CellDecomposition, f: F, s_points: usize) -> DistributionFunction
where
    F: Fn(&[f64]) -> f64,
{
    let vals: Vec<f64> = dec
        .cells
        .iter()
        .map(|c| f(c.center(dec.dim())).abs())
        .collect();
    let order = sorted_support(&vals);
    let steps = steps_from_sorted(&order, &vals, |i| dec.cells[i].weighted_mass);
    let sup = order.first().map(|&i| vals[i]).unwrap_or(0.0);
    let n = s_points.max(2);
    let s_grid: Vec<f64> = (0..n).map(|k| sup * k as f64 / (n - 1) as f64).collect();
    let masses = s_grid.iter().map(|&s| steps.measure_above(s)).collect();
    DistributionFunction { s_grid, masses }
}

/// Three-branch truncation between levels `t1 < t2`:
/// `t2-t1` where `|f| > t2`, `|f|-t1` where `t1 < |f| <= t2`, else 0.
pub fn truncate<F>(f: F, t1: f64, t2: f64) -> Result<impl Fn(&[f64]) -> f64>
where
    F: Fn(&[f64]) -> f64,
{
    if !(t1 >= 0.0) || !(t1 < t2) {
        return Err(Error::BadTruncationLevels { t1, t2 });
    }
    Ok(move |x: &[f64]| {
        let v = f(x).abs();
        if v > t2 {
            t2 - t1
        } else if v > t1 {
            v - t1
        } else {
            0.0
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cone_weight() -> (MonomialWeight, BoxDomain) {
        (
            MonomialWeight::new(vec![2.0]).unwrap(),
            BoxDomain::symmetric(&[1.0]).unwrap(),
        )
    }

    fn cone(x: &[f64]) -> f64 {
        (1.0 - x[0].abs()).max(0.0)
    }

    /// Closed-form rearrangement of the cone under dμ = x² dx:
    /// μ_f(s) = (2/3)(1-s)³ inverts to f*(t) = 1 - (3t/2)^{1/3}.
    fn cone_oracle(t: f64) -> f64 {
        (1.0 - (1.5 * t).powf(1.0 / 3.0)).max(0.0)
    }

    #[test]
    fn indicator_rearranges_to_step() {
        let (w, b) = cone_weight();
        let f = |x: &[f64]| if x[0].abs() < 0.5 { 0.7 } else { 0.0 };
        let p = rearrange(&w, f, &b, 10_000, 256).unwrap();
        let mass = 2.0 * 0.5_f64.powi(3) / 3.0;
        assert_relative_eq!(p.support_mass(), mass, max_relative = 1e-3);
        let s = p.steps().unwrap();
        assert_eq!(s.values.len(), 1);
        assert_relative_eq!(s.values[0], 0.7);
        assert_relative_eq!(p.value_at(0.5 * mass), 0.7);
        assert_eq!(p.value_at(1.5 * mass), 0.0);
    }

    #[test]
    fn cone_rearrangement_matches_closed_form() {
        let (w, b) = cone_weight();
        let p = rearrange(&w, cone, &b, 10_000, 4096).unwrap();
        assert_relative_eq!(p.support_mass(), 2.0 / 3.0, max_relative = 1e-4);
        let sup = 1.0;
        let mut worst = 0.0_f64;
        for (&t, &v) in p.grid().iter().zip(p.values()) {
            worst = worst.max((v - cone_oracle(t)).abs() / sup);
        }
        assert!(worst < 1e-3, "max normalized error {worst}");
    }

    #[test]
    fn reflection_leaves_profile_unchanged() {
        let (w, b) = cone_weight();
        let f = |x: &[f64]| (1.0 - (x[0] - 0.2).abs() / 0.8).max(0.0);
        let g = |x: &[f64]| f(&[-x[0]]);
        let pf = rearrange(&w, f, &b, 2000, 512).unwrap();
        let pg = rearrange(&w, g, &b, 2000, 512).unwrap();
        for (a, c) in pf.values().iter().zip(pg.values()) {
            assert_relative_eq!(a, c, epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_function_gives_empty_profile() {
        let (w, b) = cone_weight();
        let p = rearrange(&w, |_| 0.0, &b, 100, 64).unwrap();
        assert!(p.is_empty());
        assert_eq!(p.sup(), 0.0);
        assert_eq!(p.support_mass(), 0.0);
    }

    #[test]
    fn double_star_of_step_has_hyperbolic_tail() {
        let p = MonotoneProfile::step(2.0, 0.5, 1024);
        let d = p.double_star();
        assert_relative_eq!(d.value_at(0.25), 2.0, max_relative = 1e-9);
        assert_relative_eq!(d.value_at(0.5), 2.0, max_relative = 1e-9);
        // beyond the support: c·a/t with c=2, a=1/2
        assert_relative_eq!(d.as_curve().value_at(2.0), 0.5, max_relative = 1e-9);
        match d.tail() {
            Tail::Power { coef, exponent } => {
                assert_relative_eq!(coef, 1.0, max_relative = 1e-9);
                assert_eq!(exponent, -1.0);
            }
            Tail::Zero => panic!("expected hyperbolic tail"),
        }
    }

    #[test]
    fn double_star_of_constant_profile_is_identity_on_grid() {
        let p = MonotoneProfile::step(3.0, 1.0, 512);
        let d = p.double_star();
        for (&t, &v) in d.grid().iter().zip(d.values()) {
            assert!(t <= 1.0);
            assert_relative_eq!(v, 3.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn cone_double_star_matches_closed_form() {
        // (1/t)∫_0^t (1-(3s/2)^{1/3}) ds = 1 - (3/4)(3t/2)^{1/3}
        let (w, b) = cone_weight();
        let p = rearrange(&w, cone, &b, 10_000, 4096).unwrap();
        let d = p.double_star();
        for (&t, &v) in d.grid().iter().zip(d.values()).step_by(199) {
            let oracle = 1.0 - 0.75 * (1.5 * t).powf(1.0 / 3.0);
            assert!((v - oracle).abs() < 2e-3, "t={t}: {v} vs {oracle}");
        }
        assert_relative_eq!(
            d.value_at(2.0 / 3.0),
            0.25,
            max_relative = 5e-3
        );
    }

    #[test]
    fn oscillation_of_step_vanishes_then_decays() {
        let p = MonotoneProfile::step(2.0, 0.5, 1024);
        let o = p.oscillation();
        assert!(o.value_at(0.3) < 1e-12);
        assert_relative_eq!(o.value_at(4.0), 0.25, max_relative = 1e-9);
    }

    #[test]
    fn oscillation_of_cone_at_support_mass() {
        let (w, b) = cone_weight();
        let p = rearrange(&w, cone, &b, 10_000, 4096).unwrap();
        let o = p.oscillation();
        // f**(2/3) - f*(2/3) = 1/4 - 0
        assert_relative_eq!(o.value_at(2.0 / 3.0), 0.25, max_relative = 5e-3);
    }

    #[test]
    fn scaled_oscillation_is_increasing_after_t_multiplication() {
        let (w, b) = cone_weight();
        let p = rearrange(&w, cone, &b, 4000, 2048).unwrap();
        let o = p.oscillation();
        let mut prev = 0.0_f64;
        for (&t, &v) in o.grid.iter().zip(&o.values) {
            let tv = t * v;
            assert!(tv >= prev - 1e-9 * (1.0 + prev.abs()), "t·O must not decrease");
            prev = tv;
        }
    }

    #[test]
    fn derivative_of_cone_profile() {
        let (w, b) = cone_weight();
        let p = rearrange(&w, cone, &b, 20_000, 4096).unwrap();
        let der = profile_derivative(&p);
        assert!(der.absolutely_continuous);
        // (-f*)'(t) = (1/2)(3t/2)^{-2/3}
        for (&t, &v) in der.grid.iter().zip(&der.values).step_by(307) {
            if t < 1e-4 || t > 0.6 {
                continue;
            }
            let oracle = 0.5 * (1.5 * t).powf(-2.0 / 3.0);
            assert!(
                (v - oracle).abs() / oracle < 0.08,
                "t={t}: {v} vs {oracle}"
            );
        }
    }

    #[test]
    fn derivative_of_constant_profile_is_zero() {
        let p = MonotoneProfile::step(1.0, 1.0, 256);
        let der = profile_derivative(&p);
        let interior_max = der.values[..der.values.len() - 64]
            .iter()
            .cloned()
            .fold(0.0, f64::max);
        assert_eq!(interior_max, 0.0);
    }

    #[test]
    fn derivative_integrates_back_to_profile_differences() {
        let p = MonotoneProfile::from_fn(1.0, 2048, |t| (1.0 - t).max(0.0).powi(2));
        let der = profile_derivative(&p);
        let curve = der.as_curve();
        let cum = curve.cumulative();
        let (j1, j2) = (400, 1800);
        let integral = cum[j2] - cum[j1];
        let diff = p.values()[j1] - p.values()[j2];
        assert_relative_eq!(integral, diff, max_relative = 2e-2);
    }

    #[test]
    fn jump_profile_is_flagged() {
        let grid = geometric_grid(1.0, 512);
        let values: Vec<f64> = grid
            .iter()
            .map(|&t| if t < 0.3 { 1.0 } else { 0.2 * (1.0 - t) })
            .collect();
        let p = MonotoneProfile::from_samples(grid, values, Tail::Zero, Interp::StepRight);
        let der = profile_derivative(&p);
        assert!(!der.absolutely_continuous);
    }

    #[test]
    fn oscillation_from_derivative_matches_direct_path() {
        let (w, b) = cone_weight();
        let p = rearrange(&w, cone, &b, 10_000, 4096).unwrap();
        let direct = p.oscillation();
        let via_derivative = oscillation_from_derivative(&p);
        let mut worst = 0.0_f64;
        for j in 0..direct.len() {
            let a = direct.values[j];
            let c = via_derivative.values[j];
            if a > 1e-3 * direct.max_value() {
                worst = worst.max((a - c).abs() / a);
            }
        }
        assert!(worst < 1e-2, "max relative mismatch {worst}");
    }

    #[test]
    fn oscillation_from_derivative_of_constant_is_zero() {
        let p = MonotoneProfile::step(1.0, 1.0, 512);
        let o = oscillation_from_derivative(&p);
        assert!(o.max_value() < 1e-12);
    }

    #[test]
    fn equimeasurability_is_exact_on_steps() {
        let (w, b) = cone_weight();
        let dec = CellDecomposition::new(&w, &b, 5000).unwrap();
        let p = rearrange_cells(&dec, cone, 1024);
        let steps = p.steps().unwrap();
        for s in [0.0, 0.1, 0.35, 0.7, 0.95] {
            let lhs = steps.measure_above(s);
            let rhs = dec.measure_superlevel(cone, s);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12, epsilon = 1e-15);
        }
    }

    #[test]
    fn hardy_littlewood_inequality_on_random_pairs() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let (w, b) = cone_weight();
        let dec = CellDecomposition::new(&w, &b, 2000).unwrap();
        for _ in 0..25 {
            let (a1, a2) = (rng.gen_range(0.2..1.0), rng.gen_range(0.2..1.0));
            let (k1, k2) = (rng.gen_range(1..4), rng.gen_range(1..4));
            let u = move |x: &[f64]| (1.0 - (x[0] / a1).powi(2)).max(0.0).powi(k1);
            let v = move |x: &[f64]| (1.0 - (x[0] / a2).abs()).max(0.0).powi(k2);
            let joint = dec.integrate(|x| u(x) * v(x)).unwrap();
            let pu = rearrange_cells(&dec, u, 64);
            let pv = rearrange_cells(&dec, v, 64);
            let hl = pu.steps().unwrap().inner_product(pv.steps().unwrap());
            assert!(joint <= hl * (1.0 + 1e-12) + 1e-15, "{joint} > {hl}");
        }
    }

    #[test]
    fn double_star_subadditive_on_sums() {
        let (w, b) = cone_weight();
        let dec = CellDecomposition::new(&w, &b, 3000).unwrap();
        let u = |x: &[f64]| (1.0 - x[0].abs()).max(0.0);
        let v = |x: &[f64]| (1.0 - (x[0] + 0.3).powi(2) / 0.25).max(0.0).powi(2);
        let pu = rearrange_cells(&dec, u, 1024);
        let pv = rearrange_cells(&dec, v, 1024);
        let ps = rearrange_cells(&dec, |x| u(x) + v(x), 1024);
        // (u+v)**(t) <= u**(t) + v**(t) is exact on the cumulative integrals
        for t in [1e-5, 1e-3, 0.05, 0.3, 0.66, 1.5] {
            let lhs = ps.cumulative_at(t);
            let rhs = pu.cumulative_at(t) + pv.cumulative_at(t);
            assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-15, "t={t}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn truncation_branches_and_bounds() {
        let f = |x: &[f64]| cone(x);
        let g = truncate(f, 0.25, 0.75).unwrap();
        assert_relative_eq!(g(&[0.0]), 0.5); // |f| = 1 > 0.75 → plateau t2-t1
        assert_relative_eq!(g(&[0.5]), 0.25); // |f| = 0.5 → 0.5 - 0.25
        assert_eq!(g(&[0.9]), 0.0); // |f| = 0.1 <= t1
        let sup = (0..100)
            .map(|k| g(&[k as f64 / 100.0 * 2.0 - 1.0]))
            .fold(0.0, f64::max);
        assert!(sup <= 0.5 + 1e-12);
        assert!(truncate(f, 0.75, 0.25).is_err());
        assert!(truncate(f, -0.1, 0.25).is_err());

        // t1 → 0, t2 >= sup recovers |f|
        let h = truncate(f, 1e-12, 2.0).unwrap();
        assert_relative_eq!(h(&[0.25]), 0.75, max_relative = 1e-9);
    }

    #[test]
    fn distribution_function_is_nonincreasing() {
        let (w, b) = cone_weight();
        let dec = CellDecomposition::new(&w, &b, 2000).unwrap();
        let d = distribution(&dec, cone, 200);
        assert_relative_eq!(d.masses[0], 2.0 / 3.0, max_relative = 1e-3);
        for k in 1..d.masses.len() {
            assert!(d.masses[k] <= d.masses[k - 1]);
        }
    }

    #[test]
    fn curve_rearranged_recovers_monotone_input() {
        let p = MonotoneProfile::from_fn(1.0, 512, |t| (1.0 - t).max(0.0));
        let r = p.as_curve().rearranged(512);
        for t in [0.01, 0.1, 0.4, 0.9] {
            assert_relative_eq!(
                r.value_at(t),
                p.value_at(t),
                max_relative = 0.02,
                epsilon = 1e-4
            );
        }
    }

    #[test]
    fn curve_rearrangement_preserves_integral() {
        // a hump: t(1-t) on (0,1], not monotone
        let grid = geometric_grid(1.0, 2048);
        let values: Vec<f64> = grid.iter().map(|&t| t * (1.0 - t)).collect();
        let c = Curve {
            grid,
            values,
            tail: Tail::Zero,
            interp: Interp::Linear,
        };
        let direct = c.total_integral().unwrap();
        let rearranged = c.rearranged(2048);
        let after = rearranged.cumulative_at(rearranged.support_mass());
        assert_relative_eq!(direct, after, max_relative = 1e-3);
        assert_relative_eq!(direct, 1.0 / 6.0, max_relative = 1e-3);
    }
}
