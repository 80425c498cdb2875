//! Monomial weights, box domains and weighted quadrature.
//!
//! The measure is `dμ = |x_1|^{A_1} ··· |x_n|^{A_n} dx` with all `A_i >= 0`.
//! Its homogeneous dimension `D = n + ΣA_i` plays the role of the space
//! dimension in every exponent downstream. Quadrature is tensor-midpoint over
//! uniform cells: the weight is continuous and bounded on compacts, so no
//! singularity handling is needed, and cell sums are exactly reproducible.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Highest supported dimension. Cost grows as `resolutionⁿ`.
pub const MAX_DIM: usize = 3;

/// The exponent vector of a monomial weight together with its derived data.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialWeight {
    exponents: Vec<f64>,
}

impl MonomialWeight {
    pub fn new(exponents: Vec<f64>) -> Result<Self> {
        if exponents.is_empty() || exponents.len() > MAX_DIM {
            return Err(Error::UnsupportedDimension(exponents.len()));
        }
        for (index, &value) in exponents.iter().enumerate() {
            if !(value >= 0.0) {
                return Err(Error::NegativeExponent { index, value });
            }
        }
        Ok(Self { exponents })
    }

    /// The unweighted measure in `n` dimensions (`A = 0`).
    pub fn lebesgue(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    /// Homogeneous dimension `D = n + A_1 + ... + A_n`.
    pub fn homogeneous_dimension(&self) -> f64 {
        self.exponents.len() as f64 + self.exponents.iter().sum::<f64>()
    }

    /// Weight density `Π |x_i|^{A_i}`. Zero exponents contribute factor 1,
    /// so the unweighted case returns exactly 1 for every point.
    pub fn weight_at(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        let mut w = 1.0;
        for (xi, &a) in x.iter().zip(&self.exponents) {
            if a != 0.0 {
                w *= xi.abs().powf(a);
            }
        }
        w
    }
}

/// Free-function form of the homogeneous dimension, validating the exponents.
pub fn homogeneous_dimension(exponents: &[f64]) -> Result<f64> {
    Ok(MonomialWeight::new(exponents.to_vec())?.homogeneous_dimension())
}

/// An axis-aligned box that must bound the support of any function used with it.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() || lower.len() > MAX_DIM {
            return Err(Error::UnsupportedDimension(lower.len().max(upper.len())));
        }
        for i in 0..lower.len() {
            if !(lower[i] < upper[i]) {
                return Err(Error::InvalidBox {
                    index: i,
                    lower: lower[i],
                    upper: upper[i],
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// Symmetric box `[-r_1, r_1] × ... × [-r_n, r_n]`.
    pub fn symmetric(radii: &[f64]) -> Result<Self> {
        Self::new(radii.iter().map(|r| -r).collect(), radii.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| b - a)
            .product()
    }

    /// Box scaled so that `x` is inside iff `scale .* x` was inside the original.
    pub fn scaled(&self, scale: &[f64]) -> BoxDomain {
        BoxDomain {
            lower: self
                .lower
                .iter()
                .zip(scale)
                .map(|(a, s)| a / s)
                .collect(),
            upper: self
                .upper
                .iter()
                .zip(scale)
                .map(|(b, s)| b / s)
                .collect(),
        }
    }
}

/// One quadrature cell: midpoint, Lebesgue volume and μ-mass `weight(center)·volume`.
#[derive(Debug, Clone, Copy)]
pub struct Cell {
    center: [f64; MAX_DIM],
    pub volume: f64,
    pub weighted_mass: f64,
}

impl Cell {
    pub fn center(&self, dim: usize) -> &[f64] {
        &self.center[..dim]
    }
}

/// A box partitioned into `resolutionⁿ` uniform cells, in lexicographic order.
#[derive(Debug, Clone)]
pub struct CellDecomposition {
    pub cells: Vec<Cell>,
    pub resolution: usize,
    dim: usize,
}

impl CellDecomposition {
    pub fn new(weight: &MonomialWeight, domain: &BoxDomain, resolution: usize) -> Result<Self> {
        let dim = domain.dim();
        if dim != weight.dim() {
            return Err(Error::ExponentLength {
                got: weight.dim(),
                expected: dim,
            });
        }
        let res = resolution.max(1);
        let steps: Vec<f64> = (0..dim)
            .map(|i| (domain.upper[i] - domain.lower[i]) / res as f64)
            .collect();
        let cell_volume: f64 = steps.iter().product();
        let total = res.pow(dim as u32);
        let mut cells = Vec::with_capacity(total);
        let mut center = [0.0_f64; MAX_DIM];
        for flat in 0..total {
            let mut rem = flat;
            for axis in (0..dim).rev() {
                let idx = rem % res;
                rem /= res;
                center[axis] = domain.lower[axis] + (idx as f64 + 0.5) * steps[axis];
            }
            let point = &center[..dim];
            cells.push(Cell {
                center,
                volume: cell_volume,
                weighted_mass: weight.weight_at(point) * cell_volume,
            });
        }
        Ok(Self {
            cells,
            resolution: res,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total μ-mass of the box.
    pub fn total_mass(&self) -> f64 {
        self.cells.iter().map(|c| c.weighted_mass).sum()
    }

    /// `∫ f dμ` by the midpoint rule, summed in cell order.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64,
    {
        let mut acc = 0.0;
        for cell in &self.cells {
            let v = f(cell.center(self.dim));
            if !v.is_finite() {
                return Err(Error::NonFiniteSample {
                    value: v,
                    center: cell.center(self.dim).to_vec(),
                });
            }
            acc += v * cell.weighted_mass;
        }
        Ok(acc)
    }

    /// μ-mass of the superlevel set `{ |f| > s }`.
    pub fn measure_superlevel<F>(&self, f: F, s: f64) -> f64
    where
        F: Fn(&[f64]) -> f64,
    {
        let mut acc = 0.0;
        for cell in &self.cells {
            if f(cell.center(self.dim)).abs() > s {
                acc += cell.weighted_mass;
            }
        }
        acc
    }
}

/// `∫ f dμ` over `domain` at the given per-axis resolution.
pub fn integrate<F>(
    weight: &MonomialWeight,
    f: F,
    domain: &BoxDomain,
    resolution: usize,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    CellDecomposition::new(weight, domain, resolution)?.integrate(f)
}

/// μ-mass of `{ |f| > s }` over `domain`.
pub fn measure_superlevel<F>(
    weight: &MonomialWeight,
    f: F,
    s: f64,
    domain: &BoxDomain,
    resolution: usize,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    Ok(CellDecomposition::new(weight, domain, resolution)?.measure_superlevel(f, s))
}

/// Seeded Monte Carlo cross-check for [`integrate`]. Never the default path;
/// used by tests to validate the midpoint quadrature independently.
pub fn integrate_monte_carlo<F>(
    weight: &MonomialWeight,
    f: F,
    domain: &BoxDomain,
    samples: usize,
    seed: u64,
) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = domain.dim();
    let volume = domain.volume();
    let mut acc = 0.0;
    let mut x = [0.0_f64; MAX_DIM];
    for _ in 0..samples {
        for i in 0..dim {
            x[i] = rng.gen_range(domain.lower[i]..domain.upper[i]);
        }
        let point = &x[..dim];
        acc += f(point) * weight.weight_at(point);
    }
    acc / samples as f64 * volume
}
