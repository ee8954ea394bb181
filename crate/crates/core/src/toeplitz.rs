//! Finite sections of Toeplitz operators in the basis `e_n = √(n+1) zⁿ`, singular-value
//! extremes and Neumann-series invertibility certificates.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::berezin::{QuadratureSpec, RadialMoments, RadialVariable};
use crate::error::{Error, Result};
use crate::exact::{rational, to_f64};
use crate::geometry::{par_argmin, scaling_constant, DiskGrid, GridDescriptor};
use crate::quadrature::gauss_legendre;
use crate::symbols::{sup_norm, Complex, HarmonicPolynomial, RadialSymbol, Symbol};

/// Largest dimension accepted by the dense singular-value routine.
pub const MAX_DENSE_DIM: usize = 2048;
const NORM_RESOLUTION: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Quadrature {
        radial_variable: RadialVariable,
        radial_order: usize,
        angular_count: usize,
    },
    Supplied,
}

/// `N × N` matrix of `⟨T_φ e_j, e_i⟩`.
#[derive(Clone, Debug)]
pub struct ToeplitzTruncation {
    entries: DMatrix<Complex>,
    provenance: Provenance,
    label: String,
    norm_bound: Option<f64>,
    extremes: OnceLock<(f64, f64)>,
}

impl ToeplitzTruncation {
    /// Wraps an arbitrary square matrix.
    pub fn from_matrix(entries: DMatrix<Complex>, label: impl Into<String>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::Argument("truncation must be a nonempty square matrix".into()));
        }
        Ok(Self::build(entries, Provenance::Supplied, label.into(), None))
    }

    fn build(entries: DMatrix<Complex>, provenance: Provenance, label: String, norm_bound: Option<f64>) -> Self {
        Self { entries, provenance, label, norm_bound, extremes: OnceLock::new() }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex> {
        &self.entries
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Upper bound for the norm of the full operator (`‖T_φ‖ ≤ ‖φ‖∞`), when known.
    pub fn operator_norm_bound(&self) -> Option<f64> {
        self.norm_bound
    }

    pub fn with_operator_norm_bound(mut self, bound: f64) -> Self {
        self.norm_bound = Some(bound);
        self
    }

    /// `(σ_min, σ_max)`, computed once and cached.
    pub fn singular_extremes(&self) -> Result<(f64, f64)> {
        if let Some(&e) = self.extremes.get() {
            return Ok(e);
        }
        let e = singular_extremes(&self.entries)?;
        Ok(*self.extremes.get_or_init(|| e))
    }

    /// Largest entrywise deviation from the conjugate transpose.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Argument("truncation size must be at least 1".into()));
    }
    Ok(())
}

/// Closed-form truncation: `p0` on the diagonal, `p_m √((j+1)/(j+m+1))` at `(j+m, j)` and
/// `q_n √((j−n+1)/(j+1))` at `(j−n, j)`.
pub fn matrix_harmonic(p: &HarmonicPolynomial, n: usize) -> Result<ToeplitzTruncation> {
    check_dim(n)?;
    let mut m = DMatrix::from_element(n, n, Complex::new(0.0, 0.0));
    for j in 0..n {
        m[(j, j)] = p.p0().value();
    }
    for t in p.analytic() {
        let k = t.power as usize;
        for j in 0..n.saturating_sub(k) {
            m[(j + k, j)] = t.coef.value() * ((j + 1) as f64 / (j + k + 1) as f64).sqrt();
        }
    }
    for t in p.coanalytic() {
        let k = t.power as usize;
        for j in k..n {
            m[(j - k, j)] = t.coef.value() * ((j - k + 1) as f64 / (j + 1) as f64).sqrt();
        }
    }
    let bound = sup_norm(&Symbol::Harmonic(p.clone()), NORM_RESOLUTION)?.upper;
    Ok(ToeplitzTruncation::build(m, Provenance::ClosedForm, "harmonic".into(), Some(bound)))
}

/// Eigenvalues `λ_j = (j+1)·2∫ g r^{2j+1} dr` of a radial Toeplitz operator.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialEigenvalues {
    pub values: Vec<f64>,
    /// Present for polynomial profiles with rational coefficients.
    pub exact: Option<Vec<BigRational>>,
}

pub fn radial_eigenvalues(g: &RadialSymbol, n: usize) -> RadialEigenvalues {
    let moments = RadialMoments::from_symbol(g, n);
    let values = moments.values().iter().enumerate().map(|(j, mu)| (j + 1) as f64 * mu).collect();
    let exact = g.exact_coefficients().map(|_| {
        (0..n)
            .map(|j| moments.exact(j).unwrap_or_else(BigRational::zero) * rational(j as i64 + 1, 1))
            .collect::<Vec<_>>()
    });
    let values = match &exact {
        // Round from the exact value so that exact zeros stay zero.
        Some(e) => e.iter().map(to_f64).collect(),
        None => values,
    };
    RadialEigenvalues { values, exact }
}

/// Diagonal truncation of a radial symbol.
pub fn matrix_radial(g: &RadialSymbol, n: usize) -> Result<ToeplitzTruncation> {
    check_dim(n)?;
    let ev = radial_eigenvalues(g, n);
    let m = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, ev.values.iter().map(|&v| Complex::new(v, 0.0))));
    Ok(ToeplitzTruncation::build(m, Provenance::ClosedForm, "radial".into(), Some(g.sup_bound())))
}

/// Closed-form truncation for harmonic and radial symbols.
pub fn matrix_closed(symbol: &Symbol, n: usize) -> Result<ToeplitzTruncation> {
    match symbol {
        Symbol::Harmonic(p) => matrix_harmonic(p, n),
        Symbol::Radial(g) => matrix_radial(g, n),
        Symbol::Sampled(_) => Err(Error::Argument("sampled symbols have no closed-form matrix; use the quadrature route".into())),
    }
}

/// Truncation by tensor quadrature: `√((i+1)(j+1)) Σ_rings w r^{i+j} F_r(i−j)` with
/// `F_r(ℓ)` the discrete Fourier coefficients of `φ` on each ring.
///
/// Default orders make the rule exact for harmonic and even radial polynomials:
/// `2N + d + 1` angles and `N + d` radial nodes. Radial profiles with odd powers use the
/// `r` variable.
pub fn matrix_quadrature(symbol: &Symbol, n: usize, spec: &QuadratureSpec) -> Result<ToeplitzTruncation> {
    check_dim(n)?;
    let d = symbol.angular_degree();
    let (variable, radial_degree) = match symbol {
        Symbol::Radial(g) if spec.radial_order.is_none() && g.has_odd_powers() => (RadialVariable::R, g.degree().unwrap_or(64)),
        Symbol::Radial(g) => (spec.radial_variable, g.degree().unwrap_or(64)),
        Symbol::Sampled(_) => (spec.radial_variable, 2 * n),
        Symbol::Harmonic(_) => (spec.radial_variable, 0),
    };
    let angles = spec.angular_count.unwrap_or(2 * n + d + 1);
    let order = spec.radial_order.unwrap_or(n + d + radial_degree / 2 + 2);
    if order == 0 || angles == 0 {
        return Err(Error::Argument("quadrature orders must be positive".into()));
    }
    let rule = gauss_legendre(order);
    let max_shift = (n - 1) as i64;
    // rings[j] = (radius, weight, F(ℓ) for ℓ = −(N−1)..=N−1)
    let rings: Vec<(f64, f64, Vec<Complex>)> = (0..order)
        .into_par_iter()
        .map(|j| {
            let (r, w) = match variable {
                RadialVariable::T => (rule.nodes[j].sqrt(), rule.weights[j]),
                RadialVariable::R => (rule.nodes[j], 2.0 * rule.nodes[j] * rule.weights[j]),
            };
            let values: Vec<Complex> = (0..angles)
                .map(|k| symbol.eval_unchecked(Complex::from_polar(r, 2.0 * PI * k as f64 / angles as f64)))
                .collect();
            let coeffs = (-max_shift..=max_shift)
                .map(|l| {
                    let s: Complex = values
                        .iter()
                        .enumerate()
                        .map(|(k, &v)| v * Complex::from_polar(1.0, -2.0 * PI * ((l * k as i64) as f64) / angles as f64))
                        .sum();
                    s / angles as f64
                })
                .collect();
            (r, w, coeffs)
        })
        .collect();
    let columns: Vec<Vec<Complex>> = (0..n)
        .into_par_iter()
        .map(|j| {
            (0..n)
                .map(|i| {
                    let shift = (i as i64 - j as i64 + max_shift) as usize;
                    let s: Complex = rings
                        .iter()
                        .map(|(r, w, f)| f[shift] * (w * r.powi((i + j) as i32)))
                        .sum();
                    s * (((i + 1) * (j + 1)) as f64).sqrt()
                })
                .collect()
        })
        .collect();
    let m = DMatrix::from_fn(n, n, |i, j| columns[j][i]);
    let bound = sup_norm(symbol, NORM_RESOLUTION)?.upper;
    Ok(ToeplitzTruncation::build(
        m,
        Provenance::Quadrature { radial_variable: variable, radial_order: order, angular_count: angles },
        symbol.kind().into(),
        Some(bound),
    ))
}

/// `(σ_min, σ_max)` of a dense matrix.
pub fn singular_extremes(m: &DMatrix<Complex>) -> Result<(f64, f64)> {
    if m.nrows() > MAX_DENSE_DIM || m.ncols() > MAX_DENSE_DIM {
        return Err(Error::Argument(format!("dimension exceeds {MAX_DENSE_DIM}")));
    }
    if m.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Argument("matrix has non-finite entries".into()));
    }
    if m.is_empty() {
        return Err(Error::Argument("empty matrix".into()));
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((min, max))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeumannCertificate {
    /// The scaling `R` applied to the symbol.
    pub scale: f64,
    /// Certified bound for `sup |1 − Rφ|`, hence for `‖I − T_{Rφ}‖`.
    pub q: f64,
    /// `‖T_φ⁻¹‖ ≤ R/(1 − q)`.
    pub inverse_norm_bound: f64,
    pub grid_max: f64,
    pub slack: f64,
    pub grid: Option<GridDescriptor>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum NeumannOutcome {
    Certified(NeumannCertificate),
    /// No certificate; this is not a proof of non-invertibility.
    Refused { scale: f64, q: f64, reason: String },
}

impl NeumannOutcome {
    pub fn certificate(&self) -> Option<&NeumannCertificate> {
        match self {
            NeumannOutcome::Certified(c) => Some(c),
            NeumannOutcome::Refused { .. } => None,
        }
    }
}

/// Neumann-series certificate with `R` from the certified sup-norm bracket.
pub fn neumann_certificate(symbol: &Symbol, grid: &DiskGrid) -> Result<NeumannOutcome> {
    neumann_certificate_at(symbol, scaling_constant(symbol)?, grid)
}

/// Neumann-series certificate for a given scaling `R > 0`.
///
/// Harmonic and radial polynomials: grid maximum of `|1 − Rφ|` plus `R·L·h`.
/// Sampled symbols: the maximum over their own samples, which is the exact supremum of
/// the interpolant.
pub fn neumann_certificate_at(symbol: &Symbol, scale: f64, grid: &DiskGrid) -> Result<NeumannOutcome> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Argument(format!("scale must be positive, got {scale}")));
    }
    let one = Complex::new(1.0, 0.0);
    let (grid_max, slack, descriptor) = match symbol {
        Symbol::Sampled(s) => {
            let max = s.values().iter().map(|&v| (one - v * scale).norm()).fold(0.0, f64::max);
            (max, 0.0, Some(s.grid().descriptor()))
        }
        Symbol::Radial(RadialSymbol::Sampled { values, .. }) => {
            let max = values.iter().map(|&v| (1.0 - scale * v).abs()).fold(0.0, f64::max);
            (max, 0.0, None)
        }
        _ => {
            let lipschitz = symbol
                .lipschitz()
                .ok_or_else(|| Error::Argument("symbol has no Lipschitz bound".into()))?;
            let (_, neg) = par_argmin(grid.len(), |i| -(one - symbol.eval_unchecked(grid.node(i)) * scale).norm())?;
            (-neg, scale * lipschitz * grid.covering_radius(), Some(grid.descriptor()))
        }
    };
    let q = grid_max + slack;
    if q < 1.0 {
        Ok(NeumannOutcome::Certified(NeumannCertificate {
            scale,
            q,
            inverse_norm_bound: scale / (1.0 - q),
            grid_max,
            slack,
            grid: descriptor,
        }))
    } else {
        Ok(NeumannOutcome::Refused { scale, q, reason: format!("certified bound q = {q} is not below 1") })
    }
}

/// `M/S²`.
pub fn luecking_bound(m: f64, s: f64) -> Result<f64> {
    if !(m >= 1.0 && m.is_finite()) {
        return Err(Error::Domain(format!("M = {m} must be at least 1")));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("S = {s} must be positive")));
    }
    Ok(m / (s * s))
}
