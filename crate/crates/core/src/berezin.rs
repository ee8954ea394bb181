//! Berezin transforms of functions and of matrix truncations: tensor quadrature,
//! series forms, iteration on grid fields and the Poisson extension.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::DiskGrid;
use crate::quadrature::{gauss_legendre, Rule};
use crate::symbols::{Complex, HarmonicPolynomial, Interpolation, RadialSymbol, SampledSymbol, Symbol, TrigPolynomial};
use crate::toeplitz::ToeplitzTruncation;

pub const DEFAULT_TOL: f64 = 1e-10;
/// Environment variable overriding [`DEFAULT_TOL`].
pub const TOL_ENV: &str = "BERGTOL_DEFAULT_TOL";
/// Above this modulus the automatic route prefers the series forms.
pub const SERIES_THRESHOLD: f64 = 0.95;
/// The quadrature route refuses points beyond this modulus.
pub const QUADRATURE_LIMIT: f64 = 0.999;
/// Cap on radial × angular nodes for one adaptive quadrature evaluation.
pub const MAX_QUADRATURE_POINTS: usize = 1 << 22;

const ZERO: Complex = Complex::new(0.0, 0.0);

/// Default absolute tolerance, honouring `BERGTOL_DEFAULT_TOL` when it holds a positive number.
pub fn default_tol() -> f64 {
    std::env::var(TOL_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|t| t.is_finite() && *t > 0.0)
        .unwrap_or(DEFAULT_TOL)
}

/// Variable of the radial Gauss–Legendre rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RadialVariable {
    /// `t = r²`: monomials `|w|^{2n}` become polynomials.
    #[default]
    T,
    /// `r` itself, for integrands with odd powers of `|w|`.
    R,
}

/// Tensor rule for disc integrals. Unset orders are chosen from the integrand and the
/// point; with `adaptive` both orders double until successive results agree to `tol/2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub radial_variable: RadialVariable,
    pub radial_order: Option<usize>,
    pub angular_count: Option<usize>,
    pub tol: f64,
    pub adaptive: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            radial_variable: RadialVariable::T,
            radial_order: None,
            angular_count: None,
            tol: default_tol(),
            adaptive: true,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    /// A single evaluation with the given orders, no refinement.
    pub fn fixed(radial_order: usize, angular_count: usize) -> Self {
        Self {
            radial_order: Some(radial_order),
            angular_count: Some(angular_count),
            adaptive: false,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Argument(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.radial_order == Some(0) || self.angular_count == Some(0) {
            return Err(Error::Argument("quadrature orders must be positive".into()));
        }
        Ok(())
    }
}

/// `∫_D f dA` by the tensor rule with `order` radial nodes and `angles` angles.
pub fn disc_integral(f: &(impl Fn(Complex) -> Complex + Sync), variable: RadialVariable, order: usize, angles: usize) -> Complex {
    let rule = gauss_legendre(order);
    let rotations: Vec<Complex> = (0..angles)
        .map(|k| Complex::from_polar(1.0, 2.0 * PI * k as f64 / angles as f64))
        .collect();
    let rings: Vec<Complex> = (0..order)
        .into_par_iter()
        .map(|j| {
            let (r, w) = match variable {
                RadialVariable::T => (rule.nodes[j].sqrt(), rule.weights[j]),
                RadialVariable::R => (rule.nodes[j], 2.0 * rule.nodes[j] * rule.weights[j]),
            };
            let s: Complex = rotations.iter().map(|&u| f(u * r)).sum();
            s * (w / angles as f64)
        })
        .collect();
    rings.iter().sum()
}

/// Normalized reproducing kernel `k_z(w) = (1 − |z|²)/(1 − w z̄)²`.
pub fn kernel(z: Complex, w: Complex) -> Result<Complex> {
    if !(z.norm() < 1.0) {
        return Err(Error::Domain(format!("|z| = {} is not below 1", z.norm())));
    }
    crate::symbols::check_on_closed_disc(w)?;
    let d = Complex::new(1.0, 0.0) - w * z.conj();
    if d == ZERO {
        return Err(Error::Domain("kernel pole".into()));
    }
    Ok((1.0 - z.norm_sqr()) / (d * d))
}

/// `|k_z(w)|²`.
pub(crate) fn kernel_sq(z: Complex, w: Complex) -> f64 {
    let d = (Complex::new(1.0, 0.0) - w * z.conj()).norm_sqr();
    let a = 1.0 - z.norm_sqr();
    a * a / (d * d)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureValue {
    pub value: Complex,
    /// Difference between the last two refinement levels; `None` without refinement.
    pub est_error: Option<f64>,
    pub radial_order: usize,
    pub angular_count: usize,
    pub converged: bool,
}

fn check_quadrature_point(z: Complex) -> Result<()> {
    let m = z.norm();
    if !(m < 1.0) {
        return Err(Error::Domain(format!("|z| = {m} is not below 1")));
    }
    if m > QUADRATURE_LIMIT {
        return Err(Error::QuadratureRefused(format!(
            "|z| = {m} exceeds {QUADRATURE_LIMIT}; use the series route"
        )));
    }
    Ok(())
}

/// Starting orders: angular count resolves the kernel's Fourier decay `|z|^ℓ` down to the
/// tolerance; radial order follows the Bernstein ellipse of the pole `t = 1/|z|²`.
fn initial_orders(z: Complex, angular_degree: usize, radial_degree: usize, tol: f64, variable: RadialVariable) -> (usize, usize) {
    let m = z.norm();
    let digits = (tol / 10.0).ln().abs();
    let (kernel_terms, radial) = if m < 1e-3 {
        (8.0, 4.0)
    } else {
        let x = 2.0 / (m * m) - 1.0;
        let bernstein = (x + (x * x - 1.0).sqrt()).ln();
        (digits / -m.ln(), digits / (2.0 * bernstein))
    };
    let angles = ((angular_degree as f64 + kernel_terms).ceil() as usize + 8).next_power_of_two().max(16);
    let scale = if variable == RadialVariable::R { 2.0 } else { 1.0 };
    let order = (scale * (radial + radial_degree as f64 / 2.0 + angular_degree as f64 / 2.0)).ceil() as usize + 6;
    (order.max(8), angles)
}

/// `∫ |k_z|² f dA` for an arbitrary integrand.
///
/// `angular_degree` and `radial_degree` describe the integrand (trigonometric degree and
/// degree in `|w|`) and only steer the starting orders.
pub fn berezin_quad_fn(
    f: impl Fn(Complex) -> Complex + Sync,
    z: Complex,
    angular_degree: usize,
    radial_degree: usize,
    spec: &QuadratureSpec,
) -> Result<QuadratureValue> {
    spec.validate()?;
    check_quadrature_point(z)?;
    let integrand = |w: Complex| f(w) * kernel_sq(z, w);
    let (n0, a0) = initial_orders(z, angular_degree, radial_degree, spec.tol, spec.radial_variable);
    let mut n = spec.radial_order.unwrap_or(n0);
    let mut a = spec.angular_count.unwrap_or(a0);
    let mut value = disc_integral(&integrand, spec.radial_variable, n, a);
    if !spec.adaptive {
        return Ok(QuadratureValue { value, est_error: None, radial_order: n, angular_count: a, converged: true });
    }
    loop {
        if 4 * n * a > MAX_QUADRATURE_POINTS {
            return Ok(QuadratureValue { value, est_error: None, radial_order: n, angular_count: a, converged: false });
        }
        let (n2, a2) = (2 * n, 2 * a);
        let refined = disc_integral(&integrand, spec.radial_variable, n2, a2);
        let diff = (refined - value).norm();
        n = n2;
        a = a2;
        value = refined;
        if diff <= spec.tol / 2.0 {
            return Ok(QuadratureValue { value, est_error: Some(diff), radial_order: n, angular_count: a, converged: true });
        }
        if 4 * n * a > MAX_QUADRATURE_POINTS {
            return Ok(QuadratureValue { value, est_error: Some(diff), radial_order: n, angular_count: a, converged: false });
        }
    }
}

/// Berezin transform of a symbol by tensor quadrature.
///
/// Radial symbols with odd powers of `r` (and sampled profiles) switch to the `r` variable
/// unless `spec` fixes the orders.
pub fn berezin_quad(symbol: &Symbol, z: Complex, spec: &QuadratureSpec) -> Result<QuadratureValue> {
    let mut spec = spec.clone();
    let radial_degree = match symbol {
        Symbol::Radial(g) => {
            if g.has_odd_powers() && spec.radial_order.is_none() {
                spec.radial_variable = RadialVariable::R;
            }
            g.degree().unwrap_or(8)
        }
        _ => 0,
    };
    berezin_quad_fn(|w| symbol.eval_unchecked(w), z, symbol.angular_degree(), radial_degree, &spec)
}

/// A truncated series value with a rigorous bound on the omitted tail.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: Complex,
    pub tail_bound: f64,
    pub terms: usize,
}

/// `Σ_{m≥M} (m+1) x^m`.
fn weighted_geometric_tail(x: f64, m: usize) -> f64 {
    if x == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    let q = 1.0 - x;
    x.powi(m as i32) * ((m as f64 + 1.0) / q + x / (q * q))
}

fn check_open(z: Complex) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) || !(z.norm() < 1.0) {
        return Err(Error::Domain(format!("|z| = {} is not below 1", z.norm())));
    }
    Ok(())
}

/// Smallest `M` with `(1 − x)² · scale · Σ_{m≥M}(m+1)x^m ≤ tol`.
fn series_length(x: f64, scale: f64, tol: f64) -> usize {
    let q2 = (1.0 - x) * (1.0 - x);
    let mut m = 1usize;
    while q2 * scale * weighted_geometric_tail(x, m) > tol {
        m = if m < 64 { m + 1 } else { m + m / 8 };
    }
    if m > 64 {
        // Tighten the geometric stepping back down to the exact smallest length.
        let mut lo = m - m / 9 - 1;
        while lo < m && q2 * scale * weighted_geometric_tail(x, lo) > tol {
            lo += 1;
        }
        m = lo;
    }
    m
}

/// Series form of `B(w^a w̄^b)(z)`; for `a ≥ b`
/// `(1−|z|²)² z^{a−b} Σ_m (m+1)(m+a−b+1)|z|^{2m}/(m+a+1)`, conjugated for `a < b`.
pub fn berezin_monomial_series(a: u32, b: u32, z: Complex, tol: f64) -> Result<SeriesValue> {
    check_open(z)?;
    if !(tol > 0.0) {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    if a < b {
        let s = berezin_monomial_series(b, a, z, tol)?;
        return Ok(SeriesValue { value: s.value.conj(), ..s });
    }
    let d = a - b;
    let x = z.norm_sqr();
    let lead = z.powu(d);
    let q2 = (1.0 - x) * (1.0 - x);
    let scale = z.norm().powi(d as i32);
    let terms = series_length(x, scale, tol);
    let mut sum = 0.0;
    let mut xm = 1.0;
    for m in 0..terms {
        let mf = m as f64;
        sum += (mf + 1.0) * (mf + d as f64 + 1.0) * xm / (mf + a as f64 + 1.0);
        xm *= x;
    }
    Ok(SeriesValue {
        value: lead * (q2 * sum),
        tail_bound: q2 * scale * weighted_geometric_tail(x, terms),
        terms,
    })
}

/// Berezin transform of a harmonic polynomial as a sum of monomial series.
pub fn berezin_harmonic_series(p: &HarmonicPolynomial, z: Complex, tol: f64) -> Result<SeriesValue> {
    let count = (p.analytic().len() + p.coanalytic().len()).max(1) as f64;
    let mut value = p.p0().value();
    let mut tail = 0.0;
    let mut terms = 0;
    let pieces = p
        .analytic()
        .iter()
        .map(|t| (t.power, 0, t.coef.value()))
        .chain(p.coanalytic().iter().map(|t| (0, t.power, t.coef.value())));
    for (a, b, c) in pieces {
        let s = berezin_monomial_series(a, b, z, tol / (count * c.norm().max(1e-300)))?;
        value += c * s.value;
        tail += c.norm() * s.tail_bound;
        terms = terms.max(s.terms);
    }
    Ok(SeriesValue { value, tail_bound: tail, terms })
}

/// Moments `μ_n = 2∫₀¹ g(r) r^{2n+1} dr` of a radial profile.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialMoments {
    values: Vec<f64>,
    exact_coeffs: Option<Vec<BigRational>>,
    sup_bound: f64,
}

impl RadialMoments {
    /// The first `count` moments, in closed form for polynomials and by exact
    /// segment integration for piecewise-linear samples.
    pub fn from_symbol(g: &RadialSymbol, count: usize) -> Self {
        let values = match g {
            RadialSymbol::Polynomial { coeffs, .. } => (0..count)
                .map(|n| {
                    coeffs
                        .iter()
                        .enumerate()
                        .map(|(k, &c)| 2.0 * c / (2.0 * n as f64 + 2.0 + k as f64))
                        .sum()
                })
                .collect(),
            RadialSymbol::Sampled { radii, values } => (0..count).map(|n| sampled_moment(radii, values, n)).collect(),
        };
        Self {
            values,
            exact_coeffs: g.exact_coefficients().map(|c| c.to_vec()),
            sup_bound: g.sup_bound(),
        }
    }

    /// Moments supplied directly with a bound `sup|g|` used for tail estimates.
    pub fn from_values(values: Vec<f64>, sup_bound: f64) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) || !(sup_bound >= 0.0) {
            return Err(Error::Argument("moments and sup bound must be finite".into()));
        }
        Ok(Self { values, exact_coeffs: None, sup_bound })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// Exact `μ_n` for polynomials with rational coefficients.
    pub fn exact(&self, n: usize) -> Option<BigRational> {
        let coeffs = self.exact_coeffs.as_ref()?;
        Some(coeffs.iter().enumerate().fold(BigRational::zero(), |acc, (k, c)| {
            acc + c * crate::exact::rational(2, 2 * n as i64 + 2 + k as i64)
        }))
    }
}

/// `2∫ g r^{2n+1} dr` for the piecewise-linear profile, constant beyond the end samples.
fn sampled_moment(radii: &[f64], values: &[f64], n: usize) -> f64 {
    let p = 2 * n as i32 + 2;
    // ∫_a^b (α + β r) r^{p−1} · 2 dr
    let seg = |a: f64, b: f64, alpha: f64, beta: f64| {
        2.0 * alpha * (b.powi(p) - a.powi(p)) / p as f64 + 2.0 * beta * (b.powi(p + 1) - a.powi(p + 1)) / (p + 1) as f64
    };
    let last = radii.len() - 1;
    let mut total = seg(0.0, radii[0], values[0], 0.0) + seg(radii[last], 1.0, values[last], 0.0);
    for i in 0..last {
        let (a, b) = (radii[i], radii[i + 1]);
        let beta = (values[i + 1] - values[i]) / (b - a);
        total += seg(a, b, values[i] - beta * a, beta);
    }
    total
}

/// `(1−|z|²)² Σ_n (n+1)² |z|^{2n} μ_n`, truncated where the tail bound
/// `(1−x)² sup|g| Σ_{n≥M}(n+1)xⁿ` drops below `tol`.
pub fn berezin_radial_series(moments: &RadialMoments, z: Complex, tol: f64) -> Result<SeriesValue> {
    check_open(z)?;
    if !(tol > 0.0) {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    let x = z.norm_sqr();
    let required = series_length(x, moments.sup_bound, tol);
    if required > moments.len() {
        return Err(Error::InsufficientMoments { required, available: moments.len() });
    }
    let q2 = (1.0 - x) * (1.0 - x);
    let mut sum = 0.0;
    let mut xn = 1.0;
    for (n, mu) in moments.values[..required].iter().enumerate() {
        let w = (n + 1) as f64;
        sum += w * w * xn * mu;
        xn *= x;
    }
    Ok(SeriesValue {
        value: Complex::new(q2 * sum, 0.0),
        tail_bound: q2 * moments.sup_bound * weighted_geometric_tail(x, required),
        terms: required,
    })
}

/// Radial series with exactly as many moments as the tolerance requires.
pub fn berezin_radial(g: &RadialSymbol, z: Complex, tol: f64) -> Result<SeriesValue> {
    check_open(z)?;
    let required = series_length(z.norm_sqr(), g.sup_bound(), tol);
    berezin_radial_series(&RadialMoments::from_symbol(g, required), z, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixBerezin {
    pub value: Complex,
    /// `2‖T‖√τ` with `τ = (1−|z|²)² Σ_{n≥N}(n+1)|z|^{2n}`, the squared norm of the part of
    /// `k_z` outside the truncation.
    pub tail_bound: f64,
    pub norm_used: f64,
}

/// `⟨T k_z, k_z⟩` restricted to the first `N` basis vectors, `c_n = (1−|z|²)√(n+1) z̄ⁿ`.
///
/// The tail uses the truncation's operator-norm bound when it carries one and its
/// largest singular value otherwise.
pub fn berezin_of_matrix(t: &ToeplitzTruncation, z: Complex) -> Result<MatrixBerezin> {
    check_open(z)?;
    let n = t.dim();
    let x = z.norm_sqr();
    let zc = z.conj();
    let mut c = Vec::with_capacity(n);
    let mut power = Complex::new(1.0 - x, 0.0);
    for k in 0..n {
        c.push(power * ((k + 1) as f64).sqrt());
        power *= zc;
    }
    let m = t.entries();
    let mut value = ZERO;
    for i in 0..n {
        let row: Complex = (0..n).map(|j| m[(i, j)] * c[j]).sum();
        value += c[i].conj() * row;
    }
    let norm = match t.operator_norm_bound() {
        Some(b) => b,
        None => t.singular_extremes()?.1,
    };
    let tau = (1.0 - x) * (1.0 - x) * weighted_geometric_tail(x, n);
    Ok(MatrixBerezin { value, tail_bound: 2.0 * norm * tau.sqrt(), norm_used: norm })
}

/// Route selection for point evaluations of the Berezin transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Series for `|z| > 0.95` when the symbol allows it, quadrature otherwise.
    Auto,
    Quad,
    Series,
    Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BerezinValue {
    pub value: Complex,
    pub est_error: f64,
    pub route: Route,
}

/// Berezin transform of a symbol at `z` by the requested route. The matrix route builds
/// the closed-form truncation of size `matrix_size`.
pub fn berezin_at(symbol: &Symbol, z: Complex, route: Route, spec: &QuadratureSpec, matrix_size: usize) -> Result<BerezinValue> {
    check_open(z)?;
    let series_ok = !matches!(symbol, Symbol::Sampled(_));
    let route = match route {
        Route::Auto if series_ok && z.norm() > SERIES_THRESHOLD => Route::Series,
        Route::Auto => Route::Quad,
        r => r,
    };
    match route {
        Route::Quad => {
            let q = berezin_quad(symbol, z, spec)?;
            Ok(BerezinValue { value: q.value, est_error: q.est_error.unwrap_or(f64::NAN), route })
        }
        Route::Series => {
            let s = match symbol {
                Symbol::Harmonic(p) => berezin_harmonic_series(p, z, spec.tol)?,
                Symbol::Radial(g) => berezin_radial(g, z, spec.tol)?,
                Symbol::Sampled(_) => {
                    return Err(Error::Argument("the series route needs a harmonic or radial symbol".into()))
                }
            };
            Ok(BerezinValue { value: s.value, est_error: s.tail_bound, route })
        }
        Route::Matrix => {
            let t = crate::toeplitz::matrix_closed(symbol, matrix_size)?;
            let m = berezin_of_matrix(&t, z)?;
            Ok(BerezinValue { value: m.value, est_error: m.tail_bound, route })
        }
        Route::Auto => unreachable!("auto route resolved above"),
    }
}

/// Complex values attached to the nodes of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    grid: DiskGrid,
    values: Vec<Complex>,
}

impl GridField {
    pub fn new(grid: DiskGrid, values: Vec<Complex>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::Argument(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        Ok(Self { grid, values })
    }

    pub fn sample(grid: DiskGrid, f: impl Fn(Complex) -> Complex + Sync) -> Self {
        let values = grid.nodes().par_iter().map(|&z| f(z)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &DiskGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex] {
        &self.values
    }

    pub fn into_sampled(self, interpolation: Interpolation) -> Result<SampledSymbol> {
        SampledSymbol::new(self.grid, self.values, interpolation)
    }
}

pub const DEFAULT_FIELD_RADIAL_ORDER: usize = 48;
pub const DEFAULT_FIELD_ANGLES: usize = 128;
const MAX_FINE_ORDER: usize = 8192;

/// `Σ_j (j+1)(j+ℓ+1) x^{2j+ℓ} = x^ℓ [2/(1−x²)³ + (ℓ−1)/(1−x²)²]`.
fn kernel_mode(l: usize, x: f64) -> f64 {
    let q = 1.0 - x * x;
    x.powi(l as i32) * (2.0 / (q * q * q) + (l as f64 - 1.0) / (q * q))
}

/// Field on a Gauss rule grid, stored as angular Fourier coefficients per ring with the
/// factor `r` removed from odd frequencies so that every mode is smooth in `t = r²`.
struct SpectralField {
    rule: Arc<Rule>,
    freqs: Vec<i64>,
    /// `reduced[j][f]` for ring `j` and frequency `freqs[f]`.
    reduced: Vec<Vec<Complex>>,
    tol: f64,
}

impl SpectralField {
    fn new(rule: Arc<Rule>, angles: usize, values: &[Complex], tol: f64) -> Self {
        let half = (angles / 2) as i64;
        // For even counts the Nyquist mode is split evenly between ±A/2.
        let freqs: Vec<i64> = (-half..=half).collect();
        let reduced = (0..rule.order())
            .into_par_iter()
            .map(|j| {
                let ring = &values[j * angles..(j + 1) * angles];
                let r = rule.nodes[j].sqrt();
                freqs
                    .iter()
                    .map(|&l| {
                        let mut a: Complex = ring
                            .iter()
                            .enumerate()
                            .map(|(k, &v)| v * Complex::from_polar(1.0, -2.0 * PI * (l * k as i64) as f64 / angles as f64))
                            .sum();
                        a /= angles as f64;
                        if angles.is_multiple_of(2) && l.abs() == half {
                            a *= 0.5;
                        }
                        if l % 2 != 0 {
                            a /= r;
                        }
                        a
                    })
                    .collect()
            })
            .collect();
        Self { rule, freqs, reduced, tol }
    }

    /// Fine radial order resolving the kernel at radius `rho`.
    fn fine_order(&self, rho: f64) -> usize {
        let digits = (self.tol / 100.0).ln().abs();
        let kernel = if rho < 1e-3 {
            0.0
        } else {
            let x = 2.0 / (rho * rho) - 1.0;
            digits / (2.0 * (x + (x * x - 1.0).sqrt()).ln())
        };
        let fmax = *self.freqs.last().unwrap_or(&0) as usize;
        let need = kernel.ceil() as usize + self.rule.order() + fmax / 2 + 16;
        need.next_power_of_two().clamp(32, MAX_FINE_ORDER)
    }

    /// Interpolated modes (odd factor restored) at the nodes of the fine rule.
    fn fine_table(&self, fine: &Rule) -> Vec<Vec<Complex>> {
        fine.nodes
            .par_iter()
            .map(|&s| {
                let row = self.rule.interpolation_row(s);
                let root = s.sqrt();
                self.freqs
                    .iter()
                    .enumerate()
                    .map(|(f, &l)| {
                        let v: Complex = row.iter().zip(&self.reduced).map(|(c, ring)| ring[f] * *c).sum();
                        if l % 2 != 0 { v * root } else { v }
                    })
                    .collect()
            })
            .collect()
    }

    /// Fourier coefficients of `B f` on the circle of radius `rho`.
    fn transform_modes(&self, rho: f64, fine: &Rule, table: &[Vec<Complex>]) -> Vec<Complex> {
        let q = 1.0 - rho * rho;
        let q2 = q * q;
        let mut modes = vec![ZERO; self.freqs.len()];
        for (m, (&s, &w)) in fine.nodes.iter().zip(&fine.weights).enumerate() {
            let x = s.sqrt() * rho;
            for (f, &l) in self.freqs.iter().enumerate() {
                modes[f] += table[m][f] * (w * kernel_mode(l.unsigned_abs() as usize, x));
            }
        }
        modes.iter_mut().for_each(|v| *v *= q2);
        modes
    }

    fn synthesize(&self, modes: &[Complex], alpha: f64) -> Complex {
        self.freqs
            .iter()
            .zip(modes)
            .map(|(&l, &a)| a * Complex::from_polar(1.0, l as f64 * alpha))
            .sum()
    }

    /// `B f` at every node of `grid`, grouped by ring.
    fn transform_on(&self, grid: &DiskGrid) -> Vec<Complex> {
        let radii = grid.radii();
        let orders: Vec<usize> = radii.iter().map(|&r| self.fine_order(r)).collect();
        let mut unique = orders.clone();
        unique.sort_unstable();
        unique.dedup();
        let tables: HashMap<usize, (Arc<Rule>, Vec<Vec<Complex>>)> = unique
            .into_iter()
            .map(|o| {
                let fine = gauss_legendre(o);
                let table = self.fine_table(&fine);
                (o, (fine, table))
            })
            .collect();
        let rings: Vec<Vec<Complex>> = (0..radii.len())
            .into_par_iter()
            .map(|i| {
                let (fine, table) = &tables[&orders[i]];
                let modes = self.transform_modes(radii[i], fine, table);
                let count = grid.angular_counts()[i];
                (0..count)
                    .map(|k| self.synthesize(&modes, 2.0 * PI * k as f64 / count as f64))
                    .collect()
            })
            .collect();
        rings.into_iter().flatten().collect()
    }

    fn transform_at(&self, z: Complex) -> Complex {
        let (rho, alpha) = z.to_polar();
        let fine = gauss_legendre(self.fine_order(rho));
        let table = self.fine_table(&fine);
        let modes = self.transform_modes(rho, &fine, &table);
        self.synthesize(&modes, alpha)
    }
}

fn rule_grid(spec: &QuadratureSpec) -> Result<(DiskGrid, usize, usize)> {
    let order = spec.radial_order.unwrap_or(DEFAULT_FIELD_RADIAL_ORDER);
    let angles = spec.angular_count.unwrap_or(DEFAULT_FIELD_ANGLES);
    Ok((DiskGrid::gauss_rule(order, angles)?, order, angles))
}

/// Values of the field on the rule grid, resampled bilinearly when the field lives elsewhere.
fn values_on_rule(field: &GridField, rule: &DiskGrid) -> Result<Vec<Complex>> {
    if field.grid == *rule {
        return Ok(field.values.clone());
    }
    let sampled = SampledSymbol::new(field.grid.clone(), field.values.clone(), Interpolation::Bilinear)?;
    Ok(rule.nodes().par_iter().map(|&z| sampled.eval_unchecked(z)).collect())
}

/// `Bⁿ f` on the field's own grid.
///
/// Each application integrates exactly in angle (the kernel's Fourier modes are summed in
/// closed form) and in `t = r²` with a Gauss rule refined for each output radius; the
/// field between applications lives on the Gauss rule grid of `spec`
/// (`radial_order × angular_count`, defaults 48 × 128).
pub fn iterate_berezin(field: &GridField, n: usize, spec: &QuadratureSpec) -> Result<GridField> {
    if n == 0 {
        return Ok(field.clone());
    }
    spec.validate()?;
    let (rule, order, angles) = rule_grid(spec)?;
    let mut values = values_on_rule(field, &rule)?;
    for step in 0..n {
        let spectral = SpectralField::new(gauss_legendre(order), angles, &values, spec.tol);
        let target = if step + 1 == n { &field.grid } else { &rule };
        values = spectral.transform_on(target);
    }
    GridField::new(field.grid.clone(), values)
}

/// `B f (z)` for a grid field at a single point.
pub fn berezin_field_at(field: &GridField, z: Complex, spec: &QuadratureSpec) -> Result<Complex> {
    check_open(z)?;
    spec.validate()?;
    let (rule, order, angles) = rule_grid(spec)?;
    let values = values_on_rule(field, &rule)?;
    Ok(SpectralField::new(gauss_legendre(order), angles, &values, spec.tol).transform_at(z))
}

/// Boundary function on the unit circle.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryData {
    Trig(TrigPolynomial),
    /// Values at `2πk/M`, `k = 0..M−1`.
    Samples(Vec<Complex>),
}

impl BoundaryData {
    pub fn to_trig(&self) -> Result<TrigPolynomial> {
        match self {
            BoundaryData::Trig(t) => Ok(t.clone()),
            BoundaryData::Samples(s) => TrigPolynomial::from_samples(s),
        }
    }
}

/// Poisson (harmonic) extension into the disc: `Σ a_n r^{|n|} e^{inθ}` for trigonometric
/// polynomials and the trapezoid rule for the Poisson integral for samples.
pub fn poisson_extend(g: &BoundaryData, z: Complex) -> Result<Complex> {
    check_open(z)?;
    match g {
        BoundaryData::Trig(t) => Ok(t.harmonic_extension(z)),
        BoundaryData::Samples(s) => {
            if s.is_empty() {
                return Err(Error::Argument("no boundary samples".into()));
            }
            let m = s.len();
            let a = 1.0 - z.norm_sqr();
            let total: Complex = s
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    let e = Complex::from_polar(1.0, 2.0 * PI * k as f64 / m as f64);
                    v * (a / (e - z).norm_sqr())
                })
                .sum();
            Ok(total / m as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::with_tol(1e-11)
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel(c(0.0, 0.0), c(0.3, 0.9)).unwrap(), c(1.0, 0.0));
        let v = kernel(c(0.5, 0.0), c(0.5, 0.0)).unwrap();
        assert!((v - c(4.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!(kernel(c(1.0, 0.0), c(1.0, 0.0)).is_err());
        let one = berezin_quad_fn(|_| c(1.0, 0.0), c(0.7, 0.0), 0, 0, &spec()).unwrap();
        assert!((one.value - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn quadrature_examples() {
        let one: Symbol = HarmonicPolynomial::constant(c(1.0, 0.0)).unwrap().into();
        let v = berezin_quad(&one, c(0.3, -0.4), &spec()).unwrap();
        assert!((v.value - c(1.0, 0.0)).norm() < 1e-10 && v.converged);

        let p = HarmonicPolynomial::from_floats(2.0, &[(1, c(0.5, 0.0))], &[(2, c(0.5, 0.0))]).unwrap();
        let z = c(0.6, 0.5);
        let v = berezin_quad(&p.clone().into(), z, &spec()).unwrap();
        assert!((v.value - p.eval(z).unwrap()).norm() < 1e-10);

        let r2: Symbol = RadialSymbol::polynomial(vec![0.0, 0.0, 1.0]).unwrap().into();
        let v = berezin_quad(&r2, c(0.0, 0.0), &spec()).unwrap();
        assert!((v.value - c(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn quadrature_refuses_near_boundary() {
        let one: Symbol = HarmonicPolynomial::constant(c(1.0, 0.0)).unwrap().into();
        assert!(matches!(berezin_quad(&one, c(0.9995, 0.0), &spec()), Err(Error::QuadratureRefused(_))));
        assert!(matches!(berezin_quad(&one, c(1.0, 0.0), &spec()), Err(Error::Domain(_))));
    }

    #[test]
    fn monomial_series_examples() {
        let z = c(0.4, -0.7);
        let s = berezin_monomial_series(0, 0, z, 1e-14).unwrap();
        assert!((s.value - c(1.0, 0.0)).norm() < 1e-13);
        let s = berezin_monomial_series(1, 0, z, 1e-14).unwrap();
        assert!((s.value - z).norm() < 1e-13);
        let s = berezin_monomial_series(1, 1, c(0.0, 0.0), 1e-14).unwrap();
        assert_eq!(s.value, c(0.5, 0.0));
        let s = berezin_monomial_series(0, 3, z, 1e-14).unwrap();
        assert!((s.value - z.conj().powu(3)).norm() < 1e-13);
    }

    #[test]
    fn monomial_series_matches_quadrature() {
        let z = c(-0.5, 0.6);
        for (a, b) in [(2, 1), (1, 3), (4, 4), (0, 2)] {
            let q = berezin_quad_fn(|w| w.powu(a) * w.conj().powu(b), z, (a + b) as usize, 0, &spec()).unwrap();
            let s = berezin_monomial_series(a, b, z, 1e-13).unwrap();
            assert!((q.value - s.value).norm() < 1e-9, "{a},{b}: {} vs {}", q.value, s.value);
        }
    }

    #[test]
    fn radial_series_examples() {
        let one = RadialSymbol::polynomial(vec![1.0]).unwrap();
        let v = berezin_radial(&one, c(0.99, 0.0), 1e-12).unwrap();
        assert!((v.value.re - 1.0).abs() < 1e-10);

        let r2 = RadialSymbol::polynomial(vec![0.0, 0.0, 1.0]).unwrap();
        let mu = RadialMoments::from_symbol(&r2, 4);
        assert_eq!(mu.values()[0], 0.5);
        assert_eq!(mu.exact(0), Some(rational(1, 2)));
        let v = berezin_radial_series(&mu, c(0.0, 0.0), 1e-12).unwrap();
        assert_eq!(v.value.re, 0.5);

        let short = RadialMoments::from_symbol(&r2, 3);
        match berezin_radial_series(&short, c(0.9, 0.0), 1e-12) {
            Err(Error::InsufficientMoments { required, available }) => {
                assert!(required > 3);
                assert_eq!(available, 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sampled_moments_match_polynomial_for_linear_profile() {
        let g = RadialSymbol::sampled(vec![0.0, 1.0], vec![1.0, 3.0]).unwrap();
        let p = RadialSymbol::polynomial(vec![1.0, 2.0]).unwrap();
        let a = RadialMoments::from_symbol(&g, 10);
        let b = RadialMoments::from_symbol(&p, 10);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn radial_series_matches_quadrature() {
        let g = RadialSymbol::polynomial(vec![1.0, -1.5, 1.0]).unwrap();
        for r in [0.0, 0.3, 0.8] {
            let z = c(r, 0.0);
            let s = berezin_radial(&g, z, 1e-13).unwrap();
            let q = berezin_quad(&g.clone().into(), z, &spec()).unwrap();
            assert!((s.value - q.value).norm() < 1e-9, "{r}: {} vs {}", s.value, q.value);
        }
    }

    #[test]
    fn auto_route_uses_series_near_boundary() {
        let p: Symbol = HarmonicPolynomial::from_floats(1.0, &[(1, c(0.5, 0.0))], &[]).unwrap().into();
        let z = c(0.98, 0.0);
        let v = berezin_at(&p, z, Route::Auto, &spec(), 64).unwrap();
        assert_eq!(v.route, Route::Series);
        assert!((v.value - c(1.49, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn iterate_examples() {
        let grid = DiskGrid::chebyshev(24, 64, Some(1e-6)).unwrap();
        let f = GridField::sample(grid.clone(), |w| c(w.norm_sqr(), 0.0));
        assert_eq!(iterate_berezin(&f, 0, &spec()).unwrap(), f);

        let once = iterate_berezin(&f, 1, &spec()).unwrap();
        // Node 0 is the centre; the bilinear resample of |w|² costs about h²/4.
        assert!((once.values()[0] - c(0.5, 0.0)).norm() < 1e-3, "{}", once.values()[0]);
        let rule = DiskGrid::gauss_rule(DEFAULT_FIELD_RADIAL_ORDER, DEFAULT_FIELD_ANGLES).unwrap();
        let exact = GridField::sample(rule, |w| c(w.norm_sqr(), 0.0));
        let at_centre = berezin_field_at(&exact, c(0.0, 0.0), &spec()).unwrap();
        assert!((at_centre - c(0.5, 0.0)).norm() < 1e-12, "{at_centre}");

        let p = HarmonicPolynomial::from_floats(2.0, &[(1, c(0.5, 0.0))], &[(2, c(0.5, 0.0))]).unwrap();
        let h = GridField::sample(grid, |w| p.eval_unchecked(w));
        let thrice = iterate_berezin(&h, 3, &spec()).unwrap();
        for (a, b) in thrice.values().iter().zip(h.values()) {
            assert!((a - b).norm() < 5e-3, "{a} vs {b}");
        }
    }

    #[test]
    fn iterate_on_rule_grid_is_spectrally_accurate() {
        let grid = DiskGrid::gauss_rule(DEFAULT_FIELD_RADIAL_ORDER, DEFAULT_FIELD_ANGLES).unwrap();
        let p = HarmonicPolynomial::from_floats(1.0, &[(3, c(0.3, 0.1))], &[(5, c(-0.2, 0.4))]).unwrap();
        let h = GridField::sample(grid.clone(), |w| p.eval_unchecked(w));
        let twice = iterate_berezin(&h, 2, &spec()).unwrap();
        for (a, b) in twice.values().iter().zip(h.values()) {
            assert!((a - b).norm() < 1e-9, "{a} vs {b}");
        }
        let r2 = GridField::sample(grid, |w| c(w.norm_sqr(), 0.0));
        let b = berezin_field_at(&r2, c(0.5, 0.2), &spec()).unwrap();
        let s = berezin_monomial_series(1, 1, c(0.5, 0.2), 1e-14).unwrap();
        assert!((b - s.value).norm() < 1e-10, "{b} vs {}", s.value);
    }

    #[test]
    fn poisson_examples() {
        let one = BoundaryData::Trig(TrigPolynomial::new(vec![(0, c(1.0, 0.0))]));
        let z = c(0.3, 0.4);
        assert_eq!(poisson_extend(&one, z).unwrap(), c(1.0, 0.0));
        let e = BoundaryData::Trig(TrigPolynomial::new(vec![(1, c(1.0, 0.0))]));
        assert!((poisson_extend(&e, z).unwrap() - z).norm() < 1e-15);
        let cos = BoundaryData::Samples((0..64).map(|k| c((2.0 * PI * k as f64 / 64.0).cos(), 0.0)).collect());
        assert!((poisson_extend(&cos, z).unwrap() - c(z.re, 0.0)).norm() < 1e-12);
        assert!(poisson_extend(&cos, c(1.0, 0.0)).is_err());
    }
}
