//! Symbol classes: harmonic polynomials, radial profiles and sampled fields on the disc.

use std::f64::consts::PI;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{self, rational_from_f64, reduce_mod_two, to_f64};
use crate::geometry::DiskGrid;

pub type Complex = num_complex::Complex64;

/// Points with |z| up to this are accepted as lying on the closed disc.
pub const DISC_TOLERANCE: f64 = 1e-12;

/// Coefficient-modulus sum tolerance for the floating-point normalization check.
pub const FLOAT_FORM_TOLERANCE: f64 = 1e-12;

pub(crate) fn check_on_closed_disc(z: Complex) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite point {z}")));
    }
    if z.norm() > 1.0 + DISC_TOLERANCE {
        return Err(Error::Domain(format!("|z| = {} exceeds 1", z.norm())));
    }
    Ok(())
}

/// `cis(π·q)`, exact on the four axis directions.
pub(crate) fn cis_pi(q: f64) -> Complex {
    let q = q.rem_euclid(2.0);
    match q {
        0.0 => Complex::new(1.0, 0.0),
        0.5 => Complex::new(0.0, 1.0),
        1.0 => Complex::new(-1.0, 0.0),
        1.5 => Complex::new(0.0, -1.0),
        _ => {
            let (s, c) = (PI * q).sin_cos();
            Complex::new(c, s)
        }
    }
}

/// Coefficient in polar form with the argument stored as an exact multiple of π.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarCoefficient {
    modulus: BigRational,
    arg_over_pi: BigRational,
}

impl PolarCoefficient {
    /// The argument is reduced into `[0, 2)`.
    pub fn new(modulus: BigRational, arg_over_pi: BigRational) -> Result<Self> {
        if modulus.is_negative() {
            return Err(Error::Argument("polar modulus must be nonnegative".into()));
        }
        Ok(Self {
            modulus,
            arg_over_pi: reduce_mod_two(&arg_over_pi),
        })
    }

    pub fn modulus(&self) -> &BigRational {
        &self.modulus
    }

    pub fn arg_over_pi(&self) -> &BigRational {
        &self.arg_over_pi
    }

    pub fn to_complex(&self) -> Complex {
        cis_pi(to_f64(&self.arg_over_pi)) * to_f64(&self.modulus)
    }
}

/// Complex coefficient with an optional exact polar twin.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficient {
    value: Complex,
    polar: Option<PolarCoefficient>,
}

impl Coefficient {
    /// Float coefficient. Axis-aligned values (purely real or purely imaginary) also get an
    /// exact polar form, read from the shortest decimal of the nonzero component.
    pub fn from_complex(value: Complex) -> Result<Self> {
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::Argument(format!("non-finite coefficient {value}")));
        }
        let polar = match (value.re, value.im) {
            (re, 0.0) => rational_from_f64(re).map(|q| {
                let arg = if q.is_negative() { BigRational::one() } else { BigRational::zero() };
                PolarCoefficient { modulus: q.abs(), arg_over_pi: arg }
            }),
            (0.0, im) => rational_from_f64(im).map(|q| {
                let arg = if q.is_negative() { exact::rational(3, 2) } else { exact::rational(1, 2) };
                PolarCoefficient { modulus: q.abs(), arg_over_pi: arg }
            }),
            _ => None,
        };
        Ok(Self { value, polar })
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::from_complex(Complex::new(x, 0.0))
    }

    pub fn from_polar(polar: PolarCoefficient) -> Self {
        Self {
            value: polar.to_complex(),
            polar: Some(polar),
        }
    }

    /// Exact real rational coefficient.
    pub fn from_rational(q: BigRational) -> Self {
        let arg = if q.is_negative() { BigRational::one() } else { BigRational::zero() };
        Self::from_polar(PolarCoefficient { modulus: q.abs(), arg_over_pi: arg })
    }

    pub fn value(&self) -> Complex {
        self.value
    }

    pub fn polar(&self) -> Option<&PolarCoefficient> {
        self.polar.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        match &self.polar {
            Some(p) => p.modulus.is_zero(),
            None => self.value == Complex::new(0.0, 0.0),
        }
    }

    /// Exact value when the coefficient is a real rational.
    pub fn exact_real(&self) -> Option<BigRational> {
        let p = self.polar.as_ref()?;
        if p.arg_over_pi.is_zero() || p.modulus.is_zero() {
            Some(p.modulus.clone())
        } else if p.arg_over_pi.is_one() {
            Some(-p.modulus.clone())
        } else {
            None
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            value: self.value.conj(),
            polar: self.polar.as_ref().map(|p| PolarCoefficient {
                modulus: p.modulus.clone(),
                arg_over_pi: reduce_mod_two(&-p.arg_over_pi.clone()),
            }),
        }
    }

    /// Multiplies by a positive real; exactness survives only for rational factors.
    fn scale(&self, c: f64, exact_c: Option<&BigRational>) -> Self {
        Self {
            value: self.value * c,
            polar: match (&self.polar, exact_c) {
                (Some(p), Some(q)) => Some(PolarCoefficient {
                    modulus: &p.modulus * q,
                    arg_over_pi: p.arg_over_pi.clone(),
                }),
                _ => None,
            },
        }
    }
}

/// One monomial `coef · z^power` (analytic) or `coef · z̄^power` (coanalytic).
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub power: u32,
    pub coef: Coefficient,
}

impl Term {
    pub fn new(power: u32, coef: Coefficient) -> Self {
        Self { power, coef }
    }
}

/// `p0 + Σ p_m z^m + Σ q_n z̄^n` with finitely many nonzero terms.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicPolynomial {
    p0: Coefficient,
    analytic: Vec<Term>,
    coanalytic: Vec<Term>,
}

fn validate_terms(terms: &[Term], what: &str) -> Result<()> {
    for (i, t) in terms.iter().enumerate() {
        if t.power == 0 {
            return Err(Error::Argument(format!("{what}[{i}]: exponent must be positive")));
        }
        if t.coef.is_zero() {
            return Err(Error::Argument(format!("{what}[{i}]: coefficient must be nonzero")));
        }
        if i > 0 && terms[i - 1].power >= t.power {
            return Err(Error::Argument(format!(
                "{what}: exponents must be strictly increasing ({} then {})",
                terms[i - 1].power, t.power
            )));
        }
    }
    Ok(())
}

impl HarmonicPolynomial {
    pub fn new(p0: Coefficient, analytic: Vec<Term>, coanalytic: Vec<Term>) -> Result<Self> {
        validate_terms(&analytic, "analytic")?;
        validate_terms(&coanalytic, "coanalytic")?;
        Ok(Self { p0, analytic, coanalytic })
    }

    pub fn constant(c: Complex) -> Result<Self> {
        Self::new(Coefficient::from_complex(c)?, vec![], vec![])
    }

    /// Convenience constructor from float coefficients.
    pub fn from_floats(p0: f64, analytic: &[(u32, Complex)], coanalytic: &[(u32, Complex)]) -> Result<Self> {
        let conv = |terms: &[(u32, Complex)]| -> Result<Vec<Term>> {
            terms
                .iter()
                .map(|&(k, c)| Ok(Term::new(k, Coefficient::from_complex(c)?)))
                .collect()
        };
        Self::new(Coefficient::real(p0)?, conv(analytic)?, conv(coanalytic)?)
    }

    pub fn p0(&self) -> &Coefficient {
        &self.p0
    }

    pub fn analytic(&self) -> &[Term] {
        &self.analytic
    }

    pub fn coanalytic(&self) -> &[Term] {
        &self.coanalytic
    }

    pub fn degree(&self) -> u32 {
        self.analytic
            .iter()
            .chain(&self.coanalytic)
            .map(|t| t.power)
            .max()
            .unwrap_or(0)
    }

    /// Evaluates on the closed disc.
    pub fn eval(&self, z: Complex) -> Result<Complex> {
        check_on_closed_disc(z)?;
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: Complex) -> Complex {
        let zc = z.conj();
        let mut acc = self.p0.value;
        for t in &self.analytic {
            acc += t.coef.value * z.powu(t.power);
        }
        for t in &self.coanalytic {
            acc += t.coef.value * zc.powu(t.power);
        }
        acc
    }

    /// `P*`: analytic and coanalytic lists swapped, all coefficients conjugated, so that
    /// `P*(z) = conj(P(conj z))` and `T_{P*} = T_P^*`.
    pub fn conjugate_swap(&self) -> Self {
        let conj_terms = |ts: &[Term]| ts.iter().map(|t| Term::new(t.power, t.coef.conj())).collect();
        Self {
            p0: self.p0.conj(),
            analytic: conj_terms(&self.coanalytic),
            coanalytic: conj_terms(&self.analytic),
        }
    }

    /// Lipschitz constant on the closed disc: `Σ m|p_m| + Σ n|q_n|`.
    pub fn lipschitz(&self) -> f64 {
        self.analytic
            .iter()
            .chain(&self.coanalytic)
            .map(|t| t.power as f64 * t.coef.value.norm())
            .sum()
    }

    /// `Σ|p_m| + Σ|q_n|` in floating point.
    pub fn modulus_sum(&self) -> f64 {
        self.analytic
            .iter()
            .chain(&self.coanalytic)
            .map(|t| t.coef.value.norm())
            .sum()
    }

    /// Exact modulus sum when every nonconstant coefficient carries a polar form.
    pub fn exact_modulus_sum(&self) -> Option<BigRational> {
        self.analytic
            .iter()
            .chain(&self.coanalytic)
            .map(|t| t.coef.polar().map(|p| p.modulus().clone()))
            .try_fold(BigRational::zero(), |acc, m| m.map(|m| acc + m))
    }

    /// True when the normalization check can run in exact arithmetic.
    pub fn is_exact(&self) -> bool {
        self.p0.exact_real().is_some() && self.exact_modulus_sum().is_some()
    }

    /// Divides the polynomial by its coefficient-modulus sum (the operator's invertibility
    /// is unchanged by positive scaling). Exact when the polynomial is exact.
    pub fn renormalized(&self) -> Result<Self> {
        let s = self.modulus_sum();
        if s == 0.0 {
            return Err(Error::Argument("cannot renormalize a constant polynomial".into()));
        }
        let exact = self.exact_modulus_sum().map(|q| BigRational::one() / q);
        let inv = exact.as_ref().map(to_f64).unwrap_or(1.0 / s);
        let scale = |ts: &[Term]| -> Vec<Term> {
            ts.iter()
                .map(|t| Term::new(t.power, t.coef.scale(inv, exact.as_ref())))
                .collect()
        };
        Self::new(self.p0.scale(inv, exact.as_ref()), scale(&self.analytic), scale(&self.coanalytic))
    }

    /// Restriction to the unit circle as a trigonometric polynomial in θ.
    pub fn boundary_trig(&self) -> TrigPolynomial {
        let mut terms = vec![(0i64, self.p0.value)];
        terms.extend(self.analytic.iter().map(|t| (t.power as i64, t.coef.value)));
        terms.extend(self.coanalytic.iter().map(|t| (-(t.power as i64), t.coef.value)));
        TrigPolynomial::new(terms)
    }
}

/// `Σ a_n e^{inθ}` on the unit circle, `n ∈ ℤ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    terms: Vec<(i64, Complex)>,
}

impl TrigPolynomial {
    /// Repeated frequencies are merged; zero coefficients dropped.
    pub fn new(mut terms: Vec<(i64, Complex)>) -> Self {
        terms.sort_by_key(|&(n, _)| n);
        let mut merged: Vec<(i64, Complex)> = Vec::with_capacity(terms.len());
        for (n, a) in terms {
            match merged.last_mut() {
                Some((m, b)) if *m == n => *b += a,
                _ => merged.push((n, a)),
            }
        }
        merged.retain(|&(_, a)| a != Complex::new(0.0, 0.0));
        Self { terms: merged }
    }

    /// Trigonometric interpolant of equispaced samples `g(2πk/M)`.
    pub fn from_samples(samples: &[Complex]) -> Result<Self> {
        let m = samples.len();
        if m == 0 {
            return Err(Error::Argument("no boundary samples".into()));
        }
        let half = (m / 2) as i64;
        let mut terms = Vec::with_capacity(m);
        for n in -half..=half {
            if m.is_multiple_of(2) && n == -half {
                continue;
            }
            let mut a = Complex::new(0.0, 0.0);
            for (k, &g) in samples.iter().enumerate() {
                a += g * cis_pi(-2.0 * (n * k as i64) as f64 / m as f64);
            }
            a /= m as f64;
            if m.is_multiple_of(2) && n == half {
                // Nyquist mode split evenly so that real samples give a real interpolant.
                terms.push((half, a * 0.5));
                terms.push((-half, a * 0.5));
            } else {
                terms.push((n, a));
            }
        }
        Ok(Self::new(terms))
    }

    pub fn terms(&self) -> &[(i64, Complex)] {
        &self.terms
    }

    pub fn eval(&self, theta: f64) -> Complex {
        self.terms
            .iter()
            .map(|&(n, a)| a * Complex::from_polar(1.0, n as f64 * theta))
            .sum()
    }

    pub fn derivative(&self, theta: f64) -> Complex {
        self.terms
            .iter()
            .map(|&(n, a)| a * Complex::new(0.0, n as f64) * Complex::from_polar(1.0, n as f64 * theta))
            .sum()
    }

    /// Harmonic extension `Σ a_n r^{|n|} e^{inθ}`.
    pub fn harmonic_extension(&self, z: Complex) -> Complex {
        let (r, theta) = z.to_polar();
        self.terms
            .iter()
            .map(|&(n, a)| a * r.powi(n.unsigned_abs() as i32) * Complex::from_polar(1.0, n as f64 * theta))
            .sum()
    }

    /// Lipschitz constant in θ: `Σ |n||a_n|`.
    pub fn lipschitz(&self) -> f64 {
        self.terms.iter().map(|&(n, a)| n.unsigned_abs() as f64 * a.norm()).sum()
    }

    pub fn sup_bound(&self) -> f64 {
        self.terms.iter().map(|&(_, a)| a.norm()).sum()
    }
}

/// Function of `r = |z|` on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum RadialSymbol {
    /// `Σ c_k r^k`; `exact` holds the same coefficients as rationals when known.
    Polynomial {
        coeffs: Vec<f64>,
        exact: Option<Vec<BigRational>>,
    },
    /// Piecewise-linear interpolation of `(r_i, g_i)`, constant beyond the end samples.
    Sampled { radii: Vec<f64>, values: Vec<f64> },
}

impl RadialSymbol {
    /// Float coefficients; each is also read as its shortest decimal to keep an exact twin.
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Argument("radial polynomial needs at least one coefficient".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Argument("non-finite radial coefficient".into()));
        }
        let exact = coeffs.iter().map(|&c| rational_from_f64(c)).collect();
        Ok(RadialSymbol::Polynomial { coeffs, exact })
    }

    pub fn polynomial_exact(coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Argument("radial polynomial needs at least one coefficient".into()));
        }
        Ok(RadialSymbol::Polynomial {
            coeffs: coeffs.iter().map(to_f64).collect(),
            exact: Some(coeffs),
        })
    }

    pub fn sampled(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii.len() != values.len() {
            return Err(Error::Argument("radial samples: need equally many radii and values".into()));
        }
        if radii.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::Argument("radial samples must be finite".into()));
        }
        if radii[0] < 0.0 || *radii.last().unwrap() > 1.0 || radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument("sample radii must be strictly increasing in [0, 1]".into()));
        }
        Ok(RadialSymbol::Sampled { radii, values })
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(-DISC_TOLERANCE..=1.0 + DISC_TOLERANCE).contains(&r) || r.is_nan() {
            return Err(Error::Domain(format!("radius {r} outside [0, 1]")));
        }
        Ok(self.eval_unchecked(r.clamp(0.0, 1.0)))
    }

    pub(crate) fn eval_unchecked(&self, r: f64) -> f64 {
        match self {
            RadialSymbol::Polynomial { coeffs, .. } => coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c),
            RadialSymbol::Sampled { radii, values } => {
                let n = radii.len();
                if r <= radii[0] {
                    return values[0];
                }
                if r >= radii[n - 1] {
                    return values[n - 1];
                }
                let i = radii.partition_point(|&x| x <= r) - 1;
                let s = (r - radii[i]) / (radii[i + 1] - radii[i]);
                values[i] + s * (values[i + 1] - values[i])
            }
        }
    }

    pub fn coefficients(&self) -> Option<&[f64]> {
        match self {
            RadialSymbol::Polynomial { coeffs, .. } => Some(coeffs),
            RadialSymbol::Sampled { .. } => None,
        }
    }

    pub fn exact_coefficients(&self) -> Option<&[BigRational]> {
        match self {
            RadialSymbol::Polynomial { exact: Some(e), .. } => Some(e),
            _ => None,
        }
    }

    /// Lipschitz constant in `r` (hence in `z`): `Σ k|c_k|` for polynomials.
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            RadialSymbol::Polynomial { coeffs, .. } => {
                Some(coeffs.iter().enumerate().map(|(k, c)| k as f64 * c.abs()).sum())
            }
            RadialSymbol::Sampled { .. } => None,
        }
    }

    /// An upper bound for `sup |g|` on `[0, 1]`.
    pub fn sup_bound(&self) -> f64 {
        match self {
            RadialSymbol::Polynomial { coeffs, .. } => coeffs.iter().map(|c| c.abs()).sum(),
            RadialSymbol::Sampled { values, .. } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// True when some odd power of `r` appears, which is not smooth in `t = r²`.
    pub fn has_odd_powers(&self) -> bool {
        match self {
            RadialSymbol::Polynomial { coeffs, .. } => coeffs.iter().skip(1).step_by(2).any(|&c| c != 0.0),
            RadialSymbol::Sampled { .. } => true,
        }
    }

    pub fn degree(&self) -> Option<usize> {
        self.coefficients().map(|c| c.len() - 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Nearest,
    Bilinear,
}

/// Complex values on the nodes of a [`DiskGrid`], evaluated by a declared interpolation rule.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSymbol {
    grid: DiskGrid,
    values: Vec<Complex>,
    interpolation: Interpolation,
}

impl SampledSymbol {
    pub fn new(grid: DiskGrid, values: Vec<Complex>, interpolation: Interpolation) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Argument(format!(
                "sampled symbol has {} values for {} grid nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Argument("sampled symbol values must be finite".into()));
        }
        Ok(Self { grid, values, interpolation })
    }

    /// Samples `f` at every node of `grid`.
    pub fn from_fn(grid: DiskGrid, interpolation: Interpolation, f: impl Fn(Complex) -> Complex + Sync) -> Result<Self> {
        let values = (0..grid.len()).into_par_iter().map(|i| f(grid.node(i))).collect();
        Self::new(grid, values, interpolation)
    }

    pub fn grid(&self) -> &DiskGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex] {
        &self.values
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn eval(&self, z: Complex) -> Result<Complex> {
        check_on_closed_disc(z)?;
        Ok(self.eval_unchecked(z))
    }

    fn ring_value(&self, ring: usize, theta: f64) -> Complex {
        let count = self.grid.angular_counts()[ring];
        let base = self.grid.ring_offset(ring);
        if count == 1 {
            return self.values[base];
        }
        let pos = theta.rem_euclid(2.0 * PI) / (2.0 * PI) * count as f64;
        match self.interpolation {
            Interpolation::Nearest => self.values[base + (pos.round() as usize) % count],
            Interpolation::Bilinear => {
                let k = (pos.floor() as usize) % count;
                let s = pos - pos.floor();
                self.values[base + k] * (1.0 - s) + self.values[base + (k + 1) % count] * s
            }
        }
    }

    pub(crate) fn eval_unchecked(&self, z: Complex) -> Complex {
        let (r, theta) = z.to_polar();
        let radii = self.grid.radii();
        let last = radii.len() - 1;
        if r <= radii[0] {
            return self.ring_value(0, theta);
        }
        if r >= radii[last] {
            return self.ring_value(last, theta);
        }
        let i = radii.partition_point(|&x| x <= r) - 1;
        let s = (r - radii[i]) / (radii[i + 1] - radii[i]);
        match self.interpolation {
            Interpolation::Nearest => self.ring_value(if s < 0.5 { i } else { i + 1 }, theta),
            Interpolation::Bilinear => self.ring_value(i, theta) * (1.0 - s) + self.ring_value(i + 1, theta) * s,
        }
    }

    /// Sup of the interpolant, which is the largest sample modulus for both rules.
    pub fn max_modulus(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// Any symbol the toolkit can evaluate on the closed disc.
#[derive(Clone, Debug, PartialEq)]
pub enum Symbol {
    Harmonic(HarmonicPolynomial),
    Radial(RadialSymbol),
    Sampled(SampledSymbol),
}

impl From<HarmonicPolynomial> for Symbol {
    fn from(p: HarmonicPolynomial) -> Self {
        Symbol::Harmonic(p)
    }
}

impl From<RadialSymbol> for Symbol {
    fn from(g: RadialSymbol) -> Self {
        Symbol::Radial(g)
    }
}

impl From<SampledSymbol> for Symbol {
    fn from(s: SampledSymbol) -> Self {
        Symbol::Sampled(s)
    }
}

impl Symbol {
    pub fn eval(&self, z: Complex) -> Result<Complex> {
        check_on_closed_disc(z)?;
        Ok(self.eval_unchecked(z))
    }

    /// Evaluation without the domain check; callers guarantee `|z| ≤ 1`.
    pub(crate) fn eval_unchecked(&self, z: Complex) -> Complex {
        match self {
            Symbol::Harmonic(p) => p.eval_unchecked(z),
            Symbol::Radial(g) => Complex::new(g.eval_unchecked(z.norm().min(1.0)), 0.0),
            Symbol::Sampled(s) => s.eval_unchecked(z),
        }
    }

    /// Lipschitz constant on the closed disc, when one is known in closed form.
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            Symbol::Harmonic(p) => Some(p.lipschitz()),
            Symbol::Radial(g) => g.lipschitz(),
            Symbol::Sampled(_) => None,
        }
    }

    /// Highest angular frequency present (used to size angular quadrature).
    pub fn angular_degree(&self) -> usize {
        match self {
            Symbol::Harmonic(p) => p.degree() as usize,
            Symbol::Radial(_) => 0,
            Symbol::Sampled(s) => s.grid().angular_counts().iter().copied().max().unwrap_or(1) / 2,
        }
    }

    pub fn is_real_valued(&self) -> bool {
        match self {
            Symbol::Harmonic(p) => {
                *p == p.conjugate_swap()
                    || (p.analytic().is_empty() && p.coanalytic().is_empty() && p.p0().value().im == 0.0)
            }
            Symbol::Radial(_) => true,
            Symbol::Sampled(s) => s.values().iter().all(|v| v.im == 0.0),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Symbol::Harmonic(_) => "harmonic",
            Symbol::Radial(_) => "radial",
            Symbol::Sampled(_) => "sampled",
        }
    }
}

/// `lower ≤ ‖φ‖∞ ≤ upper`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
}

pub const MIN_SUP_RESOLUTION: usize = 8;

/// Brackets the sup norm on the closed disc by a grid maximum plus a Lipschitz slack.
///
/// Harmonic polynomials use `resolution + 1` rings `i/resolution` with `4·resolution`
/// angles each; every point of the disc is within `1/(2·res) + π/(4·res)` of a node.
/// Radial polynomials use the 1D grid `i/resolution`. Sampled symbols return the exact
/// maximum of their interpolant.
pub fn sup_norm(symbol: &Symbol, resolution: usize) -> Result<NormBracket> {
    if resolution < MIN_SUP_RESOLUTION {
        return Err(Error::Argument(format!("sup_norm resolution must be at least {MIN_SUP_RESOLUTION}")));
    }
    let res = resolution as f64;
    match symbol {
        Symbol::Harmonic(p) => {
            let angles = 4 * resolution;
            let lower = (0..=resolution)
                .into_par_iter()
                .map(|i| {
                    let r = i as f64 / res;
                    (0..angles)
                        .map(|k| p.eval_unchecked(Complex::from_polar(r, 2.0 * PI * k as f64 / angles as f64)).norm())
                        .fold(0.0, f64::max)
                })
                .reduce(|| 0.0, f64::max);
            let spacing = 0.5 / res + PI / angles as f64;
            Ok(NormBracket { lower, upper: lower + p.lipschitz() * spacing })
        }
        Symbol::Radial(g) => {
            let lower = (0..=resolution)
                .map(|i| g.eval_unchecked(i as f64 / res).abs())
                .fold(0.0, f64::max);
            let upper = match g.lipschitz() {
                Some(l) => lower + l * 0.5 / res,
                // Piecewise-linear profiles attain their sup at a sample.
                None => g.sup_bound(),
            };
            Ok(NormBracket { lower: lower.min(upper), upper })
        }
        Symbol::Sampled(s) => {
            let m = s.max_modulus();
            Ok(NormBracket { lower: m, upper: m })
        }
    }
}

/// Which decision branch a normalized polynomial falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormBranch {
    /// `p0 > 1`: invertible outright.
    ConstantDominant,
    /// `p0 = 1`: invertibility decided by the boundary angle system.
    BoundaryCritical,
}

/// Outcome of the normalization check for harmonic polynomials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizedFormReport {
    pub exact: bool,
    pub p0_real: bool,
    pub p0_at_least_one: bool,
    pub has_terms: bool,
    pub coefficients_nonzero: bool,
    pub modulus_sum: f64,
    pub modulus_sum_exact: Option<String>,
    pub sum_is_one: bool,
    pub branch: Option<FormBranch>,
    pub pass: bool,
    pub failures: Vec<String>,
}

/// Checks `p0` real with `p0 ≥ 1`, nonzero coefficients and `Σ|p_m| + Σ|q_n| = 1`.
///
/// Runs in exact rational arithmetic when `p0` and every coefficient modulus are exact,
/// otherwise in floating point with tolerance [`FLOAT_FORM_TOLERANCE`].
pub fn check_normalized_form(p: &HarmonicPolynomial) -> NormalizedFormReport {
    let exact_p0 = p.p0().exact_real();
    let exact_sum = p.exact_modulus_sum();
    let exact = exact_p0.is_some() && exact_sum.is_some();
    let mut failures = Vec::new();

    let has_terms = !(p.analytic().is_empty() && p.coanalytic().is_empty());
    if !has_terms {
        failures.push("no analytic or coanalytic terms".to_string());
    }
    // Constructors reject zero coefficients; the flag is kept for the report.
    let coefficients_nonzero = p.analytic().iter().chain(p.coanalytic()).all(|t| !t.coef.is_zero());

    let (p0_real, p0_at_least_one, p0_above_one, sum_is_one) = if exact {
        let p0 = exact_p0.as_ref().unwrap();
        let one = BigRational::one();
        (true, *p0 >= one, *p0 > one, *exact_sum.as_ref().unwrap() == one)
    } else {
        let v = p.p0().value();
        let tol = FLOAT_FORM_TOLERANCE;
        (
            v.im.abs() <= tol,
            v.re >= 1.0 - tol,
            v.re > 1.0 + tol,
            (p.modulus_sum() - 1.0).abs() <= tol,
        )
    };
    if !p0_real {
        failures.push("p0 is not real".to_string());
    }
    if !p0_at_least_one {
        failures.push("p0 < 1".to_string());
    }
    if !sum_is_one {
        failures.push(format!("coefficient modulus sum is {} (must be 1)", p.modulus_sum()));
    }
    let pass = failures.is_empty() && coefficients_nonzero;
    let branch = pass.then_some(if p0_above_one {
        FormBranch::ConstantDominant
    } else {
        FormBranch::BoundaryCritical
    });
    NormalizedFormReport {
        exact,
        p0_real,
        p0_at_least_one,
        has_terms,
        coefficients_nonzero,
        modulus_sum: p.modulus_sum(),
        modulus_sum_exact: exact_sum.as_ref().map(exact::format_rational),
        sum_is_one,
        branch,
        pass,
        failures,
    }
}
