//! Invertibility decisions: the angle system for normalized harmonic polynomials, the
//! boundary criterion, the iterated-Berezin criterion and the Fredholm boundary check.

use std::f64::consts::PI;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

use crate::berezin::{iterate_berezin, BoundaryData, GridField, QuadratureSpec};
use crate::error::{Error, Result};
use crate::exact::{self, format_rational, half_integer, rational, reduce_mod_two, to_f64};
use crate::geometry::{parabolic_margin, DiskGrid, ParabolicMode};
use crate::point::Point;
use crate::symbols::{check_normalized_form, Complex, FormBranch, HarmonicPolynomial, SampledSymbol, Symbol, TrigPolynomial};

/// A boundary value at or below this modulus counts as a zero.
pub const ZERO_THRESHOLD: f64 = 1e-10;
/// Boundary nodes with parabolic margin below `−HYPOTHESIS_TOL` violate the hypothesis.
pub const HYPOTHESIS_TOL: f64 = 1e-12;
const MIN_BOUNDARY_NODES: usize = 4096;
const MAX_REFINED_MINIMA: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Invertible,
    NotInvertible,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float { tol: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexedInteger {
    pub power: u32,
    pub value: i64,
}

/// Root angle `λ` with `P(e^{iλ}) = 0` and the integers of the angle system.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub lambda: f64,
    /// `λ/π`, as a reduced fraction in exact mode.
    pub lambda_over_pi: String,
    /// `k_m` with `mλ + arg p_m = π + 2πk_m`.
    pub k: Vec<IndexedInteger>,
    /// `ℓ_n` with `−nλ + arg q_n = π + 2πℓ_n`.
    pub l: Vec<IndexedInteger>,
    /// `|P(e^{iλ})|` evaluated in floating point.
    pub modulus: f64,
}

/// One candidate angle and the residual of every constraint at it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Candidate {
    pub lambda_over_pi: String,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub status: CandidateStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateStatus {
    Solves,
    Fails,
    /// Some residual sits in the buffer zone `(tol, 10·tol]`.
    Borderline,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    /// Which rule produced the outcome.
    pub basis: String,
    pub mode: Option<Mode>,
    pub witness: Option<Witness>,
    pub candidates: Vec<Candidate>,
    /// Criterion-specific margin (minimum boundary modulus, parabolic margin, ...).
    pub margin: Option<f64>,
    pub location: Option<Point>,
    pub notes: Vec<String>,
}

impl Verdict {
    fn new(outcome: Outcome, basis: impl Into<String>) -> Self {
        Self {
            outcome,
            basis: basis.into(),
            mode: None,
            witness: None,
            candidates: Vec::new(),
            margin: None,
            location: None,
            notes: Vec::new(),
        }
    }
}

/// Informational note for `p0 ≥ 1` with coefficient-modulus sum below 1: then
/// `|1 − P| < 1` on the closed disc and `T_P` is invertible by a Neumann series, but the
/// polynomial is outside the normalized class and the decision procedure does not apply.
pub fn subnormalized_note(p: &HarmonicPolynomial) -> Option<String> {
    let p0 = p.p0().value();
    let sum = match p.exact_modulus_sum() {
        Some(s) if p.p0().exact_real().is_some() => to_f64(&s),
        _ => p.modulus_sum(),
    };
    let below = match (p.exact_modulus_sum(), p.p0().exact_real()) {
        (Some(s), Some(c)) => s < BigRational::one() && c >= BigRational::one() && c - BigRational::one() + s.clone() < BigRational::one(),
        _ => p0.im == 0.0 && p0.re >= 1.0 && (p0.re - 1.0) + sum < 1.0,
    };
    below.then(|| {
        format!(
            "coefficient modulus sum {sum} < 1 with |1 - p0| + sum < 1: |1 - P| < 1 on the closed disc, \
             so T_P is invertible by a Neumann series; the polynomial is not normalized"
        )
    })
}

/// Argument of a coefficient as a multiple of π.
enum Angle {
    Exact(BigRational),
    Float(f64),
}

struct Constraint {
    power: u32,
    analytic: bool,
    arg: Angle,
}

fn float_arg(c: &crate::symbols::Coefficient) -> f64 {
    match c.polar() {
        Some(p) => to_f64(p.arg_over_pi()),
        None => {
            let v = c.value();
            (v.im.atan2(v.re) / PI).rem_euclid(2.0)
        }
    }
}

/// Decides invertibility of `T_P` for a normalized harmonic polynomial.
///
/// `p0 > 1` gives invertibility outright. For `p0 = 1` the operator fails to be
/// invertible exactly when one `λ` solves `mλ + arg p_m ≡ π` for every analytic power and
/// `−nλ + arg q_n ≡ π` for every coanalytic power (mod 2π). Candidates come from the
/// smallest analytic power (the smallest coanalytic one when there are no analytic terms).
pub fn decide_invertibility(p: &HarmonicPolynomial, mode: Mode) -> Result<Verdict> {
    let form = check_normalized_form(p);
    if !form.pass {
        return Err(Error::NotNormalized(form.failures.join("; ")));
    }
    if let Mode::Float { tol } = mode {
        if !(tol > 0.0 && tol < 0.05) {
            return Err(Error::Argument(format!("float tolerance {tol} outside (0, 0.05)")));
        }
    }
    if form.branch == Some(FormBranch::ConstantDominant) {
        let mut v = Verdict::new(Outcome::Invertible, "constant term exceeds 1");
        v.mode = Some(mode);
        return Ok(v);
    }

    let exact_mode = matches!(mode, Mode::Exact);
    let mut constraints = Vec::new();
    for (terms, analytic) in [(p.analytic(), true), (p.coanalytic(), false)] {
        for t in terms {
            let arg = if exact_mode {
                let polar = t.coef.polar().ok_or_else(|| {
                    Error::Argument(format!(
                        "exact mode needs polar coefficients; the {} term of power {} has none",
                        if analytic { "analytic" } else { "coanalytic" },
                        t.power
                    ))
                })?;
                Angle::Exact(polar.arg_over_pi().clone())
            } else {
                Angle::Float(float_arg(&t.coef))
            };
            constraints.push(Constraint { power: t.power, analytic, arg });
        }
    }

    let mut verdict = match mode {
        Mode::Exact => decide_exact(p, &constraints),
        Mode::Float { tol } => decide_float(p, &constraints, tol),
    };
    verdict.mode = Some(mode);
    if p.analytic().is_empty() {
        verdict.notes.push("no analytic terms: candidates taken from the smallest coanalytic power".into());
    }
    Ok(verdict)
}

/// Index of the constraint that generates candidates.
fn pivot(constraints: &[Constraint]) -> usize {
    constraints.iter().position(|c| c.analytic).unwrap_or(0)
}

fn decide_exact(p: &HarmonicPolynomial, constraints: &[Constraint]) -> Verdict {
    let piv = &constraints[pivot(constraints)];
    let m = piv.power as i64;
    let Angle::Exact(a) = &piv.arg else { unreachable!("exact mode stores exact angles") };
    let mut candidates = Vec::new();
    let mut witness = None;
    for k in 0..m {
        // mΛ + a ≡ 1 → Λ = (1 − a + 2k)/m;  −nΛ + b ≡ 1 → Λ = (b − 1 + 2k)/n.
        let numer = if piv.analytic {
            BigRational::one() - a + rational(2 * k, 1)
        } else {
            a - BigRational::one() + rational(2 * k, 1)
        };
        let lam = reduce_mod_two(&(numer / rational(m, 1)));
        let offsets: Vec<BigRational> = constraints.iter().map(|c| constraint_offset(c, &lam)).collect();
        let residuals: Vec<f64> = offsets.iter().map(|o| float_distance(&(o / rational(2, 1)))).collect();
        let solves = offsets.iter().all(exact::is_even_integer);
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        candidates.push(Candidate {
            lambda_over_pi: format_rational(&lam),
            residuals,
            max_residual,
            status: if solves { CandidateStatus::Solves } else { CandidateStatus::Fails },
        });
        if solves && witness.is_none() {
            let mut k_list = Vec::new();
            let mut l_list = Vec::new();
            for (c, o) in constraints.iter().zip(&offsets) {
                let entry = IndexedInteger { power: c.power, value: half_integer(o).unwrap_or(i64::MAX) };
                if c.analytic { k_list.push(entry) } else { l_list.push(entry) }
            }
            let lambda = PI * to_f64(&lam);
            witness = Some(Witness {
                lambda,
                lambda_over_pi: format_rational(&lam),
                k: k_list,
                l: l_list,
                modulus: boundary_modulus(p, &lam),
            });
        }
    }
    let mut v = match witness {
        Some(w) => {
            let mut v = Verdict::new(Outcome::NotInvertible, "angle system solvable: boundary zero");
            v.location = Some(Complex::from_polar(1.0, w.lambda).into());
            v.margin = Some(w.modulus);
            v.witness = Some(w);
            v
        }
        None => Verdict::new(Outcome::Invertible, "angle system has no solution"),
    };
    v.candidates = candidates;
    v
}

/// `mΛ + a − 1` (analytic) or `−nΛ + b − 1` (coanalytic), in units of π.
fn constraint_offset(c: &Constraint, lam: &BigRational) -> BigRational {
    let Angle::Exact(arg) = &c.arg else { unreachable!("exact mode stores exact angles") };
    let n = rational(c.power as i64, 1);
    let turn = if c.analytic { n * lam } else { -(n * lam) };
    turn + arg - BigRational::one()
}

/// Distance of a rational to the nearest integer, as a float.
fn float_distance(q: &BigRational) -> f64 {
    let nearest = q.round();
    to_f64(&(q - nearest).abs())
}

/// `|P(e^{iπΛ})|`, with the angle built exactly for axis directions.
fn boundary_modulus(p: &HarmonicPolynomial, lam: &BigRational) -> f64 {
    let z = crate::symbols::cis_pi(to_f64(lam));
    p.eval_unchecked(z).norm()
}

fn decide_float(p: &HarmonicPolynomial, constraints: &[Constraint], tol: f64) -> Verdict {
    let piv = &constraints[pivot(constraints)];
    let m = piv.power as f64;
    let Angle::Float(a) = piv.arg else { unreachable!("float mode stores float angles") };
    let mut candidates = Vec::new();
    let mut survivors = Vec::new();
    let mut borderline = false;
    for k in 0..piv.power {
        let numer = if piv.analytic { 1.0 - a + 2.0 * k as f64 } else { a - 1.0 + 2.0 * k as f64 };
        let lam = (numer / m).rem_euclid(2.0);
        let offsets: Vec<f64> = constraints
            .iter()
            .map(|c| {
                let Angle::Float(arg) = c.arg else { unreachable!("float mode stores float angles") };
                let turn = c.power as f64 * lam;
                (if c.analytic { turn } else { -turn }) + arg - 1.0
            })
            .collect();
        let residuals: Vec<f64> = offsets.iter().map(|o| (o / 2.0 - (o / 2.0).round()).abs()).collect();
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        let status = if max_residual <= tol {
            CandidateStatus::Solves
        } else if max_residual > 10.0 * tol {
            CandidateStatus::Fails
        } else {
            CandidateStatus::Borderline
        };
        match status {
            CandidateStatus::Solves => survivors.push((lam, offsets)),
            CandidateStatus::Borderline => borderline = true,
            CandidateStatus::Fails => {}
        }
        candidates.push(Candidate { lambda_over_pi: format!("{lam}"), residuals, max_residual, status });
    }

    let mut v = if let Some((lam, offsets)) = survivors.first() {
        let lambda = PI * lam;
        let modulus = p.eval_unchecked(Complex::from_polar(1.0, lambda)).norm();
        let mut k_list = Vec::new();
        let mut l_list = Vec::new();
        for (c, o) in constraints.iter().zip(offsets) {
            let entry = IndexedInteger { power: c.power, value: (o / 2.0).round().to_i64().unwrap_or(i64::MAX) };
            if c.analytic { k_list.push(entry) } else { l_list.push(entry) }
        }
        let witness = Witness { lambda, lambda_over_pi: format!("{lam}"), k: k_list, l: l_list, modulus };
        let mut v = if modulus < ZERO_THRESHOLD {
            Verdict::new(Outcome::NotInvertible, "angle system solvable within tolerance: boundary zero")
        } else {
            let mut v = Verdict::new(Outcome::Inconclusive, "angle system solvable within tolerance but the witness is not a zero");
            v.notes.push(format!("|P(e^(i lambda))| = {modulus:e} exceeds {ZERO_THRESHOLD:e}"));
            v
        };
        v.location = Some(Complex::from_polar(1.0, lambda).into());
        v.margin = Some(modulus);
        v.witness = Some(witness);
        v
    } else if borderline {
        let mut v = Verdict::new(Outcome::Inconclusive, "candidate residual inside the (tol, 10 tol] buffer");
        v.notes.push("lower the tolerance or use exact mode".into());
        v
    } else {
        Verdict::new(Outcome::Invertible, "angle system has no solution within tolerance")
    };
    v.candidates = candidates;
    v
}

/// Outcome of scanning a boundary function for zeros.
struct BoundaryScan {
    min_modulus: f64,
    argmin: f64,
    slack: f64,
    zero: Option<f64>,
    /// Smallest refined modulus among the suspicious local minima.
    refined_min: f64,
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-16 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

fn scan_boundary(g: &TrigPolynomial) -> BoundaryScan {
    let degree = g.terms().iter().map(|&(n, _)| n.unsigned_abs() as usize).max().unwrap_or(0);
    let nodes = MIN_BOUNDARY_NODES.max(64 * (degree + 1));
    let step = 2.0 * PI / nodes as f64;
    let values: Vec<f64> = (0..nodes).map(|k| g.eval(k as f64 * step).norm()).collect();
    let (idx, &min_modulus) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least one node");
    // Every angle is within step/2 of a node.
    let slack = g.lipschitz() * step / 2.0;
    let mut scan = BoundaryScan { min_modulus, argmin: idx as f64 * step, slack, zero: None, refined_min: min_modulus };
    if min_modulus > slack {
        return scan;
    }
    let mut suspects: Vec<usize> = (0..nodes)
        .filter(|&k| {
            let prev = values[(k + nodes - 1) % nodes];
            let next = values[(k + 1) % nodes];
            values[k] <= slack && values[k] <= prev && values[k] <= next
        })
        .collect();
    suspects.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    suspects.truncate(MAX_REFINED_MINIMA);
    for k in suspects {
        let centre = k as f64 * step;
        let (theta, m) = golden_min(|t| g.eval(t).norm(), centre - step, centre + step);
        if m < scan.refined_min {
            scan.refined_min = m;
            scan.argmin = theta;
        }
        if m <= ZERO_THRESHOLD && scan.zero.is_none() {
            scan.zero = Some(theta.rem_euclid(2.0 * PI));
        }
    }
    scan
}

fn scan_verdict(scan: BoundaryScan, basis_ok: &str, basis_zero: &str) -> Verdict {
    if scan.min_modulus > scan.slack {
        let mut v = Verdict::new(Outcome::Invertible, basis_ok);
        v.margin = Some(scan.min_modulus - scan.slack);
        v.location = Some(Complex::from_polar(1.0, scan.argmin).into());
        return v;
    }
    match scan.zero {
        Some(theta) => {
            let mut v = Verdict::new(Outcome::NotInvertible, basis_zero);
            v.margin = Some(scan.refined_min);
            v.location = Some(Complex::from_polar(1.0, theta).into());
            v.witness = Some(Witness {
                lambda: theta,
                lambda_over_pi: format!("{}", theta / PI),
                k: Vec::new(),
                l: Vec::new(),
                modulus: scan.refined_min,
            });
            v
        }
        None => {
            let mut v = Verdict::new(Outcome::Inconclusive, "boundary minimum below the Lipschitz slack without a located zero");
            v.margin = Some(scan.refined_min);
            v.location = Some(Complex::from_polar(1.0, scan.argmin).into());
            v.notes.push(format!("grid minimum {:e}, slack {:e}", scan.min_modulus, scan.slack));
            v
        }
    }
}

/// Decides invertibility of the Toeplitz operator whose symbol is the Poisson extension
/// of `g`, assuming `Re g ≥ (Im g)²` on the circle: invertible exactly when `g` has no zero.
pub fn boundary_criterion(g: &BoundaryData) -> Result<Verdict> {
    let trig = g.to_trig()?;
    let degree = trig.terms().iter().map(|&(n, _)| n.unsigned_abs() as usize).max().unwrap_or(0);
    let nodes = MIN_BOUNDARY_NODES.max(64 * (degree + 1));
    let worst = (0..nodes)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / nodes as f64;
            (theta, ParabolicMode::Quadratic.margin(trig.eval(theta), 1.0))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one node");
    if worst.1 < -HYPOTHESIS_TOL {
        return Err(Error::Hypothesis(format!(
            "Re g >= (Im g)^2 fails at theta = {} (margin {:e})",
            worst.0, worst.1
        )));
    }
    let mut v = scan_verdict(scan_boundary(&trig), "boundary values stay away from zero", "boundary zero located");
    v.notes.push(format!("boundary parabolic margin {:e}", worst.1));
    Ok(v)
}

/// Grid check of the iterated-Berezin hypotheses: `|Bφ| ≥ δ` and
/// `Re Bⁿφ ≥ δ (Im Bⁿφ)²` at every node. Success is evidence for invertibility of the
/// Toeplitz operator with symbol `Bⁿφ`.
pub fn iterated_berezin_criterion(phi: &SampledSymbol, n: usize, delta: f64, spec: &QuadratureSpec) -> Result<Verdict> {
    if n == 0 {
        return Err(Error::Argument("the iterate count must be at least 1".into()));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Argument(format!("delta {delta} outside (0, 1]")));
    }
    let field = GridField::new(phi.grid().clone(), phi.values().to_vec())?;
    let first = iterate_berezin(&field, 1, spec)?;
    let (idx, min_mod) = first
        .values()
        .iter()
        .map(|v| v.norm())
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty grid");
    if min_mod < delta {
        let mut v = Verdict::new(Outcome::Inconclusive, "|B(phi)| falls below delta on the grid");
        v.margin = Some(min_mod - delta);
        v.location = Some(phi.grid().node(idx).into());
        return Ok(v);
    }
    let nth = if n == 1 { first } else { iterate_berezin(&field, n, spec)? };
    let (idx, margin) = nth
        .values()
        .iter()
        .map(|&v| ParabolicMode::Quadratic.margin(v, delta))
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty grid");
    let location = Some(phi.grid().node(idx).into());
    if margin < 0.0 {
        let mut v = Verdict::new(Outcome::Inconclusive, "parabolic condition for the iterate fails on the grid");
        v.margin = Some(margin);
        v.location = location;
        return Ok(v);
    }
    let mut v = Verdict::new(Outcome::Invertible, "iterated-Berezin hypotheses hold on the grid");
    v.margin = Some(margin);
    v.location = location;
    v.notes.push(format!("min |B(phi)| = {min_mod}; grid-based evidence, not a certificate"));
    Ok(v)
}

/// `|1 − p0| + Σ|p_m| + Σ|q_n| ≤ 1` gives `|1 − φ| ≤ 1`, hence `Re φ ≥ |φ|²/2`.
fn disc_certificate(p: &HarmonicPolynomial) -> bool {
    match (p.p0().exact_real(), p.exact_modulus_sum()) {
        (Some(c), Some(s)) => (BigRational::one() - c).abs() + s <= BigRational::one(),
        _ => (Complex::new(1.0, 0.0) - p.p0().value()).norm() + p.modulus_sum() <= 1.0 + 1e-12,
    }
}

/// For a symbol satisfying the parabolic condition, invertibility is equivalent to the
/// absence of boundary zeros. The hypothesis is certified for polynomials (Lipschitz
/// margin at δ = 1 or 1/2, or the coefficient disc bound) and taken on grid evidence for
/// sampled symbols; the boundary is then scanned for zeros.
pub fn fredholm_equiv_check(symbol: &Symbol, grid: &DiskGrid) -> Result<Verdict> {
    let mut notes = Vec::new();
    let hypothesis = match symbol {
        Symbol::Harmonic(p) if disc_certificate(p) => {
            notes.push("parabolic condition with delta = 1/2 from |1 - p0| + sum |coef| <= 1".to_string());
            true
        }
        _ => {
            let strict = parabolic_margin(symbol, 1.0, grid, ParabolicMode::Quadratic)?;
            let relaxed = parabolic_margin(symbol, 0.5, grid, ParabolicMode::Quadratic)?;
            match symbol {
                Symbol::Sampled(_) => {
                    let ok = strict.min_margin >= 0.0 || relaxed.min_margin >= 0.0;
                    if ok {
                        notes.push("parabolic condition on grid evidence only (sampled symbol)".to_string());
                    }
                    ok
                }
                _ if strict.certified => {
                    notes.push("parabolic condition certified with delta = 1".to_string());
                    true
                }
                _ if relaxed.certified => {
                    notes.push("parabolic condition certified with delta = 1/2".to_string());
                    true
                }
                _ => false,
            }
        }
    };
    if !hypothesis {
        return Err(Error::Hypothesis("parabolic condition could not be established".into()));
    }
    let trig = match symbol {
        Symbol::Harmonic(p) => p.boundary_trig(),
        Symbol::Radial(g) => TrigPolynomial::new(vec![(0, Complex::new(g.eval(1.0)?, 0.0))]),
        Symbol::Sampled(s) => {
            let ring = s.grid().radii().len() - 1;
            let count = s.grid().angular_counts()[ring];
            let start = s.grid().ring_offset(ring);
            TrigPolynomial::from_samples(&s.values()[start..start + count])?
        }
    };
    let mut v = scan_verdict(
        scan_boundary(&trig),
        "boundary values stay away from zero: Berezin transform invertible",
        "boundary zero: not Fredholm, hence not invertible",
    );
    if matches!(symbol, Symbol::Sampled(_)) {
        notes.push("boundary taken from the outermost ring of the sampled grid".to_string());
    }
    v.notes.extend(notes);
    Ok(v)
}
