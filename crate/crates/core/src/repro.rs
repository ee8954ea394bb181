//! Reproduction suite: recomputes the worked examples and reports one row per check.

use std::f64::consts::PI;

use serde::Serialize;

use crate::berezin::{berezin_monomial_series, berezin_quad_fn, berezin_radial_series, QuadratureSpec, RadialMoments};
use crate::douglas::{decide_invertibility, Mode, Outcome};
use crate::error::Result;
use crate::exact::{format_float as f, format_rational, rational};
use crate::geometry::{parabolic_margin, pseudohyperbolic_disc, DiskGrid, ParabolicMode};
use crate::symbols::{Coefficient, Complex, HarmonicPolynomial, PolarCoefficient, RadialSymbol, Symbol, Term};
use crate::toeplitz::{matrix_harmonic, matrix_quadrature, matrix_radial, neumann_certificate, neumann_certificate_at, radial_eigenvalues};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReproCheck {
    pub id: String,
    /// What is being reproduced.
    pub context: String,
    pub expected: String,
    pub computed: String,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReproReport {
    pub checks: Vec<ReproCheck>,
    pub pass: bool,
}

impl ReproReport {
    fn new(checks: Vec<ReproCheck>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self { checks, pass }
    }
}

/// Report text for a number or a message.
struct Cell(String);

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell(f(x))
    }
}

impl From<i32> for Cell {
    fn from(x: i32) -> Self {
        Cell(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell(s.into())
    }
}

impl From<&String> for Cell {
    fn from(s: &String) -> Self {
        Cell(s.clone())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell(s)
    }
}

struct Rows(Vec<ReproCheck>);

impl Rows {
    fn push(&mut self, id: &str, context: &str, expected: impl Into<Cell>, computed: impl Into<Cell>, tolerance: Option<f64>, pass: bool) {
        self.0.push(ReproCheck {
            id: id.into(),
            context: context.into(),
            expected: expected.into().0,
            computed: computed.into().0,
            tolerance,
            pass,
        });
    }

    /// Row for a failed computation: the error becomes the computed value.
    fn error(&mut self, id: &str, context: &str, expected: impl Into<Cell>, err: crate::Error) {
        self.push(id, context, expected, format!("error: {err}"), None, false);
    }
}

fn polar(m: (i64, i64), a: (i64, i64)) -> Coefficient {
    Coefficient::from_polar(PolarCoefficient::new(rational(m.0, m.1), rational(a.0, a.1)).expect("nonnegative modulus"))
}

/// `1 + (2/3) z^m + (1/3) z̄^n`.
pub fn angle_example(m: u32, n: u32) -> HarmonicPolynomial {
    HarmonicPolynomial::new(
        Coefficient::from_rational(rational(1, 1)),
        vec![Term::new(m, polar((2, 3), (0, 1)))],
        vec![Term::new(n, polar((1, 3), (0, 1)))],
    )
    .expect("valid polynomial")
}

/// `2 + z/2 + z̄²/2`.
pub fn parabolic_example() -> HarmonicPolynomial {
    HarmonicPolynomial::new(
        Coefficient::from_rational(rational(2, 1)),
        vec![Term::new(1, polar((1, 2), (0, 1)))],
        vec![Term::new(2, polar((1, 2), (0, 1)))],
    )
    .expect("valid polynomial")
}

/// `|z|² − 3/2 |z| + 1`.
pub fn counterexample() -> RadialSymbol {
    RadialSymbol::polynomial_exact(vec![rational(1, 1), rational(-3, 2), rational(1, 1)]).expect("nonempty")
}

fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::Invertible => "invertible",
        Outcome::NotInvertible => "not_invertible",
        Outcome::Inconclusive => "inconclusive",
    }
}

fn counterexample_rows(rows: &mut Rows) {
    let g = counterexample();
    let ev = radial_eigenvalues(&g, 3);
    let exact = ev.exact.as_ref().map(|e| format_rational(&e[2])).unwrap_or_default();
    rows.push("lambda2", "eigenvalue of the radial counterexample on e_2", "13/28", &exact, None, exact == "13/28");

    match matrix_quadrature(&Symbol::Radial(g.clone()), 3, &QuadratureSpec::default()) {
        Ok(t) => {
            let v = t.entries()[(2, 2)].re;
            let err = (v - 13.0 / 28.0).abs();
            rows.push("lambda2-quadrature", "same eigenvalue by tensor quadrature", 13.0 / 28.0, v, Some(1e-10), err <= 1e-10);
        }
        Err(e) => rows.error("lambda2-quadrature", "same eigenvalue by tensor quadrature", 13.0 / 28.0, e),
    }

    let lambda2 = 13.0 / 28.0;
    let moments = RadialMoments::from_symbol(&g, 1 << 16);
    let mut min = f64::INFINITY;
    let mut at = 0.0;
    let mut failure = None;
    for i in 1..=200 {
        let r = 0.999 * i as f64 / 200.0;
        match berezin_radial_series(&moments, Complex::new(r, 0.0), 1e-13) {
            Ok(s) if s.value.re - s.tail_bound < min => {
                min = s.value.re - s.tail_bound;
                at = r;
            }
            Ok(_) => {}
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    let context = "Berezin transform of the counterexample stays above 13/28 on 200 radii up to 0.999";
    match failure {
        None => rows.push(
            "berezin-gap",
            context,
            format!("> {lambda2}"),
            format!("min {} at r = {at} (margin {})", f(min), f(min - lambda2)),
            None,
            min > lambda2,
        ),
        Some(e) => rows.error("berezin-gap", context, format!("> {lambda2}"), e),
    }

    let shifted = RadialSymbol::polynomial_exact(vec![rational(15, 28), rational(-3, 2), rational(1, 1)]).expect("nonempty");
    let context = "smallest singular value of the 16x16 section for the counterexample minus 13/28";
    match matrix_radial(&shifted, 16).and_then(|t| t.singular_extremes()) {
        Ok((smin, _)) => rows.push("sigma-min-tq", context, "< 1e-12", smin, Some(1e-12), smin < 1e-12),
        Err(e) => rows.error("sigma-min-tq", context, "< 1e-12", e),
    }
}

fn decision_rows(rows: &mut Rows) {
    let r = angle_example(3, 3);
    let q = angle_example(2, 3);
    for (mode, tag) in [(Mode::Exact, "exact"), (Mode::Float { tol: 1e-9 }, "float")] {
        let context = format!("1 + (2/3)z^3 + (1/3)conj(z)^3 is not invertible ({tag} mode)");
        match decide_invertibility(&r, mode) {
            Ok(v) => {
                let lambda = v.witness.as_ref().map(|w| w.lambda).unwrap_or(f64::NAN);
                let ok = v.outcome == Outcome::NotInvertible && (lambda - PI / 3.0).abs() < 1e-12;
                rows.push(
                    &format!("example-a-{tag}"),
                    &context,
                    "not_invertible, lambda = pi/3",
                    format!("{}, lambda = {}", outcome_name(v.outcome), f(lambda)),
                    None,
                    ok,
                );
            }
            Err(e) => rows.error(&format!("example-a-{tag}"), &context, "not_invertible", e),
        }
        let context = format!("1 + (2/3)z^2 + (1/3)conj(z)^3 is invertible ({tag} mode)");
        match decide_invertibility(&q, mode) {
            Ok(v) => rows.push(
                &format!("example-b-{tag}"),
                &context,
                "invertible",
                outcome_name(v.outcome),
                None,
                v.outcome == Outcome::Invertible,
            ),
            Err(e) => rows.error(&format!("example-b-{tag}"), &context, "invertible", e),
        }
    }
    let modulus = r.eval_unchecked(Complex::from_polar(1.0, PI / 3.0)).norm();
    rows.push(
        "example-a-witness",
        "|R(e^{i pi/3})| vanishes",
        0,
        modulus,
        Some(1e-12),
        modulus <= 1e-12,
    );
}

fn parabolic_rows(rows: &mut Rows) {
    let p = parabolic_example();
    let sym = Symbol::Harmonic(p.clone());
    let angles = 100_000;
    let (theta, min) = (0..angles)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / angles as f64;
            (t, p.eval_unchecked(Complex::from_polar(1.0, t)).re)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    let x = theta.cos();
    rows.push(
        "boundary-min-reP",
        "minimum of Re P on the circle for P = 2 + z/2 + conj(z)^2/2",
        "23/16 at x = -1/4",
        format!("{} at x = {}", f(min), f(x)),
        Some(1e-6),
        (min - 23.0 / 16.0).abs() <= 1e-6 && (x + 0.25).abs() <= 1e-4,
    );

    let grid = DiskGrid::default_grid();
    let context = "Re P >= (Im P)^2 certified on the closed disc by a Lipschitz margin";
    match parabolic_margin(&sym, 1.0, &grid, ParabolicMode::Quadratic) {
        Ok(m) => rows.push(
            "parabolic-certified",
            context,
            ">= 0 after slack",
            format!("margin {} slack {}", f(m.min_margin), f(m.lipschitz_slack.unwrap_or(f64::NAN))),
            None,
            m.certified,
        ),
        Err(e) => rows.error("parabolic-certified", context, ">= 0", e),
    }

    let context = "Neumann certificate for T_P";
    let cert = match neumann_certificate(&sym, &grid) {
        Ok(outcome) => outcome.certificate().cloned(),
        Err(e) => {
            rows.error("neumann-bound", context, "<= 1", e);
            return;
        }
    };
    match &cert {
        Some(c) => rows.push(
            "neumann-bound",
            context,
            "<= 1",
            format!("inverse norm bound {} (q = {})", f(c.inverse_norm_bound), f(c.q)),
            None,
            c.inverse_norm_bound <= 1.0,
        ),
        None => rows.push("neumann-bound", context, "<= 1", "refused", None, false),
    }

    let context = "sections of T_{P/6} keep sigma_min >= 1 - q";
    let scaled = match neumann_certificate_at(&sym, 1.0 / 6.0, &grid).map(|o| o.certificate().cloned()) {
        Ok(Some(c)) => c,
        Ok(None) => {
            rows.push("compression-soundness", context, "certified q < 1", "refused", None, false);
            return;
        }
        Err(e) => {
            rows.error("compression-soundness", context, "certified q < 1", e);
            return;
        }
    };
    let mut worst = f64::INFINITY;
    for n in [8, 16, 32, 64] {
        match matrix_harmonic(&p, n).and_then(|t| t.singular_extremes()) {
            Ok((smin, _)) => worst = worst.min(smin / 6.0),
            Err(e) => {
                rows.error("compression-soundness", context, 1.0 - scaled.q, e);
                return;
            }
        }
    }
    rows.push(
        "compression-soundness",
        context,
        format!(">= {}", f(1.0 - scaled.q)),
        format!("min sigma_min over N in {{8,16,32,64}} = {}", f(worst)),
        Some(1e-8),
        worst >= 1.0 - scaled.q - 1e-8,
    );
}

fn berezin_rows(rows: &mut Rows) {
    let spec = QuadratureSpec::with_tol(1e-12);
    let z = Complex::new(0.3, -0.55);
    let mut worst: f64 = 0.0;
    let mut failed = None;
    'outer: for a in 0..=4u32 {
        for b in 0..=4u32 {
            let series = berezin_monomial_series(a, b, z, 1e-14);
            let quad = berezin_quad_fn(|w| w.powu(a) * w.conj().powu(b), z, (a + b) as usize, 0, &spec);
            match (series, quad) {
                (Ok(s), Ok(q)) => worst = worst.max((s.value - q.value).norm()),
                (Err(e), _) | (_, Err(e)) => {
                    failed = Some(e);
                    break 'outer;
                }
            }
        }
    }
    let context = "series and quadrature routes agree on monomials of bidegree <= 4";
    match failed {
        None => rows.push("berezin-routes", context, "<= 1e-8", worst, Some(1e-8), worst <= 1e-8),
        Some(e) => rows.error("berezin-routes", context, "<= 1e-8", e),
    }

    let p = parabolic_example();
    let context = "closed-form and quadrature sections agree (N = 32)";
    match (matrix_harmonic(&p, 32), matrix_quadrature(&Symbol::Harmonic(p.clone()), 32, &QuadratureSpec::default())) {
        (Ok(a), Ok(b)) => {
            let diff = (a.entries() - b.entries()).iter().map(|v| v.norm()).fold(0.0, f64::max);
            rows.push("matrix-routes", context, "<= 1e-10", diff, Some(1e-10), diff <= 1e-10);
        }
        (Err(e), _) | (_, Err(e)) => rows.error("matrix-routes", context, "<= 1e-10", e),
    }

    let w = Complex::new(0.25, 0.5);
    let eps = 0.3;
    let context = "normalized area of a pseudohyperbolic disc from its Euclidean form";
    let want = {
        let s = 1.0 - w.norm_sqr();
        let d = 1.0 - eps * eps * w.norm_sqr();
        (eps * s / d).powi(2)
    };
    match pseudohyperbolic_disc(w, eps) {
        Ok(d) => {
            let err = (d.normalized_area() - want).abs();
            rows.push("pseudohyperbolic-area", context, want, d.normalized_area(), Some(1e-15), err <= 1e-15);
        }
        Err(e) => rows.error("pseudohyperbolic-area", context, want, e),
    }

    let context = "the normalized kernel has unit norm";
    let zk = Complex::new(-0.6, 0.7);
    match berezin_quad_fn(|_| Complex::new(1.0, 0.0), zk, 0, 0, &spec) {
        Ok(v) => {
            let err = (v.value - 1.0).norm();
            rows.push("kernel-normalization", context, 1, v.value.re, Some(1e-10), err <= 1e-10);
        }
        Err(e) => rows.error("kernel-normalization", context, 1, e),
    }
}

/// Runs every reproduction check. Failures are rows, never errors.
pub fn reproduce() -> Result<ReproReport> {
    let mut rows = Rows(Vec::new());
    counterexample_rows(&mut rows);
    decision_rows(&mut rows);
    parabolic_rows(&mut rows);
    berezin_rows(&mut rows);
    Ok(ReproReport::new(rows.0))
}
