//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the libtest harness
//! so that the lines are always printed.

mod common;

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use bergtol::berezin::{
    berezin_monomial_series, berezin_of_matrix, berezin_quad, berezin_quad_fn, berezin_radial_series, QuadratureSpec,
    RadialMoments,
};
use bergtol::douglas::{decide_invertibility, Mode, Outcome};
use bergtol::exact::rational;
use bergtol::geometry::{multiplier_tail_bound, parabolic_margin, pseudohyperbolic_disc, DiskGrid, ParabolicMode};
use bergtol::toeplitz::{
    matrix_harmonic, matrix_quadrature, matrix_radial, neumann_certificate, neumann_certificate_at, radial_eigenvalues,
};
use bergtol::{Complex, HarmonicPolynomial, RadialSymbol, Symbol};
use common::*;
use nalgebra::DMatrix;
use num_rational::BigRational;
use rand::Rng;
use rayon::prelude::*;

type Outcome_ = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome_, u64);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn counterexample() -> RadialSymbol {
    RadialSymbol::polynomial(vec![1.0, -1.5, 1.0]).unwrap()
}

/// `(j+1)·2∫ r^{2j+1} g(r) dr` for `g = Σ c_k r^k`, in exact arithmetic.
fn radial_eigenvalue_oracle(coeffs: &[BigRational], j: i64) -> BigRational {
    let mut acc = rational(0, 1);
    for (k, ck) in coeffs.iter().enumerate() {
        acc += ck * rational(2, 2 * j + 2 + k as i64);
    }
    acc * rational(j + 1, 1)
}

/// `B(g)(r) = (1 − r²)² ∫₀¹ 2s g(s) (1 + r²s²)/(1 − r²s²)³ ds` for radial `g`.
fn radial_berezin_oracle(g: impl Fn(f64) -> f64, r: f64) -> f64 {
    let r2 = r * r;
    let integral = graded_gl(
        |s| {
            let a = r2 * s * s;
            2.0 * s * g(s) * (1.0 + a) / (1.0 - a).powi(3)
        },
        40,
        24,
    );
    (1.0 - r2) * (1.0 - r2) * integral
}

fn criterion_1() -> Outcome_ {
    let exact = [rational(1, 1), rational(-3, 2), rational(1, 1)];
    let want = radial_eigenvalue_oracle(&exact, 2);
    ensure(want == rational(13, 28), || format!("oracle gives {want}"))?;
    let g = RadialSymbol::polynomial_exact(exact.to_vec()).unwrap();
    let ev = radial_eigenvalues(&g, 3);
    let got = ev.exact.as_ref().map(|e| e[2].clone());
    ensure(got.as_ref() == Some(&want), || format!("rational route gives {got:?}"))?;
    let from_floats = radial_eigenvalues(&counterexample(), 3).exact.map(|e| e[2].clone());
    ensure(from_floats.as_ref() == Some(&want), || format!("decimal input gives {from_floats:?}"))?;
    let t = ok(matrix_quadrature(&Symbol::Radial(counterexample()), 3, &QuadratureSpec::default()))?;
    let q = t.entries()[(2, 2)];
    let err = (q - Complex::new(13.0 / 28.0, 0.0)).norm();
    ensure(err <= 1e-10, || format!("quadrature route off by {err:e}"))?;
    Ok(format!("lambda_2 = 13/28 exactly; quadrature error {err:.1e}"))
}

fn criterion_2() -> Outcome_ {
    let g = counterexample();
    let lambda2 = 13.0 / 28.0;
    let moments = RadialMoments::from_symbol(&g, 1 << 16);
    let mut min = f64::INFINITY;
    let mut worst_oracle: f64 = 0.0;
    for i in 1..=200 {
        let r = 0.999 * i as f64 / 200.0;
        let s = ok(berezin_radial_series(&moments, Complex::new(r, 0.0), 1e-12))?;
        ensure(s.value.im == 0.0, || format!("nonreal value at r = {r}"))?;
        min = min.min(s.value.re - s.tail_bound);
        let oracle = radial_berezin_oracle(|t| t * t - 1.5 * t + 1.0, r);
        worst_oracle = worst_oracle.max((oracle - s.value.re).abs());
    }
    ensure(worst_oracle <= 1e-8, || format!("series deviates from the direct integral by {worst_oracle:e}"))?;
    ensure(min > lambda2, || format!("min {min} does not exceed 13/28"))?;
    let shifted = RadialSymbol::polynomial_exact(vec![rational(15, 28), rational(-3, 2), rational(1, 1)]).unwrap();
    let t = ok(matrix_radial(&shifted, 16))?;
    let (smin, _) = ok(t.singular_extremes())?;
    ensure(smin < 1e-12, || format!("sigma_min = {smin:e}"))?;
    Ok(format!("min B = {min:.6} > 13/28 (margin {:.3e}); sigma_min(T_Q, 16) = {smin:.1e}", min - lambda2))
}

fn angle_example(m: u32, n: u32) -> HarmonicPolynomial {
    bergtol::repro::angle_example(m, n)
}

fn criterion_3() -> Outcome_ {
    let r = angle_example(3, 3);
    let q = angle_example(2, 3);
    let at = eval_direct(&r, Complex::from_polar(1.0, PI / 3.0)).norm();
    ensure(at < 1e-12, || format!("|R(e^(i pi/3))| = {at:e}"))?;
    let q_min = (0..100_000)
        .map(|k| eval_direct(&q, Complex::from_polar(1.0, 2.0 * PI * k as f64 / 1e5)).norm())
        .fold(f64::INFINITY, f64::min);
    ensure(q_min > 1e-3, || format!("Q nearly vanishes on the circle ({q_min:e})"))?;
    for mode in [Mode::Exact, Mode::Float { tol: 1e-9 }] {
        let v = ok(decide_invertibility(&r, mode))?;
        ensure(v.outcome == Outcome::NotInvertible, || format!("R: {:?} in {mode:?}", v.outcome))?;
        let lambda = v.witness.as_ref().map(|w| w.lambda).unwrap_or(f64::NAN);
        ensure((lambda - PI / 3.0).abs() < 1e-12, || format!("R: witness {lambda} in {mode:?}"))?;
        let v = ok(decide_invertibility(&q, mode))?;
        ensure(v.outcome == Outcome::Invertible, || format!("Q: {:?} in {mode:?}", v.outcome))?;
    }
    Ok(format!("R not invertible at pi/3, Q invertible (min |Q| on circle {q_min:.4}), both modes"))
}

fn criterion_4() -> Outcome_ {
    let p = bergtol::repro::parabolic_example();
    let sym = Symbol::Harmonic(p.clone());

    let grid = DiskGrid::default_grid();
    let m = ok(parabolic_margin(&sym, 1.0, &grid, ParabolicMode::Quadratic))?;
    ensure(m.certified, || format!("margin {} with slack {:?} not certified", m.min_margin, m.lipschitz_slack))?;
    // Independent polar mesh.
    let mesh_min = (0..=400)
        .into_par_iter()
        .map(|i| {
            let r = i as f64 / 400.0;
            (0..2000)
                .map(|k| {
                    let v = eval_direct(&p, Complex::from_polar(r, 2.0 * PI * k as f64 / 2000.0));
                    v.re - v.im * v.im
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    ensure((mesh_min - m.min_margin).abs() < 1e-2 && mesh_min > 0.0, || {
        format!("mesh minimum {mesh_min} vs grid minimum {}", m.min_margin)
    })?;

    let (theta, min) = (0..100_000)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / 1e5;
            (t, ok(p.eval(Complex::from_polar(1.0, t))).map(|v| v.re))
        })
        .map(|(t, v)| (t, v.unwrap_or(f64::NAN)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let x = theta.cos();
    let formula = 1.5 + x / 2.0 + x * x;
    ensure((formula - min).abs() < 1e-12, || format!("Re P = {min} but 3/2 + x/2 + x^2 = {formula}"))?;
    ensure((min - 23.0 / 16.0).abs() <= 1e-6, || format!("boundary min {min}"))?;
    ensure((x + 0.25).abs() <= 1e-4, || format!("attained at x = {x}"))?;

    let cert = ok(neumann_certificate(&sym, &grid))?;
    let cert = cert.certificate().ok_or("Neumann certificate refused")?.clone();
    ensure(cert.inverse_norm_bound <= 1.0, || format!("inverse bound {}", cert.inverse_norm_bound))?;

    let scaled = ok(neumann_certificate_at(&sym, 1.0 / 6.0, &grid))?;
    let q = scaled.certificate().ok_or("scaled certificate refused")?.q;
    let p6 = HarmonicPolynomial::from_floats(1.0 / 3.0, &[(1, c(1.0 / 12.0, 0.0))], &[(2, c(1.0 / 12.0, 0.0))]).unwrap();
    let mut worst = f64::INFINITY;
    for n in [8, 16, 32, 64] {
        let t = ok(matrix_harmonic(&p6, n))?;
        let (smin, _) = ok(t.singular_extremes())?;
        let gram: DMatrix<Complex> = t.entries().adjoint() * t.entries();
        let eig = gram.map(|v| v.re).symmetric_eigen().eigenvalues.min().max(0.0).sqrt();
        ensure((eig - smin).abs() < 1e-10, || format!("N = {n}: SVD {smin} vs Gram eigenvalue {eig}"))?;
        ensure(smin >= 1.0 - q - 1e-8, || format!("N = {n}: sigma_min {smin} < 1 - q = {}", 1.0 - q))?;
        worst = worst.min(smin);
    }
    Ok(format!(
        "margin {:.4} (slack {:.4}); min Re P = {min:.9} at x = {x:.6}; bound {:.4}; min sigma {worst:.4} >= {:.4}",
        m.min_margin,
        m.lipschitz_slack.unwrap_or(f64::NAN),
        cert.inverse_norm_bound,
        1.0 - q
    ))
}

/// `B(w^a w̄^b)(z) = (1−|z|²)² Σ_j (j+1)(k+1) z̄^j z^k/(a+j+1)` with `k = a + j − b ≥ 0`.
fn monomial_oracle(a: u32, b: u32, z: Complex) -> Complex {
    let x = z.norm_sqr();
    let mut sum = Complex::new(0.0, 0.0);
    let start = b.saturating_sub(a) as i64;
    for j in start..20_000 {
        let k = a as i64 + j - b as i64;
        let term = z.conj().powi(j as i32) * z.powi(k as i32) * ((j + 1) * (k + 1)) as f64 / (a as i64 + j + 1) as f64;
        sum += term;
        if term.norm() < 1e-20 && j > 50 {
            break;
        }
    }
    sum * (1.0 - x) * (1.0 - x)
}

fn criterion_5() -> Outcome_ {
    let mut rng = rng(5);
    let spec = QuadratureSpec::with_tol(1e-10);
    let points: Vec<Complex> = (0..50).map(|_| point_in_disc(&mut rng, 0.9)).collect();
    let mut worst: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for a in 0..=4u32 {
        for b in 0..=4u32 {
            for &z in &points {
                let q = ok(berezin_quad_fn(|w| w.powu(a) * w.conj().powu(b), z, (a + b) as usize, (a + b) as usize, &spec))?;
                let s = ok(berezin_monomial_series(a, b, z, 1e-12))?;
                worst = worst.max((q.value - s.value).norm());
                worst_oracle = worst_oracle.max((monomial_oracle(a, b, z) - s.value).norm());
            }
        }
    }
    ensure(worst <= 1e-8, || format!("routes differ by {worst:e}"))?;
    ensure(worst_oracle <= 1e-10, || format!("series differs from the double sum by {worst_oracle:e}"))?;
    let mut fixed: f64 = 0.0;
    for _ in 0..20 {
        let degree = rng.gen_range(1..=6);
        let p0 = rng.gen_range(-1.0..1.0);
        let p = random_harmonic(&mut rng, degree, p0, 1.0);
        let sym = Symbol::Harmonic(p.clone());
        for _ in 0..5 {
            let z = point_in_disc(&mut rng, 0.9);
            let v = ok(berezin_quad(&sym, z, &spec))?;
            fixed = fixed.max((v.value - eval_direct(&p, z)).norm());
        }
    }
    ensure(fixed <= 1e-8, || format!("harmonic fixed point off by {fixed:e}"))?;
    Ok(format!("route gap {worst:.1e}, oracle gap {worst_oracle:.1e}, fixed-point gap {fixed:.1e}"))
}

/// `⟨T_P e_j, e_i⟩` from the coefficient lists.
fn entry_oracle(p: &HarmonicPolynomial, i: usize, j: usize) -> Complex {
    let mut v = Complex::new(0.0, 0.0);
    if i == j {
        v += p.p0().value();
    }
    for t in p.analytic() {
        if i == j + t.power as usize {
            v += t.coef.value() * ((j + 1) as f64 / (i + 1) as f64).sqrt();
        }
    }
    for t in p.coanalytic() {
        if j == i + t.power as usize {
            v += t.coef.value() * ((i + 1) as f64 / (j + 1) as f64).sqrt();
        }
    }
    v
}

fn criterion_6() -> Outcome_ {
    let mut rng = rng(6);
    let mut worst: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for _ in 0..10 {
        let p = random_normalized(&mut rng, 5, 12);
        let a = ok(matrix_harmonic(&p, 32))?;
        let b = ok(matrix_quadrature(&Symbol::Harmonic(p.clone()), 32, &QuadratureSpec::default()))?;
        for i in 0..32 {
            for j in 0..32 {
                worst = worst.max((a.entries()[(i, j)] - b.entries()[(i, j)]).norm());
                worst_oracle = worst_oracle.max((a.entries()[(i, j)] - entry_oracle(&p, i, j)).norm());
            }
        }
    }
    ensure(worst <= 1e-10, || format!("routes differ by {worst:e}"))?;
    ensure(worst_oracle <= 1e-14, || format!("closed form differs from the inner products by {worst_oracle:e}"))?;
    Ok(format!("max entry gap {worst:.1e}, oracle gap {worst_oracle:.1e}"))
}

fn criterion_7() -> Outcome_ {
    const CASES: usize = 1000;
    let spec = QuadratureSpec::with_tol(1e-10);
    let mut rng = rng(7);

    // Parabolic condition survives the Berezin transform: φ = h²/δ + c + i h.
    let mut jensen = f64::INFINITY;
    for _ in 0..CASES {
        let degree = rng.gen_range(1..=3u32);
        let coeffs: Vec<Complex> = (0..=degree).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let h = move |w: Complex| coeffs.iter().rev().fold(Complex::new(0.0, 0.0), |acc, &a| acc * w + a).re;
        let delta = rng.gen_range(0.1..=1.0);
        let shift = rng.gen_range(0.0..0.5);
        let phi = |w: Complex| {
            let s = h(w);
            Complex::new(s * s / delta + shift, s)
        };
        let z = point_in_disc(&mut rng, 0.9);
        let b = ok(berezin_quad_fn(phi, z, 2 * degree as usize, 2 * degree as usize, &spec))?;
        jensen = jensen.min(b.value.re - delta * b.value.im * b.value.im);
    }
    ensure(jensen >= -1e-8, || format!("Jensen margin {jensen:e}"))?;

    // |B(T)(z)| ≤ σ_max + tail, and the tail covers the gap to the symbol's transform.
    let mut bound_gap = f64::INFINITY;
    let mut tail_gap = f64::INFINITY;
    for _ in 0..CASES {
        let degree = rng.gen_range(1..=4);
        let p0 = rng.gen_range(-2.0..2.0);
        let p = random_harmonic(&mut rng, degree, p0, 1.0);
        let n = rng.gen_range(8..=32);
        let t = ok(matrix_harmonic(&p, n))?;
        let (_, smax) = ok(t.singular_extremes())?;
        let z = point_in_disc(&mut rng, 0.9);
        let b = ok(berezin_of_matrix(&t, z))?;
        bound_gap = bound_gap.min(smax + b.tail_bound - b.value.norm());
        let exact = ok(bergtol::berezin::berezin_harmonic_series(&p, z, 1e-13))?;
        tail_gap = tail_gap.min(b.tail_bound + 1e-10 - (b.value - exact.value).norm());
    }
    ensure(bound_gap >= 0.0, || format!("Berezin bound violated by {:e}", -bound_gap))?;
    ensure(tail_gap >= 0.0, || format!("tail bound violated by {:e}", -tail_gap))?;

    // B(|φ|) ≥ |B(φ)| − 2 tol.
    let mut triangle = f64::INFINITY;
    for _ in 0..CASES {
        let degree = rng.gen_range(1..=4);
        let raw = random_harmonic(&mut rng, degree, 0.0, 1.0);
        let sum = raw.modulus_sum();
        let factor = if sum > 0.0 { rng.gen_range(0.2..1.0) / sum } else { 0.0 };
        let scale = |ts: &[bergtol::symbols::Term]| -> Vec<(u32, Complex)> {
            ts.iter().map(|t| (t.power, t.coef.value() * factor)).collect()
        };
        let p0 = rng.gen_range(1.05..2.0);
        let p = HarmonicPolynomial::from_floats(p0, &scale(raw.analytic()), &scale(raw.coanalytic())).unwrap();
        let z = point_in_disc(&mut rng, 0.9);
        let abs = ok(berezin_quad_fn(|w| Complex::new(eval_direct(&p, w).norm(), 0.0), z, 2 * degree as usize, 0, &spec))?;
        let plain = ok(berezin_quad(&Symbol::Harmonic(p), z, &spec))?;
        triangle = triangle.min(abs.value.re - plain.value.norm() + 2.0 * spec.tol);
    }
    ensure(triangle >= 0.0, || format!("triangle domination violated by {:e}", -triangle))?;

    // Adjoint symmetry, exactly.
    for case in 0..CASES {
        let degree = rng.gen_range(1..=5);
        let p0 = rng.gen_range(-2.0..2.0);
        let p = random_harmonic(&mut rng, degree, p0, 1.0);
        let n = rng.gen_range(1..=24);
        let a = ok(matrix_harmonic(&p, n))?;
        let b = ok(matrix_harmonic(&p.conjugate_swap(), n))?;
        ensure(a.entries().adjoint() == *b.entries(), || format!("case {case}: adjoint mismatch"))?;
    }

    // Restriction to {|z| < r} on A_n.
    let mut multiplier = f64::INFINITY;
    for _ in 0..CASES {
        let n = rng.gen_range(0..=8u32);
        let r = [0.3, 0.5, 0.7][rng.gen_range(0..3)];
        let coeffs: Vec<Complex> = (0..rng.gen_range(1..=5))
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let f = |w: Complex| coeffs.iter().enumerate().map(|(k, a)| a * w.powu(n + k as u32)).sum::<Complex>();
        let energy = |radius: f64| {
            composite_gl(
                |s| {
                    let ring: f64 = (0..64).map(|k| f(Complex::from_polar(s, 2.0 * PI * k as f64 / 64.0)).norm_sqr()).sum();
                    2.0 * s * ring / 64.0
                },
                0.0,
                radius,
                4,
                24,
            )
        };
        let inner = energy(r);
        let full = energy(1.0);
        let bound = ok(multiplier_tail_bound(r, n))?;
        multiplier = multiplier.min(bound * bound * full * (1.0 + 1e-10) - inner);
    }
    ensure(multiplier >= 0.0, || format!("multiplier bound violated by {:e}", -multiplier))?;

    Ok(format!(
        "{CASES} cases each: Jensen margin {jensen:.1e}, Berezin bound slack {bound_gap:.1e}, \
         triangle slack {triangle:.1e}, adjoint exact, multiplier slack {multiplier:.1e}"
    ))
}

/// Brute-force zero search: `10⁶` angles, then golden-section refinement of small minima.
fn boundary_has_zero(p: &HarmonicPolynomial) -> (bool, f64) {
    const M: usize = 1_000_000;
    let step = 2.0 * PI / M as f64;
    let values: Vec<f64> = (0..M)
        .into_par_iter()
        .map(|k| eval_direct(p, Complex::from_polar(1.0, k as f64 * step)).norm())
        .collect();
    let mut best = f64::INFINITY;
    for k in 0..M {
        let v = values[k];
        if v > 1e-3 || v > values[(k + M - 1) % M] || v > values[(k + 1) % M] {
            continue;
        }
        let t = k as f64 * step;
        let refined = golden_min(|s| eval_direct(p, Complex::from_polar(1.0, s)).norm(), t - step, t + step);
        best = best.min(refined.min(v));
    }
    let grid_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let best = best.min(grid_min);
    (best < 1e-6, best)
}

fn criterion_8() -> Outcome_ {
    let mut rng = rng(8);
    let mut zeros = 0;
    for case in 0..200 {
        let p = if case % 2 == 0 { random_with_zero(&mut rng, 5, 12) } else { random_normalized(&mut rng, 5, 12) };
        let (has_zero, min) = boundary_has_zero(&p);
        let exact = ok(decide_invertibility(&p, Mode::Exact))?;
        let float = ok(decide_invertibility(&p, Mode::Float { tol: 1e-9 }))?;
        let want = if has_zero { Outcome::NotInvertible } else { Outcome::Invertible };
        ensure(exact.outcome == want, || format!("case {case}: exact {:?}, scan min {min:e}", exact.outcome))?;
        ensure(float.outcome == want, || format!("case {case}: float {:?}, scan min {min:e}", float.outcome))?;
        if let Some(w) = &exact.witness {
            ensure(w.modulus < 1e-10, || format!("case {case}: witness modulus {:e}", w.modulus))?;
        }
        zeros += has_zero as usize;
    }
    Ok(format!("200 polynomials ({zeros} with boundary zeros) agree with the scan in both modes"))
}

fn criterion_9() -> Outcome_ {
    let mut rng = rng(9);
    const SAMPLES: usize = 1_000_000;
    let mut worst: f64 = 0.0;
    for case in 0..20 {
        let w = point_in_disc(&mut rng, 0.95);
        let eps = rng.gen_range(0.05..0.9);
        let area = ok(pseudohyperbolic_disc(w, eps))?.normalized_area();
        let seed = rng.gen::<u64>();
        let hits = (0..16u64)
            .into_par_iter()
            .map(|chunk| {
                let mut local = common::rng(seed ^ chunk.wrapping_mul(0x9e37_79b9_7f4a_7c15));
                (0..SAMPLES / 16)
                    .filter(|_| {
                        let z = point_in_disc(&mut local, 1.0);
                        ((z - w) / (Complex::new(1.0, 0.0) - w.conj() * z)).norm() < eps
                    })
                    .count()
            })
            .sum::<usize>();
        let p = hits as f64 / SAMPLES as f64;
        let se = (area * (1.0 - area) / SAMPLES as f64).sqrt();
        let z_score = (p - area).abs() / se;
        ensure(z_score <= 3.0, || format!("case {case}: area {area} vs Monte-Carlo {p} ({z_score:.2} SE)"))?;
        worst = worst.max(z_score);
    }
    Ok(format!("20 discs within {worst:.2} standard errors"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("counterexample eigenvalue", criterion_1, 1),
        ("Berezin gap and singular section", criterion_2, 5),
        ("angle-system decisions", criterion_3, 1),
        ("parabolic example pipeline", criterion_4, 30),
        ("Berezin route agreement", criterion_5, 60),
        ("matrix route agreement", criterion_6, 60),
        ("property suites", criterion_7, 300),
        ("decision vs boundary scan", criterion_8, 120),
        ("pseudohyperbolic area", criterion_9, 30),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let timing = format!("{:.2}s of {budget}s", elapsed.as_secs_f64());
        let over = if elapsed > Duration::from_secs(*budget) { " (over budget)" } else { "" };
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} [{timing}{over}]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL  {name}: {detail} [{timing}{over}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
