#![allow(dead_code)]

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use bergtol::exact::rational;
use bergtol::symbols::{Coefficient, PolarCoefficient, Term};
use bergtol::{Complex, HarmonicPolynomial};
use gauss_quad::GaussLegendre;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// Uniform point in the disc of radius `r`.
pub fn point_in_disc(rng: &mut ChaCha8Rng, r: f64) -> Complex {
    Complex::from_polar(r * rng.gen::<f64>().sqrt(), 2.0 * PI * rng.gen::<f64>())
}

fn polar(modulus: BigRational, arg: BigRational) -> Coefficient {
    Coefficient::from_polar(PolarCoefficient::new(modulus, arg).unwrap())
}

/// Powers and their side (true for analytic) for a random normalized polynomial.
fn random_support(rng: &mut ChaCha8Rng, max_degree: u32) -> Vec<(u32, bool)> {
    let mut slots: Vec<(u32, bool)> = (1..=max_degree).flat_map(|k| [(k, true), (k, false)]).collect();
    slots.shuffle(rng);
    let count = rng.gen_range(1..=4.min(slots.len()));
    let mut chosen = slots[..count].to_vec();
    chosen.sort();
    chosen
}

/// `1 + Σ p_m z^m + Σ q_n z̄^n` with `Σ|coef| = 1`, integer-weight moduli and arguments
/// `k/den` (times π); `angles[i]` gives the argument of the i-th support term.
fn assemble(support: &[(u32, bool)], weights: &[i64], args: &[BigRational]) -> HarmonicPolynomial {
    let total: i64 = weights.iter().sum();
    let mut analytic = Vec::new();
    let mut coanalytic = Vec::new();
    for ((&(power, is_analytic), &w), arg) in support.iter().zip(weights).zip(args) {
        let t = Term::new(power, polar(rational(w, total), arg.clone()));
        if is_analytic {
            analytic.push(t)
        } else {
            coanalytic.push(t)
        }
    }
    HarmonicPolynomial::new(Coefficient::from_rational(rational(1, 1)), analytic, coanalytic).unwrap()
}

/// Random normalized polynomial with `p0 = 1` and arguments of denominator at most `max_den`.
pub fn random_normalized(rng: &mut ChaCha8Rng, max_degree: u32, max_den: i64) -> HarmonicPolynomial {
    let support = random_support(rng, max_degree);
    let weights: Vec<i64> = support.iter().map(|_| rng.gen_range(1..=6)).collect();
    let args: Vec<BigRational> = support
        .iter()
        .map(|_| {
            let den = rng.gen_range(1..=max_den);
            rational(rng.gen_range(0..2 * den), den)
        })
        .collect();
    assemble(&support, &weights, &args)
}

/// Random normalized polynomial that vanishes at `e^{iπΛ}` for a random `Λ` of
/// denominator at most `max_den`.
pub fn random_with_zero(rng: &mut ChaCha8Rng, max_degree: u32, max_den: i64) -> HarmonicPolynomial {
    let support = random_support(rng, max_degree);
    let weights: Vec<i64> = support.iter().map(|_| rng.gen_range(1..=6)).collect();
    let den = rng.gen_range(1..=max_den);
    let lam = rational(rng.gen_range(0..2 * den), den);
    let args: Vec<BigRational> = support
        .iter()
        .map(|&(power, analytic)| {
            let turn = rational(power as i64, 1) * &lam;
            // m Λ + arg ≡ 1 and −n Λ + arg ≡ 1 (mod 2).
            if analytic {
                rational(1, 1) - turn
            } else {
                rational(1, 1) + turn
            }
        })
        .collect();
    assemble(&support, &weights, &args)
}

/// Random float harmonic polynomial of degree at most `degree`.
pub fn random_harmonic(rng: &mut ChaCha8Rng, degree: u32, p0: f64, scale: f64) -> HarmonicPolynomial {
    let mut analytic = Vec::new();
    let mut coanalytic = Vec::new();
    for k in 1..=degree {
        if rng.gen_bool(0.7) {
            analytic.push((k, Complex::from_polar(scale * rng.gen::<f64>(), 2.0 * PI * rng.gen::<f64>())));
        }
        if rng.gen_bool(0.7) {
            coanalytic.push((k, Complex::from_polar(scale * rng.gen::<f64>(), 2.0 * PI * rng.gen::<f64>())));
        }
    }
    HarmonicPolynomial::from_floats(p0, &analytic, &coanalytic).unwrap()
}

/// Direct evaluation of `p0 + Σ p_m z^m + Σ q_n z̄^n` from the coefficient lists.
pub fn eval_direct(p: &HarmonicPolynomial, z: Complex) -> Complex {
    let mut v = p.p0().value();
    for t in p.analytic() {
        v += t.coef.value() * z.powu(t.power);
    }
    for t in p.coanalytic() {
        v += t.coef.value() * z.conj().powu(t.power);
    }
    v
}

/// `∫_a^b f` by `panels` equal panels of an `order`-point Gauss–Legendre rule.
pub fn composite_gl(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let rule = GaussLegendre::new(NonZeroUsize::new(order).unwrap());
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for &(x, w) in rule.as_node_weight_pairs() {
            total += 0.5 * h * w * f(lo + 0.5 * h * (x + 1.0));
        }
    }
    total
}

/// `∫_0^1 f` with panels refined geometrically toward 1.
pub fn graded_gl(f: impl Fn(f64) -> f64, levels: usize, order: usize) -> f64 {
    let mut total = 0.0;
    let mut lo = 0.0;
    for k in 1..=levels {
        let hi = 1.0 - 0.5f64.powi(k as i32);
        total += composite_gl(&f, lo, hi, 1, order);
        lo = hi;
    }
    total + composite_gl(&f, lo, 1.0, 1, order)
}

/// Golden-section refinement of `f` on `[a, b]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b))
}
