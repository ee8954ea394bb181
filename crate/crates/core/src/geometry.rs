//! Pointwise geometric conditions on symbols over a polar grid, pseudohyperbolic discs
//! and the density diagnostic.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::point::Point;
use crate::symbols::{sup_norm, Complex, NormBracket, Symbol};

pub const DEFAULT_RINGS: usize = 256;
pub const DEFAULT_ANGLES: usize = 1024;
pub const DEFAULT_BOUNDARY_GAP: f64 = 1e-6;
pub const MAX_BOUNDARY_GAP: f64 = 1e-3;
/// Resolution used for the certified sup-norm bracket inside geometric checks.
pub const NORM_RESOLUTION: usize = 256;
/// Seed used by [`luecking_density`] unless the caller asks for a random one.
pub const DEFAULT_SEED: u64 = 0x6265_7267;

/// Polar grid: rings `r_0 < r_1 < …` in `[0, 1)`, each with equispaced angles
/// `2πk/A_i`, optionally closed off by a ring at `1 − boundary_gap`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskGrid {
    radii: Vec<f64>,
    counts: Vec<usize>,
    boundary_gap: Option<f64>,
    offsets: Vec<usize>,
    nodes: Vec<Complex>,
}

/// Compact description of a grid for reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridDescriptor {
    pub rings: usize,
    pub max_angles: usize,
    pub nodes: usize,
    pub boundary_gap: Option<f64>,
    pub covering_radius: f64,
}

impl DiskGrid {
    /// Rings are given explicitly. When `boundary_gap` is set the last ring must sit at
    /// `1 − boundary_gap`.
    pub fn new(radii: Vec<f64>, counts: Vec<usize>, boundary_gap: Option<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::Argument("grid needs at least one ring".into()));
        }
        if radii.len() != counts.len() {
            return Err(Error::Argument("one angular count per ring is required".into()));
        }
        if radii.iter().any(|r| !r.is_finite()) || radii[0] < 0.0 || *radii.last().unwrap() >= 1.0 {
            return Err(Error::Argument("ring radii must lie in [0, 1)".into()));
        }
        if radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument("ring radii must be strictly increasing".into()));
        }
        if counts.contains(&0) {
            return Err(Error::Argument("every ring needs at least one node".into()));
        }
        if radii[0] == 0.0 && counts[0] != 1 {
            return Err(Error::Argument("the ring at r = 0 must have exactly one node".into()));
        }
        if let Some(g) = boundary_gap {
            if !(g > 0.0 && g <= MAX_BOUNDARY_GAP) {
                return Err(Error::Argument(format!("boundary gap {g} outside (0, {MAX_BOUNDARY_GAP}]")));
            }
            if (radii.last().unwrap() - (1.0 - g)).abs() > 1e-15 {
                return Err(Error::Argument("last ring must sit at 1 - boundary_gap".into()));
            }
        }
        let mut offsets = Vec::with_capacity(counts.len() + 1);
        offsets.push(0);
        for &c in &counts {
            offsets.push(offsets.last().unwrap() + c);
        }
        let nodes = radii
            .iter()
            .zip(&counts)
            .flat_map(|(&r, &a)| (0..a).map(move |k| Complex::from_polar(r, 2.0 * PI * k as f64 / a as f64)))
            .collect();
        Ok(Self { radii, counts, boundary_gap, offsets, nodes })
    }

    /// `rings` Chebyshev-spaced rings `r_i = sin(πi/(2·rings))` with
    /// `clamp(⌈angles·r_i⌉, 8, angles)` angles each (one node at the centre), plus the
    /// boundary ring with `angles` angles when a gap is given.
    pub fn chebyshev(rings: usize, angles: usize, boundary_gap: Option<f64>) -> Result<Self> {
        if rings < 2 {
            return Err(Error::Argument("at least 2 rings are required".into()));
        }
        if angles < 8 {
            return Err(Error::Argument("at least 8 angles are required".into()));
        }
        let mut radii: Vec<f64> = (0..rings).map(|i| (PI * i as f64 / (2 * rings) as f64).sin()).collect();
        let mut counts: Vec<usize> = radii
            .iter()
            .map(|&r| if r == 0.0 { 1 } else { ((angles as f64 * r).ceil() as usize).clamp(8, angles) })
            .collect();
        if let Some(g) = boundary_gap {
            let outer = 1.0 - g;
            if outer <= *radii.last().unwrap() {
                return Err(Error::Argument("boundary gap too large for the ring spacing".into()));
            }
            radii.push(outer);
            counts.push(angles);
        }
        Self::new(radii, counts, boundary_gap)
    }

    /// 256 Chebyshev rings with up to 1024 angles plus a boundary ring at `1 − 10⁻⁶`.
    pub fn default_grid() -> Self {
        Self::chebyshev(DEFAULT_RINGS, DEFAULT_ANGLES, Some(DEFAULT_BOUNDARY_GAP)).expect("default grid is valid")
    }

    /// Rings at `√t_j` for the Gauss–Legendre nodes `t_j` of the given order, each with
    /// `angles` equispaced angles. Fields on this grid integrate exactly against
    /// polynomial kernels.
    pub fn gauss_rule(order: usize, angles: usize) -> Result<Self> {
        if order == 0 || angles == 0 {
            return Err(Error::Argument("rule grid needs positive order and angle count".into()));
        }
        let rule = crate::quadrature::gauss_legendre(order);
        let radii = rule.nodes.iter().map(|t| t.sqrt()).collect();
        Self::new(radii, vec![angles; order], None)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> Complex {
        self.nodes[i]
    }

    pub fn nodes(&self) -> &[Complex] {
        &self.nodes
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn angular_counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn boundary_gap(&self) -> Option<f64> {
        self.boundary_gap
    }

    /// Index of the first node on `ring`.
    pub fn ring_offset(&self, ring: usize) -> usize {
        self.offsets[ring]
    }

    /// Every point of the closed disc lies within this distance of some node.
    pub fn covering_radius(&self) -> f64 {
        let arc = |i: usize| if self.radii[i] == 0.0 { 0.0 } else { PI * self.radii[i] / self.counts[i] as f64 };
        let last = self.radii.len() - 1;
        let mut h: f64 = self.radii[0] + arc(0);
        for i in 0..last {
            let g = self.radii[i + 1] - self.radii[i];
            let (a, b) = (arc(i), arc(i + 1));
            h = h.max(((g + a + b) / 2.0).min(g + a).min(g + b));
        }
        h.max(1.0 - self.radii[last] + arc(last))
    }

    pub fn descriptor(&self) -> GridDescriptor {
        GridDescriptor {
            rings: self.radii.len(),
            max_angles: self.counts.iter().copied().max().unwrap_or(0),
            nodes: self.len(),
            boundary_gap: self.boundary_gap,
            covering_radius: self.covering_radius(),
        }
    }
}

/// Parallel argmin with ties broken towards the smallest index.
pub(crate) fn par_argmin(len: usize, f: impl Fn(usize) -> f64 + Sync) -> Result<(usize, f64)> {
    let best = (0..len)
        .into_par_iter()
        .map(|i| (i, f(i)))
        .reduce(
            || (usize::MAX, f64::INFINITY),
            |a, b| {
                if b.1.is_nan() || a.1.is_nan() {
                    if a.1.is_nan() && (!b.1.is_nan() || a.0 < b.0) { a } else { b }
                } else if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            },
        );
    if best.0 == usize::MAX {
        return Err(Error::Argument("empty grid".into()));
    }
    if best.1.is_nan() {
        return Err(Error::Numerical(format!("non-finite value at node {}", best.0)));
    }
    Ok(best)
}

/// Which form of the parabolic condition to test.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParabolicMode {
    /// `Re φ ≥ δ (Im φ)²`.
    #[default]
    Quadratic,
    /// `Re φ ≥ δ |Im φ|`, the sketched linear variant.
    Linear,
}

impl ParabolicMode {
    pub fn margin(self, v: Complex, delta: f64) -> f64 {
        match self {
            ParabolicMode::Quadratic => v.re - delta * v.im * v.im,
            ParabolicMode::Linear => v.re - delta * v.im.abs(),
        }
    }

    /// Lipschitz constant of the margin given that of φ and a bound on `|φ|`.
    fn margin_lipschitz(self, lipschitz: f64, sup: f64, delta: f64) -> f64 {
        match self {
            ParabolicMode::Quadratic => lipschitz * (1.0 + 2.0 * delta * sup),
            ParabolicMode::Linear => lipschitz * (1.0 + delta),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginReport {
    pub min_margin: f64,
    pub argmin: Point,
    pub argmin_index: usize,
    pub delta: f64,
    pub mode: ParabolicMode,
    pub grid: GridDescriptor,
    /// Lipschitz constant of the margin times the covering radius, when known.
    pub lipschitz_slack: Option<f64>,
    /// True only when `min_margin − lipschitz_slack ≥ 0`, which proves the condition on
    /// the whole closed disc.
    pub certified: bool,
}

/// Minimum over the grid of `Re φ − δ (Im φ)²` (or of the linear variant).
///
/// A nonnegative minimum is evidence. For symbols with a known Lipschitz constant the
/// report is marked certified when the minimum also exceeds the Lipschitz slack.
pub fn parabolic_margin(symbol: &Symbol, delta: f64, grid: &DiskGrid, mode: ParabolicMode) -> Result<MarginReport> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Argument(format!("delta {delta} outside (0, 1]")));
    }
    if grid.is_empty() {
        return Err(Error::Argument("empty grid".into()));
    }
    let (idx, min_margin) = par_argmin(grid.len(), |i| mode.margin(symbol.eval_unchecked(grid.node(i)), delta))?;
    let slack = match symbol.lipschitz() {
        Some(l) => {
            let sup = sup_norm(symbol, NORM_RESOLUTION)?.upper;
            Some(mode.margin_lipschitz(l, sup, delta) * grid.covering_radius())
        }
        None => None,
    };
    Ok(MarginReport {
        min_margin,
        argmin: grid.node(idx).into(),
        argmin_index: idx,
        delta,
        mode,
        grid: grid.descriptor(),
        lipschitz_slack: slack,
        certified: slack.is_some_and(|s| min_margin - s >= 0.0),
    })
}

/// `R = min(1, 1/upper)/2`; an upper bound of 0 counts as `≤ 1`.
pub fn scaling_constant_from_norm(upper: f64) -> f64 {
    if upper <= 1.0 {
        0.5
    } else {
        0.5 / upper
    }
}

/// Scaling constant from the certified upper sup-norm bracket.
pub fn scaling_constant(symbol: &Symbol) -> Result<f64> {
    let NormBracket { upper, .. } = sup_norm(symbol, NORM_RESOLUTION)?;
    if !upper.is_finite() {
        return Err(Error::Numerical("sup-norm bracket is not finite".into()));
    }
    Ok(scaling_constant_from_norm(upper))
}

/// `max |1 − φ|` over the grid nodes.
pub fn disc_condition(symbol: &Symbol, grid: &DiskGrid) -> Result<f64> {
    let (_, neg) = par_argmin(grid.len(), |i| -(Complex::new(1.0, 0.0) - symbol.eval_unchecked(grid.node(i))).norm())?;
    Ok(-neg)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EuclideanDisc {
    pub center: Point,
    pub radius: f64,
}

impl EuclideanDisc {
    /// Area under the normalized measure `dA = π⁻¹ dx dy`.
    pub fn normalized_area(&self) -> f64 {
        self.radius * self.radius
    }

    pub fn contains(&self, z: Complex) -> bool {
        (z - Complex::from(self.center)).norm() < self.radius
    }
}

fn check_open_disc(w: Complex) -> Result<()> {
    if !(w.re.is_finite() && w.im.is_finite()) || w.norm() >= 1.0 {
        return Err(Error::Domain(format!("|w| = {} is not below 1", w.norm())));
    }
    Ok(())
}

/// Euclidean description of the pseudohyperbolic disc `{z : |z − w|/|1 − w̄z| < ε}`.
pub fn pseudohyperbolic_disc(w: Complex, eps: f64) -> Result<EuclideanDisc> {
    check_open_disc(w)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("radius {eps} outside (0, 1)")));
    }
    let e2 = eps * eps;
    let w2 = w.norm_sqr();
    let denom = 1.0 - e2 * w2;
    Ok(EuclideanDisc {
        center: (w * ((1.0 - e2) / denom)).into(),
        radius: eps * (1.0 - w2) / denom,
    })
}

/// `|z − w| / |1 − w̄ z|`.
pub fn pseudohyperbolic_distance(z: Complex, w: Complex) -> Result<f64> {
    check_open_disc(w)?;
    check_open_disc(z)?;
    Ok((z - w).norm() / (Complex::new(1.0, 0.0) - w.conj() * z).norm())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub min_ratio: f64,
    pub argmin: Point,
    /// Binomial standard error of the minimizing estimate.
    pub std_error: f64,
    pub probes: usize,
    pub samples_per_disc: usize,
    pub epsilon: f64,
    pub seed: u64,
}

pub const MIN_DENSITY_SAMPLES: usize = 100;

/// Monte-Carlo estimate of `min_w |G ∩ D(w, ε)| / |D(w, ε)|` over the probe nodes.
///
/// Samples are uniform in each Euclidean image disc. Probe `i` uses its own ChaCha
/// stream, so results do not depend on thread scheduling. With `seed = None` a random
/// seed is drawn and reported.
pub fn luecking_density(
    member: impl Fn(Complex) -> bool + Sync,
    eps: f64,
    probes: &DiskGrid,
    samples_per_disc: usize,
    seed: Option<u64>,
) -> Result<DensityReport> {
    if samples_per_disc < MIN_DENSITY_SAMPLES {
        return Err(Error::Argument(format!("need at least {MIN_DENSITY_SAMPLES} samples per disc")));
    }
    let seed = seed.unwrap_or_else(rand::random);
    let ratios: Vec<f64> = (0..probes.len())
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let disc = pseudohyperbolic_disc(probes.node(i), eps)?;
            let center = Complex::from(disc.center);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let hits = (0..samples_per_disc)
                .filter(|_| {
                    let rho = disc.radius * rng.gen::<f64>().sqrt();
                    let theta = 2.0 * PI * rng.gen::<f64>();
                    member(center + Complex::from_polar(rho, theta))
                })
                .count();
            Ok(hits as f64 / samples_per_disc as f64)
        })
        .collect::<Result<_>>()?;
    let (idx, min_ratio) = par_argmin(ratios.len(), |i| ratios[i])?;
    Ok(DensityReport {
        min_ratio,
        argmin: probes.node(idx).into(),
        std_error: (min_ratio * (1.0 - min_ratio) / samples_per_disc as f64).sqrt(),
        probes: probes.len(),
        samples_per_disc,
        epsilon: eps,
        seed,
    })
}

/// `ρ₀ = min(1, 1/upper)/32`.
pub fn rho0_from_norm(upper: f64) -> f64 {
    scaling_constant_from_norm(upper) / 16.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SufficiencyVerdict {
    pub rho: f64,
    pub rho0: f64,
    pub norm: NormBracket,
    pub mode: ParabolicMode,
    /// Parabolic margin over nodes with `|φ| ≥ ρ`.
    pub pass_i: bool,
    pub margin_i: f64,
    /// `min |φ| − ρ` over nodes with `|z| ≥ ρ`.
    pub pass_ii: bool,
    pub margin_ii: f64,
    /// Upper bound for the normalized area of `Λ = {|φ| ≤ ρ}`; never an underestimate
    /// when a Lipschitz constant is known.
    pub pass_iii: bool,
    pub lambda_area_bound: f64,
    pub lambda_area_limit: f64,
    pub lambda_empty: bool,
    /// True when the area bound uses a Lipschitz slack (otherwise it is grid evidence).
    pub area_certified: bool,
    pub pass: bool,
    pub reasons: Vec<String>,
    pub grid: GridDescriptor,
}

/// Grid check of the three sufficient conditions `(i)`–`(iii)` together with `ρ < ρ₀`.
///
/// In [`ParabolicMode::Linear`] the area limit is `ρ⁴` instead of `ρ⁶`.
pub fn thm_sufficient_check(symbol: &Symbol, rho: f64, grid: &DiskGrid, mode: ParabolicMode) -> Result<SufficiencyVerdict> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Argument(format!("rho must be positive, got {rho}")));
    }
    let norm = sup_norm(symbol, NORM_RESOLUTION)?;
    let rho0 = rho0_from_norm(norm.upper);
    let values: Vec<Complex> = grid.nodes().par_iter().map(|&z| symbol.eval_unchecked(z)).collect();

    let margin_i = values
        .iter()
        .filter(|v| v.norm() >= rho)
        .map(|&v| mode.margin(v, 1.0))
        .fold(f64::INFINITY, f64::min);
    let margin_ii = grid
        .nodes()
        .iter()
        .zip(&values)
        .filter(|(z, _)| z.norm() >= rho)
        .map(|(_, v)| v.norm() - rho)
        .fold(f64::INFINITY, f64::min);

    let lipschitz = symbol.lipschitz();
    let slack = lipschitz.unwrap_or(0.0);
    let area = lambda_area_overcount(symbol, rho, slack, grid);
    let limit = match mode {
        ParabolicMode::Quadratic => rho.powi(6),
        ParabolicMode::Linear => rho.powi(4),
    };

    let pass_i = margin_i >= 0.0;
    let pass_ii = margin_ii > 0.0;
    let pass_iii = area <= limit;
    let mut reasons = Vec::new();
    if !pass_i {
        reasons.push(format!("parabolic margin {margin_i:e} is negative where |phi| >= rho"));
    }
    if !pass_ii {
        reasons.push(format!("|phi| <= rho at a node with |z| >= rho (margin {margin_ii:e})"));
    }
    if !pass_iii {
        reasons.push(format!("area bound {area:e} for Lambda exceeds {limit:e}"));
    }
    if rho >= rho0 {
        reasons.push("rho exceeds rho0".to_string());
    }
    Ok(SufficiencyVerdict {
        rho,
        rho0,
        norm,
        mode,
        pass_i,
        margin_i,
        pass_ii,
        margin_ii,
        pass_iii,
        lambda_area_bound: area,
        lambda_area_limit: limit,
        lambda_empty: area == 0.0,
        area_certified: lipschitz.is_some(),
        pass: pass_i && pass_ii && pass_iii && rho < rho0,
        reasons,
        grid: grid.descriptor(),
    })
}

/// Sum of normalized areas of annular-sector cells that may meet `{|φ| ≤ ρ}`.
///
/// A cell is counted when some corner has `|φ| ≤ ρ + L·diam`; every point of the cell is
/// within `diam = Δr + r_out·2π/A` of each corner.
fn lambda_area_overcount(symbol: &Symbol, rho: f64, lipschitz: f64, grid: &DiskGrid) -> f64 {
    let radii = grid.radii();
    let counts = grid.angular_counts();
    let mut bands: Vec<(f64, f64, usize)> = Vec::with_capacity(radii.len() + 1);
    if radii[0] > 0.0 {
        bands.push((0.0, radii[0], counts[0]));
    }
    for i in 0..radii.len() - 1 {
        bands.push((radii[i], radii[i + 1], counts[i].max(counts[i + 1])));
    }
    bands.push((*radii.last().unwrap(), 1.0, *counts.last().unwrap()));

    bands
        .par_iter()
        .map(|&(r_in, r_out, a)| {
            let a = a.max(1);
            let diam = (r_out - r_in) + r_out * 2.0 * PI / a as f64;
            let threshold = rho + lipschitz * diam;
            let corner = |r: f64, k: usize| symbol.eval_unchecked(Complex::from_polar(r, 2.0 * PI * k as f64 / a as f64)).norm();
            let cell_area = (r_out * r_out - r_in * r_in) / a as f64;
            let inner: Vec<f64> = (0..a).map(|k| corner(r_in, k)).collect();
            let outer: Vec<f64> = (0..a).map(|k| corner(r_out, k)).collect();
            (0..a)
                .filter(|&k| {
                    let k1 = (k + 1) % a;
                    [inner[k], inner[k1], outer[k], outer[k1]].iter().any(|&v| v <= threshold)
                })
                .count() as f64
                * cell_area
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

/// `r^{n+1}/√(1 − r)`, the norm bound for multiplication by the indicator of
/// `{|z| < r}` restricted to functions vanishing to order `n` at the origin.
pub fn multiplier_tail_bound(r: f64, n: u32) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("r = {r} outside (0, 1)")));
    }
    Ok(r.powi(n as i32 + 1) / (1.0 - r).sqrt())
}
