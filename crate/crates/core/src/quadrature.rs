//! Randomized quasi-Monte Carlo integration over a [`Domain`], usually a
//! [`RegionSpec`].
//!
//! A replicate is one digitally shifted Sobol point set. Points are mapped
//! into the domain either through the static bounding box (weight = box
//! volume) or through the nested bracket chain, where coordinate `i` is
//! uniform on `[lo(t<i), hi(t<i))` and the weight is the product of bracket
//! widths. Either way the membership predicate is the indicator. The
//! estimate is the mean over replicates, and the standard error is the
//! replicate standard deviation over `√R`.
//!
//! Replicates run in parallel; each one sums its points sequentially and the
//! replicate results are combined in index order, so the value does not
//! depend on scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::regions::RegionSpec;
use crate::sobol::Sobol;

/// What the integrator needs to know about a region.
pub trait Domain: Sync {
    fn dim(&self) -> usize;
    /// A box containing the region.
    fn bounds(&self) -> &[(f64, f64)];
    /// Bracket of coordinate `i` given the earlier coordinates.
    fn bracket(&self, i: usize, prefix: &[f64]) -> (f64, f64);
    fn contains(&self, t: &[f64]) -> bool;

    fn box_volume(&self) -> f64 {
        self.bounds()
            .iter()
            .map(|(a, b)| (b - a).max(0.0))
            .product()
    }
}

impl Domain for RegionSpec {
    fn dim(&self) -> usize {
        self.dim
    }

    fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    fn bracket(&self, i: usize, prefix: &[f64]) -> (f64, f64) {
        RegionSpec::bracket(self, i, prefix)
    }

    fn contains(&self, t: &[f64]) -> bool {
        self.member(t)
    }
}

/// An axis-aligned box `∏ [aᵢ, bᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rectangle(pub Vec<(f64, f64)>);

impl Domain for Rectangle {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn bounds(&self) -> &[(f64, f64)] {
        &self.0
    }

    fn bracket(&self, i: usize, _: &[f64]) -> (f64, f64) {
        self.0[i]
    }

    fn contains(&self, t: &[f64]) -> bool {
        t.iter().zip(&self.0).all(|(x, (a, b))| a <= x && x < b)
    }
}

pub const MIN_BUDGET: u64 = 10_000;
pub const REPLICATES: usize = 16;
pub const STRATA_PER_AXIS: usize = 16;
const MIN_POINTS_PER_CELL: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    PlainQmc,
    #[default]
    Stratified,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::PlainQmc => "plain",
            Mode::Stratified => "stratified",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" | "plain_qmc" => Ok(Mode::PlainQmc),
            "stratified" => Ok(Mode::Stratified),
            _ => Err(Error::Parse(format!(
                "unknown mode {s:?} (plain|stratified)"
            ))),
        }
    }
}

/// How unit-cube points are carried into the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// Uniform on the static bounding box.
    Box,
    /// Uniform on each coordinate's bracket given the earlier coordinates.
    #[default]
    Nested,
    /// Log-uniform on each bracket (density ∝ 1/t), which cancels the
    /// `1/tᵢ` factors shared by every loss integrand.
    NestedLog,
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sampler::Box => "box",
            Sampler::Nested => "nested",
            Sampler::NestedLog => "nested-log",
        })
    }
}

impl FromStr for Sampler {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "box" => Ok(Sampler::Box),
            "nested" => Ok(Sampler::Nested),
            "nested-log" => Ok(Sampler::NestedLog),
            _ => Err(Error::Parse(format!(
                "unknown sampler {s:?} (box|nested|nested-log)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub std_err: f64,
    pub samples: u64,
    pub mode: Mode,
    pub seed: u64,
}

impl IntegralEstimate {
    pub fn zero(mode: Mode, seed: u64) -> Self {
        Self {
            value: 0.0,
            std_err: 0.0,
            samples: 0,
            mode,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrationOptions {
    pub mode: Mode,
    pub sampler: Sampler,
    pub replicates: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Stratified,
            sampler: Sampler::Nested,
            replicates: REPLICATES,
        }
    }
}

impl IntegrationOptions {
    pub fn with_mode(mode: Mode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }
}

/// Maps a unit-cube point to the domain, returning the sampling weight.
/// A zero weight means the point fell into an empty bracket.
#[inline]
fn map_point<D: Domain + ?Sized>(spec: &D, sampler: Sampler, u: &[f64], t: &mut [f64]) -> f64 {
    match sampler {
        Sampler::Box => {
            for ((ti, ui), (a, b)) in t.iter_mut().zip(u).zip(spec.bounds()) {
                *ti = a + ui * (b - a);
            }
            spec.box_volume()
        }
        Sampler::Nested => {
            let mut w = 1.0;
            for i in 0..spec.dim() {
                let (a, b) = spec.bracket(i, &t[..i]);
                if !(b > a) {
                    return 0.0;
                }
                t[i] = a + u[i] * (b - a);
                w *= b - a;
            }
            w
        }
        Sampler::NestedLog => {
            let mut w = 1.0;
            for i in 0..spec.dim() {
                let (a, b) = spec.bracket(i, &t[..i]);
                if !(b > a) {
                    return 0.0;
                }
                let span = (b / a).ln();
                let x = a * (span * u[i]).exp();
                // rounding can push exp() a hair past the open upper end
                t[i] = if x < b { x } else { b - (b - a) * f64::EPSILON };
                w *= t[i] * span;
            }
            w
        }
    }
}

fn replicate_shift(seed: u64, replicate: usize, dim: usize) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    (0..dim).map(|_| rng.next_u32()).collect()
}

/// Cells of the stratification grid over the first two unit coordinates.
#[derive(Debug, Clone, Copy)]
struct Grid {
    per_axis: usize,
    axes: usize,
}

impl Grid {
    fn new(dim: usize) -> Self {
        Self {
            per_axis: STRATA_PER_AXIS,
            axes: dim.min(2),
        }
    }

    fn cells(&self) -> usize {
        self.per_axis.pow(self.axes as u32)
    }

    #[inline]
    fn place(&self, cell: usize, u: &mut [f64]) {
        let k = self.per_axis as f64;
        let mut c = cell;
        for x in u[..self.axes].iter_mut().rev() {
            *x = ((c % self.per_axis) as f64 + *x) / k;
            c /= self.per_axis;
        }
    }
}

/// One weighted sample `w · f(t) · 1[t ∈ spec]`.
#[inline]
fn sample<D: Domain + ?Sized, F>(
    spec: &D,
    f: &F,
    sampler: Sampler,
    u: &[f64],
    t: &mut [f64],
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let w = map_point(spec, sampler, u, t);
    if w == 0.0 || !spec.contains(t) {
        return Ok(0.0);
    }
    let y = f(t);
    if !y.is_finite() {
        return Err(Error::NonFiniteSample { point: t.to_vec() });
    }
    Ok(w * y)
}

// Plain replicate: mean over the first n shifted Sobol points.
fn run_plain<D: Domain + ?Sized, F>(
    spec: &D,
    f: &F,
    n: u64,
    shift: &[u32],
    sampler: Sampler,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut seq = Sobol::new(spec.dim(), shift);
    let mut u = vec![0.0; spec.dim()];
    let mut t = vec![0.0; spec.dim()];
    let mut acc = 0.0;
    for _ in 0..n {
        seq.next_into(&mut u);
        acc += sample(spec, f, sampler, &u, &mut t)?;
    }
    Ok(acc / n as f64)
}

// Stratified replicate: cell `h` takes the next `alloc[h]` points of one
// shifted sequence, rescaled into the cell along the first two axes; the cell
// means are averaged with equal cell volume. Also returns the per-cell second
// moments.
fn run_stratified<D: Domain + ?Sized, F>(
    spec: &D,
    f: &F,
    alloc: &[u64],
    shift: &[u32],
    sampler: Sampler,
) -> Result<(f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let grid = Grid::new(spec.dim());
    let mut u = vec![0.0; spec.dim()];
    let mut t = vec![0.0; spec.dim()];
    let mut total = 0.0;
    let mut moments = Vec::with_capacity(alloc.len());
    let mut seq = Sobol::new(spec.dim(), shift);
    for (cell, &n) in alloc.iter().enumerate() {
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            seq.next_into(&mut u);
            grid.place(cell, &mut u);
            let y = sample(spec, f, sampler, &u, &mut t)?;
            s1 += y;
            s2 += y * y;
        }
        total += s1 / n as f64;
        moments.push(s2 / n as f64);
    }
    Ok((total / alloc.len() as f64, moments))
}

/// Neyman-style allocation: cell `h` gets points in proportion to the root
/// of its pilot second moment, with a floor so that no cell is skipped. The
/// floor shrinks when `points` cannot cover it.
fn allocate(moments: &[f64], points: u64) -> Vec<u64> {
    let cells = moments.len() as u64;
    let floor = MIN_POINTS_PER_CELL.min(points / cells).max(1);
    let free = points.saturating_sub(floor * cells);
    let roots: Vec<f64> = moments.iter().map(|m| m.sqrt()).collect();
    let sum: f64 = roots.iter().sum();
    roots
        .iter()
        .map(|r| {
            let share = if sum > 0.0 {
                r / sum
            } else {
                1.0 / cells as f64
            };
            floor + (share * free as f64).floor() as u64
        })
        .collect()
}

/// Estimates `∫_spec f` with about `budget` integrand evaluations split
/// across independent replicates.
///
/// In stratified mode an eighth of the budget goes to a pilot pass (its own
/// shifts, equal allocation) that fixes the per-cell allocation of the
/// replicates; the pilot does not enter the estimate.
pub fn integrate<D: Domain + ?Sized, F>(
    spec: &D,
    f: &F,
    budget: u64,
    seed: u64,
    opts: &IntegrationOptions,
) -> Result<IntegralEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if budget < MIN_BUDGET {
        return Err(Error::BudgetTooSmall {
            budget,
            min: MIN_BUDGET,
        });
    }
    let reps = opts.replicates.max(2);
    let (values, samples) = match opts.mode {
        Mode::PlainQmc => {
            let per = budget / reps as u64;
            let values = (0..reps)
                .into_par_iter()
                .map(|r| {
                    run_plain(
                        spec,
                        f,
                        per,
                        &replicate_shift(seed, r, spec.dim()),
                        opts.sampler,
                    )
                })
                .collect::<Vec<Result<f64>>>();
            (values, per * reps as u64)
        }
        Mode::Stratified => {
            let cells = Grid::new(spec.dim()).cells();
            let pilot_budget = budget / 8;
            let pilot_per_cell = (pilot_budget / cells as u64).max(1);
            let pilot_shift = replicate_shift(seed, reps, spec.dim());
            let (_, moments) = run_stratified(
                spec,
                f,
                &vec![pilot_per_cell; cells],
                &pilot_shift,
                opts.sampler,
            )?;
            let main = (budget - pilot_budget) / reps as u64;
            let alloc = allocate(&moments, main);
            let used: u64 = alloc.iter().sum::<u64>() * reps as u64 + pilot_per_cell * cells as u64;
            let values = (0..reps)
                .into_par_iter()
                .map(|r| {
                    run_stratified(
                        spec,
                        f,
                        &alloc,
                        &replicate_shift(seed, r, spec.dim()),
                        opts.sampler,
                    )
                    .map(|(v, _)| v)
                })
                .collect::<Vec<Result<f64>>>();
            (values, used)
        }
    };
    let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
    let (mean, std_err) = mean_and_stderr(&values);
    Ok(IntegralEstimate {
        value: mean,
        std_err,
        samples,
        mode: opts.mode,
        seed,
    })
}

/// Mean and standard error of the mean, summed in index order.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::default_params;
    use crate::regions::{domain, DomainName};

    #[test]
    fn rejects_small_budget() {
        let spec = domain(&default_params(), DomainName::SC);
        let err = integrate(&spec, &|_| 1.0, 9_999, 1, &IntegrationOptions::default());
        assert!(matches!(err, Err(Error::BudgetTooSmall { .. })));
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let spec = domain(&default_params(), DomainName::SC);
        let err = integrate(
            &spec,
            &|_| f64::NAN,
            20_000,
            1,
            &IntegrationOptions::default(),
        );
        assert!(matches!(err, Err(Error::NonFiniteSample { .. })));
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let spec = domain(&default_params(), DomainName::SC2);
        let f = |t: &[f64]| 1.0 / (t[0] * t[1] * t[2]);
        for mode in [Mode::PlainQmc, Mode::Stratified] {
            let o = IntegrationOptions::with_mode(mode);
            let a = integrate(&spec, &f, 50_000, 9, &o).unwrap();
            let b = integrate(&spec, &f, 50_000, 9, &o).unwrap();
            assert_eq!(a.value.to_bits(), b.value.to_bits());
            assert_eq!(a.std_err.to_bits(), b.std_err.to_bits());
        }
    }

    #[test]
    fn samplers_agree_on_volume() {
        let spec = domain(&default_params(), DomainName::SC);
        let nested =
            integrate(&spec, &|_| 1.0, 400_000, 3, &IntegrationOptions::default()).unwrap();
        let boxed = integrate(
            &spec,
            &|_| 1.0,
            400_000,
            3,
            &IntegrationOptions {
                sampler: Sampler::Box,
                ..Default::default()
            },
        )
        .unwrap();
        let tol = 4.0 * (nested.std_err.powi(2) + boxed.std_err.powi(2)).sqrt() + 1e-6;
        assert!((nested.value - boxed.value).abs() < tol);
    }

    #[test]
    fn rectangle_polynomial() {
        let r = Rectangle(vec![(0.0, 2.0), (1.0, 3.0), (0.5, 1.0)]);
        let f = |t: &[f64]| t[0] * t[1] + t[2];
        // ∫ = 2·4·0.5 + 2·2·0.375
        let exact = 5.5;
        for mode in [Mode::PlainQmc, Mode::Stratified] {
            let e = integrate(&r, &f, 100_000, 5, &IntegrationOptions::with_mode(mode)).unwrap();
            assert!((e.value - exact).abs() < 1e-4, "{mode}: {}", e.value);
            assert!(e.std_err < 1e-3, "{mode}: {}", e.std_err);
        }
    }

    #[test]
    fn allocation_respects_floor_and_total() {
        let m = [0.0, 1.0, 4.0, 0.0];
        let a = allocate(&m, 1_000);
        assert!(a.iter().all(|&n| n >= MIN_POINTS_PER_CELL));
        assert!(a.iter().sum::<u64>() <= 1_000);
        assert!(a[2] > a[1] && a[1] > a[0]);
        assert_eq!(allocate(&[0.0; 3], 300), vec![100; 3]);
        let tight = allocate(&[1.0; 256], 600);
        assert!(tight.iter().all(|&n| n == 2));
    }

    #[test]
    fn mean_and_stderr_basic() {
        let (m, s) = mean_and_stderr(&[1.0, 1.0, 1.0]);
        assert_eq!((m, s), (1.0, 0.0));
        let (m, s) = mean_and_stderr(&[0.0, 2.0]);
        assert_eq!(m, 1.0);
        assert!((s - 1.0).abs() < 1e-15);
    }
}
