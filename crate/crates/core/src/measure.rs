//! Sublevel-set measure estimation on the parameter torus, the 1-D
//! polynomial sublevel bound, and the Taylor-box direction check relating
//! the distance sublevel set to the small-derivative set.

use crate::quat::{
    alpha_derivative, chord_distance, evaluate_word, generator, Angles, UnitQuaternion,
};
use crate::word::{enumerate, count_reduced, Letter, Word};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::TAU;
use thiserror::Error;

const RNG_NAME: &str = "chacha8";

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("union over length {n} needs {words} words, budget allows {budget}")]
    Budget { n: u32, words: u64, budget: u64 },
    #[error("threshold must be positive, got {0}")]
    BadThreshold(f64),
}

/// An estimated Lebesgue measure with full provenance. Torus estimates are
/// normalized to total mass 1; interval estimates carry the absolute measure.
#[derive(Clone, Debug, Serialize)]
pub struct MeasureEstimate {
    pub value: f64,
    pub dimension: u8,
    pub method: &'static str,
    pub resolution: Option<u32>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub rng: Option<&'static str>,
    /// 95% normal-approximation half-width for Monte Carlo estimates.
    pub half_width: Option<f64>,
}

impl MeasureEstimate {
    fn grid(value: f64, dimension: u8, resolution: u32) -> MeasureEstimate {
        MeasureEstimate {
            value,
            dimension,
            method: "grid",
            resolution: Some(resolution),
            samples: None,
            seed: None,
            rng: None,
            half_width: None,
        }
    }

    fn monte_carlo(value: f64, dimension: u8, samples: u64, seed: u64) -> MeasureEstimate {
        let hw = 1.96 * (value * (1.0 - value) / samples as f64).sqrt();
        MeasureEstimate {
            value,
            dimension,
            method: "monte-carlo",
            resolution: None,
            samples: Some(samples),
            seed: Some(seed),
            rng: Some(RNG_NAME),
            half_width: Some(hw),
        }
    }
}

/// Estimation method for torus measures.
#[derive(Clone, Copy, Debug)]
pub enum Method {
    /// Product lattice with `resolution` points per axis.
    Grid { resolution: u32 },
    MonteCarlo { samples: u64, seed: u64 },
}

/// The sublevel bound for a degree-`n` polynomial on an interval:
/// `2 n (n+1)^(1/n) (eps / sup|F|)^(1/n) * |B|`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DmBound {
    pub value: f64,
    /// Set when `eps > sup|F|`; the bound is vacuous and clamps to `|B|`.
    pub vacuous: bool,
}

pub fn dm_bound(n: u32, eps: f64, norm_f: f64, interval_len: f64) -> DmBound {
    if eps > norm_f {
        return DmBound { value: interval_len, vacuous: true };
    }
    let nf = n as f64;
    let value =
        2.0 * nf * (nf + 1.0).powf(1.0 / nf) * (eps / norm_f).powf(1.0 / nf) * interval_len;
    DmBound { value, vacuous: false }
}

/// Measure of `{x in (lo, hi) : inside(x)}` on a uniform grid of `cells`
/// intervals, bisecting to the boundary inside any cell whose endpoints
/// disagree. Deterministic.
fn indicator_line_measure(inside: impl Fn(f64) -> bool, lo: f64, hi: f64, cells: u32) -> f64 {
    let n = cells as usize;
    let step = (hi - lo) / n as f64;
    let mut measure = 0.0;
    let mut left_in = inside(lo);
    for i in 0..n {
        let xl = lo + i as f64 * step;
        let xr = lo + (i + 1) as f64 * step;
        let right_in = inside(xr);
        match (left_in, right_in) {
            (true, true) => measure += xr - xl,
            (false, false) => {}
            _ => {
                let (mut a, mut c, a_in) = (xl, xr, left_in);
                for _ in 0..40 {
                    let mid = 0.5 * (a + c);
                    if inside(mid) == a_in {
                        a = mid;
                    } else {
                        c = mid;
                    }
                }
                let crossing = 0.5 * (a + c);
                if a_in {
                    measure += crossing - xl;
                } else {
                    measure += xr - crossing;
                }
            }
        }
        left_in = right_in;
    }
    measure
}

/// Measure of `{x in B : |f(x)| <= eps}` by a uniform grid with bisection
/// refinement at the boundary crossings. Deterministic.
pub fn sublevel_measure_1d(
    f: impl Fn(f64) -> f64,
    b: (f64, f64),
    eps: f64,
    resolution: u32,
) -> MeasureEstimate {
    assert!(resolution >= 1_000, "resolution below the contract minimum");
    let measure = indicator_line_measure(|x| f(x).abs() <= eps, b.0, b.1, resolution);
    MeasureEstimate::grid(measure, 1, resolution)
}

/// Grid sup-norm with 10x refinement passes around the argmax.
pub fn sup_norm_1d(f: impl Fn(f64) -> f64, b: (f64, f64), resolution: u32) -> f64 {
    let (mut lo, mut hi) = b;
    let mut best = 0.0f64;
    let mut res = resolution.max(10);
    for _ in 0..4 {
        let step = (hi - lo) / res as f64;
        let mut arg = lo;
        for i in 0..=res {
            let x = lo + i as f64 * step;
            let v = f(x).abs();
            if v > best {
                best = v;
                arg = x;
            }
        }
        lo = (arg - step).max(b.0);
        hi = (arg + step).min(b.1);
        res = 10 * res.min(1000);
    }
    best
}

#[derive(Clone, Debug, Serialize)]
pub struct DmCheck {
    pub degree: u32,
    pub eps: f64,
    pub sup_norm: f64,
    pub measured: f64,
    pub bound: DmBound,
    pub ok: bool,
}

/// Tests the sublevel inequality for one polynomial (ascending coefficients)
/// on an interval. The sup-norm is a grid estimate; underestimating it only
/// enlarges the bound, so the check stays sound.
pub fn check_dm_lemma(coeffs: &[f64], b: (f64, f64), eps: f64, resolution: u32) -> DmCheck {
    let degree = coeffs
        .iter()
        .rposition(|&c| c != 0.0)
        .unwrap_or(0) as u32;
    let eval = |x: f64| {
        let mut acc = 0.0;
        for &c in coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    };
    let sup = sup_norm_1d(eval, b, 10_000);
    let measured = sublevel_measure_1d(eval, b, eps, resolution).value;
    let bound = dm_bound(degree, eps, sup, b.1 - b.0);
    DmCheck {
        degree,
        eps,
        sup_norm: sup,
        measured,
        bound,
        ok: measured <= bound.value,
    }
}

/// Sublevel-set description: parameters where the word sits within
/// `threshold` of the target in the plain quaternion 4-norm (the fixed-lift
/// distance of the union construction; both lifts of a target can be probed
/// by passing each separately).
#[derive(Clone, Debug)]
pub struct SublevelSpec {
    pub word: Word,
    pub target: UnitQuaternion,
    pub threshold: f64,
}

impl SublevelSpec {
    pub fn new(word: Word, target: UnitQuaternion, threshold: f64) -> Result<SublevelSpec, MeasureError> {
        if threshold <= 0.0 {
            return Err(MeasureError::BadThreshold(threshold));
        }
        Ok(SublevelSpec { word, target, threshold })
    }
}

/// Torus measure on a `resolution`-per-axis grid. The beta/gamma axes form
/// a product lattice; the alpha fiber is measured as a refined line (cells
/// plus bisection at indicator boundaries), which removes the 1/resolution
/// value granularity of a plain point count.
fn torus_grid_measure(resolution: u32, hit: impl Fn(&Angles) -> bool) -> f64 {
    let r = resolution as usize;
    let step = TAU / r as f64;
    let mut total = 0.0;
    for j in 0..r {
        let beta = j as f64 * step;
        for k in 0..r {
            let gamma = k as f64 * step;
            total += indicator_line_measure(
                |alpha| hit(&Angles { alpha, beta, gamma }),
                0.0,
                TAU,
                resolution,
            );
        }
    }
    total / (TAU * (r * r) as f64)
}

/// Plain point-count lattice measure; used where per-word hit counts must
/// stay exactly consistent with the union indicator.
fn torus_lattice_measure(resolution: u32, mut hit: impl FnMut(&Angles) -> bool) -> f64 {
    let r = resolution as usize;
    let step = TAU / r as f64;
    let mut count = 0u64;
    for i in 0..r {
        let alpha = i as f64 * step;
        for j in 0..r {
            let beta = j as f64 * step;
            for k in 0..r {
                let gamma = k as f64 * step;
                if hit(&Angles { alpha, beta, gamma }) {
                    count += 1;
                }
            }
        }
    }
    count as f64 / (r * r * r) as f64
}

fn torus_mc_measure(samples: u64, seed: u64, mut hit: impl FnMut(&Angles) -> bool) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut count = 0u64;
    for _ in 0..samples {
        let p = Angles {
            alpha: rng.gen_range(0.0..TAU),
            beta: rng.gen_range(0.0..TAU),
            gamma: rng.gen_range(0.0..TAU),
        };
        if hit(&p) {
            count += 1;
        }
    }
    count as f64 / samples as f64
}

/// Normalized measure of the set where the word is within `threshold` of the
/// target in the plain 4-norm.
pub fn distance_sublevel_measure(spec: &SublevelSpec, method: Method) -> MeasureEstimate {
    let hit = |p: &Angles| {
        chord_distance(evaluate_word(&spec.word, p), spec.target) <= spec.threshold
    };
    match method {
        Method::Grid { resolution } => {
            MeasureEstimate::grid(torus_grid_measure(resolution, hit), 3, resolution)
        }
        Method::MonteCarlo { samples, seed } => {
            MeasureEstimate::monte_carlo(torus_mc_measure(samples, seed, hit), 3, samples, seed)
        }
    }
}

/// Normalized measure of the set where the squared alpha-derivative norm is
/// at most `threshold`.
pub fn derivative_sublevel_measure(
    word: &Word,
    threshold: f64,
    method: Method,
) -> MeasureEstimate {
    let hit = |p: &Angles| alpha_derivative(word, p).norm_sq() <= threshold;
    match method {
        Method::Grid { resolution } => {
            MeasureEstimate::grid(torus_grid_measure(resolution, hit), 3, resolution)
        }
        Method::MonteCarlo { samples, seed } => {
            MeasureEstimate::monte_carlo(torus_mc_measure(samples, seed, hit), 3, samples, seed)
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct UnionBudget {
    pub max_words: u64,
}

impl Default for UnionBudget {
    fn default() -> UnionBudget {
        // Covers every length up to 8.
        UnionBudget { max_words: 10_000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UnionMeasure {
    pub union: MeasureEstimate,
    /// Sum of the per-word measures (the union-bound summand).
    pub sum_individual: f64,
    pub threshold: f64,
    pub word_count: u64,
}

/// Walks the reduced-word prefix tree once per sample point, recording both
/// the union indicator (min distance over words) and per-word hits.
struct PrefixWalker {
    n: u32,
    words: u64,
}

impl PrefixWalker {
    fn visit(
        &self,
        p: &Angles,
        target: &UnitQuaternion,
        threshold: f64,
        hits: &mut [u64],
    ) -> bool {
        fn descend(
            depth: u32,
            n: u32,
            q: UnitQuaternion,
            prev: Option<Letter>,
            gens: &[UnitQuaternion; 4],
            target: &UnitQuaternion,
            threshold: f64,
            hits: &mut [u64],
            index: &mut usize,
            any: &mut bool,
        ) {
            if depth == n {
                if chord_distance(q, *target) <= threshold {
                    hits[*index] += 1;
                    *any = true;
                }
                *index += 1;
                return;
            }
            for (i, &l) in Letter::ALL.iter().enumerate() {
                if prev.map_or(false, |p| p.inverse() == l) {
                    continue;
                }
                descend(
                    depth + 1,
                    n,
                    q * gens[i],
                    Some(l),
                    gens,
                    target,
                    threshold,
                    hits,
                    index,
                    any,
                );
            }
        }
        let gens = [
            generator(Letter::A, p),
            generator(Letter::AInv, p),
            generator(Letter::B, p),
            generator(Letter::BInv, p),
        ];
        let mut any = false;
        let mut index = 0usize;
        descend(
            0,
            self.n,
            UnitQuaternion::identity(),
            None,
            &gens,
            target,
            threshold,
            hits,
            &mut index,
            &mut any,
        );
        debug_assert_eq!(index as u64, self.words);
        any
    }
}

/// Measure of the union over all length-`n` words of the threshold
/// `D^(-n^2)` sublevel sets, together with the sum of the individual
/// measures.
pub fn union_sublevel_measure(
    n: u32,
    big_d: f64,
    target: UnitQuaternion,
    method: Method,
    budget: UnionBudget,
) -> Result<UnionMeasure, MeasureError> {
    let words = count_reduced(n);
    if words > budget.max_words {
        return Err(MeasureError::Budget { n, words, budget: budget.max_words });
    }
    let threshold = big_d.powf(-((n as f64) * (n as f64)));
    let walker = PrefixWalker { n, words };
    let mut hits = vec![0u64; words as usize];
    let (union_est, total) = match method {
        Method::Grid { resolution } => {
            let value = torus_lattice_measure(resolution, |p| {
                walker.visit(p, &target, threshold, &mut hits)
            });
            let total = (resolution as u64).pow(3);
            (MeasureEstimate::grid(value, 3, resolution), total)
        }
        Method::MonteCarlo { samples, seed } => {
            let value = torus_mc_measure(samples, seed, |p| {
                walker.visit(p, &target, threshold, &mut hits)
            });
            (
                MeasureEstimate::monte_carlo(value, 3, samples, seed),
                samples,
            )
        }
    };
    let sum_individual = hits.iter().map(|&h| h as f64 / total as f64).sum();
    Ok(UnionMeasure {
        union: union_est,
        sum_individual,
        threshold,
        word_count: words,
    })
}

/// Taylor-box comparison: on the complement of the small-derivative set the
/// distance sublevel set is covered by intervals of length
/// `sqrt(t_d)/(2 n^2)` each holding at most `(8/3) t / sqrt(t_d)` of it, so
/// its normalized measure is at most `(16/3) n^2 t / t_d`; the check allows
/// a factor-2 slack on top.
#[derive(Clone, Debug, Serialize)]
pub struct TaylorBoxReport {
    pub measured: f64,
    pub bound: f64,
    pub ok: bool,
}

pub fn taylor_box_check(
    word: &Word,
    target: UnitQuaternion,
    t_dist: f64,
    t_deriv: f64,
    resolution: u32,
) -> TaylorBoxReport {
    let n = word.len() as f64;
    let measured = torus_grid_measure(resolution, |p| {
        chord_distance(evaluate_word(word, p), target) <= t_dist
            && alpha_derivative(word, p).norm_sq() > t_deriv
    });
    let bound = (2.0 * (16.0 / 3.0) * n * n * t_dist / t_deriv).min(1.0);
    TaylorBoxReport {
        measured,
        bound,
        ok: measured <= bound,
    }
}

/// All reduced words of length exactly `n` (helper for experiments that want
/// the list rather than the stream).
pub fn all_words(n: u32) -> Vec<Word> {
    enumerate(n).collect()
}
