//! Exhaustive minimum-distance search over reduced words with branch
//! pruning, exponent fitting for the min-distance sequence, and slope fits
//! for the commutator-tower family.

use crate::quat::{generator, so3_distance, tower_pair, Angles, UnitQuaternion};
use crate::word::{commutator_tower, Letter, TowerSigns, Word, WordError};
use serde::Serialize;
use thiserror::Error;

pub const MAX_SEARCH_LEN: u32 = 16;

/// Distances below this report as exact zero and are excluded from fits.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("word length {got} exceeds the search cap {cap}")]
    Cap { got: u32, cap: u32 },
    #[error(transparent)]
    Word(#[from] WordError),
}

struct DfsState {
    gens: [UnitQuaternion; 4],
    target: UnitQuaternion,
    theta_max: f64,
    n: u32,
    best: f64,
    best_rank: u64,
    best_word: Vec<Letter>,
    rank: u64,
    path: Vec<Letter>,
}

impl DfsState {
    fn leaf(&mut self, q: UnitQuaternion) {
        let d = so3_distance(q, self.target);
        if d < self.best {
            self.best = d;
            self.best_rank = self.rank;
            self.best_word = self.path.clone();
        }
        self.rank += 1;
    }

    fn descend(&mut self, depth: u32, q: UnitQuaternion, prev: Option<Letter>) {
        if depth == self.n {
            self.leaf(q);
            return;
        }
        let remaining = (self.n - depth) as f64;
        // Folded geodesic lower bound: each further letter moves the point by
        // at most theta_max in the quotient metric.
        let geo = q.dot(self.target).abs().min(1.0).acos();
        let reachable = geo - remaining * self.theta_max;
        if reachable > 0.0 {
            let bound = 2.0 * (reachable / 2.0).sin();
            if bound > self.best + 1e-12 {
                self.rank += count_subtree(self.n - depth);
                return;
            }
        }
        for (i, &l) in Letter::ALL.iter().enumerate() {
            if prev.map_or(false, |p| p.inverse() == l) {
                continue;
            }
            self.path.push(l);
            self.descend(depth + 1, q * self.gens[i], Some(l));
            self.path.pop();
        }
    }
}

/// Words below an interior node with `remaining` letters still to place:
/// three valid letters at each further position.
fn count_subtree(remaining: u32) -> u64 {
    3u64.pow(remaining)
}

/// One partition of the length-`n` enumeration: a fixed one- or two-letter
/// prefix, covering `3^(n - prefix_len)` words.
#[derive(Clone)]
struct Partition {
    prefix: Vec<Letter>,
    base_rank: u64,
}

fn partitions(n: u32) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut base = 0u64;
    if n == 1 {
        for &l in &Letter::ALL {
            out.push(Partition { prefix: vec![l], base_rank: base });
            base += 1;
        }
        return out;
    }
    let per = 3u64.pow(n - 2);
    for &l1 in &Letter::ALL {
        for &l2 in &Letter::ALL {
            if l1.inverse() == l2 {
                continue;
            }
            out.push(Partition { prefix: vec![l1, l2], base_rank: base });
            base += per;
        }
    }
    out
}

fn search_partition(
    part: &Partition,
    n: u32,
    point: &Angles,
    target: &UnitQuaternion,
) -> (f64, u64, Vec<Letter>) {
    let gens = [
        generator(Letter::A, point),
        generator(Letter::AInv, point),
        generator(Letter::B, point),
        generator(Letter::BInv, point),
    ];
    let theta_max = gens
        .iter()
        .map(|g| g.w.abs().min(1.0).acos())
        .fold(0.0f64, f64::max);
    let mut state = DfsState {
        gens,
        target: *target,
        theta_max,
        n,
        best: f64::INFINITY,
        best_rank: u64::MAX,
        best_word: Vec::new(),
        rank: part.base_rank,
        path: part.prefix.clone(),
    };
    let mut q = UnitQuaternion::identity();
    for &l in &part.prefix {
        let idx = Letter::ALL.iter().position(|&g| g == l).unwrap();
        q = q * state.gens[idx];
    }
    let depth = part.prefix.len() as u32;
    let prev = part.prefix.last().copied();
    state.descend(depth, q, prev);
    (state.best, state.best_rank, state.best_word)
}

/// Exhaustive minimum of the folded distance over every reduced word of
/// length exactly `n`, ties broken by enumeration order. The search walks
/// the prefix tree with incremental products and prunes subtrees whose
/// geodesic bound cannot beat the current best.
pub fn min_distance(
    n: u32,
    point: &Angles,
    target: &UnitQuaternion,
) -> Result<(Word, f64), SearchError> {
    min_distance_threaded(n, point, target, 1)
}

/// Same search split over prefix partitions; the merge is by (distance,
/// enumeration rank), so the result does not depend on the worker count.
pub fn min_distance_threaded(
    n: u32,
    point: &Angles,
    target: &UnitQuaternion,
    threads: usize,
) -> Result<(Word, f64), SearchError> {
    if n == 0 || n > MAX_SEARCH_LEN {
        return Err(SearchError::Cap { got: n, cap: MAX_SEARCH_LEN });
    }
    let parts = partitions(n);
    let threads = threads.max(1).min(parts.len());
    let results: Vec<(f64, u64, Vec<Letter>)> = if threads == 1 {
        parts
            .iter()
            .map(|p| search_partition(p, n, point, target))
            .collect()
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let mut slots: Vec<Option<(f64, u64, Vec<Letter>)>> = vec![None; parts.len()];
        let slot_ptr = std::sync::Mutex::new(&mut slots);
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for _ in 0..threads {
                let next = &next;
                let parts = &parts;
                handles.push(scope.spawn(move || {
                    let mut local = Vec::new();
                    loop {
                        let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                        if i >= parts.len() {
                            break;
                        }
                        local.push((i, search_partition(&parts[i], n, point, target)));
                    }
                    local
                }));
            }
            for h in handles {
                for (i, res) in h.join().expect("search worker panicked") {
                    slot_ptr.lock().unwrap()[i] = Some(res);
                }
            }
        });
        slots.into_iter().map(|s| s.expect("partition searched")).collect()
    };
    let mut best: Option<(f64, u64, Vec<Letter>)> = None;
    for r in results {
        best = match best {
            None => Some(r),
            Some(b) => {
                if (r.0, r.1) < (b.0, b.1) {
                    Some(r)
                } else {
                    Some(b)
                }
            }
        };
    }
    let (dist, _, letters) = best.expect("nonempty enumeration");
    Ok((Word::from_letters(letters), dist))
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchRow {
    pub n: u32,
    pub min_dist: f64,
    pub word: String,
    pub seconds: f64,
    /// Set when the distance is below the underflow floor and was reported
    /// as zero.
    pub underflow: bool,
}

/// Least-squares line fit; `d = exp(slope)` reinterprets the slope as the
/// base of the `D^(-x)` model.
#[derive(Clone, Debug, Serialize)]
pub struct FitModel {
    pub slope: f64,
    pub intercept: f64,
    pub d: f64,
    pub rss: f64,
    pub used_points: usize,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> FitModel {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return FitModel {
            slope: f64::NAN,
            intercept: f64::NAN,
            d: f64::NAN,
            rss: f64::NAN,
            used_points: xs.len(),
        };
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut rss = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - (slope * x + intercept);
        rss += r * r;
    }
    FitModel {
        slope,
        intercept,
        d: slope.exp(),
        rss,
        used_points: xs.len(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PointExperiment {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub rows: Vec<SearchRow>,
    /// Fit of `-ln d(n)` against `n`.
    pub fit_in_n: FitModel,
    /// Fit of `-ln d(n)` against `n^2`.
    pub fit_in_n_sq: FitModel,
    /// Smallest base for which `d(n) >= envelope^(-n^2)` holds at every
    /// usable length (equality at the tightest one).
    pub envelope_d: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentRecord {
    pub kind: &'static str,
    pub seed: u64,
    pub n_max: u32,
    pub target: String,
    pub points: Vec<PointExperiment>,
}

/// Runs the min-distance search for every length up to `n_max` at each point
/// and fits both exponent models to the decay of the minimum.
pub fn fit_diophantine(
    points: &[Angles],
    n_max: u32,
    target: &UnitQuaternion,
    target_label: &str,
    seed: u64,
    threads: usize,
) -> Result<ExperimentRecord, SearchError> {
    let mut out = ExperimentRecord {
        kind: "search",
        seed,
        n_max,
        target: target_label.to_string(),
        points: Vec::with_capacity(points.len()),
    };
    for p in points {
        let mut rows = Vec::with_capacity(n_max as usize);
        for n in 1..=n_max {
            let started = std::time::Instant::now();
            let (word, dist) = min_distance_threaded(n, p, target, threads)?;
            let seconds = started.elapsed().as_secs_f64();
            let underflow = dist < UNDERFLOW_FLOOR;
            rows.push(SearchRow {
                n,
                min_dist: if underflow { 0.0 } else { dist },
                word: word.to_string(),
                seconds,
                underflow,
            });
        }
        let usable: Vec<&SearchRow> = rows.iter().filter(|r| !r.underflow).collect();
        let xs_n: Vec<f64> = usable.iter().map(|r| r.n as f64).collect();
        let xs_n2: Vec<f64> = usable.iter().map(|r| (r.n as f64).powi(2)).collect();
        let ys: Vec<f64> = usable.iter().map(|r| -r.min_dist.ln()).collect();
        let envelope_d = usable
            .iter()
            .map(|r| (-r.min_dist.ln() / (r.n as f64).powi(2)).exp())
            .fold(0.0f64, f64::max);
        out.points.push(PointExperiment {
            alpha: p.alpha,
            beta: p.beta,
            gamma: p.gamma,
            rows,
            fit_in_n: fit_line(&xs_n, &ys),
            fit_in_n_sq: fit_line(&xs_n2, &ys),
            envelope_d,
        });
    }
    Ok(out)
}

/// Log-log slope of the squared distance to the identity for the level-`k`
/// tower element over an alpha grid at fixed `(beta, gamma)`. The word-level
/// constructor validates the sign choices first, so collapsing sign vectors
/// error out rather than fitting noise.
#[derive(Clone, Debug, Serialize)]
pub struct TowerSlopeReport {
    pub k: u32,
    pub signs: String,
    pub word_length: u64,
    /// Slope of `ln(dist^2)` against `ln(alpha)`.
    pub slope: f64,
    pub intercept: f64,
    pub samples: Vec<(f64, f64)>,
}

pub fn tower_slope(
    k: u32,
    beta: f64,
    gamma: f64,
    alphas: &[f64],
    signs: &TowerSigns,
) -> Result<TowerSlopeReport, SearchError> {
    let word = commutator_tower(k, signs)?;
    let mut samples = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let p = Angles::new(alpha, beta, gamma);
        let (track_a, _) = tower_pair(k, signs, &p);
        samples.push((alpha, track_a.dist_sq_to_identity()));
    }
    let xs: Vec<f64> = samples.iter().map(|(a, _)| a.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|(_, d)| d.ln()).collect();
    let fit = fit_line(&xs, &ys);
    Ok(TowerSlopeReport {
        k,
        signs: signs.to_string(),
        word_length: word.len(),
        slope: fit.slope,
        intercept: fit.intercept,
        samples,
    })
}

/// Geometric alpha grid for slope fits.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (llo + (lhi - llo) * i as f64 / (count - 1).max(1) as f64).exp())
        .collect()
}
