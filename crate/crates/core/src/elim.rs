//! Sylvester resultants over the integer polynomial ring, the epsilon
//! decomposition of circle resultants with height bounds, exact squared
//! integration over [-1, 1], and the three-stage elimination chain ending in
//! a univariate integer polynomial with a positivity certificate.

use crate::trigpoly::{
    derivative_square_poly, ln_bigint, IntPoly, RatPoly, TrigPolyError, Var, NUM_VARS,
};
use crate::word::Word;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ElimError {
    #[error("polynomial is constant in {0}, resultant undefined")]
    ConstantInVar(&'static str),
    #[error("polynomial is constant, nothing to decompose")]
    ConstantInput,
    #[error("word length {got} exceeds the elimination-chain cap {cap}")]
    SizeCap { got: u64, cap: u64 },
    #[error("stage {stage} produced the zero polynomial; elimination degenerate")]
    DegenerateStage { stage: u32 },
    #[error(transparent)]
    TrigPoly(#[from] TrigPolyError),
}

/// The `x^2 + y^2 - 1` relation for a variable pair.
pub fn circle_poly(x: Var, y: Var) -> IntPoly {
    IntPoly::var(x)
        .pow(2)
        .add(&IntPoly::var(y).pow(2))
        .sub(&IntPoly::one())
}

/// Sylvester matrix of two polynomials in the eliminated variable: `s` rows
/// of shifted `p1` coefficients over `r` rows of shifted `p2` coefficients,
/// where `r = deg p1` and `s = deg p2` (true degrees, trailing zero leading
/// coefficients dropped).
pub struct SylvesterMatrix {
    pub entries: Vec<Vec<IntPoly>>,
    pub p1_degree: usize,
    pub p2_degree: usize,
}

impl SylvesterMatrix {
    pub fn new(p1: &IntPoly, p2: &IntPoly, var: Var) -> Result<SylvesterMatrix, ElimError> {
        let c1 = p1.coefficients_in(var);
        let c2 = p2.coefficients_in(var);
        let r = c1.len() - 1;
        let s = c2.len() - 1;
        if r == 0 || s == 0 {
            return Err(ElimError::ConstantInVar(var.name()));
        }
        let dim = r + s;
        let mut entries = vec![vec![IntPoly::zero(); dim]; dim];
        for row in 0..s {
            for (j, coeff) in c1.iter().rev().enumerate() {
                entries[row][row + j] = coeff.clone();
            }
        }
        for row in 0..r {
            for (j, coeff) in c2.iter().rev().enumerate() {
                entries[s + row][row + j] = coeff.clone();
            }
        }
        Ok(SylvesterMatrix {
            entries,
            p1_degree: r,
            p2_degree: s,
        })
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> IntPoly {
        let mut m: Vec<Vec<IntPoly>> = self.entries.clone();
        let n = m.len();
        if n == 0 {
            return IntPoly::one();
        }
        let mut sign = false;
        let mut prev_pivot = IntPoly::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                let Some(swap) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                    return IntPoly::zero();
                };
                m.swap(k, swap);
                sign = !sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = m[i][j].mul(&m[k][k]).sub(&m[i][k].mul(&m[k][j]));
                    m[i][j] = num
                        .div_exact(&prev_pivot)
                        .expect("Bareiss division is exact");
                }
                m[i][k] = IntPoly::zero();
            }
            prev_pivot = m[k][k].clone();
        }
        let det = m[n - 1][n - 1].clone();
        if sign {
            det.neg()
        } else {
            det
        }
    }
}

/// Resultant of two polynomials in `var`: the Sylvester determinant, exact.
/// Vanishes at a point iff the inputs share a root in `var` there.
pub fn resultant(p1: &IntPoly, p2: &IntPoly, var: Var) -> Result<IntPoly, ElimError> {
    Ok(SylvesterMatrix::new(p1, p2, var)?.determinant())
}

/// Resultant of `p` with the circle relation `y^2 + x^2 - 1`, eliminating `y`.
///
/// Splitting `p = E + y O` after rewriting `y^2 -> 1 - x^2` gives
/// `Res_y(p, y^2 + x^2 - 1) = p(x, s) p(x, -s) = E^2 - (1 - x^2) O^2`
/// with `s^2 = 1 - x^2`, which equals the Sylvester determinant and stays
/// cheap when the determinant would be large. An input free of `y` (the
/// circle-reduced derivative polynomials are even in the sine variables, so
/// this is the common case) follows the same product formula and yields
/// `p^2`; a constant input is rejected.
pub fn circle_resultant(p: &IntPoly, x: Var, y: Var) -> Result<IntPoly, ElimError> {
    if p.as_constant().is_some() {
        return Err(ElimError::ConstantInput);
    }
    let reduced = reduce_pair(p, x, y);
    let coeffs = reduced.coefficients_in(y);
    let even = coeffs[0].clone();
    let odd = if coeffs.len() > 1 {
        coeffs[1].clone()
    } else {
        IntPoly::zero()
    };
    let one_minus_x2 = IntPoly::one().sub(&IntPoly::var(x).pow(2));
    Ok(even.mul(&even).sub(&one_minus_x2.mul(&odd.mul(&odd))))
}

/// Rewrites `y^2 -> 1 - x^2` for a single pair, leaving other variables alone.
fn reduce_pair(p: &IntPoly, x: Var, y: Var) -> IntPoly {
    let mut out = IntPoly::zero();
    let one_minus_x2 = IntPoly::one().sub(&IntPoly::var(x).pow(2));
    let max_j = p.deg_var(y) / 2;
    let mut pow = Vec::with_capacity(max_j as usize + 1);
    pow.push(IntPoly::one());
    for j in 1..=max_j {
        pow.push(pow[(j - 1) as usize].mul(&one_minus_x2));
    }
    for (m, c) in p.terms() {
        let e = m.0[y.index()];
        let (j, r) = (e / 2, e % 2);
        let mut rest = *m;
        rest.0[y.index()] = r;
        out = out.add(&pow[j as usize].mul(&IntPoly::monomial(rest, c.clone())));
    }
    out
}

/// The coefficients `(R, R1, R2)` of the quadratic-in-epsilon family of
/// resultants of `(p - eps, y^2 + x^2 - 1)`.
#[derive(Clone, Debug)]
pub struct ResultantDecomposition {
    pub r: IntPoly,
    pub r1: IntPoly,
    pub r2: IntPoly,
    pub x_var: Var,
    pub y_var: Var,
    pub input_y_degree: u32,
    pub heights: [BigInt; 3],
}

impl ResultantDecomposition {
    /// `R + eps R1 + eps^2 R2`, exact.
    pub fn reconstruct(&self, eps: &BigInt) -> IntPoly {
        self.r
            .add(&self.r1.mul_int(eps))
            .add(&self.r2.mul_int(&(eps * eps)))
    }
}

/// Builds the decomposition by exact interpolation of the epsilon family at
/// `eps in {0, 1, -1}`; the family is exactly quadratic because `p - eps`
/// enters two Sylvester rows linearly.
pub fn resultant_decomposition(
    p: &IntPoly,
    x: Var,
    y: Var,
) -> Result<ResultantDecomposition, ElimError> {
    let at = |eps: i64| -> Result<IntPoly, ElimError> {
        circle_resultant(&p.sub(&IntPoly::constant_i64(eps)), x, y)
    };
    let r0 = at(0)?;
    let r_plus = at(1)?;
    let r_minus = at(-1)?;
    let two = BigInt::from(2);
    let r1 = r_plus
        .sub(&r_minus)
        .div_int_exact(&two)
        .expect("odd interpolation part is even");
    let r2 = r_plus
        .add(&r_minus)
        .div_int_exact(&two)
        .expect("even interpolation part is even")
        .sub(&r0);
    let heights = [r0.height(), r1.height(), r2.height()];
    Ok(ResultantDecomposition {
        r: r0,
        r1,
        r2,
        x_var: x,
        y_var: y,
        input_y_degree: p.deg_var(y),
        heights,
    })
}

/// Observed sup-norms of the decomposition pieces on a lattice in the unit
/// box against the bounds `2^r (r H)^{2-i}`.
#[derive(Clone, Debug, Serialize)]
pub struct HeightBoundReport {
    pub observed: [f64; 3],
    pub bound: [f64; 3],
    pub grid: u32,
    pub ok: bool,
}

pub fn verify_height_bounds(
    d: &ResultantDecomposition,
    r: u32,
    h: f64,
    grid: u32,
) -> HeightBoundReport {
    let polys = [&d.r, &d.r1, &d.r2];
    let mut vars: Vec<Var> = Vec::new();
    for v in Var::ALL {
        if polys.iter().any(|p| p.deg_var(v) > 0) {
            vars.push(v);
        }
    }
    let mut observed = [0.0f64; 3];
    let eval_at = |vals: &[f64; NUM_VARS], observed: &mut [f64; 3]| {
        for (i, p) in polys.iter().enumerate() {
            observed[i] = observed[i].max(p.eval_f64(vals).abs());
        }
    };
    let coord = |k: u32| -1.0 + 2.0 * k as f64 / (grid - 1).max(1) as f64;
    if vars.len() <= 3 {
        // Full lattice over the free variables.
        let dims = vars.len();
        let total = (grid as u64).pow(dims as u32);
        for idx in 0..total {
            let mut vals = [0.0; NUM_VARS];
            let mut rem = idx;
            for v in &vars {
                vals[v.index()] = coord((rem % grid as u64) as u32);
                rem /= grid as u64;
            }
            eval_at(&vals, &mut observed);
        }
    } else {
        // More than three free variables: sample grid^3 lattice points with
        // a fixed-seed generator instead of the full product lattice.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..(grid as u64).pow(3) {
            let mut vals = [0.0; NUM_VARS];
            for v in &vars {
                vals[v.index()] = coord(rng.gen_range(0..grid));
            }
            eval_at(&vals, &mut observed);
        }
    }
    let rh = r as f64 * h;
    let base = 2f64.powi(r as i32);
    let bound = [base * rh * rh, base * rh, base];
    let ok = (0..3).all(|i| observed[i] <= bound[i]);
    HeightBoundReport {
        observed,
        bound,
        grid,
        ok,
    }
}

/// `integral over [-1,1] of p^2 d(var)`: the exact rational polynomial in the
/// remaining variables, plus the minimal integer scaling.
#[derive(Clone, Debug)]
pub struct SquaredIntegral {
    pub rational: RatPoly,
    pub scaled: IntPoly,
    pub scale: BigInt,
    pub integrated_var: Var,
}

pub fn integrate_square(p: &IntPoly, var: Var) -> SquaredIntegral {
    let sq = p.mul(p);
    let vi = var.index();
    let mut rational = RatPoly::zero();
    for (m, c) in sq.terms() {
        let e = m.0[vi] as u32;
        if e % 2 == 1 {
            continue;
        }
        let mut rest = *m;
        rest.0[vi] = 0;
        rational.insert(
            rest,
            BigRational::new(c * BigInt::from(2), BigInt::from(e + 1)),
        );
    }
    let (scaled, scale) = rational.scale_to_int();
    // The lcm of {e+1} over even exponents e <= deg divides (deg+1)!.
    debug_assert!({
        let mut fact = BigInt::one();
        for i in 1..=(sq.deg_var(var) + 1) {
            fact *= BigInt::from(i);
        }
        (&fact % &scale).is_zero()
    });
    SquaredIntegral {
        rational,
        scaled,
        scale,
        integrated_var: var,
    }
}

/// Eq-style coefficient bounds for the integrated square, checked on a grid,
/// plus Markov-inequality spot checks (`max |F'| <= deg^2 max |F|`) on random
/// univariate slices. Comparisons run in log space; the factorial bounds
/// overflow doubles quickly.
#[derive(Clone, Debug, Serialize)]
pub struct MarkovReport {
    pub coeff_ln_observed: Vec<f64>,
    pub coeff_ln_bound: Vec<f64>,
    pub coeff_ok: bool,
    pub markov_slices_checked: u32,
    pub markov_ok: bool,
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n as u64).map(|i| (i as f64).ln()).sum()
}

pub fn markov_coefficient_bounds(
    p: &IntPoly,
    v: Var,
    s: u32,
    r: u32,
    h: f64,
    grid: u32,
) -> MarkovReport {
    let coeffs = p.coefficients_in(v);
    let mut rest_vars: Vec<Var> = Vec::new();
    for u in Var::ALL {
        if u != v && p.deg_var(u) > 0 {
            rest_vars.push(u);
        }
    }
    let coord = |k: u32| -1.0 + 2.0 * k as f64 / (grid - 1).max(1) as f64;
    let four_sr = 4 * (s + r);
    let mut coeff_ln_observed = Vec::with_capacity(coeffs.len());
    let mut coeff_ln_bound = Vec::with_capacity(coeffs.len());
    let mut coeff_ok = true;
    for (l, cl) in coeffs.iter().enumerate() {
        let mut max_abs = 0.0f64;
        let dims = rest_vars.len().min(3);
        let total = (grid as u64).pow(dims as u32);
        for idx in 0..total {
            let mut vals = [0.0; NUM_VARS];
            let mut rem = idx;
            for u in rest_vars.iter().take(dims) {
                vals[u.index()] = coord((rem % grid as u64) as u32);
                rem /= grid as u64;
            }
            max_abs = max_abs.max(cl.eval_f64(&vals).abs());
        }
        let ln_obs = max_abs.ln();
        let ln_bound = 3.0 * ln_factorial(four_sr.saturating_sub(l as u32))
            - ln_factorial(l as u32)
            + (r as f64 + 1.0) * 4f64.ln()
            + 4.0 * (r as f64 * h).ln();
        if ln_obs > ln_bound {
            coeff_ok = false;
        }
        coeff_ln_observed.push(ln_obs);
        coeff_ln_bound.push(ln_bound);
    }

    // Markov spot checks on univariate slices of p.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut markov_ok = true;
    let slices = 20u32;
    for _ in 0..slices {
        let active = if rest_vars.is_empty() || rng.gen_bool(0.5) {
            v
        } else {
            rest_vars[rng.gen_range(0..rest_vars.len())]
        };
        let mut vals = [0.0; NUM_VARS];
        for u in Var::ALL {
            if u != active {
                vals[u.index()] = rng.gen_range(-1.0..1.0);
            }
        }
        let deg = p.deg_var(active);
        if deg == 0 {
            continue;
        }
        let dp = p.derivative(active);
        let mut max_f = 0.0f64;
        let mut max_df = 0.0f64;
        for k in 0..2001 {
            let t = -1.0 + 2.0 * k as f64 / 2000.0;
            vals[active.index()] = t;
            max_f = max_f.max(p.eval_f64(&vals).abs());
            max_df = max_df.max(dp.eval_f64(&vals).abs());
        }
        if max_df > (deg as f64).powi(2) * max_f * 1.0001 + 1e-12 {
            markov_ok = false;
        }
    }
    MarkovReport {
        coeff_ln_observed,
        coeff_ln_bound,
        coeff_ok,
        markov_slices_checked: slices,
        markov_ok,
    }
}

const CHAIN_CAP: u64 = 4;

#[derive(Clone, Debug, Serialize)]
pub struct StageRecord {
    pub stage: u32,
    pub eliminated_pair: [&'static str; 2],
    pub input_y_degree: u32,
    pub resultant_degree: u32,
    pub resultant_terms: usize,
    pub resultant_height: String,
    pub integral_scale: String,
    pub integral_degree: u32,
    pub integral_terms: usize,
    pub integral_height: String,
    pub nonzero: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainThresholds {
    pub big_d: f64,
    pub delta: f64,
    pub ln_delta: f64,
    pub rho1: f64,
    pub delta1: f64,
    pub ln_delta1: f64,
    pub rho2: f64,
    pub delta2: f64,
    pub ln_delta2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainRecord {
    pub word: String,
    pub length: u64,
    pub block_count: usize,
    pub constant_shortcut: bool,
    pub p_degree: u32,
    pub p_terms: usize,
    pub p_height: String,
    pub stages: Vec<StageRecord>,
    pub final_degree: u32,
    pub final_terms: usize,
    pub certificate: String,
    pub certificate_positive: bool,
    pub thresholds: ChainThresholds,
}

fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln of eps * (2^(2k) * (k H) + 2^(2k) * (k H)^2 * eps)` with everything in
/// log space; the per-stage threshold shape of the elimination argument.
fn ln_stage_threshold(ln_eps: f64, k: f64, ln_h: f64) -> f64 {
    let ln_kh = k.ln() + ln_h;
    let ln_pow = 2.0 * k * std::f64::consts::LN_2;
    ln_eps + ln_add(ln_pow + ln_kh, ln_pow + 2.0 * ln_kh + ln_eps)
}

fn thresholds(
    n: u64,
    big_d: f64,
    scale1: &BigInt,
    h1: &BigInt,
    scale2: &BigInt,
    h2: &BigInt,
) -> ChainThresholds {
    let nf = n as f64;
    let ln_d = big_d.ln();
    // H = (2^n n)^2, the coefficient bound for the derivative-norm polynomial.
    let ln_h = 2.0 * (nf * std::f64::consts::LN_2 + nf.ln());
    let ln_eps0 = -nf * nf / 3.0 * ln_d;
    let ln_delta = ln_stage_threshold(ln_eps0, nf, ln_h);
    // |P1| <= 2 * scale1 * delta, re-expressed as D^(-rho1 n^2).
    let ln_p1_thresh = 2f64.ln() + ln_bigint(scale1) + ln_delta;
    let rho1 = -ln_p1_thresh / (nf * nf * ln_d);
    let ln_delta1 = ln_stage_threshold(ln_p1_thresh, 16.0 * nf, ln_bigint(h1));
    let ln_p2_thresh = 2f64.ln() + ln_bigint(scale2) + ln_delta1;
    let rho2 = -ln_p2_thresh / (nf * nf * ln_d);
    let ln_delta2 = ln_stage_threshold(ln_p2_thresh, 64.0 * nf, ln_bigint(h2));
    ChainThresholds {
        big_d,
        delta: ln_delta.exp(),
        ln_delta,
        rho1,
        delta1: ln_delta1.exp(),
        ln_delta1,
        rho2,
        delta2: ln_delta2.exp(),
        ln_delta2,
    }
}

/// Runs the whole elimination chain for a word: eliminate the alpha pair,
/// square-integrate, then the beta pair, then the gamma pair, ending in a
/// univariate integer polynomial whose squared integral is the non-vanishing
/// certificate. All polynomial arithmetic is exact; only the recorded
/// thresholds use floating point.
pub fn elimination_chain(word: &Word, big_d: f64) -> Result<ChainRecord, ElimError> {
    let n = word.len();
    if n > CHAIN_CAP {
        return Err(ElimError::SizeCap { got: n, cap: CHAIN_CAP });
    }
    let p = derivative_square_poly(word)?;
    let p_degree = p.total_degree();
    let p_terms = p.num_terms();
    let p_height = p.height().to_string();
    let mut record = ChainRecord {
        word: word.to_string(),
        length: n,
        block_count: word.block_count(),
        constant_shortcut: false,
        p_degree,
        p_terms,
        p_height,
        stages: Vec::new(),
        final_degree: 0,
        final_terms: 0,
        certificate: String::new(),
        certificate_positive: false,
        thresholds: thresholds(
            n,
            big_d,
            &BigInt::one(),
            &BigInt::one(),
            &BigInt::one(),
            &BigInt::one(),
        ),
    };
    if p.as_constant().is_some() {
        record.constant_shortcut = true;
        let c = p.as_constant().unwrap();
        record.certificate = c.to_string();
        record.certificate_positive = c.is_positive();
        return Ok(record);
    }

    let stages: [(Var, Var); 3] = [(Var::Xa, Var::Ya), (Var::Xb, Var::Yb), (Var::Xg, Var::Yg)];
    let mut current = p;
    let mut scales = Vec::new();
    let mut heights = Vec::new();
    let mut final_poly = IntPoly::zero();
    for (i, &(xv, yv)) in stages.iter().enumerate() {
        let stage_no = i as u32 + 1;
        let decomp = resultant_decomposition(&current, xv, yv)?;
        let r = decomp.r.circle_reduce();
        if r.is_zero() {
            return Err(ElimError::DegenerateStage { stage: stage_no });
        }
        if i < 2 {
            let integ = integrate_square(&r, xv);
            record.stages.push(StageRecord {
                stage: stage_no,
                eliminated_pair: [xv.name(), yv.name()],
                input_y_degree: decomp.input_y_degree,
                resultant_degree: r.total_degree(),
                resultant_terms: r.num_terms(),
                resultant_height: r.height().to_string(),
                integral_scale: integ.scale.to_string(),
                integral_degree: integ.scaled.total_degree(),
                integral_terms: integ.scaled.num_terms(),
                integral_height: integ.scaled.height().to_string(),
                nonzero: !integ.scaled.is_zero(),
            });
            if integ.scaled.is_zero() {
                return Err(ElimError::DegenerateStage { stage: stage_no });
            }
            if i == 0 {
                debug_assert!(integ.scaled.total_degree() as u64 <= 16 * n);
            }
            scales.push(integ.scale.clone());
            heights.push(integ.scaled.height());
            current = integ.scaled;
        } else {
            final_poly = r;
            record.stages.push(StageRecord {
                stage: stage_no,
                eliminated_pair: [xv.name(), yv.name()],
                input_y_degree: decomp.input_y_degree,
                resultant_degree: final_poly.total_degree(),
                resultant_terms: final_poly.num_terms(),
                resultant_height: final_poly.height().to_string(),
                integral_scale: "1".to_string(),
                integral_degree: 0,
                integral_terms: 0,
                integral_height: "0".to_string(),
                nonzero: !final_poly.is_zero(),
            });
        }
    }
    if final_poly.is_zero() {
        return Err(ElimError::DegenerateStage { stage: 3 });
    }
    debug_assert!(final_poly.total_degree() as u64 <= 128 * n);
    // Positivity certificate: the squared integral of the final univariate
    // polynomial is a positive rational iff the polynomial is nonzero.
    let cert = integrate_square(&final_poly, Var::Xg);
    let cert_value = cert
        .rational
        .as_constant()
        .expect("final integral is a constant");
    record.final_degree = final_poly.total_degree();
    record.final_terms = final_poly.num_terms();
    record.certificate = cert_value.to_string();
    record.certificate_positive = cert_value.is_positive();
    while scales.len() < 2 {
        scales.push(BigInt::one());
    }
    while heights.len() < 2 {
        heights.push(BigInt::one());
    }
    record.thresholds = thresholds(n, big_d, &scales[0], &heights[0], &scales[1], &heights[1]);
    Ok(record)
}
