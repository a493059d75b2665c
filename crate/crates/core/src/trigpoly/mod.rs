//! Symbolic side of word evaluation: multiple-angle expansions, quaternion
//! polynomials, the integer polynomial representing the squared
//! alpha-derivative norm, and the leading-frequency coefficient that
//! certifies openness (freeness) of the word map.

pub mod poly;

pub use poly::{bigint_to_f64, ln_bigint, IntPoly, Monomial, RatPoly, Var, NUM_VARS};

use crate::quat::{evaluate_word, Angles, Tangent};
use crate::word::Word;
use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrigPolyError {
    #[error("operation requires a nonempty word")]
    EmptyWord,
    #[error("word has no A-letters, so no alpha frequency to extract")]
    NoAlphaLetters,
}

/// `(cos k*t, sin k*t)` as integer polynomials in `(x, y) = (cos t, sin t)`,
/// by the de Moivre recurrence; negative `k` by parity.
pub fn multiple_angle(k: i64, x: Var, y: Var) -> (IntPoly, IntPoly) {
    let (mut c, mut s) = (IntPoly::one(), IntPoly::zero());
    let xv = IntPoly::var(x);
    let yv = IntPoly::var(y);
    for _ in 0..k.unsigned_abs() {
        let nc = c.mul(&xv).sub(&s.mul(&yv));
        let ns = s.mul(&xv).add(&c.mul(&yv));
        c = nc;
        s = ns;
    }
    if k < 0 {
        s = s.neg();
    }
    (c, s)
}

/// Four-component symbolic quaternion.
#[derive(Clone, Debug, PartialEq)]
pub struct QuatPoly {
    pub w: IntPoly,
    pub x: IntPoly,
    pub y: IntPoly,
    pub z: IntPoly,
}

impl QuatPoly {
    pub fn one() -> QuatPoly {
        QuatPoly {
            w: IntPoly::one(),
            x: IntPoly::zero(),
            y: IntPoly::zero(),
            z: IntPoly::zero(),
        }
    }

    pub fn zero() -> QuatPoly {
        QuatPoly {
            w: IntPoly::zero(),
            x: IntPoly::zero(),
            y: IntPoly::zero(),
            z: IntPoly::zero(),
        }
    }

    pub fn mul(&self, o: &QuatPoly) -> QuatPoly {
        QuatPoly {
            w: self
                .w
                .mul(&o.w)
                .sub(&self.x.mul(&o.x))
                .sub(&self.y.mul(&o.y))
                .sub(&self.z.mul(&o.z)),
            x: self
                .w
                .mul(&o.x)
                .add(&self.x.mul(&o.w))
                .add(&self.y.mul(&o.z))
                .sub(&self.z.mul(&o.y)),
            y: self
                .w
                .mul(&o.y)
                .sub(&self.x.mul(&o.z))
                .add(&self.y.mul(&o.w))
                .add(&self.z.mul(&o.x)),
            z: self
                .w
                .mul(&o.z)
                .add(&self.x.mul(&o.y))
                .sub(&self.y.mul(&o.x))
                .add(&self.z.mul(&o.w)),
        }
    }

    pub fn add(&self, o: &QuatPoly) -> QuatPoly {
        QuatPoly {
            w: self.w.add(&o.w),
            x: self.x.add(&o.x),
            y: self.y.add(&o.y),
            z: self.z.add(&o.z),
        }
    }

    /// `w^2 + x^2 + y^2 + z^2`.
    pub fn norm_sq(&self) -> IntPoly {
        self.w
            .mul(&self.w)
            .add(&self.x.mul(&self.x))
            .add(&self.y.mul(&self.y))
            .add(&self.z.mul(&self.z))
    }

    pub fn eval_f64(&self, vals: &[f64; NUM_VARS]) -> [f64; 4] {
        [
            self.w.eval_f64(vals),
            self.x.eval_f64(vals),
            self.y.eval_f64(vals),
            self.z.eval_f64(vals),
        ]
    }

    pub fn max_deg_var(&self, v: Var) -> u32 {
        self.w
            .deg_var(v)
            .max(self.x.deg_var(v))
            .max(self.y.deg_var(v))
            .max(self.z.deg_var(v))
    }
}

/// Variable values `(cos a, sin a, cos b, sin b, cos g, sin g)` at a point.
pub fn torus_values(p: &Angles) -> [f64; NUM_VARS] {
    [
        p.alpha.cos(),
        p.alpha.sin(),
        p.beta.cos(),
        p.beta.sin(),
        p.gamma.cos(),
        p.gamma.sin(),
    ]
}

/// The factor `A^s` as a symbolic quaternion.
fn a_block(s: i64) -> QuatPoly {
    let (c, sn) = multiple_angle(s, Var::Xa, Var::Ya);
    QuatPoly {
        w: c,
        x: sn,
        y: IntPoly::zero(),
        z: IntPoly::zero(),
    }
}

/// The factor `B^r`: `cos(r b) + sin(r b)(i cos g + j sin g)`.
fn b_block(r: i64) -> QuatPoly {
    let (c, sn) = multiple_angle(r, Var::Xb, Var::Yb);
    QuatPoly {
        w: c,
        x: sn.mul(&IntPoly::var(Var::Xg)),
        y: sn.mul(&IntPoly::var(Var::Yg)),
        z: IntPoly::zero(),
    }
}

/// `d/dalpha A^s = s (-sin s a, cos s a, 0, 0)`.
fn a_block_derivative(s: i64) -> QuatPoly {
    let (c, sn) = multiple_angle(s, Var::Xa, Var::Ya);
    QuatPoly {
        w: sn.mul_i64(-s),
        x: c.mul_i64(s),
        y: IntPoly::zero(),
        z: IntPoly::zero(),
    }
}

/// Symbolic product of a word's block factors; integer coefficients, each
/// variable's degree at most the word length.
pub fn symbolic_word(word: &Word) -> QuatPoly {
    let mut acc = QuatPoly::one();
    for &(a, b) in word.blocks() {
        if a != 0 {
            acc = acc.mul(&a_block(a));
        }
        if b != 0 {
            acc = acc.mul(&b_block(b));
        }
    }
    acc
}

/// Symbolic `d/dalpha` of the word product (product rule over the A-blocks).
pub fn symbolic_alpha_derivative(word: &Word) -> QuatPoly {
    // Factor list with the A-exponent tagged where a derivative applies.
    let mut factors: Vec<(QuatPoly, Option<QuatPoly>)> = Vec::new();
    for &(a, b) in word.blocks() {
        if a != 0 {
            factors.push((a_block(a), Some(a_block_derivative(a))));
        }
        if b != 0 {
            factors.push((b_block(b), None));
        }
    }
    let n = factors.len();
    let mut prefix = vec![QuatPoly::one()];
    for k in 0..n {
        let next = prefix[k].mul(&factors[k].0);
        prefix.push(next);
    }
    let mut suffix = vec![QuatPoly::one(); n + 1];
    for k in (0..n).rev() {
        suffix[k] = factors[k].0.mul(&suffix[k + 1]);
    }
    let mut acc = QuatPoly::zero();
    for (k, (_, d)) in factors.iter().enumerate() {
        if let Some(d) = d {
            acc = acc.add(&prefix[k].mul(d).mul(&suffix[k + 1]));
        }
    }
    acc
}

/// Integer polynomial whose value at
/// `(cos a, sin a, cos b, sin b, cos g, sin g)` equals the squared norm of
/// the alpha-derivative of the word. Returned in circle-reduced normal form;
/// total degree at most `2n + 2m`.
pub fn derivative_square_poly(word: &Word) -> Result<IntPoly, TrigPolyError> {
    if word.is_empty() {
        return Err(TrigPolyError::EmptyWord);
    }
    Ok(symbolic_alpha_derivative(word).norm_sq().circle_reduce())
}

/// The coefficient of the highest alpha-frequency of the word, as a
/// quaternion-valued polynomial in the `b`/`g` variables, with the signed
/// frequency itself.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyCoeff {
    pub coeff: QuatPoly,
    pub frequency: i64,
}

/// The commuting factor `cos(r b) + i sin(r b) cos(g)`.
fn commuting_factor(r: i64) -> QuatPoly {
    let (c, sn) = multiple_angle(r, Var::Xb, Var::Yb);
    QuatPoly {
        w: c,
        x: sn.mul(&IntPoly::var(Var::Xg)),
        y: IntPoly::zero(),
        z: IntPoly::zero(),
    }
}

/// The sign-flipping factor `j sin(r b) sin(g)`.
fn flipping_factor(r: i64) -> QuatPoly {
    let (_, sn) = multiple_angle(r, Var::Xb, Var::Yb);
    QuatPoly {
        w: IntPoly::zero(),
        x: IntPoly::zero(),
        y: sn.mul(&IntPoly::var(Var::Yg)),
        z: IntPoly::zero(),
    }
}

/// Extracts the coefficient of `exp(i sign(s_m) sum|s_p| alpha)`: the ordered
/// product over interior B-blocks of the commuting factor when the adjacent
/// A-exponent signs agree and the flipping factor when they differ, times the
/// final commuting factor when the word ends with a B-block. A word that
/// starts with a B-block contributes that block as a whole on the left.
pub fn leading_frequency_coeff(word: &Word) -> Result<FrequencyCoeff, TrigPolyError> {
    let blocks = word.blocks();
    if word.a_weight() == 0 {
        return Err(TrigPolyError::NoAlphaLetters);
    }
    let mut coeff = QuatPoly::one();
    let mut core = blocks;
    if blocks[0].0 == 0 {
        coeff = coeff.mul(&b_block(blocks[0].1));
        core = &blocks[1..];
    }
    let m = core.len();
    let mut freq_mag: i64 = 0;
    for (p, &(s, r)) in core.iter().enumerate() {
        debug_assert!(s != 0);
        freq_mag += s.abs();
        if p + 1 < m {
            let next_s = core[p + 1].0;
            if s.signum() == next_s.signum() {
                coeff = coeff.mul(&commuting_factor(r));
            } else {
                coeff = coeff.mul(&flipping_factor(r));
            }
        } else if r != 0 {
            coeff = coeff.mul(&commuting_factor(r));
        }
    }
    let last_sign = core[m - 1].0.signum();
    Ok(FrequencyCoeff {
        coeff,
        frequency: last_sign * freq_mag,
    })
}

/// The coefficient of `exp(i f alpha)` in `alpha -> W(alpha, beta, gamma)`,
/// computed by an exact DFT over `2 sum|s_p| + 1` equispaced samples. The
/// `(w, x)` components carry the i-commuting part at frequency `f` and the
/// `(y, z)` components the j-part at frequency `-f`.
pub fn dft_coefficient(word: &Word, freq: i64, beta: f64, gamma: f64) -> Tangent {
    let s_weight = word.a_weight() as i64;
    debug_assert!(freq.abs() <= s_weight);
    let n = (2 * s_weight + 1) as usize;
    let (mut uw, mut ux, mut vy, mut vz) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for j in 0..n {
        let alpha = std::f64::consts::TAU * j as f64 / n as f64;
        let q = evaluate_word(word, &Angles::new(alpha, beta, gamma));
        let phase = freq as f64 * alpha;
        let (c, s) = (phase.cos(), phase.sin());
        // (w + i x) e^{-i f a}
        uw += q.w * c + q.x * s;
        ux += q.x * c - q.w * s;
        // (y + i z) e^{+i f a}  (the j-part coefficient at frequency -f)
        vy += q.y * c - q.z * s;
        vz += q.z * c + q.y * s;
    }
    let scale = 1.0 / n as f64;
    Tangent {
        w: uw * scale,
        x: ux * scale,
        y: vy * scale,
        z: vz * scale,
    }
}

/// Maximum absolute coefficient of the polynomial.
pub fn coefficient_height(p: &IntPoly) -> BigInt {
    p.height()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, TAU};

    fn random_word(rng: &mut ChaCha8Rng, len: usize) -> Word {
        use crate::word::Letter;
        let mut letters: Vec<Letter> = Vec::with_capacity(len);
        while letters.len() < len {
            let l = Letter::ALL[rng.gen_range(0..4)];
            if letters.last().map_or(true, |p| p.inverse() != l) {
                letters.push(l);
            }
        }
        Word::from_letters(letters)
    }

    #[test]
    fn multiple_angle_small_cases() {
        let x = IntPoly::var(Var::Xa);
        let y = IntPoly::var(Var::Ya);
        let (c1, s1) = multiple_angle(1, Var::Xa, Var::Ya);
        assert_eq!(c1, x);
        assert_eq!(s1, y);
        let (c2, s2) = multiple_angle(2, Var::Xa, Var::Ya);
        assert_eq!(c2, x.mul(&x).sub(&y.mul(&y)));
        assert_eq!(s2, x.mul(&y).mul_i64(2));
        let (c3, s3) = multiple_angle(3, Var::Xa, Var::Ya);
        assert_eq!(c3, x.pow(3).sub(&x.mul(&y.pow(2)).mul_i64(3)));
        assert_eq!(s3, x.pow(2).mul(&y).mul_i64(3).sub(&y.pow(3)));
        let (cm, sm) = multiple_angle(-2, Var::Xa, Var::Ya);
        assert_eq!(cm, c2);
        assert_eq!(sm, s2.neg());
    }

    #[test]
    fn multiple_angle_pythagorean_identity() {
        for k in -6..=6 {
            let (c, s) = multiple_angle(k, Var::Xb, Var::Yb);
            let lhs = c.mul(&c).add(&s.mul(&s));
            let circle = IntPoly::var(Var::Xb)
                .pow(2)
                .add(&IntPoly::var(Var::Yb).pow(2));
            assert_eq!(lhs, circle.pow(k.unsigned_abs() as u32));
        }
    }

    #[test]
    fn symbolic_word_examples() {
        assert_eq!(symbolic_word(&Word::empty()), QuatPoly::one());
        let a = symbolic_word(&Word::parse("A").unwrap());
        assert_eq!(a.w, IntPoly::var(Var::Xa));
        assert_eq!(a.x, IntPoly::var(Var::Ya));
        assert!(a.y.is_zero() && a.z.is_zero());

        let ab = Word::parse("AB").unwrap();
        let p = Angles::new(FRAC_PI_4, FRAC_PI_4, FRAC_PI_2);
        let sym = symbolic_word(&ab).eval_f64(&torus_values(&p));
        for c in sym {
            assert_relative_eq!(c, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn symbolic_word_matches_numeric_on_random_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..60 {
            let len = 1 + rng.gen_range(0..8);
            let w = random_word(&mut rng, len);
            let p = Angles::new(
                rng.gen_range(0.0..TAU),
                rng.gen_range(0.0..TAU),
                rng.gen_range(0.0..TAU),
            );
            let sym = symbolic_word(&w).eval_f64(&torus_values(&p));
            let num = evaluate_word(&w, &p);
            for (s, n) in sym.iter().zip([num.w, num.x, num.y, num.z]) {
                assert!((s - n).abs() < 1e-9, "{w}: {s} vs {n}");
            }
            assert!(symbolic_word(&w).max_deg_var(Var::Xa) <= w.len() as u32);
        }
    }

    #[test]
    fn derivative_square_poly_constant_cases() {
        let p = derivative_square_poly(&Word::parse("A").unwrap()).unwrap();
        assert_eq!(p, IntPoly::one());
        let p = derivative_square_poly(&Word::parse("AA").unwrap()).unwrap();
        assert_eq!(p, IntPoly::constant_i64(4));
        assert_eq!(coefficient_height(&p), BigInt::from(4));
        assert!(derivative_square_poly(&Word::empty()).is_err());
    }

    #[test]
    fn derivative_square_poly_matches_numeric() {
        let abab = Word::parse("ABAB").unwrap();
        let p = derivative_square_poly(&abab).unwrap();
        assert!(p.num_terms() > 1);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let pt = Angles::new(
                rng.gen_range(0.0..TAU),
                rng.gen_range(0.0..TAU),
                rng.gen_range(0.0..TAU),
            );
            let sym = p.eval_f64(&torus_values(&pt));
            let num = crate::quat::derivative_norm_sq(&abab, &pt);
            assert_relative_eq!(sym, num, max_relative = 1e-8, epsilon = 1e-10);
        }
    }

    #[test]
    fn derivative_square_poly_degree_and_height_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..120 {
            let len = 1 + rng.gen_range(0..7);
            let w = random_word(&mut rng, len);
            let p = derivative_square_poly(&w).unwrap();
            let n = w.len() as u32;
            let m = w.block_count() as u32;
            assert!(p.total_degree() <= 2 * n + 2 * m, "{w}");
            let bound = BigInt::from(2).pow(n) * BigInt::from(n);
            assert!(coefficient_height(&p) <= &bound * &bound, "{w}");
        }
    }

    #[test]
    fn derivative_square_poly_is_nonnegative_on_torus() {
        let mut rng = ChaCha8Rng::seed_from_u64(321);
        for _ in 0..40 {
            let len = 1 + rng.gen_range(0..6);
            let w = random_word(&mut rng, len);
            let p = derivative_square_poly(&w).unwrap();
            for _ in 0..20 {
                let pt = Angles::new(
                    rng.gen_range(0.0..TAU),
                    rng.gen_range(0.0..TAU),
                    rng.gen_range(0.0..TAU),
                );
                assert!(p.eval_f64(&torus_values(&pt)) >= -1e-9);
            }
        }
    }

    #[test]
    fn leading_coeff_single_block() {
        // Word AB: coefficient x_b + i y_b x_g at frequency +1.
        let fc = leading_frequency_coeff(&Word::parse("AB").unwrap()).unwrap();
        assert_eq!(fc.frequency, 1);
        assert_eq!(fc.coeff.w, IntPoly::var(Var::Xb));
        assert_eq!(
            fc.coeff.x,
            IntPoly::var(Var::Yb).mul(&IntPoly::var(Var::Xg))
        );
        assert!(fc.coeff.y.is_zero() && fc.coeff.z.is_zero());

        // Word A: empty product, frequency +1.
        let fc = leading_frequency_coeff(&Word::parse("A").unwrap()).unwrap();
        assert_eq!(fc.frequency, 1);
        assert_eq!(fc.coeff, QuatPoly::one());

        assert_eq!(
            leading_frequency_coeff(&Word::parse("BB").unwrap()),
            Err(TrigPolyError::NoAlphaLetters)
        );
    }

    #[test]
    fn leading_coeff_commutator_norm_value() {
        // [A,B] = A B A^-1 B^-1: signs flip once, frequency -2, squared norm
        // sin^2(b) sin^2(g) (cos^2 b + sin^2 b cos^2 g) = 15/64 at (pi/3, pi/4).
        let fc = leading_frequency_coeff(&Word::parse("ABab").unwrap()).unwrap();
        assert_eq!(fc.frequency, -2);
        let vals = [
            0.0,
            0.0,
            FRAC_PI_3.cos(),
            FRAC_PI_3.sin(),
            FRAC_PI_4.cos(),
            FRAC_PI_4.sin(),
        ];
        let q = fc.coeff.eval_f64(&vals);
        let norm_sq: f64 = q.iter().map(|c| c * c).sum();
        assert_relative_eq!(norm_sq, 15.0 / 64.0, epsilon = 1e-12);
    }

    #[test]
    fn dft_oracle_on_pure_rotation() {
        let a = Word::parse("A").unwrap();
        let c1 = dft_coefficient(&a, 1, 0.4, 1.3);
        assert_relative_eq!(c1.w, 1.0, epsilon = 1e-12);
        assert_relative_eq!(c1.x, 0.0, epsilon = 1e-12);
        let c0 = dft_coefficient(&a, 0, 0.4, 1.3);
        assert!(c0.norm_sq() < 1e-24);
    }

    #[test]
    fn dft_matches_leading_coeff_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(555);
        for _ in 0..80 {
            let len = 1 + rng.gen_range(0..8);
            let w = random_word(&mut rng, len);
            if w.a_weight() == 0 {
                continue;
            }
            let fc = leading_frequency_coeff(&w).unwrap();
            for _ in 0..5 {
                let beta = rng.gen_range(0.0..TAU);
                let gamma = rng.gen_range(0.0..TAU);
                let vals = [0.0, 0.0, beta.cos(), beta.sin(), gamma.cos(), gamma.sin()];
                let sym = fc.coeff.eval_f64(&vals);
                let dft = dft_coefficient(&w, fc.frequency, beta, gamma);
                for (s, d) in sym.iter().zip([dft.w, dft.x, dft.y, dft.z]) {
                    assert!((s - d).abs() < 1e-9, "{w}: {s} vs {d}");
                }
            }
        }
    }

    #[test]
    fn freeness_witness_norm_factorization() {
        // The squared norm of the leading coefficient factors into the factor
        // norms, and none of them is the zero polynomial.
        let mut rng = ChaCha8Rng::seed_from_u64(777);
        for _ in 0..40 {
            let len = 1 + rng.gen_range(0..8);
            let w = random_word(&mut rng, len);
            if w.a_weight() == 0 {
                continue;
            }
            let blocks = w.blocks();
            let mut core = blocks;
            let mut product = IntPoly::one();
            if blocks[0].0 == 0 {
                product = product.mul(&b_block(blocks[0].1).norm_sq());
                core = &blocks[1..];
            }
            let m = core.len();
            for (p, &(s, r)) in core.iter().enumerate() {
                let factor = if p + 1 < m {
                    if s.signum() == core[p + 1].0.signum() {
                        commuting_factor(r)
                    } else {
                        flipping_factor(r)
                    }
                } else if r != 0 {
                    commuting_factor(r)
                } else {
                    continue;
                };
                let fnorm = factor.norm_sq();
                assert!(!fnorm.is_zero(), "{w}: zero factor norm");
                product = product.mul(&fnorm);
            }
            let fc = leading_frequency_coeff(&w).unwrap();
            assert_eq!(fc.coeff.norm_sq(), product, "{w}");
            assert!(!fc.coeff.norm_sq().is_zero());
        }
    }
}
