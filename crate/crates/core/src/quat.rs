//! Unit quaternions, the two parameterized rotation generators, word
//! evaluation, analytic derivatives in the first angle, and the distance
//! on SO(3) folded through the double cover.

use crate::word::{Letter, TowerSigns, Word};
use serde::Serialize;
use std::f64::consts::TAU;

pub const UNIT_TOL: f64 = 1e-12;
const RENORM_EVERY: usize = 64;

#[inline]
fn qmul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

#[inline]
fn qscale(a: [f64; 4], s: f64) -> [f64; 4] {
    [a[0] * s, a[1] * s, a[2] * s, a[3] * s]
}

#[inline]
fn qadd(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

/// A rotation parameter point `(alpha, beta, gamma)`, each reduced mod `2*pi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Angles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Angles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Angles {
        Angles {
            alpha: alpha.rem_euclid(TAU),
            beta: beta.rem_euclid(TAU),
            gamma: gamma.rem_euclid(TAU),
        }
    }
}

/// Element of the unit quaternions (double cover of SO(3)).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnitQuaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl UnitQuaternion {
    pub fn identity() -> UnitQuaternion {
        UnitQuaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 }
    }

    /// Builds from raw components, normalizing.
    pub fn from_components(w: f64, x: f64, y: f64, z: f64) -> UnitQuaternion {
        UnitQuaternion { w, x, y, z }.renormalized()
    }

    fn as_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    fn from_array(a: [f64; 4]) -> UnitQuaternion {
        UnitQuaternion { w: a[0], x: a[1], y: a[2], z: a[3] }
    }

    pub fn norm_sq(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn renormalized(self) -> UnitQuaternion {
        let n = self.norm_sq().sqrt();
        UnitQuaternion {
            w: self.w / n,
            x: self.x / n,
            y: self.y / n,
            z: self.z / n,
        }
    }

    pub fn conjugate(self) -> UnitQuaternion {
        UnitQuaternion { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn neg(self) -> UnitQuaternion {
        UnitQuaternion { w: -self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn dot(self, o: UnitQuaternion) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// SO(3) rotation angle in `[0, pi]`, folded through the double cover.
    pub fn rotation_angle(self) -> f64 {
        2.0 * self.w.abs().min(1.0).acos()
    }

    pub fn to_rotation_matrix(self) -> [[f64; 3]; 3] {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        [
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ]
    }
}

impl std::ops::Mul for UnitQuaternion {
    type Output = UnitQuaternion;
    fn mul(self, rhs: UnitQuaternion) -> UnitQuaternion {
        UnitQuaternion::from_array(qmul(self.as_array(), rhs.as_array()))
    }
}

/// Derivative of a quaternion curve; not unit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tangent {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Tangent {
    pub fn zero() -> Tangent {
        Tangent { w: 0.0, x: 0.0, y: 0.0, z: 0.0 }
    }

    fn from_array(a: [f64; 4]) -> Tangent {
        Tangent { w: a[0], x: a[1], y: a[2], z: a[3] }
    }

    pub fn norm_sq(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }
}

/// Plain Euclidean 4-norm distance between the two quaternion lifts.
pub fn chord_distance(q: UnitQuaternion, c: UnitQuaternion) -> f64 {
    let dw = q.w - c.w;
    let dx = q.x - c.x;
    let dy = q.y - c.y;
    let dz = q.z - c.z;
    (dw * dw + dx * dx + dy * dy + dz * dz).sqrt()
}

/// Distance on SO(3): `min(|q - c|, |q + c|)` in the 4-norm, so both lifts
/// of the target count.
pub fn so3_distance(q: UnitQuaternion, c: UnitQuaternion) -> f64 {
    chord_distance(q, c).min(chord_distance(q, c.neg()))
}

/// Frobenius distance between the corresponding 3x3 rotation matrices.
pub fn frobenius_distance(q: UnitQuaternion, c: UnitQuaternion) -> f64 {
    let a = q.to_rotation_matrix();
    let b = c.to_rotation_matrix();
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let d = a[i][j] - b[i][j];
            s += d * d;
        }
    }
    s.sqrt()
}

/// Generator `A`: rotation about the OX axis, `cos(alpha) + i sin(alpha)`.
pub fn generator_a(alpha: f64) -> UnitQuaternion {
    UnitQuaternion { w: alpha.cos(), x: alpha.sin(), y: 0.0, z: 0.0 }
}

/// Generator `B`: axis in the xy-plane at angle `gamma` from OX,
/// `cos(beta) + sin(beta)(i cos(gamma) + j sin(gamma))`.
pub fn generator_b(beta: f64, gamma: f64) -> UnitQuaternion {
    let s = beta.sin();
    UnitQuaternion {
        w: beta.cos(),
        x: s * gamma.cos(),
        y: s * gamma.sin(),
        z: 0.0,
    }
}

/// The four single-letter factors at a parameter point.
pub fn generator(letter: Letter, p: &Angles) -> UnitQuaternion {
    match letter {
        Letter::A => generator_a(p.alpha),
        Letter::AInv => generator_a(-p.alpha),
        Letter::B => generator_b(p.beta, p.gamma),
        Letter::BInv => generator_b(-p.beta, p.gamma),
    }
}

/// One block factor `A^s` or `B^r` with its first and second alpha-derivatives.
/// For an `A`-block, `d/dalpha A^s = s * i * A^s` and `d2/dalpha2 = -s^2 A^s`.
struct Factor {
    value: [f64; 4],
    a_exp: i64,
}

impl Factor {
    fn d1(&self) -> Option<[f64; 4]> {
        if self.a_exp == 0 {
            return None;
        }
        let s = self.a_exp as f64;
        // i * (w + ix + ...) with y = z = 0 reduces to (-x, w, 0, 0).
        Some([-s * self.value[1], s * self.value[0], 0.0, 0.0])
    }

    fn d2(&self) -> Option<[f64; 4]> {
        if self.a_exp == 0 {
            return None;
        }
        let s2 = (self.a_exp * self.a_exp) as f64;
        Some(qscale(self.value, -s2))
    }
}

fn block_factors(word: &Word, p: &Angles) -> Vec<Factor> {
    let mut out = Vec::with_capacity(2 * word.block_count());
    for &(a, b) in word.blocks() {
        if a != 0 {
            let q = generator_a(a as f64 * p.alpha);
            out.push(Factor { value: q.as_array(), a_exp: a });
        }
        if b != 0 {
            let q = generator_b(b as f64 * p.beta, p.gamma);
            out.push(Factor { value: q.as_array(), a_exp: 0 });
        }
    }
    out
}

/// Evaluates the word as a product of block factors, renormalizing every 64
/// multiplications to hold the norm within `UNIT_TOL`.
pub fn evaluate_word(word: &Word, p: &Angles) -> UnitQuaternion {
    let mut acc = [1.0, 0.0, 0.0, 0.0];
    for (count, f) in block_factors(word, p).iter().enumerate() {
        acc = qmul(acc, f.value);
        if (count + 1) % RENORM_EVERY == 0 {
            let n = (acc[0] * acc[0] + acc[1] * acc[1] + acc[2] * acc[2] + acc[3] * acc[3])
                .sqrt();
            acc = qscale(acc, 1.0 / n);
        }
    }
    UnitQuaternion::from_array(acc).renormalized()
}

fn prefix_suffix(factors: &[Factor]) -> (Vec<[f64; 4]>, Vec<[f64; 4]>) {
    let n = factors.len();
    let mut prefix = vec![[1.0, 0.0, 0.0, 0.0]; n + 1];
    let mut suffix = vec![[1.0, 0.0, 0.0, 0.0]; n + 1];
    for k in 0..n {
        prefix[k + 1] = qmul(prefix[k], factors[k].value);
    }
    for k in (0..n).rev() {
        suffix[k] = qmul(factors[k].value, suffix[k + 1]);
    }
    (prefix, suffix)
}

/// Exact analytic `d/dalpha` of the word product.
pub fn alpha_derivative(word: &Word, p: &Angles) -> Tangent {
    let factors = block_factors(word, p);
    let (prefix, suffix) = prefix_suffix(&factors);
    let mut acc = [0.0; 4];
    for (k, f) in factors.iter().enumerate() {
        if let Some(d) = f.d1() {
            acc = qadd(acc, qmul(qmul(prefix[k], d), suffix[k + 1]));
        }
    }
    Tangent::from_array(acc)
}

/// Exact analytic `d2/dalpha2` of the word product.
pub fn alpha_second_derivative(word: &Word, p: &Angles) -> Tangent {
    let factors = block_factors(word, p);
    let (prefix, suffix) = prefix_suffix(&factors);
    let n = factors.len();
    let mut acc = [0.0; 4];
    for k in 0..n {
        if let Some(dd) = factors[k].d2() {
            acc = qadd(acc, qmul(qmul(prefix[k], dd), suffix[k + 1]));
        }
        let Some(dk) = factors[k].d1() else { continue };
        // Cross terms: each ordered pair k < l appears twice.
        let mut mid = qmul(prefix[k], dk);
        for l in k + 1..n {
            if let Some(dl) = factors[l].d1() {
                let term = qmul(qmul(mid, dl), suffix[l + 1]);
                acc = qadd(acc, qscale(term, 2.0));
            }
            mid = qmul(mid, factors[l].value);
        }
    }
    Tangent::from_array(acc)
}

/// Squared norm of the alpha-derivative (the quantity bounded below away
/// from the small-derivative parameter set).
pub fn derivative_norm_sq(word: &Word, p: &Angles) -> f64 {
    alpha_derivative(word, p).norm_sq()
}

/// A rotation stored as an explicit offset from the identity, `q = 1 + d`.
///
/// Commutators of near-identity rotations are formed through the exact
/// identity `[P,Q] = 1 + (PQ - QP) P^-1 Q^-1` with `PQ - QP = (0, 2 p x q)`,
/// which keeps relative accuracy when the offset is many orders of magnitude
/// below machine epsilon times the factor norms.
#[derive(Clone, Copy, Debug)]
pub struct NearUnit {
    pub dw: f64,
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl NearUnit {
    pub fn generator_a(alpha: f64, sign: i8) -> NearUnit {
        let t = sign as f64 * alpha;
        let h = (t / 2.0).sin();
        NearUnit { dw: -2.0 * h * h, dx: t.sin(), dy: 0.0, dz: 0.0 }
    }

    pub fn generator_b(beta: f64, gamma: f64, sign: i8) -> NearUnit {
        let t = sign as f64 * beta;
        let h = (t / 2.0).sin();
        let s = t.sin();
        NearUnit {
            dw: -2.0 * h * h,
            dx: s * gamma.cos(),
            dy: s * gamma.sin(),
            dz: 0.0,
        }
    }

    pub fn inverse(self) -> NearUnit {
        NearUnit { dw: self.dw, dx: -self.dx, dy: -self.dy, dz: -self.dz }
    }

    fn powered(self, sign: i8) -> NearUnit {
        if sign > 0 {
            self
        } else {
            self.inverse()
        }
    }

    fn full(self) -> [f64; 4] {
        [1.0 + self.dw, self.dx, self.dy, self.dz]
    }

    pub fn commutator(p: NearUnit, q: NearUnit) -> NearUnit {
        let m = [
            0.0,
            2.0 * (p.dy * q.dz - p.dz * q.dy),
            2.0 * (p.dz * q.dx - p.dx * q.dz),
            2.0 * (p.dx * q.dy - p.dy * q.dx),
        ];
        let tail = qmul(p.inverse().full(), q.inverse().full());
        let n = (tail[0] * tail[0] + tail[1] * tail[1] + tail[2] * tail[2]
            + tail[3] * tail[3])
            .sqrt();
        let d = qmul(m, qscale(tail, 1.0 / n));
        NearUnit { dw: d[0], dx: d[1], dy: d[2], dz: d[3] }
    }

    /// `|q - 1|^2` without cancellation.
    pub fn dist_sq_to_identity(self) -> f64 {
        self.dw * self.dw + self.dx * self.dx + self.dy * self.dy + self.dz * self.dz
    }
}

/// Evaluates both tracks of the commutator tower at a parameter point using
/// the near-identity representation. Follows the same sign protocol as
/// `word::commutator_tower`.
pub fn tower_pair(k: u32, signs: &TowerSigns, p: &Angles) -> (NearUnit, NearUnit) {
    let mut a = NearUnit::generator_a(p.alpha, signs.base_a);
    let mut b = NearUnit::generator_b(p.beta, p.gamma, signs.base_b);
    for level in 0..k as usize {
        let ls = signs.levels[level];
        let na = NearUnit::commutator(a.powered(ls.a_first), b.powered(ls.a_second));
        let nb = NearUnit::commutator(b.powered(ls.b_first), a.powered(ls.b_second));
        a = na;
        b = nb;
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::{commutator_tower, Word};
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

    fn random_point(rng: &mut ChaCha8Rng) -> Angles {
        Angles::new(
            rng.gen_range(0.0..TAU),
            rng.gen_range(0.0..TAU),
            rng.gen_range(0.0..TAU),
        )
    }

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
    fn generator_a_examples() {
        let q = generator_a(0.0);
        assert_eq!((q.w, q.x, q.y, q.z), (1.0, 0.0, 0.0, 0.0));
        let q = generator_a(FRAC_PI_2);
        assert_relative_eq!(q.w, 0.0, epsilon = 1e-15);
        assert_relative_eq!(q.x, 1.0, epsilon = 1e-15);
        let q = generator_a(FRAC_PI_4);
        assert_relative_eq!(q.w, SQRT_2 / 2.0, epsilon = 1e-15);
        assert_relative_eq!(q.x, SQRT_2 / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn generator_b_examples() {
        let q = generator_b(0.0, 2.3);
        assert_eq!((q.w, q.x, q.y, q.z), (1.0, 0.0, 0.0, 0.0));
        let q = generator_b(FRAC_PI_2, FRAC_PI_2);
        assert_relative_eq!(q.y, 1.0, epsilon = 1e-15);
        assert_relative_eq!(q.w, 0.0, epsilon = 1e-15);
        assert_relative_eq!(q.x, 0.0, epsilon = 1e-15);
        let q = generator_b(FRAC_PI_4, 0.0);
        assert_relative_eq!(q.w, SQRT_2 / 2.0, epsilon = 1e-15);
        assert_relative_eq!(q.x, SQRT_2 / 2.0, epsilon = 1e-15);
        assert_eq!(q.y, 0.0);
    }

    #[test]
    fn evaluate_word_examples() {
        let ab = Word::parse("AB").unwrap();
        let q = evaluate_word(&ab, &Angles::new(0.0, 0.0, 1.0));
        assert_relative_eq!(q.w, 1.0, epsilon = 1e-15);

        let q = evaluate_word(&ab, &Angles::new(FRAC_PI_4, FRAC_PI_4, FRAC_PI_2));
        for c in [q.w, q.x, q.y, q.z] {
            assert_relative_eq!(c, 0.5, epsilon = 1e-15);
        }

        let aa = Word::parse("AA").unwrap();
        let q = evaluate_word(&aa, &Angles::new(FRAC_PI_2, 0.0, 0.0));
        assert_relative_eq!(q.w, -1.0, epsilon = 1e-15);
        assert_relative_eq!(q.x, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn distance_examples() {
        let id = UnitQuaternion::identity();
        assert_eq!(so3_distance(id, id), 0.0);
        assert_eq!(so3_distance(id.neg(), id), 0.0);
        let i = UnitQuaternion { w: 0.0, x: 1.0, y: 0.0, z: 0.0 };
        assert_relative_eq!(so3_distance(id, i), SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn distance_is_double_cover_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let p = random_point(&mut rng);
            let q = evaluate_word(&random_word(&mut rng, 6), &p);
            let c = evaluate_word(&random_word(&mut rng, 6), &p);
            assert_eq!(so3_distance(q, c), so3_distance(q.neg(), c));
        }
    }

    #[test]
    fn rotation_angle_examples() {
        assert_eq!(UnitQuaternion::identity().rotation_angle(), 0.0);
        let i = UnitQuaternion { w: 0.0, x: 1.0, y: 0.0, z: 0.0 };
        assert_relative_eq!(i.rotation_angle(), PI);
        assert_relative_eq!(generator_a(FRAC_PI_4).rotation_angle(), FRAC_PI_2);
    }

    #[test]
    fn norm_stays_unit_under_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let p = random_point(&mut rng);
            let a = evaluate_word(&random_word(&mut rng, 8), &p);
            let b = evaluate_word(&random_word(&mut rng, 8), &p);
            assert!(((a * b).norm_sq() - 1.0).abs() < 1e-12);
            let conj = a * a.conjugate();
            assert!(chord_distance(conj, UnitQuaternion::identity()) < 1e-12);
        }
        // Long word: renormalization keeps drift bounded.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let w = random_word(&mut rng, 10_000);
        let q = evaluate_word(&w, &random_point(&mut rng));
        assert!((q.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evaluation_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let p = random_point(&mut rng);
            let a = random_word(&mut rng, 8);
            let b = random_word(&mut rng, 8);
            let lhs = evaluate_word(&a.concat(&b), &p);
            let rhs = evaluate_word(&a, &p) * evaluate_word(&b, &p);
            assert!(so3_distance(lhs, rhs.renormalized()) < 1e-10);
        }
    }

    fn fd_first(word: &Word, p: &Angles, h: f64) -> Tangent {
        let plus = evaluate_word(word, &Angles::new(p.alpha + h, p.beta, p.gamma));
        let minus = evaluate_word(word, &Angles::new(p.alpha - h, p.beta, p.gamma));
        Tangent {
            w: (plus.w - minus.w) / (2.0 * h),
            x: (plus.x - minus.x) / (2.0 * h),
            y: (plus.y - minus.y) / (2.0 * h),
            z: (plus.z - minus.z) / (2.0 * h),
        }
    }

    fn fd_second(word: &Word, p: &Angles, h: f64) -> Tangent {
        let plus = evaluate_word(word, &Angles::new(p.alpha + h, p.beta, p.gamma));
        let mid = evaluate_word(word, p);
        let minus = evaluate_word(word, &Angles::new(p.alpha - h, p.beta, p.gamma));
        Tangent {
            w: (plus.w - 2.0 * mid.w + minus.w) / (h * h),
            x: (plus.x - 2.0 * mid.x + minus.x) / (h * h),
            y: (plus.y - 2.0 * mid.y + minus.y) / (h * h),
            z: (plus.z - 2.0 * mid.z + minus.z) / (h * h),
        }
    }

    #[test]
    fn derivative_unit_speed_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for w in [Word::parse("A").unwrap(), Word::parse("AB").unwrap()] {
            for _ in 0..50 {
                let p = random_point(&mut rng);
                assert_relative_eq!(
                    alpha_derivative(&w, &p).norm_sq(),
                    1.0,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let abab = Word::parse("ABAB").unwrap();
        let p = Angles::new(0.3, 0.7, 1.1);
        let exact = alpha_derivative(&abab, &p);
        let approx = fd_first(&abab, &p, 1e-6);
        for (e, a) in [
            (exact.w, approx.w),
            (exact.x, approx.x),
            (exact.y, approx.y),
            (exact.z, approx.z),
        ] {
            assert_relative_eq!(e, a, max_relative = 1e-7, epsilon = 1e-9);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let len = 1 + rng.gen_range(0..10);
            let w = random_word(&mut rng, len);
            let p = random_point(&mut rng);
            let exact = alpha_derivative(&w, &p);
            let approx = fd_first(&w, &p, 1e-6);
            let scale = exact.norm_sq().sqrt().max(1.0);
            for (e, a) in [
                (exact.w, approx.w),
                (exact.x, approx.x),
                (exact.y, approx.y),
                (exact.z, approx.z),
            ] {
                assert!((e - a).abs() / scale < 1e-7, "{w} at {p:?}: {e} vs {a}");
            }
        }
    }

    #[test]
    fn second_derivative_matches_finite_differences() {
        let abab = Word::parse("ABAB").unwrap();
        let p = Angles::new(0.3, 0.7, 1.1);
        let exact = alpha_second_derivative(&abab, &p);
        let approx = fd_second(&abab, &p, 1e-4);
        let scale = exact.norm_sq().sqrt().max(1.0);
        for (e, a) in [
            (exact.w, approx.w),
            (exact.x, approx.x),
            (exact.y, approx.y),
            (exact.z, approx.z),
        ] {
            assert!((e - a).abs() / scale < 1e-5, "{e} vs {a}");
        }
        assert!(exact.norm_sq() <= 256.0);
    }

    #[test]
    fn second_derivative_bound_holds_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..1000 {
            let n = 1 + rng.gen_range(0..12);
            let w = random_word(&mut rng, n);
            let p = random_point(&mut rng);
            let bound = (w.len() as f64).powi(4);
            assert!(alpha_second_derivative(&w, &p).norm_sq() <= bound * (1.0 + 1e-9));
        }
    }

    #[test]
    fn pure_a_second_derivative_is_unit() {
        let a = Word::parse("A").unwrap();
        let p = Angles::new(0.9, 0.1, 0.2);
        assert_relative_eq!(alpha_second_derivative(&a, &p).norm_sq(), 1.0);
    }

    #[test]
    fn frobenius_and_chord_metrics_are_equivalent() {
        // ratio = 2 sqrt(2) cos(theta/4) over the folded chord, in [2, 2 sqrt(2)].
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..300 {
            let p = random_point(&mut rng);
            let q = evaluate_word(&random_word(&mut rng, 5), &p);
            let c = evaluate_word(&random_word(&mut rng, 5), &p);
            let chord = so3_distance(q, c);
            if chord < 1e-8 {
                continue;
            }
            let ratio = frobenius_distance(q, c) / chord;
            assert!(
                (2.0 - 1e-9..=2.0 * SQRT_2 + 1e-9).contains(&ratio),
                "ratio {ratio}"
            );
        }
    }

    #[test]
    fn near_unit_matches_direct_evaluation() {
        let signs = TowerSigns::standard(3);
        for k in 0..=2u32 {
            let word = commutator_tower(k, &signs).unwrap();
            for &alpha in &[1e-2, 5e-2] {
                let p = Angles::new(alpha, 1.0, 1.2);
                let (near, _) = tower_pair(k, &signs, &p);
                let direct = evaluate_word(&word, &p);
                let d_near = near.dist_sq_to_identity().sqrt();
                let d_direct = chord_distance(direct, UnitQuaternion::identity());
                assert_relative_eq!(d_near, d_direct, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn near_unit_commutator_against_plain_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..100 {
            let p = random_point(&mut rng);
            let pa = NearUnit::generator_a(p.alpha, 1);
            let pb = NearUnit::generator_b(p.beta, p.gamma, 1);
            let c = NearUnit::commutator(pa, pb);
            let qa = generator_a(p.alpha);
            let qb = generator_b(p.beta, p.gamma);
            let direct = qa * qb * qa.conjugate() * qb.conjugate();
            let full = UnitQuaternion {
                w: 1.0 + c.dw,
                x: c.dx,
                y: c.dy,
                z: c.dz,
            };
            assert!(chord_distance(full.renormalized(), direct.renormalized()) < 1e-12);
        }
    }
}
