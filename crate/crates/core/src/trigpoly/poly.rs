//! Sparse multivariate polynomials with arbitrary-precision integer
//! coefficients over the fixed variable set
//! `(x_a, y_a, x_b, y_b, x_g, y_g)` standing for
//! `(cos a, sin a, cos b, sin b, cos g, sin g)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

pub const NUM_VARS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    Xa = 0,
    Ya = 1,
    Xb = 2,
    Yb = 3,
    Xg = 4,
    Yg = 5,
}

impl Var {
    pub const ALL: [Var; NUM_VARS] = [Var::Xa, Var::Ya, Var::Xb, Var::Yb, Var::Xg, Var::Yg];
    /// The three `(cos, sin)` pairs tied by `x^2 + y^2 = 1`.
    pub const PAIRS: [(Var, Var); 3] = [(Var::Xa, Var::Ya), (Var::Xb, Var::Yb), (Var::Xg, Var::Yg)];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::Xa => "x_a",
            Var::Ya => "y_a",
            Var::Xb => "x_b",
            Var::Yb => "y_b",
            Var::Xg => "x_g",
            Var::Yg => "y_g",
        }
    }

    pub fn from_name(s: &str) -> Option<Var> {
        Var::ALL.iter().copied().find(|v| v.name() == s)
    }
}

/// Exponent vector with graded-lexicographic order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub [u16; NUM_VARS]);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial([0; NUM_VARS])
    }

    pub fn var(v: Var) -> Monomial {
        let mut e = [0; NUM_VARS];
        e[v.index()] = 1;
        Monomial(e)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut e = [0; NUM_VARS];
        for i in 0..NUM_VARS {
            e[i] = self.0[i] + o.0[i];
        }
        Monomial(e)
    }

    pub fn divides(&self, o: &Monomial) -> bool {
        (0..NUM_VARS).all(|i| self.0[i] <= o.0[i])
    }

    pub fn div(&self, o: &Monomial) -> Monomial {
        let mut e = [0; NUM_VARS];
        for i in 0..NUM_VARS {
            e[i] = self.0[i] - o.0[i];
        }
        Monomial(e)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyParseError {
    #[error("bad coefficient {0:?}")]
    BadCoefficient(String),
    #[error("bad monomial factor {0:?}")]
    BadFactor(String),
}

/// Sparse integer polynomial. No zero coefficients are stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IntPoly {
    terms: BTreeMap<Monomial, BigInt>,
}

impl IntPoly {
    pub fn zero() -> IntPoly {
        IntPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> IntPoly {
        IntPoly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> IntPoly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        IntPoly { terms }
    }

    pub fn constant_i64(c: i64) -> IntPoly {
        IntPoly::constant(BigInt::from(c))
    }

    pub fn var(v: Var) -> IntPoly {
        IntPoly::monomial(Monomial::var(v), BigInt::one())
    }

    pub fn monomial(m: Monomial, c: BigInt) -> IntPoly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        IntPoly { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Some(c) when the polynomial is a constant (including zero).
    pub fn as_constant(&self) -> Option<BigInt> {
        match self.terms.len() {
            0 => Some(BigInt::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                (m.total_degree() == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::total_degree).max().unwrap_or(0)
    }

    pub fn deg_var(&self, v: Var) -> u32 {
        self.terms
            .keys()
            .map(|m| m.0[v.index()] as u32)
            .max()
            .unwrap_or(0)
    }

    /// Maximum absolute coefficient.
    pub fn height(&self) -> BigInt {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    fn insert(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, o: &IntPoly) -> IntPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &IntPoly) -> IntPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert(*m, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> IntPoly {
        IntPoly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }

    pub fn mul(&self, o: &IntPoly) -> IntPoly {
        let mut out = IntPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.insert(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn mul_int(&self, c: &BigInt) -> IntPoly {
        if c.is_zero() {
            return IntPoly::zero();
        }
        IntPoly {
            terms: self.terms.iter().map(|(m, k)| (*m, k * c)).collect(),
        }
    }

    pub fn mul_i64(&self, c: i64) -> IntPoly {
        self.mul_int(&BigInt::from(c))
    }

    pub fn pow(&self, e: u32) -> IntPoly {
        let mut out = IntPoly::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Exact division; `None` when `other` does not divide `self`.
    pub fn div_exact(&self, other: &IntPoly) -> Option<IntPoly> {
        if other.is_zero() {
            return None;
        }
        let (lm, lc) = other.terms.iter().next_back().unwrap();
        let mut rem = self.clone();
        let mut quot = IntPoly::zero();
        while !rem.is_zero() {
            let (rm, rc) = rem.terms.iter().next_back().unwrap();
            if !lm.divides(rm) {
                return None;
            }
            let (q, r) = rc.div_rem(lc);
            if !r.is_zero() {
                return None;
            }
            let qm = rm.div(lm);
            let t = IntPoly::monomial(qm, q);
            rem = rem.sub(&t.mul(other));
            quot = quot.add(&t);
        }
        Some(quot)
    }

    /// Divides every coefficient by `c`; `None` if any is not divisible.
    pub fn div_int_exact(&self, c: &BigInt) -> Option<IntPoly> {
        let mut terms = BTreeMap::new();
        for (m, k) in &self.terms {
            let (q, r) = k.div_rem(c);
            if !r.is_zero() {
                return None;
            }
            terms.insert(*m, q);
        }
        Some(IntPoly { terms })
    }

    pub fn eval_f64(&self, vals: &[f64; NUM_VARS]) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = bigint_to_f64(c);
            for i in 0..NUM_VARS {
                for _ in 0..m.0[i] {
                    t *= vals[i];
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_rational(&self, vals: &[BigRational; NUM_VARS]) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = BigRational::from_integer(c.clone());
            for i in 0..NUM_VARS {
                for _ in 0..m.0[i] {
                    t *= &vals[i];
                }
            }
            acc += t;
        }
        acc
    }

    /// Substitutes a polynomial for one variable.
    pub fn substitute(&self, v: Var, replacement: &IntPoly) -> IntPoly {
        let vi = v.index();
        let max_e = self.deg_var(v);
        // Power table for the replacement.
        let mut powers = Vec::with_capacity(max_e as usize + 1);
        powers.push(IntPoly::one());
        for e in 1..=max_e {
            powers.push(powers[(e - 1) as usize].mul(replacement));
        }
        let mut out = IntPoly::zero();
        for (m, c) in &self.terms {
            let e = m.0[vi];
            let mut rest = *m;
            rest.0[vi] = 0;
            let part = powers[e as usize].mul(&IntPoly::monomial(rest, c.clone()));
            out = out.add(&part);
        }
        out
    }

    /// Normal form modulo the three circle relations: rewrites `y^2 -> 1 - x^2`
    /// for each `(x, y)` pair until every sine variable has degree at most 1.
    /// Values on the torus variety are unchanged.
    pub fn circle_reduce(&self) -> IntPoly {
        let mut out = self.clone();
        for &(xv, yv) in &Var::PAIRS {
            if out.deg_var(yv) < 2 {
                continue;
            }
            let xi = xv.index();
            let yi = yv.index();
            // 1 - x^2
            let one_minus_x2 = IntPoly::one().sub(&IntPoly::var(xv).mul(&IntPoly::var(xv)));
            let max_j = out.deg_var(yv) / 2;
            let mut pow = Vec::with_capacity(max_j as usize + 1);
            pow.push(IntPoly::one());
            for j in 1..=max_j {
                pow.push(pow[(j - 1) as usize].mul(&one_minus_x2));
            }
            let mut next = IntPoly::zero();
            for (m, c) in &out.terms {
                let e = m.0[yi];
                let (j, r) = (e / 2, e % 2);
                let mut rest = *m;
                rest.0[yi] = r;
                let _ = xi;
                let part = pow[j as usize].mul(&IntPoly::monomial(rest, c.clone()));
                next = next.add(&part);
            }
            out = next;
        }
        out
    }

    /// Coefficients of the polynomial viewed as univariate in `v`, ascending,
    /// ending at the true degree.
    pub fn coefficients_in(&self, v: Var) -> Vec<IntPoly> {
        let vi = v.index();
        let deg = self.deg_var(v) as usize;
        let mut out = vec![IntPoly::zero(); deg + 1];
        for (m, c) in &self.terms {
            let e = m.0[vi] as usize;
            let mut rest = *m;
            rest.0[vi] = 0;
            out[e].insert(rest, c.clone());
        }
        out
    }

    /// Formal derivative in `v`.
    pub fn derivative(&self, v: Var) -> IntPoly {
        let vi = v.index();
        let mut out = IntPoly::zero();
        for (m, c) in &self.terms {
            let e = m.0[vi];
            if e == 0 {
                continue;
            }
            let mut d = *m;
            d.0[vi] = e - 1;
            out.insert(d, c * BigInt::from(e));
        }
        out
    }

    /// Text form: one `coeff * x_a^e1 ...` line per term, leading term first.
    /// Round-trips exactly through `parse_text`.
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0\n".to_string();
        }
        let mut out = String::new();
        for (m, c) in self.terms.iter().rev() {
            out.push_str(&c.to_string());
            for (i, v) in Var::ALL.iter().enumerate() {
                let e = m.0[i];
                if e > 0 {
                    out.push_str(&format!(" * {}^{}", v.name(), e));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_text(s: &str) -> Result<IntPoly, PolyParseError> {
        let mut poly = IntPoly::zero();
        for line in s.lines() {
            let line = line.trim();
            if line.is_empty() || line == "0" {
                continue;
            }
            let mut parts = line.split(" * ");
            let coeff_str = parts.next().unwrap();
            let coeff: BigInt = coeff_str
                .parse()
                .map_err(|_| PolyParseError::BadCoefficient(coeff_str.to_string()))?;
            let mut mono = Monomial::one();
            for factor in parts {
                let (name, exp) = factor
                    .split_once('^')
                    .ok_or_else(|| PolyParseError::BadFactor(factor.to_string()))?;
                let var = Var::from_name(name)
                    .ok_or_else(|| PolyParseError::BadFactor(factor.to_string()))?;
                let e: u16 = exp
                    .parse()
                    .map_err(|_| PolyParseError::BadFactor(factor.to_string()))?;
                mono.0[var.index()] += e;
            }
            poly.insert(mono, coeff);
        }
        Ok(poly)
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text().trim_end().replace('\n', " + "))
    }
}

pub fn bigint_to_f64(c: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    c.to_f64().unwrap_or(if c.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

/// Natural log of `|c|`, robust for values far beyond f64 range.
pub fn ln_bigint(c: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    if c.is_zero() {
        return f64::NEG_INFINITY;
    }
    let abs = c.abs();
    if let Some(v) = abs.to_f64() {
        if v.is_finite() {
            return v.ln();
        }
    }
    let bits = abs.bits();
    let shift = bits.saturating_sub(64);
    let top = (&abs >> shift).to_f64().unwrap_or(f64::MAX);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Polynomial with exact rational coefficients; the unscaled result of the
/// interval integration.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RatPoly {
    pub terms: BTreeMap<Monomial, BigRational>,
}

impl RatPoly {
    pub fn zero() -> RatPoly {
        RatPoly { terms: BTreeMap::new() }
    }

    pub fn insert(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                (m.total_degree() == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        let mut l = BigInt::one();
        for c in self.terms.values() {
            l = l.lcm(c.denom());
        }
        l
    }

    /// Integer polynomial `lcm * self` together with the lcm.
    pub fn scale_to_int(&self) -> (IntPoly, BigInt) {
        let l = self.denominator_lcm();
        let mut p = IntPoly::zero();
        for (m, c) in &self.terms {
            let scaled = c * BigRational::from_integer(l.clone());
            debug_assert!(scaled.is_integer());
            p = p.add(&IntPoly::monomial(*m, scaled.to_integer()));
        }
        (p, l)
    }

    pub fn eval_f64(&self, vals: &[f64; NUM_VARS]) -> f64 {
        use num_traits::ToPrimitive;
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64().unwrap_or(0.0);
            for i in 0..NUM_VARS {
                for _ in 0..m.0[i] {
                    t *= vals[i];
                }
            }
            acc += t;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xa() -> IntPoly {
        IntPoly::var(Var::Xa)
    }
    fn ya() -> IntPoly {
        IntPoly::var(Var::Ya)
    }

    #[test]
    fn arithmetic_basics() {
        let p = xa().add(&ya());
        let q = xa().sub(&ya());
        // (x+y)(x-y) = x^2 - y^2
        let prod = p.mul(&q);
        let expect = xa().mul(&xa()).sub(&ya().mul(&ya()));
        assert_eq!(prod, expect);
        assert_eq!(prod.total_degree(), 2);
        assert_eq!(prod.deg_var(Var::Xa), 2);
        assert_eq!(prod.height(), BigInt::from(1));
    }

    #[test]
    fn no_zero_coefficients_stored() {
        let p = xa().sub(&xa());
        assert!(p.is_zero());
        assert_eq!(p.num_terms(), 0);
        let q = xa().add(&ya()).sub(&ya());
        assert_eq!(q, xa());
    }

    #[test]
    fn exact_division_round_trip() {
        let a = xa().add(&ya().mul_i64(3)).add(&IntPoly::one());
        let b = xa().mul(&xa()).sub(&ya()).add(&IntPoly::constant_i64(7));
        let prod = a.mul(&b);
        assert_eq!(prod.div_exact(&a).unwrap(), b);
        assert_eq!(prod.div_exact(&b).unwrap(), a);
        assert!(b.div_exact(&a).is_none());
    }

    #[test]
    fn circle_reduction_preserves_torus_values() {
        let p = ya().pow(4).add(&xa().mul(&ya().pow(3))).add(&ya());
        let r = p.circle_reduce();
        assert!(r.deg_var(Var::Ya) <= 1);
        for k in 0..20 {
            let t = 0.37 * k as f64;
            let vals = [t.cos(), t.sin(), 0.5, 0.4, 0.1, 0.2];
            assert!((p.eval_f64(&vals) - r.eval_f64(&vals)).abs() < 1e-12);
        }
    }

    #[test]
    fn text_round_trip_exact() {
        let p = xa()
            .mul(&ya())
            .mul_i64(-12345678901234567)
            .add(&IntPoly::var(Var::Yg).pow(3).mul_i64(7))
            .add(&IntPoly::constant_i64(-3));
        let text = p.to_text();
        assert_eq!(IntPoly::parse_text(&text).unwrap(), p);
        assert_eq!(IntPoly::parse_text("0\n").unwrap(), IntPoly::zero());
        assert!(IntPoly::parse_text("1 * q^2").is_err());
    }

    #[test]
    fn graded_lex_ordering() {
        let lo = Monomial::var(Var::Yg);
        let hi = Monomial::var(Var::Xa);
        assert!(lo < hi); // same degree, lex on exponent tuples
        let big = Monomial::var(Var::Yg).mul(&Monomial::var(Var::Yg));
        assert!(hi < big); // degree dominates
    }

    #[test]
    fn rational_scaling() {
        let mut r = RatPoly::zero();
        r.insert(
            Monomial::one(),
            BigRational::new(BigInt::from(2), BigInt::from(3)),
        );
        r.insert(
            Monomial::var(Var::Xa),
            BigRational::new(BigInt::from(1), BigInt::from(5)),
        );
        let (p, l) = r.scale_to_int();
        assert_eq!(l, BigInt::from(15));
        assert_eq!(
            p,
            IntPoly::constant_i64(10).add(&IntPoly::var(Var::Xa).mul_i64(3))
        );
    }

    #[test]
    fn ln_bigint_large_values() {
        let big = BigInt::from(10).pow(400u32);
        let l = ln_bigint(&big);
        assert!((l - 400.0 * 10f64.ln()).abs() < 1e-6 * l);
    }
}
