//! Exact scalar arithmetic in Q and in real quadratic fields Q(sqrt k).
//!
//! A [`Scalar`] is a number a + b*sqrt(k) with a, b rational and k a
//! squarefree integer >= 2 (k = 0 marks a plain rational, in which case
//! b = 0). This is enough to represent every coordinate entry the packing
//! formats accept, and it is closed under ring operations as long as all
//! irrational entries share one k. Comparisons, signs, and floors are exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Exact rational number.
pub type Rat = BigRational;

/// Rational from an integer pair, panicking on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Element a + b*sqrt(k) of Q or of a real quadratic field.
///
/// Invariants kept by every constructor: k = 0 iff b = 0, and k is
/// squarefree and >= 2 otherwise.
#[derive(Clone, PartialEq, Eq)]
pub struct Scalar {
    a: Rat,
    b: Rat,
    k: u64,
}

/// Largest square divisor split: returns (s, k') with n = s^2 * k' and k'
/// squarefree. Trial division is fine at the radicand sizes we accept.
fn split_square(n: u64) -> (u64, u64) {
    let mut square_part = 1u64;
    let mut rest = n;
    let mut p = 2u64;
    while p.saturating_mul(p) <= rest {
        while rest % (p * p) == 0 {
            square_part *= p;
            rest /= p * p;
        }
        p += 1;
    }
    (square_part, rest)
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar { a: Rat::zero(), b: Rat::zero(), k: 0 }
    }

    pub fn one() -> Self {
        Scalar { a: Rat::one(), b: Rat::zero(), k: 0 }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_rat(Rat::from(BigInt::from(n)))
    }

    pub fn from_rat(a: Rat) -> Self {
        Scalar { a, b: Rat::zero(), k: 0 }
    }

    /// a + b*sqrt(k), normalising the radicand to squarefree form.
    pub fn quad(a: Rat, b: Rat, k: u64) -> Self {
        if b.is_zero() || k == 0 {
            return Scalar::from_rat(a);
        }
        let (s, k_free) = split_square(k);
        if k_free == 1 {
            // sqrt(k) is the integer s; fold it into the rational part.
            return Scalar::from_rat(a + b * Rat::from(BigInt::from(s)));
        }
        Scalar { a, b: b * Rat::from(BigInt::from(s)), k: k_free }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.k == 0
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        if self.k == 0 { Some(&self.a) } else { None }
    }

    pub fn rational_part(&self) -> &Rat {
        &self.a
    }

    pub fn radical_part(&self) -> (&Rat, u64) {
        (&self.b, self.k)
    }

    /// Field compatibility: two scalars can mix when either is rational or
    /// both share the same squarefree k.
    fn joint_k(&self, other: &Scalar) -> Option<u64> {
        match (self.k, other.k) {
            (0, k) | (k, 0) => Some(k),
            (k1, k2) if k1 == k2 => Some(k1),
            _ => None,
        }
    }

    pub fn try_add(&self, other: &Scalar) -> Option<Scalar> {
        let k = self.joint_k(other)?;
        Some(Scalar::quad(&self.a + &other.a, &self.b + &other.b, k))
    }

    pub fn try_sub(&self, other: &Scalar) -> Option<Scalar> {
        let k = self.joint_k(other)?;
        Some(Scalar::quad(&self.a - &other.a, &self.b - &other.b, k))
    }

    pub fn try_mul(&self, other: &Scalar) -> Option<Scalar> {
        let k = self.joint_k(other)?;
        let k_rat = Rat::from(BigInt::from(k));
        let a = &self.a * &other.a + (&self.b * &other.b) * k_rat;
        let b = &self.a * &other.b + &self.b * &other.a;
        Some(Scalar::quad(a, b, k))
    }

    pub fn try_div(&self, other: &Scalar) -> Option<Scalar> {
        if other.is_zero() {
            return None;
        }
        let k = self.joint_k(other)?;
        // 1/(a + b sqrt k) = (a - b sqrt k) / (a^2 - k b^2).
        let k_rat = Rat::from(BigInt::from(k));
        let norm = &other.a * &other.a - (&other.b * &other.b) * k_rat;
        debug_assert!(!norm.is_zero(), "nonzero quadratic element has nonzero norm");
        let conj = Scalar::quad(other.a.clone(), -other.b.clone(), k);
        let prod = self.try_mul(&conj)?;
        Some(Scalar::quad(prod.a / &norm, prod.b / &norm, prod.k))
    }

    /// Exact sign: -1, 0, or +1.
    pub fn signum(&self) -> i32 {
        if self.b.is_zero() {
            return if self.a.is_zero() {
                0
            } else if self.a.is_positive() {
                1
            } else {
                -1
            };
        }
        if self.a.is_zero() {
            return if self.b.is_positive() { 1 } else { -1 };
        }
        let sa = if self.a.is_positive() { 1 } else { -1 };
        let sb = if self.b.is_positive() { 1 } else { -1 };
        if sa == sb {
            return sa;
        }
        // Signs differ: compare a^2 with k b^2; the larger magnitude wins.
        let k_rat = Rat::from(BigInt::from(self.k));
        let a2 = &self.a * &self.a;
        let kb2 = (&self.b * &self.b) * k_rat;
        match a2.cmp(&kb2) {
            std::cmp::Ordering::Greater => sa,
            std::cmp::Ordering::Less => sb,
            std::cmp::Ordering::Equal => 0,
        }
    }

    /// Exact comparison through the sign of the difference.
    pub fn cmp_exact(&self, other: &Scalar) -> Option<std::cmp::Ordering> {
        let diff = self.try_sub(other)?;
        Some(match diff.signum() {
            1 => std::cmp::Ordering::Greater,
            -1 => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Equal,
        })
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        if self.b.is_zero() {
            return a;
        }
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * (self.k as f64).sqrt()
    }

    /// Exact floor, guessed in f64 and verified by exact comparison.
    pub fn floor_int(&self) -> BigInt {
        let mut guess = BigInt::from(self.to_f64().floor() as i64);
        // Walk to the exact floor; the f64 guess is off by at most a step
        // or two at any magnitude the library produces.
        loop {
            let g = Scalar::from_rat(Rat::from(guess.clone()));
            let g1 = Scalar::from_rat(Rat::from(&guess + 1));
            let ge = g.cmp_exact(self).expect("same field");
            let lt = g1.cmp_exact(self).expect("same field");
            if ge != std::cmp::Ordering::Greater && lt == std::cmp::Ordering::Greater {
                return guess;
            }
            if ge == std::cmp::Ordering::Greater {
                guess -= 1;
            } else {
                guess += 1;
            }
        }
    }

    /// Exact square root when the value is rational and a perfect square up
    /// to a squarefree factor: sqrt(p/q) = sqrt(pq)/q = (s/q) * sqrt(k').
    pub fn sqrt(&self) -> Option<Scalar> {
        let r = self.as_rat()?;
        if r.is_negative() {
            return None;
        }
        if r.is_zero() {
            return Some(Scalar::zero());
        }
        let p = r.numer().to_u64()?;
        let q = r.denom().to_u64()?;
        let pq = p.checked_mul(q)?;
        let (s, k_free) = split_square(pq);
        let coeff = Rat::new(BigInt::from(s), BigInt::from(q));
        if k_free == 1 {
            Some(Scalar::from_rat(coeff))
        } else {
            Some(Scalar::quad(Rat::zero(), coeff, k_free))
        }
    }

    pub fn pow_usize(&self, e: usize) -> Scalar {
        let mut acc = Scalar::one();
        for _ in 0..e {
            acc = acc.try_mul(self).expect("same field");
        }
        acc
    }

    pub fn abs(&self) -> Scalar {
        if self.signum() < 0 { -self.clone() } else { self.clone() }
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $try_method:ident) => {
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$try_method(&rhs).expect("mixed quadratic fields")
            }
        }
        impl<'a, 'b> $trait<&'b Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'b Scalar) -> Scalar {
                self.$try_method(rhs).expect("mixed quadratic fields")
            }
        }
    };
}

scalar_binop!(Add, add, try_add);
scalar_binop!(Sub, sub, try_sub);
scalar_binop!(Mul, mul, try_mul);
scalar_binop!(Div, div, try_div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { a: -self.a, b: -self.b, k: self.k }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Scalar) -> Option<std::cmp::Ordering> {
        self.cmp_exact(other)
    }
}

fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", fmt_rat(&self.a));
        }
        let radical = {
            let mag = self.b.abs();
            if mag.is_one() {
                format!("sqrt({})", self.k)
            } else {
                format!("{}*sqrt({})", fmt_rat(&mag), self.k)
            }
        };
        if self.a.is_zero() {
            if self.b.is_negative() {
                write!(f, "-{radical}")
            } else {
                write!(f, "{radical}")
            }
        } else if self.b.is_negative() {
            write!(f, "{}-{radical}", fmt_rat(&self.a))
        } else {
            write!(f, "{}+{radical}", fmt_rat(&self.a))
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parses one coordinate entry: `p`, `p/q`, `r/s*sqrt(k)`, `sqrt(k)`,
/// `p/q+r/s*sqrt(k)`, `p/q-r/s*sqrt(k)`, each part optionally signed.
pub fn parse_scalar(text: &str) -> Result<Scalar, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty entry".to_string());
    }
    // Split into at most two signed terms at a +/- that is not leading.
    let bytes = s.as_bytes();
    let mut split_at = None;
    for i in 1..bytes.len() {
        if bytes[i] == b'+' || bytes[i] == b'-' {
            // A sign directly after '(' or '/' or another sign would be
            // malformed anyway; any interior sign is a term boundary here
            // because exponents do not occur in the grammar.
            split_at = Some(i);
            break;
        }
    }
    let (first, second) = match split_at {
        Some(i) => (&s[..i], Some((&s[i..i + 1], &s[i + 1..]))),
        None => (&s[..], None),
    };
    let mut value = parse_term(first)?;
    if let Some((sign, rest)) = second {
        let mut term = parse_term(rest)?;
        if sign == "-" {
            term = -term;
        }
        value = value.try_add(&term).ok_or_else(|| {
            format!("mixed quadratic fields in entry '{text}'")
        })?;
    }
    Ok(value)
}

fn parse_term(s: &str) -> Result<Scalar, String> {
    let (negate, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return Err(format!("empty term in '{s}'"));
    }
    let term = if let Some(idx) = body.find("sqrt(") {
        let radicand = body[idx + 5..]
            .strip_suffix(')')
            .ok_or_else(|| format!("unterminated sqrt in '{s}'"))?;
        let k: u64 = radicand
            .parse()
            .map_err(|_| format!("bad radicand '{radicand}' in '{s}'"))?;
        if k == 0 {
            return Err(format!("radicand must be positive in '{s}'"));
        }
        let coeff_text = &body[..idx];
        let coeff = if coeff_text.is_empty() {
            Rat::one()
        } else {
            let stripped = coeff_text
                .strip_suffix('*')
                .ok_or_else(|| format!("expected '*' before sqrt in '{s}'"))?;
            parse_rat(stripped)?
        };
        Scalar::quad(Rat::zero(), coeff, k)
    } else {
        Scalar::from_rat(parse_rat(body)?)
    };
    Ok(if negate { -term } else { term })
}

fn parse_rat(s: &str) -> Result<Rat, String> {
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.parse().map_err(|_| format!("bad integer '{num}'"))?;
        let d: BigInt = den.parse().map_err(|_| format!("bad integer '{den}'"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in '{s}'"));
        }
        Ok(Rat::new(n, d))
    } else {
        let n: BigInt = s.parse().map_err(|_| format!("bad integer '{s}'"))?;
        Ok(Rat::from(n))
    }
}

/// cos(2*pi*t) as an exact rational, available exactly when the reduced
/// denominator of t is 1, 2, 3, 4, or 6.
pub fn exact_cos_turn(t: &Rat) -> Option<Rat> {
    // Reduce t mod 1 to [0, 1).
    let floor = t.floor();
    let frac = t - floor;
    let den = frac.denom().to_u64()?;
    let num = frac.numer().to_u64()?;
    match den {
        1 => Some(Rat::one()),
        2 => Some(-Rat::one()),
        3 => Some(rat(-1, 2)),
        4 => Some(Rat::zero()),
        6 => Some(if num % 6 == 1 || num % 6 == 5 { rat(1, 2) } else { rat(-1, 2) }),
        _ => None,
    }
}

/// sin(2*pi*t) exactly where defined, via sin x = cos(pi/2 - x).
pub fn exact_sin_turn(t: &Rat) -> Option<Rat> {
    exact_cos_turn(&(rat(1, 4) - t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q64(n: i64, d: i64) -> Scalar {
        Scalar::from_rat(rat(n, d))
    }

    #[test]
    fn ring_operations_and_normalisation() {
        let s = Scalar::quad(rat(1, 2), rat(1, 3), 12);
        // sqrt(12) = 2 sqrt(3), so b becomes 2/3 with k = 3.
        assert_eq!(s.radical_part().1, 3);
        assert_eq!(*s.radical_part().0, rat(2, 3));

        let t = Scalar::quad(Rat::zero(), rat(1, 1), 3);
        let prod = s.try_mul(&t).unwrap();
        // (1/2 + 2/3 sqrt3) * sqrt3 = 2 + 1/2 sqrt3.
        assert_eq!(*prod.rational_part(), rat(2, 1));
        assert_eq!(*prod.radical_part().0, rat(1, 2));

        let sq = Scalar::quad(Rat::zero(), rat(1, 1), 9);
        assert!(sq.is_rational());
        assert_eq!(*sq.as_rat().unwrap(), rat(3, 1));
    }

    #[test]
    fn division_inverts_multiplication() {
        let x = Scalar::quad(rat(2, 3), rat(-1, 5), 7);
        let y = Scalar::quad(rat(1, 2), rat(3, 4), 7);
        let z = x.try_mul(&y).unwrap().try_div(&y).unwrap();
        assert_eq!(z, x);
    }

    #[test]
    fn sign_with_opposing_parts() {
        // 2 - sqrt(3) > 0, 1 - sqrt(3) < 0, 2 - sqrt(4) = 0 (normalised away).
        assert_eq!(Scalar::quad(rat(2, 1), rat(-1, 1), 3).signum(), 1);
        assert_eq!(Scalar::quad(rat(1, 1), rat(-1, 1), 3).signum(), -1);
        assert_eq!(Scalar::quad(rat(2, 1), rat(-1, 1), 4).signum(), 0);
        assert_eq!(Scalar::quad(rat(-5, 1), rat(3, 1), 3).signum(), 1);
    }

    #[test]
    fn exact_floor_of_irrationals() {
        let s = Scalar::quad(Rat::zero(), rat(1, 1), 2); // sqrt 2
        assert_eq!(s.floor_int(), BigInt::from(1));
        let neg = -s;
        assert_eq!(neg.floor_int(), BigInt::from(-2));
        assert_eq!(q64(7, 2).floor_int(), BigInt::from(3));
        assert_eq!(q64(-7, 2).floor_int(), BigInt::from(-4));
        assert_eq!(q64(4, 1).floor_int(), BigInt::from(4));
    }

    #[test]
    fn sqrt_of_rationals() {
        assert_eq!(q64(9, 4).sqrt().unwrap(), q64(3, 2));
        let r = q64(1, 2).sqrt().unwrap(); // sqrt(1/2) = 1/2 sqrt 2
        assert_eq!(r.radical_part().1, 2);
        assert_eq!(*r.radical_part().0, rat(1, 2));
        assert!(q64(-1, 1).sqrt().is_none());
        let irr = Scalar::quad(rat(1, 1), rat(1, 1), 2);
        assert!(irr.sqrt().is_none());
    }

    #[test]
    fn parse_and_display_roundtrip() {
        for text in [
            "3",
            "-7/2",
            "1/2+1/2*sqrt(5)",
            "-1/3*sqrt(2)",
            "sqrt(3)",
            "2-sqrt(2)",
            "0",
        ] {
            let v = parse_scalar(text).unwrap();
            let again = parse_scalar(&v.to_string()).unwrap();
            assert_eq!(v, again, "roundtrip failed for {text}");
        }
        assert_eq!(parse_scalar("1/2 + 1/2*sqrt(5)").unwrap().to_string(), "1/2+1/2*sqrt(5)");
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("sqrt(2").is_err());
        assert!(parse_scalar("").is_err());
        assert!(parse_scalar("sqrt(2)+sqrt(3)").is_err());
    }

    #[test]
    fn cos_turn_table() {
        let cases = [
            (rat(0, 1), Some(rat(1, 1))),
            (rat(1, 2), Some(rat(-1, 1))),
            (rat(1, 4), Some(rat(0, 1))),
            (rat(3, 4), Some(rat(0, 1))),
            (rat(1, 3), Some(rat(-1, 2))),
            (rat(2, 3), Some(rat(-1, 2))),
            (rat(1, 6), Some(rat(1, 2))),
            (rat(5, 6), Some(rat(1, 2))),
            (rat(7, 6), Some(rat(1, 2))),
            (rat(-1, 6), Some(rat(1, 2))),
            (rat(1, 5), None),
        ];
        for (t, want) in cases {
            let got = exact_cos_turn(&t);
            assert_eq!(got, want, "cos turn {t}");
            if let Some(v) = got {
                let f = (2.0 * std::f64::consts::PI * t.to_f64().unwrap()).cos();
                assert!((v.to_f64().unwrap() - f).abs() < 1e-12);
            }
        }
        assert_eq!(exact_sin_turn(&rat(1, 4)), Some(rat(1, 1)));
        assert_eq!(exact_sin_turn(&rat(1, 12)), Some(rat(1, 2)));
    }

    #[test]
    fn comparisons_are_exact() {
        let a = Scalar::quad(rat(0, 1), rat(1, 1), 2); // sqrt 2 = 1.41421...
        let b = q64(141421356, 100000000);
        assert_eq!(a.cmp_exact(&b), Some(std::cmp::Ordering::Greater));
        let c = q64(141421357, 100000000);
        assert_eq!(a.cmp_exact(&c), Some(std::cmp::Ordering::Less));
    }
}
