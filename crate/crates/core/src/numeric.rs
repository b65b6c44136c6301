//! Arbitrary-precision real and complex helpers on top of `astro-float`.

use std::cell::RefCell;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{HmxError, Result};
use crate::qfield::{QuadNum, Q};

pub const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

pub fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

pub fn bf(x: f64, p: usize) -> BigFloat {
    BigFloat::from_f64(x, p)
}

pub fn bf_int(n: i64, p: usize) -> BigFloat {
    BigFloat::from_i64(n, p)
}

pub fn bf_parse(s: &str, p: usize) -> Result<BigFloat> {
    let x = with_consts(|cc| BigFloat::parse(s.trim(), Radix::Dec, p, RM, cc));
    if x.is_nan() || x.is_inf() {
        return Err(HmxError::Parse(format!("not a decimal number: {s}")));
    }
    Ok(x)
}

pub fn bf_bigint(n: &BigInt, p: usize) -> BigFloat {
    with_consts(|cc| BigFloat::parse(&n.to_string(), Radix::Dec, p, RM, cc))
}

pub fn bf_rational(q: &Q, p: usize) -> BigFloat {
    bf_bigint(q.numer(), p).div(&bf_bigint(q.denom(), p), p, RM)
}

pub fn bf_quad(x: &QuadNum, p: usize) -> BigFloat {
    let s = bf_int(x.d(), p).sqrt(p, RM);
    bf_rational(x.a(), p).add(&bf_rational(x.b(), p).mul(&s, p, RM), p, RM)
}

pub fn bf_pi(p: usize) -> BigFloat {
    with_consts(|cc| cc.pi(p, RM))
}

pub fn bf_to_string(x: &BigFloat) -> String {
    with_consts(|cc| x.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into())
}

/// Rounds to `digits` significant decimal digits in scientific notation.
pub fn bf_to_string_digits(x: &BigFloat, digits: usize) -> String {
    let full = bf_to_string(x);
    let (mant, exp) = match full.split_once('e') {
        Some((m, e)) => (m.to_string(), e.to_string()),
        None => return full,
    };
    let neg = mant.starts_with('-');
    let body: String = mant.trim_start_matches('-').chars().filter(|c| *c != '.').collect();
    if body.len() <= digits {
        return full;
    }
    let mut ds: Vec<u8> = body.bytes().map(|b| b - b'0').collect();
    let round_up = ds[digits] >= 5;
    ds.truncate(digits);
    let mut e: i64 = exp.parse().unwrap_or(0);
    if round_up {
        let mut i = digits;
        loop {
            if i == 0 {
                ds.insert(0, 1);
                ds.pop();
                e += 1;
                break;
            }
            i -= 1;
            if ds[i] == 9 {
                ds[i] = 0;
            } else {
                ds[i] += 1;
                break;
            }
        }
    }
    let digits_str: String = ds.iter().map(|d| (d + b'0') as char).collect();
    let sign = if neg { "-" } else { "" };
    format!("{sign}{}.{}e{}{}", &digits_str[..1], &digits_str[1..], if e >= 0 { "+" } else { "" }, e)
}

pub fn bf_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    bf_to_string(x).parse().unwrap_or(f64::NAN)
}

/// `log2 |x|` as an `f64`; `-inf` for zero.
pub fn bf_log2_abs(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let e = x.exponent().unwrap_or(0) as f64;
    // Normalize the mantissa into [0.5, 1) to keep the f64 conversion in range.
    let mut m = x.abs();
    m.set_exponent(0);
    e + bf_to_f64(&m).log2()
}

pub fn bf_lt(a: &BigFloat, b: &BigFloat) -> bool {
    a.cmp(b).map(|c| c < 0).unwrap_or(false)
}

/// Complex number with `BigFloat` parts.
#[derive(Clone, Debug)]
pub struct Cx {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl Cx {
    pub fn new(re: BigFloat, im: BigFloat) -> Self {
        Cx { re, im }
    }

    pub fn zero(p: usize) -> Self {
        Cx::new(bf(0.0, p), bf(0.0, p))
    }

    pub fn one(p: usize) -> Self {
        Cx::new(bf(1.0, p), bf(0.0, p))
    }

    pub fn real(re: BigFloat, p: usize) -> Self {
        Cx::new(re, bf(0.0, p))
    }

    pub fn from_f64(re: f64, im: f64, p: usize) -> Self {
        Cx::new(bf(re, p), bf(im, p))
    }

    pub fn parse(re: &str, im: &str, p: usize) -> Result<Self> {
        Ok(Cx::new(bf_parse(re, p)?, bf_parse(im, p)?))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &Cx, p: usize) -> Cx {
        Cx::new(self.re.add(&o.re, p, RM), self.im.add(&o.im, p, RM))
    }

    pub fn sub(&self, o: &Cx, p: usize) -> Cx {
        Cx::new(self.re.sub(&o.re, p, RM), self.im.sub(&o.im, p, RM))
    }

    pub fn mul(&self, o: &Cx, p: usize) -> Cx {
        let re = self.re.mul(&o.re, p, RM).sub(&self.im.mul(&o.im, p, RM), p, RM);
        let im = self.re.mul(&o.im, p, RM).add(&self.im.mul(&o.re, p, RM), p, RM);
        Cx::new(re, im)
    }

    pub fn scale(&self, k: &BigFloat, p: usize) -> Cx {
        Cx::new(self.re.mul(k, p, RM), self.im.mul(k, p, RM))
    }

    pub fn neg(&self) -> Cx {
        Cx::new(self.re.neg(), self.im.neg())
    }

    pub fn conj(&self) -> Cx {
        Cx::new(self.re.clone(), self.im.neg())
    }

    pub fn abs2(&self, p: usize) -> BigFloat {
        self.re.mul(&self.re, p, RM).add(&self.im.mul(&self.im, p, RM), p, RM)
    }

    pub fn abs(&self, p: usize) -> BigFloat {
        self.abs2(p).sqrt(p, RM)
    }

    pub fn inv(&self, p: usize) -> Result<Cx> {
        if self.is_zero() {
            return Err(HmxError::Pole("division by zero".into()));
        }
        let n = self.abs2(p);
        Ok(Cx::new(self.re.div(&n, p, RM), self.im.neg().div(&n, p, RM)))
    }

    pub fn div(&self, o: &Cx, p: usize) -> Result<Cx> {
        Ok(self.mul(&o.inv(p)?, p))
    }

    pub fn powi(&self, k: i64, p: usize) -> Result<Cx> {
        let base = if k < 0 { self.inv(p)? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Cx::one(p);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq, p);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq, p);
            }
        }
        Ok(acc)
    }

    /// `exp(2 pi i t)`.
    pub fn e(t: &Cx, p: usize) -> Cx {
        let two_pi = bf_pi(p).mul(&bf(2.0, p), p, RM);
        let ang = t.re.mul(&two_pi, p, RM);
        let mag = with_consts(|cc| t.im.mul(&two_pi, p, RM).neg().exp(p, RM, cc));
        let (c, s) = with_consts(|cc| (ang.cos(p, RM, cc), ang.sin(p, RM, cc)));
        Cx::new(c.mul(&mag, p, RM), s.mul(&mag, p, RM))
    }

    /// `exp(2 pi i r)` for a rational `r`.
    pub fn root_of_unity(r: &Q, p: usize) -> Cx {
        Cx::e(&Cx::real(bf_rational(r, p), p), p)
    }

    pub fn log2_abs(&self, p: usize) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        bf_log2_abs(&self.abs2(p)) / 2.0
    }

    pub fn to_strings(&self, digits: usize) -> [String; 2] {
        [bf_to_string_digits(&self.re, digits), bf_to_string_digits(&self.im, digits)]
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (bf_to_f64(&self.re), bf_to_f64(&self.im))
    }
}

/// JSON form `[re, im]` with decimal strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CxRepr(pub String, pub String);

impl CxRepr {
    pub fn to_cx(&self, p: usize) -> Result<Cx> {
        Cx::parse(&self.0, &self.1, p)
    }

    pub fn from_cx(z: &Cx, digits: usize) -> Self {
        let [a, b] = z.to_strings(digits);
        CxRepr(a, b)
    }
}

/// Decimal digits that carry `bits` binary digits.
pub fn digits_for_bits(bits: usize) -> usize {
    (bits as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2
}
