//! Exact arithmetic in a real quadratic field `Q(sqrt d)`, continued fractions of
//! quadratic irrationals, the Perron condition and the reduction of a general
//! slope `w` to a Perron number.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{domain, HmxError, Result};
use crate::mat::{self, IMat2};

pub type Q = BigRational;

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Element `a + b*sqrt(d)` of a real quadratic field, viewed inside R with
/// `sqrt(d) > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "QuadNumRepr", into = "QuadNumRepr")]
pub struct QuadNum {
    a: Q,
    b: Q,
    d: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Writes `n = s^2 * core` with `core` square-free.
pub fn squarefree_split(n: u64) -> (u64, u64) {
    let mut s = 1u64;
    let mut core = 1u64;
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        for _ in 0..e / 2 {
            s *= p;
        }
        if e % 2 == 1 {
            core *= p;
        }
        p += 1;
    }
    (s, core * m)
}

fn check_d(d: i64) -> Result<()> {
    if d <= 1 || squarefree_split(d as u64).0 != 1 {
        return domain(format!("d = {d} must be a square-free integer > 1"));
    }
    Ok(())
}

impl QuadNum {
    pub fn new(a: Q, b: Q, d: i64) -> Result<Self> {
        check_d(d)?;
        Ok(QuadNum { a, b, d })
    }

    pub fn from_ints(a: i64, b: i64, d: i64) -> Result<Self> {
        Self::new(q_int(a), q_int(b), d)
    }

    /// `(p + q*sqrt(d))/r`.
    pub fn from_literal_parts(p: i64, q: i64, d: i64, r: i64) -> Result<Self> {
        if r == 0 {
            return domain("zero denominator");
        }
        Self::new(q_frac(p, r), q_frac(q, r), d)
    }

    pub fn rational(x: Q, d: i64) -> Result<Self> {
        Self::new(x, Q::zero(), d)
    }

    pub fn int(n: i64, d: i64) -> Self {
        QuadNum { a: q_int(n), b: Q::zero(), d }
    }

    /// Same field as `self`, value `n`.
    pub fn lift_int(&self, n: i64) -> Self {
        Self::int(n, self.d)
    }

    pub fn lift_rat(&self, x: Q) -> Self {
        QuadNum { a: x, b: Q::zero(), d: self.d }
    }

    pub fn zero_in(&self) -> Self {
        self.lift_int(0)
    }

    pub fn one_in(&self) -> Self {
        self.lift_int(1)
    }

    pub fn sqrt_d(d: i64) -> Result<Self> {
        Self::new(Q::zero(), Q::one(), d)
    }

    pub fn a(&self) -> &Q {
        &self.a
    }

    pub fn b(&self) -> &Q {
        &self.b
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.b.is_zero() && self.a.is_integer()
    }

    pub fn same_field(&self, other: &Self) -> Result<()> {
        if self.d != other.d {
            return Err(HmxError::FieldMismatch(self.d, other.d));
        }
        Ok(())
    }

    pub fn conj(&self) -> Self {
        QuadNum { a: self.a.clone(), b: -self.b.clone(), d: self.d }
    }

    pub fn trace(&self) -> Q {
        &self.a + &self.a
    }

    pub fn norm(&self) -> Q {
        &self.a * &self.a - &self.b * &self.b * q_int(self.d)
    }

    /// Exact sign of `a + b*sqrt(d)` as a real number.
    pub fn sign(&self) -> i8 {
        let sa = sgn(&self.a);
        let sb = sgn(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * q_int(self.d);
        if a2 > b2d {
            sa
        } else {
            sb
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.sign() < 0
    }

    /// Real-number comparison. Panics on a field mismatch.
    pub fn cmp_real(&self, other: &Self) -> Ordering {
        match (self - other).sign() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return domain("division by zero");
        }
        let n = self.norm();
        Ok(QuadNum { a: &self.a / &n, b: -(&self.b / &n), d: self.d })
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = self.one_in();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    pub fn scale(&self, k: &Q) -> Self {
        QuadNum { a: &self.a * k, b: &self.b * k, d: self.d }
    }

    /// `floor(self)`, exact.
    pub fn floor(&self) -> BigInt {
        if self.b.is_zero() {
            return self.a.floor().to_integer();
        }
        // self = (A + B sqrt d)/C with C > 0; floor(B sqrt d) is exact via isqrt.
        let c = self.a.denom().lcm(self.b.denom());
        let a_int = (&self.a * Q::from_integer(c.clone())).to_integer();
        let b_int = (&self.b * Q::from_integer(c.clone())).to_integer();
        let r = (&b_int * &b_int * BigInt::from(self.d)).sqrt();
        let t = if b_int.is_positive() { r } else { -r - 1 };
        (a_int + t).div_floor(&c)
    }

    /// Floating approximation, for diagnostics only.
    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * (self.d as f64).sqrt()
    }

    /// Integers `(p, q, r)` with `self = (p + q*sqrt(d))/r`, `r > 0` minimal.
    pub fn literal_parts(&self) -> (BigInt, BigInt, BigInt) {
        let r = self.a.denom().lcm(self.b.denom());
        let rq = Q::from_integer(r.clone());
        ((&self.a * &rq).to_integer(), (&self.b * &rq).to_integer(), r)
    }

    /// Parses `(p + q*sqrt(d))/r`. Also accepts a plain rational `p/r` in the
    /// field `d` given as `field`.
    pub fn parse_in(s: &str, field: Option<i64>) -> Result<Self> {
        parse_literal(s, field)
    }
}

fn sgn(x: &Q) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

pub fn arith(x: &QuadNum, y: &QuadNum, op: ArithOp) -> Result<QuadNum> {
    x.same_field(y)?;
    Ok(match op {
        ArithOp::Add => x + y,
        ArithOp::Sub => x - y,
        ArithOp::Mul => x * y,
        ArithOp::Div => return x.checked_div(y),
    })
}

fn assert_field(x: &QuadNum, y: &QuadNum) {
    if x.d != y.d {
        panic!("quadratic numbers from different fields: sqrt({}) and sqrt({})", x.d, y.d);
    }
}

impl Add for &QuadNum {
    type Output = QuadNum;
    fn add(self, o: &QuadNum) -> QuadNum {
        assert_field(self, o);
        QuadNum { a: &self.a + &o.a, b: &self.b + &o.b, d: self.d }
    }
}

impl Sub for &QuadNum {
    type Output = QuadNum;
    fn sub(self, o: &QuadNum) -> QuadNum {
        assert_field(self, o);
        QuadNum { a: &self.a - &o.a, b: &self.b - &o.b, d: self.d }
    }
}

impl Mul for &QuadNum {
    type Output = QuadNum;
    fn mul(self, o: &QuadNum) -> QuadNum {
        assert_field(self, o);
        let d = q_int(self.d);
        QuadNum {
            a: &self.a * &o.a + &self.b * &o.b * d,
            b: &self.a * &o.b + &self.b * &o.a,
            d: self.d,
        }
    }
}

impl Neg for &QuadNum {
    type Output = QuadNum;
    fn neg(self) -> QuadNum {
        QuadNum { a: -self.a.clone(), b: -self.b.clone(), d: self.d }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for QuadNum {
            type Output = QuadNum;
            fn $m(self, o: QuadNum) -> QuadNum {
                (&self).$m(&o)
            }
        }
        impl $tr<&QuadNum> for QuadNum {
            type Output = QuadNum;
            fn $m(self, o: &QuadNum) -> QuadNum {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for QuadNum {
    type Output = QuadNum;
    fn neg(self) -> QuadNum {
        -&self
    }
}

impl fmt::Display for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (p, q, r) = self.literal_parts();
        let sign = if q.is_negative() { '-' } else { '+' };
        write!(f, "({}{}{}*sqrt({}))/{}", p, sign, q.abs(), self.d, r)
    }
}

fn outer_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\((.*)\)(?:/(\d+))?$").unwrap())
}

fn body_regexes() -> &'static [Regex; 3] {
    static RE: OnceLock<[Regex; 3]> = OnceLock::new();
    RE.get_or_init(|| {
        [
            Regex::new(r"^([+-]?\d+)([+-])(\d*)\*?sqrt\((\d+)\)$").unwrap(),
            Regex::new(r"^()([+-]?)(\d*)\*?sqrt\((\d+)\)$").unwrap(),
            Regex::new(r"^([+-]?\d+)$").unwrap(),
        ]
    })
}

fn rational_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^([+-]?\d+)(?:/(\d+))?$").unwrap())
}

fn parse_big(s: &str) -> Result<BigInt> {
    BigInt::from_str(s).map_err(|e| HmxError::Parse(format!("{s}: {e}")))
}

fn parse_literal(s: &str, field: Option<i64>) -> Result<QuadNum> {
    let cleaned: String = s
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| if c == '\u{2212}' { '-' } else { c })
        .collect();
    let bad = || HmxError::Parse(format!("not a quadratic literal: {s}"));
    let (p, q, d, r) = if let Some(outer) = outer_regex().captures(&cleaned) {
        let r = outer.get(2).map(|m| parse_big(m.as_str())).transpose()?.unwrap_or_else(BigInt::one);
        let body = &outer[1];
        let c = body_regexes().iter().find_map(|re| re.captures(body)).ok_or_else(bad)?;
        let p = match c.get(1) {
            Some(m) if !m.as_str().is_empty() => parse_big(m.as_str())?,
            _ => BigInt::zero(),
        };
        match c.get(4) {
            Some(dm) => {
                let mut q = match &c[3] {
                    "" => BigInt::one(),
                    digits => parse_big(digits)?,
                };
                if &c[2] == "-" {
                    q = -q;
                }
                let raw: u64 = dm.as_str().parse().map_err(|_| bad())?;
                let (sq, core) = squarefree_split(raw);
                if core == 1 {
                    return Err(HmxError::Parse(format!("radicand {raw} is a perfect square")));
                }
                (p, q * BigInt::from(sq), core as i64, r)
            }
            None => {
                let d = field.ok_or_else(|| HmxError::Parse(format!("no field given for {s}")))?;
                (p, BigInt::zero(), d, r)
            }
        }
    } else if let (Some(c), Some(d)) = (rational_regex().captures(&cleaned), field) {
        let r = c.get(2).map(|m| parse_big(m.as_str())).transpose()?.unwrap_or_else(BigInt::one);
        (parse_big(&c[1])?, BigInt::zero(), d, r)
    } else {
        return Err(bad());
    };
    if r.is_zero() {
        return Err(HmxError::Parse(format!("zero denominator: {s}")));
    }
    if let Some(fd) = field {
        if fd != d {
            return Err(HmxError::FieldMismatch(fd, d));
        }
    }
    let rq = Q::from_integer(r);
    QuadNum::new(Q::from_integer(p) / &rq, Q::from_integer(q) / &rq, d).map_err(|e| HmxError::Parse(e.to_string()))
}

impl FromStr for QuadNum {
    type Err = HmxError;
    fn from_str(s: &str) -> Result<Self> {
        parse_literal(s, None)
    }
}

/// JSON form: either the object `{"a":"p/q","b":"p/q","d":n}` or a literal string.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub enum QuadNumRepr {
    Parts { a: String, b: String, d: i64 },
    Literal(String),
}

pub fn rat_to_string(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn rat_from_str(s: &str) -> Result<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse_big(d.trim())?;
            if d.is_zero() {
                return Err(HmxError::Parse(format!("zero denominator: {s}")));
            }
            Ok(Q::new(parse_big(n.trim())?, d))
        }
        None => Ok(Q::from_integer(parse_big(s)?)),
    }
}

impl From<QuadNum> for QuadNumRepr {
    fn from(x: QuadNum) -> Self {
        QuadNumRepr::Parts { a: rat_to_string(&x.a), b: rat_to_string(&x.b), d: x.d }
    }
}

impl TryFrom<QuadNumRepr> for QuadNum {
    type Error = HmxError;
    fn try_from(r: QuadNumRepr) -> Result<Self> {
        match r {
            QuadNumRepr::Parts { a, b, d } => QuadNum::new(rat_from_str(&a)?, rat_from_str(&b)?, d),
            QuadNumRepr::Literal(s) => s.parse(),
        }
    }
}

/// `floor(l * w)` by exact arithmetic.
pub fn floor_scaled(l: i64, w: &QuadNum) -> BigInt {
    w.scale(&q_int(l)).floor()
}

/// Ordinary continued fraction `[0; d_0, ..., d_{g-1}, (b_0, ..., b_{2r-1})]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CFExpansion {
    pub preperiod: Vec<u64>,
    pub period: Vec<u64>,
}

impl CFExpansion {
    pub fn is_purely_periodic(&self) -> bool {
        self.preperiod.is_empty()
    }
}

/// Quadratic surd `(p + sqrt(dd))/q` with `q | dd - p^2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Surd {
    p: BigInt,
    q: BigInt,
    dd: BigInt,
}

impl Surd {
    fn from_quad(x: &QuadNum) -> Surd {
        let (a, b, c) = x.literal_parts();
        let dd = &b * &b * BigInt::from(x.d);
        let (mut p, mut q) = if b.is_positive() { (a, c) } else { (-a, -c) };
        let mut dd = dd;
        if !(&dd - &p * &p).is_multiple_of(&q) {
            let aq = q.abs();
            p *= &aq;
            dd *= &q * &q;
            q *= &aq;
        }
        Surd { p, q, dd }
    }

    fn floor(&self) -> BigInt {
        let s = self.dd.sqrt();
        if self.q.is_positive() {
            (&self.p + &s).div_floor(&self.q)
        } else {
            let up: BigInt = (&self.p + &s).div_floor(&(-&self.q));
            -up - 1
        }
    }

    /// `1/(x - a)` for `a = floor(x)`.
    fn step(&self, a: &BigInt) -> Surd {
        let p = a * &self.q - &self.p;
        let q = (&self.dd - &p * &p) / &self.q;
        Surd { p, q, dd: self.dd.clone() }
    }
}

fn digit(a: &BigInt) -> Result<u64> {
    a.to_u64().ok_or_else(|| HmxError::Domain(format!("partial quotient {a} out of range")))
}

/// Continued fraction of an irrational `w` with `0 < w < 1`.
pub fn cf_expand(w: &QuadNum) -> Result<CFExpansion> {
    if w.is_rational() {
        return domain("cf_expand needs an irrational number");
    }
    if !w.is_positive() || w.cmp_real(&w.one_in()) != Ordering::Less {
        return domain(format!("cf_expand needs 0 < w < 1, got {w}"));
    }
    let mut x = Surd::from_quad(&w.inv()?);
    let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
    let mut digits = Vec::new();
    loop {
        let key = (x.p.clone(), x.q.clone());
        if let Some(&start) = seen.get(&key) {
            let preperiod = digits[..start].to_vec();
            let mut period = digits[start..].to_vec();
            if period.len() % 2 == 1 {
                period.extend_from_within(..);
            }
            return Ok(CFExpansion { preperiod, period });
        }
        seen.insert(key, digits.len());
        let a = x.floor();
        digits.push(digit(&a)?);
        x = x.step(&a);
    }
}

/// `0 < theta < 1` and `theta' < -1`.
pub fn is_perron(theta: &QuadNum) -> bool {
    if theta.is_rational() {
        return false;
    }
    let one = theta.one_in();
    theta.is_positive() && theta.cmp_real(&one) == Ordering::Less && (&theta.conj() + &one).is_negative()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionResult {
    pub theta: QuadNum,
    pub mat_d: IMat2,
    pub mat_t: IMat2,
}

/// Finds the Perron number `theta` with `w = (a theta + b)/(c theta + d)`.
///
/// The tail of the continued fraction is cut at the first purely periodic
/// complete quotient `x_k`, and `theta = 1/x_k`. `mat_t` is the product
/// `[[d_{g-1},1],[1,0]] ... [[d_0,1],[1,0]]` of the preperiod digits; its
/// transpose sends the ray of slope `theta` to the ray of slope `w`, so
/// `f_w(u) - det(D) f_theta(T.u)` is rational.
pub fn reduce_w(w: &QuadNum) -> Result<ReductionResult> {
    if w.is_rational() {
        return domain("reduce_w needs an irrational number");
    }
    if !w.is_positive() {
        return domain(format!("reduce_w needs w > 0, got {w}"));
    }
    let one = w.one_in();
    // Convergent seeds p_{-2}, p_{-1}, q_{-2}, q_{-1}.
    let (mut p2, mut p1, mut q2, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let mut x = w.clone();
    for _ in 0..10_000 {
        let xc = x.conj();
        if x.cmp_real(&one) == Ordering::Greater && xc.is_negative() && (&xc + &one).is_positive() {
            let theta = x.inv()?;
            let to_i = |v: &BigInt| v.to_i64().ok_or_else(|| HmxError::Domain("matrix entry out of range".into()));
            let mat_d = [[to_i(&p2)?, to_i(&p1)?], [to_i(&q2)?, to_i(&q1)?]];
            let mat_t = [[mat_d[1][1], mat_d[0][1]], [mat_d[1][0], mat_d[0][0]]];
            return Ok(ReductionResult { theta, mat_d, mat_t });
        }
        let a = x.floor();
        let np = &a * &p1 + &p2;
        let nq = &a * &q1 + &q2;
        p2 = std::mem::replace(&mut p1, np);
        q2 = std::mem::replace(&mut q1, nq);
        x = (&x - &w.lift_rat(Q::from_integer(a))).inv()?;
    }
    domain("no purely periodic tail found")
}

/// The unit `eta > 1` with `eta' > 0` given by one even period of the continued
/// fraction of `1/theta`.
pub fn positive_unit(theta: &QuadNum) -> Result<QuadNum> {
    if !is_perron(theta) {
        return domain(format!("{theta} does not satisfy the Perron condition"));
    }
    let cf = cf_expand(theta)?;
    let m = period_matrix(&cf.period);
    let inv = theta.inv()?;
    Ok(&inv.scale(&Q::from_integer(m[1][0].clone())) + &theta.lift_rat(Q::from_integer(m[1][1].clone())))
}

/// `prod [[b_i,1],[1,0]]` over the digits, left to right.
pub fn period_matrix(digits: &[u64]) -> [[BigInt; 2]; 2] {
    let mut m = [[BigInt::one(), BigInt::zero()], [BigInt::zero(), BigInt::one()]];
    for &b in digits {
        let b = BigInt::from(b);
        let n00 = &m[0][0] * &b + &m[0][1];
        let n10 = &m[1][0] * &b + &m[1][1];
        m = [[n00, m[0][0].clone()], [n10, m[1][0].clone()]];
    }
    m
}

/// Unimodular check helper for reduction results.
pub fn moebius(m: &IMat2, x: &QuadNum) -> Result<QuadNum> {
    let num = &x.scale(&q_int(m[0][0])) + &x.lift_int(m[0][1]);
    let den = &x.scale(&q_int(m[1][0])) + &x.lift_int(m[1][1]);
    num.checked_div(&den)
}

pub fn det_is_unimodular(m: &IMat2) -> bool {
    mat::det(m).abs() == 1
}
