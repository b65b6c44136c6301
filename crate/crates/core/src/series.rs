//! Numeric evaluation of the Hecke-Mahler series `f_w`, its twin `f+`, the
//! module variants `f_N`, and the Hecke geometric series `A_N`, `B_N`.

use astro_float::BigFloat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{domain, HmxError, Result};
use crate::lattice::ZModule;
use crate::numeric::{bf, bf_log2_abs, bf_lt, bf_quad, bf_rational, digits_for_bits, with_consts, Cx, CxRepr, RM};
use crate::qfield::{floor_scaled, is_perron, QuadNum};
use crate::rfun::{r_fn, Variant};
use crate::torus::{action_matrix, phi_eval, NumPoint, PerronFrame};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub prec: usize,
    pub max_terms: usize,
    pub tail_margin: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { prec: 96, max_terms: 1 << 20, tail_margin: 8 }
    }
}

impl EvalConfig {
    pub fn new(prec: usize) -> Result<Self> {
        if prec < 32 {
            return Err(HmxError::Input(format!("precision must be at least 32 bits, got {prec}")));
        }
        Ok(EvalConfig { prec, ..Default::default() })
    }

    /// Bits of accuracy claimed for results.
    pub fn tolerance_bits(&self) -> usize {
        self.prec.saturating_sub(self.tail_margin)
    }

    fn work(&self) -> usize {
        self.prec + 32
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainTag {
    D,
    Dplus,
    WHalfplane,
    WplusHalfplane,
}

/// A series value with its claimed absolute error `2^-err_bits`.
#[derive(Clone, Debug)]
pub struct SeriesValue {
    pub value: Cx,
    pub err_bits: usize,
    pub rigorous: bool,
    pub terms: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesValueRepr {
    pub value: CxRepr,
    pub err_bits: usize,
    pub rigorous: bool,
}

impl SeriesValue {
    pub fn repr(&self) -> SeriesValueRepr {
        SeriesValueRepr {
            value: CxRepr::from_cx(&self.value, digits_for_bits(self.err_bits)),
            err_bits: self.err_bits,
            rigorous: self.rigorous,
        }
    }
}

fn one_minus_guard(prec: usize) -> BigFloat {
    let p = prec + 16;
    bf(1.0, p).sub(&bf(2f64.powi(-((prec / 2) as i32)), p), p, RM)
}

/// `|x|^c` for `c > 0`, with `0^c = 0`.
fn abs_pow(x: &Cx, c: &BigFloat, p: usize) -> BigFloat {
    let a = x.abs(p);
    if a.is_zero() {
        return a;
    }
    with_consts(|cc| a.ln(p, RM, cc).mul(c, p, RM).exp(p, RM, cc))
}

fn max_one(x: &BigFloat, p: usize) -> BigFloat {
    if bf_lt(x, &bf(1.0, p)) {
        bf(1.0, p)
    } else {
        x.clone()
    }
}

/// `|u|^e1 |v|^e2` with real exponents `e1 > 0`, `e2 > 0`.
fn domain_quantity(p: &NumPoint, e1: &BigFloat, e2: &BigFloat, wp: usize) -> BigFloat {
    abs_pow(&p.u, e1, wp).mul(&abs_pow(&p.v, e2, wp), wp, RM)
}

/// Domain test for the numeric series; points within `2^-(prec/2)` of the boundary fail.
///
/// `w` is the slope for `D` and the Perron number for `Dplus`.
pub fn in_domain(p: &NumPoint, w: &QuadNum, tag: DomainTag, prec: usize) -> bool {
    let wp = prec + 32;
    let lim = one_minus_guard(prec);
    if !bf_lt(&p.u.abs(wp), &lim) {
        return false;
    }
    match tag {
        DomainTag::D => {
            if !w.is_positive() {
                return true;
            }
            let q = domain_quantity(p, &bf(1.0, wp), &bf_quad(w, wp), wp);
            bf_lt(&q, &lim)
        }
        DomainTag::Dplus => {
            let Ok(ti) = w.inv() else { return false };
            let t = bf_rational(&ti.trace(), wp);
            if !t.is_positive() {
                return false;
            }
            let q = domain_quantity(p, &t, &bf(2.0, wp), wp);
            bf_lt(&q, &lim)
        }
        DomainTag::WHalfplane | DomainTag::WplusHalfplane => false,
    }
}

/// Half-plane test for `(z, z')`: `W` is `Im z > 0, Im z' < Im z`, `W+` adds `Im z' > -Im z`.
pub fn in_half_plane(z: &Cx, zc: &Cx, tag: DomainTag) -> bool {
    let (a, b) = (&z.im, &zc.im);
    match tag {
        DomainTag::WHalfplane => a.is_positive() && bf_lt(b, a),
        DomainTag::WplusHalfplane => a.is_positive() && bf_lt(b, a) && bf_lt(&a.neg(), b),
        _ => false,
    }
}

/// Running prefix sums `sum_{h=1}^{k} v^h` for a nondecreasing cutoff `k`.
struct Prefix {
    k: i64,
    vpow: Cx,
    sum: Cx,
}

impl Prefix {
    fn new(p: usize) -> Self {
        Prefix { k: 0, vpow: Cx::one(p), sum: Cx::zero(p) }
    }

    fn advance(&mut self, v: &Cx, to: i64, p: usize) {
        while self.k < to {
            self.k += 1;
            self.vpow = self.vpow.mul(v, p);
            self.sum = self.sum.add(&self.vpow, p);
        }
    }
}

/// `sum_{l>=1} u^l sum_{h=lo(l)+1}^{hi(l)} v^h`, where `0 <= hi(l) - lo(l)`, `hi(l) <= c l`
/// and both cutoffs are nondecreasing.
///
/// The tail after `n - 1` terms is at most `c q^n (n + 1) / (1 - q)^2` with
/// `q = |u| max(1, |v|)^c`.
fn staircase(
    p: &NumPoint,
    lo: impl Fn(i64) -> i64,
    hi: impl Fn(i64) -> i64,
    c: &BigFloat,
    cfg: &EvalConfig,
) -> Result<SeriesValue> {
    let wp = cfg.work();
    let done = |value: Cx, terms: usize| SeriesValue { value, err_bits: cfg.tolerance_bits(), rigorous: true, terms };
    if p.u.is_zero() {
        return Ok(done(Cx::zero(wp), 0));
    }
    let q = p.u.abs(wp).mul(&abs_pow(&Cx::real(max_one(&p.v.abs(wp), wp), wp), c, wp), wp, RM);
    let one_q = bf(1.0, wp).sub(&q, wp, RM);
    if !one_q.is_positive() {
        return Err(HmxError::Domain("point outside the convergence domain".into()));
    }
    let (lq, l1q, lc) = (bf_log2_abs(&q), bf_log2_abs(&one_q), bf_log2_abs(c).max(0.0));
    let target = -((cfg.prec + 4) as f64);
    let mut acc = Cx::zero(wp);
    let mut upow = Cx::one(wp);
    let (mut top, mut bottom) = (Prefix::new(wp), Prefix::new(wp));
    let mut l: i64 = 0;
    loop {
        l += 1;
        if l as usize > cfg.max_terms {
            return Err(HmxError::Convergence(format!("no convergence after {} terms", cfg.max_terms)));
        }
        upow = upow.mul(&p.u, wp);
        let (a, b) = (lo(l).max(0), hi(l));
        if b > a {
            top.advance(&p.v, b, wp);
            bottom.advance(&p.v, a, wp);
            acc = acc.add(&upow.mul(&top.sum.sub(&bottom.sum, wp), wp), wp);
        }
        let n = (l + 1) as f64;
        let tail = lc + n * lq + (n + 1.0).log2() - 2.0 * l1q;
        if tail < target {
            return Ok(done(acc, l as usize));
        }
    }
}

fn small(x: BigInt) -> i64 {
    x.to_i64().expect("cutoff fits in i64")
}

/// `f_w(u, v) = sum_{l>=1} sum_{h=1}^{floor(l w)} u^l v^h`.
pub fn eval_f(w: &QuadNum, p: &NumPoint, cfg: &EvalConfig) -> Result<SeriesValue> {
    if !w.is_positive() {
        return Ok(SeriesValue { value: Cx::zero(cfg.work()), err_bits: cfg.tolerance_bits(), rigorous: true, terms: 0 });
    }
    if !in_domain(p, w, DomainTag::D, cfg.prec) {
        return domain(format!("point {:?} is not in the domain D for w = {w}", p.to_f64()));
    }
    let c = bf_quad(w, cfg.work());
    staircase(p, |_| 0, |l| small(floor_scaled(l, w)), &c, cfg)
}

/// `f+(u, v) = sum_{l>=1} sum_{h=floor(theta l)+1}^{floor(2 l / t(1/theta))} u^l v^h`.
pub fn eval_fplus(theta: &QuadNum, p: &NumPoint, cfg: &EvalConfig) -> Result<SeriesValue> {
    if !is_perron(theta) {
        return domain(format!("{theta} does not satisfy the Perron condition"));
    }
    if !in_domain(p, theta, DomainTag::Dplus, cfg.prec) {
        return domain(format!("point {:?} is not in the domain D+", p.to_f64()));
    }
    let t = theta.inv()?.trace();
    let (tn, td) = (t.numer().clone(), t.denom().clone());
    let hi = move |l: i64| small((BigInt::from(2 * l) * &td).div_floor(&tn));
    let c = bf_rational(&(crate::qfield::q_int(2) / &t), cfg.work());
    staircase(p, |l| small(floor_scaled(l, theta)), hi, &c, cfg)
}

fn add_values(a: SeriesValue, b: Cx, p: usize) -> SeriesValue {
    SeriesValue { value: a.value.add(&b, p), ..a }
}

/// `f_N` (`minus`) or `f+_N` (`plus`) for `N = beta^-1 M`, from the series at `u^beta`
/// and the exact correction `R_beta` or `R+_beta`.
pub fn eval_f_module(frame: &PerronFrame, beta: &QuadNum, variant: Variant, p: &NumPoint, cfg: &EvalConfig) -> Result<SeriesValue> {
    if !beta.is_positive() {
        return domain(format!("beta must be positive, got {beta}"));
    }
    let wp = cfg.work();
    let b = action_matrix(&frame.dual, beta)?;
    let pb = p.act(&b.m, wp)?;
    let positive_class = beta.conj().is_positive();
    // The defining identities swap the two series when beta' < 0.
    let series_plus = matches!((positive_class, variant), (true, Variant::Plus) | (false, Variant::Minus));
    let base = if series_plus { eval_fplus(&frame.theta, &pb, cfg)? } else { eval_f(&frame.theta, &pb, cfg)? };
    let r = r_fn(frame, &beta.zero_in(), beta, frame.module(), variant)?;
    Ok(add_values(base, r.eval(p, wp)?, wp))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum HeckeKind {
    A,
    B,
    C,
    D,
}

/// `A_N`, `B_N` as two-sided sums of unit shells `R_{eta,N}(u^{eta^k})`;
/// `C_N`, `D_N` by complex conjugation of `A_N`, `B_N` at conjugated arguments.
///
/// The truncation is heuristic: a side stops once a shell drops below `2^-(prec+4)`.
pub fn eval_hecke(frame: &PerronFrame, kind: HeckeKind, n: &ZModule, z: &Cx, zc: &Cx, cfg: &EvalConfig) -> Result<SeriesValue> {
    let (im, imc) = (z.im.is_positive(), zc.im.is_positive());
    let (neg_im, neg_imc) = (z.im.is_negative(), zc.im.is_negative());
    let ok = match kind {
        HeckeKind::A => im && neg_imc,
        HeckeKind::B => im && imc,
        HeckeKind::C => neg_im && imc,
        HeckeKind::D => neg_im && neg_imc,
    };
    if !ok {
        return domain(format!("{kind:?}_N needs the matching half-planes for (z, z')"));
    }
    match kind {
        HeckeKind::C | HeckeKind::D => {
            let base = if kind == HeckeKind::C { HeckeKind::A } else { HeckeKind::B };
            let v = eval_hecke(frame, base, n, &z.conj(), &zc.conj(), cfg)?;
            Ok(SeriesValue { value: v.value.conj(), ..v })
        }
        HeckeKind::A | HeckeKind::B => {
            let variant = if kind == HeckeKind::A { Variant::Minus } else { Variant::Plus };
            let eta = &frame.unit;
            let r = r_fn(frame, &eta.zero_in(), eta, n, variant)?;
            let wp = cfg.work();
            let target = -((cfg.prec + 4) as f64);
            let shell = |k: i64| -> Result<Cx> {
                let e = eta.pow(k)?;
                let (a, b) = (bf_quad(&e, wp), bf_quad(&e.conj(), wp));
                let pt = phi_eval(&frame.dual, &z.scale(&a, wp), &zc.scale(&b, wp), wp);
                r.eval(&pt, wp)
            };
            let mut acc = Cx::zero(wp);
            let mut terms = 0usize;
            for dir in [1i64, -1] {
                let mut k = if dir == 1 { 0 } else { -1 };
                loop {
                    if terms > 400 {
                        return Err(HmxError::Convergence("Hecke shell sum did not settle".into()));
                    }
                    let s = shell(k)?;
                    acc = acc.add(&s, wp);
                    terms += 1;
                    if s.log2_abs(wp) < target {
                        break;
                    }
                    k += dir;
                }
            }
            Ok(SeriesValue { value: acc, err_bits: cfg.tolerance_bits(), rigorous: false, terms })
        }
    }
}
