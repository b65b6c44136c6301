//! Exact semi-freeness decisions for tuples of coset points `Phi(alpha) v^beta`,
//! witness extraction and symbolic certificates for the resulting relations.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cyclo::{sum_roots, CycloCoeff};
use crate::error::{HmxError, Result};
use crate::lattice::{coset_reps, index, DualData, ZModule};
use crate::numeric::{bf_parse, Cx, CxRepr};
use crate::qfield::{QuadNum, QuadNumRepr, Q};
use crate::rfun::{r_fn, theta_fn, RationalFn2, Variant};
use crate::series::{eval_f, EvalConfig};
use crate::torus::{action_matrix, fixing_unit, rotation, torsion_numeric, NumPoint, PerronFrame};

/// Largest number of cosets `L^2` a decision may enumerate.
pub const MAX_COSETS: u64 = 1 << 20;

/// `Phi(alpha) * base^beta` with `alpha` reduced modulo `M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetPoint {
    pub alpha: QuadNum,
    pub beta: QuadNum,
    pub base: String,
}

/// Points grouped by base label, with optional numeric values for the bases.
///
/// Classes whose exponents were all negative are stored with `beta -> -beta`
/// and recorded in `flipped`; their working base is the inverse of the given one.
#[derive(Clone, Debug)]
pub struct SemiFreeTuple {
    pub frame: PerronFrame,
    pub points: Vec<CosetPoint>,
    pub bases: BTreeMap<String, NumPoint>,
    pub flipped: Vec<String>,
}

impl SemiFreeTuple {
    pub fn new(frame: PerronFrame, raw: Vec<CosetPoint>) -> Result<Self> {
        if raw.is_empty() {
            return Err(HmxError::Input("empty tuple".into()));
        }
        let m = frame.module().clone();
        let mut points = Vec::with_capacity(raw.len());
        for p in raw {
            p.alpha.same_field(&frame.theta).map_err(|_| HmxError::Input(format!("alpha {} is in the wrong field", p.alpha)))?;
            p.beta.same_field(&frame.theta).map_err(|_| HmxError::Input(format!("beta {} is in the wrong field", p.beta)))?;
            if p.beta.is_zero() {
                return Err(HmxError::Input("beta must be non-zero".into()));
            }
            if !frame.in_order(&p.beta) {
                return Err(HmxError::Input(format!("beta = {} is not in the order of M", p.beta)));
            }
            points.push(CosetPoint { alpha: m.reduce(&p.alpha)?, beta: p.beta, base: p.base });
        }
        let mut t = SemiFreeTuple { frame, points, bases: BTreeMap::new(), flipped: Vec::new() };
        for (label, members) in t.classes() {
            let neg = members.iter().filter(|&&i| t.points[i].beta.is_negative()).count();
            if neg == members.len() {
                for &i in &members {
                    t.points[i].beta = -&t.points[i].beta;
                }
                t.flipped.push(label);
            } else if neg > 0 {
                return Err(HmxError::Input(format!("class {label} mixes positive and negative exponents")));
            }
        }
        Ok(t)
    }

    pub fn with_base(mut self, label: &str, v: NumPoint) -> Self {
        self.bases.insert(label.to_string(), v);
        self
    }

    /// Base labels in order of first appearance with the indices of their points.
    pub fn classes(&self) -> Vec<(String, Vec<usize>)> {
        let mut out: Vec<(String, Vec<usize>)> = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            match out.iter_mut().find(|(b, _)| *b == p.base) {
                Some((_, v)) => v.push(i),
                None => out.push((p.base.clone(), vec![i])),
            }
        }
        out
    }

    pub fn is_flipped(&self, label: &str) -> bool {
        self.flipped.iter().any(|l| l == label)
    }

    /// The base actually paired with the stored exponents.
    pub fn working_base(&self, label: &str, prec: usize) -> Result<NumPoint> {
        let v = self.bases.get(label).ok_or_else(|| HmxError::Input(format!("no numeric value for base {label}")))?;
        if self.is_flipped(label) {
            Ok(NumPoint::new(v.u.inv(prec)?, v.v.inv(prec)?))
        } else {
            Ok(v.clone())
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: TupleRepr = serde_json::from_str(s).map_err(|e| HmxError::Parse(e.to_string()))?;
        raw.build()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Scalar {
    Str(String),
    Num(f64),
}

impl Scalar {
    fn text(&self) -> String {
        match self {
            Scalar::Str(s) => s.clone(),
            Scalar::Num(x) => format!("{x:e}"),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CoordRepr {
    Pair(Scalar, Scalar),
    Real(Scalar),
}

impl CoordRepr {
    fn to_cx(&self, p: usize) -> Result<Cx> {
        match self {
            CoordRepr::Pair(a, b) => Cx::parse(&a.text(), &b.text(), p),
            CoordRepr::Real(a) => Ok(Cx::real(bf_parse(&a.text(), p)?, p)),
        }
    }
}

#[derive(Deserialize)]
struct BaseRepr {
    u: CoordRepr,
    v: CoordRepr,
}

#[derive(Deserialize)]
struct PointRepr {
    alpha: QuadNumRepr,
    beta: QuadNumRepr,
    base: String,
}

#[derive(Deserialize)]
struct TupleRepr {
    theta: Option<QuadNumRepr>,
    points: Vec<PointRepr>,
    #[serde(default)]
    bases: BTreeMap<String, BaseRepr>,
}

/// Bits used to hold numeric base values read from JSON.
const BASE_BITS: usize = 256;

fn quad_in(r: QuadNumRepr, d: i64) -> Result<QuadNum> {
    match r {
        QuadNumRepr::Literal(s) => QuadNum::parse_in(&s, Some(d)),
        parts => QuadNum::try_from(parts),
    }
}

impl TupleRepr {
    fn build(self) -> Result<SemiFreeTuple> {
        let theta = match self.theta {
            Some(r) => QuadNum::try_from(r)?,
            None => QuadNum::from_ints(-1, 1, 2)?,
        };
        let frame = PerronFrame::new(&theta)?;
        let d = theta.d();
        let mut pts = Vec::new();
        for p in self.points {
            pts.push(CosetPoint { alpha: quad_in(p.alpha, d)?, beta: quad_in(p.beta, d)?, base: p.base });
        }
        let mut t = SemiFreeTuple::new(frame, pts)?;
        for (label, b) in self.bases {
            let v = NumPoint::new(b.u.to_cx(BASE_BITS)?, b.v.to_cx(BASE_BITS)?);
            t = t.with_base(&label, v);
        }
        Ok(t)
    }
}

/// Options for `choose_l`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LOptions {
    /// Replace the product of the `g_i l_i` by their lcm.
    pub lcm: bool,
    /// Override `N' = m + 1`; must exceed the class size.
    pub n_prime: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LChoice {
    pub l: u64,
    pub n_prime: u64,
    pub g: Vec<u64>,
    pub ell: Vec<u64>,
}

fn to_u64(x: &BigInt, what: &str) -> Result<u64> {
    x.to_u64().ok_or_else(|| HmxError::Size(format!("{what} does not fit in 64 bits")))
}

/// `L = N' * prod g_i l_i` with `g_i = |n(beta_i)|` and `l_i` the order of `alpha_i` mod `M`.
pub fn choose_l(frame: &PerronFrame, class: &[CosetPoint], opts: LOptions) -> Result<LChoice> {
    if class.is_empty() {
        return Err(HmxError::Input("empty class".into()));
    }
    let m = class.len() as u64;
    let n_prime = opts.n_prime.unwrap_or(m + 1);
    if n_prime <= m {
        return Err(HmxError::Input(format!("N' = {n_prime} must exceed the class size {m}")));
    }
    let mut g = Vec::new();
    let mut ell = Vec::new();
    let mut acc = BigInt::one();
    for p in class {
        let gi = p.beta.norm().abs();
        if !gi.is_integer() {
            return Err(HmxError::Input(format!("beta = {} is not integral", p.beta)));
        }
        let gi = gi.to_integer();
        let li = frame.module().torsion_order(&p.alpha)?;
        let f = &gi * &li;
        acc = if opts.lcm { acc.lcm(&f) } else { acc * f };
        g.push(to_u64(&gi, "index")?);
        ell.push(to_u64(&li, "torsion order")?);
    }
    let l = to_u64(&(acc * BigInt::from(n_prime)), "L")?;
    Ok(LChoice { l, n_prime, g, ell })
}

fn frac_num(x: &Q, l: u64) -> Result<i128> {
    let y = x * Q::from_integer(BigInt::from(l));
    if !y.is_integer() {
        return Err(HmxError::Domain(format!("L = {l} does not clear the torsion of the point")));
    }
    y.to_integer().to_i128().ok_or_else(|| HmxError::Size("coordinate overflow".into()))
}

/// `chi(mu) = 1` iff `beta mu + alpha` lies in `M`, for `mu = (a B0 + b B1)/L`,
/// stored at index `a L + b`.
pub fn char_vector(frame: &PerronFrame, alpha: &QuadNum, beta: &QuadNum, l: u64) -> Result<Vec<bool>> {
    if l == 0 || l.checked_mul(l).map_or(true, |n| n > MAX_COSETS) {
        return Err(HmxError::Size(format!("L = {l} exceeds {MAX_COSETS} cosets")));
    }
    let m = frame.module();
    let mb = m.multiplication_matrix(beta)?;
    let mut bm = [[0i128; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            if !mb[i][j].is_integer() {
                return Err(HmxError::NotInOrder(beta.to_string()));
            }
            bm[i][j] = mb[i][j].to_integer().to_i128().ok_or_else(|| HmxError::Size("matrix overflow".into()))?;
        }
    }
    let (c0, c1) = m.coords(alpha)?;
    let (x0, x1) = (frac_num(&c0, l)?, frac_num(&c1, l)?);
    let li = l as i128;
    let mut out = Vec::with_capacity((l * l) as usize);
    for a in 0..li {
        for b in 0..li {
            let y0 = bm[0][0] * a + bm[0][1] * b + x0;
            let y1 = bm[1][0] * a + bm[1][1] * b + x1;
            out.push(y0.rem_euclid(li) == 0 && y1.rem_euclid(li) == 0);
        }
    }
    let ones = out.iter().filter(|&&x| x).count() as u64;
    let g = beta.norm().abs().to_integer().to_u64().unwrap_or(0);
    if ones != 0 && ones != g {
        return Err(HmxError::Domain(format!("support size {ones} differs from |n(beta)| = {g}")));
    }
    Ok(out)
}

/// Gauss-Jordan elimination over `Z` without fractions; returns the reduced rows and
/// pivot columns.
fn fraction_free_reduce(mut rows: Vec<Vec<BigInt>>, ncols: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, pr);
        for i in 0..rows.len() {
            if i == r || rows[i][c].is_zero() {
                continue;
            }
            let (p, f) = (rows[r][c].clone(), rows[i][c].clone());
            let pivot_row = rows[r].clone();
            for (x, y) in rows[i].iter_mut().zip(&pivot_row) {
                *x = &*x * &p - &f * y;
            }
            let g = rows[i].iter().fold(BigInt::zero(), |g, x| g.gcd(x));
            if g > BigInt::one() {
                for x in rows[i].iter_mut() {
                    *x = &*x / &g;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Primitive integer vector; the entry of largest absolute value is made positive,
/// ties going to the earliest such entry.
pub fn normalize_witness(v: &[BigInt]) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    let mut out: Vec<BigInt> = v.iter().map(|x| x / &g).collect();
    let lead = out.iter().enumerate().fold(0, |best, (i, x)| if x.abs() > out[best].abs() { i } else { best });
    if out[lead].is_negative() {
        out.iter_mut().for_each(|x| *x = -&*x);
    }
    out
}

/// Rank and, when deficient, the kernel vector attached to the first free column of
/// the system `sum b_i chi_i = 0`.
fn chi_kernel(chis: &[Vec<bool>]) -> Result<(usize, Option<Vec<BigInt>>)> {
    let m = chis.len();
    if m > 64 {
        return Err(HmxError::Size("classes are limited to 64 points".into()));
    }
    // Columns of the chi-matrix with equal patterns impose the same equation.
    let mut patterns: Vec<u64> = (0..chis[0].len())
        .map(|k| chis.iter().enumerate().fold(0u64, |acc, (i, c)| if c[k] { acc | (1 << i) } else { acc }))
        .filter(|&p| p != 0)
        .collect();
    patterns.sort_unstable();
    patterns.dedup();
    let rows: Vec<Vec<BigInt>> =
        patterns.iter().map(|p| (0..m).map(|i| BigInt::from((p >> i) & 1)).collect()).collect();
    let (red, piv) = fraction_free_reduce(rows, m);
    let rank = piv.len();
    let Some(free) = (0..m).find(|c| !piv.contains(c)) else { return Ok((rank, None)) };
    let scale = red.iter().zip(&piv).fold(BigInt::one(), |acc, (row, &p)| acc.lcm(&row[p]));
    let mut b = vec![BigInt::zero(); m];
    b[free] = scale.clone();
    for (row, &p) in red.iter().zip(&piv) {
        b[p] = -(&row[free] * &scale) / &row[p];
    }
    Ok((rank, Some(b)))
}

/// `sum_i (c_i / g_i) chi_i == 0` checked on every coset.
fn witness_holds(chis: &[Vec<bool>], g: &[u64], c: &[BigInt]) -> bool {
    let lcm = g.iter().fold(BigInt::one(), |acc, &x| acc.lcm(&BigInt::from(x)));
    let w: Vec<BigInt> = c.iter().zip(g).map(|(ci, &gi)| ci * (&lcm / BigInt::from(gi))).collect();
    (0..chis[0].len()).all(|k| chis.iter().zip(&w).filter(|(ch, _)| ch[k]).fold(BigInt::zero(), |s, (_, x)| s + x).is_zero())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassVerdict {
    pub base: String,
    pub members: Vec<usize>,
    pub l: LChoice,
    pub rank: usize,
    /// `c_i = |n(beta_i)| b_i`, primitive; `None` when the class is independent.
    pub witness: Option<Vec<BigInt>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub semifree: bool,
    pub classes: Vec<ClassVerdict>,
}

impl Verdict {
    /// The first class carrying a witness.
    pub fn dependent_class(&self) -> Option<&ClassVerdict> {
        self.classes.iter().find(|c| c.witness.is_some())
    }
}

pub fn decide(t: &SemiFreeTuple) -> Result<Verdict> {
    decide_with(t, LOptions::default())
}

pub fn decide_with(t: &SemiFreeTuple, opts: LOptions) -> Result<Verdict> {
    let mut classes = Vec::new();
    for (base, members) in t.classes() {
        let pts: Vec<CosetPoint> = members.iter().map(|&i| t.points[i].clone()).collect();
        let choice = choose_l(&t.frame, &pts, opts)?;
        let chis = pts.iter().map(|p| char_vector(&t.frame, &p.alpha, &p.beta, choice.l)).collect::<Result<Vec<_>>>()?;
        let (rank, kernel) = chi_kernel(&chis)?;
        let witness = match kernel {
            None => None,
            Some(b) => {
                let c: Vec<BigInt> = b.iter().zip(&choice.g).map(|(bi, &gi)| bi * BigInt::from(gi)).collect();
                let c = normalize_witness(&c);
                if !witness_holds(&chis, &choice.g, &c) {
                    return Err(HmxError::Certificate(format!("kernel vector for class {base} fails the chi system")));
                }
                Some(c)
            }
        };
        classes.push(ClassVerdict { base, members, l: choice, rank, witness });
    }
    let semifree = classes.iter().all(|c| c.witness.is_none());
    Ok(Verdict { semifree, classes })
}

/// Relation coefficients `e_i` with `sum e_i f(u_i) = Lambda(v)`, plus the rebasing used.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub lambda: RationalFn2,
    pub coefficients: Vec<BigInt>,
    pub rebase: u32,
    pub fixing_unit: QuadNum,
}

fn q_big(x: &BigInt) -> Q {
    Q::from_integer(x.clone())
}

/// Least `k` with every `beta_i eta^k` inside the analytic range.
fn rebase_power(frame: &PerronFrame, betas: &[QuadNum]) -> Result<u32> {
    for k in 0..64u32 {
        let unit = frame.unit.pow(k as i64)?;
        let mut ok = true;
        for b in betas {
            let x = b * &unit;
            let bc = x.conj();
            let in_range = if bc.is_positive() { x.cmp_real(&bc).is_ge() } else { x.cmp_real(&-&bc).is_gt() };
            if !in_range {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(k);
        }
    }
    Err(HmxError::Convergence("no unit power brings the exponents into range".into()))
}

/// The exact `Lambda` for a witness of one class.
pub fn certificate(t: &SemiFreeTuple, class: &ClassVerdict, witness: &[BigInt]) -> Result<Certificate> {
    let frame = &t.frame;
    let pts: Vec<&CosetPoint> = class.members.iter().map(|&i| &t.points[i]).collect();
    if witness.len() != pts.len() || witness.iter().all(|c| c.is_zero()) {
        return Err(HmxError::Certificate("witness length or content does not match the class".into()));
    }
    let chis = pts.iter().map(|p| char_vector(frame, &p.alpha, &p.beta, class.l.l)).collect::<Result<Vec<_>>>()?;
    if !witness_holds(&chis, &class.l.g, witness) {
        return Err(HmxError::Certificate("witness does not satisfy the chi system".into()));
    }
    let k = rebase_power(frame, &pts.iter().map(|p| p.beta.clone()).collect::<Vec<_>>())?;
    let unit_k = frame.unit.pow(k as i64)?;
    let betas: Vec<QuadNum> = pts.iter().map(|p| &p.beta * &unit_k).collect();
    let m = frame.module();

    let alphas: Vec<QuadNum> = pts.iter().map(|p| p.alpha.clone()).collect();
    let (eta, _) = fixing_unit(frame, &alphas)?;
    for variant in [Variant::Minus, Variant::Plus] {
        let mut shell = RationalFn2::zero();
        for ((p, b), c) in pts.iter().zip(&betas).zip(witness) {
            let n = m.scale(&b.inv()?)?;
            let r = r_fn(frame, &eta.zero_in(), &eta, &n, variant)?;
            shell = shell.add(&r.twist(&rotation(&frame.dual, &p.alpha.checked_div(b)?)).scale_q(&q_big(c)));
        }
        if !shell.is_zero() {
            return Err(HmxError::Certificate(format!("shell identity fails for the {variant:?} variant")));
        }
    }

    let theta_m = theta_fn(frame, m)?;
    let mut lambda = RationalFn2::zero();
    let mut coefficients = Vec::new();
    for ((p, b), c) in pts.iter().zip(&betas).zip(witness) {
        let cq = q_big(c);
        lambda = lambda.sub(&r_fn(frame, &p.alpha, b, m, Variant::Minus)?.scale_q(&cq));
        if b.conj().is_negative() {
            let bm = action_matrix(&frame.dual, b)?;
            let th = theta_m.twist(&rotation(&frame.dual, &p.alpha)).compose_pow(&bm.m)?;
            lambda = lambda.sub(&th.scale_q(&cq));
            coefficients.push(-c);
        } else {
            coefficients.push(c.clone());
        }
    }
    let mut back = frame.unit.pow(-(k as i64))?;
    if t.is_flipped(&class.base) {
        back = -back;
    }
    if k > 0 || t.is_flipped(&class.base) {
        lambda = lambda.compose_pow(&action_matrix(&frame.dual, &back)?.m)?;
    }
    Ok(Certificate { lambda, coefficients, rebase: k, fixing_unit: eta })
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossCheck {
    pub lhs: CxRepr,
    pub rhs: CxRepr,
    /// `log2 |lhs - rhs|`; absent when the difference is exactly zero.
    pub log2_diff: Option<f64>,
    pub tol_bits: usize,
    pub pass: bool,
}

/// Evaluates `sum e_i f(u_i)` from the series and `Lambda` at the numeric base.
pub fn numeric_crosscheck(t: &SemiFreeTuple, class: &ClassVerdict, cert: &Certificate, cfg: &EvalConfig) -> Result<CrossCheck> {
    let wp = cfg.prec + 32;
    let w = t.working_base(&class.base, wp)?;
    let v = t.bases.get(&class.base).expect("working_base checked the label");
    let mut lhs = Cx::zero(wp);
    for (&i, e) in class.members.iter().zip(&cert.coefficients) {
        let p = &t.points[i];
        let b = action_matrix(&t.frame.dual, &p.beta)?;
        let ui = torsion_numeric(&t.frame.dual, &p.alpha, wp).mul(&w.act(&b.m, wp)?, wp);
        let f = eval_f(&t.frame.theta, &ui, cfg)?;
        let ef = e.to_f64().ok_or_else(|| HmxError::Size("coefficient overflow".into()))?;
        lhs = lhs.add(&f.value.scale(&crate::numeric::bf(ef, wp), wp), wp);
    }
    let rhs = cert.lambda.eval(v, wp)?;
    let diff = lhs.sub(&rhs, wp).log2_abs(wp);
    let tol_bits = cfg.prec.saturating_sub(8);
    let digits = crate::numeric::digits_for_bits(cfg.prec);
    Ok(CrossCheck {
        lhs: CxRepr::from_cx(&lhs, digits),
        rhs: CxRepr::from_cx(&rhs, digits),
        log2_diff: diff.is_finite().then_some(diff),
        tol_bits,
        pass: diff < -(tol_bits as f64),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassReport {
    pub base: String,
    pub witness: Option<Vec<i64>>,
    #[serde(rename = "L")]
    pub l: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SemifreeReport {
    pub semifree: bool,
    pub classes: Vec<ClassReport>,
    pub certificate: Option<RationalFn2>,
    pub crosscheck: Option<CrossCheck>,
}

/// Decision, then optionally the certificate and its numeric check for the first
/// dependent class.
pub fn run(t: &SemiFreeTuple, opts: LOptions, certify: bool, crosscheck: Option<&EvalConfig>) -> Result<SemifreeReport> {
    let verdict = decide_with(t, opts)?;
    let mut classes = Vec::new();
    for c in &verdict.classes {
        let witness = match &c.witness {
            Some(w) => Some(w.iter().map(|x| x.to_i64().ok_or_else(|| HmxError::Size("witness entry overflow".into()))).collect::<Result<Vec<_>>>()?),
            None => None,
        };
        classes.push(ClassReport { base: c.base.clone(), witness, l: c.l.l });
    }
    let mut report = SemifreeReport { semifree: verdict.semifree, classes, certificate: None, crosscheck: None };
    if let Some(c) = verdict.dependent_class() {
        if certify || crosscheck.is_some() {
            let cert = certificate(t, c, c.witness.as_ref().expect("dependent class"))?;
            if let Some(cfg) = crosscheck {
                report.crosscheck = Some(numeric_crosscheck(t, c, &cert, cfg)?);
            }
            report.certificate = Some(cert.lambda);
        }
    }
    Ok(report)
}

/// `sum_{mu in M1/M2} e(t(mu nu))`, exact.
pub fn gauss_sum(m1: &ZModule, m2: &ZModule, nu: &QuadNum) -> Result<CycloCoeff> {
    let dual2 = crate::lattice::dual(m2).dual_module();
    if !dual2.contains(nu) {
        return Err(HmxError::Domain(format!("{nu} is not in the dual of M2")));
    }
    let roots: Vec<(Q, i64)> = coset_reps(m1, m2)?.iter().map(|mu| ((mu * nu).trace(), 1)).collect();
    Ok(sum_roots(&roots))
}

/// `[M1 : M2]` if `nu` is in `M1*`, else zero: the expected Gauss sum.
pub fn gauss_sum_expected(m1: &ZModule, m2: &ZModule, nu: &QuadNum) -> Q {
    let dual1 = crate::lattice::dual(m1).dual_module();
    if dual1.contains(nu) {
        index(m1, m2)
    } else {
        Q::zero()
    }
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// A primitive `l`-th root of unity modulo the prime `p`, with `l | p - 1`.
fn root_mod(l: u64, p: u64) -> Option<u64> {
    let fac: Vec<u64> = (2..=l).filter(|&q| l % q == 0 && is_prime(q)).collect();
    (2..p).map(|g| pow_mod(g, (p - 1) / l, p)).find(|&z| pow_mod(z, l, p) == 1 && fac.iter().all(|&q| pow_mod(z, l / q, p) != 1))
}

fn det_mod(mut a: Vec<Vec<u64>>, p: u64) -> u64 {
    let n = a.len();
    let mut det = 1u64;
    for c in 0..n {
        let Some(r) = (c..n).find(|&r| a[r][c] != 0) else { return 0 };
        if r != c {
            a.swap(r, c);
            det = (p - det) % p;
        }
        det = det * a[c][c] % p;
        let inv = pow_mod(a[c][c], p - 2, p);
        for r in c + 1..n {
            if a[r][c] == 0 {
                continue;
            }
            let f = a[r][c] * inv % p;
            for k in c..n {
                a[r][k] = (a[r][k] + p - f * a[c][k] % p) % p;
            }
        }
    }
    det
}

/// Non-singularity of `(e(t(mu nu)))` over `nu` in `L^-1 M / M`, `mu` in `M* / L M*`.
///
/// The entries are `L`-th roots of unity; reduction modulo a prime `p = 1 mod L`
/// is a ring map from `Z[e(1/L)]`, so a non-zero determinant mod `p` proves the
/// exact determinant non-zero.
pub fn vandermonde_nonsingular(dual: &DualData, l: u64) -> Result<bool> {
    if l == 0 || l * l > 4096 {
        return Err(HmxError::Size(format!("L = {l} is outside the supported range")));
    }
    let m = &dual.module;
    let ms = dual.dual_module();
    let lq = Q::from_integer(BigInt::from(l));
    let rows = coset_reps(&m.scale(&m.b0().lift_rat(Q::one() / &lq))?, m)?;
    let cols = coset_reps(&ms, &ms.scale(&ms.b0().lift_rat(lq.clone()))?)?;
    let exps: Vec<Vec<u64>> = rows
        .iter()
        .map(|nu| {
            cols.iter()
                .map(|mu| {
                    let e = (mu * nu).trace() * &lq;
                    assert!(e.is_integer(), "pairing is in L^-1 Z");
                    e.to_integer().mod_floor(&BigInt::from(l)).to_u64().unwrap()
                })
                .collect()
        })
        .collect();
    let mut tried = 0;
    let mut p = l + 1;
    while tried < 4 {
        if is_prime(p) && p > 1000 {
            tried += 1;
            let z = root_mod(l, p).expect("l divides p - 1");
            let a = exps.iter().map(|r| r.iter().map(|&e| pow_mod(z, e, p)).collect()).collect();
            if det_mod(a, p) != 0 {
                return Ok(true);
            }
        }
        p += l;
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::{q_frac, q_int};
    use crate::rfun::{r_fn, rf_eval};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn qn(a: i64, b: i64) -> QuadNum {
        QuadNum::from_ints(a, b, 2).unwrap()
    }

    fn frame() -> PerronFrame {
        PerronFrame::new(&qn(-1, 1)).unwrap()
    }

    fn pt(alpha: QuadNum, beta: QuadNum) -> CosetPoint {
        CosetPoint { alpha, beta, base: "v".into() }
    }

    fn tuple(pts: Vec<CosetPoint>) -> SemiFreeTuple {
        SemiFreeTuple::new(frame(), pts).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn half_sqrt2() -> QuadNum {
        QuadNum::new(Q::zero(), q_frac(1, 2), 2).unwrap()
    }

    fn pair_eta() -> Vec<CosetPoint> {
        vec![pt(qn(0, 0), qn(3, 2)), pt(qn(0, 0), qn(1, 0))]
    }

    fn kernel_triple() -> Vec<CosetPoint> {
        vec![pt(qn(0, 0), qn(2, 1)), pt(qn(0, 0), qn(1, 0)), pt(half_sqrt2(), qn(1, 0))]
    }

    /// `(alpha, 1)` over `(1/2) M / M`, followed by `(0, 2)`.
    fn masser() -> Vec<CosetPoint> {
        let m = frame().module().clone();
        let h = q_frac(1, 2);
        let mut v: Vec<CosetPoint> = [(0, 0), (1, 0), (0, 1), (1, 1)]
            .iter()
            .map(|&(a, b)| pt(m.combine(&(&h * q_int(a)), &(&h * q_int(b))), qn(1, 0)))
            .collect();
        v.push(pt(qn(0, 0), qn(2, 0)));
        v
    }

    fn witness_of(pts: Vec<CosetPoint>) -> Option<Vec<BigInt>> {
        decide(&tuple(pts)).unwrap().classes[0].witness.clone()
    }

    #[test]
    fn choose_l_examples() {
        let f = frame();
        let l = |pts: Vec<CosetPoint>, o| choose_l(&f, &pts, o).unwrap();
        let k = l(kernel_triple(), LOptions::default());
        assert_eq!((k.l, k.n_prime, k.g.clone(), k.ell.clone()), (16, 4, vec![2, 1, 1], vec![1, 1, 2]));
        assert_eq!(l(vec![pt(qn(0, 0), qn(1, 0))], LOptions::default()).l, 2);
        assert_eq!(l(vec![pt(qn(0, 0), qn(3, 2))], LOptions::default()).l, 2);
        assert_eq!(l(masser(), LOptions::default()).l, 192);
        assert_eq!(l(masser(), LOptions { lcm: true, n_prime: None }).l, 24);
        assert!(choose_l(&f, &masser(), LOptions { lcm: false, n_prime: Some(5) }).is_err());
    }

    #[test]
    fn char_vector_examples() {
        let f = frame();
        let ones = |v: &[bool]| v.iter().enumerate().filter(|(_, &x)| x).map(|(i, _)| i).collect::<Vec<_>>();
        for l in [2, 5, 16] {
            assert_eq!(ones(&char_vector(&f, &qn(0, 0), &qn(1, 0), l).unwrap()), vec![0]);
        }
        // -sqrt2/2 has coordinates (1/2, 1/2) modulo M in the basis (theta^-1, 1).
        assert_eq!(ones(&char_vector(&f, &half_sqrt2(), &qn(1, 0), 16).unwrap()), vec![8 * 16 + 8]);
        // beta^-1 M / M has |n(2 + sqrt2)| = 2 elements.
        let k = ones(&char_vector(&f, &qn(0, 0), &qn(2, 1), 16).unwrap());
        assert_eq!(k.len(), 2);
        assert_eq!(k[0], 0);
        assert!(char_vector(&f, &qn(0, 0), &qn(1, 0), 1025).is_err());
    }

    #[test]
    fn decide_examples() {
        assert_eq!(witness_of(pair_eta()), Some(ints(&[1, -1])));
        assert_eq!(witness_of(kernel_triple()), Some(ints(&[2, -1, -1])));
        assert_eq!(witness_of(masser()), Some(ints(&[-1, -1, -1, -1, 4])));
        let four: Vec<CosetPoint> = masser().into_iter().take(4).collect();
        assert!(decide(&tuple(four.clone())).unwrap().semifree);
        for skip in 0..4 {
            let sub: Vec<CosetPoint> = four.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, p)| p.clone()).collect();
            assert!(decide(&tuple(sub)).unwrap().semifree);
        }
        let v = decide(&tuple(kernel_triple())).unwrap();
        assert_eq!(v.classes[0].rank, 2);
        assert!(!v.semifree);
    }

    #[test]
    fn input_errors() {
        let f = frame();
        let bad = |pts| matches!(SemiFreeTuple::new(f.clone(), pts), Err(HmxError::Input(_)));
        assert!(bad(vec![pt(qn(0, 0), qn(0, 0))]));
        assert!(bad(vec![pt(qn(0, 0), QuadNum::new(q_frac(1, 2), Q::zero(), 2).unwrap())]));
        assert!(bad(vec![pt(qn(0, 0), qn(1, 0)), pt(qn(0, 0), qn(-2, 0))]));
        let t = SemiFreeTuple::new(f, vec![pt(qn(0, 0), qn(-1, 0)), pt(qn(0, 0), qn(-3, -2))]).unwrap();
        assert!(t.is_flipped("v"));
        assert_eq!(t.points[1].beta, qn(3, 2));
    }

    #[test]
    fn classes_are_decided_separately() {
        let mut pts = kernel_triple();
        for p in pts.iter_mut() {
            p.base = "a".into();
        }
        let mut other = pair_eta();
        other[1].base = "b".into();
        pts.extend(other);
        let v = decide(&tuple(pts)).unwrap();
        let bases: Vec<&str> = v.classes.iter().map(|c| c.base.as_str()).collect();
        assert_eq!(bases, vec!["a", "v", "b"]);
        assert_eq!(v.classes[0].witness, Some(ints(&[2, -1, -1])));
        assert!(v.classes[1].witness.is_none() && v.classes[2].witness.is_none());
    }

    #[test]
    fn representative_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = frame().module().clone();
        for _ in 0..10 {
            for base in [pair_eta(), kernel_triple(), masser()] {
                let expect = witness_of(base.clone());
                let shifted: Vec<CosetPoint> = base
                    .into_iter()
                    .map(|p| {
                        let lam = m.combine(&q_int(rng.random_range(-5..=5)), &q_int(rng.random_range(-5..=5)));
                        pt(&p.alpha + &lam, p.beta)
                    })
                    .collect();
                let got = witness_of(shifted);
                let neg = expect.as_ref().map(|w| w.iter().map(|x| -x).collect::<Vec<_>>());
                assert!(got == expect || got == neg);
            }
        }
    }

    #[test]
    fn base_change_by_unit() {
        let eta = qn(3, 2);
        let moved: Vec<CosetPoint> = kernel_triple().into_iter().map(|p| pt(p.alpha, &p.beta * &eta)).collect();
        assert_eq!(witness_of(moved.clone()), Some(ints(&[2, -1, -1])));
        let torsion = frame().module().combine(&q_frac(1, 3), &q_frac(2, 3));
        let twisted: Vec<CosetPoint> = moved.into_iter().map(|p| pt(&p.alpha + &(&torsion * &p.beta), p.beta)).collect();
        assert_eq!(witness_of(twisted), Some(ints(&[2, -1, -1])));
    }

    #[test]
    fn n_prime_and_lcm_independence() {
        for pts in [pair_eta(), kernel_triple(), masser(), masser()[..4].to_vec()] {
            let t = tuple(pts.clone());
            let base = decide(&t).unwrap();
            for o in [LOptions { lcm: false, n_prime: Some(pts.len() as u64 + 3) }, LOptions { lcm: true, n_prime: None }] {
                let v = decide_with(&t, o).unwrap();
                assert_eq!(v.semifree, base.semifree);
                assert_eq!(v.classes[0].witness, base.classes[0].witness);
            }
        }
    }

    /// Coefficient of `sum c_i F_{N_i}(zeta_i# U)` at `nu`, enumerated directly.
    fn series_coefficient(pts: &[CosetPoint], c: &[BigInt], nu: &QuadNum) -> CycloCoeff {
        let ms = frame().dual.dual_module();
        let mut acc = CycloCoeff::zero();
        for (p, ci) in pts.iter().zip(c) {
            let x = nu.checked_div(&p.beta).unwrap();
            if ms.contains(&x) {
                let r = (&p.alpha * &x).trace();
                acc = acc.add(&CycloCoeff::root_of_unity(&r).scale(&Q::from_integer(ci.clone())));
            }
        }
        acc
    }

    #[test]
    fn truncated_series_oracle() {
        let [s0, s1] = frame().dual.dual_basis.clone();
        for pts in [pair_eta(), kernel_triple(), masser()] {
            let c = witness_of(pts.clone()).unwrap();
            let mut nonzero_terms = 0;
            for l in -12i64..=12 {
                for h in -12i64..=12 {
                    if l.abs() + h.abs() > 12 {
                        continue;
                    }
                    let nu = &s0.scale(&q_int(l)) + &s1.scale(&q_int(h));
                    assert!(series_coefficient(&pts, &c, &nu).is_zero(), "coefficient at ({l}, {h})");
                    if pts.iter().any(|p| frame().dual.dual_module().contains(&nu.checked_div(&p.beta).unwrap())) {
                        nonzero_terms += 1;
                    }
                }
            }
            assert!(nonzero_terms > 0);
        }
        // A non-witness leaves coefficients behind.
        let pts = kernel_triple();
        let zero = qn(0, 0);
        assert!(!series_coefficient(&pts, &ints(&[1, -1, -1]), &zero).is_zero());
    }

    /// Random configurations `zeta_i w^{r_i}` with `zeta_i` torsion on the subgroup
    /// `u^l v^h = 1`.
    fn corollary1_config(rng: &mut ChaCha8Rng) -> (Vec<CosetPoint>, bool) {
        let m = frame().module().clone();
        loop {
            let (l, h) = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2)][rng.random_range(0..6)];
            // t(nu alpha) = l c0 + h c1 vanishes along (h, -l).
            let dir = m.combine(&q_int(h), &q_int(-l));
            let n = rng.random_range(2..=4);
            let mut pts = Vec::new();
            for _ in 0..n {
                let den = [1i64, 2, 3, 4][rng.random_range(0..4)];
                let alpha = dir.scale(&q_frac(rng.random_range(0..den), den));
                let r = rng.random_range(1..=3);
                pts.push(pt(alpha, qn(r, 0)));
            }
            if rng.random_bool(0.3) {
                let i = rng.random_range(0..n as usize);
                pts.push(pts[i].clone());
            }
            let t = tuple(pts.clone());
            if choose_l(&t.frame, &t.points, LOptions::default()).unwrap().l > 512 {
                continue;
            }
            let distinct = (0..t.points.len()).all(|i| (0..i).all(|j| t.points[i] != t.points[j]));
            return (t.points, distinct);
        }
    }

    #[test]
    fn corollary1_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = [0; 2];
        for _ in 0..20 {
            let (pts, distinct) = corollary1_config(&mut rng);
            assert_eq!(decide(&tuple(pts.clone())).unwrap().semifree, distinct, "{pts:?}");
            seen[distinct as usize] += 1;
        }
        assert!(seen[0] > 0 && seen[1] > 0);
    }

    fn is_unit_ratio(f: &PerronFrame, a: &QuadNum, b: &QuadNum) -> bool {
        let r = a.checked_div(b).unwrap();
        f.in_order(&r) && r.norm().abs() == q_int(1)
    }

    #[test]
    fn corollary2_oracle() {
        let f = frame();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let units = [qn(1, 0), qn(3, 2), qn(1, 1), qn(-1, 1)];
        let mut seen = [0; 2];
        let mut done = 0;
        while done < 10 {
            let mut pts = Vec::new();
            for base in ["v1", "v2"] {
                for _ in 0..rng.random_range(1..=3) {
                    let beta = if !pts.is_empty() && rng.random_bool(0.25) {
                        let prev: &CosetPoint = &pts[rng.random_range(0..pts.len())];
                        let u = &units[rng.random_range(0..units.len())];
                        (&prev.beta * u).abs()
                    } else {
                        qn(rng.random_range(1..=3), rng.random_range(-1..=1)).abs()
                    };
                    pts.push(CosetPoint { alpha: qn(0, 0), beta, base: base.into() });
                }
            }
            let Ok(t) = SemiFreeTuple::new(f.clone(), pts) else { continue };
            let big = t.classes().iter().any(|(_, idx)| {
                let cls: Vec<CosetPoint> = idx.iter().map(|&i| t.points[i].clone()).collect();
                choose_l(&f, &cls, LOptions::default()).unwrap().l > 512
            });
            if big {
                continue;
            }
            let related = (0..t.points.len()).any(|i| {
                (0..i).any(|j| t.points[i].base == t.points[j].base && is_unit_ratio(&f, &t.points[i].beta, &t.points[j].beta))
            });
            assert_eq!(decide(&t).unwrap().semifree, !related, "{:?}", t.points);
            seen[related as usize] += 1;
            done += 1;
        }
        assert!(seen[0] > 0 && seen[1] > 0);
    }

    #[test]
    fn gauss_sums() {
        let f = frame();
        let m = f.module().clone();
        let [s0, s1] = f.dual.dual_basis.clone();
        let half = m.scale(&QuadNum::new(q_frac(1, 2), Q::zero(), 2).unwrap()).unwrap();
        let third = m.scale(&QuadNum::new(q_frac(1, 3), Q::zero(), 2).unwrap()).unwrap();
        let b = qn(2, 1);
        let bm = m.scale(&b.inv().unwrap()).unwrap();
        let two_m = m.scale(&qn(2, 0)).unwrap();
        let cases: Vec<(&ZModule, &ZModule, QuadNum, i64)> = vec![
            (&half, &m, s0.clone(), 0),
            (&half, &m, s0.scale(&q_int(2)), 4),
            (&bm, &m, s0.clone(), 0),
            (&bm, &m, &b * &s0, 2),
            (&third, &m, &s0.scale(&q_int(3)) + &s1.scale(&q_int(6)), 9),
            (&m, &two_m, s1.scale(&q_frac(1, 2)), 0),
        ];
        for (m1, m2, nu, want) in cases {
            let g = gauss_sum(m1, m2, &nu).unwrap();
            assert_eq!(g.as_rational(), Some(q_int(want)), "nu = {nu}");
            assert_eq!(gauss_sum_expected(m1, m2, &nu), q_int(want));
        }
        assert!(gauss_sum(&half, &m, &s0.scale(&q_frac(1, 3))).is_err());
    }

    #[test]
    fn vandermonde() {
        for l in [2, 3, 4, 6] {
            assert!(vandermonde_nonsingular(&frame().dual, l).unwrap());
        }
        let f5 = PerronFrame::new(&QuadNum::new(q_frac(-1, 2), q_frac(1, 2), 5).unwrap()).unwrap();
        assert!(vandermonde_nonsingular(&f5.dual, 5).unwrap());
    }

    fn point(u: f64, v: f64) -> NumPoint {
        NumPoint::real(u, v, 256)
    }

    fn certified(pts: Vec<CosetPoint>) -> (SemiFreeTuple, ClassVerdict, Certificate) {
        let t = tuple(pts).with_base("v", point(0.3, 0.5));
        let v = decide(&t).unwrap();
        let c = v.classes[0].clone();
        let cert = certificate(&t, &c, c.witness.as_ref().unwrap()).unwrap();
        (t, c, cert)
    }

    #[test]
    fn certificate_examples() {
        let f = frame();
        let m = f.module().clone();
        let r_eta = r_fn(&f, &qn(0, 0), &qn(3, 2), &m, Variant::Minus).unwrap();
        let (_, _, c) = certified(pair_eta());
        assert_eq!(c.lambda, r_eta.neg());
        assert_eq!(c.rebase, 0);

        let (_, _, c) = certified(kernel_triple());
        let r_b = r_fn(&f, &qn(0, 0), &qn(2, 1), &m, Variant::Minus).unwrap();
        let p = point(0.3, 0.5);
        let lhs = rf_eval(&c.lambda, &p, 128).unwrap();
        let rhs = rf_eval(&r_b, &p, 128).unwrap().scale(&crate::numeric::bf(-2.0, 128), 128);
        assert!(lhs.sub(&rhs, 128).log2_abs(128) < -110.0);

        let (_, _, c) = certified(masser());
        assert!(c.lambda.is_zero());
        assert_eq!(c.coefficients, ints(&[-1, -1, -1, -1, 4]));
    }

    #[test]
    fn crosschecks_pass() {
        let cfg = EvalConfig::new(96).unwrap();
        for pts in [pair_eta(), kernel_triple(), masser()] {
            let (t, c, cert) = certified(pts);
            let r = numeric_crosscheck(&t, &c, &cert, &cfg).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn flipped_and_rebased_classes() {
        let cfg = EvalConfig::new(96).unwrap();
        // (v^-eta, v^-1) with v = (1/0.3, 1/0.5).
        let pts: Vec<CosetPoint> = pair_eta().into_iter().map(|p| pt(p.alpha, -p.beta)).collect();
        let t = tuple(pts).with_base("v", point(1.0 / 0.3, 2.0));
        let c = decide(&t).unwrap().classes[0].clone();
        let cert = certificate(&t, &c, c.witness.as_ref().unwrap()).unwrap();
        assert!(numeric_crosscheck(&t, &c, &cert, &cfg).unwrap().pass);

        // sqrt2 and sqrt2 * eta lie outside the analytic range until rebased once.
        let pts = vec![pt(qn(0, 0), qn(0, 1)), pt(qn(0, 0), &qn(0, 1) * &qn(3, 2))];
        let t = tuple(pts);
        let c = decide(&t).unwrap().classes[0].clone();
        let cert = certificate(&t, &c, c.witness.as_ref().unwrap()).unwrap();
        assert_eq!(cert.rebase, 1);
        // Both u_i must be in D: search a small grid for such a base.
        let mut checked = false;
        'grid: for a in 1..10 {
            for b in 1..10 {
                let base = point(a as f64 / 10.0, b as f64 / 10.0);
                let t2 = t.clone().with_base("v", base);
                if let Ok(r) = numeric_crosscheck(&t2, &c, &cert, &cfg) {
                    assert!(r.pass, "{r:?}");
                    checked = true;
                    break 'grid;
                }
            }
        }
        assert!(checked);
    }

    #[test]
    fn bad_witness_rejected() {
        let t = tuple(kernel_triple());
        let c = decide(&t).unwrap().classes[0].clone();
        assert!(matches!(certificate(&t, &c, &ints(&[1, -1, -1])), Err(HmxError::Certificate(_))));
        assert!(matches!(certificate(&t, &c, &ints(&[0, 0, 0])), Err(HmxError::Certificate(_))));
    }

    #[test]
    fn json_round_trip() {
        let src = r#"{"theta":"(-1+sqrt(2))","points":[
            {"alpha":"0","beta":"(2+sqrt(2))","base":"v1"},
            {"alpha":"0","beta":"1","base":"v1"},
            {"alpha":"(sqrt(2))/2","beta":"1","base":"v1"}],
            "bases":{"v1":{"u":["0.3","0"],"v":0.5}}}"#;
        let t = SemiFreeTuple::from_json(src).unwrap();
        let cfg = EvalConfig::new(96).unwrap();
        let r = run(&t, LOptions::default(), true, Some(&cfg)).unwrap();
        let j = serde_json::to_value(&r).unwrap();
        assert_eq!(j["semifree"], false);
        assert_eq!(j["classes"][0]["witness"], serde_json::json!([2, -1, -1]));
        assert_eq!(j["classes"][0]["L"], 16);
        assert_eq!(j["crosscheck"]["pass"], true);
        let back: RationalFn2 = serde_json::from_value(j["certificate"].clone()).unwrap();
        assert_eq!(Some(back), r.certificate);
        assert!(SemiFreeTuple::from_json(r#"{"points":[]}"#).is_err());
    }
}
