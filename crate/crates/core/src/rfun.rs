//! Bivariate rational functions with cyclotomic coefficients: lattice cone
//! sums, the `R`/`Theta` families, torsion twists and monomial substitutions.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cyclo::{euler_phi, CycloCoeff};
use crate::error::{domain, HmxError, Result};
use crate::lattice::{disc_sqrt, dual, DualData, ZModule};
use crate::mat::{self, IMat2};
use crate::numeric::Cx;
use crate::qfield::{rat_from_str, rat_to_string, QuadNum, Q};
use crate::torus::{kernel, rotation, NumPoint, PerronFrame, TorusPoint};

/// A slope `h / l` of a boundary ray, possibly vertical.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Slope {
    Finite(Q),
    Infinite,
}

impl Slope {
    pub fn finite(&self) -> Option<&Q> {
        match self {
            Slope::Finite(q) => Some(q),
            Slope::Infinite => None,
        }
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slope::Finite(q) => write!(f, "{q}"),
            Slope::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Slope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Slope::Finite(q) => s.serialize_str(&rat_to_string(q)),
            Slope::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Slope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let s = String::deserialize(d)?;
        if s.trim() == "inf" {
            return Ok(Slope::Infinite);
        }
        rat_from_str(&s).map(Slope::Finite).map_err(D::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slopes {
    pub rho: Slope,
    pub rho_plus: Slope,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Minus,
    Plus,
}

/// Boundary data of a cone `{ l > 0 : lo * l <(=) h <(=) hi * l }`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    pub lo: Q,
    pub lo_strict: bool,
    pub hi: Slope,
    pub hi_strict: bool,
}

/// `sum c_ij u^i v^j / prod (1 - u^a v^b)^mult`.
///
/// Denominator directions are kept with `a > 0`, or `a = 0` and `b > 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RationalFn2 {
    num: BTreeMap<(i64, i64), CycloCoeff>,
    den: BTreeMap<(i64, i64), u32>,
}

#[derive(Serialize, Deserialize)]
struct RationalFn2Repr {
    num: Vec<(i64, i64, CycloCoeff)>,
    den: Vec<(i64, i64, u32)>,
}

impl Serialize for RationalFn2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RationalFn2Repr {
            num: self.num.iter().map(|(&(i, j), c)| (i, j, c.clone())).collect(),
            den: self.den.iter().map(|(&(a, b), &m)| (a, b, m)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalFn2 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let r = RationalFn2Repr::deserialize(d)?;
        let num = r.num.into_iter().map(|(i, j, c)| ((i, j), c)).collect();
        let den = r.den.into_iter().map(|(a, b, m)| ((a, b), m)).collect();
        RationalFn2::from_parts(num, den).map_err(D::Error::custom)
    }
}

type Poly = BTreeMap<(i64, i64), CycloCoeff>;

fn poly_add_term(p: &mut Poly, k: (i64, i64), c: &CycloCoeff) {
    if c.is_zero() {
        return;
    }
    let v = match p.get(&k) {
        Some(old) => old.add(c),
        None => c.clone(),
    };
    if v.is_zero() {
        p.remove(&k);
    } else {
        p.insert(k, v);
    }
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (&(i, j), x) in a {
        for (&(k, l), y) in b {
            poly_add_term(&mut out, (i + k, j + l), &x.mul(y));
        }
    }
    out
}

/// `1 - X^g`.
fn one_minus(g: (i64, i64)) -> Poly {
    let mut p = Poly::new();
    poly_add_term(&mut p, (0, 0), &CycloCoeff::one());
    poly_add_term(&mut p, g, &CycloCoeff::int(-1));
    p
}

fn is_oriented(g: (i64, i64)) -> bool {
    g.0 > 0 || (g.0 == 0 && g.1 > 0)
}

impl RationalFn2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: CycloCoeff) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(i: i64, j: i64, c: CycloCoeff) -> Self {
        let mut num = Poly::new();
        poly_add_term(&mut num, (i, j), &c);
        RationalFn2 { num, den: BTreeMap::new() }
    }

    /// Builds a function from raw parts, reorienting denominator factors.
    pub fn from_parts(num: Poly, den: BTreeMap<(i64, i64), u32>) -> Result<Self> {
        let mut out = RationalFn2 { num: Poly::new(), den: BTreeMap::new() };
        for (k, c) in &num {
            poly_add_term(&mut out.num, *k, c);
        }
        for (&g, &m) in &den {
            out.push_den(g, m)?;
        }
        Ok(out)
    }

    /// Divides by `(1 - X^g)^m`, flipping `g` into the canonical half-plane.
    fn push_den(&mut self, g: (i64, i64), m: u32) -> Result<()> {
        if m == 0 {
            return Ok(());
        }
        if g == (0, 0) {
            return Err(HmxError::Pole("denominator factor 1 - 1".into()));
        }
        if is_oriented(g) {
            *self.den.entry(g).or_insert(0) += m;
            return Ok(());
        }
        // 1/(1 - X^g) = -X^-g / (1 - X^-g)
        let ng = (-g.0, -g.1);
        let sign = if m % 2 == 0 { CycloCoeff::one() } else { CycloCoeff::int(-1) };
        let shift = RationalFn2::monomial(ng.0 * m as i64, ng.1 * m as i64, sign);
        self.num = poly_mul(&self.num, &shift.num);
        *self.den.entry(ng).or_insert(0) += m;
        Ok(())
    }

    pub fn numerator(&self) -> &BTreeMap<(i64, i64), CycloCoeff> {
        &self.num
    }

    pub fn denominator(&self) -> &BTreeMap<(i64, i64), u32> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    fn times_den_factors(&self, extra: &BTreeMap<(i64, i64), u32>) -> Poly {
        let mut p = self.num.clone();
        for (&g, &m) in extra {
            for _ in 0..m {
                p = poly_mul(&p, &one_minus(g));
            }
        }
        p
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut den = self.den.clone();
        for (&g, &m) in &o.den {
            let e = den.entry(g).or_insert(0);
            *e = (*e).max(m);
        }
        let missing = |mine: &BTreeMap<(i64, i64), u32>| {
            den.iter()
                .filter_map(|(&g, &m)| {
                    let have = mine.get(&g).copied().unwrap_or(0);
                    (m > have).then_some((g, m - have))
                })
                .collect::<BTreeMap<_, _>>()
        };
        let a = self.times_den_factors(&missing(&self.den));
        let b = o.times_den_factors(&missing(&o.den));
        let mut num = a;
        for (k, c) in &b {
            poly_add_term(&mut num, *k, c);
        }
        if num.is_empty() {
            return RationalFn2::zero();
        }
        RationalFn2 { num, den }
    }

    pub fn neg(&self) -> Self {
        self.scale(&CycloCoeff::int(-1))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &CycloCoeff) -> Self {
        if c.is_zero() {
            return RationalFn2::zero();
        }
        let num = self.num.iter().map(|(k, x)| (*k, x.mul(c))).collect();
        RationalFn2 { num, den: self.den.clone() }
    }

    pub fn scale_q(&self, q: &Q) -> Self {
        self.scale(&CycloCoeff::rational(q.clone()))
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return RationalFn2::zero();
        }
        let mut den = self.den.clone();
        for (&g, &m) in &o.den {
            *den.entry(g).or_insert(0) += m;
        }
        RationalFn2 { num: poly_mul(&self.num, &o.num), den }
    }

    /// Substitution `(u, v) -> (e(r0) u, e(r1) v)`.
    pub fn twist(&self, r: &(Q, Q)) -> Self {
        let phase = |i: i64, j: i64| {
            let t = &r.0 * Q::from_integer(i.into()) + &r.1 * Q::from_integer(j.into());
            CycloCoeff::root_of_unity(&t)
        };
        let mut num: Poly = self.num.iter().map(|(&(i, j), c)| ((i, j), c.mul(&phase(i, j)))).collect();
        let mut den = BTreeMap::new();
        for (&g, &m) in &self.den {
            let w = &r.0 * Q::from_integer(g.0.into()) + &r.1 * Q::from_integer(g.1.into());
            let w = &w - w.floor();
            let k = w.denom().to_i64().expect("small rotation order");
            if k == 1 {
                *den.entry(g).or_insert(0) += m;
                continue;
            }
            // 1/(1 - w Y) = sum_{s<k} w^s Y^s / (1 - Y^k)
            let mut geo = Poly::new();
            for s in 0..k {
                let ws = CycloCoeff::root_of_unity(&(&w * Q::from_integer(s.into())));
                poly_add_term(&mut geo, (g.0 * s, g.1 * s), &ws);
            }
            for _ in 0..m {
                num = poly_mul(&num, &geo);
            }
            *den.entry((g.0 * k, g.1 * k)).or_insert(0) += m;
        }
        RationalFn2 { num, den }
    }

        /// Twist by a torsion point.
    pub fn twist_point(&self, frame: &DualData, zeta: &TorusPoint) -> Result<Self> {
        match zeta {
            TorusPoint::Torsion { alpha } => Ok(self.twist(&rotation(frame, alpha))),
            _ => domain("twist needs a torsion point"),
        }
    }

    /// Substitution `u -> u^a v^b, v -> u^c v^d` for `A = [[a, b], [c, d]]`.
    pub fn compose_pow(&self, a: &IMat2) -> Result<Self> {
        let t = mat::transpose(a);
        let img = |g: (i64, i64)| mat::apply(&t, g);
        let mut num = Poly::new();
        for (&k, c) in &self.num {
            poly_add_term(&mut num, img(k), c);
        }
        let mut out = RationalFn2 { num, den: BTreeMap::new() };
        for (&g, &m) in &self.den {
            out.push_den(img(g), m)?;
        }
        Ok(out)
    }

    /// Numeric value at a point.
    pub fn eval(&self, p: &NumPoint, prec: usize) -> Result<Cx> {
        let wp = prec + 16;
        let mut den = Cx::one(wp);
        let one = Cx::one(wp);
        for (&(a, b), &m) in &self.den {
            let f = one.sub(&p.monomial(a, b, wp)?, wp);
            if f.log2_abs(wp) < -((prec / 2) as f64) {
                return Err(HmxError::Pole(format!("1 - u^{a} v^{b} vanishes at the point")));
            }
            den = den.mul(&f.powi(m as i64, wp)?, wp);
        }
        let mut acc = Cx::zero(wp);
        for (&(i, j), c) in &self.num {
            acc = acc.add(&c.to_cx(wp).mul(&p.monomial(i, j, wp)?, wp), wp);
        }
        acc.div(&den, wp)
    }

    /// Taylor coefficients with `l <= lmax` and `h <= hmax`.
    pub fn expand(&self, lmax: i64, hmax: i64) -> BTreeMap<(i64, i64), CycloCoeff> {
        let mut out = BTreeMap::new();
        if self.num.is_empty() {
            return out;
        }
        let order = self.num.values().fold(1u64, |acc, c| acc.lcm(&c.order()));
        let deg = euler_phi(order) as usize;
        let lmin = self.num.keys().map(|k| k.0).min().unwrap();
        if lmin > lmax {
            return out;
        }
        let num_hmin = self.num.keys().map(|k| k.1).min().unwrap();
        let num_hmax = self.num.keys().map(|k| k.1).max().unwrap();
        let mut factors: Vec<((i64, i64), u32)> = self.den.iter().map(|(g, m)| (*g, *m)).collect();
        factors.sort_by_key(|(g, _)| g.1);
        let mut hlo = num_hmin;
        for ((a, b), m) in &factors {
            if *b < 0 {
                hlo += *b * (*m as i64) * ((lmax - lmin) / a);
            }
        }
        let hhi = hmax.max(num_hmax);
        if hlo > hhi {
            return out;
        }
        let nl = (lmax - lmin + 1) as usize;
        let nh = (hhi - hlo + 1) as usize;
        let mut grid = vec![vec![Q::zero(); deg]; nl * nh];
        let idx = |l: i64, h: i64| ((l - lmin) as usize) * nh + (h - hlo) as usize;
        for (&(i, j), c) in &self.num {
            if i <= lmax {
                let lifted = c.lift(order);
                let cell = &mut grid[idx(i, j)];
                for (x, y) in cell.iter_mut().zip(lifted.coords()) {
                    *x += y;
                }
            }
        }
        for ((a, b), m) in factors {
            for _ in 0..m {
                for l in lmin..=lmax {
                    for h in hlo..=hhi {
                        let (pl, ph) = (l - a, h - b);
                        if pl < lmin || ph < hlo || ph > hhi {
                            continue;
                        }
                        let src = grid[idx(pl, ph)].clone();
                        let cell = &mut grid[idx(l, h)];
                        for (x, y) in cell.iter_mut().zip(&src) {
                            *x += y;
                        }
                    }
                }
            }
        }
        for l in lmin..=lmax {
            for h in hlo..=hmax.min(hhi) {
                let cell = &grid[idx(l, h)];
                if cell.iter().any(|x| !x.is_zero()) {
                    let c = CycloCoeff::from_coords(order, cell.clone()).expect("valid coordinates");
                    out.insert((l, h), c);
                }
            }
        }
        out
    }
}

impl fmt::Display for RationalFn2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self.num.iter().map(|((i, j), c)| format!("({c})*u^{i}*v^{j}")).collect();
        write!(f, "({})", terms.join(" + "))?;
        for ((a, b), m) in &self.den {
            write!(f, " / (1 - u^{a}*v^{b})^{m}")?;
        }
        Ok(())
    }
}

pub fn rf_equal(a: &RationalFn2, b: &RationalFn2) -> bool {
    a.sub(b).is_zero()
}

pub fn rf_eval(r: &RationalFn2, p: &NumPoint, prec: usize) -> Result<Cx> {
    r.eval(p, prec)
}

/// `uv / ((1 - u)(1 - v))`.
pub fn f_inf() -> RationalFn2 {
    let mut den = BTreeMap::new();
    den.insert((1, 0), 1);
    den.insert((0, 1), 1);
    let mut r = RationalFn2::monomial(1, 1, CycloCoeff::one());
    r.den = den;
    r
}

/// Least positive multiple of the direction `r` lying in the lattice spanned by
/// the columns of `sub`, with its coordinates in that basis.
fn primitive_in(sub: &IMat2, r: (i64, i64)) -> Result<((i64, i64), (i64, i64))> {
    let det = mat::det(sub);
    // sub * c = r  =>  c = adj(sub) r / det
    let c0 = Q::new((sub[1][1] * r.0 - sub[0][1] * r.1).into(), det.into());
    let c1 = Q::new((-sub[1][0] * r.0 + sub[0][0] * r.1).into(), det.into());
    let k = c0.denom().lcm(c1.denom());
    let kq = Q::from_integer(k.clone());
    let k = k.to_i64().ok_or_else(|| HmxError::Size("lattice direction too large".into()))?;
    let g = (r.0 * k, r.1 * k);
    let gc = ((c0 * &kq).to_integer().to_i64().unwrap(), (c1 * kq).to_integer().to_i64().unwrap());
    Ok((g, gc))
}

fn ray(s: &Slope) -> (i64, i64) {
    match s {
        Slope::Finite(q) => (q.denom().to_i64().unwrap(), q.numer().to_i64().unwrap()),
        Slope::Infinite => (0, 1),
    }
}

/// Sum of `u^l v^h` over lattice points of `sub` in the cone, as a closed form.
///
/// Each cone point is written uniquely as `p + m g1 + n g2` with `g1`, `g2`
/// the primitive lattice vectors on the two rays, `m, n >= 0`, and `p` in the
/// half-open parallelogram whose open sides match the strict boundaries.
pub fn cone_sum_general(cone: &Cone, sub: &IMat2) -> Result<RationalFn2> {
    if mat::det(sub) == 0 {
        return domain("cone_sum needs a non-singular sublattice");
    }
    match &cone.hi {
        Slope::Finite(hi) => {
            if hi.is_negative() {
                return domain("cone_sum needs rho2 >= 0");
            }
            if &cone.lo > hi {
                return domain(format!("cone_sum needs rho1 <= rho2, got {} > {}", cone.lo, hi));
            }
            if &cone.lo == hi {
                if cone.lo_strict || cone.hi_strict {
                    return Ok(RationalFn2::zero());
                }
                let (g, _) = primitive_in(sub, ray(&cone.hi))?;
                let mut r = RationalFn2::monomial(g.0, g.1, CycloCoeff::one());
                r.push_den(g, 1)?;
                return Ok(r);
            }
            if &cone.lo <= &-hi {
                return domain("cone_sum needs -rho2 < rho1");
            }
        }
        Slope::Infinite => {}
    }
    let (g1, c1) = primitive_in(sub, ray(&Slope::Finite(cone.lo.clone())))?;
    let (g2, c2) = primitive_in(sub, ray(&cone.hi))?;
    let hi_open = cone.hi_strict || cone.hi == Slope::Infinite;
    // Parallelogram in sublattice coordinates spanned by c1 (lower) and c2 (upper).
    let gm: IMat2 = [[c1.0, c2.0], [c1.1, c2.1]];
    let det = mat::det(&gm);
    let sgn = det.signum();
    let adet = det.abs();
    let xs = [0, c1.0, c2.0, c1.0 + c2.0];
    let ys = [0, c1.1, c2.1, c1.1 + c2.1];
    let in_range = |x: i64, open_low: bool| if open_low { x > 0 && x <= adet } else { x >= 0 && x < adet };
    let mut num = Poly::new();
    let mut origin = false;
    for x in *xs.iter().min().unwrap()..=*xs.iter().max().unwrap() {
        for y in *ys.iter().min().unwrap()..=*ys.iter().max().unwrap() {
            // Coefficients along (c1, c2) scaled by det.
            let a = sgn * (gm[1][1] * x - gm[0][1] * y);
            let b = sgn * (-gm[1][0] * x + gm[0][0] * y);
            // a multiplies g1 (lower ray): the upper ray is a = 0.
            if !in_range(a, hi_open) || !in_range(b, cone.lo_strict) {
                continue;
            }
            let p = mat::apply(sub, (x, y));
            if p == (0, 0) {
                origin = true;
            }
            poly_add_term(&mut num, p, &CycloCoeff::one());
        }
    }
    let mut r = RationalFn2 { num, den: BTreeMap::new() };
    r.push_den(g1, 1)?;
    r.push_den(g2, 1)?;
    if origin {
        r = r.sub(&RationalFn2::constant(CycloCoeff::one()));
    }
    Ok(r)
}

/// `sum u^l v^h` over `(l, h)` in the sublattice with `l > 0`, `rho1 l < h <= rho2 l`.
pub fn cone_sum(rho1: &Q, rho2: &Slope, sub: &IMat2) -> Result<RationalFn2> {
    cone_sum_general(&Cone { lo: rho1.clone(), lo_strict: true, hi: rho2.clone(), hi_strict: false }, sub)
}

fn ratio(num: Q, den: Q) -> Slope {
    if den.is_zero() {
        Slope::Infinite
    } else {
        Slope::Finite(num / den)
    }
}

/// `t(nu D^-1/2) / t(nu D^-1/2 / theta)`.
pub fn rho(frame: &PerronFrame, nu: &QuadNum) -> Result<Slope> {
    let s = nu.checked_div(&disc_sqrt(frame.module()))?;
    let ti = frame.theta.inv()?;
    Ok(ratio(s.trace(), (&ti * &s).trace()))
}

/// `t(nu) / t(nu / theta)`.
pub fn rho_plus(frame: &PerronFrame, nu: &QuadNum) -> Result<Slope> {
    let ti = frame.theta.inv()?;
    Ok(ratio(nu.trace(), (&ti * nu).trace()))
}

pub fn slopes(frame: &PerronFrame, beta: &QuadNum) -> Result<Slopes> {
    if !beta.is_positive() {
        return domain(format!("slopes need beta > 0, got {beta}"));
    }
    let s = Slopes { rho: rho(frame, beta)?, rho_plus: rho_plus(frame, beta)? };
    if !beta.is_rational() && beta_class(beta).is_ok() && !s.ordered(&frame.theta, beta.conj().is_positive()) {
        return domain(format!("slope ordering fails for {beta}"));
    }
    Ok(s)
}

impl Slopes {
    /// `rho+ > theta > rho > 0` in the positive class, `rho > theta > rho+ > 0` otherwise.
    pub fn ordered(&self, theta: &QuadNum, positive_class: bool) -> bool {
        let (Some(a), Some(b)) = (self.rho.finite(), self.rho_plus.finite()) else {
            return false;
        };
        let (hi, lo) = if positive_class { (b, a) } else { (a, b) };
        let hi = theta.lift_rat(hi.clone());
        let lo = theta.lift_rat(lo.clone());
        hi.cmp_real(theta).is_gt() && theta.cmp_real(&lo).is_gt() && lo.is_positive()
    }
}

/// Coordinates of a basis of `x * N*` in the basis `(B0*, B1*)` of `M*`, as columns.
fn dual_sublattice(frame: &PerronFrame, n: &ZModule, x: &QuadNum) -> Result<IMat2> {
    let mstar = frame.dual.dual_module();
    let nstar = dual(n).dual_module();
    let mut m = [[0i64; 2]; 2];
    for (j, b) in nstar.basis().iter().enumerate() {
        let (c0, c1) = mstar.coords(&(x * b))?;
        if !c0.is_integer() || !c1.is_integer() {
            return domain("module dual is not inside M*");
        }
        m[0][j] = c0.to_integer().to_i64().ok_or_else(|| HmxError::Size("coordinate overflow".into()))?;
        m[1][j] = c1.to_integer().to_i64().ok_or_else(|| HmxError::Size("coordinate overflow".into()))?;
    }
    Ok(m)
}

fn check_module(frame: &PerronFrame, n: &ZModule) -> Result<()> {
    if !frame.module().is_submodule_of(n) {
        return domain("N must contain M");
    }
    Ok(())
}

/// Sign class of `beta > 0` and the locally analytic range check.
fn beta_class(beta: &QuadNum) -> Result<bool> {
    if !beta.is_positive() {
        return domain(format!("beta must be positive, got {beta}"));
    }
    let bc = beta.conj();
    if bc.is_positive() {
        if beta.cmp_real(&bc) == std::cmp::Ordering::Less {
            return domain(format!("beta = {beta} needs beta >= beta'"));
        }
        Ok(true)
    } else {
        if beta.cmp_real(&(-&bc)) != std::cmp::Ordering::Greater {
            return domain(format!("beta = {beta} needs beta > -beta'"));
        }
        Ok(false)
    }
}

/// `R_{alpha,beta,N}` (`minus`) or `R+_{alpha,beta,N}` (`plus`).
pub fn r_fn(frame: &PerronFrame, alpha: &QuadNum, beta: &QuadNum, n: &ZModule, variant: Variant) -> Result<RationalFn2> {
    check_module(frame, n)?;
    let bn = n.scale(beta)?;
    if !bn.is_submodule_of(n) {
        return Err(HmxError::NotInOrder(format!("{beta} does not stabilise N")));
    }
    let positive_class = beta_class(beta)?;
    let sub = dual_sublattice(frame, n, beta)?;
    let s = slopes(frame, beta)?;
    let top = rho_plus(frame, &frame.theta.one_in())?;
    let fin = |x: &Slope| x.finite().cloned().ok_or_else(|| HmxError::Domain("unexpected vertical slope".into()));
    let cone = match (positive_class, variant) {
        (true, Variant::Minus) => Cone { lo: Q::zero(), lo_strict: true, hi: s.rho.clone(), hi_strict: false },
        (true, Variant::Plus) => Cone { lo: fin(&s.rho_plus)?, lo_strict: true, hi: top, hi_strict: false },
        (false, Variant::Minus) => Cone { lo: Q::zero(), lo_strict: true, hi: s.rho_plus.clone(), hi_strict: true },
        (false, Variant::Plus) => Cone { lo: fin(&s.rho)?, lo_strict: false, hi: top, hi_strict: false },
    };
    let base = cone_sum_general(&cone, &sub)?;
    if alpha.is_zero() {
        return Ok(base);
    }
    Ok(base.twist(&rotation(&frame.dual, &alpha.checked_div(beta)?)))
}

/// `Theta_N`, the sum over `nu` in `N*` with `nu > -nu' > 0` or `nu >= nu' > 0`.
pub fn theta_fn(frame: &PerronFrame, n: &ZModule) -> Result<RationalFn2> {
    check_module(frame, n)?;
    let sub = dual_sublattice(frame, n, &frame.theta.one_in())?;
    let top = rho_plus(frame, &frame.theta.one_in())?;
    cone_sum_general(&Cone { lo: Q::zero(), lo_strict: true, hi: top, hi_strict: false }, &sub)
}

/// Checks `sum_{zeta in Ker beta} R_{eta,M}(zeta u) = |n(beta)| R_{eta, beta^-1 M}(u)` exactly.
pub fn gauss_average_check(frame: &PerronFrame, beta: &QuadNum, eta: &QuadNum) -> Result<bool> {
    let m = frame.module();
    let base = r_fn(frame, &beta.zero_in(), eta, m, Variant::Minus)?;
    let mut lhs = RationalFn2::zero();
    for z in kernel(&frame.dual, beta)? {
        let TorusPoint::Torsion { alpha } = z else { unreachable!("kernel yields torsion points") };
        lhs = lhs.add(&base.twist(&rotation(&frame.dual, &alpha)));
    }
    let n = m.scale(&beta.inv()?)?;
    let rhs = r_fn(frame, &beta.zero_in(), eta, &n, Variant::Minus)?.scale_q(&beta.norm().abs());
    Ok(rf_equal(&lhs, &rhs))
}

/// Sum of a function's shells `R(u^{B^k})` for `k` in `0..count`.
pub fn telescope(r: &RationalFn2, b: &IMat2, count: u32) -> Result<RationalFn2> {
    let mut acc = RationalFn2::zero();
    let mut p = mat::IDENTITY;
    for _ in 0..count {
        acc = acc.add(&r.compose_pow(&p)?);
        p = mat::mul(&p, b);
    }
    Ok(acc)
}
