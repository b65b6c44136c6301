//! Exact arithmetic in cyclotomic fields `Q(zeta_n)` over the power basis.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{HmxError, Result};
use crate::numeric::Cx;
use crate::qfield::{rat_from_str, rat_to_string, Q};

/// Integer coefficients of the `n`-th cyclotomic polynomial, constant term first.
pub fn cyclotomic_poly(n: u64) -> Vec<BigInt> {
    assert!(n >= 1);
    // x^n - 1 divided by every Phi_d with d | n, d < n.
    let mut num: Vec<BigInt> = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    for d in 1..n {
        if n % d == 0 {
            num = poly_div_exact(&num, &cyclotomic_poly(d));
        }
    }
    num
}

fn poly_div_exact(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead = &b[db];
    let mut q = vec![BigInt::zero(); a.len() - db];
    for i in (0..q.len()).rev() {
        let c = &r[i + db] / lead;
        for j in 0..=db {
            r[i + j] -= &c * &b[j];
        }
        q[i] = c;
    }
    debug_assert!(r.iter().all(|x| x.is_zero()));
    q
}

pub fn euler_phi(n: u64) -> u64 {
    let mut m = n;
    let mut r = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            r -= r / p;
        }
        p += 1;
    }
    if m > 1 {
        r -= r / m;
    }
    r
}

/// Element of `Q(zeta_n)`, `zeta_n = e(1/n)`, in the basis `1, zeta, ..., zeta^(phi(n)-1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycloCoeff {
    order: u64,
    coords: Vec<Q>,
}

#[derive(Serialize, Deserialize)]
struct CycloRepr {
    order: u64,
    coords: Vec<String>,
}

impl Serialize for CycloCoeff {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CycloRepr { order: self.order, coords: self.coords.iter().map(rat_to_string).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycloCoeff {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let r = CycloRepr::deserialize(d)?;
        let coords = r.coords.iter().map(|s| rat_from_str(s)).collect::<Result<Vec<_>>>().map_err(D::Error::custom)?;
        CycloCoeff::from_coords(r.order, coords).map_err(D::Error::custom)
    }
}

/// Reduces a polynomial (constant term first) modulo `Phi_n`.
fn reduce_mod(poly: Vec<Q>, n: u64) -> Vec<Q> {
    let phi = cyclotomic_poly(n);
    let deg = phi.len() - 1;
    let mut p = poly;
    if p.len() < deg {
        p.resize(deg, Q::zero());
        return p;
    }
    for i in (deg..p.len()).rev() {
        let c = p[i].clone();
        if c.is_zero() {
            continue;
        }
        // Phi_n is monic.
        for j in 0..=deg {
            let t = &c * Q::from_integer(phi[j].clone());
            p[i - deg + j] -= t;
        }
    }
    p.truncate(deg);
    p
}

impl CycloCoeff {
    pub fn from_coords(order: u64, coords: Vec<Q>) -> Result<Self> {
        if order == 0 {
            return Err(HmxError::Input("cyclotomic order must be positive".into()));
        }
        let deg = euler_phi(order) as usize;
        if coords.len() > deg {
            return Err(HmxError::Input(format!("too many coordinates for order {order}")));
        }
        let mut c = coords;
        c.resize(deg, Q::zero());
        Ok(CycloCoeff { order, coords: c }.normalized())
    }

    pub fn rational(x: Q) -> Self {
        CycloCoeff { order: 1, coords: vec![x] }
    }

    pub fn int(n: i64) -> Self {
        Self::rational(Q::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    /// `e(r)` for a rational `r`.
    pub fn root_of_unity(r: &Q) -> Self {
        let n = r.denom().to_u64().expect("rotation order fits in u64");
        let k = r.numer().mod_floor(r.denom()).to_u64().unwrap();
        let mut poly = vec![Q::zero(); k as usize + 1];
        poly[k as usize] = Q::one();
        CycloCoeff { order: n, coords: reduce_mod(poly, n) }.normalized()
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coords(&self) -> &[Q] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn as_rational(&self) -> Option<Q> {
        if self.order == 1 {
            Some(self.coords[0].clone())
        } else {
            None
        }
    }

    /// The same element written in `Q(zeta_m)` for a multiple `m` of the order.
    pub fn lift(&self, m: u64) -> Self {
        assert!(m % self.order == 0, "lift target must be a multiple of the order");
        if m == self.order {
            return self.clone();
        }
        let step = (m / self.order) as usize;
        let mut poly = vec![Q::zero(); step * self.coords.len().max(1)];
        for (i, c) in self.coords.iter().enumerate() {
            poly[i * step] = c.clone();
        }
        CycloCoeff { order: m, coords: reduce_mod(poly, m) }
    }

    fn common(&self, o: &Self) -> (Self, Self) {
        let m = self.order.lcm(&o.order);
        (self.lift(m), o.lift(m))
    }

    pub fn add(&self, o: &Self) -> Self {
        let (a, b) = self.common(o);
        let coords = a.coords.iter().zip(&b.coords).map(|(x, y)| x + y).collect();
        CycloCoeff { order: a.order, coords }.normalized()
    }

    pub fn neg(&self) -> Self {
        CycloCoeff { order: self.order, coords: self.coords.iter().map(|x| -x).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &Q) -> Self {
        CycloCoeff { order: self.order, coords: self.coords.iter().map(|x| x * k).collect() }.normalized()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (a, b) = self.common(o);
        let mut poly = vec![Q::zero(); a.coords.len() + b.coords.len()];
        for (i, x) in a.coords.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coords.iter().enumerate() {
                poly[i + j] += x * y;
            }
        }
        CycloCoeff { order: a.order, coords: reduce_mod(poly, a.order) }.normalized()
    }

    /// Rewrites the element in the smallest cyclotomic field containing it.
    fn normalized(self) -> Self {
        if self.order == 1 {
            return self;
        }
        if self.coords[1..].iter().all(|c| c.is_zero()) {
            return CycloCoeff { order: 1, coords: vec![self.coords[0].clone()] };
        }
        let n = self.order;
        for d in 2..n {
            if n % d != 0 {
                continue;
            }
            if let Some(c) = self.descend(d) {
                return c;
            }
        }
        self
    }

    /// Writes the element in `Q(zeta_d)` for `d | n` if it lies there.
    fn descend(&self, d: u64) -> Option<Self> {
        let deg = euler_phi(d) as usize;
        // Columns: lifts of the basis of Q(zeta_d).
        let cols: Vec<Vec<Q>> = (0..deg)
            .map(|j| {
                let mut e = vec![Q::zero(); deg];
                e[j] = Q::one();
                CycloCoeff { order: d, coords: e }.lift(self.order).coords
            })
            .collect();
        let x = solve_rational(&cols, &self.coords)?;
        Some(CycloCoeff { order: d, coords: x })
    }

    pub fn to_cx(&self, p: usize) -> Cx {
        let mut acc = Cx::zero(p);
        for (k, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let z = Cx::root_of_unity(&Q::new(BigInt::from(k as u64), BigInt::from(self.order)), p);
            acc = acc.add(&z.scale(&crate::numeric::bf_rational(c, p), p), p);
        }
        acc
    }

    /// Complex conjugate: `zeta -> zeta^-1`.
    pub fn conj(&self) -> Self {
        let n = self.order as usize;
        let mut poly = vec![Q::zero(); n];
        for (k, c) in self.coords.iter().enumerate() {
            poly[(n - k) % n] += c;
        }
        CycloCoeff { order: self.order, coords: reduce_mod(poly, self.order) }.normalized()
    }
}

/// Solves `sum_j x_j cols[j] = rhs` exactly, if the system is consistent.
fn solve_rational(cols: &[Vec<Q>], rhs: &[Q]) -> Option<Vec<Q>> {
    let rows = rhs.len();
    let ncol = cols.len();
    let mut a: Vec<Vec<Q>> = (0..rows)
        .map(|i| {
            let mut r: Vec<Q> = cols.iter().map(|c| c[i].clone()).collect();
            r.push(rhs[i].clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncol {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for k in c..=ncol {
            a[r][k] = &a[r][k] * &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in c..=ncol {
                    let t = &f * &a[r][k];
                    a[i][k] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if a[r..].iter().any(|row| !row[ncol].is_zero()) {
        return None;
    }
    let mut x = vec![Q::zero(); ncol];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = a[i][ncol].clone();
    }
    Some(x)
}

impl fmt::Display for CycloCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order == 1 {
            return write!(f, "{}", self.coords[0]);
        }
        let terms: Vec<String> = self
            .coords
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| if k == 0 { format!("{c}") } else { format!("{c}*z{}^{k}", self.order) })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// Signed sum of roots of unity with integer weights, used by exact Gauss sums.
pub fn sum_roots(rs: &[(Q, i64)]) -> CycloCoeff {
    rs.iter().fold(CycloCoeff::zero(), |acc, (r, w)| {
        acc.add(&CycloCoeff::root_of_unity(r).scale(&Q::from_integer(BigInt::from(*w))))
    })
}

pub fn is_negative_rational(c: &CycloCoeff) -> bool {
    c.as_rational().map(|q| q.is_negative()).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::q_frac;
    use proptest::prelude::*;

    #[test]
    fn cyclotomic_polys() {
        let as_i = |v: Vec<BigInt>| v.into_iter().map(|x| x.to_i64().unwrap()).collect::<Vec<_>>();
        assert_eq!(as_i(cyclotomic_poly(1)), vec![-1, 1]);
        assert_eq!(as_i(cyclotomic_poly(4)), vec![1, 0, 1]);
        assert_eq!(as_i(cyclotomic_poly(6)), vec![1, -1, 1]);
        assert_eq!(as_i(cyclotomic_poly(12)), vec![1, 0, -1, 0, 1]);
        for n in 1..40 {
            assert_eq!(cyclotomic_poly(n).len() as u64 - 1, euler_phi(n));
        }
    }

    #[test]
    fn roots_and_normal_forms() {
        let i = CycloCoeff::root_of_unity(&q_frac(1, 4));
        assert_eq!(i.mul(&i), CycloCoeff::int(-1));
        assert_eq!(CycloCoeff::root_of_unity(&q_frac(1, 2)), CycloCoeff::int(-1));
        // zeta_6 = -zeta_3^2 lives in Q(zeta_3).
        let z6 = CycloCoeff::root_of_unity(&q_frac(1, 6));
        assert_eq!(z6.order(), 3);
        // Sum of all 5th roots of unity vanishes.
        let s = sum_roots(&(0..5).map(|k| (q_frac(k, 5), 1)).collect::<Vec<_>>());
        assert!(s.is_zero());
        assert_eq!(s.order(), 1);
        // zeta_8 + zeta_8^-1 = sqrt 2 needs order 8.
        let r = CycloCoeff::root_of_unity(&q_frac(1, 8)).add(&CycloCoeff::root_of_unity(&q_frac(-1, 8)));
        assert_eq!(r.order(), 8);
        assert_eq!(r.mul(&r), CycloCoeff::int(2));
    }

    #[test]
    fn numeric_value() {
        let z = CycloCoeff::root_of_unity(&q_frac(1, 3)).scale(&q_frac(3, 2));
        let (re, im) = z.to_cx(64).to_f64();
        assert!((re + 0.75).abs() < 1e-15 && (im - 1.5 * (3f64).sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let z = CycloCoeff::root_of_unity(&q_frac(2, 5)).scale(&q_frac(-7, 3));
        let s = serde_json::to_string(&z).unwrap();
        let back: CycloCoeff = serde_json::from_str(&s).unwrap();
        assert_eq!(back, z);
        assert_eq!(serde_json::to_string(&CycloCoeff::int(3)).unwrap(), r#"{"order":1,"coords":["3/1"]}"#);
    }

    fn arb_elt() -> impl Strategy<Value = CycloCoeff> {
        (prop::sample::select(vec![1u64, 2, 3, 4, 5, 6, 8, 12]), prop::collection::vec(-4i64..=4, 1..5), 1i64..4)
            .prop_map(|(n, ks, den)| {
                ks.iter()
                    .enumerate()
                    .fold(CycloCoeff::zero(), |acc, (j, k)| {
                        acc.add(&CycloCoeff::root_of_unity(&q_frac(j as i64, n as i64)).scale(&q_frac(*k, den)))
                    })
            })
    }

    proptest! {
        #[test]
        fn field_axioms(a in arb_elt(), b in arb_elt(), c in arb_elt()) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.add(&b).sub(&b), a.clone());
            prop_assert_eq!(a.conj().conj(), a.clone());
            let p = 96;
            let lhs = a.mul(&b).to_cx(p);
            let rhs = a.to_cx(p).mul(&b.to_cx(p), p);
            prop_assert!(lhs.sub(&rhs, p).log2_abs(p) < -80.0);
        }

        #[test]
        fn lift_preserves_value(a in arb_elt(), k in 1u64..4) {
            let m = a.order() * k;
            let l = a.lift(m);
            let p = 96;
            prop_assert!(l.to_cx(p).sub(&a.to_cx(p), p).log2_abs(p) < -80.0);
            prop_assert_eq!(l.normalized(), a);
        }
    }
}
