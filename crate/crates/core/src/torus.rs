//! Points of the torus `G_m^2`, the exponential map of a framed module and the
//! algebraic action of its order by integer matrices.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{domain, HmxError, Result};
use crate::lattice::{coset_reps, dual, stabiliser, DualData, ZModule};
use crate::mat::{self, IMat2};
use crate::numeric::{bf_quad, Cx, CxRepr};
use crate::qfield::{is_perron, positive_unit, QuadNum, Q};

/// The frame `M = Z + theta^-1 Z` with basis `(theta^-1, 1)` used throughout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerronFrame {
    pub theta: QuadNum,
    pub dual: DualData,
    pub order: ZModule,
    pub unit: QuadNum,
}

impl PerronFrame {
    pub fn new(theta: &QuadNum) -> Result<Self> {
        if !is_perron(theta) {
            return domain(format!("{theta} does not satisfy the Perron condition"));
        }
        let module = ZModule::perron(theta)?;
        let order = stabiliser(&module);
        let unit = positive_unit(theta)?;
        Ok(PerronFrame { theta: theta.clone(), dual: dual(&module), order, unit })
    }

    pub fn module(&self) -> &ZModule {
        &self.dual.module
    }

    pub fn d(&self) -> i64 {
        self.theta.d()
    }

    /// `t(1/theta)`.
    pub fn trace_inv_theta(&self) -> Q {
        self.module().b0().trace()
    }

    pub fn in_order(&self, nu: &QuadNum) -> bool {
        self.order.contains(nu)
    }

    pub fn unit_matrix(&self) -> IMat2 {
        action_matrix(&self.dual, &self.unit).expect("unit lies in the order").m
    }
}

/// A numeric torus point `(u, v)`.
#[derive(Clone, Debug)]
pub struct NumPoint {
    pub u: Cx,
    pub v: Cx,
}

impl NumPoint {
    pub fn new(u: Cx, v: Cx) -> Self {
        NumPoint { u, v }
    }

    pub fn from_f64(u: (f64, f64), v: (f64, f64), p: usize) -> Self {
        NumPoint { u: Cx::from_f64(u.0, u.1, p), v: Cx::from_f64(v.0, v.1, p) }
    }

    pub fn real(u: f64, v: f64, p: usize) -> Self {
        Self::from_f64((u, 0.0), (v, 0.0), p)
    }

    /// `u^i v^j`.
    pub fn monomial(&self, i: i64, j: i64, p: usize) -> Result<Cx> {
        Ok(self.u.powi(i, p)?.mul(&self.v.powi(j, p)?, p))
    }

    /// `(u^a v^b, u^c v^d)`.
    pub fn act(&self, m: &IMat2, p: usize) -> Result<NumPoint> {
        Ok(NumPoint { u: self.monomial(m[0][0], m[0][1], p)?, v: self.monomial(m[1][0], m[1][1], p)? })
    }

    /// Coordinatewise product with another point.
    pub fn mul(&self, o: &NumPoint, p: usize) -> NumPoint {
        NumPoint { u: self.u.mul(&o.u, p), v: self.v.mul(&o.v, p) }
    }

    pub fn conj(&self) -> NumPoint {
        NumPoint { u: self.u.conj(), v: self.v.conj() }
    }

    pub fn to_f64(&self) -> ((f64, f64), (f64, f64)) {
        (self.u.to_f64(), self.v.to_f64())
    }
}

/// A point of `G_m^2`.
#[derive(Clone, Debug)]
pub enum TorusPoint {
    /// `Phi(alpha, alpha')`, stored as `alpha` modulo `M`.
    Torsion { alpha: QuadNum },
    Numeric(NumPoint),
    /// `Phi(alpha, alpha') * base^beta` for a named base point.
    Coset { alpha: QuadNum, beta: QuadNum, base: String },
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum TorusPointRepr {
    Torsion { alpha: QuadNum },
    Numeric { u: CxRepr, v: CxRepr },
    Coset { alpha: QuadNum, beta: QuadNum, base: String },
}

/// Working precision for a decimal string: enough bits for every digit given.
pub fn prec_for_decimal(s: &str) -> usize {
    let digits = s.chars().filter(|c| c.is_ascii_digit()).count();
    ((digits as f64 * 3.33).ceil() as usize + 16).max(128)
}

impl Serialize for TorusPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let r = match self {
            TorusPoint::Torsion { alpha } => TorusPointRepr::Torsion { alpha: alpha.clone() },
            TorusPoint::Numeric(p) => {
                let bits = p.u.re.mantissa_max_bit_len().unwrap_or(64);
                let digits = crate::numeric::digits_for_bits(bits);
                TorusPointRepr::Numeric { u: CxRepr::from_cx(&p.u, digits), v: CxRepr::from_cx(&p.v, digits) }
            }
            TorusPoint::Coset { alpha, beta, base } => {
                TorusPointRepr::Coset { alpha: alpha.clone(), beta: beta.clone(), base: base.clone() }
            }
        };
        r.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TorusPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        Ok(match TorusPointRepr::deserialize(d)? {
            TorusPointRepr::Torsion { alpha } => TorusPoint::Torsion { alpha },
            TorusPointRepr::Numeric { u, v } => {
                let p = [&u.0, &u.1, &v.0, &v.1].iter().map(|s| prec_for_decimal(s)).max().unwrap_or(128);
                let u = u.to_cx(p).map_err(D::Error::custom)?;
                let v = v.to_cx(p).map_err(D::Error::custom)?;
                TorusPoint::Numeric(NumPoint { u, v })
            }
            TorusPointRepr::Coset { alpha, beta, base } => TorusPoint::Coset { alpha, beta, base },
        })
    }
}

/// `B(nu)`, the integer matrix realizing `u -> u^nu`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionMatrix {
    pub m: IMat2,
    pub nu: QuadNum,
}

fn q_to_i64(x: &Q) -> Option<i64> {
    if x.is_integer() {
        x.to_integer().to_i64()
    } else {
        None
    }
}

pub fn action_matrix(frame: &DualData, nu: &QuadNum) -> Result<ActionMatrix> {
    if nu.is_zero() {
        return Err(HmxError::NotInOrder("0".into()));
    }
    let a = frame.module.multiplication_matrix(nu)?;
    let mut m = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = q_to_i64(&a[i][j]).ok_or_else(|| HmxError::NotInOrder(nu.to_string()))?;
        }
    }
    Ok(ActionMatrix { m, nu: nu.clone() })
}

/// `(e(B0* z + B0*' z'), e(B1* z + B1*' z'))`.
pub fn phi_eval(frame: &DualData, z: &Cx, zc: &Cx, prec: usize) -> NumPoint {
    let p = prec.max(32) + 16;
    let coord = |s: &QuadNum| {
        let a = bf_quad(s, p);
        let b = bf_quad(&s.conj(), p);
        let t = z.scale(&a, p).add(&zc.scale(&b, p), p);
        Cx::e(&t, p)
    };
    NumPoint { u: coord(&frame.dual_basis[0]), v: coord(&frame.dual_basis[1]) }
}

/// Exact rotation numbers of a torsion point: `Phi(alpha) = (e(r0), e(r1))`.
pub fn rotation(frame: &DualData, alpha: &QuadNum) -> (Q, Q) {
    let (r0, r1) = frame.rotation(alpha);
    (&r0 - r0.floor(), &r1 - r1.floor())
}

pub fn torsion_numeric(frame: &DualData, alpha: &QuadNum, p: usize) -> NumPoint {
    let (r0, r1) = rotation(frame, alpha);
    NumPoint { u: Cx::root_of_unity(&r0, p), v: Cx::root_of_unity(&r1, p) }
}

/// Precision carried by a numeric point.
pub fn point_prec(p: &NumPoint) -> usize {
    p.u.re.mantissa_max_bit_len().unwrap_or(64)
}

pub fn act(frame: &DualData, a: &ActionMatrix, p: &TorusPoint) -> Result<TorusPoint> {
    match p {
        TorusPoint::Torsion { alpha } => Ok(TorusPoint::Torsion { alpha: frame.module.reduce(&(&a.nu * alpha))? }),
        TorusPoint::Numeric(x) => Ok(TorusPoint::Numeric(x.act(&a.m, point_prec(x))?)),
        TorusPoint::Coset { alpha, beta, base } => Ok(TorusPoint::Coset {
            alpha: frame.module.reduce(&(&a.nu * alpha))?,
            beta: &a.nu * beta,
            base: base.clone(),
        }),
    }
}

/// Whether `u -> u^nu` extends analytically at the origin: the cone test on
/// `Sigma(nu)` and the sign test on `B(nu)`, which must agree.
pub fn is_analytic(frame: &PerronFrame, nu: &QuadNum) -> Result<bool> {
    let a = action_matrix(&frame.dual, nu)?;
    let by_matrix = a.m.iter().flatten().all(|&x| x >= 0);
    let nc = nu.conj();
    let th = &frame.theta;
    let scaled = (&th.conj() * &nc).checked_div(th)?;
    let hi = if nc.cmp_real(&scaled) == Ordering::Less { scaled } else { nc };
    let by_cone = hi.is_positive() && nu.cmp_real(&hi) != Ordering::Less;
    if by_cone != by_matrix {
        return Err(HmxError::Domain(format!("analyticity tests disagree for {nu}")));
    }
    Ok(by_matrix)
}

/// Masser's goodness: non-singular, no root of unity among the eigenvalues and
/// a positive eigenvector for the dominant eigenvalue.
pub fn is_good(m: &IMat2) -> Result<bool> {
    if m.iter().flatten().any(|&x| x < 0) {
        return domain("goodness is defined for non-negative matrices");
    }
    let [[a, b], [c, d]] = *m;
    let t = a + d;
    let n = mat::det(m);
    if n == 0 {
        return Ok(false);
    }
    let char_at = |x: i64| x * x - t * x + n;
    if char_at(1) == 0 || char_at(-1) == 0 || (n == 1 && (-1..=1).contains(&t)) {
        return Ok(false);
    }
    if b == 0 && c == 0 {
        // Diagonal: a scalar matrix has the whole plane as eigenspace.
        return Ok(a == d);
    }
    if b == 0 {
        // Lower triangular: dominant eigenvalue max(a, d).
        return Ok(a > d && c > 0);
    }
    if c == 0 {
        return Ok(d > a && b > 0);
    }
    // b, c > 0: the vector (b, lambda - a) is positive since disc > (a - d)^2.
    Ok(true)
}

/// The `|n(beta)|` torsion points killed by `u -> u^beta`.
pub fn kernel(frame: &DualData, beta: &QuadNum) -> Result<Vec<TorusPoint>> {
    if beta.is_zero() {
        return domain("kernel of the zero map");
    }
    action_matrix(frame, beta)?;
    let big = frame.module.scale(&beta.inv()?)?;
    Ok(coset_reps(&big, &frame.module)?.into_iter().map(|alpha| TorusPoint::Torsion { alpha }).collect())
}

/// Least power `eta^k` of the canonical unit fixing every given torsion point.
pub fn fixing_unit(frame: &PerronFrame, zetas: &[QuadNum]) -> Result<(QuadNum, u64)> {
    let module = frame.module();
    let mut ell = BigInt::one();
    let mut coords = Vec::new();
    for a in zetas {
        let (c0, c1) = module.coords(a)?;
        ell = ell.lcm(c0.denom()).lcm(c1.denom());
        coords.push((c0, c1));
    }
    let l = ell.to_i64().ok_or_else(|| HmxError::Size("torsion order too large".into()))?;
    let lq = Q::from_integer(ell.clone());
    let start: Vec<(i64, i64)> = coords
        .iter()
        .map(|(c0, c1)| {
            let x = (c0 * &lq).to_integer().mod_floor(&ell).to_i64().unwrap();
            let y = (c1 * &lq).to_integer().mod_floor(&ell).to_i64().unwrap();
            (x, y)
        })
        .collect();
    let b = frame.unit_matrix();
    let bm = [[b[0][0].rem_euclid(l), b[0][1].rem_euclid(l)], [b[1][0].rem_euclid(l), b[1][1].rem_euclid(l)]];
    let step = |v: (i64, i64)| {
        let (x, y) = (v.0 as i128, v.1 as i128);
        let m = |r: [i64; 2]| ((r[0] as i128 * x + r[1] as i128 * y).rem_euclid(l as i128)) as i64;
        (m(bm[0]), m(bm[1]))
    };
    let mut cur = start.clone();
    let bound = (l as u64).saturating_pow(4).max(1);
    for k in 1..=bound {
        cur = cur.into_iter().map(step).collect();
        if cur == start {
            return Ok((frame.unit.pow(k as i64)?, k));
        }
    }
    Err(HmxError::Convergence("no fixing power found".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::index;
    use crate::qfield::q_frac;
    use num_traits::Signed;
    use proptest::prelude::*;

    fn qn(p: i64, q: i64, d: i64, r: i64) -> QuadNum {
        QuadNum::from_literal_parts(p, q, d, r).unwrap()
    }

    fn frame0() -> PerronFrame {
        PerronFrame::new(&qn(-1, 1, 2, 1)).unwrap()
    }

    fn close(a: &Cx, b: &Cx, p: usize, bits: f64) -> bool {
        a.sub(b, p).log2_abs(p) < -bits
    }

    #[test]
    fn action_matrix_examples() {
        let f = frame0();
        assert_eq!(action_matrix(&f.dual, &qn(3, 2, 2, 1)).unwrap().m, [[5, 2], [2, 1]]);
        assert_eq!(action_matrix(&f.dual, &qn(0, 1, 2, 1)).unwrap().m, [[1, 1], [1, -1]]);
        assert_eq!(action_matrix(&f.dual, &QuadNum::int(7, 2)).unwrap().m, [[7, 0], [0, 7]]);
        assert!(matches!(action_matrix(&f.dual, &qn(0, 1, 2, 2)), Err(HmxError::NotInOrder(_))));
        assert_eq!(f.unit, qn(3, 2, 2, 1));
    }

    #[test]
    fn phi_examples() {
        let f = frame0();
        let p = 96;
        let one = Cx::one(p);
        let x = phi_eval(&f.dual, &Cx::zero(p), &Cx::zero(p), p);
        assert!(close(&x.u, &one, p, 90.0) && close(&x.v, &one, p, 90.0));
        // The torsion lift of sqrt(2)/2 lands on (-1, -1).
        let a = qn(0, 1, 2, 2);
        assert_eq!(rotation(&f.dual, &a), (q_frac(1, 2), q_frac(1, 2)));
        let z = Cx::real(crate::numeric::bf_quad(&a, p + 64), p + 64);
        let zc = Cx::real(crate::numeric::bf_quad(&a.conj(), p + 64), p + 64);
        let t = phi_eval(&f.dual, &z, &zc, p);
        let m1 = one.neg();
        assert!(close(&t.u, &m1, p, 90.0) && close(&t.v, &m1, p, 90.0));
    }

    #[test]
    fn phi_periodicity() {
        let f = frame0();
        let p = 96;
        let z = Cx::from_f64(0.1, 0.7, p);
        let zc = Cx::from_f64(-0.3, -0.2, p);
        let base = phi_eval(&f.dual, &z, &zc, p);
        let mu = qn(5, 3, 2, 1);
        let shift = |x: &Cx, m: &QuadNum| x.add(&Cx::real(crate::numeric::bf_quad(m, p + 32), p), p + 32);
        let moved = phi_eval(&f.dual, &shift(&z, &mu), &shift(&zc, &mu.conj()), p);
        assert!(close(&base.u, &moved.u, p, 80.0) && close(&base.v, &moved.v, p, 80.0));
    }

    #[test]
    fn act_examples() {
        let f = frame0();
        let p = 64;
        let b = action_matrix(&f.dual, &f.unit).unwrap();
        let out = act(&f.dual, &b, &TorusPoint::Numeric(NumPoint::real(0.3, 0.5, p))).unwrap();
        let TorusPoint::Numeric(out) = out else { panic!() };
        let ((ur, _), (vr, _)) = out.to_f64();
        assert!((ur - 0.3f64.powi(5) * 0.25).abs() < 1e-15);
        assert!((vr - 0.09 * 0.5).abs() < 1e-15);
        let s2 = action_matrix(&f.dual, &qn(0, 1, 2, 1)).unwrap();
        let t = act(&f.dual, &s2, &TorusPoint::Torsion { alpha: qn(0, 1, 2, 2) }).unwrap();
        let TorusPoint::Torsion { alpha } = t else { panic!() };
        assert!(alpha.is_zero());
        let id = action_matrix(&f.dual, &QuadNum::int(1, 2)).unwrap();
        let TorusPoint::Torsion { alpha } = act(&f.dual, &id, &TorusPoint::Torsion { alpha: qn(1, 1, 2, 3) }).unwrap()
        else {
            panic!()
        };
        assert_eq!(alpha, f.module().reduce(&qn(1, 1, 2, 3)).unwrap());
    }

    #[test]
    fn analytic_and_good() {
        let f = frame0();
        assert!(is_analytic(&f, &qn(3, 2, 2, 1)).unwrap());
        assert!(!is_analytic(&f, &qn(0, 1, 2, 1)).unwrap());
        assert!(is_analytic(&f, &QuadNum::int(1, 2)).unwrap());
        assert!(is_good(&[[5, 2], [2, 1]]).unwrap());
        assert!(!is_good(&[[1, 0], [0, 1]]).unwrap());
        assert!(!is_good(&[[1, 1], [0, 1]]).unwrap());
        assert!(is_good(&[[2, 0], [0, 2]]).unwrap());
        assert!(!is_good(&[[3, 0], [1, 5]]).unwrap());
        assert!(is_good(&[[5, 0], [1, 3]]).unwrap());
        assert!(!is_good(&[[0, 1], [1, 0]]).unwrap());
        assert!(is_good(&[[1, 1], [1, -1]]).is_err());
    }

    fn alphas(points: &[TorusPoint]) -> Vec<QuadNum> {
        points
            .iter()
            .map(|p| match p {
                TorusPoint::Torsion { alpha } => alpha.clone(),
                _ => panic!("kernel returns torsion points"),
            })
            .collect()
    }

    #[test]
    fn kernel_examples() {
        let f = frame0();
        let k = alphas(&kernel(&f.dual, &qn(0, 1, 2, 1)).unwrap());
        assert_eq!(k.len(), 2);
        let rots: Vec<_> = k.iter().map(|a| rotation(&f.dual, a)).collect();
        assert!(rots.contains(&(q_frac(0, 1), q_frac(0, 1))));
        assert!(rots.contains(&(q_frac(1, 2), q_frac(1, 2))));
        let k2 = alphas(&kernel(&f.dual, &qn(2, 1, 2, 1)).unwrap());
        assert_eq!(k2.len(), 2);
        assert!(k2.iter().any(|a| f.module().reduce(a).unwrap() == f.module().reduce(&qn(0, 1, 2, 2)).unwrap()));
        assert_eq!(kernel(&f.dual, &QuadNum::int(1, 2)).unwrap().len(), 1);
        assert!(kernel(&f.dual, &QuadNum::int(0, 2)).is_err());
    }

    #[test]
    fn fixing_unit_examples() {
        let f = frame0();
        let eta = qn(3, 2, 2, 1);
        assert_eq!(fixing_unit(&f, &[qn(0, 1, 2, 2)]).unwrap(), (eta.clone(), 1));
        assert_eq!(fixing_unit(&f, &[QuadNum::int(0, 2)]).unwrap(), (eta.clone(), 1));
        let k = alphas(&kernel(&f.dual, &qn(2, 1, 2, 1)).unwrap());
        assert_eq!(fixing_unit(&f, &k).unwrap().0, eta);
        // Third-torsion needs a higher power of the unit.
        let a = f.module().b0().scale(&q_frac(1, 3));
        let (u, k) = fixing_unit(&f, &[a.clone()]).unwrap();
        assert!(f.module().contains(&(&(&u * &a) - &a)));
        for j in 1..k {
            let e = f.unit.pow(j as i64).unwrap();
            assert!(!f.module().contains(&(&(&e * &a) - &a)));
        }
    }

    #[test]
    fn golden_frames_differ() {
        // M = Z + eps Z with the two orderings (eps, 1) and (1, eps).
        let eps = qn(1, 1, 5, 2);
        let one = QuadNum::int(1, 5);
        let fb = dual(&ZModule::new(eps.clone(), one.clone()).unwrap());
        let fc = dual(&ZModule::new(one, eps.clone()).unwrap());
        assert!(stabiliser(&fb.module).same_module(&fb.module));
        let beta = &eps * &eps;
        let bb = action_matrix(&fb, &beta).unwrap().m;
        let bc = action_matrix(&fc, &beta).unwrap().m;
        assert_ne!(bb, bc);
        let t = [[0, 1], [1, 0]];
        assert_eq!(bc, mat::mul(&mat::mul(&t, &bb), &t));
        // The goth matrices are related by the swap.
        assert_eq!(fc.goth_b[0], fb.goth_b[1]);
        assert_eq!(fc.goth_b[1], fb.goth_b[0]);
    }

    #[test]
    fn point_json_round_trip() {
        let pts = vec![
            TorusPoint::Torsion { alpha: qn(0, 1, 2, 2) },
            TorusPoint::Coset { alpha: qn(0, 0, 2, 1), beta: qn(2, 1, 2, 1), base: "v1".into() },
            TorusPoint::Numeric(NumPoint::from_f64((0.3, 0.0), (0.5, -0.25), 128)),
        ];
        for p in pts {
            let s = serde_json::to_string(&p).unwrap();
            let back: TorusPoint = serde_json::from_str(&s).unwrap();
            assert_eq!(serde_json::to_string(&back).unwrap(), s);
        }
        let s = serde_json::to_string(&TorusPoint::Torsion { alpha: qn(0, 1, 2, 2) }).unwrap();
        assert!(s.starts_with("{\"torsion\":{\"alpha\":"));
    }

    fn arb_order_elt() -> impl Strategy<Value = QuadNum> {
        (-6i64..=6, -6i64..=6).prop_filter("non-zero", |(a, b)| *a != 0 || *b != 0).prop_map(|(a, b)| qn(a, b, 2, 1))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn action_is_ring_hom(x in arb_order_elt(), y in arb_order_elt()) {
            let f = frame0();
            let bx = action_matrix(&f.dual, &x).unwrap().m;
            let by = action_matrix(&f.dual, &y).unwrap().m;
            prop_assert_eq!(action_matrix(&f.dual, &(&x * &y)).unwrap().m, mat::mul(&bx, &by));
            let s = &x + &y;
            if !s.is_zero() {
                prop_assert_eq!(action_matrix(&f.dual, &s).unwrap().m, mat::add(&bx, &by));
            }
            prop_assert_eq!(Q::from_integer(mat::det(&bx).into()), x.norm());
        }

        #[test]
        fn kernel_is_a_group(x in arb_order_elt()) {
            let f = frame0();
            let k = alphas(&kernel(&f.dual, &x).unwrap());
            let n = x.norm().abs();
            prop_assert_eq!(Q::from_integer(BigInt::from(k.len())), n.clone());
            prop_assert_eq!(index(&f.module().scale(&x.inv().unwrap()).unwrap(), f.module()), n);
            for a in &k {
                prop_assert!(f.module().contains(&(&x * a)));
                for b in &k {
                    let s = f.module().reduce(&(a + b)).unwrap();
                    prop_assert!(k.contains(&s));
                }
            }
        }

        #[test]
        fn analytic_tests_agree(x in arb_order_elt()) {
            prop_assert!(is_analytic(&frame0(), &x).is_ok());
        }

        #[test]
        fn analytic_action_matches_algebraic(
            re in -0.5f64..0.5, im in 0.2f64..0.6, re2 in -0.5f64..0.5, im2 in -0.1f64..0.1, k in 0usize..3
        ) {
            let f = frame0();
            let p = 96;
            let mu = [qn(3, 2, 2, 1), qn(2, 1, 2, 1), QuadNum::int(2, 2)][k].clone();
            let z = Cx::from_f64(re, im, p);
            let zc = Cx::from_f64(re2, im2, p);
            let base = phi_eval(&f.dual, &z, &zc, p);
            let a = action_matrix(&f.dual, &mu).unwrap();
            let lhs = base.act(&a.m, p + 16).unwrap();
            let mz = z.scale(&crate::numeric::bf_quad(&mu, p + 32), p + 32);
            let mzc = zc.scale(&crate::numeric::bf_quad(&mu.conj(), p + 32), p + 32);
            let rhs = phi_eval(&f.dual, &mz, &mzc, p);
            let scale = lhs.u.log2_abs(p).max(lhs.v.log2_abs(p)).max(0.0);
            prop_assert!(close(&lhs.u, &rhs.u, p, (p - 8) as f64 - scale));
            prop_assert!(close(&lhs.v, &rhs.v, p, (p - 8) as f64 - scale));
        }
    }
}
