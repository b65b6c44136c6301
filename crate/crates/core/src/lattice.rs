//! Complete Z-modules of a real quadratic field: duals, orders, indices, cosets.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, HmxError, Result};
use crate::qfield::{QuadNum, Q};

/// Rank-two Z-module `Z B0 + Z B1` with an ordered basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ModuleRepr", into = "ModuleRepr")]
pub struct ZModule {
    basis: [QuadNum; 2],
}

#[derive(Serialize, Deserialize)]
pub struct ModuleRepr {
    basis: [QuadNum; 2],
}

impl From<ZModule> for ModuleRepr {
    fn from(m: ZModule) -> Self {
        ModuleRepr { basis: m.basis }
    }
}

impl TryFrom<ModuleRepr> for ZModule {
    type Error = HmxError;
    fn try_from(r: ModuleRepr) -> Result<Self> {
        let [b0, b1] = r.basis;
        ZModule::new(b0, b1)
    }
}

fn cramer(m: [[&Q; 2]; 2], rhs: [&Q; 2]) -> Option<(Q, Q)> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.is_zero() {
        return None;
    }
    let x = (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / &det;
    let y = (m[0][0] * rhs[1] - rhs[0] * m[1][0]) / &det;
    Some((x, y))
}

fn frac(x: &Q) -> Q {
    x - x.floor()
}

impl ZModule {
    pub fn new(b0: QuadNum, b1: QuadNum) -> Result<Self> {
        b0.same_field(&b1)?;
        let det = b0.a() * b1.b() - b1.a() * b0.b();
        if det.is_zero() {
            return domain("basis elements are linearly dependent over Q");
        }
        Ok(ZModule { basis: [b0, b1] })
    }

    /// `Z + (1/theta) Z` with the ordered basis `(1/theta, 1)`.
    pub fn perron(theta: &QuadNum) -> Result<Self> {
        Self::new(theta.inv()?, theta.one_in())
    }

    pub fn basis(&self) -> &[QuadNum; 2] {
        &self.basis
    }

    pub fn b0(&self) -> &QuadNum {
        &self.basis[0]
    }

    pub fn b1(&self) -> &QuadNum {
        &self.basis[1]
    }

    pub fn d(&self) -> i64 {
        self.basis[0].d()
    }

    /// Determinant of the basis in the coordinates `(1, sqrt d)`.
    pub fn covolume(&self) -> Q {
        let [b0, b1] = &self.basis;
        b0.a() * b1.b() - b1.a() * b0.b()
    }

    /// Rational coordinates of `x` in the basis.
    pub fn coords(&self, x: &QuadNum) -> Result<(Q, Q)> {
        x.same_field(&self.basis[0])?;
        let [b0, b1] = &self.basis;
        Ok(cramer([[b0.a(), b1.a()], [b0.b(), b1.b()]], [x.a(), x.b()]).expect("independent basis"))
    }

    pub fn combine(&self, c0: &Q, c1: &Q) -> QuadNum {
        &self.basis[0].scale(c0) + &self.basis[1].scale(c1)
    }

    pub fn contains(&self, x: &QuadNum) -> bool {
        match self.coords(x) {
            Ok((c0, c1)) => c0.is_integer() && c1.is_integer(),
            Err(_) => false,
        }
    }

    pub fn is_submodule_of(&self, other: &ZModule) -> bool {
        self.basis.iter().all(|b| other.contains(b))
    }

    /// Equality as sets, ignoring the choice of basis.
    pub fn same_module(&self, other: &ZModule) -> bool {
        self.is_submodule_of(other) && other.is_submodule_of(self)
    }

    pub fn scale(&self, nu: &QuadNum) -> Result<ZModule> {
        if nu.is_zero() {
            return domain("cannot scale a module by 0");
        }
        ZModule::new(nu * &self.basis[0], nu * &self.basis[1])
    }

    /// Canonical representative of `x` modulo the module: coordinates in `[0, 1)`.
    pub fn reduce(&self, x: &QuadNum) -> Result<QuadNum> {
        let (c0, c1) = self.coords(x)?;
        Ok(self.combine(&frac(&c0), &frac(&c1)))
    }

    /// Least `l >= 1` with `l x` in the module, if `x` is torsion modulo it.
    pub fn torsion_order(&self, x: &QuadNum) -> Result<BigInt> {
        let (c0, c1) = self.coords(x)?;
        Ok(c0.denom().lcm(c1.denom()))
    }

    /// Coordinates `(c0, c1)` of `nu * B_j` as the columns of a rational matrix.
    pub fn multiplication_matrix(&self, nu: &QuadNum) -> Result<[[Q; 2]; 2]> {
        let (a00, a10) = self.coords(&(nu * &self.basis[0]))?;
        let (a01, a11) = self.coords(&(nu * &self.basis[1]))?;
        Ok([[a00, a01], [a10, a11]])
    }

    /// Hermite normal form of the module over `(1, sqrt d)`: returns `(den, h)`
    /// with the module equal to `(1/den) * span of columns of [[h00,0],[h10,h11]]`.
    pub fn hermite(&self) -> (BigInt, [[BigInt; 2]; 2]) {
        let [b0, b1] = &self.basis;
        let den = [b0.a(), b0.b(), b1.a(), b1.b()].iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let dq = Q::from_integer(den.clone());
        let ent = |x: &Q| (x * &dq).to_integer();
        // Rows index the (1, sqrt d) coordinates, columns the generators.
        let c = [[ent(b0.a()), ent(b1.a())], [ent(b0.b()), ent(b1.b())]];
        let h = column_hermite(&c);
        (den, h)
    }
}

/// Lower-triangular column Hermite form `[[a,0],[b,c]]` with `a,c > 0`, `0 <= b < c`.
pub fn column_hermite(c: &[[BigInt; 2]; 2]) -> [[BigInt; 2]; 2] {
    let e = c[0][0].extended_gcd(&c[0][1]);
    let det = &c[0][0] * &c[1][1] - &c[0][1] * &c[1][0];
    assert!(!det.is_zero(), "singular inclusion matrix");
    let mut g = e.gcd.clone();
    let mut h10 = &e.x * &c[1][0] + &e.y * &c[1][1];
    let mut h11 = &det / &g;
    if g.is_negative() {
        g = -g;
        h10 = -h10;
    }
    if h11.is_negative() {
        h11 = -h11;
    }
    let h10 = h10.mod_floor(&h11);
    [[g, BigInt::zero()], [h10, h11]]
}

/// Generalized index `[N : M] = covol(M) / covol(N)`.
pub fn index(n: &ZModule, m: &ZModule) -> Q {
    (m.covolume() / n.covolume()).abs()
}

/// Representatives of `N / M` for `M` contained in `N`, each reduced modulo `M`.
pub fn coset_reps(n: &ZModule, m: &ZModule) -> Result<Vec<QuadNum>> {
    if !m.is_submodule_of(n) {
        return domain("coset_reps needs M inside N");
    }
    let (c00, c10) = n.coords(m.b0())?;
    let (c01, c11) = n.coords(m.b1())?;
    let c = [
        [c00.to_integer(), c01.to_integer()],
        [c10.to_integer(), c11.to_integer()],
    ];
    let h = column_hermite(&c);
    let mut out = Vec::new();
    let mut i = BigInt::zero();
    while i < h[0][0] {
        let mut j = BigInt::zero();
        while j < h[1][1] {
            let x = n.combine(&Q::from_integer(i.clone()), &Q::from_integer(j.clone()));
            out.push(m.reduce(&x)?);
            j += 1;
        }
        i += 1;
    }
    Ok(out)
}

/// Order `S(M) = { beta : beta M in M }` with basis `(1, q0 (sqrt d - a00))`.
pub fn stabiliser(m: &ZModule) -> ZModule {
    let s = QuadNum::sqrt_d(m.d()).expect("valid field");
    let a = m.multiplication_matrix(&s).expect("same field");
    let rs = [a[0][1].clone(), a[1][0].clone(), &a[0][0] - &a[1][1]];
    let mut num_gcd = BigInt::zero();
    let mut den_lcm = BigInt::one();
    for r in rs.iter().filter(|r| !r.is_zero()) {
        num_gcd = num_gcd.gcd(r.numer());
        den_lcm = den_lcm.lcm(r.denom());
    }
    let q0 = Q::new(den_lcm, num_gcd);
    let gen = (&s - &s.lift_rat(a[0][0].clone())).scale(&q0);
    ZModule::new(s.one_in(), gen).expect("order basis")
}

/// Trace-dual basis data of a framed module.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualData {
    pub module: ZModule,
    pub dual_basis: [QuadNum; 2],
    /// `[[B0*, B0*'], [B1*, B1*']]`, the inverse of `[[B0, B1], [B0', B1']]`.
    pub goth_b: [[QuadNum; 2]; 2],
}

/// `B0 B1' - B1 B0'`, the oriented square root of the discriminant.
fn oriented_disc(m: &ZModule) -> QuadNum {
    let [b0, b1] = m.basis();
    &(b0 * &b1.conj()) - &(b1 * &b0.conj())
}

pub fn dual(m: &ZModule) -> DualData {
    let [b0, b1] = m.basis();
    let delta = oriented_disc(m);
    let s0 = b1.conj().checked_div(&delta).expect("non-degenerate basis");
    let s1 = (-b0.conj()).checked_div(&delta).expect("non-degenerate basis");
    DualData {
        module: m.clone(),
        goth_b: [[s0.clone(), s0.conj()], [s1.clone(), s1.conj()]],
        dual_basis: [s0, s1],
    }
}

impl DualData {
    pub fn dual_module(&self) -> ZModule {
        let [s0, s1] = &self.dual_basis;
        ZModule::new(s0.clone(), s1.clone()).expect("dual basis independent")
    }

    /// Rotation numbers `(t(B0* x), t(B1* x))`, which are the coordinates of `x`.
    pub fn rotation(&self, x: &QuadNum) -> (Q, Q) {
        let [s0, s1] = &self.dual_basis;
        ((s0 * x).trace(), (s1 * x).trace())
    }
}

/// Positive square root of the discriminant of `M`.
pub fn disc_sqrt(m: &ZModule) -> QuadNum {
    oriented_disc(m).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::{q_frac, q_int};
    use proptest::prelude::*;

    fn qn(p: i64, q: i64, d: i64, r: i64) -> QuadNum {
        QuadNum::from_literal_parts(p, q, d, r).unwrap()
    }

    fn zm(a: QuadNum, b: QuadNum) -> ZModule {
        ZModule::new(a, b).unwrap()
    }

    fn z_sqrt2() -> ZModule {
        zm(qn(1, 0, 2, 1), qn(0, 1, 2, 1))
    }

    #[test]
    fn dual_examples() {
        let d = dual(&z_sqrt2());
        assert_eq!(d.dual_basis, [qn(1, 0, 2, 2), qn(0, 1, 2, 4)]);
        for i in 0..2 {
            for j in 0..2 {
                let t = (&d.module.basis()[i] * &d.dual_basis[j]).trace();
                assert_eq!(t, q_int((i == j) as i64));
            }
        }
        let m0 = zm(qn(1, 1, 2, 1), qn(1, 0, 2, 1));
        let d0 = dual(&m0);
        let k = qn(0, 1, 2, 4); // 1/(2 sqrt 2)
        let expect = [
            [k.clone(), -k.clone()],
            [&k * &qn(-1, 1, 2, 1), &k * &qn(1, 1, 2, 1)],
        ];
        assert_eq!(d0.goth_b, expect);
    }

    #[test]
    fn stabiliser_examples() {
        let m = zm(qn(1, 0, 2, 1), qn(1, 1, 2, 1));
        assert!(stabiliser(&m).same_module(&z_sqrt2()));
        let g = zm(qn(1, 0, 5, 1), qn(1, 1, 5, 2));
        assert!(stabiliser(&g).same_module(&g));
        let scaled = m.scale(&QuadNum::rational(q_frac(1, 7), 2).unwrap()).unwrap();
        assert!(stabiliser(&scaled).same_module(&stabiliser(&m)));
        let odd = zm(qn(1, 0, 2, 1), qn(0, 3, 2, 1));
        assert!(stabiliser(&odd).same_module(&odd));
    }

    #[test]
    fn index_and_membership() {
        let z2 = z_sqrt2();
        let beta = qn(2, 1, 2, 1);
        let n = z2.scale(&beta.inv().unwrap()).unwrap();
        assert_eq!(index(&n, &z2), q_int(2));
        assert!(!z2.contains(&qn(1, 1, 2, 2)));
        assert_eq!(index(&z2, &z2), q_int(1));
        assert!(z2.scale(&qn(0, 0, 2, 1)).is_err());
    }

    #[test]
    fn coset_examples() {
        let z2 = z_sqrt2();
        let half = z2.scale(&QuadNum::rational(q_frac(1, 2), 2).unwrap()).unwrap();
        let mut reps = coset_reps(&half, &z2).unwrap();
        reps.sort_by_key(|x| x.to_string());
        let mut expect = vec![qn(0, 0, 2, 1), qn(1, 0, 2, 2), qn(0, 1, 2, 2), qn(1, 1, 2, 2)];
        expect.sort_by_key(|x| x.to_string());
        assert_eq!(reps, expect);

        let n = z2.scale(&qn(2, 1, 2, 1).inv().unwrap()).unwrap();
        let reps = coset_reps(&n, &z2).unwrap();
        assert_eq!(reps.len(), 2);
        assert!(reps.contains(&qn(0, 0, 2, 1)));
        assert!(reps.contains(&qn(0, 1, 2, 2)));
        assert_eq!(coset_reps(&z2, &z2).unwrap(), vec![qn(0, 0, 2, 1)]);
        assert!(coset_reps(&z2, &half).is_err());
    }

    #[test]
    fn disc_examples() {
        let m = zm(qn(1, 0, 2, 1), qn(1, 1, 2, 1));
        assert_eq!(disc_sqrt(&m), qn(0, 2, 2, 1));
        let g = zm(qn(1, 0, 5, 1), qn(1, 1, 5, 2));
        assert_eq!(disc_sqrt(&g), qn(0, 1, 5, 1));
        let ds = disc_sqrt(&m);
        assert_eq!(ds.conj(), -ds.clone());
        assert_eq!(ds.norm(), q_int(-8));
    }

    #[test]
    fn hermite_is_basis_independent() {
        let a = zm(qn(1, 0, 2, 1), qn(1, 1, 2, 1));
        let b = zm(qn(3, 2, 2, 1), qn(-1, -1, 2, 1));
        assert!(a.same_module(&b));
        assert_eq!(a.hermite(), b.hermite());
    }

    fn arb_module() -> impl Strategy<Value = ZModule> {
        (-6i64..7, -6i64..7, 1i64..4, -6i64..7, -6i64..7, 1i64..4)
            .prop_filter_map("independent", |(a, b, r, c, e, s)| {
                ZModule::new(qn(a, b, 2, r), qn(c, e, 2, s)).ok()
            })
    }

    fn arb_small_int_matrix() -> impl Strategy<Value = [[i64; 2]; 2]> {
        (-3i64..4, -3i64..4, -3i64..4, -3i64..4)
            .prop_filter("non-singular", |(a, b, c, d)| a * d - b * c != 0)
            .prop_map(|(a, b, c, d)| [[a, b], [c, d]])
    }

    proptest! {
        #[test]
        fn dual_is_involutive(m in arb_module()) {
            let d = dual(&m);
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert_eq!((&m.basis()[i] * &d.dual_basis[j]).trace(), q_int((i == j) as i64));
                }
            }
            prop_assert_eq!(dual(&d.dual_module()).dual_module(), m.clone());
        }

        #[test]
        fn inclusion_reverses_under_duality(m in arb_module(), t in arb_small_int_matrix()) {
            // N is spanned by M-combinations scaled down: M inside N.
            let [b0, b1] = m.basis();
            let sub = ZModule::new(
                &b0.scale(&q_int(t[0][0])) + &b1.scale(&q_int(t[1][0])),
                &b0.scale(&q_int(t[0][1])) + &b1.scale(&q_int(t[1][1])),
            ).unwrap();
            prop_assert!(sub.is_submodule_of(&m));
            let dm = dual(&m).dual_module();
            let dsub = dual(&sub).dual_module();
            prop_assert!(dm.is_submodule_of(&dsub));
            prop_assert_eq!(index(&dsub, &dm), index(&m, &sub));
            let reps = coset_reps(&m, &sub).unwrap();
            prop_assert_eq!(Q::from_integer(BigInt::from(reps.len())), index(&m, &sub));
            for i in 0..reps.len() {
                for j in 0..i {
                    prop_assert!(!sub.contains(&(&reps[i] - &reps[j])));
                }
            }
        }

        #[test]
        fn stabiliser_is_a_ring(m in arb_module()) {
            let s = stabiliser(&m);
            prop_assert!(s.contains(&s.b0().one_in()));
            let [x, y] = s.basis();
            prop_assert!(s.contains(&(x * y)));
            prop_assert!(s.contains(&(y * y)));
            for b in s.basis() {
                for mb in m.basis() {
                    prop_assert!(m.contains(&(b * mb)));
                }
            }
        }

        #[test]
        fn dual_of_inverse_scaling(m in arb_module(), i in 0usize..3) {
            let s = stabiliser(&m);
            let beta = [s.b1().clone(), &s.b1().clone() + &s.b0().lift_int(2), &s.b1().scale(&q_int(3)) - &s.b0().lift_int(1)][i].clone();
            prop_assume!(!beta.is_zero());
            let n = m.scale(&beta.inv().unwrap()).unwrap();
            let lhs = dual(&n).dual_module();
            let rhs = dual(&m).dual_module().scale(&beta).unwrap();
            prop_assert!(lhs.same_module(&rhs));
            prop_assert_eq!(index(&n, &m), beta.norm().abs());
        }
    }
}
