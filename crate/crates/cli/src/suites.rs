//! Identity suites behind `hmx verify`.

use hmx_core::lattice::ZModule;
use hmx_core::numeric::{bf, bf_quad, Cx};
use hmx_core::qfield::{q_frac, q_int, QuadNum, Q};
use hmx_core::rfun::{gauss_average_check, r_fn, RationalFn2, Variant};
use hmx_core::semifree::{self, CosetPoint, LOptions, SemiFreeTuple};
use hmx_core::series::{eval_f, eval_hecke, EvalConfig, HeckeKind};
use hmx_core::torus::{action_matrix, phi_eval, NumPoint, PerronFrame};
use hmx_core::Result;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::report::Check;

pub const SUITES: [&str; 6] = ["masser", "feq", "kernel", "hecke", "gauss", "vandermonde"];

pub struct Ctx<'a> {
    pub cfg: &'a EvalConfig,
    pub trials: usize,
    pub rng: &'a mut ChaCha8Rng,
}

impl Ctx<'_> {
    fn wp(&self) -> usize {
        self.cfg.prec + 32
    }

    fn tol(&self) -> f64 {
        -(self.cfg.prec.saturating_sub(8) as f64)
    }

    /// A point with `|u| <= 0.5` and `|v| <= 0.8`, inside every domain used here.
    fn small_point(&mut self) -> NumPoint {
        let mut c = |r: f64| {
            let rad = self.rng.random_range(0.1..r);
            let ang = self.rng.random_range(0.0..std::f64::consts::TAU);
            (rad * ang.cos(), rad * ang.sin())
        };
        let (u, v) = (c(0.5), c(0.8));
        NumPoint::from_f64(u, v, self.wp())
    }
}

fn sqrt2(a: i64, b: i64) -> QuadNum {
    QuadNum::from_ints(a, b, 2).expect("field Q(sqrt 2)")
}

fn theta0() -> PerronFrame {
    PerronFrame::new(&sqrt2(-1, 1)).expect("sqrt2 - 1 is a Perron number")
}

pub fn run(name: &str, ctx: &mut Ctx) -> Result<Vec<Check>> {
    match name {
        "masser" => masser(ctx),
        "feq" => feq(ctx),
        "kernel" => kernel(ctx),
        "hecke" => hecke(ctx),
        "gauss" => gauss(),
        "vandermonde" => vandermonde(),
        _ => unreachable!("suite names are validated by the caller"),
    }
}

fn masser(ctx: &mut Ctx) -> Result<Vec<Check>> {
    let ws = [
        sqrt2(-1, 1),
        QuadNum::new(q_frac(-1, 2), q_frac(1, 2), 5)?,
        QuadNum::from_ints(-1, 1, 3)?,
    ];
    let wp = ctx.wp();
    let mut out = Vec::new();
    for w in &ws {
        for _ in 0..ctx.trials {
            let p = ctx.small_point();
            let f = |u: &Cx, v: &Cx| eval_f(w, &NumPoint::new(u.clone(), v.clone()), ctx.cfg).map(|s| s.value);
            let (u, v) = (&p.u, &p.v);
            let lhs = f(&u.mul(u, wp), &v.mul(v, wp))?.scale(&bf(4.0, wp), wp);
            let rhs = f(u, v)?.add(&f(&u.neg(), v)?, wp).add(&f(u, &v.neg())?, wp).add(&f(&u.neg(), &v.neg())?, wp);
            let err = lhs.sub(&rhs, wp).log2_abs(wp);
            out.push(Check::new(format!("masser w={w}"), err < ctx.tol(), json!({"point": p.to_f64(), "log2_err": finite(err)})));
        }
    }
    Ok(out)
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn feq(ctx: &mut Ctx) -> Result<Vec<Check>> {
    let f = theta0();
    let eta = f.unit.clone();
    let b = action_matrix(&f.dual, &eta)?.m;
    let r = r_fn(&f, &eta.zero_in(), &eta, f.module(), Variant::Minus)?;
    let wp = ctx.wp();
    let mut out = Vec::new();
    for _ in 0..ctx.trials {
        let p = ctx.small_point();
        let lhs = eval_f(&f.theta, &p.act(&b, wp)?, ctx.cfg)?.value;
        let rhs = eval_f(&f.theta, &p, ctx.cfg)?.value.sub(&r.eval(&p, wp)?, wp);
        let err = lhs.sub(&rhs, wp).log2_abs(wp);
        out.push(Check::new("f(p^eta) = f(p) - R_eta(p)", err < ctx.tol(), json!({"point": p.to_f64(), "log2_err": finite(err)})));
    }
    Ok(out)
}

fn kernel(ctx: &mut Ctx) -> Result<Vec<Check>> {
    let f = theta0();
    let eta = f.unit.clone();
    let mut out = Vec::new();
    for beta in [sqrt2(2, 1), sqrt2(2, 0)] {
        let ok = gauss_average_check(&f, &beta, &eta)?;
        out.push(Check::new(format!("gauss average beta={beta}"), ok, json!(null)));
    }
    let zero = sqrt2(0, 0);
    let pts = vec![
        CosetPoint { alpha: zero.clone(), beta: sqrt2(2, 1), base: "v".into() },
        CosetPoint { alpha: zero.clone(), beta: sqrt2(1, 0), base: "v".into() },
        CosetPoint { alpha: QuadNum::new(Q::from_integer(0.into()), q_frac(1, 2), 2)?, beta: sqrt2(1, 0), base: "v".into() },
    ];
    let p = ctx.small_point();
    let t = SemiFreeTuple::new(f.clone(), pts)?.with_base("v", p.clone());
    let rep = semifree::run(&t, LOptions::default(), true, Some(ctx.cfg))?;
    let cc = rep.crosscheck.expect("crosscheck requested");
    let witness_ok = rep.classes[0].witness.as_deref() == Some(&[2, -1, -1][..]);
    out.push(Check::new("kernel triple witness", witness_ok, json!(rep.classes[0].witness)));
    out.push(Check::new("kernel triple certificate", cc.pass, json!(cc)));
    // Lambda = -2 R_{2+sqrt2}
    let r = r_fn(&f, &zero, &sqrt2(2, 1), f.module(), Variant::Minus)?;
    let lam = rep.certificate.unwrap_or_else(RationalFn2::zero);
    let exact = hmx_core::rfun::rf_equal(&lam, &r.scale_q(&q_int(-2)));
    out.push(Check::new("kernel triple lambda = -2 R_beta", exact, json!(null)));
    Ok(out)
}

fn hecke(ctx: &mut Ctx) -> Result<Vec<Check>> {
    let f = theta0();
    let wp = ctx.wp();
    let z = Cx::from_f64(ctx.rng.random_range(-0.5..0.5), ctx.rng.random_range(0.3..0.8), wp);
    let zc = Cx::from_f64(ctx.rng.random_range(-0.5..0.5), ctx.rng.random_range(-0.8..-0.3), wp);
    let eta = f.unit.clone();
    let r = r_fn(&f, &eta.zero_in(), &eta, f.module(), Variant::Minus)?;
    let shell = |k: i64| -> Result<Cx> {
        let e = eta.pow(k)?;
        let pt = phi_eval(&f.dual, &z.scale(&bf_quad(&e, wp), wp), &zc.scale(&bf_quad(&e.conj(), wp), wp), wp);
        r.eval(&pt, wp)
    };
    let mut partial = shell(0)?;
    let mut steps = Vec::new();
    let mut stable_from = None;
    for k in 1..=40i64 {
        let next = partial.add(&shell(k)?, wp).add(&shell(-k)?, wp);
        let d = next.sub(&partial, wp).log2_abs(wp);
        steps.push(finite(d));
        partial = next;
        if d < -40.0 && stable_from.is_none() {
            stable_from = Some(k);
        }
        if d < -(ctx.cfg.prec as f64) {
            break;
        }
    }
    let full = eval_hecke(&f, HeckeKind::A, f.module(), &z, &zc, ctx.cfg)?;
    let agree = full.value.sub(&partial, wp).log2_abs(wp);
    let ok = stable_from.is_some() && agree < -40.0;
    Ok(vec![Check::new(
        "A_M as shell sum",
        ok,
        json!({"z": z.to_f64(), "zc": zc.to_f64(), "log2_steps": steps, "log2_vs_eval": finite(agree), "rigorous": full.rigorous}),
    )])
}

fn gauss() -> Result<Vec<Check>> {
    let f = theta0();
    let m = f.module().clone();
    let [s0, s1] = f.dual.dual_basis.clone();
    let scaled = |k: Q| -> Result<ZModule> { m.scale(&s0.lift_rat(k)) };
    let beta = sqrt2(2, 1);
    let half = scaled(q_frac(1, 2))?;
    let third = scaled(q_frac(1, 3))?;
    let bm = m.scale(&beta.inv()?)?;
    let two_m = scaled(q_int(2))?;
    let cases = [
        (&half, &m, s0.clone()),
        (&half, &m, s0.scale(&q_int(2))),
        (&bm, &m, s0.clone()),
        (&bm, &m, &beta * &s0),
        (&third, &m, &s0.scale(&q_int(3)) + &s1.scale(&q_int(6))),
        (&m, &two_m, s1.scale(&q_frac(1, 2))),
    ];
    let mut out = Vec::new();
    for (m1, m2, nu) in cases {
        let got = semifree::gauss_sum(m1, m2, &nu)?;
        let want = semifree::gauss_sum_expected(m1, m2, &nu);
        let ok = got.as_rational().as_ref() == Some(&want);
        out.push(Check::new(format!("gauss sum nu={nu}"), ok, json!({"sum": got.to_string(), "expected": want.to_string()})));
    }
    Ok(out)
}

fn vandermonde() -> Result<Vec<Check>> {
    let f = theta0();
    let mut out = Vec::new();
    for l in [2u64, 3, 4, 6] {
        let ok = semifree::vandermonde_nonsingular(&f.dual, l)?;
        out.push(Check::new(format!("M({l}) non-singular"), ok, json!(null)));
    }
    Ok(out)
}
