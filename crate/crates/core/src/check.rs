//! Randomized property suites behind `downcore check`.
//!
//! Each case draws its instance from the stream named after its suite, so a
//! `(seed, suite, case)` triple always reproduces the same instance. Failing
//! cases carry a standalone [`Instance`] for replay.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::constructions::{chain_integrals, decompose_d, least_core_decreasing_majorant, level_function};
use crate::error::{Error, Result};
use crate::halfline::StepFunction;
use crate::instance::Instance;
use crate::kfunc::{
    decomposition_gamma_grid, k_curve, k_l1_dinf, k_l1_dinf_halfline, k_l1_linf, k_tl1_linf, k_tl1_linf_halfline,
    k_via_decomposition, Couple, GAP_REFINEMENTS,
};
use crate::norms::{associate_gap, down_norm, lp_norm, tilde_norm, Exponent};
use crate::oracle::{k_exhaustive, level_defining_sup, sup_decreasing_pball, OracleOptions};
use crate::par::Execution;
use crate::random::{
    random_atom_constant, random_core_decreasing, random_cored_space, random_nonnegative, random_signed, CaseRng,
    InstanceShape, SeedTree,
};
use crate::space::{CoredSpace, FunctionOnU};
use crate::transfer::{q_map, r_map};

/// Relative tolerance for identities that hold exactly in exact arithmetic.
pub const EXACT_REL: f64 = 1e-12;
/// Level function against the linear-program oracle.
pub const LP_TOL: f64 = 1e-6;
/// Down norms against projected ascent.
pub const ASCENT_TOL: f64 = 1e-4;
/// Decomposition route against the level-function route.
pub const DECOMPOSITION_TOL: f64 = 1e-6;

/// `|a − b| ≤ tol · max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

fn all_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(*x, *y, tol))
}

/// `a ≤ b` up to relative slack.
fn leq(a: f64, b: f64, tol: f64) -> bool {
    a <= b + tol * 1f64.max(a.abs()).max(b.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Transfer,
    Level,
    Norms,
    Kfunc,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Transfer, Suite::Level, Suite::Norms, Suite::Kfunc];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Transfer => "transfer",
            Suite::Level => "level",
            Suite::Norms => "norms",
            Suite::Kfunc => "kfunc",
        }
    }

    fn shape(self) -> InstanceShape {
        match self {
            Suite::Norms => InstanceShape::new(6, 4),
            _ => InstanceShape::new(8, 5),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses one suite name or `all`.
pub fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    if s == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    Suite::ALL
        .into_iter()
        .find(|x| x.name() == s)
        .map(|x| vec![x])
        .ok_or_else(|| Error::Instance(format!("unknown suite `{s}`")))
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::Instance(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyFailure {
    pub suite: Suite,
    pub case: usize,
    pub property: &'static str,
    pub detail: String,
    pub instance: Instance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub cases: usize,
    pub checks: usize,
    pub failures: Vec<PropertyFailure>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// The failing instance with the fewest points, earliest case first.
    pub fn minimal_failure(&self) -> Option<&PropertyFailure> {
        self.failures.iter().min_by_key(|f| (f.instance.points.len(), f.case))
    }
}

struct Case<'a> {
    cs: &'a CoredSpace,
    checks: usize,
    failed: Vec<(&'static str, String)>,
}

impl Case<'_> {
    fn expect(&mut self, property: &'static str, ok: bool, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failed.push((property, detail()));
        }
    }
}

/// Runs `cases` random cases of `suite`.
pub fn run_suite(suite: Suite, seed: u64, cases: usize, exec: Execution) -> SuiteReport {
    let tree = SeedTree::new(seed);
    let outcomes = exec.map(cases, |i| {
        let mut rng = tree.rng(suite.name(), i as u64);
        let cs = random_cored_space(&mut rng, suite.shape());
        let f = random_signed(&mut rng, cs.n(), 5.0);
        let g = random_nonnegative(&mut rng, cs.n(), 5.0);
        let mut case = Case { cs: &cs, checks: 0, failed: Vec::new() };
        let res = match suite {
            Suite::Transfer => transfer_case(&mut case, &mut rng, &f, &g),
            Suite::Level => level_case(&mut case, &mut rng, &f, &g),
            Suite::Norms => norms_case(&mut case, &mut rng, &f, &g, seed ^ i as u64),
            Suite::Kfunc => kfunc_case(&mut case, &mut rng, &f, &g),
        };
        if let Err(e) = res {
            case.failed.push(("no errors", e.to_string()));
        }
        let instance = Instance::from_parts(&cs, [("f", &f), ("g", &g)]);
        let failures: Vec<PropertyFailure> = case
            .failed
            .into_iter()
            .map(|(property, detail)| PropertyFailure { suite, case: i, property, detail, instance: instance.clone() })
            .collect();
        (case.checks, failures)
    });
    let checks = outcomes.iter().map(|o| o.0).sum();
    let failures = outcomes.into_iter().flat_map(|o| o.1).collect();
    SuiteReport { suite, cases, checks, failures }
}

fn transfer_case(c: &mut Case, rng: &mut CaseRng, f: &FunctionOnU, g: &FunctionOnU) -> Result<()> {
    let cs = c.cs;
    let m = cs.tailored_measure();
    let phi = StepFunction::new((0..cs.k()).map(|_| rng.random_range(-5.0..5.0)).collect())?;
    let psi = StepFunction::new((0..cs.k()).map(|_| rng.random_range(0.0..5.0)).collect())?;

    let rq = r_map(cs, &q_map(cs, &phi)?)?;
    c.expect("RQφ = φ", all_close(rq.values(), phi.values(), EXACT_REL), || format!("{rq:?} vs {phi:?}"));

    let atom_const = random_atom_constant(rng, cs, 5.0);
    let qr = q_map(cs, &r_map(cs, &atom_const)?)?;
    c.expect("QRf = f on atom-constant f", all_close(qr.values(), atom_const.values(), EXACT_REL), || {
        format!("{qr:?}")
    });

    let lhs = cs.integral_product(g, &q_map(cs, &psi)?);
    let rhs = m.integral_product(&r_map(cs, g)?, &psi)?;
    c.expect("pairing duality", close(lhs, rhs, EXACT_REL), || format!("{lhs} vs {rhs}"));

    let rf = r_map(cs, f)?;
    let l1 = |x: &FunctionOnU| lp_norm(cs.space(), x, Exponent::ONE);
    let linf = |x: &FunctionOnU| lp_norm(cs.space(), x, Exponent::Infinite);
    c.expect("‖Rf‖₁ ≤ ‖f‖₁", leq(m.l1_norm(&rf)?, l1(f)?, EXACT_REL), String::new);
    c.expect("‖Rg‖₁ = ‖g‖₁ for g ≥ 0", close(m.l1_norm(&r_map(cs, g)?)?, l1(g)?, EXACT_REL), String::new);
    c.expect("‖Rf‖∞ ≤ ‖f‖∞", leq(m.linf_norm(&rf)?, linf(f)?, EXACT_REL), String::new);
    let qphi = q_map(cs, &phi)?;
    c.expect("‖Qφ‖₁ ≤ ‖φ‖₁", leq(l1(&qphi)?, m.l1_norm(&phi)?, EXACT_REL), String::new);
    c.expect("‖Qφ‖∞ ≤ ‖φ‖∞", leq(linf(&qphi)?, m.linf_norm(&phi)?, EXACT_REL), String::new);

    let r_abs = r_map(cs, &f.abs())?;
    c.expect(
        "|Rf| ≤ R|f|",
        rf.values().iter().zip(r_abs.values()).all(|(a, b)| leq(a.abs(), *b, EXACT_REL)),
        String::new,
    );

    let theta = chain_integrals(cs, f);
    for (j, &gamma) in m.positions().iter().enumerate() {
        let via_r = m.integrate_upto(&rf, gamma)?;
        c.expect("∫_{[0,μ(A)]} Rf dλ = ∫_A f dμ", close(via_r, theta[j + 1], EXACT_REL), || {
            format!("chain {j}: {via_r} vs {}", theta[j + 1])
        });
        let chi: Vec<f64> = (0..cs.k()).map(|i| if i <= j { 1.0 } else { 0.0 }).collect();
        let chi_u = cs.atoms().extend(&chi);
        c.expect("Rχ_A = χ_[0,μ(A)]", r_map(cs, &chi_u)?.values() == chi.as_slice(), String::new);
        c.expect("Qχ_[0,μ(A)] = χ_A", q_map(cs, &StepFunction::new(chi)?)? == chi_u, String::new);
    }

    let prod = g.zip_with(&atom_const, |a, b| a * b);
    let lhs = r_map(cs, &prod)?;
    let rg = r_map(cs, g)?;
    let ra = r_map(cs, &atom_const)?;
    let rhs: Vec<f64> = rg.values().iter().zip(ra.values()).map(|(a, b)| a * b).collect();
    c.expect("R(fg) = Rf·Rg", all_close(lhs.values(), &rhs, EXACT_REL), String::new);
    let phipsi = StepFunction::new(phi.values().iter().zip(psi.values()).map(|(a, b)| a * b).collect())?;
    let lhs = q_map(cs, &phipsi)?;
    let rhs = q_map(cs, &phi)?.zip_with(&q_map(cs, &psi)?, |a, b| a * b);
    c.expect("Q(φψ) = Qφ·Qψ", all_close(lhs.values(), rhs.values(), EXACT_REL), String::new);
    Ok(())
}

fn level_case(c: &mut Case, rng: &mut CaseRng, f: &FunctionOnU, g: &FunctionOnU) -> Result<()> {
    let cs = c.cs;
    let lv = level_function(cs, f)?;
    c.expect("f^o core decreasing", cs.atoms().is_core_decreasing(&lv.level), || format!("{:?}", lv.level));
    let l1f = lp_norm(cs.space(), f, Exponent::ONE)?;
    let l1o = lp_norm(cs.space(), &lv.level, Exponent::ONE)?;
    c.expect("‖f^o‖₁ = ‖f‖₁", close(l1f, l1o, EXACT_REL), || format!("{l1o} vs {l1f}"));
    for p in [Exponent::Finite(1.5), Exponent::Finite(2.0), Exponent::Finite(3.0), Exponent::Infinite] {
        let a = lp_norm(cs.space(), &lv.level, p)?;
        let b = lp_norm(cs.space(), f, p)?;
        c.expect("‖f^o‖_p ≤ ‖f‖_p", leq(a, b, EXACT_REL), || format!("p={p}: {a} > {b}"));
    }

    for _ in 0..3 {
        let h = random_core_decreasing(rng, cs, 5.0);
        let fast = cs.integral_product(&lv.level, &h);
        let lp = level_defining_sup(cs, f, &h, &OracleOptions::default())?;
        c.expect("level defining identity", close(fast, lp, LP_TOL), || format!("{fast} vs LP {lp}"));
    }

    let bigger = f.abs().zip_with(g, |a, b| a + b);
    let lv_big = level_function(cs, &bigger)?;
    c.expect(
        "f ≤ g ⇒ f^o ≤ g^o",
        lv.level.values().iter().zip(lv_big.level.values()).all(|(a, b)| leq(*a, *b, EXACT_REL)),
        String::new,
    );

    let gt = least_core_decreasing_majorant(cs, g)?;
    let ft = least_core_decreasing_majorant(cs, f)?;
    c.expect("g̃ core decreasing", cs.atoms().is_core_decreasing(&gt), String::new);
    c.expect("g̃ ≥ |g|", gt.values().iter().zip(g.values()).all(|(a, b)| *a >= b.abs()), String::new);
    let sum = least_core_decreasing_majorant(cs, &f.zip_with(g, |a, b| a + b))?;
    c.expect(
        "(f+g)~ ≤ f̃ + g̃",
        sum.values().iter().zip(ft.values()).zip(gt.values()).all(|((s, a), b)| leq(*s, a + b, EXACT_REL)),
        String::new,
    );

    let fa = f.abs();
    let total = cs.integral(&fa);
    for gamma in [0.0, 0.3 * total, 0.5 * total, total, total + 1.0] {
        let d = decompose_d(cs, &fa, gamma)?;
        let got = cs.integral_product(&d.d, &fa);
        c.expect("∫D_f(γ)|f| = min(γ, ‖f‖₁)", close(got, gamma.min(total), EXACT_REL), || {
            format!("γ={gamma}: {got}")
        });
        c.expect(
            "D_f(γ) core decreasing in [0,1]",
            cs.atoms().is_core_decreasing(&d.d) && d.d.values().iter().all(|&x| x <= 1.0),
            String::new,
        );
    }
    Ok(())
}

fn norms_case(c: &mut Case, rng: &mut CaseRng, f: &FunctionOnU, g: &FunctionOnU, seed: u64) -> Result<()> {
    let cs = c.cs;
    let opts = OracleOptions::default();
    let d1 = down_norm(cs, f, Exponent::ONE)?;
    c.expect("‖f‖_{L¹↓} = ‖f‖₁", close(d1, lp_norm(cs.space(), f, Exponent::ONE)?, EXACT_REL), String::new);
    let dinf = down_norm(cs, f, Exponent::Infinite)?;
    let lp1 = sup_decreasing_pball(cs, f, Exponent::ONE, &opts)?;
    c.expect("‖f‖_{L^∞↓} = oracle", close(dinf, lp1, 1e-9), || format!("{dinf} vs {lp1}"));
    for p in [Exponent::Finite(1.5), Exponent::Finite(2.0), Exponent::Finite(3.0)] {
        let fast = down_norm(cs, f, p)?;
        let slow = sup_decreasing_pball(cs, f, p.conjugate(), &opts)?;
        c.expect("‖f‖_{L^p↓} = oracle sup", (fast - slow).abs() <= ASCENT_TOL, || {
            format!("p={p}: {fast} vs {slow}")
        });
    }
    let s: f64 = rng.random_range(-3.0..3.0);
    for p in [Exponent::ONE, Exponent::Finite(2.0), Exponent::Infinite] {
        let (df, dg) = (down_norm(cs, f, p)?, down_norm(cs, g, p)?);
        let (tf, tg) = (tilde_norm(cs, f, p)?, tilde_norm(cs, g, p)?);
        let lf = lp_norm(cs.space(), f, p)?;
        c.expect("down ≤ L^p ≤ tilde", leq(df, lf, EXACT_REL) && leq(lf, tf, EXACT_REL), || {
            format!("{df} {lf} {tf}")
        });
        let sf = f.map(|v| s * v);
        c.expect("homogeneity", close(down_norm(cs, &sf, p)?, s.abs() * df, EXACT_REL), String::new);
        c.expect("tilde homogeneity", close(tilde_norm(cs, &sf, p)?, s.abs() * tf, EXACT_REL), String::new);
        let sum = f.zip_with(g, |a, b| a + b);
        c.expect("triangle", leq(down_norm(cs, &sum, p)?, df + dg, EXACT_REL), String::new);
        c.expect("tilde triangle", leq(tilde_norm(cs, &sum, p)?, tf + tg, EXACT_REL), String::new);
        let dom = f.abs().zip_with(g, |a, b| a + b);
        c.expect("lattice", leq(df, down_norm(cs, &dom, p)?, EXACT_REL), String::new);
        c.expect("tilde lattice", leq(tf, tilde_norm(cs, &dom, p)?, EXACT_REL), String::new);
    }
    let gap = associate_gap(cs, f, Exponent::Finite(2.0), 64, seed, Execution::Sequential)?;
    c.expect("associate gap ≤ 0", gap <= 1e-9, || format!("gap {gap}"));
    Ok(())
}

fn kfunc_case(c: &mut Case, rng: &mut CaseRng, f: &FunctionOnU, g: &FunctionOnU) -> Result<()> {
    let cs = c.cs;
    let m = cs.tailored_measure();
    let total = cs.space().total_mass();
    let grid = decomposition_gamma_grid(cs, f, GAP_REFINEMENTS)?;
    let qrf = q_map(cs, &r_map(cs, &f.abs())?)?;
    let rg = r_map(cs, g)?;
    let qrg = q_map(cs, &rg)?;
    for _ in 0..4 {
        let t = rng.random_range(0.0..1.5 * total);
        let fast = k_l1_dinf(cs, f, t)?;
        let slow = k_via_decomposition(cs, f, t, &grid)?;
        c.expect("K(L¹,L^∞↓) = decomposition infimum", close(fast, slow, DECOMPOSITION_TOL), || {
            format!("t={t}: {fast} vs {slow}")
        });
        let via_qr = k_l1_dinf(cs, &qrf, t)?;
        let half = k_l1_dinf_halfline(&m, &r_map(cs, &f.abs())?, t)?;
        c.expect("K(f) = K(QRf) = K(Rf)", close(fast, via_qr, EXACT_REL) && close(fast, half, EXACT_REL), || {
            format!("{fast} {via_qr} {half}")
        });
        let (a, b, d) = (k_tl1_linf(cs, &qrg, t)?, k_tl1_linf_halfline(&m, &rg, t)?, k_tl1_linf(cs, g, t)?);
        c.expect("K(QRg) ≤ K(Rg) ≤ K(g)", leq(a, b, EXACT_REL) && leq(b, d, EXACT_REL), || format!("{a} {b} {d}"));
        let linf = k_l1_linf(cs.space(), f, t)?;
        c.expect("K(L¹,L^∞↓) ≤ K(L¹,L^∞)", leq(fast, linf, EXACT_REL), String::new);
    }
    let ts: Vec<f64> = (0..12).map(|i| i as f64 * total / 8.0).collect();
    for couple in Couple::ALL {
        let ok = k_curve(couple, cs, f, &ts, Execution::Sequential).is_ok();
        c.expect("K-curve nondecreasing and concave", ok, || couple.to_string());
    }
    if cs.n() <= 3 {
        let t = rng.random_range(0.1..total);
        let fast = k_tl1_linf(cs, g, t)?;
        let slow = k_exhaustive(cs, g, t, Couple::TildeL1Linf, 24, Execution::Sequential)?;
        c.expect("K(L̃¹,L^∞) = exhaustive", (fast - slow.value).abs() <= 2.0 * slow.resolution, || {
            format!("{fast} vs {}", slow.value)
        });
    }
    Ok(())
}
