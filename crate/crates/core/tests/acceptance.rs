//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use downcore::check::{close, run_suite, Suite};
use downcore::constructions::{decompose_d, least_core_decreasing_majorant, level_function};
use downcore::kfunc::{
    decomposition_gamma_grid, k_l1_dinf, k_tl1_linf, k_tl1_linf_halfline, k_via_decomposition, Couple, GAP_REFINEMENTS,
};
use downcore::norms::{down_norm, lp_norm, Exponent};
use downcore::oracle::{k_exhaustive, level_defining_sup, sup_decreasing_pball, OracleOptions};
use downcore::random::{
    random_atom_constant, random_core_decreasing, random_cored_space, random_cored_space_sized, random_nonnegative,
    random_signed, CaseRng, InstanceShape, SeedTree,
};
use downcore::{q_map, r_map, CoredSpace, Execution, FunctionOnU};
use rand::Rng;

const SEED: u64 = 0x5eed_2024;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn instance(name: &str, i: usize, shape: InstanceShape) -> (CaseRng, CoredSpace) {
    let mut rng = SeedTree::new(SEED).rng(name, i as u64);
    let cs = random_cored_space(&mut rng, shape);
    (rng, cs)
}

fn fail(i: usize, what: String) -> String {
    format!("case {i}: {what}")
}

fn within(limit: Duration, elapsed: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:?}, limit {limit:?}"))
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..200 {
        let (mut rng, cs) = instance("c1", i, InstanceShape::new(8, 5));
        let f = random_signed(&mut rng, cs.n(), 10.0);
        let gap = (down_norm(&cs, &f, Exponent::ONE).unwrap() - lp_norm(cs.space(), &f, Exponent::ONE).unwrap()).abs();
        worst = worst.max(gap);
        if gap > 1e-12 {
            return Err(fail(i, format!("|down₁ − L¹| = {gap:e}")));
        }
    }
    within(Duration::from_secs(1), start.elapsed())?;
    Ok(format!("max gap {worst:.1e} in {:?}", start.elapsed()))
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..200 {
        let (mut rng, cs) = instance("c1", i, InstanceShape::new(8, 5));
        let f = random_signed(&mut rng, cs.n(), 10.0);
        let fast = down_norm(&cs, &f, Exponent::Infinite).unwrap();
        let oracle = sup_decreasing_pball(&cs, &f, Exponent::ONE, &OracleOptions::default()).unwrap();
        worst = worst.max((fast - oracle).abs());
        if (fast - oracle).abs() > 1e-9 {
            return Err(fail(i, format!("{fast} vs oracle {oracle}")));
        }
    }
    Ok(format!("max gap {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..200 {
        let (mut rng, cs) = instance("c3", i, InstanceShape::new(8, 5));
        let f = random_signed(&mut rng, cs.n(), 10.0);
        let level = level_function(&cs, &f).unwrap().level;
        for _ in 0..20 {
            let g = random_core_decreasing(&mut rng, &cs, 5.0);
            let fast = cs.integral_product(&level, &g);
            let lp = level_defining_sup(&cs, &f, &g, &OracleOptions::default()).unwrap();
            worst = worst.max((fast - lp).abs());
            if (fast - lp).abs() > 1e-6 {
                return Err(fail(i, format!("∫f°g = {fast}, LP sup = {lp}")));
            }
        }
    }
    within(Duration::from_secs(30), start.elapsed())?;
    Ok(format!("4000 pairs, max gap {worst:.1e} in {:?}", start.elapsed()))
}

fn criterion_4() -> Outcome {
    let ps = [1.5, 2.0, 3.0];
    let gaps = Execution::Parallel.map(100, |i| {
        let (mut rng, cs) = instance("c4", i, InstanceShape::new(8, 4));
        let f = random_signed(&mut rng, cs.n(), 10.0);
        let mut worst = (0.0f64, 0.0);
        for p in ps {
            let p = Exponent::Finite(p);
            let fast = down_norm(&cs, &f, p).unwrap();
            let slow = sup_decreasing_pball(&cs, &f, p.conjugate(), &OracleOptions::default()).unwrap();
            if (fast - slow).abs() > worst.0 {
                worst = ((fast - slow).abs(), p.value());
            }
        }
        worst
    });
    let (i, (gap, p)) = gaps.iter().copied().enumerate().max_by(|a, b| a.1 .0.total_cmp(&b.1 .0)).unwrap();
    if gap > 1e-4 {
        return Err(fail(i, format!("p = {p}: gap {gap:e}")));
    }
    Ok(format!("300 norms, max gap {gap:.1e}"))
}

fn criterion_5() -> Outcome {
    let mut worst = (0.0f64, 0.0f64);
    for i in 0..100 {
        let (mut rng, cs) = instance("c5", i, InstanceShape::new(8, 5));
        let f = random_signed(&mut rng, cs.n(), 10.0);
        let grid = decomposition_gamma_grid(&cs, &f, GAP_REFINEMENTS).unwrap();
        let qrf = q_map(&cs, &r_map(&cs, &f.abs()).unwrap()).unwrap();
        let total = cs.space().total_mass();
        for _ in 0..10 {
            let t = rng.random_range(0.0..1.5 * total);
            let fast = k_l1_dinf(&cs, &f, t).unwrap();
            let slow = k_via_decomposition(&cs, &f, t, &grid).unwrap();
            let via_qr = k_l1_dinf(&cs, &qrf, t).unwrap();
            worst.0 = worst.0.max((fast - slow).abs());
            worst.1 = worst.1.max((fast - via_qr).abs() / fast.abs().max(1.0));
            if (fast - slow).abs() > 1e-6 {
                return Err(fail(i, format!("t = {t}: {fast} vs decomposition {slow}")));
            }
            if !close(fast, via_qr, 1e-12) {
                return Err(fail(i, format!("t = {t}: K(f) = {fast}, K(QR|f|) = {via_qr}")));
            }
        }
    }
    Ok(format!("max gap {:.1e}, QR relative gap {:.1e}", worst.0, worst.1))
}

fn criterion_6() -> Outcome {
    const GRID: usize = 16;
    let results = Execution::Parallel.map(40, |i| -> Result<f64, String> {
        let mut rng = SeedTree::new(SEED).rng("c6", i as u64);
        let n = rng.random_range(1..=4);
        let k = rng.random_range(1..=n);
        let cs = random_cored_space_sized(&mut rng, n, k);
        let m = cs.tailored_measure();
        let g = random_signed(&mut rng, n, 5.0);
        let h = random_atom_constant(&mut rng, &cs, 5.0);
        let mut worst: f64 = 0.0;
        for _ in 0..3 {
            let t = rng.random_range(0.0..1.5 * cs.space().total_mass());
            let fast = k_tl1_linf(&cs, &g, t).unwrap();
            let brute = k_exhaustive(&cs, &g, t, Couple::TildeL1Linf, GRID, Execution::Sequential).unwrap();
            if (fast - brute.value).abs() > 2.0 * brute.resolution {
                return Err(fail(i, format!("t = {t}: {fast} vs exhaustive {} (±{})", brute.value, brute.resolution)));
            }
            worst = worst.max((fast - brute.value).abs() / brute.resolution.max(f64::MIN_POSITIVE));

            let terms = |x: &FunctionOnU| {
                let rx = r_map(&cs, x).unwrap();
                let qr = q_map(&cs, &rx).unwrap();
                [
                    k_tl1_linf(&cs, &qr, t).unwrap(),
                    k_tl1_linf_halfline(&m, &rx, t).unwrap(),
                    k_tl1_linf(&cs, x, t).unwrap(),
                ]
            };
            let [a, b, c] = terms(&g.abs());
            if a > b + 1e-12 * b.max(1.0) || b > c + 1e-12 * c.max(1.0) {
                return Err(fail(i, format!("chain out of order: {a} {b} {c}")));
            }
            let [a, b, c] = terms(&h);
            if !close(a, b, 1e-12) || !close(b, c, 1e-12) {
                return Err(fail(i, format!("atom-constant chain not equal: {a} {b} {c}")));
            }
        }
        Ok(worst)
    });
    let mut worst: f64 = 0.0;
    for r in results {
        worst = worst.max(r?);
    }
    Ok(format!("120 values, max gap {worst:.2} resolutions"))
}

fn criterion_7() -> Outcome {
    let report = run_suite(Suite::Transfer, SEED, 500, Execution::Parallel);
    match report.minimal_failure() {
        None => Ok(format!("500 instances, {} identities", report.checks)),
        Some(f) => Err(fail(f.case, format!("{}: {}", f.property, f.detail))),
    }
}

fn criterion_8() -> Outcome {
    for i in 0..100 {
        let (mut rng, cs) = instance("c8", i, InstanceShape::new(8, 5));
        let f = random_nonnegative(&mut rng, cs.n(), 10.0);
        for _ in 0..10 {
            let shares: Vec<f64> = (0..cs.n()).map(|_| rng.random_range(0.0..=1.0)).collect();
            let f1 = cs.function(f.values().iter().zip(&shares).map(|(v, s)| v * s).collect()).unwrap();
            let finf = f.zip_with(&f1, |a, b| a - b);
            let gamma = cs.integral(&f1);
            let d = decompose_d(&cs, &f, gamma).unwrap().d;
            let lhs1 = cs.integral_product(&d, &f);
            let rest = f.zip_with(&d, |a, b| (1.0 - b) * a);
            let lhs2 = down_norm(&cs, &rest, Exponent::Infinite).unwrap();
            let rhs2 = down_norm(&cs, &finf, Exponent::Infinite).unwrap();
            if lhs1 > gamma + 1e-12 {
                return Err(fail(i, format!("‖Df‖₁ = {lhs1} > ‖f₁‖₁ = {gamma}")));
            }
            if lhs2 > rhs2 + 1e-12 {
                return Err(fail(i, format!("‖(1−D)f‖∞↓ = {lhs2} > ‖f∞‖∞↓ = {rhs2}")));
            }
        }
    }
    Ok("1000 splits".into())
}

fn criterion_9() -> Outcome {
    let nondecreasing =
        |a: &FunctionOnU, b: &FunctionOnU| a.values().iter().zip(b.values()).all(|(x, y)| *x <= y + 1e-12);
    for i in 0..200 {
        let (mut rng, cs) = instance("c9", i, InstanceShape::new(8, 5));
        let mut chain = vec![random_nonnegative(&mut rng, cs.n(), 5.0)];
        for _ in 0..2 {
            let step = random_nonnegative(&mut rng, cs.n(), 2.0);
            let next = chain.last().unwrap().zip_with(&step, |a, b| a + b);
            chain.push(next);
        }
        let levels: Vec<_> = chain.iter().map(|f| level_function(&cs, f).unwrap().level).collect();
        let majorants: Vec<_> = chain.iter().map(|f| least_core_decreasing_majorant(&cs, f).unwrap()).collect();
        for w in 0..2 {
            if !nondecreasing(&levels[w], &levels[w + 1]) {
                return Err(fail(i, format!("level: {:?} then {:?}", levels[w], levels[w + 1])));
            }
            if !nondecreasing(&majorants[w], &majorants[w + 1]) {
                return Err(fail(i, format!("majorant: {:?} then {:?}", majorants[w], majorants[w + 1])));
            }
        }
    }
    Ok("200 chains".into())
}

fn criterion_10() -> Outcome {
    let cs = CoredSpace::chain_of_singletons(vec![1.0, 2.0, 1.0]).unwrap();
    let f = cs.function(vec![4.0, 1.0, 2.0]).unwrap();
    let opts = OracleOptions::default();
    let check = |what: &str, got: f64, want: f64, tol: f64| -> Result<(), String> {
        if (got - want).abs() <= tol {
            Ok(())
        } else {
            Err(format!("{what}: got {got}, expected {want}"))
        }
    };

    // Oracle confirmations first.
    let level = level_function(&cs, &f).unwrap().level;
    for j in 0..3 {
        let chi = cs.function((0..3).map(|u| if u <= j { 1.0 } else { 0.0 }).collect()).unwrap();
        let lp = level_defining_sup(&cs, &f, &chi, &opts).unwrap();
        check("∫_A f° against LP", cs.integral_product(&level, &chi), lp, 1e-9)?;
    }
    check("down∞ against LP", sup_decreasing_pball(&cs, &f, Exponent::ONE, &opts).unwrap(), 4.0, 1e-9)?;
    let l2 = 8.0 / 3f64.sqrt();
    check("down₂ against ascent", sup_decreasing_pball(&cs, &f, Exponent::Finite(2.0), &opts).unwrap(), l2, 1e-4)?;
    let grid = decomposition_gamma_grid(&cs, &f, GAP_REFINEMENTS).unwrap();
    check("K(2) against decomposition", k_via_decomposition(&cs, &f, 2.0, &grid).unwrap(), 16.0 / 3.0, 1e-9)?;
    let brute = k_exhaustive(&cs, &f, 2.0, Couple::L1DownInf, 48, Execution::Parallel).unwrap();
    check("K(2) against exhaustive", brute.value, 16.0 / 3.0, 2.0 * brute.resolution)?;

    // Frozen values.
    for (got, want) in level.values().iter().zip([4.0, 4.0 / 3.0, 4.0 / 3.0]) {
        check("f°", *got, want, 1e-14)?;
    }
    check("down∞", down_norm(&cs, &f, Exponent::Infinite).unwrap(), 4.0, 0.0)?;
    check("down₂", down_norm(&cs, &f, Exponent::Finite(2.0)).unwrap(), l2, 1e-14)?;
    check("K(2)", k_l1_dinf(&cs, &f, 2.0).unwrap(), 16.0 / 3.0, 1e-14)?;
    let d = decompose_d(&cs, &f, 5.0).unwrap().d;
    for (got, want) in d.values().iter().zip([1.0, 0.5, 0.0]) {
        check("D_f(5)", *got, want, 1e-15)?;
    }
    check("‖D_f(5) f‖₁", cs.integral_product(&d, &f), 5.0, 1e-14)?;
    Ok("all goldens confirmed by oracles".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("down norm p=1 equals L¹", criterion_1),
        ("down norm p=∞ equals LP oracle", criterion_2),
        ("level-defining identity", criterion_3),
        ("down norm duality, p ∈ {1.5, 2, 3}", criterion_4),
        ("K(L¹, L^∞↓) via decomposition", criterion_5),
        ("K(L̃¹, L^∞) via exhaustive search", criterion_6),
        ("transfer identities", criterion_7),
        ("decomposition optimality", criterion_8),
        ("monotone convergence", criterion_9),
        ("worked instance", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2}: {name} ({detail}; {secs:.2}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name} ({detail}; {secs:.2}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
