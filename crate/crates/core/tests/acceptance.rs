//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runtime budgets are part of each criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kernel_stability::counterexample::{
    build_counterexample, build_m_h, series_evidence, OpCertificate,
};
use kernel_stability::kernel::{
    bump_l1_distance, BlockCount, Bump, Epsilon, Kernel, PiecewiseConstantKernel, SymMatrix,
    TrapezoidKernel,
};
use kernel_stability::norms;
use kernel_stability::operator::{
    adversarial_search, apply_operator, reduce_input, BoundedInput, MethodChoice, SearchConfig,
    Verdict,
};
use kernel_stability::quadrature;
use kernel_stability::rational::{self, int, rat, Rational};
use kernel_stability::verification::{gram_check, random_points};

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, max_n: usize) -> SymMatrix {
    let n = rng.random_range(1..=max_n);
    let rank = rng.random_range(1..=n);
    SymMatrix::random_psd(rng, n, rank, 3)
}

fn random_epsilon(rng: &mut ChaCha8Rng) -> Epsilon {
    let q: i64 = rng.random_range(3..=40);
    let p: i64 = rng.random_range(1..=(q - 1) / 2);
    Epsilon::new(rat(p, q)).unwrap()
}

fn bump_distance() -> Outcome {
    for (p, q) in [(1, 4), (1, 8), (1, 3)] {
        let eps = Epsilon::new(rat(p, q)).unwrap();
        let trap = Bump::Trapezoid(eps.clone());
        let exact = bump_l1_distance(&Bump::Indicator, &trap);
        ensure(exact == rat(p, q), || {
            format!("rational distance {exact} at ε = {p}/{q}")
        })?;
        let bps: Vec<f64> = trap
            .breakpoints()
            .iter()
            .chain(&Bump::Indicator.breakpoints())
            .map(rational::to_f64)
            .collect();
        let quad = quadrature::integrate_1d(-0.5, 1.5, &bps, |x| {
            (Bump::Indicator.eval_f64(x) - trap.eval_f64(x)).abs()
        });
        let err = (quad - eps.to_f64()).abs();
        ensure(err <= 1e-8, || {
            format!("quadrature error {err:e} at ε = {p}/{q}")
        })?;
    }
    Ok("ε ∈ {1/4, 1/8, 1/3}".into())
}

fn l1_transfer() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let m = random_matrix(&mut rng, 6);
        let k = PiecewiseConstantKernel::new(m.clone());
        let exact = norms::kernel_l1_pwc(&k);
        ensure(exact == norms::matrix_l1(&m), || {
            format!("matrix {i}: kernel L1 {exact}")
        })?;
        let quad = norms::quadrature_l1(&k).map_err(|e| e.to_string())?;
        let err = (quad - rational::to_f64(&exact)).abs();
        worst = worst.max(err);
        ensure(err <= 1e-6, || {
            format!("matrix {i}: quadrature error {err:e}")
        })?;
    }
    Ok(format!("50 matrices, worst quadrature error {worst:.1e}"))
}

fn op_transfer() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..20 {
        let m = random_matrix(&mut rng, 4);
        let (exact, _) = norms::matrix_opnorm_inf1_exact(&m).map_err(|e| e.to_string())?;
        let k = PiecewiseConstantKernel::new(m);
        let found = adversarial_search(&k, &SearchConfig::new(int(1), 10_000))
            .map_err(|e| e.to_string())?;
        let err = (found.lower_bound.approx - rational::to_f64(&exact)).abs();
        ensure(err <= 1e-6, || {
            format!(
                "matrix {i}: search {} vs exact {exact}",
                found.lower_bound.approx
            )
        })?;
    }
    Ok("20 matrices".into())
}

fn approximation_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..100 {
        let m = random_matrix(&mut rng, 4);
        let eps = random_epsilon(&mut rng);
        let l1 = norms::matrix_l1(&m);
        let radius = int(4) * &l1 * eps.value();
        let (op, _) = norms::matrix_opnorm_inf1_exact(&m).map_err(|e| e.to_string())?;
        let pwc = PiecewiseConstantKernel::new(m.clone());
        let trap = TrapezoidKernel::new(m.clone(), eps.clone());

        let pwc_op = adversarial_search(&pwc, &SearchConfig::new(int(1), 10_000))
            .map_err(|e| e.to_string())?;
        ensure(pwc_op.lower_bound.exact.as_ref() == Some(&op), || {
            format!("pair {i}: ‖M̄‖ search differs from ‖M‖")
        })?;
        ensure(norms::kernel_l1_pwc(&pwc) == l1, || {
            format!("pair {i}: ‖M̄‖₁ ≠ ‖M‖₁")
        })?;

        let trap_op = adversarial_search(&trap, &SearchConfig::new(rat(1, 2), 10_000))
            .map_err(|e| e.to_string())?;
        let found = trap_op
            .lower_bound
            .exact
            .clone()
            .ok_or("inexact search value")?;
        let gap = (&op - &found).abs();
        ensure(gap <= radius, || {
            format!("pair {i}: op gap {gap} > {radius}")
        })?;
        let bracket = norms::kernel_opnorm_trap_bracket(&trap).map_err(|e| e.to_string())?;
        ensure(bracket.is_consistent(), || {
            format!("pair {i}: inconsistent bracket")
        })?;
        let upper = bracket
            .upper
            .and_then(|u| u.exact)
            .ok_or("no upper bound")?;
        ensure(found <= upper, || {
            format!("pair {i}: search {found} above bracket {upper}")
        })?;

        let trap_l1 = norms::kernel_l1_trap(&trap);
        ensure((&l1 - &trap_l1).abs() <= radius, || {
            format!("pair {i}: L1 gap too large")
        })?;
        ensure(trap_l1 == l1, || {
            format!("pair {i}: ‖M̄_ε‖₁ = {trap_l1} ≠ {l1}")
        })?;
        let dist = norms::kernel_l1_distance_pwc_trap(&m, &eps);
        ensure(dist <= radius, || {
            format!("pair {i}: ‖M̄ − M̄_ε‖₁ = {dist} > {radius}")
        })?;
    }
    Ok("100 pairs, all four relations plus exact trapezoid L1".into())
}

fn certificates() -> Outcome {
    let c1 = build_m_h(1).map_err(|e| e.to_string())?;
    ensure(c1.certificate.l1 == int(1), || "‖M^(1)‖₁ ≠ 1".into())?;
    let (op1, _) = norms::matrix_opnorm_inf1_exact(&c1.matrix).map_err(|e| e.to_string())?;
    ensure(op1 == rat(4, 5), || format!("‖M^(1)‖_(∞,1) = {op1}"))?;
    let c2 = build_m_h(2).map_err(|e| e.to_string())?;
    ensure(c2.certificate.l1 == rat(1, 2), || "‖M^(2)‖₁ ≠ 1/2".into())?;
    ensure(c2.matrix.dim() == 16, || "M^(2) is not 16 × 16".into())?;
    let (op2, _) = norms::matrix_opnorm_inf1_exact(&c2.matrix).map_err(|e| e.to_string())?;
    ensure(op2 <= rat(1, 4), || format!("‖M^(2)‖_(∞,1) = {op2}"))?;
    for h in 3..=10u64 {
        let c = build_m_h(h).map_err(|e| format!("h = {h}: {e}"))?;
        ensure(
            matches!(c.certificate.op_inf1, OpCertificate::Analytic { .. }),
            || format!("h = {h}: not analytic"),
        )?;
        ensure(
            c.certificate.op_inf1.value() <= &rat(1, (h * h) as i64),
            || format!("h = {h}: bound too weak"),
        )?;
        ensure(c.certificate.l1 == rat(1, h as i64), || {
            format!("h = {h}: L1 ≠ 1/h")
        })?;
    }
    Ok(format!(
        "‖M^(1)‖ = {op1}, ‖M^(2)‖ = {op2}, analytic h = 3..10"
    ))
}

fn series() -> Outcome {
    let (_, spec) = build_counterexample(BlockCount::Finite(100)).map_err(|e| e.to_string())?;
    let ev = series_evidence(&spec, 100).map_err(|e| e.to_string())?;
    let l1 = rational::to_f64(&ev.l1_partial_sum);
    let floor = 101f64.ln();
    ensure(l1 >= floor, || format!("L1 partial sum {l1} < ln 101"))?;
    let total = rational::to_f64(&ev.op_total_bound);
    ensure(ev.op_total_bound <= rat(384, 100), || {
        format!("operator bound {total} > 3.84")
    })?;
    let partial = rational::to_f64(&ev.op_partial_sum);
    ensure(partial < ev.basel_limit, || {
        format!("partial operator sum {partial} ≥ 7π²/18")
    })?;
    let verdict = ev.verdict();
    ensure(verdict.verdict == Verdict::StableNotL1, || {
        format!("verdict {:?}", verdict.verdict)
    })?;
    Ok(format!(
        "L1 {l1:.6} ≥ {floor:.6}, operator bound {total:.6}, stable_not_l1"
    ))
}

fn psd_suite() -> Outcome {
    let (kernel, _) = build_counterexample(BlockCount::Finite(3)).map_err(|e| e.to_string())?;
    let (lo, hi) = kernel.support().ok_or("unbounded support")?;
    let (lo, hi) = (rational::to_f64(&lo), rational::to_f64(&hi));
    let mut worst = f64::INFINITY;
    for seed in 0..100u64 {
        let points = random_points(30, lo, hi, seed);
        let check = gram_check(&kernel, &points, 1e-8).map_err(|e| e.to_string())?;
        worst = worst.min(check.sample.min_eigenvalue);
        ensure(check.pass, || {
            format!(
                "seed {seed}: min eigenvalue {:e}",
                check.sample.min_eigenvalue
            )
        })?;
    }
    Ok(format!("100 seeds, worst min eigenvalue {worst:.2e}"))
}

fn random_input(rng: &mut ChaCha8Rng, end: i64) -> BoundedInput {
    let q: i64 = rng.random_range(1..=6);
    let mut cuts: Vec<i64> = (0..rng.random_range(0..8))
        .map(|_| rng.random_range(1..end * q))
        .collect();
    cuts.push(0);
    cuts.push(end * q + rng.random_range(0..q));
    cuts.sort();
    cuts.dedup();
    let bps: Vec<Rational> = cuts.iter().map(|&c| rat(c, q)).collect();
    let vals = (1..bps.len())
        .map(|_| {
            let d: i64 = rng.random_range(1..=8);
            rat(rng.random_range(-d..=d), d)
        })
        .collect();
    BoundedInput::new(bps, vals).unwrap()
}

fn reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..100 {
        let m = random_matrix(&mut rng, 5);
        let u = random_input(&mut rng, 2 * m.dim() as i64);
        let k = PiecewiseConstantKernel::new(m.clone());
        let out = apply_operator(&k, &u, None, MethodChoice::Auto).map_err(|e| e.to_string())?;
        let got = out.l1_exact.ok_or("no exact L1")?;
        let ubar = reduce_input(&u, m.dim()).map_err(|e| e.to_string())?;
        let want = (0..m.dim())
            .map(|h| {
                (0..m.dim())
                    .map(|k| m.entry(h, k) * &ubar[k])
                    .fold(int(0), |a, b| a + b)
                    .abs()
            })
            .fold(int(0), |a, b| a + b);
        ensure(got == want, || {
            format!("case {i}: ‖M̄u‖₁ = {got}, ‖Mū‖₁ = {want}")
        })?;
    }
    Ok("100 inputs".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("bump distance", 1, bump_distance),
        ("L1 norm transfer", 30, l1_transfer),
        ("operator norm transfer", 60, op_transfer),
        ("approximation bounds", 60, approximation_bounds),
        ("M^(h) certificates", 120, certificates),
        ("counterexample series", 60, series),
        ("PSD property suite", 60, psd_suite),
        ("reduction identity", 30, reduction),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed <= Duration::from_secs(*budget) {
                Ok(detail)
            } else {
                Err(format!("{detail}; over the {budget} s budget"))
            }
        });
        let (status, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {} [{name}] {status} ({:.2} s) {detail}",
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
