use num_traits::Signed;
use proptest::prelude::*;

use kernel_stability::counterexample::{build_counterexample, build_m_h, series_evidence};
use kernel_stability::kernel::{
    BlockCount, Epsilon, Kernel, PiecewiseConstantKernel, SymMatrix, TrapezoidKernel,
};
use kernel_stability::kernel_file::KernelFile;
use kernel_stability::norms;
use kernel_stability::operator::{
    adversarial_search, apply_operator, reduce_input, BoundedInput, MethodChoice, SearchConfig,
};
use kernel_stability::rational::{self, int, rat, Rational};
use kernel_stability::verification::{check_psd_matrix, gram_check};

fn psd_matrix(max_n: usize) -> impl Strategy<Value = SymMatrix> {
    (1..=max_n, 1..=3usize).prop_flat_map(|(n, r)| {
        prop::collection::vec(prop::collection::vec(-3i64..=3, r), n).prop_map(|v| {
            SymMatrix::from_factor(
                v.into_iter()
                    .map(|row| row.into_iter().map(int).collect())
                    .collect(),
            )
            .unwrap()
        })
    })
}

fn epsilon() -> impl Strategy<Value = Epsilon> {
    (3i64..=30)
        .prop_flat_map(|q| (1..=(q - 1) / 2).prop_map(move |p| Epsilon::new(rat(p, q)).unwrap()))
}

/// Piecewise-constant input on `[0, end + extra)` with cuts on a `1/q` grid.
fn input(end: i64) -> impl Strategy<Value = BoundedInput> {
    (
        1i64..=4,
        prop::collection::vec((0i64..1000, -4i64..=4), 1..8),
    )
        .prop_map(move |(q, raw)| {
            let mut cuts: Vec<i64> = raw.iter().map(|(c, _)| 1 + c % (end * q)).collect();
            cuts.push(0);
            cuts.push(end * q + 1);
            cuts.sort();
            cuts.dedup();
            let vals = (1..cuts.len())
                .map(|i| rat(raw[i % raw.len()].1, 4))
                .collect();
            BoundedInput::new(cuts.iter().map(|&c| rat(c, q)).collect(), vals).unwrap()
        })
}

fn matrix_and_input(max_n: usize) -> impl Strategy<Value = (SymMatrix, BoundedInput)> {
    psd_matrix(max_n).prop_flat_map(|m| {
        let end = 2 * m.dim() as i64;
        (Just(m), input(end))
    })
}

fn exact_l1(k: &dyn Kernel, u: &BoundedInput) -> Rational {
    apply_operator(k, u, None, MethodChoice::Auto)
        .unwrap()
        .l1_exact
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduction_identity((m, u) in matrix_and_input(5)) {
        let ubar = reduce_input(&u, m.dim()).unwrap();
        let want = (0..m.dim())
            .map(|h| (0..m.dim()).map(|k| m.entry(h, k) * &ubar[k]).fold(int(0), |a, b| a + b).abs())
            .fold(int(0), |a, b| a + b);
        prop_assert_eq!(exact_l1(&PiecewiseConstantKernel::new(m), &u), want);
    }

    #[test]
    fn output_vanishes_between_cells((m, u) in matrix_and_input(4)) {
        let n = m.dim();
        let out = apply_operator(&PiecewiseConstantKernel::new(m), &u, None, MethodChoice::Auto).unwrap();
        let profile = out.profile.unwrap();
        for h in 1..=n as i64 {
            prop_assert_eq!(profile.eval(&rat(4 * h - 3, 2)), int(0));
            let inside = profile.eval(&rat(4 * h - 1, 2));
            prop_assert_eq!(profile.eval(&rat(8 * h - 3, 4)), inside);
        }
    }

    #[test]
    fn smoothing_moves_output_by_at_most_kernel_distance((m, u) in matrix_and_input(4), eps in epsilon()) {
        let pwc = exact_l1(&PiecewiseConstantKernel::new(m.clone()), &u);
        let trap = exact_l1(&TrapezoidKernel::new(m.clone(), eps.clone()), &u);
        let dist = norms::kernel_l1_distance_pwc_trap(&m, &eps);
        prop_assert!((pwc - trap).abs() <= dist);
    }

    #[test]
    fn operator_is_linear((m, u) in matrix_and_input(3), eps in epsilon(), a in -2i64..=2) {
        let k = TrapezoidKernel::new(m, eps);
        let half = rat(a, 4);
        let zero = BoundedInput::constant(int(0), int(1), int(0)).unwrap();
        let scaled = BoundedInput::combine(&half, &u, &int(0), &zero).unwrap();
        let p = apply_operator(&k, &u, None, MethodChoice::Auto).unwrap().profile.unwrap();
        let q = apply_operator(&k, &scaled, None, MethodChoice::Auto).unwrap().profile.unwrap();
        for i in 0..40 {
            let x = rat(i, 3);
            prop_assert_eq!(q.eval(&x), &half * p.eval(&x));
        }
    }

    #[test]
    fn search_history_is_monotone(m in psd_matrix(3), eps in epsilon(), seed in any::<u64>()) {
        let k = TrapezoidKernel::new(m, eps);
        let cfg = SearchConfig { seed, restarts: 2, ..SearchConfig::new(rat(1, 2), 200) };
        let r = adversarial_search(&k, &cfg).unwrap();
        prop_assert!(r.history.windows(2).all(|w| w[0] <= w[1]));
        let upper = norms::kernel_opnorm_trap_bracket(&k).unwrap().upper.unwrap();
        prop_assert!(r.lower_bound.approx <= upper.approx * (1.0 + 1e-12));
    }

    #[test]
    fn trapezoid_keeps_exact_l1(m in psd_matrix(5), eps in epsilon()) {
        let k = TrapezoidKernel::new(m.clone(), eps);
        prop_assert_eq!(norms::kernel_l1_trap(&k), norms::matrix_l1(&m));
    }

    #[test]
    fn factored_matrices_are_psd(m in psd_matrix(6)) {
        let r = check_psd_matrix(&m, 1e-8);
        prop_assert!(r.pass);
        if let Some(min) = r.min_eigenvalue {
            prop_assert!(min >= -1e-8);
        }
    }

    #[test]
    fn gram_matrices_are_psd(m in psd_matrix(4), eps in epsilon(), pts in prop::collection::btree_set(0u32..4000, 2..25)) {
        let k = TrapezoidKernel::new(m.clone(), eps);
        let points: Vec<f64> = pts.iter().map(|&p| p as f64 * (2 * m.dim() + 2) as f64 / 4000.0).collect();
        prop_assert!(gram_check(&k, &points, 1e-8).unwrap().pass);
    }

    #[test]
    fn kernel_files_round_trip(m in psd_matrix(4), eps in epsilon()) {
        let k = TrapezoidKernel::new(m, eps);
        let file = KernelFile::trapezoid(&k);
        let text = file.to_toml().unwrap();
        let back = KernelFile::parse(&text).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(back.to_toml().unwrap(), text);
        let built = back.build().unwrap();
        prop_assert_eq!(built.matrix().unwrap().to_rows(), k.matrix().to_rows());
    }

    #[test]
    fn epsilon_range(p in -5i64..=20, q in 1i64..=20) {
        let ok = Epsilon::new(rat(p, q)).is_ok();
        prop_assert_eq!(ok, p > 0 && 2 * p < q);
    }
}

#[test]
fn counterexample_blocks_have_exact_l1() {
    for h in 1..=6u64 {
        let k = TrapezoidKernel::new(
            build_m_h(h).unwrap().matrix,
            Epsilon::new(rat(1, 3 * h as i64)).unwrap(),
        );
        assert_eq!(norms::kernel_l1_trap(&k), rat(1, h as i64), "block {h}");
    }
}

#[test]
fn counterexample_l1_is_additive_over_blocks() {
    let (kernel, _) = build_counterexample(BlockCount::Finite(2)).unwrap();
    let quad = norms::quadrature_l1(&kernel).unwrap();
    assert!((quad - 1.5).abs() <= 1e-3, "{quad}");
}

#[test]
fn first_block_search_lies_in_the_bracket() {
    let k = TrapezoidKernel::new(
        build_m_h(1).unwrap().matrix,
        Epsilon::new(rat(1, 3)).unwrap(),
    );
    let r = adversarial_search(&k, &SearchConfig::new(rat(1, 2), 10_000)).unwrap();
    let v = r.lower_bound.approx;
    assert!((0.8 - 1e-3..=0.8 + 4.0 / 3.0).contains(&v), "{v}");
}

#[test]
fn blocks_do_not_interact() {
    let (kernel, spec) = build_counterexample(BlockCount::Finite(3)).unwrap();
    for (a, b) in [(1u64, 2u64), (1, 3), (2, 3)] {
        let ta = rational::to_f64(&spec.record(a).unwrap().offset);
        let tb = rational::to_f64(&spec.record(b).unwrap().offset);
        for i in 0..20 {
            let x = ta + 0.5 + 0.37 * i as f64 % 3.0;
            let y = tb + 0.5 + 0.53 * i as f64 % 3.0;
            assert_eq!(kernel.eval_f64(x, y), 0.0);
            assert_eq!(kernel.eval_f64(y, x), 0.0);
        }
    }
}

#[test]
fn partial_sums_are_monotone() {
    let (_, spec) = build_counterexample(BlockCount::Finite(50)).unwrap();
    let ev = series_evidence(&spec, 50).unwrap();
    assert!(ev
        .rows
        .windows(2)
        .all(|w| w[0].l1_partial_sum < w[1].l1_partial_sum
            && w[0].opnorm_upper_bound < w[1].opnorm_upper_bound));
    let floor_holds = ev
        .rows
        .iter()
        .all(|r| rational::to_f64(&r.l1_partial_sum) >= ((r.h + 1) as f64).ln());
    assert!(floor_holds);
}
