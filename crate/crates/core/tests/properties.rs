use l1path::asm::{asm_solve_with, find_direction, kkt_check, AsmOptions, AsmState, AsmTrace, StandardLp};
use l1path::dual::{dual_update_with, DualContext, DualOptions};
use l1path::homotopy::{eval_path, Snapshot};
use l1path::instances::{random_ground_truth, random_instance, to_linf_form, CertificateRegime, GeneralizedBounds};
use l1path::linalg::{dot, norm1, norm_inf, sign, DenseMatrix};
use l1path::oracle::{self, simplex_solve, GeneralLp};
use l1path::primal::{primal_update_with, PrimalContext, PrimalOptions};
use l1path::{check_optimal_pair, solve_path, solve_path_with, HomotopyOptions, ProblemInstance};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Bounded feasible LP around a random interior-ish point, plus that point.
fn random_lp(seed: u64, n: usize, m_eq: usize, k: usize) -> (StandardLp, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma: Vec<f64> = (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
    let x0: Vec<f64> = sigma
        .iter()
        .map(|s| if rng.gen::<f64>() < 0.3 { 0.0 } else { s * rng.gen_range(0.1..2.0) })
        .collect();
    let a = DenseMatrix::from_fn(m_eq, n, |_, _| rng.gen_range(-1.0..1.0));
    let b = a.mul_vec(&x0);
    let mut rows: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut e: Vec<f64> = rows
        .iter()
        .map(|r| {
            let slack = if rng.gen::<f64>() < 0.4 { 0.0 } else { rng.gen_range(0.0..1.0) };
            dot(r, &x0) - slack
        })
        .collect();
    // −Σ σⱼxⱼ ≥ −U keeps the feasible region bounded
    let total: f64 = x0.iter().zip(&sigma).map(|(x, s)| x * s).sum();
    rows.push(sigma.iter().map(|s| -s).collect());
    e.push(-(total + 1.0));
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let d = DenseMatrix::from_rows(&rows).unwrap();
    (StandardLp::new(c, a, b, d, e, sigma).unwrap(), x0)
}

fn to_general(lp: &StandardLp) -> GeneralLp {
    let n = lp.num_vars();
    let mut g = GeneralLp::free(lp.c.clone());
    for i in 0..lp.num_eq() {
        g.push_eq(lp.a_eq.row(i), lp.b_eq[i]);
    }
    for i in 0..lp.num_ineq() {
        let neg: Vec<f64> = lp.d.row(i).iter().map(|v| -v).collect();
        g.push_le(&neg, -lp.e[i]);
    }
    for j in 0..n {
        let mut r = vec![0.0; n];
        r[j] = -lp.sigma[j];
        g.push_le(&r, 0.0);
    }
    g
}

fn snapshots<'a>(inst: &'a ProblemInstance) -> (Vec<DualContext<'a>>, Vec<PrimalContext<'a>>) {
    let mut duals = Vec::new();
    let mut primals = Vec::new();
    let mut hook = |s: Snapshot<'_, 'a>| match s {
        Snapshot::Dual(c) => duals.push(c.clone()),
        Snapshot::Primal(c) => primals.push(c.clone()),
    };
    let path = solve_path_with(
        inst,
        HomotopyOptions {
            snapshot: Some(&mut hook),
            ..Default::default()
        },
    );
    assert!(path.is_complete());
    (duals, primals)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn asm_matches_simplex_and_keeps_invariants(seed in any::<u64>(), n in 2usize..9, m_eq in 0usize..3, k in 0usize..6) {
        let m_eq = m_eq.min(n - 1);
        let (lp, x0) = random_lp(seed, n, m_eq, k);
        let mut prev: Option<(AsmState, f64)> = None;
        let mut failures: Vec<String> = Vec::new();
        let mut obs = |t: &AsmTrace, s: &AsmState| {
            if let Err(e) = s.check_invariants(&lp, 1e-8) {
                failures.push(format!("invariants: {e}"));
            }
            if let Some((p, obj)) = &prev {
                if t.objective > obj + 1e-9 * (1.0 + obj.abs()) {
                    failures.push(format!("objective rose {obj} -> {}", t.objective));
                }
                if t.alpha.is_none() {
                    if let Ok(rep) = find_direction(&lp, s) {
                        if let Some(xi) = rep.solution {
                            for i in p.active.difference(&s.active).iter() {
                                if dot(lp.d.row(i), &xi) <= 0.0 {
                                    failures.push(format!("removed row {i} not left"));
                                }
                            }
                            for j in s.support.difference(&p.support).iter() {
                                if lp.sigma[j] * xi[j] <= 0.0 {
                                    failures.push(format!("added variable {j} not entering"));
                                }
                            }
                        }
                    }
                }
            }
            prev = Some((s.clone(), t.objective));
        };
        let sol = asm_solve_with(&lp, x0, None, AsmOptions { max_iters: None, observer: Some(&mut obs) }).unwrap();
        prop_assert!(failures.is_empty(), "{:?}", failures);
        let mu = sol.multipliers.full_mu(&sol.state, lp.num_ineq());
        let nu = sol.multipliers.full_nu(&sol.state, lp.num_vars());
        prop_assert!(kkt_check(&lp, &sol.x, &sol.multipliers.lambda, &mu, &nu, 1e-7).unwrap());
        let reference = simplex_solve(&to_general(&lp)).unwrap();
        let obj = lp.objective(&sol.x);
        prop_assert!((obj - reference.value).abs() <= 1e-7 * (1.0 + reference.value.abs()),
            "asm {obj} simplex {}", reference.value);
    }

    #[test]
    fn simplex_strong_duality(seed in any::<u64>(), m in 2usize..8) {
        let inst = random_instance(m, 2 * m, seed).unwrap();
        let lp = oracle::reformulate(&inst);
        let sol = simplex_solve(&lp).unwrap();
        let dual_value = dot(&sol.dual[..lp.eq_rhs.len()], &lp.eq_rhs)
            + dot(&sol.dual[lp.eq_rhs.len()..], &lp.ineq_rhs);
        prop_assert!((sol.value - dual_value).abs() <= 1e-9 * (1.0 + sol.value.abs()));
    }

    #[test]
    fn dual_update_invariants(seed in any::<u64>(), m in 3usize..10) {
        let inst = random_instance(m, 2 * m, seed).unwrap();
        let (duals, _) = snapshots(&inst);
        for ctx in &duals {
            let mut iterates: Vec<Vec<f64>> = Vec::new();
            let mut obs = |psi: &[f64]| iterates.push(psi.to_vec());
            let res = dual_update_with(ctx, DualOptions { max_iters: None, observer: Some(&mut obs) }).unwrap();
            let mut last = f64::INFINITY;
            for psi in &iterates {
                prop_assert!(ctx.violation(psi) <= 1e-8);
                let obj = ctx.objective(psi);
                prop_assert!(obj <= last + 1e-10 * (1.0 + obj.abs()));
                last = obj;
            }
            let y = &res.y;
            prop_assert!(norm_inf(&inst.a.tr_mul_vec(y)) <= 1.0 + 1e-8);
            let g = inst.a.tr_mul_vec(y);
            for (q, j) in ctx.sets.j_p.iter().enumerate() {
                prop_assert!((-g[j] - ctx.sets.primal_signs[q]).abs() <= 1e-8);
            }
            for i in 0..m {
                match ctx.sets.i_p.position(i) {
                    Some(q) => prop_assert!(y[i] * ctx.sets.residual_signs[q] >= -1e-8),
                    None => prop_assert_eq!(y[i], 0.0),
                }
            }
            let reference = simplex_solve(&oracle::dual_update_lp(&inst, &ctx.sets)).unwrap();
            prop_assert!((ctx.objective(y) - reference.value).abs() <= 1e-7 * (1.0 + reference.value.abs()));
        }
    }

    #[test]
    fn primal_update_invariants(seed in any::<u64>(), m in 3usize..10) {
        let inst = random_instance(m, 2 * m, seed).unwrap();
        let (_, primals) = snapshots(&inst);
        for ctx in &primals {
            let mut iterates: Vec<(Vec<f64>, f64)> = Vec::new();
            let mut obs = |x: &[f64], t: f64| iterates.push((x.to_vec(), t));
            let res = primal_update_with(ctx, PrimalOptions { max_iters: None, observer: Some(&mut obs) }).unwrap();
            let mut last_t = 0.0;
            for (x, t) in &iterates {
                prop_assert!(ctx.violation(x, *t) <= 1e-8);
                prop_assert!(*t >= last_t - 1e-12);
                last_t = *t;
            }
            let r = norm_inf(&inst.residual(&res.x));
            if res.reached_target {
                prop_assert!(r <= inst.delta + 1e-8);
            } else {
                prop_assert!((r - (ctx.delta_k - res.t)).abs() <= 1e-8);
            }
            let lp = oracle::primal_update_lp(&inst, &ctx.y_next, &ctx.sets, ctx.delta_k, ctx.delta_target);
            let reference = simplex_solve(&lp).unwrap();
            prop_assert!((res.t + reference.value).abs() <= 1e-8 * (1.0 + res.t.abs()), "t {} oracle {}", res.t, -reference.value);
        }
    }

    #[test]
    fn path_properties(seed in any::<u64>(), m in 2usize..14) {
        let inst = random_instance(m, 2 * m, seed).unwrap();
        let path = solve_path(&inst);
        prop_assert!(path.is_complete());
        prop_assert!(path.iterations() <= 20 * (3 * m));
        for (k, bp) in path.breakpoints.iter().enumerate() {
            prop_assert!(check_optimal_pair(&inst, &bp.x, &bp.y, bp.delta_k, 1e-8));
            prop_assert!(inst.duality_gap(&bp.x, &bp.y, bp.delta_k).abs() <= 1e-8 * (1.0 + norm1(&bp.x)));
            prop_assert!(bp.sets.containments_hold());
            if k > 0 {
                prop_assert!(bp.t_step > 1e-12);
                prop_assert!(bp.delta_k < path.breakpoints[k - 1].delta_k);
            }
        }
        for w in path.breakpoints.windows(2) {
            for s in 1..=3 {
                let d = w[0].delta_k + (w[1].delta_k - w[0].delta_k) * s as f64 / 4.0;
                let (x, y) = eval_path(&path, d).unwrap();
                prop_assert!(check_optimal_pair(&inst, &x, &y, d, 1e-8));
            }
        }
        let reference = oracle::solve_instance(&inst).unwrap();
        let obj = path.final_objective();
        prop_assert!((obj - reference.objective).abs() <= 1e-7 * reference.objective.abs().max(1.0));
    }

    #[test]
    fn ground_truth_objective(seed in any::<u64>(), m in 6usize..16, dense in any::<bool>(), delta in 0.01f64..1.0) {
        let regime = if dense { CertificateRegime::Dense } else { CertificateRegime::Sparse };
        let gt = random_ground_truth(m, 2 * m, m / 4, 1.0, delta, regime, seed).unwrap();
        prop_assert!(check_optimal_pair(&gt.inst, &gt.x_bar, &gt.y_bar, delta, 1e-8));
        let path = solve_path(&gt.inst);
        prop_assert!(path.is_complete());
        let want = norm1(&gt.x_bar);
        prop_assert!((path.final_objective() - want).abs() <= 1e-7 * want.max(1.0));
    }

    #[test]
    fn linf_form_round_trip(seed in any::<u64>(), m in 1usize..6, n in 1usize..6, delta_hat in 0.1f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DenseMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
        let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let alpha: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..0.0)).collect();
        let beta: Vec<f64> = alpha.iter().map(|a| a + rng.gen_range(0.1..3.0)).collect();
        let gb = GeneralizedBounds::new(a, b, alpha, beta).unwrap();
        let (ga, gbt) = to_linf_form(&gb, delta_hat).unwrap();
        let mut inside = 0;
        for _ in 0..50 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let r: Vec<f64> = ga.mul_vec(&x).iter().zip(&gbt).map(|(u, v)| u - v).collect();
            let before = gb.contains(&x);
            inside += before as usize;
            prop_assert_eq!(before, norm_inf(&r) <= delta_hat);
        }
        let _ = inside;
    }
}

#[test]
fn sign_convention() {
    assert_eq!(sign(0.0), 0.0);
    assert_eq!(sign(-2.0), -1.0);
}
