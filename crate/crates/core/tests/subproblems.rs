mod common;

use common::rand_matrix;
use nearmetz_core::generate::UnitStream;
use nearmetz_core::subproblems::{
    dh_objective, is_feasible, jr_step, make_feasible, q_step_admm, q_step_closed_form,
};
use nearmetz_core::{ConeMode, DenseMatrix, SubproblemSettings};
use proptest::prelude::*;

fn positive_q(n: usize, seed: u64) -> Vec<f64> {
    let mut st = UnitStream::new(seed);
    (0..n).map(|_| st.uniform(0.2, 2.0)).collect()
}

fn tight() -> SubproblemSettings {
    SubproblemSettings { tol: 1e-10, max_iter: 50_000, ..SubproblemSettings::default() }
}

/// Scalar minimization of `‖a − q·b‖²` over a grid on `[eps_q, hi]`,
/// refined around the best point.
fn grid_column(a: &[f64], b: &[f64], eps_q: f64) -> f64 {
    let f = |q: f64| a.iter().zip(b).map(|(x, y)| (x - q * y).powi(2)).sum::<f64>();
    let (mut lo, mut hi) = (eps_q, eps_q + 20.0);
    let mut best = lo;
    for _ in 0..40 {
        let step = (hi - lo) / 100.0;
        best = (0..=100)
            .map(|k| lo + step * k as f64)
            .min_by(|x, y| f(*x).total_cmp(&f(*y)))
            .unwrap();
        lo = (best - step).max(eps_q);
        hi = best + step;
    }
    best
}

fn feasible_2x2(w: &[f64; 4], delta: f64) -> bool {
    let (a, b, c, d) = (w[0] + delta, w[1], w[2], w[3] + delta);
    let s = 0.5 * (b + c);
    b >= 0.0 && c >= 0.0 && a <= 0.0 && d <= 0.0 && a * d >= s * s
}

/// Coarse-to-fine grid search over the four entries of `W` for the PSD
/// `(J, R)` step at n = 2.
fn grid_jr_2x2(a: &DenseMatrix, q: &[f64], delta: f64) -> f64 {
    let obj = |w: &[f64; 4]| {
        let x = [w[0] * q[0], w[1] * q[1], w[2] * q[0], w[3] * q[1]];
        (0..4).map(|k| (a.as_slice()[k] - x[k]).powi(2)).sum::<f64>()
    };
    let mut center = [-1.0, 0.0, 0.0, -1.0];
    let mut radius = 6.0;
    let mut best = f64::INFINITY;
    const K: i32 = 12;
    for _ in 0..60 {
        let step = radius / K as f64;
        let mut next = center;
        for i in -K..=K {
            for j in -K..=K {
                for k in -K..=K {
                    for l in -K..=K {
                        let w = [
                            center[0] + step * i as f64,
                            center[1] + step * j as f64,
                            center[2] + step * k as f64,
                            center[3] + step * l as f64,
                        ];
                        if feasible_2x2(&w, delta) {
                            let v = obj(&w);
                            if v < best {
                                best = v;
                                next = w;
                            }
                        }
                    }
                }
            }
        }
        center = next;
        radius *= 0.7;
    }
    best
}

#[test]
fn closed_form_matches_grid_oracle() {
    for seed in 0..30 {
        let n = 2 + seed as usize % 4;
        let a = rand_matrix(n, n, seed);
        let b = rand_matrix(n, n, seed + 1000);
        let eps_q = if seed % 2 == 0 { 0.0 } else { 0.05 };
        let q = q_step_closed_form(&a, &b, eps_q).unwrap();
        for j in 0..n {
            let aj: Vec<f64> = (0..n).map(|i| a[(i, j)]).collect();
            let bj: Vec<f64> = (0..n).map(|i| b[(i, j)]).collect();
            let g = grid_column(&aj, &bj, eps_q);
            let f = |t: f64| aj.iter().zip(&bj).map(|(x, y)| (x - t * y).powi(2)).sum::<f64>();
            // the grid argmin is only accurate to about √ε near a flat minimum
            assert!((q[j] - g).abs() <= 1e-6, "seed {seed} col {j}: {} vs {g}", q[j]);
            assert!(f(q[j]) <= f(g) + 1e-14);
        }
    }
}

#[test]
fn psd_step_matches_grid_oracle_at_n2() {
    let settings = tight();
    for seed in 0..6 {
        let a = rand_matrix(2, 2, 40 + seed).scale(2.0);
        let q = positive_q(2, 70 + seed);
        let (w0, _) = make_feasible(&a, ConeMode::Psd, settings.delta).unwrap();
        let out = jr_step(ConeMode::Psd, &a, &q, &w0, &settings, None).unwrap();
        assert!(is_feasible(&out.w, ConeMode::Psd, None, 1e-12).unwrap());
        let got = dh_objective(&a, &out.w, &q);
        let oracle = grid_jr_2x2(&a, &q, settings.delta);
        assert!(got <= oracle + 1e-5, "seed {seed}: {got} vs grid {oracle}");
        assert!(got >= oracle - 1e-5, "seed {seed}: {got} below grid {oracle}");
    }
}

#[test]
fn cone_ordering_dd_sdd_psd() {
    let settings = tight();
    for seed in 0..12 {
        let n = 2 + seed as usize % 4;
        let a = rand_matrix(n, n, 300 + seed).scale(2.0);
        let q = positive_q(n, 400 + seed);
        let mut obj = Vec::new();
        for mode in [ConeMode::Dd, ConeMode::Sdd, ConeMode::Psd] {
            let (w0, _) = make_feasible(&a, mode, settings.delta).unwrap();
            let out = jr_step(mode, &a, &q, &w0, &settings, None).unwrap();
            assert!(is_feasible(&out.w, mode, out.certificate.as_ref(), 1e-9).unwrap(), "{mode:?}");
            obj.push(dh_objective(&a, &out.w, &q));
        }
        let (dd, sdd, psd) = (obj[0], obj[1], obj[2]);
        assert!(dd >= sdd - 1e-6, "seed {seed}: dd {dd} < sdd {sdd}");
        assert!(sdd >= psd - 1e-6, "seed {seed}: sdd {sdd} < psd {psd}");
        if n == 2 {
            assert!((sdd - psd).abs() <= 1e-5, "seed {seed}: sdd {sdd} psd {psd}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn q_step_admm_matches_closed_form(n in 1usize..=8, seed in any::<u64>(), floor in prop_oneof![Just(0.0), 0.0f64..0.5]) {
        let a = rand_matrix(n, n, seed);
        let b = rand_matrix(n, n, seed.wrapping_add(1));
        let settings = SubproblemSettings { eps_q: floor, ..SubproblemSettings::default() };
        let admm = q_step_admm(&a, &b, &settings, None).unwrap();
        let exact = q_step_closed_form(&a, &b, floor).unwrap();
        for (x, y) in admm.q.iter().zip(&exact) {
            prop_assert!((x - y).abs() <= 1e-6);
            prop_assert!(*x >= floor);
        }
    }

    #[test]
    fn jr_steps_return_feasible_points(n in 2usize..=6, seed in any::<u64>(), mode in prop_oneof![Just(ConeMode::Psd), Just(ConeMode::Dd), Just(ConeMode::Sdd)]) {
        let a = rand_matrix(n, n, seed).scale(3.0);
        let q = positive_q(n, seed ^ 1);
        let settings = SubproblemSettings { max_iter: 300, ..SubproblemSettings::default() };
        let (w0, _) = make_feasible(&a, mode, settings.delta).unwrap();
        let out = jr_step(mode, &a, &q, &w0, &settings, None).unwrap();
        prop_assert!(is_feasible(&out.w, mode, out.certificate.as_ref(), 1e-9).unwrap());
    }
}
