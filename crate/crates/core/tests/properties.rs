
use mcca::{fit_data, isc_signals, sym_eig, FitOptions, Mat, Method, MultiSetData};
use proptest::prelude::*;

fn symmetric(max: usize) -> impl Strategy<Value = Mat> {
    (1..=max).prop_flat_map(|n| {
        prop::collection::vec(-10.0f64..10.0, n * n).prop_map(move |v| {
            Mat::from_fn(n, n, |i, j| 0.5 * (v[i * n + j] + v[j * n + i])).unwrap()
        })
    })
}

fn multiset() -> impl Strategy<Value = MultiSetData> {
    (prop::collection::vec(1usize..=3, 2..=4), 0usize..8).prop_flat_map(|(dims, extra)| {
        let d_total: usize = dims.iter().sum();
        let t = d_total + 3 + extra;
        prop::collection::vec(-5.0f64..5.0, t * d_total).prop_map(move |v| {
            let x = Mat::new(t, d_total, v).unwrap();
            MultiSetData::from_concatenated(&x, &dims).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sym_eig_is_orthonormal_and_reconstructs(a in symmetric(20)) {
        let e = sym_eig(&a).unwrap();
        let n = a.rows();
        let qtq = e.vectors.t_matmul(&e.vectors).unwrap();
        prop_assert!(qtq.sub(&Mat::identity(n)).unwrap().max_abs() <= 1e-10);
        let back = e.vectors
            .matmul(&Mat::from_diag(&e.values).unwrap()).unwrap()
            .matmul(&e.vectors.transpose()).unwrap();
        prop_assert!(back.sub(&a).unwrap().max_abs() <= 1e-8 * a.max_abs().max(1.0));
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        for j in 0..n {
            let col = e.vectors.column(j);
            let big = col.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let first = col.iter().position(|x| x.abs() == big).unwrap();
            prop_assert!(col[first] > 0.0);
        }
    }

    #[test]
    fn isc_is_bounded(signals in (2usize..6, 2usize..30).prop_flat_map(|(n, t)| {
        prop::collection::vec(prop::collection::vec(-100.0f64..100.0, t), n)
    })) {
        if let Ok(b) = isc_signals(&signals) {
            prop_assert!(b.r_w >= 0.0);
            prop_assert!(b.rho.abs() <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn fitted_rho_is_bounded(data in multiset()) {
        let n = data.n_sets() as f64;
        for method in [Method::TwoStep, Method::OneStep] {
            let Ok(model) = fit_data(&data, &FitOptions { method, ..Default::default() }) else {
                continue;
            };
            for &rho in model.rho_analytic() {
                prop_assert!(rho <= 1.0 + 1e-8);
                prop_assert!(rho >= -1.0 / (n - 1.0) - 1e-8);
            }
        }
    }
}
