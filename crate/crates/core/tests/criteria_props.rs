use proptest::prelude::*;
use qnls::criteria::{
    check_c1, check_c2, classify_si_sii, critical_exponent, extract_h_constants,
    proposition31_verdict, theorem2_case, Membership, Prop31Outcome, QExponent,
};
use qnls::{Nonlinearity, Potential, Sign};

fn power(alpha: f64) -> Nonlinearity {
    Nonlinearity::power(1.0, alpha).unwrap()
}

proptest! {
    #[test]
    fn c1_threshold_is_dimension_over_critical_exponent(alpha in 0.05f64..3.0, dim in 3usize..12) {
        let h = extract_h_constants(&power(alpha));
        let c1 = check_c1(&h, &Potential::power_law(Sign::Plus, 1.0, 1.0), dim).unwrap();
        let qc = critical_exponent(alpha, dim).unwrap();
        let lhs = c1.threshold_m;
        let rhs = dim as f64 / qc;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs, "{lhs} vs {rhs}");
    }

    #[test]
    fn c1_holds_exactly_above_threshold(alpha in 0.05f64..1.5, m in 0.1f64..8.0, dim in 3usize..8) {
        let h = extract_h_constants(&power(alpha));
        let c1 = check_c1(&h, &Potential::power_law(Sign::Plus, 1.0, m), dim).unwrap();
        prop_assert_eq!(c1.holds, m >= c1.threshold_m);
    }

    #[test]
    fn membership_agrees_with_power_law_table(
        alpha in 0.05f64..1.0,
        m in 0.2f64..6.0,
        dim in 3usize..8,
        zero_h in any::<bool>(),
    ) {
        let n = dim as f64;
        // the table covers the blowup side only for h = 0 and 1/2 < alpha < (N-1)/N
        prop_assume!(zero_h || alpha < (n - 1.0) / n);
        let (h, b, a) = if zero_h {
            (Nonlinearity::zero(), 0.0, 0.5)
        } else {
            (power(alpha), 1.0, alpha)
        };
        let hc = extract_h_constants(&h);
        let v = Potential::power_law(Sign::Plus, 1.0, m);
        let verdict = proposition31_verdict(b, a, m, dim).unwrap();
        match classify_si_sii(&hc, &v, dim).unwrap() {
            Membership::SI => prop_assert_eq!(verdict.outcome, Prop31Outcome::Global),
            Membership::SII => {
                if zero_h || a > 0.5 {
                    prop_assert_eq!(verdict.outcome, Prop31Outcome::BlowupCapable);
                }
            }
            Membership::Borderline => {}
        }
    }

    #[test]
    fn no_global_case_without_c2(alpha in 0.05f64..2.0, q in 0.05f64..5.0, dim in 3usize..8) {
        let h = extract_h_constants(&power(alpha));
        if !check_c2(&h, q, dim).unwrap() {
            let norm = Some(0.1);
            prop_assert!(theorem2_case(&h, QExponent::Exact(q), dim, norm).unwrap().case.is_none());
        }
    }
}

#[test]
fn classification_table_grid() {
    // 50 (alpha, m, N) triples checked against closed forms
    let alphas = [0.25, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.9, 1.0, 1.5];
    let cases = [(3usize, 1.0), (3, 2.0), (4, 1.5), (5, 2.5), (6, 3.0)];
    let mut count = 0;
    for &alpha in &alphas {
        for &(dim, m) in &cases {
            let n = dim as f64;
            let ts = 2.0 * n / (n - 2.0);
            let qc = critical_exponent(alpha, dim).unwrap();
            let expect_qc = ts / ((2.0 * alpha).max(1.0) * ts - 2.0);
            assert!((qc - expect_qc).abs() <= 1e-12 * expect_qc);
            let h = extract_h_constants(&power(alpha));
            let thr = check_c1(&h, &Potential::power_law(Sign::Plus, 1.0, m), dim)
                .unwrap()
                .threshold_m;
            assert!((thr - n / qc).abs() <= 1e-12 * thr);
            let p = proposition31_verdict(1.0, alpha, m, dim).unwrap();
            if alpha > 0.5 && alpha < (n - 1.0) / n {
                let t = n * (2.0 * alpha * ts - 2.0) / ts;
                assert!((p.threshold_m.unwrap() - t).abs() <= 1e-12 * t);
            }
            count += 1;
        }
    }
    assert_eq!(count, 50);
    assert_eq!(critical_exponent(0.5, 3).unwrap(), 1.5);
}
