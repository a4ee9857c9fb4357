//! Statistical routines against reference values computed with scipy.

use factweaver::stats::{pearson_test, shapiro_wilk, Distribution};

#[test]
fn shapiro_wilk_matches_reference() {
    let cases: [(&[f64], f64, f64); 5] = [
        (&[2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 2.8, 4.1, 3.9, 2.5], 0.9657345347117408, 0.8487287105597117),
        (
            &[1., 2., 3., 4., 5., 6., 7., 8., 9., 10., 11., 12., 13., 14., 15., 16., 17., 18., 19., 20.],
            0.9603751832429884,
            0.5513717457916771,
        ),
        (&[1., 1., 1., 1., 2., 2., 3., 10., 50., 200.], 0.49739557302764503, 3.3899017061393564e-06),
        (&[0.5, 1.5, 2.0], 0.9642857142857142, 0.6368868450289689),
        (&[4.2, 4.8, 5.1, 5.3, 5.9, 6.2, 6.4, 7.0, 7.7, 9.8, 12.5], 0.863448463907591, 0.06381865649865437),
    ];
    for (x, w, p) in cases {
        let t = shapiro_wilk(x).unwrap();
        assert!((t.statistic - w).abs() < 1e-6, "W {} vs {w}", t.statistic);
        assert!((t.p_value - p).abs() < 1e-4 * p.max(1e-3), "p {} vs {p}", t.p_value);
    }
}

#[test]
fn student_t_and_chi_square_cdfs() {
    for (df, x, want) in [
        (3.0, 1.5, 0.8847080673775886),
        (10.0, -2.2, 0.02622053422467655),
        (30.0, 0.7, 0.7553397782501642),
        (1.0, 4.0, 0.9220208696226307),
    ] {
        let got = Distribution::<f64>::StudentT { df }.cdf(x).unwrap();
        assert!((got - want).abs() < 1e-12, "t({df}) at {x}: {got} vs {want}");
    }
    for (df, x, want) in [
        (1.0, 0.5, 0.5204998778130466),
        (2.0, 3.0, 0.7768698398515702),
        (5.0, 7.7, 0.8264373297718272),
        (9.0, 2.1, 0.010214371991515718),
    ] {
        let got = Distribution::<f64>::ChiSquare { df }.cdf(x).unwrap();
        assert!((got - want).abs() < 1e-12, "chi2({df}) at {x}: {got} vs {want}");
    }
}

#[test]
fn pearson_matches_reference() {
    let (r, t) = pearson_test::<f64>(&[1., 2., 3., 4., 5., 6.], &[2., 1., 4., 3., 7., 5.]).unwrap();
    assert!((r - 0.7917946548886297).abs() < 1e-12);
    assert!((t.p_value - 0.06051140336275659).abs() < 1e-10);
}
