use langsim::stats::{
    fractional_ranks, paired_z_test, pearson, spearman, spearman_permutation_p,
    student_t_two_tailed_p, PairedSample,
};
use langsim::Error;

fn sample(x: &[f64], y: &[f64]) -> PairedSample {
    PairedSample::from_xy(x, y).unwrap()
}

/// Textbook Pearson: covariance over the product of deviations, two passes.
fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Rank by counting: 1 + #smaller + (#equal - 1) / 2. Quadratic, no sorting.
fn rank_oracle(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|v| {
            let less = x.iter().filter(|w| *w < v).count() as f64;
            let equal = x.iter().filter(|w| *w == v).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

/// Two-tailed t tail via composite Simpson on the density over [0, |t|].
fn t_tail_quadrature(t: f64, df: u32) -> f64 {
    let nu = df as f64;
    let gamma_half = |twice: u32| {
        let (mut x, mut g) = if twice % 2 == 1 {
            (0.5, std::f64::consts::PI.sqrt())
        } else {
            (1.0, 1.0)
        };
        while 2.0 * x < twice as f64 {
            g *= x;
            x += 1.0;
        }
        g
    };
    let c = gamma_half(df + 1) / gamma_half(df) / (nu * std::f64::consts::PI).sqrt();
    let f = |s: f64| c * (1.0 + s * s / nu).powf(-(nu + 1.0) / 2.0);
    let steps = 20_000;
    let h = t.abs() / steps as f64;
    let mut acc = f(0.0) + f(t.abs());
    for k in 1..steps {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    1.0 - 2.0 * acc * h / 3.0
}

#[test]
fn pearson_hand_examples() {
    assert_eq!(
        pearson(&sample(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]))
            .unwrap()
            .rho,
        1.0
    );
    let r = pearson(&sample(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0])).unwrap();
    assert!((r.rho - 0.6).abs() < 1e-15);
    assert_eq!(r.df, 2);
    assert_eq!(r.n, 4);
}

#[test]
fn perfect_correlation_has_zero_p() {
    let r = pearson(&sample(&[1.0, 2.0, 3.0, 4.0], &[-1.0, -2.0, -3.0, -4.0])).unwrap();
    assert_eq!((r.rho, r.p_value), (-1.0, 0.0));
}

#[test]
fn pearson_matches_two_pass_oracle() {
    let x = [0.109, 0.140, 0.167, 0.197, 0.155, 0.236, 0.202, 0.080, 0.3];
    let y = [0.93, 0.91, 0.85, 0.88, 0.80, 0.70, 0.76, 0.95, 0.61];
    let r = pearson(&sample(&x, &y)).unwrap();
    assert!((r.rho - pearson_oracle(&x, &y)).abs() < 1e-14);
}

#[test]
fn ranks() {
    assert_eq!(
        fractional_ranks(&[10.0, 20.0, 30.0]).unwrap(),
        [1.0, 2.0, 3.0]
    );
    assert_eq!(fractional_ranks(&[5.0, 5.0, 7.0]).unwrap(), [1.5, 1.5, 3.0]);
    assert_eq!(fractional_ranks(&[4.0; 4]).unwrap(), [2.5; 4]);
    let x = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0, 5.0];
    assert_eq!(fractional_ranks(&x).unwrap(), rank_oracle(&x));
    assert!(matches!(
        fractional_ranks(&[1.0, f64::NAN]),
        Err(Error::NonFiniteValue { .. })
    ));
}

#[test]
fn spearman_with_ties_matches_rank_then_pearson() {
    let x = [1.0, 2.0, 2.0, 3.0];
    let y = [1.0, 3.0, 2.0, 4.0];
    assert_eq!(rank_oracle(&x), [1.0, 2.5, 2.5, 4.0]);
    let want = pearson_oracle(&rank_oracle(&x), &rank_oracle(&y));
    let got = spearman(&sample(&x, &y)).unwrap().rho;
    assert!((got - want).abs() < 1e-15, "{got} vs {want}");
    // 4.5 / sqrt(4.5 * 5)
    assert!((got - 4.5 / 22.5f64.sqrt()).abs() < 1e-15);
}

#[test]
fn spearman_monotone_is_one() {
    let x: Vec<f64> = (1..=20).map(f64::from).collect();
    let y: Vec<f64> = x.iter().map(|v| v.ln() + v.powi(3)).collect();
    assert_eq!(spearman(&sample(&x, &y)).unwrap().rho, 1.0);
}

#[test]
fn degenerate_samples() {
    assert!(matches!(
        pearson(&sample(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0])),
        Err(Error::ZeroVariance { .. })
    ));
    assert!(matches!(
        spearman(&sample(&[1.0, 2.0, 3.0], &[7.0, 7.0, 7.0])),
        Err(Error::ZeroVariance { .. })
    ));
    assert!(matches!(
        pearson(&sample(&[1.0, 2.0], &[1.0, 2.0])),
        Err(Error::TooFewPoints { needed: 3, got: 2 })
    ));
}

#[test]
fn t_tail_examples() {
    for df in [1, 5, 54, 1000] {
        assert_eq!(student_t_two_tailed_p(0.0, df).unwrap(), 1.0);
    }
    let p = student_t_two_tailed_p(2.0, 10).unwrap();
    let oracle = t_tail_quadrature(2.0, 10);
    assert!((p - oracle).abs() < 1e-9, "{p} vs {oracle}");
    assert!((p - 0.0734).abs() < 5e-5);

    let tiny = student_t_two_tailed_p(50.0, 54).unwrap();
    assert!((0.0..1e-12).contains(&tiny));
    assert_eq!(langsim::stats::format3(tiny), "0.000");
    assert!(matches!(
        student_t_two_tailed_p(1.0, 0),
        Err(Error::InvalidDegreesOfFreedom { df: 0 })
    ));
}

#[test]
fn t_tail_closed_forms() {
    // df = 1 is Cauchy, df = 2 has an algebraic CDF.
    for k in 0..=200 {
        let t = k as f64 * 0.25;
        let cauchy = 1.0 - 2.0 / std::f64::consts::PI * t.atan();
        let two = 1.0 - t / (2.0 + t * t).sqrt();
        assert!(
            (student_t_two_tailed_p(t, 1).unwrap() - cauchy).abs() < 1e-12,
            "t={t}"
        );
        assert!(
            (student_t_two_tailed_p(t, 2).unwrap() - two).abs() < 1e-12,
            "t={t}"
        );
    }
}

#[test]
fn t_tail_agrees_with_quadrature_to_1e8() {
    for df in [3, 7, 20, 42, 54, 62] {
        for t in [0.1, 0.5, 1.0, 1.96, 2.5, 3.3, 5.0] {
            let p = student_t_two_tailed_p(t, df as u64).unwrap();
            let q = t_tail_quadrature(t, df);
            assert!((p - q).abs() < 1e-8, "t={t} df={df}: {p} vs {q}");
        }
    }
}

/// Counts permutations of y whose |rho| is at least the observed one.
fn permutation_oracle(x: &[f64], y: &[f64]) -> f64 {
    fn permute(k: usize, y: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if k == y.len() {
            out.push(y.clone());
            return;
        }
        for i in k..y.len() {
            y.swap(k, i);
            permute(k + 1, y, out);
            y.swap(k, i);
        }
    }
    let rx = rank_oracle(x);
    let observed = pearson_oracle(&rx, &rank_oracle(y)).abs();
    let mut perms = Vec::new();
    permute(0, &mut y.to_vec(), &mut perms);
    let hits = perms
        .iter()
        .filter(|p| pearson_oracle(&rx, &rank_oracle(p)).abs() >= observed - 1e-12)
        .count();
    hits as f64 / perms.len() as f64
}

#[test]
fn exact_permutation_p() {
    let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let y = [2.0, 1.0, 4.0, 3.0, 6.0, 5.0];
    let got = spearman_permutation_p(&sample(&x, &y)).unwrap();
    assert!((got - permutation_oracle(&x, &y)).abs() < 1e-12);

    let y = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    assert!((spearman_permutation_p(&sample(&x, &y)).unwrap() - 2.0 / 720.0).abs() < 1e-15);

    let big: Vec<f64> = (0..11).map(f64::from).collect();
    assert!(spearman_permutation_p(&sample(&big, &big)).is_err());
}

#[test]
fn z_test_examples() {
    let r = paired_z_test(&[1.0, 2.0, 3.0, 4.0]).unwrap();
    assert!((r.z - 2.5 / ((5.0f64 / 3.0).sqrt() / 2.0)).abs() < 1e-12);
    // Upper normal tail at 3.873 is about 1.07e-4 (two-tailed).
    assert!((r.p_value - 1.075e-4).abs() < 2e-6, "{}", r.p_value);
    assert!((paired_z_test(&[-1.0, 1.0, -1.0, 1.0]).unwrap().p_value - 1.0).abs() < 1e-15);
    assert!(matches!(
        paired_z_test(&[0.2; 5]),
        Err(Error::ZeroVariance { .. })
    ));
}

#[test]
fn normal_tail_reference_points() {
    use langsim::stats::normal_two_tailed_p;
    assert!((normal_two_tailed_p(1.959963984540054) - 0.05).abs() < 1e-12);
    assert!((normal_two_tailed_p(-2.5758293035489) - 0.01).abs() < 1e-12);
    assert_eq!(normal_two_tailed_p(0.0), 1.0);
}
