//! Acceptance criteria. Each test prints one PASS/FAIL line to stderr
//! (outside the test harness capture) and then asserts.

use std::io::Write;

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use rankdep::combined::{self, pvalue_max3, Flavor, Method};
use rankdep::montecarlo::experiment::{
    correlation, null_scatter, run_power, run_size, ExperimentConfig, ScatterPair, TestSpec,
};
use rankdep::montecarlo::{ScenarioId, ScenarioSpec};
use rankdep::mvstat::{self, BorelPair, BorelStat, MvKind, MvMode, MvOptions, SignCoding};
use rankdep::ranks::{concomitant_profile, multivariate_ranks, MultiSample};
use rankdep::unistat::{self, exact, Rational};
use rankdep::{normal, PermutationPlan};

const SEED: u64 = 0x5eed_2024;

fn report(criterion: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "[acceptance] {verdict} {criterion}: {detail}"
    );
    assert!(pass, "{criterion}: {detail}");
}

fn r(num: i128, den: i128) -> Rational {
    Ratio::new(num, den)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=n).collect();
    // Heap's algorithm
    let mut c = vec![0; n];
    out.push(cur.clone());
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                cur.swap(0, i);
            } else {
                cur.swap(c[i], i);
            }
            out.push(cur.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

fn mean(v: &[Rational]) -> Rational {
    v.iter().copied().sum::<Rational>() / Rational::from_integer(v.len() as i128)
}

fn cov(a: &[Rational], b: &[Rational]) -> Rational {
    let (ma, mb) = (mean(a), mean(b));
    let prods: Vec<Rational> = a.iter().zip(b).map(|(&x, &y)| x * y).collect();
    mean(&prods) - ma * mb
}

#[test]
fn exact_enumeration_suite() {
    let start = std::time::Instant::now();
    let mut failures = Vec::new();
    for n in 3..=7usize {
        let perms = permutations(n);
        let xi: Vec<Rational> = perms.iter().map(|p| exact::xi(p)).collect();
        let s: Vec<Rational> = perms.iter().map(|p| exact::spearman(p)).collect();
        let tau: Vec<Rational> = perms.iter().map(|p| exact::kendall(p)).collect();
        let q: Vec<Rational> = perms.iter().map(|p| exact::quadrant(p)).collect();
        let nn = Rational::from_integer(n as i128);
        let zero = Rational::from_integer(0);
        let checks = [
            ("E[xi]", mean(&xi), zero),
            ("E[S]", mean(&s), zero),
            ("E[tau]", mean(&tau), zero),
            ("E[Q]", mean(&q), zero),
            ("V[sqrt(n) xi]", nn * cov(&xi, &xi), {
                let n = n as i128;
                r(n * (n - 2) * (4 * n - 7), 10 * (n + 1) * (n - 1) * (n - 1))
            }),
            ("V[sqrt(n) tau]", nn * cov(&tau, &tau), {
                let n = n as i128;
                r(2 * (2 * n + 5), 9 * (n - 1))
            }),
            ("V[sqrt(n) Q]", nn * cov(&q, &q), {
                let n = n as i128;
                if n % 2 == 1 {
                    r(n - 1, n)
                } else {
                    r(n, n - 1)
                }
            }),
            ("Cov(S, xi)", cov(&s, &xi), zero),
            ("Cov(tau, xi)", cov(&tau, &xi), zero),
            ("Cov(Q, xi)", cov(&q, &xi), zero),
        ];
        for (name, got, want) in checks {
            if got != want {
                failures.push(format!("n={n} {name}: {got} != {want}"));
            }
        }
        // the library's closed forms agree with the enumeration too
        let lib = [
            unistat::xi_null_variance(n)
                .unwrap()
                .variance_of_sqrt_n_stat,
            unistat::tau_null_variance(n)
                .unwrap()
                .variance_of_sqrt_n_stat,
            unistat::quadrant_null_variance(n)
                .unwrap()
                .variance_of_sqrt_n_stat,
        ];
        if lib != [nn * cov(&xi, &xi), nn * cov(&tau, &tau), nn * cov(&q, &q)] {
            failures.push(format!(
                "n={n}: library null variances disagree with enumeration"
            ));
        }
        if n == 3 {
            let abs_tau: Vec<Rational> = tau
                .iter()
                .map(|t| if *t < zero { -*t } else { *t })
                .collect();
            let c = cov(&abs_tau, &xi);
            if c != r(1, 18) {
                failures.push(format!("Cov(|tau|, xi) at n=3 = {c}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 60.0 {
        failures.push(format!("runtime {secs:.1}s"));
    }
    report(
        "exact enumeration n=3..7",
        failures.is_empty(),
        &if failures.is_empty() {
            format!("all moments exact, {secs:.2}s")
        } else {
            failures.join("; ")
        },
    );
}

#[test]
fn a4_table() {
    let table: [([usize; 3], Rational, Rational, Rational); 6] = [
        ([1, 2, 3], r(1, 4), r(1, 1), r(1, 1)),
        ([1, 3, 2], r(-1, 8), r(1, 3), r(1, 3)),
        ([2, 1, 3], r(-1, 8), r(1, 3), r(1, 3)),
        ([2, 3, 1], r(-1, 8), r(-1, 3), r(1, 3)),
        ([3, 1, 2], r(-1, 8), r(-1, 3), r(1, 3)),
        ([3, 2, 1], r(1, 4), r(-1, 1), r(1, 1)),
    ];
    let mut matched = 0;
    let mut bad = Vec::new();
    for (perm, xi, tau, abs_tau) in table {
        let got = (exact::xi(&perm), exact::kendall(&perm));
        let got_abs = if got.1 < r(0, 1) { -got.1 } else { got.1 };
        for (name, g, w) in [
            ("xi", got.0, xi),
            ("tau", got.1, tau),
            ("|tau|", got_abs, abs_tau),
        ] {
            if g == w {
                matched += 1;
            } else {
                bad.push(format!("{perm:?} {name}: {g} != {w}"));
            }
        }
        // floating-point path agrees with the exact one
        let p = rankdep::RankProfile::from_concomitant(perm.to_vec()).unwrap();
        let close = |a: f64, b: Rational| (a - unistat::to_f64(b)).abs() < 1e-15;
        if !close(unistat::xi(&p), xi) || !close(unistat::kendall(&p), tau) {
            bad.push(format!("{perm:?}: f64 statistics differ"));
        }
    }
    report(
        "A.4 table",
        matched == 18 && bad.is_empty(),
        &format!(
            "{matched}/18 entries match{}",
            if bad.is_empty() {
                String::new()
            } else {
                format!("; {}", bad.join("; "))
            }
        ),
    );
}

#[test]
fn pvalue_identity_and_monte_carlo() {
    let mut sup: f64 = 0.0;
    for k in 0..=8000 {
        let z = k as f64 * 1e-3;
        let phi = normal::cdf(z);
        let a = 1.0 + phi * phi - 2.0 * phi.powi(3);
        let b = 1.0 - phi * phi * (1.0 - 2.0 * normal::cdf(-z));
        sup = sup
            .max((a - b).abs())
            .max((pvalue_max3(z).unwrap() - a).abs());
    }

    let draws = 1_000_000usize;
    let zs = [0.5, 1.0, 2.0];
    let mut counts = [0usize; 3];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..draws {
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        let c: f64 = StandardNormal.sample(&mut rng);
        let m = a.abs().max(b).max(c);
        for (cnt, &z) in counts.iter_mut().zip(&zs) {
            *cnt += usize::from(m > z);
        }
    }
    let mut worst: f64 = 0.0;
    let mut detail = format!("sup identity gap {sup:.2e}");
    for (&cnt, &z) in counts.iter().zip(&zs) {
        let p = pvalue_max3(z).unwrap();
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        let zscore = (cnt as f64 / draws as f64 - p) / se;
        worst = worst.max(zscore.abs());
        detail.push_str(&format!(
            "; z={z}: MC {:.5} vs {p:.5} ({zscore:+.2} se)",
            cnt as f64 / draws as f64
        ));
    }
    report(
        "p-value identity and Monte-Carlo exceedance",
        sup < 1e-12 && worst < 3.0,
        &detail,
    );
}

#[test]
fn size_reproduction() {
    let start = std::time::Instant::now();
    let tests: Vec<TestSpec> = [
        Method::CombinedSpearman,
        Method::CombinedKendall,
        Method::CombinedQuadrant,
        Method::XiSym,
    ]
    .into_iter()
    .map(TestSpec::from)
    .collect();
    let targets = [0.047, 0.050, 0.049, 0.048];
    let report_ = run_size(&tests, 100, &ExperimentConfig::new(50_000, SEED)).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (rate, target) in report_.rates.iter().zip(targets) {
        let ok = (rate.rate - target).abs() <= 0.005;
        pass &= ok;
        parts.push(format!("{} {:.4} (target {target})", rate.test, rate.rate));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs <= 900.0;
    report(
        "size n=100, 50k reps",
        pass,
        &format!("{}; {secs:.1}s", parts.join(", ")),
    );
}

#[test]
fn power_spot_checks() {
    let cases = [
        (ScenarioId::U1, 40, Method::CombinedKendall, 0.876, 0.03),
        (ScenarioId::U4, 60, Method::XiSym, 0.931, 0.03),
        (ScenarioId::U3, 20, Method::CombinedKendall, 0.508, 0.03),
        (ScenarioId::U2, 100, Method::CombinedQuadrant, 0.991, 0.01),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (id, n, method, target, tol)) in cases.into_iter().enumerate() {
        let cfg = ExperimentConfig::new(5000, SEED + i as u64);
        let rep = run_power(&[method.into()], &ScenarioSpec::new(id, n).unwrap(), &cfg).unwrap();
        let rate = rep.rates[0].rate;
        let ok = (rate - target).abs() <= tol;
        pass &= ok;
        parts.push(format!(
            "{id} n={n} {method} {rate:.3} (target {target} +/- {tol})"
        ));
    }
    report("power spot-checks, 5000 reps", pass, &parts.join(", "));
}

/// Kolmogorov-Smirnov distance between a sample and `N(0, var)`.
fn ks_normal(values: &mut [f64], var: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() as f64;
    let sd = var.sqrt();
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = normal::cdf(v / sd);
            (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
        })
        .fold(0.0, f64::max)
}

fn sqrt_n_columns(pair: ScatterPair, n: usize) -> (Vec<f64>, Vec<f64>) {
    let sc = null_scatter(pair, n, 10_000, SEED).unwrap();
    let s = (n as f64).sqrt();
    sc.rows.iter().map(|&(a, b)| (s * a, s * b)).unzip()
}

#[test]
fn asymptotic_null_shape_xi_and_tau() {
    let (mut tau, mut xi) = sqrt_n_columns(ScatterPair::KendallXi, 500);
    let d_xi = ks_normal(&mut xi, 0.4);
    let d_tau = ks_normal(&mut tau, 4.0 / 9.0);
    report(
        "null shape n=500: sqrt(n) xi and sqrt(n) tau",
        d_xi < 0.02 && d_tau < 0.02,
        &format!("KS xi {d_xi:.4}, KS tau {d_tau:.4} (bound 0.02)"),
    );
}

// sqrt(n) Q lives on a lattice of spacing 4/sqrt(n), about 0.179 at n = 500,
// so its ECDF jumps by roughly 0.07 near zero and no sample can get within
// 0.02 of a continuous cdf. Kept as specified; expected to fail.
#[test]
fn asymptotic_null_shape_quadrant() {
    let (mut q, _) = sqrt_n_columns(ScatterPair::QuadrantXi, 500);
    let d_q = ks_normal(&mut q, 1.0);
    report(
        "null shape n=500: sqrt(n) Q",
        d_q < 0.02,
        &format!("KS Q {d_q:.4} (bound 0.02; lattice spacing 4/sqrt(500) forces about 0.036)"),
    );
}

#[test]
fn independence_of_components() {
    let (tau, xi) = sqrt_n_columns(ScatterPair::KendallXi, 500);
    let (q, xi2) = sqrt_n_columns(ScatterPair::QuadrantXi, 500);
    let c1 = correlation(&tau.into_iter().zip(xi).collect::<Vec<_>>());
    let c2 = correlation(&q.into_iter().zip(xi2).collect::<Vec<_>>());
    report(
        "component independence n=500",
        c1.abs() < 0.05 && c2.abs() < 0.05,
        &format!("corr(tau, xi) {c1:+.4}, corr(Q, xi) {c2:+.4}"),
    );
}

fn grothe(kind: MvKind) -> TestSpec {
    TestSpec::Multivariate {
        kind,
        mode: MvMode::GrothePermutation,
    }
}

fn grothe_config(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(1000, seed);
    cfg.permutations = 500;
    cfg
}

fn grothe_power(
    id: ScenarioId,
    n: usize,
    kind: MvKind,
    target: f64,
    tol: f64,
    seed: u64,
) -> (bool, String) {
    let rep = run_power(
        &[grothe(kind)],
        &ScenarioSpec::new(id, n).unwrap(),
        &grothe_config(seed),
    )
    .unwrap();
    let rate = rep.rates[0].rate;
    (
        (rate - target).abs() <= tol,
        format!("{id} n={n} {kind} {rate:.3} (target {target} +/- {tol})"),
    )
}

// Expected to fail. The xi component runs on merged data, and the reference
// power for this design could not be reached with any merge variant tried;
// see "Known deviations" in the README. Kept as specified.
#[test]
fn multivariate_setting4_combined_kendall() {
    let start = std::time::Instant::now();
    let (pass, detail) = grothe_power(
        ScenarioId::M4,
        80,
        MvKind::CombinedKendall,
        0.939,
        0.04,
        SEED,
    );
    let secs = start.elapsed().as_secs_f64();
    report(
        "multivariate setting 4 power",
        pass && secs <= 1800.0,
        &format!("{detail}; {secs:.1}s"),
    );
}

#[test]
fn multivariate_setting2_kendall_and_null_size() {
    let start = std::time::Instant::now();
    let (mut pass, first) =
        grothe_power(ScenarioId::M2, 60, MvKind::Kendall, 0.730, 0.05, SEED + 1);
    let mut parts = vec![first];
    let all: Vec<TestSpec> = MvKind::ALL.into_iter().map(grothe).collect();
    let null = run_size(&all, 60, &grothe_config(SEED + 10)).unwrap();
    for rate in &null.rates {
        pass &= (0.03..=0.07).contains(&rate.rate);
        parts.push(format!("null {} {:.3}", rate.test, rate.rate));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs <= 1800.0;
    report(
        "multivariate setting 2 power and null size",
        pass,
        &format!("{}; {secs:.1}s", parts.join(", ")),
    );
}

#[test]
fn multivariate_merged_analytic_size() {
    let borel: Vec<TestSpec> = MvKind::ALL
        .into_iter()
        .map(|kind| TestSpec::Multivariate {
            kind,
            mode: MvMode::BorelAnalytic,
        })
        .collect();
    let targets = [0.047, 0.052, 0.061, 0.045, 0.051];
    let size = run_size(&borel, 40, &ExperimentConfig::new(20_000, SEED + 20)).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (rate, target) in size.rates.iter().zip(targets) {
        pass &= (rate.rate - target).abs() <= 0.01;
        parts.push(format!(
            "{} {:.4} (target {target} +/- 0.01)",
            rate.test, rate.rate
        ));
    }
    report("merged-data analytic size n=40", pass, &parts.join(", "));
}

#[test]
fn one_dimensional_reduction() {
    let mut problems = Vec::new();
    for seed in 0..20u64 {
        let spec = ScenarioSpec::new(ScenarioId::U4, 30 + seed as usize).unwrap();
        let paired = rankdep::montecarlo::generate_paired(&spec, seed).unwrap();
        let multi = rankdep::montecarlo::generate_multi(&spec, seed).unwrap();
        let profile = concomitant_profile(&paired, None).unwrap();
        let uni = rankdep::RankStats::from_profile(&profile);

        let configs = BorelPair::fitted(&multi, 32, SignCoding::OrderPreserving).unwrap();
        let borel = |stat| {
            mvstat::borel_stat(&multi, stat, &configs, None)
                .unwrap()
                .value
        };
        if borel(BorelStat::Xi) != uni.xi_xy
            || borel(BorelStat::Spearman) != uni.spearman
            || borel(BorelStat::Kendall) != uni.kendall
        {
            problems.push(format!("seed {seed}: merged statistics differ"));
        }

        let opts = MvOptions::new(PermutationPlan::new(100, seed).unwrap());
        for (kind, method) in [
            (MvKind::CombinedKendall, Method::CombinedKendall),
            (MvKind::CombinedSpearman, Method::CombinedSpearman),
            (MvKind::XiSym, Method::XiSym),
        ] {
            let mv = mvstat::mv_test(&multi, kind, MvMode::BorelAnalytic, &opts).unwrap();
            let u = combined::test(&paired, method, &Default::default()).unwrap();
            if mv.statistic != u.statistic || mv.p_value != u.p_value {
                problems.push(format!(
                    "seed {seed}: {kind} borel_analytic differs from {method}"
                ));
            }
        }
        let ck = combined::combined_symmetric(&paired, Flavor::Kendall).unwrap();
        let mv_ck =
            mvstat::mv_combined(&multi, Flavor::Kendall, MvMode::BorelAnalytic, &opts).unwrap();
        if ck.statistic != mv_ck.statistic {
            problems.push(format!("seed {seed}: mv_combined kendall differs"));
        }

        let tau = mvstat::grothe_tau(&multivariate_ranks(&multi, false)).unwrap();
        if (tau - uni.kendall).abs() > 1e-12 {
            problems.push(format!(
                "seed {seed}: grothe tau {tau} vs kendall {}",
                uni.kendall
            ));
        }

        let same =
            MultiSample::from_flat(multi.len(), 1, 1, paired.x().to_vec(), paired.x().to_vec())
                .unwrap();
        let s = mvstat::grothe_spearman(&multivariate_ranks(&same, false)).unwrap();
        if (s - 1.0).abs() > 1e-12 {
            problems.push(format!("seed {seed}: comonotone grothe spearman {s}"));
        }
    }
    report(
        "one-dimensional reduction",
        problems.is_empty(),
        &if problems.is_empty() {
            "20 samples, all statistics agree".into()
        } else {
            problems.join("; ")
        },
    );
}
