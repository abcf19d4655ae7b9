//! Acceptance criteria, one function each. Runs without the libtest harness
//! so every PASS/FAIL line reaches the output; exits non-zero if any fails.

use std::fmt::Write as _;
use std::time::Instant;

use tailrisk::approx::{
    delta_correction, es_approx, g, gc4, gc4_largest_root, newton_raphson_delta, var_approx,
    asymptotic_envelope, denominator_root_alpha, ApproxMethod, Variant,
};
use tailrisk::distributions::{exact_es, exact_var, moment_summary, numeric_cumulants, LossSpec, MomentSummary, Severity};
use tailrisk::montecarlo::{McConfig, SampleSet};
use tailrisk::quadrature::{adaptive_simpson, es_correction_integral, SimpsonOptions};
use tailrisk::stdnormal::{self, cdf, pdf};
use tailrisk_cli::{sweep, table2, Reference, SweepConfig, TABLE2_METHODS};

type Criterion = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome { pass: true, detail: String::new() }
    }

    /// Records one sub-check.
    fn check(&mut self, ok: bool, line: impl AsRef<str>) {
        self.pass &= ok;
        let _ = writeln!(self.detail, "    [{}] {}", if ok { "ok" } else { "FAIL" }, line.as_ref());
    }

    fn note(&mut self, line: impl AsRef<str>) {
        let _ = writeln!(self.detail, "    {}", line.as_ref());
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn cp_lognormal(lambda: f64, mu: f64, sigma_sq: f64) -> LossSpec {
    LossSpec::CompoundPoisson { lambda, severity: Severity::Lognormal { mu, sigma_sq } }
}

fn criterion_01() -> Outcome {
    let mut o = Outcome::new();
    let c2 = cdf(3f64.sqrt());
    let c1 = cdf((3.0 + 6f64.sqrt()).sqrt());
    o.check((c2 - 0.9583677).abs() <= 5e-7, format!("cdf(sqrt 3) = {c2:.10}, target 0.9583677 +- 5e-7"));
    o.check((c1 - 0.990213).abs() <= 5e-7, format!("cdf(sqrt(3+sqrt 6)) = {c1:.10}, target 0.990213 +- 5e-7"));
    o
}

fn criterion_02() -> Outcome {
    let mut o = Outcome::new();
    let k4 = moment_summary(&cp_lognormal(4.0, 3.0, 1.21)).unwrap().excess_kurtosis;
    let k60 = moment_summary(&cp_lognormal(60.0, 3.0, 1.21)).unwrap().excess_kurtosis;
    o.check((k4 - 31.61734).abs() <= 1e-3, format!("kappa(lambda=4) = {k4:.7}, target 31.61734 +- 1e-3"));
    o.check((k60 - 2.107823).abs() <= 1e-4, format!("kappa(lambda=60) = {k60:.7}, target 2.107823 +- 1e-4"));
    o
}

fn criterion_03() -> Outcome {
    let mut o = Outcome::new();
    let m = moment_summary(&cp_lognormal(4.0, 3.0, 25.0)).unwrap();
    let rows = [
        ("mean", m.mean, 21558794.0, 1e-4),
        ("variance", m.variance(), 8.366638e24, 1e-4),
        ("skewness", m.skewness, 9.6608e15, 1e-3),
        ("excess kurtosis", m.excess_kurtosis, 6.720293e42, 1e-4),
        ("sd/mean", m.sd / m.mean, 134168.6, 1e-3),
    ];
    for (name, got, want, tol) in rows {
        let r = rel(got, want);
        o.check(r <= tol, format!("{name} = {got:.7e}, target {want:e}, rel err {r:.1e} (tol {tol:e})"));
    }
    o
}

fn criterion_04() -> Outcome {
    let mut o = Outcome::new();
    let m = moment_summary(&cp_lognormal(4.0, 3.0, 1.21)).unwrap();
    match denominator_root_alpha(m.skewness, m.excess_kurtosis) {
        Some(a) => o.check((a - 0.986567004).abs() <= 1e-5, format!("alpha* = {a:.9}, target 0.986567004 +- 1e-5")),
        None => o.check(false, "no denominator root found"),
    }
    o
}

/// (method, low, high), in percent.
type Ranges = [(ApproxMethod, f64, f64); 4];

/// Expected relative-error ranges per loss, read off plotted curves.
const EXPECTED_RANGES: [(&str, Ranges); 3] = [
    (
        "Pareto(5, 10)",
        [
            (ApproxMethod::Npa, -24.0, -10.0),
            (ApproxMethod::CornishFisher, -300.0, -130.0),
            (ApproxMethod::KurtI, -30.0, 40.0),
            (ApproxMethod::KurtIV, 10.0, 40.0),
        ],
    ),
    (
        "Lognormal(5, 1.21)",
        [
            (ApproxMethod::Npa, -95.0, -55.0),
            (ApproxMethod::CornishFisher, -1100.0, -700.0),
            (ApproxMethod::KurtI, -150.0, 50.0),
            (ApproxMethod::KurtIV, 20.0, 60.0),
        ],
    ),
    (
        "CompoundPoisson(4, Lognormal(3, 1.21))",
        [
            (ApproxMethod::Npa, -20.0, -5.0),
            (ApproxMethod::CornishFisher, -190.0, -110.0),
            (ApproxMethod::KurtI, -10.0, 40.0),
            (ApproxMethod::KurtIV, 15.0, 45.0),
        ],
    ),
];

fn range_specs() -> [(LossSpec, Reference); 3] {
    let mc = McConfig { sample_count: 1_000_000, seed: 1, stream_count: 8 };
    [
        (LossSpec::ParetoI { shape: 5.0, scale: 10.0 }, Reference::Exact),
        (LossSpec::Lognormal { mu: 5.0, sigma_sq: 1.21 }, Reference::Exact),
        (cp_lognormal(4.0, 3.0, 1.21), Reference::MonteCarlo(mc)),
    ]
}

fn range_cells(alpha_max: f64, o: &mut Outcome, record: bool) {
    for ((name, cells), (spec, reference)) in EXPECTED_RANGES.iter().zip(range_specs()) {
        let methods = cells.iter().map(|c| c.0).collect();
        let cfg = SweepConfig { alpha_max, ..SweepConfig::new(methods, reference) };
        let s = sweep(&spec, &cfg).unwrap();
        for &(method, lo, hi) in cells {
            let r = s.range(method.name()).unwrap();
            let ok = r.min >= lo - 5.0 && r.max <= hi + 5.0;
            let line = format!(
                "{name} {method}: computed [{:.2}, {:.2}] vs expected ({lo}, {hi}) +- 5pp",
                r.min, r.max
            );
            if record {
                o.check(ok, line);
            } else {
                o.note(format!("{} {line}", if ok { "inside " } else { "outside" }));
            }
        }
    }
}

fn criterion_05() -> Outcome {
    let mut o = Outcome::new();
    o.note("window (C1, 0.9999], 200 log-tail points; compound case vs MC n = 1e6, seed 1");
    range_cells(0.9999, &mut o, true);
    o.note("diagnostic only, window (C1, 0.999]:");
    range_cells(0.999, &mut o, false);
    o
}

fn criterion_06() -> Outcome {
    let mut o = Outcome::new();
    let report = table2(&McConfig { sample_count: 1_000_000, seed: 1, stream_count: 8 }).unwrap();
    let targets = [22, 48, 7, 7];
    for e in &report.entries {
        let j = TABLE2_METHODS.iter().position(|&m| m == e.method).unwrap();
        let ok = e.rel_err_pct < 0.0 && (e.order() - targets[j]).abs() <= 1;
        o.check(
            ok,
            format!(
                "alpha {} {}: rel err {:.3e}% -> {}, target -10^{} +- 1",
                e.alpha,
                e.method,
                e.rel_err_pct,
                e.signed_order(),
                targets[j]
            ),
        );
    }
    o
}

fn criterion_07() -> Outcome {
    let mut o = Outcome::new();
    let mut worst: f64 = 0.0;
    for (gamma, kappa) in [(2.0, 6.0), (3.0705, 31.6173), (0.5, 0.3), (6.1849, 110.936)] {
        for x in [2.5, 3.0, 4.0, 6.0, 10.0] {
            let nr = newton_raphson_delta(x, gamma, kappa, 1).unwrap();
            let d = delta_correction(Variant::I, x, gamma, kappa).unwrap();
            worst = worst.max((nr - d).abs());
        }
    }
    o.check(worst <= 1e-14, format!("max |delta^(1) - delta_I| = {worst:.2e} (tol 1e-14)"));

    let mut worst: f64 = 0.0;
    for gamma in [0.3, 0.8, 1.4] {
        let m = MomentSummary::new(1.0, 2.0, gamma, 0.0).unwrap();
        for alpha in [0.96, 0.99, 0.999, 0.9999] {
            let a = var_approx(ApproxMethod::KurtI, &m, alpha).unwrap().value;
            let b = var_approx(ApproxMethod::KurtIV, &m, alpha).unwrap().value;
            worst = worst.max(rel(a, b));
        }
    }
    o.check(worst <= 1e-10, format!("kappa = 0: max rel |KurtI - KurtIV| = {worst:.2e} (tol 1e-10)"));

    let mut worst: f64 = 0.0;
    for (shape, scale) in [(5.0, 10.0), (4.5, 1.0), (7.0, 3.0)] {
        let spec = LossSpec::ParetoI { shape, scale };
        for alpha in [0.5, 0.95, 0.999, 0.999999] {
            let ratio = exact_es(&spec, alpha).unwrap() / exact_var(&spec, alpha).unwrap();
            worst = worst.max(rel(ratio, shape / (shape - 1.0)));
        }
    }
    o.check(worst <= 4.0 * f64::EPSILON, format!("Pareto ES/VaR vs a/(a-1): max rel {worst:.2e}"));

    let mut worst: f64 = 0.0;
    for rate in [0.2, 1.0, 7.0] {
        let spec = LossSpec::Exponential { rate };
        for alpha in [0.5, 0.95, 0.999, 0.999999] {
            let gap = exact_es(&spec, alpha).unwrap() - exact_var(&spec, alpha).unwrap();
            worst = worst.max(rel(gap, 1.0 / rate));
        }
    }
    o.check(worst <= 1e-12, format!("exponential ES - VaR vs 1/lambda: max rel {worst:.2e}"));
    o
}

fn tail_average_of_var(spec: &LossSpec, alpha: f64) -> f64 {
    // ∫_α^1 VaR(u) du / (1-α) with u = 1 - (1-α) e^{-t}.
    let f = |t: f64| exact_var(spec, 1.0 - (1.0 - alpha) * (-t).exp()).unwrap() * (-t).exp();
    adaptive_simpson(f, 0.0, 25.0, &SimpsonOptions { tol: 1e-11, max_depth: 40, panels: 8 }).value
}

fn riemann(v: Variant, gamma: f64, kappa: f64, lower: f64) -> f64 {
    let h = 1e-5;
    (0..(40.0 / h) as usize)
        .map(|i| {
            let y = lower + (i as f64 + 0.5) * h;
            v.delta_unchecked(y, gamma, kappa) * pdf(y)
        })
        .sum::<f64>()
        * h
}

fn criterion_08() -> Outcome {
    let mut o = Outcome::new();

    let mut worst: f64 = 0.0;
    let base = moment_summary(&cp_lognormal(4.0, 3.0, 1.21)).unwrap();
    for (a, b) in [(0.5, -3.0), (2.0, 10.0), (1e3, 1e5)] {
        let shifted = base.affine(a, b);
        for method in ApproxMethod::ALL {
            for alpha in [0.995, 0.999] {
                let x = var_approx(method, &base, alpha).unwrap().value;
                let y = var_approx(method, &shifted, alpha).unwrap().value;
                worst = worst.max(rel(y, a * x + b));
                let x = es_approx(method, &base, alpha).unwrap().value;
                let y = es_approx(method, &shifted, alpha).unwrap().value;
                worst = worst.max(rel(y, a * x + b));
            }
        }
    }
    o.check(worst <= 1e-10, format!("affine equivariance: max rel {worst:.2e} (tol 1e-10)"));

    let mut worst: f64 = 0.0;
    for spec in [LossSpec::Exponential { rate: 1.0 }, LossSpec::ParetoI { shape: 5.0, scale: 10.0 }] {
        for alpha in [0.95, 0.99, 0.999] {
            worst = worst.max(rel(tail_average_of_var(&spec, alpha), exact_es(&spec, alpha).unwrap()));
        }
    }
    o.check(worst <= 1e-6, format!("ES = tail average of VaR: max rel {worst:.2e} (tol 1e-6)"));

    let ln1 = moment_summary(&LossSpec::Lognormal { mu: 0.0, sigma_sq: 1.0 }).unwrap();
    for (gamma, kappa) in [(2.0, 6.0), (4.6476, 70.8), (ln1.skewness, ln1.excess_kurtosis)] {
        let x0 = gc4_largest_root(gamma, kappa).unwrap();
        let n = 20_000;
        let mut prev = gc4(x0, gamma, kappa);
        let mut ok = true;
        for i in 1..=n {
            let x = x0 + (20.0 - x0) * i as f64 / n as f64;
            let v = gc4(x, gamma, kappa);
            ok &= v >= prev;
            prev = v;
        }
        o.check(ok, format!("GC4 nondecreasing on [{x0:.4}, 20] for ({gamma:.4}, {kappa:.3})"));
    }

    // Ten fixed valid (variant, γ, κ, lower) cases.
    let cases = [
        (Variant::I, 2.0, 6.0, 2.4),
        (Variant::II, 2.0, 6.0, 1.8),
        (Variant::III, 0.8, 1.5, 2.6),
        (Variant::IV, 3.0705, 31.6173, 2.0),
        (Variant::I, 3.0705, 31.6173, 2.6),
        (Variant::II, 0.4, 0.2, 3.0),
        (Variant::III, 4.6476, 70.8, 2.9),
        (Variant::IV, 6.1849, 110.936, 3.7),
        (Variant::I, 1.2, 2.0, 3.3),
        (Variant::II, 1.5, 9.0, 2.2),
    ];
    let mut worst: f64 = 0.0;
    for (v, gamma, kappa, lower) in cases {
        let q = es_correction_integral(v, gamma, kappa, lower).unwrap().value;
        worst = worst.max((q - riemann(v, gamma, kappa, lower)).abs());
    }
    o.check(worst <= 1e-8, format!("quadrature vs midpoint Riemann (h = 1e-5): max abs {worst:.2e} (tol 1e-8)"));

    let spec = LossSpec::Exponential { rate: 1.0 };
    let targets = [(1, 0.0, 1e-6), (2, 1.0, 1e-5), (3, 2.0, 1e-3), (4, 6.0, 1e-3)];
    for (order, want, tol) in targets {
        let k = numeric_cumulants(&spec, order).unwrap();
        o.check((k - want).abs() <= tol, format!("standardized exponential cumulant {order}: {k:.9} vs {want} (tol {tol:e})"));
    }

    // Worst residual over the NR-figure grid (C₁, 0.9999], 200 points. The
    // claim is for λ = 10; the others are reported for information only.
    let grid = tailrisk_cli::alpha_grid(tailrisk::approx::c1(), 0.9999, 200).unwrap();
    let specs = [cp_lognormal(10.0, 2.0, 1.0), cp_lognormal(4.0, 3.0, 1.21), LossSpec::Exponential { rate: 1.0 }];
    for (i, spec) in specs.iter().enumerate() {
        let m = moment_summary(spec).unwrap();
        let worst: Vec<f64> = [1, 3, 5, 10]
            .iter()
            .map(|&k| {
                grid.iter()
                    .map(|&a| {
                        let z = stdnormal::quantile(a).unwrap();
                        let d = newton_raphson_delta(z, m.skewness, m.excess_kurtosis, k).unwrap();
                        g(z, d, m.skewness, m.excess_kurtosis).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        let ok = worst.windows(2).all(|w| w[1] <= w[0]);
        let line = format!("{spec}: max NR residual for k = 1, 3, 5, 10: {worst:?}");
        if i == 0 {
            o.check(ok, line);
        } else {
            o.note(format!("{} {line}", if ok { "monotone    " } else { "not monotone" }));
        }
    }
    o
}

fn criterion_09() -> Outcome {
    let mut o = Outcome::new();
    let specs = [LossSpec::Lognormal { mu: 0.0, sigma_sq: 1.0 }, LossSpec::Exponential { rate: 1.0 }];
    let alphas = [0.99, 0.999];
    for spec in &specs {
        let mut hits = [0usize; 2];
        for seed in 1..=20 {
            let sample = SampleSet::generate(spec, &McConfig { sample_count: 1_000_000, seed, stream_count: 8 }).unwrap();
            for (j, &alpha) in alphas.iter().enumerate() {
                let e = sample.estimate(alpha).unwrap();
                let exact = exact_var(spec, alpha).unwrap();
                hits[j] += usize::from(e.var_ci_low <= exact && exact <= e.var_ci_high);
            }
        }
        for (j, &alpha) in alphas.iter().enumerate() {
            o.check(hits[j] >= 19, format!("{spec} alpha {alpha}: closed form inside 99% CI for {}/20 seeds (need 19)", hits[j]));
        }
    }
    o
}

fn criterion_10() -> Outcome {
    let mut o = Outcome::new();
    let m = moment_summary(&LossSpec::Exponential { rate: 1.0 }).unwrap();
    let ratios: Vec<f64> = [4, 8, 12]
        .iter()
        .map(|&k| {
            let alpha = 1.0 - 10f64.powi(-k);
            var_approx(ApproxMethod::KurtI, &m, alpha).unwrap().value / asymptotic_envelope(&m, alpha).unwrap()
        })
        .collect();
    o.note(format!("ratios at k = 4, 8, 12: {ratios:.6?}"));
    let toward = ratios.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs());
    o.check(toward, "distance to 1 strictly decreasing in k");
    o.check(ratios[2] > 0.85 && ratios[2] < 1.10, format!("ratio at k = 12 is {:.6}, need (0.85, 1.10)", ratios[2]));
    o
}

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("01 validity constants C1, C2", criterion_01),
        ("02 compound Poisson excess kurtosis", criterion_02),
        ("03 heavy-tail compound moments", criterion_03),
        ("04 KurtI blow-up level", criterion_04),
        ("05 relative error ranges, three losses x four methods", criterion_05),
        ("06 orders of magnitude, heavy-tail compound case", criterion_06),
        ("07 exactness identities", criterion_07),
        ("08 property suites", criterion_08),
        ("09 Monte-Carlo CI calibration", criterion_09),
        ("10 asymptotic envelope", criterion_10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {name}: {verdict} ({:.1}s)", start.elapsed().as_secs_f64());
        print!("{}", outcome.detail);
        if !outcome.pass {
            failed.push(name);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: {} failed: {}", failed.len(), failed.join("; "));
        std::process::exit(1);
    }
}
