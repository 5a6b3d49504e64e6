//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits with status 1 if any of them fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use twl_core::asymptotics::{
    gamma_integral, hessian_suite, predicted_kernel_diag, weyl_parameters,
};
use twl_core::dynamics::{lie_identities_check, pullback_check, FiberSymbol};
use twl_core::geometry::AmbientPoint;
use twl_core::hardy::{near_diagonal_szego_check, OmegaSign};
use twl_core::sampling::{gaussian_vector, random_point, random_tangent, seeded_rng};
use twl_core::scalar::{norm, scale};
use twl_core::spectral::{
    compute_spectrum, counting, good_cutoff, smoothed_kernel, smoothed_trace, tauberian_integral,
    GoodCutoff, SpectrumOptions,
};
use twl_core::symmetry::CircleAction;
use twl_core::toeplitz::parse_symbol;
use twl_core::{Cx, SpectrumRecord64};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
        .collect()
}

fn model() -> CircleAction {
    CircleAction::new(vec![-1, 1]).unwrap()
}

/// Spectrum of the equivariant model `f ≡ 1` on `CP^1` with weights `(−1, 1)`.
fn model_record(k_max: usize) -> SpectrumRecord64 {
    let f = parse_symbol("1", 1).unwrap();
    compute_spectrum(&f, &SpectrumOptions::new(k_max).with_action(model())).unwrap()
}

/// `k_max` large enough for kernel sums up to `lambda` with this cutoff.
fn k_max_for(cutoff: &GoodCutoff, lambda: f64) -> usize {
    (lambda + cutoff.lambda_tail()).ceil() as usize + 2
}

fn point(z: [f64; 2]) -> AmbientPoint<f64> {
    AmbientPoint::normalized(vec![Cx::new(z[0], 0.0), Cx::new(z[1], 0.0)]).unwrap()
}

fn c1() -> Outcome {
    let t0 = Instant::now();
    let f = parse_symbol("1", 1).unwrap();
    let rec = compute_spectrum::<f64>(&f, &SpectrumOptions::new(200)).unwrap();
    let p = weyl_parameters(&f, None, 0).unwrap();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut oracle_ok = true;
    for l in grid(100.0, 200.0, 101) {
        let n = counting(&rec, l, None).unwrap();
        let exact: u64 = (0..=l.floor() as u64).map(|k| k + 1).sum();
        oracle_ok &= n == exact;
        let r = n as f64 / p.counting().value(l);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        oracle_ok && lo >= 0.98 && hi <= 1.02 && secs <= 10.0,
        format!(
            "ratio range [{lo:.4}, {hi:.4}] (gate [0.98, 1.02]), exact-count oracle {}, {secs:.2} s",
            if oracle_ok { "matched" } else { "MISMATCH" }
        ),
    )
}

fn c2(rec: &SpectrumRecord64) -> Outcome {
    let f = parse_symbol("1", 1).unwrap();
    let gamma: f64 = gamma_integral(&f, Some(&model())).unwrap();
    let mut passed = (gamma - 0.5).abs() <= 1e-3;
    let mut parts = vec![format!("Γ = {gamma:.6}")];
    for varpi in [0i64, 1, 5] {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for l in grid(200.0, 400.0, 201) {
            let n = counting(rec, l, Some(varpi)).unwrap();
            // one monomial of degree k per weight ϖ ≡ k (mod 2) with |ϖ| ≤ k
            let exact = (0..=l.floor() as i64)
                .filter(|k| (k - varpi).rem_euclid(2) == 0 && varpi.abs() <= *k)
                .count() as u64;
            passed &= n == exact;
            let r = n as f64 / (gamma * l);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        passed &= lo >= 0.95 && hi <= 1.05;
        parts.push(format!("ϖ={varpi}: [{lo:.4}, {hi:.4}]"));
    }
    outcome(passed, parts.join(", "))
}

fn c3() -> Outcome {
    let f = parse_symbol("1 + 0.5*w1", 1).unwrap();
    let rec = compute_spectrum::<f64>(&f, &SpectrumOptions::new(300)).unwrap();
    let p = weyl_parameters(&f, None, 0).unwrap();
    let n = counting(&rec, 300.0, None).unwrap();
    let r = n as f64 / p.counting().value(300.0);
    outcome(
        (0.97..=1.03).contains(&r),
        format!("N(300) = {n}, ratio {r:.4} (gate [0.97, 1.03])"),
    )
}

fn c4(rec: &SpectrumRecord64, cutoff: &GoodCutoff) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for varpi in [0i64, 1, 5] {
        let vals: Vec<f64> = grid(200.0, 400.0, 41)
            .into_iter()
            .map(|l| smoothed_trace(rec, cutoff, l, Some(varpi)).unwrap().value / PI)
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let spread = vals.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
        passed &= (0.95..=1.05).contains(&mean);
        parts.push(format!("ϖ={varpi}: mean {mean:.5} (pointwise ±{spread:.1e})"));
    }
    outcome(passed, parts.join(", "))
}

/// `S(x, x)` at `(x + w·dir/√λ)/‖·‖` with `dir` the transverse unit vector.
fn transverse_profile(
    rec: &SpectrumRecord64,
    cutoff: &GoodCutoff,
    lambda: f64,
    varpi: i64,
) -> (f64, f64) {
    let x = point([1.0, 1.0]);
    let s0 = smoothed_kernel(rec, cutoff, lambda, Some(varpi), &x, &x).unwrap().value.re;
    let mut worst = 0.0f64;
    for i in 0..=15 {
        let w = 0.1 * i as f64;
        let ww = w / lambda.sqrt();
        let y = point([1.0 - ww, 1.0 + ww]);
        let s = smoothed_kernel(rec, cutoff, lambda, Some(varpi), &y, &y).unwrap().value.re;
        worst = worst.max((s / s0 - (-2.0 * w * w).exp()).abs());
    }
    (s0, worst)
}

fn c5(rec: &SpectrumRecord64, cutoff: &GoodCutoff, info: &[(f64, SpectrumRecord64)]) -> Outcome {
    let lambda = 400.0;
    let f = parse_symbol("1", 1).unwrap();
    let x = point([1.0, 1.0]);
    let predicted = predicted_kernel_diag(&f, &model(), &x, 0.0, lambda, 0).unwrap();
    let literal = 2f64.sqrt() * (lambda / PI).sqrt();
    let (s0, dev) = transverse_profile(rec, cutoff, lambda, 0);
    let r = s0 / literal;
    let passed = (0.9..=1.1).contains(&r) && dev <= 0.1 && (predicted / literal - 1.0).abs() < 1e-6;
    let mut detail = format!(
        "ϖ=0, ε={}: diagonal ratio {r:.4} (gate [0.9, 1.1]), transverse deviation {dev:.2e} (gate 0.1), leading term / √2·√(λ/π) − 1 = {:.1e}",
        cutoff.epsilon(),
        predicted / literal - 1.0
    );
    for varpi in [1i64, 5] {
        let (s, d) = transverse_profile(rec, cutoff, lambda, varpi);
        detail += &format!("; info ϖ={varpi}: ratio {:.4}, deviation {d:.4}", s / literal);
    }
    for (eps, r2) in info {
        let c = good_cutoff(*eps).unwrap();
        let (s, d) = transverse_profile(r2, &c, lambda, 0);
        detail += &format!("; info ε={eps}: ratio {:.4}, deviation {d:.4}", s / literal);
    }
    outcome(passed, detail)
}

fn c6(rec: &SpectrumRecord64, cutoff: &GoodCutoff) -> Outcome {
    let lambda: f64 = 400.0;
    let x = point([1.0, 1.0]);
    let mut worst = 0.0f64;
    for i in -10..=10 {
        let theta1 = 0.05 * i as f64;
        let y = x.fiber_rotate(theta1 / lambda.sqrt());
        let s = smoothed_kernel(rec, cutoff, lambda, Some(0), &y, &x).unwrap().value;
        let expected = lambda.sqrt() * theta1;
        let err = (s * Cx::from_polar(1.0, -expected)).arg().abs();
        worst = worst.max(err);
    }
    outcome(
        worst <= 0.1,
        format!("max phase error {worst:.2e} rad over θ₁ ∈ [−0.5, 0.5] (gate 0.1)"),
    )
}

fn decay(rec: &SpectrumRecord64, cutoff: &GoodCutoff) -> (Vec<f64>, f64) {
    let x = point([0.65f64.sqrt(), 0.35f64.sqrt()]);
    let vals: Vec<f64> = [100.0, 200.0, 300.0, 400.0]
        .iter()
        .map(|&l: &f64| {
            let s = smoothed_kernel(rec, cutoff, l, Some(0), &x, &x).unwrap().value.re;
            s.abs() * l.powi(3)
        })
        .collect();
    (vals, model().moment_map(&x))
}

fn c7(records: &[(f64, &SpectrumRecord64)]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for &(eps, rec) in records {
        let cutoff = good_cutoff(eps).unwrap();
        let (vals, phi) = decay(rec, &cutoff);
        let decreasing = vals.windows(2).all(|w| w[1] < w[0]);
        let ok = decreasing && vals[3] < 1.0;
        passed &= ok;
        parts.push(format!(
            "ε={eps}, Φ={phi:.3}: S·λ³ at λ=100..400 = [{}]",
            vals.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")
        ));
    }
    outcome(passed, parts.join("; "))
}

fn c8() -> Outcome {
    let k = 300;
    let mut rng = seeded_rng(8);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut count = 0;
    for d in [1usize, 2] {
        let x = random_point::<f64, _>(d, &mut rng);
        let dirs: Vec<Vec<Cx<f64>>> = (0..3)
            .map(|_| {
                let g = gaussian_vector::<f64, _>(d, &mut rng);
                scale(Cx::new(1.0 / norm(&g), 0.0), &g)
            })
            .collect();
        let mut pts = vec![vec![Cx::new(0.0, 0.0); d]];
        for r in [0.5, 1.0] {
            for u in &dirs {
                pts.push(scale(Cx::new(r, 0.0), u));
            }
        }
        let sc = (PI / k as f64).powi(d as i32);
        for u in &pts {
            for v in &pts {
                let (m, p) = near_diagonal_szego_check(k, &x, u, v, OmegaSign::Standard).unwrap();
                let r = (m.norm() * sc) / (p.norm() * sc);
                lo = lo.min(r);
                hi = hi.max(r);
                count += 1;
            }
        }
    }
    outcome(
        lo >= 0.95 && hi <= 1.05,
        format!("{count} pairs in d ∈ {{1, 2}}, ratio range [{lo:.4}, {hi:.4}] (gate [0.95, 1.05])"),
    )
}

fn c9() -> Outcome {
    let s = hessian_suite(1000, 9).unwrap();
    outcome(
        s.all_passed(),
        format!(
            "signature {}/{}, Υ {}/{}, K {}/{}, worst determinant error {:.1e}, worst inverse error {:.1e}",
            s.signature_passed,
            s.instances,
            s.upsilon_passed,
            s.instances,
            s.k_passed,
            s.instances,
            s.worst_determinant_error,
            s.worst_inverse_error
        ),
    )
}

fn c10() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (seed, text) in [(10u64, "1"), (11, "1 + 0.5*w1 + 0.2*re_01"), (12, "1 + 0.25*rh_01")] {
        let f = FiberSymbol::parse(text, 1).unwrap();
        let mut rng = seeded_rng(seed);
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let x = random_point::<f64, _>(1, &mut rng);
            let vs: Vec<_> = (0..4).map(|_| random_tangent(&x, &mut rng)).collect();
            let lie = lie_identities_check(&f, &x, &vs).unwrap();
            let pb = pullback_check(&f, &x, &vs[0], 1.0).unwrap();
            worst = worst.max(lie.max_residual()).max(pb.residual);
        }
        passed &= worst < 1e-6;
        parts.push(format!("\"{text}\": {worst:.1e}"));
    }
    outcome(passed, format!("worst residuals {} (gate 1e-6)", parts.join(", ")))
}

fn c11(rec: &SpectrumRecord64, cutoff: &GoodCutoff) -> Outcome {
    let min_hat = (0..cutoff.grid_len())
        .map(|j| cutoff.chi_hat(cutoff.grid_value(j)))
        .fold(f64::INFINITY, f64::min);
    let chi0 = cutoff.chi(0.0);
    let integral = cutoff.integral();
    let axioms = min_hat >= -1e-12 && chi0 == 1.0 && (integral - 2.0 * PI).abs() <= 1e-6;
    let lambda = 300.0;
    let t = tauberian_integral(rec, cutoff, lambda, Some(0)).unwrap().value;
    let n = counting(rec, lambda, Some(0)).unwrap() as f64;
    let r = t / (2.0 * PI * n);
    outcome(
        axioms && (r - 1.0).abs() <= 0.03,
        format!(
            "min χ̂ {min_hat:.1e}, χ(0) = {chi0}, ∫χ̂ − 2π = {:.1e}, Tauberian ratio {r:.4} (gate 1 ± 0.03)",
            integral - 2.0 * PI
        ),
    )
}

fn main() -> ExitCode {
    let t0 = Instant::now();
    let mut results: Vec<(usize, Outcome)> = Vec::new();
    let mut report = |n: usize, o: Outcome| {
        println!("criterion {n:>2}: {} | {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, o));
    };

    report(1, c1());
    let cut_half = good_cutoff(0.5).unwrap();
    let cut_quarter = good_cutoff(0.25).unwrap();
    let rec_half = model_record(k_max_for(&cut_half, 400.0));
    report(2, c2(&rec_half));
    report(3, c3());
    report(4, c4(&rec_half, &cut_half));
    let rec_quarter = model_record(k_max_for(&cut_quarter, 400.0));
    let info = [(0.25, rec_quarter)];
    report(5, c5(&rec_half, &cut_half, &info));
    report(6, c6(&rec_half, &cut_half));
    report(7, c7(&[(0.5, &rec_half), (0.25, &info[0].1)]));
    report(8, c8());
    report(9, c9());
    report(10, c10());
    report(11, c11(&rec_half, &cut_half));

    let failed: Vec<usize> = results.iter().filter(|(_, o)| !o.passed).map(|(n, _)| *n).collect();
    println!(
        "acceptance: {} of {} criteria passed in {:.1} s",
        results.len() - failed.len(),
        results.len(),
        t0.elapsed().as_secs_f64()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
