use std::f64::consts::PI;

use rand::Rng;
use twl_core::geometry::{heisenberg_chart, AmbientPoint};
use twl_core::hardy::{monomial_norms, near_diagonal_szego_check, psi2, szego_block, OmegaSign};
use twl_core::quadrature::integrate_over_x;
use twl_core::sampling::{gaussian_vector, random_point, seeded_rng};
use twl_core::scalar::norm_sqr;
use twl_core::toeplitz::exact_monomial_integral;
use twl_core::Cx;

#[test]
fn monte_carlo_norm_of_z0_z1() {
    // uniform points on S³ from normalized Gaussians; E|z₀z₁|² = 1/6 and
    // vol(X) = π, so ‖z₀z₁‖² = π/6
    let mut rng = seeded_rng(201);
    let n = 4_000_000;
    let mut acc = 0.0;
    for _ in 0..n {
        let g = gaussian_vector::<f64, _>(2, &mut rng);
        let r2 = norm_sqr(&g);
        acc += g[0].norm_sqr() * g[1].norm_sqr() / (r2 * r2);
    }
    let mc = PI * acc / n as f64;
    let block = monomial_norms::<f64>(2, 1).unwrap();
    let closed = block.norm_sqr(block.index_of(&[1, 1]).unwrap());
    let exact = exact_monomial_integral(&[1, 1], &[1, 1]).unwrap();
    assert!((mc / (PI / 6.0) - 1.0).abs() < 1e-3, "{mc}");
    assert!((closed - PI / 6.0).abs() < 1e-15);
    assert!((exact - PI / 6.0).abs() < 1e-15);
}

#[test]
fn szego_block_reproduces_itself() {
    // ∫ Π_k(x, y) Π_k(y, x) dV(y) = Π_k(x, x)
    let mut rng = seeded_rng(202);
    for (d, k) in [(1, 3), (1, 6), (2, 4)] {
        let x: AmbientPoint<f64> = random_point(d, &mut rng);
        let integral = integrate_over_x::<f64>(d, k + 4, 2 * k + 2, |z| {
            let y = AmbientPoint::new(z.to_vec()).unwrap();
            szego_block(k, &x, &y) * szego_block(k, &y, &x)
        });
        let diag = szego_block(k, &x, &x);
        assert!((integral - diag).norm() < 1e-4 * diag.norm(), "d={d} k={k}: {integral} vs {diag}");
        assert!(integral.im.abs() < 1e-10);
    }
}

#[test]
fn diagonal_growth_approaches_pi_to_the_minus_d() {
    let mut rng = seeded_rng(203);
    for d in 1..=3 {
        let x: AmbientPoint<f64> = random_point(d, &mut rng);
        let mut last = f64::INFINITY;
        for k in [10, 100, 1000, 10000] {
            let r = szego_block(k, &x, &x).re * (PI / k as f64).powi(d as i32);
            assert!(r > 1.0 && r < last);
            last = r;
        }
        assert!(last - 1.0 < 1e-3 * d as f64);
    }
}

#[test]
fn real_part_of_psi2_is_minus_half_the_squared_distance() {
    let mut rng = seeded_rng(204);
    for i in 0..1000 {
        let d = 1 + i % 3;
        let u = gaussian_vector::<f64, _>(d, &mut rng);
        let v = if i % 10 == 0 { u.clone() } else { gaussian_vector(d, &mut rng) };
        let p = psi2(&u, &v);
        let dist: f64 = u.iter().zip(&v).map(|(a, b)| (a - b).norm_sqr()).sum();
        assert!((2.0 * p.re + dist).abs() < 1e-12);
        assert!(p.re <= 0.0);
        assert_eq!(p.re == 0.0, dist == 0.0);
    }
}

#[test]
fn near_diagonal_modulus_is_gaussian() {
    // |Π_k(x + u/√k, x + v/√k)|·(π/k)^d against e^{−‖u−v‖²/2}, with the
    // points built from the chart and Π_k from the closed form
    let k = 300;
    let mut rng = seeded_rng(205);
    for d in 1..=2 {
        let x: AmbientPoint<f64> = random_point(d, &mut rng);
        let chart = heisenberg_chart(&x);
        for _ in 0..40 {
            let mut pick = || -> Vec<Cx<f64>> {
                let g = gaussian_vector::<f64, _>(d, &mut rng);
                let r: f64 = rng.gen_range(0.0..1.0);
                let n = norm_sqr(&g).sqrt();
                g.iter().map(|c| c * (r / n)).collect()
            };
            let (u, v) = (pick(), pick());
            let s = 1.0 / (k as f64).sqrt();
            let scaled = |w: &[Cx<f64>]| w.iter().map(|c| c * s).collect::<Vec<_>>();
            let xu = chart.point(0.0, &scaled(&u)).unwrap();
            let xv = chart.point(0.0, &scaled(&v)).unwrap();
            let measured = szego_block(k, &xu, &xv).norm() * (PI / k as f64).powi(d as i32);
            let dist: f64 = u.iter().zip(&v).map(|(a, b)| (a - b).norm_sqr()).sum();
            let r = measured / (-dist / 2.0).exp();
            assert!((r - 1.0).abs() < 0.05, "d={d}: ratio {r}");
        }
    }
}

#[test]
fn near_diagonal_phase_fixes_the_omega_orientation() {
    let k = 300;
    let mut rng = seeded_rng(206);
    let mut worst = [0.0f64; 2];
    for d in 1..=2 {
        let x: AmbientPoint<f64> = random_point(d, &mut rng);
        for _ in 0..20 {
            let u: Vec<Cx<f64>> = gaussian_vector::<f64, _>(d, &mut rng).iter().map(|c| c * 0.5).collect();
            let v: Vec<Cx<f64>> = gaussian_vector::<f64, _>(d, &mut rng).iter().map(|c| c * 0.5).collect();
            for (i, sign) in [OmegaSign::Standard, OmegaSign::Reversed].into_iter().enumerate() {
                let (m, p) = near_diagonal_szego_check(k, &x, &u, &v, sign).unwrap();
                worst[i] = worst[i].max((m / p).arg().abs());
            }
        }
    }
    // only the standard orientation reproduces the phase of the closed form
    assert!(worst[0] < 0.01, "{worst:?}");
    assert!(worst[1] > 0.5, "{worst:?}");
}
