use twl_core::geometry::{
    alpha, dist_to_zero_locus, fs_omega, heisenberg_chart, tangent_split, AmbientPoint,
};
use twl_core::sampling::{random_point, random_tangent, seeded_rng};
use twl_core::scalar::{herm, norm};
use twl_core::symmetry::CircleAction;
use twl_core::Cx;

const H: f64 = 1e-4;

fn on_sphere(z: Vec<Cx<f64>>) -> AmbientPoint<f64> {
    AmbientPoint::normalized(z).unwrap()
}

/// `F(s, t) = (x + s u + t v)/‖·‖`.
fn surface(x: &AmbientPoint<f64>, u: &[Cx<f64>], v: &[Cx<f64>], s: f64, t: f64) -> Vec<Cx<f64>> {
    let z: Vec<Cx<f64>> = (0..u.len())
        .map(|j| x.coords()[j] + u[j] * s + v[j] * t)
        .collect();
    on_sphere(z).coords().to_vec()
}

/// Central difference of `F` at `(s, t)` along `s` (`which = 0`) or `t`.
fn partial(x: &AmbientPoint<f64>, u: &[Cx<f64>], v: &[Cx<f64>], s: f64, t: f64, which: usize) -> Vec<Cx<f64>> {
    let (ds, dt) = if which == 0 { (H, 0.0) } else { (0.0, H) };
    let p = surface(x, u, v, s + ds, t + dt);
    let m = surface(x, u, v, s - ds, t - dt);
    p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * H)).collect()
}

/// Fubini–Study form in the affine chart `ζ = z'/z₀`, evaluated on the
/// chart images of `a, b`.
fn fs_affine(z: &[Cx<f64>], a: &[Cx<f64>], b: &[Cx<f64>]) -> f64 {
    let zeta: Vec<Cx<f64>> = z[1..].iter().map(|c| c / z[0]).collect();
    let dzeta = |v: &[Cx<f64>]| -> Vec<Cx<f64>> {
        (1..z.len()).map(|j| (v[j] * z[0] - z[j] * v[0]) / (z[0] * z[0])).collect()
    };
    let (da, db) = (dzeta(a), dzeta(b));
    let q = 1.0 + zeta.iter().map(|c| c.norm_sqr()).sum::<f64>();
    // h(p, q) = Σ g_{j k̄} p_j conj(q_k)
    let h = |p: &[Cx<f64>], r: &[Cx<f64>]| -> Cx<f64> {
        let mut acc = Cx::new(0.0, 0.0);
        for j in 0..p.len() {
            for k in 0..p.len() {
                let delta = if j == k { q } else { 0.0 };
                let g = (Cx::new(delta, 0.0) - zeta[j].conj() * zeta[k]) / (q * q);
                acc += g * p[j] * r[k].conj();
            }
        }
        acc
    };
    h(&db, &da).im
}

#[test]
fn exterior_derivative_of_alpha_is_twice_fubini_study() {
    let mut rng = seeded_rng(101);
    for d in 1..=3 {
        for _ in 0..10 {
            let x: AmbientPoint<f64> = random_point(d, &mut rng);
            let u = random_tangent(&x, &mut rng);
            let v = random_tangent(&x, &mut rng);
            // dα(∂s, ∂t) = ∂s α(∂t F) − ∂t α(∂s F) at the origin
            let a_t = |s: f64, t: f64| alpha(&surface(&x, &u, &v, s, t), &partial(&x, &u, &v, s, t, 1));
            let a_s = |s: f64, t: f64| alpha(&surface(&x, &u, &v, s, t), &partial(&x, &u, &v, s, t, 0));
            let d_alpha = (a_t(H, 0.0) - a_t(-H, 0.0)) / (2.0 * H) - (a_s(0.0, H) - a_s(0.0, -H)) / (2.0 * H);
            let fu = partial(&x, &u, &v, 0.0, 0.0, 0);
            let fv = partial(&x, &u, &v, 0.0, 0.0, 1);
            let expected = 2.0 * fs_affine(x.coords(), &fu, &fv);
            let scale = 1.0 + expected.abs();
            assert!((d_alpha - expected).abs() < 1e-5 * scale, "d={d}: {d_alpha} vs {expected}");
            // the library's ω agrees with the affine-chart form
            assert!((fs_omega(&x, &fu, &fv) - expected / 2.0).abs() < 1e-9 * scale);
        }
    }
}

#[test]
fn pulled_back_contact_form_has_heisenberg_normal_form() {
    let mut rng = seeded_rng(102);
    for d in 1..=2 {
        let x: AmbientPoint<f64> = random_point(d, &mut rng);
        let chart = heisenberg_chart(&x);
        let mut worst: f64 = 0.0;
        for a in -4..=4 {
            for b in -4..=4 {
                let w0 = Cx::new(0.025 * a as f64, 0.025 * b as f64);
                let mut w = vec![Cx::new(0.0, 0.0); d];
                w[0] = w0;
                if d == 2 {
                    w[1] = Cx::new(0.5, -0.25) * w0;
                }
                let nw2: f64 = w.iter().map(|c| c.norm_sqr()).sum();
                let z = chart.point(0.0, &w).unwrap();
                for j in 0..d {
                    for (dir, expected) in [(Cx::new(1.0, 0.0), -w[j].im), (Cx::new(0.0, 1.0), w[j].re)] {
                        let mut wp = w.clone();
                        let mut wm = w.clone();
                        wp[j] += dir * H;
                        wm[j] -= dir * H;
                        let zp = chart.point(0.0, &wp).unwrap();
                        let zm = chart.point(0.0, &wm).unwrap();
                        let dz: Vec<Cx<f64>> = zp
                            .coords()
                            .iter()
                            .zip(zm.coords())
                            .map(|(p, m)| (p - m) / (2.0 * H))
                            .collect();
                        let value = alpha(z.coords(), &dz);
                        // the coefficient of dw_j is −(i/2) w̄_j, that of dw̄_j its conjugate
                        let r = (value - expected).abs();
                        if nw2 > 0.0 {
                            worst = worst.max(r / nw2);
                        } else {
                            assert!(r < 1e-9);
                        }
                    }
                }
                // fiber derivative stays 1
                let zp = chart.point(H, &w).unwrap();
                let zm = chart.point(-H, &w).unwrap();
                let dz: Vec<Cx<f64>> =
                    zp.coords().iter().zip(zm.coords()).map(|(p, m)| (p - m) / (2.0 * H)).collect();
                assert!((alpha(z.coords(), &dz) - 1.0).abs() < 1e-7);
            }
        }
        assert!(worst < 1.0, "residual/‖w‖² = {worst}");
    }
}

#[test]
fn tangent_split_is_orthogonal_and_complete() {
    let action = CircleAction::new(vec![-1, 1]).unwrap();
    let mut rng = seeded_rng(103);
    for _ in 0..50 {
        let phases: Vec<f64> = (0..2).map(|_| rand::Rng::gen_range(&mut rng, 0.0..6.3)).collect();
        let x = on_sphere(phases.iter().map(|&p| Cx::from_polar(1.0, p)).collect());
        let v = random_tangent(&x, &mut rng);
        let vh: Vec<Cx<f64>> = {
            let c = herm(&v, x.coords());
            v.iter().zip(x.coords()).map(|(a, b)| a - c * b).collect()
        };
        let s = tangent_split(&action, &x, &v).unwrap();
        let (hv, vv, tv) = (s.hor.clone(), s.ver_vector(), s.trasv_vector());
        for (a, b) in [(&hv, &vv), (&hv, &tv), (&vv, &tv)] {
            assert!(herm(a, b).re.abs() < 1e-12);
        }
        let back = s.recombine();
        assert!(norm(&back.iter().zip(&vh).map(|(a, b)| a - b).collect::<Vec<_>>()) < 1e-12);

        let xi = action.xi_m(&x);
        let sx = tangent_split(&action, &x, &xi).unwrap();
        assert!(norm(&sx.hor) < 1e-12 && sx.trasv.abs() < 1e-12 && (sx.ver - norm(&xi)).abs() < 1e-12);
        let jxi: Vec<Cx<f64>> = xi.iter().map(|c| c * Cx::new(0.0, 1.0)).collect();
        let sj = tangent_split(&action, &x, &jxi).unwrap();
        assert!(norm(&sj.hor) < 1e-12 && sj.ver.abs() < 1e-12 && (sj.trasv - norm(&xi)).abs() < 1e-12);
    }
}

#[test]
fn distance_proxy_on_the_model() {
    let action = CircleAction::new(vec![-1, 1]).unwrap();
    let pole = on_sphere(vec![Cx::new(1.0, 0.0), Cx::new(0.0, 0.0)]);
    assert_eq!(action.moment_map(&pole).abs(), 1.0);
    // normalized by the weight spread p_max − p_min = 2
    assert!((dist_to_zero_locus(&pole, &action) - 0.5).abs() < 1e-15);
    let equator = on_sphere(vec![Cx::new(1.0, 0.0), Cx::new(0.0, 1.0)]);
    assert!(dist_to_zero_locus(&equator, &action) < 1e-15);

    // along the meridian from the equator to the pole the proxy grows with
    // the great-circle distance and never exceeds it
    let mut last = -1.0;
    for i in 0..=40 {
        let t = std::f64::consts::FRAC_PI_4 * i as f64 / 40.0;
        let x = on_sphere(vec![
            Cx::new((std::f64::consts::FRAC_PI_4 + t).cos(), 0.0),
            Cx::new((std::f64::consts::FRAC_PI_4 + t).sin(), 0.0),
        ]);
        let p = dist_to_zero_locus(&x, &action);
        assert!(p > last);
        assert!(p <= t + 1e-15);
        last = p;
    }
}

#[test]
fn moment_map_is_hamiltonian() {
    // dΦ(v) = 2ω(ξ_M, v), checked with central differences
    let mut rng = seeded_rng(104);
    for weights in [vec![-1, 1], vec![0, 1, 3], vec![2, -1, 0, 1]] {
        let action = CircleAction::new(weights.clone()).unwrap();
        let d = weights.len() - 1;
        for _ in 0..10 {
            let x: AmbientPoint<f64> = random_point(d, &mut rng);
            let v = random_tangent(&x, &mut rng);
            let shift = |s: f64| on_sphere(x.coords().iter().zip(&v).map(|(a, b)| a + b * s).collect());
            let dphi = (action.moment_map(&shift(H)) - action.moment_map(&shift(-H))) / (2.0 * H);
            let expected = 2.0 * fs_omega(&x, &action.xi_m(&x), &v);
            let nv = norm(&v);
            assert!((dphi - expected).abs() < 1e-7 * (1.0 + nv.powi(3)), "{weights:?}: {dphi} vs {expected}");
            // and Φ is constant along the fiber
            assert!((action.moment_map(&x.fiber_rotate(1.3)) - action.moment_map(&x)).abs() < 1e-15);
        }
    }
}
