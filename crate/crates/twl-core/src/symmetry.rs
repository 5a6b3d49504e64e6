//! Hamiltonian circle actions `z_j ↦ e^{i p_j φ} z_j`, their moment maps,
//! weight gradings of the Hardy space, stabilizers and effective volumes.

use crate::error::{Error, Result};
use crate::geometry::{heisenberg_chart, horizontal_part, AmbientPoint, HeisenbergChart, FD_STEP};
use crate::hardy::HardyBlock;
use crate::linalg::CMatrix;
use crate::quadrature::gauss_legendre_on;
use crate::sampling::{random_point, seeded_rng};
use crate::scalar::{herm, i_unit, norm, Cx, Real};
use crate::toeplitz::SymbolFunction;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Sign conventions fixed by numeric self-tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Conventions {
    /// `s` in `Φ = s Σ p_j |z_j|²`, chosen so that `dΦ = 2ω(ξ_M, ·)`.
    pub moment_sign: i64,
    /// `σ` in `ϖ(α) = σ⟨p, α⟩`, chosen so that `s_α ∘ μ_{φ}^{-1} = e^{iϖφ} s_α`.
    pub weight_sign: i64,
}

/// The calibrated conventions (computed once per process).
pub fn conventions() -> Conventions {
    static CONV: OnceLock<Conventions> = OnceLock::new();
    *CONV.get_or_init(calibrate)
}

fn calibrate() -> Conventions {
    let p = [-1i64, 0, 2];
    let x = AmbientPoint::<f64>::from_real(&[0.6, -0.3, 0.5]).expect("valid point");
    let x = AmbientPoint::<f64>::normalized(
        x.coords()
            .iter()
            .enumerate()
            .map(|(j, c)| c * Cx::from_polar(1.0, 0.4 * j as f64))
            .collect(),
    )
    .expect("valid point");
    let raw = |z: &[Cx<f64>]| -> f64 { z.iter().zip(&p).map(|(c, &pj)| pj as f64 * c.norm_sqr()).sum() };
    let xi: Vec<Cx<f64>> = x
        .coords()
        .iter()
        .zip(&p)
        .map(|(c, &pj)| c * Cx::new(0.0, pj as f64))
        .collect();
    let xi_m = horizontal_part(&x, &xi);
    let mut best = (0.0f64, 0.0f64);
    for dir in 0..3 {
        let mut v = vec![Cx::new(0.0, 0.0); 3];
        v[dir] = Cx::new(0.3, 0.7);
        let v = crate::geometry::tangent_projection(&x, &v);
        let h = FD_STEP;
        let zp: Vec<_> = x.coords().iter().zip(&v).map(|(a, b)| a + b * h).collect();
        let zm: Vec<_> = x.coords().iter().zip(&v).map(|(a, b)| a - b * h).collect();
        let dphi = (raw(&zp) - raw(&zm)) / (2.0 * h);
        let two_omega = 2.0 * herm(&horizontal_part(&x, &v), &xi_m).im;
        best.0 += (dphi - two_omega).abs();
        best.1 += (dphi + two_omega).abs();
    }
    let moment_sign = if best.0 < best.1 { 1 } else { -1 };
    assert!(best.0.min(best.1) < 1e-6, "Hamiltonian self-test failed: {best:?}");

    let alpha = [2u32, 1, 3];
    let phi = 0.61;
    let monomial = |z: &[Cx<f64>]| -> Cx<f64> {
        z.iter().zip(&alpha).fold(Cx::new(1.0, 0.0), |acc, (c, &a)| acc * c.powu(a))
    };
    let inv: Vec<Cx<f64>> = x
        .coords()
        .iter()
        .zip(&p)
        .map(|(c, &pj)| c * Cx::from_polar(1.0, -(pj as f64) * phi))
        .collect();
    let pa: i64 = p.iter().zip(&alpha).map(|(&pj, &a)| pj * a as i64).sum();
    let lhs = monomial(&inv);
    let base = monomial(x.coords());
    let plus = (lhs - base * Cx::from_polar(1.0, pa as f64 * phi)).norm();
    let minus = (lhs - base * Cx::from_polar(1.0, -(pa as f64) * phi)).norm();
    let weight_sign = if plus < minus { 1 } else { -1 };
    assert!(plus.min(minus) < 1e-12, "equivariance self-test failed");
    Conventions {
        moment_sign,
        weight_sign,
    }
}

/// A circle action with integer weights `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CircleAction {
    weights: Vec<i64>,
}

/// Order of the stabilizers of a point and the elements of `G^X`.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilizerInfo {
    pub order_m: u64,
    pub order_x: u64,
    /// `j_m = |G^M|/|G^X|`.
    pub index: u64,
    /// Elements of `G^X` as angles `2πn/|G^X|`.
    pub elements_x: Vec<f64>,
}

/// Orbit volumes at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveVolumes<T: Real> {
    pub v_eff_m: T,
    pub v_eff_x: T,
    /// `|det C_m|` for the orthonormal generator `2π ∂_φ`.
    pub det_c: T,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl CircleAction {
    pub fn new(weights: Vec<i64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidAction("at least two weights are required".into()));
        }
        if weights.iter().all(|&p| p == weights[0]) {
            return Err(Error::InvalidAction(
                "all weights equal: the action reparametrizes the structure circle".into(),
            ));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len() - 1
    }

    /// `max p − min p`.
    pub fn weight_spread(&self) -> i64 {
        self.weights.iter().max().unwrap() - self.weights.iter().min().unwrap()
    }

    fn check_dim<T: Real>(&self, x: &AmbientPoint<T>) {
        assert_eq!(x.dim(), self.dim(), "action and point dimensions differ");
    }

    /// `μ_φ(x)`.
    pub fn act<T: Real>(&self, phi: T, x: &AmbientPoint<T>) -> AmbientPoint<T> {
        self.check_dim(x);
        AmbientPoint::from_trusted(
            x.coords()
                .iter()
                .zip(&self.weights)
                .map(|(c, &p)| c * Cx::from_polar(T::one(), phi * T::lit(p as f64)))
                .collect(),
        )
    }

    /// The generating vector field `ξ_X = i p∘z`.
    pub fn xi_x<T: Real>(&self, x: &AmbientPoint<T>) -> Vec<Cx<T>> {
        self.check_dim(x);
        x.coords()
            .iter()
            .zip(&self.weights)
            .map(|(c, &p)| c * i_unit::<T>() * T::lit(p as f64))
            .collect()
    }

    /// Horizontal lift of `ξ_M`.
    pub fn xi_m<T: Real>(&self, x: &AmbientPoint<T>) -> Vec<Cx<T>> {
        horizontal_part(x, &self.xi_x(x))
    }

    /// `Φ(x) = s Σ p_j |z_j|²`.
    pub fn moment_map<T: Real>(&self, x: &AmbientPoint<T>) -> T {
        self.check_dim(x);
        let raw: T = x
            .coords()
            .iter()
            .zip(&self.weights)
            .map(|(c, &p)| c.norm_sqr() * T::lit(p as f64))
            .sum();
        raw * T::lit(conventions().moment_sign as f64)
    }

    /// Isotype label `ϖ` of the monomial `z^α`.
    pub fn weight_of_monomial(&self, alpha: &[u32]) -> i64 {
        let pa: i64 = self
            .weights
            .iter()
            .zip(alpha)
            .map(|(&p, &a)| p * a as i64)
            .sum();
        conventions().weight_sign * pa
    }

    /// Indices of the block monomials with weight `ϖ`.
    pub fn isotype_basis<T: Real>(&self, block: &HardyBlock<T>, varpi: i64) -> Vec<usize> {
        (0..block.dim())
            .filter(|&i| self.weight_of_monomial(block.multi_index(i)) == varpi)
            .collect()
    }

    /// Stabilizers of `x` in `X` and of `π(x)` in `M`.
    pub fn stabilizers<T: Real>(&self, x: &AmbientPoint<T>) -> Result<StabilizerInfo> {
        self.check_dim(x);
        let support: Vec<usize> = (0..=self.dim())
            .filter(|&j| x.coords()[j].norm() > T::tol(1e-12))
            .collect();
        let order_x = support
            .iter()
            .fold(0u64, |g, &j| gcd(g, self.weights[j].unsigned_abs()));
        let p0 = self.weights[support[0]];
        let order_m = support
            .iter()
            .fold(0u64, |g, &j| gcd(g, (self.weights[j] - p0).unsigned_abs()));
        if order_x == 0 || order_m == 0 {
            return Err(Error::InfiniteStabilizer);
        }
        let elements_x = (0..order_x)
            .map(|n| std::f64::consts::TAU * n as f64 / order_x as f64)
            .collect();
        Ok(StabilizerInfo {
            order_m,
            order_x,
            index: order_m / order_x,
            elements_x,
        })
    }

    /// Orbit lengths in `X` and `M`, integrated numerically over one
    /// primitive period, and `|det C_m|` from the orbit speed.
    pub fn effective_volume<T: Real>(&self, x: &AmbientPoint<T>) -> Result<EffectiveVolumes<T>> {
        let stab = self.stabilizers(x)?;
        let h = T::lit(FD_STEP);
        let velocity = |phi: T| -> Vec<Cx<T>> {
            let a = self.act(phi + h, x);
            let b = self.act(phi - h, x);
            a.coords()
                .iter()
                .zip(b.coords())
                .map(|(p, q)| (p - q).unscale(h + h))
                .collect()
        };
        let length = |period: T, horizontal: bool| -> T {
            let (nodes, weights) = gauss_legendre_on::<T>(24, T::zero(), period);
            nodes
                .iter()
                .zip(&weights)
                .map(|(&phi, &w)| {
                    let v = velocity(phi);
                    let speed = if horizontal {
                        norm(&horizontal_part(&self.act(phi, x), &v))
                    } else {
                        norm(&v)
                    };
                    w * speed
                })
                .sum()
        };
        let tau = T::TAU();
        let v_eff_x = length(tau / T::lit(stab.order_x as f64), false);
        let v_eff_m = length(tau / T::lit(stab.order_m as f64), true);
        let det_c = tau * norm(&self.xi_m(x));
        Ok(EffectiveVolumes {
            v_eff_m,
            v_eff_x,
            det_c,
        })
    }

    /// Jacobian of `μ_φ` at the chart center in the chart's `w`-coordinates.
    pub fn stabilizer_jacobian<T: Real>(
        &self,
        chart: &HeisenbergChart<T>,
        phi: T,
    ) -> Result<CMatrix<T>> {
        let center = chart.center();
        let moved = self.act(phi, center);
        let defect = norm(
            &moved
                .coords()
                .iter()
                .zip(center.coords())
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        );
        if defect > T::tol(1e-10) {
            return Err(Error::NotStabilizing {
                defect: defect.as_f64(),
            });
        }
        let d = chart.dim();
        let h = T::lit(FD_STEP);
        let image = |w: &[Cx<T>]| -> Result<Vec<Cx<T>>> {
            let y = self.act(phi, &chart.point(T::zero(), w)?);
            Ok(chart.coordinates(&y)?.1)
        };
        let mut a = CMatrix::zeros(d, d);
        let mut lin_defect = T::zero();
        for j in 0..d {
            let mut cols = Vec::with_capacity(2);
            for dir in [Cx::new(h, T::zero()), Cx::new(T::zero(), h)] {
                let mut wp = vec![Cx::new(T::zero(), T::zero()); d];
                let mut wm = wp.clone();
                wp[j] = dir;
                wm[j] = -dir;
                let (p, m) = (image(&wp)?, image(&wm)?);
                cols.push(
                    p.iter()
                        .zip(&m)
                        .map(|(a, b)| (a - b).unscale(h + h))
                        .collect::<Vec<_>>(),
                );
            }
            for i in 0..d {
                a[(i, j)] = cols[0][i];
                lin_defect = lin_defect.max((cols[1][i] - cols[0][i] * i_unit::<T>()).norm());
            }
        }
        let gram = a.adjoint().matmul(&a);
        let mut unit_defect = T::zero();
        for i in 0..d {
            for j in 0..d {
                let t = if i == j { T::one() } else { T::zero() };
                unit_defect = unit_defect.max((gram[(i, j)] - Cx::new(t, T::zero())).norm());
            }
        }
        if unit_defect.max(lin_defect) > T::tol(1e-10) {
            return Err(Error::Precondition(format!(
                "stabilizer Jacobian is not unitary (defect {:e})",
                unit_defect.max(lin_defect).as_f64()
            )));
        }
        Ok(a)
    }

    /// Sampled check that `f ∘ μ_φ = f` within `1e−10`.
    pub fn check_symbol_invariance(&self, f: &SymbolFunction) -> Result<()> {
        if f.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: f.dim(),
            });
        }
        let mut rng = seeded_rng(0x1a7);
        for n in 0..128 {
            let x = random_point::<f64, _>(self.dim(), &mut rng);
            let phi = 0.1 + 0.77 * n as f64;
            let a = f.eval(x.coords());
            let b = f.eval(self.act(phi, &x).coords());
            if (a - b).abs() > 1e-10 * a.abs().max(1.0) {
                return Err(Error::NotInvariant(format!(
                    "symbol '{}' changes by {:e} under the action",
                    f.text(),
                    (a - b).abs()
                )));
            }
        }
        Ok(())
    }

    /// A point of `X′` built from the weights: equal-modulus coordinates on
    /// two indices with weights of opposite sign (or a zero weight).
    pub fn zero_locus_point<T: Real>(&self) -> Result<AmbientPoint<T>> {
        let p = &self.weights;
        let n = p.len();
        let mut w = vec![0.0f64; n];
        if let Some(j) = p.iter().position(|&x| x == 0) {
            w[j] = 1.0;
            for (i, wi) in w.iter_mut().enumerate() {
                if i != j {
                    *wi = 0.0;
                }
            }
        } else {
            let pos = p.iter().position(|&x| x > 0);
            let neg = p.iter().position(|&x| x < 0);
            match (pos, neg) {
                (Some(a), Some(b)) => {
                    // p_a w_a + p_b w_b = 0 with w_a + w_b = 1
                    let (pa, pb) = (p[a] as f64, p[b] as f64);
                    w[a] = -pb / (pa - pb);
                    w[b] = pa / (pa - pb);
                }
                _ => {
                    return Err(Error::DegenerateAction(
                        "0 is not in the image of the moment map".into(),
                    ))
                }
            }
        }
        AmbientPoint::new(w.iter().map(|&x| Cx::new(T::lit(x.sqrt()), T::zero())).collect())
    }
}

/// `a_{Φ,ϖ} = |G^X|^{-1} Σ_{g ∈ G^X} Re χ_ϖ(g)`.
pub fn a_phi_varpi<T: Real>(stab: &StabilizerInfo, varpi: i64) -> T {
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for &phi in &stab.elements_x {
        re += (varpi as f64 * phi).cos();
        im += (varpi as f64 * phi).sin();
    }
    let n = stab.elements_x.len() as f64;
    assert!((im / n).abs() < 1e-12, "character average is not real");
    T::lit(re / n)
}

/// `A^T_ϖ(x) = 2^{e/2} dim(V_ϖ)/V_eff_X · ς(x)^{−(d+1−e/2)}` with `e = 1`.
pub fn a_t_varpi<T: Real>(
    x: &AmbientPoint<T>,
    f: &SymbolFunction,
    action: &CircleAction,
    _varpi: i64,
) -> Result<T> {
    let phi = action.moment_map(x);
    if phi.abs() > T::tol(1e-8) {
        return Err(Error::OffZeroLocus { phi: phi.as_f64() });
    }
    let vol = action.effective_volume(x)?;
    let d = T::count(x.dim());
    let e = T::one();
    let dim_v = T::one();
    let sigma: T = f.eval(x.coords());
    Ok(T::lit(2.0).powf(e / T::lit(2.0)) * dim_v / vol.v_eff_x
        * sigma.powf(-(d + T::one() - e / T::lit(2.0))))
}

/// Convenience: the chart at `x` together with the stabilizer Jacobians of
/// all elements of `G^X`.
pub fn stabilizer_jacobians<T: Real>(
    action: &CircleAction,
    x: &AmbientPoint<T>,
) -> Result<Vec<(f64, CMatrix<T>)>> {
    let stab = action.stabilizers(x)?;
    let chart = heisenberg_chart(x);
    stab.elements_x
        .iter()
        .map(|&phi| Ok((phi, action.stabilizer_jacobian(&chart, T::lit(phi))?)))
        .collect()
}
