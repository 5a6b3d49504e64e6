//! Leading terms of the Weyl laws, smoothed traces and near-diagonal kernel
//! asymptotics.

use super::gamma::{gamma_integral, generic_a_phi};
use crate::error::{Error, Result};
use crate::geometry::{heisenberg_chart, tangent_split, AmbientPoint, TangentSplit};
use crate::hardy::{omega0, psi2};
use crate::scalar::{i_unit, norm_sqr, Cx, Real};
use crate::symmetry::{a_phi_varpi, a_t_varpi, CircleAction};
use crate::toeplitz::SymbolFunction;
use serde::{Deserialize, Serialize};

/// What a [`Prediction`] describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionKind {
    Counting,
    Trace,
    KernelDiag,
    KernelOffdiag,
    Volume,
}

/// Constants entering the global asymptotics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylParameters {
    pub d: usize,
    /// Dimension of the acting group (0 or 1).
    pub e: usize,
    pub gamma: f64,
    pub dim_v: f64,
    pub a_gen: f64,
}

/// A leading term `coefficient · (λ/π)^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub kind: PredictionKind,
    pub params: WeylParameters,
    pub coefficient: f64,
    pub exponent: f64,
    /// `A^T_ϖ` at the base point, for kernel predictions.
    pub a_t: Option<f64>,
    /// `ς(x)` at the base point, for kernel predictions.
    pub sigma_x: Option<f64>,
}

impl Prediction {
    pub fn value(&self, lambda: f64) -> f64 {
        self.coefficient * (lambda / std::f64::consts::PI).powf(self.exponent)
    }
}

/// Builds the parameters for the symbol, the optional action and isotype.
pub fn weyl_parameters(
    f: &SymbolFunction,
    action: Option<&CircleAction>,
    varpi: i64,
) -> Result<WeylParameters> {
    let gamma = gamma_integral::<f64>(f, action)?;
    let (e, a_gen) = match action {
        None => (0, 1.0),
        Some(a) => (1, generic_a_phi::<f64>(a, varpi)?),
    };
    Ok(WeylParameters {
        d: f.dim(),
        e,
        gamma,
        dim_v: 1.0,
        a_gen,
    })
}

impl WeylParameters {
    fn n(&self) -> f64 {
        (self.d + 1 - self.e) as f64
    }

    pub fn counting(&self) -> Prediction {
        let pi = std::f64::consts::PI;
        Prediction {
            kind: PredictionKind::Counting,
            params: *self,
            coefficient: pi / self.n() * self.dim_v * self.a_gen * self.gamma,
            exponent: self.n(),
            a_t: None,
            sigma_x: None,
        }
    }

    pub fn trace(&self) -> Prediction {
        Prediction {
            kind: PredictionKind::Trace,
            params: *self,
            coefficient: std::f64::consts::TAU * self.dim_v * self.a_gen * self.gamma,
            exponent: self.n() - 1.0,
            a_t: None,
            sigma_x: None,
        }
    }

    pub fn volume(&self) -> Prediction {
        Prediction {
            kind: PredictionKind::Volume,
            params: *self,
            coefficient: sigma_hat_volume(self),
            exponent: 0.0,
            a_t: None,
            sigma_x: None,
        }
    }

    /// Diagonal kernel prediction at `x ∈ X′` and transverse offset `w_t`.
    pub fn kernel_diag(
        &self,
        f: &SymbolFunction,
        action: &CircleAction,
        x: &AmbientPoint<f64>,
        w_t: f64,
        varpi: i64,
    ) -> Result<Prediction> {
        let a_t = a_t_varpi(x, f, action, varpi)?;
        let sigma = f.eval::<f64>(x.coords());
        // the λ-independent part of `predicted_kernel_diag`
        let coefficient = predicted_kernel_diag(f, action, x, w_t, std::f64::consts::PI, varpi)?;
        Ok(Prediction {
            kind: PredictionKind::KernelDiag,
            params: *self,
            coefficient,
            exponent: self.d as f64 - self.e as f64 / 2.0,
            a_t: Some(a_t),
            sigma_x: Some(sigma),
        })
    }
}

/// `π/(d−e+1) · dim V_ϖ · a_gen · Γ · (λ/π)^{d−e+1}`.
pub fn predicted_counting(params: &WeylParameters, lambda: f64) -> f64 {
    params.counting().value(lambda)
}

/// `2π · dim V_ϖ · a_gen · Γ · (λ/π)^{d−e}`.
pub fn predicted_trace(params: &WeylParameters, lambda: f64) -> f64 {
    params.trace().value(lambda)
}

/// `vol(Σ̂₁) = 2^{d−e+1} π Γ/(d−e+1)`.
pub fn sigma_hat_volume(params: &WeylParameters) -> f64 {
    let n = params.n();
    2f64.powf(n) * std::f64::consts::PI / n * params.gamma
}

/// `Q_h^T = ψ₂(υ₁_h, υ₂_h)/ς(x)`.
pub fn q_h<T: Real>(
    f: &SymbolFunction,
    x: &AmbientPoint<T>,
    s1: &TangentSplit<T>,
    s2: &TangentSplit<T>,
) -> Cx<T> {
    psi2(&s1.hor, &s2.hor) / f.eval::<T>(x.coords())
}

/// `Q_vt^T = [i(ω(υ₁_v, υ₁_t) − ω(υ₂_v, υ₂_t)) − ‖υ₁_t‖² − ‖υ₂_t‖²]/ς(x)`.
pub fn q_vt<T: Real>(
    f: &SymbolFunction,
    x: &AmbientPoint<T>,
    s1: &TangentSplit<T>,
    s2: &TangentSplit<T>,
) -> Cx<T> {
    let w1 = omega0(&s1.ver_vector(), &s1.trasv_vector());
    let w2 = omega0(&s2.ver_vector(), &s2.trasv_vector());
    let t = norm_sqr(&s1.trasv_vector()) + norm_sqr(&s2.trasv_vector());
    Cx::new(-t, w1 - w2) / f.eval::<T>(x.coords())
}

/// Both quadratic exponents for two chart displacements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticExponents<T: Real> {
    pub q_h: Cx<T>,
    pub q_vt: Cx<T>,
}

/// Splits chart displacements `w₁, w₂` at `x ∈ X′` and evaluates both
/// exponents.
pub fn quadratic_exponents<T: Real>(
    f: &SymbolFunction,
    action: &CircleAction,
    x: &AmbientPoint<T>,
    w1: &[Cx<T>],
    w2: &[Cx<T>],
) -> Result<QuadraticExponents<T>> {
    let chart = heisenberg_chart(x);
    let s1 = tangent_split(action, x, &chart.horizontal_vector(w1))?;
    let s2 = tangent_split(action, x, &chart.horizontal_vector(w2))?;
    Ok(QuadraticExponents {
        q_h: q_h(f, x, &s1, &s2),
        q_vt: q_vt(f, x, &s1, &s2),
    })
}

fn check_base<T: Real>(f: &SymbolFunction, action: &CircleAction, x: &AmbientPoint<T>) -> Result<()> {
    if x.dim() != f.dim() || action.dim() != f.dim() {
        return Err(Error::Dimension {
            expected: f.dim(),
            got: x.dim(),
        });
    }
    Ok(())
}

/// `2π A^T_ϖ(x) a_{Φ,ϖ}(x) (λ/π)^{d−e/2} exp(−2‖w_t‖²/ς(x))`, where
/// `w_t` is the transverse coordinate of the displacement.
pub fn predicted_kernel_diag<T: Real>(
    f: &SymbolFunction,
    action: &CircleAction,
    x: &AmbientPoint<T>,
    w_t: T,
    lambda: T,
    varpi: i64,
) -> Result<T> {
    check_base(f, action, x)?;
    let a_t = a_t_varpi(x, f, action, varpi)?;
    let stab = action.stabilizers(x)?;
    let a = a_phi_varpi::<T>(&stab, varpi);
    let d = T::count(x.dim());
    let half = T::lit(0.5);
    let sigma = f.eval::<T>(x.coords());
    Ok(T::TAU() * a_t * a * (lambda / T::PI()).powf(d - half)
        * (-T::lit(2.0) * w_t * w_t / sigma).exp())
}

/// Leading term of the smoothed kernel at `x + (θ₁, w₁)/√λ`,
/// `x + (θ₂, w₂)/√λ` in Heisenberg coordinates centered at `x ∈ X′`.
#[allow(clippy::too_many_arguments)]
pub fn predicted_kernel_offdiag<T: Real>(
    f: &SymbolFunction,
    action: &CircleAction,
    x: &AmbientPoint<T>,
    (theta1, w1): (T, &[Cx<T>]),
    (theta2, w2): (T, &[Cx<T>]),
    lambda: T,
    varpi: i64,
) -> Result<Cx<T>> {
    check_base(f, action, x)?;
    let a_t = a_t_varpi(x, f, action, varpi)?;
    let sigma = f.eval::<T>(x.coords());
    let chart = heisenberg_chart(x);
    let stab = action.stabilizers(x)?;
    let s1 = tangent_split(action, x, &chart.horizontal_vector(w1))?;
    let s2 = tangent_split(action, x, &chart.horizontal_vector(w2))?;
    let vt = q_vt(f, x, &s1, &s2);
    let mut g_sum = Cx::new(T::zero(), T::zero());
    for &phi in &stab.elements_x {
        let jac = action.stabilizer_jacobian(&chart, T::lit(phi))?;
        let moved = jac.matvec(w2);
        let sg = tangent_split(action, x, &chart.horizontal_vector(&moved))?;
        let chi = Cx::from_polar(T::one(), T::lit(varpi as f64 * phi));
        g_sum = g_sum + chi.conj() * q_h(f, x, &s1, &sg).exp();
    }
    g_sum = g_sum / T::count(stab.elements_x.len());
    let d = T::count(x.dim());
    let phase = i_unit::<T>() * (lambda.sqrt() * (theta1 - theta2) / sigma);
    Ok((phase + vt).exp() * g_sum * (T::TAU() * a_t * (lambda / T::PI()).powf(d - T::lit(0.5))))
}

/// `Q₀ = (t/π)^d r^{−e}`.
pub fn q0(t: f64, r: f64, d: usize, e: usize) -> f64 {
    (t / std::f64::consts::PI).powi(d as i32) * r.powi(-(e as i32))
}

/// Relative defect of `Q₀(1/ς, 1/ς) = π^{−d} ς^{e−d}`.
pub fn q0_check(sigma: f64, d: usize, e: usize) -> f64 {
    let lhs = q0(1.0 / sigma, 1.0 / sigma, d, e);
    let rhs = std::f64::consts::PI.powi(-(d as i32)) * sigma.powi(e as i32 - d as i32);
    (lhs - rhs).abs() / rhs.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toeplitz::parse_symbol;
    use std::f64::consts::PI;

    fn model() -> (SymbolFunction, CircleAction, AmbientPoint<f64>) {
        let a = CircleAction::new(vec![-1, 1]).unwrap();
        let x = a.zero_locus_point::<f64>().unwrap();
        (parse_symbol("1", 1).unwrap(), a, x)
    }

    #[test]
    fn model_predictions() {
        let (f, a, _) = model();
        let p = weyl_parameters(&f, Some(&a), 0).unwrap();
        assert!((predicted_counting(&p, 300.0) - 150.0).abs() < 1e-9);
        assert!((predicted_trace(&p, 123.0) - PI).abs() < 1e-12);
        assert!((sigma_hat_volume(&p) - PI).abs() < 1e-12);
        let free = weyl_parameters(&f, None, 0).unwrap();
        assert!((predicted_counting(&free, 40.0) - 800.0).abs() < 1e-9);
        assert!((predicted_trace(&free, 40.0) - 2.0 * PI * 40.0).abs() < 1e-9);
        assert!((sigma_hat_volume(&free) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn volume_form_of_the_counting_law() {
        for (gamma, d, e) in [(0.37, 1usize, 1usize), (1.3, 2, 0), (0.8, 3, 1)] {
            let p = WeylParameters { d, e, gamma, dim_v: 1.0, a_gen: 1.0 };
            let n = (d + 1 - e) as i32;
            for l in [10.0, 77.0] {
                let alt = sigma_hat_volume(&p) * (l / (2.0 * PI)).powi(n);
                assert!((alt / predicted_counting(&p, l) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_kernel_prediction() {
        let (f, a, x) = model();
        let v = predicted_kernel_diag(&f, &a, &x, 0.0, 400.0, 0).unwrap();
        assert!((v - 2f64.sqrt() * (400.0 / PI).sqrt()).abs() < 1e-6);
        let g = predicted_kernel_diag(&f, &a, &x, 1.0, 400.0, 0).unwrap();
        assert!((g / v - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn quadratic_exponents_on_the_model() {
        let (f, a, x) = model();
        let chart = heisenberg_chart(&x);
        let zero = [Cx::new(0.0, 0.0)];
        let q = quadratic_exponents(&f, &a, &x, &zero, &zero).unwrap();
        assert_eq!(q.q_h, Cx::new(0.0, 0.0));
        assert_eq!(q.q_vt, Cx::new(0.0, 0.0));
        // the transverse direction J ξ̂ in chart coordinates
        let xi = a.xi_m(&x);
        let nx = crate::scalar::norm(&xi);
        let jxi: Vec<Cx<f64>> = xi.iter().map(|c| c * Cx::new(0.0, 1.0) / nx).collect();
        let wt: Vec<Cx<f64>> = chart.chart_coordinates_of(&jxi).iter().map(|c| c * 0.7).collect();
        let q = quadratic_exponents(&f, &a, &x, &wt, &wt).unwrap();
        assert!(q.q_h.norm() < 1e-14);
        assert!((q.q_vt - Cx::new(-2.0 * 0.49, 0.0)).norm() < 1e-12);
        let f2 = parse_symbol("2", 1).unwrap();
        let q2 = quadratic_exponents(&f2, &a, &x, &wt, &wt).unwrap();
        assert!((q2.q_vt * 2.0 - q.q_vt).norm() < 1e-14);
    }

    #[test]
    fn offdiagonal_reduces_to_diagonal() {
        let (f, a, x) = model();
        let chart = heisenberg_chart(&x);
        let xi = a.xi_m(&x);
        let nx = crate::scalar::norm(&xi);
        let jxi: Vec<Cx<f64>> = xi.iter().map(|c| c * Cx::new(0.0, 1.0) / nx).collect();
        let wt: Vec<Cx<f64>> = chart.chart_coordinates_of(&jxi).iter().map(|c| c * 0.4).collect();
        let off = predicted_kernel_offdiag(&f, &a, &x, (0.0, &wt), (0.0, &wt), 400.0, 1).unwrap();
        let diag = predicted_kernel_diag(&f, &a, &x, 0.4, 400.0, 1).unwrap();
        assert!((off - Cx::new(diag, 0.0)).norm() < 1e-10 * diag);
        let zero = [Cx::new(0.0, 0.0)];
        let ph = predicted_kernel_offdiag(&f, &a, &x, (0.3, &zero), (0.0, &zero), 400.0, 1).unwrap();
        let base = predicted_kernel_diag(&f, &a, &x, 0.0, 400.0, 1).unwrap();
        assert!((ph - Cx::from_polar(base, 20.0 * 0.3)).norm() < 1e-10 * base);
    }

    #[test]
    fn leading_amplitude_at_the_critical_point() {
        for (s, d, e) in [(1.0, 1usize, 1usize), (0.37, 3, 0), (2.5, 2, 1)] {
            assert!(q0_check(s, d, e) < 1e-14);
        }
    }
}
