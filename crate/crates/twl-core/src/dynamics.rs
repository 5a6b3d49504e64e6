//! Conformal contact dynamics of a positive function `ς` on `X`.
//!
//! The vector field is `υ = υ^h − ς ∂_θ`, where the horizontal part is the
//! `2ω`-dual of the horizontal differential of `ς`:
//! `υ^h = −(i/2) grad^h ς`. With `dα = 2ω` this gives `α(υ) = −ς` and
//! `L_υ α = −(∂_θ ς) α`.

use crate::error::{Error, Result};
use crate::geometry::{alpha, horizontal_part, AmbientPoint, TangentVectorX, FD_STEP};
use crate::scalar::{herm, i_unit, norm, Cx, Real};
use crate::toeplitz::{expression_bounds, parse_fiber_expr, Expr, SymbolFunction, Var};
use serde::{Deserialize, Serialize};

/// A smooth positive function on `X`, possibly depending on the fiber angle.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberSymbol {
    text: String,
    d: usize,
    expr: Expr,
    min: f64,
    max: f64,
}

impl FiberSymbol {
    /// Parses `text` (fiber-dependent identifiers allowed) and checks
    /// positivity on sampled points of `X`.
    pub fn parse(text: &str, d: usize) -> Result<Self> {
        let expr = parse_fiber_expr(text, d)?;
        let (min, max, _) = expression_bounds(&expr, d);
        if !(min > 0.0) {
            return Err(Error::NonPositiveSymbol { min });
        }
        Ok(Self {
            text: text.trim().to_string(),
            d,
            expr,
            min,
            max,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Positivity bound (sampled minimum).
    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn eval<T: Real>(&self, z: &[Cx<T>]) -> T {
        self.expr.eval(z)
    }

    /// Ambient gradient `g` with `dς(δ) = Re⟨δ, g⟩`.
    pub fn gradient<T: Real>(&self, z: &[Cx<T>]) -> Vec<Cx<T>> {
        let zero = vec![Cx::new(T::zero(), T::zero()); z.len()];
        (0..z.len())
            .map(|j| {
                let mut e = zero.clone();
                e[j] = Cx::new(T::one(), T::zero());
                let re = jet(&self.expr, z, &e, &zero).d1;
                e[j] = Cx::new(T::zero(), T::one());
                let im = jet(&self.expr, z, &e, &zero).d1;
                Cx::new(re, im)
            })
            .collect()
    }

    /// Derivative of the ambient gradient along `delta`.
    pub fn hessian_vector<T: Real>(&self, z: &[Cx<T>], delta: &[Cx<T>]) -> Vec<Cx<T>> {
        let zero = Cx::new(T::zero(), T::zero());
        (0..z.len())
            .map(|j| {
                let mut e = vec![zero; z.len()];
                e[j] = Cx::new(T::one(), T::zero());
                let re = jet(&self.expr, z, &e, delta).d12;
                e[j] = Cx::new(T::zero(), T::one());
                let im = jet(&self.expr, z, &e, delta).d12;
                Cx::new(re, im)
            })
            .collect()
    }

    /// `∂_θ ς` by a central difference along the structure circle.
    pub fn theta_derivative<T: Real>(&self, x: &AmbientPoint<T>) -> T {
        let h = T::lit(FD_STEP);
        let p = x.fiber_rotate(h);
        let m = x.fiber_rotate(-h);
        (self.eval(p.coords()) - self.eval(m.coords())) / (h + h)
    }
}

impl From<&SymbolFunction> for FiberSymbol {
    fn from(f: &SymbolFunction) -> Self {
        Self {
            text: f.text().to_string(),
            d: f.dim(),
            expr: f.expr().clone(),
            min: f.min(),
            max: f.max(),
        }
    }
}

/// Value with first derivatives along `u`, `v` and the mixed second
/// derivative.
#[derive(Clone, Copy)]
struct Jet<T> {
    v: T,
    d1: T,
    d2: T,
    d12: T,
}

/// The symmetric real bilinear form `P` with `var(z) = P(z, z)`.
fn polar<T: Real>(var: Var, a: &[Cx<T>], b: &[Cx<T>]) -> T {
    let half = T::lit(0.5);
    match var {
        Var::W(i) => (a[i] * b[i].conj()).re,
        Var::Re(i, j) => ((a[i] * b[j].conj()).re + (b[i] * a[j].conj()).re) * half,
        Var::Im(i, j) => ((a[i] * b[j].conj()).im + (b[i] * a[j].conj()).im) * half,
        Var::HolRe(i, j) => ((a[i] * b[j]).re + (b[i] * a[j]).re) * half,
        Var::HolIm(i, j) => ((a[i] * b[j]).im + (b[i] * a[j]).im) * half,
        Var::LinRe(_) | Var::LinIm(_) => unreachable!("linear coordinate"),
    }
}

fn jet<T: Real>(e: &Expr, z: &[Cx<T>], u: &[Cx<T>], w: &[Cx<T>]) -> Jet<T> {
    let two = T::lit(2.0);
    match e {
        Expr::Const(c) => Jet {
            v: T::lit(*c),
            d1: T::zero(),
            d2: T::zero(),
            d12: T::zero(),
        },
        Expr::Var(var @ (Var::LinRe(i) | Var::LinIm(i))) => {
            let pick = |c: Cx<T>| if matches!(var, Var::LinRe(_)) { c.re } else { c.im };
            Jet {
                v: pick(z[*i]),
                d1: pick(u[*i]),
                d2: pick(w[*i]),
                d12: T::zero(),
            }
        }
        Expr::Var(var) => Jet {
            v: polar(*var, z, z),
            d1: two * polar(*var, z, u),
            d2: two * polar(*var, z, w),
            d12: two * polar(*var, u, w),
        },
        Expr::Neg(a) => {
            let a = jet(a, z, u, w);
            Jet {
                v: -a.v,
                d1: -a.d1,
                d2: -a.d2,
                d12: -a.d12,
            }
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let s = if matches!(e, Expr::Sub(..)) { -T::one() } else { T::one() };
            let (a, b) = (jet(a, z, u, w), jet(b, z, u, w));
            Jet {
                v: a.v + s * b.v,
                d1: a.d1 + s * b.d1,
                d2: a.d2 + s * b.d2,
                d12: a.d12 + s * b.d12,
            }
        }
        Expr::Mul(a, b) => {
            let (a, b) = (jet(a, z, u, w), jet(b, z, u, w));
            Jet {
                v: a.v * b.v,
                d1: a.d1 * b.v + a.v * b.d1,
                d2: a.d2 * b.v + a.v * b.d2,
                d12: a.d12 * b.v + a.d1 * b.d2 + a.d2 * b.d1 + a.v * b.d12,
            }
        }
    }
}

fn check_dim<T: Real>(f: &FiberSymbol, z: &[Cx<T>]) -> Result<()> {
    if z.len() != f.d + 1 {
        return Err(Error::Dimension {
            expected: f.d + 1,
            got: z.len(),
        });
    }
    Ok(())
}

/// `υ(z) = −(i/2) P_h ∇ς − ς i z`, defined for every `z ≠ 0` and tangent
/// to every sphere `‖z‖ = const`.
fn field<T: Real>(f: &FiberSymbol, z: &[Cx<T>]) -> Vec<Cx<T>> {
    let g = f.gradient(z);
    let c = herm(&g, z) / norm_sqr_re(z);
    let s = f.eval(z);
    let half_i = Cx::new(T::zero(), T::lit(0.5));
    g.iter()
        .zip(z)
        .map(|(gj, zj)| -half_i * (gj - c * zj) - i_unit::<T>() * zj * s)
        .collect()
}

fn norm_sqr_re<T: Real>(z: &[Cx<T>]) -> T {
    z.iter().map(|c| c.norm_sqr()).sum()
}

/// Derivative of [`field`] at a unit vector `z` along `delta`.
fn field_derivative<T: Real>(f: &FiberSymbol, z: &[Cx<T>], delta: &[Cx<T>]) -> Vec<Cx<T>> {
    let g = f.gradient(z);
    let hd = f.hessian_vector(z, delta);
    let s = f.eval(z);
    let ds = herm(delta, &g).re;
    let c = herm(&g, z);
    let dc = herm(&hd, z) + herm(&g, delta);
    // ‖z‖² = 1 at the base point; its variation is 2 Re⟨δ, z⟩
    let dn = herm(delta, z).re * T::lit(2.0);
    let half_i = Cx::new(T::zero(), T::lit(0.5));
    (0..z.len())
        .map(|j| {
            let dproj = hd[j] - (dc - c * dn) * z[j] - c * delta[j];
            -half_i * dproj - i_unit::<T>() * (z[j] * ds + delta[j] * s)
        })
        .collect()
}

/// The contact vector field `υ` at `x`.
pub fn contact_field<T: Real>(f: &FiberSymbol, x: &AmbientPoint<T>) -> Result<TangentVectorX<T>> {
    check_dim(f, x.coords())?;
    TangentVectorX::new(x.clone(), field(f, x.coords()))
}

/// Point reached by the flow after time `tau`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowState<T: Real> {
    pub x: AmbientPoint<T>,
    pub tau: T,
    pub steps: usize,
}

/// Step control of [`flow`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    /// Target local error per step.
    pub tolerance: f64,
    pub initial_step: f64,
    /// Smallest admissible step relative to `max(1, |τ|)`.
    pub min_step: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            initial_step: 1e-2,
            min_step: 1e-12,
        }
    }
}

/// Largest admissible `|τ|`.
pub const MAX_FLOW_TIME: f64 = 10.0;

fn rk4_step<T: Real>(
    rhs: &impl Fn(&[Cx<T>]) -> Vec<Cx<T>>,
    y: &[Cx<T>],
    h: T,
) -> Vec<Cx<T>> {
    let add = |a: &[Cx<T>], b: &[Cx<T>], s: T| -> Vec<Cx<T>> {
        a.iter().zip(b).map(|(x, y)| x + y.scale(s)).collect()
    };
    let half = h * T::lit(0.5);
    let k1 = rhs(y);
    let k2 = rhs(&add(y, &k1, half));
    let k3 = rhs(&add(y, &k2, half));
    let k4 = rhs(&add(y, &k3, h));
    let sixth = h / T::lit(6.0);
    (0..y.len())
        .map(|i| y[i] + (k1[i] + (k2[i] + k3[i]).scale(T::lit(2.0)) + k4[i]).scale(sixth))
        .collect()
}

/// Adaptive RK4 by step doubling. `renorm` is applied after every accepted
/// step.
fn integrate<T: Real>(
    rhs: impl Fn(&[Cx<T>]) -> Vec<Cx<T>>,
    renorm: impl Fn(&mut Vec<Cx<T>>),
    y0: Vec<Cx<T>>,
    tau: T,
    ctrl: &StepControl,
) -> Result<(Vec<Cx<T>>, usize)> {
    if !(tau.abs().as_f64() <= MAX_FLOW_TIME) {
        return Err(Error::Precondition(format!(
            "flow time {} exceeds {MAX_FLOW_TIME}",
            tau.as_f64()
        )));
    }
    let mut y = y0;
    if tau == T::zero() {
        return Ok((y, 0));
    }
    let dir = tau.signum();
    let tol = T::tol(ctrl.tolerance);
    let min_h = T::lit(ctrl.min_step) * T::one().max(tau.abs());
    let mut h = T::lit(ctrl.initial_step).min(tau.abs());
    let mut t = T::zero();
    let mut steps = 0;
    while t < tau.abs() {
        h = h.min(tau.abs() - t);
        let full = rk4_step(&rhs, &y, dir * h);
        let mid = rk4_step(&rhs, &y, dir * h * T::lit(0.5));
        let two = rk4_step(&rhs, &mid, dir * h * T::lit(0.5));
        let err = two
            .iter()
            .zip(&full)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<T>()
            .sqrt()
            / T::lit(15.0);
        if err <= tol || h <= min_h {
            if err > tol {
                return Err(Error::StepUnderflow { tau: t.as_f64() });
            }
            // Richardson extrapolation of the two half steps
            y = two
                .iter()
                .zip(&full)
                .map(|(a, b)| a + (a - b).scale(T::one() / T::lit(15.0)))
                .collect();
            renorm(&mut y);
            t = t + h;
            steps += 1;
        }
        let factor = if err > T::zero() {
            (T::lit(0.9) * (tol / err).powf(T::lit(0.2))).max(T::lit(0.2)).min(T::lit(4.0))
        } else {
            T::lit(4.0)
        };
        h = (h * factor).max(min_h);
    }
    Ok((y, steps))
}

fn renormalize<T: Real>(y: &mut [Cx<T>], n: usize) {
    let r = norm(&y[..n]);
    for c in &mut y[..n] {
        *c = c.unscale(r);
    }
}

/// `φ_τ(x₀)` by adaptive RK4 with renormalization to the sphere.
pub fn flow<T: Real>(
    f: &FiberSymbol,
    x0: &AmbientPoint<T>,
    tau: T,
    ctrl: &StepControl,
) -> Result<FlowState<T>> {
    check_dim(f, x0.coords())?;
    let n = x0.coords().len();
    let (y, steps) = integrate(
        |z: &[Cx<T>]| field(f, z),
        |y: &mut Vec<Cx<T>>| renormalize(y, n),
        x0.coords().to_vec(),
        tau,
        ctrl,
    )?;
    Ok(FlowState {
        x: AmbientPoint::normalized(y)?,
        tau,
        steps,
    })
}

/// `(φ_τ(x₀), dφ_τ(v))` from the flow and its variational equation.
pub fn flow_with_tangent<T: Real>(
    f: &FiberSymbol,
    x0: &AmbientPoint<T>,
    v: &[Cx<T>],
    tau: T,
    ctrl: &StepControl,
) -> Result<(AmbientPoint<T>, Vec<Cx<T>>)> {
    check_dim(f, x0.coords())?;
    let n = x0.coords().len();
    if v.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: v.len(),
        });
    }
    let mut y0 = x0.coords().to_vec();
    y0.extend_from_slice(v);
    let (y, _) = integrate(
        |y: &[Cx<T>]| {
            let (z, dz) = y.split_at(n);
            let mut out = field(f, z);
            out.extend(field_derivative(f, z, dz));
            out
        },
        |y: &mut Vec<Cx<T>>| renormalize(y, n),
        y0,
        tau,
        ctrl,
    )?;
    let (z, dz) = y.split_at(n);
    Ok((AmbientPoint::normalized(z.to_vec())?, dz.to_vec()))
}

/// Residuals of the three Lie-derivative identities at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LieReport {
    /// `max_v |L_υα(v) + (∂_θς) α(v)|` over the sampled tangent vectors.
    pub lie_alpha: f64,
    /// `|υ(ς) + ς ∂_θς|`.
    pub derivative_of_symbol: f64,
    /// `max_v |L_υ(α/ς)(v)|`.
    pub lie_alpha_over_symbol: f64,
    pub theta_derivative: f64,
}

impl LieReport {
    pub fn max_residual(&self) -> f64 {
        self.lie_alpha
            .max(self.derivative_of_symbol)
            .max(self.lie_alpha_over_symbol)
    }
}

fn central<T: Real>(g: impl Fn(T) -> Vec<Cx<T>>, h: T) -> Vec<Cx<T>> {
    let (p, m) = (g(h), g(-h));
    p.iter().zip(&m).map(|(a, b)| (a - b).unscale(h + h)).collect()
}

/// Finite-difference check (step [`FD_STEP`]) of
/// (i) `L_υα = −(∂_θς) α`, (ii) `υ(ς) = −ς ∂_θς`, (iii) `L_υ(α/ς) = 0`
/// on the tangent vectors `vs` at `x`.
pub fn lie_identities_check<T: Real>(
    f: &FiberSymbol,
    x: &AmbientPoint<T>,
    vs: &[Vec<Cx<T>>],
) -> Result<LieReport> {
    check_dim(f, x.coords())?;
    let h = T::lit(FD_STEP);
    let z = x.coords();
    let u = field(f, z);
    let s = f.eval(z);
    let dth = f.theta_derivative(x);
    let shift = |dir: &[Cx<T>], t: T| -> Vec<Cx<T>> {
        z.iter().zip(dir).map(|(a, b)| a + b.scale(t)).collect()
    };
    let us = (f.eval(&shift(&u, h)) - f.eval(&shift(&u, -h))) / (h + h);
    let mut r1 = T::zero();
    let mut r3 = T::zero();
    for v in vs {
        TangentVectorX::new(x.clone(), v.clone())?;
        let du = central(|t| field(f, &shift(v, t)), h);
        // (L_υα)(v) = ⟨v, i υ⟩ + α(Dυ v) for α = Re⟨·, i z⟩
        let iu: Vec<Cx<T>> = u.iter().map(|c| c * i_unit::<T>()).collect();
        let lie = herm(v, &iu).re + alpha(z, &du);
        let av = alpha(z, v);
        r1 = r1.max((lie + dth * av).abs());
        r3 = r3.max((lie / s - us * av / (s * s)).abs());
    }
    Ok(LieReport {
        lie_alpha: r1.as_f64(),
        derivative_of_symbol: (us + s * dth).abs().as_f64(),
        lie_alpha_over_symbol: r3.as_f64(),
        theta_derivative: dth.as_f64(),
    })
}

/// Comparison of `α(dφ_τ v)` with `(ς(φ_τ x)/ς(x)) α(v)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PullbackReport {
    pub transported: f64,
    pub predicted: f64,
    pub residual: f64,
}

pub fn pullback_check<T: Real>(
    f: &FiberSymbol,
    x: &AmbientPoint<T>,
    v: &[Cx<T>],
    tau: T,
) -> Result<PullbackReport> {
    TangentVectorX::new(x.clone(), v.to_vec())?;
    let (y, dv) = flow_with_tangent(f, x, v, tau, &StepControl::default())?;
    let transported = alpha(y.coords(), &dv);
    let predicted = f.eval(y.coords()) / f.eval(x.coords()) * alpha(x.coords(), v);
    Ok(PullbackReport {
        transported: transported.as_f64(),
        predicted: predicted.as_f64(),
        residual: (transported - predicted).abs().as_f64(),
    })
}

/// The horizontal component `υ^h` of the contact field.
pub fn horizontal_field<T: Real>(f: &FiberSymbol, x: &AmbientPoint<T>) -> Vec<Cx<T>> {
    horizontal_part(x, &field(f, x.coords()))
}
