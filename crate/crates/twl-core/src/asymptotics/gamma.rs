//! The volume constant `Γ(Φ, ς)` of the equivariant Weyl law.

use crate::error::{Error, Result};
use crate::geometry::AmbientPoint;
use crate::quadrature::{for_each_torus_point, gauss_legendre_on, integrate_over_x};
use crate::scalar::{norm, Cx, Real};
use crate::symmetry::{a_phi_varpi, CircleAction};
use crate::toeplitz::SymbolFunction;

/// Gauss nodes per free slice coordinate.
pub const SLICE_NODES: usize = 24;
/// Gauss nodes per collapsed simplex coordinate when `e = 0`.
pub const SIMPLEX_NODES: usize = 32;

fn phase_nodes(f: &SymbolFunction) -> usize {
    16 + 8 * f.polynomial().max_frequency() as usize
}

/// Checks that `0` is a regular value of `Φ` with nonempty preimage, and
/// returns the index `b` eliminated by the delta function (largest
/// `|p_b − p_0|`).
fn regular_zero(action: &CircleAction) -> Result<usize> {
    let p = action.weights();
    if p.iter().any(|&x| x == 0) {
        return Err(Error::DegenerateAction(
            "a zero weight makes 0 a critical value of the moment map".into(),
        ));
    }
    if !(p.iter().any(|&x| x > 0) && p.iter().any(|&x| x < 0)) {
        return Err(Error::DegenerateAction(
            "0 is not in the image of the moment map".into(),
        ));
    }
    Ok((1..p.len())
        .max_by_key(|&j| ((p[j] - p[0]).abs(), std::cmp::Reverse(j)))
        .expect("at least two weights"))
}

/// Points `w` of the slice `{Σ p_j w_j = 0}` of the simplex together with
/// their weights for Lebesgue measure in the free coordinates.
pub(crate) fn slice_rule(p: &[i64], b: usize, n: usize) -> Vec<(Vec<f64>, f64)> {
    let free: Vec<usize> = (1..p.len()).filter(|&j| j != b).collect();
    let mut out = Vec::new();
    let mut w = vec![0.0; p.len()];
    #[allow(clippy::too_many_arguments)]
    fn rec(
        level: usize,
        free: &[usize],
        p: &[i64],
        b: usize,
        n: usize,
        mass: f64,
        moment: f64,
        weight: f64,
        w: &mut Vec<f64>,
        out: &mut Vec<(Vec<f64>, f64)>,
    ) {
        if level == free.len() {
            // remaining coordinates 0 and b carry mass `mass` and moment −moment
            let (p0, pb) = (p[0] as f64, p[b] as f64);
            let wb = (-moment - mass * p0) / (pb - p0);
            let w0 = mass - wb;
            if wb < -1e-14 || w0 < -1e-14 {
                return;
            }
            w[b] = wb.max(0.0);
            w[0] = w0.max(0.0);
            out.push((w.clone(), weight));
            return;
        }
        let j = free[level];
        let pj = p[j] as f64;
        let rest: Vec<f64> = std::iter::once(0usize)
            .chain(std::iter::once(b))
            .chain(free[level + 1..].iter().copied())
            .map(|i| p[i] as f64)
            .collect();
        let pmin = rest.iter().cloned().fold(f64::INFINITY, f64::min);
        let pmax = rest.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // t ∈ [0, mass] with −moment − pj t ∈ [(mass − t) pmin, (mass − t) pmax]
        let (mut lo, mut hi) = (0.0f64, mass);
        let mut apply = |coef: f64, rhs: f64| {
            // coef · t ≤ rhs
            if coef > 0.0 {
                hi = hi.min(rhs / coef);
            } else if coef < 0.0 {
                lo = lo.max(rhs / coef);
            } else if rhs < 0.0 {
                hi = lo - 1.0;
            }
        };
        apply(pj - pmin, -moment - mass * pmin);
        apply(pmax - pj, moment + mass * pmax);
        if hi <= lo {
            return;
        }
        let (nodes, weights) = gauss_legendre_on::<f64>(n, lo, hi);
        for (&t, &wt) in nodes.iter().zip(&weights) {
            w[j] = t;
            rec(level + 1, free, p, b, n, mass - t, moment + pj * t, weight * wt, w, out);
        }
    }
    rec(0, &free, p, b, n, 1.0, 0.0, 1.0, &mut w, &mut out);
    out
}

/// `Γ = ∫_{X′} V_eff_X^{−1} ς^{−(d−e+1)} dV_{X′}` for a nontrivial action
/// (`e = 1`), and `Γ = ∫_X ς^{−(d+1)} dV_X` without one (`e = 0`).
///
/// `dV_{X′} = (1/2π) α ∧ dV_{M′}` with `dV_{M′}` the Riemannian volume of
/// `M′`; in simplex–torus coordinates this is
/// `π^d ⟨·⟩_torus · |∇Φ| / |∂_{w_b} Φ| dw′` on the slice `Φ = 0`.
pub fn gamma_integral<T: Real>(f: &SymbolFunction, action: Option<&CircleAction>) -> Result<T> {
    let d = f.dim();
    let n_phase = phase_nodes(f);
    let Some(action) = action else {
        let exponent = -(T::count(d) + T::one());
        let v = integrate_over_x::<T>(d, SIMPLEX_NODES, n_phase, |z| {
            Cx::new(f.eval::<T>(z).powf(exponent), T::zero())
        });
        return Ok(v.re);
    };
    if action.dim() != d {
        return Err(Error::Dimension {
            expected: d,
            got: action.dim(),
        });
    }
    let b = regular_zero(action)?;
    let p = action.weights();
    let exponent = -T::count(d);
    let torus_weight = T::one() / T::count(n_phase).powi(d as i32);
    let mut total = T::zero();
    for (w, wt) in slice_rule(p, b, SLICE_NODES) {
        let radii: Vec<T> = w.iter().map(|&x| T::lit(x.sqrt())).collect();
        let probe = AmbientPoint::normalized(
            radii.iter().map(|&r| Cx::new(r, T::zero())).collect(),
        )?;
        let v_eff = {
            let stab = action.stabilizers(&probe)?;
            T::TAU() * norm(&action.xi_x(&probe)) / T::lit(stab.order_x as f64)
        };
        let grad: T = T::lit(2.0)
            * p.iter()
                .zip(&w)
                .map(|(&pj, &wj)| T::lit((pj * pj) as f64 * wj))
                .sum::<T>()
                .sqrt();
        let mut avg = T::zero();
        // the structure circle acts trivially on ς, so φ_0 = 0 is fixed
        for_each_torus_point::<T>(d, n_phase, |ph| {
            let mut z = Vec::with_capacity(d + 1);
            z.push(Cx::new(radii[0], T::zero()));
            for j in 1..=d {
                z.push(ph[j - 1].scale(radii[j]));
            }
            avg = avg + f.eval::<T>(&z).powf(exponent);
        });
        avg = avg * torus_weight;
        let jac = grad / T::lit((p[b] - p[0]).abs() as f64);
        total = total + T::lit(wt) * avg / v_eff * jac;
    }
    if total == T::zero() {
        return Err(Error::Quadrature {
            k: 0,
            estimate: f64::INFINITY,
        });
    }
    Ok(total * T::PI().powi(d as i32))
}

/// The generic value of `a_{Φ,ϖ}` on `M′`, sampled at interior slice points.
pub fn generic_a_phi<T: Real>(action: &CircleAction, varpi: i64) -> Result<T> {
    let b = regular_zero(action)?;
    let p = action.weights();
    let mut counts: Vec<(u64, usize, f64)> = Vec::new();
    for (w, _) in slice_rule(p, b, 5) {
        let x = AmbientPoint::<T>::normalized(
            w.iter().map(|&x| Cx::new(T::lit(x.sqrt()), T::zero())).collect(),
        )?;
        let stab = action.stabilizers(&x)?;
        let a: f64 = a_phi_varpi::<f64>(&stab, varpi);
        match counts.iter_mut().find(|(o, _, _)| *o == stab.order_x) {
            Some(c) => c.1 += 1,
            None => counts.push((stab.order_x, 1, a)),
        }
    }
    counts
        .iter()
        .max_by_key(|c| c.1)
        .map(|c| T::lit(c.2))
        .ok_or_else(|| Error::DegenerateAction("empty zero locus".into()))
}
