//! The model contact geometry: `X = S^{2d+1} ⊂ C^{d+1}` over `M = CP^d`.
//!
//! The contact form is `α_x(v) = Re⟨v, i z⟩` and the Fubini–Study form is
//! normalized by `dα = 2 π*ω`, so that `∫_{CP¹} ω = π`. Tangent vectors to
//! `M` at `π(x)` are represented by their horizontal lifts at `x`, i.e. by
//! vectors complex-orthogonal to `z`.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::quadrature::integrate_over_x;
use crate::scalar::{herm, i_unit, norm, Cx, Real};
use crate::symmetry::CircleAction;

/// Step used by every central finite difference in the geometric checks.
pub const FD_STEP: f64 = 1e-4;

/// Radius of the `w`-ball on which Heisenberg charts are defined.
pub const CHART_RADIUS: f64 = 1.0;

/// A point of the unit sphere `X ⊂ C^{d+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AmbientPoint<T: Real> {
    z: Vec<Cx<T>>,
}

impl<T: Real> AmbientPoint<T> {
    /// Accepts `z` if `|‖z‖ − 1| ≤ 1e−12`.
    pub fn new(z: Vec<Cx<T>>) -> Result<Self> {
        if z.len() < 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: z.len(),
            });
        }
        let n = norm(&z);
        if (n - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::NotOnSphere { norm: n.as_f64() });
        }
        Ok(Self { z })
    }

    /// Projects a nonzero vector radially onto the sphere.
    pub fn normalized(z: Vec<Cx<T>>) -> Result<Self> {
        let n = norm(&z);
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::NotOnSphere { norm: n.as_f64() });
        }
        Self::new(z.into_iter().map(|c| c.unscale(n)).collect())
    }

    /// Builds a point from real coordinates, normalizing them.
    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::normalized(coords.iter().map(|&x| Cx::new(T::lit(x), T::zero())).collect())
    }

    /// The complex dimension `d` of `M = CP^d`.
    pub fn dim(&self) -> usize {
        self.z.len() - 1
    }

    pub fn coords(&self) -> &[Cx<T>] {
        &self.z
    }

    /// `w_j = |z_j|²`.
    pub fn moduli_sqr(&self) -> Vec<T> {
        self.z.iter().map(|c| c.norm_sqr()).collect()
    }

    /// The structure-circle rotation `x ↦ e^{iϑ} x`.
    pub fn fiber_rotate(&self, theta: T) -> Self {
        let ph = Cx::from_polar(T::one(), theta);
        Self {
            z: self.z.iter().map(|c| c * ph).collect(),
        }
    }

    /// The generator `∂/∂θ = i z` of the structure circle.
    pub fn reeb(&self) -> Vec<Cx<T>> {
        self.z.iter().map(|c| c * i_unit::<T>()).collect()
    }

    pub(crate) fn from_trusted(z: Vec<Cx<T>>) -> Self {
        debug_assert!((norm(&z) - T::one()).abs() < T::tol(1e-9));
        Self { z }
    }
}

/// A tangent vector to the sphere at `base`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVectorX<T: Real> {
    v: Vec<Cx<T>>,
    base: AmbientPoint<T>,
}

impl<T: Real> TangentVectorX<T> {
    pub fn new(base: AmbientPoint<T>, v: Vec<Cx<T>>) -> Result<Self> {
        check_tangent(&base, &v)?;
        Ok(Self { v, base })
    }

    pub fn vector(&self) -> &[Cx<T>] {
        &self.v
    }

    pub fn base(&self) -> &AmbientPoint<T> {
        &self.base
    }

    pub fn into_vector(self) -> Vec<Cx<T>> {
        self.v
    }
}

fn check_tangent<T: Real>(x: &AmbientPoint<T>, v: &[Cx<T>]) -> Result<()> {
    if v.len() != x.z.len() {
        return Err(Error::Dimension {
            expected: x.z.len(),
            got: v.len(),
        });
    }
    let defect = herm(v, &x.z).re.abs();
    if defect > T::tol(1e-12) * T::one().max(norm(v)) {
        return Err(Error::NotTangent {
            defect: defect.as_f64(),
        });
    }
    Ok(())
}

/// `Re⟨v, i z⟩ = Im⟨v, z⟩`, for any ambient vector `v`.
pub fn alpha<T: Real>(z: &[Cx<T>], v: &[Cx<T>]) -> T {
    herm(v, z).im
}

/// The contact form `α_x(v)`; rejects vectors that are not tangent at `x`.
pub fn contact_form<T: Real>(x: &AmbientPoint<T>, v: &[Cx<T>]) -> Result<T> {
    check_tangent(x, v)?;
    Ok(alpha(&x.z, v))
}

/// The component of `v` complex-orthogonal to `z`.
pub fn horizontal_part<T: Real>(x: &AmbientPoint<T>, v: &[Cx<T>]) -> Vec<Cx<T>> {
    let c = herm(v, &x.z);
    v.iter().zip(&x.z).map(|(a, b)| a - c * b).collect()
}

/// The component of `v` real-orthogonal to `z` (tangent to the sphere).
pub fn tangent_projection<T: Real>(x: &AmbientPoint<T>, v: &[Cx<T>]) -> Vec<Cx<T>> {
    let c = herm(v, &x.z).re;
    v.iter().zip(&x.z).map(|(a, b)| a - b.scale(c)).collect()
}

/// Fubini–Study metric on horizontal lifts: `Re⟨u_h, v_h⟩`.
pub fn fs_metric<T: Real>(x: &AmbientPoint<T>, u: &[Cx<T>], v: &[Cx<T>]) -> T {
    herm(&horizontal_part(x, u), &horizontal_part(x, v)).re
}

/// Fubini–Study form on horizontal lifts: `ω(u, v) = g(Ju, v) = Im⟨v_h, u_h⟩`.
pub fn fs_omega<T: Real>(x: &AmbientPoint<T>, u: &[Cx<T>], v: &[Cx<T>]) -> T {
    herm(&horizontal_part(x, v), &horizontal_part(x, u)).im
}

/// `vol(X)` by quadrature of `dV_X = (1/2π) α ∧ π*dV_M`; equals `π^d/d!`.
pub fn volume_x<T: Real>(d: usize) -> T {
    integrate_over_x::<T>(d, d + 2, 1, |_| Cx::new(T::one(), T::zero())).re
}

/// Heisenberg local chart `(θ, w) ↦ e^{iθ} U (1, w)/√(1 + ‖w‖²)` centered at
/// `U e₀`.
#[derive(Clone, Debug)]
pub struct HeisenbergChart<T: Real> {
    center: AmbientPoint<T>,
    frame: CMatrix<T>,
}

/// Builds the chart centered at `x`. The unitary frame is the Gram–Schmidt
/// completion of `x` by the standard basis vectors, skipping any vector that
/// is (numerically) in the span of those already chosen.
pub fn heisenberg_chart<T: Real>(x: &AmbientPoint<T>) -> HeisenbergChart<T> {
    let n = x.z.len();
    let mut columns: Vec<Vec<Cx<T>>> = vec![x.z.clone()];
    for e in 0..n {
        if columns.len() == n {
            break;
        }
        let mut r: Vec<Cx<T>> = (0..n)
            .map(|i| if i == e { Cx::new(T::one(), T::zero()) } else { Cx::new(T::zero(), T::zero()) })
            .collect();
        for _ in 0..2 {
            for c in &columns {
                let p = herm(&r, c);
                for (ri, ci) in r.iter_mut().zip(c) {
                    *ri = *ri - p * ci;
                }
            }
        }
        let nr = norm(&r);
        if nr > T::lit(1e-8) {
            columns.push(r.into_iter().map(|c| c.unscale(nr)).collect());
        }
    }
    let frame = CMatrix::from_fn(n, n, |i, j| columns[j][i]);
    HeisenbergChart {
        center: x.clone(),
        frame,
    }
}

impl<T: Real> HeisenbergChart<T> {
    pub fn center(&self) -> &AmbientPoint<T> {
        &self.center
    }

    pub fn frame(&self) -> &CMatrix<T> {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// The chart map; fails when `‖w‖ ≥` [`CHART_RADIUS`].
    pub fn point(&self, theta: T, w: &[Cx<T>]) -> Result<AmbientPoint<T>> {
        let d = self.dim();
        if w.len() != d {
            return Err(Error::Dimension {
                expected: d,
                got: w.len(),
            });
        }
        let nw = norm(w);
        if nw >= T::lit(CHART_RADIUS) {
            return Err(Error::OutOfChart {
                norm: nw.as_f64(),
                radius: CHART_RADIUS,
            });
        }
        let s = T::one() / (T::one() + nw * nw).sqrt();
        let ph = Cx::from_polar(s, theta);
        let z = (0..=d)
            .map(|i| {
                let mut acc = self.frame[(i, 0)];
                for (j, wj) in w.iter().enumerate() {
                    acc = acc + self.frame[(i, j + 1)] * wj;
                }
                acc * ph
            })
            .collect();
        Ok(AmbientPoint::from_trusted(z))
    }

    /// Inverse of [`Self::point`]: returns `(θ, w)` for a point with
    /// `⟨y, center⟩ ≠ 0`.
    pub fn coordinates(&self, y: &AmbientPoint<T>) -> Result<(T, Vec<Cx<T>>)> {
        let c = self.frame_coefficients(&y.z);
        if c[0].norm() <= T::tol(1e-12) {
            return Err(Error::OutOfChart {
                norm: f64::INFINITY,
                radius: CHART_RADIUS,
            });
        }
        let theta = c[0].arg();
        let w: Vec<Cx<T>> = c[1..].iter().map(|cj| cj / c[0]).collect();
        Ok((theta, w))
    }

    /// Coefficients `U† v`.
    pub fn frame_coefficients(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        let n = self.dim() + 1;
        (0..n)
            .map(|j| {
                (0..n).fold(Cx::new(T::zero(), T::zero()), |acc, i| {
                    acc + self.frame[(i, j)].conj() * v[i]
                })
            })
            .collect()
    }

    /// The horizontal vector at the center with chart coordinates `w`.
    pub fn horizontal_vector(&self, w: &[Cx<T>]) -> Vec<Cx<T>> {
        let n = self.dim() + 1;
        (0..n)
            .map(|i| {
                w.iter()
                    .enumerate()
                    .fold(Cx::new(T::zero(), T::zero()), |acc, (j, wj)| {
                        acc + self.frame[(i, j + 1)] * wj
                    })
            })
            .collect()
    }

    /// Chart coordinates of a horizontal vector at the center.
    pub fn chart_coordinates_of(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        self.frame_coefficients(v)[1..].to_vec()
    }

    /// Finite-difference defect of HLC axiom (2): the partial derivatives of
    /// the chart at the center, along `Re w_j` and `Im w_j`, must form a
    /// Fubini–Study orthonormal frame with `∂_{Im w_j} = J ∂_{Re w_j}`.
    pub fn frame_defect(&self) -> T {
        let d = self.dim();
        let h = T::lit(FD_STEP);
        let zero = vec![Cx::new(T::zero(), T::zero()); d];
        let mut derivs = Vec::with_capacity(2 * d);
        for imag in [false, true] {
            for j in 0..d {
                let mut wp = zero.clone();
                let mut wm = zero.clone();
                let dir = if imag { Cx::new(T::zero(), h) } else { Cx::new(h, T::zero()) };
                wp[j] = dir;
                wm[j] = -dir;
                let p = self.point(T::zero(), &wp).expect("inside chart");
                let m = self.point(T::zero(), &wm).expect("inside chart");
                let dv: Vec<Cx<T>> = p
                    .z
                    .iter()
                    .zip(&m.z)
                    .map(|(a, b)| (a - b).unscale(h + h))
                    .collect();
                derivs.push(dv);
            }
        }
        let mut defect = T::zero();
        for a in 0..2 * d {
            for b in 0..2 * d {
                let g = fs_metric(&self.center, &derivs[a], &derivs[b]);
                let target = if a == b { T::one() } else { T::zero() };
                defect = defect.max((g - target).abs());
            }
        }
        for j in 0..d {
            let jr: Vec<Cx<T>> = derivs[j].iter().map(|c| c * i_unit::<T>()).collect();
            let diff = horizontal_part(
                &self.center,
                &jr.iter().zip(&derivs[d + j]).map(|(a, b)| a - b).collect::<Vec<_>>(),
            );
            defect = defect.max(norm(&diff));
        }
        defect
    }
}

/// Decomposition `v = v_h + v_v + v_t` of a tangent vector to `M` at a point
/// of `M′`, relative to the orbit direction `ξ_M` and its rotation `J ξ_M`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentSplit<T: Real> {
    /// Horizontal remainder (orthogonal to `ξ_M` and `J ξ_M`).
    pub hor: Vec<Cx<T>>,
    /// Coordinate along the unit orbit direction `ξ̂ = ξ_M/‖ξ_M‖`.
    pub ver: T,
    /// Coordinate along `J ξ̂`.
    pub trasv: T,
    /// The unit orbit direction `ξ̂` at the base point.
    pub orbit_direction: Vec<Cx<T>>,
    pub base: AmbientPoint<T>,
}

impl<T: Real> TangentSplit<T> {
    pub fn ver_vector(&self) -> Vec<Cx<T>> {
        self.orbit_direction.iter().map(|c| c.scale(self.ver)).collect()
    }

    pub fn trasv_vector(&self) -> Vec<Cx<T>> {
        self.orbit_direction
            .iter()
            .map(|c| c * i_unit::<T>() * self.trasv)
            .collect()
    }

    /// `v_h + v_v + v_t`.
    pub fn recombine(&self) -> Vec<Cx<T>> {
        let v = self.ver_vector();
        let t = self.trasv_vector();
        self.hor
            .iter()
            .zip(v.iter().zip(&t))
            .map(|(h, (a, b))| h + a + b)
            .collect()
    }
}

/// Splits a tangent vector to `M` (given by its horizontal lift at `x`) at a
/// point of the zero locus `M′`.
pub fn tangent_split<T: Real>(
    action: &CircleAction,
    x: &AmbientPoint<T>,
    v: &[Cx<T>],
) -> Result<TangentSplit<T>> {
    let phi = action.moment_map(x);
    if phi.abs() > T::tol(1e-8) {
        return Err(Error::OffZeroLocus { phi: phi.as_f64() });
    }
    if v.len() != x.z.len() {
        return Err(Error::Dimension {
            expected: x.z.len(),
            got: v.len(),
        });
    }
    let xi = action.xi_m(x);
    let nxi = norm(&xi);
    if nxi <= T::tol(1e-12) {
        return Err(Error::DegenerateAction(
            "the action vector field vanishes at the base point".into(),
        ));
    }
    let unit: Vec<Cx<T>> = xi.iter().map(|c| c.unscale(nxi)).collect();
    let vh = horizontal_part(x, v);
    let c = herm(&vh, &unit);
    let ver = c.re;
    let trasv = c.im;
    let hor = vh
        .iter()
        .zip(&unit)
        .map(|(a, u)| a - u * c)
        .collect();
    Ok(TangentSplit {
        hor,
        ver,
        trasv,
        orbit_direction: unit,
        base: x.clone(),
    })
}

/// Distance proxy `|Φ(x)| / (p_max − p_min)` to `X′`.
///
/// The denominator bounds the gradient of `Φ` for the round metric, so the
/// proxy is a lower bound for the great-circle distance to the zero locus.
pub fn dist_to_zero_locus<T: Real>(x: &AmbientPoint<T>, action: &CircleAction) -> T {
    action.moment_map(x).abs() / T::lit(action.weight_spread() as f64)
}
