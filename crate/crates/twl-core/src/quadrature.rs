//! Gauss–Legendre rules, collapsed-coordinate simplex rules and integration
//! over the sphere `X` in simplex × torus coordinates.

use crate::scalar::{Cx, Real};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let nt = T::count(n);
    let half = (n + 1) / 2;
    for i in 0..half {
        let mut z = (T::PI() * (T::count(i) + T::lit(0.75)) / (nt + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z = z - dz;
            if dz.abs() <= T::epsilon() * T::lit(4.0) {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        let wi = T::lit(2.0) / ((T::one() - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative<T: Real>(n: usize, z: T) -> (T, T) {
    let (mut p0, mut p1) = (T::one(), z);
    for k in 2..=n {
        let kt = T::count(k);
        let p2 = ((T::lit(2.0) * kt - T::one()) * z * p1 - (kt - T::one()) * p0) / kt;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (T::one(), T::zero());
    }
    let nt = T::count(n);
    let d = nt * (z * p1 - p0) / (z * z - T::one());
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on<T: Real>(n: usize, a: T, b: T) -> (Vec<T>, Vec<T>) {
    let (x, w) = gauss_legendre::<T>(n);
    let h = (b - a) / T::lit(2.0);
    let m = (a + b) / T::lit(2.0);
    (
        x.iter().map(|&t| m + h * t).collect(),
        w.iter().map(|&t| t * h).collect(),
    )
}

/// Tensor-product rule on the standard simplex `{w_1..w_d ≥ 0, Σ ≤ 1}` via
/// collapsed (Duffy) coordinates. Each node stores all `d+1` barycentric
/// coordinates `w_0 = 1 - Σ_{j≥1} w_j`; weights integrate Lebesgue measure
/// in `(w_1, …, w_d)` and sum to `1/d!`.
#[derive(Clone, Debug)]
pub struct SimplexRule<T: Real> {
    pub nodes: Vec<Vec<T>>,
    pub weights: Vec<T>,
}

impl<T: Real> SimplexRule<T> {
    pub fn new(d: usize, n: usize) -> Self {
        assert!(d >= 1, "simplex dimension must be positive");
        let (u, wu) = gauss_legendre_on::<T>(n, T::zero(), T::one());
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut idx = vec![0usize; d];
        loop {
            let mut rest = T::one();
            let mut wt = T::one();
            let mut w = vec![T::zero(); d + 1];
            for (level, &i) in idx.iter().enumerate() {
                w[level + 1] = rest * u[i];
                wt = wt * wu[i] * rest;
                rest = rest * (T::one() - u[i]);
            }
            w[0] = rest;
            nodes.push(w);
            weights.push(wt);
            let mut pos = d;
            loop {
                if pos == 0 {
                    return Self { nodes, weights };
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < n {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }
}

/// Iterates over the uniform torus grid `(2π j_0/N, …, 2π j_d/N)`, calling
/// `f` with the phase factors `e^{iφ_j}`.
pub fn for_each_torus_point<T: Real>(angles: usize, n: usize, mut f: impl FnMut(&[Cx<T>])) {
    let roots: Vec<Cx<T>> = (0..n)
        .map(|j| Cx::from_polar(T::one(), T::TAU() * T::count(j) / T::count(n)))
        .collect();
    let mut idx = vec![0usize; angles];
    let mut phases = vec![roots[0]; angles];
    loop {
        for (p, &i) in phases.iter_mut().zip(&idx) {
            *p = roots[i];
        }
        f(&phases);
        let mut pos = angles;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// `∫_X F dV_X` with `dV_X = (1/2π) α ∧ π*dV_M`, evaluated as
/// `π^d ∫_simplex ⟨F⟩_torus dw` using `n_simplex` Gauss nodes per collapsed
/// coordinate and `n_phase` uniform nodes per torus angle.
pub fn integrate_over_x<T: Real>(
    d: usize,
    n_simplex: usize,
    n_phase: usize,
    mut f: impl FnMut(&[Cx<T>]) -> Cx<T>,
) -> Cx<T> {
    let rule = SimplexRule::<T>::new(d, n_simplex);
    let torus_weight = T::one() / T::count(n_phase).powi((d + 1) as i32);
    let mut total = Cx::new(T::zero(), T::zero());
    let mut z = vec![Cx::new(T::zero(), T::zero()); d + 1];
    for (w, &wt) in rule.nodes.iter().zip(&rule.weights) {
        let radii: Vec<T> = w.iter().map(|&x| x.max(T::zero()).sqrt()).collect();
        let mut acc = Cx::new(T::zero(), T::zero());
        for_each_torus_point::<T>(d + 1, n_phase, |ph| {
            for j in 0..=d {
                z[j] = ph[j].scale(radii[j]);
            }
            acc = acc + f(&z);
        });
        total = total + acc.scale(wt * torus_weight);
    }
    total.scale(T::PI().powi(d as i32))
}
