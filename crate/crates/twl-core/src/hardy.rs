//! Hardy-space isotypes `H(X)_k` spanned by degree-`k` monomials, their
//! exact `L²(dV_X)` norms, the Szegő block kernels and the universal
//! exponent `ψ₂`.

use crate::error::{Error, Result};
use crate::geometry::{heisenberg_chart, AmbientPoint};
use crate::scalar::{herm, norm_sqr, Cx, Real};
use std::collections::HashMap;
use std::sync::OnceLock;

const LN_FACTORIAL_TABLE: usize = 8192;

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACTORIAL_TABLE);
        let mut acc = 0.0f64;
        t.push(0.0);
        for i in 1..LN_FACTORIAL_TABLE {
            acc += (i as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln n!`.
pub fn ln_factorial(n: usize) -> f64 {
    let t = ln_factorial_table();
    if n < t.len() {
        t[n]
    } else {
        t[t.len() - 1] + ((t.len())..=n).map(|i| (i as f64).ln()).sum::<f64>()
    }
}

/// `binomial(n, k)` as an integer.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r as usize
}

/// All `α ∈ N^{d+1}` with `|α| = k`, ordered by decreasing `α_0`, then
/// recursively by decreasing later entries. For `d = 1` the `b`-th entry is
/// `(k − b, b)`.
pub fn multi_indices(k: usize, d: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::with_capacity(binomial(k + d, d));
    let mut cur = vec![0u32; d + 1];
    fn rec(pos: usize, remaining: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos + 1 == cur.len() {
            cur[pos] = remaining;
            out.push(cur.clone());
            return;
        }
        for a in (0..=remaining).rev() {
            cur[pos] = a;
            rec(pos + 1, remaining - a, cur, out);
        }
    }
    rec(0, k as u32, &mut cur, &mut out);
    out
}

/// `ln ‖z^α‖² = ln(π^d α!/(|α|+d)!)`.
pub fn ln_monomial_norm_sqr(alpha: &[u32]) -> f64 {
    let d = alpha.len() - 1;
    let k: usize = alpha.iter().map(|&a| a as usize).sum();
    d as f64 * std::f64::consts::PI.ln() + alpha.iter().map(|&a| ln_factorial(a as usize)).sum::<f64>()
        - ln_factorial(k + d)
}

/// The normalized monomial `z^α/‖z^α‖` at `z`, evaluated in log-modulus /
/// phase form.
pub fn normalized_monomial<T: Real>(alpha: &[u32], ln_norm_sqr: f64, z: &[Cx<T>]) -> Cx<T> {
    let mut ln_mod = -0.5 * ln_norm_sqr;
    let mut phase = T::zero();
    for (&a, zj) in alpha.iter().zip(z) {
        if a == 0 {
            continue;
        }
        let r = zj.norm();
        if r == T::zero() {
            return Cx::new(T::zero(), T::zero());
        }
        ln_mod += a as f64 * r.as_f64().ln();
        phase = phase + T::count(a as usize) * zj.arg();
    }
    Cx::from_polar(T::lit(ln_mod.exp()), phase)
}

/// Orthonormal monomial basis of `H(X)_k`.
#[derive(Clone, Debug)]
pub struct HardyBlock<T: Real> {
    k: usize,
    d: usize,
    multi_indices: Vec<Vec<u32>>,
    ln_norms_sqr: Vec<f64>,
    norms_sqr: Vec<T>,
    lookup: HashMap<Vec<u32>, usize>,
}

/// The block `H(X)_k` with the closed-form norms `π^d α!/(k+d)!`.
pub fn monomial_norms<T: Real>(k: usize, d: usize) -> Result<HardyBlock<T>> {
    if d == 0 {
        return Err(Error::Precondition("d must be at least 1".into()));
    }
    let multi_indices = multi_indices(k, d);
    let ln_norms_sqr: Vec<f64> = multi_indices.iter().map(|a| ln_monomial_norm_sqr(a)).collect();
    let norms_sqr = ln_norms_sqr.iter().map(|&l| T::lit(l.exp())).collect();
    let lookup = multi_indices
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), i))
        .collect();
    Ok(HardyBlock {
        k,
        d,
        multi_indices,
        ln_norms_sqr,
        norms_sqr,
        lookup,
    })
}

impl<T: Real> HardyBlock<T> {
    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.multi_indices.len()
    }

    pub fn multi_indices(&self) -> &[Vec<u32>] {
        &self.multi_indices
    }

    pub fn multi_index(&self, i: usize) -> &[u32] {
        &self.multi_indices[i]
    }

    /// `‖z^α‖²`; underflows to zero for very large degrees, where the log
    /// form [`Self::ln_norm_sqr`] should be used instead.
    pub fn norm_sqr(&self, i: usize) -> T {
        self.norms_sqr[i]
    }

    pub fn ln_norm_sqr(&self, i: usize) -> f64 {
        self.ln_norms_sqr[i]
    }

    pub fn index_of(&self, alpha: &[u32]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    /// `s_α(x) = z^α/‖z^α‖`.
    pub fn evaluate_section(&self, i: usize, x: &AmbientPoint<T>) -> Cx<T> {
        normalized_monomial(&self.multi_indices[i], self.ln_norms_sqr[i], x.coords())
    }

    /// All basis sections at `x`.
    pub fn evaluate_all(&self, x: &AmbientPoint<T>) -> Vec<Cx<T>> {
        (0..self.dim()).map(|i| self.evaluate_section(i, x)).collect()
    }
}

/// `ln(binom(k+d, d)·d!/π^d) = ln((k+d)!/(k! π^d))`.
pub fn ln_szego_constant(k: usize, d: usize) -> f64 {
    ln_factorial(k + d) - ln_factorial(k) - d as f64 * std::f64::consts::PI.ln()
}

/// `Π_k(x, y) = binom(k+d, d)·(d!/π^d)·⟨x, y⟩^k`.
pub fn szego_block<T: Real>(k: usize, x: &AmbientPoint<T>, y: &AmbientPoint<T>) -> Cx<T> {
    let d = x.dim();
    let c = ln_szego_constant(k, d);
    if k == 0 {
        return Cx::new(T::lit(c.exp()), T::zero());
    }
    let p = herm(x.coords(), y.coords());
    let r = p.norm();
    if r == T::zero() {
        return Cx::new(T::zero(), T::zero());
    }
    let ln_mod = c + k as f64 * r.as_f64().ln();
    Cx::from_polar(T::lit(ln_mod.exp()), p.arg() * T::count(k))
}

/// Orientation of `ω₀` in `ψ₂`; only the phase of near-diagonal
/// predictions depends on it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OmegaSign {
    #[default]
    Standard,
    Reversed,
}

impl OmegaSign {
    pub fn factor<T: Real>(self) -> T {
        match self {
            OmegaSign::Standard => T::one(),
            OmegaSign::Reversed => -T::one(),
        }
    }
}

/// `ω₀(u, v) = Im Σ ū_j v_j`, the standard symplectic form of `C^d`.
pub fn omega0<T: Real>(u: &[Cx<T>], v: &[Cx<T>]) -> T {
    herm(v, u).im
}

/// `ψ₂(u, v) = −i ω₀(u, v) − ½‖u − v‖²`.
pub fn psi2<T: Real>(u: &[Cx<T>], v: &[Cx<T>]) -> Cx<T> {
    psi2_oriented(u, v, OmegaSign::Standard)
}

pub fn psi2_oriented<T: Real>(u: &[Cx<T>], v: &[Cx<T>], sign: OmegaSign) -> Cx<T> {
    let diff: Vec<Cx<T>> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    Cx::new(
        -T::lit(0.5) * norm_sqr(&diff),
        -sign.factor::<T>() * omega0(u, v),
    )
}

/// Near-diagonal comparison of `Π_k(x + u/√k, x + v/√k)` (Heisenberg chart
/// at `x`) with the universal model `(k/π)^d e^{ψ₂(u, v)}`.
pub fn near_diagonal_szego_check<T: Real>(
    k: usize,
    x: &AmbientPoint<T>,
    u: &[Cx<T>],
    v: &[Cx<T>],
    sign: OmegaSign,
) -> Result<(Cx<T>, Cx<T>)> {
    if k == 0 {
        return Err(Error::Precondition("k must be positive".into()));
    }
    let chart = heisenberg_chart(x);
    let s = T::one() / T::count(k).sqrt();
    let su: Vec<Cx<T>> = u.iter().map(|c| c.scale(s)).collect();
    let sv: Vec<Cx<T>> = v.iter().map(|c| c.scale(s)).collect();
    let xu = chart.point(T::zero(), &su)?;
    let xv = chart.point(T::zero(), &sv)?;
    let measured = szego_block(k, &xu, &xv);
    let d = x.dim() as i32;
    let predicted = psi2_oriented(u, v, sign).exp().scale((T::count(k) / T::PI()).powi(d));
    Ok((measured, predicted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{gaussian_vector, random_point, seeded_rng};
    use std::f64::consts::PI;

    #[test]
    fn block_dimension_and_ordering() {
        assert_eq!(multi_indices(3, 1), vec![vec![3, 0], vec![2, 1], vec![1, 2], vec![0, 3]]);
        for d in 1..4 {
            for k in 0..8 {
                assert_eq!(multi_indices(k, d).len(), binomial(k + d, d));
            }
        }
    }

    #[test]
    fn closed_form_norms() {
        let b0 = monomial_norms::<f64>(0, 1).unwrap();
        assert!((b0.norm_sqr(0) - PI).abs() < 1e-14);
        let b2 = monomial_norms::<f64>(2, 1).unwrap();
        let i = b2.index_of(&[1, 1]).unwrap();
        assert!((b2.norm_sqr(i) - PI / 6.0).abs() < 1e-15);
        // log-domain evaluation survives degrees far past factorial overflow
        let big = monomial_norms::<f64>(1500, 1).unwrap();
        assert!(big.ln_norm_sqr(750).is_finite());
    }

    #[test]
    fn sections_are_fiber_equivariant() {
        let mut rng = seeded_rng(4);
        let x = random_point::<f64, _>(2, &mut rng);
        let block = monomial_norms::<f64>(5, 2).unwrap();
        let theta = 0.37;
        let y = x.fiber_rotate(theta);
        for i in 0..block.dim() {
            let a = block.evaluate_section(i, &y);
            let b = block.evaluate_section(i, &x) * Cx::from_polar(1.0, 5.0 * theta);
            assert!((a - b).norm() < 1e-12 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn block_kernel_equals_basis_sum_and_is_constant_on_diagonal() {
        let mut rng = seeded_rng(5);
        for d in 1..=3 {
            for k in [0usize, 1, 4, 11, 20] {
                let block = monomial_norms::<f64>(k, d).unwrap();
                let x = random_point::<f64, _>(d, &mut rng);
                let y = random_point::<f64, _>(d, &mut rng);
                let sx = block.evaluate_all(&x);
                let sy = block.evaluate_all(&y);
                let direct: Cx<f64> = sx.iter().zip(&sy).map(|(a, b)| a * b.conj()).sum();
                let closed = szego_block(k, &x, &y);
                assert!((direct - closed).norm() < 1e-10 * (1.0 + closed.norm()));
                let diag: f64 = sx.iter().map(|c| c.norm_sqr()).sum();
                let expected = ln_szego_constant(k, d).exp();
                assert!((diag - expected).abs() < 1e-12 * expected);
            }
        }
        let x = AmbientPoint::<f64>::from_real(&[0.6, 0.8]).unwrap();
        assert!((szego_block(7, &x, &x).re - 8.0 / PI).abs() < 1e-13);
    }

    #[test]
    fn psi2_basic_identities() {
        let mut rng = seeded_rng(6);
        for _ in 0..1000 {
            let u = gaussian_vector::<f64, _>(2, &mut rng);
            let v = gaussian_vector::<f64, _>(2, &mut rng);
            assert_eq!(psi2(&u, &u), Cx::new(0.0, 0.0));
            let p = psi2(&u, &v);
            let q = psi2(&v, &u);
            assert_eq!(p.re, q.re);
            assert_eq!(p.im, -q.im);
            assert!(p.re < 0.0);
        }
        let u = vec![Cx::new(0.3, -1.0), Cx::new(2.0, 0.5)];
        let zero = vec![Cx::new(0.0, 0.0); 2];
        assert!((psi2(&u, &zero) - Cx::new(-0.5 * norm_sqr(&u), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn near_diagonal_ratio_at_origin() {
        let x = AmbientPoint::<f64>::from_real(&[1.0, 1.0]).unwrap();
        let zero = vec![Cx::new(0.0, 0.0)];
        for k in [10usize, 100, 1000] {
            let (m, p) = near_diagonal_szego_check(k, &x, &zero, &zero, OmegaSign::Standard).unwrap();
            assert!(((m / p).re - (k as f64 + 1.0) / k as f64).abs() < 1e-12);
        }
        let far = vec![Cx::new(2.0, 0.0)];
        assert!(matches!(
            near_diagonal_szego_check(2, &x, &far, &zero, OmegaSign::Standard),
            Err(Error::OutOfChart { .. })
        ));
    }
}
