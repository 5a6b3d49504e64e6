use super::symbol::SymbolFunction;
use crate::error::{Error, Result};
use crate::hardy::{ln_factorial, ln_monomial_norm_sqr, monomial_norms, HardyBlock};
use crate::linalg::CMatrix;
use crate::quadrature::{for_each_torus_point, SimplexRule};
use crate::scalar::{Cx, Real};
use std::collections::BTreeSet;

/// Largest tolerated quadrature error estimate for a matrix entry.
pub const QUADRATURE_TOLERANCE: f64 = 1e-9;

/// How the compressed multiplication operator is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Backend {
    /// Closed-form monomial integrals of the `(z, z̄)` expansion.
    Exact,
    /// Simplex Gauss–Legendre nodes times a uniform torus grid.
    Quadrature,
    /// Exact whenever the symbol has a finite `(z, z̄)` expansion.
    #[default]
    Auto,
}

/// `T_k = k·P_k M_f P_k` in the orthonormal monomial basis of `H(X)_k`.
#[derive(Clone, Debug)]
pub struct ToeplitzBlock<T: Real> {
    pub k: usize,
    pub d: usize,
    pub matrix: CMatrix<T>,
    /// `‖M − M†‖_max` before symmetrization.
    pub hermiticity_defect: T,
    pub backend: Backend,
    pub symbol: String,
}

impl<T: Real> ToeplitzBlock<T> {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

/// `∫_X z^α z̄^β dV_X`.
pub fn exact_monomial_integral(alpha: &[u32], beta: &[u32]) -> Result<f64> {
    if alpha.len() != beta.len() {
        return Err(Error::Dimension {
            expected: alpha.len(),
            got: beta.len(),
        });
    }
    let (l, r): (u32, u32) = (alpha.iter().sum(), beta.iter().sum());
    if l != r {
        return Err(Error::DegreeMismatch {
            left: l as usize,
            right: r as usize,
        });
    }
    if alpha != beta {
        return Ok(0.0);
    }
    Ok(ln_monomial_norm_sqr(alpha).exp())
}

fn exact_matrix(f: &SymbolFunction, block: &HardyBlock<f64>) -> CMatrix<f64> {
    let n = block.dim();
    let k = block.degree();
    let d = block.d();
    let mut m = CMatrix::zeros(n, n);
    for (ia, alpha) in block.multi_indices().iter().enumerate() {
        for ((a, b), c) in &f.polynomial().terms {
            let shifted: Vec<i64> = (0..=d)
                .map(|j| alpha[j] as i64 + a[j] as i64 - b[j] as i64)
                .collect();
            if shifted.iter().any(|&x| x < 0) {
                continue;
            }
            let beta: Vec<u32> = shifted.iter().map(|&x| x as u32).collect();
            let ib = block.index_of(&beta).expect("degree is preserved");
            if a.iter().all(|&x| x == 0) && b.iter().all(|&x| x == 0) {
                m[(ib, ia)] += c;
                continue;
            }
            let top: Vec<u32> = alpha.iter().zip(a).map(|(x, y)| x + y).collect();
            let deg_a: usize = a.iter().map(|&x| x as usize).sum();
            // π^d (α+a)!/(k+|a|+d)! divided by ‖z^α‖‖z^β‖
            let ln_val = top.iter().map(|&x| ln_factorial(x as usize)).sum::<f64>()
                - ln_factorial(k + deg_a + d)
                + d as f64 * std::f64::consts::PI.ln()
                - 0.5 * (block.ln_norm_sqr(ia) + block.ln_norm_sqr(ib));
            m[(ib, ia)] += c * ln_val.exp();
        }
    }
    m
}

fn quadrature_matrix(
    f: &SymbolFunction,
    block: &HardyBlock<f64>,
    n_simplex: usize,
) -> CMatrix<f64> {
    let d = block.d();
    let n = block.dim();
    let freq = f.polynomial().max_frequency() as usize;
    let n_phase = 2 * freq + 2;
    let differences: BTreeSet<Vec<i64>> = f
        .polynomial()
        .terms
        .keys()
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| *x as i64 - *y as i64).collect())
        .collect();
    let differences: Vec<Vec<i64>> = differences.into_iter().collect();
    let rule = SimplexRule::<f64>::new(d, n_simplex);
    let torus_weight = 1.0 / (n_phase as f64).powi((d + 1) as i32);
    let mut m = CMatrix::zeros(n, n);
    let mut z = vec![Cx::new(0.0, 0.0); d + 1];
    let mut coeffs = vec![Cx::new(0.0, 0.0); differences.len()];
    for (w, &wt) in rule.nodes.iter().zip(&rule.weights) {
        let radii: Vec<f64> = w.iter().map(|&x| x.max(0.0).sqrt()).collect();
        coeffs.iter_mut().for_each(|c| *c = Cx::new(0.0, 0.0));
        for_each_torus_point::<f64>(d + 1, n_phase, |ph| {
            for j in 0..=d {
                z[j] = ph[j] * radii[j];
            }
            let value = f.eval::<f64>(&z);
            for (c, diff) in coeffs.iter_mut().zip(&differences) {
                // e^{-i m·φ}
                let mut e = Cx::new(1.0, 0.0);
                for (p, &mj) in ph.iter().zip(diff) {
                    let q = if mj >= 0 { p.conj() } else { *p };
                    for _ in 0..mj.unsigned_abs() {
                        e *= q;
                    }
                }
                *c += e * value;
            }
        });
        let ln_w: Vec<f64> = w.iter().map(|&x| x.ln()).collect();
        for (ia, alpha) in block.multi_indices().iter().enumerate() {
            for (c, diff) in coeffs.iter().zip(&differences) {
                let shifted: Vec<i64> = alpha.iter().zip(diff).map(|(&a, m)| a as i64 + m).collect();
                if shifted.iter().any(|&x| x < 0) {
                    continue;
                }
                let beta: Vec<u32> = shifted.iter().map(|&x| x as u32).collect();
                let Some(ib) = block.index_of(&beta) else { continue };
                let mut ln_mod = -0.5 * (block.ln_norm_sqr(ia) + block.ln_norm_sqr(ib));
                let mut vanishes = false;
                for j in 0..=d {
                    let e = alpha[j] + beta[j];
                    if e > 0 {
                        if w[j] <= 0.0 {
                            vanishes = true;
                            break;
                        }
                        ln_mod += 0.5 * e as f64 * ln_w[j];
                    }
                }
                if vanishes {
                    continue;
                }
                m[(ib, ia)] += c * (wt * torus_weight * ln_mod.exp());
            }
        }
    }
    let scale = std::f64::consts::PI.powi(d as i32);
    CMatrix::from_fn(n, n, |i, j| m[(i, j)] * scale)
}

fn quadrature_nodes(f: &SymbolFunction, k: usize) -> usize {
    let half_degree = f.polynomial().degree() as usize / 2;
    (k + half_degree + f.dim()) / 2 + 2
}

/// The compressed multiplication operator `P_k M_f P_k` (without the factor `k`).
pub fn multiplication_matrix(
    f: &SymbolFunction,
    k: usize,
    backend: Backend,
) -> Result<(CMatrix<f64>, f64, Backend)> {
    let block = monomial_norms::<f64>(k, f.dim())?;
    let used = match backend {
        Backend::Auto => Backend::Exact,
        b => b,
    };
    let mut m = match used {
        Backend::Exact => exact_matrix(f, &block),
        _ => {
            let n = quadrature_nodes(f, k);
            let coarse = quadrature_matrix(f, &block, n);
            let fine = quadrature_matrix(f, &block, n + 4);
            let mut estimate = 0.0f64;
            for i in 0..block.dim() {
                for j in 0..block.dim() {
                    estimate = estimate.max((coarse[(i, j)] - fine[(i, j)]).norm());
                }
            }
            if !(estimate <= QUADRATURE_TOLERANCE) {
                return Err(Error::Quadrature { k, estimate });
            }
            fine
        }
    };
    let defect = m.hermitian_defect();
    if defect > 0.0 {
        log::debug!("block k = {k}: hermiticity defect {defect:e} before symmetrization");
    }
    m.symmetrize();
    Ok((m, defect, used))
}

/// Assembles `T_k` for the reduced symbol `f`.
pub fn assemble_block<T: Real>(
    f: &SymbolFunction,
    k: usize,
    backend: Backend,
) -> Result<ToeplitzBlock<T>> {
    let (m, defect, used) = multiplication_matrix(f, k, backend)?;
    let kk = k as f64;
    let matrix = CMatrix::from_fn(m.rows(), m.cols(), |i, j| {
        let v = m[(i, j)] * kk;
        Cx::new(T::lit(v.re), T::lit(v.im))
    });
    Ok(ToeplitzBlock {
        k,
        d: f.dim(),
        matrix,
        hermiticity_defect: T::lit(defect),
        backend: used,
        symbol: f.text().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigen;
    use crate::toeplitz::parse_symbol;
    use std::f64::consts::PI;

    #[test]
    fn monomial_integrals() {
        assert!((exact_monomial_integral(&[0, 0], &[0, 0]).unwrap() - PI).abs() < 1e-14);
        assert!((exact_monomial_integral(&[0, 0, 0], &[0, 0, 0]).unwrap() - PI * PI / 2.0).abs() < 1e-13);
        assert_eq!(exact_monomial_integral(&[2, 0], &[1, 1]).unwrap(), 0.0);
        assert!((exact_monomial_integral(&[1, 1], &[1, 1]).unwrap() - PI / 6.0).abs() < 1e-14);
        assert_eq!(
            exact_monomial_integral(&[1, 0], &[1, 1]),
            Err(Error::DegreeMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    fn constant_symbol_gives_k_identity() {
        let f = parse_symbol("1", 2).unwrap();
        for k in [0usize, 1, 5] {
            let b = assemble_block::<f64>(&f, k, Backend::Auto).unwrap();
            for i in 0..b.dim() {
                for j in 0..b.dim() {
                    let t = if i == j { k as f64 } else { 0.0 };
                    assert!((b.matrix[(i, j)] - Cx::new(t, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn w1_block_is_diagonal_with_closed_form_entries() {
        let g = parse_symbol("1 + w1", 1).unwrap();
        let k = 9;
        let (m, _, _) = multiplication_matrix(&g, k, Backend::Exact).unwrap();
        for b in 0..=k {
            let expected = 1.0 + (b as f64 + 1.0) / (k as f64 + 2.0);
            assert!((m[(b, b)].re - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn backends_agree() {
        for (text, d) in [
            ("1 + 0.5*w1", 1usize),
            ("2 + re_01", 1),
            ("2 + im_01 + w0*w1", 1),
            ("3 + w1 - w2 + re_12 + 0.5*im_02*w0", 2),
        ] {
            let f = parse_symbol(text, d).unwrap();
            let ks: &[usize] = if d == 1 { &[1, 7, 20, 40] } else { &[1, 4, 9] };
            for &k in ks {
                let (e, _, _) = multiplication_matrix(&f, k, Backend::Exact).unwrap();
                let (q, defect, _) = multiplication_matrix(&f, k, Backend::Quadrature).unwrap();
                assert!(defect < 1e-13, "{text} k={k} defect {defect:e}");
                for i in 0..e.rows() {
                    for j in 0..e.cols() {
                        assert!(
                            (e[(i, j)] - q[(i, j)]).norm() < 1e-8,
                            "{text} k={k} ({i},{j})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn spectrum_lies_in_symbol_range() {
        let f = parse_symbol("2 + re_01 + 0.3*w0", 1).unwrap();
        for k in [1usize, 6, 15] {
            let b = assemble_block::<f64>(&f, k, Backend::Auto).unwrap();
            let e = hermitian_eigen(&b.matrix).unwrap();
            let (lo, hi) = f.bounds();
            for v in e.values {
                assert!(v >= k as f64 * lo - 1e-9 && v <= k as f64 * hi + 1e-9);
            }
        }
    }

    #[test]
    fn f32_assembly() {
        let f = parse_symbol("1 + 0.5*w1", 1).unwrap();
        let b = assemble_block::<f32>(&f, 4, Backend::Auto).unwrap();
        assert!((b.matrix[(4, 4)].re - 4.0 * (1.0 + 0.5 * 5.0 / 6.0)).abs() < 1e-5);
    }
}
