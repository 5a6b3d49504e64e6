//! Per-block, per-isotype eigendecompositions of `T_k`.

use crate::error::{Error, Result};
use crate::hardy::monomial_norms;
use crate::linalg::{hermitian_eigen, sparsity_components, CMatrix};
use crate::scalar::{Cx, Real};
use crate::symmetry::CircleAction;
use crate::toeplitz::{assemble_block, Backend, SymbolFunction, ToeplitzBlock};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Relative residual required of every eigenpair: `‖T_k v − λv‖ ≤ 1e−10‖T_k‖`.
pub const RESIDUAL_FACTOR: f64 = 1e-10;

/// One eigenpair `(λ, e)` of `T_k` restricted to an isotype.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SpectrumEntry<T: Real> {
    pub k: u32,
    /// Isotype label; `None` when no action is attached.
    pub varpi: Option<i64>,
    pub lambda: T,
    /// Nonzero coefficients over the orthonormal monomial basis of `H(X)_k`,
    /// indexed as in [`crate::hardy::multi_indices`].
    pub eigvec: Vec<(u32, Cx<T>)>,
}

/// Provenance of a [`SpectrumRecord`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMetadata {
    pub symbol: String,
    pub d: usize,
    pub weights: Option<Vec<i64>>,
    pub k_max: usize,
    /// Isotypes retained; `None` means all.
    pub isotypes: Option<Vec<i64>>,
    /// Largest observed `‖T_k v − λv‖/‖T_k‖`.
    pub residual_bound: f64,
    pub symbol_min: f64,
    pub symbol_max: f64,
}

/// Eigenpairs ordered by `(k, ϖ, λ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SpectrumRecord<T: Real> {
    pub metadata: SpectrumMetadata,
    pub entries: Vec<SpectrumEntry<T>>,
}

/// Options of [`compute_spectrum`].
#[derive(Clone, Debug)]
pub struct SpectrumOptions {
    pub action: Option<CircleAction>,
    pub k_max: usize,
    pub isotypes: Option<Vec<i64>>,
    pub backend: Backend,
    pub parallel: bool,
}

impl SpectrumOptions {
    pub fn new(k_max: usize) -> Self {
        Self {
            action: None,
            k_max,
            isotypes: None,
            backend: Backend::Auto,
            parallel: true,
        }
    }

    pub fn with_action(mut self, action: CircleAction) -> Self {
        self.action = Some(action);
        self
    }

    pub fn with_isotypes(mut self, isotypes: Vec<i64>) -> Self {
        self.isotypes = Some(isotypes);
        self
    }

    pub fn serial(mut self) -> Self {
        self.parallel = false;
        self
    }
}

impl<T: Real> SpectrumRecord<T> {
    pub fn k_max(&self) -> usize {
        self.metadata.k_max
    }

    /// Whether isotype `varpi` (or the full spectrum for `None`) is present.
    pub fn covers(&self, varpi: Option<i64>) -> Result<()> {
        match (varpi, &self.metadata.weights, &self.metadata.isotypes) {
            (None, _, None) => Ok(()),
            (None, _, Some(_)) => Err(Error::Precondition(
                "record keeps only selected isotypes; an isotype must be specified".into(),
            )),
            (Some(v), None, _) => Err(Error::MissingIsotype(v)),
            (Some(v), Some(_), Some(list)) if !list.contains(&v) => Err(Error::MissingIsotype(v)),
            _ => Ok(()),
        }
    }

    /// Entries of the requested isotype (all entries for `None`).
    pub fn select(&self, varpi: Option<i64>) -> impl Iterator<Item = &SpectrumEntry<T>> {
        self.entries
            .iter()
            .filter(move |e| varpi.is_none() || e.varpi == varpi)
    }
}

struct BlockResult<T: Real> {
    entries: Vec<SpectrumEntry<T>>,
    residual: f64,
}

fn residual_of<T: Real>(t: &CMatrix<T>, lambda: T, v: &[(u32, Cx<T>)]) -> T {
    let n = t.rows();
    let mut acc = T::zero();
    for i in 0..n {
        let mut r = Cx::new(T::zero(), T::zero());
        for &(j, c) in v {
            r = r + t[(i, j as usize)] * c;
        }
        if let Some(&(_, c)) = v.iter().find(|(j, _)| *j as usize == i) {
            r = r - c * lambda;
        }
        acc = acc + r.norm_sqr();
    }
    acc.sqrt()
}

/// Relative residual `‖T_k v − λv‖/‖T_k‖` of a stored entry, recomputed
/// from a freshly assembled block.
pub fn entry_residual<T: Real>(f: &SymbolFunction, entry: &SpectrumEntry<T>) -> Result<f64> {
    let block = assemble_block::<T>(f, entry.k as usize, Backend::Auto)?;
    let norm = spectral_norm_bound(&block);
    let r = residual_of(&block.matrix, entry.lambda, &entry.eigvec).as_f64();
    Ok(if norm > 0.0 { r / norm } else { r })
}

/// Relative residuals of several stored entries, assembling each block once.
pub fn entry_residuals<T: Real>(f: &SymbolFunction, entries: &[&SpectrumEntry<T>]) -> Result<Vec<f64>> {
    let mut blocks: std::collections::BTreeMap<u32, (ToeplitzBlock<T>, f64)> = Default::default();
    let mut out = Vec::with_capacity(entries.len());
    for e in entries {
        if !blocks.contains_key(&e.k) {
            let b = assemble_block::<T>(f, e.k as usize, Backend::Auto)?;
            let n = spectral_norm_bound(&b);
            blocks.insert(e.k, (b, n));
        }
        let (b, n) = &blocks[&e.k];
        let r = residual_of(&b.matrix, e.lambda, &e.eigvec).as_f64();
        out.push(if *n > 0.0 { r / n } else { r });
    }
    Ok(out)
}

fn spectral_norm_bound<T: Real>(block: &ToeplitzBlock<T>) -> f64 {
    // the Frobenius norm bounds the spectral norm from above
    let m = &block.matrix;
    let mut acc = 0.0;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            acc += m[(i, j)].norm_sqr().as_f64();
        }
    }
    acc.sqrt()
}

fn solve_block<T: Real>(
    f: &SymbolFunction,
    k: usize,
    opts: &SpectrumOptions,
) -> Result<BlockResult<T>> {
    let block = assemble_block::<T>(f, k, opts.backend)?;
    let hardy = monomial_norms::<T>(k, f.dim())?;
    let groups: Vec<(Option<i64>, Vec<usize>)> = match &opts.action {
        None => vec![(None, (0..hardy.dim()).collect())],
        Some(a) => {
            let mut by_weight: std::collections::BTreeMap<i64, Vec<usize>> = Default::default();
            for i in 0..hardy.dim() {
                by_weight
                    .entry(a.weight_of_monomial(hardy.multi_index(i)))
                    .or_default()
                    .push(i);
            }
            by_weight
                .into_iter()
                .filter(|(w, _)| opts.isotypes.as_ref().map_or(true, |l| l.contains(w)))
                .map(|(w, idx)| (Some(w), idx))
                .collect()
        }
    };
    let matrix_scale = block.matrix.max_abs();
    let threshold = matrix_scale * T::epsilon();
    let mut entries = Vec::new();
    for (varpi, idx) in groups {
        let sub = block.matrix.select(&idx, &idx);
        let mut group_entries = Vec::new();
        for comp in sparsity_components(&sub, threshold) {
            let m = sub.select(&comp, &comp);
            let eig = hermitian_eigen(&m).map_err(|e| Error::Eigensolver {
                k,
                varpi,
                msg: e.to_string(),
            })?;
            for (j, &lambda) in eig.values.iter().enumerate() {
                let eigvec = comp
                    .iter()
                    .enumerate()
                    .map(|(r, &c)| (idx[c] as u32, eig.vectors[(r, j)]))
                    .filter(|(_, c)| c.norm() > T::zero())
                    .collect();
                group_entries.push(SpectrumEntry {
                    k: k as u32,
                    varpi,
                    lambda,
                    eigvec,
                });
            }
        }
        group_entries.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).expect("finite eigenvalue"));
        entries.extend(group_entries);
    }
    let norm = spectral_norm_bound(&block);
    let (lo, hi) = (k as f64 * f.min(), k as f64 * f.max());
    let slack = T::tol(1e-9).as_f64() * (1.0 + hi.abs());
    let mut worst = 0.0f64;
    for e in &entries {
        let r = residual_of(&block.matrix, e.lambda, &e.eigvec).as_f64();
        let rel = if norm > 0.0 { r / norm } else { r };
        worst = worst.max(rel);
        if rel > T::tol(RESIDUAL_FACTOR).as_f64() {
            return Err(Error::Residual {
                k,
                varpi: e.varpi,
                residual: rel,
                bound: T::tol(RESIDUAL_FACTOR).as_f64(),
            });
        }
        let l = e.lambda.as_f64();
        if f.exact_bounds() && (l < lo - slack || l > hi + slack) {
            return Err(Error::Eigensolver {
                k,
                varpi: e.varpi,
                msg: format!("eigenvalue {l} outside [{lo}, {hi}]"),
            });
        }
    }
    Ok(BlockResult {
        entries,
        residual: worst,
    })
}

/// Eigendecomposition of every block `k ≤ k_max`, split by isotype when an
/// action is supplied. Blocks are solved concurrently and gathered in
/// `(k, ϖ)` order.
pub fn compute_spectrum<T: Real>(
    f: &SymbolFunction,
    opts: &SpectrumOptions,
) -> Result<SpectrumRecord<T>> {
    if let Some(a) = &opts.action {
        if a.dim() != f.dim() {
            return Err(Error::Dimension {
                expected: f.dim(),
                got: a.dim(),
            });
        }
        a.check_symbol_invariance(f)?;
    }
    let ks: Vec<usize> = (0..=opts.k_max).collect();
    let results: Vec<Result<BlockResult<T>>> = if opts.parallel {
        ks.par_iter().map(|&k| solve_block(f, k, opts)).collect()
    } else {
        ks.iter().map(|&k| solve_block(f, k, opts)).collect()
    };
    let mut entries = Vec::new();
    let mut residual_bound = 0.0f64;
    for r in results {
        let r = r?;
        residual_bound = residual_bound.max(r.residual);
        entries.extend(r.entries);
    }
    Ok(SpectrumRecord {
        metadata: SpectrumMetadata {
            symbol: f.text().to_string(),
            d: f.dim(),
            weights: opts.action.as_ref().map(|a| a.weights().to_vec()),
            k_max: opts.k_max,
            isotypes: if opts.action.is_some() {
                opts.isotypes.clone()
            } else {
                None
            },
            residual_bound,
            symbol_min: f.min(),
            symbol_max: f.max(),
        },
        entries,
    })
}
