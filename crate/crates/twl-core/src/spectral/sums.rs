//! Counting functions and `χ̂`-smoothed spectral sums over a
//! [`SpectrumRecord`].

use super::cutoff::GoodCutoff;
use super::record::SpectrumRecord;
use crate::error::{Error, Result};
use crate::geometry::AmbientPoint;
use crate::hardy::{binomial, ln_factorial, monomial_norms, HardyBlock};
use crate::scalar::{Cx, Real};
use std::collections::BTreeMap;

/// A truncated spectral sum with a bound on the omitted terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralSum<V> {
    pub value: V,
    pub truncation_error: f64,
}

fn min_eigen_bound<T: Real>(record: &SpectrumRecord<T>, k: usize) -> f64 {
    k as f64 * record.metadata.symbol_min
}

/// Smallest `k_max` whose omitted blocks all lie above `lambda`.
fn required_k_max(min_f: f64, lambda: f64) -> usize {
    (lambda / min_f).floor().max(0.0) as usize
}

fn guard<T: Real>(record: &SpectrumRecord<T>, lambda: f64) -> Result<()> {
    let k_max = record.k_max();
    if min_eigen_bound(record, k_max + 1) > lambda {
        Ok(())
    } else {
        Err(Error::Incomplete {
            lambda,
            required_k_max: required_k_max(record.metadata.symbol_min, lambda),
        })
    }
}

/// Eigenvalues within this relative distance of `λ` count as `≤ λ`, so that
/// exactly integral eigenvalues are not lost to rounding.
pub const COUNTING_SLACK: f64 = 1e-12;

/// `N^{(ϖ)}(λ) = #{j : λ_j^{(ϖ)} ≤ λ}`; `varpi = None` counts the full
/// spectrum.
pub fn counting<T: Real>(record: &SpectrumRecord<T>, lambda: f64, varpi: Option<i64>) -> Result<u64> {
    record.covers(varpi)?;
    guard(record, lambda)?;
    let limit = lambda + COUNTING_SLACK * lambda.abs().max(1.0);
    Ok(record
        .select(varpi)
        .filter(|e| e.lambda.as_f64() <= limit)
        .count() as u64)
}

/// Bound on `Σ_{k > k_max} mult_k · sup χ̂` over the blocks missing from
/// the record, plus the tabulation cut at `s_max`.
fn omitted_mass<T: Real>(
    record: &SpectrumRecord<T>,
    cutoff: &GoodCutoff,
    lambda: f64,
    weight: impl Fn(usize) -> f64,
) -> f64 {
    let d = record.metadata.d;
    let mut total = 0.0;
    let mut k = record.k_max() + 1;
    loop {
        let dist = min_eigen_bound(record, k) - lambda;
        let term = binomial(k + d, d) as f64 * weight(k) * cutoff.envelope(dist.max(0.0));
        total += term;
        if dist > cutoff.lambda_tail() && (term < 1e-30 * total.max(1e-300) || term == 0.0) {
            break;
        }
        k += 1;
        if k > 100 * (record.k_max() + 10) {
            break;
        }
    }
    total
}

fn entries_beyond_grid<T: Real>(
    record: &SpectrumRecord<T>,
    cutoff: &GoodCutoff,
    lambda: f64,
    varpi: Option<i64>,
    weight: impl Fn(usize) -> f64,
) -> f64 {
    record
        .select(varpi)
        .filter(|e| (lambda - e.lambda.as_f64()).abs() > cutoff.s_max())
        .map(|e| weight(e.k as usize) * cutoff.envelope(lambda - e.lambda.as_f64()))
        .sum()
}

fn sum_guard<T: Real>(record: &SpectrumRecord<T>, cutoff: &GoodCutoff, lambda: f64) -> Result<()> {
    guard(record, lambda + cutoff.lambda_tail()).map_err(|_| Error::Incomplete {
        lambda,
        required_k_max: required_k_max(record.metadata.symbol_min, lambda + cutoff.lambda_tail()),
    })
}

/// `Σ_j χ̂(λ − λ_j^{(ϖ)})`.
pub fn smoothed_trace<T: Real>(
    record: &SpectrumRecord<T>,
    cutoff: &GoodCutoff,
    lambda: f64,
    varpi: Option<i64>,
) -> Result<SpectralSum<f64>> {
    record.covers(varpi)?;
    sum_guard(record, cutoff, lambda)?;
    let value = record
        .select(varpi)
        .map(|e| cutoff.chi_hat(lambda - e.lambda.as_f64()))
        .sum();
    let truncation_error = omitted_mass(record, cutoff, lambda, |_| 1.0)
        + entries_beyond_grid(record, cutoff, lambda, varpi, |_| 1.0);
    Ok(SpectralSum {
        value,
        truncation_error,
    })
}

/// `∫_{−∞}^{λ} Σ_j χ̂(τ − λ_j^{(ϖ)}) dτ = Σ_j C(λ − λ_j)` with `C` the
/// primitive of `χ̂`.
pub fn tauberian_integral<T: Real>(
    record: &SpectrumRecord<T>,
    cutoff: &GoodCutoff,
    lambda: f64,
    varpi: Option<i64>,
) -> Result<SpectralSum<f64>> {
    record.covers(varpi)?;
    sum_guard(record, cutoff, lambda)?;
    let value = record
        .select(varpi)
        .map(|e| cutoff.cdf(lambda - e.lambda.as_f64()))
        .sum();
    let truncation_error = omitted_mass(record, cutoff, lambda, |_| 1.0) * cutoff.lambda_tail();
    Ok(SpectralSum {
        value,
        truncation_error,
    })
}

fn szego_diagonal(k: usize, d: usize) -> f64 {
    (ln_factorial(k + d) - ln_factorial(k) - d as f64 * std::f64::consts::PI.ln()).exp()
}

/// `Σ_j χ̂(λ − λ_j^{(ϖ)}) e_j(x′) conj(e_j(x″))`.
pub fn smoothed_kernel<T: Real>(
    record: &SpectrumRecord<T>,
    cutoff: &GoodCutoff,
    lambda: f64,
    varpi: Option<i64>,
    x1: &AmbientPoint<T>,
    x2: &AmbientPoint<T>,
) -> Result<SpectralSum<Cx<T>>> {
    record.covers(varpi)?;
    sum_guard(record, cutoff, lambda)?;
    let d = record.metadata.d;
    if x1.dim() != d || x2.dim() != d {
        return Err(Error::Dimension {
            expected: d,
            got: if x1.dim() != d { x1.dim() } else { x2.dim() },
        });
    }
    let mut blocks: BTreeMap<u32, HardyBlock<T>> = BTreeMap::new();
    let mut sections: BTreeMap<(u32, u32), (Cx<T>, Cx<T>)> = BTreeMap::new();
    let mut value = Cx::new(T::zero(), T::zero());
    for e in record.select(varpi) {
        let s = lambda - e.lambda.as_f64();
        if s.abs() > cutoff.s_max() {
            continue;
        }
        let weight = cutoff.chi_hat(s);
        if weight == 0.0 {
            continue;
        }
        if !blocks.contains_key(&e.k) {
            blocks.insert(e.k, monomial_norms::<T>(e.k as usize, d)?);
        }
        let block = &blocks[&e.k];
        let mut a = Cx::new(T::zero(), T::zero());
        let mut b = Cx::new(T::zero(), T::zero());
        for &(i, c) in &e.eigvec {
            let (s1, s2) = *sections.entry((e.k, i)).or_insert_with(|| {
                (
                    block.evaluate_section(i as usize, x1),
                    block.evaluate_section(i as usize, x2),
                )
            });
            a = a + c * s1;
            b = b + c * s2;
        }
        value = value + a * b.conj() * T::lit(weight);
    }
    let diag = |k: usize| szego_diagonal(k, d);
    let per_dim = |k: usize| diag(k) / binomial(k + d, d) as f64;
    let truncation_error = omitted_mass(record, cutoff, lambda, per_dim)
        + entries_beyond_grid(record, cutoff, lambda, varpi, diag);
    Ok(SpectralSum {
        value,
        truncation_error,
    })
}

/// Least-squares fit `log N(λ) ≈ exponent·log λ + log constant`.
pub fn weyl_fit<T: Real>(
    record: &SpectrumRecord<T>,
    grid: &[f64],
    varpi: Option<i64>,
) -> Result<(f64, f64)> {
    if grid.len() < 10 {
        return Err(Error::DegenerateGrid(format!(
            "{} points given, at least 10 required",
            grid.len()
        )));
    }
    let mut xs = Vec::with_capacity(grid.len());
    let mut ys = Vec::with_capacity(grid.len());
    for &l in grid {
        if !(l > 0.0) {
            return Err(Error::DegenerateGrid(format!("nonpositive lambda {l}")));
        }
        let n = counting(record, l, varpi)?;
        if n == 0 {
            return Err(Error::DegenerateGrid(format!("N({l}) = 0")));
        }
        xs.push(l.ln());
        ys.push((n as f64).ln());
    }
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-12 {
        return Err(Error::DegenerateGrid("all lambda values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, (my - slope * mx).exp()))
}
