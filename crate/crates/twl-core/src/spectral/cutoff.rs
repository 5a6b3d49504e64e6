//! Good ε-cutoffs `χ = γ∗γ` built from the standard bump.

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;
use rayon::prelude::*;

/// `χ̂(±Λ_tail) < TAIL_FRACTION · χ̂(0)`.
pub const TAIL_FRACTION: f64 = 1e-12;
/// Grid spacing of `χ̂` in units of `ε`.
pub const GRID_DIVISOR: f64 = 400.0;
const RESYNC: usize = 512;
const CHUNK: usize = 4096;
const CONV_NODES: usize = 200;

/// A nonnegative cutoff `χ ∈ C_c^∞(−ε, ε)` with `χ(0) = 1` and `χ̂ ≥ 0`.
///
/// `χ̂(s) = ∫ χ(t) e^{−ist} dt` is tabulated through `γ̂` on a uniform
/// grid of spacing `ε/400` and squared after cubic interpolation, so that
/// nonnegativity holds by construction.
#[derive(Clone, Debug)]
pub struct GoodCutoff {
    epsilon: f64,
    step: f64,
    /// `γ̂(jΔ)/√raw(0)`, so that its square is `χ̂`.
    gamma_hat: Vec<f64>,
    /// `max_{i ≥ j} χ̂(iΔ)`.
    suffix_max: Vec<f64>,
    /// `∫_0^{jΔ} χ̂`.
    half_cdf: Vec<f64>,
    lambda_tail: f64,
    tail_rate: f64,
    gamma_nodes: (Vec<f64>, Vec<f64>),
    gamma_norm: f64,
    raw0: f64,
}

fn bump(t: f64, half_width: f64) -> f64 {
    let u = t / half_width;
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

fn tabulate_gamma_hat(half_width: f64, norm: f64, step: f64, count: usize, s_max: f64) -> Vec<f64> {
    let nodes = (((3.0 * s_max * 2.0 * half_width) / std::f64::consts::TAU).ceil() as usize).max(256);
    let h = 2.0 * half_width / nodes as f64;
    // symmetric trapezoid: t = 0 plus pairs ±t_n
    let positive: Vec<(f64, f64)> = (1..nodes / 2 + nodes % 2)
        .map(|n| {
            let t = n as f64 * h;
            (t, 2.0 * h * bump(t, half_width) / norm)
        })
        .filter(|&(_, w)| w > 0.0)
        .collect();
    let center = h * bump(0.0, half_width) / norm;
    let chunks: Vec<usize> = (0..count).step_by(CHUNK).collect();
    let parts: Vec<Vec<f64>> = chunks
        .par_iter()
        .map(|&start| {
            let end = (start + CHUNK).min(count);
            let rot: Vec<(f64, f64)> = positive
                .iter()
                .map(|&(t, _)| ((step * t).cos(), (step * t).sin()))
                .collect();
            let mut phase: Vec<(f64, f64)> = Vec::with_capacity(positive.len());
            let mut out = Vec::with_capacity(end - start);
            for i in start..end {
                if (i - start) % RESYNC == 0 {
                    phase.clear();
                    let s = i as f64 * step;
                    phase.extend(positive.iter().map(|&(t, _)| ((s * t).cos(), (s * t).sin())));
                }
                let mut acc = center;
                for ((c, _), &(_, w)) in phase.iter().zip(&positive) {
                    acc += w * c;
                }
                out.push(acc);
                for (p, r) in phase.iter_mut().zip(&rot) {
                    *p = (p.0 * r.0 - p.1 * r.1, p.0 * r.1 + p.1 * r.0);
                }
            }
            out
        })
        .collect();
    parts.concat()
}

impl GoodCutoff {
    /// Builds the cutoff for `ε > 0`.
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Precondition(format!("epsilon must be positive, got {epsilon}")));
        }
        let a = epsilon / 2.0;
        let gamma_nodes = gauss_legendre_on::<f64>(CONV_NODES, -a, a);
        let gamma_norm = gamma_nodes
            .0
            .iter()
            .zip(&gamma_nodes.1)
            .map(|(&t, &w)| w * bump(t, a).powi(2))
            .sum::<f64>()
            .sqrt();
        let step = epsilon / GRID_DIVISOR;
        let mut s_max = 330.0 / epsilon;
        let mut cut = loop {
            let count = (s_max / step).ceil() as usize + 1;
            let g = tabulate_gamma_hat(a, gamma_norm, step, count, s_max);
            let chi0 = g[0] * g[0];
            let mut suffix = vec![0.0; count];
            let mut m = 0.0f64;
            for i in (0..count).rev() {
                m = m.max(g[i] * g[i]);
                suffix[i] = m;
            }
            let tail_index = suffix.iter().position(|&v| v < TAIL_FRACTION * chi0);
            match tail_index {
                Some(j) if (j as f64) < 0.95 * count as f64 => {
                    break Self {
                        epsilon,
                        step,
                        gamma_hat: g,
                        suffix_max: suffix,
                        half_cdf: Vec::new(),
                        lambda_tail: j as f64 * step,
                        tail_rate: 0.0,
                        gamma_nodes: gamma_nodes.clone(),
                        gamma_norm,
                        raw0: 1.0,
                    };
                }
                _ => s_max *= 2.0,
            }
        };
        cut.raw0 = cut.raw_chi(0.0);
        let scale = cut.raw0.sqrt();
        for g in &mut cut.gamma_hat {
            *g /= scale;
        }
        for v in &mut cut.suffix_max {
            *v /= cut.raw0;
        }
        let mut cdf = Vec::with_capacity(cut.gamma_hat.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in 1..cut.gamma_hat.len() {
            let (l, r) = (cut.gamma_hat[i - 1].powi(2), cut.gamma_hat[i].powi(2));
            acc += 0.5 * step * (l + r);
            cdf.push(acc);
        }
        cut.half_cdf = cdf;
        let (e_tail, e_max) = (cut.envelope(cut.lambda_tail), cut.suffix_max[cut.suffix_max.len() - 1]);
        let (r_tail, r_max) = (cut.lambda_tail.sqrt(), cut.s_max().sqrt());
        cut.tail_rate = if e_max > 0.0 && e_tail > e_max {
            (e_tail.ln() - e_max.ln()) / (r_max - r_tail)
        } else {
            1.0
        };
        Ok(cut)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Spacing of the `χ̂` grid.
    pub fn grid_step(&self) -> f64 {
        self.step
    }

    /// Largest tabulated frequency; `χ̂` is taken as zero beyond it.
    pub fn s_max(&self) -> f64 {
        (self.gamma_hat.len() - 1) as f64 * self.step
    }

    /// Smallest `Λ` with `χ̂(s) < 1e−12·χ̂(0)` for all tabulated `|s| ≥ Λ`.
    pub fn lambda_tail(&self) -> f64 {
        self.lambda_tail
    }

    /// Number of tabulated samples.
    pub fn grid_len(&self) -> usize {
        self.gamma_hat.len()
    }

    /// `χ̂` at the `j`-th grid point.
    pub fn grid_value(&self, j: usize) -> f64 {
        self.gamma_hat[j].powi(2)
    }

    fn raw_chi(&self, t: f64) -> f64 {
        let a = self.epsilon / 2.0;
        let (lo, hi) = ((t - a).max(-a), (t + a).min(a));
        if lo >= hi {
            return 0.0;
        }
        if t == 0.0 {
            return self
                .gamma_nodes
                .0
                .iter()
                .zip(&self.gamma_nodes.1)
                .map(|(&u, &w)| w * (bump(u, a) / self.gamma_norm).powi(2))
                .sum();
        }
        let (x, w) = gauss_legendre_on::<f64>(CONV_NODES, lo, hi);
        x.iter()
            .zip(&w)
            .map(|(&u, &wt)| wt * bump(u, a) * bump(t - u, a))
            .sum::<f64>()
            / (self.gamma_norm * self.gamma_norm)
    }

    /// `χ(t) = (γ∗γ)(t)/(γ∗γ)(0)`.
    pub fn chi(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 1.0;
        }
        self.raw_chi(t) / self.raw0
    }

    fn gamma_hat_at(&self, s: f64) -> f64 {
        let s = s.abs();
        let n = self.gamma_hat.len();
        let x = s / self.step;
        let i = x.floor() as isize;
        if i as usize + 2 >= n {
            return 0.0;
        }
        let u = x - i as f64;
        let at = |j: isize| self.gamma_hat[j.unsigned_abs()];
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        // cubic Lagrange through nodes −1, 0, 1, 2
        p0 * (-u * (u - 1.0) * (u - 2.0) / 6.0)
            + p1 * ((u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0)
            + p2 * (-(u + 1.0) * u * (u - 2.0) / 2.0)
            + p3 * ((u + 1.0) * u * (u - 1.0) / 6.0)
    }

    /// `χ̂(s) ≥ 0`.
    pub fn chi_hat(&self, s: f64) -> f64 {
        self.gamma_hat_at(s).powi(2)
    }

    /// A nonincreasing bound `sup_{|u| ≥ |s|} χ̂(u)`: the tabulated running
    /// maximum, extended past the grid by a fitted `exp(−c√s)` decay.
    pub fn envelope(&self, s: f64) -> f64 {
        let s = s.abs();
        let n = self.suffix_max.len();
        let i = (s / self.step).floor() as usize;
        if i < n {
            return self.suffix_max[i];
        }
        let last = self.suffix_max[n - 1];
        last * (-self.tail_rate * (s.sqrt() - self.s_max().sqrt())).exp()
    }

    /// `∫_{−∞}^{s} χ̂`.
    pub fn cdf(&self, s: f64) -> f64 {
        let half = self.half_cdf[self.half_cdf.len() - 1];
        let x = s.abs() / self.step;
        let i = x.floor() as usize;
        let inner = if i + 1 >= self.half_cdf.len() {
            half
        } else {
            let u = x - i as f64;
            self.half_cdf[i] * (1.0 - u) + self.half_cdf[i + 1] * u
        };
        if s >= 0.0 {
            half + inner
        } else {
            half - inner
        }
    }

    /// `∫_R χ̂`, equal to `2π χ(0) = 2π` up to quadrature error.
    pub fn integral(&self) -> f64 {
        2.0 * self.half_cdf[self.half_cdf.len() - 1]
    }
}
