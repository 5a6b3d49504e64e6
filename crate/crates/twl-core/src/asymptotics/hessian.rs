//! Determinant, signature and inverse checks for the block Hessians met in
//! the stationary-phase arguments.

use crate::error::{Error, Result};
use crate::linalg::{determinant, inverse, symmetric_eigenvalues, CMatrix, RMatrix};
use crate::sampling::{gaussian, gaussian_vector, seeded_rng};
use crate::scalar::{herm, norm, Cx};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Relative tolerance on determinants and inverses.
pub const HESSIAN_TOLERANCE: f64 = 1e-8;
/// Eigenvalues below `SIGN_THRESHOLD · ‖M‖` are reported as zero.
pub const SIGN_THRESHOLD: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HessianReport {
    pub size: usize,
    pub determinant: f64,
    pub expected_determinant: f64,
    pub determinant_error: f64,
    pub signature: i64,
    /// `None` when the lemma makes no claim about the signature.
    pub expected_signature: Option<i64>,
    /// Numerically zero eigenvalues.
    pub zero_eigenvalues: usize,
    /// `max |H⁻¹_closed − H⁻¹_numeric| / max(1, max |H⁻¹_numeric|)`, when a
    /// closed-form inverse is available.
    pub inverse_error: Option<f64>,
    pub passed: bool,
}

/// Signature and count of numerically zero eigenvalues of a symmetric matrix.
pub fn signature(m: &RMatrix<f64>) -> Result<(i64, usize)> {
    let ev = symmetric_eigenvalues(m)?;
    let scale = ev.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let thr = SIGN_THRESHOLD * scale;
    let mut sig = 0i64;
    let mut zeros = 0;
    for x in ev {
        if x > thr {
            sig += 1;
        } else if x < -thr {
            sig -= 1;
        } else {
            zeros += 1;
        }
    }
    Ok((sig, zeros))
}

fn report(
    m: &RMatrix<f64>,
    expected_determinant: f64,
    expected_signature: Option<i64>,
    closed_inverse: Option<&RMatrix<f64>>,
) -> Result<HessianReport> {
    let det = determinant(m);
    let err = (det - expected_determinant).abs() / expected_determinant.abs().max(f64::MIN_POSITIVE);
    let (sig, zeros) = signature(m)?;
    let inverse_error = match closed_inverse {
        None => None,
        Some(c) => {
            let num = inverse(m)?;
            let mut e = 0.0f64;
            for i in 0..num.rows() {
                for j in 0..num.cols() {
                    e = e.max((num[(i, j)] - c[(i, j)]).abs());
                }
            }
            Some(e / num.max_abs().max(1.0))
        }
    };
    let passed = err <= HESSIAN_TOLERANCE
        && expected_signature.map_or(true, |s| s == sig && zeros == 0)
        && inverse_error.map_or(true, |e| e <= HESSIAN_TOLERANCE);
    Ok(HessianReport {
        size: m.rows(),
        determinant: det,
        expected_determinant,
        determinant_error: err,
        signature: sig,
        expected_signature,
        zero_eigenvalues: zeros,
        inverse_error,
        passed,
    })
}

fn is_symmetric(m: &RMatrix<f64>) -> bool {
    let s = m.max_abs().max(1.0);
    (0..m.rows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= 1e-12 * s))
}

fn square(m: &RMatrix<f64>, n: usize, what: &str) -> Result<()> {
    if m.rows() != n || m.cols() != n {
        return Err(Error::Precondition(format!(
            "{what} must be {n}×{n}, got {}×{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// `C = [[0, Rᵗ], [R, S]]`: `det C = (−1)^r det(R)²`, and `sgn C = 0` when
/// `det R > 0`.
pub fn signature_lemma_check(r: &RMatrix<f64>, s: &RMatrix<f64>) -> Result<HessianReport> {
    let n = r.rows();
    square(r, n, "R")?;
    square(s, n, "S")?;
    if !is_symmetric(s) {
        return Err(Error::Precondition("S must be symmetric".into()));
    }
    let c = RMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => 0.0,
        (true, false) => r[(j - n, i)],
        (false, true) => r[(i - n, j)],
        (false, false) => s[(i - n, j - n)],
    });
    let det_r = determinant(r);
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    report(&c, sign * det_r * det_r, (det_r > 0.0).then_some(0), None)
}

/// The real `2d × 2d` form `[[Re U, −Im U], [Im U, Re U]]` of a complex
/// matrix acting on `(Re w, Im w)`.
pub fn realify(u: &CMatrix<f64>) -> RMatrix<f64> {
    let d = u.rows();
    RMatrix::from_fn(2 * d, 2 * d, |i, j| {
        let z = u[(i % d, j % d)];
        match (i < d, j < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// A unitary matrix from Gram–Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix<f64> {
    let mut cols: Vec<Vec<Cx<f64>>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v = gaussian_vector::<f64, R>(d, rng);
        for _ in 0..2 {
            for c in &cols {
                let p = herm(&v, c);
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= p * ci;
                }
            }
        }
        let n = norm(&v);
        if n > 1e-6 {
            cols.push(v.into_iter().map(|c| c / n).collect());
        }
    }
    CMatrix::from_fn(d, d, |i, j| cols[j][i])
}

fn orthogonality_defect(a: &RMatrix<f64>) -> f64 {
    let g = a.transpose().matmul(a);
    let mut e = 0.0f64;
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            let t = if i == j { 1.0 } else { 0.0 };
            e = e.max((g[(i, j)] - t).abs());
        }
    }
    e
}

/// `[[0, −Aᵗ], [−A, −Φν I]]` for a real orthogonal `A`: determinant 1,
/// signature 0.
pub fn hessian_upsilon_check(a: &RMatrix<f64>, phi_nu: f64) -> Result<HessianReport> {
    let n = a.rows();
    square(a, n, "A")?;
    if n % 2 != 0 || orthogonality_defect(a) > 1e-10 {
        return Err(Error::Precondition(
            "A must be the real form of a unitary matrix".into(),
        ));
    }
    let h = RMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => 0.0,
        (true, false) => -a[(j - n, i)],
        (false, true) => -a[(i - n, j)],
        (false, false) => {
            if i == j {
                -phi_nu
            } else {
                0.0
            }
        }
    });
    report(&h, 1.0, Some(0), None)
}

/// Hessian in the variables `(t, θ, r, τ, v, Ω)` with `v, Ω ∈ R^{2d}`.
pub fn hessian_k(sigma: f64, dvec: &[f64], a: &RMatrix<f64>, theta1: f64) -> RMatrix<f64> {
    let m = a.rows();
    let n = 4 + 2 * m;
    let (v0, o0) = (4, 4 + m);
    let mut h = RMatrix::zeros(n, n);
    let mut set = |i: usize, j: usize, x: f64| {
        h[(i, j)] = x;
        h[(j, i)] = x;
    };
    set(0, 1, 1.0);
    set(1, 2, -1.0);
    set(2, 3, sigma);
    for k in 0..m {
        set(3, o0 + k, dvec[k]);
        set(o0 + k, o0 + k, -theta1);
        for l in 0..m {
            set(v0 + k, o0 + l, -a[(l, k)] / sigma);
        }
    }
    h
}

/// Closed form of the inverse of [`hessian_k`].
pub fn hessian_k_inverse(sigma: f64, dvec: &[f64], a: &RMatrix<f64>, theta1: f64) -> RMatrix<f64> {
    let m = a.rows();
    let n = 4 + 2 * m;
    let (v0, o0) = (4, 4 + m);
    let mut h = RMatrix::zeros(n, n);
    let mut set = |i: usize, j: usize, x: f64| {
        h[(i, j)] = x;
        h[(j, i)] = x;
    };
    set(0, 1, 1.0);
    set(0, 3, 1.0 / sigma);
    set(2, 3, 1.0 / sigma);
    for k in 0..m {
        let da: f64 = (0..m).map(|l| dvec[l] * a[(l, k)]).sum();
        set(0, v0 + k, da);
        set(2, v0 + k, da);
        set(v0 + k, v0 + k, theta1 * sigma * sigma);
        for l in 0..m {
            set(o0 + l, v0 + k, -sigma * a[(l, k)]);
        }
    }
    h
}

/// Assembles the `(4 + 4d)`-dimensional Hessian and checks
/// `det = ς^{2−4d}`, signature 0 and the closed-form inverse.
pub fn hessian_k_check(
    sigma: f64,
    dvec: &[f64],
    a: &RMatrix<f64>,
    theta1: f64,
    d: usize,
) -> Result<HessianReport> {
    if !(sigma > 0.0) {
        return Err(Error::Precondition("ς must be positive".into()));
    }
    square(a, 2 * d, "A")?;
    if dvec.len() != 2 * d {
        return Err(Error::Dimension {
            expected: 2 * d,
            got: dvec.len(),
        });
    }
    if orthogonality_defect(a) > 1e-10 {
        return Err(Error::Precondition("A must be orthogonal".into()));
    }
    let h = hessian_k(sigma, dvec, a, theta1);
    let inv = hessian_k_inverse(sigma, dvec, a, theta1);
    report(&h, sigma.powi(2 - 4 * d as i32), Some(0), Some(&inv))
}

/// Pass counts of a batch of random instances per lemma.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HessianSuite {
    pub instances: usize,
    pub signature_passed: usize,
    pub upsilon_passed: usize,
    pub k_passed: usize,
    pub worst_determinant_error: f64,
    pub worst_inverse_error: f64,
}

impl HessianSuite {
    pub fn all_passed(&self) -> bool {
        self.signature_passed == self.instances
            && self.upsilon_passed == self.instances
            && self.k_passed == self.instances
    }
}

/// Runs `instances` random cases of each lemma with `d ∈ {1, 2, 3}`; the
/// result depends only on `seed`.
pub fn hessian_suite(instances: usize, seed: u64) -> Result<HessianSuite> {
    let mut rng = seeded_rng(seed);
    let mut out = HessianSuite {
        instances,
        ..Default::default()
    };
    let track = |out: &mut HessianSuite, r: &HessianReport| {
        out.worst_determinant_error = out.worst_determinant_error.max(r.determinant_error);
        if let Some(e) = r.inverse_error {
            out.worst_inverse_error = out.worst_inverse_error.max(e);
        }
    };
    for i in 0..instances {
        let d = 1 + i % 3;
        let n = 2 * d;
        let mut r = RMatrix::from_fn(n, n, |_, _| gaussian::<f64, _>(&mut rng));
        if determinant(&r) < 0.0 {
            for j in 0..n {
                r[(0, j)] = -r[(0, j)];
            }
        }
        let g = RMatrix::from_fn(n, n, |_, _| gaussian::<f64, _>(&mut rng));
        let s = RMatrix::from_fn(n, n, |i, j| g[(i, j)] + g[(j, i)]);
        let rep = signature_lemma_check(&r, &s)?;
        track(&mut out, &rep);
        out.signature_passed += rep.passed as usize;

        let a = realify(&random_unitary(d, &mut rng));
        let rep = hessian_upsilon_check(&a, gaussian::<f64, _>(&mut rng))?;
        track(&mut out, &rep);
        out.upsilon_passed += rep.passed as usize;

        let a = realify(&random_unitary(d, &mut rng));
        let sigma = rng.gen_range(0.5..2.0);
        let dvec: Vec<f64> = (0..n).map(|_| gaussian::<f64, _>(&mut rng)).collect();
        let rep = hessian_k_check(sigma, &dvec, &a, gaussian::<f64, _>(&mut rng), d)?;
        track(&mut out, &rep);
        out.k_passed += rep.passed as usize;
    }
    Ok(out)
}
