//! Small dense linear algebra: row-major matrices, LU determinants, inverses
//! and a Hermitian eigensolver (Householder tridiagonalization followed by
//! implicit QL).

use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};
use num_traits::{One, Zero};
use std::ops::{Index, IndexMut};

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Copy + Zero> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Copies the sub-block of the given rows and columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }
}

impl<S: Copy + Zero + One> Matrix<S> {
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { S::one() } else { S::zero() })
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

impl<S> Matrix<S>
where
    S: Copy + Zero + std::ops::Mul<Output = S> + std::ops::Add<Output = S>,
{
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(S::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }
}

pub type RMatrix<T> = Matrix<T>;
pub type CMatrix<T> = Matrix<Cx<T>>;

impl<T: Real> Matrix<T> {
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn to_complex(&self) -> CMatrix<T> {
        Matrix::from_fn(self.rows, self.cols, |i, j| Cx::new(self[(i, j)], T::zero()))
    }
}

impl<T: Real> Matrix<Cx<T>> {
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.norm()))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Largest entry of `|M - M†|`.
    pub fn hermitian_defect(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                m = m.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        m
    }

    /// Replaces the matrix by `(M + M†)/2`.
    pub fn symmetrize(&mut self) {
        let half = T::lit(0.5);
        for i in 0..self.rows {
            for j in i..self.cols {
                let a = (self[(i, j)] + self[(j, i)].conj()).scale(half);
                self[(i, j)] = a;
                self[(j, i)] = a.conj();
            }
        }
    }
}

/// Determinant by LU factorization with partial pivoting.
pub fn determinant<T: Real>(m: &RMatrix<T>) -> T {
    assert_eq!(m.rows(), m.cols(), "determinant of a non-square matrix");
    let n = m.rows();
    let mut a = m.clone();
    let mut det = T::one();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[(i, c)].abs().partial_cmp(&a[(j, c)].abs()).unwrap())
            .unwrap();
        if a[(p, c)] == T::zero() {
            return T::zero();
        }
        if p != c {
            for j in 0..n {
                let t = a[(c, j)];
                a[(c, j)] = a[(p, j)];
                a[(p, j)] = t;
            }
            det = -det;
        }
        let piv = a[(c, c)];
        det = det * piv;
        for i in c + 1..n {
            let f = a[(i, c)] / piv;
            if f != T::zero() {
                for j in c..n {
                    a[(i, j)] = a[(i, j)] - f * a[(c, j)];
                }
            }
        }
    }
    det
}

/// Inverse by Gauss–Jordan elimination with partial pivoting.
pub fn inverse<T: Real>(m: &RMatrix<T>) -> Result<RMatrix<T>> {
    assert_eq!(m.rows(), m.cols(), "inverse of a non-square matrix");
    let n = m.rows();
    let mut a = m.clone();
    let mut inv = RMatrix::identity(n);
    let scale = m.max_abs();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[(i, c)].abs().partial_cmp(&a[(j, c)].abs()).unwrap())
            .unwrap();
        if a[(p, c)].abs() <= T::epsilon() * scale {
            return Err(Error::Singular);
        }
        for j in 0..n {
            let t = a[(c, j)];
            a[(c, j)] = a[(p, j)];
            a[(p, j)] = t;
            let t = inv[(c, j)];
            inv[(c, j)] = inv[(p, j)];
            inv[(p, j)] = t;
        }
        let piv = a[(c, c)];
        for j in 0..n {
            a[(c, j)] = a[(c, j)] / piv;
            inv[(c, j)] = inv[(c, j)] / piv;
        }
        for i in 0..n {
            if i != c {
                let f = a[(i, c)];
                if f != T::zero() {
                    for j in 0..n {
                        a[(i, j)] = a[(i, j)] - f * a[(c, j)];
                        inv[(i, j)] = inv[(i, j)] - f * inv[(c, j)];
                    }
                }
            }
        }
    }
    Ok(inv)
}

/// Eigendecomposition `A = V diag(values) V†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T: Real> {
    /// Eigenvalues in ascending order.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: CMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn vector(&self, j: usize) -> Vec<Cx<T>> {
        self.vectors.column(j)
    }
}

/// Dense Hermitian eigensolver.
///
/// The matrix is reduced to a real symmetric tridiagonal form by complex
/// Householder reflections, whose product is accumulated; the tridiagonal
/// problem is then solved by the implicit QL algorithm with Wilkinson-type
/// shifts. Only the lower triangle and diagonal of `a` are trusted to be
/// consistent; callers symmetrize beforehand.
pub fn hermitian_eigen<T: Real>(a: &CMatrix<T>) -> Result<HermitianEigen<T>> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "eigendecomposition of a non-square matrix");
    if n == 0 {
        return Ok(HermitianEigen {
            values: vec![],
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let zero = Cx::new(T::zero(), T::zero());
    let mut h = a.clone();
    let mut q = CMatrix::<T>::identity(n);
    let mut v = vec![zero; n];

    for j in 0..n.saturating_sub(1) {
        let alpha = h[(j + 1, j)];
        let xnorm = (j + 2..n)
            .map(|i| h[(i, j)].norm_sqr())
            .fold(T::zero(), |s, x| s + x)
            .sqrt();
        if xnorm == T::zero() && alpha.im == T::zero() {
            continue;
        }
        let mag = alpha.norm().hypot(xnorm);
        let beta = if alpha.re >= T::zero() { -mag } else { mag };
        let tau = Cx::new((beta - alpha.re) / beta, -alpha.im / beta);
        let inv = Cx::new(T::one(), T::zero()) / (alpha - beta);
        let m = n - j - 1;
        v[0] = Cx::new(T::one(), T::zero());
        for i in 1..m {
            v[i] = h[(j + 1 + i, j)] * inv;
        }
        let vs = &v[..m];
        // h <- (I - conj(tau) v v†) h
        let tc = tau.conj();
        for col in 0..n {
            let mut s = zero;
            for (i, vi) in vs.iter().enumerate() {
                s = s + vi.conj() * h[(j + 1 + i, col)];
            }
            s = s * tc;
            if s != zero {
                for (i, vi) in vs.iter().enumerate() {
                    h[(j + 1 + i, col)] = h[(j + 1 + i, col)] - vi * s;
                }
            }
        }
        // h <- h (I - tau v v†) and q <- q (I - tau v v†)
        for mat in [&mut h, &mut q] {
            for row in 0..n {
                let mut s = zero;
                for (i, vi) in vs.iter().enumerate() {
                    s = s + mat[(row, j + 1 + i)] * vi;
                }
                s = s * tau;
                if s != zero {
                    for (i, vi) in vs.iter().enumerate() {
                        mat[(row, j + 1 + i)] = mat[(row, j + 1 + i)] - s * vi.conj();
                    }
                }
            }
        }
    }

    let mut d: Vec<T> = (0..n).map(|i| h[(i, i)].re).collect();
    let mut e: Vec<T> = (0..n)
        .map(|i| if i + 1 < n { h[(i + 1, i)].re } else { T::zero() })
        .collect();
    let mut z = RMatrix::<T>::identity(n);
    tridiagonal_ql(&mut d, &mut e, &mut z)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].partial_cmp(&d[y]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (c, &src) in order.iter().enumerate() {
        for r in 0..n {
            let mut s = zero;
            for k in 0..n {
                let zk = z[(k, src)];
                if zk != T::zero() {
                    s = s + q[(r, k)].scale(zk);
                }
            }
            vectors[(r, c)] = s;
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Implicit QL iteration on a symmetric tridiagonal matrix with diagonal `d`
/// and off-diagonal `e` (`e[i]` couples `i` and `i+1`). Rotations are
/// accumulated into the columns of `z`.
fn tridiagonal_ql<T: Real>(d: &mut [T], e: &mut [T], z: &mut RMatrix<T>) -> Result<()> {
    let n = d.len();
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Eigensolver {
                    k: 0,
                    varpi: None,
                    msg: format!("QL iteration did not converge for eigenvalue {l}"),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            let sr = if g >= T::zero() { r } else { -r };
            g = d[m] - d[l] + e[l] / (g + sr);
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let zf = z[(k, i + 1)];
                    let zi = z[(k, i)];
                    z[(k, i + 1)] = s * zi + c * zf;
                    z[(k, i)] = c * zi - s * zf;
                }
            }
            if deflated {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues<T: Real>(m: &RMatrix<T>) -> Result<Vec<T>> {
    Ok(hermitian_eigen(&m.to_complex())?.values)
}

/// Connected components of the nonzero pattern of a Hermitian matrix.
///
/// Entries with modulus at most `threshold` are treated as zero. Components
/// are returned with sorted indices, ordered by their smallest index.
pub fn sparsity_components<T: Real>(m: &CMatrix<T>, threshold: T) -> Vec<Vec<usize>> {
    let n = m.rows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in 0..i {
            if m[(i, j)].norm() > threshold || m[(j, i)].norm() > threshold {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix<f64> {
        let mut m = CMatrix::from_fn(n, n, |_, _| {
            Cx::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        m.symmetrize();
        m
    }

    /// Cyclic complex Jacobi: an independent oracle for small matrices.
    fn jacobi_eigenvalues(a: &CMatrix<f64>) -> Vec<f64> {
        let n = a.rows();
        let mut m = a.clone();
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)].norm_sqr())
                .sum();
            if off < 1e-28 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = m[(p, q)];
                    if apq.norm() < 1e-300 {
                        continue;
                    }
                    let phase = apq / apq.norm();
                    let (app, aqq) = (m[(p, p)].re, m[(q, q)].re);
                    let theta = 0.5 * (2.0 * apq.norm()).atan2(aqq - app);
                    let (c, s) = (theta.cos(), theta.sin());
                    // unitary G with columns p,q
                    let mut g = CMatrix::<f64>::identity(n);
                    g[(p, p)] = Cx::new(c, 0.0);
                    g[(q, q)] = Cx::new(c, 0.0);
                    g[(p, q)] = phase * s;
                    g[(q, p)] = -phase.conj() * s;
                    m = g.adjoint().matmul(&m).matmul(&g);
                }
            }
        }
        let mut v: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn eigen_matches_jacobi_oracle_and_has_small_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 3, 5, 8, 13] {
            let a = random_hermitian(n, &mut rng);
            let eig = hermitian_eigen(&a).unwrap();
            let oracle = jacobi_eigenvalues(&a);
            for (x, y) in eig.values.iter().zip(&oracle) {
                assert!((x - y).abs() < 1e-12, "n={n}: {x} vs {y}");
            }
            for j in 0..n {
                let v = eig.vector(j);
                let av = a.matvec(&v);
                let res: f64 = av
                    .iter()
                    .zip(&v)
                    .map(|(x, y)| (x - y * eig.values[j]).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(res < 1e-13 * (1.0 + a.max_abs()), "residual {res}");
            }
            let vv = eig.vectors.adjoint().matmul(&eig.vectors);
            for i in 0..n {
                for j in 0..n {
                    let t = if i == j { 1.0 } else { 0.0 };
                    assert!((vv[(i, j)] - Cx::new(t, 0.0)).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn eigen_handles_degenerate_and_diagonal_matrices() {
        let mut a = CMatrix::<f64>::identity(6);
        a[(2, 2)] = Cx::new(-3.0, 0.0);
        let eig = hermitian_eigen(&a).unwrap();
        assert_eq!(eig.values, vec![-3.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let z = CMatrix::<f64>::zeros(4, 4);
        assert!(hermitian_eigen(&z).unwrap().values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn eigen_works_in_single_precision() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian(7, &mut rng);
        let a32 = CMatrix::from_fn(7, 7, |i, j| Cx::new(a[(i, j)].re as f32, a[(i, j)].im as f32));
        let e64 = hermitian_eigen(&a).unwrap().values;
        let e32 = hermitian_eigen(&a32).unwrap().values;
        for (x, y) in e64.iter().zip(&e32) {
            assert!((x - *y as f64).abs() < 1e-4);
        }
    }

    #[test]
    fn determinant_and_inverse() {
        let m = RMatrix::from_fn(3, 3, |i, j| [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]][i][j]);
        assert!((determinant(&m) - 18.0f64).abs() < 1e-12);
        let inv = inverse(&m).unwrap();
        let id = m.matmul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                assert!((id[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        let s = RMatrix::from_fn(2, 2, |_, _| 1.0f64);
        assert_eq!(inverse(&s), Err(Error::Singular));
        assert_eq!(determinant(&s), 0.0);
    }

    #[test]
    fn components_split_block_diagonal_patterns() {
        let mut m = CMatrix::<f64>::identity(5);
        m[(0, 3)] = Cx::new(0.5, 0.0);
        m[(3, 0)] = Cx::new(0.5, 0.0);
        let comps = sparsity_components(&m, 0.0);
        assert_eq!(comps, vec![vec![0, 3], vec![1], vec![2], vec![4]]);
    }
}
