use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exponent vectors of all monomials in `d` variables with total degree `<= p`,
/// constant first, then by increasing degree.
pub fn monomial_exponents(d: usize, p: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; d]];
    let mut frontier = vec![vec![0u32; d]];
    for _ in 0..p {
        let mut next = Vec::new();
        for e in &frontier {
            // Only raise components at or after the last non-zero one: each monomial once.
            let last = e.iter().rposition(|&x| x > 0).unwrap_or(0);
            for c in last..d {
                let mut f = e.clone();
                f[c] += 1;
                next.push(f);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Polynomial basis on a scaled state `x = B / scale`.
#[derive(Debug, Clone)]
pub struct Basis<S> {
    exps: Vec<Vec<u32>>,
    scale: S,
}

impl<S: Scalar> Basis<S> {
    pub fn new(dim: usize, degree: usize, scale: S) -> Self {
        Self { exps: monomial_exponents(dim, degree), scale }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn eval_into(&self, b: &[S], out: &mut [S]) {
        for (o, e) in out.iter_mut().zip(&self.exps) {
            let mut v = S::one();
            for (&bi, &p) in b.iter().zip(e) {
                if p > 0 {
                    v = v * (bi / self.scale).powi(p as i32);
                }
            }
            *o = v;
        }
    }
}

/// Normal-equation least squares with a Cholesky factor, reused across right-hand sides.
#[derive(Debug, Clone)]
pub struct LeastSquares<S> {
    n: usize,
    chol: Vec<S>,
}

impl<S: Scalar> LeastSquares<S> {
    /// Factors the Gram matrix of `rows` (row-major, `n` columns). `level` only tags errors.
    pub fn new(rows: &[S], n: usize, level: usize) -> Result<Self> {
        let mut gram = vec![S::zero(); n * n];
        for r in rows.chunks(n) {
            for a in 0..n {
                let ra = r[a];
                for b in 0..=a {
                    gram[a * n + b] = gram[a * n + b] + ra * r[b];
                }
            }
        }
        let scale = (0..n).map(|a| gram[a * n + a]).fold(S::zero(), S::max);
        let eps = S::lit(1e-12) * scale.max(S::min_positive_value());
        let mut l = vec![S::zero(); n * n];
        for a in 0..n {
            for b in 0..=a {
                let mut s = gram[a * n + b];
                for c in 0..b {
                    s = s - l[a * n + c] * l[b * n + c];
                }
                if a == b {
                    if !(s > eps) {
                        return Err(Error::Numerical { level, msg: "regression matrix is singular".into() });
                    }
                    l[a * n + a] = s.sqrt();
                } else {
                    l[a * n + b] = s / l[b * n + b];
                }
            }
        }
        Ok(Self { n, chol: l })
    }

    /// Coefficients for the target `y` over the same rows.
    pub fn solve(&self, rows: &[S], y: &[S]) -> Vec<S> {
        let n = self.n;
        let mut rhs = vec![S::zero(); n];
        for (r, &v) in rows.chunks(n).zip(y) {
            for a in 0..n {
                rhs[a] = rhs[a] + r[a] * v;
            }
        }
        self.solve_normal(rhs)
    }

    /// Solves `G beta = rhs` with the stored factor.
    pub fn solve_normal(&self, mut rhs: Vec<S>) -> Vec<S> {
        let n = self.n;
        let l = &self.chol;
        for a in 0..n {
            let mut s = rhs[a];
            for c in 0..a {
                s = s - l[a * n + c] * rhs[c];
            }
            rhs[a] = s / l[a * n + a];
        }
        for a in (0..n).rev() {
            let mut s = rhs[a];
            for c in a + 1..n {
                s = s - l[c * n + a] * rhs[c];
            }
            rhs[a] = s / l[a * n + a];
        }
        rhs
    }
}

#[inline]
pub(crate) fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}
