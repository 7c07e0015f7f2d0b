//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

pub type CMat<T> = DMatrix<C<T>>;
pub type CVec<T> = DVector<C<T>>;

pub(crate) fn czero<T: Real>() -> C<T> {
    C::new(T::zero(), T::zero())
}

pub(crate) fn creal<T: Real>(x: T) -> C<T> {
    C::new(x, T::zero())
}

pub fn identity<T: Real>(n: usize) -> CMat<T> {
    CMat::<T>::identity(n, n)
}

/// `(M + Mᴴ)/2`, in place.
pub fn symmetrize<T: Real>(m: &mut CMat<T>) {
    let n = m.nrows();
    let half = T::lit(0.5);
    for i in 0..n {
        m[(i, i)] = creal(m[(i, i)].re);
        for j in (i + 1)..n {
            let v = (m[(i, j)] + m[(j, i)].conj()).scale(half);
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
}

pub fn frobenius<T: Real>(m: &CMat<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, z| acc + z.norm_sqr())
        .sqrt()
}

pub fn trace_re<T: Real>(m: &CMat<T>) -> T {
    (0..m.nrows().min(m.ncols())).fold(T::zero(), |acc, i| acc + m[(i, i)].re)
}

/// Cholesky factor `L` (lower, real positive diagonal) of a Hermitian
/// positive definite matrix. Only the lower triangle of the input is read.
#[derive(Debug, Clone)]
pub struct HermitianCholesky<T: Real> {
    l: CMat<T>,
}

impl<T: Real> HermitianCholesky<T> {
    pub fn new(mut m: CMat<T>) -> Result<Self> {
        let n = m.nrows();
        assert!(m.is_square(), "Cholesky input must be square");
        for j in 0..n {
            let mut d = m[(j, j)].re;
            for k in 0..j {
                d -= m[(j, k)].norm_sqr();
            }
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite);
            }
            let d = d.sqrt();
            m[(j, j)] = creal(d);
            for i in (j + 1)..n {
                let mut v = m[(i, j)];
                for k in 0..j {
                    v -= m[(i, k)] * m[(j, k)].conj();
                }
                m[(i, j)] = v.unscale(d);
            }
            for i in 0..j {
                m[(i, j)] = czero();
            }
        }
        Ok(HermitianCholesky { l: m })
    }

    pub fn l(&self) -> &CMat<T> {
        &self.l
    }

    /// `ln|M|`.
    pub fn ln_det(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.l.nrows() {
            acc += self.l[(i, i)].re.ln();
        }
        acc + acc
    }

    /// Solves `M x = b` in place, column by column.
    pub fn solve_in_place(&self, b: &mut CMat<T>) {
        let n = self.l.nrows();
        let l = &self.l;
        for c in 0..b.ncols() {
            for i in 0..n {
                let mut v = b[(i, c)];
                for k in 0..i {
                    v -= l[(i, k)] * b[(k, c)];
                }
                b[(i, c)] = v.unscale(l[(i, i)].re);
            }
            for i in (0..n).rev() {
                let mut v = b[(i, c)];
                for k in (i + 1)..n {
                    v -= l[(k, i)].conj() * b[(k, c)];
                }
                b[(i, c)] = v.unscale(l[(i, i)].re);
            }
        }
    }

    pub fn solve(&self, b: &CMat<T>) -> CMat<T> {
        let mut x = b.clone();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_vec(&self, b: &CVec<T>) -> CVec<T> {
        let mut x = CMat::<T>::from_column_slice(b.len(), 1, b.as_slice());
        self.solve_in_place(&mut x);
        CVec::<T>::from_column_slice(x.as_slice())
    }
}

pub fn cholesky<T: Real>(m: CMat<T>) -> Result<HermitianCholesky<T>> {
    HermitianCholesky::new(m)
}

/// Natural log-determinant of a Hermitian positive definite matrix.
pub fn ln_det_hpd<T: Real>(m: &CMat<T>) -> Result<T> {
    Ok(cholesky(m.clone())?.ln_det())
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eig<T: Real>(m: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::<T>::zeros(0, 0));
    }
    let mut h = m.clone();
    symmetrize(&mut h);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::<T>::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Smallest eigenvalue of a Hermitian matrix; `0` for an empty matrix.
pub fn min_eigenvalue<T: Real>(m: &CMat<T>) -> T {
    hermitian_eig(m).0.first().copied().unwrap_or_else(T::zero)
}

/// `Hᴴ S H`, Hermitian by construction.
pub fn quad_form<T: Real>(h: &CMat<T>, s: &CMat<T>) -> CMat<T> {
    let mut out = h.ad_mul(&(s * h));
    symmetrize(&mut out);
    out
}
