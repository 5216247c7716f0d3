use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64 as C64;

use super::basis::Basis;
use super::state::StateVector;
use crate::error::{Error, Result};

/// Operators whose fill fraction is below this are stored sparse.
pub const SPARSE_DENSITY: f64 = 0.1;

/// Tolerance on `max |M - M†|` for an operator to count as Hermitian.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
enum Repr {
    Dense(DMatrix<C64>),
    Sparse(CsrMatrix<C64>),
}

/// Complex square matrix over a [`Basis`].
#[derive(Debug, Clone)]
pub struct Operator {
    basis: Basis,
    repr: Repr,
    hermitian: bool,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

impl Operator {
    /// Builds from `(row, col, value)` entries; duplicates are summed.
    pub fn from_triplets<I>(basis: Basis, entries: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let dim = basis.total_dim();
        let mut coo = CooMatrix::new(dim, dim);
        for (i, j, v) in entries {
            if v != zero() {
                coo.push(i, j, v);
            }
        }
        let csr = CsrMatrix::from(&coo);
        Operator {
            basis,
            repr: Repr::Sparse(csr),
            hermitian: false,
        }
        .with_natural_storage()
    }

    pub fn from_dense(basis: Basis, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = basis.total_dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Domain(format!(
                "matrix is {}x{} but basis {} has dimension {dim}",
                matrix.nrows(),
                matrix.ncols(),
                basis
            )));
        }
        Ok(Operator {
            basis,
            repr: Repr::Dense(matrix),
            hermitian: false,
        }
        .with_natural_storage())
    }

    pub fn identity(basis: Basis) -> Self {
        let dim = basis.total_dim();
        Operator::from_triplets(basis, (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))))
            .flagged_hermitian()
    }

    pub fn zeros(basis: Basis) -> Self {
        Operator::from_triplets(basis, std::iter::empty()).flagged_hermitian()
    }

    pub fn diagonal(basis: Basis, values: &[f64]) -> Result<Self> {
        if values.len() != basis.total_dim() {
            return Err(Error::Domain("diagonal length does not match basis".into()));
        }
        Ok(Operator::from_triplets(
            basis,
            values
                .iter()
                .enumerate()
                .map(|(i, v)| (i, i, C64::new(*v, 0.0))),
        )
        .flagged_hermitian())
    }

    pub(crate) fn flagged_hermitian(mut self) -> Self {
        self.hermitian = true;
        self
    }

    /// Verifies Hermiticity and sets the flag.
    pub fn into_hermitian(self) -> Result<Self> {
        let deviation = self.hermitian_deviation();
        if deviation > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(self.flagged_hermitian())
    }

    fn with_natural_storage(self) -> Self {
        let dim = self.dim();
        let nnz = self.nnz();
        let want_sparse = dim > 0 && (nnz as f64) < SPARSE_DENSITY * (dim * dim) as f64;
        let Operator {
            basis,
            repr,
            hermitian,
        } = self;
        let repr = match (repr, want_sparse) {
            (Repr::Dense(m), true) => Repr::Sparse(dense_to_csr(&m)),
            (Repr::Sparse(s), false) => Repr::Dense(csr_to_dense(&s)),
            (r, _) => r,
        };
        Operator {
            basis,
            repr,
            hermitian,
        }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.total_dim()
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.repr, Repr::Sparse(_))
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn nnz(&self) -> usize {
        match &self.repr {
            Repr::Sparse(s) => s.nnz(),
            Repr::Dense(m) => m.iter().filter(|v| **v != zero()).count(),
        }
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        match &self.repr {
            Repr::Dense(m) => m[(row, col)],
            Repr::Sparse(s) => s
                .get_entry(row, col)
                .map(|e| e.into_value())
                .unwrap_or_else(zero),
        }
    }

    /// Nonzero entries in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        match &self.repr {
            Repr::Sparse(s) => s.triplet_iter().map(|(i, j, v)| (i, j, *v)).collect(),
            Repr::Dense(m) => {
                let mut out = Vec::new();
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        let v = m[(i, j)];
                        if v != zero() {
                            out.push((i, j, v));
                        }
                    }
                }
                out
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.repr {
            Repr::Dense(m) => m.clone(),
            Repr::Sparse(s) => csr_to_dense(s),
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.triplets()
            .iter()
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        self.sub_unchecked(&self.adjoint()).max_abs()
    }

    pub fn adjoint(&self) -> Operator {
        let repr = match &self.repr {
            Repr::Dense(m) => Repr::Dense(m.adjoint()),
            Repr::Sparse(s) => {
                let t = s.transpose();
                let (offsets, cols, vals) = t.disassemble();
                let vals = vals.into_iter().map(|v| v.conj()).collect();
                Repr::Sparse(
                    CsrMatrix::try_from_csr_data(s.ncols(), s.nrows(), offsets, cols, vals)
                        .expect("transposed CSR data is valid"),
                )
            }
        };
        Operator {
            basis: self.basis.clone(),
            repr,
            hermitian: self.hermitian,
        }
    }

    pub fn scale(&self, factor: C64) -> Operator {
        let repr = match &self.repr {
            Repr::Dense(m) => Repr::Dense(m * factor),
            Repr::Sparse(s) => Repr::Sparse(s * factor),
        };
        Operator {
            basis: self.basis.clone(),
            repr,
            hermitian: self.hermitian && factor.im == 0.0,
        }
    }

    fn combine(&self, other: &Operator, sign: f64) -> Operator {
        let repr = match (&self.repr, &other.repr) {
            (Repr::Sparse(a), Repr::Sparse(b)) => {
                let dim = self.dim();
                let mut coo = CooMatrix::new(dim, dim);
                for (i, j, v) in a.triplet_iter() {
                    coo.push(i, j, *v);
                }
                for (i, j, v) in b.triplet_iter() {
                    coo.push(i, j, *v * sign);
                }
                Repr::Sparse(CsrMatrix::from(&coo))
            }
            _ => Repr::Dense(self.to_dense() + other.to_dense() * C64::new(sign, 0.0)),
        };
        Operator {
            basis: self.basis.clone(),
            repr,
            hermitian: self.hermitian && other.hermitian,
        }
        .pruned()
        .with_natural_storage()
    }

    fn sub_unchecked(&self, other: &Operator) -> Operator {
        self.combine(other, -1.0)
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.basis.ensure_same(&other.basis)?;
        Ok(self.combine(other, 1.0))
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.basis.ensure_same(&other.basis)?;
        Ok(self.combine(other, -1.0))
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Operator) -> Result<Operator> {
        self.basis.ensure_same(&other.basis)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Sparse(a), Repr::Sparse(b)) => Repr::Sparse(sparse_matmul(a, b)),
            _ => Repr::Dense(self.to_dense() * other.to_dense()),
        };
        Ok(Operator {
            basis: self.basis.clone(),
            repr,
            hermitian: false,
        }
        .pruned()
        .with_natural_storage())
    }

    /// `[self, other] = self·other - other·self`.
    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        let ab = self.matmul(other)?;
        let ba = other.matmul(self)?;
        ab.sub(&ba).map(|mut c| {
            c.hermitian = false;
            c
        })
    }

    /// Drops exact zeros left behind by cancellation.
    fn pruned(self) -> Self {
        match self.repr {
            Repr::Sparse(ref s) if s.values().iter().any(|v| *v == zero()) => {
                let dim = self.dim();
                let mut coo = CooMatrix::new(dim, dim);
                for (i, j, v) in s.triplet_iter() {
                    if *v != zero() {
                        coo.push(i, j, *v);
                    }
                }
                Operator {
                    basis: self.basis,
                    repr: Repr::Sparse(CsrMatrix::from(&coo)),
                    hermitian: self.hermitian,
                }
            }
            _ => self,
        }
    }

    /// Kronecker product; the composite basis lists `self`'s factors first.
    pub fn kron(&self, other: &Operator) -> Operator {
        let basis = self.basis.product(&other.basis);
        let db = other.dim();
        let b_entries = other.triplets();
        let entries = self.triplets().into_iter().flat_map(|(i, j, a)| {
            b_entries
                .iter()
                .map(move |&(k, l, b)| (i * db + k, j * db + l, a * b))
        });
        let mut op = Operator::from_triplets(basis, entries.collect::<Vec<_>>());
        op.hermitian = self.hermitian && other.hermitian;
        op
    }

    /// Raw matrix-vector product on an amplitude vector.
    pub(crate) fn apply_vec(&self, v: &DVector<C64>) -> DVector<C64> {
        match &self.repr {
            Repr::Dense(m) => m * v,
            Repr::Sparse(s) => {
                let mut out = DVector::zeros(s.nrows());
                for (i, row) in s.row_iter().enumerate() {
                    let mut acc = zero();
                    for (j, x) in row.col_indices().iter().zip(row.values()) {
                        acc += *x * v[*j];
                    }
                    out[i] = acc;
                }
                out
            }
        }
    }

    /// `self |psi⟩`, not renormalized.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.basis.ensure_same(psi.basis())?;
        Ok(StateVector::from_parts(
            self.basis.clone(),
            self.apply_vec(psi.amplitudes()),
        ))
    }

    /// `⟨psi| self |psi⟩`.
    pub fn expectation(&self, psi: &StateVector) -> Result<C64> {
        let v = self.apply(psi)?;
        psi.inner(&v)
    }

    /// Rows of a sub-block restricted to `indices` (global positions).
    pub(crate) fn submatrix(&self, indices: &[usize]) -> DMatrix<C64> {
        let n = indices.len();
        let mut local = vec![usize::MAX; self.dim()];
        for (l, &g) in indices.iter().enumerate() {
            local[g] = l;
        }
        let mut m = DMatrix::zeros(n, n);
        for (i, j, v) in self.triplets() {
            let (li, lj) = (local[i], local[j]);
            if li != usize::MAX && lj != usize::MAX {
                m[(li, lj)] = v;
            }
        }
        m
    }
}

fn dense_to_csr(m: &DMatrix<C64>) -> CsrMatrix<C64> {
    let mut coo = CooMatrix::new(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if v != zero() {
                coo.push(i, j, v);
            }
        }
    }
    CsrMatrix::from(&coo)
}

fn csr_to_dense(s: &CsrMatrix<C64>) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(s.nrows(), s.ncols());
    for (i, j, v) in s.triplet_iter() {
        m[(i, j)] = *v;
    }
    m
}

fn sparse_matmul(a: &CsrMatrix<C64>, b: &CsrMatrix<C64>) -> CsrMatrix<C64> {
    let n = b.ncols();
    let mut acc = vec![zero(); n];
    let mut touched: Vec<usize> = Vec::new();
    let mut mark = vec![false; n];
    let mut coo = CooMatrix::new(a.nrows(), n);
    for (i, row) in a.row_iter().enumerate() {
        for (k, x) in row.col_indices().iter().zip(row.values()) {
            let brow = b.row(*k);
            for (j, y) in brow.col_indices().iter().zip(brow.values()) {
                if !mark[*j] {
                    mark[*j] = true;
                    touched.push(*j);
                }
                acc[*j] += *x * *y;
            }
        }
        touched.sort_unstable();
        for &j in &touched {
            if acc[j] != zero() {
                coo.push(i, j, acc[j]);
            }
            acc[j] = zero();
            mark[j] = false;
        }
        touched.clear();
    }
    CsrMatrix::from(&coo)
}

/// Kronecker product of two values of the same kind.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for Operator {
    fn tensor(&self, other: &Self) -> Self {
        self.kron(other)
    }
}

impl Tensor for StateVector {
    fn tensor(&self, other: &Self) -> Self {
        let basis = self.basis().product(other.basis());
        let b = other.amplitudes();
        let mut amps = DVector::zeros(self.dim() * other.dim());
        for (i, x) in self.amplitudes().iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                amps[i * b.len() + j] = x * y;
            }
        }
        StateVector::from_parts(basis, amps)
    }
}

/// `a ⊗ b`; the composite basis concatenates factor lists in argument order.
pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// `local` acting on factor `factor` of `basis`, identity elsewhere.
pub fn embed(basis: &Basis, factor: usize, local: &Operator) -> Result<Operator> {
    let sub = basis
        .factor(factor)
        .ok_or_else(|| Error::Domain(format!("no factor {factor} in {basis}")))?;
    local.basis().ensure_same(&Basis::single(sub))?;
    let mut op: Option<Operator> = None;
    for (i, f) in basis.factors().iter().enumerate() {
        let piece = if i == factor {
            local.clone()
        } else {
            Operator::identity(Basis::single(*f))
        };
        op = Some(match op {
            None => piece,
            Some(acc) => acc.kron(&piece),
        });
    }
    Ok(op.expect("basis has at least one factor"))
}
