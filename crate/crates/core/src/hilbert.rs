//! Truncated number-basis realization of the canonical pair and its fiducials.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cis, from_usize, lit, real, to_f64, Modulus, Real, C};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceConfig<T> {
    dim: usize,
    hbar: T,
    omega: T,
}

impl<T: Real> SpaceConfig<T> {
    pub fn new(dim: usize, hbar: T, omega: T) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Config(format!("dim must be at least 2, got {dim}")));
        }
        if !(hbar > T::zero() && hbar.is_finite()) {
            return Err(Error::Config(format!("hbar must be positive, got {}", to_f64(hbar))));
        }
        if !(omega > T::zero() && omega.is_finite()) {
            return Err(Error::Config(format!("omega must be positive, got {}", to_f64(omega))));
        }
        Ok(Self { dim, hbar, omega })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    /// Size of the block on which spectral and propagator claims are trusted.
    pub fn trusted_block(&self) -> usize {
        self.dim / 2
    }

    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(dim, self.hbar, self.omega)
    }
}

/// Largest `|M - M^dagger|` tolerated by [`Operator::hermitian`], relative to `max |M|`.
pub fn hermitian_tolerance<T: Real>() -> T {
    let eps = T::default_epsilon() * lit(1e4);
    eps.max(lit(1e-10))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real> {
    amps: DVector<C<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn new(amps: DVector<C<T>>) -> Result<Self> {
        if amps.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Invalid("state vector has non-finite amplitudes".into()));
        }
        Ok(Self { amps })
    }

    pub fn from_vec(amps: Vec<C<T>>) -> Result<Self> {
        Self::new(DVector::from_vec(amps))
    }

    pub fn basis(dim: usize, n: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::Invalid(format!("basis index {n} outside dimension {dim}")));
        }
        let mut amps = DVector::zeros(dim);
        amps[n] = real(T::one());
        Ok(Self { amps })
    }

    pub fn amps(&self) -> &DVector<C<T>> {
        &self.amps
    }

    pub fn into_amps(self) -> DVector<C<T>> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> T {
        self.amps.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= T::zero() {
            return Err(Error::Invalid("cannot normalize the zero vector".into()));
        }
        Ok(Self { amps: self.amps.map(|z| z / n) })
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Self) -> C<T> {
        self.amps.dotc(&other.amps)
    }

    /// `<self|A|self>`
    pub fn expect(&self, op: &Operator<T>) -> C<T> {
        self.amps.dotc(&(&op.mat * &self.amps))
    }

    pub fn scaled(&self, z: C<T>) -> Self {
        Self { amps: self.amps.map(|a| a * z) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operator<T: Real> {
    mat: DMatrix<C<T>>,
    hermitian: bool,
}

impl<T: Real> Operator<T> {
    pub fn new(mat: DMatrix<C<T>>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Invalid(format!("operator matrix is {}x{}", mat.nrows(), mat.ncols())));
        }
        Ok(Self { mat, hermitian: false })
    }

    /// Accepts a matrix that is hermitian up to rounding and stores its exact hermitian part.
    pub fn hermitian(mat: DMatrix<C<T>>) -> Result<Self> {
        let op = Self::new(mat)?;
        let defect = op.hermiticity_defect();
        let scale = op.max_abs().max(T::one());
        if defect > hermitian_tolerance::<T>() * scale {
            return Err(Error::NotHermitian(to_f64(defect)));
        }
        let half: T = lit(0.5);
        let h = (&op.mat + op.mat.adjoint()) * real(half);
        Ok(Self { mat: h, hermitian: true })
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: DMatrix::identity(dim, dim), hermitian: true }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { mat: DMatrix::zeros(dim, dim), hermitian: true }
    }

    pub fn mat(&self) -> &DMatrix<C<T>> {
        &self.mat
    }

    pub fn into_mat(self) -> DMatrix<C<T>> {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn hermiticity_defect(&self) -> T {
        let n = self.dim();
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                let d = (self.mat[(i, j)] - self.mat[(j, i)].conj()).modulus();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn max_abs(&self) -> T {
        self.mat.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
    }

    /// Leading `k`x`k` block of the matrix.
    pub fn block(&self, k: usize) -> DMatrix<C<T>> {
        let k = k.min(self.dim());
        self.mat.view((0, 0), (k, k)).into_owned()
    }

    /// `max |A_ij - B_ij|` over the leading `k`x`k` block.
    pub fn block_distance(&self, other: &Self, k: usize) -> T {
        let k = k.min(self.dim()).min(other.dim());
        let mut worst = T::zero();
        for i in 0..k {
            for j in 0..k {
                worst = worst.max((self.mat[(i, j)] - other.mat[(i, j)]).modulus());
            }
        }
        worst
    }

    pub fn adjoint(&self) -> Self {
        Self { mat: self.mat.adjoint(), hermitian: self.hermitian }
    }

    pub fn apply(&self, v: &StateVector<T>) -> StateVector<T> {
        StateVector { amps: &self.mat * &v.amps }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self { mat: &self.mat * &other.mat, hermitian: false }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { mat: &self.mat + &other.mat, hermitian: self.hermitian && other.hermitian }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { mat: &self.mat - &other.mat, hermitian: self.hermitian && other.hermitian }
    }

    pub fn scale(&self, x: T) -> Self {
        Self { mat: &self.mat * real(x), hermitian: self.hermitian }
    }

    pub fn scale_complex(&self, z: C<T>) -> Self {
        Self { mat: &self.mat * z, hermitian: self.hermitian && z.im == T::zero() }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self { mat: &self.mat * &other.mat - &other.mat * &self.mat, hermitian: false }
    }

    pub fn trace(&self) -> C<T> {
        self.mat.trace()
    }

    fn require_hermitian(&self) -> Result<()> {
        if self.hermitian {
            return Ok(());
        }
        let defect = self.hermiticity_defect();
        if defect > hermitian_tolerance::<T>() * self.max_abs().max(T::one()) {
            return Err(Error::NotHermitian(to_f64(defect)));
        }
        Ok(())
    }
}

/// Annihilation operator `a` of the Ω-basis, truncated to `dim`.
pub fn annihilation<T: Real>(dim: usize) -> DMatrix<C<T>> {
    let mut a = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = real(from_usize::<T>(n).sqrt());
    }
    a
}

/// Returns `(P, Q)` with `Q = sqrt(ħ/2Ω)(a + a†)` and `P = i sqrt(ħΩ/2)(a† - a)`.
pub fn canonical_ops<T: Real>(cfg: &SpaceConfig<T>) -> Result<(Operator<T>, Operator<T>)> {
    let d = cfg.dim();
    if d < 2 {
        return Err(Error::Config("dim must be at least 2".into()));
    }
    let half: T = lit(0.5);
    let sq = (cfg.hbar() * half / cfg.omega()).sqrt();
    let sp = (cfg.hbar() * cfg.omega() * half).sqrt();
    let mut q = DMatrix::zeros(d, d);
    let mut p = DMatrix::zeros(d, d);
    for n in 1..d {
        let r = from_usize::<T>(n).sqrt();
        q[(n - 1, n)] = real(sq * r);
        q[(n, n - 1)] = real(sq * r);
        // a† has entries (n, n-1); a has (n-1, n).
        p[(n, n - 1)] = Complex::new(T::zero(), sp * r);
        p[(n - 1, n)] = Complex::new(T::zero(), -sp * r);
    }
    Ok((Operator { mat: p, hermitian: true }, Operator { mat: q, hermitian: true }))
}

/// Number operator `a†a` in the Ω-basis.
pub fn number_op<T: Real>(cfg: &SpaceConfig<T>) -> Operator<T> {
    let d = cfg.dim();
    let mut m = DMatrix::zeros(d, d);
    for n in 0..d {
        m[(n, n)] = real(from_usize::<T>(n));
    }
    Operator { mat: m, hermitian: true }
}

pub fn fiducial_ground<T: Real>(cfg: &SpaceConfig<T>) -> StateVector<T> {
    StateVector::basis(cfg.dim(), 0).expect("dim >= 2")
}

pub fn fock_state<T: Real>(cfg: &SpaceConfig<T>, n: usize) -> Result<StateVector<T>> {
    StateVector::basis(cfg.dim(), n)
}

#[derive(Debug, Clone)]
pub struct Eigensystem<T: Real> {
    /// Ascending.
    pub values: Vec<T>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: DMatrix<C<T>>,
}

impl<T: Real> Eigensystem<T> {
    /// `max_k ||H v_k - λ_k v_k||`.
    pub fn max_residual(&self, h: &Operator<T>) -> T {
        let hv = h.mat() * &self.vectors;
        let mut worst = T::zero();
        for (k, &lam) in self.values.iter().enumerate() {
            let r = hv.column(k) - self.vectors.column(k) * real(lam);
            worst = worst.max(r.norm());
        }
        worst
    }
}

pub fn eigensystem<T: Real>(h: &Operator<T>) -> Result<Eigensystem<T>> {
    h.require_hermitian()?;
    let eig = h.mat.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(h.dim(), h.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Eigensystem { values, vectors })
}

/// Ascending eigenvalues of a hermitian operator.
pub fn spectrum<T: Real>(h: &Operator<T>) -> Result<Vec<T>> {
    Ok(eigensystem(h)?.values)
}

/// `exp(-i H t / ħ)` through the hermitian eigendecomposition.
pub fn evolve<T: Real>(h: &Operator<T>, t: T, cfg: &SpaceConfig<T>) -> Result<Operator<T>> {
    let es = eigensystem(h)?;
    let mut scaled = es.vectors.clone();
    for (k, &lam) in es.values.iter().enumerate() {
        let ph = cis(-lam * t / cfg.hbar());
        for z in scaled.column_mut(k).iter_mut() {
            *z *= ph;
        }
    }
    Ok(Operator { mat: scaled * es.vectors.adjoint(), hermitian: false })
}
