//! Gaussian-state linear algebra: covariance matrices in shot-noise units,
//! symplectic spectra, von Neumann entropies, beamsplitter transforms and
//! homodyne conditioning.
//!
//! Quadrature ordering is `(x1, p1, x2, p2, ...)` throughout, and the
//! symplectic form is the block-diagonal matrix with 2x2 blocks
//! `[[0, 1], [-1, 0]]`. All entropies are in bits (base-2 logarithms).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Absolute tolerance for the symmetry check on covariance matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Symplectic eigenvalues of physical states may undershoot 1 by at most this
/// much; values inside the band are clamped to 1 before entropy evaluation.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// One of the two field quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    X,
    P,
}

impl Quadrature {
    fn offset(self) -> usize {
        match self {
            Quadrature::X => 0,
            Quadrature::P => 1,
        }
    }
}

/// Real symmetric covariance matrix of an n-mode Gaussian state, in
/// shot-noise units (vacuum variance = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    m: DMatrix<f64>,
}

impl CovMatrix {
    /// Validates shape (even, square), symmetry to [`SYMMETRY_TOL`] and
    /// positive diagonal entries. Does not check physicality; see
    /// [`CovMatrix::assert_physical`].
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Shape(format!(
                "covariance matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
            return Err(Error::Shape(format!(
                "covariance matrix dimension must be a positive even number, got {}",
                m.nrows()
            )));
        }
        for i in 0..m.nrows() {
            for j in (i + 1)..m.ncols() {
                if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::Shape(format!(
                        "covariance matrix not symmetric at ({i},{j}): {} vs {}",
                        m[(i, j)],
                        m[(j, i)]
                    )));
                }
            }
        }
        for i in 0..m.nrows() {
            if m[(i, i)] <= 0.0 {
                return Err(Error::Shape(format!(
                    "diagonal entry {i} must be positive, got {}",
                    m[(i, i)]
                )));
            }
        }
        Ok(Self { m })
    }

    /// Builds from a matrix that is symmetric only up to floating-point
    /// round-off (e.g. the result of a congruence transform).
    pub(crate) fn from_matrix_symmetrized(mut m: DMatrix<f64>) -> Result<Self> {
        let t = m.transpose();
        m += t;
        m.scale_mut(0.5);
        Self::from_matrix(m)
    }

    /// Vacuum state on `n_modes` modes (identity matrix).
    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            m: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    /// Single mode with quadrature variances `(vx, vp)`.
    pub fn single_mode(vx: f64, vp: f64) -> Result<Self> {
        if vx <= 0.0 || vp <= 0.0 {
            return Err(Error::Domain(format!(
                "single-mode variances must be positive, got ({vx}, {vp})"
            )));
        }
        Ok(Self {
            m: DMatrix::from_diagonal(&DVector::from_vec(vec![vx, vp])),
        })
    }

    /// Direct sum of several states (uncorrelated subsystems).
    pub fn direct_sum(parts: &[CovMatrix]) -> Self {
        let dim = parts.iter().map(|p| p.m.nrows()).sum();
        let mut m = DMatrix::zeros(dim, dim);
        let mut off = 0;
        for p in parts {
            let d = p.m.nrows();
            m.view_mut((off, off), (d, d)).copy_from(&p.m);
            off += d;
        }
        Self { m }
    }

    pub fn n_modes(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Variance of one quadrature of one mode.
    pub fn variance(&self, mode: usize, quad: Quadrature) -> f64 {
        let i = 2 * mode + quad.offset();
        self.m[(i, i)]
    }

    /// Covariance between two quadratures.
    pub fn covariance(&self, mode_a: usize, qa: Quadrature, mode_b: usize, qb: Quadrature) -> f64 {
        self.m[(2 * mode_a + qa.offset(), 2 * mode_b + qb.offset())]
    }

    /// Reduced state over the listed modes (partial trace of the others).
    pub fn reduce(&self, modes: &[usize]) -> Result<CovMatrix> {
        let n = self.n_modes();
        if modes.is_empty() {
            return Err(Error::Shape("cannot reduce to zero modes".into()));
        }
        for &k in modes {
            if k >= n {
                return Err(Error::Shape(format!(
                    "mode index {k} out of range for {n} modes"
                )));
            }
        }
        let idx: Vec<usize> = modes.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
        let d = idx.len();
        let mut m = DMatrix::zeros(d, d);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m[(a, b)] = self.m[(i, j)];
            }
        }
        Ok(CovMatrix { m })
    }

    /// Errors unless every symplectic eigenvalue is at least `1 - PHYSICALITY_TOL`.
    pub fn assert_physical(&self) -> Result<()> {
        let spec = symplectic_eigenvalues(self)?;
        match spec.min() {
            nu if nu >= 1.0 - PHYSICALITY_TOL => Ok(()),
            nu => Err(Error::Unphysical(format!(
                "symplectic eigenvalue {nu} below 1 - {PHYSICALITY_TOL:e}"
            ))),
        }
    }
}

/// Symplectic eigenvalues of a covariance matrix, one per mode, sorted in
/// descending order. Physical states have all values >= 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    values: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        *self.values.last().expect("spectrum is never empty")
    }
}

/// The symplectic form for `n` modes in `(x1, p1, ...)` ordering.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for i in 0..n_modes {
        o[(2 * i, 2 * i + 1)] = 1.0;
        o[(2 * i + 1, 2 * i)] = -1.0;
    }
    o
}

/// `G(x) = (x+1) log2(x+1) - x log2(x)`, the entropy of a thermal state with
/// mean photon number `x`, in bits. Continuous at 0 with `G(0) = 0`.
pub fn g_function(x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::Domain(format!(
            "g_function argument must be nonnegative, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok((x + 1.0) * (x + 1.0).log2() - x * x.log2())
}

/// Symplectic eigenvalues of `gamma`: the absolute values of the eigenvalues
/// of `Omega * gamma`, each conjugate pair reported once.
///
/// Computed through a Cholesky factor `gamma = L L^T`: the matrix
/// `K = L^T Omega L` is real antisymmetric with eigenvalues `+/- i nu`, so the
/// symmetric positive matrix `K^T K` has eigenvalues `nu^2`, each doubled.
pub fn symplectic_eigenvalues(gamma: &CovMatrix) -> Result<SymplecticSpectrum> {
    let n = gamma.n_modes();
    let chol = nalgebra::Cholesky::new(gamma.m.clone())
        .ok_or_else(|| Error::Unphysical("covariance matrix is not positive definite".into()))?;
    let l = chol.l();
    let k = l.transpose() * symplectic_form(n) * &l;
    let ktk = k.transpose() * &k;
    let eig = nalgebra::SymmetricEigen::new(ktk);
    let mut sq: Vec<f64> = eig.eigenvalues.iter().map(|&v| v.max(0.0).sqrt()).collect();
    sq.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalues are finite"));
    // each nu appears twice; average the pair to cancel round-off
    let values: Vec<f64> = (0..n).map(|i| 0.5 * (sq[2 * i] + sq[2 * i + 1])).collect();
    Ok(SymplecticSpectrum { values })
}

/// Von Neumann entropy of a Gaussian state in bits:
/// the sum of `G((nu - 1) / 2)` over the symplectic eigenvalues.
///
/// Eigenvalues inside the `[1 - PHYSICALITY_TOL, 1)` band are clamped to 1;
/// anything lower is an error.
pub fn von_neumann_entropy(gamma: &CovMatrix) -> Result<f64> {
    let spec = symplectic_eigenvalues(gamma)?;
    let mut s = 0.0;
    for &nu in spec.values() {
        if nu < 1.0 - PHYSICALITY_TOL {
            return Err(Error::Unphysical(format!(
                "symplectic eigenvalue {nu} below 1 - {PHYSICALITY_TOL:e}"
            )));
        }
        s += g_function((nu.max(1.0) - 1.0) / 2.0)?;
    }
    Ok(s)
}

/// Conditional covariance matrix of the remaining modes after an ideal
/// homodyne measurement of one quadrature of `measured_mode`.
///
/// Implements `gamma_kept - sigma (X gamma_meas X)^+ sigma^T`; the projector
/// `X` selects a single quadrature, so the pseudoinverse reduces to division
/// by the measured-quadrature variance and the update is a rank-1 correction.
pub fn condition_on_homodyne(
    gamma: &CovMatrix,
    measured_mode: usize,
    quad: Quadrature,
) -> Result<CovMatrix> {
    let n = gamma.n_modes();
    if n < 2 {
        return Err(Error::Shape(
            "conditioning requires at least two modes".into(),
        ));
    }
    if measured_mode >= n {
        return Err(Error::Shape(format!(
            "measured mode {measured_mode} out of range for {n} modes"
        )));
    }
    let mi = 2 * measured_mode + quad.offset();
    let v = gamma.m[(mi, mi)];
    if v <= 0.0 {
        return Err(Error::DegenerateMeasurement(format!(
            "measured-quadrature variance must be positive, got {v}"
        )));
    }
    let keep: Vec<usize> = (0..2 * n).filter(|&i| i / 2 != measured_mode).collect();
    let d = keep.len();
    let mut out = DMatrix::zeros(d, d);
    for (a, &i) in keep.iter().enumerate() {
        for (b, &j) in keep.iter().enumerate() {
            out[(a, b)] = gamma.m[(i, j)] - gamma.m[(i, mi)] * gamma.m[(j, mi)] / v;
        }
    }
    CovMatrix::from_matrix(out)
}

/// Congruence transform for a beamsplitter of transmittance `T` on the mode
/// pair `(mode_a, mode_b)`: `a' = sqrt(T) a + sqrt(1-T) b`,
/// `b' = sqrt(1-T) a - sqrt(T) b` on both quadratures.
pub fn apply_beamsplitter(
    gamma: &CovMatrix,
    mode_a: usize,
    mode_b: usize,
    transmittance: f64,
) -> Result<CovMatrix> {
    let n = gamma.n_modes();
    if mode_a >= n || mode_b >= n {
        return Err(Error::Shape(format!(
            "beamsplitter modes ({mode_a},{mode_b}) out of range for {n} modes"
        )));
    }
    if mode_a == mode_b {
        return Err(Error::Shape("beamsplitter modes must be distinct".into()));
    }
    if !(0.0..=1.0).contains(&transmittance) {
        return Err(Error::Domain(format!(
            "transmittance must lie in [0,1], got {transmittance}"
        )));
    }
    let t = transmittance.sqrt();
    let r = (1.0 - transmittance).sqrt();
    let mut s = DMatrix::identity(2 * n, 2 * n);
    for q in 0..2 {
        let a = 2 * mode_a + q;
        let b = 2 * mode_b + q;
        s[(a, a)] = t;
        s[(a, b)] = r;
        s[(b, a)] = r;
        s[(b, b)] = -t;
    }
    CovMatrix::from_matrix_symmetrized(&s * &gamma.m * s.transpose())
}
