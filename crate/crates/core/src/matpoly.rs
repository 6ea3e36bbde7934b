//! Dense matrix polynomials over the complex numbers.
//!
//! A [`MatrixPolynomial`] stores the coefficient list `A_0, …, A_deg` of
//! `P(λ) = Σ λ^i A_i` with square complex coefficients. The declared degree is
//! formal: the leading coefficient may be zero, and the effective degree of
//! derived scalar polynomials is recovered by trimming. All values are
//! immutable after construction and safe to share across threads.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;

/// Complex scalar used throughout the crate.
pub type Cx = Complex64;
/// Dense dynamically-sized complex matrix.
pub type CMatrix = DMatrix<Cx>;

/// Relative tolerance used when trimming trailing coefficients of interpolated
/// determinants. Separates genuine degree drop (singular leading coefficient)
/// from interpolation roundoff.
pub const DEFAULT_TRIM_TOL: f64 = 1e-10;

/// Errors raised by matrix-polynomial constructors and accessors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatPolyError {
    /// The coefficient list was empty.
    EmptyCoefficients,
    /// A coefficient was not square or did not match the leading size.
    CoefficientShape {
        index: usize,
        rows: usize,
        cols: usize,
        expected: usize,
    },
    /// Horner shift index outside `0..=deg`.
    ShiftOutOfRange { k: usize, deg: usize },
    /// Block-structured operation on a size that is not a multiple of the block size.
    BlockMismatch { size: usize, block: usize },
}

impl fmt::Display for MatPolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatPolyError::EmptyCoefficients => write!(f, "coefficient list is empty"),
            MatPolyError::CoefficientShape {
                index,
                rows,
                cols,
                expected,
            } => write!(
                f,
                "coefficient {index} is {rows}x{cols}, expected {expected}x{expected}"
            ),
            MatPolyError::ShiftOutOfRange { k, deg } => {
                write!(f, "Horner shift index {k} outside 0..={deg}")
            }
            MatPolyError::BlockMismatch { size, block } => {
                write!(f, "size {size} is not a multiple of block size {block}")
            }
        }
    }
}

impl std::error::Error for MatPolyError {}

/// Square matrix polynomial `P(λ) = Σ λ^i A_i` with dense complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial {
    size: usize,
    coeffs: Vec<CMatrix>,
}

impl MatrixPolynomial {
    /// Builds a polynomial from its coefficient list, index `i` holding the
    /// coefficient of `λ^i`. All coefficients must be square of equal size.
    pub fn new(coeffs: Vec<CMatrix>) -> Result<Self, MatPolyError> {
        let first = coeffs.first().ok_or(MatPolyError::EmptyCoefficients)?;
        let size = first.nrows();
        for (index, c) in coeffs.iter().enumerate() {
            if c.nrows() != size || c.ncols() != size {
                return Err(MatPolyError::CoefficientShape {
                    index,
                    rows: c.nrows(),
                    cols: c.ncols(),
                    expected: size,
                });
            }
        }
        Ok(Self { size, coeffs })
    }

    /// Degree-0 polynomial equal to the given constant matrix.
    pub fn constant(matrix: CMatrix) -> Self {
        assert_eq!(matrix.nrows(), matrix.ncols(), "constant must be square");
        Self {
            size: matrix.nrows(),
            coeffs: vec![matrix],
        }
    }

    /// The identity, as a degree-0 polynomial.
    pub fn identity(size: usize) -> Self {
        Self::constant(CMatrix::identity(size, size))
    }

    /// The zero polynomial with the given formal degree.
    pub fn zero(size: usize, deg: usize) -> Self {
        Self {
            size,
            coeffs: vec![CMatrix::zeros(size, size); deg + 1],
        }
    }

    /// A pencil `λ X + Y` as a degree-1 polynomial.
    pub fn pencil(y: CMatrix, x: CMatrix) -> Self {
        assert_eq!(x.nrows(), y.nrows());
        assert_eq!(x.ncols(), y.ncols());
        Self::new(vec![y, x]).expect("pencil coefficients are square")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Declared (formal) degree: index of the last stored coefficient.
    pub fn deg(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    /// Coefficient of `λ^i`; zero matrix beyond the stored degree.
    pub fn coeff(&self, i: usize) -> CMatrix {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.size, self.size))
    }

    /// Largest coefficient entry in absolute value.
    pub fn max_coeff_magnitude(&self) -> f64 {
        self.coeffs
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Evaluates `P(λ0)` by Horner's rule.
    pub fn evaluate(&self, lambda0: Cx) -> CMatrix {
        let mut acc = self.coeffs[self.deg()].clone();
        for i in (0..self.deg()).rev() {
            acc = acc.map(|z| z * lambda0) + &self.coeffs[i];
        }
        acc
    }

    /// Degree-`k` Horner shift `P_k(λ) = A_{deg−k} + λ A_{deg−k+1} + … + λ^k A_deg`.
    ///
    /// `P_0 = A_deg`, `P_deg = P`, and `P_{k+1}(λ) = λ P_k(λ) + A_{deg−k−1}`.
    pub fn horner_shift(&self, k: usize) -> Result<Self, MatPolyError> {
        let deg = self.deg();
        if k > deg {
            return Err(MatPolyError::ShiftOutOfRange { k, deg });
        }
        let coeffs = self.coeffs[deg - k..].to_vec();
        Self::new(coeffs)
    }

    /// Multiplies by `λ` (shifts every coefficient up one power).
    pub fn times_lambda(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(CMatrix::zeros(self.size, self.size));
        coeffs.extend(self.coeffs.iter().cloned());
        Self {
            size: self.size,
            coeffs,
        }
    }

    /// Scalar polynomial `det P(λ)` by evaluation–interpolation.
    ///
    /// Samples the determinant at `size·deg + 1` nodes on a circle of radius
    /// `max(1, maxmag^(1/deg))` and recovers coefficients through the inverse
    /// discrete Fourier relation. Trailing coefficients below the trim
    /// tolerance (relative to the largest coefficient) are dropped, so a
    /// singular leading coefficient yields a genuinely shorter polynomial. An
    /// identically zero determinant comes back as the zero polynomial.
    pub fn det_poly(&self) -> ScalarPolynomial {
        let deg = self.deg();
        if deg == 0 {
            let d = lu_det(&self.coeffs[0]);
            return ScalarPolynomial::new(vec![d]);
        }
        let bound = self.size * deg;
        let nodes = bound + 1;
        let radius = self.max_coeff_magnitude().powf(1.0 / deg as f64).max(1.0);
        let tau = std::f64::consts::TAU;
        let values: Vec<Cx> = (0..nodes)
            .map(|k| {
                let theta = tau * k as f64 / nodes as f64;
                let node = Cx::from_polar(radius, theta);
                lu_det(&self.evaluate(node))
            })
            .collect();
        let mut coeffs = Vec::with_capacity(nodes);
        for j in 0..nodes {
            let mut acc = Cx::new(0.0, 0.0);
            for (k, v) in values.iter().enumerate() {
                let theta = -tau * (j * k % nodes) as f64 / nodes as f64;
                acc += v * Cx::from_polar(1.0, theta);
            }
            acc /= nodes as f64;
            acc /= Cx::new(radius.powi(j as i32), 0.0);
            coeffs.push(acc);
        }
        ScalarPolynomial::new(coeffs).trimmed(DEFAULT_TRIM_TOL)
    }

    /// True iff `det P(λ)` is a nonzero constant: effective degree 0 with
    /// constant magnitude above `tol`.
    pub fn is_unimodular(&self, tol: f64) -> bool {
        let det = self.det_poly();
        match det.effective_degree(DEFAULT_TRIM_TOL) {
            Some(0) => det.coeffs()[0].norm() > tol,
            _ => false,
        }
    }

    /// True iff the determinant is nonzero at one of `samples` random points.
    ///
    /// Nonzero is judged against a Hadamard-bound scale of the evaluated
    /// matrix, so structurally singular polynomials test false even when
    /// roundoff leaves a tiny residual determinant.
    pub fn is_regular_with<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> bool {
        for _ in 0..samples.max(1) {
            let lambda0 = random_disc_point(rng, 2.0);
            let value = self.evaluate(lambda0);
            let det = lu_det(&value).norm();
            let scale = hadamard_bound(&value);
            if scale > 0.0 && det > 1e-10 * scale {
                return true;
            }
        }
        false
    }

    /// [`Self::is_regular_with`] on an internal fixed-seed generator, so the
    /// answer is reproducible.
    pub fn is_regular(&self, samples: usize) -> bool {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_0001);
        self.is_regular_with(samples, &mut rng)
    }

    /// Transposes the `k×k` grid of equal square blocks, keeping each block's
    /// contents unchanged.
    pub fn block_transpose(&self, block_size: usize) -> Result<Self, MatPolyError> {
        if block_size == 0 || self.size % block_size != 0 {
            return Err(MatPolyError::BlockMismatch {
                size: self.size,
                block: block_size,
            });
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| block_transpose_matrix(c, block_size))
            .collect();
        Ok(Self {
            size: self.size,
            coeffs,
        })
    }

    /// Largest entry of `self − other` in absolute value, across coefficients.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let deg = self.deg().max(other.deg());
        let mut worst = 0.0f64;
        for i in 0..=deg {
            let d = self.coeff(i) - other.coeff(i);
            for z in d.iter() {
                worst = worst.max(z.norm());
            }
        }
        worst
    }

    /// Exact coefficient-wise equality up to the common formal degree
    /// (missing coefficients compare as zero).
    pub fn eq_exact(&self, other: &Self) -> bool {
        self.size == other.size && self.max_abs_diff(other) == 0.0
    }
}

impl Add for &MatrixPolynomial {
    type Output = MatrixPolynomial;
    fn add(self, rhs: &MatrixPolynomial) -> MatrixPolynomial {
        assert_eq!(self.size, rhs.size);
        let deg = self.deg().max(rhs.deg());
        let coeffs = (0..=deg).map(|i| self.coeff(i) + rhs.coeff(i)).collect();
        MatrixPolynomial {
            size: self.size,
            coeffs,
        }
    }
}

impl Sub for &MatrixPolynomial {
    type Output = MatrixPolynomial;
    fn sub(self, rhs: &MatrixPolynomial) -> MatrixPolynomial {
        assert_eq!(self.size, rhs.size);
        let deg = self.deg().max(rhs.deg());
        let coeffs = (0..=deg).map(|i| self.coeff(i) - rhs.coeff(i)).collect();
        MatrixPolynomial {
            size: self.size,
            coeffs,
        }
    }
}

impl Neg for &MatrixPolynomial {
    type Output = MatrixPolynomial;
    fn neg(self) -> MatrixPolynomial {
        MatrixPolynomial {
            size: self.size,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &MatrixPolynomial {
    type Output = MatrixPolynomial;
    fn mul(self, rhs: &MatrixPolynomial) -> MatrixPolynomial {
        assert_eq!(self.size, rhs.size);
        let deg = self.deg() + rhs.deg();
        let mut coeffs = vec![CMatrix::zeros(self.size, self.size); deg + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        MatrixPolynomial {
            size: self.size,
            coeffs,
        }
    }
}

/// Scalar polynomial with complex coefficients, index = power.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarPolynomial {
    coeffs: Vec<Cx>,
}

impl ScalarPolynomial {
    pub fn new(coeffs: Vec<Cx>) -> Self {
        assert!(!coeffs.is_empty(), "scalar polynomial needs a coefficient");
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Cx] {
        &self.coeffs
    }

    pub fn formal_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn evaluate(&self, lambda0: Cx) -> Cx {
        let mut acc = Cx::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * lambda0 + c;
        }
        acc
    }

    /// All coefficients are exactly zero (or denormally small).
    pub fn is_zero(&self) -> bool {
        self.max_abs() < 1e-290
    }

    /// Drops trailing coefficients with magnitude below `tol` relative to the
    /// largest coefficient. The constant term is always kept.
    pub fn trimmed(&self, tol: f64) -> Self {
        let scale = self.max_abs();
        if scale == 0.0 {
            return Self::new(vec![Cx::new(0.0, 0.0)]);
        }
        let mut end = self.coeffs.len();
        while end > 1 && self.coeffs[end - 1].norm() <= tol * scale {
            end -= 1;
        }
        Self::new(self.coeffs[..end].to_vec())
    }

    /// Degree after trimming, or `None` for the (numerically) zero polynomial.
    pub fn effective_degree(&self, tol: f64) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.trimmed(tol).formal_degree())
        }
    }

    /// Roots with multiplicity, as eigenvalues of the companion matrix of the
    /// trimmed, monic-normalized polynomial. Degree 0 has no roots.
    pub fn roots(&self) -> Vec<Cx> {
        let trimmed = self.trimmed(DEFAULT_TRIM_TOL);
        let k = trimmed.formal_degree();
        if k == 0 || trimmed.is_zero() {
            return Vec::new();
        }
        let lead = trimmed.coeffs[k];
        let mut companion = CMatrix::zeros(k, k);
        for i in 1..k {
            companion[(i, i - 1)] = Cx::new(1.0, 0.0);
        }
        for i in 0..k {
            companion[(i, k - 1)] = -trimmed.coeffs[i] / lead;
        }
        let schur = companion.clone().schur();
        match schur.eigenvalues() {
            Some(v) => v.iter().cloned().collect(),
            // complex Schur always triangularizes; the diagonal carries the spectrum
            None => companion.schur().unpack().1.diagonal().iter().cloned().collect(),
        }
    }
}

impl Mul for &ScalarPolynomial {
    type Output = ScalarPolynomial;
    fn mul(self, rhs: &ScalarPolynomial) -> ScalarPolynomial {
        let mut coeffs = vec![Cx::new(0.0, 0.0); self.formal_degree() + rhs.formal_degree() + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        ScalarPolynomial::new(coeffs)
    }
}

impl Add for &ScalarPolynomial {
    type Output = ScalarPolynomial;
    fn add(self, rhs: &ScalarPolynomial) -> ScalarPolynomial {
        let deg = self.formal_degree().max(rhs.formal_degree());
        let coeffs = (0..=deg)
            .map(|i| {
                self.coeffs.get(i).cloned().unwrap_or_default()
                    + rhs.coeffs.get(i).cloned().unwrap_or_default()
            })
            .collect();
        ScalarPolynomial::new(coeffs)
    }
}

impl Sub for &ScalarPolynomial {
    type Output = ScalarPolynomial;
    fn sub(self, rhs: &ScalarPolynomial) -> ScalarPolynomial {
        let deg = self.formal_degree().max(rhs.formal_degree());
        let coeffs = (0..=deg)
            .map(|i| {
                self.coeffs.get(i).cloned().unwrap_or_default()
                    - rhs.coeffs.get(i).cloned().unwrap_or_default()
            })
            .collect();
        ScalarPolynomial::new(coeffs)
    }
}

/// Determinant through LU factorization.
pub fn lu_det(matrix: &CMatrix) -> Cx {
    matrix.clone().lu().determinant()
}

/// Product of row 2-norms; overestimates `|det|` and serves as its scale.
pub fn hadamard_bound(matrix: &CMatrix) -> f64 {
    (0..matrix.nrows())
        .map(|i| matrix.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .product()
}

/// Uniform point in the disc of the given radius, bounded away from 0.
pub fn random_disc_point<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Cx {
    loop {
        let re = rng.gen_range(-radius..radius);
        let im = rng.gen_range(-radius..radius);
        let z = Cx::new(re, im);
        if z.norm() > 0.05 * radius && z.norm() < radius {
            return z;
        }
    }
}

/// Transposes a square grid of equal square blocks without transposing the
/// blocks themselves.
pub fn block_transpose_matrix(matrix: &CMatrix, block_size: usize) -> CMatrix {
    let k = matrix.nrows() / block_size;
    assert_eq!(k * block_size, matrix.nrows());
    assert_eq!(matrix.nrows(), matrix.ncols());
    let mut out = CMatrix::zeros(matrix.nrows(), matrix.ncols());
    for bi in 0..k {
        for bj in 0..k {
            let src = matrix.view((bj * block_size, bi * block_size), (block_size, block_size));
            out.view_mut((bi * block_size, bj * block_size), (block_size, block_size))
                .copy_from(&src);
        }
    }
    out
}
