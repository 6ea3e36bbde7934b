//! Rosenbrock system matrices and their spectra.
//!
//! A [`SystemMatrix`] is the quadruple `(A(λ), B, C, D(λ))` realizing
//!
//! ```text
//! S(λ) = [ A(λ)  -B   ]
//!        [  C    D(λ) ]
//! ```
//!
//! with constant coupling blocks. The sign convention is fixed: `-B` top
//! right, `+C` bottom left, and the transfer function is
//! `R(λ) = D(λ) + C A(λ)⁻¹ B`, so that `det S = det A · det R`.
//!
//! [`SystemMatrix::invariant_zeros`] extracts the finite spectrum of `S`
//! through determinant interpolation and companion-matrix roots. That path
//! never touches the pencil machinery, which makes it the independent oracle
//! for all spectral checks on linearizations.

use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;

use crate::matpoly::{hadamard_bound, lu_det, random_disc_point, CMatrix, Cx, MatrixPolynomial};

/// Reciprocal-condition threshold below which `A(λ0)` counts as singular,
/// i.e. `λ0` is treated as a pole of the transfer function.
pub const POLE_RCOND: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum RosenbrockError {
    /// Off-diagonal blocks do not conform with `A` and `D`.
    DimensionMismatch(String),
    /// `A` or `D` was constant; the factor construction needs degree ≥ 1 on both parts.
    DegreeTooLow { part: char, deg: usize },
    /// `A(λ0)` is numerically singular: `λ0` is (near) a pole of `R`.
    SingularAtPoint { lambda0: Cx, rcond: f64 },
    /// `det S(λ)` vanishes identically.
    IrregularSystem,
}

impl fmt::Display for RosenbrockError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RosenbrockError::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            RosenbrockError::DegreeTooLow { part, deg } => {
                write!(f, "{part}(λ) has degree {deg}, need at least 1")
            }
            RosenbrockError::SingularAtPoint { lambda0, rcond } => {
                write!(f, "A(λ) singular at {lambda0} (rcond {rcond:.2e})")
            }
            RosenbrockError::IrregularSystem => write!(f, "det S(λ) is identically zero"),
        }
    }
}

impl std::error::Error for RosenbrockError {}

/// The quadruple `(A(λ), B, C, D(λ))` with conforming dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrix {
    a: MatrixPolynomial,
    b: CMatrix,
    c: CMatrix,
    d: MatrixPolynomial,
}

impl SystemMatrix {
    pub fn new(
        a: MatrixPolynomial,
        b: CMatrix,
        c: CMatrix,
        d: MatrixPolynomial,
    ) -> Result<Self, RosenbrockError> {
        let n = a.size();
        let m = d.size();
        if b.nrows() != n || b.ncols() != m {
            return Err(RosenbrockError::DimensionMismatch(format!(
                "B is {}x{}, expected {n}x{m}",
                b.nrows(),
                b.ncols()
            )));
        }
        if c.nrows() != m || c.ncols() != n {
            return Err(RosenbrockError::DimensionMismatch(format!(
                "C is {}x{}, expected {m}x{n}",
                c.nrows(),
                c.ncols()
            )));
        }
        if a.deg() < 1 {
            return Err(RosenbrockError::DegreeTooLow { part: 'A', deg: a.deg() });
        }
        if d.deg() < 1 {
            return Err(RosenbrockError::DegreeTooLow { part: 'D', deg: d.deg() });
        }
        Ok(Self { a, b, c, d })
    }

    pub fn a(&self) -> &MatrixPolynomial {
        &self.a
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    pub fn c(&self) -> &CMatrix {
        &self.c
    }

    pub fn d(&self) -> &MatrixPolynomial {
        &self.d
    }

    /// State dimension `n`.
    pub fn n(&self) -> usize {
        self.a.size()
    }

    /// Input/output dimension `m`.
    pub fn m(&self) -> usize {
        self.d.size()
    }

    pub fn deg_a(&self) -> usize {
        self.a.deg()
    }

    pub fn deg_d(&self) -> usize {
        self.d.deg()
    }

    /// `max(d_A, d_D)`, the number of Fiedler factors besides the leading one.
    pub fn deg_max(&self) -> usize {
        self.deg_a().max(self.deg_d())
    }

    /// Size of the associated pencils, `n·d_A + m·d_D`.
    pub fn pencil_size(&self) -> usize {
        self.n() * self.deg_a() + self.m() * self.deg_d()
    }

    /// `S(λ0)` as a dense `(n+m)`-square matrix.
    pub fn eval_s(&self, lambda0: Cx) -> CMatrix {
        let n = self.n();
        let m = self.m();
        let mut s = CMatrix::zeros(n + m, n + m);
        s.view_mut((0, 0), (n, n)).copy_from(&self.a.evaluate(lambda0));
        s.view_mut((0, n), (n, m)).copy_from(&(-&self.b));
        s.view_mut((n, 0), (m, n)).copy_from(&self.c);
        s.view_mut((n, n), (m, m)).copy_from(&self.d.evaluate(lambda0));
        s
    }

    /// `S(λ)` as an `(n+m)`-square matrix polynomial of degree `max(d_A, d_D)`.
    pub fn as_matrix_polynomial(&self) -> MatrixPolynomial {
        let n = self.n();
        let m = self.m();
        let deg = self.deg_max();
        let mut coeffs = vec![CMatrix::zeros(n + m, n + m); deg + 1];
        for (i, coeff) in coeffs.iter_mut().enumerate() {
            if i <= self.a.deg() {
                coeff.view_mut((0, 0), (n, n)).copy_from(&self.a.coeff(i));
            }
            if i <= self.d.deg() {
                coeff.view_mut((n, n), (m, m)).copy_from(&self.d.coeff(i));
            }
        }
        coeffs[0].view_mut((0, n), (n, m)).copy_from(&(-&self.b));
        coeffs[0].view_mut((n, 0), (m, n)).copy_from(&self.c);
        MatrixPolynomial::new(coeffs).expect("conforming blocks")
    }

    /// Transfer function value `R(λ0) = D(λ0) + C A(λ0)⁻¹ B`.
    pub fn eval_r(&self, lambda0: Cx) -> Result<CMatrix, RosenbrockError> {
        let a0 = self.a.evaluate(lambda0);
        let svd = a0.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let rcond = if smax > 0.0 { smin / smax } else { 0.0 };
        if rcond < POLE_RCOND {
            return Err(RosenbrockError::SingularAtPoint { lambda0, rcond });
        }
        let solved = a0
            .lu()
            .solve(&self.b)
            .ok_or(RosenbrockError::SingularAtPoint { lambda0, rcond })?;
        Ok(self.d.evaluate(lambda0) + &self.c * solved)
    }

    /// Finite spectrum of `S(λ)`: roots (with multiplicity) of the
    /// interpolated `det S(λ)`. The formal degree is `n·d_A + m·d_D`; the
    /// difference to the effective degree counts eigenvalues lost at infinity.
    pub fn invariant_zeros(&self) -> Result<Spectrum, RosenbrockError> {
        let poly = self.as_matrix_polynomial();
        let det = poly.det_poly();
        if det.is_zero() {
            return Err(RosenbrockError::IrregularSystem);
        }
        let formal_degree = self.pencil_size();
        let eigenvalues = det.roots();
        Ok(Spectrum {
            effective_degree: eigenvalues.len(),
            eigenvalues,
            formal_degree,
        })
    }

    /// Maximum numerical rank of `S(λ)` over random sample points.
    pub fn normal_rank_with<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> usize {
        (0..samples.max(1))
            .map(|_| numerical_rank(&self.eval_s(random_disc_point(rng, 2.0))))
            .max()
            .unwrap_or(0)
    }

    /// [`Self::normal_rank_with`] on a fixed-seed generator.
    pub fn normal_rank(&self, samples: usize) -> usize {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_0002);
        self.normal_rank_with(samples, &mut rng)
    }

    /// True iff `det S(λ0)` is decisively nonzero at one of `samples` points.
    pub fn is_regular_with<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> bool {
        for _ in 0..samples.max(1) {
            let s = self.eval_s(random_disc_point(rng, 2.0));
            let det = lu_det(&s).norm();
            let scale = hadamard_bound(&s);
            if scale > 0.0 && det > 1e-10 * scale {
                return true;
            }
        }
        false
    }
}

/// Finite eigenvalue multiset of a regular matrix polynomial or pencil,
/// together with the formal degree bound of its determinant. The deficit
/// `formal_degree − effective_degree` counts infinite eigenvalues; no
/// synthetic values are reported for them.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Cx>,
    pub formal_degree: usize,
    pub effective_degree: usize,
}

impl Spectrum {
    pub fn infinite_count(&self) -> usize {
        self.formal_degree - self.effective_degree
    }
}

/// Rank from singular values against a tolerance scaled by the matrix norm.
pub fn numerical_rank(matrix: &CMatrix) -> usize {
    let dim = matrix.nrows().max(matrix.ncols());
    let svd = matrix.clone().svd(false, false);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return 0;
    }
    let tol = smax * dim as f64 * f64::EPSILON * 16.0;
    svd.singular_values.iter().filter(|&&s| s > tol).count()
}
