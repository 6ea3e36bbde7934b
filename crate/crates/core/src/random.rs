//! Seeded generation of test systems.

use std::fmt;

use rand::Rng;

use crate::matpoly::{lu_det, CMatrix, Cx, MatrixPolynomial};
use crate::rosenbrock::SystemMatrix;

/// Dimensions and degrees of a system to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemParams {
    pub n: usize,
    pub m: usize,
    pub d_a: usize,
    pub d_d: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenError {
    /// No draw satisfied the regularity constraints within the attempt budget.
    GiveUp { params: SystemParams, attempts: usize },
    /// Dimensions or degrees were zero.
    BadParams(String),
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::GiveUp { params, attempts } => write!(
                f,
                "gave up after {attempts} draws for n={} m={} d_a={} d_d={}",
                params.n, params.m, params.d_a, params.d_d
            ),
            GenError::BadParams(msg) => write!(f, "bad parameters: {msg}"),
        }
    }
}

impl std::error::Error for GenError {}

const MAX_ATTEMPTS: usize = 100;

/// Integer matrix with entries drawn uniformly from `{−3, …, 3}`.
pub fn integer_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| Cx::new(rng.gen_range(-3..=3) as f64, 0.0))
}

/// Complex matrix with real and imaginary parts uniform in `[−1, 1]`.
pub fn complex_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Cx::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

fn check_params(params: &SystemParams) -> Result<(), GenError> {
    if params.n == 0 || params.m == 0 || params.d_a == 0 || params.d_d == 0 {
        return Err(GenError::BadParams(
            "n, m, d_a, d_d must all be at least 1".into(),
        ));
    }
    Ok(())
}

fn draw_system<R: Rng + ?Sized>(
    params: &SystemParams,
    integer: bool,
    rng: &mut R,
) -> Result<SystemMatrix, GenError> {
    check_params(params)?;
    let draw = |rows: usize, cols: usize, rng: &mut R| {
        if integer {
            integer_matrix(rows, cols, rng)
        } else {
            complex_matrix(rows, cols, rng)
        }
    };
    for _ in 0..MAX_ATTEMPTS {
        let a = MatrixPolynomial::new(
            (0..=params.d_a).map(|_| draw(params.n, params.n, rng)).collect(),
        )
        .expect("square coefficients");
        // leading coefficient invertible; integer determinants are whole numbers
        if lu_det(&a.coeff(params.d_a)).norm() < 0.5 {
            continue;
        }
        if a.det_poly().is_zero() {
            continue;
        }
        let d = MatrixPolynomial::new(
            (0..=params.d_d).map(|_| draw(params.m, params.m, rng)).collect(),
        )
        .expect("square coefficients");
        let b = draw(params.n, params.m, rng);
        let c = draw(params.m, params.n, rng);
        let sys = SystemMatrix::new(a, b, c, d).expect("conforming dimensions");
        return Ok(sys);
    }
    Err(GenError::GiveUp {
        params: *params,
        attempts: MAX_ATTEMPTS,
    })
}

/// Random system with entries in `{−3..3}`, redrawn until `A(λ)` is regular
/// and its leading coefficient is invertible.
pub fn random_integer_system<R: Rng + ?Sized>(
    params: &SystemParams,
    rng: &mut R,
) -> Result<SystemMatrix, GenError> {
    draw_system(params, true, rng)
}

/// Random system with complex entries uniform on the unit square, same
/// regularity constraints as [`random_integer_system`].
pub fn random_complex_system<R: Rng + ?Sized>(
    params: &SystemParams,
    rng: &mut R,
) -> Result<SystemMatrix, GenError> {
    draw_system(params, false, rng)
}

/// Integer system whose full system matrix is regular, for spectral tests.
pub fn random_regular_integer_system<R: Rng + ?Sized>(
    params: &SystemParams,
    rng: &mut R,
) -> Result<SystemMatrix, GenError> {
    for _ in 0..MAX_ATTEMPTS {
        let sys = random_integer_system(params, rng)?;
        if sys.is_regular_with(8, rng) {
            return Ok(sys);
        }
    }
    Err(GenError::GiveUp {
        params: *params,
        attempts: MAX_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn integer_system_respects_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let params = SystemParams { n: 2, m: 2, d_a: 3, d_d: 2 };
        let sys = random_integer_system(&params, &mut rng).unwrap();
        assert_eq!(sys.n(), 2);
        assert_eq!(sys.deg_a(), 3);
        assert!(lu_det(&sys.a().coeff(3)).norm() > 0.5);
        assert!(!sys.a().det_poly().is_zero());
        for coeff in sys.a().coeffs() {
            for z in coeff.iter() {
                assert_eq!(z.im, 0.0);
                assert!(z.re.abs() <= 3.0 && z.re.fract() == 0.0);
            }
        }
    }

    #[test]
    fn bad_params_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = SystemParams { n: 1, m: 1, d_a: 0, d_d: 1 };
        assert!(matches!(
            random_integer_system(&params, &mut rng),
            Err(GenError::BadParams(_))
        ));
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let params = SystemParams { n: 2, m: 1, d_a: 2, d_d: 3 };
        let a = random_integer_system(&params, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = random_integer_system(&params, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
    }
}
