//! Spectral verification of Fiedler pencils.
//!
//! The finite eigenvalues of a pencil come from the same
//! determinant-interpolation + companion-root machinery as the invariant-zero
//! oracle, but run on the pencil matrices — the two paths share no
//! intermediate data, so agreement between them is evidence, not tautology.
//! [`compare_spectra`] matches the two multisets; [`recover_eigenvector`]
//! pulls system eigenvectors out of first-companion-form null vectors.

use std::fmt;

use nalgebra::DVector;
use serde::Serialize;

use crate::equivalence::EquivalenceCertificate;
use crate::fiedler::{companion_first, fiedler_pencil, Bijection, BlockPencil, FiedlerSet};
use crate::matpoly::{CMatrix, Cx};
use crate::rosenbrock::{RosenbrockError, Spectrum, SystemMatrix, POLE_RCOND};

pub type CVector = DVector<Cx>;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectraError {
    /// `det(λX + Y)` vanishes identically.
    SingularPencil,
    /// The pencil and oracle spectra do not agree; the report carries the
    /// matching that was attempted.
    SpectralMismatch { report: Box<EigenReport> },
    /// Recovery at a pole of the transfer function is undefined.
    PoleAtEigenvalue { lambda0: Cx },
    /// Propagated from the oracle.
    Oracle(RosenbrockError),
    /// Propagated from pencil construction.
    Fiedler(crate::fiedler::FiedlerError),
}

impl fmt::Display for SpectraError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectraError::SingularPencil => write!(f, "pencil determinant is identically zero"),
            SpectraError::SpectralMismatch { report } => write!(
                f,
                "spectra differ: {} pencil / {} oracle eigenvalues unmatched, worst distance {:e}",
                report.unmatched_pencil, report.unmatched_oracle, report.max_matched_distance
            ),
            SpectraError::PoleAtEigenvalue { lambda0 } => {
                write!(f, "A(λ) singular at eigenvalue {lambda0}; recovery undefined")
            }
            SpectraError::Oracle(e) => write!(f, "{e}"),
            SpectraError::Fiedler(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SpectraError {}

impl From<RosenbrockError> for SpectraError {
    fn from(e: RosenbrockError) -> Self {
        SpectraError::Oracle(e)
    }
}

impl From<crate::fiedler::FiedlerError> for SpectraError {
    fn from(e: crate::fiedler::FiedlerError) -> Self {
        SpectraError::Fiedler(e)
    }
}

/// Finite eigenvalues of `λX + Y` by determinant interpolation over the
/// pencil, degree bound = matrix size. The degree deficit counts infinite
/// eigenvalues.
pub fn pencil_eigenvalues(p: &BlockPencil) -> Result<Spectrum, SpectraError> {
    let poly = p.as_matrix_polynomial();
    let det = poly.det_poly();
    if det.is_zero() {
        return Err(SpectraError::SingularPencil);
    }
    let eigenvalues = det.roots();
    Ok(Spectrum {
        effective_degree: eigenvalues.len(),
        eigenvalues,
        formal_degree: p.x.nrows(),
    })
}

mod cx_pair {
    use super::Cx;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(z: &Cx, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeTuple;
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&z.re)?;
        t.serialize_element(&z.im)?;
        t.end()
    }
}

mod cx_list {
    use super::Cx;
    use serde::ser::SerializeSeq;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &[Cx], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for z in v {
            seq.serialize_element(&[z.re, z.im])?;
        }
        seq.end()
    }
}

/// One matched eigenvalue pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedPair {
    #[serde(with = "cx_pair")]
    pub pencil: Cx,
    #[serde(with = "cx_pair")]
    pub oracle: Cx,
    pub distance: f64,
}

/// Outcome of matching a pencil spectrum against the oracle spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenReport {
    #[serde(serialize_with = "cx_list::serialize")]
    pub pencil_eigs: Vec<Cx>,
    #[serde(serialize_with = "cx_list::serialize")]
    pub oracle_eigs: Vec<Cx>,
    pub matching: Vec<MatchedPair>,
    pub max_matched_distance: f64,
    pub unmatched_pencil: usize,
    pub unmatched_oracle: usize,
    pub pencil_infinite: usize,
    pub oracle_infinite: usize,
    pub passed: bool,
}

/// Greedy minimum-distance matching between two eigenvalue multisets,
/// refined by pair swaps that lower the largest matched distance.
pub fn match_spectra(pencil: &[Cx], oracle: &[Cx]) -> Vec<MatchedPair> {
    let k = pencil.len().min(oracle.len());
    let mut free_p: Vec<usize> = (0..pencil.len()).collect();
    let mut free_o: Vec<usize> = (0..oracle.len()).collect();
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best = (0usize, 0usize, f64::INFINITY);
        for (pi, &p) in free_p.iter().enumerate() {
            for (oi, &o) in free_o.iter().enumerate() {
                let dist = (pencil[p] - oracle[o]).norm();
                if dist < best.2 {
                    best = (pi, oi, dist);
                }
            }
        }
        let (pi, oi, _) = best;
        pairs.push((free_p[pi], free_o[oi]));
        free_p.swap_remove(pi);
        free_o.swap_remove(oi);
    }
    // 2-swap refinement: trade partners whenever it shrinks the worse of the
    // two distances involved
    let mut improved = true;
    let mut rounds = 0;
    while improved && rounds < 32 {
        improved = false;
        rounds += 1;
        for a in 0..pairs.len() {
            for b in a + 1..pairs.len() {
                let (pa, oa) = pairs[a];
                let (pb, ob) = pairs[b];
                let cur = (pencil[pa] - oracle[oa]).norm().max((pencil[pb] - oracle[ob]).norm());
                let swapped = (pencil[pa] - oracle[ob]).norm().max((pencil[pb] - oracle[oa]).norm());
                if swapped + f64::EPSILON < cur {
                    pairs[a] = (pa, ob);
                    pairs[b] = (pb, oa);
                    improved = true;
                }
            }
        }
    }
    pairs
        .into_iter()
        .map(|(p, o)| MatchedPair {
            pencil: pencil[p],
            oracle: oracle[o],
            distance: (pencil[p] - oracle[o]).norm(),
        })
        .collect()
}

/// Matches the finite spectrum of `λ𝕄_d − 𝕄_σ` against the invariant-zero
/// oracle. Passes iff the counts agree and every matched distance is within
/// `tol · (1 + |λ|)`.
pub fn compare_spectra(
    sys: &SystemMatrix,
    ms: &FiedlerSet,
    sigma: &Bijection,
    tol: f64,
) -> Result<EigenReport, SpectraError> {
    let pencil = fiedler_pencil(ms, sigma)?;
    let pencil_spec = pencil_eigenvalues(&pencil)?;
    let oracle_spec = sys.invariant_zeros()?;
    Ok(build_report(&pencil_spec, &oracle_spec, tol)?)
}

fn build_report(
    pencil_spec: &Spectrum,
    oracle_spec: &Spectrum,
    tol: f64,
) -> Result<EigenReport, SpectraError> {
    let matching = match_spectra(&pencil_spec.eigenvalues, &oracle_spec.eigenvalues);
    let max_matched_distance = matching.iter().map(|p| p.distance).fold(0.0, f64::max);
    let unmatched_pencil = pencil_spec.eigenvalues.len() - matching.len();
    let unmatched_oracle = oracle_spec.eigenvalues.len() - matching.len();
    let within_tol = matching
        .iter()
        .all(|p| p.distance <= tol * (1.0 + p.oracle.norm()));
    let passed = unmatched_pencil == 0 && unmatched_oracle == 0 && within_tol;
    let report = EigenReport {
        pencil_eigs: pencil_spec.eigenvalues.clone(),
        oracle_eigs: oracle_spec.eigenvalues.clone(),
        matching,
        max_matched_distance,
        unmatched_pencil,
        unmatched_oracle,
        pencil_infinite: pencil_spec.infinite_count(),
        oracle_infinite: oracle_spec.infinite_count(),
        passed,
    };
    if report.passed {
        Ok(report)
    } else {
        Err(SpectraError::SpectralMismatch {
            report: Box::new(report),
        })
    }
}

/// Eigenvector of the system recovered from a pencil null vector.
#[derive(Debug, Clone, Serialize)]
pub struct RecoveredEigenvector {
    #[serde(with = "cx_pair")]
    pub lambda0: Cx,
    #[serde(serialize_with = "cx_list::serialize")]
    pub w: Vec<Cx>,
    #[serde(serialize_with = "cx_list::serialize")]
    pub x0: Vec<Cx>,
    #[serde(serialize_with = "cx_list::serialize")]
    pub u0: Vec<Cx>,
    pub residual_s: f64,
    pub residual_r: f64,
}

/// Right null vector of a (near-singular) matrix: the right singular vector
/// of the smallest singular value. Also returns the two smallest singular
/// values for simplicity checks.
pub fn null_vector(matrix: &CMatrix) -> (CVector, f64, f64) {
    let n = matrix.ncols();
    let svd = matrix.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[a]
            .partial_cmp(&svd.singular_values[b])
            .unwrap()
    });
    let smallest = order[0];
    let second = if n > 1 { svd.singular_values[order[1]] } else { f64::INFINITY };
    let v = v_t.row(smallest).adjoint();
    (CVector::from_column_slice(v.as_slice()), svd.singular_values[smallest], second)
}

/// Recovers the system eigenvector from a first-companion-form null vector
/// at `λ0`: block `d_A` of the state part is the `A(λ0)⁻¹ B x` slot and
/// block `d_D` of the output part is the `x` slot. The stacked `[x0; u0]`
/// is normalized and its residuals against `S(λ0)` and `R(λ0)` reported.
pub fn recover_eigenvector(
    sys: &SystemMatrix,
    lambda0: Cx,
    v_pencil: &CVector,
) -> Result<RecoveredEigenvector, SpectraError> {
    let a0 = sys.a().evaluate(lambda0);
    let svd = a0.clone().svd(false, false);
    let rcond = svd.singular_values.min() / svd.singular_values.max().max(f64::MIN_POSITIVE);
    if rcond < POLE_RCOND {
        return Err(SpectraError::PoleAtEigenvalue { lambda0 });
    }
    let (n, m) = (sys.n(), sys.m());
    let na = n * sys.deg_a();
    let x0_raw = v_pencil.rows(na - n, n).clone_owned();
    let u0_raw = v_pencil
        .rows(na + m * sys.deg_d() - m, m)
        .clone_owned();
    let mut stacked = CVector::zeros(n + m);
    stacked.rows_mut(0, n).copy_from(&x0_raw);
    stacked.rows_mut(n, m).copy_from(&u0_raw);
    let norm = stacked.norm();
    if norm > 0.0 {
        stacked /= Cx::new(norm, 0.0);
    }
    let x0 = stacked.rows(0, n).clone_owned();
    let u0 = stacked.rows(n, m).clone_owned();

    let s0 = sys.eval_s(lambda0);
    let residual_s = (&s0 * &stacked).norm() / (s0.norm().max(f64::MIN_POSITIVE));
    let r0 = sys.eval_r(lambda0)?;
    let u0_norm = u0.norm();
    let residual_r = if u0_norm > 0.0 {
        (&r0 * &u0).norm() / (r0.norm().max(f64::MIN_POSITIVE) * u0_norm)
    } else {
        f64::INFINITY
    };

    Ok(RecoveredEigenvector {
        lambda0,
        w: v_pencil.iter().cloned().collect(),
        x0: x0.iter().cloned().collect(),
        u0: u0.iter().cloned().collect(),
        residual_s,
        residual_r,
    })
}

/// The null-vector stack the first companion form predicts for an
/// eigenvector `x` of `R(λ0)`: falling powers of `λ0` times `A(λ0)⁻¹ B x`
/// over the state blocks, then falling powers times `x`.
pub fn predicted_companion_vector(
    sys: &SystemMatrix,
    lambda0: Cx,
    x: &CVector,
) -> Result<CVector, SpectraError> {
    let a0 = sys.a().evaluate(lambda0);
    let bx = sys.b() * x;
    let core = a0
        .lu()
        .solve(&bx)
        .ok_or(SpectraError::PoleAtEigenvalue { lambda0 })?;
    let (n, m) = (sys.n(), sys.m());
    let (d_a, d_d) = (sys.deg_a(), sys.deg_d());
    let mut w = CVector::zeros(n * d_a + m * d_d);
    let mut power = Cx::new(1.0, 0.0);
    for k in (0..d_a).rev() {
        w.rows_mut(k * n, n).copy_from(&core.map(|z| z * power));
        power *= lambda0;
    }
    power = Cx::new(1.0, 0.0);
    for k in (0..d_d).rev() {
        w.rows_mut(n * d_a + k * m, m).copy_from(&x.map(|z| z * power));
        power *= lambda0;
    }
    Ok(w)
}

/// Certificate-based recovery for an arbitrary ordering: maps the pencil
/// null vector through `V(λ0)` and the constant right transform into the
/// canonical frame `I ⊕ S(λ) ⊕ I`, where the middle block is the system
/// eigenvector. Depends on a full [`EquivalenceCertificate`].
pub fn recover_via_certificate(
    sys: &SystemMatrix,
    cert: &EquivalenceCertificate,
    lambda0: Cx,
    v_pencil: &CVector,
) -> Result<RecoveredEigenvector, SpectraError> {
    let v0 = cert.v.evaluate(lambda0);
    let w = v0
        .lu()
        .solve(&v_pencil.clone())
        .ok_or(SpectraError::PoleAtEigenvalue { lambda0 })?;
    // right_const is a permutation: transpose inverts it
    let y = cert.right_const.transpose() * w;
    let (n, m) = (sys.n(), sys.m());
    let offset = (sys.deg_a() - 1) * n;
    let mut stacked = CVector::zeros(n + m);
    stacked.rows_mut(0, n).copy_from(&y.rows(offset, n));
    stacked.rows_mut(n, m).copy_from(&y.rows(offset + n, m));
    let norm = stacked.norm();
    if norm > 0.0 {
        stacked /= Cx::new(norm, 0.0);
    }
    let s0 = sys.eval_s(lambda0);
    let residual_s = (&s0 * &stacked).norm() / s0.norm().max(f64::MIN_POSITIVE);
    let r0 = sys.eval_r(lambda0)?;
    let u0 = stacked.rows(n, m).clone_owned();
    let residual_r = if u0.norm() > 0.0 {
        (&r0 * &u0).norm() / (r0.norm().max(f64::MIN_POSITIVE) * u0.norm())
    } else {
        f64::INFINITY
    };
    Ok(RecoveredEigenvector {
        lambda0,
        w: v_pencil.iter().cloned().collect(),
        x0: stacked.rows(0, n).iter().cloned().collect(),
        u0: u0.iter().cloned().collect(),
        residual_s,
        residual_r,
    })
}

/// Convenience: recovery from the first companion form for every simple
/// eigenvalue of the system. Eigenvalues whose second-smallest singular
/// value at `C_1(λ0)` is below `simple_gap` are skipped as clustered.
pub fn recover_all_simple(
    sys: &SystemMatrix,
    simple_gap: f64,
) -> Result<Vec<RecoveredEigenvector>, SpectraError> {
    let companion = companion_first(sys);
    let spec = sys.invariant_zeros()?;
    let mut out = Vec::new();
    for &lambda0 in &spec.eigenvalues {
        let evaluated = companion.eval(lambda0);
        let (v, _smin, second) = null_vector(&evaluated);
        if second <= simple_gap {
            continue;
        }
        match recover_eigenvector(sys, lambda0, &v) {
            Ok(rec) => out.push(rec),
            Err(SpectraError::PoleAtEigenvalue { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiedler::companion_second;
    use crate::matpoly::MatrixPolynomial;
    use crate::random::{random_regular_integer_system, SystemParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    fn scalar_poly(vals: &[f64]) -> MatrixPolynomial {
        MatrixPolynomial::new(
            vals.iter()
                .map(|&v| CMatrix::from_element(1, 1, c(v, 0.0)))
                .collect(),
        )
        .unwrap()
    }

    fn scalar_system(a: &[f64], d: &[f64], b: f64, cc: f64) -> SystemMatrix {
        SystemMatrix::new(
            scalar_poly(a),
            CMatrix::from_element(1, 1, c(b, 0.0)),
            CMatrix::from_element(1, 1, c(cc, 0.0)),
            scalar_poly(d),
        )
        .unwrap()
    }

    fn diag_pencil(x: &[f64], y: &[f64]) -> BlockPencil {
        // helper: wrap plain matrices as a degree-1 "system" pencil
        let k = x.len();
        BlockPencil {
            x: CMatrix::from_fn(k, k, |i, j| if i == j { c(x[i], 0.0) } else { c(0.0, 0.0) }),
            y: CMatrix::from_fn(k, k, |i, j| if i == j { c(y[i], 0.0) } else { c(0.0, 0.0) }),
            layout: crate::fiedler::BlockLayout { n: 1, m: 1, d_a: 1, d_d: k - 1 },
            coupling: crate::fiedler::CouplingMeta { b_row: 1, b_col: 1, c_row: 1, c_col: 1 },
        }
    }

    #[test]
    fn diagonal_pencil_eigenvalues() {
        let p = diag_pencil(&[1.0, 1.0], &[-1.0, -2.0]);
        let spec = pencil_eigenvalues(&p).unwrap();
        let mut eigs = spec.eigenvalues.clone();
        eigs.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((eigs[0] - c(1.0, 0.0)).norm() < 1e-9);
        assert!((eigs[1] - c(2.0, 0.0)).norm() < 1e-9);
        assert_eq!(spec.infinite_count(), 0);
    }

    #[test]
    fn singular_leading_block_gives_deficit() {
        let p = diag_pencil(&[0.0, 1.0], &[-1.0, -2.0]);
        let spec = pencil_eigenvalues(&p).unwrap();
        assert_eq!(spec.eigenvalues.len(), 1);
        assert_eq!(spec.infinite_count(), 1);
    }

    #[test]
    fn identically_singular_pencil_rejected() {
        let p = diag_pencil(&[0.0, 1.0], &[0.0, -2.0]);
        match pencil_eigenvalues(&p) {
            Err(SpectraError::SingularPencil) => {}
            other => panic!("expected SingularPencil, got {other:?}"),
        }
    }

    #[test]
    fn coupled_scalar_system_pencil_spectrum() {
        // det S = λ² + 1
        let sys = scalar_system(&[0.0, 1.0], &[0.0, 1.0], 1.0, 1.0);
        let ms = FiedlerSet::build(&sys);
        let pencil = fiedler_pencil(&ms, &Bijection::new(vec![1]).unwrap()).unwrap();
        let spec = pencil_eigenvalues(&pencil).unwrap();
        let mut eigs = spec.eigenvalues.clone();
        eigs.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((eigs[0] - c(0.0, -1.0)).norm() < 1e-9);
        assert!((eigs[1] - c(0.0, 1.0)).norm() < 1e-9);
    }

    #[test]
    fn decoupled_spectrum_matches_parts() {
        let sys = scalar_system(&[-1.0, 1.0], &[-2.0, 1.0], 0.0, 0.0);
        let ms = FiedlerSet::build(&sys);
        let report = compare_spectra(&sys, &ms, &Bijection::new(vec![1]).unwrap(), 1e-6).unwrap();
        assert!(report.passed);
        assert_eq!(report.matching.len(), 2);
    }

    #[test]
    fn all_orderings_match_oracle_d3() {
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let sys = random_regular_integer_system(
            &SystemParams { n: 2, m: 2, d_a: 3, d_d: 2 },
            &mut rng,
        )
        .unwrap();
        let ms = FiedlerSet::build(&sys);
        for sigma in Bijection::all(3) {
            let report = compare_spectra(&sys, &ms, &sigma, 1e-6).unwrap();
            assert!(report.passed, "σ = {:?}", sigma.images());
        }
    }

    #[test]
    fn companion_forms_share_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let sys = random_regular_integer_system(
            &SystemParams { n: 2, m: 1, d_a: 2, d_d: 3 },
            &mut rng,
        )
        .unwrap();
        let c1 = companion_first(&sys);
        let c2 = companion_second(&sys);
        let s1 = pencil_eigenvalues(&c1).unwrap();
        let s2 = pencil_eigenvalues(&c2).unwrap();
        assert_eq!(s1.eigenvalues.len(), s2.eigenvalues.len());
        let pairs = match_spectra(&s1.eigenvalues, &s2.eigenvalues);
        for p in pairs {
            assert!(p.distance <= 1e-6 * (1.0 + p.oracle.norm()));
        }
    }

    #[test]
    fn mismatch_reported_for_corrupted_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let sys = random_regular_integer_system(
            &SystemParams { n: 2, m: 2, d_a: 2, d_d: 2 },
            &mut rng,
        )
        .unwrap();
        let mut ms = FiedlerSet::build(&sys);
        ms.inject_c_sign_typo();
        // flipping C's sign changes det S generically, so spectra drift
        match compare_spectra(&sys, &ms, &Bijection::descending(2), 1e-6) {
            Err(SpectraError::SpectralMismatch { report }) => assert!(!report.passed),
            Ok(report) => panic!("corruption not detected: {report:?}"),
            Err(other) => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn recovery_decoupled_output_root() {
        // B = 0: eigenvalue of D only, x0 must vanish
        let sys = scalar_system(&[5.0, 1.0], &[-2.0, 1.0], 0.0, 3.0);
        let companion = companion_first(&sys);
        let lambda0 = c(2.0, 0.0);
        let (v, smin, _) = null_vector(&companion.eval(lambda0));
        assert!(smin < 1e-10);
        let rec = recover_eigenvector(&sys, lambda0, &v).unwrap();
        assert!(rec.residual_s < 1e-10, "residual_s = {:e}", rec.residual_s);
        let x0_norm: f64 = rec.x0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(x0_norm < 1e-10);
    }

    #[test]
    fn recovery_scalar_coupled_pair() {
        // eigenvalues ±i; at λ0 = i, R(i) = i + 1/i = 0
        let sys = scalar_system(&[0.0, 1.0], &[0.0, 1.0], 1.0, 1.0);
        let companion = companion_first(&sys);
        let lambda0 = c(0.0, 1.0);
        let (v, _, _) = null_vector(&companion.eval(lambda0));
        let rec = recover_eigenvector(&sys, lambda0, &v).unwrap();
        assert!(rec.residual_s <= 1e-10);
        assert!(rec.residual_r <= 1e-10);
    }

    #[test]
    fn recovery_random_simple_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let sys = random_regular_integer_system(
            &SystemParams { n: 2, m: 2, d_a: 2, d_d: 2 },
            &mut rng,
        )
        .unwrap();
        let recs = recover_all_simple(&sys, 1e-6).unwrap();
        assert!(!recs.is_empty());
        for rec in recs {
            assert!(rec.residual_s <= 1e-8, "residual_s = {:e}", rec.residual_s);
        }
    }

    #[test]
    fn predicted_stack_aligns_with_null_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let sys = random_regular_integer_system(
            &SystemParams { n: 2, m: 2, d_a: 3, d_d: 2 },
            &mut rng,
        )
        .unwrap();
        let companion = companion_first(&sys);
        let spec = sys.invariant_zeros().unwrap();
        let mut tested = 0;
        for &lambda0 in &spec.eigenvalues {
            let evaluated = companion.eval(lambda0);
            let (v, _, second) = null_vector(&evaluated);
            if second <= 1e-6 {
                continue;
            }
            let rec = match recover_eigenvector(&sys, lambda0, &v) {
                Ok(rec) => rec,
                Err(SpectraError::PoleAtEigenvalue { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            let x = CVector::from_vec(rec.u0.clone());
            let predicted = predicted_companion_vector(&sys, lambda0, &x).unwrap();
            let alignment = predicted.dotc(&v).norm() / (predicted.norm() * v.norm());
            assert!(alignment >= 1.0 - 1e-8, "alignment {alignment}");
            tested += 1;
        }
        assert!(tested > 0);
    }

    #[test]
    fn certificate_recovery_general_ordering() {
        let mut rng = ChaCha8Rng::seed_from_u64(65);
        let sys = random_regular_integer_system(
            &SystemParams { n: 1, m: 1, d_a: 3, d_d: 2 },
            &mut rng,
        )
        .unwrap();
        let ms = FiedlerSet::build(&sys);
        let sigma = Bijection::new(vec![1, 3, 2]).unwrap();
        let cert = crate::equivalence::certify(&sys, &ms, &sigma, 0.0).unwrap();
        let pencil = fiedler_pencil(&ms, &sigma).unwrap();
        let spec = sys.invariant_zeros().unwrap();
        let mut tested = 0;
        for &lambda0 in &spec.eigenvalues {
            let (v, _, second) = null_vector(&pencil.eval(lambda0));
            if second <= 1e-6 {
                continue;
            }
            let rec = match recover_via_certificate(&sys, &cert, lambda0, &v) {
                Ok(rec) => rec,
                Err(SpectraError::PoleAtEigenvalue { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            assert!(rec.residual_s <= 1e-7, "residual_s = {:e}", rec.residual_s);
            tested += 1;
        }
        assert!(tested > 0);
    }
}
