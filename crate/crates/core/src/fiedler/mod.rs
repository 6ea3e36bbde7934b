//! Fiedler factors and pencils for Rosenbrock system matrices.
//!
//! For a system with state part `A(λ)` of degree `d_A` and output part `D(λ)`
//! of degree `d_D`, the factor family consists of `d = max(d_A, d_D)` + 1
//! square matrices `𝕄_0, …, 𝕄_d` of size `n·d_A + m·d_D`. `𝕄_0` carries the
//! couplings `+B` (top right) and `−C` (bottom left) next to `−A_0`, `−D_0`;
//! `𝕄_d` holds the leading coefficients; the interior factors pair the pivot
//! blocks `[[−A_i, I], [I, 0]]` and `[[−D_i, I], [I, 0]]`, padded with
//! identity when one side has run out of degree.
//!
//! An ordering is a bijection `σ: {0..d−1} → {1..d}`; `σ(i) = j` places factor
//! `𝕄_i` at position `j` of the product `𝕄_σ`. The pencil `λ𝕄_d − 𝕄_σ`
//! depends on σ only through its consecution–inversion structure, which also
//! pins down where the couplings land ([`corner_structure`]).
//!
//! [`assemble_product`] multiplies the factors and is the reference semantics;
//! [`assembly::assemble_algorithmic`] builds the same matrix without any
//! multiplication and must agree entry for entry.

pub mod assembly;

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::matpoly::{block_transpose_matrix, CMatrix, Cx, MatrixPolynomial};
use crate::rosenbrock::SystemMatrix;

pub use assembly::assemble_algorithmic;

#[derive(Debug, Clone, PartialEq)]
pub enum FiedlerError {
    /// The ordering's degree does not match `max(d_A, d_D)`.
    DegreeMismatch { expected: usize, got: usize },
    /// The image list is not a permutation of `1..=d`.
    BadBijection(String),
    /// A coupling block or diagonal part of the assembled pencil is not where
    /// the consecution–inversion structure says it must be.
    StructureMismatch { report: Box<CornerReport> },
}

impl fmt::Display for FiedlerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiedlerError::DegreeMismatch { expected, got } => {
                write!(f, "ordering has degree {got}, factor family has {expected}")
            }
            FiedlerError::BadBijection(msg) => write!(f, "invalid bijection: {msg}"),
            FiedlerError::StructureMismatch { report } => {
                write!(f, "corner structure mismatch: {:?}", report.mismatches)
            }
        }
    }
}

impl std::error::Error for FiedlerError {}

/// A bijection `σ: {0..d−1} → {1..d}` stored as its image list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bijection {
    images: Vec<usize>,
}

impl Bijection {
    /// Builds from the image list `(σ(0), …, σ(d−1))`, 1-based values.
    pub fn new(images: Vec<usize>) -> Result<Self, FiedlerError> {
        let d = images.len();
        if d == 0 {
            return Err(FiedlerError::BadBijection("empty image list".into()));
        }
        let mut seen = vec![false; d + 1];
        for &v in &images {
            if v == 0 || v > d || seen[v] {
                return Err(FiedlerError::BadBijection(format!(
                    "images {images:?} are not a permutation of 1..={d}"
                )));
            }
            seen[v] = true;
        }
        Ok(Self { images })
    }

    /// Degree parameter `d`.
    pub fn d(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `σ(j)`, the 1-based product position of factor `j`.
    pub fn image(&self, j: usize) -> usize {
        self.images[j]
    }

    /// Factor indices in product order: entry `p` is `σ⁻¹(p+1)`.
    pub fn factor_order(&self) -> Vec<usize> {
        let mut order = vec![0usize; self.d()];
        for (j, &pos) in self.images.iter().enumerate() {
            order[pos - 1] = j;
        }
        order
    }

    /// True iff `σ(j) < σ(j+1)`; otherwise σ has an inversion at `j`.
    pub fn has_consecution(&self, j: usize) -> bool {
        self.images[j] < self.images[j + 1]
    }

    /// The ordering `(1, 2, …, d)`: all consecutions.
    pub fn ascending(d: usize) -> Self {
        Self::new((1..=d).collect()).expect("ascending is a permutation")
    }

    /// The ordering `(d, d−1, …, 1)`: all inversions. Its pencil is the first
    /// companion form.
    pub fn descending(d: usize) -> Self {
        Self::new((1..=d).rev().collect()).expect("descending is a permutation")
    }

    /// Every bijection of degree `d`, in lexicographic order of image lists.
    pub fn all(d: usize) -> Vec<Self> {
        fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Bijection>) {
            if rest.is_empty() {
                out.push(Bijection {
                    images: prefix.clone(),
                });
                return;
            }
            for i in 0..rest.len() {
                let v = rest.remove(i);
                prefix.push(v);
                rec(prefix, rest, out);
                prefix.pop();
                rest.insert(i, v);
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), &mut (1..=d).collect(), &mut out);
        out
    }

    /// Uniformly random ordering.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let mut images: Vec<usize> = (1..=d).collect();
        for i in (1..d).rev() {
            let j = rng.gen_range(0..=i);
            images.swap(i, j);
        }
        Self { images }
    }

    /// Consecution–inversion structure sequence.
    pub fn ciss(&self) -> Ciss {
        let d = self.d();
        if d == 1 {
            return Ciss { pairs: vec![(0, 0)] };
        }
        let flags: Vec<bool> = (0..d - 1).map(|j| self.has_consecution(j)).collect();
        let mut pairs = Vec::new();
        let mut idx = 0;
        let mut c = 0;
        while idx < flags.len() && flags[idx] {
            c += 1;
            idx += 1;
        }
        loop {
            let mut inv = 0;
            while idx < flags.len() && !flags[idx] {
                inv += 1;
                idx += 1;
            }
            pairs.push((c, inv));
            if idx >= flags.len() {
                break;
            }
            c = 0;
            while idx < flags.len() && flags[idx] {
                c += 1;
                idx += 1;
            }
            if idx >= flags.len() {
                pairs.push((c, 0));
                break;
            }
        }
        Ciss { pairs }
    }
}

/// Maximal run-length encoding `(c_1, i_1, …, c_l, i_l)` of the consecution
/// pattern of an ordering. Only `c_1` and the final `i_l` may be zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciss {
    pairs: Vec<(usize, usize)>,
}

impl Ciss {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn c1(&self) -> usize {
        self.pairs[0].0
    }

    /// `i_1` when `c_1 = 0` (the leading inversion run), else 0.
    pub fn leading_i1(&self) -> usize {
        if self.c1() == 0 {
            self.pairs[0].1
        } else {
            0
        }
    }

    pub fn total_consecutions(&self) -> usize {
        self.pairs.iter().map(|p| p.0).sum()
    }

    pub fn total_inversions(&self) -> usize {
        self.pairs.iter().map(|p| p.1).sum()
    }
}

/// Block partition of the pencil space: `d_A` state blocks of size `n`
/// followed by `d_D` output blocks of size `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockLayout {
    pub n: usize,
    pub m: usize,
    pub d_a: usize,
    pub d_d: usize,
}

impl BlockLayout {
    pub fn of(sys: &SystemMatrix) -> Self {
        Self {
            n: sys.n(),
            m: sys.m(),
            d_a: sys.deg_a(),
            d_d: sys.deg_d(),
        }
    }

    pub fn size(&self) -> usize {
        self.n * self.d_a + self.m * self.d_d
    }

    pub fn d(&self) -> usize {
        self.d_a.max(self.d_d)
    }

    pub fn r(&self) -> usize {
        self.d_a.min(self.d_d)
    }

    /// Row/col offset of state block `i` (0-based).
    pub fn a_off(&self, i: usize) -> usize {
        debug_assert!(i < self.d_a);
        i * self.n
    }

    /// Row/col offset of output block `i` (0-based).
    pub fn d_off(&self, i: usize) -> usize {
        debug_assert!(i < self.d_d);
        self.n * self.d_a + i * self.m
    }

    /// State-part block `(i, j)`, 0-based, `n×n`.
    pub fn a_block(&self, mat: &CMatrix, i: usize, j: usize) -> CMatrix {
        mat.view((self.a_off(i), self.a_off(j)), (self.n, self.n)).clone_owned()
    }

    /// Output-part block `(i, j)`, 0-based, `m×m`.
    pub fn d_block(&self, mat: &CMatrix, i: usize, j: usize) -> CMatrix {
        mat.view((self.d_off(i), self.d_off(j)), (self.m, self.m)).clone_owned()
    }

    /// Coupling block in the top-right quadrant (state rows, output cols), `n×m`.
    pub fn b_block(&self, mat: &CMatrix, i: usize, j: usize) -> CMatrix {
        mat.view((self.a_off(i), self.d_off(j)), (self.n, self.m)).clone_owned()
    }

    /// Coupling block in the bottom-left quadrant (output rows, state cols), `m×n`.
    pub fn c_block(&self, mat: &CMatrix, i: usize, j: usize) -> CMatrix {
        mat.view((self.d_off(i), self.a_off(j)), (self.m, self.n)).clone_owned()
    }

    /// Applies the block transpose to the state and output grids separately,
    /// leaving the coupling quadrants in place.
    pub fn part_block_transpose(&self, mat: &CMatrix) -> CMatrix {
        let mut out = mat.clone();
        let na = self.n * self.d_a;
        let a_part = mat.view((0, 0), (na, na)).clone_owned();
        out.view_mut((0, 0), (na, na))
            .copy_from(&block_transpose_matrix(&a_part, self.n));
        let md = self.m * self.d_d;
        let d_part = mat.view((na, na), (md, md)).clone_owned();
        out.view_mut((na, na), (md, md))
            .copy_from(&block_transpose_matrix(&d_part, self.m));
        out
    }
}

/// Fiedler factors of `A(λ)`: `M_dA = diag(A_dA, I)`, `M_0 = diag(I, −A_0)`,
/// and for `1 ≤ i ≤ d_A−1` the pivot `[[−A_i, I], [I, 0]]` at block rows
/// `d_A−i−1, d_A−i` (0-based), identity elsewhere.
pub fn build_m(a: &MatrixPolynomial) -> Vec<CMatrix> {
    build_side_factors(a)
}

/// Fiedler factors of `D(λ)`, the exact mirror of [`build_m`].
pub fn build_n(d: &MatrixPolynomial) -> Vec<CMatrix> {
    build_side_factors(d)
}

fn build_side_factors(p: &MatrixPolynomial) -> Vec<CMatrix> {
    let s = p.size();
    let deg = p.deg();
    let total = s * deg;
    let mut out = Vec::with_capacity(deg + 1);
    for i in 0..=deg {
        let mut f = CMatrix::identity(total, total);
        if i == 0 {
            f.view_mut(((deg - 1) * s, (deg - 1) * s), (s, s))
                .copy_from(&(-&p.coeff(0)));
        } else if i == deg {
            // wipe the two diagonal spots first when deg == 1 collides
            f.view_mut((0, 0), (s, s)).copy_from(&p.coeff(deg));
        } else {
            let r0 = (deg - i - 1) * s;
            let r1 = (deg - i) * s;
            f.view_mut((r0, r0), (s, s)).copy_from(&(-&p.coeff(i)));
            f.view_mut((r0, r1), (s, s)).copy_from(&CMatrix::identity(s, s));
            f.view_mut((r1, r0), (s, s)).copy_from(&CMatrix::identity(s, s));
            f.view_mut((r1, r1), (s, s)).copy_from(&CMatrix::zeros(s, s));
        }
        out.push(f);
    }
    out
}

/// The full factor family of a system, with the coupling matrices kept for
/// structural checks.
#[derive(Debug, Clone, PartialEq)]
pub struct FiedlerSet {
    layout: BlockLayout,
    m_factors: Vec<CMatrix>,
    n_factors: Vec<CMatrix>,
    mm: Vec<CMatrix>,
    b: CMatrix,
    c: CMatrix,
}

impl FiedlerSet {
    pub fn build(sys: &SystemMatrix) -> Self {
        let layout = BlockLayout::of(sys);
        let m_factors = build_m(sys.a());
        let n_factors = build_n(sys.d());
        let (n, m) = (layout.n, layout.m);
        let (d_a, d_d, d) = (layout.d_a, layout.d_d, layout.d());
        let na = n * d_a;
        let size = layout.size();

        let mut mm = Vec::with_capacity(d + 1);
        for i in 0..=d {
            let mut f = CMatrix::zeros(size, size);
            // state quadrant
            let m_part = if i == d {
                m_factors[d_a].clone()
            } else if i < d_a {
                m_factors[i].clone()
            } else {
                CMatrix::identity(na, na)
            };
            f.view_mut((0, 0), (na, na)).copy_from(&m_part);
            // output quadrant
            let n_part = if i == d {
                n_factors[d_d].clone()
            } else if i < d_d {
                n_factors[i].clone()
            } else {
                CMatrix::identity(m * d_d, m * d_d)
            };
            f.view_mut((na, na), (m * d_d, m * d_d)).copy_from(&n_part);
            if i == 0 {
                // couplings: +B at state block d_A, output block d_D; −C mirrored
                f.view_mut((layout.a_off(d_a - 1), layout.d_off(d_d - 1)), (n, m))
                    .copy_from(sys.b());
                f.view_mut((layout.d_off(d_d - 1), layout.a_off(d_a - 1)), (m, n))
                    .copy_from(&(-sys.c()));
            }
            mm.push(f);
        }
        Self {
            layout,
            m_factors,
            n_factors,
            mm,
            b: sys.b().clone(),
            c: sys.c().clone(),
        }
    }

    pub fn layout(&self) -> BlockLayout {
        self.layout
    }

    /// `M_0..=M_dA`.
    pub fn m_factors(&self) -> &[CMatrix] {
        &self.m_factors
    }

    /// `N_0..=N_dD`.
    pub fn n_factors(&self) -> &[CMatrix] {
        &self.n_factors
    }

    /// `𝕄_0..=𝕄_d`.
    pub fn mm(&self) -> &[CMatrix] {
        &self.mm
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    pub fn c(&self) -> &CMatrix {
        &self.c
    }

    /// Negative control: flips the sign of the `C` coupling inside `𝕄_0`,
    /// the corruption that the structural checks are expected to catch.
    pub fn inject_c_sign_typo(&mut self) {
        let l = self.layout;
        let pos = (l.d_off(l.d_d - 1), l.a_off(l.d_a - 1));
        let block = self.mm[0].view(pos, (l.m, l.n)).clone_owned();
        self.mm[0].view_mut(pos, (l.m, l.n)).copy_from(&(-block));
    }

    /// Product `𝕄_{σ⁻¹(1)} ⋯ 𝕄_{σ⁻¹(d)}`. Reference semantics for every
    /// structural test.
    pub fn assemble_product(&self, sigma: &Bijection) -> Result<CMatrix, FiedlerError> {
        let d = self.layout.d();
        if sigma.d() != d {
            return Err(FiedlerError::DegreeMismatch {
                expected: d,
                got: sigma.d(),
            });
        }
        let mut acc = CMatrix::identity(self.layout.size(), self.layout.size());
        for j in sigma.factor_order() {
            acc *= &self.mm[j];
        }
        Ok(acc)
    }

    /// Product of the state-side factors `M_j` in σ order (indices beyond
    /// `d_A−1` act as identity).
    pub fn m_product(&self, sigma: &Bijection) -> CMatrix {
        let na = self.layout.n * self.layout.d_a;
        let mut acc = CMatrix::identity(na, na);
        for j in sigma.factor_order() {
            if j < self.layout.d_a {
                acc *= &self.m_factors[j];
            }
        }
        acc
    }

    /// Product of the output-side factors `N_j` in σ order.
    pub fn n_product(&self, sigma: &Bijection) -> CMatrix {
        let md = self.layout.m * self.layout.d_d;
        let mut acc = CMatrix::identity(md, md);
        for j in sigma.factor_order() {
            if j < self.layout.d_d {
                acc *= &self.n_factors[j];
            }
        }
        acc
    }
}

/// Worst entry deviation of `𝕄_i𝕄_j − 𝕄_j𝕄_i` over the product factors
/// (`i, j < d`, `|i−j| > 1`). Zero on exact data; the leading factor `𝕄_d`
/// is excluded because it can overlap low factors on the shorter part.
pub fn commutativity_deviation(ms: &FiedlerSet) -> f64 {
    let d = ms.layout().d();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in i + 2..d {
            let diff = &ms.mm()[i] * &ms.mm()[j] - &ms.mm()[j] * &ms.mm()[i];
            worst = worst.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    worst
}

/// Worst deviation of `|det 𝕄_i|` from 1 over the interior factors
/// `1 ≤ i ≤ d−1`, whose pivots have unit determinant by construction.
pub fn interior_determinant_deviation(ms: &FiedlerSet) -> f64 {
    let d = ms.layout().d();
    (1..d)
        .map(|i| (crate::matpoly::lu_det(&ms.mm()[i]).norm() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Coupling-corner positions of a pencil, 1-based block coordinates inside
/// the two coupling quadrants. The `B` entry carries an implicit minus sign
/// and the `C` entry a plus sign in the pencil's constant term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CouplingMeta {
    pub b_row: usize,
    pub b_col: usize,
    pub c_row: usize,
    pub c_col: usize,
}

/// A pencil `λX + Y` on the block layout of a system, with coupling-corner
/// metadata for the block transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPencil {
    pub x: CMatrix,
    pub y: CMatrix,
    pub layout: BlockLayout,
    pub coupling: CouplingMeta,
}

impl BlockPencil {
    pub fn eval(&self, lambda0: Cx) -> CMatrix {
        self.x.map(|z| z * lambda0) + &self.y
    }

    /// The pencil as a degree-1 matrix polynomial.
    pub fn as_matrix_polynomial(&self) -> MatrixPolynomial {
        MatrixPolynomial::pencil(self.y.clone(), self.x.clone())
    }
}

/// Predicted coupling positions from the consecution–inversion structure.
///
/// With `CISS(σ) = (c_1, i_1, …)` the `B` block of `λ𝕄_d − 𝕄_σ` sits at
/// `(d_A, d_D − c_1)` and `C` at `(d_D, d_A − c_1)` when `c_1 > 0`, and at
/// `(d_A − i_1, d_D)`, `(d_D − i_1, d_A)` when `c_1 = 0`. Runs longer than a
/// part's factor count saturate at block 1, because factors past the degree
/// of a part act as identity there.
pub fn predicted_corners(layout: &BlockLayout, ciss: &Ciss) -> CouplingMeta {
    let (d_a, d_d) = (layout.d_a, layout.d_d);
    let clamp = |run: usize, deg: usize| run.min(deg.saturating_sub(1));
    let c1 = ciss.c1();
    if c1 > 0 {
        CouplingMeta {
            b_row: d_a,
            b_col: d_d - clamp(c1, d_d),
            c_row: d_d,
            c_col: d_a - clamp(c1, d_a),
        }
    } else {
        let i1 = ciss.leading_i1();
        CouplingMeta {
            b_row: d_a - clamp(i1, d_a),
            b_col: d_d,
            c_row: d_d - clamp(i1, d_d),
            c_col: d_a,
        }
    }
}

/// The Fiedler pencil `λ𝕄_d − 𝕄_σ`.
pub fn fiedler_pencil(ms: &FiedlerSet, sigma: &Bijection) -> Result<BlockPencil, FiedlerError> {
    let product = ms.assemble_product(sigma)?;
    Ok(BlockPencil {
        x: ms.mm()[ms.layout.d()].clone(),
        y: -product,
        layout: ms.layout,
        coupling: predicted_corners(&ms.layout, &sigma.ciss()),
    })
}

/// First companion form, written out directly from its dense layout: the top
/// block row of each part carries the falling coefficient sequence, `−I`
/// subdiagonals below, `−B` in the top coupling row and `C` in the top
/// output row. Equals the pencil of the descending ordering.
pub fn companion_first(sys: &SystemMatrix) -> BlockPencil {
    let layout = BlockLayout::of(sys);
    let (n, m, d_a, d_d) = (layout.n, layout.m, layout.d_a, layout.d_d);
    let size = layout.size();

    let mut x = CMatrix::identity(size, size);
    x.view_mut((0, 0), (n, n)).copy_from(&sys.a().coeff(d_a));
    x.view_mut((layout.d_off(0), layout.d_off(0)), (m, m))
        .copy_from(&sys.d().coeff(d_d));

    let mut y = CMatrix::zeros(size, size);
    for j in 0..d_a {
        y.view_mut((0, layout.a_off(j)), (n, n))
            .copy_from(&sys.a().coeff(d_a - 1 - j));
    }
    for i in 1..d_a {
        y.view_mut((layout.a_off(i), layout.a_off(i - 1)), (n, n))
            .copy_from(&(-CMatrix::identity(n, n)));
    }
    for j in 0..d_d {
        y.view_mut((layout.d_off(0), layout.d_off(j)), (m, m))
            .copy_from(&sys.d().coeff(d_d - 1 - j));
    }
    for i in 1..d_d {
        y.view_mut((layout.d_off(i), layout.d_off(i - 1)), (m, m))
            .copy_from(&(-CMatrix::identity(m, m)));
    }
    y.view_mut((0, layout.d_off(d_d - 1)), (n, m)).copy_from(&(-sys.b()));
    y.view_mut((layout.d_off(0), layout.a_off(d_a - 1)), (m, n)).copy_from(sys.c());

    BlockPencil {
        x,
        y,
        layout,
        coupling: CouplingMeta {
            b_row: 1,
            b_col: d_d,
            c_row: 1,
            c_col: d_a,
        },
    }
}

/// Second companion form: coefficients run down the first block column of
/// each part with `−I` superdiagonals, `−B` at the bottom of the first
/// output column and `C` in the bottom output row. Equals both the pencil of
/// the ascending ordering and the block transpose of [`companion_first`].
pub fn companion_second(sys: &SystemMatrix) -> BlockPencil {
    let layout = BlockLayout::of(sys);
    let (n, m, d_a, d_d) = (layout.n, layout.m, layout.d_a, layout.d_d);
    let size = layout.size();

    let mut x = CMatrix::identity(size, size);
    x.view_mut((0, 0), (n, n)).copy_from(&sys.a().coeff(d_a));
    x.view_mut((layout.d_off(0), layout.d_off(0)), (m, m))
        .copy_from(&sys.d().coeff(d_d));

    let mut y = CMatrix::zeros(size, size);
    for i in 0..d_a {
        y.view_mut((layout.a_off(i), 0), (n, n))
            .copy_from(&sys.a().coeff(d_a - 1 - i));
    }
    for i in 0..d_a - 1 {
        y.view_mut((layout.a_off(i), layout.a_off(i + 1)), (n, n))
            .copy_from(&(-CMatrix::identity(n, n)));
    }
    for i in 0..d_d {
        y.view_mut((layout.d_off(i), layout.d_off(0)), (m, m))
            .copy_from(&sys.d().coeff(d_d - 1 - i));
    }
    for i in 0..d_d - 1 {
        y.view_mut((layout.d_off(i), layout.d_off(i + 1)), (m, m))
            .copy_from(&(-CMatrix::identity(m, m)));
    }
    y.view_mut((layout.a_off(d_a - 1), layout.d_off(0)), (n, m)).copy_from(&(-sys.b()));
    y.view_mut((layout.d_off(d_d - 1), 0), (m, n)).copy_from(sys.c());

    BlockPencil {
        x,
        y,
        layout,
        coupling: CouplingMeta {
            b_row: d_a,
            b_col: 1,
            c_row: d_d,
            c_col: 1,
        },
    }
}

/// Block transpose preserving the coupling-corner form: both parts are
/// transposed at the block level, the `B` corner moves to the transposed
/// position of the `C` corner and vice versa. An involution that maps the
/// first companion form to the second.
pub fn block_transpose(p: &BlockPencil) -> BlockPencil {
    let l = &p.layout;
    let x = l.part_block_transpose(&p.x);
    let mut y = l.part_block_transpose(&p.y);
    // clear old corners, then write the swapped ones
    let b = -l.b_block(&p.y, p.coupling.b_row - 1, p.coupling.b_col - 1);
    let c = l.c_block(&p.y, p.coupling.c_row - 1, p.coupling.c_col - 1);
    let zeros_b = CMatrix::zeros(l.n, l.m);
    let zeros_c = CMatrix::zeros(l.m, l.n);
    y.view_mut((l.a_off(p.coupling.b_row - 1), l.d_off(p.coupling.b_col - 1)), (l.n, l.m))
        .copy_from(&zeros_b);
    y.view_mut((l.d_off(p.coupling.c_row - 1), l.a_off(p.coupling.c_col - 1)), (l.m, l.n))
        .copy_from(&zeros_c);
    let coupling = CouplingMeta {
        b_row: p.coupling.c_col,
        b_col: p.coupling.c_row,
        c_row: p.coupling.b_col,
        c_col: p.coupling.b_row,
    };
    y.view_mut((l.a_off(coupling.b_row - 1), l.d_off(coupling.b_col - 1)), (l.n, l.m))
        .copy_from(&(-&b));
    y.view_mut((l.d_off(coupling.c_row - 1), l.a_off(coupling.c_col - 1)), (l.m, l.n))
        .copy_from(&c);
    BlockPencil {
        x,
        y,
        layout: *l,
        coupling,
    }
}

/// Structure report for one pencil: predicted coupling positions, whether the
/// assembled product matches them exactly, and any offending blocks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CornerReport {
    pub c1: usize,
    pub i1_leading: usize,
    /// 1-based (row, col) of the `B` block inside the top-right quadrant.
    #[serde(rename = "B_block")]
    pub b_block: (usize, usize),
    /// 1-based (row, col) of the `C` block inside the bottom-left quadrant.
    #[serde(rename = "C_block")]
    pub c_block: (usize, usize),
    pub exact_match: bool,
    /// Offending block coordinates as (quadrant, row, col), 1-based.
    pub mismatches: Vec<(String, usize, usize)>,
}

/// Checks the assembled pencil `λ𝕄_d − 𝕄_σ` against the structure forced by
/// `CISS(σ)`: the state quadrant must equal `λM_{d_A} − M_σ`, the output
/// quadrant `λN_{d_D} − N_σ`, and the coupling quadrants must vanish except
/// for `−B`/`+C` at the predicted blocks.
pub fn corner_structure(ms: &FiedlerSet, sigma: &Bijection) -> Result<CornerReport, FiedlerError> {
    let l = ms.layout();
    let product = ms.assemble_product(sigma)?;
    let ciss = sigma.ciss();
    let meta = predicted_corners(&l, &ciss);
    let mut mismatches: Vec<(String, usize, usize)> = Vec::new();

    // state and output quadrants of 𝕄_σ are the side products
    let m_sigma = ms.m_product(sigma);
    let n_sigma = ms.n_product(sigma);
    for i in 0..l.d_a {
        for j in 0..l.d_a {
            let got = l.a_block(&product, i, j);
            let want = m_sigma.view((l.a_off(i), l.a_off(j)), (l.n, l.n)).clone_owned();
            if got != want {
                mismatches.push(("A".into(), i + 1, j + 1));
            }
        }
    }
    for i in 0..l.d_d {
        for j in 0..l.d_d {
            let got = l.d_block(&product, i, j);
            let want = n_sigma
                .view((i * l.m, j * l.m), (l.m, l.m))
                .clone_owned();
            if got != want {
                mismatches.push(("D".into(), i + 1, j + 1));
            }
        }
    }
    // coupling quadrants: single block each, +B / −C inside 𝕄_σ
    for i in 0..l.d_a {
        for j in 0..l.d_d {
            let got = l.b_block(&product, i, j);
            let want = if (i + 1, j + 1) == (meta.b_row, meta.b_col) {
                ms.b().clone()
            } else {
                CMatrix::zeros(l.n, l.m)
            };
            if got != want {
                mismatches.push(("B".into(), i + 1, j + 1));
            }
        }
    }
    for i in 0..l.d_d {
        for j in 0..l.d_a {
            let got = l.c_block(&product, i, j);
            let want = if (i + 1, j + 1) == (meta.c_row, meta.c_col) {
                -ms.c()
            } else {
                CMatrix::zeros(l.m, l.n)
            };
            if got != want {
                mismatches.push(("C".into(), i + 1, j + 1));
            }
        }
    }

    let report = CornerReport {
        c1: ciss.c1(),
        i1_leading: ciss.leading_i1(),
        b_block: (meta.b_row, meta.b_col),
        c_block: (meta.c_row, meta.c_col),
        exact_match: mismatches.is_empty(),
        mismatches,
    };
    if report.exact_match {
        Ok(report)
    } else {
        Err(FiedlerError::StructureMismatch {
            report: Box::new(report),
        })
    }
}

#[cfg(test)]
mod tests;
