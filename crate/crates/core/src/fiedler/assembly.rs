//! Operation-free assembly of the factor product `𝕄_σ`.
//!
//! The product is accumulated factor by factor in increasing index order:
//! starting from `𝕄_0`, factor `𝕄_{k+1}` multiplies from the right when σ
//! has a consecution at `k` (it sits later in the product than `𝕄_k`) and
//! from the left on an inversion. Factors with index gap ≥ 2 commute, so this
//! reproduces the σ-ordered product exactly.
//!
//! Each multiplication touches two block rows or columns whose current
//! content is a bare unit block — factors with smaller index never reach that
//! far up the grid — so the update reduces to moving one row/column and
//! placing a coefficient block. No entry of the result is ever computed by an
//! actual matrix operation; the working state is a grid of symbolic atoms
//! that is materialized at the end.

use super::{Bijection, BlockLayout, FiedlerError};
use crate::matpoly::CMatrix;
use crate::rosenbrock::SystemMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Atom {
    Zero,
    /// ±I (unit block of the quadrant it sits in).
    Unit { neg: bool },
    /// ±A_i
    CoefA { idx: usize, neg: bool },
    /// ±D_i
    CoefD { idx: usize, neg: bool },
    /// ±B
    CouplingB { neg: bool },
    /// ±C
    CouplingC { neg: bool },
}

struct AtomGrid {
    layout: BlockLayout,
    /// (d_a + d_d)² blocks, row major.
    cells: Vec<Atom>,
}

impl AtomGrid {
    fn blocks(&self) -> usize {
        self.layout.d_a + self.layout.d_d
    }

    fn at(&self, r: usize, c: usize) -> Atom {
        self.cells[r * self.blocks() + c]
    }

    fn set(&mut self, r: usize, c: usize, a: Atom) {
        let b = self.blocks();
        self.cells[r * b + c] = a;
    }

    /// Starting state: the atom pattern of `𝕄_0`.
    fn initial(layout: BlockLayout) -> Self {
        let blocks = layout.d_a + layout.d_d;
        let mut grid = Self {
            layout,
            cells: vec![Atom::Zero; blocks * blocks],
        };
        for i in 0..blocks {
            grid.set(i, i, Atom::Unit { neg: false });
        }
        let last_a = layout.d_a - 1;
        let last_d = layout.d_a + layout.d_d - 1;
        grid.set(last_a, last_a, Atom::CoefA { idx: 0, neg: true });
        grid.set(last_d, last_d, Atom::CoefD { idx: 0, neg: true });
        grid.set(last_a, last_d, Atom::CouplingB { neg: false });
        grid.set(last_d, last_a, Atom::CouplingC { neg: true });
        grid
    }

    fn is_unit_column(&self, col: usize, unit_row: usize) -> bool {
        (0..self.blocks()).all(|r| {
            let want = if r == unit_row {
                Atom::Unit { neg: false }
            } else {
                Atom::Zero
            };
            self.at(r, col) == want
        })
    }

    fn is_unit_row(&self, row: usize, unit_col: usize) -> bool {
        (0..self.blocks()).all(|c| {
            let want = if c == unit_col {
                Atom::Unit { neg: false }
            } else {
                Atom::Zero
            };
            self.at(row, c) == want
        })
    }

    /// Right-multiplication by the pivot `[[-X, I], [I, 0]]` at block columns
    /// `(p, p+1)`: column `p` must still be the unit column `e_p`; afterwards
    /// column `p+1` holds that unit and column `p` receives the old column
    /// `p+1` with `−X` placed at row `p`.
    fn mul_right_pivot(&mut self, p: usize, coeff: Atom) {
        debug_assert!(self.is_unit_column(p, p), "pivot column {p} not fresh");
        debug_assert_eq!(self.at(p, p + 1), Atom::Zero);
        for r in 0..self.blocks() {
            let moved = self.at(r, p + 1);
            self.set(r, p + 1, self.at(r, p));
            self.set(r, p, moved);
        }
        self.set(p, p, coeff);
    }

    /// Left-multiplication mirror of [`Self::mul_right_pivot`] on block rows.
    fn mul_left_pivot(&mut self, p: usize, coeff: Atom) {
        debug_assert!(self.is_unit_row(p, p), "pivot row {p} not fresh");
        debug_assert_eq!(self.at(p + 1, p), Atom::Zero);
        for c in 0..self.blocks() {
            let moved = self.at(p + 1, c);
            self.set(p + 1, c, self.at(p, c));
            self.set(p, c, moved);
        }
        self.set(p, p, coeff);
    }

    /// Folds in factor `𝕄_f` (interior index `1 ≤ f ≤ d−1`) from the chosen side.
    fn apply_factor(&mut self, f: usize, from_right: bool) {
        let l = self.layout;
        if f < l.d_a {
            let p = l.d_a - f - 1;
            let coeff = Atom::CoefA { idx: f, neg: true };
            if from_right {
                self.mul_right_pivot(p, coeff);
            } else {
                self.mul_left_pivot(p, coeff);
            }
        }
        if f < l.d_d {
            let p = l.d_a + (l.d_d - f - 1);
            let coeff = Atom::CoefD { idx: f, neg: true };
            if from_right {
                self.mul_right_pivot(p, coeff);
            } else {
                self.mul_left_pivot(p, coeff);
            }
        }
    }

    fn materialize(&self, sys: &SystemMatrix) -> CMatrix {
        let l = self.layout;
        let size = l.size();
        let blocks = self.blocks();
        let row_off = |b: usize| {
            if b < l.d_a {
                (b * l.n, l.n)
            } else {
                (l.n * l.d_a + (b - l.d_a) * l.m, l.m)
            }
        };
        let mut out = CMatrix::zeros(size, size);
        for br in 0..blocks {
            let (r0, rs) = row_off(br);
            for bc in 0..blocks {
                let (c0, cs) = row_off(bc);
                let block = match self.at(br, bc) {
                    Atom::Zero => continue,
                    Atom::Unit { neg } => {
                        debug_assert_eq!(rs, cs);
                        let eye = CMatrix::identity(rs, cs);
                        if neg {
                            -eye
                        } else {
                            eye
                        }
                    }
                    Atom::CoefA { idx, neg } => {
                        let a = sys.a().coeff(idx);
                        if neg {
                            -a
                        } else {
                            a
                        }
                    }
                    Atom::CoefD { idx, neg } => {
                        let dcoef = sys.d().coeff(idx);
                        if neg {
                            -dcoef
                        } else {
                            dcoef
                        }
                    }
                    Atom::CouplingB { neg } => {
                        if neg {
                            -sys.b()
                        } else {
                            sys.b().clone()
                        }
                    }
                    Atom::CouplingC { neg } => {
                        if neg {
                            -sys.c()
                        } else {
                            sys.c().clone()
                        }
                    }
                };
                debug_assert_eq!((block.nrows(), block.ncols()), (rs, cs));
                out.view_mut((r0, c0), (rs, cs)).copy_from(&block);
            }
        }
        out
    }
}

/// Builds `𝕄_σ` without multiplying matrices, by the consecution/inversion
/// branch structure of σ. Must equal [`super::FiedlerSet::assemble_product`]
/// entry for entry; the product is ground truth.
pub fn assemble_algorithmic(sys: &SystemMatrix, sigma: &Bijection) -> Result<CMatrix, FiedlerError> {
    let layout = BlockLayout::of(sys);
    let d = layout.d();
    if sigma.d() != d {
        return Err(FiedlerError::DegreeMismatch {
            expected: d,
            got: sigma.d(),
        });
    }
    let mut grid = AtomGrid::initial(layout);
    for k in 0..d - 1 {
        grid.apply_factor(k + 1, sigma.has_consecution(k));
    }
    Ok(grid.materialize(sys))
}
