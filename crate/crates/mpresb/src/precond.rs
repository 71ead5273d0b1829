//! Block preconditioners for the system [[F, -G*], [G, F]] with F = M and
//! G = sqrt(nu)(K + i omega M).
//!
//! Every preconditioner here applies its inverse through exactly two inner
//! solves with fixed matrices factored at construction:
//!
//! * `Mpresb` - R = [[F, -H], [H, F + 2H]] with H = (G + G*)/2 = sqrt(nu) K.
//!   Both inner solves use the same real SPD matrix F + H = M + sqrt(nu) K,
//!   which is what makes the variant cheap: no complex arithmetic in the
//!   inner solves and one factorization instead of two.
//! * `Presb` - Q = [[F, -G*], [G, F + G + G*]]; inner solves with F + G and
//!   F + G*, complex positive definite.
//! * `Bd` - block diagonal with D = (1 + omega sqrt(nu)) M + sqrt(nu) K.
//! * `Bas` - (1 + alpha) J(alpha) blockdiag(D, D) with
//!   D = alpha M + sqrt(nu) K and alpha = (1 + nu omega^2)/(1 + omega
//!   sqrt(nu)); J(alpha) is a two-by-two block of scaled identities and is
//!   inverted in closed form, so the two D solves are the only inner work.
//!
//! For each type, `block_operator()` materializes the preconditioner as an
//! explicit block operator so tests can check ||P z - v|| directly.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::block::{BlockOperator, MatComb};
use crate::error::{Error, Result};
use crate::fem::ProblemInstance;
use crate::inner::{InnerConfig, InnerSolver};
use crate::krylov::Preconditioner;
use crate::sparse::SparseMatrix;

/// The preconditioner families the harness knows how to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecondKind {
    Mpresb,
    Presb,
    Bd,
    Bas,
}

impl PrecondKind {
    pub const ALL: [PrecondKind; 4] = [
        PrecondKind::Mpresb,
        PrecondKind::Presb,
        PrecondKind::Bd,
        PrecondKind::Bas,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PrecondKind::Mpresb => "mpresb",
            PrecondKind::Presb => "presb",
            PrecondKind::Bd => "bd",
            PrecondKind::Bas => "bas",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mpresb" => Ok(PrecondKind::Mpresb),
            "presb" => Ok(PrecondKind::Presb),
            "bd" => Ok(PrecondKind::Bd),
            "bas" => Ok(PrecondKind::Bas),
            other => Err(Error::InvalidParameter(format!(
                "unknown preconditioner '{other}' (expected mpresb, presb, bd, or bas)"
            ))),
        }
    }
}

impl std::fmt::Display for PrecondKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A `Preconditioner` that can also present itself as an explicit operator.
pub trait BlockPreconditioner: Preconditioner {
    fn block_operator(&self) -> &BlockOperator;
}

/// Builds the requested preconditioner for a problem instance.
pub fn build(
    kind: PrecondKind,
    p: &ProblemInstance,
    inner: &InnerConfig,
) -> Result<Box<dyn BlockPreconditioner>> {
    Ok(match kind {
        PrecondKind::Mpresb => Box::new(Mpresb::new(p, inner)?),
        PrecondKind::Presb => Box::new(Presb::new(p, inner)?),
        PrecondKind::Bd => Box::new(Bd::new(p, inner)?),
        PrecondKind::Bas => Box::new(Bas::new(p, inner)?),
    })
}

fn split(v: &[C64], n: usize) -> Result<(&[C64], &[C64])> {
    if v.len() != 2 * n {
        return Err(Error::DimensionMismatch(format!(
            "preconditioner expects length {}, got {}",
            2 * n,
            v.len()
        )));
    }
    Ok(v.split_at(n))
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// The modified-variant operator R = [[F, -H], [H, F + 2H]] with
/// H = sqrt(nu) K, materialized as a block operator.
pub fn mpresb_operator(p: &ProblemInstance) -> Result<BlockOperator> {
    let n = p.n();
    let s = p.nu.sqrt();
    let h = MatComb::new(n, vec![(re(s), p.stiffness.clone())])?;
    let block22 = MatComb::new(
        n,
        vec![
            (re(1.0), p.mass.clone()),
            (re(2.0 * s), p.stiffness.clone()),
        ],
    )?;
    BlockOperator::new([[p.f_comb(), h.negated()], [h, block22]])
}

/// The classical-variant operator Q = [[F, -G*], [G, F + G + G*]].
///
/// Since G + G* = 2 sqrt(nu) K, the last block equals M + 2 sqrt(nu) K and
/// Q differs from R only in the off-diagonal blocks.
pub fn presb_operator(p: &ProblemInstance) -> Result<BlockOperator> {
    let n = p.n();
    let s = p.nu.sqrt();
    let g = p.g_comb();
    let block22 = MatComb::new(
        n,
        vec![
            (re(1.0), p.mass.clone()),
            (re(2.0 * s), p.stiffness.clone()),
        ],
    )?;
    BlockOperator::new([[p.f_comb(), g.adjoint().negated()], [g, block22]])
}

/// Modified PRESB: two solves with the real SPD matrix F + H per application.
pub struct Mpresb {
    n: usize,
    sqrt_nu: f64,
    stiffness: Arc<SparseMatrix>,
    inner: InnerSolver,
    op: BlockOperator,
}

impl Mpresb {
    pub fn new(p: &ProblemInstance, cfg: &InnerConfig) -> Result<Self> {
        let n = p.n();
        let s = p.nu.sqrt();
        let fph = Arc::new(SparseMatrix::linear_combination_real(&[
            (1.0, &p.mass),
            (s, &p.stiffness),
        ])?);
        let inner = InnerSolver::new(fph, cfg)?;
        let op = mpresb_operator(p)?;
        Ok(Mpresb {
            n,
            sqrt_nu: s,
            stiffness: p.stiffness.clone(),
            inner,
            op,
        })
    }
}

impl Preconditioner for Mpresb {
    fn dim(&self) -> usize {
        2 * self.n
    }

    /// Solve R [r; s] = [p; q]:
    ///   1. (F + H)(r + s) = p + q
    ///   2. (F + H) s = q - H (r + s)
    ///   3. r = (r + s) - s
    fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        let (p, q) = split(v, self.n)?;
        let rhs1: Vec<C64> = p.iter().zip(q).map(|(a, b)| a + b).collect();
        let t = self.inner.solve(&rhs1)?;
        let mut rhs2 = q.to_vec();
        self.stiffness.axpy_into(re(-self.sqrt_nu), &t, &mut rhs2)?;
        let s = self.inner.solve(&rhs2)?;
        let mut out = Vec::with_capacity(2 * self.n);
        out.extend(t.iter().zip(&s).map(|(ti, si)| ti - si));
        out.extend_from_slice(&s);
        Ok(out)
    }

    fn inner_solves(&self) -> usize {
        self.inner.solves()
    }

    fn name(&self) -> &'static str {
        "mpresb"
    }
}

impl BlockPreconditioner for Mpresb {
    fn block_operator(&self) -> &BlockOperator {
        &self.op
    }
}

/// Classical PRESB: solves with F + G and F + G*.
pub struct Presb {
    n: usize,
    g: MatComb,
    inner_fg: InnerSolver,
    inner_fgs: InnerSolver,
    op: BlockOperator,
}

impl Presb {
    pub fn new(p: &ProblemInstance, cfg: &InnerConfig) -> Result<Self> {
        let n = p.n();
        let s = p.nu.sqrt();
        let ws = p.omega * s;
        // F + G = (1 + i omega sqrt(nu)) M + sqrt(nu) K and its adjoint.
        let fg = Arc::new(SparseMatrix::linear_combination_complex(&[
            (C64::new(1.0, ws), &p.mass),
            (re(s), &p.stiffness),
        ])?);
        let fgs = Arc::new(SparseMatrix::linear_combination_complex(&[
            (C64::new(1.0, -ws), &p.mass),
            (re(s), &p.stiffness),
        ])?);
        let inner_fg = InnerSolver::new(fg, cfg)?;
        let inner_fgs = InnerSolver::new(fgs, cfg)?;
        let g = p.g_comb();
        let op = presb_operator(p)?;
        Ok(Presb {
            n,
            g,
            inner_fg,
            inner_fgs,
            op,
        })
    }
}

impl Preconditioner for Presb {
    fn dim(&self) -> usize {
        2 * self.n
    }

    /// Solve Q [r; s] = [p; q]:
    ///   1. (F + G) a = p + q
    ///   2. (F + G*) s = q - G a
    ///   3. r = a - s
    fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        let (p, q) = split(v, self.n)?;
        let rhs1: Vec<C64> = p.iter().zip(q).map(|(a, b)| a + b).collect();
        let a = self.inner_fg.solve(&rhs1)?;
        let mut ga = vec![C64::new(0.0, 0.0); self.n];
        self.g.accumulate(&a, &mut ga)?;
        let rhs2: Vec<C64> = q.iter().zip(&ga).map(|(qi, gi)| qi - gi).collect();
        let s = self.inner_fgs.solve(&rhs2)?;
        let mut out = Vec::with_capacity(2 * self.n);
        out.extend(a.iter().zip(&s).map(|(ai, si)| ai - si));
        out.extend_from_slice(&s);
        Ok(out)
    }

    fn inner_solves(&self) -> usize {
        self.inner_fg.solves() + self.inner_fgs.solves()
    }

    fn name(&self) -> &'static str {
        "presb"
    }
}

impl BlockPreconditioner for Presb {
    fn block_operator(&self) -> &BlockOperator {
        &self.op
    }
}

/// Block diagonal preconditioner with D = (1 + omega sqrt(nu)) M + sqrt(nu) K.
pub struct Bd {
    n: usize,
    inner: InnerSolver,
    op: BlockOperator,
}

impl Bd {
    pub fn new(p: &ProblemInstance, cfg: &InnerConfig) -> Result<Self> {
        let n = p.n();
        let s = p.nu.sqrt();
        let d = Arc::new(SparseMatrix::linear_combination_real(&[
            (1.0 + p.omega * s, &p.mass),
            (s, &p.stiffness),
        ])?);
        let d_comb = MatComb::new(
            n,
            vec![
                (re(1.0 + p.omega * s), p.mass.clone()),
                (re(s), p.stiffness.clone()),
            ],
        )?;
        let inner = InnerSolver::new(d, cfg)?;
        let op = BlockOperator::new([
            [d_comb.clone(), MatComb::zero(n)],
            [MatComb::zero(n), d_comb],
        ])?;
        Ok(Bd { n, inner, op })
    }
}

impl Preconditioner for Bd {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        let (p, q) = split(v, self.n)?;
        let mut out = self.inner.solve(p)?;
        out.extend(self.inner.solve(q)?);
        Ok(out)
    }

    fn inner_solves(&self) -> usize {
        self.inner.solves()
    }

    fn name(&self) -> &'static str {
        "bd"
    }
}

impl BlockPreconditioner for Bd {
    fn block_operator(&self) -> &BlockOperator {
        &self.op
    }
}

/// Block alternating splitting preconditioner.
///
/// P = (1 + alpha) J(alpha) blockdiag(D, D) where J(alpha) is built from
/// scaled identities with off-diagonal factor
/// c = 1 + nu omega^2 - i omega sqrt(nu). Since the block matrix
/// [[I, cI], [conj(c) I, -I]] squares to (1 + |c|^2) I, its inverse is
/// itself over 1 + |c|^2 and applying P^{-1} costs two D solves.
pub struct Bas {
    n: usize,
    alpha: f64,
    c: C64,
    inner: InnerSolver,
    op: BlockOperator,
}

impl Bas {
    pub fn new(p: &ProblemInstance, cfg: &InnerConfig) -> Result<Self> {
        let n = p.n();
        let s = p.nu.sqrt();
        let nw2 = p.nu * p.omega * p.omega;
        let alpha = (1.0 + nw2) / (1.0 + p.omega * s);
        let c = C64::new(1.0 + nw2, -p.omega * s);
        let d = Arc::new(SparseMatrix::linear_combination_real(&[
            (alpha, &p.mass),
            (s, &p.stiffness),
        ])?);
        let inner = InnerSolver::new(d.clone(), cfg)?;
        // P = s1 [[D, c D], [conj(c) D, -D]], s1 = (1 + alpha)/(alpha (2 + nu omega^2)).
        let s1 = re((1.0 + alpha) / (alpha * (2.0 + nw2)));
        let dblock = |coef: C64| MatComb::new(n, vec![(coef, d.clone())]);
        let op = BlockOperator::new([
            [dblock(s1)?, dblock(s1 * c)?],
            [dblock(s1 * c.conj())?, dblock(-s1)?],
        ])?;
        Ok(Bas {
            n,
            alpha,
            c,
            inner,
            op,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Preconditioner for Bas {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        let (p, q) = split(v, self.n)?;
        // Invert (1 + alpha) J in closed form. With c.re = 1 + nu omega^2,
        // the combined scalar is alpha (2 + nu omega^2) / ((1 + |c|^2)(1 + alpha)).
        let factor =
            self.alpha * (1.0 + self.c.re) / ((1.0 + self.c.norm_sqr()) * (1.0 + self.alpha));
        let u: Vec<C64> = p
            .iter()
            .zip(q)
            .map(|(pi, qi)| factor * (pi + self.c * qi))
            .collect();
        let w: Vec<C64> = p
            .iter()
            .zip(q)
            .map(|(pi, qi)| factor * (self.c.conj() * pi - qi))
            .collect();
        let mut out = self.inner.solve(&u)?;
        out.extend(self.inner.solve(&w)?);
        Ok(out)
    }

    fn inner_solves(&self) -> usize {
        self.inner.solves()
    }

    fn name(&self) -> &'static str {
        "bas"
    }
}

impl BlockPreconditioner for Bas {
    fn block_operator(&self) -> &BlockOperator {
        &self.op
    }
}
