//! Q1 finite elements on the unit square or cube.
//!
//! Uniform mesh with spacing h = 2^-k, homogeneous Dirichlet boundary
//! eliminated during assembly, interior nodes numbered lexicographically
//! (x fastest). Element matrices are tensor products of the exact 1D mass
//! and stiffness blocks, so no quadrature runs at assembly time; the test
//! suite checks the result against a Gauss-quadrature oracle instead.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::block::{BlockOperator, MatComb};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Uniform interior mesh of the unit square (dim 2) or cube (dim 3).
#[derive(Clone, Debug)]
pub struct Mesh {
    pub dim: usize,
    pub h: f64,
    /// Interior nodes per axis: 1/h - 1.
    pub m: usize,
    /// Total interior nodes: m^dim.
    pub n: usize,
}

/// Mesh constructor; `h` must be 2^-k with k >= 1.
pub fn build_mesh(dim: usize, h: f64) -> Result<Mesh> {
    if dim != 2 && dim != 3 {
        return Err(Error::InvalidParameter(format!(
            "dimension must be 2 or 3, got {dim}"
        )));
    }
    if h.is_nan() || h <= 0.0 || h > 0.5 {
        return Err(Error::InvalidParameter(format!(
            "mesh spacing must satisfy 0 < h <= 1/2, got {h}"
        )));
    }
    let inv = 1.0 / h;
    let cells = inv.round() as usize;
    if (cells as f64 - inv).abs() > 1e-12 || !cells.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "mesh spacing must be a reciprocal power of two, got {h}"
        )));
    }
    let m = cells - 1;
    Ok(Mesh {
        dim,
        h,
        m,
        n: m.pow(dim as u32),
    })
}

impl Mesh {
    /// Lexicographic index of the interior node with zero-based per-axis
    /// coordinates (x fastest).
    pub fn index(&self, coords: [usize; 3]) -> usize {
        debug_assert!(coords[..self.dim].iter().all(|&c| c < self.m));
        debug_assert!(self.dim == 3 || coords[2] == 0);
        let mut idx = 0;
        for d in (0..self.dim).rev() {
            idx = idx * self.m + coords[d];
        }
        idx
    }

    /// Inverse of `index`; the unused axis is zero in 2D.
    pub fn coords(&self, mut idx: usize) -> [usize; 3] {
        let mut c = [0usize; 3];
        for slot in c.iter_mut().take(self.dim) {
            *slot = idx % self.m;
            idx /= self.m;
        }
        c
    }

    /// Physical position of an interior node.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        let mut p = [0.0f64; 3];
        for d in 0..self.dim {
            p[d] = (c[d] + 1) as f64 * self.h;
        }
        p
    }
}

/// 1D element mass block (h/6) [[2, 1], [1, 2]].
fn mass_1d(h: f64) -> [[f64; 2]; 2] {
    let a = h / 3.0;
    let b = h / 6.0;
    [[a, b], [b, a]]
}

/// 1D element stiffness block (1/h) [[1, -1], [-1, 1]].
fn stiffness_1d(h: f64) -> [[f64; 2]; 2] {
    let a = 1.0 / h;
    [[a, -a], [-a, a]]
}

fn corner(local: usize) -> [usize; 3] {
    [local & 1, (local >> 1) & 1, (local >> 2) & 1]
}

/// Element mass entry for local corners a, b (tensor-product ordering).
fn element_mass_entry(dim: usize, h: f64, a: usize, b: usize) -> f64 {
    let m1 = mass_1d(h);
    let (ca, cb) = (corner(a), corner(b));
    (0..dim).map(|d| m1[ca[d]][cb[d]]).product()
}

/// Element stiffness entry for local corners a, b (tensor-product ordering).
fn element_stiffness_entry(dim: usize, h: f64, a: usize, b: usize) -> f64 {
    let m1 = mass_1d(h);
    let k1 = stiffness_1d(h);
    let (ca, cb) = (corner(a), corner(b));
    (0..dim)
        .map(|d| {
            (0..dim)
                .map(|e| {
                    if e == d {
                        k1[ca[e]][cb[e]]
                    } else {
                        m1[ca[e]][cb[e]]
                    }
                })
                .product::<f64>()
        })
        .sum()
}

fn assemble<F: Fn(usize, usize) -> f64>(mesh: &Mesh, entry: F) -> Result<SparseMatrix> {
    let cells = mesh.m + 1;
    let locals = 1usize << mesh.dim;
    let mut triplets = Vec::with_capacity(cells.pow(mesh.dim as u32) * locals * locals);
    let mut element = [0usize; 3];
    let cells_per_dim = |d: usize| if d < mesh.dim { cells } else { 1 };
    for ez in 0..cells_per_dim(2) {
        element[2] = ez;
        for ey in 0..cells_per_dim(1) {
            element[1] = ey;
            for ex in 0..cells_per_dim(0) {
                element[0] = ex;
                for a in 0..locals {
                    let ga = global_interior(mesh, element, a);
                    let Some(ia) = ga else { continue };
                    for b in 0..locals {
                        let Some(ib) = global_interior(mesh, element, b) else {
                            continue;
                        };
                        triplets.push((ia, ib, entry(a, b)));
                    }
                }
            }
        }
    }
    SparseMatrix::from_real_triplets(mesh.n, mesh.n, triplets)
}

/// Interior index of local corner `local` of element `element`, or None on
/// the Dirichlet boundary.
fn global_interior(mesh: &Mesh, element: [usize; 3], local: usize) -> Option<usize> {
    let c = corner(local);
    let mut interior = [0usize; 3];
    for d in 0..mesh.dim {
        let g = element[d] + c[d];
        if g == 0 || g == mesh.m + 1 {
            return None;
        }
        interior[d] = g - 1;
    }
    Some(mesh.index(interior))
}

/// Consistent mass matrix on interior nodes (SPD).
pub fn assemble_mass(mesh: &Mesh) -> Result<SparseMatrix> {
    assemble(mesh, |a, b| element_mass_entry(mesh.dim, mesh.h, a, b))
}

/// Stiffness matrix of the negative Laplacian on interior nodes (SPD after
/// Dirichlet elimination).
pub fn assemble_stiffness(mesh: &Mesh) -> Result<SparseMatrix> {
    assemble(mesh, |a, b| element_stiffness_entry(mesh.dim, mesh.h, a, b))
}

/// Target-state profile: (2x-1)^2 (2y-1)^2 [(2z-1)^2] inside (0, 1/2)^dim,
/// zero elsewhere.
pub fn desired_state_value(dim: usize, p: [f64; 3]) -> f64 {
    if p[..dim].iter().any(|&x| x >= 0.5) {
        return 0.0;
    }
    (0..dim).map(|d| (2.0 * p[d] - 1.0).powi(2)).product()
}

/// Nodal interpolant of the target state on the interior nodes.
pub fn desired_state(mesh: &Mesh) -> Vec<f64> {
    (0..mesh.n)
        .map(|i| desired_state_value(mesh.dim, mesh.position(i)))
        .collect()
}

/// A fully assembled model problem: matrices, parameters, and right-hand side.
#[derive(Clone)]
pub struct ProblemInstance {
    pub mesh: Mesh,
    pub nu: f64,
    pub omega: f64,
    pub mass: Arc<SparseMatrix>,
    pub stiffness: Arc<SparseMatrix>,
    /// Right-hand side [M yd; 0] of length 2n.
    pub rhs: Vec<C64>,
}

/// Assembles the time-periodic control problem for regularization `nu` and
/// frequency `omega`.
pub fn build_system(dim: usize, h: f64, nu: f64, omega: f64) -> Result<ProblemInstance> {
    let mesh = build_mesh(dim, h)?;
    let mass = Arc::new(assemble_mass(&mesh)?);
    let stiffness = Arc::new(assemble_stiffness(&mesh)?);
    ProblemInstance::from_parts(mesh, mass, stiffness, nu, omega)
}

impl ProblemInstance {
    /// Builds an instance from already-assembled matrices, so parameter
    /// sweeps over (nu, omega) share one assembly.
    pub fn from_parts(
        mesh: Mesh,
        mass: Arc<SparseMatrix>,
        stiffness: Arc<SparseMatrix>,
        nu: f64,
        omega: f64,
    ) -> Result<Self> {
        if nu.is_nan() || nu <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "regularization must be positive, got {nu}"
            )));
        }
        if omega.is_nan() || omega < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "frequency must be nonnegative, got {omega}"
            )));
        }
        if mass.nrows() != mesh.n || stiffness.nrows() != mesh.n {
            return Err(Error::DimensionMismatch(
                "matrices do not match the mesh".into(),
            ));
        }
        let yd = desired_state(&mesh);
        let myd = mass.apply_real(&yd)?;
        let mut rhs = vec![C64::new(0.0, 0.0); 2 * mesh.n];
        for (i, v) in myd.into_iter().enumerate() {
            rhs[i] = C64::new(v, 0.0);
        }
        Ok(ProblemInstance {
            mesh,
            nu,
            omega,
            mass,
            stiffness,
            rhs,
        })
    }

    pub fn n(&self) -> usize {
        self.mesh.n
    }

    /// F block: the mass matrix.
    pub fn f_comb(&self) -> MatComb {
        MatComb::zero(self.n())
            .term(C64::new(1.0, 0.0), self.mass.clone())
            .expect("mass matrix is square of order n")
    }

    /// G block: sqrt(nu) K + i sqrt(nu) omega M.
    pub fn g_comb(&self) -> MatComb {
        let s = self.nu.sqrt();
        MatComb::zero(self.n())
            .term(C64::new(s, 0.0), self.stiffness.clone())
            .expect("stiffness matrix is square of order n")
            .term(C64::new(0.0, s * self.omega), self.mass.clone())
            .expect("mass matrix is square of order n")
    }

    /// The system operator [[F, -G*], [G, F]] on C^{2n}.
    pub fn operator(&self) -> BlockOperator {
        let f = self.f_comb();
        let g = self.g_comb();
        BlockOperator::new([[f.clone(), g.adjoint().negated()], [g, f]])
            .expect("blocks share order n")
    }
}
