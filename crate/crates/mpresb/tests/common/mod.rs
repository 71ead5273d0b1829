//! Shared helpers for the integration suites: independently implemented
//! oracles (Gauss-quadrature element assembly, Kronecker-product assembly)
//! and a seeded random-vector source.
//!
//! The oracles deliberately avoid the library's own assembly path: the
//! quadrature oracle integrates shape-function products numerically, and
//! the Kronecker oracle builds the 2D/3D matrices from 1D tridiagonal
//! factors. Agreement with the library is then a real cross-check, not a
//! tautology.
//!
//! Each integration-test binary compiles this module separately and uses a
//! different subset of it, so unused-item lints are suppressed here.
#![allow(dead_code)]

use mpresb::{Complex64 as C64, DenseMatrix};
use rand::Rng;

/// Interior nodes per axis for mesh width h.
pub fn nodes_per_axis(h: f64) -> usize {
    (1.0 / h).round() as usize - 1
}

/// Uniformly random complex vector with entries in [-0.5, 0.5]^2.
pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
        .collect()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn diff_norm(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Dense n x n mass or stiffness matrix over the interior nodes of the
/// unit square/cube, assembled with per-element 2-point Gauss-Legendre
/// quadrature of the bilinear shape functions.
///
/// Everything here is recomputed from scratch: local coordinates, shape
/// values at quadrature nodes, the element loop, and the interior-node
/// numbering (x fastest).
pub fn quadrature_matrix(dim: usize, h: f64, stiffness: bool) -> DenseMatrix {
    // Element [0,h]^dim; per-axis shape functions n0(t) = 1 - t/h and
    // n1(t) = t/h; 2-point Gauss nodes are exact for the quadratic
    // integrands of both matrices.
    let g = 1.0 / 3f64.sqrt();
    let qnodes = [h * (1.0 - g) / 2.0, h * (1.0 + g) / 2.0];
    let qweight = h / 2.0;
    let shape = |corner: usize, t: f64| -> f64 {
        if corner == 0 {
            1.0 - t / h
        } else {
            t / h
        }
    };
    let dshape = |corner: usize| -> f64 {
        if corner == 0 {
            -1.0 / h
        } else {
            1.0 / h
        }
    };

    let m = nodes_per_axis(h);
    let n = m.pow(dim as u32);
    let cells = m + 1;
    let corners = 1usize << dim;
    let mut out = DenseMatrix::zeros(n, n);

    // Local element matrix by brute-force quadrature.
    let mut local = vec![vec![0.0f64; corners]; corners];
    for (a, row) in local.iter_mut().enumerate() {
        for (b, entry) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            // All quadrature points of the tensor rule.
            for q in 0..(2usize.pow(dim as u32)) {
                let mut weight = 1.0;
                let mut point = [0.0f64; 3];
                for (axis, p) in point.iter_mut().enumerate().take(dim) {
                    *p = qnodes[(q >> axis) & 1];
                    weight *= qweight;
                }
                let value = if stiffness {
                    // Sum over axes of d(Na)/dx_k * d(Nb)/dx_k.
                    let mut grad = 0.0;
                    for k in 0..dim {
                        let mut term = 1.0;
                        for (axis, p) in point.iter().enumerate().take(dim) {
                            let ca = (a >> axis) & 1;
                            let cb = (b >> axis) & 1;
                            term *= if axis == k {
                                dshape(ca) * dshape(cb)
                            } else {
                                shape(ca, *p) * shape(cb, *p)
                            };
                        }
                        grad += term;
                    }
                    grad
                } else {
                    let mut prod = 1.0;
                    for (axis, p) in point.iter().enumerate().take(dim) {
                        prod *= shape((a >> axis) & 1, *p) * shape((b >> axis) & 1, *p);
                    }
                    prod
                };
                acc += weight * value;
            }
            *entry = acc;
        }
    }

    // Element loop with boundary elimination: a corner's global index per
    // axis is cell + corner_bit, interior iff 1..=m, renumbered to 0..m.
    let global = |cell: &[usize], corner: usize| -> Option<usize> {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for (axis, &c) in cell.iter().enumerate() {
            let coord = c + ((corner >> axis) & 1);
            if coord == 0 || coord > m {
                return None;
            }
            idx += (coord - 1) * stride;
            stride *= m;
        }
        Some(idx)
    };
    let mut cell = [0usize; 3];
    let total_cells = cells.pow(dim as u32);
    for flat in 0..total_cells {
        let mut rest = flat;
        for c in cell.iter_mut().take(dim) {
            *c = rest % cells;
            rest /= cells;
        }
        for (a, row) in local.iter().enumerate() {
            let Some(i) = global(&cell[..dim], a) else {
                continue;
            };
            for (b, v) in row.iter().enumerate() {
                let Some(j) = global(&cell[..dim], b) else {
                    continue;
                };
                out[(i, j)] += C64::new(*v, 0.0);
            }
        }
    }
    out
}

/// Dense 1D interior mass matrix (h/6) tridiag(1, 4, 1).
pub fn mass_1d_dense(h: f64) -> DenseMatrix {
    let m = nodes_per_axis(h);
    DenseMatrix::from_fn(m, m, |i, j| {
        let v = if i == j {
            4.0 * h / 6.0
        } else if i.abs_diff(j) == 1 {
            h / 6.0
        } else {
            0.0
        };
        C64::new(v, 0.0)
    })
}

/// Dense 1D interior stiffness matrix (1/h) tridiag(-1, 2, -1).
pub fn stiffness_1d_dense(h: f64) -> DenseMatrix {
    let m = nodes_per_axis(h);
    DenseMatrix::from_fn(m, m, |i, j| {
        let v = if i == j {
            2.0 / h
        } else if i.abs_diff(j) == 1 {
            -1.0 / h
        } else {
            0.0
        };
        C64::new(v, 0.0)
    })
}

/// Kronecker-style product over `dim` axis factors, matching the x-fastest
/// interior numbering: entry(i, j) = prod_axis factor[axis][(i_axis, j_axis)].
pub fn separable_product(factors: &[&DenseMatrix]) -> DenseMatrix {
    let m = factors[0].nrows();
    let dim = factors.len();
    let n = m.pow(dim as u32);
    DenseMatrix::from_fn(n, n, |i, j| {
        let (mut i, mut j) = (i, j);
        let mut prod = C64::new(1.0, 0.0);
        for f in factors {
            prod *= f[(i % m, j % m)];
            i /= m;
            j /= m;
        }
        prod
    })
}

/// Tensor-assembled mass matrix: the `dim`-fold separable product of the 1D
/// mass matrix.
pub fn kron_mass(dim: usize, h: f64) -> DenseMatrix {
    let m1 = mass_1d_dense(h);
    let factors: Vec<&DenseMatrix> = (0..dim).map(|_| &m1).collect();
    separable_product(&factors)
}

/// Tensor-assembled stiffness matrix: sum over axes of the separable
/// product with the 1D stiffness factor on that axis and mass elsewhere.
pub fn kron_stiffness(dim: usize, h: f64) -> DenseMatrix {
    let m1 = mass_1d_dense(h);
    let k1 = stiffness_1d_dense(h);
    let n = m1.nrows().pow(dim as u32);
    let mut out = DenseMatrix::zeros(n, n);
    for axis in 0..dim {
        let factors: Vec<&DenseMatrix> = (0..dim)
            .map(|a| if a == axis { &k1 } else { &m1 })
            .collect();
        out.add_scaled(C64::new(1.0, 0.0), &separable_product(&factors))
            .expect("separable products share the full dimension");
    }
    out
}
