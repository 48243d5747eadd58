//! Eigenvalues and eigenvectors of real symmetric tridiagonal matrices.
//!
//! Full spectra use the implicit-shift QL iteration; individual eigenvalues
//! come from bisection on the Sturm sequence count, which only needs O(n)
//! work per probe.

use crate::error::{Error, Result};
use crate::model::TridiagonalHamiltonian;

const QL_MAX_ITER: usize = 60;

/// All eigenvalues, ascending.
pub fn eigenvalues_tridiagonal(h: &TridiagonalHamiltonian) -> Result<Vec<f64>> {
    let mut d = h.diag.clone();
    ql_implicit(&mut d, &h.offdiag, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalues (unordered) and orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalEigen {
    pub values: Vec<f64>,
    /// Eigenvector `k` occupies `vectors[k*n .. (k+1)*n]`.
    pub vectors: Vec<f64>,
}

impl TridiagonalEigen {
    pub fn vector(&self, k: usize) -> &[f64] {
        let n = self.values.len();
        &self.vectors[k * n..(k + 1) * n]
    }
}

pub fn eigen_tridiagonal(h: &TridiagonalHamiltonian) -> Result<TridiagonalEigen> {
    let n = h.dim();
    let mut d = h.diag.clone();
    let mut z = vec![0.0; n * n];
    for k in 0..n {
        z[k * n + k] = 1.0;
    }
    ql_implicit(&mut d, &h.offdiag, Some(&mut z))?;
    Ok(TridiagonalEigen {
        values: d,
        vectors: z,
    })
}

/// Implicit-shift QL on `(d, offdiag)`, overwriting `d` with the eigenvalues.
/// When `z` is given, its rows (stored contiguously) are rotated along, so an
/// identity input yields the eigenvectors.
fn ql_implicit(d: &mut [f64], offdiag: &[f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    let mut e = offdiag.to_vec();
    e.push(0.0);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITER {
                return Err(Error::NoConvergence {
                    what: "implicit QL",
                    iterations: QL_MAX_ITER,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let (head, tail) = z.split_at_mut((i + 1) * n);
                    let zi = &mut head[i * n..];
                    let zi1 = &mut tail[..n];
                    for k in 0..n {
                        let f = zi1[k];
                        zi1[k] = s * zi[k] + c * f;
                        zi[k] = c * zi[k] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn pivot_floor(h: &TridiagonalHamiltonian) -> f64 {
    let emax = h.offdiag.iter().fold(1.0f64, |m, e| m.max(e * e));
    f64::MIN_POSITIVE * emax
}

/// Number of eigenvalues strictly below `x` (Sturm sequence count).
pub fn sturm_count(h: &TridiagonalHamiltonian, x: f64) -> usize {
    let pivmin = pivot_floor(h);
    let mut count = 0;
    let mut q = h.diag[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..h.dim() {
        let e = h.offdiag[i - 1];
        q = h.diag[i] - x - e * e / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval containing the whole spectrum.
pub fn gershgorin_bounds(h: &TridiagonalHamiltonian) -> (f64, f64) {
    let n = h.dim();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut radius = 0.0;
        if i > 0 {
            radius += h.offdiag[i - 1].abs();
        }
        if i + 1 < n {
            radius += h.offdiag[i].abs();
        }
        lo = lo.min(h.diag[i] - radius);
        hi = hi.max(h.diag[i] + radius);
    }
    (lo, hi)
}

/// The `k`-th smallest eigenvalue (0-based) by bisection.
pub fn kth_eigenvalue(h: &TridiagonalHamiltonian, k: usize) -> Result<f64> {
    if k >= h.dim() {
        return Err(Error::IndexOutOfRange {
            index: k,
            max: h.dim() - 1,
        });
    }
    let (mut lo, mut hi) = gershgorin_bounds(h);
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    lo -= 2.0 * f64::EPSILON * span;
    hi += 2.0 * f64::EPSILON * span;
    let pivmin = pivot_floor(h);
    for _ in 0..4096 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + pivmin
        {
            return Ok(mid);
        }
        if sturm_count(h, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::NoConvergence {
        what: "Sturm bisection",
        iterations: 4096,
    })
}
