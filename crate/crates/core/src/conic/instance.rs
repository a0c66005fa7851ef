//! Cone program data: PSD blocks in svec coordinates, sparse equality
//! constraints, and a sparse linear objective.

use serde_json::json;

use crate::error::{Error, Result};
use crate::linops::{C64, CMat};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Length of the svec image of an `n × n` Hermitian matrix.
pub fn svec_len(n: usize) -> usize {
    n * n
}

/// Coordinate of the real (or imaginary) part of the off-diagonal pair
/// `(i, j)` with `i < j`, after the `n` diagonal coordinates.
fn pair_coord(n: usize, i: usize, j: usize, imag: bool) -> usize {
    debug_assert!(i < j && j < n);
    n + 2 * (i * n - i * (i + 1) / 2 + (j - i - 1)) + usize::from(imag)
}

/// Isometric real coordinates of a Hermitian matrix: the `n` diagonal
/// entries, then `√2·Re H_ij, √2·Im H_ij` for each pair `i < j`. Inner
/// products satisfy `⟨svec A, svec B⟩ = Tr AB`.
pub fn svec(h: &CMat) -> Vec<f64> {
    let n = h.nrows();
    let mut v = vec![0.0; svec_len(n)];
    for i in 0..n {
        v[i] = h[(i, i)].re;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let z = h[(i, j)];
            v[pair_coord(n, i, j, false)] = SQRT2 * z.re;
            v[pair_coord(n, i, j, true)] = SQRT2 * z.im;
        }
    }
    v
}

/// Inverse of [`svec`].
pub fn unsvec(v: &[f64], n: usize) -> CMat {
    debug_assert_eq!(v.len(), svec_len(n));
    let mut h = CMat::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = C64::new(v[i], 0.0);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let re = v[pair_coord(n, i, j, false)] / SQRT2;
            let im = v[pair_coord(n, i, j, true)] / SQRT2;
            h[(i, j)] = C64::new(re, im);
            h[(j, i)] = C64::new(re, -im);
        }
    }
    h
}

/// The partial transpose on `d_a ⊗ d_b` as a signed permutation of svec
/// coordinates: `svec(H^{T_B})[k] = sign[k] · svec(H)[perm[k]]`.
pub fn pt_svec_perm(da: usize, db: usize) -> (Vec<usize>, Vec<f64>) {
    let n = da * db;
    let len = svec_len(n);
    let mut perm = vec![0usize; len];
    let mut sign = vec![1.0f64; len];
    for (t, p) in perm.iter_mut().enumerate().take(n) {
        *p = t;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, al) = (i / db, i % db);
            let (b, be) = (j / db, j % db);
            // the (i, j) entry of H^{T_B} is the (u, v) entry of H
            let u = a * db + be;
            let v = b * db + al;
            let out_re = pair_coord(n, i, j, false);
            let out_im = pair_coord(n, i, j, true);
            if u < v {
                perm[out_re] = pair_coord(n, u, v, false);
                perm[out_im] = pair_coord(n, u, v, true);
            } else {
                perm[out_re] = pair_coord(n, v, u, false);
                perm[out_im] = pair_coord(n, v, u, true);
                sign[out_im] = -1.0;
            }
        }
    }
    (perm, sign)
}

/// Handle to a PSD block of an [`SdpInstance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockId(usize);

#[derive(Debug, Clone)]
struct Block {
    name: String,
    dim: usize,
    offset: usize,
}

#[derive(Debug, Clone)]
struct Constraint {
    terms: Vec<(usize, f64)>,
    rhs: f64,
}

/// A cone program `min c·x` s.t. `Ax = b`, `x ∈ K`, where `K` is a product
/// of Hermitian PSD cones (in svec coordinates) and a free scalar space.
#[derive(Debug, Clone, Default)]
pub struct SdpInstance {
    blocks: Vec<Block>,
    block_len: usize,
    free_scalars: usize,
    constraints: Vec<Constraint>,
    objective: Vec<(usize, f64)>,
}

impl SdpInstance {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declare a Hermitian PSD block. Panics if called after free scalars
    /// have been added (blocks occupy the leading coordinates).
    pub fn add_block(&mut self, name: &str, dim: usize) -> BlockId {
        assert!(dim > 0, "block dimension must be positive");
        assert_eq!(self.free_scalars, 0, "add blocks before free scalars");
        let id = BlockId(self.blocks.len());
        self.blocks.push(Block {
            name: name.to_string(),
            dim,
            offset: self.block_len,
        });
        self.block_len += svec_len(dim);
        id
    }

    /// Append `count` free scalar variables; returns the index of the first.
    pub fn add_free(&mut self, count: usize) -> usize {
        let base = self.block_len + self.free_scalars;
        self.free_scalars += count;
        base
    }

    pub fn n_vars(&self) -> usize {
        self.block_len + self.free_scalars
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn block_dim(&self, id: BlockId) -> usize {
        self.blocks[id.0].dim
    }

    /// Coordinate of svec entry `k` within a block.
    pub fn block_coord(&self, id: BlockId, k: usize) -> usize {
        let b = &self.blocks[id.0];
        assert!(k < svec_len(b.dim), "svec index {k} out of range for block {}", b.name);
        b.offset + k
    }

    /// Coordinate of the `i`-th diagonal entry of a block.
    pub fn diag_coord(&self, id: BlockId, i: usize) -> usize {
        let b = &self.blocks[id.0];
        assert!(i < b.dim);
        b.offset + i
    }

    fn check_terms(&self, terms: &[(usize, f64)]) -> Result<()> {
        for &(idx, coef) in terms {
            if idx >= self.n_vars() {
                return Err(Error::InvalidArgument(format!(
                    "variable index {idx} out of range ({} variables)",
                    self.n_vars()
                )));
            }
            if !coef.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite coefficient on variable {idx}"
                )));
            }
        }
        Ok(())
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, f64)>, rhs: f64) -> Result<()> {
        self.check_terms(&terms)?;
        if !rhs.is_finite() {
            return Err(Error::InvalidArgument("non-finite constraint rhs".into()));
        }
        self.constraints.push(Constraint { terms, rhs });
        Ok(())
    }

    pub fn set_objective(&mut self, terms: Vec<(usize, f64)>) -> Result<()> {
        self.check_terms(&terms)?;
        self.objective = terms;
        Ok(())
    }

    pub(crate) fn blocks_layout(&self) -> Vec<(usize, usize)> {
        self.blocks.iter().map(|b| (b.offset, b.dim)).collect()
    }

    pub(crate) fn constraint_rows(&self) -> impl Iterator<Item = (&[(usize, f64)], f64)> {
        self.constraints.iter().map(|c| (c.terms.as_slice(), c.rhs))
    }

    pub(crate) fn objective_terms(&self) -> &[(usize, f64)] {
        &self.objective
    }

    /// JSON description of the program (blocks, objective, constraints as
    /// sparse triplets) for external cross-checking.
    pub fn debug_json(&self) -> serde_json::Value {
        json!({
            "blocks": self.blocks.iter()
                .map(|b| json!({"name": b.name, "dim": b.dim, "offset": b.offset}))
                .collect::<Vec<_>>(),
            "free_scalars": self.free_scalars,
            "n_vars": self.n_vars(),
            "objective": self.objective.iter()
                .map(|&(i, c)| json!([i, c]))
                .collect::<Vec<_>>(),
            "constraints": self.constraints.iter()
                .map(|c| json!({
                    "terms": c.terms.iter().map(|&(i, v)| json!([i, v])).collect::<Vec<_>>(),
                    "rhs": c.rhs,
                }))
                .collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{CVec, Side, SubsystemDims, partial_transpose};
    use approx::assert_abs_diff_eq;

    fn test_hermitian(n: usize, phase: f64) -> CMat {
        let v = CVec::from_fn(n, |i, _| {
            C64::new((1.7 * i as f64 + phase).sin(), (0.6 * i as f64 - phase).cos())
        });
        let w = CVec::from_fn(n, |i, _| {
            C64::new((0.9 * i as f64 + 2.0 * phase).cos(), (1.3 * i as f64).sin())
        });
        (&v * v.adjoint()).scale(1.2) - (&w * w.adjoint()).scale(0.8)
    }

    #[test]
    fn svec_is_an_isometry() {
        let a = test_hermitian(5, 0.3);
        let b = test_hermitian(5, 1.4);
        let sa = svec(&a);
        let sb = svec(&b);
        let dot: f64 = sa.iter().zip(&sb).map(|(x, y)| x * y).sum();
        assert_abs_diff_eq!(dot, (&a * &b).trace().re, epsilon = 1e-12);
        let back = unsvec(&sa, 5);
        assert!((back - a).norm() < 1e-14);
    }

    #[test]
    fn pt_perm_matches_dense_partial_transpose() {
        for (da, db) in [(2, 2), (2, 3), (3, 3), (3, 2)] {
            let n = da * db;
            let h = test_hermitian(n, 0.2 + da as f64 + 0.1 * db as f64);
            let dims = SubsystemDims::bipartite(da, db);
            let dense = svec(&partial_transpose(&h, &dims, Side::B).unwrap());
            let (perm, sign) = pt_svec_perm(da, db);
            let sh = svec(&h);
            for k in 0..svec_len(n) {
                assert_abs_diff_eq!(dense[k], sign[k] * sh[perm[k]], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn instance_layout_and_validation() {
        let mut inst = SdpInstance::new();
        let p = inst.add_block("P", 2);
        let q = inst.add_block("Q", 3);
        assert_eq!(inst.block_coord(p, 0), 0);
        assert_eq!(inst.block_coord(q, 0), 4);
        assert_eq!(inst.n_vars(), 4 + 9);
        let f = inst.add_free(2);
        assert_eq!(f, 13);
        assert_eq!(inst.n_vars(), 15);
        assert!(inst.add_constraint(vec![(0, 1.0), (14, -1.0)], 0.5).is_ok());
        assert!(inst.add_constraint(vec![(15, 1.0)], 0.0).is_err());
        assert!(inst.add_constraint(vec![(0, f64::NAN)], 0.0).is_err());
        let doc = inst.debug_json();
        assert_eq!(doc["blocks"][1]["dim"], 3);
        assert_eq!(doc["constraints"][0]["rhs"], 0.5);
    }
}
