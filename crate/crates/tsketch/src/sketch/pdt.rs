//! Exact non-adaptive parity decision tree depth by exhaustive search.
//!
//! `f` has depth `k` iff it factors as `g(XOR_{S_1}, ..., XOR_{S_k})`, i.e.
//! iff `f` is constant on the cosets of `V-perp` for `V = span(S_1..S_k)`.
//! The search enumerates candidate perpendicular subspaces `W` of dimension
//! `n - k` through their reduced row echelon bases, so each subspace appears
//! exactly once. Promise functions only need coset consistency on promise
//! inputs.
//!
//! The subspace count is the Gaussian binomial sum (2825 for `n = 6`), so
//! arity is capped at 6.

use crate::boolfn::BooleanFunction;
use crate::{Error, Result};

const MAX_PDT_ARITY: u32 = 6;

/// Minimal number of parity queries of a non-adaptive parity decision tree
/// computing `f` (on its promise). Errors above arity 6.
pub fn pdt_min_depth(f: &BooleanFunction) -> Result<u32> {
    let n = f.n();
    if n > MAX_PDT_ARITY {
        return Err(Error::ResourceLimit(format!(
            "parity decision tree search enumerates all subspaces; arity {n} > {MAX_PDT_ARITY}"
        )));
    }
    for k in 0..n {
        let dim = n - k;
        let mut found = false;
        for_each_rref_basis(n, dim, &mut |basis| {
            if !found && cosets_consistent(f, basis) {
                found = true;
            }
        });
        if found {
            return Ok(k);
        }
    }
    // k = n always works: W = {0}, singleton cosets.
    Ok(n)
}

/// Whether every coset of `span(basis)` is constant on promise inputs.
fn cosets_consistent(f: &BooleanFunction, basis: &[u32]) -> bool {
    // Reduce x by the RREF basis to a canonical coset representative; all
    // promise inputs sharing a representative must agree.
    let size = f.domain_size();
    // 2 bits per input: seen flag + value.
    let mut seen = vec![false; size as usize];
    let mut value = vec![false; size as usize];
    for x in 0..size {
        if !f.in_promise(x) {
            continue;
        }
        let mut rep = x;
        for &w in basis {
            let lead = 31 - w.leading_zeros();
            if rep >> lead & 1 == 1 {
                rep ^= w;
            }
        }
        let r = rep as usize;
        if seen[r] {
            if value[r] != f.get(x) {
                return false;
            }
        } else {
            seen[r] = true;
            value[r] = f.get(x);
        }
    }
    true
}

/// Enumerates the RREF bases of all `dim`-dimensional subspaces of F2^n.
/// Basis rows are ordered by descending leading bit; each subspace is
/// produced exactly once.
fn for_each_rref_basis(n: u32, dim: u32, visit: &mut impl FnMut(&[u32])) {
    if dim == 0 {
        visit(&[]);
        return;
    }
    // Choose pivot columns as a bitmask with `dim` bits, then fill every
    // free cell (non-pivot column below a row's pivot, zero at other pivots).
    for pivots in 0u32..1 << n {
        if pivots.count_ones() != dim {
            continue;
        }
        let pivot_cols: Vec<u32> = (0..n).rev().filter(|c| pivots >> c & 1 == 1).collect();
        // Free cells for row i: columns c < pivot_i with c not a pivot.
        let mut free: Vec<Vec<u32>> = Vec::with_capacity(dim as usize);
        for &p in &pivot_cols {
            free.push((0..p).filter(|c| pivots >> c & 1 == 0).collect());
        }
        let total_free: u32 = free.iter().map(|f| f.len() as u32).sum();
        for assign in 0u64..1 << total_free {
            let mut basis = Vec::with_capacity(dim as usize);
            let mut bit = 0;
            for (i, &p) in pivot_cols.iter().enumerate() {
                let mut row = 1u32 << p;
                for &c in &free[i] {
                    if assign >> bit & 1 == 1 {
                        row |= 1 << c;
                    }
                    bit += 1;
                }
                basis.push(row);
            }
            visit(&basis);
        }
    }
}
