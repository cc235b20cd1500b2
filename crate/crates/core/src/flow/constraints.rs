//! Constraint bookkeeping and the (possibly saddle-point) linear systems of
//! the flow.
//!
//! Dirichlet and pinned unknowns are eliminated. Crease continuity
//! `w₁(z) = w₂(z)` couples the two split-layout value copies of a crease node
//! through a Lagrange multiplier, giving
//!
//! ```text
//! [ J   Bᵀ ] [δ]   [−F]
//! [ B   0  ] [λ] = [ 0]
//! ```
//!
//! Multiplier rows are scaled by the local diagonal of `J` so that the
//! factorization sees pivots of comparable size; the returned multipliers are
//! unscaled.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Vec2;
use crate::mesh::Triangulation;
use crate::problem::{BoundaryCondition, ProblemSpec};
use crate::sparse::{nested_dissection, LdlSymbolic, Pattern, SymmetricMatrix};
use crate::{Error, Result};

const NONE: usize = usize::MAX;

/// Constraints on the split-layout deflection unknowns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintSet {
    /// `(dof, value)` from boundary conditions.
    pub dirichlet: Vec<(usize, f64)>,
    /// Unknowns fixed to zero by pinning.
    pub pinned: Vec<usize>,
    /// Value copies identified across the crease.
    pub crease_pairs: Vec<(usize, usize)>,
}

impl ConstraintSet {
    /// Builds the deflection constraints of `spec` on `mesh`.
    pub fn for_deflection(mesh: &Triangulation, spec: &ProblemSpec) -> Result<Self> {
        let n = mesh.num_nodes();
        let slots_of = |v: usize| -> Vec<usize> {
            let mut s = vec![v];
            let extra = mesh.grad_slot(v, 2);
            if extra != v {
                s.push(extra);
            }
            s
        };
        let mut set = ConstraintSet::default();
        match &spec.boundary {
            BoundaryCondition::None => {}
            BoundaryCondition::SimpleSupport { nodes, values } => {
                for (&v, &val) in nodes.iter().zip(values) {
                    for s in slots_of(v) {
                        set.dirichlet.push((3 * s, val));
                    }
                }
            }
            BoundaryCondition::Clamped { nodes, values, grads } => {
                for ((&v, &val), g) in nodes.iter().zip(values).zip(grads) {
                    for s in slots_of(v) {
                        set.dirichlet.push((3 * s, val));
                        set.dirichlet.push((3 * s + 1, g[0]));
                        set.dirichlet.push((3 * s + 2, g[1]));
                    }
                }
            }
        }
        if let Some(p) = spec.metric.pinned_node {
            for s in slots_of(p) {
                set.pinned.push(3 * s);
            }
        }
        let mut fixed = vec![false; 3 * mesh.num_grad_slots()];
        for &(d, _) in &set.dirichlet {
            fixed[d] = true;
        }
        for &d in &set.pinned {
            fixed[d] = true;
        }
        for (k, &v) in mesh.crease_polyline().iter().enumerate() {
            let (a, b) = (3 * v, 3 * (n + k));
            if !fixed[a] && !fixed[b] {
                set.crease_pairs.push((a, b));
            }
        }
        set.validate(3 * mesh.num_grad_slots())?;
        Ok(set)
    }

    /// Checks that every unknown has at most one role and that coupling rows
    /// are independent.
    pub fn validate(&self, ndofs: usize) -> Result<()> {
        let mut role = vec![0u8; ndofs];
        let mut claim = |d: usize, r: u8, what: &str| -> Result<()> {
            if d >= ndofs {
                return Err(Error::InvalidInput(format!("{what} refers to missing unknown {d}")));
            }
            if role[d] != 0 && role[d] != r {
                return Err(Error::InvalidInput(format!("unknown {d} has conflicting constraint roles")));
            }
            role[d] = r;
            Ok(())
        };
        let mut seen = Vec::new();
        for &(d, _) in &self.dirichlet {
            if seen.contains(&d) {
                continue;
            }
            seen.push(d);
            claim(d, 1, "boundary condition")?;
        }
        for &d in &self.pinned {
            claim(d, 2, "pinning")?;
        }
        let mut pairs: Vec<(usize, usize)> = self
            .crease_pairs
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        for &(a, b) in &pairs {
            if a == b {
                return Err(Error::RankDeficientConstraints(format!("unknown {a} coupled to itself")));
            }
            claim(a, 3, "crease coupling")?;
            claim(b, 3, "crease coupling")?;
        }
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::RankDeficientConstraints("duplicate crease coupling rows".into()));
        }
        Ok(())
    }

    pub fn fixed_mask(&self, ndofs: usize) -> Vec<bool> {
        let mut fixed = vec![false; ndofs];
        for &(d, _) in &self.dirichlet {
            fixed[d] = true;
        }
        for &d in &self.pinned {
            fixed[d] = true;
        }
        fixed
    }

    /// Writes the prescribed values into `x`.
    pub fn apply(&self, x: &mut [f64]) {
        for &(d, v) in &self.dirichlet {
            x[d] = v;
        }
        for &d in &self.pinned {
            x[d] = 0.0;
        }
    }
}

/// A symmetric system assembled from fixed-size element blocks, with fixed
/// unknowns eliminated and optional pairwise equality constraints.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    ndofs: usize,
    stride: usize,
    free_index: Vec<usize>,
    free: Vec<usize>,
    pairs: Vec<(usize, usize)>,
    elem_pos: Vec<usize>,
    pattern: Pattern,
    symbolic: LdlSymbolic,
}

impl SaddleSystem {
    /// `elem_dofs` lists `stride` global unknowns per element; `coords`
    /// locates each unknown for the fill-reducing ordering; `pairs` couples
    /// free unknowns by equality.
    pub fn new(
        ndofs: usize,
        stride: usize,
        elem_dofs: &[usize],
        fixed: &[bool],
        pairs: &[(usize, usize)],
        coords: &[Vec2],
    ) -> Result<Self> {
        assert_eq!(elem_dofs.len() % stride, 0);
        assert_eq!(fixed.len(), ndofs);
        let mut free_index = vec![NONE; ndofs];
        let mut free = Vec::new();
        for d in 0..ndofs {
            if !fixed[d] {
                free_index[d] = free.len();
                free.push(d);
            }
        }
        let nf = free.len();
        let mut local_pairs = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            let (fa, fb) = (free_index[a], free_index[b]);
            if fa == NONE || fb == NONE {
                return Err(Error::InvalidInput(format!("coupled unknowns {a}, {b} must be free")));
            }
            local_pairs.push((fa, fb));
        }
        let mut entries = Vec::new();
        for block in elem_dofs.chunks(stride) {
            for &a in block {
                for &b in block {
                    let (fa, fb) = (free_index[a], free_index[b]);
                    if fa != NONE && fb != NONE && fa <= fb {
                        entries.push((fa, fb));
                    }
                }
            }
        }
        for (k, &(a, b)) in local_pairs.iter().enumerate() {
            entries.push((a, nf + k));
            entries.push((b, nf + k));
        }
        let dim = nf + local_pairs.len();
        let pattern = Pattern::symmetric(dim, entries);
        let mut elem_pos = Vec::with_capacity(elem_dofs.len() * stride);
        for block in elem_dofs.chunks(stride) {
            for &a in block {
                for &b in block {
                    let (fa, fb) = (free_index[a], free_index[b]);
                    elem_pos.push(if fa != NONE && fb != NONE {
                        pattern.position(fa, fb).expect("pattern contains element entries")
                    } else {
                        NONE
                    });
                }
            }
        }
        let mut c: Vec<Vec2> = free.iter().map(|&d| coords[d]).collect();
        for &(a, _) in &local_pairs {
            c.push(c[a]);
        }
        let tail: Vec<usize> = (nf..dim).collect();
        let perm = nested_dissection(&pattern, &c, &tail);
        let symbolic = LdlSymbolic::new(&pattern, perm);
        Ok(SaddleSystem {
            ndofs,
            stride,
            free_index,
            free,
            pairs: local_pairs,
            elem_pos,
            pattern,
            symbolic,
        })
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.pairs.len()
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    /// Zero matrix over free unknowns and multipliers.
    pub fn new_matrix(&self) -> SymmetricMatrix<'_> {
        SymmetricMatrix::zeros(&self.pattern)
    }

    /// Adds the row-major `stride × stride` block of element `e`, dropping
    /// rows and columns of fixed unknowns.
    pub fn add_element(&self, m: &mut SymmetricMatrix<'_>, e: usize, block: &[f64]) {
        let s2 = self.stride * self.stride;
        let pos = &self.elem_pos[e * s2..(e + 1) * s2];
        for (k, &p) in pos.iter().enumerate() {
            if p != NONE {
                m.values[p] += block[k];
            }
        }
    }

    /// Solves `J δ + Bᵀλ = rhs` on free unknowns with `B δ = 0`; returns `δ`
    /// in the global layout (zero on fixed unknowns) and the multipliers.
    pub fn solve(&self, m: &mut SymmetricMatrix<'_>, rhs: &[f64], context: &'static str) -> Result<(Vec<f64>, Vec<f64>)> {
        assert_eq!(rhs.len(), self.ndofs);
        let nf = self.free.len();
        let mut scale = vec![0.0; self.pairs.len()];
        for (k, &(a, b)) in self.pairs.iter().enumerate() {
            let s = 0.5 * (m.get(a, a).abs() + m.get(b, b).abs());
            scale[k] = if s > 0.0 { s } else { 1.0 };
            let row = nf + k;
            for (i, sign) in [(a, 1.0), (b, -1.0)] {
                let p = self.pattern.position(i, row).expect("multiplier entry");
                let q = self.pattern.position(row, i).expect("multiplier entry");
                m.values[p] = sign * scale[k];
                m.values[q] = sign * scale[k];
            }
        }
        let ldl = self.symbolic.factor(m, 1e-13, context)?;
        let mut b = vec![0.0; nf + self.pairs.len()];
        for (i, &d) in self.free.iter().enumerate() {
            b[i] = rhs[d];
        }
        let sol = ldl.solve(&b);
        let mut delta = vec![0.0; self.ndofs];
        for (i, &d) in self.free.iter().enumerate() {
            delta[d] = sol[i];
        }
        let lambda = (0..self.pairs.len()).map(|k| sol[nf + k] * scale[k]).collect();
        Ok((delta, lambda))
    }

    /// Whether global unknown `d` is free.
    pub fn is_free(&self, d: usize) -> bool {
        self.free_index[d] != NONE
    }
}
