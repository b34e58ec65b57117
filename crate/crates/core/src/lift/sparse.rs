use std::collections::BTreeSet;

use crate::poly::{half_hull_lattice, Exponent, LatticeSet, SemialgebraicSet};

use super::dense::{build_index, linearize};
use super::{LinearPencil, Provenance, SdpRepresentation, Var, VariableIndex};

/// Disjoint variable blocks covering `{0, …, n-1}`, sorted by smallest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// One-based rendering such as `{{1,2},{3}}`.
    pub fn display(&self) -> String {
        let inner: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                let v: Vec<String> = b.iter().map(|i| (i + 1).to_string()).collect();
                format!("{{{}}}", v.join(","))
            })
            .collect();
        format!("{{{}}}", inner.join(","))
    }
}

/// One block of a sparse lift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseBlock {
    pub block: Vec<usize>,
    pub lattice: LatticeSet,
    /// Position of this block's pencil in the representation.
    pub pencil: usize,
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut c = i;
    while parent[c] != r {
        let next = parent[c];
        parent[c] = r;
        c = next;
    }
    r
}

/// Finest partition in which every monomial of every constraint lives in one block.
pub fn detect_partition(s: &SemialgebraicSet) -> Partition {
    let n = s.nvars();
    let mut parent: Vec<usize> = (0..n).collect();
    for g in s.constraints() {
        for alpha in g.terms().keys() {
            let vars: Vec<usize> = alpha.variables().collect();
            for w in vars.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(b) => blocks[b].push(i),
            None => {
                root_of[r] = Some(blocks.len());
                blocks.push(vec![i]);
            }
        }
    }
    Partition { blocks }
}

/// `{0} ∪ {e_j : j ∈ block} ∪` every constraint monomial supported in `block`.
///
/// This contains the support of the block part of `aᵀx - b - Σ λ_k g_k`
/// for every choice of `a`, `b` and `λ ≥ 0`.
pub fn block_generator_support(s: &SemialgebraicSet, block: &[usize]) -> LatticeSet {
    let n = s.nvars();
    let mut out = LatticeSet::new(n);
    out.insert(Exponent::zero(n));
    for &j in block {
        out.insert(Exponent::unit(n, j));
    }
    for g in s.constraints() {
        for alpha in g.terms().keys() {
            if alpha.supported_in(block) {
                out.insert(alpha.clone());
            }
        }
    }
    out
}

/// `F_i`: lattice points of the halved generator-support hull, together
/// with `0` and the unit exponents of the block.
pub fn block_lattice(s: &SemialgebraicSet, block: &[usize]) -> LatticeSet {
    let n = s.nvars();
    let mut f = half_hull_lattice(&block_generator_support(s, block));
    f.insert(Exponent::zero(n));
    for &j in block {
        f.insert(Exponent::unit(n, j));
    }
    f
}

/// `M_F(x, y)`: moment pencil whose rows are the points of `F` in graded-lex order.
pub fn sparse_moment_pencil(f: &LatticeSet, index: &VariableIndex) -> LinearPencil {
    LinearPencil::moment(f.to_vec(), index)
}

/// The structured lift: one pencil per variable block plus the linearized constraints.
pub fn build_sparse_lift(s: &SemialgebraicSet) -> SdpRepresentation {
    let index = build_index(s);
    let partition = detect_partition(s);
    let mut pencils = Vec::with_capacity(partition.len());
    let mut blocks = Vec::with_capacity(partition.len());
    for block in &partition.blocks {
        let lattice = block_lattice(s, block);
        pencils.push(sparse_moment_pencil(&lattice, &index));
        blocks.push(SparseBlock {
            block: block.clone(),
            lattice,
            pencil: blocks.len(),
        });
    }
    let linear_ineqs = s
        .constraints()
        .iter()
        .map(|g| linearize(g, &index).expect("index covers the set's degree"))
        .collect();
    SdpRepresentation {
        nvars: s.nvars(),
        names: s.names().to_vec(),
        degree_bound: index.degree_bound(),
        aux: index.aux_table(),
        pencils,
        linear_ineqs,
        provenance: Provenance::Sparse,
        blocks,
    }
}

impl SdpRepresentation {
    /// Auxiliary slots used by one block's pencil.
    pub fn block_aux(&self, block: &SparseBlock) -> Vec<usize> {
        let set: BTreeSet<usize> = self.pencils[block.pencil]
            .vars()
            .filter_map(|v| match v {
                Var::Y(k) => Some(k),
                _ => None,
            })
            .collect();
        set.into_iter().collect()
    }
}
