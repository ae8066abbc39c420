//! Sub-lattices of `{Ω^n}` ordered by divisibility (`Ω^a ⊂ Ω^b` iff `a | b`).

use std::collections::BTreeSet;

use num_integer::Integer;

use crate::error::{OmegaError, Result};

/// Which operations the node set is closed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LatticeClosure {
    /// Closed under both lcm (sup) and gcd (inf): a genuine lattice.
    #[default]
    Full,
    /// Closed under lcm only: the upward sub-lattice generated by the mode
    /// dimensions (what a dimension-varying system actually visits).
    Join,
}

/// Node dimensions plus the covering relation of the divisibility order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspaceLattice {
    nodes: BTreeSet<usize>,
    edges: Vec<(usize, usize)>,
}

impl SubspaceLattice {
    pub fn nodes(&self) -> &BTreeSet<usize> {
        &self.nodes
    }

    /// Covering pairs `(a, b)`: `a | b`, `a ≠ b`, nothing strictly between.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn contains(&self, d: usize) -> bool {
        self.nodes.contains(&d)
    }

    /// Least upper bound: `lcm(a, b)`.
    pub fn sup(&self, a: usize, b: usize) -> usize {
        a.lcm(&b)
    }

    /// Greatest lower bound: `gcd(a, b)`.
    pub fn inf(&self, a: usize, b: usize) -> usize {
        a.gcd(&b)
    }

    /// Top element (lcm of all nodes).
    pub fn top(&self) -> usize {
        self.nodes.iter().fold(1, |acc, d| acc.lcm(d))
    }
}

/// Smallest superset of `dims` closed under the requested operations, with
/// its Hasse-diagram edges.
pub fn build_lattice(dims: &[usize], closure: LatticeClosure) -> Result<SubspaceLattice> {
    if dims.is_empty() {
        return Err(OmegaError::invalid("lattice needs at least one dimension"));
    }
    if dims.contains(&0) {
        return Err(OmegaError::invalid("dimensions must be positive"));
    }
    let mut nodes: BTreeSet<usize> = dims.iter().copied().collect();
    loop {
        let current: Vec<usize> = nodes.iter().copied().collect();
        let mut added = false;
        for (i, &a) in current.iter().enumerate() {
            for &b in &current[i + 1..] {
                added |= nodes.insert(a.lcm(&b));
                if closure == LatticeClosure::Full {
                    added |= nodes.insert(a.gcd(&b));
                }
            }
        }
        if !added {
            break;
        }
    }

    let list: Vec<usize> = nodes.iter().copied().collect();
    let mut edges = Vec::new();
    for &a in &list {
        for &b in &list {
            if a == b || b % a != 0 {
                continue;
            }
            let covered = list
                .iter()
                .any(|&c| c != a && c != b && c % a == 0 && b % c == 0);
            if !covered {
                edges.push((a, b));
            }
        }
    }
    Ok(SubspaceLattice { nodes, edges })
}
