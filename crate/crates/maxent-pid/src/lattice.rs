//! The redundancy lattice over source collections.
//!
//! A lattice element is an antichain of non-empty source subsets
//! (bitmasks over sources, bit `i` = source `i+1`). The partial order is
//! `alpha <= beta` iff every member of `beta` contains some member of
//! `alpha`; cumulative mutual-information expansions are sums of atom
//! values over down-sets.

use std::collections::BTreeMap;
use std::fmt;

use crate::{Error, Result};

const LETTERS: [char; 3] = ['X', 'Y', 'Z'];

/// An antichain of source subsets, canonically ordered by
/// (cardinality, mask).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Collection {
    arity: usize,
    members: Vec<u8>,
}

impl Collection {
    /// Build from subset bitmasks; supersets of other members are dropped
    /// so the result is always an antichain.
    pub fn from_masks(arity: usize, masks: &[u8]) -> Result<Self> {
        if !(2..=3).contains(&arity) {
            return Err(Error::UnsupportedArity(arity));
        }
        if masks.is_empty() {
            return Err(Error::EmptyPart);
        }
        let full: u8 = (1 << arity) - 1;
        for &m in masks {
            if m == 0 || m & !full != 0 {
                return Err(Error::BadIndex(m as usize));
            }
        }
        let mut members: Vec<u8> = masks
            .iter()
            .copied()
            .filter(|&m| !masks.iter().any(|&o| o != m && o & m == o))
            .collect();
        members.sort_by_key(|&m| (m.count_ones(), m));
        members.dedup();
        Ok(Self { arity, members })
    }

    /// Build from 1-based source index sets.
    pub fn from_sets(arity: usize, sets: &[&[usize]]) -> Result<Self> {
        let mut masks = Vec::with_capacity(sets.len());
        for set in sets {
            let mut m = 0u8;
            for &v in *set {
                if v == 0 || v > arity {
                    return Err(Error::BadIndex(v));
                }
                m |= 1 << (v - 1);
            }
            masks.push(m);
        }
        Self::from_masks(arity, &masks)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn members(&self) -> &[u8] {
        &self.members
    }

    /// `self <= other` in the redundancy order.
    pub fn leq(&self, other: &Collection) -> bool {
        other
            .members
            .iter()
            .all(|&b| self.members.iter().any(|&a| a | b == b))
    }

    /// Greatest lower bound: the minimized union of members.
    pub fn meet(&self, other: &Collection) -> Collection {
        let mut masks = self.members.clone();
        masks.extend_from_slice(&other.members);
        Collection::from_masks(self.arity, &masks).expect("meet of valid collections")
    }

    /// Least upper bound: minimized pairwise unions of members.
    pub fn join(&self, other: &Collection) -> Collection {
        let mut masks = Vec::new();
        for &a in &self.members {
            for &b in &other.members {
                masks.push(a | b);
            }
        }
        Collection::from_masks(self.arity, &masks).expect("join of valid collections")
    }
}

impl fmt::Display for Collection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, &m) in self.members.iter().enumerate() {
            if k > 0 {
                write!(f, ".")?;
            }
            for (i, &c) in LETTERS.iter().enumerate().take(self.arity) {
                if m & (1 << i) != 0 {
                    write!(f, "{c}")?;
                }
            }
        }
        Ok(())
    }
}

/// All lattice atoms for the given number of sources (4 for two sources,
/// 18 for three), in canonical order.
pub fn atoms(arity: usize) -> Result<Vec<Collection>> {
    if !(2..=3).contains(&arity) {
        return Err(Error::UnsupportedArity(arity));
    }
    let full: u8 = (1 << arity) - 1;
    let subsets: Vec<u8> = (1..=full).collect();
    let mut out = Vec::new();
    for pick in 1u32..(1 << subsets.len()) {
        let masks: Vec<u8> = subsets
            .iter()
            .enumerate()
            .filter(|(i, _)| pick & (1 << i) != 0)
            .map(|(_, &m)| m)
            .collect();
        // keep only genuine antichains (canonicalization would silently
        // collapse non-antichains onto already-listed elements)
        let is_antichain = masks
            .iter()
            .all(|&a| !masks.iter().any(|&b| b != a && b & a == b));
        if is_antichain {
            out.push(Collection::from_masks(arity, &masks)?);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// The atoms lying at or below `at` in the redundancy order.
pub fn down_set(arity: usize, at: &Collection) -> Result<Vec<Collection>> {
    Ok(atoms(arity)?.into_iter().filter(|a| a.leq(at)).collect())
}

/// Cumulative value at `at`: the sum of atom values over its down-set.
/// Every down-set member must be present in `values`.
pub fn accumulate(values: &BTreeMap<Collection, f64>, at: &Collection) -> Result<f64> {
    let mut sum = 0.0;
    for a in down_set(at.arity(), at)? {
        match values.get(&a) {
            Some(v) => sum += v,
            None => return Err(Error::MissingAtom(a.to_string())),
        }
    }
    Ok(sum)
}
