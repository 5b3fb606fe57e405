//! Discrete joint distributions over a target and up to three sources.
//!
//! Distributions are immutable after construction. Symbols are opaque
//! labels (integers, strings, or tuples for composite sources) that are
//! canonicalized to dense 0-based codes internally; a label table maps
//! codes back to the original symbols. Variable index 0 is always the
//! target, indices `1..=arity` are the sources.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Mass below this threshold is pruned after normalization so that the
/// solver's log terms stay well conditioned.
pub const MASS_PRUNE_EPS: f64 = 1e-14;

/// An opaque, hashable symbol label. Composite sources carry tuples.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Int(i64),
    Str(String),
    Tuple(Vec<Symbol>),
}

impl Symbol {
    /// Parse a whitespace-free token: `(a,b)` nests, integers become
    /// `Int`, anything else is kept as an opaque string.
    pub fn parse(token: &str) -> Result<Symbol> {
        let token = token.trim();
        if token.is_empty() {
            return Err(Error::Parse("empty symbol token".into()));
        }
        if token.starts_with('(') {
            if !token.ends_with(')') {
                return Err(Error::Parse(format!("unbalanced parentheses in '{token}'")));
            }
            let inner = &token[1..token.len() - 1];
            let parts = split_top_level(inner, ',');
            let members = parts
                .iter()
                .map(|p| Symbol::parse(p))
                .collect::<Result<Vec<_>>>()?;
            return Ok(Symbol::Tuple(members));
        }
        match token.parse::<i64>() {
            Ok(i) => Ok(Symbol::Int(i)),
            Err(_) => Ok(Symbol::Str(token.to_string())),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Int(i) => write!(f, "{i}"),
            Symbol::Str(s) => write!(f, "{s}"),
            Symbol::Tuple(members) => {
                write!(f, "(")?;
                for (k, m) in members.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{m}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Split on `sep` at parenthesis depth zero.
fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

/// A sparse joint probability mass function over `(T, X1, .., X_arity)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    arity: usize,
    /// `labels[v][code]` is the original symbol for variable `v`.
    labels: Vec<Vec<Symbol>>,
    /// Support atoms as dense code tuples, sorted, with positive mass.
    atoms: Vec<(Vec<u32>, f64)>,
}

impl JointDistribution {
    /// Build a normalized distribution from `(tuple, probability)` pairs.
    ///
    /// Zero-mass entries are dropped, the total is normalized to one and
    /// atoms below [`MASS_PRUNE_EPS`] are pruned.
    pub fn from_pairs(entries: &[(Vec<Symbol>, f64)]) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n_vars = entries[0].0.len();
        if !(2..=4).contains(&n_vars) {
            return Err(Error::UnsupportedArity(n_vars.saturating_sub(1)));
        }
        let mut map: BTreeMap<Vec<Symbol>, f64> = BTreeMap::new();
        for (tuple, p) in entries {
            if tuple.len() != n_vars {
                return Err(Error::ArityMismatch {
                    expected: n_vars - 1,
                    got: tuple.len() - 1,
                });
            }
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::NegativeMass(tuple_string(tuple)));
            }
            if map.insert(tuple.clone(), *p).is_some() {
                return Err(Error::DuplicateTuple(tuple_string(tuple)));
            }
        }
        let total: f64 = map.values().sum();
        if total <= 0.0 {
            return Err(Error::MassNotNormalizable);
        }
        map.retain(|_, p| {
            *p /= total;
            *p >= MASS_PRUNE_EPS
        });
        let total: f64 = map.values().sum();
        for p in map.values_mut() {
            *p /= total;
        }
        Ok(Self::build(n_vars - 1, map))
    }

    /// Canonicalize an already-normalized symbol map without touching mass.
    fn build(arity: usize, map: BTreeMap<Vec<Symbol>, f64>) -> Self {
        let n_vars = arity + 1;
        let mut seen: Vec<BTreeSet<Symbol>> = vec![BTreeSet::new(); n_vars];
        for tuple in map.keys() {
            for (v, s) in tuple.iter().enumerate() {
                seen[v].insert(s.clone());
            }
        }
        let labels: Vec<Vec<Symbol>> = seen.into_iter().map(|s| s.into_iter().collect()).collect();
        let code = |v: usize, s: &Symbol| labels[v].binary_search(s).expect("label present") as u32;
        let mut atoms: Vec<(Vec<u32>, f64)> = map
            .iter()
            .map(|(tuple, p)| {
                let codes = tuple.iter().enumerate().map(|(v, s)| code(v, s)).collect();
                (codes, *p)
            })
            .collect();
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        Self { arity, labels, atoms }
    }

    /// Rebuild from coded atoms that refer to this distribution's label
    /// tables (used to materialize solver optimizers).
    pub(crate) fn with_coded(&self, coded: &[(Vec<u32>, f64)]) -> Self {
        let mut map = BTreeMap::new();
        for (codes, p) in coded {
            if *p <= 0.0 {
                continue;
            }
            let tuple: Vec<Symbol> = codes
                .iter()
                .enumerate()
                .map(|(v, &c)| self.labels[v][c as usize].clone())
                .collect();
            *map.entry(tuple).or_insert(0.0) += *p;
        }
        Self::build(self.arity, map)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn n_vars(&self) -> usize {
        self.arity + 1
    }

    pub fn alphabet_sizes(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.len()).collect()
    }

    pub fn label(&self, var: usize, code: u32) -> &Symbol {
        &self.labels[var][code as usize]
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.atoms.iter().map(|(c, p)| (c.as_slice(), *p))
    }

    pub fn support_len(&self) -> usize {
        self.atoms.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, p)| *p).sum()
    }

    /// Probability of a full coded tuple (zero off support).
    pub fn prob(&self, codes: &[u32]) -> f64 {
        self.atoms
            .binary_search_by(|(c, _)| c.as_slice().cmp(codes))
            .map(|i| self.atoms[i].1)
            .unwrap_or(0.0)
    }

    /// Probability of a full symbol tuple.
    pub fn prob_of(&self, tuple: &[Symbol]) -> f64 {
        let mut codes = Vec::with_capacity(tuple.len());
        for (v, s) in tuple.iter().enumerate() {
            match self.labels[v].binary_search(s) {
                Ok(c) => codes.push(c as u32),
                Err(_) => return 0.0,
            }
        }
        self.prob(&codes)
    }

    /// Marginal over a subset of variable indices (summing out is exact).
    pub fn marginal(&self, vars: &[usize]) -> Result<Marginal> {
        let vars = checked_vars(vars, self.n_vars())?;
        let mut map: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (codes, p) in &self.atoms {
            let key: Vec<u32> = vars.iter().map(|&v| codes[v]).collect();
            *map.entry(key).or_insert(0.0) += *p;
        }
        let labels = vars.iter().map(|&v| self.labels[v].clone()).collect();
        Ok(Marginal { vars, labels, map })
    }

    /// Regroup sources into 1-3 composite parts. Parts may reuse variables
    /// (needed for overlapping-pair subsystems) but no part may repeat.
    /// Singleton parts keep their original symbols; larger parts become
    /// tuples ordered by source index. Mass is preserved exactly.
    pub fn group_sources(&self, partition: &[Vec<usize>]) -> Result<JointDistribution> {
        if partition.is_empty() || partition.len() > 3 {
            return Err(Error::UnsupportedArity(partition.len()));
        }
        let mut canon_parts: Vec<Vec<usize>> = Vec::new();
        for part in partition {
            if part.is_empty() {
                return Err(Error::EmptyPart);
            }
            let mut p = part.clone();
            p.sort_unstable();
            p.dedup();
            if p.len() != part.len() {
                return Err(Error::OverlappingParts);
            }
            for &v in &p {
                if v == 0 || v > self.arity {
                    return Err(Error::BadIndex(v));
                }
            }
            if canon_parts.contains(&p) {
                return Err(Error::OverlappingParts);
            }
            canon_parts.push(p);
        }
        let mut map: BTreeMap<Vec<Symbol>, f64> = BTreeMap::new();
        for (codes, p) in &self.atoms {
            let mut tuple = Vec::with_capacity(canon_parts.len() + 1);
            tuple.push(self.labels[0][codes[0] as usize].clone());
            for part in &canon_parts {
                if part.len() == 1 {
                    tuple.push(self.labels[part[0]][codes[part[0]] as usize].clone());
                } else {
                    let members = part
                        .iter()
                        .map(|&v| self.labels[v][codes[v] as usize].clone())
                        .collect();
                    tuple.push(Symbol::Tuple(members));
                }
            }
            *map.entry(tuple).or_insert(0.0) += *p;
        }
        Ok(Self::build(canon_parts.len(), map))
    }

    /// One `t x.. p` line per atom.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (codes, p) in &self.atoms {
            for (v, &c) in codes.iter().enumerate() {
                if v > 0 {
                    out.push('\t');
                }
                out.push_str(&self.labels[v][c as usize].to_string());
            }
            out.push_str(&format!("\t{p}\n"));
        }
        out
    }

    /// JSON object mapping `"t,x,y,z"` strings to probabilities.
    pub fn to_json_string(&self) -> String {
        let mut obj = serde_json::Map::new();
        for (codes, p) in &self.atoms {
            let key = codes
                .iter()
                .enumerate()
                .map(|(v, &c)| self.labels[v][c as usize].to_string())
                .collect::<Vec<_>>()
                .join(",");
            obj.insert(key, serde_json::json!(p));
        }
        serde_json::Value::Object(obj).to_string()
    }

    /// Parse the TSV format (`#` starts a comment line).
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() < 3 {
                return Err(Error::Parse(format!(
                    "line {}: expected 'target sources.. probability'",
                    lineno + 1
                )));
            }
            let (sym_toks, p_tok) = tokens.split_at(tokens.len() - 1);
            let tuple = sym_toks
                .iter()
                .map(|t| Symbol::parse(t))
                .collect::<Result<Vec<_>>>()?;
            let p: f64 = p_tok[0]
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad probability '{}'", lineno + 1, p_tok[0])))?;
            entries.push((tuple, p));
        }
        Self::from_pairs(&entries)
    }

    /// Parse the JSON object format.
    pub fn parse_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse("expected a JSON object".into()))?;
        let mut entries = Vec::new();
        for (key, v) in obj {
            let tuple = split_top_level(key, ',')
                .iter()
                .map(|t| Symbol::parse(t))
                .collect::<Result<Vec<_>>>()?;
            let p = v
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("non-numeric probability for '{key}'")))?;
            entries.push((tuple, p));
        }
        Self::from_pairs(&entries)
    }
}

fn tuple_string(tuple: &[Symbol]) -> String {
    let inner = tuple.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
    format!("({inner})")
}

fn checked_vars(vars: &[usize], n_vars: usize) -> Result<Vec<usize>> {
    if vars.is_empty() {
        return Err(Error::BadIndex(usize::MAX));
    }
    let mut v: Vec<usize> = vars.to_vec();
    v.sort_unstable();
    v.dedup();
    for &i in &v {
        if i >= n_vars {
            return Err(Error::BadIndex(i));
        }
    }
    Ok(v)
}

/// A marginal table over a variable subset; sums to the parent's mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    vars: Vec<usize>,
    labels: Vec<Vec<Symbol>>,
    map: BTreeMap<Vec<u32>, f64>,
}

impl Marginal {
    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.map.iter().map(|(k, p)| (k.as_slice(), *p))
    }

    pub fn probs(&self) -> impl Iterator<Item = f64> + '_ {
        self.map.values().copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn prob(&self, codes: &[u32]) -> f64 {
        self.map.get(codes).copied().unwrap_or(0.0)
    }

    pub fn prob_of(&self, tuple: &[Symbol]) -> f64 {
        let mut codes = Vec::with_capacity(tuple.len());
        for (k, s) in tuple.iter().enumerate() {
            match self.labels[k].binary_search(s) {
                Ok(c) => codes.push(c as u32),
                Err(_) => return 0.0,
            }
        }
        self.prob(&codes)
    }

    pub fn contains(&self, codes: &[u32]) -> bool {
        self.map.contains_key(codes)
    }

    pub fn total(&self) -> f64 {
        self.map.values().sum()
    }
}

/// Fixed-marginal equality constraints extracted from a reference
/// distribution: each group of source indices is pinned jointly with the
/// target.
#[derive(Debug, Clone)]
pub struct MarginalSpec {
    groups: Vec<Vec<usize>>,
    tables: Vec<Marginal>,
}

impl MarginalSpec {
    /// Pin each listed source group (jointly with the target) to the
    /// reference distribution's marginal.
    pub fn from_dist(dist: &JointDistribution, groups: &[Vec<usize>]) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InfeasibleSpec);
        }
        let mut canon: Vec<Vec<usize>> = Vec::new();
        for g in groups {
            if g.is_empty() {
                return Err(Error::EmptyPart);
            }
            let mut g = g.clone();
            g.sort_unstable();
            g.dedup();
            for &v in &g {
                if v == 0 || v > dist.arity() {
                    return Err(Error::BadIndex(v));
                }
            }
            if canon.contains(&g) {
                return Err(Error::OverlappingParts);
            }
            canon.push(g);
        }
        let tables = canon
            .iter()
            .map(|g| {
                let mut vars = vec![0usize];
                vars.extend_from_slice(g);
                dist.marginal(&vars)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { groups: canon, tables })
    }

    /// The standard polytope pins: every source singleton with the target.
    pub fn pairwise(dist: &JointDistribution) -> Result<Self> {
        let groups: Vec<Vec<usize>> = (1..=dist.arity()).map(|v| vec![v]).collect();
        Self::from_dist(dist, &groups)
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn table(&self, idx: usize) -> &Marginal {
        &self.tables[idx]
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// The paradigmatic gate families plus the scaling Copy gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    XorDuplicate,
    XorLoses,
    XorMultiCoal,
    AndDuplicate,
    Copy { l: usize, m: usize, n: usize },
}

impl Gate {
    pub fn parse(name: &str, sizes: Option<(usize, usize, usize)>) -> Result<Gate> {
        match name.to_ascii_lowercase().as_str() {
            "xor-duplicate" | "xorduplicate" => Ok(Gate::XorDuplicate),
            "xor-loses" | "xorloses" => Ok(Gate::XorLoses),
            "xor-multicoal" | "xormulticoal" => Ok(Gate::XorMultiCoal),
            "and-duplicate" | "andduplicate" => Ok(Gate::AndDuplicate),
            "copy" => {
                let (l, m, n) = sizes.unwrap_or((2, 2, 2));
                Ok(Gate::Copy { l, m, n })
            }
            other => Err(Error::UnknownGate(other.to_string())),
        }
    }
}

/// Generate a gate distribution.
pub fn gate(g: Gate) -> Result<JointDistribution> {
    let bit = |b: u8| Symbol::Int(b as i64);
    let mut entries: Vec<(Vec<Symbol>, f64)> = Vec::new();
    match g {
        Gate::XorDuplicate => {
            // t = x xor y, z = x; x, y i.i.d. fair
            for x in 0..2u8 {
                for y in 0..2u8 {
                    entries.push((vec![bit(x ^ y), bit(x), bit(y), bit(x)], 0.25));
                }
            }
        }
        Gate::XorLoses => {
            // t = x xor y, z = x xor y
            for x in 0..2u8 {
                for y in 0..2u8 {
                    entries.push((vec![bit(x ^ y), bit(x), bit(y), bit(x ^ y)], 0.25));
                }
            }
        }
        Gate::XorMultiCoal => {
            // t = u xor v xor w; x = (u,v), y = (u,w), z = (v,w)
            for u in 0..2u8 {
                for v in 0..2u8 {
                    for w in 0..2u8 {
                        let pair = |a: u8, b: u8| Symbol::Tuple(vec![bit(a), bit(b)]);
                        entries.push((
                            vec![bit(u ^ v ^ w), pair(u, v), pair(u, w), pair(v, w)],
                            0.125,
                        ));
                    }
                }
            }
        }
        Gate::AndDuplicate => {
            // t = x and y, z = x
            for x in 0..2u8 {
                for y in 0..2u8 {
                    entries.push((vec![bit(x & y), bit(x), bit(y), bit(x)], 0.25));
                }
            }
        }
        Gate::Copy { l, m, n } => {
            for &s in &[l, m, n] {
                if s < 2 {
                    return Err(Error::BadSize(s));
                }
            }
            let p = 1.0 / (l * m * n) as f64;
            for x in 0..l {
                for y in 0..m {
                    for z in 0..n {
                        let t = Symbol::Tuple(vec![
                            Symbol::Int(x as i64),
                            Symbol::Int(y as i64),
                            Symbol::Int(z as i64),
                        ]);
                        entries.push((
                            vec![t, Symbol::Int(x as i64), Symbol::Int(y as i64), Symbol::Int(z as i64)],
                            p,
                        ));
                    }
                }
            }
        }
    }
    JointDistribution::from_pairs(&entries)
}

/// Sample a joint distribution uniformly from the probability simplex over
/// the full product space (flat Dirichlet via Exp(1) normalization).
/// `sizes[0]` is the target alphabet size. Bit-reproducible by seed.
pub fn random_simplex(sizes: &[usize], seed: u64) -> Result<JointDistribution> {
    if sizes.len() < 2 || sizes.len() > 4 {
        return Err(Error::UnsupportedArity(sizes.len().saturating_sub(1)));
    }
    for &s in sizes {
        if s < 2 {
            return Err(Error::BadSize(s));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    let mut idx = vec![0usize; sizes.len()];
    loop {
        let tuple: Vec<Symbol> = idx.iter().map(|&i| Symbol::Int(i as i64)).collect();
        let u: f64 = rng.random();
        entries.push((tuple, -(1.0 - u).ln()));
        // odometer over the product space
        let mut k = sizes.len();
        loop {
            if k == 0 {
                return JointDistribution::from_pairs(&entries);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < sizes[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}
