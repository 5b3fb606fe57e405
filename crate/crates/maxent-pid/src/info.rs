//! Shannon information measures in bits over variable subsets of a joint
//! distribution. All quantities use the convention 0 log 0 = 0.

use crate::dist::{JointDistribution, Marginal};
use crate::Result;

const LN2: f64 = std::f64::consts::LN_2;

/// Entropy of a marginal table, in bits.
pub fn entropy_of(m: &Marginal) -> f64 {
    -m.probs().filter(|&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>() / LN2
}

/// `H(vars)` in bits.
pub fn entropy(d: &JointDistribution, vars: &[usize]) -> Result<f64> {
    Ok(entropy_of(&d.marginal(vars)?))
}

/// `H(vars | given)` in bits.
pub fn conditional_entropy(d: &JointDistribution, vars: &[usize], given: &[usize]) -> Result<f64> {
    let joint = union(vars, given);
    Ok(entropy(d, &joint)? - entropy(d, given)?)
}

/// `I(a ; b)` in bits. Non-negative up to rounding.
pub fn mutual_information(d: &JointDistribution, a: &[usize], b: &[usize]) -> Result<f64> {
    Ok(entropy(d, a)? + entropy(d, b)? - entropy(d, &union(a, b))?)
}

/// Co-information `I(a ; b) - I(a ; b | c)` in bits; may be negative.
pub fn co_information(d: &JointDistribution, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
    let h = |vars: &[usize]| entropy(d, vars);
    Ok(h(a)? + h(b)? + h(c)? - h(&union(a, b))? - h(&union(a, c))? - h(&union(b, c))?
        + h(&union(&union(a, b), c))?)
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}
