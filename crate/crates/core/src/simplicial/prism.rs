use alloc::collections::btree_map::{BTreeMap, Entry};
use alloc::vec::Vec;

use num_traits::Zero;

use super::{sort_sign, Cochain, SimplicialComplex};
use crate::{Error, Rational, Result};

/// Integer combination of ordered vertex tuples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FormalChain {
    terms: BTreeMap<Vec<usize>, i64>,
}

impl FormalChain {
    pub fn new() -> Self {
        FormalChain::default()
    }

    pub fn single(tuple: Vec<usize>) -> Self {
        let mut c = FormalChain::new();
        c.add(tuple, 1);
        c
    }

    pub fn add(&mut self, tuple: Vec<usize>, coeff: i64) {
        if coeff == 0 {
            return;
        }
        match self.terms.entry(tuple) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if *o.get() == 0 {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
        }
    }

    pub fn add_chain(&mut self, other: &FormalChain, coeff: i64) {
        for (t, c) in &other.terms {
            self.add(t.clone(), c * coeff);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], i64)> {
        self.terms.iter().map(|(t, c)| (t.as_slice(), *c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `∂(x₀…x_m) = Σ_i (−1)^i (x₀…x̂_i…x_m)`, extended linearly.
    pub fn boundary(&self) -> FormalChain {
        let mut out = FormalChain::new();
        for (t, c) in &self.terms {
            for i in 0..t.len() {
                let face = super::drop_vertex(t, i);
                if !face.is_empty() {
                    out.add(face, if i % 2 == 0 { *c } else { -c });
                }
            }
        }
        out
    }

    /// Image in oriented chains: degenerate tuples dropped, vertices sorted with sign.
    pub fn oriented(&self) -> FormalChain {
        let mut out = FormalChain::new();
        for (t, c) in &self.terms {
            if let Some(odd) = sort_sign(t) {
                let mut s = t.clone();
                s.sort_unstable();
                out.add(s, if odd { -c } else { *c });
            }
        }
        out
    }

    /// `Σ c·κ(tuple)`, or `None` if a nondegenerate tuple is not a simplex of `host`.
    pub fn evaluate(&self, host: &SimplicialComplex, kappa: &Cochain) -> Option<Rational> {
        let mut acc = Rational::zero();
        for (t, c) in &self.terms {
            if t.len() != kappa.degree() + 1 {
                return None;
            }
            let v = kappa.eval(host, t)?;
            acc += v * Rational::from_integer((*c).into());
        }
        Some(acc)
    }
}

/// `b(x₀…x_k; x′₀…x′_k) = Σ_i (−1)^i (x₀…x_i, x′_i…x′_k)`.
pub fn prism(delta: &[usize], delta_prime: &[usize]) -> Result<FormalChain> {
    if delta.len() != delta_prime.len() {
        return Err(Error::LengthMismatch(delta.len(), delta_prime.len()));
    }
    let mut out = FormalChain::new();
    for i in 0..delta.len() {
        let mut t = Vec::with_capacity(delta.len() + 1);
        t.extend_from_slice(&delta[..=i]);
        t.extend_from_slice(&delta_prime[i..]);
        out.add(t, if i % 2 == 0 { 1 } else { -1 });
    }
    Ok(out)
}
