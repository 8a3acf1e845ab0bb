use alloc::vec::Vec;

use num_traits::Zero;

use super::{sort_sign, Cochain, SimplicialComplex};
use crate::rational::int;
use crate::{Error, Rational, Result};

fn check_pair(host: &SimplicialComplex, kappa: &Cochain, lambda: &Cochain) -> Result<usize> {
    kappa.check_host(host)?;
    lambda.check_host(host)?;
    Ok(kappa.degree() + lambda.degree())
}

/// Alexander–Whitney product on canonical orderings:
/// `(κ⌣λ)(v₀…v_n) = κ(v₀…v_h)·λ(v_h…v_n)`.
pub fn cup_aw(host: &SimplicialComplex, kappa: &Cochain, lambda: &Cochain) -> Result<Cochain> {
    let n = check_pair(host, kappa, lambda)?;
    let h = kappa.degree();
    let mut out = Vec::with_capacity(host.count(n));
    for s in host.simplices(n) {
        let a = &kappa.values()[host.position(&s[..=h]).expect("front face")];
        if a.is_zero() {
            out.push(Rational::zero());
            continue;
        }
        let b = &lambda.values()[host.position(&s[h..]).expect("back face")];
        out.push(a * b);
    }
    Ok(Cochain { degree: n, values: out })
}

fn factorial(n: usize) -> Rational {
    (1..=n as i64).fold(int(1), |acc, i| acc * int(i))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Skew-symmetrized product: the average of the Alexander–Whitney product over
/// all orderings of the simplex, each weighted by the ordering's sign.
///
/// The orderings sharing the same front set `F`, middle vertex `m` and back set
/// `B` all give the same signed term, so the sum runs over `(F, m, B)` with the
/// multiplicity `h!·h'!` folded into the normalization.
pub fn cup_shuffle(host: &SimplicialComplex, kappa: &Cochain, lambda: &Cochain) -> Result<Cochain> {
    let n = check_pair(host, kappa, lambda)?;
    let h = kappa.degree();
    let hp = lambda.degree();
    let norm = factorial(h) * factorial(hp) / factorial(n + 1);
    let fronts = combinations(n, h);
    let mut out = Vec::with_capacity(host.count(n));
    let mut tuple = Vec::with_capacity(n + 1);
    for s in host.simplices(n) {
        let mut acc = Rational::zero();
        for m in 0..=n {
            let rest: Vec<usize> = (0..=n).filter(|&i| i != m).collect();
            for f in &fronts {
                tuple.clear();
                tuple.extend(f.iter().map(|&i| s[rest[i]]));
                tuple.push(s[m]);
                let a = kappa.eval(host, &tuple).ok_or(Error::NotASubcomplex { simplex: tuple.clone() })?;
                if a.is_zero() {
                    continue;
                }
                let back: Vec<usize> = core::iter::once(s[m])
                    .chain((0..n).filter(|i| !f.contains(i)).map(|i| s[rest[i]]))
                    .collect();
                let b = lambda.eval(host, &back).ok_or(Error::NotASubcomplex { simplex: back.clone() })?;
                tuple.extend_from_slice(&back[1..]);
                let odd = sort_sign(&tuple).expect("distinct vertices");
                let term = a * b;
                if odd {
                    acc -= term;
                } else {
                    acc += term;
                }
            }
        }
        out.push(acc * &norm);
    }
    Ok(Cochain { degree: n, values: out })
}
