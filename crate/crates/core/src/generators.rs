//! Graph families with their unit-weight shortest-path metrics.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::rational::int;
use crate::{Error, FiniteMetricSpace, Result};

fn graph(n: usize, edges: Vec<(usize, usize)>, labels: Vec<String>) -> Result<FiniteMetricSpace> {
    let e: Vec<_> = edges.into_iter().map(|(a, b)| (a, b, int(1))).collect();
    FiniteMetricSpace::from_weighted_edges(n, &e, Some(labels))
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::InvalidParams(format!("{name} must be at least 1")));
    }
    Ok(())
}

pub fn path(n: usize) -> Result<FiniteMetricSpace> {
    positive("path length", n)?;
    graph(n, (1..n).map(|i| (i - 1, i)).collect(), (0..n).map(|i| format!("{i}")).collect())
}

pub fn cycle(n: usize) -> Result<FiniteMetricSpace> {
    if n < 3 {
        return Err(Error::InvalidParams("a cycle needs at least 3 points".into()));
    }
    graph(n, (0..n).map(|i| (i, (i + 1) % n)).collect(), (0..n).map(|i| format!("{i}")).collect())
}

/// `rows × cols` grid graph; point `(r, c)` has id `r * cols + c`.
pub fn grid(rows: usize, cols: usize) -> Result<FiniteMetricSpace> {
    positive("grid rows", rows)?;
    positive("grid cols", cols)?;
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    let labels = (0..rows * cols).map(|i| format!("{},{}", i / cols, i % cols)).collect();
    graph(rows * cols, edges, labels)
}

/// Complete rooted tree with the given branching factor and depth; ids in BFS order.
pub fn tree(branching: usize, depth: usize) -> Result<FiniteMetricSpace> {
    positive("branching", branching)?;
    let mut edges = Vec::new();
    let mut level_start = 0;
    let mut level_len = 1;
    let mut n = 1;
    for _ in 0..depth {
        for p in level_start..level_start + level_len {
            for _ in 0..branching {
                edges.push((p, n));
                n += 1;
            }
        }
        level_start += level_len;
        level_len *= branching;
    }
    graph(n, edges, (0..n).map(|i| format!("{i}")).collect())
}

/// Width-`w` band around an `n`-cycle: the product graph `C_n × P_w`.
/// Point `(i, r)` with `i` around the cycle and `r` across the band has id `i * w + r`.
pub fn annulus(n: usize, w: usize) -> Result<FiniteMetricSpace> {
    if n < 3 {
        return Err(Error::InvalidParams("an annulus needs a cycle of length at least 3".into()));
    }
    positive("annulus width", w)?;
    let id = |i: usize, r: usize| i * w + r;
    let mut edges = Vec::new();
    for i in 0..n {
        for r in 0..w {
            edges.push((id(i, r), id((i + 1) % n, r)));
            if r + 1 < w {
                edges.push((id(i, r), id(i, r + 1)));
            }
        }
    }
    let labels = (0..n * w).map(|p| format!("{},{}", p / w, p % w)).collect();
    graph(n * w, edges, labels)
}

/// Cayley graph of `Z_{n_1} × … × Z_{n_r}` for the given generators (inverses added).
pub fn cayley(orders: &[usize], generators: &[Vec<i64>]) -> Result<FiniteMetricSpace> {
    if orders.is_empty() || orders.contains(&0) {
        return Err(Error::InvalidParams("group orders must be nonempty and positive".into()));
    }
    if generators.iter().any(|g| g.len() != orders.len()) {
        return Err(Error::InvalidParams("generator length must match the number of factors".into()));
    }
    let n: usize = orders.iter().product();
    let coords = |mut p: usize| {
        let mut c = Vec::with_capacity(orders.len());
        for &o in orders.iter().rev() {
            c.push(p % o);
            p /= o;
        }
        c.reverse();
        c
    };
    let index = |c: &[usize]| c.iter().zip(orders).fold(0, |acc, (&x, &o)| acc * o + x);
    let mut edges = Vec::new();
    for p in 0..n {
        let c = coords(p);
        for g in generators {
            let moved: Vec<usize> =
                c.iter().zip(g).zip(orders).map(|((&x, &s), &o)| (x as i64 + s).rem_euclid(o as i64) as usize).collect();
            let q = index(&moved);
            if q != p {
                edges.push((p, q));
            }
        }
    }
    let labels = (0..n)
        .map(|p| coords(p).iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(","))
        .collect();
    graph(n, edges, labels)
}
