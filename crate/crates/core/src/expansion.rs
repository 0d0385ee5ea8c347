//! Edge expansion `min over |S| <= n/2 of w(S, V\S) / |S|`, exactly by
//! enumeration for small graphs and by spectral sweeps otherwise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Cut, WeightedGraph};
use crate::oracle::SubsetWeights;
use crate::spectral;

pub const EXPANSION_CAP: usize = 20;

const POWER_ITERS: usize = 300;

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionEstimate {
    /// `witness.weight / witness.smaller_side_len()`.
    pub certified_upper: f64,
    /// Spectral estimate; not a proof of anything.
    pub heuristic_lower: f64,
    pub witness: Cut,
    pub exact: bool,
}

fn witness(g: &WeightedGraph, side: &[bool]) -> Result<Cut> {
    let a: Vec<usize> = (0..g.n()).filter(|&v| side[v]).collect();
    let b: Vec<usize> = (0..g.n()).filter(|&v| !side[v]).collect();
    Cut::new(g, a, b)
}

fn ratio(cut: &Cut) -> f64 {
    cut.weight / cut.smaller_side_len() as f64
}

/// Exhaustive minimum; the first minimal subset in bitmask order wins ties.
pub fn exact_expansion(g: &WeightedGraph) -> Result<ExpansionEstimate> {
    let n = g.n();
    if n < 2 {
        return Err(Error::arg("expansion needs at least two vertices"));
    }
    if n > EXPANSION_CAP {
        return Err(Error::TooLarge {
            size: n,
            cap: EXPANSION_CAP,
            hint: "use approx_expansion",
        });
    }
    let vertices: Vec<usize> = (0..n).collect();
    let table = SubsetWeights::new(g, &vertices);
    let full = (1usize << n) - 1;
    let mut best = f64::INFINITY;
    let mut best_mask = 0;
    for mask in 1..full {
        let size = mask.count_ones() as usize;
        if 2 * size > n {
            continue;
        }
        let r = table.cut(mask, full ^ mask) / size as f64;
        if r < best {
            best = r;
            best_mask = mask;
        }
    }
    let side: Vec<bool> = (0..n).map(|v| best_mask >> v & 1 == 1).collect();
    let cut = witness(g, &side)?;
    Ok(ExpansionEstimate {
        certified_upper: ratio(&cut),
        heuristic_lower: best,
        witness: cut,
        exact: true,
    })
}

/// Best of `sweep_rounds` Fiedler sweeps (different random starts) and
/// `sweep_rounds` random balanced bisections, each refined locally.
pub fn approx_expansion(g: &WeightedGraph, sweep_rounds: usize) -> Result<ExpansionEstimate> {
    let n = g.n();
    if n < 2 {
        return Err(Error::arg("expansion needs at least two vertices"));
    }
    let comps = g.components();
    if comps.len() > 1 {
        let smallest = comps.iter().min_by_key(|c| c.len()).expect("two or more components");
        let mut side = vec![false; n];
        for &v in smallest {
            side[v] = true;
        }
        let cut = witness(g, &side)?;
        return Ok(ExpansionEstimate {
            certified_upper: ratio(&cut),
            heuristic_lower: 0.0,
            witness: cut,
            exact: false,
        });
    }

    let mut best: Option<Vec<bool>> = None;
    let mut best_ratio = f64::INFINITY;
    let mut consider = |side: Vec<bool>| {
        let size = side.iter().filter(|&&s| s).count();
        let small = size.min(n - size);
        if small == 0 {
            return;
        }
        let r = spectral::mask_weight(g, &side) / small as f64;
        if r < best_ratio {
            best_ratio = r;
            best = Some(side);
        }
    };

    let d_min = (0..n).map(|v| g.weighted_degree(v)).fold(f64::INFINITY, f64::min);
    let mut lambda2 = f64::INFINITY;
    let rounds = sweep_rounds.max(1);
    for round in 0..rounds {
        if let Some(f) = spectral::fiedler(g, POWER_ITERS, round as u64) {
            lambda2 = lambda2.min(f.lambda2);
            let order = spectral::order_by(&f.embedding);
            let cuts = spectral::prefix_cuts(g, &order);
            let best_s = (1..n)
                .min_by(|&a, &b| {
                    let ra = cuts[a] / a.min(n - a) as f64;
                    let rb = cuts[b] / b.min(n - b) as f64;
                    ra.total_cmp(&rb)
                })
                .expect("n >= 2");
            let mut side = vec![false; n];
            for &v in &order[..best_s] {
                side[v] = true;
            }
            consider(side);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..rounds {
        let mut side = spectral::random_mask(n, n / 2, &mut rng);
        spectral::fm_refine(g, &mut side, n / 2, n.div_ceil(2), 4);
        consider(side);
    }
    let side = best.expect("at least one bisection is considered");
    let cut = witness(g, &side)?;
    let heuristic_lower = if lambda2.is_finite() {
        lambda2 * d_min / 2.0
    } else {
        0.0
    };
    Ok(ExpansionEstimate {
        certified_upper: ratio(&cut),
        heuristic_lower,
        witness: cut,
        exact: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clique(n: usize) -> WeightedGraph {
        let mut e = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                e.push((u, v));
            }
        }
        WeightedGraph::from_unit_edges(n, e).unwrap()
    }

    fn two_triangles() -> WeightedGraph {
        WeightedGraph::from_unit_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap()
    }

    #[test]
    fn exact_examples() {
        let e = exact_expansion(&two_triangles()).unwrap();
        assert_eq!(e.certified_upper, 0.0);
        assert_eq!(e.witness.smaller_side_len(), 3);
        assert_eq!(exact_expansion(&clique(4)).unwrap().certified_upper, 2.0);
        let c6 = WeightedGraph::from_unit_edges(6, (0..6).map(|i| (i, (i + 1) % 6))).unwrap();
        let e = exact_expansion(&c6).unwrap();
        assert!((e.certified_upper - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(e.witness.weight, 2.0);
        assert!(exact_expansion(&WeightedGraph::empty(21)).is_err());
        assert!(exact_expansion(&WeightedGraph::empty(1)).is_err());
    }

    #[test]
    fn approx_examples() {
        assert_eq!(approx_expansion(&two_triangles(), 2).unwrap().certified_upper, 0.0);
        let k4 = approx_expansion(&clique(4), 2).unwrap();
        assert!(k4.certified_upper >= 2.0 && k4.certified_upper <= 3.0);
        assert!(!k4.exact);
    }

    mod props {
        use super::*;
        use crate::graph::Edge;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn witnesses_are_consistent(n in 2usize..13, raw in proptest::collection::vec((0usize..13, 0usize..13, 1u32..4), 0..40)) {
                let g = WeightedGraph::from_edges(n, raw.iter().filter(|(u, v, _)| u % n != v % n).map(|&(u, v, w)| Edge::new(u % n, v % n, w as f64))).unwrap();
                let exact = exact_expansion(&g).unwrap();
                let approx = approx_expansion(&g, 2).unwrap();
                prop_assert_eq!(exact.certified_upper, exact.witness.weight / exact.witness.smaller_side_len() as f64);
                prop_assert!(approx.certified_upper >= exact.certified_upper - 1e-12);
                prop_assert_eq!(approx.certified_upper, approx.witness.weight / approx.witness.smaller_side_len() as f64);
                // no subset beats the exact value
                for mask in 1usize..(1 << n) - 1 {
                    let side: Vec<bool> = (0..n).map(|v| mask >> v & 1 == 1).collect();
                    let size = side.iter().filter(|&&s| s).count();
                    if 2 * size <= n {
                        let r = crate::graph::boundary_weight(&g, &side) / size as f64;
                        prop_assert!(r >= exact.certified_upper - 1e-12);
                    }
                }
            }
        }
    }
}
