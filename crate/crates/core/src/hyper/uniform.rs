use std::collections::{BTreeMap, HashSet};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::{path_from_pred, QhGraph};
use crate::error::{Error, Result};
use crate::space::SampledSpace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityWitness {
    pub x: String,
    pub y: String,
    /// Euclidean length of the graph geodesic over `d(x,y)`.
    pub length_ratio: f64,
    /// Largest `min(l(x,z), l(z,y)) / d(z)` along the geodesic.
    pub cigar_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    /// Empirical uniformity constant, at least one.
    pub a_hat: f64,
    pub pairs_used: usize,
    /// Set when the requested budget exceeded the number of available pairs.
    pub clamped: bool,
    pub seed: u64,
    /// The pairs attaining the largest ratios, worst first.
    pub witnesses: Vec<UniformityWitness>,
}

/// Estimates the uniformity constant from graph geodesics between sampled pairs.
///
/// For each pair the shortest graph path is read as a polygonal curve; its
/// Euclidean length is compared with `d(x,y)` and every node on it is tested
/// against the cigar condition.
pub fn uniformity_estimate(
    space: &SampledSpace,
    graph: &QhGraph,
    pair_budget: usize,
    seed: u64,
) -> Result<UniformityReport> {
    if pair_budget == 0 {
        return Err(Error::EmptyBudget);
    }
    let n = graph.n();
    if n != space.n_interior() {
        return Err(Error::LabelMismatch("graph and space differ".into()));
    }
    let total = n * (n - 1) / 2;
    let clamped = pair_budget > total;
    if clamped {
        log::warn!("pair budget {pair_budget} exceeds the {total} available pairs");
    }
    let mut by_source: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    if pair_budget >= total {
        for x in 0..n {
            by_source.insert(x, ((x + 1)..n).collect());
        }
    } else {
        let mut rng = crate::rng(seed);
        let mut seen = HashSet::new();
        while seen.len() < pair_budget {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a == b {
                continue;
            }
            let (x, y) = (a.min(b), a.max(b));
            if seen.insert((x, y)) {
                by_source.entry(x).or_default().push(y);
            }
        }
    }
    let bd = space.bdist();
    let mut witnesses: Vec<UniformityWitness> = by_source
        .par_iter()
        .flat_map_iter(|(&x, ys)| {
            let (_, pred) = graph.dijkstra(x);
            ys.iter()
                .map(|&y| {
                    let path = path_from_pred(&pred, x, y);
                    let mut cum = Vec::with_capacity(path.len());
                    let mut acc = 0.0;
                    cum.push(0.0);
                    for w in path.windows(2) {
                        acc += space.dist(w[0], w[1]);
                        cum.push(acc);
                    }
                    let len = acc;
                    let cigar = path
                        .iter()
                        .zip(&cum)
                        .map(|(&z, &l)| l.min(len - l) / bd[z])
                        .fold(0.0, f64::max);
                    UniformityWitness {
                        x: graph.labels()[x].clone(),
                        y: graph.labels()[y].clone(),
                        length_ratio: len / space.dist(x, y),
                        cigar_ratio: cigar,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let score = |w: &UniformityWitness| w.length_ratio.max(w.cigar_ratio);
    witnesses.sort_by(|a, b| score(b).total_cmp(&score(a)));
    let a_hat = witnesses.first().map_or(1.0, score).max(1.0);
    let pairs_used = witnesses.len();
    witnesses.truncate(10);
    Ok(UniformityReport {
        a_hat,
        pairs_used,
        clamped,
        seed,
        witnesses,
    })
}
