use std::collections::BTreeMap;

use log::warn;
use rayon::prelude::*;

use super::mann_whitney::mann_whitney;
use super::{bonferroni_alpha, InferenceError, Result};
use crate::quantiles::ScoredRecord;

/// Unit counts above which the all-pairs comparison gets expensive.
pub const LARGE_COMPARISON: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CompareVariable {
    TimesCited,
    #[default]
    Quantile,
}

impl CompareVariable {
    pub fn value(&self, record: &ScoredRecord) -> f64 {
        match self {
            CompareVariable::TimesCited => record.times_cited as f64,
            CompareVariable::Quantile => record.quantile.to_f64(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTest {
    pub a: usize,
    pub b: usize,
    pub u: f64,
    pub p: f64,
}

/// Units joined when their distributions are not significantly different.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonGraph {
    /// Sorted unit labels; indices below refer to this list.
    pub nodes: Vec<String>,
    /// Non-significant pairs (p ≥ alpha_family), ordered by (a, b).
    pub edges: Vec<PairTest>,
    pub alpha_family: f64,
    pub core_number: Vec<usize>,
}

impl ComparisonGraph {
    pub fn degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|e| e.a == node || e.b == node).count()
    }

    pub fn max_core(&self) -> usize {
        self.core_number.iter().copied().max().unwrap_or(0)
    }

    /// Labels of the nodes in the innermost core.
    pub fn main_core(&self) -> Vec<&str> {
        let k = self.max_core();
        self.nodes
            .iter()
            .zip(&self.core_number)
            .filter(|(_, &c)| c == k)
            .map(|(n, _)| n.as_str())
            .collect()
    }
}

/// Pairwise Mann-Whitney tests at a Bonferroni-corrected level, then
/// k-core numbers of the resulting similarity graph.
pub fn homogeneity_graph(units: &BTreeMap<String, Vec<f64>>, alpha: f64) -> Result<ComparisonGraph> {
    if units.len() < 2 {
        return Err(InferenceError::TooFewUnits(units.len()));
    }
    if let Some((name, _)) = units.iter().find(|(_, v)| v.is_empty()) {
        return Err(InferenceError::EmptyUnit(name.clone()));
    }
    if units.len() > LARGE_COMPARISON {
        warn!(
            "comparing {} units pairwise ({} tests)",
            units.len(),
            units.len() * (units.len() - 1) / 2
        );
    }
    let alpha_family = bonferroni_alpha(alpha, units.len())?;
    let nodes: Vec<String> = units.keys().cloned().collect();
    let samples: Vec<&Vec<f64>> = units.values().collect();
    let pairs: Vec<(usize, usize)> = (0..nodes.len())
        .flat_map(|a| (a + 1..nodes.len()).map(move |b| (a, b)))
        .collect();

    let tests: Vec<PairTest> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let r = mann_whitney(samples[a], samples[b])?;
            Ok(PairTest {
                a,
                b,
                u: r.u,
                p: r.p_two_sided,
            })
        })
        .collect::<Result<_>>()?;

    let edges: Vec<PairTest> = tests.into_iter().filter(|t| t.p >= alpha_family).collect();
    let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e.a, e.b)).collect();
    let core_number = core_numbers(nodes.len(), &pairs);
    Ok(ComparisonGraph {
        nodes,
        edges,
        alpha_family,
        core_number,
    })
}

/// Core number of every node by repeatedly removing a node of minimum
/// remaining degree (bucket queue, linear in nodes + edges).
pub fn core_numbers(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        if a != b {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let max_deg = degree.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); max_deg + 1];
    for (v, &d) in degree.iter().enumerate() {
        buckets[d].push(v);
    }
    let mut removed = vec![false; n];
    let mut core = vec![0; n];
    let mut k = 0;
    let mut d = 0;
    let mut done = 0;
    while done < n {
        // stale bucket entries are skipped
        let Some(v) = buckets[d].pop() else {
            d += 1;
            continue;
        };
        if removed[v] || degree[v] != d {
            continue;
        }
        k = k.max(d);
        core[v] = k;
        removed[v] = true;
        done += 1;
        for &w in &adj[v] {
            if !removed[w] {
                degree[w] -= 1;
                buckets[degree[w]].push(w);
                if degree[w] < d {
                    d = degree[w];
                }
            }
        }
    }
    core
}
