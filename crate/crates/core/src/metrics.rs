//! Segregation, connectedness and discovery observables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{NetworkState, Partition, Population};

/// Share of links whose endpoints fall in different classes. `None` for a
/// graph without links.
pub fn inter_group_proportion(net: &NetworkState, pop: &Population, partition: Partition) -> Option<f64> {
    let edges = net.edges();
    if edges.is_empty() {
        return None;
    }
    let crossing = edges
        .iter()
        .filter(|&&(i, j)| pop.class_of(i, partition) != pop.class_of(j, partition))
        .count();
    Some(crossing as f64 / edges.len() as f64)
}

/// Inter-class link share expected of a uniformly random graph:
/// `((sum n_k)^2 - sum n_k^2) / (n (n - 1))`.
pub fn random_inter_proportion(pop: &Population, partition: Partition) -> Result<f64> {
    let sizes = pop.class_sizes(partition);
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::Undefined("segregation index needs at least two non-empty classes"));
    }
    let n = pop.n() as f64;
    let total: f64 = sizes.iter().map(|&s| s as f64).sum();
    let squares: f64 = sizes.iter().map(|&s| (s * s) as f64).sum();
    Ok((total * total - squares) / (n * (n - 1.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreemanIndex {
    pub value: f64,
    /// Set when the graph has no links and `value` is the conventional 1.
    pub collapsed: bool,
}

/// Generalised Freeman segregation index `1 - p / p_random`.
pub fn freeman_index(net: &NetworkState, pop: &Population, partition: Partition) -> Result<FreemanIndex> {
    let expected = random_inter_proportion(pop, partition)?;
    Ok(match inter_group_proportion(net, pop, partition) {
        Some(p) => FreemanIndex { value: 1.0 - p / expected, collapsed: false },
        None => FreemanIndex { value: 1.0, collapsed: true },
    })
}

/// Relative drop in the inter-group share against a paired baseline.
pub fn incremental_segregation(p_base: Option<f64>, p_biased: Option<f64>) -> Option<f64> {
    match (p_base, p_biased) {
        (Some(base), Some(biased)) if base > 0.0 => Some((base - biased) / base),
        // a collapsed biased network has no inter-group links at all
        (Some(base), None) if base > 0.0 => Some(1.0),
        _ => None,
    }
}

/// Mean over agents of `degree / (n - 1)`.
pub fn mean_degree(net: &NetworkState) -> f64 {
    let n = net.n();
    if n < 2 {
        return 0.0;
    }
    2.0 * net.link_count() as f64 / (n as f64 * (n - 1) as f64)
}

/// Filled share of the memory matrix, diagonal included.
pub fn discovery(net: &NetworkState) -> f64 {
    let n = net.n() as f64;
    net.memory_ones() as f64 / (n * n)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub p_inter: Option<f64>,
    pub freeman: FreemanIndex,
    pub s_is_vs_rational: Option<f64>,
    pub s_is_vs_complete: Option<f64>,
    pub mean_degree: f64,
    pub discovery: f64,
}

impl MetricsRecord {
    /// Metrics of a single network; incremental indices are filled in by the
    /// paired-run driver.
    pub fn of(net: &NetworkState, pop: &Population, partition: Partition) -> Result<Self> {
        Ok(MetricsRecord {
            p_inter: inter_group_proportion(net, pop, partition),
            freeman: freeman_index(net, pop, partition)?,
            s_is_vs_rational: None,
            s_is_vs_complete: None,
            mean_degree: mean_degree(net),
            discovery: discovery(net),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> Population {
        Population::from_labels(vec![0, 0, 1, 1], vec![0, 1, 0, 1]).unwrap()
    }

    fn complete(n: usize) -> NetworkState {
        let edges: Vec<_> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        NetworkState::from_parts(n, &edges, None).unwrap()
    }

    #[test]
    fn intra_only_links() {
        let pop = two_by_two();
        let net = NetworkState::from_parts(4, &[(0, 1), (2, 3)], None).unwrap();
        assert_eq!(inter_group_proportion(&net, &pop, Partition::ByGroup), Some(0.0));
        let f = freeman_index(&net, &pop, Partition::ByGroup).unwrap();
        assert_eq!(f, FreemanIndex { value: 1.0, collapsed: false });
    }

    #[test]
    fn complete_graph_on_two_by_two() {
        let pop = two_by_two();
        let net = complete(4);
        let p = inter_group_proportion(&net, &pop, Partition::ByGroup).unwrap();
        assert!((p - 2.0 / 3.0).abs() < 1e-15);
        // numerator 8, denominator 8
        let f = freeman_index(&net, &pop, Partition::ByGroup).unwrap();
        assert!(f.value.abs() < 1e-15);
    }

    #[test]
    fn empty_graph_conventions() {
        let pop = two_by_two();
        let net = NetworkState::empty(4);
        assert_eq!(inter_group_proportion(&net, &pop, Partition::ByGroup), None);
        assert_eq!(
            freeman_index(&net, &pop, Partition::ByGroup).unwrap(),
            FreemanIndex { value: 1.0, collapsed: true }
        );
        assert_eq!(mean_degree(&net), 0.0);
        assert_eq!(discovery(&net), 0.25);
    }

    #[test]
    fn single_class_rejected() {
        let pop = Population::from_labels(vec![0, 0, 0], vec![0, 1, 0]).unwrap();
        assert!(freeman_index(&NetworkState::empty(3), &pop, Partition::ByGroup).is_err());
        assert!(freeman_index(&NetworkState::empty(3), &pop, Partition::ByType).is_ok());
    }

    #[test]
    fn incremental_indices() {
        assert!((incremental_segregation(Some(0.4), Some(0.1)).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(incremental_segregation(Some(0.3), Some(0.3)), Some(0.0));
        assert_eq!(incremental_segregation(Some(0.0), Some(0.1)), None);
        assert_eq!(incremental_segregation(None, Some(0.1)), None);
    }

    #[test]
    fn degree_and_discovery() {
        assert_eq!(mean_degree(&complete(5)), 1.0);
        let star = NetworkState::from_parts(4, &[(0, 1), (0, 2), (0, 3)], None).unwrap();
        assert_eq!(mean_degree(&star), 0.5);
        let mut net = NetworkState::empty(4);
        net.add_link(1, 3).unwrap();
        assert_eq!(discovery(&net), 6.0 / 16.0);
        assert_eq!(discovery(&NetworkState::fully_informed(4)), 1.0);
    }
}
