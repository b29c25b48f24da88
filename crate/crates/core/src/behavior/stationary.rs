use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::TransitionMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryConfig {
    /// L1 distance between successive iterates at which iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for StationaryConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub labels: Vec<String>,
    pub probabilities: Vec<f64>,
    pub iterations_used: usize,
    /// ‖πM − π‖₁ of the returned vector.
    pub residual: f64,
}

impl StationaryDistribution {
    pub fn get(&self, label: &str) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.probabilities[i])
    }
}

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum ChainError {
    #[error("chain is reducible: {} communicating classes, first closed class {closed_class:?}", components.len())]
    ChainReducible {
        components: Vec<Vec<String>>,
        closed_class: Vec<String>,
    },
    #[error("chain is periodic with period {period}")]
    ChainPeriodic { period: usize },
    #[error("no convergence after {iterations} iterations (last L1 change {last_change:e}, residual {residual:e})")]
    NotConverged {
        iterations: usize,
        last_change: f64,
        residual: f64,
    },
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
}

impl ChainError {
    pub fn code(&self) -> &'static str {
        match self {
            ChainError::ChainReducible { .. } => "chain_reducible",
            ChainError::ChainPeriodic { .. } => "chain_periodic",
            ChainError::NotConverged { .. } => "not_converged",
            ChainError::BadTolerance(_) => "bad_tolerance",
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Irreducibility via strongly connected components of the positive-entry
/// digraph, then the period as the gcd of `level(u) + 1 − level(v)` over all
/// edges of a BFS level assignment.
pub fn check_structure(matrix: &TransitionMatrix) -> Result<(), ChainError> {
    let n = matrix.len();
    let mut graph = DiGraph::<usize, ()>::with_capacity(n, n * n);
    let nodes: Vec<_> = (0..n).map(|i| graph.add_node(i)).collect();
    for (i, row) in matrix.rows().iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if p > 0.0 {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }

    let sccs = tarjan_scc(&graph);
    if sccs.len() > 1 {
        let label = |idx: &petgraph::graph::NodeIndex| matrix.labels()[graph[*idx]].clone();
        let mut components: Vec<Vec<String>> = sccs
            .iter()
            .map(|c| {
                let mut ids: Vec<usize> = c.iter().map(|i| graph[*i]).collect();
                ids.sort_unstable();
                ids.into_iter().map(|i| matrix.labels()[i].clone()).collect()
            })
            .collect();
        components.sort();
        // A class with no edge leaving it traps the chain.
        let closed = sccs
            .iter()
            .find(|c| {
                c.iter().all(|&u| {
                    graph
                        .neighbors(u)
                        .all(|v| c.contains(&v))
                })
            })
            .map(|c| {
                let mut labels: Vec<String> = c.iter().map(label).collect();
                labels.sort();
                labels
            })
            .unwrap_or_default();
        return Err(ChainError::ChainReducible {
            components,
            closed_class: closed,
        });
    }

    let mut level = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    level[0] = 0;
    let mut period = 0usize;
    while let Some(u) = queue.pop_front() {
        for (v, &p) in matrix.rows()[u].iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
            period = gcd(period, (level[u] + 1).abs_diff(level[v]));
        }
    }
    if period > 1 {
        return Err(ChainError::ChainPeriodic { period });
    }
    Ok(())
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Power iteration from the uniform vector.
pub fn stationary(
    matrix: &TransitionMatrix,
    config: StationaryConfig,
) -> Result<StationaryDistribution, ChainError> {
    if !(config.tolerance.is_finite() && config.tolerance > 0.0) {
        return Err(ChainError::BadTolerance(config.tolerance));
    }
    check_structure(matrix)?;

    let n = matrix.len();
    let mut current = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut last_change = f64::INFINITY;
    for iteration in 1..=config.max_iterations {
        matrix.left_multiply(&current, &mut next);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        last_change = l1(&current, &next);
        std::mem::swap(&mut current, &mut next);
        if last_change < config.tolerance {
            matrix.left_multiply(&current, &mut next);
            return Ok(StationaryDistribution {
                labels: matrix.labels().to_vec(),
                residual: l1(&current, &next),
                probabilities: current,
                iterations_used: iteration,
            });
        }
    }
    matrix.left_multiply(&current, &mut next);
    Err(ChainError::NotConverged {
        iterations: config.max_iterations,
        last_change,
        residual: l1(&current, &next),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::validate_matrix;

    fn m(rows: Vec<Vec<f64>>) -> TransitionMatrix {
        let labels = (1..=rows.len()).map(|i| format!("x{i}")).collect();
        validate_matrix(labels, rows).unwrap()
    }

    #[test]
    fn symmetric_two_state() {
        let pi = stationary(&m(vec![vec![0.5, 0.5], vec![0.5, 0.5]]), Default::default()).unwrap();
        assert!((pi.probabilities[0] - 0.5).abs() < 1e-12);
        assert!((pi.probabilities[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hand_solved_two_state() {
        // 0.1·π₁ = 0.5·π₂ with π₁ + π₂ = 1.
        let pi = stationary(&m(vec![vec![0.9, 0.1], vec![0.5, 0.5]]), Default::default()).unwrap();
        assert!((pi.probabilities[0] - 5.0 / 6.0).abs() < 1e-9);
        assert!((pi.probabilities[1] - 1.0 / 6.0).abs() < 1e-9);
        assert!(pi.residual <= 1e-10);
        assert!((pi.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reducible_names_closed_class() {
        let chain = m(vec![
            vec![0.5, 0.5, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        match stationary(&chain, Default::default()).unwrap_err() {
            ChainError::ChainReducible {
                components,
                closed_class,
            } => {
                assert_eq!(components.len(), 3);
                assert!(closed_class == vec!["x2"] || closed_class == vec!["x3"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn periodic_cycle_rejected() {
        let chain = m(vec![
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ]);
        assert_eq!(
            check_structure(&chain),
            Err(ChainError::ChainPeriodic { period: 3 })
        );
        let bipartite = m(vec![
            vec![0.0, 0.5, 0.0, 0.5],
            vec![0.5, 0.0, 0.5, 0.0],
            vec![0.0, 0.5, 0.0, 0.5],
            vec![0.5, 0.0, 0.5, 0.0],
        ]);
        assert_eq!(
            check_structure(&bipartite),
            Err(ChainError::ChainPeriodic { period: 2 })
        );
    }

    #[test]
    fn mixed_cycle_lengths_are_aperiodic() {
        // Cycles of length 2 and 3 through x1.
        let chain = m(vec![
            vec![0.0, 0.5, 0.5],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ]);
        assert_eq!(check_structure(&chain), Ok(()));
        assert!(stationary(&chain, Default::default()).is_ok());
    }

    #[test]
    fn iteration_budget_exhaustion_carries_residual() {
        let chain = m(vec![vec![0.999, 0.001], vec![0.002, 0.998]]);
        let cfg = StationaryConfig {
            tolerance: 1e-14,
            max_iterations: 3,
        };
        match stationary(&chain, cfg).unwrap_err() {
            ChainError::NotConverged { iterations, residual, .. } => {
                assert_eq!(iterations, 3);
                assert!(residual.is_finite());
            }
            other => panic!("{other:?}"),
        }
    }
}
