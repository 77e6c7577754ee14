use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::{articulation_points, CouplingGraph, GraphError};
use crate::names::Qidx;
use crate::types::{FunEnv, SourceFunType};

/// Nested connected subgraphs `G1 ⊂ G2 ⊂ .. ⊂ Gn` of one device, where
/// `Gk` has exactly `k` nodes and is induced by its node set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgraphChain {
    /// `graphs[k - 1]` is `Gk`.
    graphs: Vec<CouplingGraph>,
    removal_order: Vec<Qidx>,
}

impl SubgraphChain {
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// `Gk`, 1-based.
    pub fn get(&self, k: usize) -> Option<&CouplingGraph> {
        k.checked_sub(1).and_then(|i| self.graphs.get(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = &CouplingGraph> {
        self.graphs.iter()
    }

    /// Nodes in the order they were peeled off the full graph.
    pub fn removal_order(&self) -> &[Qidx] {
        &self.removal_order
    }
}

/// Repeatedly deletes a minimum-degree vertex that is not a cut vertex,
/// taking the smallest name on ties. Degrees and cut vertices are recomputed
/// on the shrinking graph each round.
pub fn construct_subgraphs(g: &CouplingGraph) -> Result<SubgraphChain, GraphError> {
    g.check_connected()?;
    let mut keep: BTreeSet<Qidx> = g.nodes().iter().cloned().collect();
    let mut graphs = Vec::with_capacity(keep.len());
    let mut removal_order = Vec::new();
    let mut current = g.clone();
    while !keep.is_empty() {
        graphs.push(current.clone());
        if keep.len() == 1 {
            break;
        }
        let cuts = articulation_points(&current)?;
        let victim = keep
            .iter()
            .filter(|v| !cuts.contains(*v))
            .min_by(|a, b| current.degree(a).cmp(&current.degree(b)).then(a.cmp(b)))
            .cloned()
            .expect("a connected graph with two or more nodes has a non-cut vertex");
        keep.remove(&victim);
        removal_order.push(victim);
        current = g.induced(&keep);
    }
    graphs.reverse();
    Ok(SubgraphChain {
        graphs,
        removal_order,
    })
}

/// Which chain element a function runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Workspace {
    /// `k` such that the function runs on `Gk`.
    pub size: usize,
    /// Set when the function needs no qubit at all; `G0` does not exist and
    /// the function is given `G1` instead.
    pub clamped: bool,
}

/// `f : T1 --N--> T2` is assigned `G_{N + |T1|}`.
pub fn assign_subgraphs(
    theta: &FunEnv<SourceFunType>,
    chain: &SubgraphChain,
) -> Result<FunEnv<Workspace>, GraphError> {
    let mut out = FunEnv::new();
    for (f, ty) in theta.iter() {
        let required = ty.budget + ty.params;
        if required > chain.len() || (required == 0 && chain.is_empty()) {
            return Err(GraphError::DeviceTooSmall {
                fun: f.clone(),
                required: required.max(1),
                available: chain.len(),
            });
        }
        let ws = if required == 0 {
            Workspace {
                size: 1,
                clamped: true,
            }
        } else {
            Workspace {
                size: required,
                clamped: false,
            }
        };
        out.insert(f.clone(), ws);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::strategies::connected_graph;
    use crate::names::FunName;
    use alloc::vec;
    use proptest::prelude::*;

    fn names(g: &CouplingGraph) -> Vec<&str> {
        g.nodes().iter().map(|q| q.as_str()).collect()
    }

    #[test]
    fn qx2_chain() {
        let chain = construct_subgraphs(&qx2()).unwrap();
        let order: Vec<&str> = chain.removal_order().iter().map(|q| q.as_str()).collect();
        assert_eq!(order, vec!["q0", "q1", "q2", "q3"]);
        assert_eq!(chain.len(), 5);
        let g3 = chain.get(3).unwrap();
        assert_eq!(names(g3), vec!["q2", "q3", "q4"]);
        assert_eq!(g3.edge_count(), 3);
    }

    #[test]
    fn path_chain() {
        let chain = construct_subgraphs(&path3()).unwrap();
        assert_eq!(names(chain.get(1).unwrap()), vec!["c"]);
        assert_eq!(names(chain.get(2).unwrap()), vec!["b", "c"]);
        assert_eq!(names(chain.get(3).unwrap()), vec!["a", "b", "c"]);
    }

    #[test]
    fn single_node_chain() {
        let g = CouplingGraph::new(["x"], Vec::<(Qidx, Qidx)>::new()).unwrap();
        assert_eq!(construct_subgraphs(&g).unwrap().len(), 1);
    }

    #[test]
    fn assignment() {
        let chain = construct_subgraphs(&qx2()).unwrap();
        let theta: FunEnv<SourceFunType> = [
            (FunName::from("f"), SourceFunType::new(2, 1, 2)),
            (FunName::from("z"), SourceFunType::new(0, 0, 0)),
        ]
        .into_iter()
        .collect();
        let ws = assign_subgraphs(&theta, &chain).unwrap();
        assert_eq!(
            ws.get(&FunName::from("f")),
            Some(&Workspace {
                size: 3,
                clamped: false
            })
        );
        assert_eq!(
            ws.get(&FunName::from("z")),
            Some(&Workspace {
                size: 1,
                clamped: true
            })
        );

        let big: FunEnv<SourceFunType> = [(FunName::from("g"), SourceFunType::new(3, 3, 3))]
            .into_iter()
            .collect();
        assert!(matches!(
            assign_subgraphs(&big, &chain),
            Err(GraphError::DeviceTooSmall {
                required: 6,
                available: 5,
                ..
            })
        ));
    }

    proptest! {
        #[test]
        fn chain_invariants(g in connected_graph(32)) {
            let chain = construct_subgraphs(&g).unwrap();
            prop_assert_eq!(chain.len(), g.node_count());
            for (i, gi) in chain.iter().enumerate() {
                prop_assert_eq!(gi.node_count(), i + 1);
                prop_assert!(gi.is_connected());
                let keep: BTreeSet<Qidx> = gi.nodes().iter().cloned().collect();
                prop_assert_eq!(gi, &g.induced(&keep));
                if let Some(next) = chain.get(i + 2) {
                    prop_assert!(gi.nodes().iter().all(|n| next.contains_node(n)));
                }
            }
        }
    }
}
