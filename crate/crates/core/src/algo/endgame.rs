use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::formula::{VarState, WorkingFormula};
use crate::instance::Var;

/// Shape of the disequality graph left after the long clauses are gone.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndgameGraphStats {
    pub vertices: usize,
    pub edges: usize,
    pub max_component: usize,
    pub components: usize,
    pub bipartite: bool,
}

impl EndgameGraphStats {
    /// `2 * edges / vertices`, 0 on the empty graph.
    pub fn mean_degree(&self) -> f64 {
        if self.vertices == 0 {
            0.0
        } else {
            2.0 * self.edges as f64 / self.vertices as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndgameFailure {
    NonBipartite,
    OversizedComponent { size: usize, limit: f64 },
}

/// Two colourings of the endgame graph: `a_values[v]` is the value of
/// vertex `v` in A, and B is its complement on the graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndgameColouring {
    pub a_values: Vec<(Var, bool)>,
    /// Vertex sets, each led by its smallest variable (the representative,
    /// TRUE in A).
    pub components: Vec<Vec<Var>>,
}

/// Runs the bipartite endgame on a formula holding only 1-in-2 clauses,
/// unassigned (unqueued) variables and assigned ones. Vertices are all
/// unassigned variables; each 1-in-2 clause is an edge `x != y`.
pub fn endgame_2xor(
    wf: &WorkingFormula,
    limit: f64,
) -> (EndgameGraphStats, Result<EndgameColouring, EndgameFailure>) {
    assert!(
        !wf.has_long_clause() && wf.counts().p == 0 && wf.counts().n == 0,
        "endgame needs an empty unit queue and no long clauses"
    );
    let n = wf.n();
    let mut vertices: Vec<Var> = wf.free_vars().to_vec();
    vertices.sort_unstable();
    let mut deg = vec![0u32; n + 1];
    let mut edges = 0;
    for (_, m) in wf.residual_clauses() {
        debug_assert_eq!(m.len(), 2);
        deg[m[0] as usize + 1] += 1;
        deg[m[1] as usize + 1] += 1;
        edges += 1;
    }
    for i in 0..n {
        deg[i + 1] += deg[i];
    }
    let start = deg.clone();
    let mut adj = vec![0 as Var; 2 * edges];
    for (_, m) in wf.residual_clauses() {
        for (x, y) in [(m[0], m[1]), (m[1], m[0])] {
            adj[deg[x as usize] as usize] = y;
            deg[x as usize] += 1;
        }
    }

    let mut colour: Vec<Option<bool>> = vec![None; n];
    let mut components = Vec::new();
    let mut a_values = Vec::with_capacity(vertices.len());
    let mut bipartite = true;
    let mut max_component = 0;
    let mut queue = VecDeque::new();
    for &root in &vertices {
        debug_assert_eq!(wf.state(root), VarState::Free);
        if colour[root as usize].is_some() {
            continue;
        }
        colour[root as usize] = Some(true);
        queue.push_back(root);
        let mut comp = vec![root];
        while let Some(x) = queue.pop_front() {
            let cx = colour[x as usize].unwrap();
            a_values.push((x, cx));
            for &y in &adj[start[x as usize] as usize..start[x as usize + 1] as usize] {
                match colour[y as usize] {
                    None => {
                        colour[y as usize] = Some(!cx);
                        comp.push(y);
                        queue.push_back(y);
                    }
                    Some(cy) if cy == cx => bipartite = false,
                    Some(_) => {}
                }
            }
        }
        max_component = max_component.max(comp.len());
        components.push(comp);
    }
    let stats = EndgameGraphStats {
        vertices: vertices.len(),
        edges,
        max_component,
        components: components.len(),
        bipartite,
    };
    let outcome = if !bipartite {
        Err(EndgameFailure::NonBipartite)
    } else if max_component as f64 >= limit {
        Err(EndgameFailure::OversizedComponent { size: max_component, limit })
    } else {
        a_values.sort_unstable();
        Ok(EndgameColouring { a_values, components })
    };
    (stats, outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::EcInstance;

    /// Residual formula with the given 1-in-2 edges: each edge `{x, y}` comes
    /// from a clause `{x, y, h}` with a fresh helper `h` set FALSE.
    fn graph(n: usize, edges: &[(usize, usize)]) -> WorkingFormula {
        let clauses: Vec<[usize; 3]> = edges.iter().enumerate().map(|(i, &(x, y))| [x, y, n + i]).collect();
        let mut wf = WorkingFormula::new(&EcInstance::new(n + edges.len(), 3, &clauses).unwrap());
        for i in 0..edges.len() {
            wf.set_variable((n + i) as Var, false).unwrap();
        }
        wf
    }

    fn check_proper(edges: &[(usize, usize)], c: &EndgameColouring) {
        let value = |v: usize| c.a_values.iter().find(|p| p.0 == v as Var).unwrap().1;
        for &(x, y) in edges {
            assert_ne!(value(x), value(y));
            // B is the complement, so it is proper too.
            assert_ne!(!value(x), !value(y));
        }
    }

    #[test]
    fn single_edge() {
        let wf = graph(2, &[(0, 1)]);
        let (stats, out) = endgame_2xor(&wf, 100.0);
        let c = out.unwrap();
        assert_eq!(c.a_values, vec![(0, true), (1, false)]);
        assert_eq!(c.components, vec![vec![0, 1]]);
        assert_eq!((stats.vertices, stats.edges, stats.max_component), (2, 1, 2));
    }

    #[test]
    fn triangle_is_rejected() {
        let wf = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        let (stats, out) = endgame_2xor(&wf, 100.0);
        assert_eq!(out.unwrap_err(), EndgameFailure::NonBipartite);
        assert!(!stats.bipartite);
    }

    #[test]
    fn path_of_five() {
        let edges = [(0, 1), (1, 2), (2, 3), (3, 4)];
        let wf = graph(5, &edges);
        let (stats, out) = endgame_2xor(&wf, 100.0);
        let c = out.unwrap();
        check_proper(&edges, &c);
        assert_eq!(stats.max_component, 5);
        let a: Vec<bool> = c.a_values.iter().map(|p| p.1).collect();
        assert_eq!(a, [true, false, true, false, true]);
        let (_, out) = endgame_2xor(&wf, 5.0);
        assert_eq!(out.unwrap_err(), EndgameFailure::OversizedComponent { size: 5, limit: 5.0 });
    }

    #[test]
    fn isolated_vertices_are_singletons() {
        let wf = WorkingFormula::new(&EcInstance::new::<[usize; 3]>(4, 3, &[]).unwrap());
        let (stats, out) = endgame_2xor(&wf, 2.0);
        let c = out.unwrap();
        assert_eq!(c.components, vec![vec![0], vec![1], vec![2], vec![3]]);
        assert_eq!(stats.mean_degree(), 0.0);
    }
}
