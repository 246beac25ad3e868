//! Well-foundedness theory: the true edges of each wf group must form an
//! acyclic graph. On a finite node set this is exactly the existence of a
//! level function into `[0, nodes - 1]` that decreases along every edge.

use crate::horn::GroundSystem;

#[derive(Debug, Clone)]
pub(crate) struct Edge {
    pub var: u32,
    pub from: u32,
    pub to: u32,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Group {
    pub nodes: usize,
    pub edges: Vec<Edge>,
    /// Outgoing edge indices per node.
    pub out: Vec<Vec<u32>>,
}

/// Edge lookup by solver variable: (group, edge index).
#[derive(Debug, Clone, Default)]
pub(crate) struct Theory {
    pub groups: Vec<Group>,
    pub edge_of: Vec<Option<(u32, u32)>>,
    stack: Vec<(u32, usize)>,
    visited: Vec<u32>,
    stamp: u32,
}

impl Theory {
    pub fn new(gs: &GroundSystem, num_vars: usize) -> Theory {
        let mut t = Theory {
            edge_of: vec![None; num_vars],
            ..Default::default()
        };
        for (gi, g) in gs.wf.iter().enumerate() {
            let mut group = Group {
                nodes: g.tuples.len(),
                edges: Vec::new(),
                out: vec![Vec::new(); g.tuples.len()],
            };
            for &(atom, from, to) in &g.edges {
                let ei = group.edges.len() as u32;
                group.edges.push(Edge {
                    var: atom as u32,
                    from: from as u32,
                    to: to as u32,
                });
                group.out[from].push(ei);
                t.edge_of[atom] = Some((gi as u32, ei));
            }
            t.groups.push(group);
        }
        let max_nodes = t.groups.iter().map(|g| g.nodes).max().unwrap_or(0);
        t.visited = vec![0; max_nodes];
        t
    }

    /// When edge `e` of group `g` is true, looks for a path of true edges from
    /// its target back to its source. Returns the variables of the cycle.
    pub fn cycle_through(&mut self, g: u32, e: u32, is_true: impl Fn(u32) -> bool) -> Option<Vec<u32>> {
        let Theory {
            groups,
            stack,
            visited,
            stamp,
            ..
        } = self;
        let group = &groups[g as usize];
        let edge = &group.edges[e as usize];
        if edge.from == edge.to {
            return Some(vec![edge.var]);
        }
        *stamp = stamp.wrapping_add(1);
        if *stamp == 0 {
            visited.iter_mut().for_each(|v| *v = 0);
            *stamp = 1;
        }
        let target = edge.from;
        stack.clear();
        stack.push((edge.to, 0));
        visited[edge.to as usize] = *stamp;
        // Iterative DFS; `stack` is the current path as (node, next out-edge
        // cursor) and `path` the edges between consecutive stack entries.
        let mut path: Vec<u32> = Vec::new();
        while let Some(&(node, cursor)) = stack.last() {
            let outs = &group.out[node as usize];
            if cursor >= outs.len() {
                stack.pop();
                path.pop();
                continue;
            }
            stack.last_mut().unwrap().1 += 1;
            let ei = outs[cursor];
            let ed = &group.edges[ei as usize];
            if !is_true(ed.var) {
                continue;
            }
            if ed.to == target {
                path.push(ei);
                let mut cycle: Vec<u32> = path.iter().map(|&i| group.edges[i as usize].var).collect();
                cycle.push(edge.var);
                return Some(cycle);
            }
            if visited[ed.to as usize] != *stamp {
                visited[ed.to as usize] = *stamp;
                path.push(ei);
                stack.push((ed.to, 0));
            }
        }
        None
    }

    /// Longest-path levels over the true edges of an acyclic group.
    pub fn levels(&self, g: usize, is_true: impl Fn(u32) -> bool) -> Vec<usize> {
        let group = &self.groups[g];
        let mut level: Vec<Option<usize>> = vec![None; group.nodes];
        for start in 0..group.nodes {
            if level[start].is_some() {
                continue;
            }
            // Post-order DFS.
            let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
            while let Some(&(node, cursor)) = stack.last() {
                let outs = &group.out[node];
                if cursor < outs.len() {
                    let ed = &group.edges[outs[cursor] as usize];
                    stack.last_mut().unwrap().1 += 1;
                    if is_true(ed.var) && level[ed.to as usize].is_none() {
                        stack.push((ed.to as usize, 0));
                    }
                } else {
                    let l = outs
                        .iter()
                        .map(|&ei| &group.edges[ei as usize])
                        .filter(|ed| is_true(ed.var))
                        .map(|ed| level[ed.to as usize].expect("acyclic") + 1)
                        .max()
                        .unwrap_or(0);
                    level[node] = Some(l);
                    stack.pop();
                }
            }
        }
        level.into_iter().map(|l| l.unwrap()).collect()
    }
}
