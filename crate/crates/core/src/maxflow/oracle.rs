use alloc::vec;
use alloc::vec::Vec;

use super::{check_terminals, Capacity, FlowError, Network};

pub const ORACLE_MAX_EDGES: usize = 16;

/// Minimum of `V(E)` over every edge set `E` separating `sources` from
/// `sinks`, by exhaustive enumeration.
pub fn min_cut_bruteforce<G: Network, C: Capacity>(
    graph: &G,
    caps: &[C],
    sources: &[usize],
    sinks: &[usize],
) -> Result<C, FlowError> {
    let edges = graph.edge_list();
    if edges.len() > ORACLE_MAX_EDGES {
        return Err(FlowError::OracleSize { edges: edges.len() });
    }
    let role = check_terminals(graph.vertex_count(), sources, sinks)?;
    let mut best: Option<C> = None;
    let mut seen = vec![false; graph.vertex_count()];
    let mut stack = Vec::new();
    for mask in 0u32..(1u32 << edges.len()) {
        let weight = (0..edges.len())
            .filter(|e| mask & (1 << e) != 0)
            .fold(C::ZERO, |acc, e| acc + caps[e]);
        if best.is_some_and(|b| weight >= b) {
            continue;
        }
        seen.fill(false);
        stack.clear();
        for &s in sources {
            seen[s] = true;
            stack.push(s);
        }
        let mut separated = true;
        'search: while let Some(u) = stack.pop() {
            for (e, &[a, b]) in edges.iter().enumerate() {
                if mask & (1 << e) != 0 {
                    continue;
                }
                let (a, b) = (a as usize, b as usize);
                let next = if a == u {
                    b
                } else if b == u {
                    a
                } else {
                    continue;
                };
                if !seen[next] {
                    if role[next] == 2 {
                        separated = false;
                        break 'search;
                    }
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        if separated {
            best = Some(weight);
        }
    }
    Ok(best.unwrap_or(C::ZERO))
}
