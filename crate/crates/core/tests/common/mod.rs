//! Independent width oracles over the overlay map, using only its public
//! adjacency data.
#![allow(dead_code)]

use std::collections::VecDeque;

use normpair::overlay::{Overlay, Sign};
use normpair::width::Width;

fn adjacency(ov: &Overlay) -> Vec<Vec<usize>> {
    let h = ov.h();
    let mut adj = vec![Vec::new(); h.vertex_count()];
    for e in 0..h.edge_count() {
        let [a, b] = h.endpoints(e);
        adj[a].push(b);
        adj[b].push(a);
    }
    adj
}

fn signed(ov: &Overlay, v: usize, s: Sign) -> bool {
    ov.role(v).sign() == Some(s)
}

/// Plain BFS from every positive vertex, one source at a time.
pub fn bfs_width(ov: &Overlay) -> Width {
    let adj = adjacency(ov);
    let n = adj.len();
    let mut best: Option<usize> = None;
    for s in (0..n).filter(|&v| signed(ov, v, Sign::Positive)) {
        let mut dist = vec![usize::MAX; n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if signed(ov, u, Sign::Negative) {
                best = Some(best.map_or(dist[u], |b| b.min(dist[u])));
                break;
            }
            for &w in &adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    best.map_or(Width::Infinite, Width::Finite)
}

/// Enumerates every simple path that starts at a positive vertex.
pub fn exhaustive_width(ov: &Overlay) -> Width {
    let adj = adjacency(ov);
    let n = adj.len();
    let mut best: Option<usize> = None;
    let mut on_path = vec![false; n];
    fn dfs(
        ov: &Overlay,
        adj: &[Vec<usize>],
        u: usize,
        len: usize,
        on_path: &mut [bool],
        best: &mut Option<usize>,
    ) {
        if signed(ov, u, Sign::Negative) {
            *best = Some(best.map_or(len, |b| b.min(len)));
            return;
        }
        on_path[u] = true;
        for &w in &adj[u] {
            if !on_path[w] {
                dfs(ov, adj, w, len + 1, on_path, best);
            }
        }
        on_path[u] = false;
    }
    for s in (0..n).filter(|&v| signed(ov, v, Sign::Positive)) {
        dfs(ov, &adj, s, 0, &mut on_path, &mut best);
    }
    best.map_or(Width::Infinite, Width::Finite)
}
