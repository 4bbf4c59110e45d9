use std::collections::VecDeque;

use super::csr::CsrMatrix;

/// Reverse Cuthill-McKee ordering of the pattern of `A + A^T`, as
/// `perm[new] = old`. Each connected component starts from its unvisited
/// vertex of minimum degree (lowest index on ties); neighbors are queued by
/// increasing degree, then index.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &j in a.row(i).0 {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&u| !visited[u]).collect();
            next.sort_by_key(|&u| (degree[u], u));
            for u in next {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

/// `max |i - j|` over stored entries.
pub fn bandwidth(a: &CsrMatrix) -> usize {
    (0..a.n())
        .flat_map(|i| a.row(i).0.iter().map(move |&j| i.abs_diff(j)))
        .max()
        .unwrap_or(0)
}
