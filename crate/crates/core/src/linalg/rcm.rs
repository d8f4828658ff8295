use std::collections::VecDeque;

/// Reverse Cuthill-McKee ordering of the node graph whose cliques are the
/// element node lists. Returns node ids in elimination order.
pub fn reverse_cuthill_mckee(n_nodes: usize, elements: &[[usize; 9]]) -> Vec<usize> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
    for el in elements {
        for &a in el {
            for &b in el {
                if a != b {
                    adj[a].push(b);
                }
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    let mut visited = vec![false; n_nodes];
    let mut order = Vec::with_capacity(n_nodes);
    while order.len() < n_nodes {
        // Each connected component starts from a pseudo-peripheral node.
        let seed = (0..n_nodes)
            .filter(|&v| !visited[v])
            .min_by_key(|&v| degree[v])
            .expect("unvisited node");
        let start = pseudo_peripheral(seed, &adj);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(start: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    level[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let l = level[v].unwrap();
        for &w in &adj[v] {
            if level[w].is_none() {
                level[w] = Some(l + 1);
                queue.push_back(w);
            }
        }
    }
    level
}

fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>]) -> usize {
    let mut current = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let levels = bfs_levels(current, adj);
        let (far, depth) = levels
            .iter()
            .enumerate()
            .filter_map(|(v, l)| l.map(|l| (v, l)))
            .max_by_key(|&(v, l)| (l, std::cmp::Reverse(adj[v].len())))
            .unwrap();
        if depth <= ecc {
            break;
        }
        ecc = depth;
        current = far;
    }
    current
}
