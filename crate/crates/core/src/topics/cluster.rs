//! Hierarchical density clustering (mutual-reachability minimum spanning
//! tree, condensed by minimum cluster size, excess-of-mass selection),
//! followed by nearest-centroid merging down to a topic budget.

use super::{TopicModelConfig, OUTLIER};

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Distances below this are treated as this, so that lambda = 1/d stays finite.
const MIN_DISTANCE: f64 = 1e-12;

struct Merge {
    left: usize,
    right: usize,
    distance: f64,
    size: usize,
}

struct CondensedCluster {
    parent: Option<usize>,
    birth: f64,
    stability: f64,
    children: Vec<usize>,
}

/// Labels each point with a cluster index, or `None` for noise.
///
/// `min_samples` sets the neighbourhood used for core distances (the point
/// itself counts as its first neighbour).
pub fn hdbscan(points: &[Vec<f64>], min_cluster_size: usize, min_samples: usize) -> Vec<Option<usize>> {
    let n = points.len();
    if n < min_cluster_size || n < 2 {
        return vec![None; n];
    }
    let k = min_samples.clamp(1, n);

    let dist: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| euclidean(&points[i], &points[j])).collect())
        .collect();
    let core: Vec<f64> = dist
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.sort_by(f64::total_cmp);
            r[k - 1]
        })
        .collect();
    let reach = |i: usize, j: usize| dist[i][j].max(core[i]).max(core[j]);

    // Prim's algorithm on the dense mutual-reachability graph.
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(n - 1);
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let d = reach(current, j);
            if d < best[j] {
                best[j] = d;
                from[j] = current;
            }
            if next == usize::MAX || best[j] < best[next] {
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push((best[next], from[next].min(next), from[next].max(next)));
        current = next;
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    // Single-linkage dendrogram; node ids >= n are merges.
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut sizes = vec![1usize; 2 * n - 1];
    let mut merges: Vec<Merge> = Vec::with_capacity(n - 1);
    for (w, a, b) in edges {
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        let id = n + merges.len();
        parent[ra] = id;
        parent[rb] = id;
        sizes[id] = sizes[ra] + sizes[rb];
        merges.push(Merge {
            left: ra,
            right: rb,
            distance: w,
            size: sizes[id],
        });
    }
    let node_size = |node: usize| if node < n { 1 } else { merges[node - n].size };
    let leaves_of = |node: usize| {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            if x < n {
                out.push(x);
            } else {
                stack.push(merges[x - n].right);
                stack.push(merges[x - n].left);
            }
        }
        out
    };

    // Condense: walk down from the root, keeping a cluster alive while only
    // small pieces split off.
    let mut clusters = vec![CondensedCluster {
        parent: None,
        birth: 0.0,
        stability: 0.0,
        children: Vec::new(),
    }];
    let mut fell_from = vec![0usize; n];
    let mut stack = vec![(2 * n - 2, 0usize)];
    while let Some((node, c)) = stack.pop() {
        if node < n {
            // single point reached with its cluster still alive
            fell_from[node] = c;
            continue;
        }
        let m = &merges[node - n];
        let lambda = 1.0 / m.distance.max(MIN_DISTANCE);
        let birth = clusters[c].birth;
        let (l, r) = (m.left, m.right);
        let (sl, sr) = (node_size(l), node_size(r));
        let big_l = sl >= min_cluster_size;
        let big_r = sr >= min_cluster_size;
        if big_l && big_r {
            clusters[c].stability += (lambda - birth) * (sl + sr) as f64;
            for child in [r, l] {
                let id = clusters.len();
                clusters.push(CondensedCluster {
                    parent: Some(c),
                    birth: lambda,
                    stability: 0.0,
                    children: Vec::new(),
                });
                clusters[c].children.push(id);
                stack.push((child, id));
            }
        } else {
            for (child, big) in [(l, big_l), (r, big_r)] {
                if big {
                    stack.push((child, c));
                } else {
                    for p in leaves_of(child) {
                        fell_from[p] = c;
                    }
                    clusters[c].stability += (lambda - birth) * node_size(child) as f64;
                }
            }
        }
    }

    // Excess-of-mass selection; the root is never selected.
    let mut selected = vec![false; clusters.len()];
    let mut best_stability: Vec<f64> = clusters.iter().map(|c| c.stability).collect();
    for c in (1..clusters.len()).rev() {
        let subtree: f64 = clusters[c].children.iter().map(|&ch| best_stability[ch]).sum();
        if clusters[c].children.is_empty() || clusters[c].stability >= subtree {
            selected[c] = true;
            let mut stack = clusters[c].children.clone();
            while let Some(d) = stack.pop() {
                selected[d] = false;
                stack.extend(clusters[d].children.iter().copied());
            }
        } else {
            best_stability[c] = subtree;
        }
    }

    let ordered: Vec<usize> = (0..clusters.len()).filter(|&c| selected[c]).collect();
    (0..n)
        .map(|p| {
            let mut c = Some(fell_from[p]);
            while let Some(id) = c {
                if selected[id] {
                    return ordered.iter().position(|&s| s == id);
                }
                c = clusters[id].parent;
            }
            None
        })
        .collect()
}

fn centroid(points: &[Vec<f64>], members: &[usize]) -> Vec<f64> {
    let dim = points[members[0]].len();
    let mut c = vec![0.0; dim];
    for &m in members {
        c.iter_mut().zip(&points[m]).for_each(|(a, b)| *a += b);
    }
    c.iter_mut().for_each(|a| *a /= members.len() as f64);
    c
}

/// Density clustering with the topic budget applied. Returns a topic id per
/// point (`-1` for noise); ids are ordered by cluster size, largest first.
pub fn cluster(points: &[Vec<f64>], config: &TopicModelConfig) -> Vec<i64> {
    let raw = hdbscan(points, config.min_cluster_size, config.min_cluster_size);
    let n_clusters = raw.iter().flatten().max().map_or(0, |&m| m + 1);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n_clusters];
    for (p, l) in raw.iter().enumerate() {
        if let Some(l) = l {
            groups[*l].push(p);
        }
    }

    while groups.len() > config.n_topics_target {
        let smallest = (0..groups.len())
            .min_by_key(|&g| (groups[g].len(), groups[g][0]))
            .unwrap();
        let c = centroid(points, &groups[smallest]);
        let target = (0..groups.len())
            .filter(|&g| g != smallest)
            .min_by(|&a, &b| {
                let da = euclidean(&c, &centroid(points, &groups[a]));
                let db = euclidean(&c, &centroid(points, &groups[b]));
                da.total_cmp(&db).then(groups[a][0].cmp(&groups[b][0]))
            })
            .unwrap();
        let moved = std::mem::take(&mut groups[smallest]);
        groups[target].extend(moved);
        groups[target].sort_unstable();
        groups.remove(smallest);
    }

    groups.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let mut labels = vec![OUTLIER; points.len()];
    for (id, g) in groups.iter().enumerate() {
        for &p in g {
            labels[p] = id as i64;
        }
    }
    labels
}
