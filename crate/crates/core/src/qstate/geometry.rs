use crate::error::{Error, Result};

/// What kind of lattice the sites live on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatticeKind {
    /// 1D ring with periodic distance.
    Ring,
    /// 1D open chain.
    Chain,
    /// Edges of an Lx x Ly square torus; two edges are adjacent when they
    /// share a vertex. Edge (x, y, horizontal) has index `2*(y*lx + x)`,
    /// edge (x, y, vertical) has index `2*(y*lx + x) + 1`.
    TorusEdges { lx: usize, ly: usize },
    /// Abstract site list; all distinct sites at distance 1.
    Sites,
    /// A base lattice extended by ancilla sites, each attached to one base
    /// site at distance 1.
    WithAncillas { base_sites: usize },
}

/// An indexed set of qudit sites with a graph metric.
#[derive(Debug, Clone)]
pub struct LatticeGeometry {
    kind: LatticeKind,
    dims: Vec<usize>,
    dist: Vec<Vec<u32>>,
    /// Ball-growth constants: |B(j, alpha)| <= kappa * alpha^d.
    growth_kappa: f64,
    growth_dim: u32,
}

fn all_pairs_bfs(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<u32>> {
    let mut dist = vec![vec![u32::MAX; n]; n];
    for start in 0..n {
        let d = &mut dist[start];
        d[start] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if d[v] == u32::MAX {
                    d[v] = d[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    dist
}

impl LatticeGeometry {
    fn from_adjacency(
        kind: LatticeKind,
        dims: Vec<usize>,
        adj: Vec<Vec<usize>>,
        kappa: f64,
        d: u32,
    ) -> Self {
        let dist = all_pairs_bfs(dims.len(), &adj);
        LatticeGeometry {
            kind,
            dims,
            dist,
            growth_kappa: kappa,
            growth_dim: d,
        }
    }

    /// 1D ring of `n` sites, all with the same local dimension.
    pub fn ring(n: usize, local_dim: usize) -> Self {
        assert!(n >= 1 && local_dim >= 2);
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                if n == 1 {
                    vec![]
                } else {
                    vec![(i + 1) % n, (i + n - 1) % n]
                }
            })
            .collect();
        Self::from_adjacency(LatticeKind::Ring, vec![local_dim; n], adj, 2.0, 1)
    }

    /// 1D open chain of `n` sites.
    pub fn chain(n: usize, local_dim: usize) -> Self {
        assert!(n >= 1 && local_dim >= 2);
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut a = vec![];
                if i + 1 < n {
                    a.push(i + 1);
                }
                if i > 0 {
                    a.push(i - 1);
                }
                a
            })
            .collect();
        Self::from_adjacency(LatticeKind::Chain, vec![local_dim; n], adj, 2.0, 1)
    }

    /// Abstract site list with per-site dimensions; all pairs at distance 1.
    pub fn sites(dims: Vec<usize>) -> Self {
        let n = dims.len();
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).collect())
            .collect();
        Self::from_adjacency(LatticeKind::Sites, dims, adj, n as f64, 0)
    }

    /// Qudits on the edges of an Lx x Ly torus.
    pub fn torus_edges(lx: usize, ly: usize, local_dim: usize) -> Self {
        assert!(lx >= 2 && ly >= 2 && local_dim >= 2);
        let n = 2 * lx * ly;
        let h = |x: usize, y: usize| 2 * (y * lx + x);
        let v = |x: usize, y: usize| 2 * (y * lx + x) + 1;
        // Vertex (x, y) touches h(x,y), h(x-1,y), v(x,y), v(x,y-1).
        let mut vertex_edges = vec![];
        for y in 0..ly {
            for x in 0..lx {
                vertex_edges.push(vec![
                    h(x, y),
                    h((x + lx - 1) % lx, y),
                    v(x, y),
                    v(x, (y + ly - 1) % ly),
                ]);
            }
        }
        let mut adj = vec![std::collections::BTreeSet::new(); n];
        for es in &vertex_edges {
            for &a in es {
                for &b in es {
                    if a != b {
                        adj[a].insert(b);
                    }
                }
            }
        }
        let adj: Vec<Vec<usize>> = adj.into_iter().map(|s| s.into_iter().collect()).collect();
        Self::from_adjacency(
            LatticeKind::TorusEdges { lx, ly },
            vec![local_dim; n],
            adj,
            8.0,
            2,
        )
    }

    /// Extend this geometry with ancilla sites. Ancilla `k` (with local
    /// dimension `dims[k]`) is attached to base site `attach[k]`.
    pub fn with_ancillas(&self, dims: &[usize], attach: &[usize]) -> Result<Self> {
        assert_eq!(dims.len(), attach.len());
        let nb = self.n_sites();
        if let Some(&bad) = attach.iter().find(|&&a| a >= nb) {
            return Err(Error::UnknownSites(vec![bad]));
        }
        let n = nb + dims.len();
        let mut adj: Vec<Vec<usize>> = (0..n).map(|_| vec![]).collect();
        for i in 0..nb {
            for j in 0..nb {
                if i != j && self.dist[i][j] == 1 {
                    adj[i].push(j);
                }
            }
        }
        for (k, &a) in attach.iter().enumerate() {
            adj[nb + k].push(a);
            adj[a].push(nb + k);
        }
        let mut all_dims = self.dims.clone();
        all_dims.extend_from_slice(dims);
        let per_site = 1 + attach.iter().filter(|&&a| attach.contains(&a)).count();
        Ok(Self::from_adjacency(
            LatticeKind::WithAncillas { base_sites: nb },
            all_dims,
            adj,
            self.growth_kappa * (1 + per_site) as f64,
            self.growth_dim,
        ))
    }

    pub fn kind(&self) -> &LatticeKind {
        &self.kind
    }

    pub fn n_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn local_dim(&self, site: usize) -> usize {
        self.dims[site]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total Hilbert-space dimension.
    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Dimension of the tensor factor spanned by `sites`.
    pub fn dim_of(&self, sites: &[usize]) -> usize {
        sites.iter().map(|&s| self.dims[s]).product()
    }

    /// Row-major strides: site 0 is the slowest digit.
    pub fn strides(&self) -> Vec<usize> {
        let n = self.n_sites();
        let mut s = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.dims[i + 1];
        }
        s
    }

    /// Graph distance between two sites.
    pub fn distance(&self, i: usize, j: usize) -> usize {
        self.dist[i][j] as usize
    }

    /// Open ball `B(j, alpha) = { i : d(i, j) < alpha }`.
    pub fn ball(&self, center: usize, alpha: usize) -> Vec<usize> {
        (0..self.n_sites())
            .filter(|&i| (self.dist[center][i] as usize) < alpha)
            .collect()
    }

    /// Closed neighborhood of a site set: `{ i : d(i, S) <= ell }`.
    pub fn fattened(&self, sites: &[usize], ell: usize) -> Vec<usize> {
        (0..self.n_sites())
            .filter(|&i| sites.iter().any(|&s| (self.dist[s][i] as usize) <= ell))
            .collect()
    }

    pub fn diameter(&self) -> usize {
        self.dist
            .iter()
            .flat_map(|row| row.iter())
            .copied()
            .max()
            .unwrap_or(0) as usize
    }

    /// Maximum pairwise distance within a site set.
    pub fn set_diameter(&self, sites: &[usize]) -> usize {
        let mut d = 0;
        for &a in sites {
            for &b in sites {
                d = d.max(self.dist[a][b] as usize);
            }
        }
        d
    }

    pub fn growth_constants(&self) -> (f64, u32) {
        (self.growth_kappa, self.growth_dim)
    }

    pub fn contains_sites(&self, sites: &[usize]) -> bool {
        sites.iter().all(|&s| s < self.n_sites())
    }

    /// Restriction to a subset of sites (ascending order), inheriting the
    /// induced metric. Used for ball-local computations.
    pub fn sub_geometry(&self, sites: &[usize]) -> Result<Self> {
        if !self.contains_sites(sites) {
            return Err(Error::UnknownSites(sites.to_vec()));
        }
        let mut sorted = sites.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let dims = sorted.iter().map(|&s| self.dims[s]).collect::<Vec<_>>();
        let n = sorted.len();
        let mut dist = vec![vec![0u32; n]; n];
        for a in 0..n {
            for b in 0..n {
                dist[a][b] = self.dist[sorted[a]][sorted[b]];
            }
        }
        Ok(LatticeGeometry {
            kind: LatticeKind::Sites,
            dims,
            dist,
            growth_kappa: self.growth_kappa,
            growth_dim: self.growth_dim,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_metric_axioms() {
        let g = LatticeGeometry::ring(8, 2);
        for i in 0..8 {
            assert_eq!(g.distance(i, i), 0);
            for j in 0..8 {
                assert_eq!(g.distance(i, j), g.distance(j, i));
                for k in 0..8 {
                    assert!(g.distance(i, k) <= g.distance(i, j) + g.distance(j, k));
                }
            }
        }
        assert_eq!(g.distance(0, 4), 4);
        assert_eq!(g.distance(0, 7), 1);
        assert_eq!(g.diameter(), 4);
    }

    #[test]
    fn ball_growth_bounded() {
        for g in [
            LatticeGeometry::ring(10, 2),
            LatticeGeometry::chain(9, 3),
            LatticeGeometry::torus_edges(3, 3, 2),
        ] {
            let (kappa, d) = g.growth_constants();
            for j in 0..g.n_sites() {
                let mut prev = 0;
                for alpha in 1..=g.diameter() + 2 {
                    let b = g.ball(j, alpha).len();
                    assert!(b >= prev, "ball size must be nondecreasing");
                    assert!(
                        (b as f64) <= kappa * (alpha as f64).powi(d as i32),
                        "|B({j},{alpha})| = {b} exceeds {kappa} * alpha^{d}"
                    );
                    prev = b;
                }
            }
        }
    }

    #[test]
    fn torus_edge_adjacency() {
        let g = LatticeGeometry::torus_edges(2, 2, 2);
        assert_eq!(g.n_sites(), 8);
        assert_eq!(g.total_dim(), 256);
        // h(0,0) and v(0,0) share vertex (0,0).
        assert_eq!(g.distance(0, 1), 1);
    }

    #[test]
    fn ancilla_attachment() {
        let g = LatticeGeometry::ring(4, 2);
        let ext = g.with_ancillas(&[5, 5], &[0, 2]).unwrap();
        assert_eq!(ext.n_sites(), 6);
        assert_eq!(ext.distance(4, 0), 1);
        assert_eq!(ext.distance(4, 2), 3);
        assert_eq!(ext.distance(4, 5), 4);
        assert!(g.with_ancillas(&[3], &[9]).is_err());
    }

    #[test]
    fn strides_follow_site_order() {
        let g = LatticeGeometry::sites(vec![2, 3, 4]);
        assert_eq!(g.strides(), vec![12, 4, 1]);
        assert_eq!(g.total_dim(), 24);
    }
}
