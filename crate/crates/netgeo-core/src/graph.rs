//! Simple undirected networks with 0/1 adjacency, their text formats,
//! permutation actions and isomorphism verification.
//!
//! Vertex indices are 1-based in file formats and diagnostics; the Rust API
//! uses 0-based indices throughout.

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("vertex count must be positive")]
    ZeroVertices,
    #[error("clique size {m} out of range 1..={n}")]
    CliqueSizeOutOfRange { m: usize, n: usize },
    #[error("line {line}: malformed input: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: vertex index {index} out of range 1..={n}")]
    VertexOutOfRange { line: usize, index: u64, n: usize },
    #[error("line {line}: self-loop at vertex {vertex} is not allowed")]
    SelfLoop { line: usize, vertex: usize },
    #[error("adjacency matrix asymmetric at entries ({i},{j}) and ({j},{i})")]
    Asymmetric { i: usize, j: usize },
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("not a bijection on 1..={0}")]
    NotBijective(usize),
    #[error("isomorphism search is limited to n <= 8, got n = {n}")]
    SearchBound { n: usize },
}

/// Input text formats understood by [`Network::parse`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    AdjacencyMatrix,
}

/// Simple undirected network: `n` vertices and a symmetric 0/1 adjacency
/// with zero diagonal. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    n: usize,
    adj: Vec<u8>,
}

impl Network {
    /// Network on `n >= 1` vertices with no edges.
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::ZeroVertices);
        }
        Ok(Network { n, adj: vec![0; n * n] })
    }

    /// Clique on the first `m` vertices (`1 <= m <= n`), remaining vertices
    /// isolated. `m = k + 1` gives the k-simplex network.
    pub fn clique(n: usize, m: usize) -> Result<Self, GraphError> {
        let mut net = Self::empty(n)?;
        if m < 1 || m > n {
            return Err(GraphError::CliqueSizeOutOfRange { m, n });
        }
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    net.adj[i * n + j] = 1;
                }
            }
        }
        Ok(net)
    }

    /// Build from 0-based edge pairs; duplicates collapse, self-loops are
    /// rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut net = Self::empty(n)?;
        for (line, &(i, j)) in edges.iter().enumerate() {
            if i >= n || j >= n {
                return Err(GraphError::VertexOutOfRange {
                    line: line + 1,
                    index: i.max(j) as u64 + 1,
                    n,
                });
            }
            if i == j {
                return Err(GraphError::SelfLoop { line: line + 1, vertex: i + 1 });
            }
            net.adj[i * n + j] = 1;
            net.adj[j * n + i] = 1;
        }
        Ok(net)
    }

    /// Parse the edge-list or adjacency-matrix text format. `#` starts a
    /// comment running to end of line; vertex indices are 1-based.
    pub fn parse(text: &str, format: GraphFormat) -> Result<Self, GraphError> {
        // (1-based line number, tokens) for lines with content after
        // comment stripping
        let lines: Vec<(usize, Vec<&str>)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| {
                let body = l.split('#').next().unwrap_or("");
                (i + 1, body.split_whitespace().collect::<Vec<_>>())
            })
            .filter(|(_, toks)| !toks.is_empty())
            .collect();

        let Some((first_line, first_toks)) = lines.first() else {
            return Err(GraphError::Malformed { line: 1, msg: "missing vertex count".into() });
        };
        if first_toks.len() != 1 {
            return Err(GraphError::Malformed {
                line: *first_line,
                msg: "expected the vertex count alone on the first line".into(),
            });
        }
        let n: usize = first_toks[0].parse().map_err(|_| GraphError::Malformed {
            line: *first_line,
            msg: format!("invalid vertex count '{}'", first_toks[0]),
        })?;
        if n == 0 {
            return Err(GraphError::ZeroVertices);
        }

        match format {
            GraphFormat::EdgeList => Self::parse_edge_lines(n, &lines[1..]),
            GraphFormat::AdjacencyMatrix => Self::parse_adjacency_rows(n, &lines[1..]),
        }
    }

    fn parse_edge_lines(n: usize, lines: &[(usize, Vec<&str>)]) -> Result<Self, GraphError> {
        let mut net = Self::empty(n)?;
        for (line, toks) in lines {
            if toks.len() != 2 {
                return Err(GraphError::Malformed {
                    line: *line,
                    msg: format!("expected two vertex indices, got {} token(s)", toks.len()),
                });
            }
            let mut pair = [0usize; 2];
            for (slot, tok) in pair.iter_mut().zip(toks) {
                let v: u64 = tok.parse().map_err(|_| GraphError::Malformed {
                    line: *line,
                    msg: format!("invalid vertex index '{tok}'"),
                })?;
                if v < 1 || v > n as u64 {
                    return Err(GraphError::VertexOutOfRange { line: *line, index: v, n });
                }
                *slot = (v - 1) as usize;
            }
            if pair[0] == pair[1] {
                return Err(GraphError::SelfLoop { line: *line, vertex: pair[0] + 1 });
            }
            net.adj[pair[0] * n + pair[1]] = 1;
            net.adj[pair[1] * n + pair[0]] = 1;
        }
        Ok(net)
    }

    fn parse_adjacency_rows(n: usize, lines: &[(usize, Vec<&str>)]) -> Result<Self, GraphError> {
        if lines.len() != n {
            let line = lines.last().map(|(l, _)| *l).unwrap_or(1);
            return Err(GraphError::Malformed {
                line,
                msg: format!("expected {n} adjacency rows, got {}", lines.len()),
            });
        }
        let mut net = Self::empty(n)?;
        for (row, (line, toks)) in lines.iter().enumerate() {
            if toks.len() != n {
                return Err(GraphError::Malformed {
                    line: *line,
                    msg: format!("expected {n} entries in row {}, got {}", row + 1, toks.len()),
                });
            }
            for (col, tok) in toks.iter().enumerate() {
                let v = match *tok {
                    "0" => 0u8,
                    "1" => 1u8,
                    other => {
                        return Err(GraphError::Malformed {
                            line: *line,
                            msg: format!("adjacency entries must be 0 or 1, got '{other}'"),
                        })
                    }
                };
                if row == col && v != 0 {
                    return Err(GraphError::SelfLoop { line: *line, vertex: row + 1 });
                }
                net.adj[row * n + col] = v;
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if net.adj[i * n + j] != net.adj[j * n + i] {
                    return Err(GraphError::Asymmetric { i: i + 1, j: j + 1 });
                }
            }
        }
        Ok(net)
    }

    /// Serialize as edge-list text (1-based, edges sorted, i < j).
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for (i, j) in self.edges() {
            out.push_str(&format!("{} {}\n", i + 1, j + 1));
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j] != 0
    }

    /// Edges as 0-based pairs with i < j, ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.adj[i * self.n + j] != 0 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|&v| v as usize).sum::<usize>() / 2
    }

    pub(crate) fn adj_slice(&self) -> &[u8] {
        &self.adj
    }

    /// Relabel vertices: vertex `i` becomes `p(i)`; the result has adjacency
    /// `P A P^t`.
    pub fn permuted(&self, p: &Permutation) -> Result<Network, GraphError> {
        if p.len() != self.n {
            return Err(GraphError::SizeMismatch { expected: self.n, got: p.len() });
        }
        let n = self.n;
        let mut adj = vec![0u8; n * n];
        for i in 0..n {
            for j in 0..n {
                adj[p.apply(i) * n + p.apply(j)] = self.adj[i * n + j];
            }
        }
        Ok(Network { n, adj })
    }

    /// True iff relabeling `a` by `p` yields exactly `b`'s adjacency.
    pub fn verify_isomorphism(a: &Network, b: &Network, p: &Permutation) -> Result<bool, GraphError> {
        if a.n != b.n {
            return Err(GraphError::SizeMismatch { expected: a.n, got: b.n });
        }
        Ok(a.permuted(p)? == *b)
    }

    /// Exhaustive isomorphism search, bounded at n <= 8 (factorial cost).
    /// Intended for tests and the CLI `iso-check` command; the library
    /// contract is verification under a supplied permutation.
    pub fn find_isomorphism_bruteforce(
        a: &Network,
        b: &Network,
    ) -> Result<Option<Permutation>, GraphError> {
        if a.n != b.n {
            return Err(GraphError::SizeMismatch { expected: a.n, got: b.n });
        }
        if a.n > 8 {
            return Err(GraphError::SearchBound { n: a.n });
        }
        if a.edge_count() != b.edge_count() {
            return Ok(None);
        }
        let n = a.n;
        let mut mapping: Vec<usize> = (0..n).collect();
        loop {
            if mapping_matches(a, b, &mapping) {
                return Ok(Some(Permutation { map: mapping }));
            }
            if !next_permutation(&mut mapping) {
                return Ok(None);
            }
        }
    }

    /// Erdos-Renyi style random network: each edge present independently
    /// with probability `p`.
    pub fn random_gnp<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<Network, GraphError> {
        let mut net = Self::empty(n)?;
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random_bool(p) {
                    net.adj[i * n + j] = 1;
                    net.adj[j * n + i] = 1;
                }
            }
        }
        Ok(net)
    }
}

#[inline]
fn mapping_matches(a: &Network, b: &Network, map: &[usize]) -> bool {
    let n = a.n;
    for i in 0..n {
        for j in (i + 1)..n {
            if a.adj[i * n + j] != b.adj[map[i] * n + map[j]] {
                return false;
            }
        }
    }
    true
}

/// Lexicographic next permutation; false once the sequence is exhausted.
fn next_permutation(m: &mut [usize]) -> bool {
    let n = m.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && m[i - 1] >= m[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while m[j] <= m[i - 1] {
        j -= 1;
    }
    m.swap(i - 1, j);
    m[i..].reverse();
    true
}

/// Bijection on the vertex set; `apply(i)` is the image of vertex `i`
/// (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { map: (0..n).collect() }
    }

    /// From a 0-based image list: `map[i]` is where vertex `i` goes.
    pub fn from_mapping(map: Vec<usize>) -> Result<Self, GraphError> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n || seen[v] {
                return Err(GraphError::NotBijective(n));
            }
            seen[v] = true;
        }
        Ok(Permutation { map })
    }

    /// From 1-based indices as they appear in files and diagnostics.
    pub fn from_one_based(map: &[usize]) -> Result<Self, GraphError> {
        let n = map.len();
        if map.iter().any(|&v| v < 1 || v > n) {
            return Err(GraphError::NotBijective(n));
        }
        Self::from_mapping(map.iter().map(|&v| v - 1).collect())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn mapping(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { map: inv }
    }

    /// Composition `self . other`: first apply `other`, then `self`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.len(), other.len(), "permutation length mismatch");
        Permutation { map: other.map.iter().map(|&v| self.map[v]).collect() }
    }

    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Permutation {
        let mut map: Vec<usize> = (0..n).collect();
        // Fisher-Yates
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            map.swap(i, j);
        }
        Permutation { map }
    }
}

/// A point of the variance parameter space: one value per vertex. Entries
/// must all be strictly positive for the point to possibly lie in the
/// positive-definite domain; full membership also requires the covariance
/// at the point to be positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaPoint {
    values: Vec<f64>,
}

impl ThetaPoint {
    pub fn new(values: Vec<f64>) -> Self {
        ThetaPoint { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Necessary (not sufficient) condition for domain membership.
    pub fn all_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }
}

impl From<Vec<f64>> for ThetaPoint {
    fn from(values: Vec<f64>) -> Self {
        ThetaPoint { values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parse_edge_list() {
        let net = Network::parse("3\n1 2\n2 3", GraphFormat::EdgeList).unwrap();
        assert_eq!(net.n(), 3);
        assert_eq!(net.edges(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn parse_edge_list_no_edges() {
        let net = Network::parse("2\n", GraphFormat::EdgeList).unwrap();
        assert_eq!(net.n(), 2);
        assert_eq!(net.edge_count(), 0);
    }

    #[test]
    fn parse_adjacency() {
        let net = Network::parse("2\n0 1\n1 0", GraphFormat::AdjacencyMatrix).unwrap();
        assert_eq!(net.n(), 2);
        assert!(net.has_edge(0, 1));
        assert_eq!(net.edge_count(), 1);
    }

    #[test]
    fn parse_comments_and_duplicates() {
        let net = Network::parse(
            "# a comment\n3 # vertex count\n1 2\n2 1 # duplicate collapses\n",
            GraphFormat::EdgeList,
        )
        .unwrap();
        assert_eq!(net.edge_count(), 1);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            Network::parse("3\n1", GraphFormat::EdgeList),
            Err(GraphError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            Network::parse("3\n1 4", GraphFormat::EdgeList),
            Err(GraphError::VertexOutOfRange { line: 2, index: 4, n: 3 })
        ));
        assert!(matches!(
            Network::parse("3\n2 2", GraphFormat::EdgeList),
            Err(GraphError::SelfLoop { line: 2, vertex: 2 })
        ));
        assert!(matches!(
            Network::parse("2\n0 1\n0 0", GraphFormat::AdjacencyMatrix),
            Err(GraphError::Asymmetric { i: 1, j: 2 })
        ));
        assert!(matches!(
            Network::parse("2\n1 0\n0 0", GraphFormat::AdjacencyMatrix),
            Err(GraphError::SelfLoop { line: 2, vertex: 1 })
        ));
        assert!(matches!(
            Network::parse("2\n0 2\n2 0", GraphFormat::AdjacencyMatrix),
            Err(GraphError::Malformed { .. })
        ));
        assert!(matches!(
            Network::parse("", GraphFormat::EdgeList),
            Err(GraphError::Malformed { .. })
        ));
    }

    #[test]
    fn clique_cases() {
        let empty6 = Network::clique(6, 1).unwrap();
        assert_eq!(empty6.edge_count(), 0);

        let edge = Network::clique(2, 2).unwrap();
        assert_eq!(edge.edges(), vec![(0, 1)]);

        let k6 = Network::clique(6, 6).unwrap();
        assert_eq!(k6.edge_count(), 15);

        assert!(matches!(
            Network::clique(3, 0),
            Err(GraphError::CliqueSizeOutOfRange { m: 0, n: 3 })
        ));
        assert!(matches!(
            Network::clique(3, 4),
            Err(GraphError::CliqueSizeOutOfRange { m: 4, n: 3 })
        ));
    }

    #[test]
    fn permute_examples() {
        let k3 = Network::clique(3, 3).unwrap();
        let p = Permutation::from_one_based(&[2, 3, 1]).unwrap();
        assert_eq!(k3.permuted(&p).unwrap(), k3);

        // path 1-2-3 under swap(1,3) keeps the same edge set
        let path = Network::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let swap = Permutation::from_one_based(&[3, 2, 1]).unwrap();
        assert_eq!(path.permuted(&swap).unwrap(), path);

        // edge {1,2} under the cycle 1->2->3->1 becomes edge {2,3}
        let e12 = Network::from_edges(3, &[(0, 1)]).unwrap();
        let cyc = Permutation::from_one_based(&[2, 3, 1]).unwrap();
        let e23 = Network::from_edges(3, &[(1, 2)]).unwrap();
        assert_eq!(e12.permuted(&cyc).unwrap(), e23);
    }

    #[test]
    fn verify_isomorphism_examples() {
        let e12 = Network::from_edges(3, &[(0, 1)]).unwrap();
        let e23 = Network::from_edges(3, &[(1, 2)]).unwrap();
        let cyc = Permutation::from_one_based(&[2, 3, 1]).unwrap();
        assert!(Network::verify_isomorphism(&e12, &e23, &cyc).unwrap());

        let k3 = Network::clique(3, 3).unwrap();
        let path = Network::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(!Network::verify_isomorphism(&k3, &path, &cyc).unwrap());

        let id = Permutation::identity(3);
        assert!(Network::verify_isomorphism(&k3, &k3, &id).unwrap());
    }

    #[test]
    fn bruteforce_search() {
        let e12 = Network::from_edges(3, &[(0, 1)]).unwrap();
        let e23 = Network::from_edges(3, &[(1, 2)]).unwrap();
        let p = Network::find_isomorphism_bruteforce(&e12, &e23).unwrap().unwrap();
        assert!(Network::verify_isomorphism(&e12, &e23, &p).unwrap());

        let k4 = Network::clique(4, 4).unwrap();
        let empty4 = Network::empty(4).unwrap();
        assert_eq!(Network::find_isomorphism_bruteforce(&k4, &empty4).unwrap(), None);

        let big = Network::empty(9).unwrap();
        assert_eq!(
            Network::find_isomorphism_bruteforce(&big, &big).unwrap_err(),
            GraphError::SearchBound { n: 9 }
        );
    }

    #[test]
    fn bruteforce_finds_verifiable_permutation_for_relabelings() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=6 {
            for _ in 0..10 {
                let net = Network::random_gnp(n, 0.5, &mut rng).unwrap();
                let p = Permutation::random(n, &mut rng);
                let relabeled = net.permuted(&p).unwrap();
                let q = Network::find_isomorphism_bruteforce(&net, &relabeled)
                    .unwrap()
                    .expect("relabeled graph must be isomorphic");
                assert!(Network::verify_isomorphism(&net, &relabeled, &q).unwrap());
            }
        }
    }

    #[test]
    fn isomorphism_is_equivalence_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let n = 5;
            let a = Network::random_gnp(n, 0.4, &mut rng).unwrap();
            let p = Permutation::random(n, &mut rng);
            let q = Permutation::random(n, &mut rng);
            let b = a.permuted(&p).unwrap();
            let c = b.permuted(&q).unwrap();

            // reflexive
            assert!(Network::verify_isomorphism(&a, &a, &Permutation::identity(n)).unwrap());
            // symmetric via the inverse permutation
            assert!(Network::verify_isomorphism(&b, &a, &p.inverse()).unwrap());
            // transitive via composition
            assert!(Network::verify_isomorphism(&a, &c, &q.compose(&p)).unwrap());
        }
    }

    proptest! {
        #[test]
        fn edge_list_roundtrip(n in 1usize..8, seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let net = Network::random_gnp(n, 0.5, &mut rng).unwrap();
            let text = net.to_edge_list();
            let back = Network::parse(&text, GraphFormat::EdgeList).unwrap();
            prop_assert_eq!(net, back);
        }

        #[test]
        fn permute_then_inverse_is_identity(n in 1usize..8, seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let net = Network::random_gnp(n, 0.5, &mut rng).unwrap();
            let p = Permutation::random(n, &mut rng);
            let back = net.permuted(&p).unwrap().permuted(&p.inverse()).unwrap();
            prop_assert_eq!(net, back);
        }
    }
}
