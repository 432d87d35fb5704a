//! The heterogeneous information graph.
//!
//! Nodes are one user node and one description node per corpus user, plus
//! one node per user type. Nodes are stored densely: users first, then
//! descriptions, then types, so the neighbors of one kind are a contiguous
//! slice of each (sorted) adjacency list.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::weak_labeler::WeakLabeling;
use crate::{Error, Result, UserTypeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    User,
    Desc,
    Type,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId {
    pub kind: NodeKind,
    pub index: usize,
}

impl NodeId {
    pub fn user(index: usize) -> NodeId {
        NodeId {
            kind: NodeKind::User,
            index,
        }
    }

    pub fn desc(index: usize) -> NodeId {
        NodeId {
            kind: NodeKind::Desc,
            index,
        }
    }

    pub fn user_type(t: UserTypeId) -> NodeId {
        NodeId {
            kind: NodeKind::Type,
            index: t.index(),
        }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            NodeKind::User => "user",
            NodeKind::Desc => "desc",
            NodeKind::Type => "type",
        };
        write!(f, "{k}:{}", self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    DescType,
    UserType,
    DescUser,
    UserUser,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 4] = [
        EdgeKind::DescType,
        EdgeKind::UserType,
        EdgeKind::DescUser,
        EdgeKind::UserUser,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            EdgeKind::DescType => "desc_type",
            EdgeKind::UserType => "user_type",
            EdgeKind::DescUser => "desc_user",
            EdgeKind::UserUser => "user_user",
        }
    }

    pub fn endpoints(self) -> (NodeKind, NodeKind) {
        match self {
            EdgeKind::DescType => (NodeKind::Desc, NodeKind::Type),
            EdgeKind::UserType => (NodeKind::User, NodeKind::Type),
            EdgeKind::DescUser => (NodeKind::Desc, NodeKind::User),
            EdgeKind::UserUser => (NodeKind::User, NodeKind::User),
        }
    }

    /// Whether `a`–`b` (in either order) is a legal endpoint pair.
    pub fn connects(self, a: NodeKind, b: NodeKind) -> bool {
        let (x, y) = self.endpoints();
        (a, b) == (x, y) || (a, b) == (y, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum View {
    /// Descriptions only: no user-user edges.
    Des,
    /// Network only: no description-user edges.
    Net,
    #[default]
    DesNet,
}

impl View {
    pub const ALL: [View; 3] = [View::Des, View::Net, View::DesNet];

    pub fn allows(self, kind: EdgeKind) -> bool {
        match self {
            View::Des => kind != EdgeKind::UserUser,
            View::Net => kind != EdgeKind::DescUser,
            View::DesNet => true,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            View::Des => "des",
            View::Net => "net",
            View::DesNet => "des+net",
        }
    }
}

impl std::str::FromStr for View {
    type Err = Error;

    fn from_str(s: &str) -> Result<View> {
        match s.to_lowercase().as_str() {
            "des" => Ok(View::Des),
            "net" => Ok(View::Net),
            "des+net" | "desnet" | "des_net" => Ok(View::DesNet),
            _ => Err(Error::InvalidParams(format!("unknown view `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Observed,
    Inferred,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub kind: EdgeKind,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Neighbor {
    node: usize,
    kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfoGraph {
    n_users: usize,
    view: View,
    adjacency: Vec<Vec<Neighbor>>,
    edges: Vec<Edge>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub user_nodes: usize,
    pub desc_nodes: usize,
    pub type_nodes: usize,
    /// Indexed by [`EdgeKind::index`].
    pub observed: [usize; 4],
    pub inferred: [usize; 4],
}

impl GraphStats {
    pub fn nodes(&self) -> usize {
        self.user_nodes + self.desc_nodes + self.type_nodes
    }

    pub fn observed_edges(&self) -> usize {
        self.observed.iter().sum()
    }

    pub fn inferred_edges(&self) -> usize {
        self.inferred.iter().sum()
    }

    pub fn edges(&self) -> usize {
        self.observed_edges() + self.inferred_edges()
    }

    pub fn edges_of(&self, kind: EdgeKind) -> usize {
        self.observed[kind.index()] + self.inferred[kind.index()]
    }
}

impl InfoGraph {
    /// A graph with all nodes and no edges.
    pub fn empty(n_users: usize, view: View) -> InfoGraph {
        InfoGraph {
            n_users,
            view,
            adjacency: vec![Vec::new(); 2 * n_users + 2],
            edges: Vec::new(),
        }
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn view(&self) -> View {
        self.view
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn count_of(&self, kind: NodeKind) -> usize {
        match kind {
            NodeKind::User | NodeKind::Desc => self.n_users,
            NodeKind::Type => 2,
        }
    }

    pub fn dense(&self, node: NodeId) -> usize {
        match node.kind {
            NodeKind::User => node.index,
            NodeKind::Desc => self.n_users + node.index,
            NodeKind::Type => 2 * self.n_users + node.index,
        }
    }

    pub fn node_at(&self, dense: usize) -> NodeId {
        if dense < self.n_users {
            NodeId::user(dense)
        } else if dense < 2 * self.n_users {
            NodeId::desc(dense - self.n_users)
        } else {
            NodeId {
                kind: NodeKind::Type,
                index: dense - 2 * self.n_users,
            }
        }
    }

    fn kind_range(&self, kind: NodeKind) -> std::ops::Range<usize> {
        let n = self.n_users;
        match kind {
            NodeKind::User => 0..n,
            NodeKind::Desc => n..2 * n,
            NodeKind::Type => 2 * n..2 * n + 2,
        }
    }

    fn contains(&self, node: NodeId) -> bool {
        node.index < self.count_of(node.kind)
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        if !self.contains(a) || !self.contains(b) {
            return false;
        }
        let (da, db) = (self.dense(a), self.dense(b));
        self.adjacency[da].binary_search_by_key(&db, |n| n.node).is_ok()
    }

    fn insert(&mut self, a: NodeId, b: NodeId, kind: EdgeKind, provenance: Provenance) -> Result<bool> {
        if !kind.connects(a.kind, b.kind) || !self.contains(a) || !self.contains(b) {
            return Err(Error::EdgeKindMismatch { kind, a, b });
        }
        if a == b {
            return Err(Error::InvalidParams(format!("self-loop on {a}")));
        }
        if !self.view.allows(kind) {
            return Err(Error::InvalidParams(format!(
                "view {} excludes {} edges",
                self.view.name(),
                kind.name()
            )));
        }
        let (da, db) = (self.dense(a), self.dense(b));
        let pos_a = match self.adjacency[da].binary_search_by_key(&db, |n| n.node) {
            Ok(_) => return Ok(false),
            Err(p) => p,
        };
        let pos_b = self.adjacency[db]
            .binary_search_by_key(&da, |n| n.node)
            .expect_err("adjacency is symmetric");
        self.adjacency[da].insert(pos_a, Neighbor { node: db, kind });
        self.adjacency[db].insert(pos_b, Neighbor { node: da, kind });
        self.edges.push(Edge {
            a,
            b,
            kind,
            provenance,
        });
        Ok(true)
    }

    pub fn add_observed_edge(&mut self, a: NodeId, b: NodeId, kind: EdgeKind) -> Result<bool> {
        self.insert(a, b, kind, Provenance::Observed)
    }

    /// Adds an inferred edge if it is not already present.
    pub fn add_inferred_edge(&mut self, a: NodeId, b: NodeId, kind: EdgeKind) -> Result<bool> {
        self.insert(a, b, kind, Provenance::Inferred)
    }

    /// Neighbors in dense-index order (users, then descriptions, then types).
    pub fn neighbors(&self, node: NodeId, kind_filter: Option<EdgeKind>) -> Vec<NodeId> {
        if !self.contains(node) {
            return Vec::new();
        }
        self.adjacency[self.dense(node)]
            .iter()
            .filter(|n| kind_filter.is_none_or(|k| n.kind == k))
            .map(|n| self.node_at(n.node))
            .collect()
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[self.dense(node)].len()
    }

    /// Number of neighbors of `node` whose kind is `kind`.
    pub fn degree_to_kind(&self, node: NodeId, kind: NodeKind) -> usize {
        let range = self.kind_range(kind);
        let adj = &self.adjacency[self.dense(node)];
        let lo = adj.partition_point(|n| n.node < range.start);
        let hi = adj.partition_point(|n| n.node < range.end);
        hi - lo
    }

    /// Neighbors of `node` that have the given kind, in index order.
    pub fn neighbors_of_kind(&self, node: NodeId, kind: NodeKind) -> impl Iterator<Item = NodeId> + '_ {
        let range = self.kind_range(kind);
        let adj = &self.adjacency[self.dense(node)];
        let lo = adj.partition_point(|n| n.node < range.start);
        let hi = adj.partition_point(|n| n.node < range.end);
        adj[lo..hi].iter().map(|n| self.node_at(n.node))
    }

    /// The type a user is attached to through a user-type edge, if any.
    pub fn user_type_of(&self, user: usize) -> Option<UserTypeId> {
        self.neighbors_of_kind(NodeId::user(user), NodeKind::Type)
            .next()
            .map(|t| UserTypeId(t.index))
    }

    pub fn stats(&self) -> GraphStats {
        let mut s = GraphStats {
            user_nodes: self.n_users,
            desc_nodes: self.n_users,
            type_nodes: 2,
            ..Default::default()
        };
        for e in &self.edges {
            match e.provenance {
                Provenance::Observed => s.observed[e.kind.index()] += 1,
                Provenance::Inferred => s.inferred[e.kind.index()] += 1,
            }
        }
        s
    }

    /// Checks symmetry, absence of self-loops and duplicates, endpoint kinds,
    /// view restrictions and agreement between the edge list and adjacency.
    pub fn check_invariants(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        let mut half_edges = 0;
        for (da, adj) in self.adjacency.iter().enumerate() {
            for w in adj.windows(2) {
                if w[0].node >= w[1].node {
                    return bad(format!("adjacency of {da} unsorted or duplicated"));
                }
            }
            for n in adj {
                if n.node == da {
                    return bad(format!("self-loop at {da}"));
                }
                let back = self.adjacency[n.node].binary_search_by_key(&da, |m| m.node);
                match back {
                    Ok(i) if self.adjacency[n.node][i].kind == n.kind => {}
                    _ => return bad(format!("asymmetric edge {da}-{}", n.node)),
                }
                let (a, b) = (self.node_at(da), self.node_at(n.node));
                if !n.kind.connects(a.kind, b.kind) || !self.view.allows(n.kind) {
                    return bad(format!("illegal {:?} edge {a}-{b}", n.kind));
                }
                half_edges += 1;
            }
        }
        if half_edges != 2 * self.edges.len() {
            return bad("edge list out of sync with adjacency".into());
        }
        Ok(())
    }

    /// No user is attached to more than one type.
    pub fn check_single_type_per_user(&self) -> Result<()> {
        for u in 0..self.n_users {
            if self.degree_to_kind(NodeId::user(u), NodeKind::Type) > 1 {
                return Err(Error::InvalidParams(format!("user {u} has more than one type edge")));
            }
        }
        Ok(())
    }

    pub fn to_file(&self, corpus: &Corpus) -> GraphFile {
        GraphFile {
            view: self.view,
            user_ids: corpus.users.iter().map(|u| u.user_id.clone()).collect(),
            type_names: corpus.type_names.clone(),
            edges: self.edges.clone(),
        }
    }

    pub fn from_file(file: &GraphFile) -> Result<InfoGraph> {
        let mut g = InfoGraph::empty(file.user_ids.len(), file.view);
        for e in &file.edges {
            if !g.insert(e.a, e.b, e.kind, e.provenance)? {
                return Err(Error::InvalidParams(format!("duplicate edge {}-{}", e.a, e.b)));
            }
        }
        Ok(g)
    }

    pub fn write_json(&self, corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(&self.to_file(corpus))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<InfoGraph> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        InfoGraph::from_file(&serde_json::from_str(&text)?)
    }
}

/// JSON form of a graph, for debugging and fixtures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub view: View,
    pub user_ids: Vec<String>,
    pub type_names: [String; 2],
    pub edges: Vec<Edge>,
}

/// Builds the observed graph for `view`: a description-user edge per user,
/// a user-user edge per mention pair, and for every weakly labeled user both
/// a description-type and a user-type edge.
pub fn build_graph(corpus: &Corpus, weak: &WeakLabeling, view: View) -> Result<InfoGraph> {
    let mut g = InfoGraph::empty(corpus.len(), view);
    if view.allows(EdgeKind::DescUser) {
        for u in 0..corpus.len() {
            g.add_observed_edge(NodeId::desc(u), NodeId::user(u), EdgeKind::DescUser)?;
        }
    }
    if view.allows(EdgeKind::UserUser) {
        for (u, user) in corpus.users.iter().enumerate() {
            for &m in &user.mentions {
                g.add_observed_edge(NodeId::user(u), NodeId::user(m), EdgeKind::UserUser)?;
            }
        }
    }
    for (id, w) in &weak.labels {
        let u = corpus
            .user_index(id)
            .ok_or_else(|| Error::UnknownUser(id.clone()))?;
        let t = NodeId::user_type(w.label);
        g.add_observed_edge(NodeId::desc(u), t, EdgeKind::DescType)?;
        g.add_observed_edge(NodeId::user(u), t, EdgeKind::UserType)?;
    }
    Ok(g)
}
