//! Pairs of graphs on a common surface and their common refinement `H`.
//!
//! A [`PairInput`] holds the positive graph, the negative graph and, for
//! every crossing, its position along the positive edge and along the
//! negative edge (indices count from end 0) together with its handedness.
//! At a crossing the counterclockwise order of the four branches is
//! `(p_fwd, n_fwd, p_bwd, n_bwd)` for handedness +1 and
//! `(p_fwd, n_bwd, p_bwd, n_fwd)` for −1, where "fwd" points towards end 1 of
//! the parent edge.
//!
//! On non-orientable surfaces "counterclockwise at a crossing" refers to the
//! local orientation carried along the positive edge from its end 0. The
//! optional `flip` bit records that the orientation carried along the
//! negative edge from its end 0 disagrees with it.
//!
//! `H` numbers its vertices as: positive vertices, negative vertices, then
//! crossings; its edges as: positive sub-edges (parent edge by parent edge,
//! in index order), then negative sub-edges.

use std::borrow::Cow;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::surface_map::{dart_of, edge_of, flag, CombinatorialMap, Dart, EdgeEnd, MapError, Side};
use crate::union_find::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn opposite(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Negative => '-',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OverlayError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("crossing {crossing}: handedness must be +1 or -1, got {value}")]
    InvalidHandedness { crossing: usize, value: i64 },
    #[error("crossing {crossing} references {sign:?} edge {edge}, which does not exist")]
    UnknownEdge {
        crossing: usize,
        sign: Sign,
        edge: usize,
    },
    #[error("inconsistent crossing indices on {sign:?} edge {edge}: {reason}")]
    InconsistentCrossingIndices {
        sign: Sign,
        edge: usize,
        reason: String,
    },
    #[error("degenerate contact between the graphs ({0} contact(s)): width <= 1, the pair width is one or zero")]
    Degenerate(usize),
    #[error("common refinement is not a surface: {0}")]
    NonSurface(MapError),
}

/// One transversal intersection point of a positive and a negative edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crossing {
    pub p_edge: usize,
    pub p_index: usize,
    pub n_edge: usize,
    pub n_index: usize,
    pub handedness: i8,
    pub flip: bool,
}

impl Crossing {
    pub fn new(
        p_edge: usize,
        p_index: usize,
        n_edge: usize,
        n_index: usize,
        handedness: i8,
    ) -> Self {
        Self {
            p_edge,
            p_index,
            n_edge,
            n_index,
            handedness,
            flip: false,
        }
    }

    pub fn edge(&self, sign: Sign) -> (usize, usize) {
        match sign {
            Sign::Positive => (self.p_edge, self.p_index),
            Sign::Negative => (self.n_edge, self.n_index),
        }
    }
}

/// A non-transversal contact (vertex on vertex, vertex on edge). Such pairs
/// are outside the normal-pair theory and rejected.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contact {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plus_vertex: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minus_vertex: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plus_edge: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minus_edge: Option<usize>,
}

/// Two embedded graphs plus their crossing data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairInput {
    gplus: CombinatorialMap,
    gminus: CombinatorialMap,
    crossings: Vec<Crossing>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct CrossingJson {
    #[serde(default, skip_deserializing)]
    id: usize,
    p_edge: usize,
    p_index: usize,
    n_edge: usize,
    n_index: usize,
    handedness: i64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    flip: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PairJson {
    gplus: CombinatorialMap,
    gminus: CombinatorialMap,
    crossings: Vec<CrossingJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    contacts: Vec<Contact>,
}

impl Serialize for PairInput {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PairJson {
            gplus: self.gplus.clone(),
            gminus: self.gminus.clone(),
            crossings: self
                .crossings
                .iter()
                .enumerate()
                .map(|(id, c)| CrossingJson {
                    id,
                    p_edge: c.p_edge,
                    p_index: c.p_index,
                    n_edge: c.n_edge,
                    n_index: c.n_index,
                    handedness: c.handedness as i64,
                    flip: c.flip,
                })
                .collect(),
            contacts: Vec::new(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PairInput {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = PairJson::deserialize(deserializer)?;
        PairInput::from_json_parts(json).map_err(serde::de::Error::custom)
    }
}

impl PairInput {
    /// Validates crossing references and index ranges.
    pub fn new(
        gplus: CombinatorialMap,
        gminus: CombinatorialMap,
        crossings: Vec<Crossing>,
    ) -> Result<Self, OverlayError> {
        let pair = Self {
            gplus,
            gminus,
            crossings,
        };
        pair.check()?;
        Ok(pair)
    }

    fn from_json_parts(json: PairJson) -> Result<Self, OverlayError> {
        if !json.contacts.is_empty() {
            return Err(OverlayError::Degenerate(json.contacts.len()));
        }
        let crossings = json
            .crossings
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if c.handedness != 1 && c.handedness != -1 {
                    return Err(OverlayError::InvalidHandedness {
                        crossing: i,
                        value: c.handedness,
                    });
                }
                Ok(Crossing {
                    p_edge: c.p_edge,
                    p_index: c.p_index,
                    n_edge: c.n_edge,
                    n_index: c.n_index,
                    handedness: c.handedness as i8,
                    flip: c.flip,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        PairInput::new(json.gplus, json.gminus, crossings)
    }

    fn check(&self) -> Result<(), OverlayError> {
        for (i, c) in self.crossings.iter().enumerate() {
            if c.handedness != 1 && c.handedness != -1 {
                return Err(OverlayError::InvalidHandedness {
                    crossing: i,
                    value: c.handedness as i64,
                });
            }
            for sign in [Sign::Positive, Sign::Negative] {
                let (e, _) = c.edge(sign);
                if e >= self.graph(sign).edge_count() {
                    return Err(OverlayError::UnknownEdge {
                        crossing: i,
                        sign,
                        edge: e,
                    });
                }
            }
        }
        for sign in [Sign::Positive, Sign::Negative] {
            self.crossings_along(sign)?;
        }
        Ok(())
    }

    pub fn graph(&self, sign: Sign) -> &CombinatorialMap {
        match sign {
            Sign::Positive => &self.gplus,
            Sign::Negative => &self.gminus,
        }
    }

    pub fn gplus(&self) -> &CombinatorialMap {
        &self.gplus
    }

    pub fn gminus(&self) -> &CombinatorialMap {
        &self.gminus
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    /// Crossing ids along every edge of the given graph, in index order.
    pub fn crossings_along(&self, sign: Sign) -> Result<Vec<Vec<usize>>, OverlayError> {
        let g = self.graph(sign);
        let mut along: Vec<Vec<Option<usize>>> = vec![Vec::new(); g.edge_count()];
        let mut counts = vec![0usize; g.edge_count()];
        for c in &self.crossings {
            counts[c.edge(sign).0] += 1;
        }
        for (e, slot) in along.iter_mut().enumerate() {
            *slot = vec![None; counts[e]];
        }
        for (i, c) in self.crossings.iter().enumerate() {
            let (e, idx) = c.edge(sign);
            if idx >= counts[e] {
                return Err(OverlayError::InconsistentCrossingIndices {
                    sign,
                    edge: e,
                    reason: format!("index {idx} out of range 0..{}", counts[e]),
                });
            }
            if along[e][idx].is_some() {
                return Err(OverlayError::InconsistentCrossingIndices {
                    sign,
                    edge: e,
                    reason: format!("index {idx} used twice"),
                });
            }
            along[e][idx] = Some(i);
        }
        Ok(along
            .into_iter()
            .map(|v| v.into_iter().map(Option::unwrap).collect())
            .collect())
    }

    fn with_graph(&self, sign: Sign, g: CombinatorialMap, crossings: Vec<Crossing>) -> PairInput {
        let (gplus, gminus) = match sign {
            Sign::Positive => (g, self.gminus.clone()),
            Sign::Negative => (self.gplus.clone(), g),
        };
        PairInput {
            gplus,
            gminus,
            crossings,
        }
    }

    /// Reverses the local orientation at vertex `v` of the graph `sign`,
    /// re-expressing twists and crossing data so the pair is unchanged.
    pub fn flip_vertex(&self, sign: Sign, v: usize) -> PairInput {
        let g = self.graph(sign);
        let mut mark = vec![false; g.vertex_count()];
        mark[v] = true;
        let flipped = g.flip_vertices(&mark);
        let crossings = self
            .crossings
            .iter()
            .map(|c| {
                let mut c = *c;
                let (e, _) = c.edge(sign);
                if g.endpoints(e)[0] == v {
                    if sign == Sign::Positive {
                        c.handedness = -c.handedness;
                    }
                    c.flip = !c.flip;
                }
                c
            })
            .collect();
        self.with_graph(sign, flipped, crossings)
    }

    fn shift_edges(&self, sign: Sign, emap: impl Fn(usize) -> usize) -> Vec<Crossing> {
        self.crossings
            .iter()
            .map(|c| {
                let mut c = *c;
                match sign {
                    Sign::Positive => c.p_edge = emap(c.p_edge),
                    Sign::Negative => c.n_edge = emap(c.n_edge),
                }
                c
            })
            .collect()
    }

    /// Contracts every crossing-free non-loop edge and deletes every
    /// crossing-free loop, until each edge of both graphs is crossed.
    pub fn preprocess(&self) -> PairInput {
        let mut pair = self.clone();
        'outer: loop {
            for sign in [Sign::Positive, Sign::Negative] {
                let g = pair.graph(sign);
                let mut crossed = vec![false; g.edge_count()];
                for c in &pair.crossings {
                    crossed[c.edge(sign).0] = true;
                }
                let Some(e) = crossed.iter().position(|&x| !x) else {
                    continue;
                };
                if g.is_loop(e) {
                    let g2 = g.delete_edge(e).expect("edge exists");
                    let crossings = pair.shift_edges(sign, |x| if x > e { x - 1 } else { x });
                    pair = pair.with_graph(sign, g2, crossings);
                } else {
                    if g.is_twisted(e) {
                        pair = pair.flip_vertex(sign, g.endpoints(e)[1]);
                    }
                    let (g2, _, emap) = pair
                        .graph(sign)
                        .contract_edge_with_maps(e)
                        .expect("non-loop edge");
                    let crossings =
                        pair.shift_edges(sign, |x| emap[x].expect("crossed edges survive"));
                    pair = pair.with_graph(sign, g2, crossings);
                }
                continue 'outer;
            }
            break;
        }
        pair
    }

    /// Pull-back of the pair to the orientable double cover of the surface.
    /// Graph lifts follow [`CombinatorialMap::double_cover`]; crossing `c`
    /// lifts to `c` (sheet of its own orientation) and `c + |crossings|`.
    pub fn double_cover(&self) -> PairInput {
        let ep = self.gplus.edge_count();
        let en = self.gminus.edge_count();
        let nc = self.crossings.len();
        let mut crossings = Vec::with_capacity(2 * nc);
        for sheet in 0..2 {
            for c in &self.crossings {
                let n_copy = if c.flip { 1 - sheet } else { sheet };
                crossings.push(Crossing {
                    p_edge: c.p_edge + sheet * ep,
                    p_index: c.p_index,
                    n_edge: c.n_edge + n_copy * en,
                    n_index: c.n_index,
                    handedness: if sheet == 0 {
                        c.handedness
                    } else {
                        -c.handedness
                    },
                    flip: false,
                });
            }
        }
        PairInput {
            gplus: self.gplus.double_cover(),
            gminus: self.gminus.double_cover(),
            crossings,
        }
    }
}

/// Role of a vertex of `H`, with the parent vertex or crossing id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "role", content = "id", rename_all = "lowercase")]
pub enum VertexRole {
    Positive(usize),
    Negative(usize),
    Crossing(usize),
}

impl VertexRole {
    pub fn sign(self) -> Option<Sign> {
        match self {
            VertexRole::Positive(_) => Some(Sign::Positive),
            VertexRole::Negative(_) => Some(Sign::Negative),
            VertexRole::Crossing(_) => None,
        }
    }

    pub fn is_crossing(self) -> bool {
        matches!(self, VertexRole::Crossing(_))
    }

    pub fn kind(self) -> &'static str {
        match self {
            VertexRole::Positive(_) => "positive",
            VertexRole::Negative(_) => "negative",
            VertexRole::Crossing(_) => "crossing",
        }
    }
}

/// Label of an `H` edge: which graph it lies on, the parent edge and its
/// position along it, and whether both endpoints are crossings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EdgeLabel {
    pub sign: Sign,
    pub parent_edge: usize,
    pub position: usize,
    pub deep: bool,
}

/// The common refinement of a pair.
#[derive(Debug, Clone)]
pub struct Overlay {
    h: CombinatorialMap,
    roles: Vec<VertexRole>,
    labels: Vec<EdgeLabel>,
    pair: PairInput,
    /// H-edge ids along each parent edge, per sign.
    sub_edges: [Vec<Vec<usize>>; 2],
}

/// H-face classes obtained by merging across the edges of one graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceClasses {
    pub class_of_face: Vec<usize>,
    pub class_count: usize,
    /// Face id of the parent graph for each class, when some parent dart
    /// borders it.
    pub parent_face: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    MultipleIntersections {
        p_edge: usize,
        n_edge: usize,
        crossings: Vec<usize>,
    },
    NonAlternating {
        vertex: usize,
    },
    SignedVertexContact {
        vertex: usize,
    },
    FaceReentry {
        sign: Sign,
        edge: usize,
        face: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        Self {
            ok: violations.is_empty(),
            violations,
        }
    }
}

/// Builds `H` from a pair.
pub fn build_overlay(pair: &PairInput) -> Result<Overlay, OverlayError> {
    Overlay::build(pair)
}

impl Overlay {
    pub fn build(pair: &PairInput) -> Result<Overlay, OverlayError> {
        let gp = &pair.gplus;
        let gn = &pair.gminus;
        let vp = gp.vertex_count();
        let vn = gn.vertex_count();
        let crossing_vertex = |c: usize| vp + vn + c;
        let signed_vertex = |sign: Sign, v: usize| match sign {
            Sign::Positive => v,
            Sign::Negative => vp + v,
        };

        let mut ends: Vec<[usize; 2]> = Vec::new();
        let mut signs: Vec<i8> = Vec::new();
        let mut labels = Vec::new();
        let mut sub_edges: [Vec<Vec<usize>>; 2] = [Vec::new(), Vec::new()];
        for sign in [Sign::Positive, Sign::Negative] {
            let g = pair.graph(sign);
            let along = pair.crossings_along(sign)?;
            for (e, cs) in along.iter().enumerate() {
                let [a, b] = g.endpoints(e);
                let mut points = vec![signed_vertex(sign, a)];
                points.extend(cs.iter().map(|&c| crossing_vertex(c)));
                points.push(signed_vertex(sign, b));
                let k = cs.len();
                let flips: Vec<bool> = cs.iter().map(|&c| pair.crossings[c].flip).collect();
                let mut ids = Vec::with_capacity(k + 1);
                for j in 0..=k {
                    let twisted = match sign {
                        Sign::Positive => j == k && g.is_twisted(e),
                        Sign::Negative => {
                            if k == 0 {
                                g.is_twisted(e)
                            } else if j == 0 {
                                flips[0]
                            } else if j == k {
                                flips[k - 1] ^ g.is_twisted(e)
                            } else {
                                flips[j - 1] != flips[j]
                            }
                        }
                    };
                    ids.push(ends.len());
                    ends.push([points[j], points[j + 1]]);
                    signs.push(if twisted { -1 } else { 1 });
                    labels.push(EdgeLabel {
                        sign,
                        parent_edge: e,
                        position: j,
                        deep: j > 0 && j < k,
                    });
                }
                sub_edges[sign.index()].push(ids);
            }
        }

        let mut rotations: Vec<Vec<EdgeEnd>> = Vec::with_capacity(vp + vn + pair.crossings.len());
        for sign in [Sign::Positive, Sign::Negative] {
            let g = pair.graph(sign);
            let subs = &sub_edges[sign.index()];
            for v in 0..g.vertex_count() {
                rotations.push(
                    g.rotation(v)
                        .iter()
                        .map(|&d| {
                            let e = edge_of(d);
                            if d & 1 == 0 {
                                EdgeEnd::new(subs[e][0], 0)
                            } else {
                                EdgeEnd::new(*subs[e].last().unwrap(), 1)
                            }
                        })
                        .collect(),
                );
            }
        }
        for c in &pair.crossings {
            let p = &sub_edges[0][c.p_edge];
            let n = &sub_edges[1][c.n_edge];
            let p_bwd = EdgeEnd::new(p[c.p_index], 1);
            let p_fwd = EdgeEnd::new(p[c.p_index + 1], 0);
            let n_bwd = EdgeEnd::new(n[c.n_index], 1);
            let n_fwd = EdgeEnd::new(n[c.n_index + 1], 0);
            rotations.push(if c.handedness > 0 {
                vec![p_fwd, n_fwd, p_bwd, n_bwd]
            } else {
                vec![p_fwd, n_bwd, p_bwd, n_fwd]
            });
        }

        let h = CombinatorialMap::build(ends, rotations, Some(&signs))
            .map_err(OverlayError::NonSurface)?;
        let roles = (0..vp)
            .map(VertexRole::Positive)
            .chain((0..vn).map(VertexRole::Negative))
            .chain((0..pair.crossings.len()).map(VertexRole::Crossing))
            .collect();
        Ok(Overlay {
            h,
            roles,
            labels,
            pair: pair.clone(),
            sub_edges,
        })
    }

    pub fn h(&self) -> &CombinatorialMap {
        &self.h
    }

    pub fn pair(&self) -> &PairInput {
        &self.pair
    }

    pub fn role(&self, v: usize) -> VertexRole {
        self.roles[v]
    }

    pub fn roles(&self) -> &[VertexRole] {
        &self.roles
    }

    pub fn label(&self, e: usize) -> EdgeLabel {
        self.labels[e]
    }

    pub fn labels(&self) -> &[EdgeLabel] {
        &self.labels
    }

    pub fn edge_sign(&self, e: usize) -> Sign {
        self.labels[e].sign
    }

    pub fn dart_sign(&self, d: Dart) -> Sign {
        self.labels[edge_of(d)].sign
    }

    pub fn is_deep(&self, e: usize) -> bool {
        self.labels[e].deep
    }

    pub fn is_crossing(&self, v: usize) -> bool {
        self.roles[v].is_crossing()
    }

    pub fn crossing_count(&self) -> usize {
        self.pair.crossings.len()
    }

    /// Parent edge of the given sign passing through a crossing vertex.
    pub fn crossing_parent(&self, v: usize, sign: Sign) -> Option<usize> {
        match self.roles[v] {
            VertexRole::Crossing(c) => Some(self.pair.crossings[c].edge(sign).0),
            _ => None,
        }
    }

    pub fn sub_edges(&self, sign: Sign, parent_edge: usize) -> &[usize] {
        &self.sub_edges[sign.index()][parent_edge]
    }

    /// H dart corresponding to a dart of a parent graph at its signed vertex.
    pub fn parent_dart_in_h(&self, sign: Sign, d: Dart) -> Dart {
        let subs = &self.sub_edges[sign.index()][edge_of(d)];
        if d & 1 == 0 {
            dart_of(subs[0], 0)
        } else {
            dart_of(*subs.last().unwrap(), 1)
        }
    }

    /// Merges H-faces across every H-edge of the opposite sign, so that the
    /// classes are the faces of the graph `sign`: merging across positive
    /// edges yields the faces of the negative graph and vice versa.
    pub fn parent_faces(&self, sign: Sign) -> FaceClasses {
        let nf = self.h.faces().len();
        let mut uf = UnionFind::new(nf);
        for e in 0..self.h.edge_count() {
            if self.labels[e].sign != sign {
                let [a, b] = self.h.edge_faces(e);
                uf.union(a, b);
            }
        }
        let class_of_face = uf.dense_labels();
        let class_count = class_of_face.iter().copied().max().map_or(0, |m| m + 1);
        let mut parent_face = vec![None; class_count];
        let g = self.pair.graph(sign);
        for d in 0..g.dart_count() {
            let hd = self.parent_dart_in_h(sign, d);
            for side in [Side::Minus, Side::Plus] {
                let class = class_of_face[self.h.face_of_flag(flag(hd, side))];
                parent_face[class].get_or_insert(g.face_of_flag(flag(d, side)));
            }
        }
        FaceClasses {
            class_of_face,
            class_count,
            parent_face,
        }
    }

    /// Normality: one crossing per (positive edge, negative edge) pair,
    /// alternating branches at crossings, signed vertices touching only edges
    /// of their own sign.
    pub fn validate_normal(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut by_pair: std::collections::BTreeMap<(usize, usize), Vec<usize>> =
            Default::default();
        for (i, c) in self.pair.crossings.iter().enumerate() {
            by_pair.entry((c.p_edge, c.n_edge)).or_default().push(i);
        }
        for ((p_edge, n_edge), crossings) in by_pair {
            if crossings.len() > 1 {
                violations.push(Violation::MultipleIntersections {
                    p_edge,
                    n_edge,
                    crossings,
                });
            }
        }
        for v in 0..self.h.vertex_count() {
            let rot = self.h.rotation(v);
            match self.roles[v].sign() {
                None => {
                    let alternating = rot.len() == 4
                        && (0..4)
                            .all(|i| self.dart_sign(rot[i]) != self.dart_sign(rot[(i + 1) % 4]));
                    if !alternating {
                        violations.push(Violation::NonAlternating { vertex: v });
                    }
                }
                Some(s) => {
                    if rot.iter().any(|&d| self.dart_sign(d) != s) {
                        violations.push(Violation::SignedVertexContact { vertex: v });
                    }
                }
            }
        }
        ValidationReport::from_violations(violations)
    }

    /// Strong normality: each parent edge meets each face of the other
    /// graph in at most one component. For a loop the two sub-edges at its
    /// vertex join through that vertex.
    pub fn validate_strongly_normal(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for sign in [Sign::Positive, Sign::Negative] {
            let classes = self.parent_faces(sign.opposite());
            let g = self.pair.graph(sign);
            for (e, subs) in self.sub_edges[sign.index()].iter().enumerate() {
                let mut seq: Vec<usize> = subs
                    .iter()
                    .map(|&x| classes.class_of_face[self.h.edge_faces(x)[0]])
                    .collect();
                if g.is_loop(e) && seq.len() > 1 && seq.first() == seq.last() {
                    seq.pop();
                }
                let mut reported = Vec::new();
                for (i, f) in seq.iter().enumerate() {
                    if seq[..i].contains(f) && !reported.contains(f) {
                        reported.push(*f);
                        let face = classes.parent_face[*f].unwrap_or(*f);
                        violations.push(Violation::FaceReentry {
                            sign,
                            edge: e,
                            face,
                        });
                    }
                }
            }
        }
        ValidationReport::from_violations(violations)
    }

    pub fn double_cover(&self) -> Result<Overlay, OverlayError> {
        Overlay::build(&self.pair.double_cover())
    }

    /// This overlay if `H` is untwisted; otherwise an equivalent one with a
    /// consistent global orientation (re-oriented if orientable, the double
    /// cover if not).
    pub fn oriented(&self) -> Result<Cow<'_, Overlay>, OverlayError> {
        if !self.h.has_twists() {
            return Ok(Cow::Borrowed(self));
        }
        match self.h.normalized_orientation() {
            Some(h) => Ok(Cow::Owned(Overlay { h, ..self.clone() })),
            None => self.double_cover().map(Cow::Owned),
        }
    }

    /// Face of the opposite graph containing each H-edge.
    pub fn opposite_faces(&self) -> Vec<Option<usize>> {
        let classes = [
            self.parent_faces(Sign::Positive),
            self.parent_faces(Sign::Negative),
        ];
        (0..self.h.edge_count())
            .map(|e| {
                let cls = &classes[self.labels[e].sign.opposite().index()];
                let c = cls.class_of_face[self.h.edge_faces(e)[0]];
                cls.parent_face[c]
            })
            .collect()
    }

    pub fn to_json(&self) -> OverlayJson {
        let faces = self.opposite_faces();
        OverlayJson {
            vertices: (0..self.h.vertex_count())
                .map(|v| OverlayVertexJson {
                    id: v,
                    rotation: self.h.rotation_ends(v),
                    role: self.roles[v],
                })
                .collect(),
            edges: (0..self.h.edge_count())
                .map(|e| {
                    let l = self.labels[e];
                    OverlayEdgeJson {
                        id: e,
                        ends: self.h.endpoints(e),
                        sign: self.h.edge_sign(e),
                        label: OverlayLabelJson {
                            sign: l.sign,
                            depth: if l.deep { "deep" } else { "terminal" },
                            parent_edge: l.parent_edge,
                            position: l.position,
                            parent_face_plus: if l.sign == Sign::Negative {
                                faces[e]
                            } else {
                                None
                            },
                            parent_face_minus: if l.sign == Sign::Positive {
                                faces[e]
                            } else {
                                None
                            },
                        },
                    }
                })
                .collect(),
        }
    }

    /// Graphviz rendering: positive vertices as squares, negative as
    /// triangles, crossings as points, deep edges bold.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph H {\n  node [fontsize=10];\n");
        for v in 0..self.h.vertex_count() {
            let attrs = match self.roles[v] {
                VertexRole::Positive(p) => format!("shape=square, label=\"+{p}\""),
                VertexRole::Negative(n) => format!("shape=triangle, label=\"-{n}\""),
                VertexRole::Crossing(c) => format!("shape=point, xlabel=\"x{c}\""),
            };
            let _ = writeln!(out, "  v{v} [{attrs}];");
        }
        for e in 0..self.h.edge_count() {
            let [a, b] = self.h.endpoints(e);
            let l = self.labels[e];
            let color = match l.sign {
                Sign::Positive => "firebrick",
                Sign::Negative => "royalblue",
            };
            let style = if l.deep { "bold" } else { "solid" };
            let _ = writeln!(out, "  v{a} -- v{b} [color={color}, style={style}];");
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlayJson {
    pub vertices: Vec<OverlayVertexJson>,
    pub edges: Vec<OverlayEdgeJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlayVertexJson {
    pub id: usize,
    pub rotation: Vec<EdgeEnd>,
    #[serde(flatten)]
    pub role: VertexRole,
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlayEdgeJson {
    pub id: usize,
    pub ends: [usize; 2],
    pub sign: i8,
    pub label: OverlayLabelJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlayLabelJson {
    pub sign: Sign,
    pub depth: &'static str,
    pub parent_edge: usize,
    pub position: usize,
    pub parent_face_plus: Option<usize>,
    pub parent_face_minus: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{bigons, projective, torus_family, TorusParams};
    use crate::width::width;

    pub(crate) fn map(
        ends: Vec<[usize; 2]>,
        rotations: Vec<Vec<(usize, u8)>>,
        signs: Option<&[i8]>,
    ) -> CombinatorialMap {
        let rotations = rotations
            .into_iter()
            .map(|r| r.into_iter().map(EdgeEnd::from).collect())
            .collect();
        CombinatorialMap::build(ends, rotations, signs).unwrap()
    }

    /// Unit circle split at (0, 1) and (0, −1) into a left and a right edge,
    /// both oriented downwards, and a horizontal negative edge from (−2, 0)
    /// to (2, 0) entering and leaving the disc.
    pub(crate) fn reentry() -> PairInput {
        let gplus = map(
            vec![[0, 1], [0, 1]],
            vec![vec![(0, 0), (1, 0)], vec![(1, 1), (0, 1)]],
            None,
        );
        let gminus = map(vec![[0, 1]], vec![vec![(0, 0)], vec![(0, 1)]], None);
        PairInput::new(
            gplus,
            gminus,
            vec![Crossing::new(0, 0, 0, 0, 1), Crossing::new(1, 0, 0, 1, 1)],
        )
        .unwrap()
    }

    #[test]
    fn bigons_refine_to_a_sphere() {
        let ov = build_overlay(&bigons()).unwrap();
        let h = ov.h();
        assert_eq!(
            (h.vertex_count(), h.edge_count(), h.face_count()),
            (8, 12, 6)
        );
        assert_eq!(h.euler_characteristic(), 2);
        assert!(h.classify_surface().unwrap().is_sphere());
        assert!(ov.validate_normal().ok);
    }

    #[test]
    fn vertex_and_edge_numbering() {
        let ov = build_overlay(&bigons()).unwrap();
        assert_eq!(ov.role(0), VertexRole::Positive(0));
        assert_eq!(ov.role(2), VertexRole::Negative(0));
        assert_eq!(ov.role(7), VertexRole::Crossing(3));
        assert_eq!(ov.sub_edges(Sign::Positive, 1), &[3, 4, 5]);
        assert_eq!(ov.sub_edges(Sign::Negative, 0), &[6, 7, 8]);
        let deep: Vec<usize> = (0..12).filter(|&e| ov.is_deep(e)).collect();
        assert_eq!(deep, vec![1, 4, 7, 10]);
    }

    #[test]
    fn crossing_rotation_follows_handedness() {
        let ov = build_overlay(&bigons()).unwrap();
        // Crossing A: positive edge 0 at index 0, negative edge 0 at index 0, handedness -1.
        let rot = ov.h().rotation_ends(4);
        let p_fwd = EdgeEnd::new(1, 0);
        let n_bwd = EdgeEnd::new(6, 1);
        let p_bwd = EdgeEnd::new(0, 1);
        let n_fwd = EdgeEnd::new(7, 0);
        let start = rot.iter().position(|&x| x == p_fwd).unwrap();
        let cyclic: Vec<EdgeEnd> = (0..4).map(|i| rot[(start + i) % 4]).collect();
        assert_eq!(cyclic, vec![p_fwd, n_bwd, p_bwd, n_fwd]);
    }

    #[test]
    fn torus_two_refines_to_a_torus() {
        let ov = build_overlay(&torus_family(TorusParams::new(2)).unwrap()).unwrap();
        assert_eq!(ov.h().vertex_count(), 2 + 2 + 4);
        assert_eq!(ov.h().euler_characteristic(), 0);
        assert!(ov.h().is_orientable());
    }

    #[test]
    fn no_crossings_gives_disjoint_union() {
        let g = || {
            map(
                vec![[0, 1], [0, 1]],
                vec![vec![(0, 0), (1, 0)], vec![(1, 1), (0, 1)]],
                None,
            )
        };
        let ov = build_overlay(&PairInput::new(g(), g(), vec![]).unwrap()).unwrap();
        assert_eq!(ov.h().component_count(), 2);
        assert_eq!(ov.h().face_count(), 4);
        assert_eq!(width(&ov).value, crate::width::Width::Infinite);
        // Faces of the positive component stay apart; the negative component merges into one class.
        let classes = ov.parent_faces(Sign::Positive);
        assert_eq!(classes.class_count, 3);
        let labels = ov.h().component_labels();
        let mut seen = std::collections::BTreeSet::new();
        for (f, walk) in ov.h().faces().iter().enumerate() {
            if labels[ov.h().vertex_of(walk[0])] == labels[0] {
                assert!(seen.insert(classes.class_of_face[f]));
            }
        }
    }

    #[test]
    fn repeated_edge_pair_is_reported() {
        let g = || map(vec![[0, 0]], vec![vec![(0, 0), (0, 1)]], None);
        let pair = PairInput::new(
            g(),
            g(),
            vec![Crossing::new(0, 0, 0, 0, 1), Crossing::new(0, 1, 0, 1, 1)],
        )
        .unwrap();
        let report = build_overlay(&pair).unwrap().validate_normal();
        assert!(!report.ok);
        assert!(report
            .violations
            .contains(&Violation::MultipleIntersections {
                p_edge: 0,
                n_edge: 0,
                crossings: vec![0, 1]
            }));
    }

    #[test]
    fn contacts_are_rejected_at_parse() {
        let mut value = serde_json::to_value(bigons()).unwrap();
        value["contacts"] = serde_json::json!([{"plus_vertex": 0, "minus_edge": 1}]);
        let err = serde_json::from_value::<PairInput>(value)
            .unwrap_err()
            .to_string();
        assert!(err.contains("degenerate"), "{err}");
    }

    #[test]
    fn bad_indices_and_handedness_are_rejected() {
        let g = || map(vec![[0, 0]], vec![vec![(0, 0), (0, 1)]], None);
        assert!(matches!(
            PairInput::new(g(), g(), vec![Crossing::new(0, 1, 0, 0, 1)]),
            Err(OverlayError::InconsistentCrossingIndices { .. })
        ));
        assert!(matches!(
            PairInput::new(g(), g(), vec![Crossing::new(0, 0, 3, 0, 1)]),
            Err(OverlayError::UnknownEdge { .. })
        ));
        assert!(matches!(
            PairInput::new(g(), g(), vec![Crossing::new(0, 0, 0, 0, 2)]),
            Err(OverlayError::InvalidHandedness { .. })
        ));
    }

    #[test]
    fn parent_face_classes_match_parent_maps() {
        // Parent maps that are cellular in the refined surface.
        for pair in [bigons(), reentry(), crate::generators::cube_octa()] {
            let ov = build_overlay(&pair).unwrap();
            assert_eq!(
                ov.parent_faces(Sign::Negative).class_count,
                pair.gminus().face_count()
            );
            assert_eq!(
                ov.parent_faces(Sign::Positive).class_count,
                pair.gplus().face_count()
            );
        }
        let ov = build_overlay(&bigons()).unwrap();
        assert_eq!(ov.parent_faces(Sign::Negative).class_count, 2);
    }

    #[test]
    fn torus_two_negative_merge_gives_two_annuli() {
        let ov = build_overlay(&torus_family(TorusParams::new(2)).unwrap()).unwrap();
        let classes = ov.parent_faces(Sign::Positive);
        assert_eq!(classes.class_count, 2);
    }

    #[test]
    fn reentry_is_not_strongly_normal() {
        let pair = reentry();
        let ov = build_overlay(&pair).unwrap();
        assert!(ov.h().classify_surface().unwrap().is_sphere());
        assert!(ov.validate_normal().ok);
        let report = ov.validate_strongly_normal();
        assert!(!report.ok);
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::FaceReentry {
                sign: Sign::Negative,
                edge: 0,
                ..
            }
        )));
    }

    #[test]
    fn torus_family_is_strongly_normal() {
        let ov = build_overlay(&torus_family(TorusParams::new(2)).unwrap()).unwrap();
        assert!(ov.validate_strongly_normal().ok);
    }

    #[test]
    fn preprocess_contracts_pendant_edge() {
        let b = bigons();
        let gplus = map(
            vec![[0, 1], [0, 1], [0, 2]],
            vec![
                vec![(0, 0), (2, 0), (1, 0)],
                vec![(1, 1), (0, 1)],
                vec![(2, 1)],
            ],
            None,
        );
        let pair = PairInput::new(gplus, b.gminus().clone(), b.crossings().to_vec()).unwrap();
        let before = width(&build_overlay(&pair).unwrap()).value;
        let pre = pair.preprocess();
        assert_eq!(pre.gplus().vertex_count(), 2);
        assert_eq!(pre.gplus().edge_count(), 2);
        assert_eq!(width(&build_overlay(&pre).unwrap()).value, before);
    }

    #[test]
    fn preprocess_deletes_free_loop() {
        let b = bigons();
        let gplus = map(
            vec![[0, 1], [0, 1], [0, 0]],
            vec![vec![(0, 0), (2, 0), (2, 1), (1, 0)], vec![(1, 1), (0, 1)]],
            None,
        );
        let pair = PairInput::new(gplus, b.gminus().clone(), b.crossings().to_vec()).unwrap();
        let before = width(&build_overlay(&pair).unwrap()).value;
        let pre = pair.preprocess();
        assert_eq!(pre.gplus().edge_count(), 2);
        assert_eq!(width(&build_overlay(&pre).unwrap()).value, before);
        assert_eq!(bigons().preprocess(), bigons());
    }

    #[test]
    fn preprocess_contracts_twisted_edge() {
        let signs = [-1i8, 1];
        let gplus = map(
            vec![[0, 1], [1, 0]],
            vec![vec![(0, 0), (1, 1)], vec![(1, 0), (0, 1)]],
            Some(&signs),
        );
        let gminus = map(vec![[0, 0]], vec![vec![(0, 0), (0, 1)]], Some(&[-1]));
        let pair = PairInput::new(gplus, gminus, vec![Crossing::new(1, 0, 0, 0, -1)]).unwrap();
        let ov = build_overlay(&pair).unwrap();
        let pre = pair.preprocess();
        let ov2 = build_overlay(&pre).unwrap();
        assert_eq!(pre.gplus().vertex_count(), 1);
        assert_eq!(ov.h().euler_characteristic(), 1);
        assert_eq!(ov2.h().euler_characteristic(), 1);
        assert_eq!(width(&ov).value, width(&ov2).value);
    }

    #[test]
    fn flipping_a_vertex_keeps_the_refinement() {
        let pair = bigons();
        for sign in [Sign::Positive, Sign::Negative] {
            let flipped = pair.flip_vertex(sign, 0);
            let a = build_overlay(&pair).unwrap();
            let b = build_overlay(&flipped).unwrap();
            assert!(b.h().has_twists());
            assert_eq!(b.h().face_count(), a.h().face_count());
            assert!(b.h().is_orientable());
            assert_eq!(width(&b).value, width(&a).value);
        }
    }

    #[test]
    fn projective_pair_and_its_cover() {
        let ov = build_overlay(&projective()).unwrap();
        assert_eq!(
            (
                ov.h().vertex_count(),
                ov.h().edge_count(),
                ov.h().face_count()
            ),
            (3, 4, 2)
        );
        assert!(ov.h().classify_surface().unwrap().is_projective_plane());
        let cover = ov.double_cover().unwrap();
        assert_eq!(cover.h().euler_characteristic(), 2);
        assert!(!cover.h().has_twists());
    }

    fn role_counts(ov: &Overlay) -> [usize; 3] {
        let mut c = [0; 3];
        for r in ov.roles() {
            c[match r {
                VertexRole::Positive(_) => 0,
                VertexRole::Negative(_) => 1,
                VertexRole::Crossing(_) => 2,
            }] += 1;
        }
        c
    }

    #[test]
    fn cover_of_pair_matches_cover_of_refinement() {
        for pair in [
            projective(),
            bigons(),
            torus_family(TorusParams::new(4)).unwrap(),
        ] {
            let ov = build_overlay(&pair).unwrap();
            let a = ov.double_cover().unwrap();
            let b = ov.h().double_cover();
            assert_eq!(a.h().vertex_count(), b.vertex_count());
            assert_eq!(a.h().edge_count(), b.edge_count());
            assert_eq!(a.h().face_count(), b.face_count());
            assert_eq!(
                a.h().euler_characteristic(),
                2 * ov.h().euler_characteristic()
            );
            assert_eq!(role_counts(&a), role_counts(&ov).map(|x| 2 * x));
        }
    }

    #[test]
    fn sign_changes_on_faces_are_even() {
        for pair in [
            bigons(),
            projective(),
            reentry(),
            torus_family(TorusParams::new(6)).unwrap(),
        ] {
            let ov = build_overlay(&pair).unwrap();
            for f in 0..ov.h().faces().len() {
                assert_eq!(crate::accounting::sign_changes(&ov, f) % 2, 0);
            }
        }
    }

    #[test]
    fn pair_json_round_trip() {
        let pair = bigons();
        let text = serde_json::to_string(&pair).unwrap();
        assert!(text.contains("\"crossings\":[{\"id\":0,\"p_edge\":0,\"p_index\":0,\"n_edge\":0,\"n_index\":0,\"handedness\":-1}"));
        let back: PairInput = serde_json::from_str(&text).unwrap();
        assert_eq!(back, pair);
        let flipped = pair.flip_vertex(Sign::Negative, 1);
        let back: PairInput =
            serde_json::from_str(&serde_json::to_string(&flipped).unwrap()).unwrap();
        assert_eq!(back, flipped);
    }

    #[test]
    fn exports_mark_roles_and_depth() {
        let ov = build_overlay(&bigons()).unwrap();
        let dot = ov.to_dot();
        assert!(dot.contains("v0 [shape=square"));
        assert!(dot.contains("v2 [shape=triangle"));
        assert!(dot.contains("v4 [shape=point"));
        assert_eq!(dot.matches("style=bold").count(), 4);
        let json = serde_json::to_value(ov.to_json()).unwrap();
        assert_eq!(json["vertices"][4]["role"], "crossing");
        assert_eq!(json["edges"][1]["label"]["depth"], "deep");
        assert_eq!(json["edges"][0]["label"]["sign"], "positive");
    }
}
