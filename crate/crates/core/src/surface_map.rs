//! Graphs cellularly embedded in closed surfaces, encoded as combinatorial maps.
//!
//! Every edge `e` owns two darts, `2e` (its end 0) and `2e + 1` (its end 1), so
//! the edge involution is `d ^ 1`. Each vertex carries the counterclockwise
//! cyclic order of the darts leaving it. Non-orientable surfaces are encoded
//! with a per-edge twist bit (edge sign −1): crossing a twisted edge reverses
//! the local orientation.
//!
//! Faces are traced on flags. A flag `(d, side)` is the wedge at the tail of
//! `d` between `d` and its counterclockwise successor (`Plus`) or predecessor
//! (`Minus`). Three involutions act on flags; faces are the orbits of the
//! group generated by the edge-end swap and the wedge swap. With no twisted
//! edges, the `Minus` flags of a face follow `sigma ∘ alpha`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::union_find::UnionFind;

/// Dart handle: `2 * edge + end`.
pub type Dart = usize;

#[inline]
pub fn alpha(d: Dart) -> Dart {
    d ^ 1
}

#[inline]
pub fn edge_of(d: Dart) -> usize {
    d >> 1
}

#[inline]
pub fn dart_of(edge: usize, end: usize) -> Dart {
    2 * edge + end
}

/// One end of an edge, as referenced from a vertex rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(usize, u8)", into = "(usize, u8)")]
pub struct EdgeEnd {
    pub edge: usize,
    pub end: u8,
}

impl EdgeEnd {
    pub fn new(edge: usize, end: u8) -> Self {
        Self { edge, end }
    }

    pub fn dart(self) -> Dart {
        dart_of(self.edge, self.end as usize)
    }

    pub fn from_dart(d: Dart) -> Self {
        Self {
            edge: edge_of(d),
            end: (d & 1) as u8,
        }
    }
}

impl From<(usize, u8)> for EdgeEnd {
    fn from((edge, end): (usize, u8)) -> Self {
        Self { edge, end }
    }
}

impl From<EdgeEnd> for (usize, u8) {
    fn from(e: EdgeEnd) -> Self {
        (e.edge, e.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("malformed rotation at vertex {vertex}: {reason}")]
    MalformedRotation { vertex: usize, reason: String },
    #[error("edge {edge} end {end} is not placed in the rotation of any vertex")]
    DanglingDart { edge: usize, end: u8 },
    #[error("edge {edge} has sign {sign}; signs must be +1 or -1")]
    InvalidSign { edge: usize, sign: i64 },
    #[error("edge {edge} references vertex {vertex}, but the map has {vertices} vertices")]
    UnknownVertex {
        edge: usize,
        vertex: usize,
        vertices: usize,
    },
    #[error("ids must be dense: expected {kind} ids 0..{expected}, found {found}")]
    SparseIds {
        kind: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("cannot contract loop edge {0}")]
    LoopContraction(usize),
    #[error("edge {0} does not exist")]
    NoSuchEdge(usize),
    #[error("surface classification needs a connected map; this one has {0} components")]
    DisconnectedMap(usize),
}

/// Closed-surface type of a connected map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Surface {
    Orientable { genus: u32 },
    NonOrientable { crosscaps: u32 },
}

impl Surface {
    pub fn euler_characteristic(self) -> i64 {
        match self {
            Surface::Orientable { genus } => 2 - 2 * genus as i64,
            Surface::NonOrientable { crosscaps } => 2 - crosscaps as i64,
        }
    }

    pub fn is_sphere(self) -> bool {
        self == Surface::Orientable { genus: 0 }
    }

    pub fn is_projective_plane(self) -> bool {
        self == Surface::NonOrientable { crosscaps: 1 }
    }

    pub fn name(self) -> String {
        match self {
            Surface::Orientable { genus: 0 } => "sphere".into(),
            Surface::Orientable { genus: 1 } => "torus".into(),
            Surface::Orientable { genus } => format!("orientable genus {genus}"),
            Surface::NonOrientable { crosscaps: 1 } => "projective plane".into(),
            Surface::NonOrientable { crosscaps: 2 } => "Klein bottle".into(),
            Surface::NonOrientable { crosscaps } => format!("non-orientable genus {crosscaps}"),
        }
    }
}

/// Flag side: wedge after (`Plus`) or before (`Minus`) the dart in the rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Minus = 0,
    Plus = 1,
}

#[inline]
pub fn flag(d: Dart, side: Side) -> usize {
    2 * d + side as usize
}

#[derive(Debug, Clone)]
struct FaceData {
    walks: Vec<Vec<Dart>>,
    face_of_flag: Vec<usize>,
}

/// A graph cellularly embedded in a closed surface. Immutable; editing
/// operations return new maps.
#[derive(Debug, Clone)]
pub struct CombinatorialMap {
    ends: Vec<[usize; 2]>,
    twisted: Vec<bool>,
    rotations: Vec<Vec<Dart>>,
    sigma: Vec<Dart>,
    sigma_inv: Vec<Dart>,
    dart_vertex: Vec<usize>,
    faces: OnceLock<FaceData>,
}

impl PartialEq for CombinatorialMap {
    fn eq(&self, other: &Self) -> bool {
        self.ends == other.ends
            && self.twisted == other.twisted
            && self.rotations == other.rotations
    }
}

impl Eq for CombinatorialMap {}

impl CombinatorialMap {
    /// Builds and validates a map from edge endpoints, counterclockwise
    /// rotations of edge-ends at every vertex, and optional ±1 edge signs.
    pub fn build(
        ends: Vec<[usize; 2]>,
        rotations: Vec<Vec<EdgeEnd>>,
        signs: Option<&[i8]>,
    ) -> Result<Self, MapError> {
        let n_edges = ends.len();
        let n_vertices = rotations.len();
        let twisted = match signs {
            None => vec![false; n_edges],
            Some(s) => {
                if s.len() != n_edges {
                    return Err(MapError::SparseIds {
                        kind: "sign",
                        expected: n_edges,
                        found: s.len(),
                    });
                }
                s.iter()
                    .enumerate()
                    .map(|(e, &v)| match v {
                        1 => Ok(false),
                        -1 => Ok(true),
                        other => Err(MapError::InvalidSign {
                            edge: e,
                            sign: other as i64,
                        }),
                    })
                    .collect::<Result<Vec<_>, _>>()?
            }
        };
        for (e, pair) in ends.iter().enumerate() {
            for &v in pair {
                if v >= n_vertices {
                    return Err(MapError::UnknownVertex {
                        edge: e,
                        vertex: v,
                        vertices: n_vertices,
                    });
                }
            }
        }

        let n_darts = 2 * n_edges;
        let mut dart_vertex = vec![usize::MAX; n_darts];
        let mut sigma = vec![usize::MAX; n_darts];
        let mut sigma_inv = vec![usize::MAX; n_darts];
        let mut dart_rotations = Vec::with_capacity(n_vertices);
        for (v, rot) in rotations.iter().enumerate() {
            let mut darts = Vec::with_capacity(rot.len());
            for r in rot {
                if r.edge >= n_edges || r.end > 1 {
                    return Err(MapError::MalformedRotation {
                        vertex: v,
                        reason: format!("unknown edge-end ({}, {})", r.edge, r.end),
                    });
                }
                let d = r.dart();
                if dart_vertex[d] != usize::MAX {
                    return Err(MapError::MalformedRotation {
                        vertex: v,
                        reason: format!("edge-end ({}, {}) placed twice", r.edge, r.end),
                    });
                }
                if ends[r.edge][r.end as usize] != v {
                    return Err(MapError::MalformedRotation {
                        vertex: v,
                        reason: format!(
                            "edge-end ({}, {}) belongs to vertex {}",
                            r.edge, r.end, ends[r.edge][r.end as usize]
                        ),
                    });
                }
                dart_vertex[d] = v;
                darts.push(d);
            }
            for (i, &d) in darts.iter().enumerate() {
                let next = darts[(i + 1) % darts.len()];
                sigma[d] = next;
                sigma_inv[next] = d;
            }
            dart_rotations.push(darts);
        }
        if let Some(d) = dart_vertex.iter().position(|&v| v == usize::MAX) {
            let end = EdgeEnd::from_dart(d);
            return Err(MapError::DanglingDart {
                edge: end.edge,
                end: end.end,
            });
        }

        Ok(Self {
            ends,
            twisted,
            rotations: dart_rotations,
            sigma,
            sigma_inv,
            dart_vertex,
            faces: OnceLock::new(),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.rotations.len()
    }

    pub fn edge_count(&self) -> usize {
        self.ends.len()
    }

    pub fn dart_count(&self) -> usize {
        2 * self.ends.len()
    }

    pub fn face_count(&self) -> usize {
        self.face_data().walks.len() + self.isolated_vertices().count()
    }

    pub fn endpoints(&self, e: usize) -> [usize; 2] {
        self.ends[e]
    }

    pub fn is_loop(&self, e: usize) -> bool {
        self.ends[e][0] == self.ends[e][1]
    }

    pub fn is_twisted(&self, e: usize) -> bool {
        self.twisted[e]
    }

    /// +1 for an ordinary edge, −1 for a twisted one.
    pub fn edge_sign(&self, e: usize) -> i8 {
        if self.twisted[e] {
            -1
        } else {
            1
        }
    }

    pub fn has_twists(&self) -> bool {
        self.twisted.iter().any(|&t| t)
    }

    pub fn vertex_of(&self, d: Dart) -> usize {
        self.dart_vertex[d]
    }

    /// Vertex at the far end of `d`.
    pub fn head(&self, d: Dart) -> usize {
        self.dart_vertex[alpha(d)]
    }

    pub fn sigma(&self, d: Dart) -> Dart {
        self.sigma[d]
    }

    pub fn sigma_inv(&self, d: Dart) -> Dart {
        self.sigma_inv[d]
    }

    /// Counterclockwise rotation of darts at `v`.
    pub fn rotation(&self, v: usize) -> &[Dart] {
        &self.rotations[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rotations[v].len()
    }

    pub fn rotation_ends(&self, v: usize) -> Vec<EdgeEnd> {
        self.rotations[v]
            .iter()
            .map(|&d| EdgeEnd::from_dart(d))
            .collect()
    }

    fn isolated_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertex_count()).filter(|&v| self.rotations[v].is_empty())
    }

    fn signs(&self) -> Vec<i8> {
        (0..self.edge_count()).map(|e| self.edge_sign(e)).collect()
    }

    /// Flag reached by moving to the other end of the edge, same side of it.
    pub fn flag_across_edge(&self, f: usize) -> usize {
        let d = f >> 1;
        let side = f & 1;
        let other = alpha(d);
        if self.twisted[edge_of(d)] {
            2 * other + side
        } else {
            2 * other + (side ^ 1)
        }
    }

    /// Flag sharing the same wedge at the same vertex.
    pub fn flag_across_wedge(&self, f: usize) -> usize {
        let d = f >> 1;
        if f & 1 == Side::Plus as usize {
            flag(self.sigma[d], Side::Minus)
        } else {
            flag(self.sigma_inv[d], Side::Plus)
        }
    }

    fn face_data(&self) -> &FaceData {
        self.faces.get_or_init(|| {
            let n_flags = 2 * self.dart_count();
            let mut face_of_flag = vec![usize::MAX; n_flags];
            let mut walks = Vec::new();
            let starts = (0..self.dart_count())
                .map(|d| flag(d, Side::Minus))
                .chain((0..self.dart_count()).map(|d| flag(d, Side::Plus)));
            for start in starts {
                if face_of_flag[start] != usize::MAX {
                    continue;
                }
                let id = walks.len();
                let mut walk = Vec::new();
                let mut f = start;
                loop {
                    face_of_flag[f] = id;
                    walk.push(f >> 1);
                    let g = self.flag_across_edge(f);
                    face_of_flag[g] = id;
                    f = self.flag_across_wedge(g);
                    if f == start {
                        break;
                    }
                }
                walks.push(walk);
            }
            FaceData {
                walks,
                face_of_flag,
            }
        })
    }

    /// Boundary walks of all faces, as sequences of departing darts. Isolated
    /// vertices bound a face with an empty walk and are not listed.
    pub fn faces(&self) -> &[Vec<Dart>] {
        &self.face_data().walks
    }

    pub fn face_of_flag(&self, f: usize) -> usize {
        self.face_data().face_of_flag[f]
    }

    /// The two faces on either side of edge `e` (possibly equal).
    pub fn edge_faces(&self, e: usize) -> [usize; 2] {
        let d = dart_of(e, 0);
        [
            self.face_of_flag(flag(d, Side::Minus)),
            self.face_of_flag(flag(d, Side::Plus)),
        ]
    }

    /// Faces incident to vertex `v`, one entry per wedge.
    pub fn vertex_faces(&self, v: usize) -> Vec<usize> {
        self.rotations[v]
            .iter()
            .map(|&d| self.face_of_flag(flag(d, Side::Plus)))
            .collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.face_count() as i64
    }

    /// Connected component label of every vertex, numbered by first appearance.
    pub fn component_labels(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.vertex_count());
        for e in &self.ends {
            uf.union(e[0], e[1]);
        }
        uf.dense_labels()
    }

    pub fn component_count(&self) -> usize {
        self.component_labels()
            .iter()
            .copied()
            .max()
            .map_or(0, |m| m + 1)
    }

    /// Spanning-tree normalisation: per-vertex orientation flips that make
    /// every edge untwisted, or `None` if some cycle is orientation-reversing.
    pub fn orientation_flips(&self) -> Option<Vec<bool>> {
        let n = self.vertex_count();
        let mut flip: Vec<Option<bool>> = vec![None; n];
        let mut stack = Vec::new();
        for root in 0..n {
            if flip[root].is_some() {
                continue;
            }
            flip[root] = Some(false);
            stack.push(root);
            while let Some(v) = stack.pop() {
                let fv = flip[v].unwrap();
                for &d in &self.rotations[v] {
                    let w = self.head(d);
                    let want = fv ^ self.twisted[edge_of(d)];
                    match flip[w] {
                        None => {
                            flip[w] = Some(want);
                            stack.push(w);
                        }
                        Some(fw) if fw != want => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        Some(flip.into_iter().map(|f| f.unwrap_or(false)).collect())
    }

    pub fn is_orientable(&self) -> bool {
        self.orientation_flips().is_some()
    }

    /// Surface type of a connected map.
    pub fn classify_surface(&self) -> Result<Surface, MapError> {
        let k = self.component_count();
        if k != 1 {
            return Err(MapError::DisconnectedMap(k));
        }
        let chi = self.euler_characteristic();
        Ok(if self.is_orientable() {
            Surface::Orientable {
                genus: ((2 - chi) / 2) as u32,
            }
        } else {
            Surface::NonOrientable {
                crosscaps: (2 - chi) as u32,
            }
        })
    }

    /// Surface type of every component, in component-label order.
    pub fn component_surfaces(&self) -> Vec<Surface> {
        let labels = self.component_labels();
        (0..self.component_count())
            .map(|c| {
                let keep: Vec<bool> = labels.iter().map(|&l| l == c).collect();
                self.induced(&keep)
                    .0
                    .classify_surface()
                    .expect("component is connected")
            })
            .collect()
    }

    /// Sub-map induced on the marked vertices (keeping edges with both ends
    /// marked). Returns the map plus old-to-new vertex and edge indices.
    pub fn induced(
        &self,
        keep_vertex: &[bool],
    ) -> (CombinatorialMap, Vec<Option<usize>>, Vec<Option<usize>>) {
        let mut vmap = vec![None; self.vertex_count()];
        let mut next = 0;
        for v in 0..self.vertex_count() {
            if keep_vertex[v] {
                vmap[v] = Some(next);
                next += 1;
            }
        }
        let mut emap = vec![None; self.edge_count()];
        let mut ends = Vec::new();
        let mut signs = Vec::new();
        for e in 0..self.edge_count() {
            let [a, b] = self.ends[e];
            if let (Some(a2), Some(b2)) = (vmap[a], vmap[b]) {
                emap[e] = Some(ends.len());
                ends.push([a2, b2]);
                signs.push(self.edge_sign(e));
            }
        }
        let rotations = (0..self.vertex_count())
            .filter(|&v| keep_vertex[v])
            .map(|v| {
                self.rotations[v]
                    .iter()
                    .filter_map(|&d| emap[edge_of(d)].map(|e2| EdgeEnd::new(e2, (d & 1) as u8)))
                    .collect()
            })
            .collect();
        let map = CombinatorialMap::build(ends, rotations, Some(&signs))
            .expect("induced sub-map is valid");
        (map, vmap, emap)
    }

    /// Same embedding with the local orientation at each marked vertex reversed.
    pub fn flip_vertices(&self, flip: &[bool]) -> CombinatorialMap {
        let mut signs = self.signs();
        for (e, pair) in self.ends.iter().enumerate() {
            if flip[pair[0]] != flip[pair[1]] {
                signs[e] = -signs[e];
            }
        }
        let rotations = (0..self.vertex_count())
            .map(|v| {
                let mut r = self.rotation_ends(v);
                if flip[v] {
                    r.reverse();
                }
                r
            })
            .collect();
        CombinatorialMap::build(self.ends.clone(), rotations, Some(&signs))
            .expect("flipping preserves validity")
    }

    /// Equivalent map with no twisted edges, when the surface is orientable.
    pub fn normalized_orientation(&self) -> Option<CombinatorialMap> {
        self.orientation_flips()
            .map(|flips| self.flip_vertices(&flips))
    }

    /// Orientable double cover. Vertex `v` lifts to `v` and `v + |V|`, edge `e`
    /// to `e` and `e + |E|`; sheet 1 carries the reversed rotations. A twisted
    /// edge joins the two sheets.
    pub fn double_cover(&self) -> CombinatorialMap {
        let nv = self.vertex_count();
        let ne = self.edge_count();
        let mut ends = Vec::with_capacity(2 * ne);
        for sheet in 0..2 {
            for e in 0..ne {
                let [a, b] = self.ends[e];
                let b_sheet = if self.twisted[e] { 1 - sheet } else { sheet };
                ends.push([a + sheet * nv, b + b_sheet * nv]);
            }
        }
        let lift = |d: Dart, sheet: usize| -> EdgeEnd {
            let e = edge_of(d);
            let end = (d & 1) as u8;
            // end 0 of copy `s` sits on sheet `s`; end 1 of a twisted copy on the other sheet
            let copy = if end == 1 && self.twisted[e] {
                1 - sheet
            } else {
                sheet
            };
            EdgeEnd::new(e + copy * ne, end)
        };
        let mut rotations = Vec::with_capacity(2 * nv);
        for sheet in 0..2 {
            for v in 0..nv {
                let mut r: Vec<EdgeEnd> =
                    self.rotations[v].iter().map(|&d| lift(d, sheet)).collect();
                if sheet == 1 {
                    r.reverse();
                }
                rotations.push(r);
            }
        }
        CombinatorialMap::build(ends, rotations, None).expect("double cover is a valid map")
    }

    /// Contracts a non-loop edge, merging its end-1 vertex into its end-0
    /// vertex. Later vertex and edge indices shift down by one.
    pub fn contract_edge(&self, e: usize) -> Result<CombinatorialMap, MapError> {
        self.contract_edge_with_maps(e).map(|(m, _, _)| m)
    }

    /// As [`contract_edge`](Self::contract_edge), also returning old-to-new
    /// vertex and edge indices.
    pub fn contract_edge_with_maps(
        &self,
        e: usize,
    ) -> Result<(CombinatorialMap, Vec<usize>, Vec<Option<usize>>), MapError> {
        if e >= self.edge_count() {
            return Err(MapError::NoSuchEdge(e));
        }
        if self.is_loop(e) {
            return Err(MapError::LoopContraction(e));
        }
        let [u, w] = self.ends[e];
        let base = if self.twisted[e] {
            let mut flip = vec![false; self.vertex_count()];
            flip[w] = true;
            self.flip_vertices(&flip)
        } else {
            self.clone()
        };
        let vmap: Vec<usize> = (0..self.vertex_count())
            .map(|x| match x.cmp(&w) {
                std::cmp::Ordering::Less => x,
                std::cmp::Ordering::Equal => {
                    if u < w {
                        u
                    } else {
                        u - 1
                    }
                }
                std::cmp::Ordering::Greater => x - 1,
            })
            .collect();
        let emap: Vec<Option<usize>> = (0..self.edge_count())
            .map(|x| match x.cmp(&e) {
                std::cmp::Ordering::Less => Some(x),
                std::cmp::Ordering::Equal => None,
                std::cmp::Ordering::Greater => Some(x - 1),
            })
            .collect();
        let remap = |d: Dart| EdgeEnd::new(emap[edge_of(d)].unwrap(), (d & 1) as u8);
        let after = |v: usize, start: Dart| -> Vec<EdgeEnd> {
            let rot = base.rotation(v);
            let i = rot.iter().position(|&d| d == start).unwrap();
            (1..rot.len())
                .map(|k| remap(rot[(i + k) % rot.len()]))
                .collect()
        };

        let mut rotations = Vec::with_capacity(self.vertex_count() - 1);
        for v in 0..self.vertex_count() {
            if v == w {
                continue;
            }
            if v == u {
                let mut merged = after(u, dart_of(e, 0));
                merged.extend(after(w, dart_of(e, 1)));
                rotations.push(merged);
            } else {
                rotations.push(base.rotation(v).iter().map(|&d| remap(d)).collect());
            }
        }
        let mut ends = Vec::with_capacity(self.edge_count() - 1);
        let mut signs = Vec::with_capacity(self.edge_count() - 1);
        for x in 0..self.edge_count() {
            if x == e {
                continue;
            }
            let [a, b] = base.ends[x];
            ends.push([vmap[a], vmap[b]]);
            signs.push(base.edge_sign(x));
        }
        let map = CombinatorialMap::build(ends, rotations, Some(&signs))?;
        Ok((map, vmap, emap))
    }

    /// Removes an edge; later edge indices shift down by one.
    pub fn delete_edge(&self, e: usize) -> Result<CombinatorialMap, MapError> {
        if e >= self.edge_count() {
            return Err(MapError::NoSuchEdge(e));
        }
        let shift = |x: usize| if x > e { x - 1 } else { x };
        let rotations = (0..self.vertex_count())
            .map(|v| {
                self.rotations[v]
                    .iter()
                    .filter(|&&d| edge_of(d) != e)
                    .map(|&d| EdgeEnd::new(shift(edge_of(d)), (d & 1) as u8))
                    .collect()
            })
            .collect();
        let mut ends = self.ends.clone();
        ends.remove(e);
        let mut signs = self.signs();
        signs.remove(e);
        CombinatorialMap::build(ends, rotations, Some(&signs))
    }

    pub fn to_json(&self) -> MapJson {
        MapJson::from(self)
    }
}

/// Serialised map: `{"vertices":[{"id","rotation":[[edge,end],...]}],
/// "edges":[{"id","ends":[v,v],"sign":±1}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapJson {
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<EdgeJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexJson {
    pub id: usize,
    pub rotation: Vec<EdgeEnd>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub id: usize,
    pub ends: [usize; 2],
    #[serde(default = "default_sign")]
    pub sign: i8,
}

fn default_sign() -> i8 {
    1
}

impl From<&CombinatorialMap> for MapJson {
    fn from(m: &CombinatorialMap) -> Self {
        MapJson {
            vertices: (0..m.vertex_count())
                .map(|v| VertexJson {
                    id: v,
                    rotation: m.rotation_ends(v),
                })
                .collect(),
            edges: (0..m.edge_count())
                .map(|e| EdgeJson {
                    id: e,
                    ends: m.endpoints(e),
                    sign: m.edge_sign(e),
                })
                .collect(),
        }
    }
}

impl TryFrom<MapJson> for CombinatorialMap {
    type Error = MapError;

    fn try_from(json: MapJson) -> Result<Self, MapError> {
        let nv = json.vertices.len();
        let ne = json.edges.len();
        let mut rotations: Vec<Option<Vec<EdgeEnd>>> = vec![None; nv];
        for v in json.vertices {
            if v.id >= nv || rotations[v.id].is_some() {
                return Err(MapError::SparseIds {
                    kind: "vertex",
                    expected: nv,
                    found: v.id,
                });
            }
            rotations[v.id] = Some(v.rotation);
        }
        let mut ends: Vec<Option<([usize; 2], i8)>> = vec![None; ne];
        for e in json.edges {
            if e.id >= ne || ends[e.id].is_some() {
                return Err(MapError::SparseIds {
                    kind: "edge",
                    expected: ne,
                    found: e.id,
                });
            }
            ends[e.id] = Some((e.ends, e.sign));
        }
        let (ends, signs): (Vec<_>, Vec<_>) = ends.into_iter().map(|x| x.unwrap()).unzip();
        CombinatorialMap::build(
            ends,
            rotations.into_iter().map(|r| r.unwrap()).collect(),
            Some(&signs),
        )
    }
}

impl Serialize for CombinatorialMap {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MapJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CombinatorialMap {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = MapJson::deserialize(deserializer)?;
        CombinatorialMap::try_from(json).map_err(serde::de::Error::custom)
    }
}
