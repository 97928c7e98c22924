//! Geodesic maps of rational 3-polytopes and the width of 4-prismatoids.
//!
//! A 4-prismatoid with bases `Q⁺` and `Q⁻` in parallel hyperplanes has width
//! two plus the width of the pair of geodesic maps cut out on the unit sphere
//! by the normal fans of the bases, both placed in a common ℝ³. This module
//! computes those maps exactly (big-integer arithmetic throughout) and
//! overlays them into a [`PairInput`].
//!
//! Rational inputs are cleared of denominators by a positive common factor
//! before any predicate is evaluated, so every sign test is decided on
//! integers.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::overlay::{build_overlay, Crossing, PairInput};
use crate::surface_map::{CombinatorialMap, EdgeEnd};
use crate::width::{width, Width};

pub type IVec3 = [BigInt; 3];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("need at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("points do not span 3-space")]
    DegenerateDimension,
    #[error("cannot parse rational {0:?}")]
    Parse(String),
    #[error("internal hull inconsistency: {0}")]
    Internal(String),
}

/// Point of ℝ³ with exact rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalVec3(pub [BigRational; 3]);

impl RationalVec3 {
    pub fn from_ints(x: i64, y: i64, z: i64) -> Self {
        Self([x, y, z].map(|c| BigRational::from_integer(c.into())))
    }

    pub fn scaled(&self, s: &BigRational) -> Self {
        Self(self.0.clone().map(|c| c * s))
    }
}

/// Formats a rational as `"p/q"`, always with a denominator.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<BigRational, GeometryError> {
    let err = || GeometryError::Parse(s.to_string());
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| err())?;
    let d: BigInt = d.parse().map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(BigRational::new(n, d))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RationalJson {
    Text(String),
    Int(i64),
}

impl Serialize for RationalVec3 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let parts: Vec<String> = self.0.iter().map(format_rational).collect();
        parts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalVec3 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = <[RationalJson; 3]>::deserialize(d)?;
        let mut out = Vec::with_capacity(3);
        for r in raw {
            out.push(match r {
                RationalJson::Int(i) => BigRational::from_integer(i.into()),
                RationalJson::Text(t) => parse_rational(&t).map_err(serde::de::Error::custom)?,
            });
        }
        Ok(RationalVec3(out.try_into().unwrap()))
    }
}

/// Polytope file format: `{"vertices": [["p/q","p/q","p/q"], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSet {
    pub vertices: Vec<RationalVec3>,
}

fn sub(a: &IVec3, b: &IVec3) -> IVec3 {
    [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]]
}

pub fn cross(a: &IVec3, b: &IVec3) -> IVec3 {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

pub fn dot(a: &IVec3, b: &IVec3) -> BigInt {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

fn neg(a: &IVec3) -> IVec3 {
    [-&a[0], -&a[1], -&a[2]]
}

fn is_zero(a: &IVec3) -> bool {
    a.iter().all(Zero::is_zero)
}

/// Divides out the gcd of the coordinates.
pub fn primitive(a: &IVec3) -> IVec3 {
    let g = a[0].gcd(&a[1]).gcd(&a[2]);
    if g.is_zero() {
        return a.clone();
    }
    [&a[0] / &g, &a[1] / &g, &a[2] / &g]
}

/// Same ray: parallel and pointing the same way.
pub fn same_ray(a: &IVec3, b: &IVec3) -> bool {
    is_zero(&cross(a, b)) && dot(a, b).is_positive()
}

/// Integer points obtained by multiplying every coordinate by the least
/// common multiple of all denominators.
fn to_integer_points(points: &[RationalVec3]) -> Vec<IVec3> {
    let mut l = BigInt::one();
    for p in points {
        for c in &p.0 {
            l = l.lcm(c.denom());
        }
    }
    points
        .iter()
        .map(|p| p.0.clone().map(|c| (c * &l).to_integer()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Facet {
    /// Vertex ids, counterclockwise seen from outside.
    pub vertices: Vec<usize>,
    /// Primitive outward integer normal.
    #[serde(serialize_with = "ser_ivec")]
    pub normal: IVec3,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HullEdge {
    /// `vertices[0] < vertices[1]`.
    pub vertices: [usize; 2],
    /// `facets[0]` traverses the edge from `vertices[0]` to `vertices[1]`.
    pub facets: [usize; 2],
}

fn ser_ivec<S: Serializer>(v: &IVec3, s: S) -> Result<S::Ok, S::Error> {
    let parts: Vec<String> = v.iter().map(|c| c.to_string()).collect();
    parts.serialize(s)
}

/// Convex 3-polytope. Vertices are the extreme input points, in input order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Polytope3 {
    pub vertices: Vec<RationalVec3>,
    /// Input index of each vertex.
    pub source: Vec<usize>,
    pub facets: Vec<Facet>,
    pub edges: Vec<HullEdge>,
}

impl Polytope3 {
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.facets.len() as i64
    }
}

struct Tri {
    v: [usize; 3],
    normal: IVec3,
}

fn tri(p: &[IVec3], a: usize, b: usize, c: usize) -> Tri {
    Tri {
        v: [a, b, c],
        normal: cross(&sub(&p[b], &p[a]), &sub(&p[c], &p[a])),
    }
}

/// Exact incremental hull with coplanar facet merging.
pub fn convex_hull_3(points: &[RationalVec3]) -> Result<Polytope3, GeometryError> {
    if points.len() < 4 {
        return Err(GeometryError::TooFewPoints(points.len()));
    }
    let p = to_integer_points(points);
    let n = p.len();
    let i1 = (1..n)
        .find(|&i| p[i] != p[0])
        .ok_or(GeometryError::DegenerateDimension)?;
    let i2 = (1..n)
        .find(|&i| !is_zero(&cross(&sub(&p[i1], &p[0]), &sub(&p[i], &p[0]))))
        .ok_or(GeometryError::DegenerateDimension)?;
    let base = cross(&sub(&p[i1], &p[0]), &sub(&p[i2], &p[0]));
    let i3 = (1..n)
        .find(|&i| !dot(&base, &sub(&p[i], &p[0])).is_zero())
        .ok_or(GeometryError::DegenerateDimension)?;

    let seed = [0, i1, i2, i3];
    let mut tris: Vec<Tri> = Vec::new();
    for skip in 0..4 {
        let f: Vec<usize> = (0..4).filter(|&k| k != skip).map(|k| seed[k]).collect();
        let mut t = tri(&p, f[0], f[1], f[2]);
        if dot(&t.normal, &sub(&p[seed[skip]], &p[f[0]])).is_positive() {
            t = tri(&p, f[0], f[2], f[1]);
        }
        tris.push(t);
    }

    for i in 0..n {
        if seed.contains(&i) {
            continue;
        }
        let visible: Vec<bool> = tris
            .iter()
            .map(|t| dot(&t.normal, &sub(&p[i], &p[t.v[0]])).is_positive())
            .collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut vis_edges = HashSet::new();
        for (t, _) in tris.iter().zip(&visible).filter(|(_, &v)| v) {
            for k in 0..3 {
                vis_edges.insert((t.v[k], t.v[(k + 1) % 3]));
            }
        }
        let mut horizon = Vec::new();
        for (t, _) in tris.iter().zip(&visible).filter(|(_, &v)| v) {
            for k in 0..3 {
                let (a, b) = (t.v[k], t.v[(k + 1) % 3]);
                if !vis_edges.contains(&(b, a)) {
                    horizon.push((a, b));
                }
            }
        }
        let mut keep = visible.iter();
        tris.retain(|_| !*keep.next().unwrap());
        for (a, b) in horizon {
            tris.push(tri(&p, a, b, i));
        }
    }

    // Merge triangles sharing an outward normal direction into facets.
    let mut facet_of_normal: HashMap<IVec3, usize> = HashMap::new();
    let mut groups: Vec<(IVec3, Vec<usize>)> = Vec::new();
    for (k, t) in tris.iter().enumerate() {
        let nrm = primitive(&t.normal);
        let id = *facet_of_normal.entry(nrm.clone()).or_insert_with(|| {
            groups.push((nrm, Vec::new()));
            groups.len() - 1
        });
        groups[id].1.push(k);
    }

    let mut polygons: Vec<(IVec3, Vec<usize>)> = Vec::new();
    for (nrm, members) in groups {
        let mut directed = HashSet::new();
        for &k in &members {
            let v = tris[k].v;
            for j in 0..3 {
                directed.insert((v[j], v[(j + 1) % 3]));
            }
        }
        let mut next: BTreeMap<usize, usize> = BTreeMap::new();
        for &(a, b) in &directed {
            if !directed.contains(&(b, a)) && next.insert(a, b).is_some() {
                return Err(GeometryError::Internal(
                    "facet boundary is not a simple cycle".into(),
                ));
            }
        }
        let start = *next
            .keys()
            .next()
            .ok_or_else(|| GeometryError::Internal("empty facet".into()))?;
        let mut cycle = vec![start];
        let mut cur = next[&start];
        while cur != start {
            cycle.push(cur);
            cur = *next
                .get(&cur)
                .ok_or_else(|| GeometryError::Internal("open facet boundary".into()))?;
            if cycle.len() > next.len() {
                return Err(GeometryError::Internal(
                    "facet boundary does not close".into(),
                ));
            }
        }
        loop {
            let k = cycle.len();
            let drop = (0..k).find(|&j| {
                let a = &p[cycle[(j + k - 1) % k]];
                let b = &p[cycle[j]];
                let c = &p[cycle[(j + 1) % k]];
                is_zero(&cross(&sub(b, a), &sub(c, b)))
            });
            match drop {
                Some(j) => {
                    cycle.remove(j);
                }
                None => break,
            }
        }
        polygons.push((nrm, cycle));
    }

    let mut used: Vec<usize> = polygons
        .iter()
        .flat_map(|(_, c)| c.iter().copied())
        .collect();
    used.sort_unstable();
    used.dedup();
    let mut new_id = vec![usize::MAX; n];
    for (k, &i) in used.iter().enumerate() {
        new_id[i] = k;
    }
    let facets: Vec<Facet> = polygons
        .into_iter()
        .map(|(normal, cycle)| {
            let mut vs: Vec<usize> = cycle.iter().map(|&i| new_id[i]).collect();
            let m = (0..vs.len()).min_by_key(|&j| vs[j]).unwrap();
            vs.rotate_left(m);
            Facet {
                vertices: vs,
                normal,
            }
        })
        .collect();

    let mut edge_map: BTreeMap<(usize, usize), [Option<usize>; 2]> = BTreeMap::new();
    for (f, facet) in facets.iter().enumerate() {
        let k = facet.vertices.len();
        for j in 0..k {
            let (u, v) = (facet.vertices[j], facet.vertices[(j + 1) % k]);
            let entry = edge_map.entry((u.min(v), u.max(v))).or_default();
            let slot = if u < v { 0 } else { 1 };
            if entry[slot].replace(f).is_some() {
                return Err(GeometryError::Internal(format!(
                    "edge ({u},{v}) traversed twice"
                )));
            }
        }
    }
    let mut edges = Vec::with_capacity(edge_map.len());
    for ((u, v), fs) in edge_map {
        match fs {
            [Some(a), Some(b)] => edges.push(HullEdge {
                vertices: [u, v],
                facets: [a, b],
            }),
            _ => {
                return Err(GeometryError::Internal(format!(
                    "edge ({u},{v}) has one facet"
                )))
            }
        }
    }
    let poly = Polytope3 {
        vertices: used.iter().map(|&i| points[i].clone()).collect(),
        source: used,
        facets,
        edges,
    };
    if poly.euler_characteristic() != 2 {
        return Err(GeometryError::Internal(format!(
            "hull has Euler characteristic {}",
            poly.euler_characteristic()
        )));
    }
    Ok(poly)
}

/// Geodesic map cut out on the sphere by the normal fan of a polytope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SphericalMap {
    /// One ray per facet: its primitive outward normal.
    pub rays: Vec<IVec3>,
    /// One arc per polytope edge, from `facets[0]` to `facets[1]`.
    pub arcs: Vec<[usize; 2]>,
    /// Number of cells, one per polytope vertex.
    pub cells: usize,
    pub map: CombinatorialMap,
}

pub fn normal_fan_map(p: &Polytope3) -> SphericalMap {
    let mut edge_id: HashMap<(usize, usize), usize> = HashMap::new();
    for (e, he) in p.edges.iter().enumerate() {
        edge_id.insert((he.vertices[0], he.vertices[1]), e);
    }
    let rotations: Vec<Vec<EdgeEnd>> = p
        .facets
        .iter()
        .enumerate()
        .map(|(f, facet)| {
            let k = facet.vertices.len();
            (0..k)
                .map(|j| {
                    let (u, v) = (facet.vertices[j], facet.vertices[(j + 1) % k]);
                    let e = edge_id[&(u.min(v), u.max(v))];
                    EdgeEnd::new(e, if p.edges[e].facets[0] == f { 0 } else { 1 })
                })
                .collect()
        })
        .collect();
    let arcs: Vec<[usize; 2]> = p.edges.iter().map(|e| e.facets).collect();
    let map = CombinatorialMap::build(arcs.clone(), rotations, None)
        .expect("normal fan of a polytope is a valid map");
    SphericalMap {
        rays: p.facets.iter().map(|f| f.normal.clone()).collect(),
        arcs,
        cells: p.vertices.len(),
        map,
    }
}

/// Outcome of intersecting two great-circle arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArcIntersection {
    None,
    Crossing { point: IVec3, handedness: i8 },
    Degenerate,
}

fn on_closed_arc(a0: &IVec3, a1: &IVec3, na: &IVec3, q: &IVec3) -> (bool, bool) {
    let s0 = dot(&cross(a0, q), na);
    let s1 = dot(&cross(q, a1), na);
    let closed = !s0.is_negative() && !s1.is_negative();
    let open = s0.is_positive() && s1.is_positive();
    (closed, open)
}

/// Intersection of arc `a0 → a1` with arc `b0 → b1` (each shorter than a
/// half circle). Handedness is +1 when `b` passes from right to left of `a`
/// seen from outside the sphere.
pub fn arc_intersection(a: [&IVec3; 2], b: [&IVec3; 2]) -> ArcIntersection {
    let na = cross(a[0], a[1]);
    let nb = cross(b[0], b[1]);
    let p = cross(&na, &nb);
    if is_zero(&p) {
        let touches = b.iter().any(|q| on_closed_arc(a[0], a[1], &na, q).0)
            || a.iter().any(|q| on_closed_arc(b[0], b[1], &nb, q).0);
        return if touches {
            ArcIntersection::Degenerate
        } else {
            ArcIntersection::None
        };
    }
    for q in [p.clone(), neg(&p)] {
        let (ca, oa) = on_closed_arc(a[0], a[1], &na, &q);
        let (cb, ob) = on_closed_arc(b[0], b[1], &nb, &q);
        if ca && cb {
            if !(oa && ob) {
                return ArcIntersection::Degenerate;
            }
            let t = cross(&cross(&na, &q), &cross(&nb, &q));
            let handedness = if dot(&t, &q).is_positive() { 1 } else { -1 };
            return ArcIntersection::Crossing {
                point: primitive(&q),
                handedness,
            };
        }
    }
    ArcIntersection::None
}

/// Why two geodesic maps do not form a normal pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegenerateReport {
    /// `(positive ray, negative ray)` pairs pointing the same way.
    pub shared_rays: Vec<[usize; 2]>,
    /// `(positive arc, negative arc)` pairs touching non-transversally.
    pub contacts: Vec<[usize; 2]>,
}

/// Overlays two geodesic maps into a pair, or reports the degeneracies.
pub fn overlay_spherical(
    plus: &SphericalMap,
    minus: &SphericalMap,
    jobs: usize,
) -> Result<PairInput, DegenerateReport> {
    let mut shared_rays = Vec::new();
    for (i, r) in plus.rays.iter().enumerate() {
        for (j, s) in minus.rays.iter().enumerate() {
            if same_ray(r, s) {
                shared_rays.push([i, j]);
            }
        }
    }
    let arc_ids: Vec<usize> = (0..plus.arcs.len()).collect();
    let rows = crate::parallel::run_ordered(jobs, &arc_ids, |&a| {
        let [a0, a1] = plus.arcs[a];
        minus
            .arcs
            .iter()
            .map(|&[b0, b1]| {
                arc_intersection(
                    [&plus.rays[a0], &plus.rays[a1]],
                    [&minus.rays[b0], &minus.rays[b1]],
                )
            })
            .collect::<Vec<_>>()
    });
    let mut contacts = Vec::new();
    let mut found = Vec::new();
    for (a, row) in rows.into_iter().enumerate() {
        for (b, r) in row.into_iter().enumerate() {
            match r {
                ArcIntersection::None => {}
                ArcIntersection::Degenerate => contacts.push([a, b]),
                ArcIntersection::Crossing { point, handedness } => {
                    found.push((a, b, point, handedness))
                }
            }
        }
    }
    if !shared_rays.is_empty() || !contacts.is_empty() {
        return Err(DegenerateReport {
            shared_rays,
            contacts,
        });
    }

    let order_along =
        |arcs: &[[usize; 2]], rays: &[IVec3], key: fn(&(usize, usize, IVec3, i8)) -> usize| {
            let mut per_arc: Vec<Vec<usize>> = vec![Vec::new(); arcs.len()];
            for (i, c) in found.iter().enumerate() {
                per_arc[key(c)].push(i);
            }
            let mut index = vec![0usize; found.len()];
            for (arc, list) in per_arc.iter_mut().enumerate() {
                let n = cross(&rays[arcs[arc][0]], &rays[arcs[arc][1]]);
                list.sort_by(|&x, &y| {
                    if x == y {
                        return std::cmp::Ordering::Equal;
                    }
                    if dot(&cross(&found[x].2, &found[y].2), &n).is_positive() {
                        std::cmp::Ordering::Less
                    } else {
                        std::cmp::Ordering::Greater
                    }
                });
                for (k, &i) in list.iter().enumerate() {
                    index[i] = k;
                }
            }
            index
        };
    let p_index = order_along(&plus.arcs, &plus.rays, |c| c.0);
    let n_index = order_along(&minus.arcs, &minus.rays, |c| c.1);
    let mut crossings: Vec<Crossing> = found
        .iter()
        .enumerate()
        .map(|(i, c)| Crossing::new(c.0, p_index[i], c.1, n_index[i], c.3))
        .collect();
    crossings.sort_by_key(|c| (c.p_edge, c.p_index));
    Ok(
        PairInput::new(plus.map.clone(), minus.map.clone(), crossings)
            .expect("geodesic crossings are consistent"),
    )
}

/// The pair of geodesic maps for two bases.
pub fn geodesic_pair(
    plus: &[RationalVec3],
    minus: &[RationalVec3],
    jobs: usize,
) -> Result<Result<PairInput, DegenerateReport>, GeometryError> {
    let fp = normal_fan_map(&convex_hull_3(plus)?);
    let fm = normal_fan_map(&convex_hull_3(minus)?);
    Ok(overlay_spherical(&fp, &fm, jobs))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrismatoidResult {
    /// Dual-graph distance between the bases, when determined.
    pub width: Option<usize>,
    /// Possible values when the pair is degenerate.
    pub candidates: Vec<usize>,
    pub pair_width: Option<Width>,
    pub crossings: usize,
    /// Euler characteristic of the overlay surface.
    pub chi: Option<i64>,
    pub degenerate: Option<DegenerateReport>,
    /// The width is at most four.
    pub bound_holds: bool,
}

/// Width of the 4-prismatoid with the given bases.
pub fn prismatoid_width(
    plus: &[RationalVec3],
    minus: &[RationalVec3],
    jobs: usize,
) -> Result<PrismatoidResult, GeometryError> {
    match geodesic_pair(plus, minus, jobs)? {
        Ok(pair) => {
            let ov = build_overlay(&pair).map_err(|e| GeometryError::Internal(e.to_string()))?;
            let w = width(&ov).value;
            let value = w.finite().map(|x| x + 2);
            Ok(PrismatoidResult {
                width: value,
                candidates: value.into_iter().collect(),
                pair_width: Some(w),
                crossings: pair.crossings().len(),
                chi: Some(ov.h().euler_characteristic()),
                degenerate: None,
                bound_holds: value.is_some_and(|v| v <= 4),
            })
        }
        Err(report) => {
            let candidates = if report.shared_rays.is_empty() {
                vec![2, 3]
            } else {
                vec![2]
            };
            Ok(PrismatoidResult {
                width: (candidates.len() == 1).then_some(candidates[0]),
                bound_holds: candidates.iter().all(|&c| c <= 4),
                candidates,
                pair_width: None,
                crossings: 0,
                chi: None,
                degenerate: Some(report),
            })
        }
    }
}

/// Vertices of the 4-prismatoid `conv(Q⁺ × {0} ∪ Q⁻ × {1})`.
pub fn lift(plus: &[RationalVec3], minus: &[RationalVec3]) -> Vec<[BigRational; 4]> {
    let layer = |pts: &[RationalVec3], h: i64| -> Vec<[BigRational; 4]> {
        pts.iter()
            .map(|p| {
                [
                    p.0[0].clone(),
                    p.0[1].clone(),
                    p.0[2].clone(),
                    BigRational::from_integer(h.into()),
                ]
            })
            .collect()
    };
    let mut out = layer(plus, 0);
    out.extend(layer(minus, 1));
    out
}

/// Rotation matrix of the quaternion `(w, x, y, z)`, exact and rational.
pub fn quaternion_rotation(q: [i64; 4]) -> [[BigRational; 3]; 3] {
    let [w, x, y, z] = q.map(BigInt::from);
    let n = &w * &w + &x * &x + &y * &y + &z * &z;
    let two = BigInt::from(2);
    let m = [
        [
            &w * &w + &x * &x - &y * &y - &z * &z,
            &two * (&x * &y - &w * &z),
            &two * (&x * &z + &w * &y),
        ],
        [
            &two * (&x * &y + &w * &z),
            &w * &w - &x * &x + &y * &y - &z * &z,
            &two * (&y * &z - &w * &x),
        ],
        [
            &two * (&x * &z - &w * &y),
            &two * (&y * &z + &w * &x),
            &w * &w - &x * &x - &y * &y + &z * &z,
        ],
    ];
    m.map(|row| row.map(|c| BigRational::new(c, n.clone())))
}

pub fn rotate(points: &[RationalVec3], r: &[[BigRational; 3]; 3]) -> Vec<RationalVec3> {
    points
        .iter()
        .map(|p| {
            RationalVec3(std::array::from_fn(|i| {
                (0..3)
                    .map(|j| &r[i][j] * &p.0[j])
                    .fold(BigRational::zero(), |a, b| a + b)
            }))
        })
        .collect()
}

pub fn cube() -> Vec<RationalVec3> {
    let mut v = Vec::new();
    for x in [-1, 1] {
        for y in [-1, 1] {
            for z in [-1, 1] {
                v.push(RationalVec3::from_ints(x, y, z));
            }
        }
    }
    v
}

pub fn octahedron() -> Vec<RationalVec3> {
    let mut v = Vec::new();
    for i in 0..3 {
        for s in [1, -1] {
            let mut c = [0; 3];
            c[i] = s;
            v.push(RationalVec3::from_ints(c[0], c[1], c[2]));
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn iv(x: i64, y: i64, z: i64) -> IVec3 {
        [x.into(), y.into(), z.into()]
    }

    fn pts(v: &[(i64, i64, i64)]) -> Vec<RationalVec3> {
        v.iter()
            .map(|&(x, y, z)| RationalVec3::from_ints(x, y, z))
            .collect()
    }

    /// Supporting planes by brute force over triples, each with the input
    /// points lying on it.
    fn brute_facets(p: &[IVec3]) -> BTreeSet<(IVec3, BTreeSet<usize>)> {
        let n = p.len();
        let mut out = BTreeSet::new();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let nrm = cross(&sub(&p[b], &p[a]), &sub(&p[c], &p[a]));
                    if is_zero(&nrm) {
                        continue;
                    }
                    let off = dot(&nrm, &p[a]);
                    let side: Vec<BigInt> = p.iter().map(|q| dot(&nrm, q) - &off).collect();
                    let nrm = if side.iter().all(|s| !s.is_positive()) {
                        nrm
                    } else if side.iter().all(|s| !s.is_negative()) {
                        neg(&nrm)
                    } else {
                        continue;
                    };
                    let on: BTreeSet<usize> = (0..n).filter(|&i| side[i].is_zero()).collect();
                    out.insert((primitive(&nrm), on));
                }
            }
        }
        out
    }

    fn check_against_oracle(points: &[RationalVec3]) {
        let hull = convex_hull_3(points).unwrap();
        let ip = to_integer_points(points);
        let planes = brute_facets(&ip);
        let mut incidence = vec![0; ip.len()];
        for (_, on) in &planes {
            for &i in on {
                incidence[i] += 1;
            }
        }
        let verts: Vec<usize> = (0..ip.len()).filter(|&i| incidence[i] >= 3).collect();
        assert_eq!(hull.source, verts);
        let got: BTreeSet<(IVec3, BTreeSet<usize>)> = hull
            .facets
            .iter()
            .map(|f| {
                (
                    f.normal.clone(),
                    f.vertices.iter().map(|&v| hull.source[v]).collect(),
                )
            })
            .collect();
        let want: BTreeSet<(IVec3, BTreeSet<usize>)> = planes
            .into_iter()
            .map(|(n, on)| (n, on.into_iter().filter(|i| incidence[*i] >= 3).collect()))
            .collect();
        assert_eq!(got, want);
        assert_eq!(hull.euler_characteristic(), 2);
    }

    #[test]
    fn platonic_counts() {
        let c = convex_hull_3(&cube()).unwrap();
        assert_eq!(
            (c.vertices.len(), c.edges.len(), c.facets.len()),
            (8, 12, 6)
        );
        assert!(c.facets.iter().all(|f| f.vertices.len() == 4));
        let o = convex_hull_3(&octahedron()).unwrap();
        assert_eq!(
            (o.vertices.len(), o.edges.len(), o.facets.len()),
            (6, 12, 8)
        );
    }

    #[test]
    fn prism_counts() {
        let p = pts(&[
            (0, 0, 0),
            (4, 0, 0),
            (0, 4, 0),
            (0, 0, 3),
            (4, 0, 3),
            (0, 4, 3),
        ]);
        let h = convex_hull_3(&p).unwrap();
        assert_eq!((h.vertices.len(), h.edges.len(), h.facets.len()), (6, 9, 5));
        check_against_oracle(&p);
    }

    #[test]
    fn hull_matches_brute_force() {
        check_against_oracle(&pts(&[
            (0, 0, 0),
            (5, 0, 0),
            (0, 5, 0),
            (0, 0, 5),
            (1, 1, 1),
        ]));
        check_against_oracle(&pts(&[
            (0, 0, 0),
            (3, 1, 0),
            (1, 4, 1),
            (2, 2, 5),
            (-1, 2, 2),
            (1, 2, 2),
        ]));
        // Coplanar points and a point in the middle of an edge.
        let mut c = cube();
        c.push(RationalVec3::from_ints(0, 0, 1));
        c.push(RationalVec3::from_ints(1, 1, 0));
        c.push(RationalVec3::from_ints(0, 0, 0));
        check_against_oracle(&c);
        for seed in 0..5 {
            check_against_oracle(&crate::generators::random_polytope(9, seed).unwrap());
        }
    }

    #[test]
    fn hull_orientation() {
        let h = convex_hull_3(&cube()).unwrap();
        let ip = to_integer_points(&h.vertices);
        for f in &h.facets {
            let [a, b, c] = [0, 1, 2].map(|i| &ip[f.vertices[i]]);
            assert!(dot(&cross(&sub(b, a), &sub(c, a)), &f.normal).is_positive());
        }
        for e in &h.edges {
            let fv = &h.facets[e.facets[0]].vertices;
            let i = fv.iter().position(|&v| v == e.vertices[0]).unwrap();
            assert_eq!(fv[(i + 1) % fv.len()], e.vertices[1]);
        }
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(
            convex_hull_3(&pts(&[(0, 0, 0), (1, 0, 0), (0, 1, 0)])),
            Err(GeometryError::TooFewPoints(3))
        );
        let flat = pts(&[(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)]);
        assert_eq!(
            convex_hull_3(&flat),
            Err(GeometryError::DegenerateDimension)
        );
    }

    #[test]
    fn arcs_crossing_on_the_equator() {
        let a = [iv(1, 0, 0), iv(0, 1, 0)];
        let b = [iv(1, 1, -1), iv(1, 1, 1)];
        assert_eq!(
            arc_intersection([&a[0], &a[1]], [&b[0], &b[1]]),
            ArcIntersection::Crossing {
                point: iv(1, 1, 0),
                handedness: 1
            }
        );
        assert_eq!(
            arc_intersection([&a[0], &a[1]], [&b[1], &b[0]]),
            ArcIntersection::Crossing {
                point: iv(1, 1, 0),
                handedness: -1
            }
        );
    }

    #[test]
    fn arc_special_cases() {
        let a = [iv(1, 0, 0), iv(0, 1, 0)];
        let far = [iv(-1, -1, -1), iv(-1, -1, 1)];
        assert_eq!(
            arc_intersection([&a[0], &a[1]], [&far[0], &far[1]]),
            ArcIntersection::None
        );
        let overlap = [iv(1, 1, 0), iv(-1, 1, 0)];
        assert_eq!(
            arc_intersection([&a[0], &a[1]], [&overlap[0], &overlap[1]]),
            ArcIntersection::Degenerate
        );
        let apart = [iv(-1, 0, 0), iv(0, -1, 0)];
        assert_eq!(
            arc_intersection([&a[0], &a[1]], [&apart[0], &apart[1]]),
            ArcIntersection::None
        );
        let touching = [iv(1, 1, 0), iv(1, 1, 1)];
        assert_eq!(
            arc_intersection([&a[0], &a[1]], [&touching[0], &touching[1]]),
            ArcIntersection::Degenerate
        );
    }

    #[test]
    fn rationals_round_trip() {
        assert_eq!(
            parse_rational("-6/4").unwrap(),
            BigRational::new((-3).into(), 2.into())
        );
        assert_eq!(
            parse_rational("7").unwrap(),
            BigRational::from_integer(7.into())
        );
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        let p: RationalVec3 = serde_json::from_str(r#"["1/2", 3, "-2/6"]"#).unwrap();
        assert_eq!(
            serde_json::to_string(&p).unwrap(),
            r#"["1/2","3/1","-1/3"]"#
        );
        assert_eq!(format_rational(&p.0[2]), "-1/3");
    }

    #[test]
    fn rotations_are_orthogonal() {
        let r = quaternion_rotation([1, 2, -3, 4]);
        for i in 0..3 {
            for j in 0..3 {
                let d: BigRational = (0..3)
                    .map(|k| &r[i][k] * &r[j][k])
                    .fold(BigRational::zero(), |a, b| a + b);
                assert_eq!(d, BigRational::from_integer(((i == j) as i64).into()));
            }
        }
    }

    #[test]
    fn fan_of_cube_is_octahedral() {
        let fan = normal_fan_map(&convex_hull_3(&cube()).unwrap());
        assert_eq!(
            (
                fan.map.vertex_count(),
                fan.map.edge_count(),
                fan.map.face_count()
            ),
            (6, 12, 8)
        );
        assert_eq!(fan.map.euler_characteristic(), 2);
        assert_eq!(fan.cells, 8);
    }

    #[test]
    fn prismatoid_of_cube_and_octahedron() {
        let r = prismatoid_width(&cube(), &octahedron(), 1).unwrap();
        assert_eq!(r.width, Some(4));
        assert_eq!(r.crossings, 12);
        assert_eq!(r.chi, Some(2));
        assert!(r.bound_holds);
        let same = prismatoid_width(&cube(), &cube(), 1).unwrap();
        assert_eq!(same.candidates, vec![2]);
        assert!(same.degenerate.is_some_and(|d| d.shared_rays.len() == 6));
    }

    #[test]
    fn lifted_bases_sit_on_two_levels() {
        let l = lift(&cube(), &octahedron());
        assert_eq!(l.len(), 14);
        assert!(l[..8].iter().all(|p| p[3].is_zero()));
        assert!(l[8..]
            .iter()
            .all(|p| p[3] == BigRational::from_integer(1.into())));
    }
}
