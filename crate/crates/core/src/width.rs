//! Width of a pair, the deep subgraph, the well-formed walk and loop
//! contractibility.
//!
//! Turn convention: arriving at a crossing through the H-dart `t` (the end of
//! the incoming edge at that crossing), `sigma(t)` is the right turn,
//! `sigma^2(t)` goes straight and `sigma^3(t)` is the left turn.

use std::collections::{BTreeSet, VecDeque};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::overlay::{Overlay, OverlayError, Sign};
use crate::surface_map::{alpha, dart_of, edge_of, Dart};
use crate::union_find::UnionFind;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WidthError {
    #[error("vertex {0} is not a crossing")]
    NotACrossing(usize),
    #[error("edge {0} is not deep")]
    NotDeep(usize),
    #[error("the walk needs an untwisted map; re-orient or pass to the double cover first")]
    TwistedMap,
    #[error("dart sequence is not a vertex-simple closed cycle: {0}")]
    NotSimpleCycle(String),
    #[error(transparent)]
    Overlay(#[from] OverlayError),
}

/// Width value: a positive integer or infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Width {
    Finite(usize),
    Infinite,
}

impl Width {
    pub fn finite(self) -> Option<usize> {
        match self {
            Width::Finite(w) => Some(w),
            Width::Infinite => None,
        }
    }

    pub fn exceeds_two(self) -> bool {
        self > Width::Finite(2)
    }
}

impl Serialize for Width {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Width::Finite(w) => s.serialize_u64(*w as u64),
            Width::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl std::fmt::Display for Width {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Width::Finite(w) => write!(f, "{w}"),
            Width::Infinite => f.write_str("infinite"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WidthResult {
    pub value: Width,
    /// Vertices of a shortest positive-to-negative path in H.
    pub path: Vec<usize>,
    /// Edges of that path, `path.len() - 1` of them.
    pub edges: Vec<usize>,
    pub component: Option<usize>,
}

/// Multi-source BFS from every positive vertex to the nearest negative one.
/// Ties are broken towards smaller vertex ids, so the certificate is
/// deterministic.
pub fn width(ov: &Overlay) -> WidthResult {
    let h = ov.h();
    let n = h.vertex_count();
    let mut dist = vec![usize::MAX; n];
    let mut via: Vec<Option<Dart>> = vec![None; n];
    let mut queue = VecDeque::new();
    for v in 0..n {
        if ov.role(v).sign() == Some(Sign::Positive) {
            dist[v] = 0;
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        if ov.role(v).sign() == Some(Sign::Negative) {
            let mut path = vec![v];
            let mut edges = Vec::new();
            let mut w = v;
            while let Some(d) = via[w] {
                edges.push(edge_of(d));
                w = h.vertex_of(d);
                path.push(w);
            }
            path.reverse();
            edges.reverse();
            let component = Some(h.component_labels()[v]);
            return WidthResult {
                value: Width::Finite(dist[v]),
                path,
                edges,
                component,
            };
        }
        for &d in h.rotation(v) {
            let w = h.head(d);
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                via[w] = Some(d);
                queue.push_back(w);
            }
        }
    }
    WidthResult {
        value: Width::Infinite,
        path: Vec::new(),
        edges: Vec::new(),
        component: None,
    }
}

/// Width of every connected component of H (infinite when a component lacks
/// vertices of one sign).
pub fn component_widths(ov: &Overlay) -> Vec<Width> {
    let h = ov.h();
    let labels = h.component_labels();
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut best = vec![Width::Infinite; k];
    let mut dist = vec![usize::MAX; h.vertex_count()];
    let mut queue = VecDeque::new();
    for v in 0..h.vertex_count() {
        if ov.role(v).sign() == Some(Sign::Positive) {
            dist[v] = 0;
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        if ov.role(v).sign() == Some(Sign::Negative) {
            let c = labels[v];
            best[c] = best[c].min(Width::Finite(dist[v]));
            continue;
        }
        for &d in h.rotation(v) {
            let w = h.head(d);
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    best
}

/// The deep subgraph H₀: crossing vertices and deep edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeepSubgraph {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

pub fn deep_subgraph(ov: &Overlay) -> DeepSubgraph {
    DeepSubgraph {
        vertices: (0..ov.h().vertex_count())
            .filter(|&v| ov.is_crossing(v))
            .collect(),
        edges: (0..ov.h().edge_count())
            .filter(|&e| ov.is_deep(e))
            .collect(),
    }
}

/// A positive vertex, a crossing and a negative vertex joined by two
/// terminal edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Width2Certificate {
    pub crossing: usize,
    pub path: [usize; 3],
    pub edges: [usize; 2],
}

fn width2_at(ov: &Overlay, c: usize) -> Option<Width2Certificate> {
    let h = ov.h();
    let mut plus = None;
    let mut minus = None;
    for &d in h.rotation(c) {
        let e = edge_of(d);
        if ov.is_deep(e) {
            continue;
        }
        match ov.edge_sign(e) {
            Sign::Positive => plus = plus.or(Some(d)),
            Sign::Negative => minus = minus.or(Some(d)),
        }
    }
    let (p, n) = (plus?, minus?);
    Some(Width2Certificate {
        crossing: c,
        path: [h.head(p), c, h.head(n)],
        edges: [edge_of(p), edge_of(n)],
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Degree3Verdict {
    /// Every crossing meets two deep edges of one sign.
    pub holds: bool,
    /// A crossing violating it, which yields a path of length two.
    pub witness: Option<Width2Certificate>,
}

pub fn degree3_criterion(ov: &Overlay) -> Degree3Verdict {
    let h = ov.h();
    for c in 0..h.vertex_count() {
        if !ov.is_crossing(c) {
            continue;
        }
        let mut deep = [0usize; 2];
        for &d in h.rotation(c) {
            let e = edge_of(d);
            if ov.is_deep(e) {
                deep[ov.edge_sign(e).index()] += 1;
            }
        }
        if deep[0] < 2 && deep[1] < 2 {
            return Degree3Verdict {
                holds: false,
                witness: width2_at(ov, c),
            };
        }
    }
    Degree3Verdict {
        holds: true,
        witness: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// Departing dart at the crossing.
    Next(Dart),
    Stuck(usize),
}

fn require_untwisted(ov: &Overlay) -> Result<(), WidthError> {
    if ov.h().has_twists() {
        Err(WidthError::TwistedMap)
    } else {
        Ok(())
    }
}

/// One step of the well-formed walk, arriving through dart `t`.
pub fn well_formed_step(ov: &Overlay, t: Dart) -> Result<Step, WidthError> {
    require_untwisted(ov)?;
    let h = ov.h();
    let c = h.vertex_of(t);
    if !ov.is_crossing(c) {
        return Err(WidthError::NotACrossing(c));
    }
    let straight = h.sigma(h.sigma(t));
    if ov.is_deep(edge_of(straight)) {
        return Ok(Step::Next(straight));
    }
    let turn = match ov.dart_sign(t) {
        Sign::Negative => h.sigma(t),
        Sign::Positive => h.sigma_inv(t),
    };
    Ok(if ov.is_deep(edge_of(turn)) {
        Step::Next(turn)
    } else {
        Step::Stuck(c)
    })
}

/// A closed walk found by the well-formed procedure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoopCertificate {
    pub base: usize,
    /// Departing darts, starting and ending at the base vertex.
    pub darts: Vec<Dart>,
    pub vertices: Vec<usize>,
    /// Turn rule holds at every vertex except possibly the base.
    pub well_formed: bool,
    pub well_formed_at_base: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum WalkOutcome {
    Loop(LoopCertificate),
    Width2(Width2Certificate),
}

/// Runs the walk from deep edge `start` (traversed from end 0 to end 1)
/// until a vertex repeats or the walk gets stuck.
pub fn find_well_formed_loop(ov: &Overlay, start: usize) -> Result<WalkOutcome, WidthError> {
    require_untwisted(ov)?;
    if !ov.is_deep(start) {
        return Err(WidthError::NotDeep(start));
    }
    let h = ov.h();
    let first = dart_of(start, 0);
    let mut darts = vec![first];
    let mut visited = vec![h.vertex_of(first)];
    let mut position = vec![usize::MAX; h.vertex_count()];
    position[h.vertex_of(first)] = 0;
    let mut t = alpha(first);
    loop {
        let c = h.vertex_of(t);
        if position[c] != usize::MAX {
            let i = position[c];
            let loop_darts = darts[i..].to_vec();
            let vertices = visited[i..].to_vec();
            let (well_formed, well_formed_at_base) = loop_turns(ov, &loop_darts);
            return Ok(WalkOutcome::Loop(LoopCertificate {
                base: c,
                darts: loop_darts,
                vertices,
                well_formed,
                well_formed_at_base,
            }));
        }
        position[c] = visited.len();
        visited.push(c);
        match well_formed_step(ov, t)? {
            Step::Stuck(v) => {
                let cert =
                    width2_at(ov, v).expect("stuck crossing has terminal edges of both signs");
                return Ok(WalkOutcome::Width2(cert));
            }
            Step::Next(d) => {
                darts.push(d);
                t = alpha(d);
            }
        }
    }
}

fn turn_ok(ov: &Overlay, t: Dart, d: Dart) -> bool {
    let h = ov.h();
    let expected = match (ov.dart_sign(t), ov.dart_sign(d)) {
        (a, b) if a == b => h.sigma(h.sigma(t)),
        (Sign::Negative, _) => h.sigma(t),
        (Sign::Positive, _) => h.sigma_inv(t),
    };
    d == expected
}

/// Turn checks of a closed dart sequence: (all non-base vertices, base).
fn loop_turns(ov: &Overlay, darts: &[Dart]) -> (bool, bool) {
    let k = darts.len();
    let interior = (1..k).all(|i| turn_ok(ov, alpha(darts[i - 1]), darts[i]));
    let base = turn_ok(ov, alpha(darts[k - 1]), darts[0]);
    (interior, base)
}

/// Checks the turn rule along a walk given by departing darts. For a closed
/// walk the base vertex (tail of the first dart) is excluded.
pub fn check_well_formed(ov: &Overlay, darts: &[Dart]) -> Result<bool, WidthError> {
    require_untwisted(ov)?;
    Ok((1..darts.len()).all(|i| turn_ok(ov, alpha(darts[i - 1]), darts[i])))
}

/// Reverses a closed or open walk given by departing darts.
pub fn reverse_walk(darts: &[Dart]) -> Vec<Dart> {
    darts.iter().rev().map(|&d| alpha(d)).collect()
}

/// Whether a vertex-simple closed walk bounds a disc in the surface of H.
pub fn is_contractible(ov: &Overlay, darts: &[Dart]) -> Result<bool, WidthError> {
    let h = ov.h();
    if darts.is_empty() {
        return Err(WidthError::NotSimpleCycle("empty walk".into()));
    }
    let mut on_loop = vec![false; h.vertex_count()];
    let mut loop_edge = vec![false; h.edge_count()];
    for (i, &d) in darts.iter().enumerate() {
        let next = darts[(i + 1) % darts.len()];
        if h.head(d) != h.vertex_of(next) {
            return Err(WidthError::NotSimpleCycle(format!(
                "dart {d} does not lead to dart {next}"
            )));
        }
        let v = h.vertex_of(d);
        if on_loop[v] {
            return Err(WidthError::NotSimpleCycle(format!("vertex {v} repeats")));
        }
        on_loop[v] = true;
        loop_edge[edge_of(d)] = true;
    }
    let nf = h.faces().len();
    let mut uf = UnionFind::new(nf);
    for e in 0..h.edge_count() {
        if !loop_edge[e] {
            let [a, b] = h.edge_faces(e);
            uf.union(a, b);
        }
    }
    let comp = h.component_labels();
    let target = comp[h.vertex_of(darts[0])];
    let mut faces_in: BTreeSet<usize> = BTreeSet::new();
    for e in 0..h.edge_count() {
        if comp[h.endpoints(e)[0]] == target {
            faces_in.extend(h.edge_faces(e));
        }
    }
    let classes: BTreeSet<usize> = faces_in.iter().map(|&f| uf.find(f)).collect();
    if classes.len() < 2 {
        return Ok(false);
    }
    if classes.len() > 2 {
        return Err(WidthError::NotSimpleCycle(
            "curve separates into more than two sides".into(),
        ));
    }
    let mut chi: std::collections::BTreeMap<usize, i64> = classes.iter().map(|&c| (c, 0)).collect();
    for &f in &faces_in {
        *chi.get_mut(&uf.find(f)).unwrap() += 1;
    }
    for e in 0..h.edge_count() {
        if !loop_edge[e] && comp[h.endpoints(e)[0]] == target {
            let side = uf.find(h.edge_faces(e)[0]);
            *chi.get_mut(&side).unwrap() -= 1;
        }
    }
    for v in 0..h.vertex_count() {
        if comp[v] == target && !on_loop[v] && h.degree(v) > 0 {
            let side = uf.find(h.vertex_faces(v)[0]);
            *chi.get_mut(&side).unwrap() += 1;
        }
    }
    Ok(chi.values().any(|&x| x == 1))
}

/// Which map the loop search ran on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WalkSpace {
    Overlay,
    Reoriented,
    DoubleCover,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoopReport {
    pub start_edge: usize,
    #[serde(flatten)]
    pub outcome: WalkOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contractible: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisReport {
    pub surface: String,
    pub chi: i64,
    pub orientable: bool,
    pub components: usize,
    pub width: Width,
    pub path: Vec<usize>,
    pub path_edges: Vec<usize>,
    pub degree3: Degree3Verdict,
    pub walk_space: WalkSpace,
    pub loops: Vec<LoopReport>,
    pub certificates: Vec<Width2Certificate>,
    /// Theorem-consistency violations; empty on every correct run.
    pub violations: Vec<String>,
}

/// Surface name for H: a classification when connected, component summary
/// otherwise.
pub fn surface_name(ov: &Overlay) -> String {
    match ov.h().classify_surface() {
        Ok(s) => s.name(),
        Err(_) => {
            let names: Vec<String> = ov
                .h()
                .component_surfaces()
                .iter()
                .map(|s| s.name())
                .collect();
            format!("disconnected: {}", names.join(", "))
        }
    }
}

/// Runs every check and cross-validates them against each other.
pub fn analyze(ov: &Overlay, jobs: usize) -> Result<AnalysisReport, WidthError> {
    let h = ov.h();
    let w = width(ov);
    let degree3 = degree3_criterion(ov);
    let oriented = ov.oriented()?;
    let walk_space = if !h.has_twists() {
        WalkSpace::Overlay
    } else if h.is_orientable() {
        WalkSpace::Reoriented
    } else {
        WalkSpace::DoubleCover
    };
    let space: &Overlay = &oriented;
    let starts: Vec<usize> = (0..space.h().edge_count())
        .filter(|&e| space.is_deep(e))
        .collect();
    let run = |e: &usize| -> Result<LoopReport, WidthError> {
        let outcome = find_well_formed_loop(space, *e)?;
        let contractible = match &outcome {
            WalkOutcome::Loop(l) => Some(is_contractible(space, &l.darts)?),
            WalkOutcome::Width2(_) => None,
        };
        Ok(LoopReport {
            start_edge: *e,
            outcome,
            contractible,
        })
    };
    let loops: Vec<LoopReport> = crate::parallel::run_ordered(jobs, &starts, run)
        .into_iter()
        .collect::<Result<_, _>>()?;
    let mut certificates: Vec<Width2Certificate> = Vec::new();
    for l in &loops {
        if let WalkOutcome::Width2(c) = &l.outcome {
            if !certificates.contains(c) {
                certificates.push(c.clone());
            }
        }
    }

    let mut violations = Vec::new();
    let surface = h.classify_surface().ok();
    if let Some(s) = surface {
        if (s.is_sphere() || s.is_projective_plane()) && w.value != Width::Finite(2) {
            violations.push(format!(
                "{} overlay has width {}, expected 2",
                s.name(),
                w.value
            ));
        }
    }
    if degree3.holds != w.value.exceeds_two() {
        violations.push(format!(
            "degree-3 criterion is {} but width is {}",
            degree3.holds, w.value
        ));
    }
    if w.value.exceeds_two() {
        for l in &loops {
            match &l.outcome {
                WalkOutcome::Width2(_) => violations.push(format!(
                    "walk from edge {} got stuck although width exceeds two",
                    l.start_edge
                )),
                WalkOutcome::Loop(c) => {
                    if !c.well_formed {
                        violations.push(format!(
                            "loop from edge {} is not well-formed",
                            l.start_edge
                        ));
                    }
                    if l.contractible == Some(true) {
                        violations.push(format!(
                            "well-formed loop from edge {} bounds a disc",
                            l.start_edge
                        ));
                    }
                }
            }
        }
    }
    if w.value == Width::Finite(2)
        && !loops.is_empty()
        && certificates.is_empty()
        && degree3.witness.is_none()
    {
        violations.push("width two without any length-two certificate".into());
    }
    Ok(AnalysisReport {
        surface: surface_name(ov),
        chi: h.euler_characteristic(),
        orientable: h.is_orientable(),
        components: h.component_count(),
        width: w.value,
        path: w.path,
        path_edges: w.edges,
        degree3,
        walk_space,
        loops,
        certificates,
        violations,
    })
}
