//! Euler characteristic accounting over the faces of H.
//!
//! For a face `F` with boundary walk of length `e` and `x` crossing corners,
//! `c(F) = x/4 - e/2 + 1`. A corner of `F` at a signed vertex `v` whose two
//! neighbours on the walk are crossings `x`, `y` counts against `F` when `x`
//! and `y` lie on different edges of the opposite graph; `d(F)` adds one half
//! per counting corner.

use num_rational::Rational64;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::overlay::{Overlay, Sign};
use crate::surface_map::edge_of;
use crate::width::{width, Width};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AccountingError {
    #[error("H has {0} connected components; select one")]
    DisconnectedH(usize),
    #[error("component {0} does not exist")]
    NoSuchComponent(usize),
    #[error("the pair is not strongly normal ({0} violation(s))")]
    NotStronglyNormal(usize),
}

/// Exact rational serialized as `"p/q"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Ratio(pub Rational64);

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", self.0.numer(), self.0.denom()))
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

fn q(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FaceLedger {
    pub face: usize,
    /// Boundary walk length.
    pub e: usize,
    /// Crossing corners, with multiplicity.
    pub x: usize,
    pub signed_corners: usize,
    pub counting_corners: usize,
    /// Signed corners whose walk neighbours coincide or are not crossings.
    pub irregular_corners: usize,
    /// Signed vertex of every counting corner.
    pub counting_vertices: Vec<usize>,
    pub c: Ratio,
    pub d: Ratio,
}

/// Ledger of one face of H.
pub fn face_ledger(ov: &Overlay, face: usize) -> FaceLedger {
    let h = ov.h();
    let walk = &h.faces()[face];
    let k = walk.len();
    let mut x = 0;
    let mut signed = 0;
    let mut counting = Vec::new();
    let mut irregular = 0;
    for i in 0..k {
        let d = walk[i];
        let v = h.vertex_of(d);
        let Some(sign) = ov.role(v).sign() else {
            x += 1;
            continue;
        };
        signed += 1;
        let prev = h.vertex_of(walk[(i + k - 1) % k]);
        let next = h.head(d);
        let opp = sign.opposite();
        match (ov.crossing_parent(prev, opp), ov.crossing_parent(next, opp)) {
            (Some(a), Some(b)) if prev != next => {
                if a != b {
                    counting.push(v);
                }
            }
            _ => irregular += 1,
        }
    }
    let c = q(x as i64, 4) - q(k as i64, 2) + 1;
    let d = c + q(counting.len() as i64, 2);
    FaceLedger {
        face,
        e: k,
        x,
        signed_corners: signed,
        counting_corners: counting.len(),
        irregular_corners: irregular,
        counting_vertices: counting,
        c: Ratio(c),
        d: Ratio(d),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountsTwice {
    pub holds: bool,
    /// Signed vertices with fewer than two counting corners.
    pub failing: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonPositiveFaces {
    /// Width exceeds two, so every `d(F)` must be non-positive.
    pub applicable: bool,
    pub holds: bool,
    pub positive_faces: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AccountingReport {
    pub component: usize,
    pub strongly_normal: bool,
    pub chi: i64,
    pub v_plus: usize,
    pub v_minus: usize,
    pub faces: Vec<FaceLedger>,
    pub sum_c: Ratio,
    pub sum_d: Ratio,
    /// `chi - (v_plus + v_minus + sum_c)`.
    pub identity_residual: Ratio,
    pub identity_holds: bool,
    pub counts_twice: CountsTwice,
    /// `sum_d - chi`; the inequality holds when this is non-negative.
    pub inequality_slack: Ratio,
    pub inequality_holds: bool,
    /// `d <= 1 + x/4 - e/2 + (e - x)/2` on every face.
    pub face_bound_holds: bool,
    /// Every face has an even number of crossing corners.
    pub x_even: bool,
    pub width: Width,
    pub nonpositive_faces: NonPositiveFaces,
    /// Some signed corner had coinciding or non-crossing neighbours.
    pub irregular: bool,
}

/// Accounting for one component of H, refusing pairs that are not strongly
/// normal. With `component = None`, H must be connected.
pub fn accounting_report(
    ov: &Overlay,
    component: Option<usize>,
) -> Result<AccountingReport, AccountingError> {
    let strong = ov.validate_strongly_normal();
    if !strong.ok {
        return Err(AccountingError::NotStronglyNormal(strong.violations.len()));
    }
    accounting_report_unchecked(ov, component)
}

/// Same as [`accounting_report`] without the strong normality precondition.
pub fn accounting_report_unchecked(
    ov: &Overlay,
    component: Option<usize>,
) -> Result<AccountingReport, AccountingError> {
    let h = ov.h();
    let labels = h.component_labels();
    let count = h.component_count();
    let comp = match component {
        None if count != 1 => return Err(AccountingError::DisconnectedH(count)),
        None => 0,
        Some(k) if k >= count => return Err(AccountingError::NoSuchComponent(k)),
        Some(k) => k,
    };
    let in_comp = |v: usize| labels[v] == comp;

    let face_ids: Vec<usize> = (0..h.faces().len())
        .filter(|&f| {
            h.faces()[f]
                .first()
                .is_some_and(|&d| in_comp(h.vertex_of(d)))
        })
        .collect();
    let faces: Vec<FaceLedger> = face_ids.iter().map(|&f| face_ledger(ov, f)).collect();

    let vertices: Vec<usize> = (0..h.vertex_count()).filter(|&v| in_comp(v)).collect();
    let edges = (0..h.edge_count())
        .filter(|&e| in_comp(h.endpoints(e)[0]))
        .count();
    let isolated = vertices.iter().filter(|&&v| h.degree(v) == 0).count();
    let chi = vertices.len() as i64 - edges as i64 + (faces.len() + isolated) as i64;
    let v_plus = vertices
        .iter()
        .filter(|&&v| ov.role(v).sign() == Some(Sign::Positive))
        .count();
    let v_minus = vertices
        .iter()
        .filter(|&&v| ov.role(v).sign() == Some(Sign::Negative))
        .count();

    let sum_c: Rational64 = faces.iter().map(|f| f.c.0).sum::<Rational64>() + isolated as i64;
    let sum_d: Rational64 = faces.iter().map(|f| f.d.0).sum::<Rational64>() + isolated as i64;
    let residual = Rational64::from(chi) - (Rational64::from((v_plus + v_minus) as i64) + sum_c);

    let mut counting = vec![0usize; h.vertex_count()];
    for f in &faces {
        for &v in &f.counting_vertices {
            counting[v] += 1;
        }
    }
    let failing: Vec<usize> = vertices
        .iter()
        .copied()
        .filter(|&v| ov.role(v).sign().is_some() && h.degree(v) > 0 && counting[v] < 2)
        .collect();

    let face_bound_holds = faces.iter().all(|f| {
        let (e, x) = (f.e as i64, f.x as i64);
        f.d.0 <= Rational64::from(1) + q(x, 4) - q(e, 2) + q(e - x, 2)
    });
    let x_even = faces.iter().all(|f| f.x % 2 == 0);

    let w = component_width(ov, comp);
    let positive_faces: Vec<usize> = faces
        .iter()
        .filter(|f| f.d.0 > Rational64::from(0))
        .map(|f| f.face)
        .collect();
    let applicable = w.exceeds_two();
    let nonpositive_faces = NonPositiveFaces {
        applicable,
        holds: !applicable || positive_faces.is_empty(),
        positive_faces,
    };
    let irregular = faces.iter().any(|f| f.irregular_corners > 0);

    Ok(AccountingReport {
        component: comp,
        strongly_normal: ov.validate_strongly_normal().ok,
        chi,
        v_plus,
        v_minus,
        sum_c: Ratio(sum_c),
        sum_d: Ratio(sum_d),
        identity_residual: Ratio(residual),
        identity_holds: residual == Rational64::from(0),
        counts_twice: CountsTwice {
            holds: failing.is_empty(),
            failing,
        },
        inequality_slack: Ratio(sum_d - chi),
        inequality_holds: Rational64::from(chi) <= sum_d,
        face_bound_holds,
        x_even,
        width: w,
        nonpositive_faces,
        irregular,
        faces,
    })
}

fn component_width(ov: &Overlay, comp: usize) -> Width {
    if ov.h().component_count() == 1 {
        width(ov).value
    } else {
        crate::width::component_widths(ov)[comp]
    }
}

/// Number of sign changes along a face walk (always even).
pub fn sign_changes(ov: &Overlay, face: usize) -> usize {
    let walk = &ov.h().faces()[face];
    let k = walk.len();
    (0..k)
        .filter(|&i| ov.edge_sign(edge_of(walk[i])) != ov.edge_sign(edge_of(walk[(i + 1) % k])))
        .count()
}
