//! Deterministic pair and polytope constructions.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geodesic::{self, RationalVec3};
use crate::overlay::{Crossing, PairInput};
use crate::surface_map::{CombinatorialMap, EdgeEnd};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("unknown fixture {0:?}; known: {known}", known = FIXTURE_NAMES.join(", "))]
    UnknownFixture(String),
}

pub const FIXTURE_NAMES: &[&str] = &["bigons", "two-circles", "cube-octa", "projective", "torus"];

/// Parameters of the torus family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusParams {
    pub m: usize,
    pub offset: usize,
}

impl TorusParams {
    /// Offset `m/2 - 1`, which maximises the width for even `m`.
    pub fn new(m: usize) -> Self {
        Self {
            m,
            offset: (m / 2).saturating_sub(1),
        }
    }
}

impl Default for TorusParams {
    /// Width five.
    fn default() -> Self {
        Self::new(8)
    }
}

fn loops(count: usize, twisted: bool) -> CombinatorialMap {
    let ends = (0..count).map(|i| [i, i]).collect();
    let rotations = (0..count)
        .map(|i| vec![EdgeEnd::new(i, 0), EdgeEnd::new(i, 1)])
        .collect();
    let signs: Vec<i8> = vec![if twisted { -1 } else { 1 }; count];
    CombinatorialMap::build(ends, rotations, Some(&signs)).expect("loops form a valid map")
}

/// `m` horizontal and `m` vertical single-vertex loops on the torus. The
/// positive vertex of row `i` sits between columns `i` and `i + 1`; the
/// negative vertex of column `k` sits between rows `k + offset` and
/// `k + offset + 1`. Every row crosses every column once.
pub fn torus_family(params: TorusParams) -> Result<PairInput, GeneratorError> {
    let TorusParams { m, offset } = params;
    if m < 2 {
        return Err(GeneratorError::BadParams(format!(
            "m must be at least 2, got {m}"
        )));
    }
    if offset >= m {
        return Err(GeneratorError::BadParams(format!(
            "offset must be below m = {m}, got {offset}"
        )));
    }
    let md = |x: isize| x.rem_euclid(m as isize) as usize;
    let mut crossings = Vec::with_capacity(m * m);
    for i in 0..m {
        for k in 0..m {
            let (ii, kk, o) = (i as isize, k as isize, offset as isize);
            crossings.push(Crossing::new(i, md(kk - ii - 1), k, md(ii - kk - o - 1), 1));
        }
    }
    Ok(PairInput::new(loops(m, false), loops(m, false), crossings)
        .expect("torus crossings are consistent"))
}

fn map(ends: Vec<[usize; 2]>, rotations: Vec<Vec<(usize, u8)>>) -> CombinatorialMap {
    let rotations = rotations
        .into_iter()
        .map(|r| r.into_iter().map(EdgeEnd::from).collect())
        .collect();
    CombinatorialMap::build(ends, rotations, None).expect("fixture map is valid")
}

/// Two bigons on the sphere. `G⁺`: vertices top (0, 1) and bottom (0, −1),
/// edge 0 the right half of the unit circle, edge 1 the left half, both
/// oriented top to bottom. `G⁻`: vertices (2, 0) and (−2, 0), edge 0 over
/// the top and edge 1 under the bottom, both oriented right to left.
pub fn bigons() -> PairInput {
    let g = || {
        map(
            vec![[0, 1], [0, 1]],
            vec![vec![(0, 0), (1, 0)], vec![(1, 1), (0, 1)]],
        )
    };
    let crossings = vec![
        Crossing::new(0, 0, 0, 0, -1),
        Crossing::new(0, 1, 1, 0, -1),
        Crossing::new(1, 0, 0, 1, -1),
        Crossing::new(1, 1, 1, 1, -1),
    ];
    PairInput::new(g(), g(), crossings).expect("bigon crossings are consistent")
}

/// `G⁺` is the unit circle through (0, 1) and (0, −1). `G⁻` is two small
/// circles centred on those points, each split by its inner and outer
/// vertex on the y-axis and oriented inner to outer.
pub fn two_circles() -> PairInput {
    let gplus = map(
        vec![[0, 1], [0, 1]],
        vec![vec![(0, 0), (1, 0)], vec![(1, 1), (0, 1)]],
    );
    let gminus = map(
        vec![[0, 1], [0, 1], [2, 3], [2, 3]],
        vec![
            vec![(0, 0), (1, 0)],
            vec![(1, 1), (0, 1)],
            vec![(2, 0), (3, 0)],
            vec![(3, 1), (2, 1)],
        ],
    );
    let crossings = vec![
        Crossing::new(0, 0, 0, 0, 1),
        Crossing::new(1, 0, 1, 0, -1),
        Crossing::new(0, 1, 2, 0, 1),
        Crossing::new(1, 1, 3, 0, -1),
    ];
    PairInput::new(gplus, gminus, crossings).expect("two-circle crossings are consistent")
}

/// Geodesic maps of the cube (octahedral map) and the octahedron (cube map).
pub fn cube_octa() -> PairInput {
    geodesic::geodesic_pair(&geodesic::cube(), &geodesic::octahedron(), 1)
        .expect("cube and octahedron are full-dimensional")
        .expect("cube and octahedron fans are in general position")
}

/// One twisted loop per graph in the projective plane, crossing once.
pub fn projective() -> PairInput {
    PairInput::new(
        loops(1, true),
        loops(1, true),
        vec![Crossing::new(0, 0, 0, 0, -1)],
    )
    .expect("projective crossing is consistent")
}

/// The sphere fixtures, by name.
pub fn sphere_fixtures() -> Vec<(&'static str, PairInput)> {
    vec![
        ("bigons", bigons()),
        ("two-circles", two_circles()),
        ("cube-octa", cube_octa()),
    ]
}

pub fn fixture(name: &str) -> Result<PairInput, GeneratorError> {
    match name {
        "bigons" => Ok(bigons()),
        "two-circles" => Ok(two_circles()),
        "cube-octa" => Ok(cube_octa()),
        "projective" => Ok(projective()),
        "torus" => torus_family(TorusParams::default()),
        _ => Err(GeneratorError::UnknownFixture(name.to_string())),
    }
}

fn small_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let n: i64 = rng.gen_range(-12..=12);
    let d: i64 = rng.gen_range(1..=6);
    BigRational::new(n.into(), d.into())
}

/// `n` distinct rational points on the unit sphere: inverse stereographic
/// images of random small rationals. Points on a sphere are in convex
/// position, so every point is a vertex of the hull.
pub fn random_polytope(n: usize, seed: u64) -> Result<Vec<RationalVec3>, GeneratorError> {
    if n < 4 {
        return Err(GeneratorError::BadParams(format!(
            "need at least 4 points, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let one = BigRational::from_integer(1.into());
    let two = BigRational::from_integer(2.into());
    let mut out: Vec<RationalVec3> = Vec::with_capacity(n);
    while out.len() < n {
        let (u, v) = (small_rational(&mut rng), small_rational(&mut rng));
        let s = &u * &u + &v * &v;
        let den = &s + &one;
        let p = RationalVec3([&two * &u / &den, &two * &v / &den, (&s - &one) / &den]);
        if !out.contains(&p) {
            out.push(p);
        }
    }
    Ok(out)
}

/// A random rational rotation, from a quaternion with small integer entries.
pub fn random_rotation(seed: u64) -> [[BigRational; 3]; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = [0i64; 4];
    while q.iter().all(|&c| c == 0) {
        q = std::array::from_fn(|_| rng.gen_range(-9..=9));
    }
    geodesic::quaternion_rotation(q)
}
