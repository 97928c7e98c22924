mod common;

use proptest::prelude::*;

use common::{bfs_width, exhaustive_width};
use normpair::accounting::accounting_report_unchecked;
use normpair::generators::{random_polytope, random_rotation, torus_family, TorusParams};
use normpair::geodesic::{convex_hull_3, geodesic_pair, rotate};
use normpair::overlay::{build_overlay, PairInput, Sign};
use normpair::width::{
    check_well_formed, deep_subgraph, find_well_formed_loop, reverse_walk, width, WalkOutcome,
    Width,
};

fn torus_pair() -> impl Strategy<Value = PairInput> {
    (2usize..=7)
        .prop_flat_map(|m| (Just(m), 0..m))
        .prop_map(|(m, offset)| torus_family(TorusParams { m, offset }).unwrap())
}

fn sphere_pair() -> impl Strategy<Value = Option<PairInput>> {
    (4usize..=12, 4usize..=12, any::<u64>()).prop_map(|(a, b, seed)| {
        let p = random_polytope(a, seed).unwrap();
        let m = rotate(
            &random_polytope(b, seed ^ 0x5eed).unwrap(),
            &random_rotation(seed),
        );
        geodesic_pair(&p, &m, 1).unwrap().ok()
    })
}

fn any_pair() -> impl Strategy<Value = PairInput> {
    prop_oneof![
        torus_pair(),
        sphere_pair().prop_filter_map("degenerate", |p| p)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bfs_width_matches_oracle(pair in any_pair()) {
        let ov = build_overlay(&pair).unwrap();
        prop_assert_eq!(width(&ov).value, bfs_width(&ov));
        if ov.h().vertex_count() <= 14 {
            prop_assert_eq!(width(&ov).value, exhaustive_width(&ov));
        }
    }

    #[test]
    fn euler_identity_is_exact(pair in any_pair()) {
        let ov = build_overlay(&pair).unwrap();
        let r = accounting_report_unchecked(&ov, None).unwrap();
        prop_assert!(r.identity_holds, "residual {}", r.identity_residual);
        prop_assert!(r.x_even);
        prop_assert!(r.face_bound_holds);
        prop_assert_eq!(r.chi, ov.h().euler_characteristic());
    }

    #[test]
    fn geodesic_pairs_have_width_two(pair in sphere_pair()) {
        if let Some(pair) = pair {
            let ov = build_overlay(&pair).unwrap();
            prop_assert_eq!(ov.h().euler_characteristic(), 2);
            prop_assert!(ov.validate_normal().ok);
            prop_assert_eq!(width(&ov).value, Width::Finite(2));
        }
    }

    #[test]
    fn json_round_trip(pair in any_pair()) {
        let text = serde_json::to_string(&pair).unwrap();
        let back: PairInput = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }

    #[test]
    fn vertex_flips_change_nothing(pair in any_pair(), pick in any::<prop::sample::Index>(), positive in any::<bool>()) {
        let sign = if positive { Sign::Positive } else { Sign::Negative };
        let v = pick.index(pair.graph(sign).vertex_count());
        let flipped = pair.flip_vertex(sign, v);
        let (a, b) = (build_overlay(&pair).unwrap(), build_overlay(&flipped).unwrap());
        prop_assert_eq!(width(&a).value, width(&b).value);
        prop_assert_eq!(a.h().euler_characteristic(), b.h().euler_characteristic());
        prop_assert_eq!(a.h().is_orientable(), b.h().is_orientable());
        prop_assert_eq!(a.validate_strongly_normal().ok, b.validate_strongly_normal().ok);
        let mut fa: Vec<usize> = a.h().faces().iter().map(|f| f.len()).collect();
        let mut fb: Vec<usize> = b.h().faces().iter().map(|f| f.len()).collect();
        fa.sort_unstable();
        fb.sort_unstable();
        prop_assert_eq!(fa, fb);
    }

    #[test]
    fn double_cover_doubles_chi(pair in any_pair()) {
        let (a, b) = (build_overlay(&pair).unwrap(), build_overlay(&pair.double_cover()).unwrap());
        prop_assert_eq!(b.h().euler_characteristic(), 2 * a.h().euler_characteristic());
        prop_assert_eq!(width(&a).value, width(&b).value);
        prop_assert!(b.h().is_orientable());
    }

    #[test]
    fn reversed_loops_stay_well_formed(pair in torus_pair()) {
        let ov = build_overlay(&pair).unwrap();
        for e in deep_subgraph(&ov).edges {
            if let WalkOutcome::Loop(l) = find_well_formed_loop(&ov, e).unwrap() {
                prop_assert!(check_well_formed(&ov, &reverse_walk(&l.darts)).unwrap());
            }
        }
    }

    #[test]
    fn sphere_points_are_all_hull_vertices(n in 4usize..=20, seed in any::<u64>()) {
        let p = random_polytope(n, seed).unwrap();
        let hull = convex_hull_3(&rotate(&p, &random_rotation(seed))).unwrap();
        prop_assert_eq!(hull.vertices.len(), n);
        prop_assert_eq!(hull.euler_characteristic(), 2);
    }
}
