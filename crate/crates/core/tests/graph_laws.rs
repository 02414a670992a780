mod common;

use common::{closed_form, random_graph, random_point, random_transform};
use proptest::prelude::*;
use shapevo::graph::{
    compose, from_json, to_json, transform, CsgOp, Primitive, PrimitiveKind, ShapeGraph,
};
use shapevo::linalg::Vec3;
use shapevo::rng::seeded;

#[test]
fn primitives_match_closed_form() {
    let mut rng = seeded(11);
    for kind in PrimitiveKind::ALL {
        for _ in 0..20 {
            let prim = Primitive::<f64>::sample(kind, &mut rng);
            let g = prim.graph().unwrap();
            for _ in 0..50 {
                let p = random_point(&mut rng, 1.5);
                let (got, want) = (g.evaluate(p), closed_form(&prim, p));
                assert!(
                    (got - want).abs() <= 1e-12,
                    "{kind:?} at {p:?}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn f32_graphs_track_f64() {
    let mut rng = seeded(12);
    for _ in 0..50 {
        let g = random_graph(&mut rng, 2);
        let g32 = g.cast::<f32>();
        let p = random_point(&mut rng, 1.0);
        let (a, b) = (g.evaluate(p), g32.evaluate(p.cast::<f32>()) as f64);
        assert!((a - b).abs() <= 1e-4 * (1.0 + a.abs()), "{a} vs {b}");
    }
}

#[test]
fn batch_matches_scalar_on_grid() {
    let g = Primitive::Sphere { radius: 1.0 }.graph().unwrap();
    let pts: Vec<Vec3<f64>> = (0..32 * 32 * 32)
        .map(|i| {
            let c = |n: usize| -1.0 + (n as f64 + 0.5) / 16.0;
            Vec3::new(c(i % 32), c((i / 32) % 32), c(i / 1024))
        })
        .collect();
    let batch = g.evaluate_batch(&pts);
    for (p, v) in pts.iter().zip(&batch) {
        assert_eq!(v.to_bits(), g.evaluate(*p).to_bits());
    }
    assert_eq!(g.evaluate_batch(&pts[..1]), vec![g.evaluate(pts[0])]);
}

#[test]
fn sphere_node_count_regression() {
    assert_eq!(
        Primitive::Sphere { radius: 1.0 }
            .graph()
            .unwrap()
            .node_count(),
        7
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn transform_matches_definition(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let g = random_graph(&mut rng, 2);
        let t = random_transform(&mut rng);
        prop_assert!(t.is_valid(1e-9));
        let moved = transform(&g, &t);
        for _ in 0..100 {
            let p = random_point(&mut rng, 1.0);
            let (a, b) = (moved.evaluate(p), g.evaluate(t.apply(p)));
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{} vs {}", a, b);
        }
    }

    #[test]
    fn compose_matches_set_formulas(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let a = random_graph(&mut rng, 1);
        let b = random_graph(&mut rng, 1);
        for op in CsgOp::ALL {
            let c = compose(&a, &b, op);
            prop_assert_eq!(c.node_count(), a.node_count() + b.node_count() - 3 + 1);
            for _ in 0..20 {
                let p = random_point(&mut rng, 1.0);
                let (fa, fb) = (a.evaluate(p), b.evaluate(p));
                let want = match op {
                    CsgOp::Union => fa.min(fb),
                    CsgOp::Intersection => fa.max(fb),
                    CsgOp::Difference => fa.max(-fb),
                };
                prop_assert_eq!(c.evaluate(p), want);
            }
        }
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let g = random_graph(&mut rng, 2);
        let back: ShapeGraph<f64> = from_json(&to_json(&g)).unwrap();
        prop_assert_eq!(back.node_count(), g.node_count());
        for _ in 0..100 {
            let p = random_point(&mut rng, 1.0);
            prop_assert_eq!(back.evaluate(p).to_bits(), g.evaluate(p).to_bits());
        }
    }

    #[test]
    fn evaluation_is_deterministic(seed in any::<u64>()) {
        let mut r1 = seeded(seed);
        let mut r2 = seeded(seed);
        let (g1, g2) = (random_graph(&mut r1, 2), random_graph(&mut r2, 2));
        prop_assert_eq!(&g1, &g2);
        let p = random_point(&mut r1, 1.0);
        prop_assert_eq!(g1.evaluate(p).to_bits(), g2.evaluate(p).to_bits());
    }
}
