use flowtree::estimates::{kernel_mass, StratumProfile};
use flowtree::oracle::semigroup_sum;
use flowtree::tree::enumerate_ball;
use flowtree::treeheat::{flow_laplacian_at, heat_kernel, kernel, JTable, KernelKind, KernelQuery};
use flowtree::zheat::{hz, hz_recurrence_residual, HzTable};
use flowtree::{TreeParams, VertexWord};
use proptest::prelude::*;

fn vertex(q: u32, depth: usize) -> impl Strategy<Value = VertexWord> {
    proptest::collection::vec(0..q as u8, depth..=depth).prop_map(|w| VertexWord::new(0, w))
}

/// Two vertices below a common apex, at most a few steps apart.
fn pair() -> impl Strategy<Value = (u32, VertexWord, VertexWord)> {
    (2u32..=5).prop_flat_map(|q| {
        (
            Just(q),
            vertex(q, 10),
            0usize..4,
            proptest::collection::vec(0..q as u8, 0..4),
        )
            .prop_map(|(q, x, up, tail)| {
                let mut w = x.ancestor(up).unwrap().word().to_vec();
                w.extend(tail);
                let y = VertexWord::new(0, w);
                (q, x, y)
            })
    })
}

fn h(t: f64, x: &VertexWord, y: &VertexWord, p: &TreeParams) -> f64 {
    heat_kernel(&KernelQuery::from_pair(t, x, y).unwrap(), p).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn heat_kernel_is_symmetric_and_positive((q, x, y) in pair(), t in 0.05f64..50.0) {
        let p = TreeParams::new(q).unwrap();
        let a = h(t, &x, &y, &p);
        prop_assert!(a > 0.0);
        prop_assert!(close(a, h(t, &y, &x, &p), 1e-13));
    }

    #[test]
    fn gradient_stencils_match_differences((q, x, y) in pair(), t in 0.05f64..50.0) {
        let p = TreeParams::new(q).unwrap();
        let px = x.predecessor().unwrap();
        let py = y.predecessor().unwrap();
        let q_xy = KernelQuery::from_pair(t, &x, &y).unwrap();
        let gx = kernel(KernelKind::GradX, &q_xy, &p).unwrap();
        let gy = kernel(KernelKind::GradY, &q_xy, &p).unwrap();
        let gxy = kernel(KernelKind::GradXY, &q_xy, &p).unwrap();
        let scale = h(t, &x, &y, &p).max(h(t, &px, &py, &p));
        let dx = h(t, &x, &y, &p) - h(t, &px, &y, &p);
        let dy = h(t, &x, &y, &p) - h(t, &x, &py, &p);
        let dxy = h(t, &x, &y, &p) - h(t, &px, &y, &p) - h(t, &x, &py, &p) + h(t, &px, &py, &p);
        prop_assert!((gx - dx).abs() <= 1e-12 * scale);
        prop_assert!((gy - dy).abs() <= 1e-12 * scale);
        prop_assert!((gxy - dxy).abs() <= 1e-12 * scale);
    }

    #[test]
    fn heat_kernel_solves_the_heat_equation((q, x, y) in pair(), t in 0.5f64..20.0) {
        let p = TreeParams::new(q).unwrap();
        let lx = flow_laplacian_at(&x, &p, |v| Ok(h(t, v, &y, &p))).unwrap();
        let eps = 1e-4 * t;
        let dt = (h(t + eps, &x, &y, &p) - h(t - eps, &x, &y, &p)) / (2.0 * eps);
        prop_assert!((lx + dt).abs() <= 1e-6 * h(t, &x, &y, &p).max(lx.abs()));
    }

    #[test]
    fn kernel_mass_is_one(q in 2u32..=7, t in 0.1f64..64.0) {
        let m = kernel_mass(t, &TreeParams::new(q).unwrap(), 1e-12).unwrap();
        prop_assert!((m.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn hz_is_a_symmetric_probability(t in 0.01f64..200.0, n in 0i64..80) {
        let a = hz(t, n, 1e-14).unwrap();
        prop_assert!(a > 0.0 && a <= 1.0);
        prop_assert!(close(a, hz(t, -n, 1e-14).unwrap(), 1e-15));
        if n >= 1 {
            let r = hz_recurrence_residual(t, n, 1e-14).unwrap();
            prop_assert!(r.abs() <= 1e-12);
        }
    }

    #[test]
    fn hz_table_sums_to_one(t in 0.01f64..500.0) {
        let n = (t + 40.0 * t.sqrt() + 60.0) as usize;
        let tab = HzTable::new(t, n).unwrap();
        let total: f64 = tab.values()[0] + 2.0 * tab.values()[1..].iter().sum::<f64>();
        prop_assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn profile_decreases_in_distance(q in 2u32..=7, t in 0.1f64..100.0) {
        let p = TreeParams::new(q).unwrap();
        let jt = JTable::new(t, &p, 40).unwrap();
        for d in 0..40 {
            prop_assert!(jt.j(d + 1) < jt.j(d));
        }
    }
}

#[test]
fn semigroup_holds_for_distant_pairs() {
    for q in [2, 3] {
        let p = TreeParams::new(q).unwrap();
        let x = VertexWord::new(0, vec![0; 14]);
        let y = x.ancestor(3).unwrap().child(1).child(1);
        for (t, s) in [(0.5, 0.5), (2.0, 3.0)] {
            let lhs = semigroup_sum(&x, &y, t, s, &p, 50).unwrap();
            let d = x.distance(&y).unwrap();
            let rhs = JTable::new(t + s, &p, d as usize).unwrap().j(d);
            assert!(close(lhs, rhs, 1e-12), "q={q} t={t} s={s}");
        }
    }
}

/// Brute-force sums over an enumerated ball agree with the stratum sums
/// truncated at the same radius, for two different base points.
#[test]
fn stratum_sums_match_enumeration() {
    let p = TreeParams::new(2).unwrap();
    let t = 1.0;
    let r = 12;
    for y in [VertexWord::new(0, vec![0; 12]), VertexWord::new(5, vec![1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1, 0])] {
        let ball = enumerate_ball(&y, r, &p, 1 << 16).unwrap();
        for kind in KernelKind::ALL {
            let brute: f64 = ball
                .iter()
                .map(|x| {
                    let q = KernelQuery::from_pair(t, x, &y).unwrap();
                    kernel(kind, &q, &p).unwrap().abs() * p.pow(x.level() as f64)
                })
                .sum();
            let prof = StratumProfile::new(t, 0.0, kind, &p, 1e-12).unwrap();
            let strata = prof.partial(|k, _| k <= r).value;
            assert!(close(brute, strata, 1e-12), "{kind}: {brute} vs {strata}");
        }
    }
}
