use flowtree::oracle::*;
use flowtree::riesz::RieszKernel;
use flowtree::treeheat::{cms_ht, grad_xy, heat_kernel, JTable, KernelQuery};
use flowtree::zheat::hz;
use flowtree::{TreeParams, VertexWord};
use nalgebra::DMatrix;

const LIMIT: usize = 20_000;

fn params(q: u32) -> TreeParams {
    TreeParams::new(q).unwrap()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

#[test]
fn dense_operators_satisfy_identities() {
    for (q, r) in [(2, 6), (3, 4)] {
        let p = params(q);
        let ball = BallModel::standard(r, &p, LIMIT).unwrap();
        let n = ball.len();
        assert_eq!(n as f64, flowtree::tree::ball_size(r, &p));

        let lo = ball.flow_laplacian_orthonormal();
        assert!(max_abs(&(&lo - lo.transpose())) <= 1e-14);

        let lf = ball.flow_laplacian();
        let half = ball.gradient_adjoint() * ball.gradient() * 0.5;
        let delta = ball.combinatorial_laplacian();
        let b = p.b();
        let mu = ball.mu_diag();
        for i in (0..n).filter(|&i| ball.is_interior(i)) {
            let mut row_sum = 0.0;
            for j in 0..n {
                assert!((lf[(i, j)] - half[(i, j)]).abs() <= 1e-15, "({i}, {j})");
                let conj = (delta[(i, j)] - if i == j { b } else { 0.0 })
                    * (mu[j] / mu[i]).sqrt()
                    / (1.0 - b);
                assert!((lf[(i, j)] - conj).abs() <= 1e-13);
                let id = if i == j { 1.0 } else { 0.0 };
                let m = id - lf[(i, j)];
                assert!(i == j || m >= 0.0);
                row_sum += m;
                // orthonormal form agrees after conjugation by mu^{1/2}
                let back = lo[(i, j)] * (mu[j] / mu[i]).sqrt();
                assert!((back - lf[(i, j)]).abs() <= 1e-14);
            }
            assert!((row_sum - 1.0).abs() <= 1e-14);
        }

        let g = ball.gradient();
        let gs = ball.gradient_adjoint();
        for i in (0..n).filter(|&i| ball.is_interior(i)) {
            for j in 0..n {
                assert!((mu[i] * gs[(i, j)] - g[(j, i)] * mu[j]).abs() <= 1e-13 * mu[i].max(mu[j]));
            }
        }
    }
}

#[test]
fn block_spectrum_matches_dense() {
    for (q, r) in [(2, 5), (3, 3), (4, 3)] {
        let p = params(q);
        let ball = BallModel::standard(r, &p, LIMIT).unwrap();
        let dense = ball.flow_spectrum();
        let mut blocks = Vec::new();
        for e in flow_spectrum(&p, r) {
            let m = e.multiplicity.round() as usize;
            assert_eq!(m as f64, e.multiplicity);
            blocks.extend(std::iter::repeat(e.value).take(m));
        }
        blocks.sort_by(|a, b| a.total_cmp(b));
        assert_eq!(blocks.len(), dense.len());
        for (a, b) in blocks.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-11, "q={q} r={r}: {a} vs {b}");
        }
        let comb = ball.combinatorial_spectrum();
        let cb = combinatorial_spectrum(&p, r);
        assert!((comb[0] - cb[0].value).abs() < 1e-11);
    }
}

#[test]
fn spectrum_in_unit_band_and_bottom_trend() {
    for q in [2, 3] {
        let p = params(q);
        let s = spectrum_summary(&p, 10);
        assert!(s.flow_min > 0.0 && s.flow_max < 2.0);
        let mins: Vec<f64> = [6, 8, 10, 12]
            .iter()
            .map(|&r| spectrum_summary(&p, r).combinatorial_min)
            .collect();
        assert!(mins.windows(2).all(|w| w[1] < w[0]));
        assert!(mins.iter().all(|&m| m > p.b()));
        let gaps: Vec<f64> = [6, 8, 10, 12]
            .iter()
            .map(|&r| spectrum_summary(&p, r).flow_min)
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn dense_heat_matrix_is_a_semigroup_with_identity_start() {
    let p = params(2);
    let ball = BallModel::standard(5, &p, LIMIT).unwrap();
    let mu = ball.mu_diag();
    let h0 = ball.heat_matrix(0.0).unwrap();
    for i in 0..ball.len() {
        for j in 0..ball.len() {
            let want = if i == j { 1.0 / mu[i] } else { 0.0 };
            assert!((h0[(i, j)] - want).abs() < 1e-12 * want.max(1.0));
        }
    }
    let ht = ball.heat_matrix(0.7).unwrap();
    let hs = ball.heat_matrix(1.3).unwrap();
    let hts = ball.heat_matrix(2.0).unwrap();
    let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(mu));
    let prod = &ht * m * &hs;
    assert!(max_abs(&(prod - &hts)) <= 1e-10 * max_abs(&hts));
}

#[test]
fn dense_heat_matrix_agrees_with_radial_model_at_center() {
    for (q, r) in [(2, 6), (3, 4)] {
        let p = params(q);
        let ball = BallModel::standard(r, &p, LIMIT).unwrap();
        let c = ball.index_of(&ball.center).unwrap();
        let h = ball.heat_matrix(1.5).unwrap();
        let prof = ball_heat_profile(&p, r, 1.5).unwrap();
        let lc = ball.center.level();
        for (i, v) in ball.vertices.iter().enumerate() {
            let d = ball.dist[i] as usize;
            // compare in orthonormal scale, where the eigensolver error is uniform
            let scale = p.pow(0.5 * (lc + v.level()) as f64);
            assert!((h[(c, i)] * scale - prof[d]).abs() < 1e-13);
        }
    }
}

#[test]
fn dense_heat_matrix_approximates_analytic_kernel_near_center() {
    let p = params(2);
    let ball = BallModel::standard(8, &p, LIMIT).unwrap();
    let h = ball.heat_matrix(0.5).unwrap();
    let near: Vec<usize> = (0..ball.len()).filter(|&i| ball.dist[i] <= 2).collect();
    for &i in &near {
        for &j in &near {
            let q = KernelQuery::from_pair(0.5, &ball.vertices[i], &ball.vertices[j]).unwrap();
            let want = heat_kernel(&q, &p).unwrap();
            assert!(rel_err(h[(i, j)], want) < 1e-4);
        }
    }
}

#[test]
fn radial_taylor_matches_eigen() {
    for q in [2, 3, 5] {
        let p = params(q);
        for t in [0.1, 1.0, 4.0] {
            let a = ball_heat_profile(&p, 12, t).unwrap();
            let b = ball_heat_profile_eigen(&p, 12, t);
            for d in 0..8 {
                assert!((a[d] - b[d]).abs() < 1e-13, "q={q} t={t} d={d}");
            }
        }
    }
}

#[test]
fn radial_ball_matches_analytic_kernel() {
    for q in [2, 3] {
        let p = params(q);
        for t in [0.25, 1.0, 4.0] {
            let prof = ball_heat_profile(&p, 25, t).unwrap();
            let jt = JTable::new(t, &p, 8).unwrap();
            for d in 0..=8u32 {
                assert!(rel_err(prof[d as usize], jt.j(d)) < 1e-6, "q={q} t={t} d={d}");
            }
        }
    }
}

#[test]
fn finite_section_error_shrinks_with_radius() {
    let p = params(2);
    let jt = JTable::new(4.0, &p, 4).unwrap();
    let errs: Vec<f64> = (8..=20)
        .map(|r| rel_err(ball_heat_profile(&p, r, 4.0).unwrap()[4], jt.j(4)))
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0] || w[1] <= 1e-15));
    assert!(errs[0] > 1e-9);
    let mass: f64 = ball_sphere_mass(&p, 25, 4.0).unwrap().iter().sum();
    assert!((mass - 1.0).abs() < 1e-8);
}

#[test]
fn combinatorial_kernel_matches_radial_ball() {
    for q in [2, 3] {
        let p = params(q);
        for t in [0.5, 2.0, 4.0] {
            let prof = ball_combinatorial_profile(&p, 30, t).unwrap();
            for d in 0..=8u32 {
                let h = cms_ht(t, d, &p, 1e-14).unwrap();
                assert!(rel_err(prof[d as usize], h) < 1e-6, "q={q} t={t} d={d}");
            }
        }
    }
}

#[test]
fn z_line_matches_hz() {
    for t in [0.5, 1.0, 5.0, 20.0] {
        let v = z_heat_taylor(t, 100, 50).unwrap();
        let e = z_heat_eigen(t, 100);
        for n in -50i64..=50 {
            let i = (100 + n) as usize;
            let want = hz(t, n, 1e-14).unwrap();
            assert!(rel_err(v[i], want) < 1e-8, "t={t} n={n}");
            if n.abs() <= 5 {
                assert!(rel_err(e[i], want) < 1e-8);
            }
        }
    }
    let v = z_heat_taylor(1.0, 100, 0).unwrap();
    assert!((v[100] - 0.465760).abs() < 5e-7);
}

#[test]
fn semigroup_convolution() {
    let p = params(2);
    let x = VertexWord::new(0, vec![0; 12]);
    let mut y = VertexWord::new(0, vec![0; 10]);
    y = y.child(1).child(0);
    let (t, s) = (1.0, 2.5);
    let lhs = semigroup_sum(&x, &y, t, s, &p, 45).unwrap();
    let d = x.distance(&y).unwrap();
    let rhs = JTable::new(t + s, &p, d as usize).unwrap().j(d);
    assert!(rel_err(lhs, rhs) < 1e-12);
}

#[test]
fn mixed_gradient_convolution_matches_stencil() {
    let p = params(3);
    let x = VertexWord::new(0, vec![0; 12]);
    for y in [
        x.clone(),
        x.predecessor().unwrap(),
        x.child(2),
        x.ancestor(2).unwrap().child(1).child(0).child(2),
    ] {
        for t in [0.5, 3.0] {
            let conv = mixed_gradient_sum(&x, &y, t, &p, 45).unwrap();
            let q = KernelQuery::from_pair(t, &x, &y).unwrap();
            let want = grad_xy(&q, &p).unwrap();
            assert!((conv - want).abs() < 1e-12 * heat_kernel(&q, &p).unwrap(), "{y} t={t}");
        }
    }
}

#[test]
fn riesz_quadrature_matches_closed_form() {
    for q in [2, 3] {
        let p = params(q);
        let k = RieszKernel::new(&p, 10, 1e-12).unwrap();
        for d in 0..=10u32 {
            let want = riesz_scaled_closed_form(d, &p);
            assert!(rel_err(k.total[d as usize], want) < 1e-10, "q={q} d={d}");
        }
    }
}

#[test]
fn walk_is_reproducible_and_unbiased() {
    let start = VertexWord::new(0, vec![0; 40]);
    let cfg = WalkConfig {
        q: 2,
        start: start.clone(),
        t: 2.0,
        replicates: 200_000,
        seed: 7,
    };
    let targets = default_targets(&start).unwrap();
    let a = mc_heat(&cfg, &targets).unwrap();
    let b = mc_heat(&cfg, &targets).unwrap();
    assert_eq!(a, b);
    let p = params(2);
    for tg in &a.targets {
        let q = KernelQuery::from_pair(2.0, &start, &tg.vertex).unwrap();
        let want = heat_kernel(&q, &p).unwrap() * p.pow(tg.vertex.level() as f64);
        assert!((tg.estimate - want).abs() < 4.0 * tg.std_error, "{}", tg.vertex);
    }
    assert!(a.drift_mean.abs() < 4.0 * a.drift_std_error);
    let small = WalkConfig { replicates: 10, ..cfg };
    assert!(mc_heat(&small, &targets).is_err());
}
