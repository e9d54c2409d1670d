use dropmor_core::analysis::{kalman_subspace, sweep_error, verify_hermite, verify_interpolation, FD_STEP};
use dropmor_core::benchmarks::{delay_system, demo_system};
use dropmor_core::linalg::{norm2, orthonormalize, principal_angles, singular_values, to_complex};
use dropmor_core::projection::{build_projection, build_v, ProjectionOptions};
use dropmor_core::reduce::{drop_reduce, minimal_realization, OrderPolicy, Sidedness};
use dropmor_core::sampling::{log_freq_grid, linear_param_grid, Pairing, SamplePoint, SampleSet, SampleSpec};
use dropmor_core::{CMatrix, Complex64, Expr, RMatrix, Role, StructuredSystem, StructuredTerm, SystemMeta, TermMatrix};

struct Rng(u64);

impl Rng {
    fn uniform(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    fn normal(&mut self) -> f64 {
        let u = 1.0 - self.uniform();
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * self.uniform()).cos()
    }
}

/// `sE − A` first-order system in structured form.
fn first_order(a: &RMatrix, b: &RMatrix, c: &RMatrix) -> StructuredSystem {
    let n = a.nrows();
    StructuredSystem::new(
        (n, b.ncols(), c.nrows(), 0),
        vec![
            StructuredTerm::new(Expr::S, TermMatrix::from_real(&RMatrix::identity(n, n))),
            StructuredTerm::new(Expr::num(-1.0), TermMatrix::from_real(a)),
        ],
        vec![StructuredTerm::new(Expr::one(), TermMatrix::from_real(b))],
        vec![StructuredTerm::new(Expr::one(), TermMatrix::from_real(c))],
        SystemMeta { name: "hidden".into(), frequency_range: Some((1e-2, 1e2)), parameter_box: vec![] },
    )
    .unwrap()
}

/// Hidden-order system in Kalman block form: a random minimal block of order
/// `k`, an unobservable-free but input-free block feeding it, and a reachable
/// block that never reaches the output, mixed by an orthogonal similarity.
struct Hidden {
    sys: StructuredSystem,
    a: RMatrix,
    b: RMatrix,
    q: RMatrix,
    /// Coordinates spanning the reachable subspace before mixing.
    reachable: Vec<usize>,
}

fn hidden_system(n: usize, k: usize, inputs: usize, outputs: usize, rng: &mut Rng) -> Hidden {
    let u = (n - k) / 2;
    let blocks = [(0, k), (k, k + u), (k + u, n)];
    let mut a = RMatrix::zeros(n, n);
    for &(lo, hi) in &blocks {
        let scale = 0.8 / ((hi - lo) as f64).sqrt();
        for i in lo..hi {
            for j in lo..hi {
                a[(i, j)] = scale * rng.normal();
            }
            a[(i, i)] -= 1.2;
        }
    }
    // x1 <- x2 and x3 <- x1 couplings keep x2 unreachable and x3 unobservable
    for i in 0..k {
        for j in k..k + u {
            a[(i, j)] = 0.3 * rng.normal();
        }
    }
    for i in k + u..n {
        for j in 0..k {
            a[(i, j)] = 0.3 * rng.normal();
        }
    }
    let mut b = RMatrix::zeros(n, inputs);
    let mut c = RMatrix::zeros(outputs, n);
    for i in (0..k).chain(k + u..n) {
        for j in 0..inputs {
            b[(i, j)] = rng.normal();
        }
    }
    for i in 0..k + u {
        for j in 0..outputs {
            c[(j, i)] = rng.normal();
        }
    }
    let t = RMatrix::from_fn(n, n, |_, _| rng.range(-1.0, 1.0));
    let q = t.qr().q();
    let a2 = &q * &a * q.transpose();
    let b2 = &q * &b;
    let c2 = &c * q.transpose();
    let reachable = (0..k).chain(k + u..n).collect();
    Hidden { sys: first_order(&a2, &b2, &c2), a: a2, b: b2, q, reachable }
}

/// Minimal order from the rank of the Hankel product `O·R`.
fn hankel_rank(a: &RMatrix, b: &RMatrix, c: &RMatrix) -> usize {
    let n = a.nrows();
    // rank is unchanged by scaling A; keeps the powers bounded
    let a = &(a / a.norm());
    let mut blocks_r = Vec::new();
    let mut blocks_o = Vec::new();
    let mut x = b.clone();
    let mut y = c.clone();
    for _ in 0..n {
        blocks_r.push(x.clone());
        blocks_o.push(y.clone());
        x = a * x;
        y = &y * a;
    }
    let r = RMatrix::from_columns(&blocks_r.iter().flat_map(|m| m.column_iter().map(|c| c.into_owned())).collect::<Vec<_>>());
    let o = RMatrix::from_rows(&blocks_o.iter().flat_map(|m| m.row_iter().map(|r| r.into_owned())).collect::<Vec<_>>());
    let sv = singular_values(&to_complex(&(o * r))).unwrap();
    sv.iter().filter(|&&s| s > 1e-14 * sv[0]).count()
}

fn imaginary_samples(count: usize) -> SampleSet {
    let pts = log_freq_grid(1e-2, 1e2, count)
        .unwrap()
        .into_iter()
        .map(|s| SamplePoint::new(s, vec![]))
        .collect();
    SampleSet::from_points(pts).unwrap()
}

#[test]
fn minimal_realization_recovers_the_hidden_order() {
    let mut rng = Rng(7);
    for trial in 0..20 {
        let k = 3 + trial % 5;
        let (inputs, outputs) = if trial % 2 == 0 { (1, 1) } else { (2, 2) };
        let h = hidden_system(10, k, inputs, outputs, &mut rng);
        let c = h.sys.terms(Role::C)[0].matrix.to_dense().map(|z| z.re);
        assert_eq!(hankel_rank(&h.a, &h.b, &c), k, "oracle disagrees with construction");

        let samples = imaginary_samples(12);
        let pair = build_projection(&h.sys, &samples, &ProjectionOptions::default()).unwrap();
        let red = minimal_realization(&h.sys, &pair.v, &pair.w).unwrap();
        assert_eq!(red.order(), k, "trial {trial}");
        for _ in 0..25 {
            let s = Complex64::new(0.0, 10f64.powf(rng.range(-3.0, 3.0)));
            let full = h.sys.transfer(s, &[]).unwrap();
            let approx = red.system.transfer(s, &[]).unwrap();
            assert!(norm2(&(&full - &approx)) <= 1e-8 * norm2(&full), "trial {trial} at {s}");
        }
    }
}

#[test]
fn sampled_range_equals_reachable_subspace() {
    let mut rng = Rng(11);
    for trial in 0..6 {
        let h = hidden_system(8, 3 + trial % 3, 1, 1, &mut rng);
        let exact = to_complex(&RMatrix::from_columns(
            &h.reachable.iter().map(|&i| h.q.column(i).into_owned()).collect::<Vec<_>>(),
        ));
        let kalman = kalman_subspace(&to_complex(&h.a), &to_complex(&h.b), 8).unwrap();
        assert_eq!(kalman.ncols(), exact.ncols());
        assert!(principal_angles(&kalman, &exact).unwrap().iter().all(|&t| t <= 1e-8));

        let v = build_v(&h.sys, &imaginary_samples(8)).unwrap();
        let q = orthonormalize(&v, 1e-10).unwrap();
        assert_eq!(q.ncols(), exact.ncols());
        let angles = principal_angles(&q, &exact).unwrap();
        assert!(angles.iter().all(|&t| t <= 1e-8), "{angles:?}");
    }
}

fn demo_samples(count: usize) -> SampleSet {
    let spec = SampleSpec {
        omega_min: 1e-4,
        omega_max: 10.0,
        n_freq: count,
        param_box: vec![(-10.0, 10.0)],
        n_param: count,
        pairing: Pairing::Zip,
        tangential: false,
        seed: 3,
    };
    SampleSet::generate(&spec, 1, 1).unwrap()
}

#[test]
fn demo_reduces_exactly_to_order_two() {
    let sys = demo_system();
    let samples = demo_samples(10);
    let pair = build_projection(&sys, &samples, &ProjectionOptions::default()).unwrap();
    let red = drop_reduce(&sys, &pair.v, &pair.w, OrderPolicy::RelTol(1e-8), Sidedness::TwoSided).unwrap();
    assert_eq!(red.order(), 2);
    let sv = &red.report.sv_left;
    assert_eq!(sv.iter().filter(|&&s| s > 1e-12 * sv[0]).count(), 2);

    let freqs: Vec<f64> = log_freq_grid(1e-4, 10.0, 100).unwrap().iter().map(|s| s.im).collect();
    let params = linear_param_grid(&[(-10.0, 10.0)], 20);
    let rep = sweep_error(&sys, &red.system, &freqs, &params).unwrap();
    assert!(rep.failures.is_empty());
    assert!(rep.max_abs <= 1e-10, "{}", rep.max_abs);

    assert!(verify_interpolation(&sys, &red.system, &samples, 1e-8).passed());
    let hermite = verify_hermite(&sys, &red.system, &samples, FD_STEP, 1e-5);
    assert!(hermite.passed(), "{}", hermite.max_residual());
}

#[test]
fn truncated_demo_misses_samples() {
    let sys = demo_system();
    let samples = demo_samples(10);
    let pair = build_projection(&sys, &samples, &ProjectionOptions::default()).unwrap();
    let red = drop_reduce(&sys, &pair.v, &pair.w, OrderPolicy::Fixed(1), Sidedness::TwoSided).unwrap();
    assert_eq!(red.order(), 1);
    let check = verify_interpolation(&sys, &red.system, &samples, 1e-8);
    assert!(check.max_residual() > 1e-6);
}

#[test]
fn coincident_delay_samples_are_hermite_interpolated() {
    let sys = delay_system(50, 5.0, 0.01, 1.0).unwrap();
    let pts = log_freq_grid(1e-2, 1e4, 15).unwrap().into_iter().map(|s| SamplePoint::new(s, vec![])).collect();
    let samples = SampleSet::from_points(pts).unwrap();
    let pair = build_projection(&sys, &samples, &ProjectionOptions::default()).unwrap();
    let red = minimal_realization(&sys, &pair.v, &pair.w).unwrap();
    let interp = verify_interpolation(&sys, &red.system, &samples, 1e-8);
    assert!(interp.passed(), "{}", interp.max_residual());
    let hermite = verify_hermite(&sys, &red.system, &samples, FD_STEP, 1e-5);
    assert!(hermite.passed(), "{}", hermite.max_residual());
}

#[test]
fn delay_sweep_matches_pointwise_solves() {
    let sys = delay_system(500, 5.0, 0.01, 1.0).unwrap();
    let freqs = log_freq_grid(1e-2, 1e4, 10).unwrap();
    let swept = sys.transfer_sweep(&freqs, &[vec![]]);
    for (s, h) in freqs.iter().zip(swept) {
        let h = h.unwrap();
        let single = sys.transfer(*s, &[]).unwrap();
        assert!(norm2(&(&h - &single)) <= 1e-14 * norm2(&single));
        // explicit dense oracle at the same point
        let k = sys.assemble(Role::K, *s, &[]).unwrap().to_dense();
        let b = sys.assemble(Role::B, *s, &[]).unwrap().to_dense();
        let c = sys.assemble(Role::C, *s, &[]).unwrap().to_dense();
        let x = k.lu().solve(&b).unwrap();
        let dense: CMatrix = c * x;
        assert!(norm2(&(&h - &dense)) <= 1e-10 * norm2(&dense));
    }
}
