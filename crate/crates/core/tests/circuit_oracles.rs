//! Circuit simulation checked against a dense Kronecker-product simulator
//! written independently of the library's gate kernels.

use proptest::prelude::*;
use qmlshots_core::ansatz::{adjoint_gradient, build_qcnn_pqc, build_vqe_ansatz, CircuitTemplate};
use qmlshots_core::rng::Stream;
use qmlshots_core::simcore::{
    expectation_exact, Complex64, GateKind, GateOp, Observable, PauliString, StateVector,
};

type C = Complex64;
type Matrix = Vec<Vec<C>>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn polar(phase: f64) -> C {
    c(phase.cos(), phase.sin())
}

fn dist(a: C, b: C) -> f64 {
    (a - b).norm_sqr().sqrt()
}

fn identity(d: usize) -> Matrix {
    (0..d).map(|i| (0..d).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect()).collect()
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

fn add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect()).collect()
}

fn single(kind: GateKind, p: &[f64]) -> Matrix {
    let h = 1.0 / 2f64.sqrt();
    let rx = |t: f64| vec![vec![c((t / 2.0).cos(), 0.0), c(0.0, -(t / 2.0).sin())], vec![c(0.0, -(t / 2.0).sin()), c((t / 2.0).cos(), 0.0)]];
    let ry = |t: f64| vec![vec![c((t / 2.0).cos(), 0.0), c(-(t / 2.0).sin(), 0.0)], vec![c((t / 2.0).sin(), 0.0), c((t / 2.0).cos(), 0.0)]];
    let rz = |t: f64| vec![vec![polar(-t / 2.0), c(0.0, 0.0)], vec![c(0.0, 0.0), polar(t / 2.0)]];
    match kind {
        GateKind::H => vec![vec![c(h, 0.0), c(h, 0.0)], vec![c(h, 0.0), c(-h, 0.0)]],
        GateKind::X | GateKind::Cnot => vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]],
        GateKind::Y => vec![vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]],
        GateKind::Z => vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]],
        GateKind::S => vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 1.0)]],
        GateKind::T => vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), polar(std::f64::consts::FRAC_PI_4)]],
        GateKind::Rx | GateKind::Crx => rx(p[0]),
        GateKind::Ry => ry(p[0]),
        GateKind::Rz | GateKind::Crz => rz(p[0]),
        GateKind::Rot => matmul(&rz(p[2]), &matmul(&ry(p[1]), &rz(p[0]))),
    }
}

/// Places `u` on qubit `q` of an `n`-qubit register (qubit 0 leftmost).
fn embed(n: usize, q: usize, u: &Matrix) -> Matrix {
    let mut out = vec![vec![c(1.0, 0.0)]];
    for k in 0..n {
        out = kron(&out, if k == q { u } else { &I2 });
    }
    out
}

static I2: std::sync::LazyLock<Matrix> = std::sync::LazyLock::new(|| identity(2));

fn full_matrix(n: usize, gate: &GateOp, params: &[f64]) -> Matrix {
    let p: Vec<f64> = gate.slots.iter().map(|&s| params[s]).collect();
    let u = single(gate.kind, &p);
    match gate.control {
        None => embed(n, gate.target, &u),
        Some(ctl) => {
            let p0 = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]];
            let p1 = vec![vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]];
            let off = embed(n, ctl, &p0);
            let mut on = vec![vec![c(1.0, 0.0)]];
            for k in 0..n {
                let f = if k == ctl { &p1 } else if k == gate.target { &u } else { &*I2 };
                on = kron(&on, f);
            }
            add(&off, &on)
        }
    }
}

fn reference_run(t: &CircuitTemplate, params: &[f64], input: &[C]) -> Vec<C> {
    let n = t.num_qubits();
    let mut u = identity(1 << n);
    for g in t.gates() {
        u = matmul(&full_matrix(n, g, params), &u);
    }
    u.iter().map(|row| row.iter().zip(input).map(|(a, b)| a * b).sum()).collect()
}

fn random_state(n: usize, rng: &mut Stream) -> Vec<C> {
    let v: Vec<C> = (0..1 << n).map(|_| c(rng.normal(), rng.normal())).collect();
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

fn assert_close(a: &[C], b: &[C], tol: f64) {
    for (x, y) in a.iter().zip(b) {
        assert!(dist(*x, *y) < tol, "{x} vs {y}");
    }
}

#[test]
fn templates_match_reference_simulator() {
    let mut rng = Stream::from_seed(17);
    for t in [build_qcnn_pqc(), build_vqe_ansatz(4, 3).unwrap(), build_vqe_ansatz(3, 2).unwrap()] {
        for _ in 0..3 {
            let params: Vec<f64> = (0..t.num_params()).map(|_| 3.0 * rng.normal()).collect();
            let input = random_state(t.num_qubits(), &mut rng);
            let got = t.prepare(&params, &StateVector::from_amplitudes(input.clone()).unwrap()).unwrap();
            assert_close(got.amplitudes(), &reference_run(&t, &params, &input), 1e-12);
        }
    }
}

/// Brute-force `<Z_q>`: sum of ±|amplitude|² over basis states.
fn z_by_enumeration(amps: &[C], n: usize, q: usize) -> f64 {
    amps.iter()
        .enumerate()
        .map(|(i, a)| if (i >> (n - 1 - q)) & 1 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum()
}

#[test]
fn qcnn_zero_parameters_on_zero_state() {
    let t = build_qcnn_pqc();
    let params = vec![0.0; t.num_params()];
    let mut input = vec![c(0.0, 0.0); 16];
    input[0] = c(1.0, 0.0);
    let reference = reference_run(&t, &params, &input);
    let state = t.prepare(&params, &StateVector::zero(4).unwrap()).unwrap();
    for q in 0..4 {
        let z = expectation_exact(&state, &PauliString::z(4, q)).unwrap();
        assert!((z - z_by_enumeration(&reference, 4, q)).abs() < 1e-12);
    }
    // Zero-angle rotations vanish, so the X gates in the pooling rings leave a basis state.
    assert!(reference.iter().filter(|a| a.norm_sqr() > 1e-24).count() == 1);
}

#[test]
fn qcnn_parameter_gradient_matches_finite_differences() {
    let t = build_qcnn_pqc();
    let mut rng = Stream::from_seed(5);
    let params: Vec<f64> = (0..84).map(|_| rng.normal()).collect();
    let input = StateVector::from_amplitudes(random_state(4, &mut rng)).unwrap();
    let obs = Observable::weighted_z(&[0.4, -1.1, 0.7, 0.2]);
    let adj = adjoint_gradient(&t, &params, &input, &obs).unwrap();
    let f = |p: &[f64]| obs.expectation_exact(&t.prepare(p, &input).unwrap()).unwrap();
    let h = 1e-5;
    for k in 0..84 {
        let mut up = params.clone();
        up[k] += h;
        let mut down = params.clone();
        down[k] -= h;
        let fd = (f(&up) - f(&down)) / (2.0 * h);
        let err = (fd - adj.params[k]).abs();
        assert!(err <= 1e-5 * fd.abs().max(adj.params[k].abs()) || err < 1e-9, "{k}: {fd} vs {}", adj.params[k]);
    }
}

#[test]
fn z_expectation_matches_enumeration() {
    let mut rng = Stream::from_seed(3);
    for n in 1..=4 {
        let amps = random_state(n, &mut rng);
        let s = StateVector::from_amplitudes(amps.clone()).unwrap();
        for q in 0..n {
            let z = expectation_exact(&s, &PauliString::z(n, q)).unwrap();
            assert!((z - z_by_enumeration(&amps, n, q)).abs() < 1e-12);
        }
    }
}

fn any_gate(n: usize) -> impl Strategy<Value = GateOp> {
    let pair = (0..n, 1..n).prop_map(move |(c, d)| (c, (c + d) % n));
    prop_oneof![
        (0..n).prop_map(GateOp::h),
        (0..n).prop_map(GateOp::x),
        (0..n).prop_map(GateOp::y),
        (0..n).prop_map(GateOp::z),
        (0..n).prop_map(GateOp::s),
        (0..n).prop_map(GateOp::t),
        (0..n).prop_map(|q| GateOp::rx(q, 0)),
        (0..n).prop_map(|q| GateOp::ry(q, 0)),
        (0..n).prop_map(|q| GateOp::rz(q, 0)),
        (0..n).prop_map(|q| GateOp::rot(q, [0, 1, 2])),
        pair.clone().prop_map(|(c, t)| GateOp::cnot(c, t)),
        pair.clone().prop_map(|(c, t)| GateOp::crx(c, t, 0)),
        pair.prop_map(|(c, t)| GateOp::crz(c, t, 0)),
    ]
}

proptest! {
    #[test]
    fn gates_preserve_norm_and_invert(
        gate in any_gate(4),
        params in prop::array::uniform3(-10.0f64..10.0),
        seed in any::<u64>(),
    ) {
        let amps = random_state(4, &mut Stream::from_seed(seed));
        let start = StateVector::from_amplitudes(amps.clone()).unwrap();
        let mut s = start.clone();
        s.apply(&gate, &params).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
        let u = full_matrix(4, &gate, &params);
        let expect: Vec<C> = u.iter().map(|row| row.iter().zip(&amps).map(|(a, b)| a * b).sum()).collect();
        for (x, y) in s.amplitudes().iter().zip(&expect) {
            prop_assert!(dist(*x, *y) < 1e-12);
        }
        s.apply_inverse(&gate, &params).unwrap();
        for (x, y) in s.amplitudes().iter().zip(start.amplitudes()) {
            prop_assert!(dist(*x, *y) < 1e-9);
        }
    }
}
