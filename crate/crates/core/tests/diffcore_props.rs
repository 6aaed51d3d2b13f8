mod common;

use std::sync::Arc;

use casper::diffcore::{finite_diff_check, Tape, Tensor, Var};
use casper::error::{Error, Result};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(-1.5..1.5)).collect()).unwrap()
}

/// Values bounded away from zero so ReLU-type kinks stay outside the step.
fn away_from_zero(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    let mut t = random(shape, rng);
    for x in t.data_mut() {
        *x = x.signum() * (0.1 + x.abs());
    }
    t
}

/// Reduce any tensor to a scalar through a fixed random projection.
fn project(t: &mut Tape, x: Var, rng_seed: u64) -> Result<Var> {
    let shape = t.value(x).shape().to_vec();
    let r = t.constant(random(&shape, &mut ChaCha8Rng::seed_from_u64(rng_seed)));
    let y = t.mul(x, r)?;
    t.sum(y)
}

const PRIMITIVES: usize = 21;

/// Parameters and builder for primitive `k` at dimensions `(r, c, m)`.
fn primitive_case(k: usize, r: usize, c: usize, m: usize, rng: &mut ChaCha8Rng) -> (Vec<Tensor>, Box<dyn Fn(&mut Tape, &[Var]) -> Result<Var>>) {
    let seed = rng.random();
    let src: Arc<[usize]> = (0..m).map(|_| rng.random_range(0..r)).collect();
    let dst: Arc<[usize]> = (0..m).map(|_| rng.random_range(0..r)).collect();
    let col = rng.random_range(0..c);
    let p = |shape: &[usize], rng: &mut ChaCha8Rng| random(shape, rng);
    let (params, f): (Vec<Tensor>, Box<dyn Fn(&mut Tape, &[Var]) -> Result<Var>>) = match k {
        0 => (vec![p(&[r, c], rng), p(&[c, m], rng)], Box::new(|t, v| t.matmul(v[0], v[1]))),
        1 => (vec![p(&[r, c], rng), p(&[m, c], rng)], Box::new(|t, v| t.matmul_nt(v[0], v[1]))),
        2 => (vec![p(&[r, c], rng), p(&[r, c], rng)], Box::new(|t, v| t.add(v[0], v[1]))),
        3 => (vec![p(&[r, c], rng), p(&[r, c], rng)], Box::new(|t, v| t.sub(v[0], v[1]))),
        4 => (vec![p(&[r, c], rng), p(&[r, c], rng)], Box::new(|t, v| t.mul(v[0], v[1]))),
        5 => (vec![p(&[r, c], rng)], Box::new(|t, v| t.scale(v[0], -1.7))),
        6 => (vec![p(&[r, c], rng), p(&[1], rng)], Box::new(|t, v| t.scale_by(v[0], v[1]))),
        7 => (vec![p(&[r, c], rng)], Box::new(|t, v| t.add_scalar(v[0], 0.4))),
        8 => (vec![p(&[r, c], rng), p(&[r, m], rng)], Box::new(|t, v| t.concat(&[v[0], v[1]], 1))),
        9 => (vec![p(&[r, c], rng), p(&[m, c], rng)], Box::new(|t, v| t.concat(&[v[0], v[1]], 0))),
        10 => (vec![p(&[r, c], rng)], Box::new(|t, v| { let s = t.sum(v[0])?; t.mul(s, s) })),
        11 => (vec![p(&[r, c], rng)], Box::new(|t, v| { let s = t.mean(v[0])?; t.mul(s, s) })),
        12 => (vec![p(&[r, c], rng)], Box::new(|t, v| t.sigmoid(v[0]))),
        13 => (vec![away_from_zero(&[r, c], rng)], Box::new(|t, v| t.relu(v[0]))),
        14 => (vec![p(&[r, c], rng)], Box::new(|t, v| t.tanh(v[0]))),
        15 => (vec![away_from_zero(&[r, c], rng)], Box::new(|t, v| t.leaky_relu(v[0], 0.2))),
        16 => (vec![p(&[r * c], rng)], Box::new(|t, v| t.softmax(v[0]))),
        17 => (vec![away_from_zero(&[r, c], rng)], Box::new(|t, v| t.reciprocal(v[0]))),
        18 => (vec![p(&[r, c], rng)], Box::new(move |t, v| { let g = t.gather_rows(v[0], src.clone())?; t.select_col(g, col) })),
        19 => (vec![p(&[m], rng)], Box::new(move |t, v| t.segment_softmax(v[0], dst.clone(), r))),
        _ => (
            vec![p(&[m], rng), p(&[r, c], rng)],
            Box::new(move |t, v| t.edge_aggregate(v[0], v[1], src.clone(), dst.clone())),
        ),
    };
    let build: Box<dyn Fn(&mut Tape, &[Var]) -> Result<Var>> = Box::new(move |t, v| {
        let out = f(t, v)?;
        project(t, out, seed)
    });
    (params, build)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn every_primitive_matches_central_differences(seed in any::<u64>(), r in 1usize..5, c in 1usize..5, m in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..PRIMITIVES {
            let (params, build) = primitive_case(k, r, c, m, &mut rng);
            prop_assume!(common::differences_resolve(&params, 1e-5, |t: &mut Tape, v: &[Var]| build(t, v)));
            let err = finite_diff_check(&params, 1e-5, |t: &mut Tape, v: &[Var]| build(t, v)).unwrap();
            prop_assert!(err < 1e-4, "primitive {k} error {err}");
        }
    }

    #[test]
    fn two_layer_composition(seed in any::<u64>(), n in 1usize..6, d in 1usize..5, h in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = vec![random(&[n, d], &mut rng), random(&[h, d], &mut rng), random(&[1, h], &mut rng)];
        let build = |t: &mut Tape, v: &[Var]| {
            let z = t.matmul_nt(v[0], v[1])?;
            let a = t.tanh(z)?;
            let o = t.matmul_nt(a, v[2])?;
            let s = t.sigmoid(o)?;
            t.sum(s)
        };
        prop_assume!(common::differences_resolve(&params, 1e-5, build));
        let err = finite_diff_check(&params, 1e-5, build).unwrap();
        prop_assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn gradients_are_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random(&[3, 4], &mut rng);
        let w = random(&[2, 4], &mut rng);
        let grads = |ca: f64, cb: f64| {
            let mut t = Tape::new();
            let xv = t.param(x.clone());
            let wv = t.param(w.clone());
            let z = t.matmul_nt(xv, wv).unwrap();
            let f = t.sigmoid(z).unwrap();
            let f = t.sum(f).unwrap();
            let sq = t.mul(xv, xv).unwrap();
            let g = t.sum(sq).unwrap();
            let fa = t.scale(f, ca).unwrap();
            let gb = t.scale(g, cb).unwrap();
            let l = t.add(fa, gb).unwrap();
            let gr = t.backward(l).unwrap();
            (gr.get_or_zeros(xv, &[3, 4]), gr.get_or_zeros(wv, &[2, 4]))
        };
        let (fx, fw) = grads(1.0, 0.0);
        let (gx, gw) = grads(0.0, 1.0);
        let (cx, cw) = grads(a, b);
        for ((c, f), g) in cx.data().iter().chain(cw.data()).zip(fx.data().iter().chain(fw.data())).zip(gx.data().iter().chain(gw.data())) {
            prop_assert!((c - (a * f + b * g)).abs() < 1e-12);
        }
    }

    #[test]
    fn replay_is_bitwise(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random(&[4, 3], &mut rng);
        let run = || {
            let mut t = Tape::new();
            let v = t.param(x.clone());
            let s = t.softmax(v).unwrap();
            let l = project(&mut t, s, 9).unwrap();
            let g = t.backward(l).unwrap();
            (t.value(l).item().to_bits(), g.get(v).unwrap().data().iter().map(|x| x.to_bits()).collect::<Vec<_>>())
        };
        prop_assert_eq!(run(), run());
    }
}

#[test]
fn errors_surface_through_the_check() {
    let params = [Tensor::zeros(&[2, 2])];
    let out = finite_diff_check(&params, 1e-5, |_: &mut Tape, v: &[Var]| Ok::<_, Error>(v[0]));
    assert!(matches!(out, Err(Error::NonScalarLoss(_))));
}
