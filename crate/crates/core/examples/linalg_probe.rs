// Temporary timing probe for the dense eigensolver and QR at project sizes.
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::time::Instant;

fn sparse_random(n: usize, p: f64, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if rng.random_bool(p) {
                m[(i, j)] = rng.sample::<f64, _>(StandardNormal);
            }
        }
    }
    m
}

fn main() {
    // Schur-based complex eigenvalues at N=500
    for &(n, p) in &[(200usize, 0.025f64), (500, 0.10)] {
        let m = sparse_random(n, p, 7);
        let t0 = Instant::now();
        let eig = m.clone().complex_eigenvalues();
        let rad = eig.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        println!(
            "complex_eigenvalues N={n} p={p}: {:?}, radius={rad:.6}",
            t0.elapsed()
        );
    }
    // Robustness: many draws
    let t0 = Instant::now();
    for s in 0..30u64 {
        let m = sparse_random(300, 0.05, 1000 + s);
        let eig = m.complex_eigenvalues();
        let rad = eig.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        assert!(rad.is_finite());
    }
    println!("30 draws N=300 robust: {:?}", t0.elapsed());

    // QR of 200x200, repeated (Lyapunov inner loop)
    let m = sparse_random(200, 1.0, 11);
    let t0 = Instant::now();
    let mut acc = 0.0;
    for _ in 0..200 {
        let qr = m.clone().qr();
        acc += qr.r()[(0, 0)];
    }
    println!("200x QR 200x200: {:?} (acc {acc:.3})", t0.elapsed());

    // SymmetricEigen at 500
    let x = sparse_random(500, 1.0, 13);
    let sym = &x * x.transpose();
    let t0 = Instant::now();
    let se = nalgebra::SymmetricEigen::new(sym.clone());
    println!(
        "SymmetricEigen 500: {:?} (max {:.3})",
        t0.elapsed(),
        se.eigenvalues.max()
    );

    // gemm 500x(500x20000)
    let a = DMatrix::<f64>::from_fn(500, 20_000, |i, j| ((i * 7 + j) % 13) as f64 * 0.1);
    let t0 = Instant::now();
    let s = &a * a.transpose();
    println!("gemm 500x20000 * t: {:?} (s00 {:.1})", t0.elapsed(), s[(0, 0)]);

    // cholesky solve 500
    let spd = &s + DMatrix::<f64>::identity(500, 500) * 1.0;
    let t0 = Instant::now();
    let ch = spd.clone().cholesky().unwrap();
    let rhs = DVector::<f64>::from_element(500, 1.0);
    let sol = ch.solve(&rhs);
    println!("cholesky 500 + solve: {:?} ({:.2e})", t0.elapsed(), sol[0]);
}
