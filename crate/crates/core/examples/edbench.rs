use ndarray::Array2;
use std::time::Instant;

fn main() {
    let n = 4096;
    let mut a: Array2<f64> = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = 1.0 / (1.0 + (i as f64 - j as f64).abs());
        }
    }
    let t0 = Instant::now();
    let b = a.dot(&a);
    println!("dgemm {n}: {:?} ({})", t0.elapsed(), b[(0, 0)]);

    let t0 = Instant::now();
    let vals = longrange::linalg::symmetric_eigen(&a, false).unwrap().0;
    println!("dsyevd N {n}: {:?} (min {})", t0.elapsed(), vals[0]);

    let t0 = Instant::now();
    let _ = longrange::linalg::symmetric_eigen(&a, true).unwrap();
    println!("dsyevd V {n}: {:?}", t0.elapsed());

    let n = 8192;
    let mut a: Array2<f64> = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = 1.0 / (1.0 + (i as f64 - j as f64).abs());
        }
    }
    let t0 = Instant::now();
    let vals = longrange::linalg::symmetric_eigen_inplace(&mut a, false).unwrap();
    println!("dsyevd N {n}: {:?} (min {})", t0.elapsed(), vals[0]);
}
