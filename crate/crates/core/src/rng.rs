//! Seeded, splittable randomness for reproducible experiments.
//!
//! A single 64-bit seed plus a task index selects an independent ChaCha
//! stream, so fanned-out work draws identical numbers regardless of
//! scheduling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator for task `stream` under the run seed.
pub fn task_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform point in the open probability simplex via exponential spacings.
pub fn random_simplex<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    assert!(n >= 1);
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.random_range(1e-12..1.0);
            -u.ln()
        })
        .collect();
    let total: f64 = v.iter().sum();
    for x in &mut v {
        *x /= total;
    }
    v
}

/// Sorted-descending uniforms in [0, 1]; a dense sample of the
/// non-increasing weight tables.
pub fn random_nonincreasing_weights<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..1.0)).collect();
    w.sort_by(|a, b| b.total_cmp(a));
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_independent_and_reproducible() {
        let a: Vec<f64> = {
            let mut r = task_rng(7, 0);
            (0..4).map(|_| r.random_range(0.0..1.0)).collect()
        };
        let a2: Vec<f64> = {
            let mut r = task_rng(7, 0);
            (0..4).map(|_| r.random_range(0.0..1.0)).collect()
        };
        let b: Vec<f64> = {
            let mut r = task_rng(7, 1);
            (0..4).map(|_| r.random_range(0.0..1.0)).collect()
        };
        assert_eq!(a, a2);
        assert_ne!(a, b);
    }

    #[test]
    fn simplex_points_are_interior_and_normalized() {
        let mut rng = task_rng(1, 0);
        for _ in 0..100 {
            let l = random_simplex(&mut rng, 6);
            assert!(l.iter().all(|&x| x > 0.0));
            assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_are_nonincreasing() {
        let mut rng = task_rng(2, 0);
        let w = random_nonincreasing_weights(&mut rng, 10);
        assert!(w.windows(2).all(|p| p[0] >= p[1]));
    }
}
