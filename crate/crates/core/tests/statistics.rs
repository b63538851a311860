//! Monte-Carlo checks of the sampled noise.

use rim_core::randomness::{sample_wiener, solve_ou, temperedness_ratio};
use rim_core::{CovarianceSpec, OuScheme, Spectrum, TimeGrid};

#[test]
fn wiener_increment_variance() {
    let h = 0.01;
    let q = [1.0, 0.25];
    let grid = TimeGrid::new(-1.0, 1000.0, h).unwrap();
    let w = sample_wiener(17, grid, &CovarianceSpec::new(q.to_vec()).unwrap());
    let n = 100_000;
    for (j, qj) in q.iter().enumerate() {
        let mut acc = 0.0;
        for i in 0..n {
            let a = w.value_at(i as f64 * h).unwrap()[j];
            let b = w.value_at((i + 1) as f64 * h).unwrap()[j];
            acc += (b - a) * (b - a);
        }
        let var = acc / n as f64;
        assert!((var / (qj * h) - 1.0).abs() < 0.05, "mode {j}: {var}");
    }
}

#[test]
fn ou_stationary_variance() {
    let h = 0.05;
    let s = Spectrum::new(vec![1.0, 4.0], 0.0).unwrap();
    let q = [1.0, 2.0];
    let cov = CovarianceSpec::new(q.to_vec()).unwrap();
    let mut acc = [0.0; 2];
    let mut count = 0.0;
    for seed in 0..100 {
        let w = sample_wiener(seed, TimeGrid::new(-1.0, 1000.0, h).unwrap(), &cov);
        let z = solve_ou(&w, &s, OuScheme::PathQuadrature).unwrap();
        for k in 0..200 {
            let v = z.at_time(5.0 * k as f64).unwrap();
            for j in 0..2 {
                acc[j] += v[j] * v[j];
            }
            count += 1.0;
        }
    }
    for j in 0..2 {
        let expected = q[j] / (2.0 * s.lambdas()[j]);
        let var = acc[j] / count;
        assert!((var / expected - 1.0).abs() < 0.05, "mode {j}: {var} vs {expected}");
    }
}

fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn ou_is_stationary_across_times() {
    let h = 0.01;
    let s = Spectrum::new(vec![1.0, 9.0], 0.0).unwrap();
    let cov = CovarianceSpec::new(vec![1.0, 1.0]).unwrap();
    for scheme in [OuScheme::PathQuadrature, OuScheme::ExactVariance] {
        let (mut early, mut late) = (Vec::new(), Vec::new());
        for seed in 0..1000 {
            let w = sample_wiener(seed, TimeGrid::new(-5.0, 5.0, h).unwrap(), &cov);
            let z = solve_ou(&w, &s, scheme).unwrap();
            early.push(z.at_time(-4.0).unwrap()[0]);
            late.push(z.at_time(4.0).unwrap()[0]);
        }
        let d = ks_statistic(early, late);
        // 1% two-sample critical value 1.628·sqrt(2/n).
        assert!(d < 1.628 * (2.0f64 / 1000.0).sqrt(), "{scheme:?}: KS {d}");
    }
}

#[test]
fn temperedness_ratio_is_finite_over_paths() {
    let s = Spectrum::new(vec![1.0], 0.0).unwrap();
    let cov = CovarianceSpec::new(vec![1.0]).unwrap();
    for seed in 0..1000 {
        let w = sample_wiener(seed, TimeGrid::new(-20.0, 0.5, 0.01).unwrap(), &cov);
        let z = solve_ou(&w, &s, OuScheme::PathQuadrature).unwrap();
        let r = temperedness_ratio(&z, &s, 1.0, 0.0).unwrap();
        assert!(r.is_finite() && r >= 0.0);
    }
}
