//! Biased squared maximum mean discrepancy with a Gaussian kernel
//! `k(x, x') = exp(-(x - x')² / σ)`.

use std::cmp::Ordering;

use rand::seq::SliceRandom;

use crate::rng::SeedTree;

fn kernel(d: f64, sigma: f64) -> f64 {
    (-(d * d) / sigma).exp()
}

/// Sum of `k(x_i, x_j)` over all ordered pairs of one sample.
fn within(x: &[f64], sigma: f64) -> f64 {
    let mut off = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            off += kernel(x[i] - x[j], sigma);
        }
    }
    2.0 * off + x.len() as f64
}

fn cross(a: &[f64], b: &[f64], sigma: f64) -> f64 {
    let mut s = 0.0;
    for &x in a {
        for &y in b {
            s += kernel(x - y, sigma);
        }
    }
    s
}

/// Orders the pair canonically so the estimator is exactly symmetric.
fn canonical<'a>(a: &'a [f64], b: &'a [f64]) -> (&'a [f64], &'a [f64]) {
    match a
        .len()
        .cmp(&b.len())
        .then_with(|| a.partial_cmp(b).unwrap_or(Ordering::Equal))
    {
        Ordering::Greater => (b, a),
        _ => (a, b),
    }
}

/// Biased MMD² between two samples.
///
/// # Panics
/// If either sample is empty or `sigma` is not positive.
pub fn mmd2(a: &[f64], b: &[f64], sigma: f64) -> f64 {
    assert!(
        !a.is_empty() && !b.is_empty(),
        "mmd2 needs nonempty samples"
    );
    assert!(sigma > 0.0, "bandwidth must be positive");
    let (a, b) = canonical(a, b);
    let (m, n) = (a.len() as f64, b.len() as f64);
    within(a, sigma) / (m * m) + within(b, sigma) / (n * n) - 2.0 * cross(a, b, sigma) / (m * n)
}

/// MMD² and its gradients with respect to every entry of `a` and `b`,
/// holding `sigma` fixed.
pub fn mmd2_with_grad(a: &[f64], b: &[f64], sigma: f64) -> (f64, Vec<f64>, Vec<f64>) {
    let (m, n) = (a.len() as f64, b.len() as f64);
    let mut ga = vec![0.0; a.len()];
    let mut gb = vec![0.0; b.len()];
    let mut kaa = a.len() as f64;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let d = a[i] - a[j];
            let k = kernel(d, sigma);
            kaa += 2.0 * k;
            // d/da_i of the two symmetric terms k(a_i,a_j) + k(a_j,a_i).
            let g = -4.0 * d / sigma * k / (m * m);
            ga[i] += g;
            ga[j] -= g;
        }
    }
    let mut kbb = b.len() as f64;
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            let d = b[i] - b[j];
            let k = kernel(d, sigma);
            kbb += 2.0 * k;
            let g = -4.0 * d / sigma * k / (n * n);
            gb[i] += g;
            gb[j] -= g;
        }
    }
    let mut kab = 0.0;
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            let d = x - y;
            let k = kernel(d, sigma);
            kab += k;
            let g = 4.0 * d / sigma * k / (m * n);
            ga[i] += g;
            gb[j] -= g;
        }
    }
    (kaa / (m * m) + kbb / (n * n) - 2.0 * kab / (m * n), ga, gb)
}

/// Median of pairwise squared distances, using at most `cap` evenly spaced
/// points. Falls back to 1 when the sample is degenerate.
pub fn median_bandwidth(x: &[f64], cap: usize) -> f64 {
    let step = (x.len() / cap.max(2)).max(1);
    let pts: Vec<f64> = x.iter().step_by(step).copied().collect();
    let mut d: Vec<f64> = Vec::with_capacity(pts.len() * pts.len() / 2);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let diff = pts[i] - pts[j];
            d.push(diff * diff);
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    let mid = d.len() / 2;
    let (_, m, _) = d.select_nth_unstable_by(mid, |p, q| p.total_cmp(q));
    if *m > 1e-12 {
        *m
    } else {
        1.0
    }
}

/// Mean MMD² over all unordered pairs of samples.
pub fn mean_pairwise_mmd2(samples: &[Vec<f64>], sigma: f64) -> f64 {
    let mut total = 0.0;
    let mut count = 0;
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            total += mmd2(&samples[i], &samples[j], sigma);
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        total / count as f64
    }
}

/// Permutation distribution of [`mean_pairwise_mmd2`]: samples are pooled,
/// shuffled and re-split with their original sizes.
pub fn permutation_null(samples: &[Vec<f64>], sigma: f64, n_perm: usize, seed: u64) -> Vec<f64> {
    let mut pooled: Vec<f64> = samples.iter().flatten().copied().collect();
    let mut rng = SeedTree::new(seed).child_str("permutation").rng();
    (0..n_perm)
        .map(|_| {
            pooled.shuffle(&mut rng);
            let mut rest = pooled.as_slice();
            let split: Vec<Vec<f64>> = samples
                .iter()
                .map(|s| {
                    let (head, tail) = rest.split_at(s.len());
                    rest = tail;
                    head.to_vec()
                })
                .collect();
            mean_pairwise_mmd2(&split, sigma)
        })
        .collect()
}

/// Empirical `q`-quantile (nearest rank).
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}
