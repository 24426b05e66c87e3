use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

/// Smaller samples than this (in the smaller group) get the exact permutation p-value.
pub const EXACT_BELOW: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MannWhitney {
    /// min(U_x, U_y).
    pub u: f64,
    /// Two-sided.
    pub p: f64,
}

/// Average ranks (1-based) of the pooled sample, doubled so ties stay integral.
fn doubled_ranks(pooled: &[f64]) -> Vec<u64> {
    let mut idx: Vec<usize> = (0..pooled.len()).collect();
    idx.sort_by(|&a, &b| pooled[a].total_cmp(&pooled[b]));
    let mut ranks = vec![0; pooled.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && pooled[idx[j + 1]] == pooled[idx[i]] {
            j += 1;
        }
        // ranks i+1..=j+1 averaged, times two
        let twice_avg = (i + 1 + j + 1) as u64;
        for &k in &idx[i..=j] {
            ranks[k] = twice_avg;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided Mann-Whitney U test with average ranks for ties.
pub fn mann_whitney_u(xs: &[f64], ys: &[f64]) -> MannWhitney {
    assert!(!xs.is_empty() && !ys.is_empty(), "samples must be nonempty");
    let (n1, n2) = (xs.len(), ys.len());
    let pooled: Vec<f64> = xs.iter().chain(ys).copied().collect();
    let ranks = doubled_ranks(&pooled);
    let r1: u64 = ranks[..n1].iter().sum();
    let ux = r1 as f64 / 2.0 - (n1 * (n1 + 1)) as f64 / 2.0;
    let u = ux.min((n1 * n2) as f64 - ux);
    if pooled.iter().all(|v| *v == pooled[0]) {
        return MannWhitney { u, p: 1.0 };
    }
    let p = if n1.min(n2) < EXACT_BELOW {
        exact_p(&ranks, n1, r1)
    } else {
        normal_p(&pooled, n1, n2, ux)
    };
    MannWhitney { u, p: p.min(1.0) }
}

/// Permutation distribution of the first group's doubled rank sum, by DP over
/// the pooled ranks.
fn exact_p(ranks: &[u64], n1: usize, observed: u64) -> f64 {
    let total: u64 = ranks.iter().sum();
    let max = total as usize;
    // ways[k][s]: subsets of size k with doubled rank sum s
    let mut ways = vec![vec![0f64; max + 1]; n1 + 1];
    ways[0][0] = 1.0;
    for &r in ranks {
        let r = r as usize;
        for k in (1..=n1).rev() {
            for s in (r..=max).rev() {
                let add = ways[k - 1][s - r];
                if add != 0.0 {
                    ways[k][s] += add;
                }
            }
        }
    }
    let n = ranks.len() as f64;
    // doubled expected sum: n1 (n + 1)
    let centre = n1 as f64 * (n + 1.0);
    let dev = (observed as f64 - centre).abs();
    let all: f64 = ways[n1].iter().sum();
    let hit: f64 = ways[n1]
        .iter()
        .enumerate()
        .filter(|(s, _)| (*s as f64 - centre).abs() >= dev - 1e-9)
        .map(|(_, w)| w)
        .sum();
    hit / all
}

/// Normal approximation with tie and continuity corrections.
fn normal_p(pooled: &[f64], n1: usize, n2: usize, ux: f64) -> f64 {
    let n = (n1 + n2) as f64;
    let mut sorted = pooled.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut ties = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|v| **v == sorted[i]).count();
        let t = j as f64;
        ties += t * t * t - t;
        i += j;
    }
    let (a, b) = (n1 as f64, n2 as f64);
    let var = a * b / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let num = (ux - a * b / 2.0).abs() - 0.5;
    if num <= 0.0 {
        return 1.0;
    }
    let z = num / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    2.0 * (1.0 - normal.cdf(z))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
}

/// (mean(ys) - mean(xs)) over the pooled standard deviation; `None` when that
/// deviation is zero or a sample has fewer than two values.
pub fn cohens_d(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let (n1, n2) = (xs.len(), ys.len());
    if n1 < 2 || n2 < 2 {
        return None;
    }
    let pooled = ((n1 - 1) as f64 * sample_var(xs) + (n2 - 1) as f64 * sample_var(ys)) / (n1 + n2 - 2) as f64;
    let sd = pooled.sqrt();
    (sd > 0.0).then(|| (mean(ys) - mean(xs)) / sd)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]);
        assert_eq!(r.p, 1.0);
        assert_eq!(mann_whitney_u(&[2.0; 4], &[2.0; 6]).p, 1.0);
    }

    #[test]
    fn separated_small_samples() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]);
        assert_eq!(r.u, 0.0);
        // two extreme assignments out of C(6,3) = 20
        assert!((r.p - 2.0 / 20.0).abs() < 1e-12);
        let r = mann_whitney_u(&[0.0; 5], &[5.0, 6.0, 7.0, 8.0, 9.0]);
        assert!((r.p - 2.0 / 252.0).abs() < 1e-12);
    }

    #[test]
    fn large_samples_use_normal_approximation() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = (20..30).map(f64::from).collect();
        let r = mann_whitney_u(&xs, &ys);
        assert_eq!(r.u, 0.0);
        // z = (50 - 0.5) / sqrt(10*10*21/12) = 49.5 / sqrt(175)
        let z: f64 = 49.5 / 175f64.sqrt();
        let expect = 2.0 * (1.0 - Normal::new(0.0, 1.0).unwrap().cdf(z));
        assert!((r.p - expect).abs() < 1e-12);
        assert!(r.p < 0.001);
    }

    #[test]
    fn effect_size() {
        assert!((cohens_d(&[0.0, 2.0], &[3.0, 5.0]).unwrap() - 3.0 / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(cohens_d(&[1.0, 3.0], &[3.0, 1.0]), Some(0.0));
        assert_eq!(cohens_d(&[2.0, 2.0], &[2.0, 2.0]), None);
        assert_eq!(cohens_d(&[2.0], &[2.0, 3.0]), None);
    }
}
