#![allow(dead_code)]

use edgeworth_rearrange::rng::Xoshiro256;

/// f̂ is high on an early block A and low on a later block B of k nodes each
/// (k ≥ 10% of m), f₀ is strictly increasing; returns (f̂, f₀, A, B).
pub fn strict_gain_instance(seed: u64) -> (Vec<f64>, Vec<f64>, Vec<usize>, Vec<usize>) {
    let mut rng = Xoshiro256::seed_from_u64(seed);
    let mut uniform = |lo: f64, hi: f64| lo + (hi - lo) * rng.next_open01();
    let m = uniform(20.0, 120.0) as usize;
    let f0: Vec<f64> = (0..m)
        .scan(0.0, |acc, _| {
            *acc += uniform(0.01, 1.0);
            Some(*acc)
        })
        .collect();
    let k = (m as f64 * 0.1).ceil() as usize;
    let a_start = uniform(0.0, (m / 2 - k) as f64) as usize;
    let b_start = uniform((m / 2) as f64, (m - k) as f64) as usize;
    let top = f0[m - 1];
    let mut fhat: Vec<f64> = f0.iter().map(|f| f + uniform(-0.5, 0.5)).collect();
    for i in 0..k {
        fhat[a_start + i] = top + uniform(2.0, 3.0);
        fhat[b_start + i] = -uniform(2.0, 3.0);
    }
    let a = (a_start..a_start + k).collect();
    let b = (b_start..b_start + k).collect();
    (fhat, f0, a, b)
}

/// Measured (δ, ε, box) of a strict-gain instance: δ is the block mass k/m,
/// ε the smaller of the two separations, the box spans every value.
pub fn strict_gain_parameters(fhat: &[f64], f0: &[f64], a: &[usize], b: &[usize]) -> (f64, f64, f64, f64) {
    let min = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::INFINITY, f64::min);
    let max = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::NEG_INFINITY, f64::max);
    let gap_hat = min(&mut a.iter().map(|&i| fhat[i])) - max(&mut b.iter().map(|&i| fhat[i]));
    let gap_0 = min(&mut b.iter().map(|&i| f0[i])) - max(&mut a.iter().map(|&i| f0[i]));
    let delta = a.len() as f64 / fhat.len() as f64;
    let lo = min(&mut fhat.iter().chain(f0).copied());
    let hi = max(&mut fhat.iter().chain(f0).copied());
    (delta, gap_hat.min(gap_0), lo, hi)
}

/// Grid values on a coarse lattice mixed with continuous draws, so ties occur.
pub fn random_values(rng: &mut Xoshiro256, m: usize) -> Vec<f64> {
    (0..m)
        .map(|_| {
            if rng.next_open01() < 0.5 {
                ((rng.next_open01() * 100.0).floor() - 50.0) / 4.0
            } else {
                40.0 * rng.next_open01() - 20.0
            }
        })
        .collect()
}
