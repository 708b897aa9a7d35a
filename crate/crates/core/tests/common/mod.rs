//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the crate's own samplers or enumerators.

#![allow(dead_code)]

use std::collections::BTreeMap;

/// Relabels `matrix[unit][period]` by first appearance, scanning period by
/// period and unit by unit within a period.
pub fn relabel_period_major(matrix: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = matrix.len();
    let t_len = matrix.first().map_or(0, Vec::len);
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out = vec![vec![0; t_len]; n];
    for t in 0..t_len {
        for i in 0..n {
            let next = map.len();
            out[i][t] = *map.entry(matrix[i][t]).or_insert(next);
        }
    }
    out
}

/// Every restricted growth string of length `len`.
fn restricted_growth(len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        let top = cur.iter().max().map_or(0, |m| m + 1);
        for k in 0..=top {
            cur.push(k);
            rec(len, cur, out);
            cur.pop();
        }
    }
    rec(len, &mut cur, &mut out);
    out
}

/// Probability of one labelled outcome of the sequential restaurant.
///
/// Period one is a plain restaurant. Later, each unit either keeps its label
/// (probability `p`, counts untouched) or is seated with the previous
/// generation's counts plus the non-sticky units already seated; a fresh
/// table takes the next unused label. Sticky indicators are summed out by
/// walking all `2^N` patterns per period.
pub fn sequential_probability(matrix: &[Vec<usize>], p: f64, gamma: f64) -> f64 {
    let n = matrix.len();
    let t_len = matrix[0].len();
    let mut prob = 1.0;
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    let mut fresh = 0usize;
    for row in matrix {
        let k = row[0];
        let total: f64 = counts.values().sum();
        if let Some(&c) = counts.get(&k) {
            prob *= c / (total + gamma);
        } else if k == fresh {
            prob *= gamma / (total + gamma);
            fresh += 1;
        } else {
            return 0.0;
        }
        *counts.entry(k).or_insert(0.0) += 1.0;
    }
    for t in 1..t_len {
        let mut prev: BTreeMap<usize, f64> = BTreeMap::new();
        for row in matrix {
            *prev.entry(row[t - 1]).or_insert(0.0) += 1.0;
        }
        // Labels are canonical, so the next fresh table takes one past every
        // label seen in earlier periods.
        let first_fresh = 1 + matrix.iter().flat_map(|r| r[..t].iter()).max().copied().unwrap_or(0);
        let mut period_prob = 0.0;
        for mask in 0..(1u32 << n) {
            let mut c = prev.clone();
            let mut fresh = first_fresh;
            let mut pr = 1.0;
            for (i, row) in matrix.iter().enumerate() {
                let k = row[t];
                if mask & (1 << i) != 0 {
                    if k != row[t - 1] {
                        pr = 0.0;
                        break;
                    }
                    pr *= p;
                } else {
                    let total: f64 = c.values().sum();
                    let w = match c.get(&k) {
                        Some(&ck) => ck / (total + gamma),
                        None if k == fresh => {
                            fresh += 1;
                            gamma / (total + gamma)
                        }
                        None => 0.0,
                    };
                    pr *= (1.0 - p) * w;
                    if pr == 0.0 {
                        break;
                    }
                    *c.entry(k).or_insert(0.0) += 1.0;
                }
            }
            period_prob += pr;
        }
        prob *= period_prob;
    }
    prob
}

/// Exact law of the sequential restaurant over period-major canonical
/// matrices.
pub fn sequential_law(n: usize, t_len: usize, p: f64, gamma: f64) -> BTreeMap<Vec<Vec<usize>>, f64> {
    let mut out = BTreeMap::new();
    for rgs in restricted_growth(n * t_len) {
        let mut m = vec![vec![0; t_len]; n];
        for t in 0..t_len {
            for i in 0..n {
                m[i][t] = rgs[t * n + i];
            }
        }
        let pr = sequential_probability(&m, p, gamma);
        if pr > 0.0 {
            out.insert(m, pr);
        }
    }
    out
}

pub fn total_variation<K: Ord + Clone>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    let mut keys: Vec<&K> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

pub fn empirical<K: Ord>(samples: impl IntoIterator<Item = K>) -> BTreeMap<K, f64> {
    let mut counts: BTreeMap<K, f64> = BTreeMap::new();
    let mut n = 0.0;
    for s in samples {
        *counts.entry(s).or_insert(0.0) += 1.0;
        n += 1.0;
    }
    for v in counts.values_mut() {
        *v /= n;
    }
    counts
}

/// Hidden-chain path law for a single unit with a `T × K` table of node
/// log-potentials, initial weights `q[0]` and transitions
/// `(1 - p) q[t][k] + p [k = l]`.
pub struct PathOracle {
    pub log_pot: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
    pub p: f64,
}

impl PathOracle {
    fn k(&self) -> usize {
        self.q[0].len()
    }

    fn paths(&self, len: usize) -> Vec<Vec<usize>> {
        let k = self.k();
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|path: Vec<usize>| {
                    (0..k).map(move |j| {
                        let mut p = path.clone();
                        p.push(j);
                        p
                    })
                })
                .collect();
        }
        out
    }

    /// Unnormalised weight of a path prefix.
    fn weight(&self, path: &[usize]) -> f64 {
        let mut w = 1.0;
        for (t, &k) in path.iter().enumerate() {
            let prior = if t == 0 {
                self.q[0][k]
            } else {
                let stay = if k == path[t - 1] { self.p } else { 0.0 };
                (1.0 - self.p) * self.q[t][k] + stay
            };
            w *= prior * self.log_pot[t][k].exp();
        }
        w
    }

    /// `P(g_t = k | data through t)` by summing over prefixes.
    pub fn filtered(&self, t: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.k()];
        for path in self.paths(t + 1) {
            out[path[t]] += self.weight(&path);
        }
        let z: f64 = out.iter().sum();
        out.iter().map(|w| w / z).collect()
    }

    /// Posterior over whole trajectories.
    pub fn posterior(&self) -> BTreeMap<Vec<usize>, f64> {
        let all = self.paths(self.log_pot.len());
        let w: Vec<f64> = all.iter().map(|p| self.weight(p)).collect();
        let z: f64 = w.iter().sum();
        all.into_iter().zip(w).map(|(p, w)| (p, w / z)).collect()
    }
}

pub fn bernoulli_loglik(successes: u64, trials: u64, theta: f64) -> f64 {
    let (s, f) = (successes as f64, (trials - successes) as f64);
    let a = if s > 0.0 { s * theta.ln() } else { 0.0 };
    let b = if f > 0.0 { f * (1.0 - theta).ln() } else { 0.0 };
    a + b
}

pub fn poisson_loglik(values: &[u64], lambda: f64) -> f64 {
    values
        .iter()
        .map(|&b| {
            let lf: f64 = (2..=b).map(|j| (j as f64).ln()).sum();
            b as f64 * lambda.ln() - lambda - lf
        })
        .sum()
}

/// One-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic two-sided critical value of the KS statistic at level 0.01.
pub fn ks_critical_01(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

/// Expected TV between an `n`-draw empirical law and the exact `law` when
/// sampling is correct, from the normal approximation to each cell.
pub fn expected_tv_noise<K>(law: &BTreeMap<K, f64>, n: usize) -> f64 {
    let n = n as f64;
    0.5 * law
        .values()
        .map(|&p| (2.0 * p * (1.0 - p) / (std::f64::consts::PI * n)).sqrt())
        .sum::<f64>()
}
