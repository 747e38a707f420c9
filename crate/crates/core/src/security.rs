//! Entropy and min-entropy bookkeeping for the distillable key.
//!
//! All logarithms are base 2.

use num_rational::Ratio;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::prng::Stream;
use crate::rate_adapt::adapted_rate;

const SUM_TOLERANCE: f64 = 1e-12;
const INDEPENDENCE_TOLERANCE: f64 = 1e-12;

/// `h(p) = -p log p - (1 - p) log (1 - p)` with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    let term = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}

/// Probability table over a product alphabet, stored row-major with the last
/// component varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution {
    dims: Vec<usize>,
    probs: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let len = probs.len();
        Self::joint(vec![len], probs)
    }

    pub fn joint(dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let size: usize = dims.iter().product();
        if dims.is_empty() || size == 0 {
            return Err(Error::Domain("empty alphabet".into()));
        }
        if probs.len() != size {
            return Err(Error::Dimension {
                expected: size,
                got: probs.len(),
            });
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::Domain(format!("invalid probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Domain(format!("probabilities sum to {total}")));
        }
        Ok(Self { dims, probs })
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(dims: Vec<usize>, weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Domain("weights sum to zero".into()));
        }
        Self::joint(dims, weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(size: usize) -> Result<Self> {
        Self::new(vec![1.0 / size as f64; size])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn expect_rank(&self, rank: usize) -> Result<()> {
        if self.dims.len() == rank {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "expected a {rank}-component joint distribution, got {} components",
                self.dims.len()
            )))
        }
    }
}

/// Shannon entropy `H(X)` in bits.
pub fn shannon_entropy(dist: &FiniteDistribution) -> f64 {
    dist.probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// `H∞(X) = -log max_x P(x)`, over the whole (possibly joint) alphabet.
pub fn min_entropy(dist: &FiniteDistribution) -> f64 {
    let max = dist.probs.iter().copied().fold(0.0, f64::max);
    -max.log2()
}

/// `H∞(X|Z) = min_z H∞(X | Z = z)` for a joint over `(X, Z)`.
/// Outcomes `z` of probability zero are skipped.
pub fn cond_min_entropy(joint: &FiniteDistribution) -> Result<f64> {
    joint.expect_rank(2)?;
    let (nx, nz) = (joint.dims[0], joint.dims[1]);
    let mut worst: Option<f64> = None;
    for z in 0..nz {
        let column = (0..nx).map(|x| joint.probs[x * nz + z]);
        let marginal: f64 = column.clone().sum();
        if marginal <= 0.0 {
            continue;
        }
        let guess = column.fold(0.0, f64::max) / marginal;
        worst = Some(worst.map_or(guess, |w| w.max(guess)));
    }
    worst
        .map(|g| -g.log2())
        .ok_or_else(|| Error::Domain("every conditioning outcome has probability zero".into()))
}

/// Both sides of `H∞(XY|Z) = H∞(X|Z) + H∞(Y)` for a joint over `(X, Y, Z)`.
///
/// Fails with [`Error::Precondition`] unless `Y` is independent of `(X, Z)`.
pub fn check_lemma1(joint: &FiniteDistribution) -> Result<(f64, f64)> {
    joint.expect_rank(3)?;
    let (nx, ny, nz) = (joint.dims[0], joint.dims[1], joint.dims[2]);
    let at = |x: usize, y: usize, z: usize| joint.probs[(x * ny + y) * nz + z];

    let mut p_xz = vec![0.0; nx * nz];
    let mut p_y = vec![0.0; ny];
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nz {
                p_xz[x * nz + z] += at(x, y, z);
                p_y[y] += at(x, y, z);
            }
        }
    }
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nz {
                let gap = (at(x, y, z) - p_xz[x * nz + z] * p_y[y]).abs();
                if gap > INDEPENDENCE_TOLERANCE {
                    return Err(Error::Precondition(format!(
                        "Y is not independent of (X, Z): |P(x,y,z) - P(x,z)P(y)| = {gap:e} at ({x}, {y}, {z})"
                    )));
                }
            }
        }
    }

    let xy_given_z = FiniteDistribution {
        dims: vec![nx * ny, nz],
        probs: joint.probs.clone(),
    };
    let lhs = cond_min_entropy(&xy_given_z)?;
    let rhs = cond_min_entropy(&FiniteDistribution {
        dims: vec![nx, nz],
        probs: p_xz,
    })? + min_entropy(&FiniteDistribution {
        dims: vec![ny],
        probs: p_y,
    });
    Ok((lhs, rhs))
}

/// Min-entropy left for privacy amplification after reconciliation with an
/// adapted code of rate `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageBudget {
    pub h_min_prior: f64,
    pub payload_len: usize,
    pub adapted_rate: f64,
    pub security_t: f64,
    /// `|X| (1 - R) + t`
    pub leak_formula_bits: f64,
    /// `H∞(X|Z) - |X| (1 - R) - t`, floored at zero.
    pub key_bits_lower_bound: f64,
}

pub fn leakage_budget(
    h_min_prior: f64,
    payload_len: usize,
    rate: f64,
    t: f64,
) -> Result<LeakageBudget> {
    if !(h_min_prior >= 0.0) || !(t >= 0.0) {
        return Err(Error::Domain(
            "min-entropy and security parameter must be nonnegative".into(),
        ));
    }
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Domain(format!("rate {rate} outside [0, 1]")));
    }
    let leak = payload_len as f64 * (1.0 - rate) + t;
    Ok(LeakageBudget {
        h_min_prior,
        payload_len,
        adapted_rate: rate,
        security_t: t,
        leak_formula_bits: leak,
        key_bits_lower_bound: (h_min_prior - leak).max(0.0),
    })
}

/// Bound from the transcript side: `H∞(X|Z) + (p + s) - |C| - t` with
/// `|C| = s + n - k`. Not floored.
pub fn transcript_bound(h_min_prior: f64, n: usize, k: usize, s: usize, p: usize, t: f64) -> f64 {
    h_min_prior + (p + s) as f64 - (s + n - k) as f64 - t
}

/// The two routes to the post-reconciliation bound in exact arithmetic:
/// `(h + (p + s) - (s + n - k) - t, h - |X| (1 - R) - t)` with `|X| = n - s - p`
/// and `R = (k - s) / (n - s - p)`.
pub fn bound_routes_exact(
    h_min_prior: Ratio<i128>,
    n: usize,
    k: usize,
    s: usize,
    p: usize,
    t: Ratio<i128>,
) -> Result<(Ratio<i128>, Ratio<i128>)> {
    let rate = adapted_rate(n, k, s, p)?;
    let rate = Ratio::new(*rate.numer() as i128, *rate.denom() as i128);
    let int = |v: usize| Ratio::from_integer(v as i128);
    let via_transcript = h_min_prior + int(p + s) - int(s + n - k) - t;
    let via_rate = h_min_prior - int(n - s - p) * (Ratio::from_integer(1) - rate) - t;
    Ok((via_transcript, via_rate))
}

/// Reconciliation efficiencies `(f_orig, f_code)`.
///
/// `f_orig = (s + n - k) / ((n - p - s) h(p_err))` charges the whole
/// transcript to the original strings. `f_code = (1 - R) / h(p_err)` is the
/// efficiency of the adapted code on the extended strings.
pub fn efficiency_metrics(
    n: usize,
    k: usize,
    s: usize,
    p: usize,
    p_err: f64,
) -> Result<(f64, f64)> {
    let h = binary_entropy(p_err)?;
    if h == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    let rate = adapted_rate(n, k, s, p)?;
    let rate = *rate.numer() as f64 / *rate.denom() as f64;
    let f_orig = (s + n - k) as f64 / ((n - p - s) as f64 * h);
    let f_code = (1.0 - rate) / h;
    Ok((f_orig, f_code))
}

/// `H(X|Z) - H(X|Y)`, bits per symbol; negative means no key.
pub fn secret_rate(h_x_given_z: f64, h_x_given_y: f64) -> f64 {
    h_x_given_z - h_x_given_y
}

/// Compresses `key_material` to `out_len` bits with a seeded binary Toeplitz matrix.
///
/// The matrix has entries `T[i][j] = r[i + len - 1 - j]` where `r` is the first
/// `len + out_len - 1` bits of [`Stream::new`]`(hash_seed)`.
pub fn amplify(key_material: &BitString, out_len: usize, hash_seed: u64) -> Result<BitString> {
    let len = key_material.len();
    if out_len > len {
        return Err(Error::Budget {
            requested: out_len,
            available: len,
        });
    }
    if out_len == 0 {
        return Ok(BitString::zeros(0));
    }
    let diag = Stream::new(hash_seed).bits(len + out_len - 1);
    let reversed: BitString = (0..len).rev().map(|j| key_material.get(j)).collect();
    let rw = diag.words();
    let word = |i: usize| rw.get(i).copied().unwrap_or(0);

    let mut out = BitString::zeros(out_len);
    for i in 0..out_len {
        // row i is diag[i .. i + len] against the reversed input
        let (base, off) = (i / 64, i % 64);
        let mut acc = 0u64;
        for (w, &kw) in reversed.words().iter().enumerate() {
            let lo = word(base + w) >> off;
            let hi = if off == 0 {
                0
            } else {
                word(base + w + 1) << (64 - off)
            };
            acc ^= (lo | hi) & kw;
        }
        if acc.count_ones() % 2 == 1 {
            out.set(i, true);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // -0.068 log2 0.068 - 0.932 log2 0.932, evaluated with mpmath at 30 digits
        assert!((binary_entropy(0.068).unwrap() - 0.358_415_3).abs() < 1e-6);
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(-0.1).is_err());
    }

    #[test]
    fn min_entropy_values() {
        assert!((min_entropy(&FiniteDistribution::uniform(8).unwrap()) - 3.0).abs() < 1e-12);
        assert_eq!(
            min_entropy(&FiniteDistribution::new(vec![0.0, 1.0]).unwrap()),
            0.0
        );
        let skew = FiniteDistribution::new(vec![0.75, 0.25]).unwrap();
        assert!((min_entropy(&skew) - 0.415_037).abs() < 1e-6);
        assert!(FiniteDistribution::new(vec![]).is_err());
        assert!(FiniteDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(FiniteDistribution::new(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn conditional_min_entropy_examples() {
        // X uniform on 4, independent of a biased bit Z
        let probs: Vec<f64> = (0..4).flat_map(|_| [0.25 * 0.3, 0.25 * 0.7]).collect();
        let indep = FiniteDistribution::joint(vec![4, 2], probs).unwrap();
        assert!((cond_min_entropy(&indep).unwrap() - 2.0).abs() < 1e-12);

        // X = Z
        let mut probs = vec![0.0; 16];
        for v in 0..4 {
            probs[v * 4 + v] = 0.25;
        }
        let copy = FiniteDistribution::joint(vec![4, 4], probs).unwrap();
        assert_eq!(cond_min_entropy(&copy).unwrap(), 0.0);

        // X two uniform bits, Z its first bit: one bit stays hidden
        let mut probs = vec![0.0; 8];
        for x in 0..4 {
            probs[x * 2 + (x >> 1)] = 0.25;
        }
        let first = FiniteDistribution::joint(vec![4, 2], probs).unwrap();
        assert!((cond_min_entropy(&first).unwrap() - 1.0).abs() < 1e-12);

        // zero-probability z is skipped
        let skipped = FiniteDistribution::joint(vec![2, 2], vec![0.5, 0.0, 0.5, 0.0]).unwrap();
        assert!((cond_min_entropy(&skipped).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn additivity_on_uniform_bits() {
        let joint = FiniteDistribution::uniform(8).unwrap();
        let joint = FiniteDistribution::joint(vec![2, 2, 2], joint.probs().to_vec()).unwrap();
        let (lhs, rhs) = check_lemma1(&joint).unwrap();
        assert!((lhs - 2.0).abs() < 1e-12 && (rhs - 2.0).abs() < 1e-12);
    }

    #[test]
    fn additivity_rejects_dependent_y() {
        // Y = X, Z constant
        let joint = FiniteDistribution::joint(vec![2, 2, 1], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(matches!(check_lemma1(&joint), Err(Error::Precondition(_))));
    }

    #[test]
    fn leakage_examples() {
        let none = leakage_budget(500.0, 1000, 1.0, 0.0).unwrap();
        assert_eq!(none.key_bits_lower_bound, 500.0);

        let ex = leakage_budget(190_000.0, 190_000, 0.60933, 80.0).unwrap();
        // 190000 * (1 - 0.60933) = 74227.3
        assert!((ex.leak_formula_bits - 74_307.3).abs() < 1e-6);
        assert!((ex.key_bits_lower_bound - 115_692.7).abs() < 1e-6);

        let floored = leakage_budget(10.0, 1000, 0.5, 0.0).unwrap();
        assert_eq!(floored.key_bits_lower_bound, 0.0);
        assert!(leakage_budget(10.0, 10, 1.5, 0.0).is_err());
    }

    #[test]
    fn example_efficiencies() {
        let (f_orig, f_code) = efficiency_metrics(200_000, 120_000, 4228, 5772, 0.068).unwrap();
        assert!((f_code - 1.09).abs() < 5e-4, "{f_code}");
        // 84228 / (190000 * 0.3584153)
        assert!((f_orig - 1.2369).abs() < 1e-3, "{f_orig}");
        assert!(efficiency_metrics(100, 50, 0, 0, 0.0).is_err());
    }

    #[test]
    fn efficiency_at_slepian_wolf_limit() {
        // h(0.11002786443835955) = 0.5, so a rate-1/2 code without adaptation has f = 1
        let (f_orig, f_code) =
            efficiency_metrics(1000, 500, 0, 0, 0.110_027_864_438_359_55).unwrap();
        assert!((f_orig - 1.0).abs() < 1e-9 && (f_code - 1.0).abs() < 1e-9);
    }

    #[test]
    fn secret_rate_examples() {
        assert_eq!(secret_rate(0.3, 0.3), 0.0);
        let r = secret_rate(1.0, binary_entropy(0.068).unwrap());
        assert!((r - 0.641_585).abs() < 1e-6);
        assert!(secret_rate(0.0, 0.2) < 0.0);
    }

    fn toeplitz_naive(input: &BitString, out_len: usize, seed: u64) -> BitString {
        let len = input.len();
        let r = Stream::new(seed).bits(len + out_len - 1);
        (0..out_len)
            .map(|i| {
                (0..len).fold(false, |acc, j| {
                    acc ^ (r.get(i + len - 1 - j) & input.get(j))
                })
            })
            .collect()
    }

    #[test]
    fn amplify_edge_cases() {
        let input = Stream::new(5).bits(300);
        assert!(amplify(&input, 0, 1).unwrap().is_empty());
        assert_eq!(
            amplify(&BitString::zeros(300), 120, 1)
                .unwrap()
                .count_ones(),
            0
        );
        assert!(matches!(amplify(&input, 301, 1), Err(Error::Budget { .. })));
        assert_eq!(
            amplify(&input, 120, 1).unwrap(),
            amplify(&input, 120, 1).unwrap()
        );
    }

    #[test]
    fn amplify_golden_output() {
        let input = BitString::parse("1011001110001111").unwrap();
        let out = amplify(&input, 8, 42).unwrap();
        assert_eq!(out, toeplitz_naive(&input, 8, 42));
        assert_eq!(out.to_string(), GOLDEN_AMPLIFY);
    }

    const GOLDEN_AMPLIFY: &str = "11101010";

    proptest! {
        #[test]
        fn amplify_matches_naive_product(seed in any::<u64>(), len in 1usize..300, frac in 0.0f64..=1.0) {
            let input = Stream::new(seed ^ 0xABCD).bits(len);
            let out_len = ((len as f64) * frac) as usize;
            prop_assert_eq!(amplify(&input, out_len, seed).unwrap(), toeplitz_naive(&input, out_len, seed));
        }

        #[test]
        fn min_entropy_below_shannon(weights in proptest::collection::vec(0.0f64..1.0, 1..64)) {
            prop_assume!(weights.iter().sum::<f64>() > 1e-6);
            let d = FiniteDistribution::from_weights(vec![weights.len()], &weights).unwrap();
            prop_assert!(min_entropy(&d) <= shannon_entropy(&d) + 1e-9);
        }

        #[test]
        fn bound_routes_agree(n in 2usize..100_000, kf in 0.01f64..0.99, sf in 0.0f64..1.0, pf in 0.0f64..1.0, h in 0i64..1_000_000, t in 0i64..200) {
            let k = ((n as f64 * kf) as usize).clamp(1, n - 1);
            let s = (k as f64 * sf) as usize;
            let p = ((n - s - 1) as f64 * pf) as usize;
            let (a, b) = bound_routes_exact(Ratio::from_integer(h as i128), n, k, s, p, Ratio::from_integer(t as i128)).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn code_efficiency_never_above_original(n in 10usize..100_000, kf in 0.05f64..0.95, sf in 0.0f64..1.0, pf in 0.0f64..1.0, p_err in 0.001f64..0.49) {
            let k = ((n as f64 * kf) as usize).clamp(1, n - 1);
            let s = (k as f64 * sf) as usize;
            let p = ((n - s - 1) as f64 * pf) as usize;
            let (f_orig, f_code) = efficiency_metrics(n, k, s, p, p_err).unwrap();
            prop_assert!(f_code <= f_orig * (1.0 + 1e-12));
        }
    }
}
