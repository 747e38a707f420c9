//! Min-entropy identities checked against direct enumeration.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use recon_core::prng::Stream;
use recon_core::rate_adapt::adapted_rate;
use recon_core::security::{check_lemma1, min_entropy, shannon_entropy, FiniteDistribution};

fn random_weights(rng: &mut Stream, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.unit_f64() + 1e-3).collect()
}

/// Joint over (X, Y, Z) built as P(x, z) P(y), with the right-hand side
/// computed from the factors alone.
fn product_joint(rng: &mut Stream) -> (FiniteDistribution, f64) {
    let nx = 1 + rng.below(8) as usize;
    let ny = 1 + rng.below(8) as usize;
    let nz = 1 + rng.below(8) as usize;
    let mut wxz = random_weights(rng, nx * nz);
    // occasionally make X a function of Z
    if rng.below(4) == 0 {
        for x in 0..nx {
            for z in 0..nz {
                if x != z % nx {
                    wxz[x * nz + z] = 0.0;
                }
            }
        }
    }
    let sxz: f64 = wxz.iter().sum();
    let pxz: Vec<f64> = wxz.iter().map(|w| w / sxz).collect();
    let wy = random_weights(rng, ny);
    let sy: f64 = wy.iter().sum();
    let py: Vec<f64> = wy.iter().map(|w| w / sy).collect();

    let mut joint = vec![0.0; nx * ny * nz];
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nz {
                joint[(x * ny + y) * nz + z] = pxz[x * nz + z] * py[y];
            }
        }
    }

    // min over z of -log max_x P(x|z), plus -log max_y P(y)
    let mut worst = f64::INFINITY;
    for z in 0..nz {
        let pz: f64 = (0..nx).map(|x| pxz[x * nz + z]).sum();
        if pz == 0.0 {
            continue;
        }
        let best = (0..nx).map(|x| pxz[x * nz + z] / pz).fold(0.0, f64::max);
        worst = worst.min(-best.log2());
    }
    let hy = -py.iter().copied().fold(0.0, f64::max).log2();
    (
        FiniteDistribution::joint(vec![nx, ny, nz], joint).unwrap(),
        worst + hy,
    )
}

#[test]
fn additivity_matches_factor_oracle() {
    let mut rng = Stream::new(1);
    for _ in 0..1000 {
        let (joint, oracle) = product_joint(&mut rng);
        let (lhs, rhs) = check_lemma1(&joint).unwrap();
        assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
        assert!((rhs - oracle).abs() < 1e-9, "{rhs} vs oracle {oracle}");
    }
}

#[test]
fn min_entropy_never_exceeds_shannon() {
    let mut rng = Stream::new(2);
    for _ in 0..1000 {
        let len = 1 + rng.below(64) as usize;
        let uniform = rng.below(5) == 0;
        let weights = if uniform {
            vec![1.0; len]
        } else {
            random_weights(&mut rng, len)
        };
        let d = FiniteDistribution::from_weights(vec![len], &weights).unwrap();
        let (hmin, h) = (min_entropy(&d), shannon_entropy(&d));
        assert!(hmin <= h + 1e-9);
        if uniform {
            assert!((h - hmin).abs() < 1e-9);
        } else if weights.iter().any(|w| (w - weights[0]).abs() > 1e-6) {
            assert!(h - hmin > 1e-9);
        }
    }
}

#[test]
fn adapted_rate_matches_big_integer_cross_multiplication() {
    let mut rng = Stream::new(3);
    for _ in 0..1000 {
        let n = 2 + rng.below(1 << 20) as usize;
        let k = 1 + rng.below(n as u64 - 1) as usize;
        let s = rng.below(k as u64 + 1) as usize;
        let p = rng.below((n - s) as u64) as usize;
        let r: Ratio<u64> = adapted_rate(n, k, s, p).unwrap();
        let lhs = BigInt::from(*r.numer()) * BigInt::from(n - s - p);
        let rhs = BigInt::from(*r.denom()) * BigInt::from(k - s);
        assert_eq!(lhs, rhs);
        let big = BigRational::new(BigInt::from(k - s), BigInt::from(n - s - p));
        assert_eq!(big.numer(), &BigInt::from(*r.numer()));
        assert_eq!(big.denom(), &BigInt::from(*r.denom()));
    }
}
