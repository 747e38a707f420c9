//! The sp-protocol: choose how many symbols to shorten and puncture, build the
//! shared extended-string layout, and assemble both parties' extended strings
//! and Alice's public transcript.
//!
//! Before permutation an extended string is laid out as
//! `payload | punctured | shortened`, i.e. `x | r_A(p) | r_A(s)` on Alice's
//! side and `y | r_B(p) | r_A(s)` on Bob's. Extended position `j` then holds
//! layout element `perm[j]`.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::ldpc::ParityCheckCode;
use crate::prng::Stream;
use crate::security::binary_entropy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Payload,
    Punctured,
    Shortened,
}

/// How the public permutation `g` is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shuffle {
    /// `g` is the identity; the extended string is the raw layout.
    Identity,
    /// Fisher–Yates over `0..n` driven by [`Stream::new`] with this seed.
    Seeded(u64),
}

impl fmt::Display for Shuffle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shuffle::Identity => f.write_str("identity"),
            Shuffle::Seeded(s) => write!(f, "{s}"),
        }
    }
}

impl FromStr for Shuffle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "identity" {
            return Ok(Shuffle::Identity);
        }
        s.parse()
            .map(Shuffle::Seeded)
            .map_err(|_| Error::Plan(format!("bad permutation seed {s:?}")))
    }
}

/// Number of symbols to shorten or puncture for a budget fraction `delta`,
/// rounded to nearest with ties up.
pub fn adaptation_budget(n: usize, delta: f64) -> usize {
    (delta * n as f64 + 0.5).floor() as usize
}

/// Plan selection: the smallest `s` (with `p = d - s`) whose adapted rate does not
/// exceed `1 - f_eff * h(p_err)`.
pub fn select_sp(n: usize, k: usize, delta: f64, p_err: f64, f_eff: f64) -> Result<(usize, usize)> {
    if !(p_err > 0.0 && p_err < 0.5) {
        return Err(Error::Domain(format!("p_err = {p_err} outside (0, 0.5)")));
    }
    if !(f_eff >= 1.0) {
        return Err(Error::Domain(format!("efficiency {f_eff} below 1")));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Domain(format!("delta = {delta} outside [0, 1]")));
    }
    if k == 0 || k >= n {
        return Err(Error::Domain(format!(
            "need 0 < k < n, got n = {n}, k = {k}"
        )));
    }
    let d = adaptation_budget(n, delta);
    if d > k {
        return Err(Error::Plan(format!(
            "budget round(delta * n) = {d} exceeds k = {k}"
        )));
    }
    let target = 1.0 - f_eff * binary_entropy(p_err)?;
    if target >= 1.0 {
        return Err(Error::DegenerateTarget(target));
    }
    let needed = (k as f64 - target * (n - d) as f64).ceil().max(0.0);
    if needed > d as f64 {
        return Err(Error::InfeasibleRate {
            target,
            needed: needed as u64,
            budget: d as u64,
        });
    }
    let s = needed as usize;
    Ok((s, d - s))
}

/// Rate `(k - s) / (n - s - p)` of the code after shortening `s` and puncturing `p` symbols.
pub fn adapted_rate(n: usize, k: usize, s: usize, p: usize) -> Result<Ratio<u64>> {
    check_sp(n, k, s, p)?;
    if n == s + p {
        return Err(Error::DegenerateLength);
    }
    Ok(Ratio::new((k - s) as u64, (n - s - p) as u64))
}

fn check_sp(n: usize, k: usize, s: usize, p: usize) -> Result<()> {
    if s > k || p > n || s + p > n {
        return Err(Error::Plan(format!(
            "need 0 <= s <= k, 0 <= p <= n, s + p <= n; got n = {n}, k = {k}, s = {s}, p = {p}"
        )));
    }
    Ok(())
}

/// Agreed rate-adaptation parameters and the resulting position layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpPlan {
    n: usize,
    k: usize,
    s: usize,
    p: usize,
    shuffle: Shuffle,
    roles: Vec<Role>,
    // Index of each position within its own role class.
    slots: Vec<usize>,
    payload: Vec<usize>,
    punctured: Vec<usize>,
    shortened: Vec<usize>,
}

impl SpPlan {
    pub fn build(code: &ParityCheckCode, s: usize, p: usize, shuffle: Shuffle) -> Result<Self> {
        Self::for_dimensions(code.n(), code.k(), s, p, shuffle)
    }

    pub fn for_dimensions(
        n: usize,
        k: usize,
        s: usize,
        p: usize,
        shuffle: Shuffle,
    ) -> Result<Self> {
        check_sp(n, k, s, p)?;
        let perm = match shuffle {
            Shuffle::Identity => (0..n).collect(),
            Shuffle::Seeded(seed) => Stream::new(seed).permutation(n),
        };
        let payload_len = n - s - p;
        let mut roles = Vec::with_capacity(n);
        let mut slots = Vec::with_capacity(n);
        let mut payload = vec![0; payload_len];
        let mut punctured = vec![0; p];
        let mut shortened = vec![0; s];
        for (pos, &layout) in perm.iter().enumerate() {
            let (role, slot) = if layout < payload_len {
                payload[layout] = pos;
                (Role::Payload, layout)
            } else if layout < payload_len + p {
                punctured[layout - payload_len] = pos;
                (Role::Punctured, layout - payload_len)
            } else {
                shortened[layout - payload_len - p] = pos;
                (Role::Shortened, layout - payload_len - p)
            };
            roles.push(role);
            slots.push(slot);
        }
        Ok(Self {
            n,
            k,
            s,
            p,
            shuffle,
            roles,
            slots,
            payload,
            punctured,
            shortened,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn shuffle(&self) -> Shuffle {
        self.shuffle
    }

    pub fn payload_len(&self) -> usize {
        self.n - self.s - self.p
    }

    pub fn delta(&self) -> f64 {
        (self.s + self.p) as f64 / self.n as f64
    }

    pub fn sigma(&self) -> f64 {
        self.s as f64 / self.n as f64
    }

    pub fn pi(&self) -> f64 {
        self.p as f64 / self.n as f64
    }

    pub fn adapted_rate(&self) -> Result<Ratio<u64>> {
        adapted_rate(self.n, self.k, self.s, self.p)
    }

    /// Public bits Alice sends: `s + n - k`.
    pub fn leak_bits(&self) -> usize {
        self.s + self.n - self.k
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    /// Role of extended position `pos` and its index within that role's segment.
    pub fn role_of(&self, pos: usize) -> (Role, usize) {
        (self.roles[pos], self.slots[pos])
    }

    pub fn payload_positions(&self) -> &[usize] {
        &self.payload
    }

    pub fn punctured_positions(&self) -> &[usize] {
        &self.punctured
    }

    pub fn shortened_positions(&self) -> &[usize] {
        &self.shortened
    }

    fn assemble(&self, payload: &BitString, punct: &BitString, short: &BitString) -> BitString {
        let mut out = BitString::zeros(self.n);
        for (segment, positions) in [
            (payload, &self.payload),
            (punct, &self.punctured),
            (short, &self.shortened),
        ] {
            for (i, &pos) in positions.iter().enumerate() {
                if segment.get(i) {
                    out.set(pos, true);
                }
            }
        }
        out
    }
}

/// An `n`-bit extended string together with the plan that placed its symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedString<'a> {
    bits: BitString,
    plan: &'a SpPlan,
}

impl<'a> ExtendedString<'a> {
    pub fn bits(&self) -> &BitString {
        &self.bits
    }

    pub fn into_bits(self) -> BitString {
        self.bits
    }

    pub fn plan(&self) -> &'a SpPlan {
        self.plan
    }

    pub fn role_of(&self, pos: usize) -> (Role, usize) {
        self.plan.role_of(pos)
    }

    fn gather(&self, positions: &[usize]) -> BitString {
        positions.iter().map(|&i| self.bits.get(i)).collect()
    }

    /// The original string, read back from payload positions in order.
    pub fn payload(&self) -> BitString {
        self.gather(&self.plan.payload)
    }

    pub fn punctured(&self) -> BitString {
        self.gather(&self.plan.punctured)
    }

    pub fn shortened(&self) -> BitString {
        self.gather(&self.plan.shortened)
    }
}

/// Step 1 with explicit random segments: `x̂ = g(x | r_p | r_s)`.
pub fn alice_extend_with<'a>(
    plan: &'a SpPlan,
    x: &BitString,
    r_p: &BitString,
    r_s: &BitString,
) -> Result<ExtendedString<'a>> {
    x.check_len(plan.payload_len())?;
    r_p.check_len(plan.p)?;
    r_s.check_len(plan.s)?;
    Ok(ExtendedString {
        bits: plan.assemble(x, r_p, r_s),
        plan,
    })
}

/// Step 1: extends `x` with `p` then `s` uniform bits drawn from `rng_seed`.
/// Returns the extended string and the shortened values `r_A(s)`.
pub fn alice_extend<'a>(
    plan: &'a SpPlan,
    x: &BitString,
    rng_seed: u64,
) -> Result<(ExtendedString<'a>, BitString)> {
    x.check_len(plan.payload_len())?;
    let mut rng = Stream::new(rng_seed);
    let r_p = rng.bits(plan.p);
    let r_s = rng.bits(plan.s);
    let xhat = alice_extend_with(plan, x, &r_p, &r_s)?;
    Ok((xhat, r_s))
}

/// Step 2 setup: `ŷ = g(y | r_B(p) | r_A(s))` with Bob's own `r_B(p)` from `rng_seed`.
pub fn bob_extend<'a>(
    plan: &'a SpPlan,
    y: &BitString,
    shortened_values: &BitString,
    rng_seed: u64,
) -> Result<ExtendedString<'a>> {
    y.check_len(plan.payload_len())?;
    shortened_values.check_len(plan.s)?;
    let r_p = Stream::new(rng_seed).bits(plan.p);
    Ok(ExtendedString {
        bits: plan.assemble(y, &r_p, shortened_values),
        plan,
    })
}

/// Alice's public message: the syndrome of `x̂` and the shortened values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub syndrome: BitString,
    pub shortened_values: BitString,
}

impl Transcript {
    /// `|C| = s + n - k`.
    pub fn total_bits(&self) -> usize {
        self.syndrome.len() + self.shortened_values.len()
    }
}

pub fn make_transcript(
    code: &ParityCheckCode,
    xhat: &ExtendedString<'_>,
    r_a_s: &BitString,
) -> Result<Transcript> {
    r_a_s.check_len(xhat.plan.s)?;
    Ok(Transcript {
        syndrome: code.syndrome(&xhat.bits)?,
        shortened_values: r_a_s.clone(),
    })
}

/// Flat text record from which Bob rebuilds the plan bit-exactly:
/// `sp-plan n=<n> k=<k> s=<s> p=<p> permutation=<seed|identity> code=<id>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanRecord {
    pub n: usize,
    pub k: usize,
    pub s: usize,
    pub p: usize,
    pub shuffle: Shuffle,
    pub code_id: String,
}

impl PlanRecord {
    pub fn new(plan: &SpPlan, code_id: &str) -> Result<Self> {
        if code_id.is_empty() || code_id.contains(char::is_whitespace) {
            return Err(Error::Plan(format!(
                "code identifier {code_id:?} must be a non-empty token"
            )));
        }
        Ok(Self {
            n: plan.n,
            k: plan.k,
            s: plan.s,
            p: plan.p,
            shuffle: plan.shuffle,
            code_id: code_id.to_owned(),
        })
    }

    pub fn to_plan(&self, code: &ParityCheckCode) -> Result<SpPlan> {
        if code.n() != self.n || code.k() != self.k {
            return Err(Error::Plan(format!(
                "record is for a ({}, {}) code, got ({}, {})",
                self.n,
                self.k,
                code.n(),
                code.k()
            )));
        }
        SpPlan::build(code, self.s, self.p, self.shuffle)
    }
}

impl fmt::Display for PlanRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "sp-plan n={} k={} s={} p={} permutation={} code={}",
            self.n, self.k, self.s, self.p, self.shuffle, self.code_id
        )
    }
}

impl FromStr for PlanRecord {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let mut tokens = line.split_whitespace();
        if tokens.next() != Some("sp-plan") {
            return Err(Error::Plan("record must start with \"sp-plan\"".into()));
        }
        let mut fields = std::collections::HashMap::new();
        for t in tokens {
            let (key, value) = t
                .split_once('=')
                .ok_or_else(|| Error::Plan(format!("malformed field {t:?}")))?;
            if fields.insert(key, value).is_some() {
                return Err(Error::Plan(format!("duplicate field {key:?}")));
            }
        }
        let get = |key: &str| {
            fields
                .get(key)
                .copied()
                .ok_or_else(|| Error::Plan(format!("missing field {key:?}")))
        };
        let num = |key: &str| -> Result<usize> {
            get(key)?
                .parse()
                .map_err(|_| Error::Plan(format!("field {key:?} is not a count")))
        };
        Ok(Self {
            n: num("n")?,
            k: num("k")?,
            s: num("s")?,
            p: num("p")?,
            shuffle: get("permutation")?.parse()?,
            code_id: get("code")?.to_owned(),
        })
    }
}
