//! Sum-product decoding of a coset of the code: find the vector with a given
//! syndrome that best explains the side information.
//!
//! Check node `j` with syndrome bit `m_j` sends
//! `(1 - 2 m_j) · 2 atanh(∏ tanh(L_i / 2))` over its other edges. Sign and
//! magnitude are combined separately, so decoding `(ŷ ⊕ c, m ⊕ Hcᵀ)` yields
//! exactly `estimate ⊕ c`.

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::ldpc::ParityCheckCode;
use crate::rate_adapt::{ExtendedString, Role};

/// Saturation for all LLRs and messages, natural-log units.
pub const LLR_MAX: f64 = 64.0;
pub const DEFAULT_MAX_ITERATIONS: usize = 200;

/// Channel LLRs for Bob's extended string. Positive favours bit 0.
///
/// Payload positions get `±ln((1 - p_err) / p_err)`, punctured positions 0,
/// shortened positions `±LLR_MAX`.
pub fn init_llrs(yhat: &ExtendedString<'_>, p_err: f64) -> Result<Vec<f64>> {
    if !(p_err > 0.0 && p_err < 0.5) {
        return Err(Error::Domain(format!("p_err = {p_err} outside (0, 0.5)")));
    }
    let reliability = ((1.0 - p_err) / p_err).ln().min(LLR_MAX);
    let bits = yhat.bits();
    Ok(yhat
        .plan()
        .roles()
        .iter()
        .enumerate()
        .map(|(i, role)| {
            let sign = if bits.get(i) { -1.0 } else { 1.0 };
            match role {
                Role::Payload => sign * reliability,
                Role::Punctured => 0.0,
                Role::Shortened => sign * LLR_MAX,
            }
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct DecodeInput<'a> {
    pub code: &'a ParityCheckCode,
    pub target_syndrome: &'a BitString,
    pub channel_llr: &'a [f64],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub estimate: BitString,
    pub converged: bool,
    pub iterations_used: usize,
}

/// `syndrome(code, estimate) == target_syndrome`.
pub fn verify(
    code: &ParityCheckCode,
    estimate: &BitString,
    target_syndrome: &BitString,
) -> Result<bool> {
    target_syndrome.check_len(code.m_rows())?;
    Ok(&code.syndrome(estimate)? == target_syndrome)
}

#[inline]
fn hard(llr: f64) -> bool {
    // ties decide 0
    llr < 0.0
}

#[inline]
fn clamp(v: f64) -> f64 {
    v.clamp(-LLR_MAX, LLR_MAX)
}

/// `2 atanh(t)` for `t` in `[0, 1]`, saturating at `LLR_MAX`.
#[inline]
fn magnitude(t: f64) -> f64 {
    if t >= 1.0 {
        LLR_MAX
    } else {
        (((1.0 + t) / (1.0 - t)).ln()).min(LLR_MAX)
    }
}

/// Flooding sum-product decoder with syndrome-corrected check signs.
///
/// Positions with `|LLR| >= LLR_MAX` are pinned: their hard decision and
/// outgoing messages never change. The syndrome is tested before the first
/// iteration and after each one.
pub fn decode(input: &DecodeInput<'_>, max_iterations: usize) -> Result<DecodeResult> {
    let code = input.code;
    let (n, m) = (code.n(), code.m_rows());
    if input.channel_llr.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: input.channel_llr.len(),
        });
    }
    input.target_syndrome.check_len(m)?;

    let row_ptr = code.row_ptr();
    let edge_var = code.edge_var();
    let col_ptr = code.col_ptr();
    let col_edges = code.col_edges();
    let llr = input.channel_llr;
    let pinned: Vec<bool> = llr.iter().map(|l| l.abs() >= LLR_MAX).collect();

    let mut estimate: BitString = llr.iter().map(|&l| hard(l)).collect();
    if &code.syndrome(&estimate)? == input.target_syndrome {
        return Ok(DecodeResult {
            estimate,
            converged: true,
            iterations_used: 0,
        });
    }

    // variable-to-check messages, initialised with the channel values
    let mut v2c: Vec<f64> = edge_var.iter().map(|&v| clamp(llr[v])).collect();
    let mut c2v = vec![0.0; edge_var.len()];
    let mut prefix = Vec::new();

    for iter in 1..=max_iterations {
        for j in 0..m {
            let edges = row_ptr[j]..row_ptr[j + 1];
            let deg = edges.len();
            let mut sign_total = if input.target_syndrome.get(j) {
                -1.0
            } else {
                1.0
            };
            prefix.clear();
            // prefix[i] = product of tanh magnitudes of edges before i
            let mut acc = 1.0;
            for e in edges.clone() {
                let msg = v2c[e];
                if msg < 0.0 {
                    sign_total = -sign_total;
                }
                prefix.push(acc);
                acc *= (msg.abs() * 0.5).tanh();
            }
            let mut suffix = 1.0;
            for i in (0..deg).rev() {
                let e = row_ptr[j] + i;
                let msg = v2c[e];
                let own_sign = if msg < 0.0 { -1.0 } else { 1.0 };
                let mag = magnitude(prefix[i] * suffix);
                c2v[e] = sign_total * own_sign * mag;
                suffix *= (msg.abs() * 0.5).tanh();
            }
        }

        for v in 0..n {
            let edges = &col_edges[col_ptr[v]..col_ptr[v + 1]];
            if pinned[v] {
                for &e in edges {
                    v2c[e] = llr[v].signum() * LLR_MAX;
                }
                continue;
            }
            let total = llr[v] + edges.iter().map(|&e| c2v[e]).sum::<f64>();
            for &e in edges {
                v2c[e] = clamp(total - c2v[e]);
            }
            estimate.set(v, hard(total));
        }

        if &code.syndrome(&estimate)? == input.target_syndrome {
            return Ok(DecodeResult {
                estimate,
                converged: true,
                iterations_used: iter,
            });
        }
    }

    Ok(DecodeResult {
        estimate,
        converged: false,
        iterations_used: max_iterations,
    })
}
