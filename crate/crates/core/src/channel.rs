//! Binary symmetric channel simulation, frame-error-rate estimation and the
//! empirical efficiency calibration used to pick `(s, p)`.
//!
//! Seeds: frame `i` of a run with master seed `M` uses `mix(M, i)`. Inside a
//! frame, sub-stream 0 draws `x`, 1 Alice's random symbols, 2 the channel
//! noise and 3 Bob's punctured symbols.

use rayon::prelude::*;

use crate::bits::BitString;
use crate::decoder::{decode, init_llrs, DecodeInput};
use crate::error::{Error, Result};
use crate::ldpc::ParityCheckCode;
use crate::prng::{mix, Stream};
use crate::rate_adapt::{alice_extend, bob_extend, make_transcript, select_sp, Shuffle, SpPlan};
use crate::security::efficiency_metrics;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BscChannel {
    p_err: f64,
}

impl BscChannel {
    pub fn new(p_err: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_err) {
            return Err(Error::Domain(format!(
                "crossover probability {p_err} outside [0, 1]"
            )));
        }
        Ok(Self { p_err })
    }

    pub fn p_err(&self) -> f64 {
        self.p_err
    }

    /// Flips each bit independently with probability `p_err`.
    pub fn transmit(&self, x: &BitString, seed: u64) -> BitString {
        let mut rng = Stream::new(seed);
        let mut y = x.clone();
        for i in 0..x.len() {
            if rng.unit_f64() < self.p_err {
                y.flip(i);
            }
        }
        y
    }

    // The decoder needs a belief strictly inside (0, 1/2).
    fn decoder_belief(&self) -> f64 {
        self.p_err.clamp(1e-12, 0.5 - 1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameOutcome {
    pub success: bool,
    pub leak_bits: usize,
    pub iterations: usize,
}

/// One full protocol run: Alice draws `x`, both parties extend, the payload
/// crosses the channel and Bob decodes. Success means Bob recovered `x̂` exactly.
pub fn run_frame(
    code: &ParityCheckCode,
    plan: &SpPlan,
    channel: &BscChannel,
    frame_seed: u64,
    max_iterations: usize,
) -> Result<FrameOutcome> {
    if plan.n() != code.n() || plan.k() != code.k() {
        return Err(Error::Plan(
            "plan does not match the code dimensions".into(),
        ));
    }
    let x = Stream::new(mix(frame_seed, 0)).bits(plan.payload_len());
    let (xhat, r_s) = alice_extend(plan, &x, mix(frame_seed, 1))?;
    let transcript = make_transcript(code, &xhat, &r_s)?;
    let y = channel.transmit(&x, mix(frame_seed, 2));
    let yhat = bob_extend(plan, &y, &transcript.shortened_values, mix(frame_seed, 3))?;
    let llr = init_llrs(&yhat, channel.decoder_belief())?;
    let result = decode(
        &DecodeInput {
            code,
            target_syndrome: &transcript.syndrome,
            channel_llr: &llr,
        },
        max_iterations,
    )?;
    Ok(FrameOutcome {
        success: &result.estimate == xhat.bits(),
        leak_bits: transcript.total_bits(),
        iterations: result.iterations_used,
    })
}

/// One point of an efficiency curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub p_err: f64,
    pub n: usize,
    pub k: usize,
    pub s: usize,
    pub p: usize,
    pub rate: f64,
    pub frames: usize,
    pub frame_errors: usize,
    pub fer: f64,
    pub leak_bits: usize,
    pub f_code: f64,
    pub f_orig: f64,
    pub master_seed: u64,
}

/// Runs `frames` independent frames in the current rayon pool.
///
/// Frame seeds depend only on `master_seed` and the frame index, so the
/// result does not depend on the number of worker threads.
pub fn estimate_fer(
    code: &ParityCheckCode,
    plan: &SpPlan,
    channel: &BscChannel,
    frames: usize,
    master_seed: u64,
    max_iterations: usize,
) -> Result<SweepRow> {
    if frames == 0 {
        return Err(Error::Domain("at least one frame is required".into()));
    }
    let outcomes = (0..frames)
        .into_par_iter()
        .map(|i| {
            run_frame(
                code,
                plan,
                channel,
                mix(master_seed, i as u64),
                max_iterations,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let frame_errors = outcomes.iter().filter(|o| !o.success).count();
    let leak_bits = plan.leak_bits();
    debug_assert!(outcomes.iter().all(|o| o.leak_bits == leak_bits));

    let rate = plan.adapted_rate()?;
    let (f_orig, f_code) = if channel.p_err > 0.0 && channel.p_err < 1.0 {
        efficiency_metrics(plan.n(), plan.k(), plan.s(), plan.p(), channel.p_err)?
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    Ok(SweepRow {
        p_err: channel.p_err,
        n: plan.n(),
        k: plan.k(),
        s: plan.s(),
        p: plan.p(),
        rate: *rate.numer() as f64 / *rate.denom() as f64,
        frames,
        frame_errors,
        fer: frame_errors as f64 / frames as f64,
        leak_bits,
        f_code,
        f_orig,
        master_seed,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct CalibrationOptions {
    pub fer_target: f64,
    pub frames: usize,
    pub master_seed: u64,
    /// Largest efficiency tried; points that need more are unreachable.
    pub ceiling: f64,
    pub max_iterations: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            fer_target: 0.05,
            frames: 100,
            master_seed: 0,
            ceiling: 3.0,
            max_iterations: crate::decoder::DEFAULT_MAX_ITERATIONS,
        }
    }
}

/// Calibrated efficiency at one crossover probability; `None` when unreachable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationPoint {
    pub p_err: f64,
    pub f_eff: Option<f64>,
}

/// Seed of grid point `index` in a run with `master_seed`.
pub fn point_seed(master_seed: u64, index: usize) -> u64 {
    mix(master_seed, index as u64)
}

/// `(permutation seed, frame master seed)` derived from a grid point's seed.
pub fn point_streams(point_seed: u64) -> (u64, u64) {
    (mix(point_seed, 100), mix(point_seed, 200))
}

/// Plan-selection characterisation: for each `p_err`, the smallest efficiency (in
/// steps of 0.01) whose `select_sp` plan reaches `fer <= fer_target`.
///
/// Efficiencies large enough to need more than `round(delta n)` shortened
/// symbols are never tried. All candidates at a grid point share the same
/// frame seeds.
pub fn calibrate_efficiency(
    code: &ParityCheckCode,
    delta: f64,
    grid: &[f64],
    opts: &CalibrationOptions,
) -> Result<Vec<CalibrationPoint>> {
    check_options(opts)?;
    if let Some(p) = grid.iter().find(|p| !(**p > 0.0 && **p < 0.5)) {
        return Err(Error::Domain(format!("grid point {p} outside (0, 0.5)")));
    }
    grid.iter()
        .enumerate()
        .map(|(idx, &p_err)| {
            let f_eff =
                calibrate_point(code, delta, p_err, point_seed(opts.master_seed, idx), opts)?;
            Ok(CalibrationPoint { p_err, f_eff })
        })
        .collect()
}

fn check_options(opts: &CalibrationOptions) -> Result<()> {
    if !(opts.fer_target > 0.0 && opts.fer_target < 1.0) {
        return Err(Error::Domain(format!(
            "fer target {} outside (0, 1)",
            opts.fer_target
        )));
    }
    if !(opts.ceiling >= 1.0) {
        return Err(Error::Domain(format!(
            "efficiency ceiling {} below 1",
            opts.ceiling
        )));
    }
    if opts.frames == 0 {
        return Err(Error::Domain("at least one frame is required".into()));
    }
    Ok(())
}

/// Calibrates a single crossover probability with the streams of `point_seed`.
pub fn calibrate_point(
    code: &ParityCheckCode,
    delta: f64,
    p_err: f64,
    point_seed: u64,
    opts: &CalibrationOptions,
) -> Result<Option<f64>> {
    check_options(opts)?;
    if !(p_err > 0.0 && p_err < 0.5) {
        return Err(Error::Domain(format!(
            "grid point {p_err} outside (0, 0.5)"
        )));
    }
    let (n, k) = (code.n(), code.k());
    let top = (opts.ceiling * 100.0 + 1e-9).floor() as u32;
    let channel = BscChannel::new(p_err)?;
    let (perm_seed, frame_seed) = point_streams(point_seed);
    let plan_for = |hundredths: u32| -> Result<Option<SpPlan>> {
        match select_sp(n, k, delta, p_err, hundredths as f64 / 100.0) {
            Ok((s, p)) => SpPlan::build(code, s, p, Shuffle::Seeded(perm_seed)).map(Some),
            Err(Error::InfeasibleRate { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let passes = |plan: &SpPlan| -> Result<bool> {
        let row = estimate_fer(
            code,
            plan,
            &channel,
            opts.frames,
            frame_seed,
            opts.max_iterations,
        )?;
        Ok(row.fer <= opts.fer_target)
    };

    // largest feasible candidate
    let mut top_plan = None;
    for c in (100..=top).rev() {
        if let Some(plan) = plan_for(c)? {
            top_plan = Some((c, plan));
            break;
        }
    }
    let Some((mut hi, hi_plan)) = top_plan else {
        return Ok(None);
    };
    if !passes(&hi_plan)? {
        return Ok(None);
    }
    let lo_plan = plan_for(100)?.expect("feasible at the top implies feasible at 1.00");
    if passes(&lo_plan)? {
        return Ok(Some(1.0));
    }
    let mut lo = 100;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let plan = plan_for(mid)?.expect("feasibility is monotone in f");
        if passes(&plan)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi as f64 / 100.0))
}

/// Efficiency curve used by plan selection: a constant or a calibrated table.
#[derive(Debug, Clone, PartialEq)]
pub enum EfficiencySource {
    Constant(f64),
    Table(Vec<CalibrationPoint>),
}

impl EfficiencySource {
    /// Efficiency at `p_err`. Tables interpolate linearly between grid points
    /// and hold the end values outside them; `None` if a neighbouring point is
    /// unreachable.
    pub fn at(&self, p_err: f64) -> Option<f64> {
        match self {
            EfficiencySource::Constant(f) => Some(*f),
            EfficiencySource::Table(points) => {
                let first = points.first()?;
                let last = points.last()?;
                if p_err <= first.p_err {
                    return first.f_eff;
                }
                if p_err >= last.p_err {
                    return last.f_eff;
                }
                let i = points.iter().position(|pt| pt.p_err >= p_err)?;
                let (a, b) = (points[i - 1], points[i]);
                if b.p_err == p_err {
                    return b.f_eff;
                }
                let (fa, fb) = (a.f_eff?, b.f_eff?);
                let w = (p_err - a.p_err) / (b.p_err - a.p_err);
                Some(fa + w * (fb - fa))
            }
        }
    }
}

/// `(1 - R0) / h(p_err)`: efficiency of the code used as is.
pub fn fixed_code_efficiency(code: &ParityCheckCode, p_err: f64) -> Result<f64> {
    let (_, f_code) = efficiency_metrics(code.n(), code.k(), 0, 0, p_err)?;
    Ok(f_code)
}
