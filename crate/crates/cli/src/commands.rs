use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use num_rational::Ratio;
use rayon::prelude::*;

use recon_core::cascade::cascade_reconcile;
use recon_core::channel::{
    calibrate_efficiency, estimate_fer, point_seed, point_streams, BscChannel, CalibrationOptions,
    CalibrationPoint,
};
use recon_core::ldpc::{self, LoadOptions};
use recon_core::prng::{mix, Stream};
use recon_core::rate_adapt::{select_sp, Shuffle, SpPlan};
use recon_core::security::{binary_entropy, bound_routes_exact, leakage_budget, transcript_bound};
use recon_core::Error;

use crate::config::{format_table, ExperimentConfig};

pub const CSV_HEADER: &str =
    "p_err,n,k,s,p,R,frames,frame_errors,fer,leak_bits,f_code,f_orig,key_bound_bits,seed,status";

/// Worker count from `RECON_THREADS`, falling back to the machine's parallelism.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var("RECON_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .context("RECON_THREADS must be a positive integer")?;
            if n == 0 {
                bail!("RECON_THREADS must be a positive integer");
            }
            Ok(n)
        }
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()?)
}

fn real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        "inf".into()
    }
}

#[derive(Debug, Default)]
struct Row {
    p_err: f64,
    n: Option<usize>,
    k: Option<usize>,
    s: Option<usize>,
    p: Option<usize>,
    rate: Option<f64>,
    frames: usize,
    frame_errors: Option<usize>,
    fer: Option<f64>,
    leak_bits: Option<String>,
    f_code: Option<f64>,
    f_orig: Option<f64>,
    key_bound: Option<f64>,
    seed: u64,
    status: &'static str,
}

impl Row {
    fn write(&self, out: &mut String) {
        let int = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let float = |v: Option<f64>| v.map(real).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            real(self.p_err),
            int(self.n),
            int(self.k),
            int(self.s),
            int(self.p),
            float(self.rate),
            self.frames,
            int(self.frame_errors),
            float(self.fer),
            self.leak_bits.clone().unwrap_or_default(),
            float(self.f_code),
            float(self.f_orig),
            float(self.key_bound),
            self.seed,
            self.status
        );
    }
}

/// Efficiency sweep of the sp-protocol; returns the CSV text.
///
/// Grid point `i` uses seed `mix(seed, i)` (the `seed` column), from which the
/// permutation seed and the frame master seed are derived.
pub fn cmd_sweep(cfg: &ExperimentConfig, threads: usize) -> Result<String> {
    let code = cfg.code()?;
    let source = cfg.f_eff.load()?;
    let pool = pool(threads)?;
    let mut out = String::new();
    let _ = writeln!(out, "{CSV_HEADER}");

    for (idx, &p_err) in cfg.grid.iter().enumerate() {
        let seed = point_seed(cfg.seed, idx);
        let (perm_seed, frame_seed) = point_streams(seed);
        let mut row = Row {
            p_err,
            n: Some(code.n()),
            k: Some(code.k()),
            frames: cfg.frames,
            seed,
            ..Default::default()
        };
        let Some(f_eff) = source.at(p_err) else {
            row.status = "unreachable";
            row.write(&mut out);
            continue;
        };
        let (s, p) = match select_sp(code.n(), code.k(), cfg.delta, p_err, f_eff) {
            Ok(sp) => sp,
            Err(Error::InfeasibleRate { .. }) => {
                row.status = "infeasible";
                row.write(&mut out);
                continue;
            }
            Err(e) => return Err(e).with_context(|| format!("planning p_err = {p_err}")),
        };
        let plan = SpPlan::build(&code, s, p, Shuffle::Seeded(perm_seed))?;
        let channel = BscChannel::new(p_err)?;
        let fer = pool.install(|| {
            estimate_fer(&code, &plan, &channel, cfg.frames, frame_seed, cfg.max_iter)
        })?;
        let payload = plan.payload_len();
        let h_min = cfg.h_min.unwrap_or(payload as f64);
        let budget = leakage_budget(h_min, payload, fer.rate, cfg.t)?;

        row.s = Some(s);
        row.p = Some(p);
        row.rate = Some(fer.rate);
        row.frame_errors = Some(fer.frame_errors);
        row.fer = Some(fer.fer);
        row.leak_bits = Some(fer.leak_bits.to_string());
        row.f_code = Some(fer.f_code);
        row.f_orig = Some(fer.f_orig);
        row.key_bound = Some(budget.key_bits_lower_bound);
        row.status = "ok";
        row.write(&mut out);
    }
    Ok(out)
}

pub fn calibration_options(cfg: &ExperimentConfig) -> CalibrationOptions {
    CalibrationOptions {
        fer_target: cfg.fer_target,
        frames: cfg.frames,
        master_seed: cfg.seed,
        ceiling: cfg.ceiling,
        max_iterations: cfg.max_iter,
    }
}

pub fn run_calibration(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<CalibrationPoint>> {
    let code = cfg.code()?;
    let opts = calibration_options(cfg);
    Ok(pool(threads)?.install(|| calibrate_efficiency(&code, cfg.delta, &cfg.grid, &opts))?)
}

/// Calibration table, one `p_err f` line per grid point (`inf` if unreachable).
pub fn cmd_calibrate(cfg: &ExperimentConfig, threads: usize) -> Result<String> {
    Ok(format_table(&run_calibration(cfg, threads)?))
}

/// Cascade over the grid with strings of `cfg.length` bits.
///
/// `leak_bits` is the mean number of disclosed parities per session and
/// `frame_errors` counts sessions that end with residual errors.
pub fn cmd_cascade(cfg: &ExperimentConfig, threads: usize) -> Result<String> {
    if cfg.length == 0 {
        bail!("length must be positive");
    }
    let pool = pool(threads)?;
    let mut out = String::new();
    let _ = writeln!(out, "{CSV_HEADER}");
    for (idx, &p_err) in cfg.grid.iter().enumerate() {
        let seed = point_seed(cfg.seed, idx);
        let (_, frame_seed) = point_streams(seed);
        let channel = BscChannel::new(p_err)?;
        let sessions = pool.install(|| {
            (0..cfg.frames)
                .into_par_iter()
                .map(|i| {
                    let fs = mix(frame_seed, i as u64);
                    let x = Stream::new(mix(fs, 0)).bits(cfg.length);
                    let y = channel.transmit(&x, mix(fs, 2));
                    let (fixed, leak) = cascade_reconcile(&x, &y, p_err, mix(fs, 1))?;
                    Ok((fixed != x, leak))
                })
                .collect::<recon_core::Result<Vec<_>>>()
        })?;
        let failures = sessions.iter().filter(|(bad, _)| *bad).count();
        let total_leak: usize = sessions.iter().map(|(_, l)| l).sum();
        let mean_leak = total_leak as f64 / cfg.frames as f64;
        let h = binary_entropy(p_err)?;
        let h_min = cfg.h_min.unwrap_or(cfg.length as f64);
        Row {
            p_err,
            n: Some(cfg.length),
            frames: cfg.frames,
            frame_errors: Some(failures),
            fer: Some(failures as f64 / cfg.frames as f64),
            leak_bits: Some(real(mean_leak)),
            f_orig: Some(mean_leak / (cfg.length as f64 * h)),
            key_bound: Some((h_min - mean_leak - cfg.t).max(0.0)),
            seed,
            status: "ok",
            ..Default::default()
        }
        .write(&mut out);
    }
    Ok(out)
}

/// Exact decimal such as `190000` or `12.75`.
pub fn parse_decimal(s: &str) -> Result<Ratio<i128>> {
    let s = s.trim();
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty()
        || !int.chars().all(|c| c.is_ascii_digit())
        || !frac.chars().all(|c| c.is_ascii_digit())
        || frac.len() > 18
    {
        bail!("expected a nonnegative decimal number, got {s:?}");
    }
    let scale = 10i128.pow(frac.len() as u32);
    let int: i128 = if int.is_empty() { 0 } else { int.parse()? };
    let frac: i128 = if frac.is_empty() { 0 } else { frac.parse()? };
    Ok(Ratio::new(int * scale + frac, scale))
}

fn show(r: &Ratio<i128>) -> String {
    let approx = *r.numer() as f64 / *r.denom() as f64;
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{r} (~{approx:.6})")
    }
}

/// Min-entropy budget for a plan.
pub fn cmd_keybudget(
    h_min: &str,
    n: usize,
    k: usize,
    s: usize,
    p: usize,
    t: &str,
) -> Result<String> {
    let h = parse_decimal(h_min).context("h_min")?;
    let t_exact = parse_decimal(t).context("t")?;
    let (via_transcript, via_rate) = bound_routes_exact(h, n, k, s, p, t_exact)?;
    let rate = recon_core::rate_adapt::adapted_rate(n, k, s, p)?;
    let rate_f = *rate.numer() as f64 / *rate.denom() as f64;
    let to_f = |r: &Ratio<i128>| *r.numer() as f64 / *r.denom() as f64;
    let payload = n - s - p;
    let budget = leakage_budget(to_f(&h), payload, rate_f, to_f(&t_exact))?;
    let tx_bound = transcript_bound(to_f(&h), n, k, s, p, to_f(&t_exact));

    let mut out = String::new();
    let _ = writeln!(out, "h_min_prior: {}", show(&h));
    let _ = writeln!(out, "payload_len: {payload}");
    let _ = writeln!(out, "adapted_rate: {rate} (~{rate_f:.6})");
    let _ = writeln!(out, "security_t: {}", show(&t_exact));
    let _ = writeln!(out, "transcript_bits: {}", s + n - k);
    let _ = writeln!(out, "extension_bits: {}", s + p);
    let _ = writeln!(out, "leak_formula_bits: {:.6}", budget.leak_formula_bits);
    let _ = writeln!(out, "bound_via_rate: {}", show(&via_rate));
    let _ = writeln!(out, "bound_via_transcript: {}", show(&via_transcript));
    let _ = writeln!(out, "routes_agree: {}", via_rate == via_transcript);
    let _ = writeln!(out, "transcript_bound_bits: {tx_bound:.6}");
    let _ = writeln!(
        out,
        "key_bits_lower_bound: {:.6}",
        budget.key_bits_lower_bound
    );
    Ok(out)
}

pub fn cmd_alist_check(path: &Path, check_rank: bool) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let code = ldpc::load_alist_with(&bytes, LoadOptions { check_rank })?;
    let mut out = String::new();
    let _ = writeln!(out, "n: {}", code.n());
    let _ = writeln!(out, "m_rows: {}", code.m_rows());
    let _ = writeln!(out, "k: {}", code.k());
    let _ = writeln!(out, "base_rate: {:.6}", code.base_rate());
    let _ = writeln!(out, "edges: {}", code.edge_count());
    let _ = writeln!(out, "max_col_degree: {}", code.max_col_degree());
    let _ = writeln!(out, "max_row_degree: {}", code.max_row_degree());
    let _ = writeln!(out, "rank_checked: {check_rank}");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals() {
        assert_eq!(
            parse_decimal("190000").unwrap(),
            Ratio::from_integer(190_000)
        );
        assert_eq!(parse_decimal("12.75").unwrap(), Ratio::new(51, 4));
        assert_eq!(parse_decimal(".5").unwrap(), Ratio::new(1, 2));
        assert!(parse_decimal("-1").is_err());
        assert!(parse_decimal("1e3").is_err());
        assert!(parse_decimal(".").is_err());
    }

    #[test]
    fn keybudget_report() {
        let report = cmd_keybudget("190000", 200_000, 120_000, 4228, 5772, "80").unwrap();
        assert!(report.contains("transcript_bits: 84228"));
        assert!(report.contains("bound_via_rate: 115692\n"));
        assert!(report.contains("routes_agree: true"));

        // R = 1: nothing leaks beyond t = 0
        let report = cmd_keybudget("100", 200, 100, 0, 100, "0").unwrap();
        assert!(report.contains("key_bits_lower_bound: 100.000000"));
        assert!(cmd_keybudget("100", 10, 5, 5, 5, "0").is_err());
    }

    #[test]
    fn reals_have_six_decimals() {
        assert_eq!(real(0.5), "0.500000");
        assert_eq!(real(f64::INFINITY), "inf");
    }
}
