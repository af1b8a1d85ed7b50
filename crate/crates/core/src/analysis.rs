//! From counts to `r_Ω`: effective polarizations, per-depth means, the
//! exponential fit and its bootstrap uncertainty.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{derive_rng, domain};
use crate::sim::{hamming_histogram, HammingHistogram, ShotResult};

pub const REPORT_SCHEMA: &str = "mrb-report/1";

/// Depths whose mean polarization exceeds this seed the log-linear start.
const SEED_THRESHOLD: f64 = 0.02;
const A_MAX: f64 = 1.05;
/// Inverse-variance weights need this many circuits per depth.
const MIN_K_FOR_WEIGHTS: usize = 5;

/// `S = 4^n/(4^n − 1) · Σ_k (−1/2)^k h_k − 1/(4^n − 1)`.
pub fn effective_polarization(h: &HammingHistogram) -> f64 {
    let d2 = 4f64.powi(h.n as i32);
    let mut sign = 1.0;
    let mut big_h = 0.0;
    for &hk in &h.h {
        big_h += sign * hk;
        sign *= -0.5;
    }
    (d2 * big_h - 1.0) / (d2 - 1.0)
}

/// `Σ_k (−1/2)^k h_k`.
pub fn recover_p0(h: &[f64]) -> f64 {
    let mut sign = 1.0;
    let mut out = 0.0;
    for &hk in h {
        out += sign * hk;
        sign *= -0.5;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizationPoint {
    pub id: String,
    pub d: usize,
    pub s: f64,
}

/// One polarization per circuit record, each from that circuit's own shots.
pub fn polarization_points(records: &[ShotResult]) -> Result<Vec<PolarizationPoint>> {
    records
        .iter()
        .map(|r| {
            r.validate()?;
            let h = hamming_histogram(r, &r.target)?;
            Ok(PolarizationPoint { id: r.id.clone(), d: r.d, s: effective_polarization(&h) })
        })
        .collect()
}

/// Mean polarization at one depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthMean {
    pub d: usize,
    pub mean: f64,
    /// Standard error of the mean over circuits; 0 for a single circuit.
    pub stderr: f64,
    pub count: usize,
}

fn mean_of(d: usize, s: &[f64]) -> DepthMean {
    let k = s.len() as f64;
    let mean = s.iter().sum::<f64>() / k;
    let stderr = if s.len() > 1 {
        (s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
    } else {
        0.0
    };
    DepthMean { d, mean, stderr, count: s.len() }
}

pub fn mean_polarization(points: &[PolarizationPoint], d: usize) -> Result<DepthMean> {
    let s: Vec<f64> = points.iter().filter(|p| p.d == d).map(|p| p.s).collect();
    if s.is_empty() {
        return Err(Error::InvalidArgument(format!("no circuits at depth {d}")));
    }
    Ok(mean_of(d, &s))
}

/// Per-depth means in ascending depth order.
pub fn depth_means(points: &[PolarizationPoint]) -> Vec<DepthMean> {
    let mut by: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for p in points {
        by.entry(p.d).or_default().push(p.s);
    }
    by.into_iter().map(|(d, s)| mean_of(d, &s)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Value `S̄_d` decays towards. 0 for randomized targets.
    pub asymptote: f64,
    /// Use inverse-variance weights when every depth has enough circuits.
    pub weighted: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { asymptote: 0.0, weighted: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bootstrap {
    pub sigma_a: f64,
    pub sigma_p: f64,
    pub sigma_r: f64,
    pub replicates: usize,
    /// Replicates whose refit failed.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub n: usize,
    pub a: f64,
    pub p: f64,
    pub r: f64,
    pub asymptote: f64,
    pub weighted: bool,
    /// `sqrt(mean(((S̄_d − fit) / stderr_d)^2))` over depths with nonzero stderr.
    pub normalized_residual_rms: Option<f64>,
    pub residual_rms: f64,
    pub iterations: usize,
    pub bootstrap: Option<Bootstrap>,
}

/// `r = (4^n − 1)(1 − p)/4^n`.
pub fn rate_from_p(n: usize, p: f64) -> f64 {
    let d2 = 4f64.powi(n as i32);
    (d2 - 1.0) * (1.0 - p) / d2
}

/// Fits `S̄_d = A p^d + asymptote` with `A ∈ [0, 1.05]`, `p ∈ [0, 1]`.
///
/// Weighted least squares when `opts.weighted`, every depth has at least 5
/// circuits and every standard error is positive; unweighted otherwise. The
/// start point comes from a log-linear fit to depths with `S̄_d − asymptote >
/// 0.02`, then projected Levenberg–Marquardt iterations refine it.
pub fn fit_decay(means: &[DepthMean], n: usize, opts: &FitOptions) -> Result<DecayFit> {
    let pts = canonical_points(means)?;
    if pts.len() < 2 {
        return Err(Error::Fit(format!("need at least 2 distinct depths, got {}", pts.len())));
    }
    let weighted = opts.weighted && pts.iter().all(|m| m.count >= MIN_K_FOR_WEIGHTS && m.stderr > 0.0);
    let xs: Vec<f64> = pts.iter().map(|m| m.d as f64).collect();
    let ys: Vec<f64> = pts.iter().map(|m| m.mean - opts.asymptote).collect();
    let ws: Vec<f64> = pts.iter().map(|m| if weighted { 1.0 / (m.stderr * m.stderr) } else { 1.0 }).collect();

    let (a0, p0) = log_linear_seed(&xs, &ys)?;
    let (a, p, iterations) = levenberg_marquardt(&xs, &ys, &ws, a0.clamp(0.0, A_MAX), p0.clamp(0.0, 1.0))?;

    let res: Vec<f64> = xs.iter().zip(&ys).map(|(&x, &y)| y - a * p.powf(x)).collect();
    let residual_rms = (res.iter().map(|r| r * r).sum::<f64>() / res.len() as f64).sqrt();
    let normed: Vec<f64> = res.iter().zip(&pts).filter(|(_, m)| m.stderr > 0.0).map(|(r, m)| r / m.stderr).collect();
    let normalized_residual_rms =
        (!normed.is_empty()).then(|| (normed.iter().map(|z| z * z).sum::<f64>() / normed.len() as f64).sqrt());
    Ok(DecayFit {
        n,
        a,
        p,
        r: rate_from_p(n, p),
        asymptote: opts.asymptote,
        weighted,
        normalized_residual_rms,
        residual_rms,
        iterations,
        bootstrap: None,
    })
}

/// Sorts by depth, merges exact duplicates and rejects conflicting ones.
fn canonical_points(means: &[DepthMean]) -> Result<Vec<DepthMean>> {
    let mut pts = means.to_vec();
    for m in &pts {
        if m.d % 2 != 0 {
            return Err(Error::Fit(format!("benchmark depth {} is odd", m.d)));
        }
        if !m.mean.is_finite() || !m.stderr.is_finite() {
            return Err(Error::Fit(format!("non-finite mean at depth {}", m.d)));
        }
    }
    pts.sort_by(|a, b| a.d.cmp(&b.d).then(a.mean.total_cmp(&b.mean)).then(a.stderr.total_cmp(&b.stderr)));
    pts.dedup_by(|b, a| a == b);
    if let Some(w) = pts.windows(2).find(|w| w[0].d == w[1].d) {
        return Err(Error::Fit(format!("conflicting means at depth {}", w[0].d)));
    }
    Ok(pts)
}

fn log_linear_seed(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let use_: Vec<(f64, f64)> =
        xs.iter().zip(ys).filter(|(_, &y)| y > SEED_THRESHOLD).map(|(&x, &y)| (x, y.ln())).collect();
    if use_.len() < 2 {
        return Err(Error::Fit(format!(
            "fewer than 2 depths have mean polarization above {SEED_THRESHOLD}; the decay rate is indeterminate"
        )));
    }
    let k = use_.len() as f64;
    let mx = use_.iter().map(|u| u.0).sum::<f64>() / k;
    let my = use_.iter().map(|u| u.1).sum::<f64>() / k;
    let sxx: f64 = use_.iter().map(|u| (u.0 - mx).powi(2)).sum();
    let sxy: f64 = use_.iter().map(|u| (u.0 - mx) * (u.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("depths above the seed threshold are all equal".into()));
    }
    let slope = sxy / sxx;
    Ok(((my - slope * mx).exp(), slope.exp()))
}

fn sse(xs: &[f64], ys: &[f64], ws: &[f64], a: f64, p: f64) -> f64 {
    xs.iter().zip(ys).zip(ws).map(|((&x, &y), &w)| w * (y - a * p.powf(x)).powi(2)).sum()
}

fn levenberg_marquardt(xs: &[f64], ys: &[f64], ws: &[f64], mut a: f64, mut p: f64) -> Result<(f64, f64, usize)> {
    const MAX_ITER: usize = 1000;
    let mut lambda = 1e-3;
    let mut cost = sse(xs, ys, ws, a, p);
    for it in 1..=MAX_ITER {
        // Normal equations J^T W J δ = J^T W r for the model a p^x.
        let (mut jaa, mut jap, mut jpp, mut ga, mut gp) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for ((&x, &y), &w) in xs.iter().zip(ys).zip(ws) {
            let px = p.powf(x);
            let da = px;
            let dp = if x == 0.0 { 0.0 } else { a * x * p.powf(x - 1.0) };
            let r = y - a * px;
            jaa += w * da * da;
            jap += w * da * dp;
            jpp += w * dp * dp;
            ga += w * da * r;
            gp += w * dp * r;
        }
        let mut improved = false;
        while lambda < 1e16 {
            let m_aa = jaa * (1.0 + lambda);
            let m_pp = jpp * (1.0 + lambda) + if jpp == 0.0 { lambda } else { 0.0 };
            let det = m_aa * m_pp - jap * jap;
            if det.abs() < f64::MIN_POSITIVE {
                lambda *= 10.0;
                continue;
            }
            let da = (ga * m_pp - gp * jap) / det;
            let dp = (gp * m_aa - ga * jap) / det;
            let na = (a + da).clamp(0.0, A_MAX);
            let np = (p + dp).clamp(0.0, 1.0);
            let ncost = sse(xs, ys, ws, na, np);
            if ncost <= cost {
                let step = (na - a).abs().max((np - p).abs());
                let gain = cost - ncost;
                a = na;
                p = np;
                cost = ncost;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if step < 1e-15 || gain <= 1e-30 * cost.max(1e-300) || cost == 0.0 {
                    return Ok((a, p, it));
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // No descent direction left inside the box: a (constrained) minimum.
            return Ok((a, p, it));
        }
    }
    Err(Error::Fit(format!("no convergence after {MAX_ITER} iterations (A = {a}, p = {p}, cost = {cost})")))
}

/// Bootstrap 1σ of `(A, p, r)`: circuits are resampled with replacement within
/// each depth and the fit is repeated `replicates` times. Replicate `b` uses
/// the stream `derive(seed, [BOOTSTRAP, b])`.
pub fn bootstrap_uncertainty(
    points: &[PolarizationPoint],
    n: usize,
    opts: &FitOptions,
    replicates: usize,
    seed: u64,
) -> Result<Bootstrap> {
    if replicates < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 bootstrap replicates, got {replicates}")));
    }
    let mut by: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for p in points {
        by.entry(p.d).or_default().push(p.s);
    }
    let groups: Vec<(usize, Vec<f64>)> = by.into_iter().collect();
    let fits: Vec<Option<(f64, f64, f64)>> = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = derive_rng(seed, &[domain::BOOTSTRAP, b as u64]);
            let means: Vec<DepthMean> = groups
                .iter()
                .map(|(d, s)| {
                    let re: Vec<f64> = (0..s.len()).map(|_| s[rng.random_range(0..s.len())]).collect();
                    mean_of(*d, &re)
                })
                .collect();
            fit_decay(&means, n, opts).ok().map(|f| (f.a, f.p, f.r))
        })
        .collect();
    let ok: Vec<(f64, f64, f64)> = fits.iter().flatten().copied().collect();
    let skipped = replicates - ok.len();
    if ok.len() < 2 {
        return Err(Error::Fit(format!("{skipped} of {replicates} bootstrap refits failed")));
    }
    let sd = |f: &dyn Fn(&(f64, f64, f64)) -> f64| {
        let m = ok.iter().map(f).sum::<f64>() / ok.len() as f64;
        (ok.iter().map(|v| (f(v) - m).powi(2)).sum::<f64>() / (ok.len() - 1) as f64).sqrt()
    };
    Ok(Bootstrap {
        sigma_a: sd(&|v| v.0),
        sigma_p: sd(&|v| v.1),
        sigma_r: sd(&|v| v.2),
        replicates,
        skipped,
    })
}

/// `(r − ε)/ε`.
pub fn relative_error(r: f64, epsilon: f64) -> Result<f64> {
    if epsilon == 0.0 {
        return Err(Error::InvalidArgument("relative error undefined for epsilon = 0".into()));
    }
    Ok((r - epsilon) / epsilon)
}

/// Analysis output for one campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub n: usize,
    pub depths: Vec<DepthMean>,
    pub fit: DecayFit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_rel: Option<f64>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `d,mean,stderr,count` rows.
    pub fn decay_csv(&self) -> String {
        let mut out = String::from("d,mean,stderr,count\n");
        for m in &self.depths {
            writeln!(out, "{},{},{},{}", m.d, m.mean, m.stderr, m.count).unwrap();
        }
        out
    }
}

/// Polarizations, fit, bootstrap and, given `ε_Ω`, the relative error.
pub fn analyze(
    records: &[ShotResult],
    opts: &FitOptions,
    replicates: usize,
    seed: u64,
    epsilon_omega: Option<f64>,
) -> Result<Report> {
    let n = records.first().map(|r| r.n).ok_or_else(|| Error::InvalidArgument("no records".into()))?;
    if let Some(r) = records.iter().find(|r| r.n != n) {
        return Err(Error::DimensionMismatch { expected: n, found: r.n });
    }
    let points = polarization_points(records)?;
    let depths = depth_means(&points);
    let mut fit = fit_decay(&depths, n, opts)?;
    fit.bootstrap = Some(bootstrap_uncertainty(&points, n, opts, replicates, seed)?);
    let delta_rel = epsilon_omega.map(|e| relative_error(fit.r, e)).transpose()?;
    Ok(Report { schema: REPORT_SCHEMA.into(), n, depths, fit, epsilon_omega, delta_rel })
}
