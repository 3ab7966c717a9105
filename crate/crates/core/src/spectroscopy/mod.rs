//! Lorentzian fits of P(|1⟩) spectra, sideband analysis and the heating
//! report.
//!
//! Peaks are A / (1 + [2(x − f)/w]²) with w the full width at half maximum,
//! on a shared constant baseline. Fits run on a centred and rescaled
//! frequency axis; reported frequencies are ordinary frequencies (Hz).

mod lm;
mod report;

pub use lm::{levenberg_marquardt, LeastSquares, LmOptions, LmResult};
pub use report::{
    compare_runs, fit_scan, heating_report, scan_from_oracle, ColumnComparison, ColumnFit, ComparisonReport,
    HeatingReport, HeatingRow,
};

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};

/// Minimum number of samples for a three-peak fit.
pub const MIN_SAMPLES: usize = 30;
/// Relative statistical error above which a parameter is flagged.
pub const FLAG_RELATIVE_ERROR: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl Peak {
    pub fn eval(&self, x: f64) -> f64 {
        let u = 2.0 * (x - self.center) / self.width;
        self.amplitude / (1.0 + u * u)
    }
}

/// Sum of peaks on a constant baseline.
pub fn lorentzian_sum(baseline: f64, peaks: &[Peak], x: f64) -> f64 {
    baseline + peaks.iter().map(|p| p.eval(x)).sum::<f64>()
}

/// Parameters [baseline, (A, f, ln w) per peak] on the scaled axis.
struct PeakProblem<'a> {
    x: &'a [f64],
    y: &'a [f64],
    peaks: usize,
}

impl LeastSquares for PeakProblem<'_> {
    fn num_params(&self) -> usize {
        1 + 3 * self.peaks
    }

    fn num_data(&self) -> usize {
        self.x.len()
    }

    fn evaluate(&self, p: &[f64], res: &mut [f64], jac: &mut [Vec<f64>]) {
        for (k, (&x, &y)) in self.x.iter().zip(self.y).enumerate() {
            let mut model = p[0];
            jac[k][0] = 1.0;
            for j in 0..self.peaks {
                let (a, f, w) = (p[1 + 3 * j], p[2 + 3 * j], p[3 + 3 * j].exp());
                let u = 2.0 * (x - f) / w;
                let l = 1.0 / (1.0 + u * u);
                model += a * l;
                jac[k][1 + 3 * j] = l;
                jac[k][2 + 3 * j] = a * 2.0 * u * l * l * 2.0 / w;
                jac[k][3 + 3 * j] = a * 2.0 * u * u * l * l;
            }
            res[k] = y - model;
        }
    }
}

/// Peak fit in the scaled coordinates, converted back to the input axis.
#[derive(Debug, Clone, PartialEq)]
struct RawFit {
    baseline: f64,
    peaks: Vec<Peak>,
    /// σ of (baseline, then A, f, w per peak) on the input axis.
    sigma: Vec<f64>,
    /// Covariance in the same ordering.
    covariance: Option<Vec<Vec<f64>>>,
    chi2: f64,
    converged: bool,
}

struct Axis {
    mid: f64,
    scale: f64,
}

impl Axis {
    fn new(x: &[f64]) -> Self {
        let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let scale = if hi > lo { hi - lo } else { 1.0 };
        Self { mid: 0.5 * (lo + hi), scale }
    }

    fn to(&self, x: f64) -> f64 {
        (x - self.mid) / self.scale
    }
}

fn raw_fit(x: &[f64], y: &[f64], baseline: f64, init: &[Peak]) -> Result<RawFit> {
    let axis = Axis::new(x);
    let xs: Vec<f64> = x.iter().map(|&v| axis.to(v)).collect();
    let mut p0 = vec![baseline];
    for pk in init {
        p0.extend([pk.amplitude, axis.to(pk.center), (pk.width / axis.scale).ln()]);
    }
    let problem = PeakProblem { x: &xs, y, peaks: init.len() };
    let fit = levenberg_marquardt(&problem, &p0, &LmOptions::default())?;
    let p = &fit.params;
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::FitDiverged("non-finite parameters".into()));
    }
    let peaks: Vec<Peak> = (0..init.len())
        .map(|j| Peak {
            amplitude: p[1 + 3 * j],
            center: axis.mid + axis.scale * p[2 + 3 * j],
            width: axis.scale * p[3 + 3 * j].exp(),
        })
        .collect();
    // d(reported)/d(fitted) is diagonal: 1 for baseline and A, scale for f, w for ln w
    let jac_diag: Vec<f64> = std::iter::once(1.0)
        .chain(peaks.iter().flat_map(|pk| [1.0, axis.scale, pk.width]))
        .collect();
    let covariance = fit.covariance.map(|c| {
        (0..c.len())
            .map(|i| (0..c.len()).map(|j| c[i][j] * jac_diag[i] * jac_diag[j]).collect())
            .collect::<Vec<Vec<f64>>>()
    });
    let sigma = match &covariance {
        Some(c) => (0..c.len()).map(|i| c[i][i].max(0.0).sqrt()).collect(),
        None => vec![f64::INFINITY; jac_diag.len()],
    };
    Ok(RawFit {
        baseline: p[0],
        peaks,
        sigma,
        covariance,
        chi2: fit.chi2,
        converged: fit.converged,
    })
}

/// Estimates the full width at half maximum of the peak at sample `k`.
fn half_width_estimate(x: &[f64], y: &[f64], k: usize, baseline: f64) -> Option<f64> {
    let half = baseline + 0.5 * (y[k] - baseline);
    let left = (0..k).rev().find(|&j| y[j] <= half).map(|j| x[j]);
    let right = (k + 1..x.len()).find(|&j| y[j] <= half).map(|j| x[j]);
    match (left, right) {
        (Some(l), Some(r)) => Some(r - l),
        (Some(l), None) => Some(2.0 * (x[k] - l)),
        (None, Some(r)) => Some(2.0 * (r - x[k])),
        (None, None) => None,
    }
}

fn check_grid(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::GridMismatch(format!("{} frequencies but {} values", x.len(), y.len())));
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::GridMismatch("frequencies must be strictly increasing".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::GridMismatch("spectrum contains non-finite values".into()));
    }
    Ok(())
}

/// Single Lorentzian on a baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LorentzianFit {
    pub peak: Peak,
    pub baseline: f64,
    /// σ of amplitude, center and width.
    pub sigma: [f64; 3],
    pub chi2: f64,
}

/// Fits one Lorentzian plus baseline to (x, y); x in any unit, returned in the same.
pub fn fit_lorentzian(x: &[f64], y: &[f64]) -> Result<LorentzianFit> {
    check_grid(x, y)?;
    if x.len() < 5 {
        return Err(Error::FitDiverged(format!("{} samples are too few for a peak fit", x.len())));
    }
    let base = y.iter().copied().fold(f64::INFINITY, f64::min);
    let k = argmax(y);
    let span = x[x.len() - 1] - x[0];
    let width = half_width_estimate(x, y, k, base).unwrap_or(span / 4.0);
    let fit = raw_fit(x, y, base, &[Peak { amplitude: y[k] - base, center: x[k], width }])?;
    if !fit.converged {
        return Err(Error::FitDiverged("Lorentzian fit did not converge".into()));
    }
    Ok(LorentzianFit {
        peak: fit.peaks[0],
        baseline: fit.baseline,
        sigma: [fit.sigma[1], fit.sigma[2], fit.sigma[3]],
        chi2: fit.chi2,
    })
}

fn argmax(y: &[f64]) -> usize {
    y.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bk, bv), (k, &v)| if v > bv { (k, v) } else { (bk, bv) })
        .0
}

/// Starting guesses for the sideband peaks.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct InitPolicy {
    /// Expected Δ̃_r (rad/s), normally taken from the model. The red sideband
    /// sits at ω_{1,0}‴ + Δ̃_r and the blue one at ω_{1,0}‴ − Δ̃_r; without a
    /// value the red sideband is assumed below the center line.
    pub delta_r_tilde: Option<f64>,
    /// Starting FWHM (rad/s) for every peak.
    pub width: Option<f64>,
}

/// Which peaks the accepted model contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakModel {
    Three,
    CenterRed,
    CenterBlue,
    CenterOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakRole {
    Center,
    Red,
    Blue,
}

/// Three-Lorentzian fit result. Frequencies and widths in Hz; a dropped
/// sideband has zero amplitude and NaN center, width and σ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LorentzianTriplet {
    pub f_c: f64,
    pub f_r: f64,
    pub f_b: f64,
    pub w_c: f64,
    pub w_r: f64,
    pub w_b: f64,
    pub a_c: f64,
    pub a_r: f64,
    pub a_b: f64,
    pub baseline: f64,
    /// σ of the ten parameters in `PARAMETER_NAMES` order.
    pub sigma: [f64; 10],
    /// Covariance of the fitted parameters, `PARAMETER_NAMES` order restricted
    /// to the peaks of `model`.
    pub covariance: Option<Vec<Vec<f64>>>,
    pub model: PeakModel,
    pub chi2: f64,
    /// Parameters whose relative statistical error exceeds 30%.
    pub flagged: Vec<&'static str>,
    pub fit_ok: bool,
}

pub const PARAMETER_NAMES: [&str; 10] = ["baseline", "a_c", "f_c", "w_c", "a_r", "f_r", "w_r", "a_b", "f_b", "w_b"];

impl LorentzianTriplet {
    /// A_b / A_r; NaN without a red sideband.
    pub fn ratio(&self) -> f64 {
        if self.a_r > 0.0 {
            self.a_b / self.a_r
        } else {
            f64::NAN
        }
    }

    /// σ of A_b/A_r from the covariance.
    pub fn ratio_sigma(&self) -> f64 {
        let (ia, ib) = (4, 7);
        let ratio = self.ratio();
        if !ratio.is_finite() || self.model != PeakModel::Three {
            return f64::NAN;
        }
        let cov_ab = self
            .covariance
            .as_ref()
            .map(|c| c[ib][ia])
            .unwrap_or(0.0);
        let (sr, sb) = (self.sigma[ia], self.sigma[ib]);
        let rel2 = (sb / self.a_b).powi(2) + (sr / self.a_r).powi(2) - 2.0 * cov_ab / (self.a_b * self.a_r);
        ratio.abs() * rel2.max(0.0).sqrt()
    }

    pub fn peaks(&self) -> Vec<(PeakRole, Peak)> {
        let mut out = vec![(PeakRole::Center, Peak { amplitude: self.a_c, center: self.f_c, width: self.w_c })];
        if self.a_r != 0.0 && self.f_r.is_finite() {
            out.push((PeakRole::Red, Peak { amplitude: self.a_r, center: self.f_r, width: self.w_r }));
        }
        if self.a_b != 0.0 && self.f_b.is_finite() {
            out.push((PeakRole::Blue, Peak { amplitude: self.a_b, center: self.f_b, width: self.w_b }));
        }
        out
    }

    /// Fitted profile at ordinary frequency `f` (Hz).
    pub fn eval(&self, f: f64) -> f64 {
        let peaks: Vec<Peak> = self.peaks().into_iter().map(|(_, p)| p).collect();
        lorentzian_sum(self.baseline, &peaks, f)
    }
}

/// Fits center line plus red and blue sidebands to P(|1⟩) sampled at
/// `omega_s` (rad/s, strictly increasing). A sideband whose amplitude is
/// within 2σ of zero is dropped and the remaining model refitted.
pub fn fit_three_lorentzians(omega_s: &[f64], p1: &[f64], init: &InitPolicy) -> Result<LorentzianTriplet> {
    check_grid(omega_s, p1)?;
    if omega_s.len() < MIN_SAMPLES {
        return Err(Error::FitDiverged(format!(
            "{} samples; at least {MIN_SAMPLES} are needed",
            omega_s.len()
        )));
    }
    let x = omega_s;
    let y = p1;
    let n = x.len();
    let base = y.iter().copied().fold(f64::INFINITY, f64::min);
    let kc = argmax(y);
    let span = x[n - 1] - x[0];
    let step = span / (n - 1) as f64;
    let w0 = init
        .width
        .or_else(|| half_width_estimate(x, y, kc, base))
        .unwrap_or(span / 20.0)
        .max(2.0 * step);
    let offset = init.delta_r_tilde.map(f64::abs).unwrap_or_else(|| sideband_guess(x, y, kc, w0));
    let red_side = red_side(init);
    let center = Peak { amplitude: y[kc] - base, center: x[kc], width: w0 };
    // each sideband starts at the largest excess over the center-line tail
    // within half an offset of its expected position
    let sideband = |sign: f64| {
        let expected = x[kc] + sign * offset;
        let excess = |k: usize| y[k] - base - center.eval(x[k]);
        let best = (0..n)
            .filter(|&k| (x[k] - expected).abs() <= 0.5 * offset)
            .max_by(|&a, &b| excess(a).partial_cmp(&excess(b)).unwrap_or(std::cmp::Ordering::Equal));
        match best {
            Some(k) if excess(k) > 0.0 => {
                // sidebands are usually much wider than the center line
                let window: Vec<usize> = (0..n).filter(|&j| (x[j] - expected).abs() <= 0.5 * offset).collect();
                let wx: Vec<f64> = window.iter().map(|&j| x[j]).collect();
                let wy: Vec<f64> = window.iter().map(|&j| excess(j)).collect();
                let local = window.iter().position(|&j| j == k).expect("best lies in its window");
                let width = match init.width {
                    Some(w) => w,
                    None => half_width_estimate(&wx, &wy, local, 0.0).map_or(w0, |w| w.clamp(2.0 * step, offset)),
                };
                Peak { amplitude: excess(k), center: x[k], width }
            }
            _ => Peak { amplitude: 1e-3 * center.amplitude, center: expected, width: w0 },
        }
    };
    let (red, blue) = (sideband(red_side), sideband(-red_side));

    let mut roles = vec![PeakRole::Center, PeakRole::Red, PeakRole::Blue];
    let mut init_peaks = vec![center, red, blue];
    loop {
        let attempt = raw_fit(x, y, base, &init_peaks);
        let fit = match attempt {
            Ok(f) if f.converged => f,
            Ok(_) | Err(_) if roles.len() > 1 => {
                // drop the weaker sideband guess and retry
                let drop = weakest_sideband(&roles, &init_peaks, None);
                roles.remove(drop);
                init_peaks.remove(drop);
                continue;
            }
            Ok(_) => return Err(Error::FitDiverged("center-line fit did not converge".into())),
            Err(e) => return Err(e),
        };
        let insignificant: Vec<usize> = (1..roles.len())
            .filter(|&j| {
                let s = fit.sigma[1 + 3 * j];
                let a = fit.peaks[j].amplitude;
                // the second test catches numerically vanishing peaks on noiseless data
                !(a - 2.0 * s > 0.0) || a < 1e-6 * fit.peaks[0].amplitude
            })
            .collect();
        // a sideband that ran off the grid or grew wider than it is unresolved
        let runaway = (1..roles.len()).find(|&j| {
            let pk = fit.peaks[j];
            pk.width > span || pk.center < x[0] || pk.center > x[n - 1]
        });
        if runaway.is_some() || !insignificant.is_empty() {
            let drop = runaway.unwrap_or_else(|| weakest_sideband(&roles, &fit.peaks, Some(&fit.sigma)));
            roles.remove(drop);
            init_peaks = fit.peaks.clone();
            init_peaks.remove(drop);
            continue;
        }
        return assemble(&roles, &fit, red_side);
    }
}

/// +1 when the red sideband lies above the center line, −1 below.
fn red_side(init: &InitPolicy) -> f64 {
    match init.delta_r_tilde {
        Some(d) if d > 0.0 => 1.0,
        _ => -1.0,
    }
}

/// Index of the sideband with the smallest amplitude significance.
fn weakest_sideband(roles: &[PeakRole], peaks: &[Peak], sigma: Option<&[f64]>) -> usize {
    // without finite errors the amplitudes alone decide
    let sigma = sigma.filter(|s| (1..roles.len()).all(|j| s[1 + 3 * j].is_finite() && s[1 + 3 * j] > 0.0));
    (1..roles.len())
        .min_by(|&a, &b| {
            let sig = |j: usize| match sigma {
                Some(s) => peaks[j].amplitude / s[1 + 3 * j],
                None => peaks[j].amplitude,
            };
            sig(a).partial_cmp(&sig(b)).unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(1)
}

/// Offset of the most prominent secondary maximum from the main peak, or
/// four widths when there is none.
fn sideband_guess(x: &[f64], y: &[f64], kc: usize, width: f64) -> f64 {
    let n = y.len();
    (1..n - 1)
        .filter(|&k| k != kc && y[k] >= y[k - 1] && y[k] >= y[k + 1] && (x[k] - x[kc]).abs() > width)
        .max_by(|&a, &b| y[a].partial_cmp(&y[b]).unwrap_or(std::cmp::Ordering::Equal))
        .map(|k| (x[k] - x[kc]).abs())
        .unwrap_or(4.0 * width)
}

fn assemble(roles: &[PeakRole], fit: &RawFit, red_side: f64) -> Result<LorentzianTriplet> {
    let to_hz = 1.0 / TAU;
    let find = |role: PeakRole| roles.iter().position(|&r| r == role);
    let c = find(PeakRole::Center).expect("center peak is always fitted");
    let centre = fit.peaks[c];

    // sidebands are labelled by their side of the center line relative to Δ̃_r
    let mut sides: Vec<(PeakRole, usize)> = Vec::new();
    for (j, pk) in fit.peaks.iter().enumerate() {
        if j == c {
            continue;
        }
        if (pk.center - centre.center).abs() < 0.5 * pk.width.max(centre.width) {
            return Err(Error::DegeneratePeaks {
                a_hz: centre.center * to_hz,
                b_hz: pk.center * to_hz,
            });
        }
        let role = if (pk.center - centre.center) * red_side > 0.0 { PeakRole::Red } else { PeakRole::Blue };
        if sides.iter().any(|(r, _)| *r == role) {
            return Err(Error::DegeneratePeaks {
                a_hz: fit.peaks[sides[0].1].center * to_hz,
                b_hz: pk.center * to_hz,
            });
        }
        sides.push((role, j));
    }
    let side = |role: PeakRole| sides.iter().find(|(r, _)| *r == role).map(|&(_, j)| j);
    let (red, blue) = (side(PeakRole::Red), side(PeakRole::Blue));
    let model = match (red, blue) {
        (Some(_), Some(_)) => PeakModel::Three,
        (Some(_), None) => PeakModel::CenterRed,
        (None, Some(_)) => PeakModel::CenterBlue,
        (None, None) => PeakModel::CenterOnly,
    };

    let mut sigma = [f64::NAN; 10];
    sigma[0] = fit.sigma[0];
    let mut order = vec![0usize];
    let slot = |dst: usize, j: Option<usize>, sigma: &mut [f64; 10], order: &mut Vec<usize>| {
        if let Some(j) = j {
            for q in 0..3 {
                let scale = if q == 0 { 1.0 } else { to_hz };
                sigma[dst + q] = fit.sigma[1 + 3 * j + q] * scale;
                order.push(1 + 3 * j + q);
            }
        }
    };
    slot(1, Some(c), &mut sigma, &mut order);
    slot(4, red, &mut sigma, &mut order);
    slot(7, blue, &mut sigma, &mut order);
    let scales: Vec<f64> = order
        .iter()
        .map(|&i| if i == 0 || (i - 1) % 3 == 0 { 1.0 } else { to_hz })
        .collect();
    let covariance = fit.covariance.as_ref().map(|cov| {
        order
            .iter()
            .enumerate()
            .map(|(a, &i)| order.iter().enumerate().map(|(b, &j)| cov[i][j] * scales[a] * scales[b]).collect())
            .collect()
    });

    let get = |j: Option<usize>| j.map(|j| fit.peaks[j]);
    let (pr, pb) = (get(red), get(blue));
    let mut out = LorentzianTriplet {
        f_c: centre.center * to_hz,
        f_r: pr.map_or(f64::NAN, |p| p.center * to_hz),
        f_b: pb.map_or(f64::NAN, |p| p.center * to_hz),
        w_c: centre.width * to_hz,
        w_r: pr.map_or(f64::NAN, |p| p.width * to_hz),
        w_b: pb.map_or(f64::NAN, |p| p.width * to_hz),
        a_c: centre.amplitude,
        a_r: pr.map_or(0.0, |p| p.amplitude),
        a_b: pb.map_or(0.0, |p| p.amplitude),
        baseline: fit.baseline,
        sigma,
        covariance,
        model,
        chi2: fit.chi2,
        flagged: Vec::new(),
        fit_ok: fit.converged,
    };
    let values = [
        out.baseline, out.a_c, out.f_c, out.w_c, out.a_r, out.f_r, out.w_r, out.a_b, out.f_b, out.w_b,
    ];
    // frequencies are judged by their error relative to the line width
    let reference = [
        out.baseline, out.a_c, out.w_c, out.w_c, out.a_r, out.w_r, out.w_r, out.a_b, out.w_b, out.w_b,
    ];
    out.flagged = (1..10)
        .filter(|&i| values[i].is_finite() && sigma[i].is_finite() && sigma[i] > FLAG_RELATIVE_ERROR * reference[i].abs())
        .map(|i| PARAMETER_NAMES[i])
        .collect();
    let ordered = out.f_r.is_nan() || (out.f_r - out.f_c) * red_side > 0.0;
    let ordered = ordered && (out.f_b.is_nan() || (out.f_b - out.f_c) * red_side < 0.0);
    let widths = [out.w_c, out.w_r, out.w_b].iter().all(|w| w.is_nan() || *w > 0.0);
    let amps = [out.a_c, out.a_r, out.a_b].iter().all(|a| *a >= 0.0);
    out.fit_ok = out.fit_ok && ordered && widths && amps;
    Ok(out)
}

/// sinh²r = ratio / (1 − ratio), the inverse of the resolved sideband law.
pub fn n_th_from_ratio(ratio: f64) -> f64 {
    ratio / (1.0 - ratio)
}

/// r = asinh √(ratio / (1 − ratio)).
pub fn r_from_ratio(ratio: f64) -> f64 {
    n_th_from_ratio(ratio).sqrt().asinh()
}
