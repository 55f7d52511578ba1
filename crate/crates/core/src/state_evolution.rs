//! Exact scalar dynamics of the OAMP/VAMP receiver: the linear-stage
//! transfer `φ_L`, its chart form `ϕ_L` in the (ρ, v) plane, fixed points
//! against a prior or code MMSE curve, and the decodability threshold.
//!
//! Conventions for the (ρ, v) chart:
//! * `φ_L(v) = 1/Ω_L(1/v) - 1/v` maps NLD output variance to LD output
//!   precision; it is strictly decreasing in `v` for non-flat spectra and
//!   constant (= snr) for flat ones.
//! * The generalized inverse used by `ϕ_L` is
//!   `φ_L^inv(ρ) = sup{ v ∈ (0,1] : φ_L(v) ≥ ρ }`, which returns 1 on the
//!   plateau of a flat spectrum (so `ϕ_L(ρ) = 1/(1+ρ)` there) and the plain
//!   inverse on strictly monotone spectra.

use crate::channel::SingularSpectrum;
use crate::constellation::Constellation;
use crate::{Error, Result};

/// Bisection tolerance for inverting `φ_L`.
const INV_TOL: f64 = 1e-12;

/// Lower cap on `v` during inversion; `φ_L(v) → snr` as `v → 0`.
const V_FLOOR: f64 = 1e-300;

/// Relative tolerance used when locating fixed points in ρ.
const FP_RHO_TOL: f64 = 1e-12;

/// Strict-gap margin (in v units) for the tunnel-open decodability test.
pub const DEFAULT_GAP: f64 = 1e-6;

/// LD transfer `ρ = φ_L(v)`, exact from the spectrum.
///
/// Evaluated in the cancellation-free ratio form
/// `φ_L(v) = [Σ snr·λ/(snr·λ + w)] / [Σ 1/(snr·λ + w)]` with `w = 1/v`,
/// which stays accurate for arbitrarily small `v` and is bitwise `snr` on
/// flat spectra.
pub fn phi_l(spectrum: &SingularSpectrum, snr: f64, v: f64) -> f64 {
    assert!(v > 0.0 && v <= 1.0, "v must lie in (0, 1]");
    let w = 1.0 / v;
    let mut num = 0.0;
    let mut den = 0.0;
    for lam in spectrum.eigenvalues() {
        let d = snr * lam + w;
        num += snr * lam / d;
        den += 1.0 / d;
    }
    num / den
}

/// Supremum of `φ_L` over `v ∈ (0, 1]`: `snr · mean(λ)`, which is `snr`
/// for trace-normalized spectra.
pub fn phi_l_sup(spectrum: &SingularSpectrum, snr: f64) -> f64 {
    snr * spectrum.eigenvalues().sum::<f64>() / spectrum.n() as f64
}

/// Generalized inverse `φ_L^inv(ρ) = sup{ v ∈ (0,1] : φ_L(v) ≥ ρ }`.
///
/// Returns `None` when the superlevel set is empty, i.e. `ρ` reaches the
/// attainable supremum of `φ_L`. One relative ulp of slack keeps the two
/// boundary cases (plateaus of flat spectra, ρ exactly at the supremum)
/// stable against rounding.
pub fn phi_l_inverse(spectrum: &SingularSpectrum, snr: f64, rho: f64) -> Option<f64> {
    if rho <= phi_l(spectrum, snr, 1.0) * (1.0 + 1e-12) {
        return Some(1.0);
    }
    if rho >= phi_l_sup(spectrum, snr) * (1.0 - 1e-12) {
        return None;
    }
    // φ_L increases as v decreases; find a lower bracket with φ_L(v) ≥ rho.
    let mut lo = 0.5;
    while phi_l(spectrum, snr, lo) < rho {
        lo *= 0.5;
        if lo < V_FLOOR {
            return None;
        }
    }
    // Invariant: φ_L(lo) ≥ rho > φ_L(hi).
    let mut hi = (lo * 2.0).min(1.0);
    while hi - lo > INV_TOL * hi.max(1e-30) {
        let mid = 0.5 * (lo + hi);
        if phi_l(spectrum, snr, mid) >= rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Chart form of the LD curve, `v = ϕ_L(ρ) = (ρ + 1/φ_L^inv(ρ))^{-1}`.
///
/// Defined on `[0, snr)`; outside that range the attainable interval is
/// reported in the error.
pub fn varphi_l(spectrum: &SingularSpectrum, snr: f64, rho: f64) -> Result<f64> {
    if rho < 0.0 {
        return Err(Error::Range {
            value: rho,
            lo: 0.0,
            hi: snr,
        });
    }
    match phi_l_inverse(spectrum, snr, rho) {
        Some(v_inv) => Ok(1.0 / (rho + 1.0 / v_inv)),
        None => Err(Error::Range {
            value: rho,
            lo: 0.0,
            hi: snr,
        }),
    }
}

/// `ϕ_L` extended by its limit value 0 for `ρ ≥ snr` (the form used when
/// integrating areas and testing tunnels).
pub fn varphi_l_extended(spectrum: &SingularSpectrum, snr: f64, rho: f64) -> f64 {
    varphi_l(spectrum, snr, rho).unwrap_or(0.0)
}

/// NLD transfer `v = ψ(ρ) = (1/Ω(ρ) - ρ)^{-1}` for a scalar MMSE value.
pub fn nld_variance(omega: f64, rho: f64) -> f64 {
    1.0 / (1.0 / omega - rho)
}

/// The log-spaced ρ grid used for charts and scans: `{0} ∪ 512 points on
/// [1e-4·snr, snr]` with exact endpoints.
pub fn rho_grid(snr: f64) -> Vec<f64> {
    const POINTS: usize = 512;
    let lo = 1e-4 * snr;
    let ratio = (snr / lo).ln();
    let mut grid = Vec::with_capacity(POINTS + 1);
    grid.push(0.0);
    for i in 0..POINTS {
        let t = i as f64 / (POINTS - 1) as f64;
        grid.push(lo * (ratio * t).exp());
    }
    // exact endpoints, immune to rounding in the exp ladder
    grid[1] = lo;
    grid[POINTS] = snr;
    grid
}

/// Tabulated LD and NLD curves over the standard grid.
#[derive(Debug, Clone)]
pub struct TransferChart {
    pub snr: f64,
    pub rho: Vec<f64>,
    /// `v = ϕ_L(ρ)`
    pub ld: Vec<f64>,
    /// `v = Ω_S(ρ)` (demodulation MMSE of the constellation)
    pub nld_prior: Vec<f64>,
    /// `v = Ω_C*(ρ)` (optimal coded NLD = min of the two, 0 beyond snr)
    pub nld_optimal: Vec<f64>,
}

impl TransferChart {
    pub fn build(spectrum: &SingularSpectrum, snr: f64, c: &Constellation) -> Self {
        let rho = rho_grid(snr);
        let ld: Vec<f64> = rho
            .iter()
            .map(|&r| varphi_l_extended(spectrum, snr, r))
            .collect();
        let nld_prior: Vec<f64> = rho.iter().map(|&r| c.omega_s(r)).collect();
        let nld_optimal: Vec<f64> = ld
            .iter()
            .zip(&nld_prior)
            .zip(&rho)
            .map(|((&l, &p), &r)| if r >= snr { 0.0 } else { l.min(p) })
            .collect();
        Self {
            snr,
            rho,
            ld,
            nld_prior,
            nld_optimal,
        }
    }
}

/// Intersection of the LD chart curve and an NLD curve, together with the
/// NLD-output variance at that point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    /// Crossing precision ρ*.
    pub rho_star: f64,
    /// NLD output variance v* = (1/Ω_S(ρ*) - ρ*)^{-1}.
    pub v_star: f64,
    /// Curve height at the crossing, Ω_S(ρ*) = ϕ_L(ρ*).
    pub omega_star: f64,
}

/// Result of a fixed-point scan: the fixed point reached by the dynamics
/// (the first crossing from the left) plus all detected candidates.
#[derive(Debug, Clone)]
pub struct FixedPointScan {
    pub point: FixedPoint,
    pub candidates: Vec<FixedPoint>,
}

impl FixedPointScan {
    pub fn is_unique(&self) -> bool {
        self.candidates.len() == 1
    }
}

/// Locates all solutions of `Ω_S(ρ) = ϕ_L(ρ)` on `(0, snr]` by a grid scan
/// plus bisection. When the two curves coincide within tolerance instead of
/// crossing (flat spectrum with Gaussian prior), the rightmost touching
/// grid point is reported as a degenerate fixed point.
pub fn find_fixed_point(
    spectrum: &SingularSpectrum,
    snr: f64,
    c: &Constellation,
) -> Result<FixedPointScan> {
    let gap = |rho: f64| c.omega_s(rho) - varphi_l_extended(spectrum, snr, rho);
    let grid = rho_grid(snr);
    let g: Vec<f64> = grid.iter().map(|&r| gap(r)).collect();

    let mut candidates = Vec::new();
    for i in 1..grid.len() - 1 {
        // skip the ρ=0 node: both curves equal the prior variance there
        if g[i] == 0.0 && g[i + 1] != 0.0 {
            candidates.push(grid[i]);
        } else if g[i] * g[i + 1] < 0.0 {
            let (mut lo, mut hi) = (grid[i], grid[i + 1]);
            let mut g_lo = g[i];
            while hi - lo > FP_RHO_TOL * hi {
                let mid = 0.5 * (lo + hi);
                let gm = gap(mid);
                if gm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (gm > 0.0) == (g_lo > 0.0) {
                    lo = mid;
                    g_lo = gm;
                } else {
                    hi = mid;
                }
            }
            candidates.push(0.5 * (lo + hi));
        }
    }

    if candidates.is_empty() {
        // degenerate touch: curves numerically coincide somewhere
        const TOUCH_TOL: f64 = 1e-9;
        let touch = grid
            .iter()
            .zip(&g)
            .skip(1)
            .rev()
            .find(|(_, &gi)| gi.abs() <= TOUCH_TOL)
            .map(|(&r, _)| r);
        match touch {
            Some(r) => candidates.push(r),
            None => {
                let below = g.iter().skip(1).all(|&x| x <= 0.0);
                return Err(Error::NoFixedPoint {
                    rho_hi: snr,
                    relation: if below { "below" } else { "above" },
                });
            }
        }
    }

    let to_point = |rho_star: f64| {
        let omega_star = c.omega_s(rho_star);
        FixedPoint {
            rho_star,
            v_star: nld_variance(omega_star, rho_star),
            omega_star,
        }
    };
    let points: Vec<FixedPoint> = candidates.into_iter().map(to_point).collect();
    Ok(FixedPointScan {
        point: points[0],
        candidates: points,
    })
}

/// One (ρ, v) state of the scalar recursion.
#[derive(Debug, Clone, Copy)]
pub struct SeState {
    pub iter: usize,
    pub rho: f64,
    pub v: f64,
}

/// Runs the scalar recursion `ρ_{t+1} = φ_L(v_t)`, `v_{t+1} = ψ(ρ_{t+1})`
/// from `v_0 = 1` against an arbitrary NLD MMSE curve `Ω(ρ)`. Returns the
/// visited states including the initial one.
pub fn se_iterate(
    spectrum: &SingularSpectrum,
    snr: f64,
    nld_mmse: &mut impl FnMut(f64) -> f64,
    max_iters: usize,
    tol: f64,
) -> Vec<SeState> {
    let mut states = vec![SeState {
        iter: 0,
        rho: 0.0,
        v: 1.0,
    }];
    let mut v = 1.0f64;
    for iter in 1..=max_iters {
        let rho = phi_l(spectrum, snr, v);
        let omega = nld_mmse(rho);
        let v_next = if omega >= 1.0 / rho {
            // non-contracting prior: hold the previous variance
            v
        } else {
            nld_variance(omega, rho).clamp(1e-12, 1.0)
        };
        states.push(SeState {
            iter,
            rho,
            v: v_next,
        });
        if (v - v_next).abs() < tol {
            break;
        }
        v = v_next;
    }
    states
}

/// Decodability threshold: the smallest snr in `[snr_lo, snr_hi]` (natural
/// units) at which the NLD curve clears the LD chart curve with a strict
/// gap all along the decoding tunnel. Returns `+∞` when the tunnel never
/// opens in range.
///
/// The tunnel is checked on `ρ ∈ [φ_L(1), ρ_done]`, where `φ_L(1)` is the
/// entry precision of the dynamics (started at `v = 1`) and `ρ_done` is the
/// first grid point where the NLD curve has dropped below `gap` (the code
/// decodes cleanly from there on). If the curve never drops below `gap`
/// within `[φ_L(1), snr)`, the tunnel is closed at that snr.
pub fn se_threshold(
    spectrum: &SingularSpectrum,
    snr_lo: f64,
    snr_hi: f64,
    nld_curve: &mut impl FnMut(f64) -> f64,
    gap: f64,
) -> f64 {
    assert!(snr_lo > 0.0 && snr_hi >= snr_lo);
    let mut open = |snr: f64| -> bool {
        let entry = phi_l(spectrum, snr, 1.0);
        if entry >= snr {
            // flat spectrum: the first LD pass already delivers ρ = snr
            return nld_curve(snr) <= gap;
        }
        let steps = 400;
        let ratio = (snr / entry).ln();
        let mut done = false;
        for i in 0..steps {
            let rho = entry * (ratio * i as f64 / (steps - 1) as f64).exp();
            let nld = nld_curve(rho);
            if nld <= gap {
                done = true;
                break;
            }
            let ld = varphi_l_extended(spectrum, snr, rho);
            if nld > ld - gap {
                return false;
            }
        }
        done
    };
    if !open(snr_hi) {
        return f64::INFINITY;
    }
    if open(snr_lo) {
        return snr_lo;
    }
    let (mut lo, mut hi) = (snr_lo, snr_hi);
    while hi / lo > 1.0 + 1e-4 {
        let mid = (lo * hi).sqrt();
        if open(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
