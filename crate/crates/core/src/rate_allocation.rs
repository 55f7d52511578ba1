//! Group-asymmetric code-design targets: the optimal coded NLD curve
//! `Ω_C*`, per-group MMSE curves obtained by splitting the average variance
//! across user groups with weights γ_g, and the per-group rates they imply.
//!
//! On the allocation segment `ρ ∈ [ρ*, snr]` all group variances share one
//! tilt parameter `t ≥ 0` through `γ_g (v_g^{-1} - c*) = t` with
//! `c* = 1/Ω_S(ρ*)`; `t` is solved so the group average matches the LD
//! curve value, with per-group clipping at `Ω_S(ρ)` and a re-solve over the
//! unclipped groups so the average constraint stays exact.

use crate::channel::SingularSpectrum;
use crate::constellation::Constellation;
use crate::quadrature::{adaptive_simpson, trapezoid};
use crate::state_evolution::{find_fixed_point, varphi_l_extended};
use crate::{Error, Result};

/// Bisection tolerance for the variance-allocation solves.
const SOLVE_TOL: f64 = 1e-14;

/// Group weights γ and the fixed-point constant `c* = 1/Ω_S(ρ*)`.
#[derive(Debug, Clone)]
pub struct AllocationConfig {
    gammas: Vec<f64>,
    c_star: f64,
}

impl AllocationConfig {
    pub fn new(gammas: Vec<f64>, c_star: f64) -> Result<Self> {
        if gammas.is_empty() {
            return Err(Error::Config("need at least one group weight".into()));
        }
        if gammas.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
            return Err(Error::Config("group weights must be positive and finite".into()));
        }
        if !(c_star > 0.0) {
            return Err(Error::Config("c_star must be positive".into()));
        }
        Ok(Self { gammas, c_star })
    }

    pub fn groups(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn c_star(&self) -> f64 {
        self.c_star
    }

    /// Pairwise coupling coefficient `b_ig = γ_i^{-1} γ_g`.
    pub fn b(&self, i: usize, g: usize) -> f64 {
        self.gammas[g] / self.gammas[i]
    }

    /// Pairwise offset `c_ig = (1 - b_ig) c*`.
    pub fn c(&self, i: usize, g: usize) -> f64 {
        (1.0 - self.b(i, g)) * self.c_star
    }

    /// Group variance at tilt `t`: `v_g(t) = (c* + t/γ_g)^{-1}`.
    fn v_at(&self, g: usize, t: f64) -> f64 {
        1.0 / (self.c_star + t / self.gammas[g])
    }

    /// Solves the average constraint `(1/G) Σ v_g = v` for the shared tilt
    /// and returns all group variances. Valid for `v ∈ (0, 1/c*]`.
    pub fn solve_group_variances(&self, v: f64) -> Result<Vec<f64>> {
        let v_max = 1.0 / self.c_star;
        if !(v > 0.0) || v > v_max * (1.0 + 1e-12) {
            return Err(Error::Range {
                value: v,
                lo: 0.0,
                hi: v_max,
            });
        }
        let all: Vec<usize> = (0..self.groups()).collect();
        let t = self.solve_tilt(&all, self.groups() as f64 * v.min(v_max))?;
        Ok((0..self.groups()).map(|g| self.v_at(g, t)).collect())
    }

    /// Solves `Σ_{g ∈ active} v_g(t) = target` for `t ≥ 0` by bisection.
    fn solve_tilt(&self, active: &[usize], target: f64) -> Result<f64> {
        let sum_at = |t: f64| -> f64 { active.iter().map(|&g| self.v_at(g, t)).sum() };
        let max_sum = active.len() as f64 / self.c_star;
        if target <= 0.0 || target > max_sum * (1.0 + 1e-12) {
            return Err(Error::InfeasibleAllocation {
                binding: active.to_vec(),
            });
        }
        if target >= max_sum {
            return Ok(0.0);
        }
        let mut hi = 1.0;
        while sum_at(hi) > target {
            hi *= 4.0;
            if !hi.is_finite() {
                return Err(Error::InfeasibleAllocation {
                    binding: active.to_vec(),
                });
            }
        }
        let mut lo = 0.0;
        while hi - lo > SOLVE_TOL * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if sum_at(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Allocation with a per-group cap: each `v_g` is clipped at `cap` and
    /// the average constraint is re-solved over the unclipped groups so
    /// `(1/G) Σ v_g = v` holds exactly. Errors when the clipped groups
    /// alone exceed the average budget.
    pub fn solve_group_variances_capped(&self, v: f64, cap: f64) -> Result<Vec<f64>> {
        let g_count = self.groups();
        let mut clipped = vec![false; g_count];
        loop {
            let active: Vec<usize> = (0..g_count).filter(|&g| !clipped[g]).collect();
            let n_clip = g_count - active.len();
            let target = g_count as f64 * v - n_clip as f64 * cap;
            if active.is_empty() {
                return if (target).abs() <= 1e-12 {
                    Ok(vec![cap; g_count])
                } else {
                    Err(Error::InfeasibleAllocation {
                        binding: (0..g_count).collect(),
                    })
                };
            }
            if target <= 0.0 {
                return Err(Error::InfeasibleAllocation {
                    binding: (0..g_count).filter(|&g| clipped[g]).collect(),
                });
            }
            let t = self.solve_tilt(&active, target)?;
            let mut newly = false;
            for &g in &active {
                if self.v_at(g, t) > cap * (1.0 + 1e-12) {
                    clipped[g] = true;
                    newly = true;
                }
            }
            if !newly {
                let mut out = vec![cap; g_count];
                for &g in &active {
                    out[g] = self.v_at(g, t).min(cap);
                }
                return Ok(out);
            }
        }
    }
}

/// Optimal coded NLD curve: `min{Ω_S(ρ), ϕ_L(ρ)}` on `[0, snr)`, zero from
/// snr on.
pub fn omega_c_star(spectrum: &SingularSpectrum, c: &Constellation, snr: f64, rho: f64) -> f64 {
    assert!(rho >= 0.0);
    if rho >= snr {
        return 0.0;
    }
    c.omega_s(rho).min(varphi_l_extended(spectrum, snr, rho))
}

/// Per-group MMSE curves on a two-segment grid plus the rates they imply.
#[derive(Debug, Clone)]
pub struct GroupCurves {
    pub rho: Vec<f64>,
    /// `per_group[g][k]` = Ω_{C_g}(rho[k]); zero beyond snr (not stored).
    pub per_group: Vec<Vec<f64>>,
    /// `(1/G) Σ_g` per grid point; equals Ω_C* on the allocation segment.
    pub average: Vec<f64>,
    pub rho_star: f64,
    pub snr: f64,
    /// Grid index of ρ* (start of the allocation segment).
    pub split_idx: usize,
}

/// Points per grid segment used for the group curves.
const SEGMENT_POINTS: usize = 1024;

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let ratio = (hi / lo).ln();
    let mut g: Vec<f64> = (0..points)
        .map(|i| lo * (ratio * i as f64 / (points - 1) as f64).exp())
        .collect();
    g[0] = lo;
    g[points - 1] = hi;
    g
}

/// Builds the per-group curves: all groups track `Ω_S` below ρ*, and on
/// `[ρ*, snr]` the allocation of `v = ϕ_L(ρ)` with clipping at `Ω_S(ρ)`.
pub fn group_mmse_curves(
    spectrum: &SingularSpectrum,
    c: &Constellation,
    snr: f64,
    gammas: &[f64],
) -> Result<GroupCurves> {
    let scan = find_fixed_point(spectrum, snr, c)?;
    let fp = scan.point;
    let cfg = AllocationConfig::new(gammas.to_vec(), 1.0 / fp.omega_star)?;
    let g_count = cfg.groups();

    // segment A: [0, ρ*), prior-tracking
    let mut rho = vec![0.0];
    rho.extend(log_grid(1e-4 * fp.rho_star, fp.rho_star, SEGMENT_POINTS));
    let split_idx = rho.len() - 1; // index of ρ* itself
    // segment B: (ρ*, snr]
    let seg_b = log_grid(fp.rho_star, snr, SEGMENT_POINTS);
    rho.extend_from_slice(&seg_b[1..]);

    let mut per_group = vec![Vec::with_capacity(rho.len()); g_count];
    let mut average = Vec::with_capacity(rho.len());
    for (k, &r) in rho.iter().enumerate() {
        if k <= split_idx {
            let w = c.omega_s(r);
            for col in per_group.iter_mut() {
                col.push(w);
            }
            average.push(w);
        } else {
            let v = varphi_l_extended(spectrum, snr, r).min(fp.omega_star);
            let cap = c.omega_s(r);
            let vs = cfg.solve_group_variances_capped(v, cap)?;
            let mut acc = 0.0;
            for (col, &vg) in per_group.iter_mut().zip(&vs) {
                col.push(vg);
                acc += vg;
            }
            average.push(acc / g_count as f64);
        }
    }
    Ok(GroupCurves {
        rho,
        per_group,
        average,
        rho_star: fp.rho_star,
        snr,
        split_idx,
    })
}

/// Per-group rates and the sum rate implied by a set of curves.
#[derive(Debug, Clone)]
pub struct RateReport {
    /// `R_{C_g} = ∫ Ω_{C_g} dρ` per transmit antenna, nats.
    pub per_group: Vec<f64>,
    /// `(n/G) Σ_g R_{C_g}`, nats.
    pub r_sum: f64,
    /// `n ∫ Ω_C* dρ` computed independently (Lemma-2 cross check).
    pub r_sum_area: f64,
}

/// Integrates the group curves. `n` is the transmit-antenna count used to
/// scale per-antenna rates into sum rates.
pub fn group_rates(
    spectrum: &SingularSpectrum,
    c: &Constellation,
    curves: &GroupCurves,
    n: usize,
) -> Result<RateReport> {
    let g_count = curves.per_group.len();
    // shared prior segment, integrated adaptively for accuracy at small ρ
    let below = adaptive_simpson(&mut |r| c.omega_s(r), 0.0, curves.rho_star, 1e-6);
    let seg_rho = &curves.rho[curves.split_idx..];
    let per_group: Vec<f64> = curves
        .per_group
        .iter()
        .map(|col| below + trapezoid(seg_rho, &col[curves.split_idx..]))
        .collect();
    let r_sum = n as f64 / g_count as f64 * per_group.iter().sum::<f64>();
    let area = adaptive_simpson(
        &mut |r| omega_c_star(spectrum, c, curves.snr, r),
        0.0,
        curves.snr,
        1e-6,
    );
    let r_sum_area = n as f64 * area;
    if (r_sum - r_sum_area).abs() > 2e-4 * n as f64 {
        return Err(Error::Config(format!(
            "sum-rate identity violated: {r_sum} vs {r_sum_area}"
        )));
    }
    Ok(RateReport {
        per_group,
        r_sum,
        r_sum_area,
    })
}
