//! Discrete signaling priors, Gray bit mapping, and the scalar AWGN MMSE
//! function that drives the receiver analysis.
//!
//! Every constellation is normalized to unit average energy. Posterior
//! quantities are for the surrogate scalar channel `r = x + ρ^{-1/2} z`
//! with `z ~ CN(0, 1)`, which is the observation model the nonlinear
//! detector stage sees. Mutual-information values are in nats.

use crate::quadrature::GaussHermite;
use crate::{Error, Result};
use num_complex::Complex64;

/// Supported prior families. `Gaussian` is an analysis-only mode with
/// closed-form MMSE `1/(1+ρ)`; it cannot modulate bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Bpsk,
    Qpsk,
    Qam16,
    Gaussian,
    Custom,
}

/// One real axis of a product constellation: PAM levels and their marginal
/// probabilities.
#[derive(Debug, Clone)]
struct PamAxis {
    levels: Vec<f64>,
    probs: Vec<f64>,
}

/// A discrete prior: symbol points indexed by their bit label, plus the
/// label width. Unit average energy and normalized probabilities are
/// enforced at construction.
#[derive(Debug, Clone)]
pub struct Constellation {
    kind: Kind,
    /// Symbol table indexed by bit label (empty in Gaussian mode).
    symbols: Vec<Complex64>,
    probs: Vec<f64>,
    bits_per_symbol: usize,
    /// Real/imaginary axis factorization when the prior is a product
    /// measure; unlocks accurate 1-D quadrature for Ω_S and I(·).
    axes: Option<(PamAxis, PamAxis)>,
}

/// 2-bit Gray code to 4-PAM level, unnormalized: 00→-3, 01→-1, 11→+1, 10→+3.
const GRAY4: [f64; 4] = [-3.0, -1.0, 3.0, 1.0];

/// Splits a discrete prior into independent real/imaginary PAM axes when
/// it is a product measure over a product support.
fn axis_decomposition(symbols: &[Complex64], probs: &[f64]) -> Option<(PamAxis, PamAxis)> {
    let mut res: Vec<f64> = Vec::new();
    let mut ims: Vec<f64> = Vec::new();
    for s in symbols {
        if !res.iter().any(|&v| v == s.re) {
            res.push(s.re);
        }
        if !ims.iter().any(|&v| v == s.im) {
            ims.push(s.im);
        }
    }
    if res.len() * ims.len() != symbols.len() {
        return None;
    }
    let marginal = |values: &[f64], pick_re: bool| -> Vec<f64> {
        values
            .iter()
            .map(|&v| {
                symbols
                    .iter()
                    .zip(probs)
                    .filter(|(s, _)| if pick_re { s.re == v } else { s.im == v })
                    .map(|(_, p)| p)
                    .sum()
            })
            .collect()
    };
    let p_re = marginal(&res, true);
    let p_im = marginal(&ims, false);
    for (s, &p) in symbols.iter().zip(probs) {
        let i = res.iter().position(|&v| v == s.re)?;
        let j = ims.iter().position(|&v| v == s.im)?;
        if (p - p_re[i] * p_im[j]).abs() > 1e-12 {
            return None;
        }
    }
    Some((
        PamAxis {
            levels: res,
            probs: p_re,
        },
        PamAxis {
            levels: ims,
            probs: p_im,
        },
    ))
}

impl PamAxis {
    fn mean(&self) -> f64 {
        self.levels.iter().zip(&self.probs).map(|(a, p)| a * p).sum()
    }

    fn variance(&self) -> f64 {
        let m = self.mean();
        self.levels
            .iter()
            .zip(&self.probs)
            .map(|(a, p)| p * (a - m) * (a - m))
            .sum()
    }

    /// Posterior mean of the level given `y = x + N(0, σ²)` at observation
    /// `y = center + sigma·t`, with exponents renormalized in log domain.
    fn posterior_mean(&self, center: f64, sigma: f64, t: f64) -> f64 {
        let mut max_e = f64::NEG_INFINITY;
        let mut exps = [0.0f64; 64];
        for (j, (&a, &q)) in self.levels.iter().zip(&self.probs).enumerate() {
            let xi = (center - a) / sigma + t;
            let e = q.ln() - 0.5 * xi * xi;
            exps[j] = e;
            max_e = max_e.max(e);
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, &a) in self.levels.iter().enumerate() {
            let w = (exps[j] - max_e).exp();
            num += a * w;
            den += w;
        }
        num / den
    }

    /// Axis MMSE of `x` from `x + N(0, σ²)` via the score identity
    /// `mmse = σ Σ_k q_k E_t[ t · x̂(a_k + σ t) ]`, whose integrand carries
    /// the same exponential scale as the value, so Gauss–Hermite keeps
    /// *relative* accuracy even deep in the low-MMSE regime.
    fn mmse(&self, sigma: f64, rule: &GaussHermite) -> f64 {
        if self.levels.len() == 1 {
            return 0.0;
        }
        let mut acc = 0.0;
        for (&a_k, &q_k) in self.levels.iter().zip(&self.probs) {
            acc += q_k * rule.expect_std_normal(|t| t * self.posterior_mean(a_k, sigma, t));
        }
        (sigma * acc).max(0.0)
    }

    /// Axis mutual information `I(x; c·x + N(0, 1/2))` in nats.
    fn mutual_info(&self, c: f64, rule: &GaussHermite) -> f64 {
        if self.levels.len() == 1 {
            return 0.0;
        }
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut acc = 0.0;
        for (&a_k, &q_k) in self.levels.iter().zip(&self.probs) {
            let e = rule.expect_std_normal(|t| {
                // r = c·a_k + t/√2, noise variance 1/2
                let mut max_e = f64::NEG_INFINITY;
                let mut exps = [0.0f64; 64];
                for (j, (&a_j, &q_j)) in self.levels.iter().zip(&self.probs).enumerate() {
                    let d = c * (a_k - a_j) + t * inv_sqrt2;
                    let e = q_j.ln() - d * d;
                    exps[j] = e;
                    max_e = max_e.max(e);
                }
                let lse = max_e
                    + exps[..self.levels.len()]
                        .iter()
                        .map(|e| (e - max_e).exp())
                        .sum::<f64>()
                        .ln();
                -0.5 * t * t - lse
            });
            acc += q_k * e;
        }
        acc
    }
}

impl Constellation {
    fn with_axes(
        kind: Kind,
        symbols: Vec<Complex64>,
        probs: Vec<f64>,
        bits_per_symbol: usize,
    ) -> Self {
        let axes = axis_decomposition(&symbols, &probs);
        Self {
            kind,
            symbols,
            probs,
            bits_per_symbol,
            axes,
        }
    }

    pub fn bpsk() -> Self {
        Self::with_axes(
            Kind::Bpsk,
            vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            vec![0.5; 2],
            1,
        )
    }

    /// Gray-labeled QPSK: bit 0 selects the real sign, bit 1 the imaginary
    /// sign, `0 ↦ +`. Label 00 maps to `(1+i)/√2`.
    pub fn qpsk() -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let mut symbols = Vec::with_capacity(4);
        for label in 0..4u32 {
            let re = if label & 0b10 == 0 { a } else { -a };
            let im = if label & 0b01 == 0 { a } else { -a };
            symbols.push(Complex64::new(re, im));
        }
        Self::with_axes(Kind::Qpsk, symbols, vec![0.25; 4], 2)
    }

    /// Gray-labeled 16-QAM: bits (0,1) select the real level, bits (2,3)
    /// the imaginary level, each pair through a 2-bit Gray map.
    pub fn qam16() -> Self {
        let scale = 1.0 / 10.0_f64.sqrt();
        let mut symbols = Vec::with_capacity(16);
        for label in 0..16u32 {
            let re = GRAY4[(label >> 2) as usize] * scale;
            let im = GRAY4[(label & 0b11) as usize] * scale;
            symbols.push(Complex64::new(re, im));
        }
        Self::with_axes(Kind::Qam16, symbols, vec![1.0 / 16.0; 16], 4)
    }

    /// Analysis-only Gaussian prior with closed-form posterior statistics.
    pub fn gaussian() -> Self {
        Self {
            kind: Kind::Gaussian,
            symbols: Vec::new(),
            probs: Vec::new(),
            bits_per_symbol: 0,
            axes: None,
        }
    }

    /// Arbitrary discrete prior; symbols are rescaled to unit average
    /// energy and probabilities renormalized. Intended for experiments and
    /// property tests; no bit labeling is attached.
    pub fn from_points(symbols: Vec<Complex64>, probs: Vec<f64>) -> Result<Self> {
        if symbols.is_empty() || symbols.len() != probs.len() {
            return Err(Error::Config(
                "constellation needs matching, nonempty symbol and probability lists".into(),
            ));
        }
        if probs.iter().any(|&p| p < 0.0) {
            return Err(Error::Config("negative prior probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if total <= 0.0 {
            return Err(Error::Config("prior probabilities sum to zero".into()));
        }
        let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
        let energy: f64 = symbols
            .iter()
            .zip(&probs)
            .map(|(s, p)| p * s.norm_sqr())
            .sum();
        if energy <= 0.0 {
            return Err(Error::Config("constellation has zero average energy".into()));
        }
        let scale = energy.sqrt().recip();
        Ok(Self::with_axes(
            Kind::Custom,
            symbols.into_iter().map(|s| s * scale).collect(),
            probs,
            0,
        ))
    }

    /// Look up a constellation by config name: `bpsk | qpsk | 16qam | gaussian`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Self::bpsk()),
            "qpsk" => Ok(Self::qpsk()),
            "16qam" | "qam16" => Ok(Self::qam16()),
            "gaussian" => Ok(Self::gaussian()),
            other => Err(Error::Config(format!("unknown constellation '{other}'"))),
        }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn is_gaussian(&self) -> bool {
        self.kind == Kind::Gaussian
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Average symbol energy under the prior (1 by construction).
    pub fn average_energy(&self) -> f64 {
        if self.is_gaussian() {
            return 1.0;
        }
        self.symbols
            .iter()
            .zip(&self.probs)
            .map(|(s, p)| p * s.norm_sqr())
            .sum()
    }

    /// Prior variance `E|x|² - |E x|²` (equals Ω_S(0)).
    pub fn prior_variance(&self) -> f64 {
        if self.is_gaussian() {
            return 1.0;
        }
        let mean: Complex64 = self
            .symbols
            .iter()
            .zip(&self.probs)
            .map(|(s, p)| s * *p)
            .sum();
        (self.average_energy() - mean.norm_sqr()).max(0.0)
    }

    /// Scalar MMSE `Ω_S(ρ)` of estimating `x` from `√ρ x + z`, by 2-D
    /// Gauss–Hermite quadrature of the expected posterior variance.
    pub fn omega_s(&self, rho: f64) -> f64 {
        self.omega_s_with_rule(rho, GaussHermite::default_rule())
    }

    /// Same as [`omega_s`](Self::omega_s) with an explicit quadrature rule
    /// (used by the order-consistency check).
    ///
    /// Product priors go through per-axis 1-D quadrature in the score form,
    /// which stays relatively accurate into the deep low-MMSE regime;
    /// non-product custom priors fall back to a 2-D expected-posterior-
    /// variance rule that is accurate at moderate ρ.
    pub fn omega_s_with_rule(&self, rho: f64, rule: &GaussHermite) -> f64 {
        assert!(rho >= 0.0, "rho must be nonnegative");
        if self.is_gaussian() {
            return 1.0 / (1.0 + rho);
        }
        if rho == 0.0 {
            return self.prior_variance();
        }
        if let Some((re, im)) = &self.axes {
            // per-dimension noise is N(0, 1/(2ρ))
            let sigma = (2.0 * rho).sqrt().recip();
            return re.mmse(sigma, rule) + im.mmse(sigma, rule);
        }
        let inv_sqrt_rho = rho.sqrt().recip();
        let mut acc = 0.0;
        for (sym, p) in self.symbols.iter().zip(&self.probs) {
            let e = rule.expect_std_complex(|zr, zi| {
                let r = sym + Complex64::new(zr, zi) * inv_sqrt_rho;
                self.posterior_mean_var(r, rho).1
            });
            acc += p * e;
        }
        acc
    }

    /// Posterior mean and variance of `x` given `r = x + ρ^{-1/2} z`.
    /// Likelihood weights are renormalized in the log domain, so the result
    /// is finite for any finite input.
    pub fn posterior_mean_var(&self, r: Complex64, rho: f64) -> (Complex64, f64) {
        if self.is_gaussian() {
            let g = rho / (1.0 + rho);
            return (r * g, 1.0 / (1.0 + rho));
        }
        let mut log_w = Vec::with_capacity(self.symbols.len());
        let mut max_lw = f64::NEG_INFINITY;
        for (sym, p) in self.symbols.iter().zip(&self.probs) {
            let lw = p.ln() - rho * (r - sym).norm_sqr();
            max_lw = max_lw.max(lw);
            log_w.push(lw);
        }
        let mut z = 0.0;
        let mut mean = Complex64::new(0.0, 0.0);
        let mut second = 0.0;
        for (sym, lw) in self.symbols.iter().zip(&log_w) {
            let w = (lw - max_lw).exp();
            z += w;
            mean += sym * w;
            second += sym.norm_sqr() * w;
        }
        mean /= z;
        let var = (second / z - mean.norm_sqr()).max(0.0);
        (mean, var)
    }

    /// Maps a bit stream to symbols, consuming `bits_per_symbol` bits per
    /// symbol, first bit = most significant label bit.
    pub fn modulate(&self, bits: &[bool]) -> Result<Vec<Complex64>> {
        let bps = self.bits_per_symbol;
        if bps == 0 {
            return Err(Error::Config(
                "constellation has no bit labeling (analysis-only mode)".into(),
            ));
        }
        if bits.len() % bps != 0 {
            return Err(Error::Framing {
                length: bits.len(),
                unit: bps,
            });
        }
        Ok(bits
            .chunks(bps)
            .map(|chunk| {
                let label = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
                self.symbols[label]
            })
            .collect())
    }

    /// Exact per-bit LLRs `log P(b=0|r) / P(b=1|r)` for one received symbol
    /// at noise precision `rho`, appended to `out`.
    pub fn demodulate_llr_into(&self, r: Complex64, rho: f64, out: &mut Vec<f64>) {
        let bps = self.bits_per_symbol;
        debug_assert!(bps > 0);
        let mut log_w = [0.0f64; 64];
        let mut max_lw = f64::NEG_INFINITY;
        for (i, (sym, p)) in self.symbols.iter().zip(&self.probs).enumerate() {
            let lw = p.ln() - rho * (r - sym).norm_sqr();
            log_w[i] = lw;
            max_lw = max_lw.max(lw);
        }
        for bit in 0..bps {
            let mask = 1usize << (bps - 1 - bit);
            let mut num = 0.0;
            let mut den = 0.0;
            for (label, lw) in log_w[..self.symbols.len()].iter().enumerate() {
                let w = (lw - max_lw).exp();
                if label & mask == 0 {
                    num += w;
                } else {
                    den += w;
                }
            }
            out.push(num.ln() - den.ln());
        }
    }

    /// Convenience form of [`demodulate_llr_into`](Self::demodulate_llr_into).
    pub fn demodulate_llr(&self, r: Complex64, rho: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.bits_per_symbol);
        self.demodulate_llr_into(r, rho, &mut out);
        out
    }

    /// Index of the symbol nearest to `r` (max-likelihood hard decision).
    pub fn hard_symbol(&self, r: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, s) in self.symbols.iter().enumerate() {
            let d = (r - s).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Hard bit decisions for one received symbol, appended to `out`.
    pub fn hard_bits_into(&self, r: Complex64, out: &mut Vec<bool>) {
        let label = self.hard_symbol(r);
        let bps = self.bits_per_symbol;
        for bit in 0..bps {
            out.push(label & (1 << (bps - 1 - bit)) != 0);
        }
    }

    /// Posterior symbol mean and variance from per-bit posterior LLRs,
    /// assuming bit independence within the symbol (exact for the Gray
    /// QPSK map, where the two bits ride orthogonal axes).
    pub fn symbol_from_bit_llrs(&self, llrs: &[f64]) -> (Complex64, f64) {
        let bps = self.bits_per_symbol;
        debug_assert_eq!(llrs.len(), bps);
        // p(bit = 1) via a numerically safe sigmoid
        let p1: Vec<f64> = llrs.iter().map(|&l| sigmoid(-l)).collect();
        let mut mean = Complex64::new(0.0, 0.0);
        let mut second = 0.0;
        for (label, sym) in self.symbols.iter().enumerate() {
            let mut p = 1.0;
            for (bit, &pb1) in p1.iter().enumerate() {
                let is_one = label & (1 << (bps - 1 - bit)) != 0;
                p *= if is_one { pb1 } else { 1.0 - pb1 };
            }
            mean += sym * p;
            second += sym.norm_sqr() * p;
        }
        (mean, (second - mean.norm_sqr()).max(0.0))
    }

    /// Mutual information `I(x; √a x + z)` in nats by direct Gauss–Hermite
    /// quadrature (independent of the MMSE path; used for I-MMSE checks).
    pub fn mutual_info(&self, a: f64) -> f64 {
        assert!(a >= 0.0);
        if self.is_gaussian() {
            return (1.0 + a).ln();
        }
        if a == 0.0 {
            return 0.0;
        }
        let rule = GaussHermite::default_rule();
        if let Some((re, im)) = &self.axes {
            let c = a.sqrt();
            return re.mutual_info(c, rule) + im.mutual_info(c, rule);
        }
        let sqrt_a = a.sqrt();
        let mut acc = 0.0;
        for (sym_k, p_k) in self.symbols.iter().zip(&self.probs) {
            let e = rule.expect_std_complex(|zr, zi| {
                let z = Complex64::new(zr, zi);
                // log p(r|x_k) - log p(r) with r = √a x_k + z
                let mut terms = Vec::with_capacity(self.symbols.len());
                let mut max_t = f64::NEG_INFINITY;
                for (sym_j, p_j) in self.symbols.iter().zip(&self.probs) {
                    let d = z + sqrt_a * (sym_k - sym_j);
                    let t = p_j.ln() - d.norm_sqr();
                    max_t = max_t.max(t);
                    terms.push(t);
                }
                let lse = max_t + terms.iter().map(|t| (t - max_t).exp()).sum::<f64>().ln();
                -z.norm_sqr() - lse
            });
            acc += p_k * e;
        }
        acc
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive_simpson;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use rand_distr::StandardNormal;

    fn all_discrete() -> Vec<Constellation> {
        vec![
            Constellation::bpsk(),
            Constellation::qpsk(),
            Constellation::qam16(),
        ]
    }

    #[test]
    fn unit_energy_and_probs() {
        for c in all_discrete() {
            assert_abs_diff_eq!(c.average_energy(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn labeling_is_bijective() {
        for c in all_discrete() {
            let mut seen = std::collections::HashSet::new();
            for s in c.symbols() {
                assert!(seen.insert((s.re.to_bits(), s.im.to_bits())), "duplicate point");
            }
            assert_eq!(c.symbols().len(), 1 << c.bits_per_symbol());
        }
    }

    #[test]
    fn qpsk_gray_anchor() {
        let c = Constellation::qpsk();
        let s = c.modulate(&[false, false]).unwrap();
        let a = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(s[0].re, a, epsilon = 1e-15);
        assert_abs_diff_eq!(s[0].im, a, epsilon = 1e-15);
    }

    #[test]
    fn omega_s_no_observation() {
        for c in all_discrete() {
            assert_abs_diff_eq!(c.omega_s(0.0), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn omega_s_gaussian_closed_form() {
        let g = Constellation::gaussian();
        for rho in [0.0, 0.3, 1.0, 7.5] {
            assert_abs_diff_eq!(g.omega_s(rho), 1.0 / (1.0 + rho), epsilon = 1e-15);
        }
    }

    /// Independent oracle: per-dimension BPSK MMSE, Ω_QPSK(ρ) = 1 - E tanh(ρ + √ρ u).
    fn qpsk_mmse_tanh(rho: f64) -> f64 {
        let rule = GaussHermite::check_rule();
        1.0 - rule.expect_std_normal(|u| (rho + rho.sqrt() * u).tanh())
    }

    #[test]
    fn qpsk_matches_tanh_oracle() {
        let c = Constellation::qpsk();
        for rho in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            assert_relative_eq!(c.omega_s(rho), qpsk_mmse_tanh(rho), max_relative = 1e-9);
        }
    }

    #[test]
    fn qpsk_matches_monte_carlo_oracle() {
        // 10^7-sample Monte Carlo of the conditional-mean estimator at rho = 1.
        let c = Constellation::qpsk();
        let rho = 1.0f64;
        let mut rng = ChaCha12Rng::seed_from_u64(0xC0FFEE);
        let n = 10_000_000usize;
        let inv_sqrt_rho = rho.sqrt().recip();
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let label = rng.random_range(0..4);
            let x = c.symbols()[label];
            let z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                * std::f64::consts::FRAC_1_SQRT_2;
            let r = x + z * inv_sqrt_rho;
            let (m, _) = c.posterior_mean_var(r, rho);
            let se = (x - m).norm_sqr();
            sum += se;
            sum_sq += se * se;
        }
        let mc = sum / n as f64;
        let stderr = ((sum_sq / n as f64 - mc * mc) / n as f64).sqrt();
        let gh = c.omega_s(rho);
        assert!(
            (gh - mc).abs() <= 3.0 * stderr,
            "GH {gh} vs MC {mc} ± {stderr}"
        );
    }

    #[test]
    fn gauss_hermite_order_consistency() {
        // Richardson-style: order-32 and order-48 rules agree tightly.
        let c = Constellation::qpsk();
        for rho in [0.1, 1.0, 10.0] {
            let a = c.omega_s_with_rule(rho, GaussHermite::default_rule());
            let b = c.omega_s_with_rule(rho, GaussHermite::check_rule());
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
    }

    #[test]
    fn omega_s_nonincreasing_and_vanishing() {
        for c in all_discrete() {
            let mut prev = f64::INFINITY;
            for i in 0..40 {
                let rho = 1e-3 * 10f64.powf(i as f64 * 0.15);
                let v = c.omega_s(rho);
                assert!(v <= prev + 1e-12, "Ω_S must be nonincreasing");
                prev = v;
            }
            assert!(c.omega_s(3e3) < 1e-9, "Ω_S must vanish at large rho");
        }
    }

    #[test]
    fn posterior_limits() {
        let c = Constellation::qpsk();
        // vanishing noise: mean → symbol, var → 0
        let s = c.symbols()[2];
        let (m, v) = c.posterior_mean_var(s, 1e9);
        assert!((m - s).norm() < 1e-9);
        assert!(v < 1e-9);
        // BPSK at r = 0: mean 0, var 1 by symmetry
        let b = Constellation::bpsk();
        let (m, v) = b.posterior_mean_var(Complex64::new(0.0, 0.0), 3.0);
        assert_abs_diff_eq!(m.norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn posterior_matches_enumeration() {
        // Brute-force 4-term Bayes sum at a specific observation.
        let c = Constellation::qpsk();
        let r = Complex64::new(0.3, 0.1);
        let rho = 2.0;
        let mut z = 0.0;
        let mut mean = Complex64::new(0.0, 0.0);
        let mut second = 0.0;
        for (s, p) in c.symbols().iter().zip(c.probs()) {
            let w = p * (-rho * (r - s).norm_sqr()).exp();
            z += w;
            mean += s * w;
            second += s.norm_sqr() * w;
        }
        mean /= z;
        let var = second / z - mean.norm_sqr();
        let (m, v) = c.posterior_mean_var(r, rho);
        assert!((m - mean).norm() < 1e-12);
        assert_abs_diff_eq!(v, var, epsilon = 1e-12);
    }

    #[test]
    fn modulate_roundtrip_high_snr() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for c in all_discrete() {
            let bits: Vec<bool> = (0..c.bits_per_symbol() * 64).map(|_| rng.random()).collect();
            let syms = c.modulate(&bits).unwrap();
            let mut back = Vec::new();
            for s in syms {
                c.hard_bits_into(s, &mut back);
            }
            assert_eq!(bits, back);
        }
    }

    #[test]
    fn llr_signs_at_anchor() {
        let c = Constellation::qpsk();
        let r = c.symbols()[0]; // label 00
        let llrs = c.demodulate_llr(r, 1e4);
        assert!(llrs.iter().all(|&l| l > 10.0), "both bit LLRs strongly positive");
    }

    #[test]
    fn framing_error() {
        let c = Constellation::qpsk();
        assert!(matches!(
            c.modulate(&[true]),
            Err(Error::Framing { length: 1, unit: 2 })
        ));
    }

    #[test]
    fn symbol_from_llrs_consistent_with_demod() {
        // Feeding exact channel LLRs back through the bit-independent
        // symbol posterior must reproduce the exact posterior for QPSK.
        let c = Constellation::qpsk();
        let r = Complex64::new(0.4, -0.2);
        let rho = 1.7;
        let llrs = c.demodulate_llr(r, rho);
        let (m_bits, v_bits) = c.symbol_from_bit_llrs(&llrs);
        let (m_exact, v_exact) = c.posterior_mean_var(r, rho);
        assert!((m_bits - m_exact).norm() < 1e-12);
        assert_abs_diff_eq!(v_bits, v_exact, epsilon = 1e-12);
    }

    #[test]
    fn immse_self_consistency() {
        // ∫_0^a Ω_S dρ = I(x; √a x + z) within 1e-4 nats for QPSK.
        let c = Constellation::qpsk();
        for a in [0.5, 2.0, 8.0, 20.0] {
            let integral = adaptive_simpson(&mut |rho| c.omega_s(rho), 0.0, a, 1e-6);
            let mi = c.mutual_info(a);
            assert_abs_diff_eq!(integral, mi, epsilon = 1e-4);
        }
    }
}
