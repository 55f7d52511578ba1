//! Right-unitarily-invariant channel ensembles held in SVD-factored form.
//!
//! A channel is `A = U Λ V` with independent Haar-distributed `U` (m×m) and
//! `V` (n×n) and a known diagonal `Λ`, so the singular spectrum is exact by
//! construction and no numerical SVD is ever needed downstream. `A` itself
//! is only materialized in small-dimension tests.

use crate::{Error, Result};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use ndarray_linalg::{SVDInto, QR};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Nonincreasing singular values of an m×n channel, normalized so the
/// per-transmit-antenna energy `(1/n) Σ σ_i²` equals 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    sigmas: Vec<f64>,
    m: usize,
    n: usize,
}

impl SingularSpectrum {
    /// Validates and normalizes raw singular values (length `min(m, n)`,
    /// nonnegative, nonincreasing).
    pub fn new(mut sigmas: Vec<f64>, m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidDimension);
        }
        if sigmas.len() != m.min(n) {
            return Err(Error::Config(format!(
                "expected {} singular values, got {}",
                m.min(n),
                sigmas.len()
            )));
        }
        if sigmas.iter().any(|&s| !(s >= 0.0)) {
            return Err(Error::Config("singular values must be nonnegative".into()));
        }
        if sigmas.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Config("singular values must be nonincreasing".into()));
        }
        let sum_sq: f64 = sigmas.iter().map(|s| s * s).sum();
        if sum_sq <= 0.0 {
            return Err(Error::Config("spectrum has zero energy".into()));
        }
        let scale = (n as f64 / sum_sq).sqrt();
        for s in &mut sigmas {
            *s *= scale;
        }
        Ok(Self { sigmas, m, n })
    }

    /// Geometrically spaced spectrum with max/min ratio exactly `kappa`,
    /// the standard stress model for ill-conditioned ensembles.
    pub fn conditioned(m: usize, n: usize, kappa: f64) -> Result<Self> {
        if kappa < 1.0 || !kappa.is_finite() {
            return Err(Error::InvalidConditionNumber(kappa));
        }
        if m == 0 || n == 0 {
            return Err(Error::InvalidDimension);
        }
        let t = m.min(n);
        let sigmas: Vec<f64> = (0..t)
            .map(|i| {
                if t == 1 {
                    1.0
                } else {
                    kappa.powf(-(i as f64) / (t as f64 - 1.0))
                }
            })
            .collect();
        Self::new(sigmas, m, n)
    }

    /// Flat spectrum (κ = 1).
    pub fn flat(m: usize, n: usize) -> Result<Self> {
        Self::conditioned(m, n, 1.0)
    }

    /// Singular values of one seeded IID complex Gaussian draw
    /// (Rayleigh-fading special case), renormalized.
    pub fn iid_gaussian(m: usize, n: usize, seed: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidDimension);
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let g = complex_gaussian_matrix(m, n, &mut rng);
        let (_, s, _) = g.svd_into(false, false)?;
        // LAPACK returns descending values
        Self::new(s.to_vec(), m, n)
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Channel load β = n/m.
    pub fn beta(&self) -> f64 {
        self.n as f64 / self.m as f64
    }

    /// The n eigenvalues of `A^H A`: squared singular values padded with
    /// `n - min(m, n)` zeros.
    pub fn eigenvalues(&self) -> impl Iterator<Item = f64> + '_ {
        self.sigmas
            .iter()
            .map(|s| s * s)
            .chain(std::iter::repeat(0.0).take(self.n - self.sigmas.len()))
    }

    /// Number of structurally zero eigenvalues of `A^H A`.
    pub fn zero_eigenvalue_count(&self) -> usize {
        self.n - self.sigmas.len() + self.sigmas.iter().filter(|&&s| s == 0.0).count()
    }

    /// Linear-stage MMSE functional
    /// `Ω_L(ρ) = (1/n) Σ_i 1/(snr·λ_i + ρ)` over the n padded eigenvalues.
    ///
    /// `rho = 0` is rejected when zero eigenvalues are present (the caller
    /// must keep `rho > 0` when β > 1).
    pub fn omega_l(&self, snr: f64, rho: f64) -> Result<f64> {
        debug_assert!(snr > 0.0, "snr must be positive");
        debug_assert!(rho >= 0.0, "rho must be nonnegative");
        if rho == 0.0 {
            let zeros = self.zero_eigenvalue_count();
            if zeros > 0 {
                return Err(Error::Singularity { zero_count: zeros });
            }
        }
        let sum: f64 = self.eigenvalues().map(|lam| 1.0 / (snr * lam + rho)).sum();
        Ok(sum / self.n as f64)
    }
}

/// Fills an m×n matrix with IID `CN(0, 1)` entries, row-major order.
fn complex_gaussian_matrix(m: usize, n: usize, rng: &mut impl Rng) -> Array2<Complex64> {
    Array2::from_shape_simple_fn((m, n), || {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Draws a Haar-distributed unitary by QR of an IID complex Gaussian
/// matrix, with the triangular factor's diagonal phase folded into Q so the
/// decomposition (and hence the distribution) is unique.
pub fn haar_unitary_with_rng(dim: usize, rng: &mut impl Rng) -> Result<Array2<Complex64>> {
    if dim == 0 {
        return Err(Error::InvalidDimension);
    }
    let g = complex_gaussian_matrix(dim, dim, rng);
    let (mut q, r) = g.qr()?;
    for j in 0..dim {
        let d = r[[j, j]];
        let norm = d.norm();
        let phase = if norm > 0.0 {
            d / norm
        } else {
            Complex64::new(1.0, 0.0)
        };
        q.column_mut(j).mapv_inplace(|x| x * phase);
    }
    Ok(q)
}

/// Seeded convenience wrapper around [`haar_unitary_with_rng`].
pub fn haar_unitary(dim: usize, seed: u64) -> Result<Array2<Complex64>> {
    haar_unitary_with_rng(dim, &mut ChaCha12Rng::seed_from_u64(seed))
}

/// A channel `A = U Λ V` stored factored. Immutable after construction and
/// safe to share read-only across parallel Monte-Carlo workers.
#[derive(Debug, Clone)]
pub struct ChannelMatrix {
    u: Array2<Complex64>,
    v: Array2<Complex64>,
    spectrum: SingularSpectrum,
}

impl ChannelMatrix {
    /// Draws fresh Haar rotations around the given spectrum.
    pub fn sample(spectrum: SingularSpectrum, seed: u64) -> Result<Self> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let u = haar_unitary_with_rng(spectrum.m(), &mut rng)?;
        let v = haar_unitary_with_rng(spectrum.n(), &mut rng)?;
        Ok(Self { u, v, spectrum })
    }

    /// Assembles a channel from explicit factors (mainly for tests).
    pub fn from_parts(
        u: Array2<Complex64>,
        v: Array2<Complex64>,
        spectrum: SingularSpectrum,
    ) -> Result<Self> {
        if u.nrows() != spectrum.m()
            || u.ncols() != spectrum.m()
            || v.nrows() != spectrum.n()
            || v.ncols() != spectrum.n()
        {
            return Err(Error::Config("factor dimensions do not match spectrum".into()));
        }
        Ok(Self { u, v, spectrum })
    }

    /// Identity channel of size n (flat spectrum, U = V = I).
    pub fn identity(n: usize) -> Result<Self> {
        let eye = Array2::from_diag_elem(n, Complex64::new(1.0, 0.0));
        Self::from_parts(eye.clone(), eye, SingularSpectrum::flat(n, n)?)
    }

    pub fn spectrum(&self) -> &SingularSpectrum {
        &self.spectrum
    }

    pub fn m(&self) -> usize {
        self.spectrum.m()
    }

    pub fn n(&self) -> usize {
        self.spectrum.n()
    }

    pub fn u(&self) -> ArrayView2<'_, Complex64> {
        self.u.view()
    }

    pub fn v(&self) -> ArrayView2<'_, Complex64> {
        self.v.view()
    }

    /// `V x`.
    pub fn rotate(&self, x: ArrayView2<'_, Complex64>) -> Array2<Complex64> {
        self.v.dot(&x)
    }

    /// `V^H w`, computed as `conj(V^T conj(w))` to avoid materializing the
    /// adjoint.
    pub fn rotate_back(&self, w: ArrayView2<'_, Complex64>) -> Array2<Complex64> {
        let mut out = self.v.t().dot(&w.mapv(|z| z.conj()));
        out.mapv_inplace(|z| z.conj());
        out
    }

    /// `U^H y`.
    pub fn receive_basis(&self, y: ArrayView2<'_, Complex64>) -> Array2<Complex64> {
        let mut out = self.u.t().dot(&y.mapv(|z| z.conj()));
        out.mapv_inplace(|z| z.conj());
        out
    }

    /// `A x = U Λ (V x)` for a frame of column vectors.
    pub fn apply(&self, x: ArrayView2<'_, Complex64>) -> Array2<Complex64> {
        let w = self.rotate(x);
        let t = self.spectrum.sigmas().len();
        let cols = x.ncols();
        let mut lifted = Array2::<Complex64>::zeros((self.m(), cols));
        for (i, &s) in self.spectrum.sigmas().iter().enumerate().take(t) {
            let row = w.index_axis(Axis(0), i);
            lifted
                .index_axis_mut(Axis(0), i)
                .assign(&row.mapv(|z| z * s));
        }
        self.u.dot(&lifted)
    }

    /// Single-vector convenience form of [`apply`](Self::apply).
    pub fn apply_vec(&self, x: ArrayView1<'_, Complex64>) -> Array1<Complex64> {
        let x2 = x.insert_axis(Axis(1));
        let y = self.apply(x2);
        y.index_axis(Axis(1), 0).to_owned()
    }

    /// Dense `A = U Λ V`; small-dimension tests only.
    pub fn materialize(&self) -> Array2<Complex64> {
        let t = self.spectrum.sigmas().len();
        let mut lv = Array2::<Complex64>::zeros((self.m(), self.n()));
        for (i, &s) in self.spectrum.sigmas().iter().enumerate().take(t) {
            let row = self.v.index_axis(Axis(0), i);
            lv.index_axis_mut(Axis(0), i).assign(&row.mapv(|z| z * s));
        }
        self.u.dot(&lv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray_linalg::SVD;

    fn max_dev_from_identity(q: &Array2<Complex64>) -> f64 {
        let qh = q.t().mapv(|z| z.conj());
        let prod = qh.dot(q);
        let n = q.nrows();
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let e = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((prod[[i, j]] - Complex64::new(e, 0.0)).norm());
            }
        }
        dev
    }

    #[test]
    fn haar_dim_one_is_unit_modulus() {
        let u = haar_unitary(1, 3).unwrap();
        assert_abs_diff_eq!(u[[0, 0]].norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn haar_is_unitary() {
        for seed in 0..4u64 {
            let u = haar_unitary(4, seed).unwrap();
            assert!(max_dev_from_identity(&u) <= 1e-10);
        }
        let u = haar_unitary(64, 11).unwrap();
        assert!(max_dev_from_identity(&u) <= 1e-10);
    }

    #[test]
    fn haar_zero_dim_rejected() {
        assert!(matches!(haar_unitary(0, 1), Err(Error::InvalidDimension)));
    }

    #[test]
    fn haar_first_moment() {
        // E |U_11|^2 = 1/dim for Haar; Monte-Carlo oracle with 10^4 draws.
        let dim = 32;
        let samples = 10_000;
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..samples {
            let u = haar_unitary_with_rng(dim, &mut rng).unwrap();
            let v = u[[0, 0]].norm_sqr();
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / samples as f64;
        let stderr = ((sum_sq / samples as f64 - mean * mean) / samples as f64).sqrt();
        let expect = 1.0 / dim as f64;
        assert!(
            (mean - expect).abs() <= 3.0 * stderr,
            "mean {mean} vs {expect} ± {stderr}"
        );
    }

    #[test]
    fn haar_seed_reproducible() {
        let a = haar_unitary(16, 5).unwrap();
        let b = haar_unitary(16, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn conditioned_flat_case() {
        let s = SingularSpectrum::conditioned(4, 4, 1.0).unwrap();
        for &x in s.sigmas() {
            assert_abs_diff_eq!(x, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn conditioned_ratio_and_normalization() {
        let s = SingularSpectrum::conditioned(2, 3, 50.0).unwrap();
        let sig = s.sigmas();
        assert_abs_diff_eq!(sig[0] / sig[1], 50.0, epsilon = 1e-12);
        let trace: f64 = sig.iter().map(|x| x * x).sum::<f64>() / 3.0;
        assert_abs_diff_eq!(trace, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn conditioned_two_by_two_closed_form() {
        // σ = (c, c/4) with c²(1 + 1/16)/2 = 1 → c = √(32/17)
        let s = SingularSpectrum::conditioned(2, 2, 4.0).unwrap();
        let c = (32.0f64 / 17.0).sqrt();
        assert_abs_diff_eq!(s.sigmas()[0], c, epsilon = 1e-12);
        assert_abs_diff_eq!(s.sigmas()[1], c / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn conditioned_rejects_bad_kappa() {
        assert!(matches!(
            SingularSpectrum::conditioned(2, 2, 0.5),
            Err(Error::InvalidConditionNumber(_))
        ));
    }

    #[test]
    fn iid_degenerate_dimension() {
        let s = SingularSpectrum::iid_gaussian(1, 1, 9).unwrap();
        assert_abs_diff_eq!(s.sigmas()[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn iid_normalization_invariant() {
        for (m, n, seed) in [(8, 8, 0u64), (16, 24, 1), (24, 16, 2)] {
            let s = SingularSpectrum::iid_gaussian(m, n, seed).unwrap();
            let trace: f64 = s.sigmas().iter().map(|x| x * x).sum::<f64>() / n as f64;
            assert_abs_diff_eq!(trace, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn omega_l_flat_closed_form() {
        let s = SingularSpectrum::flat(4, 4).unwrap();
        assert_abs_diff_eq!(s.omega_l(1.0, 1.0).unwrap(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn omega_l_zero_padded_enumeration() {
        // β = 1.5 flat spectrum: λ = (1.5, 1.5, 0); snr = 2, rho = 1.
        let s = SingularSpectrum::flat(2, 3).unwrap();
        let got = s.omega_l(2.0, 1.0).unwrap();
        assert_abs_diff_eq!(got, (0.25 + 0.25 + 1.0) / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn omega_l_singularity_at_zero_rho() {
        let s = SingularSpectrum::flat(2, 3).unwrap();
        assert!(matches!(
            s.omega_l(1.0, 0.0),
            Err(Error::Singularity { zero_count: 1 })
        ));
        // full-rank square case is fine at rho = 0
        let f = SingularSpectrum::flat(3, 3).unwrap();
        assert_abs_diff_eq!(f.omega_l(2.0, 0.0).unwrap(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn omega_l_monotone_convex_vanishing() {
        let s = SingularSpectrum::conditioned(6, 9, 25.0).unwrap();
        let grid: Vec<f64> = (0..60).map(|i| 1e-2 * 1.25f64.powi(i)).collect();
        let vals: Vec<f64> = grid.iter().map(|&r| s.omega_l(3.0, r).unwrap()).collect();
        for w in vals.windows(2) {
            assert!(w[1] < w[0], "Ω_L strictly decreasing");
        }
        // sampled convexity on a uniform sub-grid
        for i in 1..30 {
            let h = 0.1;
            let r = 0.2 + i as f64 * h;
            let f0 = s.omega_l(3.0, r - h).unwrap();
            let f1 = s.omega_l(3.0, r).unwrap();
            let f2 = s.omega_l(3.0, r + h).unwrap();
            assert!(f0 + f2 - 2.0 * f1 >= -1e-12, "Ω_L convex");
        }
        assert!(s.omega_l(3.0, 1e9).unwrap() < 1e-8);
    }

    #[test]
    fn channel_reconstruction_matches_spectrum() {
        for (m, n) in [(4, 4), (4, 6), (6, 4)] {
            let spec = SingularSpectrum::conditioned(m, n, 10.0).unwrap();
            let ch = ChannelMatrix::sample(spec.clone(), 77).unwrap();
            assert!(max_dev_from_identity(&ch.u().to_owned()) <= 1e-10);
            assert!(max_dev_from_identity(&ch.v().to_owned()) <= 1e-10);
            let a = ch.materialize();
            let (_, s, _) = a.svd(false, false).unwrap();
            for (got, want) in s.iter().zip(spec.sigmas()) {
                assert_abs_diff_eq!(got, want, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn apply_agrees_with_dense() {
        let spec = SingularSpectrum::conditioned(5, 7, 8.0).unwrap();
        let ch = ChannelMatrix::sample(spec, 3).unwrap();
        let a = ch.materialize();
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let x = complex_gaussian_matrix(7, 3, &mut rng);
        let direct = a.dot(&x);
        let fact = ch.apply(x.view());
        for (p, q) in direct.iter().zip(fact.iter()) {
            assert!((p - q).norm() < 1e-10);
        }
    }

    #[test]
    fn unit_power_output() {
        // E ||A x||² / n ≈ 1 for unit-power IID input.
        let spec = SingularSpectrum::conditioned(48, 64, 50.0).unwrap();
        let ch = ChannelMatrix::sample(spec, 123).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let mut acc = 0.0;
        let trials = 200;
        for _ in 0..trials {
            let x = complex_gaussian_matrix(64, 1, &mut rng);
            let y = ch.apply(x.view());
            acc += y.iter().map(|z| z.norm_sqr()).sum::<f64>() / 64.0;
        }
        let mean = acc / trials as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean output power {mean}");
    }
}
