//! Statistics helpers shared by the integration suites. The generators here are
//! intentionally independent of the library's counter-based RNG so that distributional
//! tests have an outside reference.

#![allow(dead_code)]

/// Standalone splitmix64 stream, unrelated to the library's keyed generator.
pub struct MicroRng(pub u64);

impl MicroRng {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Box-Muller, one value per call (the pair's second half is discarded).
    pub fn gauss(&mut self) -> f64 {
        let u1 = self.uniform().max(f64::MIN_POSITIVE);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * core::f64::consts::PI * u2).cos()
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// CDF of N(0, sigma^2).
pub fn normal_cdf(x: f64, sigma: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / (sigma * core::f64::consts::SQRT_2)))
}

/// Asymptotic Kolmogorov p-value for the scaled statistic `x = D * sqrt(n)`.
pub fn kolmogorov_p(x: f64) -> f64 {
    if x < 1e-3 {
        return 1.0;
    }
    let mut p = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64) * (j as f64) * x * x).exp();
        p += if j % 2 == 1 { 2.0 * term } else { -2.0 * term };
    }
    p.clamp(0.0, 1.0)
}

/// One-sample KS test against N(0, sigma^2); returns the p-value.
pub fn ks_test_normal(samples: &mut [f64], sigma: f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in samples.iter().enumerate() {
        let f = normal_cdf(*x, sigma);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    kolmogorov_p(d * n.sqrt())
}

/// Least-squares slope of `log2(err)` against `log2(h)`.
pub fn log_log_slope(hs: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.log2()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.log2()).collect();
    let mx = mean(&xs);
    let my = mean(&ys);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}
