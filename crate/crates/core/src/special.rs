//! Univariate and bivariate normal functions.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, GaussRule};

pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934_381_9;
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_502_415_765_284_811_045_3;

/// Largest `|x|` accepted by [`h_function`].
pub const H_FUNCTION_MAX_ABS: f64 = 37.0;

/// A correlation coefficient in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Correlation(f64);

impl Correlation {
    pub fn new(rho: f64) -> Result<Self> {
        if rho.is_nan() || rho.abs() > 1.0 {
            return Err(Error::param("rho", format!("{rho} is outside [-1, 1]")));
        }
        Ok(Correlation(rho))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_degenerate(self) -> bool {
        self.0.abs() == 1.0
    }
}

impl TryFrom<f64> for Correlation {
    type Error = Error;

    fn try_from(rho: f64) -> Result<Self> {
        Correlation::new(rho)
    }
}

impl From<Correlation> for f64 {
    fn from(c: Correlation) -> f64 {
        c.0
    }
}

pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// `Phi(x)`, accurate in both tails (erfc-based).
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Phi(x)` without cancellation.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// `1 - t R(t)` for `t >= 2`, where `R` is the Mills ratio.
///
/// With the continued fraction `R(t) = 1/(t + 1/(t + 2/(t + ...)))` and
/// `K_k = t + k/K_{k+1}`, this equals `1/(K_1 K_2)` exactly, so no
/// cancellation occurs.
fn one_minus_t_mills(t: f64) -> f64 {
    let depth = 400;
    let mut k_next = t;
    for k in (2..depth).rev() {
        k_next = t + k as f64 / k_next;
    }
    let k2 = k_next;
    let k1 = t + 1.0 / k2;
    1.0 / (k1 * k2)
}

/// `E[(N + x)_+] = phi(x) + x Phi(x)` for `N ~ N(0, 1)`.
pub fn plus_mean(x: f64) -> f64 {
    if x >= -2.0 {
        std_normal_pdf(x) + x * std_normal_cdf(x)
    } else {
        std_normal_pdf(x) * one_minus_t_mills(-x)
    }
}

/// `H(x) = sqrt(2 pi) exp(x^2/2) E[(N + x)_+]`, guarded to `|x| <= 37`.
pub fn h_function(x: f64) -> Result<f64> {
    if x.is_nan() || x.abs() > H_FUNCTION_MAX_ABS {
        return Err(Error::param("x", format!("|{x}| exceeds the H(x) range {H_FUNCTION_MAX_ABS}")));
    }
    if x >= -2.0 {
        // sqrt(2 pi) e^{x^2/2} phi(x) = 1
        Ok(1.0 + x * SQRT_2PI * (0.5 * x * x).exp() * std_normal_cdf(x))
    } else {
        Ok(one_minus_t_mills(-x))
    }
}

/// Bivariate standard normal density with correlation `rho`, `|rho| < 1`.
pub fn bivariate_pdf(x: f64, y: f64, rho: Correlation) -> Result<f64> {
    let r = rho.value();
    if r.abs() >= 1.0 {
        return Err(Error::param("rho", "bivariate density needs |rho| < 1"));
    }
    let one_m = 1.0 - r * r;
    Ok((-(x * x - 2.0 * r * x * y + y * y) / (2.0 * one_m)).exp() / (2.0 * PI * one_m.sqrt()))
}

struct GenzRules {
    // positive half-nodes and weights of the 6-, 12- and 20-point rules
    halves: [(Vec<f64>, Vec<f64>); 3],
}

fn genz_rules() -> &'static GenzRules {
    static RULES: OnceLock<GenzRules> = OnceLock::new();
    RULES.get_or_init(|| {
        let half = |rule: GaussRule| {
            let m = rule.nodes.len() / 2;
            (rule.nodes[m..].to_vec(), rule.weights[m..].to_vec())
        };
        GenzRules { halves: [half(gauss_legendre(6)), half(gauss_legendre(12)), half(gauss_legendre(20))] }
    })
}

/// Upper orthant `P(X > h, Y > k)` by Genz's refinement of the
/// Drezner-Wesolowsky method: Gauss-Legendre over the correlation
/// parameter for `|r| < 0.925`, a singularity-removing expansion otherwise.
fn bvn_upper(h: f64, k: f64, r: f64) -> f64 {
    let rules = genz_rules();
    let ng = if r.abs() < 0.3 {
        0
    } else if r.abs() < 0.75 {
        1
    } else {
        2
    };
    let (xs, ws) = (&rules.halves[ng].0, &rules.halves[ng].1);
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin();
        for (&x, &w) in xs.iter().zip(ws) {
            for sign in [-1.0, 1.0] {
                let sn = (asr * (sign * x + 1.0) / 2.0).sin();
                bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        return bvn * asr / (4.0 * PI) + std_normal_sf(h) * std_normal_sf(k);
    }
    let mut k = k;
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let as_ = (1.0 - r) * (1.0 + r);
        let mut a = as_.sqrt();
        let bs = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        bvn = a
            * (-(bs / as_ + hk) / 2.0).exp()
            * (1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0);
        if hk > -160.0 {
            let b = bs.sqrt();
            bvn -= (-hk / 2.0).exp()
                * SQRT_2PI
                * std_normal_cdf(-b / a)
                * b
                * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for (&x, &w) in xs.iter().zip(ws) {
            for sign in [-1.0, 1.0] {
                let xs2 = (a * (sign * x + 1.0)).powi(2);
                let rs = (1.0 - xs2).sqrt();
                bvn += a
                    * w
                    * ((-bs / (2.0 * xs2) - hk / (1.0 + rs)).exp() / rs
                        - (-(bs / xs2 + hk) / 2.0).exp() * (1.0 + c * xs2 * (1.0 + d * xs2)));
            }
        }
        bvn = -bvn / (2.0 * PI);
    }
    if r > 0.0 {
        bvn + std_normal_sf(h.max(k))
    } else {
        let mut v = -bvn;
        if k > h {
            v += std_normal_cdf(k) - std_normal_cdf(h);
        }
        v
    }
}

/// `Phi_2(x, y; rho) = P(X <= x, Y <= y)` for a standard bivariate normal.
/// Degenerate `rho = +-1` are handled in closed form.
pub fn bivariate_cdf(x: f64, y: f64, rho: Correlation) -> f64 {
    let r = rho.value();
    if x == f64::NEG_INFINITY || y == f64::NEG_INFINITY {
        return 0.0;
    }
    if x == f64::INFINITY {
        return std_normal_cdf(y);
    }
    if y == f64::INFINITY {
        return std_normal_cdf(x);
    }
    if r == 1.0 {
        return std_normal_cdf(x.min(y));
    }
    if r == -1.0 {
        return (std_normal_cdf(x) + std_normal_cdf(y) - 1.0).max(0.0);
    }
    if r == 0.0 {
        return std_normal_cdf(x) * std_normal_cdf(y);
    }
    bvn_upper(-x, -y, r).clamp(0.0, 1.0)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn corr(r: f64) -> Correlation {
        Correlation::new(r).unwrap()
    }

    #[test]
    fn normal_pdf_values() {
        assert!((std_normal_pdf(0.0) - 0.398_942_280_4).abs() < 1e-10);
        assert!((std_normal_pdf(1.0) - 0.241_970_724_519_143_35).abs() < 1e-15);
        assert_eq!(std_normal_pdf(1.7), std_normal_pdf(-1.7));
    }

    #[test]
    fn normal_cdf_values() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((std_normal_cdf(40.0) - 1.0).abs() < 1e-15);
        assert!((std_normal_cdf(1.0) - 0.841_344_746_068_542_95).abs() < 1e-15);
        assert!((std_normal_cdf(-10.0) / 7.619_853_024_160_526e-24 - 1.0).abs() < 1e-13);
        assert!((std_normal_cdf(-37.0) / 5.725_571_222_524_577e-300 - 1.0).abs() < 1e-12);
        for x in [-3.0, -0.4, 0.2, 2.5] {
            assert!((std_normal_cdf(-x) - (1.0 - std_normal_cdf(x))).abs() < 1e-15);
        }
    }

    #[test]
    fn plus_mean_values() {
        assert!((plus_mean(0.0) - FRAC_1_SQRT_2PI).abs() < 1e-16);
        assert!((plus_mean(1.0) - 1.083_315_470_587_686_3).abs() < 1e-15);
        assert!(plus_mean(-40.0).abs() < 1e-15);
        assert!((plus_mean(-2.0) / 8.490_702_616_829_637e-3 - 1.0).abs() < 1e-13);
        assert!((plus_mean(-5.0) / 5.346_165_533_832_815e-8 - 1.0).abs() < 1e-12);
        assert!((plus_mean(-20.0) / 1.370_012_494_729_58e-90 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn h_function_values() {
        assert!((h_function(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((h_function(1.0).unwrap() - 4.477_051_811_703_694).abs() < 1e-13);
        assert!(h_function(2.0).unwrap() > h_function(1.0).unwrap());
        let refs = [
            (-1.0, 0.344_320_457_581_201_53),
            (-2.0, 0.157_261_541_423_891_05),
            (-5.0, 0.035_959_476_423_421_18),
            (-20.0, 0.002_481_480_363_264_327),
            (-37.0, 7.288_652_902_515_657e-4),
            (2.0, 37.200_495_422_252_305),
            (5.0, 3_363_109.183_614_396),
        ];
        for (x, want) in refs {
            let got = h_function(x).unwrap();
            assert!((got / want - 1.0).abs() < 1e-12, "H({x}) = {got}, want {want}");
        }
        assert!(h_function(37.5).is_err());
        assert!(h_function(-40.0).is_err());
    }

    #[test]
    fn bivariate_pdf_values() {
        assert!((bivariate_pdf(0.0, 0.0, corr(0.0)).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-16);
        let want = 1.0 / (2.0 * PI * 0.75f64.sqrt());
        assert!((bivariate_pdf(0.0, 0.0, corr(0.5)).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.183_776_2).abs() < 1e-7);
        let a = bivariate_pdf(0.3, -1.1, corr(0.4)).unwrap();
        let b = bivariate_pdf(-1.1, 0.3, corr(0.4)).unwrap();
        assert!((a - b).abs() < 1e-16);
        let p = bivariate_pdf(0.7, -0.2, corr(0.0)).unwrap();
        assert!((p - std_normal_pdf(0.7) * std_normal_pdf(-0.2)).abs() < 1e-16);
        assert!(bivariate_pdf(0.0, 0.0, corr(1.0)).is_err());
    }

    #[test]
    fn bivariate_cdf_reference_values() {
        assert_eq!(bivariate_cdf(0.0, 0.0, corr(0.0)), 0.25);
        assert!((bivariate_cdf(0.0, 0.0, corr(0.5)) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(bivariate_cdf(0.0, 0.0, corr(-1.0)), 0.0);
        assert_eq!(bivariate_cdf(0.3, 0.7, corr(1.0)), std_normal_cdf(0.3));
        let refs = [
            (1.0, -0.5, 0.3, 0.283_138_420_244_480_95),
            (-1.0, 2.0, -0.7, 0.140_219_854_194_039_71),
            (0.5, 0.5, 0.95, 0.646_907_195_366_789_6),
            (2.0, 1.0, 0.99, 0.841_344_746_068_541_04),
            (-2.0, -1.5, 0.8, 0.016_505_929_497_809_845),
            (1.2, 0.3, -0.99, 0.502_841_751_967_244_36),
        ];
        for (x, y, r, want) in refs {
            let got = bivariate_cdf(x, y, corr(r));
            assert!((got - want).abs() < 1e-13, "Phi2({x},{y};{r}) = {got}, want {want}");
        }
        assert!(bivariate_cdf(-3.0, -3.0, corr(-0.95)) < 1e-40);
    }

    #[test]
    fn classical_orthant_identity() {
        for r in [-0.99f64, -0.6, -0.2, 0.1, 0.45, 0.8, 0.93, 0.999] {
            let want = 0.25 + r.asin() / (2.0 * PI);
            assert!((bivariate_cdf(0.0, 0.0, corr(r)) - want).abs() < 1e-14, "rho={r}");
        }
    }

    proptest! {
        #[test]
        fn plus_mean_derivative_is_cdf(x in -6.0f64..6.0) {
            let h = 1e-5;
            let fd = (plus_mean(x + h) - plus_mean(x - h)) / (2.0 * h);
            prop_assert!((fd - std_normal_cdf(x)).abs() < 1e-6);
        }

        #[test]
        fn plus_mean_reflection(x in -30.0f64..30.0) {
            prop_assert!((plus_mean(x) - plus_mean(-x) - x).abs() <= 1e-12);
        }

        #[test]
        fn plus_mean_shape(x in -30.0f64..30.0) {
            prop_assert!(plus_mean(x) >= 0.0);
            prop_assert!(plus_mean(x + 0.01) >= plus_mean(x));
        }

        #[test]
        fn plackett_identity(x in -3.0f64..3.0, y in -3.0f64..3.0, r in -0.95f64..0.95) {
            let h = 1e-5;
            let fd = (bivariate_cdf(x, y, corr(r + h)) - bivariate_cdf(x, y, corr(r - h))) / (2.0 * h);
            let pdf = bivariate_pdf(x, y, corr(r)).unwrap();
            prop_assert!((fd - pdf).abs() < 1e-6, "fd={} pdf={}", fd, pdf);
        }

        #[test]
        fn bivariate_cdf_is_monotone(x in -4.0f64..4.0, y in -4.0f64..4.0, r in -0.999f64..0.999, dx in 0.0f64..0.5) {
            let base = bivariate_cdf(x, y, corr(r));
            prop_assert!(bivariate_cdf(x + dx, y, corr(r)) >= base - 1e-15);
            prop_assert!(bivariate_cdf(x, y + dx, corr(r)) >= base - 1e-15);
            let r2 = (r + dx).min(1.0);
            prop_assert!(bivariate_cdf(x, y, corr(r2)) >= base - 1e-15);
        }

        #[test]
        fn bivariate_cdf_independence(x in -5.0f64..5.0, y in -5.0f64..5.0) {
            let want = std_normal_cdf(x) * std_normal_cdf(y);
            prop_assert!((bivariate_cdf(x, y, corr(0.0)) - want).abs() < 1e-16);
            // the quadrature branch at tiny rho must agree too
            prop_assert!((bivariate_cdf(x, y, corr(1e-12)) - want).abs() < 1e-12);
        }
    }
}
