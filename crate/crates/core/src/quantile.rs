//! Inverse CDFs used by the interval constructions.
//!
//! The standard-normal quantile follows the AS241 rational approximation
//! (double-precision branch), the chi-square quantile runs a bracketed Newton
//! iteration on the regularized incomplete gamma. Both are accurate well past
//! the 1e-10 the interval contracts require.

use crate::error::{Error, Result};
use statrs::function::gamma::{gamma_lr, ln_gamma};

/// Quantile of the standard normal distribution, `p` strictly inside (0, 1).
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "normal quantile requires probability in (0,1), got {p}"
        )));
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return Ok(q * poly(&A, r) / (poly(&B, r) * r + 1.0));
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let value = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / (poly(&D, r) * r + 1.0)
    } else {
        let r = r - 5.0;
        poly(&E, r) / (poly(&F, r) * r + 1.0)
    };
    Ok(if q < 0.0 { -value } else { value })
}

/// Two-sided critical value `z` with `P(|Z| <= z) = level`.
pub fn two_sided_normal_critical(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "confidence level must be in (0,1), got {level}"
        )));
    }
    std_normal_quantile(0.5 + level / 2.0)
}

/// Quantile of the chi-square distribution with `df` degrees of freedom.
pub fn chi_square_quantile(df: usize, p: f64) -> Result<f64> {
    if df == 0 {
        return Err(Error::InvalidConfig(
            "chi-square quantile requires df >= 1".into(),
        ));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "chi-square quantile requires probability in (0,1), got {p}"
        )));
    }
    let a = df as f64 / 2.0;
    let cdf = |x: f64| gamma_lr(a, x / 2.0);
    // Wilson-Hilferty start, then establish a bracket.
    let z = std_normal_quantile(p)?;
    let d = 2.0 / (9.0 * df as f64);
    let wh = df as f64 * (1.0 - d + z * d.sqrt()).powi(3);
    let mut x = if wh.is_finite() && wh > 0.0 { wh } else { df as f64 };
    let (mut lo, mut hi) = (0.0_f64, x.max(df as f64));
    while cdf(hi) < p {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numerical("chi-square quantile bracket diverged".into()));
        }
    }
    x = x.clamp(lo + (hi - lo) * 1e-6, hi - (hi - lo) * 1e-6);
    let ln_norm = a * std::f64::consts::LN_2 + ln_gamma(a);
    for _ in 0..200 {
        let f = cdf(x) - p;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        // Newton step on the CDF; density evaluated in log space.
        let ln_pdf = (a - 1.0) * x.ln() - x / 2.0 - ln_norm;
        let mut next = if ln_pdf > -700.0 {
            x - f / ln_pdf.exp()
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (hi - lo) <= 1e-14 * hi.max(1e-300) || next == x {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

#[inline]
fn poly(coef: &[f64], r: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * r + c)
}

const A: [f64; 8] = [
    3.387_132_872_796_366_608e0,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const B: [f64; 7] = [
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_3e0,
    4.630_337_846_156_545_295_9e0,
    5.769_497_221_460_691_405_5e0,
    3.647_848_324_763_204_605e0,
    1.270_458_252_452_368_382_6e0,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_3e-2,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 7] = [
    2.053_191_626_637_758_821_9e0,
    1.676_384_830_183_803_849_4e0,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_7e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_2e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2e0,
    5.463_784_911_164_114_369_9e0,
    1.784_826_539_917_291_335_8e0,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_2e-5,
    2.010_334_399_292_288_132_6e-7,
];
const F: [f64; 7] = [
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_2e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_6e-15,
];

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed independently with 30-digit arithmetic.
    const NORMAL_CASES: [(f64, f64); 8] = [
        (0.975, 1.9599639845400542),
        (0.95, 1.6448536269514727),
        (0.995, 2.5758293035489008),
        (0.9, 1.2815515655446004),
        (0.75, 0.6744897501960817),
        (0.025, -1.9599639845400542),
        (0.999999, 4.753424308822899),
        (1e-10, -6.361340902404056),
    ];

    const CHI2_CASES: [(usize, f64, f64); 8] = [
        (1, 0.95, 3.841458820694126),
        (2, 0.95, 5.991464547107982),
        (3, 0.95, 7.81472790325118),
        (5, 0.99, 15.08627246938899),
        (10, 0.5, 9.341817765591967),
        (1, 0.5, 0.45493642311957274),
        (3, 0.05, 0.3518463177492714),
        (7, 0.975, 16.012764274629324),
    ];

    #[test]
    fn normal_quantile_matches_reference() {
        for (p, expect) in NORMAL_CASES {
            let got = std_normal_quantile(p).unwrap();
            assert!(
                (got - expect).abs() <= 1e-12 * expect.abs().max(1.0),
                "p={p}: got {got}, expected {expect}"
            );
        }
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
    }

    #[test]
    fn chi_square_quantile_matches_reference() {
        for (df, p, expect) in CHI2_CASES {
            let got = chi_square_quantile(df, p).unwrap();
            assert!(
                (got - expect).abs() <= 1e-11 * expect,
                "df={df} p={p}: got {got}, expected {expect}"
            );
        }
    }

    #[test]
    fn chi_square_one_df_equals_squared_normal() {
        for level in [0.5, 0.8, 0.9, 0.95, 0.99, 0.999] {
            let z = two_sided_normal_critical(level).unwrap();
            let c = chi_square_quantile(1, level).unwrap();
            assert!(
                (c - z * z).abs() <= 1e-10 * (z * z),
                "level={level}: chi2={c}, z^2={}",
                z * z
            );
        }
    }

    #[test]
    fn rejects_out_of_range_probabilities() {
        assert!(std_normal_quantile(0.0).is_err());
        assert!(std_normal_quantile(1.0).is_err());
        assert!(std_normal_quantile(f64::NAN).is_err());
        assert!(chi_square_quantile(0, 0.5).is_err());
        assert!(chi_square_quantile(2, 1.0).is_err());
    }

    #[test]
    fn quantile_is_monotone() {
        let mut last = f64::NEG_INFINITY;
        for i in 1..200 {
            let p = i as f64 / 200.0;
            let v = std_normal_quantile(p).unwrap();
            assert!(v > last);
            last = v;
        }
    }
}
