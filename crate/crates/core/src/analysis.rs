//! Closed-form regret bounds, growth-shape fits and confidence bands.
//!
//! All logarithms are natural.

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Scalar};

/// `6 + 4 sqrt(2)`, the per-tuple constant shared by both mUCB bounds.
pub fn bound_constant<F: Scalar>() -> F {
    F::from_f64_lossy(6.0) + F::from_f64_lossy(4.0) * F::SQRT_2()
}

/// Gaps and horizon a bound is evaluated at.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundInput<F> {
    gaps: Vec<F>,
    k_max: usize,
    horizon: F,
}

impl<F: Scalar> BoundInput<F> {
    /// `horizon` may be any real `>= 2`.
    pub fn new(gaps: Vec<F>, horizon: F) -> Result<Self> {
        if gaps.is_empty() {
            return Err(Error::InvalidInput("at least one gap is required".into()));
        }
        if gaps.iter().any(|&g| !(g >= F::zero()) || !g.is_finite()) {
            return Err(Error::InvalidInput(
                "gaps must be finite and non-negative".into(),
            ));
        }
        if !gaps.iter().any(|&g| g == F::zero()) {
            return Err(Error::InvalidInput(
                "one tuple must be optimal (zero gap)".into(),
            ));
        }
        if !(horizon >= F::from_f64_lossy(2.0)) {
            return Err(Error::InvalidInput("bounds need a horizon T >= 2".into()));
        }
        Ok(Self {
            k_max: gaps.len(),
            gaps,
            horizon,
        })
    }

    pub fn gaps(&self) -> &[F] {
        &self.gaps
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn horizon(&self) -> F {
        self.horizon
    }

    pub fn with_horizon(&self, horizon: F) -> Result<Self> {
        Self::new(self.gaps.clone(), horizon)
    }
}

/// Gap-dependent bound:
/// `3 * sum_a gap_a + sum_{gap_a > 0} (6 + 4 sqrt 2) ln T / gap_a`.
pub fn bound_thm1<F: Scalar>(input: &BoundInput<F>) -> F {
    let c = bound_constant::<F>();
    let ln_t = input.horizon.ln();
    let three = F::from_f64_lossy(3.0);
    input.gaps.iter().fold(F::zero(), |acc, &g| {
        let tail = if g > F::zero() {
            c * ln_t / g
        } else {
            F::zero()
        };
        acc + three * g + tail
    })
}

/// Gap-independent bound with `eps = sqrt(ln T / T)`:
/// `3 k_max + (1 + (6 + 4 sqrt 2) |{a : gap_a > eps}|) sqrt(T ln T)`.
pub fn bound_thm2<F: Scalar>(input: &BoundInput<F>) -> F {
    let t = input.horizon;
    let ln_t = t.ln();
    let eps = (ln_t / t).sqrt();
    let wide = input.gaps.iter().filter(|&&g| g > eps).count() as u64;
    F::from_count(3 * input.k_max as u64)
        + (F::one() + bound_constant::<F>() * F::from_count(wide)) * (t * ln_t).sqrt()
}

/// Least-squares line `value ~ intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit<F> {
    pub slope: F,
    pub intercept: F,
    pub r_squared: F,
}

/// Fits of the same curve against `ln t` and against `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit<F> {
    pub fit_log: LineFit<F>,
    pub fit_linear: LineFit<F>,
}

impl<F: Scalar> GrowthFit<F> {
    pub fn looks_logarithmic(&self) -> bool {
        self.fit_log.r_squared > self.fit_linear.r_squared
    }
}

fn least_squares<F: Scalar>(xs: &[F], ys: &[F]) -> LineFit<F> {
    let n = F::from_count(xs.len() as u64);
    let mx = xs.iter().fold(F::zero(), |a, &x| a + x) / n;
    let my = ys.iter().fold(F::zero(), |a, &y| a + y) / n;
    let (mut sxx, mut sxy, mut syy) = (F::zero(), F::zero(), F::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    let slope = if sxx > F::zero() {
        sxy / sxx
    } else {
        F::zero()
    };
    let intercept = my - slope * mx;
    let ss_res = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .fold(F::zero(), |a, r| a + r);
    // a flat series is fit exactly by any line
    let r_squared = if syy > F::zero() {
        F::one() - ss_res / syy
    } else {
        F::one()
    };
    LineFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Fits the upper half of `checkpoints` (by position) against `ln t` and
/// against `t`; the early half is dominated by forced exploration.
pub fn growth_classifier<F: Scalar>(checkpoints: &[(u64, F)]) -> Result<GrowthFit<F>> {
    if checkpoints.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "growth fits need at least 10 checkpoints, got {}",
            checkpoints.len()
        )));
    }
    let first = checkpoints.first().unwrap().0.max(1) as f64;
    let last = checkpoints.last().unwrap().0 as f64;
    if last / first < 100.0 {
        return Err(Error::InsufficientData(
            "checkpoints must span at least two decades".into(),
        ));
    }
    let upper = &checkpoints[checkpoints.len() / 2..];
    if upper.len() < 3 {
        return Err(Error::InsufficientData(
            "fewer than 3 checkpoints in the upper half".into(),
        ));
    }
    let ys: Vec<F> = upper.iter().map(|&(_, y)| y).collect();
    let ts: Vec<F> = upper.iter().map(|&(t, _)| F::from_count(t)).collect();
    let ln_ts: Vec<F> = ts.iter().map(|t| t.ln()).collect();
    Ok(GrowthFit {
        fit_log: least_squares(&ln_ts, &ys),
        fit_linear: least_squares(&ts, &ys),
    })
}

/// Sample mean and sample standard deviation (`n - 1` denominator); the
/// deviation of a single value is zero.
pub fn mean_and_std<F: Scalar>(values: &[F]) -> (F, F) {
    let n = values.len() as u64;
    if n == 0 {
        return (F::nan(), F::nan());
    }
    let mut sum = CompensatedSum::new();
    for &v in values {
        sum.add(v);
    }
    let mean = sum.value() / F::from_count(n);
    if n == 1 {
        return (mean, F::zero());
    }
    let mut ss = CompensatedSum::new();
    for &v in values {
        ss.add((v - mean) * (v - mean));
    }
    (mean, (ss.value() / F::from_count(n - 1)).sqrt())
}

/// Per-checkpoint mean with a band of two standard deviations each side.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceBand<F> {
    pub mean: Vec<F>,
    pub std: Vec<F>,
    pub lower: Vec<F>,
    pub upper: Vec<F>,
}

/// `per_run` is a `runs x checkpoints` matrix.
pub fn confidence_band<F: Scalar>(per_run: &[Vec<F>]) -> Result<ConfidenceBand<F>> {
    if per_run.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "a confidence band needs at least 2 runs, got {}",
            per_run.len()
        )));
    }
    let width = per_run[0].len();
    if per_run.iter().any(|r| r.len() != width) {
        return Err(Error::InvalidInput(
            "runs have different checkpoint counts".into(),
        ));
    }
    let two = F::from_f64_lossy(2.0);
    let mut band = ConfidenceBand {
        mean: Vec::with_capacity(width),
        std: Vec::with_capacity(width),
        lower: Vec::with_capacity(width),
        upper: Vec::with_capacity(width),
    };
    let mut column = Vec::with_capacity(per_run.len());
    for c in 0..width {
        column.clear();
        column.extend(per_run.iter().map(|r| r[c]));
        let (m, s) = mean_and_std(&column);
        band.mean.push(m);
        band.std.push(s);
        band.lower.push(m - two * s);
        band.upper.push(m + two * s);
    }
    Ok(band)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thm1_examples() {
        let zero = BoundInput::new(vec![0.0f64, 0.0], 100.0).unwrap();
        assert_eq!(bound_thm1(&zero), 0.0);

        let e = BoundInput::new(vec![0.0f64, 0.5], std::f64::consts::E).unwrap();
        let expected = 1.5 + 2.0 * (6.0 + 4.0 * 2f64.sqrt());
        assert!((bound_thm1(&e) - expected).abs() < 1e-12);
        assert!((bound_thm1(&e) - 24.8137).abs() < 1e-4);
    }

    #[test]
    fn thm2_examples() {
        let t = 1e5f64;
        let eps = (t.ln() / t).sqrt();
        let small = BoundInput::new(vec![0.0, eps, eps / 2.0], t).unwrap();
        assert!((bound_thm2(&small) - (9.0 + (t * t.ln()).sqrt())).abs() < 1e-9);

        let mut gaps = vec![0.0];
        gaps.extend([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]);
        let input = BoundInput::new(gaps, t).unwrap();
        let expected = 24.0 + (1.0 + 7.0 * (6.0 + 4.0 * 2f64.sqrt())) * (t * t.ln()).sqrt();
        assert!((bound_thm2(&input) - expected).abs() < 1e-6);
        // sqrt(T ln T) = 1072.983..., so the bound is 88650.229...
        assert!(
            (bound_thm2(&input) - 88_650.229).abs() < 1e-3,
            "{}",
            bound_thm2(&input)
        );
    }

    #[test]
    fn bound_input_validation() {
        assert!(BoundInput::new(vec![0.1f64, 0.2], 10.0).is_err());
        assert!(BoundInput::new(vec![0.0f64, -0.2], 10.0).is_err());
        assert!(BoundInput::new(vec![0.0f64], 1.5).is_err());
        assert!(BoundInput::<f64>::new(vec![], 10.0).is_err());
    }

    #[test]
    fn growth_classifier_recognizes_exact_curves() {
        let grid = crate::simulator::default_grid(100_000);
        let log: Vec<(u64, f64)> = grid.iter().map(|&t| (t, 7.0 * (t as f64).ln())).collect();
        let fit = growth_classifier(&log).unwrap();
        assert!(fit.fit_log.r_squared > 0.999);
        assert!((fit.fit_log.slope - 7.0).abs() < 1e-9);
        assert!(fit.looks_logarithmic());

        let lin: Vec<(u64, f64)> = grid.iter().map(|&t| (t, 0.3 * t as f64)).collect();
        let fit = growth_classifier(&lin).unwrap();
        assert!(fit.fit_linear.r_squared > 0.999);
        assert!((fit.fit_linear.slope - 0.3).abs() < 1e-9);
        assert!(!fit.looks_logarithmic());
    }

    #[test]
    fn growth_classifier_needs_data() {
        let few: Vec<(u64, f64)> = (1..5).map(|t| (t * 1000, t as f64)).collect();
        assert!(matches!(
            growth_classifier(&few),
            Err(Error::InsufficientData(_))
        ));
        let narrow: Vec<(u64, f64)> = (10..30).map(|t| (t, t as f64)).collect();
        assert!(matches!(
            growth_classifier(&narrow),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn band_examples() {
        let same = vec![vec![1.0f64, 2.0], vec![1.0, 2.0]];
        let b = confidence_band(&same).unwrap();
        assert_eq!(b.std, vec![0.0, 0.0]);
        assert_eq!(b.lower, b.mean);
        assert_eq!(b.upper, b.mean);

        let b = confidence_band(&[vec![0.0f64], vec![2.0]]).unwrap();
        assert_eq!(b.mean[0], 1.0);
        assert!((b.std[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!((b.lower[0] - (1.0 - 2.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((b.upper[0] - (1.0 + 2.0 * 2f64.sqrt())).abs() < 1e-15);

        assert!(matches!(
            confidence_band(&[vec![1.0f64]]),
            Err(Error::InsufficientData(_))
        ));
    }
}
