//! Lower-bound curve for the max-variant gadget:
//! `α(ε) = 2(1−2ε) / (2(1−ε)(1−2ε) + ε)` on `0 ≤ ε < 1/2`.

use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("epsilon {0} outside [0, 1/2)")]
pub struct EpsilonOutOfRange(pub String);

/// `4√2 / (4 + √2)`, the curve's maximum.
pub fn max_variant_constant() -> f64 {
    4.0 * std::f64::consts::SQRT_2 / (4.0 + std::f64::consts::SQRT_2)
}

/// The maximizer `1/2 − √2/4`.
pub fn optimal_epsilon() -> f64 {
    0.5 - std::f64::consts::SQRT_2 / 4.0
}

pub fn alpha_curve(epsilon: f64) -> Result<f64, EpsilonOutOfRange> {
    if !(0.0..0.5).contains(&epsilon) {
        return Err(EpsilonOutOfRange(epsilon.to_string()));
    }
    let gap = 1.0 - 2.0 * epsilon;
    Ok(2.0 * gap / (2.0 * (1.0 - epsilon) * gap + epsilon))
}

pub fn alpha_curve_rational(epsilon: &Rational) -> Result<Rational, EpsilonOutOfRange> {
    if epsilon.is_negative() || *epsilon >= Rational::half() {
        return Err(EpsilonOutOfRange(epsilon.to_string()));
    }
    let one = Rational::one();
    let two = Rational::from_integer(2);
    let gap = &one - &(&two * epsilon);
    let denominator = &(&(&two * &(&one - epsilon)) * &gap) + epsilon;
    Ok(&(&two * &gap) / &denominator)
}

/// Largest `α(k/grid)` over `k/grid < 1/2`, smallest `ε` on ties.
pub fn maximize_alpha(grid_denominator: u32) -> (Rational, Rational) {
    assert!(grid_denominator >= 1, "grid denominator must be positive");
    let den = i64::from(grid_denominator);
    let mut best: Option<(Rational, Rational)> = None;
    for k in 0..=den {
        let epsilon = Rational::new(k, den);
        let Ok(alpha) = alpha_curve_rational(&epsilon) else { break };
        if best.as_ref().is_none_or(|(_, a)| alpha > *a) {
            best = Some((epsilon, alpha));
        }
    }
    best.expect("ε = 0 is always on the grid")
}
