//! One-dimensional smeared overlap lengths.
//!
//! For boxes every overlap volume is a product of interval lengths and the
//! Gaussian kernel factorizes per axis, so the three-dimensional integrals
//! reduce to the functions here. All positions are relative to the first
//! reading, which keeps the arithmetic independent of where the origin is.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::quadrature::{Quad, Rule};

/// Relative tolerance for adaptive quadrature.
pub(crate) const REL_TOL: f64 = 1e-12;

pub(crate) fn interval_len(lo1: f64, hi1: f64, lo2: f64, hi2: f64) -> f64 {
    (hi1.min(hi2) - lo1.max(lo2)).max(0.0)
}

pub(crate) fn gauss_pdf(t: f64, sigma: f64) -> f64 {
    let z = t / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// `Ψ(-|z|)` where `Ψ(z) = zΦ(z) + φ(z)` is the antiderivative of the normal CDF.
fn folded_tail(z: f64) -> f64 {
    let a = z.abs();
    (std_normal_pdf(a) - a * 0.5 * libm::erfc(a * FRAC_1_SQRT_2)).max(0.0)
}

/// `E[len([t-h, t+h] ∩ [lo, hi])]` for `t ~ N(0, σ²)`.
///
/// The expectation is `σ (Ψ(z₁) - Ψ(z₂) - Ψ(z₃) + Ψ(z₄))`. Its piecewise-linear
/// part is the unsmeared length, and the remainder is a combination of
/// Gaussian tails. When σ dominates every length the second difference is
/// instead integrated directly, avoiding cancellation.
pub fn smeared_len(lo: f64, hi: f64, h: f64, sigma: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let base = interval_len(-h, h, lo, hi);
    if sigma == 0.0 {
        return base;
    }
    let upper = (2.0 * h).min(hi - lo);
    let w = (hi - lo) / sigma;
    let v = 2.0 * h / sigma;
    let value = if w.max(v) <= 1.0 {
        sigma * second_difference(w, v, (lo - h) / sigma)
    } else {
        let t = |x: f64| folded_tail(x / sigma);
        base + sigma * (t(hi + h) - t(lo + h) - t(hi - h) + t(lo - h))
    };
    value.clamp(0.0, upper)
}

/// `∫₀^w ∫₀^v φ(z₀ + s + r) dr ds` for `w, v ≤ 1`.
fn second_difference(w: f64, v: f64, z0: f64) -> f64 {
    thread_local! {
        static RULE: Rule = Rule::gauss_legendre(12);
    }
    RULE.with(|rule| {
        rule.apply(0.0, w, |s| {
            rule.apply(0.0, v, |r| std_normal_pdf(z0 + s + r))
        })
    })
}

/// Same expectation by adaptive quadrature over `[-n_sigma σ, n_sigma σ]`.
pub fn smeared_len_quadrature(
    lo: f64,
    hi: f64,
    h: f64,
    sigma: f64,
    n_sigma: f64,
    rule: &Rule,
) -> Quad {
    if hi <= lo {
        return Quad::ZERO;
    }
    if sigma == 0.0 {
        return Quad {
            value: interval_len(-h, h, lo, hi),
            error: 0.0,
            evaluations: 1,
        };
    }
    let r = n_sigma * sigma;
    let tol = REL_TOL * (2.0 * h).min(hi - lo);
    rule.piecewise(-r, r, &[lo - h, lo + h, hi - h, hi + h], tol, |t| {
        gauss_pdf(t, sigma) * interval_len(t - h, t + h, lo, hi)
    })
}

/// Geometry of one axis of a triple overlap term, relative to the first reading.
#[derive(Debug, Clone, Copy)]
pub struct TripleAxis {
    /// Target interval.
    pub lo: f64,
    pub hi: f64,
    /// Offset of the second reading from the first.
    pub offset: f64,
    pub h1: f64,
    pub sigma1: f64,
    pub h2: f64,
    pub sigma2: f64,
}

/// How the inner (second-detector) expectation is evaluated.
#[derive(Debug, Clone, Copy)]
pub enum Inner<'a> {
    Closed,
    Quadrature { rule: &'a Rule, n_sigma: f64 },
}

impl TripleAxis {
    /// Expected inner length for a given first-detector displacement `t`.
    fn inner(&self, t: f64, inner: Inner<'_>) -> Quad {
        let lo = (t - self.h1).max(self.lo);
        let hi = (t + self.h1).min(self.hi);
        if hi <= lo {
            return Quad::ZERO;
        }
        let (lo, hi) = (lo - self.offset, hi - self.offset);
        match inner {
            Inner::Closed => Quad {
                value: smeared_len(lo, hi, self.h2, self.sigma2),
                error: 0.0,
                evaluations: 1,
            },
            Inner::Quadrature { rule, n_sigma } => {
                smeared_len_quadrature(lo, hi, self.h2, self.sigma2, n_sigma, rule)
            }
        }
    }

    fn kinks(&self) -> [f64; 8] {
        let (lo, hi, h1, h2, d) = (self.lo, self.hi, self.h1, self.h2, self.offset);
        [
            lo - h1,
            lo + h1,
            hi - h1,
            hi + h1,
            d - h2 - h1,
            d - h2 + h1,
            d + h2 - h1,
            d + h2 + h1,
        ]
    }

    /// `E[len(I₁ ∩ [lo, hi] ∩ I₂)]` over both detector displacements. The
    /// outer expectation is always adaptive quadrature; `exact` is true when
    /// no quadrature was needed at all.
    pub fn expectation(&self, n_sigma: f64, rule: &Rule, inner: Inner<'_>) -> (Quad, bool) {
        if self.hi <= self.lo {
            return (Quad::ZERO, true);
        }
        let inner_exact = self.sigma2 == 0.0 || matches!(inner, Inner::Closed);
        if self.sigma1 == 0.0 {
            return (self.inner(0.0, inner), inner_exact);
        }
        let r = n_sigma * self.sigma1;
        let scale = (2.0 * self.h1).min(2.0 * self.h2).min(self.hi - self.lo);
        let mut inner_error = 0.0;
        let mut inner_evals = 0u64;
        let mut outer = rule.piecewise(-r, r, &self.kinks(), REL_TOL * scale, |t| {
            let q = self.inner(t, inner);
            let g = gauss_pdf(t, self.sigma1);
            inner_error = f64::max(inner_error, q.error);
            inner_evals += q.evaluations;
            g * q.value
        });
        outer.error += inner_error;
        outer.evaluations += inner_evals;
        (outer, false)
    }
}
