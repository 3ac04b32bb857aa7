//! The explicit numeric bounds, evaluated with outward rounding.
//!
//! Floors are never guessed: a capacity result carries the pre-floor
//! enclosure, and precision is doubled until both endpoints share a floor (or
//! the attempt is flagged indeterminate). The translation-pattern capacity and
//! the bi-Lipschitz capacity are both provided; for the latter the theorem
//! statement and its proof disagree on whether the last factor uses β or
//! β̃ = Aβ, so both values are reported, with the proof-derived one canonical.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enclosure::{euler, Enc};
use crate::rational::Q;
use crate::thickness::Tau;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoundsError {
    #[error("formula domain: requires tau > 1")]
    TauTooSmall,
    #[error("formula domain: requires tau > 0")]
    TauNotPositive,
    #[error("capacity formula undefined: requires tau*beta > e")]
    CapacityUndefined,
    #[error("requires A >= 1")]
    BadDistortion,
    #[error("requires D > 0 and m > 0")]
    BadWindowConstants,
    #[error("epsilon must lie strictly between 0 and 1")]
    BadEpsilon,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapacityFormula {
    /// ⌊ log4/(4e·720²) · τ/log τ ⌋
    ApCapacity,
    /// Theorem-statement bi-Lipschitz formula (β in the last factor).
    BilipStatement,
    /// Proof-derived bi-Lipschitz formula (β̃ = Aβ in the last factor).
    BilipProof,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityInputs {
    pub tau: Q,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Q>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<Q>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<Q>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Q>,
}

/// A floored capacity together with its rounding certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityResult {
    /// `None` when the enclosure still spans a whole integer after precision
    /// escalation (flagged indeterminate, never silently floored).
    pub n: Option<BigInt>,
    /// Whether both enclosure endpoints share the same floor. When false but
    /// the width is below one, `n` is the floor of the lower bound — a sound
    /// capacity, possibly one short of the true floor.
    pub floor_exact: bool,
    pub formula: CapacityFormula,
    pub inputs: CapacityInputs,
    /// Pre-floor enclosure (lo, hi).
    pub enclosure: (Q, Q),
    pub bits_used: u32,
}

const MAX_ESCALATIONS: u32 = 5;

fn capacity_floor(
    eval: impl Fn(u32) -> Enc,
    bits: u32,
    formula: CapacityFormula,
    inputs: CapacityInputs,
) -> CapacityResult {
    let mut b = bits.max(32);
    let mut last = eval(b);
    for _ in 0..MAX_ESCALATIONS {
        if last.floor_unique().is_some() {
            break;
        }
        b *= 2;
        last = eval(b);
    }
    let (n, floor_exact) = match last.floor_unique() {
        Some(f) => (Some(f), true),
        None if last.width() < Q::one() => (Some(last.lo().floor_big()), false),
        None => (None, false),
    };
    CapacityResult {
        n,
        floor_exact,
        formula,
        inputs,
        enclosure: (last.lo().clone(), last.hi().clone()),
        bits_used: b,
    }
}

/// Enclosure of the leading constant log4/(4e·720²).
pub fn ap_capacity_constant(bits: u32) -> Enc {
    let ln4 = Enc::exact(Q::from_int(4)).ln(bits + 8);
    let denom = euler(bits + 8).mul_q(&Q::from_int(4 * 720 * 720));
    ln4.div(&denom).round_out(bits)
}

/// How many points a translation/homothety pattern may have and still be
/// guaranteed inside every compact set of thickness τ.
pub fn ap_capacity(tau: &Q, bits: u32) -> Result<CapacityResult, BoundsError> {
    if *tau <= Q::one() {
        return Err(BoundsError::TauTooSmall);
    }
    let inputs = CapacityInputs { tau: tau.clone(), a: None, d: None, m: None, beta: None };
    let t = tau.clone();
    Ok(capacity_floor(
        move |b| {
            let c = ap_capacity_constant(b + 8);
            let ln_tau = Enc::exact(t.clone()).ln(b + 8);
            c.mul_q(&t).div(&ln_tau).round_out(b)
        },
        bits,
        CapacityFormula::ApCapacity,
        inputs,
    ))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BilipCapacity {
    /// Proof-derived value (canonical).
    pub canonical: CapacityResult,
    /// Theorem-statement value, reported alongside.
    pub statement: CapacityResult,
    pub beta: Q,
    pub beta_tilde: Q,
    /// Enclosure of c = 1 − 1/log(τβ).
    pub c: (Q, Q),
}

/// Decide `x > e` for rational x by escalating the enclosure of e.
fn exceeds_euler(x: &Q, bits: u32) -> bool {
    let mut b = bits.max(32);
    loop {
        let e = euler(b);
        if x > e.hi() {
            return true;
        }
        if x <= e.lo() {
            return false;
        }
        b *= 2;
        assert!(b < 1 << 20, "rational equal to e is impossible");
    }
}

/// Capacity for a family of bi-Lipschitz patterns with distortion ≤ A,
/// inverse-slope bound D and a shared window of length m.
pub fn bilip_capacity(
    tau: &Q,
    a: &Q,
    d: &Q,
    m: &Q,
    bits: u32,
) -> Result<BilipCapacity, BoundsError> {
    if *a < Q::one() {
        return Err(BoundsError::BadDistortion);
    }
    if !d.is_positive() || !m.is_positive() {
        return Err(BoundsError::BadWindowConstants);
    }
    let beta = (m / d).min(Q::one() / (Q::from_int(4) * a));
    let tau_beta = tau * &beta;
    if !tau_beta.is_positive() || !exceeds_euler(&tau_beta, bits) {
        return Err(BoundsError::CapacityUndefined);
    }
    let beta_tilde = (a * m / d).min(Q::new(1, 4));
    let inputs = CapacityInputs {
        tau: tau.clone(),
        a: Some(a.clone()),
        d: Some(d.clone()),
        m: Some(m.clone()),
        beta: Some(beta.clone()),
    };

    // Shared pieces: L = ln(τβ), c = 1 − 1/L, prefactor τβ/(720² e A^c),
    // last factor 1 − base^{1/L} with base = β (statement) or β̃ (proof).
    let eval = |base: Q| {
        let tau_beta = tau_beta.clone();
        let a = a.clone();
        move |b: u32| -> Enc {
            let big_l = Enc::exact(tau_beta.clone()).ln(b + 8);
            let c = Enc::exact(Q::one()).sub(&big_l.recip());
            let a_pow_c = if a == Q::one() {
                Enc::exact(Q::one())
            } else {
                Enc::exact(a.clone()).pow(&c, b + 8)
            };
            let denom = euler(b + 8).mul_q(&Q::from_int(720 * 720)).mul(&a_pow_c);
            let prefactor = Enc::exact(tau_beta.clone()).div(&denom);
            let exponent = big_l.recip();
            let last = Enc::exact(Q::one())
                .sub(&Enc::exact(base.clone()).pow(&exponent, b + 8));
            prefactor.mul(&last).round_out(b)
        }
    };

    let canonical = capacity_floor(
        eval(beta_tilde.clone()),
        bits,
        CapacityFormula::BilipProof,
        inputs.clone(),
    );
    let statement =
        capacity_floor(eval(beta.clone()), bits, CapacityFormula::BilipStatement, inputs);
    let big_l = Enc::exact(tau_beta).ln(bits + 8);
    let c = Enc::exact(Q::one()).sub(&big_l.recip());
    Ok(BilipCapacity {
        canonical,
        statement,
        beta,
        beta_tilde,
        c: (c.lo().clone(), c.hi().clone()),
    })
}

/// dim_H(E) ≥ log 2 / log(2 + 1/τ), strictly increasing in τ.
pub fn hausdorff_lower(tau: &Q, bits: u32) -> Result<Enc, BoundsError> {
    if !tau.is_positive() {
        return Err(BoundsError::TauNotPositive);
    }
    let ln2 = Enc::exact(Q::from_int(2)).ln(bits + 8);
    let denom = Enc::exact(Q::from_int(2) + tau.recip()).ln(bits + 8);
    Ok(ln2.div(&denom).round_out(bits))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AstelsVerdict {
    /// s ≥ 1: the sumset contains an interval.
    ContainsInterval { s: Q },
    /// s < 1: the sumset contains a Cantor set of thickness ≥ s/(1−s).
    ThicknessLowerBound { s: Q, bound: Q },
}

/// Astels' sumset bound from the thicknesses of the summands; exact rational
/// arithmetic (τ = +∞ contributes a full share of 1).
pub fn astels_sumset(taus: &[Tau]) -> AstelsVerdict {
    let s: Q = taus.iter().map(Tau::astels_share).sum();
    if s >= Q::one() {
        AstelsVerdict::ContainsInterval { s }
    } else {
        let bound = &s / &(Q::one() - &s);
        AstelsVerdict::ThicknessLowerBound { s, bound }
    }
}

/// Unit-constant envelope for the longest-progression length in the middle-ε
/// set: lower scale (1/ε)/log(1/ε), upper scale 1/ε. The paper's constants
/// are unspecified, so these are for trend checks only.
pub fn bfs_ap_envelope(eps: &Q, bits: u32) -> Result<(Enc, Q), BoundsError> {
    if !eps.is_positive() || *eps >= Q::one() {
        return Err(BoundsError::BadEpsilon);
    }
    let inv = eps.recip();
    let lower = Enc::exact(inv.clone())
        .div(&Enc::exact(inv.clone()).ln(bits + 8))
        .round_out(bits);
    Ok((lower, inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_PRECISION_BITS as BITS;

    fn q(s: &str) -> Q {
        s.parse().unwrap()
    }

    #[test]
    fn ap_capacity_at_four_is_zero() {
        // log4/(4e·720²)·4/log4 = 1/(e·720²) ≈ 7.1e-7 → floor 0.
        let r = ap_capacity(&q("4"), BITS).unwrap();
        assert_eq!(r.n, Some(BigInt::from(0)));
        assert!(r.floor_exact);
        assert!(r.enclosure.1 < q("1/1000000"));
    }

    #[test]
    fn ap_capacity_domain_guard() {
        assert_eq!(ap_capacity(&q("1"), BITS).unwrap_err(), BoundsError::TauTooSmall);
        assert_eq!(ap_capacity(&q("1/2"), BITS).unwrap_err(), BoundsError::TauTooSmall);
    }

    #[test]
    fn tau_three_threshold_brackets_by_bisection() {
        // Least τ with N(τ) ≥ 3 exists and is finite: bracket it.
        let cap = |t: &Q| {
            ap_capacity(t, BITS)
                .unwrap()
                .n
                .unwrap()
        };
        let mut lo = q("10");
        let mut hi = q("10");
        while cap(&hi) < BigInt::from(3) {
            hi = &hi * &q("10");
            assert!(hi < q("1000000000000000000000"), "threshold unexpectedly large");
        }
        assert!(cap(&lo) < BigInt::from(3));
        for _ in 0..60 {
            let mid = (&lo + &hi) / q("2");
            if cap(&mid) >= BigInt::from(3) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!(cap(&lo) < BigInt::from(3));
        assert!(cap(&hi) >= BigInt::from(3));
        // The bracket is tight and the threshold is finite.
        assert!((&hi - &lo) / &hi < q("1/1000000000"));
    }

    #[test]
    fn ap_capacity_asymptotic_constant() {
        // N(τ)·log τ/τ → log4/(4e·720²); already within 1% at τ = 1e15.
        let tau = q("1000000000000000");
        let r = ap_capacity(&tau, 120).unwrap();
        let n = Q::from_bigint(r.n.unwrap());
        let ln_tau = Enc::exact(tau.clone()).ln(120);
        let ratio = Enc::exact(n).mul(&ln_tau).div(&Enc::exact(tau));
        let c = ap_capacity_constant(120);
        let rel_err_hi = (Q::one() - ratio.lo() / c.hi()).abs();
        let rel_err_lo = (Q::one() - ratio.hi() / c.lo()).abs();
        assert!(rel_err_hi < q("1/100"), "relative error {rel_err_hi:?}");
        assert!(rel_err_lo < q("1/100"));
    }

    #[test]
    fn ap_capacity_monotone_on_log_grid() {
        let mut prev = BigInt::from(-1);
        let mut tau = q("3");
        for _ in 0..20 {
            let n = ap_capacity(&tau, BITS).unwrap().n.unwrap();
            assert!(n >= prev, "capacity decreased at tau = {tau}");
            prev = n;
            tau = &tau * &q("10");
        }
    }

    #[test]
    fn bilip_matches_theorem13_pipeline_for_translations() {
        // A = D = 1, m ≥ 1/4 → β = β̃ = 1/4; both formulas collapse to
        // ⌊ τ/(720²·4e)·(1 − (1/4)^{1/log(τ/4)}) ⌋, evaluated here from
        // scratch with the same enclosure arithmetic.
        for tau_s in ["100", "100000", "1000000000", "1000000000000000"] {
            let tau = q(tau_s);
            let r = bilip_capacity(&tau, &Q::one(), &Q::one(), &q("1/4"), 96).unwrap();
            assert_eq!(r.beta, q("1/4"));
            assert_eq!(r.beta_tilde, q("1/4"));
            assert_eq!(r.canonical.n, r.statement.n);

            let bits = 160;
            let tb = &tau / &q("4");
            let big_l = Enc::exact(tb.clone()).ln(bits);
            let prefactor = Enc::exact(tb.clone())
                .div(&euler(bits).mul_q(&q("518400")));
            let last = Enc::exact(Q::one())
                .sub(&Enc::exact(q("1/4")).pow(&big_l.recip(), bits));
            let expected = prefactor.mul(&last);
            let n = expected.floor_unique().expect("oracle enclosure resolves");
            assert_eq!(r.canonical.n, Some(n), "tau = {tau_s}");
        }
    }

    #[test]
    fn bilip_domain_guards() {
        // τβ ≤ e → undefined.
        assert_eq!(
            bilip_capacity(&q("10"), &Q::one(), &Q::one(), &q("1/4"), BITS).unwrap_err(),
            BoundsError::CapacityUndefined
        );
        assert_eq!(
            bilip_capacity(&q("100"), &q("1/2"), &Q::one(), &Q::one(), BITS).unwrap_err(),
            BoundsError::BadDistortion
        );
    }

    #[test]
    fn bilip_asymptotic_ratio_positive() {
        // value/(τ/log τ) approaches a positive constant: check it stabilizes.
        let mut ratios = Vec::new();
        for tau_s in ["1000000000", "1000000000000", "1000000000000000"] {
            let tau = q(tau_s);
            let r = bilip_capacity(&tau, &q("2"), &Q::one(), &Q::one(), 96).unwrap();
            let n = Q::from_bigint(r.canonical.n.unwrap());
            let ln_tau = Enc::exact(tau.clone()).ln(96);
            let ratio = Enc::exact(n).mul(&ln_tau).div(&Enc::exact(tau.clone()));
            assert!(ratio.lo().is_positive());
            ratios.push(ratio.midpoint().to_f64());
        }
        let spread = (ratios[2] - ratios[1]).abs();
        assert!(spread < ratios[2] * 0.2, "ratio not stabilizing: {ratios:?}");
    }

    #[test]
    fn hausdorff_lower_examples() {
        // τ = 1 → log2/log3 ≈ 0.63093, enclosure width < 1e-12.
        let e = hausdorff_lower(&Q::one(), 120).unwrap();
        assert!(*e.lo() > q("63092/100000"));
        assert!(*e.hi() < q("63094/100000"));
        assert!(e.width() < q("1/1000000000000"));

        let big = hausdorff_lower(&q("1000000"), BITS).unwrap();
        assert!(*big.lo() > q("9999/10000"));
        let small = hausdorff_lower(&q("1/1000000"), BITS).unwrap();
        assert!(*small.hi() < q("6/100"));

        assert!(hausdorff_lower(&Q::zero(), BITS).is_err());
    }

    #[test]
    fn hausdorff_lower_strictly_increasing() {
        let mut prev = hausdorff_lower(&q("1/100"), 96).unwrap();
        for k in 1..40 {
            let tau = Q::new(k, 100) + q("1/100");
            let cur = hausdorff_lower(&tau, 96).unwrap();
            assert!(cur.lo() > prev.hi() || cur.lo() > prev.lo());
            prev = cur;
        }
    }

    #[test]
    fn astels_examples() {
        assert_eq!(
            astels_sumset(&[Tau::Finite(Q::one()), Tau::Finite(Q::one())]),
            AstelsVerdict::ContainsInterval { s: Q::one() }
        );
        assert_eq!(
            astels_sumset(&[Tau::Finite(Q::zero())]),
            AstelsVerdict::ThicknessLowerBound { s: Q::zero(), bound: Q::zero() }
        );
        assert_eq!(
            astels_sumset(&[Tau::Finite(q("1/3")), Tau::Finite(q("1/3"))]),
            AstelsVerdict::ThicknessLowerBound { s: q("1/2"), bound: Q::one() }
        );
        assert_eq!(
            astels_sumset(&[Tau::Infinite]),
            AstelsVerdict::ContainsInterval { s: Q::one() }
        );
    }

    #[test]
    fn envelope_examples() {
        // ε = 1/2 → (2/log2, 2).
        let (lower, upper) = bfs_ap_envelope(&q("1/2"), BITS).unwrap();
        assert_eq!(upper, q("2"));
        let expected = Enc::exact(q("2")).div(&Enc::exact(q("2")).ln(120));
        assert!(lower.lo() <= expected.hi() && expected.lo() <= lower.hi());

        // lower ≤ upper for ε < 1/e, and the ratio grows as ε shrinks.
        let mut prev_ratio = Q::zero();
        for eps in ["1/3", "1/9", "1/27", "1/81"] {
            let (lower, upper) = bfs_ap_envelope(&q(eps), BITS).unwrap();
            assert!(*lower.hi() <= upper || *lower.lo() <= upper);
            let ratio = &upper / lower.hi();
            assert!(ratio > prev_ratio);
            prev_ratio = ratio;
        }
    }

    #[test]
    fn ap_capacity_below_unsimplified_condition() {
        // The simplified N(τ) must not exceed the un-simplified proof bound
        // τ/(720²·4e)·(1 − 4^{−1/log(τ/4)}).
        for tau_s in ["100", "10000", "100000000", "1000000000000"] {
            let tau = q(tau_s);
            let simplified = ap_capacity(&tau, 96).unwrap();
            let bits = 160;
            let tb = &tau / &q("4");
            let big_l = Enc::exact(tb).ln(bits);
            let unsimplified = Enc::exact(tau.clone())
                .div(&euler(bits).mul_q(&q("2073600")))
                .mul(&Enc::exact(Q::one()).sub(&Enc::exact(q("1/4")).pow(&big_l.recip(), bits)));
            let n_simpl = Q::from_bigint(simplified.n.unwrap());
            assert!(
                n_simpl <= *unsimplified.hi(),
                "simplified bound exceeds proof bound at tau = {tau_s}"
            );
        }
    }
}
