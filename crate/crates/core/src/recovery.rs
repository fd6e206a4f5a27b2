//! Equilibrium retargeting after oracle price shifts.
//!
//! A pool that sits off its equilibrium when the oracle ratio moves gets a
//! new anchor pair before the next trade. Plain recovery
//! ([`pmm_recover`]) keeps the excess token's anchor and recomputes the
//! depleted token's anchor so the current balances land exactly on the
//! new-price curve. The multi-token retarget ([`mpmm_retarget`]) instead
//! minimizes a squared tracking distance between the new anchors and the
//! liquidity providers' deposits, over the one-parameter family of valid
//! curves through the current balances.

use crate::curve::{OracleQuote, PairCurveState, PmmParams, Regime};
use crate::error::{Error, Result};
use crate::num;

/// Token amounts deposited by liquidity providers, fixed at pool
/// initialization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepositRecord {
    b_r: f64,
    q_r: f64,
}

impl DepositRecord {
    pub fn new(b_r: f64, q_r: f64) -> Result<Self> {
        if !(num::is_pos_finite(b_r) && num::is_pos_finite(q_r)) {
            return Err(Error::InvalidInput("deposits must be positive"));
        }
        Ok(Self { b_r, q_r })
    }

    #[inline]
    pub fn b_r(&self) -> f64 {
        self.b_r
    }

    #[inline]
    pub fn q_r(&self) -> f64 {
        self.q_r
    }
}

/// New anchors produced by a retarget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetargetResult {
    pub b0_new: f64,
    pub q0_new: f64,
    /// Deposit-tracking objective value at the returned anchors; only the
    /// multi-token retarget reports it.
    pub objective: Option<f64>,
}

/// Averages the per-token slippage parameters of a trading pair.
pub fn pair_k(k_base: f64, k_quote: f64) -> Result<f64> {
    for k in [k_base, k_quote] {
        if !(k.is_finite() && k > 0.0 && k < 1.0) {
            return Err(Error::InvalidInput("per-token k must lie in (0, 1)"));
        }
    }
    Ok((k_base + k_quote) / 2.0)
}

/// The new base anchor that puts `(b, q)` on the short-base branch whose
/// quote anchor is `q0_target`, under `prices`:
/// `b0' = b + (b/2k) * (sqrt(1 + 4k(q - q0_target)/(r b)) - 1)`.
///
/// Requires `q >= q0_target`; the square-root argument is then at least 1.
pub fn recovered_base_anchor(
    b: f64,
    q: f64,
    q0_target: f64,
    prices: &OracleQuote,
    params: &PmmParams,
) -> Result<f64> {
    let k = params.k();
    let arg = 1.0 + 4.0 * k * (q - q0_target) / (prices.ratio() * b);
    if arg < 0.0 {
        return Err(Error::NumericalDomain("recovery square root"));
    }
    let s = num::sqrt(arg);
    let root = b + b / (2.0 * k) * (s - 1.0);
    // The negative-sign root lies below the current balance (it is negative
    // for any excess at all) and can never serve as a short-base anchor.
    debug_assert!(b + b / (2.0 * k) * (-s - 1.0) < b);
    Ok(root)
}

/// Mirror image of [`recovered_base_anchor`] for the short-quote branch.
pub fn recovered_quote_anchor(
    q: f64,
    b: f64,
    b0_target: f64,
    prices: &OracleQuote,
    params: &PmmParams,
) -> Result<f64> {
    let k = params.k();
    let r_inv = prices.p_q() / prices.p_b();
    let arg = 1.0 + 4.0 * k * (b - b0_target) / (r_inv * q);
    if arg < 0.0 {
        return Err(Error::NumericalDomain("recovery square root"));
    }
    let s = num::sqrt(arg);
    let root = q + q / (2.0 * k) * (s - 1.0);
    debug_assert!(q + q / (2.0 * k) * (-s - 1.0) < q);
    Ok(root)
}

/// Recomputes the anchors after a price shift: the excess token keeps its
/// anchor, the depleted token's anchor is recomputed so the balances sit
/// exactly on the new-price curve. At equilibrium the anchors are kept.
pub fn pmm_recover(
    state: &PairCurveState,
    new_prices: &OracleQuote,
    params: &PmmParams,
) -> Result<RetargetResult> {
    match state.regime()? {
        Regime::AtEquilibrium => Ok(RetargetResult {
            b0_new: state.b0,
            q0_new: state.q0,
            objective: None,
        }),
        Regime::ShortBase => Ok(RetargetResult {
            b0_new: recovered_base_anchor(state.b, state.q, state.q0, new_prices, params)?,
            q0_new: state.q0,
            objective: None,
        }),
        Regime::ShortQuote => Ok(RetargetResult {
            b0_new: state.b0,
            q0_new: recovered_quote_anchor(state.q, state.b, state.b0, new_prices, params)?,
            objective: None,
        }),
    }
}

/// Squared deposit-tracking distance of an anchor pair.
pub fn deposit_objective(b0: f64, q0: f64, deposits: &DepositRecord) -> f64 {
    let db = 1.0 - b0 / deposits.b_r;
    let dq = 1.0 - q0 / deposits.q_r;
    db * db + dq * dq
}

/// Number of coarse samples used to bracket the minimum before the
/// golden-section refinement.
const PRESCAN_POINTS: usize = 1024;

use crate::num::MINIMIZER_FREE_VAR_TOL as FREE_VAR_TOL;

fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > FREE_VAR_TOL && hi - lo > 8.0 * f64::EPSILON * num::abs(hi) {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Minimizes `f` on `[lo, hi]`: a coarse scan brackets the best sample, a
/// golden-section pass refines it. The scan guards against the objective
/// having more than one dip, which the squared tracking distance composed
/// with the curve constraint can produce.
fn minimize_scalar<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let step = (hi - lo) / PRESCAN_POINTS as f64;
    let mut best_i = 0usize;
    let mut best_f = f64::INFINITY;
    for i in 0..=PRESCAN_POINTS {
        let x = if i == PRESCAN_POINTS {
            hi
        } else {
            lo + step * i as f64
        };
        let fx = f(x);
        if fx < best_f {
            best_f = fx;
            best_i = i;
        }
    }
    let bracket_lo = if best_i == 0 {
        lo
    } else {
        lo + step * (best_i - 1) as f64
    };
    let bracket_hi = if best_i >= PRESCAN_POINTS {
        hi
    } else {
        lo + step * (best_i + 1) as f64
    };
    let (x, fx) = golden_section(f, bracket_lo, bracket_hi);
    if fx < best_f {
        (x, fx)
    } else {
        let x_best = if best_i == PRESCAN_POINTS {
            hi
        } else {
            lo + step * best_i as f64
        };
        (x_best, best_f)
    }
}

/// Retargets one pair of a multi-token pool: minimizes the deposit-tracking
/// objective over the family of valid curves through the current balances.
///
/// The branch comparison `b0/b_r < q0/q_r` selects which anchor the
/// constraint recomputes; the other anchor is the free search variable.
/// The free anchor belongs to the excess token and ranges over
/// `[its current anchor, its current balance]`: the lower end keeps the
/// excess anchor (the plain-recovery rule, returned in closed form when it
/// already minimizes the objective), the upper end re-anchors at the
/// balances; outside that interval the curve through `(b, q)` would
/// contradict its own branch condition. When the selected branch is
/// incompatible with the pair's regime the domain is empty and the call
/// signals [`Error::RetargetInfeasible`]; callers fall back to
/// [`pmm_recover`].
///
/// Inputs are raw balances and anchors rather than a validated state: in a
/// shared multi-token pool, trades on other pairs move one token's balance
/// and anchor independently of the other's, so a pair's view may violate
/// the two-token trichotomy. For such views the old anchors no longer
/// describe a curve and the floor drops to a dust-scale bound; the search
/// then re-derives a valid curve from scratch.
#[allow(clippy::too_many_arguments)]
pub fn mpmm_retarget(
    b: f64,
    q: f64,
    b0: f64,
    q0: f64,
    deposits: &DepositRecord,
    prices: &OracleQuote,
    params: &PmmParams,
) -> Result<RetargetResult> {
    for v in [b, q, b0, q0] {
        if !num::is_pos_finite(v) {
            return Err(Error::InvalidInput("balances and anchors must be positive"));
        }
    }
    if b == b0 && q == q0 {
        return Ok(RetargetResult {
            b0_new: b0,
            q0_new: q0,
            objective: Some(deposit_objective(b0, q0, deposits)),
        });
    }
    let short_base = b < b0 && q > q0;
    let short_quote = q < q0 && b > b0;
    let consistent = short_base || short_quote;

    let base_branch = b0 / deposits.b_r() < q0 / deposits.q_r();
    if base_branch {
        // Free variable: the quote anchor, over [floor, q].
        if consistent && !short_base {
            return Err(Error::RetargetInfeasible);
        }
        let floor = if short_base {
            q0
        } else {
            num::DUST_FLOOR_FRACTION * deposits.q_r()
        };
        if floor >= q {
            return Err(Error::RetargetInfeasible);
        }
        if short_base {
            // Descent test at the floor: when the objective does not
            // improve by raising the quote anchor, the plain-recovery
            // anchors are already optimal and are returned through the
            // identical closed form.
            let b0_floor = recovered_base_anchor(b, q, q0, prices, params)?;
            let s_floor = num::sqrt(1.0 + 4.0 * params.k() * (q - q0) / (prices.ratio() * b));
            let slope = 2.0 * (1.0 - b0_floor / deposits.b_r())
                / (deposits.b_r() * prices.ratio() * s_floor)
                - 2.0 * (1.0 - q0 / deposits.q_r()) / deposits.q_r();
            if slope >= 0.0 {
                return Ok(RetargetResult {
                    b0_new: b0_floor,
                    q0_new: q0,
                    objective: Some(deposit_objective(b0_floor, q0, deposits)),
                });
            }
        }
        let anchor_of =
            |x: f64| recovered_base_anchor(b, q, x, prices, params).unwrap_or(f64::INFINITY);
        let objective_of = |x: f64| deposit_objective(anchor_of(x), x, deposits);
        let (x, fx) = minimize_scalar(&objective_of, floor, q);
        let b0_new = anchor_of(x);
        // A free anchor within rounding distance of the balance can
        // collapse the constrained anchor onto the balance itself; snap to
        // the exact re-anchoring in that case.
        if b0_new <= b && x != q {
            return Ok(RetargetResult {
                b0_new: b,
                q0_new: q,
                objective: Some(deposit_objective(b, q, deposits)),
            });
        }
        Ok(RetargetResult {
            b0_new,
            q0_new: x,
            objective: Some(fx),
        })
    } else {
        // Free variable: the base anchor, over [floor, b].
        if consistent && !short_quote {
            return Err(Error::RetargetInfeasible);
        }
        let floor = if short_quote {
            b0
        } else {
            num::DUST_FLOOR_FRACTION * deposits.b_r()
        };
        if floor >= b {
            return Err(Error::RetargetInfeasible);
        }
        let r_inv = prices.p_q() / prices.p_b();
        if short_quote {
            let q0_floor = recovered_quote_anchor(q, b, b0, prices, params)?;
            let s_floor = num::sqrt(1.0 + 4.0 * params.k() * (b - b0) / (r_inv * q));
            let slope = 2.0 * (1.0 - q0_floor / deposits.q_r())
                / (deposits.q_r() * r_inv * s_floor)
                - 2.0 * (1.0 - b0 / deposits.b_r()) / deposits.b_r();
            if slope >= 0.0 {
                return Ok(RetargetResult {
                    b0_new: b0,
                    q0_new: q0_floor,
                    objective: Some(deposit_objective(b0, q0_floor, deposits)),
                });
            }
        }
        let anchor_of =
            |x: f64| recovered_quote_anchor(q, b, x, prices, params).unwrap_or(f64::INFINITY);
        let objective_of = |x: f64| deposit_objective(x, anchor_of(x), deposits);
        let (x, fx) = minimize_scalar(&objective_of, floor, b);
        let q0_new = anchor_of(x);
        if q0_new <= q && x != b {
            return Ok(RetargetResult {
                b0_new: b,
                q0_new: q,
                objective: Some(deposit_objective(b, q, deposits)),
            });
        }
        Ok(RetargetResult {
            b0_new: x,
            q0_new,
            objective: Some(fx),
        })
    }
}
