//! The proactive market maker state curve for one token pair.
//!
//! A pool holds balances `b` and `q` of two tokens whose fair prices come
//! from an oracle. The curve pins the marginal exchange rate to the oracle
//! ratio at the equilibrium anchors `(b0, q0)` and lets it deviate away from
//! them, with the slippage parameter `k` interpolating between a
//! constant-sum line (`k -> 0`) and a shifted constant-product hyperbola
//! (`k -> 1`).
//!
//! The pool always sits on exactly one of two branches: base in shortage
//! (`b < b0`, quote in excess) or quote in shortage (`q < q0`), meeting at
//! the equilibrium point. Swaps traverse the curve, crossing the equilibrium
//! onto the other branch when large enough.

use crate::error::{Error, Result};
use crate::num;

/// Slippage parameter `k`, strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmmParams {
    k: f64,
}

impl PmmParams {
    pub fn new(k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0 && k < 1.0) {
            return Err(Error::InvalidInput("k must lie strictly in (0, 1)"));
        }
        Ok(Self { k })
    }

    #[inline]
    pub fn k(&self) -> f64 {
        self.k
    }
}

/// Fair market prices of the pair's tokens in a common numeraire.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleQuote {
    p_b: f64,
    p_q: f64,
}

impl OracleQuote {
    pub fn new(p_b: f64, p_q: f64) -> Result<Self> {
        if !(num::is_pos_finite(p_b) && num::is_pos_finite(p_q)) {
            return Err(Error::InvalidInput("prices must be positive and finite"));
        }
        Ok(Self { p_b, p_q })
    }

    #[inline]
    pub fn p_b(&self) -> f64 {
        self.p_b
    }

    #[inline]
    pub fn p_q(&self) -> f64 {
        self.p_q
    }

    /// Base price over quote price; the fair quote-per-base rate.
    #[inline]
    pub fn ratio(&self) -> f64 {
        self.p_b / self.p_q
    }
}

/// Which side of the equilibrium the pool sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `b < b0`: base token in shortage, quote in excess.
    ShortBase,
    /// `q < q0`: quote token in shortage, base in excess.
    ShortQuote,
    /// Both balances exactly at their anchors.
    AtEquilibrium,
}

/// Which token a swap feeds into the pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapSide {
    BaseIn,
    QuoteIn,
}

/// Balances and equilibrium anchors of one pair pool.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCurveState {
    pub b: f64,
    pub q: f64,
    pub b0: f64,
    pub q0: f64,
}

impl PairCurveState {
    /// Builds a state and checks positivity plus the branch trichotomy.
    /// Whether the point actually lies on a curve is a property of
    /// `(prices, k)` and is checked separately by [`curve_residual`].
    pub fn new(b: f64, q: f64, b0: f64, q0: f64) -> Result<Self> {
        for v in [b, q, b0, q0] {
            if !num::is_pos_finite(v) {
                return Err(Error::InvalidInput("balances and anchors must be positive"));
            }
        }
        let state = Self { b, q, b0, q0 };
        state.regime()?;
        Ok(state)
    }

    /// A fresh pool at its equilibrium point.
    pub fn at_equilibrium(b0: f64, q0: f64) -> Result<Self> {
        Self::new(b0, q0, b0, q0)
    }

    pub fn regime(&self) -> Result<Regime> {
        classify_regime(self)
    }
}

/// Receipt of one executed swap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapReceipt {
    pub amount_in: f64,
    pub amount_out: f64,
    pub new_state: PairCurveState,
    /// True when the trade passed through the equilibrium point and
    /// continued on the other branch.
    pub crossed_equilibrium: bool,
}

/// Determines the branch a state sits on.
///
/// Shortage on both sides cannot happen on the curve; such a state is
/// reported as corrupted. The equilibrium point satisfies both branch
/// formulas, so assigning the equalities to `AtEquilibrium` is consistent
/// with either.
pub fn classify_regime(state: &PairCurveState) -> Result<Regime> {
    let short_base = state.b < state.b0;
    let short_quote = state.q < state.q0;
    match (short_base, short_quote) {
        (true, true) => Err(Error::CorruptedState),
        (true, false) => Ok(Regime::ShortBase),
        (false, true) => Ok(Regime::ShortQuote),
        (false, false) => {
            if state.b == state.b0 && state.q == state.q0 {
                Ok(Regime::AtEquilibrium)
            } else {
                // Excess on both sides: off the curve entirely.
                Err(Error::CorruptedState)
            }
        }
    }
}

/// Quote balance as a function of the base balance on the short-base
/// branch: `Q = -(P_B/P_Q)(B - B0)(1 - k + k*B0/B) + Q0` for `0 < B <= B0`.
pub fn quote_from_base(
    b: f64,
    b0: f64,
    q0: f64,
    prices: &OracleQuote,
    params: &PmmParams,
) -> Result<f64> {
    if !(num::is_pos_finite(b) && b <= b0) {
        return Err(Error::InvalidInput("quote_from_base requires 0 < b <= b0"));
    }
    let k = params.k();
    Ok(-prices.ratio() * (b - b0) * (1.0 - k + k * b0 / b) + q0)
}

/// Base balance as a function of the quote balance on the short-quote
/// branch: `B = -(P_Q/P_B)(Q - Q0)(1 - k + k*Q0/Q) + B0` for `0 < Q <= Q0`.
pub fn base_from_quote(
    q: f64,
    q0: f64,
    b0: f64,
    prices: &OracleQuote,
    params: &PmmParams,
) -> Result<f64> {
    if !(num::is_pos_finite(q) && q <= q0) {
        return Err(Error::InvalidInput("base_from_quote requires 0 < q <= q0"));
    }
    let k = params.k();
    Ok(-(q - q0) / prices.ratio() * (1.0 - k + k * q0 / q) + b0)
}

/// Solves the quadratic `x^2 * r(k-1) + x * coeff + r * x0^2 * k = 0` that
/// arises from rearranging either branch formula, returning its root in
/// `(0, x0]` (the negative root of the textbook formula).
///
/// `r` is the in-token-over-out-token price ratio and `coeff` the linear
/// coefficient; both are prepared by the callers. The evaluation avoids the
/// cancellation-prone `coeff + sqrt(disc)` difference when `coeff` is
/// positive by switching to the product form of the root pair.
fn negative_root(r: f64, x0: f64, coeff: f64, k: f64) -> Result<f64> {
    let disc = coeff * coeff + 4.0 * r * r * x0 * x0 * k * (1.0 - k);
    if disc < 0.0 {
        return Err(Error::NumericalDomain("negative discriminant"));
    }
    let sqrt_disc = num::sqrt(disc);
    let root = if coeff <= 0.0 {
        2.0 * r * x0 * x0 * k / (sqrt_disc - coeff)
    } else {
        (coeff + sqrt_disc) / (2.0 * r * (1.0 - k))
    };
    // The discarded (positive-sign) root falls outside (0, x0]; see the
    // verification at the equilibrium substitution.
    debug_assert!({
        let other = (coeff - sqrt_disc) / (2.0 * r * (1.0 - k));
        !(other > 0.0 && other <= x0 * (1.0 + 1e-12)) || num::rel_diff(other, root) < 1e-9
    });
    if !num::is_pos_finite(root) {
        return Err(Error::NumericalDomain("root left (0, x0]"));
    }
    Ok(root)
}

/// Inverts [`quote_from_base`]: the unique `b` in `(0, b0]` whose quote
/// balance equals `q`, for `q >= q0`.
pub fn invert_base_branch(
    q: f64,
    b0: f64,
    q0: f64,
    prices: &OracleQuote,
    params: &PmmParams,
) -> Result<f64> {
    if !(num::is_pos_finite(q) && q >= q0) {
        return Err(Error::InvalidInput("invert_base_branch requires q >= q0"));
    }
    let r = prices.ratio();
    let k = params.k();
    // From Q = eq-1a(B): B^2 * r(k-1) + B * (r*b0*(1-2k) + (q0 - q)) + r*b0^2*k = 0.
    let coeff = r * b0 * (1.0 - 2.0 * k) + (q0 - q);
    negative_root(r, b0, coeff, k)
}

/// Inverts [`base_from_quote`]: the unique `q` in `(0, q0]` whose base
/// balance equals `b`, for `b >= b0`.
pub fn invert_quote_branch(
    b: f64,
    q0: f64,
    b0: f64,
    prices: &OracleQuote,
    params: &PmmParams,
) -> Result<f64> {
    if !(num::is_pos_finite(b) && b >= b0) {
        return Err(Error::InvalidInput("invert_quote_branch requires b >= b0"));
    }
    let r_inv = prices.p_q() / prices.p_b();
    let k = params.k();
    let coeff = r_inv * q0 * (1.0 - 2.0 * k) + (b0 - b);
    negative_root(r_inv, q0, coeff, k)
}

/// Magnitude of the instantaneous quote-out-per-base-in rate `|dQ/dB|`.
///
/// Exceeds the fair ratio `p_b/p_q` exactly when the base token is in
/// shortage, equals it at equilibrium, and falls below it when the quote
/// token is in shortage.
pub fn marginal_rate_q_per_b(
    state: &PairCurveState,
    prices: &OracleQuote,
    params: &PmmParams,
) -> Result<f64> {
    let k = params.k();
    let r = prices.ratio();
    Ok(match classify_regime(state)? {
        Regime::AtEquilibrium => r,
        Regime::ShortBase => {
            let ratio0 = state.b0 / state.b;
            r * (k * ratio0 * ratio0 + (1.0 - k))
        }
        Regime::ShortQuote => {
            // Derivative of the inverted quote branch. The direct
            // `1 + v/sqrt(d)` form cancels when v is negative; the product
            // form of the same expression is exact there.
            let r_inv = prices.p_q() / prices.p_b();
            let v = r_inv * state.q0 * (1.0 - 2.0 * k) + (state.b0 - state.b);
            let d = v * v + 4.0 * r_inv * r_inv * state.q0 * state.q0 * k * (1.0 - k);
            let sqrt_d = num::sqrt(d);
            if v <= 0.0 {
                2.0 * r * r_inv * r_inv * state.q0 * state.q0 * k / (sqrt_d * (sqrt_d - v))
            } else {
                r * (1.0 + v / sqrt_d) / (2.0 * (1.0 - k))
            }
        }
    })
}

/// Magnitude of the instantaneous base-out-per-quote-in rate `|dB/dQ|`;
/// mirror image of [`marginal_rate_q_per_b`].
pub fn marginal_rate_b_per_q(
    state: &PairCurveState,
    prices: &OracleQuote,
    params: &PmmParams,
) -> Result<f64> {
    let k = params.k();
    let r_inv = prices.p_q() / prices.p_b();
    Ok(match classify_regime(state)? {
        Regime::AtEquilibrium => r_inv,
        Regime::ShortQuote => {
            let ratio0 = state.q0 / state.q;
            r_inv * (k * ratio0 * ratio0 + (1.0 - k))
        }
        Regime::ShortBase => {
            let r = prices.ratio();
            let u = r * state.b0 * (1.0 - 2.0 * k) + (state.q0 - state.q);
            let d = u * u + 4.0 * r * r * state.b0 * state.b0 * k * (1.0 - k);
            let sqrt_d = num::sqrt(d);
            if u <= 0.0 {
                2.0 * r_inv * r * r * state.b0 * state.b0 * k / (sqrt_d * (sqrt_d - u))
            } else {
                r_inv * (1.0 + u / sqrt_d) / (2.0 * (1.0 - k))
            }
        }
    })
}

/// Residual of the governing branch relation at the state's balances,
/// relative to the balance it predicts. Zero (within tolerance) for any
/// state reachable by curve traversal.
///
/// The relation is checked in both directions and the smaller residual
/// wins: reconstructing one balance from the other loses precision when
/// that other balance sits within rounding distance of its anchor (a
/// heavily value-asymmetric pool), and the two directions cannot both be
/// ill-conditioned at once.
pub fn curve_residual(
    state: &PairCurveState,
    prices: &OracleQuote,
    params: &PmmParams,
) -> Result<f64> {
    Ok(match classify_regime(state)? {
        Regime::AtEquilibrium => 0.0,
        Regime::ShortBase => {
            let q = quote_from_base(state.b, state.b0, state.q0, prices, params)?;
            let fwd = num::rel_diff(q, state.q);
            let inv = invert_base_branch(state.q, state.b0, state.q0, prices, params)
                .map(|b| num::rel_diff(b, state.b))
                .unwrap_or(f64::INFINITY);
            fwd.min(inv)
        }
        Regime::ShortQuote => {
            let b = base_from_quote(state.q, state.q0, state.b0, prices, params)?;
            let fwd = num::rel_diff(b, state.b);
            let inv = invert_quote_branch(state.b, state.q0, state.b0, prices, params)
                .map(|q| num::rel_diff(q, state.q))
                .unwrap_or(f64::INFINITY);
            fwd.min(inv)
        }
    })
}

/// Executes a swap of `amount_in` tokens into the pool, returning the new
/// state on the same curve.
///
/// The traversal follows the governing branch and, when the trade is large
/// enough to reach the equilibrium point, continues seamlessly on the other
/// branch (the curve is continuous there). Output that would leave the
/// counter-balance under the dust floor is refused.
pub fn swap_exact_in(
    state: &PairCurveState,
    prices: &OracleQuote,
    params: &PmmParams,
    side: SwapSide,
    amount_in: f64,
) -> Result<SwapReceipt> {
    if !num::is_pos_finite(amount_in) {
        return Err(Error::InvalidInput("amount_in must be positive and finite"));
    }
    let regime = classify_regime(state)?;
    let (new_state, crossed) = match side {
        SwapSide::BaseIn => {
            let new_b = state.b + amount_in;
            let new_q = if regime == Regime::ShortBase && new_b <= state.b0 {
                quote_from_base(new_b, state.b0, state.q0, prices, params)?
            } else {
                invert_quote_branch(new_b, state.q0, state.b0, prices, params)?
            };
            if new_q < num::DUST_FLOOR_FRACTION * state.q0 {
                return Err(Error::DustFloor);
            }
            let crossed = regime == Regime::ShortBase && new_b > state.b0;
            (
                PairCurveState {
                    b: new_b,
                    q: new_q,
                    ..*state
                },
                crossed,
            )
        }
        SwapSide::QuoteIn => {
            let new_q = state.q + amount_in;
            let new_b = if regime == Regime::ShortQuote && new_q <= state.q0 {
                base_from_quote(new_q, state.q0, state.b0, prices, params)?
            } else {
                invert_base_branch(new_q, state.b0, state.q0, prices, params)?
            };
            if new_b < num::DUST_FLOOR_FRACTION * state.b0 {
                return Err(Error::DustFloor);
            }
            let crossed = regime == Regime::ShortQuote && new_q > state.q0;
            (
                PairCurveState {
                    b: new_b,
                    q: new_q,
                    ..*state
                },
                crossed,
            )
        }
    };
    let amount_out = match side {
        SwapSide::BaseIn => state.q - new_state.q,
        SwapSide::QuoteIn => state.b - new_state.b,
    };
    if amount_out < 0.0 {
        return Err(Error::NumericalDomain("negative swap output"));
    }
    Ok(SwapReceipt {
        amount_in,
        amount_out,
        new_state,
        crossed_equilibrium: crossed,
    })
}
