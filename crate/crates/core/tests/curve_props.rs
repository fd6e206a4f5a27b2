//! Property checks of the pair curve against independent numerical
//! oracles: finite differences for the marginal rates, bisection for root
//! selection, the constant-sum line and shifted constant-product curve for
//! the k limits, and brute-force traversal invariants.

use ammlab_core::curve::{
    base_from_quote, classify_regime, curve_residual, invert_base_branch, invert_quote_branch,
    marginal_rate_b_per_q, marginal_rate_q_per_b, quote_from_base, swap_exact_in, OracleQuote,
    PairCurveState, PmmParams, Regime, SwapSide,
};
use ammlab_core::num;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

const K_GRID: [f64; 4] = [0.05, 0.25, 0.5, 0.75];

struct RandomState {
    state: PairCurveState,
    prices: OracleQuote,
    params: PmmParams,
}

/// Draws a state on a random curve: random anchors and prices, a regime
/// coin, and a depletion fraction of the short side.
fn random_state(rng: &mut ChaCha12Rng, k: f64) -> RandomState {
    let params = PmmParams::new(k).unwrap();
    let b0 = 10f64.powf(rng.gen_range(0.0..5.0));
    let q0 = 10f64.powf(rng.gen_range(0.0..5.0));
    let p_b = 10f64.powf(rng.gen_range(-2.0..2.0));
    let p_q = 10f64.powf(rng.gen_range(-2.0..2.0));
    let prices = OracleQuote::new(p_b, p_q).unwrap();
    let f = rng.gen_range(0.05..0.999);
    let state = if rng.gen_bool(0.5) {
        let b = f * b0;
        let q = quote_from_base(b, b0, q0, &prices, &params).unwrap();
        PairCurveState::new(b, q, b0, q0).unwrap()
    } else {
        let q = f * q0;
        let b = base_from_quote(q, q0, b0, &prices, &params).unwrap();
        PairCurveState::new(b, q, b0, q0).unwrap()
    };
    RandomState {
        state,
        prices,
        params,
    }
}

/// Quote balance net of its anchor on the short-base branch. Differencing
/// this offset form instead of the full balance keeps the anchor's additive
/// constant from washing out the low bits of the finite difference.
fn quote_offset(b: f64, b0: f64, r: f64, k: f64) -> f64 {
    -r * (b - b0) * (1.0 - k + k * b0 / b)
}

fn base_offset(q: f64, q0: f64, r: f64, k: f64) -> f64 {
    -(q - q0) / r * (1.0 - k + k * q0 / q)
}

#[test]
fn marginal_rates_match_central_finite_differences() {
    let mut rng = ChaCha12Rng::seed_from_u64(0xD1FF);
    for &k in &K_GRID {
        for _ in 0..2500 {
            let RandomState {
                state,
                prices,
                params,
            } = random_state(&mut rng, k);
            let r = prices.ratio();
            match state.regime().unwrap() {
                Regime::ShortBase => {
                    let h = 1e-6 * state.b0;
                    let up = quote_offset(state.b + h, state.b0, r, k);
                    let dn = quote_offset(state.b - h, state.b0, r, k);
                    let fd = (dn - up) / (2.0 * h);
                    let rate = marginal_rate_q_per_b(&state, &prices, &params).unwrap();
                    assert!(
                        num::rel_diff(rate, fd) < 1e-6,
                        "short-base fd mismatch: {rate} vs {fd}"
                    );
                }
                Regime::ShortQuote => {
                    let h = 1e-6 * state.q0;
                    let up = base_offset(state.q + h, state.q0, r, k);
                    let dn = base_offset(state.q - h, state.q0, r, k);
                    let fd = (dn - up) / (2.0 * h);
                    let rate = marginal_rate_b_per_q(&state, &prices, &params).unwrap();
                    assert!(
                        num::rel_diff(rate, fd) < 1e-6,
                        "short-quote fd mismatch: {rate} vs {fd}"
                    );
                }
                Regime::AtEquilibrium => unreachable!("generator avoids equilibrium"),
            }
        }
    }
}

#[test]
fn off_branch_marginal_rates_are_reciprocal() {
    // The cross expressions (base-out rate on the short-base branch and
    // quote-out rate on the short-quote branch) are derivatives of the
    // inverted branch, so the two rates at one state are exact reciprocals.
    // The deviation budget is the derivative tolerance: reconstructing the
    // small anchor gap from stored balances costs precision at extreme
    // price ratios.
    let mut rng = ChaCha12Rng::seed_from_u64(0xFEED);
    for &k in &K_GRID {
        for _ in 0..1000 {
            let RandomState {
                state,
                prices,
                params,
            } = random_state(&mut rng, k);
            let fwd = marginal_rate_q_per_b(&state, &prices, &params).unwrap();
            let bwd = marginal_rate_b_per_q(&state, &prices, &params).unwrap();
            assert!(num::rel_diff(fwd, 1.0 / bwd) < num::DERIVATIVE_REL_TOL);
        }
    }
}

#[test]
fn inversion_round_trips_and_bisection_agree() {
    let mut rng = ChaCha12Rng::seed_from_u64(0xB15EC7);
    for _ in 0..2500 {
        let k = K_GRID[rng.gen_range(0..4)];
        let RandomState {
            state,
            prices,
            params,
        } = random_state(&mut rng, k);
        match state.regime().unwrap() {
            Regime::ShortBase => {
                let b = invert_base_branch(state.q, state.b0, state.q0, &prices, &params).unwrap();
                let q_back = quote_from_base(b, state.b0, state.q0, &prices, &params).unwrap();
                assert!(num::rel_diff(q_back, state.q) < 1e-9);
                assert!(num::rel_diff(b, state.b) < 1e-9);
            }
            Regime::ShortQuote => {
                let q = invert_quote_branch(state.b, state.q0, state.b0, &prices, &params).unwrap();
                let b_back = base_from_quote(q, state.q0, state.b0, &prices, &params).unwrap();
                assert!(num::rel_diff(b_back, state.b) < 1e-9);
                // independent root finder on the same branch relation
                let bisected = bisect_quote(state.b, state.q0, state.b0, &prices, &params);
                assert!(num::rel_diff(q, bisected) < 1e-7, "{q} vs {bisected}");
            }
            Regime::AtEquilibrium => unreachable!(),
        }
    }
}

/// Bisection on `base_from_quote(q) = b_target` over `q in (0, q0]`.
fn bisect_quote(b_target: f64, q0: f64, b0: f64, prices: &OracleQuote, params: &PmmParams) -> f64 {
    let mut lo = q0 * 1e-9;
    let mut hi = q0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let b = base_from_quote(mid, q0, b0, prices, params).unwrap();
        // base balance falls as the quote balance recovers toward q0
        if b > b_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn arbitrage_inequality_off_equilibrium() {
    let mut rng = ChaCha12Rng::seed_from_u64(0xA11CE);
    for _ in 0..2000 {
        let k = K_GRID[rng.gen_range(0..4)];
        let RandomState {
            state,
            prices,
            params,
        } = random_state(&mut rng, k);
        let fair = prices.ratio();
        match state.regime().unwrap() {
            Regime::ShortBase => {
                let rate = marginal_rate_q_per_b(&state, &prices, &params).unwrap();
                assert!(rate > fair, "rate {rate} fair {fair}");
            }
            Regime::ShortQuote => {
                let rate = marginal_rate_b_per_q(&state, &prices, &params).unwrap();
                assert!(rate > 1.0 / fair);
            }
            Regime::AtEquilibrium => unreachable!(),
        }
    }
}

#[test]
fn no_drain_under_escalating_swaps() {
    let prices = OracleQuote::new(1.3, 0.9).unwrap();
    let params = PmmParams::new(0.25).unwrap();
    let mut state = PairCurveState::at_equilibrium(1e6, 1e6).unwrap();
    let mut last_rate = f64::INFINITY;
    let mut amount = 1e3;
    for _ in 0..15 {
        let receipt = swap_exact_in(&state, &prices, &params, SwapSide::BaseIn, amount).unwrap();
        state = receipt.new_state;
        assert!(state.b > 0.0 && state.q > 0.0);
        let rate = receipt.amount_out / receipt.amount_in;
        assert!(rate < last_rate, "marginal output must keep falling");
        last_rate = rate;
        amount *= 10.0;
        if swap_exact_in(&state, &prices, &params, SwapSide::BaseIn, amount).is_err() {
            break; // dust floor reached before any depletion
        }
    }
    assert!(state.q > 0.0);
}

#[test]
fn small_k_swaps_match_the_constant_sum_line() {
    let params = PmmParams::new(1e-9).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(0x0C5);
    for _ in 0..1000 {
        let p_b = 10f64.powf(rng.gen_range(-1.0..1.0));
        let p_q = 10f64.powf(rng.gen_range(-1.0..1.0));
        let prices = OracleQuote::new(p_b, p_q).unwrap();
        let b0 = rng.gen_range(1e3..1e6);
        let q0 = rng.gen_range(1e3..1e6);
        let state = PairCurveState::at_equilibrium(b0, q0).unwrap();
        let amount = rng.gen_range(0.001..0.4) * b0;
        if amount * prices.ratio() > 0.5 * q0 {
            continue;
        }
        let receipt = swap_exact_in(&state, &prices, &params, SwapSide::BaseIn, amount).unwrap();
        let line_out = prices.ratio() * amount;
        assert!(
            num::rel_diff(receipt.amount_out, line_out) < 1e-6,
            "{} vs {line_out}",
            receipt.amount_out
        );
    }
}

#[test]
fn crossing_swap_matches_marginal_rate_integration() {
    // Independent oracle for the equilibrium-crossing traversal: integrate
    // the instantaneous quote-out-per-base-in rate along the base axis with
    // a million trapezoid steps, switching branches at the anchor, and
    // compare against the closed-form swap output.
    let prices = OracleQuote::new(1.0, 1.0).unwrap();
    let params = PmmParams::new(0.5).unwrap();
    let state = PairCurveState::new(80.0, 122.5, 100.0, 100.0).unwrap();
    let receipt = swap_exact_in(&state, &prices, &params, SwapSide::BaseIn, 30.0).unwrap();

    let rate_at = |b: f64| -> f64 {
        let s = if b <= 100.0 {
            let q = quote_from_base(b, 100.0, 100.0, &prices, &params).unwrap();
            PairCurveState::new(b, q, 100.0, 100.0).unwrap()
        } else {
            let q = invert_quote_branch(b, 100.0, 100.0, &prices, &params).unwrap();
            PairCurveState::new(b, q, 100.0, 100.0).unwrap()
        };
        marginal_rate_q_per_b(&s, &prices, &params).unwrap()
    };
    let steps = 1_000_000usize;
    let h = 30.0 / steps as f64;
    let mut integral = 0.5 * (rate_at(80.0) + rate_at(110.0));
    for i in 1..steps {
        integral += rate_at(80.0 + h * i as f64);
    }
    integral *= h;
    assert!(
        num::rel_diff(receipt.amount_out, integral) < 1e-9,
        "swap {} vs integral {integral}",
        receipt.amount_out
    );
}

/// Reference swap on the shifted-scaled constant-product curve the pool
/// degenerates to as k approaches one, including the equilibrium crossing.
fn shifted_cpmm_base_in(state: &PairCurveState, r: f64, amount: f64) -> f64 {
    let new_b = state.b + amount;
    let new_q = if state.b < state.b0 && new_b <= state.b0 {
        -r * (new_b - state.b0) * (state.b0 / new_b) + state.q0
    } else {
        // quote branch solved for Q given B
        state.q0 * state.q0 / (state.q0 + r * (new_b - state.b0))
    };
    state.q - new_q
}

#[test]
fn large_k_swaps_match_the_shifted_constant_product_curve() {
    let params = PmmParams::new(1.0 - 1e-9).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(0xCB44);
    for _ in 0..1000 {
        let prices = OracleQuote::new(
            10f64.powf(rng.gen_range(-1.0..1.0)),
            10f64.powf(rng.gen_range(-1.0..1.0)),
        )
        .unwrap();
        let b0 = rng.gen_range(1e3..1e6);
        let q0 = rng.gen_range(1e3..1e6);
        // start on the short-base branch so the swap can cross
        let b_start = rng.gen_range(0.5..0.999) * b0;
        let q_start = quote_from_base(b_start, b0, q0, &prices, &params).unwrap();
        let state = PairCurveState::new(b_start, q_start, b0, q0).unwrap();
        let amount = rng.gen_range(0.001..1.0) * b0;
        let receipt = swap_exact_in(&state, &prices, &params, SwapSide::BaseIn, amount).unwrap();
        let reference = shifted_cpmm_base_in(&state, prices.ratio(), amount);
        assert!(
            num::rel_diff(receipt.amount_out, reference) < 1e-6,
            "{} vs {reference}",
            receipt.amount_out
        );
    }
}

#[test]
fn marginal_rates_approach_market_ratio_as_k_vanishes() {
    let mut rng = ChaCha12Rng::seed_from_u64(0x51A11);
    for _ in 0..500 {
        let prices = OracleQuote::new(
            10f64.powf(rng.gen_range(-1.0..1.0)),
            10f64.powf(rng.gen_range(-1.0..1.0)),
        )
        .unwrap();
        let fair = prices.ratio();
        let b0 = rng.gen_range(1e2..1e5);
        let q0 = rng.gen_range(1e2..1e5);
        let f = rng.gen_range(0.1..0.95);
        let mut last_gap = f64::INFINITY;
        for k in [0.5, 1e-2, 1e-5, 1e-9] {
            let params = PmmParams::new(k).unwrap();
            let b = f * b0;
            let q = quote_from_base(b, b0, q0, &prices, &params).unwrap();
            let state = PairCurveState::new(b, q, b0, q0).unwrap();
            let rate = marginal_rate_q_per_b(&state, &prices, &params).unwrap();
            let gap = (rate - fair) / fair;
            assert!(gap >= 0.0);
            assert!(gap <= last_gap + 1e-15, "gap {gap} after {last_gap}");
            last_gap = gap;
        }
        assert!(last_gap < 1e-6, "k -> 0 limit gap {last_gap}");
    }
}

#[test]
fn liquidity_scaling_drives_realized_rate_to_market() {
    // Scaling the pool while holding the trade size fixed makes the trade
    // relatively infinitesimal, so its realized rate converges to the
    // marginal (fair) rate at the equilibrium start.
    let prices = OracleQuote::new(1.1, 0.7).unwrap();
    let params = PmmParams::new(0.5).unwrap();
    let fair = prices.ratio();
    let trade = 500.0;
    let mut last_gap = f64::INFINITY;
    for lambda in [1.0, 10.0, 100.0, 1000.0] {
        let state = PairCurveState::at_equilibrium(1e4 * lambda, 2e4 * lambda).unwrap();
        let receipt = swap_exact_in(&state, &prices, &params, SwapSide::BaseIn, trade).unwrap();
        let realized = receipt.amount_out / receipt.amount_in;
        let gap = (realized - fair).abs() / fair;
        assert!(gap < last_gap, "gap {gap} after {last_gap}");
        last_gap = gap;
    }
    assert!(last_gap < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn path_invariance_of_split_swaps(
        seed in any::<u64>(),
        split in 0.05f64..0.95,
        total in 1.0f64..5e4,
        base_in in any::<bool>(),
    ) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let k = K_GRID[rng.gen_range(0..4)];
        let RandomState { state, prices, params } = random_state(&mut rng, k);
        let side = if base_in { SwapSide::BaseIn } else { SwapSide::QuoteIn };

        let one = swap_exact_in(&state, &prices, &params, side, total);
        prop_assume!(one.is_ok());
        let one = one.unwrap();

        let first = swap_exact_in(&state, &prices, &params, side, split * total).unwrap();
        let second = swap_exact_in(
            &first.new_state, &prices, &params, side, total - split * total,
        )
        .unwrap();

        prop_assert!(num::rel_diff(one.new_state.b, second.new_state.b) < 1e-9);
        prop_assert!(num::rel_diff(one.new_state.q, second.new_state.q) < 1e-9);
        prop_assert!(
            num::rel_diff(one.amount_out, first.amount_out + second.amount_out) < 1e-8
        );
    }

    #[test]
    fn traversal_preserves_trichotomy_and_residual(
        seed in any::<u64>(),
        steps in 1usize..30,
    ) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let k = K_GRID[rng.gen_range(0..4)];
        let RandomState { mut state, prices, params } = random_state(&mut rng, k);
        for _ in 0..steps {
            let side = if rng.gen_bool(0.5) { SwapSide::BaseIn } else { SwapSide::QuoteIn };
            let scale = if side == SwapSide::BaseIn { state.b0 } else { state.q0 };
            let amount = rng.gen_range(1e-6..0.5) * scale;
            if let Ok(receipt) = swap_exact_in(&state, &prices, &params, side, amount) {
                state = receipt.new_state;
            }
            prop_assert!(classify_regime(&state).is_ok());
            prop_assert!(
                curve_residual(&state, &prices, &params).unwrap()
                    < num::CURVE_RESIDUAL_REL_TOL
            );
            prop_assert!(state.b > 0.0 && state.q > 0.0);
        }
    }
}
