//! Six market makers behind one uniform swap interface.
//!
//! Pairwise makers (CSMM, CPMM, PMM) keep one pool per unordered token
//! pair; their multi-token counterparts (MCSMM, MCPMM, MPMM) keep a single
//! shared pool and trade pairwise against it. Every maker exposes the same
//! quote/execute surface plus the pool-accounting hooks the simulator needs
//! for capital-efficiency and impermanent-loss metrics.
//!
//! Accounting units follow the provisioning mechanics: makers provisioned
//! with single token types count every (pool, token) slot as one unit,
//! while CPMM counts each pair pool and MCPMM the whole pool as one unit.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::curve::{self, OracleQuote, PairCurveState, PmmParams, SwapReceipt, SwapSide};
use crate::error::{Error, Result};
use crate::num;
use crate::recovery::{self, DepositRecord};

/// Token symbol; unique within a universe.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenId(String);

impl TokenId {
    pub fn new(symbol: impl Into<String>) -> Self {
        Self(symbol.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl core::fmt::Display for TokenId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Per-token numeraire prices at one timestep.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PriceMap {
    prices: BTreeMap<TokenId, f64>,
}

impl PriceMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, token: TokenId, price: f64) -> Result<()> {
        if !num::is_pos_finite(price) {
            return Err(Error::InvalidInput("price must be positive and finite"));
        }
        self.prices.insert(token, price);
        Ok(())
    }

    pub fn get(&self, token: &TokenId) -> Result<f64> {
        self.prices.get(token).copied().ok_or(Error::UnknownToken)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &TokenId> {
        self.prices.keys()
    }

    /// Oracle quote for a pair, base first.
    pub fn pair_quote(&self, base: &TokenId, quote: &TokenId) -> Result<OracleQuote> {
        OracleQuote::new(self.get(base)?, self.get(quote)?)
    }
}

/// Unordered token pair in canonical (lexicographic) order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PairKey {
    base: TokenId,
    quote: TokenId,
}

impl PairKey {
    pub fn new(a: &TokenId, b: &TokenId) -> Result<Self> {
        match a.cmp(b) {
            core::cmp::Ordering::Less => Ok(Self {
                base: a.clone(),
                quote: b.clone(),
            }),
            core::cmp::Ordering::Greater => Ok(Self {
                base: b.clone(),
                quote: a.clone(),
            }),
            core::cmp::Ordering::Equal => Err(Error::SameToken),
        }
    }

    pub fn base(&self) -> &TokenId {
        &self.base
    }

    pub fn quote(&self) -> &TokenId {
        &self.quote
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.base, self.quote)
    }
}

/// Identity of one pool-accounting unit for impermanent-loss purposes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct UnitId(String);

impl UnitId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl core::fmt::Display for UnitId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Outcome of one executed (or previewed) swap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapOutcome {
    pub amount_in: f64,
    pub amount_out: f64,
}

/// Output amount of a market-rate swap. The capital-efficiency metric
/// divides by this exact expression, so constant-sum makers score exactly
/// one on every accepted swap.
#[inline]
pub fn market_rate_out(amount_in: f64, p_in: f64, p_out: f64) -> f64 {
    amount_in * p_in / p_out
}

/// One accounting unit's identity, initial composition, and initial value.
#[derive(Debug, Clone)]
struct UnitInit {
    id: UnitId,
    composition: Vec<(TokenId, f64)>,
    h0: f64,
}

fn unit_value(composition: &[(TokenId, f64)], prices: &PriceMap) -> Result<f64> {
    let mut v = 0.0;
    for (token, amount) in composition {
        v += amount * prices.get(token)?;
    }
    Ok(v)
}

fn find_unit<'a>(units: &'a [UnitInit], unit: &UnitId) -> Result<&'a UnitInit> {
    units
        .iter()
        .find(|u| &u.id == unit)
        .ok_or(Error::InvalidInput("unknown accounting unit"))
}

fn split_unit_id(unit: &UnitId) -> Result<(&str, &str)> {
    unit.as_str()
        .split_once('/')
        .ok_or(Error::InvalidInput("unknown accounting unit"))
}

/// The uniform maker interface the simulator drives.
pub trait Maker {
    /// Short machine-friendly label, unique within a scenario.
    fn label(&self) -> &str;

    /// Read-only preview: exactly the output `execute` would produce on the
    /// same state.
    fn quote(
        &self,
        token_in: &TokenId,
        token_out: &TokenId,
        amount_in: f64,
        prices: &PriceMap,
    ) -> Result<f64>;

    /// Executes the swap, updating pool state. Refused swaps leave the
    /// state untouched.
    fn execute(
        &mut self,
        token_in: &TokenId,
        token_out: &TokenId,
        amount_in: f64,
        prices: &PriceMap,
    ) -> Result<SwapOutcome>;

    /// Every accounting unit of this maker, in a fixed order.
    fn unit_ids(&self) -> Vec<UnitId>;

    /// The accounting units affected by a swap between the given tokens.
    fn units_touched(&self, token_in: &TokenId, token_out: &TokenId) -> Result<Vec<UnitId>>;

    /// Current value of a unit's tokens: sum of balance times price.
    fn portfolio_value(&self, unit: &UnitId, prices: &PriceMap) -> Result<f64>;

    /// Value of the unit's initial composition at current prices.
    fn holding_value(&self, unit: &UnitId, prices: &PriceMap) -> Result<f64>;

    /// The unit's value at initialization.
    fn initial_value(&self, unit: &UnitId) -> Result<f64>;

    /// Signed impermanent loss `(V_t - H_t) / H_0` of one unit.
    fn impermanent_loss(&self, unit: &UnitId, prices: &PriceMap) -> Result<f64> {
        let v = self.portfolio_value(unit, prices)?;
        let h = self.holding_value(unit, prices)?;
        Ok((v - h) / self.initial_value(unit)?)
    }
}

pub type BoxedMaker = Box<dyn Maker>;

// ---------------------------------------------------------------------------
// Pairwise constant-sum maker
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct TwoPool {
    bal: [f64; 2],
    init: [f64; 2],
}

/// Constant-sum maker: every swap executes at the oracle market rate; swaps
/// that would consume more than the pool holds are refused.
pub struct Csmm {
    label: String,
    pools: BTreeMap<PairKey, TwoPool>,
    units: Vec<UnitInit>,
}

impl Csmm {
    /// `pools` lists each pair with its per-side initial amounts in
    /// canonical pair order.
    pub fn new(pools: Vec<(PairKey, [f64; 2])>, initial_prices: &PriceMap) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut units = Vec::new();
        for (key, init) in pools {
            if !(num::is_pos_finite(init[0]) && num::is_pos_finite(init[1])) {
                return Err(Error::InvalidInput("pool amounts must be positive"));
            }
            for (slot, token) in [(0, key.base().clone()), (1, key.quote().clone())] {
                let comp = alloc::vec![(token.clone(), init[slot])];
                let h0 = unit_value(&comp, initial_prices)?;
                units.push(UnitInit {
                    id: UnitId::new(format!("{}/{}", key.label(), token)),
                    composition: comp,
                    h0,
                });
            }
            map.insert(key, TwoPool { bal: init, init });
        }
        Ok(Self {
            label: "csmm".to_string(),
            pools: map,
            units,
        })
    }

    fn plan(
        &self,
        token_in: &TokenId,
        token_out: &TokenId,
        amount_in: f64,
        prices: &PriceMap,
    ) -> Result<(PairKey, usize, f64)> {
        if !num::is_pos_finite(amount_in) {
            return Err(Error::InvalidInput("amount_in must be positive and finite"));
        }
        let key = PairKey::new(token_in, token_out)?;
        let pool = self.pools.get(&key).ok_or(Error::UnknownToken)?;
        let out_slot = if token_out == key.base() { 0 } else { 1 };
        let amount_out = market_rate_out(amount_in, prices.get(token_in)?, prices.get(token_out)?);
        if amount_out > pool.bal[out_slot] {
            return Err(Error::SwapRefused);
        }
        Ok((key, out_slot, amount_out))
    }
}

impl Maker for Csmm {
    fn label(&self) -> &str {
        &self.label
    }

    fn quote(
        &self,
        token_in: &TokenId,
        token_out: &TokenId,
        amount_in: f64,
        prices: &PriceMap,
    ) -> Result<f64> {
        self.plan(token_in, token_out, amount_in, prices)
            .map(|(_, _, out)| out)
    }

    fn execute(
        &mut self,
        token_in: &TokenId,
        token_out: &TokenId,
        amount_in: f64,
        prices: &PriceMap,
    ) -> Result<SwapOutcome> {
        let (key, out_slot, amount_out) = self.plan(token_in, token_out, amount_in, prices)?;
        let pool = self.pools.get_mut(&key).expect("pool exists");
        pool.bal[1 - out_slot] += amount_in;
        pool.bal[out_slot] -= amount_out;
        Ok(SwapOutcome {
            amount_in,
            amount_out,
        })
    }

    fn unit_ids(&self) -> Vec<UnitId> {
        self.units.iter().map(|u| u.id.clone()).collect()
    }

    fn units_touched(&self, token_in: &TokenId, token_out: &TokenId) -> Result<Vec<UnitId>> {
        let key = PairKey::new(token_in, token_out)?;
        Ok(alloc::vec![
            UnitId::new(format!("{}/{}", key.label(), key.base())),
            UnitId::new(format!("{}/{}", key.label(), key.quote())),
        ])
    }

    fn portfolio_value(&self, unit: &UnitId, prices: &PriceMap) -> Result<f64> {
        let (pair_label, token) = split_unit_id(unit)?;
        let (key, pool) = self
            .pools
            .iter()
            .find(|(k, _)| k.label() == pair_label)
            .ok_or(Error::InvalidInput("unknown accounting unit"))?;
        let slot = if token == key.base().as_str() { 0 } else { 1 };
        Ok(pool.bal[slot] * prices.get(&TokenId::new(token))?)
    }

    fn holding_value(&self, unit: &UnitId, prices: &PriceMap) -> Result<f64> {
        unit_value(&find_unit(&self.units, unit)?.composition, prices)
    }

    fn initial_value(&self, unit: &UnitId) -> Result<f64> {
        Ok(find_unit(&self.units, unit)?.h0)
    }
}

// ---------------------------------------------------------------------------
// Pairwise constant-product maker
// ---------------------------------------------------------------------------

/// Output-side balance after a product-conserving swap.
#[inline]
pub fn cpmm_new_out_balance(bal_in: f64, bal_out: f64, amount_in: f64) -> f64 {
    bal_in * bal_out / (bal_in + amount_in)
}

/// Constant-product maker: each pair pool conserves the product of its two
/// balances.
pub struct Cpmm {
    label: String,
    pools: BTreeMap<PairKey, TwoPool>,
    units: Vec<UnitInit>,
}

impl Cpmm {
    pub fn new(pools: Vec<(PairKey, [f64; 2])>, initial_prices: &PriceMap) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut units = Vec::new();
        for (key, init) in pools {
            if !(num::is_pos_finite(init[0]) && num::is_pos_finite(init[1])) {
                return Err(Error::InvalidInput("pool amounts must be positive"));
            }
            let comp = alloc::vec![
                (key.base().clone(), init[0]),
                (key.quote().clone(), init[1]),
            ];
            let h0 = unit_value(&comp, initial_prices)?;
            units.push(UnitInit {
                id: UnitId::new(key.label()),
                composition: comp,
                h0,
            });
            map.insert(key, TwoPool { bal: init, init });
        }
        Ok(Self {
            label: "cpmm".to_string(),
            pools: map,
            units,
        })
    }

    fn plan(
        &self,
        token_in: &TokenId,
        token_out: &TokenId,
        amount_in: f64,
    ) -> Result<(PairKey, usize, f64, f64)> {
        if !num::is_pos_finite(amount_in) {
            return Err(Error::InvalidInput("amount_in must be positive and finite"));
        }
        let key = PairKey::new(token_in, token_out)?;
        let pool = self.pools.get(&key).ok_or(Error::UnknownToken)?;
        let out_slot = if token_out == key.base() { 0 } else { 1 };
        let (bal_in, bal_out) = (pool.bal[1 - out_slot], pool.bal[out_slot]);
        let new_out_bal = cpmm_new_out_balance(bal_in, bal_out, amount_in);
        if new_out_bal < num::DUST_FLOOR_FRACTION * pool.init[out_slot] {
            return Err(Error::DustFloor);
        }
        Ok((key, out_slot, new_out_bal, bal_out - new_out_bal))
    }
}

impl Maker for Cpmm {
    fn label(&self) -> &str {
        &self.label
    }

    fn quote(
        &self,
        token_in: &TokenId,
        token_out: &TokenId,
        amount_in: f64,
        _prices: &PriceMap,
    ) -> Result<f64> {
        self.plan(token_in, token_out, amount_in)
            .map(|(_, _, _, out)| out)
    }

    fn execute(
        &mut self,
        token_in: &TokenId,
        token_out: &TokenId,
        amount_in: f64,
        _prices: &PriceMap,
    ) -> Result<SwapOutcome> {
        let (key, out_slot, new_out_bal, amount_out) = self.plan(token_in, token_out, amount_in)?;
        let pool = self.pools.get_mut(&key).expect("pool exists");
        pool.bal[1 - out_slot] += amount_in;
        pool.bal[out_slot] = new_out_bal;
        Ok(SwapOutcome {
            amount_in,
            amount_out,
        })
    }

    fn unit_ids(&self) -> Vec<UnitId> {
        self.units.iter().map(|u| u.id.clone()).collect()
    }

    fn units_touched(&self, token_in: &TokenId, token_out: &TokenId) -> Result<Vec<UnitId>> {
        let key = PairKey::new(token_in, token_out)?;
        Ok(alloc::vec![UnitId::new(key.label())])
    }

    fn portfolio_value(&self, unit: &UnitId, prices: &PriceMap) -> Result<f64> {
        let (key, pool) = self
            .pools
            .iter()
            .find(|(k, _)| k.label() == unit.as_str())
            .ok_or(Error::InvalidInput("unknown accounting unit"))?;
        Ok(pool.bal[0] * prices.get(key.base())? + pool.bal[1] * prices.get(key.quote())?)
    }

    fn holding_value(&self, unit: &UnitId, prices: &PriceMap) -> Result<f64> {
        unit_value(&find_unit(&self.units, unit)?.composition, prices)
    }

    fn initial_value(&self, unit: &UnitId) -> Result<f64> {
        Ok(find_unit(&self.units, unit)?.h0)
    }
}

// ---------------------------------------------------------------------------
// Pairwise proactive maker
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct PmmPool {
    state: PairCurveState,
    last_ratio: f64,
}

/// Proactive maker: one bonding curve per pair, anchors recovered whenever
/// the pair's oracle ratio moved since its last trade.
pub struct Pmm {
    label: String,
    params: PmmParams,
    pools: BTreeMap<PairKey, PmmPool>,
    units: Vec<UnitInit>,
}

impl Pmm {
    pub fn new(
        pools: Vec<(PairKey, [f64; 2])>,
        params: PmmParams,
        initial_prices: &PriceMap,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut units = Vec::new();
        for (key, init) in pools {
            let state = PairCurveState::at_equilibrium(init[0], init[1])?;
            let last_ratio = initial_prices.pair_quote(key.base(), key.quote())?.ratio();
            for (slot, token) in [(0, key.base().clone()), (1, key.quote().clone())] {
                let comp = alloc::vec![(token.clone(), init[slot])];
                let h0 = unit_value(&comp, initial_prices)?;
                units.push(UnitInit {
                    id: UnitId::new(format!("{}/{}", key.label(), token)),
                    composition: comp,
                    h0,
                });
            }
            map.insert(key, PmmPool { state, last_ratio });
        }
        Ok(Self {
            label: format!("pmm_k{}", params.k()),
            params,
            pools: map,
            units,
        })
    }

    /// Current curve state of one pair pool.
    pub fn pool_state(&self, key: &PairKey) -> Option<&PairCurveState> {
        self.pools.get(key).map(|p| &p.state)
    }

    fn plan(
        &self,
        token_in: &TokenId,
        token_out: &TokenId,
        amount_in: f64,
        prices: &PriceMap,
    ) -> Result<(PairKey, f64, SwapReceipt)> {
        let key = PairKey::new(token_in, token_out)?;
        let pool = self.pools.get(&key).ok_or(Error::UnknownToken)?;
        let oracle = prices.pair_quote(key.base(), key.quote())?;
        let ratio = oracle.ratio();
        let mut state = pool.state;
        if ratio != pool.last_ratio {
            let r = recovery::pmm_recover(&state, &oracle, &self.params)?;
            state.b0 = r.b0_new;
            state.q0 = r.q0_new;
        }
        let side = if token_in == key.base() {
            SwapSide::BaseIn
        } else {
            SwapSide::QuoteIn
        };
        let receipt = curve::swap_exact_in(&state, &oracle, &self.params, side, amount_in)?;
        Ok((key, ratio, receipt))
    }
}

impl Maker for Pmm {
    fn label(&self) -> &str {
        &self.label
    }

    fn quote(
        &self,
        token_in: &TokenId,
        token_out: &TokenId,
        amount_in: f64,
        prices: &PriceMap,
    ) -> Result<f64> {
        self.plan(token_in, token_out, amount_in, prices)
            .map(|(_, _, receipt)| receipt.amount_out)
    }

    fn execute(
        &mut self,
        token_in: &TokenId,
        token_out: &TokenId,
        amount_in: f64,
        prices: &PriceMap,
    ) -> Result<SwapOutcome> {
        let (key, ratio, receipt) = self.plan(token_in, token_out, amount_in, prices)?;
        let pool = self.pools.get_mut(&key).expect("pool exists");
        pool.state = receipt.new_state;
        pool.last_ratio = ratio;
        Ok(SwapOutcome {
            amount_in,
            amount_out: receipt.amount_out,
        })
    }

    fn unit_ids(&self) -> Vec<UnitId> {
        self.units.iter().map(|u| u.id.clone()).collect()
    }

    fn units_touched(&self, token_in: &TokenId, token_out: &TokenId) -> Result<Vec<UnitId>> {
        let key = PairKey::new(token_in, token_out)?;
        Ok(alloc::vec![
            UnitId::new(format!("{}/{}", key.label(), key.base())),
            UnitId::new(format!("{}/{}", key.label(), key.quote())),
        ])
    }

    fn portfolio_value(&self, unit: &UnitId, prices: &PriceMap) -> Result<f64> {
        let (pair_label, token) = split_unit_id(unit)?;
        let (key, pool) = self
            .pools
            .iter()
            .find(|(k, _)| k.label() == pair_label)
            .ok_or(Error::InvalidInput("unknown accounting unit"))?;
        let bal = if token == key.base().as_str() {
            pool.state.b
        } else {
            pool.state.q
        };
        Ok(bal * prices.get(&TokenId::new(token))?)
    }

    fn holding_value(&self, unit: &UnitId, prices: &PriceMap) -> Result<f64> {
        unit_value(&find_unit(&self.units, unit)?.composition, prices)
    }

    fn initial_value(&self, unit: &UnitId) -> Result<f64> {
        Ok(find_unit(&self.units, unit)?.h0)
    }
}

// ---------------------------------------------------------------------------
// Multi-token constant-sum maker
// ---------------------------------------------------------------------------

/// Multi-token constant-sum maker: one shared pool, market-rate swaps.
pub struct Mcsmm {
    label: String,
    bal: BTreeMap<TokenId, f64>,
    units: Vec<UnitInit>,
}

impl Mcsmm {
    pub fn new(holdings: Vec<(TokenId, f64)>, initial_prices: &PriceMap) -> Result<Self> {
        let mut bal = BTreeMap::new();
        let mut units = Vec::new();
        for (token, amount) in holdings {
            if !num::is_pos_finite(amount) {
                return Err(Error::InvalidInput("pool amounts must be positive"));
            }
            let comp = alloc::vec![(token.clone(), amount)];
            let h0 = unit_value(&comp, initial_prices)?;
            units.push(UnitInit {
                id: UnitId::new(token.to_string()),
                composition: comp,
                h0,
            });
            bal.insert(token, amount);
        }
        Ok(Self {
            label: "mcsmm".to_string(),
            bal,
            units,
        })
    }

    fn plan(
        &self,
        token_in: &TokenId,
        token_out: &TokenId,
        amount_in: f64,
        prices: &PriceMap,
    ) -> Result<f64> {
        if !num::is_pos_finite(amount_in) {
            return Err(Error::InvalidInput("amount_in must be positive and finite"));
        }
        if token_in == token_out {
            return Err(Error::SameToken);
        }
        if !self.bal.contains_key(token_in) {
            return Err(Error::UnknownToken);
        }
        let bal_out = *self.bal.get(token_out).ok_or(Error::UnknownToken)?;
        let amount_out = market_rate_out(amount_in, prices.get(token_in)?, prices.get(token_out)?);
        if amount_out > bal_out {
            return Err(Error::SwapRefused);
        }
        Ok(amount_out)
    }
}

impl Maker for Mcsmm {
    fn label(&self) -> &str {
        &self.label
    }

    fn quote(
        &self,
        token_in: &TokenId,
        token_out: &TokenId,
        amount_in: f64,
        prices: &PriceMap,
    ) -> Result<f64> {
        self.plan(token_in, token_out, amount_in, prices)
    }

    fn execute(
        &mut self,
        token_in: &TokenId,
        token_out: &TokenId,
        amount_in: f64,
        prices: &PriceMap,
    ) -> Result<SwapOutcome> {
        let amount_out = self.plan(token_in, token_out, amount_in, prices)?;
        *self.bal.get_mut(token_in).expect("token exists") += amount_in;
        *self.bal.get_mut(token_out).expect("token exists") -= amount_out;
        Ok(SwapOutcome {
            amount_in,
            amount_out,
        })
    }

    fn unit_ids(&self) -> Vec<UnitId> {
        self.units.iter().map(|u| u.id.clone()).collect()
    }

    fn units_touched(&self, token_in: &TokenId, token_out: &TokenId) -> Result<Vec<UnitId>> {
        if token_in == token_out {
            return Err(Error::SameToken);
        }
        Ok(alloc::vec![
            UnitId::new(token_in.to_string()),
            UnitId::new(token_out.to_string()),
        ])
    }

    fn portfolio_value(&self, unit: &UnitId, prices: &PriceMap) -> Result<f64> {
        let token = TokenId::new(unit.as_str());
        let bal = *self
            .bal
            .get(&token)
            .ok_or(Error::InvalidInput("unknown accounting unit"))?;
        Ok(bal * prices.get(&token)?)
    }

    fn holding_value(&self, unit: &UnitId, prices: &PriceMap) -> Result<f64> {
        unit_value(&find_unit(&self.units, unit)?.composition, prices)
    }

    fn initial_value(&self, unit: &UnitId) -> Result<f64> {
        Ok(find_unit(&self.units, unit)?.h0)
    }
}

// ---------------------------------------------------------------------------
// Multi-token constant-product maker
// ---------------------------------------------------------------------------

/// Multi-token constant-product maker: the product of all token balances is
/// invariant. A pairwise swap holds every other balance fixed, so
/// conserving the global product reduces to conserving the traded pair's
/// product.
pub struct Mcpmm {
    label: String,
    bal: BTreeMap<TokenId, f64>,
    init: BTreeMap<TokenId, f64>,
    unit: UnitInit,
}

impl Mcpmm {
    pub fn new(holdings: Vec<(TokenId, f64)>, initial_prices: &PriceMap) -> Result<Self> {
        let mut bal = BTreeMap::new();
        let mut comp = Vec::new();
        for (token, amount) in &holdings {
            if !num::is_pos_finite(*amount) {
                return Err(Error::InvalidInput("pool amounts must be positive"));
            }
            bal.insert(token.clone(), *amount);
            comp.push((token.clone(), *amount));
        }
        let h0 = unit_value(&comp, initial_prices)?;
        Ok(Self {
            label: "mcpmm".to_string(),
            init: bal.clone(),
            bal,
            unit: UnitInit {
                id: UnitId::new("pool"),
                composition: comp,
                h0,
            },
        })
    }

    /// Product of all token balances (invariant-check hook).
    pub fn global_product(&self) -> f64 {
        self.bal.values().product()
    }

    fn plan(&self, token_in: &TokenId, token_out: &TokenId, amount_in: f64) -> Result<(f64, f64)> {
        if !num::is_pos_finite(amount_in) {
            return Err(Error::InvalidInput("amount_in must be positive and finite"));
        }
        if token_in == token_out {
            return Err(Error::SameToken);
        }
        let bal_in = *self.bal.get(token_in).ok_or(Error::UnknownToken)?;
        let bal_out = *self.bal.get(token_out).ok_or(Error::UnknownToken)?;
        let new_out_bal = cpmm_new_out_balance(bal_in, bal_out, amount_in);
        if new_out_bal < num::DUST_FLOOR_FRACTION * self.init[token_out] {
            return Err(Error::DustFloor);
        }
        Ok((new_out_bal, bal_out - new_out_bal))
    }
}

impl Maker for Mcpmm {
    fn label(&self) -> &str {
        &self.label
    }

    fn quote(
        &self,
        token_in: &TokenId,
        token_out: &TokenId,
        amount_in: f64,
        _prices: &PriceMap,
    ) -> Result<f64> {
        self.plan(token_in, token_out, amount_in)
            .map(|(_, out)| out)
    }

    fn execute(
        &mut self,
        token_in: &TokenId,
        token_out: &TokenId,
        amount_in: f64,
        _prices: &PriceMap,
    ) -> Result<SwapOutcome> {
        let (new_out_bal, amount_out) = self.plan(token_in, token_out, amount_in)?;
        *self.bal.get_mut(token_in).expect("token exists") += amount_in;
        *self.bal.get_mut(token_out).expect("token exists") = new_out_bal;
        Ok(SwapOutcome {
            amount_in,
            amount_out,
        })
    }

    fn unit_ids(&self) -> Vec<UnitId> {
        alloc::vec![self.unit.id.clone()]
    }

    fn units_touched(&self, token_in: &TokenId, token_out: &TokenId) -> Result<Vec<UnitId>> {
        if token_in == token_out {
            return Err(Error::SameToken);
        }
        Ok(alloc::vec![self.unit.id.clone()])
    }

    fn portfolio_value(&self, unit: &UnitId, prices: &PriceMap) -> Result<f64> {
        if unit != &self.unit.id {
            return Err(Error::InvalidInput("unknown accounting unit"));
        }
        let mut v = 0.0;
        for (token, bal) in &self.bal {
            v += bal * prices.get(token)?;
        }
        Ok(v)
    }

    fn holding_value(&self, unit: &UnitId, prices: &PriceMap) -> Result<f64> {
        if unit != &self.unit.id {
            return Err(Error::InvalidInput("unknown accounting unit"));
        }
        unit_value(&self.unit.composition, prices)
    }

    fn initial_value(&self, unit: &UnitId) -> Result<f64> {
        if unit != &self.unit.id {
            return Err(Error::InvalidInput("unknown accounting unit"));
        }
        Ok(self.unit.h0)
    }
}

// ---------------------------------------------------------------------------
// Multi-token proactive maker
// ---------------------------------------------------------------------------

/// Multi-token proactive maker: one shared pool; each pair trade sees a
/// bonding curve built from the two tokens' balances and anchors, with the
/// deposit-tracking retarget run whenever the pair's oracle ratio moved.
/// When the retarget's constraint domain is empty the maker falls back to
/// plain recovery.
pub struct Mpmm {
    label: String,
    bal: BTreeMap<TokenId, f64>,
    anchor: BTreeMap<TokenId, f64>,
    deposit: BTreeMap<TokenId, f64>,
    k_per_token: BTreeMap<TokenId, f64>,
    last_ratio: BTreeMap<PairKey, f64>,
    units: Vec<UnitInit>,
}

struct MpmmPlan {
    key: PairKey,
    ratio: f64,
    anchors: (f64, f64),
    receipt: SwapReceipt,
}

impl Mpmm {
    /// `holdings` lists each token with its deposited amount and its
    /// slippage parameter.
    pub fn new(holdings: Vec<(TokenId, f64, f64)>, initial_prices: &PriceMap) -> Result<Self> {
        let mut bal = BTreeMap::new();
        let mut k_per_token = BTreeMap::new();
        let mut units = Vec::new();
        let mut k_label = None;
        for (token, amount, k) in holdings {
            if !num::is_pos_finite(amount) {
                return Err(Error::InvalidInput("pool amounts must be positive"));
            }
            PmmParams::new(k)?;
            let comp = alloc::vec![(token.clone(), amount)];
            let h0 = unit_value(&comp, initial_prices)?;
            units.push(UnitInit {
                id: UnitId::new(token.to_string()),
                composition: comp,
                h0,
            });
            bal.insert(token.clone(), amount);
            k_per_token.insert(token, k);
            k_label.get_or_insert(k);
        }
        let mut last_ratio = BTreeMap::new();
        let tokens: Vec<TokenId> = bal.keys().cloned().collect();
        for (i, a) in tokens.iter().enumerate() {
            for b in tokens.iter().skip(i + 1) {
                let key = PairKey::new(a, b)?;
                let ratio = initial_prices.pair_quote(key.base(), key.quote())?.ratio();
                last_ratio.insert(key, ratio);
            }
        }
        Ok(Self {
            label: format!("mpmm_k{}", k_label.unwrap_or(0.5)),
            anchor: bal.clone(),
            deposit: bal.clone(),
            bal,
            k_per_token,
            last_ratio,
            units,
        })
    }

    /// Pair view of the shared pool: balances and anchors of the two tokens
    /// in canonical order.
    pub fn pair_view(&self, key: &PairKey) -> Option<(f64, f64, f64, f64)> {
        Some((
            *self.bal.get(key.base())?,
            *self.bal.get(key.quote())?,
            *self.anchor.get(key.base())?,
            *self.anchor.get(key.quote())?,
        ))
    }

    fn plan(
        &self,
        token_in: &TokenId,
        token_out: &TokenId,
        amount_in: f64,
        prices: &PriceMap,
    ) -> Result<MpmmPlan> {
        if token_in == token_out {
            return Err(Error::SameToken);
        }
        let key = PairKey::new(token_in, token_out)?;
        let b = *self.bal.get(key.base()).ok_or(Error::UnknownToken)?;
        let q = *self.bal.get(key.quote()).ok_or(Error::UnknownToken)?;
        let mut b0 = self.anchor[key.base()];
        let mut q0 = self.anchor[key.quote()];
        let oracle = prices.pair_quote(key.base(), key.quote())?;
        let ratio = oracle.ratio();
        let k = recovery::pair_k(self.k_per_token[key.base()], self.k_per_token[key.quote()])?;
        let params = PmmParams::new(k)?;
        // Trades on other pairs move a shared token's balance and anchor
        // independently, so this pair's view may drift off its own curve
        // even at an unchanged ratio; retarget restores it.
        let consistent = match PairCurveState::new(b, q, b0, q0) {
            Ok(state) => {
                curve::curve_residual(&state, &oracle, &params)? < num::CURVE_RESIDUAL_REL_TOL
            }
            Err(_) => false,
        };
        if ratio != self.last_ratio[&key] || !consistent {
            let deposits = DepositRecord::new(self.deposit[key.base()], self.deposit[key.quote()])?;
            let retarget = match recovery::mpmm_retarget(b, q, b0, q0, &deposits, &oracle, &params)
            {
                Ok(r) => r,
                Err(Error::RetargetInfeasible) => {
                    let state = PairCurveState::new(b, q, b0, q0)?;
                    recovery::pmm_recover(&state, &oracle, &params)?
                }
                Err(e) => return Err(e),
            };
            b0 = retarget.b0_new;
            q0 = retarget.q0_new;
        }
        let state = PairCurveState::new(b, q, b0, q0)?;
        let side = if token_in == key.base() {
            SwapSide::BaseIn
        } else {
            SwapSide::QuoteIn
        };
        let receipt = curve::swap_exact_in(&state, &oracle, &params, side, amount_in)?;
        Ok(MpmmPlan {
            key,
            ratio,
            anchors: (b0, q0),
            receipt,
        })
    }
}

impl Maker for Mpmm {
    fn label(&self) -> &str {
        &self.label
    }

    fn quote(
        &self,
        token_in: &TokenId,
        token_out: &TokenId,
        amount_in: f64,
        prices: &PriceMap,
    ) -> Result<f64> {
        self.plan(token_in, token_out, amount_in, prices)
            .map(|p| p.receipt.amount_out)
    }

    fn execute(
        &mut self,
        token_in: &TokenId,
        token_out: &TokenId,
        amount_in: f64,
        prices: &PriceMap,
    ) -> Result<SwapOutcome> {
        let MpmmPlan {
            key,
            ratio,
            anchors,
            receipt,
        } = self.plan(token_in, token_out, amount_in, prices)?;
        *self.bal.get_mut(key.base()).expect("token exists") = receipt.new_state.b;
        *self.bal.get_mut(key.quote()).expect("token exists") = receipt.new_state.q;
        *self.anchor.get_mut(key.base()).expect("token exists") = anchors.0;
        *self.anchor.get_mut(key.quote()).expect("token exists") = anchors.1;
        self.last_ratio.insert(key, ratio);
        Ok(SwapOutcome {
            amount_in,
            amount_out: receipt.amount_out,
        })
    }

    fn unit_ids(&self) -> Vec<UnitId> {
        self.units.iter().map(|u| u.id.clone()).collect()
    }

    fn units_touched(&self, token_in: &TokenId, token_out: &TokenId) -> Result<Vec<UnitId>> {
        if token_in == token_out {
            return Err(Error::SameToken);
        }
        Ok(alloc::vec![
            UnitId::new(token_in.to_string()),
            UnitId::new(token_out.to_string()),
        ])
    }

    fn portfolio_value(&self, unit: &UnitId, prices: &PriceMap) -> Result<f64> {
        let token = TokenId::new(unit.as_str());
        let bal = *self
            .bal
            .get(&token)
            .ok_or(Error::InvalidInput("unknown accounting unit"))?;
        Ok(bal * prices.get(&token)?)
    }

    fn holding_value(&self, unit: &UnitId, prices: &PriceMap) -> Result<f64> {
        unit_value(&find_unit(&self.units, unit)?.composition, prices)
    }

    fn initial_value(&self, unit: &UnitId) -> Result<f64> {
        Ok(find_unit(&self.units, unit)?.h0)
    }
}
