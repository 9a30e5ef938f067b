//! Time-stepped agent simulation: random-walk mobility in a bounded area,
//! per-zone offer/selection rounds with an all-or-nothing person threshold,
//! and ask-price adaptation.
//!
//! One run is single-threaded and fully deterministic: a single seeded RNG
//! stream, agents iterated by id, zones by id. Parallelism belongs one level
//! up, across independent runs.

mod config;
mod integration;

pub use config::{grid_zones, ConfigError, Region, SimConfig, SpawnModel, ZoneSpec};
pub use integration::{run_integration, IntegrationError, IntegrationReport};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::currency::Currency;

/// A simulated user: position, current ask price, accumulated reward and
/// the timestamp of its most recent sensed datum.
#[derive(Clone, Debug, Serialize)]
pub struct Agent {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub ask: Currency,
    pub accumulated_reward: Currency,
    pub data_timestamp: u64,
}

/// A zone contract plus its running counters.
#[derive(Clone, Debug, Serialize)]
pub struct ZoneState {
    pub spec: ZoneSpec,
    pub satisfied_rounds: u64,
    pub decision_rounds: u64,
    pub total_paid: Currency,
    pub payments_count: u64,
}

impl ZoneState {
    fn new(spec: ZoneSpec) -> Self {
        ZoneState {
            spec,
            satisfied_rounds: 0,
            decision_rounds: 0,
            total_paid: Currency::ZERO,
            payments_count: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Offer {
    pub agent: u32,
    pub ask: Currency,
    pub data_timestamp: u64,
}

/// One zone decision round. `satisfied` implies exactly `min_persons`
/// selected agents; an unsatisfied round selects and pays nobody.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OfferRound {
    pub zone: u32,
    pub step: u64,
    pub offers: Vec<Offer>,
    pub selected: Vec<u32>,
    pub satisfied: bool,
}

/// Live simulation state. Mutating entry points are the per-tick operations
/// below; construct with `SimState::new` and drive with `step`, or use
/// `run_simulation` for a whole run.
pub struct SimState {
    pub cfg: SimConfig,
    pub agents: Vec<Agent>,
    pub zones: Vec<ZoneState>,
    /// Completed ticks; simulated time is `tick * step_length_seconds`.
    pub tick: u64,
    rng: ChaCha8Rng,
}

impl SimState {
    pub fn new(cfg: &SimConfig) -> Result<SimState, ConfigError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        let agents = (0..cfg.num_agents)
            .map(|id| {
                let (x, y) = spawn_position(cfg, &mut rng);
                Agent {
                    id: id as u32,
                    x,
                    y,
                    ask: cfg.initial_ask,
                    accumulated_reward: Currency::ZERO,
                    data_timestamp: 0,
                }
            })
            .collect();
        let mut zones: Vec<ZoneState> = cfg.zones.iter().cloned().map(ZoneState::new).collect();
        zones.sort_by_key(|z| z.spec.id);
        Ok(SimState {
            cfg: cfg.clone(),
            agents,
            zones,
            tick: 0,
            rng,
        })
    }

    pub fn now(&self) -> u64 {
        self.tick * self.cfg.step_length_seconds
    }

    /// Advances one tick: move and sense, then run one decision round per
    /// zone. Returns the rounds in zone order.
    pub fn step(&mut self) -> Vec<OfferRound> {
        self.tick += 1;
        step_agents(self);
        let mut rounds = Vec::with_capacity(self.zones.len());
        for zone_idx in 0..self.zones.len() {
            let offers = collect_offers(self, zone_idx);
            let round = select_and_pay(self, zone_idx, offers);
            update_asks(self, &round);
            rounds.push(round);
        }
        rounds
    }
}

fn spawn_position(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> (f64, f64) {
    match cfg.spawn {
        SpawnModel::Uniform => (
            rng.random_range(0.0..=cfg.area_width),
            rng.random_range(0.0..=cfg.area_height),
        ),
        SpawnModel::Center => {
            let nx = Normal::new(cfg.area_width / 2.0, cfg.spawn_spread)
                .expect("spawn_spread validated positive");
            let ny = Normal::new(cfg.area_height / 2.0, cfg.spawn_spread)
                .expect("spawn_spread validated positive");
            (
                nx.sample(rng).clamp(0.0, cfg.area_width),
                ny.sample(rng).clamp(0.0, cfg.area_height),
            )
        }
    }
}

/// Displaces every agent by an independent uniform step of at most
/// `walk_step` per axis, clamped to the (non-toroidal) area, then lets it
/// sense a fresh datum with the configured probability.
pub fn step_agents(state: &mut SimState) {
    let cfg = &state.cfg;
    let now = state.tick * cfg.step_length_seconds;
    let w = cfg.walk_step;
    for agent in &mut state.agents {
        let dx = state.rng.random_range(-w..=w);
        let dy = state.rng.random_range(-w..=w);
        agent.x = (agent.x + dx).clamp(0.0, cfg.area_width);
        agent.y = (agent.y + dy).clamp(0.0, cfg.area_height);
        let senses = if cfg.sensing_probability >= 1.0 {
            true
        } else if cfg.sensing_probability <= 0.0 {
            false
        } else {
            state.rng.random::<f64>() < cfg.sensing_probability
        };
        if senses {
            agent.data_timestamp = now;
        }
    }
}

/// One offer per agent that is inside the zone and holds data no older than
/// the zone's freshness window. Agents iterate by id, so offer order is
/// deterministic.
pub fn collect_offers(state: &SimState, zone_idx: usize) -> Vec<Offer> {
    let zone = &state.zones[zone_idx];
    let now = state.now();
    state
        .agents
        .iter()
        .filter(|a| {
            zone.spec.region.contains(a.x, a.y)
                && now - a.data_timestamp <= zone.spec.freshness_window
        })
        .map(|a| Offer {
            agent: a.id,
            ask: a.ask,
            data_timestamp: a.data_timestamp,
        })
        .collect()
}

/// Runs the zone's decision round: if the threshold is met, selects exactly
/// `min_persons` offers by ascending ask (ties broken by the seeded RNG) and
/// pays each selected agent its own ask; otherwise nobody is selected.
pub fn select_and_pay(state: &mut SimState, zone_idx: usize, offers: Vec<Offer>) -> OfferRound {
    let min_persons = state.zones[zone_idx].spec.min_persons as usize;
    let step = state.tick;
    let zone_id = state.zones[zone_idx].spec.id;

    let satisfied = offers.len() >= min_persons;
    let mut selected = Vec::new();
    if satisfied {
        let mut order: Vec<(Currency, u64, usize)> = offers
            .iter()
            .enumerate()
            .map(|(i, o)| (o.ask, state.rng.random::<u64>(), i))
            .collect();
        order.sort_unstable();
        selected.reserve(min_persons);
        for &(ask, _, offer_idx) in order.iter().take(min_persons) {
            let agent_id = offers[offer_idx].agent;
            state.agents[agent_id as usize].accumulated_reward += ask;
            let zone = &mut state.zones[zone_idx];
            zone.total_paid += ask;
            zone.payments_count += 1;
            selected.push(agent_id);
        }
        state.zones[zone_idx].satisfied_rounds += 1;
    }
    state.zones[zone_idx].decision_rounds += 1;

    OfferRound {
        zone: zone_id,
        step,
        offers,
        selected,
        satisfied,
    }
}

/// Ask adaptation after a round: selected agents raise their ask by
/// `ask_delta`; offerers that were not selected (including every offerer of
/// an unsatisfied round) lower theirs, clamped at `ask_floor`. Agents that
/// did not offer are untouched.
pub fn update_asks(state: &mut SimState, round: &OfferRound) {
    let delta = state.cfg.ask_delta;
    let floor = state.cfg.ask_floor;
    for offer in &round.offers {
        let agent = &mut state.agents[offer.agent as usize];
        if round.selected.contains(&offer.agent) {
            agent.ask += delta;
        } else {
            agent.ask = (agent.ask - delta).max(floor);
        }
    }
}

/// Everything a finished run produces: per-agent totals, per-zone counters
/// and the full round-by-round trace.
#[derive(Clone, Debug, Serialize)]
pub struct SimResult {
    pub agent_rewards: Vec<Currency>,
    pub final_asks: Vec<Currency>,
    pub zones: Vec<ZoneState>,
    pub trace: Vec<OfferRound>,
}

impl SimResult {
    pub fn total_rewards(&self) -> Currency {
        self.agent_rewards.iter().sum()
    }

    pub fn total_paid_by_zones(&self) -> Currency {
        self.zones.iter().map(|z| z.total_paid).sum()
    }

    /// Mean accumulated reward per agent, in milli-units.
    pub fn mean_reward_milli(&self) -> f64 {
        if self.agent_rewards.is_empty() {
            return 0.0;
        }
        self.total_rewards().milli() as f64 / self.agent_rewards.len() as f64
    }

    /// Nearest-rank 90th percentile of per-agent accumulated rewards.
    pub fn p90_reward(&self) -> Currency {
        percentile(&self.agent_rewards, 0.90)
    }

    /// Pooled satisfied ratio over all zones.
    pub fn overall_satisfied_ratio(&self) -> f64 {
        let decided: u64 = self.zones.iter().map(|z| z.decision_rounds).sum();
        if decided == 0 {
            return 0.0;
        }
        let satisfied: u64 = self.zones.iter().map(|z| z.satisfied_rounds).sum();
        satisfied as f64 / decided as f64
    }

    /// The trace as line-delimited JSON, one round per line.
    pub fn trace_jsonl(&self) -> String {
        let mut out = String::new();
        for round in &self.trace {
            out.push_str(&serde_json::to_string(round).expect("rounds serialize"));
            out.push('\n');
        }
        out
    }
}

/// Nearest-rank percentile (q in (0, 1]) of a currency sample.
pub fn percentile(values: &[Currency], q: f64) -> Currency {
    if values.is_empty() {
        return Currency::ZERO;
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Runs a full simulation. Deterministic: the same config (including seed)
/// always produces the same `SimResult`.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimResult, ConfigError> {
    let mut state = SimState::new(cfg)?;
    let mut trace = Vec::with_capacity((cfg.total_steps as usize) * cfg.zones.len());
    for _ in 0..cfg.total_steps {
        trace.extend(state.step());
    }
    Ok(SimResult {
        agent_rewards: state.agents.iter().map(|a| a.accumulated_reward).collect(),
        final_asks: state.agents.iter().map(|a| a.ask).collect(),
        zones: state.zones,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SimConfig {
        SimConfig {
            num_agents: 20,
            total_steps: 50,
            zones: grid_zones(1, 1, 1000.0, 1000.0, 400.0, 3, 3600),
            ..SimConfig::default()
        }
    }

    #[test]
    fn zero_walk_step_freezes_positions() {
        let cfg = SimConfig {
            walk_step: 0.0,
            ..small_cfg()
        };
        let mut state = SimState::new(&cfg).unwrap();
        let before: Vec<(f64, f64)> = state.agents.iter().map(|a| (a.x, a.y)).collect();
        for _ in 0..10 {
            state.step();
        }
        let after: Vec<(f64, f64)> = state.agents.iter().map(|a| (a.x, a.y)).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn agents_never_leave_the_area() {
        let cfg = SimConfig {
            area_width: 30.0,
            area_height: 30.0,
            walk_step: 25.0,
            zones: grid_zones(1, 1, 30.0, 30.0, 10.0, 2, 600),
            ..small_cfg()
        };
        let mut state = SimState::new(&cfg).unwrap();
        for _ in 0..200 {
            state.step();
            for a in &state.agents {
                assert!(a.x >= 0.0 && a.x <= 30.0, "x out of bounds: {}", a.x);
                assert!(a.y >= 0.0 && a.y <= 30.0, "y out of bounds: {}", a.y);
            }
        }
    }

    #[test]
    fn boundary_agent_is_offered_stale_agent_is_not() {
        let cfg = SimConfig {
            num_agents: 0,
            zones: vec![ZoneSpec {
                id: 0,
                region: Region::Disc {
                    x: 100.0,
                    y: 100.0,
                    radius: 50.0,
                },
                min_persons: 1,
                freshness_window: 120,
                grid_row: None,
                grid_col: None,
            }],
            ..SimConfig::default()
        };
        let mut state = SimState::new(&cfg).unwrap();
        state.tick = 10; // now = 600s
        state.agents.push(Agent {
            id: 0,
            x: 150.0, // exactly on the disc boundary
            y: 100.0,
            ask: cfg.initial_ask,
            accumulated_reward: Currency::ZERO,
            data_timestamp: 600 - 120, // exactly at the freshness limit
        });
        state.agents.push(Agent {
            id: 1,
            x: 100.0,
            y: 100.0,
            ask: cfg.initial_ask,
            accumulated_reward: Currency::ZERO,
            data_timestamp: 600 - 121, // one second too old
        });
        let offers = collect_offers(&state, 0);
        assert_eq!(offers.len(), 1);
        assert_eq!(offers[0].agent, 0);
    }

    #[test]
    fn ten_offers_min_seven_selects_the_seven_cheapest() {
        let cfg = small_cfg();
        let mut state = SimState::new(&cfg).unwrap();
        state.zones[0].spec.min_persons = 7;
        let offers: Vec<Offer> = (0..10)
            .map(|i| Offer {
                agent: i,
                ask: Currency::from_milli(1000 + 100 * i as i64),
                data_timestamp: 0,
            })
            .collect();
        let round = select_and_pay(&mut state, 0, offers);
        assert!(round.satisfied);
        assert_eq!(round.selected.len(), 7);
        let mut selected = round.selected.clone();
        selected.sort_unstable();
        assert_eq!(selected, vec![0, 1, 2, 3, 4, 5, 6]);
        assert_eq!(
            state.zones[0].total_paid,
            Currency::from_milli((0..7).map(|i| 1000 + 100 * i).sum()),
        );
        assert_eq!(state.zones[0].payments_count, 7);
    }

    #[test]
    fn six_offers_min_seven_pays_nobody() {
        let cfg = small_cfg();
        let mut state = SimState::new(&cfg).unwrap();
        state.zones[0].spec.min_persons = 7;
        let offers: Vec<Offer> = (0..6)
            .map(|i| Offer {
                agent: i,
                ask: Currency::from_units(1.0),
                data_timestamp: 0,
            })
            .collect();
        let round = select_and_pay(&mut state, 0, offers);
        assert!(!round.satisfied);
        assert!(round.selected.is_empty());
        assert_eq!(state.zones[0].total_paid, Currency::ZERO);
        assert_eq!(state.zones[0].decision_rounds, 1);
        assert_eq!(state.zones[0].satisfied_rounds, 0);
    }

    #[test]
    fn equal_ask_ties_break_reproducibly_under_one_seed() {
        let select = || {
            let cfg = small_cfg();
            let mut state = SimState::new(&cfg).unwrap();
            state.zones[0].spec.min_persons = 7;
            let offers: Vec<Offer> = (0..9)
                .map(|i| Offer {
                    agent: i,
                    ask: Currency::from_units(1.0),
                    data_timestamp: 0,
                })
                .collect();
            select_and_pay(&mut state, 0, offers).selected
        };
        assert_eq!(select(), select());
    }

    #[test]
    fn ask_updates_match_the_increment_decrement_rule() {
        let cfg = small_cfg();
        let mut state = SimState::new(&cfg).unwrap();
        state.agents[0].ask = Currency::from_units(1.0);
        state.agents[1].ask = Currency::from_units(1.0);
        state.agents[2].ask = Currency::from_units(0.1); // at the floor
        state.agents[3].ask = Currency::from_units(5.0); // did not offer
        let round = OfferRound {
            zone: 0,
            step: 1,
            offers: vec![
                Offer { agent: 0, ask: Currency::from_units(1.0), data_timestamp: 0 },
                Offer { agent: 1, ask: Currency::from_units(1.0), data_timestamp: 0 },
                Offer { agent: 2, ask: Currency::from_units(0.1), data_timestamp: 0 },
            ],
            selected: vec![0],
            satisfied: true,
        };
        update_asks(&mut state, &round);
        assert_eq!(state.agents[0].ask, Currency::from_units(1.1));
        assert_eq!(state.agents[1].ask, Currency::from_units(0.9));
        assert_eq!(state.agents[2].ask, Currency::from_units(0.1));
        assert_eq!(state.agents[3].ask, Currency::from_units(5.0));
    }

    #[test]
    fn empty_system_pays_nothing_and_satisfies_nothing() {
        let cfg = SimConfig {
            num_agents: 0,
            total_steps: 20,
            ..SimConfig::default()
        };
        let result = run_simulation(&cfg).unwrap();
        assert_eq!(result.total_rewards(), Currency::ZERO);
        assert_eq!(result.overall_satisfied_ratio(), 0.0);
        assert!(result.zones.iter().all(|z| z.decision_rounds == 20));
    }

    #[test]
    fn trivially_satisfiable_zone_hits_ratio_one() {
        let cfg = SimConfig {
            num_agents: 1,
            total_steps: 30,
            spawn: SpawnModel::Uniform,
            zones: vec![ZoneSpec {
                id: 0,
                region: Region::Rect {
                    x_min: 0.0,
                    y_min: 0.0,
                    x_max: 1000.0,
                    y_max: 1000.0,
                },
                min_persons: 1,
                freshness_window: 86_400,
                grid_row: None,
                grid_col: None,
            }],
            ..SimConfig::default()
        };
        let result = run_simulation(&cfg).unwrap();
        assert_eq!(result.overall_satisfied_ratio(), 1.0);
    }

    #[test]
    fn walk_displacement_is_symmetric_about_zero() {
        // statistical oracle for the walk kernel: sample mean of 1e5
        // unclamped per-axis steps stays within 3 sigma of zero
        let cfg = SimConfig {
            num_agents: 1,
            area_width: 1e9, // keep the agent far from any boundary
            area_height: 1e9,
            spawn: SpawnModel::Uniform,
            walk_step: 10.0,
            zones: grid_zones(1, 1, 1e9, 1e9, 10.0, 1, 600),
            ..SimConfig::default()
        };
        let mut state = SimState::new(&cfg).unwrap();
        state.agents[0].x = 5e8;
        state.agents[0].y = 5e8;
        let n = 100_000;
        let (mut sum_dx, mut sum_dy) = (0.0, 0.0);
        let (mut px, mut py) = (state.agents[0].x, state.agents[0].y);
        for _ in 0..n {
            state.tick += 1;
            step_agents(&mut state);
            sum_dx += state.agents[0].x - px;
            sum_dy += state.agents[0].y - py;
            px = state.agents[0].x;
            py = state.agents[0].y;
        }
        // sigma of the mean: walk_step / sqrt(3 n)
        let three_sigma = 3.0 * 10.0 / (3.0 * n as f64).sqrt();
        assert!((sum_dx / n as f64).abs() < three_sigma);
        assert!((sum_dy / n as f64).abs() < three_sigma);
    }

    #[test]
    fn identical_seeds_give_identical_results() {
        let cfg = small_cfg();
        let a = run_simulation(&cfg).unwrap();
        let b = run_simulation(&cfg).unwrap();
        assert_eq!(a.trace_jsonl(), b.trace_jsonl());
        assert_eq!(a.agent_rewards, b.agent_rewards);
        let mut different = cfg;
        different.rng_seed = 43;
        let c = run_simulation(&different).unwrap();
        assert_ne!(a.trace_jsonl(), c.trace_jsonl());
    }
}
