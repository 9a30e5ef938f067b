//! Protocol-integration mode: every payment a simulation makes is routed
//! through the full campaign pipeline (subscribe, chunk, encrypt, upload,
//! register, elect verifier, verify, reward, finalize) against a shared
//! in-memory content store.
//!
//! Zone payments are per-agent amounts while a campaign pays one uniform
//! `source_reward` to all of its sources, so each selected agent of each
//! satisfied round runs as its own single-participant campaign whose reward
//! equals the agent's ask. The per-agent `SourceReward` ledger totals must
//! then match the simulation's accumulated rewards exactly.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::currency::Currency;
use crate::protocol::{
    replay_submissions, Campaign, CampaignParams, EventKind, LedgerKind, ProtocolError,
};
use crate::storage::{self, MemoryStore, ObjectStore, StorageError};
use super::{SimConfig, SimResult};

#[derive(Debug, Error)]
pub enum IntegrationError {
    #[error("protocol rejected an integration step: {0}")]
    Protocol(#[from] ProtocolError),
    #[error("storage failed during integration: {0}")]
    Storage(#[from] StorageError),
    #[error("integration inconsistency: {0}")]
    Inconsistent(String),
}

/// Aggregated protocol-side accounting for an integrated run.
#[derive(Debug, Serialize)]
pub struct IntegrationReport {
    pub campaigns: usize,
    pub events_total: usize,
    pub store_objects: usize,
    pub total_source_rewards: Currency,
    /// SourceReward totals keyed by agent id.
    pub rewards_by_agent: BTreeMap<u32, Currency>,
}

impl IntegrationReport {
    /// Exact per-agent equality of sim rewards and protocol ledger totals.
    pub fn matches(&self, result: &SimResult) -> bool {
        result.agent_rewards.iter().enumerate().all(|(id, &reward)| {
            let ledger_total = self
                .rewards_by_agent
                .get(&(id as u32))
                .copied()
                .unwrap_or(Currency::ZERO);
            ledger_total == reward
        })
    }
}

fn campaign_seed(run_seed: u64, zone: u32, step: u64, agent: u32) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(b"crowdsense.integration.v1");
    hasher.update(run_seed.to_le_bytes());
    hasher.update(zone.to_le_bytes());
    hasher.update(step.to_le_bytes());
    hasher.update(agent.to_le_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 yields 32 bytes"))
}

fn datum_payload(zone: u32, step: u64, agent: u32, ask: Currency) -> Vec<u8> {
    serde_json::to_vec(&serde_json::json!({
        "agent": agent,
        "zone": zone,
        "step": step,
        "ask_milli": ask.milli(),
    }))
    .expect("datum serializes")
}

fn datum_format_check(payload: &[u8]) -> bool {
    serde_json::from_slice::<serde_json::Value>(payload)
        .map(|v| v.get("agent").is_some())
        .unwrap_or(false)
}

const INTEGRATION_CHUNK_SIZE: usize = 64;

/// Replays every payment of a finished run through the protocol module and
/// returns the protocol-side accounting. Pure function of the result, so an
/// integrated run leaves the simulation outcome byte-identical to a plain
/// run of the same config.
pub fn run_integration(
    cfg: &SimConfig,
    result: &SimResult,
) -> Result<IntegrationReport, IntegrationError> {
    let mut store = MemoryStore::new();
    let mut report = IntegrationReport {
        campaigns: 0,
        events_total: 0,
        store_objects: 0,
        total_source_rewards: Currency::ZERO,
        rewards_by_agent: BTreeMap::new(),
    };

    for round in result.trace.iter().filter(|r| r.satisfied) {
        for &agent in &round.selected {
            let ask = round
                .offers
                .iter()
                .find(|o| o.agent == agent)
                .map(|o| o.ask)
                .ok_or_else(|| {
                    IntegrationError::Inconsistent(format!(
                        "selected agent {agent} has no offer in round {}/{}",
                        round.zone, round.step
                    ))
                })?;
            run_payment_campaign(&mut store, cfg, round.zone, round.step, agent, ask, &mut report)?;
        }
    }
    report.store_objects = store.object_count()?;
    Ok(report)
}

fn run_payment_campaign(
    store: &mut MemoryStore,
    cfg: &SimConfig,
    zone: u32,
    step: u64,
    agent: u32,
    ask: Currency,
    report: &mut IntegrationReport,
) -> Result<(), IntegrationError> {
    let params = CampaignParams {
        min_participants: 1,
        chunk_size: INTEGRATION_CHUNK_SIZE,
        subscription_fee: Currency::ZERO,
        source_reward: ask,
        verifier_payment: Currency::ZERO,
        reader_fee: Currency::ZERO,
    };
    let seed = campaign_seed(cfg.rng_seed, zone, step, agent);
    let mut campaign = Campaign::create(params, seed)?;

    let source = format!("agent-{agent}");
    let (key, chunk_size) = campaign.subscribe_source(source.as_str(), Currency::ZERO)?;

    let payload = datum_payload(zone, step, agent, ask);
    let chunks = storage::chunk_data(&payload, chunk_size)?;
    let mut locations = Vec::with_capacity(chunks.len());
    for (index, chunk) in chunks.iter().enumerate() {
        let envelope = storage::encrypt_chunk(&key, chunk, seed.wrapping_add(index as u64 + 1));
        locations.push(store.put(&envelope.to_bytes())?);
    }
    campaign.register_data(source.as_str(), locations)?;

    let (locations, key) = campaign.claim_verification("verifier-0", source.as_str())?;
    let valid = storage::verify_dataset(store, &locations, &key, datum_format_check)?;
    if !valid {
        return Err(IntegrationError::Inconsistent(format!(
            "well-formed dataset of agent {agent} failed verification"
        )));
    }
    campaign.report_verdict("verifier-0", source.as_str(), true)?;
    if !campaign.try_finalize() {
        return Err(IntegrationError::Inconsistent(
            "single-participant campaign did not finalize".into(),
        ));
    }
    if !campaign.treasury_matches_ledger() {
        return Err(IntegrationError::Inconsistent(
            "treasury diverged from ledger".into(),
        ));
    }
    replay_submissions(campaign.events())
        .map_err(|e| IntegrationError::Inconsistent(format!("event replay failed: {e}")))
        .and_then(|replayed| {
            if &replayed == campaign.submissions() {
                Ok(())
            } else {
                Err(IntegrationError::Inconsistent(
                    "event replay diverged from live submissions".into(),
                ))
            }
        })?;

    for entry in campaign.ledger() {
        if entry.kind == LedgerKind::SourceReward {
            *report
                .rewards_by_agent
                .entry(agent)
                .or_insert(Currency::ZERO) += entry.amount;
            report.total_source_rewards += entry.amount;
        }
    }
    report.events_total += campaign.events().len();
    debug_assert!(campaign
        .events()
        .iter()
        .any(|e| matches!(e.kind, EventKind::CampaignClosed { .. })));
    report.campaigns += 1;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{grid_zones, run_simulation, SimConfig};

    fn cfg() -> SimConfig {
        SimConfig {
            num_agents: 12,
            total_steps: 40,
            zones: grid_zones(1, 1, 1000.0, 1000.0, 450.0, 3, 3600),
            ..SimConfig::default()
        }
    }

    #[test]
    fn ledger_totals_equal_sim_rewards_exactly() {
        let cfg = cfg();
        let result = run_simulation(&cfg).unwrap();
        assert!(result.total_rewards() > Currency::ZERO, "test needs payments");
        let report = run_integration(&cfg, &result).unwrap();
        assert!(report.matches(&result));
        assert_eq!(report.total_source_rewards, result.total_rewards());
        assert!(report.campaigns > 0);
        assert!(report.store_objects > 0);
    }

    #[test]
    fn integration_does_not_perturb_the_simulation() {
        let cfg = cfg();
        let plain = run_simulation(&cfg).unwrap();
        let integrated = run_simulation(&cfg).unwrap();
        let _report = run_integration(&cfg, &integrated).unwrap();
        assert_eq!(plain.trace_jsonl(), integrated.trace_jsonl());
    }
}
