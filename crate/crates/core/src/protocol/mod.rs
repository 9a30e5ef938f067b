//! The campaign state machine: subscriptions, key issuance, submission
//! registration, verifier election, verdicts, reward accounting and
//! threshold-gated data release.
//!
//! A `Campaign` is a single-writer deterministic state machine. Every
//! successful operation advances a logical clock, appends to the event log
//! and (where money moves) to the ledger; failed operations leave the state
//! untouched. Data locations and the decryption key become available to
//! readers only once the number of verified submissions has reached
//! `min_participants` and the campaign has been finalized, so no individual
//! contribution can be released before the anonymity set exists.

mod export;
mod replay;

pub use export::{event_log_jsonl, ledger_csv, write_event_log_jsonl, write_ledger_csv};
pub use replay::replay_submissions;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::currency::Currency;
use crate::storage::{ContentAddress, Key};

/// Identifier for any protocol party (source, verifier or reader).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartyId(String);

impl PartyId {
    pub fn new(id: impl Into<String>) -> Self {
        PartyId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for PartyId {
    fn from(id: &str) -> Self {
        PartyId(id.to_string())
    }
}

impl From<String> for PartyId {
    fn from(id: String) -> Self {
        PartyId(id)
    }
}

impl std::fmt::Display for PartyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::fmt::Debug for PartyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error("invalid campaign parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },
    #[error("fee mismatch: expected {expected}, paid {paid}")]
    FeeMismatch { expected: Currency, paid: Currency },
    #[error("source {0} already subscribed")]
    DuplicateSubscription(PartyId),
    #[error("campaign is closed")]
    CampaignClosed,
    #[error("no subscription for source {0}")]
    NoSubscription(PartyId),
    #[error("no submission registered for source {0}")]
    NoSuchSubmission(PartyId),
    #[error("chunk location list is empty")]
    EmptySubmission,
    #[error("invalid status transition for {source_id}: {from:?} -> {to:?}")]
    InvalidTransition {
        source_id: PartyId,
        from: SubmissionStatus,
        to: SubmissionStatus,
    },
    #[error("submission of {source_id} already claimed by verifier {verifier}")]
    AlreadyClaimed { source_id: PartyId, verifier: PartyId },
    #[error("{0} is not the elected verifier for this submission")]
    UnauthorizedVerifier(PartyId),
    #[error("campaign not yet closed: participation threshold not reached")]
    NotYetClosed,
}

/// Static campaign parameters fixed at creation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignParams {
    /// Anonymity-set threshold: verified submissions required before release.
    pub min_participants: u32,
    /// Size of every stored data chunk, in bytes.
    pub chunk_size: usize,
    pub subscription_fee: Currency,
    pub source_reward: Currency,
    pub verifier_payment: Currency,
    pub reader_fee: Currency,
}

impl CampaignParams {
    fn validate(&self) -> Result<(), ProtocolError> {
        if self.min_participants == 0 {
            return Err(ProtocolError::InvalidParams {
                field: "min_participants",
                reason: "must be at least 1".into(),
            });
        }
        if self.chunk_size == 0 {
            return Err(ProtocolError::InvalidParams {
                field: "chunk_size",
                reason: "must be at least 1 byte".into(),
            });
        }
        for (field, amount) in [
            ("subscription_fee", self.subscription_fee),
            ("source_reward", self.source_reward),
            ("verifier_payment", self.verifier_payment),
            ("reader_fee", self.reader_fee),
        ] {
            if amount.is_negative() {
                return Err(ProtocolError::InvalidParams {
                    field,
                    reason: format!("must be non-negative, got {amount}"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Open,
    Closed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubmissionStatus {
    Announced,
    Registered,
    UnderVerification,
    Verified,
    Rejected,
}

/// One source's registered dataset and its verification state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataSubmission {
    pub source: PartyId,
    pub chunk_locations: Vec<ContentAddress>,
    pub status: SubmissionStatus,
    pub assigned_verifier: Option<PartyId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LedgerKind {
    FeeIn,
    SourceReward,
    VerifierPayment,
    ReaderFeeIn,
}

impl LedgerKind {
    /// Credits flow into the treasury, debits out.
    pub fn is_credit(self) -> bool {
        matches!(self, LedgerKind::FeeIn | LedgerKind::ReaderFeeIn)
    }
}

/// One money movement. `amount` is always non-negative; direction is
/// implied by `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub step: u64,
    pub party: PartyId,
    pub kind: LedgerKind,
    pub amount: Currency,
}

/// Net treasury position implied by a ledger: credits minus debits.
pub fn ledger_balance(entries: &[LedgerEntry]) -> Currency {
    entries
        .iter()
        .map(|e| if e.kind.is_credit() { e.amount } else { -e.amount })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolEvent {
    pub step: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum EventKind {
    CampaignCreated {
        min_participants: u32,
        chunk_size: usize,
    },
    SourceSubscribed {
        source: PartyId,
        fee: Currency,
    },
    KeyIssued {
        source: PartyId,
    },
    DataRegistered {
        source: PartyId,
        chunk_locations: Vec<ContentAddress>,
    },
    VerificationRequested {
        source: PartyId,
    },
    VerifierElected {
        source: PartyId,
        verifier: PartyId,
    },
    VerdictRecorded {
        source: PartyId,
        verifier: PartyId,
        valid: bool,
    },
    SourceRewarded {
        source: PartyId,
        amount: Currency,
    },
    CampaignClosed {
        verified_count: u32,
    },
    ReaderServed {
        reader: PartyId,
        chunk_count: usize,
    },
}

/// The campaign smart-contract state.
///
/// All mutating operations must be serialized by the caller; distinct
/// campaigns are independent and may run in parallel.
#[derive(Clone, Debug)]
pub struct Campaign {
    params: CampaignParams,
    phase: Phase,
    encryption_key: Key,
    submissions: BTreeMap<PartyId, DataSubmission>,
    treasury: Currency,
    ledger: Vec<LedgerEntry>,
    event_log: Vec<ProtocolEvent>,
    clock: u64,
}

impl Campaign {
    /// Creates the campaign and opens it. The encryption key is derived
    /// deterministically from `key_seed` and never changes afterwards.
    pub fn create(params: CampaignParams, key_seed: u64) -> Result<Campaign, ProtocolError> {
        params.validate()?;
        let mut campaign = Campaign {
            encryption_key: Key::from_seed(key_seed),
            phase: Phase::Open,
            submissions: BTreeMap::new(),
            treasury: Currency::ZERO,
            ledger: Vec::new(),
            event_log: Vec::new(),
            clock: 0,
            params,
        };
        campaign.emit(EventKind::CampaignCreated {
            min_participants: campaign.params.min_participants,
            chunk_size: campaign.params.chunk_size,
        });
        Ok(campaign)
    }

    pub fn params(&self) -> &CampaignParams {
        &self.params
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn treasury(&self) -> Currency {
        self.treasury
    }

    pub fn ledger(&self) -> &[LedgerEntry] {
        &self.ledger
    }

    pub fn events(&self) -> &[ProtocolEvent] {
        &self.event_log
    }

    pub fn submissions(&self) -> &BTreeMap<PartyId, DataSubmission> {
        &self.submissions
    }

    pub fn verified_count(&self) -> u32 {
        self.submissions
            .values()
            .filter(|s| s.status == SubmissionStatus::Verified)
            .count() as u32
    }

    /// Funds conservation: the treasury must equal the ledger's net balance.
    pub fn treasury_matches_ledger(&self) -> bool {
        ledger_balance(&self.ledger) == self.treasury
    }

    fn emit(&mut self, kind: EventKind) {
        self.event_log.push(ProtocolEvent {
            step: self.clock,
            kind,
        });
    }

    fn record(&mut self, party: PartyId, kind: LedgerKind, amount: Currency) {
        if kind.is_credit() {
            self.treasury += amount;
        } else {
            self.treasury -= amount;
        }
        self.ledger.push(LedgerEntry {
            step: self.clock,
            party,
            kind,
            amount,
        });
    }

    /// A source announces itself and pays the subscription fee; in return it
    /// receives the campaign encryption key and the mandated chunk size.
    pub fn subscribe_source(
        &mut self,
        source: impl Into<PartyId>,
        fee_paid: Currency,
    ) -> Result<(Key, usize), ProtocolError> {
        let source = source.into();
        if self.phase == Phase::Closed {
            return Err(ProtocolError::CampaignClosed);
        }
        if self.submissions.contains_key(&source) {
            return Err(ProtocolError::DuplicateSubscription(source));
        }
        if fee_paid != self.params.subscription_fee {
            return Err(ProtocolError::FeeMismatch {
                expected: self.params.subscription_fee,
                paid: fee_paid,
            });
        }
        self.clock += 1;
        self.record(source.clone(), LedgerKind::FeeIn, fee_paid);
        self.submissions.insert(
            source.clone(),
            DataSubmission {
                source: source.clone(),
                chunk_locations: Vec::new(),
                status: SubmissionStatus::Announced,
                assigned_verifier: None,
            },
        );
        self.emit(EventKind::SourceSubscribed {
            source: source.clone(),
            fee: fee_paid,
        });
        self.emit(EventKind::KeyIssued { source });
        Ok((self.encryption_key.clone(), self.params.chunk_size))
    }

    /// The source reports where its encrypted chunks live. Registration
    /// immediately triggers a verification request.
    pub fn register_data(
        &mut self,
        source: impl Into<PartyId>,
        chunk_locations: Vec<ContentAddress>,
    ) -> Result<(), ProtocolError> {
        let source = source.into();
        if chunk_locations.is_empty() {
            return Err(ProtocolError::EmptySubmission);
        }
        let submission = self
            .submissions
            .get(&source)
            .ok_or_else(|| ProtocolError::NoSubscription(source.clone()))?;
        if submission.status != SubmissionStatus::Announced {
            return Err(ProtocolError::InvalidTransition {
                source_id: source,
                from: submission.status,
                to: SubmissionStatus::Registered,
            });
        }
        self.clock += 1;
        let submission = self.submissions.get_mut(&source).expect("checked above");
        submission.chunk_locations = chunk_locations.clone();
        submission.status = SubmissionStatus::Registered;
        self.emit(EventKind::DataRegistered {
            source: source.clone(),
            chunk_locations,
        });
        self.emit(EventKind::VerificationRequested { source });
        Ok(())
    }

    /// A verifier asks to check a registered submission. The first claimant
    /// is elected; everyone after that is turned away.
    pub fn claim_verification(
        &mut self,
        verifier: impl Into<PartyId>,
        source: impl Into<PartyId>,
    ) -> Result<(Vec<ContentAddress>, Key), ProtocolError> {
        let verifier = verifier.into();
        let source = source.into();
        let submission = self
            .submissions
            .get(&source)
            .ok_or_else(|| ProtocolError::NoSuchSubmission(source.clone()))?;
        match submission.status {
            SubmissionStatus::Registered => {}
            SubmissionStatus::UnderVerification
            | SubmissionStatus::Verified
            | SubmissionStatus::Rejected => {
                return Err(ProtocolError::AlreadyClaimed {
                    source_id: source,
                    verifier: submission
                        .assigned_verifier
                        .clone()
                        .expect("claimed submissions always carry their verifier"),
                });
            }
            SubmissionStatus::Announced => {
                return Err(ProtocolError::InvalidTransition {
                    source_id: source,
                    from: submission.status,
                    to: SubmissionStatus::UnderVerification,
                });
            }
        }
        self.clock += 1;
        let submission = self.submissions.get_mut(&source).expect("checked above");
        submission.status = SubmissionStatus::UnderVerification;
        submission.assigned_verifier = Some(verifier.clone());
        let locations = submission.chunk_locations.clone();
        self.emit(EventKind::VerifierElected { source, verifier });
        Ok((locations, self.encryption_key.clone()))
    }

    /// The elected verifier reports its verdict. The verifier is paid for
    /// the work either way; the source is rewarded only on a positive
    /// verdict and otherwise forfeits its fee.
    pub fn report_verdict(
        &mut self,
        verifier: impl Into<PartyId>,
        source: impl Into<PartyId>,
        valid: bool,
    ) -> Result<(), ProtocolError> {
        let verifier = verifier.into();
        let source = source.into();
        let submission = self
            .submissions
            .get(&source)
            .ok_or_else(|| ProtocolError::NoSuchSubmission(source.clone()))?;
        if submission.status != SubmissionStatus::UnderVerification {
            return Err(ProtocolError::InvalidTransition {
                source_id: source,
                from: submission.status,
                to: if valid {
                    SubmissionStatus::Verified
                } else {
                    SubmissionStatus::Rejected
                },
            });
        }
        if submission.assigned_verifier.as_ref() != Some(&verifier) {
            return Err(ProtocolError::UnauthorizedVerifier(verifier));
        }
        self.clock += 1;
        self.emit(EventKind::VerdictRecorded {
            source: source.clone(),
            verifier: verifier.clone(),
            valid,
        });
        let verifier_payment = self.params.verifier_payment;
        self.record(verifier, LedgerKind::VerifierPayment, verifier_payment);
        let submission = self.submissions.get_mut(&source).expect("checked above");
        if valid {
            submission.status = SubmissionStatus::Verified;
            let reward = self.params.source_reward;
            self.record(source.clone(), LedgerKind::SourceReward, reward);
            self.emit(EventKind::SourceRewarded {
                source,
                amount: reward,
            });
        } else {
            submission.status = SubmissionStatus::Rejected;
        }
        Ok(())
    }

    /// Closes the campaign once the verified count has reached the
    /// participation threshold. Idempotent probe: returns whether the
    /// campaign transitioned on this call.
    pub fn try_finalize(&mut self) -> bool {
        if self.phase == Phase::Closed {
            return false;
        }
        let verified = self.verified_count();
        if verified < self.params.min_participants {
            return false;
        }
        self.clock += 1;
        self.phase = Phase::Closed;
        self.emit(EventKind::CampaignClosed {
            verified_count: verified,
        });
        true
    }

    /// A reader pays the access fee and receives the chunk locations of all
    /// verified submissions (in source order) plus the decryption key.
    /// Fails while the campaign is open: data never leaves before the
    /// anonymity set is complete.
    pub fn serve_reader(
        &mut self,
        reader: impl Into<PartyId>,
        fee_paid: Currency,
    ) -> Result<(Vec<ContentAddress>, Key), ProtocolError> {
        let reader = reader.into();
        if self.phase != Phase::Closed {
            return Err(ProtocolError::NotYetClosed);
        }
        if fee_paid != self.params.reader_fee {
            return Err(ProtocolError::FeeMismatch {
                expected: self.params.reader_fee,
                paid: fee_paid,
            });
        }
        self.clock += 1;
        self.record(reader.clone(), LedgerKind::ReaderFeeIn, fee_paid);
        let locations: Vec<ContentAddress> = self
            .submissions
            .values()
            .filter(|s| s.status == SubmissionStatus::Verified)
            .flat_map(|s| s.chunk_locations.iter().cloned())
            .collect();
        self.emit(EventKind::ReaderServed {
            reader,
            chunk_count: locations.len(),
        });
        Ok((locations, self.encryption_key.clone()))
    }
}
