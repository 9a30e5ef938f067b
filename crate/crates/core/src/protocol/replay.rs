//! Event-sourcing replay: rebuilding the submissions map from the event log.
//!
//! Replay validates that the log respects the per-submission status machine,
//! so a successful replay that matches the live map proves the log is a
//! faithful record.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{DataSubmission, EventKind, PartyId, ProtocolEvent, SubmissionStatus};

#[derive(Debug, Error, PartialEq)]
pub enum ReplayError {
    #[error("event at step {step} references unknown source {source_id}")]
    UnknownSource { step: u64, source_id: PartyId },
    #[error("event at step {step} is inconsistent with status {status:?} of {source_id}")]
    OutOfOrder {
        step: u64,
        source_id: PartyId,
        status: SubmissionStatus,
    },
    #[error("duplicate subscription for {source_id} at step {step}")]
    DuplicateSource { step: u64, source_id: PartyId },
}

/// Replays an event log into the submissions map it implies.
pub fn replay_submissions(
    events: &[ProtocolEvent],
) -> Result<BTreeMap<PartyId, DataSubmission>, ReplayError> {
    let mut submissions: BTreeMap<PartyId, DataSubmission> = BTreeMap::new();

    for event in events {
        let step = event.step;
        match &event.kind {
            EventKind::CampaignCreated { .. }
            | EventKind::CampaignClosed { .. }
            | EventKind::ReaderServed { .. }
            | EventKind::KeyIssued { .. }
            | EventKind::VerificationRequested { .. } => {}
            EventKind::SourceSubscribed { source, .. } => {
                if submissions.contains_key(source) {
                    return Err(ReplayError::DuplicateSource {
                        step,
                        source_id: source.clone(),
                    });
                }
                submissions.insert(
                    source.clone(),
                    DataSubmission {
                        source: source.clone(),
                        chunk_locations: Vec::new(),
                        status: SubmissionStatus::Announced,
                        assigned_verifier: None,
                    },
                );
            }
            EventKind::DataRegistered {
                source,
                chunk_locations,
            } => {
                let sub = expect_status(&mut submissions, step, source, SubmissionStatus::Announced)?;
                sub.chunk_locations = chunk_locations.clone();
                sub.status = SubmissionStatus::Registered;
            }
            EventKind::VerifierElected { source, verifier } => {
                let sub =
                    expect_status(&mut submissions, step, source, SubmissionStatus::Registered)?;
                sub.status = SubmissionStatus::UnderVerification;
                sub.assigned_verifier = Some(verifier.clone());
            }
            EventKind::VerdictRecorded { source, valid, .. } => {
                let sub = expect_status(
                    &mut submissions,
                    step,
                    source,
                    SubmissionStatus::UnderVerification,
                )?;
                sub.status = if *valid {
                    SubmissionStatus::Verified
                } else {
                    SubmissionStatus::Rejected
                };
            }
            EventKind::SourceRewarded { .. } => {}
        }
    }
    Ok(submissions)
}

fn expect_status<'a>(
    submissions: &'a mut BTreeMap<PartyId, DataSubmission>,
    step: u64,
    source: &PartyId,
    expected: SubmissionStatus,
) -> Result<&'a mut DataSubmission, ReplayError> {
    let sub = submissions
        .get_mut(source)
        .ok_or_else(|| ReplayError::UnknownSource {
            step,
            source_id: source.clone(),
        })?;
    if sub.status != expected {
        return Err(ReplayError::OutOfOrder {
            step,
            source_id: source.clone(),
            status: sub.status,
        });
    }
    Ok(sub)
}
