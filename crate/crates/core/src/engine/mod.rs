//! Executable protocol state machines over a lossy channel.
//!
//! A referee drives two strategy objects through the numbered protocol
//! steps and records every classical message in a [`Transcript`]. Honest and
//! cheating parties implement the same [`AliceStrategy`] / [`BobStrategy`]
//! traits, so an adversary only ever sees what the messages carry.

mod oracle;
mod parties;
mod postselect;
mod transcript;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::PureState;
use crate::states::{Bit, LambdaParam};
use crate::{trial_rng, SimRng};

pub use oracle::{alice_optimal_commit, master_theorem_oracle, OracleResult};
pub use parties::{CheatingAliceProduct, DiscriminatingBob, HonestAlice, HonestBob};
pub use postselect::{adversary_bob_postselect, PostselectionAttack};
pub use transcript::{parse_transcripts, Message, Outcome, Party, Transcript};

/// Restarts allowed per trial before it is discarded.
pub const RESTART_CAP: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Single register, no one-time pad.
    Berlin,
    /// Two registers, pad bits revealed after Bob reports success.
    Ours,
    /// Two registers without the pad step; honest runs only, for comparison.
    Unencrypted,
}

impl Protocol {
    pub fn registers(self) -> usize {
        match self {
            Protocol::Berlin => 1,
            Protocol::Ours | Protocol::Unencrypted => 2,
        }
    }

    pub fn encrypted(self) -> bool {
        matches!(self, Protocol::Ours)
    }

    pub fn id(self) -> &'static str {
        match self {
            Protocol::Berlin => "berlin",
            Protocol::Ours => "ours",
            Protocol::Unencrypted => "unencrypted",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Protocol {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "berlin" => Ok(Protocol::Berlin),
            "ours" => Ok(Protocol::Ours),
            "unencrypted" => Ok(Protocol::Unencrypted),
            other => Err(format!("unknown protocol {other:?} (expected berlin, ours or unencrypted)")),
        }
    }
}

/// Independent per-register erasure with probability η ∈ [0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    loss_probability: f64,
}

impl ChannelModel {
    pub fn new(loss_probability: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&loss_probability) {
            return Err(Error::OutOfRange {
                name: "eta",
                value: loss_probability,
                constraint: "loss probability must satisfy 0 <= eta < 1",
            });
        }
        Ok(Self { loss_probability })
    }

    pub fn lossless() -> Self {
        Self { loss_probability: 0.0 }
    }

    pub fn loss_probability(&self) -> f64 {
        self.loss_probability
    }

    /// Delivers each register or `None` if it was lost.
    pub fn transmit(&self, registers: Vec<PureState>, rng: &mut SimRng) -> Vec<Option<PureState>> {
        registers
            .into_iter()
            .map(|r| {
                let lost = rng.gen::<f64>() < self.loss_probability;
                (!lost).then_some(r)
            })
            .collect()
    }
}

pub trait AliceStrategy {
    /// Step 1: prepare the registers for this round.
    fn commit(&mut self, rng: &mut SimRng) -> Vec<PureState>;
    /// Pad bits, revealed once Bob reports success (encrypted protocol only).
    fn reveal_pad(&mut self) -> Vec<Bit>;
    /// Opening `(bases, c)` sent after Bob's c′.
    fn open(&mut self, c_prime: Bit, rng: &mut SimRng) -> (Vec<Bit>, Bit);
}

pub trait BobStrategy {
    /// Step 2: returns `true` to announce success, `false` to request a restart.
    fn receive(&mut self, delivered: &[Option<PureState>], rng: &mut SimRng) -> bool;
    fn learn_pad(&mut self, pad: &[Bit]);
    fn choose_c_prime(&mut self, rng: &mut SimRng) -> Bit;
    /// Whether Bob accepts the opening; rejection yields ⊥.
    fn accepts(&mut self, bases: &[Bit], c: Bit) -> bool;
}

/// Runs one execution to completion or until the restart cap is hit.
pub fn execute_trial(
    protocol: Protocol,
    alice: &mut dyn AliceStrategy,
    bob: &mut dyn BobStrategy,
    channel: &ChannelModel,
    trial: u64,
    rng: &mut SimRng,
) -> Transcript {
    let mut t = Transcript::new(protocol, trial);
    loop {
        let registers = alice.commit(rng);
        debug_assert_eq!(registers.len(), protocol.registers());
        t.push(Message::CommitStates);
        let delivered = channel.transmit(registers, rng);
        if bob.receive(&delivered, rng) {
            t.push(Message::SuccessReport);
            break;
        }
        t.push(Message::FailureReport);
        t.round_restarts += 1;
        if t.round_restarts >= RESTART_CAP {
            return t;
        }
    }
    let pad = if protocol.encrypted() {
        let pad = alice.reveal_pad();
        t.push(Message::PadReveal(pad.clone()));
        pad
    } else {
        vec![0; protocol.registers()]
    };
    bob.learn_pad(&pad);
    let c_prime = bob.choose_c_prime(rng);
    t.push(Message::CPrime(c_prime));
    let (bases, c) = alice.open(c_prime, rng);
    t.push(Message::Opening { bases: bases.clone(), c });
    let outcome = if bob.accepts(&bases, c) {
        Outcome::Bit(c ^ c_prime)
    } else {
        Outcome::Abort
    };
    t.push(Message::Verdict(outcome));
    t.outcome = Some(outcome);
    t
}

/// Which side (if any) deviates from the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adversary {
    None,
    /// Bob measures in the computational basis and guesses c by maximum likelihood.
    BobDiscriminate { target: Bit },
    /// Alice commits the per-register optimal product state and opens c = c′ ⊕ target.
    AliceProduct { target: Bit },
}

impl Adversary {
    pub fn target(&self) -> Option<Bit> {
        match self {
            Adversary::None => None,
            Adversary::BobDiscriminate { target } | Adversary::AliceProduct { target } => Some(*target),
        }
    }
}

/// A protocol run configuration.
#[derive(Debug, Clone, Copy)]
pub struct Scenario {
    pub protocol: Protocol,
    pub lambda: LambdaParam,
    pub channel: ChannelModel,
    pub adversary: Adversary,
}

/// Aggregate outcome frequencies over completed trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub trials: u64,
    /// Trials that reached the restart cap; excluded from the frequencies.
    pub discarded: u64,
    pub freq_x0: f64,
    pub freq_x1: f64,
    pub freq_abort: f64,
    pub mean_restarts: f64,
    pub adversary_win_rate: Option<f64>,
}

impl RunStats {
    pub fn completed(&self) -> u64 {
        self.trials - self.discarded
    }

    /// Binomial standard error √(p(1−p)/n) over completed trials.
    pub fn sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.completed() as f64).sqrt()
    }
}

#[derive(Default)]
struct Tally {
    x0: u64,
    x1: u64,
    abort: u64,
    discarded: u64,
    restarts: u64,
    wins: u64,
}

impl Scenario {
    fn parties(&self) -> (Box<dyn AliceStrategy>, Box<dyn BobStrategy>) {
        let n = self.protocol.registers();
        let encrypted = self.protocol.encrypted();
        match self.adversary {
            Adversary::None => (
                Box::new(HonestAlice::new(self.lambda, n, encrypted)),
                Box::new(HonestBob::new(self.lambda, n)),
            ),
            Adversary::BobDiscriminate { target } => (
                Box::new(HonestAlice::new(self.lambda, n, encrypted)),
                Box::new(DiscriminatingBob::new(self.lambda, n, target)),
            ),
            Adversary::AliceProduct { target } => (
                Box::new(CheatingAliceProduct::new(self.lambda, n, target)),
                Box::new(HonestBob::new(self.lambda, n)),
            ),
        }
    }

    /// Replays trial `index` of a run seeded with `seed`.
    pub fn trial(&self, seed: u64, index: u64) -> Transcript {
        let (mut alice, mut bob) = self.parties();
        self.trial_with(alice.as_mut(), bob.as_mut(), seed, index)
    }

    // Parties carry no state across trials: every round overwrites it.
    fn trial_with(&self, alice: &mut dyn AliceStrategy, bob: &mut dyn BobStrategy, seed: u64, index: u64) -> Transcript {
        let mut rng = trial_rng(seed, index);
        execute_trial(self.protocol, alice, bob, &self.channel, index, &mut rng)
    }

    /// Runs `trials` independent executions, handing each transcript to `sink`.
    pub fn run_with<F: FnMut(&Transcript)>(&self, trials: u64, seed: u64, mut sink: F) -> Result<RunStats> {
        if trials == 0 {
            return Err(Error::OutOfRange {
                name: "trials",
                value: 0.0,
                constraint: "trials must be at least 1",
            });
        }
        if self.adversary != Adversary::None && self.protocol == Protocol::Unencrypted {
            return Err(Error::Precondition(
                "adversarial runs are only defined for the berlin and ours protocols".into(),
            ));
        }
        let mut tally = Tally::default();
        let target = self.adversary.target();
        let (mut alice, mut bob) = self.parties();
        for index in 0..trials {
            let t = self.trial_with(alice.as_mut(), bob.as_mut(), seed, index);
            match t.outcome {
                None => tally.discarded += 1,
                Some(x) => {
                    tally.restarts += t.round_restarts;
                    match x {
                        Outcome::Bit(0) => tally.x0 += 1,
                        Outcome::Bit(_) => tally.x1 += 1,
                        Outcome::Abort => tally.abort += 1,
                    }
                    if target.is_some_and(|b| x == Outcome::Bit(b)) {
                        tally.wins += 1;
                    }
                }
            }
            sink(&t);
        }
        let completed = trials - tally.discarded;
        if completed == 0 {
            return Err(Error::AllTrialsDiscarded);
        }
        let n = completed as f64;
        let freq_x0 = tally.x0 as f64 / n;
        let freq_x1 = tally.x1 as f64 / n;
        Ok(RunStats {
            trials,
            discarded: tally.discarded,
            freq_x0,
            freq_x1,
            // complement keeps the three frequencies summing to one exactly
            freq_abort: if tally.abort == 0 { 0.0 } else { 1.0 - freq_x0 - freq_x1 },
            mean_restarts: tally.restarts as f64 / n,
            adversary_win_rate: target.map(|_| tally.wins as f64 / n),
        })
    }

    pub fn run(&self, trials: u64, seed: u64) -> Result<RunStats> {
        self.run_with(trials, seed, |_| {})
    }
}

/// Honest executions restarted on every reported loss.
pub fn run_honest(protocol: Protocol, lambda: LambdaParam, channel: ChannelModel, trials: u64, seed: u64) -> Result<RunStats> {
    Scenario {
        protocol,
        lambda,
        channel,
        adversary: Adversary::None,
    }
    .run(trials, seed)
}

/// Cheating Bob measuring in the computational basis against honest Alice
/// on a lossless channel; the win rate is the frequency of x = `target`.
pub fn adversary_bob_discriminate(protocol: Protocol, lambda: LambdaParam, target: Bit, trials: u64, seed: u64) -> Result<RunStats> {
    Scenario {
        protocol,
        lambda,
        channel: ChannelModel::lossless(),
        adversary: Adversary::BobDiscriminate { target },
    }
    .run(trials, seed)
}

/// Cheating Alice committing an independent optimal qubit in each of `k`
/// registers (k = 1: single-register protocol, k = 2: padded protocol with
/// r1 = r2 = 0) and opening c = c′ so that x = 0.
pub fn adversary_alice_product(lambda: LambdaParam, k: usize, trials: u64, seed: u64) -> Result<RunStats> {
    let protocol = match k {
        1 => Protocol::Berlin,
        2 => Protocol::Ours,
        _ => {
            return Err(Error::OutOfRange {
                name: "k",
                value: k as f64,
                constraint: "product adversary supports k = 1 or k = 2",
            })
        }
    };
    Scenario {
        protocol,
        lambda,
        channel: ChannelModel::lossless(),
        adversary: Adversary::AliceProduct { target: 0 },
    }
    .run(trials, seed)
}
