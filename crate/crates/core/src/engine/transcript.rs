//! Ordered record of one protocol execution and its line-oriented text form.
//!
//! Each trial is written as a header line followed by one line per message:
//!
//! ```text
//! # trial 17 protocol=ours restarts=1 outcome=0
//! commit-states alice -
//! failure-report bob -
//! commit-states alice -
//! success-report bob -
//! r-reveal alice 10
//! c-prime bob 1
//! bc-reveal alice 01:1
//! verdict bob 0
//! ```

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::states::Bit;

use super::Protocol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

/// Protocol result x ∈ {0, 1, ⊥}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Outcome {
    Bit(Bit),
    Abort,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Bit(b) => write!(f, "{b}"),
            Outcome::Abort => f.write_str("abort"),
        }
    }
}

impl FromStr for Outcome {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "0" => Ok(Outcome::Bit(0)),
            "1" => Ok(Outcome::Bit(1)),
            "abort" => Ok(Outcome::Abort),
            other => Err(format!("unknown outcome {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    /// Alice transmits her quantum registers (no classical payload).
    CommitStates,
    FailureReport,
    SuccessReport,
    /// One-time-pad bits r_i.
    PadReveal(Vec<Bit>),
    CPrime(Bit),
    /// Bases b_i followed by the committed bit c.
    Opening { bases: Vec<Bit>, c: Bit },
    Verdict(Outcome),
}

impl Message {
    pub fn tag(&self) -> &'static str {
        match self {
            Message::CommitStates => "commit-states",
            Message::FailureReport => "failure-report",
            Message::SuccessReport => "success-report",
            Message::PadReveal(_) => "r-reveal",
            Message::CPrime(_) => "c-prime",
            Message::Opening { .. } => "bc-reveal",
            Message::Verdict(_) => "verdict",
        }
    }

    pub fn sender(&self) -> Party {
        match self {
            Message::CommitStates | Message::PadReveal(_) | Message::Opening { .. } => Party::Alice,
            _ => Party::Bob,
        }
    }

    fn payload(&self) -> String {
        let bits = |v: &[Bit]| v.iter().map(|b| char::from(b'0' + b)).collect::<String>();
        match self {
            Message::CommitStates | Message::FailureReport | Message::SuccessReport => "-".into(),
            Message::PadReveal(r) => bits(r),
            Message::CPrime(c) => c.to_string(),
            Message::Opening { bases, c } => format!("{}:{c}", bits(bases)),
            Message::Verdict(x) => x.to_string(),
        }
    }

    fn parse(tag: &str, payload: &str) -> std::result::Result<Self, String> {
        let bits = |s: &str| -> std::result::Result<Vec<Bit>, String> {
            s.chars()
                .map(|ch| match ch {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(format!("invalid bit {ch:?}")),
                })
                .collect()
        };
        let bit = |s: &str| -> std::result::Result<Bit, String> {
            match bits(s)?.as_slice() {
                [b] => Ok(*b),
                _ => Err(format!("expected a single bit, found {s:?}")),
            }
        };
        Ok(match tag {
            "commit-states" => Message::CommitStates,
            "failure-report" => Message::FailureReport,
            "success-report" => Message::SuccessReport,
            "r-reveal" => Message::PadReveal(bits(payload)?),
            "c-prime" => Message::CPrime(bit(payload)?),
            "bc-reveal" => {
                let (b, c) = payload.split_once(':').ok_or("bc-reveal payload needs bases:c")?;
                Message::Opening {
                    bases: bits(b)?,
                    c: bit(c)?,
                }
            }
            "verdict" => Message::Verdict(payload.parse()?),
            other => return Err(format!("unknown step tag {other:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub protocol: Protocol,
    pub trial: u64,
    pub round_restarts: u64,
    pub messages: Vec<Message>,
    /// `None` when the trial hit the restart cap and was discarded.
    pub outcome: Option<Outcome>,
}

impl Transcript {
    pub fn new(protocol: Protocol, trial: u64) -> Self {
        Self {
            protocol,
            trial,
            round_restarts: 0,
            messages: Vec::new(),
            outcome: None,
        }
    }

    pub fn push(&mut self, message: Message) {
        self.messages.push(message);
    }

    /// Checks that the messages follow the protocol's numbered steps, with
    /// any number of failed rounds before the final one.
    pub fn is_well_ordered(&self) -> bool {
        let mut msgs = self.messages.iter().peekable();
        let mut failures = 0u64;
        loop {
            if msgs.next() != Some(&Message::CommitStates) {
                return self.outcome.is_none() && msgs.peek().is_none() && failures == self.round_restarts;
            }
            match msgs.next() {
                Some(Message::FailureReport) => failures += 1,
                Some(Message::SuccessReport) => break,
                _ => return false,
            }
        }
        if failures != self.round_restarts {
            return false;
        }
        if self.protocol.encrypted() && !matches!(msgs.next(), Some(Message::PadReveal(r)) if r.len() == self.protocol.registers()) {
            return false;
        }
        let Some(Message::CPrime(c_prime)) = msgs.next() else {
            return false;
        };
        let Some(Message::Opening { bases, c }) = msgs.next() else {
            return false;
        };
        if bases.len() != self.protocol.registers() {
            return false;
        }
        let Some(Message::Verdict(x)) = msgs.next() else {
            return false;
        };
        let consistent = match x {
            Outcome::Bit(b) => *b == c ^ c_prime,
            Outcome::Abort => true,
        };
        consistent && msgs.next().is_none() && self.outcome == Some(*x)
    }

    pub fn write_lines(&self, out: &mut String) {
        let outcome = self.outcome.map_or_else(|| "discarded".to_string(), |x| x.to_string());
        let _ = writeln!(
            out,
            "# trial {} protocol={} restarts={} outcome={}",
            self.trial,
            self.protocol.id(),
            self.round_restarts,
            outcome
        );
        for m in &self.messages {
            let sender = match m.sender() {
                Party::Alice => "alice",
                Party::Bob => "bob",
            };
            let _ = writeln!(out, "{} {} {}", m.tag(), sender, m.payload());
        }
    }

    pub fn to_lines(&self) -> String {
        let mut s = String::new();
        self.write_lines(&mut s);
        s
    }
}

/// Parses the output of [`Transcript::write_lines`] for any number of trials.
pub fn parse_transcripts(text: &str) -> Result<Vec<Transcript>> {
    let err = |line: usize, reason: String| Error::TranscriptParse { line, reason };
    let mut out: Vec<Transcript> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix("# trial ") {
            let mut parts = header.split_whitespace();
            let trial = parts
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err(line_no, "missing trial index".into()))?;
            let mut t = Transcript::new(Protocol::Ours, trial);
            for kv in parts {
                let (k, v) = kv.split_once('=').ok_or_else(|| err(line_no, format!("bad field {kv:?}")))?;
                match k {
                    "protocol" => t.protocol = v.parse().map_err(|e| err(line_no, e))?,
                    "restarts" => t.round_restarts = v.parse().map_err(|_| err(line_no, format!("bad restarts {v:?}")))?,
                    "outcome" => {
                        t.outcome = if v == "discarded" {
                            None
                        } else {
                            Some(v.parse().map_err(|e| err(line_no, e))?)
                        }
                    }
                    _ => return Err(err(line_no, format!("unknown field {k:?}"))),
                }
            }
            out.push(t);
            continue;
        }
        let current = out
            .last_mut()
            .ok_or_else(|| err(line_no, "message before any trial header".into()))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [tag, sender, payload] = fields.as_slice() else {
            return Err(err(line_no, "expected `tag sender payload`".into()));
        };
        let msg = Message::parse(tag, payload).map_err(|e| err(line_no, e))?;
        let expected = match msg.sender() {
            Party::Alice => "alice",
            Party::Bob => "bob",
        };
        if *sender != expected {
            return Err(err(line_no, format!("{tag} must be sent by {expected}")));
        }
        current.push(msg);
    }
    Ok(out)
}
