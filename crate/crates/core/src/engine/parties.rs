use rand::Rng;

use crate::qmath::{OrthonormalBasis, PureState};
use crate::states::{encoding_basis, phi, Bit, LambdaParam};
use crate::SimRng;

use super::oracle::alice_optimal_commit;
use super::{AliceStrategy, BobStrategy};

fn random_bit(rng: &mut SimRng) -> Bit {
    rng.gen_range(0..=1)
}

/// Follows the protocol: fresh b_i, c (and r_i when padded) every round.
#[derive(Debug, Clone)]
pub struct HonestAlice {
    lambda: LambdaParam,
    registers: usize,
    encrypted: bool,
    bases: Vec<Bit>,
    pad: Vec<Bit>,
    c: Bit,
}

impl HonestAlice {
    pub fn new(lambda: LambdaParam, registers: usize, encrypted: bool) -> Self {
        Self {
            lambda,
            registers,
            encrypted,
            bases: vec![0; registers],
            pad: vec![0; registers],
            c: 0,
        }
    }
}

impl AliceStrategy for HonestAlice {
    fn commit(&mut self, rng: &mut SimRng) -> Vec<PureState> {
        self.bases = (0..self.registers).map(|_| random_bit(rng)).collect();
        self.c = random_bit(rng);
        self.pad = if self.encrypted {
            (0..self.registers).map(|_| random_bit(rng)).collect()
        } else {
            vec![0; self.registers]
        };
        self.bases
            .iter()
            .zip(&self.pad)
            .map(|(&b, &r)| phi(b, self.c ^ r, self.lambda))
            .collect()
    }

    fn reveal_pad(&mut self) -> Vec<Bit> {
        self.pad.clone()
    }

    fn open(&mut self, _c_prime: Bit, _rng: &mut SimRng) -> (Vec<Bit>, Bit) {
        (self.bases.clone(), self.c)
    }
}

/// Measures each register in a random basis B^{b'_i} and checks the
/// registers whose basis matches Alice's opening.
#[derive(Debug, Clone)]
pub struct HonestBob {
    bases: [OrthonormalBasis; 2],
    registers: usize,
    chosen: Vec<Bit>,
    outcomes: Vec<Bit>,
    pad: Vec<Bit>,
}

impl HonestBob {
    pub fn new(lambda: LambdaParam, registers: usize) -> Self {
        Self {
            bases: [encoding_basis(0, lambda), encoding_basis(1, lambda)],
            registers,
            chosen: Vec::new(),
            outcomes: Vec::new(),
            pad: vec![0; registers],
        }
    }
}

impl BobStrategy for HonestBob {
    fn receive(&mut self, delivered: &[Option<PureState>], rng: &mut SimRng) -> bool {
        debug_assert_eq!(delivered.len(), self.registers);
        self.chosen.clear();
        self.outcomes.clear();
        for reg in delivered {
            let Some(state) = reg else {
                return false;
            };
            let b = random_bit(rng);
            let outcome = self.bases[b as usize].measure(state, rng).expect("qubit register");
            self.chosen.push(b);
            self.outcomes.push(outcome as Bit);
        }
        true
    }

    fn learn_pad(&mut self, pad: &[Bit]) {
        self.pad = pad.to_vec();
    }

    fn choose_c_prime(&mut self, rng: &mut SimRng) -> Bit {
        random_bit(rng)
    }

    fn accepts(&mut self, bases: &[Bit], c: Bit) -> bool {
        if bases.len() != self.registers {
            return false;
        }
        (0..self.registers).all(|i| bases[i] != self.chosen[i] || self.outcomes[i] == c ^ self.pad[i])
    }
}

/// Measures every register in the computational basis, then picks c′ from
/// the maximum-likelihood estimate of c so that x = `target`.
#[derive(Debug, Clone)]
pub struct DiscriminatingBob {
    computational: OrthonormalBasis,
    informative: bool,
    target: Bit,
    outcomes: Vec<Bit>,
    pad: Vec<Bit>,
}

impl DiscriminatingBob {
    pub fn new(lambda: LambdaParam, registers: usize, target: Bit) -> Self {
        Self {
            computational: OrthonormalBasis::new(vec![PureState::basis(2, 0), PureState::basis(2, 1)])
                .expect("computational basis"),
            informative: lambda.value() > 0.5,
            target,
            outcomes: Vec::new(),
            pad: vec![0; registers],
        }
    }

    /// ML estimate of c: each register votes m_i ⊕ r_i; ties (and λ = ½) go to 0.
    fn guess(&self) -> Bit {
        if !self.informative {
            return 0;
        }
        let ones = self.outcomes.iter().zip(&self.pad).filter(|(m, r)| *m ^ *r == 1).count();
        let zeros = self.outcomes.len() - ones;
        Bit::from(ones > zeros)
    }
}

impl BobStrategy for DiscriminatingBob {
    fn receive(&mut self, delivered: &[Option<PureState>], rng: &mut SimRng) -> bool {
        self.outcomes.clear();
        for reg in delivered {
            let Some(state) = reg else {
                return false;
            };
            let m = self.computational.measure(state, rng).expect("qubit register");
            self.outcomes.push(m as Bit);
        }
        true
    }

    fn learn_pad(&mut self, pad: &[Bit]) {
        self.pad = pad.to_vec();
    }

    fn choose_c_prime(&mut self, _rng: &mut SimRng) -> Bit {
        self.guess() ^ self.target
    }

    fn accepts(&mut self, _bases: &[Bit], _c: Bit) -> bool {
        true
    }
}

/// Sends the same single-qubit state in every register and opens
/// c = c′ ⊕ target with, per register, the basis most likely to pass.
#[derive(Debug, Clone)]
pub struct CheatingAliceProduct {
    state: PureState,
    registers: usize,
    target: Bit,
    /// Best basis to claim when opening bit c.
    best_basis: [Bit; 2],
}

impl CheatingAliceProduct {
    pub fn new(lambda: LambdaParam, registers: usize, target: Bit) -> Self {
        let (state, _) = alice_optimal_commit(lambda);
        let best = |c: Bit| -> Bit {
            let o0 = state.inner(&phi(0, c, lambda)).norm_sqr();
            let o1 = state.inner(&phi(1, c, lambda)).norm_sqr();
            Bit::from(o1 > o0)
        };
        Self {
            best_basis: [best(0), best(1)],
            state,
            registers,
            target,
        }
    }
}

impl AliceStrategy for CheatingAliceProduct {
    fn commit(&mut self, _rng: &mut SimRng) -> Vec<PureState> {
        vec![self.state.clone(); self.registers]
    }

    fn reveal_pad(&mut self) -> Vec<Bit> {
        vec![0; self.registers]
    }

    fn open(&mut self, c_prime: Bit, _rng: &mut SimRng) -> (Vec<Bit>, Bit) {
        let c = c_prime ^ self.target;
        (vec![self.best_basis[c as usize]; self.registers], c)
    }
}
