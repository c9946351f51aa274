//! Two-counter machines and their net encoding: register values become
//! token towers, the program counter a travelling constant token, and
//! halting a violation of a one-place equation.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::equation::HomogeneousEquation;
use crate::net::{Net, NetError, NetStructure, Transition};
use crate::poly::{PVector, PolyError, Polynomial};
use crate::term::{Signature, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MinskyError {
    #[error("machine needs at least one register")]
    NoRegisters,
    #[error("machine needs at least the halt instruction")]
    NoInstructions,
    #[error("last instruction must be halt")]
    MissingHalt,
    #[error("halt may only appear as the last instruction (found at {0})")]
    EarlyHalt(usize),
    #[error("instruction {0} references register {1}, machine has {2}")]
    BadRegister(usize, usize, usize),
    #[error("instruction {0} jumps to {1}, program has {2} instructions")]
    BadTarget(usize, usize, usize),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// One instruction; registers and targets are 1-indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instruction {
    Inc { register: usize, target: usize },
    /// Decrement and jump to `on_positive` when the register is nonzero,
    /// jump to `on_zero` otherwise.
    Jz { register: usize, on_positive: usize, on_zero: usize },
    Halt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinskyMachine {
    registers: usize,
    instructions: Vec<Instruction>,
}

impl MinskyMachine {
    pub fn new(
        registers: usize,
        instructions: Vec<Instruction>,
    ) -> Result<MinskyMachine, MinskyError> {
        if registers == 0 {
            return Err(MinskyError::NoRegisters);
        }
        let n = instructions.len();
        if n == 0 {
            return Err(MinskyError::NoInstructions);
        }
        if instructions[n - 1] != Instruction::Halt {
            return Err(MinskyError::MissingHalt);
        }
        for (index, instr) in instructions.iter().enumerate() {
            let i = index + 1;
            let (register, targets) = match instr {
                Instruction::Halt if i != n => return Err(MinskyError::EarlyHalt(i)),
                Instruction::Halt => continue,
                Instruction::Inc { register, target } => (*register, vec![*target]),
                Instruction::Jz {
                    register,
                    on_positive,
                    on_zero,
                } => (*register, vec![*on_positive, *on_zero]),
            };
            if register == 0 || register > registers {
                return Err(MinskyError::BadRegister(i, register, registers));
            }
            for z in targets {
                if z == 0 || z > n {
                    return Err(MinskyError::BadTarget(i, z, n));
                }
            }
        }
        Ok(MinskyMachine {
            registers,
            instructions,
        })
    }

    pub fn registers(&self) -> usize {
        self.registers
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Non-fatal oddities: a conditional jump straight to the halt
    /// instruction is accepted but unusual enough to flag.
    pub fn lints(&self) -> Vec<String> {
        let n = self.instructions.len();
        let mut out = Vec::new();
        for (index, instr) in self.instructions.iter().enumerate() {
            if let Instruction::Jz {
                on_positive,
                on_zero,
                ..
            } = instr
            {
                if *on_positive == n || *on_zero == n {
                    out.push(format!(
                        "instruction {} jumps conditionally to the halt instruction",
                        index + 1
                    ));
                }
            }
        }
        out
    }
}

/// A machine configuration: register values and the 1-indexed program
/// counter.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MachineState {
    pub rho: Vec<u64>,
    pub ell: usize,
}

impl MachineState {
    pub fn initial(m: &MinskyMachine) -> MachineState {
        MachineState {
            rho: vec![0; m.registers],
            ell: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Next(MachineState),
    Halted,
}

pub fn machine_step(s: &MachineState, m: &MinskyMachine) -> StepOutcome {
    match m.instructions[s.ell - 1] {
        Instruction::Halt => StepOutcome::Halted,
        Instruction::Inc { register, target } => {
            let mut rho = s.rho.clone();
            rho[register - 1] += 1;
            StepOutcome::Next(MachineState { rho, ell: target })
        }
        Instruction::Jz {
            register,
            on_positive,
            on_zero,
        } => {
            let mut rho = s.rho.clone();
            if rho[register - 1] > 0 {
                rho[register - 1] -= 1;
                StepOutcome::Next(MachineState {
                    rho,
                    ell: on_positive,
                })
            } else {
                StepOutcome::Next(MachineState { rho, ell: on_zero })
            }
        }
    }
}

/// Runs up to `max_steps` steps; returns the visited states starting with
/// `s` and whether the machine halted within the budget.
pub fn machine_run(
    s: &MachineState,
    m: &MinskyMachine,
    max_steps: usize,
) -> (Vec<MachineState>, bool) {
    let mut trace = vec![s.clone()];
    for _ in 0..max_steps {
        match machine_step(trace.last().expect("trace nonempty"), m) {
            StepOutcome::Halted => return (trace, true),
            StepOutcome::Next(next) => trace.push(next),
        }
    }
    let halted = matches!(
        machine_step(trace.last().expect("trace nonempty"), m),
        StepOutcome::Halted
    );
    (trace, halted)
}

pub fn register_place(r: usize) -> String {
    format!("p{}", r)
}

pub fn counter_place(i: usize) -> String {
    format!("q{}", i)
}

/// The register-value token: the constant wrapped in `x` layers of f.
pub fn tower(x: u64) -> Term {
    let mut t = Term::constant("c");
    for _ in 0..x {
        t = Term::app("f", vec![t]);
    }
    t
}

fn machine_signature() -> Signature {
    Signature::new(vec![("f".into(), 1), ("c".into(), 0)]).expect("valid signature")
}

fn machine_places(m: &MinskyMachine) -> Vec<String> {
    let mut places: Vec<String> = (1..=m.registers).map(register_place).collect();
    places.extend((1..=m.instructions.len()).map(counter_place));
    places
}

fn arc(
    places: &[String],
    entries: &[(String, Term)],
) -> Result<PVector, PolyError> {
    PVector::from_entries(
        crate::group::CyclicGroup::Int,
        places.to_vec(),
        entries.iter().map(|(p, t)| {
            (
                p.clone(),
                Polynomial::monomial(crate::group::CyclicGroup::Int, t.clone(), 1)
                    .expect("unit coefficient"),
            )
        }),
    )
}

/// Encodes the machine as a net: an increment wraps the register token in
/// f and moves the counter; a conditional jump either unwraps one f layer
/// or witnesses the bare constant and takes the zero branch.
pub fn encode(m: &MinskyMachine) -> Result<Net, MinskyError> {
    let places = machine_places(m);
    let c = || Term::constant("c");
    let x = || Term::var("X");
    let fx = || Term::app("f", vec![Term::var("X")]);

    let mut transitions = Vec::new();
    for (index, instr) in m.instructions.iter().enumerate() {
        let i = index + 1;
        match instr {
            Instruction::Halt => {}
            Instruction::Inc { register, target } => {
                let p = register_place(*register);
                transitions.push(Transition::new(
                    format!("t{}", i),
                    arc(&places, &[(counter_place(i), c()), (p.clone(), x())])?,
                    arc(&places, &[(p, fx()), (counter_place(*target), c())])?,
                )?);
            }
            Instruction::Jz {
                register,
                on_positive,
                on_zero,
            } => {
                let p = register_place(*register);
                transitions.push(Transition::new(
                    format!("t{}", i),
                    arc(&places, &[(counter_place(i), c()), (p.clone(), fx())])?,
                    arc(&places, &[(p.clone(), x()), (counter_place(*on_positive), c())])?,
                )?);
                transitions.push(Transition::new(
                    format!("t{}z", i),
                    arc(&places, &[(counter_place(i), c()), (p.clone(), c())])?,
                    arc(&places, &[(p, c()), (counter_place(*on_zero), c())])?,
                )?);
            }
        }
    }
    let structure = NetStructure::new(machine_signature(), places, transitions)?;
    let initial = state_marking(&MachineState::initial(m), m)?;
    Ok(Net::new(structure, initial)?)
}

/// The marking for a machine state: one tower token per register place
/// and one constant on the active counter place.
pub fn state_marking(s: &MachineState, m: &MinskyMachine) -> Result<PVector, MinskyError> {
    let places = machine_places(m);
    let mut entries: BTreeMap<String, Term> = BTreeMap::new();
    for (r0, value) in s.rho.iter().enumerate() {
        entries.insert(register_place(r0 + 1), tower(*value));
    }
    entries.insert(counter_place(s.ell), Term::constant("c"));
    Ok(arc(
        &places,
        &entries.into_iter().collect::<Vec<_>>(),
    )?)
}

/// The equation "the halt place stays empty": coefficient one on the last
/// counter place, zero elsewhere. Valid iff the machine never halts.
pub fn halting_equation(m: &MinskyMachine) -> Result<HomogeneousEquation, MinskyError> {
    let places = machine_places(m);
    let k = PVector::from_entries(
        crate::group::CyclicGroup::Int,
        places,
        [(
            counter_place(m.instructions.len()),
            Polynomial::monomial(crate::group::CyclicGroup::Int, Term::var("x"), 1)
                .expect("unit coefficient"),
        )],
    )?;
    Ok(HomogeneousEquation::new("halting".to_string(), k).expect("simple by construction"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::satisfies;
    use crate::net::fire;
    use crate::oracle::{bounded_reachability, Bounds, Reachability};
    use crate::term::Substitution;

    fn inc(register: usize, target: usize) -> Instruction {
        Instruction::Inc { register, target }
    }

    fn jz(register: usize, on_positive: usize, on_zero: usize) -> Instruction {
        Instruction::Jz {
            register,
            on_positive,
            on_zero,
        }
    }

    #[test]
    fn validation_rejects_malformed_programs() {
        assert_eq!(
            MinskyMachine::new(0, vec![Instruction::Halt]),
            Err(MinskyError::NoRegisters)
        );
        assert_eq!(
            MinskyMachine::new(1, vec![inc(1, 1)]),
            Err(MinskyError::MissingHalt)
        );
        assert_eq!(
            MinskyMachine::new(1, vec![Instruction::Halt, Instruction::Halt]),
            Err(MinskyError::EarlyHalt(1))
        );
        assert_eq!(
            MinskyMachine::new(1, vec![inc(2, 2), Instruction::Halt]),
            Err(MinskyError::BadRegister(1, 2, 1))
        );
        assert_eq!(
            MinskyMachine::new(1, vec![inc(1, 3), Instruction::Halt]),
            Err(MinskyError::BadTarget(1, 3, 2))
        );
    }

    #[test]
    fn step_semantics() {
        let m = MinskyMachine::new(1, vec![inc(1, 2), Instruction::Halt]).unwrap();
        let s = MachineState::initial(&m);
        let StepOutcome::Next(s2) = machine_step(&s, &m) else {
            panic!("expected step");
        };
        assert_eq!(s2, MachineState { rho: vec![1], ell: 2 });
        assert_eq!(machine_step(&s2, &m), StepOutcome::Halted);

        let m = MinskyMachine::new(1, vec![jz(1, 2, 2), Instruction::Halt]).unwrap();
        let StepOutcome::Next(s2) = machine_step(&MachineState::initial(&m), &m) else {
            panic!("expected step");
        };
        assert_eq!(s2, MachineState { rho: vec![0], ell: 2 });
    }

    #[test]
    fn lint_flags_conditional_jump_to_halt() {
        let m = MinskyMachine::new(1, vec![jz(1, 2, 1), Instruction::Halt]).unwrap();
        assert_eq!(m.lints().len(), 1);
        let m = MinskyMachine::new(1, vec![inc(1, 2), Instruction::Halt]).unwrap();
        assert!(m.lints().is_empty());
    }

    #[test]
    fn encoding_shape() {
        let m = MinskyMachine::new(
            2,
            vec![inc(1, 2), jz(1, 1, 3), Instruction::Halt],
        )
        .unwrap();
        let net = encode(&m).unwrap();
        assert_eq!(net.structure().places().len(), 2 + 3);
        // One transition per increment, two per conditional jump.
        assert_eq!(net.structure().transitions().len(), 1 + 2);
        let t2 = net.structure().transition("t2").unwrap();
        assert_eq!(
            t2.consume().get("p1").unwrap().support().next().unwrap(),
            &Term::app("f", vec![Term::var("X")])
        );
        let t2z = net.structure().transition("t2z").unwrap();
        assert_eq!(
            t2z.consume().get("p1").unwrap().support().next().unwrap(),
            &Term::constant("c")
        );
        assert_eq!(
            net.initial(),
            &state_marking(&MachineState::initial(&m), &m).unwrap()
        );
    }

    #[test]
    fn net_steps_track_machine_steps() {
        let m = MinskyMachine::new(
            1,
            vec![inc(1, 2), jz(1, 3, 3), Instruction::Halt],
        )
        .unwrap();
        let net = encode(&m).unwrap();
        let s0 = MachineState::initial(&m);
        let StepOutcome::Next(s1) = machine_step(&s0, &m) else {
            panic!()
        };
        let StepOutcome::Next(s2) = machine_step(&s1, &m) else {
            panic!()
        };

        // Increment: mode X = current tower.
        let t1 = net.structure().transition("t1").unwrap();
        let sigma = Substitution::from_bindings([("X".to_string(), tower(0))]);
        let m1 = fire(net.initial(), t1, &sigma).unwrap();
        assert_eq!(m1, state_marking(&s1, &m).unwrap());

        // Decrementing jump: mode X = tower below the current one.
        let t2 = net.structure().transition("t2").unwrap();
        let sigma = Substitution::from_bindings([("X".to_string(), tower(0))]);
        let m2 = fire(&m1, t2, &sigma).unwrap();
        assert_eq!(m2, state_marking(&s2, &m).unwrap());

        // The zero-test branch is not enabled while the register holds a
        // wrapped token.
        let t2z = net.structure().transition("t2z").unwrap();
        let sigma = Substitution::empty();
        assert!(!crate::net::enabled(&m1, t2z, &sigma).unwrap());
    }

    #[test]
    fn halting_equation_detects_the_halt_place() {
        let m = MinskyMachine::new(1, vec![inc(1, 2), Instruction::Halt]).unwrap();
        let eq = halting_equation(&m).unwrap();
        let s0 = MachineState::initial(&m);
        assert!(satisfies(&state_marking(&s0, &m).unwrap(), &eq).unwrap());
        let halted = MachineState { rho: vec![1], ell: 2 };
        assert!(!satisfies(&state_marking(&halted, &m).unwrap(), &eq).unwrap());
    }

    #[test]
    fn halting_machine_violates_within_two_steps() {
        let m = MinskyMachine::new(1, vec![inc(1, 2), Instruction::Halt]).unwrap();
        let net = encode(&m).unwrap();
        let eq = halting_equation(&m).unwrap();
        let bounds = Bounds {
            term_depth: 2,
            search_depth: 2,
            ..Bounds::default()
        };
        let Reachability::ViolatedAt { run, .. } = bounded_reachability(&net, &eq, &bounds).unwrap()
        else {
            panic!("expected violation");
        };
        assert_eq!(run.len(), 1);
        assert_eq!(run[0].0, "t1");
    }

    #[test]
    fn diverging_zero_loop_never_violates() {
        // jz 1 ? 2 : 1 with register 1 stuck at zero loops on the zero
        // branch forever; the halt place stays empty.
        let m = MinskyMachine::new(1, vec![jz(1, 2, 1), Instruction::Halt]).unwrap();
        let net = encode(&m).unwrap();
        let eq = halting_equation(&m).unwrap();
        let bounds = Bounds {
            term_depth: 1,
            search_depth: 8,
            ..Bounds::default()
        };
        assert_eq!(
            bounded_reachability(&net, &eq, &bounds).unwrap(),
            Reachability::HoldsUpToBound
        );
    }
}
