//! Command implementations. Each returns a machine-readable report plus
//! the process exit code: 0 success/positive verdict, 1 negative verdict,
//! 2 usage error, 3 bounds exhausted (verdict unknown).

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use apn_core::equation::{invariant_check, satisfies, validity_by_stability, Validity};
use apn_core::net::{run, Net, Transition};
use apn_core::oracle::{bounded_reachability, Bounds, Reachability};
use apn_core::poly::{PVector, Polynomial};
use apn_core::stability::{
    decide_stability, derive_substitutions, minimize_spanning, spanning_set, DerivedSubstitution,
    SpanningSet, StabilityVerdict, Zero,
};
use apn_core::term::Substitution;

use crate::model::{parse_step, ModelFile, NetModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_EXHAUSTED: i32 = 3;

pub struct Outcome {
    pub report: Value,
    pub text: String,
    pub exit: i32,
}

#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn report(command: &str, inputs: Value, verdict: Value, statistics: Value) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "inputs": inputs,
        "verdict": verdict,
        "statistics": statistics,
    })
}

fn poly_json(p: &Polynomial) -> Value {
    Value::Array(
        p.iter()
            .map(|(term, coeff)| json!({"term": term.to_string(), "coeff": coeff}))
            .collect(),
    )
}

fn marking_json(m: &PVector) -> Value {
    let mut map = Map::new();
    for place in m.support_places() {
        map.insert(place.to_string(), poly_json(m.get(place).expect("supported")));
    }
    Value::Object(map)
}

fn subst_text(s: &Substitution) -> String {
    s.iter()
        .map(|(v, t)| format!("{} = {}", v, t))
        .collect::<Vec<_>>()
        .join(", ")
}

fn subst_json(s: &Substitution) -> Value {
    let map: BTreeMap<String, String> =
        s.iter().map(|(v, t)| (v.to_string(), t.to_string())).collect();
    json!(map)
}

fn zero_json(z: &Zero) -> Value {
    json!({
        "counts": z.counts(),
        "unifier": subst_json(z.mgu()),
        "result": z.result().map(|t| t.to_string()),
    })
}

fn derived_json(d: &DerivedSubstitution) -> Value {
    json!({
        "key": d.key(),
        "substitution": subst_json(d.delta()),
        "chosen": d.chosen().iter().map(|(q, z)| (q.clone(), zero_json(z)))
            .collect::<Map<String, Value>>(),
    })
}

fn spanning_stats(s: &SpanningSet) -> Value {
    json!({
        "spanning_set_size": s.len(),
        "bound": s.bound(),
    })
}

fn lookup_equation<'a>(
    model: &'a ModelFile,
    name: &str,
) -> Result<&'a apn_core::equation::HomogeneousEquation, UsageError> {
    model
        .equations
        .get(name)
        .ok_or_else(|| UsageError(format!("unknown equation `{}`", name)))
}

fn lookup_net<'a>(
    model: &'a ModelFile,
    name: Option<&str>,
) -> Result<(&'a String, &'a NetModel), UsageError> {
    match name {
        Some(n) => model
            .nets
            .get_key_value(n)
            .ok_or_else(|| UsageError(format!("unknown net `{}`", n))),
        None => model
            .sole_net()
            .ok_or_else(|| UsageError("file has no single net; pass --net".into())),
    }
}

fn lookup_marking<'a>(net: &'a NetModel, name: &str) -> Result<&'a PVector, UsageError> {
    net.markings
        .get(name)
        .ok_or_else(|| UsageError(format!("unknown marking `{}`", name)))
}

fn selected_transitions<'a>(
    net: &'a NetModel,
    name: Option<&str>,
) -> Result<Vec<&'a Transition>, UsageError> {
    match name {
        Some(n) => net
            .structure
            .transition(n)
            .map(|t| vec![t])
            .map_err(|e| UsageError(e.to_string())),
        None => Ok(net.structure.transitions().iter().collect()),
    }
}

fn internal(e: impl std::fmt::Display) -> UsageError {
    UsageError(e.to_string())
}

pub fn check_stability(
    model: &ModelFile,
    equation: &str,
    net: Option<&str>,
    transition: Option<&str>,
) -> Result<Outcome, UsageError> {
    let eq = lookup_equation(model, equation)?;
    let (net_name, net) = lookup_net(model, net)?;
    let transitions = selected_transitions(net, transition)?;
    let sig = net.structure.signature();
    let mut verdicts = Map::new();
    let mut text = String::new();
    let mut all_stable = true;
    for t in transitions {
        let verdict = decide_stability(sig, eq, t).map_err(internal)?;
        let entry = match &verdict {
            StabilityVerdict::Stable => {
                text.push_str(&format!("{}: stable under {}\n", equation, t.name()));
                json!({"stable": true})
            }
            StabilityVerdict::Unstable(w) => {
                all_stable = false;
                text.push_str(&format!(
                    "{}: unstable under {}\n  substitution: {}\n  residual: {}\n  marking: {}\n  successor: {}\n  violation: {}\n",
                    equation, t.name(), subst_text(w.delta.delta()), w.residual, w.marking, w.successor, w.violation
                ));
                json!({
                    "stable": false,
                    "substitution": derived_json(&w.delta),
                    "residual": poly_json(&w.residual),
                    "mode": subst_json(&w.realization),
                    "marking": marking_json(&w.marking),
                    "successor": marking_json(&w.successor),
                    "violation": poly_json(&w.violation),
                })
            }
        };
        verdicts.insert(t.name().to_string(), entry);
    }
    let stats = spanning_stats(&minimize_spanning(&spanning_set(eq).map_err(internal)?));
    Ok(Outcome {
        report: report(
            "check-stability",
            json!({"net": net_name, "equation": equation, "transition": transition}),
            Value::Object(verdicts),
            stats,
        ),
        text,
        exit: if all_stable { EXIT_OK } else { EXIT_NEGATIVE },
    })
}

pub fn check_invariant(
    model: &ModelFile,
    equation: &str,
    net: Option<&str>,
    transition: Option<&str>,
) -> Result<Outcome, UsageError> {
    let eq = lookup_equation(model, equation)?;
    let (net_name, net) = lookup_net(model, net)?;
    let transitions = selected_transitions(net, transition)?;
    let mut verdicts = Map::new();
    let mut text = String::new();
    let mut all_hold = true;
    for t in transitions {
        let holds = invariant_check(eq, t).map_err(internal)?;
        all_hold &= holds;
        text.push_str(&format!(
            "{}: place-invariant criterion {} for {}\n",
            equation,
            if holds { "holds" } else { "fails" },
            t.name()
        ));
        verdicts.insert(t.name().to_string(), json!({"invariant": holds}));
    }
    Ok(Outcome {
        report: report(
            "check-invariant",
            json!({"net": net_name, "equation": equation, "transition": transition}),
            Value::Object(verdicts),
            json!({}),
        ),
        text,
        exit: if all_hold { EXIT_OK } else { EXIT_NEGATIVE },
    })
}

pub fn cmd_satisfies(
    model: &ModelFile,
    equation: &str,
    net: Option<&str>,
    marking: &str,
) -> Result<Outcome, UsageError> {
    let eq = lookup_equation(model, equation)?;
    let (net_name, net) = lookup_net(model, net)?;
    let m = lookup_marking(net, marking)?;
    let holds = satisfies(m, eq).map_err(internal)?;
    Ok(Outcome {
        report: report(
            "satisfies",
            json!({"net": net_name, "equation": equation, "marking": marking}),
            json!({"satisfies": holds}),
            json!({}),
        ),
        text: format!(
            "{} {} {}\n",
            marking,
            if holds { "satisfies" } else { "violates" },
            equation
        ),
        exit: if holds { EXIT_OK } else { EXIT_NEGATIVE },
    })
}

pub fn simulate(
    model: &ModelFile,
    net: Option<&str>,
    marking: &str,
    steps: &[String],
) -> Result<Outcome, UsageError> {
    let (net_name, net) = lookup_net(model, net)?;
    let m0 = lookup_marking(net, marking)?;
    let script: Vec<(String, Substitution)> = steps
        .iter()
        .map(|s| parse_step(s, net.structure.signature()).map_err(internal))
        .collect::<Result<_, _>>()?;
    let full_net = Net::new(net.structure.clone(), m0.clone()).map_err(internal)?;
    match run(&full_net, &script) {
        Ok(trajectory) => {
            let mut text = String::new();
            for (i, m) in trajectory.iter().enumerate() {
                text.push_str(&format!("{}: {}\n", i, m));
            }
            Ok(Outcome {
                report: report(
                    "simulate",
                    json!({"net": net_name, "marking": marking, "steps": steps}),
                    json!({"trajectory": trajectory.iter().map(marking_json).collect::<Vec<_>>()}),
                    json!({"length": trajectory.len()}),
                ),
                text,
                exit: EXIT_OK,
            })
        }
        Err(e) => Ok(Outcome {
            report: report(
                "simulate",
                json!({"net": net_name, "marking": marking, "steps": steps}),
                json!({"error": e.to_string()}),
                json!({}),
            ),
            text: format!("{}\n", e),
            exit: EXIT_NEGATIVE,
        }),
    }
}

pub fn zeros(model: &ModelFile, equation: &str, minimize: bool) -> Result<Outcome, UsageError> {
    let eq = lookup_equation(model, equation)?;
    let full = spanning_set(eq).map_err(internal)?;
    let set = if minimize { minimize_spanning(&full) } else { full };
    let mut text = format!(
        "{}: {} zeros within bound {}\n",
        equation,
        set.len(),
        set.bound()
    );
    for z in set.zeros() {
        if z.is_trivial() {
            text.push_str("  (trivial)\n");
        } else {
            let counts: Vec<String> = z
                .counts()
                .iter()
                .map(|(p, c)| format!("{}: {}", p, c))
                .collect();
            text.push_str(&format!(
                "  {{{}}} result {}\n",
                counts.join(", "),
                z.result().map(|t| t.to_string()).unwrap_or_default()
            ));
        }
    }
    Ok(Outcome {
        report: report(
            "zeros",
            json!({"equation": equation, "minimize": minimize}),
            json!({"zeros": set.zeros().iter().map(zero_json).collect::<Vec<_>>()}),
            spanning_stats(&set),
        ),
        text,
        exit: EXIT_OK,
    })
}

pub fn derive(
    model: &ModelFile,
    equation: &str,
    net: Option<&str>,
    transition: &str,
) -> Result<Outcome, UsageError> {
    let eq = lookup_equation(model, equation)?;
    let (net_name, net) = lookup_net(model, net)?;
    let t = net
        .structure
        .transition(transition)
        .map_err(|e| UsageError(e.to_string()))?;
    let set = minimize_spanning(&spanning_set(eq).map_err(internal)?);
    let derived = derive_substitutions(&set, t, eq).map_err(internal)?;
    let mut text = format!(
        "{} substitutions derivable for {} under {}\n",
        derived.len(),
        equation,
        transition
    );
    for d in &derived {
        let shown = if d.key().is_empty() { "(identity)" } else { d.key() };
        text.push_str(&format!("  {}\n", shown));
    }
    Ok(Outcome {
        report: report(
            "derive",
            json!({"net": net_name, "equation": equation, "transition": transition}),
            json!({"substitutions": derived.iter().map(derived_json).collect::<Vec<_>>()}),
            spanning_stats(&set),
        ),
        text,
        exit: EXIT_OK,
    })
}

pub fn validity(
    model: &ModelFile,
    equation: &str,
    net: Option<&str>,
    marking: &str,
    bounds: &Bounds,
) -> Result<Outcome, UsageError> {
    let eq = lookup_equation(model, equation)?;
    let (net_name, net) = lookup_net(model, net)?;
    let m0 = lookup_marking(net, marking)?;
    let full_net = Net::new(net.structure.clone(), m0.clone()).map_err(internal)?;
    let sig = net.structure.signature();
    let mut stable = BTreeMap::new();
    for t in net.structure.transitions() {
        let verdict = decide_stability(sig, eq, t).map_err(internal)?;
        stable.insert(t.name().to_string(), verdict.is_stable());
    }
    let inputs = json!({
        "net": net_name, "equation": equation, "marking": marking,
        "term_depth": bounds.term_depth, "max_tokens": bounds.tokens_per_place,
        "search_depth": bounds.search_depth, "cap": bounds.candidate_cap,
    });
    let stats = json!({"stable_transitions": stable.clone()});
    match validity_by_stability(&full_net, eq, &stable).map_err(internal)? {
        Validity::Valid => Ok(Outcome {
            report: report("validity", inputs, json!({"outcome": "valid"}), stats),
            text: format!("{} is valid from {} (all transitions stable)\n", equation, marking),
            exit: EXIT_OK,
        }),
        Validity::Unknown { reason } => {
            // Stability is sufficient only: fall back to the bounded
            // search for a reachable violation before reporting unknown.
            match bounded_reachability(&full_net, eq, bounds).map_err(internal)? {
                Reachability::ViolatedAt { run, marking: bad } => {
                    let script: Vec<String> = run
                        .iter()
                        .map(|(t, s)| format!("{}({})", t, subst_text(s)))
                        .collect();
                    Ok(Outcome {
                        report: report(
                            "validity",
                            inputs,
                            json!({
                                "outcome": "violated",
                                "run": script,
                                "marking": marking_json(&bad),
                            }),
                            stats,
                        ),
                        text: format!(
                            "{} is violated: run [{}] reaches {}\n",
                            equation,
                            script.join("; "),
                            bad
                        ),
                        exit: EXIT_NEGATIVE,
                    })
                }
                outcome => {
                    let detail = match outcome {
                        Reachability::HoldsUpToBound => "no violation within bounds",
                        _ => "search budget exhausted",
                    };
                    Ok(Outcome {
                        report: report(
                            "validity",
                            inputs,
                            json!({"outcome": "unknown", "reason": reason, "search": detail}),
                            stats,
                        ),
                        text: format!("{}: unknown ({}; {})\n", equation, reason, detail),
                        exit: EXIT_EXHAUSTED,
                    })
                }
            }
        }
    }
}

pub fn encode_minsky(model: &ModelFile, machine: &str) -> Result<Outcome, UsageError> {
    let m = model
        .machines
        .get(machine)
        .ok_or_else(|| UsageError(format!("unknown machine `{}`", machine)))?;
    let net = apn_core::minsky::encode(m).map_err(internal)?;
    let eq = apn_core::minsky::halting_equation(m).map_err(internal)?;
    let initial = apn_core::minsky::state_marking(&apn_core::minsky::MachineState::initial(m), m)
        .map_err(internal)?;
    let mut markings = BTreeMap::new();
    markings.insert("m0".to_string(), initial);
    let encoded = ModelFile {
        signature: net.structure().signature().clone(),
        nets: BTreeMap::from([(
            machine.to_string(),
            NetModel {
                structure: net.structure().clone(),
                markings,
            },
        )]),
        equations: BTreeMap::from([(eq.name().to_string(), eq.clone())]),
        machines: BTreeMap::new(),
    };
    let text = crate::model::pretty_model(&encoded);
    let lints = m.lints();
    Ok(Outcome {
        report: report(
            "encode-minsky",
            json!({"machine": machine}),
            json!({"model": text, "lints": lints}),
            json!({
                "places": net.structure().places().len(),
                "transitions": net.structure().transitions().len(),
            }),
        ),
        text,
        exit: EXIT_OK,
    })
}
