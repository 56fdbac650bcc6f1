//! JSON text formats.
//!
//! Instances are `{"items": [..], "agents": [{"name": .., "prefs": [..]}]}`.
//! Numbers are written as strings (`"p/q"`, `"0"`, `"1"` for rationals) so
//! exact values survive the round trip. Outcomes:
//!
//! * deterministic assignment: `{"<agent>": ["<item>", ..], ..}`
//! * random assignment: `{"agents": [..], "items": [..], "matrix": [["1/2", ..], ..]}`
//! * lottery: `[{"prob": "1/4", "assignment": <deterministic>}, ..]`
//! * rounds: `[{"round": 1, "assignment": <either kind>}, ..]`
//! * decomposed lottery: lottery entries that also carry `"rounds"`.
//!
//! Mechanism output documents wrap one of these under `"assignment"` or
//! `"lottery"`; [`parse_outcome`] accepts both the bare and wrapped forms.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::decomposition::{DecomposedLottery, Realization};
use crate::error::{input, Error, Result};
use crate::model::{
    DeterministicAssignment, Instance, Lottery, RandomAssignment, RoundDecomposition,
};
use crate::oracle::SpWitness;
use crate::scalar::Scalar;
use crate::Rational;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    items: Vec<String>,
    agents: Vec<AgentDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentDoc {
    name: String,
    prefs: Vec<String>,
}

pub fn instance_from_value(value: &Value) -> Result<Instance> {
    let doc: InstanceDoc = serde_json::from_value(value.clone())?;
    let agents: Vec<(String, Vec<String>)> =
        doc.agents.into_iter().map(|a| (a.name, a.prefs)).collect();
    Instance::new(&doc.items, &agents)
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    instance_from_value(&serde_json::from_str(text)?)
}

pub fn instance_to_value(inst: &Instance) -> Value {
    let doc = InstanceDoc {
        items: inst.items().to_vec(),
        agents: inst
            .agents()
            .iter()
            .map(|a| AgentDoc {
                name: a.name.clone(),
                prefs: a
                    .prefs
                    .order()
                    .iter()
                    .map(|&o| inst.item_name(o).to_string())
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_value(doc).expect("instance document serializes")
}

pub fn instance_to_string(inst: &Instance) -> String {
    to_pretty(&instance_to_value(inst))
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn scalar_string<S: Scalar>(x: &S) -> String {
    x.to_string()
}

/// Parses `"p/q"` or an integer string into a reduced rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: num_bigint::BigInt = p.trim().parse().map_err(|_| bad_rational(text))?;
        let q: num_bigint::BigInt = q.trim().parse().map_err(|_| bad_rational(text))?;
        if q == num_bigint::BigInt::from(0) {
            return Err(bad_rational(text));
        }
        Ok(Rational::new(p, q))
    } else {
        let p: num_bigint::BigInt = t.parse().map_err(|_| bad_rational(text))?;
        Ok(Rational::from_integer(p))
    }
}

fn bad_rational(text: &str) -> Error {
    Error::Input(format!("`{text}` is not a rational of the form p/q"))
}

fn rational_value(value: &Value) -> Result<Rational> {
    match value {
        Value::String(s) => parse_rational(s),
        Value::Number(n) if n.is_u64() || n.is_i64() => parse_rational(&n.to_string()),
        other => input(format!("expected a rational string, found {other}")),
    }
}

pub fn deterministic_to_value(inst: &Instance, a: &DeterministicAssignment) -> Value {
    let mut map = Map::new();
    for j in 0..a.n() {
        let items: Vec<Value> = a
            .bundle(j)
            .into_iter()
            .map(|o| Value::from(inst.item_name(o)))
            .collect();
        map.insert(inst.agent_name(j).to_string(), Value::Array(items));
    }
    Value::Object(map)
}

/// Agents missing from the object hold nothing; items nobody lists stay
/// unallocated.
pub fn deterministic_from_value(inst: &Instance, value: &Value) -> Result<DeterministicAssignment> {
    let Value::Object(map) = value else {
        return input("deterministic assignment must be an object of agent -> items");
    };
    let mut a = DeterministicAssignment::empty(inst.n(), inst.m());
    for (agent, items) in map {
        let j = inst.agent_index(agent)?;
        let Value::Array(items) = items else {
            return input(format!("bundle of agent `{agent}` must be an array"));
        };
        for item in items {
            let Some(name) = item.as_str() else {
                return input(format!("bundle of agent `{agent}` must list item names"));
            };
            let o = inst.item_index(name)?;
            if a.owner(o).is_some() {
                return input(format!("item `{name}` is assigned twice"));
            }
            a.assign(o, j);
        }
    }
    Ok(a)
}

pub fn random_to_value<S: Scalar>(inst: &Instance, p: &RandomAssignment<S>) -> Value {
    let matrix: Vec<Value> = p
        .rows()
        .map(|row| Value::Array(row.iter().map(|x| Value::from(scalar_string(x))).collect()))
        .collect();
    json!({
        "agents": inst.agents().iter().map(|a| a.name.clone()).collect::<Vec<_>>(),
        "items": inst.items(),
        "matrix": matrix,
    })
}

/// Rows and columns are matched to the instance by name, so a matrix with
/// permuted labels is read correctly.
pub fn random_from_value(inst: &Instance, value: &Value) -> Result<RandomAssignment<Rational>> {
    let Some(matrix) = value.get("matrix").and_then(Value::as_array) else {
        return input("random assignment needs a \"matrix\" array");
    };
    let labels = |key: &str, default: Vec<String>| -> Result<Vec<String>> {
        match value.get(key) {
            None => Ok(default),
            Some(v) => Ok(serde_json::from_value(v.clone())?),
        }
    };
    let agents = labels(
        "agents",
        inst.agents().iter().map(|a| a.name.clone()).collect(),
    )?;
    let items = labels("items", inst.items().to_vec())?;
    if agents.len() != inst.n() || matrix.len() != inst.n() {
        return Err(Error::Dimension {
            expected: inst.n(),
            got: matrix.len().min(agents.len()),
        });
    }
    if items.len() != inst.m() {
        return Err(Error::Dimension {
            expected: inst.m(),
            got: items.len(),
        });
    }
    let cols = items
        .iter()
        .map(|s| inst.item_index(s))
        .collect::<Result<Vec<_>>>()?;
    crate::model::check_permutation(&cols, inst.m())?;
    let mut rows = vec![vec![Rational::from_integer(0.into()); inst.m()]; inst.n()];
    let mut seen = vec![false; inst.n()];
    for (name, row) in agents.iter().zip(matrix) {
        let j = inst.agent_index(name)?;
        if std::mem::replace(&mut seen[j], true) {
            return input(format!("agent `{name}` has two rows"));
        }
        let Some(row) = row.as_array() else {
            return input("matrix rows must be arrays");
        };
        if row.len() != inst.m() {
            return Err(Error::Dimension {
                expected: inst.m(),
                got: row.len(),
            });
        }
        for (&o, x) in cols.iter().zip(row) {
            rows[j][o] = rational_value(x)?;
        }
    }
    RandomAssignment::from_rows(rows)
}

pub fn lottery_to_value<S: Scalar>(inst: &Instance, lottery: &Lottery<S>) -> Value {
    Value::Array(
        lottery
            .atoms()
            .iter()
            .map(|atom| {
                json!({
                    "prob": scalar_string(&atom.prob),
                    "assignment": deterministic_to_value(inst, &atom.assignment),
                })
            })
            .collect(),
    )
}

pub fn lottery_from_value(inst: &Instance, value: &Value) -> Result<Lottery<Rational>> {
    let Some(entries) = value.as_array() else {
        return input("lottery must be an array of {prob, assignment}");
    };
    let atoms = entries
        .iter()
        .map(|e| {
            let prob = e
                .get("prob")
                .ok_or_else(|| Error::Input("lottery entry without prob".into()))?;
            let a = e
                .get("assignment")
                .ok_or_else(|| Error::Input("lottery entry without assignment".into()))?;
            Ok((rational_value(prob)?, deterministic_from_value(inst, a)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Lottery::new(atoms)
}

pub fn deterministic_rounds_to_value(inst: &Instance, rounds: &[DeterministicAssignment]) -> Value {
    Value::Array(
        rounds
            .iter()
            .enumerate()
            .map(|(c, a)| json!({"round": c + 1, "assignment": deterministic_to_value(inst, a)}))
            .collect(),
    )
}

pub fn rounds_to_value<S: Scalar>(inst: &Instance, rounds: &RoundDecomposition<S>) -> Value {
    Value::Array(
        rounds
            .rounds()
            .iter()
            .enumerate()
            .map(|(c, p)| json!({"round": c + 1, "assignment": random_to_value(inst, p)}))
            .collect(),
    )
}

pub fn rounds_from_value(inst: &Instance, value: &Value) -> Result<RoundDecomposition<Rational>> {
    let Some(entries) = value.as_array() else {
        return input("rounds must be an array of {round, assignment}");
    };
    let mut rounds = Vec::with_capacity(entries.len());
    for (c, e) in entries.iter().enumerate() {
        if e.get("round").and_then(Value::as_u64) != Some(c as u64 + 1) {
            return input(format!(
                "round entries must be numbered 1.. in order (entry {})",
                c + 1
            ));
        }
        let p = e
            .get("assignment")
            .ok_or_else(|| Error::Input("round without assignment".into()))?;
        rounds.push(random_from_value(inst, p)?);
    }
    RoundDecomposition::new(rounds)
}

pub fn realization_to_value(inst: &Instance, r: &Realization) -> Value {
    json!({
        "assignment": deterministic_to_value(inst, &r.assignment),
        "rounds": deterministic_rounds_to_value(inst, &r.rounds),
    })
}

/// One entry per distinct realized assignment, with its per-round matchings.
pub fn decomposed_to_value<S: Scalar>(inst: &Instance, dec: &DecomposedLottery<S>) -> Value {
    let mut entries: Vec<(S, Realization)> = Vec::new();
    for (coef, r) in dec.realizations() {
        match entries
            .iter_mut()
            .find(|(_, e)| e.assignment == r.assignment && e.rounds == r.rounds)
        {
            Some((p, _)) => *p += coef,
            None => entries.push((coef, r)),
        }
    }
    Value::Array(
        entries
            .into_iter()
            .map(|(p, r)| {
                json!({
                    "prob": scalar_string(&p),
                    "assignment": deterministic_to_value(inst, &r.assignment),
                    "rounds": deterministic_rounds_to_value(inst, &r.rounds),
                })
            })
            .collect(),
    )
}

fn row_to_value<S: Scalar>(inst: &Instance, row: &[S]) -> Value {
    let mut map = Map::new();
    for (o, x) in row.iter().enumerate() {
        map.insert(inst.item_name(o).to_string(), Value::from(scalar_string(x)));
    }
    Value::Object(map)
}

fn items_value(inst: &Instance, items: &[usize]) -> Value {
    Value::Array(
        items
            .iter()
            .map(|&o| Value::from(inst.item_name(o)))
            .collect(),
    )
}

pub fn sp_witness_to_value<S: Scalar>(w: &SpWitness<S>) -> Value {
    let inst = &w.profile;
    let order = inst.pref(w.agent).order();
    let in_order = |xs: &[S]| -> Value {
        Value::Array(xs.iter().map(|x| Value::from(scalar_string(x))).collect())
    };
    json!({
        "mechanism": w.mechanism.name(),
        "agent": inst.agent_name(w.agent),
        "true_order": items_value(inst, order),
        "misreport": items_value(inst, w.misreport.order()),
        "truthful_profile": instance_to_value(inst),
        "manipulated_profile": instance_to_value(&w.manipulated_profile()),
        "truthful_row": row_to_value(inst, &w.truthful),
        "manipulated_row": row_to_value(inst, &w.manipulated),
        "dominance": {
            "order": items_value(inst, order),
            "truthful_cumulative": in_order(&w.truthful_cumulative),
            "manipulated_cumulative": in_order(&w.manipulated_cumulative),
        },
    })
}

/// Any outcome file the checker understands.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Deterministic(DeterministicAssignment),
    Random(RandomAssignment<Rational>),
    Lottery(Lottery<Rational>),
}

impl Outcome {
    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::Deterministic(_) => "deterministic assignment",
            Outcome::Random(_) => "random assignment",
            Outcome::Lottery(_) => "lottery",
        }
    }
}

pub fn outcome_from_value(inst: &Instance, value: &Value) -> Result<Outcome> {
    match value {
        Value::Array(_) => Ok(Outcome::Lottery(lottery_from_value(inst, value)?)),
        Value::Object(map) if map.contains_key("matrix") => {
            Ok(Outcome::Random(random_from_value(inst, value)?))
        }
        Value::Object(map) if map.contains_key("lottery") => {
            outcome_from_value(inst, &map["lottery"])
        }
        Value::Object(map) if map.contains_key("assignment") => {
            outcome_from_value(inst, &map["assignment"])
        }
        Value::Object(_) => Ok(Outcome::Deterministic(deterministic_from_value(
            inst, value,
        )?)),
        _ => input("unrecognized outcome document"),
    }
}

pub fn parse_outcome(inst: &Instance, text: &str) -> Result<Outcome> {
    outcome_from_value(inst, &serde_json::from_str(text)?)
}
