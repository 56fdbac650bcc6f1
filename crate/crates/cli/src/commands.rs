use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use boston_core::decomposition::{atom_bound, gpbm_lottery, sample_realization, SubagentMatrix};
use boston_core::io::{
    decomposed_to_value, deterministic_rounds_to_value, deterministic_to_value, instance_to_string,
    instance_to_value, lottery_to_value, parse_instance, parse_outcome, random_to_value,
    realization_to_value, rounds_to_value, scalar_string, sp_witness_to_value, to_pretty, Outcome,
};
use boston_core::mechanisms::{
    default_quota, gebm_expected, gebm_lottery, gebm_sample, gpbm, rsdq, rsdq_lottery, rsdq_sample,
};
use boston_core::oracle::{self, remark1_search, OracleLimits, SearchTarget};
use boston_core::properties::{
    check_deterministic, check_lottery_expost, check_sd_ef, check_sd_wef, check_sde_acyclic,
    Property, PropertyReport,
};
use boston_core::rng::impartial_culture;
use boston_core::{Instance, Lottery, Preference, Rational};
use serde_json::{json, Value};

use crate::{
    AuditCommand, AuditedMechanism, CheckArgs, DecomposeArgs, GenArgs, Limits, Mechanism, Mode,
    Output, RunArgs, Target,
};

pub fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing instance {}", path.display()))
}

pub fn emit(output: &Output, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(output: &Output, value: &Value) -> Result<()> {
    emit(output, &to_pretty(value))
}

pub fn gen(args: GenArgs) -> Result<u8> {
    let inst = impartial_culture(args.agents, args.items, args.seed)?;
    emit(&args.output, &instance_to_string(&inst))?;
    Ok(0)
}

fn agent_list(inst: &Instance, names: &[String]) -> Result<Vec<usize>> {
    Ok(names
        .iter()
        .map(|s| inst.agent_index(s.trim()))
        .collect::<boston_core::Result<_>>()?)
}

pub fn run(args: RunArgs) -> Result<u8> {
    let inst = read_instance(&args.instance)?;
    let mode = args.mode.unwrap_or(match args.mechanism {
        Mechanism::Gpbm => Mode::Fractional,
        _ => Mode::Sample,
    });
    if args.mechanism != Mechanism::Rsdq && (args.quota.is_some() || args.order.is_some()) {
        bail!("--quota and --order only apply to rsdq");
    }
    let mut doc = json!({
        "mechanism": format!("{:?}", args.mechanism).to_lowercase(),
        "mode": format!("{mode:?}").to_lowercase(),
    });
    let body = match (args.mechanism, mode) {
        (Mechanism::Gebm, Mode::Sample) => {
            let out = gebm_sample(&inst, args.seed);
            json!({
                "seed": args.seed,
                "assignment": deterministic_to_value(&inst, &out.total),
                "rounds": deterministic_rounds_to_value(&inst, &out.rounds),
            })
        }
        (Mechanism::Gebm, Mode::Expected) => {
            let p = gebm_expected::<Rational>(&inst, args.max_branch)?;
            json!({"assignment": random_to_value(&inst, &p)})
        }
        (Mechanism::Gebm, Mode::Lottery) => {
            let lottery = gebm_lottery::<Rational>(&inst, args.max_branch)?;
            json!({
                "lottery": lottery_to_value(&inst, &lottery),
                "expected": random_to_value(&inst, &lottery.expected()),
            })
        }
        (Mechanism::Gpbm, Mode::Fractional | Mode::Expected) => {
            let out = gpbm::<Rational>(&inst);
            json!({
                "assignment": random_to_value(&inst, &out.total),
                "rounds": rounds_to_value(&inst, &out.rounds),
            })
        }
        (Mechanism::Gpbm, Mode::Lottery) => {
            let g = gpbm_lottery::<Rational>(&inst)?;
            json!({
                "lottery": decomposed_to_value(&inst, &g.decomposed),
                "rounds": rounds_to_value(&inst, &g.outcome.rounds),
            })
        }
        (Mechanism::Gpbm, Mode::Sample) => {
            let g = gpbm_lottery::<Rational>(&inst)?;
            let mut v = realization_to_value(&inst, &sample_realization(&g.decomposed, args.seed));
            v["seed"] = json!(args.seed);
            v
        }
        (Mechanism::Rsdq, mode) => {
            let quota = args.quota.unwrap_or_else(|| default_quota(&inst));
            match (mode, &args.order) {
                (Mode::Sample, Some(order)) => {
                    let a = rsdq(&inst, &agent_list(&inst, order)?, quota)?;
                    json!({"quota": quota, "order": order, "assignment": deterministic_to_value(&inst, &a)})
                }
                (Mode::Sample, None) => {
                    let a = rsdq_sample(&inst, quota, args.seed)?;
                    json!({"quota": quota, "seed": args.seed, "assignment": deterministic_to_value(&inst, &a)})
                }
                (Mode::Lottery, None) => {
                    let lottery = rsdq_lottery::<Rational>(&inst, quota)?;
                    json!({"quota": quota, "lottery": lottery_to_value(&inst, &lottery)})
                }
                (Mode::Expected, None) => {
                    let lottery = rsdq_lottery::<Rational>(&inst, quota)?;
                    json!({"quota": quota, "assignment": random_to_value(&inst, &lottery.expected())})
                }
                (_, Some(_)) => bail!("--order fixes the outcome; use --mode sample"),
                (Mode::Fractional, None) => bail!("rsdq has no fractional mode"),
            }
        }
        (Mechanism::Gebm, Mode::Fractional) => bail!("gebm modes are sample, expected and lottery"),
    };
    for (k, v) in body.as_object().expect("object").clone() {
        doc[k] = v;
    }
    emit_json(&args.output, &doc)?;
    Ok(0)
}

const CHECKABLE: [Property; 11] = [
    Property::Pe,
    Property::SdE,
    Property::Fcm,
    Property::Ef1,
    Property::SdWef,
    Property::SdEf,
    Property::Fhr,
    Property::Feri,
    Property::ExPostPe,
    Property::ExPostFcm,
    Property::ExPostEf1,
];

fn check_one(inst: &Instance, outcome: &Outcome, prop: Property) -> Result<PropertyReport> {
    let mismatch = || anyhow::anyhow!("property `{prop}` does not apply to a {}", outcome.kind());
    Ok(match outcome {
        Outcome::Deterministic(a) => match prop.ex_post_base() {
            Some(_) => {
                check_lottery_expost(inst, &Lottery::<Rational>::certain(a.clone()), &[prop])?
                    .remove(0)
            }
            None => check_deterministic(inst, a, prop)?,
        },
        Outcome::Random(p) => match prop {
            Property::SdE => check_sde_acyclic(inst, p)?,
            Property::SdWef => check_sd_wef(inst, p)?,
            Property::SdEf => check_sd_ef(inst, p)?,
            _ => return Err(mismatch()),
        },
        Outcome::Lottery(l) => match prop.ex_post_base() {
            Some(_) => check_lottery_expost(inst, l, &[prop])?.remove(0),
            None => return Err(mismatch()),
        },
    })
}

pub fn check(args: CheckArgs) -> Result<u8> {
    let inst = read_instance(&args.instance)?;
    let text = fs::read_to_string(&args.assignment)
        .with_context(|| format!("reading {}", args.assignment.display()))?;
    let outcome = parse_outcome(&inst, &text)
        .with_context(|| format!("parsing outcome {}", args.assignment.display()))?;
    let mut reports = Vec::new();
    for name in &args.properties {
        let prop: Property = name.trim().parse()?;
        if !CHECKABLE.contains(&prop) {
            bail!("property `{prop}` cannot be checked from a file");
        }
        reports.push(check_one(&inst, &outcome, prop)?);
    }
    emit_json(&args.output, &serde_json::to_value(&reports)?)?;
    Ok(if args.strict && reports.iter().any(|r| !r.verdict) {
        1
    } else {
        0
    })
}

fn subagent_matrix_value(inst: &Instance, s: &SubagentMatrix<Rational>) -> Value {
    let rows: Vec<Value> = (0..s.subagent_count())
        .map(|row| {
            let (j, c) = s.owner_of(row);
            json!({
                "agent": inst.agent_name(j),
                "round": c + 1,
                "shares": s.row(row)[..s.m()].iter().map(scalar_string).collect::<Vec<_>>(),
                "nil": scalar_string(s.nil(row)),
            })
        })
        .collect();
    json!({"items": inst.items(), "rows": rows})
}

pub fn decompose(args: DecomposeArgs) -> Result<u8> {
    let inst = read_instance(&args.instance)?;
    let g = gpbm_lottery::<Rational>(&inst)?;
    let atoms: Vec<Value> = g
        .decomposed
        .atoms()
        .iter()
        .map(|atom| {
            let matching: Vec<Value> = atom
                .matching
                .iter()
                .enumerate()
                .map(|(row, item)| {
                    let (j, c) = g.matrix.owner_of(row);
                    json!({
                        "agent": inst.agent_name(j),
                        "round": c + 1,
                        "item": item.map(|o| inst.item_name(o)),
                    })
                })
                .collect();
            json!({"coef": scalar_string(&atom.coef), "matching": matching})
        })
        .collect();
    let mut doc = json!({
        "rounds": rounds_to_value(&inst, &g.outcome.rounds),
        "subagent_matrix": subagent_matrix_value(&inst, &g.matrix),
        "atoms": atoms,
        "atom_bound": atom_bound(g.matrix.subagent_count()),
        "lottery": decomposed_to_value(&inst, &g.decomposed),
    });
    if let Some(seed) = args.seed {
        doc["sample"] = realization_to_value(&inst, &sample_realization(&g.decomposed, seed));
        doc["seed"] = json!(seed);
    }
    emit_json(&args.output, &doc)?;
    Ok(0)
}

fn core_mechanism(m: AuditedMechanism) -> oracle::AuditedMechanism {
    match m {
        AuditedMechanism::Gebm => oracle::AuditedMechanism::Gebm,
        AuditedMechanism::Gpbm => oracle::AuditedMechanism::Gpbm,
    }
}

fn oracle_limits(l: &Limits) -> OracleLimits {
    OracleLimits {
        enumeration_cap: l.max_enum,
        branch_cap: l.max_branch,
        max_misreport_items: l.max_misreport_items,
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(current.clone());
        let Some(i) = (1..k).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..k)
            .rev()
            .find(|&j| current[j] > current[i - 1])
            .expect("successor exists");
        current.swap(i - 1, j);
        current[i..].reverse();
    }
}

pub fn audit(cmd: AuditCommand) -> Result<u8> {
    match cmd {
        AuditCommand::Sp {
            instance,
            mechanism,
            agent,
            misreport,
            limits,
            output,
        } => {
            let inst = read_instance(&instance)?;
            let mech = core_mechanism(mechanism);
            let limits = oracle_limits(&limits);
            let witness = match (agent, misreport) {
                (Some(agent), Some(order)) => {
                    let j = inst.agent_index(&agent)?;
                    let lie = Preference::new(inst.item_indices(&order)?, inst.m())?;
                    oracle::check_misreport::<Rational>(mech, &inst, j, &lie, limits.branch_cap)?
                }
                _ => oracle::sd_wsp_audit::<Rational>(mech, &inst, &limits)?,
            };
            let (value, replayed) = match &witness {
                Some(w) => (sp_witness_to_value(w), Some(w.replay(limits.branch_cap)?)),
                None => (Value::Null, None),
            };
            emit_json(
                &output,
                &json!({"mechanism": mech.name(), "witness": value, "replayed": replayed}),
            )?;
            Ok(if replayed == Some(false) { 1 } else { 0 })
        }
        AuditCommand::Neutrality {
            instance,
            mechanism,
            permutation,
            limits,
            output,
        } => {
            let inst = read_instance(&instance)?;
            let mech = core_mechanism(mechanism);
            let perms = match permutation {
                Some(names) => vec![inst.item_indices(&names)?],
                None => {
                    if inst.m() > limits.max_misreport_items {
                        bail!(
                            "{} items exceed the cap of {} for trying every relabeling; pass --permutation",
                            inst.m(),
                            limits.max_misreport_items
                        );
                    }
                    permutations(inst.m())
                }
            };
            let mut failure = None;
            for perm in &perms {
                let rep =
                    oracle::neutrality_audit::<Rational>(mech, &inst, perm, limits.max_branch)?;
                if !rep.verdict {
                    failure = Some(rep);
                    break;
                }
            }
            emit_json(
                &output,
                &json!({
                    "mechanism": mech.name(),
                    "result": if failure.is_none() { "equal" } else { "differs" },
                    "permutations_checked": perms.len(),
                    "failure": failure,
                }),
            )?;
            Ok(0)
        }
        AuditCommand::Remark1 {
            max,
            max_agents,
            max_items,
            target,
            limits,
            output,
        } => {
            let limits = oracle_limits(&limits);
            let target = match target {
                Target::Sde => SearchTarget::SdE,
                Target::Sdef => SearchTarget::SdEf,
                Target::Either => SearchTarget::Either,
            };
            let (n, m) = (max_agents.unwrap_or(max), max_items.unwrap_or(max));
            let found = remark1_search::<Rational>(n, m, target, &limits)?;
            let (value, reproduced) = match &found {
                Some(w) => {
                    let p = gebm_expected::<Rational>(&w.profile, limits.branch_cap)?;
                    let again = match w.report.property {
                        Property::SdE => check_sde_acyclic(&w.profile, &p)?,
                        _ => check_sd_ef(&w.profile, &p)?,
                    };
                    let value = json!({
                        "profile": instance_to_value(&w.profile),
                        "expected": random_to_value(&w.profile, &w.expected),
                        "report": w.report,
                    });
                    (value, Some(p == w.expected && again == w.report))
                }
                None => (Value::Null, None),
            };
            emit_json(
                &output,
                &json!({"max_agents": n, "max_items": m, "witness": value, "reproduced": reproduced}),
            )?;
            Ok(if reproduced == Some(false) { 1 } else { 0 })
        }
    }
}
