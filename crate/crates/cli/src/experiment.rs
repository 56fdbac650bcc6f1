//! Monte Carlo experiments.
//!
//! One CSV row per (mechanism, size) cell, columns in this order:
//!
//! | column | meaning |
//! |---|---|
//! | `mechanism`, `agents`, `items`, `culture`, `trials` | the cell |
//! | `first_choice_fraction` | agents holding their top item / (agents × trials), as `p/q` |
//! | `first_choice_fraction_float` | the same value as a decimal, for plotting only |
//! | `rank_histogram` | `;`-separated counts of allocated items by the holder's rank 1..m |
//! | `violations_<property>` | trials whose outcome failed the property, one column per configured property |
//! | `mean_ms`, `max_ms` | wall-clock time per trial (the only non-reproducible columns) |
//!
//! Ex-post properties (`pe`, `fcm`, `ef1`, `fhr`) are checked on the realized
//! assignment; ex-ante ones (`sde`, `sdwef`, `sdef`) on the exact expected
//! assignment of the mechanism for the trial's instance.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use boston_core::decomposition::{gpbm_lottery, sample_realization};
use boston_core::mechanisms::{
    default_quota, gebm_expected, gebm_sample, gpbm, rsdq_lottery, rsdq_sample, DEFAULT_BRANCH_CAP,
};
use boston_core::properties::{
    check_deterministic, check_sd_ef, check_sd_wef, check_sde_acyclic, Property,
};
use boston_core::rng::{derive_seed, impartial_culture};
use boston_core::{DeterministicAssignment, Instance, RandomAssignment, Rational};
use rayon::prelude::*;
use serde::Deserialize;

use crate::ExperimentArgs;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mechanisms: Vec<String>,
    pub sizes: Vec<Size>,
    #[serde(default = "impartial")]
    pub culture: String,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub properties: Vec<String>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Size {
    pub agents: usize,
    pub items: usize,
}

fn impartial() -> String {
    "impartial".into()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mech {
    Gebm,
    Gpbm,
    Rsdq,
}

impl Mech {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "gebm" => Mech::Gebm,
            "gpbm" => Mech::Gpbm,
            "rsdq" => Mech::Rsdq,
            other => bail!("unknown mechanism `{other}`"),
        })
    }

    fn name(self) -> &'static str {
        match self {
            Mech::Gebm => "gebm",
            Mech::Gpbm => "gpbm",
            Mech::Rsdq => "rsdq",
        }
    }
}

const EX_POST: [Property; 4] = [Property::Pe, Property::Fcm, Property::Ef1, Property::Fhr];
const EX_ANTE: [Property; 3] = [Property::SdE, Property::SdWef, Property::SdEf];
const MAX_RSDQ_LOTTERY_AGENTS: usize = 9;

struct Plan {
    mechanisms: Vec<Mech>,
    sizes: Vec<Size>,
    culture: String,
    trials: u64,
    seed: u64,
    properties: Vec<Property>,
    branch_cap: u64,
}

fn validate(cfg: ExperimentConfig, seed: Option<u64>, branch_cap: u64) -> Result<Plan> {
    if cfg.trials == 0 {
        bail!("trials must be at least 1");
    }
    if cfg.culture != "impartial" {
        bail!(
            "unknown culture `{}`; only `impartial` is built in",
            cfg.culture
        );
    }
    if cfg.mechanisms.is_empty() || cfg.sizes.is_empty() {
        bail!("need at least one mechanism and one size");
    }
    let mechanisms = cfg
        .mechanisms
        .iter()
        .map(|m| Mech::parse(m))
        .collect::<Result<Vec<_>>>()?;
    let properties = cfg
        .properties
        .iter()
        .map(|p| {
            let p: Property = p.parse()?;
            if !EX_POST.contains(&p) && !EX_ANTE.contains(&p) {
                bail!("property `{p}` is not available in experiments");
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    for s in &cfg.sizes {
        if s.agents == 0 || s.items == 0 {
            bail!("sizes need at least one agent and one item");
        }
        let ex_ante = properties.iter().any(|p| EX_ANTE.contains(p));
        if ex_ante && mechanisms.contains(&Mech::Rsdq) && s.agents > MAX_RSDQ_LOTTERY_AGENTS {
            bail!(
                "ex-ante properties for rsdq enumerate n! orders; {} agents is too many",
                s.agents
            );
        }
    }
    Ok(Plan {
        mechanisms,
        sizes: cfg.sizes,
        culture: cfg.culture,
        trials: cfg.trials,
        seed: seed.unwrap_or(cfg.seed),
        properties,
        branch_cap,
    })
}

#[derive(Clone, Debug, Default)]
struct Tally {
    first_choice: u64,
    ranks: Vec<u64>,
    violations: Vec<u64>,
    total_ns: u128,
    max_ns: u128,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.first_choice += other.first_choice;
        for (a, b) in self.ranks.iter_mut().zip(&other.ranks) {
            *a += b;
        }
        for (a, b) in self.violations.iter_mut().zip(&other.violations) {
            *a += b;
        }
        self.total_ns += other.total_ns;
        self.max_ns = self.max_ns.max(other.max_ns);
        self
    }
}

fn realize(mech: Mech, inst: &Instance, seed: u64) -> Result<DeterministicAssignment> {
    Ok(match mech {
        Mech::Gebm => gebm_sample(inst, seed).total,
        Mech::Gpbm => {
            sample_realization(&gpbm_lottery::<Rational>(inst)?.decomposed, seed).assignment
        }
        Mech::Rsdq => rsdq_sample(inst, default_quota(inst), seed)?,
    })
}

fn expected(mech: Mech, inst: &Instance, branch_cap: u64) -> Result<RandomAssignment<Rational>> {
    Ok(match mech {
        Mech::Gebm => gebm_expected(inst, branch_cap)?,
        Mech::Gpbm => gpbm(inst).total,
        Mech::Rsdq => rsdq_lottery::<Rational>(inst, default_quota(inst))?.expected(),
    })
}

fn trial(plan: &Plan, mech: Mech, size_index: usize, t: u64) -> Result<Tally> {
    let Size { agents, items } = plan.sizes[size_index];
    let instance_seed = derive_seed(derive_seed(plan.seed, size_index as u64), t);
    let inst = impartial_culture(agents, items, instance_seed)?;
    let start = Instant::now();
    let a = realize(mech, &inst, derive_seed(instance_seed, 1))?;
    let ns = start.elapsed().as_nanos();

    let mut ranks = vec![0u64; items];
    let mut first_choice = 0;
    for j in 0..agents {
        for o in a.bundle(j) {
            ranks[inst.pref(j).rank(o) - 1] += 1;
        }
        first_choice += u64::from(a.holds(j, inst.pref(j).top()));
    }
    let p = if plan.properties.iter().any(|p| EX_ANTE.contains(p)) {
        Some(expected(mech, &inst, plan.branch_cap)?)
    } else {
        None
    };
    let violations = plan
        .properties
        .iter()
        .map(|&prop| {
            let rep = match (prop, &p) {
                (Property::SdE, Some(p)) => check_sde_acyclic(&inst, p)?,
                (Property::SdWef, Some(p)) => check_sd_wef(&inst, p)?,
                (Property::SdEf, Some(p)) => check_sd_ef(&inst, p)?,
                _ => check_deterministic(&inst, &a, prop)?,
            };
            Ok(u64::from(!rep.verdict))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Tally {
        first_choice,
        ranks,
        violations,
        total_ns: ns,
        max_ns: ns,
    })
}

fn run_plan(plan: &Plan) -> Result<String> {
    let mut out = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "mechanism",
        "agents",
        "items",
        "culture",
        "trials",
        "first_choice_fraction",
        "first_choice_fraction_float",
        "rank_histogram",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(plan.properties.iter().map(|p| format!("violations_{p}")));
    header.extend(["mean_ms".to_string(), "max_ms".to_string()]);
    out.write_record(&header)?;

    for &mech in &plan.mechanisms {
        for (size_index, size) in plan.sizes.iter().enumerate() {
            let tallies = (0..plan.trials)
                .into_par_iter()
                .map(|t| trial(plan, mech, size_index, t))
                .collect::<Result<Vec<_>>>()?;
            let empty = Tally {
                ranks: vec![0; size.items],
                violations: vec![0; plan.properties.len()],
                ..Tally::default()
            };
            let total = tallies.into_iter().fold(empty, Tally::merge);
            let fraction = Rational::new(
                (total.first_choice as i64).into(),
                ((size.agents as u64 * plan.trials) as i64).into(),
            );
            let mut record = vec![
                mech.name().to_string(),
                size.agents.to_string(),
                size.items.to_string(),
                plan.culture.clone(),
                plan.trials.to_string(),
                fraction.to_string(),
                format!(
                    "{:.6}",
                    total.first_choice as f64 / (size.agents as u64 * plan.trials) as f64
                ),
                total
                    .ranks
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
            ];
            record.extend(total.violations.iter().map(|v| v.to_string()));
            record.push(format!(
                "{:.3}",
                total.total_ns as f64 / plan.trials as f64 / 1e6
            ));
            record.push(format!("{:.3}", total.max_ns as f64 / 1e6));
            out.write_record(&record)?;
        }
    }
    Ok(String::from_utf8(out.into_inner()?)?)
}

pub fn run(args: ExperimentArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing experiment config {}", args.config.display()))?;
    let out_path = args.output.out.clone().or_else(|| cfg.out.clone());
    let plan = validate(
        cfg,
        args.seed,
        args.max_branch.unwrap_or(DEFAULT_BRANCH_CAP),
    )?;
    let csv = run_plan(&plan)?;
    crate::commands::emit(&crate::Output { out: out_path }, &csv)?;
    Ok(0)
}
