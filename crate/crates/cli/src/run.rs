//! Task execution and report assembly. Reruns with the same config and
//! seed reproduce every numeric artifact byte-for-byte; wall-clock
//! timings live only in the run report.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use riqmc::completeness::{self, AcVerdict};
use riqmc::gns::build_extended;
use riqmc::micromaser::MicromaserJson;
use riqmc::preparation::{self, ConvergenceTrace};
use riqmc::stationary;
use riqmc::transition::CouplingModel;
use riqmc::Error as CoreError;

use crate::config::{ModelSpec, Scenario, SweepParameter, SynthKind, Task};

#[derive(Serialize)]
pub struct TaskReport {
    pub index: usize,
    pub name: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    pub files: Vec<String>,
    pub wall_ms: u128,
}

#[derive(Serialize)]
pub struct RunReport {
    pub library_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub tasks: Vec<TaskReport>,
}

pub struct RunOutcome {
    pub report: RunReport,
    pub guard_violation: bool,
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

struct TaskOutput {
    verdict: Option<String>,
    files: Vec<String>,
}

fn trace_csv(path: &Path, trace: &ConvergenceTrace) -> anyhow::Result<()> {
    write_csv(path, &ConvergenceTrace::csv_header(), &trace.csv_rows())
}

fn run_task(
    model: &CouplingModel,
    spec: &ModelSpec,
    task: &Task,
    seed: u64,
    out_dir: &Path,
    stem: &str,
) -> anyhow::Result<TaskOutput> {
    match task {
        Task::Stationary => {
            let ch = model.transition_channel()?;
            let report = stationary::stationary_states(&ch)?;
            let cert = stationary::irreducibility_from_report(&report)?;
            let path = out_dir.join(format!("{stem}.json"));
            write_json(&path, &json!({ "stationary": report, "irreducibility": cert }))?;
            Ok(TaskOutput {
                verdict: Some(format!(
                    "fixed_space_dim={} irreducible={}",
                    report.fixed_space_dim, cert.irreducible
                )),
                files: vec![path.display().to_string()],
            })
        }
        Task::CertifyAc { profile_n } => {
            let et = build_extended(model)?;
            let result = completeness::certify_extended(&et)?;
            let mut files = Vec::new();
            let path = out_dir.join(format!("{stem}.json"));
            write_json(&path, &result.certificate)?;
            files.push(path.display().to_string());
            if *profile_n > 0 {
                let ops = completeness::test_operator_set(model.system_dim(), seed);
                let profile = completeness::ac_profile(&et, *profile_n, &ops)?;
                let jpath = out_dir.join(format!("{stem}-profile.json"));
                write_json(&jpath, &profile)?;
                let cpath = out_dir.join(format!("{stem}-profile.csv"));
                write_csv(
                    &cpath,
                    &["n", "max_defect", "min_eig_sum", "one_deviation"]
                        .map(String::from),
                    &profile.csv_rows(),
                )?;
                files.push(jpath.display().to_string());
                files.push(cpath.display().to_string());
            }
            Ok(TaskOutput {
                verdict: Some(
                    match result.certificate.verdict {
                        AcVerdict::CertifiedComplete => "certified_complete",
                        AcVerdict::CertifiedIncomplete => "certified_incomplete",
                        AcVerdict::Undecided => "undecided",
                    }
                    .to_string(),
                ),
                files,
            })
        }
        Task::D1 { n_max } => {
            let report = completeness::d1_check(model, *n_max)?;
            let path = out_dir.join(format!("{stem}.json"));
            write_json(&path, &report)?;
            Ok(TaskOutput {
                verdict: Some(format!(
                    "irreducible={} injective={}",
                    report.irreducible, report.injective
                )),
                files: vec![path.display().to_string()],
            })
        }
        Task::Observability { n_max } => {
            let report = completeness::observability_check(model, *n_max)?;
            let jpath = out_dir.join(format!("{stem}.json"));
            write_json(&jpath, &report)?;
            let cpath = out_dir.join(format!("{stem}.csv"));
            write_csv(&cpath, &["n", "rank"].map(String::from), &report.csv_rows())?;
            Ok(TaskOutput {
                verdict: Some(format!(
                    "ranks={:?} full_rank_at={:?}",
                    report.ranks, report.full_rank_at
                )),
                files: vec![jpath.display().to_string(), cpath.display().to_string()],
            })
        }
        Task::Synth {
            target,
            method,
            n_max,
        } => {
            let target_state = target.build(model.system_dim())?;
            let seq = match method {
                SynthKind::Forward => {
                    // forward synthesis needs a vector state; extract it
                    let (vals, vecs) = riqmc::linalg::eigh(target_state.matrix())?;
                    let top = vals.len() - 1;
                    if vals[top] < 1.0 - 1e-8 {
                        return Err(CoreError::NotAVectorState {
                            defect: 1.0 - vals[top],
                        }
                        .into());
                    }
                    let xi = vecs.column(top).to_owned();
                    preparation::synth_forward(model, &xi.view(), *n_max, seed)?
                }
                SynthKind::Mixed => preparation::synth_mixed(model, &target_state, *n_max, seed)?,
            };
            let jpath = out_dir.join(format!("{stem}.json"));
            write_json(&jpath, &seq.to_json())?;
            let cpath = out_dir.join(format!("{stem}-trace.csv"));
            trace_csv(&cpath, &seq.trace)?;
            let last = seq
                .trace
                .rows
                .iter()
                .map(|r| r.fidelity)
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(TaskOutput {
                verdict: Some(format!("best_fidelity={last:.6}")),
                files: vec![jpath.display().to_string(), cpath.display().to_string()],
            })
        }
        Task::Protocol { input, n_max } => {
            let input_state = input.build(model.ancilla_dim())?;
            let seq = preparation::constant_protocol(model, &input_state, *n_max, seed)?;
            let jpath = out_dir.join(format!("{stem}.json"));
            write_json(&jpath, &seq.to_json())?;
            let cpath = out_dir.join(format!("{stem}-trace.csv"));
            trace_csv(&cpath, &seq.trace)?;
            let worst = seq
                .trace
                .rows_at(*n_max)
                .map(|r| r.fidelity)
                .fold(f64::INFINITY, f64::min);
            Ok(TaskOutput {
                verdict: Some(format!("final_min_fidelity={worst:.9}")),
                files: vec![jpath.display().to_string(), cpath.display().to_string()],
            })
        }
        Task::Sweep {
            parameter,
            values,
            task,
        } => {
            let base = match spec {
                ModelSpec::Micromaser(j) => j.clone(),
                _ => {
                    return Err(anyhow::anyhow!(
                        "sweep requires a micromaser preset model"
                    ))
                }
            };
            let preset = |v: f64| -> anyhow::Result<MicromaserJson> {
                match (&base, parameter) {
                    (
                        MicromaserJson::Preset {
                            n_levels,
                            lambda,
                            omega0_t,
                        },
                        SweepParameter::Omega0T,
                    ) => Ok(MicromaserJson::Preset {
                        n_levels: *n_levels,
                        lambda: *lambda,
                        omega0_t: {
                            let _ = omega0_t;
                            v
                        },
                    }),
                    (
                        MicromaserJson::Preset {
                            n_levels, omega0_t, ..
                        },
                        SweepParameter::Lambda,
                    ) => Ok(MicromaserJson::Preset {
                        n_levels: *n_levels,
                        lambda: v,
                        omega0_t: *omega0_t,
                    }),
                    _ => Err(anyhow::anyhow!("sweep requires the JC preset form")),
                }
            };
            let results: Vec<anyhow::Result<(String, TaskOutput)>> = {
                use rayon::prelude::*;
                values
                    .par_iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        let j = preset(v)?;
                        let sub_spec = ModelSpec::Micromaser(j);
                        let sub_model = sub_spec.build()?.with_chain_cap(model.chain_cap());
                        let sub_stem = format!("{stem}-{i}");
                        let out = run_task(&sub_model, &sub_spec, task, seed, out_dir, &sub_stem)?;
                        Ok((format!("{v}"), out))
                    })
                    .collect()
            };
            let mut files = Vec::new();
            let mut rows = Vec::new();
            for (i, r) in results.into_iter().enumerate() {
                let (v, out) = r?;
                rows.push(vec![
                    format!("{i}"),
                    v,
                    out.verdict.clone().unwrap_or_default(),
                ]);
                files.extend(out.files);
            }
            let cpath = out_dir.join(format!("{stem}-summary.csv"));
            write_csv(
                &cpath,
                &["index", "value", "verdict"].map(String::from),
                &rows,
            )?;
            files.push(cpath.display().to_string());
            Ok(TaskOutput {
                verdict: Some(format!("{} grid points", values.len())),
                files,
            })
        }
    }
}

pub fn execute(
    scenario: &Scenario,
    config_bytes: &[u8],
    out_dir: &PathBuf,
    threads: usize,
) -> anyhow::Result<RunOutcome> {
    fs::create_dir_all(out_dir)?;
    let model = {
        let mut m = scenario.model.build()?;
        if let Some(cap) = scenario.caps.max_chain_dim {
            m = m.with_chain_cap(cap);
        }
        m
    };
    let hash = {
        let mut h = Sha256::new();
        h.update(config_bytes);
        format!("{:x}", h.finalize())
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()?;
    let tasks: Vec<(usize, &Task)> = scenario.tasks.iter().enumerate().collect();
    let reports: Vec<TaskReport> = pool.install(|| {
        use rayon::prelude::*;
        tasks
            .par_iter()
            .map(|(i, task)| {
                let start = Instant::now();
                let stem = format!("task-{i:02}-{}", task.name());
                let result = run_task(&model, &scenario.model, task, scenario.seed, out_dir, &stem);
                let wall_ms = start.elapsed().as_millis();
                match result {
                    Ok(out) => TaskReport {
                        index: *i,
                        name: task.name(),
                        status: "ok".into(),
                        error: None,
                        verdict: out.verdict,
                        files: out.files,
                        wall_ms,
                    },
                    Err(e) => TaskReport {
                        index: *i,
                        name: task.name(),
                        status: "failed".into(),
                        error: Some(format!("{e:#}")),
                        verdict: None,
                        files: vec![],
                        wall_ms,
                    },
                }
            })
            .collect()
    });

    let guard_violation = reports.iter().any(|r| r.status == "failed");
    let report = RunReport {
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: hash,
        seed: scenario.seed,
        tasks: reports,
    };
    write_json(&out_dir.join("run-report.json"), &report)?;
    Ok(RunOutcome {
        report,
        guard_violation,
    })
}

/// Schema walk plus model sanity; no computation.
pub fn validate(scenario: &Scenario) -> Vec<String> {
    let mut diags = Vec::new();
    match scenario.model.build() {
        Ok(model) => {
            let m = if let Some(cap) = scenario.caps.max_chain_dim {
                model.with_chain_cap(cap)
            } else {
                model
            };
            diags.push(format!(
                "ok: model system_dim={} ancilla_dim={} chain_cap={}",
                m.system_dim(),
                m.ancilla_dim(),
                m.chain_cap()
            ));
            match m.product_stationarity_defect() {
                Ok(d) => diags.push(format!("product stationarity defect: {d:.3e}")),
                Err(e) => diags.push(format!("warning: {e}")),
            }
            for (i, task) in scenario.tasks.iter().enumerate() {
                if let Some(n) = task.dense_chain_need() {
                    match m.guard_joint_dim(n) {
                        Ok(dim) => diags.push(format!(
                            "task {i} ({}): dense chain dimension {dim} within cap",
                            task.name()
                        )),
                        Err(e) => diags.push(format!(
                            "warning: task {i} ({}) infeasible: {e}",
                            task.name()
                        )),
                    }
                }
            }
        }
        Err(e) => diags.push(format!("invalid model: {e}")),
    }
    diags
}
