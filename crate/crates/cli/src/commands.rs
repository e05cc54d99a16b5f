//! Subcommand bodies. Each builds tables and hands them to [`emit`].

use std::io::Write;
use std::path::Path;

use platoon_core::allocation::{
    baseline_allocate, solve_type_least_core, stability_index, stability_report, LeastCoreSolution, Scheme,
};
use platoon_core::formation::{build_optimal_structure, optimal_counts, FormationCounts};
use platoon_core::model::structure_value;
use platoon_core::oracle::verify::{cross_check, VerifyOptions};
use platoon_core::oracle::benefit_distribution;
use platoon_core::{CoalitionSignature, Error, FleetSpec, Money, PayoffVector};
use rayon::prelude::*;
use serde::Deserialize;

use crate::config::{NumText, RunConfig};
use crate::output::{emit, Cell, Table};
use crate::CliError;

/// Evaluates `f` for every configured size limit in parallel, keeping the
/// configured order.
fn per_m<T, F>(cfg: &RunConfig, f: F) -> Result<Vec<(usize, T)>, CliError>
where
    T: Send,
    F: Fn(&FleetSpec) -> Result<T, CliError> + Sync,
{
    cfg.m_values
        .par_iter()
        .map(|&m| {
            let fleet = cfg.fleet(m)?;
            f(&fleet).map(|t| (m, t))
        })
        .collect()
}

/// `Some(reason)` when the size limit admits no structure.
fn infeasible_reason(fleet: &FleetSpec) -> Option<String> {
    let r = fleet.feasibility();
    (!r.feasible).then(|| r.reason.unwrap_or_else(|| "infeasible".into()))
}

/// For commands that need an optimal structure: an infeasible size limit is
/// skipped under `--allow-infeasible-skip` and fatal otherwise.
fn require_feasible(cfg: &RunConfig, fleet: &FleetSpec) -> Result<bool, CliError> {
    let report = fleet.feasibility();
    if report.feasible {
        Ok(true)
    } else if cfg.allow_infeasible_skip {
        Ok(false)
    } else {
        Err(Error::Infeasible(report).into())
    }
}

fn signatures(sigs: &[CoalitionSignature]) -> String {
    sigs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

pub fn form(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = per_m(cfg, |fleet| {
        if !require_feasible(cfg, fleet)? {
            return Ok(None);
        }
        let counts = optimal_counts(fleet)?;
        let structure = build_optimal_structure(fleet)?;
        debug_assert_eq!(structure_value(&structure)?, counts.v_star);
        let leaders: Vec<String> = structure.platoons().iter().map(|p| p.leader.to_string()).collect();
        Ok(Some((counts, structure.to_string(), leaders.join(" "))))
    })?;
    let mut t = Table::new(
        "form",
        &["M", "p_star", "l_e_star", "l_f_star", "f_e", "f_f", "v_star", "structure", "leaders"],
    );
    for (m, row) in rows {
        let Some((c, structure, leaders)) = row else { continue };
        let FormationCounts {
            p_star,
            l_e_star,
            l_f_star,
            f_e,
            f_f,
            v_star,
        } = c;
        t.push(vec![
            m.into(),
            p_star.into(),
            l_e_star.into(),
            l_f_star.into(),
            f_e.into(),
            f_f.into(),
            v_star.into(),
            structure.into(),
            leaders.into(),
        ]);
    }
    emit(&[t], cfg, out)
}

fn parse_v_total(text: Option<&str>) -> Result<Option<Money>, CliError> {
    text.map(|s| platoon_core::money::parse_money(s).map_err(|e| CliError::Config(format!("--v-total: {e}"))))
        .transpose()
}

/// The explicit total, or the optimal structure's value. `None` when the size
/// limit is infeasible and skipping is allowed.
fn v_total_for(cfg: &RunConfig, fleet: &FleetSpec, explicit: &Option<Money>) -> Result<Option<Money>, CliError> {
    if let Some(v) = explicit {
        return Ok(Some(v.clone()));
    }
    if !require_feasible(cfg, fleet)? {
        return Ok(None);
    }
    Ok(Some(optimal_counts(fleet)?.v_star))
}

fn index_cell(eps: &Money, v: &Money) -> Cell {
    stability_index(eps, v).ok().into()
}

pub fn least_core(cfg: &RunConfig, v_total: Option<&str>, out: &mut dyn Write) -> Result<(), CliError> {
    let explicit = parse_v_total(v_total)?;
    let rows = per_m(cfg, |fleet| {
        let Some(v) = v_total_for(cfg, fleet, &explicit)? else {
            return Ok(None);
        };
        let sol = solve_type_least_core(fleet, &v)?;
        Ok(Some((v, sol)))
    })?;
    let mut t = Table::new(
        "least_core",
        &["M", "V", "eps_star", "x_e", "x_f", "x_e_min", "x_e_max", "I_stable", "binding"],
    );
    for (m, row) in rows {
        let Some((v, sol)) = row else { continue };
        t.push(least_core_row(m, &v, &sol));
    }
    emit(&[t], cfg, out)
}

fn least_core_row(m: usize, v: &Money, sol: &LeastCoreSolution) -> Vec<Cell> {
    vec![
        m.into(),
        v.into(),
        (&sol.epsilon_star).into(),
        (&sol.allocation.x_e).into(),
        (&sol.allocation.x_f).into(),
        (&sol.x_e_interval.0).into(),
        (&sol.x_e_interval.1).into(),
        index_cell(&sol.epsilon_star, v),
        signatures(&sol.binding).into(),
    ]
}

const BASELINE_COLUMNS: [&str; 6] = ["M", "scheme", "lambda", "eps_of_x", "stability_index", "payoffs"];

/// Least-core row followed by every configured scheme (LS once per lambda),
/// all under the optimal structure.
fn baseline_rows(cfg: &RunConfig, fleet: &FleetSpec) -> Result<Vec<Vec<Cell>>, CliError> {
    let m = fleet.max_size();
    let structure = build_optimal_structure(fleet)?;
    let v = structure_value(&structure)?;
    let mut rows = Vec::new();

    let lc = solve_type_least_core(fleet, &v)?;
    let x = lc.allocation.to_payoffs(fleet);
    let rep = stability_report(&x, fleet, &v)?;
    rows.push(vec![
        m.into(),
        "LC".into(),
        Cell::Empty,
        rep.epsilon_of_x.into(),
        rep.index_percent.into(),
        Cell::Payoffs(x.into_inner()),
    ]);

    for &scheme in &cfg.schemes {
        let lambdas: Vec<Option<&Money>> = if scheme == Scheme::LeaderSubsidy {
            cfg.lambda_values.iter().map(Some).collect()
        } else {
            vec![None]
        };
        for lambda in lambdas {
            let x = baseline_allocate(scheme, lambda, &structure)?;
            let rep = stability_report(&x, fleet, &v)?;
            rows.push(vec![
                m.into(),
                scheme.code().into(),
                lambda.into(),
                rep.epsilon_of_x.into(),
                rep.index_percent.into(),
                Cell::Payoffs(x.into_inner()),
            ]);
        }
    }
    Ok(rows)
}

pub fn baselines(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = per_m(cfg, |fleet| {
        if !require_feasible(cfg, fleet)? {
            return Ok(Vec::new());
        }
        baseline_rows(cfg, fleet)
    })?;
    let mut t = Table::new("baselines", &BASELINE_COLUMNS).json_only(&["payoffs"]);
    for row in rows.into_iter().flat_map(|(_, r)| r) {
        t.push(row);
    }
    emit(&[t], cfg, out)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PayoffFile {
    Wrapped { payoffs: Vec<NumText> },
    Bare(Vec<NumText>),
}

fn read_payoffs(path: &Path) -> Result<PayoffVector, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let parsed: PayoffFile = serde_json::from_str(&text).map_err(|e| {
        CliError::Config(format!(
            "malformed payoff file {}: expected {{\"payoffs\": [...]}} or an array ({e})",
            path.display()
        ))
    })?;
    let entries = match parsed {
        PayoffFile::Wrapped { payoffs } | PayoffFile::Bare(payoffs) => payoffs,
    };
    let values = entries.iter().map(NumText::to_money).collect::<Result<Vec<_>, _>>()?;
    Ok(PayoffVector::new(values)?)
}

pub fn stability(cfg: &RunConfig, payoffs: &Path, v_total: Option<&str>, out: &mut dyn Write) -> Result<(), CliError> {
    let explicit = parse_v_total(v_total)?;
    let x = read_payoffs(payoffs)?;
    let rows = per_m(cfg, |fleet| {
        let Some(v) = v_total_for(cfg, fleet, &explicit)? else {
            return Ok(None);
        };
        Ok(Some(stability_report(&x, fleet, &v)?))
    })?;
    let mut t = Table::new("stability", &["M", "V", "eps_of_x", "stability_index", "worst_deviations"]);
    for (m, rep) in rows {
        let Some(rep) = rep else { continue };
        t.push(vec![
            m.into(),
            rep.v_total.into(),
            rep.epsilon_of_x.into(),
            rep.index_percent.into(),
            signatures(&rep.worst_deviations).into(),
        ]);
    }
    emit(&[t], cfg, out)
}

pub fn enumerate(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let per = per_m(cfg, |fleet| {
        if !require_feasible(cfg, fleet)? {
            return Ok(None);
        }
        let hist = benefit_distribution(fleet, &cfg.guards)?;
        let mut rows = Vec::with_capacity(hist.entries.len());
        for (benefit, count) in &hist.entries {
            // Each class is scored by the least core of its own total.
            let sol = solve_type_least_core(fleet, benefit)?;
            rows.push(vec![benefit.into(), (*count).into(), index_cell(&sol.epsilon_star, benefit)]);
        }
        Ok(Some(rows))
    })?;
    let several = cfg.m_values.len() > 1;
    let mut tables = Vec::new();
    for (m, rows) in per {
        let Some(rows) = rows else { continue };
        let name = if several { format!("histogram_M{m}") } else { "histogram".to_string() };
        let mut t = Table::new(name, &["benefit", "class_count", "stability_index"]);
        for row in rows {
            t.push(row);
        }
        tables.push(t);
    }
    emit(&tables, cfg, out)
}

/// Least core and baselines per size limit; infeasible limits become status
/// rows.
pub fn sweep(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let per = per_m(cfg, |fleet| {
        if let Some(reason) = infeasible_reason(fleet) {
            return Ok(Err(reason));
        }
        let v = optimal_counts(fleet)?.v_star;
        let sol = solve_type_least_core(fleet, &v)?;
        Ok(Ok((v, sol, baseline_rows(cfg, fleet)?)))
    })?;

    let mut lc = Table::new(
        "least_core",
        &["M", "V", "eps_star", "x_e", "x_f", "x_e_min", "x_e_max", "I_stable", "binding", "status"],
    );
    let mut bl = Table::new("baselines", &BASELINE_COLUMNS).json_only(&["payoffs"]);
    let mut skipped = Vec::new();
    for (m, r) in per {
        match r {
            Ok((v, sol, rows)) => {
                let mut row = least_core_row(m, &v, &sol);
                row.push("ok".into());
                lc.push(row);
                for row in rows {
                    bl.push(row);
                }
            }
            Err(reason) => {
                let mut row = vec![Cell::Int(m)];
                row.extend(std::iter::repeat_with(|| Cell::Empty).take(8));
                row.push("infeasible".into());
                lc.push(row);
                skipped.push(format!("M={m}: {reason}"));
            }
        }
    }
    emit(&[lc, bl], cfg, out)?;
    infeasible_outcome(cfg, &skipped)
}

fn infeasible_outcome(cfg: &RunConfig, skipped: &[String]) -> Result<(), CliError> {
    if skipped.is_empty() || cfg.allow_infeasible_skip {
        Ok(())
    } else {
        Err(CliError::InfeasibleRows(skipped.join("; ")))
    }
}

pub fn report_table1(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let per = per_m(cfg, |fleet| {
        if let Some(reason) = infeasible_reason(fleet) {
            return Ok(Err(reason));
        }
        let v = optimal_counts(fleet)?.v_star;
        let sol = solve_type_least_core(fleet, &v)?;
        Ok(Ok((v, sol)))
    })?;
    let mut t = Table::new("table1", &["M", "I_stable", "eps_star", "V", "x_e", "x_f", "status"]);
    let mut skipped = Vec::new();
    for (m, r) in per {
        match r {
            Ok((v, sol)) => t.push(vec![
                m.into(),
                index_cell(&sol.epsilon_star, &v),
                sol.epsilon_star.into(),
                v.into(),
                sol.allocation.x_e.into(),
                sol.allocation.x_f.into(),
                "ok".into(),
            ]),
            Err(reason) => {
                let mut row = vec![Cell::Int(m)];
                row.extend(std::iter::repeat_with(|| Cell::Empty).take(5));
                row.push("infeasible".into());
                t.push(row);
                skipped.push(format!("M={m}: {reason}"));
            }
        }
    }
    emit(&[t], cfg, out)?;
    infeasible_outcome(cfg, &skipped)
}

pub fn verify(cfg: &RunConfig, random: usize, seed: u64, out: &mut dyn Write) -> Result<(), CliError> {
    let opts = VerifyOptions {
        guards: cfg.guards,
        random_vectors: random,
        seed,
    };
    let per = per_m(cfg, |fleet| Ok(cross_check(fleet, &opts)?))?;
    let mut t = Table::new("verify", &["M", "check", "passed", "detail"]);
    let mut failed = Vec::new();
    for (m, checks) in per {
        for c in checks {
            if !c.passed {
                failed.push(format!("M={m} {}", c.name));
            }
            t.push(vec![m.into(), c.name.into(), c.passed.to_string().into(), c.detail.into()]);
        }
    }
    emit(&[t], cfg, out)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verify(failed.join(", ")))
    }
}
