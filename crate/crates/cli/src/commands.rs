//! The individual commands. Each writes its files into the output directory
//! and returns the tolerance checks it evaluated.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use genlift::experiments::{
    champernowne, entropy_proxy, kamae_demo, normality_deviation, weiss_demo,
};
use genlift::lift::{genericize, lift_pair, marker_sequence, oscillation_point, relative_generation_distance};
use genlift::rng::{sample_word, stream};
use genlift::{empirical_measure, TargetMeasure, Word};
use serde::Serialize;

use crate::config::{
    GenericizeConfig, JoiningSpec, LiftConfig, MarkersConfig, NormalityConfig, OscillateConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `"<="` or `">="`.
    pub relation: &'static str,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: "<=",
            tolerance,
            passed: value <= tolerance,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: ">=",
            tolerance,
            passed: value >= tolerance,
        }
    }
}

#[derive(Serialize)]
struct ReportFile<'a, C, R> {
    command: &'a str,
    seed: u64,
    resolved_config: &'a C,
    passed: bool,
    checks: &'a [Check],
    report: &'a R,
}

pub struct Output<'a> {
    pub dir: &'a Path,
    pub command: &'a str,
    pub seed: u64,
}

impl Output<'_> {
    fn word(&self, name: &str, w: &Word) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, w.to_text() + "\n").with_context(|| format!("writing {}", path.display()))
    }

    fn report<C: Serialize, R: Serialize>(&self, config: &C, checks: &[Check], report: &R) -> Result<()> {
        let file = ReportFile {
            command: self.command,
            seed: self.seed,
            resolved_config: config,
            passed: checks.iter().all(|c| c.passed),
            checks,
            report,
        };
        let path = self.dir.join("report.json");
        let text = serde_json::to_string_pretty(&file)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    fn csv(&self, name: &str, key: &str, rows: &[(&str, usize, f64)]) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(["series", key, "value"])?;
        for &(series, n, value) in rows {
            w.write_record([series, &n.to_string(), &value.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn lift(mut cfg: LiftConfig, depth: Option<usize>, out: &Output) -> Result<Vec<Check>> {
    if let Some(k) = depth {
        cfg.schedule.metric_depth = k;
    }
    let sft = cfg.sft.load()?;
    let y = cfg.y.load(out.seed, "y")?;
    let mu = cfg.mu.clone().unwrap_or_else(|| TargetMeasure::uniform(sft.alphabet()));
    cfg.mu = Some(mu.clone());
    let xi = match &mut cfg.joining {
        JoiningSpec::Product { nu, nu_depth } => {
            let nu = match nu {
                Some(nu) => nu.clone(),
                None => {
                    let longest = cfg
                        .schedule
                        .block_len(cfg.checkpoints.len().max(1))
                        .context("block length overflow")?;
                    let d = *nu_depth.get_or_insert(longest);
                    TargetMeasure::Empirical(empirical_measure(&y, d)?)
                }
            };
            TargetMeasure::product(mu.clone(), nu)
        }
        JoiningSpec::Diagonal => TargetMeasure::diagonal(mu.clone()),
        JoiningSpec::Measure { measure } => measure.clone(),
    };
    let outcome = lift_pair(&y, &cfg.checkpoints, &xi, &mu, &sft, &cfg.schedule)?;
    let r = &outcome.report;

    let mut checks = Vec::new();
    if let Some(t) = cfg.tolerances.pair {
        let last = r.stages.last().context("no stages")?;
        checks.push(Check::at_most("pair distance at last adjusted checkpoint", last.pair_distance, t));
    }
    if let Some(t) = cfg.tolerances.x {
        let worst = r.x_scales.iter().map(|s| s.distance).fold(0.0, f64::max);
        checks.push(Check::at_most("worst x distance over report scales", worst, t));
    }
    if let Some(t) = cfg.tolerances.agreement {
        checks.push(Check::at_least("agreement with y", r.agreement_with_y.unwrap_or(0.0), t));
    }

    let mut rows = Vec::new();
    for s in &r.stages {
        rows.push(("pair_checkpoint", s.adjusted_checkpoint, s.pair_distance));
        rows.push(("x_checkpoint", s.adjusted_checkpoint, s.x_distance));
    }
    rows.extend(r.x_scales.iter().map(|s| ("x_scale", s.n, s.distance)));
    rows.extend(r.pair_scales.iter().map(|s| ("pair_scale", s.n, s.distance)));
    out.word("x.txt", &outcome.x)?;
    out.csv("distances.csv", "n", &rows)?;
    out.report(&cfg, &checks, r)?;
    Ok(checks)
}

pub fn genericize_cmd(mut cfg: GenericizeConfig, depth: Option<usize>, out: &Output) -> Result<Vec<Check>> {
    if let Some(k) = depth {
        cfg.schedule.metric_depth = k;
    }
    let sft = cfg.sft.load()?;
    let parts = cfg.x0.load_parts(out.seed, "x0")?;
    let Some((first, rest)) = parts.split_first() else {
        bail!("concat needs at least one part");
    };
    let mut x0 = first.clone();
    for p in rest {
        x0 = x0.concat(p)?;
    }
    let mu = cfg.mu.clone().unwrap_or_else(|| TargetMeasure::uniform(sft.alphabet()));
    cfg.mu = Some(mu.clone());
    let checkpoints = match (&cfg.checkpoints, &cfg.typical_parts) {
        (Some(j), _) => j.clone(),
        (None, Some(typical)) => {
            let ends: Vec<usize> = parts
                .iter()
                .scan(0, |end, p| {
                    *end += p.len();
                    Some(*end)
                })
                .collect();
            typical
                .iter()
                .map(|&i| ends.get(i).copied().with_context(|| format!("x0 has no part {i}")))
                .collect::<Result<_>>()?
        }
        (None, None) => bail!("genericize needs checkpoints or typical_parts"),
    };
    cfg.checkpoints = Some(checkpoints.clone());
    let outcome = genericize(&x0, &checkpoints, &mu, &cfg.schedule, &sft)?;
    let r = &outcome.report;

    let mut checks = Vec::new();
    if let Some(t) = cfg.tolerances.distance {
        let worst = r.scales.iter().map(|s| s.distance).fold(0.0, f64::max);
        checks.push(Check::at_most("worst output distance over report scales", worst, t));
    }
    if let Some(t) = cfg.tolerances.agreement {
        let least = r.stages.iter().map(|s| s.agreement_density).fold(1.0, f64::min);
        checks.push(Check::at_least("least agreement density at checkpoints", least, t));
    }
    checks.push(Check::at_least(
        "output equals input on the agreement set",
        f64::from(u8::from(r.exact_on_agreement)),
        1.0,
    ));

    let mut rows = Vec::new();
    for s in &r.stages {
        rows.push(("input_checkpoint", s.checkpoint, s.input_distance));
        rows.push(("output_checkpoint", s.checkpoint, s.output_distance));
        rows.push(("agreement_density", s.checkpoint, s.agreement_density));
    }
    rows.extend(r.scales.iter().map(|s| ("output_scale", s.n, s.distance)));

    #[derive(Serialize)]
    struct Full<'a, R> {
        #[serde(flatten)]
        report: &'a R,
        agreement_ranges: &'a [(usize, usize)],
    }
    out.word("x.txt", &outcome.word)?;
    out.csv("distances.csv", "n", &rows)?;
    out.report(
        &cfg,
        &checks,
        &Full {
            report: r,
            agreement_ranges: outcome.agreement.ranges(),
        },
    )?;
    Ok(checks)
}

pub fn oscillate(cfg: OscillateConfig, out: &Output) -> Result<Vec<Check>> {
    let sft = cfg.sft.load()?;
    let outcome = oscillation_point(&cfg.mu, &cfg.nu, &sft, cfg.stages, out.seed)?;
    let r = &outcome.report;
    let mut checks = Vec::new();
    if cfg.require_alternation {
        let satisfied = r.checkpoints.iter().filter(|c| c.satisfied).count();
        checks.push(Check::at_least(
            "block ends with the sought sign",
            satisfied as f64,
            cfg.stages as f64,
        ));
    }
    let rows: Vec<_> = r.checkpoints.iter().map(|c| ("average", c.n, c.average)).collect();
    out.word("x.txt", &outcome.x)?;
    out.csv("averages.csv", "n", &rows)?;
    out.report(&cfg, &checks, r)?;
    Ok(checks)
}

#[derive(Serialize)]
struct MarkerRun {
    l: usize,
    count: usize,
    gap_l: usize,
    gap_l_plus_1: usize,
    other_gaps: usize,
    relative_generation_distance: f64,
}

pub fn markers(mut cfg: MarkersConfig, depth: Option<usize>, out: &Output) -> Result<Vec<Check>> {
    if let Some(k) = depth {
        cfg.depth = k;
    }
    let mut runs = Vec::new();
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for &l in &cfg.block_lengths {
        let m = marker_sequence(l, cfg.count)?;
        let gaps = m.gaps();
        let gap_l = gaps.iter().filter(|&&g| g == l).count();
        let gap_l_plus_1 = gaps.iter().filter(|&&g| g == l + 1).count();
        let other_gaps = gaps.len() - gap_l - gap_l_plus_1;
        let last = *m.markers().last().context("no markers")?;
        let x = sample_word(&cfg.measure, last + cfg.depth, &mut stream(out.seed, &format!("markers/{l}")))?;
        let d = relative_generation_distance(&x, &m, &cfg.measure, cfg.depth, cfg.count)?;
        checks.push(Check::at_most(format!("L={l}: gaps outside {{L, L+1}}"), other_gaps as f64, 0.0));
        if let Some(t) = cfg.tolerance {
            checks.push(Check::at_most(format!("L={l}: relative generation distance"), d, t));
        }
        rows.push(("relative_generation_distance", l, d));
        runs.push(MarkerRun {
            l,
            count: cfg.count,
            gap_l,
            gap_l_plus_1,
            other_gaps,
            relative_generation_distance: d,
        });
    }
    out.csv("markers.csv", "l", &rows)?;
    out.report(&cfg, &checks, &runs)?;
    Ok(checks)
}

#[derive(Serialize)]
struct NormalityReport {
    weiss: genlift::experiments::WeissDemo,
    kamae: Option<genlift::experiments::KamaeDemo>,
    champernowne: Vec<ChampernowneRow>,
}

#[derive(Serialize)]
struct ChampernowneRow {
    base: usize,
    len: usize,
    deviations: Vec<(usize, f64)>,
    entropy: genlift::experiments::EntropyProxy,
}

pub fn normality(mut cfg: NormalityConfig, depth: Option<usize>, out: &Output) -> Result<Vec<Check>> {
    if let Some(k) = depth {
        cfg.depths = (1..=k).collect();
    }
    let weiss = weiss_demo(cfg.len, cfg.weiss_depth, out.seed)?;
    let mut checks = Vec::new();
    let mut rows = vec![("weiss_selected", cfg.weiss_depth, weiss.selected_deviation)];
    if let Some(t) = cfg.weiss_tolerance {
        checks.push(Check::at_most("Sturmian selection deviation", weiss.selected_deviation, t));
    }
    let kamae = if cfg.kamae {
        let k = kamae_demo(cfg.len, out.seed)?;
        if let Some(t) = cfg.kamae_selected_min {
            checks.push(Check::at_least("positive-entropy selection deviation", k.selected_deviation, t));
        }
        if let Some(t) = cfg.kamae_x_max {
            checks.push(Check::at_most("lifted x deviation", k.x_deviation, t));
        }
        rows.push(("kamae_selected", 1, k.selected_deviation));
        rows.push(("kamae_x", 2, k.x_deviation));
        Some(k)
    } else {
        None
    };
    let mut champ = Vec::new();
    let mut labels = Vec::new();
    for &b in &cfg.champernowne_bases {
        let w = champernowne(b, cfg.len)?;
        let deviations = cfg
            .depths
            .iter()
            .map(|&k| Ok((k, normality_deviation(&w, k)?)))
            .collect::<Result<Vec<_>>>()?;
        labels.push(format!("champernowne_{b}"));
        champ.push(ChampernowneRow {
            base: b,
            len: cfg.len,
            deviations,
            entropy: entropy_proxy(&w, 0.05)?,
        });
    }
    for (label, row) in labels.iter().zip(&champ) {
        rows.extend(row.deviations.iter().map(|&(k, d)| (label.as_str(), k, d)));
    }
    out.csv("normality.csv", "depth", &rows)?;
    out.report(
        &cfg,
        &checks,
        &NormalityReport {
            weiss,
            kamae,
            champernowne: champ,
        },
    )?;
    Ok(checks)
}
