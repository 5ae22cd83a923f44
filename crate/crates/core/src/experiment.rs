//! Config-driven experiment runs: build the families of a sweep, decompose
//! them, and write CSV reports plus a JSON manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::acs::{acs_gap, decay_fit, gacs_gap_embedding, gacs_gap_singular, write_acs_csv, AcsRow};
use crate::discretization::{build_family_within, Construction, MatrixFamilySpec, Restriction, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::geometry::{build_masks, count_nodes, measure_omega_t, Exhaustion, GridRestriction};
use crate::multiindex::MultiIndex;
use crate::spectral::{
    alpha_functionals, eigs, quantile_errors, standard_bank, AlphaValues, DistributionTarget, FunctionalRow, Mode,
    QuadratureOptions, SpectralReport, TestFunction,
};
use crate::symbol::{catalog_get, MatrixSymbol, CATALOG};
use crate::toeplitz::{assemble_toeplitz, default_table};

pub const SCHEMA_VERSION: &str = "1";

/// Experiment kinds with a one-line description each.
pub const EXPERIMENTS: [(&str, &str); 6] = [
    ("toeplitz_distribution", "T_n(f) for a constant-coefficient symbol against its rearrangement and functionals"),
    ("domain_distribution", "A_n on Omega and C_{n,t} on Omega_t for a 2D grid family"),
    ("acs_1d", "T_n(2-2cos) against (1-1/t) T_n(2-2cos): rank/norm gap over n and t"),
    ("gacs_2d", "A_n on Omega against C_{n,t}: embedded and singular-value gaps, padded spectra"),
    ("varcoeff", "P1 stiffness with the diffusion coefficient on Omega and Omega_t"),
    ("conditioning", "smallest eigenvalue of A_n on Omega along an n sweep"),
];

/// Bank identifiers accepted by the `bank` key.
pub const BANKS: [(&str, &str); 1] =
    [("standard", "hats of half-width 1 at 0, 1, ..., ceil(max symbol value), plus the constant one")];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ToeplitzDistribution,
    DomainDistribution,
    Acs1d,
    Gacs2d,
    Varcoeff,
    Conditioning,
}

impl ExperimentKind {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "toeplitz_distribution" => ExperimentKind::ToeplitzDistribution,
            "domain_distribution" => ExperimentKind::DomainDistribution,
            "acs_1d" => ExperimentKind::Acs1d,
            "gacs_2d" => ExperimentKind::Gacs2d,
            "varcoeff" => ExperimentKind::Varcoeff,
            "conditioning" => ExperimentKind::Conditioning,
            _ => {
                return Err(Error::UnknownExperiment {
                    name: name.to_string(),
                    valid: EXPERIMENTS.iter().map(|e| e.0.to_string()).collect(),
                })
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ToeplitzDistribution => "toeplitz_distribution",
            ExperimentKind::DomainDistribution => "domain_distribution",
            ExperimentKind::Acs1d => "acs_1d",
            ExperimentKind::Gacs2d => "gacs_2d",
            ExperimentKind::Varcoeff => "varcoeff",
            ExperimentKind::Conditioning => "conditioning",
        }
    }

    fn default_symbol(self) -> Option<&'static str> {
        match self {
            ExperimentKind::Acs1d => Some("p1_1d"),
            ExperimentKind::Varcoeff => Some("p1_2d_varcoeff"),
            ExperimentKind::Conditioning | ExperimentKind::Gacs2d | ExperimentKind::DomainDistribution => {
                Some("fd_p1_2d")
            }
            ExperimentKind::ToeplitzDistribution => None,
        }
    }

    fn accepts(self, symbol: &MatrixSymbol) -> bool {
        let name = symbol.name();
        match self {
            ExperimentKind::ToeplitzDistribution => symbol.is_constant_coefficient(),
            ExperimentKind::Acs1d => name == "p1_1d",
            ExperimentKind::Varcoeff => name == "p1_2d_varcoeff",
            ExperimentKind::DomainDistribution | ExperimentKind::Conditioning => {
                Construction::from_symbol_name(name).is_some()
            }
            ExperimentKind::Gacs2d => {
                Construction::from_symbol_name(name).is_some_and(|c| c != Construction::P1Varcoeff)
            }
        }
    }
}

fn default_workers() -> usize {
    1
}

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

fn default_bank() -> String {
    "standard".into()
}

/// A run description, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: String,
    #[serde(default)]
    pub symbol: Option<String>,
    pub n: Vec<usize>,
    #[serde(default)]
    pub t: Vec<f64>,
    #[serde(default = "default_bank")]
    pub bank: String,
    /// Rearrangement grid points per direction; by default the smallest
    /// grid with ten samples per eigenvalue.
    #[serde(default)]
    pub sampling: Option<usize>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub quadrature: QuadratureOptions,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, n: Vec<usize>) -> Self {
        ExperimentConfig {
            kind: kind.name().into(),
            symbol: None,
            n,
            t: Vec::new(),
            bank: default_bank(),
            sampling: None,
            output_dir: None,
            workers: default_workers(),
            budget: default_budget(),
            quadrature: QuadratureOptions::default(),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn experiment(&self) -> Result<ExperimentKind> {
        ExperimentKind::parse(&self.kind)
    }

    pub fn symbol(&self) -> Result<MatrixSymbol> {
        let kind = self.experiment()?;
        let name = match (&self.symbol, kind.default_symbol()) {
            (Some(s), _) => s.as_str(),
            (None, Some(d)) => d,
            (None, None) => return Err(Error::InvalidParameter(format!("{} needs a symbol", kind.name()))),
        };
        let sym = catalog_get(name)?;
        if !kind.accepts(&sym) {
            return Err(Error::InvalidParameter(format!("symbol `{name}` cannot be used with {}", kind.name())));
        }
        Ok(sym)
    }

    fn construction(&self) -> Result<Construction> {
        Construction::from_symbol_name(self.symbol()?.name())
            .ok_or_else(|| Error::InvalidParameter("not a 2D grid family".into()))
    }

    /// Checks names, sweeps and the memory budget against the largest size.
    pub fn validate(&self) -> Result<()> {
        let kind = self.experiment()?;
        let sym = self.symbol()?;
        if self.bank != "standard" {
            return Err(Error::InvalidParameter(format!("unknown bank `{}`; valid: standard", self.bank)));
        }
        if self.n.is_empty() || self.n[0] == 0 || self.n.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("n sweep must be nonempty, positive and increasing".into()));
        }
        if self.t.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("t sweep must be increasing".into()));
        }
        for &t in &self.t {
            measure_omega_t(t)?;
        }
        if matches!(kind, ExperimentKind::Acs1d | ExperimentKind::Gacs2d) && self.t.is_empty() {
            return Err(Error::InvalidParameter(format!("{} needs a nonempty t sweep", kind.name())));
        }
        if kind == ExperimentKind::Acs1d && self.t.iter().any(|&t| t <= 1.0) {
            return Err(Error::InvalidParameter("acs_1d needs t > 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        if self.sampling.is_some_and(|m| m < 2) {
            return Err(Error::InvalidParameter("sampling must be at least 2".into()));
        }
        let largest = *self.n.last().expect("nonempty");
        let required = match kind {
            ExperimentKind::ToeplitzDistribution => largest.pow(sym.d() as u32) * sym.p(),
            ExperimentKind::Acs1d => largest,
            _ => {
                let c = self.construction()?;
                let grid = c.grid().expect("2D family");
                count_nodes(largest, grid, 1.0)?.0 * grid.block_size()
            }
        };
        if required > self.budget {
            return Err(Error::BudgetExceeded { required, budget: self.budget });
        }
        Ok(())
    }
}

/// One soft check of a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
    pub checks: Vec<Check>,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    /// `{"failures": [{name, passed, detail}, ...]}`.
    pub fn failures_json(&self) -> serde_json::Value {
        json!({ "failures": self.failures() })
    }
}

/// Identifies a job; orders reports deterministically.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
struct JobKey {
    n: usize,
    t: Option<f64>,
}

impl JobKey {
    fn stem(&self) -> String {
        match self.t {
            Some(t) => format!("n{}_t{t}", self.n),
            None => format!("n{}", self.n),
        }
    }
}

#[derive(Clone, Debug, Default)]
struct JobOutput {
    files: Vec<String>,
    acs: Option<AcsRow>,
    acs_sv: Option<AcsRow>,
    metrics: BTreeMap<String, f64>,
    functionals: Vec<FunctionalRow>,
    seconds: f64,
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
}

/// Shared, read-only inputs of every job.
struct Context<'a> {
    config: &'a ExperimentConfig,
    kind: ExperimentKind,
    symbol: MatrixSymbol,
    out: &'a Path,
    bank: Vec<TestFunction>,
    /// Converged functionals per target key.
    alphas: BTreeMap<String, AlphaValues>,
}

fn target_key(t: Option<f64>, padded: bool) -> String {
    match (t, padded) {
        (None, _) => "omega".into(),
        (Some(t), false) => format!("omega_t{t}"),
        (Some(t), true) => format!("extended_t{t}"),
    }
}

impl Context<'_> {
    fn target(&self, t: Option<f64>, padded: bool) -> Result<DistributionTarget> {
        let sym = self.symbol.clone();
        Ok(match (self.kind, t, padded) {
            (ExperimentKind::ToeplitzDistribution | ExperimentKind::Acs1d, None, _) => DistributionTarget::new(sym),
            (ExperimentKind::Acs1d, Some(t), _) => DistributionTarget::new(Construction::P1_1dScaled { t }.symbol()),
            (_, None, _) => DistributionTarget::new(sym),
            (_, Some(t), false) => DistributionTarget::new(sym).on(Exhaustion::new(t)?),
            (_, Some(t), true) => DistributionTarget::extended(sym, t)?,
        })
    }

    fn report(
        &self,
        key: &JobKey,
        tag: &str,
        spectrum: Vec<f64>,
        t: Option<f64>,
        padded: bool,
        out: &mut JobOutput,
    ) -> Result<SpectralReport> {
        let target = self.target(t, padded)?;
        let grid = self.config.sampling.unwrap_or_else(|| target.grid_for(spectrum.len(), 10));
        let mut report = SpectralReport::new(tag, key.n, spectrum, &target, grid, Mode::Eigen)?;
        report.t = t;
        let alpha = &self.alphas[&target_key(t, padded)];
        let size = report.eigenvalues.len() as f64;
        report.functionals = self
            .bank
            .iter()
            .zip(&alpha.values)
            .map(|(f, &rhs)| {
                let lhs = report.eigenvalues.iter().map(|&l| f.eval(l)).sum::<f64>() / size;
                FunctionalRow {
                    f_id: f.id(),
                    lhs,
                    rhs,
                    gap: (lhs - rhs).abs(),
                    sup_norm: f.sup_norm(),
                    capped: alpha.capped,
                    flagged: alpha.flagged,
                }
            })
            .collect();
        let rearr = target.rearrangement(grid, Mode::Eigen);
        let q = quantile_errors(&report.eigenvalues, &rearr).into_iter().fold(0.0, f64::max);
        out.metrics.insert(format!("{tag}.max_min_dist"), report.max_min_distance());
        out.metrics.insert(format!("{tag}.max_quantile_err"), q);
        out.metrics.insert(format!("{tag}.sampling_grid"), grid as f64);

        let mut buf = Vec::new();
        report.write_spectral_csv(&mut buf)?;
        let name = format!("spectral_{tag}.csv");
        write_atomic(self.out, &name, &buf)?;
        out.files.push(name);
        let mut buf = Vec::new();
        report.write_functional_csv(&mut buf)?;
        let name = format!("functional_{tag}.csv");
        write_atomic(self.out, &name, &buf)?;
        out.files.push(name);
        Ok(report)
    }

    fn write_mask(&self, masks: &GridRestriction, n: usize, out: &mut JobOutput) -> Result<()> {
        let mut buf = Vec::new();
        masks.write_csv(&mut buf)?;
        let name = format!("mask_n{n}.csv");
        write_atomic(self.out, &name, &buf)?;
        out.files.push(name);
        Ok(())
    }

    fn run_job(&self, key: JobKey) -> Result<JobOutput> {
        let start = Instant::now();
        let mut out = JobOutput::default();
        let budget = self.config.budget;
        match self.kind {
            ExperimentKind::ToeplitzDistribution => {
                let table = default_table(&self.symbol)?;
                let a = assemble_toeplitz(&table, &MultiIndex::splat(self.symbol.d(), key.n as i64))?;
                let report = self.report(&key, &key.stem(), eigs(&a)?, None, false, &mut out)?;
                out.functionals = report.functionals;
            }
            ExperimentKind::DomainDistribution | ExperimentKind::Varcoeff => {
                let c = self.config.construction()?;
                let restriction = match key.t {
                    None => Restriction::Omega,
                    Some(t) => Restriction::OmegaT { t },
                };
                let fam = build_family_within(&MatrixFamilySpec::new(c, key.n, restriction), budget)?;
                if key.t.is_none() {
                    let masks = build_masks(key.n, c.grid().expect("2D"), &self.config.t)?;
                    self.write_mask(&masks, key.n, &mut out)?;
                }
                let report = self.report(&key, &key.stem(), eigs(&fam.matrix)?, key.t, false, &mut out)?;
                out.metrics.insert("N".into(), report.eigenvalues.len() as f64);
                out.functionals = report.functionals;
            }
            ExperimentKind::Conditioning => {
                let c = self.config.construction()?;
                let fam = build_family_within(&MatrixFamilySpec::new(c, key.n, Restriction::Omega), budget)?;
                let ev = eigs(&fam.matrix)?;
                out.metrics.insert("N".into(), ev.len() as f64);
                out.metrics.insert("lambda_min".into(), ev[0]);
                out.metrics.insert("lambda_max".into(), ev[ev.len() - 1]);
            }
            ExperimentKind::Acs1d => {
                let t = key.t.expect("acs jobs carry t");
                let a = build_family_within(
                    &MatrixFamilySpec::new(Construction::P1_1d, key.n, Restriction::FullRectangle),
                    budget,
                )?;
                let b = build_family_within(
                    &MatrixFamilySpec::new(Construction::P1_1dScaled { t }, key.n, Restriction::FullRectangle),
                    budget,
                )?;
                let g = acs_gap(a.matrix.as_ref(), b.matrix.as_ref())?;
                let ev_a = eigs(&a.matrix)?;
                out.metrics.insert("lambda_max".into(), ev_a[ev_a.len() - 1]);
                out.metrics.insert("norm_split".into(), g.at_rank(0));
                out.acs = Some(AcsRow {
                    n: key.n,
                    t,
                    size: g.size,
                    gap: g.gap,
                    rank_witness: g.rank,
                    norm_witness: g.norm,
                    m_fraction: 0.0,
                });
                self.report(&key, &key.stem(), eigs(&b.matrix)?, Some(t), false, &mut out)?;
            }
            ExperimentKind::Gacs2d => {
                let t = key.t.expect("gacs jobs carry t");
                let c = self.config.construction()?;
                let a = build_family_within(&MatrixFamilySpec::new(c, key.n, Restriction::Omega), budget)?;
                let cnt = build_family_within(&MatrixFamilySpec::new(c, key.n, Restriction::OmegaT { t }), budget)?;
                let masks = cnt.masks.as_ref().expect("2D family has masks");
                let pos = masks.omega_t_positions(0);
                let emb = gacs_gap_embedding(a.matrix.as_ref(), cnt.matrix.as_ref(), &pos, &pos)?;
                let sv = gacs_gap_singular(a.matrix.as_ref(), cnt.matrix.as_ref())?;
                let row = |g: &crate::acs::GacsGap| AcsRow {
                    n: key.n,
                    t,
                    size: g.size,
                    gap: g.gap,
                    rank_witness: g.rank,
                    norm_witness: g.norm,
                    m_fraction: g.m_fraction,
                };
                out.acs = Some(row(&emb));
                out.acs_sv = Some(row(&sv));
                let b = cnt.matrix.embed(&pos, a.matrix.size(), "B")?;
                self.report(&key, &key.stem(), eigs(&b)?, Some(t), true, &mut out)?;
            }
        }
        out.seconds = start.elapsed().as_secs_f64();
        Ok(out)
    }
}

fn jobs(kind: ExperimentKind, config: &ExperimentConfig) -> Vec<JobKey> {
    let mut keys = Vec::new();
    for &n in &config.n {
        match kind {
            ExperimentKind::ToeplitzDistribution | ExperimentKind::Conditioning => keys.push(JobKey { n, t: None }),
            ExperimentKind::DomainDistribution | ExperimentKind::Varcoeff => {
                keys.push(JobKey { n, t: None });
                keys.extend(config.t.iter().map(|&t| JobKey { n, t: Some(t) }));
            }
            ExperimentKind::Acs1d | ExperimentKind::Gacs2d => {
                keys.extend(config.t.iter().map(|&t| JobKey { n, t: Some(t) }))
            }
        }
    }
    keys
}

/// Runs the experiment into `out` (created if missing).
pub fn run(config: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    let started = Instant::now();
    config.validate()?;
    let kind = config.experiment()?;
    let symbol = config.symbol()?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;

    let keys = jobs(kind, config);
    let mut ctx = Context { config, kind, symbol, out, bank: Vec::new(), alphas: BTreeMap::new() };
    // the bank covers the widest target so every report uses the same functions
    let mut targets: Vec<(String, DistributionTarget)> = Vec::new();
    let padded = kind == ExperimentKind::Gacs2d;
    let mut t_keys: Vec<Option<f64>> = vec![None];
    if kind != ExperimentKind::ToeplitzDistribution && kind != ExperimentKind::Conditioning {
        t_keys.extend(config.t.iter().map(|&t| Some(t)));
    }
    for t in t_keys {
        if kind == ExperimentKind::Gacs2d && t.is_none() {
            continue;
        }
        targets.push((target_key(t, padded), ctx.target(t, padded)?));
    }
    let top = targets
        .iter()
        .map(|(_, tg)| {
            let m = if tg.symbol().is_constant_coefficient() { 64 } else { 16 };
            tg.samples(m, Mode::Eigen).values.into_iter().fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    ctx.bank = standard_bank(top);
    if kind != ExperimentKind::Conditioning {
        let alphas: Vec<(String, AlphaValues)> = pool.install(|| {
            targets
                .par_iter()
                .map(|(k, tg)| (k.clone(), alpha_functionals(tg, &ctx.bank, Mode::Eigen, &config.quadrature)))
                .collect()
        });
        ctx.alphas = alphas.into_iter().collect();
    }

    let results: Vec<Result<JobOutput>> = pool.install(|| keys.par_iter().map(|&k| ctx.run_job(k)).collect());
    let mut outputs = Vec::with_capacity(results.len());
    for r in results {
        outputs.push(r?);
    }

    let mut files: Vec<String> = outputs.iter().flat_map(|o| o.files.iter().cloned()).collect();
    let acs_rows: Vec<AcsRow> = outputs.iter().filter_map(|o| o.acs.clone()).collect();
    if !acs_rows.is_empty() {
        let mut buf = Vec::new();
        write_acs_csv(&acs_rows, &mut buf)?;
        write_atomic(out, "acs.csv", &buf)?;
        files.push("acs.csv".into());
    }
    let sv_rows: Vec<AcsRow> = outputs.iter().filter_map(|o| o.acs_sv.clone()).collect();
    if !sv_rows.is_empty() {
        let mut buf = Vec::new();
        write_acs_csv(&sv_rows, &mut buf)?;
        write_atomic(out, "acs_sv.csv", &buf)?;
        files.push("acs_sv.csv".into());
    }
    if kind == ExperimentKind::Conditioning {
        let mut wr = csv::Writer::from_writer(Vec::new());
        wr.write_record(["n", "N", "lambda_min", "lambda_max"])?;
        for (k, o) in keys.iter().zip(&outputs) {
            wr.write_record([
                k.n.to_string(),
                o.metrics["N"].to_string(),
                o.metrics["lambda_min"].to_string(),
                o.metrics["lambda_max"].to_string(),
            ])?;
        }
        let buf = wr.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
        write_atomic(out, "conditioning.csv", &buf)?;
        files.push("conditioning.csv".into());
    }

    let checks = soft_checks(&ctx, &keys, &outputs)?;
    let mut jobs_timing = serde_json::Map::new();
    let mut metrics = serde_json::Map::new();
    for (k, o) in keys.iter().zip(&outputs) {
        jobs_timing.insert(k.stem(), json!(o.seconds));
        metrics.insert(k.stem(), json!(o.metrics));
    }
    let quadrature: BTreeMap<&String, serde_json::Value> = ctx
        .alphas
        .iter()
        .map(|(k, a)| {
            (k, json!({ "grid": a.grid, "last_change": a.last_change, "capped": a.capped, "flagged": a.flagged }))
        })
        .collect();
    let manifest = json!({
        "schema_version": SCHEMA_VERSION,
        "config": config,
        "timings": { "total_seconds": started.elapsed().as_secs_f64(), "jobs": jobs_timing },
        "files": files,
        "bank": ctx.bank.iter().map(|f| f.id()).collect::<Vec<_>>(),
        "quadrature": quadrature,
        "metrics": metrics,
        "checks": checks,
        "versions": { "symlab": env!("CARGO_PKG_VERSION"), "faer": "0.24" },
    });
    write_atomic(out, "manifest.json", serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    files.push("manifest.json".into());
    Ok(RunSummary { out_dir: out.to_path_buf(), files, checks })
}

fn soft_checks(ctx: &Context<'_>, keys: &[JobKey], outputs: &[JobOutput]) -> Result<Vec<Check>> {
    let config = ctx.config;
    let mut checks = Vec::new();
    for (k, a) in &ctx.alphas {
        if a.flagged {
            checks.push(Check::new(
                format!("quadrature[{k}]"),
                false,
                format!("cap hit with change {:.3e}", a.last_change),
            ));
        }
    }
    let by_t =
        |t: Option<f64>| -> Vec<(&JobKey, &JobOutput)> { keys.iter().zip(outputs).filter(|(k, _)| k.t == t).collect() };
    match ctx.kind {
        ExperimentKind::ToeplitzDistribution => {
            for (k, o) in keys.iter().zip(outputs) {
                let one = o.functionals.iter().find(|r| r.f_id == "one").expect("bank has the constant");
                checks.push(Check::new(
                    format!("normalization[n={}]", k.n),
                    one.gap <= 1e-12,
                    format!("gap {:.3e}", one.gap),
                ));
            }
            if outputs.len() >= 2 {
                for (fi, f) in ctx.bank.iter().enumerate() {
                    let gaps: Vec<f64> = outputs.iter().map(|o| o.functionals[fi].gap).collect();
                    let ok = gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12);
                    checks.push(Check::new(format!("weak_star_decrease[{}]", f.id()), ok, format!("{gaps:?}")));
                }
            }
        }
        ExperimentKind::DomainDistribution | ExperimentKind::Varcoeff => {
            let series = by_t(None);
            if series.len() >= 2 {
                let errs: Vec<f64> =
                    series.iter().map(|(k, o)| o.metrics[&format!("{}.max_min_dist", k.stem())]).collect();
                let ok = errs.windows(2).all(|w| w[1] <= 1.5 * w[0]);
                checks.push(Check::new("min_distance_trend", ok, format!("{errs:?}")));
            }
        }
        ExperimentKind::Conditioning => {
            if outputs.len() >= 3 {
                let ns: Vec<f64> = outputs.iter().map(|o| o.metrics["N"]).collect();
                let lmin: Vec<f64> = outputs.iter().map(|o| o.metrics["lambda_min"]).collect();
                let fit = decay_fit(&ns, &lmin)?;
                let ok = (-1.35..=-0.65).contains(&fit.slope);
                checks.push(Check::new("conditioning_slope", ok, format!("slope {:.4}", fit.slope)));
            }
        }
        ExperimentKind::Acs1d => {
            for (k, o) in keys.iter().zip(outputs) {
                let t = k.t.expect("t");
                let split = o.metrics["norm_split"];
                let expected = o.metrics["lambda_max"] / t;
                let gap = o.acs.as_ref().expect("row").gap;
                let ok = (split - expected).abs() <= 1e-12 && split <= 4.0 / t && gap <= split + 1e-15;
                checks.push(Check::new(
                    format!("norm_split[n={},t={t}]", k.n),
                    ok,
                    format!("rank-0 split {split:.15} vs lambda_max/t {expected:.15}, optimum {gap:.6}"),
                ));
            }
            if config.t.len() >= 3 {
                let n = *config.n.last().expect("nonempty");
                let vals: Vec<f64> =
                    keys.iter().zip(outputs).filter(|(k, _)| k.n == n).map(|(_, o)| o.metrics["norm_split"]).collect();
                let fit = decay_fit(&config.t, &vals)?;
                checks.push(Check::new(
                    "norm_split_decay",
                    (fit.slope + 1.0).abs() <= 0.01 && fit.monotone,
                    format!("slope {:.6}", fit.slope),
                ));
            }
        }
        ExperimentKind::Gacs2d => {
            for &n in &config.n {
                let rows: Vec<&AcsRow> = outputs.iter().filter_map(|o| o.acs.as_ref()).filter(|r| r.n == n).collect();
                for r in &rows {
                    let gap_bound = (2.0 - measure_omega_t(r.t)?) / 2.0 + 0.15;
                    let m_bound = 1.0 / (2.0 * r.t) + 0.1;
                    checks.push(Check::new(
                        format!("gacs_bound[n={n},t={}]", r.t),
                        r.gap <= gap_bound && r.m_fraction <= m_bound,
                        format!("gap {:.4} <= {gap_bound:.4}, m_fraction {:.4} <= {m_bound:.4}", r.gap, r.m_fraction),
                    ));
                }
                let gaps_ok = rows.windows(2).all(|w| w[1].gap <= w[0].gap);
                let m_ok = rows.windows(2).all(|w| w[1].m_fraction <= w[0].m_fraction);
                checks.push(Check::new(format!("gacs_monotone[n={n}]"), gaps_ok && m_ok, String::new()));
            }
        }
    }
    Ok(checks)
}

/// One line per experiment, symbol or bank.
pub fn list(what: &str) -> Result<Vec<String>> {
    match what {
        "symbols" => CATALOG.iter().map(|n| Ok(format!("{n}: {}", catalog_get(n)?.summary()))).collect(),
        "experiments" => Ok(EXPERIMENTS.iter().map(|(n, d)| format!("{n}: {d}")).collect()),
        "banks" => Ok(BANKS.iter().map(|(n, d)| format!("{n}: {d}")).collect()),
        other => Err(Error::InvalidParameter(format!("cannot list `{other}`; choose symbols, experiments or banks"))),
    }
}

/// Metadata for a symbol, experiment or bank name.
pub fn describe(name: &str) -> Result<String> {
    if let Ok(sym) = catalog_get(name) {
        let even: Vec<&str> = sym.even_flags().iter().map(|&e| if e { "even" } else { "-" }).collect();
        return Ok(format!(
            "{}: {}\n  levels d = {}, block size p = {}, physical variables = {}, evenness = [{}]",
            sym.name(),
            sym.summary(),
            sym.d(),
            sym.p(),
            sym.phys_dim(),
            even.join(", ")
        ));
    }
    if let Some((n, d)) = EXPERIMENTS.iter().find(|(n, _)| *n == name) {
        return Ok(format!("{n}: {d}"));
    }
    if let Some((n, d)) = BANKS.iter().find(|(n, _)| *n == name) {
        return Ok(format!("{n}: {d}"));
    }
    let mut valid: Vec<String> = CATALOG.iter().map(|s| s.to_string()).collect();
    valid.extend(EXPERIMENTS.iter().map(|e| e.0.to_string()));
    valid.extend(BANKS.iter().map(|e| e.0.to_string()));
    let mut ranked: Vec<(usize, String)> = valid.into_iter().map(|v| (edit_distance(name, &v), v)).collect();
    ranked.sort();
    Err(Error::UnknownSymbol { name: name.to_string(), valid: ranked.into_iter().map(|(_, v)| v).collect() })
}

fn edit_distance(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, &cb) in b.iter().enumerate() {
            cur[j + 1] = (prev[j] + usize::from(ca != cb)).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}
