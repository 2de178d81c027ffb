//! Seeded verification runs over random tuples and their JSON/markdown reports.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::calculus::{calculus_unbounded_with, CalculusKind, ContourParams, Mode, DF_ALPHA_GATE, F_ALPHA_GATE};
use super::resolvent::Resolvents;
use super::verify::{relative_residual, split_form_divergence, verify_identity, IdentityName, TrialContext};
use crate::error::{Error, Result};
use crate::quaternion::Quaternion;
use crate::slice::Side;

pub const DEFAULT_SAMPLES: usize = 10;

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub samples: usize,
    pub identities: Vec<IdentityName>,
    pub params: ContourParams,
}

impl SuiteConfig {
    pub fn new(dim: usize, trials: usize, seed: u64) -> Self {
        Self { dim, trials, seed, samples: DEFAULT_SAMPLES, identities: IdentityName::ALL.to_vec(), params: ContourParams::default() }
    }
}

/// The random stream of trial `trial`; independent of thread scheduling.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

pub fn draw_trial(cfg: &SuiteConfig, trial: usize) -> Result<TrialContext> {
    TrialContext::draw(&mut trial_rng(cfg.seed, trial), cfg.dim, cfg.samples, cfg.params)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub identity: IdentityName,
    pub dim: usize,
    pub seed: u64,
    pub trial: usize,
    pub samples: usize,
    pub max_residual: f64,
    pub threshold: f64,
    pub pass: bool,
    pub nodes_used: usize,
}

/// Measured gate values of the unbounded calculi for one test function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateRow {
    pub kind: CalculusKind,
    pub condition: String,
    pub function: String,
    pub f_alpha: f64,
    pub df_alpha: f64,
    pub admitted: bool,
    /// Relative gap between transform and integral modes; `None` when gated out.
    pub transform_vs_integral: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Largest relative gap between `Q⁻¹(s − T̄)` and `Q⁻¹s − T̄Q⁻¹` over all trials.
    pub s_right_split_divergence: f64,
    pub split_form_diverges: bool,
    /// Relative size of `transform + integral` for the Q-calculus on `(s−γ)⁻¹`,
    /// trial 0: near zero when the two modes differ by a sign.
    pub q_transform_plus_integral: f64,
    pub gates: Vec<GateRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub dim: usize,
    pub seed: u64,
    pub trials: usize,
    pub rtol: f64,
    pub pass: bool,
    pub entries: Vec<ReportEntry>,
    pub diagnostics: Diagnostics,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &ReportEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    /// Worst residual per identity, in identity order.
    pub fn summary(&self) -> Vec<(IdentityName, f64, f64, bool)> {
        let mut out: Vec<(IdentityName, f64, f64, bool)> = Vec::new();
        for e in &self.entries {
            match out.last_mut() {
                Some(last) if last.0 == e.identity => {
                    last.1 = last.1.max(e.max_residual);
                    last.3 &= e.pass;
                }
                _ => out.push((e.identity, e.max_residual, e.threshold, e.pass)),
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let status = if self.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "# qfine verification report\n");
        let _ = writeln!(s, "dim = {}, seed = {}, trials = {}, rtol = {:e}: **{status}**\n", self.dim, self.seed, self.trials, self.rtol);
        let _ = writeln!(s, "| identity | max residual | threshold | result |");
        let _ = writeln!(s, "|---|---|---|---|");
        for (name, worst, thr, pass) in self.summary() {
            let _ = writeln!(s, "| {} | {worst:.3e} | {thr:.0e} | {} |", name.as_str(), if pass { "pass" } else { "FAIL" });
        }
        let _ = writeln!(s, "\n## Conditions of the unbounded calculi\n");
        let _ = writeln!(s, "| calculus | condition | f | \\|f(α)\\| | \\|∂_α f(α)\\| | admitted | transform vs integral |");
        let _ = writeln!(s, "|---|---|---|---|---|---|---|");
        for g in &self.diagnostics.gates {
            let gap = g.transform_vs_integral.map_or("-".to_string(), |v| format!("{v:.3e}"));
            let _ = writeln!(
                s,
                "| {} | {} | {} | {:.3e} | {:.3e} | {} | {gap} |",
                g.kind.as_str(),
                g.condition,
                g.function,
                g.f_alpha,
                g.df_alpha,
                if g.admitted { "yes" } else { "no" }
            );
        }
        let d = &self.diagnostics;
        let _ = writeln!(s, "\n## Diagnostics\n");
        let _ = writeln!(
            s,
            "- right S-resolvent, split form vs Q⁻¹(s − T̄): {:.3e}{}",
            d.s_right_split_divergence,
            if d.split_form_diverges { " (diverges)" } else { "" }
        );
        let _ = writeln!(s, "- Q-calculus, ‖transform + integral‖ relative: {:.3e}", d.q_transform_plus_integral);
        s
    }
}

pub fn condition(kind: CalculusKind) -> &'static str {
    match kind {
        CalculusKind::S | CalculusKind::Q => "none",
        CalculusKind::F => "f(α)=0",
        CalculusKind::P2 => "f(α)=0 and ∂_α f(α)=0",
    }
}

fn gate_rows(ctx: &TrialContext) -> Result<Vec<GateRow>> {
    let res = Resolvents::new(&ctx.tuple)?;
    let alpha = ctx.alpha;
    let functions = [("(s-γ)^-1", ctx.simple_pole()), ("(s-α)^2(s-γ)^-2", ctx.gated())];
    let mut rows = Vec::new();
    for kind in [CalculusKind::S, CalculusKind::Q, CalculusKind::P2, CalculusKind::F] {
        for (label, f) in &functions {
            let f_alpha = f.evaluate(Quaternion::real(alpha))?.norm();
            let df_alpha = f.derivative_at_real(alpha)?.norm();
            let admitted = match kind {
                CalculusKind::S | CalculusKind::Q => true,
                CalculusKind::F => f_alpha <= F_ALPHA_GATE,
                CalculusKind::P2 => f_alpha <= F_ALPHA_GATE && df_alpha <= DF_ALPHA_GATE,
            };
            let transform_vs_integral = if admitted {
                let run = |mode| calculus_unbounded_with(kind, Side::Left, f, &res, alpha, mode, &ctx.params);
                let tr = run(Mode::UnboundedTransform)?.op;
                let int = run(Mode::UnboundedIntegral)?.op;
                Some(relative_residual(&tr, &int, &ctx.probes))
            } else {
                None
            };
            rows.push(GateRow {
                kind,
                condition: condition(kind).to_string(),
                function: label.to_string(),
                f_alpha,
                df_alpha,
                admitted,
                transform_vs_integral,
            });
        }
    }
    Ok(rows)
}

fn q_sign_check(ctx: &TrialContext) -> Result<f64> {
    let res = Resolvents::new(&ctx.tuple)?;
    let f = ctx.simple_pole();
    let run = |mode| calculus_unbounded_with(CalculusKind::Q, Side::Left, &f, &res, ctx.alpha, mode, &ctx.params);
    let tr = run(Mode::UnboundedTransform)?.op;
    let int = run(Mode::UnboundedIntegral)?.op;
    Ok(relative_residual(&tr, &int.scale(-1.0), &ctx.probes))
}

/// Runs every configured identity on `cfg.trials` independent draws. The
/// first error in (trial, identity) order aborts the run.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    if cfg.dim == 0 || cfg.trials == 0 {
        return Err(Error::Invalid("dim and trials must be positive".into()));
    }
    let rtol = cfg.params.quad.rtol;
    let per_trial: Vec<Result<(Vec<ReportEntry>, f64)>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let ctx = draw_trial(cfg, trial)?;
            let mut entries = Vec::with_capacity(cfg.identities.len());
            for &identity in &cfg.identities {
                let out = verify_identity(identity, &ctx)?;
                let threshold = identity.threshold(rtol);
                entries.push(ReportEntry {
                    identity,
                    dim: cfg.dim,
                    seed: cfg.seed,
                    trial,
                    samples: out.samples,
                    max_residual: out.residual,
                    threshold,
                    pass: out.residual <= threshold,
                    nodes_used: out.nodes_used,
                });
            }
            Ok((entries, split_form_divergence(&ctx)?))
        })
        .collect();
    let mut entries = Vec::new();
    let mut split: f64 = 0.0;
    for r in per_trial {
        let (e, d) = r?;
        entries.extend(e);
        split = split.max(d);
    }
    entries.sort_by_key(|e| (e.identity, e.trial));
    let ctx0 = draw_trial(cfg, 0)?;
    let diagnostics = Diagnostics {
        s_right_split_divergence: split,
        split_form_diverges: split > super::verify::ALGEBRAIC_THRESHOLD,
        q_transform_plus_integral: q_sign_check(&ctx0)?,
        gates: gate_rows(&ctx0)?,
    };
    Ok(SuiteReport {
        dim: cfg.dim,
        seed: cfg.seed,
        trials: cfg.trials,
        rtol,
        pass: entries.iter().all(|e| e.pass),
        entries,
        diagnostics,
    })
}
