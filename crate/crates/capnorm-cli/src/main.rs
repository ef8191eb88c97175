//! `capnorm`: command-line front end for the capnorm library.
//!
//! Exit status is 0 on success (a silent criterion is still a success), 1 on
//! data or validation errors and 2 on usage errors.

use std::io::{IsTerminal, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use capnorm::heuristics::{simulate, SimulationConfig};
use capnorm::ingest::{parse_canonical_with_warnings, parse_transcript_with_warnings, to_canonical, Parsed};
use capnorm::normpoly::build_nu;
use capnorm::pmodule::VerdictKind;
use capnorm::tower::{
    genus_ledger_check, growth_equalities, iwasawa_fit, nocap_growth_check_types, GenusLedger, GroupType,
    LayerAnalysis, NormCheck, TowerData,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "capnorm", version, about = "Capitulation of p-class groups in cyclic p-extensions")]
struct Cli {
    /// Output style: human-readable text or machine-readable output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    /// JSON for reports; the `capnorm-tower 1` format for `convert`.
    Canonical,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    Auto,
    Transcript,
    Canonical,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Canonical,
}

#[derive(Subcommand)]
enum Command {
    /// Print ν and its decompositions x^k A + p^f(k) B.
    Nu {
        #[arg(long)]
        p: u64,
        #[arg(long = "N")]
        n: u32,
        /// Print only the decomposition for this k.
        #[arg(long)]
        k: Option<u64>,
    },
    /// Invariants, filtration and verdict of one layer of a tower file.
    Analyze {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        layer: u32,
        #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
        from: InputFormat,
    },
    /// Audit a whole tower file.
    Tower {
        #[arg(long)]
        file: PathBuf,
        /// JSON file with one genus ledger object or an array of them.
        #[arg(long)]
        ledger: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
        from: InputFormat,
    },
    /// Monte Carlo run of the capitulation heuristic (model CP-1).
    Simulate {
        #[arg(long)]
        p: u64,
        #[arg(long = "N")]
        n: u32,
        #[arg(long)]
        r: u32,
        /// v_p(#H_K).
        #[arg(long)]
        hk: u32,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Convert a tower file to the canonical format.
    Convert {
        /// Input file, or `-` for stdin.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output file, or `-` for stdout.
        #[arg(long = "out")]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
        from: InputFormat,
        #[arg(long, value_enum, default_value_t = OutputFormat::Canonical)]
        to: OutputFormat,
    },
}

/// ANSI styling controlled by `CAPNORM_COLOR` (`auto`, `always`, `never`).
#[derive(Clone, Copy)]
struct Style {
    color: bool,
}

impl Style {
    fn from_env() -> Result<Self, String> {
        let value = std::env::var("CAPNORM_COLOR").unwrap_or_else(|_| "auto".into());
        let color = match value.as_str() {
            "always" => true,
            "never" => false,
            "auto" | "" => std::io::stdout().is_terminal(),
            other => return Err(format!("CAPNORM_COLOR must be auto, always or never, not {other:?}")),
        };
        Ok(Style { color })
    }

    fn paint(&self, text: &str, code: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }

    fn verdict(&self, kind: VerdictKind, line: &str) -> String {
        let code = match kind {
            VerdictKind::Complete => "32",
            VerdictKind::Partial => "33",
            VerdictKind::None => "31",
        };
        self.paint(line, code)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let style = match Style::from_env() {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    match run(cli, style) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli, style: Style) -> Result<String> {
    let fmt = cli.format;
    match cli.command {
        Command::Nu { p, n, k } => nu(p, n, k, fmt),
        Command::Analyze { file, layer, from } => analyze(&file, layer, from, fmt, style),
        Command::Tower { file, ledger, from } => tower(&file, ledger.as_deref(), from, fmt, style),
        Command::Simulate { p, n, r, hk, trials, seed } => {
            let report = simulate(&SimulationConfig::new(p, n, r, hk, trials, seed))?;
            Ok(match fmt {
                Format::Text => report.to_text(),
                Format::Canonical => pretty(&serde_json::to_value(&report)?),
            })
        }
        Command::Convert { input, output, from, to: OutputFormat::Canonical } => {
            let parsed = load(&input, from)?;
            let text = to_canonical(&parsed.tower);
            if output.as_os_str() == "-" {
                Ok(text)
            } else {
                std::fs::write(&output, text).with_context(|| format!("writing {}", output.display()))?;
                Ok(String::new())
            }
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialise");
    s.push('\n');
    s
}

fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Parses a tower file and reports warnings on stderr.
fn load(path: &Path, from: InputFormat) -> Result<Parsed> {
    let text = read_input(path)?;
    let canonical = match from {
        InputFormat::Canonical => true,
        InputFormat::Transcript => false,
        InputFormat::Auto => text.trim_start().starts_with("capnorm-tower"),
    };
    let parsed = if canonical {
        parse_canonical_with_warnings(&text)
    } else {
        parse_transcript_with_warnings(&text)
    }
    .with_context(|| format!("{}", path.display()))?;
    for w in &parsed.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(parsed)
}

fn nu(p: u64, n: u32, k: Option<u64>, fmt: Format) -> Result<String> {
    let nu = build_nu(p, n)?;
    let decs = match k {
        None => nu.decompositions(),
        Some(k) => vec![nu.decompose(k)?],
    };
    match fmt {
        Format::Text => Ok(match k {
            None => nu.program_output(),
            Some(_) => decs[0].lines().join("\n") + "\n",
        }),
        Format::Canonical => {
            let decs: Vec<Value> = decs
                .iter()
                .map(|d| json!({"k": d.k, "f_k": d.f_k, "A": d.a_string(), "B": d.b_string()}))
                .collect();
            let coeffs: Vec<String> = nu.integer_coeffs().iter().map(|c| c.to_string()).collect();
            Ok(pretty(&json!({"p": p, "N": n, "P": nu.to_string(), "coefficients": coeffs, "decompositions": decs})))
        }
    }
}

fn vec_str(v: &[u64]) -> String {
    let parts: Vec<String> = v.iter().map(u64::to_string).collect();
    format!("[{}]", parts.join(","))
}

fn group_str(g: &GroupType, p: u64) -> String {
    let parts: Vec<String> = g.exponents().iter().map(|&e| p.pow(e).to_string()).collect();
    format!("[{}]", parts.join(","))
}

fn analysis_text(t: &TowerData, a: &LayerAnalysis, style: Style) -> String {
    let n = a.n;
    let layer = t.layer(n).expect("analysed layers exist");
    let inv = &a.invariants;
    let mut out = String::new();
    out.push_str(&format!("{} K{n}: p={} N={}\n", t.label, t.p, t.n));
    out.push_str(&format!(
        "group {} order p^{} p-rank {} exponent p^{}\n",
        group_str(&layer.group, t.p),
        inv.order,
        inv.p_rank,
        inv.e
    ));
    let sub: Vec<String> = a.filtration.subgroup_orders.iter().map(|o| format!("p^{o}")).collect();
    let quo: Vec<String> = a.filtration.quotient_orders.iter().map(|o| format!("p^{o}")).collect();
    out.push_str(&format!("filtration #H^i: {}\n", sub.join(" ")));
    out.push_str(&format!("quotients #(H^(i+1)/H^i): {}\n", quo.join(" ")));
    let s = inv.s.map_or("-".to_string(), |s| s.to_string());
    out.push_str(&format!("m={} s={} e={}\n", inv.m, s, inv.e));
    match &a.criterion {
        Some(_) => out.push_str("smooth criterion: applies, complete capitulation\n"),
        None => out.push_str("smooth criterion: silent\n"),
    }
    for (j, w) in a.verdict.witnesses.iter().enumerate() {
        out.push_str(&format!("nu(h_{}) = {}\n", j + 1, vec_str(w)));
    }
    out.push_str(&format!(
        "{} (rule {:?})\n",
        style.verdict(a.verdict.kind, &a.verdict_line()),
        a.verdict.rule
    ));
    if let Some(v) = &layer.verdict {
        let agrees = Some(v.kind) == Some(a.verdict.kind) && v.m == Some(inv.m) && v.e == Some(inv.e);
        out.push_str(&format!("printed: {} ({})\n", v.raw, if agrees { "agrees" } else { "differs" }));
    }
    out
}

fn analysis_json(a: &LayerAnalysis, t: &TowerData) -> Result<Value> {
    let mut v = serde_json::to_value(a)?;
    v["verdict_line"] = json!(a.verdict_line());
    v["printed_verdict"] = json!(t.layer(a.n)?.verdict);
    Ok(v)
}

fn analyze(file: &Path, n: u32, from: InputFormat, fmt: Format, style: Style) -> Result<String> {
    let t = load(file, from)?.tower;
    let a = t.analyze_layer(n)?;
    match fmt {
        Format::Text => Ok(analysis_text(&t, &a, style)),
        Format::Canonical => Ok(pretty(&analysis_json(&a, &t)?)),
    }
}

fn read_ledgers(path: &Path) -> Result<Vec<GenusLedger>> {
    let text = read_input(path)?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("{}", path.display()))?;
    let list = match v {
        Value::Array(items) => items,
        other => vec![other],
    };
    list.into_iter()
        .map(|item| serde_json::from_value(item).map_err(|e| anyhow!("{}: {e}", path.display())))
        .collect()
}

fn tower(file: &Path, ledger: Option<&Path>, from: InputFormat, fmt: Format, style: Style) -> Result<String> {
    let t = load(file, from)?.tower;
    let ledgers = ledger.map(read_ledgers).transpose()?.unwrap_or_default();
    let orders = t.orders();
    let prediction = t.predict_from_stability();
    let norms = t.verify_norm_vectors();
    let mut types = vec![t.base.clone()];
    types.extend(t.layers.iter().map(|l| l.group.clone()));
    let violations = nocap_growth_check_types(&types);
    let equalities = growth_equalities(&types);
    let fit = if orders.len() >= 3 { Some(iwasawa_fit(&orders, t.p)?) } else { None };
    let mut analyses = Vec::new();
    for layer in &t.layers {
        analyses.push(match layer.module {
            Some(_) => Some(t.analyze_layer(layer.n)?),
            None => None,
        });
    }
    let checks: Vec<_> = ledgers.iter().map(genus_ledger_check).collect();

    if fmt == Format::Canonical {
        let layers: Vec<Value> = t
            .layers
            .iter()
            .zip(&analyses)
            .map(|(l, a)| {
                Ok(json!({
                    "n": l.n,
                    "group": l.group,
                    "analysis": a.as_ref().map(|a| analysis_json(a, &t)).transpose()?,
                }))
            })
            .collect::<Result<_>>()?;
        let norm_json: Vec<Value> = norms
            .iter()
            .map(|r| match &r.norms {
                NormCheck::Skipped(why) => json!({"n": r.n, "skipped": why}),
                NormCheck::Checked { mismatches, checked } => json!({
                    "n": r.n,
                    "checked": checked,
                    "mismatches": mismatches,
                    "powers_checked": r.powers_checked,
                    "power_mismatches": r.power_mismatches,
                }),
            })
            .collect();
        let fit_json = fit.as_ref().map(|f| {
            json!({
                "lambda": f.lambda.to_string(),
                "mu": f.mu.to_string(),
                "nu": f.nu.to_string(),
                "residuals": f.residuals.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
                "flags": f.flags,
                "exact": f.is_exact(),
            })
        });
        let ledger_json: Vec<Value> =
            ledgers.iter().zip(&checks).map(|(l, c)| json!({"input": l, "check": c})).collect();
        return Ok(pretty(&json!({
            "label": t.label,
            "p": t.p,
            "N": t.n,
            "ell": t.ell,
            "r": t.r,
            "orders": orders,
            "stability_index": t.stability_index(),
            "prediction": prediction,
            "layers": layers,
            "norm_check": norm_json,
            "growth": {"violations": violations, "equalities": equalities},
            "iwasawa_fit": fit_json,
            "ledger": ledger_json,
        })));
    }

    let mut out = String::new();
    let opt = |x: Option<String>| x.unwrap_or_else(|| "?".into());
    out.push_str(&format!(
        "{}: p={} N={} ell={} r={}\n",
        t.label,
        t.p,
        t.n,
        opt(t.ell.map(|x| x.to_string())),
        opt(t.r.map(|x| x.to_string()))
    ));
    let order_strs: Vec<String> = orders.iter().map(u32::to_string).collect();
    out.push_str(&format!("log_p #H(K_n), n = 0..{}: {}\n", t.n, order_strs.join(" ")));
    match &prediction {
        None => out.push_str("stability index: none within the tower\n"),
        Some(pr) => {
            out.push_str(&format!("stability index: n0 = {}\n", pr.n0));
            for (e, layer) in &pr.schedule {
                out.push_str(&format!("  H_K[p^{e}] capitulates in K{layer}\n"));
            }
            match pr.complete_at {
                Some(l) => out.push_str(&format!("  complete capitulation from K{l}\n")),
                None => out.push_str("  complete capitulation beyond the tower\n"),
            }
        }
    }
    out.push_str("layers:\n");
    for (l, a) in t.layers.iter().zip(&analyses) {
        let g = group_str(&l.group, t.p);
        match a {
            Some(a) => out.push_str(&format!("  K{} {g}: {}\n", l.n, style.verdict(a.verdict.kind, &a.verdict_line()))),
            None => out.push_str(&format!("  K{} {g}: structure only\n", l.n)),
        }
    }
    out.push_str("norm cross-check:\n");
    for r in &norms {
        match &r.norms {
            NormCheck::Skipped(why) => out.push_str(&format!("  K{}: skipped ({why})\n", r.n)),
            NormCheck::Checked { mismatches, checked } => {
                out.push_str(&format!("  K{}: {}/{} printed norms match", r.n, checked - mismatches.len(), checked));
                if r.powers_checked > 0 {
                    out.push_str(&format!(
                        ", {}/{} printed powers match",
                        r.powers_checked - r.power_mismatches.len(),
                        r.powers_checked
                    ));
                }
                out.push('\n');
                for m in mismatches {
                    out.push_str(&format!(
                        "    h_{}: printed {} recomputed {}\n",
                        m.generator + 1,
                        vec_str(&m.printed),
                        vec_str(&m.recomputed)
                    ));
                }
            }
        }
    }
    if violations.is_empty() {
        out.push_str("growth #H(K_(n+h)) >= #H(K_n) #H(K_n)[p^h]: holds");
        if !equalities.is_empty() {
            let eq: Vec<String> = equalities.iter().map(|(n, h)| format!("(n={n},h={h})")).collect();
            out.push_str(&format!(", equality at {}", eq.join(" ")));
        }
        out.push('\n');
    } else {
        for v in &violations {
            out.push_str(&format!("growth bound fails at n={} h={}: p^{} < p^{}\n", v.n, v.h, v.lhs, v.rhs));
        }
    }
    match &fit {
        None => out.push_str("iwasawa fit: needs at least 3 orders\n"),
        Some(f) => {
            let res: Vec<String> = f.residuals.iter().map(|r| r.to_string()).collect();
            out.push_str(&format!(
                "iwasawa fit: lambda={} mu={} nu={} residuals [{}]{}\n",
                f.lambda,
                f.mu,
                f.nu,
                res.join(","),
                if f.flags.is_empty() { String::new() } else { format!(" flags {:?}", f.flags) }
            ));
        }
    }
    for (l, c) in ledgers.iter().zip(&checks) {
        out.push_str(&format!(
            "ledger n={}: {} (residual {}{})\n",
            l.n,
            if c.pass { style.paint("pass", "32") } else { style.paint("fail", "31") },
            c.residual,
            c.overlap.map_or(String::new(), |o| format!(", overlap {o}"))
        ));
    }
    Ok(out)
}
