//! Driver logic behind the `interfold` binary: analysis of one file and the
//! corpus runner.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use interfold::domains::{IntervalInstance, TransformerId};
use interfold::indep::{build_independence, Mode};
use interfold::lang::{parse_program, AssertId, Pos, Program};
use interfold::oracle::{check_sound_cover, enumerate_reach_abstract, enumerate_reach_concrete, OracleError};
use interfold::unfolder::{check_respects_independence, unfold_with, Collapser, UnfoldOptions};
use interfold::{dot, BigInt, Scalar};

pub const EXIT_SAFE: i32 = 0;
pub const EXIT_WARNINGS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCOMPLETE: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Machine,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub mode: Mode,
    pub widening_level: usize,
    pub cutoffs: bool,
    pub tla: bool,
    pub dot: Option<PathBuf>,
    pub oracle: bool,
    pub format: Format,
    pub max_events: usize,
    pub max_configs: usize,
    /// Arbitrary-precision integers instead of `i64`.
    pub exact: bool,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        let d = UnfoldOptions::default();
        RunConfig {
            input: input.into(),
            mode: Mode::Heap,
            widening_level: d.widening_level,
            cutoffs: true,
            tla: true,
            dot: None,
            oracle: false,
            format: Format::Text,
            max_events: d.event_cap,
            max_configs: d.configuration_cap,
            exact: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Warning {
    pub id: AssertId,
    pub pos: Pos,
    pub text: String,
}

/// Outcome of the concrete cross-check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleSummary {
    pub states: usize,
    pub truncated: bool,
    pub violated: Vec<AssertId>,
    pub uncovered: usize,
    pub missed: Vec<AssertId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub file: String,
    pub threads: usize,
    pub asserts: usize,
    pub mode: Mode,
    pub time: Duration,
    pub events: usize,
    pub cutoffs: usize,
    pub maximal_configurations: Option<usize>,
    pub warnings: Vec<Warning>,
    pub incomplete: Option<String>,
    pub cutoffs_used: bool,
    pub diagnostics: Vec<String>,
    pub oracle: Option<OracleSummary>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.incomplete.is_some() {
            EXIT_INCOMPLETE
        } else if !self.warnings.is_empty() {
            EXIT_WARNINGS
        } else {
            EXIT_SAFE
        }
    }

    pub fn verdict(&self) -> &'static str {
        match self.exit_code() {
            EXIT_SAFE => "safe",
            EXIT_WARNINGS => "unsafe",
            _ => "incomplete",
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text(),
            Format::Machine => self.machine(),
        }
    }

    fn text(&self) -> String {
        let mut out = String::new();
        for d in &self.diagnostics {
            let _ = writeln!(out, "note: {d}");
        }
        let _ = writeln!(out, "file: {}", self.file);
        let _ = writeln!(
            out,
            "P={} A={} t={:.3}s E={} E_cut={} W={}",
            self.threads,
            self.asserts,
            self.time.as_secs_f64(),
            self.events,
            self.cutoffs,
            self.warnings.len()
        );
        if let Some(m) = self.maximal_configurations {
            let _ = writeln!(out, "maximal configurations: {m}");
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {}:{}: {} may fail: assert({})", self.file, w.pos, w.id, w.text);
        }
        if let Some(why) = &self.incomplete {
            let _ = writeln!(out, "incomplete: {why}");
        }
        if let Some(o) = &self.oracle {
            let _ = writeln!(
                out,
                "oracle: {} concrete states{}, violated {:?}, uncovered {}, missed warnings {:?}",
                o.states,
                if o.truncated { " (truncated)" } else { "" },
                o.violated,
                o.uncovered,
                o.missed
            );
        }
        let _ = writeln!(out, "verdict: {}", self.verdict());
        out
    }

    /// Flat key=value lines. No timings, so equal inputs give equal bytes.
    fn machine(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "file={}", self.file);
        let _ = writeln!(out, "mode={}", self.mode);
        let _ = writeln!(out, "P={}", self.threads);
        let _ = writeln!(out, "A={}", self.asserts);
        let _ = writeln!(out, "E={}", self.events);
        let _ = writeln!(out, "E_cut={}", self.cutoffs);
        let _ = writeln!(out, "W={}", self.warnings.len());
        let _ = writeln!(out, "cutoffs={}", if self.cutoffs_used { "on" } else { "off" });
        if let Some(m) = self.maximal_configurations {
            let _ = writeln!(out, "maximal_configurations={m}");
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning={} line={} col={}", w.id, w.pos.line, w.pos.col);
        }
        if let Some(why) = &self.incomplete {
            let _ = writeln!(out, "incomplete={why}");
        }
        if let Some(o) = &self.oracle {
            let _ = writeln!(out, "oracle.states={}", o.states);
            let _ = writeln!(out, "oracle.truncated={}", o.truncated);
            let _ = writeln!(out, "oracle.violated={}", o.violated.len());
            let _ = writeln!(out, "oracle.uncovered={}", o.uncovered);
            let _ = writeln!(out, "oracle.missed={}", o.missed.len());
        }
        let _ = writeln!(out, "verdict={}", self.verdict());
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {1}", path = .0.display())]
    Io(PathBuf, std::io::Error),
    #[error("{path}:{1}", path = .0.display())]
    Parse(PathBuf, String),
    #[error("{0}")]
    Analysis(String),
}

/// Element budget for the respects-independence pre-check.
const PRECHECK_DEPTH: usize = 3;
const PRECHECK_CAP: usize = 2000;
const ORACLE_STATES: usize = 200_000;

pub fn analyze(cfg: &RunConfig) -> Result<Report, CliError> {
    let src = std::fs::read_to_string(&cfg.input).map_err(|e| CliError::Io(cfg.input.clone(), e))?;
    if cfg.exact {
        analyze_source::<BigInt>(cfg, &src)
    } else {
        analyze_source::<i64>(cfg, &src)
    }
}

pub fn analyze_source<T: Scalar>(cfg: &RunConfig, src: &str) -> Result<Report, CliError> {
    let p: Program<T> = parse_program(src).map_err(|e| CliError::Parse(cfg.input.clone(), e.to_string()))?;
    let inst = IntervalInstance::new(&p);
    let r = build_independence(&p, cfg.mode);
    let cx = Collapser::new(&inst, &r, cfg.tla, cfg.widening_level);
    let mut diagnostics = Vec::new();
    if cfg.mode == Mode::Sync {
        diagnostics.push("sync mode: independence assumes the program is data-race free".to_string());
    }

    let mut cutoffs = cfg.cutoffs;
    if cutoffs {
        let samples = match enumerate_reach_abstract(&cx, PRECHECK_DEPTH, PRECHECK_CAP) {
            Ok(s) => s,
            Err(_) => enumerate_reach_abstract(&cx, 1, PRECHECK_CAP).unwrap_or_default(),
        };
        if let Some(v) = check_respects_independence(&cx, &r, &samples).first() {
            cutoffs = false;
            diagnostics.push(format!(
                "cutoffs disabled: `{}` and `{}` do not commute after thread-local analysis",
                p.stmt_text(&p.edges[v.f].stmt),
                p.stmt_text(&p.edges[v.g].stmt)
            ));
        }
    }

    let opts = UnfoldOptions {
        use_tla: cfg.tla,
        use_cutoffs: cutoffs,
        widening_level: cfg.widening_level,
        event_cap: cfg.max_events,
        configuration_cap: cfg.max_configs,
        ..UnfoldOptions::default()
    };
    let res = unfold_with(&cx, &r, &opts).map_err(|e| CliError::Analysis(e.to_string()))?;

    if let Some(path) = &cfg.dot {
        let label = |f: TransformerId| p.stmt_text(&p.edges[f].stmt);
        dot::write_dot(&res.pes, label, path).map_err(|e| CliError::Io(path.clone(), e))?;
    }

    let oracle = if cfg.oracle {
        let rr = enumerate_reach_concrete(&p, ORACLE_STATES);
        let (uncovered, missed) = if rr.truncated {
            (0, Vec::new())
        } else {
            match check_sound_cover(&cx, &res, &rr, cfg.max_configs) {
                Ok(s) => (s.uncovered.len(), s.missed_warnings.into_iter().collect()),
                Err(OracleError::CapExceeded(_)) | Err(OracleError::Pes(_)) => {
                    diagnostics.push("oracle: configuration cap hit, coverage not checked".to_string());
                    (0, Vec::new())
                }
                Err(e) => return Err(CliError::Analysis(e.to_string())),
            }
        };
        Some(OracleSummary {
            states: rr.states.len(),
            truncated: rr.truncated,
            violated: rr.violations.keys().copied().collect(),
            uncovered,
            missed,
        })
    } else {
        None
    };

    let warnings = res
        .warnings
        .iter()
        .map(|&a| {
            let info = p.assert_info(a);
            Warning {
                id: a,
                pos: info.pos,
                text: info.text.clone(),
            }
        })
        .collect();
    Ok(Report {
        file: cfg.input.display().to_string(),
        threads: p.num_threads(),
        asserts: p.asserts.len(),
        mode: cfg.mode,
        time: res.stats.wall_time,
        events: res.stats.events,
        cutoffs: res.stats.cutoffs,
        maximal_configurations: res.pes.maximal_configurations(cfg.max_configs).ok().map(|m| m.len()),
        warnings,
        incomplete: res.incomplete.map(|i| format!("{i:?}")),
        cutoffs_used: cutoffs,
        diagnostics,
        oracle,
    })
}

/// Analyzes one file and returns `(exit code, printed output)`.
pub fn run_analyze(cfg: &RunConfig) -> (i32, String) {
    match analyze(cfg) {
        Ok(rep) => (rep.exit_code(), rep.render(cfg.format)),
        Err(e) => (EXIT_USAGE, format!("error: {e}\n")),
    }
}

/// Expected outcome read from a `.expect` sidecar.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Expectation {
    pub verdict: Option<String>,
    pub warnings: Option<usize>,
    pub events: Option<usize>,
}

pub fn parse_expectation(text: &str) -> Result<Expectation, String> {
    let mut e = Expectation::default();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
        let v = v.trim();
        let num = || v.parse::<usize>().map_err(|_| format!("line {}: not a number: {v}", n + 1));
        match k.trim() {
            "verdict" if v == "safe" || v == "unsafe" => e.verdict = Some(v.to_string()),
            "warnings" => e.warnings = Some(num()?),
            "events" => e.events = Some(num()?),
            k => return Err(format!("line {}: unknown entry `{k} = {v}`", n + 1)),
        }
    }
    Ok(e)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusRow {
    pub name: String,
    pub report: Option<Report>,
    pub pass: bool,
    pub reason: String,
}

/// Analyzes every `*.prog` in `dir` (sorted) against its sidecar. `base`
/// supplies the options; its input path is ignored.
pub fn run_corpus(dir: &Path, base: &RunConfig) -> Result<Vec<CorpusRow>, CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Io(dir.to_path_buf(), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "prog"))
        .collect();
    files.sort();
    let mut rows = Vec::new();
    for path in files {
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let cfg = RunConfig {
            input: path.clone(),
            dot: None,
            ..base.clone()
        };
        let expect = std::fs::read_to_string(path.with_extension("expect"))
            .map_err(|e| format!("no sidecar: {e}"))
            .and_then(|t| parse_expectation(&t));
        let (report, pass, reason) = match (analyze(&cfg), expect) {
            (Err(e), _) => (None, false, e.to_string()),
            (Ok(rep), Err(e)) => (Some(rep), false, e),
            (Ok(rep), Ok(exp)) => {
                let mut bad = Vec::new();
                if let Some(why) = &rep.incomplete {
                    bad.push(format!("incomplete ({why})"));
                }
                if let Some(v) = &exp.verdict {
                    if v != rep.verdict() {
                        bad.push(format!("verdict {} expected {v}", rep.verdict()));
                    }
                }
                if let Some(w) = exp.warnings {
                    if w != rep.warnings.len() {
                        bad.push(format!("W={} expected {w}", rep.warnings.len()));
                    }
                }
                if let Some(n) = exp.events {
                    if n != rep.events {
                        bad.push(format!("E={} expected {n}", rep.events));
                    }
                }
                (Some(rep), bad.is_empty(), bad.join("; "))
            }
        };
        rows.push(CorpusRow { name, report, pass, reason });
    }
    Ok(rows)
}

pub fn render_corpus(rows: &[CorpusRow], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Text => {
            let _ = writeln!(
                out,
                "{:<22} {:>2} {:>2} {:>8} {:>6} {:>6} {:>3}  {:<10} result",
                "program", "P", "A", "t(s)", "E", "E_cut", "W", "verdict"
            );
            for r in rows {
                match &r.report {
                    Some(rep) => {
                        let _ = write!(
                            out,
                            "{:<22} {:>2} {:>2} {:>8.3} {:>6} {:>6} {:>3}  {:<10} ",
                            r.name,
                            rep.threads,
                            rep.asserts,
                            rep.time.as_secs_f64(),
                            rep.events,
                            rep.cutoffs,
                            rep.warnings.len(),
                            rep.verdict()
                        );
                    }
                    None => {
                        let _ = write!(out, "{:<22} {:>48}  ", r.name, "-");
                    }
                }
                let _ = writeln!(
                    out,
                    "{}{}",
                    if r.pass { "PASS" } else { "FAIL" },
                    if r.reason.is_empty() { String::new() } else { format!(" ({})", r.reason) }
                );
            }
        }
        Format::Machine => {
            for r in rows {
                let mut fields = BTreeMap::new();
                if let Some(rep) = &r.report {
                    fields.insert("P", rep.threads.to_string());
                    fields.insert("A", rep.asserts.to_string());
                    fields.insert("E", rep.events.to_string());
                    fields.insert("E_cut", rep.cutoffs.to_string());
                    fields.insert("W", rep.warnings.len().to_string());
                    fields.insert("verdict", rep.verdict().to_string());
                }
                let _ = write!(out, "program={}", r.name);
                for (k, v) in fields {
                    let _ = write!(out, " {k}={v}");
                }
                let _ = writeln!(out, " result={}", if r.pass { "PASS" } else { "FAIL" });
            }
        }
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    if format == Format::Text {
        let _ = writeln!(out, "{} programs, {} failed", rows.len(), failed);
    }
    out
}
