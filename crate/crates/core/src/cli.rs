//! Command-line front end. One verb per invocation; quiver input comes
//! from a file, from stdin (`-`), or from the built-in `a2n` family via
//! `--n`/`--sweep`. Output is deterministic: JSON with sorted keys, no
//! timestamps, byte-identical across runs on the same input.
//!
//! Exit codes: 0 success, 1 input error, 2 refusal (an operation declined
//! to answer, e.g. the injectivity gate failed, an expression has opaque
//! atoms, or the enumeration budget was exceeded).

use crate::arquiver::{self, ARQuiver, ArQuiverError};
use crate::catalogue::{self, CatalogueError};
use crate::ktheory::{
    self, CoefficientSpec, KTheoryError, K1Presentation, INSTANTIATION_NOTE,
};
use crate::localization::{self, LocalizationError};
use crate::report;
use crate::zmodule::{self, ZModuleError, DEFAULT_ORACLE_BUDGET};
use serde_json::{json, Value};
use std::collections::BTreeSet;
use std::io::Read;
use std::path::PathBuf;
use thiserror::Error;

pub const USAGE: &str = "usage: cmk <verb> <quiver.json | - | a2n> [options]
verbs:
  k0prime     K0'(R) as the cokernel of T
  k0mf        K0 of the matrix-factorization category (cokernel of T')
  armatrix    the relation matrix T (or T' with --deleted)
  det         determinant of T' with its positivity gate
  k1prime     symbolic presentation of K1'(R)
  k1mf        symbolic presentation of K1(MF)
  k1cat       symbolic K1 of the split-exact MCM category
  localize    K0 localization sequence for --subcat, with semiperfect view
  filtration  K1 filtration steps along the quiver ordering
  catalogue   emit a built-in quiver (cmk catalogue a2n --n N)
  check       validate a quiver file
options:
  --format json|table     output format (default table)
  --coefficients MODE     symbolic (default) or ff:Q for a finite field
  --subcat id,id,...      subcategory generators for localize
  --n N                   family parameter
  --sweep A..B            run over a parameter range (family input only)
  -o PATH                 write output to PATH instead of stdout
  --hypersurface          assert the hypersurface hypothesis for k0mf
  --deleted               armatrix: print T' instead of T
  --verify-kernel         k1mf: brute-force check that the kernel term is
                          trivial (finite-field mode; honors CMK_ORACLE_BUDGET)";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verb {
    K0Prime,
    K0Mf,
    ArMatrix,
    Det,
    K1Prime,
    K1Mf,
    K1Cat,
    Localize,
    Filtration,
    Catalogue,
    Check,
}

impl Verb {
    fn parse(s: &str) -> Option<Verb> {
        Some(match s {
            "k0prime" => Verb::K0Prime,
            "k0mf" => Verb::K0Mf,
            "armatrix" => Verb::ArMatrix,
            "det" => Verb::Det,
            "k1prime" => Verb::K1Prime,
            "k1mf" => Verb::K1Mf,
            "k1cat" => Verb::K1Cat,
            "localize" => Verb::Localize,
            "filtration" => Verb::Filtration,
            "catalogue" => Verb::Catalogue,
            "check" => Verb::Check,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InputSpec {
    Stdin,
    Path(PathBuf),
    Family(String),
}

#[derive(Clone, Debug)]
pub struct Command {
    pub verb: Verb,
    pub input: Option<InputSpec>,
    pub format: Format,
    pub coefficients: CoefficientSpec,
    pub subcat: Option<BTreeSet<String>>,
    pub n: Option<u32>,
    pub sweep: Option<(u32, u32)>,
    pub output: Option<PathBuf>,
    pub hypersurface: bool,
    pub deleted: bool,
    pub verify_kernel: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Catalogue(#[from] CatalogueError),
    #[error(transparent)]
    Quiver(#[from] ArQuiverError),
    #[error(transparent)]
    KTheory(#[from] KTheoryError),
    #[error(transparent)]
    Localization(#[from] LocalizationError),
    #[error(transparent)]
    ZModule(#[from] ZModuleError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn ktheory_exit_code(e: &KTheoryError) -> i32 {
    match e {
        KTheoryError::InjectivityUnverified { .. } | KTheoryError::NotInstantiable(_) => 2,
        KTheoryError::ZModule(ZModuleError::BudgetExceeded { .. }) => 2,
        _ => 1,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::KTheory(e) => ktheory_exit_code(e),
            CliError::Localization(LocalizationError::UnitGroupUnspecified(_)) => 2,
            CliError::Localization(LocalizationError::KTheory(e)) => ktheory_exit_code(e),
            CliError::ZModule(ZModuleError::BudgetExceeded { .. }) => 2,
            _ => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn parse(args: &[String]) -> Result<Command, CliError> {
    let mut it = args.iter();
    let verb_str = it.next().ok_or_else(|| usage("missing verb"))?;
    let verb = Verb::parse(verb_str).ok_or_else(|| usage(format!("unknown verb `{verb_str}`")))?;

    let mut cmd = Command {
        verb,
        input: None,
        format: Format::Table,
        coefficients: CoefficientSpec::Symbolic,
        subcat: None,
        n: None,
        sweep: None,
        output: None,
        hypersurface: false,
        deleted: false,
        verify_kernel: false,
    };

    let next_value = |flag: &str, it: &mut std::slice::Iter<'_, String>| {
        it.next()
            .cloned()
            .ok_or_else(|| usage(format!("flag {flag} needs a value")))
    };

    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--format" => {
                cmd.format = match next_value("--format", &mut it)?.as_str() {
                    "json" => Format::Json,
                    "table" => Format::Table,
                    other => return Err(usage(format!("unknown format `{other}`"))),
                }
            }
            "--coefficients" => {
                let v = next_value("--coefficients", &mut it)?;
                cmd.coefficients = if v == "symbolic" {
                    CoefficientSpec::Symbolic
                } else if let Some(qs) = v.strip_prefix("ff:") {
                    let q: u64 = qs
                        .parse()
                        .map_err(|_| usage(format!("bad field order `{qs}`")))?;
                    CoefficientSpec::finite_field(q)?
                } else {
                    return Err(usage(format!(
                        "bad --coefficients `{v}` (expected symbolic or ff:Q)"
                    )));
                };
            }
            "--subcat" => {
                let v = next_value("--subcat", &mut it)?;
                let set: BTreeSet<String> = v
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.to_string())
                    .collect();
                cmd.subcat = Some(set);
            }
            "--n" => {
                let v = next_value("--n", &mut it)?;
                cmd.n = Some(v.parse().map_err(|_| usage(format!("bad --n `{v}`")))?);
            }
            "--sweep" => {
                let v = next_value("--sweep", &mut it)?;
                let (a, b) = v
                    .split_once("..")
                    .ok_or_else(|| usage(format!("bad --sweep `{v}` (expected A..B)")))?;
                let a: u32 = a.parse().map_err(|_| usage(format!("bad --sweep `{v}`")))?;
                let b: u32 = b.parse().map_err(|_| usage(format!("bad --sweep `{v}`")))?;
                if a > b {
                    return Err(usage(format!("empty sweep range `{v}`")));
                }
                cmd.sweep = Some((a, b));
            }
            "-o" | "--output" => {
                cmd.output = Some(PathBuf::from(next_value("-o", &mut it)?));
            }
            "--hypersurface" => cmd.hypersurface = true,
            "--deleted" => cmd.deleted = true,
            "--verify-kernel" => cmd.verify_kernel = true,
            other if other.starts_with('-') && other != "-" => {
                return Err(usage(format!("unknown flag `{other}`")));
            }
            positional => {
                if cmd.input.is_some() {
                    return Err(usage(format!("unexpected extra argument `{positional}`")));
                }
                cmd.input = Some(if positional == "-" {
                    InputSpec::Stdin
                } else if positional == "a2n" {
                    InputSpec::Family(positional.to_string())
                } else {
                    InputSpec::Path(PathBuf::from(positional))
                });
            }
        }
    }
    Ok(cmd)
}

#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub exit: i32,
}

fn read_stdin() -> Result<String, CliError> {
    let mut buf = String::new();
    std::io::stdin().read_to_string(&mut buf)?;
    Ok(buf)
}

/// Quivers to evaluate: `(sweep parameter, quiver)`. The parameter is set
/// only in sweep mode, where it prefixes each output line.
fn resolve_inputs(cmd: &Command) -> Result<Vec<(Option<u32>, ARQuiver)>, CliError> {
    let input = cmd
        .input
        .as_ref()
        .ok_or_else(|| usage("missing quiver input (path, -, or a2n)"))?;
    match input {
        InputSpec::Stdin => {
            if cmd.sweep.is_some() {
                return Err(usage("--sweep needs a family input such as a2n"));
            }
            Ok(vec![(None, catalogue::quiver_from_json(&read_stdin()?, "<stdin>")?)])
        }
        InputSpec::Path(p) => {
            if cmd.sweep.is_some() {
                return Err(usage("--sweep needs a family input such as a2n"));
            }
            Ok(vec![(None, catalogue::load_quiver(p)?)])
        }
        InputSpec::Family(name) => {
            if name != "a2n" {
                return Err(usage(format!("unknown family `{name}`")));
            }
            if let Some((a, b)) = cmd.sweep {
                (a..=b)
                    .map(|n| Ok((Some(n), catalogue::a2n_quiver(n)?)))
                    .collect()
            } else {
                let n = cmd
                    .n
                    .ok_or_else(|| usage("family input needs --n N or --sweep A..B"))?;
                Ok(vec![(None, catalogue::a2n_quiver(n)?)])
            }
        }
    }
}

fn oracle_budget() -> u64 {
    std::env::var("CMK_ORACLE_BUDGET")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_ORACLE_BUDGET)
}

fn labeled_matrix_table(t: &arquiver::ARMatrix) -> String {
    let cells: Vec<Vec<String>> = (0..t.matrix.rows())
        .map(|i| {
            (0..t.matrix.cols())
                .map(|j| t.matrix.get(i, j).to_string())
                .collect()
        })
        .collect();
    let row_label_width = t.row_labels.iter().map(|l| l.len()).max().unwrap_or(0);
    let col_widths: Vec<usize> = (0..t.col_labels.len())
        .map(|j| {
            cells
                .iter()
                .map(|row| row[j].len())
                .chain(std::iter::once(t.col_labels[j].len()))
                .max()
                .unwrap_or(1)
        })
        .collect();
    let mut out = String::new();
    out.push_str(&" ".repeat(row_label_width));
    for (j, label) in t.col_labels.iter().enumerate() {
        out.push_str(&format!("  {:>width$}", label, width = col_widths[j]));
    }
    out.push('\n');
    for (i, row_label) in t.row_labels.iter().enumerate() {
        out.push_str(&format!("{:<width$}", row_label, width = row_label_width));
        for j in 0..t.col_labels.len() {
            out.push_str(&format!("  {:>width$}", cells[i][j], width = col_widths[j]));
        }
        out.push('\n');
    }
    out
}

struct VerbResult {
    json: Value,
    table: String,
}

fn coefficients_note(spec: &CoefficientSpec) -> Option<&'static str> {
    match spec {
        CoefficientSpec::Symbolic => None,
        CoefficientSpec::FiniteField(_) => Some(INSTANTIATION_NOTE),
    }
}

fn k1_result(
    cmd: &Command,
    q: &ARQuiver,
    name: &str,
    p: &K1Presentation,
    extra: Value,
) -> VerbResult {
    let mut result = report::k1_value(p);
    if let Value::Object(ref mut map) = result {
        if let Some(note) = coefficients_note(&cmd.coefficients) {
            map.insert("note".to_string(), json!(note));
            // parts that stayed symbolic under instantiation
            let opaque = p.expression.opaque_atom_names();
            if !opaque.is_empty() {
                map.insert("opaque_parts".to_string(), json!(opaque));
            }
        }
        if let Value::Object(extra_map) = extra {
            for (k, v) in extra_map {
                map.insert(k, v);
            }
        }
    }
    let mut table = format!("{name} [{}] = {}\n", q.name, p.expression);
    for atom in &p.expression.summands {
        if let ktheory::Atom::Opaque { name, constraints } = atom {
            for c in constraints {
                table.push_str(&format!("  where {name}: {c}\n"));
            }
        }
    }
    table.push_str(&format!(
        "certificate: det T' = {} > 0 (tail map injective)\n",
        p.certificate.det_t_prime
    ));
    for s in &p.certificate.sequences {
        table.push_str(&format!("  {s}\n"));
    }
    if let Some(note) = coefficients_note(&cmd.coefficients) {
        table.push_str(&format!("note: {note}\n"));
    }
    VerbResult {
        json: report::envelope(q, result),
        table,
    }
}

fn eval_verb(cmd: &Command, q: &ARQuiver) -> Result<VerbResult, CliError> {
    match cmd.verb {
        Verb::K0Prime => {
            let g = ktheory::k0_prime(q)?;
            Ok(VerbResult {
                json: report::group_value(&g),
                table: format!("K0'(R) [{}] = {g}\n", q.name),
            })
        }
        Verb::K0Mf => {
            let r = ktheory::k0_mf(q, cmd.hypersurface)?;
            let mut json_val = report::group_value(&r.group);
            let mut table = format!("K0(MF) [{}] = {}\n", q.name, r.group);
            if let Some(w) = &r.warning {
                if let Value::Object(ref mut map) = json_val {
                    map.insert("warning".to_string(), json!(w));
                }
                table.push_str(&format!("warning: {w}\n"));
            }
            Ok(VerbResult {
                json: json_val,
                table,
            })
        }
        Verb::ArMatrix => {
            let (label, t) = if cmd.deleted {
                ("T'", arquiver::deleted_ar_matrix(q)?)
            } else {
                ("T", arquiver::ar_matrix(q)?)
            };
            Ok(VerbResult {
                json: report::envelope(q, json!({label: report::ar_matrix_value(&t)})),
                table: format!("{label} [{}]\n{}", q.name, labeled_matrix_table(&t)),
            })
        }
        Verb::Det => {
            let d = ktheory::det_deleted_matrix(q)?;
            let det_json = match num_traits::ToPrimitive::to_i64(&d.det) {
                Some(v) => json!(v),
                None => json!(d.det.to_string()),
            };
            Ok(VerbResult {
                json: json!({"det": det_json, "positive": d.positive}),
                table: format!(
                    "det T' [{}] = {} ({})\n",
                    q.name,
                    d.det,
                    if d.positive { "positive" } else { "not positive" }
                ),
            })
        }
        Verb::K1Prime => {
            let p = ktheory::k1_prime_presentation(q, &cmd.coefficients)?;
            Ok(k1_result(cmd, q, "K1'(R)", &p, json!({})))
        }
        Verb::K1Cat => {
            let e = ktheory::k1_additive_category(q, &cmd.coefficients)?;
            let mut result = json!({"expression": report::expression_value(&e)});
            if let Some(note) = coefficients_note(&cmd.coefficients) {
                result["note"] = json!(note);
                let opaque = e.opaque_atom_names();
                if !opaque.is_empty() {
                    result["opaque_parts"] = json!(opaque);
                }
            }
            let mut table = format!("K1(C^⊕) [{}] = {e}\n", q.name);
            for atom in &e.summands {
                if let ktheory::Atom::Opaque { name, constraints } = atom {
                    for c in constraints {
                        table.push_str(&format!("  where {name}: {c}\n"));
                    }
                }
            }
            if let Some(note) = coefficients_note(&cmd.coefficients) {
                table.push_str(&format!("note: {note}\n"));
            }
            Ok(VerbResult {
                json: report::envelope(q, result),
                table,
            })
        }
        Verb::K1Mf => {
            let p = ktheory::k1_mf_presentation(q, &cmd.coefficients)?;
            let mut extra = serde_json::Map::new();
            let mut verification_line = None;
            if let CoefficientSpec::FiniteField(qv) = cmd.coefficients {
                let inst = ktheory::instantiate(&p.expression, qv)?;
                extra.insert("instantiated".to_string(), report::finite_group_value(&inst));
                if cmd.verify_kernel {
                    let tp = arquiver::deleted_ar_matrix(q)?;
                    let coeffs = zmodule::FiniteAbelianGroup::new(vec![qv - 1])?;
                    let brute =
                        zmodule::brute_force_cokernel(&tp.matrix, &coeffs, oracle_budget())?;
                    let declared = ktheory::instantiate(&p.coker_part, qv)?;
                    let verified = brute.is_isomorphic(&declared);
                    extra.insert("kernel_verified".to_string(), json!(verified));
                    verification_line = Some(format!(
                        "kernel term verified by brute force: {}\n",
                        if verified { "agrees" } else { "DISAGREES" }
                    ));
                }
            } else if cmd.verify_kernel {
                return Err(usage("--verify-kernel needs --coefficients ff:Q"));
            }
            let mut r = k1_result(cmd, q, "K1(MF)", &p, Value::Object(extra));
            if let Some(line) = verification_line {
                r.table.push_str(&line);
            }
            Ok(r)
        }
        Verb::Localize => {
            let subset = cmd.subcat.clone().unwrap_or_default();
            let seq = localization::k0_localization_sequence(q, &subset)?;
            let view = localization::semiperfect_view(q, &subset)?;
            Ok(VerbResult {
                json: report::envelope(
                    q,
                    json!({
                        "k0_sequence": report::exact_sequence_value(&seq),
                        "semiperfect": view,
                    }),
                ),
                table: view,
            })
        }
        Verb::Filtration => {
            let ordering: Vec<String> = q.ids().iter().map(|s| s.to_string()).collect();
            let rep = localization::filtration_report(q, &ordering)?;
            let mut result = report::filtration_value(&rep);
            let mut table = format!("K1 filtration [{}]\n", q.name);
            let mut instantiated_steps = Vec::new();
            for (i, step) in rep.steps.iter().enumerate() {
                let mut line = format!(
                    "step {i} [add({})]: subquotient {} with K1 = {}",
                    step.subset_ids.join(", "),
                    step.subquotient,
                    step.k1_expression
                );
                if let CoefficientSpec::FiniteField(qv) = cmd.coefficients {
                    match ktheory::instantiate(&step.k1_expression, qv) {
                        Ok(g) => {
                            line.push_str(&format!("  (order {})", g.order()));
                            instantiated_steps.push(json!({"order": g.order()}));
                        }
                        Err(KTheoryError::NotInstantiable(names)) => {
                            line.push_str("  (opaque, not instantiated)");
                            instantiated_steps.push(json!({"refused": names}));
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
                table.push_str(&line);
                table.push('\n');
            }
            if let CoefficientSpec::FiniteField(_) = cmd.coefficients {
                result["instantiated_steps"] = json!(instantiated_steps);
                result["note"] = json!(INSTANTIATION_NOTE);
                table.push_str(&format!("note: {INSTANTIATION_NOTE}\n"));
            }
            Ok(VerbResult {
                json: report::envelope(q, result),
                table,
            })
        }
        Verb::Catalogue | Verb::Check => unreachable!("handled before evaluation"),
    }
}

fn execute(cmd: &Command) -> Result<Output, CliError> {
    match cmd.verb {
        Verb::Catalogue => {
            let inputs = resolve_inputs(cmd)?;
            if inputs.len() != 1 {
                return Err(usage("catalogue emits a single quiver; use --n"));
            }
            Ok(Output {
                text: catalogue::quiver_to_json(&inputs[0].1),
                exit: 0,
            })
        }
        Verb::Check => {
            let inputs = resolve_inputs(cmd)?;
            let (_, q) = &inputs[0];
            let report = arquiver::validate(q);
            let text = match cmd.format {
                Format::Json => {
                    let violations: Vec<String> =
                        report.violations.iter().map(|v| v.to_string()).collect();
                    format!(
                        "{}\n",
                        json!({"valid": report.is_valid(), "violations": violations})
                    )
                }
                Format::Table => format!("{report}\n"),
            };
            Ok(Output {
                text,
                exit: if report.is_valid() { 0 } else { 1 },
            })
        }
        _ => {
            let inputs = resolve_inputs(cmd)?;
            let sweeping = cmd.sweep.is_some();
            let mut text = String::new();
            for (param, q) in &inputs {
                let r = eval_verb(cmd, q)?;
                match cmd.format {
                    Format::Json => {
                        let line = if sweeping {
                            json!({"n": param, "result": r.json}).to_string()
                        } else {
                            r.json.to_string()
                        };
                        text.push_str(&line);
                        text.push('\n');
                    }
                    Format::Table => {
                        if sweeping {
                            text.push_str(&format!("--- n = {} ---\n", param.unwrap_or(0)));
                        }
                        text.push_str(&r.table);
                    }
                }
            }
            Ok(Output { text, exit: 0 })
        }
    }
}

/// Parses and runs, printing results to stdout (or `-o PATH`) and a single
/// diagnostic line to stderr on failure.
pub fn run(args: &[String]) -> i32 {
    let cmd = match parse(args) {
        Ok(cmd) => cmd,
        Err(e) => {
            eprintln!("cmk: {e}");
            return e.exit_code();
        }
    };
    match execute(&cmd) {
        Ok(out) => {
            if let Some(path) = &cmd.output {
                if let Err(e) = std::fs::write(path, out.text.as_bytes()) {
                    eprintln!("cmk: cannot write {}: {e}", path.display());
                    return 1;
                }
            } else {
                print!("{}", out.text);
            }
            out.exit
        }
        Err(e) => {
            eprintln!("cmk: {e}");
            e.exit_code()
        }
    }
}
