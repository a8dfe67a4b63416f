//! Single-case analysis, corpus sweeps and module fuzzing behind the CLI.
//!
//! A [`CaseSpec`] names a backend, a prime, a base field and `a`. Running it
//! produces a [`Report`] with the measured invariants, three multiplicity
//! vectors (Jordan form of `σ`, the invariant formula, and the lengths of
//! the arithmetic decomposition) and a map of named checks. Local cases are
//! retried with doubled precision when a computation runs out of digits.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::expr::{self, IntegerContext};
use crate::gmodule::{self, MultiplicityVector};
use crate::local::{self, make_base, make_k, ExtensionShape, LocalTower};
use crate::quadratic::{self, QuadTower};
use crate::structure::{self, Decision, DecompositionCertificate, ExtremalReport, InvariantProfile};
use crate::tower::{build_j, lift, reduce, KummerTower};

pub const SCHEMA: u32 = 1;
pub const DEFAULT_SEED: u64 = 0;
/// Coboundaries drawn per analysis for the Hilbert 90 round trip.
pub const H90_SAMPLES: usize = 4;
/// Primes searched when deciding extremal cases over `Q`.
pub const QUADRATIC_PRIME_LIMIT: u64 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Local,
    Quadratic,
}

/// Deliberate corruption used as a negative control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fault {
    /// Multiplies `σ(θ)` by `ζ_p`.
    Sigma,
    /// Reports precision loss at every working precision.
    Precision,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSpec {
    pub p: u64,
    pub backend: Backend,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<u64>,
    pub a: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<Fault>,
}

impl CaseSpec {
    pub fn local(ell: u64, p: u64, a: &str) -> Self {
        Self {
            p,
            backend: Backend::Local,
            ell: Some(ell),
            a: a.to_string(),
            precision: None,
            fault: None,
        }
    }

    pub fn quadratic(a: &str) -> Self {
        Self {
            p: 2,
            backend: Backend::Quadratic,
            ell: None,
            a: a.to_string(),
            precision: None,
            fault: None,
        }
    }

    /// SHA-256 of the canonical JSON form, in hex.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    fn label(&self) -> String {
        match self.backend {
            Backend::Local => format!("local ℓ={} p={} a={}", self.ell.unwrap_or(0), self.p, self.a),
            Backend::Quadratic => format!("quadratic a={}", self.a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckOutcome {
    Pass,
    Fail,
    Undecided,
}

impl From<bool> for CheckOutcome {
    fn from(b: bool) -> Self {
        if b {
            CheckOutcome::Pass
        } else {
            CheckOutcome::Fail
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Multiplicities {
    pub oracle: Option<MultiplicityVector>,
    pub theorem3: Option<MultiplicityVector>,
    pub arithmetic: Option<MultiplicityVector>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateSummary {
    pub dim_j: usize,
    /// Rows of the matrix of `σ` on `J` in the presentation basis.
    pub sigma: Vec<Vec<u64>>,
    pub dim_f_classes: usize,
    pub k_products_tested: u64,
    pub f_products_tested: u64,
    pub classes_enumerated: u64,
    pub f_classes_hit: usize,
    pub decomposition: Option<DecompositionCertificate>,
}

/// Deterministic work record; wall-clock time goes to the run log only.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Timing {
    pub precision_attempts: Vec<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub version: String,
    pub spec_hash: String,
    pub case: CaseSpec,
    pub seed: u64,
    pub precision: Option<u32>,
    pub shape: Option<ExtensionShape>,
    pub invariants: Option<InvariantProfile>,
    pub multiplicities: Multiplicities,
    pub certificate: Option<CertificateSummary>,
    pub extremal: Option<ExtremalReport>,
    pub witnesses: BTreeMap<String, String>,
    pub checks: BTreeMap<String, CheckOutcome>,
    pub failures: BTreeMap<String, String>,
    pub timing: Timing,
}

impl Report {
    fn new(spec: &CaseSpec, seed: u64) -> Self {
        Self {
            schema: SCHEMA,
            version: env!("CARGO_PKG_VERSION").to_string(),
            spec_hash: spec.content_hash(),
            case: spec.clone(),
            seed,
            precision: None,
            shape: None,
            invariants: None,
            multiplicities: Multiplicities::default(),
            certificate: None,
            extremal: None,
            witnesses: BTreeMap::new(),
            checks: BTreeMap::new(),
            failures: BTreeMap::new(),
            timing: Timing::default(),
        }
    }

    /// No check failed; undecided checks do not count as failures.
    pub fn passed(&self) -> bool {
        self.checks.values().all(|c| *c != CheckOutcome::Fail)
    }

    pub fn failed_checks(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|(_, c)| **c == CheckOutcome::Fail)
            .map(|(n, _)| n.clone())
            .collect()
    }

    fn set(&mut self, name: &str, outcome: CheckOutcome) {
        self.checks.insert(name.to_string(), outcome);
    }

    fn fail(&mut self, name: &str, why: impl ToString) {
        self.set(name, CheckOutcome::Fail);
        self.failures.insert(name.to_string(), why.to_string());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Why a case produced no report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunFailure {
    /// Bad input: parse errors, unsupported `(ℓ, p)`, `a` a `p`-th power.
    Config(Error),
    /// The backend could not finish, including after precision retries.
    Backend(Error),
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunFailure::Config(e) => write!(f, "configuration error: {e}"),
            RunFailure::Backend(e) => write!(f, "backend failure: {e}"),
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BACKEND: i32 = 3;

pub fn exit_code(result: &std::result::Result<Report, RunFailure>) -> i32 {
    match result {
        Ok(r) if r.passed() => EXIT_OK,
        Ok(_) => EXIT_CHECK_FAILED,
        Err(RunFailure::Config(_)) => EXIT_CONFIG,
        Err(RunFailure::Backend(_)) => EXIT_BACKEND,
    }
}

fn classify(e: Error) -> RunFailure {
    match e {
        Error::Parse(_)
        | Error::UnsupportedConfiguration(_)
        | Error::APthPower
        | Error::PreconditionViolated(_)
        | Error::TooLarge(_) => RunFailure::Config(e),
        _ => RunFailure::Backend(e),
    }
}

/// Runs one case. `default_precision` applies when the case sets none.
pub fn analyze(spec: &CaseSpec, seed: u64, default_precision: Option<u32>) -> std::result::Result<Report, RunFailure> {
    if !crate::fplin::is_prime(spec.p) {
        return Err(RunFailure::Config(Error::UnsupportedConfiguration(format!(
            "p = {} is not prime",
            spec.p
        ))));
    }
    match spec.backend {
        Backend::Local => analyze_local(spec, seed, default_precision),
        Backend::Quadratic => analyze_quadratic(spec, seed).map_err(classify),
    }
}

fn analyze_local(spec: &CaseSpec, seed: u64, default_precision: Option<u32>) -> std::result::Result<Report, RunFailure> {
    let ell = spec
        .ell
        .ok_or_else(|| RunFailure::Config(Error::UnsupportedConfiguration("local backend needs --ell".into())))?;
    let start = spec.precision.or(default_precision).unwrap_or(local::kummer::DEFAULT_PRECISION);
    if !(local::kummer::MIN_PRECISION..=local::kummer::MAX_PRECISION).contains(&start) {
        return Err(RunFailure::Config(Error::UnsupportedConfiguration(format!(
            "precision {start} outside {}..={}",
            local::kummer::MIN_PRECISION,
            local::kummer::MAX_PRECISION
        ))));
    }
    let parsed = expr::parse(&spec.a).map_err(RunFailure::Config)?;
    let mut attempts = Vec::new();
    let mut prec = start;
    loop {
        attempts.push(prec);
        match local_at(spec, ell, &parsed, prec, seed) {
            Ok(mut r) => {
                r.timing.precision_attempts = attempts;
                return Ok(r);
            }
            Err(Error::PrecisionExhausted(_)) if prec < local::kummer::MAX_PRECISION => {
                prec = (prec * 2).min(local::kummer::MAX_PRECISION)
            }
            Err(e) => return Err(classify(e)),
        }
    }
}

/// Turns a step error into a failed check; precision loss is passed up so
/// the caller can retry.
fn step<V>(r: &mut Report, name: &str, res: Result<V>) -> Result<Option<V>> {
    match res {
        Ok(v) => Ok(Some(v)),
        Err(e @ Error::PrecisionExhausted(_)) => Err(e),
        Err(e) => {
            r.fail(name, e);
            Ok(None)
        }
    }
}

fn local_at(spec: &CaseSpec, ell: u64, a_expr: &expr::Expr, prec: u32, seed: u64) -> Result<Report> {
    let mut r = Report::new(spec, seed);
    r.precision = Some(prec);
    let base = make_base(ell, spec.p, prec)?;
    let a = a_expr.eval(&base)?;
    let mut t = make_k(&base, &a)?;
    r.shape = Some(t.shape());
    match spec.fault {
        Some(Fault::Sigma) => t.inject_sigma_fault(),
        Some(Fault::Precision) => return Err(Error::PrecisionExhausted(prec)),
        None => {}
    }
    if step(&mut r, "construction", t.check_construction())?.is_some() {
        r.set("construction", CheckOutcome::Pass);
    }
    tower_invariants(&mut r, &t, seed)?;
    hilbert90_roundtrip(&mut r, &t, seed)?;

    let Some((pres, pcert)) = step(&mut r, "presentation", build_j(&t))? else {
        for name in ["theorem3_match", "krull_schmidt_match", "lemma2", "exact_sequence", "corollary1"] {
            r.set(name, CheckOutcome::Fail);
        }
        return Ok(r);
    };
    r.set("presentation", CheckOutcome::Pass);
    let Some((inv, ncert)) = step(&mut r, "invariants", structure::norm_group_profile(&pres))? else {
        for name in ["theorem3_match", "krull_schmidt_match", "lemma2", "exact_sequence", "corollary1"] {
            r.set(name, CheckOutcome::Fail);
        }
        return Ok(r);
    };
    if let Some(z) = &ncert.zeta_preimage {
        r.witnesses.insert("zeta_norm_preimage_class".into(), z.to_string());
    }
    let oracle = pres.module.jordan_multiplicities();
    r.multiplicities.oracle = Some(oracle.clone());

    if let Some(m) = step(&mut r, "theorem3_match", structure::theorem3_profile(&inv))? {
        r.set("theorem3_match", (m == oracle).into());
        if m != oracle {
            r.failures.insert("theorem3_match".into(), format!("predicted {m}, Jordan form {oracle}"));
        }
        r.multiplicities.theorem3 = Some(m);
    }

    let nk_rank = pres.norm_map.rank();
    r.set("norm_group_rank", (inv.dim_nk_mod_fp() == Some(nk_rank)).into());
    if let Some(ok) = step(&mut r, "norm_formula", structure::norm_formula_check(&t, &pres))? {
        r.set("norm_formula", ok.into());
    }

    let assembled = step(&mut r, "direct_sum", structure::assemble(&t, &pres, inv.upsilon))?;
    let mut delta_class = None;
    let mut decomposition = None;
    match assembled {
        Some((cert, x)) => {
            r.set("direct_sum", CheckOutcome::Pass);
            r.set("krull_schmidt_match", (cert.lengths == oracle).into());
            let covered = structure::socle_layers_covered(&pres.module, &cert.parts());
            r.set("socle_layers", covered.iter().all(|&b| b).into());
            if let Some(d) = &x.delta {
                delta_class = Some(reduce(&t, &pres, d)?.coords);
                r.witnesses.insert("delta".into(), t.k_text(d));
            }
            if let Some(l) = &x.lambda {
                r.witnesses.insert("zeta_norm_preimage".into(), t.k_text(l));
            }
            r.multiplicities.arithmetic = Some(cert.lengths.clone());
            decomposition = Some(cert);
        }
        None => r.set("krull_schmidt_match", CheckOutcome::Fail),
    }

    let l2 = structure::lemma2_check(&pres, inv.upsilon, delta_class.as_ref());
    r.set("lemma2", l2.holds.into());
    let es = structure::exact_sequence_check(&pres, inv.upsilon);
    r.set("exact_sequence", es.holds.into());
    let ext = structure::corollary1_local(&pres, inv.upsilon, &oracle);
    r.set("corollary1", ext.matches_profile.unwrap_or(false).into());
    r.extremal = Some(ext);
    lifting(&mut r, &t, &pres, inv.upsilon)?;

    r.certificate = Some(CertificateSummary {
        dim_j: pcert.dim_j,
        sigma: pres.module.sigma().to_rows(),
        dim_f_classes: pcert.dim_f_classes,
        k_products_tested: pcert.k_products_tested,
        f_products_tested: pcert.f_products_tested,
        classes_enumerated: ncert.classes_enumerated,
        f_classes_hit: ncert.f_classes_hit,
        decomposition,
    });
    r.invariants = Some(inv);
    Ok(r)
}

/// Lifts the generator of every Jordan block of length at least 2.
fn lifting(
    r: &mut Report,
    t: &LocalTower,
    pres: &crate::tower::JPresentation<crate::local::LocalElement>,
    upsilon: u8,
) -> Result<()> {
    if pres.p == 2 {
        r.set("lemma1", CheckOutcome::Undecided);
        return Ok(());
    }
    let mut lifted = 0;
    for part in pres.module.decompose_jordan().parts.iter().filter(|s| s.length >= 2) {
        let gamma = reduce(t, pres, &lift(t, pres, &part.generator))?;
        match structure::lemma1_lift(t, pres, &gamma, upsilon) {
            Ok(_) => lifted += 1,
            Err(Error::PreconditionViolated(_)) if part.length == 2 => {}
            Err(e @ Error::PrecisionExhausted(_)) => return Err(e),
            Err(e) => {
                r.fail("lemma1", e);
                return Ok(());
            }
        }
    }
    r.set("lemma1", if lifted > 0 { CheckOutcome::Pass } else { CheckOutcome::Undecided });
    Ok(())
}

fn tower_invariants<T: KummerTower>(r: &mut Report, t: &T, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5157);
    let p = t.p();
    for _ in 0..3 {
        let x = t.random_k(&mut rng);
        let y = t.random_k(&mut rng);
        let mult = t.k_eq(&t.sigma(&t.k_mul(&x, &y))?, &t.k_mul(&t.sigma(&x)?, &t.sigma(&y)?));
        let order = t.k_eq(&t.sigma_pow(&x, p)?, &x);
        let norm = t.f_eq(&t.norm(&t.sigma(&x)?)?, &t.norm(&x)?);
        if !(mult && order && norm) {
            r.fail("sigma_automorphism", format!("mult {mult}, order {order}, norm {norm}"));
            return Ok(());
        }
    }
    r.set("sigma_automorphism", CheckOutcome::Pass);
    Ok(())
}

/// `α = σ(x)/x` for seeded `x`, then `ω = H90(α)` and `σ(ω)/ω = α`.
fn hilbert90_roundtrip<T: KummerTower>(r: &mut Report, t: &T, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x4890);
    for _ in 0..H90_SAMPLES {
        let x = t.random_k(&mut rng);
        if t.k_is_zero(&x) {
            continue;
        }
        let alpha = t.sigma_minus_one(&x)?;
        match structure::hilbert90_solve(t, &alpha) {
            Ok(w) => {
                if !t.k_eq(&t.sigma_minus_one(&w)?, &alpha) {
                    r.fail("hilbert90_roundtrip", "σ(ω)/ω differs from α");
                    return Ok(());
                }
            }
            Err(e @ Error::PrecisionExhausted(_)) => return Err(e),
            Err(e) => {
                r.fail("hilbert90_roundtrip", e);
                return Ok(());
            }
        }
    }
    r.set("hilbert90_roundtrip", CheckOutcome::Pass);
    Ok(())
}

fn analyze_quadratic(spec: &CaseSpec, seed: u64) -> Result<Report> {
    if spec.p != 2 {
        return Err(Error::UnsupportedConfiguration("the quadratic backend has p = 2".into()));
    }
    if spec.fault.is_some() {
        return Err(Error::UnsupportedConfiguration("faults apply to the local backend".into()));
    }
    let a = expr::parse(&spec.a)?.eval(&IntegerContext)?;
    if a == 0 {
        return Err(Error::Parse("a must be nonzero".into()));
    }
    let t = QuadTower::new(a)?;
    let mut r = Report::new(spec, seed);
    let (inv, w) = structure::quadratic_profile(&t)?;
    let a = t.a_value();
    if let Some((u, v)) = &w {
        r.witnesses.insert("minus_one_norm".into(), format!("({u},{v})"));
        let check = u * u - quadratic::rat(a) * v * v == quadratic::rat(-1);
        r.set("upsilon_witness", check.into());
    } else {
        // no witness: -1 must fail a local condition
        let places = quadratic::relevant_places(&quadratic::rat(-1), &quadratic::rat(a))?;
        let mut obstructed = false;
        for v in places {
            obstructed |= quadratic::hilbert_symbol(&quadratic::rat(-1), &quadratic::rat(a), v)? == -1;
        }
        r.set("upsilon_witness", (obstructed == (inv.upsilon == 0)).into());
    }
    let ext = structure::corollary1_quadratic(&t, QUADRATIC_PRIME_LIMIT)?;
    let decided = ext.free != Decision::Undecided && ext.no_free_summand != Decision::Undecided;
    r.set("corollary1", if decided { CheckOutcome::Pass } else { CheckOutcome::Undecided });
    r.extremal = Some(ext);
    for name in ["theorem3_match", "krull_schmidt_match", "lemma2", "exact_sequence"] {
        r.set(name, CheckOutcome::Undecided);
    }
    hilbert90_roundtrip(&mut r, &t, seed)?;
    tower_invariants(&mut r, &t, seed)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x4155);
    let mut reciprocity = true;
    for _ in 0..8 {
        let c = rng.gen_range(-500i64..=500);
        if c == 0 {
            continue;
        }
        reciprocity &= quadratic::hilbert_product(&quadratic::rat(a), &quadratic::rat(c))? == 1;
    }
    r.set("hilbert_reciprocity", reciprocity.into());
    r.invariants = Some(inv);
    Ok(r)
}

// ---- logs, corpora, fuzzing ----

/// One line of the append-only run log.
#[derive(Debug, Clone, Serialize)]
pub struct LogEntry {
    pub spec_hash: String,
    pub case: CaseSpec,
    pub seed: u64,
    pub status: String,
    pub exit_code: i32,
    pub failed_checks: Vec<String>,
    pub error: Option<String>,
    pub elapsed_ms: u128,
}

impl LogEntry {
    pub fn new(spec: &CaseSpec, seed: u64, result: &std::result::Result<Report, RunFailure>, elapsed_ms: u128) -> Self {
        let code = exit_code(result);
        let status = match code {
            EXIT_OK => "pass",
            EXIT_CHECK_FAILED => "fail",
            EXIT_CONFIG => "config_error",
            _ => "backend_error",
        };
        Self {
            spec_hash: spec.content_hash(),
            case: spec.clone(),
            seed,
            status: status.into(),
            exit_code: code,
            failed_checks: result.as_ref().map(|r| r.failed_checks()).unwrap_or_default(),
            error: result.as_ref().err().map(|e| e.to_string()),
            elapsed_ms,
        }
    }
}

/// Serializes appends from worker threads.
pub struct RunLog {
    file: Mutex<File>,
}

impl RunLog {
    pub fn open(path: &Path) -> std::io::Result<Self> {
        let file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { file: Mutex::new(file) })
    }

    pub fn append(&self, entry: &LogEntry) -> std::io::Result<()> {
        let line = serde_json::to_string(entry).expect("log entry serializes");
        let mut f = self.file.lock().expect("log lock");
        writeln!(f, "{line}")
    }
}

/// Runs a case and times it.
pub fn run_logged(
    spec: &CaseSpec,
    seed: u64,
    default_precision: Option<u32>,
    log: Option<&RunLog>,
) -> std::io::Result<(std::result::Result<Report, RunFailure>, LogEntry)> {
    let start = Instant::now();
    let result = analyze(spec, seed, default_precision);
    let entry = LogEntry::new(spec, seed, &result, start.elapsed().as_millis());
    if let Some(log) = log {
        log.append(&entry)?;
    }
    Ok((result, entry))
}

/// Reads a corpus of JSON lines; blank lines and `#` comments are skipped.
pub fn read_corpus(path: &Path) -> std::result::Result<Vec<CaseSpec>, RunFailure> {
    let file = File::open(path).map_err(|e| RunFailure::Config(Error::Parse(format!("{}: {e}", path.display()))))?;
    parse_corpus(BufReader::new(file))
}

pub fn parse_corpus(reader: impl BufRead) -> std::result::Result<Vec<CaseSpec>, RunFailure> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| RunFailure::Config(Error::Parse(e.to_string())))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let spec = serde_json::from_str(line)
            .map_err(|e| RunFailure::Config(Error::Parse(format!("corpus line {}: {e}", i + 1))))?;
        out.push(spec);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseOutcome {
    pub spec_hash: String,
    pub label: String,
    pub status: String,
    pub exit_code: i32,
    pub failed_checks: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub schema: u32,
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    pub config_errors: usize,
    pub backend_errors: usize,
    pub outcomes: Vec<CaseOutcome>,
}

impl VerifySummary {
    pub fn exit_code(&self) -> i32 {
        if self.backend_errors > 0 {
            EXIT_BACKEND
        } else if self.config_errors > 0 {
            EXIT_CONFIG
        } else if self.failed > 0 {
            EXIT_CHECK_FAILED
        } else {
            EXIT_OK
        }
    }
}

/// Runs every case on the rayon pool, in corpus order in the summary.
pub fn verify(
    cases: &[CaseSpec],
    seed: u64,
    default_precision: Option<u32>,
    log: Option<&RunLog>,
) -> std::io::Result<(VerifySummary, Vec<std::result::Result<Report, RunFailure>>)> {
    let runs: Vec<_> = cases
        .par_iter()
        .map(|c| run_logged(c, seed, default_precision, log))
        .collect::<std::io::Result<_>>()?;
    let mut outcomes = Vec::new();
    let mut results = Vec::new();
    let (mut passed, mut failed, mut config_errors, mut backend_errors) = (0, 0, 0, 0);
    for (c, (res, entry)) in cases.iter().zip(runs) {
        match entry.exit_code {
            EXIT_OK => passed += 1,
            EXIT_CHECK_FAILED => failed += 1,
            EXIT_CONFIG => config_errors += 1,
            _ => backend_errors += 1,
        }
        outcomes.push(CaseOutcome {
            spec_hash: entry.spec_hash,
            label: c.label(),
            status: entry.status,
            exit_code: entry.exit_code,
            failed_checks: entry.failed_checks,
        });
        results.push(res);
    }
    Ok((
        VerifySummary {
            schema: SCHEMA,
            cases: cases.len(),
            passed,
            failed,
            config_errors,
            backend_errors,
            outcomes,
        },
        results,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RandomSummary {
    pub schema: u32,
    pub p: u64,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub failures: usize,
    pub first_failure: Option<usize>,
}

/// Largest dimension accepted by [`random_suite`].
pub const MAX_RANDOM_DIM: usize = 32;

/// Random profile, random module with that profile, Jordan decomposition,
/// direct-sum and round-trip checks, and `N = (σ - 1)^(p-1)`.
pub fn random_suite(p: u64, dim: usize, trials: usize, seed: u64) -> Result<RandomSummary> {
    if !crate::fplin::is_prime(p) {
        return Err(Error::UnsupportedConfiguration(format!("p = {p} is not prime")));
    }
    if dim == 0 || dim > MAX_RANDOM_DIM {
        return Err(Error::UnsupportedConfiguration(format!("dim must be in 1..={MAX_RANDOM_DIM}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs: Vec<(MultiplicityVector, u64)> = (0..trials)
        .map(|_| {
            let profile = gmodule::random_profile(p, dim, &mut rng);
            (profile, rng.gen())
        })
        .collect();
    let ok: Vec<bool> = jobs
        .par_iter()
        .map(|(profile, s)| {
            let m = gmodule::random_module(p, profile, *s);
            let dec = m.decompose_jordan();
            let norm_identity = m.nilpotent().pow(p - 1).map(|n| n == m.norm_operator()).unwrap_or(false);
            m.verify_direct_sum(&dec.parts)
                && dec.profile(p) == *profile
                && m.jordan_multiplicities() == *profile
                && norm_identity
        })
        .collect();
    let failures = ok.iter().filter(|b| !**b).count();
    Ok(RandomSummary {
        schema: SCHEMA,
        p,
        dim,
        trials,
        seed,
        failures,
        first_failure: ok.iter().position(|b| !*b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_hash_is_stable_and_field_sensitive() {
        let a = CaseSpec::local(7, 3, "7");
        assert_eq!(a.content_hash(), CaseSpec::local(7, 3, "7").content_hash());
        assert_ne!(a.content_hash(), CaseSpec::local(7, 3, "3").content_hash());
        assert_eq!(a.content_hash().len(), 64);
    }

    #[test]
    fn corpus_lines() {
        let text = "# comment\n\n{\"p\":2,\"backend\":\"quadratic\",\"a\":\"2\"}\n";
        let cases = parse_corpus(text.as_bytes()).unwrap();
        assert_eq!(cases, vec![CaseSpec::quadratic("2")]);
        assert!(parse_corpus("{\"p\":2}".as_bytes()).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&analyze(&CaseSpec::local(5, 3, "2"), 0, None)), EXIT_CONFIG);
        assert_eq!(exit_code(&analyze(&CaseSpec::local(3, 2, "4"), 0, None)), EXIT_CONFIG);
        assert_eq!(exit_code(&analyze(&CaseSpec::local(3, 2, "pi^"), 0, None)), EXIT_CONFIG);
        assert_eq!(exit_code(&analyze(&CaseSpec::quadratic("pi"), 0, None)), EXIT_CONFIG);
        assert_eq!(exit_code(&analyze(&CaseSpec::local(7, 3, "7"), 0, Some(16))), EXIT_OK);
    }

    #[test]
    fn random_suite_is_deterministic() {
        let a = random_suite(3, 9, 20, 5).unwrap();
        assert_eq!(a, random_suite(3, 9, 20, 5).unwrap());
        assert_eq!(a.failures, 0);
        assert_eq!(random_suite(2, 4, 0, 1).unwrap().failures, 0);
        assert!(random_suite(2, 33, 1, 1).is_err());
    }
}
