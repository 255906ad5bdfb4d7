//! Subcommand implementations.
//!
//! Each command returns a [`CmdOutput`]: one JSON report (the machine
//! interface), a plain-text rendering of the same data, and a pass flag
//! that drives the exit code. All randomness flows from the command's
//! seed, so reports are byte-stable for fixed arguments.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use tsketch::boolfn::{Family, SubsetMask};
use tsketch::circuit::{compile_or_sketch, compile_threshold_sketch, Circuit};
use tsketch::fourier::FourierSpectrum;
use tsketch::rng;
use tsketch::sketch::{
    choose_k_fourier, choose_k_or, pdt_min_depth, sample_fourier_sketch, sample_or_sketch,
    table_protocol, InnerFunction, ParitySketch, SketchFile,
};
use tsketch::verify::{
    ccz_plus_state, channel_error_report, exact_channel_tiny, max_pauli_overlap, simulate_basis,
    stabilizer_nullity, t_state, BitState, Complex64, SketchGenerator, StateVector,
};
use tsketch::{rational_to_f64, Rational};

use crate::fnspec::{FunctionSpec, Source};

/// Result of one subcommand, before formatting.
pub struct CmdOutput {
    pub report: Value,
    pub text: String,
    pub pass: bool,
    /// Raw circuit text, set by synthesize for `--format qasm-like`.
    pub qasm: Option<String>,
}

impl CmdOutput {
    fn new(report: Value, text: String, pass: bool) -> Self {
        CmdOutput { report, text, pass, qasm: None }
    }
}

/// Accumulates named invariant checks. Hard failures flip the exit code;
/// warnings are recorded but never fail the run.
struct Checks {
    list: Vec<Value>,
    warnings: Vec<String>,
    pass: bool,
}

impl Checks {
    fn new() -> Self {
        Checks { list: Vec::new(), warnings: Vec::new(), pass: true }
    }

    fn hard(&mut self, name: &str, ok: bool, detail: String) {
        self.list.push(json!({ "name": name, "pass": ok, "detail": detail }));
        self.pass &= ok;
    }

    fn warn(&mut self, message: String) {
        self.warnings.push(message);
    }

    fn render(&self, out: &mut String) {
        out.push_str("checks:\n");
        for c in &self.list {
            let _ = writeln!(
                out,
                "  [{}] {}: {}",
                if c["pass"].as_bool() == Some(true) { "PASS" } else { "FAIL" },
                c["name"].as_str().unwrap_or("?"),
                c["detail"].as_str().unwrap_or("")
            );
        }
        for w in &self.warnings {
            let _ = writeln!(out, "  [warn] {w}");
        }
    }
}

fn status_line(pass: bool) -> &'static str {
    if pass {
        "status: PASS\n"
    } else {
        "status: FAIL\n"
    }
}

fn ratio_json(r: &Rational) -> Value {
    json!({ "exact": r.to_string(), "approx": rational_to_f64(r) })
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

// ---------------------------------------------------------------- analyze

pub fn analyze(spec: &FunctionSpec, epsilon: Option<f64>, top: usize) -> Result<CmdOutput> {
    let src = spec.resolve()?;
    let label = src.label();
    let f = spec.function()?;
    let n = f.n();
    let spectrum = FourierSpectrum::of(&f);
    let one_norm = spectrum.one_norm();

    let mut coeffs: Vec<(SubsetMask, i32)> =
        spectrum.support().map(|s| (s, spectrum.numerator(s))).collect();
    coeffs.sort_by_key(|(s, num)| (std::cmp::Reverse(num.abs()), s.0));
    let shown: Vec<Value> = coeffs
        .iter()
        .take(top)
        .map(|(s, num)| {
            json!({
                "subset": s.to_hex(),
                "weight": s.weight(),
                "numerator": num,
                "coefficient": ratio_json(&spectrum.coefficient(*s)),
            })
        })
        .collect();

    let mut report = Map::new();
    report.insert("family".into(), json!(label));
    report.insert("n".into(), json!(n));
    report.insert("support_size".into(), json!(coeffs.len()));
    report.insert("one_norm".into(), ratio_json(&one_norm));
    if let Some(eps) = epsilon {
        report.insert("epsilon".into(), json!(eps));
        report.insert("k_or".into(), json!(choose_k_or(eps)?));
        report.insert("k_fourier".into(), json!(choose_k_fourier(&one_norm, eps)?));
    }
    if n <= 6 {
        report.insert("pdt_depth".into(), json!(pdt_min_depth(&f)?));
    }
    report.insert("top_coefficients".into(), Value::Array(shown.clone()));

    let mut text = format!("analyze {label}\n");
    let _ = writeln!(text, "n: {n}");
    let _ = writeln!(text, "spectral support size: {}", coeffs.len());
    let _ = writeln!(text, "one-norm: {} (~{})", one_norm, rational_to_f64(&one_norm));
    if let Some(eps) = epsilon {
        let _ = writeln!(text, "epsilon: {eps}");
        let _ = writeln!(text, "k_or: {}", report["k_or"]);
        let _ = writeln!(text, "k_fourier: {}", report["k_fourier"]);
    }
    if let Some(d) = report.get("pdt_depth") {
        let _ = writeln!(text, "parity decision tree depth: {d}");
    }
    let _ = writeln!(text, "top coefficients ({} of {}):", shown.len(), coeffs.len());
    for c in &shown {
        let _ = writeln!(
            text,
            "  {}  {}  (~{})",
            c["subset"].as_str().unwrap_or("?"),
            c["coefficient"]["exact"].as_str().unwrap_or("?"),
            c["coefficient"]["approx"]
        );
    }
    text.push_str(status_line(true));

    Ok(CmdOutput::new(Value::Object(report), text, true))
}

// ------------------------------------------------------------- synthesize

pub struct SynthesizeOpts {
    pub epsilon: Option<f64>,
    pub k: Option<u32>,
    pub reduction: crate::Reduction,
    pub batch: u32,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Circuit files as JSON instead of the textual gate list.
    pub json_circuits: bool,
}

/// Either reduction, with whatever context sampling needs kept alive.
enum Sampler {
    UniformOr { n: u32 },
    Spectral { dist: tsketch::fourier::SamplingDistribution },
}

/// The uniform-subset reduction has the OR target baked in; `auto` selects
/// it for the OR family and spectral sampling for everything else.
fn wants_uniform(src: &Source, reduction: crate::Reduction) -> Result<bool> {
    let is_or = matches!(src, Source::Family(Family::Or { .. }));
    match reduction {
        crate::Reduction::Auto => Ok(is_or),
        crate::Reduction::Spectral => Ok(false),
        crate::Reduction::Uniform if is_or => Ok(true),
        crate::Reduction::Uniform => {
            bail!("--reduction uniform applies only to --family or")
        }
    }
}

pub fn synthesize(spec: &FunctionSpec, opts: &SynthesizeOpts) -> Result<CmdOutput> {
    let src = spec.resolve()?;
    let label = src.label();
    let n = src.arity();

    // The uniform OR reduction never materializes a table, so it scales
    // past the dense cap; the spectral reduction samples the spectrum of
    // the materialized function.
    let (sampler, hash, k) = if wants_uniform(&src, opts.reduction)? {
        let k = resolve_k(opts.k, opts.epsilon, None)?;
        let hash = if n <= 16 {
            json!({ "kind": "table", "sha256": Family::Or { n }.build()?.table_sha256() })
        } else {
            json!({ "kind": "label", "sha256": sha256_hex(label.as_bytes()) })
        };
        (Sampler::UniformOr { n }, hash, k)
    } else {
        let f = spec.function()?;
        let spectrum = FourierSpectrum::of(&f);
        let k = resolve_k(opts.k, opts.epsilon, Some(&spectrum.one_norm()))?;
        let hash = json!({ "kind": "table", "sha256": f.table_sha256() });
        (Sampler::Spectral { dist: spectrum.sampling_distribution()? }, hash, k)
    };

    if let Some(dir) = &opts.out {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
    }

    let mut circuits = Vec::with_capacity(opts.batch as usize);
    let mut qasm = String::new();
    let mut inline: Option<(String, SketchFile)> = None;
    for i in 0..u64::from(opts.batch) {
        let mut rng = rng::stream(opts.seed, i);
        let sk = match &sampler {
            Sampler::UniformOr { n } => sample_or_sketch(*n, k, &mut rng)?,
            Sampler::Spectral { dist } => sample_fourier_sketch(dist, k, &mut rng)?,
        };
        let c = compile_sketch(&sk)?;
        let tc = c.t_count();
        let mut entry = Map::new();
        entry.insert("index".into(), json!(i));
        entry.insert("wires".into(), json!(c.wires()));
        entry.insert("gates".into(), json!(c.len()));
        entry.insert("t_count".into(), serde_json::to_value(tc)?);
        if let Some(dir) = &opts.out {
            let (circ_name, payload) = if opts.json_circuits {
                (format!("circuit_{i:04}.json"), c.to_json())
            } else {
                (format!("circuit_{i:04}.tsk"), c.to_text())
            };
            let sk_name = format!("sketch_{i:04}.json");
            fs::write(dir.join(&circ_name), payload)?;
            fs::write(dir.join(&sk_name), SketchFile::new(&sk, Some(opts.seed)).to_json())?;
            entry.insert("file".into(), json!(circ_name));
            entry.insert("sketch_file".into(), json!(sk_name));
        } else if opts.batch == 1 {
            inline = Some((c.to_text(), SketchFile::new(&sk, Some(opts.seed))));
        }
        let _ = writeln!(qasm, "# circuit {i}");
        qasm.push_str(&c.to_text());
        circuits.push(Value::Object(entry));
    }

    let mut report = Map::new();
    report.insert(
        "reduction".into(),
        json!(match sampler {
            Sampler::UniformOr { .. } => "uniform_or",
            Sampler::Spectral { .. } => "spectral",
        }),
    );
    report.insert("family".into(), json!(label));
    report.insert("n".into(), json!(n));
    if let Some(eps) = opts.epsilon {
        report.insert("epsilon".into(), json!(eps));
    }
    report.insert("k".into(), json!(k));
    report.insert("seed".into(), json!(opts.seed));
    report.insert("batch".into(), json!(opts.batch));
    report.insert("target_hash".into(), hash);
    report.insert("circuits".into(), Value::Array(circuits.clone()));
    if let Some((text, sk)) = &inline {
        report.insert("circuit_text".into(), json!(text));
        report.insert("sketch".into(), serde_json::to_value(sk)?);
    }
    // The manifest stays location-independent (file names are relative), so
    // identical seeds give byte-identical manifests wherever they land.
    if let Some(dir) = &opts.out {
        fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&Value::Object(report.clone()))?,
        )?;
    }

    let mut text = format!("synthesize {label} (n = {n})\n");
    let _ = writeln!(text, "reduction: {}", report["reduction"].as_str().unwrap_or("?"));
    let _ = writeln!(text, "k: {k}");
    let _ = writeln!(text, "seed: {}", opts.seed);
    let _ = writeln!(text, "target hash ({}): {}", report["target_hash"]["kind"]
        .as_str().unwrap_or("?"), report["target_hash"]["sha256"].as_str().unwrap_or("?"));
    for c in &circuits {
        let _ = writeln!(
            text,
            "circuit {}: wires {}, gates {}, T-count {}",
            c["index"], c["wires"], c["gates"], c["t_count"]["t_count"]
        );
    }
    if let Some(dir) = &opts.out {
        let _ = writeln!(text, "wrote {} circuit(s) and manifest.json to {}", opts.batch,
            dir.display());
    }
    text.push_str(status_line(true));

    let mut out = CmdOutput::new(Value::Object(report), text, true);
    out.qasm = Some(qasm);
    Ok(out)
}

fn resolve_k(k: Option<u32>, epsilon: Option<f64>, one_norm: Option<&Rational>) -> Result<u32> {
    if let Some(k) = k {
        return Ok(k);
    }
    let Some(eps) = epsilon else {
        bail!("either --k or --epsilon is required");
    };
    Ok(match one_norm {
        None => choose_k_or(eps)?,
        Some(norm) => choose_k_fourier(norm, eps)?,
    })
}

/// Dispatches on the inner function to the matching compiler.
fn compile_sketch(sk: &ParitySketch) -> Result<Circuit> {
    match &sk.inner {
        InnerFunction::Or => Ok(compile_or_sketch(sk)?),
        InnerFunction::SignedThreshold { .. } => Ok(compile_threshold_sketch(sk)?),
        other => bail!("no compiler for inner function {other:?}"),
    }
}

// ----------------------------------------------------------------- verify

pub struct VerifyOpts {
    pub epsilon: Option<f64>,
    pub k: Option<u32>,
    pub reduction: crate::Reduction,
    pub trials: u64,
    pub seed: u64,
}

pub fn verify_generator(spec: &FunctionSpec, opts: &VerifyOpts) -> Result<CmdOutput> {
    let src = spec.resolve()?;
    let f_store;
    let dist_store;
    let (gen, k) = if wants_uniform(&src, opts.reduction)? {
        let k = resolve_k(opts.k, opts.epsilon, None)?;
        (SketchGenerator::UniformOr { n: src.arity(), k }, k)
    } else {
        f_store = spec.function()?;
        let spectrum = FourierSpectrum::of(&f_store);
        let k = resolve_k(opts.k, opts.epsilon, Some(&spectrum.one_norm()))?;
        dist_store = spectrum.sampling_distribution()?;
        (SketchGenerator::Spectral { f: &f_store, dist: &dist_store, k }, k)
    };
    let n = gen.n();
    let label = gen.label();
    let mut checks = Checks::new();

    // Past arity 16 the per-input loop switches to a declared input subset:
    // zero, every single-bit input, the all-ones input.
    let subset: Vec<u32>;
    let inputs = if n <= 16 {
        None
    } else {
        let mut xs: Vec<u32> = vec![0, (1u32 << n).wrapping_sub(1)];
        xs.extend((0..n).map(|i| 1u32 << i));
        xs.sort_unstable();
        xs.dedup();
        checks.warn(format!(
            "domain 2^{n} exceeds the exhaustive cap (2^16); checked {} declared inputs",
            xs.len()
        ));
        subset = xs;
        Some(subset.as_slice())
    };

    let report = channel_error_report(&gen, opts.trials, opts.seed, inputs)?;
    let bound = report.analytic_bound;
    let cert = report.diamond_certificate;

    checks.hard(
        "max_exact_error_le_per_input_bound",
        report.max_exact_error <= bound / 4.0 + 1e-12,
        format!("max exact {} vs bound {}", report.max_exact_error, bound / 4.0),
    );
    checks.hard(
        "certificate_le_analytic_bound",
        cert <= bound + 1e-12,
        format!("certificate {cert} vs analytic {bound}"),
    );
    if report.flagged.is_empty() {
        checks.hard(
            "monte_carlo_within_wilson_intervals",
            true,
            format!("all {} inputs agree at {} trials", report.rows.len(), opts.trials),
        );
    } else {
        // Flagged rows are expected on ~1% of inputs even when correct; the
        // exact oracle stays authoritative, so this never fails the run.
        checks.warn(format!("empirical estimate outside Wilson interval at {:?}", report.flagged));
    }

    if n <= 3 && k <= 3 {
        let mut max_dev = 0.0f64;
        let mut worst = 0.0f64;
        for x in 0..1u32 << n {
            let basis = StateVector::basis(n + 1, u64::from(x))?;
            let (_, dist) = exact_channel_tiny(&gen, &basis)?;
            let exact = rational_to_f64(&gen.exact_error(x)?);
            max_dev = max_dev.max((dist - exact).abs());
            worst = worst.max(dist);
        }
        let dim = 1usize << (n + 1);
        let amp = Complex64::new(1.0 / ((dim / 2) as f64).sqrt(), 0.0);
        let amps =
            (0..dim).map(|i| if i < dim / 2 { amp } else { Complex64::ZERO }).collect();
        let superposition = StateVector::from_amplitudes(n + 1, amps)?;
        let (_, sup_dist) = exact_channel_tiny(&gen, &superposition)?;
        checks.hard(
            "tiny_channel_basis_distance_matches_exact_error",
            max_dev <= 1e-9,
            format!("max |trace distance - exact error| = {max_dev:.3e}"),
        );
        checks.hard(
            "tiny_channel_within_certificate",
            worst <= cert + 1e-12 && sup_dist <= cert + 1e-12,
            format!("basis worst {worst}, superposition {sup_dist}, certificate {cert}"),
        );
    }

    let sk = gen.sample(&mut rng::stream(opts.seed, 0))?;
    let circuit = compile_sketch(&sk)?;
    let wires = circuit.wires();
    if n <= 16 && wires <= 20 {
        let mut ok = true;
        let mut detail = format!("exhaustive over 2^{n} inputs x 2 target values");
        'all: for x in 0..1u32 << n {
            for b in 0..2u64 {
                let input = BitState::from_index(wires, u64::from(x) | b << n)?;
                let out = simulate_basis(&circuit, &input)?;
                let want = u64::from(sk.eval(x)) ^ b;
                let ancillas_clean =
                    wires == n + 1 || out.extract(n + 1, wires - n - 1) == 0;
                if out.extract(0, n) != u64::from(x)
                    || u64::from(out.get(n)) != want
                    || !ancillas_clean
                {
                    ok = false;
                    detail = format!("compiled sample diverges at x = {x:#x}, b = {b}");
                    break 'all;
                }
            }
        }
        checks.hard("compiled_sample_matches_sketch", ok, detail);
    } else {
        checks.warn(format!(
            "functional spot check skipped: {wires} wires exceeds the simulation cap"
        ));
    }

    let mut channel = serde_json::to_value(&report)?;
    if report.rows.len() > 256 {
        let kept: Vec<Value> = channel["rows"]
            .as_array()
            .map(|rows| {
                rows.iter()
                    .filter(|r| r["flagged"].as_bool() == Some(true))
                    .cloned()
                    .collect()
            })
            .unwrap_or_default();
        channel["rows_omitted"] = json!(report.rows.len() - kept.len());
        channel["rows"] = Value::Array(kept);
    }

    let mut text = format!("verify {label} n={n} k={k}\n");
    let _ = writeln!(text, "trials per input: {}", opts.trials);
    let _ = writeln!(text, "analytic bound: {bound}");
    let _ = writeln!(text, "diamond certificate: {cert}");
    let _ = writeln!(text, "max exact error: {}", report.max_exact_error);
    checks.render(&mut text);
    text.push_str(status_line(checks.pass));

    let out = json!({
        "mode": "generator",
        "generator": label,
        "n": n,
        "k": k,
        "trials": opts.trials,
        "seed": opts.seed,
        "channel": channel,
        "checks": checks.list,
        "warnings": checks.warnings,
    });
    Ok(CmdOutput::new(out, text, checks.pass))
}

pub fn verify_circuit(circuit_path: &Path, sketch_path: Option<&Path>) -> Result<CmdOutput> {
    let raw = fs::read_to_string(circuit_path)
        .with_context(|| format!("reading circuit {}", circuit_path.display()))?;
    let circuit = if raw.trim_start().starts_with('{') {
        Circuit::from_json(&raw)?
    } else {
        Circuit::from_text(&raw)?
    };
    let wires = circuit.wires();
    if wires > 20 {
        bail!("circuit has {wires} wires; basis verification caps at 20");
    }
    let regs = circuit.registers();
    let input = regs
        .iter()
        .find(|r| r.name == "input")
        .context("circuit file declares no `input` register")?
        .clone();
    let target = regs
        .iter()
        .find(|r| r.name == "target")
        .context("circuit file declares no `target` register")?
        .clone();
    if target.len != 1 {
        bail!("`target` register must be a single wire, got {}", target.len);
    }
    let n = input.len;

    let sketch = match sketch_path {
        None => None,
        Some(p) => {
            let sk = SketchFile::from_json(
                &fs::read_to_string(p).with_context(|| format!("reading sketch {}", p.display()))?,
            )?
            .into_sketch()?;
            if sk.n != n {
                bail!("sketch arity {} does not match circuit input register {n}", sk.n);
            }
            Some(sk)
        }
    };

    // Every wire outside input/target must come back to zero.
    let scratch_wires: Vec<u32> = (0..wires)
        .filter(|w| !(input.start..input.start + input.len).contains(w) && *w != target.start)
        .collect();

    let mut checks = Checks::new();
    let mut input_ok = true;
    let mut scratch_ok = true;
    let mut b_flip_ok = true;
    let mut sketch_ok = true;
    let mut first_fail: Option<String> = None;
    for x in 0..1u64 << n {
        let mut g = false;
        for b in 0..2u64 {
            let mut s = BitState::zeros(wires);
            s.set_range(input.start, input.len, x);
            s.set_range(target.start, 1, b);
            let out = match simulate_basis(&circuit, &s) {
                Ok(out) => out,
                // Compiled sketches are classical permutations; anything
                // else cannot be certified here and fails outright.
                Err(err) => return Ok(circuit_unverifiable(circuit_path, &err.to_string())),
            };
            let t = out.get(target.start);
            if b == 0 {
                g = t;
            } else if t == g {
                b_flip_ok = false;
            }
            input_ok &= out.extract(input.start, input.len) == x;
            scratch_ok &= scratch_wires.iter().all(|w| !out.get(*w));
            if let Some(sk) = &sketch {
                if b == 0 && g != sk.eval(x as u32) {
                    sketch_ok = false;
                }
            }
            if first_fail.is_none() && !(input_ok && scratch_ok && b_flip_ok && sketch_ok) {
                first_fail = Some(format!("x = {x:#x}, b = {b}"));
            }
        }
    }
    let at = |ok: bool| match (&first_fail, ok) {
        (Some(loc), false) => format!("first failure at {loc}"),
        _ => format!("all 2^{n} inputs x 2 target values"),
    };
    checks.hard("input_register_preserved", input_ok, at(input_ok));
    checks.hard("scratch_wires_restored", scratch_ok, at(scratch_ok));
    checks.hard("target_flips_with_b", b_flip_ok, at(b_flip_ok));
    if sketch.is_some() {
        checks.hard("matches_sketch_evaluation", sketch_ok, at(sketch_ok));
    }

    let tc = circuit.t_count();
    let mut text = format!("verify circuit {}\n", circuit_path.display());
    let _ = writeln!(text, "wires: {wires} (input {}, target wire {})", n, target.start);
    let _ = writeln!(text, "T-count: {}", tc.t_count);
    checks.render(&mut text);
    text.push_str(status_line(checks.pass));

    let out = json!({
        "mode": "circuit",
        "file": circuit_path.display().to_string(),
        "sketch_file": sketch_path.map(|p| p.display().to_string()),
        "wires": wires,
        "n": n,
        "t_count": serde_json::to_value(tc)?,
        "checks": checks.list,
        "warnings": checks.warnings,
    });
    Ok(CmdOutput::new(out, text, checks.pass))
}

fn circuit_unverifiable(path: &Path, why: &str) -> CmdOutput {
    let mut checks = Checks::new();
    checks.hard("classically_simulable", false, why.to_string());
    let mut text = format!("verify circuit {}\n", path.display());
    checks.render(&mut text);
    text.push_str(status_line(false));
    let out = json!({
        "mode": "circuit",
        "file": path.display().to_string(),
        "checks": checks.list,
        "warnings": checks.warnings,
    });
    CmdOutput::new(out, text, false)
}

// ---------------------------------------------------------------- nullity

pub fn nullity(state: &StateVector, source: String) -> Result<CmdOutput> {
    let report = stabilizer_nullity(state)?;
    let overlap = max_pauli_overlap(state)?;

    let witnesses: Vec<Value> = report
        .witnesses
        .iter()
        .take(64)
        .map(|p| {
            let pauli: String = (0..report.n)
                .map(|w| match (p.x_mask >> w & 1, p.z_mask >> w & 1) {
                    (0, 0) => 'I',
                    (1, 0) => 'X',
                    (0, 1) => 'Z',
                    _ => 'Y',
                })
                .collect();
            json!({
                "sign": p.sign,
                "pauli": pauli,
                "x_mask": p.x_mask,
                "z_mask": p.z_mask,
            })
        })
        .collect();

    let mut text = format!("nullity of {source}\n");
    let _ = writeln!(text, "qubits: {}", report.n);
    let _ = writeln!(text, "stabilizer count: {}", report.stabilizer_count);
    let _ = writeln!(text, "nullity: {}", report.nullity);
    let _ = writeln!(text, "max Pauli overlap: {overlap}");
    for w in witnesses.iter().take(8) {
        let _ = writeln!(
            text,
            "  witness {}{}",
            if w["sign"] == json!(1) { '+' } else { '-' },
            w["pauli"].as_str().unwrap_or("?")
        );
    }
    if report.witnesses.len() > 8 {
        let _ = writeln!(text, "  ... {} witnesses total", report.witnesses.len());
    }
    text.push_str(status_line(true));

    let out = json!({
        "source": source,
        "n": report.n,
        "stabilizer_count": report.stabilizer_count,
        "nullity": report.nullity,
        "max_pauli_overlap": overlap,
        "witnesses": witnesses,
        "witnesses_truncated": report.witnesses.len() > 64,
    });
    Ok(CmdOutput::new(out, text, true))
}

/// Builds the state named by the nullity flags, with a stable description.
pub fn build_state(
    ccz_plus: bool,
    state: Option<crate::StateKind>,
    n: Option<u32>,
    copies: Option<u32>,
    state_file: Option<&Path>,
) -> Result<(StateVector, String)> {
    if ccz_plus {
        let n = n.context("--ccz-plus requires --n")?;
        return Ok((ccz_plus_state(n)?, format!("ccz_plus[{n}]")));
    }
    if let Some(path) = state_file {
        let psi = StateVector::load(path)
            .with_context(|| format!("reading state file {}", path.display()))?;
        return Ok((psi, format!("file[{}]", path.display())));
    }
    match state {
        Some(crate::StateKind::Zero) => {
            let n = n.context("--state zero requires --n")?;
            Ok((StateVector::basis(n, 0)?, format!("zero[{n}]")))
        }
        Some(crate::StateKind::TTensor) => {
            let copies = copies.context("--state t-tensor requires --copies")?;
            if copies == 0 {
                bail!("--copies must be at least 1");
            }
            let mut psi = t_state();
            for _ in 1..copies {
                psi = psi.tensor(&t_state())?;
            }
            Ok((psi, format!("t_tensor[{copies}]")))
        }
        None => bail!("one of --ccz-plus, --state, --state-file is required"),
    }
}

// ------------------------------------------------------------------ bench

pub fn bench(epsilon: f64, trials: u64, seed: u64) -> Result<CmdOutput> {
    let mut checks = Checks::new();
    let mut rows_json = Vec::new();
    let mut table = String::new();
    let _ = writeln!(
        table,
        "{:<12} {:>3} {:>8} {:>9} {:>11} {:>10} {:>10}",
        "family", "n", "queries", "T(inner)", "T(compiled)", "analytic", "empirical"
    );

    // OR at several arities first: the T-count column must not move.
    let mut or_t_counts = Vec::new();
    let mut or_queries = Vec::new();
    let mut row_idx = 0u64;
    for n in [8u32, 12, 16] {
        let fam = Family::Or { n };
        let (mut row, analytic, empirical) = bench_row(row_idx, &fam, epsilon, trials, seed)?;
        row_idx += 1;
        let sk =
            table_protocol(&fam, epsilon)?.sample(&mut rng::stream(seed, 1u64 << 32 | u64::from(n)));
        let t_compiled = compile_or_sketch(&sk)?.t_count().t_count;
        or_t_counts.push(t_compiled);
        or_queries.push(row["queries"].as_u64().unwrap_or(0));
        row.as_object_mut()
            .expect("bench rows are objects")
            .insert("compiled_t_count".into(), json!(t_compiled));
        let _ = writeln!(
            table,
            "{:<12} {:>3} {:>8} {:>9} {:>11} {:>10.6} {:>10.6}",
            row["family"].as_str().unwrap_or("?"),
            n,
            row["queries"].as_u64().unwrap_or(0),
            row["inner_t_estimate"].as_u64().unwrap_or(0),
            t_compiled,
            analytic,
            empirical
        );
        rows_json.push(row);
    }
    checks.hard(
        "or_t_count_flat_in_n",
        or_t_counts.windows(2).all(|w| w[0] == w[1])
            && or_queries.windows(2).all(|w| w[0] == w[1]),
        format!("T-counts {or_t_counts:?} across n = [8, 12, 16]"),
    );

    let fixed_rows = [
        Family::HammingAtMost { n: 6, d: 1 },
        Family::HammingGap { n: 6, k: 1 },
        Family::Codeword { check: tsketch::boolfn::BitMatrix::identity(4)? },
        Family::MatrixEq { rows: 3, cols: 3 },
        Family::RankOne { rows: 2, cols: 2 },
    ];
    for fam in &fixed_rows {
        let (row, analytic, empirical) = bench_row(row_idx, fam, epsilon, trials, seed)?;
        row_idx += 1;
        let _ = writeln!(
            table,
            "{:<12} {:>3} {:>8} {:>9} {:>11} {:>10.6} {:>10.6}",
            row["family"].as_str().unwrap_or("?"),
            fam.arity(),
            row["queries"].as_u64().unwrap_or(0),
            row["inner_t_estimate"].as_u64().unwrap_or(0),
            "-",
            analytic,
            empirical
        );
        rows_json.push(row);
    }

    let worst_analytic = rows_json
        .iter()
        .filter_map(|r| r["analytic_worst_error"].as_f64())
        .fold(0.0f64, f64::max);
    let worst_empirical = rows_json
        .iter()
        .filter_map(|r| r["empirical_max_error"].as_f64())
        .fold(0.0f64, f64::max);
    checks.hard(
        "analytic_error_within_budget",
        worst_analytic <= epsilon,
        format!("worst analytic {worst_analytic} vs epsilon {epsilon}"),
    );
    checks.hard(
        "empirical_error_within_budget",
        worst_empirical <= epsilon,
        format!("worst empirical {worst_empirical} vs epsilon {epsilon}"),
    );

    // The identity check matrix accepts exactly the zero word, i.e. NOT of
    // the OR of all bits.
    let cw = Family::Codeword { check: tsketch::boolfn::BitMatrix::identity(4)? }.build()?;
    let cw_is_not_or = (0..16).all(|x| cw.get(x) == (x == 0));
    checks.hard(
        "codeword_identity_equals_not_or",
        cw_is_not_or,
        "CW with identity check agrees with NOT(OR_4) on all inputs".into(),
    );

    let mut text = format!("bench epsilon={epsilon} trials={trials} seed={seed}\n");
    text.push_str(&table);
    checks.render(&mut text);
    text.push_str(status_line(checks.pass));

    let out = json!({
        "epsilon": epsilon,
        "trials": trials,
        "seed": seed,
        "rows": rows_json,
        "or_flatness": { "ns": [8, 12, 16], "t_counts": or_t_counts },
        "checks": checks.list,
        "warnings": checks.warnings,
        "notes": [
            "families with linear-in-n lower bounds (greater-than, addition, \
             majority) have no sublinear protocol to benchmark and are omitted",
        ],
    });
    Ok(CmdOutput::new(out, text, checks.pass))
}

/// One bench row: protocol parameters, analytic worst-case error, and the
/// empirical maximum over (capped) promise inputs.
fn bench_row(
    row_idx: u64,
    fam: &Family,
    epsilon: f64,
    trials: u64,
    seed: u64,
) -> Result<(Value, f64, f64)> {
    let protocol = table_protocol(fam, epsilon)?;
    let f = fam.build()?;
    let n = f.n();
    let analytic = rational_to_f64(&protocol.worst_case_error());

    let domain = 1u64 << n;
    let inputs: Vec<u32> = if domain <= 4096 {
        (0..domain as u32).filter(|&x| f.in_promise(x)).collect()
    } else {
        // Large domains: stride plus the structurally distinct inputs.
        let stride = (domain / 1024).max(1);
        let mut xs: Vec<u32> = (0..domain).step_by(stride as usize).map(|x| x as u32).collect();
        xs.extend((0..n).map(|i| 1u32 << i));
        xs.push(domain as u32 - 1);
        xs.sort_unstable();
        xs.dedup();
        xs.retain(|&x| f.in_promise(x));
        xs
    };

    let mut subsets = Vec::new();
    let mut scratch = Vec::new();
    let mut empirical = 0.0f64;
    for &x in &inputs {
        let mut rng = rng::stream(seed, row_idx << 40 | u64::from(x));
        let truth = f.get(x);
        let mut misses = 0u64;
        for _ in 0..trials {
            protocol.sample_subsets_into(&mut rng, &mut subsets);
            if protocol.eval_sampled(&subsets, x, &mut scratch) != truth {
                misses += 1;
            }
        }
        empirical = empirical.max(misses as f64 / trials as f64);
    }

    let row = json!({
        "row": serde_json::to_value(protocol.row())?,
        "family": fam.label(),
        "n": n,
        "queries": protocol.queries(),
        "inner_t_estimate": protocol.inner_cost().t_estimate(),
        "analytic_worst_error": analytic,
        "empirical_max_error": empirical,
        "inputs_checked": inputs.len(),
    });
    Ok((row, analytic, empirical))
}
