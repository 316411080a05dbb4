//! Command-line front end: spectra, figure data, free evolution and a
//! randomized self-check.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::dynamics::{
    self, evolve, magnetization_trace_equal_weights, stationary_magnetization_demo, structure_coefficients,
    structure_defect, tau_grid, KernelVariant, Propagator, TimeScale,
};
use crate::effective::{
    embed_qubit_state, four_block_eigensystem, params_from_rho, qubit_eigenpair, qubit_hamiltonians,
    QubitPairState,
};
use crate::entanglement::{
    self, negativity_pure, negativity_pure_odd, negativity_trace, one_bohr_state, plus_minus,
    predicted_revisit_phase, qubit_product_state, saturating_state, Level, OneBohrFamily,
};
use crate::io::{apply_override, load_params, Format, Table};
use crate::linalg::{c, commutator, max_abs, real, tolerance_scale, CVector, C64};
use crate::model::{build_hamiltonian, derived_couplings, BasisLabel, ModelParams, PureState9, Qubit};
use crate::spectra::{
    eigenvalue_distance, five_block_eigensystem_gz0, oracle_eigensystem, Provenance,
};
use crate::symmetry::{block_decompose, embed_odd, parity_operator};
use crate::{Error, Result};

#[derive(Parser, Debug, Clone)]
#[command(name = "qutrits", version, about = "Exact dynamics and entanglement of two coupled spin-1 systems")]
pub struct Cli {
    #[command(flatten)]
    pub opts: GlobalOpts,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Parameter file (key=value lines or a JSON object).
    #[arg(long, global = true, value_name = "FILE")]
    pub params: Option<PathBuf>,

    /// Override one parameter; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    /// Shorthand for the `figure` command.
    #[arg(long, global = true, value_name = "N")]
    pub figure: Option<u32>,

    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// End of the dimensionless time grid.
    #[arg(long, global = true, value_parser = positive_f64)]
    pub tau_max: Option<f64>,

    /// Number of grid points (at least 2).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(2..100_000_000))]
    pub tau_steps: Option<u64>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Random draws per invariant in `verify`.
    #[arg(long, global = true, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,

    /// Use the sin² two-level kernel variant instead of the exact kernels.
    /// They are not unitary, so `verify` reports failures.
    #[arg(long, global = true)]
    pub literal_kernel: bool,

    /// Require the closed-form five-dimensional spectrum (needs gamma_z = 0).
    #[arg(long, global = true)]
    pub closed_form_5d: bool,
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("must be positive and finite, got {s}"))
    }
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Closed-form and oracle spectra of both parity blocks.
    Spectrum,
    /// Data series of one of the eleven reference plots.
    Figure {
        /// Figure number, 1 to 11.
        n: Option<u32>,
    },
    /// Randomized check of the model invariants; exit status 1 on failure.
    Verify,
    /// Exact evolution of an initial state.
    Evolve {
        /// `equal`, `basis:LABEL` (e.g. basis:1-1), `amps:re,im,...` (18
        /// numbers), `saturating:θ,θ',φ,φ',Φ`, or a one-Bohr family
        /// `A:j,k,Reζ,Imζ,Reξ,Imξ`, `B:pairing,Re a,Im a,Re b,Im b`, `C:j,k,Φ`.
        #[arg(long, default_value = "equal")]
        state: String,

        #[arg(long, value_enum, default_value_t = ScaleArg::T)]
        time_scale: ScaleArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    /// Physical time.
    T,
    /// |γ₁| t/ħ
    Gamma1,
    /// E₁ t/ħ
    E1,
    /// E₂ t/ħ
    E2,
}

impl From<ScaleArg> for TimeScale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::T => TimeScale::Physical,
            ScaleArg::Gamma1 => TimeScale::Gamma1,
            ScaleArg::E1 => TimeScale::Energy(Qubit::First),
            ScaleArg::E2 => TimeScale::Energy(Qubit::Second),
        }
    }
}

/// Rendered result of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    /// False when a validation step failed; the process exits with 1.
    pub ok: bool,
    /// Human-readable notes for standard error.
    pub messages: Vec<String>,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, ok: true, messages: Vec::new() }
    }
}

impl GlobalOpts {
    fn variant(&self) -> KernelVariant {
        if self.literal_kernel {
            KernelVariant::Literal
        } else {
            KernelVariant::Corrected
        }
    }

    fn grid(&self, default_max: f64, default_steps: usize) -> Vec<f64> {
        let steps = self.tau_steps.map_or(default_steps, |s| s as usize);
        tau_grid(self.tau_max.unwrap_or(default_max), steps)
    }

    /// Parameters from --params, then each --set in order.
    pub fn model_params(&self) -> Result<ModelParams> {
        let base = match &self.params {
            Some(path) => load_params(path)?,
            None => ModelParams::default(),
        };
        self.apply_overrides(base)
    }

    fn apply_overrides(&self, mut p: ModelParams) -> Result<ModelParams> {
        for s in &self.set {
            apply_override(&mut p, s)?;
        }
        p.validate()?;
        Ok(p)
    }
}

pub fn run(cli: &Cli) -> Result<Output> {
    let o = &cli.opts;
    match (&cli.command, o.figure) {
        (Some(Command::Figure { n: Some(a) }), Some(b)) if *a != b => {
            Err(Error::Parse(format!("conflicting figure numbers {a} and {b}")))
        }
        (Some(Command::Figure { n }), flag) => {
            let n = n.or(flag).ok_or_else(|| Error::Parse("figure number missing".into()))?;
            cmd_figure(n, o)
        }
        (None, Some(n)) => cmd_figure(n, o),
        (Some(Command::Spectrum), _) => cmd_spectrum(o),
        (Some(Command::Verify), _) => cmd_verify(o),
        (Some(Command::Evolve { state, time_scale }), _) => cmd_evolve(o, state, (*time_scale).into()),
        (None, None) => Err(Error::Parse("no command given (try --help)".into())),
    }
}

// ---------------------------------------------------------------- spectrum

/// Agreement threshold between closed-form and oracle eigenvalues, relative
/// to max(|h|, 1).
pub const SPECTRUM_TOL: f64 = 1e-9;

pub fn cmd_spectrum(o: &GlobalOpts) -> Result<Output> {
    let p = o.model_params()?;
    if o.closed_form_5d && p.gamma_z != 0.0 {
        return Err(Error::RequiresGammaZZero(p.gamma_z));
    }
    let h = build_hamiltonian(&p);
    let blocks = block_decompose(&h)?;
    let scale = tolerance_scale(h.matrix());

    let four_closed = four_block_eigensystem(&p)?;
    let four_oracle = oracle_eigensystem(&blocks.h_minus)?;
    let five_closed = if p.gamma_z == 0.0 { Some(five_block_eigensystem_gz0(&p)?) } else { None };
    let five_oracle = oracle_eigensystem(&blocks.h_plus)?;
    let full_oracle = oracle_eigensystem(h.matrix())?;

    let four_c = four_closed.eigenvalues();
    let five_c = five_closed.as_ref().map_or_else(|| five_oracle.eigenvalues(), |s| s.eigenvalues());
    let mut union: Vec<f64> = four_c.iter().chain(&five_c).copied().collect();
    union.sort_by(f64::total_cmp);

    let checks = [
        ("four_block", eigenvalue_distance(&four_c, &four_oracle.eigenvalues())),
        ("five_block", eigenvalue_distance(&five_c, &five_oracle.eigenvalues())),
        ("full", eigenvalue_distance(&union, &full_oracle.eigenvalues())),
        ("parity_residual", blocks.residual),
    ];
    let mut agreement = Map::new();
    let mut messages = Vec::new();
    let mut ok = true;
    for (name, dev) in checks {
        let pass = dev <= SPECTRUM_TOL * scale;
        ok &= pass;
        agreement.insert(name.into(), json!({ "max_difference": dev, "ok": pass }));
        if !pass {
            messages.push(format!("{name}: closed form and oracle differ by {dev:e}"));
        }
    }
    let five_source = match &five_closed {
        Some(s) if s.provenance == Provenance::ClosedForm => "closed_form",
        Some(_) => "closed_form_fallback_oracle",
        None => "oracle",
    };
    let mut meta = Map::new();
    meta.insert("command".into(), json!("spectrum"));
    meta.insert("params".into(), json!(p));
    meta.insert("four_block_source".into(), json!(provenance_name(four_closed.provenance)));
    meta.insert("five_block_source".into(), json!(five_source));
    if let Some(note) = five_closed.as_ref().and_then(|s| s.note.clone()).or(four_closed.note.clone()) {
        meta.insert("note".into(), json!(note));
    }
    meta.insert("agreement".into(), Value::Object(agreement));

    let mut table = Table { meta, columns: Vec::new() };
    let mut cols: [Vec<f64>; 5] = Default::default();
    let rows = [(4.0, &four_c, four_oracle.eigenvalues()), (5.0, &five_c, five_oracle.eigenvalues()), (9.0, &union, full_oracle.eigenvalues())];
    for (dim, closed, oracle) in rows {
        for (i, (a, b)) in closed.iter().zip(&oracle).enumerate() {
            for (col, v) in cols.iter_mut().zip([dim, i as f64, *a, *b, (a - b).abs()]) {
                col.push(v);
            }
        }
    }
    for (name, col) in ["block", "index", "closed_form", "oracle", "difference"].into_iter().zip(cols) {
        table.push(name, col);
    }
    Ok(Output { text: table.render(o.format)?, ok, messages })
}

fn provenance_name(p: Provenance) -> &'static str {
    match p {
        Provenance::ClosedForm => "closed_form",
        Provenance::Oracle => "oracle",
    }
}

// ----------------------------------------------------------------- figures

/// γ₁ with Re γ₁ = (3/5)|γ₁| and |γ₁| = 1.
pub const FIGURE_GAMMA1: C64 = C64 { re: 0.6, im: 0.8 };
/// γ₂ used by the negativity figures.
pub const FIGURE_GAMMA2: C64 = C64 { re: 1.0, im: 0.0 };
/// γ₂ of the Ψ₁₁(Φ) figures; its argument fixes the revisited phase.
pub const REVISIT_GAMMA2: C64 = C64 { re: 1.0, im: -0.14 };
/// ρ₂ of figures 6–8 and 9–11.
pub const FIGURE_RHO2: [f64; 3] = [1.7, 1.3, 1.0];

pub const DEFAULT_STEPS: usize = 801;

fn rho_one_plus_sqrt2() -> f64 {
    1.0 + 2f64.sqrt()
}

/// Parameter set of figures 3–5: ħΩ₊ = 2|γ₁| (ρ₁ = 1+√2), Ω₋ = 0.
pub fn revisit_params() -> ModelParams {
    params_from_rho(rho_one_plus_sqrt2(), FIGURE_GAMMA1, 1.0, REVISIT_GAMMA2, 1.0).expect("valid")
}

/// Parameters of figures 6–11 for the given ρ₂.
pub fn min_negativity_params(rho2: f64) -> ModelParams {
    params_from_rho(rho_one_plus_sqrt2(), FIGURE_GAMMA1, rho2, FIGURE_GAMMA2, 1.0).expect("valid")
}

fn complex_json(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn cmd_figure(n: u32, o: &GlobalOpts) -> Result<Output> {
    if !(1..=11).contains(&n) {
        return Err(Error::UnknownFigure(n));
    }
    if o.params.is_some() {
        return Err(Error::Parse("figures use fixed parameter sets; adjust them with --set".into()));
    }
    let table = match n {
        1 => figure_1(o)?,
        2 => figure_2(o)?,
        3..=5 => figure_revisit(n, o)?,
        6..=8 => figure_min_negativity(n, Qubit::First, FIGURE_RHO2[(n - 6) as usize], o)?,
        _ => figure_min_negativity(n, Qubit::Second, FIGURE_RHO2[(n - 9) as usize], o)?,
    };
    Ok(Output::ok(table.render(o.format)?))
}

fn figure_1(o: &GlobalOpts) -> Result<Table> {
    let taus = o.grid(4.0 * PI, DEFAULT_STEPS);
    let mut table = Table::new()
        .meta("figure", 1)
        .meta("initial_state", "equal weights a = b = c = d = 1/sqrt(2)")
        .meta("time", "|gamma1| t / hbar")
        .meta("gamma1", complex_json(FIGURE_GAMMA1))
        .meta("gamma2", complex_json(FIGURE_GAMMA2))
        .meta("rho2", 1.0);
    table.push("tau", taus.clone());
    let mut sets = Vec::new();
    let h = real(0.5f64.sqrt());
    let psi0 = embed_qubit_state(&QubitPairState::new(h, h, h, h)?);
    for rho in [10.0, 1.0, 0.1] {
        let p = o.apply_overrides(params_from_rho(rho, FIGURE_GAMMA1, 1.0, FIGURE_GAMMA2, 1.0)?)?;
        let trace = evolve(&p, &psi0, &taus, TimeScale::Gamma1)?;
        let mut entry = json!({ "rho1": rho, "params": p });
        if let Ok(fit) = magnetization_trace_equal_weights(&p, &taus) {
            entry["fit"] = json!(fit.fit);
            entry["closed_form"] = json!(fit.closed_form);
        }
        sets.push(entry);
        table.push(&format!("Sz_rho{rho}"), trace.column("Sz").to_vec());
    }
    Ok(table.meta("parameter_sets", sets))
}

fn figure_2(o: &GlobalOpts) -> Result<Table> {
    let p = o.apply_overrides(params_from_rho(rho_one_plus_sqrt2(), FIGURE_GAMMA1, 1.7, FIGURE_GAMMA2, 1.0)?)?;
    let taus = o.grid(4.0 * PI, DEFAULT_STEPS);
    let trace = stationary_magnetization_demo(&p, &taus)?;
    let mut table = Table::new()
        .meta("figure", 2)
        .meta("initial_state", "psi11 (x) (|+> + |->)/sqrt(2)")
        .meta("time", "|gamma1| t / hbar")
        .meta("rho1", rho_one_plus_sqrt2())
        .meta("rho2", 1.7)
        .meta("params", json!(p));
    for name in ["tau", "Sz", "S1z", "S2z"] {
        table.push(name, trace.column(name).to_vec());
    }
    Ok(table)
}

fn figure_revisit(n: u32, o: &GlobalOpts) -> Result<Table> {
    let p = o.apply_overrides(revisit_params())?;
    let taus = o.grid(2.0 * PI, DEFAULT_STEPS);
    let scale = TimeScale::Energy(Qubit::Second);
    let family = |phi| OneBohrFamily::C { qubit: Qubit::First, level: Level::Upper, phi };
    let psi0 = one_bohr_state(&p, &family(0.0))?;
    let matched = entanglement::intermediate_max_negativity_state(&p, Qubit::First, Level::Upper, PI, scale)?;
    let phi_star = matched.map_or_else(|| predicted_revisit_phase(&p, Qubit::First), |m| m.phi);
    let target = one_bohr_state(&p, &family(phi_star))?;
    let trace = negativity_trace(&p, &psi0, &taus, scale, Some(&target))?;
    let mut table = Table::new()
        .meta("figure", n)
        .meta("initial_state", "Psi11(Phi = 0) = psi11 (x) (|+> + |->)/sqrt(2)")
        .meta("time", scale.name())
        .meta("hbar_omega_plus_over_2_abs_gamma1", 1.0)
        .meta("gamma1", complex_json(FIGURE_GAMMA1))
        .meta("gamma2", complex_json(REVISIT_GAMMA2))
        .meta("params", json!(p))
        .meta("phi_star", phi_star)
        .meta("phi_star_predicted", predicted_revisit_phase(&p, Qubit::First));
    if let Some(m) = matched {
        table = table.meta("intermediate_state", json!(m));
    }
    table.push("tau", taus);
    let x_plus_half: Vec<f64> = trace.column("x").iter().map(|x| x + 0.5).collect();
    match n {
        3 => table.push("negativity", trace.column("negativity").to_vec()),
        4 => {
            table.push("x_plus_half", x_plus_half);
            table.push("fidelity0", trace.column("fidelity0").to_vec());
        }
        _ => {
            table.push("x_plus_half", x_plus_half);
            table.push("fidelity0", trace.column("fidelity0").to_vec());
            table.push("fidelity_phi", trace.column("fidelity_phi").to_vec());
        }
    }
    Ok(table)
}

/// ψ_{1k} ⊗ |±⟩ (`fixed = First`) or |±⟩ ⊗ ψ_{2k} (`fixed = Second`).
fn figure_min_negativity(n: u32, fixed: Qubit, rho2: f64, o: &GlobalOpts) -> Result<Table> {
    let p = o.apply_overrides(min_negativity_params(rho2))?;
    // the moving qubit sets the natural time unit
    let scale = match fixed {
        Qubit::First => TimeScale::Energy(Qubit::Second),
        Qubit::Second => TimeScale::Energy(Qubit::First),
    };
    let taus = o.grid(2.0 * PI, DEFAULT_STEPS);
    let d = derived_couplings(&p);
    let mut table = Table::new()
        .meta("figure", n)
        .meta("time", scale.name())
        .meta("rho1", rho_one_plus_sqrt2())
        .meta("rho2", rho2)
        .meta("gamma1", complex_json(FIGURE_GAMMA1))
        .meta("gamma2", complex_json(FIGURE_GAMMA2))
        .meta("params", json!(p))
        .meta("min_negativity", entanglement::min_negativity(d.rho(fixed).ok_or(Error::GammaZero(fixed))?)?);
    table.push("tau", taus.clone());
    let (up, down) = qubit_eigenpair(&p, fixed)?;
    for (k, eig) in [(1, &up), (2, &down)] {
        for (sign, plus) in [("plus", true), ("minus", false)] {
            let pm = plus_minus(plus);
            let (psi0, name) = match fixed {
                Qubit::First => (qubit_product_state(eig, &pm)?, format!("N_psi1{k}_{sign}")),
                Qubit::Second => (qubit_product_state(&pm, eig)?, format!("N_{sign}_psi2{k}")),
            };
            let trace = negativity_trace(&p, &psi0, &taus, scale, None)?;
            table.push(&name, trace.column("negativity").to_vec());
        }
    }
    Ok(table)
}

// ------------------------------------------------------------------ evolve

/// Parses an initial-state description (see the `evolve` help).
pub fn parse_state(spec: &str, p: &ModelParams) -> Result<PureState9> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let numbers = || -> Result<Vec<f64>> {
        rest.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {s:?} in state"))))
            .collect()
    };
    match kind.trim() {
        "equal" => {
            let h = real(0.5f64.sqrt());
            Ok(embed_qubit_state(&QubitPairState::new(h, h, h, h)?))
        }
        "basis" => Ok(PureState9::basis(rest.trim().parse::<BasisLabel>()?)),
        "amps" => {
            let v = numbers()?;
            if v.len() != 18 {
                return Err(Error::DimensionMismatch { expected: "18 numbers".into(), found: v.len().to_string() });
            }
            PureState9::new(CVector::from_fn(9, |i, _| c(v[2 * i], v[2 * i + 1])))
        }
        "saturating" => {
            let v = numbers()?;
            if v.len() != 5 {
                return Err(Error::BadCoefficients(format!("saturating takes 5 angles, got {}", v.len())));
            }
            Ok(saturating_state(v[0], v[1], v[2], v[3], v[4]))
        }
        family => one_bohr_state(p, &OneBohrFamily::from_spec(family, &numbers()?)?),
    }
}

pub fn cmd_evolve(o: &GlobalOpts, state: &str, scale: TimeScale) -> Result<Output> {
    let p = o.model_params()?;
    let psi0 = parse_state(state, &p)?;
    let taus = o.grid(2.0 * PI, DEFAULT_STEPS);
    let trace = evolve(&p, &psi0, &taus, scale)?;
    let mut neg = Vec::with_capacity(taus.len());
    for psi in &trace.states {
        neg.push(negativity_pure(psi)?.value);
    }
    let mut table = trace.table;
    table.meta.insert("command".into(), json!("evolve"));
    table.meta.insert("initial_state".into(), json!(state));
    table.push("negativity", neg);
    if o.literal_kernel {
        // compare against the sin² kernels when the state factorizes
        if let Ok(s0) = crate::effective::extract_qubit_state(&psi0) {
            let unit = scale.time_per_tau(&derived_couplings(&p))?;
            let sz: Vec<f64> = taus
                .iter()
                .map(|&tau| {
                    let s = structure_coefficients(&p, &s0, tau * unit, KernelVariant::Literal);
                    dynamics::magnetization_observables(&embed_qubit_state_unchecked(&s)).sz
                })
                .collect();
            table.push("Sz_literal_kernel", sz);
        }
    }
    Ok(Output::ok(table.render(o.format)?))
}

/// Embeds possibly non-normalized kernel output, renormalizing.
fn embed_qubit_state_unchecked(s: &QubitPairState) -> PureState9 {
    let v = CVector::from_iterator(4, s.odd_amplitudes());
    PureState9::normalized(embed_odd(&v)).unwrap_or_else(|_| PureState9::basis(BasisLabel::new(1, 0)))
}

// ------------------------------------------------------------------ verify

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct InvariantReport {
    pub name: &'static str,
    pub passed: bool,
    /// Largest violation measure over all draws.
    pub worst: f64,
    pub tolerance: f64,
    /// Draw index of the worst case.
    pub worst_sample: u64,
}

struct Check {
    name: &'static str,
    tolerance: f64,
    worst: f64,
    worst_sample: u64,
}

impl Check {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Check { name, tolerance, worst: 0.0, worst_sample: 0 }
    }

    fn record(&mut self, value: f64, sample: u64) {
        // NaN counts as a failure
        if value.is_nan() || value > self.worst {
            self.worst = if value.is_nan() { f64::INFINITY } else { value };
            self.worst_sample = sample;
        }
    }

    fn finish(self) -> InvariantReport {
        InvariantReport {
            name: self.name,
            passed: self.worst <= self.tolerance,
            worst: self.worst,
            tolerance: self.tolerance,
            worst_sample: self.worst_sample,
        }
    }
}

pub fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    let mut v = || rng.random_range(-2.0..2.0);
    ModelParams {
        omega1: v(),
        omega2: v(),
        gamma_x: v(),
        gamma_y: v(),
        gamma_z: v(),
        gamma_xy: v(),
        gamma_yx: v(),
        hbar: 1.0,
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    loop {
        let v = CVector::from_fn(n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let norm = v.norm();
        if norm > 1e-3 {
            return v / real(norm);
        }
    }
}

/// Runs every invariant on `samples` random parameter draws.
pub fn verify_invariants(seed: u64, samples: u64, variant: KernelVariant) -> Result<Vec<InvariantReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = [
        Check::new("hermiticity", 1e-14),
        Check::new("parity_commutator", 1e-12),
        Check::new("block_residual", 1e-12),
        Check::new("two_qubit_identity", 1e-13),
        Check::new("four_block_closed_form", 1e-10),
        Check::new("five_block_closed_form", 1e-9),
        Check::new("oracle_reconstruction", 1e-10),
        Check::new("kernel_unitarity", 1e-12),
        Check::new("kernel_vs_oracle", 1e-9),
        Check::new("structure_invariance", 1e-9),
        Check::new("negativity_bound", 1e-10),
    ];
    let k = parity_operator();
    for s in 0..samples {
        let mut p = random_params(&mut rng);
        let h = build_hamiltonian(&p);
        let scale = tolerance_scale(h.matrix());
        checks[0].record(crate::linalg::hermiticity_defect(h.matrix()) / scale, s);
        checks[1].record(max_abs(&commutator(h.matrix(), k.matrix())) / scale, s);
        let blocks = block_decompose(&h)?;
        checks[2].record(blocks.residual, s);
        let q = qubit_hamiltonians(&p);
        checks[3].record(max_abs(&(q.two_qubit_hamiltonian() - &blocks.h_minus)) / scale, s);
        let four = four_block_eigensystem(&p)?;
        let four_oracle = oracle_eigensystem(&blocks.h_minus)?;
        checks[4].record(eigenvalue_distance(&four.eigenvalues(), &four_oracle.eigenvalues()) / scale, s);

        p.gamma_z = 0.0;
        let h0 = build_hamiltonian(&p);
        let plus = block_decompose(&h0)?.h_plus;
        let five = five_block_eigensystem_gz0(&p)?;
        let five_oracle = oracle_eigensystem(&plus)?;
        checks[5].record(
            eigenvalue_distance(&five.eigenvalues(), &five_oracle.eigenvalues()) / tolerance_scale(h0.matrix()),
            s,
        );

        let full = oracle_eigensystem(h.matrix())?;
        checks[6].record(max_abs(&(full.reconstruct() - h.matrix())) / scale, s);

        let t = rng.random_range(0.0..3.0);
        let kd = Qubit::BOTH
            .iter()
            .map(|&j| dynamics::kernel_unitarity_defect(&p, j, t, variant))
            .fold(0.0, f64::max);
        checks[7].record(kd, s);

        let first = random_unit(&mut rng, 2);
        let second = random_unit(&mut rng, 2);
        let s0 = QubitPairState::from_factors(&first, &second)?;
        let psi0 = embed_qubit_state(&s0);
        let prop = Propagator::for_params(&p)?;
        let exact = prop.apply(psi0.as_vector(), t);
        let kernels = structure_coefficients(&p, &s0, t, variant);
        let diff = CVector::from_iterator(4, kernels.odd_amplitudes()) - crate::symmetry::restrict_odd(&exact);
        checks[8].record(crate::linalg::max_abs_vec(&diff), s);
        checks[9].record(structure_defect(&prop.evolve(&psi0, t)), s);

        let odd = random_unit(&mut rng, 4);
        let amps = [odd[0], odd[1], odd[2], odd[3]];
        let closed = negativity_pure_odd(&amps)?;
        let state = PureState9::new(embed_odd(&odd))?;
        let full_n = negativity_pure(&state)?.value;
        checks[10].record((closed - full_n).abs().max(full_n - 0.5), s);
    }
    Ok(checks.into_iter().map(Check::finish).collect())
}

pub fn cmd_verify(o: &GlobalOpts) -> Result<Output> {
    let reports = verify_invariants(o.seed, o.samples, o.variant())?;
    let ok = reports.iter().all(|r| r.passed);
    let messages = reports
        .iter()
        .filter(|r| !r.passed)
        .take(1)
        .map(|r| {
            format!(
                "invariant {} failed: worst {:e} > tolerance {:e} (sample {})",
                r.name, r.worst, r.tolerance, r.worst_sample
            )
        })
        .collect();
    let text = match o.format {
        Format::Json => {
            let v = json!({
                "meta": { "command": "verify", "seed": o.seed, "samples": o.samples,
                          "kernel": if o.literal_kernel { "literal" } else { "corrected" }, "all_passed": ok },
                "invariants": reports,
            });
            serde_json::to_string_pretty(&v)? + "\n"
        }
        Format::Csv => {
            let mut s = String::from("invariant,passed,worst,tolerance,worst_sample\n");
            for r in &reports {
                let _ = writeln!(s, "{},{},{:e},{:e},{}", r.name, r.passed, r.worst, r.tolerance, r.worst_sample);
            }
            s
        }
    };
    Ok(Output { text, ok, messages })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("qutrits").chain(args.iter().copied())).unwrap()
    }

    fn series(out: &Output) -> Value {
        serde_json::from_str::<Value>(&out.text).unwrap()["series"].clone()
    }

    #[test]
    fn spectrum_gamma_x_only() {
        let out = run(&cli(&["spectrum", "--set", "gamma_x=1", "--format", "json"])).unwrap();
        assert!(out.ok);
        let v: Value = serde_json::from_str(&out.text).unwrap();
        let blocks = v["series"]["block"].as_array().unwrap();
        let closed = v["series"]["closed_form"].as_array().unwrap();
        let four: Vec<f64> = blocks
            .iter()
            .zip(closed)
            .filter(|(b, _)| b.as_f64() == Some(4.0))
            .map(|(_, x)| x.as_f64().unwrap())
            .collect();
        let expected = [-2.0, 0.0, 0.0, 2.0];
        for (a, b) in four.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(v["meta"]["agreement"]["four_block"]["ok"], true);
    }

    #[test]
    fn spectrum_zero_params() {
        let out = run(&cli(&["spectrum"])).unwrap();
        assert!(out.ok);
        for line in out.text.lines().skip(1) {
            let cols: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            assert_eq!(cols[2], 0.0);
            assert_eq!(cols[3], 0.0);
        }
    }

    #[test]
    fn spectrum_closed_form_5d_needs_gamma_z_zero() {
        let r = run(&cli(&["spectrum", "--closed-form-5d", "--set", "gamma_z=0.5"]));
        assert!(matches!(r, Err(Error::RequiresGammaZZero(_))));
        assert!(run(&cli(&["spectrum", "--closed-form-5d", "--set", "gamma_x=0.3"])).unwrap().ok);
    }

    #[test]
    fn unknown_figure() {
        assert!(matches!(run(&cli(&["figure", "12"])), Err(Error::UnknownFigure(12))));
        assert!(matches!(run(&cli(&["--figure", "0"])), Err(Error::UnknownFigure(0))));
    }

    #[test]
    fn figure_2_constant_total() {
        let out = run(&cli(&["figure", "2", "--format", "json", "--tau-steps", "101"])).unwrap();
        let s = series(&out);
        let sz: Vec<f64> = s["Sz"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        let s1: Vec<f64> = s["S1z"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        let spread = |v: &[f64]| v.iter().copied().fold(f64::MIN, f64::max) - v.iter().copied().fold(f64::MAX, f64::min);
        assert!(spread(&sz) < 1e-9);
        assert!(spread(&s1) > 1e-3);
    }

    #[test]
    fn figure_11_constant_negativity() {
        let out = run(&cli(&["--figure", "11", "--format", "json", "--tau-steps", "101"])).unwrap();
        let s = series(&out);
        for name in ["N_plus_psi21", "N_minus_psi21", "N_plus_psi22", "N_minus_psi22"] {
            for x in s[name].as_array().unwrap() {
                assert!((x.as_f64().unwrap() - 0.5).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn figure_8_period_half_pi() {
        let out = run(&cli(&["figure", "8", "--format", "json", "--tau-max", "3.141592653589793", "--tau-steps", "5"])).unwrap();
        let s = series(&out);
        let n: Vec<f64> = s["N_psi11_plus"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        // τ = 0, π/4, π/2, 3π/4, π
        assert!((n[0] - n[2]).abs() < 1e-9 && (n[0] - n[4]).abs() < 1e-9);
        assert!((n[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn figure_output_deterministic() {
        let a = run(&cli(&["figure", "5", "--tau-steps", "51"])).unwrap();
        let b = run(&cli(&["figure", "5", "--tau-steps", "51"])).unwrap();
        assert_eq!(a, b);
        assert!(a.text.starts_with("tau,x_plus_half,fidelity0,fidelity_phi\n"));
    }

    #[test]
    fn evolve_states() {
        for spec in ["equal", "basis:10", "C:1,1,0.3", "saturating:0.1,0.2,0.3,0.4,0.5", "B:1,0.6,0,0,0.8"] {
            let out = run(&cli(&["evolve", "--state", spec, "--set", "gamma_x=0.7", "--set", "omega1=0.3", "--tau-steps", "11"]))
                .unwrap();
            assert_eq!(out.text.lines().count(), 12, "{spec}");
        }
        let amps = "amps:1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0";
        assert!(run(&cli(&["evolve", "--state", amps, "--tau-steps", "3"])).is_ok());
        assert!(run(&cli(&["evolve", "--state", "amps:1,0"])).is_err());
        assert!(matches!(run(&cli(&["evolve", "--state", "Z:1"])), Err(Error::InvalidFamily(_))));
    }

    #[test]
    fn verify_passes_and_literal_fails() {
        let out = run(&cli(&["verify", "--samples", "20", "--seed", "3"])).unwrap();
        assert!(out.ok, "{}", out.text);
        let lit = run(&cli(&["verify", "--samples", "20", "--literal-kernel"])).unwrap();
        assert!(!lit.ok);
        assert!(lit.messages[0].contains("kernel_unitarity"));
    }

    #[test]
    fn usage_errors() {
        let parse = |args: &[&str]| Cli::try_parse_from(std::iter::once("qutrits").chain(args.iter().copied()));
        assert!(parse(&["verify", "--samples", "0"]).is_err());
        assert!(parse(&["figure", "1", "--tau-steps", "1"]).is_err());
        assert!(parse(&["figure", "1", "--tau-max", "-1"]).is_err());
        assert!(run(&cli(&[])).is_err());
    }
}
