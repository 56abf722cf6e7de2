//! The experiments behind each subcommand. Every function returns a
//! [`Report`] and leaves file output to [`execute`].

use qlangevin_core::chain::reduced_state_after;
use qlangevin_core::dynamics::{
    commutant_dims, convergence_study, evolve, interaction_map, iterate_map, lindblad_schrodinger,
    return_to_equilibrium, spectral_gap, spectrum, stationary_states, trace_distance, DensityMatrix,
};
use qlangevin_core::gns::empirical_limits;
use qlangevin_core::model::ModelSpec;
use qlangevin_core::noise::{
    ccr_check, fock_table_without_scattering, hp_unitarity, thermal_to_doubled_fock, thermal_unitarity,
    unitary_thermal_coefficients, weyl_vacuum_variance, ThermalRatios,
};
use qlangevin_core::numkit::{diag, identity, max_abs_diff, trace_norm};
use qlangevin_core::{CMatrix, C64};
use rand::Rng;
use serde_json::{json, Map, Value};

use crate::cli::{
    CoeffsArgs, Command, ConvergeArgs, EvolveArgs, ItoArgs, OracleArgs, SpectrumArgs, StateArgs, ThermalizeArgs,
};
use crate::error::CliError;
use crate::modelfile::load_model;
use crate::random::{self, RNG_NAME};
use crate::report::{num, opt_num, Cell, Report, Table};

/// Per-channel bound on the coth identity residual.
pub const COTH_TOL: f64 = 1e-12;
/// Eigenvalues this close to 0 count as the generator kernel.
pub const KERNEL_TOL: f64 = 1e-9;

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("report literals are objects"),
    }
}

/// `2^-8, ..., 2^-14`.
pub fn default_coeff_ladder() -> Vec<f64> {
    (8..=14).map(|k| 2f64.powi(-k)).collect()
}

fn initial_state(args: &StateArgs, d: usize) -> Result<(DensityMatrix, Value), CliError> {
    match args.initial {
        Some(k) if k < d => Ok((DensityMatrix::basis_state(d, k), json!({ "basis_state": k }))),
        Some(k) => Err(CliError::Input(format!("initial basis state {k} out of range for dimension {d}"))),
        None => {
            let rho = random::random_density(&mut random::rng(args.seed), d);
            Ok((rho, json!({ "rng": RNG_NAME, "seed": args.seed })))
        }
    }
}

fn linspace(t: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if points < 2 || !(t > 0.0) || !t.is_finite() {
        return Err(CliError::Input("need a positive final time and at least 2 points".into()));
    }
    Ok((0..points).map(|k| t * k as f64 / (points - 1) as f64).collect())
}

pub fn coeffs(model: &ModelSpec, args: &CoeffsArgs) -> Result<Report, CliError> {
    let taus = args.taus.clone().unwrap_or_else(default_coeff_ladder);
    let fit = empirical_limits(model, &taus)?;
    let mut table = Table::new([
        "i",
        "j",
        "k",
        "l",
        "epsilon",
        "residual_at_smallest_tau",
        "fitted_order",
        "extrapolated_residual",
    ]);
    for e in &fit.entries {
        let (i, j, k, l) = e.index;
        table.push(vec![
            i.into(),
            j.into(),
            k.into(),
            l.into(),
            e.epsilon.into(),
            e.residual().into(),
            e.fitted_order.into(),
            e.extrapolated_residual().into(),
        ]);
    }
    let max = fit.max_residual();
    let monotone = fit.entries.iter().all(|e| e.is_monotone());
    let failure = (!(max <= args.tol)).then(|| format!("max residual {max:e} exceeds {:e}", args.tol));
    let json = obj(json!({
        "command": "coeffs",
        "taus": taus,
        "tol": args.tol,
        "max_residual": num(max),
        "monotone": monotone,
    }));
    Ok(Report::new(Some(table), json, failure))
}

pub fn converge(model: &ModelSpec, args: &ConvergeArgs) -> Result<Report, CliError> {
    let (rho0, state) = initial_state(&args.state, model.system_dim())?;
    let study = convergence_study(model, &rho0, args.t, &args.taus)?;
    let mut table = Table::new(["tau", "n_steps", "trace_distance"]);
    for r in &study.rows {
        table.push(vec![r.tau.into(), r.steps.into(), r.trace_distance.into()]);
    }
    table.push(vec![Cell::Text("slope".into()), Cell::Empty, study.slope.into()]);
    let failure = (!(study.slope >= args.min_slope))
        .then(|| format!("fitted slope {} is below {}", study.slope, args.min_slope));
    let json = obj(json!({
        "command": "converge",
        "t": args.t,
        "slope": num(study.slope),
        "min_slope": args.min_slope,
        "monotone": study.is_monotone(),
        "initial_state": state,
    }));
    Ok(Report::new(Some(table), json, failure))
}

pub fn evolve_cmd(model: &ModelSpec, args: &EvolveArgs) -> Result<Report, CliError> {
    let d = model.system_dim();
    let (rho0, state) = initial_state(&args.state, d)?;
    let generator = lindblad_schrodinger(model)?;
    let stationary = stationary_states(&generator)?;
    let target = stationary.is_unique().then(|| stationary.states[0].matrix().clone());

    let mut header: Vec<String> = (0..d).map(|a| format!("p_{a}")).collect();
    for a in 0..d {
        for b in a + 1..d {
            header.push(format!("re_{a}_{b}"));
            header.push(format!("im_{a}_{b}"));
        }
    }
    let mut table = Table::new(["t".to_string()].into_iter().chain(header).chain(["trace_distance_to_stationary".into()]));
    for t in linspace(args.t, args.points)? {
        let rho = if t == 0.0 { rho0.clone() } else { evolve(&generator, &rho0, t)? };
        let m = rho.matrix();
        let mut row: Vec<Cell> = vec![t.into()];
        row.extend((0..d).map(|a| Cell::Num(m[(a, a)].re)));
        for a in 0..d {
            for b in a + 1..d {
                row.push(m[(a, b)].re.into());
                row.push(m[(a, b)].im.into());
            }
        }
        row.push(target.as_ref().map(|s| trace_distance(m, s)).into());
        table.push(row);
    }
    let json = obj(json!({
        "command": "evolve",
        "t": args.t,
        "stationary_count": stationary.states.len(),
        "initial_state": state,
    }));
    Ok(Report::new(Some(table), json, None))
}

/// Jump operators `√β_0 V_i` and `√β_i V_i*` of the limit generator.
fn jump_operators(model: &ModelSpec) -> Vec<CMatrix> {
    let b = model.weights();
    model
        .couplings()
        .iter()
        .enumerate()
        .flat_map(|(n, v)| [v.scale(b[0].sqrt()), v.adjoint().scale(b[n + 1].sqrt())])
        .collect()
}

pub fn thermalize(model: &ModelSpec, args: &ThermalizeArgs) -> Result<Report, CliError> {
    let d = model.system_dim();
    if d != model.bath_dim() {
        return Err(CliError::Input(format!(
            "thermalize compares with ρ_β and needs system dimension {} (bath), got {d}",
            model.bath_dim()
        )));
    }
    let (rho0, state) = initial_state(&args.state, d)?;
    let generator = lindblad_schrodinger(model)?;
    let gibbs = diag(model.weights());
    let residual = trace_norm(&generator.apply(&gibbs)?);
    let stationary = stationary_states(&generator)?;
    let count = stationary.states.len();
    let (with_h, without_h) = commutant_dims(model.hamiltonian(), &jump_operators(model))?;
    let gap = spectral_gap(&generator)?;

    let (mut rate, mut final_distance, mut state_error) = (None, None, None);
    if stationary.is_unique() {
        state_error = Some(max_abs_diff(stationary.states[0].matrix(), &gibbs));
        let horizon = match args.t {
            Some(t) => Some(t),
            None if gap > 0.0 => Some(20.0 / gap),
            None => None,
        };
        if let Some(t) = horizon {
            let study = return_to_equilibrium(model, &rho0, &linspace(t, args.points)?)?;
            rate = study.rate;
            final_distance = Some(study.final_distance());
        }
    }

    let mut problems = Vec::new();
    if !(residual <= args.tol) {
        problems.push(format!("invariant residual {residual:e} exceeds {:e}", args.tol));
    }
    if count != 1 {
        problems.push(format!("{count} stationary states"));
    }
    if with_h != without_h {
        problems.push(format!("commutant dimensions differ ({with_h} with H, {without_h} without)"));
    }
    let json = obj(json!({
        "command": "thermalize",
        "invariant_residual": num(residual),
        "stationary_count": count,
        "stationary_deviation_from_gibbs": opt_num(state_error),
        "commutant_dim_with_H": with_h,
        "commutant_dim_without_H": without_h,
        "spectral_gap": num(gap),
        "fitted_rate": opt_num(rate),
        "final_distance": opt_num(final_distance),
        "initial_state": state,
    }));
    Ok(Report::new(None, json, (!problems.is_empty()).then(|| problems.join("; "))))
}

pub fn oracle(model: &ModelSpec, args: &OracleArgs) -> Result<Report, CliError> {
    let (rho0, state) = initial_state(&args.state, model.system_dim())?;
    let map = interaction_map(model, args.tau)?;
    // the full chain is the expensive part; probe the guard before the sweep
    let full = reduced_state_after(model, args.tau, rho0.matrix(), args.k)?;
    let mut deviation = max_abs_diff(&full, &iterate_map(&map, rho0.matrix(), args.k)?);
    for k in 0..args.k {
        let chain = reduced_state_after(model, args.tau, rho0.matrix(), k)?;
        deviation = deviation.max(max_abs_diff(&chain, &iterate_map(&map, rho0.matrix(), k)?));
    }
    let failure = (!(deviation <= args.tol)).then(|| format!("max deviation {deviation:e} exceeds {:e}", args.tol));
    let json = obj(json!({
        "command": "oracle",
        "k": args.k,
        "tau": args.tau,
        "max_deviation": num(deviation),
        "initial_state": state,
    }));
    Ok(Report::new(None, json, failure))
}

pub fn ito_check(model: &ModelSpec, args: &ItoArgs) -> Result<Report, CliError> {
    let ratios = ThermalRatios::from_model(model)?;
    let n = ratios.channels();
    let d = model.system_dim();
    let coth = if model.bath().inverse_temperature().is_some() {
        Some(weyl_vacuum_variance(model, &vec![1.0; n])?.residuals)
    } else {
        None
    };

    let mut table = Table::new(["channel", "r_plus", "r_minus", "amplitude_a", "amplitude_b", "coth_residual"]);
    for i in 1..=n {
        let (a, b) = thermal_to_doubled_fock(&ratios, i)?;
        let res = coth.as_ref().map(|r| r[i - 1]);
        table.push(vec![i.into(), ratios.r_plus(i).into(), ratios.r_minus(i).into(), a.into(), b.into(), res.into()]);
    }

    let mut rng = random::rng(args.seed);
    let zero_t = ThermalRatios::zero_temperature(n);
    let (mut accepted, mut rejected, mut agree) = (0, 0, 0);
    let mut ccr_dev: f64 = 0.0;
    let mut failing = Vec::new();
    for _ in 0..args.draws {
        let h = random::random_hermitian(&mut rng, d);
        let w: Vec<CMatrix> = (0..n).map(|_| random::random_matrix(&mut rng, d, d)).collect();
        let (k00, kp, km) = unitary_thermal_coefficients(&h, &w, &ratios)?;
        let report = thermal_unitarity(&k00, &kp, &km, &ratios)?;
        if report.unitary() {
            accepted += 1;
        } else {
            failing.extend(report.failures().map(|c| c.condition.to_string()));
        }
        let bumped = &k00 + identity(d).scale(1e-3);
        if !thermal_unitarity(&bumped, &kp, &km, &ratios)?.unitary() {
            rejected += 1;
        }
        let (z00, zp, zm) = unitary_thermal_coefficients(&h, &w, &zero_t)?;
        let hp = hp_unitarity(&fock_table_without_scattering(&h, &w)?)?.unitary();
        if hp == thermal_unitarity(&z00, &zp, &zm, &zero_t)?.unitary() {
            agree += 1;
        }
        let inner: Vec<C64> =
            (0..n).map(|_| C64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))).collect();
        let sum: C64 = inner.iter().sum();
        ccr_dev = ccr_dev.max((ccr_check(&inner, &ratios)? - sum).norm());
    }
    failing.sort();
    failing.dedup();

    let max_coth = coth.as_ref().map(|r| r.iter().copied().fold(0.0, f64::max));
    let mut problems = Vec::new();
    if let Some(m) = max_coth.filter(|m| !(*m <= COTH_TOL)) {
        problems.push(format!("coth residual {m:e} exceeds {COTH_TOL:e}"));
    }
    if accepted != args.draws || rejected != args.draws || agree != args.draws {
        problems.push(format!(
            "unitarity verdicts: {accepted} accepted, {rejected} perturbations rejected, {agree} zero-temperature agreements of {}",
            args.draws
        ));
    }
    if !(ccr_dev <= 1e-15) {
        problems.push(format!("CCR deviation {ccr_dev:e}"));
    }
    let json = obj(json!({
        "command": "ito-check",
        "rng": RNG_NAME,
        "seed": args.seed,
        "draws": args.draws,
        "max_coth_residual": opt_num(max_coth),
        "thermal_unitarity_accepted": accepted,
        "thermal_unitarity_rejected_after_perturbation": rejected,
        "hp_thermal_agreement_at_zero_temperature": agree,
        "failing_conditions": failing,
        "ccr_max_deviation": num(ccr_dev),
    }));
    Ok(Report::new(Some(table), json, (!problems.is_empty()).then(|| problems.join("; "))))
}

pub fn spectrum_cmd(model: &ModelSpec, _args: &SpectrumArgs) -> Result<Report, CliError> {
    let generator = lindblad_schrodinger(model)?;
    let mut eig = spectrum(&generator)?;
    eig.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    let mut table = Table::new(["re", "im"]);
    for mu in &eig {
        table.push(vec![mu.re.into(), mu.im.into()]);
    }
    let closest = eig.iter().map(|mu| mu.norm()).fold(f64::INFINITY, f64::min);
    let failure = (!(closest <= KERNEL_TOL)).then(|| format!("no eigenvalue within {KERNEL_TOL:e} of 0"));
    let json = obj(json!({
        "command": "spectrum",
        "spectral_gap": num(spectral_gap(&generator)?),
        "smallest_modulus": num(closest),
    }));
    Ok(Report::new(Some(table), json, failure))
}

pub fn run(command: &Command, model: &ModelSpec) -> Result<Report, CliError> {
    match command {
        Command::Coeffs(a) => coeffs(model, a),
        Command::Converge(a) => converge(model, a),
        Command::Evolve(a) => evolve_cmd(model, a),
        Command::Thermalize(a) => thermalize(model, a),
        Command::Oracle(a) => oracle(model, a),
        Command::ItoCheck(a) => ito_check(model, a),
        Command::Spectrum(a) => spectrum_cmd(model, a),
    }
}

/// Loads the model, runs the command, writes its outputs and turns a missed
/// tolerance into [`CliError::Tolerance`].
pub fn execute(command: &Command) -> Result<(), CliError> {
    let io = command.io();
    let model = load_model(&io.model)?;
    let report = run(command, &model)?;
    report.write(&io.out)?;
    match report.failure {
        Some(why) => Err(CliError::Tolerance(why)),
        None => Ok(()),
    }
}
