//! The verification suites behind `qae verify`, run in a fixed order.

use std::f64::consts::PI;
use std::time::Instant;

use qae_core::caps::{
    cap_constant_sweep, cap_fraction_exact, cap_fraction_montecarlo, cap_sweep_grid, complex_overlap_check,
    counting_montecarlo, kq_exponent, kq_lowerbound_scenario, laplace_gap, sine_power_check, surface_identity,
};
use qae_core::cloning::{
    algebraic_bound_check, binomial, cloning_bounds, cloning_gap, overlap_sup_check, symmetric_dim,
    symmetric_projector, takagi_top, twirl_average, unevenness,
};
use qae_core::density::{
    build_mu, domination_margin, gap_example, h_lower, h_upper, lower_bound_check, UniversalApprox,
};
use qae_core::dyadic::Dyadic;
use qae_core::elementary::{basis_state, PureState};
use qae_core::entropy::{
    approximation_boundary_search, entanglement_paradox, entropy_complexity_sandwich, monotonicity_check,
    relative_entropy, subadditivity_check, DensityMatrix, ProductSetting,
};
use qae_core::linalg::{ComplexMatrix, HermitianOperator};
use qae_core::machine::{
    decode, enumerate, rescan_kraft_mass, Budget, EnumerationSnapshot, Expr, Literal, MachineOutput,
    DEFAULT_MAX_LEN_CAP,
};
use qae_core::randomness::{build_test, evaluate_coordinates, evaluate_test};
use qae_core::sampling::{haar_state, random_density, random_symmetric, rng_for, LabRng};
use qae_core::snapshot_io;
use serde_json::json;

use crate::config::{RunConfig, Suite};
use crate::report::{Check, RunReport, SuiteResult, Timing, FORMAT};
use crate::CliError;

type SuiteOutput = Result<Vec<Check>, CliError>;

struct Ctx<'a> {
    cfg: &'a RunConfig,
    snapshot: Option<EnumerationSnapshot>,
    ua: Option<UniversalApprox>,
}

impl Ctx<'_> {
    fn snapshot(&mut self) -> Result<&EnumerationSnapshot, CliError> {
        if self.snapshot.is_none() {
            self.snapshot = Some(enumerate(self.cfg.dim, self.cfg.budget, DEFAULT_MAX_LEN_CAP)?);
        }
        Ok(self.snapshot.as_ref().unwrap())
    }

    fn ua(&mut self) -> Result<&UniversalApprox, CliError> {
        if self.ua.is_none() {
            let (eps, tol) = (self.cfg.eps_reg, self.cfg.tolerances);
            let ua = build_mu(self.snapshot()?, eps, &tol)?;
            self.ua = Some(ua);
        }
        Ok(self.ua.as_ref().unwrap())
    }

    /// Independent generator per (suite, purpose).
    fn rng(&self, stream: u64) -> LabRng {
        rng_for(self.cfg.seed, stream)
    }
}

fn random_state(rng: &mut LabRng, n: usize) -> Result<PureState, CliError> {
    Ok(PureState::new(haar_state(rng, n))?)
}

fn density(m: ComplexMatrix, cfg: &RunConfig) -> Result<DensityMatrix, CliError> {
    Ok(DensityMatrix::new(HermitianOperator::from_hermitian_part(&m), &cfg.tolerances)?)
}

/// Runs the configured suites and assembles the report. A failed check is
/// recorded, not raised; errors abort the run.
pub fn run(cfg: &RunConfig) -> Result<RunReport, CliError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Cap(format!("thread pool: {e}")))?;
    pool.install(|| run_in_pool(cfg))
}

fn run_in_pool(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let mut ctx = Ctx {
        cfg,
        snapshot: None,
        ua: None,
    };
    let mut suites = Vec::new();
    let mut timing = Timing::default();
    let mut order = cfg.suites.clone();
    order.sort();
    order.dedup();
    for suite in order {
        let t0 = Instant::now();
        let checks = match suite {
            Suite::Enumerate => enumerate_suite(&mut ctx),
            Suite::Mu => mu_suite(&mut ctx),
            Suite::Entropy => entropy_suite(&mut ctx),
            Suite::Tests => tests_suite(&mut ctx),
            Suite::Clone => clone_suite(&ctx),
            Suite::Caps => caps_suite(&ctx),
            Suite::KqScenario => kq_suite(&ctx),
        }?;
        suites.push(SuiteResult::new(suite.name(), checks));
        timing.suites_ms.push((suite.name().to_string(), t0.elapsed().as_secs_f64() * 1e3));
    }
    timing.total_ms = start.elapsed().as_secs_f64() * 1e3;
    let config = cfg
        .entries()
        .into_iter()
        .map(|(k, v)| (k, serde_json::Value::String(v)))
        .collect();
    Ok(RunReport {
        format: FORMAT,
        config,
        parallelism: rayon::current_num_threads(),
        snapshot_digest: ctx.snapshot.as_ref().map(snapshot_io::digest),
        passed: suites.iter().all(|s| s.passed),
        suites,
        timing,
    })
}

/// No program is a proper prefix of another; adjacent pairs in
/// lexicographic order suffice.
pub fn prefix_free(snapshot: &EnumerationSnapshot) -> bool {
    let mut bits: Vec<&str> = snapshot.entries().iter().map(|e| e.program.bits()).collect();
    bits.sort_unstable();
    bits.windows(2).all(|w| !w[1].starts_with(w[0]))
}

fn enumerate_suite(ctx: &mut Ctx) -> SuiteOutput {
    let (dim, budget) = (ctx.cfg.dim, ctx.cfg.budget);
    let snap = ctx.snapshot()?;
    let rescan = rescan_kraft_mass(dim, budget);
    let reloaded = snapshot_io::from_text(&snapshot_io::to_text(snap))?;
    Ok(vec![
        Check::new(
            "kraft_mass_at_most_one",
            snap.kraft_mass() <= Dyadic::ONE,
            json!({ "kraft_mass": snap.kraft_mass().to_string(), "entries": snap.entries().len() }),
        ),
        Check::new("kraft_rescan_agrees", rescan == snap.kraft_mass(), json!({ "rescan": rescan.to_string() })),
        Check::new("prefix_free", prefix_free(snap), json!(null)),
        Check::new(
            "text_round_trip",
            snapshot_io::digest(&reloaded) == snapshot_io::digest(snap),
            json!({ "digest": snapshot_io::digest(snap) }),
        ),
    ])
}

fn mu_suite(ctx: &mut Ctx) -> SuiteOutput {
    let cfg = ctx.cfg;
    let tol = cfg.tolerances;
    let expected_trace: f64 = ctx.snapshot()?.entries().iter().map(|e| e.weight.to_f64()).sum::<f64>() + cfg.eps_reg.to_f64();
    let mut rng = ctx.rng(1);
    let snap = ctx.snapshot()?.clone();
    let ua = ctx.ua()?;
    let n = ua.dim();
    let spectrum = ua.mu().eig()?.values.clone();
    let min_eig = *spectrum.last().unwrap();
    let (dom, count) = domination_margin(ua, &snap)?;
    let mut jensen_worst = f64::NEG_INFINITY;
    let mut lb_worst = f64::INFINITY;
    for i in 0..cfg.samples {
        let psi = random_state(&mut rng, n)?;
        jensen_worst = jensen_worst.max(h_lower(ua, &psi)? - h_upper(ua, &psi)?);
        if i < 100 {
            for lambda in [2.0, 4.0] {
                let c = lower_bound_check(ua, &psi, lambda)?;
                lb_worst = lb_worst.min(c.upper_margin.min(c.lower_margin));
            }
        }
    }
    let (gap_ua, gap_psi) = gap_example(16, cfg.eps_reg, &tol)?;
    let (gl, gu) = (h_lower(&gap_ua, &gap_psi)?, h_upper(&gap_ua, &gap_psi)?);
    Ok(vec![
        Check::new(
            "semi_density",
            min_eig >= -tol.psd_tol && ua.mu().trace() <= 1.0 + tol.psd_tol,
            json!({ "trace": ua.mu().trace(), "spectrum": spectrum }),
        ),
        Check::new(
            "trace_matches_mass",
            (ua.mu().trace() - expected_trace).abs() <= 1e-12,
            json!({ "independent_sum": expected_trace }),
        ),
        Check::new(
            "regularizer_floor",
            min_eig >= cfg.eps_reg.to_f64() / n as f64 - tol.psd_tol,
            json!({ "min_eigenvalue": min_eig }),
        ),
        Check::new("domination", dom >= -1e-9, json!({ "margin": dom, "entries": count })),
        Check::new("jensen", jensen_worst <= 1e-9, json!({ "max_excess": jensen_worst, "states": cfg.samples })),
        Check::new("eigen_concentration", lb_worst >= -1e-9, json!({ "min_margin": lb_worst })),
        Check::new(
            "gap_example",
            gl <= 1.1 && (gu - 2.0).abs() <= 0.2,
            json!({ "dim": 16, "h_lower": gl, "h_upper": gu }),
        ),
    ])
}

/// Budgets for the fixed 2×2 product setting.
pub const PRODUCT_X: Budget = Budget {
    max_len: 6,
    max_steps: 100,
};
pub const PRODUCT_XY: Budget = Budget {
    max_len: 15,
    max_steps: 10_000,
};

fn entropy_suite(ctx: &mut Ctx) -> SuiteOutput {
    let cfg = ctx.cfg;
    let tol = cfg.tolerances;
    let snap = ctx.snapshot()?.clone();
    let mut rng = ctx.rng(2);
    let ua = ctx.ua()?;
    let n = ua.dim();
    let mut sandwich_ok = true;
    let mut worst_left = f64::INFINITY;
    let mut worst_right = f64::INFINITY;
    for e in snap.entries() {
        let rho = DensityMatrix::semi(e.output.projector().scale(1.0 / e.output.rank() as f64), &tol)?;
        let r = entropy_complexity_sandwich(ua, &rho, e.weight.to_f64())?;
        sandwich_ok &= r.holds(1e-6);
        worst_left = worst_left.min(r.c_left);
        worst_right = worst_right.min(r.c_right);
    }
    let mut rel_min = f64::INFINITY;
    for _ in 0..cfg.samples {
        let rho = density(random_density(&mut rng, n), cfg)?;
        let sigma = density(random_density(&mut rng, n), cfg)?;
        rel_min = rel_min.min(relative_entropy(&rho, &sigma, &tol)?);
    }

    let sx = enumerate(2, PRODUCT_X, DEFAULT_MAX_LEN_CAP)?;
    let sxy = enumerate(4, PRODUCT_XY, DEFAULT_MAX_LEN_CAP)?;
    let set = ProductSetting::build(&sx, &sx, &sxy, cfg.eps_reg, &tol)?;
    let e2 = basis_state(2, 2)?;
    let e2_out = MachineOutput::State(e2.clone());
    let e2 = e2.normalize()?;
    let mut sub_ok = true;
    let mut mono_ok = true;
    let mut sub_margin = f64::INFINITY;
    let mut kappa_margin = f64::INFINITY;
    for _ in 0..20 {
        let phi = random_state(&mut rng, 2)?;
        let psi = random_state(&mut rng, 2)?;
        let s = subadditivity_check(&set, &sx, &sx, &sxy, &phi, &psi)?;
        sub_ok &= s.holds(1e-9, 1e-9);
        sub_margin = sub_margin.min(s.operator_margin);
        let m = monotonicity_check(&set, &sx, &sxy, Some(&e2_out), &phi, &e2)?;
        mono_ok &= m.holds(1e-9, 1e-9);
        kappa_margin = kappa_margin.min(m.kappa_margin);
    }

    let bell = Expr::wsum(Literal::One, Literal::One, Expr::Basis(1), Expr::Basis(4)).encode(4)?;
    let beta = match decode(&bell, 4) {
        Ok(out) => PureState::new(out.state_vector().expect("WSUM yields a state"))?,
        Err(r) => return Err(CliError::Core(qae_core::QaeError::Domain(format!("{r:?}")))),
    };
    let paradox = entanglement_paradox(&set.x, &set.xy, &beta)?;
    let approx = approximation_boundary_search(0.1, 400);
    Ok(vec![
        Check::new(
            "entropy_sandwich",
            sandwich_ok,
            json!({ "witnesses": snap.entries().len(), "min_c_left": worst_left, "min_c_right": worst_right }),
        ),
        Check::new("relative_entropy_nonnegative", rel_min >= -1e-9, json!({ "min": rel_min, "pairs": cfg.samples })),
        Check::new("subadditivity", sub_ok, json!({ "min_operator_margin": sub_margin })),
        Check::new("monotonicity", mono_ok, json!({ "min_kappa_margin": kappa_margin })),
        Check::new(
            "bell_entropy_paradox",
            (paradox.entropy_x - 1.0).abs() <= 1e-9
                && paradox.entropy_xy.abs() <= 1e-9
                && paradox.complexity_monotonicity_holds(1e-9),
            &paradox,
        ),
        Check::new("approximation_lemma", approx >= 1.0 - 2.0 * 0.1 - 1e-12, json!({ "eps": 0.1, "min_overlap": approx })),
    ])
}

fn tests_suite(ctx: &mut Ctx) -> SuiteOutput {
    let cfg = ctx.cfg;
    let tol = cfg.tolerances;
    let mut rng = ctx.rng(3);
    let ua = ctx.ua()?;
    let n = ua.dim();
    let uniform = build_test(ua, &DensityMatrix::maximally_mixed(n), &tol)?;
    let mut uniform_err = uniform.op.matrix().max_abs_diff(&ua.mu().matrix().scale(n as f64));
    let rounds = cfg.samples.min(100);
    let mut trace_excess = f64::NEG_INFINITY;
    let mut dual = 0.0f64;
    for _ in 0..rounds {
        let psi = random_state(&mut rng, n)?;
        let v = evaluate_test(&uniform, &psi)?.value;
        uniform_err = uniform_err.max((v - n as f64 * ua.mu().expectation(psi.amplitudes())).abs());
        let rho = density(random_density(&mut rng, n), cfg)?;
        let t = build_test(ua, &rho, &tol)?;
        trace_excess = trace_excess.max(t.trace_against(&rho) - 1.0);
        let a = evaluate_test(&t, &psi)?.value;
        let b = evaluate_coordinates(ua, &rho, &psi, &tol)?;
        dual = dual.max((a - b).abs() / a.abs().max(1.0));
    }
    let self_rho = DensityMatrix::semi(ua.mu().scale(1.0 / ua.mu().trace()), &tol)?;
    let t_self = build_test(ua, &self_rho, &tol)?;
    let self_err = t_self.op.matrix().max_abs_diff(&ComplexMatrix::identity(n).scale(ua.mu().trace()));
    Ok(vec![
        Check::new("test_property", trace_excess <= 1e-9, json!({ "max_excess": trace_excess, "rhos": rounds })),
        Check::new("dual_path_agreement", dual <= 1e-9, json!({ "max_relative_gap": dual })),
        Check::new("uniform_reduction", uniform_err <= 1e-10, json!({ "max_error": uniform_err })),
        Check::new("self_comparison", self_err <= 1e-9, json!({ "max_error": self_err, "trace_mu": ua.mu().trace() })),
    ])
}

fn clone_suite(ctx: &Ctx) -> SuiteOutput {
    let cfg = ctx.cfg;
    let tol = cfg.tolerances;
    let mut dims = Vec::new();
    let mut dims_ok = true;
    for (n, m) in [(2, 2), (2, 3), (3, 2), (4, 2)] {
        let s = symmetric_projector(n, m, cfg.dim_cap)?;
        let expect = binomial(m as u64 + n as u64 - 1, m as u64);
        dims_ok &= s.dim == expect && symmetric_dim(n, m) == expect && (s.projector.trace() - expect as f64).abs() <= 1e-8;
        dims.push(json!({ "n": n, "m": m, "dim": s.dim.to_string() }));
    }
    let twirl_samples = cfg.samples.max(2);
    let ps = symmetric_projector(2, 2, cfg.dim_cap)?;
    let tw = twirl_average(2, 2, twirl_samples, cfg.seed, cfg.dim_cap)?;
    let tw_err = tw.average.max_abs_diff(&ps.projector.matrix().scale(1.0 / 3.0));
    let bounds = cloning_bounds(2, 2, Budget::new(12, 10_000), cfg.eps_reg, cfg.samples.max(1), cfg.seed, &tol)?;
    let single = build_mu(&enumerate(2, Budget::new(10, 10_000), DEFAULT_MAX_LEN_CAP)?, cfg.eps_reg, &tol)?;
    let double = build_mu(&enumerate(4, Budget::new(10, 10_000), DEFAULT_MAX_LEN_CAP)?, cfg.eps_reg, &tol)?;
    let gap = cloning_gap(&single, &double, cfg.samples.clamp(1, 200), cfg.seed)?;

    let mut rng = ctx.rng(4);
    let u_id = unevenness(&ComplexMatrix::identity(3), &tol)?.u;
    let v = haar_state(&mut rng, 3);
    let u_rank1 = unevenness(&ComplexMatrix::from_fn(3, |i, j| v[i] * v[j]), &tol)?.u;
    let mut sup_ok = true;
    let mut svd_gap = 0.0f64;
    for i in 0..cfg.trials.min(300) {
        let a = random_symmetric(&mut rng, 2 + i % 3);
        let u = unevenness(&a, &tol)?.u;
        let (sigma, _) = takagi_top(&a)?;
        svd_gap = svd_gap.max((u - sigma * sigma / a.frobenius_norm().powi(2)).abs());
        sup_ok &= overlap_sup_check(&a, 8, &mut rng, &tol)?.holds(1e-6);
    }
    let alg: Vec<_> = [1, 2]
        .into_iter()
        .map(|d| algebraic_bound_check(2, d, cfg.trials.max(1), 32, cfg.seed.wrapping_add(d as u64)))
        .collect::<Result<_, _>>()?;
    Ok(vec![
        Check::new("symmetric_dimensions", dims_ok, dims),
        Check::new(
            "twirl_limit",
            tw_err <= 5.0 * tw.stderr,
            json!({ "samples": twirl_samples, "max_error": tw_err, "stderr": tw.stderr }),
        ),
        Check::new("cloning_upper", bounds.upper_holds(1e-9), &bounds),
        Check::new("cloning_lower", bounds.lower_holds(0.1), json!({ "estimate": bounds.lower_estimate, "log2_binom": bounds.log2_binom })),
        Check::new("cloning_gap_witness", gap > 1.0, json!({ "max_gap_bits": gap })),
        Check::new(
            "unevenness_examples",
            (u_id - 1.0 / 3.0).abs() <= 1e-15 && (u_rank1 - 1.0).abs() <= 1e-12 && svd_gap <= 1e-10,
            json!({ "identity": u_id, "rank_one": u_rank1, "svd_oracle_gap": svd_gap }),
        ),
        Check::new("overlap_sup", sup_ok, json!({ "matrices": cfg.trials.min(300) })),
        Check::new("algebraic_bound", alg.iter().all(|r| r.holds(1e-6)), &alg),
    ])
}

fn caps_suite(ctx: &Ctx) -> SuiteOutput {
    let cfg = ctx.cfg;
    let mut ident_err = 0.0f64;
    let mut margins_ok = true;
    for n in 3..=512 {
        let s = surface_identity(n)?;
        ident_err = ident_err.max(s.identity_error);
        margins_ok &= s.ball_margin > 0.0 && s.surface_margin > 0.0;
    }
    let (ns, ys) = cap_sweep_grid();
    let sweep = cap_constant_sweep(&ns, &ys, cfg.cap_constant)?;
    let laplace_ok = (1..200).all(|j| laplace_gap(j as f64 * (PI / 2.0) / 200.0) < 0.0);
    let (sl, sr) = sine_power_check(100, 0.3);
    let mc_samples = cfg.samples.max(1) * 100;
    let exact = cap_fraction_exact(4, PI / 3.0)?;
    let mc = cap_fraction_montecarlo(4, PI / 3.0, mc_samples, cfg.seed)?;
    let half = cap_fraction_montecarlo(4, PI / 2.0, mc_samples, cfg.seed.wrapping_add(1))?;
    let cx = complex_overlap_check(3, 2.0, mc_samples, cfg.seed)?;
    let count = counting_montecarlo(4, 2.0, 4, cfg.samples.max(1), cfg.seed, cfg.counting_constant)?;
    let count0 = counting_montecarlo(4, 2.0, 0, mc_samples, cfg.seed, cfg.counting_constant)?;
    Ok(vec![
        Check::new("surface_identities", ident_err <= 1e-12 && margins_ok, json!({ "max_identity_error": ident_err })),
        Check::new("cap_bound_sweep", sweep.violations == 0, sweep),
        Check::new("laplace_inequality", laplace_ok && sl <= sr, json!({ "sine_power": sl, "gaussian": sr })),
        Check::new(
            "cap_montecarlo",
            mc.agrees_with(exact, 4.0) && half.agrees_with(0.5, 4.0),
            json!({ "exact": exact, "estimate": mc, "hemisphere": half }),
        ),
        Check::new("complex_overlap_convention", cx.disagreements == 0 && cx.overlap.agrees_with(cx.exact, 4.0), cx),
        Check::new(
            "counting_lemma",
            count.below_bound(0.0) && count.below_union(4.0) && count0.mc.agrees_with(count0.single_exact, 4.0),
            json!({ "k4": count, "k0": count0 }),
        ),
    ])
}

fn kq_suite(ctx: &Ctx) -> SuiteOutput {
    let cfg = ctx.cfg;
    let r = kq_lowerbound_scenario(
        cfg.kq_qubits,
        cfg.budget,
        None,
        cfg.samples,
        cfg.seed,
        cfg.kq_exponent_c,
        cfg.tolerances.ortho_tol,
    )?;
    let exponent_ok = (17..=128).all(|n| kq_exponent(n as f64, cfg.kq_exponent_c) < 0.0);
    Ok(vec![
        Check::new("orthogonal_complement", r.holds(), &r),
        Check::new(
            "exponent_negative_from_17",
            exponent_ok,
            json!({ "c": cfg.kq_exponent_c, "crossing": r.exponent_crossing }),
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_run_echoes_config() {
        let r = run(&RunConfig::default()).unwrap();
        assert!(r.passed && r.suites.is_empty() && r.snapshot_digest.is_none());
        assert_eq!(r.config["dim"], "2");
    }

    #[test]
    fn enumerated_programs_are_prefix_free() {
        let snap = enumerate(2, Budget::new(8, 100), DEFAULT_MAX_LEN_CAP).unwrap();
        assert!(prefix_free(&snap));
    }
}
