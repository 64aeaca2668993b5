//! Invariant battery over seeded random configurations.
//!
//! Suites, in report order:
//!
//! 1. frame: orthonormality, Eckart residual, agreement with the search oracle
//! 2. eckart-parameter: vector form against projection form and internal form
//! 3. conversion: Jacobi to Eckart conversion against direct vectors, rigid limit
//! 4. coriolis: finite-difference `C` matrix against the closed form, rigid point
//! 5. rotational: rigid limit, equal-moment branch, Jacobi-variable mapping
//! 6. kinetic: observed order of the finite-difference Laplacian identity
//! 7. equilibrium: principal-axis decomposition
//! 8. area: equal triangle areas in the Eckart frame

use nalgebra::Rotation3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{GeometryInput, RunConfig};
use crate::equilibrium::EquilibriumGeometry;
use crate::error::{Error, Result};
use crate::frame::{area_diagnostic, build_frame, eckart_residual, eckart_vectors, frame_oracle};
use crate::geometry::{jacobi_from_lab, JacobiPair, MassTriple, Vec3};
use crate::hamiltonian::{
    coefficient_row, combined_jacobi_coefficients, combined_via_eckart, coriolis_c_impl, coriolis_c_numeric,
    coriolis_operator_coefficients, rigid_rotational_tensor, rotational_tensor, rotational_tensor_equal_moments,
    CoriolisCoefficients,
};
use crate::internal::{
    eckart_internal, eckart_parameter, rigid_body_limit, InternalCoordsEckart, InternalCoordsJacobi,
};
use crate::kinetic::{kinetic_identity_check, TestPolynomial};

/// Number of random test functions in the kinetic suite.
pub const KINETIC_FUNCTIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceProfile {
    #[default]
    Default,
    /// Every residual threshold divided by ten.
    Strict,
}

impl std::str::FromStr for ToleranceProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Self::Default),
            "strict" => Ok(Self::Strict),
            _ => Err(Error::InvalidInput(format!("unknown tolerance profile {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub orthonormality: f64,
    /// Relative to `F`.
    pub eckart_residual: f64,
    pub oracle_component: f64,
    pub parameter: f64,
    pub conversion: f64,
    pub coriolis_zero_columns: f64,
    pub coriolis_closed_form: f64,
    pub rigid_zero: f64,
    pub tensor: f64,
    /// Allowed `|order - 2|`.
    pub kinetic_order: f64,
    pub principal_axes: f64,
    pub area: f64,
}

impl Tolerances {
    pub fn for_profile(p: ToleranceProfile) -> Self {
        let base = Self {
            orthonormality: 1e-12,
            eckart_residual: 1e-10,
            oracle_component: 1e-8,
            parameter: 1e-12,
            conversion: 1e-10,
            coriolis_zero_columns: 1e-8,
            coriolis_closed_form: 1e-6,
            rigid_zero: 1e-12,
            tensor: 1e-12,
            kinetic_order: 0.3,
            principal_axes: 1e-12,
            area: 1e-10,
        };
        match p {
            ToleranceProfile::Default => base,
            ToleranceProfile::Strict => Self {
                orthonormality: base.orthonormality / 10.0,
                eckart_residual: base.eckart_residual / 10.0,
                oracle_component: base.oracle_component / 10.0,
                parameter: base.parameter / 10.0,
                conversion: base.conversion / 10.0,
                coriolis_zero_columns: base.coriolis_zero_columns / 10.0,
                coriolis_closed_form: base.coriolis_closed_form / 10.0,
                rigid_zero: base.rigid_zero / 10.0,
                tensor: base.tensor / 10.0,
                principal_axes: base.principal_axes / 10.0,
                area: base.area / 10.0,
                ..base
            },
        }
    }
}

/// Deliberate implementation faults for negative-control runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    #[default]
    None,
    /// Flips the sign of the closed-form `C13`.
    CoriolisSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    pub n: usize,
    pub seed: u64,
    pub profile: ToleranceProfile,
    pub mutation: Mutation,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self { n: 1000, seed: 42, profile: ToleranceProfile::Default, mutation: Mutation::None }
    }
}

/// One random test case: masses, equilibrium and a displaced configuration,
/// all mass-scaled.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub masses: [f64; 3],
    pub equilibrium: EquilibriumGeometry,
    pub configuration: JacobiPair,
}

impl Case {
    pub fn to_config(&self) -> RunConfig {
        RunConfig {
            masses: self.masses,
            equilibrium: GeometryInput::from_scaled(&self.equilibrium.as_pair()),
            configuration: Some(GeometryInput::from_scaled(&self.configuration)),
            units: None,
            grid: None,
            potential: None,
            scan: None,
            spectrum: None,
        }
    }
}

fn random_vec<R: Rng>(rng: &mut R, s: f64) -> Vec3 {
    Vec3::new(rng.gen_range(-s..s), rng.gen_range(-s..s), rng.gen_range(-s..s))
}

/// Draws a well-conditioned case: non-degenerate, non-collinear
/// equilibrium and Eckart vectors at least 0.05 rad from collinear.
pub fn random_case<R: Rng>(rng: &mut R) -> Case {
    loop {
        let masses = [rng.gen_range(0.5..20.0), rng.gen_range(0.5..20.0), rng.gen_range(0.5..20.0)];
        let m = MassTriple::new(masses[0], masses[1], masses[2]).expect("positive masses");
        let rm = m.reduced();
        let lab = [random_vec(rng, 2.0), random_vec(rng, 2.0), random_vec(rng, 2.0)];
        let Ok(eq_pair) = jacobi_from_lab(&lab, &m).mass_scale(&rm) else { continue };
        let Ok(eq) = EquilibriumGeometry::from_pair(&eq_pair) else { continue };
        if eq.degenerate || (eq.i1 - eq.i2) < 1e-3 * (eq.i1 + eq.i2) || eq.i2 < 0.02 * eq.i1 {
            continue;
        }
        let size = (eq.i1 + eq.i2).sqrt();
        let displaced = [lab[0] + random_vec(rng, 0.3), lab[1] + random_vec(rng, 0.3), lab[2] + random_vec(rng, 0.3)];
        let rot = Rotation3::from_scaled_axis(random_vec(rng, std::f64::consts::PI));
        let Ok(j) = jacobi_from_lab(&displaced, &m).mass_scale(&rm) else { continue };
        let j = j.rotated(&rot);
        let Ok(f) = eckart_vectors(&j, &eq) else { continue };
        let ic = InternalCoordsEckart::from_vectors(&f);
        if ic.has_zero_length() || ic.sin_phi() < 0.05 || j.r1.norm() < 1e-3 * size || j.r2.norm() < 1e-3 * size {
            continue;
        }
        return Case { masses, equilibrium: eq, configuration: j };
    }
}

pub fn random_cases(n: usize, seed: u64) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_case(&mut rng)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: &'static str,
    pub max: f64,
    pub threshold: f64,
    /// Index into the case list of the largest value.
    pub worst_case: Option<usize>,
}

impl Metric {
    fn new(name: &'static str, threshold: f64) -> Self {
        Self { name, max: 0.0, threshold, worst_case: None }
    }

    fn record(&mut self, value: f64, case: usize) {
        let v = if value.is_nan() { f64::INFINITY } else { value };
        if self.worst_case.is_none() || v > self.max {
            self.max = v;
            self.worst_case = Some(case);
        }
    }

    pub fn passed(&self) -> bool {
        self.max <= self.threshold
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub id: u8,
    pub name: &'static str,
    pub cases: usize,
    pub metrics: Vec<Metric>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.metrics.iter().all(Metric::passed)
    }

    pub fn max_residual(&self) -> f64 {
        self.metrics.iter().map(|m| m.max).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub options: CheckOptions,
    pub suites: Vec<SuiteReport>,
    pub warnings: Vec<String>,
    pub cases: Vec<Case>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::passed)
    }

    pub fn suite(&self, id: u8) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.id == id)
    }

    /// Reproducible description of the worst input for a metric: the run
    /// configuration plus the failing suite and value.
    pub fn worst_case_json(&self, suite: &SuiteReport, metric: &Metric) -> serde_json::Value {
        let config = metric
            .worst_case
            .and_then(|i| self.cases.get(i))
            .map(|c| serde_json::to_value(c.to_config()).expect("serializable"));
        serde_json::json!({
            "suite": format!("{} {}", suite.id, suite.name),
            "metric": metric.name,
            "value": if metric.max.is_finite() { serde_json::json!(metric.max) } else { serde_json::json!(metric.max.to_string()) },
            "threshold": metric.threshold,
            "seed": self.options.seed,
            "case_index": metric.worst_case,
            "input": config,
        })
    }
}

/// Per-case metric values; `None` marks an error on that case.
type Values = Vec<Option<f64>>;

fn fold_metrics(names: &[(&'static str, f64)], per_case: &[Values]) -> Vec<Metric> {
    let mut metrics: Vec<Metric> = names.iter().map(|(n, t)| Metric::new(n, *t)).collect();
    for (i, vals) in per_case.iter().enumerate() {
        for (m, v) in metrics.iter_mut().zip(vals) {
            m.record(v.unwrap_or(f64::INFINITY), i);
        }
    }
    metrics
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn frame_values(c: &Case) -> Result<Values> {
    let f = eckart_vectors(&c.configuration, &c.equilibrium)?;
    let frame = build_frame(&f)?;
    let oracle = frame_oracle(&c.configuration, &c.equilibrium)?;
    let mut comp = 0.0f64;
    for (a, b) in frame.axes().iter().zip(oracle.frame.axes().iter()) {
        comp = comp.max((a - b).amax());
    }
    Ok(vec![Some(frame.orthonormality_error()), Some(eckart_residual(&frame, &f).norm() / frame.big_f), Some(comp)])
}

fn parameter_values(c: &Case) -> Result<Values> {
    let f = eckart_vectors(&c.configuration, &c.equilibrium)?;
    let frame = build_frame(&f)?;
    let vector_form = f.eckart_parameter();
    let projection = frame.e1.dot(&f.f1) + frame.e2.dot(&f.f2);
    let internal = eckart_parameter(&InternalCoordsEckart::from_vectors(&f));
    Ok(vec![Some(rel(vector_form, projection)), Some(rel(vector_form, internal))])
}

fn conversion_values(c: &Case) -> Result<Values> {
    let eq = &c.equilibrium;
    let direct = InternalCoordsEckart::from_vectors(&eckart_vectors(&c.configuration, eq)?);
    let converted = eckart_internal(&InternalCoordsJacobi::from_pair(&c.configuration), eq)?;
    let scale = direct.f1.max(direct.f2);
    let err = ((direct.f1 - converted.f1).abs() / scale)
        .max((direct.f2 - converted.f2).abs() / scale)
        .max((direct.tau - converted.tau).abs());
    let rigid = rigid_body_limit(eq);
    let exact = InternalCoordsEckart { f1: eq.i2, f2: eq.i1, tau: 0.0 };
    let from_eq = eckart_internal(&InternalCoordsJacobi::from_pair(&eq.as_pair()), eq)?;
    let rigid_err = if rigid == exact { 0.0 } else { f64::INFINITY };
    let eq_err = ((from_eq.f1 - eq.i2).abs() / eq.i1).max((from_eq.f2 - eq.i1).abs() / eq.i1).max(from_eq.tau.abs());
    Ok(vec![Some(err), Some(rigid_err), Some(eq_err)])
}

fn coriolis_values(c: &Case, mutation: Mutation) -> Result<Values> {
    let eq = &c.equilibrium;
    let numeric = coriolis_c_numeric(&c.configuration, eq)?;
    let ic = InternalCoordsEckart::from_vectors(&eckart_vectors(&c.configuration, eq)?);
    let closed = coriolis_c_impl(&ic, eq.i1, eq.i2, mutation == Mutation::CoriolisSign)?;
    let mut zero_cols = 0.0f64;
    for g in 0..3 {
        zero_cols = zero_cols.max(numeric[(g, 0)].abs()).max(numeric[(g, 1)].abs());
    }
    let scale = closed.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut third = 0.0f64;
    for g in 0..3 {
        third = third.max((numeric[(g, 2)] - closed[g]).abs() / scale);
    }
    let rigid = rigid_body_limit(eq);
    let coeffs = CoriolisCoefficients::evaluate(&rigid, eq.i1, eq.i2)?;
    let op = coriolis_operator_coefficients(&rigid, eq.i1, eq.i2)?;
    let rigid_scale = 1.0f64.max(1.0 / eq.i2);
    Ok(vec![Some(zero_cols), Some(third), Some(coeffs.max_abs().max(op.max_abs()) / rigid_scale)])
}

fn rotational_values<R: Rng>(c: &Case, rng: &mut R) -> Result<Values> {
    let eq = &c.equilibrium;
    let rigid = rotational_tensor(&rigid_body_limit(eq), eq.i1, eq.i2)?;
    let exact = rigid_rotational_tensor(eq.i1, eq.i2)?;
    let rigid_err = rigid.max_abs_diff(&exact) / exact.max_abs();

    let ic = InternalCoordsEckart::new(rng.gen_range(0.2..3.0), rng.gen_range(0.2..3.0), rng.gen_range(-0.95..0.95))?;
    let i = rng.gen_range(0.1..5.0);
    let general = rotational_tensor(&ic, i, i)?;
    let equal = rotational_tensor_equal_moments(&ic, i)?;
    let branch_err = general.max_abs_diff(&equal) / equal.max_abs();

    let jic = InternalCoordsJacobi::new(rng.gen_range(0.2..3.0), rng.gen_range(0.2..3.0), rng.gen_range(-0.95..0.95))?;
    let direct = combined_jacobi_coefficients(&jic)?;
    let scale = direct.coriolis.max_abs().max(direct.tensor.max_abs());
    let mut map_err = 0.0f64;
    for rho in [1.0, 2.0, rng.gen_range(0.1..5.0)] {
        map_err = map_err.max(direct.max_abs_diff(&combined_via_eckart(&jic, rho)?) / scale);
    }

    let row = coefficient_row(&InternalCoordsJacobi::from_pair(&c.configuration), eq)?;
    let indefinite = if row.tensor.in_plane_block_positive_definite() { 0.0 } else { 1.0 };
    Ok(vec![Some(rigid_err), Some(branch_err), Some(map_err), Some(indefinite)])
}

fn kinetic_values<R: Rng>(c: &Case, rng: &mut R) -> Result<Values> {
    let g = TestPolynomial::random(rng, 4);
    let k = kinetic_identity_check(&g, &c.configuration, &c.equilibrium)?;
    let dev = k.orders.iter().map(|p| (p - 2.0).abs()).fold(0.0, f64::max);
    Ok(vec![Some(dev)])
}

fn equilibrium_values(c: &Case) -> Result<Values> {
    let eq = &c.equilibrium;
    let ordered = if eq.i1 >= eq.i2 { 0.0 } else { f64::INFINITY };
    Ok(vec![Some(eq.principal_axis_residual().abs() / (eq.i1 + eq.i2)), Some(ordered)])
}

fn area_values(c: &Case) -> Result<Values> {
    let f = eckart_vectors(&c.configuration, &c.equilibrium)?;
    let frame = build_frame(&f)?;
    let (a1, a2) = area_diagnostic(&c.configuration, &c.equilibrium, &frame);
    Ok(vec![Some((a1 - a2).abs() / (a1 + a2 + 1e-300))])
}

fn run_suite<F>(
    id: u8,
    name: &'static str,
    names: &[(&'static str, f64)],
    cases: &[Case],
    seed: u64,
    f: F,
) -> SuiteReport
where
    F: Fn(&Case, &mut ChaCha8Rng) -> Result<Values> + Sync,
{
    let per_case: Vec<Values> = cases
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            // independent stream per case and suite keeps results order-free
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ ((id as u64) << 56) ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            f(c, &mut rng).unwrap_or_else(|_| vec![None; names.len()])
        })
        .collect();
    SuiteReport { id, name, cases: cases.len(), metrics: fold_metrics(names, &per_case) }
}

pub fn run_battery(opts: &CheckOptions) -> CheckReport {
    let t = Tolerances::for_profile(opts.profile);
    let cases = random_cases(opts.n, opts.seed);
    let mut warnings = Vec::new();
    if opts.n == 0 {
        warnings.push("n = 0: no configurations tested, every suite passes vacuously".to_string());
    }
    let kinetic_cases = &cases[..cases.len().min(KINETIC_FUNCTIONS)];
    let seed = opts.seed;
    let mutation = opts.mutation;
    let suites = vec![
        run_suite(
            1,
            "frame",
            &[
                ("orthonormality", t.orthonormality),
                ("eckart-residual/F", t.eckart_residual),
                ("oracle-component", t.oracle_component),
            ],
            &cases,
            seed,
            |c, _| frame_values(c),
        ),
        run_suite(
            2,
            "eckart-parameter",
            &[("vector-vs-projection", t.parameter), ("vector-vs-internal", t.parameter)],
            &cases,
            seed,
            |c, _| parameter_values(c),
        ),
        run_suite(
            3,
            "conversion",
            &[("conversion", t.conversion), ("rigid-limit-exact", 0.0), ("equilibrium-point", t.conversion)],
            &cases,
            seed,
            |c, _| conversion_values(c),
        ),
        run_suite(
            4,
            "coriolis",
            &[
                ("c-columns-1-2", t.coriolis_zero_columns),
                ("c-column-3-vs-closed-form", t.coriolis_closed_form),
                ("rigid-point", t.rigid_zero),
            ],
            &cases,
            seed,
            |c, _| coriolis_values(c, mutation),
        ),
        run_suite(
            5,
            "rotational",
            &[
                ("rigid-limit", t.tensor),
                ("general-vs-equal-moment", t.tensor),
                ("jacobi-rho-mapping", t.tensor),
                ("indefinite-in-plane-block", 0.0),
            ],
            &cases,
            seed,
            rotational_values,
        ),
        run_suite(6, "kinetic", &[("order-deviation", t.kinetic_order)], kinetic_cases, seed, kinetic_values),
        run_suite(
            7,
            "equilibrium",
            &[("principal-axes", t.principal_axes), ("moment-order", 0.0)],
            &cases,
            seed,
            |c, _| equilibrium_values(c),
        ),
        run_suite(8, "area", &[("area-mismatch", t.area)], &cases, seed, |c, _| area_values(c)),
    ];
    CheckReport { options: opts.clone(), suites, warnings, cases }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_battery_passes() {
        let r = run_battery(&CheckOptions { n: 60, ..CheckOptions::default() });
        for s in &r.suites {
            assert!(s.passed(), "{s:?}");
        }
    }

    #[test]
    fn coriolis_mutation_fails_suite_four_only() {
        let r = run_battery(&CheckOptions { n: 20, mutation: Mutation::CoriolisSign, ..CheckOptions::default() });
        assert!(!r.passed());
        for s in &r.suites {
            assert_eq!(s.passed(), s.id != 4, "{s:?}");
        }
        let s = r.suite(4).unwrap();
        let m = s.metrics.iter().find(|m| !m.passed()).unwrap();
        let json = r.worst_case_json(s, m);
        assert_eq!(json["metric"], "c-column-3-vs-closed-form");
        let cfg: RunConfig = serde_json::from_value(json["input"].clone()).unwrap();
        assert!(cfg.configuration.is_some());
    }

    #[test]
    fn zero_cases_is_vacuous_pass() {
        let r = run_battery(&CheckOptions { n: 0, ..CheckOptions::default() });
        assert!(r.passed());
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn battery_is_deterministic() {
        let a = run_battery(&CheckOptions { n: 15, ..CheckOptions::default() });
        let b = run_battery(&CheckOptions { n: 15, ..CheckOptions::default() });
        assert_eq!(a.suites, b.suites);
    }
}
