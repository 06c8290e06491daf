//! Thick-walled cylinder under a radial temperature gradient (plane stress,
//! quarter model) with its closed-form solution.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::assembly::{MaterialMap, MechanicalBc, Method, MethodParams, ThermalBc};
use crate::error::{Result, VemError};
use crate::material::{AnalysisMode, Material};
use crate::mesh::{generate_polar_quad_mesh, generate_polygonal_mesh, Domain, PolygonalMesh};
use crate::pipeline::{solve_thermomechanical, SolveOptions};
use crate::postprocess::{error_eav, error_rms, recover_stress, to_polar};
use crate::solver::SolverConfig;

pub const REGION: &str = "cylinder";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CylinderParams {
    pub r_a: f64,
    pub r_b: f64,
    pub young: f64,
    pub poisson: f64,
    pub expansion: f64,
    pub conductivity: f64,
    pub t_a: f64,
    pub t_b: f64,
}

impl Default for CylinderParams {
    fn default() -> Self {
        CylinderParams { r_a: 20.0, r_b: 60.0, young: 460000.0, poisson: 0.3, expansion: 7.4e-6, conductivity: 20.0, t_a: 0.0, t_b: 500.0 }
    }
}

impl CylinderParams {
    pub fn material(&self) -> Material {
        Material::new(self.young, self.poisson, self.expansion, self.conductivity)
    }

    pub fn materials(&self) -> MaterialMap {
        MaterialMap::from([(REGION.to_string(), self.material())])
    }

    fn check(&self, r: f64) -> Result<()> {
        let slack = 1e-12 * self.r_b;
        if !(r >= self.r_a - slack && r <= self.r_b + slack) {
            return Err(VemError::OutsideAnnulus { r, r_inner: self.r_a, r_outer: self.r_b });
        }
        Ok(())
    }

    pub fn temperature(&self, r: f64) -> f64 {
        self.t_a + (self.t_b - self.t_a) / (self.r_b / self.r_a).ln() * (r / self.r_a).ln()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CylinderExact {
    pub temperature: f64,
    pub u_r: f64,
    pub sigma_r: f64,
    pub sigma_theta: f64,
}

/// Closed-form plane-stress solution with stress-free faces.
pub fn cylinder_exact(r: f64, p: &CylinderParams) -> Result<CylinderExact> {
    p.check(r)?;
    let nu = p.poisson;
    let d = p.expansion * (1.0 + nu) * (p.t_b - p.t_a) / (2.0 * (p.r_b / p.r_a).ln());
    let d1 = 1.0 + nu;
    let d2 = p.r_a.powi(-2) * (nu - 1.0);
    let d3 = 1.0 + nu;
    let d4 = p.r_b.powi(-2) * (nu - 1.0);
    let d5 = -d * (p.r_a.ln() + 1.0 + nu * p.r_a.ln()) + p.expansion * (1.0 + nu) * p.t_a;
    let d6 = -d * (p.r_b.ln() + 1.0 + nu * p.r_b.ln()) + p.expansion * (1.0 + nu) * p.t_b;
    let det = d1 * d4 - d2 * d3;
    let b1 = (d4 * d5 - d2 * d6) / det;
    let b2 = (d1 * d6 - d3 * d5) / det;
    let t = p.temperature(r);
    let c = p.young / (1.0 - nu * nu);
    let at = p.expansion * (1.0 + nu) * t;
    Ok(CylinderExact {
        temperature: t,
        u_r: b1 * r + b2 / r + d * r * r.ln(),
        sigma_r: c * (b1 * (1.0 + nu) + b2 * (nu - 1.0) / (r * r) + d * (r.ln() * (1.0 + nu) + 1.0) - at),
        sigma_theta: c * (b1 * (1.0 + nu) + b2 * (1.0 - nu) / (r * r) + d * (r.ln() * (1.0 + nu) + nu) - at),
    })
}

/// Radial displacement from an RK4 shooting solve of the radial
/// equilibrium equation u'' + u'/r − u/r² = α(1+ν) T'(r) with σ_r = 0 on
/// both faces. Independent of the closed form.
pub fn cylinder_ode_displacement(r: f64, p: &CylinderParams, steps: usize) -> Result<f64> {
    p.check(r)?;
    let nu = p.poisson;
    let k = (p.t_b - p.t_a) / (p.r_b / p.r_a).ln();
    let rhs = |x: f64, y: [f64; 2]| [y[1], -y[1] / x + y[0] / (x * x) + p.expansion * (1.0 + nu) * k / x];
    let integrate = |u_a: f64, to: f64| -> [f64; 2] {
        // σ_r(a) = 0 fixes u'(a) given u(a)
        let mut y = [u_a, p.expansion * (1.0 + nu) * p.t_a - nu * u_a / p.r_a];
        let n = ((steps as f64) * (to - p.r_a) / (p.r_b - p.r_a)).ceil().max(1.0) as usize;
        let h = (to - p.r_a) / n as f64;
        let mut x = p.r_a;
        for _ in 0..n {
            let k1 = rhs(x, y);
            let k2 = rhs(x + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
            let k3 = rhs(x + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
            let k4 = rhs(x + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
            y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
            x += h;
        }
        y
    };
    // the outer radial stress is affine in u(a)
    let sigma_b = |u_a: f64| {
        let y = integrate(u_a, p.r_b);
        y[1] + nu * y[0] / p.r_b - p.expansion * (1.0 + nu) * p.t_b
    };
    let (s0, s1) = (sigma_b(0.0), sigma_b(1.0));
    let u_a = -s0 / (s1 - s0);
    if r == p.r_a {
        return Ok(u_a);
    }
    Ok(integrate(u_a, r)[0])
}

/// Mesh families used by the cylinder runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CylinderMesh {
    /// Structured polar quads: `nr` radial by `ntheta` angular cells.
    Quad { nr: usize, ntheta: usize },
    /// Clipped Voronoi cells.
    Polygonal { seeds: usize, lloyd: usize, seed: u64 },
}

impl CylinderMesh {
    /// Quad mesh with the node count closest to `nodes`.
    pub fn quad_with_nodes(nodes: usize) -> Self {
        // ntheta ≈ 11/7 nr keeps the cells near square at mid radius
        let mut best = (usize::MAX, 1, 1);
        for nr in 1..=400 {
            let nt = ((nr as f64) * 11.0 / 7.0).round().max(1.0) as usize;
            let count = (nr + 1) * (nt + 1);
            let diff = count.abs_diff(nodes);
            if diff < best.0 {
                best = (diff, nr, nt);
            }
        }
        CylinderMesh::Quad { nr: best.1, ntheta: best.2 }
    }

    pub fn build(&self, p: &CylinderParams) -> Result<PolygonalMesh> {
        let quarter = [0.0, std::f64::consts::FRAC_PI_2];
        match *self {
            CylinderMesh::Quad { nr, ntheta } => generate_polar_quad_mesh(p.r_a, p.r_b, quarter, nr, ntheta, REGION),
            CylinderMesh::Polygonal { seeds, lloyd, seed } => {
                let segs = ((seeds as f64).sqrt() * 2.0).ceil() as usize;
                let domain = Domain::annular_sector(p.r_a, p.r_b, quarter, segs.max(8), (3 * segs).max(8));
                generate_polygonal_mesh(&domain, seeds, lloyd, seed, REGION)
            }
        }
    }
}

pub fn cylinder_thermal_bcs(p: &CylinderParams) -> Vec<ThermalBc> {
    vec![ThermalBc::Dirichlet { target: "inner".into(), value: p.t_a }, ThermalBc::Dirichlet { target: "outer".into(), value: p.t_b }]
}

/// Symmetry: no normal displacement on the two straight cuts.
pub fn cylinder_mechanical_bcs() -> Vec<MechanicalBc> {
    vec![
        MechanicalBc::Dirichlet { target: "start".into(), x: None, y: Some(0.0) },
        MechanicalBc::Dirichlet { target: "end".into(), x: Some(0.0), y: None },
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderReport {
    pub method: Method,
    pub mesh: CylinderMesh,
    pub nodes: usize,
    pub elements: usize,
    /// Displacement unknowns, two per node.
    pub dofs: usize,
    pub eav_r: f64,
    pub eav_theta: f64,
    /// Samples left out of E_AV because the exact value is zero.
    pub eav_r_excluded: usize,
    pub eav_theta_excluded: usize,
    pub rms_temperature: f64,
    pub rms_sigma_r: f64,
    pub rms_sigma_theta: f64,
    /// RMS over σ_r and σ_θ samples together, normalized by the largest exact stress.
    pub rms_stress: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CylinderRun {
    pub params: CylinderParams,
    pub mesh: CylinderMesh,
    pub params_method: MethodParams,
    pub solver: SolverConfig,
}

impl CylinderRun {
    pub fn new(mesh: CylinderMesh, method: MethodParams) -> Self {
        CylinderRun { params: CylinderParams::default(), mesh, params_method: method, solver: SolverConfig::default() }
    }
}

/// Nodal samples of the numerical and exact fields.
pub struct CylinderSamples {
    pub radius: Vec<f64>,
    pub temperature: [Vec<f64>; 2],
    pub sigma_r: [Vec<f64>; 2],
    pub sigma_theta: [Vec<f64>; 2],
}

pub fn sample_cylinder(run: &CylinderRun, mesh: &PolygonalMesh) -> Result<CylinderSamples> {
    let p = &run.params;
    let materials = p.materials();
    let options = SolveOptions { params: run.params_method.clone(), mode: AnalysisMode::PlaneStress, t_ref: 0.0, solver: run.solver.clone() };
    let (t, u) = solve_thermomechanical(mesh, &materials, &cylinder_thermal_bcs(p), &cylinder_mechanical_bcs(), &options)?;
    let stress = recover_stress(&u, Some(&t), mesh, &materials)?;
    let n = mesh.num_nodes();
    let mut s = CylinderSamples {
        radius: Vec::with_capacity(n),
        temperature: [Vec::with_capacity(n), Vec::with_capacity(n)],
        sigma_r: [Vec::with_capacity(n), Vec::with_capacity(n)],
        sigma_theta: [Vec::with_capacity(n), Vec::with_capacity(n)],
    };
    // σ_r vanishes on the faces by construction; keep it an exact zero there
    let faces: std::collections::BTreeSet<usize> =
        mesh.boundary_nodes("inner")?.into_iter().chain(mesh.boundary_nodes("outer")?).collect();
    for (i, &x) in mesh.nodes.iter().enumerate() {
        let r = x[0].hypot(x[1]).clamp(p.r_a, p.r_b);
        let mut exact = cylinder_exact(r, p)?;
        if faces.contains(&i) {
            exact.sigma_r = 0.0;
        }
        let polar = to_polar(stress.per_node_averaged[i], x, [0.0, 0.0]);
        s.radius.push(r);
        s.temperature[0].push(t.values[i]);
        s.temperature[1].push(exact.temperature);
        s.sigma_r[0].push(polar[0]);
        s.sigma_r[1].push(exact.sigma_r);
        s.sigma_theta[0].push(polar[1]);
        s.sigma_theta[1].push(exact.sigma_theta);
    }
    Ok(s)
}

pub fn run_cylinder_benchmark(run: &CylinderRun) -> Result<CylinderReport> {
    let start = Instant::now();
    let mesh = run.mesh.build(&run.params)?;
    let s = sample_cylinder(run, &mesh)?;
    let er = error_eav(&s.sigma_r[0], &s.sigma_r[1])?;
    let et = error_eav(&s.sigma_theta[0], &s.sigma_theta[1])?;
    let both_num: Vec<f64> = s.sigma_r[0].iter().chain(&s.sigma_theta[0]).copied().collect();
    let both_exact: Vec<f64> = s.sigma_r[1].iter().chain(&s.sigma_theta[1]).copied().collect();
    Ok(CylinderReport {
        method: run.params_method.method,
        mesh: run.mesh.clone(),
        nodes: mesh.num_nodes(),
        elements: mesh.num_elements(),
        dofs: 2 * mesh.num_nodes(),
        eav_r: er.percent,
        eav_theta: et.percent,
        eav_r_excluded: er.excluded,
        eav_theta_excluded: et.excluded,
        rms_temperature: error_rms(&s.temperature[0], &s.temperature[1])?,
        rms_sigma_r: error_rms(&s.sigma_r[0], &s.sigma_r[1])?,
        rms_sigma_theta: error_rms(&s.sigma_theta[0], &s.sigma_theta[1])?,
        rms_stress: error_rms(&both_num, &both_exact)?,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub method: Method,
    pub levels: Vec<CylinderReport>,
    /// −d log(RMS) / d log(nDof), least squares over all levels.
    pub temperature_slope: f64,
    pub stress_slope: f64,
    /// False when some refinement did not reduce the error.
    pub temperature_monotone: bool,
    pub stress_monotone: bool,
}

/// Nested polar-quad levels: the base mesh doubled `levels − 1` times.
pub fn nested_quad_levels(base: (usize, usize), levels: usize) -> Vec<CylinderMesh> {
    (0..levels).map(|k| CylinderMesh::Quad { nr: base.0 << k, ntheta: base.1 << k }).collect()
}

/// Least-squares slope of log(y) against log(x), negated.
pub fn convergence_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    -sxy / sxx
}

pub fn run_convergence(method: &MethodParams, meshes: &[CylinderMesh]) -> Result<ConvergenceReport> {
    if meshes.len() < 4 {
        return Err(VemError::Config(format!("a convergence study needs at least 4 levels, got {}", meshes.len())));
    }
    let levels: Vec<CylinderReport> =
        meshes.iter().map(|m| run_cylinder_benchmark(&CylinderRun::new(m.clone(), method.clone()))).collect::<Result<_>>()?;
    let dofs: Vec<f64> = levels.iter().map(|l| l.dofs as f64).collect();
    let rt: Vec<f64> = levels.iter().map(|l| l.rms_temperature).collect();
    let rs: Vec<f64> = levels.iter().map(|l| l.rms_stress).collect();
    let monotone = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let report = ConvergenceReport {
        method: method.method,
        temperature_slope: convergence_slope(&dofs, &rt),
        stress_slope: convergence_slope(&dofs, &rs),
        temperature_monotone: monotone(&rt),
        stress_monotone: monotone(&rs),
        levels,
    };
    if !report.temperature_monotone || !report.stress_monotone {
        log::warn!("convergence sequence is not monotone");
    }
    Ok(report)
}
