//! Run configuration and the four reporting commands. Every command writes
//! its files into `RunConfig::out`; CSV and JSON outputs depend only on the
//! configuration unless timings are requested.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use crate::analytic::{bercovier_engelman, AnalyticCase, ForcingVariant};
use crate::error::{Error, Result};
use crate::harmonic::{
    build_basis, estimate_k_from_scan, hat_trace, nonharmonic_part, stability_scan, StabilityRow,
};
use crate::hierarchy::MeshHierarchy;
use crate::mesh::{build_perturbed_unit_square, build_structured_unit_square, load_mesh, TriangleMesh, DEFAULT_JITTER};
use crate::space::LevelSpace;
use crate::stokes::{boundary_vorticity_trace, solve_stokes_on, StokesConfig};
use crate::verification::{convergence_study, extremum_of_vorticity, relative_errors, StudyOptions};
use crate::vtk::write_vtk;

pub const DEFAULT_SEED: u64 = 20_240_917;

pub const CONVERGENCE_HEADER: &str = "mesh_id,h,sigma,k,n_vertices,err_omega_l2,err_omega_M,err_psi_l2,err_psi_h1,omega_max_boundary,seconds";
pub const BOUNDARY_HEADER: &str = "s,omega";
pub const ETA_HEADER: &str = "k,min,max,energy";
pub const STABILITY_HEADER: &str = "k,rho_max,hat_rho_max";

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeshSource {
    File { path: PathBuf },
    Structured { n: usize },
    Perturbed { n: usize, seed: u64 },
}

impl MeshSource {
    pub fn build(&self) -> Result<TriangleMesh> {
        match self {
            MeshSource::File { path } => load_mesh(path),
            MeshSource::Structured { n } => build_structured_unit_square(*n),
            MeshSource::Perturbed { n, seed } => build_perturbed_unit_square(*n, *seed, DEFAULT_JITTER),
        }
    }

    pub fn id(&self) -> String {
        match self {
            MeshSource::File { path } => path
                .file_stem()
                .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned()),
            MeshSource::Structured { n } => format!("structured-{n}"),
            MeshSource::Perturbed { n, seed } => format!("perturbed-{n}-s{seed}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Convergence,
    Harmonics,
    Stability,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    /// One source for `solve`, `harmonics` and `stability`; the family for `convergence`.
    pub meshes: Vec<MeshSource>,
    /// Levels to run; `convergence` uses every entry, the others the first.
    pub k: Vec<usize>,
    pub kref: Option<usize>,
    /// Largest level scanned by `harmonics` and `stability`.
    pub kmax: usize,
    pub delta: f64,
    pub tol: f64,
    pub quad_degree: usize,
    pub out: PathBuf,
    pub paper_literal_forcing: bool,
    /// Coarse boundary vertex for `harmonics`; defaults to the one nearest `(1/2, 0)`.
    pub vertex: Option<usize>,
    pub seed: u64,
    #[serde(skip)]
    pub record_timings: bool,
}

impl RunConfig {
    pub fn new(command: Command, meshes: Vec<MeshSource>, out: impl Into<PathBuf>) -> Self {
        Self {
            command,
            meshes,
            k: vec![4],
            kref: None,
            kmax: 4,
            delta: 1.0,
            tol: crate::fem::DEFAULT_TOL,
            quad_degree: 5,
            out: out.into(),
            paper_literal_forcing: false,
            vertex: None,
            seed: DEFAULT_SEED,
            record_timings: false,
        }
    }

    pub fn variant(&self) -> ForcingVariant {
        if self.paper_literal_forcing {
            ForcingVariant::Literal
        } else {
            ForcingVariant::Consistent
        }
    }

    fn case(&self) -> AnalyticCase {
        bercovier_engelman(self.variant())
    }

    fn single_mesh(&self) -> Result<&MeshSource> {
        match self.meshes.as_slice() {
            [m] => Ok(m),
            [] => Err(Error::InvalidArgument("no mesh given".into())),
            _ => Err(Error::InvalidArgument(format!(
                "{:?} takes exactly one mesh, got {}",
                self.command,
                self.meshes.len()
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k.is_empty() {
            return Err(Error::InvalidArgument("no level k given".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tol)));
        }
        if !(self.delta > 0.0) {
            return Err(Error::InvalidArgument(format!("delta must be positive, got {}", self.delta)));
        }
        let kmax = match self.command {
            Command::Harmonics | Command::Stability => self.kmax,
            _ => *self.k.iter().max().unwrap(),
        };
        if let Some(r) = self.kref {
            let ok = match self.command {
                Command::Harmonics => true,
                _ => r > kmax,
            };
            if !ok {
                return Err(Error::InvalidArgument(format!(
                    "K_ref = {r} must exceed the largest level {kmax}"
                )));
            }
        }
        if self.command == Command::Convergence && self.meshes.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "need >= 3 meshes for a convergence study, got {}",
                self.meshes.len()
            )));
        }
        Ok(())
    }
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out)?;
    match cfg.command {
        Command::Solve => cmd_solve(cfg),
        Command::Convergence => cmd_convergence(cfg),
        Command::Harmonics => cmd_harmonics(cfg),
        Command::Stability => cmd_stability(cfg),
    }
}

fn mesh_summary(src: &MeshSource, m: &TriangleMesh) -> Result<serde_json::Value> {
    Ok(json!({
        "id": src.id(),
        "source": src,
        "n_vertices": m.vertex_count(),
        "n_triangles": m.triangle_count(),
        "n_boundary_vertices": m.boundary_vertices.len(),
        "h": m.mesh_size(),
        "sigma": m.sigma_regularity()?,
    }))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

/// `solution.json`, `psi.vtk`, `omega.vtk`, `boundary_vorticity.csv`.
pub fn cmd_solve(cfg: &RunConfig) -> Result<()> {
    let start = Instant::now();
    let src = cfg.single_mesh()?;
    let k = cfg.k[0];
    let mesh = src.build()?;
    let depth = cfg.kref.unwrap_or(k).max(k);
    let h = MeshHierarchy::with_depth(mesh, depth);
    let coarse = LevelSpace::new(&h, 0)?;
    let fine_owned;
    let fine = if k == 0 {
        &coarse
    } else {
        fine_owned = LevelSpace::new(&h, k)?;
        &fine_owned
    };
    let case = cfg.case();
    let scfg = StokesConfig {
        k,
        tol: cfg.tol,
        quadrature_degree: cfg.quad_degree,
    };
    let sol = solve_stokes_on(&scfg, &coarse, fine, |p| case.forcing(p))?;
    let reference = match cfg.kref {
        Some(r) => Some(LevelSpace::new(&h, r)?),
        None => None,
    };
    let errors = relative_errors(&sol, &case, &coarse, fine, reference.as_ref(), cfg.tol)?;
    let ext = extremum_of_vorticity(&sol, fine.mesh())?;
    let d = &sol.diagnostics;

    let summary = json!({
        "command": "solve",
        "seed": cfg.seed,
        "mesh": mesh_summary(src, h.coarse())?,
        "k": k,
        "stabilized": k > 0,
        "forcing": cfg.variant(),
        "tol": cfg.tol,
        "quad_degree": cfg.quad_degree,
        "n_vertices_fine": fine.vertex_count(),
        "omega": ext,
        "psi": { "min": sol.psi.min(), "max": sol.psi.max() },
        "errors": errors,
        "residuals": {
            "omega0_solve": d.omega0_solve,
            "psi_solve": d.psi_solve,
            "max_lift_iterations": d.max_lift_iterations,
            "harmonic": d.harmonic_residual,
            "gram": d.gram_residual,
            "block": d.block_residual,
        },
        "timings": if cfg.record_timings { serde_json::to_value(&d.timings)? } else { serde_json::Value::Null },
    });
    write_json(&cfg.out.join("solution.json"), &summary)?;
    write_vtk(cfg.out.join("psi.vtk"), h.coarse(), "stream function", &[("psi", &sol.psi)])?;
    write_vtk(cfg.out.join("omega.vtk"), fine.mesh(), "vorticity", &[("omega", &sol.omega)])?;

    let mut csv = format!("{BOUNDARY_HEADER}\n");
    for (s, w) in boundary_vorticity_trace(&sol, h.coarse()) {
        writeln!(csv, "{s:?},{w:?}").unwrap();
    }
    std::fs::write(cfg.out.join("boundary_vorticity.csv"), csv)?;
    log::info!("solve finished in {:.2}s", start.elapsed().as_secs_f64());
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:?}"))
}

/// `convergence.csv` and `orders.json`, one block per requested `k`.
pub fn cmd_convergence(cfg: &RunConfig) -> Result<()> {
    let family = cfg
        .meshes
        .iter()
        .map(|s| Ok((s.id(), s.build()?)))
        .collect::<Result<Vec<_>>>()?;
    let case = cfg.case();
    let mut csv = format!("{CONVERGENCE_HEADER}\n");
    let mut orders = Vec::new();
    for &k in &cfg.k {
        let opts = StudyOptions {
            tol: cfg.tol,
            quadrature_degree: cfg.quad_degree,
            m_norm_offset: Some(cfg.kref.map_or(1, |r| r - k)),
        };
        let (records, fitted) = convergence_study(&family, k, &case, &opts)?;
        for r in &records {
            writeln!(
                csv,
                "{},{:?},{:?},{},{},{:?},{},{:?},{:?},{:?},{}",
                r.mesh_id,
                r.h,
                r.sigma,
                r.k,
                r.n_vertices,
                r.err_omega_l2,
                opt(r.err_omega_m),
                r.err_psi_l2,
                r.err_psi_h1,
                r.omega_max_boundary,
                opt(cfg.record_timings.then_some(r.seconds)),
            )
            .unwrap();
        }
        orders.push(fitted);
    }
    std::fs::write(cfg.out.join("convergence.csv"), csv)?;
    write_json(
        &cfg.out.join("orders.json"),
        &json!({
            "command": "convergence",
            "seed": cfg.seed,
            "forcing": cfg.variant(),
            "meshes": cfg.meshes,
            "orders": orders,
        }),
    )
}

/// Coarse boundary vertex closest to `(1/2, 0)`, ties broken by index.
pub fn default_vertex(coarse: &TriangleMesh) -> usize {
    let d = |v: usize| {
        let p = coarse.vertices[v];
        (p[0] - 0.5).powi(2) + p[1].powi(2)
    };
    *coarse
        .boundary_vertices
        .iter()
        .min_by(|&&a, &&b| d(a).partial_cmp(&d(b)).unwrap().then(a.cmp(&b)))
        .expect("a valid mesh has boundary vertices")
}

/// `lift_S_k.vtk`, `eta_S_k.vtk` for `k = 0..=kmax` and `eta_stats.csv`.
/// `energy` is the squared gradient norm `(grad eta, grad eta)`.
pub fn cmd_harmonics(cfg: &RunConfig) -> Result<()> {
    let src = cfg.single_mesh()?;
    let h = MeshHierarchy::with_depth(src.build()?, cfg.kmax);
    let s = match cfg.vertex {
        Some(v) => v,
        None => default_vertex(h.coarse()),
    };
    let trace = hat_trace(h.coarse(), s)?;
    let mut csv = format!("{ETA_HEADER}\n");
    for k in 0..=cfg.kmax {
        let space = LevelSpace::new(&h, k)?;
        let (lift, _) = space.lift(&trace, cfg.tol)?;
        let eta = nonharmonic_part(&space, s, cfg.tol)?;
        let energy = space.ops.stiffness.quadratic_form(&eta.values);
        writeln!(csv, "{k},{:?},{:?},{:?}", eta.min(), eta.max(), energy).unwrap();
        write_vtk(cfg.out.join(format!("lift_{s}_{k}.vtk")), space.mesh(), "harmonic lift", &[("lift", &lift)])?;
        write_vtk(cfg.out.join(format!("eta_{s}_{k}.vtk")), space.mesh(), "non-harmonic part", &[("eta", &eta)])?;
    }
    std::fs::write(cfg.out.join("eta_stats.csv"), csv)?;
    Ok(())
}

/// `stability.csv` over `k = 0..=kmax` against `K_ref` (default `kmax + 2`)
/// and `K_estimate.json` for `delta`.
pub fn cmd_stability(cfg: &RunConfig) -> Result<()> {
    let src = cfg.single_mesh()?;
    let kref = cfg.kref.unwrap_or(cfg.kmax + 2);
    let h = MeshHierarchy::with_depth(src.build()?, kref);
    let reference = LevelSpace::new(&h, kref)?;
    let mut csv = format!("{STABILITY_HEADER}\n");
    let mut rows = Vec::new();
    for k in 0..=cfg.kmax {
        let space = LevelSpace::new(&h, k)?;
        let basis = build_basis(&space, cfg.tol)?;
        let scan = stability_scan(&basis, &reference, cfg.tol)?;
        let hat_max = scan.hat_ratios.iter().cloned().fold(0.0, f64::max);
        writeln!(csv, "{k},{:?},{:?}", scan.rho_max, hat_max).unwrap();
        rows.push(StabilityRow { k, rho_max: scan.rho_max });
    }
    std::fs::write(cfg.out.join("stability.csv"), csv)?;
    let estimate = estimate_k_from_scan(&rows, cfg.delta);
    write_json(
        &cfg.out.join("K_estimate.json"),
        &json!({
            "command": "stability",
            "seed": cfg.seed,
            "mesh": mesh_summary(src, h.coarse())?,
            "delta": cfg.delta,
            "bound": 1.0 / cfg.delta,
            "kref": kref,
            "kmax": cfg.kmax,
            "status": if estimate.is_some() { "reached" } else { "not-reached" },
            "k_estimate": estimate,
            "rows": rows,
        }),
    )
}
