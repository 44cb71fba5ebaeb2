use std::path::Path;
use std::process::{Command, Output};

fn hstokes(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hstokes"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = hstokes(&["solve", "--structured", "16", "--k", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["solution.json", "psi.vtk", "omega.vtk", "boundary_vorticity.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let s = json(&dir.path().join("solution.json"));
    assert_eq!(s["stabilized"], true);
    assert!(s["omega"]["max"].as_f64().unwrap() > 15.0);
    assert!(s["errors"]["omega_l2"].as_f64().unwrap() < 0.05);
    assert!(s["timings"].is_null());
    let csv = std::fs::read_to_string(dir.path().join("boundary_vorticity.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("s,omega"));
    assert_eq!(csv.lines().count(), 1 + 64 + 1);
}

#[test]
fn unstabilized_run_is_marked() {
    let dir = tempfile::tempdir().unwrap();
    let out = hstokes(&["solve", "--perturbed", "6", "--seed", "3", "--k", "0"], dir.path());
    assert!(out.status.success());
    let s = json(&dir.path().join("solution.json"));
    assert_eq!(s["stabilized"], false);
    assert_eq!(s["seed"], 3);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["solve", "--perturbed", "8", "--k", "2", "--kref", "3"];
    assert!(hstokes(&args, a.path()).status.success());
    assert!(hstokes(&args, b.path()).status.success());
    for f in ["solution.json", "boundary_vorticity.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn timings_only_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let out = hstokes(&["solve", "--structured", "4", "--k", "1", "--record-timings"], dir.path());
    assert!(out.status.success());
    let s = json(&dir.path().join("solution.json"));
    assert!(s["timings"]["total"].as_f64().unwrap() >= 0.0);
}

#[test]
fn convergence_table_and_orders() {
    let dir = tempfile::tempdir().unwrap();
    let out = hstokes(&["convergence", "--structured", "4,8,6", "--k", "0,1"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "mesh_id,h,sigma,k,n_vertices,err_omega_l2,err_omega_M,err_psi_l2,err_psi_h1,omega_max_boundary,seconds"
    );
    assert_eq!(lines.len(), 7);
    // sorted by decreasing h within each k; seconds column empty
    assert!(lines[1].starts_with("structured-4,") && lines[3].starts_with("structured-8,"));
    assert!(lines[1].ends_with(','));
    let o = json(&dir.path().join("orders.json"));
    assert_eq!(o["orders"].as_array().unwrap().len(), 2);
    assert!(o["orders"][1]["omega_l2_order"].as_f64().unwrap() > 1.0);
}

#[test]
fn convergence_needs_three_meshes() {
    let dir = tempfile::tempdir().unwrap();
    let out = hstokes(&["convergence", "--structured", "8"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("need >= 3 meshes"));
}

#[test]
fn harmonics_stats_per_level() {
    let dir = tempfile::tempdir().unwrap();
    let out = hstokes(&["harmonics", "--perturbed", "6", "--kmax", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("eta_stats.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "k,min,max,energy");
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[1], "0,0.0,0.0,0.0");
    let names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names.iter().filter(|n| n.starts_with("lift_")).count(), 3);
    assert_eq!(names.iter().filter(|n| n.starts_with("eta_") && n.ends_with(".vtk")).count(), 3);
}

#[test]
fn harmonics_rejects_interior_vertex() {
    let dir = tempfile::tempdir().unwrap();
    // vertex 12 is the centre of the 4 x 4 grid
    let out = hstokes(&["harmonics", "--structured", "4", "--vertex", "12", "--kmax", "1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not on the boundary"));
}

#[test]
fn stability_not_reached_marker() {
    let dir = tempfile::tempdir().unwrap();
    let out = hstokes(
        &["stability", "--structured", "4", "--kmax", "2", "--kref", "4", "--delta", "1e6"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let k = json(&dir.path().join("K_estimate.json"));
    assert_eq!(k["status"], "not-reached");
    assert!(k["k_estimate"].is_null());
    let csv = std::fs::read_to_string(dir.path().join("stability.csv")).unwrap();
    let rho: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(rho.len(), 3);
    assert!(rho.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn usage_and_numerical_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hstokes(&["solve"], dir.path()).status.code(), Some(1));
    assert_eq!(hstokes(&["solve", "--bogus"], dir.path()).status.code(), Some(1));
    assert_eq!(
        hstokes(&["stability", "--structured", "4", "--kmax", "3", "--kref", "3"], dir.path()).status.code(),
        Some(1)
    );
    let out = hstokes(&["solve", "--structured", "8", "--k", "1", "--tol", "1e-300"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn mesh_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("square.mesh");
    std::fs::write(&mesh, "4 2\n0 0\n1 0\n0 1\n1 1\n0 1 3\n0 3 2\n").unwrap();
    let out = hstokes(&["solve", "--mesh", mesh.to_str().unwrap(), "--k", "1"], &dir.path().join("o"));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&dir.path().join("o/solution.json"));
    assert_eq!(s["mesh"]["id"], "square");
}
