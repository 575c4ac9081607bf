//! Acceptance suite: one test per shipped guarantee, each printing a
//! PASS/FAIL line (visible with `cargo test -- --nocapture`). Tolerances are
//! pinned here, not configured.

use colwave::energy;
use colwave::grid::{EpsGrid, Mesh, SpaceAxis, TimeAxis};
use colwave::nets::{self, DistTarget, ScalarNet};
use colwave::riesz::{self, hadamard, ConeSign, PairOptions, RieszParams};
use colwave::scenario::riesz_battery;
use colwave::solver::{self, CauchyData, SolveOptions};
use colwave::spacetime::{self, BackgroundMetric, MetricSplit, SubBox};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn criterion(id: u32, name: &str, pass: bool) {
    println!(
        "ACCEPTANCE {id:02} {name}: {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance criterion {id:02} ({name}) failed");
}

fn st_mesh_1d(nt: usize, nx: usize, t1: f64) -> Mesh {
    Mesh::space_time(
        TimeAxis { t0: 0.0, t1, n: nt },
        vec![SpaceAxis {
            extent: TWO_PI,
            n: nx,
        }],
    )
    .unwrap()
}

fn sine_data(mesh: &Mesh, grid: &EpsGrid) -> CauchyData {
    let s = mesh.spatial_part();
    let u0 = ScalarNet::from_fn(grid.clone(), s.clone(), |_, x| x[0].sin()).unwrap();
    let u1 = ScalarNet::from_fn(grid.clone(), s, |_, _| 0.0).unwrap();
    CauchyData::new(u0, u1).unwrap()
}

#[test]
fn criterion_01_riesz_constants() {
    let ok = riesz::riesz_constant(2.0, 2) == 0.5 && riesz::riesz_constant(2.0, 4) == 0.0;
    criterion(1, "riesz-constant closed forms", ok);
}

#[test]
fn criterion_02_riesz_delta_property() {
    let opts = PairOptions::default();
    let mut ok = true;
    for (n, tol) in [(2usize, 1e-6), (4usize, 1e-5)] {
        let params = RieszParams::new(0.0, n, ConeSign::Advanced).unwrap();
        for phi in riesz_battery(n).unwrap() {
            let got = riesz::riesz_pair(&params, &phi, &opts).unwrap();
            let want = phi.eval(&vec![0.0; n]);
            if (got - want).abs() > tol * want.abs() {
                eprintln!("n = {n}: |{got} - {want}| over budget");
                ok = false;
            }
        }
    }
    criterion(2, "riesz delta property R(0) = delta", ok);
}

#[test]
fn criterion_03_riesz_recursion() {
    let opts = PairOptions::default();
    let r22 = riesz::verify_recursion(2.0, 2, ConeSign::Advanced, &riesz_battery(2).unwrap(), &opts)
        .unwrap();
    let r04 = riesz::verify_recursion(0.0, 4, ConeSign::Advanced, &riesz_battery(4).unwrap(), &opts)
        .unwrap();
    let ok = r22.max_deviation < 1e-6 && r04.max_deviation < 1e-5;
    if !ok {
        eprintln!(
            "recursion deviations: (2,2) -> {:.3e}, (0,4) -> {:.3e}",
            r22.max_deviation, r04.max_deviation
        );
    }
    criterion(3, "riesz recursion box R(a+2) = R(a)", ok);
}

#[test]
fn criterion_04_hadamard_v0_minkowski() {
    let m = hadamard::Minkowski { dim: 2 };
    let dirs = vec![
        vec![0.0, 1.0],
        vec![1.0, 0.0],
        vec![0.6, 0.8],
        vec![-0.7, 0.3],
    ];
    let rays = hadamard::hadamard_v0(
        &m,
        &[0.0, 0.0],
        &dirs,
        0.5,
        &hadamard::HadamardOptions::default(),
    )
    .unwrap();
    let mut ok = true;
    for ray in &rays {
        if ray.truncated || ray.samples[0] != (0.0, 1.0) {
            ok = false;
        }
        for (s, v) in &ray.samples {
            if (v - 1.0).abs() >= 1e-8 {
                eprintln!("V0 deviates by {:.2e} at s = {s}", (v - 1.0).abs());
                ok = false;
            }
        }
    }
    criterion(4, "hadamard V0 = 1 on flat rays", ok);
}

#[test]
fn criterion_05_solver_order() {
    let grid = EpsGrid::geometric(0.2, 4).unwrap();
    let base = st_mesh_1d(9, 256, 1.0);
    let exact = |t: f64, x: &[f64]| x[0].sin() * t.cos();
    let rep = solver::convergence_order(
        &|m| spacetime::make_minkowski(m, &grid),
        &|m| Ok(sine_data(m, &grid)),
        &base,
        1.0,
        solver::ConvergenceReference::Exact(&exact),
        &SolveOptions::default(),
    )
    .unwrap();
    let ok = rep.resolutions == vec![256, 512, 1024]
        && rep.orders.iter().all(|o| (o - 2.0).abs() <= 0.2);
    if !ok {
        eprintln!("orders {:?} at {:?}", rep.orders, rep.resolutions);
    }
    criterion(5, "solver second-order vs d'Alembert oracle", ok);
}

#[test]
fn criterion_06_distributional_cauchy_data() {
    let grid = EpsGrid::geometric(0.1, 6).unwrap();
    let mesh = st_mesh_1d(9, 8192, 0.5);
    let g = spacetime::make_minkowski(&mesh, &grid).unwrap();
    let x0 = std::f64::consts::PI;
    let battery: Vec<_> = [
        (x0, 0.20, 1.0),
        (x0 - 0.4, 0.15, 0.9),
        (x0 + 0.5, 0.22, -1.1),
        (x0 - 0.1, 0.18, 0.6),
        (x0 + 0.2, 0.25, -0.8),
    ]
    .iter()
    .map(|(c, w, a)| colwave::testfn::TestFunction::gaussian(vec![*c], *w, *a).unwrap())
    .collect();
    let rep = solver::solve_distributional(
        &g,
        None,
        Some(&DistTarget::Delta { x0: vec![x0] }),
        0.5,
        &battery,
        1e-2,
        &SolveOptions::default(),
    )
    .unwrap();
    let mut ok = rep.association.associated;
    for (i, trace) in rep.association.per_phi.iter().enumerate() {
        let exact = rep.shadow.pair(&battery[i]).unwrap();
        let devs: Vec<f64> = trace.pairings.iter().map(|p| (p - exact).abs()).collect();
        let tail = grid.tail_indices();
        for w in devs[tail].windows(2) {
            if w[1] >= w[0] {
                eprintln!("phi {i}: tail deviations not decreasing: {devs:?}");
                ok = false;
            }
        }
        if *devs.last().unwrap() >= 1e-2 {
            eprintln!("phi {i}: final deviation {:.3e}", devs.last().unwrap());
            ok = false;
        }
    }
    criterion(6, "distributional data associate with half-indicator", ok);
}

fn standing_wave_energy() -> (MetricSplit, solver::SolutionNet) {
    let grid = EpsGrid::geometric(0.2, 4).unwrap();
    let mesh = st_mesh_1d(17, 1024, 1.0);
    let g = spacetime::make_minkowski(&mesh, &grid).unwrap();
    let data = sine_data(&mesh, &grid);
    let sol = solver::solve(&g, &data, 1.0, &SolveOptions::default()).unwrap();
    (g, sol)
}

#[test]
fn criterion_07_energy_conservation() {
    let (g, sol) = standing_wave_energy();
    let smesh = &sol.spatial_mesh;
    let mut ok = true;
    for (k_eps, member) in sol.members.iter().enumerate() {
        for snap in &member.snapshots {
            let geo = energy::slice_geometry(&g, k_eps, snap.tau).unwrap();
            let derivs = energy::slice_derivatives(snap, smesh, &geo).unwrap();
            let s1 = energy::energy_summand(1, &geo, &derivs, smesh).unwrap();
            let pi_half = std::f64::consts::PI / 2.0;
            if (s1 - pi_half).abs() / pi_half >= 1e-4 {
                eprintln!("order-1 summand {s1} at tau {}", snap.tau);
                ok = false;
            }
            let e1 = energy::energy_integral(1, &geo, &derivs, smesh).unwrap();
            let expect = pi_half * (1.0 + snap.tau.cos() * snap.tau.cos());
            if (e1 - expect).abs() / expect >= 1e-3 {
                eprintln!("E1 {e1} vs {expect} at tau {}", snap.tau);
                ok = false;
            }
        }
    }
    criterion(7, "static energy conservation and closed form", ok);
}

#[test]
fn criterion_08_norm_energy_equivalence() {
    let (g, sol) = standing_wave_energy();
    let rep = energy::energy_report(&g, &sol, 1, 2.0).unwrap();
    rep.validate().unwrap();
    let ne = energy::verify_norm_energy_equivalence(&rep, &sol.grid, 1, [0.2, 1.2]).unwrap();
    if !ne.pass {
        eprintln!("ratio band [{}, {}]", ne.c_low, ne.c_high);
    }
    criterion(8, "norm-energy equivalence band", ne.pass);
}

#[test]
fn criterion_09_gronwall_uniformity() {
    let grid = EpsGrid::geometric(0.2, 6).unwrap();
    let mesh = Mesh::space_time(
        TimeAxis {
            t0: -0.25,
            t1: 0.5,
            n: 513,
        },
        vec![
            SpaceAxis {
                extent: TWO_PI,
                n: 64,
            },
            SpaceAxis {
                extent: TWO_PI,
                n: 64,
            },
        ],
    )
    .unwrap();
    let g = spacetime::make_pp_wave_rosen(&mesh, &grid, true).unwrap();
    let s = mesh.spatial_part();
    let c = std::f64::consts::PI;
    let u0 = ScalarNet::from_fn(grid.clone(), s.clone(), move |_, x| {
        let r2 = ((x[0] - c) * (x[0] - c) + (x[1] - c) * (x[1] - c)) / 1.0;
        if r2 < 1.0 {
            (-1.0 / (1.0 - r2)).exp()
        } else {
            0.0
        }
    })
    .unwrap();
    let u1 = ScalarNet::from_fn(grid.clone(), s, |_, _| 0.0).unwrap();
    let data = CauchyData::new(u0, u1).unwrap();
    let opts = SolveOptions {
        n_snapshots: 17,
        ..Default::default()
    };
    let sol = solver::solve(&g, &data, 0.5, &opts).unwrap();
    assert!(sol.all_complete());
    let gr = energy::verify_gronwall(&g, &sol, None, 2.0).unwrap();
    let rep = energy::energy_report(&g, &sol, 1, 2.0).unwrap();
    let sup_e: Vec<f64> = rep
        .e_values
        .iter()
        .map(|per_k| per_k[1].iter().cloned().fold(0.0f64, f64::max))
        .collect();
    let est = nets::estimate_order(&sup_e, &grid).unwrap();
    let ok = gr.pass && est.exponent <= 0.3;
    if !ok {
        eprintln!(
            "gronwall factor {} (C''' = {:?}), sup-energy exponent {}",
            gr.uniformity_factor, gr.c3, est.exponent
        );
    }
    criterion(9, "gronwall constant uniform across eps", ok);
}

#[test]
fn criterion_10_moderateness_machinery() {
    // exponent recovery on synthetic power nets
    let grid = EpsGrid::geometric(0.1, 6).unwrap();
    let mut ok = true;
    for n in 0..=3 {
        let sup: Vec<f64> = grid.iter().map(|e| e.powi(-n)).collect();
        let est = nets::estimate_order(&sup, &grid).unwrap();
        if (est.exponent - n as f64).abs() >= 0.05 {
            eprintln!("N = {n}: fitted {}", est.exponent);
            ok = false;
        }
    }
    // negligible data propagate: eps^4-scaled bump solutions decay >= 3.5
    let mesh = st_mesh_1d(9, 256, 0.5);
    let sgrid = EpsGrid::geometric(0.4, 5).unwrap();
    let g = spacetime::make_minkowski(&mesh, &sgrid).unwrap();
    let s = mesh.spatial_part();
    let u0 = ScalarNet::from_fn(sgrid.clone(), s.clone(), |e, x| {
        let r2 = ((x[0] - 3.0) / 0.8).powi(2);
        if r2 < 1.0 {
            e.powi(4) * (-1.0 / (1.0 - r2)).exp()
        } else {
            0.0
        }
    })
    .unwrap();
    let u1 = ScalarNet::from_fn(sgrid.clone(), s, |_, _| 0.0).unwrap();
    let data = CauchyData::new(u0, u1).unwrap();
    let sol = solver::solve(&g, &data, 0.5, &SolveOptions::default()).unwrap();
    let est = nets::estimate_order(&sol.sup_abs(), &sgrid).unwrap();
    if est.decay_exponent() < 3.5 {
        eprintln!("solution decay exponent {}", est.decay_exponent());
        ok = false;
    }
    criterion(10, "moderateness/negligibility machinery", ok);
}

#[test]
fn criterion_11_conditions_pipeline() {
    let grid = EpsGrid::geometric(0.2, 6).unwrap();
    let slack = 0.3;
    let mut ok = true;

    let mesh1 = st_mesh_1d(17, 64, 1.0);
    let mink = spacetime::make_minkowski(&mesh1, &grid).unwrap();
    let rw = spacetime::make_robertson_walker(&mesh1, &grid, |_, _| 2.0, |_, _| vec![1.0]).unwrap();
    let mesh2 = Mesh::space_time(
        TimeAxis {
            t0: -0.25,
            t1: 0.5,
            n: 513,
        },
        vec![
            SpaceAxis { extent: 4.0, n: 8 },
            SpaceAxis { extent: 4.0, n: 8 },
        ],
    )
    .unwrap();
    let ppw = spacetime::make_pp_wave_rosen(&mesh2, &grid, true).unwrap();
    for (name, g) in [("minkowski", &mink), ("rw", &rw), ("ppwave", &ppw)] {
        let full = SubBox::full(g.mesh());
        let a = spacetime::check_condition_a(g, &full, 2, slack).unwrap();
        let b = spacetime::check_condition_b(g, &full, slack).unwrap();
        let s = spacetime::check_splitting(g, &BackgroundMetric::default()).unwrap();
        if !(a.pass && b.pass && s.pass) {
            eprintln!("{name}: A {} B {} split {}", a.pass, b.pass, s.pass);
            ok = false;
        }
    }
    // the adversarial net must FAIL
    let adv = MetricSplit::from_fields(
        grid,
        mesh1.clone(),
        |_, _| 1.0,
        |e, p| vec![1.0 + p[1].sin() / (e * e)],
    )
    .unwrap();
    let a = spacetime::check_condition_a(&adv, &SubBox::full(&mesh1), 1, slack).unwrap();
    if a.pass {
        eprintln!("adversarial metric passed condition (A)");
        ok = false;
    }
    criterion(11, "conditions pipeline pass/fail split", ok);
}

#[test]
fn criterion_12_domain_of_dependence() {
    let grid = EpsGrid::geometric(0.2, 4).unwrap();
    let mesh = st_mesh_1d(9, 1024, 1.0);
    let opts = SolveOptions {
        cfl: 0.95,
        ..Default::default()
    };
    let mut ok = true;
    for constant_warp in [1.0f64, 2.0] {
        let g = spacetime::make_robertson_walker(&mesh, &grid, move |_, _| constant_warp, |_, _| {
            vec![1.0]
        })
        .unwrap();
        let s = mesh.spatial_part();
        let u0 = ScalarNet::from_fn(grid.clone(), s.clone(), |_, x| {
            let r2 = ((x[0] - 3.0) / 0.5).powi(2);
            if r2 < 1.0 {
                (-1.0 / (1.0 - r2)).exp()
            } else {
                0.0
            }
        })
        .unwrap();
        let u1 = ScalarNet::from_fn(grid.clone(), s, |_, _| 0.0).unwrap();
        let data = CauchyData::new(u0, u1).unwrap().with_support_box(SubBox {
            ranges: vec![[2.5, 3.5]],
        });
        let sol = solver::solve(&g, &data, 1.0, &opts).unwrap();
        let rep = solver::domain_of_dependence_check(&g, &data, &sol, 1e-8, None).unwrap();
        if !rep.pass {
            eprintln!(
                "warp {constant_warp}: outside residuals {:?}",
                rep.max_outside_rel
            );
            ok = false;
        }
    }
    criterion(12, "support inside expanded causal future", ok);
}
