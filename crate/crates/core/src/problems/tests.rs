use super::*;
use super::cavity::{lid, noslip};
use super::channel::walls;
use crate::fem::Field;
use crate::fracstep::{BoundaryData, SolutionState};
use crate::mesh::Point;
use crate::params::ParamValue;
use crate::verify::{error_rule, l2_error_vector};
use alloc::string::ToString;
use alloc::sync::Arc;
use core::f64::consts::PI;

fn overrides(pairs: &[(&str, &str)]) -> Overrides {
    pairs.iter().map(|(k, v)| (k.to_string(), ParamValue::infer(v))).collect()
}

fn setup(problem: &dyn Problem, params: &NSParameters) -> (Arc<LagrangeSpace>, SolutionState, BoundaryData) {
    let mesh = Arc::new(problem.mesh().unwrap());
    let v = Arc::new(LagrangeSpace::new(mesh.clone(), params.velocity_degree).unwrap());
    let q = Arc::new(LagrangeSpace::new(mesh, params.pressure_degree).unwrap());
    let names: Vec<_> = problem.scalars().into_iter().map(|s| s.name).collect();
    let bcs = BoundaryData::from_map(&problem.create_bcs(&v, &q), &names).unwrap();
    let mut state = SolutionState::zeros(&v, &q);
    problem.initialize(&mut state, &bcs).unwrap();
    (v, state, bcs)
}

#[test]
fn taylor_green_exact_values() {
    let e = *TaylorGreen2D::default().exact();
    assert_eq!(e.velocity([0.5, 0.0], 0.0), [0.0, 1.0]);
    assert!((e.pressure([0.0, 0.0], 0.0) + 0.5).abs() < 1e-15);
    let t = 0.7;
    let u0 = e.velocity([0.3, 0.8], 0.0);
    let ut = e.velocity([0.3, 0.8], t);
    let decay = libm::exp(-2.0 * PI * PI * e.nu * t);
    for k in 0..2 {
        assert!((ut[k] - u0[k] * decay).abs() < 1e-15);
    }
}

#[test]
fn taylor_green_velocity_norm_decays_with_the_exact_rate() {
    let tg = TaylorGreen2D::new(8);
    let e = *tg.exact();
    let (v, _, _) = setup(&tg, &tg.default_parameters());
    let zero = [Field::zeros(&v), Field::zeros(&v)];
    let norm = |t: f64| l2_error_vector([&zero[0], &zero[1]], &|x| e.velocity(x, t), &error_rule());
    // each component integrates sin^2 cos^2 over [0,2]^2 to 1
    assert!((norm(0.0) - libm::sqrt(2.0)).abs() < 1e-10);
    let ratio = norm(1.0) / norm(0.0);
    assert!((ratio - libm::exp(-2.0 * PI * PI * e.nu)).abs() < 1e-12);
}

#[test]
fn taylor_green_starts_from_the_interpolated_solution() {
    let tg = TaylorGreen2D::new(6);
    let (v, state, bcs) = setup(&tg, &tg.default_parameters());
    assert!(bcs.velocity_dofs().is_empty() && bcs.pressure.is_empty());
    let e = *tg.exact();
    for (i, x) in v.dof_coordinates().iter().enumerate() {
        let u = e.velocity(*x, 0.0);
        assert_eq!(state.velocity_prev[0].dofs[i], u[0]);
        assert_eq!(state.velocity_prev2[1].dofs[i], u[1]);
    }
}

#[test]
fn staggered_start_uses_earlier_levels() {
    let mut tg = TaylorGreen2D::new(4);
    tg.staggered_start = true;
    let params = NSParameters { dt: 0.1, ..tg.default_parameters() };
    tg.configure(&params);
    let (v, state, _) = setup(&tg, &params);
    let e = *tg.exact();
    let x = v.dof_coordinates()[7];
    assert_eq!(state.velocity_prev2[0].dofs[7], e.velocity(x, -0.1)[0]);
    let px = state.pressure_space().dof_coordinates()[3];
    assert_eq!(state.pressure.dofs[3], e.pressure(px, -0.05));
}

#[test]
fn cavity_lid_and_walls() {
    let cavity = DrivenCavity::default();
    let params = NSParameters { velocity_degree: 1, ..cavity.default_parameters() };
    let (v, state, bcs) = setup(&cavity, &params);
    let coords = v.dof_coordinates();
    let ones: Vec<usize> = bcs.velocity[0].dofs.iter().zip(&bcs.velocity[0].values).filter(|(_, &val)| val == 1.0).map(|(&d, _)| d).collect();
    // 51 vertices on y = 1; the two corners belong to the walls
    assert_eq!(ones.len(), 49);
    assert_eq!(cavity.mesh().unwrap().boundary_vertices(lid).len(), 51);
    for corner in [[0.0, 1.0], [1.0, 1.0]] {
        assert!(noslip(corner) && lid(corner));
        let d = coords.iter().position(|x| *x == corner).unwrap();
        let j = bcs.velocity[0].dofs.iter().position(|&b| b == d).unwrap();
        assert_eq!(bcs.velocity[0].values[j], 0.0);
    }
    for (i, x) in coords.iter().enumerate() {
        let on_wall = x[0] * x[1] * (1.0 - x[0]) * (1.0 - x[1]) == 0.0;
        if !on_wall {
            assert_eq!(state.velocity_prev[0].dofs[i], 0.0);
            assert_eq!(state.velocity_prev[1].dofs[i], 0.0);
        }
    }
    assert!(bcs.pressure.is_empty());
}

#[test]
fn cavity_mesh_clusters_toward_the_walls() {
    let mesh = DrivenCavity { nx: 10, ny: 10 }.mesh().unwrap();
    let xs: Vec<f64> = mesh.vertices().iter().filter(|x| x[1] == 0.0).map(|x| x[0]).collect();
    assert_eq!(xs.first(), Some(&0.0));
    assert!((xs.last().unwrap() - 1.0).abs() < 1e-14);
    let first = xs[1] - xs[0];
    let middle = xs[6] - xs[5];
    assert!(first < 0.5 * middle, "{first} vs {middle}");
}

#[test]
fn channel_friction_velocity_and_profile() {
    let channel = Channel2D::default();
    assert!((channel.friction_velocity() - 7.9e-3).abs() < 1e-15);
    let mut c = Channel2D::default();
    c.re_tau = 1.0;
    c.configure(&NSParameters { nu: 1.0, ..c.default_parameters() });
    let profile = *c.poiseuille();
    assert_eq!(profile.forcing, 1.0);
    assert_eq!(profile.centerline(), 0.5);
    assert_eq!(profile.velocity([1.0, 0.0], 0.0), [0.5, 0.0]);
    // nu du/dy at y = -1 from a centred difference of the exact profile
    let h = 1e-5;
    let slope = (profile.velocity([0.0, -1.0 + h], 0.0)[0] - profile.velocity([0.0, -1.0 - h], 0.0)[0]) / (2.0 * h);
    assert!((profile.nu * slope - profile.wall_shear()).abs() < 1e-9);
    assert_eq!(c.body_force([0.3, 0.2]), [1.0, 0.0]);
}

#[test]
fn channel_walls_and_periodicity() {
    let c = Channel2D::default();
    let mesh = c.mesh().unwrap();
    let ys: Vec<f64> = mesh.vertices().iter().map(|x| x[1]).collect();
    assert!(ys.iter().all(|y| (-1.0..=1.0).contains(y)));
    let (v, _, bcs) = setup(&c, &c.default_parameters());
    for &d in &bcs.velocity[1].dofs {
        assert!(walls(v.dof_coordinates()[d]));
    }
    assert_eq!(bcs.velocity[0].dofs, bcs.velocity[1].dofs);
    // x-periodic: every wall row has nx distinct dofs per wall
    assert_eq!(bcs.velocity[0].dofs.len(), 2 * c.nx);
}

#[test]
fn every_builtin_passes_the_schema_check() {
    for &name in PROBLEM_NAMES {
        let mut overrides = Overrides::new();
        let key = if name == "TaylorGreen2D" { "N" } else { "Nx" };
        overrides.insert(key.to_string(), ParamValue::Int(6));
        if name != "TaylorGreen2D" {
            overrides.insert("Ny".to_string(), ParamValue::Int(6));
        }
        let (problem, params) = create(name, &overrides).unwrap();
        assert_eq!(problem.name(), name);
        let mesh = Arc::new(problem.mesh().unwrap());
        let v = Arc::new(LagrangeSpace::new(mesh.clone(), params.velocity_degree).unwrap());
        let q = Arc::new(LagrangeSpace::new(mesh, params.pressure_degree).unwrap());
        let map = problem.create_bcs(&v, &q);
        let scalars: Vec<_> = problem.scalars().into_iter().map(|s| s.name).collect();
        for key in map.keys() {
            assert!(["u0", "u1", "p"].contains(&key.as_str()) || scalars.contains(key), "{name}: {key}");
        }
        let bcs = BoundaryData::from_map(&map, &scalars).unwrap();
        let mut state = SolutionState::zeros(&v, &q);
        problem.initialize(&mut state, &bcs).unwrap();
        let finite = |f: &Field| f.dofs.iter().all(|x| x.is_finite());
        assert!(state.velocity_prev.iter().chain(&state.velocity_prev2).all(finite) && finite(&state.pressure));
    }
}

#[test]
fn overrides_reach_the_mesh() {
    let (problem, _) = create("DrivenCavity", &overrides(&[("Nx", "20"), ("Ny", "20")])).unwrap();
    assert_eq!(problem.mesh().unwrap().num_vertices(), 21 * 21);
    let (problem, _) = create("DrivenCavity", &overrides(&[("Nx", "10")])).unwrap();
    assert_eq!(problem.mesh().unwrap().num_vertices(), 11 * 51);
    let (problem, params) = create("TaylorGreen", &overrides(&[("N", "5"), ("dt", "0.01"), ("nu", "0.02")])).unwrap();
    assert_eq!(problem.mesh().unwrap().divisions(), [5, 5]);
    assert_eq!(params.dt, 0.01);
    assert_eq!(problem.reference().unwrap().velocity([0.5, 0.0], 1.0)[1], libm::exp(-2.0 * PI * PI * 0.02));
}

#[test]
fn channel_forcing_follows_the_viscosity_override() {
    let (problem, _) = create("Channel", &overrides(&[("nu", "0.01"), ("Re_tau", "50")])).unwrap();
    let f = problem.body_force([0.0, 0.0]);
    assert!((f[0] - 0.25).abs() < 1e-15);
}

#[test]
fn unknown_keys_and_bad_values_are_rejected() {
    match create("DrivenCavity", &overrides(&[("Nz", "3")])) {
        Err(Error::UnknownParameter { key, valid }) => {
            assert_eq!(key, "Nz");
            assert!(valid.contains("Nx") && valid.contains("dt"));
        }
        other => panic!("{:?}", other.map(|(p, _)| p.name().to_string())),
    }
    let err = create("DrivenCavity", &overrides(&[("dt", "0.001x")])).err().unwrap();
    assert!(err.to_string().contains("0.001x"), "{err}");
    assert!(create("DrivenCavity", &overrides(&[("Nx", "0")])).is_err());
    assert!(by_name("Nope").is_err());
    assert_eq!(by_name("Channel").unwrap().name(), "Channel2D");
}

#[test]
fn default_hooks_are_harmless() {
    struct Bare;
    impl Problem for Bare {
        fn name(&self) -> &str {
            "Bare"
        }
        fn mesh(&self) -> Result<Mesh> {
            Mesh::unit_square(2, 2)
        }
    }
    let b = Bare;
    assert_eq!(b.body_force([0.1, 0.2]), [0.0, 0.0]);
    assert!(b.scalars().is_empty());
    assert!(b.reference().is_none());
    let x: Point = [0.5, 0.5];
    assert_eq!(b.scalar_source(0, x), 0.0);
}
