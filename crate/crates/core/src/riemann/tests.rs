use super::*;
use crate::hypsys::{sys_dld, sys_lin, wave_curve};

fn s(a: f64, b: f64) -> State {
    State::from_vec(vec![a, b])
}

fn dld() -> (SystemDef, SolverParams) {
    let sys = sys_dld(0.01, 0.2);
    let p = SolverParams::new(&sys, 0.02, 0.05);
    (sys, p)
}

#[test]
fn equal_states_give_zero_parameters() {
    let (sys, _) = dld();
    let u = s(0.01, 0.02);
    assert_eq!(solve_riemann(&sys, &u, &u, 1e-13).unwrap(), DVector::zeros(2));
}

#[test]
fn single_family_jump_recovered() {
    let (sys, _) = dld();
    let ul = s(0.01, -0.02);
    let ur = wave_curve(&sys, 1, 0.03, &ul).unwrap();
    let sig = solve_riemann(&sys, &ul, &ur, 1e-13).unwrap();
    assert!(sig[0].abs() < 1e-9 && (sig[1] - 0.03).abs() < 1e-9);
}

#[test]
fn linear_decomposition_is_projection() {
    let sys = sys_lin(0.0);
    let (ul, ur) = (s(0.1, -0.05), s(-0.07, 0.12));
    let sig = solve_riemann(&sys, &ul, &ur, 1e-13).unwrap();
    assert!((sig[0] + 0.17).abs() < 1e-14 && (sig[1] - 0.17).abs() < 1e-14);
}

#[test]
fn rarefaction_split_into_three() {
    let (sys, p) = dld();
    let ul = s(0.0, 0.0);
    let ur = wave_curve(&sys, 1, 0.05, &ul).unwrap();
    let fan = approx_riemann(&sys, &p, &ul, &ur).unwrap();
    assert_eq!(fan.waves.len(), 3);
    for w in &fan.waves {
        assert_eq!(w.kind, WaveKind::Rarefaction);
        assert!((w.sigma - 0.05 / 3.0).abs() < 1e-9);
    }
    assert!(fan.speeds_ordered());
    assert!(fan.chain_error(&ul, &ur) < 1e-15);
}

#[test]
fn empty_fan_for_equal_states() {
    let (sys, p) = dld();
    assert!(approx_riemann(&sys, &p, &s(0.1, 0.0), &s(0.1, 0.0)).unwrap().is_empty());
}

#[test]
fn contact_moves_at_minus_one() {
    let (sys, p) = dld();
    let fan = approx_riemann(&sys, &p, &s(0.0, 0.05), &s(0.04, 0.05)).unwrap();
    assert_eq!(fan.waves.len(), 1);
    assert_eq!(fan.waves[0].kind, WaveKind::Contact);
    assert!((fan.waves[0].speed + 1.0).abs() < 1e-14);
}

fn wave(sys: &SystemDef, p: &SolverParams, i: usize, sigma: f64, left: &State) -> Wave {
    let right = wave_curve(sys, i, sigma, left).unwrap();
    physical_waves(sys, p, i, sigma, left, &right, false).unwrap().remove(0)
}

#[test]
fn simplified_with_null_partner() {
    let (sys, p) = dld();
    let a = wave(&sys, &p, 1, -0.03, &s(0.0, 0.02));
    let b = Wave { sigma: 0.0, family: Some(0), kind: WaveKind::Contact, left: a.right.clone(), right: a.right.clone(), speed: -1.0 };
    let fan = simplified_riemann(&sys, &p, &a, &b).unwrap();
    assert_eq!(fan.np_amplitude, 0.0);
    assert_eq!(fan.waves.len(), 1);
    assert!((fan.waves[0].sigma + 0.03).abs() < 1e-15);
}

#[test]
fn simplified_np_is_quadratic() {
    let (sys, p) = dld();
    let a = wave(&sys, &p, 1, 0.02, &s(0.01, 0.0));
    let b = wave(&sys, &p, 0, 0.02, &a.right);
    let fan = simplified_riemann(&sys, &p, &a, &b).unwrap();
    assert!(fan.np_amplitude <= 2.0 * 0.02 * 0.02, "np {}", fan.np_amplitude);
    assert!(fan.chain_error(&a.left, &b.right) < 1e-12);
    assert!(fan.speeds_ordered());
}

#[test]
fn simplified_same_family_merges() {
    let (sys, p) = dld();
    let a = wave(&sys, &p, 1, -0.01, &s(0.0, 0.05));
    let b = wave(&sys, &p, 1, -0.01, &a.right);
    let fan = simplified_riemann(&sys, &p, &a, &b).unwrap();
    let phys: Vec<&Wave> = fan.physical().collect();
    assert_eq!(phys.len(), 1);
    assert!((phys[0].sigma + 0.02).abs() < 1e-15);
}

#[test]
fn crude_leaves_null_np() {
    let (sys, p) = dld();
    let phys = wave(&sys, &p, 0, 0.05, &s(0.0, 0.01));
    let np = Wave::non_physical(s(0.0, 0.0), s(0.0, 0.0), p.np_speed);
    let np = Wave { left: phys.right.clone(), right: phys.right.clone(), ..np };
    let fan = crude_riemann(&sys, &p, &phys, &np).unwrap();
    assert_eq!(fan.np_amplitude, 0.0);
}

#[test]
fn crude_np_nearly_unchanged() {
    let (sys, p) = dld();
    let ul = s(0.0, 0.01);
    let um = ul.clone() + s(0.0, 1e-3);
    let np = Wave::non_physical(ul.clone(), um.clone(), p.np_speed);
    let phys = wave(&sys, &p, 0, 0.05, &um);
    let fan = crude_riemann(&sys, &p, &np, &phys).unwrap();
    assert!((fan.np_amplitude - 1e-3).abs() <= 2.0 * 0.05 * 1e-3);
    assert!(fan.chain_error(&ul, &phys.right) < 1e-15);
    let phys0 = Wave { sigma: 0.0, right: um.clone(), ..phys.clone() };
    let fan0 = crude_riemann(&sys, &p, &np, &phys0).unwrap();
    assert!((fan0.np_amplitude - 1e-3).abs() < 1e-15);
}

#[test]
fn left_boundary_problem() {
    let (sys, p) = dld();
    let ur = s(0.03, 0.04);
    let (ub, fan) = boundary_riemann_left(&sys, &p, &sys.eval_b1(&ur), &ur).unwrap();
    assert!(fan.is_empty() && ub == ur);
    let g = State::from_vec(vec![0.02]);
    let (ub, fan) = boundary_riemann_left(&sys, &p, &g, &ur).unwrap();
    assert!((ub[1] - 0.02).abs() < 1e-12);
    let total: f64 = fan.physical().map(|w| w.sigma).sum();
    assert!((total - 0.02).abs() < 1e-9);
    assert!(fan.physical().all(|w| w.family == Some(1) && w.speed > 0.0));
}

#[test]
fn right_boundary_problem() {
    let (sys, p) = dld();
    let ul = s(0.03, 0.04);
    let g = State::from_vec(vec![0.05]);
    let (ub, fan) = boundary_riemann_right(&sys, &p, &ul, &g).unwrap();
    assert!((ub[0] - 0.05).abs() < 1e-12);
    assert_eq!(fan.waves.len(), 1);
    assert!((fan.waves[0].sigma - 0.02).abs() < 1e-9);
    assert!(fan.waves[0].speed < 0.0);
}

#[test]
fn h_riemann_without_step_is_plain_decomposition() {
    let sys = sys_dld(0.01, 0.2);
    let mut p = SolverParams::new(&sys, 0.02, 0.05);
    p.h = 0.0;
    let (ul, ur) = (s(0.01, 0.03), s(-0.02, 0.01));
    let hf = h_riemann(&sys, &p, &ul, &ur).unwrap();
    let af = approx_riemann(&sys, &p, &ul, &ur).unwrap();
    let hp: Vec<f64> = hf.physical().map(|w| w.sigma).collect();
    let ap: Vec<f64> = af.physical().map(|w| w.sigma).collect();
    assert_eq!(hp.len(), ap.len());
    assert!(hp.iter().zip(&ap).all(|(a, b)| (a - b).abs() < 1e-10));
}

#[test]
fn h_riemann_zero_wave_is_identity_without_source() {
    let sys = sys_dld(0.0, 0.2);
    let p = SolverParams::new(&sys, 0.02, 0.05);
    let fan = h_riemann(&sys, &p, &s(0.01, 0.03), &s(-0.02, 0.01)).unwrap();
    let (a, b) = fan.zero_wave.unwrap();
    assert_eq!(a, b);
}

#[test]
fn h_riemann_linear_oracle() {
    let g = 0.3;
    let h = 0.05;
    let sys = sys_lin(g);
    let mut p = SolverParams::new(&sys, 0.02, h);
    p.h = h;
    let u0 = s(0.1, 0.0);
    let fan = h_riemann(&sys, &p, &u0, &u0).unwrap();
    // Ψ_i are translations along e_i; Φ_h = I + h A⁻¹ G.
    let m = DMatrix::from_row_slice(2, 2, &[1.0, -h * g, -h * g, 1.0]);
    let lhs = DMatrix::from_columns(&[m.column(0).into_owned(), DVector::from_vec(vec![0.0, 1.0])]);
    let sigma = lhs.lu().solve(&(&u0 - &m * &u0)).unwrap();
    let mut hp = [0.0; 2];
    for w in fan.physical() {
        hp[w.family.unwrap()] += w.sigma;
    }
    assert!((hp[0] - sigma[0]).abs() < 1e-10 && (hp[1] - sigma[1]).abs() < 1e-10, "{hp:?} vs {sigma}");
    let (zl, zr) = fan.zero_wave.clone().unwrap();
    assert!((phi_h(&sys, &zl, h).unwrap() - zr).norm() < 1e-12);
    assert!(fan.chain_error(&u0, &u0) < 1e-15);
}

#[test]
fn simplified_h_cases() {
    let (sys, p) = dld();
    let ul = s(0.05, 0.01);
    let fan = simplified_h_riemann(&sys, &p, 1, 0.0, &ul, &phi_h(&sys, &ul, p.h).unwrap(), Side::Left).unwrap();
    assert_eq!(fan.np_amplitude, 0.0);
    assert_eq!(fan.waves.len(), 1);

    let um = wave_curve(&sys, 1, 0.02, &ul).unwrap();
    let ur = phi_h(&sys, &um, p.h).unwrap();
    let fan = simplified_h_riemann(&sys, &p, 1, 0.02, &ul, &ur, Side::Left).unwrap();
    assert!(fan.np_amplitude <= 5.0 * 0.02 * p.h * 0.01, "np {}", fan.np_amplitude);
    assert!(fan.speeds_ordered());
    assert!(fan.chain_error(&ul, &ur) < 1e-15);

    let free = sys_dld(0.0, 0.2);
    let um = wave_curve(&free, 1, 0.02, &ul).unwrap();
    let fan = simplified_h_riemann(&free, &p, 1, 0.02, &ul, &um, Side::Left).unwrap();
    assert!(fan.np_amplitude < 1e-12);
}

#[test]
fn simplified_h_from_right() {
    let (sys, p) = dld();
    let ul = s(0.05, 0.01);
    let um = phi_h(&sys, &ul, p.h).unwrap();
    let ur = wave_curve(&sys, 0, 0.03, &um).unwrap();
    let fan = simplified_h_riemann(&sys, &p, 0, 0.03, &ul, &ur, Side::Right).unwrap();
    assert!(fan.speeds_ordered());
    assert!(fan.np_amplitude <= 5.0 * 0.03 * p.h * 0.01);
    assert!(fan.chain_error(&ul, &ur) < 1e-15);
}

#[test]
fn crude_h_cases() {
    let (sys, p) = dld();
    let ul = s(0.05, 0.01);
    let um = ul.clone() + s(1e-3, 0.0);
    let ur = phi_h(&sys, &um, p.h).unwrap();
    let fan = crude_h_riemann(&sys, &p, &ul, &ur).unwrap();
    assert!((fan.np_amplitude - 1e-3).abs() <= 2.0 * p.h * 0.01 * 1e-3);
    let fan = crude_h_riemann(&sys, &p, &ul, &phi_h(&sys, &ul, p.h).unwrap()).unwrap();
    assert_eq!(fan.np_amplitude, 0.0);
    let free = sys_dld(0.0, 0.2);
    let fan = crude_h_riemann(&free, &p, &ul, &um).unwrap();
    assert!((fan.np_amplitude - 1e-3).abs() < 1e-15);
}
