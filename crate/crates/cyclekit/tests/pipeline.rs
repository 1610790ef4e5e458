//! Cross-module integration: the detector agrees between the original
//! kinetic plane and the reduced plane, alternate planar realizations of
//! the same oscillator give the same cycle structure, and JSON system
//! files drive the same pipeline as the typed API.

use cyclekit::averaging::{kb_average, rescale};
use cyclekit::cycles::{classify_cycles, radial_roots, ORIGIN_RHO_TOL};
use cyclekit::modelzoo::zoo;
use cyclekit::odeverify::{detect_limit_cycles, DetectSettings, PlanarField};
use cyclekit::poly::{rat, rat_to_f64, Rat};
use cyclekit::reduction::KineticSystem;
use cyclekit::report::{parse_system_json, LoadedSystem};
use cyclekit::BiPoly;
use num_traits::Zero;

/// Seeds that bracket every cycle radius of the model, plus one inside.
fn seeds_for(radii: &[f64]) -> Vec<f64> {
    let mut seeds = vec![0.4];
    for r in radii {
        seeds.push(r * 0.8);
        seeds.push(r * 1.2);
    }
    seeds.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    seeds
}

#[test]
fn detector_agrees_between_kinetic_and_reduced_planes() {
    for entry in zoo() {
        let Some(part) = &entry.kinetic else { continue };
        let Some(expected) = entry.expected.cycles else { continue };
        if expected == 0 {
            continue; // the conservative model is covered elsewhere
        }
        let (_, map, lls) = part.reduce().unwrap();
        let osc = rescale(&lls).unwrap();
        let avg = kb_average(&osc);
        let roots = radial_roots(&avg, ORIGIN_RHO_TOL).unwrap();
        let report = classify_cycles(&avg, &roots);
        let radii: Vec<f64> = report.cycles.iter().map(|c| c.radius).collect();
        let seeds = seeds_for(&radii);
        let settings = DetectSettings {
            t_max: 4000.0,
            rel_tol: 1e-5,
            ..DetectSettings::default()
        };
        let on_kinetic = PlanarField::from_kinetic(&part.sys, &map, osc.omega());
        let on_reduced = PlanarField::from_lls(&lls);
        let d_kin = detect_limit_cycles(&on_kinetic, &seeds, &settings).unwrap();
        let d_red = detect_limit_cycles(&on_reduced, &seeds, &settings).unwrap();
        assert_eq!(
            d_kin.cycles.len(),
            d_red.cycles.len(),
            "{}: kinetic vs reduced cycle count",
            entry.name
        );
        assert_eq!(d_kin.cycles.len(), expected, "{}: cycle count", entry.name);
        // both planes measure the same reduced amplitude
        for (a, b) in d_kin.cycles.iter().zip(&d_red.cycles) {
            let rel = (a.amplitude - b.amplitude).abs() / b.amplitude;
            assert!(
                rel < 1e-3,
                "{}: amplitudes {} vs {}",
                entry.name,
                a.amplitude,
                b.amplitude
            );
            assert_eq!(a.stability, b.stability, "{}", entry.name);
        }
    }
}

#[test]
fn alternate_planar_realization_gives_same_cycle() {
    // the classic oscillator in primitive coordinates:
    // xdot = y + eps x - (eps/3) x^3, ydot = -x  (mu = 0 branch)
    let eps = rat(1, 10);
    let sys = KineticSystem::new(
        [Rat::zero(), eps.clone(), rat(1, 1)],
        [Rat::zero(), rat(-1, 1), Rat::zero()],
        BiPoly::monomial(3, 0, -&eps / rat(3, 1)),
        Rat::zero(),
    )
    .unwrap();
    let fp = cyclekit::reduction::FixedPointInfo::from_exact(&sys, Rat::zero(), Rat::zero())
        .unwrap();
    let map = cyclekit::reduction::build_reduction_map(&sys, &fp).unwrap();
    let lls = cyclekit::reduction::reduce_to_lls(&sys, &fp, &map).unwrap();
    // mu = 0 forces beta = (0, 1): the reduction lands in the dual
    // velocity-damped form with N = 1, M = 3
    assert_eq!((lls.n_max(), lls.m_max()), (1, 3));
    assert_eq!(lls.f00(), -eps);
    let osc = rescale(&lls).unwrap();
    let avg = kb_average(&osc);
    let roots = radial_roots(&avg, ORIGIN_RHO_TOL).unwrap();
    assert_eq!(roots.roots.len(), 1);
    assert!((roots.roots[0].radius() - 2.0).abs() < 1e-12);
    // and the detector on these primitive coordinates still finds it
    let field = PlanarField::from_kinetic(&sys, &map, osc.omega());
    let settings = DetectSettings {
        t_max: 600.0,
        ..DetectSettings::default()
    };
    let det = detect_limit_cycles(&field, &[0.5, 3.0], &settings).unwrap();
    assert_eq!(det.cycles.len(), 1);
    assert!((det.cycles[0].amplitude - 2.0).abs() < 0.05);
}

#[test]
fn json_system_file_drives_the_same_pipeline() {
    let text = r#"{
        "kind": "kinetic",
        "a": ["0", "-1", "1/10"],
        "b": ["1/2", "0", "-1/10"],
        "mu": "-1",
        "f": {"terms": [{"i": 2, "j": 1, "c": "1"}]}
    }"#;
    let LoadedSystem::Kinetic(sys) = parse_system_json(text).unwrap().load().unwrap() else {
        panic!("expected kinetic");
    };
    // same system as the bundled glycolytic defaults
    let entry = zoo().into_iter().find(|e| e.name == "glycolytic").unwrap();
    let part = entry.kinetic.as_ref().unwrap();
    let fp = cyclekit::reduction::FixedPointInfo::from_exact(
        &sys,
        part.fixed_point.0.clone(),
        part.fixed_point.1.clone(),
    )
    .unwrap();
    let map = cyclekit::reduction::build_reduction_map(&sys, &fp).unwrap();
    let lls = cyclekit::reduction::reduce_to_lls(&sys, &fp, &map).unwrap();
    assert_eq!(lls.a_table(), entry.lls.a_table());
    let avg = kb_average(&rescale(&lls).unwrap());
    let roots = radial_roots(&avg, ORIGIN_RHO_TOL).unwrap();
    assert_eq!(roots.roots.len(), 1);
    let expected_eps = rat(11, 49);
    assert_eq!(rescale(&lls).unwrap().eps(), &expected_eps);
    assert!(rat_to_f64(&expected_eps) < 0.3);
}
