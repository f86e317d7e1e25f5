use grassmann_morse::chain::{incidence_coefficient, SignConvention};
use grassmann_morse::flow::*;
use grassmann_morse::geometry::{coordinate_index, critical_value, Spectrum};
use grassmann_morse::CriticalPoint;

fn cp(n: usize, s: &[usize]) -> CriticalPoint {
    CriticalPoint::new(n, s.to_vec()).unwrap()
}

fn strictly_decreasing(r: &FlowResult) -> bool {
    r.f_values().windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12))
}

#[test]
fn positive_launch_from_o24_reaches_o23() {
    let s = Spectrum::standard(4);
    let r = integrate_trajectory(&cp(4, &[2, 4]), 2, 1, &s, &FlowConfig::default()).unwrap();
    assert_eq!(r.sink, Some(cp(4, &[2, 3])));
    assert!(r.monotone && strictly_decreasing(&r));
    assert!((r.f_start - 64.0).abs() < 1e-5);
    assert!((r.f_end - 36.0).abs() < 1e-9);
    assert!(r.confinement_max < 1e-8);
    assert!(r.sink.as_ref().unwrap().morse_index() < r.source.morse_index());
}

#[test]
fn negative_launch_crosses_one_chart_change() {
    let s = Spectrum::standard(4);
    let r = integrate_trajectory(&cp(4, &[2, 4]), 2, -1, &s, &FlowConfig::default()).unwrap();
    assert_eq!(r.sink, Some(cp(4, &[2, 3])));
    assert_eq!(r.transition_count(), 1);
    let t = &r.transitions[0];
    let x = t.before.to_vec()[coordinate_index(&cp(4, &[2, 4]), 2, 3).unwrap()];
    let y = t.after.to_vec()[coordinate_index(&cp(4, &[2, 3]), 2, 4).unwrap()];
    assert!(x < -10.0);
    assert!((y - 1.0 / x).abs() < 1e-14);
    // the tracked coordinate stays negative in both charts
    for sample in &r.samples {
        let v = sample.point.to_vec();
        let dominant = v
            .iter()
            .copied()
            .fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
        assert!(dominant <= 0.0);
    }
}

#[test]
fn counts_for_g42_pairs() {
    let s = Spectrum::standard(4);
    let cfg = FlowConfig::default();
    assert_eq!(
        count_trajectories(&cp(4, &[2, 4]), &cp(4, &[2, 3]), &s, &cfg).unwrap(),
        2
    );
    // the slot-1 lowering has coefficient 0 but still carries two orbits
    assert_eq!(
        count_trajectories(&cp(4, &[2, 4]), &cp(4, &[1, 4]), &s, &cfg).unwrap(),
        2
    );
}

#[test]
fn non_lowering_pair_has_no_trajectories() {
    // O_{1,5} has index 3, O_{2,3} has index 2, but l_1 > i_1
    let s = Spectrum::standard(5);
    let cfg = FlowConfig::default();
    assert_eq!(
        count_trajectories(&cp(5, &[1, 5]), &cp(5, &[2, 3]), &s, &cfg).unwrap(),
        0
    );
    assert!(count_trajectories(&cp(5, &[1, 5]), &cp(5, &[1, 2]), &s, &cfg).is_err());
}

#[test]
fn signs_for_the_last_slot_follow_the_stated_rule() {
    // for k = m the complement rule and the stated signs coincide
    let s = Spectrum::standard(5);
    let cfg = FlowConfig::default();
    for src in [cp(5, &[1, 3]), cp(5, &[1, 4]), cp(5, &[2, 5])] {
        let plus = integrate_trajectory(&src, 2, 1, &s, &cfg).unwrap();
        let minus = integrate_trajectory(&src, 2, -1, &s, &cfg).unwrap();
        let e = src.subset()[1] - 2;
        assert_eq!(trajectory_sign(&plus).unwrap(), 1);
        assert_eq!(trajectory_sign(&minus).unwrap(), if e % 2 == 0 { 1 } else { -1 });
    }
}

#[test]
fn launch_last_signs_sum_to_oriented_coefficients() {
    let s = Spectrum::standard(4);
    let rep = flow_report(4, 2, &s, &FlowConfig::default()).unwrap();
    for p in rep.pairs.iter().filter(|p| p.slot.is_some()) {
        assert_eq!(p.count, 2);
        let k = p.slot.unwrap();
        assert_eq!(
            p.signed_sum_launch_last,
            Some(incidence_coefficient(SignConvention::FlowOriented, &p.source, k).unwrap())
        );
    }
    for t in &rep.trajectories {
        assert!(t.monotone);
        assert!(t.confinement_max < 1e-8);
    }
}

#[test]
fn unconverged_results_have_no_sign() {
    let s = Spectrum::standard(4);
    let cfg = FlowConfig {
        max_steps: 10,
        ..FlowConfig::default()
    };
    let r = integrate_trajectory(&cp(4, &[2, 4]), 2, 1, &s, &cfg).unwrap();
    assert!(r.sink.is_none());
    assert_eq!(r.steps, 10);
    assert!(trajectory_sign(&r).is_err());
}

#[test]
fn rescaling_uses_the_source_level() {
    let s = Spectrum::new(vec![0.5, 1.0, 1.5]).unwrap();
    let src = cp(3, &[3]);
    let r = integrate_trajectory(&src, 1, 1, &s, &FlowConfig::default()).unwrap();
    assert_eq!(r.sink, Some(cp(3, &[2])));
    assert!((r.f_start - critical_value(&src, &s).unwrap()).abs() < 1e-6);
}
