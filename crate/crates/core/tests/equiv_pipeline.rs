use coorbit::equiv::{coorbit_equivalence, transition_certificate, CompareOptions, Outcome, Verdict};
use coorbit::matgroup::{GroupSpec, Mat, Vector};
use coorbit::metric::QiVerdict;
use coorbit::RunConfig;

fn run(a: &GroupSpec, b: &GroupSpec) -> Verdict {
    coorbit_equivalence(a, b, &RunConfig::default(), &CompareOptions::default()).unwrap()
}

#[test]
fn permuted_diagonal_cyclic_pair() {
    let a = GroupSpec::cyclic(Mat::diag(&[3.0, 2.0, 2.0])).unwrap();
    let b = GroupSpec::cyclic(Mat::diag(&[2.0, 2.0, 3.0])).unwrap();
    assert_eq!(run(&a, &b).outcome, Outcome::NotEquivalent);
}

#[test]
fn permuted_diagonal_flow_pair() {
    let a = GroupSpec::one_parameter(Mat::diag(&[3f64.ln(), 2f64.ln(), 2f64.ln()])).unwrap();
    let b = GroupSpec::one_parameter(Mat::diag(&[2f64.ln(), 2f64.ln(), 3f64.ln()])).unwrap();
    assert_eq!(run(&a, &b).outcome, Outcome::NotEquivalent);
    let c = transition_certificate(&a, &b, &Vector::from_slice(&[0.0, 1.0, 0.0]), &RunConfig::default()).unwrap();
    assert_eq!(c.verdict, QiVerdict::Certified);
}

#[test]
fn rotation_flow_vs_scalar() {
    let x = Mat::from_rows(&[vec![1.0, -1.0], vec![1.0, 1.0]]).unwrap();
    let a = GroupSpec::one_parameter(x).unwrap();
    assert_eq!(run(&a, &GroupSpec::scalar_similitude(2).unwrap()).outcome, Outcome::Equivalent);
}

#[test]
fn dyadic_vs_scalar() {
    let a = GroupSpec::cyclic(Mat::diag(&[2.0, 2.0])).unwrap();
    assert_eq!(run(&a, &GroupSpec::scalar_similitude(2).unwrap()).outcome, Outcome::Equivalent);
}

#[test]
fn scalar_flow_vs_diagonal() {
    let a = GroupSpec::one_parameter(Mat::identity(2)).unwrap();
    let b = GroupSpec::abelian_flow(vec![Mat::diag(&[1.0, 0.0]), Mat::diag(&[0.0, 1.0])]).unwrap();
    assert_eq!(run(&a, &b).outcome, Outcome::NotEquivalent);
}

#[test]
fn marginal_pair_needs_a_larger_window() {
    let a = GroupSpec::cyclic(Mat::diag(&[2.0, 2.0])).unwrap();
    let b = GroupSpec::cyclic(Mat::diag(&[2.0, 2.2])).unwrap();
    let small = RunConfig { window: 4, ..RunConfig::default() };
    let v = coorbit_equivalence(&a, &b, &small, &CompareOptions::default()).unwrap();
    assert_eq!(v.outcome, Outcome::Inconclusive);
    assert_eq!(run(&a, &b).outcome, Outcome::NotEquivalent);
}

#[test]
fn norm_corroboration_is_attached() {
    let a = GroupSpec::cyclic(Mat::diag(&[2.0, 2.0])).unwrap();
    let cfg = RunConfig { grid: 32, ..RunConfig::default() };
    let opts = CompareOptions { with_norms: true, ..CompareOptions::default() };
    let v = coorbit_equivalence(&a, &GroupSpec::scalar_similitude(2).unwrap(), &cfg, &opts).unwrap();
    let n = v.evidence.norm_ratios.expect("norm ratios");
    assert!(!n.rows.is_empty());
    assert!(v.evidence.unchecked.is_empty());
}
