use cutcount::cds::{cds_refined_space, cds_space};
use cutcount::cvc::cvc_space;
use cutcount::graph::sample_weights_n;
use cutcount::oracle::verify_dp_tables;
use cutcount::transform::{prepare, random_expression};
use cutcount::Problem;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn cvc_tables_match_enumeration(n in 2usize..=7, k in 2u32..=4, seed in any::<u64>(), pick in any::<usize>()) {
        let expr = prepare(&random_expression(n, k, seed)).unwrap();
        let weights = sample_weights_n(n, seed ^ 1).unwrap();
        let costs: Vec<u64> = (0..n as u64).map(|v| 1 + (seed >> v) % 2).collect();
        let report = verify_dp_tables(Problem::Cvc, &cvc_space(), &expr, &costs, weights.values(), pick % n).unwrap();
        prop_assert!(report.ok(), "{:?}\n{}", report, expr.to_text());
    }

    #[test]
    fn cds_tables_match_enumeration(n in 2usize..=6, k in 2u32..=4, seed in any::<u64>(), pick in any::<usize>()) {
        let expr = prepare(&random_expression(n, k, seed)).unwrap();
        let weights = sample_weights_n(n, seed ^ 2).unwrap();
        let costs = vec![1u64; n];
        for space in [cds_space(), cds_refined_space()] {
            let report = verify_dp_tables(Problem::Cds, &space, &expr, &costs, weights.values(), pick % n).unwrap();
            prop_assert!(report.ok(), "{:?}\n{}", report, expr.to_text());
        }
    }
}
