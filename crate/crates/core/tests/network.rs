// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;
use nbpdn::algorithms::exchange_count;
use nbpdn::network::{
    build_network_matrix, generate_topology, NetworkJson, NetworkMatrix, NetworkTopology, WeightKind,
    WeightScheme,
};
use nbpdn::Error;
use proptest::prelude::*;

fn feasible() -> impl Strategy<Value = (usize, usize, u64)> {
    (3usize..=24)
        .prop_flat_map(|l| (Just(l), 2usize..l, any::<u64>()))
        .prop_filter("L·d even", |(l, d, _)| l * d % 2 == 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn topology_is_regular_connected_and_symmetric((l, d, seed) in feasible()) {
        let t = generate_topology(l, d, seed).unwrap();
        prop_assert_eq!(t.node_count(), l);
        prop_assert!(t.is_connected());
        for i in 0..l {
            let nb = t.neighbors(i);
            prop_assert_eq!(nb.len(), d);
            prop_assert!(!nb.contains(&i));
            for &j in nb {
                prop_assert!(t.neighbors(j).contains(&i));
            }
        }
        prop_assert_eq!(t.edges().len(), l * d / 2);
    }

    #[test]
    fn weights_are_right_stochastic_on_the_topology(
        (l, d, seed) in feasible(),
        random in any::<bool>(),
        include_self in any::<bool>(),
    ) {
        let t = generate_topology(l, d, seed).unwrap();
        let scheme = WeightScheme {
            kind: if random { WeightKind::RandomRowNormalized } else { WeightKind::Uniform },
            include_self,
            seed,
        };
        let h = build_network_matrix(&t, &scheme);
        prop_assert!(h.matches(&t));
        for i in 0..l {
            let row = h.weights().row(i);
            prop_assert!(row.iter().all(|&w| w >= 0.0));
            prop_assert!((row.sum() - 1.0).abs() <= 1e-12);
            prop_assert_eq!(h.incoming_links(i), d);
            prop_assert_eq!(h.weight(i, i) > 0.0, include_self);
        }
        prop_assert_eq!(exchange_count(&h), l * d);
        prop_assert!(NetworkMatrix::from_weights(h.weights().clone()).is_ok());
    }

    #[test]
    fn topology_depends_only_on_seed((l, d, seed) in feasible()) {
        let a = generate_topology(l, d, seed).unwrap();
        let b = generate_topology(l, d, seed).unwrap();
        prop_assert_eq!(a.edges(), b.edges());
    }
}

#[test]
fn infeasible_degrees_are_rejected() {
    for (l, d) in [(5, 3), (4, 4), (6, 0), (3, 5)] {
        match generate_topology(l, d, 1) {
            Err(Error::InfeasibleDegree { .. }) => {}
            other => panic!("({l}, {d}) gave {other:?}"),
        }
    }
}

#[test]
fn non_stochastic_matrices_are_rejected() {
    let bad = DMatrix::from_row_slice(2, 2, &[0.5, 0.6, 0.5, 0.5]);
    assert!(NetworkMatrix::from_weights(bad).is_err());
    let negative = DMatrix::from_row_slice(2, 2, &[1.5, -0.5, 0.5, 0.5]);
    assert!(NetworkMatrix::from_weights(negative).is_err());
}

#[test]
fn ring_from_edges_round_trips_through_json() {
    let edges: Vec<(usize, usize)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
    let t = NetworkTopology::from_edges(6, &edges).unwrap();
    assert_eq!(t.degree(), 2);
    let h = build_network_matrix(&t, &WeightScheme::default());
    assert!((h.weight(0, 1) - 1.0 / 3.0).abs() < 1e-15);
    let json = serde_json::to_string(&NetworkJson::new(&t, &h)).unwrap();
    let (t2, h2) = serde_json::from_str::<NetworkJson>(&json).unwrap().into_parts().unwrap();
    assert_eq!(t.edges(), t2.edges());
    assert_eq!(h, h2);
}

#[test]
fn identity_network_exchanges_nothing() {
    let h = NetworkMatrix::identity(5);
    assert_eq!(exchange_count(&h), 0);
    assert_eq!(h.active_row(3), vec![(3, 1.0)]);
}
