//! Exhaustive checks of the local search against a brute-force enumeration
//! of every partition into k non-empty clusters.

mod common;

use blocknem::blockmodel::{fit_seeded, FitOptions};
use blocknem::{BinaryNetwork, BlockImage, BlockType, Model};
use proptest::prelude::*;

use common::{brute_force_min, naive_criterion, random_network};

#[test]
fn brute_force_counts_set_partitions() {
    // Stirling numbers of the second kind
    assert_eq!(common::set_partitions(5, 2).len(), 15);
    assert_eq!(common::set_partitions(6, 3).len(), 90);
    assert_eq!(common::set_partitions(8, 3).len(), 966);
}

#[test]
fn naive_criterion_on_hand_example() {
    // two triangles joined by one edge
    let links = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)];
    let net = BinaryNetwork::from_links(6, false, &links).unwrap();
    let labels = [0, 0, 0, 1, 1, 1];
    assert_eq!(naive_criterion(&net, &labels, 2, None), 2);
    let image = BlockImage::from_rows(vec![
        vec![BlockType::Complete, BlockType::Complete],
        vec![BlockType::Complete, BlockType::Complete],
    ])
    .unwrap();
    // every missing off-diagonal cell counts against an all-complete image
    assert_eq!(naive_criterion(&net, &labels, 2, Some(&image)), 30 - 14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn non_specified_fit_matches_enumeration(
        n in 5usize..=7,
        k in 2usize..=3,
        directed in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let net = random_network(n, directed, seed);
        let expected = brute_force_min(&net, k, None);
        let got = fit_seeded(&net, &FitOptions::non_specified(k, 200), seed ^ 0x5eed).unwrap();
        prop_assert_eq!(got.criterion, expected);
        prop_assert_eq!(naive_criterion(&net, got.partition.labels(), k, None), got.criterion);
    }

    #[test]
    fn specified_fit_matches_enumeration(
        n in 5usize..=7,
        seed in any::<u64>(),
        cells in proptest::collection::vec(any::<bool>(), 9),
    ) {
        let net = random_network(n, false, seed);
        let rows = (0..3)
            .map(|g| (0..3).map(|h| if cells[g * 3 + h] { BlockType::Complete } else { BlockType::Null }).collect())
            .collect();
        let image = BlockImage::from_rows(rows).unwrap();
        let expected = brute_force_min(&net, 3, Some(&image));
        let got = fit_seeded(&net, &FitOptions::specified(image.clone(), 200), seed).unwrap();
        prop_assert_eq!(got.criterion, expected);
        prop_assert_eq!(got.image, image);
    }

    #[test]
    fn non_specified_never_exceeds_specified(
        n in 5usize..=7,
        seed in any::<u64>(),
        cells in proptest::collection::vec(any::<bool>(), 4),
    ) {
        let net = random_network(n, true, seed);
        let rows = (0..2)
            .map(|g| (0..2).map(|h| if cells[g * 2 + h] { BlockType::Complete } else { BlockType::Null }).collect())
            .collect();
        let image = BlockImage::from_rows(rows).unwrap();
        for labels in common::set_partitions(n, 2) {
            let free = naive_criterion(&net, &labels, 2, None);
            let fixed = naive_criterion(&net, &labels, 2, Some(&image));
            prop_assert!(free <= fixed);
        }
    }
}

#[test]
fn model_enum_round_trip() {
    let img: BlockImage = "com,null;null,com".parse().unwrap();
    let model = Model::Specified(img.clone());
    match model {
        Model::Specified(i) => assert_eq!(i, img),
        Model::NonSpecified => unreachable!(),
    }
}
