mod common;

use common::oracle;
use mtm_core::geom::Point;
use mtm_core::radio::{build_links, poisson_boolean_connected};
use mtm_core::topology::{build_terrain_scenario, TerrainConfig};
use mtm_core::{ChannelAssignment, ChannelId, RadioParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn component_counts_match_breadth_first_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..100 {
        let side = rng.gen_range(2000.0..20000.0);
        let pts: Vec<Point> = (0..200)
            .map(|_| Point::new(rng.gen::<f64>() * side, rng.gen::<f64>() * side))
            .collect();
        let w = common::world(&pts, &[(1, Point::new(side / 2.0, side / 2.0))], RadioParams::desk());
        let radius = rng.gen_range(50.0..800.0);
        let got = poisson_boolean_connected(&w.topology, radius).unwrap();
        let want = oracle::components(&w, radius);
        assert_eq!(got.component_count, want, "instance {k}");
        assert_eq!(got.connected, want == 1);
    }
}

#[test]
fn components_shrink_as_the_radius_grows() {
    for seed in 0..5 {
        let cfg = TerrainConfig { seed, ..TerrainConfig::desk() };
        let topo = build_terrain_scenario(&cfg).unwrap();
        let mut last = usize::MAX;
        for step in 0..40 {
            let c = poisson_boolean_connected(&topo, step as f64 * 25.0).unwrap();
            assert!(c.component_count <= last);
            last = c.component_count;
        }
        assert_eq!(last, 1);
    }
}

proptest! {
    #[test]
    fn links_match_oracle_and_are_symmetric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = common::random_instance(&mut rng, 12, 3, 2000.0);
        let links = build_links(&inst.world.topology, &inst.assignment, &inst.world.radio);
        let got: Vec<(usize, usize)> = links.iter().map(|l| (l.from.index(), l.to.index())).collect();
        prop_assert_eq!(&got, &oracle::links(&inst.world, &inst.assignment));
        for l in links.iter() {
            prop_assert!(links.contains(l.to, l.from));
        }
    }

    #[test]
    fn links_ignore_channels(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = common::random_instance(&mut rng, 12, 4, 2000.0);
        let flat = ChannelAssignment::from_parts(
            vec![ChannelId(0); inst.assignment.len()],
            inst.assignment.powers().to_vec(),
        );
        let a = build_links(&inst.world.topology, &inst.assignment, &inst.world.radio);
        let b = build_links(&inst.world.topology, &flat, &inst.world.radio);
        prop_assert_eq!(a.as_slice(), b.as_slice());
    }
}
