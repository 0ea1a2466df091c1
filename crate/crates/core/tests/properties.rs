//! Randomized invariants: the observation projection property, language
//! algebra on compiled itineraries, walk/product correspondences, and
//! serialization round-trips. Random instances come from the seeded
//! generator, so failures replay from the printed seed.

mod common;

use common::walks_up_to;
use itival_core::certify::Certifier;
use itival_core::generators::{random_instance, RandomParams};
use itival_core::itinerary::{compile, walks_dfa, ItineraryExpr};
use itival_core::product::ProductAutomaton;
use itival_core::world::{EdgeIdx, SensorSelection, WorldGraph};
use proptest::prelude::*;

fn small_params() -> RandomParams {
    RandomParams {
        vertices: 4,
        edges: 7,
        sensors: 4,
        events_per_sensor: 2,
        label_density: 0.25,
        itinerary_depth: 3,
    }
}

fn selection_from_mask(g: &WorldGraph, mask: u32) -> SensorSelection {
    SensorSelection::from_indices(
        g.num_sensors(),
        (0..g.num_sensors() as u32)
            .filter(|s| mask >> s & 1 == 1)
            .map(itival_core::world::SensorIdx),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_commutes_with_beta(seed in any::<u64>(), mask in any::<u32>(), sub in any::<u32>()) {
        let (g, _) = random_instance(seed, &small_params()).unwrap();
        let big = selection_from_mask(&g, mask);
        // sub-selection: keep only sensors also in `big`
        let small = selection_from_mask(&g, mask & sub);
        for walk in walks_up_to(&g, 4) {
            let beta_big = g.beta(&walk, &big).unwrap();
            let beta_small = g.beta(&walk, &small).unwrap();
            prop_assert_eq!(beta_big.project(&g, &small), beta_small);
            prop_assert!(beta_big.len() <= walk.len());
        }
    }

    #[test]
    fn edge_observation_is_contained_in_label_and_selection(seed in any::<u64>(), mask in any::<u32>()) {
        let (g, _) = random_instance(seed, &small_params()).unwrap();
        let m = selection_from_mask(&g, mask);
        let enabled = m.enabled_events(&g);
        for e in 0..g.num_edges() as u32 {
            let e = EdgeIdx(e);
            let obs = g.edge_observation(e, &m);
            for y in &obs {
                prop_assert!(g.edge(e).label().contains(y));
                prop_assert!(enabled[y.idx()]);
            }
        }
        let empty = SensorSelection::empty(g.num_sensors());
        for walk in walks_up_to(&g, 3) {
            prop_assert!(g.beta(&walk, &empty).unwrap().is_empty());
        }
    }

    #[test]
    fn walks_dfa_agrees_with_walk_predicate(seed in any::<u64>(), word_seed in any::<u64>()) {
        let (g, _) = random_instance(seed, &small_params()).unwrap();
        let dfa = compile(&ItineraryExpr::Walks, &g).unwrap();
        // random words, not just walks, to exercise rejection
        let mut rng = word_seed;
        let mut next = || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng >> 33) as usize
        };
        for len in 0..6 {
            let word: Vec<EdgeIdx> = (0..len)
                .map(|_| EdgeIdx((next() % g.num_edges().max(1)) as u32))
                .collect();
            if g.num_edges() == 0 && len > 0 {
                break;
            }
            prop_assert_eq!(dfa.accepts(&word).unwrap(), g.is_walk(&word));
        }
    }

    #[test]
    fn compiled_itineraries_obey_language_algebra(seed in any::<u64>()) {
        let (g, expr) = random_instance(seed, &small_params()).unwrap();
        let d = compile(&expr, &g).unwrap();
        let walks = walks_dfa(&g).minimized();
        let empty = compile(&ItineraryExpr::EmptySet, &g).unwrap();

        // involution and identity laws
        prop_assert!(d.complement().complement().equivalent(&d).unwrap());
        prop_assert!(d.difference(&empty).unwrap().equivalent(&d).unwrap());
        prop_assert!(walks.intersect(&walks.complement()).unwrap().language_is_empty());
        // De Morgan: !(d ∪ walks) = !d ∩ !walks
        let lhs = d.union(&walks).unwrap().complement();
        let rhs = d.complement().intersect(&walks.complement()).unwrap();
        prop_assert!(lhs.equivalent(&rhs).unwrap());
    }

    #[test]
    fn minimization_preserves_language_on_words(seed in any::<u64>()) {
        let (g, expr) = random_instance(seed, &small_params()).unwrap();
        let d = compile(&expr, &g).unwrap();
        let m = d.minimized();
        prop_assert!(m.num_states() <= d.num_states());
        prop_assert!(m.equivalent(&d).unwrap());
        for word in walks_up_to(&g, 4) {
            prop_assert_eq!(m.accepts(&word).unwrap(), d.accepts(&word).unwrap());
        }
    }

    #[test]
    fn product_tracks_exactly_walks_and_itinerary_acceptance(seed in any::<u64>()) {
        let (g, expr) = random_instance(seed, &small_params()).unwrap();
        let d = compile(&expr, &g).unwrap();
        let p = ProductAutomaton::build(&g, &d).unwrap();
        prop_assert!(p.num_states() <= d.num_states() * g.num_vertices());
        for word in walks_up_to(&g, 4) {
            let state = p.delta_star(&word);
            prop_assert_eq!(state.is_some(), g.is_walk(&word));
            if let Some(s) = state {
                prop_assert_eq!(p.is_accepting(s), d.accepts(&word).unwrap());
            }
        }
    }

    #[test]
    fn certification_is_monotone_under_supersets(seed in any::<u64>(), mask in any::<u32>(), extra in any::<u32>()) {
        let (g, expr) = random_instance(seed, &small_params()).unwrap();
        let d = compile(&expr, &g).unwrap();
        let certifier = Certifier::new(&g, &d).unwrap();
        let m = selection_from_mask(&g, mask);
        if certifier.certifies(&m) {
            let superset = selection_from_mask(&g, mask | extra);
            prop_assert!(
                certifier.certifies(&superset),
                "superset of a certifying selection must certify"
            );
        }
    }

    #[test]
    fn canonical_world_serialization_round_trips(seed in any::<u64>()) {
        let (g, _) = random_instance(seed, &small_params()).unwrap();
        let text = g.to_canonical_string();
        let reparsed = WorldGraph::from_str(&text).unwrap();
        prop_assert_eq!(text, reparsed.to_canonical_string());
    }

    #[test]
    fn relation_size_respects_quadratic_bound(seed in any::<u64>(), mask in any::<u32>()) {
        let (g, expr) = random_instance(seed, &small_params()).unwrap();
        let d = compile(&expr, &g).unwrap();
        let p = ProductAutomaton::build(&g, &d).unwrap();
        let m = selection_from_mask(&g, mask);
        let rel = itival_core::compute_relation(&p, &g, &m);
        prop_assert!(rel.len() <= p.num_states() * p.num_states());
        // symmetric because the rules are order-mirrored and the seed is diagonal
        for (x, y) in rel.iter() {
            prop_assert!(rel.contains(y, x));
        }
    }
}
