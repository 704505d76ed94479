//! Property tests for the duality map, the Hamiltonians and the asymptotics.

mod common;

use proptest::prelude::*;
use qjam::bethe::{f_bound, scattering_phase, AsymptoticInput, MagnonTable};
use qjam::disorder::{make_sequence, SequenceSpec};
use qjam::hamiltonians::{Boundary, SpinChain};
use qjam::lattice::{macroposition, map_pseudo_to_spins, map_spins_to_pseudo, PseudoConfig, SpeciesSequence, SpinWindow};
use qjam::oracle::map_chain_state;

fn pads(y: u32) -> Vec<Vec<bool>> {
    match y {
        2 => vec![vec![true], vec![true, false], vec![false, true]],
        _ => vec![vec![true], vec![true, false, false], vec![false, true, true], vec![true, false]],
    }
}

fn sequence() -> impl Strategy<Value = SpeciesSequence> {
    (2u32..=4, 1usize..=6, -5i64..5, -5i64..5).prop_flat_map(|(y, p, ls, rs)| {
        prop::collection::vec(0..y, p).prop_map(move |pat| SpeciesSequence::from_pattern(y, &pat, ls, rs).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn test_window_round_trip(y in 2u32..=3, spins in prop::collection::vec(any::<bool>(), 1..=20),
                              anchor in -10i64..10, lp in 0usize..3, rp in 0usize..3) {
        let p = pads(y);
        let w = SpinWindow::new(y, anchor, spins, p[lp].clone(), p[rp].clone()).unwrap();
        let (seq, c) = map_spins_to_pseudo(&w).unwrap();
        prop_assert_eq!(map_pseudo_to_spins(&seq, &c, w.anchor(), w.hi()).unwrap(), w);
    }

    #[test]
    fn test_vacuum_macroposition_monotone(seq in sequence()) {
        prop_assert_eq!(seq.delta(0), 0);
        for j in -30..30 {
            prop_assert!(seq.vacuum_macro(j + 1) >= seq.vacuum_macro(j));
            if j >= 0 {
                let step = seq.delta(j + 1) - seq.delta(j);
                prop_assert!(step == 0 || step == -1);
            }
        }
    }

    #[test]
    fn test_macroposition_additivity(seq in sequence(), n in -10i64..10) {
        let c = PseudoConfig::new(vec![n]).unwrap();
        for j in -20..20 {
            prop_assert_eq!(macroposition(&seq, &c, j) - seq.vacuum_macro(j), (n < j) as i64);
        }
    }

    #[test]
    fn test_hops_conserve_species(state in 0u64..1 << 12, hi in any::<bool>()) {
        let chain = SpinChain::new(12, Boundary::Frozen).unwrap();
        let key = map_chain_state(state, 12).unwrap().key;
        for (target, c) in chain.act(state, hi) {
            if target != state && !c.is_zero() {
                prop_assert_eq!(&map_chain_state(target, 12).unwrap().key, &key);
            }
        }
    }

    #[test]
    fn test_scattering_unitary(p1 in -3.14f64..3.14, p2 in -3.14f64..3.14, d in -2.0f64..2.0, g in -2.0f64..2.0) {
        if let (Ok(s), Ok(t)) = (scattering_phase(p1, p2, d, g), scattering_phase(p2, p1, d, g)) {
            prop_assert!((s.norm() - 1.0).abs() < 1e-9);
            prop_assert!((s * t - 1.0).norm() < 1e-9);
        }
    }

    #[test]
    fn test_sequence_seed_determinism(seed in any::<u64>(), lo in -20i64..20, len in 0i64..30) {
        let spec = SequenceSpec::default().with_window(lo, lo + len - 1, seed);
        prop_assert_eq!(make_sequence(&spec, 2).unwrap(), make_sequence(&spec, 2).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn test_asymptotic_distribution_monotone(d in 0.1f64..1.5, g in -1.5f64..1.0, d0 in 1i64..6,
                                             a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let input = AsymptoticInput::new(d, g, d0, 64).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        for j in 1..=2 {
            let t = MagnonTable::new(j, &input).unwrap();
            prop_assert!(t.eval(lo) <= t.eval(hi) + 1e-15);
        }
        prop_assert!(f_bound(lo, &input).unwrap() <= f_bound(hi, &input).unwrap() + 1e-12);
    }
}
