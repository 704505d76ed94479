//! Operator duality checked against explicit spin fragments and states.

mod common;

use common::{class1_fragment, class2_fragment, eq19};
use qjam::lattice::{jammed_magnetisation, map_pseudo_to_spins, PseudoConfig, SpeciesSequence};
use qjam::operators::{
    class1_eigenvalue, class2_eigenvalue, dual_z_value, local_projector, magnetisation_multi, v_m_sum, v_m_telescoped,
    DiagonalOperatorSpec, Factor,
};

fn class1_patterns() -> Vec<DiagonalOperatorSpec> {
    let mut ops = vec![DiagonalOperatorSpec::new(vec![Factor::Identity]), DiagonalOperatorSpec::new(vec![Factor::Sz])];
    ops.extend((0..=6).map(DiagonalOperatorSpec::sz_down_sz));
    ops
}

#[test]
fn test_table_s1_rows_match_fragments() {
    for op in class1_patterns() {
        for n in 0..=8 {
            assert_eq!(class1_eigenvalue(&op, n).unwrap(), class1_fragment(&op, n), "{:?} n={n}", op.pattern);
        }
    }
}

#[test]
fn test_table_s3_rows_match_fragments() {
    for a in 0..=2 {
        for b in 0..=2 {
            let op = DiagonalOperatorSpec::sz_class2(a, b);
            for nm in 0..=8 {
                for np in 0..=8 {
                    assert_eq!(class2_eigenvalue(&op, nm, np).unwrap(), class2_fragment(&op, nm, np), "a={a} b={b} {nm} {np}");
                }
            }
        }
    }
}

fn configs(lo: i64, hi: i64, max_nu: usize) -> Vec<PseudoConfig> {
    let mut out = vec![PseudoConfig::vacuum()];
    for a in lo..=hi {
        out.push(PseudoConfig::new(vec![a]).unwrap());
        if max_nu >= 2 {
            for b in a + 1..=hi {
                out.push(PseudoConfig::new(vec![a, b]).unwrap());
                if max_nu >= 3 {
                    for c in b + 1..=hi {
                        out.push(PseudoConfig::new(vec![a, b, c]).unwrap());
                    }
                }
            }
        }
    }
    out
}

#[test]
fn test_z_sum_rule_on_pseudowindows() {
    let seqs = [
        eq19(),
        SpeciesSequence::constant(2, 1).unwrap(),
        SpeciesSequence::from_pattern(2, &[0, 1, 1, 0, 1], 1, 3).unwrap(),
        SpeciesSequence::from_pattern(3, &[2, 0, 1, 1, 0], 2, 4).unwrap(),
    ];
    for seq in &seqs {
        let y = seq.y() as i64;
        for c in configs(0, 11, 2) {
            for j in 0..12 {
                for n in 1..12 - j {
                    let total: u8 = (0..y).map(|s| dual_z_value(seq, &c, n, s, j)).sum();
                    assert_eq!(total, local_projector(&c, n, j) as u8, "{c:?} n={n} j={j}");
                }
            }
        }
    }
}

fn brute_force(seq: &SpeciesSequence, c: &PseudoConfig, site: i64) -> i64 {
    let w = map_pseudo_to_spins(seq, c, site - 60, site + 60).unwrap();
    let sz = if w.spin(site) { 1 } else { -1 };
    sz - jammed_magnetisation(seq, site) as i64
}

#[test]
fn test_multi_impurity_reduction_up_to_three() {
    let seqs = [eq19(), SpeciesSequence::from_pattern(3, &[2, 0, 1, 1, 0], 2, 4).unwrap()];
    for seq in &seqs {
        for c in configs(-4, 4, 3) {
            for site in -12..=12 {
                assert_eq!(magnetisation_multi(seq, &c, site).value, brute_force(seq, &c, site), "{c:?} site={site}");
            }
        }
    }
}

#[test]
fn test_v_m_telescoping_all_states() {
    for len in 1..=14usize {
        for mask in 0u32..1 << len {
            let spins: Vec<bool> = (0..len).map(|i| mask >> i & 1 == 1).collect();
            for m in 1..=3 {
                assert_eq!(v_m_sum(&spins, m, 2, (m + 1) * 2), v_m_telescoped(&spins, m, 2));
            }
        }
    }
}
