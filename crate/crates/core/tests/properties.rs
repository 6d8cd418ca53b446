mod common;

use common::*;
use pgarc::arc::profile;
use pgarc::code::to_code;
use pgarc::constructions::{random_arc, random_multiset};
use pgarc::io::{read_arc, write_arc};
use proptest::prelude::*;

const FIELDS: &[(u32, u32)] = &[
    (2, 1),
    (3, 1),
    (2, 2),
    (5, 1),
    (7, 1),
    (2, 3),
    (3, 2),
    (2, 4),
];
const SPACES: &[(u32, u32, usize)] = &[
    (3, 1, 3),
    (2, 2, 3),
    (5, 1, 3),
    (2, 3, 3),
    (2, 1, 4),
    (3, 1, 4),
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn field_axioms(which in 0..FIELDS.len(), a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let (p, e) = FIELDS[which];
        let f = field(p, e);
        let (a, b, c) = (a % f.q(), b % f.q(), c % f.q());
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
        prop_assert_eq!(f.add(a, f.add(b, c)), f.add(f.add(a, b), c));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), 0);
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        prop_assert_eq!(f.mul(a, b), f.poly_mul(a, b));
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a)), 1);
            prop_assert_eq!(f.div(f.mul(b, a), a).unwrap(), b);
        }
    }

    #[test]
    fn arc_files_round_trip(which in 0..SPACES.len(), seed in any::<u64>(), n in 1usize..20, repeat in any::<bool>()) {
        let (p, e, k) = SPACES[which];
        let g = pg(p, e, k);
        let r = k as u32;
        let arc = if repeat {
            random_multiset(&g, r, n, seed, 0.4).unwrap()
        } else {
            random_arc(&g, r, n, seed).unwrap()
        };
        let text = write_arc(&arc);
        let back = read_arc(&text).unwrap();
        prop_assert_eq!(&back, &arc);
        prop_assert_eq!(write_arc(&back), text);
    }

    #[test]
    fn hyperplane_mass(which in 0..SPACES.len(), seed in any::<u64>(), n in 1usize..25, repeat in any::<bool>()) {
        let (p, e, k) = SPACES[which];
        let g = pg(p, e, k);
        let q = g.q() as u64;
        let arc = if repeat {
            random_multiset(&g, k as u32 + 1, n, seed, 0.3).unwrap()
        } else {
            random_arc(&g, k as u32 + 1, n, seed).unwrap()
        };
        let prof = profile(&arc);
        let n = arc.n() as u64;
        let mass: u64 = prof.histogram.iter().map(|(&c, &m)| c as u64 * m as u64).sum();
        prop_assert_eq!(mass, n * theta(q, k as u32 - 1));
        let hyperplanes: usize = prof.histogram.values().sum();
        prop_assert_eq!(hyperplanes, g.num_hyperplanes());
        if arc.is_set() {
            let pairs: u64 = prof.counts.iter().map(|&c| c as u64 * (c as u64).saturating_sub(1)).sum();
            prop_assert_eq!(pairs, n * (n - 1) * theta(q, k as u32 - 2));
        }
    }

    #[test]
    fn long_codes_are_projective(which in 0..SPACES.len(), seed in any::<u64>(), n in 4usize..40, extra in 0u32..2) {
        let (p, e, k) = SPACES[which];
        let g = pg(p, e, k);
        let arc = random_multiset(&g, k as u32 - 1 + extra + 1, n, seed, 0.2).unwrap();
        // to_code rejects any code that breaks the projectivity implication.
        match to_code(&arc) {
            Ok(v) => {
                prop_assert!(v.n - v.d >= v.k - 1);
                let threshold = v.defect * (g.q() as i64 + 1) + k as i64 - 1;
                if v.n as i64 > threshold {
                    prop_assert!(v.d_dual.is_none_or(|d| d >= k));
                    prop_assert!(arc.is_set());
                }
            }
            Err(pgarc::code::CodeError::RankDeficient { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
