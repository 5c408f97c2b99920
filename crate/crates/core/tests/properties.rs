mod common;

use std::collections::{BTreeMap, BTreeSet};

use bratteli_core::crossed_product::{a_n_basis, cross_adjoint, cross_multiply, CrossedElement};
use bratteli_core::diagram::diagram_from_substitution;
use bratteli_core::dynamics::{classify, enumerate_paths, in_p_n, vershik, vershik_inv};
use bratteli_core::equivalence::{
    check_certificate, find_equivalence, EquivalenceCertificate, Verdict,
};
use bratteli_core::format::{parse_diagram, serialize_diagram};
use bratteli_core::function_algebra::{
    alpha, indicator, multiply, refine, refine_to, LevelFunction,
};
use bratteli_core::linalg::{rank, SparseVec};
use bratteli_core::operator_model::build_generators;
use bratteli_core::{Coeff, Diagram, Path, Substitution};
use common::{arb_diagram, brute_force_equivalent, relabel};
use proptest::prelude::*;

fn int(k: i64) -> Coeff {
    Coeff::from_integer(k.into())
}

/// A diagram with a random level function written at `level`.
fn with_functions(count: usize) -> impl Strategy<Value = (Diagram, Vec<LevelFunction>)> {
    (arb_diagram(6), 1usize..=3).prop_flat_map(move |(d, level)| {
        let paths = enumerate_paths(&d, level, None);
        let n = paths.len();
        let one = prop::collection::vec((0..n, -3i64..=3), 0..=4).prop_map(move |terms| {
            LevelFunction::from_terms(
                level,
                terms.into_iter().map(|(i, c)| (paths[i].clone(), int(c))),
            )
            .unwrap()
        });
        (Just(d), prop::collection::vec(one, count))
    })
}

/// A diagram with random elements of `A_N` for a random small `N`.
fn with_crossed(count: usize) -> impl Strategy<Value = (Diagram, Vec<CrossedElement>)> {
    (arb_diagram(5), 1usize..=3).prop_flat_map(move |(d, level)| {
        let basis = a_n_basis(&d, level);
        let n = basis.len();
        let dd = d.clone();
        let one = prop::collection::vec((0..n, -2i64..=2), 1..=3).prop_map(move |terms| {
            CrossedElement::from_terms(
                &dd,
                terms.into_iter().map(|(i, c)| (basis[i].clone(), int(c))),
            )
            .unwrap()
        });
        (Just(d), prop::collection::vec(one, count))
    })
}

fn same_level(d: &Diagram, a: &LevelFunction, b: &LevelFunction) -> bool {
    let level = a.level().max(b.level());
    refine_to(d, a, level) == refine_to(d, b, level)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn extremal_edges_one_per_vertex(d in arb_diagram(8)) {
        let ext = d.extremal_edges();
        prop_assert_eq!(ext.minimal.len(), d.vertex_count());
        prop_assert_eq!(ext.maximal.len(), d.vertex_count());
    }

    #[test]
    fn successor_edge_laws(d in arb_diagram(8)) {
        let mut images = BTreeSet::new();
        for e in d.edge_ids() {
            if let Some(s) = d.successor_edge(e) {
                prop_assert!(images.insert(s), "successor not injective");
                prop_assert_eq!(d.target(s), d.target(e));
                prop_assert_eq!(d.edge(s).rank, d.edge(e).rank + 1);
            } else {
                prop_assert!(d.is_max(e));
            }
        }
    }

    #[test]
    fn text_round_trip(d in arb_diagram(8)) {
        let text = serialize_diagram(&d);
        let back = parse_diagram(&text).unwrap();
        prop_assert_eq!(back.vertex_names(), d.vertex_names());
        prop_assert_eq!(back.edges(), d.edges());
        prop_assert_eq!(serialize_diagram(&back), text);
    }

    #[test]
    fn substitution_shape(images in prop::collection::vec(prop::collection::vec(0usize..3, 1..=3), 3)) {
        let letters = ["a", "b", "c"];
        let rules = images
            .iter()
            .enumerate()
            .map(|(i, img)| (letters[i].to_owned(), img.iter().map(|&j| letters[j].to_owned()).collect()))
            .collect();
        let s = Substitution::new(rules).unwrap();
        match diagram_from_substitution(&s) {
            Ok(d) => {
                let total: usize = images.iter().map(Vec::len).sum();
                prop_assert_eq!(d.edge_count(), total);
                let m = d.incidence_matrix();
                for (a, img) in images.iter().enumerate() {
                    let column: u64 = m.iter().map(|row| row[a]).sum();
                    prop_assert_eq!(column, img.len() as u64);
                }
            }
            // a letter absent from every image has no incoming edge
            Err(_) => prop_assert!((0..3).any(|j| images.iter().all(|img| !img.contains(&j)))),
        }
    }

    #[test]
    fn vershik_is_a_bijection_off_the_extremes(d in arb_diagram(6), n in 1usize..=4) {
        let paths = enumerate_paths(&d, n, None);
        let not_max: Vec<&Path> = paths.iter().filter(|p| !classify(&d, p).is_max).collect();
        let not_min: BTreeSet<Path> = paths.iter().filter(|p| !classify(&d, p).is_min).cloned().collect();
        let images: BTreeSet<Path> = not_max.iter().map(|p| vershik(&d, p).unwrap()).collect();
        prop_assert_eq!(images.len(), not_max.len());
        prop_assert_eq!(&images, &not_min);
        for p in &paths {
            match vershik(&d, p) {
                Some(q) => {
                    prop_assert_eq!(q.len(), p.len());
                    prop_assert_eq!(q.target(&d), p.target(&d));
                    prop_assert_eq!(vershik_inv(&d, &q), Some(p.clone()));
                }
                None => prop_assert!(classify(&d, p).is_max),
            }
        }
    }

    #[test]
    fn orbit_of_the_minimal_path_enumerates_the_fiber(d in arb_diagram(6), n in 1usize..=4) {
        for v in d.vertices() {
            let listed = enumerate_paths(&d, n, Some(v));
            let mut walk = vec![listed[0].clone()];
            prop_assert!(classify(&d, &walk[0]).is_min);
            while let Some(next) = vershik(&d, walk.last().unwrap()) {
                walk.push(next);
            }
            prop_assert_eq!(walk, listed);
        }
    }

    #[test]
    fn monotone_domains(d in arb_diagram(6), n in 1usize..=3, r in -8i64..=8, s in -8i64..=8) {
        prop_assume!((r >= s && s >= 0) || (r <= s && s <= 0));
        for p in enumerate_paths(&d, n, None) {
            if in_p_n(&d, &p, r) {
                prop_assert!(in_p_n(&d, &p, s));
            }
        }
    }

    #[test]
    fn pointwise_product_laws((d, fs) in with_functions(3)) {
        let (a, b, c) = (&fs[0], &fs[1], &fs[2]);
        prop_assert_eq!(multiply(&d, a, b), multiply(&d, b, a));
        prop_assert_eq!(
            multiply(&d, &multiply(&d, a, b), c),
            multiply(&d, a, &multiply(&d, b, c))
        );
        prop_assert_eq!(refine(&d, &multiply(&d, a, b)), multiply(&d, &refine(&d, a), &refine(&d, b)));
        for p in a.coeffs().keys() {
            let e = indicator(p);
            prop_assert_eq!(multiply(&d, &e, &e), e);
        }
        let one = LevelFunction::one(&d, a.level());
        prop_assert_eq!(multiply(&d, &one, a), a.clone());
        prop_assert_eq!(refine(&d, &one), LevelFunction::one(&d, a.level() + 1));
    }

    #[test]
    fn refinement_is_injective((d, fs) in with_functions(2)) {
        let (a, b) = (&fs[0], &fs[1]);
        prop_assert_eq!(a == b, refine(&d, a) == refine(&d, b));
    }

    #[test]
    fn alpha_inverts((d, fs) in with_functions(1), n in -4i64..=4) {
        let a = &fs[0];
        if let Ok(moved) = alpha(&d, a, n) {
            prop_assert_eq!(alpha(&d, &moved, -n).unwrap(), a.clone());
        }
        prop_assert_eq!(alpha(&d, a, 0).unwrap(), a.clone());
    }

    #[test]
    fn indicators_partition_unity_and_are_independent(d in arb_diagram(6), level in 1usize..=4) {
        let paths = enumerate_paths(&d, level, None);
        let sum = paths.iter().fold(LevelFunction::zero(level), |acc, p| acc.add(&d, &indicator(p)));
        prop_assert_eq!(&sum, &LevelFunction::one(&d, level));
        prop_assert!(same_level(&d, &sum, &LevelFunction::one(&d, level + 1)));
        let index: BTreeMap<&Path, usize> = paths.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let vectors = paths.iter().map(|p| {
            indicator(p).coeffs().iter().map(|(q, c)| (index[q], c.clone())).collect::<SparseVec>()
        });
        prop_assert_eq!(rank(vectors), paths.len());
    }

    #[test]
    fn crossed_product_is_a_star_algebra((d, xs) in with_crossed(3)) {
        let (x, y, z) = (&xs[0], &xs[1], &xs[2]);
        let xy = cross_multiply(&d, x, y);
        prop_assert_eq!(cross_multiply(&d, &xy, z), cross_multiply(&d, x, &cross_multiply(&d, y, z)));
        prop_assert_eq!(
            cross_adjoint(&d, &xy),
            cross_multiply(&d, &cross_adjoint(&d, y), &cross_adjoint(&d, x))
        );
        prop_assert_eq!(cross_adjoint(&d, &cross_adjoint(&d, x)), x.clone());
    }

    #[test]
    fn equivalence_search_matches_brute_force(a in arb_diagram(6), b in arb_diagram(6)) {
        let verdict = find_equivalence(&a, &b);
        prop_assert_eq!(matches!(verdict, Verdict::Equivalent(_)), brute_force_equivalent(&a, &b));
        if let Verdict::Equivalent(cert) = verdict {
            prop_assert!(check_certificate(&a, &b, &cert).unwrap().valid);
        }
    }

    #[test]
    fn relabeled_copies_are_found(
        (d, vperm, eperm) in arb_diagram(6).prop_flat_map(|d| {
            let k = d.vertex_count();
            let m = d.edge_count();
            (
                Just(d),
                Just((0..k).collect::<Vec<_>>()).prop_shuffle(),
                Just((0..m).collect::<Vec<_>>()).prop_shuffle(),
            )
        })
    ) {
        let (copy, renaming) = relabel(&d, &vperm, &eperm);
        let given = EquivalenceCertificate::new(renaming);
        prop_assert!(check_certificate(&d, &copy, &given).unwrap().valid);
        match find_equivalence(&d, &copy) {
            Verdict::Equivalent(cert) => {
                prop_assert!(check_certificate(&d, &copy, &cert).unwrap().valid);
                prop_assert!(check_certificate(&copy, &d, &cert.inverse()).unwrap().valid);
            }
            Verdict::NotEquivalent(reason) => prop_assert!(false, "{:?}", reason),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generators_are_partial_isometries(d in arb_diagram(5), depth in 2usize..=4) {
        let model = build_generators(&d, depth).unwrap();
        prop_assert!(model.u().is_partial_isometry());
        for e in d.edge_ids() {
            let v = model.v(e);
            prop_assert!(v.is_partial_isometry());
            prop_assert!(v.is_partial_permutation_pattern());
        }
        for n in -3i64..=3 {
            prop_assert!(model.pi(n).is_partial_isometry());
        }
    }
}
