mod common;

use std::collections::BTreeSet;

use common::*;
use fairmpdag::ancestry::{ancestral_relation, critical_set, AncestralRelation};
use fairmpdag::graph::{Pdag, VertexId};
use fairmpdag::ident::{enumerate_dags_in_class, enumerate_valid_orientations, is_identifiable};
use fairmpdag::meek::{construct_mpdag, cpdag_from_dag, BackgroundKnowledge};
use rand::Rng;

fn random_mpdag(rng: &mut rand_chacha::ChaCha8Rng, max_vertices: usize) -> (Pdag, Pdag) {
    let d = random_dag(rng, max_vertices);
    let c = cpdag_from_dag(&d).unwrap();
    let p = rng.random_range(0.0..0.6);
    let bk = random_true_background(rng, &d, &c, p);
    let m = construct_mpdag(&c, &BackgroundKnowledge::new(&c, bk).unwrap()).unwrap();
    (d, m)
}

#[test]
fn cpdag_matches_brute_force_on_random_dags() {
    let mut rng = rng(1);
    for _ in 0..150 {
        let d = random_dag(&mut rng, 7);
        assert_eq!(cpdag_from_dag(&d).unwrap(), brute_cpdag(&d), "dag:\n{d}");
    }
}

#[test]
fn mpdag_matches_consistent_members() {
    let mut rng = rng(2);
    for _ in 0..200 {
        let d = random_dag(&mut rng, 7);
        let c = cpdag_from_dag(&d).unwrap();
        let p = rng.random_range(0.1..0.8);
        let bk = random_true_background(&mut rng, &d, &c, p);
        let m = construct_mpdag(&c, &BackgroundKnowledge::new(&c, bk.clone()).unwrap()).unwrap();
        assert_eq!(m, brute_mpdag(&c, &bk), "dag:\n{d}\nbk: {bk:?}");
    }
}

#[test]
fn class_enumeration_matches_brute_force() {
    let mut rng = rng(3);
    for _ in 0..100 {
        let (_, m) = random_mpdag(&mut rng, 7);
        let ours: BTreeSet<Dag> = enumerate_dags_in_class(&m)
            .unwrap()
            .iter()
            .map(to_matrix)
            .collect();
        let oracle: BTreeSet<Dag> = members(&m).into_iter().collect();
        assert_eq!(ours, oracle, "mpdag:\n{m}");
    }
}

#[test]
fn ancestral_relations_match_enumeration() {
    let mut rng = rng(4);
    for _ in 0..150 {
        let (_, m) = random_mpdag(&mut rng, 7);
        let dags = members(&m);
        for s in m.vertices() {
            let desc: Vec<BTreeSet<usize>> =
                dags.iter().map(|d| descendants(d, s.index())).collect();
            for t in m.vertices().filter(|&t| t != s) {
                let hits = desc.iter().filter(|ds| ds.contains(&t.index())).count();
                let expect = match hits {
                    0 => AncestralRelation::DefiniteNonDescendant,
                    h if h == dags.len() => AncestralRelation::DefiniteDescendant,
                    _ => AncestralRelation::PossibleDescendant,
                };
                assert_eq!(
                    ancestral_relation(&m, s, t),
                    expect,
                    "mpdag:\n{m}\ns={}, t={}",
                    m.name(s),
                    m.name(t)
                );
                let nbrs: BTreeSet<VertexId> = m.neighbors_of(s).into_iter().collect();
                assert!(critical_set(&m, s, t).is_subset(&nbrs));
            }
        }
    }
}

#[test]
fn identifiable_singletons_have_definite_relations() {
    let mut rng = rng(5);
    for _ in 0..100 {
        let (_, m) = random_mpdag(&mut rng, 7);
        for s in m.vertices() {
            if is_identifiable(&m, &BTreeSet::from([s])) {
                assert!(fairmpdag::ancestry::all_relations_definite(&m, s));
            }
        }
    }
}

#[test]
fn triangle_orientations_match_brute_force() {
    let g: Pdag = "A -- X\nA -- W\nX -- W".parse().unwrap();
    let a = g.vertex("A").unwrap();
    let s = BTreeSet::from([a]);
    let ours: BTreeSet<String> = enumerate_valid_orientations(&g, &s)
        .unwrap()
        .iter()
        .map(|m| m.to_string())
        .collect();
    // Oracle: every orientation of A's two edges, closed over consistent
    // members of the class.
    let mut oracle = BTreeSet::new();
    for &(tx, hx) in &[("A", "X"), ("X", "A")] {
        for &(tw, hw) in &[("A", "W"), ("W", "A")] {
            let bk: BTreeSet<(VertexId, VertexId)> = [(tx, hx), (tw, hw)]
                .iter()
                .map(|&(t, h)| (g.vertex(t).unwrap(), g.vertex(h).unwrap()))
                .collect();
            let consistent = members(&g)
                .into_iter()
                .any(|m| bk.iter().all(|&(t, h)| m[t.index()][h.index()]));
            if consistent {
                oracle.insert(brute_mpdag(&g, &bk).to_string());
            }
        }
    }
    assert_eq!(oracle.len(), 4);
    assert_eq!(ours, oracle);
}
