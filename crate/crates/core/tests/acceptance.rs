//! The ten gate checks, one test each, in order. Every test prints its own
//! pass line (visible with --nocapture) and enforces its time budget.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use epimu::formulas::{
    agreement, agreement_fixpoint, decisions_are_known, decisions_from_inputs,
    inputs_are_functions, outputs_are_functions,
};
use epimu::logic::model::ModelState;
use epimu::logic::{common_knowledge, AtomicProp, Formula};
use epimu::models::{
    input_complex, k_concurrency_model, protocol_model_iis, task_model_sak, TaskLabeling,
};
use epimu::simplicial::{ProcessId, Simplex};
use epimu::solvability::fd::{
    decision_profiles, degree_by_profile, BowtieGraph, CornerFamilies, LabelingSpace,
};
use epimu::solvability::search::{search_morphism, SearchConfig};
use epimu::solvability::sperner::{
    enumerate_colorings, rainbow_count, random_coloring, SpernerInstance,
};
use epimu::solvability::{
    knowledge_gain_check, morphism_images, pull_back, verify_morphism,
};
use epimu::subdivision::{
    enumerate_osp, enumerate_osp_tail, incident_by_osp, iterated_subdivision,
    OrderedSetPartition, SubdividedFacet,
};
use epimu::{Interpretation, SimplicialModel, StateSet};

const LIMIT: usize = 1_000_000;

fn input_state(name: &str, values: &[u32]) -> ModelState {
    let facet = Simplex::from_base_values(values);
    let atoms = values
        .iter()
        .enumerate()
        .map(|(p, v)| AtomicProp::input(p as u32, *v))
        .collect();
    ModelState {
        name: name.into(),
        facet,
        atoms,
    }
}

fn within(budget: Duration, start: Instant, what: &str) {
    let spent = start.elapsed();
    assert!(
        spent <= budget,
        "{what} took {spent:?}, over its {budget:?} budget"
    );
}

#[test]
fn criterion_01_three_facet_knowledge_facts() {
    let start = Instant::now();
    let model = SimplicialModel::new(
        2,
        vec![
            input_state("X", &[0, 1, 2]),
            input_state("Y", &[1, 1, 2]),
            input_state("W", &[1, 1, 0]),
        ],
    )
    .unwrap();
    let x = 0;
    assert_eq!(model.state(x).unwrap().name, "X");
    let third_holds_two = Formula::Atom(AtomicProp::input(2, 2));
    let facts = [
        (Formula::dknow([1, 2], third_holds_two.clone()), true),
        (Formula::dknow([1], third_holds_two.clone()), false),
        (
            common_knowledge([ProcessId(2)], third_holds_two.clone()).unwrap(),
            true,
        ),
        (
            common_knowledge([ProcessId(0), ProcessId(2)], third_holds_two).unwrap(),
            false,
        ),
    ];
    for (formula, expected) in &facts {
        assert_eq!(
            model.satisfies(x, formula).unwrap(),
            *expected,
            "at X: {formula}"
        );
    }
    within(Duration::from_secs(1), start, "criterion 1");
    println!("criterion 1: pass - all four knowledge facts hold at X");
}

#[test]
fn criterion_02_formula_families_are_valid_where_promised() {
    let start = Instant::now();
    for n in 0..=2 {
        for m in 0..=2 {
            let p = protocol_model_iis(n, m, LIMIT).unwrap();
            assert!(
                p.model().valid(&inputs_are_functions(n)).unwrap(),
                "inputs functional after {m} rounds, n={n}"
            );
        }
        for k in 1..=n + 1 {
            let t = task_model_sak(n, k, TaskLabeling::InputsAndDecisions).unwrap();
            let battery = [
                outputs_are_functions(n),
                decisions_from_inputs(n),
                agreement(n, k),
                decisions_are_known(n),
                agreement_fixpoint(n, k),
            ];
            for f in &battery {
                assert!(t.valid(f).unwrap(), "n={n} k={k}: {f}");
            }
        }
    }
    within(Duration::from_secs(10), start, "criterion 2");
    println!("criterion 2: pass - validity suite over inputs and labeled tasks");
}

#[test]
fn criterion_03_small_instances_are_exhaustively_unsolvable() {
    let start = Instant::now();
    for (n, k, m) in [(1, 1, 1), (1, 1, 2), (2, 1, 1), (2, 2, 1)] {
        let p = protocol_model_iis(n, m, LIMIT).unwrap();
        let out = search_morphism(&p, k, &SearchConfig::default()).unwrap();
        assert!(
            out.morphism.is_none(),
            "(n={n}, k={k}, m={m}) should admit no decision morphism"
        );
    }
    within(Duration::from_secs(300), start, "criterion 3");
    println!("criterion 3: pass - four unsolvable instances refuted exhaustively");
}

#[test]
fn criterion_04_solvable_instances_verify_and_gain_no_knowledge() {
    let start = Instant::now();
    for (n, k) in [(1, 2), (2, 3)] {
        let p = protocol_model_iis(n, 1, LIMIT).unwrap();
        let out = search_morphism(&p, k, &SearchConfig::default()).unwrap();
        let delta = out.morphism.expect("instance should be solvable");
        let t = task_model_sak(n, k, TaskLabeling::InputsAndDecisions).unwrap();
        assert!(verify_morphism(&p, &t, &delta).unwrap());
        let images = morphism_images(&p, &t, &delta).unwrap();
        let pulled = pull_back(&p, &t, &images).unwrap();
        let all: Vec<usize> = (0..pulled.state_count()).collect();
        let battery = [
            inputs_are_functions(n),
            outputs_are_functions(n),
            decisions_from_inputs(n),
            agreement(n, k),
            decisions_are_known(n),
            agreement_fixpoint(n, k),
        ];
        for phi in &battery {
            let gained = knowledge_gain_check(&p, &t, &delta, phi, &all).unwrap();
            assert!(
                gained.is_empty(),
                "n={n} k={k}: {} states gained {phi}",
                gained.len()
            );
        }
        assert!(
            pulled.valid(&agreement_fixpoint(n, n + 1)).unwrap(),
            "n={n}: the n+1 fixpoint should hold on the pull-back"
        );
    }
    within(Duration::from_secs(60), start, "criterion 4");
    println!("criterion 4: pass - verified morphisms, no knowledge gain, fixpoint holds");
}

#[test]
fn criterion_05_incidence_matches_the_brute_force_classes() {
    let start = Instant::now();
    let bases: Vec<Simplex> = input_complex(2).facets().cloned().collect();
    let mut checked = 0usize;
    for m in 1..=2usize {
        for d in 0..=2usize {
            let tails = enumerate_osp_tail(d, 2);
            let mut histories: Vec<Vec<OrderedSetPartition>> = vec![Vec::new()];
            for _ in 0..m {
                histories = histories
                    .into_iter()
                    .flat_map(|h| {
                        tails.iter().map(move |g| {
                            let mut h = h.clone();
                            h.push(g.clone());
                            h
                        })
                    })
                    .collect();
            }
            let universe: Vec<SubdividedFacet> = bases
                .iter()
                .flat_map(|base| {
                    histories
                        .iter()
                        .map(move |h| iterated_subdivision(base, h).unwrap())
                })
                .collect();
            for b in 0..=d as u32 {
                let group: BTreeSet<ProcessId> = (0..=d as u32)
                    .filter(|p| *p != b)
                    .map(ProcessId)
                    .collect();
                // group the whole universe by the face the group keeps
                let mut classes: BTreeMap<Simplex, Vec<usize>> = BTreeMap::new();
                for (i, sf) in universe.iter().enumerate() {
                    classes
                        .entry(sf.realized().restrict(&group))
                        .or_default()
                        .push(i);
                }
                for members in classes.values() {
                    for &i in members {
                        let expected: BTreeSet<SubdividedFacet> = members
                            .iter()
                            .filter(|&&j| j != i)
                            .map(|&j| universe[j].clone())
                            .collect();
                        let got =
                            incident_by_osp(&universe[i], &group, d, ProcessId(b), true)
                                .unwrap();
                        assert_eq!(
                            got, expected,
                            "facet {} group {:?}",
                            universe[i], group
                        );
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 10_000, "only {checked} incidence checks ran");
    within(Duration::from_secs(60), start, "criterion 5");
    println!("criterion 5: pass - {checked} incidence sets equal their brute-force classes");
}

#[test]
fn criterion_06_enumeration_counts_are_exact() {
    let counts: Vec<usize> = (0..=3).map(|n| enumerate_osp(n).len()).collect();
    assert_eq!(counts, [1, 3, 13, 75]);
    assert_eq!(protocol_model_iis(2, 1, LIMIT).unwrap().facets().len(), 351);
    assert_eq!(
        protocol_model_iis(2, 2, LIMIT).unwrap().facets().len(),
        4563
    );
    assert_eq!(CornerFamilies::new(2, 1).unwrap().family(1).len(), 3);
    assert_eq!(CornerFamilies::new(2, 2).unwrap().family(1).len(), 9);
    println!("criterion 6: pass - schedule, protocol, and family counts match");
}

#[test]
fn criterion_07_origin_and_degree_contracts_hold() {
    let start = Instant::now();
    // one round: every admissible labeling, k = 1 and k = 2
    let fams = CornerFamilies::new(2, 1).unwrap();
    for (k, expected_space) in [(1usize, 8u128), (2, 3456)] {
        let graph = BowtieGraph::new(&fams, k).unwrap();
        let space = LabelingSpace::over(graph.facets().iter());
        assert_eq!(space.count(), expected_space);
        for code in 0..space.count() {
            let delta = space.labeling(code);
            let profiles = decision_profiles(&graph, &delta).unwrap();
            check_degrees(&graph, &profiles, k, &format!("m=1 k={k} code={code}"));
        }
    }
    // two rounds: ten thousand random labelings per k
    let fams = CornerFamilies::new(2, 2).unwrap();
    let mut rng = StdRng::seed_from_u64(0xacce);
    for k in 1..=2usize {
        let graph = BowtieGraph::new(&fams, k).unwrap();
        let space = LabelingSpace::over(graph.facets().iter());
        for i in 0..10_000 {
            let delta = space.sample(&mut rng);
            let profiles = decision_profiles(&graph, &delta).unwrap();
            check_degrees(&graph, &profiles, k, &format!("m=2 k={k} sample={i}"));
        }
    }
    within(Duration::from_secs(120), start, "criterion 7");
    println!("criterion 7: pass - origin degree 1 and 0-or-2 elsewhere, exhaustive and sampled");
}

fn check_degrees(graph: &BowtieGraph, profiles: &[Vec<u32>], k: usize, ctx: &str) {
    let mut odd = 0usize;
    for i in 0..graph.facets().len() {
        let degree = degree_by_profile(graph, profiles, i);
        if degree % 2 == 1 {
            odd += 1;
        }
        if graph.family(i) == 0 {
            assert_eq!(degree, 1, "{ctx}: origin degree");
        } else {
            let distinct: BTreeSet<u32> = profiles[i].iter().copied().collect();
            if distinct.len() <= k {
                assert!(degree == 0 || degree == 2, "{ctx}: degree {degree} at {i}");
            }
        }
    }
    assert_eq!(odd % 2, 0, "{ctx}: odd-degree facets must pair up");
}

#[test]
fn criterion_08_rainbow_counts_are_odd() {
    let start = Instant::now();
    for m in 1..=2usize {
        let inst = SpernerInstance::new(1, m).unwrap();
        for coloring in enumerate_colorings(&inst) {
            assert_eq!(rainbow_count(&inst, &coloring).unwrap() % 2, 1, "n=1 m={m}");
        }
    }
    let mut rng = StdRng::seed_from_u64(0x0dd);
    for m in 1..=2usize {
        let inst = SpernerInstance::new(2, m).unwrap();
        for i in 0..1000 {
            let coloring = random_coloring(&inst, &mut rng);
            assert_eq!(
                rainbow_count(&inst, &coloring).unwrap() % 2,
                1,
                "n=2 m={m} sample {i}"
            );
        }
    }
    within(Duration::from_secs(120), start, "criterion 8");
    println!("criterion 8: pass - every sampled coloring has an odd rainbow count");
}

#[test]
fn criterion_09_concurrency_models_bound_the_families() {
    let start = Instant::now();
    let r2 = k_concurrency_model(2, 2, LIMIT).unwrap();
    let fams = CornerFamilies::new(2, 2).unwrap();
    for d in 0..=1usize {
        for sf in fams.family(d) {
            assert!(
                r2.find_facet(sf).is_some(),
                "family {d} member {sf} missing from the 2-concurrency model"
            );
        }
    }
    let r3 = k_concurrency_model(2, 3, LIMIT).unwrap();
    let iis2 = protocol_model_iis(2, 2, LIMIT).unwrap();
    let r3_facets: BTreeSet<&SubdividedFacet> = r3.facets().iter().collect();
    let iis2_facets: BTreeSet<&SubdividedFacet> = iis2.facets().iter().collect();
    assert_eq!(r3_facets, iis2_facets);
    let out = search_morphism(&r2, 1, &SearchConfig::default()).unwrap();
    assert!(out.morphism.is_none(), "consensus over R_2 must stay unsolvable");
    within(Duration::from_secs(300), start, "criterion 9");
    println!("criterion 9: pass - family containment, R_3 saturation, no consensus on R_2");
}

#[test]
fn criterion_10_random_fixpoints_are_greatest() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xf1f0);
    let bases: Vec<Simplex> = input_complex(2).facets().cloned().collect();
    for round in 0..100 {
        let model = random_model(&mut rng, &bases);
        let body = random_positive(&mut rng, 4);
        let nu = model.eval(&Formula::nu("Z", body.clone())).unwrap();
        let env = |s: StateSet| Interpretation::from([("Z".to_string(), s)]);
        let again = model.eval_with(&body, &env(nu.clone())).unwrap();
        assert_eq!(again, nu, "round {round}: not a fixpoint");
        for _ in 0..5 {
            let mut s: StateSet = (0..model.state_count())
                .filter(|_| rng.gen_bool(0.5))
                .collect();
            loop {
                let fs = model.eval_with(&body, &env(s.clone())).unwrap();
                let next: StateSet = s.intersection(&fs).cloned().collect();
                if next == s {
                    break;
                }
                s = next;
            }
            assert!(
                s.is_subset(&nu),
                "round {round}: post-fixpoint escapes the greatest fixpoint"
            );
        }
    }
    within(Duration::from_secs(60), start, "criterion 10");
    println!("criterion 10: pass - 100 random models, fixpoints greatest");
}

fn random_model(rng: &mut StdRng, bases: &[Simplex]) -> SimplicialModel {
    let mut chosen: Vec<&Simplex> = bases.iter().filter(|_| rng.gen_bool(0.5)).collect();
    if chosen.is_empty() {
        chosen.push(&bases[0]);
    }
    let states = chosen
        .into_iter()
        .enumerate()
        .map(|(i, facet)| {
            let mut atoms: BTreeSet<AtomicProp> = facet
                .iter()
                .map(|v| match v.value {
                    epimu::Value::Base(x) => AtomicProp::input(v.color.0, x),
                    _ => unreachable!(),
                })
                .collect();
            for p in 0..=2u32 {
                if rng.gen_bool(0.7) {
                    atoms.insert(AtomicProp::decide(p, rng.gen_range(0..=2)));
                }
            }
            ModelState {
                name: format!("s{i}"),
                facet: facet.clone(),
                atoms,
            }
        })
        .collect();
    SimplicialModel::new(2, states).unwrap()
}

fn random_positive(rng: &mut StdRng, depth: usize) -> Formula {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        if rng.gen_bool(0.2) {
            return Formula::Var("Z".into());
        }
        let atom = if rng.gen_bool(0.5) {
            AtomicProp::input(rng.gen_range(0..=2), rng.gen_range(0..=2))
        } else {
            AtomicProp::decide(rng.gen_range(0..=2), rng.gen_range(0..=2))
        };
        return if rng.gen_bool(0.5) {
            Formula::Atom(atom)
        } else {
            Formula::NegAtom(atom)
        };
    }
    match rng.gen_range(0..3) {
        0 => Formula::and((0..rng.gen_range(2..4)).map(|_| random_positive(rng, depth - 1))),
        1 => Formula::or((0..rng.gen_range(2..4)).map(|_| random_positive(rng, depth - 1))),
        _ => {
            let group: BTreeSet<u32> = (0..=2)
                .filter(|_| rng.gen_bool(0.5))
                .collect();
            let group = if group.is_empty() {
                [rng.gen_range(0..=2)].into()
            } else {
                group
            };
            Formula::dknow(group, random_positive(rng, depth - 1))
        }
    }
}
