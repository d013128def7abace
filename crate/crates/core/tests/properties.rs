use std::collections::HashMap;

use cutcount::cds::cds_space;
use cutcount::convolution::{
    build_kf, componentwise_cover_product, join_irreducibles_of_power, Gf2, Lattice, PowerLatticeTable, SetFamily,
};
use cutcount::cvc::cvc_space;
use cutcount::dp::{dp_union, DpTable, StateSpace};
use cutcount::graph::{connected_components, sample_weights_n, LabeledGraph, Vertex};
use cutcount::oracle::{
    brute_cds, brute_cvc, components_of_subset, count_consistent_cuts, naive_componentwise_cover, naive_vee_product,
};
use cutcount::transform::{is_irredundant, is_nice, make_irredundant, make_nice, prepare, random_expression};
use cutcount::{solve_cds, solve_cvc, Costs, SolveOptions};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

fn random_graph(n: usize, p: f64, seed: u64) -> LabeledGraph {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let edges: Vec<(Vertex, Vertex)> =
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|_| rng.gen_bool(p)).collect();
    LabeledGraph::unlabeled(n, edges).unwrap()
}

fn family_strategy() -> impl Strategy<Value = SetFamily> {
    prop_oneof![
        (2usize..=6)
            .prop_flat_map(|u| (Just(u), 0..=u as u32, 0..=u as u32))
            .prop_map(|(u, a, b)| { SetFamily::by_size(u, a.min(b), a.max(b)).unwrap() }),
        (2usize..=6)
            .prop_flat_map(|u| (Just(u), prop::collection::vec(0u64..1 << u, 1..4)))
            .prop_map(|(u, gens)| SetFamily::upward_closure(u, &gens).unwrap()),
    ]
}

fn values(len: usize, seed: u64) -> Vec<i64> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    (0..len).map(|_| rng.gen_range(-5..=5)).collect()
}

fn gf2(v: &[i64]) -> Vec<Gf2> {
    v.iter().map(|x| Gf2(x.rem_euclid(2) == 1)).collect()
}

/// Union of two tables by pairing every pair of nonzero cells.
fn naive_union(space: &StateSpace, a: &DpTable, b: &DpTable) -> DpTable {
    let mut labels: Vec<_> = a.labels().iter().chain(b.labels()).copied().collect();
    labels.sort_unstable();
    labels.dedup();
    let mut out = DpTable::zeros(labels.clone(), space.radix(), a.cmax(), a.wmax());
    for (sa, c1, w1) in a.ones() {
        'pairs: for (sb, c2, w2) in b.ones() {
            if c1 + c2 > a.cmax() || w1 + w2 > a.wmax() {
                continue;
            }
            let (da, db) = (a.decode(sa), b.decode(sb));
            let mut states = Vec::new();
            for l in &labels {
                let x = a.labels().iter().position(|y| y == l).map(|i| da[i]);
                let y = b.labels().iter().position(|z| z == l).map(|i| db[i]);
                match (x, y) {
                    (Some(x), Some(y)) => match space.combine[x][y] {
                        Some(s) => states.push(s),
                        None => continue 'pairs,
                    },
                    (Some(s), None) | (None, Some(s)) => states.push(s),
                    (None, None) => unreachable!(),
                }
            }
            let sig = out.encode(&states);
            out.toggle(sig, c1 + c2, w1 + w2);
        }
    }
    out
}

fn random_table(labels: Vec<u32>, radix: usize, seed: u64) -> DpTable {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut t = DpTable::zeros(labels, radix, 3, 70);
    for _ in 0..40 {
        let sig = rng.gen_range(0..t.signatures());
        t.toggle(sig, rng.gen_range(0..=3), rng.gen_range(0..=70));
    }
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subset_components_match_induced_graph(n in 1usize..=10, p in 0.0f64..0.6, seed in any::<u64>(), mask in any::<u64>()) {
        let g = random_graph(n, p, seed);
        let x: Vec<Vertex> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
        let index: HashMap<Vertex, usize> = x.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let induced = LabeledGraph::unlabeled(
            x.len(),
            g.edges().filter_map(|(u, v)| Some((*index.get(&u)?, *index.get(&v)?))),
        ).unwrap();
        prop_assert_eq!(components_of_subset(&g, &x), connected_components(&induced));
    }

    #[test]
    fn consistent_cuts_are_two_to_the_components_minus_one(n in 1usize..=10, p in 0.0f64..0.6, seed in any::<u64>(), mask in 1u64..1024) {
        let g = random_graph(n, p, seed);
        let x: Vec<Vertex> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
        prop_assume!(!x.is_empty());
        let cc = components_of_subset(&g, &x);
        prop_assert_eq!(count_consistent_cuts(&g, &x, x[0]).unwrap(), 1u64 << (cc - 1));
    }

    #[test]
    fn mobius_inverts_zeta(fam in family_strategy(), seed in any::<u64>()) {
        let a = values(fam.len(), seed);
        prop_assert_eq!(fam.mobius(&fam.zeta(&a).unwrap()).unwrap(), a.clone());
        prop_assert_eq!(fam.zeta(&fam.mobius(&a).unwrap()).unwrap(), a.clone());
        let b = gf2(&a);
        prop_assert_eq!(fam.mobius(&fam.zeta(&b).unwrap()).unwrap(), b);
    }

    #[test]
    fn zeta_turns_cover_product_into_pointwise(fam in family_strategy(), seed in any::<u64>()) {
        let a = values(fam.len(), seed);
        let b = values(fam.len(), seed ^ 0xabc);
        let za = fam.zeta(&a).unwrap();
        let zb = fam.zeta(&b).unwrap();
        let lhs = fam.zeta(&fam.cover_product(&a, &b).unwrap()).unwrap();
        let rhs: Vec<i64> = za.iter().zip(&zb).map(|(x, y)| x * y).collect();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn componentwise_cover_matches_naive(u in 2usize..=3, k in 1usize..=3, seed in any::<u64>()) {
        let fam = SetFamily::by_size(u, 1, u as u32 - 1).unwrap();
        let size = fam.len().pow(k as u32);
        let a = values(size, seed);
        let b = values(size, seed.rotate_left(7));
        prop_assert_eq!(
            componentwise_cover_product(&fam, k, &a, &b).unwrap(),
            naive_componentwise_cover(&fam, k, &a, &b).unwrap()
        );
        let (ga, gb) = (gf2(&a), gf2(&b));
        prop_assert_eq!(
            componentwise_cover_product(&fam, k, &ga, &gb).unwrap(),
            naive_componentwise_cover(&fam, k, &ga, &gb).unwrap()
        );
        prop_assert_eq!(build_kf(&fam, k).unwrap().len(), size);
    }

    #[test]
    fn vee_product_matches_naive(k in 1usize..=3, seed in any::<u64>()) {
        let lat = Lattice::cds();
        let size = lat.size().pow(k as u32);
        let a = values(size, seed);
        let b = values(size, !seed);
        let ta = PowerLatticeTable::new(lat.clone(), k, a.clone()).unwrap();
        let tb = PowerLatticeTable::new(lat.clone(), k, b.clone()).unwrap();
        prop_assert_eq!(ta.vee_product(&tb).unwrap().values, naive_vee_product(&lat, k, &a, &b).unwrap());
        let (ga, gb) = (gf2(&a), gf2(&b));
        let ta = PowerLatticeTable::new(lat.clone(), k, ga.clone()).unwrap();
        let tb = PowerLatticeTable::new(lat.clone(), k, gb.clone()).unwrap();
        prop_assert_eq!(ta.vee_product(&tb).unwrap().values, naive_vee_product(&lat, k, &ga, &gb).unwrap());
    }

    #[test]
    fn union_with_two_shared_labels_matches_pairing(seed in any::<u64>(), cds in any::<bool>()) {
        let space = if cds { cds_space() } else { cvc_space() };
        let a = random_table(vec![1, 2, 3], space.radix(), seed);
        let b = random_table(vec![2, 3, 4], space.radix(), seed ^ 0x55);
        prop_assert_eq!(dp_union(&space, &a, &b), naive_union(&space, &a, &b));
        let c = random_table(vec![5], space.radix(), seed ^ 0x77);
        prop_assert_eq!(dp_union(&space, &a, &c), naive_union(&space, &a, &c));
    }

    #[test]
    fn transforms_keep_the_graph(n in 1usize..=12, k in 2u32..=5, seed in any::<u64>()) {
        let e = random_expression(n, k, seed);
        let irr = make_irredundant(&e).unwrap();
        let nice = make_nice(&irr).unwrap();
        let prepared = prepare(&e).unwrap();
        prop_assert!(is_irredundant(&irr));
        prop_assert!(is_nice(&nice));
        for t in [&irr, &nice] {
            prop_assert_eq!(t.evaluate(), e.evaluate());
            prop_assert!(t.width() <= e.width());
        }
        prop_assert!(prepared.evaluate().same_edges(&e.evaluate()));
        prop_assert!(prepared.width() <= e.width());
        prop_assert_eq!(prepare(&prepared).unwrap().evaluate(), prepared.evaluate());
    }

    #[test]
    fn yes_answers_are_never_wrong(n in 2usize..=7, k in 2u32..=3, seed in any::<u64>(), budget in 0u64..=7, cds in any::<bool>()) {
        let e = random_expression(n, k, seed);
        let g = e.evaluate();
        let costs = Costs::unit(n);
        let mut opts = SolveOptions::new(budget, seed);
        opts.repeats = 3;
        let (found, opt) = if cds {
            (solve_cds(&e, &costs, &opts).unwrap(), brute_cds(&g, costs.values()).unwrap())
        } else {
            (solve_cvc(&e, &costs, &opts).unwrap(), brute_cvc(&g, costs.values()).unwrap())
        };
        if found.decision {
            prop_assert!(opt.is_some_and(|o| o <= budget));
            prop_assert!(found.best_cost_found.unwrap() <= budget);
        }
    }
}

#[test]
fn power_lattice_irreducibles_match_brute_force() {
    let lat = Lattice::cds();
    for k in 1..=3usize {
        let size = lat.size().pow(k as u32);
        let digits = |mut x: usize| -> Vec<usize> {
            (0..k)
                .map(|_| {
                    let d = x % lat.size();
                    x /= lat.size();
                    d
                })
                .collect()
        };
        let join: Vec<Vec<usize>> = (0..size)
            .map(|x| {
                (0..size)
                    .map(|y| {
                        let (dx, dy) = (digits(x), digits(y));
                        dx.iter().zip(&dy).rev().fold(0, |acc, (&a, &b)| acc * lat.size() + lat.join(a, b))
                    })
                    .collect()
            })
            .collect();
        let product = Lattice::new(join).unwrap();
        let mut brute: Vec<Vec<usize>> = product.irreducibles().iter().map(|&x| digits(x)).collect();
        let mut listed = join_irreducibles_of_power(&lat, k);
        brute.sort();
        listed.sort();
        assert_eq!(listed.len(), 1 + 3 * k);
        assert_eq!(brute, listed, "k={k}");
    }
    assert_eq!(join_irreducibles_of_power(&lat, 4).len(), 13);
}

/// Connected vertex covers of minimum cost, as bitmasks.
fn min_cvcs(g: &LabeledGraph) -> Vec<u64> {
    let n = g.n();
    let mut best = usize::MAX;
    let mut out = Vec::new();
    for s in 0u64..1 << n {
        let x: Vec<Vertex> = (0..n).filter(|v| s >> v & 1 == 1).collect();
        let covers = g.edges().all(|(u, v)| s >> u & 1 == 1 || s >> v & 1 == 1);
        if !covers || components_of_subset(g, &x) != 1 {
            continue;
        }
        match x.len().cmp(&best) {
            std::cmp::Ordering::Less => {
                best = x.len();
                out = vec![s];
            }
            std::cmp::Ordering::Equal => out.push(s),
            std::cmp::Ordering::Greater => {}
        }
    }
    out
}

#[test]
fn random_weights_isolate_a_minimum() {
    let mut families = 0;
    for seed in 0..20u64 {
        let e = random_expression(8, 3, seed);
        let g = e.evaluate();
        let sols = min_cvcs(&g);
        if sols.len() < 2 {
            continue;
        }
        families += 1;
        let trials = 300;
        let unique = (0..trials)
            .filter(|&t| {
                let w = sample_weights_n(g.n(), seed * 1000 + t).unwrap();
                let weight = |s: u64| (0..g.n()).filter(|v| s >> v & 1 == 1).map(|v| w.get(v)).sum::<u64>();
                let min = sols.iter().map(|&s| weight(s)).min().unwrap();
                sols.iter().filter(|&&s| weight(s) == min).count() == 1
            })
            .count();
        let rate = unique as f64 / trials as f64;
        assert!(rate >= 0.5, "seed {seed}: {} minima, isolation rate {rate}", sols.len());
    }
    assert!(families >= 5);
}

#[test]
fn single_trials_detect_yes_instances() {
    let (mut yes, mut hits) = (0, 0);
    for seed in 0..60u64 {
        let e = random_expression(6, 3, seed);
        let g = e.evaluate();
        let costs = Costs::unit(6);
        for (cds, opt) in
            [(false, brute_cvc(&g, costs.values()).unwrap()), (true, brute_cds(&g, costs.values()).unwrap())]
        {
            let Some(opt) = opt else { continue };
            let mut opts = SolveOptions::new(opt, seed);
            opts.repeats = 1;
            let out = if cds { solve_cds(&e, &costs, &opts) } else { solve_cvc(&e, &costs, &opts) }.unwrap();
            yes += 1;
            hits += usize::from(out.decision);
        }
    }
    assert!(yes >= 100);
    assert!(hits as f64 / yes as f64 >= 0.5, "{hits}/{yes}");
}
