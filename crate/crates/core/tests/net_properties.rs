//! Properties of the net layer: firing, structural sets, vector firing and acyclicity.

use basisnet::oracle::find_firing_sequence;
use basisnet::{FinalSpec, Gmec, Marking, PetriNet};
use proptest::prelude::*;

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn matrix(m: usize, n: usize, max: i64, density: f64) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(
        prop::collection::vec(
            (prop::bool::weighted(density), 1..=max).prop_map(|(on, w)| if on { w } else { 0 }),
            n,
        ),
        m,
    )
}

/// Random net with a marking of matching size.
fn net_and_marking() -> impl Strategy<Value = (PetriNet, Marking)> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(m, n)| {
        (
            matrix(m, n, 3, 0.4),
            matrix(m, n, 3, 0.4),
            prop::collection::vec(0i64..=4, m),
        )
            .prop_map(move |(pre, post, tokens)| {
                (
                    PetriNet::new(names("p", m), names("t", n), pre, post).unwrap(),
                    Marking::new(tokens).unwrap(),
                )
            })
    })
}

/// Acyclic by construction: outputs of a transition go only to places after all its inputs.
fn acyclic_net() -> impl Strategy<Value = (PetriNet, Marking)> {
    (2usize..=5, 1usize..=6).prop_flat_map(|(m, n)| {
        (
            prop::collection::vec((0..m - 1, 1i64..=2, prop::bool::ANY, 1i64..=2), n),
            prop::collection::vec(0i64..=3, m),
        )
            .prop_map(move |(cols, tokens)| {
                let mut pre = vec![vec![0; n]; m];
                let mut post = vec![vec![0; n]; m];
                for (t, &(input, wi, two_outputs, wo)) in cols.iter().enumerate() {
                    pre[input][t] = wi;
                    post[input + 1 + (t % (m - 1 - input))][t] = wo;
                    if two_outputs {
                        post[m - 1][t] += 1;
                    }
                }
                (
                    PetriNet::new(names("p", m), names("t", n), pre, post).unwrap(),
                    Marking::new(tokens).unwrap(),
                )
            })
    })
}

/// All vectors of length `n` with nonnegative entries summing to at most `budget`.
fn vectors_up_to(n: usize, budget: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<i64>| {
                let used: i64 = v.iter().sum();
                (0..=budget - used).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn firing_adds_incidence_column((net, m) in net_and_marking()) {
        for t in 0..net.transition_count() {
            if net.is_enabled(&m, t).unwrap() {
                let next = net.fire(&m, t).unwrap();
                prop_assert!(next.tokens().iter().all(|&x| x >= 0));
                let delta: Vec<i64> = next.tokens().iter().zip(m.tokens()).map(|(a, b)| a - b).collect();
                prop_assert_eq!(delta, net.incidence_column(t));
            } else {
                prop_assert!(net.fire(&m, t).is_err());
            }
        }
        let dead = net.enabled_transitions(&m).unwrap().is_empty();
        prop_assert_eq!(net.is_dead(&m).unwrap(), dead);
    }

    #[test]
    fn conflicts_ignore_post((net, _) in net_and_marking(), seed in any::<u64>()) {
        let (m, n) = (net.place_count(), net.transition_count());
        let pre: Vec<Vec<i64>> = (0..m).map(|p| (0..n).map(|t| net.pre(p, t)).collect()).collect();
        let post: Vec<Vec<i64>> = (0..m)
            .map(|p| (0..n).map(|t| ((seed >> ((p * n + t) % 64)) & 3) as i64).collect())
            .collect();
        let other = PetriNet::new(net.places().to_vec(), net.transitions().to_vec(), pre, post).unwrap();
        prop_assert_eq!(net.conflict_transitions(), other.conflict_transitions());
        for t in net.conflict_transitions() {
            let shares = net
                .preset_of_transition(t)
                .any(|p| net.postset_of_place(p).any(|u| u != t));
            prop_assert!(shares);
        }
    }

    #[test]
    fn increasing_set_sign_consistent(
        (net, _) in net_and_marking(),
        raw in prop::collection::vec(-2i64..=2, 5),
        k in -3i64..=3,
    ) {
        let (m, n) = (net.place_count(), net.transition_count());
        let w: Vec<i64> = raw[..m].to_vec();
        let spec = FinalSpec::single(Gmec::new(w.clone(), k));
        // swapping Pre and Post negates C; negating w as well leaves every w^T C(., t) unchanged
        let pre: Vec<Vec<i64>> = (0..m).map(|p| (0..n).map(|t| net.post(p, t)).collect()).collect();
        let post: Vec<Vec<i64>> = (0..m).map(|p| (0..n).map(|t| net.pre(p, t)).collect()).collect();
        let flipped = PetriNet::new(net.places().to_vec(), net.transitions().to_vec(), pre, post).unwrap();
        let neg = FinalSpec::single(Gmec::new(w.iter().map(|x| -x).collect(), k));
        let inc = net.increasing_transitions(&spec).unwrap();
        prop_assert_eq!(&inc, &flipped.increasing_transitions(&neg).unwrap());
        for t in 0..n {
            prop_assert_eq!(inc.contains(&t), net.weighted_effect(&w, t).unwrap() > 0);
        }
    }

    #[test]
    fn fire_vector_matches_sequence_search((net, m) in acyclic_net()) {
        prop_assert!(net.is_acyclic());
        for y in vectors_up_to(net.transition_count(), 6) {
            let feasible = net.fire_vector(&m, &y).unwrap();
            let seq = find_firing_sequence(&net, &m, &y).unwrap();
            prop_assert_eq!(feasible.is_some(), seq.is_some(), "y = {:?}", y);
            if let (Some(target), Some(seq)) = (feasible, seq) {
                let mut cur = m.clone();
                for t in seq {
                    cur = net.fire(&cur, t).unwrap();
                }
                prop_assert_eq!(cur, target);
            }
        }
    }

    #[test]
    fn induced_subnet_keeps_columns((net, _) in net_and_marking(), mask in any::<u8>()) {
        let tx: basisnet::TransitionSet =
            (0..net.transition_count()).filter(|t| mask >> t & 1 == 1).collect();
        let sub = net.induced_subnet(&tx).unwrap();
        prop_assert_eq!(sub.place_count(), net.place_count());
        prop_assert_eq!(sub.transition_count(), tx.len());
        for (j, &t) in tx.iter().enumerate() {
            prop_assert_eq!(sub.incidence_column(j), net.incidence_column(t));
            prop_assert_eq!(sub.pre_column(j), net.pre_column(t));
        }
        prop_assert_eq!(sub.is_acyclic(), net.transition_topological_order(&tx).is_some());
    }
}

#[test]
fn self_loop_is_cyclic() {
    let net = PetriNet::new(
        vec!["p".into()],
        vec!["t".into()],
        vec![vec![1]],
        vec![vec![1]],
    )
    .unwrap();
    assert!(!net.is_acyclic());
}
