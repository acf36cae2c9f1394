//! Built-in sample plants.

use crate::net::{FinalSpec, Gmec, Marking, PetriNet, Plant};

/// Six places, seven transitions. Place `p3` feeds three competing transitions
/// (`t3`, `t4`, `t6`); `t6` leads into a dead end (`p5 -> t7 -> p6`) from which no
/// final marking is reachable. Final set: `p4 + p5 + p6 <= 0`.
///
/// ```text
/// t1: p1 -> p2        t5: p4 -> p1
/// t2: p2 -> p3        t6: 2 p3 -> p5
/// t3: p3 -> p4        t7: p5 -> p6
/// t4: 2 p3 -> p1
/// ```
pub fn demo_plant() -> Plant {
    let places: Vec<String> = (1..=6).map(|i| format!("p{i}")).collect();
    let transitions: Vec<String> = (1..=7).map(|i| format!("t{i}")).collect();
    // (input place, weight) -> (output place, weight), 1-based
    let arcs: [((usize, i64), (usize, i64)); 7] = [
        ((1, 1), (2, 1)),
        ((2, 1), (3, 1)),
        ((3, 1), (4, 1)),
        ((3, 2), (1, 1)),
        ((4, 1), (1, 1)),
        ((3, 2), (5, 1)),
        ((5, 1), (6, 1)),
    ];
    let mut pre = vec![vec![0; 7]; 6];
    let mut post = vec![vec![0; 7]; 6];
    for (t, ((pi, wi), (po, wo))) in arcs.into_iter().enumerate() {
        pre[pi - 1][t] = wi;
        post[po - 1][t] = wo;
    }
    let net = PetriNet::new(places, transitions, pre, post).expect("valid sample net");
    let initial = Marking::new(vec![1, 1, 0, 0, 0, 0]).unwrap();
    let spec = FinalSpec::single(Gmec::new(vec![0, 0, 0, 1, 1, 1], 0));
    Plant::new(net, initial, spec).unwrap()
}
