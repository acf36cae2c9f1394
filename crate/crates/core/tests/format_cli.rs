//! Net file round trips and the command-line interface.

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use basisnet::brg::BrgDump;
use basisnet::format::{parse_net, to_text};
use basisnet::oracle::{random_plant, RandomPlantParams};
use basisnet::report::{Report, VerdictKind};
use basisnet::{Combinator, FinalSpec, Gmec, Marking, PetriNet, Plant};
use proptest::prelude::*;

const DEMO: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/nets/demo.pnet");

fn arb_plant() -> impl Strategy<Value = Plant> {
    (1usize..=6, 1usize..=6, 1usize..=3).prop_flat_map(|(m, n, g)| {
        let arcs = prop::collection::vec(
            prop::collection::vec(prop_oneof![2 => Just(0i64), 1 => 1i64..=5], n),
            m,
        );
        (
            arcs.clone(),
            arcs,
            prop::collection::vec(0i64..=9, m),
            prop::collection::vec((prop::collection::vec(-3i64..=3, m), -5i64..=5), g),
            prop_oneof![Just(Combinator::And), Just(Combinator::Or)],
            "[a-z][a-z0-9_]{0,5}",
        )
            .prop_map(move |(pre, post, tokens, gmecs, comb, prefix)| {
                let places = (0..m).map(|i| format!("{prefix}_p{i}")).collect();
                let transitions = (0..n).map(|i| format!("{prefix}_t{i}")).collect();
                let gmecs: Vec<Gmec> = gmecs.into_iter().map(|(w, k)| Gmec::new(w, k)).collect();
                let comb = if gmecs.len() == 1 {
                    Combinator::Single
                } else {
                    comb
                };
                Plant::new(
                    PetriNet::new(places, transitions, pre, post).unwrap(),
                    Marking::new(tokens).unwrap(),
                    FinalSpec::new(comb, gmecs).unwrap(),
                )
                .unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parse_serialize_parse_is_identity(plant in arb_plant(), hint in any::<bool>()) {
        let forced: Vec<String> = if hint { vec![plant.net.transition_name(0).to_string()] } else { Vec::new() };
        let text = to_text(&plant, &forced);
        let parsed = parse_net(&text).unwrap();
        prop_assert_eq!(&parsed.plant, &plant);
        prop_assert_eq!(&parsed.forced_explicit, &forced);
        prop_assert_eq!(to_text(&parsed.plant, &parsed.forced_explicit), text);
    }
}

#[test]
fn corpus_round_trips_through_text() {
    let params = RandomPlantParams::default();
    for seed in 0..50 {
        if let Some(plant) = random_plant(seed, &params) {
            assert_eq!(
                parse_net(&to_text(&plant, &[])).unwrap().plant,
                plant,
                "seed {seed}"
            );
        }
    }
}

fn basisnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_basisnet"))
        .args(args)
        .env_remove("BASISNET_CAPS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_demo_is_blocking() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = basisnet(&["verify", DEMO, "--report", path(&report)]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("blocking: Mb3 = [0 0 0 0 1 0]"));
    let r = Report::from_json(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r.verdict, VerdictKind::Blocking);
    assert_eq!(r.witness.unwrap().marking.tokens(), [0, 0, 0, 0, 1, 0]);
    assert_eq!((r.brg.states, r.brg.edges, r.brg.final_basis), (6, 11, 5));
}

#[test]
fn verify_reports_are_deterministic() {
    let a = basisnet(&["verify", DEMO, "--report", "-"]);
    let b = basisnet(&["verify", DEMO, "--report", "-"]);
    let ra = Report::from_json(&stdout(&a)).unwrap().without_timings();
    let rb = Report::from_json(&stdout(&b)).unwrap().without_timings();
    assert_eq!(ra.to_json(), rb.to_json());
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = dir.path().join("ok.pnet");
    fs::write(
        &ok,
        fs::read_to_string(DEMO)
            .unwrap()
            .replace("gmec 0 :", "gmec 9 :"),
    )
    .unwrap();
    assert_eq!(basisnet(&["verify", path(&ok)]).status.code(), Some(0));

    let bad = dir.path().join("bad.pnet");
    fs::write(&bad, "place a\ntrans t\narc t -> nowhere\ngmec 0 : a\n").unwrap();
    let out = basisnet(&["verify", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("nowhere"), "{err}");

    assert_eq!(
        basisnet(&["verify", "/nonexistent.pnet"]).status.code(),
        Some(2)
    );
    assert_eq!(basisnet(&["verify"]).status.code(), Some(2));
}

#[test]
fn verify_with_partition_file_and_hints() {
    let dir = tempfile::tempdir().unwrap();
    let part = dir.path().join("part.txt");
    fs::write(&part, "explicit t3,t4,t6\nexplicit t7\n").unwrap();
    let out = basisnet(&["verify", DEMO, "--partition", path(&part), "--report", "-"]);
    assert_eq!(out.status.code(), Some(1));
    let r = Report::from_json(&stdout(&out)).unwrap();
    assert_eq!(r.partition.explicit, ["t3", "t4", "t6", "t7"]);

    // t1 implicit but t3 explicit missing: not a CI-partition
    fs::write(&part, "explicit t4,t6\n").unwrap();
    assert_eq!(
        basisnet(&["verify", DEMO, "--partition", path(&part)])
            .status
            .code(),
        Some(2)
    );

    let out = basisnet(&["verify", DEMO, "--explicit", "t1,t2", "--report", "-"]);
    let r = Report::from_json(&stdout(&out)).unwrap();
    assert_eq!(r.partition.explicit, ["t1", "t2", "t3", "t4", "t6"]);
    assert_eq!(r.verdict, VerdictKind::Blocking);
    assert_eq!(
        basisnet(&["verify", DEMO, "--explicit", "zz"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn caps_from_flag_and_environment() {
    let out = basisnet(&["verify", DEMO, "--caps", "brg=3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds 3 states"));
    let out = Command::new(env!("CARGO_BIN_EXE_basisnet"))
        .args(["verify", DEMO])
        .env("BASISNET_CAPS", "brg=4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_basisnet"))
        .args(["verify", DEMO])
        .env("BASISNET_CAPS", "bogus")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn brg_exports() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("g.dot");
    let json = dir.path().join("g.json");
    let out = basisnet(&["brg", DEMO, "--dot", path(&dot), "--json", path(&json)]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let dot = fs::read_to_string(&dot).unwrap();
    assert_eq!(common::check_dot(&dot).unwrap(), (6, 11));
    assert_eq!(dot.matches("color=red").count(), 5);
    assert_eq!(dot.matches("peripheries=2").count(), 1);

    let plant = parse_net(&fs::read_to_string(DEMO).unwrap()).unwrap().plant;
    let dump: BrgDump = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let brg = dump.into_brg(&plant).unwrap();
    let expected = basisnet::check_nonblocking(&plant, None, &Default::default())
        .unwrap()
        .brg;
    assert_eq!(brg, expected);
}

#[test]
fn rg_command() {
    let out = basisnet(&["rg", DEMO]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("reachable markings: 16"));
    assert_eq!(
        basisnet(&["rg", DEMO, "--caps", "rg=5"]).status.code(),
        Some(2)
    );
}

#[test]
fn bench_rows() {
    let out = basisnet(&[
        "bench", DEMO, "--scale", "p1=1,2", "--scale", "p2=0,1", "--k", "0,9", "--oracle", "on",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = stdout(&out);
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    assert!(rows[0].starts_with("1\tp1=1,p2=0\t0\t"));
    for row in &rows {
        let cols: Vec<&str> = row.split('\t').collect();
        assert_eq!(cols[6], cols[7], "verdict vs oracle in {row}");
    }

    let out = basisnet(&["bench", DEMO, "--scale", "ghost=1", "--scale", "p1=1,2"]);
    assert_eq!(out.status.code(), Some(0));
    let table = stdout(&out);
    assert_eq!(
        table
            .lines()
            .filter(|l| l.contains("error: unknown place 'ghost'"))
            .count(),
        2
    );
}
