//! Bundled benchmark domains and seeded problem generators.
//!
//! The files under `benchmarks/` at the repository root are produced by
//! [`write_all`]; a test keeps the two in sync.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GRIPPER_DOMAIN: &str = "\
(define (domain gripper-strips)
  (:requirements :strips)
  (:predicates (room ?r) (ball ?b) (gripper ?g) (at-robby ?r)
               (at ?b ?r) (free ?g) (carry ?o ?g))
  (:action move
    :parameters (?from ?to)
    :precondition (and (room ?from) (room ?to) (at-robby ?from))
    :effect (and (at-robby ?to) (not (at-robby ?from))))
  (:action pick
    :parameters (?obj ?room ?gripper)
    :precondition (and (ball ?obj) (room ?room) (gripper ?gripper)
                       (at ?obj ?room) (at-robby ?room) (free ?gripper))
    :effect (and (carry ?obj ?gripper) (not (at ?obj ?room)) (not (free ?gripper))))
  (:action drop
    :parameters (?obj ?room ?gripper)
    :precondition (and (ball ?obj) (room ?room) (gripper ?gripper)
                       (carry ?obj ?gripper) (at-robby ?room))
    :effect (and (at ?obj ?room) (free ?gripper) (not (carry ?obj ?gripper)))))
";

pub const LOGISTICS_DOMAIN: &str = "\
(define (domain logistics)
  (:requirements :strips)
  (:predicates (obj ?obj) (truck ?truck) (location ?loc) (airplane ?airplane)
               (city ?city) (airport ?airport) (at ?obj ?loc) (in ?obj1 ?obj2)
               (in-city ?obj ?city))
  (:action load-truck
    :parameters (?obj ?truck ?loc)
    :precondition (and (obj ?obj) (truck ?truck) (location ?loc)
                       (at ?truck ?loc) (at ?obj ?loc))
    :effect (and (not (at ?obj ?loc)) (in ?obj ?truck)))
  (:action load-airplane
    :parameters (?obj ?airplane ?loc)
    :precondition (and (obj ?obj) (airplane ?airplane) (location ?loc)
                       (at ?obj ?loc) (at ?airplane ?loc))
    :effect (and (not (at ?obj ?loc)) (in ?obj ?airplane)))
  (:action unload-truck
    :parameters (?obj ?truck ?loc)
    :precondition (and (obj ?obj) (truck ?truck) (location ?loc)
                       (at ?truck ?loc) (in ?obj ?truck))
    :effect (and (not (in ?obj ?truck)) (at ?obj ?loc)))
  (:action unload-airplane
    :parameters (?obj ?airplane ?loc)
    :precondition (and (obj ?obj) (airplane ?airplane) (location ?loc)
                       (in ?obj ?airplane) (at ?airplane ?loc))
    :effect (and (not (in ?obj ?airplane)) (at ?obj ?loc)))
  (:action drive-truck
    :parameters (?truck ?loc-from ?loc-to ?city)
    :precondition (and (truck ?truck) (location ?loc-from) (location ?loc-to) (city ?city)
                       (at ?truck ?loc-from) (in-city ?loc-from ?city) (in-city ?loc-to ?city))
    :effect (and (not (at ?truck ?loc-from)) (at ?truck ?loc-to)))
  (:action fly-airplane
    :parameters (?airplane ?loc-from ?loc-to)
    :precondition (and (airplane ?airplane) (airport ?loc-from) (airport ?loc-to)
                       (at ?airplane ?loc-from))
    :effect (and (not (at ?airplane ?loc-from)) (at ?airplane ?loc-to))))
";

/// The AIPS-2000 logistics-4-1 instance (STRIPS, untyped).
pub const LOGISTICS_4_1: &str = "\
(define (problem logistics-4-1)
  (:domain logistics)
  (:objects apn1 apt2 pos2 cit2 tru2 obj23 obj22 obj21 apt1 pos1 cit1 tru1 obj13 obj12 obj11)
  (:init (obj obj11) (obj obj12) (obj obj13) (obj obj21) (obj obj22) (obj obj23)
         (truck tru1) (truck tru2) (airplane apn1) (city cit1) (city cit2)
         (location pos1) (location apt1) (location pos2) (location apt2)
         (airport apt1) (airport apt2)
         (in-city pos1 cit1) (in-city apt1 cit1) (in-city pos2 cit2) (in-city apt2 cit2)
         (at apn1 apt2) (at tru1 pos1) (at obj11 pos1) (at obj12 pos1) (at obj13 pos1)
         (at tru2 pos2) (at obj21 pos2) (at obj22 pos2) (at obj23 pos2))
  (:goal (and (at obj11 pos2) (at obj13 apt1) (at obj21 apt2) (at obj12 apt2))))
";

pub const BLOCKS_DOMAIN: &str = "\
(define (domain blocks)
  (:requirements :strips)
  (:predicates (on ?x ?y) (ontable ?x) (clear ?x) (handempty) (holding ?x))
  (:action pick-up
    :parameters (?x)
    :precondition (and (clear ?x) (ontable ?x) (handempty))
    :effect (and (not (ontable ?x)) (not (clear ?x)) (not (handempty)) (holding ?x)))
  (:action put-down
    :parameters (?x)
    :precondition (holding ?x)
    :effect (and (not (holding ?x)) (clear ?x) (handempty) (ontable ?x)))
  (:action stack
    :parameters (?x ?y)
    :precondition (and (holding ?x) (clear ?y))
    :effect (and (not (holding ?x)) (not (clear ?y)) (clear ?x) (handempty) (on ?x ?y)))
  (:action unstack
    :parameters (?x ?y)
    :precondition (and (on ?x ?y) (clear ?x) (handempty))
    :effect (and (holding ?x) (clear ?y) (not (clear ?x)) (not (handempty)) (not (on ?x ?y)))))
";

pub const TWO_SWITCH_DOMAIN: &str = "\
(define (domain two-switch)
  (:requirements :strips)
  (:predicates (ona) (onb))
  (:action flipa :parameters () :precondition (and) :effect (ona))
  (:action flipb :parameters () :precondition (and) :effect (onb)))
";

pub const TWO_SWITCH_PROBLEM: &str = "\
(define (problem two-switch)
  (:domain two-switch)
  (:objects)
  (:init)
  (:goal (and (ona) (onb))))
";

pub const CHAIN_DOMAIN: &str = "\
(define (domain chain)
  (:requirements :strips)
  (:predicates (p1) (p2))
  (:action a1 :parameters () :precondition (and) :effect (p1))
  (:action a2 :parameters () :precondition (p1) :effect (p2)))
";

pub const CHAIN_PROBLEM: &str = "\
(define (problem chain)
  (:domain chain)
  (:objects)
  (:init)
  (:goal (p2)))
";

/// Gripper with `balls` balls starting in `rooma`, all wanted in `roomb`.
pub fn gripper_problem(balls: usize) -> String {
    gripper_problem_with(balls, &["left", "right"])
}

pub fn gripper_problem_with(balls: usize, grippers: &[&str]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "(define (problem gripper-{balls})");
    s.push_str("  (:domain gripper-strips)\n  (:objects rooma roomb");
    for g in grippers {
        let _ = write!(s, " {g}");
    }
    for b in 1..=balls {
        let _ = write!(s, " ball{b}");
    }
    s.push_str(")\n  (:init (room rooma) (room roomb) (at-robby rooma)");
    for g in grippers {
        let _ = write!(s, " (gripper {g}) (free {g})");
    }
    for b in 1..=balls {
        let _ = write!(s, "\n         (ball ball{b}) (at ball{b} rooma)");
    }
    s.push_str(")\n  (:goal (and");
    for b in 1..=balls {
        let _ = write!(s, " (at ball{b} roomb)");
    }
    s.push_str(")))\n");
    s
}

/// Shape of a generated logistics instance. Every city has one truck, one
/// airport and `extra_locations` non-airport locations.
#[derive(Debug, Clone, Copy)]
pub struct LogisticsShape {
    pub cities: usize,
    pub extra_locations: usize,
    pub airplanes: usize,
    pub packages: usize,
    pub goals: usize,
}

pub fn logistics_problem(name: &str, shape: LogisticsShape, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut objects = Vec::new();
    let mut init = Vec::new();
    let mut locations = Vec::new();
    let mut airports = Vec::new();
    for c in 1..=shape.cities {
        let city = format!("cit{c}");
        let apt = format!("apt{c}");
        let truck = format!("tru{c}");
        init.push(format!("(city {city})"));
        init.push(format!("(truck {truck})"));
        init.push(format!("(location {apt})"));
        init.push(format!("(airport {apt})"));
        init.push(format!("(in-city {apt} {city})"));
        let mut city_locs = vec![apt.clone()];
        for l in 1..=shape.extra_locations {
            let pos = if shape.extra_locations == 1 {
                format!("pos{c}")
            } else {
                format!("pos{c}{l}")
            };
            init.push(format!("(location {pos})"));
            init.push(format!("(in-city {pos} {city})"));
            objects.push(pos.clone());
            city_locs.push(pos);
        }
        let start = city_locs[rng.gen_range(0..city_locs.len())].clone();
        init.push(format!("(at {truck} {start})"));
        objects.extend([city, apt.clone(), truck]);
        airports.push(apt);
        locations.extend(city_locs);
    }
    for a in 1..=shape.airplanes {
        let plane = format!("apn{a}");
        init.push(format!("(airplane {plane})"));
        init.push(format!("(at {plane} {})", airports[rng.gen_range(0..airports.len())]));
        objects.push(plane);
    }
    let mut packages = Vec::new();
    for k in 1..=shape.packages {
        let pkg = format!("obj{k}");
        let at = rng.gen_range(0..locations.len());
        init.push(format!("(obj {pkg})"));
        init.push(format!("(at {pkg} {})", locations[at]));
        objects.push(pkg.clone());
        packages.push((pkg, at));
    }
    packages.shuffle(&mut rng);
    let mut goals = Vec::new();
    for (pkg, at) in packages.iter().take(shape.goals) {
        let mut to = rng.gen_range(0..locations.len() - 1);
        if to >= *at {
            to += 1;
        }
        goals.push(format!("(at {pkg} {})", locations[to]));
    }
    let mut s = String::new();
    let _ = writeln!(s, "(define (problem {name})\n  (:domain logistics)");
    let _ = writeln!(s, "  (:objects {})", objects.join(" "));
    let _ = writeln!(s, "  (:init {})", init.join("\n         "));
    let _ = writeln!(s, "  (:goal (and {})))", goals.join(" "));
    s
}

/// Random blocks-world instance: `n` blocks, towers drawn from `seed`.
pub fn blocks_problem(name: &str, n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks: Vec<String> = (1..=n).map(|i| format!("b{i}")).collect();
    let towers = |rng: &mut ChaCha8Rng| -> Vec<Vec<String>> {
        let mut order = blocks.clone();
        order.shuffle(rng);
        let mut towers: Vec<Vec<String>> = Vec::new();
        for b in order {
            if towers.is_empty() || rng.gen_bool(0.35) {
                towers.push(vec![b]);
            } else {
                let t = rng.gen_range(0..towers.len());
                towers[t].push(b);
            }
        }
        towers
    };
    let describe = |towers: &[Vec<String>], init: bool| -> Vec<String> {
        let mut facts = Vec::new();
        for t in towers {
            facts.push(format!("(ontable {})", t[0]));
            for w in t.windows(2) {
                facts.push(format!("(on {} {})", w[1], w[0]));
            }
            if init {
                facts.push(format!("(clear {})", t[t.len() - 1]));
            }
        }
        facts
    };
    let start = towers(&mut rng);
    let mut end = towers(&mut rng);
    if end == start {
        end.reverse();
    }
    let mut init = describe(&start, true);
    init.push("(handempty)".into());
    let goal = describe(&end, false);
    format!(
        "(define (problem {name})\n  (:domain blocks)\n  (:objects {})\n  (:init {})\n  (:goal (and {})))\n",
        blocks.join(" "),
        init.join(" "),
        goal.join(" ")
    )
}

/// One benchmark problem together with its domain text.
#[derive(Debug, Clone)]
pub struct Instance {
    pub family: &'static str,
    pub name: String,
    pub domain: &'static str,
    pub problem: String,
}

impl Instance {
    fn new(family: &'static str, name: impl Into<String>, domain: &'static str, problem: String) -> Self {
        Instance {
            family,
            name: name.into(),
            domain,
            problem,
        }
    }

    /// Domain and problem paths relative to the benchmark root.
    pub fn relative_paths(&self) -> (String, String) {
        (
            format!("{}/domain.pddl", self.family),
            format!("{}/{}.pddl", self.family, self.name),
        )
    }
}

pub fn gripper_suite() -> Vec<Instance> {
    (1..=30)
        .map(|n| Instance::new("gripper", format!("gripper-{n:02}"), GRIPPER_DOMAIN, gripper_problem(n)))
        .collect()
}

/// Shape of the generated family member with `k` goals: `ceil(k / 2)`
/// cities, one plane per six goals (at least one) and `k + k / 2` packages.
pub fn logistics_shape(k: usize) -> LogisticsShape {
    LogisticsShape {
        cities: k.div_ceil(2),
        extra_locations: 1,
        airplanes: (k / 6).max(1),
        packages: k + k / 2,
        goals: k,
    }
}

/// Goal counts of the generated family; two seeds per size.
pub const LOGISTICS_SIZES: std::ops::RangeInclusive<usize> = 4..=15;

/// logistics-4-1 followed by `logistics-gen-<k>-<i>` for every size and seed.
pub fn logistics_suite() -> Vec<Instance> {
    let mut v = vec![Instance::new(
        "logistics",
        "logistics-4-1",
        LOGISTICS_DOMAIN,
        LOGISTICS_4_1.to_string(),
    )];
    for k in LOGISTICS_SIZES {
        for i in 0..2u64 {
            let name = format!("logistics-gen-{k:02}-{i}");
            let problem = logistics_problem(&name, logistics_shape(k), 1000 + 10 * k as u64 + i);
            v.push(Instance::new("logistics", name, LOGISTICS_DOMAIN, problem));
        }
    }
    v
}

/// Blocks-world instances with 4 to 9 blocks, two seeds per size.
pub fn blocks_suite() -> Vec<Instance> {
    (4..=9usize)
        .flat_map(|n| (0..2u64).map(move |i| (n, i)))
        .map(|(n, i)| {
            let problem = blocks_problem(&format!("blocks-{n}-{i}"), n, 100 + 10 * n as u64 + i);
            Instance::new("blocks", format!("blocks-{n}-{i}"), BLOCKS_DOMAIN, problem)
        })
        .collect()
}

/// Tasks small enough for exhaustive optimal search (at most 12 propositions).
pub fn micro_suite() -> Vec<Instance> {
    vec![
        Instance::new(
            "two-switch",
            "two-switch",
            TWO_SWITCH_DOMAIN,
            TWO_SWITCH_PROBLEM.to_string(),
        ),
        Instance::new("chain", "chain", CHAIN_DOMAIN, CHAIN_PROBLEM.to_string()),
        Instance::new(
            "micro-gripper",
            "micro-gripper-1",
            GRIPPER_DOMAIN,
            gripper_problem_with(1, &["left"]),
        ),
        Instance::new(
            "micro-logistics",
            "micro-logistics-1",
            LOGISTICS_DOMAIN,
            "(define (problem micro-logistics-1) (:domain logistics)
  (:objects obj1 tru1 pos1 pos2 cit1)
  (:init (obj obj1) (truck tru1) (location pos1) (location pos2) (city cit1)
         (in-city pos1 cit1) (in-city pos2 cit1) (at tru1 pos1) (at obj1 pos1))
  (:goal (at obj1 pos2)))
"
            .to_string(),
        ),
        Instance::new(
            "micro-logistics",
            "micro-logistics-2",
            LOGISTICS_DOMAIN,
            "(define (problem micro-logistics-2) (:domain logistics)
  (:objects obj1 tru1 pos1 pos2 cit1)
  (:init (obj obj1) (truck tru1) (location pos1) (location pos2) (city cit1)
         (in-city pos1 cit1) (in-city pos2 cit1) (at tru1 pos2) (at obj1 pos1))
  (:goal (and (at obj1 pos2) (at tru1 pos1))))
"
            .to_string(),
        ),
    ]
}

pub fn all_suites() -> Vec<Instance> {
    let mut v = micro_suite();
    v.extend(gripper_suite());
    v.extend(logistics_suite());
    v.extend(blocks_suite());
    v
}

/// Manifest lines for every instance of `instances` under each flag set.
pub fn manifest(instances: &[Instance], configs: &[&str]) -> String {
    let mut s = String::new();
    for cfg in configs {
        for i in instances {
            let (d, p) = i.relative_paths();
            let _ = writeln!(s, "../{d} ../{p}{}{cfg}", if cfg.is_empty() { "" } else { " " });
        }
    }
    s
}

/// Writes every bundled instance and the ablation manifests below `root`.
pub fn write_all(root: &Path) -> io::Result<()> {
    for i in all_suites() {
        let (d, p) = i.relative_paths();
        std::fs::create_dir_all(root.join(i.family))?;
        std::fs::write(root.join(d), i.domain)?;
        std::fs::write(root.join(p), &i.problem)?;
    }
    let manifests = root.join("manifests");
    std::fs::create_dir_all(&manifests)?;
    let logistics = logistics_suite();
    let files: [(&str, Vec<Instance>, &[&str]); 6] = [
        ("default.txt", all_suites(), &[""]),
        (
            "pushup-ablation.txt",
            logistics.clone(),
            &["--pushup on", "--pushup off", "--pushup aggressive"],
        ),
        (
            "graph-ablation.txt",
            logistics.clone(),
            &["--graph parallel", "--graph serial"],
        ),
        (
            "postprocess.txt",
            logistics,
            &["", "--graph serial --fatten off --pushup off"],
        ),
        (
            "serial-overhead.txt",
            blocks_suite(),
            &["", "--fatten off --pushup off"],
        ),
        ("gripper-scaling.txt", gripper_suite(), &[""]),
    ];
    for (name, instances, configs) in files {
        let header = "# domain problem [flags]  (paths relative to this file)\n";
        std::fs::write(
            manifests.join(name),
            header.to_string() + &manifest(&instances, configs),
        )?;
    }
    Ok(())
}
