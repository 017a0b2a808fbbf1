// Temporary dev fuzz: cross-check planners, validator and oracles on
// adversarial randomized instances. Not shipped.
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use toaa_sipp::harness::validate_plan;
use toaa_sipp::heuristics::{Heuristic, HeuristicKind};
use toaa_sipp::intervals::build_safe_intervals;
use toaa_sipp::planners::*;
use toaa_sipp::world::*;

fn main() {
    let trials: u64 = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(2000);
    let seed0: u64 = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(99);
    let mut solved = 0u64;
    let mut nopath = 0u64;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed0 * 7_777_777 + trial);
        let w = rng.gen_range(6..15);
        let h = rng.gen_range(6..15);
        let p = rng.gen_range(0.0..0.30);
        let mut blocked = HashSet::new();
        for y in 0..h {
            for x in 0..w {
                if rng.gen_bool(p) {
                    blocked.insert((x, y));
                }
            }
        }
        let map = GridMap::new(w, h, &blocked);
        let free: Vec<Vertex> = map.free_vertices().collect();
        if free.len() < 6 { continue; }
        let agent_radius = [0.3, 0.4, 0.5][rng.gen_range(0..3)];
        let agent_speed = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
        // Obstacles by prioritized greedy planning, mixed speeds/radii,
        // some with delayed starts injected via a leading wait.
        let n_obs = rng.gen_range(0..10);
        let mut obstacles: Vec<MotionPlan> = Vec::new();
        let mut tries = 0;
        while obstacles.len() < n_obs && tries < 40 {
            tries += 1;
            let a = free[rng.gen_range(0..free.len())];
            let b = free[rng.gen_range(0..free.len())];
            if a == b { continue; }
            let r = [0.3, 0.4, 0.5][rng.gen_range(0..3)];
            let s = [0.2, 0.5, 1.0, 2.0][rng.gen_range(0..4)];
            let Ok(inst) = ProblemInstance::new(map.clone(), a, b, r, s, obstacles.clone()) else { continue };
            let table = build_safe_intervals(&inst);
            let hf = Heuristic::euclid(b, s);
            let res = plan_aa_sipp(&inst, &table, &hf);
            if res.outcome == Outcome::Solved {
                let mut plan = res.plan.unwrap();
                // Occasionally delay the whole plan by a random offset.
                if rng.gen_bool(0.25) && !plan.actions.is_empty() {
                    let delay = rng.gen_range(0.5..3.0);
                    for act in &mut plan.actions { act.start += delay; }
                    plan = MotionPlan::new(plan.start, plan.radius, plan.speed, plan.actions).unwrap();
                }
                obstacles.push(plan);
            }
        }
        let st = free[rng.gen_range(0..free.len())];
        let gl = free[rng.gen_range(0..free.len())];
        if st == gl { continue; }
        let Ok(inst) = ProblemInstance::new(map.clone(), st, gl, agent_radius, agent_speed, obstacles.clone()) else { continue };
        let table = build_safe_intervals(&inst);
        for kind in [HeuristicKind::Euclid, HeuristicKind::Perfect] {
            let hf = Heuristic::build(kind, &inst.map, inst.goal, inst.agent_radius, inst.speed);
            let nto = plan_nto(&inst, &table, &hf);
            let ito = plan_ito(&inst, &table, &hf);
            let greedy = plan_aa_sipp(&inst, &table, &hf);
            let sipp = plan_sipp(&inst, &table, &hf);
            assert_eq!(nto.outcome, ito.outcome, "trial {trial} {kind}: outcome mismatch");
            assert_eq!(ito.stats.iterations, ito.stats.vt_calls, "trial {trial}");
            if nto.outcome == Outcome::Solved {
                solved += 1;
                assert!((nto.cost - ito.cost).abs() < 1e-9,
                    "trial {trial} {kind}: nto {} vs ito {}", nto.cost, ito.cost);
                // Greedy may legitimately fail on any-angle-only instances,
                // but must solve whatever edge-restricted SIPP solves.
                if greedy.outcome == Outcome::Solved {
                    assert!(greedy.cost >= nto.cost - 1e-9,
                        "trial {trial} {kind}: greedy {} < optimal {}", greedy.cost, nto.cost);
                } else {
                    println!("trial {trial} {kind}: greedy no_path, sipp {:?} (nto cost {:.4})",
                        sipp.outcome, nto.cost);
                    assert!(sipp.outcome == Outcome::NoPath,
                        "trial {trial} {kind}: greedy failed where plain sipp solved");
                }
                if sipp.outcome == Outcome::Solved {
                    assert!(sipp.cost >= nto.cost - 1e-9, "trial {trial}: sipp beat optimal");
                }
                for (name, r) in [("nto", &nto), ("ito", &ito), ("aasipp", &greedy), ("sipp", &sipp)] {
                    if let Some(plan) = &r.plan {
                        let rep = validate_plan(plan, &inst);
                        assert!(rep.is_ok(), "trial {trial} {kind} {name}: {:?}", rep.violations);
                    }
                }
            } else {
                nopath += 1;
            }
        }
        if trial % 200 == 199 {
            println!("trial {trial}: {solved} solved, {nopath} no_path runs so far");
        }
    }
    println!("fuzz complete: {solved} solved runs, {nopath} no_path runs — all checks passed");
}
