//! Scratch probe for scenario calibration (not shipped).

use crowdsense_core::metrics::{sweep, SweepParam};
use crowdsense_core::sim::{grid_zones, run_simulation, SimConfig, SpawnModel};

fn seeds() -> Vec<u64> {
    (1..=10).collect()
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "all".into());

    if which == "all" || which == "c3" {
        // Fig 3: reward vs min_persons at fixed density
        let t = SimConfig::default();
        let out = sweep(&t, SweepParam::MinPersons, &[3, 5, 7, 9], &seeds()).unwrap();
        println!("C3 min_persons -> mean reward milli/agent, ratio:");
        for r in &out.rows {
            println!(
                "  m={:>2} reward={:>12.1} p90={:>12.1} ratio={:.3}",
                r.value, r.mean_reward_milli, r.mean_p90_reward_milli, r.mean_ratio
            );
        }
    }

    if which == "all" || which == "c4" {
        // Fig 4: p90 reward vs density at min 7
        let t = SimConfig::default();
        let out = sweep(&t, SweepParam::NumAgents, &[25, 50, 100, 200], &seeds()).unwrap();
        println!("C4 num_agents -> p90 reward milli:");
        for r in &out.rows {
            println!(
                "  n={:>3} p90={:>14.1} mean={:>12.1} ratio={:.3}",
                r.value, r.mean_p90_reward_milli, r.mean_reward_milli, r.mean_ratio
            );
        }
    }

    if which == "all" || which == "c5" {
        // Fig 5: satisfied ratio vs freshness at low/high density
        for agents in [25usize, 200] {
            let t = SimConfig {
                num_agents: agents,
                spawn: SpawnModel::Uniform,
                sensing_probability: 0.05,
                zones: grid_zones(3, 3, 1000.0, 1000.0, 250.0, 7, 3600),
                ..SimConfig::default()
            };
            let out = sweep(&t, SweepParam::FreshnessWindow, &[600, 3600, 7200, 14400], &seeds())
                .unwrap();
            println!("C5 agents={agents} freshness -> ratio:");
            for r in &out.rows {
                println!("  w={:>6} ratio={:.4} [{:.4},{:.4}]", r.value, r.mean_ratio, r.min_ratio, r.max_ratio);
            }
        }
    }

    if which == "all" || which == "c6" {
        // Fig 6: ratio vs density for each min_persons
        println!("C6 ratio grid (rows=min_persons, cols=density):");
        print!("        ");
        for n in [25, 50, 100, 200] {
            print!("n={:>4}  ", n);
        }
        println!();
        for m in [3u64, 5, 7, 9] {
            print!("  m={m}   ");
            for n in [25u64, 50, 100, 200] {
                let mut t = SimConfig::default();
                t.num_agents = n as usize;
                let out = sweep(&t, SweepParam::MinPersons, &[m], &seeds()).unwrap();
                print!("{:.3}  ", out.rows[0].mean_ratio);
            }
            println!();
        }
    }

    if which == "all" || which == "c7" {
        // Fig 7: center vs peripheral payments and ratios per seed
        println!("C7 center vs peripheral (default layout):");
        let mut wins = 0;
        for seed in seeds() {
            let cfg = SimConfig {
                rng_seed: seed,
                ..SimConfig::default()
            };
            let result = run_simulation(&cfg).unwrap();
            let center: Vec<_> = result
                .zones
                .iter()
                .filter(|z| (z.spec.grid_row, z.spec.grid_col) == (Some(1), Some(1)))
                .collect();
            let periph: Vec<_> = result
                .zones
                .iter()
                .filter(|z| (z.spec.grid_row, z.spec.grid_col) != (Some(1), Some(1)))
                .collect();
            let c = center[0];
            let c_ratio = c.satisfied_rounds as f64 / c.decision_rounds as f64;
            let p_pay: f64 =
                periph.iter().map(|z| z.payments_count as f64).sum::<f64>() / periph.len() as f64;
            let p_ratio: f64 = periph
                .iter()
                .map(|z| z.satisfied_rounds as f64 / z.decision_rounds as f64)
                .sum::<f64>()
                / periph.len() as f64;
            let win = (c.payments_count as f64) > p_pay && c_ratio > p_ratio;
            wins += win as u32;
            println!(
                "  seed={:>2} center pay={:>5} ratio={:.3} | periph pay={:>7.1} ratio={:.3} {}",
                seed,
                c.payments_count,
                c_ratio,
                p_pay,
                p_ratio,
                if win { "WIN" } else { "lose" }
            );
        }
        println!("  wins: {wins}/10");
    }
}
