//! Acceptance criteria for the simulation engine.
//!
//! Each test prints one `[PASS]`/`[FAIL]` line. Run with
//! `cargo test -p coopbandit-core --test acceptance -- --nocapture` to see them.
//! All runs use 2000 rounds and 500 replicates unless a criterion says
//! otherwise.

use coopbandit::policy::{EpsilonGreedyState, GreedyStart, ThompsonState};
use coopbandit::*;

const SEED: u64 = 1;
const EPSILON: f64 = 1.0 / 128.0;
const C: f64 = 4.0;

fn report(id: &str, name: &str, pass: bool, detail: String) -> bool {
    println!("[{}] {id} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn game(b: f64) -> GameParams {
    GameParams::new(b).unwrap()
}

fn experimental() -> OpponentStrategy {
    OpponentStrategy::new(0.81, 0.36).unwrap()
}

fn eps_greedy() -> PolicySpec {
    PolicySpec::epsilon_greedy(EPSILON).unwrap()
}

fn ucb1() -> PolicySpec {
    PolicySpec::ucb1(C).unwrap()
}

fn thompson() -> PolicySpec {
    PolicySpec::thompson(0.5).unwrap()
}

fn config(policy: PolicySpec, strategy: OpponentStrategy, b: f64) -> SimConfig {
    SimConfig::new(policy, strategy, game(b)).with_seed(SEED)
}

fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
        .collect()
}

#[test]
fn ac1_headline_reproduction() {
    let mut ok = true;
    for (policy, target, tol) in [(eps_greedy(), 0.95, 0.05), (ucb1(), 0.93, 0.05), (thompson(), 0.60, 0.08)] {
        let run = run_batch(&config(policy, experimental(), 2.0)).unwrap();
        let pass = (run.cooperation_index - target).abs() <= tol;
        ok &= report(
            "AC1",
            &format!("headline {}", policy.name()),
            pass,
            format!("I = {:.4} (target {target} ± {tol}, stderr {:.4})", run.cooperation_index, run.stderr_i),
        );
    }
    assert!(ok);
}

#[test]
fn ac2_low_benefit_collapse() {
    let mut ok = true;
    for policy in [eps_greedy(), ucb1(), thompson()] {
        for b in [0.25, 0.5, 0.75] {
            let run = run_batch(&config(policy, experimental(), b)).unwrap();
            ok &= report(
                "AC2",
                &format!("low benefit {} b={b}", policy.name()),
                run.cooperation_index < 0.10,
                format!("I = {:.4} (need < 0.10)", run.cooperation_index),
            );
        }
    }
    assert!(ok);
}

#[test]
fn ac3_epsilon_greedy_threshold() {
    let q = 0.36;
    let b = 2.0;
    let p_grid = linspace(0.50, 0.70, 21);
    let sweep = sweep_pq(&config(eps_greedy(), experimental(), b), &p_grid, &[q]).unwrap();
    let index = sweep.indices();

    // Linear interpolation at the first grid step where I reaches 0.5.
    let k = index.iter().position(|&i| i >= 0.5);
    let crossing = match k {
        Some(0) | None => f64::NAN,
        Some(k) => {
            let (p0, p1, i0, i1) = (p_grid[k - 1], p_grid[k], index[k - 1], index[k]);
            p0 + (0.5 - i0) * (p1 - p0) / (i1 - i0)
        }
    };

    // Root of ((1 - ε/2) p + (ε/2) q)(b + 3) = 3.
    let analytic = (3.0 / (b + 3.0) - EPSILON / 2.0 * q) / (1.0 - EPSILON / 2.0);
    let margin = dominance_threshold(analytic, q, &game(b), EPSILON).margin;
    assert!(margin.abs() < 1e-12);

    let pass = (0.55..=0.65).contains(&crossing) && (0.55..=0.65).contains(&analytic);
    assert!(report(
        "AC3",
        "epsilon-greedy threshold",
        pass,
        format!("empirical crossing p = {crossing:.4}, analytic root p = {analytic:.4} (need both in [0.55, 0.65])"),
    ));
}

#[test]
fn ac4_epsilon_greedy_q_insensitivity() {
    let q_grid = [0.0, 0.25, 0.5, 0.75, 1.0];
    let sweep = sweep_pq(&config(eps_greedy(), experimental(), 2.0), &[0.81], &q_grid).unwrap();
    let index = sweep.indices();
    let max = index.iter().cloned().fold(f64::MIN, f64::max);
    let min = index.iter().cloned().fold(f64::MAX, f64::min);
    assert!(report(
        "AC4",
        "epsilon-greedy q-insensitivity",
        max - min <= 0.1,
        format!("I over q = {index:.4?}, spread {:.4} (need <= 0.1)", max - min),
    ));
}

#[test]
fn ac5_ucb1_low_q_vulnerability() {
    // The margin was calibrated on the full 21x21 map; the gap observed there
    // at p = 1 is about 0.98, far above the 0.15 bound.
    let grid = linspace(0.0, 1.0, 21);
    let sweep = sweep_pq(&config(ucb1(), experimental(), 2.0), &grid, &grid).unwrap();
    let at = |p: usize, q: usize| sweep.cells[p * 21 + q].cooperation_index;
    let (low, mid) = (at(20, 0), at(20, 10));
    assert_eq!(sweep.cells[20 * 21 + 10].point, vec![1.0, 0.5]);
    assert!(report(
        "AC5",
        "UCB1 q->0 vulnerability",
        mid - low >= 0.15,
        format!("I(p=1,q=0) = {low:.4}, I(p=1,q=0.5) = {mid:.4}, gap {:.4} (need >= 0.15)", mid - low),
    ));
}

#[test]
fn ac6_thompson_pq_symmetry() {
    let grid = linspace(0.0, 1.0, 21);
    let sweep = sweep_pq(&config(thompson(), experimental(), 2.0), &grid, &grid).unwrap();
    let index = sweep.indices();
    let mut total = 0.0;
    let mut worst: f64 = 0.0;
    for i in 0..21 {
        for j in 0..21 {
            let d = (index[i * 21 + j] - index[j * 21 + i]).abs();
            total += d;
            worst = worst.max(d);
        }
    }
    let mean = total / 441.0;
    assert!(report(
        "AC6",
        "Thompson p<->q symmetry",
        mean <= 0.1,
        format!("mean |I(p,q) - I(q,p)| = {mean:.4} (max {worst:.4}, need mean <= 0.1)"),
    ));
}

#[test]
fn ac7_thompson_needs_more_benefit() {
    let b_grid = linspace(0.0, 8.0, 33);
    let first_high = |policy: PolicySpec| {
        let sweep = sweep_b(&config(policy, experimental(), 2.0), &b_grid).unwrap();
        sweep
            .cells
            .iter()
            .find(|c| c.cooperation_index >= 0.9)
            .map(|c| c.point[0])
            .unwrap_or(f64::INFINITY)
    };
    let (eg, ucb, ts) = (first_high(eps_greedy()), first_high(ucb1()), first_high(thompson()));
    assert!(report(
        "AC7",
        "Thompson benefit demand",
        ts > eg && ts > ucb,
        format!("smallest b with I >= 0.9: epsilon-greedy {eg}, UCB1 {ucb}, Thompson {ts}"),
    ));
}

#[test]
fn ac8_property_suite() {
    let mut ok = true;

    // Payoff symmetry and defection floor, all action pairs over sampled b.
    let mut table_ok = true;
    for b in linspace(0.0, 10.0, 41) {
        let g = game(b);
        for x in Action::ALL {
            for y in Action::ALL {
                table_ok &= g.payoff(x, y).robot_payoff == g.payoff(y, x).opponent_payoff;
            }
            table_ok &= g.payoff(Action::Defect, x).robot_payoff == 3.0;
        }
    }
    ok &= report("AC8", "payoff symmetry and defection floor", table_ok, "4 action pairs x 41 values of b".into());

    // Bernoulli frequencies within three standard errors.
    let n = 100_000u32;
    let three_se = |p: f64| 3.0 * (p * (1.0 - p) / n as f64).sqrt();
    let s = experimental();
    for (last, p) in [(Action::Cooperate, 0.81), (Action::Defect, 0.36)] {
        let mut rng = RngStream::from_seed(SEED);
        let hits = (0..n).filter(|_| s.act(ReputationState::new(last), &mut rng).is_cooperate()).count();
        let freq = hits as f64 / n as f64;
        ok &= report(
            "AC8",
            &format!("opponent frequency after {last}"),
            (freq - p).abs() < three_se(p),
            format!("{freq:.4} vs {p} (3 SE = {:.4})", three_se(p)),
        );
    }
    {
        let mut rng = RngStream::from_seed(SEED);
        let mut ts = ThompsonState::with_prior(0.5);
        for _ in 0..n {
            ts.record(Action::Defect, 3.0 / 5.0, &mut rng);
        }
        let freq = (ts.alpha[1] - 0.5) / n as f64;
        ok &= report(
            "AC8",
            "Thompson update frequency for reward 3 at b=2",
            (freq - 0.6).abs() < three_se(0.6),
            format!("{freq:.4} vs 0.6 (3 SE = {:.4})", three_se(0.6)),
        );
    }

    // Incremental mean vs batch mean.
    {
        let g = game(2.0);
        let mut rng = RngStream::from_seed(SEED);
        let mut state = EpsilonGreedyState::new(GreedyStart::Cooperative, g.max_payoff());
        let mut rewards: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for _ in 0..10_000 {
            let a = if rng.bernoulli(0.5) { Action::Cooperate } else { Action::Defect };
            let r = [0.0, 3.0, 5.0][(rng.uniform() * 3.0) as usize];
            state.record(a, r);
            rewards[a.index()].push(r);
        }
        let worst = (0..2)
            .map(|i| {
                let batch = rewards[i].iter().sum::<f64>() / rewards[i].len() as f64;
                ((state.q_value[i] - batch) / batch).abs()
            })
            .fold(0.0, f64::max);
        ok &= report("AC8", "incremental mean vs batch mean", worst < 1e-9, format!("max relative error {worst:.2e}"));
    }

    // Bit-exact determinism, sequential vs parallel.
    {
        let cfg = config(thompson(), experimental(), 2.0).with_replicates(64).with_rounds(500);
        let run_in = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| (run_batch(&cfg).unwrap(), sweep_pq(&cfg, &[0.2, 0.9], &[0.1, 0.7]).unwrap()))
        };
        let (a, b, c) = (run_in(1), run_in(4), run_in(1));
        let same = a == b && a == c;
        ok &= report("AC8", "seed determinism under parallel execution", same, "1 vs 4 worker threads".into());
    }

    // ε-greedy exploration floor against Never Trust.
    {
        let cfg = config(eps_greedy(), OpponentStrategy::NT, 2.0);
        let course = time_course(&cfg).unwrap();
        let last = course.last().unwrap().mean_i;
        ok &= report(
            "AC8",
            "epsilon-greedy floor against NT",
            last <= EPSILON,
            format!("final-window mean_I = {last:.5} (need <= {EPSILON:.5})"),
        );
    }

    assert!(ok);
}
