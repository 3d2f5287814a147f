use snakesim_core::gait::{sidewinding_kuramoto, SineGaitParams};
use snakesim_core::robot::build_robot;
use snakesim_core::runtime::{run_episode, EpisodeConfig, Gait};
use snakesim_core::{RobotConfig, SimParams};

fn run_pattern(label: &str, deltas: &dyn Fn(f64, usize, usize) -> f64, amps: &dyn Fn(f64, usize, usize) -> f64) {
    let cfg = RobotConfig::default();
    let sine = SineGaitParams::sidewinding(0.5);
    let yaw = cfg.yaw_joints();
    print!("{label:14}");
    for err in [-0.4f64, -0.2, 0.2, 0.4] {
        let sp = SimParams::default();
        let (mut world, robot) = build_robot(&cfg, &sp).unwrap();
        let mut params = sidewinding_kuramoto(&sine, 2.0, 4.0);
        for (rank, &c) in yaw.iter().enumerate() {
            params.delta[c] = deltas(err, rank, yaw.len());
            params.big_r[c] *= amps(err, rank, yaw.len());
        }
        let mut gait = Gait::kuramoto_settled(params);
        match run_episode(&mut world, &robot, &mut gait, 16.0, 0, &EpisodeConfig::default()) {
            Ok(traj) => {
                // Velocity direction over the second half.
                let a = &traj.samples[traj.samples.len() / 2];
                let b = traj.samples.last().unwrap();
                let (dx, dy) = (b.head_pos.x - a.head_pos.x, b.head_pos.y - a.head_pos.y);
                print!(" e{err:+.1}:v_dir={:+.2}", dy.atan2(dx));
            }
            Err(e) => print!(" e{err:+.1}:ERR({e:.30})"),
        }
    }
    println!();
}

fn main() {
    run_pattern("zero", &|_e, _r, _n| 0.0, &|_e, _r, _n| 1.0);
    run_pattern("ramp0.5", &|e, r, n| {
        let w = r as f64 / (n - 1) as f64 - 0.5;
        (e * w).clamp(-0.3, 0.3)
    }, &|_e, _r, _n| 1.0);
    run_pattern("amp-ramp", &|_e, _r, _n| 0.0, &|e, r, n| {
        let w = r as f64 / (n - 1) as f64 - 0.5;
        (1.0 + 0.8 * e * w).clamp(0.3, 1.7)
    });
    run_pattern("amp-uniform", &|_e, _r, _n| 0.0, &|e, _r, _n| (1.0 + 0.5 * e).clamp(0.3, 1.7));
}
