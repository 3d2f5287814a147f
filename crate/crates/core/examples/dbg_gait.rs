use snakesim_core::gait::SineGaitParams;
use snakesim_core::robot::build_robot;
use snakesim_core::runtime::{run_episode, EpisodeConfig, Gait};
use snakesim_core::{RobotConfig, SimParams};

fn main() {
    for tol in [1e-8, 1e-7, 1e-6, 1e-5, 1e-4] {
        let cfg = RobotConfig::default();
        let sp = SimParams::default();
        let (mut world, robot) = build_robot(&cfg, &sp).unwrap();
        world.solver.tolerance = tol;
        let mut gait = Gait::sine(SineGaitParams::sidewinding(0.5));
        let t0 = std::time::Instant::now();
        let traj = run_episode(&mut world, &robot, &mut gait, 10.0, 0, &EpisodeConfig::default()).unwrap();
        let wall = t0.elapsed().as_secs_f64();
        let last = traj.samples.last().unwrap();
        println!(
            "tol={tol:.0e}: head=({:+.6}, {:+.6}) wall={wall:.2}s ({:.0}x realtime)",
            last.head_pos.x, last.head_pos.y, 10.0 / wall
        );
    }
}
