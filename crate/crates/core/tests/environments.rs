use oaktd::envs::{puddle_penalty, EnvId, EnvSpec};
use oaktd::seeding::{stream, Stream};
use rand::Rng;

#[test]
fn mountain_car_stays_in_bounds_for_a_million_steps() {
    let spec = EnvSpec::new(EnvId::MountainCar);
    let mut rng = stream(42, Stream::Env, 0);
    let mut s = spec.reset(&mut rng);
    let mut episodes = 0;
    for _ in 0..1_000_000 {
        let a = rng.random_range(0..spec.action_count);
        let out = spec.step(&s, a, &mut rng);
        let (x, v) = (out.next_state[0], out.next_state[1]);
        assert!(
            (-1.2..=0.5).contains(&x) || (out.terminal && x >= 0.5),
            "x = {x}"
        );
        assert!((-0.07..=0.07).contains(&v), "v = {v}");
        assert!(out.reward == -1.0 || (out.terminal && out.reward == 0.0));
        s = if out.terminal {
            episodes += 1;
            spec.reset(&mut rng)
        } else {
            out.next_state
        };
    }
    assert!(episodes > 0);
}

#[test]
fn every_environment_respects_its_bounds() {
    for id in EnvId::ALL {
        let spec = EnvSpec::new(id);
        let mut rng = stream(7, Stream::Env, id as u64);
        let mut s = spec.reset(&mut rng);
        for _ in 0..100_000 {
            let a = rng.random_range(0..spec.action_count);
            let out = spec.step(&s, a, &mut rng);
            for (c, &(lo, hi)) in out.next_state.iter().zip(&spec.state_bounds) {
                assert!(
                    c.is_finite() && *c >= lo && *c <= hi,
                    "{id}: {c} outside [{lo}, {hi}]"
                );
            }
            if id == EnvId::PuddleWorld && !out.terminal {
                let (x, y) = (out.next_state[0], out.next_state[1]);
                assert!((out.reward - (-1.0 + puddle_penalty(x, y))).abs() < 1e-12);
                assert!(out.reward <= -1.0);
            }
            s = if out.terminal {
                spec.reset(&mut rng)
            } else {
                out.next_state
            };
        }
    }
}
