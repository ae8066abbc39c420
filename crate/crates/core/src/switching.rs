//! Transition maps between mode dimensions, switching signals and jump
//! accounting.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cdspace::{projector, stp_sub, v_dist, v_norm, CdVector};
use crate::dkstp::op_vnorm;
use crate::error::{OmegaError, Result};

/// A constant linear reset `x(t⁺) = W x(t⁻)` from `ℝ^{n_p}` to `ℝ^{n_q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMap {
    source_dim: usize,
    target_dim: usize,
    matrix: DMatrix<f64>,
    lipschitz: f64,
}

impl TransitionMap {
    /// Wraps an `n_q × n_p` matrix and caches its Lipschitz constant.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.is_empty() {
            return Err(OmegaError::invalid("transition matrix is empty"));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(OmegaError::invalid(
                "transition matrix has a non-finite entry",
            ));
        }
        let lipschitz = op_vnorm(&matrix)?;
        Ok(TransitionMap {
            source_dim: matrix.ncols(),
            target_dim: matrix.nrows(),
            matrix,
            lipschitz,
        })
    }

    pub fn identity(n: usize) -> Self {
        TransitionMap {
            source_dim: n,
            target_dim: n,
            matrix: DMatrix::identity(n, n),
            lipschitz: 1.0,
        }
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Cached `L = ‖W‖_V`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn apply(&self, x: &CdVector) -> Result<CdVector> {
        if x.dim() != self.source_dim {
            return Err(OmegaError::invalid(format!(
                "transition expects a {}-vector, got dimension {}",
                self.source_dim,
                x.dim()
            )));
        }
        Ok((&self.matrix * x.to_dvector()).into())
    }
}

/// Nearest jump: `W = Π^{n_p}_{n_q}`.
pub fn nearest_map(n_p: usize, n_q: usize) -> Result<TransitionMap> {
    if n_p == 0 || n_q == 0 {
        return Err(OmegaError::invalid("dimensions must be positive"));
    }
    TransitionMap::new(projector(n_p, n_q).into_matrix())
}

/// Agents leave: keep `m` of `n` coordinates. Without explicit indices the
/// trailing `n - m` coordinates are dropped (`W = [I_m, 0]`).
pub fn drop_map(n: usize, m: usize, dropped: Option<&[usize]>) -> Result<TransitionMap> {
    if m == 0 || m >= n {
        return Err(OmegaError::invalid(format!(
            "drop map needs 0 < m < n, got n = {n}, m = {m}"
        )));
    }
    let kept: Vec<usize> = match dropped {
        None => (0..m).collect(),
        Some(idx) => {
            let mut sorted = idx.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != n - m || sorted.iter().any(|&i| i >= n) {
                return Err(OmegaError::invalid(format!(
                    "expected {} distinct dropped indices below {n}, got {idx:?}",
                    n - m
                )));
            }
            (0..n)
                .filter(|i| sorted.binary_search(i).is_err())
                .collect()
        }
    };
    let mut w = DMatrix::zeros(m, n);
    for (row, &col) in kept.iter().enumerate() {
        w[(row, col)] = 1.0;
    }
    TransitionMap::new(w)
}

/// Agents join by nearest jumping: `W = [I_n; Π^n_{m-n}]`.
pub fn add_map(n: usize, m: usize) -> Result<TransitionMap> {
    if n == 0 || m <= n {
        return Err(OmegaError::invalid(format!(
            "add map needs 0 < n < m, got n = {n}, m = {m}"
        )));
    }
    let mut w = DMatrix::zeros(m, n);
    w.view_mut((0, 0), (n, n)).fill_with_identity();
    w.view_mut((n, 0), (m - n, n))
        .copy_from(projector(n, m - n).matrix());
    TransitionMap::new(w)
}

/// `first` then `second`: `W = W_second · W_first`.
pub fn compose_maps(first: &TransitionMap, second: &TransitionMap) -> Result<TransitionMap> {
    if first.target_dim != second.source_dim {
        return Err(OmegaError::invalid(format!(
            "cannot compose: first lands in dimension {}, second starts from {}",
            first.target_dim, second.source_dim
        )));
    }
    TransitionMap::new(&second.matrix * &first.matrix)
}

/// `L^p_q = √((n_p/n_q)·λ_max(WᵀW))`, recomputed from the matrix.
pub fn lipschitz_of(w: &TransitionMap) -> Result<f64> {
    op_vnorm(&w.matrix)
}

/// Switching gap `δ = d_V(x(t⁻), x(t⁺))`.
pub fn jump_gap(pre: &CdVector, post: &CdVector) -> f64 {
    v_dist(pre, post)
}

/// Gaps at or below this (relative to the pre-switch norm, floored at 1)
/// count as a continuous switch and carry no direction.
pub const CONTINUITY_TOL: f64 = 1e-12;

/// One logged switch.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    /// `None` for the projection of an initial state at `t = 0`.
    pub from_mode: Option<usize>,
    pub to_mode: usize,
    pub pre_state: CdVector,
    /// State right after the transition map, before any impulse.
    pub post_state: CdVector,
    pub gap: f64,
    /// Unit jump direction in `ℝ^{lcm(pre, post)}`; absent for continuous
    /// switches.
    pub direction: Option<CdVector>,
    /// `v = μ·gap`.
    pub impulse_amplitude: f64,
    /// Reset increment applied on top of `post_state` (zero when `μ = 0`).
    pub impulse: Option<CdVector>,
}

impl JumpEvent {
    pub fn new(
        time: f64,
        from_mode: Option<usize>,
        to_mode: usize,
        pre_state: CdVector,
        post_state: CdVector,
        mu: f64,
    ) -> Self {
        let gap = jump_gap(&pre_state, &post_state);
        let direction = if gap > CONTINUITY_TOL * v_norm(&pre_state).max(1.0) {
            Some(stp_sub(&post_state, &pre_state).scale(1.0 / gap))
        } else {
            None
        };
        JumpEvent {
            time,
            from_mode,
            to_mode,
            pre_state,
            post_state,
            gap,
            direction,
            impulse_amplitude: mu * gap,
            impulse: None,
        }
    }

    pub fn pre_dim(&self) -> usize {
        self.pre_state.dim()
    }

    pub fn post_dim(&self) -> usize {
        self.post_state.dim()
    }
}

/// How a switching signal was produced.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalKind {
    Fixed,
    RandomDwell {
        dwell_min: f64,
        dwell_max: f64,
        seed: u64,
    },
}

/// A switch to `mode` at `time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Switch {
    pub time: f64,
    pub mode: usize,
}

/// Parameters accepted by [`make_signal`].
#[derive(Debug, Clone, PartialEq)]
pub enum SignalSpec {
    /// Explicit `(time, next mode)` schedule.
    Fixed {
        initial_mode: usize,
        switches: Vec<Switch>,
    },
    /// Repeats `dwells` cyclically while cycling through `modes`; the first
    /// entry of `modes` is active from `t = 0`.
    Periodic { modes: Vec<usize>, dwells: Vec<f64> },
    /// Dwell times drawn uniformly from `[dwell_min, dwell_max]`; the next
    /// mode is drawn uniformly among the other `n_modes - 1` modes.
    RandomDwell {
        initial_mode: usize,
        n_modes: usize,
        dwell_min: f64,
        dwell_max: f64,
        seed: u64,
    },
}

/// Piecewise-constant, right-continuous `σ(t)` on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingSignal {
    kind: SignalKind,
    initial_mode: usize,
    schedule: Vec<Switch>,
    horizon: f64,
}

impl SwitchingSignal {
    pub fn kind(&self) -> &SignalKind {
        &self.kind
    }

    pub fn initial_mode(&self) -> usize {
        self.initial_mode
    }

    pub fn schedule(&self) -> &[Switch] {
        &self.schedule
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn switch_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.schedule.iter().map(|s| s.time)
    }

    /// Active mode at `t` (right-continuous).
    pub fn mode_at(&self, t: f64) -> usize {
        self.schedule
            .iter()
            .take_while(|s| s.time <= t)
            .last()
            .map_or(self.initial_mode, |s| s.mode)
    }

    /// Dwell intervals `(start, end, mode)` covering `[0, horizon]`.
    pub fn intervals(&self) -> Vec<(f64, f64, usize)> {
        let mut out = Vec::with_capacity(self.schedule.len() + 1);
        let mut start = 0.0;
        let mut mode = self.initial_mode;
        for s in &self.schedule {
            out.push((start, s.time, mode));
            start = s.time;
            mode = s.mode;
        }
        out.push((start, self.horizon, mode));
        out
    }

    /// Smallest gap between consecutive switches (`None` with fewer than two).
    pub fn min_dwell(&self) -> Option<f64> {
        self.schedule
            .windows(2)
            .map(|w| w[1].time - w[0].time)
            .min_by(f64::total_cmp)
    }

    /// Largest mode index referenced.
    pub fn max_mode(&self) -> usize {
        self.schedule
            .iter()
            .map(|s| s.mode)
            .fold(self.initial_mode, usize::max)
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(OmegaError::invalid(format!(
            "horizon must be positive and finite, got {horizon}"
        )));
    }
    Ok(())
}

/// Builds a switching signal on `[0, horizon]`. Switches at or after the
/// horizon are discarded.
pub fn make_signal(spec: &SignalSpec, horizon: f64) -> Result<SwitchingSignal> {
    check_horizon(horizon)?;
    match spec {
        SignalSpec::Fixed {
            initial_mode,
            switches,
        } => {
            let mut prev = 0.0;
            for (i, s) in switches.iter().enumerate() {
                if !s.time.is_finite() || s.time <= prev {
                    return Err(OmegaError::invalid(format!(
                        "switch {i} at t = {} is not after t = {prev}; switch times must be strictly increasing and positive",
                        s.time
                    )));
                }
                prev = s.time;
            }
            Ok(SwitchingSignal {
                kind: SignalKind::Fixed,
                initial_mode: *initial_mode,
                schedule: switches
                    .iter()
                    .copied()
                    .filter(|s| s.time < horizon)
                    .collect(),
                horizon,
            })
        }
        SignalSpec::Periodic { modes, dwells } => {
            if modes.is_empty() || dwells.is_empty() {
                return Err(OmegaError::invalid(
                    "periodic signal needs at least one mode and one dwell",
                ));
            }
            if let Some(d) = dwells.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
                return Err(OmegaError::invalid(format!(
                    "dwell times must be positive, got {d}"
                )));
            }
            let mut schedule = Vec::new();
            let mut t = 0.0;
            for k in 0.. {
                t += dwells[k % dwells.len()];
                if t >= horizon {
                    break;
                }
                schedule.push(Switch {
                    time: t,
                    mode: modes[(k + 1) % modes.len()],
                });
            }
            Ok(SwitchingSignal {
                kind: SignalKind::Fixed,
                initial_mode: modes[0],
                schedule,
                horizon,
            })
        }
        SignalSpec::RandomDwell {
            initial_mode,
            n_modes,
            dwell_min,
            dwell_max,
            seed,
        } => {
            if !(dwell_min.is_finite() && *dwell_min > 0.0) {
                return Err(OmegaError::invalid(format!(
                    "minimum dwell must be positive, got {dwell_min}"
                )));
            }
            if !(dwell_max.is_finite() && dwell_max >= dwell_min) {
                return Err(OmegaError::invalid(format!(
                    "dwell bounds must satisfy 0 < min <= max, got [{dwell_min}, {dwell_max}]"
                )));
            }
            if *initial_mode >= *n_modes {
                return Err(OmegaError::invalid(format!(
                    "initial mode {initial_mode} outside 0..{n_modes}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut schedule = Vec::new();
            let mut t = 0.0;
            let mut mode = *initial_mode;
            loop {
                t += rng.random_range(*dwell_min..=*dwell_max);
                if t >= horizon {
                    break;
                }
                if *n_modes > 1 {
                    let offset = rng.random_range(1..*n_modes);
                    mode = (mode + offset) % n_modes;
                }
                schedule.push(Switch { time: t, mode });
            }
            Ok(SwitchingSignal {
                kind: SignalKind::RandomDwell {
                    dwell_min: *dwell_min,
                    dwell_max: *dwell_max,
                    seed: *seed,
                },
                initial_mode: *initial_mode,
                schedule,
                horizon,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> CdVector {
        CdVector::from_slice(x).unwrap()
    }

    #[test]
    fn nearest_map_examples() {
        let w = nearest_map(2, 3).unwrap();
        let expected = DMatrix::from_row_slice(3, 2, &[1., 0., 0.5, 0.5, 0., 1.]);
        assert_eq!(w.matrix(), &expected);
        assert_eq!(
            nearest_map(4, 4).unwrap().matrix(),
            &DMatrix::identity(4, 4)
        );
        let x = v(&[1.5, -2.0]);
        assert_eq!(
            nearest_map(2, 4).unwrap().apply(&x).unwrap(),
            x.kron_ones(2)
        );
    }

    #[test]
    fn drop_map_examples() {
        let w = drop_map(3, 2, None).unwrap();
        assert_eq!(
            w.matrix(),
            &DMatrix::from_row_slice(2, 3, &[1., 0., 0., 0., 1., 0.])
        );
        assert!(matches!(
            drop_map(3, 3, None),
            Err(OmegaError::InvalidArgument(_))
        ));
        let w = drop_map(3, 2, Some(&[1])).unwrap();
        assert_eq!(
            w.matrix(),
            &DMatrix::from_row_slice(2, 3, &[1., 0., 0., 0., 0., 1.])
        );
        assert!(drop_map(3, 2, Some(&[0, 1])).is_err());
        assert!(drop_map(3, 2, Some(&[5])).is_err());
    }

    #[test]
    fn add_map_examples() {
        let w = add_map(2, 4).unwrap();
        assert_eq!(
            w.matrix(),
            &DMatrix::from_row_slice(4, 2, &[1., 0., 0., 1., 1., 0., 0., 1.])
        );
        let w = add_map(2, 3).unwrap();
        assert_eq!(
            w.matrix(),
            &DMatrix::from_row_slice(3, 2, &[1., 0., 0., 1., 0.5, 0.5])
        );
        for (n, m) in [(1, 2), (2, 5), (3, 7), (4, 6)] {
            let w = add_map(n, m).unwrap();
            assert_eq!(crate::linalg::numerical_rank(w.matrix(), 1e-10), n);
        }
        assert!(add_map(3, 3).is_err());
    }

    #[test]
    fn compose_examples() {
        let w = compose_maps(&drop_map(3, 2, None).unwrap(), &add_map(2, 4).unwrap()).unwrap();
        assert_eq!(
            w.matrix(),
            &DMatrix::from_row_slice(4, 3, &[1., 0., 0., 0., 1., 0., 1., 0., 0., 0., 1., 0.])
        );
        let d = drop_map(5, 3, None).unwrap();
        let id = TransitionMap::identity(3);
        assert_eq!(compose_maps(&d, &id).unwrap().matrix(), d.matrix());
        assert!(compose_maps(&d, &add_map(2, 4).unwrap()).is_err());
    }

    #[test]
    fn compose_lipschitz_is_submultiplicative() {
        let a = drop_map(6, 4, Some(&[0, 3])).unwrap();
        let b = add_map(4, 9).unwrap();
        let c = compose_maps(&a, &b).unwrap();
        assert!(c.lipschitz() <= a.lipschitz() * b.lipschitz() + 1e-9);
    }

    #[test]
    fn lipschitz_examples() {
        let l = lipschitz_of(&drop_map(3, 2, None).unwrap()).unwrap();
        assert!((l - 1.5_f64.sqrt()).abs() < 1e-9);
        assert!((lipschitz_of(&TransitionMap::identity(3)).unwrap() - 1.0).abs() < 1e-12);
        assert!((lipschitz_of(&add_map(2, 4).unwrap()).unwrap() - 1.0).abs() < 1e-9);
        let w = nearest_map(3, 5).unwrap();
        assert!((w.lipschitz() - lipschitz_of(&w).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn jump_gap_examples() {
        assert_eq!(jump_gap(&v(&[1., 1.]), &v(&[1., 1., 1.])), 0.0);
        let g = jump_gap(&v(&[2., 1.]), &v(&[2., 1.5, 1.]));
        assert!((g - (0.5_f64 / 6.0).sqrt()).abs() < 1e-12);
        assert!((g - 0.2887).abs() < 5e-5);
        let x = v(&[1., -3., 2.]);
        assert!((jump_gap(&x, &x.scale(-1.0)) - 2.0 * v_norm(&x)).abs() < 1e-12);
    }

    #[test]
    fn jump_event_direction() {
        let e = JumpEvent::new(1.0, Some(0), 1, v(&[2., 1.]), v(&[2., 1.5, 1.]), 0.5);
        let phi = e.direction.as_ref().unwrap();
        assert_eq!(phi.dim(), 6);
        assert!((v_norm(phi) - 1.0).abs() < 1e-12);
        assert!((e.impulse_amplitude - 0.5 * e.gap).abs() < 1e-15);

        let e = JumpEvent::new(1.0, Some(0), 1, v(&[3., -1.]), v(&[3., 3., -1., -1.]), 1.0);
        assert!(e.gap <= 1e-12);
        assert!(e.direction.is_none());
    }

    #[test]
    fn periodic_pattern_of_alternating_dwells() {
        let s = make_signal(
            &SignalSpec::Periodic {
                modes: vec![0, 1],
                dwells: vec![1.0, 2.0],
            },
            10.0,
        )
        .unwrap();
        let times: Vec<f64> = s.switch_times().collect();
        assert_eq!(times, vec![1., 3., 4., 6., 7., 9.]);
        assert_eq!(s.mode_at(0.5), 0);
        assert_eq!(s.mode_at(1.0), 1);
        assert_eq!(s.mode_at(3.5), 0);
    }

    #[test]
    fn fixed_schedule_validation() {
        let bad = SignalSpec::Fixed {
            initial_mode: 0,
            switches: vec![Switch { time: 2.0, mode: 1 }, Switch { time: 2.0, mode: 0 }],
        };
        assert!(make_signal(&bad, 5.0).is_err());
        let zero = SignalSpec::Fixed {
            initial_mode: 0,
            switches: vec![Switch { time: 0.0, mode: 1 }],
        };
        assert!(make_signal(&zero, 5.0).is_err());
        let empty = SignalSpec::Fixed {
            initial_mode: 2,
            switches: vec![],
        };
        let s = make_signal(&empty, 5.0).unwrap();
        assert_eq!(s.intervals(), vec![(0.0, 5.0, 2)]);
    }

    #[test]
    fn random_dwell_is_seeded_and_bounded() {
        let spec = SignalSpec::RandomDwell {
            initial_mode: 0,
            n_modes: 2,
            dwell_min: 0.5,
            dwell_max: 2.0,
            seed: 17,
        };
        let a = make_signal(&spec, 50.0).unwrap();
        let b = make_signal(&spec, 50.0).unwrap();
        assert_eq!(a, b);
        let mut prev = 0.0;
        for s in a.schedule() {
            let d = s.time - prev;
            assert!((0.5..=2.0).contains(&d), "dwell {d}");
            prev = s.time;
        }
        // two modes alternate
        for w in a.schedule().windows(2) {
            assert_ne!(w[0].mode, w[1].mode);
        }
        let bad = SignalSpec::RandomDwell {
            initial_mode: 0,
            n_modes: 2,
            dwell_min: 0.0,
            dwell_max: 2.0,
            seed: 1,
        };
        assert!(make_signal(&bad, 5.0).is_err());
    }
}
