use crate::error::Result;
use crate::hypsys::{phi_h, wave_curve, SystemDef};
use crate::state::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WaveKind {
    Shock,
    Contact,
    Rarefaction,
    NonPhysical,
    Zero,
}

impl WaveKind {
    pub fn is_physical(self) -> bool {
        matches!(self, WaveKind::Shock | WaveKind::Contact | WaveKind::Rarefaction)
    }

    pub fn label(self) -> &'static str {
        match self {
            WaveKind::Shock => "shock",
            WaveKind::Contact => "contact",
            WaveKind::Rarefaction => "rarefaction",
            WaveKind::NonPhysical => "nonphysical",
            WaveKind::Zero => "zero",
        }
    }
}

/// One outgoing discontinuity of a Riemann fan.
#[derive(Debug, Clone, PartialEq)]
pub struct Wave {
    /// 0-based family; `None` for non-physical and zero waves.
    pub family: Option<usize>,
    pub kind: WaveKind,
    /// Curve parameter for physical waves, Euclidean jump otherwise.
    pub sigma: f64,
    pub speed: f64,
    pub left: State,
    pub right: State,
}

impl Wave {
    pub fn jump(&self) -> f64 {
        (&self.right - &self.left).norm()
    }

    /// `|σ|` for physical waves, the jump size otherwise.
    pub fn strength(&self) -> f64 {
        if self.kind.is_physical() {
            self.sigma.abs()
        } else {
            self.jump()
        }
    }

    pub fn non_physical(left: State, right: State, speed: f64) -> Self {
        let sigma = (&right - &left).norm();
        Wave { family: None, kind: WaveKind::NonPhysical, sigma, speed, left, right }
    }

    pub fn zero(left: State, right: State) -> Self {
        let sigma = (&right - &left).norm();
        Wave { family: None, kind: WaveKind::Zero, sigma, speed: 0.0, left, right }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WaveFan {
    /// Ordered left to right, speeds nondecreasing.
    pub waves: Vec<Wave>,
    pub np_amplitude: f64,
    pub zero_wave: Option<(State, State)>,
}

impl WaveFan {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_waves(waves: Vec<Wave>) -> Self {
        let np_amplitude = waves.iter().filter(|w| w.kind == WaveKind::NonPhysical).map(Wave::jump).sum();
        let zero_wave = waves.iter().find(|w| w.kind == WaveKind::Zero).map(|w| (w.left.clone(), w.right.clone()));
        WaveFan { waves, np_amplitude, zero_wave }
    }

    pub fn is_empty(&self) -> bool {
        self.waves.is_empty()
    }

    pub fn physical(&self) -> impl Iterator<Item = &Wave> {
        self.waves.iter().filter(|w| w.kind.is_physical())
    }

    /// Largest gap in the state chain `uL → … → uR`.
    pub fn chain_error(&self, ul: &State, ur: &State) -> f64 {
        let mut prev = ul;
        let mut err: f64 = 0.0;
        for w in &self.waves {
            err = err.max((&w.left - prev).norm());
            prev = &w.right;
        }
        err.max((ur - prev).norm())
    }

    /// Largest deviation of a wave from its defining relation:
    /// `right = Ψ_k(σ)[left]` for physical waves, `right = Φ_h(left)` for zero waves.
    pub fn relation_error(&self, sys: &SystemDef, h: f64) -> Result<f64> {
        let mut err: f64 = 0.0;
        for w in &self.waves {
            let expect = match (w.kind, w.family) {
                (WaveKind::Zero, _) => phi_h(sys, &w.left, h)?,
                (k, Some(i)) if k.is_physical() => wave_curve(sys, i, w.sigma, &w.left)?,
                _ => continue,
            };
            err = err.max((expect - &w.right).norm());
        }
        Ok(err)
    }

    pub fn speeds_ordered(&self) -> bool {
        self.waves.windows(2).all(|p| p[0].speed <= p[1].speed)
    }
}
