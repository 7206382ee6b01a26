//! Linear-optics device catalog, circuit composition, Haar sampling and the
//! G1/G2 classification of a circuit.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::{all_labels, bell_state_with, BellLabel};
use crate::error::{Error, Result};
use crate::fock::{prefix_marginals, ClickPattern, PatternSpace, StateVector, Statistics};
use crate::linalg::{phase_fixed_q, unitarity_deviation, CMatrix, MatrixRepr, Unitary, ONE, UNITARITY_TOL, ZERO};

pub const CIRCUIT_SCHEMA_VERSION: u32 = 1;

/// Marginal probabilities at or below this count as zero.
pub const G1_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DeviceKind {
    #[serde(rename = "BS")]
    BeamSplitter,
    #[serde(rename = "PBS")]
    PolarizingBeamSplitter,
    #[serde(rename = "HWP")]
    HalfWavePlate,
    #[serde(rename = "QWP")]
    QuarterWavePlate,
    DovePrism,
    BeamDisplacer,
    #[serde(rename = "LC")]
    LiquidCrystal,
    #[serde(rename = "OAM-BS")]
    OamBeamSplitter,
    QPlate,
    PhaseShift,
    Swap,
    CustomUnitary,
}

/// Device parameters; which fields are required depends on the kind.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceParams {
    /// Orientation angle in radians (wave plates, Dove prisms).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Phase in radians (liquid crystals, phase shifters).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    /// Row-major `[re, im]` entries for custom unitaries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixRepr>,
}

/// One device and the global modes it acts on.
///
/// Two-mode devices take two equal-length groups and act on each pair
/// `(ports[0][k], ports[1][k])`. PBS, beam displacers and OAM-BS take two
/// groups of two modes, `[H, V]` or `[+1, -1]` for each input port. Phase
/// shifters act on every listed mode; custom unitaries on a single group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSpec {
    pub kind: DeviceKind,
    pub ports: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "is_default_params")]
    pub params: DeviceParams,
}

fn is_default_params(p: &DeviceParams) -> bool {
    *p == DeviceParams::default()
}

impl DeviceSpec {
    pub fn new(kind: DeviceKind, ports: Vec<Vec<usize>>) -> Self {
        DeviceSpec {
            kind,
            ports,
            params: DeviceParams::default(),
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.params.theta = Some(theta);
        self
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.params.phi = Some(phi);
        self
    }

    pub fn custom(modes: Vec<usize>, matrix: &CMatrix) -> Self {
        DeviceSpec {
            kind: DeviceKind::CustomUnitary,
            ports: vec![modes],
            params: DeviceParams {
                matrix: Some(MatrixRepr::from(matrix)),
                ..DeviceParams::default()
            },
        }
    }

    /// Two-mode device on the single pair `(a, b)`.
    pub fn pair(kind: DeviceKind, a: usize, b: usize) -> Self {
        DeviceSpec::new(kind, vec![vec![a], vec![b]])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpec {
    pub schema_version: u32,
    pub mode_count: usize,
    pub photon_count: usize,
    pub statistics: Statistics,
    pub devices: Vec<DeviceSpec>,
    /// 1-based detector number for each output mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector_labels: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

/// Where a generated circuit came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub generator: String,
    pub seed: u64,
    pub budget: usize,
    pub restarts: usize,
    pub evaluations: usize,
    pub best_classes: usize,
    /// `(evaluation index, best class count)` at each improvement.
    pub trace: Vec<(usize, usize)>,
}

impl CircuitSpec {
    pub fn new(mode_count: usize, photon_count: usize, statistics: Statistics) -> Self {
        CircuitSpec {
            schema_version: CIRCUIT_SCHEMA_VERSION,
            mode_count,
            photon_count,
            statistics,
            devices: Vec::new(),
            detector_labels: None,
            provenance: None,
        }
    }

    pub fn levels(&self) -> usize {
        self.mode_count / self.photon_count.max(1)
    }

    /// Checks header consistency (everything except device matrices).
    pub fn validate_header(&self) -> Result<()> {
        if self.schema_version != CIRCUIT_SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported circuit schema_version {}",
                self.schema_version
            )));
        }
        if self.photon_count == 0 || self.mode_count % self.photon_count != 0 {
            return Err(Error::Dimension {
                expected: self.photon_count.max(1) * self.levels().max(1),
                got: self.mode_count,
            });
        }
        if let Some(labels) = &self.detector_labels {
            let mut sorted = labels.clone();
            sorted.sort_unstable();
            if sorted != (1..=self.mode_count).collect::<Vec<_>>() {
                return Err(Error::Wiring(
                    "detector_labels must be a permutation of 1..=mode_count".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: CircuitSpec =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("circuit: {e}")))?;
        c.validate_header()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serializes")
    }
}

fn m2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn bs_matrix() -> CMatrix {
    let h = re(FRAC_1_SQRT_2);
    m2(h, h, h, -h)
}

fn hwp_matrix(theta: f64) -> CMatrix {
    let (s, c) = (2.0 * theta).sin_cos();
    m2(re(c), re(s), re(s), re(-c))
}

fn qwp_matrix(theta: f64) -> CMatrix {
    let (s, c) = theta.sin_cos();
    let i = Complex64::i();
    let off = (ONE - i) * s * c;
    m2(re(c * c) + i * s * s, off, off, re(s * s) + i * c * c)
}

fn dove_matrix(theta: f64) -> CMatrix {
    m2(
        ZERO,
        Complex64::from_polar(1.0, -2.0 * theta),
        Complex64::from_polar(1.0, 2.0 * theta),
        ZERO,
    )
}

/// `[H0, V0, H1, V1]`: horizontal stays, vertical crosses.
fn pbs_matrix() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(2, 2)] = ONE;
    m[(3, 1)] = ONE;
    m[(1, 3)] = ONE;
    m
}

/// Mach-Zehnder on `[p1+, p1-, p2+, p2-]`: BS, Dove prisms at 0 and 45 deg in
/// the two arms (the second arm carries a `-i` path-length phase), BS.
fn oam_bs_matrix() -> CMatrix {
    let mut bs = CMatrix::zeros(4, 4);
    let mut arms = CMatrix::zeros(4, 4);
    let b = bs_matrix();
    let arm_a = dove_matrix(0.0);
    let arm_b = dove_matrix(FRAC_PI_4) * Complex64::new(0.0, -1.0);
    for oam in 0..2 {
        for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            bs[(2 * r + oam, 2 * c + oam)] = b[(r, c)];
        }
    }
    for r in 0..2 {
        for c in 0..2 {
            arms[(r, c)] = arm_a[(r, c)];
            arms[(2 + r, 2 + c)] = arm_b[(r, c)];
        }
    }
    &bs * &arms * &bs
}

fn require(value: Option<f64>, what: &str, kind: DeviceKind) -> Result<f64> {
    match value {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse(format!("{kind:?} requires a finite `{what}` parameter"))),
    }
}

/// The device's local matrix and the modes its rows/columns refer to, one
/// entry per independent block.
fn device_blocks(d: &DeviceSpec) -> Result<Vec<(Vec<usize>, CMatrix)>> {
    use DeviceKind::*;
    let two_groups = |width: Option<usize>| -> Result<()> {
        let ok = d.ports.len() == 2
            && d.ports[0].len() == d.ports[1].len()
            && !d.ports[0].is_empty()
            && width.is_none_or(|w| d.ports[0].len() == w);
        if ok {
            Ok(())
        } else {
            Err(Error::Wiring(format!(
                "{:?} expects two equal port groups{}, got {:?}",
                d.kind,
                width.map_or(String::new(), |w| format!(" of {w} modes")),
                d.ports
            )))
        }
    };
    let pairwise = |m: CMatrix| -> Vec<(Vec<usize>, CMatrix)> {
        d.ports[0]
            .iter()
            .zip(&d.ports[1])
            .map(|(&a, &b)| (vec![a, b], m.clone()))
            .collect()
    };
    let quad = |m: CMatrix| -> Vec<(Vec<usize>, CMatrix)> {
        let modes = vec![d.ports[0][0], d.ports[0][1], d.ports[1][0], d.ports[1][1]];
        vec![(modes, m)]
    };
    Ok(match d.kind {
        BeamSplitter => {
            two_groups(None)?;
            pairwise(bs_matrix())
        }
        HalfWavePlate => {
            two_groups(None)?;
            pairwise(hwp_matrix(require(d.params.theta, "theta", d.kind)?))
        }
        QuarterWavePlate => {
            two_groups(None)?;
            pairwise(qwp_matrix(require(d.params.theta, "theta", d.kind)?))
        }
        DovePrism => {
            two_groups(None)?;
            pairwise(dove_matrix(require(d.params.theta, "theta", d.kind)?))
        }
        LiquidCrystal => {
            two_groups(None)?;
            let phi = require(d.params.phi, "phi", d.kind)?;
            pairwise(m2(ONE, ZERO, ZERO, Complex64::from_polar(1.0, phi)))
        }
        Swap => {
            two_groups(None)?;
            pairwise(m2(ZERO, ONE, ONE, ZERO))
        }
        QPlate => {
            two_groups(None)?;
            pairwise(CMatrix::identity(2, 2))
        }
        PolarizingBeamSplitter | BeamDisplacer => {
            two_groups(Some(2))?;
            quad(pbs_matrix())
        }
        OamBeamSplitter => {
            two_groups(Some(2))?;
            quad(oam_bs_matrix())
        }
        PhaseShift => {
            let phi = require(d.params.phi, "phi", d.kind)?;
            let phase = Complex64::from_polar(1.0, phi);
            let modes: Vec<usize> = d.ports.iter().flatten().copied().collect();
            if modes.is_empty() {
                return Err(Error::Wiring("PhaseShift needs at least one mode".into()));
            }
            modes
                .into_iter()
                .map(|m| (vec![m], CMatrix::from_element(1, 1, phase)))
                .collect()
        }
        CustomUnitary => {
            let repr = d
                .params
                .matrix
                .as_ref()
                .ok_or_else(|| Error::Parse("CustomUnitary requires `matrix`".into()))?;
            let m = repr.to_matrix()?;
            if d.ports.len() != 1 {
                return Err(Error::Wiring("CustomUnitary takes one port group".into()));
            }
            if m.nrows() != m.ncols() {
                return Err(Error::Shape {
                    rows: m.nrows(),
                    cols: m.ncols(),
                });
            }
            if m.nrows() != d.ports[0].len() {
                return Err(Error::Dimension {
                    expected: d.ports[0].len(),
                    got: m.nrows(),
                });
            }
            let deviation = unitarity_deviation(&m);
            if !(deviation <= UNITARITY_TOL) {
                return Err(Error::NonUnitary { deviation });
            }
            vec![(d.ports[0].clone(), m)]
        }
    })
}

/// Full `mode_count`-dimensional unitary of one device.
pub fn device_unitary(d: &DeviceSpec, mode_count: usize) -> Result<Unitary> {
    let mut seen = vec![false; mode_count];
    for &m in d.ports.iter().flatten() {
        if m >= mode_count {
            return Err(Error::Wiring(format!(
                "{:?} references mode {m} outside 0..{mode_count}",
                d.kind
            )));
        }
        if std::mem::replace(&mut seen[m], true) {
            return Err(Error::Wiring(format!("{:?} uses mode {m} twice", d.kind)));
        }
    }
    let mut u = CMatrix::identity(mode_count, mode_count);
    for (modes, block) in device_blocks(d)? {
        for (r, &mr) in modes.iter().enumerate() {
            for (c, &mc) in modes.iter().enumerate() {
                u[(mr, mc)] = block[(r, c)];
            }
        }
    }
    Unitary::new(u)
}

/// Ordered product `U_k ... U_2 U_1` of the listed devices.
pub fn compose_circuit(c: &CircuitSpec) -> Result<Unitary> {
    c.validate_header()?;
    let mut total = CMatrix::identity(c.mode_count, c.mode_count);
    for d in &c.devices {
        let u = device_unitary(d, c.mode_count)?;
        total = u.matrix() * total;
    }
    Unitary::new(total)
}

/// Each photon's `D` modes routed to its own `D` detectors: the identity.
pub fn build_fig1_circuit(n: usize, d: usize) -> CircuitSpec {
    let mut c = CircuitSpec::new(n * d, n, Statistics::Boson);
    let id = CMatrix::identity(d, d);
    for k in 0..n {
        c.devices
            .push(DeviceSpec::custom((k * d..(k + 1) * d).collect(), &id));
    }
    c
}

#[derive(Deserialize)]
struct DetectorTable {
    schema_version: u32,
    mode_count: usize,
    detector_labels: Vec<usize>,
}

/// Detector numbers for the two-photon eight-dimensional measurement, chosen
/// so that the eight coincidences produced by `Phi_1` read
/// `D_{1,9}, D_{2,10}, ..., D_{8,16}`.
pub fn fig3_detector_labels() -> Vec<usize> {
    let table: DetectorTable =
        serde_json::from_str(include_str!("../data/fig3_detectors.json")).expect("bundled table");
    assert_eq!((table.schema_version, table.mode_count), (1, 16));
    table.detector_labels
}

/// The two-photon spin-path-OAM Bell-state analyzer on 16 modes.
///
/// Photon A enters on modes 0..8, photon B on 8..16, each with
/// `level = 4*path + 2*spin + oam`. Photon B first has its polarization
/// flipped (HWP at 45 deg) and its OAM charge inverted (Dove prism); the two
/// photons then meet on balanced beam splitters level by level; each output
/// port interferes its two paths; OAM-BS blocks sort OAM parity and q-plate
/// stages project onto detectors.
pub fn build_fig3_circuit() -> CircuitSpec {
    use DeviceKind::*;
    let mut c = CircuitSpec::new(16, 2, Statistics::Boson);
    let b = 8;
    // Spin flip on photon B: (H, V) pairs share path and OAM.
    let h_modes: Vec<usize> = [0, 1, 4, 5].iter().map(|l| b + l).collect();
    let v_modes: Vec<usize> = h_modes.iter().map(|m| m + 2).collect();
    c.devices.push(DeviceSpec::new(HalfWavePlate, vec![h_modes, v_modes]).with_theta(FRAC_PI_4));
    // OAM inversion on photon B: (+1, -1) pairs.
    let plus: Vec<usize> = [0, 2, 4, 6].iter().map(|l| b + l).collect();
    let minus: Vec<usize> = plus.iter().map(|m| m + 1).collect();
    c.devices
        .push(DeviceSpec::new(DovePrism, vec![plus.clone(), minus.clone()]).with_theta(0.0));
    // Two-photon interference, level by level.
    c.devices
        .push(DeviceSpec::new(BeamSplitter, vec![(0..8).collect(), (8..16).collect()]));
    // Path interference inside each output port.
    for port in [0, 8] {
        c.devices.push(DeviceSpec::new(
            BeamSplitter,
            vec![(port..port + 4).collect(), (port + 4..port + 8).collect()],
        ));
    }
    // OAM sorting: one OAM-BS per (port, spin), fed by the two paths.
    for port in [0, 8] {
        for spin in 0..2 {
            let low = port + 2 * spin;
            c.devices.push(DeviceSpec::new(
                OamBeamSplitter,
                vec![vec![low, low + 1], vec![low + 4, low + 5]],
            ));
        }
    }
    // Projection onto the fundamental mode at each detector.
    let all_plus: Vec<usize> = (0..16).step_by(2).collect();
    let all_minus: Vec<usize> = all_plus.iter().map(|m| m + 1).collect();
    c.devices.push(DeviceSpec::new(QPlate, vec![all_plus, all_minus]));
    c.detector_labels = Some(fig3_detector_labels());
    c
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of R's
/// diagonal absorbed into Q.
pub fn haar_random_unitary(dim: usize, seed: u64) -> Unitary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_with_rng(dim, &mut rng)
}

pub fn haar_with_rng<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> Unitary {
    let scale = FRAC_1_SQRT_2;
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        Complex64::new(a * scale, b * scale)
    });
    Unitary::new_unchecked(phase_fixed_q(g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    G1,
    G2,
}

/// A state and an `(n-1)`-click prefix whose marginal vanishes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness<L> {
    pub label: L,
    pub prefix: ClickPattern,
    pub marginal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupTag<L = BellLabel> {
    pub group: Group,
    pub witness: Option<Witness<L>>,
}

/// First `(state index, prefix, marginal)` whose prefix marginal is `<= tol`,
/// scanning states in order and prefixes lexicographically.
pub fn first_zero_prefix(
    u: &Unitary,
    states: &[StateVector],
    tol: f64,
) -> Result<Option<(usize, ClickPattern, f64)>> {
    let Some(first) = states.first() else {
        return Ok(None);
    };
    let n = first.photon_number();
    if n < 2 {
        return Err(Error::Arity { expected: 2, got: n });
    }
    let space = PatternSpace::new(first.mode_count(), n, first.statistics());
    let prefixes = crate::fock::enumerate_patterns(first.mode_count(), n - 1, first.statistics());
    let hits: Vec<Option<(usize, ClickPattern, f64)>> = states
        .par_iter()
        .enumerate()
        .map(|(idx, psi)| -> Result<_> {
            let marg = prefix_marginals(&space.evolve(u, psi)?);
            Ok(prefixes.iter().find_map(|p| {
                let m = marg.get(p).copied().unwrap_or(0.0);
                (m <= tol).then(|| (idx, p.clone(), m))
            }))
        })
        .collect::<Result<_>>()?;
    Ok(hits.into_iter().flatten().next())
}

/// G1 iff every Bell state leaves every `(n-1)`-click prefix with a marginal
/// above `tol`; otherwise G2 with the first vanishing pair as witness.
pub fn classify_group(
    u: &Unitary,
    n: usize,
    d: usize,
    statistics: Statistics,
    tol: f64,
) -> Result<GroupTag> {
    if u.dim() != n * d {
        return Err(Error::Dimension {
            expected: n * d,
            got: u.dim(),
        });
    }
    let labels = all_labels(n, d)?;
    let states: Vec<StateVector> = labels
        .iter()
        .map(|l| bell_state_with(l, statistics))
        .collect::<Result<_>>()?;
    Ok(match first_zero_prefix(u, &states, tol)? {
        None => GroupTag {
            group: Group::G1,
            witness: None,
        },
        Some((idx, prefix, marginal)) => GroupTag {
            group: Group::G2,
            witness: Some(Witness {
                label: labels[idx].clone(),
                prefix,
                marginal,
            }),
        },
    })
}
