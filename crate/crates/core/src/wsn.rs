//! The m-hop cooperative amplify-and-forward network.
//!
//! A transmission runs in `m` phases. In phase 1 the sources broadcast to the
//! first relay group and the destinations; in phase `i` the relay group
//! `i-1` amplifies and forwards to group `i` and the destinations; in phase
//! `m` the last group forwards to the destinations only. Stacking the `m`
//! destination slots gives the linear model `d = H_d A y + v_d`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::channel::{FadingKind, FadingProcess, FadingSpec};
use crate::detection::qpsk_mod;
use crate::error::{Error, Result};
use crate::numerics::{complex_gaussian_vector, ComplexMatrix, ComplexVector, RngStream};

/// Node counts of the network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    hops: usize,
    sources: usize,
    destinations: usize,
    relays: Vec<usize>,
}

impl Topology {
    /// `relays` lists the group sizes `N_r(1) .. N_r(m-1)`; the hop count is
    /// `relays.len() + 1`.
    pub fn new(sources: usize, relays: Vec<usize>, destinations: usize) -> Result<Self> {
        if relays.is_empty() {
            return Err(Error::parameter(
                "relays",
                "at least one relay group (m >= 2) is required",
            ));
        }
        if sources == 0 || destinations == 0 || relays.contains(&0) {
            return Err(Error::parameter("topology", "all node counts must be >= 1"));
        }
        Ok(Self {
            hops: relays.len() + 1,
            sources,
            destinations,
            relays,
        })
    }

    /// The three-hop network used throughout the experiments: 2 sources,
    /// relay groups of 4 and 4, and 3 destinations.
    pub fn reference() -> Self {
        Self::new(2, vec![4, 4], 3).expect("valid reference topology")
    }

    pub fn hops(&self) -> usize {
        self.hops
    }

    pub fn sources(&self) -> usize {
        self.sources
    }

    pub fn destinations(&self) -> usize {
        self.destinations
    }

    pub fn relay_groups(&self) -> &[usize] {
        &self.relays
    }

    pub fn total_relays(&self) -> usize {
        self.relays.iter().sum()
    }

    /// Rows of the stacked channel, `M = m·N_d`.
    pub fn stacked_rows(&self) -> usize {
        self.hops * self.destinations
    }

    /// Columns of the stacked channel, `N = N_r + N_s`.
    pub fn stacked_cols(&self) -> usize {
        self.total_relays() + self.sources
    }

    /// Number of nodes transmitting in phase `i` (1-based).
    fn transmitters(&self, phase: usize) -> usize {
        if phase == 1 {
            self.sources
        } else {
            self.relays[phase - 2]
        }
    }

    /// Column range of the stacked vector occupied by the signal
    /// transmitted in phase `i`: relays of group `m-1` come first, sources last.
    pub fn stacked_col_range(&self, phase: usize) -> std::ops::Range<usize> {
        assert!((1..=self.hops).contains(&phase));
        // Phase i transmits group i-1 (sources for i = 1); groups are stacked
        // in reverse order.
        let before: usize = (phase..self.hops).map(|p| self.transmitters(p + 1)).sum();
        before..before + self.transmitters(phase)
    }

    /// Row range of the stacked vector holding destination slot `i`.
    pub fn stacked_row_range(&self, phase: usize) -> std::ops::Range<usize> {
        assert!((1..=self.hops).contains(&phase));
        let start = (self.hops - phase) * self.destinations;
        start..start + self.destinations
    }
}

/// Per-relay amplification coefficients, one vector per relay group.
#[derive(Debug, Clone, PartialEq)]
pub struct Amplification {
    groups: Vec<Vec<f64>>,
}

impl Amplification {
    pub fn uniform(topology: &Topology, coefficient: f64) -> Result<Self> {
        Self::new(
            topology,
            topology.relay_groups().iter().map(|&n| vec![coefficient; n]).collect(),
        )
    }

    pub fn new(topology: &Topology, groups: Vec<Vec<f64>>) -> Result<Self> {
        if groups.len() != topology.relay_groups().len()
            || groups.iter().zip(topology.relay_groups()).any(|(g, &n)| g.len() != n)
        {
            return Err(Error::dimension(
                "amplification",
                format!("{:?}", topology.relay_groups()),
                format!("{:?}", groups.iter().map(Vec::len).collect::<Vec<_>>()),
            ));
        }
        if groups.iter().flatten().any(|a| !a.is_finite()) {
            return Err(Error::parameter("amplification", "coefficients must be finite"));
        }
        Ok(Self { groups })
    }

    /// `A_i` for relay group `i` (1-based).
    pub fn group(&self, i: usize) -> ComplexMatrix {
        let g = &self.groups[i - 1];
        ComplexMatrix::from_diagonal(&DVector::from_iterator(
            g.len(),
            g.iter().map(|&a| Complex64::new(a, 0.0)),
        ))
    }

    /// Block-diagonal `diag(A_{m-1}, ..., A_1, I_{N_s})`.
    pub fn stacked(&self, topology: &Topology) -> ComplexMatrix {
        let n = topology.stacked_cols();
        let mut diag = Vec::with_capacity(n);
        for g in self.groups.iter().rev() {
            diag.extend(g.iter().map(|&a| Complex64::new(a, 0.0)));
        }
        diag.extend(std::iter::repeat_n(Complex64::new(1.0, 0.0), topology.sources()));
        ComplexMatrix::from_diagonal(&DVector::from_vec(diag))
    }
}

/// Mean square entry modulus of every link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkPowers {
    pub source_relay: f64,
    /// `H_{r(i-1),r(i)}` for i = 2..m-1.
    pub relay_relay: Vec<f64>,
    pub source_destination: f64,
    /// `H_{r(i),d}` for i = 1..m-1.
    pub relay_destination: Vec<f64>,
}

impl LinkPowers {
    /// Each entry has power 1 / (number of transmitters on the link), so
    /// every receiving node sees unit signal power from unit-power symbols.
    pub fn unit_received(topology: &Topology) -> Self {
        let r = topology.relay_groups();
        Self {
            source_relay: 1.0 / topology.sources() as f64,
            relay_relay: r[..r.len() - 1].iter().map(|&n| 1.0 / n as f64).collect(),
            source_destination: 1.0 / topology.sources() as f64,
            relay_destination: r.iter().map(|&n| 1.0 / n as f64).collect(),
        }
    }

    /// Every entry with the same power.
    pub fn uniform(topology: &Topology, power: f64) -> Self {
        let groups = topology.relay_groups().len();
        Self {
            source_relay: power,
            relay_relay: vec![power; groups - 1],
            source_destination: power,
            relay_destination: vec![power; groups],
        }
    }

    fn validate(&self, topology: &Topology) -> Result<()> {
        let groups = topology.relay_groups().len();
        if self.relay_relay.len() != groups - 1 || self.relay_destination.len() != groups {
            return Err(Error::dimension(
                "link powers",
                format!("{} relay-relay and {} relay-destination links", groups - 1, groups),
                format!("{} and {}", self.relay_relay.len(), self.relay_destination.len()),
            ));
        }
        let all = std::iter::once(self.source_relay)
            .chain(self.relay_relay.iter().copied())
            .chain(std::iter::once(self.source_destination))
            .chain(self.relay_destination.iter().copied());
        for p in all {
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::parameter(
                    "link power",
                    format!("must be finite and > 0, got {p}"),
                ));
            }
        }
        Ok(())
    }

    /// Average signal power per destination entry for unit-power
    /// transmitters, averaged over the `m` destination slots.
    pub fn received_power_per_destination(&self, topology: &Topology) -> f64 {
        let mut total = topology.sources() as f64 * self.source_destination;
        for (&n, &p) in topology.relay_groups().iter().zip(&self.relay_destination) {
            total += n as f64 * p;
        }
        total / topology.hops() as f64
    }

    /// E[H_d^H H_d] for the stacked channel (diagonal, by independence).
    pub fn stacked_correlation(&self, topology: &Topology) -> ComplexMatrix {
        let n = topology.stacked_cols();
        let mut diag = vec![Complex64::new(0.0, 0.0); n];
        let nd = topology.destinations() as f64;
        for phase in 1..=topology.hops() {
            let p = if phase == 1 {
                self.source_destination
            } else {
                self.relay_destination[phase - 2]
            };
            for c in topology.stacked_col_range(phase) {
                diag[c] = Complex64::new(nd * p, 0.0);
            }
        }
        ComplexMatrix::from_diagonal(&DVector::from_vec(diag))
    }
}

/// Channel matrices of every link at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `H_{s,r(1)}`, N_r(1) x N_s.
    pub source_relay: ComplexMatrix,
    /// `H_{r(i-1),r(i)}` for i = 2..m-1, N_r(i) x N_r(i-1).
    pub relay_relay: Vec<ComplexMatrix>,
    /// `H_{s,d}`, N_d x N_s.
    pub source_destination: ComplexMatrix,
    /// `H_{r(i),d}` for i = 1..m-1, N_d x N_r(i).
    pub relay_destination: Vec<ComplexMatrix>,
}

impl ChannelRealization {
    pub fn check(&self, topology: &Topology) -> Result<()> {
        let r = topology.relay_groups();
        let (ns, nd) = (topology.sources(), topology.destinations());
        let mut expect = vec![("H_{s,r(1)}", &self.source_relay, (r[0], ns))];
        if self.relay_relay.len() != r.len() - 1 || self.relay_destination.len() != r.len() {
            return Err(Error::dimension(
                "channel realization",
                format!("{} relay groups", r.len()),
                format!(
                    "{} relay-relay, {} relay-destination links",
                    self.relay_relay.len(),
                    self.relay_destination.len()
                ),
            ));
        }
        for (i, h) in self.relay_relay.iter().enumerate() {
            expect.push(("H_{r(i-1),r(i)}", h, (r[i + 1], r[i])));
        }
        expect.push(("H_{s,d}", &self.source_destination, (nd, ns)));
        for (i, h) in self.relay_destination.iter().enumerate() {
            expect.push(("H_{r(i),d}", h, (nd, r[i])));
        }
        for (name, h, shape) in expect {
            if h.shape() != shape {
                return Err(Error::dimension(name, format!("{shape:?}"), format!("{:?}", h.shape())));
            }
        }
        Ok(())
    }

    /// The stacked destination channel `H_d` (m·N_d x (N_r+N_s)): one block
    /// per destination slot on the block diagonal, zeros elsewhere.
    pub fn stacked(&self, topology: &Topology) -> ComplexMatrix {
        let mut h = ComplexMatrix::zeros(topology.stacked_rows(), topology.stacked_cols());
        for phase in 1..=topology.hops() {
            let block = if phase == 1 {
                &self.source_destination
            } else {
                &self.relay_destination[phase - 2]
            };
            let rows = topology.stacked_row_range(phase);
            let cols = topology.stacked_col_range(phase);
            h.view_mut((rows.start, cols.start), (rows.len(), cols.len()))
                .copy_from(block);
        }
        h
    }
}

/// Fading processes for every link of the network.
#[derive(Debug, Clone)]
pub struct NetworkChannels {
    source_relay: FadingProcess,
    relay_relay: Vec<FadingProcess>,
    source_destination: FadingProcess,
    relay_destination: Vec<FadingProcess>,
}

impl NetworkChannels {
    pub fn draw(
        rng: &mut RngStream,
        topology: &Topology,
        powers: &LinkPowers,
        kind: FadingKind,
        doppler: f64,
    ) -> Result<Self> {
        powers.validate(topology)?;
        let spec = |p: f64| FadingSpec {
            kind,
            doppler,
            entry_power: p,
        };
        let r = topology.relay_groups();
        let (ns, nd) = (topology.sources(), topology.destinations());
        // Destination links first so H_d does not depend on the relay links.
        let source_destination = FadingProcess::new(rng, nd, ns, spec(powers.source_destination))?;
        let relay_destination = r
            .iter()
            .zip(&powers.relay_destination)
            .map(|(&n, &p)| FadingProcess::new(rng, nd, n, spec(p)))
            .collect::<Result<Vec<_>>>()?;
        let source_relay = FadingProcess::new(rng, r[0], ns, spec(powers.source_relay))?;
        let relay_relay = r
            .windows(2)
            .zip(&powers.relay_relay)
            .map(|(w, &p)| FadingProcess::new(rng, w[1], w[0], spec(p)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            source_relay,
            relay_relay,
            source_destination,
            relay_destination,
        })
    }

    pub fn is_static(&self) -> bool {
        self.source_destination.is_static() && self.relay_destination.iter().all(FadingProcess::is_static)
    }

    pub fn sample(&self, t: f64) -> ChannelRealization {
        ChannelRealization {
            source_relay: self.source_relay.sample(t),
            relay_relay: self.relay_relay.iter().map(|p| p.sample(t)).collect(),
            source_destination: self.source_destination.sample(t),
            relay_destination: self.relay_destination.iter().map(|p| p.sample(t)).collect(),
        }
    }

    /// Stacked `H_d` at time `t`, written into `out`.
    pub fn stacked_into(&self, topology: &Topology, t: f64, out: &mut ComplexMatrix) {
        for phase in 1..=topology.hops() {
            let process = if phase == 1 {
                &self.source_destination
            } else {
                &self.relay_destination[phase - 2]
            };
            let rows = topology.stacked_row_range(phase);
            let cols = topology.stacked_col_range(phase);
            let mut block = ComplexMatrix::zeros(rows.len(), cols.len());
            process.sample_into(t, &mut block);
            out.view_mut((rows.start, cols.start), (rows.len(), cols.len()))
                .copy_from(&block);
        }
    }
}

/// Signals produced by one transmission phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOutput {
    /// Signal received by relay group `i`; `None` in the last phase.
    pub relay: Option<ComplexVector>,
    pub relay_noise: Option<ComplexVector>,
    /// Destination slot `d^i`.
    pub destination: ComplexVector,
    pub destination_noise: ComplexVector,
}

/// Runs phase `phase` (1-based). `previous` is the source vector `s` in
/// phase 1 and the relay signal `x_{i-1}` afterwards.
pub fn propagate_phase(
    topology: &Topology,
    phase: usize,
    previous: &ComplexVector,
    channels: &ChannelRealization,
    amplification: &Amplification,
    rng: &mut RngStream,
    noise_variance: f64,
) -> Result<PhaseOutput> {
    let m = topology.hops();
    if !(1..=m).contains(&phase) {
        return Err(Error::parameter("phase", format!("must be in 1..={m}, got {phase}")));
    }
    channels.check(topology)?;
    let expected = topology.transmitters(phase);
    if previous.len() != expected {
        return Err(Error::dimension("propagate_phase input", expected, previous.len()));
    }
    let nd = topology.destinations();

    let (to_relay, to_destination, transmitted) = if phase == 1 {
        (
            Some(&channels.source_relay),
            &channels.source_destination,
            previous.clone(),
        )
    } else {
        let forwarded = amplification.group(phase - 1) * previous;
        let next = if phase < m {
            Some(&channels.relay_relay[phase - 2])
        } else {
            None
        };
        (next, &channels.relay_destination[phase - 2], forwarded)
    };

    let (relay, relay_noise) = match to_relay {
        Some(h) => {
            let v = complex_gaussian_vector(rng, h.nrows(), noise_variance)?;
            (Some(h * &transmitted + &v), Some(v))
        }
        None => (None, None),
    };
    let v_d = complex_gaussian_vector(rng, nd, noise_variance)?;
    let destination = to_destination * &transmitted + &v_d;
    Ok(PhaseOutput {
        relay,
        relay_noise,
        destination,
        destination_noise: v_d,
    })
}

/// The stacked destination model of one transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedSystem {
    /// `[d^m; ...; d^1]`.
    pub received: ComplexVector,
    /// `[x_{m-1}; ...; x_1; s]`.
    pub stacked_input: ComplexVector,
    pub channel: ComplexMatrix,
    pub amplification: ComplexMatrix,
    /// `[v_d^m; ...; v_d^1]`.
    pub noise: ComplexVector,
}

impl StackedSystem {
    /// `‖d - H_d A y - v_d‖`; zero up to rounding for a consistent system.
    pub fn residual(&self) -> f64 {
        (&self.received - &self.channel * &self.amplification * &self.stacked_input - &self.noise).norm()
    }
}

/// Collects the per-phase outputs of one transmission into the stacked model.
pub fn assemble_stacked(
    topology: &Topology,
    channels: &ChannelRealization,
    amplification: &Amplification,
    source: &ComplexVector,
    phases: &[PhaseOutput],
) -> Result<StackedSystem> {
    let m = topology.hops();
    if phases.len() != m {
        return Err(Error::dimension("assemble_stacked phases", m, phases.len()));
    }
    let mut received = ComplexVector::zeros(topology.stacked_rows());
    let mut noise = ComplexVector::zeros(topology.stacked_rows());
    let mut stacked_input = ComplexVector::zeros(topology.stacked_cols());
    for (idx, out) in phases.iter().enumerate() {
        let phase = idx + 1;
        let rows = topology.stacked_row_range(phase);
        received.rows_mut(rows.start, rows.len()).copy_from(&out.destination);
        noise.rows_mut(rows.start, rows.len()).copy_from(&out.destination_noise);
        // The signal transmitted in phase i is the one received in phase i-1.
        let transmitted = if phase == 1 {
            source
        } else {
            phases[idx - 1]
                .relay
                .as_ref()
                .ok_or_else(|| Error::dimension("assemble_stacked", "relay output", "none"))?
        };
        let cols = topology.stacked_col_range(phase);
        stacked_input.rows_mut(cols.start, cols.len()).copy_from(transmitted);
    }
    Ok(StackedSystem {
        received,
        stacked_input,
        channel: channels.stacked(topology),
        amplification: amplification.stacked(topology),
        noise,
    })
}

/// Runs all `m` phases for source vector `source` and stacks the result.
pub fn transmit(
    topology: &Topology,
    channels: &ChannelRealization,
    amplification: &Amplification,
    source: &ComplexVector,
    rng: &mut RngStream,
    noise_variance: f64,
) -> Result<StackedSystem> {
    let mut phases = Vec::with_capacity(topology.hops());
    let mut previous = source.clone();
    for phase in 1..=topology.hops() {
        let out = propagate_phase(topology, phase, &previous, channels, amplification, rng, noise_variance)?;
        if let Some(x) = &out.relay {
            previous = x.clone();
        }
        phases.push(out);
    }
    assemble_stacked(topology, channels, amplification, source, &phases)
}

/// A packet of QPSK symbols, one row per transmitting node, with the
/// training preamble in the leading columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    symbols: ComplexMatrix,
    training: usize,
}

impl Packet {
    pub fn len(&self) -> usize {
        self.symbols.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.ncols() == 0
    }

    pub fn training_len(&self) -> usize {
        self.training
    }

    pub fn data_len(&self) -> usize {
        self.len() - self.training
    }

    pub fn is_training(&self, index: usize) -> bool {
        index < self.training
    }

    pub fn symbols(&self) -> &ComplexMatrix {
        &self.symbols
    }

    /// Symbol column sent at time `index`.
    pub fn column(&self, index: usize) -> ComplexVector {
        self.symbols.column(index).into_owned()
    }
}

/// Draws a packet of `total` i.i.d. uniform QPSK symbols per node, the
/// first `training` of which form the known preamble.
pub fn make_packet(rng: &mut RngStream, nodes: usize, total: usize, training: usize) -> Result<Packet> {
    if training == 0 {
        return Err(Error::parameter("n_t", "training length must be > 0"));
    }
    if training > total {
        return Err(Error::parameter(
            "n_t",
            format!("training length n_t = {training} exceeds packet length n_p = {total}"),
        ));
    }
    let symbols = ComplexMatrix::from_fn(nodes, total, |_, _| qpsk_mod([rng.bit(), rng.bit()]));
    Ok(Packet { symbols, training })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn identity_channels(t: &Topology) -> ChannelRealization {
        let r = t.relay_groups();
        let eye = |a: usize, b: usize| ComplexMatrix::identity(a, b);
        ChannelRealization {
            source_relay: eye(r[0], t.sources()),
            relay_relay: r.windows(2).map(|w| eye(w[1], w[0])).collect(),
            source_destination: eye(t.destinations(), t.sources()),
            relay_destination: r.iter().map(|&n| eye(t.destinations(), n)).collect(),
        }
    }

    #[test]
    fn reference_dimensions() {
        let t = Topology::reference();
        assert_eq!(t.hops(), 3);
        assert_eq!(t.stacked_rows(), 9);
        assert_eq!(t.stacked_cols(), 10);
        let mut rng = RngStream::new(1, 1);
        let nc = NetworkChannels::draw(
            &mut rng,
            &t,
            &LinkPowers::unit_received(&t),
            FadingKind::QuasiStatic,
            0.0,
        )
        .unwrap();
        assert_eq!(nc.sample(0.0).stacked(&t).shape(), (9, 10));
    }

    #[test]
    fn smallest_topology_has_zero_off_blocks() {
        let t = Topology::new(1, vec![1], 1).unwrap();
        let mut rng = RngStream::new(2, 2);
        let ch = NetworkChannels::draw(
            &mut rng,
            &t,
            &LinkPowers::uniform(&t, 1.0),
            FadingKind::QuasiStatic,
            0.0,
        )
        .unwrap()
        .sample(0.0);
        let h = ch.stacked(&t);
        assert_eq!(h.shape(), (2, 2));
        assert_eq!(h[(0, 1)], c(0.0));
        assert_eq!(h[(1, 0)], c(0.0));
        assert_eq!(h[(0, 0)], ch.relay_destination[0][(0, 0)]);
        assert_eq!(h[(1, 1)], ch.source_destination[(0, 0)]);
    }

    #[test]
    fn invalid_topologies() {
        assert!(Topology::new(2, vec![], 3).is_err());
        assert!(Topology::new(0, vec![1], 3).is_err());
        assert!(Topology::new(2, vec![4, 0], 3).is_err());
    }

    #[test]
    fn noiseless_identity_phase_one() {
        let t = Topology::new(2, vec![2], 2).unwrap();
        let ch = identity_channels(&t);
        let a = Amplification::uniform(&t, 1.0).unwrap();
        let s = ComplexVector::from_vec(vec![Complex64::new(1.0, -1.0), Complex64::new(-0.5, 2.0)]);
        let out = propagate_phase(&t, 1, &s, &ch, &a, &mut RngStream::new(0, 0), 0.0).unwrap();
        assert_eq!(out.destination, s);
        assert_eq!(out.relay.unwrap(), s);
    }

    #[test]
    fn scalar_two_hop_composition() {
        let t = Topology::new(1, vec![1], 1).unwrap();
        let (h1, h2, amp) = (Complex64::new(0.3, -0.7), Complex64::new(-1.2, 0.4), 1.7);
        let ch = ChannelRealization {
            source_relay: ComplexMatrix::from_element(1, 1, h1),
            relay_relay: vec![],
            source_destination: ComplexMatrix::from_element(1, 1, c(0.9)),
            relay_destination: vec![ComplexMatrix::from_element(1, 1, h2)],
        };
        let a = Amplification::uniform(&t, amp).unwrap();
        let s = ComplexVector::from_element(1, Complex64::new(0.5, 0.5));
        let sys = transmit(&t, &ch, &a, &s, &mut RngStream::new(0, 0), 0.0).unwrap();
        let expected = h2 * amp * h1 * s[0];
        assert!((sys.received[0] - expected).norm() < 1e-15);
        assert!((sys.received[1] - c(0.9) * s[0]).norm() < 1e-15);
    }

    #[test]
    fn three_hop_noiseless_matches_block_oracle() {
        let t = Topology::reference();
        let mut rng = RngStream::new(31, 0);
        let ch = NetworkChannels::draw(
            &mut rng,
            &t,
            &LinkPowers::uniform(&t, 1.0),
            FadingKind::QuasiStatic,
            0.0,
        )
        .unwrap()
        .sample(0.0);
        let a = Amplification::new(&t, vec![vec![0.5, 1.0, 1.5, 2.0], vec![1.1, 0.9, 0.8, 1.2]]).unwrap();
        let s = ComplexVector::from_fn(2, |_, _| rng.complex_normal(1.0));
        let sys = transmit(&t, &ch, &a, &s, &mut rng, 0.0).unwrap();

        // Independent evaluation of the phase equations.
        let x1 = &ch.source_relay * &s;
        let x2 = &ch.relay_relay[0] * a.group(1) * &x1;
        let d1 = &ch.source_destination * &s;
        let d2 = &ch.relay_destination[0] * a.group(1) * &x1;
        let d3 = &ch.relay_destination[1] * a.group(2) * &x2;
        let expected: Vec<Complex64> = d3.iter().chain(d2.iter()).chain(d1.iter()).copied().collect();
        let y: Vec<Complex64> = x2.iter().chain(x1.iter()).chain(s.iter()).copied().collect();
        for (got, want) in sys.received.iter().zip(&expected) {
            assert!((got - want).norm() < 1e-12);
        }
        for (got, want) in sys.stacked_input.iter().zip(&y) {
            assert!((got - want).norm() < 1e-12);
        }
        let via_stack = &sys.channel * &sys.amplification * &sys.stacked_input;
        assert!((&via_stack - &sys.received).norm() < 1e-12);
    }

    #[test]
    fn noisy_stacked_identity_holds() {
        let t = Topology::new(3, vec![2, 5, 3], 2).unwrap();
        let mut rng = RngStream::new(90, 0);
        let ch = NetworkChannels::draw(
            &mut rng,
            &t,
            &LinkPowers::unit_received(&t),
            FadingKind::QuasiStatic,
            0.0,
        )
        .unwrap()
        .sample(0.0);
        let a = Amplification::uniform(&t, 1.3).unwrap();
        let s = ComplexVector::from_fn(3, |_, _| rng.complex_normal(1.0));
        let sys = transmit(&t, &ch, &a, &s, &mut rng, 0.2).unwrap();
        assert!(sys.residual() <= 1e-12, "residual {}", sys.residual());
        // Off-block entries stay exactly zero.
        for phase in 1..=t.hops() {
            let rows = t.stacked_row_range(phase);
            for c in 0..t.stacked_cols() {
                if !t.stacked_col_range(phase).contains(&c) {
                    for r in rows.clone() {
                        assert_eq!(sys.channel[(r, c)], Complex64::new(0.0, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn unit_amplification_is_identity() {
        let t = Topology::reference();
        let a = Amplification::uniform(&t, 1.0).unwrap();
        assert_eq!(a.stacked(&t), ComplexMatrix::identity(10, 10));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let t = Topology::reference();
        let ch = identity_channels(&t);
        let a = Amplification::uniform(&t, 1.0).unwrap();
        let wrong = ComplexVector::zeros(3);
        assert!(matches!(
            propagate_phase(&t, 1, &wrong, &ch, &a, &mut RngStream::new(0, 0), 0.0),
            Err(Error::Dimension { .. })
        ));
        assert!(propagate_phase(&t, 4, &ComplexVector::zeros(2), &ch, &a, &mut RngStream::new(0, 0), 0.0).is_err());
    }

    #[test]
    fn packet_layout() {
        let mut rng = RngStream::new(5, 5);
        let p = make_packet(&mut rng, 10, 1000, 100).unwrap();
        assert_eq!(p.data_len(), 900);
        assert!(p.is_training(99) && !p.is_training(100));
        assert!(p.symbols().iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
        let col = p.column(0);
        assert!((col.norm_squared() - 10.0).abs() < 1e-12);

        let all = make_packet(&mut rng, 2, 50, 50).unwrap();
        assert_eq!(all.data_len(), 0);
        assert!(make_packet(&mut rng, 2, 10, 11).is_err());
    }

    #[test]
    fn received_power_reference() {
        let t = Topology::reference();
        assert!((LinkPowers::unit_received(&t).received_power_per_destination(&t) - 1.0).abs() < 1e-15);
        assert!((LinkPowers::uniform(&t, 1.0).received_power_per_destination(&t) - 10.0 / 3.0).abs() < 1e-15);
    }
}
