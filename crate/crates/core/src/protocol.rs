//! Interactive gathering protocols between a sink and memoryless informants.
//!
//! The sink owns the support set and asks for individual codeword bits; an
//! informant only ever answers with one bit of its own codeword. Bits forced
//! by what the sink already knows are never asked for.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::{ceil_log2, closure, Codebook};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::support::{k_extension, DataVector, SupportSet};
use crate::Limits;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieRule {
    /// Lowest global bit index among the equally balanced candidates.
    #[default]
    LowestIndex,
    /// Uniform choice among the candidates, reproducible from the seed.
    SeededRandom(u64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AdversaryRule {
    /// Answer so that the rest of the run is as long as possible; ties go to
    /// the larger remaining set, then to 0. Realizes the deepest leaf of the
    /// sink's decision tree.
    #[default]
    WorstLeaf,
    /// Answer so that the remaining set is as large as possible; ties go to 0.
    MaxAmbiguity,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Responder {
    Honest(DataVector),
    Adversarial(AdversaryRule),
}

impl Responder {
    pub fn adversarial() -> Self {
        Responder::Adversarial(AdversaryRule::default())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProtocolId {
    BitSerial,
    RoundParallel,
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProtocolId::BitSerial => "bit-serial",
            ProtocolId::RoundParallel => "round-parallel",
        })
    }
}

impl std::str::FromStr for ProtocolId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bit-serial" => Ok(ProtocolId::BitSerial),
            "round-parallel" => Ok(ProtocolId::RoundParallel),
            other => Err(Error::InvalidArgument(format!("unknown protocol '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Query {
    /// 0-based informant.
    pub informant: usize,
    /// 0-based bit within the informant's codeword, most significant first.
    pub local_bit: usize,
    pub global_bit: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Round {
    pub queries: Vec<Query>,
    pub responses: Vec<u8>,
    pub mu_before: usize,
    pub mu_after: usize,
    pub sink_bits: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transcript {
    pub protocol: ProtocolId,
    pub block_length: usize,
    pub n_informants: usize,
    pub initial_ambiguity: usize,
    pub rounds: Vec<Round>,
    pub informant_bits: u64,
    pub per_informant_bits: Vec<u64>,
    pub sink_bits: u64,
    pub round_count: usize,
    pub final_set: SupportSet,
    pub decoded: Option<DataVector>,
}

impl Transcript {
    /// One line per round followed by the decoded vector.
    pub fn trace(&self) -> String {
        let mut out = String::new();
        for (l, r) in self.rounds.iter().enumerate() {
            let queries: Vec<String> = r
                .queries
                .iter()
                .map(|q| format!("{}.{}", q.informant + 1, q.local_bit + 1))
                .collect();
            let responses: Vec<String> = r.responses.iter().map(u8::to_string).collect();
            out.push_str(&format!(
                "round {} | query {} | response {} | {} -> {} | sink_bits +{}\n",
                l + 1,
                queries.join(","),
                responses.join(","),
                r.mu_before,
                r.mu_after,
                r.sink_bits
            ));
        }
        match &self.decoded {
            Some(x) => out.push_str(&format!("decoded {x}\n")),
            None => out.push_str("decoded none\n"),
        }
        out
    }
}

/// Sink cost of naming one of an informant's bit positions: `ceil(log2 w)`,
/// zero for widths up to 1.
pub fn addr_bits(width: usize) -> u64 {
    ceil_log2(width as u64) as u64
}

#[derive(Clone)]
enum Picker {
    Lowest,
    Random(Box<ChaCha8Rng>),
}

impl Picker {
    fn new(rule: TieRule) -> Self {
        match rule {
            TieRule::LowestIndex => Picker::Lowest,
            TieRule::SeededRandom(seed) => Picker::Random(Box::new(ChaCha8Rng::seed_from_u64(seed))),
        }
    }

    fn pick(&mut self, candidates: &[usize]) -> usize {
        match self {
            _ if candidates.len() == 1 => candidates[0],
            Picker::Lowest => candidates[0],
            Picker::Random(rng) => candidates[rng.gen_range(0..candidates.len())],
        }
    }
}

struct Engine<'a> {
    s: &'a SupportSet,
    book: Codebook,
    addr: Vec<u64>,
    informant_addr: u64,
}

fn split(codes: &[u64], members: &[usize], j: usize) -> [Vec<usize>; 2] {
    let mut parts = [Vec::new(), Vec::new()];
    for &m in members {
        parts[(codes[m] >> j & 1) as usize].push(m);
    }
    parts
}

impl<'a> Engine<'a> {
    fn new(s: &'a SupportSet) -> Self {
        let book = Codebook::new(s);
        let addr = book.layout.widths().iter().map(|&w| addr_bits(w)).collect();
        Engine {
            s,
            informant_addr: ceil_log2(s.n_informants() as u64) as u64,
            addr,
            book,
        }
    }

    fn undefined(&self, members: &[usize]) -> u64 {
        let codes: Vec<u64> = members.iter().map(|&m| self.book.codes[m]).collect();
        let (mask, _) = closure(&codes, self.book.full_mask());
        self.book.full_mask() & !mask
    }

    /// Most balanced undefined bit of `members`.
    fn balanced_bit(&self, members: &[usize], picker: &mut Picker) -> usize {
        let undefined = self.undefined(members);
        let mut best = usize::MAX;
        let mut candidates = Vec::new();
        for j in (0..self.book.layout.total_width()).filter(|j| undefined >> j & 1 == 1) {
            let ones = members
                .iter()
                .filter(|&&m| self.book.codes[m] >> j & 1 == 1)
                .count();
            let diff = (members.len() - ones).abs_diff(ones);
            if diff < best {
                best = diff;
                candidates.clear();
            }
            if diff == best {
                candidates.push(j);
            }
        }
        picker.pick(&candidates)
    }

    fn query(&self, j: usize) -> Query {
        let (informant, local_bit) = self.book.layout.locate(j);
        Query {
            informant,
            local_bit,
            global_bit: j,
        }
    }

    /// Worst-case number of bits Bit-Serial still needs from `members`.
    fn bit_serial_depth(&self, members: &[usize], picker: &Picker) -> u64 {
        if members.len() <= 1 {
            return 0;
        }
        let mut p = picker.clone();
        let j = self.balanced_bit(members, &mut p);
        let [zero, one] = split(&self.book.codes, members, j);
        1 + self
            .bit_serial_depth(&zero, &p)
            .max(self.bit_serial_depth(&one, &p))
    }

    /// Next Round-Parallel batch and the hypothesized worst-case answers it was chosen under.
    fn batch(&self, members: &[usize], picker: &mut Picker) -> (Vec<usize>, Vec<u8>) {
        let m = ceil_log2(members.len() as u64);
        let mut hyp = members.to_vec();
        let mut picks = Vec::new();
        let mut assumed = Vec::new();
        for _ in 0..m {
            if hyp.len() <= 1 {
                break;
            }
            let j = self.balanced_bit(&hyp, picker);
            let [zero, one] = split(&self.book.codes, &hyp, j);
            let b = u8::from(one.len() > zero.len());
            picks.push(j);
            assumed.push(b);
            hyp = if b == 1 { one } else { zero };
        }
        (picks, assumed)
    }

    fn pattern(&self, member: usize, picks: &[usize]) -> Vec<u8> {
        picks
            .iter()
            .map(|&j| (self.book.codes[member] >> j & 1) as u8)
            .collect()
    }

    /// Feasible answer vectors for a batch and the members consistent with each.
    fn groups(&self, members: &[usize], picks: &[usize]) -> Vec<(Vec<u8>, Vec<usize>)> {
        let mut groups: Vec<(Vec<u8>, Vec<usize>)> = Vec::new();
        for &m in members {
            let p = self.pattern(m, picks);
            match groups.iter_mut().find(|g| g.0 == p) {
                Some(g) => g.1.push(m),
                None => groups.push((p, vec![m])),
            }
        }
        groups.sort();
        groups
    }

    /// Worst-case number of bits Round-Parallel still needs from `members`.
    fn round_parallel_depth(&self, members: &[usize], picker: &Picker) -> u64 {
        if members.len() <= 1 {
            return 0;
        }
        let mut p = picker.clone();
        let (picks, _) = self.batch(members, &mut p);
        let worst = self
            .groups(members, &picks)
            .iter()
            .map(|(_, g)| self.round_parallel_depth(g, &p))
            .max()
            .unwrap_or(0);
        picks.len() as u64 + worst
    }

    fn honest_index(&self, r: &Responder) -> Result<Option<usize>> {
        match r {
            Responder::Honest(x) => self.s.require_member(x).map(Some),
            Responder::Adversarial(_) => Ok(None),
        }
    }

    fn finish(&self, protocol: ProtocolId, rounds: Vec<Round>, members: Vec<usize>) -> Transcript {
        let mut per_informant_bits = vec![0; self.s.n_informants()];
        for q in rounds.iter().flat_map(|r| &r.queries) {
            per_informant_bits[q.informant] += 1;
        }
        let tuples = members.iter().map(|&m| self.s.rank_tuples()[m].clone()).collect();
        let final_set = self.s.with_tuples(tuples);
        let decoded = (members.len() == 1).then(|| self.s.vector(members[0]));
        Transcript {
            protocol,
            block_length: 1,
            n_informants: self.s.n_informants(),
            initial_ambiguity: self.s.len(),
            informant_bits: per_informant_bits.iter().sum(),
            per_informant_bits,
            sink_bits: rounds.iter().map(|r| r.sink_bits).sum(),
            round_count: rounds.len(),
            rounds,
            final_set,
            decoded,
        }
    }

    fn bit_serial(&self, r: &Responder, tie: TieRule) -> Result<Transcript> {
        let honest = self.honest_index(r)?;
        let mut picker = Picker::new(tie);
        let mut members: Vec<usize> = (0..self.s.len()).collect();
        let mut rounds = Vec::new();
        while members.len() > 1 {
            let j = self.balanced_bit(&members, &mut picker);
            let parts = split(&self.book.codes, &members, j);
            let b = match (honest, r) {
                (Some(x), _) => (self.book.codes[x] >> j & 1) as usize,
                (None, Responder::Adversarial(rule)) => {
                    let key = |b: usize| {
                        let depth = match rule {
                            AdversaryRule::WorstLeaf => self.bit_serial_depth(&parts[b], &picker),
                            AdversaryRule::MaxAmbiguity => 0,
                        };
                        (depth, parts[b].len())
                    };
                    usize::from(key(1) > key(0))
                }
                (None, Responder::Honest(_)) => unreachable!(),
            };
            let q = self.query(j);
            rounds.push(Round {
                queries: vec![q],
                responses: vec![b as u8],
                mu_before: members.len(),
                mu_after: parts[b].len(),
                sink_bits: self.informant_addr + self.addr[q.informant],
            });
            members = parts[b].clone();
        }
        Ok(self.finish(ProtocolId::BitSerial, rounds, members))
    }

    fn round_parallel(&self, r: &Responder, tie: TieRule) -> Result<Transcript> {
        let honest = self.honest_index(r)?;
        let n = self.s.n_informants() as u64;
        let mut picker = Picker::new(tie);
        let mut members: Vec<usize> = (0..self.s.len()).collect();
        let mut rounds = Vec::new();
        while members.len() > 1 {
            let (picks, assumed) = self.batch(&members, &mut picker);
            let groups = self.groups(&members, &picks);
            let chosen = match (honest, r) {
                (Some(x), _) => {
                    let p = self.pattern(x, &picks);
                    groups
                        .iter()
                        .position(|g| g.0 == p)
                        .expect("honest pattern is feasible")
                }
                (None, Responder::Adversarial(rule)) => {
                    let key = |g: &(Vec<u8>, Vec<usize>)| {
                        let depth = match rule {
                            AdversaryRule::WorstLeaf => self.round_parallel_depth(&g.1, &picker),
                            AdversaryRule::MaxAmbiguity => 0,
                        };
                        (depth, g.1.len(), g.0 == assumed)
                    };
                    // First maximum in pattern order.
                    let mut best = 0;
                    for (i, g) in groups.iter().enumerate().skip(1) {
                        if key(g) > key(&groups[best]) {
                            best = i;
                        }
                    }
                    best
                }
                (None, Responder::Honest(_)) => unreachable!(),
            };
            let queries: Vec<Query> = picks.iter().map(|&j| self.query(j)).collect();
            let sink_bits =
                n * self.informant_addr + n + queries.iter().map(|q| self.addr[q.informant]).sum::<u64>();
            let (pattern, next) = groups[chosen].clone();
            rounds.push(Round {
                queries,
                responses: pattern,
                mu_before: members.len(),
                mu_after: next.len(),
                sink_bits,
            });
            members = next;
        }
        Ok(self.finish(ProtocolId::RoundParallel, rounds, members))
    }
}

/// Bit-Serial: each round asks for the undefined bit that splits the
/// remaining candidates most evenly.
pub fn run_bit_serial(s: &SupportSet, r: &Responder, tie: TieRule) -> Result<Transcript> {
    Engine::new(s).bit_serial(r, tie)
}

/// Round-Parallel: each round asks for `ceil(log2 mu)` bits at once, chosen
/// in sequence under the assumption that earlier picks got their worst-case answers.
pub fn run_round_parallel(s: &SupportSet, r: &Responder, tie: TieRule) -> Result<Transcript> {
    Engine::new(s).round_parallel(r, tie)
}

pub fn run_protocol(s: &SupportSet, protocol: ProtocolId, r: &Responder, tie: TieRule) -> Result<Transcript> {
    match protocol {
        ProtocolId::BitSerial => run_bit_serial(s, r, tie),
        ProtocolId::RoundParallel => run_round_parallel(s, r, tie),
    }
}

/// Bit-Serial over the `k`-extension. An honest responder carries a block
/// vector (see [`DataVector::block`]) when `k > 1`.
pub fn run_k_bit_serial(
    s: &SupportSet,
    k: usize,
    r: &Responder,
    tie: TieRule,
    limits: &Limits,
) -> Result<Transcript> {
    let ext = k_extension(s, k, limits)?;
    let mut t = run_bit_serial(&ext, r, tie)?;
    t.block_length = k;
    Ok(t)
}

/// Deterministic worst case of Bit-Serial: the depth of its decision tree.
pub fn greedy_worst_case(s: &SupportSet, tie: TieRule) -> u64 {
    let e = Engine::new(s);
    let members: Vec<usize> = (0..s.len()).collect();
    e.bit_serial_depth(&members, &Picker::new(tie))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub protocol: ProtocolId,
    pub runs: usize,
    pub max_informant_bits: u64,
    pub mean_informant_bits: Rational,
    /// Largest number of bits any honest run took from each informant.
    pub per_informant_worst: Vec<u64>,
    pub max_rounds: usize,
    pub max_sink_bits: u64,
    pub adversarial_informant_bits: u64,
    /// Every honest run decoded its own vector.
    pub lossless: bool,
    /// Adversarial total equals the honest maximum.
    pub adversary_matches: bool,
}

/// Runs `protocol` honestly on every member of `s` and once against the adversary.
pub fn worst_case_sweep(s: &SupportSet, protocol: ProtocolId, tie: TieRule) -> Result<SweepReport> {
    let engine = Engine::new(s);
    let run = |r: &Responder| match protocol {
        ProtocolId::BitSerial => engine.bit_serial(r, tie),
        ProtocolId::RoundParallel => engine.round_parallel(r, tie),
    };
    let mut report = SweepReport {
        protocol,
        runs: s.len(),
        max_informant_bits: 0,
        mean_informant_bits: Rational::from_integer(0),
        per_informant_worst: vec![0; s.n_informants()],
        max_rounds: 0,
        max_sink_bits: 0,
        adversarial_informant_bits: 0,
        lossless: true,
        adversary_matches: false,
    };
    let mut total = 0u64;
    for x in s.vectors() {
        let t = run(&Responder::Honest(x.clone()))?;
        report.lossless &= t.decoded.as_ref() == Some(&x);
        total += t.informant_bits;
        report.max_informant_bits = report.max_informant_bits.max(t.informant_bits);
        for (w, b) in report.per_informant_worst.iter_mut().zip(&t.per_informant_bits) {
            *w = (*w).max(*b);
        }
        report.max_rounds = report.max_rounds.max(t.round_count);
        report.max_sink_bits = report.max_sink_bits.max(t.sink_bits);
    }
    report.mean_informant_bits = Rational::new(total as i64, s.len() as i64);
    report.adversarial_informant_bits = run(&Responder::adversarial())?.informant_bits;
    report.adversary_matches = report.adversarial_informant_bits == report.max_informant_bits;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShrinkDiagnostics {
    /// Per-round shortfall from the ideal shrink factor.
    pub eps: Vec<f64>,
    /// Largest per-round value, 0 for runs without rounds.
    pub eps_max: f64,
    /// Round bound implied by `eps_max`, `None` when vacuous (`eps_max >= 1`).
    pub bound: Option<u64>,
    pub holds: bool,
}

/// Per-round shrink analysis of a finished run.
///
/// Bit-Serial rounds use `eps_l = 1 - log2(mu_l / mu_{l+1})` and the bound
/// `ceil(log2 mu / (1 - eps))`. Round-Parallel rounds divide the log ratio by
/// the initial `I = ceil(log2 mu)`, giving `ceil(log2 mu / ((1 - eps) I))`,
/// which is 1 when `eps <= 0`.
pub fn round_shrink_diagnostics(tr: &Transcript) -> ShrinkDiagnostics {
    let mu = tr.initial_ambiguity as f64;
    let info = ceil_log2(tr.initial_ambiguity as u64) as f64;
    let scale = match tr.protocol {
        ProtocolId::BitSerial => 1.0,
        ProtocolId::RoundParallel => info.max(1.0),
    };
    let eps: Vec<f64> = tr
        .rounds
        .iter()
        .map(|r| 1.0 - (r.mu_before as f64 / r.mu_after as f64).log2() / scale)
        .collect();
    let eps_max = eps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if eps.is_empty() {
        return ShrinkDiagnostics {
            eps,
            eps_max: 0.0,
            bound: Some(0),
            holds: tr.round_count == 0,
        };
    }
    if eps_max >= 1.0 {
        return ShrinkDiagnostics {
            eps,
            eps_max,
            bound: None,
            holds: true,
        };
    }
    let raw = mu.log2() / ((1.0 - eps_max) * scale);
    let mut bound = (raw - 1e-9).ceil().max(0.0) as u64;
    if tr.protocol == ProtocolId::RoundParallel && eps_max <= 0.0 {
        bound = 1;
    }
    ShrinkDiagnostics {
        holds: tr.round_count as u64 <= bound,
        eps,
        eps_max,
        bound: Some(bound),
    }
}
