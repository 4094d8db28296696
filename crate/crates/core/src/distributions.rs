//! Belief models over sincere profiles.
//!
//! Each voter's ranking is drawn independently for impartial culture,
//! Mallows models, mixtures and empirical pools. Impartial anonymous culture
//! and point masses are profile-level distributions only.

use std::fs;
use std::path::Path;

use itertools::Itertools;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::error::{Error, Result};
use crate::voting::{Candidate, Profile, Ranking};

/// Largest `m` for which impartial anonymous culture is supported (the
/// sampler tabulates all `m!` rankings).
pub const IAC_MAX_CANDIDATES: usize = 8;

/// Number of pairs of candidates ordered differently by the two rankings.
pub fn kendall_tau(a: &Ranking, b: &Ranking) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let pos_b = b.positions();
    let mapped: Vec<usize> = a.order().iter().map(|&c| pos_b[c]).collect();
    let mut inversions = 0;
    for i in 0..mapped.len() {
        for j in i + 1..mapped.len() {
            if mapped[i] > mapped[j] {
                inversions += 1;
            }
        }
    }
    Ok(inversions)
}

/// All `m!` rankings in lexicographic order.
pub fn all_rankings(m: usize) -> Vec<Ranking> {
    (0..m)
        .permutations(m)
        .map(Ranking::from_order_unchecked)
        .collect()
}

/// Mallows φ-model around a reference ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct MallowsModel {
    sigma: Ranking,
    phi: f64,
}

impl MallowsModel {
    pub fn new(sigma: Ranking, phi: f64) -> Result<Self> {
        if !(phi > 0.0 && phi <= 1.0) {
            return Err(Error::invalid(format!(
                "Mallows dispersion must lie in (0, 1], got {phi}"
            )));
        }
        Ok(MallowsModel { sigma, phi })
    }

    pub fn sigma(&self) -> &Ranking {
        &self.sigma
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn m(&self) -> usize {
        self.sigma.len()
    }

    /// Normalizing constant, `prod_{i=1..m} (1 - phi^i) / (1 - phi)`.
    pub fn normalizer(&self) -> f64 {
        let m = self.m();
        if self.phi == 1.0 {
            return (1..=m).map(|i| i as f64).product();
        }
        (1..=m)
            .map(|i| (1.0 - self.phi.powi(i as i32)) / (1.0 - self.phi))
            .product()
    }

    pub fn pmf(&self, r: &Ranking) -> Result<f64> {
        let dist = kendall_tau(r, &self.sigma)?;
        Ok(self.phi.powi(dist as i32) / self.normalizer())
    }

    /// Repeated insertion: the `i`-th reference candidate is inserted into
    /// the partial ranking with `k` of the earlier candidates below it with
    /// probability proportional to `phi^k`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Ranking {
        let m = self.m();
        let mut order: Vec<Candidate> = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for (i, &item) in self.sigma.order().iter().enumerate() {
            weights.clear();
            let mut w = 1.0;
            for _ in 0..=i {
                weights.push(w);
                w *= self.phi;
            }
            let total: f64 = weights.iter().sum();
            let mut u = rng.random::<f64>() * total;
            let mut below = i;
            for (k, &wk) in weights.iter().enumerate() {
                if u < wk {
                    below = k;
                    break;
                }
                u -= wk;
            }
            order.insert(i - below, item);
        }
        Ranking::from_order_unchecked(order)
    }
}

/// Finite mixture of Mallows models over the same candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct MallowsMixture {
    components: Vec<MallowsModel>,
    weights: Vec<f64>,
}

impl MallowsMixture {
    pub fn new(components: Vec<MallowsModel>, weights: Vec<f64>) -> Result<Self> {
        if components.is_empty() || components.len() != weights.len() {
            return Err(Error::invalid(format!(
                "mixture needs matching non-empty components and weights ({} vs {})",
                components.len(),
                weights.len()
            )));
        }
        let m = components[0].m();
        if let Some(c) = components.iter().find(|c| c.m() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: c.m(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("mixture weights must be non-negative"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "mixture weights sum to {sum}, not 1"
            )));
        }
        Ok(MallowsMixture {
            components,
            weights,
        })
    }

    pub fn components(&self) -> &[MallowsModel] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn m(&self) -> usize {
        self.components[0].m()
    }

    pub fn pmf(&self, r: &Ranking) -> Result<f64> {
        let mut p = 0.0;
        for (c, w) in self.components.iter().zip(&self.weights) {
            p += w * c.pmf(r)?;
        }
        Ok(p)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Ranking {
        let pick = WeightedIndex::new(&self.weights)
            .expect("weights validated at construction")
            .sample(rng);
        self.components[pick].sample(rng)
    }

    /// Reads `WEIGHT PHI r0,r1,...` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut components = Vec::new();
        let mut weights = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(parse_err(format!(
                    "expected `WEIGHT PHI RANKING`, found `{line}`"
                )));
            }
            let w: f64 = fields[0]
                .parse()
                .map_err(|_| parse_err(format!("bad weight `{}`", fields[0])))?;
            let phi: f64 = fields[1]
                .parse()
                .map_err(|_| parse_err(format!("bad dispersion `{}`", fields[1])))?;
            let sigma: Ranking = fields[2].parse().map_err(|e| parse_err(format!("{e}")))?;
            components.push(MallowsModel::new(sigma, phi).map_err(|e| parse_err(format!("{e}")))?);
            weights.push(w);
        }
        MallowsMixture::new(components, weights)
    }
}

/// A non-empty multiset of complete ballots to resample from.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPool {
    m: usize,
    ballots: Vec<Ranking>,
}

impl EmpiricalPool {
    pub fn new(m: usize, ballots: Vec<Ranking>) -> Result<Self> {
        if ballots.is_empty() {
            return Err(Error::EmptyPool);
        }
        if let Some(b) = ballots.iter().find(|b| b.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: b.len(),
            });
        }
        Ok(EmpiricalPool { m, ballots })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ballots(&self) -> &[Ranking] {
        &self.ballots
    }

    pub fn len(&self) -> usize {
        self.ballots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ballots.is_empty()
    }
}

/// A sampleable belief about the sincere voters.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    ImpartialCulture { m: usize },
    ImpartialAnonymousCulture { m: usize },
    Mallows(MallowsModel),
    Mixture(MallowsMixture),
    Empirical(EmpiricalPool),
    PointMass(Profile),
}

impl DistributionSpec {
    pub fn m(&self) -> usize {
        match self {
            DistributionSpec::ImpartialCulture { m }
            | DistributionSpec::ImpartialAnonymousCulture { m } => *m,
            DistributionSpec::Mallows(model) => model.m(),
            DistributionSpec::Mixture(mix) => mix.m(),
            DistributionSpec::Empirical(pool) => pool.m(),
            DistributionSpec::PointMass(p) => p.m(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DistributionSpec::ImpartialCulture { .. } => "ic",
            DistributionSpec::ImpartialAnonymousCulture { .. } => "iac",
            DistributionSpec::Mallows(_) => "mallows",
            DistributionSpec::Mixture(_) => "mixture",
            DistributionSpec::Empirical(_) => "ballots",
            DistributionSpec::PointMass(_) => "point",
        }
    }
}

/// Draws one ranking. Profile-level distributions (IAC, point mass) are
/// rejected.
pub fn sample_ranking<R: Rng + ?Sized>(spec: &DistributionSpec, rng: &mut R) -> Result<Ranking> {
    match spec {
        DistributionSpec::ImpartialCulture { m } => {
            let mut order: Vec<Candidate> = (0..*m).collect();
            order.shuffle(rng);
            Ok(Ranking::from_order_unchecked(order))
        }
        DistributionSpec::Mallows(model) => Ok(model.sample(rng)),
        DistributionSpec::Mixture(mix) => Ok(mix.sample(rng)),
        DistributionSpec::Empirical(pool) => {
            Ok(pool.ballots.choose(rng).expect("pool is non-empty").clone())
        }
        DistributionSpec::ImpartialAnonymousCulture { .. } | DistributionSpec::PointMass(_) => {
            Err(Error::Unsupported(format!(
                "`{}` only defines whole profiles, not single rankings",
                spec.name()
            )))
        }
    }
}

/// Draws a profile of `n` sincere votes.
pub fn sample_profile<R: Rng + ?Sized>(
    spec: &DistributionSpec,
    n: usize,
    rng: &mut R,
) -> Result<Profile> {
    if n == 0 {
        return Err(Error::invalid("a sampled profile needs at least one voter"));
    }
    match spec {
        DistributionSpec::PointMass(profile) => {
            if profile.n() != n {
                return Err(Error::invalid(format!(
                    "point-mass profile has {} voters, {n} requested",
                    profile.n()
                )));
            }
            Ok(profile.clone())
        }
        DistributionSpec::ImpartialAnonymousCulture { m } => sample_iac(*m, n, rng),
        _ => {
            let votes = (0..n)
                .map(|_| sample_ranking(spec, rng))
                .collect::<Result<Vec<_>>>()?;
            Profile::new(spec.m(), votes)
        }
    }
}

/// Uniform voting situation: a uniform composition of `n` into `m!` parts,
/// read off a uniform choice of `m! - 1` bar positions among `n + m! - 1`
/// slots.
fn sample_iac<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<Profile> {
    if m > IAC_MAX_CANDIDATES {
        return Err(Error::Unsupported(format!(
            "impartial anonymous culture is limited to {IAC_MAX_CANDIDATES} candidates"
        )));
    }
    let table = all_rankings(m);
    let parts = table.len();
    let slots = n + parts - 1;
    let mut bars = rand::seq::index::sample(rng, slots, parts - 1).into_vec();
    bars.sort_unstable();
    let mut votes = Vec::with_capacity(n);
    let mut prev: isize = -1;
    for (k, &bar) in bars.iter().chain(std::iter::once(&slots)).enumerate() {
        let count = (bar as isize - prev - 1) as usize;
        votes.extend(std::iter::repeat_n(table[k].clone(), count));
        prev = bar as isize;
    }
    Profile::new(m, votes)
}

/// What to do with ballots that rank only a prefix of the candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TruncationPolicy {
    #[default]
    Drop,
    /// Complete each copy independently with a uniformly random order of the
    /// unranked candidates.
    UniformCompletion,
}

/// One `COUNT: i1,i2,...` record of a ballot file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallotRecord {
    pub count: u64,
    pub prefix: Vec<Candidate>,
}

/// Parsed ballot file: header `m=<int>`, `#` comments, `COUNT: i1,i2,...`
/// records with 0-based candidate indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallotFile {
    pub m: usize,
    pub records: Vec<BallotRecord>,
}

impl BallotFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut m: Option<usize> = None;
        let mut records = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let Some(m) = m else {
                let value = line
                    .strip_prefix("m=")
                    .ok_or_else(|| err(format!("expected header `m=<int>`, found `{line}`")))?;
                let parsed: usize = value
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("bad candidate count `{value}`")))?;
                if parsed < 2 {
                    return Err(err("need at least two candidates".into()));
                }
                m = Some(parsed);
                continue;
            };
            let (count, body) = line
                .split_once(':')
                .ok_or_else(|| err(format!("expected `COUNT: i1,i2,...`, found `{line}`")))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| err(format!("bad count `{}`", count.trim())))?;
            let mut prefix = Vec::new();
            let mut seen = vec![false; m];
            for tok in body.split(',') {
                let tok = tok.trim();
                let c: usize = tok
                    .parse()
                    .map_err(|_| err(format!("bad candidate index `{tok}`")))?;
                if c >= m {
                    return Err(err(format!("unknown candidate {c} (m={m})")));
                }
                if std::mem::replace(&mut seen[c], true) {
                    return Err(err(format!("candidate {c} appears twice")));
                }
                prefix.push(c);
            }
            records.push(BallotRecord { count, prefix });
        }
        let m = m.ok_or(Error::EmptyPool)?;
        Ok(BallotFile { m, records })
    }

    /// Expands counts into complete rankings according to `policy`.
    pub fn rankings<R: Rng + ?Sized>(&self, policy: TruncationPolicy, rng: &mut R) -> Vec<Ranking> {
        let mut out = Vec::new();
        for rec in &self.records {
            if rec.prefix.len() == self.m {
                let r = Ranking::from_order_unchecked(rec.prefix.clone());
                out.extend(std::iter::repeat_n(r, rec.count as usize));
            } else if policy == TruncationPolicy::UniformCompletion {
                let tail: Vec<Candidate> =
                    (0..self.m).filter(|c| !rec.prefix.contains(c)).collect();
                for _ in 0..rec.count {
                    let mut rest = tail.clone();
                    rest.shuffle(rng);
                    let mut order = rec.prefix.clone();
                    order.extend(rest);
                    out.push(Ranking::from_order_unchecked(order));
                }
            }
        }
        out
    }

    /// The file's complete ballots as one profile, in file order.
    pub fn complete_profile(&self) -> Result<Profile> {
        if let Some(rec) = self.records.iter().find(|r| r.prefix.len() != self.m) {
            return Err(Error::invalid(format!(
                "profile files need complete ballots; found truncated ballot {:?}",
                rec.prefix
            )));
        }
        let votes = self
            .records
            .iter()
            .flat_map(|rec| {
                std::iter::repeat_n(
                    Ranking::from_order_unchecked(rec.prefix.clone()),
                    rec.count as usize,
                )
            })
            .collect();
        Profile::new(self.m, votes)
    }
}

/// Writes a profile in ballot-file format, one `1: ...` record per vote.
pub fn format_profile(profile: &Profile) -> String {
    let mut out = format!("m={}\n", profile.m());
    for v in profile.votes() {
        out.push_str(&format!("1: {v}\n"));
    }
    out
}

/// Parses ballot-file text into an empirical pool.
pub fn parse_ballots<R: Rng + ?Sized>(
    text: &str,
    policy: TruncationPolicy,
    rng: &mut R,
) -> Result<EmpiricalPool> {
    let file = BallotFile::parse(text)?;
    let ballots = file.rankings(policy, rng);
    EmpiricalPool::new(file.m, ballots)
}

/// Reads a ballot file into an empirical pool.
pub fn load_ballots<R: Rng + ?Sized>(
    path: impl AsRef<Path>,
    policy: TruncationPolicy,
    rng: &mut R,
) -> Result<EmpiricalPool> {
    let text = fs::read_to_string(path)?;
    parse_ballots(&text, policy, rng)
}

/// Mean 1-based rank of every candidate under the belief. Exact for IC, IAC,
/// point masses and empirical pools; estimated from `samples` draws for
/// Mallows models and mixtures.
pub fn expected_ranks<R: Rng + ?Sized>(
    spec: &DistributionSpec,
    samples: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let m = spec.m();
    let mean_of = |votes: &mut dyn Iterator<Item = Ranking>| -> Vec<f64> {
        let mut sums = vec![0.0; m];
        let mut count = 0usize;
        for v in votes {
            for (p, &c) in v.order().iter().enumerate() {
                sums[c] += (p + 1) as f64;
            }
            count += 1;
        }
        sums.into_iter().map(|s| s / count as f64).collect()
    };
    match spec {
        DistributionSpec::ImpartialCulture { .. }
        | DistributionSpec::ImpartialAnonymousCulture { .. } => Ok(vec![(m as f64 + 1.0) / 2.0; m]),
        DistributionSpec::PointMass(p) => {
            if p.is_empty() {
                return Err(Error::invalid("empty point-mass profile"));
            }
            Ok(mean_of(&mut p.votes().iter().cloned()))
        }
        DistributionSpec::Empirical(pool) => Ok(mean_of(&mut pool.ballots().iter().cloned())),
        DistributionSpec::Mallows(_) | DistributionSpec::Mixture(_) => {
            if samples == 0 {
                return Err(Error::invalid("expected-rank estimation needs samples"));
            }
            let draws = (0..samples)
                .map(|_| sample_ranking(spec, rng))
                .collect::<Result<Vec<_>>>()?;
            Ok(mean_of(&mut draws.into_iter()))
        }
    }
}

/// The candidate whose expected rank is the `k`-th smallest (1-based); ties
/// go to the lower index.
pub fn candidate_by_expected_rank<R: Rng + ?Sized>(
    spec: &DistributionSpec,
    k: usize,
    samples: usize,
    rng: &mut R,
) -> Result<Candidate> {
    let ranks = expected_ranks(spec, samples, rng)?;
    if k == 0 || k > ranks.len() {
        return Err(Error::invalid(format!(
            "expected rank {k} out of range 1..={}",
            ranks.len()
        )));
    }
    let mut order: Vec<Candidate> = (0..ranks.len()).collect();
    order.sort_by(|&a, &b| ranks[a].total_cmp(&ranks[b]).then(a.cmp(&b)));
    Ok(order[k - 1])
}
