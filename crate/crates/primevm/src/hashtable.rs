//! Second-degree hashing of (table, key) spike pairs into a hash cluster,
//! feeding a one-shot memory onto the value register.

use crate::attractors::TrainedRegister;
use crate::error::{Error, Result};
use crate::memory::{nominal_weight, recall_bound, MemoryConnection};
use crate::pattern::Pattern;
use crate::substrate::SynapseMask;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::sync::Arc;

/// Hardwired AND branches: hash neuron k sums S(table)[i]·S(key)[j] over its branches.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondDegreeSpec {
    table_size: usize,
    key_size: usize,
    hash_size: usize,
    coverage: f64,
    seed: u64,
    offsets: Vec<usize>,
    branches: Vec<(u32, u32)>,
    // Branches indexed by table neuron: (key neuron, hash neuron).
    by_table_offsets: Vec<usize>,
    by_table: Vec<(u32, u32)>,
}

/// floor(1/c) branches per hash neuron, each a uniform (i, j) pair.
pub fn build_hash_net(
    table_size: usize,
    key_size: usize,
    hash_size: usize,
    c: f64,
    seed: u64,
) -> Result<SecondDegreeSpec> {
    if hash_size == 0 || !(c > 0.0 && c < 1.0) {
        return Err(Error::Coverage(format!(
            "hash size {hash_size} and coverage {c} must be positive, c < 1"
        )));
    }
    let per = (1.0 / c).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(hash_size);
    for _ in 0..hash_size {
        let row: Vec<(u32, u32)> = (0..per)
            .map(|_| {
                (
                    rng.gen_range(0..table_size as u32),
                    rng.gen_range(0..key_size as u32),
                )
            })
            .collect();
        rows.push(row);
    }
    Ok(SecondDegreeSpec::from_branches(
        table_size, key_size, c, seed, rows,
    ))
}

impl SecondDegreeSpec {
    pub fn from_branches(
        table_size: usize,
        key_size: usize,
        coverage: f64,
        seed: u64,
        rows: Vec<Vec<(u32, u32)>>,
    ) -> Self {
        let hash_size = rows.len();
        let mut offsets = vec![0];
        let mut branches = Vec::new();
        for row in rows {
            branches.extend(row);
            offsets.push(branches.len());
        }
        let mut counts = vec![0usize; table_size + 1];
        for &(i, _) in &branches {
            counts[i as usize + 1] += 1;
        }
        for i in 0..table_size {
            counts[i + 1] += counts[i];
        }
        let by_table_offsets = counts.clone();
        let mut fill = counts;
        let mut by_table = vec![(0, 0); branches.len()];
        for k in 0..hash_size {
            for &(i, j) in &branches[offsets[k]..offsets[k + 1]] {
                by_table[fill[i as usize]] = (j, k as u32);
                fill[i as usize] += 1;
            }
        }
        SecondDegreeSpec {
            table_size,
            key_size,
            hash_size,
            coverage,
            seed,
            offsets,
            branches,
            by_table_offsets,
            by_table,
        }
    }

    pub fn table_size(&self) -> usize {
        self.table_size
    }
    pub fn key_size(&self) -> usize {
        self.key_size
    }
    pub fn hash_size(&self) -> usize {
        self.hash_size
    }
    pub fn coverage(&self) -> f64 {
        self.coverage
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn branches(&self, k: usize) -> &[(u32, u32)] {
        &self.branches[self.offsets[k]..self.offsets[k + 1]]
    }

    /// Largest number of branches any single table or key neuron feeds.
    pub fn max_fanout(&self) -> usize {
        let mut t = vec![0usize; self.table_size];
        let mut k = vec![0usize; self.key_size];
        for &(i, j) in &self.branches {
            t[i as usize] += 1;
            k[j as usize] += 1;
        }
        t.into_iter().chain(k).max().unwrap_or(0)
    }

    /// out[k] += number of satisfied branches of k.
    pub fn accumulate(&self, table: &[u32], key: &[u32], out: &mut [f32]) {
        if table.is_empty() || key.is_empty() {
            return;
        }
        let mut key_on = vec![false; self.key_size];
        for &j in key {
            key_on[j as usize] = true;
        }
        for &i in table {
            let i = i as usize;
            for &(j, k) in &self.by_table[self.by_table_offsets[i]..self.by_table_offsets[i + 1]] {
                if key_on[j as usize] {
                    out[k as usize] += 1.0;
                }
            }
        }
    }

    /// (k, i, j) triples with a header line.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "second-degree table={} key={} hash={} coverage={} seed={}\n",
            self.table_size, self.key_size, self.hash_size, self.coverage, self.seed
        );
        for k in 0..self.hash_size {
            for &(i, j) in self.branches(k) {
                let _ = writeln!(s, "{k} {i} {j}");
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing header"))?;
        let mut fields = std::collections::HashMap::new();
        for tok in header.split_whitespace().skip(1) {
            if let Some((k, v)) = tok.split_once('=') {
                fields.insert(k, v);
            }
        }
        let get = |k: &str| -> Result<&str> {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| parse_err(1, &format!("header lacks `{k}`")))
        };
        let num = |k: &str| -> Result<usize> {
            get(k)?
                .parse()
                .map_err(|_| parse_err(1, &format!("bad `{k}`")))
        };
        let (ts, ks, hs) = (num("table")?, num("key")?, num("hash")?);
        let coverage: f64 = get("coverage")?
            .parse()
            .map_err(|_| parse_err(1, "bad coverage"))?;
        let seed: u64 = get("seed")?.parse().map_err(|_| parse_err(1, "bad seed"))?;
        let mut rows = vec![Vec::new(); hs];
        for (n, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| parse_err(n + 1, "bad triple")))
                .collect::<Result<_>>()?;
            if v.len() != 3 || v[0] >= hs || v[1] >= ts || v[2] >= ks {
                return Err(parse_err(n + 1, "triple out of range"));
            }
            rows[v[0]].push((v[1] as u32, v[2] as u32));
        }
        Ok(SecondDegreeSpec::from_branches(ts, ks, coverage, seed, rows))
    }
}

fn parse_err(line: usize, msg: &str) -> Error {
    Error::Parse {
        line,
        col: 1,
        msg: msg.to_string(),
    }
}

/// Hash neuron k is active iff some branch has both sources active.
pub fn hash_activate(sd: &SecondDegreeSpec, table: &Pattern, key: &Pattern) -> Pattern {
    let mut h = vec![0.0f32; sd.hash_size];
    sd.accumulate(table.active(), key.active(), &mut h);
    let active = h
        .iter()
        .enumerate()
        .filter(|(_, &x)| x >= 1.0)
        .map(|(k, _)| k as u32)
        .collect();
    Pattern::new(sd.hash_size, active).expect("indices are sorted")
}

/// Hash cluster plus the memory into the value register, default false.
#[derive(Clone, Debug)]
pub struct HashTableNet {
    pub sd: Arc<SecondDegreeSpec>,
    pub mem: MemoryConnection,
    pub value_register: TrainedRegister,
    pub false_pattern: Pattern,
    pub recall_ticks: usize,
}

impl HashTableNet {
    /// Builds the hash net and a random memory mask with the given fan-out.
    pub fn new(
        sd: SecondDegreeSpec,
        value_register: TrainedRegister,
        false_symbol: &str,
        fanout: usize,
        seed: u64,
    ) -> Result<Self> {
        let space = value_register.space();
        let false_pattern = space.pattern(false_symbol)?.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_dst = value_register.size();
        let mask = Arc::new(SynapseMask::random(sd.hash_size(), n_dst, fanout, &mut rng));
        let expected_hash = (sd.coverage() * sd.hash_size() as f64).round().max(1.0) as usize;
        let a = nominal_weight(expected_hash, fanout.min(n_dst), n_dst);
        let mut mem = MemoryConnection::new(mask, a);
        mem.install_default(false_pattern.clone());
        Ok(HashTableNet {
            sd: Arc::new(sd),
            mem,
            value_register,
            false_pattern,
            recall_ticks: 60,
        })
    }

    pub fn hash(&self, table: &Pattern, key: &Pattern) -> Pattern {
        hash_activate(&self.sd, table, key)
    }

    pub fn table_bind(&mut self, table: &Pattern, key: &Pattern, value: &Pattern) {
        let h = self.hash(table, key);
        self.mem.bind(&h, value);
    }

    pub fn table_unbind(&mut self, table: &Pattern, key: &Pattern, value: &Pattern) {
        let h = self.hash(table, key);
        self.mem.unbind(&h, value);
    }

    pub fn table_recall(&self, table: &Pattern, key: &Pattern) -> Option<Pattern> {
        let h = self.hash(table, key);
        recall_bound(&self.mem, &h, &self.value_register, self.recall_ticks)
    }
}
