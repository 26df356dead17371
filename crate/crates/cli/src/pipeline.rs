//! The end-to-end witness run for one curve.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use hw_core::arith;
use hw_core::ec::CurveQ;
use hw_core::galois_tower::{
    divisibility_contradiction, index_bound_bruteforce, tower_structure, DivisibilityWitness, FormalMWModel,
    IndexBound, TowerLevel, MAX_GROUP_ORDER,
};
use hw_core::heegner::{gz_correspondence, trace_relation_check, trace_to_k, GzReport, TraceRelationReport, TraceToK};
use hw_core::lseries::{self, LEval, RankGate};
use hw_core::quadforms::{ring_class_structure, splitting_type, Discriminant, RingClassStructure, SplitType};
use hw_core::searcher::{self, ApSource, FieldSearchResult, PrimeSeqItem, SearchError, SearchParams};

use crate::cache::ApCache;
use crate::config::Config;

#[derive(Clone, Debug, Serialize)]
pub struct CurveInfo {
    pub label: String,
    pub coefficients: [i64; 5],
    pub conductor: u64,
    pub discriminant: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeegnerSection {
    pub trace_to_k: Option<TraceToK>,
    pub gz: Option<GzReport>,
    /// Smallest prime inert in `K` and prime to `N d_K`.
    pub aux_ell: u64,
    pub trace_relation: Option<TraceRelationReport>,
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TowerSection {
    pub levels: Vec<TowerLevel>,
    /// One formal generator `Q_1 := P_K`, so `c_1 = 1`.
    pub model: FormalMWModel,
    pub witness: Option<DivisibilityWitness>,
    pub witness_error: Option<String>,
    /// Exhaustive check of the index bound at the witness level, when small.
    pub index_bound: Option<IndexBound>,
    /// Full degree of each level agrees with the ring class degree.
    pub degrees_consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub curve: CurveInfo,
    pub config: Config,
    pub gate: Option<RankGate>,
    pub l_value: Option<LEval>,
    pub field: Option<FieldSearchResult>,
    pub q: Option<u64>,
    pub primes: Vec<PrimeSeqItem>,
    pub ring_class: Vec<RingClassStructure>,
    pub heegner: Option<HeegnerSection>,
    pub tower: Option<TowerSection>,
    pub checks: BTreeMap<String, bool>,
    pub failure: Option<String>,
    pub passed: bool,
    pub versions: BTreeMap<String, String>,
    pub timing: BTreeMap<String, f64>,
}

impl WitnessReport {
    fn new(curve: &CurveQ, config: &Config) -> Self {
        let versions = BTreeMap::from([("hw".to_string(), env!("CARGO_PKG_VERSION").to_string())]);
        WitnessReport {
            curve: CurveInfo {
                label: curve.name(),
                coefficients: curve.model().coefficients(),
                conductor: curve.conductor(),
                discriminant: curve.discriminant().to_string(),
            },
            config: config.clone(),
            gate: None,
            l_value: None,
            field: None,
            q: None,
            primes: Vec::new(),
            ring_class: Vec::new(),
            heegner: None,
            tower: None,
            checks: BTreeMap::new(),
            failure: None,
            passed: false,
            versions,
            timing: BTreeMap::new(),
        }
    }

    fn check(&mut self, name: &str, ok: bool) -> bool {
        self.checks.insert(name.to_string(), ok);
        if !ok && self.failure.is_none() {
            self.failure = Some(format!("{name} failed"));
        }
        ok
    }

    fn fail(mut self, stage: &str, msg: String) -> Self {
        self.checks.insert(stage.to_string(), false);
        self.failure = Some(format!("{stage}: {msg}"));
        self.passed = false;
        self
    }
}

struct Stopwatch(Instant);

impl Stopwatch {
    fn lap(&mut self, report: &mut WitnessReport, stage: &str) {
        let now = Instant::now();
        report.timing.insert(format!("{stage}_ms"), (now - self.0).as_secs_f64() * 1e3);
        self.0 = now;
    }
}

/// Smallest prime inert in `K` and prime to `N d_K`.
pub fn auxiliary_prime(curve: &CurveQ, d_k: &Discriminant) -> u64 {
    let nd = curve.conductor() as i64 * d_k.value().abs();
    let mut l = 2;
    while splitting_type(d_k, l) != SplitType::Inert || arith::gcd(l as i64, nd) != 1 {
        l = arith::next_prime(l);
    }
    l
}

/// Runs every stage; failures are recorded in the report, never returned.
pub fn run_witness(curve: &CurveQ, config: &Config, cache: Option<&ApCache>) -> WitnessReport {
    let start = Instant::now();
    let mut sw = Stopwatch(start);
    let mut r = WitnessReport::new(curve, config);
    let out = run_stages(curve, config, cache, &mut r, &mut sw);
    let mut r = match out {
        Ok(()) => {
            r.passed = r.failure.is_none() && r.checks.values().all(|&b| b);
            r
        }
        Err((stage, msg)) => r.fail(&stage, msg),
    };
    r.timing.insert("total_ms".into(), start.elapsed().as_secs_f64() * 1e3);
    r
}

type StageResult = Result<(), (String, String)>;

fn stage_err<E: std::fmt::Display>(stage: &str) -> impl Fn(E) -> (String, String) + '_ {
    move |e| (stage.to_string(), e.to_string())
}

fn run_stages(
    curve: &CurveQ,
    cfg: &Config,
    cache: Option<&ApCache>,
    r: &mut WitnessReport,
    sw: &mut Stopwatch,
) -> StageResult {
    let gate = lseries::analytic_rank_gate(curve, cfg.l_tail, cfg.nonvanishing);
    r.gate = Some(gate);
    r.l_value = lseries::l_eval(curve, cfg.l_tail).ok();
    sw.lap(r, "rank_gate");
    if gate == RankGate::NotEligible {
        return Err(("rank_gate".into(), "not_eligible".into()));
    }
    r.check("rank_gate", true);

    let params = SearchParams { scan_bound: cfg.d_k_bound, tail: cfg.l_tail, nonvanishing: cfg.nonvanishing };
    let field = searcher::find_k(curve, &params, None).map_err(stage_err("field"))?;
    let d_k = Discriminant::fundamental(field.d_k).map_err(stage_err("field"))?;
    r.check("field", field.accepted());
    r.check("l_over_k", field.l_over_k.as_ref().is_some_and(|l| l.nonzero));
    r.field = Some(field);
    sw.lap(r, "field");

    let q = searcher::choose_q(curve, &d_k, None);
    r.q = Some(q);
    let model_c = vec![1i64];
    let witness_level = (cfg.tower_m + cfg.tower_r + 1) as usize;
    let count = cfg.depth.max(witness_level);
    let source: Box<dyn ApSource + '_> = match cache {
        Some(c) => Box::new(c.source(curve)),
        None => Box::new(curve.clone()),
    };
    let primes = searcher::prime_sequence(curve, &d_k, q, count, cfg.prime_bound, source.as_ref());
    let primes = match primes {
        Ok(p) => p,
        Err(SearchError::BoundExhausted { found, bound, wanted }) => {
            r.primes = found;
            return Err(("prime_sequence".into(), format!("only {} of {wanted} primes below {bound}", r.primes.len())));
        }
        Err(e) => return Err(("prime_sequence".into(), e.to_string())),
    };
    r.check("prime_sequence", primes.iter().all(PrimeSeqItem::accepted));
    r.primes = primes;
    sw.lap(r, "prime_sequence");

    let ps: Vec<u64> = r.primes.iter().map(|i| i.p).collect();
    let mut ring_ok = true;
    for level in 1..=cfg.depth {
        match ring_class_structure(&d_k, &ps[..level]) {
            Ok(s) => {
                ring_ok &= s.enumerated != Some(false);
                r.ring_class.push(s);
            }
            Err(e) => return Err(("ring_class".into(), e.to_string())),
        }
    }
    r.check("ring_class", ring_ok);
    sw.lap(r, "ring_class");

    let aux_ell = auxiliary_prime(curve, &d_k);
    let mut h = HeegnerSection { trace_to_k: None, gz: None, aux_ell, trace_relation: None, errors: Vec::new() };
    match trace_to_k(curve, &d_k, cfg.heegner_precision) {
        Ok(t) => {
            let within = t.n_terms <= cfg.term_ceiling;
            let height_ok = match (t.is_torsion(), t.height) {
                (false, Some(ht)) => ht > cfg.height_tolerance,
                _ => true,
            };
            r.check("trace_to_k", within && height_ok);
            h.trace_to_k = Some(t);
        }
        Err(e) => {
            h.errors.push(format!("trace_to_k: {e}"));
            r.check("trace_to_k", false);
        }
    }
    match gz_correspondence(curve, &d_k, cfg.heegner_precision, cfg.nonvanishing) {
        Ok(g) => {
            r.check("gz_biconditional", g.biconditional);
            h.gz = Some(g);
        }
        Err(e) => {
            h.errors.push(format!("gz_correspondence: {e}"));
            r.check("gz_biconditional", false);
        }
    }
    match trace_relation_check(curve, &d_k, aux_ell, cfg.trace_residual) {
        Ok(t) => {
            r.check("trace_relation", t.passed && t.n_terms <= cfg.term_ceiling);
            h.trace_relation = Some(t);
        }
        Err(e) => {
            h.errors.push(format!("trace_relation: {e}"));
            r.check("trace_relation", false);
        }
    }
    r.heegner = Some(h);
    sw.lap(r, "heegner");

    let mut levels = Vec::new();
    let mut degrees_consistent = true;
    for n in 0..=ps.len() {
        let t = tower_structure(q, &ps[..n]).map_err(stage_err("tower"))?;
        if (1..=r.ring_class.len()).contains(&n) {
            degrees_consistent &= r.ring_class[n - 1].degree.to_string() == t.full_degree;
        }
        levels.push(t);
    }
    let a_p: Vec<i64> = r.primes.iter().map(|i| i.a_p.unwrap_or(0)).collect();
    let model = FormalMWModel { q, k: 1, c: model_c, a_p, m: cfg.tower_m, r: cfg.tower_r };
    let (witness, witness_error) = match divisibility_contradiction(&model) {
        Ok(w) => (Some(w), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let index_bound = witness.as_ref().and_then(|w| {
        let small = (q as u128).checked_pow(w.n).is_some_and(|o| o <= MAX_GROUP_ORDER as u128);
        small.then(|| index_bound_bruteforce(q, w.n, cfg.tower_r.min(w.n)).ok()).flatten()
    });
    r.check("tower", degrees_consistent && index_bound.as_ref().is_none_or(|b| b.bound_holds));
    r.check("contradiction", witness.is_some());
    r.tower = Some(TowerSection { levels, model, witness, witness_error, index_bound, degrees_consistent });
    sw.lap(r, "tower");
    Ok(())
}
