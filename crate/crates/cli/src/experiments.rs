//! One runner per subcommand, each turning a validated config into records.

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use mdl_core::arith::{divisor_table, f_average};
use mdl_core::cfrac::{expand, sigma_pair_profile, sigma_single_profile, DiophantineProfile, OmegaSchedule};
use mdl_core::circlesets::{build_aq, master_sweep, pair_sum, RadiusSchedule};
use mdl_core::discrepancy::{box_count, disc2d_grid, etk_auto_h, etk_bound, star_discrepancy_1d, HalfOpenBox};
use mdl_core::gallagher::{
    bc_ratio, divergence_sum, doubly_metric_sample, f_moment_sum, gl_census, hit_count, mc_survey, sklr_sum, union_series, ApproxFunction,
    HitModel, Level, PairTest, PsiPrime, PsiPrimeValue, Rotation,
};
use mdl_core::realnum::{parse_rational, Enclosure, Precision, RealExpr, RealParam};
use mdl_core::record::{canonical_params, ExperimentRecord};

use crate::config::{ConfigError, ExperimentConfig};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Library(mdl_core::Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Library(e) => write!(f, "error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<mdl_core::Error> for RunError {
    fn from(e: mdl_core::Error) -> Self {
        RunError::Library(e)
    }
}

type Run<T> = Result<T, RunError>;

/// Records plus the number of rigorous decisions taken and how many of them
/// stayed undecided.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub records: Vec<ExperimentRecord>,
    pub tests: u64,
    pub undecided: u64,
}

impl Outcome {
    /// More than 1% of the decisions undecided.
    pub fn undecided_dominated(&self) -> bool {
        self.undecided * 100 > self.tests
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    prov: String,
    prec: Precision,
    out: Outcome,
}

impl<'a> Ctx<'a> {
    fn raw(&self, key: &str) -> Run<&'a str> {
        self.cfg.get(key).ok_or_else(|| ConfigError::key(key, "missing required key").into())
    }

    fn parse<T>(&self, key: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Run<T> {
        let v = self.raw(key)?;
        f(v).map_err(|e| ConfigError::key(key, format!("cannot parse {v:?}: {e}")).into())
    }

    fn num(&self, key: &str) -> Run<u64> {
        self.parse(key, |v| v.parse::<u64>().map_err(|e| e.to_string()))
    }

    fn rational(&self, key: &str) -> Run<BigRational> {
        self.parse(key, |v| parse_rational(v).map_err(|e| e.to_string()))
    }

    fn real(&self, key: &str) -> Run<RealParam> {
        self.parse(key, |v| v.parse::<RealParam>().map_err(|e| e.to_string()))
    }

    fn expr(&self, key: &str) -> Run<RealExpr> {
        Ok(RealExpr::from(self.real(key)?))
    }

    fn psi(&self) -> Run<ApproxFunction> {
        self.parse("psi", |v| v.parse::<ApproxFunction>().map_err(|e| e.to_string()))
    }

    fn omega(&self) -> Run<OmegaSchedule> {
        self.parse("omega", |v| v.parse::<OmegaSchedule>().map_err(|e| e.to_string()))
    }

    fn rotation(&self) -> Run<Rotation> {
        Ok(Rotation::new(self.real("beta")?, self.real("gammap")?, self.omega()?))
    }

    fn psi_prime(&self) -> Run<PsiPrime> {
        Ok(PsiPrime { base: self.psi()?, rot: self.rotation()? })
    }

    /// ψ′ when β is given, else ψ itself.
    fn model(&self) -> Run<HitModel> {
        Ok(match self.cfg.get("beta") {
            Some(_) => HitModel::Fibred(self.psi_prime()?),
            None => HitModel::Direct(self.psi()?),
        })
    }

    fn name(&self, suffix: &str) -> String {
        if suffix.is_empty() {
            self.cfg.experiment.clone()
        } else {
            format!("{}.{suffix}", self.cfg.experiment)
        }
    }

    fn prov_with(&self, extra: &[(&str, String)]) -> String {
        let mut pairs: Vec<(String, String)> = self.prov.split(';').filter_map(|kv| kv.split_once('=')).map(|(k, v)| (k.into(), v.into())).collect();
        pairs.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
        canonical_params(pairs)
    }

    fn exact(&mut self, suffix: &str, q: u64, v: &BigRational, undecided: u64) {
        let r = ExperimentRecord::exact(&self.name(suffix), &self.prov, q, v, undecided);
        self.out.records.push(r);
    }

    fn count(&mut self, suffix: &str, q: u64, v: u64, undecided: u64) {
        let r = ExperimentRecord::count(&self.name(suffix), &self.prov, q, v, undecided);
        self.out.records.push(r);
    }

    fn encl(&mut self, suffix: &str, q: u64, e: &Enclosure, undecided: u64) {
        let r = ExperimentRecord::enclosure(&self.name(suffix), &self.prov, q, e, undecided);
        self.out.records.push(r);
    }

    fn tally(&mut self, tests: u64, undecided: u64) {
        self.out.tests += tests;
        self.out.undecided += undecided;
    }
}

pub fn run(cfg: &ExperimentConfig) -> Run<Outcome> {
    let mut prec = Precision::with_cap(cfg.precision_bits);
    if cfg.allow_literal {
        prec = prec.allowing_literals();
    }
    let mut c = Ctx { cfg, prov: cfg.provenance(), prec, out: Outcome::default() };
    match cfg.experiment.as_str() {
        "cf" => cf(&mut c)?,
        "sigma" => {
            let p = sigma_single_profile(&c.real("gamma")?, c.num("N")?, &c.prec)?;
            profile(&mut c, &p);
        }
        "sigma-pair" => {
            let p = sigma_pair_profile(&c.real("gamma")?, &c.real("beta")?, c.num("N")?, &c.prec)?;
            profile(&mut c, &p);
        }
        "omega" => {
            let w = c.omega()?;
            for q in 1..=c.num("Q")? {
                match w.exact(q) {
                    Some(v) => c.exact("", q, &v, 0),
                    None => c.encl("", q, &w.value(q, 128), 0),
                }
            }
        }
        "divisors" => {
            let q = c.num("q")?;
            if q == 0 {
                return Err(ConfigError::key("q", "must be positive").into());
            }
            let t = divisor_table(q);
            c.count("d", q, t.d() as u64, 0);
            for &r in &t.divisors {
                c.count("divisor", q, r, 0);
            }
            c.encl("F", q, &t.f, 0);
        }
        "f-avg" => {
            let q = c.num("Q")?;
            if q == 0 {
                return Err(ConfigError::key("Q", "must be positive").into());
            }
            c.encl("", q, &f_average(q), 0);
        }
        "aq" => aq(&mut c)?,
        "pairs" => {
            let s = pair_sum(&c.psi()?, &c.expr("gamma")?, c.num("Q")?);
            c.encl("", c.num("Q")?, &s, 0);
        }
        "master-sweep" => sweep(&mut c)?,
        "box-count" => boxes(&mut c)?,
        "disc" => disc(&mut c)?,
        "etk" => {
            let mut ps = vec![c.real("alpha")?];
            if c.cfg.get("beta").is_some() {
                ps.push(c.real("beta")?);
            }
            let b = etk_bound(&ps, c.num("N")?, c.num("H")?, &c.prec)?;
            for h in 1..=b.h {
                c.encl("", h, b.at(h).expect("h within range"), 0);
            }
        }
        "etk-auto" => {
            let a = etk_auto_h(&c.real("gamma")?, &c.real("beta")?, c.num("N")?, &c.rational("sigma")?, &c.prec)?;
            let n = c.num("N")?;
            c.count("H", n, a.h, 0);
            c.encl("bound", n, &a.etk.bound, 0);
            c.encl("chain", n, &a.chain, 0);
            c.encl("constant", n, &a.implied_constant, 0);
        }
        "psi-prime" => psi_prime(&mut c)?,
        "div-sum" => {
            let pp = c.psi_prime()?;
            let q = c.num("Q")?;
            let d = divergence_sum(&pp, q, &c.prec)?;
            c.tally(q, d.undecided.len() as u64);
            c.encl("", q, &d.sum, d.undecided.len() as u64);
            c.count("contributing", q, d.contributing, 0);
            c.count("degenerate", q, d.degenerate.len() as u64, 0);
        }
        "gl-census" => census(&mut c)?,
        "sklr" => {
            let pp = c.psi_prime()?;
            let q = c.num("q")?;
            let l = u32::try_from(c.num("l")?).map_err(|_| ConfigError::key("l", "too large"))?;
            let k = u32::try_from(c.num("k")?).map_err(|_| ConfigError::key("k", "too large"))?;
            let s = sklr_sum(&pp, &c.expr("gamma")?, q, k, l, c.num("r")?, &c.prec)?;
            c.tally(1, s.undecided.len() as u64);
            c.count("", q, s.count, s.undecided.len() as u64);
        }
        "f-moments" => {
            let rot = c.rotation()?;
            let q = c.num("Q")?;
            let l = u32::try_from(c.num("l")?).map_err(|_| ConfigError::key("l", "too large"))?;
            let k = u32::try_from(c.num("K")?).map_err(|_| ConfigError::key("K", "too large"))?;
            let m = f_moment_sum(&rot, q, l, k, &c.prec)?;
            c.tally(m.members.len() as u64 + m.undecided, m.undecided);
            c.encl("sum", q, &m.sum, m.undecided);
            c.encl("reference", q, &m.reference, 0);
            c.count("members", q, m.members.len() as u64, 0);
        }
        "bc-ratio" => bc(&mut c)?,
        "union" => {
            let sched = schedule(&c)?;
            let rows = union_series(sched.as_ref(), &c.expr("gamma")?, c.num("Q0")?, c.num("Q")?)?;
            for r in &rows {
                c.encl("", r.q, &r.measure, 0);
            }
        }
        "hits" => {
            let model = c.model()?;
            let q = c.num("Q")?;
            let h = hit_count(&c.expr("x")?, &c.expr("gamma")?, &model, q, false, &c.prec);
            c.tally(q, h.undecided);
            c.count("", q, h.hits, h.undecided);
            c.count("degenerate", q, h.degenerate, 0);
        }
        "mc-survey" => survey(&mut c)?,
        "doubly-metric" => doubly(&mut c)?,
        other => return Err(ConfigError::key("experiment", format!("unknown experiment {other:?}")).into()),
    }
    Ok(c.out)
}

fn cf(c: &mut Ctx) -> Run<()> {
    let terms = c.num("terms")? as usize;
    let e = expand(&c.real("alpha")?, terms, &c.prec)?;
    for (k, a) in e.quotients.iter().enumerate() {
        c.exact("quotient", k as u64, &BigRational::from_integer(a.clone()), 0);
    }
    for k in 0..e.convergents.len() {
        c.exact("convergent", k as u64, &e.convergent(k), 0);
    }
    Ok(())
}

fn profile(c: &mut Ctx, p: &DiophantineProfile) {
    for e in &p.entries {
        let prov = c.prov_with(&[("witness", e.witness.to_string())]);
        c.out.records.push(ExperimentRecord::enclosure(&c.name(""), &prov, e.n, &e.sigma, 0));
    }
}

fn aq(c: &mut Ctx) -> Run<()> {
    let q = c.num("q")?;
    let psi = c.rational("psi")?;
    let a = build_aq(&psi, &c.expr("gamma")?, q)?;
    c.encl("measure", q, &a.measure_bounds(), 0);
    c.exact("slack", q, &a.slack, 0);
    for (i, (lo, hi)) in a.nominal.arcs().iter().enumerate() {
        c.exact("arc_start", i as u64, lo, 0);
        c.exact("arc_end", i as u64, hi, 0);
    }
    Ok(())
}

/// Exact ψ values for q = 1..=Q, as the intersection lemma needs them.
fn exact_table(f: &ApproxFunction, q_max: u64) -> Run<Vec<BigRational>> {
    if f.q0 > 1 {
        return Err(ConfigError::key("psi", format!("needs ψ defined from q = 1, this one starts at {}", f.q0)).into());
    }
    let mut v = vec![BigRational::zero()];
    for q in 1..=q_max {
        let e = f.psi_eval(q)?;
        let x = e.exact_value().ok_or_else(|| ConfigError::key("psi", "needs exact rational ψ values"))?;
        v.push(x.clone());
    }
    Ok(v)
}

fn sweep(c: &mut Ctx) -> Run<()> {
    let q = c.num("Q")?;
    let table = exact_table(&c.psi()?, q)?;
    let psi = move |k: u64| table[k as usize].clone();
    let s = master_sweep(&psi, &c.expr("gamma")?, q, c.num("H")?, &c.rational("C0")?, &c.prec)?;
    c.tally(s.pairs, s.undecided);
    c.count("pairs", q, s.pairs, s.undecided);
    c.count("case_i", q, s.case_i, 0);
    c.count("case_ii", q, s.case_ii, 0);
    c.count("holds", q, s.holds, 0);
    c.count("fails", q, s.fails, 0);
    c.count("case_i_fails", q, s.case_i_fails, 0);
    if let Some(m) = &s.max_min_c0 {
        c.exact("max_min_c0", q, m, 0);
    }
    Ok(())
}

fn boxes(c: &mut Ctx) -> Run<()> {
    let ps: Vec<RealParam> = c.parse("params", |v| v.split(',').map(|s| s.trim().parse::<RealParam>().map_err(|e| e.to_string())).collect())?;
    let sides: Vec<(BigRational, BigRational)> = c.parse("box", |v| {
        v.split(',')
            .map(|side| {
                let (a, b) = side.split_once(':').ok_or_else(|| format!("side {side:?} is not lo:hi"))?;
                Ok((parse_rational(a.trim()).map_err(|e| e.to_string())?, parse_rational(b.trim()).map_err(|e| e.to_string())?))
            })
            .collect()
    })?;
    let region = HalfOpenBox::new(sides)?;
    let q = c.num("Q")?;
    let r = box_count(&ps, q, &region, &c.prec)?;
    c.count("count", q, r.count, 0);
    c.exact("error", q, &r.error, 0);
    Ok(())
}

fn disc(c: &mut Ctx) -> Run<()> {
    let q = c.num("Q")?;
    let alpha = c.real("alpha")?;
    if c.cfg.get("beta").is_some() {
        let g = disc2d_grid(&alpha, &c.real("beta")?, q, c.num("m")?, &c.prec)?;
        c.exact("lower", q, &g.lower, 0);
        c.exact("upper", q, &g.upper, 0);
    } else {
        let d = star_discrepancy_1d(&alpha, q, &c.prec)?;
        c.encl("star", q, &d.star, 0);
        c.encl("extreme", q, &d.extreme, 0);
    }
    Ok(())
}

fn psi_prime(c: &mut Ctx) -> Run<()> {
    let pp = c.psi_prime()?;
    for q in pp.base.q0..=c.num("Q")? {
        match pp.psi_prime(q, &c.prec)? {
            PsiPrimeValue::Inside(v) => c.encl("", q, &v, 0),
            PsiPrimeValue::Outside => c.exact("", q, &BigRational::zero(), 0),
            PsiPrimeValue::Degenerate => c.exact("degenerate", q, &BigRational::zero(), 0),
            PsiPrimeValue::Undecided => c.exact("", q, &BigRational::zero(), 1),
        }
        let u = u64::from(c.out.records.last().is_some_and(|r| r.undecided_count > 0));
        c.tally(1, u);
    }
    Ok(())
}

fn census(c: &mut Ctx) -> Run<()> {
    let rot = c.rotation()?;
    let q = c.num("Q")?;
    let s = gl_census(&rot, q, &c.prec);
    c.tally(q, s.undecided() as u64);
    for (l, cell) in s.cells.iter().enumerate() {
        c.count("cell", l as u64, cell.len() as u64, 0);
    }
    c.count("outside", q, s.outside() as u64, 0);
    c.count("degenerate", q, s.degenerate() as u64, 0);
    c.count("undecided", q, s.undecided() as u64, s.undecided() as u64);
    debug_assert_eq!(s.levels.iter().filter(|l| matches!(l, Level::Cell(_))).count(), s.members());
    Ok(())
}

fn schedule(c: &Ctx) -> Run<Box<dyn RadiusSchedule>> {
    Ok(match c.model()? {
        HitModel::Direct(f) => Box::new(f),
        HitModel::Fibred(pp) => Box::new(pp),
    })
}

fn bc(c: &mut Ctx) -> Run<()> {
    let sched = schedule(c)?;
    let q = c.num("Q")?;
    let s = bc_ratio(sched.as_ref(), &c.expr("gamma")?, q)?;
    let u = s.undecided.len() as u64;
    c.tally(q, u);
    for row in &s.rows {
        if let Some(r) = &row.ratio {
            c.encl("", row.q, r, u);
        }
    }
    let last = s.last();
    c.encl("measure_sum", q, &last.measure_sum, u);
    c.encl("pair_sum", q, &last.pair_sum, u);
    Ok(())
}

fn survey(c: &mut Ctx) -> Run<()> {
    let model = c.model()?;
    let q = c.num("Q")?;
    let samples = c.num("samples")?;
    let s = mc_survey(&c.expr("gamma")?, &model, q, samples, c.cfg.seed, &c.prec)?;
    c.tally(q * samples, s.undecided);
    for (i, &n) in s.counts.iter().enumerate() {
        c.count("count", i as u64, n, 0);
    }
    c.exact("mean", q, &s.mean, s.undecided);
    c.encl("expected", q, &s.expected, 0);
    if let Some(r) = Enclosure::exact(s.mean.clone()).div(&s.expected) {
        c.encl("ratio", q, &r, 0);
    }
    c.count("degenerate", q, s.degenerate, 0);
    Ok(())
}

fn doubly(c: &mut Ctx) -> Run<()> {
    let n = c.num("N")?;
    let d = doubly_metric_sample(&c.real("gamma")?, &c.rational("Hp")?, n, c.num("samples")?, c.cfg.seed, &c.prec)?;
    c.tally(d.samples, d.undecided);
    for (i, (k, t)) in d.outcomes.iter().enumerate() {
        let beta = format!("{k}/2^64");
        let (v, w, u) = match t {
            PairTest::Passes => (0, "none".to_string(), 0),
            PairTest::Fails { witness } => (1, format!("({},{})", witness.0, witness.1), 0),
            PairTest::Undecided => (0, "undecided".to_string(), 1),
        };
        let prov = c.prov_with(&[("beta", beta), ("witness", w)]);
        c.out.records.push(ExperimentRecord::count(&c.name("sample"), &prov, i as u64, v, u));
    }
    c.exact("fraction", n, &d.fraction, d.undecided);
    c.encl("union_bound", n, &d.union_bound, 0);
    Ok(())
}
