//! One function per subcommand. Each returns its records in output order and
//! whether every check it ran passed.

use num_rational::BigRational;
use serde_json::json;

use naphase::expr::parse_rational;
use naphase::integrate::{double_fourier_check, fourier, gauss_brute_with, gauss_closed, oscillatory_brute_with};
use naphase::morse::{find_critical_points, morse_normal_form, verify_morse};
use naphase::motivic::{check_uniform, uniform_normal_form, PhiSpec, PrimeStatus, UniformOptions};
use naphase::stationary::{lambda_from, stationary_phase, verify_certificate};
use naphase::{CycloNum, FieldKind, LocalNum};

use crate::config::JobConfig;
use crate::output::{Record, Table};
use crate::CliError;

pub struct Outcome {
    pub records: Vec<Record>,
    pub table: Option<Table>,
    pub ok: bool,
}

fn strings(v: &[LocalNum]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn cyclo_cells(c: &CycloNum) -> [String; 3] {
    let (re, im) = c.embed_complex();
    [c.to_string(), format!("{re:.12}"), format!("{im:.12}")]
}

fn units(field_p: u32, only: Option<u32>) -> Result<Vec<u32>, CliError> {
    match only {
        Some(u) if u == 0 || u >= field_p => Err(CliError::usage(format!("unit digit must lie in 1..{field_p}"))),
        Some(u) => Ok(vec![u]),
        None => Ok((1..field_p).collect()),
    }
}

pub fn critical(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let field = cfg.field()?;
    let f = cfg.phase()?;
    let n = f.nvars();
    let fs = f.to_series(&field, cfg.degree)?;
    let omega = cfg.omega(&field, n)?;
    let mut pts = find_critical_points(&fs, &omega)?;
    pts.sort_by_key(|x| x.iter().map(|v| v.digits()).collect::<Vec<_>>());
    let records = pts
        .iter()
        .map(|x| Ok(Record::new("critical_point", json!({"point": strings(x), "value": fs.eval_polynomial(x)?.to_string()}))))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Outcome { records, table: None, ok: true })
}

pub fn morse(cfg: &JobConfig, alpha: u32, samples: usize, seed: u64) -> Result<Outcome, CliError> {
    let field = cfg.field()?;
    let f = cfg.phase()?;
    let fs = f.to_series(&field, cfg.degree)?;
    let omega = cfg.omega(&field, f.nvars())?;
    let mut pts = find_critical_points(&fs, &omega)?;
    pts.sort_by_key(|x| x.iter().map(|v| v.digits()).collect::<Vec<_>>());
    let mut ok = true;
    let mut records = Vec::new();
    for x in pts {
        let md = morse_normal_form(&fs, &x, alpha)?;
        let report = verify_morse(&md, &fs, samples, seed)?;
        ok &= report.passed();
        let mut body = md.to_json();
        body["verify"] = json!({
            "samples": report.samples,
            "failures": report.failures,
            "min_agreement": report.min_agreement,
            "floor": report.floor,
            "passed": report.passed(),
        });
        records.push(Record::new("morse", body));
    }
    Ok(Outcome { records, table: None, ok })
}

pub fn gauss(cfg: &JobConfig, ord_c: i64, alpha: u32, unit: Option<u32>) -> Result<Outcome, CliError> {
    let field = cfg.field()?;
    let mut table = Table::new(&["ord_c", "unit", "alpha", "closed", "closed_re", "closed_im", "brute", "equal"]);
    let mut records = Vec::new();
    let mut ok = true;
    for u in units(field.p(), unit)? {
        let c = lambda_from(&field, ord_c, u);
        let closed = gauss_closed(&c, alpha)?;
        let brute = gauss_brute_with(&c, alpha, &cfg.brute())?;
        let equal = closed == brute;
        ok &= equal;
        let [s, re, im] = cyclo_cells(&closed);
        table.push(vec![ord_c.to_string(), u.to_string(), alpha.to_string(), s, re, im, brute.to_string(), equal.to_string()]);
        records.push(Record::new(
            "gauss",
            json!({"ord_c": ord_c, "unit": u, "alpha": alpha, "closed": closed, "brute": brute, "equal": equal}),
        ));
    }
    Ok(Outcome { records, table: Some(table), ok })
}

pub fn fourier_cmd(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let field = cfg.field()?;
    let n = cfg.nvars()?;
    let phi = cfg.phi(&field, n)?;
    let hat = fourier(&phi)?;
    let inv = double_fourier_check(&phi)?;
    let records = vec![
        Record::new("fourier", json!({"transform": hat.to_json()})),
        Record::new(
            "inversion",
            json!({"kappa": inv.kappa, "expected": inv.expected, "matches_expected": inv.matches_expected}),
        ),
    ];
    Ok(Outcome { records, table: None, ok: inv.matches_expected })
}

pub fn integrate(cfg: &JobConfig, unit: Option<u32>) -> Result<Outcome, CliError> {
    let field = cfg.field()?;
    let f = cfg.phase()?;
    let n = f.nvars();
    let fs = f.to_series(&field, cfg.degree)?;
    let phi = cfg.phi(&field, n)?;
    let omega = cfg.omega(&field, n)?;
    let (lo, hi) = cfg.lambda_ord.ok_or_else(|| CliError::usage("missing --lambda-ord"))?;
    let mut table = Table::new(&["ord", "unit", "value", "value_re", "value_im"]);
    let mut records = Vec::new();
    for k in (lo..=hi).rev() {
        for u in units(field.p(), unit)? {
            let value = oscillatory_brute_with(&fs, &phi, &lambda_from(&field, k, u), &omega, &cfg.brute())?;
            let [s, re, im] = cyclo_cells(&value);
            table.push(vec![k.to_string(), u.to_string(), s, re, im]);
            records.push(Record::new("integral", json!({"ord": k, "unit": u, "value": value})));
        }
    }
    Ok(Outcome { records, table: Some(table), ok: true })
}

pub fn phase_verify(cfg: &JobConfig, depth: u32) -> Result<Outcome, CliError> {
    let field = cfg.field()?;
    let f = cfg.phase()?;
    let n = f.nvars();
    let fs = f.to_series(&field, cfg.degree)?;
    let phi = cfg.phi(&field, n)?;
    let omega = cfg.omega(&field, n)?;
    let cert = stationary_phase(&fs, &phi, &omega)?;
    let ords: Vec<i64> = match cfg.lambda_ord {
        Some((lo, hi)) => (lo..=hi).rev().collect(),
        None => (0..depth as i64).map(|d| cert.n - d).collect(),
    };
    let report = verify_certificate(&cert, &fs, &phi, &omega, &ords, None, &cfg.brute())?;
    let mut records = vec![Record::new("certificate", cert.to_json())];
    let mut table = Table::new(&["ord", "unit", "lhs", "lhs_re", "lhs_im", "rhs", "equal", "guaranteed"]);
    for r in &report.records {
        let [s, re, im] = cyclo_cells(&r.lhs);
        table.push(vec![
            r.ord.to_string(),
            r.unit.to_string(),
            s,
            re,
            im,
            r.rhs.to_string(),
            r.equal.to_string(),
            r.guaranteed.to_string(),
        ]);
        records.push(Record::new("lambda", serde_json::to_value(r).expect("serializable")));
    }
    let ok = report.passed();
    records.push(Record::new("summary", json!({"N": cert.n, "passed": ok, "checked": report.records.len()})));
    Ok(Outcome { records, table: Some(table), ok })
}

fn parse_point(s: &str) -> Result<Vec<BigRational>, CliError> {
    s.split(',').map(|c| parse_rational(c.trim()).map_err(CliError::from)).collect()
}

pub fn uniform(
    cfg: &JobConfig,
    primes: &[u32],
    x0: &[String],
    kinds: &[FieldKind],
    depth: u32,
) -> Result<Outcome, CliError> {
    if primes.is_empty() {
        return Err(CliError::usage("missing --primes"));
    }
    let f = cfg.phase()?;
    let n = f.nvars();
    let points = if x0.is_empty() {
        vec![vec![BigRational::from_integer(0.into()); n]]
    } else {
        x0.iter().map(|s| parse_point(s)).collect::<Result<Vec<_>, _>>()?
    };
    let formulas = points.iter().map(|x| uniform_normal_form(&f, x)).collect::<naphase::Result<Vec<_>>>()?;
    let phi = match &cfg.phi {
        Some(v) => PhiSpec::from_json(v)?,
        None => PhiSpec::unit_polydisc(n),
    };
    let opts = UniformOptions {
        precision: cfg.precision,
        cutoff: cfg.degree,
        depth,
        kinds: kinds.to_vec(),
        brute: cfg.brute(),
    };
    let report = check_uniform(&f, &formulas, &phi, primes, &opts);
    let mut records: Vec<Record> = formulas.iter().map(|u| Record::new("uniform_formula", u.to_json())).collect();
    let mut table = Table::new(&["p", "kind", "status", "N", "witnesses"]);
    let mut entries = report.entries.clone();
    entries.sort_by_key(|e| (e.p, e.kind));
    for e in &entries {
        let status = serde_json::to_value(&e.status).expect("serializable");
        table.push(vec![
            e.p.to_string(),
            e.kind.to_string(),
            status.as_str().unwrap_or_default().to_string(),
            e.n.map(|n| n.to_string()).unwrap_or_default(),
            e.witnesses.to_string(),
        ]);
        records.push(Record::new("prime", serde_json::to_value(e).expect("serializable")));
    }
    let ok = report.passed();
    let bad = entries.iter().filter(|e| e.status == PrimeStatus::BadPrime).count();
    records.push(Record::new("summary", json!({"passed": ok, "entries": entries.len(), "bad": bad})));
    Ok(Outcome { records, table: Some(table), ok })
}
