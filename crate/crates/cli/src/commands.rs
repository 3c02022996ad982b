use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use spectral_forge::cm_tiling::{
    check_tile_zn, cm_profile, generate_modulo_product_form, modulo_to_k_stage, paq_type_generator,
    ModuloProductFormSpec, PaqParams, PaqVariant, TileVerdict, ZShift,
};
use spectral_forge::cyclotomic::{factor_cyclotomic, MaskPolynomial};
use spectral_forge::fixtures::run_all_fixtures;
use spectral_forge::hadamard::{find_spectra, verify_triple};
use spectral_forge::measure::{
    build_spectrum, finite_level_identity_check, grid::chebyshev_grid, integer_bound_check, jp_sum, verify_levels,
    weakly_periodic_check, Rational, SpectrumOptions,
};
use spectral_forge::productform::{
    build_four_digit_form, expand_k_stage, expand_one_stage, k_stage_to_one_stage, reduce_r_to_1, validate_k_stage,
    validate_one_stage, AnyForm, OneStageForm,
};

use crate::input::{parse_value, read_digits, read_json, read_set, read_typed, CliError};

pub struct Outcome {
    pub valid: bool,
    pub result: Value,
    pub summary: String,
}

type Run = Result<Outcome, CliError>;

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn outcome(valid: bool, result: Value, summary: impl Into<String>) -> Run {
    Ok(Outcome {
        valid,
        result,
        summary: summary.into(),
    })
}

pub fn check_hadamard(base: Option<u64>, digits: &Path, spectrum: &Path) -> Run {
    let (d, n) = read_digits(digits, base)?;
    let (l, _) = read_set(spectrum, &["spectrum", "digits", "residues"])?;
    match verify_triple(n, &d, &l) {
        Ok(t) => outcome(
            true,
            json!({ "triple": t }),
            format!("({n}, {d}, {l}) is a Hadamard triple"),
        ),
        Err(f) => outcome(
            false,
            json!({ "base": n, "digits": d, "spectrum": l, "failure": f }),
            format!("not a Hadamard triple: {f}"),
        ),
    }
}

pub fn find_spectrum(base: Option<u64>, digits: &Path, limit: usize) -> Run {
    let (d, n) = read_digits(digits, base)?;
    let found = find_spectra(n, &d, limit)?;
    let summary = match found.first() {
        Some(l) => format!("{} spectra of {d} modulo {n}, first {l}", found.len()),
        None => format!("{d} has no spectrum modulo {n}"),
    };
    outcome(
        !found.is_empty(),
        json!({ "base": n, "digits": d, "limit": limit, "spectra": found }),
        summary,
    )
}

fn read_form(path: &Path) -> Result<AnyForm, CliError> {
    read_typed(path)
}

/// The one-stage form behind a form file; k-stage forms go through the reduction.
fn read_one_stage(path: &Path) -> Result<OneStageForm, CliError> {
    match read_form(path)? {
        AnyForm::OneStage(f) => Ok(f),
        AnyForm::KStage(f) => Ok(k_stage_to_one_stage(&f)?.form),
    }
}

pub fn validate_form(spec: &Path) -> Run {
    match read_form(spec)? {
        AnyForm::OneStage(f) => {
            let report = validate_one_stage(&f);
            let summary = if report.valid {
                format!("one-stage form over {} is valid", f.base)
            } else {
                format!("invalid one-stage form: {}", report.summary())
            };
            outcome(report.valid, json!({ "kind": "one_stage", "report": report }), summary)
        }
        AnyForm::KStage(f) => {
            let report = validate_k_stage(&f);
            let summary = if report.valid {
                format!("{}-stage form over {} is valid", f.k() + 1, f.base)
            } else {
                format!("invalid k-stage form: {}", report.summary())
            };
            outcome(report.valid, json!({ "kind": "k_stage", "report": report }), summary)
        }
    }
}

pub fn gen_product_form(spec: Option<&Path>, four_digit: Option<&[i64]>, expand: bool) -> Run {
    if let Some(p) = four_digit {
        let [n, a, t, l, l2] = p else {
            return Err(CliError::Input("--four-digit takes N,a,t,l,l'".into()));
        };
        if *n < 2 || *t < 0 {
            return Err(CliError::Input("--four-digit needs N >= 2 and t >= 0".into()));
        }
        let f = build_four_digit_form(*n as u64, *a, *t as u32, *l, *l2)?;
        let summary = format!("{} times {} = {} over {}", f.multiplier, f.digits, f.scaled, f.base);
        return outcome(f.report.valid, to_value(&f), summary);
    }
    let path = spec.ok_or_else(|| CliError::Input("pass --spec FILE or --four-digit N,a,t,l,l'".into()))?;
    let v = read_json(path)?;
    if v.get("T").is_some() {
        let spec: ModuloProductFormSpec = parse_value(path, v)?;
        let generation = generate_modulo_product_form(&spec)?;
        let mut result = json!({ "kind": "modulo", "generation": generation });
        let mut valid = true;
        let mut summary = format!("modulo product form: {} digits", generation.digits.len());
        if expand {
            match modulo_to_k_stage(&spec, None) {
                Ok((_, form, report)) => {
                    valid = report.valid;
                    summary.push_str(&format!(", k-stage form valid: {}", report.valid));
                    result["form"] = to_value(&form);
                    result["report"] = to_value(&report);
                }
                Err(e) => {
                    valid = false;
                    summary.push_str(&format!(", no k-stage form: {e}"));
                    result["form_error"] = json!(e.to_string());
                }
            }
        }
        return outcome(valid, result, summary);
    }
    let form: AnyForm = parse_value(path, v)?;
    let (digits, report) = match &form {
        AnyForm::OneStage(f) => (expand_one_stage(f)?, validate_one_stage(f)),
        AnyForm::KStage(f) => (expand_k_stage(f)?, validate_k_stage(f)),
    };
    let mut result = json!({ "form": form, "report": report, "size": digits.len() });
    if expand {
        result["digits"] = to_value(&digits);
    }
    let summary = format!("{} digits, valid: {}", digits.len(), report.valid);
    outcome(report.valid, result, summary)
}

pub fn reduce_kstage(spec: &Path) -> Run {
    match read_form(spec)? {
        AnyForm::KStage(f) => {
            let out = k_stage_to_one_stage(&f)?;
            let summary = format!(
                "one-stage form over {} with {} digits, valid: {}",
                out.form.base,
                out.combined.len(),
                out.report.valid
            );
            outcome(out.report.valid, to_value(&out), summary)
        }
        AnyForm::OneStage(f) => {
            let out = reduce_r_to_1(&f)?;
            let summary = format!("form over {} with r = 1", out.base);
            outcome(true, json!({ "form": out }), summary)
        }
    }
}

pub fn check_t1t2(base: Option<u64>, digits: &Path) -> Run {
    let (d, n) = read_digits(digits, base)?;
    let p = cm_profile(&d, n);
    let mut notes = Vec::new();
    if !p.distinct_mod_n {
        notes.push("digits repeat a residue".to_string());
    }
    if !p.t1 {
        notes.push(format!("T1 failure: prime powers {:?}", p.prime_powers));
    }
    if !p.t2 {
        notes.push(format!("T2 failure at {:?}", p.t2_witness.clone().unwrap_or_default()));
    }
    let summary = if notes.is_empty() {
        format!("{d} satisfies T1 and T2 modulo {n}")
    } else {
        notes.join("; ")
    };
    outcome(p.t1_t2(), to_value(&p), summary)
}

pub fn check_tile(base: Option<u64>, digits: &Path, exhaustive: bool, budget: u64) -> Run {
    let (d, n) = read_digits(digits, base)?;
    let check = check_tile_zn(&d, n, exhaustive.then_some(budget));
    let tiles = check.tiles();
    let summary = match (check.verdict, tiles) {
        (TileVerdict::TilesByT1T2, _) => format!("{d} tiles Z_{n}: T1 and T2 hold"),
        (TileVerdict::NotTileByT1Failure, _) if !check.profile.distinct_mod_n => {
            format!("{d} does not tile Z_{n}: residues repeat")
        }
        (TileVerdict::NotTileByT1Failure, _) => format!("{d} does not tile Z_{n}: T1 failure"),
        (TileVerdict::Unknown, Some(true)) => format!("{d} tiles Z_{n} by search"),
        (TileVerdict::Unknown, Some(false)) => format!("{d} does not tile Z_{n} by search"),
        (TileVerdict::Unknown, None) => format!("undecided for {d} modulo {n}"),
    };
    outcome(tiles == Some(true), to_value(&check), summary)
}

pub struct PaqArgs<'a> {
    pub p: u64,
    pub q: u64,
    pub alpha: u32,
    pub variant: &'a str,
    pub params: Option<&'a Path>,
    pub m: &'a [u64],
    pub extra_q: bool,
    pub zshifts: Option<&'a Path>,
}

pub fn classify_paq(a: PaqArgs) -> Run {
    let variant: PaqVariant = a.variant.parse()?;
    let mut params: PaqParams = match a.params {
        Some(p) => read_typed(p)?,
        None => PaqParams::default(),
    };
    if !a.m.is_empty() {
        params.m = a.m.to_vec();
    }
    params.extra_q |= a.extra_q;
    if let Some(z) = a.zshifts {
        params.zshifts = read_typed::<Vec<ZShift>>(z)?;
    }
    let r = paq_type_generator(a.p, a.q, a.alpha, variant, &params)?;
    let valid = r.report.valid && r.complete_mod_n && r.congruences.valid;
    let summary = format!(
        "{} over {}: complete residues {}, congruences {}, form {}",
        r.generation.digits,
        r.base,
        r.complete_mod_n,
        r.congruences.valid,
        if r.report.valid { "valid" } else { "invalid" }
    );
    outcome(valid, to_value(&r), summary)
}

pub fn factor_mask(digits: &Path, max_index: Option<u64>) -> Run {
    let (d, _) = read_set(digits, &["digits", "residues"])?;
    let mask = MaskPolynomial::from_digits(&d)?;
    let f = factor_cyclotomic(&mask, max_index);
    let lines: Vec<String> = f.factors.iter().map(|(d, m)| format!("Phi_{d} ^ {m}")).collect();
    let residual: Vec<String> = f
        .residual
        .terms()
        .map(|(e, c)| if e == 0 { c.to_string() } else { format!("{c}*x^{e}") })
        .collect();
    let residual = if residual.is_empty() {
        "0".to_string()
    } else {
        residual.join(" + ")
    };
    let summary = format!("{}\nresidual {residual}", lines.join("\n"));
    outcome(
        true,
        json!({ "digits": d, "factors": f.factors, "lines": lines, "residual": residual, "search_bound": f.search_bound }),
        summary,
    )
}

pub struct JpArgs<'a> {
    pub form: &'a Path,
    pub levels: usize,
    pub depth: Option<u32>,
    pub grid: usize,
    pub window: i64,
    pub threshold: f64,
    pub pk: &'a [u32],
    pub radius: f64,
    pub samples: usize,
    pub seed: u64,
    pub digits: Option<&'a Path>,
    pub scale: Option<&'a str>,
    pub tolerance: f64,
    pub report: Option<&'a PathBuf>,
}

pub fn verify_jp(a: JpArgs) -> Run {
    let f = read_one_stage(a.form)?;
    let opts = SpectrumOptions {
        levels: a.levels,
        pk_schedule: if a.pk.is_empty() { vec![1] } else { a.pk.to_vec() },
        window: a.window,
        threshold: a.threshold,
        ..SpectrumOptions::default()
    };
    let built = build_spectrum(&f, &opts)?;
    let scale: Rational = match a.scale {
        None => Rational::from_integer(1),
        Some(s) => s
            .parse()
            .map_err(|_| CliError::Input(format!("--scale {s:?} is not a rational")))?,
    };
    let candidate = built.rescaled(scale);
    let (digits, base) = match a.digits {
        Some(p) => read_digits(p, Some(f.base))?,
        None => (expand_one_stage(&f)?, f.base),
    };
    let mut xi = chebyshev_grid(a.grid);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    xi.extend((0..a.samples).map(|_| rng.gen::<f64>()));

    let mut per_level = Vec::new();
    let mut last = f64::INFINITY;
    let mut decreasing = true;
    let mut bessel = true;
    let mut rows = Value::Null;
    for level in 0..=a.levels {
        let r = jp_sum(&digits, base, &candidate.up_to(level), &xi, a.depth, a.radius)?;
        if level > 0 {
            decreasing &= r.max_deficiency < last;
        }
        last = r.max_deficiency;
        bessel &= r.bessel_ok;
        per_level.push(json!({
            "level": level,
            "terms": r.terms,
            "max_deficiency": r.max_deficiency,
            "bessel_ok": r.bessel_ok,
        }));
        if level == a.levels {
            rows = to_value(&r.rows);
        }
    }
    let integer = integer_bound_check(&built, &xi, a.tolerance)?;
    let structure = verify_levels(&built)?;
    let valid = bessel && decreasing && integer.bounded && structure.valid;
    let result = json!({
        "candidate": {
            "base": candidate.base,
            "scale": candidate.scale.to_string(),
            "fractional": candidate.fractional.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            "level_sizes": candidate.levels.iter().map(|l| l.elements.len()).collect::<Vec<_>>(),
            "shifts": candidate.levels.last().map(|l| to_value(&l.shifts)),
        },
        "levels": per_level,
        "rows": rows,
        "bessel_ok": bessel,
        "deficiency_decreasing": decreasing,
        "integer_bound": { "bounded": integer.bounded, "monotone": integer.monotone, "max_excess": integer.max_excess },
        "structure": structure,
    });
    if let Some(path) = a.report {
        let text = serde_json::to_string_pretty(&result).expect("report serializes");
        std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    let summary = format!(
        "{} levels, final max deficiency {last:.3e}, Bessel {bessel}, decreasing {decreasing}, integer bound {}",
        a.levels, integer.bounded
    );
    outcome(valid, result, summary)
}

pub fn check_lemma42(form: &Path, p: u32, grid: usize, tolerance: f64) -> Run {
    let f = read_one_stage(form)?;
    let r = finite_level_identity_check(&f, p, &chebyshev_grid(grid), None)?;
    let summary = format!(
        "p = {p}, |Γ_p| = {}, max deviation {:.3e} over {} samples",
        r.gamma_size, r.max_deviation, r.samples
    );
    outcome(r.max_deviation < tolerance, to_value(&r), summary)
}

pub fn weakly_periodic(form: &Path, window: i64, resolution: usize, tolerance: f64) -> Run {
    let f = read_one_stage(form)?;
    let r = weakly_periodic_check(&f, window, resolution)?;
    let summary = format!(
        "min over {} grid points of max |mu_hat(xi + k)|, |k| <= {window}: {:.3e} ({} excluded)",
        r.grid_size - r.excluded,
        r.min_max,
        r.excluded
    );
    outcome(r.min_max > tolerance, to_value(&r), summary)
}

pub fn all_fixtures() -> Run {
    let out = run_all_fixtures();
    let valid = out.iter().all(|(o, _)| o.passed);
    let lines: Vec<String> = out
        .iter()
        .map(|(o, secs)| {
            format!(
                "{} {:<32} expected {:<7} observed {:<7} {secs:.2}s",
                if o.passed { "PASS" } else { "FAIL" },
                o.id,
                o.expected,
                o.observed
            )
        })
        .collect();
    let outcomes: Vec<_> = out.into_iter().map(|(o, _)| o).collect();
    outcome(valid, json!({ "fixtures": outcomes }), lines.join("\n"))
}
