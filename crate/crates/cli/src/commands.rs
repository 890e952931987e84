use cpkit::cpm::{DiscardFamily, EnvironmentSamples, SignFlippedDiscard, TraceDiscard};
use cpkit::cpstar::{
    check_decoherence, cpstar_membership, cpstar_purify, decoherence_samples, sandwich_realize, CanonicalFrob,
    CpStarError, DecoherenceSample, FrobFamily, MembershipFailure, SignFlippedFrob,
};
use cpkit::sampling::{ancilla_rotated, seeded};
use cpkit::theorems::{corollary_isomorphism_check, verify_functor_laws};
use cpkit::{
    check_environment, CheckReport, ComplexMatrix, CpStarMorphism, CpmError, CpmMorphism, FrobeniusStructure,
    Superoperator, TensorError, Tolerance,
};
use serde_json::{json, Value};

use crate::model::{encode_cpm, encode_matrix, CpStarEntity, Entity, Frobenius, Model};
use crate::output::Report;
use crate::{CheckCommand, Cli, CliError, Command, CpStarCommand, CpmCommand, Family, SampledCommand, TheoremCommand};

pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let tol = Tolerance::new(cli.eps, cli.roundtrip_eps, cli.eig_eps)?;
    match &cli.command {
        Command::Check(CheckCommand::Frobenius { file, name }) => {
            check_frobenius(&load(file)?, name, tol.structural_eps)
        }
        Command::Cpm(op) => cpm(op, &tol),
        Command::Cpstar(op) => cpstar(op, &tol),
        Command::Env(SampledCommand::Check(a)) => env_check(&load(&a.file)?, a.samples, a.seed, a.family, &tol),
        Command::Dec(SampledCommand::Check(a)) => dec_check(&load(&a.file)?, a.samples, a.seed, a.family, &tol),
        Command::Theorems(TheoremCommand::Run { kind, samples, seed }) => {
            let mut checks = verify_functor_laws(*kind, *seed, *samples, &tol);
            checks.extend(corollary_isomorphism_check(*kind, *seed, *samples, &tol));
            let mut r = Report::new(format!("theorems run --kind {kind}"));
            r.absorb(&checks);
            r.detail("samples", *samples);
            r.detail("seed", *seed);
            Ok(r)
        }
    }
}

fn load(path: &str) -> Result<Model, CliError> {
    Ok(crate::model::parse_model(path)?)
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

fn superoperator_json(s: &Superoperator) -> Value {
    encode_matrix(s.matrix())
}

fn check_frobenius(model: &Model, name: &str, eps: f64) -> Result<Report, CliError> {
    let report = |r: cpkit::AxiomReport, category: &str, dim: usize| {
        let mut out = Report::new(format!("check frobenius {name}"));
        for a in &r.axioms {
            out.check(a.axiom.name(), a.residual, r.eps);
        }
        out.detail("category", category);
        out.detail("dim", dim);
        out.detail("commutative", r.commutative);
        out
    };
    Ok(match model.frobenius(name)? {
        Frobenius::Fhilb(s) => report(s.check(eps).map_err(invalid)?, "fhilb", s.dim()),
        Frobenius::Rel(s) => report(s.check(eps).map_err(invalid)?, "rel", s.dim()),
    })
}

/// A matrix entity read as a superoperator, or a cpm entity realized.
fn superoperator_of(model: &Model, name: &str) -> Result<Superoperator, CliError> {
    match model.get(name)? {
        Entity::Cpm(w) => Ok(w.realize()),
        Entity::Matrix(m) => Superoperator::from_matrix(m.clone()).map_err(|_| {
            invalid(format!(
                "matrix `{name}` is {}x{}, not a superoperator",
                m.rows(),
                m.cols()
            ))
        }),
        other => Err(invalid(format!(
            "entity `{name}` is a {}, expected a cpm or a superoperator matrix",
            other.kind()
        ))),
    }
}

fn cpm_result(r: &mut Report, w: &CpmMorphism) {
    r.detail("result", encode_cpm(w));
    r.detail("superoperator", superoperator_json(&w.realize()));
}

/// Failures of the decision procedures become failed reports; anything
/// else is an input error.
fn decision_failure(e: &CpmError) -> Option<String> {
    match e {
        CpmError::NotCp { min_eigenvalue } => {
            Some(format!("not completely positive, min Choi eigenvalue {min_eigenvalue}"))
        }
        CpmError::Tensor(TensorError::NotHermitian { residual }) => {
            Some(format!("Choi matrix is not Hermitian (residual {residual:.3e})"))
        }
        _ => None,
    }
}

fn cpm(op: &CpmCommand, tol: &Tolerance) -> Result<Report, CliError> {
    match op {
        CpmCommand::Realize { file, name } => {
            let model = load(file)?;
            let w = model.cpm(name)?;
            let mut r = Report::new(format!("cpm realize {name}"));
            r.detail("dim_in", w.dim_in());
            r.detail("dim_out", w.dim_out());
            r.detail("superoperator", superoperator_json(&w.realize()));
            Ok(r)
        }
        CpmCommand::Compose { file, g, f } => {
            let model = load(file)?;
            let composite = model.cpm(g)?.compose(model.cpm(f)?).map_err(invalid)?;
            let mut r = Report::new(format!("cpm compose {g} {f}"));
            cpm_result(&mut r, &composite);
            Ok(r)
        }
        CpmCommand::Tensor { file, f, g } => {
            let model = load(file)?;
            let product = model.cpm(f)?.tensor(model.cpm(g)?);
            let mut r = Report::new(format!("cpm tensor {f} {g}"));
            cpm_result(&mut r, &product);
            Ok(r)
        }
        CpmCommand::Dagger { file, f } => {
            let model = load(file)?;
            let mut r = Report::new(format!("cpm dagger {f}"));
            cpm_result(&mut r, &model.cpm(f)?.dagger());
            Ok(r)
        }
        CpmCommand::Choi { file, name } => {
            let s = superoperator_of(&load(file)?, name)?;
            let choi = s.choi();
            let decision = choi.cp_decision(tol);
            let mut r = Report::new(format!("cpm choi {name}"));
            r.info("hermitian_residual", decision.hermitian_residual);
            r.detail("choi", encode_matrix(choi.matrix()));
            r.detail("eigenvalues", decision.eigenvalues.clone());
            Ok(r)
        }
        CpmCommand::IsCp { file, name } => {
            let s = superoperator_of(&load(file)?, name)?;
            let decision = s.choi().cp_decision(tol);
            let mut r = Report::new(format!("cpm is-cp {name}"));
            r.check("hermitian_residual", decision.hermitian_residual, tol.structural_eps);
            if let Some(min) = decision.min_eigenvalue() {
                r.info("min_eigenvalue", min);
            }
            if !decision.is_cp {
                r.fail();
            }
            r.detail("eigenvalues", decision.eigenvalues);
            Ok(r)
        }
        CpmCommand::Purify { file, name } => {
            let s = superoperator_of(&load(file)?, name)?;
            let mut r = Report::new(format!("cpm purify {name}"));
            match s.purify(tol) {
                Ok(w) => {
                    let residual = w.realize().residual(&s).map_err(invalid)?;
                    r.check("roundtrip", residual, tol.roundtrip_eps);
                    r.detail("result", encode_cpm(&w));
                }
                Err(e) => match decision_failure(&e) {
                    Some(msg) => {
                        if let CpmError::NotCp { min_eigenvalue } = e {
                            r.info("min_eigenvalue", min_eigenvalue);
                        }
                        r.fail();
                        r.detail("error", msg);
                    }
                    None => return Err(invalid(e)),
                },
            }
            Ok(r)
        }
    }
}

fn structures<'m>(
    model: &'m Model,
    c: &CpStarEntity,
) -> Result<(&'m FrobeniusStructure, &'m FrobeniusStructure), CliError> {
    Ok((model.fhilb_frobenius(&c.dom)?, model.fhilb_frobenius(&c.cod)?))
}

/// The entity's map, realizing the witness when no map is stored.
fn cpstar_map(
    model: &Model,
    c: &CpStarEntity,
    tol: &Tolerance,
) -> Result<Result<ComplexMatrix, CpStarError>, CliError> {
    if let Some(m) = &c.map {
        return Ok(Ok(m.clone()));
    }
    let (dom, cod) = structures(model, c)?;
    let w = c.witness.as_ref().expect("loader requires map or kraus");
    Ok(sandwich_realize(w, dom, cod, tol))
}

/// Membership failures, closure failures and structures that fail their
/// axioms are check failures; boundary and shape errors are input errors.
fn cpstar_failure(e: CpStarError) -> Result<String, CliError> {
    match e {
        CpStarError::NotMember(_) | CpStarError::Closure { .. } | CpStarError::Frobenius(_) => Ok(e.to_string()),
        CpStarError::Cpm(ref c) if decision_failure(c).is_some() => Ok(e.to_string()),
        other => Err(invalid(other)),
    }
}

fn membership_residuals(r: &mut Report, failure: &Option<MembershipFailure>, min: f64, reproduction: f64, eps: f64) {
    r.info("min_eigenvalue", min);
    r.check("reproduction", reproduction, eps);
    if let Some(f) = failure {
        r.fail();
        r.detail("failure", f.to_string());
    }
}

fn cpstar_morphism(
    model: &Model,
    name: &str,
    tol: &Tolerance,
) -> Result<Result<CpStarMorphism, CpStarError>, CliError> {
    let c = model.cpstar(name)?;
    let (dom, cod) = structures(model, c)?;
    let (dom, cod) = (dom.clone(), cod.clone());
    Ok(match (&c.map, &c.witness) {
        (Some(m), Some(w)) => CpStarMorphism::with_witness(dom, cod, m.clone(), w.clone(), tol),
        (Some(m), None) => CpStarMorphism::new(dom, cod, m.clone(), tol),
        (None, Some(w)) => CpStarMorphism::from_witness(dom, cod, w.clone(), tol),
        (None, None) => unreachable!("loader requires map or kraus"),
    })
}

fn cpstar(op: &CpStarCommand, tol: &Tolerance) -> Result<Report, CliError> {
    match op {
        CpStarCommand::Realize { file, name } => {
            let model = load(file)?;
            let c = model.cpstar(name)?;
            let Some(w) = &c.witness else {
                return Err(invalid(format!("cpstar `{name}` has no `kraus` witness to realize")));
            };
            let (dom, cod) = structures(&model, c)?;
            let mut r = Report::new(format!("cpstar realize {name}"));
            match sandwich_realize(w, dom, cod, tol) {
                Ok(map) => {
                    if let Some(stored) = &c.map {
                        r.check(
                            "stored_map",
                            map.max_residual(stored).map_err(invalid)?,
                            tol.structural_eps,
                        );
                    }
                    r.detail("map", encode_matrix(&map));
                }
                Err(e) => {
                    r.fail();
                    r.detail("error", cpstar_failure(e)?);
                }
            }
            Ok(r)
        }
        CpStarCommand::IsMember { file, name } => {
            let model = load(file)?;
            let c = model.cpstar(name)?;
            let (dom, cod) = structures(&model, c)?;
            let mut r = Report::new(format!("cpstar is-member {name}"));
            let membership = cpstar_map(&model, c, tol)?.and_then(|m| cpstar_membership(&m, dom, cod, tol));
            match membership {
                Ok(m) => {
                    membership_residuals(
                        &mut r,
                        &m.failure,
                        m.min_eigenvalue,
                        m.reproduction_residual,
                        tol.structural_eps,
                    );
                    r.detail("inner", superoperator_json(&m.inner));
                }
                Err(e) => {
                    r.fail();
                    r.detail("error", cpstar_failure(e)?);
                }
            }
            Ok(r)
        }
        CpStarCommand::Purify { file, name } => {
            let model = load(file)?;
            let c = model.cpstar(name)?;
            let (dom, cod) = structures(&model, c)?;
            let mut r = Report::new(format!("cpstar purify {name}"));
            let purified = cpstar_map(&model, c, tol)?.and_then(|m| {
                let w = cpstar_purify(&m, dom, cod, tol)?;
                let back = sandwich_realize(&w, dom, cod, tol)?;
                Ok((w, back.max_residual(&m)?))
            });
            match purified {
                Ok((w, residual)) => {
                    r.check("roundtrip", residual, tol.roundtrip_eps);
                    r.detail("result", encode_cpm(&w));
                }
                Err(e) => {
                    r.fail();
                    r.detail("error", cpstar_failure(e)?);
                }
            }
            Ok(r)
        }
        CpStarCommand::Compose { file, g, f } => {
            let model = load(file)?;
            let (gc, fc) = (model.cpstar(g)?, model.cpstar(f)?);
            let mut r = Report::new(format!("cpstar compose {g} {f}"));
            let (gm, fm) = (cpstar_morphism(&model, g, tol)?, cpstar_morphism(&model, f, tol)?);
            let composite = gm.and_then(|gm| fm.and_then(|fm| gm.compose(&fm, tol)));
            match composite {
                Ok(h) => {
                    r.detail("map", encode_matrix(h.map()));
                    r.detail(
                        "result",
                        json!({
                            "kind": "cpstar",
                            "dom": fc.dom,
                            "cod": gc.cod,
                            "map": encode_matrix(h.map()),
                            "kraus": h.witness().kraus().iter().map(encode_matrix).collect::<Vec<_>>(),
                        }),
                    );
                }
                Err(e) => {
                    r.fail();
                    r.detail("error", cpstar_failure(e)?);
                }
            }
            Ok(r)
        }
    }
}

fn env_check(model: &Model, samples: usize, seed: u64, family: Family, tol: &Tolerance) -> Result<Report, CliError> {
    let mut env = EnvironmentSamples::seeded(seed, samples);
    let mut rng = seeded(seed.wrapping_add(1));
    let own = model.cpms();
    for (_, w) in &own {
        let partner = ancilla_rotated(&mut rng, w, w.ancilla_dim() + 1);
        env.pairs.push(((*w).clone(), partner));
        env.superoperators.push(w.realize());
    }
    let discard: &dyn DiscardFamily = match family {
        Family::Canonical => &TraceDiscard,
        Family::SignFlipped => &SignFlippedDiscard,
    };
    let checks = check_environment(discard, &env, tol);
    let mut r = Report::new("env check");
    r.absorb(&checks);
    r.detail("family", discard.name());
    r.detail("model_morphisms", own.iter().map(|(n, _)| *n).collect::<Vec<_>>());
    r.detail("samples", samples);
    r.detail("seed", seed);
    Ok(r)
}

fn dec_check(model: &Model, samples: usize, seed: u64, family: Family, tol: &Tolerance) -> Result<Report, CliError> {
    let named = model.fhilb_structures();
    let structures: Vec<FrobeniusStructure> = named.iter().map(|(_, s)| (*s).clone()).collect();
    let mut cases = decoherence_samples(&structures, seed, samples);
    let index = |n: &str| named.iter().position(|(m, _)| *m == n);
    let mut own = Vec::new();
    for (name, c) in model.cpstars() {
        if let (Some(w), Some(dom), Some(cod)) = (&c.witness, index(&c.dom), index(&c.cod)) {
            cases.push(DecoherenceSample {
                dom,
                cod,
                witness: w.clone(),
            });
            own.push(name);
        }
    }
    let frob: &dyn FrobFamily = match family {
        Family::Canonical => &CanonicalFrob,
        Family::SignFlipped => &SignFlippedFrob,
    };
    let checks: CheckReport = check_decoherence(frob, &structures, &cases, tol);
    let mut r = Report::new("dec check");
    r.absorb(&checks);
    r.detail("family", frob.name());
    r.detail("structures", named.iter().map(|(n, _)| *n).collect::<Vec<_>>());
    r.detail("model_morphisms", own);
    r.detail("samples", samples);
    r.detail("seed", seed);
    Ok(r)
}
