//! C ABI over the oaktd library.
//!
//! Every object is an opaque handle created by an `oaktd_*_new` or
//! `oaktd_train` call and released by the matching `*_free`. Every fallible
//! call returns an [`OaktdStatus`]; on failure, [`oaktd_last_error_message`]
//! describes the most recent error raised on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use oaktd::config::{parse_config, ExperimentConfig};
use oaktd::envs::{EnvId, EnvSpec, EnvState};
use oaktd::features::attention;
use oaktd::harness::{train, Agent, EvalRecord};
use oaktd::output::{load_model, save_model, ModelSnapshot};
use oaktd::seeding::{stream, Stream, StreamRng};
use oaktd::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OaktdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    NonFinite = 4,
    Io = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// A running environment instance with its own random stream.
pub struct OaktdEnv {
    spec: EnvSpec,
    state: EnvState,
    rng: StreamRng,
}

/// A resolved, validated experiment configuration.
pub struct OaktdConfig {
    config: ExperimentConfig,
}

/// A trained agent together with its evaluation log.
pub struct OaktdModel {
    config: ExperimentConfig,
    seed: u64,
    agent: Agent,
    log: Vec<EvalRecord>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: OaktdStatus,
    message: String,
}

impl Failure {
    fn new(status: OaktdStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }

    fn null(what: &str) -> Self {
        Failure::new(OaktdStatus::NullPointer, format!("`{what}` is null"))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::UnknownKey { .. }
            | Error::InvalidValue { .. }
            | Error::MissingKey(_)
            | Error::Syntax { .. } => OaktdStatus::Config,
            Error::InvalidArgument(_) => OaktdStatus::InvalidArgument,
            Error::NonFinite { .. } => OaktdStatus::NonFinite,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::Data { .. } => OaktdStatus::Io,
        };
        Failure::new(status, e.to_string())
    }
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> OaktdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OaktdStatus::Ok,
        Ok(Err(fail)) => {
            set_last_error(&fail.message);
            fail.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(&format!("internal panic: {msg}"));
            OaktdStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Failure::new(
            OaktdStatus::InvalidArgument,
            format!("`{what}` is not UTF-8"),
        )
    })
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn handle_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::null(what))
}

unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    p.write(value);
    Ok(())
}

unsafe fn input_state(ptr: *const f64, len: usize, dim: usize) -> Result<EnvState, Failure> {
    if ptr.is_null() {
        return Err(Failure::null("state"));
    }
    if len != dim {
        return Err(Failure::new(
            OaktdStatus::InvalidArgument,
            format!("state has {len} components, environment expects {dim}"),
        ));
    }
    Ok(EnvState(std::slice::from_raw_parts(ptr, len).to_vec()))
}

unsafe fn output_slice<'a>(
    ptr: *mut f64,
    capacity: usize,
    needed: usize,
) -> Result<&'a mut [f64], Failure> {
    if ptr.is_null() {
        return Err(Failure::null("out"));
    }
    if capacity < needed {
        return Err(Failure::new(
            OaktdStatus::BufferTooSmall,
            format!("buffer holds {capacity} values, {needed} needed"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, needed))
}

fn parse_env(name: &str) -> Result<EnvId, Failure> {
    name.parse::<EnvId>()
        .map_err(|e| Failure::new(OaktdStatus::InvalidArgument, e.to_string()))
}

/// Message of the last failed call on this thread, or null if none.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn oaktd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates an environment (`mountain-car`, `acrobot`, `cartpole`, `puddle-world`)
/// seeded with `seed`, already reset to a start state.
///
/// # Safety
/// `name` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oaktd_env_new(
    name: *const c_char,
    seed: u64,
    out: *mut *mut OaktdEnv,
) -> OaktdStatus {
    guard(|| {
        let id = parse_env(text(name, "name")?)?;
        let spec = EnvSpec::new(id);
        let mut rng = stream(seed, Stream::Env, 0);
        let state = spec.reset(&mut rng);
        let env = Box::new(OaktdEnv { spec, state, rng });
        write(out, Box::into_raw(env), "out")
    })
}

/// # Safety
/// `env` must come from [`oaktd_env_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn oaktd_env_free(env: *mut OaktdEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn oaktd_env_state_dim(env: *const OaktdEnv) -> usize {
    env.as_ref().map_or(0, |e| e.spec.state_dim)
}

/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn oaktd_env_action_count(env: *const OaktdEnv) -> usize {
    env.as_ref().map_or(0, |e| e.spec.action_count)
}

/// Copies the current state into `out` (`capacity` values available).
///
/// # Safety
/// `env` must be a live handle and `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn oaktd_env_state(
    env: *const OaktdEnv,
    out: *mut f64,
    capacity: usize,
) -> OaktdStatus {
    guard(|| {
        let env = handle(env, "env")?;
        output_slice(out, capacity, env.spec.state_dim)?.copy_from_slice(&env.state);
        Ok(())
    })
}

/// Starts a new episode and writes its start state into `out`.
///
/// # Safety
/// `env` must be a live handle and `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn oaktd_env_reset(
    env: *mut OaktdEnv,
    out: *mut f64,
    capacity: usize,
) -> OaktdStatus {
    guard(|| {
        let env = handle_mut(env, "env")?;
        let dst = output_slice(out, capacity, env.spec.state_dim)?;
        env.state = env.spec.reset(&mut env.rng);
        dst.copy_from_slice(&env.state);
        Ok(())
    })
}

/// Applies `action`; writes the next state, reward and terminal flag.
/// After a terminal step the caller should reset.
///
/// # Safety
/// `env` must be a live handle, `out` must hold `capacity` doubles and
/// `reward`/`terminal` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn oaktd_env_step(
    env: *mut OaktdEnv,
    action: usize,
    out: *mut f64,
    capacity: usize,
    reward: *mut f64,
    terminal: *mut bool,
) -> OaktdStatus {
    guard(|| {
        let env = handle_mut(env, "env")?;
        if action >= env.spec.action_count {
            return Err(Failure::new(
                OaktdStatus::InvalidArgument,
                format!("action {action} out of range 0..{}", env.spec.action_count),
            ));
        }
        if reward.is_null() || terminal.is_null() {
            return Err(Failure::null("reward/terminal"));
        }
        let dst = output_slice(out, capacity, env.spec.state_dim)?;
        let outcome = env.spec.step(&env.state, action, &mut env.rng);
        dst.copy_from_slice(&outcome.next_state);
        reward.write(outcome.reward);
        terminal.write(outcome.terminal);
        env.state = outcome.next_state;
        Ok(())
    })
}

/// Default configuration for environment `env_name`.
///
/// # Safety
/// `env_name` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oaktd_config_new(
    env_name: *const c_char,
    out: *mut *mut OaktdConfig,
) -> OaktdStatus {
    guard(|| {
        let name = text(env_name, "env_name")?;
        let config = parse_config("", &[("env".to_string(), name.to_string())])?;
        write(out, Box::into_raw(Box::new(OaktdConfig { config })), "out")
    })
}

/// Parses a flat `key = value` configuration text.
///
/// # Safety
/// `body` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oaktd_config_parse(
    body: *const c_char,
    out: *mut *mut OaktdConfig,
) -> OaktdStatus {
    guard(|| {
        let config = parse_config(text(body, "body")?, &[])?;
        write(out, Box::into_raw(Box::new(OaktdConfig { config })), "out")
    })
}

/// Sets one key; the configuration is left unchanged if the result is invalid.
///
/// # Safety
/// `config` must be a live handle; `key` and `value` valid C strings.
#[no_mangle]
pub unsafe extern "C" fn oaktd_config_set(
    config: *mut OaktdConfig,
    key: *const c_char,
    value: *const c_char,
) -> OaktdStatus {
    guard(|| {
        let cfg = handle_mut(config, "config")?;
        let (key, value) = (text(key, "key")?, text(value, "value")?);
        let mut next = cfg.config.clone();
        if key == "env" {
            let id = parse_env(value)?;
            if id != next.env {
                let algo = next.algo;
                next = ExperimentConfig::defaults(id).with_algo(algo);
                next.seeds = cfg.config.seeds.clone();
            }
        } else {
            next.set(key, value)?;
        }
        next.validate()?;
        cfg.config = next;
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn oaktd_config_free(config: *mut OaktdConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Trains one seed of `config` to completion.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oaktd_train(
    config: *const OaktdConfig,
    seed: u64,
    out: *mut *mut OaktdModel,
) -> OaktdStatus {
    guard(|| {
        let cfg = handle(config, "config")?;
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let result = train(&cfg.config, seed)?;
        let model = OaktdModel {
            config: cfg.config.clone(),
            seed,
            agent: result.agent,
            log: result.log,
        };
        write(out, Box::into_raw(Box::new(model)), "out")
    })
}

/// # Safety
/// `model` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn oaktd_model_free(model: *mut OaktdModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Learned value of a physical state.
///
/// # Safety
/// `model` must be a live handle, `state` must hold `len` doubles and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn oaktd_model_value(
    model: *const OaktdModel,
    state: *const f64,
    len: usize,
    out: *mut f64,
) -> OaktdStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let s = input_state(state, len, m.agent.bounds.len())?;
        write(out, m.agent.value_normalized(&m.agent.normalize(&s)), "out")
    })
}

/// Number of dictionary prototypes; 0 for tile coding.
///
/// # Safety
/// `model` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn oaktd_model_dictionary_size(
    model: *const OaktdModel,
    out: *mut usize,
) -> OaktdStatus {
    guard(|| {
        let m = handle(model, "model")?;
        write(out, m.agent.dictionary().map_or(0, |d| d.len()), "out")
    })
}

/// Number of evaluation points recorded while training.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn oaktd_model_eval_count(model: *const OaktdModel) -> usize {
    model.as_ref().map_or(0, |m| m.log.len())
}

/// Evaluation point `index`: step, mean and population std of greedy returns.
///
/// # Safety
/// `model` must be a live handle; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn oaktd_model_eval(
    model: *const OaktdModel,
    index: usize,
    step: *mut u64,
    mean_return: *mut f64,
    std_return: *mut f64,
) -> OaktdStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let rec = m.log.get(index).ok_or_else(|| {
            Failure::new(
                OaktdStatus::InvalidArgument,
                format!("evaluation index {index} out of range 0..{}", m.log.len()),
            )
        })?;
        write(step, rec.step, "step")?;
        write(mean_return, rec.mean_return, "mean_return")?;
        write(std_return, rec.std_return, "std_return")
    })
}

/// Attention of a physical state over the dictionary of an OAKTD model.
/// `written` receives the dictionary size.
///
/// # Safety
/// `model` must be a live handle, `state` must hold `len` doubles, `out`
/// must hold `capacity` doubles and `written` be valid.
#[no_mangle]
pub unsafe extern "C" fn oaktd_model_attention(
    model: *const OaktdModel,
    state: *const f64,
    len: usize,
    out: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> OaktdStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let (dict, learner) = match (m.agent.dictionary(), m.agent.learner()) {
            (Some(d), Some(l)) if !d.is_empty() => (d, l),
            _ => {
                return Err(Failure::new(
                    OaktdStatus::InvalidArgument,
                    "attention needs an oaktd model with a non-empty dictionary",
                ))
            }
        };
        let s = m
            .agent
            .normalize(&input_state(state, len, m.agent.bounds.len())?);
        let a = attention(&learner.w, &s, dict.prototypes());
        write(written, a.len(), "written")?;
        output_slice(out, capacity, a.len())?.copy_from_slice(&a);
        Ok(())
    })
}

/// Writes the model as JSON.
///
/// # Safety
/// `model` must be a live handle and `path` a valid C string.
#[no_mangle]
pub unsafe extern "C" fn oaktd_model_save(
    model: *const OaktdModel,
    path: *const c_char,
) -> OaktdStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let snapshot = ModelSnapshot {
            config: m.config.clone(),
            seed: m.seed,
            agent: m.agent.clone(),
        };
        save_model(Path::new(text(path, "path")?), &snapshot)?;
        Ok(())
    })
}

/// Reads a model written by [`oaktd_model_save`] or the command-line tool.
/// The evaluation log is not stored in snapshots, so the loaded model has none.
///
/// # Safety
/// `path` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oaktd_model_load(
    path: *const c_char,
    out: *mut *mut OaktdModel,
) -> OaktdStatus {
    guard(|| {
        let snap = load_model(Path::new(text(path, "path")?))?;
        let model = OaktdModel {
            config: snap.config,
            seed: snap.seed,
            agent: snap.agent,
            log: Vec::new(),
        };
        write(out, Box::into_raw(Box::new(model)), "out")
    })
}
