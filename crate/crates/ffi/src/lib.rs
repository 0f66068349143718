//! C ABI for the eablock toolkit.
//!
//! Every function returns an [`EablockStatus`]. On failure the message is
//! kept per thread and read with [`eablock_last_error_message`]. Strings
//! handed out by the library must be released with [`eablock_string_free`];
//! handles with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::ptr;

use libc::c_char;

use eablock::functions::list_functions;
use eablock::linker::{align_keyword, align_text, AlignmentBackend, LinkerConfig, TargetKg};
use eablock::materializer::{MaterializeError, NTriplesError};
use eablock::metrics::RDF_TYPE;
use eablock::pipeline::{self, build_backend, LinkerChoice, PipelineError};
use eablock::rml::{parse_mapping, serialize_mapping, MappingDocument, ObjectMap};
use eablock::translator::TranslateError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EablockStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    Io = 5,
    Backend = 6,
    Config = 7,
    Panic = 8,
}

/// A parsed mapping document.
pub struct EablockMapping {
    doc: MappingDocument,
}

/// An alignment backend (local gazetteer matcher or remote service).
pub struct EablockLinker {
    backend: Box<dyn AlignmentBackend>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(message).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(EablockStatus, String);

impl Failure {
    fn null(name: &str) -> Failure {
        Failure(EablockStatus::NullArgument, format!("{name} must not be null"))
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Failure {
        let status = match &e {
            PipelineError::Mapping { .. } | PipelineError::NTriples(NTriplesError::Syntax { .. }) => {
                EablockStatus::Parse
            }
            PipelineError::Config(_) => EablockStatus::Config,
            PipelineError::Translate(TranslateError::Backend { .. })
            | PipelineError::Materialize(MaterializeError::Backend { .. }) => EablockStatus::Backend,
            other if other.exit_code() == 1 => EablockStatus::Validation,
            _ => EablockStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

/// Runs `f`, records any failure or panic, and returns the status.
fn guard(f: impl FnOnce() -> FfiResult<()>) -> EablockStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EablockStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {message}"));
            EablockStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` is null or a NUL-terminated string valid for the call.
unsafe fn read_str<'a>(ptr: *const c_char, name: &str) -> FfiResult<&'a str> {
    if ptr.is_null() {
        return Err(Failure::null(name));
    }
    CStr::from_ptr(ptr).to_str().map_err(|e| Failure(EablockStatus::InvalidUtf8, format!("{name}: {e}")))
}

/// # Safety
/// As [`read_str`]; null yields `None`.
unsafe fn read_opt_str<'a>(ptr: *const c_char, name: &str) -> FfiResult<Option<&'a str>> {
    if ptr.is_null() {
        Ok(None)
    } else {
        read_str(ptr, name).map(Some)
    }
}

fn out_ptr<T>(out: *mut T, name: &str) -> FfiResult<()> {
    if out.is_null() {
        Err(Failure::null(name))
    } else {
        Ok(())
    }
}

fn into_c_string(s: String) -> FfiResult<*mut c_char> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(EablockStatus::InvalidUtf8, "output contains a NUL byte".into()))
}

fn parse_kg(s: &str) -> FfiResult<TargetKg> {
    s.parse().map_err(|e: String| Failure(EablockStatus::Config, e))
}

fn backend_failure(e: eablock::linker::LinkError) -> Failure {
    Failure(EablockStatus::Backend, e.to_string())
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn eablock_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn eablock_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn eablock_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses Turtle mapping text.
///
/// # Safety
/// `text` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn eablock_mapping_parse(text: *const c_char, out: *mut *mut EablockMapping) -> EablockStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let text = read_str(text, "text")?;
        let doc = parse_mapping(text).map_err(|e| Failure(EablockStatus::Parse, e.to_string()))?;
        *out = Box::into_raw(Box::new(EablockMapping { doc }));
        Ok(())
    })
}

/// Reads and parses a mapping file.
///
/// # Safety
/// `path` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn eablock_mapping_load(path: *const c_char, out: *mut *mut EablockMapping) -> EablockStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let path = read_str(path, "path")?;
        let doc = pipeline::load_mapping(Path::new(path))?;
        *out = Box::into_raw(Box::new(EablockMapping { doc }));
        Ok(())
    })
}

/// Serializes a mapping back to Turtle. Free the result with
/// [`eablock_string_free`].
///
/// # Safety
/// `mapping` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn eablock_mapping_serialize(
    mapping: *const EablockMapping,
    out: *mut *mut c_char,
) -> EablockStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let m = mapping.as_ref().ok_or_else(|| Failure::null("mapping"))?;
        *out = into_c_string(serialize_mapping(&m.doc))?;
        Ok(())
    })
}

/// Number of triples maps, or 0 for a null handle.
///
/// # Safety
/// `mapping` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eablock_mapping_triples_map_count(mapping: *const EablockMapping) -> usize {
    mapping.as_ref().map_or(0, |m| m.doc.triples_maps.len())
}

/// Number of predicate-object maps that call an alignment function.
///
/// # Safety
/// `mapping` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eablock_mapping_function_call_count(mapping: *const EablockMapping) -> usize {
    mapping.as_ref().map_or(0, |m| {
        m.doc
            .triples_maps
            .iter()
            .flat_map(|tm| &tm.predicate_object_maps)
            .filter(|p| matches!(p.object, ObjectMap::Function(_)))
            .count()
    })
}

/// # Safety
/// `mapping` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eablock_mapping_free(mapping: *mut EablockMapping) {
    if !mapping.is_null() {
        drop(Box::from_raw(mapping));
    }
}

/// Builds a local gazetteer linker. `stopwords_path` may be null for the
/// built-in list.
///
/// # Safety
/// String arguments are NUL-terminated; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn eablock_linker_local_new(
    gazetteer_path: *const c_char,
    max_edit_distance: u32,
    stopwords_path: *const c_char,
    out: *mut *mut EablockLinker,
) -> EablockStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let gazetteer = PathBuf::from(read_str(gazetteer_path, "gazetteer_path")?);
        let mut config = LinkerConfig { max_edit_distance: max_edit_distance as usize, ..LinkerConfig::default() };
        if let Some(p) = read_opt_str(stopwords_path, "stopwords_path")? {
            config.load_stopwords(Path::new(p)).map_err(|e| Failure(EablockStatus::Io, format!("{p}: {e}")))?;
        }
        let backend = build_backend(&LinkerChoice::Local { gazetteer, config })?;
        *out = Box::into_raw(Box::new(EablockLinker { backend }));
        Ok(())
    })
}

/// Builds an HTTP linker. A null `endpoint` reads `EABLOCK_ENDPOINT`.
///
/// # Safety
/// `endpoint` is null or NUL-terminated; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn eablock_linker_remote_new(
    endpoint: *const c_char,
    fail_fast: bool,
    score_floor: f64,
    out: *mut *mut EablockLinker,
) -> EablockStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let endpoint = read_opt_str(endpoint, "endpoint")?.map(str::to_string);
        let backend = build_backend(&LinkerChoice::Remote { endpoint, fail_fast, score_floor })?;
        *out = Box::into_raw(Box::new(EablockLinker { backend }));
        Ok(())
    })
}

/// # Safety
/// `linker` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eablock_linker_free(linker: *mut EablockLinker) {
    if !linker.is_null() {
        drop(Box::from_raw(linker));
    }
}

/// Aligns one keyword. `out_json` receives a link object
/// (`{"surface","iri","kg","score"}`) or `null`.
///
/// # Safety
/// `linker` is live; strings are NUL-terminated; `out_json` is writable.
#[no_mangle]
pub unsafe extern "C" fn eablock_align_keyword(
    linker: *const EablockLinker,
    text: *const c_char,
    kg: *const c_char,
    out_json: *mut *mut c_char,
) -> EablockStatus {
    guard(|| {
        out_ptr(out_json, "out_json")?;
        let l = linker.as_ref().ok_or_else(|| Failure::null("linker"))?;
        let text = read_str(text, "text")?;
        let kg = parse_kg(read_str(kg, "kg")?)?;
        let link = align_keyword(l.backend.as_ref(), text, kg).map_err(backend_failure)?;
        *out_json = into_c_string(serde_json::to_string(&link).expect("link serializes"))?;
        Ok(())
    })
}

/// Aligns the entities of a short text. `out_json` receives an array of
/// link objects.
///
/// # Safety
/// As [`eablock_align_keyword`].
#[no_mangle]
pub unsafe extern "C" fn eablock_align_text(
    linker: *const EablockLinker,
    text: *const c_char,
    kg: *const c_char,
    out_json: *mut *mut c_char,
) -> EablockStatus {
    guard(|| {
        out_ptr(out_json, "out_json")?;
        let l = linker.as_ref().ok_or_else(|| Failure::null("linker"))?;
        let text = read_str(text, "text")?;
        let kg = parse_kg(read_str(kg, "kg")?)?;
        let links = align_text(l.backend.as_ref(), text, kg).map_err(backend_failure)?;
        *out_json = into_c_string(serde_json::to_string(&links).expect("links serialize"))?;
        Ok(())
    })
}

/// Translates a mapping with function calls into a function-free mapping
/// plus alignment tables under `out_dir`. `sources_dir` may be null (the
/// mapping's directory is used). `out_manifest_json` may be null; when not,
/// it receives the translation report.
///
/// # Safety
/// `linker` is live; strings are null or NUL-terminated as documented.
#[no_mangle]
pub unsafe extern "C" fn eablock_translate(
    mapping_path: *const c_char,
    sources_dir: *const c_char,
    linker: *const EablockLinker,
    out_dir: *const c_char,
    keep_intermediate: bool,
    out_manifest_json: *mut *mut c_char,
) -> EablockStatus {
    guard(|| {
        let l = linker.as_ref().ok_or_else(|| Failure::null("linker"))?;
        let mapping = read_str(mapping_path, "mapping_path")?;
        let sources = read_opt_str(sources_dir, "sources_dir")?;
        let out = read_str(out_dir, "out_dir")?;
        let t = pipeline::translate_files(
            Path::new(mapping),
            sources.map(Path::new),
            l.backend.as_ref(),
            Path::new(out),
            keep_intermediate,
        )?;
        if !out_manifest_json.is_null() {
            *out_manifest_json = into_c_string(t.manifest_json())?;
        }
        Ok(())
    })
}

/// Executes a function-free mapping and writes sorted N-Triples to
/// `out_path`. `out_triple_count` may be null.
///
/// # Safety
/// Strings are null or NUL-terminated as documented.
#[no_mangle]
pub unsafe extern "C" fn eablock_materialize(
    mapping_path: *const c_char,
    sources_dir: *const c_char,
    out_path: *const c_char,
    out_triple_count: *mut usize,
) -> EablockStatus {
    guard(|| {
        let mapping = read_str(mapping_path, "mapping_path")?;
        let sources = read_opt_str(sources_dir, "sources_dir")?;
        let out = read_str(out_path, "out_path")?;
        let graph = pipeline::materialize_files(Path::new(mapping), sources.map(Path::new), Path::new(out))?;
        if !out_triple_count.is_null() {
            *out_triple_count = graph.len();
        }
        Ok(())
    })
}

/// Computes class-graph metrics of an N-Triples file as JSON. A null
/// `type_predicate` means rdf:type.
///
/// # Safety
/// Strings are null or NUL-terminated as documented; `out_json` is writable.
#[no_mangle]
pub unsafe extern "C" fn eablock_analyze(
    kg_path: *const c_char,
    type_predicate: *const c_char,
    out_json: *mut *mut c_char,
) -> EablockStatus {
    guard(|| {
        out_ptr(out_json, "out_json")?;
        let kg = read_str(kg_path, "kg_path")?;
        let predicate = read_opt_str(type_predicate, "type_predicate")?.unwrap_or(RDF_TYPE);
        let metrics = pipeline::analyze_file(Path::new(kg), predicate)?;
        *out_json = into_c_string(pipeline::metrics_json(&metrics))?;
        Ok(())
    })
}

/// The registered alignment functions as a JSON array.
///
/// # Safety
/// `out_json` is writable.
#[no_mangle]
pub unsafe extern "C" fn eablock_list_functions(out_json: *mut *mut c_char) -> EablockStatus {
    guard(|| {
        out_ptr(out_json, "out_json")?;
        *out_json = into_c_string(serde_json::to_string(list_functions()).expect("registry serializes"))?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_status() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, EablockStatus::Panic);
        let msg = unsafe { CStr::from_ptr(eablock_last_error_message()) }.to_str().unwrap();
        assert!(msg.contains("boom"));
    }

    #[test]
    fn success_clears_error() {
        set_error("old");
        assert_eq!(guard(|| Ok(())), EablockStatus::Ok);
        assert!(eablock_last_error_message().is_null());
    }

    #[test]
    fn version_is_terminated() {
        let v = unsafe { CStr::from_ptr(eablock_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
