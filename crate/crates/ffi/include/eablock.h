#ifndef EABLOCK_H
#define EABLOCK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EablockStatus {
  EABLOCK_STATUS_OK = 0,
  EABLOCK_STATUS_NULL_ARGUMENT = 1,
  EABLOCK_STATUS_INVALID_UTF8 = 2,
  EABLOCK_STATUS_PARSE = 3,
  EABLOCK_STATUS_VALIDATION = 4,
  EABLOCK_STATUS_IO = 5,
  EABLOCK_STATUS_BACKEND = 6,
  EABLOCK_STATUS_CONFIG = 7,
  EABLOCK_STATUS_PANIC = 8,
} EablockStatus;

/**
 * An alignment backend (local gazetteer matcher or remote service).
 */
typedef struct EablockLinker EablockLinker;

/**
 * A parsed mapping document.
 */
typedef struct EablockMapping EablockMapping;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next library call on the same thread.
 */
const char *eablock_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *eablock_version(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void eablock_string_free(char *s);

/**
 * Parses Turtle mapping text.
 *
 * # Safety
 * `text` is a NUL-terminated string; `out` is writable.
 */
enum EablockStatus eablock_mapping_parse(const char *text, struct EablockMapping **out);

/**
 * Reads and parses a mapping file.
 *
 * # Safety
 * `path` is a NUL-terminated string; `out` is writable.
 */
enum EablockStatus eablock_mapping_load(const char *path, struct EablockMapping **out);

/**
 * Serializes a mapping back to Turtle. Free the result with
 * [`eablock_string_free`].
 *
 * # Safety
 * `mapping` is a live handle; `out` is writable.
 */
enum EablockStatus eablock_mapping_serialize(const struct EablockMapping *mapping, char **out);

/**
 * Number of triples maps, or 0 for a null handle.
 *
 * # Safety
 * `mapping` is null or a live handle.
 */
size_t eablock_mapping_triples_map_count(const struct EablockMapping *mapping);

/**
 * Number of predicate-object maps that call an alignment function.
 *
 * # Safety
 * `mapping` is null or a live handle.
 */
size_t eablock_mapping_function_call_count(const struct EablockMapping *mapping);

/**
 * # Safety
 * `mapping` is null or a handle not yet freed.
 */
void eablock_mapping_free(struct EablockMapping *mapping);

/**
 * Builds a local gazetteer linker. `stopwords_path` may be null for the
 * built-in list.
 *
 * # Safety
 * String arguments are NUL-terminated; `out` is writable.
 */
enum EablockStatus eablock_linker_local_new(const char *gazetteer_path,
                                            uint32_t max_edit_distance,
                                            const char *stopwords_path,
                                            struct EablockLinker **out);

/**
 * Builds an HTTP linker. A null `endpoint` reads `EABLOCK_ENDPOINT`.
 *
 * # Safety
 * `endpoint` is null or NUL-terminated; `out` is writable.
 */
enum EablockStatus eablock_linker_remote_new(const char *endpoint,
                                             bool fail_fast,
                                             double score_floor,
                                             struct EablockLinker **out);

/**
 * # Safety
 * `linker` is null or a handle not yet freed.
 */
void eablock_linker_free(struct EablockLinker *linker);

/**
 * Aligns one keyword. `out_json` receives a link object
 * (`{"surface","iri","kg","score"}`) or `null`.
 *
 * # Safety
 * `linker` is live; strings are NUL-terminated; `out_json` is writable.
 */
enum EablockStatus eablock_align_keyword(const struct EablockLinker *linker,
                                         const char *text,
                                         const char *kg,
                                         char **out_json);

/**
 * Aligns the entities of a short text. `out_json` receives an array of
 * link objects.
 *
 * # Safety
 * As [`eablock_align_keyword`].
 */
enum EablockStatus eablock_align_text(const struct EablockLinker *linker,
                                      const char *text,
                                      const char *kg,
                                      char **out_json);

/**
 * Translates a mapping with function calls into a function-free mapping
 * plus alignment tables under `out_dir`. `sources_dir` may be null (the
 * mapping's directory is used). `out_manifest_json` may be null; when not,
 * it receives the translation report.
 *
 * # Safety
 * `linker` is live; strings are null or NUL-terminated as documented.
 */
enum EablockStatus eablock_translate(const char *mapping_path,
                                     const char *sources_dir,
                                     const struct EablockLinker *linker,
                                     const char *out_dir,
                                     bool keep_intermediate,
                                     char **out_manifest_json);

/**
 * Executes a function-free mapping and writes sorted N-Triples to
 * `out_path`. `out_triple_count` may be null.
 *
 * # Safety
 * Strings are null or NUL-terminated as documented.
 */
enum EablockStatus eablock_materialize(const char *mapping_path,
                                       const char *sources_dir,
                                       const char *out_path,
                                       size_t *out_triple_count);

/**
 * Computes class-graph metrics of an N-Triples file as JSON. A null
 * `type_predicate` means rdf:type.
 *
 * # Safety
 * Strings are null or NUL-terminated as documented; `out_json` is writable.
 */
enum EablockStatus eablock_analyze(const char *kg_path,
                                   const char *type_predicate,
                                   char **out_json);

/**
 * The registered alignment functions as a JSON array.
 *
 * # Safety
 * `out_json` is writable.
 */
enum EablockStatus eablock_list_functions(char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EABLOCK_H */
