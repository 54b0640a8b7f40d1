#ifndef SCENEGEN_H
#define SCENEGEN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum SgStatus {
  SG_STATUS_OK = 0,
  SG_STATUS_NULL_ARGUMENT = 1,
  SG_STATUS_INVALID_UTF8 = 2,
  /**
   * The description is off-topic or denylisted.
   */
  SG_STATUS_REJECTED = 3,
  SG_STATUS_PARSE = 4,
  SG_STATUS_VALIDATION = 5,
  SG_STATUS_SIMULATION = 6,
  SG_STATUS_DATASET = 7,
  SG_STATUS_IO = 8,
  SG_STATUS_METRICS = 9,
  /**
   * A Rust panic was caught at the boundary.
   */
  SG_STATUS_INTERNAL = 10,
} SgStatus;

/**
 * Opaque trajectory dataset handle.
 */
typedef struct SgDataset SgDataset;

/**
 * Opaque lexicon handle.
 */
typedef struct SgLexicon SgLexicon;

/**
 * Dataset counts; arrays are indexed vehicle, pedestrian, bicycle.
 */
typedef struct SgStats {
  size_t total_frames;
  size_t agents[3];
  size_t records[3];
  double avg_per_frame[3];
  double frames_per_minute;
} SgStats;

/**
 * Per-class prediction errors indexed vehicle, pedestrian, bicycle; NaN
 * marks a class with no samples.
 */
typedef struct SgMetrics {
  double ade[3];
  double fde[3];
  double tae;
  double tfe;
  size_t pairs;
} SgMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *sg_last_error(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void sg_string_free(char *s);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum SgStatus sg_lexicon_default(struct SgLexicon **out);

/**
 * Loads a lexicon file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum SgStatus sg_lexicon_load(const char *path, struct SgLexicon **out);

/**
 * # Safety
 * `lex` must be null or a handle from `sg_lexicon_*` not yet freed.
 */
void sg_lexicon_free(struct SgLexicon *lex);

/**
 * Relevance check plus description rewriting. Returns `Rejected` for
 * off-topic text, leaving `out` untouched.
 *
 * # Safety
 * Pointers must be valid; `description` NUL-terminated.
 */
enum SgStatus sg_filter(const struct SgLexicon *lex, const char *description, char **out);

/**
 * Extracts and repairs the configuration in a model response; `out`
 * receives the canonical configuration text.
 *
 * # Safety
 * Pointers must be valid; `response` NUL-terminated.
 */
enum SgStatus sg_validate(const struct SgLexicon *lex, const char *response, char **out);

/**
 * Simulates a configuration and collects its trajectories.
 *
 * # Safety
 * `config` must be NUL-terminated; `out` valid for writes.
 */
enum SgStatus sg_simulate(const char *config, struct SgDataset **out);

/**
 * # Safety
 * `path` must be NUL-terminated; `out` valid for writes.
 */
enum SgStatus sg_dataset_read(const char *path, struct SgDataset **out);

/**
 * Parses `.traj` text held in memory.
 *
 * # Safety
 * `traj` must be NUL-terminated; `out` valid for writes.
 */
enum SgStatus sg_dataset_parse(const char *traj, struct SgDataset **out);

/**
 * # Safety
 * `ds` must be a live handle; `path` NUL-terminated.
 */
enum SgStatus sg_dataset_write(const struct SgDataset *ds, const char *path);

/**
 * Serializes to `.traj` text.
 *
 * # Safety
 * `ds` must be a live handle; `out` valid for writes.
 */
enum SgStatus sg_dataset_to_string(const struct SgDataset *ds, char **out);

/**
 * Record count; 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t sg_dataset_len(const struct SgDataset *ds);

/**
 * Appends `b` to `a` with shifted ids and frames into a new handle.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` valid for writes.
 */
enum SgStatus sg_dataset_merge(const struct SgDataset *a,
                               const struct SgDataset *b,
                               struct SgDataset **out);

/**
 * Agent-level split; both outputs are new handles.
 *
 * # Safety
 * `ds` must be a live handle; out pointers valid for writes.
 */
enum SgStatus sg_dataset_split(const struct SgDataset *ds,
                               double train_fraction,
                               uint64_t seed,
                               struct SgDataset **train,
                               struct SgDataset **test);

/**
 * # Safety
 * `ds` must be a live handle; `out` valid for writes.
 */
enum SgStatus sg_dataset_stats(const struct SgDataset *ds,
                               double wall_duration_s,
                               struct SgStats *out);

/**
 * Constant-velocity baseline scored with ADE/FDE. `weights` points to
 * three class weights (vehicle, pedestrian, bicycle) or is null for equal
 * weights.
 *
 * # Safety
 * `ds` must be a live handle; `weights` null or 3 readable doubles; `out`
 * valid for writes.
 */
enum SgStatus sg_metrics(const struct SgDataset *ds,
                         size_t observe_len,
                         size_t predict_len,
                         const double *weights,
                         struct SgMetrics *out);

/**
 * # Safety
 * `ds` must be null or a handle from this library not yet freed.
 */
void sg_dataset_free(struct SgDataset *ds);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCENEGEN_H */
