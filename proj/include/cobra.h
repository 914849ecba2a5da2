/* C interface to the cobra ensemble-aggregation library.
 *
 * Objects are opaque handles created and destroyed through this API; every
 * fallible call returns a cobra_status, with cobra_last_error() holding a
 * human-readable message for the calling thread. Structured options and
 * results travel as JSON strings; strings returned by the library must be
 * released with cobra_string_free().
 */
#ifndef COBRA_H
#define COBRA_H

#include <stddef.h>

#if defined(_WIN32)
#  define COBRA_API __declspec(dllexport)
#else
#  define COBRA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cobra_status {
    COBRA_OK = 0,
    COBRA_ERR_INVALID_ARGUMENT = 1,
    COBRA_ERR_INVALID_SPLIT = 2,
    COBRA_ERR_SHAPE = 3,
    COBRA_ERR_NO_CONSENSUS = 4,
    COBRA_ERR_EMPTY_ENSEMBLE = 5,
    COBRA_ERR_MACHINE_OUTPUT = 6,
    COBRA_ERR_LABEL = 7,
    COBRA_ERR_INVALID_WEIGHTS = 8,
    COBRA_ERR_PARSE = 9,
    COBRA_ERR_CONFIG = 10,
    COBRA_ERR_IO = 11,
    COBRA_ERR_RUNTIME = 12
} cobra_status;

typedef struct cobra_dataset cobra_dataset;
typedef struct cobra_model cobra_model;
typedef struct cobra_machine cobra_machine;

/* Pointwise prediction callback for externally trained machines. */
typedef double (*cobra_machine_fn)(const double* x, size_t d, void* user_data);

COBRA_API const char* cobra_version(void);

/* Message describing the most recent failure on the calling thread. */
COBRA_API const char* cobra_last_error(void);

COBRA_API void cobra_string_free(char* text);

/* --- datasets ----------------------------------------------------------- */

/* Row-major features (n x d); targets may be NULL for unlabeled data. */
COBRA_API cobra_status cobra_dataset_create(const double* features, const double* targets,
                                            size_t n, size_t d, cobra_dataset** out);

/* spec_json: {"kind": "friedman1", "n": 600, "d": 10, "noise": 1.0, "seed": 42} */
COBRA_API cobra_status cobra_dataset_generate(const char* spec_json, cobra_dataset** out);

/* target_column: header name or 0-based index; "" loads a feature-only file. */
COBRA_API cobra_status cobra_dataset_load_csv(const char* path, const char* target_column,
                                              int has_header, cobra_dataset** out);
COBRA_API cobra_status cobra_dataset_save_csv(const cobra_dataset* data, const char* path);

COBRA_API size_t cobra_dataset_rows(const cobra_dataset* data);
COBRA_API size_t cobra_dataset_cols(const cobra_dataset* data);
COBRA_API int cobra_dataset_has_targets(const cobra_dataset* data);

/* Copies row i's features into out (length d). */
COBRA_API cobra_status cobra_dataset_row(const cobra_dataset* data, size_t i, double* out,
                                         size_t out_len);
COBRA_API cobra_status cobra_dataset_split(const cobra_dataset* data, size_t k,
                                           unsigned long long seed, cobra_dataset** train_half,
                                           cobra_dataset** retained_half);
COBRA_API void cobra_dataset_free(cobra_dataset* data);

/* --- external machines --------------------------------------------------- */

/* Wraps an already fitted predictor; the callback must stay valid for the
 * machine's lifetime and be safe to call from any thread. */
COBRA_API cobra_status cobra_machine_callback_create(cobra_machine_fn fn, void* user_data,
                                                     const char* name, size_t dimension,
                                                     cobra_machine** out);
COBRA_API void cobra_machine_free(cobra_machine* machine);

/* --- models --------------------------------------------------------------- */

/* options_json:
 *   {"estimator": "kernelcobra",
 *    "config": {"lambda": 0.5, "epsilon": 0, "alpha": 0, ...},
 *    "machines": [{"kind": "ridge", "params": {"regularization": 1.0}}, ...],
 *    "k": 0, "seed": 42,
 *    "tune": {"grids": ["lambda=log:1e-3:1e3:50"], "folds": 5}}
 * Omitted fields take their defaults; an empty machine roster selects the
 * stock one for the estimator kind. */
COBRA_API cobra_status cobra_model_train(const cobra_dataset* data, const char* options_json,
                                         cobra_model** out);

/* Same, with extra externally fitted machines joining the ensemble. They are
 * expected to have been trained on the train half of the same (k, seed)
 * split, which cobra_dataset_split reproduces. */
COBRA_API cobra_status cobra_model_train_ex(const cobra_dataset* data, const char* options_json,
                                            cobra_machine* const* extra, size_t extra_count,
                                            cobra_model** out);

COBRA_API cobra_status cobra_model_predict(const cobra_model* model, const double* x, size_t d,
                                           double* out);

/* Normalized aggregation weights over the retained points at a query. */
COBRA_API cobra_status cobra_model_weights(const cobra_model* model, const double* x, size_t d,
                                           double* out, size_t out_len);

COBRA_API size_t cobra_model_retained_count(const cobra_model* model);
COBRA_API size_t cobra_model_machine_count(const cobra_model* model);

/* Tuning summary when the model was trained with a tune directive (JSON),
 * or NULL. */
COBRA_API cobra_status cobra_model_tuning(const cobra_model* model, char** json_out);

COBRA_API cobra_status cobra_model_save(const cobra_model* model, const char* dir);
COBRA_API cobra_status cobra_model_load(const char* dir, cobra_model** out);

/* (x1, x2, label) grid of the model's decision surface. Pass NaN bounds to
 * use the training data's bounding box with a 5% margin. */
COBRA_API cobra_status cobra_model_export_boundary(const cobra_model* model, double x1_min,
                                                   double x1_max, double x2_min, double x2_max,
                                                   size_t resolution, const char* out_csv);

COBRA_API void cobra_model_free(cobra_model* model);

/* --- tuning and benchmarks ------------------------------------------------ */

/* options_json:
 *   {"estimator": "kernelcobra", "grids": ["lambda=log:1e-3:1e3:50"],
 *    "folds": 5, "seed": 42, "config": {...}, "machines": [...]}
 * result: per-candidate table plus the selected parameters (JSON). */
COBRA_API cobra_status cobra_tune(const cobra_dataset* data, const char* options_json,
                                  char** result_json);

/* Runs the repeated-run RMSE benchmark described by config_json, writes
 * report.json / rmse.csv / errors.csv / timings.json under out_dir (the
 * config's out_dir when NULL) and returns the report as JSON. */
COBRA_API cobra_status cobra_bench_rmse(const char* config_json, const char* out_dir,
                                        char** report_json);

/* Aggregation-step timing sweep, e.g. sweep = "d=10,100,1000". */
COBRA_API cobra_status cobra_bench_timing(const char* config_json, const char* sweep,
                                          const char* out_dir, char** table_json);

#ifdef __cplusplus
}
#endif

#endif /* COBRA_H */
