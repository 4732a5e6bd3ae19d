#ifndef SEAD_SEAD_H
#define SEAD_SEAD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SEAD_API __declspec(dllexport)
#else
#define SEAD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sead_status {
    SEAD_OK = 0,
    SEAD_E_INVALID_ARGUMENT = 1,
    SEAD_E_IO = 2,
    SEAD_E_FORMAT = 3,
    SEAD_E_PRECONDITION = 4,
    SEAD_E_NUMERIC = 5,
    SEAD_E_NOT_FOUND = 6,
    SEAD_E_EXISTS = 7,
    SEAD_E_INTERNAL = 99
} sead_status;

typedef struct sead_config sead_config;
typedef struct sead_store sead_store;
typedef struct sead_model sead_model;
typedef struct sead_ldr sead_ldr;

/* Message of the last failed call on this thread; "" if none. */
SEAD_API const char* sead_last_error_message(void);
SEAD_API const char* sead_status_name(sead_status status);
SEAD_API const char* sead_version(void);

/* Strings handed out by the library are released with sead_string_free. */
SEAD_API void sead_string_free(char* s);

/* config; path == NULL gives the built-in defaults */
SEAD_API sead_status sead_config_load(const char* path, sead_config** out);
SEAD_API void sead_config_free(sead_config* cfg);
SEAD_API sead_status sead_config_set_seed(sead_config* cfg, uint64_t seed);
SEAD_API sead_status sead_config_set_output_dir(sead_config* cfg, const char* dir);
SEAD_API sead_status sead_config_output_dir(const sead_config* cfg, char** out);
SEAD_API sead_status sead_config_to_json(const sead_config* cfg, char** out);

/* volume store */
SEAD_API sead_status sead_store_load(const char* dir, sead_store** out);
SEAD_API void sead_store_free(sead_store* store);
SEAD_API sead_status sead_store_count(const sead_store* store, size_t* out);
SEAD_API sead_status sead_store_digest(const sead_store* store, uint64_t* out);

/* model checkpoints */
SEAD_API sead_status sead_model_load(const char* path, sead_model** out);
SEAD_API void sead_model_free(sead_model* model);
SEAD_API sead_status sead_model_latent_dim(const sead_model* model, int* out);
SEAD_API sead_status sead_model_method(const sead_model* model, char** out);
SEAD_API sead_status sead_model_extract(const sead_model* model, const sead_store* store, sead_ldr** out);

/* latent tables */
SEAD_API sead_status sead_ldr_load(const char* path, sead_ldr** out);
SEAD_API sead_status sead_ldr_save(const sead_ldr* ldr, const char* path);
SEAD_API void sead_ldr_free(sead_ldr* ldr);
SEAD_API sead_status sead_ldr_shape(const sead_ldr* ldr, size_t* rows, int* dim);
/* Copies rows*dim floats, row-major; capacity is in floats. */
SEAD_API sead_status sead_ldr_values(const sead_ldr* ldr, float* dst, size_t capacity);

/* Pipeline commands. out_root is the output directory; summary (optional) receives the
   text the CLI prints. */
SEAD_API sead_status sead_cmd_gen_data(const sead_config* cfg, const char* out_root, int force, char** summary);
SEAD_API sead_status sead_cmd_train(const sead_config* cfg, const char* method, const char* out_root, int force,
                                    char** summary);
SEAD_API sead_status sead_cmd_extract(const char* checkpoint, const char* data_dir, const char* output, int force,
                                      char** summary);

/* Optional overrides for sead_cmd_harmonize; a negative value or NULL keeps the config default. */
typedef struct sead_harmonize_options {
    double sigma;
    int eb;
    int covariates;
    const char* input;
    const char* output;
} sead_harmonize_options;

SEAD_API void sead_harmonize_options_init(sead_harmonize_options* opts);
SEAD_API sead_status sead_cmd_harmonize(const sead_config* cfg, const char* method, const char* out_root,
                                        const sead_harmonize_options* opts, int force, char** summary);
SEAD_API sead_status sead_cmd_evaluate(const sead_config* cfg, const char* out_root, int force, char** summary);
SEAD_API sead_status sead_cmd_report(const char* report_json, char** text);

#ifdef __cplusplus
}
#endif

#endif
