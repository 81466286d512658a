#ifndef HALL_C_H
#define HALL_C_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  HALL_OK = 0,
  HALL_CHECK_FAILED = 1,  /* computed fine, but a mathematical check did not pass; the report is still returned */
  HALL_INPUT_ERROR = 2,
  HALL_RESOURCE_ERROR = 3,
  HALL_INTERNAL_ERROR = 4
} hall_status;

typedef enum { HALL_FORMAT_JSON = 0, HALL_FORMAT_CSV = 1 } hall_format;

typedef struct hall_instance hall_instance;
typedef struct hall_module hall_module;

/* Message for the last non-OK status on this thread; empty when none. */
const char* hall_last_error(void);
/* Releases strings returned through char** out parameters. */
void hall_free_string(char* s);

/* Ceiling on enumeration units; 0 removes it. */
void hall_set_budget(uint64_t limit);
uint64_t hall_budget_used(void);
void hall_reset_budget(void);
void hall_set_jobs(int jobs);

/* name: vect_fq, vect_f1, rep_fq, rep_f1, nil_jordan_fq. quiver_json may be NULL for instances without one. */
hall_status hall_instance_create(const char* name, int q, const char* quiver_json, hall_instance** out);
void hall_instance_free(hall_instance* inst);
/* Writes {"name", "q", "quiver"} JSON. */
hall_status hall_instance_describe(const hall_instance* inst, char** out);
/* Iso keys of the given size as a JSON array. */
hall_status hall_instance_keys(const hall_instance* inst, const char* size, char** out);

/* Product of two basis elements: {"left", "right", "result": {key: coefficient}}. */
hall_status hall_multiply(const hall_instance* inst, const char* left, const char* right, char** out);
/* Multiplication table over basis keys below cap. */
hall_status hall_mult_table(const hall_instance* inst, const char* cap, hall_format format, char** out);
/* Incidence coproduct of a basis element, with the coassociativity comparison. */
hall_status hall_comultiply(const hall_instance* inst, const char* key, char** out);
/* Structure constant of (left, right; target) as a polynomial in q over the instance family. */
hall_status hall_polynomial(const char* name, const char* quiver_json, const char* left, const char* right,
                            const char* target, const int* primes, int nprimes, int holdout, char** out);
/* 2-Segal and unitality of the S-construction up to level 3; corrupt != 0 duplicates a block of X_3 first. */
hall_status hall_check_2segal(const hall_instance* inst, const char* cap, int corrupt, char** out);
/* Inclusion of a full subcategory: CULF/IKEO certificates and hom checks. sub is "zero:V" or "even:V"
   (dimension at vertex V zero, or even). HALL_CHECK_FAILED when CULF fails. */
hall_status hall_check_culf(const hall_instance* inst, const char* sub, const char* cap, char** out);
/* Linear relations among words in the simple objects with total size `size`. */
hall_status hall_relations(const hall_instance* inst, const char* size, char** out);
/* Dimension of the simples-generated component against the number of iso classes, per size below cap. */
hall_status hall_simples_span(const hall_instance* inst, const char* cap, char** out);

/* duality_json: {"theta_sign": 1 or -1, "vertex_signs": [...], "arrow_signs": [...]}. */
hall_status hall_module_create(const hall_instance* inst, const char* duality_json, const char* cap, hall_module** out);
void hall_module_free(hall_module* mod);
/* Basis keys below the cap with their isometry orders. */
hall_status hall_module_basis(const hall_module* mod, char** out);
/* delta_u acting on the module basis element m. */
hall_status hall_module_act(const hall_module* mod, const char* u, const char* m, char** out);
/* Module axiom on all basis triples below the cap; HALL_CHECK_FAILED on a violation. */
hall_status hall_module_check(const hall_module* mod, char** out);
/* Comparison of naive and weighted constants with the closed form. */
hall_status hall_module_reconciliation(char** out);
/* Relative 2-Segal certificate of the isotropic-flag construction over a duality. */
hall_status hall_module_certify(const hall_instance* inst, const char* duality_json, const char* cap, char** out);

/* Stable-framed module: basis, action table, relative 2-Segal certificate, axiom check. */
hall_status hall_framed(const hall_instance* inst, const char* stability_json, const char* cap, char** out);

/* Shuffle product of two symmetric polynomials (as accepted by the parser: JSON, "d" or "d:2,1"). */
hall_status hall_coha_multiply(int m, const char* left, const char* right, char** out);
/* Signed-shuffle action of an algebra element on a module element. */
hall_status hall_coha_act(int m, const char* left, const char* right, char** out);
hall_status hall_coha_dt(int m, int weight_cap, int degree_cap, hall_format format, char** out);
hall_status hall_coha_wprim(int m, int weight_cap, int degree_cap, hall_format format, char** out);

#ifdef __cplusplus
}
#endif

#endif
