/* C API for the item-selection toolkit. All functions are thread-safe as
 * long as each handle is used from one thread at a time. Strings returned
 * through char** out parameters are heap-allocated; release them with
 * isp_string_free. On any failure the return code is nonzero and
 * isp_last_error() describes the problem for the calling thread. */
#ifndef ISP_H
#define ISP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum isp_status {
  ISP_OK = 0,
  ISP_ERR_IO = 1,         /* file missing/unreadable */
  ISP_ERR_PARSE = 2,      /* malformed input file */
  ISP_ERR_DATA = 3,       /* inconsistent data (ids, dims, empty sets) */
  ISP_ERR_INFEASIBLE = 4, /* no selection can satisfy the instance */
  ISP_ERR_CONFIG = 5,     /* invalid parameter or config value */
  ISP_ERR_INTERNAL = 6
} isp_status;

typedef struct isp_catalog isp_catalog;
typedef struct isp_embedding isp_embedding;

const char* isp_version(void);
const char* isp_status_name(isp_status status);

/* Message for the most recent failure on this thread; never NULL. */
const char* isp_last_error(void);

void isp_string_free(char* text);

/* format: "auto" (by extension), "csv", or "json". */
isp_status isp_catalog_load(const char* path, const char* format, isp_catalog** out);
void isp_catalog_free(isp_catalog* catalog);
size_t isp_catalog_item_count(const isp_catalog* catalog);

/* normalize != 0 applies L2 row normalization. */
isp_status isp_embedding_tfidf(const isp_catalog* catalog, size_t vocab_size,
                               int normalize, isp_embedding** out);
isp_status isp_embedding_load(const char* path, const isp_catalog* catalog,
                              isp_embedding** out);
/* metric: "euclidean" or "cosine". */
isp_status isp_embedding_set_metric(isp_embedding* embedding, const char* metric);
size_t isp_embedding_dim(const isp_embedding* embedding);
void isp_embedding_free(isp_embedding* embedding);

/* The four report entry points take a JSON config string and return a JSON
 * report string. Config keys (all optional unless stated):
 *
 * solve:     t, seed, backend | backends{unicost,diverse,max_cover},
 *            diversity_mode, categories[], pairs[[a,b],...], strict,
 *            kmeans_max_iters, time_budget_ms, cost_multipliers{id:mult},
 *            include_incidence, include_clusters
 * coverage:  selection[] (required), categories[], pairs[],
 *            include_incidence
 * warmstart: warm[] (required), q, sample_cap, seed, categories[], pairs[],
 *            selection_size
 * simulate:  K (required), k (required), batch (required), n, q, seed,
 *            policies[] | policy, weight_scheme, selection_mode,
 *            categories[], pairs[], uncertainty{id:u}, threads
 */
isp_status isp_solve_json(const isp_catalog* catalog, const isp_embedding* embedding,
                          const char* config_json, char** out_json);
isp_status isp_coverage_json(const isp_catalog* catalog, const char* config_json,
                             char** out_json);
isp_status isp_warmstart_json(const isp_catalog* catalog, const isp_embedding* embedding,
                              const char* config_json, char** out_json);
isp_status isp_simulate_json(const isp_catalog* catalog, const isp_embedding* embedding,
                             const char* config_json, char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* ISP_H */
