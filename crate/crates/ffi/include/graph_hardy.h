#ifndef GRAPH_HARDY_H
#define GRAPH_HARDY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HgStatus {
  HG_STATUS_OK = 0,
  HG_STATUS_NULL_POINTER = 1,
  HG_STATUS_INVALID_ARGUMENT = 2,
  /*
   Disconnected, negative or asymmetric weights, zero measure, empty.
   */
  HG_STATUS_INVALID_GRAPH = 3,
  HG_STATUS_DIMENSION_MISMATCH = 4,
  /*
   Input has a component on the constants.
   */
  HG_STATUS_KERNEL_COMPONENT = 5,
  HG_STATUS_NON_CONVERGENT = 6,
  HG_STATUS_VALIDATION_FAILED = 7,
  HG_STATUS_IO = 8,
  HG_STATUS_PARSE = 9,
  HG_STATUS_PANIC = 10,
} HgStatus;

typedef enum HgBmoKind {
  HG_BMO_KIND_BZ1 = 1,
  HG_BMO_KIND_BZ2 = 2,
} HgBmoKind;

/*
 Opaque graph handle.
 */
typedef struct HgGraph HgGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or NULL. Valid until the
 next failing call on the same thread.
 */
const char *hg_last_error(void);

/*
 Builds a graph from `count` undirected edges `(xs[i], ys[i], ws[i])`.
 `xs[i] == ys[i]` is a loop.

 # Safety
 The three arrays must hold `count` elements; `out` must be writable.
 */
enum HgStatus hg_graph_from_edges(const size_t *xs,
                                  const size_t *ys,
                                  const double *ws,
                                  size_t count,
                                  struct HgGraph **out);

/*
 Loads an edge-list or JSON graph file.

 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum HgStatus hg_graph_from_file(const char *path, struct HgGraph **out);

/*
 Builds a named graph, e.g. `k2l`, `lazy_cycle_16`, `lazy_torus_32~1`.

 # Safety
 `name` must be a NUL-terminated string; `out` must be writable.
 */
enum HgStatus hg_graph_from_zoo(const char *name, struct HgGraph **out);

/*
 # Safety
 `g` must come from one of the constructors and not be freed twice. NULL is
 ignored.
 */
void hg_graph_free(struct HgGraph *g);

/*
 # Safety
 `g` must be a live handle or NULL (returns 0).
 */
size_t hg_graph_vertex_count(const struct HgGraph *g);

/*
 Number of directed edge slots (each undirected edge twice, loops once).

 # Safety
 `g` must be a live handle or NULL (returns 0).
 */
size_t hg_graph_edge_slot_count(const struct HgGraph *g);

/*
 Directed edge slots in the order used by edge functions.

 # Safety
 Each output array must hold `len = hg_graph_edge_slot_count(g)` elements.
 */
enum HgStatus hg_graph_edges(const struct HgGraph *g,
                             size_t *xs,
                             size_t *ys,
                             double *ws,
                             size_t len);

/*
 Vertex measure `m(x) = Σ_y μ_xy`.

 # Safety
 `out` must hold `len` elements.
 */
enum HgStatus hg_measure(const struct HgGraph *g, double *out, size_t len);

/*
 `df` over the edge slots.

 # Safety
 `f` must hold `len` elements and `out` `out_len = hg_graph_edge_slot_count(g)`.
 */
enum HgStatus hg_differential(const struct HgGraph *g,
                              const double *f,
                              size_t len,
                              double *out,
                              size_t out_len);

/*
 Lusin square function `L_β f` into `out` (may be NULL) and its L¹ norm
 into `norm`. `l_max = 0` picks the level count from `tol`.

 # Safety
 `f` (and `out` when non-NULL) must hold `len` elements; `norm` writable.
 */
enum HgStatus hg_quadnorm(const struct HgGraph *g,
                          const double *f,
                          size_t len,
                          double beta,
                          size_t l_max,
                          double tol,
                          double *out,
                          double *norm);

/*
 Riesz transform of a mean-zero `f`: `|∇Δ^{-1/2} f|` into `out` (may be
 NULL) and its L¹ norm into `l1`.

 # Safety
 `f` (and `out` when non-NULL) must hold `len` elements; `l1` writable.
 */
enum HgStatus hg_riesz(const struct HgGraph *g,
                       const double *f,
                       size_t len,
                       double tol,
                       double *out,
                       double *l1);

/*
 BMO norm over `s ∈ [1, s_max]`.

 # Safety
 `f` must hold `len` elements; `value` writable.
 */
enum HgStatus hg_bmo(const struct HgGraph *g,
                     const double *f,
                     size_t len,
                     enum HgBmoKind kind,
                     size_t m,
                     size_t s_max,
                     uint64_t seed,
                     double *value);

/*
 Molecular decomposition of a mean-zero `f`, as a JSON string to be
 released with [`hg_string_free`].

 # Safety
 `f` must hold `len` elements; `json` writable.
 */
enum HgStatus hg_decompose_json(const struct HgGraph *g,
                                const double *f,
                                size_t len,
                                size_t m,
                                double beta,
                                double eps,
                                double tol,
                                char **json);

/*
 # Safety
 `s` must come from this library, or be NULL.
 */
void hg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRAPH_HARDY_H */
