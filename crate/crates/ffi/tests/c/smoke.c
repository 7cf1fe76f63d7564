#include <math.h>
#include <stdio.h>
#include "vkit.h"

#define CHECK(expr)                                                        \
  do {                                                                     \
    if (!(expr)) {                                                         \
      fprintf(stderr, "check failed at line %d: %s\n", __LINE__, #expr);   \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  const double square[8] = {0, 0, 1, 0, 1, 1, 0, 1};
  VkitMetric *metric = NULL;
  CHECK(vkit_metric_from_points(square, 4, 2, &metric) == VKIT_STATUS_OK);
  CHECK(vkit_metric_len(metric) == 4);

  size_t sa[1] = {0}, sb[1] = {2};
  double w[1] = {1.0};
  double d = 0;
  CHECK(vkit_wasserstein(metric, sa, w, 1, sb, w, 1, &d) == VKIT_STATUS_OK);
  CHECK(fabs(d - sqrt(2.0)) < 1e-12);

  VkitComplex *complex = NULL;
  CHECK(vkit_complex_build(metric, VKIT_FILTRATION_VIETORIS_RIPS, INFINITY, 2, &complex) ==
        VKIT_STATUS_OK);
  VkitDiagram *diagram = NULL;
  CHECK(vkit_diagram_compute(complex, 1, &diagram) == VKIT_STATUS_OK);
  size_t h1 = 0;
  for (size_t i = 0; i < vkit_diagram_len(diagram); i++) {
    size_t dim;
    double b, e;
    CHECK(vkit_diagram_get(diagram, i, &dim, &b, &e) == VKIT_STATUS_OK);
    if (dim == 1) {
      h1++;
      CHECK(b == 1.0 && fabs(e - sqrt(2.0)) < 1e-12);
    }
  }
  CHECK(h1 == 1);

  const double bad[9] = {0, 1, 3, 1, 0, 1, 3, 1, 0};
  VkitMetric *rejected = NULL;
  CHECK(vkit_metric_from_matrix(bad, 3, &rejected) == VKIT_STATUS_INVALID_METRIC);
  CHECK(rejected == NULL);
  char msg[128];
  CHECK(vkit_last_error(msg, sizeof msg) > 0);

  vkit_diagram_free(diagram);
  vkit_complex_free(complex);
  vkit_metric_free(metric);
  puts("ok");
  return 0;
}
