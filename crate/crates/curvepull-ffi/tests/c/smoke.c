#include <stdio.h>
#include <string.h>
#include "curvepull.h"

static const char *CUBIC =
    "{\"num\":[\"1\",\"-3\",\"3\",\"-1\"],\"den\":[\"1\",\"6\",\"9\"],"
    "\"marked\":[\"0\",\"1\",\"inf\",\"1/5\"]}";

int main(void) {
    CpEvaluator *ev = NULL;
    if (cp_evaluator_from_spec(CUBIC, &ev) != CP_STATUS_OK) {
        fprintf(stderr, "build: %s\n", cp_last_error());
        return 1;
    }
    uint32_t deg = 0;
    cp_evaluator_degree(ev, &deg);
    CpFateKind kind;
    int64_t p = 0, q = 0, n = 0, d = 0;
    if (cp_cusp_fate(ev, 1, 2, &kind, &p, &q) != CP_STATUS_OK) return 2;
    if (cp_cusp_multiplier(ev, 1, 2, &n, &d) != CP_STATUS_OK) return 3;
    char *json = NULL;
    if (cp_attractor_json(ev, 3, 20, &json) != CP_STATUS_OK) return 4;
    int has_attractor = strstr(json, "\"attractor\"") != NULL;
    cp_string_free(json);
    CpEvaluator *bad = NULL;
    CpStatus s = cp_evaluator_from_spec("{", &bad);
    printf("deg=%u kind=%d target=%lld/%lld mult=%lld/%lld json=%d bad=%d null=%d\n", deg, (int)kind,
           (long long)p, (long long)q, (long long)n, (long long)d, has_attractor, (int)s, bad == NULL);
    cp_evaluator_free(ev);
    return 0;
}
