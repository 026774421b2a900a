/* Segments flat ground rings through the C API; exit code 0 on success. */
#define _DEFAULT_SOURCE
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "polarseg.h"

int main(void) {
    enum { N = 3600 };
    float xyzi[N * 4];
    for (int k = 0; k < N; ++k) {
        double a = (k % 360) * M_PI / 180.0, r = 3.0 + k / 360;
        xyzi[4 * k + 0] = (float)(r * cos(a));
        xyzi[4 * k + 1] = (float)(r * sin(a));
        xyzi[4 * k + 2] = -1.73f;
        xyzi[4 * k + 3] = 0.5f;
    }
    PsConfig *cfg = ps_config_default();
    PsResult *res = NULL;
    if (ps_segment(cfg, xyzi, N, 4, &res) != PS_STATUS_OK) {
        fprintf(stderr, "segment: %s\n", ps_last_error_message());
        return 1;
    }
    if (ps_result_len(res) != N || ps_result_num_ground(res) != N) return 2;
    const double *elev = ps_result_elevations(res);
    for (int k = 0; k < N; ++k)
        if (isnan(elev[k]) || fabs(elev[k] + 1.73) > 1e-3) return 3;
    size_t l = 0, m = 0;
    const uint8_t *cells = ps_result_cell_labels(res, &l, &m);
    if (l != 120 || m != 80 || cells == NULL) return 4;
    PsTimings t;
    if (ps_result_timings(res, &t) != PS_STATUS_OK || t.total_ms < 0.0) return 5;
    ps_result_free(res);

    PsConfig *bad = NULL;
    if (ps_config_parse("[grid]\nm = 0\n", &bad) == PS_STATUS_OK || bad != NULL) return 6;
    if (ps_last_error_message() == NULL || strlen(ps_last_error_message()) == 0) return 7;
    ps_config_free(cfg);
    printf("ok %s\n", ps_version());
    return 0;
}
