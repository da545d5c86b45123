#include <math.h>
#include <stdio.h>

#include "transtorsion.h"

#define CHECK(cond)                                              \
    do {                                                         \
        if (!(cond)) {                                           \
            fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
            return 1;                                            \
        }                                                        \
    } while (0)

int main(void) {
    TtHomoclinic *h = NULL;
    TtReport *r = NULL;
    double a, b, dist, re[4], im[4];
    TtClassification cls;
    char msg[256];

    CHECK(tt_version()[0] != '\0');
    CHECK(tt_homoclinic_shear(1.0, &h) == TT_STATUS_OK);
    CHECK(tt_analyze(h, 0.6180339887498949, 1.0, 0.5, 2, TT_PRECISION_STANDARD, &r) == TT_STATUS_OK);
    CHECK(tt_report_coefficients(r, &a, &b) == TT_STATUS_OK);
    CHECK(fabs(a + 8.25) < 1e-12 && fabs(b - 19.0) < 1e-12);
    CHECK(tt_report_eigenvalues(r, re, im) == TT_STATUS_OK);
    CHECK(tt_report_classification(r, &cls, &dist) == TT_STATUS_OK);
    CHECK(cls == TT_CLASSIFICATION_HYPERBOLIC_REAL && dist > 0.7);
    tt_report_free(r);

    r = NULL;
    CHECK(tt_analyze(h, 0.6180339887498949, 1.0, 0.5, 47, TT_PRECISION_STANDARD, &r) ==
          TT_STATUS_CONDITIONING_EXCEEDED);
    CHECK(r == NULL);
    CHECK(tt_last_error(msg, sizeof msg) > 0);
    tt_homoclinic_free(h);

    double twice[16] = {2, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
    h = NULL;
    CHECK(tt_homoclinic_new(twice, &h) == TT_STATUS_NON_SYMPLECTIC);
    CHECK(h == NULL);
    CHECK(tt_homoclinic_new(NULL, &h) == TT_STATUS_NULL_POINTER);
    tt_homoclinic_free(NULL);

    puts("ok");
    return 0;
}
