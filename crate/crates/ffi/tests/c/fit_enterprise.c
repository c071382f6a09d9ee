#include <stdio.h>
#include "trunclife.h"

int main(void) {
    TlRecordSet *set = NULL;
    if (tl_records_enterprise(&set) != TL_STATUS_OK) {
        fprintf(stderr, "%s\n", tl_last_error());
        return 1;
    }
    TlFitResult fit;
    if (tl_fit(set, 2.0, 5.0, 0.95, &fit) != TL_STATUS_OK) {
        fprintf(stderr, "%s\n", tl_last_error());
        return 1;
    }
    printf("%zu %.4f %.3f\n", tl_records_len(set), fit.theta_hat, fit.alpha_hat);
    tl_records_free(set);

    double a;
    if (tl_alpha(0.3, 3.0, 2.0, &a) != TL_STATUS_INVALID_ARGUMENT || tl_last_error() == NULL) {
        return 2;
    }
    return 0;
}
