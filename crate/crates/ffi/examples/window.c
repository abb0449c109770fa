#include <stdio.h>
#include "semiclab.h"

int main(void) {
    SemiclabModel *model = NULL;
    SemiclabWindow *window = NULL;
    SemiclabObservable *obs = NULL;
    if (semiclab_model_new("quad-max", &model) != SEMICLAB_STATUS_OK ||
        semiclab_window_solve(model, 0.0, 3.0, 0.02, &window) != SEMICLAB_STATUS_OK ||
        semiclab_observable_parse("exp(-x^2-xi^2)", &obs) != SEMICLAB_STATUS_OK) {
        fprintf(stderr, "error: %s\n", semiclab_last_error());
        return 1;
    }
    size_t len = 0, written = 0;
    semiclab_window_len(window, &len);
    double values[64];
    if (len > 64 || semiclab_window_measure(window, obs, SEMICLAB_QUANTIZATION_WEYL, values, 64, &written)) {
        fprintf(stderr, "error: %s\n", semiclab_last_error());
        return 1;
    }
    for (size_t j = 0; j < written; j++) {
        double lambda;
        uint32_t weight;
        semiclab_window_eigenvalue(window, j, &lambda, &weight);
        printf("%zu %.8f %.6f\n", j, lambda, values[j]);
    }
    semiclab_observable_free(obs);
    semiclab_window_free(window);
    semiclab_model_free(model);
    return 0;
}
