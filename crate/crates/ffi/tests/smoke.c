#include <math.h>
#include <stdio.h>
#include "ergox.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        ErgoxStatus s_ = (call);                                           \
        if (s_ != ERGOX_STATUS_OK) {                                       \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_,              \
                    ergox_last_error_message());                           \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    ErgoxModel *model = NULL;
    ErgoxState *state = NULL;
    ErgoxOperator *h = NULL;
    ErgoxProtocol *proto = NULL;
    double ge = 0.0, work = 0.0, heat = 0.0;

    CHECK(ergox_jc_model_new(1.0, 1.0, 0.1, 6, &model));
    CHECK(ergox_state_jc_product(model, 0, 5, &state));
    CHECK(ergox_jc_hamiltonian(model, ERGOX_MODE_FULL, &h));
    CHECK(ergox_ergotropy(state, h, &ge));
    CHECK(ergox_fock_protocol(model, 5, &proto));
    CHECK(ergox_apply_protocol(model, state, proto, ERGOX_MODE_FULL, &work, &heat));

    if (ergox_jc_model_new(1.0, 1.0, 0.1, 3, NULL) != ERGOX_STATUS_NULL_POINTER) {
        return 2;
    }
    printf("version=%s ge=%.9f work=%.9f ops=%zu\n", ergox_version(), ge, work,
           ergox_protocol_local_ops(proto));

    ergox_protocol_free(proto);
    ergox_operator_free(h);
    ergox_state_free(state);
    ergox_jc_model_free(model);
    return fabs(work - 5.0) < 1e-9 && fabs(ge - 5.0) < 1e-9 ? 0 : 3;
}
